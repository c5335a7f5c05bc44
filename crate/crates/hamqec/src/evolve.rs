//! State-vector time evolution and computational-subspace analysis.
//!
//! The idle Hamiltonian of a region is real symmetric, so the computational
//! basis vectors are real and phase fixing reduces to a sign convention
//! (diagonal overlaps positive). Trotterization is first order with all
//! single-site factors applied in row-major site order followed by pair
//! factors in sorted edge order; drive fields are sampled at step midpoints.
//! Step defaults follow the reference values: 0.02 ns for single-qubit
//! rounds, 0.065 ns for two-qubit rounds.

use ndarray::{Array1, Array2};
use rayon::prelude::*;
use serde_json::json;

use crate::control::{Compensation, GateSchedule};
use crate::device::IdleHamiltonian;
use crate::error::{Error, Result};
use crate::linalg::{self, C64};

pub const DT_1Q_NS: f64 = 0.02;
pub const DT_2Q_NS: f64 = 0.065;
/// Leakage above this invalidates the unitary approximation of a round.
pub const LEAKAGE_LIMIT: f64 = 0.05;

/// Computational subspace of an idle Hamiltonian: one phase-fixed (real,
/// positive-overlap) eigenvector per bitstring label.
#[derive(Clone, Debug)]
pub struct ComputationalBasis {
    /// Number of sites.
    pub m: usize,
    /// Levels per site in the underlying product space.
    pub levels: usize,
    /// D x 2^m matrix; column b is the eigenvector labeled by bitstring b.
    /// Site 0 maps to the most significant label bit.
    pub vectors: Array2<f64>,
    /// Eigenvalue (GHz) per label.
    pub comp_energies: Vec<f64>,
    pub overlap_threshold: f64,
    /// Full spectrum of the idle Hamiltonian (needed by the adjoint pass).
    pub full_values: Array1<f64>,
    pub full_vectors: Array2<f64>,
    /// Index into the full spectrum for each label.
    pub selected: Vec<usize>,
}

impl ComputationalBasis {
    pub fn dim(&self) -> usize {
        self.vectors.nrows()
    }

    pub fn comp_dim(&self) -> usize {
        1 << self.m
    }

    /// Product-basis index of the bare state for a bitstring label.
    pub fn bare_index(&self, label: usize) -> usize {
        let mut idx = 0usize;
        for s in 0..self.m {
            let bit = (label >> (self.m - 1 - s)) & 1;
            idx = idx * self.levels + bit;
        }
        idx
    }

    /// Complex view of the basis columns (imaginary parts are zero).
    pub fn vectors_complex(&self) -> Array2<C64> {
        self.vectors.mapv(|x| C64::new(x, 0.0))
    }
}

/// Pick the 2^m eigenvectors of the idle Hamiltonian that overlap bare
/// computational product states beyond the threshold (default 0.9), with the
/// sign fixed so each diagonal overlap is positive.
pub fn select_computational_basis(
    idle: &IdleHamiltonian,
    overlap_threshold: f64,
) -> Result<ComputationalBasis> {
    let m = idle.region.len();
    let levels = idle.levels;
    let h = idle.dense()?;
    let (vals, vecs) = linalg::eigh_real(&h.view())?;
    select_basis_from_eig(m, levels, vals, vecs, overlap_threshold)
}

pub(crate) fn select_basis_from_eig(
    m: usize,
    levels: usize,
    vals: Array1<f64>,
    vecs: Array2<f64>,
    overlap_threshold: f64,
) -> Result<ComputationalBasis> {
    let dim = vecs.nrows();
    let comp = 1usize << m;
    let mut selected = vec![usize::MAX; comp];
    let mut vectors = Array2::<f64>::zeros((dim, comp));
    let mut comp_energies = vec![0.0; comp];
    for label in 0..comp {
        let mut bare = 0usize;
        for s in 0..m {
            let bit = (label >> (m - 1 - s)) & 1;
            bare = bare * levels + bit;
        }
        let mut hit = None;
        for k in 0..dim {
            if vecs[[bare, k]].abs() > overlap_threshold {
                if hit.is_some() {
                    return Err(Error::Labeling {
                        bitstring: label as u64,
                        reason: "two eigenvectors exceed the overlap threshold".into(),
                    });
                }
                hit = Some(k);
            }
        }
        let k = hit.ok_or(Error::Labeling {
            bitstring: label as u64,
            reason: "no eigenvector exceeds the overlap threshold".into(),
        })?;
        selected[label] = k;
        let sign = if vecs[[bare, k]] >= 0.0 { 1.0 } else { -1.0 };
        for d in 0..dim {
            vectors[[d, label]] = sign * vecs[[d, k]];
        }
        comp_energies[label] = vals[k];
    }
    // Distinct labels must claim distinct eigenvectors.
    let mut sorted = selected.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != comp {
        return Err(Error::Labeling {
            bitstring: 0,
            reason: "one eigenvector claimed by two labels".into(),
        });
    }
    Ok(ComputationalBasis {
        m,
        levels,
        vectors,
        comp_energies,
        overlap_threshold,
        full_values: vals,
        full_vectors: vecs,
        selected,
    })
}

/// Walsh coefficients of the computational eigenvalues:
/// c_b = 2^-m sum_s (-1)^(b.s) E_s, with Z|0> = +|0>.
#[derive(Clone, Debug)]
pub struct WalshCoefficients {
    pub m: usize,
    /// Indexed by bitstring b.
    pub coeffs: Vec<f64>,
}

impl WalshCoefficients {
    pub fn weight(b: usize) -> u32 {
        b.count_ones()
    }

    /// Coefficients sorted by descending magnitude: (bitstring, weight, c_b).
    pub fn sorted_by_magnitude(&self) -> Vec<(usize, u32, f64)> {
        let mut v: Vec<(usize, u32, f64)> = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(b, &c)| (b, Self::weight(b), c))
            .collect();
        v.sort_by(|a, b| b.2.abs().partial_cmp(&a.2.abs()).unwrap());
        v
    }

    /// Largest |c_b| among coefficients with weight >= min_weight.
    pub fn dominant_weight_at_least(&self, min_weight: u32) -> Option<(usize, u32, f64)> {
        self.sorted_by_magnitude()
            .into_iter()
            .find(|&(_, w, _)| w >= min_weight)
    }

    pub fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .sorted_by_magnitude()
            .into_iter()
            .map(|(b, w, c)| {
                json!({
                    "bitstring": format!("{:0width$b}", b, width = self.m),
                    "weight": w,
                    "c_ghz": c,
                })
            })
            .collect();
        json!({ "m": self.m, "coefficients": rows })
    }
}

/// Fast Walsh-Hadamard transform of the computational eigenvalues.
pub fn walsh_transform(basis: &ComputationalBasis) -> WalshCoefficients {
    walsh_from_energies(basis.m, &basis.comp_energies)
}

pub fn walsh_from_energies(m: usize, energies: &[f64]) -> WalshCoefficients {
    let n = 1usize << m;
    assert_eq!(energies.len(), n);
    let mut c: Vec<f64> = energies.to_vec();
    let mut h = 1usize;
    while h < n {
        for block in (0..n).step_by(2 * h) {
            for i in block..block + h {
                let (x, y) = (c[i], c[i + h]);
                c[i] = x + y;
                c[i + h] = x - y;
            }
        }
        h *= 2;
    }
    for v in c.iter_mut() {
        *v /= n as f64;
    }
    WalshCoefficients { m, coeffs: c }
}

/// Inverse of [`walsh_from_energies`] (the transform is an involution up to
/// the 2^-m scale).
pub fn walsh_inverse(w: &WalshCoefficients) -> Vec<f64> {
    let n = 1usize << w.m;
    let scaled: Vec<f64> = w.coeffs.iter().map(|&c| c * n as f64).collect();
    walsh_from_energies(w.m, &scaled).coeffs
}

/// One Trotter factor set for a region: per-site diagonal energies plus the
/// precomputed pair exponentials and, when driven, the per-step single-site
/// exponentials.
pub struct TrotterPlan<'a> {
    pub idle: &'a IdleHamiltonian,
    pub drives: Vec<Option<crate::control::DriveSpec>>,
    pub dt: f64,
    pub steps: usize,
    /// exp(-i 2 pi E_k dt) per site, for undriven steps.
    site_idle_phases: Vec<Vec<C64>>,
    /// exp(-i 2 pi H_pair dt) per edge.
    pair_exp: Vec<Array2<C64>>,
    /// Eigensystems of the pair terms (for the adjoint pass).
    pub pair_eig: Vec<(Vec<f64>, Array2<f64>)>,
}

impl<'a> TrotterPlan<'a> {
    pub fn new(
        idle: &'a IdleHamiltonian,
        schedule: Option<&GateSchedule>,
        dt: f64,
        t_total: f64,
    ) -> Result<Self> {
        let steps_f = t_total / dt;
        let steps = steps_f.round() as usize;
        if (steps_f - steps as f64).abs() * dt > 1e-9 {
            return Err(Error::Numerical(format!(
                "dt {dt} does not divide t_total {t_total}"
            )));
        }
        let m = idle.region.len();
        let mut drives = vec![None; m];
        if let Some(s) = schedule {
            s.validate()?;
            for d in &s.drives {
                let site = idle.region.index_of(d.target).ok_or_else(|| {
                    Error::Config(format!("drive target {:?} outside region", d.target))
                })?;
                drives[site] = Some(*d);
            }
        }
        let two_pi = 2.0 * std::f64::consts::PI;
        let site_idle_phases = idle
            .qubits
            .iter()
            .map(|q| {
                q.energies
                    .iter()
                    .map(|&e| C64::from_polar(1.0, -two_pi * e * dt))
                    .collect()
            })
            .collect();
        let mut pair_exp = Vec::new();
        let mut pair_eig = Vec::new();
        for term in &idle.pair_terms {
            let (vals, vecs) = linalg::eigh_small(&term.view());
            pair_exp.push(linalg::expm_i_from_eig(&vals, &vecs.view(), two_pi * dt));
            pair_eig.push((vals, vecs));
        }
        Ok(Self { idle, drives, dt, steps, site_idle_phases, pair_exp, pair_eig })
    }

    /// Midpoint time of step s.
    pub fn t_mid(&self, s: usize) -> f64 {
        (s as f64 + 0.5) * self.dt
    }

    /// Single-site factor for site at step s: either the idle diagonal
    /// phases or a dense exponential when the drive field is non-zero.
    pub fn site_factor(&self, site: usize, step: usize) -> SiteFactor {
        let l = self.idle.levels;
        if let Some(d) = &self.drives[site] {
            let c = d.field(self.t_mid(step));
            if c != 0.0 {
                let q = &self.idle.qubits[site];
                let mut h = Array2::<f64>::zeros((l, l));
                for i in 0..l {
                    for j in 0..l {
                        h[[i, j]] = c * q.phi[[i, j]];
                    }
                    h[[i, i]] += q.energies[i];
                }
                let (vals, vecs) = linalg::eigh_small(&h.view());
                let u =
                    linalg::expm_i_from_eig(&vals, &vecs.view(), 2.0 * std::f64::consts::PI * self.dt);
                return SiteFactor::Dense { u, h_eig: (vals, vecs) };
            }
        }
        SiteFactor::Diagonal(self.site_idle_phases[site].clone())
    }

    /// Evolve a block of state columns (shape: columns x D) in place.
    pub fn evolve_block(&self, block: &mut Array2<C64>) -> Result<()> {
        let m = self.idle.region.len();
        let dim = self.idle.dim();
        if block.ncols() != dim {
            return Err(Error::Dimension(format!(
                "state dim {} vs region dim {}",
                block.ncols(),
                dim
            )));
        }
        for step in 0..self.steps {
            let factors: Vec<SiteFactor> =
                (0..m).map(|site| self.site_factor(site, step)).collect();
            let rows: Vec<_> = block.rows_mut().into_iter().collect();
            rows.into_par_iter().for_each(|mut row| {
                let v = row.as_slice_mut().expect("contiguous row");
                for (site, f) in factors.iter().enumerate() {
                    apply_site_factor(v, m, self.idle.levels, site, f);
                }
                for (e, &(a, b)) in self.idle.region.edges.iter().enumerate() {
                    apply_pair_op(v, m, self.idle.levels, a, b, &self.pair_exp[e]);
                }
            });
        }
        // Unitarity guard: rounding-level drift only.
        let tol = 1e-9 * (self.steps as f64 / 1000.0).max(1.0);
        for row in block.rows() {
            let n: f64 = row.iter().map(|c| c.norm_sqr()).sum();
            if (n.sqrt() - 1.0).abs() > tol {
                return Err(Error::Numerical(format!(
                    "state norm drifted to {} after {} steps",
                    n.sqrt(),
                    self.steps
                )));
            }
        }
        Ok(())
    }
}

pub enum SiteFactor {
    Diagonal(Vec<C64>),
    Dense { u: Array2<C64>, h_eig: (Vec<f64>, Array2<f64>) },
}

/// Apply a single-site operator to a contiguous state vector.
pub fn apply_site_factor(v: &mut [C64], m: usize, l: usize, site: usize, f: &SiteFactor) {
    let stride = l.pow((m - 1 - site) as u32);
    let outer = v.len() / (l * stride);
    match f {
        SiteFactor::Diagonal(phases) => {
            for p in 0..outer {
                let base = p * l * stride;
                for (k, ph) in phases.iter().enumerate() {
                    let off = base + k * stride;
                    for q in 0..stride {
                        v[off + q] *= ph;
                    }
                }
            }
        }
        SiteFactor::Dense { u, .. } => {
            let mut tmp = [C64::new(0.0, 0.0); 8];
            for p in 0..outer {
                let base = p * l * stride;
                for q in 0..stride {
                    for k in 0..l {
                        tmp[k] = v[base + k * stride + q];
                    }
                    for r in 0..l {
                        let mut acc = C64::new(0.0, 0.0);
                        for k in 0..l {
                            acc += u[[r, k]] * tmp[k];
                        }
                        v[base + r * stride + q] = acc;
                    }
                }
            }
        }
    }
}

/// Apply a two-site operator (dimension l^2) to sites a < b of a contiguous
/// state vector.
pub fn apply_pair_op(v: &mut [C64], m: usize, l: usize, a: usize, b: usize, u: &Array2<C64>) {
    debug_assert!(a < b);
    let stride_a = l.pow((m - 1 - a) as u32);
    let stride_b = l.pow((m - 1 - b) as u32);
    let pre = v.len() / (l * stride_a);
    let gap = stride_a / (l * stride_b);
    let post = stride_b;
    let mut tmp = [C64::new(0.0, 0.0); 16];
    let mut out = [C64::new(0.0, 0.0); 16];
    let ll = l * l;
    for p in 0..pre {
        for g in 0..gap {
            let base0 = p * l * stride_a + g * l * stride_b;
            for q in 0..post {
                let base = base0 + q;
                for la in 0..l {
                    for lb in 0..l {
                        tmp[la * l + lb] = v[base + la * stride_a + lb * stride_b];
                    }
                }
                for r in 0..ll {
                    let mut acc = C64::new(0.0, 0.0);
                    for k in 0..ll {
                        acc += u[[r, k]] * tmp[k];
                    }
                    out[r] = acc;
                }
                for la in 0..l {
                    for lb in 0..l {
                        v[base + la * stride_a + lb * stride_b] = out[la * l + lb];
                    }
                }
            }
        }
    }
}

/// First-order Trotter evolution of a single state.
pub fn trotter_evolve(
    idle: &IdleHamiltonian,
    schedule: Option<&GateSchedule>,
    psi0: &Array1<C64>,
    dt: f64,
    t_total: f64,
) -> Result<Array1<C64>> {
    let plan = TrotterPlan::new(idle, schedule, dt, t_total)?;
    let mut block = Array2::<C64>::zeros((1, psi0.len()));
    block.row_mut(0).assign(psi0);
    plan.evolve_block(&mut block)?;
    Ok(block.row(0).to_owned())
}

/// Result of evolving a round: the compensated matrix on the computational
/// labels, per-state leakage, and the average leakage.
#[derive(Clone, Debug)]
pub struct RoundResult {
    /// Compensated round matrix (approximately unitary when leakage is low).
    pub u_sim: Array2<C64>,
    /// Projected matrix before compensation.
    pub u_raw: Array2<C64>,
    /// l_i per initial basis state.
    pub leakage_per_state: Vec<f64>,
    /// 1 - tr(C^dag C)/D.
    pub p_leak: f64,
}

impl RoundResult {
    pub fn to_json(&self) -> serde_json::Value {
        let d = self.u_sim.nrows();
        let mat: Vec<Vec<[f64; 2]>> = (0..d)
            .map(|i| (0..d).map(|j| [self.u_sim[[i, j]].re, self.u_sim[[i, j]].im]).collect())
            .collect();
        json!({
            "dim": d,
            "p_leak": self.p_leak,
            "leakage_per_state": self.leakage_per_state,
            "u_sim_row_major_re_im": mat,
        })
    }
}

/// Evolve every computational basis state through a round, project back onto
/// the basis, check leakage, and apply compensation.
pub fn extract_round_unitary(
    idle: &IdleHamiltonian,
    basis: &ComputationalBasis,
    schedule: &GateSchedule,
    dt: f64,
) -> Result<RoundResult> {
    let duration = schedule.round_duration();
    // Snap the step count to the round duration.
    let steps = (duration / dt).ceil().max(1.0) as usize;
    let dt_eff = duration / steps as f64;
    let plan = TrotterPlan::new(idle, Some(schedule), dt_eff, duration)?;
    let comp_dim = basis.comp_dim();
    let dim = basis.dim();
    let mut block = Array2::<C64>::zeros((comp_dim, dim));
    for label in 0..comp_dim {
        for d in 0..dim {
            block[[label, d]] = C64::new(basis.vectors[[d, label]], 0.0);
        }
    }
    plan.evolve_block(&mut block)?;
    project_round(basis, &block, &schedule.compensation)
}

pub(crate) fn project_round(
    basis: &ComputationalBasis,
    evolved: &Array2<C64>,
    compensation: &Compensation,
) -> Result<RoundResult> {
    let comp_dim = basis.comp_dim();
    let dim = basis.dim();
    // u_raw[j, i] = <basis_j | evolved_i> (basis is real).
    let mut u_raw = Array2::<C64>::zeros((comp_dim, comp_dim));
    for i in 0..comp_dim {
        for j in 0..comp_dim {
            let mut acc = C64::new(0.0, 0.0);
            for d in 0..dim {
                acc += C64::new(basis.vectors[[d, j]], 0.0) * evolved[[i, d]];
            }
            u_raw[[j, i]] = acc;
        }
    }
    let mut leakage_per_state = Vec::with_capacity(comp_dim);
    let mut trace_gram = 0.0;
    for i in 0..comp_dim {
        let kept: f64 = (0..comp_dim).map(|j| u_raw[[j, i]].norm_sqr()).sum();
        trace_gram += kept;
        leakage_per_state.push((1.0 - kept).max(0.0).sqrt());
    }
    let p_leak = 1.0 - trace_gram / comp_dim as f64;
    if p_leak > LEAKAGE_LIMIT {
        return Err(Error::LeakageTooLarge { p_leak, limit: LEAKAGE_LIMIT });
    }
    let u_sim = crate::control::apply_compensation(&u_raw, compensation)?;
    Ok(RoundResult { u_sim, u_raw, leakage_per_state, p_leak })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::{DriveSpec, Envelope, TargetGate};
    use crate::device::{
        build_idle_hamiltonian, fluxonium_spectrum, sample_disordered_lattice, LatticeSpec, Region,
    };
    use std::collections::BTreeMap;

    fn two_qubit_idle(j_scale: f64) -> IdleHamiltonian {
        let mut spec = LatticeSpec::baseline_5x5();
        spec.disorder_sigma = 0.0;
        spec.j_c *= j_scale;
        spec.j_l *= j_scale;
        let lat = sample_disordered_lattice(&spec).unwrap();
        let region = Region::rect(0, 1, 0, 0);
        let mut map = BTreeMap::new();
        for &c in &region.coords {
            map.insert(c, fluxonium_spectrum(&lat[&c], 60, 3).unwrap());
        }
        build_idle_hamiltonian(&map, &spec, &region).unwrap()
    }

    #[test]
    fn zero_coupling_basis_is_bare() {
        let idle = two_qubit_idle(0.0);
        let basis = select_computational_basis(&idle, 0.9).unwrap();
        for label in 0..4 {
            let bare = basis.bare_index(label);
            for d in 0..basis.dim() {
                let expect = if d == bare { 1.0 } else { 0.0 };
                assert!((basis.vectors[[d, label]] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn coupled_basis_overlaps_and_residuals() {
        let idle = two_qubit_idle(0.5);
        let basis = select_computational_basis(&idle, 0.9).unwrap();
        let h = idle.dense().unwrap();
        for label in 0..4 {
            let bare = basis.bare_index(label);
            let overlap = basis.vectors[[bare, label]];
            assert!(overlap > 0.0, "phase fixing: diagonal overlap positive");
            assert!(overlap * overlap >= 0.99, "overlap^2 = {}", overlap * overlap);
            // Independent eigenpair verification: residual of H v = E v.
            let v = basis.vectors.column(label);
            let e = basis.comp_energies[label];
            let mut res = 0.0f64;
            for r in 0..basis.dim() {
                let mut hv = 0.0;
                for c in 0..basis.dim() {
                    hv += h[[r, c]] * v[c];
                }
                res = res.max((hv - e * v[r]).abs());
            }
            assert!(res < 1e-8, "residual {res}");
        }
        // Orthonormality.
        for a in 0..4 {
            for b in 0..4 {
                let dot: f64 = (0..basis.dim())
                    .map(|d| basis.vectors[[d, a]] * basis.vectors[[d, b]])
                    .sum();
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((dot - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn walsh_single_qubit_two_point() {
        let w = walsh_from_energies(1, &[0.0, 0.6]);
        assert!((w.coeffs[0] - 0.3).abs() < 1e-15);
        assert!((w.coeffs[1] + 0.3).abs() < 1e-15);
    }

    #[test]
    fn walsh_zero_coupling_has_no_high_weight() {
        let idle = two_qubit_idle(0.0);
        let basis = select_computational_basis(&idle, 0.9).unwrap();
        let w = walsh_transform(&basis);
        assert!(w.coeffs[0b11].abs() < 1e-10, "c_11 = {}", w.coeffs[0b11]);
    }

    #[test]
    fn walsh_involution_recovers_energies() {
        let energies = vec![0.3, -1.2, 0.7, 2.2, -0.4, 0.0, 1.1, -2.5];
        let w = walsh_from_energies(3, &energies);
        let back = walsh_inverse(&w);
        for (a, b) in energies.iter().zip(back.iter()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn trotter_zero_hamiltonian_is_identity() {
        let mut idle = two_qubit_idle(0.0);
        for q in idle.qubits.iter_mut() {
            q.energies = vec![0.0; 3];
        }
        let mut psi = Array1::<C64>::zeros(9);
        psi[0] = C64::new(0.6, 0.0);
        psi[4] = C64::new(0.8, 0.0);
        let out = trotter_evolve(&idle, None, &psi, 0.02, 1.0).unwrap();
        for (a, b) in out.iter().zip(psi.iter()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn trotter_diagonal_phases_exact() {
        let idle = two_qubit_idle(0.0);
        let mut psi = Array1::<C64>::zeros(9);
        for d in 0..9 {
            psi[d] = C64::new(1.0 / 3.0, 0.0);
        }
        let t = 7.0;
        let out = trotter_evolve(&idle, None, &psi, 0.07, t).unwrap();
        let two_pi = 2.0 * std::f64::consts::PI;
        for d in 0..9 {
            let e = idle.qubits[0].energies[d / 3] + idle.qubits[1].energies[d % 3];
            let expect = psi[d] * C64::from_polar(1.0, -two_pi * e * t);
            assert!((out[d] - expect).norm() < 1e-11);
        }
    }

    #[test]
    fn trotter_first_order_against_dense_expm() {
        let idle = two_qubit_idle(1.0);
        let h = idle.dense().unwrap();
        let (vals, vecs) = linalg::eigh_real(&h.view()).unwrap();
        let t = 10.0;
        let two_pi = 2.0 * std::f64::consts::PI;
        // Dense exact propagator applied to a fixed state.
        let mut psi = Array1::<C64>::zeros(9);
        for d in 0..9 {
            psi[d] = C64::new(((d + 1) as f64).sqrt(), 0.3 * d as f64);
        }
        let norm: f64 = psi.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        psi.mapv_inplace(|c| c / norm);
        let mut exact = Array1::<C64>::zeros(9);
        for k in 0..9 {
            let mut amp = C64::new(0.0, 0.0);
            for d in 0..9 {
                amp += C64::new(vecs[[d, k]], 0.0) * psi[d];
            }
            let phase = C64::from_polar(1.0, -two_pi * vals[k] * t);
            for d in 0..9 {
                exact[d] += C64::new(vecs[[d, k]], 0.0) * amp * phase;
            }
        }
        let err_at = |dt: f64| -> f64 {
            let out = trotter_evolve(&idle, None, &psi, dt, t).unwrap();
            out.iter().zip(exact.iter()).map(|(a, b)| (a - b).norm()).fold(0.0f64, f64::max)
        };
        let e1 = err_at(0.1);
        let e2 = err_at(0.05);
        assert!(e1 > 1e-12, "error should be measurable: {e1}");
        let ratio = e2 / e1;
        assert!((0.4..=0.6).contains(&ratio), "first-order ratio {ratio}");
    }

    #[test]
    fn zero_amplitude_round_is_idle_phases() {
        let idle = two_qubit_idle(1.0);
        let basis = select_computational_basis(&idle, 0.9).unwrap();
        let schedule = GateSchedule {
            drives: vec![DriveSpec {
                target: (0, 0),
                amplitude_ghz: 0.0,
                freq_ghz: 0.5,
                phase_rad: 0.0,
                envelope: Envelope::Cosine { tau_gate_ns: 10.0 },
            }],
            compensation: Compensation::identity_z(2),
            target: TargetGate::Identity,
        };
        let round = extract_round_unitary(&idle, &basis, &schedule, 0.01).unwrap();
        assert!(round.p_leak < 1e-6, "idle round leaks {}", round.p_leak);
        let two_pi = 2.0 * std::f64::consts::PI;
        for i in 0..4 {
            let expect = C64::from_polar(1.0, -two_pi * basis.comp_energies[i] * 10.0);
            // First-order Trotter at dt=0.01 over 10 ns: loose tolerance.
            assert!(
                (round.u_sim[[i, i]] - expect).norm() < 2e-3,
                "diag {i}: {} vs {}",
                round.u_sim[[i, i]],
                expect
            );
            for j in 0..4 {
                if i != j {
                    assert!(round.u_sim[[i, j]].norm() < 2e-3);
                }
            }
        }
        // Projection always contracts the Gram trace.
        let gram: f64 = round
            .u_raw
            .iter()
            .map(|c| c.norm_sqr())
            .sum();
        assert!(gram / 4.0 <= 1.0 + 1e-12);
    }

    #[test]
    fn single_z_walsh_removal_leaves_t_squared_error() {
        // Idling fidelity error after removing weight<=1 Walsh phases scales
        // as t^2 (driven by w>=2 coefficients).
        let idle = two_qubit_idle(1.0);
        let basis = select_computational_basis(&idle, 0.9).unwrap();
        let w = walsh_transform(&basis);
        let infidelity = |t: f64| -> f64 {
            // Exact idle evolution on the computational labels.
            let two_pi = 2.0 * std::f64::consts::PI;
            let mut fid = C64::new(0.0, 0.0);
            for label in 0..4usize {
                // Phase from w(b) <= 1 terms only.
                let mut e_low = w.coeffs[0];
                for s in 0..2 {
                    let b = 1usize << s;
                    let sign = if label & b != 0 { -1.0 } else { 1.0 };
                    e_low += sign * w.coeffs[b];
                }
                let full = C64::from_polar(1.0, -two_pi * basis.comp_energies[label] * t);
                let low = C64::from_polar(1.0, -two_pi * e_low * t);
                fid += full * low.conj();
            }
            1.0 - (fid.norm() / 4.0)
        };
        let (ta, tb) = (50.0, 100.0);
        let (ea, eb) = (infidelity(ta), infidelity(tb));
        assert!(ea > 1e-14, "residual should be visible: {ea}");
        let ratio = eb / ea;
        assert!((3.0..5.0).contains(&ratio), "t^2 scaling ratio {ratio}");
    }
}
