//! Time-dependent drives and the compensation applied around a gate round.
//!
//! Drives couple through the flux operator phi: H_drive(t) = E(t) cos(2 pi
//! f_d t + phase) * phi. Amplitudes and frequencies are linear GHz, times ns,
//! angles radians. Simultaneous drives of unequal duration share one round
//! window equal to the longest gate; shorter drives are padded with zero
//! field and the system idles under H(0) for the remainder.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::device::{Coord, TruncatedQubit};
use crate::error::{Error, Result};
use crate::linalg::{self, C64};

/// Pulse envelope shapes. `Cosine` is the single-qubit Rabi pulse,
/// `FlatTop` the cross-resonance pulse with cosine ramps.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Envelope {
    Cosine { tau_gate_ns: f64 },
    FlatTop { tau_ramp_ns: f64, tau_plateau_ns: f64 },
}

impl Envelope {
    pub fn total_duration(&self) -> f64 {
        match *self {
            Envelope::Cosine { tau_gate_ns } => tau_gate_ns,
            Envelope::FlatTop { tau_ramp_ns, tau_plateau_ns } => {
                2.0 * tau_ramp_ns + tau_plateau_ns
            }
        }
    }

    /// Envelope value at time t for peak amplitude `eps_d`; zero outside
    /// [0, total_duration].
    pub fn value(&self, eps_d: f64, t: f64) -> f64 {
        if t < 0.0 {
            return 0.0;
        }
        match *self {
            Envelope::Cosine { tau_gate_ns } => {
                if t > tau_gate_ns {
                    0.0
                } else {
                    0.5 * eps_d * (1.0 - (2.0 * std::f64::consts::PI * t / tau_gate_ns).cos())
                }
            }
            Envelope::FlatTop { tau_ramp_ns, tau_plateau_ns } => {
                let tau_gate = 2.0 * tau_ramp_ns + tau_plateau_ns;
                if t > tau_gate {
                    0.0
                } else if t <= tau_ramp_ns {
                    0.5 * eps_d * (1.0 - (std::f64::consts::PI * t / tau_ramp_ns).cos())
                } else if t <= tau_gate - tau_ramp_ns {
                    eps_d
                } else {
                    0.5 * eps_d
                        * (1.0 - (std::f64::consts::PI * (tau_gate - t) / tau_ramp_ns).cos())
                }
            }
        }
    }
}

/// One microwave drive on one qubit.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DriveSpec {
    pub target: Coord,
    /// Peak amplitude eps_d (GHz).
    pub amplitude_ghz: f64,
    /// Drive frequency omega_d / 2 pi (GHz).
    pub freq_ghz: f64,
    /// Phase (radians).
    pub phase_rad: f64,
    pub envelope: Envelope,
}

impl DriveSpec {
    pub fn validate(&self) -> Result<()> {
        if self.amplitude_ghz < 0.0 {
            return Err(Error::Config("drive amplitude must be >= 0".into()));
        }
        let ok = match self.envelope {
            Envelope::Cosine { tau_gate_ns } => tau_gate_ns > 0.0,
            Envelope::FlatTop { tau_ramp_ns, tau_plateau_ns } => {
                tau_ramp_ns > 0.0 && tau_plateau_ns >= 0.0
            }
        };
        if !ok {
            return Err(Error::Config("drive durations must be positive".into()));
        }
        Ok(())
    }

    pub fn envelope_value(&self, t: f64) -> f64 {
        self.envelope.value(self.amplitude_ghz, t)
    }

    /// Field coefficient E(t) cos(2 pi f t + phase) multiplying phi (GHz).
    pub fn field(&self, t: f64) -> f64 {
        self.envelope_value(t)
            * (2.0 * std::f64::consts::PI * self.freq_ghz * t + self.phase_rad).cos()
    }

    /// Partial derivatives of `field(t)` with respect to (amplitude, freq,
    /// phase, durations). Used by the adjoint pass. For `Cosine` only
    /// `d_dur[0]` (tau_gate) is populated; for `FlatTop` the pair is
    /// (d/d tau_ramp, d/d tau_plateau).
    pub fn field_partials(&self, t: f64) -> FieldPartials {
        let pi = std::f64::consts::PI;
        let carrier = (2.0 * pi * self.freq_ghz * t + self.phase_rad).cos();
        let carrier_d = -(2.0 * pi * self.freq_ghz * t + self.phase_rad).sin();
        let env = self.envelope_value(t);
        let d_amp = self.envelope.value(1.0, t) * carrier;
        let d_freq = env * carrier_d * 2.0 * pi * t;
        let d_phase = env * carrier_d;
        let eps = self.amplitude_ghz;
        let d_dur = match self.envelope {
            Envelope::Cosine { tau_gate_ns } => {
                let de = if t <= 0.0 || t > tau_gate_ns {
                    0.0
                } else {
                    // d/d tau of eps/2 (1 - cos(2 pi t/tau))
                    -0.5 * eps * (2.0 * pi * t / tau_gate_ns).sin() * 2.0 * pi * t
                        / (tau_gate_ns * tau_gate_ns)
                };
                [de * carrier, 0.0]
            }
            Envelope::FlatTop { tau_ramp_ns, tau_plateau_ns } => {
                let tau_gate = 2.0 * tau_ramp_ns + tau_plateau_ns;
                let (de_ramp, de_plateau) = if t <= 0.0 || t > tau_gate {
                    (0.0, 0.0)
                } else if t <= tau_ramp_ns {
                    let s = (pi * t / tau_ramp_ns).sin();
                    (-0.5 * eps * s * pi * t / (tau_ramp_ns * tau_ramp_ns), 0.0)
                } else if t <= tau_gate - tau_ramp_ns {
                    (0.0, 0.0)
                } else {
                    // Tail ramp argument: pi (tau_gate - t)/tau_ramp with
                    // tau_gate = 2 tau_ramp + tau_plateau.
                    let u = tau_gate - t;
                    let s = (pi * u / tau_ramp_ns).sin();
                    let d_arg_dramp = pi * (2.0 * tau_ramp_ns - u) / (tau_ramp_ns * tau_ramp_ns);
                    let d_arg_dplat = pi / tau_ramp_ns;
                    (0.5 * eps * s * d_arg_dramp, 0.5 * eps * s * d_arg_dplat)
                };
                [de_ramp * carrier, de_plateau * carrier]
            }
        };
        FieldPartials { d_amp, d_freq, d_phase, d_dur }
    }
}

pub struct FieldPartials {
    pub d_amp: f64,
    pub d_freq: f64,
    pub d_phase: f64,
    pub d_dur: [f64; 2],
}

/// Drive Hamiltonian term at time t in the qubit's truncated eigenbasis.
pub fn drive_hamiltonian_term(spec: &DriveSpec, t: f64, qubit: &TruncatedQubit) -> Array2<C64> {
    let c = spec.field(t);
    qubit.phi.mapv(|x| C64::new(c * x, 0.0))
}

/// Compensation around a round: per-qubit Z rotations for single-qubit
/// rounds, per-qubit 3-angle unitaries (Rz Ry Rz) for two-qubit rounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Compensation {
    ZRotations { z_before: Vec<f64>, z_after: Vec<f64> },
    SingleQubitUnitaries { u_before: Vec<[f64; 3]>, u_after: Vec<[f64; 3]> },
}

impl Compensation {
    pub fn identity_z(m: usize) -> Self {
        Compensation::ZRotations { z_before: vec![0.0; m], z_after: vec![0.0; m] }
    }

    pub fn identity_u(m: usize) -> Self {
        Compensation::SingleQubitUnitaries {
            u_before: vec![[0.0; 3]; m],
            u_after: vec![[0.0; 3]; m],
        }
    }

    pub fn qubits(&self) -> usize {
        match self {
            Compensation::ZRotations { z_before, .. } => z_before.len(),
            Compensation::SingleQubitUnitaries { u_before, .. } => u_before.len(),
        }
    }

    pub fn angle_count(&self) -> usize {
        match self {
            Compensation::ZRotations { z_before, z_after } => z_before.len() + z_after.len(),
            Compensation::SingleQubitUnitaries { u_before, u_after } => {
                3 * (u_before.len() + u_after.len())
            }
        }
    }

    pub fn angles(&self) -> Vec<f64> {
        match self {
            Compensation::ZRotations { z_before, z_after } => {
                z_before.iter().chain(z_after.iter()).copied().collect()
            }
            Compensation::SingleQubitUnitaries { u_before, u_after } => u_before
                .iter()
                .chain(u_after.iter())
                .flat_map(|a| a.iter().copied())
                .collect(),
        }
    }

    pub fn set_angles(&mut self, angles: &[f64]) {
        match self {
            Compensation::ZRotations { z_before, z_after } => {
                let m = z_before.len();
                z_before.copy_from_slice(&angles[..m]);
                z_after.copy_from_slice(&angles[m..2 * m]);
            }
            Compensation::SingleQubitUnitaries { u_before, u_after } => {
                let m = u_before.len();
                for (i, a) in u_before.iter_mut().enumerate() {
                    a.copy_from_slice(&angles[3 * i..3 * i + 3]);
                }
                for (i, a) in u_after.iter_mut().enumerate() {
                    let o = 3 * m + 3 * i;
                    a.copy_from_slice(&angles[o..o + 3]);
                }
            }
        }
    }

    /// Dense before/after operators on the 2^m computational space.
    pub fn operators(&self) -> (Array2<C64>, Array2<C64>) {
        match self {
            Compensation::ZRotations { z_before, z_after } => (
                kron_chain(z_before.iter().map(|&t| rz(t))),
                kron_chain(z_after.iter().map(|&t| rz(t))),
            ),
            Compensation::SingleQubitUnitaries { u_before, u_after } => (
                kron_chain(u_before.iter().map(|a| euler_zyz(a[0], a[1], a[2]))),
                kron_chain(u_after.iter().map(|a| euler_zyz(a[0], a[1], a[2]))),
            ),
        }
    }
}

pub fn rz(theta: f64) -> Array2<C64> {
    let mut m = Array2::<C64>::zeros((2, 2));
    m[[0, 0]] = C64::from_polar(1.0, -0.5 * theta);
    m[[1, 1]] = C64::from_polar(1.0, 0.5 * theta);
    m
}

pub fn ry(theta: f64) -> Array2<C64> {
    let (c, s) = ((0.5 * theta).cos(), (0.5 * theta).sin());
    let mut m = Array2::<C64>::zeros((2, 2));
    m[[0, 0]] = C64::new(c, 0.0);
    m[[0, 1]] = C64::new(-s, 0.0);
    m[[1, 0]] = C64::new(s, 0.0);
    m[[1, 1]] = C64::new(c, 0.0);
    m
}

/// Rz(a) * Ry(b) * Rz(c).
pub fn euler_zyz(a: f64, b: f64, c: f64) -> Array2<C64> {
    let m = linalg::matmul_c(&rz(a).view(), &ry(b).view());
    linalg::matmul_c(&m.view(), &rz(c).view())
}

fn kron_chain(ops: impl Iterator<Item = Array2<C64>>) -> Array2<C64> {
    let mut acc = Array2::<C64>::from_shape_fn((1, 1), |_| C64::new(1.0, 0.0));
    for op in ops {
        acc = linalg::kron_c(&acc.view(), &op.view());
    }
    acc
}

/// C_after * u_round * C_before on the 2^m computational space.
pub fn apply_compensation(u_round: &Array2<C64>, comp: &Compensation) -> Result<Array2<C64>> {
    let dim = 1usize << comp.qubits();
    if u_round.nrows() != dim || u_round.ncols() != dim {
        return Err(Error::Dimension(format!(
            "compensation on {} qubits vs round dim {}",
            comp.qubits(),
            u_round.nrows()
        )));
    }
    let (before, after) = comp.operators();
    let tmp = linalg::matmul_c(&u_round.view(), &before.view());
    Ok(linalg::matmul_c(&after.view(), &tmp.view()))
}

/// The ideal operation a round implements on the computational labels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum TargetGate {
    Identity,
    /// X on every qubit.
    XAll,
    /// CNOTs on disjoint (control, target) site-index pairs.
    CnotPairs(Vec<(usize, usize)>),
}

impl TargetGate {
    /// Dense matrix on the 2^m label space. Site 0 is the highest label bit,
    /// matching the row-major site ordering of the basis.
    pub fn matrix(&self, m: usize) -> Array2<C64> {
        let dim = 1usize << m;
        let mut u = Array2::<C64>::zeros((dim, dim));
        match self {
            TargetGate::Identity => {
                for i in 0..dim {
                    u[[i, i]] = C64::new(1.0, 0.0);
                }
            }
            TargetGate::XAll => {
                for col in 0..dim {
                    u[[col ^ (dim - 1), col]] = C64::new(1.0, 0.0);
                }
            }
            TargetGate::CnotPairs(pairs) => {
                for col in 0..dim {
                    let mut row = col;
                    for &(ctl, tgt) in pairs {
                        let cbit = (col >> (m - 1 - ctl)) & 1;
                        if cbit == 1 {
                            row ^= 1 << (m - 1 - tgt);
                        }
                    }
                    u[[row, col]] = C64::new(1.0, 0.0);
                }
            }
        }
        u
    }
}

/// One round of simultaneous drives plus compensation and a target label.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GateSchedule {
    pub drives: Vec<DriveSpec>,
    pub compensation: Compensation,
    pub target: TargetGate,
}

impl GateSchedule {
    /// Common round duration: the longest drive (shorter drives are padded
    /// with zero field; idling continues under H(0)).
    pub fn round_duration(&self) -> f64 {
        self.drives
            .iter()
            .map(|d| d.envelope.total_duration())
            .fold(0.0, f64::max)
    }

    pub fn validate(&self) -> Result<()> {
        for d in &self.drives {
            d.validate()?;
        }
        let mut targets: Vec<Coord> = self.drives.iter().map(|d| d.target).collect();
        targets.sort();
        targets.dedup();
        if targets.len() != self.drives.len() {
            return Err(Error::Config("at most one drive per qubit per round".into()));
        }
        Ok(())
    }
}
