fn main() {
    // Reference LAPACK/BLAS from the system; only dsyevd is bound (see linalg.rs).
    println!("cargo:rustc-link-lib=dylib=lapack");
    println!("cargo:rustc-link-lib=dylib=blas");
}
