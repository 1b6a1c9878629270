use num_complex::Complex64;

/// Below this modulus `phi` sums a Taylor series instead of running the recurrence.
pub const TAYLOR_RADIUS: f64 = 0.5;
const TAYLOR_TERMS: usize = 20;

/// `φ_0(z) = e^z` and `φ_k(z) = ∫₀¹ e^{z(1−t)} t^{k−1} dt` for `k ≥ 1`.
///
/// With this normalization `φ_k(0) = 1/k` and `φ_{k+1}(z) = (k φ_k(z) − 1)/z`.
pub fn phi(k: usize, z: Complex64) -> Complex64 {
    if k == 0 {
        return z.exp();
    }
    if z.norm() < TAYLOR_RADIUS {
        return phi_taylor(k, z);
    }
    let one = Complex64::new(1.0, 0.0);
    let mut p = (z.exp() - one) / z;
    for m in 1..k {
        p = (p * m as f64 - one) / z;
    }
    p
}

/// `φ_1 … φ_k` in one pass, sharing the exponential.
pub fn phi_all(k: usize, z: Complex64, out: &mut Vec<Complex64>) {
    out.clear();
    if z.norm() < TAYLOR_RADIUS {
        out.extend((1..=k).map(|m| phi_taylor(m, z)));
        return;
    }
    let one = Complex64::new(1.0, 0.0);
    let mut p = (z.exp() - one) / z;
    for m in 1..=k {
        out.push(p);
        p = (p * m as f64 - one) / z;
    }
}

/// `(k−1)! Σ_j z^j/(j+k)!`, truncated.
fn phi_taylor(k: usize, z: Complex64) -> Complex64 {
    let mut term = Complex64::new(1.0 / k as f64, 0.0);
    let mut sum = term;
    for j in 1..TAYLOR_TERMS {
        term = term * z / (j + k) as f64;
        sum += term;
    }
    sum
}
