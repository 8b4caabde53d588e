//! In-place transforms over the subset lattice of a dense table indexed by
//! local bitmask. All are O(N 2^N).

use num_complex::Complex64;

fn check_len(len: usize) -> usize {
    assert!(len.is_power_of_two(), "table length must be a power of two");
    len.trailing_zeros() as usize
}

/// `a[m] <- sum_{s subset of m} a[s]`.
pub fn subset_zeta(a: &mut [Complex64]) {
    let n = check_len(a.len());
    for i in 0..n {
        let bit = 1usize << i;
        for m in 0..a.len() {
            if m & bit != 0 {
                let lower = a[m ^ bit];
                a[m] += lower;
            }
        }
    }
}

/// Inverse of [`subset_zeta`]: `a[m] <- sum_{s subset of m} (-1)^{|m \ s|} a[s]`.
pub fn subset_mobius(a: &mut [Complex64]) {
    let n = check_len(a.len());
    for i in 0..n {
        let bit = 1usize << i;
        for m in 0..a.len() {
            if m & bit != 0 {
                let lower = a[m ^ bit];
                a[m] -= lower;
            }
        }
    }
}

/// `a[m] <- sum_{s superset of m} a[s]`.
pub fn superset_zeta(a: &mut [Complex64]) {
    let n = check_len(a.len());
    for i in 0..n {
        let bit = 1usize << i;
        for m in 0..a.len() {
            if m & bit == 0 {
                let upper = a[m | bit];
                a[m] += upper;
            }
        }
    }
}

/// Inverse of [`superset_zeta`].
pub fn superset_mobius(a: &mut [Complex64]) {
    let n = check_len(a.len());
    for i in 0..n {
        let bit = 1usize << i;
        for m in 0..a.len() {
            if m & bit == 0 {
                let upper = a[m | bit];
                a[m] -= upper;
            }
        }
    }
}

/// `a[m] <- sum_{s superset of m} a[s] prod_{i in s \ m} c_i`.
///
/// With `c_i = theta0_i sigma_i` this maps a coefficient table of `L` to the
/// coefficient table of `L(theta0 + .)`.
pub fn weighted_superset_zeta(a: &mut [Complex64], c: &[Complex64]) {
    let n = check_len(a.len());
    assert_eq!(c.len(), n, "one weight per local site");
    for (i, &ci) in c.iter().enumerate() {
        let bit = 1usize << i;
        for m in 0..a.len() {
            if m & bit == 0 {
                let upper = a[m | bit];
                a[m] += ci * upper;
            }
        }
    }
}

/// Table of `prod_{i in m} f_i` for every local mask `m`.
pub fn product_table(f: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); 1usize << f.len()];
    out[0] = Complex64::new(1.0, 0.0);
    for m in 1..out.len() {
        let low = m.trailing_zeros() as usize;
        out[m] = out[m & (m - 1)] * f[low];
    }
    out
}

/// `sum_m a[m] prod_{i in m} f_i` without materialising the product table
/// more than once.
pub fn multilinear_eval(a: &[Complex64], f: &[Complex64]) -> Complex64 {
    // Successive per-site contraction: each pass folds one variable,
    // halving the table. Cheaper in memory traffic than a product table.
    let n = check_len(a.len());
    assert_eq!(f.len(), n);
    if n == 0 {
        return a[0];
    }
    let mut buf: Vec<Complex64> = Vec::with_capacity(a.len() / 2);
    let half = a.len() / 2;
    let top = f[n - 1];
    buf.extend((0..half).map(|m| a[m] + top * a[m + half]));
    let mut len = half;
    for i in (0..n - 1).rev() {
        let h = len / 2;
        for m in 0..h {
            buf[m] = buf[m] + f[i] * buf[m + h];
        }
        len = h;
    }
    buf[0]
}
