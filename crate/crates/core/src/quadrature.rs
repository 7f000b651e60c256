use crate::lattice::C64;
use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pm) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    (x, w)
}

/// Tensor-product Gauss-Legendre rule over the box `[lo, hi]`.
pub fn integrate_box<F: Fn(&[f64]) -> C64>(f: F, lo: &[f64], hi: &[f64], order: usize) -> C64 {
    let (x, w) = gauss_legendre(order);
    let d = lo.len();
    let half: Vec<f64> = (0..d).map(|i| 0.5 * (hi[i] - lo[i])).collect();
    let mid: Vec<f64> = (0..d).map(|i| 0.5 * (hi[i] + lo[i])).collect();
    let jac: f64 = half.iter().product();
    let total = order.pow(d as u32);
    let mut point = vec![0.0; d];
    let mut sum = C64::new(0.0, 0.0);
    for flat in 0..total {
        let mut rem = flat;
        let mut weight = 1.0;
        for i in (0..d).rev() {
            let j = rem % order;
            rem /= order;
            point[i] = mid[i] + half[i] * x[j];
            weight *= w[j];
        }
        sum += weight * f(&point);
    }
    sum * jac
}
