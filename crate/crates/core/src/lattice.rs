use crate::error::{KgError, Result};
use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use serde::{Deserialize, Serialize};
use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

pub type C64 = Complex64;

/// Periodic box `[-L/2, L/2)^d` with `N` nodes per axis and wave numbers `2 pi n / L`,
/// `n in [-N/2, N/2)`. Mode arrays are stored in FFT bin order, row-major, axis 0 slowest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawLattice", into = "RawLattice")]
pub struct MomentumLattice {
    l: Vec<f64>,
    n: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct RawLattice {
    #[serde(rename = "L")]
    l: Vec<f64>,
    #[serde(rename = "N")]
    n: Vec<usize>,
}

impl TryFrom<RawLattice> for MomentumLattice {
    type Error = KgError;
    fn try_from(r: RawLattice) -> Result<Self> {
        MomentumLattice::new(r.l, r.n)
    }
}

impl From<MomentumLattice> for RawLattice {
    fn from(m: MomentumLattice) -> Self {
        RawLattice { l: m.l, n: m.n }
    }
}

/// Sampled values on the nodes of a lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    pub lattice: MomentumLattice,
    pub values: Vec<T>,
}

impl<T> Grid<T> {
    pub fn new(lattice: MomentumLattice, values: Vec<T>) -> Self {
        debug_assert_eq!(lattice.len(), values.len());
        Grid { lattice, values }
    }
}

impl Grid<f64> {
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.lattice.cell_volume()
    }
}

impl Grid<C64> {
    pub fn max_abs(&self) -> f64 {
        max_abs(&self.values)
    }

    pub fn integral(&self) -> C64 {
        self.values.iter().sum::<C64>() * self.lattice.cell_volume()
    }
}

pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().fold(0.0, |m, z| m.max(z.norm()))
}

pub fn l2_norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs_diff(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).norm()))
}

impl MomentumLattice {
    pub fn new(l: Vec<f64>, n: Vec<usize>) -> Result<Self> {
        let d = l.len();
        if !(1..=3).contains(&d) || n.len() != d {
            return Err(KgError::UnsupportedDimension(d.max(n.len())));
        }
        for &li in &l {
            if !(li.is_finite() && li > 0.0) {
                return Err(KgError::InvalidParameter(format!(
                    "box length must be positive, got {li}"
                )));
            }
        }
        for &ni in &n {
            if ni < 4 || ni % 2 != 0 {
                return Err(KgError::InvalidParameter(format!(
                    "point counts must be even and >= 4, got {ni}"
                )));
            }
        }
        Ok(MomentumLattice { l, n })
    }

    pub fn cubic(d: usize, l: f64, n: usize) -> Result<Self> {
        Self::new(vec![l; d], vec![n; d])
    }

    pub fn dim(&self) -> usize {
        self.l.len()
    }

    pub fn lengths(&self) -> &[f64] {
        &self.l
    }

    pub fn counts(&self) -> &[usize] {
        &self.n
    }

    pub fn len(&self) -> usize {
        self.n.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn volume(&self) -> f64 {
        self.l.iter().product()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.l[axis] / self.n[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.volume() / self.len() as f64
    }

    /// Same box, twice the nodes per axis.
    pub fn padded(&self) -> MomentumLattice {
        MomentumLattice {
            l: self.l.clone(),
            n: self.n.iter().map(|n| 2 * n).collect(),
        }
    }

    pub fn strides(&self) -> Vec<usize> {
        let d = self.dim();
        let mut s = vec![1; d];
        for i in (0..d.saturating_sub(1)).rev() {
            s[i] = s[i + 1] * self.n[i + 1];
        }
        s
    }

    pub fn multi_index(&self, flat: usize) -> [usize; 3] {
        let mut out = [0; 3];
        let mut rem = flat;
        for i in (0..self.dim()).rev() {
            out[i] = rem % self.n[i];
            rem /= self.n[i];
        }
        out
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.n).fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Signed wave-number indices of the FFT bin at `flat`.
    pub fn signed_index(&self, flat: usize) -> [i64; 3] {
        let bins = self.multi_index(flat);
        let mut out = [0i64; 3];
        for i in 0..self.dim() {
            let n = self.n[i] as i64;
            let b = bins[i] as i64;
            out[i] = if b < n / 2 { b } else { b - n };
        }
        out
    }

    /// Bin for a signed index, or `None` outside `[-N/2, N/2)`.
    pub fn flat_from_signed(&self, s: &[i64]) -> Option<usize> {
        let mut flat = 0usize;
        for (i, &si) in s.iter().enumerate().take(self.dim()) {
            let n = self.n[i] as i64;
            if si < -n / 2 || si >= n / 2 {
                return None;
            }
            flat = flat * self.n[i] + si.rem_euclid(n) as usize;
        }
        Some(flat)
    }

    /// Bin of `-k`; the Nyquist bin maps to itself.
    pub fn neg_flat(&self, flat: usize) -> usize {
        let bins = self.multi_index(flat);
        let mut out = 0;
        for i in 0..self.dim() {
            out = out * self.n[i] + (self.n[i] - bins[i]) % self.n[i];
        }
        out
    }

    pub fn is_nyquist(&self, flat: usize) -> bool {
        let s = self.signed_index(flat);
        (0..self.dim()).any(|i| s[i] == -(self.n[i] as i64) / 2)
    }

    pub fn wavevector(&self, flat: usize) -> [f64; 3] {
        let s = self.signed_index(flat);
        let mut k = [0.0; 3];
        for i in 0..self.dim() {
            k[i] = 2.0 * PI * s[i] as f64 / self.l[i];
        }
        k
    }

    pub fn ksq(&self, flat: usize) -> f64 {
        self.wavevector(flat).iter().map(|k| k * k).sum()
    }

    pub fn ksq_all(&self) -> Vec<f64> {
        (0..self.len()).map(|f| self.ksq(f)).collect()
    }

    pub fn k_axis_all(&self, axis: usize) -> Vec<f64> {
        (0..self.len()).map(|f| self.wavevector(f)[axis]).collect()
    }

    /// Node coordinates `-L/2 + j h`.
    pub fn node_position(&self, flat: usize) -> [f64; 3] {
        let idx = self.multi_index(flat);
        let mut x = [0.0; 3];
        for i in 0..self.dim() {
            x[i] = -0.5 * self.l[i] + idx[i] as f64 * self.spacing(i);
        }
        x
    }

    /// Node index of `point` if it coincides with a node to `1e-9` of the spacing.
    pub fn node_of(&self, point: &[f64]) -> Result<usize> {
        if point.len() != self.dim() {
            return Err(KgError::OffGrid);
        }
        let mut idx = [0usize; 3];
        for i in 0..self.dim() {
            let h = self.spacing(i);
            let j = (point[i] + 0.5 * self.l[i]) / h;
            let jr = j.round();
            if (j - jr).abs() > 1e-9 || jr < 0.0 || jr >= self.n[i] as f64 {
                return Err(KgError::OffGrid);
            }
            idx[i] = jr as usize;
        }
        Ok(self.flat_index(&idx[..self.dim()]))
    }

    pub fn check_len(&self, got: usize) -> Result<()> {
        if got != self.len() {
            return Err(KgError::ShapeMismatch {
                expected: self.len(),
                got,
            });
        }
        Ok(())
    }

    fn parity_sign(&self, flat: usize) -> f64 {
        let s = self.signed_index(flat);
        let total: i64 = s.iter().take(self.dim()).sum();
        if total.rem_euclid(2) == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Mode coefficients `c_n` with `samples(x_j) = sum_n c_n e^{i k_n x_j}`.
    pub fn to_modes(&self, samples: &[C64]) -> Vec<C64> {
        let mut data = samples.to_vec();
        fft_nd(&mut data, &self.n, FftDirection::Forward);
        let norm = 1.0 / self.len() as f64;
        for (f, c) in data.iter_mut().enumerate() {
            *c *= norm * self.parity_sign(f);
        }
        data
    }

    /// Samples at the nodes of this lattice from mode coefficients.
    pub fn to_samples(&self, modes: &[C64]) -> Vec<C64> {
        let mut data: Vec<C64> = modes
            .iter()
            .enumerate()
            .map(|(f, c)| c * self.parity_sign(f))
            .collect();
        fft_nd(&mut data, &self.n, FftDirection::Inverse);
        data
    }

    /// Places this lattice's modes into the bin layout of a finer lattice over the same box.
    pub fn embed_into(&self, fine: &MomentumLattice, modes: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); fine.len()];
        for (f, c) in modes.iter().enumerate() {
            let s = self.signed_index(f);
            let g = fine
                .flat_from_signed(&s[..self.dim()])
                .expect("fine lattice covers coarse modes");
            out[g] = *c;
        }
        out
    }

    /// Samples on the 2x padded grid of a band-limited mode array.
    pub fn to_padded_samples(&self, modes: &[C64]) -> Vec<C64> {
        let fine = self.padded();
        fine.to_samples(&self.embed_into(&fine, modes))
    }

    /// Applies a mode-wise multiplier to grid samples.
    pub fn apply_multiplier<F: Fn(usize) -> C64>(&self, samples: &[C64], mult: F) -> Vec<C64> {
        let mut modes = self.to_modes(samples);
        for (f, c) in modes.iter_mut().enumerate() {
            *c *= mult(f);
        }
        self.to_samples(&modes)
    }

    /// Spectral derivative along `axis` of a mode array.
    pub fn derivative_modes(&self, modes: &[C64], axis: usize) -> Vec<C64> {
        modes
            .iter()
            .enumerate()
            .map(|(f, c)| c * C64::new(0.0, self.wavevector(f)[axis]))
            .collect()
    }
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(len: usize, dir: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| p.borrow_mut().plan_fft(len, dir))
}

/// Unnormalized multidimensional FFT over a row-major array.
pub(crate) fn fft_nd(data: &mut [C64], shape: &[usize], dir: FftDirection) {
    let total: usize = shape.iter().product();
    debug_assert_eq!(total, data.len());
    let d = shape.len();
    for axis in 0..d {
        let n = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let fft = plan(n, dir);
        if stride == 1 {
            fft.process(data);
            continue;
        }
        let outer = total / (n * stride);
        let mut buf = vec![C64::new(0.0, 0.0); n];
        for o in 0..outer {
            for s in 0..stride {
                let base = o * n * stride + s;
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = data[base + j * stride];
                }
                fft.process(&mut buf);
                for (j, b) in buf.iter().enumerate() {
                    data[base + j * stride] = *b;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(MomentumLattice::new(vec![1.0], vec![6]).is_ok());
        assert!(MomentumLattice::new(vec![1.0], vec![5]).is_err());
        assert!(MomentumLattice::new(vec![1.0], vec![2]).is_err());
        assert!(MomentumLattice::new(vec![0.0], vec![8]).is_err());
        assert!(MomentumLattice::new(vec![1.0; 4], vec![8; 4]).is_err());
    }

    #[test]
    fn plane_wave_is_single_mode() {
        let lat = MomentumLattice::new(vec![3.0, 5.0], vec![8, 6]).unwrap();
        let target = lat.flat_from_signed(&[-2, 1]).unwrap();
        let k = lat.wavevector(target);
        let samples: Vec<C64> = (0..lat.len())
            .map(|f| {
                let x = lat.node_position(f);
                C64::from_polar(1.0, k[0] * x[0] + k[1] * x[1])
            })
            .collect();
        let modes = lat.to_modes(&samples);
        for (f, c) in modes.iter().enumerate() {
            let want = if f == target { 1.0 } else { 0.0 };
            assert!((c - want).norm() < 1e-13, "bin {f}: {c}");
        }
        let back = lat.to_samples(&modes);
        assert!(max_abs_diff(&back, &samples) < 1e-13);
    }

    #[test]
    fn padded_samples_interleave() {
        let lat = MomentumLattice::new(vec![2.0], vec![8]).unwrap();
        let modes: Vec<C64> = (0..8)
            .map(|i| C64::new(i as f64, -(i as f64) * 0.5))
            .collect();
        let coarse = lat.to_samples(&modes);
        let fine = lat.to_padded_samples(&modes);
        for j in 0..8 {
            assert!((fine[2 * j] - coarse[j]).norm() < 1e-12);
        }
    }

    #[test]
    fn negation_and_nodes() {
        let lat = MomentumLattice::new(vec![4.0, 4.0, 4.0], vec![4, 6, 8]).unwrap();
        for f in 0..lat.len() {
            let g = lat.neg_flat(f);
            assert_eq!(lat.neg_flat(g), f);
            if !lat.is_nyquist(f) {
                let (a, b) = (lat.wavevector(f), lat.wavevector(g));
                for i in 0..3 {
                    assert!((a[i] + b[i]).abs() < 1e-14);
                }
            }
            assert_eq!(lat.node_of(&lat.node_position(f)[..3]).unwrap(), f);
        }
        assert!(lat.node_of(&[0.1, 0.0, 0.0]).is_err());
    }
}
