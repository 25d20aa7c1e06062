//! Periodic grids, the unitary Fourier transform and Sobolev norms.
//!
//! Coefficients are normalised so that `c_k = L^{d/2}/N^d * DFT(f)_k`. With
//! this choice `sum |c_k|^2 = sum_x |f(x)|^2 (L/N)^d`, i.e. Parseval holds with
//! unit constant against the Riemann-sum `L^2` norm of the samples.

use std::f64::consts::{E, PI};
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Relative zero-mode tolerance for homogeneous negative norms.
pub const ZERO_MODE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dim: usize,
    /// Box edge length, identical on every axis.
    pub length: f64,
    /// Samples per axis.
    pub points: usize,
}

impl GridSpec {
    pub fn new(dim: usize, length: f64, points: usize) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return domain(format!("grid dimension must be 1, 2 or 3, got {dim}"));
        }
        if !(length.is_finite() && length > 0.0) {
            return domain(format!("box length must be positive, got {length}"));
        }
        if points < 8 || !points.is_power_of_two() {
            return domain(format!("points per axis must be a power of two >= 8, got {points}"));
        }
        Ok(Self { dim, length, points })
    }

    /// Total number of samples.
    pub fn len(&self) -> usize {
        self.points.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.points as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Signed mode number of storage index `i` on one axis.
    pub fn mode(&self, i: usize) -> i64 {
        let n = self.points as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// Wavenumber `2 pi m / L` of storage index `i` on one axis.
    pub fn wavenumber(&self, i: usize) -> f64 {
        2.0 * PI * self.mode(i) as f64 / self.length
    }

    /// Per-axis indices of a flat (row-major) index, axis 0 slowest.
    pub fn unflatten(&self, mut flat: usize) -> [usize; 3] {
        let mut idx = [0usize; 3];
        for a in (0..self.dim).rev() {
            idx[a] = flat % self.points;
            flat /= self.points;
        }
        idx
    }

    /// `|k|` for every flat index, in storage order.
    pub fn radial_wavenumbers(&self) -> Vec<f64> {
        let k1: Vec<f64> = (0..self.points).map(|i| self.wavenumber(i)).collect();
        (0..self.len())
            .map(|flat| {
                let idx = self.unflatten(flat);
                idx[..self.dim]
                    .iter()
                    .map(|&i| k1[i] * k1[i])
                    .sum::<f64>()
                    .sqrt()
            })
            .collect()
    }

    /// Physical coordinates of a flat index, measured from the box centre.
    pub fn position(&self, flat: usize) -> [f64; 3] {
        let h = self.spacing();
        let idx = self.unflatten(flat);
        let mut x = [0.0; 3];
        for a in 0..self.dim {
            x[a] = -0.5 * self.length + idx[a] as f64 * h;
        }
        x
    }

    /// Mask of modes kept by the 2/3 rule (`|m| < N/3` on every axis).
    pub fn dealias_mask(&self) -> Vec<bool> {
        let cut = self.points as f64 / 3.0;
        (0..self.len())
            .map(|flat| {
                let idx = self.unflatten(flat);
                idx[..self.dim]
                    .iter()
                    .all(|&i| (self.mode(i).abs() as f64) < cut)
            })
            .collect()
    }

    fn check_samples(&self, n: usize) -> Result<()> {
        if n != self.len() {
            return Err(Error::Contract(format!(
                "sample count {n} does not match grid of {} points",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Planned forward and inverse transforms for one grid.
#[derive(Clone)]
pub struct Transform {
    grid: GridSpec,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    scratch_len: usize,
}

impl std::fmt::Debug for Transform {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Transform").field("grid", &self.grid).finish()
    }
}

impl Transform {
    pub fn new(grid: GridSpec) -> Self {
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(grid.points);
        let inverse = planner.plan_fft_inverse(grid.points);
        let scratch_len = forward
            .get_inplace_scratch_len()
            .max(inverse.get_inplace_scratch_len());
        Self {
            grid,
            forward,
            inverse,
            scratch_len,
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    fn apply_all_axes(&self, fft: &dyn Fft<f64>, data: &mut [Complex64]) {
        let n = self.grid.points;
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len];
        let mut line = vec![Complex64::new(0.0, 0.0); n];
        for axis in 0..self.grid.dim {
            let stride = n.pow((self.grid.dim - 1 - axis) as u32);
            if stride == 1 {
                fft.process_with_scratch(data, &mut scratch);
                continue;
            }
            let block = n * stride;
            for base in (0..data.len()).step_by(block) {
                for offset in 0..stride {
                    for (j, v) in line.iter_mut().enumerate() {
                        *v = data[base + offset + j * stride];
                    }
                    fft.process_with_scratch(&mut line, &mut scratch);
                    for (j, v) in line.iter().enumerate() {
                        data[base + offset + j * stride] = *v;
                    }
                }
            }
        }
    }

    /// Physical samples to normalised coefficients.
    pub fn forward(&self, samples: &[f64]) -> Result<SpectrumField> {
        self.grid.check_samples(samples.len())?;
        let mut data: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        self.forward_in_place(&mut data);
        Ok(SpectrumField {
            grid: self.grid,
            coeffs: data,
        })
    }

    /// In-place forward transform of complex samples, including normalisation.
    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.apply_all_axes(self.forward.as_ref(), data);
        let scale = self.grid.length.powf(self.grid.dim as f64 / 2.0) / self.grid.len() as f64;
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// In-place inverse transform; the result holds physical samples in the real part.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.apply_all_axes(self.inverse.as_ref(), data);
        let scale = self.grid.length.powf(-(self.grid.dim as f64) / 2.0);
        data.iter_mut().for_each(|c| *c *= scale);
    }

    /// Coefficients to physical samples (real part; the imaginary part is
    /// round-off for Hermitian input).
    pub fn inverse(&self, field: &SpectrumField) -> Result<Vec<f64>> {
        if field.grid != self.grid {
            return Err(Error::Contract("field grid differs from transform grid".into()));
        }
        let mut data = field.coeffs.clone();
        self.inverse_in_place(&mut data);
        Ok(data.into_iter().map(|c| c.re).collect())
    }
}

/// Forward transform with a one-off plan.
pub fn transform_forward(samples: &[f64], grid: &GridSpec) -> Result<SpectrumField> {
    Transform::new(*grid).forward(samples)
}

/// Inverse transform with a one-off plan.
pub fn transform_inverse(field: &SpectrumField) -> Result<Vec<f64>> {
    Transform::new(field.grid).inverse(field)
}

/// Riemann-sum `L^2` norm of physical samples.
pub fn physical_l2(samples: &[f64], grid: &GridSpec) -> f64 {
    (samples.iter().map(|x| x * x).sum::<f64>() * grid.cell_volume()).sqrt()
}

/// Order of a Sobolev norm.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormOrder {
    pub s: f64,
    pub homogeneous: bool,
}

impl NormOrder {
    pub fn homogeneous(s: f64) -> Self {
        Self { s, homogeneous: true }
    }

    pub fn inhomogeneous(s: f64) -> Self {
        Self { s, homogeneous: false }
    }
}

/// Fourier coefficients of a real field on a periodic grid.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumField {
    pub grid: GridSpec,
    /// Storage (FFT) order, row-major with axis 0 slowest.
    pub coeffs: Vec<Complex64>,
}

impl SpectrumField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self {
            grid,
            coeffs: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    pub fn from_coeffs(grid: GridSpec, coeffs: Vec<Complex64>) -> Result<Self> {
        grid.check_samples(coeffs.len())?;
        Ok(Self { grid, coeffs })
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    pub fn l2_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Largest `|c(-k) - conj(c(k))|`.
    pub fn hermitian_defect(&self) -> f64 {
        let n = self.grid.points;
        let mut worst = 0.0f64;
        for flat in 0..self.grid.len() {
            let idx = self.grid.unflatten(flat);
            let mut mirror = 0usize;
            for i in &idx[..self.grid.dim] {
                mirror = mirror * n + (n - i) % n;
            }
            worst = worst.max((self.coeffs[mirror] - self.coeffs[flat].conj()).norm());
        }
        worst
    }

    /// Weighted sum `sum w(|k|) |c_k|^2` skipping the zero mode when `skip_zero`.
    fn weighted_sum(&self, skip_zero: bool, weight: impl Fn(f64) -> f64) -> f64 {
        let radial = self.grid.radial_wavenumbers();
        self.coeffs
            .iter()
            .zip(radial)
            .enumerate()
            .filter(|(i, _)| !(skip_zero && *i == 0))
            .map(|(_, (c, k))| weight(k) * c.norm_sqr())
            .sum()
    }

    /// Homogeneous norm of order `s` computed on the mean-removed field, with
    /// no zero-mode check.
    pub fn sobolev_norm_mean_removed(&self, s: f64) -> f64 {
        self.weighted_sum(true, |k| k.powf(2.0 * s)).sqrt()
    }
}

/// Sobolev norm of `field`.
///
/// Homogeneous negative orders exclude `k = 0` and require
/// `|c_0| <= 1e-10 * ||field||_{L^2}`.
pub fn sobolev_norm(field: &SpectrumField, order: NormOrder) -> Result<f64> {
    let s = order.s;
    if !order.homogeneous {
        return Ok(field
            .weighted_sum(false, |k| (1.0 + k * k).powf(s))
            .sqrt());
    }
    if s == 0.0 {
        return Ok(field.l2_norm());
    }
    if s < 0.0 {
        let l2 = field.l2_norm();
        let c0 = field.zero_mode().norm();
        if c0 > ZERO_MODE_TOL * l2 {
            return domain(format!(
                "zero mode |c_0| = {c0:e} exceeds {ZERO_MODE_TOL:e} * L2 norm; \
                 remove the mean before taking a negative homogeneous norm"
            ));
        }
    }
    Ok(field.sobolev_norm_mean_removed(s))
}

/// Initial data families.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitialData {
    /// `A exp(-|x|^2 / (2 w^2))`, centred.
    Gaussian { amplitude: f64, width: f64 },
    /// `eps1 <x>^{-(n/2 + gamma)} / log(e + |x|)`, centred.
    PaperProfile { eps1: f64, gamma: f64 },
    /// `A cos(k . x)` with integer mode numbers per axis.
    SingleMode { mode: [i64; 3], amplitude: f64 },
}

/// Sample an initial-data profile on the grid.
pub fn make_initial_data(kind: &InitialData, grid: &GridSpec) -> Result<Vec<f64>> {
    let n = grid.dim as f64;
    let r2 = |x: &[f64; 3]| x.iter().map(|v| v * v).sum::<f64>();
    match *kind {
        InitialData::Gaussian { amplitude, width } => {
            if !(amplitude > 0.0 && width > 0.0) {
                return domain("gaussian amplitude and width must be positive");
            }
            Ok((0..grid.len())
                .map(|i| amplitude * (-r2(&grid.position(i)) / (2.0 * width * width)).exp())
                .collect())
        }
        InitialData::PaperProfile { eps1, gamma } => {
            if !(eps1 > 0.0) {
                return domain("profile amplitude eps1 must be positive");
            }
            if !(gamma > 0.0) {
                return domain("profile order gamma must be positive");
            }
            let decay = n / 2.0 + gamma;
            Ok((0..grid.len())
                .map(|i| {
                    let rr = r2(&grid.position(i));
                    eps1 * (1.0 + rr).powf(-decay / 2.0) / (E + rr.sqrt()).ln()
                })
                .collect())
        }
        InitialData::SingleMode { mode, amplitude } => {
            if !(amplitude > 0.0) {
                return domain("single-mode amplitude must be positive");
            }
            let k: Vec<f64> = mode
                .iter()
                .map(|&m| 2.0 * PI * m as f64 / grid.length)
                .collect();
            Ok((0..grid.len())
                .map(|i| {
                    let x = grid.position(i);
                    let phase: f64 = (0..grid.dim).map(|a| k[a] * x[a]).sum();
                    amplitude * phase.cos()
                })
                .collect())
        }
    }
}

/// Write a field as `{dim: u64, N: u64, L: f64}` followed by `(re, im)` pairs,
/// all little-endian, in row-major order of ascending frequency
/// `-N/2 .. N/2-1` per axis.
pub fn write_spectrum<W: Write>(mut w: W, field: &SpectrumField) -> Result<()> {
    let g = &field.grid;
    w.write_all(&(g.dim as u64).to_le_bytes())?;
    w.write_all(&(g.points as u64).to_le_bytes())?;
    w.write_all(&g.length.to_le_bytes())?;
    let mut buf = Vec::with_capacity(16 * g.len());
    for ordered in 0..g.len() {
        let c = field.coeffs[frequency_to_storage(g, ordered)];
        buf.extend_from_slice(&c.re.to_le_bytes());
        buf.extend_from_slice(&c.im.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

/// Read a field written by [`write_spectrum`].
pub fn read_spectrum<R: Read>(mut r: R) -> Result<SpectrumField> {
    let mut word = [0u8; 8];
    r.read_exact(&mut word)?;
    let dim = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let points = u64::from_le_bytes(word) as usize;
    r.read_exact(&mut word)?;
    let length = f64::from_le_bytes(word);
    let grid = GridSpec::new(dim, length, points)?;
    let mut buf = vec![0u8; 16 * grid.len()];
    r.read_exact(&mut buf)?;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); grid.len()];
    for (ordered, chunk) in buf.chunks_exact(16).enumerate() {
        let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
        let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
        coeffs[frequency_to_storage(&grid, ordered)] = Complex64::new(re, im);
    }
    Ok(SpectrumField { grid, coeffs })
}

fn frequency_to_storage(g: &GridSpec, mut ordered: usize) -> usize {
    let n = g.points;
    let mut q = [0usize; 3];
    for a in (0..g.dim).rev() {
        q[a] = ordered % n;
        ordered /= n;
    }
    let mut flat = 0;
    for v in &q[..g.dim] {
        // ascending position q corresponds to mode q - N/2
        flat = flat * n + (v + n / 2) % n;
    }
    flat
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn grid1(points: usize) -> GridSpec {
        GridSpec::new(1, 2.0 * PI, points).unwrap()
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<f64> {
        let mut x = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..n)
            .map(|_| {
                x ^= x << 13;
                x ^= x >> 7;
                x ^= x << 17;
                (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect()
    }

    #[test]
    fn grid_validation() {
        assert!(GridSpec::new(0, 1.0, 8).is_err());
        assert!(GridSpec::new(4, 1.0, 8).is_err());
        assert!(GridSpec::new(1, 1.0, 12).is_err());
        assert!(GridSpec::new(1, 1.0, 4).is_err());
        assert!(GridSpec::new(1, 0.0, 8).is_err());
        let g = GridSpec::new(2, 4.0, 8).unwrap();
        assert_eq!(g.len(), 64);
        assert_eq!(g.mode(4), -4);
        assert_eq!(g.mode(3), 3);
    }

    #[test]
    fn constant_field_is_dc_only() {
        let g = grid1(16);
        let f = transform_forward(&[1.0; 16], &g).unwrap();
        assert!(f.coeffs[0].norm() > 0.0);
        assert!(f.coeffs[1..].iter().all(|c| c.norm() < 1e-14));
        assert_relative_eq!(f.coeffs[0].re, (2.0 * PI).sqrt(), max_relative = 1e-14);
    }

    #[test]
    fn cosine_has_conjugate_pair() {
        let g = grid1(32);
        let u = make_initial_data(
            &InitialData::SingleMode { mode: [3, 0, 0], amplitude: 1.0 },
            &g,
        )
        .unwrap();
        let f = transform_forward(&u, &g).unwrap();
        let a = f.coeffs[3];
        let b = f.coeffs[32 - 3];
        assert!((a - b.conj()).norm() < 1e-14);
        assert_relative_eq!(a.norm(), b.norm(), max_relative = 1e-13);
        let rest: f64 = f
            .coeffs
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 3 && *i != 29)
            .map(|(_, c)| c.norm())
            .sum();
        assert!(rest < 1e-12);
    }

    #[test]
    fn round_trip_and_parseval_multi_dim() {
        for (dim, points) in [(1, 64), (2, 16), (3, 8)] {
            let g = GridSpec::new(dim, 3.0, points).unwrap();
            let u = pseudo_random(g.len(), dim as u64);
            let t = Transform::new(g);
            let f = t.forward(&u).unwrap();
            let back = t.inverse(&f).unwrap();
            let scale = u.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let err = u.iter().zip(&back).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            assert!(err < 1e-12 * scale, "dim {dim}: {err}");
            let phys = physical_l2(&u, &g);
            assert!((phys - f.l2_norm()).abs() / phys < 1e-12);
            assert!(f.hermitian_defect() < 1e-12);
        }
    }

    #[test]
    fn inverse_imaginary_part_is_roundoff() {
        let g = GridSpec::new(2, 5.0, 16).unwrap();
        let u = pseudo_random(g.len(), 9);
        let t = Transform::new(g);
        let f = t.forward(&u).unwrap();
        let mut data = f.coeffs.clone();
        t.inverse_in_place(&mut data);
        assert!(data.iter().all(|c| c.im.abs() < 1e-12));
    }

    #[test]
    fn size_mismatch_is_contract_violation() {
        let g = grid1(16);
        assert!(matches!(transform_forward(&[0.0; 8], &g), Err(Error::Contract(_))));
    }

    #[test]
    fn single_mode_norms() {
        // |k| = 2 on a 2*pi box: mode number 2
        let g = grid1(64);
        let u = make_initial_data(&InitialData::SingleMode { mode: [2, 0, 0], amplitude: 1.0 }, &g)
            .unwrap();
        let l2 = physical_l2(&u, &g);
        let u: Vec<f64> = u.iter().map(|x| x / l2).collect();
        let f = transform_forward(&u, &g).unwrap();
        let gamma = 0.7;
        let neg = sobolev_norm(&f, NormOrder::homogeneous(-gamma)).unwrap();
        assert_relative_eq!(neg, 2f64.powf(-gamma), max_relative = 1e-12);
        let pos = sobolev_norm(&f, NormOrder::homogeneous(1.0)).unwrap();
        assert_relative_eq!(pos, 2.0, max_relative = 1e-12);
        let zero = sobolev_norm(&f, NormOrder::homogeneous(0.0)).unwrap();
        assert_relative_eq!(zero, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn zero_mode_policy() {
        let g = grid1(32);
        let f = transform_forward(&vec![1.0; 32], &g).unwrap();
        let err = sobolev_norm(&f, NormOrder::homogeneous(-0.5)).unwrap_err();
        assert!(err.to_string().contains("remove the mean"));
        assert!(sobolev_norm(&f, NormOrder::homogeneous(0.5)).is_ok());
        assert!(sobolev_norm(&f, NormOrder::inhomogeneous(-0.5)).is_ok());
    }

    #[test]
    fn paper_profile_at_centre() {
        let g = GridSpec::new(1, 20.0, 64).unwrap();
        let u = make_initial_data(&InitialData::PaperProfile { eps1: 0.3, gamma: 0.5 }, &g).unwrap();
        // index N/2 sits at x = 0
        assert_relative_eq!(u[32], 0.3, max_relative = 1e-15);
        assert!(make_initial_data(&InitialData::PaperProfile { eps1: 0.0, gamma: 0.5 }, &g).is_err());
    }

    #[test]
    fn gaussian_mass() {
        for dim in 1..=3usize {
            let points = if dim == 3 { 32 } else { 128 };
            let g = GridSpec::new(dim, 24.0, points).unwrap();
            let u = make_initial_data(&InitialData::Gaussian { amplitude: 1.0, width: 1.0 }, &g)
                .unwrap();
            let mass: f64 = u.iter().sum::<f64>() * g.cell_volume();
            assert_relative_eq!(mass, (2.0 * PI).powf(dim as f64 / 2.0), max_relative = 1e-10);
        }
        let g = grid1(16);
        assert!(make_initial_data(&InitialData::Gaussian { amplitude: 1.0, width: 0.0 }, &g).is_err());
    }

    #[test]
    fn binary_record_layout() {
        let g = GridSpec::new(1, 2.0, 8).unwrap();
        let mut coeffs = vec![Complex64::new(0.0, 0.0); 8];
        coeffs[4] = Complex64::new(7.0, 0.0); // mode -4
        coeffs[1] = Complex64::new(1.0, 2.0); // mode 1
        let f = SpectrumField::from_coeffs(g, coeffs).unwrap();
        let mut buf = Vec::new();
        write_spectrum(&mut buf, &f).unwrap();
        assert_eq!(buf.len(), 24 + 8 * 16);
        assert_eq!(u64::from_le_bytes(buf[0..8].try_into().unwrap()), 1);
        assert_eq!(u64::from_le_bytes(buf[8..16].try_into().unwrap()), 8);
        assert_eq!(f64::from_le_bytes(buf[16..24].try_into().unwrap()), 2.0);
        // first pair is mode -4, pair 5 is mode +1
        assert_eq!(f64::from_le_bytes(buf[24..32].try_into().unwrap()), 7.0);
        let p5 = 24 + 5 * 16;
        assert_eq!(f64::from_le_bytes(buf[p5..p5 + 8].try_into().unwrap()), 1.0);
        assert_eq!(f64::from_le_bytes(buf[p5 + 8..p5 + 16].try_into().unwrap()), 2.0);
        assert_eq!(read_spectrum(&buf[..]).unwrap(), f);
    }

    proptest! {
        #[test]
        fn binary_round_trip(dim in 1usize..=3, seed in 0u64..1000) {
            let g = GridSpec::new(dim, 1.5, 8).unwrap();
            let f = transform_forward(&pseudo_random(g.len(), seed), &g).unwrap();
            let mut buf = Vec::new();
            write_spectrum(&mut buf, &f).unwrap();
            prop_assert_eq!(read_spectrum(&buf[..]).unwrap(), f);
        }

        #[test]
        fn norm_scales_linearly(c in -5.0f64..5.0, s in -1.0f64..2.0, seed in 0u64..100) {
            let g = grid1(32);
            let mut u = pseudo_random(32, seed);
            let mean = u.iter().sum::<f64>() / 32.0;
            u.iter_mut().for_each(|x| *x -= mean);
            let f = transform_forward(&u, &g).unwrap();
            let cu: Vec<f64> = u.iter().map(|x| c * x).collect();
            let cf = transform_forward(&cu, &g).unwrap();
            let a = sobolev_norm(&f, NormOrder::homogeneous(s)).unwrap();
            let b = sobolev_norm(&cf, NormOrder::homogeneous(s)).unwrap();
            prop_assert!((b - c.abs() * a).abs() <= 1e-10 * (1.0 + a));
        }

        #[test]
        fn embedding_bound(s2 in -1.0f64..1.0, ds in 0.0f64..1.5, seed in 0u64..100) {
            let g = grid1(32);
            let mut u = pseudo_random(32, seed);
            let mean = u.iter().sum::<f64>() / 32.0;
            u.iter_mut().for_each(|x| *x -= mean);
            let f = transform_forward(&u, &g).unwrap();
            let s1 = s2 + ds;
            let kmax = g.radial_wavenumbers().into_iter().fold(0.0, f64::max);
            let lhs = sobolev_norm(&f, NormOrder::homogeneous(s1)).unwrap();
            let rhs = kmax.powf(s1 - s2) * sobolev_norm(&f, NormOrder::homogeneous(s2)).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-12));
        }
    }
}
