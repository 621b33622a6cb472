//! Periodic 2D fields, unitary discrete Fourier transforms and the frequency
//! lattice.
//!
//! A [`GridField`] samples a function on the torus `[0, side)²` at the points
//! `x = (i·side/n, j·side/n)`, stored row-major with `i` the first
//! coordinate. The forward transform is unitary (`1/n` overall, `1/√n` per
//! axis), so Parseval holds exactly up to rounding and the DC bin of a
//! constant field `c` equals `c·n`.
//!
//! Frequency index `(k1, k2)` corresponds to the physical angular frequency
//! `ξ = 2π/side · (k̃1, k̃2)` where `k̃` is the centered representative in
//! `[-n/2, n/2)`.

use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub const MIN_N: usize = 8;
pub const MAX_N: usize = 4096;
const DSF1_MAGIC: &[u8; 4] = b"DSF1";

/// Complex-valued periodic `n × n` field with physical period `side`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridField {
    n: usize,
    side: f64,
    data: Vec<Complex64>,
}

fn validate_shape(n: usize, side: f64) -> Result<()> {
    if !n.is_power_of_two() || !(MIN_N..=MAX_N).contains(&n) {
        return Err(Error::InvalidGrid(format!(
            "n = {n} must be a power of two in [{MIN_N}, {MAX_N}]"
        )));
    }
    if !(side.is_finite() && side > 0.0) {
        return Err(Error::InvalidGrid(format!("side = {side} must be positive")));
    }
    Ok(())
}

impl GridField {
    pub fn new(n: usize, side: f64, data: Vec<Complex64>) -> Result<Self> {
        validate_shape(n, side)?;
        if data.len() != n * n {
            return Err(Error::InvalidGrid(format!(
                "expected {} samples, got {}",
                n * n,
                data.len()
            )));
        }
        Ok(Self { n, side, data })
    }

    pub fn zeros(n: usize, side: f64) -> Result<Self> {
        Self::new(n, side, vec![Complex64::new(0.0, 0.0); n * n])
    }

    pub fn from_fn(n: usize, side: f64, mut f: impl FnMut(usize, usize) -> Complex64) -> Result<Self> {
        validate_shape(n, side)?;
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Ok(Self { n, side, data })
    }

    pub fn from_real(n: usize, side: f64, values: &[f64]) -> Result<Self> {
        Self::new(n, side, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    /// Same shape as `self`, new samples.
    pub fn with_data(&self, data: Vec<Complex64>) -> Self {
        assert_eq!(data.len(), self.data.len());
        Self {
            n: self.n,
            side: self.side,
            data,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    /// Physical length of one grid cell.
    pub fn cell(&self) -> f64 {
        self.side / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        self.cell() * self.cell()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub fn same_shape(&self, other: &GridField) -> Result<()> {
        if self.n != other.n || self.side != other.side {
            return Err(Error::GridMismatch(format!(
                "(n={}, side={}) vs (n={}, side={})",
                self.n, self.side, other.n, other.side
            )));
        }
        Ok(())
    }

    pub fn abs(&self) -> Vec<f64> {
        self.data.iter().map(|z| z.norm()).collect()
    }

    pub fn mean(&self) -> Complex64 {
        self.data.iter().sum::<Complex64>() / (self.data.len() as f64)
    }

    /// `self − mean`.
    pub fn remove_mean(&self) -> GridField {
        let m = self.mean();
        self.with_data(self.data.iter().map(|z| z - m).collect())
    }

    pub fn scale(&self, a: Complex64) -> GridField {
        self.with_data(self.data.iter().map(|z| z * a).collect())
    }

    pub fn add(&self, other: &GridField) -> Result<GridField> {
        self.same_shape(other)?;
        Ok(self.with_data(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        ))
    }

    pub fn sub(&self, other: &GridField) -> Result<GridField> {
        self.same_shape(other)?;
        Ok(self.with_data(
            self.data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        ))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Max-norm of the difference.
    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max-norm of the difference relative to the max-norm of `other`
    /// (absolute when `other` vanishes).
    pub fn rel_max_diff(&self, other: &GridField) -> f64 {
        let scale = other.max_abs();
        let d = self.max_abs_diff(other);
        if scale > 0.0 {
            d / scale
        } else {
            d
        }
    }

    /// `L²` norm with each sample weighted by the cell area.
    pub fn norm_l2(&self) -> f64 {
        (self.data.iter().map(|z| z.norm_sqr()).sum::<f64>() * self.cell_area()).sqrt()
    }

    /// `L^p` norm with each sample weighted by the cell area.
    pub fn norm_lp(&self, p: f64) -> f64 {
        lp_norm(self.data.iter().map(|z| z.norm()), p, self.cell_area())
    }

    /// `⟨f, g⟩ = Σ f·conj(g)·cell_area`.
    pub fn inner(&self, other: &GridField) -> Complex64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a * b.conj())
            .sum::<Complex64>()
            * self.cell_area()
    }

    /// `g(i, j) = f(i − di, j − dj)` on the torus.
    pub fn cyclic_shift(&self, di: usize, dj: usize) -> GridField {
        let n = self.n;
        let mut out = self.data.clone();
        for i in 0..n {
            for j in 0..n {
                out[((i + di) % n) * n + (j + dj) % n] = self.data[i * n + j];
            }
        }
        self.with_data(out)
    }

    /// Counter-clockwise quarter turn: `g(x) = f(R⁻¹x)` with `R(x1, x2) = (−x2, x1)`.
    pub fn rotate_quarter(&self) -> GridField {
        let n = self.n;
        let mut out = self.data.clone();
        for i in 0..n {
            for j in 0..n {
                out[i * n + j] = self.data[j * n + (n - i) % n];
            }
        }
        self.with_data(out)
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.data.iter().all(|z| z.im.abs() <= tol)
    }

    pub fn to_dsf1_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.data.len() * 16);
        self.write_dsf1(&mut out).expect("writing to Vec cannot fail");
        out
    }

    /// Writes the `DSF1` binary format: magic, `u32` n, `f64` side, then
    /// interleaved `(re, im)` little-endian `f64` samples.
    pub fn write_dsf1<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(DSF1_MAGIC)?;
        w.write_all(&(self.n as u32).to_le_bytes())?;
        w.write_all(&self.side.to_le_bytes())?;
        for z in &self.data {
            w.write_all(&z.re.to_le_bytes())?;
            w.write_all(&z.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn read_dsf1<R: Read>(mut r: R) -> Result<GridField> {
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != DSF1_MAGIC {
            return Err(Error::Format("bad DSF1 magic".into()));
        }
        let mut b4 = [0u8; 4];
        r.read_exact(&mut b4)?;
        let n = u32::from_le_bytes(b4) as usize;
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let side = f64::from_le_bytes(b8);
        validate_shape(n, side).map_err(|e| Error::Format(e.to_string()))?;
        let mut data = Vec::with_capacity(n * n);
        for _ in 0..n * n {
            r.read_exact(&mut b8)?;
            let re = f64::from_le_bytes(b8);
            r.read_exact(&mut b8)?;
            let im = f64::from_le_bytes(b8);
            data.push(Complex64::new(re, im));
        }
        let mut rest = [0u8; 1];
        if r.read(&mut rest)? != 0 {
            return Err(Error::Format("trailing bytes after DSF1 payload".into()));
        }
        Ok(GridField { n, side, data })
    }
}

pub(crate) fn lp_norm(values: impl Iterator<Item = f64>, p: f64, weight: f64) -> f64 {
    if p.is_infinite() {
        return values.fold(0.0, f64::max);
    }
    // Scale by the max to keep |v|^p in range.
    let v: Vec<f64> = values.collect();
    let m = v.iter().cloned().fold(0.0, f64::max);
    if m == 0.0 {
        return 0.0;
    }
    let s: f64 = v.iter().map(|x| (x / m).powf(p)).sum();
    m * (s * weight).powf(1.0 / p)
}

/// Centered representative of index `k` in `[-n/2, n/2)`.
#[inline]
pub fn centered(k: usize, n: usize) -> i64 {
    let k = k as i64;
    let n = n as i64;
    if k >= n / 2 {
        k - n
    } else {
        k
    }
}

/// A lattice frequency: centered integer index and physical angular frequency.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FreqPoint {
    pub k: [i64; 2],
    pub xi: [f64; 2],
}

impl FreqPoint {
    pub fn is_zero(&self) -> bool {
        self.k == [0, 0]
    }

    pub fn modulus(&self) -> f64 {
        self.xi[0].hypot(self.xi[1])
    }

    /// Angle in turns, in `[0, 1)`; `None` at `ξ = 0`.
    pub fn theta(&self) -> Option<f64> {
        lattice_angle(self.k[0], self.k[1])
    }
}

/// Angle of the integer vector `(k1, k2)` in turns. The eight axis and
/// diagonal directions are returned exactly.
pub fn lattice_angle(k1: i64, k2: i64) -> Option<f64> {
    if k1 == 0 && k2 == 0 {
        return None;
    }
    let exact = match (k1.signum(), k2.signum()) {
        (1, 0) => Some(0.0),
        (0, 1) => Some(0.25),
        (-1, 0) => Some(0.5),
        (0, -1) => Some(0.75),
        _ if k1 == k2 && k1 > 0 => Some(0.125),
        _ if k1 == -k2 && k2 > 0 => Some(0.375),
        _ if k1 == k2 && k1 < 0 => Some(0.625),
        _ if k1 == -k2 && k1 > 0 => Some(0.875),
        _ => None,
    };
    if exact.is_some() {
        return exact;
    }
    let t = (k2 as f64).atan2(k1 as f64) / std::f64::consts::TAU;
    let t = if t < 0.0 { t + 1.0 } else { t };
    Some(if t >= 1.0 { 0.0 } else { t })
}

/// Frequency lattice view of an `n × n` grid of period `side`.
#[derive(Clone, Copy, Debug)]
pub struct FreqLattice {
    pub n: usize,
    pub side: f64,
}

impl FreqLattice {
    pub fn of(f: &GridField) -> Self {
        Self {
            n: f.n,
            side: f.side,
        }
    }

    #[inline]
    pub fn point(&self, i: usize, j: usize) -> FreqPoint {
        let k1 = centered(i, self.n);
        let k2 = centered(j, self.n);
        let s = std::f64::consts::TAU / self.side;
        FreqPoint {
            k: [k1, k2],
            xi: [s * k1 as f64, s * k2 as f64],
        }
    }

    /// Smallest and largest nonzero `|ξ|` on the lattice.
    pub fn modulus_range(&self) -> (f64, f64) {
        let s = std::f64::consts::TAU / self.side;
        let h = (self.n / 2) as f64;
        (s, s * h * std::f64::consts::SQRT_2)
    }

    /// Evaluates `symbol` at every lattice point, row-major.
    pub fn tabulate<S>(&self, symbol: S) -> Result<Vec<Complex64>>
    where
        S: Fn(&FreqPoint) -> Complex64 + Sync,
    {
        let n = self.n;
        let values: Vec<Complex64> = (0..n * n)
            .into_par_iter()
            .map(|idx| symbol(&self.point(idx / n, idx % n)))
            .collect();
        if let Some(idx) = values.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            let p = self.point(idx / n, idx % n);
            return Err(Error::InvalidSymbol {
                k1: p.k[0],
                k2: p.k[1],
            });
        }
        Ok(values)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Direction {
    Forward,
    Inverse,
}

fn fft2_in_place(data: &mut [Complex64], n: usize, dir: Direction) {
    let mut planner = FftPlanner::<f64>::new();
    let fft: Arc<dyn Fft<f64>> = match dir {
        Direction::Forward => planner.plan_fft_forward(n),
        Direction::Inverse => planner.plan_fft_inverse(n),
    };
    let scratch_len = fft.get_inplace_scratch_len();
    let run_rows = |buf: &mut [Complex64]| {
        buf.par_chunks_mut(n).for_each_init(
            || vec![Complex64::new(0.0, 0.0); scratch_len],
            |scratch, row| fft.process_with_scratch(row, scratch),
        );
    };
    run_rows(data);
    let mut t = transpose(data, n);
    run_rows(&mut t);
    let back = transpose(&t, n);
    let scale = 1.0 / n as f64;
    data.par_iter_mut()
        .zip(back.par_iter())
        .for_each(|(d, b)| *d = b * scale);
}

fn transpose(data: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    const B: usize = 32;
    for bi in (0..n).step_by(B) {
        for bj in (0..n).step_by(B) {
            for i in bi..(bi + B).min(n) {
                for j in bj..(bj + B).min(n) {
                    out[j * n + i] = data[i * n + j];
                }
            }
        }
    }
    out
}

/// Unitary forward DFT: `F[k] = (1/n) Σ f[x] e^{-2πi k·x/n}`.
pub fn forward_dft(f: &GridField) -> GridField {
    let mut data = f.data.clone();
    fft2_in_place(&mut data, f.n, Direction::Forward);
    f.with_data(data)
}

/// Inverse of [`forward_dft`].
pub fn inverse_dft(spec: &GridField) -> GridField {
    let mut data = spec.data.clone();
    fft2_in_place(&mut data, spec.n, Direction::Inverse);
    spec.with_data(data)
}

/// `inverse_dft(σ · spectrum)` for an already transformed field, with the
/// symbol given as a precomputed table.
pub fn multiply_inverse(spectrum: &GridField, table: &[Complex64]) -> GridField {
    assert_eq!(table.len(), spectrum.data.len());
    let mut data: Vec<Complex64> = spectrum
        .data
        .par_iter()
        .zip(table.par_iter())
        .map(|(a, b)| a * b)
        .collect();
    fft2_in_place(&mut data, spectrum.n, Direction::Inverse);
    spectrum.with_data(data)
}

/// Fourier multiplier: `inverse_dft(σ · forward_dft(f))`. The symbol must be
/// finite everywhere, including at `ξ = 0`.
pub fn apply_symbol<S>(f: &GridField, symbol: S) -> Result<GridField>
where
    S: Fn(&FreqPoint) -> Complex64 + Sync,
{
    let table = FreqLattice::of(f).tabulate(symbol)?;
    Ok(multiply_inverse(&forward_dft(f), &table))
}
