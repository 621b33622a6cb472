//! Coefficient families on dyadic rectangles: shadows, the product size
//! functional, the square function `SB`, Haar martingale square functions and
//! John–Nirenberg level-set profiles.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{union_area_int, IntRect};
use crate::grid::GridField;

/// Largest family `product_size` accepts.
pub const MAX_ENTRIES: usize = 1 << 14;
/// Families up to this size get the exact subset supremum.
pub const EXACT_SIZE_LIMIT: usize = 12;

/// `2^scale · (offset + shift·(−1)^scale / 3 + [0, 1))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    pub scale: i32,
    pub offset: i64,
}

/// `I × J` with both intervals from the grid `Dⁱ`, `i = shift`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicRect {
    pub shift: u8,
    pub i: DyadicInterval,
    pub j: DyadicInterval,
}

impl DyadicRect {
    pub fn new(shift: u8, i: (i32, i64), j: (i32, i64)) -> Result<Self> {
        if shift > 2 {
            return Err(Error::InvalidArgument(format!("grid shift {shift} not in 0..=2")));
        }
        Ok(Self {
            shift,
            i: DyadicInterval { scale: i.0, offset: i.1 },
            j: DyadicInterval { scale: j.0, offset: j.1 },
        })
    }

    pub fn area(&self) -> f64 {
        2f64.powi(self.i.scale + self.j.scale)
    }

    fn min_scale(&self) -> i32 {
        self.i.scale.min(self.j.scale)
    }
}

fn signed_shift(shift: u8, scale: i32) -> i128 {
    let s = shift as i128;
    if scale.rem_euclid(2) == 0 {
        s
    } else {
        -s
    }
}

/// Endpoints of an interval in units of `1 / (3·2^e)`; requires
/// `scale + e ≥ 0`.
fn scaled_interval(iv: DyadicInterval, shift: u8, e: i32) -> Result<(i128, i128)> {
    let p = iv.scale + e;
    if !(0..=100).contains(&p) {
        return Err(Error::SizeOverflow(format!("scale {} out of range", iv.scale)));
    }
    let unit = 1i128 << p;
    let a = (3 * iv.offset as i128 + signed_shift(shift, iv.scale))
        .checked_mul(unit)
        .ok_or_else(|| Error::SizeOverflow("coordinate overflow".into()))?;
    Ok((a, a + 3 * unit))
}

/// Coefficients `b_R` on a finite family of dyadic rectangles.
#[derive(Clone, Debug, PartialEq)]
pub struct ProductCoefficients {
    entries: Vec<(DyadicRect, Complex64)>,
}

/// Raster `[0, 2^log2_side)²` with `n × n` cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Raster {
    pub n: usize,
    pub log2_side: i32,
}

impl Raster {
    pub fn side(&self) -> f64 {
        2f64.powi(self.log2_side)
    }

    fn cell_exp(&self) -> i32 {
        self.log2_side - self.n.trailing_zeros() as i32
    }

    /// Cell range covered by an interval of `D⁰`, or an error when its
    /// endpoints are off the raster or outside it.
    /// `finest` is the smallest scale that must be resolved.
    fn cells(&self, shift: u8, iv: DyadicInterval, finest: i32) -> Result<(usize, usize)> {
        let c = self.cell_exp();
        if shift != 0 || finest < c {
            return Err(Error::MisalignedRaster(format!(
                "interval (scale {}, offset {}) in grid {} is not a union of cells of size 2^{c}",
                iv.scale, iv.offset, shift
            )));
        }
        let w = 1i64 << (iv.scale - c);
        let a = iv.offset * w;
        let b = a + w;
        if a < 0 || b > self.n as i64 {
            return Err(Error::MisalignedRaster(format!(
                "interval (scale {}, offset {}) leaves the raster",
                iv.scale, iv.offset
            )));
        }
        Ok((a as usize, b as usize))
    }
}

/// A product size value with the subfamily attaining it.
#[derive(Clone, Debug, PartialEq)]
pub struct SizeEstimate {
    pub value: f64,
    /// `true` when every subfamily was examined.
    pub exact: bool,
    pub witness: Vec<usize>,
}

/// Level-set profile of `|B|` on the shadow.
#[derive(Clone, Debug, PartialEq)]
pub struct JnProfile {
    pub lambdas: Vec<f64>,
    pub fractions: Vec<f64>,
    pub size: f64,
    /// `−slope` of `log(fraction)` against `√(λ/size)` over positive
    /// fractions; `NaN` with fewer than two such points.
    pub decay_rate: f64,
}

impl ProductCoefficients {
    pub fn new(entries: Vec<(DyadicRect, Complex64)>) -> Result<Self> {
        if entries.iter().any(|(_, b)| !(b.re.is_finite() && b.im.is_finite())) {
            return Err(Error::InvalidArgument("coefficients must be finite".into()));
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[(DyadicRect, Complex64)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn scaled(&self, t: f64) -> ProductCoefficients {
        ProductCoefficients {
            entries: self.entries.iter().map(|(r, b)| (*r, b * t)).collect(),
        }
    }

    pub fn subfamily(&self, subset: &[usize]) -> ProductCoefficients {
        ProductCoefficients {
            entries: subset.iter().map(|&i| self.entries[i]).collect(),
        }
    }

    fn exponent(&self) -> i32 {
        self.entries
            .iter()
            .map(|(r, _)| -r.min_scale())
            .max()
            .unwrap_or(0)
            .max(0)
    }

    /// Rectangles in units of `1/(3·2^e)` with `e` returned alongside.
    pub fn int_rects(&self) -> Result<(Vec<IntRect>, i32)> {
        let e = self.exponent();
        let rects = self
            .entries
            .iter()
            .map(|(r, _)| {
                let (x0, x1) = scaled_interval(r.i, r.shift, e)?;
                let (y0, y1) = scaled_interval(r.j, r.shift, e)?;
                Ok(IntRect { x0, x1, y0, y1 })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok((rects, e))
    }

    /// Exact area of `sh(subset)` as `(numerator, log₂ of the dyadic part
    /// of the denominator)`; the full denominator is `9·4^e`.
    pub fn shadow_area_exact(&self, subset: &[usize]) -> Result<(i128, i32)> {
        let (rects, e) = self.int_rects()?;
        let chosen: Vec<IntRect> = subset.iter().map(|&i| rects[i]).collect();
        Ok((union_area_int(&chosen), e))
    }

    pub fn shadow_area(&self, subset: &[usize]) -> Result<f64> {
        let (num, e) = self.shadow_area_exact(subset)?;
        Ok(num as f64 / (9.0 * 4f64.powi(e)))
    }

    /// `size(B) = sup_{R′} (Σ_{R∈R′} |b_R|² / |sh(R′)|)^{1/2}`. Exact up to
    /// [`EXACT_SIZE_LIMIT`] entries; beyond that a lower bound over the
    /// down-sets `{R′ ⊆ R}`, the singletons and the full family.
    pub fn product_size(&self) -> Result<SizeEstimate> {
        let k = self.entries.len();
        if k > MAX_ENTRIES {
            return Err(Error::SizeOverflow(format!("{k} entries exceeds {MAX_ENTRIES}")));
        }
        if k == 0 {
            return Ok(SizeEstimate {
                value: 0.0,
                exact: true,
                witness: Vec::new(),
            });
        }
        let (rects, e) = self.int_rects()?;
        let denom = 9.0 * 4f64.powi(e);
        let mass: Vec<f64> = self.entries.iter().map(|(_, b)| b.norm_sqr()).collect();
        let eval = |subset: &[usize]| -> f64 {
            let chosen: Vec<IntRect> = subset.iter().map(|&i| rects[i]).collect();
            let area = union_area_int(&chosen) as f64 / denom;
            let m: f64 = subset.iter().map(|&i| mass[i]).sum();
            (m / area).sqrt()
        };
        let pick = |a: (f64, Vec<usize>), b: (f64, Vec<usize>)| {
            if b.0 > a.0 || (b.0 == a.0 && b.1 < a.1) {
                b
            } else {
                a
            }
        };
        if k <= EXACT_SIZE_LIMIT {
            let (value, witness) = (1u32..(1 << k))
                .into_par_iter()
                .map(|mask| {
                    let subset: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).collect();
                    (eval(&subset), subset)
                })
                .reduce_with(pick)
                .expect("nonempty family");
            return Ok(SizeEstimate {
                value,
                exact: true,
                witness,
            });
        }
        let mut candidates: Vec<Vec<usize>> = vec![(0..k).collect()];
        candidates.extend((0..k).map(|i| vec![i]));
        candidates.extend((0..k).map(|i| (0..k).filter(|&j| rects[i].contains(&rects[j])).collect()));
        let (value, witness) = candidates
            .into_par_iter()
            .map(|s| (eval(&s), s))
            .reduce_with(pick)
            .expect("nonempty family");
        Ok(SizeEstimate {
            value,
            exact: false,
            witness,
        })
    }

    /// `SB(x) = (Σ_R |b_R|²/|R| · 1_R(x))^{1/2}` on the raster.
    pub fn sb_square_function(&self, raster: Raster) -> Result<GridField> {
        let n = raster.n;
        let mut acc = vec![0.0; n * n];
        for (r, b) in &self.entries {
            let (i0, i1) = raster.cells(r.shift, r.i, r.i.scale)?;
            let (j0, j1) = raster.cells(r.shift, r.j, r.j.scale)?;
            let w = b.norm_sqr() / r.area();
            for i in i0..i1 {
                for v in &mut acc[i * n + j0..i * n + j1] {
                    *v += w;
                }
            }
        }
        GridField::new(
            n,
            raster.side(),
            acc.into_iter().map(|x| Complex64::new(x.sqrt(), 0.0)).collect(),
        )
    }

    /// `B(x) = Σ_R b_R ψ_R(x)` with `ψ_R = |R|^{−1/2} h ⊗ h` the sign pattern
    /// `+` on the lower-left and upper-right quadrants, `−` on the others. These
    /// are supported in `R`, `L²`-normalised and have zero integral along
    /// every horizontal and vertical line.
    pub fn packet_field(&self, raster: Raster) -> Result<GridField> {
        let n = raster.n;
        let mut acc = vec![Complex64::new(0.0, 0.0); n * n];
        for (r, b) in &self.entries {
            let (i0, i1) = raster.cells(r.shift, r.i, r.i.scale - 1)?;
            let (j0, j1) = raster.cells(r.shift, r.j, r.j.scale - 1)?;
            let (im, jm) = ((i0 + i1) / 2, (j0 + j1) / 2);
            let h = b / r.area().sqrt();
            for i in i0..i1 {
                let si = if i < im { 1.0 } else { -1.0 };
                for j in j0..j1 {
                    let sj = if j < jm { 1.0 } else { -1.0 };
                    acc[i * n + j] += h * (si * sj);
                }
            }
        }
        GridField::new(n, raster.side(), acc)
    }

    /// Raster mask of `sh(R)`.
    pub fn shadow_mask(&self, raster: Raster) -> Result<Vec<bool>> {
        let n = raster.n;
        let mut mask = vec![false; n * n];
        for (r, _) in &self.entries {
            let (i0, i1) = raster.cells(r.shift, r.i, r.i.scale)?;
            let (j0, j1) = raster.cells(r.shift, r.j, r.j.scale)?;
            for i in i0..i1 {
                mask[i * n + j0..i * n + j1].iter_mut().for_each(|m| *m = true);
            }
        }
        Ok(mask)
    }

    /// `|{x ∈ sh : |B(x)| > λ}| / |sh|` on `levels` equally spaced `λ` in
    /// `[0, max|B|)`, with the fitted decay rate in `√(λ/size)`.
    pub fn jn_level_set_profile(&self, raster: Raster, levels: usize) -> Result<JnProfile> {
        let levels = levels.max(2);
        let field = self.packet_field(raster)?;
        let mask = self.shadow_mask(raster)?;
        let size = self.product_size()?.value;
        let vals: Vec<f64> = field
            .data()
            .iter()
            .zip(&mask)
            .filter(|(_, &m)| m)
            .map(|(z, _)| z.norm())
            .collect();
        let top = vals.iter().cloned().fold(0.0, f64::max);
        let total = vals.len().max(1) as f64;
        let lambdas: Vec<f64> = (0..levels).map(|k| top * k as f64 / levels as f64).collect();
        let fractions: Vec<f64> = lambdas
            .iter()
            .map(|&l| vals.iter().filter(|&&v| v > l).count() as f64 / total)
            .collect();
        let pts: Vec<(f64, f64)> = lambdas
            .iter()
            .zip(&fractions)
            .filter(|(_, &f)| f > 0.0)
            .map(|(&l, &f)| ((l / size).sqrt(), f.ln()))
            .collect();
        let decay_rate = if size > 0.0 && pts.len() >= 2 {
            -crate::stats::linear_fit(&pts).slope
        } else {
            f64::NAN
        };
        Ok(JnProfile {
            lambdas,
            fractions,
            size,
            decay_rate,
        })
    }

    /// `max Δ₁₂B / SB` over the shadow, the empirical constant in the
    /// pointwise domination of the Haar square function of `B` by `SB`.
    pub fn domination_constant(&self, raster: Raster) -> Result<f64> {
        let b = self.packet_field(raster)?;
        let d = haar_delta12(&b);
        let sb = self.sb_square_function(raster)?;
        let mask = self.shadow_mask(raster)?;
        let mut c: f64 = 0.0;
        for ((x, y), m) in d.data().iter().zip(sb.data()).zip(mask) {
            if m && y.re > 0.0 {
                c = c.max(x.re / y.re);
            }
        }
        Ok(c)
    }

    /// Random family of `count` distinct rectangles in `[0,1)²` from grid
    /// `D⁰` with scales in `[−depth, 0]` and coefficients uniform in the unit
    /// square of `ℂ`.
    pub fn random(seed: u64, count: usize, depth: i32) -> ProductCoefficients {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut seen = std::collections::BTreeSet::new();
        let mut entries = Vec::with_capacity(count);
        let max_distinct: usize = (0..=depth).map(|a| 1usize << a).sum::<usize>().pow(2);
        while entries.len() < count.min(max_distinct) {
            let s1 = -rng.gen_range(0..=depth);
            let s2 = -rng.gen_range(0..=depth);
            let l1 = rng.gen_range(0..1i64 << -s1);
            let l2 = rng.gen_range(0..1i64 << -s2);
            let r = DyadicRect::new(0, (s1, l1), (s2, l2)).expect("shift 0");
            if seen.insert(r) {
                let b = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
                entries.push((r, b));
            }
        }
        ProductCoefficients { entries }
    }

    pub fn to_json(&self) -> Result<String> {
        let rects = self
            .entries
            .iter()
            .map(|(r, b)| RectRepr {
                shift: r.shift,
                i: [r.i.scale as i64, r.i.offset],
                j: [r.j.scale as i64, r.j.offset],
                b: [b.re, b.im],
            })
            .collect();
        Ok(serde_json::to_string(&FamilyRepr { rects })?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let repr: FamilyRepr = serde_json::from_str(s)?;
        let entries = repr
            .rects
            .into_iter()
            .map(|r| {
                let scale = |x: i64| {
                    i32::try_from(x).map_err(|_| Error::Format(format!("scale {x} out of range")))
                };
                let rect = DyadicRect::new(r.shift, (scale(r.i[0])?, r.i[1]), (scale(r.j[0])?, r.j[1]))
                    .map_err(|e| Error::Format(e.to_string()))?;
                Ok((rect, Complex64::new(r.b[0], r.b[1])))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries).map_err(|e| Error::Format(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RectRepr {
    shift: u8,
    i: [i64; 2],
    j: [i64; 2],
    b: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyRepr {
    rects: Vec<RectRepr>,
}

/// In-place orthonormal Haar transform. Output layout: index 0 the scaling
/// coefficient, indices `[2^m, 2^{m+1})` the level-`m` details, whose
/// intervals have length `2^{−m}` of the period.
pub fn haar_forward(x: &mut [Complex64]) {
    let n = x.len();
    let mut tmp = vec![Complex64::new(0.0, 0.0); n];
    let mut m = n;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    while m > 1 {
        let h = m / 2;
        for k in 0..h {
            tmp[k] = (x[2 * k] + x[2 * k + 1]) * r;
            tmp[h + k] = (x[2 * k] - x[2 * k + 1]) * r;
        }
        x[..m].copy_from_slice(&tmp[..m]);
        m = h;
    }
}

/// `(start cell, cell count)` of the support of Haar index `a` on `n` cells.
fn haar_support(a: usize, n: usize) -> (usize, usize) {
    if a == 0 {
        return (0, n);
    }
    let m = usize::BITS - 1 - a.leading_zeros();
    let width = n >> m;
    ((a - (1 << m)) * width, width)
}

/// Inner products `⟨f, h_a ⊗ h_b⟩` with the tensor Haar system, including the
/// constant function on the period in each variable, row-major in `(a, b)`.
pub fn haar_coefficients(f: &GridField) -> Vec<Complex64> {
    let n = f.n();
    let mut d = f.data().to_vec();
    d.par_chunks_mut(n).for_each(haar_forward);
    let mut t = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = d[i * n + j];
        }
    }
    t.par_chunks_mut(n).for_each(haar_forward);
    let h = f.cell();
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for a in 0..n {
        for b in 0..n {
            out[a * n + b] = t[b * n + a] * h;
        }
    }
    out
}

/// `Δ₁₂f = (Σ_Q |⟨f, h_Q⟩|² 1_Q / |Q|)^{1/2}` over tensor Haar functions down
/// to cell scale. On the torus the system includes the constant in each
/// variable, so together with the global constant it is an orthonormal basis
/// and `‖f − mean‖₂² = Σ_Q |⟨f, h_Q⟩|²`.
pub fn haar_delta12(f: &GridField) -> GridField {
    let n = f.n();
    let c = haar_coefficients(f);
    let cell = f.cell();
    let mut acc = vec![0.0; n * n];
    for a in 0..n {
        let (i0, wi) = haar_support(a, n);
        for b in 0..n {
            if a == 0 && b == 0 {
                continue;
            }
            let (j0, wj) = haar_support(b, n);
            let q = (wi * wj) as f64 * cell * cell;
            let v = c[a * n + b].norm_sqr() / q;
            if v == 0.0 {
                continue;
            }
            for i in i0..i0 + wi {
                for x in &mut acc[i * n + j0..i * n + j0 + wj] {
                    *x += v;
                }
            }
        }
    }
    f.with_data(acc.into_iter().map(|x| Complex64::new(x.sqrt(), 0.0)).collect())
}

/// One-parameter `Δ₁` of samples on `n` cells of a period `side`.
pub fn haar_delta1(values: &[Complex64], side: f64) -> Result<Vec<f64>> {
    let n = values.len();
    if !n.is_power_of_two() {
        return Err(Error::InvalidGrid(format!("length {n} is not a power of two")));
    }
    let mut d = values.to_vec();
    haar_forward(&mut d);
    let cell = side / n as f64;
    let mut acc = vec![0.0; n];
    for (a, z) in d.iter().enumerate().skip(1) {
        let (i0, w) = haar_support(a, n);
        let v = z.norm_sqr() * cell / (w as f64 * cell);
        for x in &mut acc[i0..i0 + w] {
            *x += v;
        }
    }
    Ok(acc.into_iter().map(f64::sqrt).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit(shift: u8, i: (i32, i64), j: (i32, i64), b: f64) -> (DyadicRect, Complex64) {
        (DyadicRect::new(shift, i, j).unwrap(), Complex64::new(b, 0.0))
    }

    #[test]
    fn shadows() {
        let one = ProductCoefficients::new(vec![unit(0, (0, 0), (0, 0), 1.0)]).unwrap();
        assert_eq!(one.shadow_area(&[0]).unwrap(), 1.0);
        let two = ProductCoefficients::new(vec![
            unit(0, (0, 0), (0, 0), 3.0),
            unit(0, (0, 2), (0, 0), 3.0),
        ])
        .unwrap();
        assert_eq!(two.shadow_area(&[0, 1]).unwrap(), 2.0);
        let nested = ProductCoefficients::new(vec![
            unit(0, (1, 0), (1, 0), 1.0),
            unit(0, (-1, 1), (0, 1), 1.0),
        ])
        .unwrap();
        assert_eq!(nested.shadow_area(&[0, 1]).unwrap(), 4.0);
    }

    #[test]
    fn shifted_grids_nest() {
        // D¹ at scale 0 is ℓ + 1/3 + [0,1); at scale 1, 2(ℓ − 1/3 + [0,1)).
        let f = ProductCoefficients::new(vec![
            unit(1, (0, 0), (0, 0), 1.0),
            unit(1, (1, 0), (1, 0), 1.0),
        ])
        .unwrap();
        let (r, e) = f.int_rects().unwrap();
        assert_eq!(e, 0);
        assert_eq!((r[0].x0, r[0].x1), (1, 4));
        assert_eq!((r[1].x0, r[1].x1), (-2, 4));
        assert!(r[1].contains(&r[0]));
    }

    #[test]
    fn sizes() {
        let one = ProductCoefficients::new(vec![unit(0, (0, 0), (0, 0), 3.0)]).unwrap();
        assert_eq!(one.product_size().unwrap().value, 3.0);
        let two = ProductCoefficients::new(vec![
            unit(0, (0, 0), (0, 0), 3.0),
            unit(0, (0, 5), (0, 0), 3.0),
        ])
        .unwrap();
        let s = two.product_size().unwrap();
        assert_eq!(s.value, 3.0);
        assert!(s.exact);
    }

    #[test]
    fn sb_single_rect() {
        let f = ProductCoefficients::new(vec![unit(0, (1, 0), (1, 1), 2.0)]).unwrap();
        let r = Raster { n: 16, log2_side: 2 };
        let sb = f.sb_square_function(r).unwrap();
        for i in 0..16 {
            for j in 0..16 {
                let inside = i < 8 && j >= 8;
                assert_eq!(sb.get(i, j).re, if inside { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn misaligned_raster() {
        let f = ProductCoefficients::new(vec![unit(1, (0, 0), (0, 0), 1.0)]).unwrap();
        let r = Raster { n: 8, log2_side: 2 };
        assert!(matches!(f.sb_square_function(r), Err(Error::MisalignedRaster(_))));
        let g = ProductCoefficients::new(vec![unit(0, (-4, 0), (0, 0), 1.0)]).unwrap();
        assert!(matches!(g.sb_square_function(r), Err(Error::MisalignedRaster(_))));
    }

    #[test]
    fn haar_of_constant_vanishes() {
        let f = GridField::from_fn(16, 2.0, |_, _| Complex64::new(1.5, 0.0)).unwrap();
        assert!(haar_delta12(&f).max_abs() < 1e-12);
    }

    #[test]
    fn jn_single_rectangle_is_a_step() {
        let f = ProductCoefficients::new(vec![unit(0, (-1, 0), (-1, 1), 2.0)]).unwrap();
        let p = f.jn_level_set_profile(Raster { n: 16, log2_side: 0 }, 8).unwrap();
        assert!(p.fractions.iter().all(|&x| x == 1.0));
        assert_eq!(p.lambdas.last().copied().unwrap(), 4.0 * 7.0 / 8.0);
        let z = f.scaled(0.0).jn_level_set_profile(Raster { n: 16, log2_side: 0 }, 8).unwrap();
        assert!(z.fractions.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn json_round_trip() {
        let f = ProductCoefficients::random(7, 9, 3);
        assert_eq!(ProductCoefficients::from_json(&f.to_json().unwrap()).unwrap(), f);
        let s = r#"{"rects":[{"shift":2,"i":[-1,3],"j":[0,0],"b":[1.5,-0.5]}]}"#;
        let g = ProductCoefficients::from_json(s).unwrap();
        assert_eq!(g.to_json().unwrap(), s);
        assert!(ProductCoefficients::from_json(r#"{"rects":[{"shift":3,"i":[0,0],"j":[0,0],"b":[1,0]}]}"#).is_err());
    }
}
