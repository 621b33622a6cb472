//! Directional multipliers and the maximal operators built from them, all
//! realised spectrally on the periodic grid.

pub mod averages;
pub mod cones;
pub mod windows;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::directions::{Direction, DirectionSet, DotKernel};
use crate::error::{Error, Result};
use crate::grid::{forward_dft, multiply_inverse, FreqLattice, FreqPoint, GridField};

pub use averages::{bi_maximal, maximal_avg_directional, maximal_avg_single};
pub use cones::{
    cone_project, signed_cone_sum, smooth_cone_project, smooth_cover_project, ConeArc,
    ConePartition,
};
pub use windows::lp_profile;

type CustomSymbol = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;

/// One-dimensional symbol `m`.
#[derive(Clone)]
pub enum MultiplierKind {
    /// `sign(t)`.
    Sign,
    /// `Φ(2^{−k}|t|)`.
    AnnulusBump(i32),
    Custom(CustomSymbol),
}

/// A one-dimensional multiplier with its declared value at `0` and a bound
/// on `|m|`.
#[derive(Clone)]
pub struct MultiplierSpec {
    kind: MultiplierKind,
    zero_value: Complex64,
    bound: f64,
}

impl fmt::Debug for MultiplierSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MultiplierSpec({})", self.name())
    }
}

impl MultiplierSpec {
    pub fn sign() -> Self {
        Self {
            kind: MultiplierKind::Sign,
            zero_value: Complex64::new(0.0, 0.0),
            bound: 1.0,
        }
    }

    pub fn annulus_bump(k: i32) -> Self {
        Self {
            kind: MultiplierKind::AnnulusBump(k),
            zero_value: Complex64::new(0.0, 0.0),
            bound: 1.0,
        }
    }

    pub fn custom(
        m: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
        zero_value: Complex64,
        bound: f64,
    ) -> Result<Self> {
        if !(bound.is_finite() && bound >= 0.0) {
            return Err(Error::InvalidArgument("bound must be finite".into()));
        }
        if !(zero_value.re.is_finite() && zero_value.im.is_finite()) || zero_value.norm() > bound {
            return Err(Error::SymbolBound { bound, arg: 0.0 });
        }
        Ok(Self {
            kind: MultiplierKind::Custom(Arc::new(m)),
            zero_value,
            bound,
        })
    }

    /// Parses `sign` or `bump:<k>`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "sign" {
            return Ok(Self::sign());
        }
        if let Some(k) = s.strip_prefix("bump:") {
            let k: i32 = k
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad bump scale {k:?}")))?;
            return Ok(Self::annulus_bump(k));
        }
        Err(Error::InvalidArgument(format!("unknown multiplier {s:?}")))
    }

    pub fn name(&self) -> String {
        match &self.kind {
            MultiplierKind::Sign => "sign".into(),
            MultiplierKind::AnnulusBump(k) => format!("bump:{k}"),
            MultiplierKind::Custom(_) => "custom".into(),
        }
    }

    pub fn kind(&self) -> &MultiplierKind {
        &self.kind
    }

    pub fn zero_value(&self) -> Complex64 {
        self.zero_value
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    /// `m(t)` for `t ≠ 0` (the zero line is handled by the caller).
    pub fn value(&self, t: f64) -> Complex64 {
        match &self.kind {
            MultiplierKind::Sign => Complex64::new(
                if t > 0.0 {
                    1.0
                } else if t < 0.0 {
                    -1.0
                } else {
                    0.0
                },
                0.0,
            ),
            MultiplierKind::AnnulusBump(k) => {
                Complex64::new(lp_profile(t.abs() * 2f64.powi(-k)), 0.0)
            }
            MultiplierKind::Custom(m) => m(t),
        }
    }

    /// `m(ξ·v)` with the declared value on the line `ξ·v = 0`.
    pub fn at(&self, v: &Direction, p: &FreqPoint) -> Complex64 {
        self.at_kernel(&v.dot_kernel(), p)
    }

    fn at_kernel(&self, d: &DotKernel, p: &FreqPoint) -> Complex64 {
        match d.eval(p.k, p.xi) {
            None => self.zero_value,
            Some(t) => self.value(t),
        }
    }
}

/// The symbol `m(ξ·v)` tabulated on the lattice, row-major.
pub fn directional_table(lat: FreqLattice, v: &Direction, m: &MultiplierSpec) -> Result<Vec<Complex64>> {
    let d = v.dot_kernel();
    let table = lat.tabulate(|p| m.at_kernel(&d, p))?;
    if let MultiplierKind::Custom(_) = m.kind {
        let slack = m.bound * (1.0 + 1e-12);
        if let Some(idx) = table.iter().position(|z| z.norm() > slack) {
            let p = lat.point(idx / lat.n, idx % lat.n);
            return Err(Error::SymbolBound {
                bound: m.bound,
                arg: v.dot(p.k, p.xi).unwrap_or(0.0),
            });
        }
    }
    Ok(table)
}

/// `T_v f`, symbol `m(ξ·v)`.
pub fn directional_multiplier(f: &GridField, v: &Direction, m: &MultiplierSpec) -> Result<GridField> {
    let table = directional_table(FreqLattice::of(f), v, m)?;
    Ok(multiply_inverse(&forward_dft(f), &table))
}

/// `H_v f`, symbol `sign(ξ·v)`, zero on the line `ξ·v = 0`.
pub fn hilbert_directional(f: &GridField, v: &Direction) -> Result<GridField> {
    directional_multiplier(f, v, &MultiplierSpec::sign())
}

/// `P_v f`: removes the frequencies on the line `ξ·v = 0`.
pub fn zero_line_projection(f: &GridField, v: &Direction) -> Result<GridField> {
    let d = v.dot_kernel();
    crate::grid::apply_symbol(f, |p| match d.eval(p.k, p.xi) {
        None => Complex64::new(0.0, 0.0),
        Some(_) => Complex64::new(1.0, 0.0),
    })
}

/// Pointwise supremum over a direction set together with the maximising
/// direction index (lowest index on ties).
#[derive(Clone, Debug)]
pub struct MaximalField {
    pub values: GridField,
    pub argmax: Vec<u32>,
}

fn max_reduce(a: (Vec<f64>, Vec<u32>), b: (Vec<f64>, Vec<u32>)) -> (Vec<f64>, Vec<u32>) {
    let (mut va, mut ia) = a;
    let (vb, ib) = b;
    va.par_iter_mut()
        .zip(ia.par_iter_mut())
        .zip(vb.par_iter().zip(ib.par_iter()))
        .for_each(|((x, i), (y, j))| {
            if *y > *x || (*y == *x && *j < *i) {
                *x = *y;
                *i = *j;
            }
        });
    (va, ia)
}

/// `sup_{v ∈ V} |T_v f|` from a precomputed spectrum. Directions run in
/// parallel; the reduction is associative so the result is independent of
/// scheduling.
pub fn maximal_from_spectrum(
    spectrum: &GridField,
    set: &DirectionSet,
    m: &MultiplierSpec,
) -> Result<MaximalField> {
    let lat = FreqLattice::of(spectrum);
    let (vals, idx) = set
        .dirs()
        .par_iter()
        .enumerate()
        .map(|(d, v)| -> Result<(Vec<f64>, Vec<u32>)> {
            let table = directional_table(lat, v, m)?;
            let field = multiply_inverse(spectrum, &table);
            let n2 = field.data().len();
            Ok((field.abs(), vec![d as u32; n2]))
        })
        .try_reduce_with(|a, b| Ok(max_reduce(a, b)))
        .expect("direction sets are nonempty")?;
    Ok(MaximalField {
        values: spectrum.with_data(vals.into_iter().map(|x| Complex64::new(x, 0.0)).collect()),
        argmax: idx,
    })
}

/// `T_V f = sup_{v ∈ V} |T_v f|` with its argmax field.
pub fn maximal_directional_with_argmax(
    f: &GridField,
    set: &DirectionSet,
    m: &MultiplierSpec,
) -> Result<MaximalField> {
    maximal_from_spectrum(&forward_dft(f), set, m)
}

/// `T_V f = sup_{v ∈ V} |T_v f|`.
pub fn maximal_directional(f: &GridField, set: &DirectionSet, m: &MultiplierSpec) -> Result<GridField> {
    Ok(maximal_directional_with_argmax(f, set, m)?.values)
}

/// The value `T_{v(x)} f(x)` at the maximizing direction `v(x)` (lowest
/// index on ties), so that `|selected| = T_V f`. Directions are processed one
/// at a time; with a single direction this is exactly [`directional_multiplier`].
pub fn maximal_directional_selected(f: &GridField, set: &DirectionSet, m: &MultiplierSpec) -> Result<MaximalField> {
    let spec = forward_dft(f);
    let lat = FreqLattice::of(f);
    let n2 = f.data().len();
    let mut best = vec![Complex64::new(0.0, 0.0); n2];
    let mut norms = vec![f64::NEG_INFINITY; n2];
    let mut argmax = vec![0u32; n2];
    for (d, v) in set.dirs().iter().enumerate() {
        let g = multiply_inverse(&spec, &directional_table(lat, v, m)?);
        best.par_iter_mut()
            .zip(norms.par_iter_mut())
            .zip(argmax.par_iter_mut())
            .zip(g.data().par_iter())
            .for_each(|(((b, nb), a), z)| {
                if z.norm() > *nb {
                    *b = *z;
                    *nb = z.norm();
                    *a = d as u32;
                }
            });
    }
    Ok(MaximalField {
        values: f.with_data(best),
        argmax,
    })
}

/// Dyadic scales that can carry spectrum on this grid.
pub fn active_scales(f: &GridField) -> std::ops::RangeInclusive<i32> {
    let (lo, hi) = FreqLattice::of(f).modulus_range();
    windows::active_scales(lo, hi)
}

fn lp_table(lat: FreqLattice, k: i32) -> Vec<Complex64> {
    let s = 2f64.powi(-k);
    lat.tabulate(|p| Complex64::new(lp_profile(s * p.modulus()), 0.0))
        .expect("the profile is finite")
}

/// `S_k f`, symbol `Φ(2^{−k}|ξ|)`.
pub fn lp_piece(f: &GridField, k: i32) -> GridField {
    multiply_inverse(&forward_dft(f), &lp_table(FreqLattice::of(f), k))
}

/// `(Σ_k |S_k f|²)^{1/2}`.
pub fn lp_square_function(f: &GridField) -> GridField {
    let spec = forward_dft(f);
    let lat = FreqLattice::of(f);
    let n2 = f.data().len();
    let mut acc = vec![0.0; n2];
    for k in active_scales(f) {
        let piece = multiply_inverse(&spec, &lp_table(lat, k));
        acc.par_iter_mut()
            .zip(piece.data().par_iter())
            .for_each(|(a, z)| *a += z.norm_sqr());
    }
    f.with_data(acc.into_iter().map(|x| Complex64::new(x.sqrt(), 0.0)).collect())
}

/// `(Σ_k |T_V(S_k f)|²)^{1/2}`.
pub fn lacunary_square_function(
    f: &GridField,
    set: &DirectionSet,
    m: &MultiplierSpec,
) -> Result<GridField> {
    let spec = forward_dft(f);
    let lat = FreqLattice::of(f);
    let mut acc = vec![0.0; f.data().len()];
    for k in active_scales(f) {
        let table = lp_table(lat, k);
        let piece = spec.with_data(
            spec.data()
                .par_iter()
                .zip(table.par_iter())
                .map(|(a, b)| a * b)
                .collect(),
        );
        let sup = maximal_from_spectrum(&piece, set, m)?;
        acc.par_iter_mut()
            .zip(sup.values.data().par_iter())
            .for_each(|(a, z)| *a += z.re * z.re);
    }
    Ok(f.with_data(acc.into_iter().map(|x| Complex64::new(x.sqrt(), 0.0)).collect()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::directions::{gen_uniform, ratio};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(n: usize, seed: u64) -> GridField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        GridField::from_fn(n, 1.0, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
        .unwrap()
    }

    fn mode(n: usize, k: [i64; 2]) -> GridField {
        GridField::from_fn(n, 1.0, |i, j| {
            let ph = std::f64::consts::TAU * (k[0] * i as i64 + k[1] * j as i64) as f64 / n as f64;
            Complex64::from_polar(1.0, ph)
        })
        .unwrap()
    }

    #[test]
    fn sign_kills_constants_and_keeps_positive_modes() {
        let c = GridField::from_fn(16, 1.0, |_, _| Complex64::new(3.0, 0.0)).unwrap();
        let v = Direction::new(ratio(1, 7));
        assert!(hilbert_directional(&c, &v).unwrap().max_abs() < 1e-12);
        let f = mode(16, [2, 1]);
        let h = hilbert_directional(&f, &v).unwrap();
        assert!(h.max_abs_diff(&f) < 1e-12);
    }

    #[test]
    fn involution_modulo_zero_line() {
        let f = random_field(16, 2);
        for v in gen_uniform(8).unwrap().dirs() {
            let hh = hilbert_directional(&hilbert_directional(&f, v).unwrap(), v).unwrap();
            let p = zero_line_projection(&f, v).unwrap();
            assert!(hh.max_abs_diff(&p) < 1e-12);
        }
    }

    #[test]
    fn single_direction_sup_is_modulus() {
        let f = random_field(16, 5);
        let v = Direction::from_ratio(2, 5);
        let set = DirectionSet::new(vec![v.clone()], crate::directions::Family::Custom).unwrap();
        let t = maximal_directional(&f, &set, &MultiplierSpec::sign()).unwrap();
        let h = hilbert_directional(&f, &v).unwrap();
        for (a, b) in t.data().iter().zip(h.data()) {
            assert_eq!(a.re, b.norm());
        }
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        let c = GridField::from_fn(8, 1.0, |_, _| Complex64::new(1.0, 0.0)).unwrap();
        let r = maximal_directional_with_argmax(&c, &gen_uniform(6).unwrap(), &MultiplierSpec::sign())
            .unwrap();
        assert!(r.argmax.iter().all(|&i| i == 0));
    }

    #[test]
    fn custom_bound_is_enforced() {
        let m = MultiplierSpec::custom(|t| Complex64::new(t, 0.0), Complex64::new(0.0, 0.0), 1.0)
            .unwrap();
        let f = random_field(8, 1);
        let err = directional_multiplier(&f, &Direction::from_ratio(0, 1), &m).unwrap_err();
        assert!(matches!(err, Error::SymbolBound { .. }));
        let nan = MultiplierSpec::custom(|_| Complex64::new(f64::NAN, 0.0), Complex64::new(0.0, 0.0), 1.0)
            .unwrap();
        let err = directional_multiplier(&f, &Direction::from_ratio(0, 1), &nan).unwrap_err();
        assert!(err.to_string().contains("invalid symbol"));
    }

    #[test]
    fn parse_names() {
        assert_eq!(MultiplierSpec::parse("sign").unwrap().name(), "sign");
        assert_eq!(MultiplierSpec::parse("bump:3").unwrap().name(), "bump:3");
        assert!(MultiplierSpec::parse("cosine").is_err());
    }
}
