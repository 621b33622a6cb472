//! Rough and smooth frequency cones.

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::windows::cone_window;
use crate::directions::{rational_to_f64, ratio, wrap_turns};
use crate::error::{Error, Result};
use crate::grid::{apply_symbol, FreqPoint, GridField};

/// Half-open arc `(start, start + len]` of the circle, in turns. A length of
/// one is the whole circle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConeArc {
    start: BigRational,
    len: BigRational,
}

impl ConeArc {
    pub fn new(start: BigRational, len: BigRational) -> Result<Self> {
        if len <= BigRational::zero() || len > BigRational::one() {
            return Err(Error::InvalidArgument(format!("arc length {len} outside (0, 1]")));
        }
        Ok(Self {
            start: wrap_turns(&start),
            len,
        })
    }

    /// The arc `(a, b]`, wrapping through zero when `b ≤ a`; `a = b` gives
    /// the full circle.
    pub fn between(a: BigRational, b: BigRational) -> Result<Self> {
        let mut len = wrap_turns(&(&b - &a));
        if len.is_zero() {
            len = BigRational::one();
        }
        Self::new(a, len)
    }

    pub fn start(&self) -> &BigRational {
        &self.start
    }

    pub fn end(&self) -> BigRational {
        wrap_turns(&(&self.start + &self.len))
    }

    pub fn len(&self) -> &BigRational {
        &self.len
    }

    pub fn is_full(&self) -> bool {
        self.len.is_one()
    }

    /// Membership of an angle given in turns. Boundaries are compared as
    /// `f64`, which is consistent across arcs sharing an endpoint, so arcs of a
    /// partition never overlap or leave gaps on the lattice.
    pub fn contains(&self, theta: f64) -> bool {
        if self.is_full() {
            return true;
        }
        let a = rational_to_f64(&self.start);
        let b = rational_to_f64(&self.end());
        if a < b {
            a < theta && theta <= b
        } else {
            theta > a || theta <= b
        }
    }

    /// Exact overlap test.
    pub fn overlaps(&self, other: &ConeArc) -> bool {
        wrap_turns(&(&other.start - &self.start)) < self.len
            || wrap_turns(&(&self.start - &other.start)) < other.len
    }
}

/// Arcs between consecutive boundaries, the last one wrapping to the first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConePartition {
    boundaries: Vec<BigRational>,
}

impl ConePartition {
    pub fn new(mut boundaries: Vec<BigRational>) -> Result<Self> {
        if boundaries.is_empty() {
            return Err(Error::InvalidArgument("partition needs a boundary".into()));
        }
        for b in &mut boundaries {
            *b = wrap_turns(b);
        }
        boundaries.sort();
        boundaries.dedup();
        Ok(Self { boundaries })
    }

    /// `k` equal arcs starting at zero.
    pub fn uniform(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidArgument("need at least one arc".into()));
        }
        Self::new((0..k).map(|j| ratio(j as i64, k as i64)).collect())
    }

    /// Cones adapted to a direction set with node `0`: boundaries at
    /// `θ(v) + 1/4` accumulating at `1/4`, plus `0` and `1/4`.
    pub fn lacunary(angles: &[BigRational]) -> Result<Self> {
        let quarter = ratio(1, 4);
        let mut b: Vec<BigRational> = angles.iter().map(|a| a + &quarter).collect();
        b.push(BigRational::zero());
        b.push(quarter);
        Self::new(b)
    }

    pub fn boundaries(&self) -> &[BigRational] {
        &self.boundaries
    }

    pub fn arcs(&self) -> Vec<ConeArc> {
        let k = self.boundaries.len();
        (0..k)
            .map(|i| {
                ConeArc::between(self.boundaries[i].clone(), self.boundaries[(i + 1) % k].clone())
                    .expect("boundaries are distinct")
            })
            .collect()
    }
}

fn rough_symbol(arc: &ConeArc, p: &FreqPoint) -> f64 {
    match p.theta() {
        Some(t) if arc.contains(t) => 1.0,
        _ => 0.0,
    }
}

/// `G_α`: restriction of the spectrum to angles in `α`; `σ(0) = 0`.
pub fn cone_project(f: &GridField, arc: &ConeArc) -> Result<GridField> {
    apply_symbol(f, |p| Complex64::new(rough_symbol(arc, p), 0.0))
}

/// Smooth cone symbol `β((θ − a)/|I|)`, with `θ − a` taken in the period
/// centred on the doubled arc.
pub fn smooth_cone_symbol(arc: &ConeArc, theta: f64) -> f64 {
    let len = rational_to_f64(arc.len());
    let a = rational_to_f64(arc.start());
    let lo = len / 2.0 - 0.5;
    let mut t = theta - a;
    t -= (t - lo).div_euclid(1.0);
    cone_window(t / len)
}

fn check_smooth_arc(arc: &ConeArc) -> Result<()> {
    if arc.len() > &ratio(1, 2) {
        return Err(Error::InvalidArgument(
            "smooth cones need arcs of length at most 1/2".into(),
        ));
    }
    Ok(())
}

/// `G^s_I`: smooth cone multiplier with spectral support in the doubled arc.
pub fn smooth_cone_project(f: &GridField, arc: &ConeArc) -> Result<GridField> {
    check_smooth_arc(arc)?;
    apply_symbol(f, |p| {
        let v = p.theta().map_or(0.0, |t| smooth_cone_symbol(arc, t));
        Complex64::new(v, 0.0)
    })
}

/// Number of equal subarcs in the smooth cover of a cone.
pub const SMOOTH_COVER_PIECES: usize = 128;

/// Subarcs of the smooth cover of `arc`: the 128 equal pieces plus one
/// neighbour on each side, so the translated windows sum to one on `arc`.
pub fn smooth_cover_pieces(arc: &ConeArc) -> Result<Vec<ConeArc>> {
    let step = arc.len() / BigRational::from_integer(SMOOTH_COVER_PIECES.into());
    (0..SMOOTH_COVER_PIECES + 2)
        .map(|l| {
            let shift = BigRational::from_integer((l as i64 - 1).into());
            ConeArc::new(arc.start() + &step * shift, step.clone())
        })
        .collect()
}

/// `G^s_α f = Σ_ℓ G^s_{α_ℓ} f` over the smooth cover of `α`; satisfies
/// `G_α G^s_α = G_α`.
pub fn smooth_cover_project(f: &GridField, arc: &ConeArc) -> Result<GridField> {
    let pieces = smooth_cover_pieces(arc)?;
    apply_symbol(f, |p| {
        let v = p.theta().map_or(0.0, |theta| {
            pieces.iter().map(|piece| smooth_cone_symbol(piece, theta)).sum()
        });
        Complex64::new(v, 0.0)
    })
}

/// `Σ_j ε_j G_{α_j} f` for pairwise disjoint arcs.
pub fn signed_cone_sum(f: &GridField, arcs: &[ConeArc], signs: &[i8]) -> Result<GridField> {
    if arcs.len() != signs.len() {
        return Err(Error::InvalidArgument("one sign per arc".into()));
    }
    if signs.iter().any(|s| !(-1..=1).contains(s)) {
        return Err(Error::InvalidArgument("signs must lie in {-1, 0, 1}".into()));
    }
    for i in 0..arcs.len() {
        for j in i + 1..arcs.len() {
            if arcs[i].overlaps(&arcs[j]) {
                return Err(Error::OverlappingArcs(format!("arcs {i} and {j}")));
            }
        }
    }
    apply_symbol(f, |p| {
        let Some(t) = p.theta() else {
            return Complex64::new(0.0, 0.0);
        };
        let s = arcs
            .iter()
            .zip(signs)
            .find(|(a, _)| a.contains(t))
            .map_or(0.0, |(_, &s)| s as f64);
        Complex64::new(s, 0.0)
    })
}
