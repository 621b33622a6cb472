//! Finite direction sets with exact rational angles (in turns), lacunarity
//! testing, constructive lacunary-subsequence extraction and Vargas-constant
//! estimation.
//!
//! All lacunarity logic runs in exact arithmetic. Distances between angles
//! are circular: `min(|a − b|, 1 − |a − b|)`.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Node-candidate grid resolution used by [`vargas_constant_estimate`].
pub const DEFAULT_NODE_RESOLUTION: u32 = 64;

/// Largest Cantor truncation we generate (`2ⁿ` elements).
pub const MAX_CANTOR_LEVEL: u32 = 20;

pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

/// Reduces an angle into `[0, 1)`.
pub fn wrap_turns(a: &BigRational) -> BigRational {
    let f = a.floor();
    a - f
}

/// Circular distance between two angles in turns.
pub fn circular_distance(a: &BigRational, b: &BigRational) -> BigRational {
    let d = wrap_turns(&(a - b));
    let e = BigRational::one() - &d;
    if d <= e {
        d
    } else {
        e
    }
}

/// A direction `e^{2πi·angle}` with exact rational angle in `[0, 1)`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Direction {
    angle: BigRational,
}

impl Direction {
    pub fn new(angle: BigRational) -> Self {
        Self {
            angle: wrap_turns(&angle),
        }
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        Self::new(ratio(p, q))
    }

    pub fn angle(&self) -> &BigRational {
        &self.angle
    }

    /// Nearest `f64` to the angle.
    pub fn float_view(&self) -> f64 {
        rational_to_f64(&self.angle)
    }

    /// `Some(e)` when the angle is exactly `e/8` turns.
    pub fn eighths(&self) -> Option<u8> {
        let e = &self.angle * BigRational::from_integer(BigInt::from(8));
        if e.is_integer() {
            e.to_integer().to_u8()
        } else {
            None
        }
    }

    /// `(cos 2πa, sin 2πa)`, exact at multiples of `1/8` turn.
    pub fn unit_vector(&self) -> [f64; 2] {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        match self.eighths() {
            Some(0) => [1.0, 0.0],
            Some(1) => [r, r],
            Some(2) => [0.0, 1.0],
            Some(3) => [-r, r],
            Some(4) => [-1.0, 0.0],
            Some(5) => [-r, -r],
            Some(6) => [0.0, -1.0],
            Some(7) => [r, -r],
            _ => {
                let t = std::f64::consts::TAU * self.float_view();
                [t.cos(), t.sin()]
            }
        }
    }

    /// Integer step of the lattice line through the origin in this
    /// direction, when the direction has rational slope.
    pub fn lattice_step(&self) -> Option<[i64; 2]> {
        Some(match self.eighths()? {
            0 => [1, 0],
            1 => [1, 1],
            2 => [0, 1],
            3 => [-1, 1],
            4 => [-1, 0],
            5 => [-1, -1],
            6 => [0, -1],
            _ => [1, -1],
        })
    }

    /// `ξ·v` for the lattice frequency `k` with physical frequency `xi`.
    /// Returns `None` when `ξ·v = 0` exactly. Rational angles other than
    /// multiples of `1/8` have irrational slope, so for them only `ξ = 0`
    /// lies on the zero line.
    pub fn dot(&self, k: [i64; 2], xi: [f64; 2]) -> Option<f64> {
        self.dot_kernel().eval(k, xi)
    }

    /// Precomputed form of [`Direction::dot`] for tabulating many points.
    pub fn dot_kernel(&self) -> DotKernel {
        DotKernel {
            eighths: self.eighths(),
            u: self.unit_vector(),
        }
    }

    /// The direction rotated by a quarter turn counter-clockwise.
    pub fn rotate_quarter(&self) -> Direction {
        Direction::new(&self.angle + ratio(1, 4))
    }
}

pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Which generator produced a set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    Uniform,
    Lacunary { ratio: BigRational, node: BigRational },
    Cantor { q: u32, n: u32 },
    Custom,
}

/// Strictly increasing list of directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DirectionSet {
    dirs: Vec<Direction>,
    family: Family,
}

impl DirectionSet {
    /// Sorts the input; rejects empty input and repeated angles.
    pub fn new(mut dirs: Vec<Direction>, family: Family) -> Result<Self> {
        if dirs.is_empty() {
            return Err(Error::InvalidArgument("direction set is empty".into()));
        }
        dirs.sort();
        if dirs.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument("repeated direction".into()));
        }
        Ok(Self { dirs, family })
    }

    pub fn custom(angles: impl IntoIterator<Item = BigRational>) -> Result<Self> {
        Self::new(angles.into_iter().map(Direction::new).collect(), Family::Custom)
    }

    pub fn len(&self) -> usize {
        self.dirs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dirs.is_empty()
    }

    pub fn dirs(&self) -> &[Direction] {
        &self.dirs
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn subset(&self, indices: &[usize]) -> Result<DirectionSet> {
        DirectionSet::new(
            indices.iter().map(|&i| self.dirs[i].clone()).collect(),
            Family::Custom,
        )
    }

    /// Every direction rotated by a quarter turn.
    pub fn rotate_quarter(&self) -> DirectionSet {
        DirectionSet::new(
            self.dirs.iter().map(Direction::rotate_quarter).collect(),
            Family::Custom,
        )
        .expect("rotation preserves distinctness")
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&SetRepr::from(self))?)
    }

    pub fn from_json(s: &str) -> Result<DirectionSet> {
        let repr: SetRepr = serde_json::from_str(s)?;
        repr.try_into()
    }
}

fn rational_pair(r: &BigRational) -> [String; 2] {
    [r.numer().to_string(), r.denom().to_string()]
}

fn parse_pair(p: &[String; 2]) -> Result<BigRational> {
    let num: BigInt = p[0]
        .parse()
        .map_err(|_| Error::Format(format!("bad numerator {:?}", p[0])))?;
    let den: BigInt = p[1]
        .parse()
        .map_err(|_| Error::Format(format!("bad denominator {:?}", p[1])))?;
    if den.is_zero() {
        return Err(Error::Format("zero denominator".into()));
    }
    Ok(BigRational::new(num, den))
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
enum FamilyRepr {
    Uniform,
    Lacunary { ratio: [String; 2], node: [String; 2] },
    Cantor { q: u32, n: u32 },
    Custom,
}

#[derive(Serialize, Deserialize)]
struct SetRepr {
    #[serde(flatten)]
    family: FamilyRepr,
    angles: Vec<[String; 2]>,
}

impl From<&DirectionSet> for SetRepr {
    fn from(s: &DirectionSet) -> Self {
        let family = match &s.family {
            Family::Uniform => FamilyRepr::Uniform,
            Family::Lacunary { ratio, node } => FamilyRepr::Lacunary {
                ratio: rational_pair(ratio),
                node: rational_pair(node),
            },
            Family::Cantor { q, n } => FamilyRepr::Cantor { q: *q, n: *n },
            Family::Custom => FamilyRepr::Custom,
        };
        SetRepr {
            family,
            angles: s.dirs.iter().map(|d| rational_pair(&d.angle)).collect(),
        }
    }
}

impl TryFrom<SetRepr> for DirectionSet {
    type Error = Error;

    fn try_from(r: SetRepr) -> Result<Self> {
        let family = match r.family {
            FamilyRepr::Uniform => Family::Uniform,
            FamilyRepr::Lacunary { ratio, node } => Family::Lacunary {
                ratio: parse_pair(&ratio)?,
                node: parse_pair(&node)?,
            },
            FamilyRepr::Cantor { q, n } => Family::Cantor { q, n },
            FamilyRepr::Custom => Family::Custom,
        };
        let mut dirs = Vec::with_capacity(r.angles.len());
        for p in &r.angles {
            let a = parse_pair(p)?;
            if a.is_negative() || a >= BigRational::one() {
                return Err(Error::Format(format!("angle {a} outside [0, 1)")));
            }
            dirs.push(Direction::new(a));
        }
        if dirs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Format("angles must be strictly increasing".into()));
        }
        DirectionSet::new(dirs, family)
    }
}

/// `{j/N : 0 ≤ j < N}`.
pub fn gen_uniform(count: usize) -> Result<DirectionSet> {
    if count == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let dirs = (0..count)
        .map(|j| Direction::new(ratio(j as i64, count as i64)))
        .collect();
    DirectionSet::new(dirs, Family::Uniform)
}

/// `{node + ratioʲ mod 1 : j = 1..N}`, sorted.
pub fn gen_lacunary(r: &BigRational, count: usize, node: &BigRational) -> Result<DirectionSet> {
    if !r.is_positive() || r > &ratio(1, 2) {
        return Err(Error::InvalidArgument("ratio must lie in (0, 1/2]".into()));
    }
    if count == 0 {
        return Err(Error::InvalidArgument("N must be positive".into()));
    }
    let mut dirs = Vec::with_capacity(count);
    let mut pow = r.clone();
    for _ in 0..count {
        dirs.push(Direction::new(node + &pow));
        pow = &pow * r;
    }
    DirectionSet::new(
        dirs,
        Family::Lacunary {
            ratio: r.clone(),
            node: wrap_turns(node),
        },
    )
}

/// Denominator of the angles drawn by [`gen_random`].
pub const RANDOM_DENOMINATOR: i64 = 1 << 24;

/// `count` distinct angles `k/2^24` drawn with `ChaCha8Rng::seed_from_u64`.
pub fn gen_random(count: usize, seed: u64) -> Result<DirectionSet> {
    use rand::{Rng, SeedableRng};
    if count == 0 || count > 1 << 20 {
        return Err(Error::InvalidArgument(format!("N = {count} outside 1..=2^20")));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    while seen.len() < count {
        seen.insert(rng.gen_range(0..RANDOM_DENOMINATOR));
    }
    DirectionSet::new(
        seen.into_iter().map(|k| Direction::from_ratio(k, RANDOM_DENOMINATOR)).collect(),
        Family::Custom,
    )
}

/// Truncated `q`-adic Cantor set `{Σ_{j=1..n} a_j q^{-j} : a_j ∈ {0, q−1}}`.
pub fn gen_cantor(q: u32, n: u32) -> Result<DirectionSet> {
    if q < 3 {
        return Err(Error::InvalidArgument("q must be at least 3".into()));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be positive".into()));
    }
    if n > MAX_CANTOR_LEVEL {
        return Err(Error::SizeOverflow(format!(
            "2^{n} directions exceeds 2^{MAX_CANTOR_LEVEL}"
        )));
    }
    let qn = BigInt::from(q).pow(n);
    let mut nums = vec![BigInt::zero()];
    for j in 1..=n {
        let digit = BigInt::from(q - 1) * BigInt::from(q).pow(n - j);
        let mut next = Vec::with_capacity(nums.len() * 2);
        for x in &nums {
            next.push(x.clone());
            next.push(x + &digit);
        }
        nums = next;
    }
    let dirs = nums
        .into_iter()
        .map(|x| Direction::new(BigRational::new(x, qn.clone())))
        .collect();
    DirectionSet::new(dirs, Family::Cantor { q, n })
}

/// True iff `|v_{j+1} − node| ≤ ½|v_j − node|` for every consecutive pair,
/// in exact circular distance.
pub fn is_lacunary_with_node(seq: &[Direction], node: &BigRational) -> bool {
    let two = BigRational::from_integer(BigInt::from(2));
    seq.windows(2).all(|w| {
        let a = circular_distance(&w[0].angle, node);
        let b = circular_distance(&w[1].angle, node);
        &b * &two <= a
    })
}

/// An ordered lacunary subsequence of a direction set, with its node.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LacunaryCertificate {
    pub subsequence: Vec<usize>,
    #[serde(with = "rational_serde")]
    pub node: BigRational,
}

impl LacunaryCertificate {
    pub fn len(&self) -> usize {
        self.subsequence.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsequence.is_empty()
    }

    /// Exact validity check against the set the indices refer to.
    pub fn verify(&self, set: &DirectionSet) -> bool {
        if self.subsequence.iter().any(|&i| i >= set.len()) {
            return false;
        }
        let distinct: BTreeSet<usize> = self.subsequence.iter().copied().collect();
        if distinct.len() != self.subsequence.len() {
            return false;
        }
        let seq: Vec<Direction> = self
            .subsequence
            .iter()
            .map(|&i| set.dirs[i].clone())
            .collect();
        is_lacunary_with_node(&seq, &self.node)
    }
}

pub(crate) mod rational_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
        rational_pair(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<BigRational, D::Error> {
        let p = <[String; 2]>::deserialize(d)?;
        parse_pair(&p).map_err(serde::de::Error::custom)
    }
}

/// Constructive lacunary subsequence following the pigeonhole recursion:
/// restrict to a half-circle holding at least half the directions (where
/// circular and linear distances agree), rescale to the hull, split into
/// eight equal buckets, recurse into a bucket and prepend the far endpoint
/// of the current hull. Every bucket is explored and the longest chain kept,
/// which dominates the single pigeonhole bucket.
///
/// The length is at least `max(2, ⌊log₂N / 3⌋)`.
pub fn extract_lacunary_subsequence(set: &DirectionSet) -> Result<LacunaryCertificate> {
    let n = set.len();
    if n < 2 {
        return Err(Error::InvalidArgument("need at least two directions".into()));
    }
    let angles: Vec<&BigRational> = set.dirs.iter().map(|d| &d.angle).collect();
    let half = ratio(1, 2);

    // Half-circle [a_i, a_i + 1/2] holding the most directions.
    let mut best = (0usize, 0usize);
    let mut end = 0usize;
    for start in 0..n {
        if end < start {
            end = start;
        }
        while end + 1 < start + n {
            let k = (end + 1) % n;
            if wrap_turns(&(angles[k] - angles[start])) <= half {
                end += 1;
            } else {
                break;
            }
        }
        let count = end - start + 1;
        if count > best.1 {
            best = (start, count);
        }
    }
    let (start, count) = best;
    let origin = angles[start].clone();
    let items: Vec<(BigRational, usize)> = (0..count)
        .map(|t| {
            let k = (start + t) % n;
            (wrap_turns(&(angles[k] - &origin)), k)
        })
        .collect();

    let (seq, node) = bucket_recursion(&items);
    let cert = LacunaryCertificate {
        subsequence: seq,
        node: wrap_turns(&(node + origin)),
    };
    debug_assert!(cert.verify(set));
    Ok(cert)
}

/// `items` sorted by linear coordinate, all within an arc of length ≤ 1/2.
/// Returns the chain (far to near) and its node, which lies in the hull.
fn bucket_recursion(items: &[(BigRational, usize)]) -> (Vec<usize>, BigRational) {
    if items.len() == 1 {
        return (vec![items[0].1], items[0].0.clone());
    }
    let lo = &items[0].0;
    let hi = &items[items.len() - 1].0;
    let width = hi - lo;
    let eight = BigRational::from_integer(BigInt::from(8));
    let mut buckets: Vec<Vec<(BigRational, usize)>> = vec![Vec::new(); 8];
    for it in items {
        let pos = ((&it.0 - lo) * &eight / &width).floor().to_integer();
        let b = pos.to_usize().unwrap_or(7).min(7);
        buckets[b].push(it.clone());
    }
    let mut best: Option<(Vec<usize>, BigRational)> = None;
    for (b, bucket) in buckets.iter().enumerate() {
        if bucket.is_empty() {
            continue;
        }
        let (inner, node) = bucket_recursion(bucket);
        let far = if b < 4 {
            items[items.len() - 1].1
        } else {
            items[0].1
        };
        let mut seq = Vec::with_capacity(inner.len() + 1);
        seq.push(far);
        seq.extend(inner);
        if best.as_ref().map_or(true, |(s, _)| seq.len() > s.len()) {
            best = Some((seq, node));
        }
    }
    best.expect("at least one bucket is nonempty")
}

/// Candidate nodes used by [`longest_lacunary_estimate`]: every element,
/// every midpoint of circularly consecutive elements, and `j/resolution`.
pub fn node_candidates(set: &DirectionSet, resolution: u32) -> BTreeSet<BigRational> {
    let mut out = BTreeSet::new();
    let n = set.len();
    for d in &set.dirs {
        out.insert(d.angle.clone());
    }
    if n >= 2 {
        for i in 0..n {
            let a = &set.dirs[i].angle;
            let b = &set.dirs[(i + 1) % n].angle;
            let b = if i + 1 == n { b + BigRational::one() } else { b.clone() };
            out.insert(wrap_turns(&((a + b) / BigRational::from_integer(BigInt::from(2)))));
        }
    }
    for j in 0..resolution.max(1) {
        out.insert(ratio(j as i64, resolution.max(1) as i64));
    }
    out
}

/// Result of the longest-lacunary search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LacunaryEstimate {
    pub length: usize,
    pub certificate: LacunaryCertificate,
}

/// Lower bound for the longest lacunary subsequence: for every candidate
/// node, the longest chain under the halving constraint, taken over the
/// standard candidate set. Ties go to the smallest node.
pub fn longest_lacunary_estimate(set: &DirectionSet, resolution: u32) -> LacunaryEstimate {
    let cands: Vec<BigRational> = node_candidates(set, resolution).into_iter().collect();
    longest_lacunary_with_candidates(set, &cands)
}

/// As [`longest_lacunary_estimate`] over an explicit candidate list.
pub fn longest_lacunary_with_candidates(
    set: &DirectionSet,
    candidates: &[BigRational],
) -> LacunaryEstimate {
    let mut cands: Vec<BigRational> = candidates.iter().map(wrap_turns).collect();
    cands.sort();
    cands.dedup();
    if cands.is_empty() {
        cands.push(BigRational::zero());
    }
    let scaled = ScaledAngles::new(set, &cands);
    let (best_idx, chain) = (0..cands.len())
        .into_par_iter()
        .map(|c| (c, scaled.chain_for(c)))
        .reduce_with(|a, b| {
            if b.1.len() > a.1.len() || (b.1.len() == a.1.len() && b.0 < a.0) {
                b
            } else {
                a
            }
        })
        .expect("candidate list is nonempty");
    LacunaryEstimate {
        length: chain.len(),
        certificate: LacunaryCertificate {
            subsequence: chain,
            node: cands[best_idx].clone(),
        },
    }
}

/// Angles and nodes as integers over a common denominator, so distance
/// comparisons are exact integer comparisons.
enum ScaledAngles {
    Small {
        period: i128,
        angles: Vec<i128>,
        nodes: Vec<i128>,
    },
    Big {
        period: BigInt,
        angles: Vec<BigInt>,
        nodes: Vec<BigInt>,
    },
}

impl ScaledAngles {
    fn new(set: &DirectionSet, nodes: &[BigRational]) -> Self {
        let mut l = BigInt::one();
        for r in set.dirs.iter().map(|d| &d.angle).chain(nodes.iter()) {
            l = l.lcm(r.denom());
        }
        let scale = |r: &BigRational| -> BigInt { r.numer() * (&l / r.denom()) };
        let angles: Vec<BigInt> = set.dirs.iter().map(|d| scale(&d.angle)).collect();
        let nodes: Vec<BigInt> = nodes.iter().map(scale).collect();
        if l.bits() < 120 {
            ScaledAngles::Small {
                period: l.to_i128().unwrap(),
                angles: angles.iter().map(|a| a.to_i128().unwrap()).collect(),
                nodes: nodes.iter().map(|a| a.to_i128().unwrap()).collect(),
            }
        } else {
            ScaledAngles::Big {
                period: l,
                angles,
                nodes,
            }
        }
    }

    fn chain_for(&self, c: usize) -> Vec<usize> {
        match self {
            ScaledAngles::Small {
                period,
                angles,
                nodes,
            } => {
                let node = nodes[c];
                let dists: Vec<(i128, usize)> = angles
                    .iter()
                    .enumerate()
                    .map(|(i, &a)| {
                        let d = (a - node).rem_euclid(*period);
                        (d.min(period - d), i)
                    })
                    .collect();
                halving_chain(dists, |d| d * 2)
            }
            ScaledAngles::Big {
                period,
                angles,
                nodes,
            } => {
                let node = &nodes[c];
                let dists: Vec<(BigInt, usize)> = angles
                    .iter()
                    .enumerate()
                    .map(|(i, a)| {
                        let d = (a - node).mod_floor(period);
                        let e = period - &d;
                        (if d <= e { d } else { e }, i)
                    })
                    .collect();
                halving_chain(dists, |d| d * 2)
            }
        }
    }
}

/// Longest sequence with each distance at most half the previous one,
/// returned far-to-near. Scanning distances in increasing order and taking
/// the smallest admissible next element is optimal: the greedy `i`-th
/// element never exceeds the `i`-th element of any other chain.
fn halving_chain<T: Ord + Clone>(mut dists: Vec<(T, usize)>, double: impl Fn(&T) -> T) -> Vec<usize> {
    dists.sort();
    let mut chain: Vec<usize> = Vec::new();
    let mut floor: Option<T> = None;
    for (d, i) in dists {
        let ok = match &floor {
            None => true,
            Some(f) => d >= *f,
        };
        // Equal positive distances fail `d ≥ 2d`; two distinct angles never
        // both sit at distance zero.
        if ok {
            chain.push(i);
            floor = Some(double(&d));
        }
    }
    chain.reverse();
    chain
}

/// Longest-lacunary estimate divided by `log₂ N`.
pub fn vargas_constant_estimate(set: &DirectionSet) -> Result<f64> {
    if set.len() < 2 {
        return Err(Error::InvalidArgument("need at least two directions".into()));
    }
    let est = longest_lacunary_estimate(set, DEFAULT_NODE_RESOLUTION);
    Ok(est.length as f64 / (set.len() as f64).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn angles(set: &DirectionSet) -> Vec<BigRational> {
        set.dirs().iter().map(|d| d.angle().clone()).collect()
    }

    fn dirs(list: &[(i64, i64)]) -> Vec<Direction> {
        list.iter().map(|&(p, q)| Direction::from_ratio(p, q)).collect()
    }

    #[test]
    fn uniform_sets() {
        assert_eq!(
            angles(&gen_uniform(4).unwrap()),
            vec![ratio(0, 1), ratio(1, 4), ratio(1, 2), ratio(3, 4)]
        );
        assert_eq!(angles(&gen_uniform(1).unwrap()), vec![ratio(0, 1)]);
        let a = angles(&gen_uniform(8).unwrap());
        assert!(a.windows(2).all(|w| &w[1] - &w[0] == ratio(1, 8)));
        assert!(gen_uniform(0).is_err());
    }

    #[test]
    fn lacunary_sets() {
        let s = gen_lacunary(&ratio(1, 2), 3, &ratio(0, 1)).unwrap();
        assert_eq!(angles(&s), vec![ratio(1, 8), ratio(1, 4), ratio(1, 2)]);
        let mut by_distance: Vec<Direction> = s.dirs().to_vec();
        by_distance.reverse();
        assert!(is_lacunary_with_node(&by_distance, &ratio(0, 1)));

        let s = gen_lacunary(&ratio(1, 3), 2, &ratio(1, 2)).unwrap();
        assert_eq!(angles(&s), vec![ratio(11, 18), ratio(5, 6)]);
        assert!(gen_lacunary(&ratio(2, 3), 2, &ratio(0, 1)).is_err());
    }

    #[test]
    fn cantor_sets() {
        assert_eq!(angles(&gen_cantor(3, 1).unwrap()), vec![ratio(0, 1), ratio(2, 3)]);
        assert_eq!(
            angles(&gen_cantor(3, 2).unwrap()),
            vec![ratio(0, 1), ratio(2, 9), ratio(2, 3), ratio(8, 9)]
        );
        assert_eq!(
            angles(&gen_cantor(4, 2).unwrap()),
            vec![ratio(0, 1), ratio(3, 16), ratio(3, 4), ratio(15, 16)]
        );
        assert!(matches!(gen_cantor(3, 21), Err(Error::SizeOverflow(_))));
        assert!(gen_cantor(2, 3).is_err());
    }

    #[test]
    fn cantor_symmetry() {
        for (q, n) in [(3u32, 4u32), (5, 3)] {
            let s = gen_cantor(q, n).unwrap();
            assert_eq!(s.len(), 1 << n);
            // a ↦ (q−1)Σ_{j≤n} q^{-j} − a
            let top: BigRational = (1..=n)
                .map(|j| ratio((q - 1) as i64, (q as i64).pow(j)))
                .fold(BigRational::zero(), |a, b| a + b);
            let set: BTreeSet<BigRational> = angles(&s).into_iter().collect();
            assert!(set.iter().all(|a| set.contains(&(&top - a))));
        }
    }

    #[test]
    fn lacunarity_checks() {
        let z = ratio(0, 1);
        assert!(is_lacunary_with_node(&dirs(&[(1, 2), (1, 4), (1, 8)]), &z));
        assert!(!is_lacunary_with_node(&dirs(&[(1, 2), (3, 8)]), &z));
        assert!(!is_lacunary_with_node(&dirs(&[(8, 9), (2, 3), (2, 9)]), &z));
    }

    #[test]
    fn distance_is_circular() {
        assert_eq!(circular_distance(&ratio(9, 10), &ratio(1, 10)), ratio(1, 5));
        assert_eq!(circular_distance(&ratio(1, 10), &ratio(3, 10)), ratio(1, 5));
    }

    #[test]
    fn extraction_small_cases() {
        let s = gen_lacunary(&ratio(1, 2), 8, &ratio(0, 1)).unwrap();
        let c = extract_lacunary_subsequence(&s).unwrap();
        assert!(c.verify(&s));
        assert!(c.len() >= 2);

        let two = DirectionSet::custom([ratio(1, 3), ratio(1, 2)]).unwrap();
        let c = extract_lacunary_subsequence(&two).unwrap();
        assert!(c.verify(&two) && c.len() == 2);

        let single = gen_uniform(1).unwrap();
        assert!(extract_lacunary_subsequence(&single).is_err());
    }

    #[test]
    fn extraction_uniform_guarantees() {
        for (n, want) in [(64usize, 2usize), (4096, 4)] {
            let s = gen_uniform(n).unwrap();
            let c = extract_lacunary_subsequence(&s).unwrap();
            assert!(c.verify(&s));
            assert!(c.len() >= want, "N={n}: {} < {want}", c.len());
        }
    }

    #[test]
    fn longest_estimates() {
        let s = DirectionSet::custom([ratio(1, 2), ratio(1, 4), ratio(1, 8), ratio(1, 16)]).unwrap();
        let e = longest_lacunary_estimate(&s, 4);
        assert_eq!(e.length, 4);
        assert!(e.certificate.verify(&s));

        let c = gen_cantor(3, 3).unwrap();
        let e = longest_lacunary_estimate(&c, 64);
        assert!(e.length <= 12);
        assert!(e.certificate.verify(&c));
    }

    #[test]
    fn huge_denominators_use_big_path() {
        let s = gen_lacunary(&ratio(1, 2), 140, &ratio(0, 1)).unwrap();
        let e = longest_lacunary_estimate(&s, 8);
        assert_eq!(e.length, 140);
        assert!(e.certificate.verify(&s));
    }

    #[test]
    fn vargas_constants() {
        let s = gen_lacunary(&ratio(1, 2), 16, &ratio(0, 1)).unwrap();
        assert_eq!(vargas_constant_estimate(&s).unwrap(), 4.0);
        let u = vargas_constant_estimate(&gen_uniform(256).unwrap()).unwrap();
        assert!((1.0 / 3.0..=2.0).contains(&u), "{u}");
        let c = vargas_constant_estimate(&gen_cantor(3, 4).unwrap()).unwrap();
        assert!(c <= 4.0);
    }

    #[test]
    fn json_format() {
        let s = gen_cantor(3, 2).unwrap();
        let js = s.to_json().unwrap();
        assert_eq!(
            js,
            r#"{"family":"cantor","q":3,"n":2,"angles":[["0","1"],["2","9"],["2","3"],["8","9"]]}"#
        );
        assert_eq!(DirectionSet::from_json(&js).unwrap(), s);
        let lac = gen_lacunary(&ratio(1, 3), 3, &ratio(1, 5)).unwrap();
        assert_eq!(DirectionSet::from_json(&lac.to_json().unwrap()).unwrap(), lac);
        assert!(DirectionSet::from_json(r#"{"family":"custom","angles":[["1","2"],["1","3"]]}"#).is_err());
        assert!(DirectionSet::from_json(r#"{"family":"custom","angles":[["3","2"]]}"#).is_err());
    }
}

/// `ξ·v` with the exact zero line resolved once per direction.
#[derive(Clone, Copy, Debug)]
pub struct DotKernel {
    eighths: Option<u8>,
    u: [f64; 2],
}

impl DotKernel {
    pub fn eval(&self, k: [i64; 2], xi: [f64; 2]) -> Option<f64> {
        if k == [0, 0] {
            return None;
        }
        let exact_zero = match self.eighths {
            Some(0) | Some(4) => k[0] == 0,
            Some(2) | Some(6) => k[1] == 0,
            Some(1) | Some(5) => k[0] == -k[1],
            Some(3) | Some(7) => k[0] == k[1],
            _ => false,
        };
        if exact_zero {
            None
        } else {
            Some(xi[0] * self.u[0] + xi[1] * self.u[1])
        }
    }
}
