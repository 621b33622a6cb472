//! Directional maximal averages and the bi-parameter maximal function.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::directions::{Direction, DirectionSet};
use crate::error::{Error, Result};
use crate::grid::GridField;

/// Lattice offsets `d_t`, `t = 0..=n/2`, of the sampled line through the
/// origin. Axis and diagonal directions step along exact lattice lines;
/// other directions use the nearest lattice point to `t·v` in cell units.
pub fn line_offsets(v: &Direction, n: usize) -> Vec<[i64; 2]> {
    let half = n / 2;
    match v.lattice_step() {
        Some(s) => (0..=half as i64).map(|t| [t * s[0], t * s[1]]).collect(),
        None => {
            let u = v.unit_vector();
            (0..=half)
                .map(|t| {
                    let t = t as f64;
                    [(t * u[0]).round() as i64, (t * u[1]).round() as i64]
                })
                .collect()
        }
    }
}

#[inline]
fn wrap(i: usize, d: i64, n: usize) -> usize {
    (i as i64 + d).rem_euclid(n as i64) as usize
}

/// `M_v f(x) = max_ε (2ε+1)⁻¹ Σ_{|t|≤ε} |f(x + d_t)|` over `ε = 0..=n/2`.
/// `ε = 0` is the pointwise value, the discrete limit of shrinking segments.
pub fn maximal_avg_single(f: &GridField, v: &Direction) -> Vec<f64> {
    let n = f.n();
    let a = f.abs();
    let offs = line_offsets(v, n);
    let mut out = vec![0.0; n * n];
    out.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
        for (j, slot) in row.iter_mut().enumerate() {
            let mut sum = a[i * n + j];
            let mut best = sum;
            for (t, d) in offs.iter().enumerate().skip(1) {
                sum += a[wrap(i, d[0], n) * n + wrap(j, d[1], n)];
                sum += a[wrap(i, -d[0], n) * n + wrap(j, -d[1], n)];
                let avg = sum / (2 * t + 1) as f64;
                if avg > best {
                    best = avg;
                }
            }
            *slot = best;
        }
    });
    out
}

/// `M_V f = max_{v ∈ V} M_v f`.
pub fn maximal_avg_directional(f: &GridField, set: &DirectionSet) -> GridField {
    let n = f.n();
    let best = set
        .dirs()
        .iter()
        .map(|v| maximal_avg_single(f, v))
        .reduce(|mut acc, m| {
            acc.par_iter_mut().zip(m.par_iter()).for_each(|(a, b)| {
                if *b > *a {
                    *a = *b;
                }
            });
            acc
        })
        .unwrap_or_else(|| vec![0.0; n * n]);
    f.with_data(best.into_iter().map(|x| Complex64::new(x, 0.0)).collect())
}

/// Maximal average of `|f|` over rectangles `{x + s·a + t·b : |s| ≤ ε₁,
/// |t| ≤ ε₂}` with `a` the lattice step of `v` and `b` that of `v` rotated a
/// quarter turn, `ε₁, ε₂ = 0..=n/2`. Cost is `O(n⁴/4)`.
pub fn bi_maximal(f: &GridField, v: &Direction) -> Result<GridField> {
    let a = v
        .lattice_step()
        .ok_or_else(|| Error::ResamplingRequired(v.angle().to_string()))?;
    let b = v.rotate_quarter().lattice_step().expect("rotation keeps lattice steps");
    let n = f.n();
    let half = n / 2;
    let abs = f.abs();
    let mut best = abs.clone();
    // Running line sums along `a`, one ε₁ at a time.
    let mut line = abs.clone();
    for e1 in 0..=half {
        if e1 > 0 {
            let e = e1 as i64;
            line.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
                for (j, s) in row.iter_mut().enumerate() {
                    *s += abs[wrap(i, e * a[0], n) * n + wrap(j, e * a[1], n)];
                    *s += abs[wrap(i, -e * a[0], n) * n + wrap(j, -e * a[1], n)];
                }
            });
        }
        let w1 = (2 * e1 + 1) as f64;
        let line_ref = &line;
        best.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                let mut sum = line_ref[i * n + j];
                let mut m = *slot;
                m = m.max(sum / w1);
                for e2 in 1..=half as i64 {
                    sum += line_ref[wrap(i, e2 * b[0], n) * n + wrap(j, e2 * b[1], n)];
                    sum += line_ref[wrap(i, -e2 * b[0], n) * n + wrap(j, -e2 * b[1], n)];
                    let avg = sum / (w1 * (2 * e2 + 1) as f64);
                    if avg > m {
                        m = avg;
                    }
                }
                *slot = m;
            }
        });
    }
    Ok(f.with_data(best.into_iter().map(|x| Complex64::new(x, 0.0)).collect()))
}
