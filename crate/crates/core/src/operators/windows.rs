//! Smooth partition-of-unity profiles built from `exp(−1/(1−t²))`.

/// `exp(−1/(1−t²))` on `(−1, 1)`, zero outside.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

/// `g(t) / Σ_j g(t − j)` for a bump `g` supported in an interval of length
/// two. Only the three nearest translates can be nonzero.
fn periodized(g: impl Fn(f64) -> f64, t: f64) -> f64 {
    let v = g(t);
    if v == 0.0 {
        return 0.0;
    }
    let base = t.floor();
    let frac = t - base;
    let mut total = 0.0;
    for j in -2..=2 {
        total += g(frac - j as f64);
    }
    v / total
}

/// `φ(t) = ψ(t) / Σ_j ψ(t − j)`, supported in `(−1, 1)`, `Σ_k φ(t − k) = 1`.
pub fn phi(t: f64) -> f64 {
    periodized(bump, t)
}

/// Littlewood–Paley profile `Φ(r) = φ(log₂ r)`, supported in `(1/2, 2)`,
/// with `Σ_k Φ(2^{−k} r) = 1` for `r > 0` and `Φ(0) = 0`.
pub fn lp_profile(r: f64) -> f64 {
    if r <= 0.0 {
        return 0.0;
    }
    phi(r.log2())
}

/// Cone window `β`: positive on `(−1/2, 3/2)`, zero outside, with
/// `Σ_ℓ β(t − ℓ) = 1`.
pub fn cone_window(t: f64) -> f64 {
    periodized(|s| bump(s - 0.5), t)
}

/// Dyadic scales `k` whose piece `S_k` can be nonzero for moduli in
/// `[rmin, rmax]`.
pub fn active_scales(rmin: f64, rmax: f64) -> std::ops::RangeInclusive<i32> {
    let lo = rmin.log2().floor() as i32 - 1;
    let hi = rmax.log2().ceil() as i32 + 1;
    lo..=hi
}
