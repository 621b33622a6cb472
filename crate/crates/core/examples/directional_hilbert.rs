//! Directional Hilbert transform of a random field: energy, the `H² = P_v`
//! identity, and a rotated direction.
use maxdir::directions::Direction;
use maxdir::grid::GridField;
use maxdir::operators::{hilbert_directional, zero_line_projection};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> maxdir::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = GridField::from_fn(128, 1.0, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))?;
    for v in [Direction::from_ratio(0, 1), Direction::from_ratio(1, 8), Direction::from_ratio(2, 7)] {
        let h = hilbert_directional(&f, &v)?;
        let hh = hilbert_directional(&h, &v)?;
        let err = hh.max_abs_diff(&zero_line_projection(&f, &v)?);
        println!(
            "v = {:>4} turns  |f|_2 = {:.4}  |H f|_2 = {:.4}  |HHf - P f|_inf = {err:.1e}",
            v.angle(),
            f.norm_l2(),
            h.norm_l2()
        );
    }
    Ok(())
}
