//! Littlewood-Paley pieces of a random field and the lacunary directional
//! square function.
use maxdir::directions::{gen_lacunary, ratio};
use maxdir::grid::GridField;
use maxdir::operators::{active_scales, lacunary_square_function, lp_piece, MultiplierSpec};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> maxdir::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let f = GridField::from_fn(128, 1.0, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))?;
    let mut sum = GridField::zeros(128, 1.0)?;
    for k in active_scales(&f) {
        let piece = lp_piece(&f, k);
        println!("S_{k:<2} |.|_2 = {:.4}", piece.norm_l2());
        sum = sum.add(&piece)?;
    }
    println!("|sum - (f - mean)|_inf = {:.1e}", sum.max_abs_diff(&f.remove_mean()));
    for count in [2, 8, 32] {
        let set = gen_lacunary(&ratio(1, 2), count, &ratio(0, 1))?;
        let sq = lacunary_square_function(&f, &set, &MultiplierSpec::sign())?;
        println!("N = {count:>2}  |S_V f|_2 / |f|_2 = {:.4}", sq.norm_l2() / f.norm_l2());
    }
    Ok(())
}
