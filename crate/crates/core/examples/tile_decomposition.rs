//! Wave-packet coefficients on a tile set, a greedy size decomposition and
//! the model-sum square functions.
use maxdir::directions::gen_uniform;
use maxdir::grid::GridField;
use maxdir::phase::*;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> maxdir::Result<()> {
    let set = build_tile_set(&[0, 1], &[0, 1, 2], 64, 4.0)?;
    let bank = PacketBank::new(&set)?;
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let f = GridField::from_fn(64, 4.0, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), 0.0))?;
    let coeffs = bank.coefficients(&f)?;
    println!("{} tiles, {} skipped", set.len(), bank.skipped().len());

    let (tiles, c) = random_instance(9, 12);
    let ids: Vec<usize> = (0..tiles.len()).collect();
    let forest = greedy_size_decompose(&tiles, &ids, &c, GreedyOptions::default())?;
    for round in &forest.rounds {
        println!("sigma {:.4}: {} trees, residual size {:.4}", round.sigma, round.trees.len(), round.residual_size);
    }

    let realized: Vec<usize> = (0..bank.len()).filter(|&i| bank.packet(i).is_some()).collect();
    let v = gen_uniform(8)?;
    let ms = model_sum_from_coeffs(&bank, &coeffs, &set.tiles, &realized, &v)?;
    let (sq, sc) = square_ops_from_coeffs(64, 4.0, &coeffs, &set.tiles, &realized, &v)?;
    println!(
        "model sum max |.|_2 {:.4}, SQ |.|_2 {:.4}, SC |.|_2 {:.4}",
        ms.maximal.norm_l2(),
        sq.norm_l2(),
        sc.norm_l2()
    );
    Ok(())
}
