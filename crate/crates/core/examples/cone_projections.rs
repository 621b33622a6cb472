//! Rough and smooth cone projections, and a signed sum over a partition.
use maxdir::directions::ratio;
use maxdir::grid::GridField;
use maxdir::operators::{cone_project, signed_cone_sum, smooth_cone_project, ConeArc, ConePartition};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> maxdir::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let f = GridField::from_fn(128, 1.0, |_, _| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))?;
    let arcs = ConePartition::uniform(6)?.arcs();
    let mut total = 0.0;
    for a in &arcs {
        let g = cone_project(&f, a)?;
        total += g.norm_l2().powi(2);
        println!("arc [{}, {})  |G f|_2 = {:.4}", a.start(), a.end(), g.norm_l2());
    }
    println!("sum of squares {:.6} vs |f - mean|^2 {:.6}", total, f.remove_mean().norm_l2().powi(2));
    let narrow = ConeArc::new(ratio(1, 8), ratio(1, 6))?;
    println!("smooth cone |.|_2 = {:.4}", smooth_cone_project(&f, &narrow)?.norm_l2());
    let signs = [1, -1, 1, -1, 1, -1];
    println!("signed sum |.|_2 = {:.4}", signed_cone_sum(&f, &arcs, &signs)?.norm_l2());
    Ok(())
}
