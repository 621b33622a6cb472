//! Product BMO size of random Haar coefficient families, the dyadic square
//! function, and the John-Nirenberg level-set profile.
use maxdir::bmo::{haar_delta12, ProductCoefficients, Raster};

fn main() -> maxdir::Result<()> {
    let raster = Raster { n: 32, log2_side: 0 };
    for seed in 0..4 {
        let b = ProductCoefficients::random(seed, 10, 3);
        let size = b.product_size()?;
        let unit = b.scaled(1.0 / size.value);
        let profile = unit.jn_level_set_profile(raster, 16)?;
        let field = b.packet_field(raster)?;
        let sq = haar_delta12(&field);
        println!(
            "seed {seed}: size {:.4} (exact {}, witness {:?})  |Sf|_2 {:.4}  decay {:.3}",
            size.value,
            size.exact,
            size.witness,
            sq.norm_l2(),
            profile.decay_rate
        );
    }
    Ok(())
}
