//! Maximal directional Hilbert transform and maximal average over growing
//! uniform sets, applied to the ball indicator.
use maxdir::directions::gen_uniform;
use maxdir::norms::extremizer_ball;
use maxdir::operators::{maximal_avg_directional, maximal_directional, MultiplierSpec};

fn main() -> maxdir::Result<()> {
    let f = extremizer_ball(128, 1.0, 1.0 / 32.0)?;
    let m = MultiplierSpec::sign();
    println!("{:>4} {:>12} {:>12}", "N", "|H_V f|/|f|", "|M_V f|/|f|");
    for count in [1, 2, 4, 8, 16] {
        let set = gen_uniform(count)?;
        let h = maximal_directional(&f, &set, &m)?;
        let a = maximal_avg_directional(&f, &set);
        println!("{count:>4} {:>12.4} {:>12.4}", h.norm_l2() / f.norm_l2(), a.norm_l2() / f.norm_l2());
    }
    Ok(())
}
