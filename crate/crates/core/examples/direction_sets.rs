//! Direction families and their lacunary structure: extracted subsequences,
//! longest-chain estimates and Vargas constants.
use maxdir::directions::*;

fn main() -> maxdir::Result<()> {
    let sets = [
        ("uniform", gen_uniform(64)?),
        ("cantor q=3", gen_cantor(3, 6)?),
        ("lacunary 1/2", gen_lacunary(&ratio(1, 2), 20, &ratio(0, 1))?),
        ("random", gen_random(64, 5)?),
    ];
    for (name, set) in &sets {
        let cert = extract_lacunary_subsequence(set)?;
        assert!(cert.verify(set));
        let est = longest_lacunary_estimate(set, DEFAULT_NODE_RESOLUTION);
        println!(
            "{name:<13} N = {:>3}  extracted {:>2}  longest {:>2} (node {})  Vargas constant {:.2}",
            set.len(),
            cert.len(),
            est.length,
            est.certificate.node,
            vargas_constant_estimate(set)?
        );
    }
    Ok(())
}
