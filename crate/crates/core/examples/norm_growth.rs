//! Growth of lower-bound norm certificates for H_V over uniform and
//! lacunary sets, with the fitted models.
use maxdir::norms::{growth_scan, FamilyKind, OpKind, ScanConfig};

fn main() -> maxdir::Result<()> {
    for family in [FamilyKind::Uniform, FamilyKind::Lacunary] {
        let scan = growth_scan(&ScanConfig::new(family, vec![2, 4, 8, 16], 2.0, OpKind::Hilbert, 128))?;
        println!("{}:", family.name());
        for e in &scan.entries {
            println!("  N = {:>2}  ratio {:.4} ({})", e.count, e.certificate.ratio, e.source);
        }
        for fit in &scan.fits {
            println!("  {:<8} slope {:?} R^2 {:?}", fit.model, fit.a, fit.r2);
        }
        println!("  winner {:?}", scan.winner);
    }
    Ok(())
}
