use lathom::density::{DensityFamily, InteractionDensity};
use lathom::homogenization::f_hom_estimate;
use lathom::solver::SolveOptions;

#[test]
fn d2_fhom_gaps() {
    let opts = SolveOptions { grad_tol: 1e-10, ..Default::default() };
    for (name, fam, p, t) in [
        ("nn p=2", DensityFamily::NearestNeighbor { coeff: 1.0 }, 2.0, 2.0),
        ("poly s=3 p=1.5 T=3", DensityFamily::PolyDecay { s: 3.0 }, 1.5, 3.0),
        ("poly s=3 p=2 T=3", DensityFamily::PolyDecay { s: 3.0 }, 2.0, 3.0),
        ("poly s=4 p=2.5 T=3", DensityFamily::PolyDecay { s: 4.0 }, 2.5, 3.0),
    ] {
        let density = InteractionDensity::from_family(2, &fam, p, t).unwrap();
        let matrix = [0.9, -0.4];
        let t0 = std::time::Instant::now();
        let est = f_hom_estimate(&density, &matrix, 1, &[8, 16, 32], &opts).unwrap();
        println!(
            "{name}: ref {:.8} est {:.8} gap {:.3e} ({:?})",
            est.reference, est.extrapolated.value, est.relative_gap(), t0.elapsed()
        );
    }
}
