use gis_core::coefficients::{
    AntiDerivative, ExtendedLength, GIString, MeasureRepr, MeasureSign, TailModel,
};
use gis_core::criteria::classify;
use gis_core::discretization::BoundaryTreatment;
use gis_core::pencil::{refine_until, smallest_by_magnitude};
use gis_core::poly::Poly;

fn main() -> gis_core::Result<()> {
    // w climbs linearly to 1/3 over [0, 1] and stays there; upsilon is a
    // unit point mass at x = 1.
    let w = AntiDerivative::new(
        vec![0.0, 1.0],
        vec![Poly::linear(0.0, 1.0 / 3.0)],
        Some(TailModel::ExactConstant { c: 1.0 / 3.0 }),
        ExtendedLength::Infinite,
    )?;
    let upsilon = MeasureRepr::from_atoms(
        vec![(1.0, 1.0)],
        MeasureSign::NonNegative,
        ExtendedLength::Infinite,
    )?;
    let s = GIString::new(ExtendedLength::Infinite, w, upsilon)?;

    let report = classify(&s, &[1.5, 2.0])?;
    println!("discrete: {:?}", report.discrete.value);

    let sp = refine_until(&s, BoundaryTreatment::Plateau, 4, 1e-6, 6)?;
    let mut window = smallest_by_magnitude(&sp.eigenvalues, 4);
    window.sort_by(f64::total_cmp);
    println!("eigenvalues near zero: {window:?}");
    Ok(())
}
