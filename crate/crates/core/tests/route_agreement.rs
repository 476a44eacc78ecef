//! Cross-route agreement on seeded random corpora: the Krein-specific
//! classifier against the general one on shared inputs, and classifier
//! trace sums against eigenvalue sums of the dense reference solver.

use gis_core::coefficients::{
    anti_derivative_of_measure, ExtendedLength, GIString, MeasureRepr, MeasureSign,
};
use gis_core::criteria::{classify, classify_krein};
use gis_core::oracle::{oracle_spectrum, PointMassProblem};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_positions(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            x += 0.1 + 0.9 * rng.gen::<f64>();
            x
        })
        .collect()
}

fn atomic_string(len: ExtendedLength, w_atoms: &[(f64, f64)], u_atoms: &[(f64, f64)]) -> GIString {
    let sign = if w_atoms.iter().any(|&(_, m)| m < 0.0) {
        MeasureSign::Signed
    } else {
        MeasureSign::NonNegative
    };
    let wm = MeasureRepr::from_atoms(w_atoms.to_vec(), sign, len).unwrap();
    let w = anti_derivative_of_measure(&wm, len).unwrap();
    let u = MeasureRepr::from_atoms(u_atoms.to_vec(), MeasureSign::NonNegative, len).unwrap();
    GIString::new(len, w, u).unwrap()
}

#[test]
fn krein_route_matches_general_route_on_nonnegative_atoms() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    let p_list = [1.5, 2.0];
    for i in 0..50 {
        let n = rng.gen_range(1..=8usize);
        let nodes = random_positions(&mut rng, n);
        let masses: Vec<f64> = (0..n).map(|_| 0.1 + 1.9 * rng.gen::<f64>()).collect();
        let len = if i % 2 == 0 {
            ExtendedLength::Infinite
        } else {
            ExtendedLength::Finite(nodes.last().unwrap() + 0.3)
        };
        let atoms: Vec<(f64, f64)> = nodes.into_iter().zip(masses).collect();
        let omega = MeasureRepr::from_atoms(atoms.clone(), MeasureSign::NonNegative, len).unwrap();

        let via_krein = classify_krein(len, &omega, &p_list).unwrap();
        let s = atomic_string(len, &atoms, &[]);
        let via_general = classify(&s, &p_list).unwrap();

        assert_eq!(
            via_krein.zero_not_in_spectrum.value,
            via_general.zero_not_in_spectrum.value
        );
        assert_eq!(via_krein.discrete.value, via_general.discrete.value);
        for ((p, a), (q, b)) in via_krein.schatten.iter().zip(&via_general.schatten) {
            assert_eq!(p, q);
            assert_eq!(a.value, b.value, "schatten p = {p} disagrees on instance {i}");
        }
        let (ta, tb) = (via_krein.trace_sum.unwrap(), via_general.trace_sum.unwrap());
        assert!(
            (ta - tb).abs() <= 1e-11 * ta.abs().max(1.0),
            "trace {ta} vs {tb} on instance {i}"
        );
        if len.is_infinite() {
            let (ha, hb) = (via_krein.hs_sum.unwrap(), via_general.hs_sum.unwrap());
            assert!(
                (ha - hb).abs() <= 1e-11 * ha.abs().max(1.0),
                "hs {ha} vs {hb} on instance {i}"
            );
        }
    }
}

#[test]
fn classifier_sums_match_dense_reference_eigenvalues() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for i in 0..30 {
        let n = rng.gen_range(1..=10usize);
        let nodes = random_positions(&mut rng, n);
        let omega: Vec<f64> = (0..n)
            .map(|_| {
                let m = 0.1 + 1.9 * rng.gen::<f64>();
                if rng.gen_bool(0.5) {
                    m
                } else {
                    -m
                }
            })
            .collect();
        let upsilon: Vec<f64> = (0..n)
            .map(|_| if rng.gen_bool(0.5) { 0.1 + rng.gen::<f64>() } else { 0.0 })
            .collect();
        let len = if i % 2 == 0 {
            ExtendedLength::Infinite
        } else {
            ExtendedLength::Finite(nodes.last().unwrap() + 0.5)
        };

        let w_atoms: Vec<(f64, f64)> =
            nodes.iter().copied().zip(omega.iter().copied()).collect();
        let u_atoms: Vec<(f64, f64)> = nodes
            .iter()
            .copied()
            .zip(upsilon.iter().copied())
            .filter(|&(_, m)| m != 0.0)
            .collect();
        let s = atomic_string(len, &w_atoms, &u_atoms);
        let cls = classify(&s, &[2.0]).unwrap();

        let pm = PointMassProblem { length: len, nodes, omega, upsilon };
        let zs = oracle_spectrum(&pm).unwrap();
        let t1: f64 = zs.iter().map(|z| 1.0 / z).sum();
        let scale: f64 = zs.iter().map(|z| 1.0 / z.abs()).sum();
        let closed = cls.trace_sum.expect("atomic strings certify the trace");
        assert!(
            (closed - t1).abs() <= 1e-9 * scale,
            "instance {i}: trace {closed} vs eigenvalue sum {t1}"
        );

        if len.is_infinite() {
            let t2: f64 = zs.iter().map(|z| 1.0 / (z * z)).sum();
            let hs = cls.hs_sum.expect("infinite atomic strings certify the square sum");
            assert!(
                (hs - t2).abs() <= 1e-9 * t2,
                "instance {i}: hs {hs} vs eigenvalue square sum {t2}"
            );
        }
    }
}
