//! Deterministic self-check suites behind `gis verify`.
//!
//! Each suite pits an independently computed reference against the library
//! route and reports one case per check. Random corpora are drawn from a
//! fixed ChaCha8 stream, so repeated runs are byte-identical.

use gis_core::camassa_holm::{ch_classify, ch_to_string, CHProblem};
use gis_core::coefficients::{
    anti_derivative_of_measure, cesaro_mean_limit, ExtendedLength, GIString, MeasureRepr,
    MeasureSign, MeasureTail,
};
use gis_core::criteria::{classify, Classification};
use gis_core::delta_prime::{dp_classify, DeltaPrimeProblem, DeltaSequence};
use gis_core::discretization::suggest_nodes;
use gis_core::integral_ops::{build_j, build_jl, crossvalidate};
use gis_core::oracle::{oracle_spectrum, PointMassProblem};
use gis_core::poly::Poly;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::schema::{CaseJson, VerifyJson};

pub const SUITES: &[&str] = &["traces", "hs", "crossval", "ch-consistency", "dp-calibration"];

/// Seed of the shared point-mass corpus.
pub const CORPUS_SEED: u64 = 0x0ac5_eed5;

/// Runs one suite by name; `None` means the name is unknown.
pub fn run_suite(name: &str) -> Option<VerifyJson> {
    let cases = match name {
        "traces" => suite_traces(),
        "hs" => suite_hs(),
        "crossval" => suite_crossval(),
        "ch-consistency" => suite_ch_consistency(),
        "dp-calibration" => suite_dp_calibration(),
        _ => return None,
    };
    Some(VerifyJson {
        suite: name.into(),
        passed: cases.iter().all(|c| c.pass),
        cases,
    })
}

/// A random point-mass instance in both representations.
pub struct Instance {
    pub pm: PointMassProblem,
    pub s: GIString,
}

/// Fixed corpus of signed point-mass strings, alternating between infinite
/// and finite length, with up to twelve interior masses each.
pub fn point_mass_corpus(seed: u64, count: usize) -> Vec<Instance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    for i in 0..count {
        let n: usize = rng.gen_range(1..=12);
        let mut nodes = Vec::with_capacity(n);
        let mut x = 0.0;
        for _ in 0..n {
            x += 0.1 + 0.9 * rng.gen::<f64>();
            nodes.push(x);
        }
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
            .map(|_| {
                if rng.gen_bool(0.5) {
                    0.1 + 1.4 * rng.gen::<f64>()
                } else {
                    0.0
                }
            })
            .collect();
        let len = if i % 2 == 0 {
            ExtendedLength::Infinite
        } else {
            ExtendedLength::Finite(x + 0.2 + 0.8 * rng.gen::<f64>())
        };

        let w_atoms: Vec<(f64, f64)> = nodes.iter().copied().zip(omega.iter().copied()).collect();
        let u_atoms: Vec<(f64, f64)> = nodes
            .iter()
            .copied()
            .zip(upsilon.iter().copied())
            .filter(|&(_, m)| m != 0.0)
            .collect();
        let w_measure = MeasureRepr::from_atoms(w_atoms, MeasureSign::Signed, len)
            .expect("corpus omega is valid");
        let w = anti_derivative_of_measure(&w_measure, len).expect("corpus w is valid");
        let ups = MeasureRepr::from_atoms(u_atoms, MeasureSign::NonNegative, len)
            .expect("corpus upsilon is valid");
        let s = GIString::new(len, w, ups).expect("corpus string is valid");
        out.push(Instance {
            pm: PointMassProblem { length: len, nodes, omega, upsilon },
            s,
        });
    }
    out
}

/// (Σ 1/λ, Σ 1/λ², Σ 1/|λ|) over the reference spectrum.
pub fn oracle_inverse_sums(pm: &PointMassProblem) -> gis_core::Result<(f64, f64, f64)> {
    let zs = oracle_spectrum(pm)?;
    let mut t1 = 0.0;
    let mut t2 = 0.0;
    let mut scale = 0.0;
    for z in zs {
        t1 += 1.0 / z;
        t2 += 1.0 / (z * z);
        scale += 1.0 / z.abs();
    }
    Ok((t1, t2, scale))
}

fn case(name: &str, pass: bool, detail: String) -> CaseJson {
    CaseJson { name: name.into(), pass, detail }
}

fn error_case(name: &str, err: impl core::fmt::Display) -> CaseJson {
    case(name, false, format!("error: {err}"))
}

/// Classifier trace sums against eigenvalue sums of the dense reference
/// solver, over the shared corpus.
fn suite_traces() -> Vec<CaseJson> {
    let corpus = point_mass_corpus(CORPUS_SEED, 200);
    let mut worst = [0.0_f64; 2];
    let mut counts = [0usize; 2];
    for inst in &corpus {
        let which = usize::from(!inst.s.length().is_infinite());
        let checked = || -> gis_core::Result<f64> {
            let cls = classify(&inst.s, &[2.0])?;
            let closed = cls.trace_sum.ok_or(gis_core::Error::Inconsistent(
                "trace sum missing on a purely atomic string".into(),
            ))?;
            let (t1, _, scale) = oracle_inverse_sums(&inst.pm)?;
            Ok((closed - t1).abs() / scale.max(1e-300))
        };
        match checked() {
            Ok(rel) => worst[which] = worst[which].max(rel),
            Err(e) => return vec![error_case("trace identity", e)],
        }
        counts[which] += 1;
    }
    let mk = |name: &str, worst: f64, count: usize| {
        case(
            name,
            worst <= 1e-9,
            format!("{count} instances, max relative deviation {worst:.3e} (tol 1e-9)"),
        )
    };
    vec![
        mk("trace identity, infinite length", worst[0], counts[0]),
        mk("trace identity, finite length", worst[1], counts[1]),
    ]
}

/// Hilbert-Schmidt identity on the infinite-length half of the corpus:
/// eigenvalue sums against both the classifier value and an independently
/// integrated closed form.
fn suite_hs() -> Vec<CaseJson> {
    let corpus = point_mass_corpus(CORPUS_SEED, 200);
    let mut worst_cls = 0.0_f64;
    let mut worst_direct = 0.0_f64;
    let mut count = 0usize;
    for inst in &corpus {
        if !inst.s.length().is_infinite() {
            continue;
        }
        let checked = || -> gis_core::Result<(f64, f64)> {
            let (_, t2, _) = oracle_inverse_sums(&inst.pm)?;
            let cls = classify(&inst.s, &[2.0])?;
            let from_cls = cls.hs_sum.ok_or(gis_core::Error::Inconsistent(
                "hs sum missing on a purely atomic string".into(),
            ))?;
            let len = inst.s.length();
            let c = cesaro_mean_limit(inst.s.w(), len).ok_or(gis_core::Error::CesaroUndefined)?;
            let direct = 2.0 * inst.s.w().x_weighted_sq_dev_integral(c, len)
                + 2.0 * inst
                    .s
                    .upsilon()
                    .atoms()
                    .iter()
                    .map(|&(x, m)| x * m)
                    .sum::<f64>();
            Ok(((from_cls - t2).abs() / t2, (direct - t2).abs() / t2))
        };
        match checked() {
            Ok((a, b)) => {
                worst_cls = worst_cls.max(a);
                worst_direct = worst_direct.max(b);
            }
            Err(e) => return vec![error_case("hilbert-schmidt identity", e)],
        }
        count += 1;
    }
    vec![
        case(
            "hilbert-schmidt identity, classifier value",
            worst_cls <= 1e-9,
            format!("{count} instances, max relative deviation {worst_cls:.3e} (tol 1e-9)"),
        ),
        case(
            "hilbert-schmidt identity, direct integral",
            worst_direct <= 1e-9,
            format!("{count} instances, max relative deviation {worst_direct:.3e} (tol 1e-9)"),
        ),
    ]
}

fn signed_atomic_chi() -> MeasureRepr {
    MeasureRepr::from_atoms(
        vec![(0.7, 1.3), (1.5, -0.6), (2.4, 0.9), (4.0, -1.1)],
        MeasureSign::Signed,
        ExtendedLength::Infinite,
    )
    .expect("valid atomic measure")
}

/// Integral-operator discretizations against the energy-space route and
/// against closed-form trace and Hilbert-Schmidt values.
fn suite_crossval() -> Vec<CaseJson> {
    let mut cases = Vec::new();
    let inf = ExtendedLength::Infinite;

    let chi = signed_atomic_chi();
    cases.push(match crossvalidate(&chi, inf, 64, 3, 10, 1e-8) {
        Ok(rep) => {
            let last = rep.levels.last().unwrap();
            case(
                "atomic half line, singular values vs energy-space eigenvalues",
                rep.pass,
                format!(
                    "{} cells, top 10, max relative deviation {:.3e} (tol 1e-8)",
                    last.cells, last.max_rel_dev
                ),
            )
        }
        Err(e) => error_case("atomic half line", e),
    });

    let lebesgue = MeasureRepr::new(
        vec![],
        vec![0.0, 1.0],
        vec![1.0],
        MeasureTail::Zero,
        MeasureSign::NonNegative,
        ExtendedLength::Finite(1.0),
    )
    .expect("valid density");
    cases.push(
        match crossvalidate(&lebesgue, ExtendedLength::Finite(1.0), 256, 4, 10, 1e-4) {
            Ok(rep) => {
                let last = rep.levels.last().unwrap();
                case(
                    "lebesgue unit interval, singular values at 2048 cells",
                    rep.pass && last.cells == 2048,
                    format!(
                        "{} cells, top 10, max relative deviation {:.3e} (tol 1e-4)",
                        last.cells, last.max_rel_dev
                    ),
                )
            }
            Err(e) => error_case("lebesgue unit interval", e),
        },
    );

    cases.push(half_line_matrix_case(&chi));
    cases.push(finite_matrix_case());
    cases
}

fn half_line_matrix_case(chi: &MeasureRepr) -> CaseJson {
    let name = "half line matrix trace and frobenius norm vs closed forms";
    let inf = ExtendedLength::Infinite;
    let run = || -> gis_core::Result<(f64, f64)> {
        let q = anti_derivative_of_measure(chi, inf)?;
        let s = GIString::new(inf, q.clone(), MeasureRepr::zero())?;
        let nodes = suggest_nodes(&s, 4096, Some(12.0))?;
        let j = build_j(&q, &nodes)?;
        let c = cesaro_mean_limit(&q, inf).ok_or(gis_core::Error::CesaroUndefined)?;
        let hs_closed = 2.0 * q.x_weighted_sq_dev_integral(c, inf);
        let hs = j.frobenius_raw().powi(2);
        let tr_closed: f64 = -chi.atoms().iter().map(|&(x, m)| x * m).sum::<f64>();
        let tr = j.trace_raw();
        Ok((
            (hs - hs_closed).abs() / hs_closed.abs().max(1.0),
            (tr - tr_closed).abs() / tr_closed.abs().max(1.0),
        ))
    };
    match run() {
        Ok((hs_rel, tr_rel)) => case(
            name,
            hs_rel <= 1e-3 && tr_rel <= 1e-6,
            format!("frobenius deviation {hs_rel:.3e} (tol 1e-3), trace deviation {tr_rel:.3e} (tol 1e-6)"),
        ),
        Err(e) => error_case(name, e),
    }
}

fn finite_matrix_case() -> CaseJson {
    let name = "finite interval matrix trace vs closed form";
    let l = 1.0;
    let run = || -> gis_core::Result<f64> {
        let chi = MeasureRepr::from_atoms(
            vec![(0.25, 0.8), (0.5, -0.3), (0.9, 0.5)],
            MeasureSign::Signed,
            ExtendedLength::Finite(l),
        )?;
        let q = anti_derivative_of_measure(&chi, ExtendedLength::Finite(l))?;
        let s = GIString::new(ExtendedLength::Finite(l), q.clone(), MeasureRepr::zero())?;
        let nodes = suggest_nodes(&s, 2048, None)?;
        let j = build_jl(&q, l, &nodes)?;
        let tr_closed: f64 = chi.atoms().iter().map(|&(x, m)| (l - x) * m).sum();
        Ok((j.trace_raw() - tr_closed).abs() / tr_closed.abs().max(1.0))
    };
    match run() {
        Ok(rel) => case(
            name,
            rel <= 1e-6,
            format!("trace deviation {rel:.3e} (tol 1e-6)"),
        ),
        Err(e) => error_case(name, e),
    }
}

fn bump() -> (Vec<f64>, Vec<Poly>) {
    (
        vec![0.0, 1.0, 2.0],
        vec![Poly::new([0.0, 0.0, 3.0, -2.0]), Poly::new([1.0, 0.0, -3.0, 2.0])],
    )
}

fn ch_instances() -> Vec<(String, gis_core::Result<CHProblem>)> {
    let inf = ExtendedLength::Infinite;
    let atom = |x: f64, m: f64| MeasureRepr::from_atoms(vec![(x, m)], MeasureSign::NonNegative, inf);
    let (grid, pieces) = bump();
    vec![
        (
            "zero data".into(),
            CHProblem::constant(0.0, MeasureRepr::zero()),
        ),
        (
            "constant one".into(),
            CHProblem::constant(1.0, MeasureRepr::zero()),
        ),
        (
            "bump with one atom".into(),
            atom(1.0, 2.0).and_then(|u| CHProblem::new(grid.clone(), pieces.clone(), u)),
        ),
        (
            "bump with two atoms".into(),
            MeasureRepr::from_atoms(vec![(0.3, 0.7), (1.2, 0.4)], MeasureSign::NonNegative, inf)
                .and_then(|u| CHProblem::new(grid, pieces, u)),
        ),
        (
            "atoms only".into(),
            atom(2.0_f64.ln(), 2.0).and_then(|u| CHProblem::constant(0.0, u)),
        ),
        (
            "eventually lebesgue".into(),
            MeasureRepr::new(
                vec![],
                vec![0.0],
                vec![],
                MeasureTail::PowerDensity { coeff: 0.8, beta: 0.0, shift: 1.0 },
                MeasureSign::NonNegative,
                inf,
            )
            .and_then(|u| CHProblem::constant(0.0, u)),
        ),
    ]
}

fn verdicts_agree(a: &Classification, b: &Classification) -> bool {
    a.zero_not_in_spectrum.value == b.zero_not_in_spectrum.value
        && a.discrete.value == b.discrete.value
        && a.schatten.len() == b.schatten.len()
        && a
            .schatten
            .iter()
            .zip(&b.schatten)
            .all(|((p, u), (q, v))| p == q && u.value == v.value)
}

/// Direct classification of Camassa-Holm data against classification of the
/// transformed string, plus the exact atom mapping.
fn suite_ch_consistency() -> Vec<CaseJson> {
    let p_list = [1.5, 2.0, 3.0];
    let mut cases = Vec::new();
    for (name, made) in ch_instances() {
        let full_name = format!("transform consistency: {name}");
        let run = || -> gis_core::Result<(bool, bool)> {
            let p = made?;
            let direct = ch_classify(&p, &p_list)?;
            let s = ch_to_string(&p)?;
            let via_string = classify(&s, &p_list)?;
            let mapped_exactly = p
                .upsilon()
                .atoms()
                .iter()
                .zip(s.upsilon().atoms())
                .all(|(&(x, m), &(t, v))| t == x.exp_m1() && v == m * (-x).exp())
                && p.upsilon().atoms().len() == s.upsilon().atoms().len();
            Ok((verdicts_agree(&direct, &via_string), mapped_exactly))
        };
        cases.push(match run() {
            Ok((agree, mapped)) => case(
                &full_name,
                agree && mapped,
                format!("verdicts agree: {agree}, atoms mapped exactly: {mapped}"),
            ),
            Err(e) => error_case(&full_name, e),
        });
    }
    cases
}

/// Generator-family classifications against hand-derived boundary values.
fn suite_dp_calibration() -> Vec<CaseJson> {
    let p_list = [1.5, 2.0, 3.0];
    let mut cases = Vec::new();
    let mut push = |name: &str,
                    made: gis_core::Result<DeltaPrimeProblem>,
                    check: &dyn Fn(&Classification) -> (bool, String)| {
        let run = || -> gis_core::Result<(bool, String)> {
            Ok(check(&dp_classify(&made?, &p_list)?))
        };
        cases.push(match run() {
            Ok((pass, detail)) => case(name, pass, detail),
            Err(e) => error_case(name, e),
        });
    };

    use gis_core::criteria::VerdictValue::{No, Yes};
    push(
        "unit spacing keeps zero in the essential spectrum",
        DeltaPrimeProblem::generator(1.0, 1.0, DeltaSequence::Zero),
        &|c| {
            (
                c.zero_not_in_spectrum.value == No && c.functional_limit.is_none(),
                format!("zero verdict {:?}, limit {:?}", c.zero_not_in_spectrum.value, c.functional_limit),
            )
        },
    );
    push(
        "square-root spacing sits on the discreteness boundary",
        DeltaPrimeProblem::generator(1.0, 0.5, DeltaSequence::Zero),
        &|c| {
            let lim = c.functional_limit.unwrap_or(f64::NAN);
            (
                c.zero_not_in_spectrum.value == Yes
                    && c.discrete.value == No
                    && (lim - 1.0 / 12.0).abs() <= 1e-15,
                format!("limit {lim} (expect 1/12)"),
            )
        },
    );
    push(
        "cube-root spacing is purely discrete with every Schatten property",
        DeltaPrimeProblem::generator(1.0, 1.0 / 3.0, DeltaSequence::Zero),
        &|c| {
            (
                c.discrete.value == Yes
                    && c.schatten.iter().all(|(_, v)| v.value == Yes)
                    && c.functional_limit == Some(0.0)
                    && c.c == Some(0.0),
                format!("limit {:?}, c {:?}", c.functional_limit, c.c),
            )
        },
    );
    push(
        "slowly decaying strength perturbation blocks discreteness",
        DeltaPrimeProblem::generator(1.0, 1.0 / 3.0, DeltaSequence::Power { c0: 1.0, rho: 4.0 / 3.0 }),
        &|c| {
            let lim = c.functional_limit.unwrap_or(f64::NAN);
            (
                c.zero_not_in_spectrum.value == Yes
                    && c.discrete.value == No
                    && (lim - 9.0).abs() <= 1e-12,
                format!("limit {lim} (expect 9)"),
            )
        },
    );
    push(
        "double boundary keeps the cross term",
        DeltaPrimeProblem::generator(1.0, 0.5, DeltaSequence::Power { c0: 1.0, rho: 1.5 }),
        &|c| {
            let lim = c.functional_limit.unwrap_or(f64::NAN);
            (
                c.zero_not_in_spectrum.value == Yes && (lim - 37.0 / 12.0).abs() <= 1e-12,
                format!("limit {lim} (expect 37/12)"),
            )
        },
    );
    cases
}
