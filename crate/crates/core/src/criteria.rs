//! Spectral classification from coefficient tails, in closed form.
//!
//! Everything here is driven by one scalar function of position, the tail
//! functional: on an infinite string x·∫ₓ^∞(w−c)² + x·υ([x,∞)) with c the
//! mean value of w, on a finite one (L−x)·[∫₀ˣw² + υ([0,x))]. Zero stays out
//! of the spectrum exactly when the functional stays bounded, the spectrum is
//! purely discrete exactly when it tends to zero, and the eigenvalue
//! reciprocals are p-summable exactly when the functional to the power p/2 is
//! integrable against dx/x (dx/(L−x) on a finite string). Within the model
//! class the functional has an exact limit given by tail-exponent arithmetic,
//! so every verdict is decided, never sampled.
//!
//! Nonnegative measure coefficients with no quadratic term admit sharper
//! statements through the plain mass functional x·ω([x,∞)); those take the
//! Krein entry point, which also extends the valid exponent range down to
//! p > 1/2 and certifies traces by monotonicity alone.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
#[allow(unused_imports)]
use num_traits::Float;

use crate::coefficients::{
    cesaro_mean_limit, anti_derivative_of_measure, AntiDerivative, ExtendedLength, GIString,
    MeasureRepr, MeasureSign, MeasureTail, TailModel,
};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictValue {
    Yes,
    No,
    Inconclusive,
}

/// A decided property with its derivation.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub value: VerdictValue,
    pub evidence: String,
}

impl Verdict {
    fn new(value: VerdictValue, evidence: String) -> Self {
        Verdict { value, evidence }
    }

    pub fn is_yes(&self) -> bool {
        self.value == VerdictValue::Yes
    }
}

/// Full classification of one string.
#[derive(Debug, Clone)]
pub struct Classification {
    /// Mean value of w at infinity, when it exists in closed form.
    pub c: Option<f64>,
    pub zero_not_in_spectrum: Verdict,
    pub discrete: Verdict,
    /// Schatten membership verdicts for the requested exponents.
    pub schatten: Vec<(f64, Verdict)>,
    /// Σ 1/λ when the trace identity is certified.
    pub trace_sum: Option<f64>,
    /// Σ 1/λ² when the square-sum identity is certified.
    pub hs_sum: Option<f64>,
    /// Limit of the tail functional (None when no mean value exists).
    pub functional_limit: Option<f64>,
    pub warnings: Vec<String>,
}

impl Classification {
    /// Structural consistency: Schatten membership is monotone in p, implies
    /// discreteness, and discreteness implies zero is in the resolvent set.
    pub fn validate(&self) -> Result<()> {
        if self.discrete.value == VerdictValue::Yes
            && self.zero_not_in_spectrum.value != VerdictValue::Yes
        {
            return Err(Error::Inconsistent(
                "discrete spectrum but zero not excluded".into(),
            ));
        }
        let mut sorted: Vec<&(f64, Verdict)> = self.schatten.iter().collect();
        sorted.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut seen_yes = false;
        for (p, v) in sorted {
            if v.value == VerdictValue::Yes {
                seen_yes = true;
                if self.discrete.value != VerdictValue::Yes {
                    return Err(Error::Inconsistent(format!(
                        "Schatten membership at p = {p} without discrete spectrum"
                    )));
                }
            } else if seen_yes {
                return Err(Error::Inconsistent(format!(
                    "Schatten membership lost when the exponent grew to p = {p}"
                )));
            }
        }
        Ok(())
    }
}

/// The tail functional at a point: x·∫ₓ^∞(w−c)² + x·υ([x,∞)) on an infinite
/// string (+∞ when w has no mean value), (L−x)·[∫₀ˣw² + υ([0,x))] on a
/// finite one. Defined for x in [0, L).
pub fn tail_functional(s: &GIString, x: f64) -> f64 {
    let len = s.length();
    match len {
        ExtendedLength::Infinite => {
            let c = match cesaro_mean_limit(s.w(), len) {
                Some(c) => c,
                None => return f64::INFINITY,
            };
            x * s.w().sq_dev_integral(c, x, f64::INFINITY, len) + x * s.upsilon().mass_from(x, len)
        }
        ExtendedLength::Finite(l) => {
            (l - x) * (s.w().sq_dev_integral(0.0, 0.0, x, len) + s.upsilon().mass_upto(x, len))
        }
    }
}

/// Exact limit of the tail functional at the far end, or None when w has no
/// mean value (infinite strings only; the functional is then unbounded for
/// every candidate constant).
pub fn tail_functional_limit(s: &GIString) -> Option<f64> {
    let len = s.length();
    if len.is_infinite() && cesaro_mean_limit(s.w(), len).is_none() {
        return None;
    }
    Some(w_part_limit(s.w(), len) + upsilon_part_limit(s.upsilon(), len))
}

/// Contribution of w to the functional limit: decided by the decay exponent.
fn w_part_limit(w: &AntiDerivative, len: ExtendedLength) -> f64 {
    match (len.is_infinite(), w.tail()) {
        (_, None) | (_, Some(TailModel::ExactConstant { .. })) => 0.0,
        (true, Some(TailModel::LinearGrowth { .. })) => f64::INFINITY,
        (false, Some(TailModel::LinearGrowth { .. })) => f64::NAN,
        (true, Some(TailModel::PowerDecay { coeff, alpha, .. })) => {
            // x·∫ₓ^∞ a²(t+σ)^(−2α) dt → a²x^(2−2α)/(2α−1)
            if *coeff == 0.0 || *alpha > 1.0 {
                0.0
            } else if *alpha == 1.0 {
                coeff * coeff
            } else {
                f64::INFINITY
            }
        }
        (false, Some(TailModel::PowerDecay { coeff, alpha, .. })) => {
            // (L−x)·∫₀ˣ w² picks up a²u^(2−2α)/(2α−1) from the boundary layer
            if *coeff == 0.0 || *alpha < 1.0 {
                0.0
            } else if *alpha == 1.0 {
                coeff * coeff
            } else {
                f64::INFINITY
            }
        }
    }
}

/// Contribution of υ to the functional limit.
fn upsilon_part_limit(m: &MeasureRepr, len: ExtendedLength) -> f64 {
    match m.tail() {
        MeasureTail::Zero => 0.0,
        MeasureTail::PowerDensity { coeff, beta, .. } => {
            if *coeff == 0.0 {
                return 0.0;
            }
            if len.is_infinite() {
                // x·υ([x,∞)) → B·x^(2−β)/(β−1)
                if *beta > 2.0 {
                    0.0
                } else if *beta == 2.0 {
                    *coeff
                } else {
                    f64::INFINITY
                }
            } else {
                // (L−x)·υ([0,x)) → B·u^(2−β)/(β−1) from the boundary layer
                if *beta > 2.0 {
                    f64::INFINITY
                } else if *beta == 2.0 {
                    *coeff
                } else {
                    0.0
                }
            }
        }
    }
}

/// Consistency claims the singularity gate can check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SchattenClaim {
    /// Trace class claimed for a general string: υ must be singular.
    GisS1,
    /// S_{1/2} claimed for a nonnegative-measure string: ω must be singular.
    KreinSHalf,
}

/// Necessary-condition gate: a trace-type membership claim is refuted when
/// the relevant coefficient measure has a nonzero density component (our
/// density components are absolutely continuous by construction, so a
/// nonzero one defeats singularity).
pub fn singularity_gate(s: &GIString, claim: SchattenClaim) -> Verdict {
    let (singular, name) = match claim {
        SchattenClaim::GisS1 => (s.upsilon().is_purely_atomic(), "upsilon"),
        SchattenClaim::KreinSHalf => (omega_purely_atomic(s.w()), "omega"),
    };
    if singular {
        Verdict::new(
            VerdictValue::Yes,
            format!("{name} is purely atomic, hence singular; no contradiction"),
        )
    } else {
        Verdict::new(
            VerdictValue::No,
            format!(
                "{name} has a nonzero absolutely continuous component, but the claimed membership forces a singular measure"
            ),
        )
    }
}

/// Whether ω (through its anti-derivative) is a purely atomic measure: all
/// segments flat and no decaying or growing tail.
pub fn omega_purely_atomic(w: &AntiDerivative) -> bool {
    let flat = w
        .segments()
        .iter()
        .all(|p| p.coeffs[1] == 0.0 && p.coeffs[2] == 0.0 && p.coeffs[3] == 0.0);
    let tail_ok = match w.tail() {
        None | Some(TailModel::ExactConstant { .. }) => true,
        Some(TailModel::PowerDecay { coeff, .. }) => *coeff == 0.0,
        Some(TailModel::LinearGrowth { .. }) => false,
    };
    flat && tail_ok
}

/// Classify a general string at the requested Schatten exponents.
///
/// Exponents must exceed 1; the sharp borderline tests at p = 1 are only
/// necessary conditions and are reported through warnings and the
/// singularity gate, never as verdicts.
pub fn classify(s: &GIString, p_list: &[f64]) -> Result<Classification> {
    for &p in p_list {
        if !(p.is_finite() && p > 1.0) {
            return Err(Error::Usage(format!(
                "Schatten exponents for general strings must satisfy p > 1, got {p}"
            )));
        }
    }
    let len = s.length();
    let c = if len.is_infinite() {
        cesaro_mean_limit(s.w(), len)
    } else {
        None
    };

    let mut cls = classify_from_limits(
        c,
        len.is_infinite(),
        w_part_limit(s.w(), len),
        upsilon_part_limit(s.upsilon(), len),
        p_list,
    );

    let discrete = cls.discrete.value == VerdictValue::Yes;
    if discrete {
        populate_gis_sums(s, c, &mut cls);
        trace_necessary_warnings(s, c, &mut cls.warnings);
    }
    cls.warnings.extend(s.warnings());
    cls.validate()?;
    Ok(cls)
}

/// Classify a Krein string: ω a nonnegative measure, no quadratic term.
/// The mass functional sharpens the exponent range to p > 1/2 and the trace
/// is certified by the moment of ω alone.
pub fn classify_krein(
    length: ExtendedLength,
    omega: &MeasureRepr,
    p_list: &[f64],
) -> Result<Classification> {
    if omega.sign() != MeasureSign::NonNegative {
        return Err(Error::Usage(
            "the Krein classifier requires a nonnegative measure; signed coefficients take the general path".into(),
        ));
    }
    omega.validate(length)?;
    for &p in p_list {
        if !(p.is_finite() && p > 0.5) {
            return Err(Error::Usage(format!(
                "Schatten exponents for Krein strings must satisfy p > 1/2, got {p}"
            )));
        }
    }

    // mass functional limit: x·ω([x,∞)) or (L−x)·ω([0,x))
    let part = match omega.tail() {
        MeasureTail::Zero => 0.0,
        MeasureTail::PowerDensity { coeff, beta, .. } => {
            if *coeff == 0.0 {
                0.0
            } else if length.is_infinite() {
                if *beta > 2.0 {
                    0.0
                } else if *beta == 2.0 {
                    *coeff
                } else {
                    f64::INFINITY
                }
            } else if *beta > 2.0 {
                f64::INFINITY
            } else if *beta == 2.0 {
                *coeff
            } else {
                0.0
            }
        }
    };
    let total = omega.total_mass(length);
    let c = if length.is_infinite() && total.is_finite() {
        Some(total)
    } else {
        None
    };
    let mut cls = classify_from_limits(c, length.is_infinite(), part, 0.0, p_list);

    if cls.discrete.value == VerdictValue::Yes {
        let trace = match length {
            ExtendedLength::Infinite => omega.first_moment(length),
            ExtendedLength::Finite(l) => omega.weighted_moment_finite(l),
        };
        // for a nonnegative pencil the trace is Σ 1/λ by monotone summation,
        // finite exactly when the moment converges
        if trace.is_finite() {
            cls.trace_sum = Some(trace);
        }
        if length.is_infinite() {
            if let (Some(cval), Ok(w)) = (c, anti_derivative_of_measure(omega, length)) {
                let hs = 2.0 * w.x_weighted_sq_dev_integral(cval, length);
                if hs.is_finite() {
                    cls.hs_sum = Some(hs);
                }
            }
        }
    }
    cls.validate()?;
    Ok(cls)
}

/// Shared verdict construction from the two part-limits of the functional.
fn classify_from_limits(
    c: Option<f64>,
    infinite: bool,
    w_part: f64,
    upsilon_part: f64,
    p_list: &[f64],
) -> Classification {
    let far = if infinite { "infinity" } else { "the right endpoint" };
    let (limit, zero, discrete) = if infinite && c.is_none() {
        let ev_zero = Verdict::new(
            VerdictValue::No,
            "w has no mean value at infinity, so the tail functional is unbounded for every constant".into(),
        );
        let ev_disc = Verdict::new(
            VerdictValue::No,
            "unbounded tail functional: zero lies in the spectrum".into(),
        );
        (None, ev_zero, ev_disc)
    } else {
        let limit = w_part + upsilon_part;
        let zero = if limit.is_finite() {
            Verdict::new(
                VerdictValue::Yes,
                format!(
                    "tail functional stays bounded toward {far} (limit {limit}; w-part {w_part}, upsilon-part {upsilon_part})"
                ),
            )
        } else {
            Verdict::new(
                VerdictValue::No,
                format!(
                    "tail functional diverges toward {far} (w-part {w_part}, upsilon-part {upsilon_part})"
                ),
            )
        };
        let discrete = if limit == 0.0 {
            Verdict::new(
                VerdictValue::Yes,
                format!("tail functional vanishes toward {far}"),
            )
        } else {
            Verdict::new(
                VerdictValue::No,
                format!("tail functional has limit {limit} toward {far}, not zero"),
            )
        };
        (Some(limit), zero, discrete)
    };

    let discrete_yes = discrete.value == VerdictValue::Yes;
    let schatten = p_list
        .iter()
        .map(|&p| {
            let v = if discrete_yes {
                Verdict::new(
                    VerdictValue::Yes,
                    format!(
                        "the functional decays with a positive power toward {far}, so its p/2 power is integrable against the scale-invariant measure for p = {p}"
                    ),
                )
            } else {
                Verdict::new(
                    VerdictValue::No,
                    format!(
                        "the functional does not vanish toward {far}; the p-integral diverges for p = {p}"
                    ),
                )
            };
            (p, v)
        })
        .collect();

    Classification {
        c,
        zero_not_in_spectrum: zero,
        discrete,
        schatten,
        trace_sum: None,
        hs_sum: None,
        functional_limit: limit,
        warnings: Vec::new(),
    }
}

/// Trace and square-sum identities for a general string, certified only on
/// the finite-rank class (both coefficients purely atomic) for the trace and
/// on discreteness for the square sum on infinite strings.
fn populate_gis_sums(s: &GIString, c: Option<f64>, cls: &mut Classification) {
    let len = s.length();
    let atomic = omega_purely_atomic(s.w()) && s.upsilon().is_purely_atomic();
    if atomic {
        let trace = match len {
            ExtendedLength::Infinite => {
                s.w().dev_integral(c.unwrap_or(0.0), 0.0, f64::INFINITY, len)
            }
            ExtendedLength::Finite(l) => s.w().finite_trace_integral(l),
        };
        if trace.is_finite() {
            cls.trace_sum = Some(trace);
        }
    }
    if len.is_infinite() {
        let cval = c.unwrap_or(0.0);
        let hs = 2.0 * s.w().x_weighted_sq_dev_integral(cval, len)
            + 2.0 * s.upsilon().first_moment(len);
        if hs.is_finite() {
            cls.hs_sum = Some(hs);
        }
    }
    // on a finite string the square-sum identity degrades to an upper bound,
    // so hs_sum stays empty there
}

/// Necessary conditions for trace class, reported as warnings when violated:
/// integrability of w − c (w itself on a finite string) and singularity of υ.
fn trace_necessary_warnings(s: &GIString, c: Option<f64>, warnings: &mut Vec<String>) {
    let len = s.length();
    let dev = match len {
        ExtendedLength::Infinite => {
            let cval = c.unwrap_or(0.0);
            s.w().dev_integral(cval, 0.0, f64::INFINITY, len).abs()
        }
        ExtendedLength::Finite(l) => s.w().sq_dev_integral(0.0, 0.0, l, len),
    };
    if !dev.is_finite() {
        warnings.push(
            "trace class is excluded: the deviation of w from its mean value is not integrable"
                .into(),
        );
    }
    if !s.upsilon().is_purely_atomic() {
        warnings.push(
            "trace class is excluded: upsilon has an absolutely continuous component".into(),
        );
    }
}
