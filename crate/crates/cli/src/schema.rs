//! JSON problem documents and result shapes.
//!
//! A problem document carries exactly one problem kind plus its
//! coefficients; an optional `requested` block provides solver and
//! classification defaults that command-line flags override. Serialization
//! is lossless for the model class: every emitted document re-parses into
//! an equal value, and identical inputs produce byte-identical output.

use serde::{Deserialize, Serialize};

use gis_core::camassa_holm::CHProblem;
use gis_core::coefficients::{
    AntiDerivative, ExtendedLength, GIString, MeasureRepr, MeasureSign, MeasureTail, TailModel,
};
use gis_core::criteria::{Classification, VerdictValue};
use gis_core::delta_prime::{DeltaPrimeProblem, DeltaSequence};
use gis_core::pencil::Spectrum;
use gis_core::poly::Poly;

#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct SchemaError(pub String);

fn bad(msg: impl Into<String>) -> SchemaError {
    SchemaError(msg.into())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Gis,
    Krein,
    Ch,
    DeltaPrime,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LengthJson {
    Finite(f64),
    Infinite,
}

impl LengthJson {
    fn to_core(self) -> ExtendedLength {
        match self {
            LengthJson::Finite(l) => ExtendedLength::Finite(l),
            LengthJson::Infinite => ExtendedLength::Infinite,
        }
    }

    fn from_core(len: ExtendedLength) -> Self {
        match len {
            ExtendedLength::Finite(l) => LengthJson::Finite(l),
            ExtendedLength::Infinite => LengthJson::Infinite,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailJson {
    ExactConstant { c: f64 },
    PowerDecay { c: f64, coeff: f64, alpha: f64, shift: f64 },
    LinearGrowth { c: f64, slope: f64 },
}

impl TailJson {
    fn to_core(self) -> TailModel {
        match self {
            TailJson::ExactConstant { c } => TailModel::ExactConstant { c },
            TailJson::PowerDecay { c, coeff, alpha, shift } => {
                TailModel::PowerDecay { c, coeff, alpha, shift }
            }
            TailJson::LinearGrowth { c, slope } => TailModel::LinearGrowth { c, slope },
        }
    }

    fn from_core(t: &TailModel) -> Self {
        match *t {
            TailModel::ExactConstant { c } => TailJson::ExactConstant { c },
            TailModel::PowerDecay { c, coeff, alpha, shift } => {
                TailJson::PowerDecay { c, coeff, alpha, shift }
            }
            TailModel::LinearGrowth { c, slope } => TailJson::LinearGrowth { c, slope },
        }
    }
}

/// Anti-derivative of ω: cubic segment coefficients per grid cell in local
/// coordinates, plus an optional analytic tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WJson {
    pub grid: Vec<f64>,
    pub segments: Vec<[f64; 4]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<TailJson>,
}

impl WJson {
    fn to_core(&self, len: ExtendedLength) -> Result<AntiDerivative, SchemaError> {
        AntiDerivative::new(
            self.grid.clone(),
            self.segments.iter().map(|c| Poly::new(*c)).collect(),
            self.tail.map(TailJson::to_core),
            len,
        )
        .map_err(|e| bad(format!("w: {e}")))
    }

    fn from_core(w: &AntiDerivative) -> Self {
        WJson {
            grid: w.grid().to_vec(),
            segments: w.segments().iter().map(|p| p.coeffs).collect(),
            tail: w.tail().map(TailJson::from_core),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureTailJson {
    Zero,
    PowerDensity { coeff: f64, beta: f64, shift: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityJson {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tail: Option<MeasureTailJson>,
}

/// Nonnegative measure: atoms as [position, weight] pairs plus an optional
/// piecewise-constant density with tail.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct MeasureJson {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub atoms: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub density: Option<DensityJson>,
}

impl MeasureJson {
    fn to_core(&self, sign: MeasureSign, len: ExtendedLength) -> Result<MeasureRepr, SchemaError> {
        let atoms: Vec<(f64, f64)> = self.atoms.iter().map(|a| (a[0], a[1])).collect();
        let (grid, values, tail) = match &self.density {
            None => (vec![0.0], vec![], MeasureTail::Zero),
            Some(d) => {
                let tail = match d.tail {
                    None | Some(MeasureTailJson::Zero) => MeasureTail::Zero,
                    Some(MeasureTailJson::PowerDensity { coeff, beta, shift }) => {
                        MeasureTail::PowerDensity { coeff, beta, shift }
                    }
                };
                (d.grid.clone(), d.values.clone(), tail)
            }
        };
        MeasureRepr::new(atoms, grid, values, tail, sign, len)
            .map_err(|e| bad(format!("measure: {e}")))
    }

    pub fn from_core(m: &MeasureRepr) -> Self {
        let trivial_density = m.density_grid() == [0.0]
            && m.density_values().is_empty()
            && *m.tail() == MeasureTail::Zero;
        MeasureJson {
            atoms: m.atoms().iter().map(|&(x, w)| [x, w]).collect(),
            density: if trivial_density {
                None
            } else {
                Some(DensityJson {
                    grid: m.density_grid().to_vec(),
                    values: m.density_values().to_vec(),
                    tail: match *m.tail() {
                        MeasureTail::Zero => Some(MeasureTailJson::Zero),
                        MeasureTail::PowerDensity { coeff, beta, shift } => {
                            Some(MeasureTailJson::PowerDensity { coeff, beta, shift })
                        }
                    },
                })
            },
        }
    }
}

/// Camassa-Holm u: cubic pieces per grid cell, continuously differentiable,
/// constant beyond the last breakpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UJson {
    pub grid: Vec<f64>,
    pub pieces: Vec<[f64; 4]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeltaJson {
    Zero,
    Power { c0: f64, rho: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SupportJson {
    Explicit(Vec<[f64; 2]>),
    Generator { a: f64, gamma: f64, delta: DeltaJson },
}

/// Default parameters a document may carry; command-line flags win.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Requested {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_list: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
}

/// One problem in one of the four supported kinds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDoc {
    pub kind: Kind,
    #[serde(rename = "L", default, skip_serializing_if = "Option::is_none")]
    pub length: Option<LengthJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub w: Option<WJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub upsilon: Option<MeasureJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<MeasureJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u: Option<UJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub support: Option<SupportJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub requested: Option<Requested>,
}

/// Parsed, validated problem.
#[derive(Debug, Clone)]
pub enum Problem {
    Gis(GIString),
    Krein { length: ExtendedLength, omega: MeasureRepr },
    Ch(CHProblem),
    DeltaPrime(DeltaPrimeProblem),
}

impl ProblemDoc {
    pub fn parse(&self) -> Result<Problem, SchemaError> {
        match self.kind {
            Kind::Gis => {
                self.forbid(&[("omega", self.omega.is_some()), ("u", self.u.is_some()),
                              ("support", self.support.is_some())])?;
                let len = self.required_length()?;
                let w = self
                    .w
                    .as_ref()
                    .ok_or_else(|| bad("kind gis requires field w"))?
                    .to_core(len)?;
                let upsilon = self
                    .upsilon
                    .clone()
                    .unwrap_or_default()
                    .to_core(MeasureSign::NonNegative, len)?;
                GIString::new(len, w, upsilon)
                    .map(Problem::Gis)
                    .map_err(|e| bad(format!("gis: {e}")))
            }
            Kind::Krein => {
                self.forbid(&[("w", self.w.is_some()), ("upsilon", self.upsilon.is_some()),
                              ("u", self.u.is_some()), ("support", self.support.is_some())])?;
                let len = self.required_length()?;
                let omega = self
                    .omega
                    .as_ref()
                    .ok_or_else(|| bad("kind krein requires field omega"))?
                    .to_core(MeasureSign::NonNegative, len)?;
                Ok(Problem::Krein { length: len, omega })
            }
            Kind::Ch => {
                self.forbid(&[("w", self.w.is_some()), ("omega", self.omega.is_some()),
                              ("support", self.support.is_some())])?;
                self.infinite_only()?;
                let u = self.u.as_ref().ok_or_else(|| bad("kind ch requires field u"))?;
                let upsilon = self
                    .upsilon
                    .clone()
                    .unwrap_or_default()
                    .to_core(MeasureSign::NonNegative, ExtendedLength::Infinite)?;
                CHProblem::new(
                    u.grid.clone(),
                    u.pieces.iter().map(|c| Poly::new(*c)).collect(),
                    upsilon,
                )
                .map(Problem::Ch)
                .map_err(|e| bad(format!("ch: {e}")))
            }
            Kind::DeltaPrime => {
                self.forbid(&[("w", self.w.is_some()), ("upsilon", self.upsilon.is_some()),
                              ("omega", self.omega.is_some()), ("u", self.u.is_some())])?;
                self.infinite_only()?;
                let p = match self
                    .support
                    .as_ref()
                    .ok_or_else(|| bad("kind delta_prime requires field support"))?
                {
                    SupportJson::Explicit(atoms) => DeltaPrimeProblem::explicit(
                        atoms.iter().map(|a| (a[0], a[1])).collect(),
                    ),
                    SupportJson::Generator { a, gamma, delta } => DeltaPrimeProblem::generator(
                        *a,
                        *gamma,
                        match delta {
                            DeltaJson::Zero => DeltaSequence::Zero,
                            DeltaJson::Power { c0, rho } => {
                                DeltaSequence::Power { c0: *c0, rho: *rho }
                            }
                        },
                    ),
                };
                p.map(Problem::DeltaPrime)
                    .map_err(|e| bad(format!("delta_prime: {e}")))
            }
        }
    }

    /// A transformed or normalized string, re-emitted as a gis document.
    pub fn from_string(s: &GIString) -> Self {
        ProblemDoc {
            kind: Kind::Gis,
            length: Some(LengthJson::from_core(s.length())),
            w: Some(WJson::from_core(s.w())),
            upsilon: Some(MeasureJson::from_core(s.upsilon())),
            omega: None,
            u: None,
            support: None,
            requested: None,
        }
    }

    fn required_length(&self) -> Result<ExtendedLength, SchemaError> {
        self.length
            .map(LengthJson::to_core)
            .ok_or_else(|| bad("this kind requires the field L"))
    }

    fn infinite_only(&self) -> Result<(), SchemaError> {
        match self.length {
            None | Some(LengthJson::Infinite) => Ok(()),
            Some(LengthJson::Finite(_)) => {
                Err(bad("this kind lives on the half line; L must be \"infinite\" or absent"))
            }
        }
    }

    fn forbid(&self, fields: &[(&str, bool)]) -> Result<(), SchemaError> {
        for (name, present) in fields {
            if *present {
                return Err(bad(format!("field {name} does not apply to this kind")));
            }
        }
        Ok(())
    }
}

fn verdict_name(v: VerdictValue) -> &'static str {
    match v {
        VerdictValue::Yes => "Yes",
        VerdictValue::No => "No",
        VerdictValue::Inconclusive => "Inconclusive",
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerdictJson {
    pub value: String,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenJson {
    pub p: f64,
    pub value: String,
    pub evidence: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationJson {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub zero_not_in_spectrum: VerdictJson,
    pub discrete: VerdictJson,
    pub schatten: Vec<SchattenJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trace_sum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hs_sum: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functional_limit: Option<f64>,
    pub warnings: Vec<String>,
}

impl ClassificationJson {
    pub fn from_core(c: &Classification) -> Self {
        ClassificationJson {
            c: c.c,
            zero_not_in_spectrum: VerdictJson {
                value: verdict_name(c.zero_not_in_spectrum.value).into(),
                evidence: c.zero_not_in_spectrum.evidence.clone(),
            },
            discrete: VerdictJson {
                value: verdict_name(c.discrete.value).into(),
                evidence: c.discrete.evidence.clone(),
            },
            schatten: c
                .schatten
                .iter()
                .map(|(p, v)| SchattenJson {
                    p: *p,
                    value: verdict_name(v.value).into(),
                    evidence: v.evidence.clone(),
                })
                .collect(),
            trace_sum: c.trace_sum,
            hs_sum: c.hs_sum,
            functional_limit: c.functional_limit,
            warnings: c.warnings.clone(),
        }
    }

    pub fn any_inconclusive(&self) -> bool {
        self.zero_not_in_spectrum.value == "Inconclusive"
            || self.discrete.value == "Inconclusive"
            || self.schatten.iter().any(|s| s.value == "Inconclusive")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumJson {
    /// Finite eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
    pub dofs: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<f64>,
    pub converged: bool,
    /// Largest relative movement of a tracked eigenvalue in the last
    /// refinement step; absent for a single fixed-grid solve.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub last_delta: Option<f64>,
    /// Set unless the classifier certifies a purely discrete spectrum: the
    /// reported values then approximate at most the discrete part.
    pub discreteness_caveat: bool,
    /// The classifier's discreteness verdict, or "unavailable".
    pub classifier_discrete: String,
}

impl SpectrumJson {
    pub fn from_core(sp: &Spectrum, discrete: Option<VerdictValue>) -> Self {
        SpectrumJson {
            eigenvalues: sp.eigenvalues.clone(),
            dofs: sp.dofs,
            truncation: sp.truncation,
            converged: sp.converged,
            last_delta: sp.last_delta.is_finite().then_some(sp.last_delta),
            discreteness_caveat: discrete != Some(VerdictValue::Yes),
            classifier_discrete: discrete.map_or("unavailable".into(), |v| verdict_name(v).into()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseJson {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyJson {
    pub suite: String,
    pub passed: bool,
    pub cases: Vec<CaseJson>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documents_round_trip() {
        let text = r#"{
            "kind": "gis",
            "L": {"finite": 1.0},
            "w": {"grid": [0.0, 0.5], "segments": [[0.0, 1.0, 0.0, 0.0]],
                  "tail": {"power_decay": {"c": 0.5, "coeff": 1.0, "alpha": 1.0, "shift": 0.0}}},
            "upsilon": {"atoms": [[0.25, 2.0]]}
        }"#;
        let doc: ProblemDoc = serde_json::from_str(text).unwrap();
        doc.parse().unwrap();
        let emitted = serde_json::to_string(&doc).unwrap();
        let again: ProblemDoc = serde_json::from_str(&emitted).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn kind_field_mismatches_are_diagnosed() {
        let doc: ProblemDoc = serde_json::from_str(
            r#"{"kind": "krein", "L": "infinite",
                "omega": {"atoms": [[1.0, 1.0]]},
                "w": {"grid": [0.0], "segments": []}}"#,
        )
        .unwrap();
        let err = doc.parse().unwrap_err();
        assert!(err.0.contains("w"), "{err}");
        assert!(serde_json::from_str::<ProblemDoc>(r#"{"kind": "gis", "bogus": 1}"#).is_err());
    }

    #[test]
    fn string_documents_survive_transform_emission() {
        let doc: ProblemDoc = serde_json::from_str(
            r#"{"kind": "gis", "L": "infinite",
                "w": {"grid": [0.0, 1.0], "segments": [[0.0, 0.0, 0.0, 0.0]],
                      "tail": {"exact_constant": {"c": 0.0}}},
                "upsilon": {"atoms": [[1.0, 1.0]]}}"#,
        )
        .unwrap();
        let s = match doc.parse().unwrap() {
            Problem::Gis(s) => s,
            _ => unreachable!(),
        };
        let emitted = ProblemDoc::from_string(&s);
        match emitted.parse().unwrap() {
            Problem::Gis(t) => {
                assert_eq!(t.w().grid(), s.w().grid());
                assert_eq!(t.upsilon().atoms(), s.upsilon().atoms());
            }
            _ => unreachable!(),
        }
    }
}
