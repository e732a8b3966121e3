//! JSON instance and report files.
//!
//! Numeric fields accept plain JSON integers or strings such as `"7"`,
//! `"-3/2"`, `"1.03"`. JSON floats are rejected outright so binary floating
//! point can never leak into the exact data; write fractional values as
//! strings instead.

use std::fmt;
use std::fs;
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::land::{ConsolidationOutcome, Farmer, FarmerReport, LandError, LandInstance};
use crate::matrix::IntMatrix;
use crate::model::Partition;
use crate::num::{format_rational, parse_rational};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format version {got}, this build reads version {FORMAT_VERSION}")]
    Version { got: u32 },
    #[error("lot {lot}: weight matrix must have {s} rows and {p} columns")]
    WeightShape { lot: usize, s: usize, p: usize },
    #[error(transparent)]
    Land(#[from] LandError),
}

/// Exact rational that serializes as a JSON integer when it is one small
/// enough, and as a `"num/den"` string otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Rat(BigRational);

impl Serialize for Rat {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.0.denom().is_one() {
            if let Some(v) = self.0.numer().to_i64() {
                return s.serialize_i64(v);
            }
        }
        s.serialize_str(&format_rational(&self.0))
    }
}

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Rat;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer or a rational string like \"3/2\"")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
                Ok(Rat(BigRational::from(BigInt::from(v))))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
                Ok(Rat(BigRational::from(BigInt::from(v))))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rat, E> {
                Err(E::custom(format!(
                    "refusing float {v}; write fractions as strings, e.g. \"{v}\""
                )))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rat, E> {
                parse_rational(v).map(Rat).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

/// Exact integer with the same surface syntax as [`Rat`], rejecting
/// fractional values.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Int(BigInt);

impl Serialize for Int {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Int {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Int;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an integer, possibly quoted")
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Int, E> {
                Ok(Int(BigInt::from(v)))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Int, E> {
                Ok(Int(BigInt::from(v)))
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Int, E> {
                Err(E::custom(format!("refusing float {v}; expected an integer")))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Int, E> {
                let r = parse_rational(v).map_err(E::custom)?;
                if r.denom().is_one() {
                    Ok(Int(r.numer().clone()))
                } else {
                    Err(E::custom(format!("expected an integer, found {v}")))
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceDto {
    version: u32,
    s: usize,
    size_feature_row: usize,
    farmers: Vec<FarmerDto>,
    lots: Vec<LotDto>,
    original: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FarmerDto {
    id: usize,
    farmstead: [Rat; 2],
    totals: Vec<Int>,
    deviation: DeviationDto,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviationDto {
    lower: Vec<Rat>,
    upper: Vec<Rat>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LotDto {
    id: usize,
    location: [Rat; 2],
    size: Int,
    weight_matrix: Vec<Vec<Int>>,
}

fn instance_dto(li: &LandInstance) -> InstanceDto {
    let (s, p) = (li.s(), li.p());
    InstanceDto {
        version: FORMAT_VERSION,
        s,
        size_feature_row: li.size_feature_row(),
        farmers: li
            .farmers()
            .iter()
            .map(|f| FarmerDto {
                id: f.id,
                farmstead: [Rat(f.farmstead.0.clone()), Rat(f.farmstead.1.clone())],
                totals: f.totals.iter().cloned().map(Int).collect(),
                deviation: DeviationDto {
                    lower: f.deviation_lower.iter().cloned().map(Rat).collect(),
                    upper: f.deviation_upper.iter().cloned().map(Rat).collect(),
                },
            })
            .collect(),
        lots: li
            .lots()
            .iter()
            .map(|lot| {
                let w = li.domain().entry(lot.weight_index);
                LotDto {
                    id: lot.id,
                    location: [Rat(lot.location.0.clone()), Rat(lot.location.1.clone())],
                    size: Int(lot.size.clone()),
                    weight_matrix: (0..s)
                        .map(|r| (0..p).map(|c| Int(w.get(r, c).clone())).collect())
                        .collect(),
                }
            })
            .collect(),
        original: li.original().assignment().to_vec(),
    }
}

fn instance_from_dto(dto: InstanceDto) -> Result<LandInstance, FileError> {
    if dto.version != FORMAT_VERSION {
        return Err(FileError::Version { got: dto.version });
    }
    let p = dto.farmers.len();
    let farmers = dto
        .farmers
        .into_iter()
        .map(|f| {
            let [x, y] = f.farmstead;
            Farmer {
                id: f.id,
                farmstead: (x.0, y.0),
                totals: f.totals.into_iter().map(|v| v.0).collect(),
                deviation_lower: f.deviation.lower.into_iter().map(|v| v.0).collect(),
                deviation_upper: f.deviation.upper.into_iter().map(|v| v.0).collect(),
            }
        })
        .collect();
    let mut lot_data = Vec::with_capacity(dto.lots.len());
    for (j, lot) in dto.lots.into_iter().enumerate() {
        if lot.weight_matrix.len() != dto.s
            || lot.weight_matrix.iter().any(|row| row.len() != p)
        {
            return Err(FileError::WeightShape { lot: j, s: dto.s, p });
        }
        let w = IntMatrix::from_rows(
            lot.weight_matrix
                .into_iter()
                .map(|row| row.into_iter().map(|v| v.0).collect())
                .collect(),
        );
        let [x, y] = lot.location;
        lot_data.push((lot.id, (x.0, y.0), lot.size.0, w));
    }
    LandInstance::from_lot_matrices(
        dto.size_feature_row,
        lot_data,
        farmers,
        Partition::new(dto.original),
    )
    .map_err(Into::into)
}

pub fn instance_to_string(li: &LandInstance) -> String {
    let mut text = serde_json::to_string_pretty(&instance_dto(li)).expect("plain data");
    text.push('\n');
    text
}

pub fn parse_instance(text: &str) -> Result<LandInstance, FileError> {
    instance_from_dto(serde_json::from_str(text)?)
}

pub fn read_instance(path: &Path) -> Result<LandInstance, FileError> {
    parse_instance(&fs::read_to_string(path)?)
}

pub fn write_instance(path: &Path, li: &LandInstance) -> Result<(), FileError> {
    fs::write(path, instance_to_string(li))?;
    Ok(())
}

/// Machine-readable solve result.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionReport {
    pub objective: String,
    pub value: BigRational,
    pub assignment: Vec<usize>,
    pub per_farmer: Vec<FarmerReport>,
    pub f2_value: BigRational,
    pub approximation_factor: Option<BigRational>,
    pub trace_summary: TraceSummary,
    /// Per-step detail, present when the solver ran with tracing on.
    pub trace_steps: Option<Vec<ReportStep>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceSummary {
    pub steps: usize,
    pub start_objective: BigRational,
    pub final_objective: BigRational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportStep {
    pub step: usize,
    pub alpha: BigInt,
    pub gain: BigRational,
    pub objective: BigRational,
}

/// Per-step report rows with running objective values.
pub fn trace_steps(trace: &crate::augment::AugmentationTrace) -> Vec<ReportStep> {
    let mut objective = trace.start_objective.clone();
    trace
        .steps
        .iter()
        .enumerate()
        .map(|(k, step)| {
            objective += &step.gain;
            ReportStep {
                step: k + 1,
                alpha: step.alpha.clone(),
                gain: step.gain.clone(),
                objective: objective.clone(),
            }
        })
        .collect()
}

impl SolutionReport {
    pub fn from_outcome(out: &ConsolidationOutcome, include_trace: bool) -> Self {
        SolutionReport {
            objective: out.objective.name().to_string(),
            value: out.value.clone(),
            assignment: out.partition.assignment().to_vec(),
            per_farmer: out.per_farmer.clone(),
            f2_value: out.f2_value.clone(),
            approximation_factor: out.approximation_factor.clone(),
            trace_summary: TraceSummary {
                steps: out.trace.len(),
                start_objective: out.trace.start_objective.clone(),
                final_objective: out.trace.final_objective.clone(),
            },
            trace_steps: include_trace.then(|| trace_steps(&out.trace)),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportDto {
    objective: String,
    value: Rat,
    assignment: Vec<usize>,
    per_farmer: Vec<FarmerReportDto>,
    f2_value: Rat,
    approximation_factor: Option<Rat>,
    trace_summary: TraceSummaryDto,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    trace_steps: Option<Vec<ReportStepDto>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FarmerReportDto {
    totals: Vec<Int>,
    lower: Vec<Int>,
    upper: Vec<Int>,
    slack_plus: Vec<Int>,
    slack_minus: Vec<Int>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TraceSummaryDto {
    steps: usize,
    start_objective: Rat,
    final_objective: Rat,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportStepDto {
    step: usize,
    alpha: Int,
    gain: Rat,
    objective: Rat,
}

fn ints(v: &[BigInt]) -> Vec<Int> {
    v.iter().cloned().map(Int).collect()
}

fn report_dto(rep: &SolutionReport) -> ReportDto {
    ReportDto {
        objective: rep.objective.clone(),
        value: Rat(rep.value.clone()),
        assignment: rep.assignment.clone(),
        per_farmer: rep
            .per_farmer
            .iter()
            .map(|f| FarmerReportDto {
                totals: ints(&f.totals),
                lower: ints(&f.lower),
                upper: ints(&f.upper),
                slack_plus: ints(&f.slack_plus),
                slack_minus: ints(&f.slack_minus),
            })
            .collect(),
        f2_value: Rat(rep.f2_value.clone()),
        approximation_factor: rep.approximation_factor.clone().map(Rat),
        trace_summary: TraceSummaryDto {
            steps: rep.trace_summary.steps,
            start_objective: Rat(rep.trace_summary.start_objective.clone()),
            final_objective: Rat(rep.trace_summary.final_objective.clone()),
        },
        trace_steps: rep.trace_steps.as_ref().map(|steps| {
            steps
                .iter()
                .map(|s| ReportStepDto {
                    step: s.step,
                    alpha: Int(s.alpha.clone()),
                    gain: Rat(s.gain.clone()),
                    objective: Rat(s.objective.clone()),
                })
                .collect()
        }),
    }
}

fn report_from_dto(dto: ReportDto) -> SolutionReport {
    SolutionReport {
        objective: dto.objective,
        value: dto.value.0,
        assignment: dto.assignment,
        per_farmer: dto
            .per_farmer
            .into_iter()
            .map(|f| FarmerReport {
                totals: f.totals.into_iter().map(|v| v.0).collect(),
                lower: f.lower.into_iter().map(|v| v.0).collect(),
                upper: f.upper.into_iter().map(|v| v.0).collect(),
                slack_plus: f.slack_plus.into_iter().map(|v| v.0).collect(),
                slack_minus: f.slack_minus.into_iter().map(|v| v.0).collect(),
            })
            .collect(),
        f2_value: dto.f2_value.0,
        approximation_factor: dto.approximation_factor.map(|v| v.0),
        trace_summary: TraceSummary {
            steps: dto.trace_summary.steps,
            start_objective: dto.trace_summary.start_objective.0,
            final_objective: dto.trace_summary.final_objective.0,
        },
        trace_steps: dto.trace_steps.map(|steps| {
            steps
                .into_iter()
                .map(|s| ReportStep {
                    step: s.step,
                    alpha: s.alpha.0,
                    gain: s.gain.0,
                    objective: s.objective.0,
                })
                .collect()
        }),
    }
}

pub fn report_to_string(rep: &SolutionReport) -> String {
    let mut text = serde_json::to_string_pretty(&report_dto(rep)).expect("plain data");
    text.push('\n');
    text
}

pub fn parse_report(text: &str) -> Result<SolutionReport, FileError> {
    Ok(report_from_dto(serde_json::from_str(text)?))
}

pub fn read_report(path: &Path) -> Result<SolutionReport, FileError> {
    parse_report(&fs::read_to_string(path)?)
}

pub fn write_report(path: &Path, rep: &SolutionReport) -> Result<(), FileError> {
    fs::write(path, report_to_string(rep))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::land::{consolidate, generate_instance, GenerateConfig, LandObjective};
    use crate::num::{bi, br};
    use crate::SolveContext;

    fn village() -> LandInstance {
        generate_instance(&GenerateConfig {
            seed: 11,
            lots: 5,
            farmers: 2,
            features: 2,
            omega_size: 2,
            deviation: br(3, 100),
        })
        .unwrap()
    }

    #[test]
    fn instance_roundtrip_is_exact() {
        let li = village();
        let text = instance_to_string(&li);
        let back = parse_instance(&text).unwrap();
        assert_eq!(back, li);
        // Serialization itself is deterministic.
        assert_eq!(instance_to_string(&back), text);
    }

    #[test]
    fn parses_handwritten_instance() {
        let text = r#"{
            "version": 1,
            "s": 1,
            "size_feature_row": 0,
            "farmers": [
                {"id": 0, "farmstead": ["1/2", 0], "totals": [3],
                 "deviation": {"lower": ["0.5"], "upper": ["1/2"]}},
                {"id": 1, "farmstead": [4, "2.5"], "totals": [2],
                 "deviation": {"lower": ["0.5"], "upper": ["0.5"]}}
            ],
            "lots": [
                {"id": 0, "location": [0, 0], "size": 3, "weight_matrix": [[3, 3]]},
                {"id": 1, "location": [5, 2], "size": 2, "weight_matrix": [[2, 2]]}
            ],
            "original": [0, 1]
        }"#;
        let li = parse_instance(text).unwrap();
        assert_eq!(li.n(), 2);
        assert_eq!(li.p(), 2);
        assert_eq!(li.farmers()[0].farmstead.0, br(1, 2));
        assert_eq!(li.farmers()[1].farmstead.1, br(5, 2));
        assert_eq!(li.lots()[0].size, bi(3));
        assert_eq!(li.lower_bounds()[0], vec![bi(2)]);
        assert_eq!(li.upper_bounds()[0], vec![bi(4)]);
    }

    #[test]
    fn rejects_json_floats() {
        let li = village();
        let text = instance_to_string(&li).replace("\"3/100\"", "0.03");
        let err = parse_instance(&text).unwrap_err();
        assert!(err.to_string().contains("float"), "got: {err}");
    }

    #[test]
    fn rejects_wrong_version() {
        let text = instance_to_string(&village()).replacen("\"version\": 1", "\"version\": 9", 1);
        assert!(matches!(parse_instance(&text), Err(FileError::Version { got: 9 })));
    }

    #[test]
    fn rejects_bad_weight_shape() {
        let text = r#"{
            "version": 1, "s": 2, "size_feature_row": 0,
            "farmers": [{"id": 0, "farmstead": [0, 0], "totals": [3, 1],
                         "deviation": {"lower": [0, 0], "upper": [0, 0]}}],
            "lots": [{"id": 0, "location": [1, 1], "size": 3, "weight_matrix": [[3]]}],
            "original": [0]
        }"#;
        assert!(matches!(
            parse_instance(text),
            Err(FileError::WeightShape { lot: 0, s: 2, p: 1 })
        ));
    }

    #[test]
    fn rejects_unknown_fields() {
        let text = instance_to_string(&village())
            .replacen("\"version\"", "\"verison\"", 1);
        assert!(matches!(parse_instance(&text), Err(FileError::Json(_))));
    }

    #[test]
    fn report_roundtrip_is_exact() {
        let li = village();
        let ctx = SolveContext::new();
        let out = consolidate(&li, LandObjective::F3, &ctx).unwrap();
        for include_trace in [false, true] {
            let rep = SolutionReport::from_outcome(&out, include_trace);
            let text = report_to_string(&rep);
            let back = parse_report(&text).unwrap();
            assert_eq!(back, rep);
            assert_eq!(rep.trace_steps.is_some(), include_trace);
        }
    }

    #[test]
    fn trace_steps_accumulate_to_final_objective() {
        let li = village();
        let ctx = SolveContext::new();
        let out = consolidate(&li, LandObjective::F1, &ctx).unwrap();
        let rep = SolutionReport::from_outcome(&out, true);
        let steps = rep.trace_steps.unwrap();
        assert_eq!(steps.len(), rep.trace_summary.steps);
        if let Some(last) = steps.last() {
            assert_eq!(last.objective, rep.trace_summary.final_objective);
        } else {
            assert_eq!(rep.trace_summary.start_objective, rep.trace_summary.final_objective);
        }
    }

    #[test]
    fn big_integers_serialize_as_strings() {
        let huge = BigInt::from(i64::MAX) * BigInt::from(4);
        let v = serde_json::to_value(Int(huge.clone())).unwrap();
        assert!(v.is_string());
        let back: Int = serde_json::from_value(v).unwrap();
        assert_eq!(back.0, huge);
    }
}
