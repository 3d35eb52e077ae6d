//! JSON and CSV formats for masks, schedules, samples and reports.
//!
//! JSON numbers are written with 17 significant digits so identical inputs
//! produce byte-identical files.

use std::io::{self, Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::fourier::{DecayKind, DecaySequence, DecayVerdict, HBasis, PeriodicFunction};
use crate::generation::{
    AuditOutcome, AuditReport, ExponentialSpace, GenerationReport, ZeroConditionTable,
};
use crate::shift::Subspace;
use crate::subdivision::{Mask, MaskSchedule, SampledFunction, TailRule};
use crate::symbol::{LagrangeBound, LaurentPolynomial, NormalizationConvention};

/// serde_json formatter writing floats as `{:.16e}`.
#[derive(Debug, Default, Clone, Copy)]
pub struct FixedPrecision;

impl serde_json::ser::Formatter for FixedPrecision {
    fn write_f64<W: ?Sized + Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W: ?Sized + Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FixedPrecision);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized, W: Write>(value: &T, mut out: W) -> Result<()> {
    out.write_all(to_json_string(value)?.as_bytes())?;
    Ok(())
}

/// A coefficient given either as a real number or as `[re, im]`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum CoeffJson {
    Real(f64),
    Complex([f64; 2]),
}

impl From<CoeffJson> for Complex64 {
    fn from(c: CoeffJson) -> Self {
        match c {
            CoeffJson::Real(re) => Complex64::new(re, 0.0),
            CoeffJson::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

fn default_convention() -> NormalizationConvention {
    NormalizationConvention::SubdivisionSum2
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaskJson {
    pub lo: i64,
    coeffs: Vec<CoeffJson>,
    #[serde(default = "default_convention")]
    pub normalization: NormalizationConvention,
}

impl MaskJson {
    pub fn from_mask(mask: &Mask) -> Self {
        let sym = mask.symbol();
        Self {
            lo: sym.lo(),
            coeffs: sym
                .coeffs()
                .iter()
                .map(|c| CoeffJson::Complex([c.re, c.im]))
                .collect(),
            normalization: NormalizationConvention::SubdivisionSum2,
        }
    }

    pub fn to_mask(&self) -> Result<Mask> {
        let f = self
            .normalization
            .factor_to(NormalizationConvention::SubdivisionSum2);
        let coeffs = self
            .coeffs
            .iter()
            .map(|&c| Complex64::from(c) * f)
            .collect::<Vec<_>>();
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Invalid("mask coefficients must be finite".into()));
        }
        Mask::new(LaurentPolynomial::new(coeffs, self.lo))
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaJson {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
    #[serde(default)]
    pub mult: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TailJson {
    RepeatLast,
    Exponential {
        lambdas: Vec<LambdaJson>,
        #[serde(default)]
        level_offset: i32,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleJson {
    pub head: Vec<MaskJson>,
    pub tail: TailJson,
}

/// Schedule files may also hold a single mask, read as a stationary schedule.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ScheduleFile {
    Schedule(ScheduleJson),
    Mask(MaskJson),
}

pub fn space_from_lambdas(lambdas: &[LambdaJson]) -> Result<ExponentialSpace> {
    ExponentialSpace::new(
        lambdas
            .iter()
            .map(|l| (Complex64::new(l.re, l.im), l.mult))
            .collect(),
    )
}

pub fn lambdas_of(space: &ExponentialSpace) -> Vec<LambdaJson> {
    space
        .spectrum()
        .iter()
        .map(|&(l, k)| LambdaJson {
            re: l.re,
            im: l.im,
            mult: k,
        })
        .collect()
}

impl ScheduleJson {
    pub fn from_schedule(schedule: &MaskSchedule) -> Self {
        let tail = match schedule.tail() {
            TailRule::RepeatLast => TailJson::RepeatLast,
            TailRule::Exponential {
                space,
                level_offset,
            } => TailJson::Exponential {
                lambdas: lambdas_of(space),
                level_offset: *level_offset,
            },
        };
        Self {
            head: schedule.head().iter().map(MaskJson::from_mask).collect(),
            tail,
        }
    }

    pub fn to_schedule(&self) -> Result<MaskSchedule> {
        let head = self
            .head
            .iter()
            .map(MaskJson::to_mask)
            .collect::<Result<Vec<_>>>()?;
        let tail = match &self.tail {
            TailJson::RepeatLast => TailRule::RepeatLast,
            TailJson::Exponential {
                lambdas,
                level_offset,
            } => TailRule::Exponential {
                space: space_from_lambdas(lambdas)?,
                level_offset: *level_offset,
            },
        };
        MaskSchedule::new(head, tail)
    }
}

pub fn parse_schedule(text: &str) -> Result<MaskSchedule> {
    match serde_json::from_str::<ScheduleFile>(text) {
        Ok(ScheduleFile::Schedule(s)) => s.to_schedule(),
        Ok(ScheduleFile::Mask(m)) => Ok(MaskSchedule::stationary(m.to_mask()?)),
        // re-parse as a schedule to get a useful diagnostic
        Err(_) => serde_json::from_str::<ScheduleJson>(text)?.to_schedule(),
    }
}

pub fn read_schedule<R: Read>(mut input: R) -> Result<MaskSchedule> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    parse_schedule(&text)
}

pub fn schedule_to_json(schedule: &MaskSchedule) -> Result<String> {
    to_json_string(&ScheduleJson::from_schedule(schedule))
}

pub fn write_samples_csv<W: Write>(samples: &SampledFunction, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["t", "re", "im"])?;
    for (t, v) in samples.points() {
        w.write_record([fmt_num(t), fmt_num(v.re), fmt_num(v.im)])?;
    }
    w.flush()?;
    Ok(())
}

/// Several sample sets in one table with a leading index column.
pub fn write_indexed_samples_csv<W: Write>(
    index_name: &str,
    samples: &[SampledFunction],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([index_name, "t", "re", "im"])?;
    for (k, s) in samples.iter().enumerate() {
        for (t, v) in s.points() {
            w.write_record([k.to_string(), fmt_num(t), fmt_num(v.re), fmt_num(v.im)])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[derive(Debug, Deserialize)]
struct SampleRow {
    t: f64,
    re: f64,
    im: f64,
}

/// Reads a `t,re,im` table written at dyadic level `level`.
pub fn read_samples_csv<R: Read>(level: u32, input: R) -> Result<SampledFunction> {
    let mut rdr = csv::Reader::from_reader(input);
    let rows = rdr
        .deserialize::<SampleRow>()
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let first = rows.first().ok_or(Error::EmptyWindow)?;
    let scale = 2f64.powi(level as i32);
    let lo = (first.t * scale).round() as i64;
    for (i, row) in rows.iter().enumerate() {
        if ((row.t * scale) - (lo + i as i64) as f64).abs() > 1e-9 {
            return Err(Error::Invalid(format!(
                "row {i}: t = {} is not on the level-{level} grid",
                row.t
            )));
        }
    }
    Ok(SampledFunction::new(
        level,
        lo,
        rows.iter().map(|r| Complex64::new(r.re, r.im)).collect(),
    ))
}

fn fmt_num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        "nan".into()
    }
}

fn complex(z: Complex64) -> Value {
    json!({"re": z.re, "im": z.im})
}

pub fn verdict_json(v: &DecayVerdict) -> Value {
    let mut out = match &v.kind {
        DecayKind::FinitelySupported { support } => json!({
            "kind": "finitely_supported",
            "support": support.iter().collect::<Vec<_>>(),
        }),
        DecayKind::ExponentialDecay { c, q } => json!({
            "kind": "exponential_decay", "c": c, "q": q,
        }),
        DecayKind::NoDecay => json!({"kind": "no_decay"}),
    };
    let obj = out.as_object_mut().expect("object literal");
    obj.insert("threshold".into(), json!(v.threshold));
    obj.insert("usable_points".into(), json!(v.usable_points));
    obj.insert("exp_fit_residual".into(), json!(v.exp_fit_residual));
    obj.insert("power_fit_residual".into(), json!(v.power_fit_residual));
    out
}

pub fn decay_report_json(seq: &DecaySequence, verdict: Option<&DecayVerdict>) -> Value {
    json!({
        "lambda": complex(seq.lambda),
        "order": seq.order,
        "entries": seq
            .iter()
            .map(|(l, v)| json!({"l": l, "re": v.re, "im": v.im}))
            .collect::<Vec<_>>(),
        "verdict": verdict.map(verdict_json),
        "truncation_error": seq.truncation_error,
    })
}

pub fn periodic_json(lambda: Complex64, order: usize, w: &PeriodicFunction) -> Value {
    json!({
        "lambda": complex(lambda),
        "order": order,
        "coeffs": w
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, v)| json!({"l": w.lo + i as i64, "re": v.re, "im": v.im}))
            .collect::<Vec<_>>(),
    })
}

pub fn hbasis_json(lambda: Complex64, basis: &HBasis, tol: f64) -> Value {
    json!({
        "lambda": complex(lambda),
        "order": basis.functions.len().saturating_sub(1),
        "consistency": basis.consistency,
        "tol": tol,
        "verdict": basis.consistency <= tol,
    })
}

pub fn zero_table_json(table: &ZeroConditionTable, tol: f64) -> Value {
    json!({
        "lambda": complex(table.lambda),
        "tol": tol,
        "rows": table.rows.iter().map(|r| json!({
            "level": r.level,
            "order": r.order,
            "zero_residual": r.zero_residual,
            "zero_condition": r.zero_condition,
            "normalization_value": r.normalization_value,
            "nondegenerate": r.nondegenerate,
        })).collect::<Vec<_>>(),
        "nondegenerate": table.all_nondegenerate(),
        "verdict": table.all_satisfied(),
    })
}

pub fn generation_json(report: &GenerationReport, space: &ExponentialSpace, tol: f64) -> Value {
    json!({
        "lambdas": lambdas_of(space),
        "levels": report.levels,
        "window": [report.window.lo, report.window.hi],
        "per_basis": report.per_basis,
        "residual": report.residual,
        "tol": tol,
        "verdict": report.verdict,
    })
}

pub fn audit_json(report: &AuditReport) -> Value {
    json!({
        "stationary": report.stationary,
        "max_degree": report.max_degree,
        "sup_bound": report.sup_bound,
        "entries": report.entries.iter().map(|e| {
            let outcome = match &e.outcome {
                AuditOutcome::Verdict(v) => verdict_json(v),
                AuditOutcome::Inconclusive(msg) => json!({"kind": "inconclusive", "reason": msg}),
            };
            json!({
                "lambda": complex(e.lambda),
                "outcome": outcome,
                "nonzero_count": e.nonzero_count,
            })
        }).collect::<Vec<_>>(),
        "polynomial_only": report.polynomial_only(),
        "within_degree": report.within_degree(),
    })
}

pub fn subspace_json(s: &Subspace) -> Value {
    json!({"ambient": s.ambient_dim(), "basis": s.vectors()})
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubspaceJson {
    pub ambient: usize,
    pub basis: Vec<Vec<f64>>,
}

pub fn parse_subspace(text: &str) -> Result<Subspace> {
    let s: SubspaceJson = serde_json::from_str(text)?;
    Subspace::from_vectors(s.ambient, &s.basis)
}

pub fn lagrange_json(b: &LagrangeBound) -> Value {
    json!({
        "lhs": b.lhs,
        "rhs": b.rhs,
        "gap": b.gap,
        "linear_gap": b.linear_gap,
        "literal_holds": b.literal_holds,
        "grid_slack": b.grid_slack,
        "verdict": b.holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_have_seventeen_digits() {
        let s = to_json_string(&json!({"x": 0.1, "y": f64::NAN, "n": 3})).unwrap();
        assert_eq!(s, "{\"n\":3,\"x\":1.0000000000000001e-1,\"y\":null}\n");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn mask_round_trip() {
        let m = Mask::bspline(3);
        let s = to_json_string(&MaskJson::from_mask(&m)).unwrap();
        let back: MaskJson = serde_json::from_str(&s).unwrap();
        assert_eq!(back.to_mask().unwrap(), m);
    }

    #[test]
    fn unit_normalization_is_rescaled() {
        let s = r#"{"lo": -1, "coeffs": [0.25, 0.5, 0.25], "normalization": "unit"}"#;
        let sched = parse_schedule(s).unwrap();
        assert_eq!(sched.mask(1).unwrap(), Mask::hat());
    }

    #[test]
    fn schedule_round_trip() {
        let space = ExponentialSpace::new(vec![(Complex64::new(1.0, 0.5), 1)]).unwrap();
        let sched = crate::generation::construct_schedule(&space, 2).unwrap();
        let text = schedule_to_json(&sched).unwrap();
        let back = parse_schedule(&text).unwrap();
        assert_eq!(back.tail(), sched.tail());
        for j in 1..=4 {
            let d = back.mask(j).unwrap().symbol() - sched.mask(j).unwrap().symbol();
            assert!(d.max_abs_coeff() < 1e-15);
        }
    }

    #[test]
    fn bad_schedules_are_rejected() {
        assert!(parse_schedule("{").is_err());
        assert!(parse_schedule(r#"{"head": [], "tail": {"kind": "repeat_last"}}"#).is_err());
        assert!(parse_schedule(r#"{"lo": 0, "coeffs": [1, 1, 1]}"#).is_err());
        assert!(parse_schedule(r#"{"head": [{"lo":0,"coeffs":[1,1]}], "tail": {"kind": "other"}}"#).is_err());
    }

    #[test]
    fn samples_csv_round_trip() {
        let f = SampledFunction::sample(2, -1.0, 1.0, |t| Complex64::new(t, -t));
        let mut buf = Vec::new();
        write_samples_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("t,re,im\n"));
        let back = read_samples_csv(2, buf.as_slice()).unwrap();
        assert_eq!(back, f);
    }
}
