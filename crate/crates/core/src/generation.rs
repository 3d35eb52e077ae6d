//! Exponential spaces, generalized zero conditions, construction of mask
//! schedules that generate a prescribed space, and numerical verification of
//! generation.

use std::f64::consts::PI;
use std::ops::RangeInclusive;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fourier::{
    classify_decay, combine_verdicts, decay_sequences, default_depth, lambda_frequency, DecayKind,
    DecayVerdict,
};
use crate::subdivision::{
    influence_interval, run, Interval, Mask, MaskSchedule, SampledFunction, TailRule,
};
use crate::symbol::LaurentPolynomial;

/// Minimal distance between spectrum points modulo `2πi`.
pub const SPECTRUM_SEPARATION: f64 = 1e-8;

/// `|e^{-λ}|` beyond this bound makes Fourier evaluation unreliable.
pub const OVERFLOW_GUARD: f64 = 1e6;

/// `U = span{t^a e^{λt} : (λ, k) in the spectrum, 0 ≤ a ≤ k}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExponentialSpace {
    spectrum: Vec<(Complex64, u32)>,
}

/// Distance of `z` from the lattice `2πi Z`.
fn distance_mod_2pi_i(z: Complex64) -> f64 {
    let m = (z.im / (2.0 * PI)).round();
    (z - Complex64::new(0.0, 2.0 * PI * m)).norm()
}

impl ExponentialSpace {
    pub fn new(spectrum: Vec<(Complex64, u32)>) -> Result<Self> {
        for (i, (a, _)) in spectrum.iter().enumerate() {
            for (b, _) in &spectrum[i + 1..] {
                if distance_mod_2pi_i(a - b) < SPECTRUM_SEPARATION {
                    return Err(Error::Invalid(format!(
                        "spectrum points {a} and {b} coincide modulo 2πi"
                    )));
                }
            }
        }
        Ok(Self { spectrum })
    }

    pub fn spectrum(&self) -> &[(Complex64, u32)] {
        &self.spectrum
    }

    /// `Σ (k(λ) + 1)`.
    pub fn dim(&self) -> usize {
        self.spectrum.iter().map(|(_, k)| *k as usize + 1).sum()
    }

    /// Pairs `(λ, a)` indexing the basis functions `t^a e^{λt}`.
    pub fn basis(&self) -> Vec<(Complex64, u32)> {
        self.spectrum
            .iter()
            .flat_map(|&(l, k)| (0..=k).map(move |a| (l, a)))
            .collect()
    }

    /// The space with one factor of spectrum entry `idx` removed.
    pub fn without_one_factor(&self, idx: usize) -> Result<Self> {
        if idx >= self.spectrum.len() {
            return Err(Error::Invalid(format!("no spectrum entry {idx}")));
        }
        let mut spectrum = self.spectrum.clone();
        if spectrum[idx].1 == 0 {
            spectrum.remove(idx);
        } else {
            spectrum[idx].1 -= 1;
        }
        Ok(Self { spectrum })
    }
}

/// `t^a e^{λt}`.
pub fn basis_function(lambda: Complex64, a: u32, t: f64) -> Complex64 {
    (lambda * t).exp() * t.powi(a as i32)
}

/// Mask `c Π_λ (z + e^{-λ 2^{-level}})^{k(λ)+1}` normalized to `a(1) = 2`.
pub fn exponential_mask(space: &ExponentialSpace, level: i64) -> Result<Mask> {
    let h = 2f64.powi(-(level as i32));
    let mut poly = LaurentPolynomial::constant(Complex64::new(1.0, 0.0));
    let mut at_one = Complex64::new(1.0, 0.0);
    for &(lambda, k) in space.spectrum() {
        let w = (-lambda * h).exp();
        poly = &poly * &LaurentPolynomial::linear_factor(w).pow(k + 1);
        at_one *= (1.0 + w).powi(k as i32 + 1);
    }
    if at_one.norm() < 1e-12 {
        return Err(Error::DegenerateLambda(format!(
            "{:?} at level {level}",
            space.spectrum()
        )));
    }
    Mask::new(poly.scale(2.0 / at_one))
}

/// Schedule whose level-`j` mask carries the zeros `-e^{-λ 2^{-j}}` of order
/// `k(λ) + 1`; `head_len` levels are stored explicitly.
pub fn construct_schedule(space: &ExponentialSpace, head_len: usize) -> Result<MaskSchedule> {
    construct_schedule_with_offset(space, head_len, 0)
}

/// As [`construct_schedule`], with zeros at `-e^{-λ 2^{-(j + level_offset)}}`.
pub fn construct_schedule_with_offset(
    space: &ExponentialSpace,
    head_len: usize,
    level_offset: i32,
) -> Result<MaskSchedule> {
    if space.dim() == 0 {
        return Err(Error::Precondition("exponential space must be non-trivial".into()));
    }
    if head_len == 0 {
        return Err(Error::Invalid("head length must be at least 1".into()));
    }
    let head = (1..=head_len as i64)
        .map(|j| exponential_mask(space, j + level_offset as i64))
        .collect::<Result<Vec<_>>>()?;
    MaskSchedule::new(
        head,
        TailRule::Exponential {
            space: space.clone(),
            level_offset,
        },
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroConditionRow {
    pub level: usize,
    pub order: u32,
    /// `|D^k a^{[j]}(-w)| / ‖a^{[j]}‖₁`
    pub zero_residual: f64,
    pub zero_condition: bool,
    /// `|D^k a^{[j]}(w)| / ‖a^{[j]}‖₁`
    pub normalization_value: f64,
    pub nondegenerate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ZeroConditionTable {
    pub lambda: Complex64,
    pub rows: Vec<ZeroConditionRow>,
}

impl ZeroConditionTable {
    pub fn all_satisfied(&self) -> bool {
        self.rows.iter().all(|r| r.zero_condition)
    }

    pub fn all_nondegenerate(&self) -> bool {
        self.rows.iter().all(|r| r.nondegenerate)
    }

    pub fn row(&self, level: usize, order: u32) -> Option<&ZeroConditionRow> {
        self.rows.iter().find(|r| r.level == level && r.order == order)
    }
}

/// Evaluates `D^k a^{[j]}(-e^{-λ 2^{-(j+offset)}})` for every level and
/// `k ≤ d`, together with the non-degeneracy values at `+e^{-λ 2^{-(j+offset)}}`.
pub fn check_zero_conditions(
    schedule: &MaskSchedule,
    lambda: Complex64,
    d: u32,
    levels: RangeInclusive<usize>,
    tol: f64,
    level_offset: i32,
) -> Result<ZeroConditionTable> {
    if *levels.start() == 0 {
        return Err(Error::Invalid("levels start at 1".into()));
    }
    let mut rows = Vec::new();
    for j in levels {
        let a = schedule.mask(j)?;
        let sym = a.symbol();
        let norm = sym.l1_norm();
        let w = (-lambda * 2f64.powi(-(j as i32 + level_offset))).exp();
        for k in 0..=d {
            let dk = sym.derivative_z(k);
            let zero_residual = dk.eval_z(-w)?.norm() / norm;
            let normalization_value = dk.eval_z(w)?.norm() / norm;
            rows.push(ZeroConditionRow {
                level: j,
                order: k,
                zero_residual,
                zero_condition: zero_residual <= tol,
                normalization_value,
                nondegenerate: normalization_value > tol,
            });
        }
    }
    Ok(ZeroConditionTable { lambda, rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationReport {
    /// Largest relative misfit over all basis starts.
    pub residual: f64,
    /// Misfit for each basis function, in [`ExponentialSpace::basis`] order.
    pub per_basis: Vec<f64>,
    pub window: Interval,
    pub levels: u32,
    pub verdict: bool,
}

/// Least-squares misfit `‖y - B x‖ / ‖y‖` with unit-sup columns.
fn relative_misfit(basis: &DMatrix<Complex64>, y: &DVector<Complex64>) -> Result<f64> {
    let ynorm = y.norm();
    if ynorm == 0.0 {
        return Ok(0.0);
    }
    let svd = basis.clone().svd(true, true);
    let x = svd
        .solve(y, 1e-13)
        .map_err(|e| Error::RankDeficient(e.to_string()))?;
    Ok((y - basis * x).norm() / ynorm)
}

/// Starts the scheme from integer samples of each basis function of `space`,
/// runs `r` levels and fits the result on `fit_window` against the basis.
///
/// The integer window is wide enough that every fit point is unaffected by
/// the zero extension of the starting data.
pub fn verify_generation(
    schedule: &MaskSchedule,
    space: &ExponentialSpace,
    r: u32,
    fit_window: Interval,
    tol: f64,
) -> Result<GenerationReport> {
    if space.dim() == 0 {
        return Err(Error::Precondition("exponential space must be non-trivial".into()));
    }
    if fit_window.hi <= fit_window.lo {
        return Err(Error::Invalid("fit window must have positive length".into()));
    }
    let reach = influence_interval(schedule, r)?;
    let n0 = (fit_window.lo - reach.hi).floor() as i64 - 1;
    let n1 = (fit_window.hi - reach.lo).ceil() as i64 + 1;

    let basis = space.basis();
    let grid = SampledFunction::sample(r, fit_window.lo, fit_window.hi, |_| Complex64::new(0.0, 0.0));
    let ts: Vec<f64> = (0..grid.len()).map(|i| grid.t(i)).collect();
    if ts.len() < basis.len() {
        return Err(Error::RankDeficient(format!(
            "{} fit points for {} basis functions",
            ts.len(),
            basis.len()
        )));
    }
    let mut design = DMatrix::from_fn(ts.len(), basis.len(), |i, j| {
        basis_function(basis[j].0, basis[j].1, ts[i])
    });
    for mut col in design.column_iter_mut() {
        let m = col.iter().map(|v| v.norm()).fold(0.0, f64::max);
        if m > 0.0 {
            col /= Complex64::new(m, 0.0);
        }
    }
    let sv = design.clone().svd(false, false).singular_values;
    let top = sv.iter().cloned().fold(0.0, f64::max);
    let bottom = sv.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(bottom > 1e-12 * top) {
        return Err(Error::RankDeficient(format!(
            "basis conditioning {bottom:e} / {top:e} on the fit window"
        )));
    }

    let mut per_basis = Vec::with_capacity(basis.len());
    for &(lambda, a) in &basis {
        let c1 = SampledFunction::new(
            0,
            n0,
            (n0..=n1).map(|l| basis_function(lambda, a, l as f64)).collect(),
        );
        let out = run(schedule, &c1, r)?;
        let y = DVector::from_iterator(
            ts.len(),
            (0..ts.len()).map(|i| out.at(grid.lo + i as i64)),
        );
        per_basis.push(relative_misfit(&design, &y)?);
    }
    let residual = per_basis.iter().cloned().fold(0.0, f64::max);
    Ok(GenerationReport {
        residual,
        per_basis,
        window: fit_window,
        levels: r,
        verdict: residual <= tol,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum AuditOutcome {
    Verdict(DecayVerdict),
    Inconclusive(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditEntry {
    pub lambda: Complex64,
    pub outcome: AuditOutcome,
    /// Non-zero entries summed over all orders, when every order is finite.
    pub nonzero_count: Option<usize>,
}

impl AuditEntry {
    pub fn finite_support(&self) -> Option<&std::collections::BTreeSet<i64>> {
        match &self.outcome {
            AuditOutcome::Verdict(DecayVerdict {
                kind: DecayKind::FinitelySupported { support },
                ..
            }) => Some(support),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub stationary: bool,
    /// Largest mask degree `N` over the audited levels.
    pub max_degree: usize,
    /// Upper bound on `‖a_j‖∞` over the audited levels.
    pub sup_bound: f64,
    pub entries: Vec<AuditEntry>,
}

impl AuditReport {
    /// Every finitely supported family has a single-point support (only
    /// meaningful for stationary schedules).
    pub fn polynomial_only(&self) -> bool {
        self.entries
            .iter()
            .filter_map(|e| e.finite_support())
            .all(|s| s.len() <= 1)
    }

    /// Every finitely supported family has at most `N` non-zero entries.
    pub fn within_degree(&self) -> bool {
        self.entries
            .iter()
            .filter_map(|e| e.nonzero_count)
            .all(|n| n <= self.max_degree)
    }

    pub fn inconclusive(&self) -> Vec<Complex64> {
        self.entries
            .iter()
            .filter(|e| matches!(e.outcome, AuditOutcome::Inconclusive(_)))
            .map(|e| e.lambda)
            .collect()
    }

    /// λ values whose decay family has non-empty finite support.
    pub fn supported_lambdas(&self) -> Vec<Complex64> {
        self.entries
            .iter()
            .filter(|e| e.finite_support().is_some_and(|s| !s.is_empty()))
            .map(|e| e.lambda)
            .collect()
    }
}

/// Classifies the decay families of orders `0..=d` for every candidate `λ`.
pub fn analytic_limit_audit(
    schedule: &MaskSchedule,
    lambdas: &[Complex64],
    d: usize,
    range: i64,
    depth: Option<usize>,
) -> Result<AuditReport> {
    let alpha_max = lambdas
        .iter()
        .map(|&l| lambda_frequency(l).norm())
        .fold(0.0, f64::max);
    let depth = depth.unwrap_or_else(|| default_depth(alpha_max + range as f64));
    let masks = schedule.masks(depth)?;
    let max_degree = masks.iter().map(|m| m.symbol().span()).max().unwrap_or(0);
    let sup_bound = masks
        .iter()
        .map(|m| m.fourier_view().l1_norm())
        .fold(0.0, f64::max);

    let mut entries = Vec::with_capacity(lambdas.len());
    for &lambda in lambdas {
        if lambda.re.abs() > OVERFLOW_GUARD.ln() {
            entries.push(AuditEntry {
                lambda,
                outcome: AuditOutcome::Inconclusive(format!(
                    "|exp(-lambda)| outside [1e-6, 1e6] for lambda = {lambda}"
                )),
                nonzero_count: None,
            });
            continue;
        }
        let seqs = decay_sequences(schedule, lambda, d, range, Some(depth))?;
        let verdicts: Result<Vec<DecayVerdict>> = seqs.iter().map(classify_decay).collect();
        let entry = match verdicts {
            Ok(vs) => {
                let nonzero_count = vs
                    .iter()
                    .map(|v| match &v.kind {
                        DecayKind::FinitelySupported { support } => Some(support.len()),
                        _ => None,
                    })
                    .sum::<Option<usize>>();
                AuditEntry {
                    lambda,
                    outcome: AuditOutcome::Verdict(combine_verdicts(&vs)?),
                    nonzero_count,
                }
            }
            Err(Error::Inconclusive(msg)) => AuditEntry {
                lambda,
                outcome: AuditOutcome::Inconclusive(msg),
                nonzero_count: None,
            },
            Err(e) => return Err(e),
        };
        entries.push(entry);
    }
    Ok(AuditReport {
        stationary: schedule.is_stationary(),
        max_degree,
        sup_bound,
        entries,
    })
}
