//! Fourier-side analysis of refinable functions.
//!
//! `φ̂(y) = Π_{j≥1} a_j(2^{-j} y)` is evaluated by truncating the product at a
//! finite depth. Derivatives are assembled factor by factor with the Leibniz
//! rule. The truncation error is bounded from coefficient moments of the
//! masks beyond the cut, and through a Cauchy estimate on a disc of radius
//! [`CAUCHY_RADIUS`] for derivatives.
//!
//! The sequences `φ̂^{(k)}(α + ℓ)`, `α = -iλ/2π`, decide whether
//! `e^{λt}`-type analytic functions live in the shift-invariant space; the
//! periodic factors `ω_k` are their Fourier series.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::subdivision::{
    refined_limit, support_bound, Interval, MaskSchedule, SampledFunction, TailRule,
    DEFAULT_REFINE_LEVELS,
};
use crate::symbol::LaurentPolynomial;

/// Radius of the disc used to bound derivative truncation errors.
pub const CAUCHY_RADIUS: f64 = 0.5;

/// Entries below this fraction of the largest entry count as zero (unless the
/// truncation bound is larger).
pub const REL_ZERO_TOL: f64 = 1e-9;

/// `q < 1 - DECAY_DELTA` is required for an exponential-decay verdict.
pub const DECAY_DELTA: f64 = 0.02;

pub const FIT_MIN_POINTS: usize = 8;

/// Maximum RMS misfit of the log-linear fit.
pub const FIT_MAX_RESIDUAL: f64 = 0.5;

/// A finite support must stay this many indices away from `±L`.
pub const EDGE_MARGIN: i64 = 3;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `48 + ⌈log2(1 + |y|)⌉`.
pub fn default_depth(y_abs: f64) -> usize {
    48 + (1.0 + y_abs).log2().ceil() as usize
}

/// `α = -iλ/(2π)`, the frequency at which `e^{λt}` is tested.
pub fn lambda_frequency(lambda: Complex64) -> Complex64 {
    -I * lambda / (2.0 * PI)
}

/// Derivatives `[φ̂(y), ..., φ̂^{(d)}(y)]` of the truncated product.
#[derive(Debug, Clone, PartialEq)]
pub struct PhiHatDerivs {
    pub values: Vec<Complex64>,
    /// Truncation bound for each order.
    pub errors: Vec<f64>,
}

impl PhiHatDerivs {
    pub fn error_bound(&self) -> f64 {
        self.errors.iter().cloned().fold(0.0, f64::max)
    }
}

/// Upper bounds on `Σ_m |b_m| |m|` and `max |m|` over all Fourier-view masks
/// at levels strictly beyond `depth`.
fn tail_moments(schedule: &MaskSchedule, depth: usize) -> (f64, f64) {
    let moments = |p: &LaurentPolynomial| {
        let m1: f64 = p.terms().map(|(m, c)| c.norm() * m.abs() as f64).sum();
        let mmax = p.lo().abs().max(p.hi().abs()) as f64;
        (m1 * 0.5, mmax)
    };
    let head = schedule.head();
    let (mut big_m, mut m_max) = (0.0f64, 0.0f64);
    for mask in head.iter().skip(depth) {
        let (a, b) = moments(mask.symbol());
        big_m = big_m.max(a);
        m_max = m_max.max(b);
    }
    match schedule.tail() {
        TailRule::RepeatLast => {
            let (a, b) = moments(head.last().unwrap().symbol());
            big_m = big_m.max(a);
            m_max = m_max.max(b);
        }
        TailRule::Exponential {
            space,
            level_offset,
        } => {
            // |w| ≤ e^x and |1 + w| ≥ 2 - (e^x - 1) for w = exp(-λ 2^{-j}), j ≥ j_min.
            let j_min = depth.max(head.len()) as i32 + 1 + level_offset;
            let n = space.dim() as f64;
            let mut abs_sum = 1.0f64;
            for &(lambda, mult) in space.spectrum() {
                let x = lambda.norm() * 2f64.powi(-j_min);
                let v = x.exp() - 1.0;
                if v >= 2.0 {
                    return (f64::INFINITY, n);
                }
                abs_sum *= ((2.0 + v) / (2.0 - v)).powi(mult as i32 + 1);
            }
            big_m = big_m.max(n * abs_sum);
            m_max = m_max.max(n);
        }
    }
    (big_m, m_max)
}

/// Truncated product `Π_{j ≤ depth} a_j(2^{-j} y)` with derivatives up to `d`.
#[derive(Debug, Clone)]
pub struct ProductEvaluator {
    /// `levels[j-1][n]` is the n-th y-derivative of the Fourier-view level-j mask.
    levels: Vec<Vec<LaurentPolynomial>>,
    tail_m: f64,
    tail_m_max: f64,
    d: usize,
}

impl ProductEvaluator {
    pub fn new(schedule: &MaskSchedule, d: usize, depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::Invalid("product depth must be at least 1".into()));
        }
        let masks = schedule.masks(depth)?;
        let mut levels = Vec::with_capacity(depth);
        for (j, mask) in masks.iter().enumerate() {
            let unit = mask.fourier_view();
            let at_zero = unit.coeff_sum();
            if (at_zero - Complex64::new(1.0, 0.0)).norm() > 1e-10 {
                return Err(Error::Normalization(format!(
                    "level {} symbol has a(0) = {at_zero}, expected 1",
                    j + 1
                )));
            }
            levels.push((0..=d as u32).map(|n| unit.derivative_trig(n)).collect());
        }
        let (tail_m, tail_m_max) = tail_moments(schedule, depth);
        Ok(Self {
            levels,
            tail_m,
            tail_m_max,
            d,
        })
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn eval(&self, y: Complex64) -> PhiHatDerivs {
        let d = self.d;
        let mut vals = vec![Complex64::new(0.0, 0.0); d + 1];
        vals[0] = Complex64::new(1.0, 0.0);
        let mut factor = vec![Complex64::new(0.0, 0.0); d + 1];
        let mut scale = 1.0;
        for derivs in &self.levels {
            scale *= 0.5;
            let w = y * scale;
            let mut s = 1.0;
            for (n, p) in derivs.iter().enumerate() {
                factor[n] = p.eval_trig(w) * s;
                s *= scale;
            }
            vals = leibniz(&vals, &factor);
        }
        let errors = (0..=d).map(|k| self.error_bound(y, k, vals[0])).collect();
        PhiHatDerivs { values: vals, errors }
    }

    /// `e^{T} - 1` bounds `|Π_{j>D} a_j(2^{-j}w) - 1|` for `|w| ≤ radius`.
    fn tail_factor(&self, radius: f64) -> f64 {
        let depth = self.depth() as i32;
        let t = 2.0 * PI * radius * 2f64.powi(-depth) * self.tail_m
            * (2.0 * PI * self.tail_m_max * radius * 2f64.powi(-depth - 1)).exp();
        t.exp_m1()
    }

    /// Bound on `|Π_{j≤D} a_j(2^{-j}w)|` for `|Im w| ≤ im_abs`.
    fn product_bound(&self, im_abs: f64) -> f64 {
        let mut scale = 1.0;
        let mut bound = 1.0;
        for derivs in &self.levels {
            scale *= 0.5;
            let s: f64 = derivs[0]
                .terms()
                .map(|(m, c)| c.norm() * (2.0 * PI * m.abs() as f64 * im_abs * scale).exp())
                .sum();
            bound *= s;
        }
        bound
    }

    fn error_bound(&self, y: Complex64, order: usize, p0: Complex64) -> f64 {
        let eps = 8.0 * self.depth() as f64 * f64::EPSILON;
        if order == 0 {
            return p0.norm() * (self.tail_factor(y.norm()) + eps);
        }
        let rho = CAUCHY_RADIUS;
        let cauchy = factorial(order) / rho.powi(order as i32);
        let pb = self.product_bound(y.im.abs() + rho);
        cauchy * pb * (self.tail_factor(y.norm() + rho) + eps)
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Derivatives of a product from the derivatives of its two factors.
fn leibniz(p: &[Complex64], f: &[Complex64]) -> Vec<Complex64> {
    (0..p.len())
        .map(|n| {
            (0..=n)
                .map(|i| p[i] * f[n - i] * binomial(n, i))
                .sum()
        })
        .collect()
}

/// `[φ̂(y), ..., φ̂^{(d)}(y)]` with truncation bounds.
///
/// `depth = None` selects [`default_depth`].
pub fn phi_hat_derivs(
    schedule: &MaskSchedule,
    y: Complex64,
    d: usize,
    depth: Option<usize>,
) -> Result<PhiHatDerivs> {
    let depth = depth.unwrap_or_else(|| default_depth(y.norm()));
    Ok(ProductEvaluator::new(schedule, d, depth)?.eval(y))
}

/// `φ̂^{(k)}(α + ℓ)` for `ℓ ∈ [-L, L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySequence {
    pub lambda: Complex64,
    pub order: usize,
    pub range: i64,
    /// `entries[i]` belongs to `ℓ = i - range`.
    pub entries: Vec<Complex64>,
    pub truncation_error: f64,
}

impl DecaySequence {
    /// Builds a sequence from explicit entries, mostly for testing classifiers.
    pub fn from_entries(
        lambda: Complex64,
        order: usize,
        entries: Vec<Complex64>,
        truncation_error: f64,
    ) -> Result<Self> {
        if entries.len() % 2 == 0 {
            return Err(Error::Invalid("entries must be indexed by -L..=L".into()));
        }
        let range = (entries.len() / 2) as i64;
        Ok(Self {
            lambda,
            order,
            range,
            entries,
            truncation_error,
        })
    }

    pub fn entry(&self, l: i64) -> Complex64 {
        self.entries[(l + self.range) as usize]
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.entries
            .iter()
            .enumerate()
            .map(move |(i, &v)| (i as i64 - self.range, v))
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// `max(truncation_error, REL_ZERO_TOL · max|entry|)`.
    pub fn zero_threshold(&self) -> f64 {
        self.truncation_error.max(REL_ZERO_TOL * self.max_abs())
    }
}

/// Sequences of orders `0..=d`, sharing one product evaluation per point.
pub fn decay_sequences(
    schedule: &MaskSchedule,
    lambda: Complex64,
    d: usize,
    range: i64,
    depth: Option<usize>,
) -> Result<Vec<DecaySequence>> {
    if range < 4 {
        return Err(Error::Precondition(format!("range L = {range} must be at least 4")));
    }
    let alpha = lambda_frequency(lambda);
    let depth = depth.unwrap_or_else(|| default_depth(alpha.norm() + range as f64));
    let eval = ProductEvaluator::new(schedule, d, depth)?;
    let points: Vec<PhiHatDerivs> = (-range..=range)
        .map(|l| eval.eval(alpha + l as f64))
        .collect();
    Ok((0..=d)
        .map(|k| DecaySequence {
            lambda,
            order: k,
            range,
            entries: points.iter().map(|p| p.values[k]).collect(),
            truncation_error: points.iter().map(|p| p.errors[k]).fold(0.0, f64::max),
        })
        .collect())
}

pub fn decay_sequence(
    schedule: &MaskSchedule,
    lambda: Complex64,
    order: usize,
    range: i64,
    depth: Option<usize>,
) -> Result<DecaySequence> {
    let mut all = decay_sequences(schedule, lambda, order, range, depth)?;
    Ok(all.pop().unwrap())
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecayKind {
    FinitelySupported { support: BTreeSet<i64> },
    ExponentialDecay { c: f64, q: f64 },
    NoDecay,
}

impl DecayKind {
    /// True for the two verdicts that certify analytic elements.
    pub fn decays(&self) -> bool {
        !matches!(self, DecayKind::NoDecay)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayVerdict {
    pub kind: DecayKind,
    pub threshold: f64,
    /// Entries with `|ℓ| ≥ 2` above the threshold.
    pub usable_points: usize,
    /// RMS misfit of `log|e_ℓ|` against `|ℓ|`.
    pub exp_fit_residual: Option<f64>,
    /// RMS misfit of `log|e_ℓ|` against `log|ℓ|`.
    pub power_fit_residual: Option<f64>,
}

/// Least-squares line through `(x, y)`; returns slope, intercept, RMS residual.
fn fit_line(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

/// Classifies one sequence as finitely supported, exponentially decaying, or
/// neither.
///
/// Entries at or below [`DecaySequence::zero_threshold`] count as zero. With
/// fewer than [`FIT_MIN_POINTS`] non-zero entries at `|ℓ| ≥ 2` the sequence
/// is finitely supported, provided its support stays [`EDGE_MARGIN`] away
/// from `±L`; otherwise the range is too short and the result is
/// [`Error::Inconclusive`]. With enough points, `log|e_ℓ|` is fitted against
/// `|ℓ|`; exponential decay additionally requires the fit to beat a power law.
pub fn classify_decay(seq: &DecaySequence) -> Result<DecayVerdict> {
    let threshold = seq.zero_threshold();
    let support: BTreeSet<i64> = seq
        .iter()
        .filter(|(_, v)| v.norm() > threshold)
        .map(|(l, _)| l)
        .collect();
    let verdict = |kind, usable, e, p| DecayVerdict {
        kind,
        threshold,
        usable_points: usable,
        exp_fit_residual: e,
        power_fit_residual: p,
    };
    if support.is_empty() {
        return Ok(verdict(DecayKind::FinitelySupported { support }, 0, None, None));
    }
    let reach = support.iter().map(|l| l.abs()).max().unwrap();
    let finite_ok = reach + EDGE_MARGIN <= seq.range;
    let usable: Vec<(f64, f64)> = seq
        .iter()
        .filter(|(l, v)| l.abs() >= 2 && v.norm() > threshold)
        .map(|(l, v)| (l.abs() as f64, v.norm().ln()))
        .collect();
    if usable.len() < FIT_MIN_POINTS {
        if finite_ok {
            return Ok(verdict(
                DecayKind::FinitelySupported { support },
                usable.len(),
                None,
                None,
            ));
        }
        return Err(Error::Inconclusive(format!(
            "only {} usable entries and support reaches |l| = {reach} of L = {}",
            usable.len(),
            seq.range
        )));
    }
    let xs: Vec<f64> = usable.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = usable.iter().map(|p| p.1).collect();
    let logs: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let (slope, intercept, exp_res) = fit_line(&xs, &ys);
    let (_, _, pow_res) = fit_line(&logs, &ys);
    let n = usable.len();
    let exp_ok = slope < (1.0 - DECAY_DELTA).ln() && exp_res <= FIT_MAX_RESIDUAL && exp_res <= pow_res;
    let kind = if exp_ok {
        DecayKind::ExponentialDecay {
            c: intercept.exp(),
            q: slope.exp(),
        }
    } else if finite_ok {
        DecayKind::FinitelySupported { support }
    } else {
        DecayKind::NoDecay
    };
    Ok(verdict(kind, n, Some(exp_res), Some(pow_res)))
}

/// Joint verdict for the sequences of several orders.
///
/// Finite supports are united; any non-decaying order makes the whole
/// family non-decaying; otherwise the slowest exponential rate wins.
pub fn classify_decay_all(seqs: &[DecaySequence]) -> Result<DecayVerdict> {
    let verdicts: Vec<DecayVerdict> = seqs.iter().map(classify_decay).collect::<Result<_>>()?;
    combine_verdicts(&verdicts)
}

pub fn combine_verdicts(verdicts: &[DecayVerdict]) -> Result<DecayVerdict> {
    let Some(first) = verdicts.first() else {
        return Err(Error::Invalid("no sequences to classify".into()));
    };
    let mut out = first.clone();
    for v in &verdicts[1..] {
        out.threshold = out.threshold.max(v.threshold);
        out.usable_points += v.usable_points;
        out.exp_fit_residual = max_opt(out.exp_fit_residual, v.exp_fit_residual);
        out.power_fit_residual = max_opt(out.power_fit_residual, v.power_fit_residual);
        out.kind = match (&out.kind, &v.kind) {
            (DecayKind::NoDecay, _) | (_, DecayKind::NoDecay) => DecayKind::NoDecay,
            (
                DecayKind::FinitelySupported { support: a },
                DecayKind::FinitelySupported { support: b },
            ) => DecayKind::FinitelySupported {
                support: a.union(b).cloned().collect(),
            },
            (
                DecayKind::ExponentialDecay { c: c1, q: q1 },
                DecayKind::ExponentialDecay { c: c2, q: q2 },
            ) => DecayKind::ExponentialDecay {
                c: c1.max(*c2),
                q: q1.max(*q2),
            },
            (DecayKind::ExponentialDecay { c, q }, _) | (_, DecayKind::ExponentialDecay { c, q }) => {
                DecayKind::ExponentialDecay { c: *c, q: *q }
            }
        };
    }
    Ok(out)
}

fn max_opt(a: Option<f64>, b: Option<f64>) -> Option<f64> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x.max(y)),
        (x, None) => x,
        (None, y) => y,
    }
}

/// `ω(t) = Σ_ℓ c_ℓ e^{2πiℓt}` with finitely many coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicFunction {
    pub lo: i64,
    pub coeffs: Vec<Complex64>,
}

impl PeriodicFunction {
    pub fn eval(&self, t: f64) -> Complex64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * (2.0 * PI * I * ((self.lo + i as i64) as f64 * t)).exp())
            .sum()
    }

    pub fn coeff(&self, l: i64) -> Complex64 {
        let idx = l - self.lo;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }
}

/// Periodic factors `ω_0, ..., ω_d` for `λ`.
///
/// `ω_k` has Fourier coefficients `(-1/(2πi))^k φ̂^{(k)}(α + ℓ)`, so that
/// `ω_k(t) = Σ_ℓ (t-ℓ)^k ψ(t-ℓ)` with `ψ = e^{-λ·} φ`. Every order must be
/// classified as decaying.
pub fn omegas(
    schedule: &MaskSchedule,
    lambda: Complex64,
    d: usize,
    range: i64,
    depth: Option<usize>,
) -> Result<Vec<PeriodicFunction>> {
    let seqs = decay_sequences(schedule, lambda, d, range, depth)?;
    for s in &seqs {
        if !classify_decay(s)?.kind.decays() {
            return Err(Error::Precondition(format!(
                "sequence of order {} does not decay for lambda = {lambda}",
                s.order
            )));
        }
    }
    let base = -1.0 / (2.0 * PI * I);
    Ok(seqs
        .into_iter()
        .map(|s| {
            let f = base.powi(s.order as i32);
            PeriodicFunction {
                lo: -s.range,
                coeffs: s.entries.iter().map(|&v| v * f).collect(),
            }
        })
        .collect())
}

pub fn omega(
    schedule: &MaskSchedule,
    lambda: Complex64,
    k: usize,
    range: i64,
    depth: Option<usize>,
) -> Result<PeriodicFunction> {
    Ok(omegas(schedule, lambda, k, range, depth)?.pop().unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HBasisOptions {
    /// Fourier range `L` for the periodic factors.
    pub range: i64,
    pub depth: Option<usize>,
    /// Extra cascade levels used to evaluate `φ` at dyadic points.
    pub refine: u32,
    /// Maximum allowed `max |(a) - (b)|`.
    pub tol: f64,
}

impl Default for HBasisOptions {
    fn default() -> Self {
        Self {
            range: 32,
            depth: None,
            refine: DEFAULT_REFINE_LEVELS,
            tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HBasis {
    /// Time-domain evaluations `Σ_ℓ e^{λℓ} ℓ^k φ(t-ℓ)`, `k = 0..=d`.
    pub functions: Vec<SampledFunction>,
    /// The same functions via `e^{λt} Σ_j C(k,j) t^{k-j} (-1)^j ω_j(t)`.
    pub fourier: Vec<SampledFunction>,
    /// `max |time - fourier|` over all `k` and grid points.
    pub consistency: f64,
}

/// Basis of `H_λ` on `window`, computed in the time domain and checked
/// against the Poisson-summation representation.
pub fn h_lambda_basis(
    schedule: &MaskSchedule,
    lambda: Complex64,
    d: usize,
    window: Interval,
    r: u32,
    opts: HBasisOptions,
) -> Result<HBasis> {
    if window.hi < window.lo {
        return Err(Error::Invalid("empty window".into()));
    }
    let phi = refined_limit(schedule, &SampledFunction::delta(), r, opts.refine)?;
    let supp = support_bound(schedule)?;
    let omegas = omegas(schedule, lambda, d, opts.range, opts.depth)?;
    let step = 1i64 << r;

    let mut functions = Vec::with_capacity(d + 1);
    let mut fourier = Vec::with_capacity(d + 1);
    let mut consistency = 0.0f64;
    for k in 0..=d {
        let time = SampledFunction::sample(r, window.lo, window.hi, |t| {
            let lmin = (t - supp.hi).ceil() as i64 - 1;
            let lmax = (t - supp.lo).floor() as i64 + 1;
            let kt = (t * step as f64).round() as i64;
            (lmin..=lmax)
                .map(|l| {
                    let w = (lambda * l as f64).exp() * (l as f64).powi(k as i32);
                    w * phi.at(kt - l * step)
                })
                .sum()
        });
        let freq = SampledFunction::sample(r, window.lo, window.hi, |t| {
            let s: Complex64 = (0..=k)
                .map(|j| {
                    let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                    omegas[j].eval(t) * (binomial(k, j) * t.powi((k - j) as i32) * sign)
                })
                .sum();
            (lambda * t).exp() * s
        });
        for (a, b) in time.values.iter().zip(&freq.values) {
            consistency = consistency.max((a - b).norm());
        }
        functions.push(time);
        fourier.push(freq);
    }
    if !(consistency <= opts.tol) {
        return Err(Error::PoissonConsistency {
            deviation: consistency,
            tol: opts.tol,
        });
    }
    Ok(HBasis {
        functions,
        fourier,
        consistency,
    })
}
