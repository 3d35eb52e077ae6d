//! Level-dependent subdivision `c_{j+1} = S_{a_j} c_j`, cascade evaluation of
//! the basic limit function and support bookkeeping.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::generation::{exponential_mask, ExponentialSpace};
use crate::symbol::{LaurentPolynomial, NormalizationConvention, Symbol};

/// Tolerance on `Σ a_k = 2`.
pub const MASK_SUM_TOL: f64 = 1e-10;

/// Extra levels used by [`refined_limit`] to approximate limit values at a
/// dyadic point.
pub const DEFAULT_REFINE_LEVELS: u32 = 40;

/// A subdivision mask stored in the sum-2 convention.
///
/// Masks with complex coefficients are accepted: they arise from spectra
/// that are not closed under conjugation. Use [`Mask::is_real`] to test.
#[derive(Debug, Clone, PartialEq)]
pub struct Mask {
    symbol: LaurentPolynomial,
}

impl Mask {
    pub fn new(symbol: LaurentPolynomial) -> Result<Self> {
        let sum = symbol.coeff_sum();
        if (sum - Complex64::new(2.0, 0.0)).norm() > MASK_SUM_TOL {
            return Err(Error::Normalization(format!(
                "mask coefficients sum to {sum}, expected 2"
            )));
        }
        Ok(Self { symbol })
    }

    pub fn from_real(coeffs: &[f64], lo: i64) -> Result<Self> {
        Self::new(LaurentPolynomial::from_real(coeffs, lo))
    }

    pub fn from_symbol(symbol: &Symbol) -> Result<Self> {
        Self::new(symbol.in_view(NormalizationConvention::SubdivisionSum2))
    }

    /// `(z^{-1} + 2 + z)/2`, the linear B-spline mask.
    pub fn hat() -> Self {
        Self::from_real(&[0.5, 1.0, 0.5], -1).expect("hat mask is normalized")
    }

    /// `(1+z)^order / 2^{order-1}`, the B-spline mask of the given order.
    pub fn bspline(order: u32) -> Self {
        let one_plus_z = LaurentPolynomial::from_real(&[1.0, 1.0], 0);
        let scale = 2.0f64.powi(1 - order as i32);
        Self::new(one_plus_z.pow(order).scale(Complex64::new(scale, 0.0)))
            .expect("B-spline mask is normalized")
    }

    pub fn symbol(&self) -> &LaurentPolynomial {
        &self.symbol
    }

    /// Trigonometric polynomial with `a(0) = 1`.
    pub fn fourier_view(&self) -> LaurentPolynomial {
        self.symbol.scale(Complex64::new(0.5, 0.0))
    }

    pub fn is_real(&self) -> bool {
        self.symbol.is_real(1e-14)
    }
}

/// How masks beyond the explicit head are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum TailRule {
    /// `a_j = a_J` for `j > J`; the stationary case when the head has one mask.
    RepeatLast,
    /// Level-`j` mask built from the exponential space with factors
    /// `(z + exp(-λ 2^{-(j+level_offset)}))^{k(λ)+1}`.
    Exponential {
        space: ExponentialSpace,
        level_offset: i32,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct MaskSchedule {
    head: Vec<Mask>,
    tail: TailRule,
}

impl MaskSchedule {
    pub fn new(head: Vec<Mask>, tail: TailRule) -> Result<Self> {
        if head.is_empty() {
            return Err(Error::Invalid("schedule head must contain a mask".into()));
        }
        Ok(Self { head, tail })
    }

    pub fn stationary(mask: Mask) -> Self {
        Self {
            head: vec![mask],
            tail: TailRule::RepeatLast,
        }
    }

    pub fn head(&self) -> &[Mask] {
        &self.head
    }

    pub fn tail(&self) -> &TailRule {
        &self.tail
    }

    /// Mask applied at `level` (1-based).
    pub fn mask(&self, level: usize) -> Result<Mask> {
        if level == 0 {
            return Err(Error::Invalid("mask levels start at 1".into()));
        }
        if level <= self.head.len() {
            return Ok(self.head[level - 1].clone());
        }
        match &self.tail {
            TailRule::RepeatLast => Ok(self.head.last().unwrap().clone()),
            TailRule::Exponential {
                space,
                level_offset,
            } => exponential_mask(space, level as i64 + *level_offset as i64),
        }
    }

    /// Masks for levels `1..=count`.
    pub fn masks(&self, count: usize) -> Result<Vec<Mask>> {
        (1..=count).map(|j| self.mask(j)).collect()
    }

    /// Every level uses the same mask.
    pub fn is_stationary(&self) -> bool {
        matches!(self.tail, TailRule::RepeatLast) && self.head.windows(2).all(|w| w[0] == w[1])
    }
}

/// Values on the grid `2^{-level} Z`; `values[i]` sits at `(lo + i) 2^{-level}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub level: u32,
    pub lo: i64,
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(level: u32, lo: i64, values: Vec<Complex64>) -> Self {
        Self { level, lo, values }
    }

    /// The unit impulse at index 0 on the integers.
    pub fn delta() -> Self {
        Self::new(0, 0, vec![Complex64::new(1.0, 0.0)])
    }

    /// Samples `f` at every grid point of `level` inside `[t0, t1]`.
    pub fn sample<F>(level: u32, t0: f64, t1: f64, f: F) -> Self
    where
        F: Fn(f64) -> Complex64,
    {
        let h = Self::spacing_of(level);
        let lo = (t0 / h).ceil() as i64;
        let hi = (t1 / h).floor() as i64;
        let values = (lo..=hi).map(|k| f(k as f64 * h)).collect();
        Self::new(level, lo, values)
    }

    fn spacing_of(level: u32) -> f64 {
        0.5f64.powi(level as i32)
    }

    pub fn spacing(&self) -> f64 {
        Self::spacing_of(self.level)
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn t(&self, i: usize) -> f64 {
        (self.lo + i as i64) as f64 * self.spacing()
    }

    /// Value at grid index `k` (zero outside the window).
    pub fn at(&self, k: i64) -> Complex64 {
        let idx = k - self.lo;
        if idx < 0 || idx >= self.values.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.values[idx as usize]
        }
    }

    pub fn points(&self) -> impl Iterator<Item = (f64, Complex64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (self.t(i), v))
    }

    /// Sub-window of grid points in `[t0, t1]`.
    pub fn restrict(&self, t0: f64, t1: f64) -> Self {
        let h = self.spacing();
        let lo = ((t0 / h - 1e-9).ceil() as i64).max(self.lo);
        let hi = ((t1 / h + 1e-9).floor() as i64).min(self.hi());
        let values = (lo..=hi).map(|k| self.at(k)).collect();
        Self::new(self.level, lo, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.level, self.lo, self.values.iter().map(|&v| v * c).collect())
    }

    /// Pointwise sum over the union of both windows (zero extension).
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.level != other.level {
            return Err(Error::Invalid(format!(
                "cannot add samples on levels {} and {}",
                self.level, other.level
            )));
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi().max(other.hi());
        let values = (lo..=hi).map(|k| self.at(k) + other.at(k)).collect();
        Ok(Self::new(self.level, lo, values))
    }
}

/// Closed real interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.lo && t <= self.hi
    }
}

/// One step `(S_a c)_k = Σ_m a_{k-2m} c_m` with `c` extended by zero.
///
/// The output covers every index the zero-extended convolution can reach.
pub fn subdivide_step(mask: &Mask, c: &SampledFunction) -> Result<SampledFunction> {
    if c.is_empty() {
        return Err(Error::EmptyWindow);
    }
    let a = mask.symbol();
    let lo = 2 * c.lo + a.lo();
    let hi = 2 * c.hi() + a.hi();
    let mut out = vec![Complex64::new(0.0, 0.0); (hi - lo + 1) as usize];
    for (i, &cm) in c.values.iter().enumerate() {
        let m = c.lo + i as i64;
        for (n, an) in a.terms() {
            out[(2 * m + n - lo) as usize] += an * cm;
        }
    }
    Ok(SampledFunction::new(c.level + 1, lo, out))
}

/// Applies the masks of levels `1..=r` to `c1`.
pub fn run(schedule: &MaskSchedule, c1: &SampledFunction, r: u32) -> Result<SampledFunction> {
    if r == 0 {
        return Err(Error::Invalid("at least one subdivision level is required".into()));
    }
    let mut c = c1.clone();
    for j in 1..=r as usize {
        c = subdivide_step(&schedule.mask(j)?, &c)?;
    }
    Ok(c)
}

/// Cascade approximation of `φ` on `2^{-r} Z`, trimmed to the support bound.
pub fn basic_limit(schedule: &MaskSchedule, r: u32) -> Result<SampledFunction> {
    let c = run(schedule, &SampledFunction::delta(), r)?;
    let s = support_bound(schedule)?;
    Ok(c.restrict(s.lo, s.hi))
}

/// Bounds on the partial sums `Σ_{j ≤ levels} 2^{-j} [lo_j, hi_j]`.
pub fn influence_interval(schedule: &MaskSchedule, levels: u32) -> Result<Interval> {
    let (mut lo, mut hi) = (0.0, 0.0);
    let mut w = 1.0;
    for j in 1..=levels as usize {
        w *= 0.5;
        let m = schedule.mask(j)?;
        lo += w * m.symbol().lo() as f64;
        hi += w * m.symbol().hi() as f64;
    }
    Ok(Interval::new(lo, hi))
}

/// Interval `[Σ_j 2^{-j} lo_j, Σ_j 2^{-j} hi_j]` containing `supp φ`.
pub fn support_bound(schedule: &MaskSchedule) -> Result<Interval> {
    let head = schedule.head().len() as u32;
    let partial = influence_interval(schedule, head)?;
    let tail_weight = 0.5f64.powi(head as i32);
    let (tlo, thi) = match schedule.tail() {
        TailRule::RepeatLast => {
            let last = schedule.head().last().unwrap().symbol();
            (last.lo() as f64, last.hi() as f64)
        }
        TailRule::Exponential { space, .. } => (0.0, space.dim() as f64),
    };
    Ok(Interval::new(
        partial.lo + tail_weight * tlo,
        partial.hi + tail_weight * thi,
    ))
}

/// `⌈Σ_j |supp φ_j|⌉`, the bound on the dimension of the analytic subspace.
pub fn dimension_bound(supports: &[Interval]) -> usize {
    let total: f64 = supports.iter().map(|s| s.len().max(0.0)).sum();
    (total - 1e-9).ceil().max(0.0) as usize
}

/// Value of `S_{a_R} ... S_{a_1} c0` at index `k`, touching only the
/// coefficients that influence it.
fn cascade_point(masks: &[LaurentPolynomial], c0: &SampledFunction, k: i64) -> Complex64 {
    let levels = masks.len();
    let mut windows = vec![(0i64, 0i64); levels + 1];
    windows[levels] = (k, k);
    for j in (1..=levels).rev() {
        let (lo, hi) = windows[j];
        let a = &masks[j - 1];
        let wlo = (lo - a.hi() + 1).div_euclid(2);
        let whi = (hi - a.lo()).div_euclid(2);
        windows[j - 1] = (wlo, whi);
    }
    let (lo0, hi0) = windows[0];
    let mut vals: Vec<Complex64> = (lo0..=hi0).map(|m| c0.at(m)).collect();
    for j in 1..=levels {
        let (plo, _) = windows[j - 1];
        let (lo, hi) = windows[j];
        let a = &masks[j - 1];
        let next = (lo..=hi)
            .map(|kk| {
                vals.iter()
                    .enumerate()
                    .map(|(i, &v)| a.coeff(kk - 2 * (plo + i as i64)) * v)
                    .sum()
            })
            .collect();
        vals = next;
    }
    vals[0]
}

/// Limit of the scheme started from `c1`, sampled on `2^{-r} Z`.
///
/// Each sample at index `k` is the cascade value at index `k 2^{refine}` on
/// level `r + refine`, which removes the level-`r` truncation of
/// non-interpolatory and non-stationary schemes.
pub fn refined_limit(
    schedule: &MaskSchedule,
    c1: &SampledFunction,
    r: u32,
    refine: u32,
) -> Result<SampledFunction> {
    if c1.is_empty() {
        return Err(Error::EmptyWindow);
    }
    if c1.level != 0 {
        return Err(Error::Invalid("starting data must live on the integers".into()));
    }
    let total = (r + refine) as usize;
    let masks: Vec<LaurentPolynomial> = schedule
        .masks(total)?
        .into_iter()
        .map(|m| m.symbol().clone())
        .collect();
    let reach = influence_interval(schedule, r)?;
    let supp = support_bound(schedule)?;
    let scale = 2f64.powi(r as i32);
    let lo = ((c1.lo as f64 + reach.lo.min(supp.lo)) * scale).floor() as i64;
    let hi = ((c1.hi() as f64 + reach.hi.max(supp.hi)) * scale).ceil() as i64;
    let step = 1i64 << refine;
    let values = (lo..=hi)
        .map(|k| cascade_point(&masks, c1, k * step))
        .collect();
    Ok(SampledFunction::new(r, lo, values))
}
