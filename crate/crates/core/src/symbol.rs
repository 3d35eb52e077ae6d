//! Laurent polynomials that serve both as subdivision symbols `a(z)` and,
//! through `z = exp(-2πiy)`, as trigonometric polynomials `a(y)`.

use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coefficients below this fraction of the largest modulus are dropped.
pub const TRIM_TOL: f64 = 1e-14;

/// Number of uniform grid points used for sup-norm estimates on `[0, 1)`.
pub const SUP_GRID: usize = 4096;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// `Σ_m coeffs[m - lo] z^m`, stored in trimmed form.
///
/// The zero polynomial is a single zero coefficient at `lo = 0`; any other
/// polynomial has non-zero first and last coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct LaurentPolynomial {
    coeffs: Vec<Complex64>,
    lo: i64,
}

impl LaurentPolynomial {
    pub fn new(coeffs: Vec<Complex64>, lo: i64) -> Self {
        let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if coeffs.is_empty() || scale == 0.0 {
            return Self::zero();
        }
        let cut = TRIM_TOL * scale;
        let mut coeffs: Vec<Complex64> = coeffs
            .into_iter()
            .map(|c| if c.norm() < cut { Complex64::new(0.0, 0.0) } else { c })
            .collect();
        let first = coeffs.iter().position(|c| c.norm() != 0.0);
        let Some(first) = first else {
            return Self::zero();
        };
        let last = coeffs.iter().rposition(|c| c.norm() != 0.0).unwrap();
        coeffs.truncate(last + 1);
        coeffs.drain(..first);
        Self {
            coeffs,
            lo: lo + first as i64,
        }
    }

    pub fn from_real(coeffs: &[f64], lo: i64) -> Self {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(), lo)
    }

    pub fn zero() -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0)],
            lo: 0,
        }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new(vec![c], 0)
    }

    pub fn monomial(c: Complex64, exponent: i64) -> Self {
        Self::new(vec![c], exponent)
    }

    /// `z + w`
    pub fn linear_factor(w: Complex64) -> Self {
        Self::new(vec![w, Complex64::new(1.0, 0.0)], 0)
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.coeffs.len() as i64 - 1
    }

    /// `hi - lo`, the degree of the trigonometric polynomial.
    pub fn span(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0].norm() == 0.0
    }

    /// Coefficient of `z^m` (zero outside the stored window).
    pub fn coeff(&self, m: i64) -> Complex64 {
        let idx = m - self.lo;
        if idx < 0 || idx >= self.coeffs.len() as i64 {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[idx as usize]
        }
    }

    /// Iterator over `(exponent, coefficient)` pairs.
    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.lo + i as i64, c))
    }

    pub fn coeff_sum(&self) -> Complex64 {
        self.coeffs.iter().sum()
    }

    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// True when every imaginary part is below `tol * max|coeff|`.
    pub fn is_real(&self, tol: f64) -> bool {
        let cut = tol * self.max_abs_coeff();
        self.coeffs.iter().all(|c| c.im.abs() <= cut)
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self::new(self.coeffs.iter().map(|&a| a * c).collect(), self.lo)
    }

    /// Multiplication by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        Self {
            coeffs: self.coeffs.clone(),
            lo: self.lo + k,
        }
    }

    pub fn pow(&self, n: u32) -> Self {
        let mut out = Self::constant(Complex64::new(1.0, 0.0));
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Evaluates the symbol at `z`; fails at `z = 0` when negative powers are present.
    pub fn eval_z(&self, z: Complex64) -> Result<Complex64> {
        if self.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        if z.norm() == 0.0 {
            if self.lo < 0 {
                return Err(Error::Domain(
                    "evaluation at z = 0 of a symbol with negative powers".into(),
                ));
            }
            return Ok(if self.lo == 0 {
                self.coeffs[0]
            } else {
                Complex64::new(0.0, 0.0)
            });
        }
        Ok(self.horner(z) * z.powi(self.lo as i32))
    }

    fn horner(&self, z: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// Raw trigonometric evaluation `Σ_m c_m exp(-2πimy)`; `y` may be complex.
    pub fn eval_trig(&self, y: Complex64) -> Complex64 {
        let z = (-2.0 * PI * I * y).exp();
        if self.is_zero() {
            return Complex64::new(0.0, 0.0);
        }
        // z is never zero here, so the domain check in eval_z cannot fire.
        self.horner(z) * (-2.0 * PI * I * y * self.lo as f64).exp()
    }

    /// Coefficients of `d^order/dy^order a(y)`: `c_m (-2πim)^order`.
    pub fn derivative_trig(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        let coeffs = self
            .terms()
            .map(|(m, c)| c * (-2.0 * PI * I * m as f64).powi(order as i32))
            .collect();
        Self::new(coeffs, self.lo)
    }

    /// Coefficients of `d^order/dz^order a(z)`.
    pub fn derivative_z(&self, order: u32) -> Self {
        if order == 0 {
            return self.clone();
        }
        let coeffs = self
            .terms()
            .map(|(m, c)| {
                let falling: f64 = (0..order as i64).map(|i| (m - i) as f64).product();
                c * falling
            })
            .collect();
        Self::new(coeffs, self.lo - order as i64)
    }

    /// Estimates `sup_{y ∈ [0,1)} |a(y)|` on a uniform grid of `SUP_GRID` points.
    pub fn sup_norm_sampled(&self) -> f64 {
        (0..SUP_GRID)
            .map(|i| {
                self.eval_trig(Complex64::new(i as f64 / SUP_GRID as f64, 0.0))
                    .norm()
            })
            .fold(0.0, f64::max)
    }
}

impl fmt::Display for LaurentPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (m, c) in self.terms() {
            if c.norm() == 0.0 && !self.is_zero() {
                continue;
            }
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            write!(f, "({c})z^{m}")?;
        }
        Ok(())
    }
}

impl Add for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn add(self, rhs: Self) -> LaurentPolynomial {
        if self.is_zero() {
            return rhs.clone();
        }
        if rhs.is_zero() {
            return self.clone();
        }
        let lo = self.lo.min(rhs.lo);
        let hi = self.hi().max(rhs.hi());
        let coeffs = (lo..=hi).map(|m| self.coeff(m) + rhs.coeff(m)).collect();
        LaurentPolynomial::new(coeffs, lo)
    }
}

impl Sub for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn sub(self, rhs: Self) -> LaurentPolynomial {
        self + &(-rhs)
    }
}

impl Neg for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn neg(self) -> LaurentPolynomial {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul for &LaurentPolynomial {
    type Output = LaurentPolynomial;

    fn mul(self, rhs: Self) -> LaurentPolynomial {
        if self.is_zero() || rhs.is_zero() {
            return LaurentPolynomial::zero();
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.coeffs.len() + rhs.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in rhs.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        LaurentPolynomial::new(out, self.lo + rhs.lo)
    }
}

/// Which of the two coefficient normalizations a symbol is stored in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalizationConvention {
    /// Mask coefficients sum to 2, i.e. `a(1) = 2`.
    #[serde(rename = "sum2")]
    SubdivisionSum2,
    /// Trigonometric polynomial with `a(0) = 1`.
    #[serde(rename = "unit")]
    FourierUnit,
}

impl NormalizationConvention {
    /// Factor that converts coefficients stored in `self` into `target`.
    pub fn factor_to(self, target: NormalizationConvention) -> f64 {
        use NormalizationConvention::*;
        match (self, target) {
            (SubdivisionSum2, FourierUnit) => 0.5,
            (FourierUnit, SubdivisionSum2) => 2.0,
            _ => 1.0,
        }
    }
}

/// A polynomial together with the convention its coefficients are stored in.
#[derive(Debug, Clone, PartialEq)]
pub struct Symbol {
    pub poly: LaurentPolynomial,
    pub convention: NormalizationConvention,
}

impl Symbol {
    pub fn new(poly: LaurentPolynomial, convention: NormalizationConvention) -> Self {
        Self { poly, convention }
    }

    /// Polynomial rescaled into `view`.
    pub fn in_view(&self, view: NormalizationConvention) -> LaurentPolynomial {
        let f = self.convention.factor_to(view);
        if f == 1.0 {
            self.poly.clone()
        } else {
            self.poly.scale(Complex64::new(f, 0.0))
        }
    }

    /// `a(y)` as seen in `view`.
    pub fn eval_trig(&self, y: Complex64, view: NormalizationConvention) -> Complex64 {
        self.poly.eval_trig(y) * self.convention.factor_to(view)
    }
}

/// Both sides of the interpolation estimate
/// `‖a‖∞ · gap^N ≤ 2^{-N} (N+1) max_m |a(y_m)|`.
///
/// `gap` is the smallest distance between nodes on the circle `R/Z`. The
/// same estimate with the plain distance `|y_m - y_k|` fails when the closest
/// pair straddles `0`; it is reported as `literal_holds`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangeBound {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub gap: f64,
    /// Smallest `|y_m - y_k|` without wrap-around.
    pub linear_gap: f64,
    pub literal_holds: bool,
    /// Relative slack allowed for the grid estimate of the sup-norm.
    pub grid_slack: f64,
}

/// Checks the interpolation estimate for a trigonometric polynomial with
/// exponents in `[0, N]` at `N + 1` distinct nodes in `[0, 1)`.
pub fn lagrange_bound(p: &LaurentPolynomial, points: &[f64]) -> Result<LagrangeBound> {
    if points.is_empty() {
        return Err(Error::Precondition("at least one node is required".into()));
    }
    let n = points.len() - 1;
    if let Some(bad) = points.iter().find(|y| !(0.0..1.0).contains(*y)) {
        return Err(Error::Precondition(format!("node {bad} outside [0, 1)")));
    }
    if !p.is_zero() && (p.lo() < 0 || p.hi() > n as i64) {
        return Err(Error::Precondition(format!(
            "exponents [{}, {}] not within [0, {n}]",
            p.lo(),
            p.hi()
        )));
    }
    let (mut gap, mut linear_gap) = (f64::INFINITY, f64::INFINITY);
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            let d = (a - b).abs();
            linear_gap = linear_gap.min(d);
            gap = gap.min(d.min(1.0 - d));
        }
    }
    if gap == 0.0 {
        return Err(Error::Precondition("nodes must be pairwise distinct".into()));
    }
    let gap_pow = |g: f64| if n == 0 { 1.0 } else { g.powi(n as i32) };

    let sup = p.sup_norm_sampled();
    // Bernstein: ‖a'‖ ≤ 2πN‖a‖, so the grid misses at most πN/SUP_GRID of the sup.
    let h = std::f64::consts::PI * n as f64 / SUP_GRID as f64;
    let grid_slack = h / (1.0 - h);

    let max_node = points
        .iter()
        .map(|&y| p.eval_trig(Complex64::new(y, 0.0)).norm())
        .fold(0.0, f64::max);
    let rhs = 0.5f64.powi(n as i32) * (n + 1) as f64 * max_node;
    let within = |lhs: f64| lhs <= rhs * (1.0 + grid_slack) + f64::EPSILON * rhs.max(lhs);
    let lhs = sup * gap_pow(gap);
    let literal_lhs = sup * gap_pow(linear_gap);
    Ok(LagrangeBound {
        lhs,
        rhs,
        holds: within(lhs),
        gap,
        linear_gap,
        literal_holds: within(literal_lhs),
        grid_slack,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn hat_sum2() -> LaurentPolynomial {
        LaurentPolynomial::from_real(&[0.5, 1.0, 0.5], -1)
    }

    #[test]
    fn eval_z_examples() {
        let p = LaurentPolynomial::from_real(&[0.5, 1.0, 0.5], 0);
        assert_abs_diff_eq!(p.eval_z(c(1.0, 0.0)).unwrap().re, 2.0, epsilon = 1e-15);
        assert!(p.eval_z(c(-1.0, 0.0)).unwrap().norm() < 1e-15);
        let v = p.eval_z(c(0.0, 1.0)).unwrap();
        assert!((v - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn eval_z_rejects_origin_with_negative_powers() {
        assert!(matches!(hat_sum2().eval_z(c(0.0, 0.0)), Err(Error::Domain(_))));
        let p = LaurentPolynomial::from_real(&[3.0, 1.0], 0);
        assert_eq!(p.eval_z(c(0.0, 0.0)).unwrap(), c(3.0, 0.0));
        assert_eq!(LaurentPolynomial::zero().eval_z(c(0.0, 0.0)).unwrap(), c(0.0, 0.0));
    }

    #[test]
    fn eval_trig_hat() {
        let s = Symbol::new(hat_sum2(), NormalizationConvention::SubdivisionSum2);
        let unit = NormalizationConvention::FourierUnit;
        assert_abs_diff_eq!(s.eval_trig(c(0.0, 0.0), unit).re, 1.0, epsilon = 1e-15);
        assert!(s.eval_trig(c(0.5, 0.0), unit).norm() < 1e-15);
        assert_abs_diff_eq!(s.eval_trig(c(0.25, 0.0), unit).re, 0.5, epsilon = 1e-15);
        // stored view is unchanged
        assert_abs_diff_eq!(
            s.eval_trig(c(0.0, 0.0), NormalizationConvention::SubdivisionSum2).re,
            2.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn convention_factors() {
        use NormalizationConvention::*;
        assert_eq!(SubdivisionSum2.factor_to(FourierUnit), 0.5);
        assert_eq!(FourierUnit.factor_to(SubdivisionSum2), 2.0);
        assert_eq!(FourierUnit.factor_to(FourierUnit), 1.0);
    }

    #[test]
    fn derivative_trig_examples() {
        let hat = hat_sum2();
        assert_eq!(hat.derivative_trig(0), hat);
        assert!(hat.derivative_trig(1).eval_trig(c(0.0, 0.0)).norm() < 1e-14);
        let mono = LaurentPolynomial::monomial(c(1.0, 0.0), 1);
        let d = mono.derivative_trig(1).eval_trig(c(0.0, 0.0));
        assert!((d - c(0.0, -2.0 * PI)).norm() < 1e-14);
    }

    #[test]
    fn derivative_z_of_hat() {
        // (z^-1 + 2 + z)/2 -> (-z^-2 + 1)/2 -> z^-3
        let d1 = hat_sum2().derivative_z(1);
        assert_eq!(d1.lo(), -2);
        assert!((d1.eval_z(c(-1.0, 0.0)).unwrap()).norm() < 1e-15);
        let d2 = hat_sum2().derivative_z(2);
        assert!((d2.eval_z(c(-1.0, 0.0)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn arithmetic_examples() {
        let one_plus_z = LaurentPolynomial::from_real(&[1.0, 1.0], 0);
        let sq = &one_plus_z * &one_plus_z;
        assert_eq!(sq, LaurentPolynomial::from_real(&[1.0, 2.0, 1.0], 0));

        let p = LaurentPolynomial::from_real(&[0.3, -1.0, 2.0], -2);
        let z = &p + &p.scale(c(-1.0, 0.0));
        assert!(z.is_zero());

        let e = (-1.0f64).exp();
        let q = &one_plus_z * &LaurentPolynomial::linear_factor(c(e, 0.0));
        let expected = [e, 1.0 + e, 1.0];
        for (m, want) in expected.iter().enumerate() {
            assert!((q.coeff(m as i64) - c(*want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn trimming_invariants() {
        let p = LaurentPolynomial::new(vec![c(0.0, 0.0), c(1e-20, 0.0), c(1.0, 0.0), c(0.0, 0.0)], -3);
        assert_eq!(p.lo(), -1);
        assert_eq!(p.span(), 0);
        assert!(LaurentPolynomial::new(vec![], 4).is_zero());
        assert!(LaurentPolynomial::new(vec![c(0.0, 0.0); 3], 4).is_zero());
    }

    #[test]
    fn lagrange_examples() {
        let mono = LaurentPolynomial::monomial(c(1.0, 0.0), 1);
        let b = lagrange_bound(&mono, &[0.0, 0.5]).unwrap();
        assert_abs_diff_eq!(b.lhs, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(b.rhs, 1.0, epsilon = 1e-12);
        assert!(b.holds);

        let one = LaurentPolynomial::constant(c(1.0, 0.0));
        let b = lagrange_bound(&one, &[0.3]).unwrap();
        assert_abs_diff_eq!(b.lhs, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(b.rhs, 1.0, epsilon = 1e-15);
        assert!(b.holds);
    }

    #[test]
    fn lagrange_gap_wraps_around() {
        // a(y) = 1 - e^{-2πiy}, |a(y)| = 2|sin πy|
        let p = LaurentPolynomial::from_real(&[1.0, -1.0], 0);
        let b = lagrange_bound(&p, &[0.05, 0.95]).unwrap();
        assert_abs_diff_eq!(b.gap, 0.1, epsilon = 1e-12);
        assert_abs_diff_eq!(b.linear_gap, 0.9, epsilon = 1e-12);
        assert_abs_diff_eq!(b.rhs, 2.0 * (0.05 * PI).sin(), epsilon = 1e-12);
        assert!(b.holds);
        assert!(!b.literal_holds);
    }

    #[test]
    fn lagrange_preconditions() {
        let mono = LaurentPolynomial::monomial(c(1.0, 0.0), 1);
        assert!(lagrange_bound(&mono, &[0.2, 0.2]).is_err());
        assert!(lagrange_bound(&mono, &[0.2, 1.0]).is_err());
        assert!(lagrange_bound(&mono, &[0.2]).is_err());
        assert!(lagrange_bound(&hat_sum2(), &[0.0, 0.3, 0.6]).is_err());
    }
}
