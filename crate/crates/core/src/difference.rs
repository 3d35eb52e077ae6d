//! The exponential difference operator `∇_λ f = e^{-λ} f(·+1) - f` on
//! dyadic samples.
//!
//! `∇_λ^n` annihilates `π p e^{λt}` for 1-periodic `π` and `deg p < n`, and
//! maps `π p e^{μt}` (`μ ≠ λ`) to `π p̃ e^{μt}` with `deg p̃ = deg p`. A chain
//! of such operators isolates one exponential component of a function.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::subdivision::SampledFunction;

/// Samples on a dyadic grid that can be shifted by whole units.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftableFunction {
    samples: SampledFunction,
}

impl ShiftableFunction {
    pub fn new(samples: SampledFunction) -> Self {
        Self { samples }
    }

    pub fn samples(&self) -> &SampledFunction {
        &self.samples
    }

    pub fn into_samples(self) -> SampledFunction {
        self.samples
    }

    /// Grid points per unit shift.
    pub fn unit(&self) -> usize {
        1usize << self.samples.level
    }

    /// Number of unit shifts the window can still absorb.
    pub fn remaining_shifts(&self) -> usize {
        self.samples.len().saturating_sub(1) / self.unit()
    }
}

/// `t ↦ e^{-λ} f(t+1) - f(t)`; the window loses one unit on the right.
pub fn nabla(lambda: Complex64, f: &ShiftableFunction) -> Result<ShiftableFunction> {
    let unit = f.unit();
    let s = f.samples();
    if s.len() <= unit {
        return Err(Error::WindowTooSmall(format!(
            "{} samples cannot absorb a shift of {unit}",
            s.len()
        )));
    }
    let decay = (-lambda).exp();
    let values = (0..s.len() - unit)
        .map(|i| decay * s.values[i + unit] - s.values[i])
        .collect();
    Ok(ShiftableFunction::new(SampledFunction::new(s.level, s.lo, values)))
}

pub fn nabla_power(lambda: Complex64, n: usize, f: &ShiftableFunction) -> Result<ShiftableFunction> {
    if n > f.remaining_shifts() {
        return Err(Error::WindowTooSmall(format!(
            "{n} differences requested, window allows {}",
            f.remaining_shifts()
        )));
    }
    let mut g = f.clone();
    for _ in 0..n {
        g = nabla(lambda, &g)?;
    }
    Ok(g)
}

/// Applies `∇_{λ_j}^{d_j+1}` for every component except `keep`, in list order.
pub fn eliminate(
    f: &ShiftableFunction,
    components: &[(Complex64, usize)],
    keep: usize,
) -> Result<ShiftableFunction> {
    if keep >= components.len() {
        return Err(Error::Invalid(format!(
            "component {keep} out of range for {} components",
            components.len()
        )));
    }
    let needed: usize = components
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != keep)
        .map(|(_, (_, d))| d + 1)
        .sum();
    if needed > f.remaining_shifts() {
        return Err(Error::WindowTooSmall(format!(
            "elimination needs {needed} unit shifts, window allows {}",
            f.remaining_shifts()
        )));
    }
    let mut g = f.clone();
    for (j, &(lambda, d)) in components.iter().enumerate() {
        if j != keep {
            g = nabla_power(lambda, d + 1, &g)?;
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sampled<F: Fn(f64) -> Complex64>(t0: f64, t1: f64, f: F) -> ShiftableFunction {
        ShiftableFunction::new(SampledFunction::sample(3, t0, t1, f))
    }

    #[test]
    fn difference_of_identity_is_one() {
        let f = sampled(-4.0, 4.0, |t| c(t, 0.0));
        let g = nabla(c(0.0, 0.0), &f).unwrap();
        let s = g.samples();
        assert_eq!(s.t(0), -4.0);
        assert_eq!(s.t(s.len() - 1), 3.0);
        assert!(s.values.iter().all(|v| (v - c(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn difference_of_square() {
        let f = sampled(-4.0, 4.0, |t| c(t * t, 0.0));
        let g = nabla(c(0.0, 0.0), &f).unwrap();
        for (t, v) in g.samples().points() {
            assert!((v - c(2.0 * t + 1.0, 0.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn exponential_is_annihilated() {
        let lambda = c(0.4, -1.3);
        let f = sampled(-2.0, 3.0, |t| (lambda * t).exp());
        let g = nabla(lambda, &f).unwrap();
        assert!(g.samples().max_abs() < 1e-14);
    }

    #[test]
    fn window_limits() {
        let f = sampled(0.0, 1.0, |t| c(t, 0.0));
        assert!(nabla(c(0.0, 0.0), &f).is_ok());
        let g = nabla(c(0.0, 0.0), &f).unwrap();
        assert!(matches!(nabla(c(0.0, 0.0), &g), Err(Error::WindowTooSmall(_))));
        assert!(nabla_power(c(0.0, 0.0), 2, &f).is_err());
    }

    #[test]
    fn single_component_is_untouched() {
        let f = sampled(0.0, 3.0, |t| c(t.sin(), 0.0));
        let g = eliminate(&f, &[(c(0.2, 0.0), 1)], 0).unwrap();
        assert_eq!(g, f);
        assert!(eliminate(&f, &[(c(0.2, 0.0), 1)], 1).is_err());
    }

    #[test]
    fn two_exponentials_leave_the_kept_one() {
        let f = sampled(-2.0, 4.0, |t| c(1.0 + t.exp(), 0.0));
        let g = eliminate(&f, &[(c(0.0, 0.0), 0), (c(1.0, 0.0), 0)], 1).unwrap();
        let scale = std::f64::consts::E - 1.0;
        for (t, v) in g.samples().points() {
            assert!((v.re - scale * t.exp()).abs() < 1e-12 * t.exp().max(1.0));
        }
    }
}
