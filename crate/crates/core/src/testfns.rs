//! Benchmark integrands and their reference integrals.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point2, Rect};
use crate::rules::gauss_legendre_product;

/// Exactness degree of the rule used for reference integrals.
pub const REFERENCE_DEGREE: usize = 60;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TestFunction {
    /// Franke's function on `[0,1]^2`.
    F1,
    /// `1 / ((1 + x^2)(1 + y^2))` on `[-1,1]^2`.
    F2,
    /// `r^3` about `(0.5, 0.5)` on `[0,1]^2`, C^2.
    F3,
    /// `r^7` about `(0.5, 0.5)` on `[0,1]^2`, C^6.
    F4,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Smoothness {
    Analytic,
    /// Continuously differentiable up to the given order.
    Finite(u32),
}

const CENTER: Point2 = Point2::new(0.5, 0.5);

impl TestFunction {
    pub const ALL: [TestFunction; 4] = [Self::F1, Self::F2, Self::F3, Self::F4];

    pub fn eval(self, p: Point2) -> f64 {
        let (x, y) = (p.x, p.y);
        match self {
            Self::F1 => {
                let a = (9.0 * x - 2.0).powi(2) + (9.0 * y - 2.0).powi(2);
                let b = (9.0 * x + 1.0).powi(2) / 49.0 + (9.0 * y + 1.0) / 10.0;
                let c = (9.0 * x - 7.0).powi(2) + (9.0 * y - 3.0).powi(2);
                let d = (9.0 * x - 4.0).powi(2) + (9.0 * y - 7.0).powi(2);
                0.75 * (-a / 4.0).exp() + 0.75 * (-b).exp() + 0.5 * (-c / 4.0).exp()
                    - 0.2 * (-d).exp()
            }
            Self::F2 => 1.0 / ((1.0 + x * x) * (1.0 + y * y)),
            Self::F3 => p.dist2(CENTER).powf(1.5),
            Self::F4 => p.dist2(CENTER).powf(3.5),
        }
    }

    pub fn rect(self) -> Rect {
        match self {
            Self::F2 => Rect {
                ax: -1.0,
                bx: 1.0,
                ay: -1.0,
                by: 1.0,
            },
            _ => Rect::unit(),
        }
    }

    pub fn domain(self) -> Domain {
        Domain::Rectangle(self.rect())
    }

    pub fn smoothness(self) -> Smoothness {
        match self {
            Self::F1 | Self::F2 => Smoothness::Analytic,
            Self::F3 => Smoothness::Finite(2),
            Self::F4 => Smoothness::Finite(6),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::F1 => "f1",
            Self::F2 => "f2",
            Self::F3 => "f3",
            Self::F4 => "f4",
        }
    }

    /// Integral over the natural domain by the tensor Gauss rule of degree `n`.
    pub fn rule_integral(self, n: usize) -> f64 {
        gauss_legendre_product(&self.rect(), n).apply(|p| self.eval(p))
    }

    /// Reference integral over the natural domain: closed form for `f2`,
    /// the degree-60 rule otherwise (computed once).
    pub fn reference_integral(self) -> f64 {
        static CACHE: [OnceLock<f64>; 4] = [
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
            OnceLock::new(),
        ];
        let slot = match self {
            Self::F1 => 0,
            Self::F2 => 1,
            Self::F3 => 2,
            Self::F4 => 3,
        };
        *CACHE[slot].get_or_init(|| match self {
            Self::F2 => (2.0 * 1f64.atan()).powi(2),
            _ => self.rule_integral(REFERENCE_DEGREE),
        })
    }
}

impl std::str::FromStr for TestFunction {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f1" => Ok(Self::F1),
            "f2" => Ok(Self::F2),
            "f3" => Ok(Self::F3),
            "f4" => Ok(Self::F4),
            _ => Err(Error::Config(format!("unknown test function '{s}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_values() {
        assert_eq!(TestFunction::F2.eval(Point2::new(0.0, 0.0)), 1.0);
        assert_eq!(TestFunction::F3.eval(Point2::new(0.5, 0.5)), 0.0);
        assert_eq!(TestFunction::F4.eval(Point2::new(1.5, 0.5)), 1.0);
    }

    #[test]
    fn radial_functions_are_rotation_invariant() {
        for f in [TestFunction::F3, TestFunction::F4] {
            for k in 0..12 {
                let t = k as f64 * 0.5;
                let r = 0.37;
                let p = Point2::new(0.5 + r * t.cos(), 0.5 + r * t.sin());
                let q = Point2::new(0.5 + r, 0.5);
                assert!((f.eval(p) - f.eval(q)).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn references() {
        let f2 = TestFunction::F2.reference_integral();
        assert!((f2 - 2.46740110027234).abs() < 1e-14);
        let by_rule = TestFunction::F2.rule_integral(REFERENCE_DEGREE);
        assert!((by_rule - f2).abs() <= 1e-12 * f2);
        for (f, tol) in [
            (TestFunction::F1, 1e-12),
            (TestFunction::F2, 1e-12),
            (TestFunction::F4, 1e-8),
        ] {
            let a = f.rule_integral(60);
            let b = f.rule_integral(80);
            assert!((a - b).abs() <= tol * b.abs(), "{f:?}: {a} vs {b}");
        }
    }

    #[test]
    fn finite_regularity_references_against_closed_forms() {
        // Polar integration of r^k over the square centered at the singularity:
        // 8 * int_0^{pi/4} (sec(t)/2)^(k+2) / (k+2) dt, with the secant powers
        // integrated by the reduction formula.
        let sqrt2 = 2f64.sqrt();
        let sec_power_integral = |n: i32| {
            let mut acc = (1.0 + sqrt2).ln();
            for k in (3..=n).step_by(2) {
                let kf = k as f64;
                acc = sqrt2.powi(k - 2) / (kf - 1.0) + (kf - 2.0) / (kf - 1.0) * acc;
            }
            acc
        };
        let f3_exact = 8.0 * sec_power_integral(5) / (32.0 * 5.0);
        let f4_exact = 8.0 * sec_power_integral(9) / (512.0 * 9.0);

        let rel = |a: f64, b: f64| (a - b).abs() / b.abs();
        // r^3 is only C^2 at an interior node, so tensor Gauss converges algebraically.
        assert!(rel(TestFunction::F3.reference_integral(), f3_exact) < 2e-7);
        assert!(rel(TestFunction::F3.rule_integral(80), f3_exact) < 5e-8);
        assert!(rel(TestFunction::F4.reference_integral(), f4_exact) < 1e-11);
    }
}
