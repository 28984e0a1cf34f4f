//! Truncated Taylor-coefficient arithmetic.
//!
//! A [`Jet`] of order `m` at `x0` carries `f(x0), f'(x0)/1!, ..., f^(m)(x0)/m!`.
//! Composing jets with the operations here propagates derivatives exactly
//! (up to rounding) through the algebraic expressions the equilibrium
//! recursions need: sums, products, quotients and `sin`.

use thiserror::Error;

/// Leading coefficients with magnitude below this are treated as zero divisors.
pub const DIVISION_THRESHOLD: f64 = 1e-300;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum JetError {
    #[error("division by a jet with vanishing leading coefficient ({0:e})")]
    DivisionByZero(f64),
    #[error("jet centers differ: {0} vs {1}")]
    CenterMismatch(f64, f64),
    #[error("jet orders differ: {0} vs {1}")]
    OrderMismatch(usize, usize),
    #[error("cannot differentiate an order-0 jet")]
    ZeroOrder,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Jet {
    center: f64,
    coeffs: Vec<f64>,
}

impl Jet {
    /// Jet of a constant function.
    pub fn constant(value: f64, center: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = value;
        Jet { center, coeffs }
    }

    /// Jet of `x -> x` expanded at `x0`.
    pub fn identity(x0: f64, order: usize) -> Self {
        let mut coeffs = vec![0.0; order + 1];
        coeffs[0] = x0;
        if order >= 1 {
            coeffs[1] = 1.0;
        }
        Jet { center: x0, coeffs }
    }

    /// Builds a jet from raw Taylor coefficients. Panics on an empty list.
    pub fn from_coeffs(center: f64, coeffs: Vec<f64>) -> Self {
        assert!(!coeffs.is_empty(), "a jet needs at least one coefficient");
        Jet { center, coeffs }
    }

    pub fn center(&self) -> f64 {
        self.center
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// `j`-th derivative at the center, `j! * coeffs[j]`.
    pub fn derivative_at(&self, j: usize) -> f64 {
        let factorial: f64 = (1..=j).map(|i| i as f64).product();
        factorial * self.coeffs[j]
    }

    /// All derivatives `f(x0), f'(x0), ..., f^(m)(x0)`.
    pub fn derivatives(&self) -> Vec<f64> {
        (0..=self.order()).map(|j| self.derivative_at(j)).collect()
    }

    /// Drops coefficients above `order`. Orders above the current one are a no-op.
    pub fn truncate(&self, order: usize) -> Jet {
        let keep = (order + 1).min(self.coeffs.len());
        Jet {
            center: self.center,
            coeffs: self.coeffs[..keep].to_vec(),
        }
    }

    fn check_compatible(&self, other: &Jet) -> Result<(), JetError> {
        if self.center != other.center {
            return Err(JetError::CenterMismatch(self.center, other.center));
        }
        if self.order() != other.order() {
            return Err(JetError::OrderMismatch(self.order(), other.order()));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_compatible(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Jet {
            center: self.center,
            coeffs,
        })
    }

    pub fn checked_sub(&self, other: &Jet) -> Result<Jet, JetError> {
        self.checked_add(&other.scale(-1.0))
    }

    /// Cauchy product.
    pub fn checked_mul(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_compatible(other)?;
        let m = self.order();
        let coeffs = (0..=m)
            .map(|k| (0..=k).map(|j| self.coeffs[j] * other.coeffs[k - j]).sum())
            .collect();
        Ok(Jet {
            center: self.center,
            coeffs,
        })
    }

    /// Quotient `self / other` by the usual recursive series division.
    pub fn checked_div(&self, other: &Jet) -> Result<Jet, JetError> {
        self.check_compatible(other)?;
        let b0 = other.coeffs[0];
        if !(b0.abs() >= DIVISION_THRESHOLD) {
            return Err(JetError::DivisionByZero(b0));
        }
        let m = self.order();
        let mut q = vec![0.0; m + 1];
        for k in 0..=m {
            let acc: f64 = (1..=k).map(|j| other.coeffs[j] * q[k - j]).sum();
            q[k] = (self.coeffs[k] - acc) / b0;
        }
        Ok(Jet {
            center: self.center,
            coeffs: q,
        })
    }

    pub fn scale(&self, factor: f64) -> Jet {
        Jet {
            center: self.center,
            coeffs: self.coeffs.iter().map(|c| c * factor).collect(),
        }
    }

    /// Adds a constant to the value coefficient.
    pub fn offset(&self, shift: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += shift;
        out
    }

    /// Jet of `sin` composed with `self`.
    pub fn sin(&self) -> Jet {
        self.sin_cos().0
    }

    pub fn cos(&self) -> Jet {
        self.sin_cos().1
    }

    /// Coupled recurrence from `s' = c u'`, `c' = -s u'`:
    /// `k s_k = sum_{j=1..k} j u_j c_{k-j}` and `k c_k = -sum_{j=1..k} j u_j s_{k-j}`.
    pub fn sin_cos(&self) -> (Jet, Jet) {
        let m = self.order();
        let u = &self.coeffs;
        let mut s = vec![0.0; m + 1];
        let mut c = vec![0.0; m + 1];
        s[0] = u[0].sin();
        c[0] = u[0].cos();
        for k in 1..=m {
            let mut ds = 0.0;
            let mut dc = 0.0;
            for j in 1..=k {
                let w = j as f64 * u[j];
                ds += w * c[k - j];
                dc -= w * s[k - j];
            }
            s[k] = ds / k as f64;
            c[k] = dc / k as f64;
        }
        (
            Jet {
                center: self.center,
                coeffs: s,
            },
            Jet {
                center: self.center,
                coeffs: c,
            },
        )
    }

    /// Jet of the derivative; one order lower.
    pub fn derivative(&self) -> Result<Jet, JetError> {
        if self.order() == 0 {
            return Err(JetError::ZeroOrder);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| j as f64 * c)
            .collect();
        Ok(Jet {
            center: self.center,
            coeffs,
        })
    }
}
