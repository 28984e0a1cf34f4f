//! Inverse-demand families with exact derivative jets.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jet::Jet;
use crate::numeric;

/// Highest jet order `price_jet` supports. Equilibrium recursions with
/// `T = 10` periods need a g-jet of order `T + 2`, hence a price jet one higher.
pub const MAX_PRICE_JET_ORDER: usize = 13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemandFamily {
    /// `P(X) = a (xbar - X)`
    Linear,
    /// `P(X) = a (xbar - X) - eps sin(k pi X)`
    Sine,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDemandModel", into = "RawDemandModel")]
pub struct DemandModel {
    family: DemandFamily,
    a: f64,
    xbar: f64,
    eps: f64,
    k: u32,
    c: f64,
}

#[derive(Serialize, Deserialize)]
struct RawDemandModel {
    family: DemandFamily,
    a: f64,
    xbar: f64,
    #[serde(default)]
    eps: f64,
    #[serde(default = "default_frequency")]
    k: u32,
    #[serde(default)]
    c: f64,
}

fn default_frequency() -> u32 {
    5
}

impl TryFrom<RawDemandModel> for DemandModel {
    type Error = Error;

    fn try_from(raw: RawDemandModel) -> Result<Self> {
        match raw.family {
            DemandFamily::Linear => DemandModel::linear(raw.a, raw.xbar, raw.c),
            DemandFamily::Sine => DemandModel::sine(raw.a, raw.xbar, raw.eps, raw.k, raw.c),
        }
    }
}

impl From<DemandModel> for RawDemandModel {
    fn from(m: DemandModel) -> Self {
        RawDemandModel {
            family: m.family,
            a: m.a,
            xbar: m.xbar,
            eps: m.eps,
            k: m.k,
            c: m.c,
        }
    }
}

/// Competitive quantity `P(xbar_c) = c` together with its residual.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CompetitiveBenchmark {
    pub xbar_c: f64,
    pub residual: f64,
}

impl DemandModel {
    pub fn linear(a: f64, xbar: f64, c: f64) -> Result<Self> {
        let m = DemandModel {
            family: DemandFamily::Linear,
            a,
            xbar,
            eps: 0.0,
            k: 1,
            c,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn sine(a: f64, xbar: f64, eps: f64, k: u32, c: f64) -> Result<Self> {
        let m = DemandModel {
            family: DemandFamily::Sine,
            a,
            xbar,
            eps,
            k,
            c,
        };
        m.validate()?;
        Ok(m)
    }

    /// Unit normalization `a = 1, xbar = 1, c = 0` used by the figures.
    pub fn unit_linear() -> Self {
        DemandModel::linear(1.0, 1.0, 0.0).expect("unit model is valid")
    }

    fn validate(&self) -> Result<()> {
        let finite = [self.a, self.xbar, self.eps, self.c]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidModel("parameters must be finite".into()));
        }
        if self.a <= 0.0 {
            return Err(Error::InvalidModel(format!("slope a = {} must be > 0", self.a)));
        }
        if self.xbar <= 0.0 {
            return Err(Error::InvalidModel(format!("xbar = {} must be > 0", self.xbar)));
        }
        if self.c < 0.0 {
            return Err(Error::InvalidModel(format!("cost c = {} must be >= 0", self.c)));
        }
        // sin(0) = 0, so P(0) = a xbar in both families
        if self.c >= self.a * self.xbar {
            return Err(Error::InvalidModel(format!(
                "cost c = {} must be below P(0) = {}",
                self.c,
                self.a * self.xbar
            )));
        }
        if self.family == DemandFamily::Sine {
            if self.k == 0 {
                return Err(Error::InvalidModel("frequency k must be >= 1".into()));
            }
            let margin = self.slope_margin();
            if margin <= 0.0 {
                return Err(Error::MonotonicityViolated(margin));
            }
        }
        Ok(())
    }

    /// `a - |eps| k pi`, a lower bound on `-P'`.
    pub fn slope_margin(&self) -> f64 {
        match self.family {
            DemandFamily::Linear => self.a,
            DemandFamily::Sine => self.a - self.eps.abs() * self.k as f64 * PI,
        }
    }

    pub fn family(&self) -> DemandFamily {
        self.family
    }
    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn xbar(&self) -> f64 {
        self.xbar
    }
    pub fn eps(&self) -> f64 {
        self.eps
    }
    pub fn k(&self) -> u32 {
        self.k
    }
    pub fn cost(&self) -> f64 {
        self.c
    }

    pub fn is_linear(&self) -> bool {
        self.family == DemandFamily::Linear || self.eps == 0.0
    }

    /// Same demand with a different marginal cost.
    pub fn with_cost(&self, c: f64) -> Result<Self> {
        let mut m = *self;
        m.c = c;
        m.validate()?;
        Ok(m)
    }

    /// Inverse demand. Beyond `xbar` the raw formula is returned unclamped.
    pub fn price(&self, x: f64) -> f64 {
        let base = self.a * (self.xbar - x);
        match self.family {
            DemandFamily::Linear => base,
            DemandFamily::Sine => base - self.eps * (self.k as f64 * PI * x).sin(),
        }
    }

    /// Per-unit margin `P(X) - c`.
    pub fn margin(&self, x: f64) -> f64 {
        self.price(x) - self.c
    }

    pub fn price_jet(&self, x: f64, order: usize) -> Jet {
        assert!(
            order <= MAX_PRICE_JET_ORDER,
            "price jets are limited to order {MAX_PRICE_JET_ORDER}"
        );
        let id = Jet::identity(x, order);
        let base = id.scale(-self.a).offset(self.a * self.xbar);
        match self.family {
            DemandFamily::Linear => base,
            DemandFamily::Sine => {
                let wave = id.scale(self.k as f64 * PI).sin().scale(self.eps);
                base.checked_sub(&wave).expect("same center and order")
            }
        }
    }

    pub fn competitive_quantity(&self) -> Result<CompetitiveBenchmark> {
        let xbar_c = match self.family {
            DemandFamily::Linear => self.xbar - self.c / self.a,
            DemandFamily::Sine => {
                if self.slope_margin() <= 0.0 {
                    return Err(Error::MonotonicityViolated(self.slope_margin()));
                }
                // P(X) - c <= a (xbar - X) + |eps| - c, which is <= 0 at hi
                let hi = self.xbar + self.eps.abs() / self.a;
                numeric::bisect(&|x| self.margin(x), 0.0, hi)
            }
        };
        Ok(CompetitiveBenchmark {
            xbar_c,
            residual: self.margin(xbar_c).abs(),
        })
    }

    /// Shorthand for `competitive_quantity().xbar_c`.
    pub fn xbar_c(&self) -> f64 {
        self.competitive_quantity()
            .expect("validated models have a competitive quantity")
            .xbar_c
    }

    /// Jet of `g(X) = -(P(X) - c) / P'(X)`.
    pub fn g_jet(&self, x: f64, order: usize) -> Result<Jet> {
        let p = self.price_jet(x, order + 1);
        let slope = p.derivative()?;
        let margin = p.truncate(order).offset(-self.c);
        Ok(margin.checked_div(&slope)?.scale(-1.0))
    }

    /// `g(X)` by direct evaluation.
    pub fn g(&self, x: f64) -> f64 {
        -self.margin(x) / self.price_slope(x)
    }

    /// `P'(X)`.
    pub fn price_slope(&self, x: f64) -> f64 {
        let kpi = self.k as f64 * PI;
        match self.family {
            DemandFamily::Linear => -self.a,
            DemandFamily::Sine => -self.a - self.eps * kpi * (kpi * x).cos(),
        }
    }
}
