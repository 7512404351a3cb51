//! The constant coin `C0` and the nonlinear coin families `C_N(s1, s2)`.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mat2::Mat2;

/// The unitary `C0 = ((a, b), (-conj b, conj a))` with `0 < |a| < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BaseCoin {
    a: Complex64,
    b: Complex64,
    theta_a: f64,
}

impl BaseCoin {
    pub fn new(a: Complex64, b: Complex64) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(Error::InvalidCoin { norm_sqr: f64::NAN });
        }
        let norm_sqr = a.norm_sqr() + b.norm_sqr();
        if (norm_sqr - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidCoin { norm_sqr });
        }
        let abs_a = a.norm();
        // |a| = 1 within rounding means b vanishes and the walk is a pure shift.
        if abs_a <= 0.0 || abs_a >= 1.0 || b.norm() == 0.0 {
            return Err(Error::DegenerateCoin { abs_a });
        }
        let theta_a = a.arg().rem_euclid(TAU);
        // rem_euclid can round up to TAU for tiny negative arguments.
        let theta_a = if theta_a >= TAU { 0.0 } else { theta_a };
        Ok(BaseCoin { a, b, theta_a })
    }

    /// `a = b = 1/sqrt 2`, the Hadamard-like rotation coin.
    pub fn hadamard() -> Self {
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        BaseCoin::new(h, h).expect("Hadamard coin is valid")
    }

    pub fn a(&self) -> Complex64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// Argument of `a`, in `[0, 2π)`.
    pub fn theta_a(&self) -> f64 {
        self.theta_a
    }

    pub fn abs_a(&self) -> f64 {
        self.a.norm()
    }

    pub fn abs_b(&self) -> f64 {
        self.b.norm()
    }

    pub fn matrix(&self) -> Mat2 {
        Mat2::new(self.a, self.b, -self.b.conj(), self.a.conj())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoinFamily {
    /// `C_N = C0` everywhere.
    Linear,
    /// `C_N = exp(iκ (s1 + s2)^m) C0`.
    ScalarPhase,
    /// `C_N = diag(exp(iκ s1^m), exp(iκ s2^m)) C0`.
    DiagonalPhase,
}

impl CoinFamily {
    pub fn name(&self) -> &'static str {
        match self {
            CoinFamily::Linear => "linear",
            CoinFamily::ScalarPhase => "scalar_phase",
            CoinFamily::DiagonalPhase => "diagonal_phase",
        }
    }
}

impl std::str::FromStr for CoinFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(CoinFamily::Linear),
            "scalar_phase" => Ok(CoinFamily::ScalarPhase),
            "diagonal_phase" => Ok(CoinFamily::DiagonalPhase),
            other => Err(Error::InvalidArgument(format!("unknown coin family `{other}`"))),
        }
    }
}

/// A nonlinear coin `C_N(s1, s2)` together with the coupling `g` that
/// turns local intensities into its arguments, `s_j = g |u_j(x)|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearCoinModel {
    pub base: BaseCoin,
    pub family: CoinFamily,
    pub exponent_m: u32,
    pub strength_kappa: f64,
    pub coupling_g: f64,
}

impl NonlinearCoinModel {
    pub fn new(
        base: BaseCoin,
        family: CoinFamily,
        exponent_m: u32,
        strength_kappa: f64,
        coupling_g: f64,
    ) -> Result<Self> {
        if exponent_m < 1 {
            return Err(Error::InvalidArgument("exponent m must be >= 1".into()));
        }
        if !(strength_kappa >= 0.0 && strength_kappa.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "kappa must be finite and >= 0, got {strength_kappa}"
            )));
        }
        if !(coupling_g >= 0.0 && coupling_g.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "g must be finite and >= 0, got {coupling_g}"
            )));
        }
        Ok(NonlinearCoinModel {
            base,
            family,
            exponent_m,
            strength_kappa,
            coupling_g,
        })
    }

    pub fn linear(base: BaseCoin) -> Self {
        NonlinearCoinModel {
            base,
            family: CoinFamily::Linear,
            exponent_m: 1,
            strength_kappa: 0.0,
            coupling_g: 0.0,
        }
    }

    /// Same model with a different coupling.
    pub fn with_coupling(&self, g: f64) -> Self {
        NonlinearCoinModel {
            coupling_g: g,
            ..*self
        }
    }

    /// True when `C_N(g|u1|^2, g|u2|^2) = C0` for every state, i.e. the
    /// nonlinear walk is exactly the linear walk.
    pub fn is_linear(&self) -> bool {
        self.family == CoinFamily::Linear || self.coupling_g == 0.0 || self.strength_kappa == 0.0
    }

    /// `C_N(s1, s2)`.
    pub fn cn_matrix(&self, s1: f64, s2: f64) -> Mat2 {
        let c0 = self.base.matrix();
        let m = self.exponent_m as i32;
        match self.family {
            CoinFamily::Linear => c0,
            CoinFamily::ScalarPhase => {
                let angle = self.strength_kappa * (s1 + s2).powi(m);
                if angle == 0.0 {
                    c0
                } else {
                    c0.scale(Complex64::from_polar(1.0, angle))
                }
            }
            CoinFamily::DiagonalPhase => {
                let (t1, t2) = (
                    self.strength_kappa * s1.powi(m),
                    self.strength_kappa * s2.powi(m),
                );
                if t1 == 0.0 && t2 == 0.0 {
                    c0
                } else {
                    Mat2::diag(Complex64::from_polar(1.0, t1), Complex64::from_polar(1.0, t2)) * c0
                }
            }
        }
    }

    /// The coin applied at a site with amplitudes `(u1, u2)`.
    #[inline]
    pub fn coin_for(&self, u1: Complex64, u2: Complex64) -> Mat2 {
        let g = self.coupling_g;
        self.cn_matrix(g * u1.norm_sqr(), g * u2.norm_sqr())
    }
}

/// Which case of the scattering hypotheses an exponent falls into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisRegime {
    /// `m >= 3`: scattering for small `g` from any normalized state.
    Unconditional,
    /// `m = 2`: additionally needs `u0` in l^1.
    RequiresL1,
    /// `m < 2`: outside the hypotheses.
    Outside,
}

impl HypothesisRegime {
    pub fn for_exponent(m: u32) -> Self {
        match m {
            0 | 1 => HypothesisRegime::Outside,
            2 => HypothesisRegime::RequiresL1,
            _ => HypothesisRegime::Unconditional,
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            HypothesisRegime::Unconditional => "m >= 3: scatters for sufficiently small g",
            HypothesisRegime::RequiresL1 => "m = 2: scatters for sufficiently small g if u0 is in l^1",
            HypothesisRegime::Outside => "m < 2: outside the scattering hypotheses",
        }
    }
}

/// Empirical constants in `||C_N - C0|| <= c0 (s1+s2)^m` and
/// `||∂_{s_j} C_N|| <= c0 (s1+s2)^{m-1}` over a sample grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationReport {
    pub exponent_m: u32,
    /// Smallest `c0` satisfying the value bound on the grid.
    pub c0_value: f64,
    /// Smallest `c0` satisfying the derivative bound (central differences).
    pub c0_derivative: f64,
    pub regime: HypothesisRegime,
}

impl PerturbationReport {
    /// A single constant covering both bounds.
    pub fn c0(&self) -> f64 {
        self.c0_value.max(self.c0_derivative)
    }
}

/// Samples `(s1, s2)` on a `points x points` grid over `[0, s_max]^2`,
/// skipping the origin where both bounds are trivial.
pub fn perturbation_exponent_check(
    model: &NonlinearCoinModel,
    s_max: f64,
    points: usize,
) -> PerturbationReport {
    let c0 = model.base.matrix();
    let m = model.exponent_m as i32;
    let h = 1e-6 * s_max.max(1e-3);
    let mut c0_value = 0.0f64;
    let mut c0_derivative = 0.0f64;
    let n = points.max(2);
    for i in 0..n {
        for j in 0..n {
            let s1 = s_max * i as f64 / (n - 1) as f64;
            let s2 = s_max * j as f64 / (n - 1) as f64;
            let total = s1 + s2;
            if total == 0.0 {
                continue;
            }
            let dist = (model.cn_matrix(s1, s2) - c0).op_norm();
            c0_value = c0_value.max(dist / total.powi(m));

            let d1 = (model.cn_matrix(s1 + h, s2) - model.cn_matrix(s1 - h, s2))
                .scale(Complex64::new(0.5 / h, 0.0))
                .op_norm();
            let d2 = (model.cn_matrix(s1, s2 + h) - model.cn_matrix(s1, s2 - h))
                .scale(Complex64::new(0.5 / h, 0.0))
                .op_norm();
            c0_derivative = c0_derivative.max(d1.max(d2) / total.powi(m - 1));
        }
    }
    PerturbationReport {
        exponent_m: model.exponent_m,
        c0_value,
        c0_derivative,
        regime: HypothesisRegime::for_exponent(model.exponent_m),
    }
}
