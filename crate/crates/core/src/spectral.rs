//! Closed-form spectral data of the linear walk and the weak-limit velocity
//! density built from it.
//!
//! In momentum space `U0` acts as multiplication by
//!
//! ```text
//! Û0(k) = ((e^{ik} a, e^{ik} b), (-e^{-ik} conj b, e^{-ik} conj a))
//! ```
//!
//! with eigenvalues `λ_j(k) = |a| cos(k+θ_a) ± i sqrt(|b|^2 + |a|^2 sin^2(k+θ_a))`
//! and group velocities `v_j(k) = i λ_j'(k) / λ_j(k)`. Each `v_j` restricted
//! to `I_m = [π(m-1/2) - θ_a, π(m+1/2) - θ_a]` is inverted by the branch
//! `k_{j,m}(v)`, and the velocity law of the walk started from `u+` is
//! `w(v) f_K(v; |a|) dv` with `w(v) = ½ Σ_{j,m} |<φ_j(k_{j,m}(v)), û+(k_{j,m}(v))>|^2`.
//!
//! Integrals against `f_K(v; |a|) dv` are evaluated after the substitution
//! `v = |a| sin η`, which turns the inverse-square-root endpoint
//! singularities into the bounded weight `|b| / (π (1 - v^2)) dη`. Summed
//! over both branches the η-integrand is smooth and periodic, so the
//! midpoint rule on a uniform η-grid converges geometrically.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt::Write as _;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coins::BaseCoin;
use crate::error::{Error, Result};
use crate::io::sig17;
use crate::lattice::{LatticeState, Spinor};
use crate::mat2::Mat2;

pub const DEFAULT_NODES: usize = 513;
pub const MIN_NODES: usize = 64;
/// Upper bound for automatic grid refinement.
pub const MAX_NODES: usize = 16385;
/// Allowed `|total_mass - ||u+||^2|` before the grid is refined.
pub const MASS_TOL: f64 = 1e-6;

/// Band index `j`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Band {
    /// `j = 1`, eigenvalue in the upper half plane.
    First,
    /// `j = 2`, the complex conjugate band.
    Second,
}

impl Band {
    pub const ALL: [Band; 2] = [Band::First, Band::Second];

    pub fn index(self) -> u8 {
        match self {
            Band::First => 1,
            Band::Second => 2,
        }
    }

    /// `(-1)^j`
    fn parity(self) -> f64 {
        match self {
            Band::First => -1.0,
            Band::Second => 1.0,
        }
    }
}

impl TryFrom<u8> for Band {
    type Error = Error;

    fn try_from(j: u8) -> Result<Self> {
        match j {
            1 => Ok(Band::First),
            2 => Ok(Band::Second),
            _ => Err(Error::InvalidArgument(format!("band index must be 1 or 2, got {j}"))),
        }
    }
}

/// Branch index `m` selecting the momentum interval `I_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Zero,
    One,
}

impl Branch {
    pub const ALL: [Branch; 2] = [Branch::Zero, Branch::One];

    pub fn index(self) -> u8 {
        match self {
            Branch::Zero => 0,
            Branch::One => 1,
        }
    }

    fn parity(self) -> f64 {
        match self {
            Branch::Zero => 1.0,
            Branch::One => -1.0,
        }
    }
}

impl TryFrom<u8> for Branch {
    type Error = Error;

    fn try_from(m: u8) -> Result<Self> {
        match m {
            0 => Ok(Branch::Zero),
            1 => Ok(Branch::One),
            _ => Err(Error::InvalidArgument(format!("branch index must be 0 or 1, got {m}"))),
        }
    }
}

/// `Û0(k)`.
pub fn u0_symbol(coin: &BaseCoin, k: f64) -> Mat2 {
    let (a, b) = (coin.a(), coin.b());
    let plus = Complex64::from_polar(1.0, k);
    let minus = plus.conj();
    Mat2::new(plus * a, plus * b, -minus * b.conj(), minus * a.conj())
}

/// `λ_j(k)`.
pub fn eigenvalue(coin: &BaseCoin, k: f64, band: Band) -> Complex64 {
    let (abs_a, abs_b) = (coin.abs_a(), coin.abs_b());
    let phase = k + coin.theta_a();
    let sin = phase.sin();
    let im = (abs_b * abs_b + abs_a * abs_a * sin * sin).sqrt();
    Complex64::new(abs_a * phase.cos(), -band.parity() * im)
}

/// Normalized `φ_j(k)`, proportional to `(e^{ik} b, λ_j(k) - e^{ik} a)` with
/// the global phase chosen so the first component is real and positive.
pub fn eigenvector(coin: &BaseCoin, k: f64, band: Band) -> Spinor {
    let lambda = eigenvalue(coin, k, band);
    let e = Complex64::from_polar(1.0, k);
    let raw = Spinor::new(e * coin.b(), lambda - e * coin.a());
    // b != 0, so the first component never vanishes.
    let (first_abs, norm) = (raw.up.norm(), raw.norm());
    let fix = raw.up.conj() / (first_abs * norm);
    Spinor::new(Complex64::new(first_abs / norm, 0.0), fix * raw.down)
}

pub fn eigenpair(coin: &BaseCoin, k: f64, band: Band) -> (Complex64, Spinor) {
    (eigenvalue(coin, k, band), eigenvector(coin, k, band))
}

/// `v_j(k) = (-1)^j |a| sin(k+θ_a) / sqrt(|b|^2 + |a|^2 sin^2(k+θ_a))`.
pub fn group_velocity(coin: &BaseCoin, k: f64, band: Band) -> f64 {
    let (abs_a, abs_b) = (coin.abs_a(), coin.abs_b());
    let sin = (k + coin.theta_a()).sin();
    band.parity() * abs_a * sin / (abs_b * abs_b + abs_a * abs_a * sin * sin).sqrt()
}

/// Spectral data of `Û0(k)` for both bands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DispersionSample {
    pub k: f64,
    pub lambda: [Complex64; 2],
    pub phi: [Spinor; 2],
    pub v: [f64; 2],
}

pub fn dispersion_sample(coin: &BaseCoin, k: f64) -> DispersionSample {
    let [b1, b2] = Band::ALL;
    DispersionSample {
        k,
        lambda: [eigenvalue(coin, k, b1), eigenvalue(coin, k, b2)],
        phi: [eigenvector(coin, k, b1), eigenvector(coin, k, b2)],
        v: [group_velocity(coin, k, b1), group_velocity(coin, k, b2)],
    }
}

/// Konno density `f_K(v; r) = sqrt(1-r^2) / (π (1-v^2) sqrt(r^2-v^2))` on
/// `|v| < r`, zero elsewhere.
pub fn konno_density(v: f64, r: f64) -> f64 {
    if v.abs() >= r {
        return 0.0;
    }
    (1.0 - r * r).sqrt() / (PI * (1.0 - v * v) * (r * r - v * v).sqrt())
}

/// `k_{j,m}(v) = -θ_a + mπ + arcsin((-1)^{j+m} |b| v / (|a| sqrt(1-v^2)))`,
/// the inverse of `v_j` on `I_m`.
pub fn k_branch(v: f64, band: Band, branch: Branch, coin: &BaseCoin) -> Result<f64> {
    let abs_a = coin.abs_a();
    if !(v.abs() <= abs_a + 1e-12) {
        return Err(Error::OutOfRange { v, limit: abs_a });
    }
    let v = v.clamp(-abs_a, abs_a);
    let sign = band.parity() * branch.parity();
    let arg = (sign * coin.abs_b() * v / (abs_a * (1.0 - v * v).sqrt())).clamp(-1.0, 1.0);
    Ok(-coin.theta_a() + f64::from(branch.index()) * PI + arg.asin())
}

/// `(K_{j,m} u)(v) = <φ_j(k), û(k)>` at `k = k_{j,m}(v)`.
pub fn k_transform(
    u: &LatticeState,
    v: f64,
    band: Band,
    branch: Branch,
    coin: &BaseCoin,
) -> Result<Complex64> {
    let k = k_branch(v, band, branch, coin)?;
    Ok(eigenvector(coin, k, band).dot(&u.fourier_eval(k)))
}

/// `w(v) = ½ Σ_{j,m} |(K_{j,m} u)(v)|^2`.
pub fn weight(u: &LatticeState, v: f64, coin: &BaseCoin) -> Result<f64> {
    let mut sum = 0.0;
    for band in Band::ALL {
        for branch in Branch::ALL {
            sum += k_transform(u, v, band, branch, coin)?.norm_sqr();
        }
    }
    Ok(0.5 * sum)
}

/// The weak-limit density `w(v) f_K(v; |a|)` sampled on
/// `v_i = |a| sin η_i` with `η_i` the midpoints of a uniform partition of
/// `(-π/2, π/2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityDensity {
    abs_a: f64,
    d_eta: f64,
    v: Vec<f64>,
    w: Vec<f64>,
    f_k: Vec<f64>,
    // f_K(v_i) dv_i for the midpoint rule in η.
    quad: Vec<f64>,
    total_mass: f64,
    source_norm_sqr: f64,
}

impl VelocityDensity {
    pub fn n_nodes(&self) -> usize {
        self.v.len()
    }

    pub fn abs_a(&self) -> f64 {
        self.abs_a
    }

    pub fn nodes(&self) -> &[f64] {
        &self.v
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    pub fn konno(&self) -> &[f64] {
        &self.f_k
    }

    /// Quadrature weights: `∫ h(v) f_K(v) dv ≈ Σ_i h(v_i) quad_i`.
    pub fn quadrature(&self) -> &[f64] {
        &self.quad
    }

    pub fn density(&self) -> impl Iterator<Item = f64> + '_ {
        self.w.iter().zip(&self.f_k).map(|(w, f)| w * f)
    }

    /// `∫ w f_K dv`; equals `||u+||^2`.
    pub fn total_mass(&self) -> f64 {
        self.total_mass
    }

    /// `||u+||^2` of the state the density was built from.
    pub fn source_norm_sqr(&self) -> f64 {
        self.source_norm_sqr
    }

    fn require_mass(&self) -> Result<f64> {
        if self.total_mass > 0.0 {
            Ok(self.total_mass)
        } else {
            Err(Error::InvalidArgument("density has zero total mass".into()))
        }
    }

    /// `∫ v^n dμ_V / total_mass`.
    pub fn moment(&self, n: u32) -> Result<f64> {
        let mass = self.require_mass()?;
        let sum: f64 = (0..self.v.len())
            .map(|i| self.v[i].powi(n as i32) * self.w[i] * self.quad[i])
            .sum();
        Ok(sum / mass)
    }

    /// `∫ e^{iξv} dμ_V / total_mass`.
    pub fn char_fn(&self, xi: f64) -> Result<Complex64> {
        let mass = self.require_mass()?;
        let sum = (0..self.v.len()).fold(Complex64::new(0.0, 0.0), |acc, i| {
            acc + Complex64::from_polar(self.w[i] * self.quad[i], xi * self.v[i])
        });
        Ok(sum / mass)
    }

    pub fn cdf(&self) -> Result<DensityCdf> {
        let mass = self.require_mass()?;
        let mut values = Vec::with_capacity(self.v.len() + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for i in 0..self.v.len() {
            acc += self.w[i] * self.quad[i];
            values.push((acc / mass).min(1.0));
        }
        // Pin the right edge so the CDF ends exactly at 1.
        if let Some(last) = values.last_mut() {
            *last = 1.0;
        }
        Ok(DensityCdf {
            abs_a: self.abs_a,
            d_eta: self.d_eta,
            values,
        })
    }

    /// CSV `v,w,f_k,density`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("v,w,f_k,density\n");
        for i in 0..self.v.len() {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                sig17(self.v[i]),
                sig17(self.w[i]),
                sig17(self.f_k[i]),
                sig17(self.w[i] * self.f_k[i])
            );
        }
        out
    }
}

/// CDF of a [`VelocityDensity`], sampled at the η-cell edges and
/// interpolated linearly in `η = arcsin(v / |a|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityCdf {
    abs_a: f64,
    d_eta: f64,
    values: Vec<f64>,
}

impl DensityCdf {
    pub fn eval(&self, v: f64) -> f64 {
        if v <= -self.abs_a {
            return 0.0;
        }
        if v >= self.abs_a {
            return 1.0;
        }
        let pos = ((v / self.abs_a).asin() + FRAC_PI_2) / self.d_eta;
        let cells = self.values.len() - 1;
        let i = (pos.floor() as usize).min(cells - 1);
        let frac = pos - i as f64;
        self.values[i] + frac * (self.values[i + 1] - self.values[i])
    }

    /// `(v, F(v))` at the cell edges.
    pub fn samples(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.values.iter().enumerate().map(move |(e, f)| {
            let eta = -FRAC_PI_2 + e as f64 * self.d_eta;
            (self.abs_a * eta.sin(), *f)
        })
    }
}

fn sample_density(u_plus: &LatticeState, coin: &BaseCoin, n: usize) -> Result<VelocityDensity> {
    let abs_a = coin.abs_a();
    let abs_b = coin.abs_b();
    let d_eta = PI / n as f64;
    let v: Vec<f64> = (0..n)
        .map(|i| abs_a * (-FRAC_PI_2 + (i as f64 + 0.5) * d_eta).sin())
        .collect();
    let u = u_plus.trimmed();
    let w = v
        .par_iter()
        .map(|&vi| weight(&u, vi, coin))
        .collect::<Result<Vec<f64>>>()?;
    let f_k: Vec<f64> = v.iter().map(|&vi| konno_density(vi, abs_a)).collect();
    let quad: Vec<f64> = v
        .iter()
        .map(|&vi| abs_b * d_eta / (PI * (1.0 - vi * vi)))
        .collect();
    let total_mass = w.iter().zip(&quad).map(|(w, q)| w * q).sum();
    Ok(VelocityDensity {
        abs_a,
        d_eta,
        v,
        w,
        f_k,
        quad,
        total_mass,
        source_norm_sqr: u.norm_sqr(),
    })
}

/// Samples `w(v) f_K(v; |a|)` on `n_nodes` nodes. The grid is refined
/// (`n -> 2n - 1`) until the total mass matches `||u+||^2` within
/// [`MASS_TOL`] or [`MAX_NODES`] is reached.
pub fn limit_density(u_plus: &LatticeState, coin: &BaseCoin, n_nodes: usize) -> Result<VelocityDensity> {
    if n_nodes < MIN_NODES {
        return Err(Error::InvalidArgument(format!(
            "n_nodes must be >= {MIN_NODES}, got {n_nodes}"
        )));
    }
    let mut n = n_nodes;
    loop {
        let density = sample_density(u_plus, coin, n)?;
        let miss = (density.total_mass - density.source_norm_sqr).abs();
        if miss <= MASS_TOL * density.source_norm_sqr.max(1.0) || n >= MAX_NODES {
            return Ok(density);
        }
        n = (2 * n - 1).min(MAX_NODES);
    }
}

pub fn density_moment(density: &VelocityDensity, n: u32) -> Result<f64> {
    density.moment(n)
}

pub fn density_cdf(density: &VelocityDensity) -> Result<DensityCdf> {
    density.cdf()
}

pub fn char_fn_theoretical(density: &VelocityDensity, xi: f64) -> Result<Complex64> {
    density.char_fn(xi)
}

#[derive(Debug, Clone, Serialize)]
pub struct DensitySummary {
    pub total_mass: f64,
    pub moments: [f64; 4],
    pub n_nodes: usize,
}

impl DensitySummary {
    pub fn of(density: &VelocityDensity) -> Result<Self> {
        Ok(DensitySummary {
            total_mass: density.total_mass(),
            moments: [
                density.moment(1)?,
                density.moment(2)?,
                density.moment(3)?,
                density.moment(4)?,
            ],
            n_nodes: density.n_nodes(),
        })
    }
}
