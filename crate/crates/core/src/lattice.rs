//! Finitely supported states in l^2(Z; C^2).
//!
//! A [`LatticeState`] stores a dense window of two-component amplitudes
//! starting at `window_min`; every site outside the window is zero. All
//! operations are padding invariant: extending a window with zero spinors
//! never changes a result.

use std::fmt::Write as _;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::io::sig17;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Two complex amplitudes `(u1(x), u2(x))` at one site.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Spinor {
    pub up: Complex64,
    pub down: Complex64,
}

impl Spinor {
    pub const ZERO: Spinor = Spinor { up: ZERO, down: ZERO };

    #[inline]
    pub const fn new(up: Complex64, down: Complex64) -> Self {
        Spinor { up, down }
    }

    pub fn from_parts(up_re: f64, up_im: f64, down_re: f64, down_im: f64) -> Self {
        Spinor::new(Complex64::new(up_re, up_im), Complex64::new(down_re, down_im))
    }

    /// `<self, other>`, conjugate-linear in `self`.
    #[inline]
    pub fn dot(&self, other: &Spinor) -> Complex64 {
        self.up.conj() * other.up + self.down.conj() * other.down
    }

    #[inline]
    pub fn norm_sqr(&self) -> f64 {
        self.up.norm_sqr() + self.down.norm_sqr()
    }

    #[inline]
    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    #[inline]
    pub fn scale(&self, s: Complex64) -> Spinor {
        Spinor::new(s * self.up, s * self.down)
    }

    pub fn is_finite(&self) -> bool {
        self.up.is_finite() && self.down.is_finite()
    }
}

impl Add for Spinor {
    type Output = Spinor;

    #[inline]
    fn add(self, rhs: Spinor) -> Spinor {
        Spinor::new(self.up + rhs.up, self.down + rhs.down)
    }
}

impl Sub for Spinor {
    type Output = Spinor;

    #[inline]
    fn sub(self, rhs: Spinor) -> Spinor {
        Spinor::new(self.up - rhs.up, self.down - rhs.down)
    }
}

impl Mul<f64> for Spinor {
    type Output = Spinor;

    #[inline]
    fn mul(self, rhs: f64) -> Spinor {
        Spinor::new(self.up * rhs, self.down * rhs)
    }
}

/// A state on the integer lattice with finite support.
#[derive(Debug, Clone, Default)]
pub struct LatticeState {
    window_min: i64,
    amplitudes: Vec<Spinor>,
}

impl LatticeState {
    pub fn new(window_min: i64, amplitudes: Vec<Spinor>) -> Self {
        LatticeState {
            window_min,
            amplitudes,
        }
    }

    pub fn zeros(window_min: i64, len: usize) -> Self {
        LatticeState::new(window_min, vec![Spinor::ZERO; len])
    }

    /// A point mass `delta_x ⊗ s`.
    pub fn point(x: i64, s: Spinor) -> Self {
        LatticeState::new(x, vec![s])
    }

    /// Builds the smallest window holding the given sites. Repeated sites
    /// are summed.
    pub fn from_sites<I>(sites: I) -> Self
    where
        I: IntoIterator<Item = (i64, Spinor)>,
    {
        let sites: Vec<(i64, Spinor)> = sites.into_iter().collect();
        let (Some(lo), Some(hi)) = (
            sites.iter().map(|s| s.0).min(),
            sites.iter().map(|s| s.0).max(),
        ) else {
            return LatticeState::default();
        };
        let mut state = LatticeState::zeros(lo, (hi - lo + 1) as usize);
        for (x, s) in sites {
            let i = (x - lo) as usize;
            state.amplitudes[i] = state.amplitudes[i] + s;
        }
        state
    }

    #[inline]
    pub fn window_min(&self) -> i64 {
        self.window_min
    }

    /// Last site of the window (inclusive). For an empty window this is
    /// `window_min - 1`.
    #[inline]
    pub fn window_max(&self) -> i64 {
        self.window_min + self.amplitudes.len() as i64 - 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Spinor] {
        &self.amplitudes
    }

    #[inline]
    pub fn amplitudes_mut(&mut self) -> &mut [Spinor] {
        &mut self.amplitudes
    }

    /// Amplitude at site `x`, zero outside the window.
    #[inline]
    pub fn at(&self, x: i64) -> Spinor {
        let i = x - self.window_min;
        if i < 0 || i >= self.amplitudes.len() as i64 {
            Spinor::ZERO
        } else {
            self.amplitudes[i as usize]
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Spinor)> + '_ {
        self.amplitudes
            .iter()
            .enumerate()
            .map(move |(i, s)| (self.window_min + i as i64, *s))
    }

    /// Copy of the state on the window `[lo, hi]`. Sites of `self` outside
    /// that window are dropped.
    pub fn resized(&self, lo: i64, hi: i64) -> LatticeState {
        let len = (hi - lo + 1).max(0) as usize;
        let mut out = LatticeState::zeros(lo, len);
        let from = lo.max(self.window_min);
        let to = hi.min(self.window_max());
        for x in from..=to {
            out.amplitudes[(x - lo) as usize] = self.amplitudes[(x - self.window_min) as usize];
        }
        out
    }

    /// Smallest and largest site carrying a nonzero amplitude.
    pub fn support(&self) -> Option<(i64, i64)> {
        let first = self.amplitudes.iter().position(|s| *s != Spinor::ZERO)?;
        let last = self.amplitudes.iter().rposition(|s| *s != Spinor::ZERO)?;
        Some((self.window_min + first as i64, self.window_min + last as i64))
    }

    /// Drops zero sites at both ends of the window.
    pub fn trimmed(&self) -> LatticeState {
        match self.support() {
            Some((lo, hi)) => self.resized(lo, hi),
            None => LatticeState::default(),
        }
    }

    pub fn scaled(&self, s: Complex64) -> LatticeState {
        LatticeState::new(
            self.window_min,
            self.amplitudes.iter().map(|a| a.scale(s)).collect(),
        )
    }

    pub fn is_finite(&self) -> bool {
        self.amplitudes.iter().all(Spinor::is_finite)
    }

    /// `<self, other> = sum_x conj(self(x)) . other(x)`.
    pub fn inner(&self, other: &LatticeState) -> Complex64 {
        let lo = self.window_min.max(other.window_min);
        let hi = self.window_max().min(other.window_max());
        (lo..=hi).fold(ZERO, |acc, x| acc + self.at(x).dot(&other.at(x)))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Spinor::norm_sqr).sum()
    }

    pub fn norm_l2(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn norm_l1(&self) -> f64 {
        self.amplitudes.iter().map(Spinor::norm).sum()
    }

    /// `||self - other||` over the union of both windows.
    pub fn distance(&self, other: &LatticeState) -> f64 {
        let lo = self.window_min.min(other.window_min);
        let hi = self.window_max().max(other.window_max());
        (lo..=hi)
            .map(|x| (self.at(x) - other.at(x)).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Squared norm carried by sites outside `[lo, hi]`.
    pub fn mass_outside(&self, lo: i64, hi: i64) -> f64 {
        self.iter()
            .filter(|(x, _)| *x < lo || *x > hi)
            .map(|(_, s)| s.norm_sqr())
            .sum()
    }

    /// `û(k) = sum_x e^{-ikx} u(x)`.
    pub fn fourier_eval(&self, k: f64) -> Spinor {
        // Phases come from a running product, resynchronised periodically
        // so rounding does not accumulate across long windows.
        const RESYNC: usize = 256;
        let step = Complex64::from_polar(1.0, -k);
        let mut acc = Spinor::ZERO;
        let mut phase = ZERO;
        for (i, s) in self.amplitudes.iter().enumerate() {
            if i % RESYNC == 0 {
                let x = self.window_min + i as i64;
                phase = Complex64::from_polar(1.0, -k * x as f64);
            }
            acc.up += phase * s.up;
            acc.down += phase * s.down;
            phase *= step;
        }
        acc
    }

    /// Born-rule distribution `p(x) = ||u(x)||^2` of a normalized state.
    pub fn position_distribution(&self) -> Result<SiteDistribution> {
        let norm = self.norm_l2();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::NotNormalized { norm });
        }
        Ok(SiteDistribution {
            window_min: self.window_min,
            probs: self.amplitudes.iter().map(Spinor::norm_sqr).collect(),
        })
    }
}

impl PartialEq for LatticeState {
    /// Exact comparison treating sites outside either window as zero.
    fn eq(&self, other: &LatticeState) -> bool {
        let lo = self.window_min.min(other.window_min);
        let hi = self.window_max().max(other.window_max());
        (lo..=hi).all(|x| self.at(x) == other.at(x))
    }
}

/// Probabilities over a dense window of sites.
#[derive(Debug, Clone, PartialEq)]
pub struct SiteDistribution {
    window_min: i64,
    probs: Vec<f64>,
}

impl SiteDistribution {
    pub fn window_min(&self) -> i64 {
        self.window_min
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn get(&self, x: i64) -> f64 {
        let i = x - self.window_min;
        if i < 0 || i >= self.probs.len() as i64 {
            0.0
        } else {
            self.probs[i as usize]
        }
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    /// Sites with `p > 0`, ascending.
    pub fn iter(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .filter(|(_, p)| **p > 0.0)
            .map(move |(i, p)| (self.window_min + i as i64, *p))
    }

    /// CSV with header `x,p`, one row per site with `p > 0`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,p\n");
        for (x, p) in self.iter() {
            let _ = writeln!(out, "{x},{}", sig17(p));
        }
        out
    }
}
