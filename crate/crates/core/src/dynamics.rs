//! The nonlinear step `U = S Ĉ`, the linear step `U0 = S Ĉ0`, its inverse,
//! and trajectory evolution.
//!
//! The shift moves the first component one site left and the second one
//! site right: `(S u)(x) = (u1(x+1), u2(x-1))`.

use crate::coins::{BaseCoin, NonlinearCoinModel};
use crate::error::{Error, Result};
use crate::lattice::{LatticeState, Spinor};

/// Sitewise `u(x) -> C_N(g|u1(x)|^2, g|u2(x)|^2) u(x)`.
pub fn apply_coin(u: &LatticeState, model: &NonlinearCoinModel) -> LatticeState {
    let amps = u
        .amplitudes()
        .iter()
        .map(|s| model.coin_for(s.up, s.down).apply(*s))
        .collect();
    LatticeState::new(u.window_min(), amps)
}

pub fn apply_shift(u: &LatticeState) -> LatticeState {
    let lo = u.window_min() - 1;
    let hi = u.window_max() + 1;
    let amps = (lo..=hi)
        .map(|x| Spinor::new(u.at(x + 1).up, u.at(x - 1).down))
        .collect();
    LatticeState::new(lo, amps)
}

pub fn apply_shift_inverse(u: &LatticeState) -> LatticeState {
    let lo = u.window_min() - 1;
    let hi = u.window_max() + 1;
    let amps = (lo..=hi)
        .map(|x| Spinor::new(u.at(x - 1).up, u.at(x + 1).down))
        .collect();
    LatticeState::new(lo, amps)
}

/// One application of `U = S Ĉ`.
pub fn step(u: &LatticeState, model: &NonlinearCoinModel) -> LatticeState {
    apply_shift(&apply_coin(u, model))
}

/// One application of `U0 = S Ĉ0`.
pub fn step_linear(u: &LatticeState, coin: &BaseCoin) -> LatticeState {
    let c0 = coin.matrix();
    let coined = LatticeState::new(
        u.window_min(),
        u.amplitudes().iter().map(|s| c0.apply(*s)).collect(),
    );
    apply_shift(&coined)
}

/// One application of `U0^{-1} = Ĉ0* S^{-1}`.
pub fn step_linear_inverse(u: &LatticeState, coin: &BaseCoin) -> LatticeState {
    let c0_adj = coin.matrix().adjoint();
    let shifted = apply_shift_inverse(u);
    LatticeState::new(
        shifted.window_min(),
        shifted.amplitudes().iter().map(|s| c0_adj.apply(*s)).collect(),
    )
}

/// An initial state, a coin model and a time horizon.
#[derive(Debug, Clone)]
pub struct WalkConfig {
    pub model: NonlinearCoinModel,
    pub initial: LatticeState,
    pub horizon: u64,
}

impl WalkConfig {
    pub fn new(model: NonlinearCoinModel, initial: LatticeState, horizon: u64) -> Result<Self> {
        let norm = initial.norm_l2();
        if (norm - 1.0).abs() > 1e-9 || !initial.is_finite() {
            return Err(Error::NotNormalized { norm });
        }
        Ok(WalkConfig {
            model,
            initial,
            horizon,
        })
    }
}

/// In-place evolution on a window sized for a fixed number of steps.
///
/// Only the light cone `[x_min - t, x_max + t]` of the initial window is
/// touched at time `t`. The buffer grows if stepped past its horizon.
#[derive(Debug, Clone)]
pub struct Walker {
    model: NonlinearCoinModel,
    state: LatticeState,
    // Index range (inclusive) that may hold nonzero amplitudes.
    active: (usize, usize),
    time: u64,
}

impl Walker {
    pub fn new(model: NonlinearCoinModel, initial: &LatticeState, horizon: u64) -> Self {
        let pad = horizon as i64 + 1;
        let (lo, hi) = if initial.is_empty() {
            (0, 0)
        } else {
            (initial.window_min(), initial.window_max())
        };
        let state = initial.resized(lo - pad, hi + pad);
        let active = (pad as usize, (pad + hi - lo) as usize);
        Walker {
            model,
            state,
            active,
            time: 0,
        }
    }

    pub fn time(&self) -> u64 {
        self.time
    }

    pub fn model(&self) -> &NonlinearCoinModel {
        &self.model
    }

    /// Current state on the full pre-sized window.
    pub fn state(&self) -> &LatticeState {
        &self.state
    }

    pub fn into_state(self) -> LatticeState {
        self.state
    }

    fn ensure_margin(&mut self) {
        let (lo, hi) = self.active;
        if lo >= 1 && hi + 1 < self.state.len() {
            return;
        }
        let extra = self.state.len().max(16) as i64;
        let new_lo = self.state.window_min() - extra;
        let new_hi = self.state.window_max() + extra;
        self.state = self.state.resized(new_lo, new_hi);
        self.active = (lo + extra as usize, hi + extra as usize);
    }

    pub fn step(&mut self) {
        self.ensure_margin();
        let (lo, hi) = self.active;
        let model = self.model;
        let amps = self.state.amplitudes_mut();
        for s in &mut amps[lo..=hi] {
            *s = model.coin_for(s.up, s.down).apply(*s);
        }
        shift_in_place(amps, lo, hi);
        self.active = (lo - 1, hi + 1);
        self.time += 1;
    }

    pub fn advance(&mut self, steps: u64) {
        for _ in 0..steps {
            self.step();
        }
    }
}

// (S u)(x) = (u1(x+1), u2(x-1)) on indices; `lo - 1` and `hi + 1` must exist.
fn shift_in_place(amps: &mut [Spinor], lo: usize, hi: usize) {
    for i in lo - 1..=hi {
        amps[i].up = amps[i + 1].up;
    }
    for i in (lo..=hi + 1).rev() {
        amps[i].down = amps[i - 1].down;
    }
    amps[lo - 1].down = Default::default();
    amps[hi + 1].up = Default::default();
}

// (S^{-1} u)(x) = (u1(x-1), u2(x+1)) on indices.
fn shift_inverse_in_place(amps: &mut [Spinor], lo: usize, hi: usize) {
    for i in (lo..=hi + 1).rev() {
        amps[i].up = amps[i - 1].up;
    }
    for i in lo - 1..=hi {
        amps[i].down = amps[i + 1].down;
    }
    amps[lo - 1].up = Default::default();
    amps[hi + 1].down = Default::default();
}

/// `U0^{-steps} u`, computed in place on a window pre-sized for the spread.
pub fn back_propagate_linear(u: &LatticeState, coin: &BaseCoin, steps: u64) -> LatticeState {
    let Some((lo, hi)) = u.support() else {
        return u.clone();
    };
    let pad = steps as i64 + 1;
    let mut state = u.resized(lo - pad, hi + pad);
    let c0_adj = coin.matrix().adjoint();
    let (mut a, mut b) = (pad as usize, (pad + hi - lo) as usize);
    let amps = state.amplitudes_mut();
    for _ in 0..steps {
        shift_inverse_in_place(amps, a, b);
        a -= 1;
        b += 1;
        for s in &mut amps[a..=b] {
            *s = c0_adj.apply(*s);
        }
    }
    state
}

/// `U(T) u0` for the configured horizon.
pub fn evolve(config: &WalkConfig) -> LatticeState {
    evolve_with(config, |_, _| {})
}

/// Evolves to the horizon, calling `observe(t, u(t))` for `t = 0..=T`.
pub fn evolve_with<F>(config: &WalkConfig, mut observe: F) -> LatticeState
where
    F: FnMut(u64, &LatticeState),
{
    let mut walker = Walker::new(config.model, &config.initial, config.horizon);
    observe(0, walker.state());
    for _ in 0..config.horizon {
        walker.step();
        observe(walker.time(), walker.state());
    }
    walker.into_state()
}

/// The full trajectory `u(0), ..., u(T)`.
pub fn evolve_trajectory(config: &WalkConfig) -> Vec<LatticeState> {
    let mut out = Vec::with_capacity(config.horizon as usize + 1);
    evolve_with(config, |_, u| out.push(u.clone()));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coins::CoinFamily;
    use num_complex::Complex64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn up() -> Spinor {
        Spinor::from_parts(1.0, 0.0, 0.0, 0.0)
    }

    fn down() -> Spinor {
        Spinor::from_parts(0.0, 0.0, 1.0, 0.0)
    }

    fn random_state(seed: u64, lo: i64, len: usize) -> LatticeState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let amps: Vec<Spinor> = (0..len)
            .map(|_| {
                Spinor::from_parts(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                )
            })
            .collect();
        let s = LatticeState::new(lo, amps);
        let n = s.norm_l2();
        s.scaled(Complex64::new(1.0 / n, 0.0))
    }

    fn scalar(m: u32, kappa: f64, g: f64) -> NonlinearCoinModel {
        NonlinearCoinModel::new(BaseCoin::hadamard(), CoinFamily::ScalarPhase, m, kappa, g).unwrap()
    }

    #[test]
    fn shift_moves_components_apart() {
        assert_eq!(apply_shift(&LatticeState::point(0, up())), LatticeState::point(-1, up()));
        assert_eq!(apply_shift(&LatticeState::point(0, down())), LatticeState::point(1, down()));
    }

    #[test]
    fn shift_inverse_round_trip_is_exact() {
        let u = random_state(1, -5, 20);
        assert_eq!(apply_shift_inverse(&apply_shift(&u)), u);
        assert_eq!(apply_shift(&apply_shift_inverse(&u)), u);
    }

    #[test]
    fn coin_on_linear_and_zero() {
        let coin = BaseCoin::hadamard();
        let u = random_state(2, 0, 8);
        let lin = NonlinearCoinModel::linear(coin);
        let out = apply_coin(&u, &lin);
        for (x, s) in u.iter() {
            assert_eq!(out.at(x), coin.matrix().apply(s));
        }
        let zero = LatticeState::zeros(-2, 5);
        assert_eq!(apply_coin(&zero, &scalar(2, 1.0, 1.0)), zero);
    }

    #[test]
    fn scalar_phase_coin_at_unit_intensity() {
        let model = scalar(2, 1.0, 1.0);
        let out = apply_coin(&LatticeState::point(0, up()), &model);
        let expected = model
            .base
            .matrix()
            .apply(up())
            .scale(Complex64::from_polar(1.0, 1.0));
        assert!((out.at(0) - expected).norm() < 1e-15);
    }

    #[test]
    fn hadamard_single_step() {
        let h = FRAC_1_SQRT_2;
        let out = step(&LatticeState::point(0, up()), &NonlinearCoinModel::linear(BaseCoin::hadamard()));
        // C0 (1,0) = (h, -h); the up part moves left, the down part right.
        assert!((out.at(-1) - Spinor::from_parts(h, 0.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((out.at(1) - Spinor::from_parts(0.0, 0.0, -h, 0.0)).norm() < 1e-15);
        assert_eq!(out.at(0), Spinor::ZERO);
        let p = out.position_distribution().unwrap();
        assert!((p.get(-1) - 0.5).abs() < 1e-15);
        assert!((p.get(1) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn zero_coupling_matches_linear_bit_for_bit() {
        let u = random_state(3, -3, 9);
        let coin = BaseCoin::hadamard();
        assert_eq!(step(&u, &scalar(2, 1.0, 0.0)), step_linear(&u, &coin));
        assert_eq!(step(&u, &NonlinearCoinModel::linear(coin)), step_linear(&u, &coin));
    }

    #[test]
    fn linear_inverse_round_trip() {
        let coin = BaseCoin::hadamard();
        let u = random_state(4, -32, 64);
        let back = step_linear_inverse(&step_linear(&u, &coin), &coin);
        assert!(back.distance(&u) < 1e-14);
    }

    #[test]
    fn repeated_round_trip_error_is_linear_in_time() {
        let coin = BaseCoin::new(Complex64::new(0.6, 0.3), Complex64::new(0.2, (1.0f64 - 0.49).sqrt())).unwrap();
        let u = random_state(5, -10, 21);
        let t = 256;
        let mut w = u.clone();
        for _ in 0..t {
            w = step_linear(&w, &coin);
        }
        let w = back_propagate_linear(&w, &coin, t);
        assert!(w.distance(&u) <= t as f64 * 1e-14);
    }

    #[test]
    fn walker_matches_functional_steps_bit_for_bit() {
        let model = scalar(3, 1.0, 0.7);
        let u = random_state(6, -4, 9);
        let mut walker = Walker::new(model, &u, 5);
        let mut reference = u.clone();
        for _ in 0..12 {
            walker.step();
            reference = step(&reference, &model);
            assert_eq!(walker.state(), &reference);
        }
    }

    #[test]
    fn in_place_back_propagation_matches_functional() {
        let coin = BaseCoin::hadamard();
        let u = random_state(7, 0, 6);
        let mut reference = u.clone();
        for _ in 0..10 {
            reference = step_linear_inverse(&reference, &coin);
        }
        assert_eq!(back_propagate_linear(&u, &coin, 10), reference);
    }

    #[test]
    fn evolve_horizon_zero_and_one() {
        let coin = BaseCoin::hadamard();
        let u0 = LatticeState::point(0, up());
        let cfg = WalkConfig::new(NonlinearCoinModel::linear(coin), u0.clone(), 0).unwrap();
        assert_eq!(evolve(&cfg), u0);
        let cfg = WalkConfig { horizon: 1, ..cfg };
        assert_eq!(evolve(&cfg), step_linear(&u0, &coin));
    }

    #[test]
    fn light_cone() {
        let u0 = random_state(8, -2, 5);
        let cfg = WalkConfig::new(scalar(2, 1.0, 1.0), u0, 30).unwrap();
        for (t, u) in evolve_trajectory(&cfg).iter().enumerate() {
            let (lo, hi) = u.support().unwrap();
            assert!(lo >= -2 - t as i64 && hi <= 2 + t as i64);
        }
    }

    #[test]
    fn norm_after_many_steps() {
        let coin = BaseCoin::hadamard();
        for family in [CoinFamily::Linear, CoinFamily::ScalarPhase, CoinFamily::DiagonalPhase] {
            let model = NonlinearCoinModel::new(coin, family, 2, 1.0, 1.0).unwrap();
            let cfg = WalkConfig::new(model, LatticeState::point(0, up()), 1000).unwrap();
            let u = evolve(&cfg);
            assert!((u.norm_l2() - 1.0).abs() <= 1e-10);
        }
    }

    #[test]
    fn scaling_identity() {
        let u0 = random_state(9, -3, 7);
        let g = 0.37;
        for family in [CoinFamily::ScalarPhase, CoinFamily::DiagonalPhase] {
            let model = NonlinearCoinModel::new(BaseCoin::hadamard(), family, 2, 1.0, g).unwrap();
            let direct = evolve(&WalkConfig::new(model, u0.clone(), 40).unwrap());
            let mut walker = Walker::new(model.with_coupling(1.0), &u0.scaled(Complex64::new(g.sqrt(), 0.0)), 40);
            walker.advance(40);
            let rescaled = walker.state().scaled(Complex64::new(1.0 / g.sqrt(), 0.0));
            for x in direct.window_min()..=direct.window_max() {
                let d = direct.at(x) - rescaled.at(x);
                assert!(d.up.norm() <= 1e-12 && d.down.norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn walker_grows_past_horizon() {
        let model = scalar(2, 1.0, 1.0);
        let u0 = LatticeState::point(0, up());
        let mut short = Walker::new(model, &u0, 2);
        let mut long = Walker::new(model, &u0, 50);
        short.advance(50);
        long.advance(50);
        assert_eq!(short.state(), long.state());
    }

    #[test]
    fn rejects_unnormalized_config() {
        let r = WalkConfig::new(NonlinearCoinModel::linear(BaseCoin::hadamard()), LatticeState::point(0, up() * 0.5), 3);
        assert!(matches!(r, Err(Error::NotNormalized { .. })));
    }
}
