//! Extraction of the asymptotic state `u+` as the limit of
//! `v_T = U0^{-T} U(T) u0`, stopped by a Cauchy criterion on doubling `T`.

use serde::Serialize;

use crate::coins::NonlinearCoinModel;
use crate::dynamics::{back_propagate_linear, Walker};
use crate::error::{Error, Result};
use crate::lattice::LatticeState;

pub const DEFAULT_TOL: f64 = 1e-6;
pub const DEFAULT_T_MAX: u64 = 4096;
/// First checkpoint of the doubling schedule.
pub const FIRST_CHECKPOINT: u64 = 16;

/// One Cauchy check: `defect = ||v_{2T} - v_T||`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DefectSample {
    #[serde(rename = "T")]
    pub t: u64,
    pub defect: f64,
}

#[derive(Debug, Clone)]
pub struct ScatteringResult {
    pub u_plus: LatticeState,
    pub trace: Vec<DefectSample>,
    pub converged: bool,
    /// Time at which `u_plus` was computed.
    pub final_t: u64,
    /// Squared norm of `u_plus` outside `[-final_t, final_t]`.
    pub tail_mass: f64,
}

impl ScatteringResult {
    pub fn last_defect(&self) -> Option<f64> {
        self.trace.last().map(|s| s.defect)
    }
}

/// `v_T = U0^{-T} U(T) u0`.
///
/// When the model is exactly linear `U(T) = U0^T`, so `v_T = u0` is returned
/// without round-trip arithmetic.
pub fn back_propagated(u0: &LatticeState, model: &NonlinearCoinModel, t: u64) -> LatticeState {
    if model.is_linear() {
        return u0.clone();
    }
    let mut walker = Walker::new(*model, u0, t);
    walker.advance(t);
    back_propagate_linear(walker.state(), &model.base, t).trimmed()
}

/// Doubles `T` from 16 until `||v_{2T} - v_T|| < tol` or `2T > t_max`.
///
/// Failing to converge is reported through `converged`, not as an error.
pub fn extract_asymptotic(
    u0: &LatticeState,
    model: &NonlinearCoinModel,
    tol: f64,
    t_max: u64,
) -> Result<ScatteringResult> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tol must be > 0, got {tol}")));
    }
    if !t_max.is_power_of_two() || t_max < FIRST_CHECKPOINT {
        return Err(Error::InvalidArgument(format!(
            "t_max must be a power of two >= {FIRST_CHECKPOINT}, got {t_max}"
        )));
    }

    let mut t = FIRST_CHECKPOINT;
    let mut trace = Vec::new();
    let mut converged = false;

    let mut v_prev;
    if model.is_linear() {
        v_prev = u0.clone();
        while 2 * t <= t_max {
            let v_next = u0.clone();
            let defect = v_next.distance(&v_prev);
            trace.push(DefectSample { t, defect });
            v_prev = v_next;
            t *= 2;
            if defect < tol {
                converged = true;
                break;
            }
        }
    } else {
        // The forward state is resumed across checkpoints; each checkpoint
        // back-propagates a fresh copy.
        let mut walker = Walker::new(*model, u0, t_max);
        walker.advance(t);
        v_prev = back_propagate_linear(walker.state(), &model.base, t).trimmed();
        while 2 * t <= t_max {
            walker.advance(t);
            let v_next = back_propagate_linear(walker.state(), &model.base, 2 * t).trimmed();
            let defect = v_next.distance(&v_prev);
            trace.push(DefectSample { t, defect });
            v_prev = v_next;
            t *= 2;
            if defect < tol {
                converged = true;
                break;
            }
        }
    }

    let tail_mass = v_prev.mass_outside(-(t as i64), t as i64);
    Ok(ScatteringResult {
        u_plus: v_prev,
        trace,
        converged,
        final_t: t,
        tail_mass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coins::{BaseCoin, CoinFamily};
    use crate::lattice::Spinor;

    fn up() -> LatticeState {
        LatticeState::point(0, Spinor::from_parts(1.0, 0.0, 0.0, 0.0))
    }

    fn model(family: CoinFamily, m: u32, g: f64) -> NonlinearCoinModel {
        NonlinearCoinModel::new(BaseCoin::hadamard(), family, m, 1.0, g).unwrap()
    }

    #[test]
    fn zero_coupling_is_identity() {
        let m = model(CoinFamily::ScalarPhase, 3, 0.0);
        for t in [0, 1, 16, 100] {
            assert_eq!(back_propagated(&up(), &m, t), up());
        }
        assert_eq!(back_propagated(&up(), &model(CoinFamily::ScalarPhase, 3, 0.1), 0), up());
    }

    #[test]
    fn linear_converges_at_first_check() {
        let r = extract_asymptotic(&up(), &NonlinearCoinModel::linear(BaseCoin::hadamard()), 1e-6, 4096).unwrap();
        assert!(r.converged);
        assert_eq!(r.trace.len(), 1);
        assert_eq!(r.trace[0].defect, 0.0);
        assert_eq!(r.u_plus, up());
    }

    #[test]
    fn defects_decrease_for_cubic_scalar_phase() {
        let m = model(CoinFamily::ScalarPhase, 3, 0.1);
        let ts = [16u64, 32, 64, 128, 256];
        let defects: Vec<f64> = ts
            .iter()
            .map(|&t| back_propagated(&up(), &m, 2 * t).distance(&back_propagated(&up(), &m, t)))
            .collect();
        for w in defects.windows(2) {
            assert!(w[1] < w[0], "{defects:?}");
        }
        for t in ts {
            let v = back_propagated(&up(), &m, t);
            assert!((v.norm_l2() - 1.0).abs() <= t as f64 * 1e-13);
        }
    }

    // Regression fixtures from runs of the simulator: the Cauchy defect
    // scales like g^3 and decays roughly like 1/T.
    #[test]
    fn cubic_scalar_phase_scatters() {
        let m = model(CoinFamily::ScalarPhase, 3, 0.05);
        let r = extract_asymptotic(&up(), &m, 1e-6, 4096).unwrap();
        assert!(r.converged);
        assert_eq!(r.final_t, 1024);
        assert!((r.u_plus.norm_l2() - 1.0).abs() < 1e-9);
        assert!(r.trace.iter().all(|s| s.defect >= 0.0));
        let first = r.trace.first().unwrap().defect;
        assert!(r.last_defect().unwrap() * 10.0 < first);
        assert!(r.tail_mass < 1e-12);
    }

    #[test]
    fn stronger_coupling_needs_longer_times() {
        let m = model(CoinFamily::ScalarPhase, 3, 0.1);
        let r = extract_asymptotic(&up(), &m, 1e-6, 4096).unwrap();
        assert!(!r.converged);
        assert_eq!(r.final_t, 4096);
        let last = r.last_defect().unwrap();
        assert!(last > 1e-6 && last < 1.4e-6, "{last}");
        let r = extract_asymptotic(&up(), &m, 1e-6, 8192).unwrap();
        assert!(r.converged);
        assert_eq!(r.final_t, 8192);
    }

    #[test]
    fn defect_scales_with_cube_of_coupling() {
        let d = |g| {
            let m = model(CoinFamily::ScalarPhase, 3, g);
            back_propagated(&up(), &m, 64).distance(&back_propagated(&up(), &m, 32))
        };
        let ratio = d(0.1) / d(0.05);
        assert!((ratio - 8.0).abs() < 0.1, "{ratio}");
    }

    #[test]
    fn strong_diagonal_phase_does_not_converge() {
        let m = model(CoinFamily::DiagonalPhase, 1, 5.0);
        let r = extract_asymptotic(&up(), &m, 1e-6, 1024).unwrap();
        assert!(!r.converged);
        assert!(r.trace.iter().all(|s| s.defect > 1.0));
        assert!((r.u_plus.norm_l2() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_arguments() {
        let m = model(CoinFamily::ScalarPhase, 3, 0.1);
        assert!(extract_asymptotic(&up(), &m, 0.0, 4096).is_err());
        assert!(extract_asymptotic(&up(), &m, 1e-6, 1000).is_err());
    }
}

