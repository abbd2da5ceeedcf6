//! Empirical fixed-point search for a map with prescribed kneading.
//!
//! Given `a` (not too small), a kneading sequence and a rough guess for `v`,
//! sweep the orbit coordinates `w_j = (a - a_j)/(3a)` backwards through the
//! update maps
//!
//! ```text
//!   sigma_j = 0:  w_j <- w_j sqrt(xi^2 (w_{j+1} - w_1) / (w_j^2 (w_j - 1)))
//!   sigma_j = 1:  w_j <- 1 + xi^2 (w_{j+1} - w_1) / w_j^2
//! ```
//!
//! whose fixed points are exactly the solutions of the orbit equations.
//! There is no convergence proof, and near region boundaries the iteration
//! can settle on a map with a different kneading sequence, so outcomes are
//! reported as data rather than asserted.

use crate::dynamics::{classify, phi_and_dv, CubicMap, DynError};
use crate::solver::KneadingSequence;
use crate::{c64, Complex64};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum FinderError {
    #[error("division by zero in the update map at component {0}")]
    DivisionByZero(usize),
    #[error(transparent)]
    Dyn(#[from] DynError),
}

#[derive(Debug, Clone)]
pub struct FinderConfig {
    pub a: Complex64,
    pub kneading: KneadingSequence,
    /// Sweep convergence threshold on max |delta w_j|.
    pub tol: f64,
    pub max_sweeps: usize,
}

impl FinderConfig {
    pub fn new(a: Complex64, kneading: KneadingSequence) -> Self {
        FinderConfig { a, kneading, tol: 1e-12, max_sweeps: 500 }
    }
}

/// What a finder run produced.
#[derive(Debug, Clone)]
pub enum FinderOutcome {
    /// Landed on the curve with the requested kneading.
    Converged { v: Complex64, sweeps: usize },
    /// Landed on the curve, but in a region with different kneading.
    WrongKneading { v: Complex64, found: Option<KneadingSequence>, sweeps: usize },
    /// Sweep budget exhausted.
    NotConverged { last_delta: f64 },
}

/// One update `Psi_j(w_1, w_j, w_{j+1})`.  The square root takes the branch
/// defined on the right half-plane (principal), per the construction.
pub fn psi_step(
    j: usize,
    w1: Complex64,
    wj: Complex64,
    wj1: Complex64,
    xi: Complex64,
    sigma_j: u8,
) -> Result<Complex64, FinderError> {
    if sigma_j == 0 {
        let denom = wj * wj * (wj - 1.0);
        if denom.norm() < 1e-300 {
            return Err(FinderError::DivisionByZero(j));
        }
        let ratio = xi * xi * (wj1 - w1) / denom;
        Ok(wj * ratio.sqrt())
    } else {
        let denom = wj * wj;
        if denom.norm() < 1e-300 {
            return Err(FinderError::DivisionByZero(j));
        }
        Ok(1.0 + xi * xi * (wj1 - w1) / denom)
    }
}

fn residual(w: &[Complex64], xi: Complex64) -> f64 {
    let p = w.len() + 1;
    let mut worst = 0.0f64;
    for j in 1..p {
        let wj = w[j - 1];
        let wj1 = if j + 1 == p { c64(0.0, 0.0) } else { w[j] };
        let e = xi * xi * (wj1 - w[0]) - wj * wj * (wj - 1.0);
        worst = worst.max(e.norm());
    }
    worst
}

/// Run the sweeps from an initial guess `v0` and report the outcome together
/// with the final parameter point.  On convergence the curve condition and
/// the kneading are verified numerically.
pub fn find_v(cfg: &FinderConfig, v0: Complex64) -> Result<FinderOutcome, FinderError> {
    let p = cfg.kneading.period();
    let a = cfg.a;
    if p == 1 {
        // Phi_1 = v - a
        return Ok(FinderOutcome::Converged { v: a, sweeps: 0 });
    }
    let xi = 1.0 / (3.0 * a);
    let map0 = CubicMap::new(a, v0);
    let orbit = map0.orbit(a, p - 1);
    let mut w: Vec<Complex64> = (1..p).map(|j| (a - orbit[j]) / (3.0 * a)).collect();

    let mut damping = false;
    let mut shrink_streak = 0usize;
    let mut prev_residual = residual(&w, xi);
    let mut last_delta = f64::MAX;
    for sweep in 0..cfg.max_sweeps {
        let mut delta = 0.0f64;
        for j in (1..p).rev() {
            let wj1 = if j + 1 == p { c64(0.0, 0.0) } else { w[j] };
            let mut next = psi_step(j, w[0], w[j - 1], wj1, xi, cfg.kneading.bit(j))?;
            if damping {
                next = w[j - 1] + 0.5 * (next - w[j - 1]);
            }
            delta = delta.max((next - w[j - 1]).norm());
            w[j - 1] = next;
        }
        last_delta = delta;

        let res = residual(&w, xi);
        if res > prev_residual {
            damping = true;
            shrink_streak = 0;
        } else {
            shrink_streak += 1;
            if shrink_streak >= 3 {
                damping = false;
            }
        }
        prev_residual = res;

        if delta < cfg.tol {
            let raw = a * (1.0 - 3.0 * w[0]);
            // verify the fixed point is on the curve with the right kneading
            let polished = crate::dynamics::polish_fiber_root(a, raw, p);
            let on_curve = polished.is_some();
            let v = polished.unwrap_or(raw);
            let found = classify(&CubicMap::new(a, v), p)
                .ok()
                .and_then(|c| c.kneading);
            if on_curve && found.as_ref() == Some(&cfg.kneading) {
                return Ok(FinderOutcome::Converged { v, sweeps: sweep + 1 });
            }
            return Ok(FinderOutcome::WrongKneading { v, found, sweeps: sweep + 1 });
        }
    }
    Ok(FinderOutcome::NotConverged { last_delta })
}
