//! Critically periodic quadratic maps `z^2 + c` and the psi polynomials.
//!
//! Trivial-kneading escape regions of S_p are indexed by period-p centers of
//! the Mandelbrot set, and satellite regions carry a period-r center for
//! r = p/n.  The psi polynomials evaluate the derivative `da/dt` of the
//! canonical parameter along the associated orbit.

use crate::poly::Poly;
use crate::{c64, Complex64};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum QuadError {
    #[error("root finding stalled for period {0}")]
    RootFindingStalled(usize),
}

/// A center of a period-r hyperbolic component of the Mandelbrot set,
/// together with its critical orbit `0 -> c_1 -> ... -> c_{r-1} -> 0`.
#[derive(Debug, Clone, Serialize)]
pub struct QuadraticCenter {
    pub c: Complex64,
    pub r: usize,
    /// The nonzero orbit points `c_1, ..., c_{r-1}`.
    pub orbit: Vec<Complex64>,
}

impl QuadraticCenter {
    /// `psi_r(2 c_1, ..., 2 c_{r-1})`; nonzero for every center.
    pub fn psi(&self) -> Complex64 {
        psi_eval(&self.orbit.iter().map(|&c| 2.0 * c).collect::<Vec<_>>())
    }

    /// Conventional nickname for the small-period centers, when one exists.
    pub fn nickname(&self) -> Option<&'static str> {
        const NAMES: &[(f64, f64, &str)] = &[
            (0.0, 0.0, "z^2"),
            (-1.0, 0.0, "basilica"),
            (-0.122561, 0.744862, "rabbit"),
            (-0.122561, -0.744862, "corabbit"),
            (-1.754878, 0.0, "airplane"),
            (-0.156520, 1.032247, "kokopelli"),
            (-0.156520, -1.032247, "kokopelli*"),
            (0.282271, 0.530061, "(1/4)-rabbit"),
            (0.282271, -0.530061, "(1/4)-rabbit*"),
            (-1.940800, 0.0, "worm"),
            (-1.310703, 0.0, "double-basilica"),
        ];
        NAMES
            .iter()
            .find(|(re, im, _)| (self.c - c64(*re, *im)).norm() < 1e-4)
            .map(|(_, _, name)| *name)
    }
}

/// Evaluate `psi_{j+1}(x_1, ..., x_j)` by the recurrence
/// `psi_{k+1} = psi_k * x_k + 1`, `psi_1 = 1`.
pub fn psi_eval(xs: &[Complex64]) -> Complex64 {
    let mut acc = c64(1.0, 0.0);
    for &x in xs {
        acc = acc * x + 1.0;
    }
    acc
}

/// All centers of period exactly r, via the roots of the degree 2^(r-1)
/// polynomial `Q_c^r(0)` in c, Newton-polished and filtered to minimal
/// period.  Deterministic ordering by real then imaginary part.
pub fn centers(r: usize) -> Result<Vec<QuadraticCenter>, QuadError> {
    assert!(r >= 1);
    if r == 1 {
        return Ok(vec![QuadraticCenter { c: c64(0.0, 0.0), r: 1, orbit: Vec::new() }]);
    }
    // orbit polynomial z_k(c): z_1 = c, z_{k+1} = z_k^2 + c
    let mut zk = Poly::new(vec![c64(0.0, 0.0), c64(1.0, 0.0)]);
    for _ in 1..r {
        zk = zk.mul(&zk).add(&Poly::new(vec![c64(0.0, 0.0), c64(1.0, 0.0)]));
    }
    let raw = zk.roots().ok_or(QuadError::RootFindingStalled(r))?;

    let mut out = Vec::new();
    for c0 in raw {
        let c = polish_center(c0, r);
        // minimal-period filter: no earlier return of the critical orbit
        let mut z = c64(0.0, 0.0);
        let mut orbit = Vec::new();
        let mut minimal = true;
        for k in 1..=r {
            z = z * z + c;
            if k < r {
                if z.norm() < 1e-8 {
                    minimal = false;
                    break;
                }
                orbit.push(z);
            }
        }
        if !minimal || z.norm() > 1e-8 {
            continue;
        }
        out.push(QuadraticCenter { c, r, orbit });
    }
    out.sort_by(|a, b| {
        (a.c.re, a.c.im)
            .partial_cmp(&(b.c.re, b.c.im))
            .unwrap()
    });
    out.dedup_by(|a, b| (a.c - b.c).norm() < 1e-8);
    Ok(out)
}

/// Newton steps on `c -> Q_c^r(0)` with the derivative propagated along the
/// orbit.
fn polish_center(mut c: Complex64, r: usize) -> Complex64 {
    for _ in 0..50 {
        let mut z = c64(0.0, 0.0);
        let mut dz = c64(0.0, 0.0);
        for _ in 0..r {
            dz = 2.0 * z * dz + 1.0;
            z = z * z + c;
        }
        if dz.norm() == 0.0 {
            break;
        }
        let step = z / dz;
        c -= step;
        if step.norm() < 1e-15 * (1.0 + c.norm()) {
            break;
        }
    }
    c
}

/// Expected number of period-r centers: `2^(r-1)` minus the centers of all
/// proper divisors.
pub fn center_count(r: usize) -> u64 {
    let mut counts = vec![0u64; r + 1];
    for k in 1..=r {
        let mut c = 1u64 << (k - 1);
        for d in 1..k {
            if k % d == 0 {
                c -= counts[d];
            }
        }
        counts[k] = c;
    }
    counts[r]
}
