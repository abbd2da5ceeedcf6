//! Series solutions of the fundamental orbit equations.
//!
//! With `u_j = (a - a_j)/(3a)` and `xi = 1/(3a)`, the period-p condition on
//! the marked critical orbit is equivalent to the system
//!
//! ```text
//!     E_j(u) = xi^2 (u_{j+1} - u_1) - u_j^2 (u_j - 1) = 0,   0 < j < p,
//! ```
//!
//! with `u_p = 0`.  Every escape region of S_p corresponds to a Galois
//! conjugacy class of Puiseux-series solutions, and each solution is pinned
//! down by its vector of leading monomials.  This module builds seeds from
//! monomial data (primitive regions), from quadratic centers (trivial
//! kneading), or from a lower-period solution plus a quadratic orbit
//! (satellites), and refines them to a requested truncation.

use crate::series::{key_for, lcm, Monomial, PuiseuxSeries, SeriesError};
use crate::{c64, Complex64, Exponent};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coefficients at or below this magnitude count as zero when measuring
/// residual orders.
pub const RESIDUAL_TOL: f64 = 1e-9;

/// Default truncation, in integral powers of xi.
pub const DEFAULT_TRUNC: i64 = 12;

#[derive(Debug, Error)]
pub enum SolveError {
    #[error("seed rejected at component {j}: {reason}")]
    SeedRejected { j: usize, reason: String },
    #[error("inconsistent seed at component {j}")]
    InconsistentSeed { j: usize },
    #[error("{0} is not a period-{1} center of the Mandelbrot set")]
    NotACenter(Complex64, usize),
    #[error("singular linear system while refining")]
    SingularSystem,
    #[error("no progress after {0} refinement sweeps")]
    NoProgress(usize),
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// Period-p kneading sequence; the final bit is always zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct KneadingSequence {
    bits: Vec<u8>,
}

impl KneadingSequence {
    pub fn new(bits: Vec<u8>) -> Option<Self> {
        if bits.is_empty() || *bits.last().unwrap() != 0 || bits.iter().any(|&b| b > 1) {
            return None;
        }
        Some(KneadingSequence { bits })
    }

    pub fn parse(s: &str) -> Option<Self> {
        let bits: Option<Vec<u8>> = s
            .chars()
            .map(|c| match c {
                '0' => Some(0),
                '1' => Some(1),
                _ => None,
            })
            .collect();
        Self::new(bits?)
    }

    pub fn period(&self) -> usize {
        self.bits.len()
    }

    pub fn bit(&self, j: usize) -> u8 {
        // 1-based along the orbit, periodic; sigma_0 = sigma_p = 0
        self.bits[(j + self.bits.len() - 1) % self.bits.len()]
    }

    pub fn bits(&self) -> &[u8] {
        &self.bits
    }

    pub fn is_trivial(&self) -> bool {
        self.bits.iter().all(|&b| b == 0)
    }

    /// Minimal period of the repeated bit pattern (divides p).
    pub fn pattern_period(&self) -> usize {
        let p = self.bits.len();
        (1..=p)
            .filter(|n| p % n == 0)
            .find(|&n| (0..p).all(|j| self.bits[j] == self.bits[j % n]))
            .unwrap()
    }

    /// Number of series solutions with this kneading, counted with
    /// multiplicity: `2^(sum of (1 - sigma_j))`.
    pub fn solution_count(&self) -> u64 {
        let zeros = self.bits[..self.bits.len() - 1].iter().filter(|&&b| b == 0).count();
        1u64 << zeros
    }
}

impl std::fmt::Display for KneadingSequence {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for b in &self.bits {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

/// A solved (or candidate) vector `u_1, ..., u_p` with `u_p = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionVector {
    p: usize,
    u: Vec<PuiseuxSeries>,
}

impl SolutionVector {
    /// Build from the interior components `u_1 ... u_{p-1}`; `u_p = 0` is
    /// appended with the common ambient ramification and truncation.
    pub fn from_interior(interior: Vec<PuiseuxSeries>) -> Self {
        let p = interior.len() + 1;
        let mu = interior.iter().map(|s| s.mu()).fold(1, lcm);
        let mut u: Vec<PuiseuxSeries> = interior.into_iter().map(|s| s.with_mu(mu)).collect();
        let trunc = u.iter().map(|s| s.trunc()).min().unwrap_or(crate::series::TRUNC_INF);
        u.push(PuiseuxSeries::zero(mu, trunc));
        SolutionVector { p, u }
    }

    /// The degenerate period-1 solution (empty interior).
    pub fn period_one(trunc_xi: i64) -> Self {
        SolutionVector { p: 1, u: vec![PuiseuxSeries::zero(1, trunc_xi)] }
    }

    pub fn period(&self) -> usize {
        self.p
    }

    pub fn mu(&self) -> i64 {
        self.u[0].mu()
    }

    pub fn trunc(&self) -> i64 {
        self.u.iter().map(|s| s.trunc()).min().unwrap()
    }

    /// Component `u_j` for `1 <= j <= p` (so `component(p)` is zero).
    pub fn component(&self, j: usize) -> &PuiseuxSeries {
        &self.u[j - 1]
    }

    pub fn interior(&self) -> &[PuiseuxSeries] {
        &self.u[..self.p - 1]
    }

    /// Leading monomials of the interior components.
    pub fn leading_monomials(&self) -> Result<Vec<Monomial>, SeriesError> {
        self.interior().iter().map(|s| s.leading_with_tol(RESIDUAL_TOL)).collect()
    }

    /// Orders of the interior components (must all be finite on solutions).
    pub fn orders(&self) -> Vec<Exponent> {
        self.interior()
            .iter()
            .map(|s| s.ord_with_tol(RESIDUAL_TOL).expect("interior component is zero"))
            .collect()
    }

    /// Kneading bits read off the constant terms `u_j(0)`.
    pub fn kneading(&self) -> Option<KneadingSequence> {
        let mut bits = Vec::with_capacity(self.p);
        for s in self.interior() {
            let c = s.coeff(0);
            if (c - c64(1.0, 0.0)).norm() < 1e-6 {
                bits.push(1);
            } else if c.norm() < 1e-6 {
                bits.push(0);
            } else {
                return None;
            }
        }
        bits.push(0);
        KneadingSequence::new(bits)
    }

    /// True when every residual has order >= trunc - 2 (in xi powers).
    pub fn is_solved(&self) -> bool {
        let target = self.trunc() - 2 * self.mu();
        error_vector(self).iter().all(|e| match e.ord_with_tol(residual_floor(self)) {
            None => true,
            Some(q) => key_for(q, self.mu()).map(|k| k >= target).unwrap_or(false),
        })
    }

    /// Galois conjugates under `xi^(1/mu) -> alpha xi^(1/mu)`; the escape
    /// region is the conjugacy class.
    pub fn galois_orbit(&self) -> Vec<SolutionVector> {
        (0..self.mu())
            .map(|b| SolutionVector {
                p: self.p,
                u: self.u.iter().map(|s| s.galois(b)).collect(),
            })
            .collect()
    }

    /// The solution of the dual region, `xi -> -xi`.
    pub fn dual(&self) -> SolutionVector {
        SolutionVector { p: self.p, u: self.u.iter().map(|s| s.dual()).collect() }
    }

    /// True if this solution is Galois-equivalent to `other` at tolerance `tol`.
    pub fn galois_equivalent(&self, other: &SolutionVector, tol: f64) -> bool {
        if self.p != other.p || self.mu() != other.mu() {
            return false;
        }
        other.galois_orbit().iter().any(|cand| {
            self.interior().iter().zip(cand.interior()).all(|(a, b)| {
                let d = a.sub(b);
                d.max_coeff() <= tol
            })
        })
    }
}

fn residual_floor(w: &SolutionVector) -> f64 {
    let scale = w.u.iter().map(|s| s.max_coeff()).fold(1.0, f64::max);
    RESIDUAL_TOL * scale
}

/// The defect `E_j(w) = xi^2 (w_{j+1} - w_1) - w_j^2 (w_j - 1)` for 0 < j < p.
pub fn error_vector(w: &SolutionVector) -> Vec<PuiseuxSeries> {
    let p = w.p;
    let mu = w.mu();
    let mut out = Vec::with_capacity(p - 1);
    for j in 1..p {
        let wj = w.component(j);
        let lin = w.component(j + 1).sub(w.component(1)).mul_xi_pow(2 * mu);
        let one = PuiseuxSeries::one(mu, wj.trunc());
        let cubic = wj.mul(wj).mul(&wj.sub(&one));
        out.push(lin.sub(&cubic));
    }
    out
}

/// `m* = (3 sigma - 2) m`: the linearization weight of the fundamental
/// recurrence.  For `sigma = 1` the monomial must be the constant 1.
pub fn star(m: &Monomial, sigma: u8) -> Result<Monomial, SolveError> {
    match sigma {
        1 => {
            if !m.is_one(1e-6) {
                return Err(SolveError::InconsistentSeed { j: 0 });
            }
            Ok(*m)
        }
        _ => Ok(m.scaled(c64(-2.0, 0.0))),
    }
}

/// One diagonal refinement sweep `w_j += E_j(w)/m_j*` (valid on the chart
/// where every `ord(m_j) < 2`).  Residual orders must already exceed
/// `2 max_j ord(m_j)`; each sweep then deepens them by at least `1/mu`.
pub fn refine_diagonal(w: &SolutionVector) -> Result<SolutionVector, SolveError> {
    let kneading = w.kneading().ok_or(SolveError::InconsistentSeed { j: 0 })?;
    let monomials = w.leading_monomials()?;
    let two = Exponent::from_integer(2);
    if let Some(j) = monomials.iter().position(|m| m.exp >= two) {
        return Err(SolveError::SeedRejected {
            j: j + 1,
            reason: "diagonal refinement needs ord(m_j) < 2".into(),
        });
    }
    let max_ord = monomials.iter().map(|m| m.exp).max().unwrap_or_else(|| 0.into());
    let errors = error_vector(w);
    let floor = residual_floor(w);
    for (idx, e) in errors.iter().enumerate() {
        if let Some(q) = e.ord_with_tol(floor) {
            if q <= max_ord * 2 {
                return Err(SolveError::SeedRejected {
                    j: idx + 1,
                    reason: format!("residual order {q} does not exceed 2 max ord(m) = {}", max_ord * 2),
                });
            }
        }
    }
    let mut u = Vec::with_capacity(w.p);
    let trunc = w.trunc();
    for j in 1..w.p {
        let mstar = star(&monomials[j - 1], kneading.bit(j))?;
        let mut next = w.component(j).add(&errors[j - 1].div_monomial(&mstar));
        next.set_trunc(trunc);
        u.push(next);
    }
    u.push(w.component(w.p).clone());
    Ok(SolutionVector { p: w.p, u })
}

/// Two-term seed from a vector of leading monomials and a kneading sequence.
///
/// Components with `sigma_j = 1` start as `1 + xi^2 (m_{j+1} - m_1)`; those
/// with `sigma_j = 0` start as the bare monomial.  The seed is accepted when
/// the residuals vanish modulo `xi^q` for some `q > 2 max_j ord(m_j)`; a
/// marginal seed (equality) gets one strictly-order-preserving correction
/// pass before the congruence is re-checked.
pub fn seed_from_monomials(
    monomials: &[Monomial],
    kneading: &KneadingSequence,
    trunc_xi: i64,
) -> Result<SolutionVector, SolveError> {
    let mut seed = two_term_seed(monomials, kneading, trunc_xi)?;
    let max_ord = monomials.iter().map(|m| m.exp).max().unwrap();
    let threshold = max_ord * 2;
    match congruence_margin(&seed, threshold) {
        Margin::Strict => Ok(seed),
        Margin::Equality => {
            // one completion step may supply missing second terms
            seed = newton_step(&seed, monomials)?;
            match congruence_margin(&seed, threshold) {
                Margin::Strict => Ok(seed),
                _ => Err(SolveError::SeedRejected {
                    j: worst_residual(&seed),
                    reason: "congruence of the refinement theorem cannot be met".into(),
                }),
            }
        }
        Margin::Below(j) => Err(SolveError::SeedRejected {
            j,
            reason: "residual order below 2 max ord(m); invalid monomial vector".into(),
        }),
    }
}

/// Build the two-term seed without the congruence gate (full refinement
/// still guards the leading monomials).  Used when the monomials come from
/// numerical estimates whose fuzz would trip the structural margin test.
pub fn two_term_seed(
    monomials: &[Monomial],
    kneading: &KneadingSequence,
    trunc_xi: i64,
) -> Result<SolutionVector, SolveError> {
    let p = kneading.period();
    assert_eq!(monomials.len(), p - 1, "need p-1 monomials");
    let mu = monomials.iter().map(|m| *m.exp.denom()).fold(1, lcm);
    let trunc = trunc_xi * mu;
    for (idx, m) in monomials.iter().enumerate() {
        let j = idx + 1;
        match kneading.bit(j) {
            1 => {
                if !m.is_one(1e-3) {
                    return Err(SolveError::SeedRejected {
                        j,
                        reason: "sigma_j = 1 requires m_j = 1".into(),
                    });
                }
            }
            _ => {
                if m.exp < Exponent::from_integer(1) {
                    return Err(SolveError::SeedRejected {
                        j,
                        reason: "sigma_j = 0 requires ord(m_j) >= 1".into(),
                    });
                }
            }
        }
    }

    let monomial_series = |idx: usize| -> PuiseuxSeries {
        // m_p = 0 by convention
        if idx == p {
            PuiseuxSeries::zero(mu, trunc)
        } else {
            PuiseuxSeries::from_monomial(&monomials[idx - 1], mu, trunc)
        }
    };

    let mut interior = Vec::with_capacity(p - 1);
    for j in 1..p {
        let w = if kneading.bit(j) == 1 {
            let diff = monomial_series(j + 1).sub(&monomial_series(1)).mul_xi_pow(2 * mu);
            PuiseuxSeries::one(mu, trunc).add(&diff)
        } else {
            monomial_series(j)
        };
        interior.push(w);
    }
    Ok(SolutionVector::from_interior(interior))
}

enum Margin {
    Strict,
    Equality,
    Below(usize),
}

/// Structural congruence test: residual coefficients from a wrong branch are
/// order one, so small numerical fuzz in estimated seeds is ignored.
fn congruence_margin(w: &SolutionVector, threshold: Exponent) -> Margin {
    let floor = 1e-3 * w.u.iter().map(|s| s.max_coeff()).fold(1.0, f64::max);
    let mut equality = false;
    for (idx, e) in error_vector(w).iter().enumerate() {
        match e.ord_with_tol(floor) {
            None => {}
            Some(q) if q > threshold => {}
            Some(q) if q == threshold => equality = true,
            Some(_) => return Margin::Below(idx + 1),
        }
    }
    if equality {
        Margin::Equality
    } else {
        Margin::Strict
    }
}

fn worst_residual(w: &SolutionVector) -> usize {
    let floor = residual_floor(w);
    error_vector(w)
        .iter()
        .enumerate()
        .filter_map(|(i, e)| e.ord_with_tol(floor).map(|q| (i + 1, q)))
        .min_by_key(|&(_, q)| q)
        .map(|(i, _)| i)
        .unwrap_or(1)
}

/// Solve the trivial-kneading region attached to a period-p center `c1` of
/// the Mandelbrot set: `u_j = -c_j xi^2 + ...` with even powers only, one
/// complex linear solve per even grade.
pub fn solve_trivial_kneading(
    c1: Complex64,
    p: usize,
    trunc_xi: i64,
) -> Result<SolutionVector, SolveError> {
    let orbit = quadratic_orbit(c1, p).ok_or(SolveError::NotACenter(c1, p))?;
    if p == 1 {
        return Ok(SolutionVector::period_one(trunc_xi));
    }
    let trunc = trunc_xi.max(4);
    let mut interior: Vec<PuiseuxSeries> = orbit
        .iter()
        .map(|&c| PuiseuxSeries::monomial_term(-c, 2, 1, trunc))
        .collect();

    loop {
        let w = SolutionVector::from_interior(interior.clone());
        let errors = error_vector(&w);
        let floor = residual_floor(&w);
        let grade = errors
            .iter()
            .filter_map(|e| e.ord_with_tol(floor))
            .min()
            .map(|q| q.to_integer());
        let grade = match grade {
            None => break,
            Some(g) if g >= trunc - 2 => break,
            Some(g) => g,
        };
        // corrections delta_j xi^(grade-2) kill the residual at this grade:
        //   delta_{j+1} - delta_1 - 2 c_j delta_j = -eps_j
        let n = p - 1;
        let mut a = vec![vec![c64(0.0, 0.0); n]; n];
        let mut b = vec![c64(0.0, 0.0); n];
        for j in 1..=n {
            let row = j - 1;
            a[row][0] += c64(-1.0, 0.0);
            if j + 1 <= n {
                a[row][j] += c64(1.0, 0.0);
            }
            a[row][j - 1] += -2.0 * orbit[j - 1];
            b[row] = -errors[j - 1].coeff(grade);
        }
        let delta = solve_complex_system(a, b).ok_or(SolveError::SingularSystem)?;
        for (j, d) in delta.iter().enumerate() {
            let bump = PuiseuxSeries::monomial_term(*d, grade - 2, 1, trunc);
            interior[j] = interior[j].add(&bump);
            interior[j].set_trunc(trunc);
        }
    }
    Ok(SolutionVector::from_interior(interior))
}

/// Critical orbit `c_1 -> ... -> c_{p-1}` of `z^2 + c1` when 0 has period
/// exactly p (within 1e-10); `None` otherwise.
pub fn quadratic_orbit(c1: Complex64, p: usize) -> Option<Vec<Complex64>> {
    let mut orbit = Vec::with_capacity(p - 1);
    let mut z = c64(0.0, 0.0);
    for j in 1..=p {
        z = z * z + c1;
        if j < p {
            if z.norm() < 1e-10 {
                return None; // lower period
            }
            orbit.push(z);
        }
    }
    if z.norm() > 1e-10 {
        return None;
    }
    Some(orbit)
}

/// The fixed monomial `lambda = -xi^(2n) / (m_1* ... m_{n-1}*)` of the
/// satellite construction.
pub fn satellite_lambda(base: &SolutionVector) -> Result<Monomial, SolveError> {
    let kneading = base.kneading().ok_or(SolveError::InconsistentSeed { j: 0 })?;
    let n = base.period();
    let mut coeff = c64(-1.0, 0.0);
    let mut exp = Exponent::from_integer(2 * n as i64);
    for (idx, m) in base.leading_monomials()?.iter().enumerate() {
        let s = star(m, kneading.bit(idx + 1))?;
        coeff /= s.coeff;
        exp -= s.exp;
    }
    Ok(Monomial { coeff, exp })
}

/// Leading monomials of the satellite of grid period n over `base`, attached
/// to the length-(r-1) critical orbit of a period-r quadratic center:
/// `m_{ni+j} = m_j(base)` and `m_{ni} = c_i lambda`.
pub fn satellite_monomials(
    base: &SolutionVector,
    c_orbit: &[Complex64],
) -> Result<Vec<Monomial>, SolveError> {
    let n = base.period();
    let r = c_orbit.len() + 1;
    let p = n * r;
    let lambda = satellite_lambda(base)?;
    let base_m = base.leading_monomials()?;
    let mut out = Vec::with_capacity(p - 1);
    for j in 1..p {
        if j % n == 0 {
            out.push(lambda.scaled(c_orbit[j / n - 1]));
        } else {
            out.push(base_m[j % n - 1]);
        }
    }
    Ok(out)
}

/// Full seed for a satellite region: base series repeat on the columns not
/// divisible by n, and the columns at multiples of n start as `c_i lambda`.
pub fn satellite_seed(
    base: &SolutionVector,
    c_orbit: &[Complex64],
    trunc_xi: i64,
) -> Result<SolutionVector, SolveError> {
    let n = base.period();
    let r = c_orbit.len() + 1;
    let p = n * r;
    let lambda = satellite_lambda(base)?;
    let mu = lcm(base.mu(), *lambda.exp.denom());
    let trunc = trunc_xi * mu;
    let mut interior = Vec::with_capacity(p - 1);
    for j in 1..p {
        let mut s = if j % n == 0 {
            PuiseuxSeries::from_monomial(&lambda.scaled(c_orbit[j / n - 1]), mu, trunc)
        } else {
            base.component(j % n).with_mu(mu)
        };
        s.set_trunc(trunc);
        interior.push(s);
    }
    Ok(SolutionVector::from_interior(interior))
}

/// Refine a seed until every residual has order >= trunc - 2, using full
/// Newton steps: the linearization
/// `E_j(w + d) ~ E_j(w) + xi^2 (d_{j+1} - d_1) - (3 w_j^2 - 2 w_j) d_j`
/// is solved as a (p-1) x (p-1) linear system over the truncated-series
/// field, which covers every grade at once.
pub fn solve_graded(seed: &SolutionVector, trunc_xi: i64) -> Result<SolutionVector, SolveError> {
    if seed.period() == 1 {
        return Ok(SolutionVector::period_one(trunc_xi));
    }
    let monomials = seed.leading_monomials()?;
    let mu = seed.mu();
    let trunc = trunc_xi * mu;
    let mut w = SolutionVector {
        p: seed.p,
        u: seed
            .u
            .iter()
            .map(|s| {
                let mut s = s.clone();
                s.set_trunc(trunc);
                s
            })
            .collect(),
    };

    let mut best_ord: Option<i64> = None;
    let mut stall = 0usize;
    for _ in 0..64 {
        let floor = residual_floor(&w);
        let errors = error_vector(&w);
        let worst = errors
            .iter()
            .filter_map(|e| e.ord_with_tol(floor).and_then(|q| key_for(q, mu)))
            .min();
        match worst {
            None => break,
            Some(k) if k >= trunc - 2 * mu => break,
            Some(k) => {
                if best_ord.map(|b| k <= b).unwrap_or(false) {
                    stall += 1;
                    if stall >= 3 {
                        return Err(SolveError::NoProgress(stall));
                    }
                } else {
                    stall = 0;
                    best_ord = Some(k);
                }
            }
        }
        w = newton_step(&w, &monomials)?;
    }

    let floor = residual_floor(&w);
    for (idx, e) in error_vector(&w).iter().enumerate() {
        if let Some(q) = e.ord_with_tol(floor) {
            if key_for(q, mu).map(|k| k < trunc - 2 * mu).unwrap_or(true) {
                return Err(SolveError::SeedRejected {
                    j: idx + 1,
                    reason: format!("residual order {q} below target after refinement"),
                });
            }
        }
    }
    for s in w.u.iter_mut() {
        s.normalize();
    }
    Ok(w)
}

/// One Newton step.  Mild leading-coefficient polish is allowed (seeds may
/// come from numerical estimates), but a correction that rewrites a leading
/// monomial outright marks the monomial vector as inconsistent.
fn newton_step(
    w: &SolutionVector,
    monomials: &[Monomial],
) -> Result<SolutionVector, SolveError> {
    let p = w.p;
    let n = p - 1;
    let mu = w.mu();
    let trunc = w.trunc();
    let errors = error_vector(w);

    let zero = || PuiseuxSeries::zero(mu, trunc);
    let mut jac = vec![vec![zero(); n]; n];
    let mut rhs = Vec::with_capacity(n);
    for j in 1..=n {
        let row = j - 1;
        let xi2 = PuiseuxSeries::monomial_term(c64(1.0, 0.0), 2 * mu, mu, trunc + 2 * mu);
        jac[row][0] = jac[row][0].sub(&xi2);
        if j + 1 <= n {
            jac[row][j] = jac[row][j].add(&xi2);
        }
        // -(3 w_j^2 - 2 w_j)
        let wj = w.component(j);
        let a = wj.mul(wj).scale(c64(3.0, 0.0)).sub(&wj.scale(c64(2.0, 0.0)));
        jac[row][j - 1] = jac[row][j - 1].sub(&a);
        rhs.push(errors[row].neg());
    }

    let delta = solve_series_system(jac, rhs)?;

    let mut u = Vec::with_capacity(p);
    for j in 1..=n {
        let mut d = delta[j - 1].clone();
        let m = &monomials[j - 1];
        // terms below the leading order are either numerical fuzz (drop) or
        // an attempt to change the order of the component (reject)
        let lead_key = key_for(m.exp, d.mu()).expect("monomials share the ambient mu");
        let below: f64 = d
            .terms()
            .filter(|&(k, _)| k < lead_key)
            .map(|(_, c)| c.norm())
            .sum();
        if below > 0.3 * m.coeff.norm() {
            return Err(SolveError::SeedRejected {
                j,
                reason: format!("correction below the leading order {}", m.exp),
            });
        }
        if below > 0.0 {
            d = d.drop_below(lead_key);
        }
        let shift = d.coeff_at(m.exp).norm();
        if shift > 0.5 * m.coeff.norm() {
            return Err(SolveError::SeedRejected {
                j,
                reason: "correction rewrites a leading coefficient".into(),
            });
        }
        let mut next = w.component(j).add(&d);
        next.set_trunc(trunc);
        next.prune_abs(1e-15 * next.max_coeff().max(1.0));
        u.push(next);
    }
    u.push(w.component(p).clone());
    Ok(SolutionVector { p, u })
}

/// Gaussian elimination over truncated Puiseux series, pivoting on the entry
/// of minimal order (maximal norm).
fn solve_series_system(
    mut a: Vec<Vec<PuiseuxSeries>>,
    mut b: Vec<PuiseuxSeries>,
) -> Result<Vec<PuiseuxSeries>, SolveError> {
    let n = b.len();
    for col in 0..n {
        let pivot_row = (col..n)
            .filter(|&r| !a[r][col].is_zero())
            .min_by_key(|&r| a[r][col].ord_key().unwrap())
            .ok_or(SolveError::SingularSystem)?;
        a.swap(col, pivot_row);
        b.swap(col, pivot_row);
        let inv_pivot = a[col][col].invert()?;
        for r in col + 1..n {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].mul(&inv_pivot);
            for c in col..n {
                let t = factor.mul(&a[col][c]);
                a[r][c] = a[r][c].sub(&t);
            }
            let t = factor.mul(&b[col]);
            b[r] = b[r].sub(&t);
            a[r][col] = PuiseuxSeries::zero(a[r][col].mu(), a[r][col].trunc());
        }
    }
    let mu = b[0].mu();
    let mut x = vec![PuiseuxSeries::zero(mu, crate::series::TRUNC_INF); n];
    for col in (0..n).rev() {
        let mut acc = b[col].clone();
        for c in col + 1..n {
            let t = a[col][c].mul(&x[c]);
            acc = acc.sub(&t);
        }
        x[col] = acc.mul(&a[col][col].invert()?);
    }
    Ok(x)
}

/// Dense complex linear solve by partial-pivot elimination.
pub(crate) fn solve_complex_system(
    mut a: Vec<Vec<Complex64>>,
    mut b: Vec<Complex64>,
) -> Option<Vec<Complex64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&r, &s| {
            a[r][col].norm().partial_cmp(&a[s][col].norm()).unwrap()
        })?;
        if a[pivot][col].norm() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            for c in col..n {
                let v = a[col][c];
                a[r][c] -= f * v;
            }
            let v = b[col];
            b[r] -= f * v;
        }
    }
    let mut x = vec![c64(0.0, 0.0); n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for c in col + 1..n {
            acc -= a[col][c] * x[c];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Solve a region directly from a kneading sequence and its leading
/// monomials, dispatching on the shape of the data: trivial kneading goes
/// through the quadratic-center construction, a grid period n < p through the
/// satellite construction, and the rest through two-term seeds.
pub fn solve_region(
    kneading: &KneadingSequence,
    monomials: &[Monomial],
    trunc_xi: i64,
) -> Result<SolutionVector, SolveError> {
    let p = kneading.period();
    if p == 1 {
        return Ok(SolutionVector::period_one(trunc_xi));
    }
    if kneading.is_trivial() {
        let c1 = -monomials[0].coeff;
        return solve_trivial_kneading(c1, p, trunc_xi);
    }
    // grid period from the orders: partial sums of (2 - ord) vanish exactly at
    // multiples of the grid period
    let n = grid_period_from_orders(&monomials.iter().map(|m| m.exp).collect::<Vec<_>>());
    if n < p {
        let base_kneading =
            KneadingSequence::new(kneading.bits()[..n].to_vec()).expect("grid period splits bits");
        let base_monomials = &monomials[..n - 1];
        let base = solve_region(&base_kneading, base_monomials, trunc_xi)?;
        let lambda = satellite_lambda(&base)?;
        let c_orbit: Vec<Complex64> = (1..p / n)
            .map(|i| monomials[n * i - 1].coeff / lambda.coeff)
            .collect();
        let seed = satellite_seed(&base, &c_orbit, trunc_xi)?;
        return solve_graded(&seed, trunc_xi);
    }
    let seed = two_term_seed(monomials, kneading, trunc_xi)?;
    solve_graded(&seed, trunc_xi)
}

/// Grid period read off the orders: least n with `sum_{j<=k} (2 - q_j) = 0`
/// exactly at multiples of n (and p when no proper multiple works).
pub fn grid_period_from_orders(orders: &[Exponent]) -> usize {
    let p = orders.len() + 1;
    let two = Exponent::from_integer(2);
    'outer: for n in 1..p {
        if p % n != 0 {
            continue;
        }
        let mut sum = Exponent::from_integer(0);
        for (idx, &q) in orders.iter().enumerate() {
            sum += two - q;
            let k = idx + 1;
            if (k % n == 0) != (sum == Exponent::from_integer(0)) {
                continue 'outer;
            }
        }
        return n;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::TRUNC_INF;

    fn kn(s: &str) -> KneadingSequence {
        KneadingSequence::parse(s).unwrap()
    }

    fn mono(re: f64, im: f64, num: i64, den: i64) -> Monomial {
        Monomial::new(c64(re, im), Exponent::new(num, den)).unwrap()
    }

    #[test]
    fn kneading_invariants() {
        assert!(KneadingSequence::parse("1001").is_none()); // last bit must be 0
        let k = kn("1000");
        assert_eq!(k.period(), 4);
        assert_eq!(k.bit(1), 1);
        assert_eq!(k.bit(4), 0);
        assert_eq!(k.solution_count(), 4);
        assert_eq!(kn("0000").solution_count(), 8);
        assert_eq!(kn("1010").pattern_period(), 2);
    }

    #[test]
    fn error_vector_examples() {
        // p = 1: no interior equations
        let w = SolutionVector::period_one(12);
        assert!(error_vector(&w).is_empty());

        // p = 2, w_1 = 1: E_1 = -xi^2
        let w = SolutionVector::from_interior(vec![PuiseuxSeries::one(1, 12)]);
        let e = error_vector(&w);
        assert!((e[0].coeff(2) - c64(-1.0, 0.0)).norm() < 1e-14);
        assert_eq!(e[0].ord(), Some(Exponent::from_integer(2)));

        // p = 2 with the solved series 1 - xi^2 - xi^4 - 2xi^6: residual order >= 8
        let u1 = PuiseuxSeries::from_terms(
            1,
            [
                (0, c64(1.0, 0.0)),
                (2, c64(-1.0, 0.0)),
                (4, c64(-1.0, 0.0)),
                (6, c64(-2.0, 0.0)),
            ],
            TRUNC_INF,
        );
        let w = SolutionVector::from_interior(vec![u1]);
        let e = error_vector(&w);
        let q = e[0].ord_with_tol(1e-12).unwrap();
        assert!(q >= Exponent::from_integer(8), "order was {q}");
    }

    #[test]
    fn star_rules() {
        let m = Monomial::one();
        let s = star(&m, 1).unwrap();
        assert_eq!(s, m);
        let m = mono(0.0, 1.0, 1, 1);
        let s = star(&m, 0).unwrap();
        assert!((s.coeff - c64(0.0, -2.0)).norm() < 1e-15);
        let omega = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let m = Monomial::new(omega, Exponent::new(3, 2)).unwrap();
        let s = star(&m, 0).unwrap();
        assert!((s.coeff + 2.0 * omega).norm() < 1e-15);
        assert_eq!(s.exp, Exponent::new(3, 2));
        // sigma = 1 with a non-unit monomial is inconsistent
        assert!(star(&mono(0.0, 1.0, 1, 1), 1).is_err());
    }

    #[test]
    fn diagonal_refinement_period_two() {
        let w = SolutionVector::from_interior(vec![PuiseuxSeries::one(1, 12)]);
        let w1 = refine_diagonal(&w).unwrap();
        assert!((w1.component(1).coeff(2) - c64(-1.0, 0.0)).norm() < 1e-14);
        let w2 = refine_diagonal(&w1).unwrap();
        assert!((w2.component(1).coeff(0) - c64(1.0, 0.0)).norm() < 1e-14);
        assert!((w2.component(1).coeff(2) - c64(-1.0, 0.0)).norm() < 1e-14);
        assert!((w2.component(1).coeff(4) - c64(-1.0, 0.0)).norm() < 1e-14);
        // a solved vector is a fixed point
        let solved = solve_graded(&w, 12).unwrap();
        let again = refine_diagonal(&solved).unwrap();
        for (a, b) in solved.interior().iter().zip(again.interior()) {
            assert!(a.sub(b).max_coeff() < 1e-12);
        }
    }

    #[test]
    fn solve_kneading_10_matches_hand_expansion() {
        // u_1 = 1 - xi^2 - xi^4 - 2xi^6 - ... for the region with kneading 10
        let seed =
            seed_from_monomials(&[Monomial::one()], &kn("10"), 12).unwrap();
        let s = solve_graded(&seed, 12).unwrap();
        let u1 = s.component(1);
        assert!((u1.coeff(0) - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((u1.coeff(2) - c64(-1.0, 0.0)).norm() < 1e-12);
        assert!((u1.coeff(4) - c64(-1.0, 0.0)).norm() < 1e-12);
        assert!((u1.coeff(6) - c64(-2.0, 0.0)).norm() < 1e-12);
        assert!(s.is_solved());
    }

    #[test]
    fn solve_trivial_kneading_basilica() {
        // p = 2, c1 = -1: u_1 = xi^2 + xi^4 + 2xi^6 + ...
        let s = solve_trivial_kneading(c64(-1.0, 0.0), 2, 12).unwrap();
        let u1 = s.component(1);
        assert!((u1.coeff(2) - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((u1.coeff(4) - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((u1.coeff(6) - c64(2.0, 0.0)).norm() < 1e-12);
        assert!(s.is_solved());
        // odd powers vanish
        for (k, _) in u1.terms() {
            assert!(k % 2 == 0);
        }
    }

    #[test]
    fn trivial_kneading_rejects_non_center() {
        assert!(matches!(
            solve_trivial_kneading(c64(-1.1, 0.0), 2, 8),
            Err(SolveError::NotACenter(..))
        ));
        // period-1 degenerate case
        let s = solve_trivial_kneading(c64(0.0, 0.0), 1, 8).unwrap();
        assert_eq!(s.period(), 1);
        assert!(s.component(1).is_zero());
    }

    #[test]
    fn airplane_leading_term() {
        // p = 3 airplane center: m_1 = -c_1 xi^2 = 1.75488 xi^2
        let c1 = c64(-1.7548776662466927, 0.0);
        let s = solve_trivial_kneading(c1, 3, 12).unwrap();
        let m = s.component(1).leading_monomial().unwrap();
        assert_eq!(m.exp, Exponent::from_integer(2));
        assert!((m.coeff + c1).norm() < 1e-9);
        assert!(s.is_solved());
    }

    #[test]
    fn satellite_1010_matches_table() {
        // base region 10, quadratic center -1: the period-4 satellite has
        // m_2 = xi^4 and the product identity (m_1*/xi^2)(m_2*/xi^2) = 2 c_1
        let base = solve_graded(
            &seed_from_monomials(&[Monomial::one()], &kn("10"), 14).unwrap(),
            14,
        )
        .unwrap();
        let c_orbit = [c64(-1.0, 0.0)];
        let ms = satellite_monomials(&base, &c_orbit).unwrap();
        assert_eq!(ms.len(), 3);
        assert!(ms[0].is_one(1e-12));
        assert_eq!(ms[1].exp, Exponent::from_integer(4));
        assert!((ms[1].coeff - c64(1.0, 0.0)).norm() < 1e-12);
        assert!(ms[2].is_one(1e-12));

        let lambda = satellite_lambda(&base).unwrap();
        let prod = star(&ms[0], 1).unwrap().coeff * (-2.0) * ms[1].coeff;
        let exp = star(&ms[0], 1).unwrap().exp + ms[1].exp - Exponent::from_integer(4);
        assert_eq!(exp, Exponent::from_integer(0));
        assert!((prod - 2.0 * c_orbit[0]).norm() < 1e-12);
        assert!((lambda.coeff + 1.0).norm() < 1e-12);

        // the full solve closes up
        let seed = satellite_seed(&base, &c_orbit, 14).unwrap();
        let s = solve_graded(&seed, 14).unwrap();
        assert!(s.is_solved());
        assert_eq!(s.kneading().unwrap(), kn("1010"));
        // r = 1 satellite is the base itself
        let same = satellite_monomials(&base, &[]).unwrap();
        assert_eq!(same.len(), 1);
        assert!(same[0].is_one(1e-12));
    }

    #[test]
    fn seed_rejection_cases() {
        // sigma_1 = 0 with m_1 = xi, sigma_2 = 1 but m_2 != 1
        let r = seed_from_monomials(
            &[mono(1.0, 0.0, 1, 1), mono(0.0, 1.0, 1, 1), Monomial::one()],
            &kn("0110"),
            10,
        );
        assert!(matches!(r, Err(SolveError::SeedRejected { j: 2, .. })));

        // a real sign where kneading 0110 needs an imaginary one
        let r = seed_from_monomials(
            &[mono(1.0, 0.0, 1, 1), Monomial::one(), Monomial::one()],
            &kn("0110"),
            10,
        );
        assert!(r.is_err(), "wrong branch must be rejected");
    }

    #[test]
    fn galois_orbit_sizes() {
        let s = solve_graded(
            &seed_from_monomials(&[Monomial::one()], &kn("10"), 10).unwrap(),
            10,
        )
        .unwrap();
        assert_eq!(s.galois_orbit().len(), 1);

        // kneading 0010 has mu = 2: conjugates flip the half-integer terms
        let omega = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let ms = [
            Monomial::new(omega, Exponent::new(3, 2)).unwrap(),
            Monomial::new(-omega * omega, Exponent::from_integer(1)).unwrap(),
            Monomial::one(),
        ];
        let seed = seed_from_monomials(&ms, &kn("0010"), 10).unwrap();
        let s = solve_graded(&seed, 10).unwrap();
        assert_eq!(s.mu(), 2);
        let orbit = s.galois_orbit();
        assert_eq!(orbit.len(), 2);
        let m_conj = orbit[1].component(1).leading_monomial().unwrap();
        assert!((m_conj.coeff + omega).norm() < 1e-9, "conjugate flips omega");
        assert_eq!(orbit[0].orders(), orbit[1].orders());
    }

    #[test]
    fn kneading_0010_second_terms() {
        // Table row 0010: u_1 = omega t^(3/2) + t^2/2, u_2 = -omega^2 t - t^2/2,
        // u_3 = 1 - omega t^(7/2)
        let omega = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let ms = [
            Monomial::new(omega, Exponent::new(3, 2)).unwrap(),
            Monomial::new(-omega * omega, Exponent::from_integer(1)).unwrap(),
            Monomial::one(),
        ];
        let seed = seed_from_monomials(&ms, &kn("0010"), 12).unwrap();
        let s = solve_graded(&seed, 12).unwrap();
        assert!(s.is_solved());
        let u1 = s.component(1);
        let u2 = s.component(2);
        let u3 = s.component(3);
        assert!((u1.coeff_at(Exponent::new(3, 2)) - omega).norm() < 1e-10);
        assert!((u1.coeff_at(Exponent::from_integer(2)) - c64(0.5, 0.0)).norm() < 1e-10);
        assert!((u2.coeff_at(Exponent::from_integer(1)) + omega * omega).norm() < 1e-10);
        assert!((u2.coeff_at(Exponent::from_integer(2)) + c64(0.5, 0.0)).norm() < 1e-10);
        assert!((u3.coeff_at(Exponent::new(7, 2)) + omega).norm() < 1e-10);
    }

    #[test]
    fn solve_region_dispatches() {
        // satellite dispatch from monomials alone
        let ms = [
            Monomial::one(),
            Monomial::new(c64(1.0, 0.0), Exponent::from_integer(4)).unwrap(),
            Monomial::one(),
        ];
        let s = solve_region(&kn("1010"), &ms, 12).unwrap();
        assert!(s.is_solved());
        assert_eq!(grid_period_from_orders(&s.orders()), 2);

        // trivial dispatch
        let ms = [
            Monomial::new(c64(1.0, 0.0), Exponent::from_integer(2)).unwrap(),
        ];
        let s = solve_region(&kn("00"), &ms, 12).unwrap();
        assert!((s.component(1).coeff(2) - c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ones_family_integer_even_series() {
        // kneading 1...10: solutions lie in Z[[t^2]]
        for bits in ["110", "1110"] {
            let k = kn(bits);
            let p = k.period();
            let ms: Vec<Monomial> = (1..p).map(|_| Monomial::one()).collect();
            let seed = seed_from_monomials(&ms, &k, 12).unwrap();
            let s = solve_graded(&seed, 12).unwrap();
            assert!(s.is_solved());
            for j in 1..p {
                for (key, c) in s.component(j).terms() {
                    assert!(key % 2 == 0, "odd power xi^{key} in u_{j}");
                    assert!(c.im.abs() < 1e-9);
                    assert!((c.re - c.re.round()).abs() < 1e-9, "non-integer {c}");
                }
            }
        }
    }

    #[test]
    fn dual_solution_solves_dual_region() {
        // kneading 100: u_2 = +-xi + ..., the two signs are dual regions
        let ms_plus = [Monomial::one(), mono(1.0, 0.0, 1, 1)];
        let s_plus = solve_region(&kn("100"), &ms_plus, 12).unwrap();
        let dual = s_plus.dual();
        let e = error_vector(&dual);
        for r in e {
            assert!(r.ord_with_tol(1e-9).map(|q| q >= Exponent::from_integer(9)).unwrap_or(true));
        }
        let m2 = dual.component(2).leading_monomial().unwrap();
        assert!((m2.coeff - c64(-1.0, 0.0)).norm() < 1e-9, "dual flips the sign");
    }
}
