//! Truncated Puiseux series in one indeterminate `xi` with complex
//! coefficients and exponents in (1/mu)*Z.
//!
//! A series is stored against a fixed ambient ramification `mu`: the term map
//! sends an integer key `k` to the coefficient of `xi^(k/mu)`.  Every series
//! is known modulo `xi^(trunc/mu)`; arithmetic propagates that bound.  Keys
//! may be negative (Laurent ends show up transiently while inverting leading
//! monomials inside the solver).

use crate::{c64, Complex64, Exponent};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::collections::BTreeMap;
use thiserror::Error;

/// Relative magnitude below which a coefficient is pruned as numerical noise.
pub const PRUNE_REL: f64 = 1e-12;

/// Truncation sentinel standing for "known to all orders".
pub const TRUNC_INF: i64 = i64::MAX / 4;

pub(crate) fn sat(t: i64) -> i64 {
    t.min(TRUNC_INF)
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("zero series has no leading monomial")]
    ZeroSeries,
    #[error("monomial coefficient must be nonzero")]
    ZeroCoefficient,
}

/// A single term `coeff * xi^exp` with `coeff != 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monomial {
    pub coeff: Complex64,
    pub exp: Exponent,
}

impl Monomial {
    pub fn new(coeff: Complex64, exp: Exponent) -> Result<Self, SeriesError> {
        if coeff.norm() == 0.0 {
            return Err(SeriesError::ZeroCoefficient);
        }
        Ok(Monomial { coeff, exp })
    }

    /// The constant monomial 1.
    pub fn one() -> Self {
        Monomial { coeff: c64(1.0, 0.0), exp: Exponent::from_integer(0) }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Monomial { coeff: self.coeff * factor, exp: self.exp }
    }

    /// True if this is the constant 1 within `tol`.
    pub fn is_one(&self, tol: f64) -> bool {
        self.exp == Exponent::from_integer(0) && (self.coeff - c64(1.0, 0.0)).norm() <= tol
    }
}

/// Truncated Puiseux series: finitely many terms `c_k xi^(k/mu)`, known
/// modulo `xi^(trunc/mu)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PuiseuxSeries {
    mu: i64,
    coeffs: BTreeMap<i64, Complex64>,
    trunc: i64,
}

impl PuiseuxSeries {
    /// The zero series (no known nonzero terms below the truncation).
    pub fn zero(mu: i64, trunc: i64) -> Self {
        assert!(mu >= 1);
        PuiseuxSeries { mu, coeffs: BTreeMap::new(), trunc: sat(trunc) }
    }

    pub fn constant(value: Complex64, mu: i64, trunc: i64) -> Self {
        let mut s = Self::zero(mu, trunc);
        s.set(0, value);
        s
    }

    pub fn one(mu: i64, trunc: i64) -> Self {
        Self::constant(c64(1.0, 0.0), mu, trunc)
    }

    /// `coeff * xi^(k/mu)` as a series.
    pub fn monomial_term(coeff: Complex64, k: i64, mu: i64, trunc: i64) -> Self {
        let mut s = Self::zero(mu, trunc);
        s.set(k, coeff);
        s
    }

    /// Build from `(k, coeff)` pairs sharing the ambient `mu`.
    pub fn from_terms<I: IntoIterator<Item = (i64, Complex64)>>(
        mu: i64,
        terms: I,
        trunc: i64,
    ) -> Self {
        let mut s = Self::zero(mu, trunc);
        for (k, c) in terms {
            if k < s.trunc {
                *s.coeffs.entry(k).or_insert_with(|| c64(0.0, 0.0)) += c;
            }
        }
        s.normalize();
        s
    }

    /// Lift a monomial into a series with ambient `mu`; the exponent must be
    /// representable, i.e. `mu` divisible by `m.exp.denom()`.
    pub fn from_monomial(m: &Monomial, mu: i64, trunc: i64) -> Self {
        let k = key_for(m.exp, mu).expect("monomial exponent incompatible with ambient mu");
        Self::monomial_term(m.coeff, k, mu, trunc)
    }

    pub fn mu(&self) -> i64 {
        self.mu
    }

    pub fn trunc(&self) -> i64 {
        self.trunc
    }

    pub fn set_trunc(&mut self, trunc: i64) {
        self.trunc = sat(trunc);
        let cut = self.trunc;
        self.coeffs.retain(|&k, _| k < cut);
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_else(|| c64(0.0, 0.0))
    }

    /// Coefficient of `xi^q`, zero if `q` is not on the grid of this series.
    pub fn coeff_at(&self, q: Exponent) -> Complex64 {
        match key_for(q, self.mu) {
            Some(k) => self.coeff(k),
            None => c64(0.0, 0.0),
        }
    }

    pub fn set(&mut self, k: i64, value: Complex64) {
        if k >= self.trunc {
            return;
        }
        if value.norm() == 0.0 {
            self.coeffs.remove(&k);
        } else {
            self.coeffs.insert(k, value);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Least key with a nonzero coefficient; `None` for the zero series.
    pub fn ord_key(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    /// Least exponent with a nonzero coefficient, reduced; `None` means +inf.
    pub fn ord(&self) -> Option<Exponent> {
        self.ord_key().map(|k| Exponent::new(k, self.mu))
    }

    /// Order ignoring coefficients of magnitude <= `tol` (absolute).
    pub fn ord_with_tol(&self, tol: f64) -> Option<Exponent> {
        self.coeffs
            .iter()
            .find(|(_, c)| c.norm() > tol)
            .map(|(&k, _)| Exponent::new(k, self.mu))
    }

    /// `e^{-ord}`; the zero series has norm 0.
    pub fn norm(&self) -> f64 {
        match self.ord() {
            None => 0.0,
            Some(q) => (-(q.to_f64())).exp(),
        }
    }

    /// Leading term of a nonzero series.
    pub fn leading_monomial(&self) -> Result<Monomial, SeriesError> {
        let (&k, &c) = self.coeffs.iter().next().ok_or(SeriesError::ZeroSeries)?;
        Ok(Monomial { coeff: c, exp: Exponent::new(k, self.mu) })
    }

    pub fn leading_with_tol(&self, tol: f64) -> Result<Monomial, SeriesError> {
        let (&k, &c) = self
            .coeffs
            .iter()
            .find(|(_, c)| c.norm() > tol)
            .ok_or(SeriesError::ZeroSeries)?;
        Ok(Monomial { coeff: c, exp: Exponent::new(k, self.mu) })
    }

    /// Drop coefficients small relative to the largest one, and any term at or
    /// above the truncation.
    pub fn normalize(&mut self) {
        let cut = self.trunc;
        self.coeffs.retain(|&k, _| k < cut);
        let max = self.coeffs.values().map(|c| c.norm()).fold(0.0_f64, f64::max);
        if max > 0.0 {
            let floor = max * PRUNE_REL;
            self.coeffs.retain(|_, c| c.norm() > floor);
        }
    }

    /// Drop coefficients of absolute magnitude <= `tol`.
    pub fn prune_abs(&mut self, tol: f64) {
        self.coeffs.retain(|_, c| c.norm() > tol);
    }

    /// Rescale to a new ambient ramification (a multiple of the current one).
    pub fn with_mu(&self, mu: i64) -> Self {
        assert!(mu % self.mu == 0, "new mu must be a multiple of the old");
        let f = mu / self.mu;
        if f == 1 {
            return self.clone();
        }
        PuiseuxSeries {
            mu,
            coeffs: self.coeffs.iter().map(|(&k, &c)| (k * f, c)).collect(),
            trunc: sat(self.trunc.saturating_mul(f)),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.combine(other, 1.0)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.combine(other, -1.0)
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let mu = lcm(self.mu, other.mu);
        let a = self.with_mu(mu);
        let b = other.with_mu(mu);
        let mut out = PuiseuxSeries::zero(mu, a.trunc.min(b.trunc));
        for (k, c) in a.coeffs {
            if k < out.trunc {
                out.coeffs.insert(k, c);
            }
        }
        for (k, c) in b.coeffs {
            if k < out.trunc {
                *out.coeffs.entry(k).or_insert_with(|| c64(0.0, 0.0)) += sign * c;
            }
        }
        out.normalize();
        out
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c = -*c;
        }
        out
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        let mut out = self.clone();
        if factor.norm() == 0.0 {
            out.coeffs.clear();
            return out;
        }
        for c in out.coeffs.values_mut() {
            *c *= factor;
        }
        out
    }

    /// Cauchy product.  The result is known modulo
    /// `xi^(min(trunc_a + ord_b, trunc_b + ord_a)/mu)`.
    pub fn mul(&self, other: &Self) -> Self {
        let mu = lcm(self.mu, other.mu);
        let a = self.with_mu(mu);
        let b = other.with_mu(mu);
        let oa = a.ord_key().unwrap_or(TRUNC_INF);
        let ob = b.ord_key().unwrap_or(TRUNC_INF);
        let trunc = sat(a.trunc.saturating_add(ob).min(b.trunc.saturating_add(oa)));
        let mut out = PuiseuxSeries::zero(mu, trunc);
        for (&ka, &ca) in &a.coeffs {
            for (&kb, &cb) in &b.coeffs {
                let k = ka + kb;
                if k < trunc {
                    *out.coeffs.entry(k).or_insert_with(|| c64(0.0, 0.0)) += ca * cb;
                }
            }
        }
        out.normalize();
        out
    }

    /// Shift by `xi^(k/mu)` (k may be negative).
    pub fn mul_xi_pow(&self, k: i64) -> Self {
        PuiseuxSeries {
            mu: self.mu,
            coeffs: self.coeffs.iter().map(|(&j, &c)| (j + k, c)).collect(),
            trunc: sat(self.trunc.saturating_add(k)),
        }
    }

    /// Divide by a monomial: exponent shift and coefficient scale.
    pub fn div_monomial(&self, m: &Monomial) -> Self {
        assert!(m.coeff.norm() > 0.0);
        let k = key_for(m.exp, self.mu).expect("monomial exponent incompatible with ambient mu");
        self.mul_xi_pow(-k).scale(c64(1.0, 0.0) / m.coeff)
    }

    /// Keep only terms of exponent < `q`; the truncation shrinks to `q`.
    pub fn truncate(&self, q: Exponent) -> Self {
        let k = ceil_key(q, self.mu);
        let mut out = self.clone();
        out.set_trunc(out.trunc.min(k));
        out
    }

    /// Remove terms with key below `k` without touching the truncation.
    pub fn drop_below(&self, k: i64) -> Self {
        let mut out = self.clone();
        out.coeffs.retain(|&key, _| key >= k);
        out
    }

    /// Multiplicative inverse of a nonzero series, via the geometric series in
    /// `1 - self/leading`.  The relative precision window is preserved.
    pub fn invert(&self) -> Result<Self, SeriesError> {
        let lead = self.leading_monomial()?;
        let k0 = self.ord_key().unwrap();
        // unit = 1 + h with ord(h) > 0
        let unit = self.div_monomial(&lead);
        let window = sat(self.trunc.saturating_sub(k0));
        let mut h = unit.clone();
        h.set(0, c64(0.0, 0.0));
        h = h.neg();
        let mut inv = PuiseuxSeries::one(self.mu, window);
        let mut pow = PuiseuxSeries::one(self.mu, window);
        let h_ord = h.ord_key().unwrap_or(TRUNC_INF);
        let mut reached = 0i64;
        while reached < window && !pow.is_zero() {
            pow = pow.mul(&h);
            pow.set_trunc(window);
            if pow.is_zero() {
                break;
            }
            inv = inv.add(&pow);
            reached = reached.saturating_add(h_ord);
        }
        inv.set_trunc(window);
        // divide by the leading monomial
        Ok(inv.mul_xi_pow(-k0).scale(c64(1.0, 0.0) / lead.coeff))
    }

    /// Galois conjugation `xi^(1/mu) -> alpha * xi^(1/mu)` with
    /// `alpha = e^(2 pi i branch / mu)`.
    pub fn galois(&self, branch: i64) -> Self {
        let mut out = self.clone();
        let step = 2.0 * std::f64::consts::PI * (branch as f64) / (self.mu as f64);
        for (&k, c) in self.coeffs.iter().zip(out.coeffs.values_mut()).map(|((k, _), c)| (k, c)) {
            *c *= Complex64::from_polar(1.0, step * k as f64);
        }
        out
    }

    /// The involution `xi -> -xi`, lifted to `xi^(1/mu) -> e^(i pi/mu) xi^(1/mu)`.
    /// Sends the series of an escape region to the series of its dual region.
    pub fn dual(&self) -> Self {
        let mut out = self.clone();
        let step = std::f64::consts::PI / (self.mu as f64);
        for (k, c) in self.coeffs.iter().map(|(&k, _)| k).zip(out.coeffs.values_mut()) {
            *c *= Complex64::from_polar(1.0, step * k as f64);
        }
        out
    }

    /// Evaluate at a numeric value of the chosen root `xi^(1/mu)`.
    pub fn eval_root(&self, xi_root: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .map(|(&k, &c)| c * xi_root.powi(k.try_into().unwrap_or(i32::MAX)))
            .sum()
    }

    /// Evaluate at a numeric `xi > 0` using the positive real root `xi^(1/mu)`.
    pub fn eval_positive(&self, xi: f64) -> Complex64 {
        self.eval_root(c64(xi.powf(1.0 / self.mu as f64), 0.0))
    }

    /// Largest coefficient magnitude.
    pub fn max_coeff(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }
}

/// Integer key representing exponent `q` at ambient `mu`, if exact.
pub fn key_for(q: Exponent, mu: i64) -> Option<i64> {
    let scaled = q * Exponent::from_integer(mu);
    if scaled.is_integer() {
        Some(scaled.to_integer())
    } else {
        None
    }
}

fn ceil_key(q: Exponent, mu: i64) -> i64 {
    let scaled = q * Exponent::from_integer(mu);
    scaled.ceil().to_integer()
}

pub(crate) fn lcm(a: i64, b: i64) -> i64 {
    a / gcd(a, b) * b
}

pub(crate) fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a.max(1)
}

trait ToF64 {
    fn to_f64(&self) -> f64;
}

impl ToF64 for Exponent {
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

impl Serialize for PuiseuxSeries {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            mu: i64,
            terms: Vec<(i64, f64, f64)>,
            trunc: i64,
        }
        Repr {
            mu: self.mu,
            terms: self.coeffs.iter().map(|(&k, c)| (k, c.re, c.im)).collect(),
            trunc: self.trunc,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PuiseuxSeries {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            mu: i64,
            terms: Vec<(i64, f64, f64)>,
            trunc: i64,
        }
        let r = Repr::deserialize(deserializer)?;
        if r.mu < 1 {
            return Err(D::Error::custom("mu must be >= 1"));
        }
        Ok(PuiseuxSeries::from_terms(
            r.mu,
            r.terms.into_iter().map(|(k, re, im)| (k, c64(re, im))),
            r.trunc,
        ))
    }
}

impl std::fmt::Display for PuiseuxSeries {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (&k, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let q = Exponent::new(k, self.mu);
            if q == Exponent::from_integer(0) {
                write!(f, "({:.6}{:+.6}i)", c.re, c.im)?;
            } else if *q.denom() == 1 {
                write!(f, "({:.6}{:+.6}i)*xi^{}", c.re, c.im, q.numer())?;
            } else {
                write!(f, "({:.6}{:+.6}i)*xi^({}/{})", c.re, c.im, q.numer(), q.denom())?;
            }
        }
        write!(f, " + O(xi^{}/{})", self.trunc, self.mu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Exponent {
        Exponent::new(n, d)
    }

    #[test]
    fn add_cancellation_preserves_trunc() {
        // (1 - xi^2) + xi^2 = 1
        let a = PuiseuxSeries::from_terms(1, [(0, c64(1.0, 0.0)), (2, c64(-1.0, 0.0))], 12);
        let b = PuiseuxSeries::monomial_term(c64(1.0, 0.0), 2, 1, 12);
        let s = a.add(&b);
        assert_eq!(s.trunc(), 12);
        assert_eq!(s.coeff(0), c64(1.0, 0.0));
        assert_eq!(s.coeff(2), c64(0.0, 0.0));
    }

    #[test]
    fn add_identity() {
        let x = PuiseuxSeries::from_terms(1, [(1, c64(2.0, 1.0)), (3, c64(0.5, 0.0))], 10);
        let z = PuiseuxSeries::zero(1, 10);
        assert_eq!(z.add(&x), x);
    }

    #[test]
    fn add_mixed_ramification() {
        // xi^(1/2) + xi has mu = 2
        let a = PuiseuxSeries::monomial_term(c64(1.0, 0.0), 1, 2, 24);
        let b = PuiseuxSeries::monomial_term(c64(1.0, 0.0), 1, 1, 12);
        let s = a.add(&b);
        assert_eq!(s.mu(), 2);
        assert_eq!(s.coeff(1), c64(1.0, 0.0));
        assert_eq!(s.coeff(2), c64(1.0, 0.0));
        assert_eq!(s.trunc(), 24);
    }

    #[test]
    fn mul_difference_of_squares() {
        let a = PuiseuxSeries::from_terms(1, [(0, c64(1.0, 0.0)), (2, c64(-1.0, 0.0))], 12);
        let b = PuiseuxSeries::from_terms(1, [(0, c64(1.0, 0.0)), (2, c64(1.0, 0.0))], 12);
        let p = a.mul(&b);
        assert_eq!(p.coeff(0), c64(1.0, 0.0));
        assert_eq!(p.coeff(2), c64(0.0, 0.0));
        assert_eq!(p.coeff(4), c64(-1.0, 0.0));
    }

    #[test]
    fn mul_by_zero() {
        let a = PuiseuxSeries::from_terms(1, [(1, c64(3.0, 0.0))], 12);
        let z = PuiseuxSeries::zero(1, 12);
        assert!(a.mul(&z).is_zero());
        // knowledge extends past 12: 0*a is 0 mod xi^(12+1)
        assert_eq!(a.mul(&z).trunc(), 13);
    }

    #[test]
    fn cube_identity_from_orbit_equation() {
        // u*u*(u-1) for u = 1 - xi^2 - xi^4 expands to
        // -xi^2 + xi^4 + 2xi^6 + ... (hand expansion)
        let u = PuiseuxSeries::from_terms(
            1,
            [(0, c64(1.0, 0.0)), (2, c64(-1.0, 0.0)), (4, c64(-1.0, 0.0))],
            16,
        );
        let um1 = u.sub(&PuiseuxSeries::one(1, 16));
        let p = u.mul(&u).mul(&um1);
        // (1 - t^2 - t^4)^2 = 1 - 2t^2 - t^4 + 2t^6 + t^8
        // times (-t^2 - t^4): -t^2 - t^4 + 2t^4 + 2t^6 + t^6 + t^8 - 2t^8 ...
        assert!((p.coeff(2) - c64(-1.0, 0.0)).norm() < 1e-12);
        assert!((p.coeff(4) - c64(1.0, 0.0)).norm() < 1e-12);
        assert!((p.coeff(6) - c64(3.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn ord_and_leading() {
        let s = PuiseuxSeries::from_terms(1, [(2, c64(1.0, 0.0)), (4, c64(1.0, 0.0))], 12);
        assert_eq!(s.ord(), Some(q(2, 1)));
        let z = PuiseuxSeries::zero(1, 12);
        assert_eq!(z.ord(), None);
        assert_eq!(z.leading_monomial(), Err(SeriesError::ZeroSeries));

        // omega * xi^(3/2) + xi^2 / 2 with mu = 2
        let omega = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_4);
        let s = PuiseuxSeries::from_terms(2, [(3, omega), (4, c64(0.5, 0.0))], 24);
        let m = s.leading_monomial().unwrap();
        assert_eq!(m.exp, q(3, 2));
        assert!((m.coeff - omega).norm() < 1e-15);
    }

    #[test]
    fn div_monomial_and_truncate() {
        let s = PuiseuxSeries::from_terms(1, [(2, c64(1.0, 0.0)), (3, c64(1.0, 0.0))], 12);
        let m = Monomial::new(c64(1.0, 0.0), q(2, 1)).unwrap();
        let d = s.div_monomial(&m);
        assert_eq!(d.coeff(0), c64(1.0, 0.0));
        assert_eq!(d.coeff(1), c64(1.0, 0.0));
        let t = s.truncate(q(3, 1));
        assert_eq!(t.coeff(3), c64(0.0, 0.0));
        assert_eq!(t.trunc(), 3);
    }

    #[test]
    fn norm_matches_definition() {
        let s = PuiseuxSeries::monomial_term(c64(5.0, 0.0), 2, 1, 12);
        assert!((s.norm() - (-2.0f64).exp()).abs() < 1e-15);
        assert_eq!(PuiseuxSeries::zero(1, 12).norm(), 0.0);
    }

    #[test]
    fn invert_round_trips() {
        let s = PuiseuxSeries::from_terms(
            1,
            [(1, c64(2.0, 0.0)), (2, c64(-1.0, 0.5)), (4, c64(0.25, 0.0))],
            14,
        );
        let inv = s.invert().unwrap();
        let p = s.mul(&inv);
        assert!((p.coeff(0) - c64(1.0, 0.0)).norm() < 1e-12);
        for (k, c) in p.terms() {
            if k != 0 {
                assert!(c.norm() < 1e-10, "residue at key {k}: {c}");
            }
        }
    }

    #[test]
    fn galois_is_ring_homomorphism() {
        let a = PuiseuxSeries::from_terms(2, [(1, c64(1.0, 2.0)), (3, c64(0.0, -1.0))], 20);
        let b = PuiseuxSeries::from_terms(2, [(0, c64(1.0, 0.0)), (2, c64(-2.0, 0.0))], 20);
        let g = |s: &PuiseuxSeries| s.galois(1);
        let lhs = g(&a.mul(&b));
        let rhs = g(&a).mul(&g(&b));
        for (k, c) in lhs.terms() {
            assert!((c - rhs.coeff(k)).norm() < 1e-12);
        }
        // fixes integral exponents
        let fixed = g(&b);
        assert!((fixed.coeff(2) - b.coeff(2)).norm() < 1e-15);
    }

    #[test]
    fn json_round_trip() {
        let s = PuiseuxSeries::from_terms(2, [(3, c64(0.5, -0.25)), (5, c64(1.0, 0.0))], 24);
        let j = serde_json::to_string(&s).unwrap();
        assert!(j.contains("\"mu\":2"));
        let back: PuiseuxSeries = serde_json::from_str(&j).unwrap();
        assert_eq!(back, s);
    }
}
