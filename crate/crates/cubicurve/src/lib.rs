//! Escape regions of the parameter curve of monic centered cubic polynomials
//! `F(z) = z^3 - 3a^2 z + (2a^3 + v)` with a marked critical point of period p.
//!
//! The curve S_p of all `(a, v)` for which the critical point `+a` has period
//! exactly p carries finitely many escape regions (components where the free
//! critical point `-a` escapes).  Each region is classified, near its ideal
//! point, by a vector of Puiseux series in `xi = 1/(3a)`.  This crate computes
//! those series, the Branner-Hubbard marked grids and their invariants
//! (multiplicity, winding number), canonical-parameter geometry (flows,
//! renders, residues, Euler characteristics), and the real locus of S_p.
//!
//! Module layout:
//! * [`series`] - truncated Puiseux series arithmetic.
//! * [`solver`] - series solutions of the orbit equations from monomial seeds.
//! * [`grid`] - marked grids, grid rules, order formula, winding numbers.
//! * [`quadratic`] - period-r centers of the Mandelbrot set, psi polynomials.
//! * [`dynamics`] - numerical orbits, Green's function, fiber enumeration.
//! * [`geometry`] - canonical parameter t, flows, renders, Euler numbers.
//! * [`finder`] - the empirical fixed-point search for v given a and kneading.
//! * [`realcurve`] - bimodal models of the real and pure-imaginary loci.

pub mod dynamics;
pub mod finder;
pub mod geometry;
pub mod grid;
pub(crate) mod poly;
pub mod quadratic;
pub mod realcurve;
pub mod series;
pub mod solver;

pub use num_complex::Complex64;
pub use num_rational::Ratio;

/// Exact exponent of a Puiseux term, `num/den` with `den` a power of two in
/// every case arising from a marked grid.
pub type Exponent = Ratio<i64>;

pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}
