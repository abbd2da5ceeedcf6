//! The canonical parameter t and the global topology it computes.
//!
//! On the smooth curve `Phi_p(a, v) = F^p(a) - a = 0` the 1-form
//! `dt = da / (dPhi/dv)` is holomorphic and nonvanishing, so t is a local
//! coordinate, unique up to translation.  This module integrates the
//! Hamiltonian flow `da/dt = dPhi/dv, dv/dt = -dPhi/da` (with Newton
//! re-projection onto the curve), renders escape-time pictures in the
//! t-plane, evaluates the residue of dt at ideal points, derives the leading
//! behavior of t inside an escape region, and assembles the degree and Euler
//! characteristic bookkeeping.

use crate::dynamics::{
    exact_period_fiber, phi_and_dv, phi_partials, step_root, CubicMap, DynError,
};
use crate::grid::RegionDescriptor;
use crate::quadratic::psi_eval;
use crate::solver::{quadratic_orbit, star};
use crate::{c64, Complex64, Exponent};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("both partial derivatives collapsed below 1e-12 (singular chart)")]
    StepCollapse,
    #[error("Newton projection onto the curve failed")]
    ProjectionFailed,
    #[error("sheet continuation did not close up after {0} turns")]
    SheetMismatch(i64),
    #[error("region descriptor is missing its sample fiber point")]
    MissingSample,
    #[error(transparent)]
    Dyn(#[from] DynError),
}

/// A point on the period-p curve, kept on `Phi_p = 0` by Newton projection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub a: Complex64,
    pub v: Complex64,
    pub p: usize,
}

impl CurvePoint {
    /// Project onto the curve by Newton in v; fails on a singular chart.
    pub fn projected(a: Complex64, v: Complex64, p: usize) -> Result<Self, GeomError> {
        let v = crate::dynamics::polish_fiber_root(a, v, p).ok_or(GeomError::ProjectionFailed)?;
        Ok(CurvePoint { a, v, p })
    }

    pub fn phi(&self) -> Complex64 {
        phi_and_dv(self.a, self.v, self.p).0
    }

    pub fn map(&self) -> CubicMap {
        CubicMap::new(self.a, self.v)
    }

    /// `(dPhi/da, dPhi/dv)` at this point.
    pub fn partials(&self) -> (Complex64, Complex64) {
        phi_partials(self.a, self.v, self.p)
    }
}

/// Integrate the canonical flow from `base` to the target t-offset along a
/// straight segment, with `steps_per_unit` Runge-Kutta steps per unit of
/// |t| (default 512) and adaptive halving when the projection fails.
pub fn flow(
    base: &CurvePoint,
    t_target: Complex64,
    steps_per_unit: usize,
) -> Result<CurvePoint, GeomError> {
    let dist = t_target.norm();
    if dist == 0.0 {
        return Ok(*base);
    }
    let mut steps = ((steps_per_unit as f64 * dist).ceil() as usize).max(8);
    'retry: for _ in 0..5 {
        let h = t_target / steps as f64;
        let mut pt = *base;
        for _ in 0..steps {
            match rk4_step(&pt, h) {
                Some(next) => pt = next,
                None => {
                    steps *= 2;
                    continue 'retry;
                }
            }
        }
        return Ok(pt);
    }
    Err(GeomError::ProjectionFailed)
}

/// One RK4 step of `d(a,v)/dt = (Phi_v, -Phi_a)` followed by re-projection.
fn rk4_step(pt: &CurvePoint, h: Complex64) -> Option<CurvePoint> {
    let p = pt.p;
    let field = |a: Complex64, v: Complex64| -> Option<(Complex64, Complex64)> {
        let (pa, pv) = phi_partials(a, v, p);
        if pa.norm() < 1e-12 && pv.norm() < 1e-12 {
            return None;
        }
        Some((pv, -pa))
    };
    let (a0, v0) = (pt.a, pt.v);
    let k1 = field(a0, v0)?;
    let k2 = field(a0 + 0.5 * h * k1.0, v0 + 0.5 * h * k1.1)?;
    let k3 = field(a0 + 0.5 * h * k2.0, v0 + 0.5 * h * k2.1)?;
    let k4 = field(a0 + h * k3.0, v0 + h * k3.1)?;
    let a = a0 + h / 6.0 * (k1.0 + 2.0 * k2.0 + 2.0 * k3.0 + k4.0);
    let v = v0 + h / 6.0 * (k1.1 + 2.0 * k2.1 + 2.0 * k3.1 + k4.1);
    // stay on the curve
    let v = crate::dynamics::polish_fiber_root(a, v, p)?;
    Some(CurvePoint { a, v, p })
}

/// How a rendered pixel is classified.
pub const CODE_LOCUS: u16 = 0;
pub const CODE_FAILED: u16 = u16::MAX;

/// Escape-time palette: 16 cycling colors, a connectedness marker and a
/// sentinel for failed pixels.  The exact bytes are part of the output
/// contract for PPM rasters.
pub const PALETTE: [[u8; 3]; 16] = [
    [66, 30, 15],
    [25, 7, 26],
    [9, 1, 47],
    [4, 4, 73],
    [0, 7, 100],
    [12, 44, 138],
    [24, 82, 177],
    [57, 125, 209],
    [134, 181, 229],
    [211, 236, 248],
    [241, 233, 191],
    [248, 201, 95],
    [255, 170, 0],
    [204, 128, 0],
    [153, 87, 0],
    [106, 52, 3],
];
pub const LOCUS_COLOR: [u8; 3] = [8, 16, 60];
pub const FAILED_COLOR: [u8; 3] = [255, 0, 255];

/// Raster of classification codes over a window of the t-plane centered at
/// `center` (a t-offset from the base point).
#[derive(Debug, Clone, Serialize)]
pub struct TPlaneImage {
    pub width: usize,
    pub height: usize,
    pub center: Complex64,
    pub scale: f64,
    pub base: CurvePoint,
    pub codes: Vec<u16>,
}

impl TPlaneImage {
    pub fn code(&self, x: usize, y: usize) -> u16 {
        self.codes[y * self.width + x]
    }

    pub fn rgb(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.codes.len() * 3);
        for &c in &self.codes {
            let color = match c {
                CODE_LOCUS => LOCUS_COLOR,
                CODE_FAILED => FAILED_COLOR,
                b => PALETTE[((b - 1) as usize) % PALETTE.len()],
            };
            out.extend_from_slice(&color);
        }
        out
    }

    /// Binary PPM (P6, maxval 255).
    pub fn write_ppm<W: std::io::Write>(&self, mut w: W) -> std::io::Result<()> {
        write!(w, "P6\n{} {}\n255\n", self.width, self.height)?;
        w.write_all(&self.rgb())
    }
}

/// Render an escape-time picture of the t-plane around `base`: each pixel is
/// reached by an independent flow from the shared base point and classified
/// by the escape time of the free critical point.
pub fn render(
    base: &CurvePoint,
    width: usize,
    height: usize,
    center: Complex64,
    scale: f64,
    steps_per_unit: usize,
) -> TPlaneImage {
    let codes: Vec<u16> = (0..width * height)
        .into_par_iter()
        .map(|idx| {
            let x = idx % width;
            let y = idx / width;
            let t = center
                + scale
                    * c64(
                        x as f64 - width as f64 / 2.0,
                        height as f64 / 2.0 - y as f64,
                    );
            match flow(base, t, steps_per_unit) {
                Err(_) => CODE_FAILED,
                Ok(pt) => match pt.map().escape_time(-pt.a) {
                    None => CODE_LOCUS,
                    Some(n) => (n as u16).saturating_add(1).min(u16::MAX - 1),
                },
            }
        })
        .collect();
    TPlaneImage { width, height, center, scale, base: *base, codes }
}

/// Numerically integrate `(1/2 pi i) \oint dt` around the ideal point of a
/// region: `a` runs `mu` times around the circle of radius R while the whole
/// fiber is transported collectively (sibling regions can shadow each other
/// at large radius, so single-root tracking is not safe), and the loop must
/// close only after exactly `mu` turns.
pub fn residue_at_ideal(
    region: &RegionDescriptor,
    radius: f64,
    samples_per_turn: usize,
) -> Result<Complex64, GeomError> {
    let p = region.p;
    let mu = region.mu;
    let (a0, v0) = region.sample.ok_or(GeomError::MissingSample)?;

    // move the whole fiber onto the requested circle and locate the region
    let fiber0 = crate::dynamics::fiber_roots(p, a0)?;
    let idx = fiber0
        .iter()
        .enumerate()
        .min_by(|(_, x), (_, y)| (*x - v0).norm().partial_cmp(&(*y - v0).norm()).unwrap())
        .map(|(i, _)| i)
        .ok_or(GeomError::MissingSample)?;
    let start_a = c64(radius, 0.0) * a0 / a0.norm();
    let mut fiber = crate::dynamics::track_fiber_path(p, a0, &fiber0, start_a)?;
    let v_start = fiber[idx];

    let n = samples_per_turn.max(64);
    let mut integral = c64(0.0, 0.0);
    let mut a_prev = start_a;
    let mut f_prev = integrand(a_prev, v_start, p)?;
    let scale = radius.max(1.0);
    // sheets can share v to high order, but some orbit point among
    // a_0 .. a_{p-1} always separates them; the final point a_p = a + Phi
    // only amplifies Newton noise and is excluded
    let orbit_start = CubicMap::new(start_a, v_start).orbit(start_a, p);
    let closes = |v: Complex64| -> bool {
        let orbit = CubicMap::new(start_a, v).orbit(start_a, p);
        orbit[..p]
            .iter()
            .zip(&orbit_start[..p])
            .all(|(x, y)| (x - y).norm() < 1e-6 * scale)
    };
    for turn in 0..mu {
        for k in 1..=n {
            let theta = 2.0 * std::f64::consts::PI * (turn as f64 + k as f64 / n as f64);
            let a = start_a * Complex64::from_polar(1.0, theta);
            fiber = crate::dynamics::track_fiber_path_with(p, a_prev, &fiber, a, 1e-9)?;
            let f = integrand(a, fiber[idx], p)?;
            let dtheta = 2.0 * std::f64::consts::PI / n as f64;
            integral += 0.5 * (f_prev + f) * dtheta;
            a_prev = a;
            f_prev = f;
        }
        // the loop may only close after the final turn
        if turn + 1 < mu && closes(fiber[idx]) {
            return Err(GeomError::SheetMismatch(turn + 1));
        }
    }
    if !closes(fiber[idx]) {
        return Err(GeomError::SheetMismatch(mu));
    }
    Ok(integral / (2.0 * std::f64::consts::PI * c64(0.0, 1.0)))
}

/// `dt/dtheta = (da/dtheta)/Y_p` on the circle.
fn integrand(a: Complex64, v: Complex64, p: usize) -> Result<Complex64, GeomError> {
    let (_, y) = phi_partials(a, v, p);
    if y.norm() < 1e-300 {
        return Err(GeomError::StepCollapse);
    }
    // da/dtheta = i a
    Ok(c64(0.0, 1.0) * a / y)
}

/// Leading behavior of the canonical parameter inside an escape region.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum TLeading {
    /// Nontrivial kneading: `t ~ coeff * xi^(nu/mu)` (finite at the ideal
    /// point).
    Monomial { coeff: Complex64, exp: Exponent },
    /// Trivial kneading: t has a simple pole, `t ~ a / psi` with
    /// `psi = lim a/t = psi_p(2c_1, ..., 2c_{p-1})`.
    Pole { lim_a_over_t: Complex64 },
}

/// Integrate the asymptotics `da/dt ~ psi_r(2c) prod m_j*/xi^2` in closed
/// form.
pub fn t_leading(region: &RegionDescriptor) -> Result<TLeading, GeomError> {
    let p = region.p;
    let n = region.grid_period();
    let r = p / n;
    let c1 = region.quad_center.unwrap_or_else(|| c64(0.0, 0.0));
    let orbit = if r == 1 {
        Vec::new()
    } else {
        quadratic_orbit(c1, r).ok_or(GeomError::ProjectionFailed)?
    };
    // orbit is already c_1, ..., c_{r-1}
    let doubled: Vec<Complex64> = orbit.iter().map(|&c| 2.0 * c).collect();
    let psi = psi_eval(&doubled);

    if region.kneading.is_trivial() {
        return Ok(TLeading::Pole { lim_a_over_t: psi });
    }

    // t = int -dxi/(3 xi^2 psi_r) prod_{j<n} (xi^2/m_j*)
    let mut coeff = c64(1.0, 0.0);
    let mut exp = Exponent::from_integer(2 * (n as i64 - 1) - 2);
    for j in 1..n {
        let s = star(&region.monomials[j - 1], region.kneading.bit(j))
            .map_err(|_| GeomError::ProjectionFailed)?;
        coeff /= s.coeff;
        exp -= s.exp;
    }
    let power = exp + Exponent::from_integer(1); // after integration
    let power_f = *power.numer() as f64 / *power.denom() as f64;
    let t_coeff = -coeff / (3.0 * psi * power_f);
    Ok(TLeading::Monomial { coeff: t_coeff, exp: power })
}

/// Degree `d_p` of the affine curve S_p: `sum_{n | p} d_n = 3^(p-1)`.
pub fn degree(p: usize) -> u64 {
    let mut d = vec![0u64; p + 1];
    for k in 1..=p {
        let mut val = 3u64.pow(k as u32 - 1);
        for m in 1..k {
            if k % m == 0 {
                val -= d[m];
            }
        }
        d[k] = val;
    }
    d[p]
}

/// Euler characteristic of the affine curve: `chi(S_p) = (2 - p) d_p`.
pub fn euler_affine(p: usize) -> i64 {
    (2 - p as i64) * degree(p) as i64
}

/// Euler characteristic of the compactification:
/// `chi(S_p bar) = N_p + (2 - p) d_p`.
pub fn euler_compact(p: usize, regions: usize) -> i64 {
    regions as i64 + euler_affine(p)
}

/// The same Euler characteristic from the winding numbers:
/// `chi(S_p bar) = sum over regions of (1 - nu)`.
pub fn euler_from_windings(regions: &[RegionDescriptor]) -> i64 {
    regions.iter().map(|r| 1 - r.nu).sum()
}

/// Genus from `chi = 2 - 2g`; meaningful only if the curve is connected,
/// which is proven for p <= 4 and conjectural beyond.
pub fn genus_if_connected(chi: i64) -> i64 {
    (2 - chi) / 2
}

/// The symmetric product `prod_k (a - F^j(a))` over the d_p fiber points;
/// by the elimination argument it is a nonzero constant in a (conjecturally
/// +1), so values at two base points must agree.
pub fn sym_product(p: usize, a_hat: Complex64, j: usize) -> Result<Complex64, GeomError> {
    let roots = exact_period_fiber(p, a_hat)?;
    let mut prod = c64(1.0, 0.0);
    for v in roots {
        let map = CubicMap::new(a_hat, v);
        let orbit = map.orbit(a_hat, j);
        prod *= a_hat - orbit[j];
    }
    Ok(prod)
}

/// t-offset of the ideal point of a region relative to a base point inside
/// it, by integrating dt = da/Y_p radially out to a large radius (where t
/// converges for nontrivial kneading).
pub fn ideal_point_t(base: &CurvePoint, r_max: f64, steps: usize) -> Result<Complex64, GeomError> {
    let dir = base.a / base.a.norm();
    let mut t = c64(0.0, 0.0);
    let mut a_prev = base.a;
    let mut v_prev = base.v;
    let g = (r_max / base.a.norm()).powf(1.0 / steps as f64);
    let (_, y0) = phi_partials(a_prev, v_prev, base.p);
    let mut f_prev = 1.0 / y0;
    for k in 1..=steps {
        let a = dir * base.a.norm() * g.powi(k as i32);
        let v = step_root(base.p, a_prev, v_prev, a).ok_or(GeomError::ProjectionFailed)?;
        let (_, y) = phi_partials(a, v, base.p);
        if y.norm() < 1e-300 {
            return Err(GeomError::StepCollapse);
        }
        let f = 1.0 / y;
        t += 0.5 * (f_prev + f) * (a - a_prev);
        a_prev = a;
        v_prev = v;
        f_prev = f;
    }
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{enumerate_regions, EnumerateOptions};

    fn sample_point(p: usize, r: f64) -> CurvePoint {
        // a period-p fiber point on the positive real axis
        let a = c64(r, 0.0);
        let v = exact_period_fiber(p, a).unwrap()[0];
        CurvePoint { a, v, p }
    }

    #[test]
    fn partials_match_finite_differences() {
        // moderate radii keep the higher derivatives of Phi tame enough for
        // a 1e-6 central difference to resolve 1e-5 relative agreement
        let h = 1e-6;
        for p in [1usize, 2, 3, 4] {
            for r in [1.7, 2.3] {
                let a = c64(r, 0.3);
                for v in crate::dynamics::fiber_roots(p, a).unwrap() {
                    let pt = CurvePoint { a, v, p };
                    let (pa, pv) = pt.partials();
                    let phi = |a: Complex64, v: Complex64| phi_and_dv(a, v, p).0;
                    let fd_a = (phi(pt.a + h, pt.v) - phi(pt.a - h, pt.v)) / (2.0 * h);
                    let fd_v = (phi(pt.a, pt.v + h) - phi(pt.a, pt.v - h)) / (2.0 * h);
                    let scale = pa.norm().max(pv.norm()).max(1.0);
                    assert!((pa - fd_a).norm() < 1e-5 * scale, "dPhi/da at p={p}");
                    assert!((pv - fd_v).norm() < 1e-5 * scale, "dPhi/dv at p={p}");
                }
            }
        }
        // p = 1: Y_1 = 1, dt = da
        let pt = sample_point(1, 5.0);
        assert_eq!(pt.partials().1, c64(1.0, 0.0));
    }

    #[test]
    fn y_equals_psi_of_orbit_derivatives() {
        for p in [2usize, 3, 4] {
            let pt = sample_point(p, 9.0);
            let orbit = pt.map().orbit(pt.a, p);
            let xs: Vec<Complex64> = (0..p - 1)
                .map(|j| 3.0 * (orbit[j + 1] * orbit[j + 1] - pt.a * pt.a))
                .collect();
            let (_, y) = pt.partials();
            let psi = psi_eval(&xs);
            assert!((y - psi).norm() < 1e-9 * y.norm().max(1.0), "p = {p}");
        }
    }

    #[test]
    fn flow_identity_and_reversibility() {
        let base = sample_point(3, 8.0);
        assert_eq!(flow(&base, c64(0.0, 0.0), 512).unwrap(), base);

        // a t-displacement that moves a by about half a unit
        let (_, y) = base.partials();
        let t = c64(0.4, 0.3) / y.norm();
        let fwd = flow(&base, t, 512).unwrap();
        assert!((fwd.a - base.a).norm() > 0.05, "the flow must move");
        let back = flow(&fwd, -t, 512).unwrap();
        let err = (back.a - base.a).norm() + (back.v - base.v).norm();
        // within 1e-6 |t| measured through the chart, i.e. relative to the
        // excursion |Y| |t| in parameter space
        let excursion = (fwd.a - base.a).norm() + (fwd.v - base.v).norm();
        assert!(err < 1e-6 * excursion, "round trip error {err:.2e}");
    }

    #[test]
    fn flow_moves_bottcher_holomorphically() {
        // d B / dt along two nearby flows stays continuous
        let base = sample_point(2, 9.0);
        let h = 5e-5;
        let b0 = base.map().bottcher_cocritical().unwrap();
        let b1 = flow(&base, c64(h, 0.0), 512).unwrap().map().bottcher_cocritical().unwrap();
        let b2 = flow(&base, c64(2.0 * h, 0.0), 512).unwrap().map().bottcher_cocritical().unwrap();
        let d1 = (b1 - b0) / h;
        let d2 = (b2 - b1) / h;
        assert!((d1 - d2).norm() < 0.05 * d1.norm().max(1e-9), "d1={d1} d2={d2}");
    }

    #[test]
    fn degree_and_euler_tables() {
        assert_eq!(degree(1), 1);
        assert_eq!(degree(2), 2);
        assert_eq!(degree(3), 8);
        assert_eq!(degree(4), 24);
        assert_eq!(degree(6), 232);
        assert_eq!(euler_affine(1), 1);
        assert_eq!(euler_affine(2), 0);
        assert_eq!(euler_affine(3), -8);
        assert_eq!(euler_affine(4), -48);
        assert_eq!(euler_compact(3, 8), 0);
        assert_eq!(euler_compact(4, 20), -28);
        assert_eq!(genus_if_connected(0), 1);
        assert_eq!(genus_if_connected(-28), 15);
    }

    #[test]
    fn sym_product_constant_in_a() {
        for (p, j) in [(2usize, 1usize), (3, 1), (3, 2)] {
            let s1 = sym_product(p, c64(9.0, 0.0), j).unwrap();
            let s2 = sym_product(p, c64(14.0, 0.5), j).unwrap();
            assert!(
                (s1 - s2).norm() < 1e-6 * s1.norm().max(1.0),
                "p={p} j={j}: {s1} vs {s2}"
            );
        }
    }

    #[test]
    fn t_leading_matches_table_rows() {
        let regions = enumerate_regions(3, EnumerateOptions::default()).unwrap();
        // kneading 110: t ~ -xi^3/9
        let r110 = regions.iter().find(|r| r.label == "110").unwrap();
        match t_leading(r110).unwrap() {
            TLeading::Monomial { coeff, exp } => {
                assert_eq!(exp, Exponent::from_integer(3));
                assert!((coeff - c64(-1.0 / 9.0, 0.0)).norm() < 1e-9, "coeff {coeff}");
            }
            other => panic!("unexpected {other:?}"),
        }
        // airplane region: lim a/t = psi_3 = -5.649
        let airplane = regions.iter().find(|r| r.label.contains("airplane")).unwrap();
        match t_leading(airplane).unwrap() {
            TLeading::Pole { lim_a_over_t } => {
                assert!((lim_a_over_t - c64(-5.649, 0.0)).norm() < 1e-3);
            }
            other => panic!("unexpected {other:?}"),
        }
        // kneading 100 with m_2 = beta xi: t ~ (-beta/|2 beta|^2 ...) = +-xi^2/12
        let r100 = regions.iter().find(|r| r.label.starts_with("100")).unwrap();
        match t_leading(r100).unwrap() {
            TLeading::Monomial { coeff, exp } => {
                assert_eq!(exp, Exponent::from_integer(2));
                assert!((coeff.norm() - 1.0 / 12.0).abs() < 1e-9);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn residues_vanish_period_two() {
        let regions = enumerate_regions(2, EnumerateOptions::default()).unwrap();
        for r in &regions {
            let res = residue_at_ideal(r, 40.0, 512).unwrap();
            assert!(res.norm() < 1e-6, "residue {res} at {}", r.label);
        }
    }

    #[test]
    fn render_is_deterministic_and_classifies_base() {
        let base = sample_point(2, 9.0);
        // 1x1 image at t = 0 classifies the base itself
        let img = render(&base, 1, 1, c64(0.0, 0.0), 1e-4, 128);
        let direct = base.map().escape_time(-base.a);
        match direct {
            None => assert_eq!(img.code(0, 0), CODE_LOCUS),
            Some(n) => assert_eq!(img.code(0, 0), n as u16 + 1),
        }

        let img1 = render(&base, 8, 6, c64(0.0, 0.0), 2e-5, 128);
        let img2 = render(&base, 8, 6, c64(0.0, 0.0), 2e-5, 128);
        assert_eq!(img1.codes, img2.codes);

        let mut ppm = Vec::new();
        img1.write_ppm(&mut ppm).unwrap();
        assert!(ppm.starts_with(b"P6\n8 6\n255\n"));
        assert_eq!(ppm.len(), "P6\n8 6\n255\n".len() + 8 * 6 * 3);
    }

    #[test]
    fn ideal_point_reachable() {
        // t converges at the ideal point of a nontrivial-kneading region
        let base = sample_point(2, 10.0);
        let t1 = ideal_point_t(&base, 1e6, 500).unwrap();
        let t2 = ideal_point_t(&base, 1e7, 600).unwrap();
        // the kneading-10 region has nu/mu = 1, so the tail decays like 1/R
        assert!((t1 - t2).norm() < 5e-7, "tail converged: {t1} vs {t2}");
    }
}
