//! Branner-Hubbard marked grids and the invariants they determine.
//!
//! The critical marked grid of an escape region records, for each point
//! `a_k` of the marked orbit, the deepest puzzle level at which `a_k` shares
//! its puzzle piece with the critical point `a_0`.  The grid determines the
//! annulus moduli `MOD_l = 1/2^(k-1)`, and the order formula
//! `ord(u_j) = sum_{l=1}^{L_0(a_j)} MOD_l` recovers the exponents of the
//! region's Puiseux series.  From those exponents come the multiplicity
//! (their least common denominator, always a power of two) and the winding
//! number of the canonical parameter around the ideal point.
//!
//! All level arithmetic here is exact: moduli and orders are rationals with
//! power-of-two denominators.

use crate::series::Monomial;
use crate::solver::{KneadingSequence, SolutionVector};
use crate::{Complex64, Exponent};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("least common denominator {0} of the orders is not a power of two")]
    NotPowerOfTwo(i64),
    #[error("no marked grid reproduces the given orders (column {0})")]
    Inconsistent(usize),
    #[error("order {0} falls between achievable level sums in column {1}")]
    LevelAmbiguous(Exponent, usize),
    #[error("no periodic tail detected within {0} levels")]
    NoPeriodicTail(u32),
    #[error("grid period {0} does not divide the period {1}")]
    BadPeriod(usize, usize),
}

/// Column depths `L_0(a_k)` of the critical marked grid; `None` stands for
/// an infinite depth (the column is marked at every level).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MarkedGrid {
    depth: Vec<Option<u32>>,
}

impl MarkedGrid {
    /// Build from column depths; `depth[0]` must be infinite and the period
    /// of the infinite columns must divide p.
    pub fn new(depth: Vec<Option<u32>>) -> Result<Self, GridError> {
        let p = depth.len();
        assert!(p >= 1);
        assert!(depth[0].is_none(), "column 0 is marked at all levels");
        let g = MarkedGrid { depth };
        let n = g.grid_period();
        if p % n != 0 {
            return Err(GridError::BadPeriod(n, p));
        }
        // every column at a multiple of the grid period must be infinite
        for k in (0..p).step_by(n) {
            if g.depth[k].is_some() {
                return Err(GridError::BadPeriod(n, p));
            }
        }
        Ok(g)
    }

    pub fn period(&self) -> usize {
        self.depth.len()
    }

    pub fn depths(&self) -> &[Option<u32>] {
        &self.depth
    }

    /// Least n > 0 whose column has infinite depth; divides the period.
    pub fn grid_period(&self) -> usize {
        let p = self.depth.len();
        (1..=p).find(|&n| self.depth[n % p].is_none()).unwrap()
    }

    /// The grid entry `M(l, k) = [l <= L_0(a_k)]`, periodic in k.
    pub fn marked(&self, level: u32, k: usize) -> bool {
        match self.depth[k % self.depth.len()] {
            None => true,
            Some(d) => level <= d,
        }
    }

    /// Kneading bits: `sigma(a_k) = 1 - M(1, k)`.
    pub fn kneading(&self) -> KneadingSequence {
        let p = self.depth.len();
        let bits = (1..=p).map(|k| if self.marked(1, k) { 0 } else { 1 }).collect();
        KneadingSequence::new(bits).expect("column 0 is infinite, so the last bit is 0")
    }

    /// Largest finite depth.
    pub fn max_finite_depth(&self) -> u32 {
        self.depth.iter().flatten().copied().max().unwrap_or(0)
    }

    /// Figure-style ASCII rendering: one line per level, `*` for marked
    /// entries, with the all-marked top row joined by dashes.
    pub fn to_ascii(&self, levels: u32) -> String {
        let p = self.depth.len();
        let mut out = String::new();
        for level in 0..=levels {
            let mut line = String::new();
            for k in 0..=p {
                let mark = if self.marked(level, k) { '*' } else { '.' };
                line.push(mark);
                if k < p {
                    line.push(if level == 0 { '-' } else { ' ' });
                }
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        out
    }
}

/// Normalized modulus `MOD_l` of the level-l annulus around orbit point
/// `a_col`: `1/2^(k-1)` where k counts the critical pieces met by the first
/// l forward images.
pub fn mod_level_at(grid: &MarkedGrid, col: usize, level: u32) -> Exponent {
    assert!(level >= 1);
    let hits = (0..level).filter(|&i| grid.marked(level - i, col + i as usize)).count() as u32;
    // k = 0 can only happen off the critical column (a level-one annulus of
    // modulus 2); the formula 1/2^(k-1) covers it.
    pow2_exponent(1 - hits as i64)
}

/// `MOD_l` down the critical column (the quantity in the order formula).
pub fn mod_level(grid: &MarkedGrid, level: u32) -> Exponent {
    mod_level_at(grid, 0, level)
}

fn pow2_exponent(e: i64) -> Exponent {
    if e >= 0 {
        Exponent::from_integer(1i64 << e)
    } else {
        Exponent::new(1, 1i64 << (-e))
    }
}

/// `ord(u_j)` from the grid: the finite sum of `MOD_l` up to `L_0(a_j)`,
/// or for infinite columns the convergent sum evaluated exactly by detecting
/// the periodic halving of the tail.
pub fn ord_from_grid(grid: &MarkedGrid, j: usize) -> Result<Exponent, GridError> {
    let p = grid.period();
    assert!(j >= 1 && j < p, "interior index");
    match grid.depth[j % p] {
        Some(depth) => {
            let mut sum = Exponent::from_integer(0);
            for level in 1..=depth {
                sum += mod_level(grid, level);
            }
            Ok(sum)
        }
        None => infinite_column_order(grid),
    }
}

/// Exact value of `sum_{l>=1} MOD_l` for a grid with infinite columns: after
/// a transient the moduli repeat with ratio 1/2 every grid period.
fn infinite_column_order(grid: &MarkedGrid) -> Result<Exponent, GridError> {
    let n = grid.grid_period() as u32;
    let p = grid.period() as u32;
    let cap = 4 * p;
    let mods: Vec<Exponent> = (1..=cap + 2 * n).map(|l| mod_level(grid, l)).collect();
    let half = Exponent::new(1, 2);
    'start: for start in 0..=cap {
        for l in start..start + 2 * n {
            let here = mods[l as usize];
            let there = mods[(l + n) as usize];
            if there != here * half {
                continue 'start;
            }
        }
        let head: Exponent = mods[..start as usize].iter().sum();
        let cycle: Exponent = mods[start as usize..(start + n) as usize].iter().sum();
        return Ok(head + cycle * Exponent::from_integer(2));
    }
    Err(GridError::NoPeriodicTail(cap))
}

/// Least common denominator of the orders; always a power of two for orders
/// coming from a marked grid.
pub fn multiplicity(orders: &[Exponent]) -> Result<i64, GridError> {
    let lcd = orders.iter().map(|q| *q.denom()).fold(1, crate::series::lcm);
    if lcd & (lcd - 1) != 0 {
        return Err(GridError::NotPowerOfTwo(lcd));
    }
    Ok(lcd)
}

/// Winding number of the canonical parameter over the ideal point:
/// `nu = (2n - 3 - ord(m_1 ... m_{n-1})) mu` with n the grid period.  Trivial
/// kneading yields -1.
pub fn winding_number(grid: &MarkedGrid) -> Result<i64, GridError> {
    let p = grid.period();
    let n = grid.grid_period();
    let orders: Result<Vec<Exponent>, GridError> =
        (1..p).map(|j| ord_from_grid(grid, j)).collect();
    let orders = orders?;
    let mu = multiplicity(&orders)?;
    let inner: Exponent = orders[..n - 1].iter().sum();
    let nu = (Exponent::from_integer(2 * n as i64 - 3) - inner) * Exponent::from_integer(mu);
    assert!(nu.is_integer(), "winding number must be an integer");
    Ok(nu.to_integer())
}

/// Which of the four grid rules failed, and where.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RuleReport {
    Pass,
    Fail { rule: u8, level: u32, column: usize },
}

impl RuleReport {
    pub fn passed(&self) -> bool {
        matches!(self, RuleReport::Pass)
    }
}

/// Check the four grid rules on a depth-encoded grid.  Rule R1 (column
/// monotonicity) holds by construction for depth vectors; R2-R4 are checked
/// in marking form with `d(a_0, a_k) = 2^(-L_0(a_k))`.
pub fn validate_rules(grid: &MarkedGrid) -> RuleReport {
    let p = grid.period();
    let lmax = grid.max_finite_depth() + p as u32 + 2;
    let depth_of = |k: usize| grid.depth[k % p];

    // R2: M(l,k) = 1 forces M(l-i, k+i) = M(l-i, i) for 0 <= i <= l.
    for k in 0..p {
        for level in 1..=lmax {
            if !grid.marked(level, k) {
                continue;
            }
            for i in 0..=level {
                let li = level - i;
                if li == 0 {
                    continue;
                }
                if grid.marked(li, k + i as usize) != grid.marked(li, i as usize) {
                    return RuleReport::Fail { rule: 2, level, column: k };
                }
            }
        }
    }

    // R3: L_0(a_m) = l, L_0(a_i) < l - i for 0 < i < k, L_0(a_k) > l - k
    //     imply L_0(a_{m+k}) = l - k.
    for m in 1..p {
        let Some(l) = depth_of(m) else { continue };
        for k in 1..l as usize {
            let lk = l - k as u32;
            let hyp_i = (1..k).all(|i| match depth_of(i) {
                Some(di) => (di as i64) < l as i64 - i as i64,
                None => false,
            });
            if !hyp_i {
                continue;
            }
            let hyp_k = match depth_of(k) {
                Some(dk) => dk > lk,
                None => true,
            };
            if !hyp_k {
                continue;
            }
            let ok = depth_of(m + k) == Some(lk);
            if !ok {
                return RuleReport::Fail { rule: 3, level: l, column: (m + k) % p };
            }
        }
    }

    // R4: L_0(a_k) = l >= 1, L_0(a_{k+i}) < l - i for 0 < i < l, and
    //     L_0(a_l) = 0 imply L_0(a_{l+k}) >= 1.
    for k in 1..p {
        let Some(l) = depth_of(k) else { continue };
        if l < 1 {
            continue;
        }
        let hyp_i = (1..l as usize).all(|i| match depth_of(k + i) {
            Some(d) => (d as i64) < l as i64 - i as i64,
            None => false,
        });
        if !hyp_i {
            continue;
        }
        if depth_of(l as usize) != Some(0) {
            continue;
        }
        let ok = match depth_of(l as usize + k) {
            Some(d) => d >= 1,
            None => true,
        };
        if !ok {
            return RuleReport::Fail { rule: 4, level: l, column: (l as usize + k) % p };
        }
    }

    RuleReport::Pass
}

/// Check R1 and R2 on an explicit marking matrix (row 0 first).  Only used
/// for raw matrices that cannot be expressed as depth vectors.
pub fn validate_matrix(rows: &[Vec<bool>]) -> RuleReport {
    for (k, _) in rows.first().map(|r| r.iter().enumerate()).into_iter().flatten() {
        if !rows[0][k] {
            return RuleReport::Fail { rule: 1, level: 0, column: k };
        }
        for level in 1..rows.len() {
            if rows[level][k] && !rows[level - 1][k] {
                return RuleReport::Fail { rule: 1, level: level as u32, column: k };
            }
        }
    }
    RuleReport::Pass
}

/// Rebuild a depth vector from exact orders and a kneading sequence by
/// filling markings level by level: `M(l, k) = [S_l <= q_k]` where `S_l` is
/// the running sum of `MOD_l` computed from the already-filled levels.
pub fn grid_from_orders(
    orders: &[Exponent],
    kneading: &KneadingSequence,
) -> Result<MarkedGrid, GridError> {
    let p = kneading.period();
    assert_eq!(orders.len(), p - 1);
    let lmax = 4 * p as u32 + 4;

    // depth[k] = current number of marked levels; saturates at lmax
    let mut depth = vec![0u32; p];
    let mut grid_rows: Vec<Vec<bool>> = Vec::new();
    let mut partial = Exponent::from_integer(0);
    for level in 1..=lmax {
        // MOD_level from rows < level plus the always-marked column 0
        let hits = (0..level)
            .filter(|&i| {
                let col = i as usize % p;
                let li = level - i;
                if col == 0 && li as usize > grid_rows.len() {
                    true // column 0 is marked at every level
                } else if li as usize <= grid_rows.len() {
                    grid_rows[(li - 1) as usize][col]
                } else {
                    false
                }
            })
            .count() as u32;
        partial += pow2_exponent(1 - hits as i64);
        let mut row = vec![false; p];
        row[0] = true;
        for k in 1..p {
            if partial <= orders[k - 1] {
                row[k] = true;
                if depth[k] == level - 1 {
                    depth[k] = level;
                }
            }
        }
        grid_rows.push(row);
    }

    let depths: Vec<Option<u32>> = (0..p)
        .map(|k| if k == 0 || depth[k] >= lmax { None } else { Some(depth[k]) })
        .collect();
    let grid = MarkedGrid::new(depths).map_err(|_| GridError::Inconsistent(0))?;

    // round-trip check: the rebuilt grid must reproduce the orders exactly
    for (idx, &q) in orders.iter().enumerate() {
        let back = ord_from_grid(&grid, idx + 1)?;
        if back != q {
            return Err(GridError::Inconsistent(idx + 1));
        }
    }
    if &grid.kneading() != kneading {
        return Err(GridError::Inconsistent(0));
    }
    Ok(grid)
}

/// The orbit pseudometric `d(a_i, a_j) = 2^(-L)` on the marked orbit,
/// computed from `ord(u_i - u_j)` matched against the level sums down the
/// columns of both points.
pub fn orbit_pseudometric(
    grid: &MarkedGrid,
    series: &SolutionVector,
) -> Result<Vec<Vec<Exponent>>, GridError> {
    let p = grid.period();
    assert_eq!(series.period(), p);
    let zero = Exponent::from_integer(0);
    let mut d = vec![vec![zero; p]; p];
    for i in 0..p {
        for j in i + 1..p {
            let value = pair_distance(grid, series, i, j)?;
            d[i][j] = value;
            d[j][i] = value;
        }
    }
    Ok(d)
}

fn pair_distance(
    grid: &MarkedGrid,
    series: &SolutionVector,
    i: usize,
    j: usize,
) -> Result<Exponent, GridError> {
    let p = grid.period();
    // u_0 = u_p = 0
    let ui = series.component(if i == 0 { p } else { i });
    let uj = series.component(if j == 0 { p } else { j });
    let diff = ui.sub(uj);
    let scale = ui.max_coeff().max(uj.max_coeff()).max(1.0);
    match diff.ord_with_tol(1e-9 * scale) {
        None => Ok(Exponent::from_integer(0)), // same component of the Julia set
        Some(s) => {
            let la = separation_level(grid, i, s)?;
            let lb = separation_level(grid, j, s)?;
            if la != lb {
                return Err(GridError::LevelAmbiguous(s, j));
            }
            Ok(pow2_exponent(-(la as i64)))
        }
    }
}

/// Level L with `sum_{l<=L} MOD_l(a_col) = s`; the pieces around the column
/// point separate exactly below it.
fn separation_level(grid: &MarkedGrid, col: usize, s: Exponent) -> Result<u32, GridError> {
    let mut sum = Exponent::from_integer(0);
    if s == sum {
        return Ok(0);
    }
    let cap = 4 * grid.period() as u32 + 8;
    for level in 1..=cap {
        sum += mod_level_at(grid, col, level);
        if sum == s {
            return Ok(level);
        }
        if sum > s {
            return Err(GridError::LevelAmbiguous(s, col));
        }
    }
    Err(GridError::LevelAmbiguous(s, col))
}

/// Everything the artifact knows about one escape region.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegionDescriptor {
    pub p: usize,
    pub kneading: KneadingSequence,
    /// Human label: the kneading string, with an `s`/`t` style suffix or a
    /// quadratic-center tag when one kneading hosts several regions.
    pub label: String,
    pub grid: MarkedGrid,
    pub monomials: Vec<Monomial>,
    pub mu: i64,
    pub nu: i64,
    pub series: SolutionVector,
    /// Center `c_1` of the associated quadratic map (period p/n).
    pub quad_center: Option<Complex64>,
    /// Whether the region equals its dual under `(a, v) -> (-a, -v)`.
    pub self_dual: bool,
    /// A fiber point `(a, v)` inside the region, for numerical work.
    pub sample: Option<(Complex64, Complex64)>,
}

impl RegionDescriptor {
    /// Assemble the invariants of a solved region.
    pub fn from_series(
        series: SolutionVector,
        quad_center: Option<Complex64>,
        label: String,
        sample: Option<(Complex64, Complex64)>,
    ) -> Result<Self, GridError> {
        let p = series.period();
        if p == 1 {
            let grid = MarkedGrid::new(vec![None])?;
            return Ok(RegionDescriptor {
                p,
                kneading: KneadingSequence::new(vec![0]).unwrap(),
                label,
                grid,
                monomials: Vec::new(),
                mu: 1,
                nu: -1,
                series,
                quad_center,
                self_dual: true,
                sample,
            });
        }
        let kneading = series.kneading().ok_or(GridError::Inconsistent(0))?;
        let orders = series.orders();
        let grid = grid_from_orders(&orders, &kneading)?;
        let mu = multiplicity(&orders)?;
        let nu = winding_number(&grid)?;
        let monomials = series.leading_monomials().map_err(|_| GridError::Inconsistent(0))?;
        let tol = 1e-7 * series.interior().iter().map(|s| s.max_coeff()).fold(1.0, f64::max);
        let self_dual = series.galois_equivalent(&series.dual(), tol);
        Ok(RegionDescriptor {
            p,
            kneading,
            label,
            grid,
            monomials,
            mu,
            nu,
            series,
            quad_center,
            self_dual,
            sample,
        })
    }

    pub fn orders(&self) -> Vec<Exponent> {
        self.series.orders()
    }

    /// Grid period n; the region is a satellite when n < p.
    pub fn grid_period(&self) -> usize {
        self.grid.grid_period()
    }
}

impl Serialize for Monomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut m = s.serialize_map(Some(3))?;
        m.serialize_entry("re", &self.coeff.re)?;
        m.serialize_entry("im", &self.coeff.im)?;
        m.serialize_entry("exp", &[*self.exp.numer(), *self.exp.denom()])?;
        m.end()
    }
}

impl<'de> Deserialize<'de> for Monomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            re: f64,
            im: f64,
            exp: [i64; 2],
        }
        let r = Repr::deserialize(d)?;
        Monomial::new(Complex64::new(r.re, r.im), Exponent::new(r.exp[0], r.exp[1]))
            .map_err(serde::de::Error::custom)
    }
}
