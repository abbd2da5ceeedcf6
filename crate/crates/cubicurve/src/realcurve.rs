//! Components of the real and pure-imaginary loci of S_p.
//!
//! A map is real when `(a, v)` is real (fixed by complex conjugation) and
//! pure imaginary when `(a, v)` is, after conjugating, a real cubic with
//! negative leading coefficient.  Each connected component of either locus
//! is a path between two ideal points and carries exactly one center of
//! type A or B, described combinatorially by a piecewise-linear model: a
//! cyclic permutation of `{0, ..., p-1}` whose extension (constant slope
//! > 1 outside for the real case, < -1 for the pure-imaginary case) is
//! bimodal, together with the choice of which extremum is the marked
//! critical point.  The star-kneading of the model resolves to the kneading
//! sequences of the two ideal endpoints, which differ in exactly one bit.

use crate::solver::KneadingSequence;
use serde::Serialize;

/// Which anti-holomorphic involution fixes the family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Orientation {
    /// Real maps: outer slope > 1, shape up-down-up (max left of min).
    Plus,
    /// Pure imaginary maps: outer slope < -1, shape down-up-down.
    Minus,
}

/// A symbol of the kneading sequence at a Type A/B center.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum StarSym {
    Zero,
    One,
    Star,
}

/// Kneading with exactly one star at the free critical point's slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct StarKneading(pub Vec<StarSym>);

impl std::fmt::Display for StarKneading {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for s in &self.0 {
            match s {
                StarSym::Zero => write!(f, "0")?,
                StarSym::One => write!(f, "1")?,
                StarSym::Star => write!(f, "*")?,
            }
        }
        Ok(())
    }
}

impl StarKneading {
    /// The two resolutions of the star; for the degenerate cases where the
    /// star sits at the final slot (p <= 2, type A) only the 0-resolution is
    /// a legal kneading and both endpoints coincide.
    pub fn resolutions(&self) -> (KneadingSequence, KneadingSequence) {
        let build = |star_bit: u8| {
            let bits: Vec<u8> = self
                .0
                .iter()
                .map(|s| match s {
                    StarSym::Zero => 0,
                    StarSym::One => 1,
                    StarSym::Star => star_bit,
                })
                .collect();
            KneadingSequence::new(bits)
        };
        let zero = build(0).expect("0-resolution is always a legal kneading");
        let one = build(1).unwrap_or_else(|| zero.clone());
        (zero, one)
    }
}

/// One component of the real or pure-imaginary locus, encoded by its
/// piecewise-linear center model.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct BimodalModel {
    pub p: usize,
    /// `perm[x]` is the position the point at position x maps to.
    pub perm: Vec<usize>,
    pub orientation: Orientation,
    /// Position of the marked critical point (an extremum of the extension).
    pub marked: usize,
    /// Position of the free critical point (the other extremum); equals
    /// `marked` only in the monotone type A cases with p <= 2.
    pub free: usize,
}

impl BimodalModel {
    /// Addresses of `a_1, ..., a_p` relative to the free critical point,
    /// with the star at the slot where the orbit passes through it.
    pub fn star_kneading(&self) -> StarKneading {
        if self.marked == self.free {
            // monotone type A (p <= 2, merged critical points): for p = 2
            // the endpoints 00 and 10 differ in the first bit, so that slot
            // carries the star; for p = 1 the component closes on itself and
            // the lone slot resolves to 0 only
            let mut syms = vec![StarSym::Zero; self.p];
            syms[0] = StarSym::Star;
            return StarKneading(syms);
        }
        let marked_side = self.marked < self.free;
        let mut syms = Vec::with_capacity(self.p);
        let mut pos = self.marked;
        for _ in 1..=self.p {
            pos = self.perm[pos];
            syms.push(if pos == self.free {
                StarSym::Star
            } else if (pos < self.free) == marked_side {
                StarSym::Zero
            } else {
                StarSym::One
            });
        }
        StarKneading(syms)
    }

    /// Image under the 180-degree rotation `(a, v) -> (-a, -v)`, which
    /// reflects the model left-right.
    pub fn involution(&self) -> BimodalModel {
        let p = self.p;
        let r = |x: usize| p - 1 - x;
        let mut perm = vec![0; p];
        for x in 0..p {
            perm[r(x)] = r(self.perm[x]);
        }
        BimodalModel {
            p,
            perm,
            orientation: self.orientation,
            marked: r(self.marked),
            free: r(self.free),
        }
    }
}

fn sign(d: i64) -> i8 {
    if d > 0 {
        1
    } else {
        -1
    }
}

/// Extrema of the extension of `perm` with outer slope sign `eps`: positions
/// where the incoming and outgoing directions disagree.  Returns `None`
/// unless the extended map is bimodal (exactly two extrema).
fn bimodal_extrema(perm: &[usize], eps: i8) -> Option<(usize, usize)> {
    let p = perm.len();
    let dir = |x: usize| -> i8 {
        // direction of the segment [x, x+1]; outer segments carry eps
        sign(perm[x + 1] as i64 - perm[x] as i64)
    };
    let into = |x: usize| if x == 0 { eps } else { dir(x - 1) };
    let out = |x: usize| if x == p - 1 { eps } else { dir(x) };
    let extrema: Vec<usize> = (0..p).filter(|&x| into(x) != out(x)).collect();
    match extrema.as_slice() {
        [a, b] => Some((*a, *b)),
        _ => None,
    }
}

fn is_cyclic(perm: &[usize]) -> bool {
    let mut x = 0;
    for _ in 1..perm.len() {
        x = perm[x];
        if x == 0 {
            return false;
        }
    }
    perm[x] == 0
}

fn permutations(p: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..p).collect();
    heap_permute(&mut items, p, &mut out);
    out
}

fn heap_permute(items: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == 1 {
        out.push(items.clone());
        return;
    }
    for i in 0..k {
        heap_permute(items, k - 1, out);
        if k % 2 == 0 {
            items.swap(i, k - 1);
        } else {
            items.swap(0, k - 1);
        }
    }
}

/// Enumerate the components of `S_p^(R+/-)`; with `mod_involution` the
/// 180-degree-rotation pairs are counted once.
pub fn enumerate_components(
    p: usize,
    orientation: Option<Orientation>,
    mod_involution: bool,
) -> Vec<BimodalModel> {
    let wanted = |o: Orientation| orientation.map(|want| want == o).unwrap_or(true);
    let mut models = Vec::new();

    if p == 1 {
        // one component per orientation, joining the unique ideal point to
        // itself through the degenerate center
        for o in [Orientation::Plus, Orientation::Minus] {
            if wanted(o) {
                models.push(BimodalModel { p, perm: vec![0], orientation: o, marked: 0, free: 0 });
            }
        }
        return models;
    }

    for perm in permutations(p) {
        if !is_cyclic(&perm) {
            continue;
        }
        for (o, eps) in [(Orientation::Plus, 1i8), (Orientation::Minus, -1i8)] {
            if !wanted(o) {
                continue;
            }
            if let Some((x, y)) = bimodal_extrema(&perm, eps) {
                for (marked, free) in [(x, y), (y, x)] {
                    models.push(BimodalModel { p, perm: perm.clone(), orientation: o, marked, free });
                }
            }
        }
    }

    // monotone type A: only the decreasing case with p = 2 supports a
    // periodic marked point (the two centers swap under the involution)
    if p == 2 && wanted(Orientation::Minus) {
        for marked in [0usize, 1] {
            models.push(BimodalModel {
                p,
                perm: vec![1, 0],
                orientation: Orientation::Minus,
                marked,
                free: marked,
            });
        }
    }

    if mod_involution {
        let mut kept: Vec<BimodalModel> = Vec::new();
        for m in models {
            let dual = m.involution();
            if kept.contains(&dual) {
                continue;
            }
            kept.push(m);
        }
        models = kept;
    }
    models.sort_by_key(|m| {
        (m.perm.clone(), m.orientation == Orientation::Minus, m.marked)
    });
    models
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn period_one_and_two_counts() {
        assert_eq!(enumerate_components(1, Some(Orientation::Plus), false).len(), 1);
        assert_eq!(enumerate_components(1, Some(Orientation::Minus), false).len(), 1);

        // p = 2: two real components and two pure-imaginary (type A) ones,
        // one of each modulo the involution
        let plus = enumerate_components(2, Some(Orientation::Plus), false);
        assert_eq!(plus.len(), 2);
        let minus = enumerate_components(2, Some(Orientation::Minus), false);
        assert_eq!(minus.len(), 2);
        assert!(minus.iter().all(|m| m.marked == m.free), "monotone type A");
        assert_eq!(enumerate_components(2, None, true).len(), 2);
        // both resolve to the two period-2 kneadings
        for m in plus.iter().chain(&minus) {
            let (z, o) = m.star_kneading().resolutions();
            assert_eq!(z.to_string(), "00");
            assert_eq!(o.to_string(), "10");
        }
    }

    #[test]
    fn period_three_matches_torus_picture() {
        // S_3 bar is a torus; each locus contributes four components
        let plus = enumerate_components(3, Some(Orientation::Plus), false);
        let minus = enumerate_components(3, Some(Orientation::Minus), false);
        assert_eq!(plus.len(), 4);
        assert_eq!(minus.len(), 4);
        let stars: Vec<String> =
            plus.iter().map(|m| m.star_kneading().to_string()).collect();
        assert_eq!(stars.iter().filter(|s| *s == "*00").count(), 2);
        assert_eq!(stars.iter().filter(|s| *s == "1*0").count(), 2);
        let stars: Vec<String> =
            minus.iter().map(|m| m.star_kneading().to_string()).collect();
        assert_eq!(stars.iter().filter(|s| *s == "*10").count(), 2);
        assert_eq!(stars.iter().filter(|s| *s == "0*0").count(), 2);
        // involution pairs: nothing is self-dual for p > 1
        for m in plus.iter().chain(&minus) {
            assert_ne!(m, &m.involution());
        }
        assert_eq!(enumerate_components(3, None, true).len(), 4);
    }

    #[test]
    fn period_five_example_from_the_tree_picture() {
        // ordering a_1 < a_2 = free < a_4 < a_0 < a_3 gives the cyclic model
        // f = (1, 4, 3, 0, 2) with marked minimum at position 3; its kneading
        // is 1*000, and the right perturbation resolves the star to 1
        let model = BimodalModel {
            p: 5,
            perm: vec![1, 4, 3, 0, 2],
            orientation: Orientation::Plus,
            marked: 3,
            free: 1,
        };
        assert_eq!(model.star_kneading().to_string(), "1*000");
        let (zero, one) = model.star_kneading().resolutions();
        assert_eq!(zero.to_string(), "10000");
        assert_eq!(one.to_string(), "11000");
        // the model is produced by the enumeration
        let all = enumerate_components(5, Some(Orientation::Plus), false);
        assert!(all.contains(&model));
    }

    #[test]
    fn period_four_circle_structure() {
        // modulo the involution: ten components, split 2 + 8 between the two
        // boundary circles of S_4 bar / I; the short circle joins 0010 and
        // 0110 through both of its edges
        let all = enumerate_components(4, None, true);
        assert_eq!(all.len(), 10);
        let stars: Vec<String> = all.iter().map(|m| m.star_kneading().to_string()).collect();
        let count = |s: &str| stars.iter().filter(|t| *t == s).count();
        assert_eq!(count("0*10"), 2, "short circle");
        assert_eq!(count("0*00"), 2);
        assert_eq!(count("*000"), 2);
        assert_eq!(count("10*0"), 1);
        assert_eq!(count("1*10"), 1);
        assert_eq!(count("11*0"), 1);
        assert_eq!(count("1*00"), 1);

        // endpoints differ in exactly one bit
        for m in &all {
            let (zero, one) = m.star_kneading().resolutions();
            let diff = zero
                .bits()
                .iter()
                .zip(one.bits())
                .filter(|(a, b)| a != b)
                .count();
            assert_eq!(diff, 1, "model {m:?}");
        }

        // the period-4 transition of the figure-eight picture: 1000 through
        // 10*0 to 1010
        assert!(stars.iter().any(|s| s == "10*0"));
        let m = all.iter().find(|m| m.star_kneading().to_string() == "10*0").unwrap();
        let (zero, one) = m.star_kneading().resolutions();
        assert_eq!(zero.to_string(), "1000");
        assert_eq!(one.to_string(), "1010");
    }

    #[test]
    fn involution_classes_come_in_pairs() {
        for p in [3usize, 4] {
            let all = enumerate_components(p, None, false);
            let classes = enumerate_components(p, None, true);
            assert_eq!(all.len(), 2 * classes.len(), "pairs at p = {p}");
        }
    }
}
