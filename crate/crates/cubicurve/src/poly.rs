//! Dense complex polynomials and a simultaneous root finder.

use crate::{c64, Complex64};

/// Polynomial with ascending complex coefficients.
#[derive(Debug, Clone)]
pub struct Poly {
    pub coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        let mut p = Poly { coeffs };
        p.trim();
        p
    }

    pub fn constant(c: Complex64) -> Self {
        Poly { coeffs: vec![c] }
    }

    fn trim(&mut self) {
        while self.coeffs.len() > 1 && self.coeffs.last().unwrap().norm() == 0.0 {
            self.coeffs.pop();
        }
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        let mut acc = c64(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::constant(c64(0.0, 0.0));
        }
        Poly::new(
            self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(i, &c)| c * (i as f64 + 1.0))
                .collect(),
        )
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = vec![c64(0.0, 0.0); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Poly::new(out)
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![c64(0.0, 0.0); n];
        for (i, &a) in self.coeffs.iter().enumerate() {
            out[i] += a;
        }
        for (i, &b) in other.coeffs.iter().enumerate() {
            out[i] += b;
        }
        Poly::new(out)
    }

    /// All roots by the Aberth-Ehrlich simultaneous iteration, polished to
    /// roughly machine precision.  Deterministic starting points.
    pub fn roots(&self) -> Option<Vec<Complex64>> {
        let n = self.degree();
        if n == 0 {
            return Some(Vec::new());
        }
        let lead = *self.coeffs.last().unwrap();
        if lead.norm() == 0.0 {
            return None;
        }
        // Cauchy-style radius bound
        let radius = 1.0
            + self.coeffs[..n]
                .iter()
                .map(|c| (c / lead).norm())
                .fold(0.0_f64, f64::max);
        let radius = radius.min(1e12);
        let deriv = self.derivative();
        let mut z: Vec<Complex64> = (0..n)
            .map(|k| {
                Complex64::from_polar(
                    radius * 0.8,
                    2.0 * std::f64::consts::PI * k as f64 / n as f64 + 0.4,
                )
            })
            .collect();
        for _ in 0..400 {
            let mut moved = 0.0_f64;
            for i in 0..n {
                let p = self.eval(z[i]);
                let dp = deriv.eval(z[i]);
                let ratio = if dp.norm() > 0.0 { p / dp } else { p };
                let mut rep = c64(0.0, 0.0);
                for j in 0..n {
                    if j != i {
                        let d = z[i] - z[j];
                        if d.norm() > 1e-300 {
                            rep += 1.0 / d;
                        }
                    }
                }
                let denom = 1.0 - ratio * rep;
                let step = if denom.norm() > 1e-300 { ratio / denom } else { ratio };
                z[i] -= step;
                moved = moved.max(step.norm() / (1.0 + z[i].norm()));
            }
            if moved < 1e-14 {
                break;
            }
        }
        // final Newton polish
        for zi in z.iter_mut() {
            for _ in 0..3 {
                let p = self.eval(*zi);
                let dp = deriv.eval(*zi);
                if dp.norm() > 0.0 {
                    *zi -= p / dp;
                }
            }
        }
        Some(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roots_of_small_polynomials() {
        // z^2 + 1
        let p = Poly::new(vec![c64(1.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)]);
        let mut roots = p.roots().unwrap();
        roots.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());
        assert!((roots[0] - c64(0.0, -1.0)).norm() < 1e-12);
        assert!((roots[1] - c64(0.0, 1.0)).norm() < 1e-12);

        // (z - 1)(z - 2)(z - 3)
        let p = Poly::new(vec![c64(-6.0, 0.0), c64(11.0, 0.0), c64(-6.0, 0.0), c64(1.0, 0.0)]);
        let mut roots = p.roots().unwrap();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        for (r, want) in roots.iter().zip([1.0, 2.0, 3.0]) {
            assert!((r - c64(want, 0.0)).norm() < 1e-10);
        }
    }
}
