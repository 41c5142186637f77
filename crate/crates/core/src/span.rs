//! Least squares over a growing dictionary of vectors.

use num_complex::Complex64;

/// Relative size below which a new vector counts as already in the span.
const DEPENDENCE_TOL: f64 = 1e-12;

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis built by modified Gram–Schmidt with one
/// re-orthogonalization pass, remembering the triangular factor so that
/// coefficients in the original vectors can be recovered.
#[derive(Clone, Debug, Default)]
pub struct OrthoBasis {
    q: Vec<Vec<Complex64>>,
    /// `r[k]` expresses kept vector `k` in `q[0..=k]`.
    r: Vec<Vec<Complex64>>,
    /// Dictionary index of each kept vector.
    kept: Vec<usize>,
    pushed: usize,
}

impl OrthoBasis {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.q.len()
    }

    /// Adds a vector; returns `false` if it is numerically in the span.
    pub fn push(&mut self, v: &[Complex64]) -> bool {
        let idx = self.pushed;
        self.pushed += 1;
        let n0 = norm(v);
        if n0 == 0.0 {
            return false;
        }
        let mut w = v.to_vec();
        let mut coeffs = vec![Complex64::default(); self.q.len() + 1];
        for _ in 0..2 {
            for (k, qk) in self.q.iter().enumerate() {
                let c = dot(qk, &w);
                coeffs[k] += c;
                for (wi, qi) in w.iter_mut().zip(qk) {
                    *wi -= c * qi;
                }
            }
        }
        let nw = norm(&w);
        if nw <= DEPENDENCE_TOL * n0 {
            return false;
        }
        for wi in &mut w {
            *wi /= nw;
        }
        coeffs[self.q.len()] = Complex64::new(nw, 0.0);
        self.q.push(w);
        self.r.push(coeffs);
        self.kept.push(idx);
        true
    }

    /// `‖y - QQ^*y‖`.
    pub fn residual(&self, y: &[Complex64]) -> f64 {
        let mut w = y.to_vec();
        for _ in 0..2 {
            for qk in &self.q {
                let c = dot(qk, &w);
                for (wi, qi) in w.iter_mut().zip(qk) {
                    *wi -= c * qi;
                }
            }
        }
        norm(&w)
    }

    /// Least-squares coefficients for every pushed vector (zero for the
    /// vectors that were found dependent).
    pub fn solve(&self, y: &[Complex64]) -> Vec<Complex64> {
        let m = self.q.len();
        let z: Vec<Complex64> = self.q.iter().map(|qk| dot(qk, y)).collect();
        let mut c = vec![Complex64::default(); m];
        for k in (0..m).rev() {
            let mut acc = z[k];
            for (j, cj) in c.iter().enumerate().skip(k + 1) {
                acc -= self.r[j][k] * cj;
            }
            c[k] = acc / self.r[k][k];
        }
        let mut out = vec![Complex64::default(); self.pushed];
        for (k, &i) in self.kept.iter().enumerate() {
            out[i] = c[k];
        }
        out
    }
}

/// Relative residual of projecting `target` onto the span of the first
/// `k` dictionary vectors, for `k = 1..=len`. Nonincreasing by construction.
pub fn residual_curve(dictionary: &[Vec<Complex64>], target: &[Complex64]) -> Vec<f64> {
    let ny = norm(target);
    let mut basis = OrthoBasis::new();
    let mut prev: f64 = if ny == 0.0 { 0.0 } else { 1.0 };
    dictionary
        .iter()
        .map(|d| {
            basis.push(d);
            let r = if ny == 0.0 { 0.0 } else { basis.residual(target) / ny };
            // Rounding guard: exact projections onto nested spans never grow.
            prev = prev.min(r);
            prev
        })
        .collect()
}

/// Least-squares fit of `target` by the dictionary: coefficients and the
/// relative residual.
pub fn least_squares(dictionary: &[Vec<Complex64>], target: &[Complex64]) -> (Vec<Complex64>, f64) {
    let mut basis = OrthoBasis::new();
    for d in dictionary {
        basis.push(d);
    }
    let ny = norm(target);
    let rel = if ny == 0.0 { 0.0 } else { basis.residual(target) / ny };
    (basis.solve(target), rel)
}
