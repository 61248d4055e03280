//! Gauss-Legendre and Gauss-Hermite rules plus adaptive Simpson.
//!
//! Nodes are found by Newton iteration on the three-term recurrences, which
//! stays accurate for several hundred nodes without an eigensolver.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::error::{Error, Result};
use crate::hermite::PI_POW_NEG_QUARTER;

const NEWTON_EPS: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(points: usize) -> Self {
        assert!(points > 0, "Gauss-Legendre rule needs at least one node");
        let mut nodes = alloc::vec![0.0; points];
        let mut weights = alloc::vec![0.0; points];
        let n = points as f64;
        let half = points.div_ceil(2);
        for i in 0..half {
            let mut z = libm::cos(PI * (i as f64 + 0.75) / (n + 0.5));
            let mut dp = 0.0;
            for _ in 0..NEWTON_MAX_ITER {
                let (p, d) = legendre_with_derivative(points, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if libm::fabs(dz) <= NEWTON_EPS {
                    dp = legendre_with_derivative(points, z).1;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[points - 1 - i] = z;
            weights[i] = w;
            weights[points - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ₐᵇ f(x) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        let mut sum = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            sum += w * f(mid + half * x);
        }
        sum * half
    }

    /// Applies the rule on `panels` equal sub-intervals of `[a, b]`.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|k| {
                let lo = a + h * k as f64;
                self.integrate(lo, lo + h, &mut f)
            })
            .sum()
    }
}

fn legendre_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = 1.0;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
    }
    let nf = n as f64;
    (p1, nf * (z * p1 - p2) / (z * z - 1.0))
}

/// Gauss-Hermite rule for `∫ f(ξ) e^(-ξ²) dξ` over the real line.
#[derive(Debug, Clone)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(points: usize) -> Self {
        assert!(points > 0, "Gauss-Hermite rule needs at least one node");
        // Jacobi matrix eigenvalues give the starting roots; Newton on the
        // orthonormal recurrence polishes them and yields weights with full
        // relative accuracy, including the tiny outermost ones.
        let offdiag: Vec<f64> = (1..points).map(|k| libm::sqrt(k as f64 / 2.0)).collect();
        let mut guesses = symmetric_tridiagonal_eigenvalues(&alloc::vec![0.0; points], &offdiag);
        guesses.sort_by(f64::total_cmp);

        let mut nodes = alloc::vec![0.0; points];
        let mut weights = alloc::vec![0.0; points];
        for i in points / 2..points {
            let mut z = guesses[i];
            for _ in 0..NEWTON_MAX_ITER {
                let (p, d) = orthonormal_hermite_with_derivative(points, z);
                let dz = p / d;
                z -= dz;
                if libm::fabs(dz) <= NEWTON_EPS * libm::fabs(z).max(1.0) {
                    break;
                }
            }
            let dp = orthonormal_hermite_with_derivative(points, z).1;
            let w = 2.0 / (dp * dp);
            nodes[i] = z;
            weights[i] = w;
            nodes[points - 1 - i] = -z;
            weights[points - 1 - i] = w;
        }
        if points % 2 == 1 {
            nodes[points / 2] = 0.0;
        }
        GaussHermite { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `∫ f(ξ) e^(-ξ²) dξ`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| w * f(*x))
            .sum()
    }
}

// Eigenvalues of the symmetric tridiagonal matrix with the given diagonal and
// off-diagonal, by implicit QL with Wilkinson shifts.
fn symmetric_tridiagonal_eigenvalues(diag: &[f64], offdiag: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = offdiag.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = libm::fabs(d[m]) + libm::fabs(d[m + 1]);
                if libm::fabs(e[m]) <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                break;
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = libm::hypot(g, 1.0);
            g = d[m] - d[l] + e[l] / (g + libm::copysign(r, g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut underflow = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = libm::hypot(f, g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d
}

// Orthonormal Hermite polynomial of degree n (w.r.t. e^{-x²}) and its derivative.
fn orthonormal_hermite_with_derivative(n: usize, z: f64) -> (f64, f64) {
    let mut p1 = PI_POW_NEG_QUARTER;
    let mut p2 = 0.0;
    for j in 0..n {
        let p3 = p2;
        p2 = p1;
        let jf = j as f64;
        p1 = z * libm::sqrt(2.0 / (jf + 1.0)) * p2 - libm::sqrt(jf / (jf + 1.0)) * p3;
    }
    (p1, libm::sqrt(2.0 * n as f64) * p2)
}

/// Adaptive Simpson quadrature of `f` on `[a, b]`.
///
/// The interval is first cut into `initial_panels` pieces so that oscillatory
/// integrands cannot fool the first refinement test. Fails with
/// [`Error::QuadratureNotConverged`] once `max_evals` function evaluations
/// are spent.
pub fn adaptive_simpson<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    rel_tol: f64,
    initial_panels: usize,
    max_evals: usize,
) -> Result<f64> {
    const MAX_DEPTH: u32 = 60;

    struct Segment {
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    }

    let panels = initial_panels.max(1);
    let h = (b - a) / panels as f64;
    let mut evals = 0usize;
    let mut eval = |x: f64, evals: &mut usize| {
        *evals += 1;
        f(x)
    };

    let mut stack = Vec::with_capacity(panels);
    let mut coarse = 0.0;
    let mut left = eval(a, &mut evals);
    for k in 0..panels {
        let lo = a + h * k as f64;
        let hi = if k + 1 == panels { b } else { lo + h };
        let fm = eval(0.5 * (lo + hi), &mut evals);
        let fb = eval(hi, &mut evals);
        let whole = (hi - lo) / 6.0 * (left + 4.0 * fm + fb);
        coarse += libm::fabs(whole);
        stack.push(Segment {
            a: lo,
            b: hi,
            fa: left,
            fm,
            fb,
            whole,
            tol: 0.0,
            depth: 0,
        });
        left = fb;
    }
    let abs_tol = (rel_tol * coarse).max(f64::MIN_POSITIVE);
    for seg in stack.iter_mut() {
        seg.tol = abs_tol / panels as f64;
    }

    let mut total = 0.0;
    while let Some(s) = stack.pop() {
        if evals > max_evals {
            return Err(Error::QuadratureNotConverged { evaluations: evals });
        }
        let m = 0.5 * (s.a + s.b);
        let lm = eval(0.5 * (s.a + m), &mut evals);
        let rm = eval(0.5 * (m + s.b), &mut evals);
        let left = (m - s.a) / 6.0 * (s.fa + 4.0 * lm + s.fm);
        let right = (s.b - m) / 6.0 * (s.fm + 4.0 * rm + s.fb);
        let delta = left + right - s.whole;
        if s.depth >= MAX_DEPTH || libm::fabs(delta) <= 15.0 * s.tol {
            total += left + right + delta / 15.0;
        } else {
            let tol = 0.5 * s.tol;
            let depth = s.depth + 1;
            stack.push(Segment {
                a: s.a,
                b: m,
                fa: s.fa,
                fm: lm,
                fb: s.fm,
                whole: left,
                tol,
                depth,
            });
            stack.push(Segment {
                a: m,
                b: s.b,
                fa: s.fm,
                fm: rm,
                fb: s.fb,
                whole: right,
                tol,
                depth,
            });
        }
    }
    if evals > max_evals {
        return Err(Error::QuadratureNotConverged { evaluations: evals });
    }
    Ok(total)
}

/// Trapezoid rule over tabulated samples on a possibly non-uniform grid.
pub fn trapezoid(grid: &[f64], values: &[f64]) -> f64 {
    debug_assert_eq!(grid.len(), values.len());
    grid.windows(2)
        .zip(values.windows(2))
        .map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1]))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_polynomials_exactly() {
        let gl = GaussLegendre::new(10);
        // degree 19 is the exactness limit for 10 nodes
        let got = gl.integrate(0.0, 2.0, |x| libm::pow(x, 19.0));
        assert_relative_eq!(got, libm::pow(2.0, 20.0) / 20.0, max_relative = 1e-13);
        assert_relative_eq!(gl.weights().iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn legendre_large_rule_is_accurate() {
        let gl = GaussLegendre::new(256);
        assert_relative_eq!(gl.weights().iter().sum::<f64>(), 2.0, max_relative = 1e-13);
        let got = gl.integrate(0.0, PI, libm::sin);
        assert_relative_eq!(got, 2.0, max_relative = 1e-13);
        assert!(gl.nodes().windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn hermite_weights_sum_to_sqrt_pi() {
        for n in [1, 2, 5, 20, 64, 256] {
            let gh = GaussHermite::new(n);
            assert_relative_eq!(
                gh.weights().iter().sum::<f64>(),
                libm::sqrt(PI),
                max_relative = 1e-12
            );
            assert!(
                gh.nodes().windows(2).all(|w| w[0] < w[1]),
                "n={n} nodes not sorted"
            );
        }
    }

    #[test]
    fn hermite_even_moments() {
        // ∫ x^{2k} e^{-x²} dx = Γ(k + 1/2)
        let gh = GaussHermite::new(256);
        let mut gamma = libm::sqrt(PI);
        for k in 0..40 {
            let got = gh.integrate(|x| libm::pow(x, 2.0 * k as f64));
            assert_relative_eq!(got, gamma, max_relative = 1e-11);
            gamma *= k as f64 + 0.5;
        }
    }

    #[test]
    fn adaptive_simpson_converges() {
        let got = adaptive_simpson(libm::exp, 0.0, 1.0, 1e-12, 4, 1_000_000).unwrap();
        assert_relative_eq!(got, core::f64::consts::E - 1.0, max_relative = 1e-11);
    }

    #[test]
    fn adaptive_simpson_budget_exhaustion() {
        let err = adaptive_simpson(|x| libm::sin(1.0 / x), 1e-9, 1.0, 1e-14, 1, 1_000).unwrap_err();
        assert!(matches!(err, Error::QuadratureNotConverged { .. }));
    }

    #[test]
    fn trapezoid_linear_exact() {
        let grid = [0.0, 0.1, 0.5, 2.0];
        let vals: Vec<f64> = grid.iter().map(|x| 3.0 * x + 1.0).collect();
        assert_relative_eq!(trapezoid(&grid, &vals), 8.0, max_relative = 1e-15);
    }
}
