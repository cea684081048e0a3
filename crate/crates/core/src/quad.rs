//! Composite Gauss-Legendre quadrature on boxes.

use num_complex::Complex64;

/// Nodes per Gauss-Legendre panel in the composite rules.
pub const PANEL_ORDER: usize = 16;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Newton iteration on the Legendre polynomial from the Tricomi initial guess.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    /// Integral of `f` over `[a, b]` split into `panels` equal panels.
    pub fn composite<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, panels: usize, mut f: F) -> f64 {
        let h = (b - a) / panels as f64;
        let mut sum = 0.0;
        for p in 0..panels {
            let mid = a + (p as f64 + 0.5) * h;
            let mut s = 0.0;
            for (x, w) in self.nodes.iter().zip(&self.weights) {
                s += w * f(mid + 0.5 * h * x);
            }
            sum += 0.5 * h * s;
        }
        sum
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// One-dimensional composite rule flattened to node/weight lists.
pub fn composite_nodes(lo: f64, hi: f64, panels: usize, rule: &GaussLegendre) -> (Vec<f64>, Vec<f64>) {
    let h = (hi - lo) / panels as f64;
    let mut xs = Vec::with_capacity(panels * rule.nodes.len());
    let mut ws = Vec::with_capacity(panels * rule.nodes.len());
    for p in 0..panels {
        let mid = lo + (p as f64 + 0.5) * h;
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(mid + 0.5 * h * x);
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Result of a tensor-grid integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridOutcome {
    pub value: Complex64,
    /// Integral of `|f|` on the same grid, used as the relative-error scale.
    pub abs_scale: f64,
    pub error: f64,
    pub resolution: usize,
    pub converged: bool,
}

/// Tensor-product composite rule on `[lo, hi]^dim` with `resolution` nodes
/// per axis (rounded up to a multiple of [`PANEL_ORDER`]).
pub fn tensor_grid<F>(dim: usize, lo: f64, hi: f64, resolution: usize, f: &F) -> (Complex64, f64)
where
    F: Fn(&[f64]) -> Complex64 + ?Sized,
{
    assert!((1..=4).contains(&dim));
    let rule = GaussLegendre::new(PANEL_ORDER);
    let panels = resolution.div_ceil(PANEL_ORDER).max(1);
    let (xs, ws) = composite_nodes(lo, hi, panels, &rule);
    let m = xs.len();
    let mut idx = vec![0usize; dim];
    let mut point = vec![0.0; dim];
    let mut sum = Complex64::new(0.0, 0.0);
    let mut abs_sum = 0.0;
    let total = m.pow(dim as u32);
    for _ in 0..total {
        let mut w = 1.0;
        for k in 0..dim {
            point[k] = xs[idx[k]];
            w *= ws[idx[k]];
        }
        let v = f(&point);
        sum += v * w;
        abs_sum += v.norm() * w;
        for k in 0..dim {
            idx[k] += 1;
            if idx[k] < m {
                break;
            }
            idx[k] = 0;
        }
    }
    (sum, abs_sum)
}

/// Doubles the per-axis resolution from `start` until two successive grids
/// agree to `rel_tol` (relative to the integral of `|f|`) or `max` is passed.
pub fn adaptive_tensor<F>(dim: usize, lo: f64, hi: f64, start: usize, max: usize, rel_tol: f64, f: &F) -> GridOutcome
where
    F: Fn(&[f64]) -> Complex64 + ?Sized,
{
    let mut res = start.max(PANEL_ORDER);
    let (mut prev, _) = tensor_grid(dim, lo, hi, res, f);
    loop {
        let next_res = res * 2;
        let (val, abs_scale) = tensor_grid(dim, lo, hi, next_res, f);
        let error = (val - prev).norm();
        let converged = error <= rel_tol * abs_scale.max(f64::MIN_POSITIVE);
        if converged || next_res * 2 > max {
            return GridOutcome { value: val, abs_scale, error, resolution: next_res, converged };
        }
        prev = val;
        res = next_res;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 16, 32] {
            let gl = GaussLegendre::new(n);
            let wsum: f64 = gl.weights.iter().sum();
            assert_relative_eq!(wsum, 2.0, epsilon = 1e-14);
            // degree 2n - 1 is exact
            let deg = 2 * n - 1;
            let got: f64 = gl.nodes.iter().zip(&gl.weights).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let want = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((got - want).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn composite_gaussian() {
        let gl = GaussLegendre::new(16);
        let v = gl.composite(-12.0, 12.0, 8, |x| (-x * x).exp());
        assert_relative_eq!(v, std::f64::consts::PI.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn adaptive_tensor_converges_on_smooth_2d() {
        let f = |p: &[f64]| Complex64::new((p[0] * p[1]).cos(), 0.0);
        let out = adaptive_tensor(2, 0.0, 1.0, 16, 1024, 1e-12, &f);
        assert!(out.converged);
        // integral of cos(xy) over the unit square = Si(1)
        assert_relative_eq!(out.value.re, 0.946_083_070_367_183, epsilon = 1e-12);
    }
}
