//! One-dimensional maximisation used by every explicit formula: golden
//! section on a bracket, geometric bracketing on a half-line, and a
//! grid-seeded variant for objectives that are not unimodal.

/// Relative bracket width at which golden section stops.
pub const REL_TOL: f64 = 1e-10;
pub const MAX_ITER: usize = 200;
/// Largest `s` tried before declaring the supremum to sit at infinity.
pub const S_CAP: f64 = 65536.0;

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Opt {
    pub x: f64,
    pub fx: f64,
    pub evals: usize,
    /// The objective was still increasing at the right end of the search.
    pub at_cap: bool,
    pub converged: bool,
}

struct Best {
    x: f64,
    fx: f64,
    evals: usize,
}

impl Best {
    fn new() -> Self {
        Best { x: f64::NAN, fx: f64::NEG_INFINITY, evals: 0 }
    }

    // Strict comparison keeps the first point on ties, so flat objectives
    // report the left end.
    fn eval<F: FnMut(f64) -> f64>(&mut self, f: &mut F, x: f64) -> f64 {
        let fx = f(x);
        self.evals += 1;
        if fx > self.fx || self.x.is_nan() {
            self.x = x;
            self.fx = fx;
        }
        fx
    }
}

fn golden_inner<F: FnMut(f64) -> f64>(f: &mut F, mut a: f64, mut b: f64, tol: f64, best: &mut Best) -> bool {
    best.eval(f, a);
    if b <= a {
        return true;
    }
    best.eval(f, b);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = best.eval(f, c);
    let mut fd = best.eval(f, d);
    for _ in 0..MAX_ITER {
        if b - a <= tol * (1.0 + c.abs().max(d.abs())) {
            return true;
        }
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = best.eval(f, c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = best.eval(f, d);
        }
    }
    false
}

/// Golden section on `[a, b]`; the best point seen (endpoints included) is
/// returned, so boundary optima are exact.
pub fn golden_max<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64) -> Opt {
    golden_max_tol(&mut f, a, b, REL_TOL)
}

pub fn golden_max_tol<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64, tol: f64) -> Opt {
    let mut best = Best::new();
    let converged = golden_inner(f, a, b, tol, &mut best);
    Opt { x: best.x, fx: best.fx, evals: best.evals, at_cap: false, converged }
}

/// Concave objective on `[0, cap]`: probe `0, 1, 2, 4, …` until the value
/// stops increasing, then golden section inside the last bracket.
pub fn maximize_halfline<F: FnMut(f64) -> f64>(mut f: F, cap: f64) -> Opt {
    let mut evals = 1;
    let (mut lo, mut mid, mut fmid) = (0.0, 0.0, f(0.0));
    let mut x = 1.0_f64.min(cap);
    loop {
        let fx = f(x);
        evals += 1;
        if fx <= fmid {
            let mut o = golden_max(&mut f, lo, x);
            o.evals += evals;
            return o;
        }
        if x >= cap {
            let mut o = golden_max(&mut f, mid, cap);
            o.evals += evals;
            o.at_cap = o.x >= cap * (1.0 - 1e-9);
            return o;
        }
        lo = mid;
        mid = x;
        fmid = fx;
        x = (2.0 * x).min(cap);
    }
}

/// `n` points: `0` followed by a log-spaced run from `lo` to `hi`.
pub fn log_grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
    assert!(n >= 2 && lo > 0.0 && hi > lo);
    let (a, b) = (lo.ln(), hi.ln());
    std::iter::once(0.0)
        .chain((0..n - 1).map(|i| (a + (b - a) * i as f64 / (n - 2).max(1) as f64).exp()))
        .collect()
}

/// Scan `grid`, then golden-refine between the neighbours of the best node.
/// Finds the global maximum when the basin of the true optimum contains a
/// grid node.
pub fn grid_golden_max<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64]) -> Opt {
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let i = argmax(&vals);
    let lo = grid[i.saturating_sub(1)];
    let hi = grid[(i + 1).min(grid.len() - 1)];
    let mut o = golden_max(&mut f, lo, hi);
    o.evals += grid.len();
    if vals[i] > o.fx {
        o.x = grid[i];
        o.fx = vals[i];
    }
    o.at_cap = i == grid.len() - 1 && o.x >= hi;
    o
}

/// All interior local maxima of a grid scan, each refined by golden section
/// on its two neighbouring cells. Endpoint maxima are included.
pub fn local_maxima<F: FnMut(f64) -> f64>(mut f: F, grid: &[f64]) -> Vec<Opt> {
    let vals: Vec<f64> = grid.iter().map(|&x| f(x)).collect();
    let n = vals.len();
    let mut out = Vec::new();
    for i in 0..n {
        let left = i == 0 || vals[i] > vals[i - 1];
        let right = i == n - 1 || vals[i] >= vals[i + 1];
        if left && right {
            let o = golden_max(&mut f, grid[i.saturating_sub(1)], grid[(i + 1).min(n - 1)]);
            out.push(o);
        }
    }
    out
}

/// First index of the maximum.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}
