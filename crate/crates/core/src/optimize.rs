//! Derivative-free minimisation over the unit box `[0, 1]^d`.
//!
//! Multi-start Nelder–Mead with clamped trial points, followed by a
//! coordinate-wise golden-section polish. Every corner of the box is
//! evaluated as well, since optima of the transducer problems frequently sit
//! on the boundary.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOptions {
    /// Quasi-random Nelder–Mead starting points.
    pub starts: usize,
    /// Iteration cap per Nelder–Mead run, per dimension.
    pub max_iter_per_dim: usize,
    pub x_tol: f64,
    pub f_tol: f64,
    pub polish_sweeps: usize,
    /// Return as soon as a value below this is seen.
    pub stop_below: Option<f64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { starts: 16, max_iter_per_dim: 300, x_tol: 1e-10, f_tol: 1e-15, polish_sweeps: 4, stop_below: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// The Nelder–Mead run that produced the best point met its tolerances.
    pub converged: bool,
}

const PRIMES: [u32; 8] = [2, 3, 5, 7, 11, 13, 17, 19];

/// Point `index` (from 1) of the Halton sequence in `dim ≤ 8` dimensions.
pub fn halton(index: usize, dim: usize) -> Vec<f64> {
    PRIMES[..dim]
        .iter()
        .map(|&p| {
            let (mut i, mut f, mut out) = (index, 1.0, 0.0);
            while i > 0 {
                f /= p as f64;
                out += f * (i % p as usize) as f64;
                i /= p as usize;
            }
            out
        })
        .collect()
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

struct Counted<F> {
    f: F,
    evals: usize,
    stop_below: f64,
    hit: Option<(Vec<f64>, f64)>,
}

impl<F: FnMut(&[f64]) -> f64> Counted<F> {
    fn eval(&mut self, x: &[f64]) -> f64 {
        if let Some((_, v)) = &self.hit {
            return *v;
        }
        self.evals += 1;
        let v = (self.f)(x);
        let v = if v.is_nan() { f64::INFINITY } else { v };
        if v < self.stop_below {
            self.hit = Some((x.to_vec(), v));
        }
        v
    }

    fn stopped(&self) -> bool {
        self.hit.is_some()
    }
}

#[derive(Clone)]
struct Best {
    x: Vec<f64>,
    value: f64,
    converged: bool,
}

impl Best {
    fn offer(&mut self, x: &[f64], value: f64, converged: bool) {
        if value < self.value || (value == self.value && lex_less(x, &self.x)) {
            self.x = x.to_vec();
            self.value = value;
            self.converged = converged;
        }
    }
}

fn clamp_unit(x: &mut [f64]) {
    for v in x.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
}

fn nelder_mead<F: FnMut(&[f64]) -> f64>(f: &mut Counted<F>, x0: &[f64], opts: &SearchOptions) -> Best {
    let n = x0.len();
    let mut simplex: Vec<Vec<f64>> = vec![x0.to_vec()];
    for i in 0..n {
        let mut x = x0.to_vec();
        let h = 0.25;
        x[i] = if x[i] + h <= 1.0 { x[i] + h } else { x[i] - h };
        simplex.push(x);
    }
    let mut vals: Vec<f64> = simplex.iter().map(|x| f.eval(x)).collect();
    let mut converged = false;
    for _ in 0..opts.max_iter_per_dim * n {
        if f.stopped() {
            break;
        }
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]).then_with(|| {
            if lex_less(&simplex[i], &simplex[j]) {
                std::cmp::Ordering::Less
            } else {
                std::cmp::Ordering::Greater
            }
        }));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        vals = order.iter().map(|&i| vals[i]).collect();

        let diam = simplex[1..]
            .iter()
            .map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let spread = vals[n] - vals[0];
        if diam <= opts.x_tol || (spread <= opts.f_tol * vals[0].abs().max(1e-300) && diam <= 1e-6) {
            converged = true;
            break;
        }

        let centroid: Vec<f64> = (0..n).map(|j| simplex[..n].iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64| -> Vec<f64> {
            let mut x: Vec<f64> = centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (c - w)).collect();
            clamp_unit(&mut x);
            x
        };
        let xr = along(1.0);
        let fr = f.eval(&xr);
        if fr < vals[0] {
            let xe = along(2.0);
            let fe = f.eval(&xe);
            if fe < fr {
                simplex[n] = xe;
                vals[n] = fe;
            } else {
                simplex[n] = xr;
                vals[n] = fr;
            }
            continue;
        }
        if fr < vals[n - 1] {
            simplex[n] = xr;
            vals[n] = fr;
            continue;
        }
        let (xc, fc) = if fr < vals[n] {
            let xc = along(0.5);
            let fc = f.eval(&xc);
            (xc, fc)
        } else {
            let xc = along(-0.5);
            let fc = f.eval(&xc);
            (xc, fc)
        };
        if fc < vals[n].min(fr) {
            simplex[n] = xc;
            vals[n] = fc;
            continue;
        }
        for i in 1..=n {
            let x: Vec<f64> = simplex[0].iter().zip(&simplex[i]).map(|(b, x)| b + 0.5 * (x - b)).collect();
            vals[i] = f.eval(&x);
            simplex[i] = x;
        }
    }
    let mut best = Best { x: simplex[0].clone(), value: vals[0], converged };
    for i in 1..=n {
        best.offer(&simplex[i].clone(), vals[i], converged);
    }
    best
}

const INV_PHI: f64 = 0.618_033_988_749_895;

/// One pass of golden-section line searches along each coordinate.
fn polish<F: FnMut(&[f64]) -> f64>(f: &mut Counted<F>, best: &mut Best, x_tol: f64) -> bool {
    let mut improved = false;
    for j in 0..best.x.len() {
        let mut x = best.x.clone();
        let mut probe = |t: f64, f: &mut Counted<F>| {
            x[j] = t;
            let v = f.eval(&x);
            (x.clone(), v)
        };
        for t in [0.0, 1.0] {
            let (px, v) = probe(t, f);
            if v < best.value {
                improved = true;
            }
            best.offer(&px, v, best.converged);
        }
        let (mut lo, mut hi) = (0.0, 1.0);
        let mut c = hi - INV_PHI * (hi - lo);
        let mut d = lo + INV_PHI * (hi - lo);
        let (_, mut fc) = probe(c, f);
        let (_, mut fd) = probe(d, f);
        while hi - lo > x_tol {
            if fc <= fd {
                hi = d;
                d = c;
                fd = fc;
                c = hi - INV_PHI * (hi - lo);
                fc = probe(c, f).1;
            } else {
                lo = c;
                c = d;
                fc = fd;
                d = lo + INV_PHI * (hi - lo);
                fd = probe(d, f).1;
            }
        }
        let t = if fc <= fd { c } else { d };
        let (px, v) = probe(t, f);
        if v < best.value {
            improved = true;
        }
        best.offer(&px, v, best.converged);
    }
    improved
}

/// Minimises `f` over `[0, 1]^dim`. Non-finite values count as `+∞`.
/// Among equal minima the lexicographically smallest point wins.
pub fn minimize_unit_box<F: FnMut(&[f64]) -> f64>(dim: usize, f: F, opts: &SearchOptions) -> SearchResult {
    minimize_unit_box_from(dim, f, opts, &[])
}

/// As [`minimize_unit_box`], with additional Nelder–Mead starting points.
pub fn minimize_unit_box_from<F: FnMut(&[f64]) -> f64>(
    dim: usize,
    f: F,
    opts: &SearchOptions,
    extra_starts: &[Vec<f64>],
) -> SearchResult {
    assert!((1..=PRIMES.len()).contains(&dim), "dimension {dim} not supported");
    let mut f = Counted { f, evals: 0, stop_below: opts.stop_below.unwrap_or(f64::NEG_INFINITY), hit: None };
    let mut best = Best { x: vec![0.0; dim], value: f64::INFINITY, converged: false };

    let mut corner = Best { x: vec![0.0; dim], value: f64::INFINITY, converged: false };
    // Extra starts get one polish sweep first: the endpoint probes can jump
    // onto a face of the box that the simplex would only creep towards.
    let mut starts: Vec<Vec<f64>> = Vec::new();
    for x in extra_starts.iter().filter(|x| x.len() == dim) {
        let mut local = Best { x: x.clone(), value: f.eval(x), converged: false };
        polish(&mut f, &mut local, opts.x_tol);
        best.offer(&local.x, local.value, false);
        starts.push(local.x);
    }
    for mask in 0..(1usize << dim) {
        let x: Vec<f64> = (0..dim).map(|j| ((mask >> j) & 1) as f64).collect();
        let v = f.eval(&x);
        corner.offer(&x, v, false);
    }
    best.offer(&corner.x, corner.value, false);

    starts.extend((1..=opts.starts).map(|i| halton(i, dim)));
    starts.push(corner.x.clone());
    for x0 in &starts {
        if f.stopped() {
            break;
        }
        let run = nelder_mead(&mut f, x0, opts);
        best.offer(&run.x, run.value, run.converged);
    }
    for _ in 0..opts.polish_sweeps {
        if f.stopped() || !polish(&mut f, &mut best, opts.x_tol) {
            break;
        }
    }
    if let Some((x, v)) = f.hit.take() {
        return SearchResult { x, value: v, evaluations: f.evals, converged: true };
    }
    SearchResult { x: best.x, value: best.value, evaluations: f.evals, converged: best.converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn halton_is_low_discrepancy_in_unit_box() {
        assert_eq!(halton(1, 2), vec![0.5, 1.0 / 3.0]);
        assert_eq!(halton(2, 1), vec![0.25]);
        for i in 1..100 {
            assert!(halton(i, 4).iter().all(|v| (0.0..1.0).contains(v)));
        }
    }

    #[test]
    fn finds_interior_minimum() {
        let r = minimize_unit_box(3, |x| (x[0] - 0.3).powi(2) + 2.0 * (x[1] - 0.7).powi(2) + (x[2] - 0.1).powi(4), &SearchOptions::default());
        assert!((r.x[0] - 0.3).abs() < 1e-6 && (r.x[1] - 0.7).abs() < 1e-6);
        assert!(r.value < 1e-12);
    }

    #[test]
    fn finds_corner_minimum() {
        let r = minimize_unit_box(4, |x| -x.iter().sum::<f64>(), &SearchOptions::default());
        assert_eq!(r.x, vec![1.0; 4]);
    }

    #[test]
    fn ties_resolve_to_smallest_point() {
        let r = minimize_unit_box(2, |x| (x[1] - 0.4).powi(2), &SearchOptions::default());
        assert_eq!(r.x[0], 0.0);
    }

    #[test]
    fn early_exit_returns_first_hit() {
        let opts = SearchOptions { stop_below: Some(-0.5), ..Default::default() };
        let r = minimize_unit_box(2, |x| -x[0] * x[1], &opts);
        assert!(r.value < -0.5);
        assert!(r.evaluations < 10);
    }

    #[test]
    fn infinite_regions_are_avoided() {
        let r = minimize_unit_box(2, |x| if x[0] > 0.8 { f64::NAN } else { -x[0] - x[1] }, &SearchOptions::default());
        assert!(r.value.is_finite());
        assert!((r.x[0] - 0.8).abs() < 1e-6 && r.x[1] == 1.0);
    }
}
