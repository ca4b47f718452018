//! Reference computations that share no code with the library formulas.

#![allow(dead_code)]

use std::f64::consts::PI;

/// Gauss-Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

pub struct Rule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Rule {
    pub fn new(n: usize) -> Self {
        let (nodes, weights) = gauss_legendre(n);
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let (h, m) = ((b - a) / 2.0, (a + b) / 2.0);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(m + h * x))
            .sum::<f64>()
            * h
    }

    /// Composite rule over `panels` equal pieces.
    pub fn integrate_panels(&self, f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        (0..panels)
            .map(|p| self.integrate(&f, a + p as f64 * h, a + (p + 1) as f64 * h))
            .sum()
    }
}

/// Poisson masses of mean `mean`, in log space so large means do not
/// underflow, truncated once the remaining tail is below `tail`.
pub fn poisson_masses(mean: f64, tail: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut ln_fact = 0.0;
    let mut n = 0u64;
    loop {
        if n > 0 {
            ln_fact += (n as f64).ln();
        }
        let ln_p = if mean > 0.0 {
            -mean + n as f64 * mean.ln() - ln_fact
        } else if n == 0 {
            0.0
        } else {
            f64::NEG_INFINITY
        };
        let p = ln_p.exp();
        out.push(p);
        // past the mean the remaining terms are dominated by a geometric
        // series with ratio mean/(n + 1)
        let next = n as f64 + 1.0;
        if next > mean && p * mean / (next - mean) < tail {
            break;
        }
        n += 1;
    }
    out
}

/// TDMA per-link throughput and ASE by direct Poisson mixing over the number
/// of other links, with every link's blockage probability integrated over its
/// length law.
pub fn tdma_by_mixture(
    tx_density: f64,
    region_area: f64,
    obstacle_density: f64,
    coherence_angle: f64,
    dmax: f64,
) -> (f64, f64) {
    let rule = Rule::new(40);
    let los = rule.integrate_panels(
        |l| (-obstacle_density * coherence_angle * l * l / 2.0).exp() * 2.0 * l / (dmax * dmax),
        0.0,
        dmax,
        8,
    );
    let masses = poisson_masses(tx_density * region_area, 1e-14);
    let mut per_link = 0.0;
    let mut ase = 0.0;
    for (n, p) in masses.iter().enumerate() {
        let links = (n + 1) as f64;
        per_link += p / links * los;
        // every one of the 1 + n links holds a 1/(1 + n) share
        let delivered: f64 = (0..=n).map(|_| los / links).sum();
        ase += p * delivered;
    }
    (per_link, ase / region_area)
}

/// Total mass and mass on `{x < y}` of a sector's joint min-distance density,
/// given as a closure `(x, y, n, m) -> density`, summed over counts up to
/// `max_count` and integrated with tensor Gauss-Legendre rules.
pub fn min_distance_masses(
    density: impl Fn(f64, f64, u32, u32) -> f64,
    dmax: f64,
    max_count: u32,
) -> (f64, f64) {
    let rule = Rule::new(64);
    let mut total = 0.0;
    let mut below = 0.0;
    for n in 1..=max_count {
        for m in 1..=max_count {
            total += rule.integrate(
                |y| rule.integrate(|x| density(x, y, n, m), 0.0, dmax),
                0.0,
                dmax,
            );
            below += rule.integrate(
                |y| rule.integrate(|x| density(x, y, n, m), 0.0, y),
                0.0,
                dmax,
            );
        }
    }
    (total, below)
}

/// Smallest count whose zero-truncated Poisson tail is below 1e-13.
pub fn count_cutoff(mean: f64) -> u32 {
    poisson_masses(mean, 1e-13).len() as u32
}

/// Pearson chi-square statistic of integer samples against a pmf on
/// `{0, 1, ...}`. Bins are merged from the right until each expects at
/// least five samples; returns `(statistic, bins)`.
pub fn chi_square(samples: &[u64], pmf: impl Fn(u64) -> f64) -> (f64, usize) {
    let n = samples.len() as f64;
    let mut edges = Vec::new();
    let mut k = 0u64;
    let mut covered = 0.0;
    loop {
        let p = pmf(k);
        if n * p < 5.0 || n * (1.0 - covered - p) < 5.0 {
            break;
        }
        covered += p;
        edges.push(k);
        k += 1;
    }
    // the last bin collects everything from `k` on
    let mut observed = vec![0u64; edges.len() + 1];
    for &s in samples {
        let b = (s as usize).min(edges.len());
        observed[b] += 1;
    }
    let mut expected: Vec<f64> = edges.iter().map(|&e| n * pmf(e)).collect();
    expected.push(n * (1.0 - covered));
    let stat = observed
        .iter()
        .zip(&expected)
        .map(|(&o, &e)| (o as f64 - e).powi(2) / e)
        .sum();
    (stat, observed.len())
}
