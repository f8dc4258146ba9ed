//! Independent oracles shared by the integration tests. Nothing here calls
//! into the simplex solver.

#![allow(dead_code)]

use dea::data::{Dataset, VariableSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Builds a dataset from column-per-DMU input and output matrices.
pub fn dataset_from(x: &[Vec<f64>], y: &[Vec<f64>]) -> Dataset {
    let n = x[0].len();
    let ids = (0..n).map(|j| format!("D{j:02}")).collect();
    let mut vars: Vec<VariableSpec> = (0..x.len()).map(|i| VariableSpec::input(format!("x{i}"))).collect();
    vars.extend((0..y.len()).map(|r| VariableSpec::output(format!("y{r}"))));
    let values = (0..n)
        .map(|j| x.iter().chain(y.iter()).map(|row| row[j]).collect())
        .collect();
    Dataset::new(ids, vars, values).unwrap()
}

pub fn one_by_one(points: &[(&str, f64, f64)]) -> Dataset {
    Dataset::new(
        points.iter().map(|p| p.0.to_string()).collect(),
        vec![VariableSpec::input("x"), VariableSpec::output("y")],
        points.iter().map(|p| vec![p.1, p.2]).collect(),
    )
    .unwrap()
}

/// Random strictly positive instance with values in `[1, 10)`.
pub fn random_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, s: usize) -> Dataset {
    let x: Vec<Vec<f64>> = (0..m).map(|_| (0..n).map(|_| rng.gen_range(1.0..10.0)).collect()).collect();
    let y: Vec<Vec<f64>> = (0..s).map(|_| (0..n).map(|_| rng.gen_range(1.0..10.0)).collect()).collect();
    dataset_from(&x, &y)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Largest feasible theta for fixed intensity weights, or `None` if the
/// weights overuse some input.
fn theta_at(x: &[Vec<f64>], y: &[Vec<f64>], k: usize, lambda: &[f64]) -> Option<f64> {
    for xi in x {
        let used: f64 = xi.iter().zip(lambda).map(|(a, l)| a * l).sum();
        if used > xi[k] + 1e-12 {
            return None;
        }
    }
    y.iter()
        .map(|yr| yr.iter().zip(lambda).map(|(a, l)| a * l).sum::<f64>() / yr[k])
        .reduce(f64::min)
}

/// Calls `f` with every composition of `steps` into `n` non-negative parts.
fn for_each_composition(n: usize, steps: usize, f: &mut dyn FnMut(&[usize])) {
    fn rec(pos: usize, left: usize, counts: &mut [usize], f: &mut dyn FnMut(&[usize])) {
        if pos == counts.len() - 1 {
            counts[pos] = left;
            f(counts);
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            rec(pos + 1, left - c, counts, f);
        }
    }
    let mut counts = vec![0usize; n];
    rec(0, steps, &mut counts, f);
}

/// VRS theta by exhaustive search over the lambda simplex at resolution
/// `1/steps`. Exact when an optimal lambda lies on the grid.
pub fn grid_theta_vrs(d: &Dataset, k: usize, steps: usize) -> f64 {
    let x = d.inputs();
    let y = d.outputs();
    let mut best = f64::NEG_INFINITY;
    let mut lambda = vec![0.0; d.n()];
    for_each_composition(d.n(), steps, &mut |c| {
        for (l, &ci) in lambda.iter_mut().zip(c) {
            *l = ci as f64 / steps as f64;
        }
        if let Some(t) = theta_at(&x, &y, k, &lambda) {
            best = best.max(t);
        }
    });
    best
}

/// CRS theta by grid search over rays: lambda = t · w with w on the simplex
/// grid and t as large as the inputs allow.
pub fn grid_theta_crs(d: &Dataset, k: usize, steps: usize) -> f64 {
    let x = d.inputs();
    let y = d.outputs();
    let mut best = f64::NEG_INFINITY;
    let mut w = vec![0.0; d.n()];
    for_each_composition(d.n(), steps, &mut |c| {
        for (wi, &ci) in w.iter_mut().zip(c) {
            *wi = ci as f64 / steps as f64;
        }
        let scale = x
            .iter()
            .map(|xi| xi[k] / xi.iter().zip(&w).map(|(a, l)| a * l).sum::<f64>())
            .fold(f64::INFINITY, f64::min);
        let lambda: Vec<f64> = w.iter().map(|v| v * scale).collect();
        if let Some(t) = theta_at(&x, &y, k, &lambda) {
            best = best.max(t);
        }
    });
    best
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                let (top, bottom) = a.split_at_mut(r);
                for (dst, src) in bottom[0][col..].iter_mut().zip(&top[col][col..]) {
                    *dst -= f * src;
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut z = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * z[c]).sum();
        z[r] = (b[r] - s) / a[r][r];
    }
    Some(z)
}

fn for_each_subset(n: usize, k: usize, f: &mut dyn FnMut(&[usize])) {
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] < n - k + i) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Exact theta by enumerating every basic solution of the envelopment LP in
/// equality form (with explicit slack/surplus columns) and keeping the best
/// feasible one.
pub fn vertex_theta(d: &Dataset, k: usize, vrs: bool) -> f64 {
    let x = d.inputs();
    let y = d.outputs();
    let n = d.n();
    let (m, s) = (x.len(), y.len());
    let rows = s + m + usize::from(vrs);
    let cols = n + 1 + s + m;
    let theta_col = n;
    let mut a = vec![vec![0.0; cols]; rows];
    let mut b = vec![0.0; rows];
    for r in 0..s {
        a[r][..n].copy_from_slice(&y[r]);
        a[r][theta_col] = -y[r][k];
        a[r][n + 1 + r] = -1.0;
    }
    for i in 0..m {
        a[s + i][..n].copy_from_slice(&x[i]);
        a[s + i][n + 1 + s + i] = 1.0;
        b[s + i] = x[i][k];
    }
    if vrs {
        a[rows - 1][..n].iter_mut().for_each(|v| *v = 1.0);
        b[rows - 1] = 1.0;
    }
    let mut best = f64::NEG_INFINITY;
    for_each_subset(cols, rows, &mut |basis| {
        let sq: Vec<Vec<f64>> = (0..rows).map(|r| basis.iter().map(|&c| a[r][c]).collect()).collect();
        if let Some(z) = solve_square(sq, b.clone()) {
            if z.iter().all(|v| *v >= -1e-9) {
                let theta = basis.iter().position(|&c| c == theta_col).map_or(0.0, |p| z[p]);
                best = best.max(theta);
            }
        }
    });
    best
}

/// Pearson r via the single-pass textbook formula.
pub fn pearson_textbook(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let syy: f64 = y.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}
