//! Test-only reference implementations, independent of the library code paths.
#![allow(dead_code)]

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// A bar as `(dim, birth, death)` with `None` for infinite deaths.
pub type Bar = (usize, f64, Option<f64>);

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Brute-force Rips persistence: enumerate every vertex subset, build the dense
/// boundary matrix over Z/2 and run the textbook column reduction with no
/// clearing, no early exit and no union-find.
pub fn naive_persistence(points: &[Vec<f64>], max_dim: usize, max_radius: f64) -> Vec<Bar> {
    let n = points.len();
    let top = max_dim + 1;
    let mut simplices: Vec<(f64, Vec<usize>)> = Vec::new();
    let mut stack: Vec<Vec<usize>> = (0..n).map(|v| vec![v]).collect();
    while let Some(s) = stack.pop() {
        let mut value: f64 = 0.0;
        for i in 0..s.len() {
            for j in (i + 1)..s.len() {
                value = value.max(dist(&points[s[i]], &points[s[j]]) / 2.0);
            }
        }
        if value > max_radius {
            continue;
        }
        if s.len() <= top {
            for v in (s[s.len() - 1] + 1)..n {
                let mut t = s.clone();
                t.push(v);
                stack.push(t);
            }
        }
        simplices.push((value, s));
    }
    simplices.sort_by(|a, b| {
        a.0.partial_cmp(&b.0)
            .unwrap()
            .then(a.1.len().cmp(&b.1.len()))
            .then(a.1.cmp(&b.1))
    });
    let m = simplices.len();
    let index = |s: &[usize]| simplices.iter().position(|(_, t)| t.as_slice() == s).unwrap();
    let mut matrix = vec![vec![false; m]; m];
    for (j, (_, s)) in simplices.iter().enumerate() {
        if s.len() > 1 {
            for skip in 0..s.len() {
                let face: Vec<usize> = s
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| *i != skip)
                    .map(|(_, &v)| v)
                    .collect();
                matrix[j][index(&face)] = true;
            }
        }
    }
    let low = |col: &Vec<bool>| col.iter().rposition(|&x| x);
    let mut lows: Vec<Option<usize>> = vec![None; m];
    for j in 0..m {
        while let Some(l) = low(&matrix[j]) {
            let Some(k) = (0..j).find(|&k| lows[k] == Some(l)) else {
                break;
            };
            let other = matrix[k].clone();
            for (x, y) in matrix[j].iter_mut().zip(other) {
                *x ^= y;
            }
        }
        lows[j] = low(&matrix[j]);
    }
    let mut bars = Vec::new();
    let mut paired = vec![false; m];
    for j in 0..m {
        if let Some(i) = lows[j] {
            paired[i] = true;
            paired[j] = true;
            let dim = simplices[i].1.len() - 1;
            let (b, d) = (simplices[i].0, simplices[j].0);
            if dim <= max_dim && d > b {
                bars.push((dim, b, Some(d)));
            }
        }
    }
    for j in 0..m {
        let dim = simplices[j].1.len() - 1;
        if !paired[j] && lows[j].is_none() && dim <= max_dim {
            bars.push((dim, simplices[j].0, None));
        }
    }
    sort_bars(&mut bars);
    bars
}

pub fn sort_bars(bars: &mut [Bar]) {
    bars.sort_by(|a, b| {
        a.0.cmp(&b.0)
            .then(a.1.partial_cmp(&b.1).unwrap())
            .then(match (a.2, b.2) {
                (Some(x), Some(y)) => x.partial_cmp(&y).unwrap(),
                (Some(_), None) => std::cmp::Ordering::Less,
                (None, Some(_)) => std::cmp::Ordering::Greater,
                (None, None) => std::cmp::Ordering::Equal,
            })
    });
}

pub fn random_points(seed: u64, n: usize, dim: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (0..dim).map(|_| rng.random::<f64>()).collect())
        .collect()
}

/// Sample variance-free mean and standard error.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Standard normal CDF by composite Simpson quadrature of the density on
/// `[-12, z]`; accurate to well below 1e-10 with the default resolution.
pub fn normal_cdf_quadrature(z: f64) -> f64 {
    let a = -12.0;
    let steps = 200_000;
    let h = (z - a) / steps as f64;
    let f = |x: f64| (-0.5 * x * x).exp() / (2.0 * std::f64::consts::PI).sqrt();
    let mut acc = f(a) + f(z);
    for i in 1..steps {
        let x = a + i as f64 * h;
        acc += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
    }
    acc * h / 3.0
}
