//! Test-only oracles. These re-read the definitions with plain loops and never
//! call into the code paths they check.
#![allow(dead_code)]

use pcm_cop::{generate_consistent, perturb, DeltaScheme, DisturbanceSpec, PcMatrix};
use rand::Rng;

pub const SAMPLE: [[f64; 3]; 3] = [[1.0, 2.0, 8.0], [0.5, 1.0, 2.0], [0.125, 0.5, 1.0]];

/// Perturbed random matrix with γ drawn from (1, 4).
pub fn random_matrix<R: Rng>(n: usize, rng: &mut R) -> PcMatrix {
    let gamma = rng.gen_range(1.01..3.99);
    let scheme = if rng.gen_bool(0.5) { DeltaScheme::Uniform } else { DeltaScheme::LogUniform };
    let (_, c) = generate_consistent(n, rng);
    perturb(&c, &DisturbanceSpec::new(gamma, scheme).unwrap(), rng)
}

/// Largest real root of the characteristic polynomial of a 3x3 positive
/// matrix, found by bisection, together with its eigenvector scaled to sum 1.
pub fn bisect_perron_3x3(c: &PcMatrix) -> (f64, [f64; 3]) {
    let a = |i: usize, j: usize| c.get(i, j);
    let trace = a(0, 0) + a(1, 1) + a(2, 2);
    let minors = (a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0))
        + (a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0))
        + (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1));
    let det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1)) - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
        + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
    let p = |x: f64| ((x - trace) * x + minors) * x - det;

    // Perron root lies between the smallest and largest row sums.
    let row_sums: Vec<f64> = (0..3).map(|i| (0..3).map(|j| a(i, j)).sum()).collect();
    let mut lo = row_sums.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = row_sums.iter().cloned().fold(0.0, f64::max);
    assert!(p(lo) <= 0.0 && p(hi) >= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if p(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let lambda = 0.5 * (lo + hi);

    // null vector of (A - λI) as the cross product of its first two rows
    let r0 = [a(0, 0) - lambda, a(0, 1), a(0, 2)];
    let r1 = [a(1, 0), a(1, 1) - lambda, a(1, 2)];
    let v = [
        r0[1] * r1[2] - r0[2] * r1[1],
        r0[2] * r1[0] - r0[0] * r1[2],
        r0[0] * r1[1] - r0[1] * r1[0],
    ];
    let s = v[0] + v[1] + v[2];
    (lambda, [v[0] / s, v[1] / s, v[2] / s])
}

/// (applicable, satisfied) POP counts by a double loop over ordered pairs.
pub fn brute_pop(c: &PcMatrix, w: &[f64]) -> (u64, u64) {
    let n = c.order();
    let (mut app, mut sat) = (0, 0);
    for i in 0..n {
        for j in 0..n {
            if i != j && c.get(i, j) > 1.0 {
                app += 1;
                if w[i] > w[j] {
                    sat += 1;
                }
            }
        }
    }
    (app, sat)
}

/// (applicable, satisfied) POIP counts by a quadruple loop.
pub fn brute_poip(c: &PcMatrix, w: &[f64]) -> (u64, u64) {
    let n = c.order();
    let (mut app, mut sat) = (0, 0);
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    if i == j || k == l || (k == i && l == j) || (k == j && l == i) {
                        continue;
                    }
                    let (cij, ckl) = (c.get(i, j), c.get(k, l));
                    if cij > 1.0 && ckl > 1.0 && cij > ckl {
                        app += 1;
                        if w[i] / w[j] > w[k] / w[l] {
                            sat += 1;
                        }
                    }
                }
            }
        }
    }
    (app, sat)
}

/// Koczkodaj's index over all triads with pairwise distinct indices.
pub fn brute_triad_ki(c: &PcMatrix) -> f64 {
    let n = c.order();
    let mut ki = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if i == j || j == k || i == k {
                    continue;
                }
                let path = c.get(i, k) * c.get(k, j);
                let v = f64::min((1.0 - c.get(i, j) / path).abs(), (1.0 - path / c.get(i, j)).abs());
                ki = ki.max(v);
            }
        }
    }
    ki
}
