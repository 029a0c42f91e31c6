//! Independent reference computations for the numeric kernels.

mod common;

use common::{bisect_perron_3x3, brute_poip, brute_pop, brute_triad_ki, random_matrix, SAMPLE};
use pcm_cop::cop::{poip_evaluate, pop_evaluate, theorem1_count, theorem2_count};
use pcm_cop::priority::{DEFAULT_EV_MAX_ITER, DEFAULT_EV_TOL};
use pcm_cop::{ev_weights, gm_weights, koczkodaj_ki, saaty_ci, PcMatrix};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn sample() -> PcMatrix {
    PcMatrix::from_rows(&SAMPLE).unwrap()
}

#[test]
fn sample_lambda_max_matches_characteristic_polynomial() {
    let c = sample();
    let (lambda, vector) = bisect_perron_3x3(&c);
    // root of λ³ - 3λ² - 1/2, frozen from an external polynomial solver
    assert!((lambda - 3.0536215758789735).abs() < 1e-12);
    let ev = ev_weights(&c, DEFAULT_EV_TOL, DEFAULT_EV_MAX_ITER).unwrap();
    assert!((ev.lambda_max - lambda).abs() < 1e-9);
    for i in 0..3 {
        assert!((ev.vector.get(i) - vector[i]).abs() < 1e-9);
    }
    let ci = saaty_ci(lambda, 3);
    assert!((saaty_ci(ev.lambda_max, 3) - ci).abs() < 1e-9);
    assert!((ci - 0.02681078793948677).abs() < 1e-12);
}

#[test]
fn sample_gm_matches_direct_product() {
    let c = sample();
    let raw: Vec<f64> = (0..3).map(|i| c.row(i).iter().product::<f64>().powf(1.0 / 3.0)).collect();
    let s: f64 = raw.iter().sum();
    let gm = gm_weights(&c);
    for i in 0..3 {
        assert!((gm.get(i) - raw[i] / s).abs() < 1e-12);
    }
}

#[test]
fn sample_consistency_defect_brute_force() {
    let c = sample();
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                worst = worst.max((SAMPLE[i][j] * SAMPLE[j][k] * SAMPLE[k][i] - 1.0).abs());
            }
        }
    }
    assert_eq!(worst, 1.0);
    assert_eq!(c.consistency_defect(), worst);
}

#[test]
fn sample_ki_and_theorem_counts() {
    let c = sample();
    assert_eq!(brute_triad_ki(&c), 0.5);
    assert_eq!(koczkodaj_ki(&c), 0.5);
    assert_eq!(theorem1_count(&c, 0.5), 1);
    // direct scan at threshold 4 over the pairs (1,2), (1,3), (2,3) with values 2, 8, 2
    let vals = [2.0, 8.0, 2.0];
    let mut expected = 0;
    for a in 0..3 {
        for b in 0..3 {
            if a != b && vals[a] / vals[b] > 4.0 {
                expected += 1;
            }
        }
    }
    assert_eq!(theorem2_count(&c, 0.5), expected);
}

#[test]
fn random_3x3_eigen_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x3333);
    for _ in 0..200 {
        let c = random_matrix(3, &mut rng);
        let (lambda, vector) = bisect_perron_3x3(&c);
        let ev = ev_weights(&c, DEFAULT_EV_TOL, DEFAULT_EV_MAX_ITER).unwrap();
        assert!((ev.lambda_max - lambda).abs() < 1e-9, "{} vs {lambda}", ev.lambda_max);
        for i in 0..3 {
            assert!((ev.vector.get(i) - vector[i]).abs() < 1e-9);
        }
    }
}

#[test]
fn random_4x4_condition_counts_match_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4444);
    for _ in 0..200 {
        let c = random_matrix(4, &mut rng);
        for w in [ev_weights(&c, DEFAULT_EV_TOL, DEFAULT_EV_MAX_ITER).unwrap().vector, gm_weights(&c)] {
            let pop = pop_evaluate(&c, &w);
            assert_eq!((pop.applicable, pop.satisfied), brute_pop(&c, w.weights()));
            let poip = poip_evaluate(&c, &w);
            assert_eq!((poip.applicable, poip.satisfied), brute_poip(&c, w.weights()));
        }
        assert_eq!(koczkodaj_ki(&c), brute_triad_ki(&c));
    }
}

#[test]
fn ki_closed_form_agrees() {
    // min(|1-r|, |1-1/r|) = 1 - 1/max(r, 1/r)
    let mut rng = ChaCha8Rng::seed_from_u64(0x5555);
    for n in 3..=6 {
        let c = random_matrix(n, &mut rng);
        let mut worst_ratio = 1.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    if i != j && j != k && i != k {
                        let r = c.get(i, j) / (c.get(i, k) * c.get(k, j));
                        worst_ratio = worst_ratio.max(r.max(1.0 / r));
                    }
                }
            }
        }
        assert!((koczkodaj_ki(&c) - (1.0 - 1.0 / worst_ratio)).abs() < 1e-12);
    }
}
