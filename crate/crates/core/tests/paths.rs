use nilgrade::grading::{Word, WordSet};
use nilgrade::lie::{free_step3, heisenberg, kolmogorov, LieAlgebra};
use nilgrade::path::{
    chen_from_signature, exp_flow, iterated_integrals, lie_element, reference_endpoint,
    sample_brownian, sample_brownian_path, signature, taylor_endpoint, PLPath,
};
use proptest::prelude::*;

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn check_taylor(alg: &LieAlgebra<f64>, r: usize, paths: u64, tol: f64) {
    let x0 = vec![0.0; alg.fields().unwrap()[0].space_dim()];
    for i in 0..paths {
        let p = sample_brownian_path::<f64>(alg.m(), 16, 2024, i);
        let t = taylor_endpoint(alg, &x0, &p, r).unwrap();
        let d = reference_endpoint(alg, &x0, &p, true).unwrap();
        assert!(max_diff(&t, &d) < tol, "path {i}: {t:?} vs {d:?}");
    }
}

#[test]
fn taylor_matches_ode_kolmogorov() {
    check_taylor(&kolmogorov(), 2, 100, 1e-8);
}

#[test]
fn taylor_matches_ode_heisenberg() {
    check_taylor(&heisenberg(), 2, 30, 1e-8);
}

#[test]
fn taylor_matches_ode_free_step3() {
    check_taylor(&free_step3(), 3, 30, 1e-8);
}

#[test]
fn linear_path_with_drift() {
    let p = PLPath::new(vec![0.0, 1.0], vec![vec![0.0], vec![1.0]]).unwrap();
    let k = kolmogorov::<f64>();
    let t = taylor_endpoint(&k, &[0.0, 0.0], &p, 2).unwrap();
    let d = reference_endpoint(&k, &[0.0, 0.0], &p, true).unwrap();
    assert!(max_diff(&t, &[1.0, 0.5]) < 1e-14);
    assert!(max_diff(&d, &[1.0, 0.5]) < 1e-10);
    let zero = PLPath::new(vec![0.0, 1.0], vec![vec![0.0], vec![0.0]]).unwrap();
    let x0 = [0.4, -1.0];
    let z = taylor_endpoint(&k, &x0, &zero, 2).unwrap();
    // Zero noise still carries the drift x¹∂₂ for unit time.
    assert!(max_diff(&z, &[0.4, -0.6]) < 1e-14);
}

#[test]
fn grade_one_matches_horizontal_flow() {
    for alg in [kolmogorov::<f64>(), heisenberg()] {
        let words = WordSet::new(alg.m(), 2).unwrap();
        for i in 0..20 {
            let p = sample_brownian_path::<f64>(alg.m(), 12, 77, i);
            let sig = signature(&p, &words).unwrap();
            let mut c = chen_from_signature(&words, &sig).unwrap();
            for (idx, ci) in c.iter_mut().enumerate() {
                if words.word(idx).stats().p > 0 {
                    *ci = 0.0;
                }
            }
            let u = lie_element(&alg, &words, &c).unwrap();
            let x0 = vec![0.0; alg.fields().unwrap()[0].space_dim()];
            let a = exp_flow(&alg, &x0, &u).unwrap();
            let b = reference_endpoint(&alg, &x0, &p, false).unwrap();
            assert!(max_diff(&a, &b) < 1e-9, "{a:?} vs {b:?}");
        }
    }
}

#[test]
fn brownian_endpoint_moments() {
    let n = 100_000u64;
    let xs: Vec<f64> = (0..n)
        .map(|s| *sample_brownian::<f64>(1, 1, s).values()[1].first().unwrap())
        .collect();
    let mean = xs.iter().sum::<f64>() / n as f64;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "{mean}");
    assert!((var - 1.0).abs() < 0.05, "{var}");
}

#[test]
fn shuffle_against_quadrature() {
    // Brute-force midpoint quadrature of W^{10} on a fine grid of one path.
    let p = sample_brownian::<f64>(1, 8, 31);
    let it = iterated_integrals(&p, 2).unwrap();
    let fine = 80_000;
    let mut acc = 0.0;
    for i in 0..fine {
        let t = (i as f64 + 0.5) / fine as f64;
        acc += p.eval(t)[0] / fine as f64;
    }
    let w10: Word = "10".parse().unwrap();
    assert!((it.at_knot(8, &w10).unwrap() - acc).abs() < 1e-8);
}

#[test]
fn integrals_csv_header() {
    let p = sample_brownian::<f64>(1, 3, 1);
    let it = iterated_integrals(&p, 2).unwrap();
    let mut buf = Vec::new();
    it.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,0,1,00,01,10,11");
    assert_eq!(text.lines().count(), 5);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn shuffle_identity(seed in any::<u64>(), n in 1usize..12, m in 1usize..3) {
        let p = sample_brownian::<f64>(m, n, seed);
        let it = iterated_integrals(&p, 2).unwrap();
        let ws = it.word_set();
        for vals in it.knot_values() {
            for i in 0..=m {
                for j in 0..=m {
                    let a = vals[ws.index_of(&[i]).unwrap()] * vals[ws.index_of(&[j]).unwrap()];
                    let b = vals[ws.index_of(&[i, j]).unwrap()] + vals[ws.index_of(&[j, i]).unwrap()];
                    prop_assert!((a - b).abs() <= 1e-11 * a.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn chen_concatenation(seed in any::<u64>(), n in 2usize..10, cut_frac in 0.0f64..1.0) {
        let p = sample_brownian::<f64>(1, n, seed);
        let cut = 1 + ((n - 1) as f64 * cut_frac) as usize;
        let ws = WordSet::new(1, 3).unwrap();
        let full = signature(&p, &ws).unwrap();
        let a = signature(&p.segment(0, cut).unwrap(), &ws).unwrap();
        let b = signature(&p.segment(cut, n).unwrap(), &ws).unwrap();
        for idx in 0..ws.len() {
            let l = ws.word(idx).letters().to_vec();
            let mut s = a[idx] + b[idx];
            for k in 1..l.len() {
                s += a[ws.index_of(&l[..k]).unwrap()] * b[ws.index_of(&l[k..]).unwrap()];
            }
            prop_assert!((s - full[idx]).abs() < 1e-10, "{:?}", l);
        }
    }

    #[test]
    fn length_one_coefficients_are_integrals(seed in any::<u64>()) {
        let p = sample_brownian::<f64>(2, 5, seed);
        let ws = WordSet::new(2, 3).unwrap();
        let sig = signature(&p, &ws).unwrap();
        let c = chen_from_signature(&ws, &sig).unwrap();
        for j in 0..3 {
            let i = ws.index_of(&[j]).unwrap();
            prop_assert_eq!(c[i], sig[i]);
        }
    }
}
