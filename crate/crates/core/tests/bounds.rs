use gutmanlab_core::classifiers::threshold_gutman_corrected;
use gutmanlab_core::distributions::Distribution;
use gutmanlab_core::divergences::{gjs, renyi};
use gutmanlab_core::exponents::{exponent_f, exponent_fn};
use gutmanlab_core::simulation::{exact_binary, mc_binary};

fn b(p: f64) -> Distribution {
    Distribution::bernoulli(p).unwrap()
}

#[test]
fn type1_error_below_exp_bound_when_threshold_is_raised() {
    for alpha in [1.0, 2.0] {
        for n in [20u64, 50, 100] {
            for lambda in [0.0, 0.05, 0.2] {
                let corr = lambda - threshold_gutman_corrected(lambda, n, alpha, 2).unwrap();
                for q in [0.1, 0.2, 0.3, 0.5] {
                    let r = exact_binary(&b(q), &b(0.5), alpha, n, lambda + corr).unwrap();
                    let bound = (-(n as f64) * lambda).exp();
                    assert!(r.beta1.get() <= bound, "α={alpha} n={n} λ={lambda} q={q}: {} > {bound}", r.beta1.get());
                }
            }
        }
    }
}

#[test]
fn exact_masses_sum_to_one() {
    let r = exact_binary(&b(0.3), &b(0.6), 2.0, 30, 0.02).unwrap();
    assert!((r.mass_h1 - 1.0).abs() < 1e-12);
    assert!((r.mass_h2 - 1.0).abs() < 1e-12);
    assert_eq!(r.enumerated_cells, 61 * 31);
}

#[test]
fn monte_carlo_tracks_exact_on_ternary_alphabet() {
    let p1 = Distribution::new(vec![0.2, 0.5, 0.3]).unwrap();
    let p2 = Distribution::new(vec![0.5, 0.25, 0.25]).unwrap();
    let ex = exact_binary(&p1, &p2, 1.0, 12, 0.05).unwrap();
    let mc = mc_binary(&p1, &p2, 1.0, 12, 0.05, 40_000, 21).unwrap();
    for (name, exact) in [("beta1", ex.beta1.get()), ("beta2", ex.beta2.get())] {
        let e = mc.get(name).unwrap();
        assert!((e.value() - exact).abs() <= 4.0 * e.stderr, "{name}: {} vs {exact}", e.value());
    }
}

#[test]
fn exponent_is_continuous_at_zero_threshold() {
    let (p1, p2) = (b(0.15), b(0.55));
    let at_zero = exponent_f(&p1, &p2, 2.0, 0.0).unwrap().value;
    assert!((at_zero - renyi(2.0 / 3.0, &p1, &p2).unwrap()).abs() < 1e-12);
    let mut prev = at_zero;
    for lambda in [1e-8, 1e-6, 1e-4, 1e-3] {
        let s = exponent_f(&p1, &p2, 2.0, lambda).unwrap();
        assert!(s.converged);
        assert!(s.value <= prev + 1e-10);
        prev = s.value;
    }
    // the drop below F(0) grows like √λ
    let drop = |l: f64| at_zero - exponent_f(&p1, &p2, 2.0, l).unwrap().value;
    let (d8, d6) = (drop(1e-8), drop(1e-6));
    assert!(d8 > 0.0 && d8 < 1e-3, "{d8}");
    let ratio = d8 / d6;
    assert!((0.07..0.14).contains(&ratio), "{ratio}");
}

#[test]
fn exponent_vanishes_at_gjs() {
    let (p1, p2) = (b(0.2), b(0.4));
    let g = gjs(&p1, &p2, 2.0).unwrap();
    assert_eq!(exponent_f(&p1, &p2, 2.0, g).unwrap().value, 0.0);
    let below = exponent_f(&p1, &p2, 2.0, 0.999 * g).unwrap().value;
    assert!(below > 0.0 && below < 1e-4);
}

#[test]
fn lattice_exponent_approaches_continuous_one() {
    let (p1, p2) = (b(0.2), b(0.5));
    let f = exponent_f(&p1, &p2, 1.0, 0.01).unwrap().value;
    let gaps: Vec<f64> = [10u64, 40, 160]
        .iter()
        .map(|&n| {
            let fnv = exponent_fn(&p1, &p2, 1.0, 0.01, n).unwrap().value;
            // lattice minimizers are feasible points of the continuous program
            assert!(fnv >= f - 1e-9, "n={n}: {fnv} < {f}");
            fnv - f
        })
        .collect();
    assert!(gaps[2] < gaps[0], "{gaps:?}");
    assert!(gaps[2] < 0.01, "{gaps:?}");
}
