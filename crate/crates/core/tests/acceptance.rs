//! Acceptance suite. Each test prints one `PASS`/`FAIL` line with the
//! measured quantities, then asserts.

use gutmanlab_core::classifiers::{multi_threshold, threshold_chi2_dual, threshold_gutman_corrected, threshold_second_order};
use gutmanlab_core::distributions::seeded_stream;
use gutmanlab_core::divergences::{gjs, gjs_gradient, gjs_hessian, renyi, tilted, triple_div};
use gutmanlab_core::exponents::{exponent_f, exponent_k, grid_exponent_f, slack_terms};
use gutmanlab_core::simulation::{exact_binary, mc_binary, mc_multi, weak_convergence_check, MultiRule};
use gutmanlab_core::{Distribution, Probability};
use rand::Rng;

fn b(p: f64) -> Distribution {
    Distribution::bernoulli(p).unwrap()
}

fn eps(p: f64) -> Probability {
    Probability::open(p).unwrap()
}

fn verdict(id: u32, title: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id:>2} {title}: {detail}");
    assert!(pass, "criterion {id} failed: {detail}");
}

fn random_dist<R: Rng>(rng: &mut R, k: usize) -> Distribution {
    let w: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
    Distribution::from_weights(w).unwrap()
}

#[test]
fn criterion_01_type2_calibration() {
    let (p1, p2) = (b(0.2), b(0.4));
    let mut details = Vec::new();
    let mut ok = true;
    let mut dist = Vec::new();
    for n in [1000, 3000, 5000] {
        let lambda = threshold_second_order(&p1, &p2, 2.0, n, eps(0.2)).unwrap();
        let r = mc_binary(&p1, &p2, 2.0, n, lambda, 100_000, 1).unwrap();
        let b2 = r.get("beta2").unwrap().value();
        ok &= (0.17..=0.27).contains(&b2);
        dist.push((b2 - 0.2).abs());
        details.push(format!("n={n} β̂₂={b2:.4}"));
    }
    ok &= dist[2] <= dist[0];
    verdict(1, "type-II error near target", ok, details.join(", "));
}

#[test]
fn criterion_02_threshold_slope() {
    let (p1, p2) = (b(0.2), b(0.228));
    let f = |n: u64| -(n as f64) * threshold_second_order(&p1, &p2, 2.0, n, eps(0.2)).unwrap();
    let h = 10;
    let slope = (f(5000 + h) - f(5000 - h)) / (2.0 * h as f64);
    let rel = ((slope + 0.001_225) / 0.001_225).abs();
    verdict(2, "slope of −n·λ̂(n) at n=5000", rel <= 0.10, format!("slope={slope:.6e}, rel.dev={rel:.3}"));
}

#[test]
fn criterion_03_monte_carlo_vs_exact() {
    let (p1, p2) = (b(0.2), b(0.4));
    let mut ok = true;
    let mut details = Vec::new();
    for lambda in [0.005, 0.02, 0.05] {
        let ex = exact_binary(&p1, &p2, 2.0, 50, lambda).unwrap();
        let mc = mc_binary(&p1, &p2, 2.0, 50, lambda, 100_000, 3).unwrap();
        for (name, exact) in [("beta1", ex.beta1.get()), ("beta2", ex.beta2.get())] {
            let e = mc.get(name).unwrap();
            let z = (e.value() - exact).abs() / e.stderr.max(f64::MIN_POSITIVE);
            ok &= (e.value() - exact).abs() <= 4.0 * e.stderr;
            details.push(format!("λ={lambda} {name}: |Δ|/se={z:.2}"));
        }
    }
    verdict(3, "Monte Carlo within 4 stderr of exact", ok, details.join(", "));
}

#[test]
fn criterion_04_zero_threshold_closed_form() {
    let mut rng = seeded_stream(4, 0);
    let mut worst_value: f64 = 0.0;
    let mut worst_min: f64 = 0.0;
    for case in 0..20 {
        let alpha = [0.5, 1.0, 2.0, 5.0][case % 4];
        let k = 2 + case % 4;
        let (p1, p2) = (random_dist(&mut rng, k), random_dist(&mut rng, k));
        let s = exponent_f(&p1, &p2, alpha, 0.0).unwrap();
        let gamma = alpha / (1.0 + alpha);
        worst_value = worst_value.max((s.value - renyi(gamma, &p1, &p2).unwrap()).abs());
        let t = tilted(&p1, &p2, gamma).unwrap();
        for q in &s.minimizers {
            worst_min = worst_min.max(q.max_abs_diff(&t));
        }
    }
    verdict(
        4,
        "F at λ=0 equals the Rényi divergence",
        worst_value <= 1e-6 && worst_min <= 1e-4,
        format!("max |F−D_γ|={worst_value:.2e}, max L∞ to tilted={worst_min:.2e}"),
    );
}

#[test]
fn criterion_05_grid_oracle() {
    let g = gjs(&b(0.2), &b(0.4), 2.0).unwrap();
    let lambdas: Vec<f64> = (0..6).map(|i| 0.001 + (0.9 * g - 0.001) * i as f64 / 5.0).collect();
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for &lambda in &lambdas {
        let s = exponent_f(&b(0.2), &b(0.4), 2.0, lambda).unwrap();
        all_converged &= s.converged;
        let grid = grid_exponent_f(0.2, 0.4, 2.0, lambda, 1e-3).unwrap();
        worst = worst.max((s.value - grid).abs());
    }
    verdict(
        5,
        "F matches the Bernoulli grid",
        worst <= 1e-3 && all_converged,
        format!("λ ∈ [{:.4}, {:.4}] (6 points), max |F−grid|={worst:.2e}", lambdas[0], lambdas[5]),
    );
}

#[test]
fn criterion_06_three_way_closed_form() {
    let mut rng = seeded_stream(6, 0);
    let mut worst: f64 = 0.0;
    for case in 0..10 {
        let alpha = [0.5, 1.0, 2.0, 3.0, 5.0][case % 5];
        let k = 2 + case % 3;
        let (pj, pi, pk) = (random_dist(&mut rng, k), random_dist(&mut rng, k), random_dist(&mut rng, k));
        let s = exponent_k(&pj, &pi, &pk, alpha, 0.0).unwrap();
        let t = triple_div(2.0 * alpha / (1.0 + 2.0 * alpha), &pj, &pi, &pk).unwrap();
        worst = worst.max((s.value - t).abs());
    }
    verdict(6, "K at λ=0 equals the three-way divergence", worst <= 1e-6, format!("max |K−D|={worst:.2e}"));
}

#[test]
fn criterion_07_weak_convergence() {
    let w = weak_convergence_check(&b(0.3), 2.0, 10_000, 10_000, 7).unwrap();
    verdict(
        7,
        "2n·GJS against chi-squared(1)",
        w.ks_distance < 0.05 && !w.degenerate,
        format!("KS={:.4}", w.ks_distance),
    );
}

#[test]
fn criterion_08_gradients() {
    let mut rng = seeded_stream(8, 0);
    let mut worst: f64 = 0.0;
    let rel = |num: f64, ana: f64| (num - ana).abs() / ana.abs().max(1e-3);
    for case in 0..20 {
        let k = 3 + case % 3;
        let alpha = rng.random_range(0.3..5.0);
        let (p1, p2) = (random_dist(&mut rng, k), random_dist(&mut rng, k));
        let g = gjs_gradient(&p1, &p2, alpha).unwrap();
        let hess = gjs_hessian(&p1, &p2, alpha).unwrap();
        let (a, c) = (0, 1 + case % (k - 1));
        let shift = |p: &Distribution, h: f64| {
            let mut v = p.probs().to_vec();
            v[a] += h;
            v[c] -= h;
            Distribution::new(v).unwrap()
        };
        let f = |h1: f64, h2: f64| gjs(&shift(&p1, h1), &shift(&p2, h2), alpha).unwrap();
        let h = 1e-5;
        let d1 = (f(h, 0.0) - f(-h, 0.0)) / (2.0 * h);
        let d2 = (f(0.0, h) - f(0.0, -h)) / (2.0 * h);
        let a1 = g.wrt_p1[a].unwrap() - g.wrt_p1[c].unwrap();
        let a2 = g.wrt_p2[a].unwrap() - g.wrt_p2[c].unwrap();
        let hh = 1e-4;
        let s11 = (f(hh, 0.0) - 2.0 * f(0.0, 0.0) + f(-hh, 0.0)) / (hh * hh);
        let s22 = (f(0.0, hh) - 2.0 * f(0.0, 0.0) + f(0.0, -hh)) / (hh * hh);
        let s12 = (f(hh, hh) - f(hh, -hh) - f(-hh, hh) + f(-hh, -hh)) / (4.0 * hh * hh);
        let h11 = hess.d11[a].unwrap() + hess.d11[c].unwrap();
        let h22 = hess.d22[a].unwrap() + hess.d22[c].unwrap();
        let h12 = hess.d12[a].unwrap() + hess.d12[c].unwrap();
        for (num, ana) in [(d1, a1), (d2, a2), (s11, h11), (s22, h22), (s12, h12)] {
            worst = worst.max(rel(num, ana));
        }
    }
    verdict(8, "analytic GJS derivatives", worst <= 1e-5, format!("max relative deviation={worst:.2e}"));
}

#[test]
fn criterion_09_rejection_calibration() {
    let p = [b(0.1), b(0.35), b(0.7)];
    let (alpha, n) = (2.0, 2000);
    let lt = multi_threshold(&p, alpha, n, &[eps(0.2)]).unwrap();
    let r = mc_multi(&p, alpha, n, lt, MultiRule::Unnikrishnan, 100_000, 9).unwrap();
    let corr = slack_terms(n, alpha, 2, 3, &p[0], &p[1]).unwrap().gutman_correction;
    let bound = 10.0 * (-(n as f64) * (lt - corr)).exp();
    let mut ok = true;
    let mut details = vec![format!("λ̃={lt:.5}")];
    for j in 1..=3 {
        let z = r.get(&format!("zeta{j}")).unwrap();
        let e = r.get(&format!("beta{j}")).unwrap();
        ok &= (0.13..=0.27).contains(&z.value());
        ok &= e.value() <= bound + 4.0 * e.stderr;
        details.push(format!("ζ̂{j}={:.4} β̂{j}={:.2e}", z.value(), e.value()));
    }
    verdict(9, "rejection probabilities near target", ok, details.join(", "));
}

#[test]
fn criterion_10_type1_exponential_bound() {
    let mut ok = true;
    let mut details = Vec::new();
    for alpha in [1.0, 2.0] {
        for n in [20u64, 50, 100] {
            for lt in [0.0, 0.05, 0.2] {
                // bound at λ = λ̃ + correction, so the correction is read off the threshold rule
                let corr = lt - threshold_gutman_corrected(lt, n, alpha, 2).unwrap();
                let lambda = lt + corr;
                let bound = (-(n as f64) * lambda).exp();
                let worst = [0.1, 0.2, 0.3, 0.5]
                    .iter()
                    .map(|&q| exact_binary(&b(q), &b(0.5), alpha, n, lt).unwrap().beta1.get())
                    .fold(0.0, f64::max);
                let pass = worst <= bound;
                ok &= pass;
                if !pass {
                    details.push(format!("α={alpha} n={n} λ̃={lt:.4}: β₁={worst:.3e} > {bound:.3e}"));
                }
            }
        }
    }
    if ok {
        details.push("all 18 configurations within bound".into());
    }
    verdict(10, "exact type-I error under the corrected threshold", ok, details.join("; "));
}

#[test]
fn criterion_11_dual_setting_exponent() {
    let (p1, p2) = (b(0.2), b(0.5));
    let target = renyi(2.0 / 3.0, &p1, &p2).unwrap();
    let gap = |n: u64| {
        let lambda = threshold_chi2_dual(n, 2, eps(0.2)).unwrap();
        let r = exact_binary(&p1, &p2, 2.0, n, lambda).unwrap();
        let e = -(r.beta2.get().ln()) / n as f64;
        (e, (e - target).abs() / target)
    };
    let (e100, g100) = gap(100);
    let (e200, g200) = gap(200);
    verdict(
        11,
        "dual-setting type-II exponent",
        g200 <= 0.20 && g200 < g100,
        format!("D_γ={target:.5}, n=100: {e100:.5} ({:.1}%), n=200: {e200:.5} ({:.1}%)", 100.0 * g100, 100.0 * g200),
    );
}
