//! Acceptance suite: one test per criterion, each printing a single
//! `criterion N: PASS|FAIL ...` line. Run with `--nocapture` to see them.

use kamrot_core::arithmetic::{continued_fraction_digits, diophantine_witness, DiophParams};
use kamrot_core::cocycle::conjugate_at_band;
use kamrot_core::fourier::{group_map_sobolev_norm, Grid};
use kamrot_core::kam::{run_scheme, solve_homological, SchemeParams};
use kamrot_core::rotation::{
    classify_arithmetic, conjugation_probe, equivalence_check, equivalence_witness,
    finite_resonance_audit, invariance_probe, rotation_vector, ArithmeticClass,
};
use kamrot_core::{
    AlgebraMap, ChainFactor, Cocycle, ConjugationChain, Frequency, RotationVector, TorusElement,
    TorusMorphism,
};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C1_REPRESENTATIVE_TOL: f64 = 1e-6;
const C1_HORIZON: u64 = 10;
const C2_RESIDUAL: f64 = 1e-10;
const C3_TARGET: f64 = 1e-12;
const C3_MAX_STEPS: usize = 6;
const C3_EXPONENT: f64 = 1.4;
const C5_GAP: f64 = 1e-6;
const C5_SHIFT_TOL: f64 = 1e-8;
const C6_RATIO: f64 = 4.0;
const C7_HORIZON: u64 = 10_000;
const C8_HORIZON: u64 = 10_000;

fn sci(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.3e}")).collect();
    format!("[{}]", parts.join(", "))
}

fn report(n: u32, pass: bool, detail: String) {
    println!(
        "criterion {n}: {} {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
}

/// Seeded real trigonometric polynomial with zero mean and `|.|_0 = amp`.
fn zero_mean_map(band: usize, amp: f64, seed: u64) -> AlgebraMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = AlgebraMap::zeros(1, band);
    for k in 1..=band as i64 {
        let c = [0; 3].map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        m.set_mode(&[k], c).unwrap();
    }
    let n = m.sobolev_norm(0.0);
    m.scale(amp / n)
}

fn full_map(band: usize, amp: f64, seed: u64) -> AlgebraMap {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut m = AlgebraMap::zeros(1, band);
    for k in 0..=band as i64 {
        let c = [0; 3].map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        m.set_mode(&[k], c).unwrap();
    }
    let n = m.sobolev_norm(0.0);
    m.scale(amp / n)
}

/// `Conj_H (alpha, exp(theta e) e^{P})` with `H = winding-3 morphism after exp(Y)`.
fn criterion_one_instance() -> Cocycle {
    let alpha = Frequency::golden();
    let y = zero_mean_map(4, 1e-3, 101);
    let p = zero_mean_map(4, 1e-4, 202);
    let base = Cocycle::new(alpha, TorusElement::new(0.17).exp(), p).unwrap();
    let chain = ConjugationChain::from_factors(vec![
        ChainFactor::Exp { map: y },
        ChainFactor::Torus {
            morphism: TorusMorphism::new(vec![3]),
        },
    ]);
    conjugate_at_band(&chain, &base, 48).unwrap()
}

#[test]
fn criterion_1_rotation_vector_recovery() {
    let phi = criterion_one_instance();
    let alpha = phi.alpha.clone();
    let params = SchemeParams::default();
    let nf = run_scheme(&phi, &params).expect("scheme converges");
    let r = rotation_vector(&nf).expect("rotation vector resolved");
    let truth = RotationVector::from_representative(alpha.clone(), 0.17 + 3.0 * alpha.components()[0]);
    let w = equivalence_witness(&r, &truth, C1_HORIZON, C1_REPRESENTATIVE_TOL).unwrap();
    let pass = nf.converged && w.is_some();
    report(
        1,
        pass,
        format!(
            "steps={} representative={:.12} witness={:?}",
            nf.steps, r.representative, w
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_2_homological_residual() {
    let alpha = Frequency::golden();
    let theta = TorusElement::new(0.3);
    let mut worst: f64 = 0.0;
    for seed in 0..100 {
        let rhs = full_map(32, 1.0, 1000 + seed);
        let s = solve_homological(&theta, &rhs, &alpha, 32, 4.0).unwrap();
        worst = worst.max(s.residual);
    }
    let pass = worst < C2_RESIDUAL;
    report(2, pass, format!("worst residual over 100 seeds = {worst:e}"));
    assert!(pass);
}

#[test]
fn criterion_3_kam_contraction() {
    let alpha = Frequency::golden();
    let f = zero_mean_map(3, 1e-4, 303);
    let phi = Cocycle::new(alpha, TorusElement::new(0.3).exp(), f).unwrap();
    let nf = run_scheme(&phi, &SchemeParams::default()).unwrap();
    let mut norms = vec![phi.perturbation.sobolev_norm(0.0)];
    norms.extend(nf.diagnostics.iter().map(|d| d.f_norm_0));
    let contracts = norms
        .windows(2)
        .all(|w| w[1] <= w[0].powf(C3_EXPONENT));
    let reached = *norms.last().unwrap() < C3_TARGET && nf.steps <= C3_MAX_STEPS;
    let pass = contracts && reached && nf.ledger.is_empty();
    report(3, pass, format!("steps={} norms={}", nf.steps, sci(&norms)));
    assert!(pass);
}

#[test]
fn criterion_4_resonance_ledger() {
    let alpha = Frequency::golden();
    let params = SchemeParams::default();
    let n0 = params.n0 as f64;
    let mut failures = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(4000 + seed);
        let mut k0 = 0i64;
        while k0 == 0 {
            k0 = rng.gen_range(-(params.n0 as i64)..=params.n0 as i64);
        }
        let delta = rng.gen_range(-0.5..0.5) * n0.powf(-params.nu);
        let y = zero_mean_map(3, 1e-4, 5000 + seed);
        let chain = ConjugationChain::from_factors(vec![
            ChainFactor::Exp { map: y },
            ChainFactor::Torus {
                morphism: TorusMorphism::new(vec![k0]),
            },
        ]);
        let base = Cocycle::constant(alpha.clone(), TorusElement::new(delta).exp());
        let phi = conjugate_at_band(&chain, &base, 48).unwrap();
        // Diagonalisation returns the angle in [0, 1]; a planted angle in
        // (1, 2) mod 2 is seen through the Weyl reflection.
        let planted = (delta + alpha.dot(&[k0])).rem_euclid(2.0);
        let expected = if planted <= 1.0 { k0 } else { -k0 };
        let nf = match run_scheme(&phi, &params) {
            Ok(nf) => nf,
            Err(e) => {
                failures.push(format!("seed {seed}: {e}"));
                continue;
            }
        };
        let ok_k = nf.ledger.len() == 1 && nf.ledger[0].k == vec![expected];
        let ok_bounds = nf.ledger.iter().all(|s| {
            s.defect_after < (s.scale as f64).powf(-params.nu)
                && s.k.iter().all(|v| v.unsigned_abs() <= s.scale)
        });
        if !(ok_k && ok_bounds) {
            failures.push(format!(
                "seed {seed}: planted {k0} (expected {expected}), ledger {:?}",
                nf.ledger.iter().map(|s| (s.k.clone(), s.defect_after, s.scale)).collect::<Vec<_>>()
            ));
        }
    }
    let pass = failures.is_empty();
    report(4, pass, format!("20 constructions, failures: {failures:?}"));
    assert!(pass);
}

#[test]
fn criterion_5_invariance() {
    let alpha = Frequency::golden();
    let params = SchemeParams::default();
    let p = zero_mean_map(4, 1e-4, 505);
    let phi = Cocycle::new(alpha.clone(), TorusElement::new(0.17).exp(), p).unwrap();
    let mut worst: f64 = 0.0;
    let mut all_equivalent = true;
    for seed in 0..10 {
        let b = full_map(4, 1e-3, 600 + seed);
        let rep = invariance_probe(&phi, &b, &params, 5).unwrap();
        worst = worst.max(rep.representative_gap);
        all_equivalent &= rep.equivalent;
    }
    let k = 1i64;
    let chain = ConjugationChain::from_factors(vec![ChainFactor::Torus {
        morphism: TorusMorphism::new(vec![k]),
    }]);
    let wind = conjugation_probe(&phi, &chain, &params, 5).unwrap();
    let shift = wind.conjugated.representative - wind.original.representative;
    let shift_err = (shift - alpha.dot(&[k])).abs();
    let pass = worst < C5_GAP && all_equivalent && wind.equivalent && shift_err < C5_SHIFT_TOL;
    report(
        5,
        pass,
        format!(
            "worst gap over 10 b = {worst:e}; winding {k}: equivalent={} shift error={shift_err:e}",
            wind.equivalent
        ),
    );
    assert!(pass);
}

#[test]
fn criterion_6_negative_sobolev_dichotomy() {
    let windings = [8i64, 64, 512];
    let chain = ConjugationChain::from_factors(
        windings
            .iter()
            .map(|&k| ChainFactor::Torus {
                morphism: TorusMorphism::new(vec![k]),
            })
            .collect(),
    );
    let grid = Grid::double_cover(1, 4096);
    let neg = chain.sobolev_partial(-4.0, &grid).unwrap();
    let zero = chain.sobolev_partial(0.0, &grid).unwrap();
    let gaps: Vec<f64> = neg.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    let cauchy = gaps.windows(2).all(|g| g[1] * C6_RATIO <= g[0]);
    let diverges = zero.windows(2).all(|w| w[1] >= C6_RATIO * w[0]);
    // Supplementary: positive regularity does grow along the prefixes.
    let h1: Vec<f64> = (1..=windings.len())
        .map(|j| {
            let prefix = ConjugationChain::from_factors(chain.factors[..j].to_vec());
            let vals = prefix.evaluate_grid(&grid, None).unwrap();
            group_map_sobolev_norm(&vals, &grid, 1.0).unwrap()
        })
        .collect();
    let pass = cauchy && diverges;
    report(
        6,
        pass,
        format!(
            "H^-4 prefixes {} gaps {} (cauchy={cauchy}); \
             H^0 prefixes {} (growth x4 each stage={diverges}); H^1 prefixes {}",
            sci(&neg),
            sci(&gaps),
            sci(&zero),
            sci(&h1)
        ),
    );
    assert!(pass);
}

/// Independent oracle: direct loop over `1 <= k <= K`.
fn scan_witness(a: f64, gamma: f64, tau: f64, horizon: u64) -> Option<i64> {
    (1..=horizon as i64).find(|&k| {
        let x = k as f64 * a;
        (x - x.round()).abs() < 1.0 / (gamma * (k as f64).powf(tau))
    })
}

#[test]
fn criterion_7_arithmetic_oracles() {
    let mut rng = ChaCha8Rng::seed_from_u64(707);
    let mut mismatches = Vec::new();
    let mut found = 0;
    for _ in 0..10 {
        let a: f64 = rng.gen_range(0.0..1.0);
        let gamma: f64 = rng.gen_range(0.5..5.0);
        let p = DiophParams::new(gamma, 2.0, C7_HORIZON).unwrap();
        let ours = diophantine_witness(&Frequency::new(vec![a]).unwrap(), &p)
            .unwrap()
            .map(|w| w.k[0]);
        let oracle = scan_witness(a, gamma, 2.0, C7_HORIZON);
        found += ours.is_some() as usize;
        if ours != oracle {
            mismatches.push((a, gamma, ours, oracle));
        }
    }
    let digits = continued_fraction_digits(2f64.sqrt() - 1.0, 10).unwrap();
    let digits_ok = digits.len() == 10 && digits.iter().all(|&d| d == 2);
    let pass = mismatches.is_empty() && digits_ok;
    report(
        7,
        pass,
        format!("witness mismatches {mismatches:?} ({found}/10 with witness); sqrt2-1 digits {digits:?}"),
    );
    assert!(pass);
}

#[test]
fn criterion_8_reducibility_prediction() {
    let params = SchemeParams::default();
    let dioph = DiophParams::new(3.0, 2.0, C8_HORIZON).unwrap();

    let phi = criterion_one_instance();
    let nf = run_scheme(&phi, &params).unwrap();
    let r = rotation_vector(&nf).unwrap();
    let class = classify_arithmetic(&r, &dioph).unwrap();
    let audit = finite_resonance_audit(&nf, &r, &dioph).unwrap();
    let first = class.classification == ArithmeticClass::DiophantineWrtAlpha
        && audit.resonances_ceased
        && audit.consistent;

    let alpha = Frequency::golden();
    let theta = alpha.dot(&[5]).rem_euclid(1.0);
    let y = zero_mean_map(3, 1e-4, 808);
    let chain = ConjugationChain::from_factors(vec![ChainFactor::Exp { map: y }]);
    let base = Cocycle::constant(alpha.clone(), TorusElement::new(theta).exp());
    let planted = conjugate_at_band(&chain, &base, 48).unwrap();
    let nf2 = run_scheme(&planted, &params).unwrap();
    let r2 = rotation_vector(&nf2).unwrap();
    let lattice = [0.0, 1.0]
        .iter()
        .any(|&c| equivalence_check(&r2, &RotationVector::from_representative(alpha.clone(), c), 10).unwrap());
    let class2 = classify_arithmetic(&r2, &dioph).unwrap();
    let second = nf2.ledger.len() == 1
        && nf2.ledger[0].k == vec![5]
        && lattice
        && class2.classification == ArithmeticClass::ResonantWrtAlpha;

    let pass = first && second;
    report(
        8,
        pass,
        format!(
            "criterion-1 instance: {:?}, resonances ceased={} consistent={}; \
             planted 5*alpha: removals={:?} final angle={:.3e} lattice={lattice} class={:?}",
            class.classification,
            audit.resonances_ceased,
            audit.consistent,
            nf2.ledger.iter().map(|s| s.k.clone()).collect::<Vec<_>>(),
            nf2.final_theta,
            class2.classification
        ),
    );
    assert!(pass);
}
