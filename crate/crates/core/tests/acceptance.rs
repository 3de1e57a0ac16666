//! Acceptance suite: every campaign-level claim at its stated tolerance,
//! one pass/fail line per criterion.
//!
//! Run with `cargo test -p ckw-core --test acceptance -- --nocapture` to see
//! the lines; the test harness itself fails on any violated criterion.

use std::time::Instant;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use ckw_core::campaign::{run_campaign, CampaignConfig, CampaignKind};
use ckw_core::channels::{
    dual_channel_of_state, i2_arrow, i2_arrow_povm_oracle, local_filter, reconstruct_from_dual,
};
use ckw_core::measures::{
    concurrence_two_qubit, tangle_pure_split, tangle_roof_upper, tangle_two_qubit,
};
use ckw_core::monogamy::{
    ckw_residual, lattice_concurrence_bound, mean_field_gap_bound, sigma_max_vs_concurrence,
};
use ckw_core::qlinalg::{ComplexMatrix, DimsVector};
use ckw_core::states::{random_mixed, random_pure, saturating_state, w_state};

fn conclude(number: u32, slug: &str, ok: bool, detail: &str) {
    println!(
        "acceptance criterion {number} ({slug}): {} [{detail}]",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {number} ({slug}) failed: {detail}");
}

fn campaign(kind: CampaignKind, qubits: usize, samples: usize, seed: u64) -> CampaignConfig {
    CampaignConfig { qubits, samples, seed, ..CampaignConfig::new(kind) }
}

#[test]
fn criterion_01_ckw_campaign() {
    let start = Instant::now();
    let mut worst = f64::INFINITY;
    let mut violations = 0;
    for n in 3..=6usize {
        let report =
            run_campaign(&campaign(CampaignKind::Ckw, n, 10_000, 40_000 + n as u64)).unwrap();
        worst = worst.min(report.min_residual);
        violations += report.violations;
    }
    let elapsed = start.elapsed().as_secs_f64();
    let ok = violations == 0 && elapsed < 120.0;
    conclude(
        1,
        "ckw-campaign",
        ok,
        &format!("4x10^4 samples, min residual {worst:.3e}, {elapsed:.1} s"),
    );
}

#[test]
fn criterion_02_central_lemma() {
    let start = Instant::now();
    let report =
        run_campaign(&campaign(CampaignKind::TauLeI2, 2, 10_000, 50_000)).unwrap();
    let elapsed = start.elapsed().as_secs_f64();
    let ok = report.violations == 0 && elapsed < 30.0;
    conclude(
        2,
        "tau-le-i2",
        ok,
        &format!(
            "10^4 rank-stratified samples, min residual {:.3e}, {elapsed:.1} s",
            report.min_residual
        ),
    );
}

#[test]
fn criterion_03_chi2_closed_vs_oracle() {
    let report =
        run_campaign(&campaign(CampaignKind::Chi2Agreement, 1, 100, 60_000)).unwrap();
    // Campaign checks both sides: brute never above closed by more than
    // 1e-9, and two-sided agreement within 1e-6 at the 64^2 grid.
    let ok = report.violations == 0;
    conclude(
        3,
        "chi2-agreement",
        ok,
        &format!("100 channels, closed-brute in [{:.3e}, 1e-6]", report.min_residual),
    );
}

#[test]
fn criterion_04_duality_reconstruction() {
    let mut max_residual = 0.0f64;
    for i in 0..1000u64 {
        let rank = 1 + (i % 4) as usize;
        let rho = random_mixed(4, rank, 70_000 + i).unwrap().with_dims(&[2, 2]).unwrap();
        let (ch, rho_b) = dual_channel_of_state(&rho).unwrap();
        let rebuilt = reconstruct_from_dual(&ch, &rho_b).unwrap();
        max_residual = max_residual.max(rebuilt.matrix().sub(rho.matrix()).frobenius_norm());
    }
    let mut max_gap = 0.0f64;
    let mut lower_bound_ok = true;
    for i in 0..200u64 {
        let rank = 1 + (i % 4) as usize;
        let rho = random_mixed(4, rank, 71_000 + i).unwrap().with_dims(&[2, 2]).unwrap();
        let closed = i2_arrow(&rho).unwrap();
        let oracle = i2_arrow_povm_oracle(&rho, 768, 80).unwrap();
        max_gap = max_gap.max((closed - oracle).abs());
        lower_bound_ok &= oracle <= closed + 1e-9;
    }
    let ok = max_residual <= 1e-8 && max_gap <= 1e-5 && lower_bound_ok;
    conclude(
        4,
        "duality-reconstruction",
        ok,
        &format!("max reconstruction {max_residual:.3e}, max i2 gap {max_gap:.3e}"),
    );
}

#[test]
fn criterion_05_koashi_winter_identity() {
    let dims = DimsVector::new(&[2, 2, 4]).unwrap();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut ok = true;
    for i in 0..200u64 {
        let seed = 80_000 + i;
        let psi = random_pure(&dims, seed).unwrap();
        let identity_value = tangle_pure_split(&psi, 0).unwrap()
            - i2_arrow(&psi.marginal(&[0, 1]).unwrap()).unwrap();
        let roof = tangle_roof_upper(&psi.marginal(&[0, 2]).unwrap(), 20, None, 1e-6, seed)
            .unwrap()
            .value;
        let gap = roof - identity_value;
        lo = lo.min(gap);
        hi = hi.max(gap);
        ok &= roof >= identity_value - 1e-9 && roof <= identity_value + 1e-4;
    }
    conclude(
        5,
        "koashi-winter",
        ok,
        &format!("200 samples, roof - identity in [{lo:.3e}, {hi:.3e}]"),
    );
}

#[test]
fn criterion_06_saturation_suite() {
    let mut ok = true;
    let mut worst: f64 = 0.0;
    for n in 3..=10usize {
        let w = w_state(n).unwrap();
        let expected_pair_tangle = 4.0 / (n * n) as f64;
        for j in 1..n {
            let tau = tangle_two_qubit(&w.marginal(&[0, j]).unwrap()).unwrap();
            ok &= (tau - expected_pair_tangle).abs() <= 1e-12;
        }
        for focus in 0..n {
            let r = ckw_residual(&w, focus).unwrap().residual;
            worst = worst.max(r.abs());
            ok &= r.abs() <= 1e-9;
        }

        // Total system size n: the maximally entangled saturating state has
        // n - 1 partner qubits.
        let sat = saturating_state(n - 1).unwrap();
        let sample = ckw_residual(&sat, 0).unwrap();
        ok &= (sample.lhs - 1.0).abs() <= 1e-12;
        ok &= sample.residual.abs() <= 1e-9;
        worst = worst.max(sample.residual.abs());
        let expected_pair_tangle = 1.0 / (n - 1) as f64;
        for j in 1..n {
            let tau = tangle_two_qubit(&sat.marginal(&[0, j]).unwrap()).unwrap();
            ok &= (tau - expected_pair_tangle).abs() <= 1e-12;
        }
    }
    conclude(6, "saturation-suite", ok, &format!("n in 3..=10, worst |residual| {worst:.3e}"));
}

fn random_invertible_filter(seed: u64) -> ComplexMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let entries: Vec<Complex64> = (0..4)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let m = ComplexMatrix::new(2, 2, entries).unwrap();
        let det = (m.get(0, 0) * m.get(1, 1) - m.get(0, 1) * m.get(1, 0)).norm();
        if det > 0.1 {
            return m;
        }
    }
}

#[test]
fn criterion_07_filtering_covariance() {
    // The dual construction fixes its gauge in the eigenbasis of rho_B, so
    // the filtering-invariant content of L is its left Gram matrix L Lᵀ
    // (equivalently L up to a right rotation); the singular spectrum and
    // the capacity factor lambda_max(LᵀL) follow from it.
    let mut max_gram_dev = 0.0f64;
    let mut max_ratio_dev = 0.0f64;
    let mut ok = true;
    let gram = |l: &[[f64; 3]; 3]| -> [[f64; 3]; 3] {
        let mut g = [[0.0; 3]; 3];
        for i in 0..3 {
            for j in 0..3 {
                g[i][j] = (0..3).map(|k| l[i][k] * l[j][k]).sum();
            }
        }
        g
    };
    for i in 0..500u64 {
        let rank = 1 + (i % 4) as usize;
        let rho = random_mixed(4, rank, 90_000 + i).unwrap().with_dims(&[2, 2]).unwrap();
        let filter = random_invertible_filter(91_000 + i);
        let (filtered, _) = local_filter(&rho, &filter).unwrap();

        let (ch_before, _) = dual_channel_of_state(&rho).unwrap();
        let (ch_after, _) = dual_channel_of_state(&filtered).unwrap();
        let ga = gram(ch_before.bloch_linear());
        let gb = gram(ch_after.bloch_linear());
        let mut dev = 0.0f64;
        for r in 0..3 {
            for c in 0..3 {
                dev = dev.max((ga[r][c] - gb[r][c]).abs());
            }
        }
        max_gram_dev = max_gram_dev.max(dev);
        ok &= dev <= 1e-8;

        let tau = tangle_two_qubit(&rho).unwrap();
        if tau > 1e-6 {
            let tau_ratio = tangle_two_qubit(&filtered).unwrap() / tau;
            let i2_ratio = i2_arrow(&filtered).unwrap() / i2_arrow(&rho).unwrap();
            let dev = (tau_ratio - i2_ratio).abs() / tau_ratio.max(1.0);
            max_ratio_dev = max_ratio_dev.max(dev);
            ok &= dev <= 1e-8;
        }
    }
    conclude(
        7,
        "filtering-covariance",
        ok,
        &format!("500 filters, max LLᵀ dev {max_gram_dev:.3e}, max ratio dev {max_ratio_dev:.3e}"),
    );
}

#[test]
fn criterion_08_sigma_max_lemma() {
    let mut worst = f64::INFINITY;
    let mut ok = true;
    for i in 0..1000u64 {
        let rho = random_mixed(4, 4, 95_000 + i).unwrap().with_dims(&[2, 2]).unwrap();
        let sample = sigma_max_vs_concurrence(&rho).unwrap();
        worst = worst.min(sample.residual);
        ok &= sample.residual >= -1e-9;
    }
    conclude(8, "sigma-max-lemma", ok, &format!("10^3 states, min residual {worst:.3e}"));
}

#[test]
fn criterion_09_roof_vs_wootters() {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut ok = true;
    for i in 0..200u64 {
        let rank = 1 + (i % 4) as usize;
        let rho = random_mixed(4, rank, 97_000 + i).unwrap().with_dims(&[2, 2]).unwrap();
        let exact = tangle_two_qubit(&rho).unwrap();
        let roof = tangle_roof_upper(&rho, 20, None, 1e-6, 98_000 + i).unwrap().value;
        let gap = roof - exact;
        lo = lo.min(gap);
        hi = hi.max(gap);
        ok &= gap >= -1e-9 && gap <= 1e-4;
    }
    conclude(9, "roof-vs-wootters", ok, &format!("200 states, gap in [{lo:.3e}, {hi:.3e}]"));
}

#[test]
fn criterion_10_lattice_corollary() {
    let sqrt2 = 2.0f64.sqrt();
    // (d, m, expected bound) table checked against hand arithmetic.
    let table = [
        (1usize, 0.0f64, 1.0f64),
        (4, 0.0, 0.5),
        (9, 0.0, 1.0 / 3.0),
        (9, 0.5, 0.25),
        (2, 0.3, 0.91 / sqrt2),
        (16, 1.0, 0.0),
        (16, -1.0, 0.0),
        (1, 0.5, 0.75),
    ];
    let mut ok = true;
    for (d, m, want) in table {
        let bound = lattice_concurrence_bound(d, m).unwrap();
        let gap = mean_field_gap_bound(d, m).unwrap();
        ok &= (bound - want).abs() < 1e-15;
        ok &= bound == 2.0 * gap;
    }
    // Bound = 2 x gap over a denser grid.
    for d in 1..=20usize {
        for k in 0..=10 {
            let m = -1.0 + 0.2 * k as f64;
            ok &= lattice_concurrence_bound(d, m).unwrap()
                == 2.0 * mean_field_gap_bound(d, m).unwrap();
        }
    }
    conclude(10, "lattice-corollary", ok, "table matches hand arithmetic, bound = 2 x gap");
}
