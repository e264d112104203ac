mod common;

use common::*;
use proptest::prelude::*;
use varpriv::estimators::fit_ridge;
use varpriv::smc::{
    ac_commodity, ac_commodity_with, ac_two_party, karr_multiply, nlie_counts, nlie_optimal_g,
    sum_inverse, CommodityMaterial, CommodityOptions, TwoPartyOptions,
};
use varpriv::{Matrix, Party};

#[test]
fn two_party_identity() {
    let run = ac_two_party(
        &Matrix::identity(2, 2),
        &Matrix::identity(2, 2),
        &TwoPartyOptions::default(),
        0,
    )
    .unwrap();
    assert!((run.shares.sum() - Matrix::identity(2, 2)).amax() < 1e-10);
}

#[test]
fn two_party_random_4x6x3() {
    let mut r = rng(1);
    let a = normal_matrix(4, 6, &mut r);
    let c = normal_matrix(6, 3, &mut r);
    let run = ac_two_party(&a, &c, &TwoPartyOptions::default(), 9).unwrap();
    assert!((run.shares.sum() - &a * &c).amax() < 1e-10);
}

#[test]
fn two_party_value_count_on_lag_blocks() {
    let (t, p) = (20, 3);
    let mut r = rng(2);
    let s1: Vec<f64> = normal_matrix(t + p, 1, &mut r).iter().copied().collect();
    let s2: Vec<f64> = normal_matrix(t + p, 1, &mut r).iter().copied().collect();
    let a = hankel_block(&s1, t, p).transpose();
    let c = hankel_block(&s2, t, p);
    let run = ac_two_party(&a, &c, &TwoPartyOptions::default(), 3).unwrap();
    assert_eq!(run.transcript.values_sent_by(Party::Owner(0)), p * t / 2);
    assert_eq!(run.transcript.values_sent_by(Party::Owner(1)), p * t / 2);
}

#[test]
fn odd_inner_dimension_rejected() {
    let mut r = rng(3);
    let a = normal_matrix(2, 5, &mut r);
    let c = normal_matrix(5, 2, &mut r);
    assert!(ac_two_party(&a, &c, &TwoPartyOptions::default(), 0).is_err());
}

#[test]
fn commodity_null_masking() {
    let mut r = rng(4);
    let a = normal_matrix(3, 4, &mut r);
    let c = normal_matrix(4, 2, &mut r);
    let run = ac_commodity_with(
        &a,
        &c,
        &CommodityMaterial::zeros(3, 4, 2),
        Matrix::zeros(3, 2),
        &CommodityOptions::default(),
    )
    .unwrap();
    assert!((run.shares.v_a - &a * &c).amax() < 1e-14);
}

#[test]
fn commodity_random_instance() {
    let mut r = rng(5);
    let a = normal_matrix(5, 7, &mut r);
    let c = normal_matrix(7, 3, &mut r);
    let run = ac_commodity(&a, &c, &CommodityOptions::default(), 5).unwrap();
    assert!((run.shares.sum() - &a * &c).amax() < 1e-10);
}

#[test]
fn commodity_masked_input_decorrelates() {
    // correlation between an entry of A and the transmitted A + R_a over seeds
    let mut r = rng(6);
    let opts = CommodityOptions {
        mask_scale: 50.0,
        ..CommodityOptions::default()
    };
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for seed in 0..2_000 {
        let a = normal_matrix(1, 2, &mut r);
        let c = normal_matrix(2, 1, &mut r);
        let run = ac_commodity(&a, &c, &opts, seed).unwrap();
        let sent = run
            .transcript
            .find(Party::Owner(0), "A+R_a")
            .unwrap()
            .matrix()
            .unwrap();
        xs.push(a[(0, 0)]);
        ys.push(sent[(0, 0)]);
    }
    let corr = correlation(&xs, &ys);
    assert!(corr.abs() < 0.08, "correlation {corr}");
}

fn correlation(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let cov: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

#[test]
fn inverse_examples() {
    let run = sum_inverse(
        &Matrix::identity(4, 4),
        &Matrix::zeros(4, 4),
        &TwoPartyOptions::default(),
        0,
    )
    .unwrap();
    assert!((run.shares.sum() - Matrix::identity(4, 4)).amax() < 1e-8);

    let mut r = rng(7);
    let g1 = normal_matrix(6, 6, &mut r);
    let g2 = normal_matrix(6, 6, &mut r);
    let a = &g1 * g1.transpose() + Matrix::identity(6, 6);
    let c = &g2 * g2.transpose() + Matrix::identity(6, 6);
    let run = sum_inverse(&a, &c, &TwoPartyOptions::default(), 1).unwrap();
    assert!((run.shares.sum() - (&a + &c).try_inverse().unwrap()).amax() < 1e-8);
}

#[test]
fn inverse_composes_into_ridge() {
    // records split between two owners: Z^T Z + lambda I = (Z1^T Z1 + lambda I) + Z2^T Z2
    let mut r = rng(8);
    let z = normal_matrix(60, 4, &mut r);
    let y = normal_matrix(60, 1, &mut r);
    let lambda = 0.3;
    let (z1, z2) = (z.rows(0, 25).into_owned(), z.rows(25, 35).into_owned());
    let a = z1.transpose() * &z1 + Matrix::identity(4, 4) * lambda;
    let c = z2.transpose() * &z2;
    let inv = sum_inverse(&a, &c, &TwoPartyOptions::default(), 2)
        .unwrap()
        .shares
        .sum();
    let beta = inv * (z.transpose() * &y);
    assert!((beta - fit_ridge(&z, &y, lambda).unwrap()).amax() < 1e-8);
}

#[test]
fn karr_examples() {
    let mut r = rng(9);
    let a = normal_matrix(100, 5, &mut r);
    let c = normal_matrix(100, 5, &mut r);
    let run = karr_multiply(&a, &c, 50, 1).unwrap();
    assert!((run.w.transpose() * &a).amax() < 1e-10);
    assert!((&run.product - a.transpose() * &c).amax() < 1e-10);
    let sent = run
        .transcript
        .find(Party::Owner(1), "(I-WW^T)C")
        .unwrap()
        .matrix()
        .unwrap();
    assert!((sent - &c).amax() > 1e-3);
    assert_eq!(run.projected_rank, 5);

    let clear = karr_multiply(&a, &c, 0, 1).unwrap();
    assert!(clear.clear_text);
    assert_eq!(clear.w.ncols(), 0);
    assert!(karr_multiply(&a, &c, 96, 1).is_err());
}

#[test]
fn nlie_examples() {
    let b = nlie_optimal_g(100, 5, 5).unwrap();
    assert_eq!(b.g_star, 50.0);
    assert_eq!(nlie_counts(100, 5, 5, 50), (275, 275));
    for m in [10u64, 11, 64, 99] {
        for k in 1..5 {
            assert_eq!(nlie_optimal_g(m, k, k).unwrap().g_star, m as f64 / 2.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn two_party_share_sum(m in 1usize..8, half in 1usize..6, k in 1usize..8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = normal_matrix(m, 2 * half, &mut r);
        let c = normal_matrix(2 * half, k, &mut r);
        let run = ac_two_party(&a, &c, &TwoPartyOptions::default(), seed).unwrap();
        prop_assert!((run.shares.sum() - &a * &c).amax() < 1e-10);
    }

    #[test]
    fn commodity_share_sum(m in 1usize..8, s in 1usize..10, k in 1usize..8, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = normal_matrix(m, s, &mut r);
        let c = normal_matrix(s, k, &mut r);
        let run = ac_commodity(&a, &c, &CommodityOptions::default(), seed).unwrap();
        prop_assert!((run.shares.sum() - &a * &c).amax() < 1e-10);
    }

    #[test]
    fn karr_exact(m in 10usize..60, k in 1usize..5, s in 1usize..5, gfrac in 0.0f64..1.0, seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = normal_matrix(m, k, &mut r);
        let c = normal_matrix(m, s, &mut r);
        let g = ((m - k) as f64 * gfrac) as usize;
        let run = karr_multiply(&a, &c, g, seed).unwrap();
        prop_assert!((run.w.transpose() * &a).amax() < 1e-10);
        prop_assert!((run.product - a.transpose() * &c).amax() < 1e-10);
    }

    #[test]
    fn nlie_balanced_at_g_star(m in 2u64..500, k in 1u64..30, s in 1u64..30) {
        let b = nlie_optimal_g(m, k, s).unwrap();
        prop_assert_eq!(b.scaled_owner1, b.scaled_owner2);
        if b.is_integral() {
            let (n1, n2) = nlie_counts(m, k, s, b.g_numerator / b.g_denominator);
            prop_assert_eq!(n1, n2);
        }
    }

    #[test]
    fn transcript_replay(seed in any::<u64>()) {
        // every transmitted matrix is logged once and parses back from its record
        let mut r = rng(seed);
        let a = normal_matrix(3, 4, &mut r);
        let c = normal_matrix(4, 2, &mut r);
        let run = ac_two_party(&a, &c, &TwoPartyOptions::default(), seed).unwrap();
        let mut buf = Vec::new();
        run.transcript.write_jsonl(&mut buf).unwrap();
        let back = varpriv::ProtocolTranscript::read_jsonl(buf.as_slice()).unwrap();
        prop_assert_eq!(back.entries(), run.transcript.entries());
        prop_assert_eq!(run.transcript.len(), 2);
    }
}
