mod common;

use common::*;
use proptest::prelude::*;
use wmc::eval::band_to_band_search;
use wmc::inband_shift::apply_inband_shift;
use wmc::motion::{
    block_cost, compensate, full_search, full_search_detailed, residual, MotionVector, SearchParams,
};
use wmc::wavelet::{analyze_level, SubbandSet};

fn pair(seed: u64, sx: i64, sy: i64, h: u32) -> (SubbandSet, SubbandSet) {
    let r = smooth_texture(64, 64, seed);
    let t = oracle_frame(&r, sx, sy, h);
    (analyze_level(&r).unwrap(), analyze_level(&t).unwrap())
}

fn block_energy(b: &SubbandSet, blk: &wmc::motion::Block) -> f64 {
    let zero = SubbandSet::zeros(b.dims().0, b.dims().1);
    b.planes()
        .iter()
        .zip(zero.planes())
        .map(|(p, z)| p.region_sse(z, blk.x, blk.y, blk.width, blk.height))
        .sum()
}

#[test]
fn recovers_quarter_pel_global_motion() {
    let (r, t) = pair(11, 5, -3, 2);
    let params = SearchParams {
        search_range: 15,
        precision: 2,
        block_size: 8,
    };
    let out = full_search_detailed(&r, &t, &params).unwrap();
    assert_eq!(out.candidates_per_block, 121 * 121);
    let exact = out
        .field
        .vectors
        .iter()
        .filter(|v| **v == MotionVector::new(5, -3))
        .count();
    assert_eq!(exact, out.field.vectors.len());
    let pred = compensate(&r, &out.field).unwrap();
    let res = residual(&t, &pred).unwrap();
    assert!(res.energy() <= 1e-6 * t.energy());
}

#[test]
fn reported_costs_match_block_cost() {
    let (r, t) = pair(12, 3, 2, 1);
    let params = SearchParams {
        search_range: 3,
        precision: 1,
        block_size: 8,
    };
    let out = full_search_detailed(&r, &t, &params).unwrap();
    for (blk, (v, c)) in out
        .field
        .blocks()
        .iter()
        .zip(out.field.vectors.iter().zip(&out.costs))
    {
        let direct = block_cost(&r, &t, blk, *v, 1).unwrap();
        assert!((direct - c).abs() <= 1e-9 * (1.0 + c.abs()));
    }
}

#[test]
fn search_is_deterministic() {
    let r = analyze_level(&random_frame(48, 32, 5)).unwrap();
    let t = analyze_level(&random_frame(48, 32, 6)).unwrap();
    let params = SearchParams {
        search_range: 4,
        precision: 2,
        block_size: 4,
    };
    let a = full_search(&r, &t, &params).unwrap();
    for _ in 0..3 {
        assert_eq!(full_search(&r, &t, &params).unwrap(), a);
    }
}

#[test]
fn ties_prefer_the_shortest_vector() {
    let flat = analyze_level(&wmc::Plane::filled(32, 32, 9.0)).unwrap();
    let params = SearchParams {
        search_range: 2,
        precision: 1,
        block_size: 4,
    };
    let field = full_search(&flat, &flat, &params).unwrap();
    assert!(field.vectors.iter().all(|v| *v == MotionVector::ZERO));
}

#[test]
fn compensation_copies_each_block_from_its_shift() {
    let (r, t) = pair(13, -2, 3, 1);
    let params = SearchParams {
        search_range: 2,
        precision: 1,
        block_size: 8,
    };
    let field = full_search(&r, &t, &params).unwrap();
    let pred = compensate(&r, &field).unwrap();
    for (blk, v) in field.blocks().iter().zip(&field.vectors) {
        let shifted = apply_inband_shift(&r, &v.to_spec(1)).unwrap();
        assert_eq!(
            block_energy(&pred.linear_combination(1.0, &shifted, -1.0).unwrap(), blk),
            0.0
        );
    }
}

#[test]
fn wrong_field_geometry_is_rejected() {
    let (r, _) = pair(1, 0, 0, 0);
    let field = wmc::motion::MotionField::zeros((16, 16), 8, 2);
    assert!(compensate(&r, &field).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn winner_beats_every_candidate(seed in any::<u64>(), h in 0u32..=2) {
        let r = analyze_level(&random_frame(16, 16, seed)).unwrap();
        let t = analyze_level(&random_frame(16, 16, seed ^ 1)).unwrap();
        let params = SearchParams { search_range: 1, precision: h, block_size: 4 };
        let out = full_search_detailed(&r, &t, &params).unwrap();
        for (blk, c) in out.field.blocks().iter().zip(&out.costs) {
            for cand in params.candidates() {
                prop_assert!(*c <= block_cost(&r, &t, blk, cand, h).unwrap());
            }
        }
    }

    #[test]
    fn inband_residual_never_exceeds_band_to_band(seed in any::<u64>(), sx in -8i64..=8, sy in -8i64..=8) {
        let (r, t) = pair(seed, sx, sy, 2);
        let params = SearchParams { search_range: 4, precision: 2, block_size: 8 };
        let ours = full_search(&r, &t, &params).unwrap();
        let base = band_to_band_search(&r, &t, &params).unwrap();
        let e_ours = residual(&t, &compensate(&r, &ours).unwrap()).unwrap();
        let e_base = residual(&t, &compensate(&r, &base).unwrap()).unwrap();
        for blk in ours.blocks() {
            prop_assert!(block_energy(&e_ours, &blk) <= block_energy(&e_base, &blk) * (1.0 + 1e-12) + 1e-9);
        }
    }
}

#[test]
fn matched_oracle_pair_predicts_target() {
    let (r, t) = pair(14, 5, -3, 2);
    let params = SearchParams {
        search_range: 2,
        precision: 2,
        block_size: 8,
    };
    let field = full_search(&r, &t, &params).unwrap();
    let pred = compensate(&r, &field).unwrap();
    assert!(pred.max_abs_diff(&t) <= 1e-8);
    assert!(residual(&t, &pred).unwrap().energy() <= 1e-12 * t.energy());
}

#[test]
fn even_oracle_shift_costs_nothing() {
    let r = random_frame(32, 32, 15);
    let (rb, tb) = (
        analyze_level(&r).unwrap(),
        analyze_level(&oracle_frame(&r, 2, 0, 0)).unwrap(),
    );
    let blk = wmc::motion::Block {
        x: 4,
        y: 4,
        width: 8,
        height: 8,
    };
    let c = block_cost(&rb, &tb, &blk, MotionVector::new(2, 0), 0).unwrap();
    assert!(c <= 1e-16 * 4.0 * 64.0);
    let zero = SubbandSet::zeros(16, 16);
    let e = block_cost(&zero, &tb, &blk, MotionVector::new(1, -1), 0).unwrap();
    assert!((e - block_energy(&tb, &blk)).abs() < 1e-9);
}

#[test]
fn single_block_compensation_is_the_global_shift() {
    let r = analyze_level(&random_frame(16, 16, 16)).unwrap();
    let mut field = wmc::motion::MotionField::zeros((8, 8), 8, 0);
    field.vectors[0] = MotionVector::new(2, 0);
    let whole = apply_inband_shift(&r, &MotionVector::new(2, 0).to_spec(0)).unwrap();
    assert_eq!(compensate(&r, &field).unwrap(), whole);
}

#[test]
fn window_arithmetic() {
    let r = analyze_level(&random_frame(16, 16, 17)).unwrap();
    let params = SearchParams {
        search_range: 1,
        precision: 0,
        block_size: 4,
    };
    assert_eq!(
        full_search_detailed(&r, &r, &params)
            .unwrap()
            .candidates_per_block,
        9
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn compensation_never_loses_to_zero_motion(seed in any::<u64>(), h in 0u32..=2) {
        let r = analyze_level(&random_frame(32, 16, seed)).unwrap();
        let t = analyze_level(&random_frame(32, 16, seed ^ 9)).unwrap();
        let params = SearchParams { search_range: 2, precision: h, block_size: 8 };
        let field = full_search(&r, &t, &params).unwrap();
        prop_assert!(t.sse(&compensate(&r, &field).unwrap()) <= t.sse(&r) * (1.0 + 1e-12));
    }
}
