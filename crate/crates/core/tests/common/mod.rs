#![allow(dead_code)]

use std::collections::BTreeMap;

use modal_hedge::worlds::{build_forced_march, SoritesSeries};
use modal_hedge::{Action, Agent, GameConfig, PayoffMatrix, Player, World, WorldSet};
use proptest::prelude::*;

/// Forced marches with `n ≤ 50` states and 2–5 agents.
pub fn forced_march() -> impl Strategy<Value = SoritesSeries> {
    (3usize..=50, 2usize..=5)
        .prop_flat_map(|(n, k)| (Just(n), prop::collection::vec(2usize..=n, k)))
        .prop_map(|(n, flips)| {
            build_forced_march(
                n,
                flips
                    .into_iter()
                    .enumerate()
                    .map(|(i, f)| (Agent::new(format!("a{i}")), f)),
            )
            .expect("generated flips are in range")
        })
}

pub fn unit_open() -> impl Strategy<Value = f64> {
    (1u32..10_000).prop_map(|k| f64::from(k) / 10_000.0)
}

pub fn unit_half_open() -> impl Strategy<Value = f64> {
    (0u32..10_000).prop_map(|k| f64::from(k) / 10_000.0)
}

pub fn payoffs() -> impl Strategy<Value = PayoffMatrix<f64>> {
    prop::array::uniform8(0.0f64..5.0).prop_map(|v| {
        let mut m = PayoffMatrix::coordination();
        let mut i = 0;
        for player in [Player::Speaker, Player::Listener] {
            for own in [Action::A, Action::B] {
                for other in [Action::A, Action::B] {
                    m.set(player, own, other, v[i]);
                    i += 1;
                }
            }
        }
        m
    })
}

pub fn config() -> impl Strategy<Value = GameConfig<f64>> {
    (
        unit_open(),
        unit_half_open(),
        unit_open(),
        0.0f64..0.49,
        payoffs(),
    )
        .prop_map(|(d, g, tau, eps, pay)| {
            GameConfig::build(d, g, tau, eps, pay).expect("valid config")
        })
}

/// Subset of `w1..w{n}` selected by the low bits of `mask`.
pub fn mask_set(mask: u32, n: usize) -> WorldSet {
    (0..n).filter(|i| mask & (1 << i) != 0).map(World).collect()
}

/// Every subset of `w1..w{n}`.
pub fn all_subsets(n: usize) -> Vec<WorldSet> {
    (0..1u32 << n).map(|m| mask_set(m, n)).collect()
}

pub fn flips_of(series: &SoritesSeries) -> BTreeMap<Agent, usize> {
    series.flips().clone()
}
