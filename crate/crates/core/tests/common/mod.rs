//! Seeded generators shared by the integration suites.

#![allow(dead_code)]

use std::collections::BTreeMap;

use gtp_core::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn rat(n: i64, d: i64) -> Rat {
    Rat::new(n.into(), d.into())
}

pub fn int(n: i64) -> Rat {
    Rat::from_integer(n.into())
}

/// A rational with numerator in `lo..=hi` and denominator in `1..=max_den`.
pub fn random_rat(rng: &mut ChaCha8Rng, lo: i64, hi: i64, max_den: i64) -> Rat {
    rat(rng.gen_range(lo..=hi), rng.gen_range(1..=max_den))
}

/// Random weights on `{0, ..., n}` summing to one, with zeros (interior
/// and trailing) appearing freely.
pub fn random_pmf_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rat> {
    loop {
        let raw: Vec<i64> = (0..=n).map(|_| rng.gen_range(0..=4)).collect();
        let total: i64 = raw.iter().sum();
        if total == 0 {
            continue;
        }
        return raw.into_iter().map(|w| rat(w, total)).collect();
    }
}

/// Random point in the interior of the `d`-simplex.
pub fn random_simplex(rng: &mut ChaCha8Rng, d: usize) -> Vec<Rat> {
    let raw: Vec<i64> = (0..d).map(|_| rng.gen_range(1..=5)).collect();
    let total: i64 = raw.iter().sum();
    raw.into_iter().map(|w| rat(w, total)).collect()
}

/// Random joint distribution of two coordinates, each within
/// `0..=max_coord`.
pub fn random_bivariate(rng: &mut ChaCha8Rng, max_coord: i64) -> Pmf {
    loop {
        let mut points = Vec::new();
        let mut total = 0i64;
        let mut raw = Vec::new();
        for m1 in 0..=max_coord {
            for m2 in 0..=max_coord {
                let w = rng.gen_range(0..=3);
                total += w;
                raw.push((vec![m1, m2], w));
            }
        }
        if total == 0 {
            continue;
        }
        for (pt, w) in raw {
            points.push((PmfPoint::Vector(pt), rat(w, total)));
        }
        return Pmf::new(points).expect("normalized by construction");
    }
}

/// Random payoff table covering every reachable terminal state.
pub fn random_table_payoff(rng: &mut ChaCha8Rng, spec: &GameSpec) -> Payoff {
    let layers = spec.reachable_layers().expect("coherent game");
    let mut table = BTreeMap::new();
    for key in layers.last().expect("terminal layer") {
        table.insert(spec.state_value(key), random_rat(rng, -8, 8, 4));
    }
    Payoff::table(table)
}

/// Largest coordinate sum in a joint target, used to size horizons.
pub fn max_support_sum(joint: &Pmf) -> i64 {
    joint
        .points()
        .map(|(pt, _)| match pt {
            PmfPoint::Vector(v) => v.iter().sum(),
            PmfPoint::Int(m) => *m,
        })
        .max()
        .unwrap_or(0)
}
