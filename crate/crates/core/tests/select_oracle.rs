//! UCB1 selection against fixed-point big-integer evaluation of
//! `r/N + c * sqrt(ln(N_parent) / N)` with 60 decimal digits.

use num_bigint::BigInt;
use proptest::prelude::*;
use treepar_core::mcts::ucb_value;
use treepar_core::{select_child, NodeStats};

struct Stats {
    visits: u64,
    halves: u64,
    vl: u64,
}

impl NodeStats for Stats {
    fn visits(&self) -> u64 {
        self.visits
    }
    fn reward_halves(&self) -> u64 {
        self.halves
    }
    fn virtual_loss(&self) -> u64 {
        self.vl
    }
}

fn scale() -> BigInt {
    BigInt::from(10u32).pow(60)
}

/// atanh(p/q) * S for 0 <= p/q < 1.
fn atanh_fixed(p: &BigInt, q: &BigInt, s: &BigInt) -> BigInt {
    let y = p * s / q;
    let y2 = &y * &y / s;
    let mut term = y;
    let mut sum = BigInt::from(0);
    let mut k = 1u32;
    while term != BigInt::from(0) {
        sum += &term / k;
        term = term * &y2 / s;
        k += 2;
    }
    sum
}

/// ln(n) * S for n >= 1.
fn ln_fixed(n: u64, s: &BigInt) -> BigInt {
    let ln2 = 2 * atanh_fixed(&BigInt::from(1), &BigInt::from(3), s);
    let p = BigInt::from(n);
    let mut q = BigInt::from(1);
    let mut k = 0i64;
    while p > BigInt::from(2) * &q {
        q *= 2;
        k += 1;
    }
    let frac = 2 * atanh_fixed(&(&p - &q), &(&p + &q), s);
    frac + ln2 * k
}

/// Score * S, with `c = c_tenths / 10`.
fn ucb_fixed(parent: u64, child: &Stats, c_tenths: u32, s: &BigInt) -> BigInt {
    let n = child.visits + child.vl;
    let mean = BigInt::from(child.halves) * s / (2 * n);
    let inner = ln_fixed(parent, s) / n;
    let root = (inner * s).sqrt();
    mean + root * c_tenths / 10
}

fn to_f64(v: &BigInt) -> f64 {
    format!("{v}e-60").parse().unwrap()
}

#[test]
fn documented_pair_matches_oracle() {
    let s = scale();
    let parent = Stats {
        visits: 102,
        halves: 0,
        vl: 0,
    };
    let kids = [
        Stats {
            visits: 100,
            halves: 120,
            vl: 0,
        },
        Stats {
            visits: 2,
            halves: 2,
            vl: 0,
        },
    ];
    let exact: Vec<BigInt> = kids.iter().map(|k| ucb_fixed(102, k, 7, &s)).collect();
    let expected = if exact[0] >= exact[1] { 0 } else { 1 };
    assert_eq!(select_child(&parent, &kids, 0.7), Ok(expected));
    for (k, e) in kids.iter().zip(&exact) {
        let got = ucb_value(102, k, 0.7).unwrap();
        assert!((got - to_f64(e)).abs() < 1e-12, "{got} vs {}", to_f64(e));
    }
}

#[test]
fn ln_oracle_sanity() {
    let s = scale();
    for n in [1u64, 2, 3, 10, 102, 1_000_003] {
        assert!((to_f64(&ln_fixed(n, &s)) - (n as f64).ln()).abs() < 1e-14);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn argmax_matches_oracle(
        kids in prop::collection::vec((1u64..100_000, 0.0f64..=1.0, 0u64..4), 1..8),
        parent_vl in 0u64..4,
        c_tenths in 0u32..30,
    ) {
        let s = scale();
        let kids: Vec<Stats> = kids
            .into_iter()
            .map(|(v, f, vl)| Stats { visits: v, halves: (2.0 * v as f64 * f) as u64, vl })
            .collect();
        let visits: u64 = kids.iter().map(|k| k.visits).sum();
        let parent = Stats { visits, halves: 0, vl: parent_vl };
        let pe = visits + parent_vl;
        let exact: Vec<BigInt> = kids.iter().map(|k| ucb_fixed(pe, k, c_tenths, &s)).collect();
        let c = c_tenths as f64 / 10.0;
        for (k, e) in kids.iter().zip(&exact) {
            prop_assert!((ucb_value(pe, k, c).unwrap() - to_f64(e)).abs() < 1e-12);
        }
        let best = exact.iter().max().unwrap();
        let first = exact.iter().position(|e| e == best).unwrap();
        let runner_up = exact.iter().enumerate().filter(|&(i, _)| i != first).map(|(_, e)| e).max();
        // Skip near-ties that f64 cannot separate.
        let tolerance = &s / BigInt::from(10u64).pow(9);
        if runner_up.is_none_or(|r| best - r > tolerance) {
            prop_assert_eq!(select_child(&parent, &kids, c).unwrap(), first);
        }
    }
}

#[test]
fn unvisited_child_first_and_ties_low() {
    let parent = Stats {
        visits: 3,
        halves: 0,
        vl: 0,
    };
    let kids = [
        Stats {
            visits: 3,
            halves: 6,
            vl: 0,
        },
        Stats {
            visits: 0,
            halves: 0,
            vl: 0,
        },
        Stats {
            visits: 0,
            halves: 0,
            vl: 0,
        },
    ];
    assert_eq!(select_child(&parent, &kids, 0.7), Ok(1));
    let even = [
        Stats {
            visits: 4,
            halves: 4,
            vl: 0,
        },
        Stats {
            visits: 4,
            halves: 4,
            vl: 0,
        },
    ];
    assert_eq!(select_child(&parent, &even, 0.7), Ok(0));
    let none: [Stats; 0] = [];
    assert!(select_child(&parent, &none, 0.7).is_err());
}

#[test]
fn virtual_loss_counts_as_loss() {
    // Same visits and reward; the child with an in-flight virtual loss has
    // a lower mean and a smaller exploration term.
    let parent = Stats {
        visits: 20,
        halves: 0,
        vl: 1,
    };
    let kids = [
        Stats {
            visits: 10,
            halves: 14,
            vl: 1,
        },
        Stats {
            visits: 10,
            halves: 14,
            vl: 0,
        },
    ];
    assert_eq!(select_child(&parent, &kids, 0.7), Ok(1));
    let a = ucb_value(21, &kids[0], 0.7).unwrap();
    let expected = 7.0 / 11.0 + 0.7 * (21f64.ln() / 11.0).sqrt();
    assert!((a - expected).abs() < 1e-15);
}
