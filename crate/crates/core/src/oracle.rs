//! Ground-truth machinery: exhaustive path enumeration, distributions
//! read straight off a game, and upper/lower expected values by exact
//! per-node minimax.
//!
//! The per-node problem `inf over stakes of max over admissible moves`
//! (and its sup/min mirror) is solved in its dual form: optimize the
//! child-value expectation over all probability vectors on admissible
//! moves whose ticket expectation matches the quoted price. With
//! finitely many moves the feasible set is a polytope whose vertices
//! put mass on at most two moves, so vertex enumeration in exact
//! rational arithmetic solves it; the primal witness stake falls out of
//! the pairwise crossings of the stake-response lines.

use std::collections::BTreeMap;

use num::{One, Zero};

use crate::distributions::{Pmf, PmfPoint};
use crate::error::Error;
use crate::game::{
    render_state, ArbitrageCertificate, GameSpec, MoveSpace, NodeKey, Path, Quantity, Stake,
};
use crate::lattice::ReplicationPlan;
use crate::payoff::Payoff;
use crate::rational::{render_rat, Rat};

/// Walks every admissible path of a complete game, calling `visit` with
/// the move sequence, terminal key, and exact product weight.
fn weighted_walk(
    spec: &GameSpec,
    cap: u64,
    visit: &mut dyn FnMut(&[usize], &NodeKey, &Rat),
) -> Result<(), Error> {
    let arity = spec.moves().arity() as u128;
    let needed = arity
        .checked_pow(spec.horizon() as u32)
        .ok_or(Error::EnumerationCap {
            needed: u128::MAX,
            cap,
        })?;
    if needed > u128::from(cap) {
        return Err(Error::EnumerationCap { needed, cap });
    }
    let mut prefix = Vec::new();
    descend(spec, &spec.initial_key(), &Rat::one(), &mut prefix, visit)
}

fn descend(
    spec: &GameSpec,
    key: &NodeKey,
    weight: &Rat,
    prefix: &mut Vec<usize>,
    visit: &mut dyn FnMut(&[usize], &NodeKey, &Rat),
) -> Result<(), Error> {
    if prefix.len() == spec.horizon() {
        visit(prefix, key, weight);
        return Ok(());
    }
    let n = prefix.len() + 1;
    let view = spec.round(n, key)?;
    let weights = view.weights.as_ref().ok_or_else(|| {
        Error::IncompleteGame("path weights need a unique pricing measure per node".into())
    })?;
    for (i, w) in weights.iter().enumerate() {
        if w.is_zero() {
            continue;
        }
        let next = weight * w;
        prefix.push(i);
        descend(spec, &key.child(i), &next, prefix, visit)?;
        prefix.pop();
    }
    Ok(())
}

/// All admissible paths with their exact product weights. Zero-weight
/// paths are omitted; the remaining weights sum to one. Refuses (never
/// truncates) when the move tree exceeds `cap` leaves.
pub fn enumerate_paths(spec: &GameSpec, cap: u64) -> Result<Vec<(Path, Rat)>, Error> {
    let mut out = Vec::new();
    weighted_walk(spec, cap, &mut |moves, _, w| {
        out.push((Path::new(moves.to_vec()), w.clone()));
    })?;
    Ok(out)
}

/// The canonical terminal statistic: the count of up-moves for two-move
/// scalar and asset games, the full composition otherwise.
pub fn default_statistic(spec: &GameSpec) -> impl Fn(&NodeKey) -> PmfPoint {
    let scalar_pair = !spec.moves().is_vector() && spec.moves().arity() == 2;
    move |key: &NodeKey| {
        if scalar_pair {
            PmfPoint::Int(i64::from(key.count(1)))
        } else {
            PmfPoint::Vector(key.counts().iter().map(|&c| i64::from(c)).collect())
        }
    }
}

/// Pushforward of the path weights through a terminal statistic.
pub fn pmf_by_enumeration(
    spec: &GameSpec,
    statistic: &dyn Fn(&NodeKey) -> PmfPoint,
    cap: u64,
) -> Result<Pmf, Error> {
    let mut acc: BTreeMap<PmfPoint, Rat> = BTreeMap::new();
    weighted_walk(spec, cap, &mut |_, key, w| {
        *acc.entry(statistic(key)).or_insert_with(Rat::zero) += w;
    })?;
    Pmf::new(acc.into_iter().collect())
}

/// Optimal stakes and extreme pricing measures at one decision node.
#[derive(Clone, Debug)]
pub struct NodeWitness {
    /// Decision round `n`; the node sits at round `n - 1`.
    pub round: usize,
    pub state: String,
    pub upper_stake: Stake,
    pub upper_measure: Vec<Rat>,
    pub lower_stake: Stake,
    pub lower_measure: Vec<Rat>,
}

/// Upper and lower expected values with per-node witnesses.
#[derive(Clone, Debug)]
pub struct BoundsReport {
    pub upper: Rat,
    pub lower: Rat,
    pub gap: Rat,
    pub witnesses: Vec<NodeWitness>,
}

impl BoundsReport {
    pub fn to_json(&self) -> serde_json::Value {
        let witnesses: Vec<serde_json::Value> = self
            .witnesses
            .iter()
            .map(|w| {
                serde_json::json!({
                    "round": w.round,
                    "state": w.state,
                    "upper_stake": render_stake(&w.upper_stake),
                    "upper_measure": w.upper_measure.iter().map(render_rat).collect::<Vec<_>>(),
                    "lower_stake": render_stake(&w.lower_stake),
                    "lower_measure": w.lower_measure.iter().map(render_rat).collect::<Vec<_>>(),
                })
            })
            .collect();
        serde_json::json!({
            "upper": render_rat(&self.upper),
            "lower": render_rat(&self.lower),
            "gap": render_rat(&self.gap),
            "witnesses": witnesses,
        })
    }
}

fn render_stake(stake: &Stake) -> String {
    match stake {
        Quantity::Scalar(r) => render_rat(r),
        Quantity::Vector(v) => v.iter().map(render_rat).collect::<Vec<_>>().join(" "),
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Direction {
    Upper,
    Lower,
}

struct ScalarSolution {
    value: Rat,
    stake: Rat,
    measure: Vec<(usize, Rat)>,
}

/// Exact minimax over one scalar-ticket node: `items` lists the live
/// moves as `(move index, ticket payout, child value)`.
fn solve_scalar(items: &[(usize, Rat, Rat)], price: &Rat, dir: Direction) -> ScalarSolution {
    let better = |a: &Rat, b: &Rat| match dir {
        Direction::Upper => a > b,
        Direction::Lower => a < b,
    };

    // Dual: vertices of the fair measures put mass on one move priced
    // exactly, or straddle the price with two moves.
    let mut best: Option<(Rat, Vec<(usize, Rat)>)> = None;
    let mut consider = |value: Rat, measure: Vec<(usize, Rat)>| match &best {
        Some((v, _)) if !better(&value, v) => {}
        _ => best = Some((value, measure)),
    };
    for (idx, t, v) in items {
        if t == price {
            consider(v.clone(), vec![(*idx, Rat::one())]);
        }
    }
    for (ai, (idx_a, t_a, v_a)) in items.iter().enumerate() {
        for (idx_b, t_b, v_b) in items.iter().skip(ai + 1) {
            if t_a < price && price < t_b {
                let w_b = (price - t_a) / (t_b - t_a);
                let w_a = Rat::one() - &w_b;
                let value = &w_a * v_a + &w_b * v_b;
                consider(value, vec![(*idx_a, w_a), (*idx_b, w_b)]);
            }
        }
    }
    let (value, measure) = best.expect("price lies in the hull of live tickets");

    // Primal: the stake response max/min_i (V_i - M (t_i - price)) is
    // piecewise linear in M; its optimum sits at a pairwise crossing.
    let mut candidates = vec![Rat::zero()];
    for (ai, (_, t_a, v_a)) in items.iter().enumerate() {
        for (_, t_b, v_b) in items.iter().skip(ai + 1) {
            if t_a != t_b {
                candidates.push((v_a - v_b) / (t_a - t_b));
            }
        }
    }
    let response = |m: &Rat| -> Rat {
        let mut extreme: Option<Rat> = None;
        for (_, t, v) in items {
            let val = v - m * (t - price);
            extreme = Some(match extreme {
                // Skeptic guards against Reality's best reply
                Some(e) => match dir {
                    Direction::Upper => e.max(val),
                    Direction::Lower => e.min(val),
                },
                None => val,
            });
        }
        extreme.expect("nonempty")
    };
    let mut stake = Rat::zero();
    let mut stake_value: Option<Rat> = None;
    for m in candidates {
        let val = response(&m);
        let improves = match &stake_value {
            None => true,
            Some(sv) => better(sv, &val),
        };
        if improves {
            stake_value = Some(val);
            stake = m;
        }
    }
    debug_assert_eq!(
        stake_value.as_ref(),
        Some(&value),
        "primal and dual optima must agree"
    );
    ScalarSolution {
        value,
        stake,
        measure,
    }
}

/// Upper and lower expected values of `payoff` by backward recursion,
/// solving the stake minimax exactly at every reachable node. Fails
/// with an arbitrage certificate when a quoted price leaves the
/// admissible region.
pub fn upper_lower(spec: &GameSpec, payoff: &Payoff) -> Result<BoundsReport, Error> {
    let n = spec.horizon();
    let reachable = spec.reachable_layers()?;
    let arity = spec.moves().arity();
    let mut upper: Vec<BTreeMap<NodeKey, Rat>> = vec![BTreeMap::new(); n + 1];
    let mut lower: Vec<BTreeMap<NodeKey, Rat>> = vec![BTreeMap::new(); n + 1];
    for key in &reachable[n] {
        let v = payoff.eval(&spec.state_value(key))?;
        upper[n].insert(key.clone(), v.clone());
        lower[n].insert(key.clone(), v);
    }
    let mut witnesses: BTreeMap<(usize, NodeKey), NodeWitness> = BTreeMap::new();
    for round in (0..n).rev() {
        let mut up_layer = BTreeMap::new();
        let mut low_layer = BTreeMap::new();
        for key in &reachable[round] {
            let view = spec.round(round + 1, key)?;
            let live = view.admissible_indices();
            let state = render_state(&spec.state_value(key));
            let (up_val, low_val, witness) = match (&view.price, spec.moves()) {
                (Quantity::Vector(p), MoveSpace::Multilabel { .. }) => {
                    let mut up_stake = vec![Rat::zero(); arity];
                    let mut low_stake = vec![Rat::zero(); arity];
                    let mut up_val = Rat::zero();
                    let mut low_val = Rat::zero();
                    for &i in &live {
                        let child = key.child(i);
                        let u = upper[round + 1].get(&child).expect("reachable");
                        let l = lower[round + 1].get(&child).expect("reachable");
                        up_val += &p[i] * u;
                        low_val += &p[i] * l;
                        up_stake[i] = u.clone();
                        low_stake[i] = l.clone();
                    }
                    let witness = NodeWitness {
                        round: round + 1,
                        state,
                        upper_stake: Quantity::Vector(up_stake),
                        upper_measure: p.clone(),
                        lower_stake: Quantity::Vector(low_stake),
                        lower_measure: p.clone(),
                    };
                    (up_val, low_val, witness)
                }
                (Quantity::Scalar(p), _) => {
                    let gather = |values: &BTreeMap<NodeKey, Rat>| -> Vec<(usize, Rat, Rat)> {
                        live.iter()
                            .map(|&i| {
                                (
                                    i,
                                    view.tickets[i].scalar().expect("scalar ticket").clone(),
                                    values.get(&key.child(i)).expect("reachable").clone(),
                                )
                            })
                            .collect()
                    };
                    let up = solve_scalar(&gather(&upper[round + 1]), p, Direction::Upper);
                    let low = solve_scalar(&gather(&lower[round + 1]), p, Direction::Lower);
                    let expand = |sparse: &[(usize, Rat)]| {
                        let mut m = vec![Rat::zero(); arity];
                        for (i, w) in sparse {
                            m[*i] = w.clone();
                        }
                        m
                    };
                    let witness = NodeWitness {
                        round: round + 1,
                        state,
                        upper_stake: Quantity::Scalar(up.stake.clone()),
                        upper_measure: expand(&up.measure),
                        lower_stake: Quantity::Scalar(low.stake.clone()),
                        lower_measure: expand(&low.measure),
                    };
                    (up.value, low.value, witness)
                }
                _ => unreachable!("validated spec"),
            };
            up_layer.insert(key.clone(), up_val / &view.growth);
            low_layer.insert(key.clone(), low_val / &view.growth);
            witnesses.insert((round + 1, key.clone()), witness);
        }
        upper[round] = up_layer;
        lower[round] = low_layer;
    }
    let up = upper[0].values().next().expect("root").clone();
    let low = lower[0].values().next().expect("root").clone();
    let gap = &up - &low;
    Ok(BoundsReport {
        upper: up,
        lower: low,
        gap,
        witnesses: witnesses.into_values().collect(),
    })
}

/// Outcome of a coherence check.
#[derive(Clone, Debug)]
pub enum CoherenceVerdict {
    Coherent,
    Arbitrage(ArbitrageCertificate),
}

impl CoherenceVerdict {
    pub fn is_coherent(&self) -> bool {
        matches!(self, CoherenceVerdict::Coherent)
    }
}

/// Certifies that every reachable quoted price stays inside the convex
/// hull of the live ticket payouts, or returns the separating stake.
pub fn coherence_check(spec: &GameSpec) -> Result<CoherenceVerdict, Error> {
    match spec.reachable_layers() {
        Ok(_) => Ok(CoherenceVerdict::Coherent),
        Err(Error::Arbitrage(cert)) => Ok(CoherenceVerdict::Arbitrage(*cert)),
        Err(e) => Err(e),
    }
}

/// Outcome of checking that a replicating strategy pins the upper and
/// lower expected values to its initial capital.
#[derive(Clone, Debug)]
pub enum ReplicationPricing {
    Confirmed {
        value: Rat,
    },
    Mismatch {
        upper: Rat,
        lower: Rat,
        replication_capital: Rat,
    },
}

/// With a verified replicating plan in hand, both expected values must
/// equal the plan's initial capital exactly.
pub fn check_proposition_a1(
    spec: &GameSpec,
    payoff: &Payoff,
    plan: &ReplicationPlan,
) -> Result<ReplicationPricing, Error> {
    let bounds = upper_lower(spec, payoff)?;
    let alpha = plan.initial_capital();
    if &bounds.upper == alpha && &bounds.lower == alpha {
        Ok(ReplicationPricing::Confirmed {
            value: bounds.upper,
        })
    } else {
        Ok(ReplicationPricing::Mismatch {
            upper: bounds.upper,
            lower: bounds.lower,
            replication_capital: alpha.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forecasters::{tail_ratios, Forecaster, UrnParams};
    use crate::game::UpdateRule;
    use crate::lattice::{backward_induct, delta_hedge};
    use crate::rational::{int, rat};
    use num::Signed;

    fn rescaled(p: Rat, n: usize) -> GameSpec {
        GameSpec::new(
            n,
            MoveSpace::BinaryUnit,
            Forecaster::Constant { p },
            UpdateRule::AdditiveTicket,
            int(0),
            None,
        )
        .unwrap()
    }

    fn fair_coin(n: usize) -> GameSpec {
        GameSpec::new(
            n,
            MoveSpace::BinaryOffsets {
                a: int(1),
                b: int(1),
            },
            Forecaster::None,
            UpdateRule::AdditiveTicket,
            int(0),
            None,
        )
        .unwrap()
    }

    fn three_outcome() -> GameSpec {
        GameSpec::new(
            1,
            MoveSpace::ScalarSet {
                values: vec![int(0), int(1), int(2)],
            },
            Forecaster::Constant { p: int(1) },
            UpdateRule::AdditiveTicket,
            int(0),
            None,
        )
        .unwrap()
    }

    #[test]
    fn enumerate_uniform_paths() {
        let spec = rescaled(rat(1, 2), 2);
        let paths = enumerate_paths(&spec, crate::DEFAULT_PATH_CAP).unwrap();
        assert_eq!(paths.len(), 4);
        for (_, w) in &paths {
            assert_eq!(w, &rat(1, 4));
        }
        let total: Rat = paths.iter().map(|(_, w)| w.clone()).sum();
        assert_eq!(total, int(1));
    }

    #[test]
    fn enumerate_staircase_paths() {
        let st = tail_ratios(&[rat(1, 2), rat(1, 2)]).unwrap();
        let spec = GameSpec::new(
            1,
            MoveSpace::BinaryUnit,
            Forecaster::Staircase { staircase: st },
            UpdateRule::AdditiveTicket,
            int(0),
            None,
        )
        .unwrap();
        let paths = enumerate_paths(&spec, crate::DEFAULT_PATH_CAP).unwrap();
        assert_eq!(paths.len(), 2);
        for (_, w) in &paths {
            assert_eq!(w, &rat(1, 2));
        }
    }

    #[test]
    fn enumerate_tiny_urn() {
        let spec = GameSpec::new(
            2,
            MoveSpace::BinaryUnit,
            Forecaster::Urn {
                params: UrnParams {
                    nu1: 1,
                    nu2: 1,
                    c: -1,
                },
            },
            UpdateRule::AdditiveTicket,
            int(0),
            None,
        )
        .unwrap();
        let paths = enumerate_paths(&spec, crate::DEFAULT_PATH_CAP).unwrap();
        // the second draw is forced either way
        let got: Vec<Vec<usize>> = paths.iter().map(|(p, _)| p.moves().to_vec()).collect();
        assert_eq!(got, vec![vec![0, 1], vec![1, 0]]);
        for (_, w) in &paths {
            assert_eq!(w, &rat(1, 2));
        }
    }

    #[test]
    fn enumeration_cap_refuses() {
        let spec = rescaled(rat(1, 2), 21);
        assert!(matches!(
            enumerate_paths(&spec, 1 << 20),
            Err(Error::EnumerationCap { .. })
        ));
    }

    #[test]
    fn pmf_matches_closed_forms() {
        let spec = rescaled(rat(1, 3), 4);
        let stat = default_statistic(&spec);
        let pmf = pmf_by_enumeration(&spec, &stat, crate::DEFAULT_PATH_CAP).unwrap();
        assert_eq!(
            pmf,
            crate::distributions::binomial_pmf(4, &rat(1, 3)).unwrap()
        );

        let urn = GameSpec::new(
            3,
            MoveSpace::BinaryUnit,
            Forecaster::Urn {
                params: UrnParams {
                    nu1: 2,
                    nu2: 2,
                    c: -1,
                },
            },
            UpdateRule::AdditiveTicket,
            int(0),
            None,
        )
        .unwrap();
        let stat = default_statistic(&urn);
        let pmf = pmf_by_enumeration(&urn, &stat, crate::DEFAULT_PATH_CAP).unwrap();
        assert_eq!(
            pmf,
            crate::distributions::hypergeometric_pmf(2, 2, 3).unwrap()
        );

        let point = tail_ratios(&[int(0), int(0), int(1)]).unwrap();
        let spec = GameSpec::new(
            2,
            MoveSpace::BinaryUnit,
            Forecaster::Staircase { staircase: point },
            UpdateRule::AdditiveTicket,
            int(0),
            None,
        )
        .unwrap();
        let stat = default_statistic(&spec);
        let pmf = pmf_by_enumeration(&spec, &stat, crate::DEFAULT_PATH_CAP).unwrap();
        assert_eq!(pmf.weight(&PmfPoint::Int(2)), int(1));
        assert_eq!(pmf.len(), 1);
    }

    #[test]
    fn three_outcome_gap() {
        let spec = three_outcome();
        let payoff = Payoff::from_scalar_fn(|s| if s == &int(2) { int(1) } else { int(0) });
        let bounds = upper_lower(&spec, &payoff).unwrap();
        assert_eq!(bounds.upper, rat(1, 2));
        assert_eq!(bounds.lower, int(0));
        assert_eq!(bounds.gap, rat(1, 2));
        // witness stakes achieve the bounds
        let w = &bounds.witnesses[0];
        assert_eq!(w.upper_stake, Quantity::Scalar(rat(1, 2)));
        assert_eq!(w.lower_stake, Quantity::Scalar(int(0)));
    }

    #[test]
    fn complete_games_have_no_gap() {
        let spec = fair_coin(4);
        let payoff = Payoff::band(4, rat(1, 2));
        let bounds = upper_lower(&spec, &payoff).unwrap();
        assert_eq!(bounds.upper, rat(7, 8));
        assert_eq!(bounds.lower, rat(7, 8));

        let constant = Payoff::constant(rat(5, 3));
        let bounds = upper_lower(&spec, &constant).unwrap();
        assert_eq!(bounds.upper, rat(5, 3));
        assert_eq!(bounds.lower, rat(5, 3));
    }

    #[test]
    fn coherence_verdicts() {
        assert!(coherence_check(&rescaled(rat(1, 2), 2))
            .unwrap()
            .is_coherent());
        assert!(coherence_check(&rescaled(int(1), 2)).unwrap().is_coherent());

        let bad = GameSpec::new(
            2,
            MoveSpace::BinaryUnit,
            Forecaster::Constant { p: rat(6, 5) },
            UpdateRule::AdditiveTicket,
            int(0),
            None,
        )
        .unwrap();
        match coherence_check(&bad).unwrap() {
            CoherenceVerdict::Arbitrage(cert) => {
                assert_eq!(cert.round, 1);
                assert!(cert.guaranteed_gain.is_positive());
            }
            CoherenceVerdict::Coherent => panic!("expected arbitrage"),
        }

        let crr = GameSpec::new(
            2,
            MoveSpace::CrrFactors {
                u: int(2),
                d: rat(1, 2),
            },
            Forecaster::None,
            UpdateRule::Crr { r: rat(5, 4) },
            int(0),
            Some(Quantity::Scalar(int(4))),
        )
        .unwrap();
        assert!(coherence_check(&crr).unwrap().is_coherent());

        let off_simplex = GameSpec::new(
            1,
            MoveSpace::Multilabel { d: 3 },
            Forecaster::ConstantVector {
                p: vec![rat(1, 2), rat(1, 2), rat(1, 2)],
            },
            UpdateRule::InnerProductTicket,
            int(0),
            None,
        )
        .unwrap();
        match coherence_check(&off_simplex).unwrap() {
            CoherenceVerdict::Arbitrage(cert) => assert!(cert.guaranteed_gain.is_positive()),
            CoherenceVerdict::Coherent => panic!("expected arbitrage"),
        }
    }

    #[test]
    fn replication_pins_both_bounds() {
        let spec = fair_coin(2);
        let payoff = Payoff::power(2);
        let lattice = backward_induct(&spec, &payoff).unwrap();
        let plan = delta_hedge(&lattice, &spec).unwrap();
        match check_proposition_a1(&spec, &payoff, &plan).unwrap() {
            ReplicationPricing::Confirmed { value } => assert_eq!(value, int(2)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn staircase_mean_three_ways() {
        let st = tail_ratios(&[rat(1, 4), rat(1, 4), rat(1, 2)]).unwrap();
        let spec = GameSpec::new(
            2,
            MoveSpace::BinaryUnit,
            Forecaster::Staircase { staircase: st },
            UpdateRule::AdditiveTicket,
            int(0),
            None,
        )
        .unwrap();
        let payoff = Payoff::identity();
        let lattice = backward_induct(&spec, &payoff).unwrap();
        assert_eq!(lattice.initial_price(), &rat(5, 4));
        let plan = delta_hedge(&lattice, &spec).unwrap();
        match check_proposition_a1(&spec, &payoff, &plan).unwrap() {
            ReplicationPricing::Confirmed { value } => assert_eq!(value, rat(5, 4)),
            other => panic!("unexpected {other:?}"),
        }
    }

    // Direct strategy search over stake grids, including every
    // history-dependent assignment, as an independent check that the
    // node-by-node recursion loses nothing.
    fn brute_force_bounds(spec: &GameSpec, payoff: &Payoff, grid: &[Rat]) -> (Rat, Rat) {
        struct Arm {
            decision: usize,
            net: Rat, // ticket - price
        }
        // enumerate admissible prefixes (decision points) and paths
        let mut decisions: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut paths: Vec<(Vec<Arm>, Rat)> = Vec::new();
        let mut stack = vec![(spec.initial_key(), Vec::<usize>::new(), Vec::<Arm>::new())];
        while let Some((key, prefix, arms)) = stack.pop() {
            if prefix.len() == spec.horizon() {
                let pay = payoff.eval(&spec.state_value(&key)).unwrap();
                paths.push((arms, pay));
                continue;
            }
            let next_id = decisions.len();
            let id = *decisions.entry(prefix.clone()).or_insert(next_id);
            let view = spec.round(prefix.len() + 1, &key).unwrap();
            let price = view.price.scalar().unwrap();
            for i in view.admissible_indices() {
                let t = view.tickets[i].scalar().unwrap();
                let mut p = prefix.clone();
                p.push(i);
                let mut a: Vec<Arm> = arms
                    .iter()
                    .map(|arm| Arm {
                        decision: arm.decision,
                        net: arm.net.clone(),
                    })
                    .collect();
                a.push(Arm {
                    decision: id,
                    net: t - price,
                });
                stack.push((key.child(i), p, a));
            }
        }
        let n_dec = decisions.len();
        let mut assignment = vec![0usize; n_dec];
        let mut best_upper: Option<Rat> = None;
        let mut best_lower: Option<Rat> = None;
        loop {
            let stakes: Vec<&Rat> = assignment.iter().map(|&g| &grid[g]).collect();
            let mut worst: Option<Rat> = None;
            let mut least: Option<Rat> = None;
            for (arms, pay) in &paths {
                let capital: Rat = arms.iter().map(|a| stakes[a.decision] * &a.net).sum();
                let shortfall = pay - capital;
                worst = Some(match worst {
                    Some(w) => w.max(shortfall.clone()),
                    None => shortfall.clone(),
                });
                least = Some(match least {
                    Some(l) => l.min(shortfall.clone()),
                    None => shortfall,
                });
            }
            let worst = worst.unwrap();
            let least = least.unwrap();
            best_upper = Some(match best_upper {
                Some(b) => b.min(worst),
                None => worst,
            });
            best_lower = Some(match best_lower {
                Some(b) => b.max(least),
                None => least,
            });
            // next assignment
            let mut i = 0;
            loop {
                if i == n_dec {
                    return (best_upper.unwrap(), best_lower.unwrap());
                }
                assignment[i] += 1;
                if assignment[i] < grid.len() {
                    break;
                }
                assignment[i] = 0;
                i += 1;
            }
        }
    }

    #[test]
    fn recursion_matches_strategy_search() {
        // incomplete single-round game
        let spec = three_outcome();
        let payoff = Payoff::from_scalar_fn(|s| if s == &int(2) { int(1) } else { int(0) });
        let grid = [int(0), rat(1, 2), int(1), int(-1)];
        let (bu, bl) = brute_force_bounds(&spec, &payoff, &grid);
        let bounds = upper_lower(&spec, &payoff).unwrap();
        assert_eq!(bounds.upper, bu);
        assert_eq!(bounds.lower, bl);

        // complete two-round game; grid holds the per-node optimal stakes
        let spec = rescaled(rat(1, 3), 2);
        let payoff = Payoff::power(2);
        let bounds = upper_lower(&spec, &payoff).unwrap();
        let mut grid = vec![int(0), int(1), int(-1), rat(1, 2)];
        for w in &bounds.witnesses {
            grid.push(w.upper_stake.scalar().unwrap().clone());
            grid.push(w.lower_stake.scalar().unwrap().clone());
        }
        grid.sort();
        grid.dedup();
        let (bu, bl) = brute_force_bounds(&spec, &payoff, &grid);
        assert_eq!(bounds.upper, bu);
        assert_eq!(bounds.lower, bl);

        // three rounds with a forced region
        let st = tail_ratios(&[rat(1, 4), rat(1, 4), rat(1, 2)]).unwrap();
        let spec = GameSpec::new(
            3,
            MoveSpace::BinaryUnit,
            Forecaster::Staircase { staircase: st },
            UpdateRule::AdditiveTicket,
            int(0),
            None,
        )
        .unwrap();
        let payoff = Payoff::identity();
        let bounds = upper_lower(&spec, &payoff).unwrap();
        let mut grid = vec![int(0), int(1)];
        for w in &bounds.witnesses {
            grid.push(w.upper_stake.scalar().unwrap().clone());
        }
        grid.sort();
        grid.dedup();
        let (bu, bl) = brute_force_bounds(&spec, &payoff, &grid);
        assert_eq!(bounds.upper, bu);
        assert_eq!(bounds.lower, bl);
    }
}
