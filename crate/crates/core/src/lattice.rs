//! Candidate prices by backward induction and their replicating
//! strategies.
//!
//! The lattice stores one value per reachable node, keyed by move
//! counts so binary games cost O(N^2) nodes rather than O(2^N). A node
//! value is the fair-weight average of its children (discounted by the
//! growth factor in asset games); the terminal layer is the payoff.
//! The delta hedge reads stakes off value increments, and verification
//! replays every admissible path and demands the capital land exactly
//! on the payoff.

use std::collections::BTreeMap;

use num::{Signed, Zero};

use crate::error::Error;
use crate::game::{
    render_state, step_capital, GameSpec, NodeKey, Path, Quantity, Stake, StakeRule,
};
use crate::payoff::Payoff;
use crate::rational::{render_rat, Rat};

/// Map from `(round, state)` to the candidate price of the claim.
#[derive(Clone, Debug, PartialEq)]
pub struct PriceLattice {
    horizon: usize,
    layers: Vec<BTreeMap<NodeKey, Rat>>,
}

/// Computes the candidate price of `payoff` at every reachable node by
/// backward induction from the terminal layer.
pub fn backward_induct(spec: &GameSpec, payoff: &Payoff) -> Result<PriceLattice, Error> {
    let n = spec.horizon();
    let reachable = spec.reachable_layers()?;
    let mut layers: Vec<BTreeMap<NodeKey, Rat>> = vec![BTreeMap::new(); n + 1];
    for key in &reachable[n] {
        let v = payoff.eval(&spec.state_value(key))?;
        layers[n].insert(key.clone(), v);
    }
    for round in (0..n).rev() {
        let mut layer = BTreeMap::new();
        for key in &reachable[round] {
            let view = spec.round(round + 1, key)?;
            let weights = view.weights.as_ref().ok_or_else(|| {
                Error::IncompleteGame(
                    "backward induction needs a unique pricing measure per node".into(),
                )
            })?;
            let mut acc = Rat::zero();
            for (i, w) in weights.iter().enumerate() {
                if w.is_zero() {
                    continue;
                }
                let child = key.child(i);
                let child_value = layers[round + 1].get(&child).expect("reachable child");
                acc += w * child_value;
            }
            layer.insert(key.clone(), acc / &view.growth);
        }
        layers[round] = layer;
    }
    Ok(PriceLattice { horizon: n, layers })
}

impl PriceLattice {
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// The candidate price at round 0: the value of the whole claim.
    pub fn initial_price(&self) -> &Rat {
        self.layers[0].values().next().expect("root node")
    }

    /// Value at `(round, state)`; absent for unreachable states.
    pub fn value(&self, round: usize, key: &NodeKey) -> Option<&Rat> {
        self.layers.get(round).and_then(|l| l.get(key))
    }

    pub fn layer(&self, round: usize) -> &BTreeMap<NodeKey, Rat> {
        &self.layers[round]
    }

    /// Nodes as `["round", "state", "value"]` triples.
    pub fn to_json(&self, spec: &GameSpec) -> serde_json::Value {
        let mut nodes = Vec::new();
        for (round, layer) in self.layers.iter().enumerate() {
            for (key, value) in layer {
                nodes.push(serde_json::json!([
                    round.to_string(),
                    render_state(&spec.state_value(key)),
                    render_rat(value),
                ]));
            }
        }
        serde_json::json!({
            "horizon": self.horizon,
            "initial_price": render_rat(self.initial_price()),
            "nodes": nodes,
        })
    }
}

/// Initial capital plus the stake rule replicating a claim, with the
/// table of nodes where a degenerate price forces Reality's move.
#[derive(Clone, Debug, PartialEq)]
pub struct ReplicationPlan {
    initial_capital: Rat,
    stakes: Vec<BTreeMap<NodeKey, Stake>>,
    forced: Vec<BTreeMap<NodeKey, Vec<usize>>>,
    vector_dim: Option<usize>,
}

/// Reads the replicating stakes off the lattice: the ratio of value
/// increments over two live moves, the per-label child values in
/// multilabel games, and no stake at all where the move is forced.
pub fn delta_hedge(lattice: &PriceLattice, spec: &GameSpec) -> Result<ReplicationPlan, Error> {
    let n = spec.horizon();
    let arity = spec.moves().arity();
    let mut stakes = vec![BTreeMap::new(); n];
    let mut forced = vec![BTreeMap::new(); n];
    let vector_dim = spec.moves().is_vector().then_some(arity);
    for round in 1..=n {
        for key in lattice.layer(round - 1).keys() {
            let view = spec.round(round, key)?;
            let live = view.admissible_indices();
            let stake = if spec.moves().is_vector() {
                let mut m = vec![Rat::zero(); arity];
                for &i in &live {
                    m[i] = lattice
                        .value(round, &key.child(i))
                        .expect("reachable")
                        .clone();
                }
                Quantity::Vector(m)
            } else {
                match live.as_slice() {
                    [only] => {
                        let _ = only;
                        Quantity::zero_scalar()
                    }
                    [lo, hi] => {
                        let v_lo = lattice.value(round, &key.child(*lo)).expect("reachable");
                        let v_hi = lattice.value(round, &key.child(*hi)).expect("reachable");
                        let t_lo = view.tickets[*lo].scalar().expect("scalar ticket");
                        let t_hi = view.tickets[*hi].scalar().expect("scalar ticket");
                        Quantity::Scalar((v_hi - v_lo) / (t_hi - t_lo))
                    }
                    _ => {
                        return Err(Error::IncompleteGame(
                            "no delta hedge with three or more live scalar moves".into(),
                        ))
                    }
                }
            };
            if live.len() < arity {
                forced[round - 1].insert(key.clone(), live);
            }
            stakes[round - 1].insert(key.clone(), stake);
        }
    }
    Ok(ReplicationPlan {
        initial_capital: lattice.initial_price().clone(),
        stakes,
        forced,
        vector_dim,
    })
}

impl ReplicationPlan {
    pub fn initial_capital(&self) -> &Rat {
        &self.initial_capital
    }

    pub fn stake_at(&self, round: usize, key: &NodeKey) -> Option<&Stake> {
        self.stakes.get(round - 1).and_then(|m| m.get(key))
    }

    /// Moves still open to Reality at a degenerate-price node.
    pub fn forced_at(&self, round: usize, key: &NodeKey) -> Option<&[usize]> {
        self.forced
            .get(round - 1)
            .and_then(|m| m.get(key))
            .map(|v| v.as_slice())
    }

    pub fn horizon(&self) -> usize {
        self.stakes.len()
    }

    fn render_stake(stake: &Stake) -> String {
        match stake {
            Quantity::Scalar(r) => render_rat(r),
            Quantity::Vector(v) => v.iter().map(render_rat).collect::<Vec<_>>().join(" "),
        }
    }

    /// Hedge table as `round,state,stake` CSV.
    pub fn hedge_csv(&self, spec: &GameSpec) -> String {
        let mut out = String::from("round,state,stake\n");
        for (idx, layer) in self.stakes.iter().enumerate() {
            for (key, stake) in layer {
                out.push_str(&format!(
                    "{},{},{}\n",
                    idx + 1,
                    render_state(&spec.state_value(key)),
                    Self::render_stake(stake)
                ));
            }
        }
        out
    }

    pub fn to_json(&self, spec: &GameSpec) -> serde_json::Value {
        let mut stakes = Vec::new();
        for (idx, layer) in self.stakes.iter().enumerate() {
            for (key, stake) in layer {
                stakes.push(serde_json::json!([
                    (idx + 1).to_string(),
                    render_state(&spec.state_value(key)),
                    Self::render_stake(stake),
                ]));
            }
        }
        let mut forced = Vec::new();
        for (idx, layer) in self.forced.iter().enumerate() {
            for (key, live) in layer {
                let moves: Vec<String> = live.iter().map(|i| i.to_string()).collect();
                forced.push(serde_json::json!([
                    (idx + 1).to_string(),
                    render_state(&spec.state_value(key)),
                    moves.join(" "),
                ]));
            }
        }
        serde_json::json!({
            "initial_capital": render_rat(&self.initial_capital),
            "stakes": stakes,
            "forced_moves": forced,
        })
    }
}

impl StakeRule for ReplicationPlan {
    fn stake(&self, round: usize, state: &NodeKey) -> Stake {
        self.stake_at(round, state)
            .cloned()
            .unwrap_or_else(|| match self.vector_dim {
                Some(d) => Quantity::zero_vector(d),
                None => Quantity::zero_scalar(),
            })
    }
}

/// A path whose replayed capital missed the payoff.
#[derive(Clone, Debug)]
pub struct PathViolation {
    pub path: Path,
    pub residual: Rat,
}

#[derive(Clone, Debug)]
pub struct ReplicationReport {
    pub paths_checked: u64,
    pub max_abs_residual: Rat,
    pub violations: Vec<PathViolation>,
}

impl ReplicationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Replays every admissible path and checks that the capital started at
/// the plan's initial stake lands exactly on the payoff.
pub fn verify_replication(
    plan: &ReplicationPlan,
    spec: &GameSpec,
    payoff: &Payoff,
) -> Result<ReplicationReport, Error> {
    verify_replication_capped(plan, spec, payoff, crate::DEFAULT_PATH_CAP)
}

/// As [`verify_replication`], refusing outright (never truncating) once
/// more than `cap` paths have been replayed.
pub fn verify_replication_capped(
    plan: &ReplicationPlan,
    spec: &GameSpec,
    payoff: &Payoff,
    cap: u64,
) -> Result<ReplicationReport, Error> {
    let mut report = ReplicationReport {
        paths_checked: 0,
        max_abs_residual: Rat::zero(),
        violations: Vec::new(),
    };
    let mut prefix = Vec::new();
    walk(
        plan,
        spec,
        payoff,
        cap,
        &spec.initial_key(),
        &plan.initial_capital,
        &mut prefix,
        &mut report,
    )?;
    Ok(report)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    plan: &ReplicationPlan,
    spec: &GameSpec,
    payoff: &Payoff,
    cap: u64,
    key: &NodeKey,
    capital: &Rat,
    prefix: &mut Vec<usize>,
    report: &mut ReplicationReport,
) -> Result<(), Error> {
    let round = prefix.len();
    if round == spec.horizon() {
        report.paths_checked += 1;
        if report.paths_checked > cap {
            return Err(Error::EnumerationCap {
                needed: u128::from(report.paths_checked),
                cap,
            });
        }
        let residual = capital - payoff.eval(&spec.state_value(key))?;
        if residual.abs() > report.max_abs_residual {
            report.max_abs_residual = residual.abs();
        }
        if !residual.is_zero() {
            report.violations.push(PathViolation {
                path: Path::new(prefix.clone()),
                residual,
            });
        }
        return Ok(());
    }
    let n = round + 1;
    let view = spec.round(n, key)?;
    let stake = plan.stake_at(n, key).ok_or_else(|| {
        Error::InvalidSpec(format!(
            "plan does not cover round {n} at state {}",
            render_state(&spec.state_value(key))
        ))
    })?;
    for (i, adm) in view.admissible.iter().enumerate() {
        if !adm {
            continue;
        }
        let next = step_capital(capital, stake, &view.tickets[i], &view.price, spec.update())?;
        prefix.push(i);
        walk(
            plan,
            spec,
            payoff,
            cap,
            &key.child(i),
            &next,
            prefix,
            report,
        )?;
        prefix.pop();
    }
    Ok(())
}
