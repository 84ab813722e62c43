//! Finite-horizon betting games.
//!
//! A game runs for `N` rounds. Each round a price is quoted for a
//! "ticket" whose payout depends on Reality's move; Skeptic buys any
//! real quantity of tickets and the capital process updates by the
//! game's rule. Everything is exact rational arithmetic.
//!
//! Degenerate prices never produce infinite stakes here: a price equal
//! to one of the ticket payouts simply removes the other moves from
//! Reality's admissible set (a *forced move*), and a price outside the
//! convex hull of the payouts yields an explicit arbitrage certificate.

use std::collections::BTreeSet;
use std::fmt;

use num::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::forecasters::Forecaster;
use crate::rational::{int, render_rat, Rat};

/// Node index in a game's state lattice: how many times each move has
/// been played so far. The round number is the sum of the counts, so
/// lattices recombine (two histories with equal counts share a node).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeKey(Vec<u32>);

impl NodeKey {
    pub fn root(arity: usize) -> Self {
        NodeKey(vec![0; arity])
    }

    pub fn from_counts(counts: Vec<u32>) -> Self {
        NodeKey(counts)
    }

    pub fn child(&self, move_index: usize) -> Self {
        let mut counts = self.0.clone();
        counts[move_index] += 1;
        NodeKey(counts)
    }

    pub fn counts(&self) -> &[u32] {
        &self.0
    }

    pub fn count(&self, move_index: usize) -> u32 {
        self.0[move_index]
    }

    /// Round this node sits at (total moves played).
    pub fn round(&self) -> usize {
        self.0.iter().map(|&c| c as usize).sum()
    }
}

impl fmt::Debug for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NodeKey{:?}", self.0)
    }
}

/// A scalar or `d`-vector quantity: a move, a quoted price, a stake, or
/// a state, depending on context.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Quantity {
    Scalar(Rat),
    Vector(Vec<Rat>),
}

pub type Stake = Quantity;
pub type Price = Quantity;
pub type StateValue = Quantity;

impl Quantity {
    pub fn scalar(&self) -> Option<&Rat> {
        match self {
            Quantity::Scalar(r) => Some(r),
            Quantity::Vector(_) => None,
        }
    }

    pub fn vector(&self) -> Option<&[Rat]> {
        match self {
            Quantity::Scalar(_) => None,
            Quantity::Vector(v) => Some(v),
        }
    }

    pub fn zero_scalar() -> Self {
        Quantity::Scalar(Rat::zero())
    }

    pub fn zero_vector(d: usize) -> Self {
        Quantity::Vector(vec![Rat::zero(); d])
    }

    fn dim(&self) -> usize {
        match self {
            Quantity::Scalar(_) => 1,
            Quantity::Vector(v) => v.len(),
        }
    }
}

/// Renders a state for tables and certificates: `"3/2"` or `"1 0 2"`.
pub fn render_state(q: &Quantity) -> String {
    match q {
        Quantity::Scalar(r) => render_rat(r),
        Quantity::Vector(v) => v.iter().map(render_rat).collect::<Vec<_>>().join(" "),
    }
}

/// Reality's move space.
///
/// Scalar spaces list their move values in ascending order; index 1 of
/// a two-move space is always the "up" move (`a`, `1`, or `u`).
#[derive(Clone, Debug, PartialEq)]
pub enum MoveSpace {
    /// Moves `{-b, a}` with `a, b > 0`.
    BinaryOffsets { a: Rat, b: Rat },
    /// Moves `{0, 1}`.
    BinaryUnit,
    /// An arbitrary finite set of scalar moves, strictly ascending.
    ScalarSet { values: Vec<Rat> },
    /// The `d` standard coordinate vectors `e_1, ..., e_d`.
    Multilabel { d: usize },
    /// Multiplicative factors `{d, u}` with `u > d > 0`.
    CrrFactors { u: Rat, d: Rat },
}

impl MoveSpace {
    pub fn arity(&self) -> usize {
        match self {
            MoveSpace::BinaryOffsets { .. }
            | MoveSpace::BinaryUnit
            | MoveSpace::CrrFactors { .. } => 2,
            MoveSpace::ScalarSet { values } => values.len(),
            MoveSpace::Multilabel { d } => *d,
        }
    }

    pub fn is_vector(&self) -> bool {
        matches!(self, MoveSpace::Multilabel { .. })
    }

    /// Scalar move values in ascending order; `None` for vector moves.
    pub fn scalar_values(&self) -> Option<Vec<Rat>> {
        match self {
            MoveSpace::BinaryOffsets { a, b } => Some(vec![-b.clone(), a.clone()]),
            MoveSpace::BinaryUnit => Some(vec![Rat::zero(), Rat::one()]),
            MoveSpace::ScalarSet { values } => Some(values.clone()),
            MoveSpace::CrrFactors { u, d } => Some(vec![d.clone(), u.clone()]),
            MoveSpace::Multilabel { .. } => None,
        }
    }

    /// The value of move `i` as a [`Quantity`].
    pub fn move_value(&self, i: usize) -> Quantity {
        match self {
            MoveSpace::Multilabel { d } => {
                let mut e = vec![Rat::zero(); *d];
                e[i] = Rat::one();
                Quantity::Vector(e)
            }
            _ => Quantity::Scalar(self.scalar_values().expect("scalar space")[i].clone()),
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        match self {
            MoveSpace::BinaryOffsets { a, b } => {
                if !a.is_positive() || !b.is_positive() {
                    return Err(Error::InvalidSpec(
                        "binary offsets require a > 0 and b > 0".into(),
                    ));
                }
            }
            MoveSpace::BinaryUnit => {}
            MoveSpace::ScalarSet { values } => {
                if values.len() < 2 {
                    return Err(Error::InvalidSpec(
                        "scalar move set needs at least two moves".into(),
                    ));
                }
                if !values.windows(2).all(|w| w[0] < w[1]) {
                    return Err(Error::InvalidSpec(
                        "scalar move set must be strictly ascending".into(),
                    ));
                }
            }
            MoveSpace::Multilabel { d } => {
                if *d < 2 {
                    return Err(Error::InvalidSpec(
                        "multilabel move space requires d >= 2".into(),
                    ));
                }
            }
            MoveSpace::CrrFactors { u, d } => {
                if !(d.is_positive() && u > d) {
                    return Err(Error::InvalidSpec("factors require u > d > 0".into()));
                }
            }
        }
        Ok(())
    }
}

/// Capital update rule applied each round.
#[derive(Clone, Debug, PartialEq)]
pub enum UpdateRule {
    /// `K' = K + M (x - p)` with scalar stake, move, and price.
    AdditiveTicket,
    /// `K' = K + M . (x - p)` with vector stake, move, and price.
    InnerProductTicket,
    /// `K' = r K + M (x - p)`: cash grows by `r`; `x` is the new asset
    /// price and `p` the prior asset price grown by `r`.
    Crr { r: Rat },
}

impl UpdateRule {
    pub fn growth(&self) -> Rat {
        match self {
            UpdateRule::Crr { r } => r.clone(),
            _ => Rat::one(),
        }
    }
}

/// One capital-process step under the declared rule.
pub fn step_capital(
    capital: &Rat,
    stake: &Stake,
    mv: &Quantity,
    price: &Price,
    rule: &UpdateRule,
) -> Result<Rat, Error> {
    match rule {
        UpdateRule::AdditiveTicket | UpdateRule::Crr { .. } => {
            let (m, x, p) = match (stake, mv, price) {
                (Quantity::Scalar(m), Quantity::Scalar(x), Quantity::Scalar(p)) => (m, x, p),
                _ => {
                    return Err(Error::DimensionMismatch {
                        stake: stake.dim(),
                        moves: mv.dim(),
                    })
                }
            };
            Ok(rule.growth() * capital + m * (x - p))
        }
        UpdateRule::InnerProductTicket => {
            let (m, x, p) = match (stake, mv, price) {
                (Quantity::Vector(m), Quantity::Vector(x), Quantity::Vector(p)) => (m, x, p),
                _ => {
                    return Err(Error::DimensionMismatch {
                        stake: stake.dim(),
                        moves: mv.dim(),
                    })
                }
            };
            if m.len() != x.len() || x.len() != p.len() {
                return Err(Error::DimensionMismatch {
                    stake: m.len(),
                    moves: x.len(),
                });
            }
            let gain: Rat = m
                .iter()
                .zip(x.iter().zip(p.iter()))
                .map(|(mi, (xi, pi))| mi * (xi - pi))
                .sum();
            Ok(capital + gain)
        }
    }
}

/// Evidence that a quoted price lets Skeptic win every single-round
/// outcome: the witness stake and its worst-case gain over all moves.
#[derive(Clone, Debug, PartialEq)]
pub struct ArbitrageCertificate {
    pub round: usize,
    pub state: String,
    pub stake: Stake,
    pub guaranteed_gain: Rat,
}

impl ArbitrageCertificate {
    pub(crate) fn gain_string(&self) -> String {
        render_rat(&self.guaranteed_gain)
    }
}

/// Verdict on a single quoted price against a move space.
#[derive(Clone, Debug, PartialEq)]
pub enum ForecastValidation {
    /// Every move stays available to Reality.
    Admissible,
    /// The price is degenerate; only the listed move indices remain.
    Forced { admissible_moves: Vec<usize> },
    /// The price sits outside the admissible region.
    Arbitrage { stake: Stake, guaranteed_gain: Rat },
}

fn scalar_geometry(p: &Rat, tickets: &[Rat]) -> ForecastValidation {
    let lo = tickets.first().expect("nonempty");
    let hi = tickets.last().expect("nonempty");
    if p < lo {
        return ForecastValidation::Arbitrage {
            stake: Quantity::Scalar(Rat::one()),
            guaranteed_gain: lo - p,
        };
    }
    if p > hi {
        return ForecastValidation::Arbitrage {
            stake: Quantity::Scalar(-Rat::one()),
            guaranteed_gain: p - hi,
        };
    }
    if p == lo || p == hi {
        let forced = tickets
            .iter()
            .enumerate()
            .filter(|(_, t)| *t == p)
            .map(|(i, _)| i)
            .collect();
        return ForecastValidation::Forced {
            admissible_moves: forced,
        };
    }
    ForecastValidation::Admissible
}

fn simplex_geometry(p: &[Rat]) -> ForecastValidation {
    let total: Rat = p.iter().sum();
    let d = p.len();
    if total != Rat::one() {
        let sign = if total < Rat::one() {
            Rat::one()
        } else {
            -Rat::one()
        };
        return ForecastValidation::Arbitrage {
            stake: Quantity::Vector(vec![sign; d]),
            guaranteed_gain: (Rat::one() - total).abs(),
        };
    }
    if let Some(j) = p.iter().position(|pi| pi.is_negative()) {
        let mut stake = vec![Rat::one(); d];
        stake[j] += Rat::one();
        return ForecastValidation::Arbitrage {
            stake: Quantity::Vector(stake),
            guaranteed_gain: -p[j].clone(),
        };
    }
    if p.iter().any(|pi| pi.is_zero()) {
        let admissible = p
            .iter()
            .enumerate()
            .filter(|(_, pi)| pi.is_positive())
            .map(|(i, _)| i)
            .collect();
        return ForecastValidation::Forced {
            admissible_moves: admissible,
        };
    }
    ForecastValidation::Admissible
}

/// Classifies a quoted price against a move space: admissible, forced,
/// or arbitrage with an explicit witness stake. Every input yields
/// exactly one verdict.
pub fn validate_forecast(price: &Price, moves: &MoveSpace) -> ForecastValidation {
    match (price, moves.scalar_values()) {
        (Quantity::Scalar(p), Some(tickets)) => scalar_geometry(p, &tickets),
        (Quantity::Vector(p), None) => {
            if p.len() != moves.arity() {
                // malformed quote; rejected outright
                return ForecastValidation::Arbitrage {
                    stake: Quantity::Vector(vec![Rat::one(); moves.arity()]),
                    guaranteed_gain: Rat::one(),
                };
            }
            simplex_geometry(p)
        }
        // a quote whose shape does not match the move space is rejected
        // outright; no valid game produces one
        (Quantity::Scalar(_), None) => ForecastValidation::Arbitrage {
            stake: Quantity::Vector(vec![Rat::one(); moves.arity()]),
            guaranteed_gain: Rat::one(),
        },
        (Quantity::Vector(_), Some(_)) => ForecastValidation::Arbitrage {
            stake: Quantity::Scalar(Rat::one()),
            guaranteed_gain: Rat::one(),
        },
    }
}

/// The market Skeptic faces in one round at one node: quoted price,
/// per-move ticket payouts, Reality's admissible moves, and (when the
/// game is complete) the unique weights that make every ticket fair.
#[derive(Clone, Debug)]
pub struct RoundView {
    pub price: Price,
    pub tickets: Vec<Quantity>,
    pub admissible: Vec<bool>,
    pub weights: Option<Vec<Rat>>,
    pub growth: Rat,
}

impl RoundView {
    pub fn admissible_indices(&self) -> Vec<usize> {
        self.admissible
            .iter()
            .enumerate()
            .filter(|(_, a)| **a)
            .map(|(i, _)| i)
            .collect()
    }
}

/// Full description of a finite-horizon game.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "repr::GameSpecRepr", into = "repr::GameSpecRepr")]
pub struct GameSpec {
    horizon: usize,
    moves: MoveSpace,
    forecaster: Forecaster,
    update: UpdateRule,
    initial_capital: Rat,
    initial_state: Quantity,
}

impl GameSpec {
    pub fn new(
        horizon: usize,
        moves: MoveSpace,
        forecaster: Forecaster,
        update: UpdateRule,
        initial_capital: Rat,
        initial_state: Option<Quantity>,
    ) -> Result<Self, Error> {
        let initial_state = initial_state.unwrap_or_else(|| match &moves {
            MoveSpace::Multilabel { d } => Quantity::zero_vector(*d),
            MoveSpace::CrrFactors { .. } => Quantity::Scalar(Rat::one()),
            _ => Quantity::zero_scalar(),
        });
        let spec = GameSpec {
            horizon,
            moves,
            forecaster,
            update,
            initial_capital,
            initial_state,
        };
        spec.validate()?;
        Ok(spec)
    }

    fn validate(&self) -> Result<(), Error> {
        if self.horizon == 0 {
            return Err(Error::InvalidSpec("horizon must be at least 1".into()));
        }
        self.moves.validate()?;
        match (&self.update, &self.moves) {
            (UpdateRule::AdditiveTicket, m)
                if !m.is_vector() && !matches!(m, MoveSpace::CrrFactors { .. }) => {}
            (UpdateRule::InnerProductTicket, MoveSpace::Multilabel { .. }) => {}
            (UpdateRule::Crr { r }, MoveSpace::CrrFactors { .. }) => {
                if !r.is_positive() {
                    return Err(Error::InvalidSpec(
                        "growth factor r must be positive".into(),
                    ));
                }
            }
            _ => {
                return Err(Error::InvalidSpec(
                    "update rule does not match the move space".into(),
                ));
            }
        }
        self.forecaster.validate(&self.moves, self.horizon)?;
        match (&self.moves, &self.initial_state) {
            (MoveSpace::Multilabel { d }, Quantity::Vector(v)) if v.len() == *d => {}
            (MoveSpace::Multilabel { .. }, _) => {
                return Err(Error::InvalidSpec(
                    "multilabel games need a d-dimensional initial state".into(),
                ));
            }
            (MoveSpace::CrrFactors { .. }, Quantity::Scalar(s)) if s.is_positive() => {}
            (MoveSpace::CrrFactors { .. }, _) => {
                return Err(Error::InvalidSpec(
                    "asset games need a positive initial price".into(),
                ));
            }
            (_, Quantity::Scalar(_)) => {}
            (_, Quantity::Vector(_)) => {
                return Err(Error::InvalidSpec(
                    "scalar games need a scalar initial state".into(),
                ));
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn moves(&self) -> &MoveSpace {
        &self.moves
    }

    pub fn forecaster(&self) -> &Forecaster {
        &self.forecaster
    }

    pub fn update(&self) -> &UpdateRule {
        &self.update
    }

    pub fn initial_capital(&self) -> &Rat {
        &self.initial_capital
    }

    pub fn initial_state(&self) -> &Quantity {
        &self.initial_state
    }

    pub fn initial_key(&self) -> NodeKey {
        NodeKey::root(self.moves.arity())
    }

    /// The state value `S` at the node reached by `key`.
    pub fn state_value(&self, key: &NodeKey) -> Quantity {
        match &self.moves {
            MoveSpace::Multilabel { d } => {
                let base = self.initial_state.vector().expect("validated");
                let v = (0..*d)
                    .map(|i| &base[i] + int(i64::from(key.count(i))))
                    .collect();
                Quantity::Vector(v)
            }
            MoveSpace::CrrFactors { u, d } => {
                let s0 = self.initial_state.scalar().expect("validated");
                let up = num::pow::pow(u.clone(), key.count(1) as usize);
                let down = num::pow::pow(d.clone(), key.count(0) as usize);
                Quantity::Scalar(s0 * up * down)
            }
            _ => {
                let s0 = self.initial_state.scalar().expect("validated");
                let values = self.moves.scalar_values().expect("scalar");
                let sum: Rat = values
                    .iter()
                    .enumerate()
                    .map(|(i, v)| v * int(i64::from(key.count(i))))
                    .sum();
                Quantity::Scalar(s0 + sum)
            }
        }
    }

    /// Quoted price for round `n` (1-based) at the node `key` of round `n-1`.
    pub fn price_at(&self, n: usize, key: &NodeKey) -> Price {
        match &self.forecaster {
            Forecaster::None => match &self.update {
                UpdateRule::Crr { r } => {
                    let s_prev = self.state_value(key);
                    Quantity::Scalar(r * s_prev.scalar().expect("scalar asset"))
                }
                _ => Quantity::zero_scalar(),
            },
            f => f.price(n, key),
        }
    }

    fn tickets_at(&self, key: &NodeKey) -> Vec<Quantity> {
        match &self.moves {
            MoveSpace::CrrFactors { u, d } => {
                let s_prev = self.state_value(key);
                let s = s_prev.scalar().expect("scalar asset");
                vec![Quantity::Scalar(s * d), Quantity::Scalar(s * u)]
            }
            m => (0..m.arity()).map(|i| m.move_value(i)).collect(),
        }
    }

    /// Builds the per-round market view at a node. Fails with an
    /// arbitrage certificate when the quoted price leaves the
    /// admissible region.
    pub fn round(&self, n: usize, key: &NodeKey) -> Result<RoundView, Error> {
        debug_assert_eq!(key.round() + 1, n, "key must sit one round before n");
        let price = self.price_at(n, key);
        let tickets = self.tickets_at(key);
        let arity = tickets.len();
        let verdict = match (&price, &self.moves) {
            (Quantity::Vector(p), MoveSpace::Multilabel { .. }) => simplex_geometry(p),
            (Quantity::Scalar(p), _) => {
                let scalars: Vec<Rat> = tickets
                    .iter()
                    .map(|t| t.scalar().expect("scalar tickets").clone())
                    .collect();
                scalar_geometry(p, &scalars)
            }
            _ => ForecastValidation::Arbitrage {
                stake: Quantity::Scalar(Rat::one()),
                guaranteed_gain: Rat::one(),
            },
        };
        let admissible = match verdict {
            ForecastValidation::Admissible => vec![true; arity],
            ForecastValidation::Forced { admissible_moves } => {
                let mut adm = vec![false; arity];
                for i in admissible_moves {
                    adm[i] = true;
                }
                adm
            }
            ForecastValidation::Arbitrage {
                stake,
                guaranteed_gain,
            } => {
                return Err(Error::Arbitrage(Box::new(ArbitrageCertificate {
                    round: n,
                    state: render_state(&self.state_value(key)),
                    stake,
                    guaranteed_gain,
                })));
            }
        };
        let weights = match (&price, &self.moves) {
            (Quantity::Vector(p), MoveSpace::Multilabel { .. }) => Some(p.clone()),
            (Quantity::Scalar(p), _) if arity == 2 => {
                let t0 = tickets[0].scalar().expect("scalar");
                let t1 = tickets[1].scalar().expect("scalar");
                let w1 = (p - t0) / (t1 - t0);
                Some(vec![Rat::one() - &w1, w1])
            }
            _ => None,
        };
        Ok(RoundView {
            price,
            tickets,
            admissible,
            weights,
            growth: self.update.growth(),
        })
    }

    /// Keys of the nodes reachable along admissible paths, layer by
    /// layer from round 0 to the horizon.
    pub fn reachable_layers(&self) -> Result<Vec<BTreeSet<NodeKey>>, Error> {
        let mut layers = Vec::with_capacity(self.horizon + 1);
        let mut current = BTreeSet::new();
        current.insert(self.initial_key());
        layers.push(current);
        for n in 1..=self.horizon {
            let mut next = BTreeSet::new();
            for key in &layers[n - 1] {
                let view = self.round(n, key)?;
                for (i, adm) in view.admissible.iter().enumerate() {
                    if *adm {
                        next.insert(key.child(i));
                    }
                }
            }
            layers.push(next);
        }
        Ok(layers)
    }

    pub fn to_json_string(&self) -> Result<String, Error> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self, Error> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Constructors for the standard games.
impl GameSpec {
    /// Moves `{-1, +1}`, no price, zero initial capital.
    pub fn fair_coin(n: usize) -> Result<Self, Error> {
        Self::biased_coin(Rat::one(), Rat::one(), n)
    }

    /// Moves `{a, -b}`, no price.
    pub fn biased_coin(a: Rat, b: Rat, n: usize) -> Result<Self, Error> {
        GameSpec::new(
            n,
            MoveSpace::BinaryOffsets { a, b },
            Forecaster::None,
            UpdateRule::AdditiveTicket,
            Rat::zero(),
            None,
        )
    }

    /// Unit moves at a constant price `p` in `[0, 1]`.
    pub fn rescaled(p: Rat, n: usize) -> Result<Self, Error> {
        Self::binary_forecast(crate::forecasters::constant_price(p)?, n)
    }

    /// Unit moves priced by an arbitrary scalar forecaster.
    pub fn binary_forecast(forecaster: Forecaster, n: usize) -> Result<Self, Error> {
        GameSpec::new(
            n,
            MoveSpace::BinaryUnit,
            forecaster,
            UpdateRule::AdditiveTicket,
            Rat::zero(),
            None,
        )
    }

    /// Sampling without replacement from `nu1` red and `nu2` black balls.
    pub fn urn(nu1: u64, nu2: u64, n: usize) -> Result<Self, Error> {
        Self::binary_forecast(
            Forecaster::Urn {
                params: crate::forecasters::UrnParams { nu1, nu2, c: -1 },
            },
            n,
        )
    }

    /// Polya urn with `c >= 0` same-colour balls added per draw.
    pub fn polya_urn(nu1: u64, nu2: u64, c: i64, n: usize) -> Result<Self, Error> {
        Self::binary_forecast(
            Forecaster::Polya {
                params: crate::forecasters::UrnParams { nu1, nu2, c },
            },
            n,
        )
    }

    /// The game realizing an arbitrary distribution on `{0, ..., N}`;
    /// the horizon shrinks to the trimmed support. A target on a
    /// shifted support `{a, ..., a+N}` is the same game with
    /// `initial_state` set to `a`: the climb count stays `{0, ..., N}`
    /// and payoffs see `S_N = a + count`.
    pub fn staircase(q: &[Rat]) -> Result<(Self, crate::forecasters::Staircase), Error> {
        let st = crate::forecasters::tail_ratios(q)?;
        let horizon = st.top().max(1);
        let spec = Self::binary_forecast(
            Forecaster::Staircase {
                staircase: st.clone(),
            },
            horizon,
        )?;
        Ok((spec, st))
    }

    /// Multilabel game at a constant simplex price.
    pub fn multilabel_constant(p: Vec<Rat>, n: usize) -> Result<Self, Error> {
        let d = p.len();
        GameSpec::new(
            n,
            MoveSpace::Multilabel { d },
            Forecaster::ConstantVector { p },
            UpdateRule::InnerProductTicket,
            Rat::zero(),
            None,
        )
    }

    /// Multilabel game whose leading labels realize a joint target
    /// distribution via chained conditional staircases.
    pub fn chained(joint: &crate::distributions::Pmf, n: usize) -> Result<Self, Error> {
        let chained = crate::forecasters::chain_conditionals(joint, n)?;
        let d = chained.dim();
        GameSpec::new(
            n,
            MoveSpace::Multilabel { d },
            Forecaster::Chained { chained },
            UpdateRule::InnerProductTicket,
            Rat::zero(),
            None,
        )
    }

    /// An arbitrary finite scalar move set with one constant ticket price.
    pub fn scalar_set(values: Vec<Rat>, price: Rat, n: usize) -> Result<Self, Error> {
        GameSpec::new(
            n,
            MoveSpace::ScalarSet { values },
            Forecaster::Constant { p: price },
            UpdateRule::AdditiveTicket,
            Rat::zero(),
            None,
        )
    }
}

/// A complete sequence of Reality's moves, stored as indices into the
/// game's move list.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Path(Vec<usize>);

impl Path {
    pub fn new(moves: Vec<usize>) -> Self {
        Path(moves)
    }

    pub fn moves(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Running states `S_0, ..., S_N` along the path.
    pub fn states(&self, spec: &GameSpec) -> Vec<Quantity> {
        let mut key = spec.initial_key();
        let mut out = vec![spec.state_value(&key)];
        for &i in &self.0 {
            key = key.child(i);
            out.push(spec.state_value(&key));
        }
        out
    }

    /// Terminal node key of the path.
    pub fn terminal_key(&self, spec: &GameSpec) -> NodeKey {
        let mut key = spec.initial_key();
        for &i in &self.0 {
            key = key.child(i);
        }
        key
    }
}

/// Skeptic's capital after each round, starting at the game's initial
/// capital.
#[derive(Clone, Debug, PartialEq)]
pub struct CapitalTrace {
    pub values: Vec<Rat>,
}

impl CapitalTrace {
    pub fn final_capital(&self) -> &Rat {
        self.values.last().expect("nonempty")
    }
}

/// A stake rule: Skeptic's move as a function of the round and the
/// current node.
pub trait StakeRule {
    fn stake(&self, round: usize, state: &NodeKey) -> Stake;
}

impl<F> StakeRule for F
where
    F: Fn(usize, &NodeKey) -> Stake,
{
    fn stake(&self, round: usize, state: &NodeKey) -> Stake {
        self(round, state)
    }
}

/// Plays a full game: Skeptic follows `skeptic`, Reality plays the given
/// move indices. Rejects moves that a degenerate price has excluded.
pub fn run_game(
    spec: &GameSpec,
    skeptic: &dyn StakeRule,
    reality: &[usize],
) -> Result<CapitalTrace, Error> {
    if reality.len() != spec.horizon() {
        return Err(Error::InvalidSpec(format!(
            "path has {} moves but the horizon is {}",
            reality.len(),
            spec.horizon()
        )));
    }
    let arity = spec.moves().arity();
    let mut key = spec.initial_key();
    let mut capital = spec.initial_capital().clone();
    let mut values = vec![capital.clone()];
    for (idx, &mv) in reality.iter().enumerate() {
        let n = idx + 1;
        if mv >= arity {
            return Err(Error::RejectedMove {
                round: n,
                move_index: mv,
            });
        }
        let view = spec.round(n, &key)?;
        if !view.admissible[mv] {
            return Err(Error::RejectedMove {
                round: n,
                move_index: mv,
            });
        }
        let stake = skeptic.stake(n, &key);
        capital = step_capital(
            &capital,
            &stake,
            &view.tickets[mv],
            &view.price,
            spec.update(),
        )?;
        values.push(capital.clone());
        key = key.child(mv);
    }
    Ok(CapitalTrace { values })
}

/// A biased-offset game rewritten over unit moves `{0, 1}` with the
/// constant price `p = b/(a+b)`, together with the maps that carry
/// stakes, states, and payoffs back and forth.
#[derive(Clone, Debug)]
pub struct RescaledGame {
    pub game: GameSpec,
    pub price: Rat,
    pub scale: Rat,
    offset_b: Rat,
    base_state: Rat,
}

impl RescaledGame {
    /// Stake in the unit game replicating the offset-game stake `m`.
    pub fn stake_to_unit(&self, m: &Rat) -> Rat {
        m * &self.scale
    }

    pub fn stake_from_unit(&self, m: &Rat) -> Rat {
        m / &self.scale
    }

    /// Offset-game state at round `n` for unit-game state `s`.
    pub fn state_from_unit(&self, n: usize, s: &Rat) -> Rat {
        &self.base_state + &self.scale * s - &self.offset_b * int(n as i64)
    }

    pub fn state_to_unit(&self, n: usize, s: &Rat) -> Rat {
        (s - &self.base_state + &self.offset_b * int(n as i64)) / &self.scale
    }

    /// Carries a payoff on offset-game terminal states to the unit game.
    pub fn payoff_to_unit(&self, payoff: &crate::payoff::Payoff) -> crate::payoff::Payoff {
        let this = self.clone();
        let payoff = payoff.clone();
        let n = self.game.horizon();
        crate::payoff::Payoff::from_result_fn(move |s| {
            let s = s.scalar().ok_or_else(|| Error::PayoffUndefined {
                state: render_state(s),
            })?;
            payoff.eval(&Quantity::Scalar(this.state_from_unit(n, s)))
        })
    }
}

/// Rewrites a binary-offset game into the equivalent unit-move game.
/// Paths keep their move indices; only values change, so composing the
/// maps is the identity on paths and payoffs.
pub fn affine_rescale(spec: &GameSpec) -> Result<RescaledGame, Error> {
    let (a, b) = match spec.moves() {
        MoveSpace::BinaryOffsets { a, b } => (a.clone(), b.clone()),
        _ => {
            return Err(Error::InvalidSpec(
                "affine rescaling applies to binary-offset games".into(),
            ))
        }
    };
    if !matches!(spec.forecaster(), Forecaster::None) {
        return Err(Error::InvalidSpec(
            "affine rescaling applies to games without a forecaster".into(),
        ));
    }
    let scale = &a + &b;
    let price = &b / &scale;
    let game = GameSpec::new(
        spec.horizon(),
        MoveSpace::BinaryUnit,
        Forecaster::Constant { p: price.clone() },
        UpdateRule::AdditiveTicket,
        spec.initial_capital().clone(),
        Some(Quantity::zero_scalar()),
    )?;
    let base_state = spec.initial_state().scalar().expect("scalar").clone();
    Ok(RescaledGame {
        game,
        price,
        scale,
        offset_b: b,
        base_state,
    })
}

mod repr {
    use serde::{Deserialize, Serialize};

    use super::{GameSpec, MoveSpace, Quantity, UpdateRule};
    use crate::distributions::{Pmf, PmfPoint};
    use crate::error::Error;
    use crate::forecasters::{chain_conditionals, tail_ratios, Forecaster, UrnParams};
    use crate::rational::{parse_rat, render_rat, Rat};

    #[derive(Serialize, Deserialize)]
    pub struct GameSpecRepr {
        horizon: usize,
        moves: MovesRepr,
        update: UpdateRepr,
        forecaster: ForecasterRepr,
        initial_capital: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        initial_state: Option<StateRepr>,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(tag = "kind", rename_all = "kebab-case")]
    enum MovesRepr {
        BinaryOffsets { a: String, b: String },
        BinaryUnit,
        ScalarSet { values: Vec<String> },
        Multilabel { d: usize },
        CrrFactors { u: String, d: String },
    }

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum UpdateRepr {
        Simple(String),
        Crr { crr: CrrRepr },
    }

    #[derive(Serialize, Deserialize)]
    struct CrrRepr {
        r: String,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(tag = "type", rename_all = "kebab-case")]
    enum ForecasterRepr {
        None,
        Constant {
            p: String,
        },
        Urn {
            nu1: u64,
            nu2: u64,
        },
        Polya {
            nu1: u64,
            nu2: u64,
            c: i64,
        },
        Staircase {
            q: Vec<String>,
        },
        ConstantVector {
            p: Vec<String>,
        },
        Chained {
            joint: Vec<JointPoint>,
        },
        CrrReduced {
            s0: String,
            u: String,
            d: String,
            r: String,
        },
    }

    #[derive(Serialize, Deserialize)]
    struct JointPoint {
        point: Vec<u32>,
        weight: String,
    }

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum StateRepr {
        Scalar(String),
        Vector(Vec<String>),
    }

    fn parse_all(v: &[String]) -> Result<Vec<Rat>, Error> {
        v.iter().map(|s| parse_rat(s)).collect()
    }

    impl TryFrom<GameSpecRepr> for GameSpec {
        type Error = Error;

        fn try_from(r: GameSpecRepr) -> Result<Self, Error> {
            let moves = match r.moves {
                MovesRepr::BinaryOffsets { a, b } => MoveSpace::BinaryOffsets {
                    a: parse_rat(&a)?,
                    b: parse_rat(&b)?,
                },
                MovesRepr::BinaryUnit => MoveSpace::BinaryUnit,
                MovesRepr::ScalarSet { values } => MoveSpace::ScalarSet {
                    values: parse_all(&values)?,
                },
                MovesRepr::Multilabel { d } => MoveSpace::Multilabel { d },
                MovesRepr::CrrFactors { u, d } => MoveSpace::CrrFactors {
                    u: parse_rat(&u)?,
                    d: parse_rat(&d)?,
                },
            };
            let update = match r.update {
                UpdateRepr::Simple(s) => match s.as_str() {
                    "additive" => UpdateRule::AdditiveTicket,
                    "inner-product" => UpdateRule::InnerProductTicket,
                    other => {
                        return Err(Error::InvalidSpec(format!("unknown update rule {other:?}")))
                    }
                },
                UpdateRepr::Crr { crr } => UpdateRule::Crr {
                    r: parse_rat(&crr.r)?,
                },
            };
            let forecaster = match r.forecaster {
                ForecasterRepr::None => Forecaster::None,
                ForecasterRepr::Constant { p } => Forecaster::Constant { p: parse_rat(&p)? },
                ForecasterRepr::Urn { nu1, nu2 } => Forecaster::Urn {
                    params: UrnParams { nu1, nu2, c: -1 },
                },
                ForecasterRepr::Polya { nu1, nu2, c } => Forecaster::Polya {
                    params: UrnParams { nu1, nu2, c },
                },
                ForecasterRepr::Staircase { q } => Forecaster::Staircase {
                    staircase: tail_ratios(&parse_all(&q)?)?,
                },
                ForecasterRepr::ConstantVector { p } => {
                    Forecaster::ConstantVector { p: parse_all(&p)? }
                }
                ForecasterRepr::Chained { joint } => {
                    let points = joint
                        .into_iter()
                        .map(|jp| {
                            Ok((
                                PmfPoint::Vector(jp.point.iter().map(|&m| i64::from(m)).collect()),
                                parse_rat(&jp.weight)?,
                            ))
                        })
                        .collect::<Result<Vec<_>, Error>>()?;
                    Forecaster::Chained {
                        chained: chain_conditionals(&Pmf::new(points)?, r.horizon)?,
                    }
                }
                ForecasterRepr::CrrReduced { s0, u, d, r: rr } => Forecaster::CrrReduced {
                    s0: parse_rat(&s0)?,
                    u: parse_rat(&u)?,
                    d: parse_rat(&d)?,
                    r: parse_rat(&rr)?,
                },
            };
            let initial_state = match r.initial_state {
                None => None,
                Some(StateRepr::Scalar(s)) => Some(Quantity::Scalar(parse_rat(&s)?)),
                Some(StateRepr::Vector(v)) => Some(Quantity::Vector(parse_all(&v)?)),
            };
            GameSpec::new(
                r.horizon,
                moves,
                forecaster,
                update,
                parse_rat(&r.initial_capital)?,
                initial_state,
            )
        }
    }

    impl From<GameSpec> for GameSpecRepr {
        fn from(spec: GameSpec) -> Self {
            let render_all = |v: &[Rat]| v.iter().map(render_rat).collect::<Vec<_>>();
            let moves = match &spec.moves {
                MoveSpace::BinaryOffsets { a, b } => MovesRepr::BinaryOffsets {
                    a: render_rat(a),
                    b: render_rat(b),
                },
                MoveSpace::BinaryUnit => MovesRepr::BinaryUnit,
                MoveSpace::ScalarSet { values } => MovesRepr::ScalarSet {
                    values: render_all(values),
                },
                MoveSpace::Multilabel { d } => MovesRepr::Multilabel { d: *d },
                MoveSpace::CrrFactors { u, d } => MovesRepr::CrrFactors {
                    u: render_rat(u),
                    d: render_rat(d),
                },
            };
            let update = match &spec.update {
                UpdateRule::AdditiveTicket => UpdateRepr::Simple("additive".into()),
                UpdateRule::InnerProductTicket => UpdateRepr::Simple("inner-product".into()),
                UpdateRule::Crr { r } => UpdateRepr::Crr {
                    crr: CrrRepr { r: render_rat(r) },
                },
            };
            let forecaster = match &spec.forecaster {
                Forecaster::None => ForecasterRepr::None,
                Forecaster::Constant { p } => ForecasterRepr::Constant { p: render_rat(p) },
                Forecaster::Urn { params } => ForecasterRepr::Urn {
                    nu1: params.nu1,
                    nu2: params.nu2,
                },
                Forecaster::Polya { params } => ForecasterRepr::Polya {
                    nu1: params.nu1,
                    nu2: params.nu2,
                    c: params.c,
                },
                Forecaster::Staircase { staircase } => ForecasterRepr::Staircase {
                    q: render_all(staircase.pmf()),
                },
                Forecaster::ConstantVector { p } => {
                    ForecasterRepr::ConstantVector { p: render_all(p) }
                }
                Forecaster::Chained { chained } => ForecasterRepr::Chained {
                    joint: chained
                        .joint_points()
                        .map(|(pt, w)| JointPoint {
                            point: pt.clone(),
                            weight: render_rat(w),
                        })
                        .collect(),
                },
                Forecaster::CrrReduced { s0, u, d, r } => ForecasterRepr::CrrReduced {
                    s0: render_rat(s0),
                    u: render_rat(u),
                    d: render_rat(d),
                    r: render_rat(r),
                },
            };
            let initial_state = Some(match &spec.initial_state {
                Quantity::Scalar(s) => StateRepr::Scalar(render_rat(s)),
                Quantity::Vector(v) => StateRepr::Vector(render_all(v)),
            });
            GameSpecRepr {
                horizon: spec.horizon,
                moves,
                update,
                forecaster,
                initial_capital: render_rat(&spec.initial_capital),
                initial_state,
            }
        }
    }
}
