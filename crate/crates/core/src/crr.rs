//! The multiplicative asset game: up/down factors on an asset price
//! with interest-bearing cash, its closed-form price, the delta hedge,
//! and the discounted reduction to a two-label ticket game.

use num::{One, Signed, Zero};

use crate::distributions::choose;
use crate::error::Error;
use crate::forecasters::{crr_reduced_tickets, Forecaster};
use crate::game::{GameSpec, MoveSpace, NodeKey, Quantity, Stake, UpdateRule};
use crate::lattice::PriceLattice;
use crate::payoff::Payoff;
use crate::rational::{render_rat, Rat};

/// Parameters of the asset game: initial price `s0`, up/down factors,
/// and the per-round cash growth factor `r` (`r - 1` is the riskless
/// interest rate). Requires `u > r > d > 0`, which makes the game
/// coherent and puts the risk-neutral probability strictly inside
/// `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrrSpec {
    s0: Rat,
    u: Rat,
    d: Rat,
    r: Rat,
    horizon: usize,
}

impl CrrSpec {
    pub fn new(s0: Rat, u: Rat, d: Rat, r: Rat, horizon: usize) -> Result<Self, Error> {
        if !s0.is_positive() {
            return Err(Error::InvalidSpec(
                "initial asset price must be positive".into(),
            ));
        }
        if !(d.is_positive() && r > d && u > r) {
            return Err(Error::CoherenceViolation(
                "the factors must satisfy u > r > d > 0".into(),
            ));
        }
        if horizon == 0 {
            return Err(Error::InvalidSpec("horizon must be at least 1".into()));
        }
        Ok(CrrSpec {
            s0,
            u,
            d,
            r,
            horizon,
        })
    }

    pub fn s0(&self) -> &Rat {
        &self.s0
    }

    pub fn u(&self) -> &Rat {
        &self.u
    }

    pub fn d(&self) -> &Rat {
        &self.d
    }

    pub fn r(&self) -> &Rat {
        &self.r
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// `(r - d) / (u - d)`.
    pub fn risk_neutral_p(&self) -> Rat {
        (&self.r - &self.d) / (&self.u - &self.d)
    }

    /// The game: factor moves, interest-bearing capital rule, zero
    /// initial capital.
    pub fn game(&self) -> GameSpec {
        GameSpec::new(
            self.horizon,
            MoveSpace::CrrFactors {
                u: self.u.clone(),
                d: self.d.clone(),
            },
            Forecaster::None,
            UpdateRule::Crr { r: self.r.clone() },
            Rat::zero(),
            Some(Quantity::Scalar(self.s0.clone())),
        )
        .expect("validated parameters")
    }

    /// Terminal asset price after `m` up-moves.
    pub fn terminal_price(&self, m: usize) -> Rat {
        &self.s0
            * num::pow::pow(self.u.clone(), m)
            * num::pow::pow(self.d.clone(), self.horizon - m)
    }
}

/// Closed-form price: the discounted binomial expectation of the payoff
/// over terminal prices under the risk-neutral probability.
pub fn crr_price(spec: &CrrSpec, payoff: &Payoff) -> Result<Rat, Error> {
    let n = spec.horizon();
    let p = spec.risk_neutral_p();
    let q = Rat::one() - &p;
    let mut acc = Rat::zero();
    for m in 0..=n {
        let weight = Rat::from_integer(choose(n as u64, m as u64))
            * num::pow::pow(p.clone(), m)
            * num::pow::pow(q.clone(), n - m);
        acc += weight * payoff.eval(&Quantity::Scalar(spec.terminal_price(m)))?;
    }
    Ok(acc / num::pow::pow(spec.r.clone(), n))
}

/// The delta hedge at round `n` when the asset trades at `s`: the ratio
/// of the value increment over the price increment across the two
/// children.
pub fn crr_delta(spec: &CrrSpec, lattice: &PriceLattice, n: usize, s: &Rat) -> Result<Rat, Error> {
    if n == 0 || n > spec.horizon() {
        return Err(Error::InvalidSpec(format!(
            "round {n} outside 1..={}",
            spec.horizon()
        )));
    }
    // locate the node at round n-1 carrying the price s
    let game = spec.game();
    let mut found = None;
    for m in 0..n {
        let key = NodeKey::from_counts(vec![(n - 1 - m) as u32, m as u32]);
        if game.state_value(&key) == Quantity::Scalar(s.clone()) {
            found = Some(key);
            break;
        }
    }
    let key = found.ok_or_else(|| {
        Error::InvalidSpec(format!(
            "{} is not a reachable asset price at round {n}",
            render_rat(s)
        ))
    })?;
    let v_down = lattice
        .value(n, &key.child(0))
        .ok_or_else(|| Error::InvalidSpec("lattice does not cover the node".into()))?;
    let v_up = lattice
        .value(n, &key.child(1))
        .ok_or_else(|| Error::InvalidSpec("lattice does not cover the node".into()))?;
    Ok((v_up - v_down) / ((&spec.u - &spec.d) * s))
}

/// The asset game rewritten as a two-label ticket game on discounted
/// increments: label 1 is the up-move. Discounted capital traces agree
/// path by path for every stake rule carried through [`CrrReduction::map_stake`].
#[derive(Clone, Debug)]
pub struct CrrReduction {
    pub game: GameSpec,
    crr: CrrSpec,
}

/// Builds the discounted two-label reduction of an asset game.
pub fn crr_to_multilabel(spec: &CrrSpec) -> CrrReduction {
    let game = GameSpec::new(
        spec.horizon,
        MoveSpace::Multilabel { d: 2 },
        Forecaster::CrrReduced {
            s0: spec.s0.clone(),
            u: spec.u.clone(),
            d: spec.d.clone(),
            r: spec.r.clone(),
        },
        UpdateRule::InnerProductTicket,
        Rat::zero(),
        None,
    )
    .expect("validated parameters");
    CrrReduction {
        game,
        crr: spec.clone(),
    }
}

impl CrrReduction {
    pub fn crr(&self) -> &CrrSpec {
        &self.crr
    }

    /// Discounted ticket values `(x1, x2)` at a reduced-game node.
    pub fn ticket_values(&self, n: usize, key: &NodeKey) -> (Rat, Rat) {
        crr_reduced_tickets(&self.crr.s0, &self.crr.u, &self.crr.d, &self.crr.r, n, key)
    }

    /// The simplex price quoted at a reduced-game node.
    pub fn price_star(&self, n: usize, key: &NodeKey) -> Vec<Rat> {
        match self.game.forecaster().price(n, key) {
            Quantity::Vector(p) => p,
            Quantity::Scalar(_) => unreachable!("reduction quotes vector prices"),
        }
    }

    /// Carries a scalar stake of the asset game into the reduced game:
    /// `M -> M (x1, x2)`.
    pub fn map_stake(&self, stake: &Rat, n: usize, key: &NodeKey) -> Stake {
        let (x1, x2) = self.ticket_values(n, key);
        Quantity::Vector(vec![stake * x1, stake * x2])
    }

    /// Reduced-game node for an asset-game node (the move order swaps:
    /// asset index 1 = up, label index 0 = up).
    pub fn reduced_key(&self, original: &NodeKey) -> NodeKey {
        NodeKey::from_counts(vec![original.count(1), original.count(0)])
    }

    /// Asset-game move sequence rewritten as label indices.
    pub fn reduced_path(&self, original: &[usize]) -> Vec<usize> {
        original.iter().map(|&i| 1 - i).collect()
    }

    /// The payoff the reduced game must replicate: the original payoff
    /// read off the composition, discounted by `r^N`.
    pub fn discounted_payoff(&self, payoff: &Payoff) -> Payoff {
        let crr = self.crr.clone();
        let payoff = payoff.clone();
        Payoff::from_result_fn(move |state| {
            let comp = state.vector().ok_or_else(|| Error::PayoffUndefined {
                state: crate::game::render_state(state),
            })?;
            let ups = comp[0].to_integer();
            let downs = comp[1].to_integer();
            let s = &crr.s0
                * num::pow::pow(crr.u.clone(), usize::try_from(ups).unwrap_or(0))
                * num::pow::pow(crr.d.clone(), usize::try_from(downs).unwrap_or(0));
            let v = payoff.eval(&Quantity::Scalar(s))?;
            Ok(v / num::pow::pow(crr.r.clone(), crr.horizon))
        })
    }
}
