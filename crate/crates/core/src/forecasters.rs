//! Neutral forecasting strategies: price rules that depend only on the
//! round and on Reality's past moves (through the node counts), never
//! on Skeptic's stakes.
//!
//! Every rule here emits a price in `[0, 1]` (or in the probability
//! simplex), so the games they drive are coherent by construction;
//! degenerate prices show up as forced moves, never as arbitrage.

use std::collections::BTreeMap;

use num::{One, Signed, Zero};

use crate::distributions::{Pmf, PmfPoint};
use crate::error::Error;
use crate::game::{NodeKey, Price, Quantity};
use crate::rational::Rat;

/// Urn composition: `nu1` red balls, `nu2` black balls, and the number
/// `c` of same-colour balls added after each draw (`0` = with
/// replacement, `-1` = without replacement, positive = Polya).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UrnParams {
    pub nu1: u64,
    pub nu2: u64,
    pub c: i64,
}

/// A forecasting strategy. All variants are functions of `(round, node)`.
#[derive(Clone, Debug, PartialEq)]
pub enum Forecaster {
    /// No forecaster: offset and asset games, where the price is
    /// implied by the capital rule.
    None,
    Constant {
        p: Rat,
    },
    /// Sampling without replacement (`c = -1`).
    Urn {
        params: UrnParams,
    },
    /// Polya urn (`c >= 0`; `c = 0` is drawing with replacement).
    Polya {
        params: UrnParams,
    },
    Staircase {
        staircase: Staircase,
    },
    ConstantVector {
        p: Vec<Rat>,
    },
    Chained {
        chained: ChainedForecaster,
    },
    /// Per-node simplex prices of the discounted two-label reduction of
    /// an asset game.
    CrrReduced {
        s0: Rat,
        u: Rat,
        d: Rat,
        r: Rat,
    },
}

impl Forecaster {
    /// Quoted price for round `n` at node `key` (one round earlier).
    pub fn price(&self, n: usize, key: &NodeKey) -> Price {
        match self {
            Forecaster::None => Quantity::zero_scalar(),
            Forecaster::Constant { p } => Quantity::Scalar(p.clone()),
            Forecaster::Urn { params } => Quantity::Scalar(urn_price(params, n, key.count(1))),
            Forecaster::Polya { params } => Quantity::Scalar(polya_price(params, n, key.count(1))),
            Forecaster::Staircase { staircase } => {
                Quantity::Scalar(staircase_price(staircase, n, key.count(1)))
            }
            Forecaster::ConstantVector { p } => Quantity::Vector(p.clone()),
            Forecaster::Chained { chained } => Quantity::Vector(chained.price(key)),
            Forecaster::CrrReduced { s0, u, d, r } => {
                let (x1, x2) = crr_reduced_tickets(s0, u, d, r, n, key);
                let span = &x1 - &x2;
                Quantity::Vector(vec![-&x2 / &span, x1 / span])
            }
        }
    }

    pub(crate) fn validate(
        &self,
        moves: &crate::game::MoveSpace,
        horizon: usize,
    ) -> Result<(), Error> {
        use crate::game::MoveSpace;
        let scalar_moves = !moves.is_vector();
        match self {
            Forecaster::None => {
                if !scalar_moves {
                    return Err(Error::InvalidSpec(
                        "multilabel games need a vector forecaster".into(),
                    ));
                }
            }
            Forecaster::Constant { .. } => {
                if !scalar_moves {
                    return Err(Error::InvalidSpec(
                        "a scalar constant price cannot serve a multilabel game".into(),
                    ));
                }
            }
            Forecaster::Urn { params } => {
                if !matches!(moves, MoveSpace::BinaryUnit) {
                    return Err(Error::InvalidSpec("urn prices apply to unit moves".into()));
                }
                if params.c != -1 {
                    return Err(Error::InvalidSpec(
                        "sampling without replacement requires c = -1".into(),
                    ));
                }
                if (params.nu1 + params.nu2) < horizon as u64 {
                    return Err(Error::InvalidSpec(
                        "the urn must hold at least as many balls as rounds".into(),
                    ));
                }
            }
            Forecaster::Polya { params } => {
                if !matches!(moves, MoveSpace::BinaryUnit) {
                    return Err(Error::InvalidSpec("urn prices apply to unit moves".into()));
                }
                if params.c < 0 {
                    return Err(Error::InvalidSpec("a Polya urn requires c >= 0".into()));
                }
                if params.nu1 == 0 || params.nu2 == 0 {
                    return Err(Error::InvalidSpec(
                        "a Polya urn requires balls of both colours".into(),
                    ));
                }
            }
            Forecaster::Staircase { staircase } => {
                if !matches!(moves, MoveSpace::BinaryUnit) {
                    return Err(Error::InvalidSpec(
                        "staircase prices apply to unit moves".into(),
                    ));
                }
                if staircase.top() > horizon {
                    return Err(Error::HorizonTooShort(format!(
                        "staircase target reaches {} but the horizon is {}",
                        staircase.top(),
                        horizon
                    )));
                }
            }
            Forecaster::ConstantVector { p } => match moves {
                MoveSpace::Multilabel { d } if p.len() == *d => {}
                _ => {
                    return Err(Error::InvalidSpec(
                        "constant vector price must match the number of labels".into(),
                    ))
                }
            },
            Forecaster::Chained { chained } => match moves {
                MoveSpace::Multilabel { d } if chained.dim() == *d => {
                    if chained.horizon() != horizon {
                        return Err(Error::InvalidSpec(
                            "chained forecaster was built for a different horizon".into(),
                        ));
                    }
                }
                _ => {
                    return Err(Error::InvalidSpec(
                        "chained forecaster must match the number of labels".into(),
                    ))
                }
            },
            Forecaster::CrrReduced { s0, u, d, r } => {
                if !matches!(moves, MoveSpace::Multilabel { d: 2 }) {
                    return Err(Error::InvalidSpec(
                        "the asset-game reduction is a two-label game".into(),
                    ));
                }
                if !(s0.is_positive() && d.is_positive() && u > d && r.is_positive()) {
                    return Err(Error::InvalidSpec(
                        "reduction requires s0 > 0, u > d > 0, and r > 0".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Discounted up/down ticket values of the asset-game reduction at a
/// two-label node: `x_i = S_{n-1} (factor_i - r) / r^n` with `e_1` the
/// up label.
pub(crate) fn crr_reduced_tickets(
    s0: &Rat,
    u: &Rat,
    d: &Rat,
    r: &Rat,
    n: usize,
    key: &NodeKey,
) -> (Rat, Rat) {
    let s_prev = s0
        * num::pow::pow(u.clone(), key.count(0) as usize)
        * num::pow::pow(d.clone(), key.count(1) as usize);
    let rn = num::pow::pow(r.clone(), n);
    let x1 = &s_prev * (u - r) / &rn;
    let x2 = &s_prev * (d - r) / rn;
    (x1, x2)
}

/// Constant price forecaster; the price must lie in `[0, 1]`.
pub fn constant_price(p: Rat) -> Result<Forecaster, Error> {
    if p.is_negative() || p > Rat::one() {
        return Err(Error::InvalidSpec(
            "a constant price outside [0, 1] would hand Skeptic an arbitrage".into(),
        ));
    }
    Ok(Forecaster::Constant { p })
}

/// Price of the next draw when sampling without replacement: the ratio
/// of red balls left, clamped at zero so that boundary states quote a
/// forced move instead of a negative price.
pub fn urn_price(params: &UrnParams, n: usize, successes: u32) -> Rat {
    debug_assert!(n >= 1);
    debug_assert_eq!(params.c, -1);
    let remaining = params.nu1 as i128 - i128::from(successes);
    let red = remaining.max(0);
    let den = params.nu1 as i128 + params.nu2 as i128 - (n as i128 - 1);
    assert!(den > 0, "more draws than balls");
    Rat::new(red.into(), den.into())
}

/// Price of the next draw from a Polya urn (`c = 0` reduces to a
/// constant price `nu1/(nu1+nu2)`).
pub fn polya_price(params: &UrnParams, n: usize, successes: u32) -> Rat {
    debug_assert!(n >= 1);
    debug_assert!(params.c >= 0);
    let c = params.c as i128;
    let num = params.nu1 as i128 + c * i128::from(successes);
    let den = params.nu1 as i128 + params.nu2 as i128 + (n as i128 - 1) * c;
    Rat::new(num.into(), den.into())
}

/// Tail-ratio representation of a distribution on `{0, ..., N}`:
/// the trimmed mass function together with the ratios
/// `ratio(m) = (q_m + ... + q_B) / (q_{m-1} + ... + q_B)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Staircase {
    pmf: Vec<Rat>,
    ratios: Vec<Rat>,
}

impl Staircase {
    /// Largest support point after trimming trailing zeros.
    pub fn top(&self) -> usize {
        self.pmf.len() - 1
    }

    /// `ratio(m)` for `m >= 1`; zero beyond the trimmed support.
    pub fn ratio(&self, m: usize) -> Rat {
        assert!(m >= 1, "ratios are indexed from 1");
        self.ratios.get(m - 1).cloned().unwrap_or_else(Rat::zero)
    }

    /// The trimmed mass function `q_0, ..., q_B`.
    pub fn pmf(&self) -> &[Rat] {
        &self.pmf
    }

    /// Rebuilds the mass function from the ratios alone:
    /// `q_m = ratio(1) ... ratio(m) (1 - ratio(m+1))`.
    pub fn reconstructed_pmf(&self) -> Vec<Rat> {
        let top = self.top();
        let mut out = Vec::with_capacity(top + 1);
        let mut product = Rat::one();
        for m in 0..=top {
            if m > 0 {
                product *= self.ratio(m);
            }
            out.push(&product * (Rat::one() - self.ratio(m + 1)));
        }
        out
    }
}

/// Builds the tail-ratio form of a distribution on `{0, ..., N}`,
/// trimming trailing zeros so the top support point has positive mass.
pub fn tail_ratios(q: &[Rat]) -> Result<Staircase, Error> {
    if q.iter().any(|w| w.is_negative()) {
        return Err(Error::InvalidPmf("negative weight".into()));
    }
    let total: Rat = q.iter().sum();
    if !total.is_one() {
        return Err(Error::InvalidPmf("weights must sum to 1".into()));
    }
    let top = match q.iter().rposition(|w| w.is_positive()) {
        Some(i) => i,
        None => return Err(Error::InvalidPmf("all weights are zero".into())),
    };
    let pmf: Vec<Rat> = q[..=top].to_vec();
    // tails[m] = q_m + ... + q_top
    let mut tails = vec![Rat::zero(); top + 2];
    for m in (0..=top).rev() {
        tails[m] = &tails[m + 1] + &pmf[m];
    }
    let ratios = (1..=top).map(|m| &tails[m] / &tails[m - 1]).collect();
    Ok(Staircase { pmf, ratios })
}

/// The staircase price rule: quote `ratio(n)` on the diagonal
/// (`successes = n - 1`, Reality has climbed every round so far) and
/// zero elsewhere, freezing the state once a climb is refused.
pub fn staircase_price(st: &Staircase, n: usize, successes: u32) -> Rat {
    if successes as usize == n - 1 {
        st.ratio(n)
    } else {
        Rat::zero()
    }
}

/// Multivariate forecaster realizing an arbitrary joint distribution of
/// the first `d - 1` labels, built coordinate by coordinate: the first
/// label climbs under its marginal staircase, later labels climb under
/// the staircase of their conditional given the realized prefix, and
/// the last label absorbs every remaining round.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainedForecaster {
    dim: usize,
    horizon: usize,
    joint: Vec<(Vec<u32>, Rat)>,
    stages: BTreeMap<Vec<u32>, Staircase>,
}

impl ChainedForecaster {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// The target joint distribution (positive-weight points only).
    pub fn joint_points(&self) -> impl Iterator<Item = (&Vec<u32>, &Rat)> {
        self.joint.iter().map(|(p, w)| (p, w))
    }

    /// Staircase governing the coordinate after the realized `prefix`.
    pub fn stage(&self, prefix: &[u32]) -> Option<&Staircase> {
        self.stages.get(prefix)
    }

    pub(crate) fn price(&self, key: &NodeKey) -> Vec<Rat> {
        let comp = key.counts();
        let d = self.dim;
        let forced_slack = || {
            let mut v = vec![Rat::zero(); d];
            v[d - 1] = Rat::one();
            v
        };
        let phase = comp[d - 1] as usize;
        if phase >= d - 1 {
            return forced_slack();
        }
        // labels after the active one must still be untouched
        if comp[phase + 1..d - 1].iter().any(|&c| c > 0) {
            return forced_slack();
        }
        let prefix = comp[..phase].to_vec();
        let Some(stage) = self.stages.get(&prefix) else {
            return forced_slack();
        };
        let climbed = comp[phase] as usize;
        let qbar = stage.ratio(climbed + 1);
        let mut p = vec![Rat::zero(); d];
        p[d - 1] = Rat::one() - &qbar;
        p[phase] = qbar;
        p
    }
}

/// Builds the chained forecaster for a joint target distribution of the
/// leading `d - 1` labels. Fails when some conditional needs more
/// climbing rounds than the horizon leaves after its prefix.
pub fn chain_conditionals(joint: &Pmf, horizon: usize) -> Result<ChainedForecaster, Error> {
    let mut points: Vec<(Vec<u32>, Rat)> = Vec::new();
    let mut coord_len = None;
    for (pt, w) in joint.points() {
        let coords: Vec<u32> = match pt {
            PmfPoint::Int(m) => {
                let m = u32::try_from(*m)
                    .map_err(|_| Error::InvalidPmf("support must be nonnegative".into()))?;
                vec![m]
            }
            PmfPoint::Vector(v) => v
                .iter()
                .map(|&m| {
                    u32::try_from(m)
                        .map_err(|_| Error::InvalidPmf("support must be nonnegative".into()))
                })
                .collect::<Result<_, _>>()?,
        };
        match coord_len {
            None => coord_len = Some(coords.len()),
            Some(l) if l == coords.len() => {}
            _ => return Err(Error::InvalidPmf("ragged support".into())),
        }
        points.push((coords, w.clone()));
    }
    let coord_len = coord_len.ok_or_else(|| Error::InvalidPmf("empty support".into()))?;
    points.sort();
    let mut stages = BTreeMap::new();
    build_stage(&points, Vec::new(), horizon, &mut stages)?;
    Ok(ChainedForecaster {
        dim: coord_len + 1,
        horizon,
        joint: points,
        stages,
    })
}

fn build_stage(
    points: &[(Vec<u32>, Rat)],
    prefix: Vec<u32>,
    rounds_left: usize,
    stages: &mut BTreeMap<Vec<u32>, Staircase>,
) -> Result<(), Error> {
    let depth = prefix.len();
    let total: Rat = points.iter().map(|(_, w)| w).sum();
    let max_first = points
        .iter()
        .map(|(v, _)| v[depth])
        .max()
        .expect("nonempty") as usize;
    let mut marginal = vec![Rat::zero(); max_first + 1];
    for (v, w) in points {
        marginal[v[depth] as usize] += w / &total;
    }
    let stage = tail_ratios(&marginal)?;
    if stage.top() > rounds_left {
        return Err(Error::HorizonTooShort(format!(
            "label {} climbs to {} but only {} rounds remain after prefix {:?}",
            depth + 1,
            stage.top(),
            rounds_left,
            prefix
        )));
    }
    stages.insert(prefix.clone(), stage);
    if depth + 1 == points[0].0.len() {
        return Ok(());
    }
    for (m, mass) in marginal.iter().enumerate() {
        if mass.is_zero() {
            continue;
        }
        let sub: Vec<(Vec<u32>, Rat)> = points
            .iter()
            .filter(|(v, _)| v[depth] as usize == m)
            .map(|(v, w)| (v.clone(), w.clone()))
            .collect();
        // climbing to m and then stopping costs m + 1 rounds, except when
        // the horizon ends exactly at the top of the climb
        let next_rounds = if m == rounds_left {
            0
        } else {
            rounds_left - m - 1
        };
        let mut next_prefix = prefix.clone();
        next_prefix.push(m as u32);
        build_stage(&sub, next_prefix, next_rounds, stages)?;
    }
    Ok(())
}
