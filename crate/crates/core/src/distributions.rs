//! Closed-form discrete distributions and exact expectations.
//!
//! Weights are exact rationals built from arbitrary-precision
//! factorials and falling factorials; constructors drop zero-weight
//! support points so that distributions compare exactly against
//! game-derived ones.

use std::collections::BTreeMap;
use std::fmt;

use num::{BigInt, One, Signed, Zero};

use crate::error::Error;
use crate::game::Quantity;
use crate::payoff::Payoff;
use crate::rational::{decimal_string, int, render_rat, Rat};

/// A support point: an integer or an integer vector (a composition).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum PmfPoint {
    Int(i64),
    Vector(Vec<i64>),
}

impl PmfPoint {
    pub fn to_state(&self) -> Quantity {
        match self {
            PmfPoint::Int(m) => Quantity::Scalar(int(*m)),
            PmfPoint::Vector(v) => Quantity::Vector(v.iter().map(|&m| int(m)).collect()),
        }
    }
}

impl fmt::Display for PmfPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PmfPoint::Int(m) => write!(f, "{m}"),
            PmfPoint::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|m| m.to_string()).collect();
                write!(f, "{}", parts.join(" "))
            }
        }
    }
}

/// Finite-support probability mass function with exact rational
/// weights. Weights are positive (zeros dropped) and sum to one; the
/// support is sorted and homogeneous in shape.
#[derive(Clone, Debug, PartialEq)]
pub struct Pmf {
    points: Vec<(PmfPoint, Rat)>,
}

impl Pmf {
    pub fn new(raw: Vec<(PmfPoint, Rat)>) -> Result<Self, Error> {
        let mut merged: BTreeMap<PmfPoint, Rat> = BTreeMap::new();
        let mut shape: Option<Option<usize>> = None;
        for (pt, w) in raw {
            if w.is_negative() {
                return Err(Error::InvalidPmf(format!("negative weight at {pt}")));
            }
            let this_shape = match &pt {
                PmfPoint::Int(_) => None,
                PmfPoint::Vector(v) => Some(v.len()),
            };
            match &shape {
                None => shape = Some(this_shape),
                Some(s) if *s == this_shape => {}
                _ => return Err(Error::InvalidPmf("mixed support shapes".into())),
            }
            if w.is_zero() {
                continue;
            }
            *merged.entry(pt).or_insert_with(Rat::zero) += w;
        }
        let total: Rat = merged.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidPmf(format!(
                "weights sum to {}, not 1",
                render_rat(&total)
            )));
        }
        Ok(Pmf {
            points: merged.into_iter().collect(),
        })
    }

    pub fn points(&self) -> impl Iterator<Item = (&PmfPoint, &Rat)> {
        self.points.iter().map(|(p, w)| (p, w))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Weight at a point (zero off the support).
    pub fn weight(&self, pt: &PmfPoint) -> Rat {
        self.points
            .iter()
            .find(|(p, _)| p == pt)
            .map(|(_, w)| w.clone())
            .unwrap_or_else(Rat::zero)
    }

    /// Pushforward along a map of support points.
    pub fn map_points(&self, f: impl Fn(&PmfPoint) -> PmfPoint) -> Result<Pmf, Error> {
        Pmf::new(self.points.iter().map(|(p, w)| (f(p), w.clone())).collect())
    }

    /// `value,weight` lines; an extra decimal column when requested.
    pub fn to_csv(&self, decimals: Option<u32>) -> String {
        let mut out = String::new();
        match decimals {
            None => out.push_str("value,weight\n"),
            Some(_) => out.push_str("value,weight,weight_decimal\n"),
        }
        for (pt, w) in &self.points {
            match decimals {
                None => out.push_str(&format!("{pt},{}\n", render_rat(w))),
                Some(d) => out.push_str(&format!(
                    "{pt},{},{}\n",
                    render_rat(w),
                    decimal_string(w, d)
                )),
            }
        }
        out
    }

    pub fn to_json(&self, decimals: Option<u32>) -> serde_json::Value {
        let points: Vec<serde_json::Value> = self
            .points
            .iter()
            .map(|(pt, w)| {
                let mut obj = serde_json::Map::new();
                obj.insert("value".into(), serde_json::Value::String(pt.to_string()));
                obj.insert("weight".into(), serde_json::Value::String(render_rat(w)));
                if let Some(d) = decimals {
                    obj.insert(
                        "weight_decimal".into(),
                        serde_json::Value::String(decimal_string(w, d)),
                    );
                }
                serde_json::Value::Object(obj)
            })
            .collect();
        serde_json::json!({ "points": points })
    }
}

pub(crate) fn factorial(n: u64) -> BigInt {
    let mut acc = BigInt::one();
    for i in 2..=n {
        acc *= BigInt::from(i);
    }
    acc
}

/// Exact binomial coefficient for nonnegative integers.
pub fn choose(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut num = BigInt::one();
    let mut den = BigInt::one();
    for i in 0..k {
        num *= BigInt::from(n - i);
        den *= BigInt::from(i + 1);
    }
    num / den
}

/// Generalized binomial coefficient `r (r-1) ... (r-k+1) / k!` for
/// rational `r`; equals the ordinary coefficient at integer `r >= 0`.
pub fn generalized_binomial(r: &Rat, k: usize) -> Rat {
    let mut num = Rat::one();
    for i in 0..k {
        num *= r - int(i as i64);
    }
    num / Rat::from_integer(factorial(k as u64))
}

/// Binomial distribution on `{0, ..., n}` with success probability `p`.
pub fn binomial_pmf(n: usize, p: &Rat) -> Result<Pmf, Error> {
    if p.is_negative() || p > &Rat::one() {
        return Err(Error::InvalidSpec(
            "success probability must lie in [0, 1]".into(),
        ));
    }
    let q = Rat::one() - p;
    let mut points = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let w = Rat::from_integer(choose(n as u64, m as u64))
            * num::pow::pow(p.clone(), m)
            * num::pow::pow(q.clone(), n - m);
        points.push((PmfPoint::Int(m as i64), w));
    }
    Pmf::new(points)
}

/// Hypergeometric distribution of red draws in `n` draws without
/// replacement from `nu1` red and `nu2` black balls.
pub fn hypergeometric_pmf(nu1: u64, nu2: u64, n: usize) -> Result<Pmf, Error> {
    let n64 = n as u64;
    if nu1 + nu2 < n64 {
        return Err(Error::InvalidSpec(
            "cannot draw more balls than the urn holds".into(),
        ));
    }
    let den = choose(nu1 + nu2, n64);
    let lo = n64.saturating_sub(nu2);
    let hi = nu1.min(n64);
    let mut points = Vec::new();
    for m in lo..=hi {
        let w = Rat::new(choose(nu1, m) * choose(nu2, n64 - m), den.clone());
        points.push((PmfPoint::Int(m as i64), w));
    }
    Pmf::new(points)
}

/// Polya urn distribution of red draws: `c` same-colour balls are added
/// after each draw. `c = 0` delegates to the binomial, `c = -1` equals
/// the hypergeometric; otherwise the generalized-coefficient formula
/// over the full range `{0, ..., n}` applies.
pub fn polya_pmf(nu1: u64, nu2: u64, c: i64, n: usize) -> Result<Pmf, Error> {
    if c == 0 {
        if nu1 + nu2 == 0 {
            return Err(Error::InvalidSpec("empty urn".into()));
        }
        let p = Rat::new(BigInt::from(nu1), BigInt::from(nu1 + nu2));
        return binomial_pmf(n, &p);
    }
    let c_rat = int(c);
    let top = -int(nu1 as i64) / &c_rat;
    let bottom = -int(nu2 as i64) / &c_rat;
    let whole = -int((nu1 + nu2) as i64) / &c_rat;
    let den = generalized_binomial(&whole, n);
    if den.is_zero() {
        return Err(Error::InvalidSpec(
            "urn parameters make the normalizing coefficient vanish".into(),
        ));
    }
    let mut points = Vec::with_capacity(n + 1);
    for m in 0..=n {
        let w = generalized_binomial(&top, m) * generalized_binomial(&bottom, n - m) / &den;
        points.push((PmfPoint::Int(m as i64), w));
    }
    Pmf::new(points)
}

fn compositions(n: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for mut rest in compositions(n - first, parts - 1) {
            let mut v = Vec::with_capacity(parts);
            v.push(first);
            v.append(&mut rest);
            out.push(v);
        }
    }
    out
}

/// Multinomial distribution over compositions `(m_1, ..., m_d)` of `n`
/// with cell probabilities `p`.
pub fn multinomial_pmf(n: usize, p: &[Rat]) -> Result<Pmf, Error> {
    if p.len() < 2 {
        return Err(Error::InvalidSpec("need at least two labels".into()));
    }
    if p.iter().any(|pi| pi.is_negative()) || p.iter().sum::<Rat>() != Rat::one() {
        return Err(Error::InvalidSpec(
            "label probabilities must lie in the simplex".into(),
        ));
    }
    let mut points = Vec::new();
    for comp in compositions(n as u32, p.len()) {
        let mut coeff = Rat::from_integer(factorial(n as u64));
        for &m in &comp {
            coeff /= Rat::from_integer(factorial(u64::from(m)));
        }
        let mut w = coeff;
        for (pi, &m) in p.iter().zip(comp.iter()) {
            w *= num::pow::pow(pi.clone(), m as usize);
        }
        points.push((
            PmfPoint::Vector(comp.iter().map(|&m| i64::from(m)).collect()),
            w,
        ));
    }
    Pmf::new(points)
}

/// Exact expectation of a payoff under a mass function.
pub fn expectation(pmf: &Pmf, payoff: &Payoff) -> Result<Rat, Error> {
    let mut acc = Rat::zero();
    for (pt, w) in pmf.points() {
        acc += payoff.eval(&pt.to_state())? * w;
    }
    Ok(acc)
}
