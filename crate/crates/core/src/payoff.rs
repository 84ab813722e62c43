//! Payoffs of European claims: total functions of the terminal state.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num::{Signed, Zero};

use crate::error::Error;
use crate::game::{render_state, Quantity};
use crate::rational::{int, Rat};

type PayoffFn = Arc<dyn Fn(&Quantity) -> Result<Rat, Error> + Send + Sync>;

/// A payoff: either a finite table over terminal states or a function.
/// Tables report an error on states they do not cover.
#[derive(Clone)]
pub enum Payoff {
    Table(BTreeMap<Quantity, Rat>),
    Fn(PayoffFn),
}

impl fmt::Debug for Payoff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Payoff::Table(t) => write!(f, "Payoff::Table({} entries)", t.len()),
            Payoff::Fn(_) => write!(f, "Payoff::Fn"),
        }
    }
}

impl Payoff {
    pub fn eval(&self, state: &Quantity) -> Result<Rat, Error> {
        match self {
            Payoff::Table(t) => t.get(state).cloned().ok_or_else(|| Error::PayoffUndefined {
                state: render_state(state),
            }),
            Payoff::Fn(f) => f(state),
        }
    }

    pub fn table(entries: BTreeMap<Quantity, Rat>) -> Self {
        Payoff::Table(entries)
    }

    pub fn from_result_fn(
        f: impl Fn(&Quantity) -> Result<Rat, Error> + Send + Sync + 'static,
    ) -> Self {
        Payoff::Fn(Arc::new(f))
    }

    pub fn from_fn(f: impl Fn(&Quantity) -> Rat + Send + Sync + 'static) -> Self {
        Payoff::Fn(Arc::new(move |s| Ok(f(s))))
    }

    /// Payoff of a scalar terminal state; errors on vector states.
    pub fn from_scalar_fn(f: impl Fn(&Rat) -> Rat + Send + Sync + 'static) -> Self {
        Payoff::Fn(Arc::new(move |s| {
            s.scalar().map(&f).ok_or_else(|| Error::PayoffUndefined {
                state: render_state(s),
            })
        }))
    }

    pub fn constant(c: Rat) -> Self {
        Payoff::from_fn(move |_| c.clone())
    }

    /// `S` itself.
    pub fn identity() -> Self {
        Payoff::from_scalar_fn(|s| s.clone())
    }

    /// `S^k`.
    pub fn power(k: usize) -> Self {
        Payoff::from_scalar_fn(move |s| num::pow::pow(s.clone(), k))
    }

    /// Call option `max(S - strike, 0)`.
    pub fn call(strike: Rat) -> Self {
        Payoff::from_scalar_fn(move |s| {
            let diff = s - &strike;
            if diff.is_positive() {
                diff
            } else {
                Rat::zero()
            }
        })
    }

    /// Put option `max(strike - S, 0)`.
    pub fn put(strike: Rat) -> Self {
        Payoff::from_scalar_fn(move |s| {
            let diff = &strike - s;
            if diff.is_positive() {
                diff
            } else {
                Rat::zero()
            }
        })
    }

    /// Digital option: pays 1 when `S >= strike`.
    pub fn digital(strike: Rat) -> Self {
        Payoff::from_scalar_fn(move |s| if s >= &strike { int(1) } else { int(0) })
    }

    /// Indicator of `|S / n| <= eps`.
    pub fn band(n: usize, eps: Rat) -> Self {
        let bound = eps * int(n as i64);
        Payoff::from_scalar_fn(move |s| if s.abs() <= bound { int(1) } else { int(0) })
    }

    /// `-self`.
    pub fn negate(&self) -> Self {
        let inner = self.clone();
        Payoff::from_result_fn(move |s| inner.eval(s).map(|v| -v))
    }

    /// Linear combination `a*p1 + b*p2`.
    pub fn combine(a: Rat, p1: &Payoff, b: Rat, p2: &Payoff) -> Self {
        let (p1, p2) = (p1.clone(), p2.clone());
        Payoff::from_result_fn(move |s| Ok(&a * p1.eval(s)? + &b * p2.eval(s)?))
    }
}
