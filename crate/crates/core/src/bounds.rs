//! Closed-form converse and baseline loads, coding gains, and the LP that
//! turns per-demand bounds into the memory-load trade-off.
//!
//! Functions taking bare `(K, alpha, t)` are not limited to `K <= 20`; they
//! report [`Error::Overflow`] once a binomial no longer fits.

use alloc::vec::Vec;

use crate::combinatorics::checked_binom;
use crate::fds::FdsStructure;
use crate::{Error, Rational, Result};

fn range(what: &'static str, value: u32, min: u32, max: u32) -> Result<()> {
    if value < min || value > max {
        return Err(Error::OutOfRange {
            what,
            value: i64::from(value),
            min: i64::from(min),
            max: i64::from(max),
        });
    }
    Ok(())
}

fn check_kat(k: u32, alpha: u32, t: u32) -> Result<()> {
    range("K", k, 1, u32::MAX)?;
    range("alpha", alpha, 1, k)?;
    range("t", t, 0, alpha)
}

fn cb(n: u32, k: i64) -> Result<u128> {
    checked_binom(i64::from(n), k).ok_or(Error::Overflow)
}

fn q(n: i64, d: i64) -> Result<Rational> {
    Rational::new(n, d)
}

/// Converse corner value `(binom(a, t+1) + (K - a) binom(a-1, t)) / binom(a, t)`.
pub fn r_lb(k: u32, alpha: u32, t: u32) -> Result<Rational> {
    check_kat(k, alpha, t)?;
    let t64 = i64::from(t);
    let num = cb(alpha, t64 + 1)?
        .checked_add(
            u128::from(k - alpha)
                .checked_mul(cb(alpha - 1, t64)?)
                .ok_or(Error::Overflow)?,
        )
        .ok_or(Error::Overflow)?;
    Rational::from_counts(num, cb(alpha, t64)?)
}

/// The same value written as `K (1 - g_a) ((K - a) g + 1) / (K g + 1)` with
/// `g = t/K`, `g_a = t/a`.
pub fn r_lb_factored(k: u32, alpha: u32, t: u32) -> Result<Rational> {
    check_kat(k, alpha, t)?;
    let (k, a, t) = (i64::from(k), i64::from(alpha), i64::from(t));
    let gamma = q(t, k)?;
    let gamma_a = q(t, a)?;
    let kr = Rational::integer(k);
    let head = kr.checked_mul(&Rational::ONE.checked_sub(&gamma_a)?)?;
    let det = Rational::integer(k - a).checked_mul(&gamma)?.checked_add(&Rational::ONE)?;
    let man = kr.checked_mul(&gamma)?.checked_add(&Rational::ONE)?;
    head.checked_mul(&det)?.checked_div(&man)
}

/// Corner point of a memory-load curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TradeoffPoint {
    pub t: u32,
    /// Cache size in file units, `tN/K`.
    pub memory: Rational,
    pub load: Rational,
}

/// Piecewise-linear curve through corner points sorted by memory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TradeoffCurve {
    points: Vec<TradeoffPoint>,
}

impl TradeoffCurve {
    pub fn points(&self) -> &[TradeoffPoint] {
        &self.points
    }

    /// Linear interpolation between the two corners around `memory`.
    pub fn eval_at(&self, memory: Rational) -> Result<Rational> {
        let first = self.points.first().ok_or(Error::ShapeMismatch)?;
        let last = self.points.last().ok_or(Error::ShapeMismatch)?;
        if memory < first.memory || memory > last.memory {
            return Err(Error::OutOfRange {
                what: "M",
                value: memory.floor(),
                min: first.memory.floor(),
                max: last.memory.floor(),
            });
        }
        for w in self.points.windows(2) {
            let (a, b) = (w[0], w[1]);
            if memory <= b.memory {
                let frac = memory.checked_sub(&a.memory)?.checked_div(&b.memory.checked_sub(&a.memory)?)?;
                return a.load.checked_add(&frac.checked_mul(&b.load.checked_sub(&a.load)?)?);
            }
        }
        Ok(last.load)
    }
}

/// The `alpha + 1` converse corners `(tN/K, r_lb(K, alpha, t))`.
pub fn r_lb_curve(s: &FdsStructure) -> Result<TradeoffCurve> {
    let n = i64::try_from(s.library_size()).map_err(|_| Error::Overflow)?;
    let k = i64::from(s.users());
    let points = (0..=s.alpha())
        .map(|t| {
            Ok(TradeoffPoint {
                t,
                memory: Rational::integer(i64::from(t)).checked_mul(&q(n, k)?)?,
                load: r_lb(s.users(), s.alpha(), t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(TradeoffCurve { points })
}

/// MAN load `binom(K, t+1) / binom(K, t) = (K - t) / (t + 1)`.
pub fn r_man(k: u32, t: u32) -> Result<Rational> {
    range("K", k, 1, u32::MAX)?;
    range("t", t, 0, k)?;
    q(i64::from(k - t), i64::from(t) + 1)
}

/// Uncoded delivery after unselfish placement: `K - t`.
pub fn uncoded_unselfish(k: u32, t: u32) -> Result<Rational> {
    range("K", k, 1, u32::MAX)?;
    range("t", t, 0, k)?;
    Ok(Rational::integer(i64::from(k - t)))
}

/// Uncoded delivery after selfish placement: `K - Kt/alpha`.
pub fn uncoded_selfish(k: u32, alpha: u32, t: u32) -> Result<Rational> {
    check_kat(k, alpha, t)?;
    q(i64::from(k) * i64::from(alpha - t), i64::from(alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UncodedLoads {
    pub unselfish: Rational,
    pub selfish: Rational,
}

pub fn uncoded_loads(k: u32, alpha: u32, t: u32) -> Result<UncodedLoads> {
    Ok(UncodedLoads { unselfish: uncoded_unselfish(k, t)?, selfish: uncoded_selfish(k, alpha, t)? })
}

/// `r_lb / r_man = 1 + t (K - a)(a - 1 - t) / (a (K - t))` for
/// `1 <= a <= K - 1`, `0 <= t <= a - 1`.
pub fn ratio_to_man(k: u32, alpha: u32, t: u32) -> Result<Rational> {
    range("K", k, 2, u32::MAX)?;
    range("alpha", alpha, 1, k - 1)?;
    range("t", t, 0, alpha - 1)?;
    let (k, a, t) = (i64::from(k), i64::from(alpha), i64::from(t));
    let extra = q(t * (k - a) * (a - 1 - t), a * (k - t))?;
    Rational::ONE.checked_add(&extra)
}

/// Coding-gain bound of selfish caching against its deterioration factor.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct GainSummary {
    /// `(K g + 1) / ((K - a) g + 1)`.
    pub bound: Rational,
    /// `(K - a) g + 1`.
    pub deterioration: Rational,
    /// `K / (K - a)`; `None` when `a = K`.
    pub limit: Option<Rational>,
    /// Unselfish MAN gain `K g + 1`.
    pub unselfish: Rational,
}

pub fn coding_gain_bound(k: u32, alpha: u32, gamma: Rational) -> Result<GainSummary> {
    range("K", k, 1, u32::MAX)?;
    range("alpha", alpha, 1, k)?;
    let delta = q(i64::from(alpha), i64::from(k))?;
    if gamma < 0 || gamma > delta {
        return Err(Error::OutOfRange { what: "gamma", value: gamma.floor(), min: 0, max: delta.floor() });
    }
    let kr = Rational::integer(i64::from(k));
    let unselfish = kr.checked_mul(&gamma)?.checked_add(&Rational::ONE)?;
    let deterioration =
        Rational::integer(i64::from(k - alpha)).checked_mul(&gamma)?.checked_add(&Rational::ONE)?;
    let limit = (alpha < k).then(|| q(i64::from(k), i64::from(k - alpha))).transpose()?;
    Ok(GainSummary { bound: unselfish.checked_div(&deterioration)?, deterioration, unselfish, limit })
}

/// `f(t) = N c_t`, the converse coefficient; equal to [`r_lb`].
pub fn f_coefficient(k: u32, alpha: u32, t: u32) -> Result<Rational> {
    r_lb(k, alpha, t)
}

/// Weight of the `l`-th term in the sum form of `f(t)`: `binom(l-1, t-1)`,
/// except that `t = 0` keeps only `l = 0` with weight 1.
fn lsum_weight(l: u32, t: u32) -> Result<u128> {
    if t == 0 {
        Ok(u128::from(l == 0))
    } else {
        cb(l - 1, i64::from(t) - 1)
    }
}

/// `f(t)` as `(1 / binom(a, t)) * sum_{l=t}^{a-1} w(l, t) (K - l)`.
pub fn f_coefficient_lsum(k: u32, alpha: u32, t: u32) -> Result<Rational> {
    check_kat(k, alpha, t)?;
    let mut acc: u128 = 0;
    for l in t..alpha {
        let term = lsum_weight(l, t)?.checked_mul(u128::from(k - l)).ok_or(Error::Overflow)?;
        acc = acc.checked_add(term).ok_or(Error::Overflow)?;
    }
    Rational::from_counts(acc, cb(alpha, i64::from(t))?)
}

/// `c_t = f(t) / N`.
pub fn c_coefficient(s: &FdsStructure, t: u32) -> Result<Rational> {
    let n = i64::try_from(s.library_size()).map_err(|_| Error::Overflow)?;
    f_coefficient(s.users(), s.alpha(), t)?.checked_div(&Rational::integer(n))
}

/// `KM/N`, checked to lie in `[0, alpha]`.
fn redundancy(s: &FdsStructure, memory: Rational) -> Result<Rational> {
    let n = i64::try_from(s.library_size()).map_err(|_| Error::Overflow)?;
    let m = memory.checked_mul(&q(i64::from(s.users()), n)?)?;
    if m < 0 || m > i64::from(s.alpha()) {
        let fds = i64::try_from(s.fds_size()).map_err(|_| Error::Overflow)?;
        return Err(Error::OutOfRange { what: "M", value: memory.floor(), min: 0, max: fds });
    }
    Ok(m)
}

/// Optimum of `min sum f(t) x_t` s.t. `sum x_t = 1`, `sum t x_t <= KM/N`,
/// `x >= 0`: since `f` is convex and decreasing, the linear interpolation of
/// `f` at `KM/N`.
pub fn lp_lower_bound(s: &FdsStructure, memory: Rational) -> Result<Rational> {
    let m = redundancy(s, memory)?;
    let (k, a) = (s.users(), s.alpha());
    let i = m.floor() as u32;
    let fi = f_coefficient(k, a, i)?;
    if i == a {
        return Ok(fi);
    }
    let frac = m.checked_sub(&Rational::from(i))?;
    fi.checked_add(&frac.checked_mul(&f_coefficient(k, a, i + 1)?.checked_sub(&fi)?)?)
}

/// The same LP solved by evaluating every vertex of the feasible region:
/// single-support points `t <= KM/N` and two-support points with the memory
/// constraint tight.
pub fn lp_vertex_enumeration(s: &FdsStructure, memory: Rational) -> Result<Rational> {
    let m = redundancy(s, memory)?;
    let (k, a) = (s.users(), s.alpha());
    let f = (0..=a).map(|t| f_coefficient(k, a, t)).collect::<Result<Vec<_>>>()?;
    let mut best: Option<Rational> = None;
    let mut consider = |v: Rational| {
        if best.is_none_or(|b| v < b) {
            best = Some(v);
        }
    };
    for i in 0..=a {
        let ri = Rational::from(i);
        if ri > m {
            continue;
        }
        consider(f[i as usize]);
        for j in i + 1..=a {
            let rj = Rational::from(j);
            if rj < m {
                continue;
            }
            let xj = m.checked_sub(&ri)?.checked_div(&rj.checked_sub(&ri)?)?;
            let xi = Rational::ONE.checked_sub(&xj)?;
            consider(xi.checked_mul(&f[i as usize])?.checked_add(&xj.checked_mul(&f[j as usize])?)?);
        }
    }
    best.ok_or(Error::ShapeMismatch)
}
