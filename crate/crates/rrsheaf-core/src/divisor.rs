//! Divisor arithmetic on the graph with two vertices and `r` parallel edges.
//!
//! A divisor is an integer pair `d = (d1, d2)` of coefficients on the two
//! vertices.  Firing one vertex moves `r` chips across, so linear equivalence
//! is generated by the single vector `(r, -r)`, the canonical divisor is
//! `K_r = (r-2, r-2)`, and the genus is `r - 1`.
//!
//! The rank of a divisor is computed here by three independent routes that
//! the test suite plays against each other:
//!
//! - [`grrr_bruteforce`]: the definition.  Rank is the largest `k` such that
//!   `d - m` stays equivalent to an effective divisor for every effective `m`
//!   of degree `k`.  Slow and trusted.
//! - [`grrr_closed`]: normalize `d2` into `[0, r-1]` by equivalence shifts,
//!   then read the rank off a three-case formula.
//! - [`grrr_recursive`]: peel one chip at a time, taking the worse of the two
//!   vertices, with memoization.
//!
//! A fourth route counts lattice points: the down-set of `d` in the monoid
//! of points `(i, n)`, `1 <= i <= r`, `n` an integer, embedded as
//! `n*(r, -r) + (i-1, i-1)`, has exactly `rank + 1` elements
//! ([`lat_count`], [`down_cone_points`]).

use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use crate::{Error, Result};

/// Number of parallel edges between the two vertices; always at least one.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeCount(i64);

impl EdgeCount {
    pub fn new(r: i64) -> Result<Self> {
        if r >= 1 {
            Ok(EdgeCount(r))
        } else {
            Err(Error::InvalidEdgeCount(r))
        }
    }

    pub fn get(self) -> i64 {
        self.0
    }
}

impl fmt::Display for EdgeCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// A divisor `(d1, d2)` on the two vertices.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Divisor {
    pub d1: i64,
    pub d2: i64,
}

impl Divisor {
    pub fn new(d1: i64, d2: i64) -> Self {
        Divisor { d1, d2 }
    }

    pub fn deg(self) -> i64 {
        self.d1 + self.d2
    }

    /// The equivalence generator `(r, -r)` scaled by `m`.
    fn shift(r: EdgeCount, m: i64) -> Self {
        Divisor::new(m * r.get(), -m * r.get())
    }
}

impl Add for Divisor {
    type Output = Divisor;
    fn add(self, o: Divisor) -> Divisor {
        Divisor::new(self.d1 + o.d1, self.d2 + o.d2)
    }
}

impl Sub for Divisor {
    type Output = Divisor;
    fn sub(self, o: Divisor) -> Divisor {
        Divisor::new(self.d1 - o.d1, self.d2 - o.d2)
    }
}

impl Neg for Divisor {
    type Output = Divisor;
    fn neg(self) -> Divisor {
        Divisor::new(-self.d1, -self.d2)
    }
}

impl fmt::Display for Divisor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.d1, self.d2)
    }
}

/// A point of the rank lattice: sheet `i` in `1..=r` and height `n`.
///
/// Embedded into divisors as `n*(r, -r) + (i-1, i-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LatticePoint {
    pub i: i64,
    pub n: i64,
}

impl LatticePoint {
    pub fn divisor(self, r: EdgeCount) -> Divisor {
        Divisor::new(self.n * r.get() + self.i - 1, -self.n * r.get() + self.i - 1)
    }
}

/// The canonical divisor `K_r = (r-2, r-2)`.
pub fn canonical_divisor(r: EdgeCount) -> Divisor {
    Divisor::new(r.get() - 2, r.get() - 2)
}

/// Genus of the graph, `r - 1`.
pub fn genus(r: EdgeCount) -> i64 {
    r.get() - 1
}

pub(crate) fn floor_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    a.div_euclid(b)
}

pub(crate) fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

/// The unique equivalent divisor with second coefficient in `[0, r-1]`,
/// together with the shift multiple applied: returns `(d', m)` with
/// `d' = d + m*(r, -r)`.
pub fn normalize(r: EdgeCount, d: Divisor) -> (Divisor, i64) {
    let m = floor_div(d.d2, r.get());
    (d + Divisor::shift(r, m), m)
}

/// Whether `d` is equivalent to an effective divisor, decided by scanning
/// every shift multiple that could possibly work.
fn effective_equivalent(r: EdgeCount, d: Divisor) -> bool {
    if d.deg() < 0 {
        return false;
    }
    let bound = (d.d1.abs() + d.d2.abs()) / r.get() + 2;
    (-bound..=bound).any(|m| {
        let s = d + Divisor::shift(r, m);
        s.d1 >= 0 && s.d2 >= 0
    })
}

/// Rank by definition: the largest `k` such that removing any effective
/// divisor of degree `k` leaves something equivalent to an effective
/// divisor; `-1` when `d` itself already fails.  Levels are capped at
/// `deg(d) + 1`, which is always past the first failure.
pub fn grrr_bruteforce(r: EdgeCount, d: Divisor) -> i64 {
    if !effective_equivalent(r, d) {
        return -1;
    }
    let deg = d.deg();
    let mut k = 1;
    while k <= deg + 1 {
        for a in 0..=k {
            if !effective_equivalent(r, d - Divisor::new(a, k - a)) {
                return k - 1;
            }
        }
        k += 1;
    }
    deg
}

/// Rank in closed form.
///
/// After normalizing so `0 <= d2 <= r-1`:
/// - `d1 <= -1` gives rank `-1`;
/// - `0 <= d1 <= r-1` gives `min(d1, d2)`;
/// - `d1 >= r-1` gives `d1 + d2 - r + 1`.
///
/// The middle and last cases agree at `d1 = r-1`.
pub fn grrr_closed(r: EdgeCount, d: Divisor) -> i64 {
    let (n, _) = normalize(r, d);
    debug_assert!(0 <= n.d2 && n.d2 < r.get());
    if n.d1 < 0 {
        -1
    } else if n.d1 < r.get() {
        n.d1.min(n.d2)
    } else {
        n.d1 + n.d2 - r.get() + 1
    }
}

fn equivalent_to_zero(r: EdgeCount, d: Divisor) -> bool {
    d.deg() == 0 && d.d1.rem_euclid(r.get()) == 0
}

/// Rank by the one-chip recursion, memoized: peel a chip off either vertex
/// and take `1 + min` of the two subranks, bottoming out at degree zero.
///
/// The recursion step `rank(d) = 1 + min(rank(d-e1), rank(d-e2))` is only
/// valid when `d` has an effective representative.  For `r >= 3` there are
/// positive-degree divisors without one (`(2, -1)` at `r = 3`: the shift
/// grid skips every effective point), and on those the naive recursion
/// returns `0` instead of `-1` and then overcounts every ancestor.  So every
/// level starts with the equivalence test.
pub fn grrr_recursive(r: EdgeCount, d: Divisor) -> i64 {
    fn go(r: EdgeCount, d: Divisor, memo: &mut HashMap<Divisor, i64>) -> i64 {
        if let Some(v) = memo.get(&d) {
            return *v;
        }
        let v = if !effective_equivalent(r, d) {
            -1
        } else if d.deg() == 0 {
            debug_assert!(equivalent_to_zero(r, d));
            0
        } else {
            let a = go(r, d - Divisor::new(1, 0), memo);
            let b = go(r, d - Divisor::new(0, 1), memo);
            1 + a.min(b)
        };
        memo.insert(d, v);
        v
    }
    go(r, d, &mut HashMap::new())
}

/// For sheet `i` (1-based), the inclusive height range `[lo, hi]` of lattice
/// points under `d`, empty when `lo > hi`.
fn sheet_height_range(r: EdgeCount, d: Divisor, i: i64) -> (i64, i64) {
    let lo = ceil_div(i - 1 - d.d2, r.get());
    let hi = floor_div(d.d1 - i + 1, r.get());
    (lo, hi)
}

/// Number of lattice points `(i, n)` whose embedded divisor lies under `d`
/// componentwise.  Always equals rank plus one.
pub fn lat_count(r: EdgeCount, d: Divisor) -> i64 {
    (1..=r.get())
        .map(|i| {
            let (lo, hi) = sheet_height_range(r, d, i);
            (hi - lo + 1).max(0)
        })
        .sum()
}

/// The lattice points counted by [`lat_count`], sorted by `(i, n)`.
pub fn down_cone_points(r: EdgeCount, d: Divisor) -> Vec<LatticePoint> {
    let mut out = Vec::new();
    for i in 1..=r.get() {
        let (lo, hi) = sheet_height_range(r, d, i);
        for n in lo..=hi {
            out.push(LatticePoint { i, n });
        }
    }
    out
}

/// Ranks of every divisor in the inclusive box `[lo1, hi1] x [lo2, hi2]`,
/// emitted row-major by `(d2, d1)` (the order plotting tools expect).
pub fn level_sets(r: EdgeCount, lo: Divisor, hi: Divisor) -> Vec<(Divisor, i64)> {
    let mut out = Vec::new();
    for d2 in lo.d2..=hi.d2 {
        for d1 in lo.d1..=hi.d1 {
            let d = Divisor::new(d1, d2);
            out.push((d, grrr_closed(r, d)));
        }
    }
    out
}

/// The level set `S_i` inside a box: all divisors there with rank exactly
/// `i`, in the same row-major order as [`level_sets`].
pub fn level_set_points(r: EdgeCount, i: i64, lo: Divisor, hi: Divisor) -> Vec<Divisor> {
    level_sets(r, lo, hi)
        .into_iter()
        .filter(|(_, rank)| *rank == i)
        .map(|(d, _)| d)
        .collect()
}
