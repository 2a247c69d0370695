//! Arithmetic-progression subsets of the integers.
//!
//! The image of a graded slot under an exponent rule `e -> a*e + b` is
//! either a finite set or an arithmetic progression that is unbounded on
//! one or both sides.  The closed-form Betti engine reasons about unions
//! and complements of such images, so this module gives them a small
//! exact calculus: membership, pairwise intersection, and counting of
//! complement points above a threshold.

use crate::sheaf::SlotSupport;

/// A subset of the integers arising as the image of a slot support under
/// an affine exponent rule.  `step` is always positive where present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum APSet {
    Empty,
    /// Finitely many points, sorted strictly increasing.
    Finite(Vec<i64>),
    /// `{start, start + step, start + 2*step, ...}`.
    HalfUp { start: i64, step: i64 },
    /// `{start, start - step, start - 2*step, ...}`.
    HalfDown { start: i64, step: i64 },
    /// `{x : x = residue (mod step)}` with `0 <= residue < step`.
    Full { residue: i64, step: i64 },
}

impl APSet {
    /// Image of `supp` under `e -> scale*e + offset`.  `scale` must be
    /// nonzero, so the image has the same cardinality as the support.
    pub fn image_of_support(supp: &SlotSupport, scale: i64, offset: i64) -> APSet {
        assert!(scale != 0, "exponent rules have nonzero scale");
        match supp {
            SlotSupport::Empty => APSet::Empty,
            SlotSupport::FiniteSet(es) => {
                let mut pts: Vec<i64> = es.iter().map(|e| scale * e + offset).collect();
                pts.sort_unstable();
                APSet::Finite(pts)
            }
            SlotSupport::NonnegativeIntegers => {
                if scale > 0 {
                    APSet::HalfUp { start: offset, step: scale }
                } else {
                    APSet::HalfDown { start: offset, step: -scale }
                }
            }
            SlotSupport::AllIntegers => {
                let step = scale.abs();
                APSet::Full { residue: offset.rem_euclid(step), step }
            }
        }
    }

    pub fn contains(&self, x: i64) -> bool {
        match self {
            APSet::Empty => false,
            APSet::Finite(pts) => pts.binary_search(&x).is_ok(),
            APSet::HalfUp { start, step } => x >= *start && (x - start).rem_euclid(*step) == 0,
            APSet::HalfDown { start, step } => x <= *start && (start - x).rem_euclid(*step) == 0,
            APSet::Full { residue, step } => x.rem_euclid(*step) == *residue,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, APSet::Empty) || matches!(self, APSet::Finite(v) if v.is_empty())
    }

    /// Whether the two sets share a point.  Exact for every case pair.
    pub fn intersects(&self, other: &APSet) -> bool {
        use APSet::*;
        match (self, other) {
            (Empty, _) | (_, Empty) => false,
            (Finite(pts), o) | (o, Finite(pts)) => pts.iter().any(|x| o.contains(*x)),
            (Full { residue: r1, step: s1 }, Full { residue: r2, step: s2 }) => {
                crt(*r1, *s1, *r2, *s2).is_some()
            }
            (Full { residue, step }, o) | (o, Full { residue, step }) => {
                // A full congruence class meets any infinite progression
                // whose class is compatible, because the other set is
                // unbounded in at least one direction.
                let (r2, s2) = o.class();
                crt(*residue, *step, r2, s2).is_some()
            }
            (HalfUp { start: a1, step: s1 }, HalfUp { start: a2, step: s2 }) => {
                crt(a1.rem_euclid(*s1), *s1, a2.rem_euclid(*s2), *s2).is_some()
            }
            (HalfDown { start: a1, step: s1 }, HalfDown { start: a2, step: s2 }) => {
                crt(a1.rem_euclid(*s1), *s1, a2.rem_euclid(*s2), *s2).is_some()
            }
            (HalfUp { start: up, step: s1 }, HalfDown { start: down, step: s2 })
            | (HalfDown { start: down, step: s2 }, HalfUp { start: up, step: s1 }) => {
                // Common points must lie in [up, down] and in the common
                // congruence class; take the least such point >= up.
                match crt(up.rem_euclid(*s1), *s1, down.rem_euclid(*s2), *s2) {
                    None => false,
                    Some((c, l)) => {
                        let first = up + (c - up).rem_euclid(l);
                        first <= *down
                    }
                }
            }
        }
    }

    /// Congruence class `(residue, step)` of an infinite progression.
    fn class(&self) -> (i64, i64) {
        match self {
            APSet::HalfUp { start, step } | APSet::HalfDown { start, step } => {
                (start.rem_euclid(*step), *step)
            }
            APSet::Full { residue, step } => (*residue, *step),
            _ => unreachable!("class() is only called on infinite sets"),
        }
    }
}

/// Solve `x = r1 (mod m1)` and `x = r2 (mod m2)`.  Returns the combined
/// class `(c, lcm)` with `0 <= c < lcm`, or `None` when incompatible.
pub fn crt(r1: i64, m1: i64, r2: i64, m2: i64) -> Option<(i64, i64)> {
    let g = gcd(m1, m2);
    if (r2 - r1).rem_euclid(g) != 0 {
        return None;
    }
    let l = m1 / g * m2;
    // Step through the class of r1 mod m1; at most m2/g candidates.
    let mut x = r1.rem_euclid(m1);
    loop {
        if x.rem_euclid(m2) == r2.rem_euclid(m2) {
            return Some((x.rem_euclid(l), l));
        }
        x += m1;
        debug_assert!(x < r1.rem_euclid(m1) + l + m1);
    }
}

pub fn gcd(a: i64, b: i64) -> i64 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

pub fn lcm(a: i64, b: i64) -> i64 {
    if a == 0 || b == 0 {
        0
    } else {
        a / gcd(a, b) * b
    }
}

/// Exact or provably infinite count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Count {
    Finite(i64),
    Infinite,
}

impl std::ops::Add for Count {
    type Output = Count;

    fn add(self, other: Count) -> Count {
        match (self, other) {
            (Count::Finite(a), Count::Finite(b)) => Count::Finite(a + b),
            _ => Count::Infinite,
        }
    }
}

impl Count {
    pub fn finite(self) -> Option<i64> {
        match self {
            Count::Finite(n) => Some(n),
            Count::Infinite => None,
        }
    }
}

/// Count the integers strictly above `threshold` that lie in none of the
/// given sets.
///
/// The count is infinite exactly when some congruence class (modulo the
/// lcm of all full or upward-unbounded steps) is eventually uncovered:
/// downward progressions and finite sets only reach finitely far above
/// the threshold, so coverage far above it is periodic.
pub fn count_uncovered_above(threshold: i64, sets: &[APSet]) -> Count {
    // Steps of the sets that cover arbitrarily large integers.
    let mut l: i64 = 1;
    for s in sets {
        match s {
            APSet::HalfUp { step, .. } | APSet::Full { step, .. } => l = lcm(l, *step),
            _ => {}
        }
    }

    // A residue class is eventually covered only by a Full set or a
    // HalfUp set in a compatible class.
    let mut eventually_covered = vec![false; l as usize];
    for s in sets {
        match s {
            APSet::Full { residue, step } => {
                for rho in 0..l {
                    if rho.rem_euclid(*step) == *residue {
                        eventually_covered[rho as usize] = true;
                    }
                }
            }
            APSet::HalfUp { start, step } => {
                for rho in 0..l {
                    if rho.rem_euclid(*step) == start.rem_euclid(*step) {
                        eventually_covered[rho as usize] = true;
                    }
                }
            }
            _ => {}
        }
    }
    if eventually_covered.iter().any(|c| !c) {
        return Count::Infinite;
    }

    // Past this bound every integer is covered: all HalfUp starts are
    // below it and every class is handled by a Full or HalfUp set.
    let mut bound = threshold;
    for s in sets {
        match s {
            APSet::HalfUp { start, .. } | APSet::HalfDown { start, .. } => {
                bound = bound.max(*start)
            }
            APSet::Finite(pts) => {
                if let Some(m) = pts.last() {
                    bound = bound.max(*m);
                }
            }
            _ => {}
        }
    }

    let mut n = 0i64;
    for x in (threshold + 1)..=bound {
        if !sets.iter().any(|s| s.contains(x)) {
            n += 1;
        }
    }
    Count::Finite(n)
}

/// Count points of `supp` satisfying both affine constraints
/// `s1*e + o1 <= c1` and `s2*e + o2 <= c2` (with nonzero scales).
/// Used for section and obstruction counts slot by slot.
pub fn count_support_under_constraints(
    supp: &SlotSupport,
    constraints: &[(i64, i64, i64)],
) -> Count {
    // Normalize each constraint (s, o, c), meaning s*e + o <= c, into an
    // interval bound on e.
    let mut lo: Option<i64> = None; // e >= lo
    let mut hi: Option<i64> = None; // e <= hi
    for &(s, o, c) in constraints {
        assert!(s != 0);
        if s > 0 {
            let b = (c - o).div_euclid(s);
            hi = Some(hi.map_or(b, |h: i64| h.min(b)));
        } else {
            // s*e <= c - o  with s < 0  means  e >= ceil((c-o)/s),
            // and ceil(x / s) = -floor(x / -s) for s < 0.
            let b = -(c - o).div_euclid(-s);
            lo = Some(lo.map_or(b, |l: i64| l.max(b)));
        }
    }

    match supp {
        SlotSupport::Empty => Count::Finite(0),
        SlotSupport::FiniteSet(es) => Count::Finite(
            es.iter()
                .filter(|e| lo.is_none_or(|l| **e >= l) && hi.is_none_or(|h| **e <= h))
                .count() as i64,
        ),
        SlotSupport::NonnegativeIntegers => {
            let l = lo.unwrap_or(0).max(0);
            match hi {
                None => Count::Infinite,
                Some(h) if h < l => Count::Finite(0),
                Some(h) => Count::Finite(h - l + 1),
            }
        }
        SlotSupport::AllIntegers => match (lo, hi) {
            (Some(l), Some(h)) if h < l => Count::Finite(0),
            (Some(l), Some(h)) => Count::Finite(h - l + 1),
            _ => Count::Infinite,
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_contains(s: &APSet, lo: i64, hi: i64) -> Vec<i64> {
        (lo..=hi).filter(|x| s.contains(*x)).collect()
    }

    #[test]
    fn images_match_direct_enumeration() {
        let nonneg = SlotSupport::NonnegativeIntegers;
        let img = APSet::image_of_support(&nonneg, -3, 7);
        // e = 0,1,2,... -> 7, 4, 1, -2, ...
        assert_eq!(brute_contains(&img, -20, 20), vec![-20, -17, -14, -11, -8, -5, -2, 1, 4, 7]);

        let all = SlotSupport::AllIntegers;
        let img = APSet::image_of_support(&all, 4, 6);
        assert_eq!(img, APSet::Full { residue: 2, step: 4 });

        let fin = SlotSupport::FiniteSet(vec![-1, 2, 5]);
        let img = APSet::image_of_support(&fin, -2, 1);
        assert_eq!(img, APSet::Finite(vec![-9, -3, 3]));
    }

    #[test]
    fn crt_basic() {
        assert_eq!(crt(2, 3, 3, 5), Some((8, 15)));
        assert_eq!(crt(1, 2, 0, 4), None);
        assert_eq!(crt(1, 2, 3, 4), Some((3, 4)));
        assert_eq!(crt(0, 1, 5, 7), Some((5, 7)));
    }

    #[test]
    fn intersection_matches_brute_force() {
        let cases = vec![
            APSet::Empty,
            APSet::Finite(vec![-4, 0, 9]),
            APSet::HalfUp { start: -2, step: 3 },
            APSet::HalfUp { start: 5, step: 2 },
            APSet::HalfDown { start: 4, step: 2 },
            APSet::HalfDown { start: -7, step: 5 },
            APSet::Full { residue: 1, step: 4 },
            APSet::Full { residue: 0, step: 1 },
        ];
        // Any pair of these either meets within [-1000, 1000] or never;
        // the steps involved are small enough that this window decides.
        for a in &cases {
            for b in &cases {
                let brute = (-1000..=1000).any(|x| a.contains(x) && b.contains(x));
                assert_eq!(a.intersects(b), brute, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn uncovered_above_counts() {
        // Complement of the evens above 0 is infinite.
        let evens = APSet::Full { residue: 0, step: 2 };
        assert_eq!(count_uncovered_above(0, std::slice::from_ref(&evens)), Count::Infinite);

        // Evens plus odds-from-11 leave 1,3,5,7,9 uncovered above 0.
        let odds_up = APSet::HalfUp { start: 11, step: 2 };
        assert_eq!(
            count_uncovered_above(0, &[evens.clone(), odds_up]),
            Count::Finite(5)
        );

        // A downward progression cannot cover the far tail.
        let down = APSet::HalfDown { start: 100, step: 1 };
        assert_eq!(count_uncovered_above(0, &[down]), Count::Infinite);

        // Everything covered: complement empty.
        let all = APSet::Full { residue: 0, step: 1 };
        assert_eq!(count_uncovered_above(-5, &[all]), Count::Finite(0));
    }

    #[test]
    fn support_constraint_counts() {
        // e >= 0 with -e + 3 <= 2, i.e. e >= 1: infinite.
        assert_eq!(
            count_support_under_constraints(
                &SlotSupport::NonnegativeIntegers,
                &[(-1, 3, 2)]
            ),
            Count::Infinite
        );
        // e >= 0 with e <= 4 and -e <= -2: e in {2,3,4}.
        assert_eq!(
            count_support_under_constraints(
                &SlotSupport::NonnegativeIntegers,
                &[(1, 0, 4), (-1, 0, -2)]
            ),
            Count::Finite(3)
        );
        // All integers with 3e + 1 <= 10 and -3e + 1 <= 10: e in [-3, 3].
        assert_eq!(
            count_support_under_constraints(
                &SlotSupport::AllIntegers,
                &[(3, 1, 10), (-3, 1, 10)]
            ),
            Count::Finite(7)
        );
    }

    #[test]
    fn constraint_count_matches_enumeration() {
        for s1 in [-3i64, -1, 2] {
            for o1 in [-2i64, 0, 5] {
                for c1 in [-4i64, 0, 7] {
                    for s2 in [-2i64, 1, 3] {
                        let cons = [(s1, o1, c1), (s2, 1, 4)];
                        let brute = (-500..=500i64)
                            .filter(|e| cons.iter().all(|&(s, o, c)| s * e + o <= c))
                            .count() as i64;
                        let got = count_support_under_constraints(
                            &SlotSupport::AllIntegers,
                            &cons,
                        );
                        // Opposite-signed scales always bound both sides here.
                        if s1.signum() != s2.signum() {
                            assert_eq!(got, Count::Finite(brute), "{cons:?}");
                        }
                    }
                }
            }
        }
    }
}
