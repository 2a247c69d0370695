//! Exact Betti numbers by walking the incidence graph of basis vectors.
//!
//! When every basis vector of the comparison map touches at most two
//! others, the matrix decomposes into connected components that are
//! paths, cycles, or infinite chains, and each kind has a known exact
//! contribution to the kernel and cokernel:
//!
//! * a finite path with `s` source and `t` target nodes gives
//!   `(max(0, s-t), max(0, t-s))`;
//! * a cycle gives `(1, 1)` when its holonomy (the alternating product
//!   of edge coefficients) is `1` in the field, else `(0, 0)`;
//! * a chain that is infinite on one side gives `(0, 0)` when its leaf
//!   is a source and `(0, 1)` when it is a target;
//! * a chain infinite on both sides gives `(0, 1)`.
//!
//! Infinitely many components are handled by a shift argument.  Solving
//! `sigma_target = scale * sigma_source` over the slot graph produces a
//! vector of per-slot shifts under which the transition rules commute;
//! outside a computed safety zone every membership and divisibility
//! predicate is invariant under the shift, so a component that lies
//! entirely beyond the zone represents a whole family `{C + j*sigma}`
//! of identical components, and an infinite march that revisits a slot
//! beyond the zone with a shifted exponent is certified periodic.  The
//! walker therefore only seeds exponents in a finite band and still
//! returns certified answers, including certified `Infinite`.
//!
//! Sheaves whose shift system has no solution (for example rules of
//! different scales meeting on one slot cycle) make the walker declare
//! itself inapplicable rather than guess.

use std::collections::{HashMap, HashSet};

use serde::Serialize;

use crate::apset::Count;
use crate::cohomology::{assemble_u, BettiValue, MonomialComplex};
use crate::field::Scalar;
use crate::sheaf::{Sheaf2V, SlotSupport};
use crate::{Error, Result};

const WALK_BUDGET: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Side {
    Src,
    Tgt,
}

/// A basis vector of the comparison map: slot plus exponent.
type Node = (Side, usize, i64);

#[derive(Debug, Clone, Serialize)]
pub struct WalkerReport {
    pub b0: BettiValue,
    pub b1: BettiValue,
    pub components: usize,
    pub paths: usize,
    pub cycles: usize,
    pub trivial_cycles: usize,
    pub one_tailed: usize,
    pub bi_infinite: usize,
    pub families: usize,
    pub zone: i64,
    pub seed_band: i64,
}

struct Ctx<'a, F: Scalar> {
    field: &'a F,
    cx: &'a MonomialComplex,
    nsrc: usize,
    sigma: Vec<i64>,
    zone: i64,
}

impl<'a, F: Scalar> Ctx<'a, F> {
    fn unit(&self, side: Side, i: usize) -> usize {
        match side {
            Side::Src => i,
            Side::Tgt => self.nsrc + i,
        }
    }

    fn sigma_of(&self, n: &Node) -> i64 {
        self.sigma[self.unit(n.0, n.1)]
    }

    fn support(&self, side: Side, i: usize) -> &SlotSupport {
        match side {
            Side::Src => &self.cx.sources[i].2,
            Side::Tgt => &self.cx.targets[i].2,
        }
    }

    fn beyond_zone(&self, n: &Node) -> bool {
        n.2.abs() > self.zone
    }

    fn neighbors(&self, n: &Node) -> Result<Vec<(Node, F::Elem)>> {
        let out: Vec<(Node, F::Elem)> = match n.0 {
            Side::Src => self
                .cx
                .image_of_basis(self.field, n.1, n.2)
                .into_iter()
                .map(|(j, x, c)| ((Side::Tgt, j, x), c))
                .collect(),
            Side::Tgt => self
                .cx
                .preimages_of_basis(self.field, n.1, n.2)
                .into_iter()
                .map(|(i, e, c)| ((Side::Src, i, e), c))
                .collect(),
        };
        if out.len() > 2 {
            return Err(Error::DegreeExceeded(format!(
                "basis vector {n:?} touches {} others; the walker needs at most 2",
                out.len()
            )));
        }
        Ok(out)
    }
}

/// One period of a certified periodic continuation.  The future of the
/// march is the unit shifted by `k * sigma` per period.
#[derive(Debug, Clone)]
struct Tail {
    unit: Vec<Node>,
    k: i64,
}

enum End<E> {
    Leaf,
    Cycle { closing: E },
    Tail(Tail),
}

struct MarchOut<E> {
    /// Nodes in order, starting at the anchor.
    path: Vec<Node>,
    /// `coeffs[i]` is the edge coefficient between `path[i]` and
    /// `path[i+1]`.
    coeffs: Vec<E>,
    end: End<E>,
}

fn march<F: Scalar>(
    ctx: &Ctx<'_, F>,
    anchor: Node,
    first: (Node, F::Elem),
    visited: &mut HashSet<Node>,
    budget: &mut usize,
) -> Result<MarchOut<F::Elem>> {
    let mut path = vec![anchor, first.0];
    let mut coeffs = vec![first.1];
    visited.insert(first.0);

    let mut slot_visits: HashMap<(Side, usize), Vec<(usize, i64)>> = HashMap::new();
    let mut last_core: Option<usize> = None;
    for (idx, node) in path.iter().enumerate() {
        if !ctx.beyond_zone(node) {
            last_core = Some(idx);
        }
        slot_visits.entry((node.0, node.1)).or_default().push((idx, node.2));
    }

    // Certified periodic continuation: the same slot seen twice beyond
    // the zone, same sign, farther out, displaced by a multiple of its
    // shift, with the whole segment since the earlier visit beyond the
    // zone and moving outward.
    let try_certify = |path: &[Node],
                       slot_visits: &HashMap<(Side, usize), Vec<(usize, i64)>>,
                       last_core: Option<usize>|
     -> Option<Tail> {
        let idx = path.len() - 1;
        let node = &path[idx];
        if node.2.abs() <= ctx.zone {
            return None;
        }
        let su = ctx.sigma_of(node);
        if su == 0 {
            return None;
        }
        let visits = slot_visits.get(&(node.0, node.1))?;
        for &(idx0, e0) in visits.iter().rev() {
            if last_core.is_some_and(|lc| lc >= idx0) {
                continue;
            }
            if e0.signum() != node.2.signum() || node.2.abs() <= e0.abs() {
                continue;
            }
            if (node.2 - e0) % su != 0 {
                continue;
            }
            let k = (node.2 - e0) / su;
            let aligned = path[idx0..=idx].iter().all(|p| {
                let sp = ctx.sigma_of(p);
                sp != 0 && (k * sp).signum() == p.2.signum()
            });
            if aligned {
                return Some(Tail { unit: path[idx0..idx].to_vec(), k });
            }
        }
        None
    };

    loop {
        let cur = *path.last().unwrap();
        let prev = path[path.len() - 2];
        let mut cands: Vec<(Node, F::Elem)> = ctx
            .neighbors(&cur)?
            .into_iter()
            .filter(|(n, _)| *n != prev)
            .collect();
        if cands.is_empty() {
            return Ok(MarchOut { path, coeffs, end: End::Leaf });
        }
        if cands.len() > 1 {
            return Err(Error::WalkerInapplicable(format!(
                "walk through {cur:?} is not locally a path"
            )));
        }
        let (next, c) = cands.pop().unwrap();
        if next == anchor {
            return Ok(MarchOut { path, coeffs, end: End::Cycle { closing: c } });
        }
        if visited.contains(&next) {
            return Err(Error::WalkerInapplicable(format!(
                "walk re-entered {next:?} away from its start"
            )));
        }
        if *budget == 0 {
            return Err(Error::Budget(
                "walk exceeded its step budget without resolving".into(),
            ));
        }
        *budget -= 1;

        visited.insert(next);
        path.push(next);
        coeffs.push(c);
        let idx = path.len() - 1;
        if !ctx.beyond_zone(&next) {
            last_core = Some(idx);
        }
        if let Some(tail) = try_certify(&path, &slot_visits, last_core) {
            return Ok(MarchOut { path, coeffs, end: End::Tail(tail) });
        }
        slot_visits.entry((next.0, next.1)).or_default().push((idx, next.2));
    }
}

/// Alternating product of the cycle's edge coefficients; the cycle
/// supports a kernel (and cokernel) vector exactly when this is `1`.
fn holonomy<F: Scalar>(
    field: &F,
    path: &[Node],
    coeffs: &[F::Elem],
    closing: &F::Elem,
) -> F::Elem {
    let m = path.len();
    let edge = |i: usize| -> &F::Elem {
        if i == m - 1 {
            closing
        } else {
            &coeffs[i]
        }
    };
    let mut h = field.one();
    for (j, node) in path.iter().enumerate() {
        if node.0 == Side::Tgt {
            let c_in = edge((j + m - 1) % m);
            let c_out = edge(j);
            h = field.mul(&h, &field.neg(&field.div(c_in, c_out)));
        }
    }
    h
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CompClass {
    Path,
    Cycle { trivial: bool },
    OneTailed,
    BiInfinite,
}

struct CompOut {
    nodes: HashSet<Node>,
    tails: Vec<Tail>,
    c0: i64,
    c1: i64,
    class: CompClass,
}

fn walk_component<F: Scalar>(
    ctx: &Ctx<'_, F>,
    seed: Node,
    visited: &mut HashSet<Node>,
    budget: &mut usize,
) -> Result<CompOut> {
    visited.insert(seed);
    let nbrs = ctx.neighbors(&seed)?;
    let mut nodes: HashSet<Node> = HashSet::new();
    nodes.insert(seed);
    let mut tails: Vec<Tail> = Vec::new();

    if nbrs.is_empty() {
        let (c0, c1) = if seed.0 == Side::Src { (1, 0) } else { (0, 1) };
        return Ok(CompOut { nodes, tails, c0, c1, class: CompClass::Path });
    }

    let mut nbrs = nbrs.into_iter();
    let first = nbrs.next().unwrap();
    let second = nbrs.next();

    let m1 = march(ctx, seed, first, visited, budget)?;
    nodes.extend(m1.path.iter().copied());

    if let End::Cycle { closing } = &m1.end {
        let trivial = holonomy(ctx.field, &m1.path, &m1.coeffs, closing) == ctx.field.one();
        let c = if trivial { 1 } else { 0 };
        return Ok(CompOut {
            nodes,
            tails,
            c0: c,
            c1: c,
            class: CompClass::Cycle { trivial },
        });
    }

    let leaf1: Option<Node> = match m1.end {
        End::Leaf => Some(*m1.path.last().unwrap()),
        End::Tail(t) => {
            tails.push(t);
            None
        }
        End::Cycle { .. } => unreachable!(),
    };

    let leaf2: Option<Node> = match second {
        None => Some(seed),
        Some(step) => {
            let m2 = march(ctx, seed, step, visited, budget)?;
            nodes.extend(m2.path.iter().copied());
            match m2.end {
                End::Leaf => Some(*m2.path.last().unwrap()),
                End::Tail(t) => {
                    tails.push(t);
                    None
                }
                End::Cycle { .. } => {
                    return Err(Error::WalkerInapplicable(
                        "second direction closed a cycle the first direction missed".into(),
                    ))
                }
            }
        }
    };

    let s = nodes.iter().filter(|n| n.0 == Side::Src).count() as i64;
    let t = nodes.len() as i64 - s;
    let (c0, c1, class) = match (leaf1, leaf2) {
        (Some(_), Some(_)) => (0i64.max(s - t), 0i64.max(t - s), CompClass::Path),
        (Some(leaf), None) | (None, Some(leaf)) => {
            if leaf.0 == Side::Src {
                (0, 0, CompClass::OneTailed)
            } else {
                (0, 1, CompClass::OneTailed)
            }
        }
        (None, None) => (0, 1, CompClass::BiInfinite),
    };
    Ok(CompOut { nodes, tails, c0, c1, class })
}

struct CompRecord {
    nodes: HashSet<Node>,
    tails: Vec<Tail>,
    /// Outward direction sign when this component stands for a whole
    /// shift family.
    fam: Option<i64>,
}

fn tail_contains<F: Scalar>(ctx: &Ctx<'_, F>, tail: &Tail, node: &Node) -> bool {
    for (s, i, w) in &tail.unit {
        if (*s, *i) != (node.0, node.1) {
            continue;
        }
        let shift = tail.k * ctx.sigma[ctx.unit(*s, *i)];
        if shift != 0 && (node.2 - w) % shift == 0 && (node.2 - w) / shift >= 1 {
            return true;
        }
    }
    false
}

fn family_contains<F: Scalar>(ctx: &Ctx<'_, F>, rec: &CompRecord, sgn: i64, node: &Node) -> bool {
    let su = ctx.sigma_of(node);
    if su == 0 {
        return false;
    }
    let dir = sgn * su;
    for (s, i, w) in &rec.nodes {
        if (*s, *i) == (node.0, node.1) && (node.2 - w) % dir == 0 && (node.2 - w) / dir >= 1 {
            return true;
        }
    }
    for tail in &rec.tails {
        for (s, i, w) in &tail.unit {
            if (*s, *i) != (node.0, node.1) || (node.2 - w) % su != 0 {
                continue;
            }
            let q = (node.2 - w) / su;
            if sgn * q > tail.k.abs() {
                return true;
            }
        }
    }
    false
}

/// Solve the per-slot shift system `sigma_target = scale * sigma_source`
/// over all rules joining two infinite supports.  Slots with finite
/// support get shift `0` and are excluded; an inconsistent system makes
/// the walker inapplicable.
fn solve_sigma(cx: &MonomialComplex) -> Result<Vec<i64>> {
    let nsrc = cx.num_sources();
    let n = nsrc + cx.num_targets();
    let is_infinite = |supp: &SlotSupport| {
        matches!(
            supp,
            SlotSupport::AllIntegers | SlotSupport::NonnegativeIntegers
        )
    };
    let mut infinite = vec![false; n];
    for (i, (_, _, supp)) in cx.sources.iter().enumerate() {
        infinite[i] = is_infinite(supp);
    }
    for (j, (_, _, supp)) in cx.targets.iter().enumerate() {
        infinite[nsrc + j] = is_infinite(supp);
    }

    let mut adj: Vec<Vec<(usize, i64, bool)>> = vec![Vec::new(); n];
    for (i, rules) in cx.rules.iter().enumerate() {
        if !infinite[i] {
            continue;
        }
        for t in rules {
            let j = nsrc + t.target;
            if !infinite[j] {
                continue;
            }
            adj[i].push((j, t.scale, true));
            adj[j].push((i, t.scale, false));
        }
    }

    let normalize = |num: i64, den: i64| -> (i64, i64) {
        let g = crate::apset::gcd(num, den).max(1);
        let (num, den) = (num / g, den / g);
        if den < 0 {
            (-num, -den)
        } else {
            (num, den)
        }
    };

    let mut rat: Vec<Option<(i64, i64)>> = vec![None; n];
    let mut out = vec![0i64; n];
    for start in 0..n {
        if !infinite[start] || rat[start].is_some() {
            continue;
        }
        rat[start] = Some((1, 1));
        let mut comp = vec![start];
        let mut queue = vec![start];
        while let Some(u) = queue.pop() {
            let (nu, du) = rat[u].unwrap();
            for &(v, a, fwd) in &adj[u] {
                let cand = if fwd {
                    normalize(nu * a, du)
                } else {
                    normalize(nu, du * a)
                };
                match rat[v] {
                    None => {
                        rat[v] = Some(cand);
                        comp.push(v);
                        queue.push(v);
                    }
                    Some(existing) if existing == cand => {}
                    Some(_) => {
                        return Err(Error::WalkerInapplicable(
                            "transition scales admit no consistent shift system".into(),
                        ))
                    }
                }
            }
        }
        let mut l = 1i64;
        for &u in &comp {
            l = crate::apset::lcm(l, rat[u].unwrap().1);
        }
        let vals: Vec<i64> = comp
            .iter()
            .map(|&u| {
                let (nu, du) = rat[u].unwrap();
                nu * (l / du)
            })
            .collect();
        let mut g = 0i64;
        for v in &vals {
            g = crate::apset::gcd(g, *v);
        }
        let g = g.max(1);
        for (&u, v) in comp.iter().zip(vals) {
            out[u] = v / g;
            debug_assert!(out[u] != 0);
        }
    }
    Ok(out)
}

/// Walk the incidence graph of the comparison map and report certified
/// Betti numbers plus a census of the component kinds encountered.
pub fn betti_walker<F: Scalar>(field: &F, sheaf: &Sheaf2V) -> Result<WalkerReport> {
    sheaf.validate()?;
    let cx = assemble_u(sheaf);
    let sigma = solve_sigma(&cx)?;

    let ms = cx.max_scale();
    let mo = cx.max_offset();
    let mag = cx.finite_magnitude();
    let msig = sigma.iter().map(|s| s.abs()).max().unwrap_or(1).max(1);
    let zone = ms * (mag + mo + msig + 1) + 2 * mo + msig + 4;
    let seed_band = zone + 2 * msig + 2;

    let ctx = Ctx {
        field,
        cx: &cx,
        nsrc: cx.num_sources(),
        sigma,
        zone,
    };

    let mut visited: HashSet<Node> = HashSet::new();
    let mut records: Vec<CompRecord> = Vec::new();
    let mut budget = WALK_BUDGET;

    let mut b0 = Count::Finite(0);
    let mut b1 = Count::Finite(0);
    let mut paths = 0usize;
    let mut cycles = 0usize;
    let mut trivial_cycles = 0usize;
    let mut one_tailed = 0usize;
    let mut bi_infinite = 0usize;
    let mut families = 0usize;

    let all_units: Vec<(Side, usize)> = (0..cx.num_sources())
        .map(|i| (Side::Src, i))
        .chain((0..cx.num_targets()).map(|j| (Side::Tgt, j)))
        .collect();

    for (side, i) in all_units {
        for e in ctx.support(side, i).iter_window(-seed_band, seed_band) {
            let seed: Node = (side, i, e);
            if visited.contains(&seed) {
                continue;
            }
            let covered = records.iter().any(|r| {
                r.tails.iter().any(|t| tail_contains(&ctx, t, &seed))
                    || r.fam.is_some_and(|sgn| family_contains(&ctx, r, sgn, &seed))
            });
            if covered {
                continue;
            }

            let comp = walk_component(&ctx, seed, &mut visited, &mut budget)?;
            match comp.class {
                CompClass::Path => paths += 1,
                CompClass::Cycle { trivial } => {
                    cycles += 1;
                    if trivial {
                        trivial_cycles += 1;
                    }
                }
                CompClass::OneTailed => one_tailed += 1,
                CompClass::BiInfinite => bi_infinite += 1,
            }

            // A component living entirely beyond the zone stands for the
            // whole family of its shifts, all with the same contribution.
            let mut fam = None;
            if !comp.nodes.is_empty()
                && comp.nodes.iter().all(|nd| ctx.beyond_zone(nd))
                && comp.nodes.iter().all(|nd| ctx.sigma_of(nd) != 0)
            {
                let sgn_of = |nd: &Node| nd.2.signum() * ctx.sigma_of(nd).signum();
                let sgn = sgn_of(comp.nodes.iter().next().unwrap());
                if comp.nodes.iter().any(|nd| sgn_of(nd) != sgn) {
                    return Err(Error::WalkerInapplicable(
                        "zone component is not consistently oriented".into(),
                    ));
                }
                let shifted: Node = (seed.0, seed.1, seed.2 + sgn * ctx.sigma_of(&seed));
                let self_periodic = comp.nodes.contains(&shifted)
                    || comp.tails.iter().any(|t| tail_contains(&ctx, t, &shifted));
                if !self_periodic {
                    fam = Some(sgn);
                }
            }

            if fam.is_some() {
                families += 1;
                if comp.c0 > 0 {
                    b0 = Count::Infinite;
                }
                if comp.c1 > 0 {
                    b1 = Count::Infinite;
                }
            } else {
                b0 = b0 + Count::Finite(comp.c0);
                b1 = b1 + Count::Finite(comp.c1);
            }

            records.push(CompRecord { nodes: comp.nodes, tails: comp.tails, fam });
        }
    }

    Ok(WalkerReport {
        b0: b0.into(),
        b1: b1.into(),
        components: records.len(),
        paths,
        cycles,
        trivial_cycles,
        one_tailed,
        bi_infinite,
        families,
        zone,
        seed_band,
    })
}
