//! Morphisms of sheaves and the one-point twist short exact sequence.
//!
//! A morphism is one monomial map per object, commuting with the four
//! restrictions.  Validation decides the commuting squares in two stages:
//! composites are first compared structurally (term lists after
//! canonicalization; exact whenever no quotient drop is involved), and on
//! any structural mismatch the two sides are evaluated on every basis
//! vector in a window, which settles maps that agree only after drops.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::divisor::{Divisor, EdgeCount};
use crate::sheaf::{
    check_map_well_formed, make_M, make_skyscraper, Edge, GradedSpace, MonomialMap, MonomialTerm,
    Obj, PerObj, Sheaf2V, SlotSupport,
};
use crate::{Error, Result};

/// A morphism `u: F -> G`, one component per object.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SheafMorphism {
    pub source: Sheaf2V,
    pub target: Sheaf2V,
    pub components: PerObj<MonomialMap>,
}

/// Evaluates `second . first` on the basis vector `(slot, e)`, applying
/// drops against each map's own target space.  Returns sorted
/// `(slot, exponent, coeff)` triples.
fn eval_composite(
    first: &MonomialMap,
    first_target: &GradedSpace,
    second: &MonomialMap,
    second_target: &GradedSpace,
    slot: usize,
    e: i64,
) -> Vec<(usize, i64, i64)> {
    let mut acc: BTreeMap<(usize, i64), i64> = BTreeMap::new();
    for (mid_slot, mid_e, c1) in first.apply_basis(slot, e, first_target) {
        for (out_slot, out_e, c2) in second.apply_basis(mid_slot, mid_e, second_target) {
            *acc.entry((out_slot, out_e)).or_insert(0) += c1 * c2;
        }
    }
    acc.into_iter()
        .filter(|(_, c)| *c != 0)
        .map(|((s, x), c)| (s, x, c))
        .collect()
}

impl SheafMorphism {
    /// The identity morphism on a sheaf.
    pub fn identity(sheaf: &Sheaf2V) -> Self {
        SheafMorphism {
            components: PerObj::from_fn(|o| MonomialMap::identity(sheaf.value(o).num_slots())),
            source: sheaf.clone(),
            target: sheaf.clone(),
        }
    }

    /// A window wide enough that the windowed square check exercises every
    /// finite support completely and every pair of distinct affine rules
    /// past their crossing points.
    pub fn default_window(&self) -> i64 {
        let f = &self.source;
        let g = &self.target;
        let comp_off = Obj::ALL
            .iter()
            .map(|o| self.components.get(*o).max_offset())
            .max()
            .unwrap_or(0);
        let mag = f.finite_magnitude().max(g.finite_magnitude());
        let off = f.max_offset().max(g.max_offset()).max(comp_off);
        let scale = f.max_scale().max(g.max_scale());
        (off + mag + 8) * scale.max(1) * 2
    }

    /// Checks component well-formedness and all four commuting squares.
    pub fn validate(&self, window: i64) -> Result<()> {
        for o in Obj::ALL {
            check_map_well_formed(
                self.components.get(o),
                self.source.value(o),
                self.target.value(o),
                &format!("component at {o}"),
            )?;
        }
        for e in Edge::ALL {
            let b = e.edge_obj();
            let a = e.vertex();
            let u_a = self.components.get(a);
            let u_b = self.components.get(b);
            let f_edge = self.source.map(e);
            let g_edge = self.target.map(e);
            // Structural fast path: exact whenever no drop can occur.
            let drop_free = !u_a.quotient && !u_b.quotient && !f_edge.quotient && !g_edge.quotient;
            if drop_free {
                let mut lhs = MonomialMap::compose(u_a, f_edge);
                let mut rhs = MonomialMap::compose(g_edge, u_b);
                lhs.canonicalize();
                rhs.canonicalize();
                if lhs == rhs {
                    continue;
                }
            }
            // Windowed semantic check.
            let src_space = self.source.value(b);
            for (slot, support) in src_space.slots.iter().enumerate() {
                for x in support.iter_window(-window, window) {
                    let lhs = eval_composite(
                        f_edge,
                        self.source.value(a),
                        u_a,
                        self.target.value(a),
                        slot,
                        x,
                    );
                    let rhs = eval_composite(
                        u_b,
                        self.target.value(b),
                        g_edge,
                        self.target.value(a),
                        slot,
                        x,
                    );
                    if lhs != rhs {
                        return Err(Error::Validation(format!(
                            "square at {e} fails on basis ({b}, slot {slot}, exponent {x}): \
                             {lhs:?} vs {rhs:?}"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// The short exact sequence `0 -> M_d -> M_{d+e_axis} -> Sky(B_axis, k) -> 0`.
#[derive(Clone, Debug)]
pub struct MuSes {
    pub sub: Sheaf2V,
    pub mid: Sheaf2V,
    pub quot: Sheaf2V,
    pub mu: SheafMorphism,
    pub q: SheafMorphism,
    pub axis: u8,
}

/// Builds the twist sequence on the chosen axis (1 or 2): `mu` is the
/// identity at every object except `B_axis`, where it shifts exponents up by
/// one; `q` picks the exponent-zero coefficient at `B_axis` and is zero
/// elsewhere.
pub fn build_mu_ses(r: EdgeCount, d: Divisor, axis: u8) -> Result<MuSes> {
    if axis != 1 && axis != 2 {
        return Err(Error::InvalidArgument(format!("axis must be 1 or 2, got {axis}")));
    }
    let step = if axis == 1 { Divisor::new(1, 0) } else { Divisor::new(0, 1) };
    let b_axis = if axis == 1 { Obj::B1 } else { Obj::B2 };
    let sub = make_M(r, d);
    let mid = make_M(r, d + step);
    let quot = make_skyscraper(b_axis, GradedSpace::new(vec![SlotSupport::finite([0])]));

    let mu = SheafMorphism {
        components: PerObj::from_fn(|o| {
            let n = sub.value(o).num_slots();
            if o == b_axis {
                MonomialMap { terms: vec![vec![MonomialTerm::new(0, 1, 1, 1)]], quotient: false }
            } else {
                MonomialMap::identity(n)
            }
        }),
        source: sub.clone(),
        target: mid.clone(),
    };
    let q = SheafMorphism {
        components: PerObj::from_fn(|o| {
            let n = mid.value(o).num_slots();
            if o == b_axis {
                MonomialMap { terms: vec![vec![MonomialTerm::new(0, 1, 0, 1)]], quotient: true }
            } else {
                MonomialMap::zero(n)
            }
        }),
        source: mid.clone(),
        target: quot.clone(),
    };
    mu.validate(mu.default_window())?;
    q.validate(q.default_window())?;
    Ok(MuSes { sub, mid, quot, mu, q, axis })
}

/// Basis-level exactness of the twist sequence on a window: at every object,
/// `mu` is injective on basis vectors, its image is exactly the set of basis
/// vectors `q` kills (checked away from the window boundary), and `q` is
/// onto the skyscraper's basis.
///
/// Both morphisms send basis vectors to at most one basis vector, so
/// kernel/image comparisons reduce to set comparisons of `(slot, exponent)`
/// pairs.
pub fn verify_mu_ses_exactness(ses: &MuSes, window: i64) -> Result<()> {
    let margin = 2;
    for o in Obj::ALL {
        let mid_space = ses.mid.value(o);
        let sub_space = ses.sub.value(o);
        let quot_space = ses.quot.value(o);
        let mu_o = ses.mu.components.get(o);
        let q_o = ses.q.components.get(o);

        let mut image: BTreeMap<(usize, i64), i64> = BTreeMap::new();
        for (slot, support) in sub_space.slots.iter().enumerate() {
            for e in support.iter_window(-window, window) {
                let img = mu_o.apply_basis(slot, e, mid_space);
                if img.len() != 1 {
                    return Err(Error::Validation(format!(
                        "inclusion not basis-to-basis at {o} ({slot}, {e})"
                    )));
                }
                let key = (img[0].0, img[0].1);
                if image.insert(key, img[0].2).is_some() {
                    return Err(Error::Validation(format!(
                        "inclusion not injective at {o}: basis collision on {key:?}"
                    )));
                }
            }
        }
        let mut quot_hit: BTreeMap<(usize, i64), bool> = BTreeMap::new();
        for (slot, support) in mid_space.slots.iter().enumerate() {
            for e in support.iter_window(-window, window) {
                let killed = q_o.apply_basis(slot, e, quot_space).is_empty();
                let in_image = image.contains_key(&(slot, e));
                if in_image && !killed {
                    return Err(Error::Validation(format!(
                        "composite q.mu nonzero at {o} ({slot}, {e})"
                    )));
                }
                // Away from the boundary, killed basis vectors must come
                // from the subsheaf.
                if killed && !in_image && e.abs() <= window - margin {
                    return Err(Error::Validation(format!(
                        "kernel of q exceeds image of mu at {o} ({slot}, {e})"
                    )));
                }
                if !killed {
                    for (qs, qe, _) in q_o.apply_basis(slot, e, quot_space) {
                        quot_hit.insert((qs, qe), true);
                    }
                }
            }
        }
        for (slot, support) in quot_space.slots.iter().enumerate() {
            for e in support.iter_window(-window, window) {
                if !quot_hit.contains_key(&(slot, e)) {
                    return Err(Error::Validation(format!(
                        "projection misses quotient basis at {o} ({slot}, {e})"
                    )));
                }
            }
        }
    }
    Ok(())
}
