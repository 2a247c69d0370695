//! The five-object sheaf model.
//!
//! Objects and arrows.  The category has vertex objects `A1`, `A2` and edge
//! objects `B1`, `B2`, `B3`, with arrows `A1 -> B1`, `A2 -> B2`, `A1 -> B3`,
//! `A2 -> B3`.  A sheaf assigns a graded vector space to every object and a
//! restriction map `F(Bj) -> F(Ai)` to every arrow.
//!
//! Graded spaces.  A [`GradedSpace`] is a finite list of slots, each slot a
//! set of integer exponents ([`SlotSupport`]): all integers (a Laurent line),
//! the nonnegative integers (a polynomial line), a finite set, or empty.
//! The basis of the space is the set of pairs `(slot, exponent)`.
//!
//! Monomial maps.  Every restriction in this model sends a basis vector to a
//! scalar multiple of a single basis vector per term: slot `s` at exponent
//! `e` goes to `coeff * (target_slot, scale*e + offset)` summed over the
//! terms attached to `s`.  Maps flagged `quotient` silently drop any image
//! exponent that falls outside the target support; unflagged maps must land
//! inside it, which [`Sheaf2V::validate`] checks exactly.
//!
//! The bundled constructors produce the structure sheaf `O_r` (twist rules
//! `e -> -e` on `B1`, `B2` and `e -> r*e`, `e -> -r*e` on `B3`), its rank-one
//! twists [`make_line_bundle`], the rank-`r` model [`make_M`] whose `B3`
//! value has `r` Laurent slots with rules `e -> r*e + j` and `e -> -r*e + j`
//! for `j = 0, ..., r-1`, constant sheaves, skyscrapers, coskyscrapers, and
//! the tensor product.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::divisor::{Divisor, EdgeCount};
use crate::{Error, Result};

/// The five objects.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Obj {
    A1,
    A2,
    B1,
    B2,
    B3,
}

impl Obj {
    pub const ALL: [Obj; 5] = [Obj::A1, Obj::A2, Obj::B1, Obj::B2, Obj::B3];

    pub fn is_vertex(self) -> bool {
        matches!(self, Obj::A1 | Obj::A2)
    }

    pub fn is_edge(self) -> bool {
        !self.is_vertex()
    }
}

impl fmt::Display for Obj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Obj::A1 => "A1",
            Obj::A2 => "A2",
            Obj::B1 => "B1",
            Obj::B2 => "B2",
            Obj::B3 => "B3",
        };
        write!(f, "{s}")
    }
}

/// The four arrows, named by their endpoints.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Edge {
    A1B1,
    A2B2,
    A1B3,
    A2B3,
}

impl Edge {
    pub const ALL: [Edge; 4] = [Edge::A1B1, Edge::A2B2, Edge::A1B3, Edge::A2B3];

    /// The vertex object the restriction lands in.
    pub fn vertex(self) -> Obj {
        match self {
            Edge::A1B1 | Edge::A1B3 => Obj::A1,
            Edge::A2B2 | Edge::A2B3 => Obj::A2,
        }
    }

    /// The edge object the restriction starts from.
    pub fn edge_obj(self) -> Obj {
        match self {
            Edge::A1B1 => Obj::B1,
            Edge::A2B2 => Obj::B2,
            Edge::A1B3 | Edge::A2B3 => Obj::B3,
        }
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}->{}", self.edge_obj(), self.vertex())
    }
}

/// Exponent support of one slot.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "set", rename_all = "snake_case")]
pub enum SlotSupport {
    AllIntegers,
    NonnegativeIntegers,
    /// Sorted, strictly increasing, nonempty.
    FiniteSet(Vec<i64>),
    Empty,
}

impl SlotSupport {
    /// A finite set from any iterator; sorts, dedups, and collapses the empty
    /// case.
    pub fn finite<I: IntoIterator<Item = i64>>(els: I) -> SlotSupport {
        let mut v: Vec<i64> = els.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        if v.is_empty() {
            SlotSupport::Empty
        } else {
            SlotSupport::FiniteSet(v)
        }
    }

    pub fn contains(&self, e: i64) -> bool {
        match self {
            SlotSupport::AllIntegers => true,
            SlotSupport::NonnegativeIntegers => e >= 0,
            SlotSupport::FiniteSet(s) => s.binary_search(&e).is_ok(),
            SlotSupport::Empty => false,
        }
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, SlotSupport::Empty)
    }

    /// Number of exponents, when finite.
    pub fn count(&self) -> Option<i64> {
        match self {
            SlotSupport::FiniteSet(s) => Some(s.len() as i64),
            SlotSupport::Empty => Some(0),
            _ => None,
        }
    }

    /// Exponents inside the inclusive window, ascending.
    pub fn iter_window(&self, lo: i64, hi: i64) -> Vec<i64> {
        match self {
            SlotSupport::AllIntegers => (lo..=hi).collect(),
            SlotSupport::NonnegativeIntegers => (lo.max(0)..=hi).collect(),
            SlotSupport::FiniteSet(s) => {
                s.iter().copied().filter(|e| lo <= *e && *e <= hi).collect()
            }
            SlotSupport::Empty => Vec::new(),
        }
    }

    /// Largest absolute value among finite elements, zero otherwise.
    pub fn finite_magnitude(&self) -> i64 {
        match self {
            SlotSupport::FiniteSet(s) => s.iter().map(|e| e.abs()).max().unwrap_or(0),
            _ => 0,
        }
    }

    fn is_canonical(&self) -> bool {
        match self {
            SlotSupport::FiniteSet(s) => !s.is_empty() && s.windows(2).all(|w| w[0] < w[1]),
            _ => true,
        }
    }
}

/// A graded vector space: a list of slots.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GradedSpace {
    pub slots: Vec<SlotSupport>,
}

impl GradedSpace {
    pub fn new(slots: Vec<SlotSupport>) -> Self {
        GradedSpace { slots }
    }

    pub fn zero() -> Self {
        GradedSpace { slots: Vec::new() }
    }

    pub fn num_slots(&self) -> usize {
        self.slots.len()
    }

    pub fn is_zero(&self) -> bool {
        self.slots.iter().all(|s| s.is_empty())
    }

    /// Dimension of the degree-`e` graded piece.
    pub fn dim_at(&self, e: i64) -> usize {
        self.slots.iter().filter(|s| s.contains(e)).count()
    }

    /// Total dimension when finite.
    pub fn total_dim(&self) -> Option<i64> {
        self.slots.iter().map(|s| s.count()).sum()
    }
}

/// One term of a monomial map: basis exponent `e` in the source slot goes to
/// `coeff` times exponent `scale*e + offset` in `target_slot`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MonomialTerm {
    pub target_slot: usize,
    pub scale: i64,
    pub offset: i64,
    pub coeff: i64,
}

impl MonomialTerm {
    pub fn new(target_slot: usize, scale: i64, offset: i64, coeff: i64) -> Self {
        MonomialTerm { target_slot, scale, offset, coeff }
    }

    pub fn apply(&self, e: i64) -> i64 {
        self.scale * e + self.offset
    }
}

/// A monomial map between graded spaces: one term list per source slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonomialMap {
    /// `terms[s]` lists the terms applied to source slot `s`.
    pub terms: Vec<Vec<MonomialTerm>>,
    /// When set, image exponents outside the target support are dropped
    /// instead of being a validation error.
    pub quotient: bool,
}

impl MonomialMap {
    pub fn zero(source_slots: usize) -> Self {
        MonomialMap { terms: vec![Vec::new(); source_slots], quotient: false }
    }

    /// The identity on an `n`-slot space.
    pub fn identity(n: usize) -> Self {
        MonomialMap {
            terms: (0..n).map(|s| vec![MonomialTerm::new(s, 1, 0, 1)]).collect(),
            quotient: false,
        }
    }

    pub fn source_slots(&self) -> usize {
        self.terms.len()
    }

    /// Sorts terms, merges duplicates, and drops zero coefficients.
    pub fn canonicalize(&mut self) {
        for slot in &mut self.terms {
            slot.sort_by_key(|t| (t.target_slot, t.scale, t.offset));
            let mut merged: Vec<MonomialTerm> = Vec::with_capacity(slot.len());
            for t in slot.drain(..) {
                match merged.last_mut() {
                    Some(m)
                        if m.target_slot == t.target_slot
                            && m.scale == t.scale
                            && m.offset == t.offset =>
                    {
                        m.coeff += t.coeff;
                    }
                    _ => merged.push(t),
                }
            }
            merged.retain(|t| t.coeff != 0);
            *slot = merged;
        }
    }

    /// The composite `g . f` (apply `f`, then `g`).
    pub fn compose(g: &MonomialMap, f: &MonomialMap) -> MonomialMap {
        let mut terms = Vec::with_capacity(f.terms.len());
        for slot_terms in &f.terms {
            let mut out = Vec::new();
            for t1 in slot_terms {
                for t2 in g.terms.get(t1.target_slot).map_or(&[][..], |v| v.as_slice()) {
                    out.push(MonomialTerm::new(
                        t2.target_slot,
                        t2.scale * t1.scale,
                        t2.scale * t1.offset + t2.offset,
                        t2.coeff * t1.coeff,
                    ));
                }
            }
            terms.push(out);
        }
        let mut m = MonomialMap { terms, quotient: f.quotient || g.quotient };
        m.canonicalize();
        m
    }

    /// Image of the basis vector `(slot, e)` as `(target_slot, exponent,
    /// coeff)` triples, with drops applied against `target`.
    pub fn apply_basis(&self, slot: usize, e: i64, target: &GradedSpace) -> Vec<(usize, i64, i64)> {
        let mut out: Vec<(usize, i64, i64)> = Vec::new();
        for t in &self.terms[slot] {
            let img = t.apply(e);
            if !target.slots[t.target_slot].contains(img) {
                continue;
            }
            match out.iter_mut().find(|(s, x, _)| *s == t.target_slot && *x == img) {
                Some(entry) => entry.2 += t.coeff,
                None => out.push((t.target_slot, img, t.coeff)),
            }
        }
        out.retain(|(_, _, c)| *c != 0);
        out.sort_unstable();
        out
    }

    /// Largest absolute scale over all terms (at least one).
    pub fn max_scale(&self) -> i64 {
        self.terms
            .iter()
            .flatten()
            .map(|t| t.scale.abs())
            .max()
            .unwrap_or(1)
    }

    /// Largest absolute offset over all terms.
    pub fn max_offset(&self) -> i64 {
        self.terms
            .iter()
            .flatten()
            .map(|t| t.offset.abs())
            .max()
            .unwrap_or(0)
    }
}

/// One value of type `T` per object.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerObj<T> {
    pub a1: T,
    pub a2: T,
    pub b1: T,
    pub b2: T,
    pub b3: T,
}

impl<T> PerObj<T> {
    pub fn get(&self, o: Obj) -> &T {
        match o {
            Obj::A1 => &self.a1,
            Obj::A2 => &self.a2,
            Obj::B1 => &self.b1,
            Obj::B2 => &self.b2,
            Obj::B3 => &self.b3,
        }
    }

    pub fn get_mut(&mut self, o: Obj) -> &mut T {
        match o {
            Obj::A1 => &mut self.a1,
            Obj::A2 => &mut self.a2,
            Obj::B1 => &mut self.b1,
            Obj::B2 => &mut self.b2,
            Obj::B3 => &mut self.b3,
        }
    }

    pub fn from_fn(mut f: impl FnMut(Obj) -> T) -> Self {
        PerObj {
            a1: f(Obj::A1),
            a2: f(Obj::A2),
            b1: f(Obj::B1),
            b2: f(Obj::B2),
            b3: f(Obj::B3),
        }
    }
}

/// One value of type `T` per arrow.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PerEdge<T> {
    pub a1b1: T,
    pub a2b2: T,
    pub a1b3: T,
    pub a2b3: T,
}

impl<T> PerEdge<T> {
    pub fn get(&self, e: Edge) -> &T {
        match e {
            Edge::A1B1 => &self.a1b1,
            Edge::A2B2 => &self.a2b2,
            Edge::A1B3 => &self.a1b3,
            Edge::A2B3 => &self.a2b3,
        }
    }

    pub fn get_mut(&mut self, e: Edge) -> &mut T {
        match e {
            Edge::A1B1 => &mut self.a1b1,
            Edge::A2B2 => &mut self.a2b2,
            Edge::A1B3 => &mut self.a1b3,
            Edge::A2B3 => &mut self.a2b3,
        }
    }

    pub fn from_fn(mut f: impl FnMut(Edge) -> T) -> Self {
        PerEdge {
            a1b1: f(Edge::A1B1),
            a2b2: f(Edge::A2B2),
            a1b3: f(Edge::A1B3),
            a2b3: f(Edge::A2B3),
        }
    }
}

/// A sheaf on the five-object category.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sheaf2V {
    pub values: PerObj<GradedSpace>,
    pub maps: PerEdge<MonomialMap>,
    /// When `Some(r)`, the sheaf claims to be a module over the structure
    /// sheaf `O_r`, which pins the exponent scale of every restriction term:
    /// `-1` on the `B1`, `B2` arrows and `r`, `-r` on the `B3` arrows into
    /// `A1`, `A2` respectively.
    pub module_tag: Option<i64>,
}

impl Sheaf2V {
    pub fn value(&self, o: Obj) -> &GradedSpace {
        self.values.get(o)
    }

    pub fn map(&self, e: Edge) -> &MonomialMap {
        self.maps.get(e)
    }

    /// Structural checks: slot indices in range, nonzero scales and
    /// coefficients, canonical finite sets, term-list lengths matching slot
    /// counts, images inside target supports (except on quotient maps), and
    /// the module scale law when tagged.
    pub fn validate(&self) -> Result<()> {
        for o in Obj::ALL {
            for (i, s) in self.value(o).slots.iter().enumerate() {
                if !s.is_canonical() {
                    return Err(Error::Validation(format!(
                        "value at {o}, slot {i}: finite set not sorted/deduped/nonempty"
                    )));
                }
            }
        }
        for e in Edge::ALL {
            let map = self.map(e);
            let src = self.value(e.edge_obj());
            let tgt = self.value(e.vertex());
            check_map_well_formed(map, src, tgt, &e.to_string())?;
            if let Some(r) = self.module_tag {
                let want = match e {
                    Edge::A1B1 | Edge::A2B2 => -1,
                    Edge::A1B3 => r,
                    Edge::A2B3 => -r,
                };
                for (s, terms) in map.terms.iter().enumerate() {
                    for t in terms {
                        if t.scale != want {
                            return Err(Error::Validation(format!(
                                "map {e}, slot {s}: scale {} breaks the module law (want {want})",
                                t.scale
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Largest absolute finite exponent appearing in any value.
    pub fn finite_magnitude(&self) -> i64 {
        Obj::ALL
            .iter()
            .flat_map(|o| self.value(*o).slots.iter())
            .map(|s| s.finite_magnitude())
            .max()
            .unwrap_or(0)
    }

    /// Largest absolute scale over all restriction terms.
    pub fn max_scale(&self) -> i64 {
        Edge::ALL.iter().map(|e| self.map(*e).max_scale()).max().unwrap_or(1)
    }

    /// Largest absolute offset over all restriction terms.
    pub fn max_offset(&self) -> i64 {
        Edge::ALL.iter().map(|e| self.map(*e).max_offset()).max().unwrap_or(0)
    }

    /// True when every value is finite-dimensional.
    pub fn is_finite_dimensional(&self) -> bool {
        Obj::ALL.iter().all(|o| self.value(*o).total_dim().is_some())
    }
}

/// Shape checks shared by sheaf restrictions and morphism components: term
/// lists matching slot counts, slot indices in range, nonzero scales and
/// coefficients, and (for non-quotient maps) images inside target supports.
pub(crate) fn check_map_well_formed(
    map: &MonomialMap,
    src: &GradedSpace,
    tgt: &GradedSpace,
    label: &str,
) -> Result<()> {
    if map.source_slots() != src.num_slots() {
        return Err(Error::Validation(format!(
            "map {label}: {} term lists for {} source slots",
            map.source_slots(),
            src.num_slots()
        )));
    }
    for (s, terms) in map.terms.iter().enumerate() {
        for t in terms {
            if t.target_slot >= tgt.num_slots() {
                return Err(Error::Validation(format!(
                    "map {label}, slot {s}: target slot {} out of range",
                    t.target_slot
                )));
            }
            if t.scale == 0 {
                return Err(Error::Validation(format!("map {label}, slot {s}: zero scale")));
            }
            if t.coeff == 0 {
                return Err(Error::Validation(format!("map {label}, slot {s}: zero coeff")));
            }
            if !map.quotient {
                check_image_in_support(label, s, &src.slots[s], t, &tgt.slots[t.target_slot])?;
            }
        }
    }
    Ok(())
}

fn check_image_in_support(
    label: &str,
    slot: usize,
    src: &SlotSupport,
    t: &MonomialTerm,
    tgt: &SlotSupport,
) -> Result<()> {
    let fail = |witness: i64| {
        Err(Error::Validation(format!(
            "map {label}, slot {slot}: image of exponent {witness} under e -> {}e{:+} \
             leaves the target support",
            t.scale, t.offset
        )))
    };
    match (src, tgt) {
        (SlotSupport::Empty, _) => Ok(()),
        (_, SlotSupport::AllIntegers) => Ok(()),
        (SlotSupport::FiniteSet(s), _) => match s.iter().find(|e| !tgt.contains(t.apply(**e))) {
            Some(w) => fail(*w),
            None => Ok(()),
        },
        (SlotSupport::AllIntegers, _) => fail(if t.scale > 0 { i64::MIN / 4 } else { i64::MAX / 4 }),
        (SlotSupport::NonnegativeIntegers, SlotSupport::NonnegativeIntegers) => {
            if t.scale > 0 {
                if t.offset >= 0 {
                    Ok(())
                } else {
                    fail(0)
                }
            } else {
                // Decreasing rule out of an infinite support must exit.
                fail((t.offset.abs() / t.scale.abs()) + 1)
            }
        }
        (SlotSupport::NonnegativeIntegers, _) => {
            // Infinite image cannot fit in a finite or empty target.
            fail(0)
        }
    }
}

/// The line bundle `L_{r,d}`: one slot everywhere, twist rules
/// `e -> d1 - e` on `B1 -> A1`, `e -> d2 - e` on `B2 -> A2`, and the
/// structure rules `e -> r*e`, `e -> -r*e` out of `B3`.
pub fn make_line_bundle(r: EdgeCount, d: Divisor) -> Sheaf2V {
    let rr = r.get();
    Sheaf2V {
        values: PerObj {
            a1: GradedSpace::new(vec![SlotSupport::AllIntegers]),
            a2: GradedSpace::new(vec![SlotSupport::AllIntegers]),
            b1: GradedSpace::new(vec![SlotSupport::NonnegativeIntegers]),
            b2: GradedSpace::new(vec![SlotSupport::NonnegativeIntegers]),
            b3: GradedSpace::new(vec![SlotSupport::AllIntegers]),
        },
        maps: PerEdge {
            a1b1: MonomialMap {
                terms: vec![vec![MonomialTerm::new(0, -1, d.d1, 1)]],
                quotient: false,
            },
            a2b2: MonomialMap {
                terms: vec![vec![MonomialTerm::new(0, -1, d.d2, 1)]],
                quotient: false,
            },
            a1b3: MonomialMap { terms: vec![vec![MonomialTerm::new(0, rr, 0, 1)]], quotient: false },
            a2b3: MonomialMap {
                terms: vec![vec![MonomialTerm::new(0, -rr, 0, 1)]],
                quotient: false,
            },
        },
        module_tag: Some(rr),
    }
}

/// The structure sheaf `O_r = L_{r,(0,0)}`.
pub fn make_structure_sheaf(r: EdgeCount) -> Sheaf2V {
    make_line_bundle(r, Divisor::new(0, 0))
}

/// The rank-`r` sheaf `M_{r,d}`: like a line bundle at `B1`, `B2`, but the
/// `B3` value has `r` Laurent slots, slot `j` restricting by
/// `e -> r*e + j` into `A1` and `e -> -r*e + j` into `A2` for
/// `j = 0, ..., r-1`.  Together the `B3` slots hit every exponent of `A1`
/// and of `A2` exactly once.
#[allow(non_snake_case)]
pub fn make_M(r: EdgeCount, d: Divisor) -> Sheaf2V {
    let rr = r.get();
    let mut sh = make_line_bundle(r, d);
    sh.values.b3 = GradedSpace::new(vec![SlotSupport::AllIntegers; rr as usize]);
    sh.maps.a1b3 = MonomialMap {
        terms: (0..rr).map(|j| vec![MonomialTerm::new(0, rr, j, 1)]).collect(),
        quotient: false,
    };
    sh.maps.a2b3 = MonomialMap {
        terms: (0..rr).map(|j| vec![MonomialTerm::new(0, -rr, j, 1)]).collect(),
        quotient: false,
    };
    sh
}

/// The constant sheaf with `n`-dimensional stalk: every value is `n` copies
/// of the one-point support `{0}` and every restriction is the identity.
pub fn make_constant(n: usize) -> Sheaf2V {
    let space = || GradedSpace::new(vec![SlotSupport::FiniteSet(vec![0]); n]);
    Sheaf2V {
        values: PerObj::from_fn(|_| space()),
        maps: PerEdge::from_fn(|_| MonomialMap::identity(n)),
        module_tag: None,
    }
}

/// The skyscraper at an object.
///
/// At an edge object `Bj` the value sits at `Bj` alone and every restriction
/// is zero.  At a vertex object `Ai` the value is copied onto `Ai` and both
/// incident edge objects, restricting by the identity toward `Ai` and by
/// zero toward the other vertex.
pub fn make_skyscraper(at: Obj, value: GradedSpace) -> Sheaf2V {
    let n = value.num_slots();
    let mut values = PerObj::from_fn(|_| GradedSpace::zero());
    match at {
        Obj::B1 | Obj::B2 | Obj::B3 => {
            *values.get_mut(at) = value;
            let maps = PerEdge::from_fn(|e| {
                if e.edge_obj() == at {
                    MonomialMap::zero(n)
                } else {
                    MonomialMap::zero(0)
                }
            });
            Sheaf2V { values, maps, module_tag: None }
        }
        Obj::A1 | Obj::A2 => {
            let own_edge = if at == Obj::A1 { Obj::B1 } else { Obj::B2 };
            *values.get_mut(at) = value.clone();
            *values.get_mut(own_edge) = value.clone();
            *values.get_mut(Obj::B3) = value;
            let maps = PerEdge::from_fn(|e| {
                let src = e.edge_obj();
                let src_slots = if src == own_edge || src == Obj::B3 { n } else { 0 };
                if e.vertex() == at && src_slots == n && (src == own_edge || src == Obj::B3) {
                    MonomialMap::identity(n)
                } else {
                    MonomialMap::zero(src_slots)
                }
            });
            Sheaf2V { values, maps, module_tag: None }
        }
    }
}

/// The coskyscraper at an object.
///
/// At a vertex object the value sits there alone with zero maps.  At an edge
/// object `Bj` the value sits at `Bj` and extends to each incident vertex by
/// inverting the local variable: free slots (nonnegative or full supports)
/// become full Laurent slots upstairs, restricting by the structure rule of
/// `O_r` on that arrow; torsion slots (finite supports) die upstairs.
/// Coskyscrapers on free values are the projective objects of the model,
/// which is why `r` must be supplied: it fixes the `B3` structure rules.
pub fn make_coskyscraper(r: EdgeCount, at: Obj, value: GradedSpace) -> Result<Sheaf2V> {
    let rr = r.get();
    let n = value.num_slots();
    let mut values = PerObj::from_fn(|_| GradedSpace::zero());
    match at {
        Obj::A1 | Obj::A2 => {
            *values.get_mut(at) = value;
            let maps = PerEdge::from_fn(|_| MonomialMap::zero(0));
            Ok(Sheaf2V { values, maps, module_tag: Some(rr) })
        }
        Obj::B1 | Obj::B2 | Obj::B3 => {
            // Indices of slots that survive localization, with their scale
            // rule into each incident vertex.
            let mut free: Vec<usize> = Vec::new();
            for (i, s) in value.slots.iter().enumerate() {
                match s {
                    SlotSupport::AllIntegers => free.push(i),
                    SlotSupport::NonnegativeIntegers => {
                        if at == Obj::B3 {
                            return Err(Error::UnsupportedSlot(format!(
                                "slot {i}: a nonnegative support is not a module over the \
                                 Laurent ring at B3"
                            )));
                        }
                        free.push(i);
                    }
                    SlotSupport::FiniteSet(_) | SlotSupport::Empty => {}
                }
            }
            let vertices: Vec<Edge> = Edge::ALL
                .into_iter()
                .filter(|e| e.edge_obj() == at)
                .collect();
            let upstairs = GradedSpace::new(vec![SlotSupport::AllIntegers; free.len()]);
            for e in &vertices {
                *values.get_mut(e.vertex()) = upstairs.clone();
            }
            *values.get_mut(at) = value;
            let maps = PerEdge::from_fn(|e| {
                if e.edge_obj() != at {
                    return MonomialMap::zero(0);
                }
                let scale = match e {
                    Edge::A1B1 | Edge::A2B2 => -1,
                    Edge::A1B3 => rr,
                    Edge::A2B3 => -rr,
                };
                let mut terms = vec![Vec::new(); n];
                for (k, src_slot) in free.iter().enumerate() {
                    terms[*src_slot].push(MonomialTerm::new(k, scale, 0, 1));
                }
                MonomialMap { terms, quotient: false }
            });
            Ok(Sheaf2V { values, maps, module_tag: Some(rr) })
        }
    }
}

fn support_sum(a: &SlotSupport, b: &SlotSupport) -> Result<SlotSupport> {
    use SlotSupport::*;
    Ok(match (a, b) {
        (Empty, _) | (_, Empty) => Empty,
        (AllIntegers, _) | (_, AllIntegers) => AllIntegers,
        (NonnegativeIntegers, NonnegativeIntegers) => NonnegativeIntegers,
        (FiniteSet(_), _) | (_, FiniteSet(_)) => {
            return Err(Error::TorsionTensor(
                "finite-support slot in a tensor factor".to_string(),
            ))
        }
    })
}

/// Tensor product over the structure sheaf.
///
/// Both factors must carry the same module tag and have torsion-free values.
/// Slots multiply pairwise (`(i, j) -> i * |G slots| + j`), exponents add,
/// and matching-scale restriction terms multiply; a scale mismatch between
/// factors would make the product rule ill-defined and is rejected.
pub fn tensor(f: &Sheaf2V, g: &Sheaf2V) -> Result<Sheaf2V> {
    match (f.module_tag, g.module_tag) {
        (Some(a), Some(b)) if a == b => {}
        (a, b) => return Err(Error::TagMismatch(a, b)),
    }
    let values = PerObj::from_fn(|o| {
        let (fv, gv) = (f.value(o), g.value(o));
        let mut slots = Vec::with_capacity(fv.num_slots() * gv.num_slots());
        for sa in &fv.slots {
            for sb in &gv.slots {
                // Torsion errors surface below; map to Empty here to keep
                // this closure infallible.
                slots.push(support_sum(sa, sb).unwrap_or(SlotSupport::Empty));
            }
        }
        GradedSpace::new(slots)
    });
    // Re-run the fallible support sums to surface torsion errors.
    for o in Obj::ALL {
        for sa in &f.value(o).slots {
            for sb in &g.value(o).slots {
                support_sum(sa, sb)?;
            }
        }
    }
    let mut maps = PerEdge::from_fn(|_| MonomialMap::zero(0));
    for e in Edge::ALL {
        let (fm, gm) = (f.map(e), g.map(e));
        if fm.quotient || gm.quotient {
            return Err(Error::TorsionTensor(format!("map {e} carries a quotient flag")));
        }
        let g_src = g.value(e.edge_obj()).num_slots();
        let g_tgt = g.value(e.vertex()).num_slots();
        let mut terms = vec![Vec::new(); fm.source_slots() * g_src];
        for (i, fts) in fm.terms.iter().enumerate() {
            for (j, gts) in gm.terms.iter().enumerate() {
                let out = &mut terms[i * g_src + j];
                for tf in fts {
                    for tg in gts {
                        if tf.scale != tg.scale {
                            return Err(Error::Validation(format!(
                                "tensor factors disagree on exponent scale along {e}"
                            )));
                        }
                        out.push(MonomialTerm::new(
                            tf.target_slot * g_tgt + tg.target_slot,
                            tf.scale,
                            tf.offset + tg.offset,
                            tf.coeff * tg.coeff,
                        ));
                    }
                }
            }
        }
        let mut m = MonomialMap { terms, quotient: false };
        m.canonicalize();
        *maps.get_mut(e) = m;
    }
    Ok(Sheaf2V { values, maps, module_tag: f.module_tag })
}

/// Direct sum: slots concatenate objectwise (left factor first) and the
/// restrictions act blockwise.  Module tags must agree when both are set;
/// a sum with an untagged factor keeps the tagged side's structure rules.
pub fn direct_sum(f: &Sheaf2V, g: &Sheaf2V) -> Result<Sheaf2V> {
    if let (Some(a), Some(b)) = (f.module_tag, g.module_tag) {
        if a != b {
            return Err(Error::TagMismatch(Some(a), Some(b)));
        }
    }
    let values = PerObj::from_fn(|o| {
        let mut slots = f.value(o).slots.clone();
        slots.extend(g.value(o).slots.iter().cloned());
        GradedSpace::new(slots)
    });
    let maps = PerEdge::from_fn(|e| {
        let (fm, gm) = (f.map(e), g.map(e));
        let f_tgt = f.value(e.vertex()).num_slots();
        let mut terms = fm.terms.clone();
        for slot_terms in &gm.terms {
            terms.push(
                slot_terms
                    .iter()
                    .map(|t| MonomialTerm::new(t.target_slot + f_tgt, t.scale, t.offset, t.coeff))
                    .collect(),
            );
        }
        MonomialMap { terms, quotient: fm.quotient || gm.quotient }
    });
    Ok(Sheaf2V { values, maps, module_tag: f.module_tag.or(g.module_tag) })
}

/// Zeroes out the values away from `keep`, replacing affected restrictions
/// by zero maps.
pub fn restrict_extend_zero(f: &Sheaf2V, keep: &BTreeSet<Obj>) -> Sheaf2V {
    let values = PerObj::from_fn(|o| {
        if keep.contains(&o) {
            f.value(o).clone()
        } else {
            GradedSpace::zero()
        }
    });
    let maps = PerEdge::from_fn(|e| {
        if keep.contains(&e.edge_obj()) && keep.contains(&e.vertex()) {
            f.map(e).clone()
        } else if keep.contains(&e.edge_obj()) {
            MonomialMap::zero(f.value(e.edge_obj()).num_slots())
        } else {
            MonomialMap::zero(0)
        }
    });
    Sheaf2V { values, maps, module_tag: f.module_tag }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64) -> EdgeCount {
        EdgeCount::new(n).unwrap()
    }

    #[test]
    fn bundled_sheaves_validate() {
        for rr in 1..=6 {
            for d in [Divisor::new(0, 0), Divisor::new(3, -2), Divisor::new(-5, 7)] {
                make_structure_sheaf(r(rr)).validate().unwrap();
                make_line_bundle(r(rr), d).validate().unwrap();
                make_M(r(rr), d).validate().unwrap();
            }
        }
        make_constant(3).validate().unwrap();
        for o in Obj::ALL {
            make_skyscraper(o, GradedSpace::new(vec![SlotSupport::finite([0])]))
                .validate()
                .unwrap();
        }
        make_coskyscraper(r(4), Obj::B1, GradedSpace::new(vec![SlotSupport::NonnegativeIntegers]))
            .unwrap()
            .validate()
            .unwrap();
        make_coskyscraper(r(4), Obj::B3, GradedSpace::new(vec![SlotSupport::AllIntegers]))
            .unwrap()
            .validate()
            .unwrap();
        make_coskyscraper(r(4), Obj::A1, GradedSpace::new(vec![SlotSupport::AllIntegers]))
            .unwrap()
            .validate()
            .unwrap();
    }

    #[test]
    fn m_sheaf_b3_rules_cover_each_vertex_exponent_once() {
        // Slot j sends e to r*e + j, so over all slots and e the images
        // partition the integers.
        let sh = make_M(r(3), Divisor::new(1, -1));
        for target in -7i64..=7 {
            let mut hits = 0;
            for (j, terms) in sh.maps.a1b3.terms.iter().enumerate() {
                assert_eq!(terms.len(), 1);
                let t = terms[0];
                assert_eq!(t.target_slot, 0);
                assert_eq!(t.scale, 3);
                assert_eq!(t.offset, j as i64);
                if (target - t.offset).rem_euclid(3) == 0 {
                    hits += 1;
                }
            }
            assert_eq!(hits, 1, "exponent {target} hit once");
        }
    }

    #[test]
    fn validation_rejects_escaping_image() {
        let mut sh = make_line_bundle(r(2), Divisor::new(0, 0));
        // Shrink A1 to a finite target: both maps into it now escape.
        sh.values.a1 = GradedSpace::new(vec![SlotSupport::finite([0, 1])]);
        assert!(matches!(sh.validate(), Err(Error::Validation(_))));
        // The quotient flag permits exactly that shape, map by map.
        sh.maps.a1b1.quotient = true;
        assert!(sh.validate().is_err());
        sh.maps.a1b3.quotient = true;
        sh.validate().unwrap();
    }

    #[test]
    fn validation_enforces_module_scale_law() {
        let mut sh = make_structure_sheaf(r(3));
        sh.maps.a1b3.terms[0][0].scale = 2;
        assert!(sh.validate().is_err());
        sh.module_tag = None;
        // Untagged, the same map is structurally fine (image stays in a full
        // support).
        sh.validate().unwrap();
    }

    #[test]
    fn compose_is_rule_substitution() {
        // f: e -> 2e + 1 into slot 0; g: e -> -e + 3.
        let f = MonomialMap { terms: vec![vec![MonomialTerm::new(0, 2, 1, 1)]], quotient: false };
        let g = MonomialMap { terms: vec![vec![MonomialTerm::new(0, -1, 3, 5)]], quotient: false };
        let gf = MonomialMap::compose(&g, &f);
        assert_eq!(gf.terms[0], vec![MonomialTerm::new(0, -2, 2, 5)]);
    }

    #[test]
    fn apply_basis_merges_and_drops() {
        let target = GradedSpace::new(vec![SlotSupport::finite([0, 2])]);
        let map = MonomialMap {
            terms: vec![vec![
                MonomialTerm::new(0, 1, 0, 1),
                MonomialTerm::new(0, -1, 0, 2),
                MonomialTerm::new(0, 1, 1, 1),
            ]],
            quotient: true,
        };
        // At e = 0: terms give exponents 0, 0, 1; the 1 is dropped, the two
        // zeros merge.
        assert_eq!(map.apply_basis(0, 0, &target), vec![(0, 0, 3)]);
        // At e = 1: exponents 1 (dropped), -1 (dropped), 2 (kept).
        assert_eq!(map.apply_basis(0, 1, &target), vec![(0, 2, 1)]);
    }

    #[test]
    fn tensor_of_line_bundles_twists_add() {
        let a = make_line_bundle(r(3), Divisor::new(2, -1));
        let b = make_line_bundle(r(3), Divisor::new(-1, 4));
        let t = tensor(&a, &b).unwrap();
        t.validate().unwrap();
        let c = make_line_bundle(r(3), Divisor::new(1, 3));
        assert_eq!(t, c);
    }

    #[test]
    fn tensor_rejects_mismatched_tags_and_torsion() {
        let a = make_line_bundle(r(2), Divisor::new(0, 0));
        let b = make_line_bundle(r(3), Divisor::new(0, 0));
        assert!(matches!(tensor(&a, &b), Err(Error::TagMismatch(_, _))));
        let mut c = make_line_bundle(r(2), Divisor::new(0, 0));
        c.values.b1 = GradedSpace::new(vec![SlotSupport::finite([0])]);
        c.maps.a1b1.quotient = true;
        assert!(tensor(&a, &c).is_err());
    }

    #[test]
    fn restrict_extend_zero_keeps_interface() {
        let sh = make_M(r(2), Divisor::new(1, 1));
        let keep: BTreeSet<Obj> = [Obj::B3, Obj::A1].into_iter().collect();
        let cut = restrict_extend_zero(&sh, &keep);
        cut.validate().unwrap();
        assert_eq!(cut.value(Obj::B3), sh.value(Obj::B3));
        assert!(cut.value(Obj::B1).is_zero());
        assert_eq!(cut.map(Edge::A1B3), sh.map(Edge::A1B3));
        assert_eq!(cut.map(Edge::A2B3).terms, vec![Vec::new(); 2]);
    }

    #[test]
    fn sheaf_serde_round_trip() {
        let sh = make_M(r(3), Divisor::new(2, -5));
        let json = serde_json::to_string(&sh).unwrap();
        let back: Sheaf2V = serde_json::from_str(&json).unwrap();
        assert_eq!(sh, back);
    }

    #[test]
    fn constant_sheaf_shape() {
        let c = make_constant(2);
        for o in Obj::ALL {
            assert_eq!(c.value(o).num_slots(), 2);
            assert_eq!(c.value(o).dim_at(0), 2);
            assert_eq!(c.value(o).dim_at(1), 0);
        }
    }

    #[test]
    fn direct_sum_is_blockwise() {
        let f = make_M(r(2), Divisor::new(1, 0));
        let g = make_M(r(2), Divisor::new(0, -1));
        let s = direct_sum(&f, &g).unwrap();
        s.validate().unwrap();
        for o in Obj::ALL {
            assert_eq!(s.value(o).num_slots(), f.value(o).num_slots() + g.value(o).num_slots());
            for e in -4..=4 {
                assert_eq!(s.value(o).dim_at(e), f.value(o).dim_at(e) + g.value(o).dim_at(e));
            }
        }
        // The right block's restrictions land past the left block's slots.
        let shift = f.value(Obj::A1).num_slots();
        let left = s.map(Edge::A1B3).apply_basis(0, 0, s.value(Obj::A1));
        let right =
            s.map(Edge::A1B3).apply_basis(f.value(Obj::B3).num_slots(), 0, s.value(Obj::A1));
        assert_eq!(left, f.map(Edge::A1B3).apply_basis(0, 0, f.value(Obj::A1)));
        assert_eq!(
            right,
            g.map(Edge::A1B3)
                .apply_basis(0, 0, g.value(Obj::A1))
                .into_iter()
                .map(|(t, x, c)| (t + shift, x, c))
                .collect::<Vec<_>>()
        );
        assert!(direct_sum(&f, &make_M(r(3), Divisor::new(0, 0))).is_err());
    }
}
