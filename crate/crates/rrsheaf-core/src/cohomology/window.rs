//! Windowed rank computation.
//!
//! The most general engine: truncate every slot to exponents in
//! `[-w, w]`, build the comparison matrix over the configured field, and
//! row reduce.  A source basis vector becomes a column only when all of
//! its surviving images also lie inside the window, so every kernel
//! vector of the truncated matrix is a genuine global section and the
//! kernel count is a certified lower bound.  Nothing certifies the
//! cokernel count, which is reported as an estimate.
//!
//! The kernel count is promoted to a certified value in two cases: the
//! sheaf is finite dimensional and fits inside the window (the matrix is
//! then the whole map), or the count is stable from `w` to `2w` and the
//! closed form engine independently confirms it.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cohomology::{assemble_u, betti_closed_form_plb, BettiValue};
use crate::field::Scalar;
use crate::linalg::SparseMat;
use crate::sheaf::Sheaf2V;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct WindowReport {
    pub b0: BettiValue,
    pub b1: BettiValue,
    pub window: i64,
    pub columns: usize,
    pub rows: usize,
    pub rank: usize,
    /// The truncation was no truncation at all: the sheaf is finite
    /// dimensional and fits inside the window.
    pub exact: bool,
}

struct Truncation {
    columns: usize,
    rows: usize,
    rank: usize,
}

fn truncate_and_rank<F: Scalar>(
    field: &F,
    cx: &crate::cohomology::MonomialComplex,
    w: i64,
) -> Truncation {
    // Row index per included target basis vector, in deterministic order.
    let mut row_ix: BTreeMap<(usize, i64), usize> = BTreeMap::new();
    for (j, (_, _, supp)) in cx.targets.iter().enumerate() {
        for x in supp.iter_window(-w, w) {
            let next = row_ix.len();
            row_ix.insert((j, x), next);
        }
    }

    // Columns: source basis vectors whose surviving images all fit.
    let mut rows: Vec<Vec<(usize, F::Elem)>> = vec![Vec::new(); row_ix.len()];
    let mut columns = 0usize;
    for (i, (_, _, supp)) in cx.sources.iter().enumerate() {
        for e in supp.iter_window(-w, w) {
            let images = cx.image_of_basis(field, i, e);
            if images.iter().any(|(_, x, _)| x.abs() > w) {
                continue;
            }
            let col = columns;
            columns += 1;
            for (j, x, c) in images {
                rows[row_ix[&(j, x)]].push((col, c));
            }
        }
    }

    let mut mat = SparseMat::new(columns.max(1));
    for row in rows {
        mat.push_row(field, row);
    }
    Truncation { columns, rows: row_ix.len(), rank: mat.rank(field) }
}

/// Betti numbers from the truncated comparison matrix at window `w`,
/// cross-checked at window `2w`.
pub fn betti_window<F: Scalar>(field: &F, sheaf: &Sheaf2V, w: i64) -> Result<WindowReport> {
    if w <= 0 {
        return Err(Error::InvalidArgument(format!(
            "window must be positive, got {w}"
        )));
    }
    sheaf.validate()?;
    let cx = assemble_u(sheaf);

    let zero_sheaf = cx
        .sources
        .iter()
        .chain(cx.targets.iter())
        .all(|(_, _, supp)| supp.is_empty());
    if zero_sheaf {
        return Ok(WindowReport {
            b0: BettiValue::finite(0),
            b1: BettiValue::finite(0),
            window: w,
            columns: 0,
            rows: 0,
            rank: 0,
            exact: true,
        });
    }

    let t = truncate_and_rank(field, &cx, w);
    if t.columns == 0 && t.rows == 0 {
        return Err(Error::InvalidArgument(format!(
            "window {w} does not include any basis vector of the sheaf"
        )));
    }

    let exact = sheaf.is_finite_dimensional() && cx.finite_magnitude() <= w;
    let k_w = t.columns as i64 - t.rank as i64;
    let c_w = t.rows as i64 - t.rank as i64;
    if exact {
        return Ok(WindowReport {
            b0: BettiValue::finite(k_w),
            b1: BettiValue::finite(c_w),
            window: w,
            columns: t.columns,
            rows: t.rows,
            rank: t.rank,
            exact: true,
        });
    }

    let t2 = truncate_and_rank(field, &cx, 2 * w);
    let k_2w = t2.columns as i64 - t2.rank as i64;

    let mut b0 = BettiValue::WindowEstimate { n: k_w, window: w };
    if k_w == k_2w {
        if let Ok(rep) = betti_closed_form_plb(sheaf) {
            if rep.b0 == BettiValue::finite(k_w) {
                b0 = BettiValue::finite(k_w);
            }
        }
    }

    Ok(WindowReport {
        b0,
        b1: BettiValue::WindowEstimate { n: c_w, window: w },
        window: w,
        columns: t.columns,
        rows: t.rows,
        rank: t.rank,
        exact: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::divisor::{lat_count, Divisor, EdgeCount};
    use crate::field::{PrimeField, Rationals};
    use crate::sheaf::{make_constant, make_line_bundle, make_M};

    fn ec(r: i64) -> EdgeCount {
        EdgeCount::new(r).unwrap()
    }

    #[test]
    fn constant_sheaf_is_computed_exactly() {
        let q = Rationals;
        let rep = betti_window(&q, &make_constant(2), 4).unwrap();
        assert!(rep.exact);
        assert_eq!(rep.b0, BettiValue::finite(2));
        assert_eq!(rep.b1, BettiValue::finite(0));
    }

    #[test]
    fn window_kernel_is_a_lower_bound_for_sections() {
        let q = Rationals;
        for r in 1..=4 {
            for d1 in -4..=4 {
                for d2 in -4..=4 {
                    let d = Divisor::new(d1, d2);
                    let rep = betti_window(&q, &make_M(ec(r), d), 16).unwrap();
                    let true_b0 = lat_count(ec(r), d);
                    let got = rep.b0.numeric().unwrap();
                    assert!(got <= true_b0, "r={r} d={d:?}: {got} > {true_b0}");
                    // At this window size the bound is sharp on this grid,
                    // and stability plus the closed form promotes it.
                    assert_eq!(rep.b0, BettiValue::finite(true_b0), "r={r} d={d:?}");
                }
            }
        }
    }

    #[test]
    fn line_bundle_cokernel_stays_an_estimate() {
        let q = Rationals;
        let rep = betti_window(&q, &make_line_bundle(ec(3), Divisor::new(1, 1)), 8).unwrap();
        assert!(matches!(rep.b1, BettiValue::WindowEstimate { .. }));
    }

    #[test]
    fn prime_field_agrees_with_rationals_here() {
        let q = Rationals;
        let f2 = PrimeField::new(2).unwrap();
        for d1 in -3..=3 {
            for d2 in -3..=3 {
                let m = make_M(ec(3), Divisor::new(d1, d2));
                let a = betti_window(&q, &m, 12).unwrap();
                let b = betti_window(&f2, &m, 12).unwrap();
                assert_eq!(a.b0, b.b0);
                assert_eq!(a.b1, b.b1);
            }
        }
    }

    #[test]
    fn rejects_nonpositive_window() {
        let q = Rationals;
        let err = betti_window(&q, &make_constant(1), 0).unwrap_err();
        assert!(matches!(err, Error::InvalidArgument(_)));
    }
}
