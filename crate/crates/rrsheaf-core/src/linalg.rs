//! Exact linear algebra over a [`Scalar`] field.
//!
//! The matrices this crate produces are extremely sparse: restriction maps
//! are monomial, so a column touches at most a handful of rows.  Rank is
//! computed by incremental row reduction against a pivot table keyed by
//! leading column, which keeps fill-in negligible for these shapes while
//! staying exact.  A dense row-reduction (`dense_rank`, `dense_kernel_basis`)
//! serves as the reference implementation and as the kernel-basis extractor
//! for the small systems that need explicit witnesses.

use std::collections::HashMap;

use crate::field::Scalar;

/// A sparse matrix stored by rows; each row is a sorted `(col, coeff)` list.
#[derive(Clone, Debug)]
pub struct SparseMat<F: Scalar> {
    pub ncols: usize,
    pub rows: Vec<Vec<(usize, F::Elem)>>,
}

impl<F: Scalar> SparseMat<F> {
    pub fn new(ncols: usize) -> Self {
        SparseMat { ncols, rows: Vec::new() }
    }

    /// Adds a row given as an unsorted `(col, coeff)` list; duplicate columns
    /// are combined and zero coefficients dropped.
    pub fn push_row(&mut self, field: &F, entries: Vec<(usize, F::Elem)>) {
        self.rows.push(normalize_row(field, entries));
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    /// Exact rank by incremental reduction.
    pub fn rank(&self, field: &F) -> usize {
        let mut pivots: HashMap<usize, Vec<(usize, F::Elem)>> = HashMap::new();
        for row in &self.rows {
            if let Some(reduced) = reduce_row(field, row.clone(), &pivots) {
                pivots.insert(reduced[0].0, reduced);
            }
        }
        pivots.len()
    }

    /// Kernel dimension (`ncols - rank`).
    pub fn nullity(&self, field: &F) -> usize {
        self.ncols - self.rank(field)
    }

    pub fn to_dense(&self, field: &F) -> Vec<Vec<F::Elem>> {
        let mut out = vec![vec![field.zero(); self.ncols]; self.rows.len()];
        for (i, row) in self.rows.iter().enumerate() {
            for (c, v) in row {
                out[i][*c] = v.clone();
            }
        }
        out
    }
}

fn normalize_row<F: Scalar>(field: &F, mut entries: Vec<(usize, F::Elem)>) -> Vec<(usize, F::Elem)> {
    entries.sort_by_key(|(c, _)| *c);
    let mut out: Vec<(usize, F::Elem)> = Vec::with_capacity(entries.len());
    for (c, v) in entries {
        match out.last_mut() {
            Some((lc, lv)) if *lc == c => *lv = field.add(lv, &v),
            _ => out.push((c, v)),
        }
    }
    out.retain(|(_, v)| !field.is_zero(v));
    out
}

/// Fully reduces `row` against the pivot table (pivot rows are keyed by their
/// leading column and normalized to leading coefficient one).  Returns the
/// reduced row normalized the same way, or `None` if it vanished.
fn reduce_row<F: Scalar>(
    field: &F,
    mut row: Vec<(usize, F::Elem)>,
    pivots: &HashMap<usize, Vec<(usize, F::Elem)>>,
) -> Option<Vec<(usize, F::Elem)>> {
    loop {
        if row.is_empty() {
            return None;
        }
        let lead = row[0].0;
        match pivots.get(&lead) {
            None => {
                // Normalize so the leading coefficient is one.
                let inv = field.inv(&row[0].1);
                for (_, v) in row.iter_mut() {
                    *v = field.mul(v, &inv);
                }
                return Some(row);
            }
            Some(piv) => {
                let factor = row[0].1.clone();
                row = axpy_neg(field, row, piv, &factor);
            }
        }
    }
}

/// Computes `row - factor * piv`, keeping entries sorted and nonzero.
fn axpy_neg<F: Scalar>(
    field: &F,
    row: Vec<(usize, F::Elem)>,
    piv: &[(usize, F::Elem)],
    factor: &F::Elem,
) -> Vec<(usize, F::Elem)> {
    let mut out = Vec::with_capacity(row.len() + piv.len());
    let (mut i, mut j) = (0usize, 0usize);
    while i < row.len() || j < piv.len() {
        let take_row = j >= piv.len() || (i < row.len() && row[i].0 < piv[j].0);
        let take_piv = i >= row.len() || (j < piv.len() && piv[j].0 < row[i].0);
        if take_row {
            out.push(row[i].clone());
            i += 1;
        } else if take_piv {
            let (c, v) = &piv[j];
            out.push((*c, field.neg(&field.mul(factor, v))));
            j += 1;
        } else {
            let (c, v) = &row[i];
            let w = field.sub(v, &field.mul(factor, &piv[j].1));
            if !field.is_zero(&w) {
                out.push((*c, w));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

/// Rank of a dense matrix by plain Gaussian elimination (reference path).
pub fn dense_rank<F: Scalar>(field: &F, mat: &[Vec<F::Elem>]) -> usize {
    if mat.is_empty() {
        return 0;
    }
    let mut m: Vec<Vec<F::Elem>> = mat.to_vec();
    let ncols = m[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(pr) = (rank..m.len()).find(|&r| !field.is_zero(&m[r][col])) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = field.inv(&m[rank][col].clone());
        for x in m[rank][col..].iter_mut() {
            *x = field.mul(x, &inv);
        }
        for r in 0..m.len() {
            if r == rank || field.is_zero(&m[r][col]) {
                continue;
            }
            let (pivot_row, row) = if r < rank {
                let (head, tail) = m.split_at_mut(rank);
                (&tail[0], &mut head[r])
            } else {
                let (head, tail) = m.split_at_mut(r);
                (&head[rank], &mut tail[0])
            };
            let f = row[col].clone();
            for (x, p) in row[col..].iter_mut().zip(&pivot_row[col..]) {
                let t = field.mul(&f, p);
                *x = field.sub(x, &t);
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

/// Basis of the right kernel of a dense matrix, one vector per free column.
///
/// Vectors come back in the order of their free columns, with the free column
/// set to one; over a shared pivot structure this makes the output canonical.
pub fn dense_kernel_basis<F: Scalar>(
    field: &F,
    mat: &[Vec<F::Elem>],
    ncols: usize,
) -> Vec<Vec<F::Elem>> {
    let mut m: Vec<Vec<F::Elem>> = mat.to_vec();
    let nrows = m.len();
    let mut pivot_of_col: Vec<Option<usize>> = vec![None; ncols];
    let mut rank = 0usize;
    for col in 0..ncols {
        let Some(pr) = (rank..nrows).find(|&r| !field.is_zero(&m[r][col])) else {
            continue;
        };
        m.swap(rank, pr);
        let inv = field.inv(&m[rank][col].clone());
        for x in m[rank].iter_mut() {
            *x = field.mul(x, &inv);
        }
        for r in 0..nrows {
            if r == rank || field.is_zero(&m[r][col]) {
                continue;
            }
            let (pivot_row, row) = if r < rank {
                let (head, tail) = m.split_at_mut(rank);
                (&tail[0], &mut head[r])
            } else {
                let (head, tail) = m.split_at_mut(r);
                (&head[rank], &mut tail[0])
            };
            let f = row[col].clone();
            for (x, p) in row.iter_mut().zip(pivot_row) {
                let t = field.mul(&f, p);
                *x = field.sub(x, &t);
            }
        }
        pivot_of_col[col] = Some(rank);
        rank += 1;
        if rank == nrows {
            // Remaining columns are all free.
            break;
        }
    }
    let mut basis = Vec::new();
    for free in 0..ncols {
        if pivot_of_col[free].is_some() {
            continue;
        }
        let mut v = vec![field.zero(); ncols];
        v[free] = field.one();
        for col in 0..ncols {
            if let Some(r) = pivot_of_col[col] {
                v[col] = field.neg(&m[r][free]);
            }
        }
        basis.push(v);
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};
    use proptest::prelude::*;

    fn sparse_from_dense(field: &Rationals, dense: &[Vec<i64>]) -> SparseMat<Rationals> {
        let ncols = dense.first().map_or(0, |r| r.len());
        let mut m = SparseMat::new(ncols);
        for row in dense {
            let entries = row
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0)
                .map(|(c, v)| (c, field.embed_i64(*v)))
                .collect();
            m.push_row(field, entries);
        }
        m
    }

    #[test]
    fn rank_of_small_examples() {
        let f = Rationals;
        let m = sparse_from_dense(&f, &[vec![1, 2], vec![2, 4]]);
        assert_eq!(m.rank(&f), 1);
        let m = sparse_from_dense(&f, &[vec![1, 0], vec![0, 1], vec![1, 1]]);
        assert_eq!(m.rank(&f), 2);
        let m = sparse_from_dense(&f, &[vec![0, 0], vec![0, 0]]);
        assert_eq!(m.rank(&f), 0);
        assert_eq!(m.nullity(&f), 2);
    }

    #[test]
    fn kernel_basis_solves_the_system() {
        let f = Rationals;
        // x + y + z = 0, y - z = 0  =>  kernel spanned by (-2, 1, 1).
        let dense = vec![
            vec![f.embed_i64(1), f.embed_i64(1), f.embed_i64(1)],
            vec![f.embed_i64(0), f.embed_i64(1), f.embed_i64(-1)],
        ];
        let basis = dense_kernel_basis(&f, &dense, 3);
        assert_eq!(basis.len(), 1);
        for row in &dense {
            let mut acc = f.zero();
            for (c, v) in row.iter().enumerate() {
                acc = f.add(&acc, &f.mul(v, &basis[0][c]));
            }
            assert!(f.is_zero(&acc));
        }
    }

    #[test]
    fn duplicate_columns_combine() {
        let f = Rationals;
        let mut m = SparseMat::new(2);
        m.push_row(&f, vec![(0, f.embed_i64(1)), (0, f.embed_i64(-1)), (1, f.embed_i64(3))]);
        assert_eq!(m.rows[0], vec![(1, f.embed_i64(3))]);
    }

    proptest! {
        #[test]
        fn sparse_rank_matches_dense_over_q(
            rows in proptest::collection::vec(
                proptest::collection::vec(-3i64..=3, 5), 0..7)
        ) {
            let f = Rationals;
            let sparse = sparse_from_dense(&f, &rows);
            let dense: Vec<Vec<_>> = rows.iter()
                .map(|r| r.iter().map(|v| f.embed_i64(*v)).collect())
                .collect();
            prop_assert_eq!(sparse.rank(&f), dense_rank(&f, &dense));
        }

        #[test]
        fn sparse_rank_matches_dense_over_f5(
            rows in proptest::collection::vec(
                proptest::collection::vec(-3i64..=3, 4), 0..6)
        ) {
            let f = PrimeField::new(5).unwrap();
            let ncols = 4;
            let mut sparse = SparseMat::new(ncols);
            for row in &rows {
                let entries = row.iter().enumerate()
                    .map(|(c, v)| (c, f.embed_i64(*v)))
                    .collect();
                sparse.push_row(&f, entries);
            }
            let dense: Vec<Vec<_>> = rows.iter()
                .map(|r| r.iter().map(|v| f.embed_i64(*v)).collect())
                .collect();
            prop_assert_eq!(sparse.rank(&f), dense_rank(&f, &dense));
        }

        #[test]
        fn kernel_dimension_is_nullity(
            rows in proptest::collection::vec(
                proptest::collection::vec(-2i64..=2, 4), 1..6)
        ) {
            let f = Rationals;
            let dense: Vec<Vec<_>> = rows.iter()
                .map(|r| r.iter().map(|v| f.embed_i64(*v)).collect())
                .collect();
            let basis = dense_kernel_basis(&f, &dense, 4);
            prop_assert_eq!(basis.len(), 4 - dense_rank(&f, &dense));
        }
    }
}
