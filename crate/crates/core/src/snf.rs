//! Integer Smith normal form.
//!
//! Works over `i128`; entries stay small for the matrices built from group
//! presentations (moduli and residues), so overflow is not a practical concern
//! at the sizes this crate handles.

/// Result of reducing an integer matrix `M` to `U * M * V = D`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SmithForm {
    /// Diagonal of `D`, length `min(rows, cols)`, each `d_i >= 0` and `d_i | d_{i+1}`.
    pub diagonal: Vec<i128>,
    /// Unimodular row transform `U` (rows x rows).
    pub left: Vec<Vec<i128>>,
    /// Unimodular column transform `V` (cols x cols).
    pub right: Vec<Vec<i128>>,
}

fn identity(n: usize) -> Vec<Vec<i128>> {
    (0..n).map(|i| (0..n).map(|j| i128::from(i == j)).collect()).collect()
}

/// Computes the Smith normal form of `matrix` (row-major; all rows must have
/// equal length).
pub fn smith_normal_form(matrix: &[Vec<i128>]) -> SmithForm {
    let rows = matrix.len();
    let cols = matrix.first().map_or(0, Vec::len);
    assert!(matrix.iter().all(|r| r.len() == cols), "ragged matrix");

    let mut a: Vec<Vec<i128>> = matrix.to_vec();
    let mut u = identity(rows);
    let mut v = identity(cols);

    let swap_rows = |a: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, i: usize, j: usize| {
        a.swap(i, j);
        u.swap(i, j);
    };
    let swap_cols = |a: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, i: usize, j: usize| {
        for row in a.iter_mut() {
            row.swap(i, j);
        }
        for row in v.iter_mut() {
            row.swap(i, j);
        }
    };
    // row_i -= q * row_j
    let row_axpy = |a: &mut Vec<Vec<i128>>, u: &mut Vec<Vec<i128>>, i: usize, j: usize, q: i128| {
        for c in 0..a[i].len() {
            let x = a[j][c];
            a[i][c] -= q * x;
        }
        for c in 0..u[i].len() {
            let x = u[j][c];
            u[i][c] -= q * x;
        }
    };
    // col_i -= q * col_j
    let col_axpy = |a: &mut Vec<Vec<i128>>, v: &mut Vec<Vec<i128>>, i: usize, j: usize, q: i128| {
        for row in a.iter_mut() {
            let x = row[j];
            row[i] -= q * x;
        }
        for row in v.iter_mut() {
            let x = row[j];
            row[i] -= q * x;
        }
    };

    let steps = rows.min(cols);
    for t in 0..steps {
        loop {
            // Smallest nonzero entry of the trailing block becomes the pivot.
            let mut pivot: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if a[i][j] != 0 && pivot.is_none_or(|(pi, pj)| a[i][j].abs() < a[pi][pj].abs()) {
                        pivot = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = pivot else { break };
            swap_rows(&mut a, &mut u, t, pi);
            swap_cols(&mut a, &mut v, t, pj);

            let p = a[t][t];
            let mut dirty = false;
            for i in t + 1..rows {
                let q = a[i][t].div_euclid(p);
                if q != 0 {
                    row_axpy(&mut a, &mut u, i, t, q);
                }
                dirty |= a[i][t] != 0;
            }
            for j in t + 1..cols {
                let q = a[t][j].div_euclid(p);
                if q != 0 {
                    col_axpy(&mut a, &mut v, j, t, q);
                }
                dirty |= a[t][j] != 0;
            }
            if dirty {
                continue;
            }
            // Pivot is isolated; it must also divide the rest of the block.
            let offender =
                (t + 1..rows).flat_map(|i| (t + 1..cols).map(move |j| (i, j))).find(|&(i, j)| a[i][j] % p != 0);
            match offender {
                Some((i, _)) => row_axpy(&mut a, &mut u, t, i, -1),
                None => break,
            }
        }
        if a[t][t] < 0 {
            for x in a[t].iter_mut() {
                *x = -*x;
            }
            for x in u[t].iter_mut() {
                *x = -*x;
            }
        }
    }

    SmithForm { diagonal: (0..steps).map(|i| a[i][i]).collect(), left: u, right: v }
}
