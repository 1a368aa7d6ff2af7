//! One-sided Jacobi singular values and index-by-index unfoldings, written
//! from scratch on plain column-major slices.

/// Singular values of the `rows × cols` column-major matrix `a`, descending.
pub fn singular_values(rows: usize, cols: usize, a: &[f64]) -> Vec<f64> {
    assert_eq!(a.len(), rows * cols);
    // Orthogonalize the columns of the taller orientation.
    let (m, n, mut w) = if rows >= cols {
        (rows, cols, a.to_vec())
    } else {
        let mut t = vec![0.0; a.len()];
        for j in 0..cols {
            for i in 0..rows {
                t[j + cols * i] = a[i + rows * j];
            }
        }
        (cols, rows, t)
    };
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, 0.0);
                for i in 0..m {
                    let (x, y) = (w[i + m * p], w[i + m * q]);
                    alpha += x * x;
                    beta += y * y;
                    gamma += x * y;
                }
                if gamma.abs() <= 1e-15 * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let (x, y) = (w[i + m * p], w[i + m * q]);
                    w[i + m * p] = c * x - s * y;
                    w[i + m * q] = s * x + c * y;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = (0..n)
        .map(|j| w[m * j..m * (j + 1)].iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s
}

/// Matrix whose row index runs over `row_modes` (first fastest) and whose
/// column index runs over the remaining modes in ascending order.
pub fn unfold(data: &[f64], shape: &[usize], row_modes: &[usize]) -> (usize, usize, Vec<f64>) {
    let col_modes: Vec<usize> = (0..shape.len()).filter(|k| !row_modes.contains(k)).collect();
    let rows: usize = row_modes.iter().map(|&k| shape[k]).product();
    let cols: usize = col_modes.iter().map(|&k| shape[k]).product();
    let mut out = vec![0.0; rows * cols];
    let mut idx = vec![0usize; shape.len()];
    for &v in data {
        let (mut r, mut rs) = (0, 1);
        for &k in row_modes {
            r += idx[k] * rs;
            rs *= shape[k];
        }
        let (mut c, mut cs) = (0, 1);
        for &k in &col_modes {
            c += idx[k] * cs;
            cs *= shape[k];
        }
        out[r + rows * c] = v;
        for (k, i) in idx.iter_mut().enumerate() {
            *i += 1;
            if *i < shape[k] {
                break;
            }
            *i = 0;
        }
    }
    (rows, cols, out)
}

/// Rows hold the grid columns `0..j` (row split) or grid rows `0..i`
/// (column split) of an `m_rows × n_cols` grid with mode `n·M + m`.
pub fn split_row_modes(m_rows: usize, n_cols: usize, row_split: Option<usize>, col_split: Option<usize>) -> Vec<usize> {
    match (row_split, col_split) {
        (Some(j), None) => (0..j * m_rows).collect(),
        (None, Some(i)) => (0..n_cols).flat_map(|n| (0..i).map(move |m| n * m_rows + m)).collect(),
        _ => panic!("exactly one split kind"),
    }
}

/// The 1-based position of the first singular value below `th·σ₁`, or the
/// number of values when none is.
pub fn literal_rank(s: &[f64], th: f64) -> usize {
    if s.is_empty() || s[0] <= 0.0 {
        return 1;
    }
    for (k, v) in s.iter().enumerate() {
        if v / s[0] < th {
            return k + 1;
        }
    }
    s.len()
}

/// Number of singular values above `rtol·σ₁`.
pub fn numerical_rank(s: &[f64], rtol: f64) -> usize {
    match s.first() {
        Some(&s1) if s1 > 0.0 => s.iter().filter(|&&v| v > rtol * s1).count(),
        _ => 0,
    }
}

#[test]
fn jacobi_on_a_known_spectrum() {
    // diag(3, 2, 1) with columns permuted and signs flipped.
    let a = [0.0, -2.0, 0.0, 3.0, 0.0, 0.0, 0.0, 0.0, 1.0];
    let s = singular_values(3, 3, &a);
    for (got, want) in s.iter().zip([3.0, 2.0, 1.0]) {
        assert!((got - want).abs() < 1e-14);
    }
    // Rank one outer product u vᵀ with |u| = 5, |v| = √2 (wide orientation).
    let (u, v) = ([3.0, 4.0], [1.0, 1.0, 0.0]);
    let mut b = vec![0.0; 6];
    for j in 0..3 {
        for i in 0..2 {
            b[i + 2 * j] = u[i] * v[j];
        }
    }
    let s = singular_values(2, 3, &b);
    assert!((s[0] - 5.0 * 2f64.sqrt()).abs() < 1e-13 && s[1].abs() < 1e-13);
    assert_eq!(literal_rank(&[10.0, 1.0, 0.1], 0.02), 3);
    assert_eq!(literal_rank(&[10.0, 1.0, 0.1], 0.05), 3);
    assert_eq!(literal_rank(&[10.0, 0.1, 0.0], 0.02), 2);
}
