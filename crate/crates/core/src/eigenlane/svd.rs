//! One-sided (Hestenes) Jacobi SVD for the small dense lane matrices used
//! here.

/// Left singular system of a `rows x cols` matrix.
pub(crate) struct LeftSvd {
    /// Full `rows x rows` orthogonal matrix, column `k` stored at
    /// `u[k * rows..(k + 1) * rows]`, ordered by decreasing singular value.
    pub u: Vec<f64>,
    /// `rows` singular values in non-increasing order; entries beyond
    /// `min(rows, cols)` are numerically zero.
    pub sigma: Vec<f64>,
}

const MAX_SWEEPS: usize = 100;
const TOL: f64 = 1e-15;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn rotate(cols: &mut [f64], len: usize, p: usize, q: usize, c: f64, s: f64) {
    let (head, tail) = cols.split_at_mut(q * len);
    let bp = &mut head[p * len..(p + 1) * len];
    let bq = &mut tail[..len];
    for (x, y) in bp.iter_mut().zip(bq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Computes the left singular vectors and singular values of the matrix
/// whose columns are `columns` (each of length `rows`).
///
/// Jacobi rotations orthogonalize the columns of the transpose; the
/// accumulated rotation is then exactly the left singular basis, complete
/// even when the matrix is rank deficient.
pub(crate) fn left_svd(rows: usize, columns: &[Vec<f64>]) -> LeftSvd {
    let n = columns.len();
    // Column j of the transpose is row j of the input.
    let mut b = vec![0.0; rows * n];
    for (l, col) in columns.iter().enumerate() {
        for (j, &v) in col.iter().enumerate() {
            b[j * n + l] = v;
        }
    }
    let mut j = vec![0.0; rows * rows];
    for k in 0..rows {
        j[k * rows + k] = 1.0;
    }

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..rows {
            for q in (p + 1)..rows {
                let bp = &b[p * n..(p + 1) * n];
                let bq = &b[q * n..(q + 1) * n];
                let alpha = dot(bp, bp);
                let beta = dot(bq, bq);
                let gamma = dot(bp, bq);
                if alpha == 0.0 || beta == 0.0 || gamma.abs() <= TOL * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut b, n, p, q, c, s);
                rotate(&mut j, rows, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    let norms: Vec<f64> = (0..rows)
        .map(|k| dot(&b[k * n..(k + 1) * n], &b[k * n..(k + 1) * n]).sqrt())
        .collect();
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&x, &y| norms[y].total_cmp(&norms[x]).then(x.cmp(&y)));

    let mut u = Vec::with_capacity(rows * rows);
    let mut sigma = Vec::with_capacity(rows);
    for &k in &order {
        let col = &j[k * rows..(k + 1) * rows];
        let flip = col
            .iter()
            .find(|v| v.abs() > 1e-12)
            .is_some_and(|&v| v < 0.0);
        u.extend(col.iter().map(|&v| if flip { -v } else { v }));
        sigma.push(norms[k]);
    }
    LeftSvd { u, sigma }
}
