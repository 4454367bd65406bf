//! Dense complex least squares by Householder QR with column pivoting.

use num_complex::Complex64;

/// Outcome of a pivoted QR solve.
#[derive(Debug, Clone)]
pub(crate) struct LstsqSolution {
    pub coeffs: Vec<Complex64>,
    /// Ratio of the largest to smallest retained diagonal of R after column
    /// equilibration; infinite when rank deficient.
    pub condition: f64,
    /// Original indices of columns found to be linearly dependent.
    pub deficient: Vec<usize>,
}

/// Minimizes ‖A·c − b‖₂ for `columns` (column-major A) and right-hand side
/// `rhs`. Columns are scaled to unit norm before factorization so the rank
/// decision is insensitive to the magnitude of each basis function.
///
/// When rank deficient, `coeffs` holds the basic solution with the dependent
/// columns set to zero.
pub(crate) fn solve(columns: &[Vec<Complex64>], rhs: &[Complex64]) -> LstsqSolution {
    let n_cols = columns.len();
    let n_rows = rhs.len();
    debug_assert!(columns.iter().all(|c| c.len() == n_rows));

    let mut a: Vec<Vec<Complex64>> = columns.to_vec();
    let mut b = rhs.to_vec();
    let mut scale = vec![0.0; n_cols];
    for (col, s) in a.iter_mut().zip(scale.iter_mut()) {
        *s = norm(col);
        if *s > 0.0 {
            col.iter_mut().for_each(|v| *v /= *s);
        }
    }

    let mut perm: Vec<usize> = (0..n_cols).collect();
    let steps = n_cols.min(n_rows);
    let mut diag = Vec::with_capacity(steps);
    for k in 0..steps {
        // Pivot on the largest trailing column norm.
        let (best, best_norm) = (k..n_cols)
            .map(|j| (j, norm(&a[j][k..])))
            .fold((k, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
        a.swap(k, best);
        perm.swap(k, best);
        if best_norm == 0.0 {
            diag.push(0.0);
            continue;
        }
        let x0 = a[k][k];
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * best_norm;
        let mut v: Vec<Complex64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vnorm_sq: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if vnorm_sq > 0.0 {
            let beta = 2.0 / vnorm_sq;
            for col in a.iter_mut().skip(k) {
                reflect(&v, beta, &mut col[k..]);
            }
            reflect(&v, beta, &mut b[k..]);
        }
        diag.push(a[k][k].norm());
    }

    let r00 = diag.first().copied().unwrap_or(0.0);
    let tol = n_rows.max(n_cols) as f64 * f64::EPSILON * r00;
    let rank = diag.iter().take_while(|&&d| d > tol && d > 0.0).count();
    let mut deficient: Vec<usize> = perm[rank..].to_vec();
    deficient.sort_unstable();

    // Back substitution on the leading rank×rank block.
    let mut z = vec![Complex64::new(0.0, 0.0); n_cols];
    for i in (0..rank).rev() {
        let mut acc = b[i];
        for j in i + 1..rank {
            acc -= a[j][i] * z[j];
        }
        z[i] = acc / a[i][i];
    }
    let mut coeffs = vec![Complex64::new(0.0, 0.0); n_cols];
    for (pos, &orig) in perm.iter().enumerate() {
        if scale[orig] > 0.0 {
            coeffs[orig] = z[pos] / scale[orig];
        }
    }
    let condition = if rank == n_cols && rank > 0 {
        r00 / diag[rank - 1]
    } else {
        f64::INFINITY
    };
    LstsqSolution {
        coeffs,
        condition,
        deficient,
    }
}

fn norm(v: &[Complex64]) -> f64 {
    // Scaled accumulation guards against overflow for large basis powers.
    let max = v
        .iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max);
    if max == 0.0 || !max.is_finite() {
        return max;
    }
    max * v.iter().map(|z| (z / max).norm_sqr()).sum::<f64>().sqrt()
}

/// y ← (I − β v vᴴ) y.
fn reflect(v: &[Complex64], beta: f64, y: &mut [Complex64]) {
    let dot: Complex64 = v.iter().zip(y.iter()).map(|(vi, yi)| vi.conj() * yi).sum();
    let f = dot * beta;
    y.iter_mut().zip(v).for_each(|(yi, vi)| *yi -= vi * f);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exact_square_system() {
        // [1 2; 3 4i] c = b with c = (1-i, 2).
        let cols = vec![
            vec![c(1.0, 0.0), c(3.0, 0.0)],
            vec![c(2.0, 0.0), c(0.0, 4.0)],
        ];
        let truth = [c(1.0, -1.0), c(2.0, 0.0)];
        let b: Vec<Complex64> = (0..2)
            .map(|i| cols[0][i] * truth[0] + cols[1][i] * truth[1])
            .collect();
        let s = solve(&cols, &b);
        assert!(s.deficient.is_empty());
        for (x, t) in s.coeffs.iter().zip(&truth) {
            assert!((x - t).norm() < 1e-14);
        }
        assert!(s.condition.is_finite() && s.condition >= 1.0);
    }

    #[test]
    fn overdetermined_matches_normal_equations() {
        // Fit a line to 3 points: residual orthogonal to columns.
        let cols = vec![
            vec![c(1.0, 0.0); 3],
            vec![c(0.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)],
        ];
        let b = vec![c(1.0, 0.0), c(2.0, 0.0), c(2.0, 0.0)];
        let s = solve(&cols, &b);
        let r: Vec<Complex64> = (0..3)
            .map(|i| b[i] - cols[0][i] * s.coeffs[0] - cols[1][i] * s.coeffs[1])
            .collect();
        for col in &cols {
            let dot: Complex64 = col.iter().zip(&r).map(|(a, r)| a.conj() * r).sum();
            assert!(dot.norm() < 1e-14);
        }
    }

    #[test]
    fn detects_duplicate_column() {
        let x = vec![c(1.0, 1.0), c(2.0, 0.0), c(0.5, -1.0)];
        let cols = vec![
            x.clone(),
            x.iter().map(|v| v * 3.0).collect(),
            vec![c(1.0, 0.0); 3],
        ];
        let s = solve(&cols, &x);
        assert_eq!(s.deficient.len(), 1);
        assert!(s.condition.is_infinite());
    }

    #[test]
    fn zero_column_is_deficient() {
        let cols = vec![vec![c(1.0, 0.0), c(2.0, 0.0)], vec![c(0.0, 0.0); 2]];
        let s = solve(&cols, &[c(1.0, 0.0), c(2.0, 0.0)]);
        assert_eq!(s.deficient, vec![1]);
        assert!((s.coeffs[0] - c(1.0, 0.0)).norm() < 1e-14);
    }
}
