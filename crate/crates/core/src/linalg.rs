//! Column-pivoted Householder QR least squares on column-equilibrated designs.

/// Relative pivot size below which the design is declared rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct LeastSquares {
    pub coefficients: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    /// (X'X)⁻¹ in the caller's column order, row-major k×k.
    pub xtx_inv: Vec<Vec<f64>>,
}

/// Columns (by caller index) left over when the pivoted factorization ran out of
/// numerically independent directions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankDeficiency {
    pub dependent: Vec<usize>,
}

/// Minimizes ‖y − Xb‖₂ where `columns[j]` is the j-th column of X.
///
/// Each column is scaled to unit norm before factorization so that the rank
/// decision does not depend on the units of the regressors; the scaling is
/// undone on the coefficients and on (X'X)⁻¹.
pub fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Result<LeastSquares, RankDeficiency> {
    let k = columns.len();
    let n = y.len();
    debug_assert!(columns.iter().all(|c| c.len() == n));

    let scale: Vec<f64> = columns.iter().map(|c| norm(c)).collect();
    if let Some(j) = scale.iter().position(|s| *s == 0.0 || !s.is_finite()) {
        return Err(RankDeficiency { dependent: vec![j] });
    }
    if k > n {
        return Err(RankDeficiency { dependent: (n..k).collect() });
    }

    // a[j] holds the (scaled, permuted) j-th working column.
    let mut a: Vec<Vec<f64>> = columns.iter().zip(&scale).map(|(c, s)| c.iter().map(|v| v / s).collect()).collect();
    let mut perm: Vec<usize> = (0..k).collect();
    let mut qty = y.to_vec();
    let mut r = vec![vec![0.0; k]; k];
    let mut first_pivot = 0.0;

    for j in 0..k {
        // Pick the remaining column with the largest trailing norm; first wins ties.
        let mut best = j;
        let mut best_norm = norm(&a[j][j..]);
        for p in (j + 1)..k {
            let nrm = norm(&a[p][j..]);
            if nrm > best_norm {
                best = p;
                best_norm = nrm;
            }
        }
        if j == 0 {
            first_pivot = best_norm;
        }
        if best_norm <= RANK_TOLERANCE * first_pivot || best_norm == 0.0 {
            let mut dependent: Vec<usize> = perm[j..].to_vec();
            dependent.sort_unstable();
            return Err(RankDeficiency { dependent });
        }
        a.swap(j, best);
        perm.swap(j, best);
        for row in r.iter_mut().take(j) {
            row.swap(j, best);
        }

        // Householder reflector H = I - 2 v v' / (v'v) zeroing a[j][j+1..].
        let alpha = if a[j][j] >= 0.0 { -best_norm } else { best_norm };
        let mut v = a[j][j..].to_vec();
        v[0] -= alpha;
        let vtv = dot(&v, &v);
        r[j][j] = alpha;
        if vtv > 0.0 {
            for col in a.iter_mut().skip(j + 1) {
                reflect(&mut col[j..], &v, vtv);
            }
            reflect(&mut qty[j..], &v, vtv);
        }
        for p in (j + 1)..k {
            r[j][p] = a[p][j];
        }
    }

    // Back substitution R z = (Q'y)[..k].
    let mut z = vec![0.0; k];
    for i in (0..k).rev() {
        let mut s = qty[i];
        for p in (i + 1)..k {
            s -= r[i][p] * z[p];
        }
        z[i] = s / r[i][i];
    }

    // R⁻¹ (upper triangular), then (A'A)⁻¹ = R⁻¹ R⁻ᵀ in pivoted scaled coordinates.
    let mut rinv = vec![vec![0.0; k]; k];
    for col in 0..k {
        for i in (0..=col).rev() {
            let mut s = if i == col { 1.0 } else { 0.0 };
            for p in (i + 1)..=col {
                s -= r[i][p] * rinv[p][col];
            }
            rinv[i][col] = s / r[i][i];
        }
    }

    let mut coefficients = vec![0.0; k];
    for i in 0..k {
        coefficients[perm[i]] = z[i] / scale[perm[i]];
    }
    let mut xtx_inv = vec![vec![0.0; k]; k];
    for i in 0..k {
        for j in 0..k {
            let m: f64 = (i.max(j)..k).map(|p| rinv[i][p] * rinv[j][p]).sum();
            xtx_inv[perm[i]][perm[j]] = m / (scale[perm[i]] * scale[perm[j]]);
        }
    }

    let fitted: Vec<f64> = (0..n).map(|t| columns.iter().zip(&coefficients).map(|(c, b)| c[t] * b).sum()).collect();
    let residuals = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();

    Ok(LeastSquares { coefficients, fitted, residuals, xtx_inv })
}

fn reflect(x: &mut [f64], v: &[f64], vtv: f64) {
    let s = 2.0 * dot(v, x) / vtv;
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= s * vi;
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    // scaled to avoid overflow on large levels
    let m = a.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * a.iter().map(|v| (v / m) * (v / m)).sum::<f64>().sqrt()
}
