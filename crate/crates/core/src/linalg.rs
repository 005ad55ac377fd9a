//! Small dense linear-algebra and descriptive helpers shared across modules.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample variance with the n−1 denominator.
pub fn variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

pub fn std_dev(xs: &[f64]) -> f64 {
    variance(xs).sqrt()
}

/// Linear-interpolation quantile of the sorted sample (Hyndman–Fan type 7).
pub fn quantile(xs: &[f64], q: f64) -> f64 {
    let mut v = xs.to_vec();
    v.sort_by(|a, b| a.total_cmp(b));
    quantile_sorted(&v, q)
}

pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    if n == 1 {
        return sorted[0];
    }
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(n - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// True when the spread of `xs` is zero up to rounding relative to its magnitude.
pub fn is_constant(xs: &[f64]) -> bool {
    let scale = xs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let sd = std_dev(xs);
    !(sd > 1e-12 * scale) || !sd.is_finite()
}

/// Z-scores a column with the sample standard deviation. Returns `None` for a
/// constant column.
pub fn standardize(xs: &[f64]) -> Option<Vec<f64>> {
    if is_constant(xs) {
        return None;
    }
    let m = mean(xs);
    let sd = std_dev(xs);
    Some(xs.iter().map(|x| (x - m) / sd).collect())
}

pub fn symmetrize(m: &DMatrix<f64>) -> DMatrix<f64> {
    (m + m.transpose()) * 0.5
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// nalgebra's implicit-QR `SymmetricEigen` can return eigenpairs that
/// reconstruct some well-conditioned correlation matrices only to about 1e-3;
/// Jacobi is slower but accurate to rounding at the sizes used here.
pub fn eigen(m: &DMatrix<f64>) -> SymmetricEigen<f64, nalgebra::Dyn> {
    let n = m.nrows();
    let mut sym = symmetrize(m);
    let mut vecs = DMatrix::identity(n, n);
    let scale = sym.iter().fold(0.0f64, |s, x| s.max(x.abs()));
    // Column-major storage: entry (i, j) sits at i + j n.
    let a = sym.as_mut_slice();
    let v = vecs.as_mut_slice();
    for _sweep in 0..50 {
        let mut off = 0.0;
        for q in 1..n {
            for p in 0..q {
                off += a[p + q * n] * a[p + q * n];
            }
        }
        if !(off.sqrt() > f64::EPSILON * 1e-3 * scale) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p + q * n];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q + q * n] - a[p + p * n]) / (2.0 * apq);
                let t = if theta == 0.0 {
                    1.0
                } else {
                    theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                // Columns p and q, then rows p and q.
                for k in 0..n {
                    let (akp, akq) = (a[k + p * n], a[k + q * n]);
                    a[k + p * n] = c * akp - s * akq;
                    a[k + q * n] = s * akp + c * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p + k * n], a[q + k * n]);
                    a[p + k * n] = c * apk - s * aqk;
                    a[q + k * n] = s * apk + c * aqk;
                }
                a[p + q * n] = 0.0;
                a[q + p * n] = 0.0;
                for k in 0..n {
                    let (vkp, vkq) = (v[k + p * n], v[k + q * n]);
                    v[k + p * n] = c * vkp - s * vkq;
                    v[k + q * n] = s * vkp + c * vkq;
                }
            }
        }
    }
    SymmetricEigen {
        eigenvectors: vecs,
        eigenvalues: sym.diagonal(),
    }
}

pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    eigen(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Ratio of the largest to smallest eigenvalue; infinite when the smallest is
/// not strictly positive.
pub fn condition_number(eigenvalues: &DVector<f64>) -> f64 {
    let max = eigenvalues.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Raises every eigenvalue below `floor` to `floor`.
pub fn clip_to_psd(m: &DMatrix<f64>, floor: f64) -> DMatrix<f64> {
    let eig = eigen(m);
    if eig.eigenvalues.iter().all(|&l| l >= floor) {
        return m.clone();
    }
    let clipped = eig.eigenvalues.map(|l| l.max(floor));
    symmetrize(&(&eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose()))
}

/// Sums in ascending order so the result does not depend on the order in which
/// the terms are listed.
pub fn ordered_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut v: Vec<f64> = values.collect();
    v.sort_by(f64::total_cmp);
    v.into_iter().sum()
}

/// Diagonally preconditioned conjugate gradients for `m x = ones`, with every
/// reduction done by `ordered_sum`. Relabelling the rows and columns of `m`
/// relabels the solution bit for bit, so exchangeable assets get identical
/// entries. `None` if `m` is not positive definite along the way or the
/// iteration stalls short of a backward-stable residual.
fn conjugate_gradient_ones(m: &DMatrix<f64>) -> Option<DVector<f64>> {
    let k = m.nrows();
    let precond: Vec<f64> = (0..k).map(|i| 1.0 / m[(i, i)]).collect();
    if precond.iter().any(|p| !(p.is_finite() && *p > 0.0)) {
        return None;
    }
    let scale = m.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let apply = |v: &DVector<f64>| DVector::from_fn(k, |i, _| ordered_sum((0..k).map(|j| m[(i, j)] * v[j])));
    let dot = |a: &DVector<f64>, b: &DVector<f64>| ordered_sum(a.iter().zip(b.iter()).map(|(x, y)| x * y));
    let tolerance = |x: &DVector<f64>| 8.0 * f64::EPSILON * (k as f64) * (scale * x.amax() + 1.0);

    let mut x = DVector::zeros(k);
    let mut r = DVector::from_element(k, 1.0);
    let mut z = r.component_mul(&DVector::from_column_slice(&precond));
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for _ in 0..(20 * k + 50) {
        let ap = apply(&p);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) || !pap.is_finite() {
            return None;
        }
        let step = rz / pap;
        x.axpy(step, &p, 1.0);
        r.axpy(-step, &ap, 1.0);
        if r.amax() <= tolerance(&x) {
            break;
        }
        z = r.component_mul(&DVector::from_column_slice(&precond));
        let rz_next = dot(&r, &z);
        p = &z + &p * (rz_next / rz);
        rz = rz_next;
    }
    // The recursive residual drifts; accept only if the true one is small.
    let residual = DVector::from_element(k, 1.0) - apply(&x);
    (residual.amax() <= tolerance(&x) && x.iter().all(|v| v.is_finite())).then_some(x)
}

/// Solves `m x = ones` for a symmetric matrix. Tries order-independent
/// conjugate gradients first, then Cholesky, then Cholesky with `ridge` added
/// to the diagonal, then LU.
pub fn solve_ones(m: &DMatrix<f64>, ridge: f64) -> Result<DVector<f64>> {
    let k = m.nrows();
    if m.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let ones = DVector::from_element(k, 1.0);
    let m = symmetrize(m);
    if let Some(x) = conjugate_gradient_ones(&m) {
        return Ok(x);
    }
    if let Some(ch) = m.clone().cholesky() {
        return Ok(ch.solve(&ones));
    }
    let guarded = &m + DMatrix::identity(k, k) * ridge;
    if let Some(ch) = guarded.clone().cholesky() {
        return Ok(ch.solve(&ones));
    }
    guarded
        .lu()
        .solve(&ones)
        .filter(|x| x.iter().all(|v| v.is_finite()))
        .ok_or_else(|| Error::NotPositiveDefinite("singular after ridge guard".into()))
}

/// Rescales a covariance matrix to unit diagonal.
pub fn cov_to_corr(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let k = cov.nrows();
    let mut inv_sd = Vec::with_capacity(k);
    for i in 0..k {
        let v = cov[(i, i)];
        if !(v > 0.0) {
            return Err(Error::ZeroVariance(format!("diagonal entry {i} is {v}")));
        }
        inv_sd.push(1.0 / v.sqrt());
    }
    let mut r = DMatrix::from_fn(k, k, |i, j| cov[(i, j)] * inv_sd[i] * inv_sd[j]);
    for i in 0..k {
        r[(i, i)] = 1.0;
    }
    Ok(r)
}

/// Sample covariance (n−1) of the rows of `data` (n×k).
pub fn sample_covariance(data: &DMatrix<f64>) -> DMatrix<f64> {
    let n = data.nrows();
    let means = data.row_mean();
    let mut centered = data.clone();
    for mut row in centered.row_iter_mut() {
        row -= &means;
    }
    (centered.transpose() * &centered) / (n as f64 - 1.0)
}

/// Mean, standard deviation and 5%/95% quantiles of a series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSummary {
    pub mean: f64,
    pub std_dev: f64,
    pub q05: f64,
    pub q95: f64,
}

pub fn summarize(xs: &[f64]) -> SeriesSummary {
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    SeriesSummary {
        mean: mean(xs),
        std_dev: if xs.len() > 1 { std_dev(xs) } else { 0.0 },
        q05: quantile_sorted(&sorted, 0.05),
        q95: quantile_sorted(&sorted, 0.95),
    }
}
