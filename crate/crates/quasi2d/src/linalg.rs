//! Thin wrappers over the LAPACK-backed dense routines used throughout the
//! crate, fixing conventions once: ascending Hermitian eigenvalues, full SVD
//! factors, and deterministic eigenvector phases.

use ndarray::{Array1, Array2, Axis};
use ndarray_linalg::{Eig, Eigh, Inverse, SVD, UPLO};
use num_complex::Complex64;

use crate::{Error, Result};

pub type C64 = Complex64;

/// Largest singular value (operator 2-norm). Returns 0 for empty matrices.
pub fn op_norm(a: &Array2<C64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let (_, s, _) = a.svd(false, false).expect("svd failed");
    s.iter().cloned().fold(0.0, f64::max)
}

/// Frobenius norm.
pub fn fro_norm(a: &Array2<C64>) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Singular values in descending order.
pub fn singular_values(a: &Array2<C64>) -> Array1<f64> {
    let (_, s, _) = a.svd(false, false).expect("svd failed");
    s
}

/// Full SVD `A = U diag(s) Vh` with descending singular values.
pub fn svd_full(a: &Array2<C64>) -> Result<(Array2<C64>, Array1<f64>, Array2<C64>)> {
    let (u, s, vh) = a.svd(true, true)?;
    Ok((u.expect("left factor requested"), s, vh.expect("right factor requested")))
}

/// Singular values padded to `min(rows, cols)` descending, computed on the
/// submatrix of structurally nonzero rows and columns. Exact zero rows and
/// columns contribute zero singular values, so this is exact and fast for
/// masked or sparse-support operators.
pub fn padded_singular_values(a: &Array2<C64>) -> Vec<f64> {
    let (nr, nc) = a.dim();
    let full = nr.min(nc);
    if full == 0 {
        return Vec::new();
    }
    let zero = C64::new(0.0, 0.0);
    let rows: Vec<usize> = (0..nr).filter(|&i| a.row(i).iter().any(|z| *z != zero)).collect();
    let cols: Vec<usize> = (0..nc).filter(|&j| a.column(j).iter().any(|z| *z != zero)).collect();
    let mut s: Vec<f64> = if rows.is_empty() || cols.is_empty() {
        Vec::new()
    } else if rows.len() == nr && cols.len() == nc {
        singular_values(a).to_vec()
    } else {
        let sub = Array2::from_shape_fn((rows.len(), cols.len()), |(i, j)| a[[rows[i], cols[j]]]);
        singular_values(&sub).to_vec()
    };
    s.resize(full, 0.0);
    s
}

/// Smallest singular value.
pub fn sigma_min(a: &Array2<C64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let s = singular_values(a);
    s.iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Hermitian eigendecomposition with ascending eigenvalues and deterministic
/// eigenvector phases (largest-modulus component made real positive).
pub fn eigh_ascending(a: &Array2<C64>) -> Result<(Array1<f64>, Array2<C64>)> {
    let (vals, raw) = a.eigh(UPLO::Lower)?;
    // The backend hands back eigenvectors of the conjugate matrix for complex
    // Hermitian input; conjugating restores `A v_k = λ_k v_k`.
    let mut vecs = raw.mapv(|z| z.conj());
    fix_phases(&mut vecs);
    debug_assert!(
        {
            let av = a.dot(&vecs);
            let vl = &vecs * &vals.mapv(|x| C64::new(x, 0.0)).insert_axis(Axis(0));
            let scale = vals.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            fro_norm(&(av - vl)) <= 1e-10 * scale * (a.nrows() as f64)
        },
        "eigenvector convention drifted; re-probe the backend"
    );
    Ok((vals, vecs))
}

/// General (non-symmetric) eigendecomposition. Eigenvectors are normalized
/// and phase-fixed but not orthogonalized; callers needing an orthonormal
/// basis of an eigenspace should QR the relevant columns.
pub fn eig_general(a: &Array2<C64>) -> Result<(Array1<C64>, Array2<C64>)> {
    let (vals, mut vecs) = a.eig()?;
    for mut col in vecs.axis_iter_mut(Axis(1)) {
        let nrm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nrm > 0.0 {
            col.mapv_inplace(|z| z / nrm);
        }
    }
    fix_phases(&mut vecs);
    Ok((vals, vecs))
}

/// Matrix inverse.
pub fn inv(a: &Array2<C64>) -> Result<Array2<C64>> {
    Ok(a.inv()?)
}

/// Polar decomposition `A = U H` with `U` unitary and `H` positive
/// semi-definite, both square. Requires a square input.
pub fn polar(a: &Array2<C64>) -> Result<(Array2<C64>, Array2<C64>)> {
    if a.nrows() != a.ncols() {
        return Err(Error::InvalidParameter("polar decomposition needs a square matrix".into()));
    }
    let (u, s, vh) = svd_full(a)?;
    let unitary = u.dot(&vh);
    let v = vh.mapv(|z| z.conj()).reversed_axes();
    let sv = &v * &s.mapv(|x| C64::new(x, 0.0)).insert_axis(Axis(0));
    let positive = sv.dot(&v.mapv(|z| z.conj()).reversed_axes().to_owned());
    Ok((unitary, positive))
}

/// Apply a real function to a Hermitian matrix through its eigensystem.
pub fn hermitian_map(a: &Array2<C64>, f: impl Fn(f64) -> f64) -> Result<Array2<C64>> {
    let (vals, vecs) = eigh_ascending(a)?;
    let fv = vals.mapv(|x| C64::new(f(x), 0.0));
    let scaled = &vecs * &fv.insert_axis(Axis(0));
    Ok(scaled.dot(&adjoint(&vecs)))
}

/// Conjugate transpose.
pub fn adjoint(a: &Array2<C64>) -> Array2<C64> {
    a.mapv(|z| z.conj()).reversed_axes().to_owned()
}

/// Identity matrix.
pub fn eye(d: usize) -> Array2<C64> {
    Array2::from_diag_elem(d, C64::new(1.0, 0.0))
}

/// Orthonormalize the columns of `a` (thin QR), returning the Q factor.
pub fn orthonormalize(a: &Array2<C64>) -> Result<Array2<C64>> {
    use ndarray_linalg::QR;
    let (q, _) = a.qr()?;
    Ok(q)
}

fn fix_phases(vecs: &mut Array2<C64>) {
    for mut col in vecs.axis_iter_mut(Axis(1)) {
        let mut best = 0usize;
        let mut best_mag = -1.0;
        for (i, z) in col.iter().enumerate() {
            let m = z.norm_sqr();
            if m > best_mag + 1e-30 {
                best_mag = m;
                best = i;
            }
        }
        let z = col[best];
        if z.norm() > 0.0 {
            let phase = z / z.norm();
            let corr = phase.conj();
            col.mapv_inplace(|w| w * corr);
        }
    }
}

/// One standard complex Gaussian sample (Box-Muller; real and imaginary
/// parts independent N(0, 1/2), so E|z|² = 1).
pub fn gaussian_c64<R: rand::Rng + ?Sized>(rng: &mut R) -> C64 {
    let u1: f64 = rng.random::<f64>().max(f64::MIN_POSITIVE);
    let u2: f64 = rng.random();
    let r = (-u1.ln()).sqrt();
    let phi = std::f64::consts::TAU * u2;
    C64::new(r * phi.cos(), r * phi.sin())
}

/// Matrix of independent standard complex Gaussians.
pub fn gaussian_matrix<R: rand::Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Array2<C64> {
    Array2::from_shape_fn((rows, cols), |_| gaussian_c64(rng))
}

/// Haar-distributed random unitary: QR of a Gaussian matrix with the column
/// phases pinned by the sign of the R diagonal.
pub fn random_unitary<R: rand::Rng + ?Sized>(rng: &mut R, d: usize) -> Result<Array2<C64>> {
    use ndarray_linalg::QR;
    let g = gaussian_matrix(rng, d, d);
    let (mut q, r) = g.qr()?;
    for j in 0..d {
        let rj = r[[j, j]];
        if rj.norm() > 0.0 {
            let phase = rj / rj.norm();
            q.column_mut(j).mapv_inplace(|z| z * phase);
        }
    }
    Ok(q)
}

/// Entrywise compensated (Kahan) accumulator for matrix sums with many terms.
pub struct CompensatedSum {
    sum: Array2<C64>,
    comp: Array2<C64>,
}

impl CompensatedSum {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { sum: Array2::zeros((rows, cols)), comp: Array2::zeros((rows, cols)) }
    }

    pub fn add(&mut self, term: &Array2<C64>) {
        ndarray::Zip::from(&mut self.sum)
            .and(&mut self.comp)
            .and(term)
            .for_each(|s, c, &t| {
                let y = t - *c;
                let new = *s + y;
                *c = (new - *s) - y;
                *s = new;
            });
    }

    pub fn finish(self) -> Array2<C64> {
        self.sum
    }
}
