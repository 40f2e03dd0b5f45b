//! Dense complex linear algebra used throughout the crate.
//!
//! Everything is built on `nalgebra` dense matrices. Eigenvalues are always
//! returned in ascending order so that "ground state" means column 0.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{DiscordError, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

/// Largest tolerated deviation from Hermiticity (Frobenius norm).
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues above `-PSD_TOL` are treated as zero when taking square roots.
pub const PSD_TOL: f64 = 1e-10;
/// Imaginary residue tolerated in a trace that should be real.
pub const IMAG_TOL: f64 = 1e-10;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Spectrum of a Hermitian matrix, ascending.
#[derive(Debug, Clone)]
pub struct HermitianEig {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one per column, in the same order as `eigenvalues`.
    pub eigenvectors: CMatrix,
}

impl HermitianEig {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvector(&self, k: usize) -> CVector {
        self.eigenvectors.column(k).into_owned()
    }

    /// `V diag(f(w)) V†`
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let v = &self.eigenvectors;
        let n = self.dim();
        let mut scaled = v.clone();
        for (k, &w) in self.eigenvalues.iter().enumerate() {
            let s = f(w);
            for i in 0..n {
                scaled[(i, k)] *= s;
            }
        }
        scaled * v.adjoint()
    }
}

pub fn frobenius(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn hermiticity_defect(a: &CMatrix) -> f64 {
    frobenius(&(a - a.adjoint()))
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// `(A + A†) / 2`
pub fn symmetrize(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()).scale(0.5)
}

pub fn hermitian_eig(a: &CMatrix) -> Result<HermitianEig> {
    if !a.is_square() {
        return Err(DiscordError::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    if !is_finite(a) {
        return Err(DiscordError::Domain("matrix has non-finite entries".into()));
    }
    let defect = hermiticity_defect(a);
    if defect > HERMITIAN_TOL * frobenius(a).max(1.0) {
        return Err(DiscordError::Domain(format!(
            "matrix is not Hermitian: ||A - A†||_F = {defect:e}"
        )));
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(HermitianEig {
            eigenvalues: vec![],
            eigenvectors: CMatrix::zeros(0, 0),
        });
    }
    let eig = symmetrize(a).symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let eigenvectors = CMatrix::from_fn(n, n, |r, k| eig.eigenvectors[(r, order[k])]);
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

/// Lowest eigenpair of a real symmetric matrix.
pub fn real_symmetric_ground(h: DMatrix<f64>) -> (f64, DVector<f64>) {
    let eig = h.symmetric_eigen();
    let k = eig.eigenvalues.imin();
    let mut v = eig.eigenvectors.column(k).into_owned();
    // fix the overall sign so the largest-magnitude entry is positive
    let imax = v.iamax();
    if v[imax] < 0.0 {
        v.neg_mut();
    }
    (eig.eigenvalues[k], v)
}

/// Lowest eigenpair of a real symmetric operator given only through its
/// action, by Lanczos with full reorthogonalization and explicit restarts.
/// Stops when the residual `‖Hv − Ev‖` drops below `tol`.
pub fn lanczos_ground(
    dim: usize,
    matvec: impl Fn(&[f64], &mut [f64]),
    tol: f64,
    max_restarts: usize,
) -> Result<(f64, DVector<f64>)> {
    if dim == 0 {
        return Err(DiscordError::Dimension("empty operator".into()));
    }
    let krylov = dim.min(160);
    // deterministic start with no special symmetry
    let mut start = DVector::from_fn(dim, |i, _| 1.0 + 0.5 * ((i as f64) * 0.7).sin());
    start.normalize_mut();
    let mut w = vec![0.0; dim];
    let mut last_residual = f64::INFINITY;
    for _ in 0..=max_restarts {
        let mut basis: Vec<DVector<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(krylov);
        let mut beta: Vec<f64> = Vec::with_capacity(krylov);
        for j in 0..krylov {
            matvec(basis[j].as_slice(), &mut w);
            let mut r = DVector::from_column_slice(&w);
            let a = basis[j].dot(&r);
            alpha.push(a);
            // two passes of classical Gram-Schmidt against the whole basis
            for _ in 0..2 {
                for q in &basis {
                    let c = q.dot(&r);
                    r.axpy(-c, q, 1.0);
                }
            }
            let b = r.norm();
            if j + 1 == krylov || b < 1e-14 {
                break;
            }
            beta.push(b);
            basis.push(r / b);
        }
        let k = alpha.len();
        let t = DMatrix::from_fn(k, k, |i, j| {
            if i == j {
                alpha[i]
            } else if i + 1 == j {
                beta[i]
            } else if j + 1 == i {
                beta[j]
            } else {
                0.0
            }
        });
        let (energy, s) = real_symmetric_ground(t);
        let mut v = DVector::zeros(dim);
        for (q, c) in basis.iter().zip(s.iter()) {
            v.axpy(*c, q, 1.0);
        }
        v.normalize_mut();
        matvec(v.as_slice(), &mut w);
        let hv = DVector::from_column_slice(&w);
        last_residual = (&hv - &v * energy).norm();
        if last_residual <= tol || k == dim {
            let imax = v.iamax();
            if v[imax] < 0.0 {
                v.neg_mut();
            }
            return Ok((energy, v));
        }
        start = v;
    }
    Err(DiscordError::Resource(format!(
        "Lanczos did not converge: residual {last_residual:.3e} > {tol:.1e}"
    )))
}

/// Principal square root of a positive semidefinite Hermitian matrix.
pub fn matrix_sqrt_psd(a: &CMatrix) -> Result<CMatrix> {
    let eig = hermitian_eig(a)?;
    if let Some(&lowest) = eig.eigenvalues.first() {
        if lowest < -PSD_TOL {
            return Err(DiscordError::NotPsd(lowest));
        }
    }
    Ok(eig.reconstruct_with(|w| w.max(0.0).sqrt()))
}

/// Kronecker product, `(A⊗B)[i·rB+k, j·cB+l] = A[i,j]·B[k,l]`.
pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn kron_all<'a>(mats: impl IntoIterator<Item = &'a CMatrix>) -> CMatrix {
    mats.into_iter()
        .fold(CMatrix::identity(1, 1), |acc, m| kron(&acc, m))
}

pub fn kron_vec(a: &CVector, b: &CVector) -> CVector {
    a.kronecker(b)
}

fn check_dims(side: usize, dims: &[usize]) -> Result<()> {
    let total: usize = dims.iter().product();
    if dims.is_empty() || dims.contains(&0) || total != side {
        return Err(DiscordError::Dimension(format!(
            "party dimensions {dims:?} do not multiply to {side}"
        )));
    }
    Ok(())
}

/// Splits a flat index into per-party digits, party 0 most significant.
fn digits(mut index: usize, dims: &[usize], out: &mut [usize]) {
    for (slot, &d) in out.iter_mut().zip(dims).rev() {
        *slot = index % d;
        index /= d;
    }
}

fn compose(digits: &[usize], dims: &[usize]) -> usize {
    digits.iter().zip(dims).fold(0, |acc, (&x, &d)| acc * d + x)
}

/// Traces out every party not listed in `keep`. Kept parties retain their
/// original relative order.
pub fn partial_trace(rho: &CMatrix, dims: &[usize], keep: &[usize]) -> Result<CMatrix> {
    if !rho.is_square() {
        return Err(DiscordError::Dimension("partial trace of a non-square matrix".into()));
    }
    check_dims(rho.nrows(), dims)?;
    let mut kept: Vec<usize> = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if let Some(&bad) = kept.iter().find(|&&p| p >= dims.len()) {
        return Err(DiscordError::Dimension(format!(
            "party {bad} out of range for {} parties",
            dims.len()
        )));
    }
    let traced: Vec<usize> = (0..dims.len()).filter(|p| !kept.contains(p)).collect();
    let keep_dims: Vec<usize> = kept.iter().map(|&p| dims[p]).collect();
    let trace_dims: Vec<usize> = traced.iter().map(|&p| dims[p]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = trace_dims.iter().product();

    let mut full = vec![0usize; dims.len()];
    let mut kd = vec![0usize; kept.len()];
    let mut td = vec![0usize; traced.len()];
    let mut index_of = |k: usize, t: usize| {
        digits(k, &keep_dims, &mut kd);
        digits(t, &trace_dims, &mut td);
        for (i, &p) in kept.iter().enumerate() {
            full[p] = kd[i];
        }
        for (i, &p) in traced.iter().enumerate() {
            full[p] = td[i];
        }
        compose(&full, dims)
    };
    let table: Vec<Vec<usize>> = (0..dk)
        .map(|k| (0..dt).map(|t| index_of(k, t)).collect())
        .collect();

    Ok(CMatrix::from_fn(dk, dk, |a, b| {
        (0..dt).map(|t| rho[(table[a][t], table[b][t])]).sum()
    }))
}

/// `Tr[√ρ √σ]` for two operators of equal size. The result is real and
/// clamped to `[0, 1]`.
pub fn affinity_matrices(rho: &CMatrix, sigma: &CMatrix) -> Result<f64> {
    if rho.shape() != sigma.shape() {
        return Err(DiscordError::Dimension(format!(
            "affinity between {:?} and {:?} operators",
            rho.shape(),
            sigma.shape()
        )));
    }
    let sr = matrix_sqrt_psd(rho)?;
    let ss = matrix_sqrt_psd(sigma)?;
    // Tr[AB] = Σ_ij A_ij B_ji
    let mut tr = C64::new(0.0, 0.0);
    for i in 0..sr.nrows() {
        for j in 0..sr.ncols() {
            tr += sr[(i, j)] * ss[(j, i)];
        }
    }
    if tr.im.abs() > IMAG_TOL.max(1e-8 * tr.re.abs()) {
        return Err(DiscordError::Domain(format!(
            "affinity has imaginary part {:e}",
            tr.im
        )));
    }
    Ok(tr.re.clamp(0.0, 1.0))
}

/// Applies `op` to the tensor factor `party` of a flat state vector.
pub fn apply_local(state: &mut [C64], dims: &[usize], party: usize, op: &CMatrix) {
    let d = dims[party];
    let inner: usize = dims[party + 1..].iter().product();
    let outer: usize = dims[..party].iter().product();
    let mut buf = vec![C64::new(0.0, 0.0); d];
    for o in 0..outer {
        for i in 0..inner {
            let base = o * d * inner + i;
            for (r, slot) in buf.iter_mut().enumerate() {
                let mut acc = C64::new(0.0, 0.0);
                for s in 0..d {
                    acc += op[(r, s)] * state[base + s * inner];
                }
                *slot = acc;
            }
            for (r, &v) in buf.iter().enumerate() {
                state[base + r * inner] = v;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_density, random_hermitian, random_pure, random_unitary, rng};

    fn diag(vals: &[f64]) -> CMatrix {
        CMatrix::from_diagonal(&CVector::from_iterator(vals.len(), vals.iter().map(|&v| real(v))))
    }

    fn pauli_x() -> CMatrix {
        CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(1.0), real(0.0)])
    }

    #[test]
    fn eig_of_diagonal() {
        let e = hermitian_eig(&diag(&[2.0, 1.0])).unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 2.0]);
        assert!((e.eigenvectors[(1, 0)].norm() - 1.0).abs() < 1e-14);
        assert!((e.eigenvectors[(0, 1)].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_of_pauli_x() {
        let e = hermitian_eig(&pauli_x()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut r = rng(7);
        for _ in 0..20 {
            let h = random_hermitian(8, &mut r);
            let e = hermitian_eig(&h).unwrap();
            let rec = e.reconstruct_with(|w| w);
            assert!(frobenius(&(&h - rec)) <= 1e-10 * frobenius(&h).max(1.0));
            let gram = e.eigenvectors.adjoint() * &e.eigenvectors;
            for i in 0..8 {
                for j in 0..8 {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((gram[(i, j)] - real(want)).norm() < 1e-10);
                }
            }
            assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn eig_rejects_bad_input() {
        let rect = CMatrix::zeros(2, 3);
        assert!(matches!(hermitian_eig(&rect), Err(DiscordError::Dimension(_))));
        let skew = CMatrix::from_row_slice(2, 2, &[real(0.0), real(1.0), real(-1.0), real(0.0)]);
        assert!(matches!(hermitian_eig(&skew), Err(DiscordError::Domain(_))));
    }

    #[test]
    fn sqrt_examples() {
        let i4 = CMatrix::identity(4, 4);
        assert!(frobenius(&(matrix_sqrt_psd(&i4).unwrap() - &i4)) < 1e-12);
        let s = matrix_sqrt_psd(&diag(&[4.0, 9.0])).unwrap();
        assert!(frobenius(&(s - diag(&[2.0, 3.0]))) < 1e-12);
        // projector onto (|10> + |01>)/√2
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![real(0.0), real(h), real(h), real(0.0)]);
        let p = &v * v.adjoint();
        assert!(frobenius(&(matrix_sqrt_psd(&p).unwrap() - &p)) < 1e-12);
    }

    #[test]
    fn sqrt_rejects_negative() {
        assert!(matches!(
            matrix_sqrt_psd(&diag(&[1.0, -1e-6])),
            Err(DiscordError::NotPsd(_))
        ));
        // round-off below the threshold is clamped
        let s = matrix_sqrt_psd(&diag(&[1.0, -1e-12])).unwrap();
        assert!(s[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn sqrt_squares_back() {
        let mut r = rng(11);
        for _ in 0..10 {
            let rho = random_density(6, 6, &mut r);
            let s = matrix_sqrt_psd(&rho).unwrap();
            assert!(frobenius(&(&s * &s - &rho)) <= 1e-9);
        }
    }

    #[test]
    fn kron_examples() {
        let i2 = CMatrix::identity(2, 2);
        assert_eq!(kron(&i2, &i2), CMatrix::identity(4, 4));
        let xx = kron(&pauli_x(), &pauli_x());
        let ket00 = CVector::from_vec(vec![real(1.0), real(0.0), real(0.0), real(0.0)]);
        let out = xx * ket00;
        assert!((out[3] - real(1.0)).norm() < 1e-15);
        assert!(out.iter().take(3).all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn kron_is_associative() {
        let mut r = rng(3);
        let a = random_hermitian(2, &mut r);
        let b = random_unitary(2, &mut r);
        let c_ = random_hermitian(2, &mut r);
        let lhs = kron(&kron(&a, &b), &c_);
        let rhs = kron(&a, &kron(&b, &c_));
        assert!(frobenius(&(lhs - rhs)) < 1e-13);
    }

    #[test]
    fn kron_index_convention() {
        let mut r = rng(4);
        let a = random_unitary(2, &mut r);
        let b = random_unitary(3, &mut r);
        let k = kron(&a, &b);
        for i in 0..2 {
            for j in 0..2 {
                for p in 0..3 {
                    for q in 0..3 {
                        assert_eq!(k[(i * 3 + p, j * 3 + q)], a[(i, j)] * b[(p, q)]);
                    }
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_bell_is_half_identity() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![real(0.0), real(h), real(h), real(0.0)]);
        let rho = &v * v.adjoint();
        let ra = partial_trace(&rho, &[2, 2], &[0]).unwrap();
        assert!(frobenius(&(ra - CMatrix::identity(2, 2).scale(0.5))) < 1e-14);
    }

    #[test]
    fn partial_trace_of_product() {
        let mut r = rng(5);
        let a = random_density(2, 2, &mut r);
        let b = random_density(3, 3, &mut r);
        let ab = kron(&a, &b);
        assert!(frobenius(&(partial_trace(&ab, &[2, 3], &[0]).unwrap() - &a)) < 1e-13);
        assert!(frobenius(&(partial_trace(&ab, &[2, 3], &[1]).unwrap() - &b)) < 1e-13);
    }

    #[test]
    fn partial_trace_three_party_pure() {
        let mut r = rng(6);
        let psi = random_pure(12, &mut r);
        let rho = &psi * psi.adjoint();
        let red = partial_trace(&rho, &[2, 3, 2], &[0]).unwrap();
        assert_eq!(red.nrows(), 2);
        assert!((red.trace() - real(1.0)).norm() < 1e-12);
        assert!(hermiticity_defect(&red) < 1e-12);
        let e = hermitian_eig(&red).unwrap();
        assert!(e.eigenvalues[0] >= -1e-10);
    }

    #[test]
    fn partial_trace_dimension_errors() {
        let rho = CMatrix::identity(4, 4);
        assert!(partial_trace(&rho, &[2, 3], &[0]).is_err());
        assert!(partial_trace(&rho, &[2, 2], &[2]).is_err());
    }

    #[test]
    fn affinity_examples() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let v = CVector::from_vec(vec![real(0.0), real(h), real(h), real(0.0)]);
        let w = CVector::from_vec(vec![real(0.0), real(h), real(-h), real(0.0)]);
        let p = &v * v.adjoint();
        let q = &w * w.adjoint();
        assert!((affinity_matrices(&p, &p).unwrap() - 1.0).abs() < 1e-12);
        assert!(affinity_matrices(&p, &q).unwrap().abs() < 1e-12);
        let mixed = CMatrix::identity(4, 4).scale(0.25);
        assert!((affinity_matrices(&mixed, &mixed).unwrap() - 1.0).abs() < 1e-12);
        assert!(affinity_matrices(&p, &CMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn apply_local_matches_kron() {
        let mut r = rng(9);
        let dims = [2, 3, 2];
        let psi = random_pure(12, &mut r);
        let u = random_unitary(3, &mut r);
        let mut flat: Vec<C64> = psi.iter().copied().collect();
        apply_local(&mut flat, &dims, 1, &u);
        let full = kron_all([&CMatrix::identity(2, 2), &u, &CMatrix::identity(2, 2)]);
        let want = full * psi;
        for (a, b) in flat.iter().zip(want.iter()) {
            assert!((a - b).norm() < 1e-13);
        }
    }

    #[test]
    fn lanczos_matches_dense_ground() {
        use rand::Rng;
        let mut r = rng(77);
        for d in [1usize, 5, 40, 300] {
            let g = DMatrix::from_fn(d, d, |_, _| r.random::<f64>() - 0.5);
            let h = &g + g.transpose();
            let (e_dense, v_dense) = real_symmetric_ground(h.clone());
            let (e, v) = lanczos_ground(
                d,
                |x, y| y.copy_from_slice((&h * DVector::from_column_slice(x)).as_slice()),
                1e-10,
                20,
            )
            .unwrap();
            assert!((e - e_dense).abs() < 1e-9, "d={d}: {e} vs {e_dense}");
            assert!(v.dot(&v_dense).abs() > 1.0 - 1e-9);
        }
    }
}
