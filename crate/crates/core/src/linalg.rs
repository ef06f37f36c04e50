//! Dense and banded complex linear algebra used by the solvers.
//!
//! Small dense factorizations (SVD, QR, Schur) come from nalgebra. The
//! per-mode spectral solves additionally need LU factorizations of large
//! banded complex matrices; those are implemented here in LAPACK gbtrf/gbtrs
//! style with partial pivoting.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

/// Basis of the (right) null space of `a`: singular vectors whose singular
/// value falls below `rel_tol` times the largest one.
pub fn null_space(a: &DMatrix<C64>, rel_tol: f64) -> Vec<DVector<C64>> {
    // a thin SVD of a wide matrix omits the kernel directions; pad with zero
    // rows so V^H comes out square
    let work = if a.nrows() < a.ncols() {
        let mut p = DMatrix::<C64>::zeros(a.ncols(), a.ncols());
        p.rows_mut(0, a.nrows()).copy_from(a);
        p
    } else {
        a.clone()
    };
    let svd = work.svd(false, true);
    let v_t = svd.v_t.as_ref().expect("requested V^H");
    let smax = svd.singular_values.max();
    let mut basis = Vec::new();
    for i in 0..svd.singular_values.len() {
        if svd.singular_values[i] <= rel_tol * smax.max(f64::MIN_POSITIVE) {
            basis.push(v_t.row(i).adjoint());
        }
    }
    basis
}

/// Numerical rank with relative tolerance.
pub fn rank(a: &DMatrix<C64>, rel_tol: f64) -> usize {
    let svd = a.clone().svd(false, false);
    let smax = svd.singular_values.max();
    svd.singular_values.iter().filter(|&&s| s > rel_tol * smax).count()
}

/// Orthonormalizes the columns of `m` (thin QR).
pub fn orthonormal_columns(m: &DMatrix<C64>) -> DMatrix<C64> {
    let k = m.ncols();
    let qr = m.clone().qr();
    let q = qr.q();
    q.columns(0, k.min(q.ncols())).into_owned()
}

/// sin of the largest principal angle between the column spans of two
/// orthonormal bases; stable near zero, unlike acos of a singular value.
pub fn subspace_gap(q1: &DMatrix<C64>, q2: &DMatrix<C64>) -> f64 {
    assert_eq!(q1.nrows(), q2.nrows());
    let resid = q2 - q1 * (q1.adjoint() * q2);
    let svd = resid.svd(false, false);
    svd.singular_values.max()
}

/// Eigenvalues of a small dense complex matrix via its Schur form.
pub fn eigenvalues_dense(m: &DMatrix<C64>) -> Vec<C64> {
    assert_eq!(m.nrows(), m.ncols());
    if m.nrows() == 0 {
        return Vec::new();
    }
    let schur = m
        .clone()
        .try_schur(1e-14, 0)
        .expect("Schur iteration failed to converge");
    let ev = schur.eigenvalues().expect("complex Schur has eigenvalues");
    ev.iter().copied().collect()
}

/// Banded complex matrix in LAPACK band storage with room for pivot fill.
///
/// Entry (i, j) with |i - j| <= kl (below) / ku (above) lives at
/// `ab[j * ldab + (kl + ku + i - j)]`; the extra `kl` rows on top hold the
/// fill generated by row interchanges.
#[derive(Clone, Debug)]
pub struct Banded {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    ldab: usize,
    ab: Vec<C64>,
}

impl Banded {
    pub fn zeros(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Banded { n, kl, ku, ldab, ab: vec![C64::ZERO; ldab * n] }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        // the fill region extends the upper bandwidth to ku + kl
        debug_assert!(i + self.ku + self.kl >= j && j + self.kl >= i, "({i},{j}) outside band");
        j * self.ldab + (self.kl + self.ku + i - j)
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        if i + self.ku + self.kl >= j && j + self.kl >= i {
            self.ab[self.idx(i, j)]
        } else {
            C64::ZERO
        }
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        let p = self.idx(i, j);
        self.ab[p] = v;
    }

    pub fn add(&mut self, i: usize, j: usize, v: C64) {
        let p = self.idx(i, j);
        self.ab[p] += v;
    }

    /// y = A x.
    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![C64::ZERO; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let xj = x[j];
            if xj == C64::ZERO {
                continue;
            }
            for i in lo..=hi {
                y[i] += self.ab[self.idx(i, j)] * xj;
            }
        }
        y
    }

    /// y = A^H x.
    pub fn mul_vec_adjoint(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![C64::ZERO; self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            let mut acc = C64::ZERO;
            for i in lo..=hi {
                acc += self.ab[self.idx(i, j)].conj() * x[i];
            }
            y[j] = acc;
        }
        y
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                m[(i, j)] = self.ab[self.idx(i, j)];
            }
        }
        m
    }

    /// LU factorization with partial pivoting, in place.
    ///
    /// Pivots smaller in modulus than `pivot_floor` are replaced by the floor
    /// (keeping their phase), so exactly singular matrices remain solvable;
    /// inverse iteration relies on this to extract kernels.
    pub fn factorize(mut self, pivot_floor: f64) -> BandedLu {
        let n = self.n;
        let (kl, ku) = (self.kl, self.ku);
        let mut ipiv = vec![0usize; n];
        // working upper bandwidth grows to ku + kl from interchanges
        for j in 0..n {
            // pivot search in column j, rows j..=j+kl
            let imax = (j + kl).min(n - 1);
            let mut piv_row = j;
            let mut piv_mag = self.get(j, j).norm();
            for i in j + 1..=imax {
                let mag = self.get(i, j).norm();
                if mag > piv_mag {
                    piv_mag = mag;
                    piv_row = i;
                }
            }
            ipiv[j] = piv_row;
            if piv_row != j {
                // swap rows j and piv_row across columns j..=j+ku+kl
                let jmax = (j + ku + kl).min(n - 1);
                for c in j..=jmax {
                    let a = self.get(j, c);
                    let b = self.get(piv_row, c);
                    self.set(j, c, b);
                    self.set(piv_row, c, a);
                }
            }
            let mut pivot = self.get(j, j);
            if pivot.norm() < pivot_floor {
                pivot = if pivot == C64::ZERO {
                    C64::new(pivot_floor, 0.0)
                } else {
                    pivot * (pivot_floor / pivot.norm())
                };
                self.set(j, j, pivot);
            }
            // eliminate below
            for i in j + 1..=imax {
                let l = self.get(i, j) / pivot;
                self.set(i, j, l);
                if l == C64::ZERO {
                    continue;
                }
                let jmax = (j + ku + kl).min(n - 1);
                for c in j + 1..=jmax {
                    let u = self.get(j, c);
                    if u != C64::ZERO {
                        let cur = self.get(i, c);
                        self.set(i, c, cur - l * u);
                    }
                }
            }
        }
        BandedLu { mat: self, ipiv }
    }
}

/// Factorized banded matrix; solves A x = b and A^H x = b.
pub struct BandedLu {
    mat: Banded,
    ipiv: Vec<usize>,
}

impl BandedLu {
    pub fn n(&self) -> usize {
        self.mat.n
    }

    /// Solves A x = b in place.
    pub fn solve_in_place(&self, b: &mut [C64]) {
        let n = self.mat.n;
        let (kl, ku) = (self.mat.kl, self.mat.ku);
        assert_eq!(b.len(), n);
        // L solve with interleaved row swaps
        for j in 0..n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let bj = b[j];
            if bj == C64::ZERO {
                continue;
            }
            let imax = (j + kl).min(n - 1);
            for i in j + 1..=imax {
                let l = self.mat.get(i, j);
                if l != C64::ZERO {
                    b[i] -= l * bj;
                }
            }
        }
        // U solve (upper triangular with bandwidth ku + kl)
        for j in (0..n).rev() {
            let mut acc = b[j];
            let cmax = (j + ku + kl).min(n - 1);
            for c in j + 1..=cmax {
                let u = self.mat.get(j, c);
                if u != C64::ZERO {
                    acc -= u * b[c];
                }
            }
            b[j] = acc / self.mat.get(j, j);
        }
    }

    /// Solves A^H x = b in place.
    pub fn solve_adjoint_in_place(&self, b: &mut [C64]) {
        let n = self.mat.n;
        let (kl, ku) = (self.mat.kl, self.mat.ku);
        assert_eq!(b.len(), n);
        // U^H solve (lower triangular): forward substitution
        for j in 0..n {
            let mut acc = b[j];
            let cmin = j.saturating_sub(ku + kl);
            for c in cmin..j {
                let u = self.mat.get(c, j);
                if u != C64::ZERO {
                    acc -= u.conj() * b[c];
                }
            }
            b[j] = acc / self.mat.get(j, j).conj();
        }
        // L^H solve with reversed interleaved swaps
        for j in (0..n).rev() {
            let imax = (j + kl).min(n - 1);
            let mut acc = b[j];
            for i in j + 1..=imax {
                let l = self.mat.get(i, j);
                if l != C64::ZERO {
                    acc -= l.conj() * b[i];
                }
            }
            b[j] = acc;
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
        }
    }
}
