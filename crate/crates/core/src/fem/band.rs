//! Complex banded LU factorization with partial pivoting.
//!
//! The structured meshes number degrees of freedom row by row, so the
//! assembled systems have a narrow profile; a band factorization solves them
//! deterministically in `O(n * kl * ku)` without sparse machinery.

use num_complex::Complex64;

use crate::error::UqError;

/// Banded complex matrix in LAPACK-style storage: entry `(i, j)` lives at
/// `ab[j * ldab + kl + ku + i - j]`, with `kl` extra superdiagonals reserved
/// for pivoting fill.
#[derive(Clone, Debug)]
pub struct BandMatrix {
    pub n: usize,
    pub kl: usize,
    pub ku: usize,
    ldab: usize,
    ab: Vec<Complex64>,
}

impl BandMatrix {
    pub fn new(n: usize, kl: usize, ku: usize) -> Self {
        let ldab = 2 * kl + ku + 1;
        Self {
            n,
            kl,
            ku,
            ldab,
            ab: vec![Complex64::new(0.0, 0.0); ldab * n],
        }
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(i < self.n && j < self.n);
        debug_assert!(
            i <= j + self.kl && j <= i + self.kl + self.ku,
            "({i},{j}) outside band"
        );
        j * self.ldab + self.kl + self.ku + i - j
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        if i <= j + self.kl && j <= i + self.kl + self.ku {
            self.ab[self.idx(i, j)]
        } else {
            Complex64::new(0.0, 0.0)
        }
    }

    pub fn add(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.idx(i, j);
        self.ab[k] += v;
    }

    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        let k = self.idx(i, j);
        self.ab[k] = v;
    }

    /// `y = A x` using only the declared band (`|i - j| <= max(kl, ku)`
    /// entries as assembled, before any factorization fill).
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.n);
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for j in 0..self.n {
            let lo = j.saturating_sub(self.ku);
            let hi = (j + self.kl).min(self.n - 1);
            for i in lo..=hi {
                y[i] += self.ab[self.idx(i, j)] * x[j];
            }
        }
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<Complex64>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// LU factorization with partial pivoting; consumes the matrix.
    pub fn factor(mut self) -> Result<BandLu, UqError> {
        let n = self.n;
        let kl = self.kl;
        let ku = self.ku;
        let mut ipiv = vec![0usize; n];
        for j in 0..n {
            // pivot among rows j..=j+kl
            let last = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.ab[self.idx(j, j)].norm_sqr();
            for i in (j + 1)..=last {
                let mag = self.ab[self.idx(i, j)].norm_sqr();
                if mag > best {
                    best = mag;
                    p = i;
                }
            }
            if best == 0.0 {
                return Err(UqError::SolverFailure {
                    level: 0,
                    detail: format!("singular pivot at column {j}"),
                });
            }
            ipiv[j] = p;
            let row_end = (j + kl + ku).min(n - 1);
            if p != j {
                for c in j..=row_end {
                    let a = self.idx(j, c);
                    let b = self.idx(p, c);
                    self.ab.swap(a, b);
                }
            }
            let pivot = self.ab[self.idx(j, j)];
            for i in (j + 1)..=last {
                let m = self.ab[self.idx(i, j)] / pivot;
                let k = self.idx(i, j);
                self.ab[k] = m;
                for c in (j + 1)..=row_end {
                    let u = self.ab[self.idx(j, c)];
                    let k = self.idx(i, c);
                    self.ab[k] -= m * u;
                }
            }
        }
        Ok(BandLu {
            n,
            kl,
            ku,
            ldab: self.ldab,
            ab: self.ab,
            ipiv,
        })
    }
}

/// Factored form of a [`BandMatrix`].
#[derive(Clone, Debug)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    ldab: usize,
    ab: Vec<Complex64>,
    ipiv: Vec<usize>,
}

impl BandLu {
    #[inline]
    fn at(&self, i: usize, j: usize) -> Complex64 {
        self.ab[j * self.ldab + self.kl + self.ku + i - j]
    }

    /// Solve `A x = b` in place.
    pub fn solve(&self, b: &mut [Complex64]) {
        assert_eq!(b.len(), self.n);
        // forward: apply pivots and L
        for j in 0..self.n {
            let p = self.ipiv[j];
            if p != j {
                b.swap(j, p);
            }
            let last = (j + self.kl).min(self.n - 1);
            let bj = b[j];
            for i in (j + 1)..=last {
                b[i] -= self.at(i, j) * bj;
            }
        }
        // backward: U
        for j in (0..self.n).rev() {
            let hi = (j + self.kl + self.ku).min(self.n - 1);
            let mut acc = b[j];
            for c in (j + 1)..=hi {
                acc -= self.at(j, c) * b[c];
            }
            b[j] = acc / self.at(j, j);
        }
    }
}
