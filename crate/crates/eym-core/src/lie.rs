//! Finite-dimensional Lie algebra data: structure constants and an
//! Ad-invariant inner product.

use crate::error::{EymError, Result};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct LieAlgebra {
    pub name: String,
    pub dim: usize,
    /// c^k_{ij}, indexed k*d*d + i*d + j.
    pub structure: Vec<f64>,
    /// q_{ij}, symmetric positive definite, Ad-invariant.
    pub inner: Vec<f64>,
}

impl LieAlgebra {
    pub fn c(&self, k: usize, i: usize, j: usize) -> f64 {
        self.structure[k * self.dim * self.dim + i * self.dim + j]
    }

    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.inner[i * self.dim + j]
    }

    /// Abelian u(1): one generator, vanishing brackets, unit inner product.
    pub fn u1() -> Arc<Self> {
        Arc::new(LieAlgebra {
            name: "u1".into(),
            dim: 1,
            structure: vec![0.0],
            inner: vec![1.0],
        })
    }

    /// su(2) with [T_i, T_j] = eps_ijk T_k and q the inner product making
    /// {T_i} orthonormal (negative Killing form rescaled).
    pub fn su2() -> Arc<Self> {
        let d = 3;
        let mut c = vec![0.0; d * d * d];
        let eps = [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0)];
        for &(i, j, k, s) in &eps {
            c[k * d * d + i * d + j] = s;
            c[k * d * d + j * d + i] = -s;
        }
        let mut q = vec![0.0; d * d];
        for i in 0..d {
            q[i * d + i] = 1.0;
        }
        Arc::new(LieAlgebra {
            name: "su2".into(),
            dim: d,
            structure: c,
            inner: q,
        })
    }

    pub fn preset(name: &str) -> Result<Arc<Self>> {
        match name {
            "u1" => Ok(Self::u1()),
            "su2" => Ok(Self::su2()),
            other => Err(EymError::Config(format!("unknown lie algebra preset '{other}'"))),
        }
    }

    /// Checks antisymmetry, the Jacobi identity, symmetry and positivity of q,
    /// and Ad-invariance q([X,Y],Z) + q(Y,[X,Z]) = 0.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim;
        let tol = 1e-12;
        for k in 0..d {
            for i in 0..d {
                for j in 0..d {
                    if (self.c(k, i, j) + self.c(k, j, i)).abs() > tol {
                        return Err(EymError::AlgebraMismatch(
                            "structure constants not antisymmetric".into(),
                        ));
                    }
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    for m in 0..d {
                        let mut s = 0.0;
                        for e in 0..d {
                            s += self.c(e, i, j) * self.c(m, e, k)
                                + self.c(e, j, k) * self.c(m, e, i)
                                + self.c(e, k, i) * self.c(m, e, j);
                        }
                        if s.abs() > tol {
                            return Err(EymError::AlgebraMismatch("Jacobi identity fails".into()));
                        }
                    }
                }
            }
        }
        for i in 0..d {
            for j in 0..d {
                if (self.q(i, j) - self.q(j, i)).abs() > tol {
                    return Err(EymError::AlgebraMismatch("inner product not symmetric".into()));
                }
            }
        }
        // positivity via Cholesky-style elimination
        let mut m: Vec<f64> = self.inner.clone();
        for p in 0..d {
            let piv = m[p * d + p];
            if piv <= 0.0 {
                return Err(EymError::AlgebraMismatch(
                    "inner product not positive definite".into(),
                ));
            }
            for r in (p + 1)..d {
                let f = m[r * d + p] / piv;
                for cidx in p..d {
                    m[r * d + cidx] -= f * m[p * d + cidx];
                }
            }
        }
        for x in 0..d {
            for y in 0..d {
                for z in 0..d {
                    let mut s = 0.0;
                    for e in 0..d {
                        s += self.c(e, x, y) * self.q(e, z) + self.c(e, x, z) * self.q(y, e);
                    }
                    if s.abs() > tol {
                        return Err(EymError::AlgebraMismatch("inner product not Ad-invariant".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        LieAlgebra::u1().validate().unwrap();
        LieAlgebra::su2().validate().unwrap();
    }

    #[test]
    fn su2_bracket() {
        let a = LieAlgebra::su2();
        assert_eq!(a.c(2, 0, 1), 1.0);
        assert_eq!(a.c(2, 1, 0), -1.0);
        assert_eq!(a.c(0, 0, 1), 0.0);
    }

    #[test]
    fn broken_jacobi_rejected() {
        let mut bad = (*LieAlgebra::su2()).clone();
        bad.structure[0] = 0.7;
        assert!(bad.validate().is_err());
    }
}
