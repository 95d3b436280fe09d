//! Truncated multivariate Taylor arithmetic (forward-mode jets).
//!
//! A [`Jet`] holds the Taylor coefficients of a scalar quantity at a sample
//! point, up to a fixed total order over a fixed number of chart variables.
//! All pointwise tensor algebra in this crate runs on jets, so the same
//! operator code serves both the analytic backend (exact seeds) and the
//! finite-difference backend (stencil-estimated seeds).
//!
//! Coefficients are stored in Taylor normalization, `c_alpha = d^alpha f / alpha!`,
//! which makes multiplication a plain convolution.

use once_cell::sync::Lazy;
use std::collections::HashMap;
use std::sync::{Arc, Mutex};

pub const MAX_ORDER: usize = 3;

type MultiIdx = [u8; 6];

/// Shared layout tables for jets of a given (dim, order).
pub struct JetSpace {
    pub dim: usize,
    pub order: usize,
    idx: Vec<MultiIdx>,
    lookup: HashMap<MultiIdx, usize>,
    /// (out, a, b) triples with idx[a] + idx[b] = idx[out].
    mul_table: Vec<(u32, u32, u32)>,
    /// Per axis: (dst, src, factor) with factor = alpha_axis + 1.
    shift_table: Vec<Vec<(u32, u32, f64)>>,
}

fn enumerate_multi_indices(dim: usize, order: usize) -> Vec<MultiIdx> {
    // grouped by |alpha|, lexicographic within each layer
    fn rec_exact(out: &mut Vec<MultiIdx>, cur: &mut MultiIdx, axis: usize, dim: usize, left: usize) {
        if axis + 1 == dim {
            cur[axis] = left as u8;
            out.push(*cur);
            cur[axis] = 0;
            return;
        }
        for k in 0..=left {
            cur[axis] = k as u8;
            rec_exact(out, cur, axis + 1, dim, left - k);
        }
        cur[axis] = 0;
    }
    let mut out = Vec::new();
    let mut cur = [0u8; 6];
    for total in 0..=order {
        rec_exact(&mut out, &mut cur, 0, dim, total);
    }
    out
}

impl JetSpace {
    fn new(dim: usize, order: usize) -> Self {
        assert!(dim >= 1 && dim <= 6, "jet dim out of range");
        assert!(order <= MAX_ORDER);
        let idx = enumerate_multi_indices(dim, order);
        let mut lookup = HashMap::new();
        for (i, a) in idx.iter().enumerate() {
            lookup.insert(*a, i);
        }
        let degree = |a: &MultiIdx| a.iter().map(|&x| x as usize).sum::<usize>();
        let mut mul_table = Vec::new();
        for (ia, a) in idx.iter().enumerate() {
            for (ib, b) in idx.iter().enumerate() {
                if degree(a) + degree(b) <= order {
                    let mut g = [0u8; 6];
                    for k in 0..dim {
                        g[k] = a[k] + b[k];
                    }
                    let out = lookup[&g];
                    mul_table.push((out as u32, ia as u32, ib as u32));
                }
            }
        }
        mul_table.sort_unstable();
        let mut shift_table = Vec::new();
        for axis in 0..dim {
            let mut tab = Vec::new();
            for (i, a) in idx.iter().enumerate() {
                let mut src = *a;
                src[axis] += 1;
                if let Some(&s) = lookup.get(&src) {
                    tab.push((i as u32, s as u32, (a[axis] + 1) as f64));
                }
            }
            shift_table.push(tab);
        }
        JetSpace {
            dim,
            order,
            idx,
            lookup,
            mul_table,
            shift_table,
        }
    }

    pub fn len(&self) -> usize {
        self.idx.len()
    }

    pub fn index_of(&self, alpha: &[u8]) -> usize {
        let mut key = [0u8; 6];
        key[..alpha.len()].copy_from_slice(alpha);
        self.lookup[&key]
    }

    pub fn multi_index(&self, i: usize) -> &[u8] {
        &self.idx[i][..self.dim]
    }
}

static SPACES: Lazy<Mutex<HashMap<(usize, usize), Arc<JetSpace>>>> =
    Lazy::new(|| Mutex::new(HashMap::new()));

pub fn jet_space(dim: usize, order: usize) -> Arc<JetSpace> {
    let mut map = SPACES.lock().unwrap();
    map.entry((dim, order))
        .or_insert_with(|| Arc::new(JetSpace::new(dim, order)))
        .clone()
}

/// Taylor expansion of a scalar at one sample point.
///
/// `valid` tracks how many derivative orders are still trustworthy; each
/// derivative shift consumes one. Reading the value asserts `valid >= 0`
/// so a pipeline that overdraws its derivative budget fails loudly.
#[derive(Clone)]
pub struct Jet {
    pub space: Arc<JetSpace>,
    pub c: Vec<f64>,
    valid: i32,
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, v: f64) -> Self {
        let mut c = vec![0.0; space.len()];
        c[0] = v;
        Jet {
            space: space.clone(),
            c,
            valid: space.order as i32,
        }
    }

    /// Coordinate seed: value `v`, unit first-order coefficient on `axis`.
    pub fn variable(space: &Arc<JetSpace>, v: f64, axis: usize) -> Self {
        let mut j = Jet::constant(space, v);
        if space.order >= 1 {
            let mut alpha = [0u8; 6];
            alpha[axis] = 1;
            let i = space.index_of(&alpha[..space.dim]);
            j.c[i] = 1.0;
        }
        j
    }

    /// Builds a jet from raw Taylor coefficients with full validity.
    pub fn from_coeffs(space: &Arc<JetSpace>, c: Vec<f64>, valid: i32) -> Self {
        assert_eq!(c.len(), space.len());
        Jet {
            space: space.clone(),
            c,
            valid,
        }
    }

    pub fn value(&self) -> f64 {
        assert!(self.valid >= 0, "jet derivative budget exhausted");
        self.c[0]
    }

    pub fn valid_order(&self) -> i32 {
        self.valid
    }

    /// Taylor coefficient for the given multi-index (not the raw derivative).
    pub fn coeff(&self, alpha: &[u8]) -> f64 {
        let deg: i32 = alpha.iter().map(|&x| x as i32).sum();
        assert!(deg <= self.valid, "jet coefficient beyond validity");
        self.c[self.space.index_of(alpha)]
    }

    pub fn deriv(&self, axis: usize) -> Jet {
        let mut c = vec![0.0; self.space.len()];
        for &(dst, src, f) in &self.space.shift_table[axis] {
            c[dst as usize] = f * self.c[src as usize];
        }
        Jet {
            space: self.space.clone(),
            c,
            valid: self.valid - 1,
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let mut out = self.clone();
        for v in &mut out.c {
            *v *= s;
        }
        out
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        for (a, b) in out.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
        out.valid = out.valid.min(rhs.valid);
        out
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        let mut out = self.clone();
        for (a, b) in out.c.iter_mut().zip(&rhs.c) {
            *a -= b;
        }
        out.valid = out.valid.min(rhs.valid);
        out
    }

    pub fn neg(&self) -> Jet {
        self.scale(-1.0)
    }

    pub fn mul(&self, rhs: &Jet) -> Jet {
        let mut c = vec![0.0; self.space.len()];
        for &(out, a, b) in &self.space.mul_table {
            c[out as usize] += self.c[a as usize] * rhs.c[b as usize];
        }
        Jet {
            space: self.space.clone(),
            c,
            valid: self.valid.min(rhs.valid),
        }
    }

    pub fn add_scaled(&mut self, rhs: &Jet, s: f64) {
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += s * b;
        }
        self.valid = self.valid.min(rhs.valid);
    }

    /// Composes a univariate series: `derivs[k]` is the k-th derivative of the
    /// outer function at `self.value()`.
    pub fn univariate(&self, derivs: &[f64; MAX_ORDER + 1]) -> Jet {
        let mut w = self.clone();
        w.c[0] = 0.0;
        let mut out = Jet::constant(&self.space, derivs[0]);
        out.valid = self.valid;
        let mut pw = Jet::constant(&self.space, 1.0);
        let mut fact = 1.0;
        for k in 1..=self.space.order {
            pw = pw.mul(&w);
            fact *= k as f64;
            out.add_scaled(&pw, derivs[k] / fact);
        }
        out.valid = self.valid;
        out
    }

    pub fn recip(&self) -> Jet {
        let u = self.c[0];
        assert!(u != 0.0, "jet reciprocal at zero");
        self.univariate(&[
            1.0 / u,
            -1.0 / (u * u),
            2.0 / (u * u * u),
            -6.0 / (u * u * u * u),
        ])
    }

    pub fn div(&self, rhs: &Jet) -> Jet {
        self.mul(&rhs.recip())
    }

    pub fn exp(&self) -> Jet {
        let e = self.c[0].exp();
        self.univariate(&[e, e, e, e])
    }

    pub fn ln(&self) -> Jet {
        let u = self.c[0];
        self.univariate(&[u.ln(), 1.0 / u, -1.0 / (u * u), 2.0 / (u * u * u)])
    }

    pub fn sqrt(&self) -> Jet {
        let u = self.c[0];
        let r = u.sqrt();
        self.univariate(&[
            r,
            0.5 / r,
            -0.25 / (r * u),
            0.375 / (r * u * u),
        ])
    }

    pub fn powf(&self, p: f64) -> Jet {
        let u = self.c[0];
        self.univariate(&[
            u.powf(p),
            p * u.powf(p - 1.0),
            p * (p - 1.0) * u.powf(p - 2.0),
            p * (p - 1.0) * (p - 2.0) * u.powf(p - 3.0),
        ])
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        self.univariate(&[s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.c[0].sin_cos();
        self.univariate(&[c, -s, -c, s])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn space_sizes() {
        assert_eq!(jet_space(1, 3).len(), 4);
        assert_eq!(jet_space(4, 3).len(), 35);
        assert_eq!(jet_space(4, 0).len(), 1);
    }

    #[test]
    fn product_rule_and_chain_rule() {
        let sp = jet_space(2, 3);
        let x = Jet::variable(&sp, 0.7, 0);
        let y = Jet::variable(&sp, -0.3, 1);
        // f = exp(x*y) * sin(x)
        let f = x.mul(&y).exp().mul(&x.sin());
        let fx = f.deriv(0);
        // d/dx [e^{xy} sin x] = e^{xy}(y sin x + cos x)
        let expected = (0.7f64 * -0.3).exp() * (-0.3 * 0.7f64.sin() + 0.7f64.cos());
        assert_relative_eq!(fx.value(), expected, max_relative = 1e-14);
        // mixed partial d2/dxdy via coefficient
        let fxy = fx.deriv(1);
        let eps = 1e-5;
        let g = |x: f64, y: f64| (x * y).exp() * x.sin();
        let num = (g(0.7 + eps, -0.3 + eps) - g(0.7 + eps, -0.3 - eps)
            - g(0.7 - eps, -0.3 + eps)
            + g(0.7 - eps, -0.3 - eps))
            / (4.0 * eps * eps);
        assert_relative_eq!(fxy.value(), num, max_relative = 1e-5);
    }

    #[test]
    fn division_and_powers() {
        let sp = jet_space(1, 3);
        let t = Jet::variable(&sp, 0.4, 0);
        let f = t.powf(2.5).div(&t.mul(&t).add(&Jet::constant(&sp, 1.0)));
        // third derivative sanity against finite differences
        let g = |t: f64| t.powf(2.5) / (t * t + 1.0);
        let h = 1e-3;
        let d3 = (g(0.4 + 2.0 * h) - 2.0 * g(0.4 + h) + 2.0 * g(0.4 - h) - g(0.4 - 2.0 * h))
            / (2.0 * h * h * h);
        let coeff = f.coeff(&[3]);
        assert_relative_eq!(coeff * 6.0, d3, max_relative = 1e-5);
    }

    #[test]
    #[should_panic(expected = "budget")]
    fn overdrawn_budget_panics() {
        let sp = jet_space(1, 3);
        let t = Jet::variable(&sp, 1.0, 0);
        let d4 = t.deriv(0).deriv(0).deriv(0).deriv(0);
        let _ = d4.value();
    }
}
