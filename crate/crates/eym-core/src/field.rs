//! Sampled scalar fields and chart/frame contexts.
//!
//! A [`ScalarSamples`] is one jet per sample point. The two backends differ
//! only in how input jets are produced: the analytic backend seeds exact
//! coordinate jets and evaluates closed-form expressions in jet arithmetic,
//! the finite-difference backend estimates Taylor coefficients from stencil
//! taps of the same expressions (or from nodal grid values in the collar
//! discretization). Every tensor operation downstream is backend-agnostic.
//!
//! Two frame contexts are supported:
//! * `Patch` — coordinate frame on an open chart of dimension N.
//! * `Collar` — boundary collar (0, x_max) x Y in the 0-frame
//!   {x d/dx, x e_1, .., x e_n}, with left-invariant cross-section frames;
//!   fields are functions of t = ln x alone and the radial frame derivative
//!   is exactly d/dt.

use crate::error::{EymError, Result};
use crate::jet::{jet_space, Jet, JetSpace};
use crate::stencil::{centered_taps, fd_weights};
use std::sync::Arc;

#[derive(Clone)]
pub struct ScalarSamples {
    pub jets: Vec<Jet>,
}

impl ScalarSamples {
    pub fn len(&self) -> usize {
        self.jets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.jets.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.jets.iter().map(|j| j.value()).collect()
    }

    pub fn sup(&self) -> f64 {
        self.jets.iter().map(|j| j.value().abs()).fold(0.0, f64::max)
    }

    fn zip(&self, rhs: &ScalarSamples, f: impl Fn(&Jet, &Jet) -> Jet) -> ScalarSamples {
        assert_eq!(self.len(), rhs.len(), "sample count mismatch");
        ScalarSamples {
            jets: self
                .jets
                .iter()
                .zip(&rhs.jets)
                .map(|(a, b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, rhs: &ScalarSamples) -> ScalarSamples {
        self.zip(rhs, |a, b| a.add(b))
    }

    pub fn sub(&self, rhs: &ScalarSamples) -> ScalarSamples {
        self.zip(rhs, |a, b| a.sub(b))
    }

    pub fn mul(&self, rhs: &ScalarSamples) -> ScalarSamples {
        self.zip(rhs, |a, b| a.mul(b))
    }

    pub fn div(&self, rhs: &ScalarSamples) -> ScalarSamples {
        self.zip(rhs, |a, b| a.div(b))
    }

    pub fn neg(&self) -> ScalarSamples {
        ScalarSamples {
            jets: self.jets.iter().map(|j| j.neg()).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> ScalarSamples {
        ScalarSamples {
            jets: self.jets.iter().map(|j| j.scale(s)).collect(),
        }
    }

    pub fn add_assign_scaled(&mut self, rhs: &ScalarSamples, s: f64) {
        for (a, b) in self.jets.iter_mut().zip(&rhs.jets) {
            a.add_scaled(b, s);
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleSource {
    Analytic,
    /// Centered stencils of the given accuracy with spacing `h`.
    Stencil { h: f64, acc: usize },
}

/// Cross-section frame of the boundary collar.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CrossSection {
    /// Left-invariant frame on S^3 scaled so the round metric is the
    /// identity; frame brackets [e_i, e_j] = 2 eps_ijk e_k.
    Berger3,
    /// Flat abelian cross-section (half-space model), any boundary dimension.
    FlatTorus,
}

pub struct PatchCtx {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    pub source: SampleSource,
}

pub struct NodalFd {
    pub acc: usize,
    /// Per node: window start plus weights for t-derivatives 1..=3.
    windows: Vec<(usize, [Vec<f64>; 3])>,
}

impl NodalFd {
    pub fn build(tnodes: &[f64], acc: usize) -> Self {
        let m = tnodes.len();
        let w = centered_taps(3, acc).min(m);
        let half = w / 2;
        let mut windows = Vec::with_capacity(m);
        for i in 0..m {
            let start = i.saturating_sub(half).min(m - w);
            let nodes: Vec<f64> = tnodes[start..start + w].to_vec();
            let weights = fd_weights(tnodes[i], &nodes, 3);
            windows.push((start, [weights[1].clone(), weights[2].clone(), weights[3].clone()]));
        }
        NodalFd { acc, windows }
    }
}

pub struct CollarCtx {
    pub n: usize,
    pub cross: CrossSection,
    pub tnodes: Vec<f64>,
    pub nodal: Option<NodalFd>,
}

pub enum CtxKind {
    Patch(PatchCtx),
    Collar(CollarCtx),
}

pub struct FrameCtx {
    pub nframe: usize,
    pub space: Arc<JetSpace>,
    pub kind: CtxKind,
    /// C^c_{ab} with [E_a, E_b] = C^c_{ab} E_c; indexed c*N^2 + a*N + b.
    /// None for coordinate frames.
    pub struct_fns: Option<Vec<ScalarSamples>>,
}

impl FrameCtx {
    pub fn patch(dim: usize, points: Vec<Vec<f64>>, source: SampleSource) -> Self {
        assert!(points.iter().all(|p| p.len() == dim));
        FrameCtx {
            nframe: dim,
            space: jet_space(dim, crate::jet::MAX_ORDER),
            kind: CtxKind::Patch(PatchCtx { dim, points, source }),
            struct_fns: None,
        }
    }

    /// Uniform tensor-product grid over a box, for quadrature checks.
    /// Returns the context and the cell volume.
    pub fn patch_grid(
        dim: usize,
        lo: f64,
        hi: f64,
        per_axis: usize,
        source: SampleSource,
    ) -> (Self, f64) {
        let h = (hi - lo) / (per_axis - 1) as f64;
        let mut points = vec![vec![]];
        for _ in 0..dim {
            let mut next = Vec::with_capacity(points.len() * per_axis);
            for p in &points {
                for i in 0..per_axis {
                    let mut q = p.clone();
                    q.push(lo + h * i as f64);
                    next.push(q);
                }
            }
            points = next;
        }
        (Self::patch(dim, points, source), h.powi(dim as i32))
    }

    /// Collar context on sample values of t = ln x. When `nodal_acc` is set,
    /// the t-nodes must form a uniform grid and nodal grid fields become
    /// available through [`FrameCtx::scalar_from_nodal`].
    pub fn collar(n: usize, cross: CrossSection, tnodes: Vec<f64>, nodal_acc: Option<usize>) -> Self {
        if cross == CrossSection::Berger3 {
            assert_eq!(n, 3, "Berger cross-section requires a 3-sphere boundary");
        }
        let nodal = nodal_acc.map(|acc| NodalFd::build(&tnodes, acc));
        let mut ctx = FrameCtx {
            nframe: n + 1,
            space: jet_space(1, crate::jet::MAX_ORDER),
            kind: CtxKind::Collar(CollarCtx {
                n,
                cross,
                tnodes,
                nodal,
            }),
            struct_fns: None,
        };
        ctx.struct_fns = Some(ctx.build_collar_structure());
        ctx
    }

    fn build_collar_structure(&self) -> Vec<ScalarSamples> {
        let nf = self.nframe;
        let zero = self.constant(0.0);
        let mut c = vec![zero; nf * nf * nf];
        // [E_0, E_i] = E_i
        for i in 1..nf {
            c[i * nf * nf + 0 * nf + i] = self.constant(1.0);
            c[i * nf * nf + i * nf + 0] = self.constant(-1.0);
        }
        if let CtxKind::Collar(cc) = &self.kind {
            if cc.cross == CrossSection::Berger3 {
                // [E_i, E_j] = 2 x eps_ijk E_k
                let two_x = self.scalar_from_expr(|t: &Jet| t.exp().scale(2.0));
                for (i, j, k, s) in [
                    (1, 2, 3, 1.0),
                    (2, 1, 3, -1.0),
                    (2, 3, 1, 1.0),
                    (3, 2, 1, -1.0),
                    (3, 1, 2, 1.0),
                    (1, 3, 2, -1.0),
                ] {
                    c[k * nf * nf + i * nf + j] = two_x.scale(s);
                }
            }
        }
        c
    }

    pub fn npts(&self) -> usize {
        match &self.kind {
            CtxKind::Patch(p) => p.points.len(),
            CtxKind::Collar(c) => c.tnodes.len(),
        }
    }

    pub fn constant(&self, v: f64) -> ScalarSamples {
        ScalarSamples {
            jets: (0..self.npts()).map(|_| Jet::constant(&self.space, v)).collect(),
        }
    }

    pub fn zero(&self) -> ScalarSamples {
        self.constant(0.0)
    }

    /// Frame derivative D_a of a scalar component field.
    pub fn deriv(&self, a: usize, f: &ScalarSamples) -> ScalarSamples {
        match &self.kind {
            CtxKind::Patch(_) => ScalarSamples {
                jets: f.jets.iter().map(|j| j.deriv(a)).collect(),
            },
            CtxKind::Collar(_) => {
                if a == 0 {
                    ScalarSamples {
                        jets: f.jets.iter().map(|j| j.deriv(0)).collect(),
                    }
                } else {
                    // invariant fields: tangential frame derivatives vanish exactly
                    self.zero()
                }
            }
        }
    }

    pub fn structure(&self, c: usize, a: usize, b: usize) -> Option<&ScalarSamples> {
        let nf = self.nframe;
        self.struct_fns.as_ref().map(|s| &s[c * nf * nf + a * nf + b])
    }

    /// Samples a closed-form expression of the patch coordinates.
    pub fn scalar_from_patch_expr(&self, f: impl Fn(&[Jet]) -> Jet) -> ScalarSamples {
        let p = match &self.kind {
            CtxKind::Patch(p) => p,
            _ => panic!("patch expression on a collar context"),
        };
        match p.source {
            SampleSource::Analytic => {
                let jets = p
                    .points
                    .iter()
                    .map(|pt| {
                        let vars: Vec<Jet> = (0..p.dim)
                            .map(|a| Jet::variable(&self.space, pt[a], a))
                            .collect();
                        f(&vars)
                    })
                    .collect();
                ScalarSamples { jets }
            }
            SampleSource::Stencil { h, acc } => {
                let space0 = jet_space(p.dim, 0);
                let eval = |pt: &[f64]| -> f64 {
                    let vars: Vec<Jet> =
                        pt.iter().map(|&v| Jet::constant(&space0, v)).collect();
                    f(&vars).value()
                };
                let jets = p
                    .points
                    .iter()
                    .map(|pt| self.stencil_jet(pt, h, acc, &eval))
                    .collect();
                ScalarSamples { jets }
            }
        }
    }

    fn stencil_jet(&self, pt: &[f64], h: f64, acc: usize, eval: &dyn Fn(&[f64]) -> f64) -> Jet {
        let dim = self.space.dim;
        let order = self.space.order;
        let mut coeffs = vec![0.0; self.space.len()];
        coeffs[0] = eval(pt);
        for i in 1..self.space.len() {
            let alpha: Vec<u8> = self.space.multi_index(i).to_vec();
            // tensor product of per-axis stencils over the supported axes
            let axes: Vec<usize> = (0..dim).filter(|&a| alpha[a] > 0).collect();
            let mut axis_nodes: Vec<Vec<f64>> = Vec::new();
            let mut axis_weights: Vec<Vec<f64>> = Vec::new();
            for &a in &axes {
                let k = alpha[a] as usize;
                let taps = centered_taps(k, acc);
                let half = (taps / 2) as isize;
                let offs: Vec<f64> = (-half..=half).map(|o| o as f64 * h).collect();
                let w = fd_weights(0.0, &offs, k);
                axis_nodes.push(offs);
                axis_weights.push(w[k].clone());
            }
            let mut est = 0.0;
            let mut tap_idx = vec![0usize; axes.len()];
            loop {
                let mut q = pt.to_vec();
                let mut w = 1.0;
                for (m, &a) in axes.iter().enumerate() {
                    q[a] += axis_nodes[m][tap_idx[m]];
                    w *= axis_weights[m][tap_idx[m]];
                }
                est += w * eval(&q);
                // advance the mixed-tap counter
                let mut m = 0;
                loop {
                    if m == axes.len() {
                        break;
                    }
                    tap_idx[m] += 1;
                    if tap_idx[m] < axis_nodes[m].len() {
                        break;
                    }
                    tap_idx[m] = 0;
                    m += 1;
                }
                if m == axes.len() {
                    break;
                }
            }
            let mut fact = 1.0;
            for a in 0..dim {
                for q in 1..=alpha[a] as usize {
                    fact *= q as f64;
                }
            }
            coeffs[i] = est / fact;
        }
        Jet::from_coeffs(&self.space, coeffs, order as i32)
    }

    /// Samples a closed-form radial expression of t = ln x on a collar.
    pub fn scalar_from_expr(&self, f: impl Fn(&Jet) -> Jet) -> ScalarSamples {
        match &self.kind {
            CtxKind::Collar(c) => {
                let jets = c
                    .tnodes
                    .iter()
                    .map(|&t| f(&Jet::variable(&self.space, t, 0)))
                    .collect();
                ScalarSamples { jets }
            }
            _ => panic!("radial expression on a patch context"),
        }
    }

    /// Builds a collar field from nodal grid values using the context's
    /// radial stencil tables.
    pub fn scalar_from_nodal(&self, values: &[f64]) -> Result<ScalarSamples> {
        let c = match &self.kind {
            CtxKind::Collar(c) => c,
            _ => return Err(EymError::Shape("nodal fields require a collar context".into())),
        };
        let fd = c
            .nodal
            .as_ref()
            .ok_or_else(|| EymError::Config("collar context lacks nodal stencil tables".into()))?;
        if values.len() != c.tnodes.len() {
            return Err(EymError::Shape(format!(
                "nodal field length {} vs {} nodes",
                values.len(),
                c.tnodes.len()
            )));
        }
        let jets = (0..values.len())
            .map(|i| {
                let (start, ref ws) = fd.windows[i];
                let mut coeffs = vec![0.0; self.space.len()];
                coeffs[0] = values[i];
                let mut fact = 1.0;
                for k in 1..=3usize {
                    fact *= k as f64;
                    let dk: f64 = ws[k - 1]
                        .iter()
                        .enumerate()
                        .map(|(j, w)| w * values[start + j])
                        .sum();
                    coeffs[k] = dk / fact;
                }
                Jet::from_coeffs(&self.space, coeffs, self.space.order as i32)
            })
            .collect();
        Ok(ScalarSamples { jets })
    }

    pub fn tnodes(&self) -> &[f64] {
        match &self.kind {
            CtxKind::Collar(c) => &c.tnodes,
            _ => panic!("tnodes on a patch context"),
        }
    }

    pub fn xnodes(&self) -> Vec<f64> {
        self.tnodes().iter().map(|t| t.exp()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn stencil_jets_converge_at_stated_order() {
        let pts = vec![vec![0.3, -0.2]];
        let f = |z: &[Jet]| z[0].mul(&z[1]).sin().mul(&z[0].exp());
        let exact_ctx = FrameCtx::patch(2, pts.clone(), SampleSource::Analytic);
        let exact = exact_ctx.scalar_from_patch_expr(f);
        let coeff_exact = exact.jets[0].coeff(&[1, 2]);
        let mut errs = Vec::new();
        for &h in &[0.08, 0.04] {
            let ctx = FrameCtx::patch(2, pts.clone(), SampleSource::Stencil { h, acc: 4 });
            let s = ctx.scalar_from_patch_expr(f);
            errs.push((s.jets[0].coeff(&[1, 2]) - coeff_exact).abs());
        }
        let order = (errs[0] / errs[1]).log2();
        assert!(order > 3.4, "observed stencil order {order}");
    }

    #[test]
    fn collar_radial_derivative_is_dt() {
        let tn: Vec<f64> = (0..9).map(|i| -2.0 + 0.25 * i as f64).collect();
        let ctx = FrameCtx::collar(3, CrossSection::Berger3, tn, None);
        let f = ctx.scalar_from_expr(|t| t.exp()); // x
        let d = ctx.deriv(0, &f); // x d/dx (x) = x
        for (a, b) in d.values().iter().zip(f.values()) {
            assert_relative_eq!(*a, b, max_relative = 1e-13);
        }
        // tangential frame derivatives of invariant fields vanish
        assert_eq!(ctx.deriv(2, &f).sup(), 0.0);
    }

    #[test]
    fn nodal_fields_recover_derivatives() {
        let m = 41;
        let tn: Vec<f64> = (0..m).map(|i| -3.0 + 0.05 * i as f64).collect();
        let ctx = FrameCtx::collar(3, CrossSection::FlatTorus, tn.clone(), Some(6));
        let vals: Vec<f64> = tn.iter().map(|t| (0.5 * t).sin()).collect();
        let f = ctx.scalar_from_nodal(&vals).unwrap();
        let d = ctx.deriv(0, &f);
        for (i, t) in tn.iter().enumerate() {
            assert_relative_eq!(d.jets[i].value(), 0.5 * (0.5 * t).cos(), epsilon = 1e-9);
        }
    }
}
