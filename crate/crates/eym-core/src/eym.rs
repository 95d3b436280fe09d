//! The Einstein-Yang-Mills residual, boundary-data extension operators, the
//! Bianchi-Coulomb gauged map and its linearizations.
//!
//! Conventions: the interior has dimension n+1, the field equations read
//! Ric_g + n g = K_tilde and d*_omega Omega = 0, and a configuration is
//! decomposed as g = g0 + e_x(Gamma) + A, omega = omega0 + e(gamma) + a with
//! the perturbation (A, a) decaying like x^delta, 1 < delta < 2.

use crate::error::{EymError, Result};
use crate::field::{CtxKind, FrameCtx, ScalarSamples};
use crate::forms::{
    cov_ext_deriv, codifferential, curvature_form, stress_energy_of_curvature, AdForm,
};
use crate::lie::LieAlgebra;
use crate::tensor::{bianchi, curvature, delta_star, lichnerowicz_shift, Tensor};
use std::sync::Arc;

/// A metric paired with a Lie-algebra-valued connection 1-form.
#[derive(Clone)]
pub struct Configuration {
    pub g: Tensor,
    pub omega: AdForm,
}

/// Left-invariant boundary data on the cross-section: a constant symmetric
/// perturbation of the boundary metric representative and a constant
/// Lie-algebra-valued boundary 1-form.
#[derive(Clone, Debug)]
pub struct BoundaryData {
    pub n: usize,
    pub lie_dim: usize,
    /// Gamma_ij, i,j = 1..n in the cross-section frame, symmetric.
    pub metric: Vec<f64>,
    /// gamma^a_i, a = 0..lie_dim, i = 1..n.
    pub conn: Vec<f64>,
}

impl BoundaryData {
    pub fn zero(n: usize, lie_dim: usize) -> Self {
        BoundaryData {
            n,
            lie_dim,
            metric: vec![0.0; n * n],
            conn: vec![0.0; lie_dim * n],
        }
    }

    pub fn amplitude(&self) -> f64 {
        self.metric
            .iter()
            .chain(self.conn.iter())
            .map(|v| v.abs())
            .fold(0.0, f64::max)
    }

    pub fn scaled(&self, s: f64) -> Self {
        BoundaryData {
            n: self.n,
            lie_dim: self.lie_dim,
            metric: self.metric.iter().map(|v| v * s).collect(),
            conn: self.conn.iter().map(|v| v * s).collect(),
        }
    }
}

/// Smooth radial cutoff, identically 1 for x <= x1 and 0 for x >= x2.
#[derive(Clone, Copy, Debug)]
pub struct CutoffProfile {
    pub x1: f64,
    pub x2: f64,
}

impl Default for CutoffProfile {
    fn default() -> Self {
        CutoffProfile { x1: 0.2, x2: 0.4 }
    }
}

impl CutoffProfile {
    pub fn validate(&self, ctx: &FrameCtx) -> Result<()> {
        if !(self.x1 > 0.0 && self.x2 > self.x1) {
            return Err(EymError::Config(format!(
                "cutoff profile needs 0 < x1 < x2, got ({}, {})",
                self.x1, self.x2
            )));
        }
        if let CtxKind::Collar(c) = &ctx.kind {
            let xmax = c.tnodes.iter().cloned().fold(f64::MIN, f64::max).exp();
            if self.x2 > xmax + 1e-12 {
                return Err(EymError::Config(format!(
                    "cutoff support [0, {}] exceeds the collar (x_max = {xmax:.4})",
                    self.x2
                )));
            }
        }
        Ok(())
    }

    pub fn value(&self, x: f64) -> f64 {
        let s = (x - self.x1) / (self.x2 - self.x1);
        if s <= 0.0 {
            1.0
        } else if s >= 1.0 {
            0.0
        } else {
            let f = |u: f64| (-1.0 / u).exp();
            f(1.0 - s) / (f(1.0 - s) + f(s))
        }
    }

    /// Samples the cutoff as a radial field on a collar context.
    pub fn field(&self, ctx: &FrameCtx) -> ScalarSamples {
        let (x1, x2) = (self.x1, self.x2);
        ctx.scalar_from_expr(move |t| {
            let x = t.exp();
            let s = x.sub(&crate::jet::Jet::constant(&t.space, x1)).scale(1.0 / (x2 - x1));
            let sv = s.value();
            if sv <= 0.0 {
                crate::jet::Jet::constant(&t.space, 1.0)
            } else if sv >= 1.0 {
                crate::jet::Jet::constant(&t.space, 0.0)
            } else {
                let one = crate::jet::Jet::constant(&t.space, 1.0);
                let f = |u: &crate::jet::Jet| u.recip().neg().exp();
                let a = f(&one.sub(&s));
                let b = f(&s);
                a.div(&a.add(&b))
            }
        })
    }
}

/// Extension of boundary data into the collar: components frozen in the
/// boundary frame, multiplied by the cutoff; the metric extension carries the
/// conformal weight so that x^2 g restricts to the perturbed representative.
pub fn extend_boundary_data(
    ctx: &FrameCtx,
    algebra: &Arc<LieAlgebra>,
    bd: &BoundaryData,
    cutoff: &CutoffProfile,
) -> Result<(Tensor, AdForm)> {
    cutoff.validate(ctx)?;
    let nf = ctx.nframe;
    if bd.n + 1 != nf {
        return Err(EymError::Shape(format!(
            "boundary data dimension {} vs frame {}",
            bd.n, nf
        )));
    }
    if bd.lie_dim != algebra.dim {
        return Err(EymError::AlgebraMismatch(format!(
            "boundary data lie dim {} vs algebra {}",
            bd.lie_dim, algebra.dim
        )));
    }
    let chi = cutoff.field(ctx);
    let mut em = Tensor::zeros(ctx, 2);
    for i in 1..nf {
        for j in 1..nf {
            let v = bd.metric[(i - 1) * bd.n + (j - 1)];
            if v != 0.0 {
                em.set(&[i, j], chi.scale(v));
            }
        }
    }
    let xchi = ctx.scalar_from_expr(|t| t.exp()).mul(&chi);
    let mut ec = AdForm::zeros(ctx, algebra, 1);
    for a in 0..algebra.dim {
        for i in 1..nf {
            let v = bd.conn[a * bd.n + (i - 1)];
            if v != 0.0 {
                ec.set(nf, a, &[i], xchi.scale(v));
            }
        }
    }
    Ok((em, ec))
}

/// A configuration split into trivial base, extended boundary data and a
/// decaying perturbation.
#[derive(Clone)]
pub struct DecomposedConfiguration {
    pub base: Configuration,
    pub boundary: BoundaryData,
    pub cutoff: CutoffProfile,
    pub pert_metric: Tensor,
    pub pert_conn: AdForm,
    pub weight: f64,
}

impl DecomposedConfiguration {
    pub fn trivial(ctx: &FrameCtx, base: Configuration, weight: f64) -> Self {
        let algebra = base.omega.algebra.clone();
        DecomposedConfiguration {
            boundary: BoundaryData::zero(ctx.nframe - 1, algebra.dim),
            cutoff: CutoffProfile::default(),
            pert_metric: Tensor::zeros(ctx, 2),
            pert_conn: AdForm::zeros(ctx, &algebra, 1),
            base,
            weight,
        }
    }

    /// Background g0 + e_x(Gamma), omega0 + e(gamma) used by the gauge
    /// operators.
    pub fn background(&self, ctx: &FrameCtx) -> Result<Configuration> {
        let (em, ec) = extend_boundary_data(
            ctx,
            &self.base.omega.algebra,
            &self.boundary,
            &self.cutoff,
        )?;
        Ok(Configuration {
            g: self.base.g.add(&em),
            omega: self.base.omega.add(&ec),
        })
    }

    /// Full configuration g0 + e_x(Gamma) + A, omega0 + e(gamma) + a.
    pub fn total(&self, ctx: &FrameCtx) -> Result<Configuration> {
        let bg = self.background(ctx)?;
        Ok(Configuration {
            g: bg.g.add(&self.pert_metric),
            omega: bg.omega.add(&self.pert_conn),
        })
    }
}

/// Field-equation residual (Ric_g + n g - K_tilde, d*_omega Omega); both
/// vanish exactly on Einstein-Yang-Mills configurations.
pub fn eym_residual(ctx: &FrameCtx, conf: &Configuration) -> Result<(Tensor, AdForm)> {
    let n = (ctx.nframe - 1) as f64;
    let pk = curvature(ctx, &conf.g)?;
    let om = curvature_form(ctx, &conf.omega)?;
    let se = stress_energy_of_curvature(ctx, &pk, &om)?;
    let metric_res = pk.ricci.add(&conf.g.scale(n)).sub(&se.k_tilde);
    let conn_res = codifferential(ctx, &pk, &conf.omega, &om)?;
    Ok((metric_res, conn_res))
}

/// Bianchi-Coulomb gauge residual (B^{bg} A, d*^{bg}_{omega_bg} a); zero
/// exactly on the gauge slice.
pub fn gauge_residual(ctx: &FrameCtx, dc: &DecomposedConfiguration) -> Result<(Tensor, AdForm)> {
    let bg = dc.background(ctx)?;
    let pk = curvature(ctx, &bg.g)?;
    let b = bianchi(ctx, &pk, &dc.pert_metric)?;
    let cod = codifferential(ctx, &pk, &bg.omega, &dc.pert_conn)?;
    Ok((b, cod))
}

/// The gauged nonlinear map: field-equation residual plus the gauge-fixing
/// terms delta*_g B^{bg} A and d_omega d*^{bg} a.
pub fn gauged_residual(ctx: &FrameCtx, dc: &DecomposedConfiguration) -> Result<(Tensor, AdForm)> {
    let total = dc.total(ctx)?;
    let (mut qres, mut rres) = eym_residual(ctx, &total)?;
    let (bres, cres) = gauge_residual(ctx, dc)?;
    let pk_total = curvature(ctx, &total.g)?;
    qres = qres.add(&delta_star(ctx, &pk_total, &bres)?);
    rres = rres.add(&cov_ext_deriv(ctx, &total.omega, &cres)?);
    Ok((qres, rres))
}

/// Pointwise action density R_g + n(n-1) + Q(g, omega).
pub fn action_density(ctx: &FrameCtx, conf: &Configuration) -> Result<ScalarSamples> {
    let n = (ctx.nframe - 1) as f64;
    let pk = curvature(ctx, &conf.g)?;
    let om = curvature_form(ctx, &conf.omega)?;
    let se = stress_energy_of_curvature(ctx, &pk, &om)?;
    Ok(pk
        .scalar
        .add(&ctx.constant(n * (n - 1.0)))
        .add(&se.q_density))
}

/// Direction for a linearization probe: boundary-data part plus decaying
/// perturbation part.
#[derive(Clone)]
pub struct Direction {
    pub boundary: BoundaryData,
    pub metric: Tensor,
    pub conn: AdForm,
}

impl Direction {
    pub fn interior(metric: Tensor, conn: AdForm) -> Self {
        let n = conn.algebra.dim;
        let nframe_minus = metric.dim - 1;
        Direction {
            boundary: BoundaryData::zero(nframe_minus, n),
            metric,
            conn,
        }
    }
}

pub enum LinearizationMode {
    FiniteDifference { step: f64 },
    AnalyticAtTrivial,
}

fn displace(dc: &DecomposedConfiguration, dir: &Direction, t: f64) -> DecomposedConfiguration {
    let mut out = dc.clone();
    for (dst, src) in out.boundary.metric.iter_mut().zip(&dir.boundary.metric) {
        *dst += t * src;
    }
    for (dst, src) in out.boundary.conn.iter_mut().zip(&dir.boundary.conn) {
        *dst += t * src;
    }
    out.pert_metric = out.pert_metric.add(&dir.metric.scale(t));
    out.pert_conn = out.pert_conn.add(&dir.conn.scale(t));
    out
}

/// Linearization of the gauged map at `dc` in a given direction: either a
/// centered difference quotient, or the closed-form decoupled blocks valid
/// at a trivial base point,
/// (1/2 (L(e_x Gamma) + Lich_n A), d* d e(gamma) + Hodge1 a).
pub fn linearize_gauged(
    ctx: &FrameCtx,
    dc: &DecomposedConfiguration,
    dir: &Direction,
    mode: LinearizationMode,
) -> Result<(Tensor, AdForm)> {
    match mode {
        LinearizationMode::FiniteDifference { step } => {
            let plus = gauged_residual(ctx, &displace(dc, dir, step))?;
            let minus = gauged_residual(ctx, &displace(dc, dir, -step))?;
            Ok((
                plus.0.sub(&minus.0).scale(0.5 / step),
                plus.1.sub(&minus.1).scale(0.5 / step),
            ))
        }
        LinearizationMode::AnalyticAtTrivial => {
            let n = (ctx.nframe - 1) as f64;
            // base must be trivial and dc must sit at the base point
            let pk0 = curvature(ctx, &dc.base.g)?;
            let pe_resid = pk0.ricci.add(&dc.base.g.scale(n)).sup();
            let om0 = curvature_form(ctx, &dc.base.omega)?;
            let scale = dc.base.g.sup().max(1.0);
            if pe_resid > 1e-8 * scale || om0.sup() > 1e-10 {
                return Err(EymError::UnsupportedMode(
                    "analytic linearization requires a trivial base (Einstein metric, flat connection)"
                        .into(),
                ));
            }
            if dc.boundary.amplitude() != 0.0
                || dc.pert_metric.sup() != 0.0
                || dc.pert_conn.sup() != 0.0
            {
                return Err(EymError::UnsupportedMode(
                    "analytic linearization is taken at the base point itself".into(),
                ));
            }
            let (em, ec) =
                extend_boundary_data(ctx, &dc.base.omega.algebra, &dir.boundary, &dc.cutoff)?;
            // metric block: L(e_x Gamma) + 1/2 (Lich + 2n) A, where
            // L h = 1/2 (Lich + 2n) h - delta* B h is the linearized
            // Einstein operator; the gauge term cancels its Lie-derivative
            // part on the decaying perturbation only.
            let lich_a = lichnerowicz_shift(ctx, &pk0, &dir.metric, n)?;
            let lich_e = lichnerowicz_shift(ctx, &pk0, &em, n)?;
            let corr = delta_star(ctx, &pk0, &bianchi(ctx, &pk0, &em)?)?;
            let metric_block = lich_e.scale(0.5).sub(&corr).add(&lich_a.scale(0.5));
            // connection block: d*_{omega0} d_{omega0} e(gamma) + Hodge1 a
            let d_ec = cov_ext_deriv(ctx, &dc.base.omega, &ec)?;
            let dstar_d_ec = codifferential(ctx, &pk0, &dc.base.omega, &d_ec)?;
            let hodge_a =
                crate::forms::twisted_hodge_laplacian(ctx, &pk0, &dc.base.omega, &dir.conn)?;
            let conn_block = dstar_d_ec.add(&hodge_a);
            Ok((metric_block, conn_block))
        }
    }
}
