//! Model charts: the Poincare ball, flat patches, and boundary collars.

use crate::error::{EymError, Result};
use crate::field::{CrossSection, CtxKind, FrameCtx, ScalarSamples};
use crate::jet::Jet;
use crate::tensor::Tensor;
use rand::distributions::{Distribution, Uniform};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ChartModel {
    Ball,
    HalfSpace,
}

/// Chart description for the hyperbolic model metric.
#[derive(Clone, Debug)]
pub struct ChartSpec {
    pub model: ChartModel,
    /// Interior dimension n + 1.
    pub dim_interior: usize,
}

impl ChartSpec {
    pub fn ball(dim_interior: usize) -> Self {
        ChartSpec {
            model: ChartModel::Ball,
            dim_interior,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim_interior < 3 {
            return Err(EymError::Config(format!(
                "interior dimension {} too small, gauge-sector results need n >= 3 and identities n >= 2",
                self.dim_interior
            )));
        }
        Ok(())
    }
}

/// Conformal factor squared of the ball model, r(w)^{-2} with
/// r(w) = (1 - |w|^2)/2.
pub fn ball_conformal_factor_sq(ctx: &FrameCtx) -> ScalarSamples {
    let dim = ctx.nframe;
    ctx.scalar_from_patch_expr(move |z: &[Jet]| {
        let mut n2 = z[0].mul(&z[0]);
        for a in 1..dim {
            n2 = n2.add(&z[a].mul(&z[a]));
        }
        let r = Jet::constant(&z[0].space, 1.0).sub(&n2).scale(0.5);
        r.mul(&r).recip()
    })
}

/// Hyperbolic metric in ball coordinates, g_ij = r(w)^{-2} delta_ij.
pub fn ball_hyperbolic_metric(ctx: &FrameCtx) -> Tensor {
    let n = ctx.nframe;
    let conf = ball_conformal_factor_sq(ctx);
    let mut g = Tensor::zeros(ctx, 2);
    for a in 0..n {
        g.set(&[a, a], conf.clone());
    }
    g
}

/// The model metric for a chart specification; only the ball chart carries a
/// global coordinate implementation.
pub fn hyperbolic_metric(spec: &ChartSpec, ctx: &FrameCtx) -> Result<Tensor> {
    spec.validate()?;
    match spec.model {
        ChartModel::Ball => {
            if ctx.nframe != spec.dim_interior {
                return Err(EymError::Shape(format!(
                    "chart dimension {} vs context frame {}",
                    spec.dim_interior, ctx.nframe
                )));
            }
            match &ctx.kind {
                CtxKind::Patch(_) => Ok(ball_hyperbolic_metric(ctx)),
                _ => Err(EymError::Shape("ball chart needs a coordinate patch".into())),
            }
        }
        ChartModel::HalfSpace => Err(EymError::UnsupportedChart(
            "half-space coordinates are not implemented; use the ball chart or a boundary collar".into(),
        )),
    }
}

/// Special defining function of the ball model, x(w) = 2(1-|w|)/(1+|w|).
pub fn ball_defining_function(ctx: &FrameCtx) -> ScalarSamples {
    let dim = ctx.nframe;
    ctx.scalar_from_patch_expr(move |z: &[Jet]| {
        let mut n2 = z[0].mul(&z[0]);
        for a in 1..dim {
            n2 = n2.add(&z[a].mul(&z[a]));
        }
        let r = n2.sqrt();
        let one = Jet::constant(&z[0].space, 1.0);
        one.sub(&r).scale(2.0).div(&one.add(&r))
    })
}

pub fn euclidean_metric(ctx: &FrameCtx) -> Tensor {
    let n = ctx.nframe;
    let mut g = Tensor::zeros(ctx, 2);
    for a in 0..n {
        g.set(&[a, a], ctx.constant(1.0));
    }
    g
}

/// Hyperbolic metric in 0-frame collar components: the Berger cross-section
/// carries the geodesic-polar profile (1 - x^2/4)^2 on the spherical legs,
/// the flat cross-section is the half-space model with identity components.
pub fn collar_hyperbolic_metric(ctx: &FrameCtx) -> Tensor {
    let nf = ctx.nframe;
    let mut g = Tensor::zeros(ctx, 2);
    g.set(&[0, 0], ctx.constant(1.0));
    let cross = match &ctx.kind {
        CtxKind::Collar(c) => c.cross,
        _ => panic!("collar metric on a patch context"),
    };
    match cross {
        CrossSection::FlatTorus => {
            for a in 1..nf {
                g.set(&[a, a], ctx.constant(1.0));
            }
        }
        CrossSection::Berger3 => {
            let phi2 = ctx.scalar_from_expr(|t| {
                let x2 = t.exp().mul(&t.exp());
                let phi = Jet::constant(&t.space, 1.0).sub(&x2.scale(0.25));
                phi.mul(&phi)
            });
            for a in 1..nf {
                g.set(&[a, a], phi2.clone());
            }
        }
    }
    g
}

/// Deterministic smooth test metric: identity plus a small symmetric
/// perturbation with polynomial and low-frequency trigonometric parts. The
/// amplitude keeps it positive definite on charts of size O(1).
pub fn test_metric(ctx: &FrameCtx, amplitude: f64, seed: u64) -> Tensor {
    let n = ctx.nframe;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = Uniform::new(-1.0f64, 1.0);
    let mut g = Tensor::zeros(ctx, 2);
    for a in 0..n {
        for b in a..n {
            let lin: Vec<f64> = (0..n).map(|_| u.sample(&mut rng)).collect();
            let quad: Vec<f64> = (0..n * n).map(|_| u.sample(&mut rng)).collect();
            let freq: Vec<f64> = (0..n).map(|_| 2.0 * u.sample(&mut rng)).collect();
            let phase = u.sample(&mut rng);
            let trig_amp = u.sample(&mut rng);
            let diag = a == b;
            let f = ctx.scalar_from_patch_expr(move |z: &[Jet]| {
                let mut s = Jet::constant(&z[0].space, if diag { 1.0 } else { 0.0 });
                let mut pert = Jet::constant(&z[0].space, 0.0);
                for i in 0..z.len() {
                    pert = pert.add(&z[i].scale(lin[i]));
                    for j in 0..z.len() {
                        pert = pert.add(&z[i].mul(&z[j]).scale(0.5 * quad[i * z.len() + j]));
                    }
                }
                let mut arg = Jet::constant(&z[0].space, phase);
                for i in 0..z.len() {
                    arg = arg.add(&z[i].scale(freq[i]));
                }
                pert = pert.add(&arg.sin().scale(trig_amp));
                s = s.add(&pert.scale(amplitude));
                s
            });
            g.set(&[a, b], f.clone());
            if a != b {
                g.set(&[b, a], f);
            }
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::SampleSource;
    use crate::tensor::{curvature, dscalar, tensor_dot};
    use approx::assert_relative_eq;

    #[test]
    fn conformal_factor_at_origin() {
        // w = 0, n+1 = 4: r = 1/2, g = 4 delta
        let ctx = FrameCtx::patch(4, vec![vec![1e-8, 0.0, 0.0, 0.0]], SampleSource::Analytic);
        let g = ball_hyperbolic_metric(&ctx);
        assert_relative_eq!(g.get(&[0, 0]).values()[0], 4.0, max_relative = 1e-6);
        assert_eq!(g.get(&[0, 1]).values()[0], 0.0);
    }

    #[test]
    fn conformal_factor_diverges_at_rim() {
        let ctx = FrameCtx::patch(
            4,
            vec![vec![0.99, 0.0, 0.0, 0.0], vec![0.999, 0.0, 0.0, 0.0]],
            SampleSource::Analytic,
        );
        let g = ball_hyperbolic_metric(&ctx);
        let v = g.get(&[0, 0]).values();
        assert!(v[1] > 50.0 * v[0] / 10.0);
        // grows like r^{-2}
        let r = |w: f64| (1.0 - w * w) / 2.0;
        assert_relative_eq!(v[0], r(0.99).powi(-2), max_relative = 1e-12);
    }

    #[test]
    fn half_space_chart_rejected() {
        let ctx = FrameCtx::patch(4, vec![vec![0.1, 0.0, 0.0, 0.0]], SampleSource::Analytic);
        let spec = ChartSpec {
            model: ChartModel::HalfSpace,
            dim_interior: 4,
        };
        assert!(matches!(
            hyperbolic_metric(&spec, &ctx),
            Err(EymError::UnsupportedChart(_))
        ));
    }

    #[test]
    fn special_defining_function_has_unit_gradient() {
        // |dx|_{x^2 g} = 1 on the collar
        let pts = vec![vec![0.4, 0.2, -0.1, 0.3], vec![0.7, 0.05, 0.0, -0.1]];
        let ctx = FrameCtx::patch(4, pts, SampleSource::Analytic);
        let g = ball_hyperbolic_metric(&ctx);
        let x = ball_defining_function(&ctx);
        let x2 = x.mul(&x);
        let gbar = g.scale_field(&x2);
        let pk = curvature(&ctx, &gbar).unwrap();
        let dx = dscalar(&ctx, &x);
        let norm2 = tensor_dot(&ctx, &pk, &dx, &dx);
        for v in norm2.values() {
            assert_relative_eq!(v, 1.0, max_relative = 1e-10);
        }
    }

    #[test]
    fn test_metric_is_positive_definite() {
        let ctx = FrameCtx::patch(
            3,
            vec![vec![0.3, -0.2, 0.1], vec![-0.4, 0.4, 0.0]],
            SampleSource::Analytic,
        );
        let g = test_metric(&ctx, 0.15, 42);
        let pk = curvature(&ctx, &g);
        assert!(pk.is_ok());
        for v in pk.unwrap().det.jets.iter().map(|j| j.value()) {
            assert!(v > 0.0);
        }
    }
}
