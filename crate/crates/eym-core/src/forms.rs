//! Lie-algebra-valued differential forms on a trivialized bundle:
//! connection curvature, covariant exterior derivative, codifferential,
//! twisted Hodge Laplacians and the Yang-Mills stress-energy tensors.

use crate::error::{EymError, Result};
use crate::field::{FrameCtx, ScalarSamples};
use crate::lie::LieAlgebra;
use crate::tensor::{hodge_star, index_tuples, CurvaturePackage, Tensor};
use std::sync::Arc;

/// Differential k-form with values in a fixed Lie algebra, stored with all
/// frame components explicit (antisymmetric in the frame indices).
#[derive(Clone)]
pub struct AdForm {
    pub degree: usize,
    pub algebra: Arc<LieAlgebra>,
    /// lie index major, frame multi-index minor
    pub comps: Vec<ScalarSamples>,
}

impl AdForm {
    pub fn zeros(ctx: &FrameCtx, algebra: &Arc<LieAlgebra>, degree: usize) -> Self {
        let n = ctx.nframe;
        AdForm {
            degree,
            algebra: algebra.clone(),
            comps: vec![ctx.zero(); algebra.dim * n.pow(degree as u32)],
        }
    }

    fn blk(&self, n: usize) -> usize {
        n.pow(self.degree as u32)
    }

    pub fn get(&self, n: usize, a: usize, ids: &[usize]) -> &ScalarSamples {
        let mut k = 0;
        for &i in ids {
            k = k * n + i;
        }
        &self.comps[a * self.blk(n) + k]
    }

    pub fn set(&mut self, n: usize, a: usize, ids: &[usize], v: ScalarSamples) {
        let mut k = 0;
        for &i in ids {
            k = k * n + i;
        }
        let b = self.blk(n);
        self.comps[a * b + k] = v;
    }

    pub fn add(&self, rhs: &AdForm) -> AdForm {
        assert_eq!(self.degree, rhs.degree);
        AdForm {
            degree: self.degree,
            algebra: self.algebra.clone(),
            comps: self
                .comps
                .iter()
                .zip(&rhs.comps)
                .map(|(a, b)| a.add(b))
                .collect(),
        }
    }

    pub fn sub(&self, rhs: &AdForm) -> AdForm {
        self.add(&rhs.scale(-1.0))
    }

    pub fn scale(&self, s: f64) -> AdForm {
        AdForm {
            degree: self.degree,
            algebra: self.algebra.clone(),
            comps: self.comps.iter().map(|c| c.scale(s)).collect(),
        }
    }

    pub fn scale_field(&self, s: &ScalarSamples) -> AdForm {
        AdForm {
            degree: self.degree,
            algebra: self.algebra.clone(),
            comps: self.comps.iter().map(|c| c.mul(s)).collect(),
        }
    }

    pub fn sup(&self) -> f64 {
        self.comps.iter().map(|c| c.sup()).fold(0.0, f64::max)
    }

    fn check_algebra(&self, other: &AdForm) -> Result<()> {
        if self.algebra.dim != other.algebra.dim || self.algebra.name != other.algebra.name {
            return Err(EymError::AlgebraMismatch(format!(
                "{} vs {}",
                self.algebra.name, other.algebra.name
            )));
        }
        Ok(())
    }

    /// Lie-component slice as a plain covariant tensor.
    pub fn lie_component(&self, ctx: &FrameCtx, a: usize) -> Tensor {
        let n = ctx.nframe;
        let b = self.blk(n);
        Tensor {
            rank: self.degree,
            dim: n,
            comps: self.comps[a * b..(a + 1) * b].to_vec(),
        }
    }
}

/// Frame exterior derivative of an Ad-valued k-form (no connection term).
fn exterior_deriv(ctx: &FrameCtx, phi: &AdForm) -> Result<AdForm> {
    let n = ctx.nframe;
    let k = phi.degree;
    if k + 1 > n {
        return Err(EymError::DegreeOutOfRange(format!(
            "d of a {k}-form in frame dimension {n}"
        )));
    }
    let d = phi.algebra.dim;
    let mut out = AdForm::zeros(ctx, &phi.algebra, k + 1);
    for a in 0..d {
        for ids in index_tuples(n, k + 1) {
            let mut s = ctx.zero();
            for slot in 0..=k {
                let mut rest: Vec<usize> = ids.clone();
                let ai = rest.remove(slot);
                let sign = if slot % 2 == 0 { 1.0 } else { -1.0 };
                s = s.add(&ctx.deriv(ai, phi.get(n, a, &rest)).scale(sign));
            }
            // bracket terms of the anholonomic frame
            if ctx.struct_fns.is_some() {
                for s1 in 0..=k {
                    for s2 in (s1 + 1)..=k {
                        let mut rest: Vec<usize> = Vec::with_capacity(k.max(1));
                        for (q, &v) in ids.iter().enumerate() {
                            if q != s1 && q != s2 {
                                rest.push(v);
                            }
                        }
                        let sign = if (s1 + s2) % 2 == 0 { 1.0 } else { -1.0 };
                        for e in 0..n {
                            let cf = ctx.structure(e, ids[s1], ids[s2]).unwrap();
                            if cf.jets.iter().all(|j| j.c.iter().all(|&v| v == 0.0)) {
                                continue;
                            }
                            let mut full = vec![e];
                            full.extend_from_slice(&rest);
                            s = s.add(&cf.mul(phi.get(n, a, &full)).scale(sign));
                        }
                    }
                }
            }
            out.set(n, a, &ids, s);
        }
    }
    Ok(out)
}

/// Graded bracket wedge [omega wedge phi] of a connection 1-form with a
/// k-form, in components sum_s (-1)^s c^c_{ab} omega^a_{i_s} phi^b_{(rest)}.
fn bracket_wedge(ctx: &FrameCtx, omega: &AdForm, phi: &AdForm) -> Result<AdForm> {
    omega.check_algebra(phi)?;
    let n = ctx.nframe;
    let k = phi.degree;
    let alg = &phi.algebra;
    let d = alg.dim;
    let mut out = AdForm::zeros(ctx, alg, k + 1);
    for c in 0..d {
        for ids in index_tuples(n, k + 1) {
            let mut s = ctx.zero();
            for slot in 0..=k {
                let mut rest: Vec<usize> = ids.clone();
                let wi = rest.remove(slot);
                let sign = if slot % 2 == 0 { 1.0 } else { -1.0 };
                for a in 0..d {
                    for b in 0..d {
                        let cc = alg.c(c, a, b);
                        if cc == 0.0 {
                            continue;
                        }
                        let term = omega.get(n, a, &[wi]).mul(phi.get(n, b, &rest));
                        s = s.add(&term.scale(sign * cc));
                    }
                }
            }
            out.set(n, c, &ids, s);
        }
    }
    Ok(out)
}

/// Covariant exterior derivative d_omega phi = d phi + [omega wedge phi].
pub fn cov_ext_deriv(ctx: &FrameCtx, omega: &AdForm, phi: &AdForm) -> Result<AdForm> {
    if omega.degree != 1 {
        return Err(EymError::Shape("connection must be a 1-form".into()));
    }
    let d = exterior_deriv(ctx, phi)?;
    let br = bracket_wedge(ctx, omega, phi)?;
    Ok(d.add(&br))
}

/// Curvature 2-form of a connection on a trivialized bundle,
/// d omega + [omega wedge omega]/2.
pub fn curvature_form(ctx: &FrameCtx, omega: &AdForm) -> Result<AdForm> {
    if omega.degree != 1 {
        return Err(EymError::Shape("curvature needs a 1-form connection".into()));
    }
    let d = exterior_deriv(ctx, omega)?;
    let br = bracket_wedge(ctx, omega, omega)?;
    Ok(d.add(&br.scale(0.5)))
}

/// Codifferential, the formal adjoint of d_omega, realized through the Hodge
/// star as -(-1)^{(n+1)k} star d_omega star.
pub fn codifferential(
    ctx: &FrameCtx,
    pk: &CurvaturePackage,
    omega: &AdForm,
    phi: &AdForm,
) -> Result<AdForm> {
    let n = ctx.nframe;
    let k = phi.degree;
    if k == 0 || k > n {
        return Err(EymError::DegreeOutOfRange(format!(
            "codifferential of a {k}-form in frame dimension {n}"
        )));
    }
    let d = phi.algebra.dim;
    let mut out = AdForm::zeros(ctx, &phi.algebra, k - 1);
    // componentwise in the Lie index: star, d_omega needs the full form,
    // so star first, then d_omega on the starred form, then star again.
    let mut starred = AdForm::zeros(ctx, &phi.algebra, n - k);
    for a in 0..d {
        let t = phi.lie_component(ctx, a);
        let st = hodge_star(ctx, pk, &t, k)?;
        for ids in index_tuples(n, n - k) {
            starred.set(n, a, &ids, st.get(&ids).clone());
        }
    }
    let dst = cov_ext_deriv(ctx, omega, &starred)?;
    // adjointness fixes the sign as (-1)^{n(k+1)+1} star d_omega star; this
    // agrees with -(-1)^{nk} in even frame dimension
    let sign = if (n * (k + 1) + 1) % 2 == 1 { -1.0 } else { 1.0 };
    for a in 0..d {
        let t = dst.lie_component(ctx, a);
        let st = hodge_star(ctx, pk, &t, n - k + 1)?;
        for ids in index_tuples(n, k - 1) {
            out.set(n, a, &ids, st.get(&ids).scale(sign));
        }
    }
    Ok(out)
}

/// Twisted Hodge Laplacian d_omega d*_omega + d*_omega d_omega,
/// degree-preserving and formally self-adjoint.
pub fn twisted_hodge_laplacian(
    ctx: &FrameCtx,
    pk: &CurvaturePackage,
    omega: &AdForm,
    phi: &AdForm,
) -> Result<AdForm> {
    let n = ctx.nframe;
    let k = phi.degree;
    if k > n {
        return Err(EymError::DegreeOutOfRange(format!("{k}-form in dimension {n}")));
    }
    let mut out = AdForm::zeros(ctx, &phi.algebra, k);
    if k < n {
        let d = cov_ext_deriv(ctx, omega, phi)?;
        out = out.add(&codifferential(ctx, pk, omega, &d)?);
    }
    if k > 0 {
        let cod = codifferential(ctx, pk, omega, phi)?;
        out = out.add(&cov_ext_deriv(ctx, omega, &cod)?);
    }
    Ok(out)
}

/// q-weighted pointwise inner product of equal-degree Ad-valued forms,
/// with the 1/k! normalization.
pub fn ad_dot(
    ctx: &FrameCtx,
    pk: &CurvaturePackage,
    phi: &AdForm,
    psi: &AdForm,
) -> Result<ScalarSamples> {
    phi.check_algebra(psi)?;
    if phi.degree != psi.degree {
        return Err(EymError::Shape("degree mismatch in pairing".into()));
    }
    let d = phi.algebra.dim;
    let mut acc = ctx.zero();
    for a in 0..d {
        for b in 0..d {
            let q = phi.algebra.q(a, b);
            if q == 0.0 {
                continue;
            }
            let ta = phi.lie_component(ctx, a);
            let tb = psi.lie_component(ctx, b);
            let dot = crate::tensor::tensor_dot(ctx, pk, &ta, &tb);
            acc = acc.add(&dot.scale(q));
        }
    }
    let mut kfact = 1.0;
    for q in 1..=phi.degree {
        kfact *= q as f64;
    }
    Ok(acc.scale(1.0 / kfact))
}

/// Yang-Mills self-action density and stress-energy tensors.
pub struct StressEnergyPackage {
    /// Q = -1/4 |Omega|_q^2 (curvature Lagrangian density)
    pub q_density: ScalarSamples,
    pub k: Tensor,
    pub k_tilde: Tensor,
    /// kappa = tr_g K = (n-3)/2 Q
    pub kappa: ScalarSamples,
}

pub fn stress_energy(
    ctx: &FrameCtx,
    pk: &CurvaturePackage,
    omega: &AdForm,
) -> Result<StressEnergyPackage> {
    let n = ctx.nframe;
    if omega.degree != 1 {
        return Err(EymError::Shape("stress energy needs a 1-form connection".into()));
    }
    let om = curvature_form(ctx, omega)?;
    stress_energy_of_curvature(ctx, pk, &om)
}

/// Stress-energy from an already computed curvature form.
pub fn stress_energy_of_curvature(
    ctx: &FrameCtx,
    pk: &CurvaturePackage,
    om: &AdForm,
) -> Result<StressEnergyPackage> {
    let n = ctx.nframe;
    let alg = &om.algebra;
    let d = alg.dim;
    // Omega with second index raised: Om^a_{i}{}^{k} = g^{km} Om^a_{im}
    let mut om_up = AdForm::zeros(ctx, alg, 2);
    for a in 0..d {
        for i in 0..n {
            for k in 0..n {
                let mut s = ctx.zero();
                for m in 0..n {
                    s = s.add(&pk.ginv.comps[k * n + m].mul(om.get(n, a, &[i, m])));
                }
                om_up.set(n, a, &[i, k], s);
            }
        }
    }
    // Q = -1/4 q_ab Om^a_{ij} Om^{b,ij}
    let mut q_density = ctx.zero();
    for a in 0..d {
        for b in 0..d {
            let qab = alg.q(a, b);
            if qab == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    let mut up = ctx.zero();
                    for m in 0..n {
                        up = up.add(&pk.ginv.comps[i * n + m].mul(om_up.get(n, b, &[m, j])));
                    }
                    q_density = q_density.add(&om.get(n, a, &[i, j]).mul(&up).scale(-0.25 * qab));
                }
            }
        }
    }
    // K_ij = 1/2 q_ab Om^a_{ik} Om^b_j{}^k + 1/2 Q g_ij
    let mut ktens = Tensor::zeros(ctx, 2);
    for i in 0..n {
        for j in 0..n {
            let mut s = ctx.zero();
            for a in 0..d {
                for b in 0..d {
                    let qab = alg.q(a, b);
                    if qab == 0.0 {
                        continue;
                    }
                    for k in 0..n {
                        s = s.add(
                            &om.get(n, a, &[i, k])
                                .mul(om_up.get(n, b, &[j, k]))
                                .scale(0.5 * qab),
                        );
                    }
                }
            }
            s = s.add(&q_density.mul(&pk.g.comps[i * n + j]).scale(0.5));
            ktens.set(&[i, j], s);
        }
    }
    let kappa = crate::tensor::trace(ctx, pk, &ktens);
    // boundary dimension is nframe - 1, the modified tensor divides by n - 1
    let nb = (n - 1) as f64;
    let k_tilde = ktens.sub(&pk.g.scale_field(&kappa).scale(1.0 / (nb - 1.0)));
    Ok(StressEnergyPackage {
        q_density,
        k: ktens,
        k_tilde,
        kappa,
    })
}

/// Pointwise contraction coupling the Yang-Mills equation to the curvature,
/// C_j = 1/2 q_ab (d*Omega)^{a,k} Omega^b_{jk}. The Bianchi operator applied
/// to the modified stress-energy tensor equals exactly this 1-form for any
/// configuration; it vanishes on solutions of the connection field equation.
pub fn stress_bianchi_coupling(
    ctx: &FrameCtx,
    pk: &CurvaturePackage,
    omega: &AdForm,
) -> Result<Tensor> {
    let n = ctx.nframe;
    let alg = &omega.algebra;
    let d = alg.dim;
    let om = curvature_form(ctx, omega)?;
    let dstar = codifferential(ctx, pk, omega, &om)?;
    let mut out = Tensor::zeros(ctx, 1);
    for j in 0..n {
        let mut s = ctx.zero();
        for a in 0..d {
            for b in 0..d {
                let qab = alg.q(a, b);
                if qab == 0.0 {
                    continue;
                }
                for k in 0..n {
                    for m in 0..n {
                        let term = pk.ginv.comps[k * n + m]
                            .mul(dstar.get(n, a, &[m]))
                            .mul(om.get(n, b, &[j, k]));
                        s = s.add(&term.scale(0.5 * qab));
                    }
                }
            }
        }
        out.set(&[j], s);
    }
    Ok(out)
}
