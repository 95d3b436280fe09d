//! Indicial families, roots and non-indicial (Fredholm) weight windows for
//! the linearized operator classes: the scalar Laplacian, the Hodge
//! Laplacian on 1-forms, the shifted Lichnerowicz Laplacian and the
//! composite Bianchi-gauge operator 2 B delta*.
//!
//! Closed forms are paired with a numeric extraction that applies the actual
//! operators to sections x^zeta (frozen boundary section) on a boundary
//! collar and fits the degree-2 indicial polynomial per block, with a
//! redundant probe point guarding against non-polynomial contamination.

use crate::charts::collar_hyperbolic_metric;
use crate::error::{EymError, Result};
use crate::field::{CrossSection, FrameCtx};
use crate::forms::{twisted_hodge_laplacian, AdForm};
use crate::lie::LieAlgebra;
use crate::tensor::{bianchi, curvature, delta_star, lichnerowicz_shift, Tensor};
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorKind {
    Scalar,
    Hodge1,
    Lichnerowicz { mu: f64 },
    BianchiComposite,
}

impl OperatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            OperatorKind::Scalar => "scalar",
            OperatorKind::Hodge1 => "hodge1",
            OperatorKind::Lichnerowicz { .. } => "lichnerowicz",
            OperatorKind::BianchiComposite => "bianchi_composite",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RootInfo {
    pub value: f64,
    pub multiplicity: usize,
}

/// One block of the indicial family: the degree-2 polynomial
/// p(z) = c0 + c1 z + c2 z^2 and its roots.
#[derive(Clone, Debug, Serialize)]
pub struct IndicialBlock {
    pub label: String,
    pub poly: [f64; 3],
    pub roots: Vec<RootInfo>,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndicialReport {
    pub kind: String,
    pub n: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    pub blocks: Vec<IndicialBlock>,
    /// Largest root-free open interval around n/2.
    pub interval: (f64, f64),
    pub indicial_radius: f64,
}

fn quadratic_roots(c0: f64, c1: f64, c2: f64) -> Result<(f64, f64)> {
    let disc = c1 * c1 - 4.0 * c2 * c0;
    if disc < 0.0 {
        return Err(EymError::DegenerateGap(format!(
            "complex indicial roots (discriminant {disc:.3e})"
        )));
    }
    let q = -0.5 * (c1 + c1.signum() * disc.sqrt());
    let (r1, r2) = if q == 0.0 {
        (0.0, 0.0)
    } else {
        (q / c2, c0 / q)
    };
    Ok(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

fn block(label: &str, poly: [f64; 3]) -> Result<IndicialBlock> {
    let (r1, r2) = quadratic_roots(poly[0], poly[1], poly[2])?;
    let roots = if (r1 - r2).abs() < 1e-12 {
        vec![RootInfo {
            value: r1,
            multiplicity: 2,
        }]
    } else {
        vec![
            RootInfo {
                value: r1,
                multiplicity: 1,
            },
            RootInfo {
                value: r2,
                multiplicity: 1,
            },
        ]
    };
    Ok(IndicialBlock {
        label: label.into(),
        poly,
        roots,
    })
}

/// Largest root-free open interval containing n/2, from all block roots.
pub fn fredholm_interval(report: &IndicialReport) -> Result<(f64, f64)> {
    let half = report.n as f64 / 2.0;
    let mut lo = f64::NEG_INFINITY;
    let mut hi = f64::INFINITY;
    for b in &report.blocks {
        for r in &b.roots {
            if (r.value - half).abs() < 1e-9 {
                return Err(EymError::NoGap(format!(
                    "root {:.6} on the critical line n/2 = {half}",
                    r.value
                )));
            }
            if r.value < half {
                lo = lo.max(r.value);
            } else {
                hi = hi.min(r.value);
            }
        }
    }
    Ok((lo, hi))
}

/// Closed-form indicial data for the four operator classes.
pub fn indicial_roots_closed_form(kind: OperatorKind, n: usize) -> Result<IndicialReport> {
    if n < 2 {
        return Err(EymError::Config("boundary dimension must be >= 2".into()));
    }
    let nf = n as f64;
    let blocks = match kind {
        OperatorKind::Scalar => vec![block("scalar", [0.0, nf, -1.0])?],
        OperatorKind::Hodge1 => vec![
            block("tangential", [-(nf - 1.0), nf, -1.0])?,
            block("normal", [0.0, nf, -1.0])?,
        ],
        OperatorKind::Lichnerowicz { mu } => {
            let gap = nf * nf + 8.0 * (mu - nf);
            if gap <= 0.0 {
                return Err(EymError::DegenerateGap(format!(
                    "mu = {mu} at or below n - n^2/8 = {}",
                    nf - nf * nf / 8.0
                )));
            }
            vec![
                block("trace", [2.0 * mu, nf, -1.0])?,
                block("[1]", [2.0 * mu, nf, -1.0])?,
                block("[2]", [2.0 * mu - nf + 1.0, nf, -1.0])?,
                block("[3]", [2.0 * (mu - nf), nf, -1.0])?,
            ]
        }
        OperatorKind::BianchiComposite => vec![
            block("tangential", [nf + 1.0, nf, -1.0])?,
            block("normal", [2.0 * nf, nf, -1.0])?,
        ],
    };
    let mut report = IndicialReport {
        kind: kind.name().into(),
        n,
        mu: match kind {
            OperatorKind::Lichnerowicz { mu } => Some(mu),
            _ => None,
        },
        blocks,
        interval: (0.0, 0.0),
        indicial_radius: 0.0,
    };
    let interval = fredholm_interval(&report)?;
    report.interval = interval;
    report.indicial_radius = 0.5 * (interval.1 - interval.0);
    Ok(report)
}

/// Probe configuration for numeric extraction.
#[derive(Clone, Debug)]
pub struct ProbeSetup {
    /// Fit points (first three) plus redundancy points for the residual check.
    pub zetas: Vec<f64>,
    /// Outermost evaluation abscissa; two halvings are added for the
    /// Richardson extrapolation x -> 0.
    pub x_eval: f64,
    pub fit_tol: f64,
    pub cross: CrossSection,
}

impl Default for ProbeSetup {
    fn default() -> Self {
        ProbeSetup {
            zetas: vec![0.0, 1.0, 2.0, 3.0],
            x_eval: 5e-2,
            fit_tol: 1e-8,
            cross: CrossSection::FlatTorus,
        }
    }
}

/// Frozen boundary sections per block, as frame component tables.
fn metric_probe_sections(n: usize, label: &str) -> Vec<(Vec<usize>, f64)> {
    let nf = n + 1;
    match label {
        "trace" => (0..nf).map(|a| (vec![a, a], 1.0)).collect(),
        "[1]" => {
            let mut v = vec![(vec![0usize, 0usize], n as f64)];
            for i in 1..nf {
                v.push((vec![i, i], -1.0));
            }
            v
        }
        "[2]" => vec![(vec![0, 1], 1.0), (vec![1, 0], 1.0)],
        "[3]" => vec![(vec![1, 1], 1.0), (vec![2, 2], -1.0)],
        other => panic!("unknown metric block {other}"),
    }
}

fn apply_operator(
    ctx: &FrameCtx,
    kind: OperatorKind,
    zeta: f64,
    label: &str,
) -> Result<(Vec<f64>, Vec<(Vec<usize>, f64)>)> {
    let g = collar_hyperbolic_metric(ctx);
    let pk = curvature(ctx, &g)?;
    let nf = ctx.nframe;
    let weight = ctx.scalar_from_expr(move |t| t.scale(zeta).exp());
    let inv_weight: Vec<f64> = ctx
        .scalar_from_expr(move |t| t.scale(-zeta).exp())
        .values();
    let project = |out_comps: Vec<(Vec<usize>, f64)>, result: &Tensor| -> (Vec<f64>, Vec<(Vec<usize>, f64)>) {
        let norm: f64 = out_comps.iter().map(|(_, c)| c * c).sum();
        let mut proj = vec![0.0; ctx.npts()];
        for (ids, c) in &out_comps {
            for (p, v) in result.get(ids).values().iter().enumerate() {
                proj[p] += c * v / norm;
            }
        }
        for (p, w) in inv_weight.iter().enumerate() {
            proj[p] *= w;
        }
        (proj, out_comps)
    };
    match kind {
        OperatorKind::Scalar => {
            let alg = LieAlgebra::u1();
            let zero = AdForm::zeros(ctx, &alg, 1);
            let mut u = AdForm::zeros(ctx, &alg, 0);
            u.set(nf, 0, &[], weight);
            let lap = twisted_hodge_laplacian(ctx, &pk, &zero, &u)?;
            let t = lap.lie_component(ctx, 0);
            Ok(project(vec![(vec![], 1.0)], &t))
        }
        OperatorKind::Hodge1 => {
            let alg = LieAlgebra::u1();
            let zero = AdForm::zeros(ctx, &alg, 1);
            let mut u = AdForm::zeros(ctx, &alg, 1);
            let leg = if label == "tangential" { 1 } else { 0 };
            u.set(nf, 0, &[leg], weight);
            let lap = twisted_hodge_laplacian(ctx, &pk, &zero, &u)?;
            let t = lap.lie_component(ctx, 0);
            Ok(project(vec![(vec![leg], 1.0)], &t))
        }
        OperatorKind::Lichnerowicz { mu } => {
            let secs = metric_probe_sections(nf - 1, label);
            let mut h = Tensor::zeros(ctx, 2);
            for (ids, c) in &secs {
                h.set(ids, weight.scale(*c));
            }
            let lich = lichnerowicz_shift(ctx, &pk, &h, mu)?;
            Ok(project(secs, &lich))
        }
        OperatorKind::BianchiComposite => {
            let mut eta = Tensor::zeros(ctx, 1);
            let leg = if label == "tangential" { 1 } else { 0 };
            eta.set(&[leg], weight);
            let ds = delta_star(ctx, &pk, &eta)?;
            let b = bianchi(ctx, &pk, &ds)?.scale(2.0);
            Ok(project(vec![(vec![leg], 1.0)], &b))
        }
    }
}

/// Polynomial extrapolation of (x_i, v_i) samples to x = 0 (Neville).
fn extrapolate_to_zero(xs: &[f64], vs: &[f64]) -> f64 {
    let m = xs.len();
    let mut tab = vs.to_vec();
    for level in 1..m {
        for i in 0..m - level {
            let num = xs[i] * tab[i + 1] - xs[i + level] * tab[i];
            tab[i] = num / (xs[i] - xs[i + level]);
        }
    }
    tab[0]
}

/// Applies the operator to x^zeta probes and fits the indicial polynomial
/// per block; exact for operators with polynomial indicial dependence.
pub fn indicial_family_numeric(
    kind: OperatorKind,
    n: usize,
    setup: &ProbeSetup,
) -> Result<IndicialReport> {
    if setup.zetas.len() < 4 {
        return Err(EymError::Config(
            "probe set needs 3 fit points plus at least one redundancy point".into(),
        ));
    }
    if setup.cross == CrossSection::Berger3 && n != 3 {
        return Err(EymError::Config("Berger cross-section requires n = 3".into()));
    }
    let labels: Vec<&str> = match kind {
        OperatorKind::Scalar => vec!["scalar"],
        OperatorKind::Hodge1 => vec!["tangential", "normal"],
        OperatorKind::Lichnerowicz { .. } => vec!["trace", "[1]", "[2]", "[3]"],
        OperatorKind::BianchiComposite => vec!["tangential", "normal"],
    };
    // evaluation points for Richardson in x
    let xs: Vec<f64> = (0..4).map(|k| setup.x_eval / f64::powi(2.0, k)).collect();
    let tnodes: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ctx = FrameCtx::collar(n, setup.cross, tnodes, None);
    let mut blocks = Vec::new();
    for label in labels {
        let mut values = Vec::new();
        for &z in &setup.zetas {
            let (proj, _) = apply_operator(&ctx, kind, z, label)?;
            values.push(extrapolate_to_zero(&xs, &proj));
        }
        // quadratic through the first three probes
        let (z0, z1, z2) = (setup.zetas[0], setup.zetas[1], setup.zetas[2]);
        let (v0, v1, v2) = (values[0], values[1], values[2]);
        // divided differences
        let d01 = (v1 - v0) / (z1 - z0);
        let d12 = (v2 - v1) / (z2 - z1);
        let c2 = (d12 - d01) / (z2 - z0);
        let c1 = d01 - c2 * (z0 + z1);
        let c0 = v0 - z0 * (c1 + c2 * z0);
        let poly = [c0, c1, c2];
        // redundancy residual
        let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
        for (i, &z) in setup.zetas.iter().enumerate().skip(3) {
            let pred = c0 + z * (c1 + c2 * z);
            let resid = (pred - values[i]).abs();
            if resid > setup.fit_tol * scale {
                return Err(EymError::NotUniformlyDegenerate {
                    residual: resid,
                    tol: setup.fit_tol * scale,
                });
            }
        }
        blocks.push(block(label, poly)?);
    }
    let mut report = IndicialReport {
        kind: kind.name().into(),
        n,
        mu: match kind {
            OperatorKind::Lichnerowicz { mu } => Some(mu),
            _ => None,
        },
        blocks,
        interval: (0.0, 0.0),
        indicial_radius: 0.0,
    };
    let interval = fredholm_interval(&report)?;
    report.interval = interval;
    report.indicial_radius = 0.5 * (interval.1 - interval.0);
    Ok(report)
}

/// Checks that a weight lies in the non-indicial interval of a block family.
pub fn check_weight(report: &IndicialReport, weight: f64) -> Result<()> {
    let (lo, hi) = report.interval;
    if weight <= lo || weight >= hi {
        return Err(EymError::WeightOutOfRange {
            weight,
            lo,
            hi,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn roots_of(report: &IndicialReport, label: &str) -> Vec<f64> {
        report
            .blocks
            .iter()
            .find(|b| b.label == label)
            .unwrap()
            .roots
            .iter()
            .map(|r| r.value)
            .collect()
    }

    #[test]
    fn scalar_closed_form() {
        let r = indicial_roots_closed_form(OperatorKind::Scalar, 3).unwrap();
        assert_eq!(roots_of(&r, "scalar"), vec![0.0, 3.0]);
        assert_eq!(r.interval, (0.0, 3.0));
        assert_eq!(r.indicial_radius, 1.5);
    }

    #[test]
    fn hodge1_closed_form() {
        let r = indicial_roots_closed_form(OperatorKind::Hodge1, 3).unwrap();
        assert_eq!(roots_of(&r, "tangential"), vec![1.0, 2.0]);
        assert_eq!(roots_of(&r, "normal"), vec![0.0, 3.0]);
        assert_eq!(r.interval, (1.0, 2.0));
        // n = 2 puts a root on the critical line
        assert!(matches!(
            indicial_roots_closed_form(OperatorKind::Hodge1, 2),
            Err(EymError::NoGap(_))
        ));
    }

    #[test]
    fn lichnerowicz_closed_form() {
        let r = indicial_roots_closed_form(OperatorKind::Lichnerowicz { mu: 3.0 }, 3).unwrap();
        assert_eq!(roots_of(&r, "[3]"), vec![0.0, 3.0]);
        assert_eq!(r.interval, (0.0, 3.0));
        let s33 = (9.0f64 + 24.0).sqrt();
        let tr = roots_of(&r, "trace");
        assert!((tr[0] - 0.5 * (3.0 - s33)).abs() < 1e-14);
        assert!((tr[1] - 0.5 * (3.0 + s33)).abs() < 1e-14);
        assert_eq!(roots_of(&r, "[2]"), vec![-1.0, 4.0]);
    }

    #[test]
    fn lichnerowicz_gap_closes() {
        let n = 3usize;
        let mu_crit = 3.0 - 9.0 / 8.0;
        assert!(matches!(
            indicial_roots_closed_form(OperatorKind::Lichnerowicz { mu: mu_crit }, n),
            Err(EymError::DegenerateGap(_))
        ));
        let mut prev = f64::INFINITY;
        for eps in [1e-1, 1e-2, 1e-4, 1e-8] {
            let r =
                indicial_roots_closed_form(OperatorKind::Lichnerowicz { mu: mu_crit + eps }, n)
                    .unwrap();
            let gap = r.interval.1 - r.interval.0;
            let expected = (8.0f64 * eps).sqrt();
            assert!((gap - expected).abs() < 1e-9 * (1.0 + expected));
            assert!(gap < prev);
            prev = gap;
        }
    }

    #[test]
    fn composite_closed_form_contains_pe_window() {
        let r = indicial_roots_closed_form(OperatorKind::BianchiComposite, 3).unwrap();
        assert_eq!(roots_of(&r, "tangential"), vec![-1.0, 4.0]);
        let s = (9.0f64 + 24.0).sqrt();
        let nr = roots_of(&r, "normal");
        assert!((nr[0] - 0.5 * (3.0 - s)).abs() < 1e-14);
        assert!((nr[1] - 0.5 * (3.0 + s)).abs() < 1e-14);
        // interval contains (0, n)
        assert!(r.interval.0 < 0.0 && r.interval.1 > 3.0);
    }

    #[test]
    fn root_symmetry_about_half_n() {
        for n in [3usize, 4, 5] {
            for kind in [
                OperatorKind::Scalar,
                OperatorKind::Hodge1,
                OperatorKind::Lichnerowicz { mu: n as f64 + 1.0 },
                OperatorKind::BianchiComposite,
            ] {
                let r = indicial_roots_closed_form(kind, n).unwrap();
                for b in &r.blocks {
                    let sum: f64 = b.roots.iter().map(|q| q.value * q.multiplicity as f64).sum();
                    assert!(
                        (sum - n as f64).abs() < 1e-10,
                        "{}/{}: roots not symmetric",
                        r.kind,
                        b.label
                    );
                }
            }
        }
    }

    #[test]
    fn numeric_extraction_matches_closed_forms() {
        let setup = ProbeSetup::default();
        for n in [3usize, 4] {
            for kind in [
                OperatorKind::Scalar,
                OperatorKind::Hodge1,
                OperatorKind::Lichnerowicz { mu: n as f64 },
                OperatorKind::BianchiComposite,
            ] {
                let num = indicial_family_numeric(kind, n, &setup).unwrap();
                let cf = indicial_roots_closed_form(kind, n).unwrap();
                for (bn, bc) in num.blocks.iter().zip(&cf.blocks) {
                    assert_eq!(bn.label, bc.label);
                    for (rn, rc) in bn.roots.iter().zip(&bc.roots) {
                        assert!(
                            (rn.value - rc.value).abs() < 1e-10,
                            "{}/{} root {} vs {}",
                            num.kind,
                            bn.label,
                            rn.value,
                            rc.value
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn numeric_extraction_on_berger_collar() {
        // cross-check at n = 3 on the spherical cross-section, where the
        // frame coefficients are x-dependent and the extrapolation matters
        let setup = ProbeSetup {
            x_eval: 2e-2,
            cross: CrossSection::Berger3,
            ..ProbeSetup::default()
        };
        for kind in [OperatorKind::Scalar, OperatorKind::Lichnerowicz { mu: 3.0 }] {
            let num = indicial_family_numeric(kind, 3, &setup).unwrap();
            let cf = indicial_roots_closed_form(kind, 3).unwrap();
            for (bn, bc) in num.blocks.iter().zip(&cf.blocks) {
                for (rn, rc) in bn.roots.iter().zip(&bc.roots) {
                    assert!(
                        (rn.value - rc.value).abs() < 1e-7,
                        "{}/{}: {} vs {}",
                        num.kind,
                        bn.label,
                        rn.value,
                        rc.value
                    );
                }
            }
        }
    }

    #[test]
    fn weight_window_checks() {
        let r = indicial_roots_closed_form(OperatorKind::Hodge1, 3).unwrap();
        assert!(check_weight(&r, 1.5).is_ok());
        assert!(matches!(
            check_weight(&r, 2.5),
            Err(EymError::WeightOutOfRange { .. })
        ));
    }

    #[test]
    fn artificial_root_on_critical_line() {
        let mut r = indicial_roots_closed_form(OperatorKind::Scalar, 3).unwrap();
        r.blocks.push(IndicialBlock {
            label: "artificial".into(),
            poly: [0.0, 0.0, 0.0],
            roots: vec![RootInfo {
                value: 1.5,
                multiplicity: 1,
            }],
        });
        assert!(matches!(fredholm_interval(&r), Err(EymError::NoGap(_))));
    }
}
