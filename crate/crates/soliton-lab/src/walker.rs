//! Classification pipeline for 3-dimensional strict Walker metrics
//! `g = 2 dt dy + dx² + φ(x,y) dy²`: specialized soliton residuals, the
//! decision procedure on φ, potential reconstruction by quadrature, and
//! matching against the homogeneous families.
//!
//! The soliton system for this metric form reduces to six scalar relations;
//! for a non-flat φ they force λ = 0 and leave two shapes:
//!
//! - Case I:  `φ = a(y) e^{αx}/α² + x b(y) + c(y)`, `f = αx + γ(y)` with
//!   `2γ″ = φ_xx − α φ_x` (x-independent for true solitons);
//! - Case II: `φ = x² a(y) + x b(y) + c(y)`, `f = γ(y)` with `γ″ = a(y)`.
//!
//! The classifier keys on `r = φ_xxx / φ_xx`: constant nonzero `r` is Case I
//! with `α = r`, vanishing `φ_xxx` is Case II, vanishing `φ_xx` is flat,
//! anything else is not a soliton.

use thiserror::Error;

use crate::expr::{eval_jet, EvalContext, EvalError, Expr};
use crate::jet::Jet;
use crate::quad;

#[derive(Debug, Error)]
pub enum WalkerError {
    #[error("grid is degenerate: needs at least 9 points spanning both x and y")]
    DegenerateGrid,
    #[error("evaluation failed at (x={x}, y={y}): {source}")]
    Eval {
        x: f64,
        y: f64,
        #[source]
        source: EvalError,
    },
    #[error("classification verdict {0:?} has no potential to reconstruct")]
    NoPotential(WalkerVerdict),
    #[error("γ″ depends on x (spread {spread:e}); profile is not of the classified shape")]
    XDependence { spread: f64 },
    #[error("quadrature failed to reach 1e-10 (panel refinement changed γ by {delta:e})")]
    QuadratureAccuracy { delta: f64 },
    #[error("reconstructed potential leaves residual {residual:e} on the grid")]
    ResidualPostcondition { residual: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WalkerVerdict {
    Flat,
    CaseI,
    CaseII,
    NotSoliton,
}

impl WalkerVerdict {
    pub fn name(self) -> &'static str {
        match self {
            WalkerVerdict::Flat => "Flat",
            WalkerVerdict::CaseI => "CaseI",
            WalkerVerdict::CaseII => "CaseII",
            WalkerVerdict::NotSoliton => "NotSoliton",
        }
    }
}

#[derive(Debug, Clone)]
pub struct WalkerClassification {
    pub verdict: WalkerVerdict,
    /// Case I exponent rate (mean of φ_xxx/φ_xx over the grid).
    pub alpha: Option<f64>,
    pub alpha_spread: f64,
    pub max_phi_xx: f64,
    pub max_phi_xxx: f64,
    /// Case I diagnostics: sampled (y, b(y)) and (y, c(y)) of the affine part.
    pub b_samples: Vec<(f64, f64)>,
    pub c_samples: Vec<(f64, f64)>,
    /// Case II diagnostics: sampled (y, a(y)).
    pub a_samples: Vec<(f64, f64)>,
    pub grid: Vec<(f64, f64)>,
}

/// A `nx × ny` tensor grid over the rectangle, the default classification grid.
pub fn tensor_grid(
    x_range: (f64, f64),
    y_range: (f64, f64),
    nx: usize,
    ny: usize,
) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(nx * ny);
    for i in 0..nx {
        let x = x_range.0 + (x_range.1 - x_range.0) * i as f64 / (nx - 1).max(1) as f64;
        for j in 0..ny {
            let y = y_range.0 + (y_range.1 - y_range.0) * j as f64 / (ny - 1).max(1) as f64;
            out.push((x, y));
        }
    }
    out
}

const XY: [&str; 2] = ["x", "y"];

fn phi_jet(phi: &Expr, x: f64, y: f64, order: usize) -> Result<Jet, WalkerError> {
    let coords: Vec<String> = XY.iter().map(|s| s.to_string()).collect();
    let params = std::collections::BTreeMap::new();
    let ctx = EvalContext::new(&coords, &[x, y], order, &params)
        .expect("two coordinates within jet limits");
    eval_jet(phi, &ctx).map_err(|source| WalkerError::Eval { x, y, source })
}

/// The six soliton residuals of the Walker form at `(t, x, y)`:
/// `f_tt`, `f_tx`, `f_xx − λ`, `f_ty − λ`, `2 f_xy − φ_x f_t`,
/// `2λφ + φ_xx − 2 f_yy − φ_x f_x + φ_y f_t`.
pub fn walker_residuals(
    phi: &Expr,
    f: &Expr,
    lambda: f64,
    point: (f64, f64, f64),
) -> Result<[f64; 6], WalkerError> {
    let (t, x, y) = point;
    let coords: Vec<String> = ["t", "x", "y"].iter().map(|s| s.to_string()).collect();
    let params = std::collections::BTreeMap::new();
    let ctx = EvalContext::new(&coords, &[t, x, y], 2, &params)
        .expect("three coordinates within jet limits");
    let fj = eval_jet(f, &ctx).map_err(|source| WalkerError::Eval { x, y, source })?;
    let pj = phi_jet(phi, x, y, 2)?;
    let f_t = fj.d1(0);
    let f_x = fj.d1(1);
    let phi_x = pj.d1(0);
    let phi_y = pj.d1(1);
    let phi_xx = pj.d2(0, 0);
    Ok([
        fj.d2(0, 0),
        fj.d2(0, 1),
        fj.d2(1, 1) - lambda,
        fj.d2(0, 2) - lambda,
        2.0 * fj.d2(1, 2) - phi_x * f_t,
        2.0 * lambda * pj.value() + phi_xx - 2.0 * fj.d2(2, 2) - phi_x * f_x + phi_y * f_t,
    ])
}

struct GridData {
    points: Vec<(f64, f64)>,
    phi: Vec<f64>,
    phi_x: Vec<f64>,
    phi_y: Vec<f64>,
    phi_xx: Vec<f64>,
    phi_xxx: Vec<f64>,
    scale: f64,
    ys: Vec<f64>, // distinct y values in grid order
}

fn grid_data(phi: &Expr, grid: &[(f64, f64)]) -> Result<GridData, WalkerError> {
    let mut xs: Vec<f64> = grid.iter().map(|p| p.0).collect();
    let mut ys_all: Vec<f64> = grid.iter().map(|p| p.1).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    ys_all.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys_all.dedup();
    if grid.len() < 9 || xs.len() < 2 || ys_all.len() < 2 {
        return Err(WalkerError::DegenerateGrid);
    }
    let mut data = GridData {
        points: grid.to_vec(),
        phi: Vec::new(),
        phi_x: Vec::new(),
        phi_y: Vec::new(),
        phi_xx: Vec::new(),
        phi_xxx: Vec::new(),
        scale: 1.0,
        ys: ys_all,
    };
    for &(x, y) in grid {
        let j = phi_jet(phi, x, y, 3)?;
        data.phi.push(j.value());
        data.phi_x.push(j.d1(0));
        data.phi_y.push(j.d1(1));
        data.phi_xx.push(j.d2(0, 0));
        data.phi_xxx.push(j.partial(&[3, 0]).expect("order 3 jet"));
    }
    data.scale = data
        .phi
        .iter()
        .chain(&data.phi_x)
        .chain(&data.phi_xx)
        .chain(&data.phi_xxx)
        .fold(1.0f64, |m, v| m.max(v.abs()));
    Ok(data)
}

/// Decide the shape of φ on a grid. `tol` is the relative tolerance of the
/// flatness, constancy and remainder tests (1e-8 is the intended default).
pub fn classify(
    phi: &Expr,
    grid: &[(f64, f64)],
    tol: f64,
) -> Result<WalkerClassification, WalkerError> {
    let data = grid_data(phi, grid)?;
    let max_phi_xx = data.phi_xx.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_phi_xxx = data.phi_xxx.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut cls = WalkerClassification {
        verdict: WalkerVerdict::NotSoliton,
        alpha: None,
        alpha_spread: 0.0,
        max_phi_xx,
        max_phi_xxx,
        b_samples: Vec::new(),
        c_samples: Vec::new(),
        a_samples: Vec::new(),
        grid: grid.to_vec(),
    };

    if max_phi_xx <= tol * data.scale {
        cls.verdict = WalkerVerdict::Flat;
        return Ok(cls);
    }

    // ratio r = φ_xxx / φ_xx where the denominator is resolvable
    let rs: Vec<f64> = data
        .phi_xx
        .iter()
        .zip(&data.phi_xxx)
        .filter(|(xx, _)| xx.abs() > tol * data.scale)
        .map(|(xx, xxx)| xxx / xx)
        .collect();
    if !rs.is_empty() {
        let mean = rs.iter().sum::<f64>() / rs.len() as f64;
        let spread = rs.iter().fold(0.0f64, |m, r| m.max((r - mean).abs()));
        cls.alpha_spread = spread;
        if spread <= tol * mean.abs().max(1.0) && mean.abs() > tol {
            // Case I candidate: the remainder ψ = φ − φ_xx/α² must be affine
            // in x (checked through second divided differences along y-rows)
            let alpha = mean;
            let psi: Vec<f64> = data
                .phi
                .iter()
                .zip(&data.phi_xx)
                .map(|(p, xx)| p - xx / (alpha * alpha))
                .collect();
            let mut affine_ok = true;
            for &y in &data.ys {
                let mut row: Vec<(f64, f64)> = data
                    .points
                    .iter()
                    .zip(&psi)
                    .filter(|((_, py), _)| *py == y)
                    .map(|((px, _), v)| (*px, *v))
                    .collect();
                row.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                row.dedup_by(|a, b| a.0 == b.0);
                for w in row.windows(3) {
                    let [(x0, v0), (x1, v1), (x2, v2)] = [w[0], w[1], w[2]];
                    let d01 = (v1 - v0) / (x1 - x0);
                    let d12 = (v2 - v1) / (x2 - x1);
                    let dd = (d12 - d01) / (x2 - x0);
                    if dd.abs() > tol * data.scale.max(1.0) {
                        affine_ok = false;
                    }
                }
                if row.len() >= 2 {
                    let b = (row[1].1 - row[0].1) / (row[1].0 - row[0].0);
                    let c = row[0].1 - b * row[0].0;
                    cls.b_samples.push((y, b));
                    cls.c_samples.push((y, c));
                }
            }
            if affine_ok {
                cls.verdict = WalkerVerdict::CaseI;
                cls.alpha = Some(alpha);
                return Ok(cls);
            }
            cls.verdict = WalkerVerdict::NotSoliton;
            return Ok(cls);
        }
    }

    if max_phi_xxx <= tol * data.scale {
        // Case II: φ_xx = 2a(y) must also be x-independent along each row
        let mut consistent = true;
        for &y in &data.ys {
            let row: Vec<f64> = data
                .points
                .iter()
                .zip(&data.phi_xx)
                .filter(|((_, py), _)| *py == y)
                .map(|(_, v)| *v)
                .collect();
            let mean = row.iter().sum::<f64>() / row.len() as f64;
            if row
                .iter()
                .any(|v| (v - mean).abs() > tol * data.scale.max(1.0))
            {
                consistent = false;
            }
            cls.a_samples.push((y, 0.5 * mean));
        }
        if consistent {
            cls.verdict = WalkerVerdict::CaseII;
            return Ok(cls);
        }
    }

    cls.verdict = WalkerVerdict::NotSoliton;
    Ok(cls)
}

/// Potential reconstructed from a classification: `f = αx + γ(y)` with γ
/// obtained by composite Gauss-Legendre integration of γ″ from `y0`
/// (gauge `γ(y0) = γ′(y0) = 0`).
pub struct ReconstructedPotential {
    verdict: WalkerVerdict,
    alpha: f64,
    phi: Expr,
    x_ref: f64,
    y0: f64,
    panels: usize,
}

impl ReconstructedPotential {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn verdict(&self) -> WalkerVerdict {
        self.verdict
    }

    /// γ″(y), evaluated from φ at the reference x.
    pub fn gamma_dd(&self, y: f64) -> Result<f64, WalkerError> {
        gamma_dd_at(&self.phi, self.verdict, self.alpha, self.x_ref, y)
    }

    pub fn gamma(&self, y: f64) -> Result<f64, WalkerError> {
        quad::second_antiderivative(&mut |s| self.gamma_dd(s), self.y0, y, self.panels)
    }

    /// The scalar potential value at `(t, x, y)`.
    pub fn eval(&self, _t: f64, x: f64, y: f64) -> Result<f64, WalkerError> {
        Ok(self.alpha * x + self.gamma(y)?)
    }

    /// The six Walker residuals of the reconstructed potential at a point
    /// (steady case: λ = 0). Only the last residual is nontrivial:
    /// `φ_xx − 2γ″(y) − α φ_x`.
    pub fn residuals_at(&self, point: (f64, f64, f64)) -> Result<[f64; 6], WalkerError> {
        let (_t, x, y) = point;
        let j = phi_jet(&self.phi, x, y, 2)?;
        let res6 = j.d2(0, 0) - 2.0 * self.gamma_dd(y)? - self.alpha * j.d1(0);
        Ok([0.0, 0.0, 0.0, 0.0, 0.0, res6])
    }
}

fn gamma_dd_at(
    phi: &Expr,
    verdict: WalkerVerdict,
    alpha: f64,
    x_ref: f64,
    y: f64,
) -> Result<f64, WalkerError> {
    let j = phi_jet(phi, x_ref, y, 2)?;
    Ok(match verdict {
        WalkerVerdict::CaseI => 0.5 * (j.d2(0, 0) - alpha * j.d1(0)),
        WalkerVerdict::CaseII => 0.5 * j.d2(0, 0),
        _ => unreachable!("guarded by construct_potential"),
    })
}

/// Build the potential evaluator for a Case I/II classification. Asserts the
/// x-independence of γ″ on the classification grid, verifies quadrature
/// accuracy by panel refinement, and checks the reconstruction residual on
/// the grid before returning.
pub fn construct_potential(
    phi: &Expr,
    cls: &WalkerClassification,
    y0: f64,
) -> Result<ReconstructedPotential, WalkerError> {
    let verdict = cls.verdict;
    if !matches!(verdict, WalkerVerdict::CaseI | WalkerVerdict::CaseII) {
        return Err(WalkerError::NoPotential(verdict));
    }
    let alpha = cls.alpha.unwrap_or(0.0);
    let mut xs: Vec<f64> = cls.grid.iter().map(|p| p.0).collect();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    let x_ref = xs[xs.len() / 2];
    let x_alt = xs[0];
    // γ″ must not depend on the x it is read off at
    let mut spread = 0.0f64;
    let mut ys: Vec<f64> = cls.grid.iter().map(|p| p.1).collect();
    ys.sort_by(|a, b| a.partial_cmp(b).unwrap());
    ys.dedup();
    let mut scale = 1.0f64;
    for &y in &ys {
        let a = gamma_dd_at(phi, verdict, alpha, x_ref, y)?;
        let b = gamma_dd_at(phi, verdict, alpha, x_alt, y)?;
        spread = spread.max((a - b).abs());
        scale = scale.max(a.abs());
    }
    if spread > 1e-8 * scale {
        return Err(WalkerError::XDependence { spread });
    }
    let rec = ReconstructedPotential {
        verdict,
        alpha,
        phi: phi.clone(),
        x_ref,
        y0,
        panels: 16,
    };
    // quadrature accuracy: refine panels and compare at the far end
    let y_far = *ys
        .iter()
        .max_by(|a, b| (*a - y0).abs().partial_cmp(&(*b - y0).abs()).unwrap())
        .unwrap();
    let coarse = rec.gamma(y_far)?;
    let fine = quad::second_antiderivative(&mut |s| rec.gamma_dd(s), y0, y_far, 2 * rec.panels)?;
    let delta = (coarse - fine).abs();
    if delta > 1e-10 * coarse.abs().max(1.0) {
        return Err(WalkerError::QuadratureAccuracy { delta });
    }
    // postcondition: the reconstruction satisfies the soliton system
    let mut worst = 0.0f64;
    for &(x, y) in &cls.grid {
        let res = rec.residuals_at((0.0, x, y))?;
        worst = worst.max(res.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    }
    if worst > 1e-8 * scale {
        return Err(WalkerError::ResidualPostcondition { residual: worst });
    }
    Ok(rec)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FamilyMatch {
    NB { b: f64 },
    PC { c: f64 },
    CWPlus,
    CWMinus,
    None,
}

impl FamilyMatch {
    pub fn name(&self) -> &'static str {
        match self {
            FamilyMatch::NB { .. } => "N_b",
            FamilyMatch::PC { .. } => "P_c",
            FamilyMatch::CWPlus => "CWplus",
            FamilyMatch::CWMinus => "CWminus",
            FamilyMatch::None => "none",
        }
    }
}

/// Match φ against the homogeneous templates on a grid:
/// `φ = b⁻²e^{bx}` (recovering b), `φ = ½x²α(y)` with `α′ = cα^{3/2}`
/// (recovering c), or `φ = ±x²`.
pub fn match_homogeneous_family(
    phi: &Expr,
    grid: &[(f64, f64)],
    tol: f64,
) -> Result<FamilyMatch, WalkerError> {
    let data = grid_data(phi, grid)?;
    let scale = data.scale;

    // φ = ±x² exactly
    let cw = |sign: f64| {
        data.points
            .iter()
            .zip(&data.phi)
            .all(|((x, _), v)| (v - sign * x * x).abs() <= tol * scale)
    };
    if cw(1.0) {
        return Ok(FamilyMatch::CWPlus);
    }
    if cw(-1.0) {
        return Ok(FamilyMatch::CWMinus);
    }

    // exponential: φ > 0, y-independent, log-linear in x with the b⁻² scale
    let positive = data.phi.iter().all(|&v| v > 0.0);
    let y_indep = data.phi_y.iter().all(|v| v.abs() <= tol * scale);
    if positive && y_indep {
        let ratios: Vec<f64> = data
            .phi
            .iter()
            .zip(&data.phi_x)
            .map(|(p, px)| px / p)
            .collect();
        let b = ratios.iter().sum::<f64>() / ratios.len() as f64;
        let spread = ratios.iter().fold(0.0f64, |m, r| m.max((r - b).abs()));
        if spread <= tol * b.abs().max(1.0) && b.abs() > tol {
            // correct normalization: b² φ e^{−bx} = 1
            let normalized = data
                .points
                .iter()
                .zip(&data.phi)
                .all(|((x, _), v)| (b * b * v * (-b * x).exp() - 1.0).abs() <= 1e-8);
            if normalized {
                return Ok(FamilyMatch::NB { b });
            }
        }
    }

    // quadratic: φ = ½x²α(y) with α > 0 and α′/α^{3/2} constant
    let mut alphas: Vec<(f64, f64, f64)> = Vec::new(); // (y, α, α′)
    let mut quadratic = true;
    for &y in &data.ys {
        let row: Vec<(f64, f64, f64)> = data
            .points
            .iter()
            .zip(data.phi.iter().zip(&data.phi_y))
            .filter(|((px, py), _)| *py == y && px.abs() > 0.1)
            .map(|((px, _), (v, vy))| (*px, *v, *vy))
            .collect();
        if row.is_empty() {
            continue;
        }
        let a_vals: Vec<f64> = row.iter().map(|(x, v, _)| 2.0 * v / (x * x)).collect();
        let ad_vals: Vec<f64> = row.iter().map(|(x, _, vy)| 2.0 * vy / (x * x)).collect();
        let a_mean = a_vals.iter().sum::<f64>() / a_vals.len() as f64;
        let ad_mean = ad_vals.iter().sum::<f64>() / ad_vals.len() as f64;
        if a_vals
            .iter()
            .any(|v| (v - a_mean).abs() > tol * scale.max(1.0))
        {
            quadratic = false;
            break;
        }
        alphas.push((y, a_mean, ad_mean));
    }
    if quadratic && alphas.len() >= 2 && alphas.iter().all(|&(_, a, _)| a > 0.0) {
        // the pure-quadratic shape must hold on the whole grid
        let interp: std::collections::BTreeMap<u64, f64> = alphas
            .iter()
            .map(|&(y, a, _)| (y.to_bits(), a))
            .collect();
        let pure = data.points.iter().zip(&data.phi).all(|((x, y), v)| {
            interp
                .get(&y.to_bits())
                .map(|a| (v - 0.5 * a * x * x).abs() <= tol * scale.max(1.0))
                .unwrap_or(true)
        });
        if pure {
            let cs: Vec<f64> = alphas
                .iter()
                .map(|&(_, a, ad)| ad / a.powf(1.5))
                .collect();
            let c = cs.iter().sum::<f64>() / cs.len() as f64;
            let spread = cs.iter().fold(0.0f64, |m, v| m.max((v - c).abs()));
            if spread <= tol * c.abs().max(1.0) {
                return Ok(FamilyMatch::PC { c });
            }
        }
    }

    Ok(FamilyMatch::None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;

    fn grid_default() -> Vec<(f64, f64)> {
        tensor_grid((-1.0, 1.0), (-1.0, 1.0), 5, 5)
    }

    const TOL: f64 = 1e-8;

    #[test]
    fn residuals_vanish_on_exponential_soliton() {
        let phi = parse("exp(x)").unwrap();
        let f = parse("x").unwrap();
        for point in [(0.0, 0.0, 0.0), (0.5, -0.3, 0.8), (-1.0, 1.0, -1.0)] {
            let res = walker_residuals(&phi, &f, 0.0, point).unwrap();
            for v in res {
                assert!(v.abs() < 1e-12, "{res:?}");
            }
        }
    }

    #[test]
    fn residuals_vanish_on_quadratic_soliton_with_forced_coefficient() {
        // φ = x², f = ½y²: the coefficient γ″ = a(y) = 1 zeroes residual 6;
        // the halved normalization γ″ = ½ leaves residual 6 equal to 1
        let phi = parse("x^2").unwrap();
        let good = parse("0.5*y^2").unwrap();
        let res = walker_residuals(&phi, &good, 0.0, (0.2, 0.5, -0.7)).unwrap();
        for v in res {
            assert!(v.abs() < 1e-13);
        }
        let halved = parse("0.25*y^2").unwrap();
        let res = walker_residuals(&phi, &halved, 0.0, (0.2, 0.5, -0.7)).unwrap();
        assert!((res[5] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn nonzero_lambda_shows_in_residuals() {
        let phi = parse("exp(x)").unwrap();
        let f = parse("x").unwrap();
        let res = walker_residuals(&phi, &f, 1.0, (0.1, 0.2, 0.3)).unwrap();
        assert!((res[2] + 1.0).abs() < 1e-13); // f_xx − λ = −1
        assert!((res[3] + 1.0).abs() < 1e-13);
    }

    #[test]
    fn classify_exponential() {
        let cls = classify(&parse("exp(x)").unwrap(), &grid_default(), TOL).unwrap();
        assert_eq!(cls.verdict, WalkerVerdict::CaseI);
        assert!((cls.alpha.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn classify_quadratic_with_y_dependence() {
        let phi = parse("x^2*(2/((1 - y)^2))").unwrap();
        let grid = tensor_grid((-1.0, 1.0), (-1.0, 0.5), 5, 5);
        let cls = classify(&phi, &grid, TOL).unwrap();
        assert_eq!(cls.verdict, WalkerVerdict::CaseII);
        // a(y) = 2/(1−y)²
        for &(y, a) in &cls.a_samples {
            assert!((a - 2.0 / ((1.0 - y) * (1.0 - y))).abs() < 1e-10);
        }
    }

    #[test]
    fn classify_quartic_as_not_soliton() {
        let cls = classify(&parse("x^4").unwrap(), &grid_default(), TOL).unwrap();
        assert_eq!(cls.verdict, WalkerVerdict::NotSoliton);
    }

    #[test]
    fn classify_affine_as_flat() {
        let cls = classify(&parse("1 + 3*x + 0.5*x*y").unwrap(), &grid_default(), TOL).unwrap();
        assert_eq!(cls.verdict, WalkerVerdict::Flat);
    }

    #[test]
    fn degenerate_grids_rejected() {
        let line: Vec<(f64, f64)> = (0..10).map(|i| (i as f64 * 0.1, 0.3)).collect();
        assert!(matches!(
            classify(&parse("exp(x)").unwrap(), &line, TOL),
            Err(WalkerError::DegenerateGrid)
        ));
        let few = tensor_grid((-1.0, 1.0), (-1.0, 1.0), 2, 2);
        assert!(matches!(
            classify(&parse("exp(x)").unwrap(), &few, TOL),
            Err(WalkerError::DegenerateGrid)
        ));
    }

    #[test]
    fn reconstruct_exponential_gives_linear_potential() {
        let phi = parse("exp(x)").unwrap();
        let cls = classify(&phi, &grid_default(), TOL).unwrap();
        let rec = construct_potential(&phi, &cls, 0.0).unwrap();
        // γ″ = ½(φ_xx − αφ_x) = 0, so f = x
        for (t, x, y) in [(0.0, 0.3, 0.7), (1.0, -0.8, -0.2)] {
            assert!((rec.eval(t, x, y).unwrap() - x).abs() < 1e-12);
        }
    }

    #[test]
    fn reconstruct_quadratic_with_affine_term() {
        // φ = x² + 4xy is Case II with γ″ = 1: f = ½(y − y0)²
        let phi = parse("x^2 + x*4*y").unwrap();
        let cls = classify(&phi, &grid_default(), TOL).unwrap();
        assert_eq!(cls.verdict, WalkerVerdict::CaseII);
        let rec = construct_potential(&phi, &cls, 0.0).unwrap();
        for y in [-1.0, -0.2, 0.6, 1.0] {
            assert!((rec.gamma(y).unwrap() - 0.5 * y * y).abs() < 1e-11);
        }
        // residuals on a fresh grid
        for (x, y) in tensor_grid((-0.9, 0.9), (-0.9, 0.9), 4, 4) {
            let res = rec.residuals_at((0.1, x, y)).unwrap();
            assert!(res.iter().all(|v| v.abs() < 1e-10));
        }
    }

    #[test]
    fn quadrature_matches_closed_form_for_quadratic_family() {
        // φ = 2x²/(1−y)²: γ″ = 2/(1−y)², closed form γ_cf = −2 log(1−y)
        let phi = parse("2*x^2/((1 - y)^2)").unwrap();
        let grid = tensor_grid((-1.0, 1.0), (-1.0, 0.5), 5, 5);
        let cls = classify(&phi, &grid, TOL).unwrap();
        let y0 = -0.25;
        let rec = construct_potential(&phi, &cls, y0).unwrap();
        let gamma_cf = |y: f64| -2.0 * (1.0 - y).ln();
        let gamma_cf_d = |y: f64| 2.0 / (1.0 - y);
        for y in [-0.9, -0.5, 0.0, 0.4] {
            let expected = gamma_cf(y) - gamma_cf(y0) - gamma_cf_d(y0) * (y - y0);
            let got = rec.gamma(y).unwrap();
            assert!(
                (got - expected).abs() < 1e-10,
                "γ({y}) = {got} vs {expected}"
            );
        }
    }

    #[test]
    fn match_exponential_family() {
        let phi = parse("exp(2*x)/4").unwrap();
        match match_homogeneous_family(&phi, &grid_default(), TOL).unwrap() {
            FamilyMatch::NB { b } => assert!((b - 2.0).abs() < 1e-10),
            other => panic!("got {other:?}"),
        }
    }

    #[test]
    fn match_quadratic_family() {
        let phi = parse("2*x^2/((1 - y)^2)").unwrap();
        let grid = tensor_grid((-1.0, 1.0), (-1.0, 0.5), 5, 5);
        match match_homogeneous_family(&phi, &grid, TOL).unwrap() {
            FamilyMatch::PC { c } => assert!((c - 1.0).abs() < 1e-10),
            other => panic!("got {other:?}"),
        }
    }

    #[test]
    fn match_symmetric_plane_waves() {
        assert_eq!(
            match_homogeneous_family(&parse("x^2").unwrap(), &grid_default(), TOL).unwrap(),
            FamilyMatch::CWPlus
        );
        assert_eq!(
            match_homogeneous_family(&parse("-(x^2)").unwrap(), &grid_default(), TOL).unwrap(),
            FamilyMatch::CWMinus
        );
    }

    #[test]
    fn reject_cubic() {
        assert_eq!(
            match_homogeneous_family(&parse("x^3").unwrap(), &grid_default(), TOL).unwrap(),
            FamilyMatch::None
        );
    }

    #[test]
    fn cross_oracle_against_general_engine() {
        // the six Walker residuals map onto the general soliton matrix:
        // entries (tt, tx, xx, ty) match directly, res5 = 2·m_xy and
        // res6 = −2·m_yy
        use crate::catalog::{instantiate, perturb_walker_phi, sample_points, Family};
        let families = [
            Family::NB { b: 1.0 },
            Family::CWPlus,
            Family::PC { c: 1.0, k: 1.0 },
            Family::WalkerCase1 {
                alpha: 0.8,
                a: [1.0, 0.25, 0.0],
                b: [0.5, -0.3],
                c: [1.0, 0.0, 0.2],
            },
        ];
        for family in families {
            let (problem, _) = instantiate(&family).unwrap();
            let perturbed =
                perturb_walker_phi(&problem, &parse("0.02*x^3 + 0.01*y^2").unwrap()).unwrap();
            for prob in [&problem, &perturbed] {
                let phi = prob.phi.as_ref().unwrap();
                for p in sample_points(prob, 25, 91).unwrap() {
                    let res =
                        walker_residuals(phi, &prob.potential, prob.lambda, (p[0], p[1], p[2]))
                            .unwrap();
                    let m = crate::verify::soliton_residual(prob, &p).unwrap();
                    let d = 3;
                    let pairs = [
                        (res[0], m[0]),
                        (res[1], m[1]),
                        (res[2], m[d + 1]),
                        (res[3], m[2]),
                        (res[4], 2.0 * m[d + 2]),
                        (res[5], -2.0 * m[2 * d + 2]),
                    ];
                    for (a, b) in pairs {
                        assert!(
                            (a - b).abs() <= 1e-10 * (1.0 + a.abs().max(b.abs())),
                            "{a} vs {b} on {}",
                            prob.description
                        );
                    }
                }
            }
        }
    }
}
