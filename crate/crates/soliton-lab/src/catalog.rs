//! Constructors for the concrete soliton families the verification suite
//! runs on, each paired with the structural profile it is expected to show
//! (steadiness, causal type of the gradient, Ricci eigenstructure, Walker
//! and symmetry flags).
//!
//! Potentials that arise from a second-order ODE in `y` (the Walker cases)
//! are instantiated in closed form for the polynomial/exponential parameter
//! shapes offered here; the quadrature-based reconstruction in [`crate::walker`]
//! provides the independent cross-check.

use std::collections::BTreeMap;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::expr::{parse, Expr};
use crate::geometry::{connection, GeomError, MetricSpec};
use crate::linalg::CausalType;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown family `{0}`")]
    UnknownFamily(String),
    #[error("family `{family}` needs parameter `{param}`")]
    MissingParam { family: String, param: String },
    #[error("family `{family}`: {reason}")]
    InvalidParam { family: String, reason: String },
    #[error("sampling box failed validation sweep for `{desc}`: {source}")]
    BoxValidation {
        desc: String,
        #[source]
        source: GeomError,
    },
    #[error("sample count must be at least 1")]
    EmptySample,
    #[error(transparent)]
    Geom(#[from] GeomError),
}

/// A vector field the family singles out, with the residuals it is expected
/// to annihilate.
#[derive(Debug, Clone)]
pub struct SpecialField {
    pub name: String,
    pub components: Vec<Expr>,
    pub expect_killing: bool,
    pub expect_parallel: bool,
}

/// Metric, potential and soliton constant, with a sampling box that avoids
/// metric degeneracies and expression domain errors.
#[derive(Debug, Clone)]
pub struct SolitonProblem {
    pub metric: MetricSpec,
    pub potential: Expr,
    pub lambda: f64,
    pub sample_box: Vec<(f64, f64)>,
    pub description: String,
    pub special_fields: Vec<SpecialField>,
    /// The Walker profile function φ when the metric is in the adapted form
    /// `2 dt dy + dx² + φ(x,y) dy²`.
    pub phi: Option<Expr>,
}

/// Expected Ricci-operator eigenstructure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RicStructure {
    /// Ricci operator vanishes.
    Zero,
    /// Diagonalizable with spectrum contained in {0, λ}, both occurring.
    TwoEigen { lambda: f64 },
    /// Nilpotent with the given index and rank.
    Nilpotent { index: usize, rank: usize },
}

#[derive(Debug, Clone)]
pub struct ExpectedProfile {
    pub steady: bool,
    pub grad_causal: Option<CausalType>,
    pub ric_structure: Option<RicStructure>,
    pub grad_norm_sq: Option<f64>,
    pub hess_norm_sq: Option<f64>,
    pub strict_walker: bool,
    pub locally_symmetric: bool,
    /// `Some(true)`: the Schouten-Codazzi residual must vanish;
    /// `Some(false)`: it must be visibly nonzero; `None`: informational.
    pub codazzi_zero: Option<bool>,
}

impl ExpectedProfile {
    fn unconstrained(steady: bool) -> ExpectedProfile {
        ExpectedProfile {
            steady,
            grad_causal: None,
            ric_structure: None,
            grad_norm_sq: None,
            hess_norm_sq: None,
            strict_walker: false,
            locally_symmetric: false,
            codazzi_zero: None,
        }
    }
}

/// The families the lab can instantiate.
#[derive(Debug, Clone)]
pub enum Family {
    /// Flat metric `diag(±1, 1, …)` with the quadratic potential
    /// `f = (λ/2) Σ ε_i x_i²`; `nu` = 1 for Lorentzian signature.
    MinkowskiRigid { dim: usize, nu: usize, lambda: f64 },
    /// `−dt² + dx² + dy²` with `f = a·t`, steady with timelike gradient.
    TimelikeLinear { a: f64 },
    /// Round-sphere block of Einstein constant λ times a Euclidean line,
    /// `f = (λ/2) x²` on the line.
    SphereRigid { lambda: f64 },
    /// Plane wave `2 dt dy + (Σ κ_i x_i²) dy² + Σ dx_i²` with
    /// `f = a0 + a1 y + (Σκ_i/2) y²`.
    CahenWallach { kappas: Vec<f64>, a0: f64, a1: f64 },
    /// Raw Walker problem `2 dt dy + dx² + φ dy²` with an explicit potential.
    Walker3 {
        phi: Expr,
        potential: Expr,
        lambda: f64,
    },
    /// Walker soliton with exponential profile
    /// `φ = a(y) e^{αx}/α² + x b(y) + c(y)`, `f = αx + γ(y)`,
    /// `γ″ = −½ α b(y)`; polynomial coefficient shapes
    /// `a = a0 + a1 y + a2 y²`, `b = b0 + b1 y`, `c = c0 + c1 y + c2 y²`.
    WalkerCase1 {
        alpha: f64,
        a: [f64; 3],
        b: [f64; 2],
        c: [f64; 3],
    },
    /// Walker soliton with quadratic profile `φ = x² a(y) + x b(y) + c0`,
    /// `f = γ(y)` with `γ″ = a(y)`, gauge `γ(0) = 0`, `γ′(0) = 1`.
    WalkerCase2 { a: [f64; 3], b: [f64; 2], c0: f64 },
    /// Homogeneous family `φ = b⁻² e^{bx}`, `f = b x` (spacelike gradient).
    NB { b: f64 },
    /// Homogeneous family `φ = ½ x² α(y)` with `α(y) = 4/(k − c y)²`
    /// solving `α′ = c α^{3/2}`; `f = −(2/c²) log(k − c y)` (null gradient).
    PC { c: f64, k: f64 },
    /// `φ = x²`: the symmetric plane wave in Walker coordinates.
    CWPlus,
    /// `φ = −x²`.
    CWMinus,
}

fn lit(v: f64) -> String {
    format!("({v:?})")
}

fn pexpr(text: &str) -> Expr {
    parse(text).unwrap_or_else(|e| panic!("internal expression `{text}`: {e}"))
}

fn walker_metric(phi: &Expr) -> MetricSpec {
    MetricSpec::new(
        vec!["t".into(), "x".into(), "y".into()],
        vec![
            (0, 2, pexpr("1")),
            (1, 1, pexpr("1")),
            (2, 2, phi.clone()),
        ],
        BTreeMap::new(),
    )
    .expect("walker metric is well formed")
}

fn dt_field(dim: usize) -> SpecialField {
    let mut components = vec![pexpr("0"); dim];
    components[0] = pexpr("1");
    SpecialField {
        name: "null_direction".into(),
        components,
        expect_killing: true,
        expect_parallel: true,
    }
}

/// Polynomial `c0 + c1 y + c2 y²` as an expression string.
fn poly_y(coeffs: &[f64]) -> String {
    let mut terms = Vec::new();
    for (k, &c) in coeffs.iter().enumerate() {
        if c == 0.0 {
            continue;
        }
        match k {
            0 => terms.push(lit(c)),
            1 => terms.push(format!("{}*y", lit(c))),
            _ => terms.push(format!("{}*y^{k}", lit(c))),
        }
    }
    if terms.is_empty() {
        "0".into()
    } else {
        terms.join(" + ")
    }
}

pub fn instantiate(family: &Family) -> Result<(SolitonProblem, ExpectedProfile), CatalogError> {
    let (problem, profile) = build(family)?;
    validate_box(&problem)?;
    Ok((problem, profile))
}

fn build(family: &Family) -> Result<(SolitonProblem, ExpectedProfile), CatalogError> {
    let invalid = |family: &str, reason: String| CatalogError::InvalidParam {
        family: family.into(),
        reason,
    };
    match family {
        Family::MinkowskiRigid { dim, nu, lambda } => {
            let (d, nu, lambda) = (*dim, *nu, *lambda);
            if !(2..=8).contains(&d) {
                return Err(invalid("minkowski_rigid", format!("dim {d} not in 2..=8")));
            }
            if nu > 1 {
                return Err(invalid("minkowski_rigid", "nu must be 0 or 1".into()));
            }
            let all_names = ["t", "x", "y", "z", "u", "v", "w", "q"];
            let coords: Vec<String> = if nu == 1 {
                all_names[..d].iter().map(|s| s.to_string()).collect()
            } else {
                all_names[1..=d].iter().map(|s| s.to_string()).collect()
            };
            let sign = |i: usize| if nu == 1 && i == 0 { -1.0 } else { 1.0 };
            let diag: Vec<Expr> = (0..d).map(|i| pexpr(&lit(sign(i)))).collect();
            let metric = MetricSpec::diagonal(coords.clone(), diag, BTreeMap::new())?;
            let f_terms: Vec<String> = (0..d)
                .map(|i| format!("{}*{}^2", lit(0.5 * lambda * sign(i)), coords[i]))
                .collect();
            let potential = pexpr(&f_terms.join(" + "));
            let mut special_fields = Vec::new();
            if d >= 3 {
                // rotation in the last two (always spacelike) coordinates
                let mut comps = vec![pexpr("0"); d];
                comps[d - 2] = pexpr(&format!("-{}", coords[d - 1]));
                comps[d - 1] = pexpr(&coords[d - 2].clone());
                special_fields.push(SpecialField {
                    name: "rotation".into(),
                    components: comps,
                    expect_killing: true,
                    expect_parallel: false,
                });
            }
            let problem = SolitonProblem {
                metric,
                potential,
                lambda,
                sample_box: vec![(-1.0, 1.0); d],
                description: format!("minkowski_rigid(dim={d}, nu={nu}, lambda={lambda:?})"),
                special_fields,
                phi: None,
            };
            let profile = ExpectedProfile {
                steady: lambda == 0.0,
                grad_causal: if lambda == 0.0 {
                    Some(CausalType::Zero)
                } else {
                    None
                },
                ric_structure: Some(RicStructure::Zero),
                grad_norm_sq: if lambda == 0.0 { Some(0.0) } else { None },
                hess_norm_sq: Some(d as f64 * lambda * lambda),
                strict_walker: false,
                locally_symmetric: true,
                codazzi_zero: Some(true),
            };
            Ok((problem, profile))
        }
        Family::TimelikeLinear { a } => {
            let a = *a;
            if a == 0.0 {
                return Err(invalid("timelike_linear", "a must be nonzero".into()));
            }
            let coords = vec!["t".to_string(), "x".to_string(), "y".to_string()];
            let metric = MetricSpec::diagonal(
                coords,
                vec![pexpr("-1"), pexpr("1"), pexpr("1")],
                BTreeMap::new(),
            )?;
            let problem = SolitonProblem {
                metric,
                potential: pexpr(&format!("{}*t", lit(a))),
                lambda: 0.0,
                sample_box: vec![(-1.0, 1.0); 3],
                description: format!("timelike_linear(a={a:?})"),
                special_fields: vec![SpecialField {
                    name: "grad_f".into(),
                    components: vec![pexpr(&lit(-a)), pexpr("0"), pexpr("0")],
                    expect_killing: true,
                    expect_parallel: true,
                }],
                phi: None,
            };
            let profile = ExpectedProfile {
                steady: true,
                grad_causal: Some(CausalType::Timelike),
                ric_structure: Some(RicStructure::Zero),
                grad_norm_sq: Some(-a * a),
                hess_norm_sq: Some(0.0),
                strict_walker: false,
                locally_symmetric: true,
                codazzi_zero: Some(true),
            };
            Ok((problem, profile))
        }
        Family::SphereRigid { lambda } => {
            let lambda = *lambda;
            if lambda <= 0.0 {
                return Err(invalid("sphere_rigid", "lambda must be positive".into()));
            }
            let coords = vec!["th".to_string(), "ph".to_string(), "x".to_string()];
            let params: BTreeMap<String, f64> = [("lam".to_string(), lambda)].into();
            let metric = MetricSpec::diagonal(
                coords,
                vec![pexpr("1/lam"), pexpr("sin(th)^2/lam"), pexpr("1")],
                params,
            )?;
            let problem = SolitonProblem {
                metric,
                potential: pexpr(&format!("{}*x^2", lit(0.5 * lambda))),
                lambda,
                // keep sin θ away from 0 and x away from the f critical point
                sample_box: vec![(0.3, std::f64::consts::PI - 0.3), (0.1, 1.4), (0.25, 1.25)],
                description: format!("sphere_rigid(lambda={lambda:?})"),
                special_fields: vec![SpecialField {
                    name: "azimuthal".into(),
                    components: vec![pexpr("0"), pexpr("1"), pexpr("0")],
                    expect_killing: true,
                    expect_parallel: false,
                }],
                phi: None,
            };
            let profile = ExpectedProfile {
                steady: false,
                grad_causal: Some(CausalType::Spacelike),
                ric_structure: Some(RicStructure::TwoEigen { lambda }),
                grad_norm_sq: None,
                hess_norm_sq: Some(lambda * lambda),
                strict_walker: false,
                locally_symmetric: true,
                codazzi_zero: Some(true),
            };
            Ok((problem, profile))
        }
        Family::CahenWallach { kappas, a0, a1 } => {
            let n = kappas.len();
            if !(1..=6).contains(&n) {
                return Err(invalid("cahen_wallach", format!("need 1..=6 kappas, got {n}")));
            }
            if kappas.iter().any(|&k| k == 0.0) {
                return Err(invalid("cahen_wallach", "every kappa must be nonzero".into()));
            }
            let ksum: f64 = kappas.iter().sum();
            let d = n + 2;
            let mut coords = vec!["t".to_string(), "y".to_string()];
            for i in 1..=n {
                coords.push(format!("x{i}"));
            }
            let mut params = BTreeMap::new();
            for (i, &k) in kappas.iter().enumerate() {
                params.insert(format!("kappa{}", i + 1), k);
            }
            let gyy = (1..=n)
                .map(|i| format!("kappa{i}*x{i}^2"))
                .collect::<Vec<_>>()
                .join(" + ");
            let mut entries = vec![(0, 1, pexpr("1")), (1, 1, pexpr(&gyy))];
            for i in 0..n {
                entries.push((2 + i, 2 + i, pexpr("1")));
            }
            let metric = MetricSpec::new(coords, entries, params)?;
            let potential = pexpr(&format!(
                "{} + {}*y + {}*y^2",
                lit(*a0),
                lit(*a1),
                lit(0.5 * ksum)
            ));
            let mut box_ = vec![(-1.0, 1.0), (0.2, 1.8)];
            box_.extend(std::iter::repeat_n((-1.0, 1.0), n));
            let problem = SolitonProblem {
                metric,
                potential,
                lambda: 0.0,
                sample_box: box_,
                description: format!("cahen_wallach(kappas={kappas:?}, a0={a0:?}, a1={a1:?})"),
                special_fields: vec![dt_field(d)],
                phi: None,
            };
            let profile = ExpectedProfile {
                steady: true,
                grad_causal: Some(CausalType::Null),
                ric_structure: Some(if ksum != 0.0 {
                    RicStructure::Nilpotent { index: 2, rank: 1 }
                } else {
                    RicStructure::Zero
                }),
                grad_norm_sq: Some(0.0),
                hess_norm_sq: Some(0.0),
                strict_walker: true,
                locally_symmetric: true,
                codazzi_zero: Some(true),
            };
            Ok((problem, profile))
        }
        Family::Walker3 {
            phi,
            potential,
            lambda,
        } => {
            let metric = walker_metric(phi);
            let problem = SolitonProblem {
                metric,
                potential: potential.clone(),
                lambda: *lambda,
                sample_box: vec![(-1.0, 1.0); 3],
                description: format!("walker3(phi={phi}, f={potential}, lambda={lambda:?})"),
                special_fields: vec![dt_field(3)],
                phi: Some(phi.clone()),
            };
            let mut profile = ExpectedProfile::unconstrained(*lambda == 0.0);
            profile.strict_walker = true;
            Ok((problem, profile))
        }
        Family::WalkerCase1 { alpha, a, b, c } => {
            let alpha = *alpha;
            if alpha == 0.0 {
                return Err(invalid("walker_case1", "alpha must be nonzero".into()));
            }
            // φ = a(y) e^{αx}/α² + x b(y) + c(y)
            let mut phi_s = format!(
                "({})*exp({}*x)/{}",
                poly_y(a),
                lit(alpha),
                lit(alpha * alpha)
            );
            if b.iter().any(|&v| v != 0.0) {
                phi_s.push_str(&format!(" + x*({})", poly_y(b)));
            }
            if c.iter().any(|&v| v != 0.0) {
                phi_s.push_str(&format!(" + {}", poly_y(c)));
            }
            let phi = pexpr(&phi_s);
            // γ″ = −½ α (b0 + b1 y) integrated twice from 0
            let g2 = -0.5 * alpha * b[0] / 2.0;
            let g3 = -0.5 * alpha * b[1] / 6.0;
            let potential = pexpr(&format!(
                "{}*x + {}*y^2 + {}*y^3",
                lit(alpha),
                lit(g2),
                lit(g3)
            ));
            let problem = SolitonProblem {
                metric: walker_metric(&phi),
                potential,
                lambda: 0.0,
                sample_box: vec![(-1.0, 1.0); 3],
                description: format!(
                    "walker_case1(alpha={alpha:?}, a={a:?}, b={b:?}, c={c:?})"
                ),
                special_fields: vec![dt_field(3)],
                phi: Some(phi),
            };
            let profile = ExpectedProfile {
                steady: true,
                grad_causal: Some(CausalType::Spacelike),
                ric_structure: Some(RicStructure::Nilpotent { index: 2, rank: 1 }),
                grad_norm_sq: Some(alpha * alpha),
                hess_norm_sq: Some(0.0),
                strict_walker: true,
                locally_symmetric: false,
                codazzi_zero: Some(false),
            };
            Ok((problem, profile))
        }
        Family::WalkerCase2 { a, b, c0 } => {
            let mut phi_s = format!("x^2*({})", poly_y(a));
            if b.iter().any(|&v| v != 0.0) {
                phi_s.push_str(&format!(" + x*({})", poly_y(b)));
            }
            if *c0 != 0.0 {
                phi_s.push_str(&format!(" + {}", lit(*c0)));
            }
            let phi = pexpr(&phi_s);
            // γ″ = a(y), gauge γ(0) = 0, γ′(0) = 1; box keeps γ′ > 0
            let potential = pexpr(&format!(
                "y + {}*y^2 + {}*y^3 + {}*y^4",
                lit(a[0] / 2.0),
                lit(a[1] / 6.0),
                lit(a[2] / 12.0)
            ));
            let problem = SolitonProblem {
                metric: walker_metric(&phi),
                potential,
                lambda: 0.0,
                sample_box: vec![(-1.0, 1.0), (-1.0, 1.0), (0.0, 1.0)],
                description: format!("walker_case2(a={a:?}, b={b:?}, c0={c0:?})"),
                special_fields: vec![dt_field(3)],
                phi: Some(phi),
            };
            let profile = ExpectedProfile {
                steady: true,
                grad_causal: Some(CausalType::Null),
                ric_structure: Some(RicStructure::Nilpotent { index: 2, rank: 1 }),
                grad_norm_sq: Some(0.0),
                hess_norm_sq: Some(0.0),
                strict_walker: true,
                locally_symmetric: a[1] == 0.0 && a[2] == 0.0 && b == &[0.0, 0.0],
                codazzi_zero: Some(true),
            };
            Ok((problem, profile))
        }
        Family::NB { b } => {
            let b = *b;
            if b == 0.0 {
                return Err(invalid("N_b", "b must be nonzero".into()));
            }
            let phi = pexpr(&format!("exp({}*x)/{}", lit(b), lit(b * b)));
            let problem = SolitonProblem {
                metric: walker_metric(&phi),
                potential: pexpr(&format!("{}*x", lit(b))),
                lambda: 0.0,
                sample_box: vec![(-1.0, 1.0); 3],
                description: format!("N_b(b={b:?})"),
                special_fields: vec![dt_field(3)],
                phi: Some(phi),
            };
            let profile = ExpectedProfile {
                steady: true,
                grad_causal: Some(CausalType::Spacelike),
                ric_structure: Some(RicStructure::Nilpotent { index: 2, rank: 1 }),
                grad_norm_sq: Some(b * b),
                hess_norm_sq: Some(0.0),
                strict_walker: true,
                locally_symmetric: false,
                codazzi_zero: Some(false),
            };
            Ok((problem, profile))
        }
        Family::PC { c, k } => {
            let (c, k) = (*c, *k);
            if c == 0.0 {
                return Err(invalid("P_c", "c must be nonzero".into()));
            }
            // α(y) = 4/(k − c y)² > 0 solves α′ = c α^{3/2}; φ = ½ x² α
            let phi = pexpr(&format!("2*x^2/(({} - {}*y)^2)", lit(k), lit(c)));
            // γ″ = ½ α gives γ = −(2/c²) log(k − c y)
            let potential = pexpr(&format!(
                "{}*log({} - {}*y)",
                lit(-2.0 / (c * c)),
                lit(k),
                lit(c)
            ));
            // keep k − c y within [|c|/2, 3|c|/2]
            let ylim = k / c;
            let ybox = if c > 0.0 {
                (ylim - 1.5, ylim - 0.5)
            } else {
                (ylim + 0.5, ylim + 1.5)
            };
            let problem = SolitonProblem {
                metric: walker_metric(&phi),
                potential,
                lambda: 0.0,
                sample_box: vec![(-1.0, 1.0), (-1.0, 1.0), ybox],
                description: format!("P_c(c={c:?}, k={k:?})"),
                special_fields: vec![dt_field(3)],
                phi: Some(phi),
            };
            let profile = ExpectedProfile {
                steady: true,
                grad_causal: Some(CausalType::Null),
                ric_structure: Some(RicStructure::Nilpotent { index: 2, rank: 1 }),
                grad_norm_sq: Some(0.0),
                hess_norm_sq: Some(0.0),
                strict_walker: true,
                locally_symmetric: false,
                codazzi_zero: Some(true),
            };
            Ok((problem, profile))
        }
        Family::CWPlus | Family::CWMinus => {
            let plus = matches!(family, Family::CWPlus);
            let phi = pexpr(if plus { "x^2" } else { "-(x^2)" });
            let potential = pexpr(if plus { "0.5*y^2" } else { "-0.5*y^2" });
            let problem = SolitonProblem {
                metric: walker_metric(&phi),
                potential,
                lambda: 0.0,
                sample_box: vec![(-1.0, 1.0), (-1.0, 1.0), (0.2, 1.8)],
                description: if plus { "CWplus" } else { "CWminus" }.to_string(),
                special_fields: vec![dt_field(3)],
                phi: Some(phi),
            };
            let profile = ExpectedProfile {
                steady: true,
                grad_causal: Some(CausalType::Null),
                ric_structure: Some(RicStructure::Nilpotent { index: 2, rank: 1 }),
                grad_norm_sq: Some(0.0),
                hess_norm_sq: Some(0.0),
                strict_walker: true,
                locally_symmetric: true,
                codazzi_zero: Some(true),
            };
            Ok((problem, profile))
        }
    }
}

/// Evaluation sweep over a fixed set of interior points: the metric must be
/// nondegenerate and every expression must evaluate.
fn validate_box(problem: &SolitonProblem) -> Result<(), CatalogError> {
    let points = raw_sample(problem, 32, 0xB0C5_EED5);
    let coords = problem.metric.coords();
    for p in &points {
        let result: Result<(), GeomError> = (|| {
            connection(&problem.metric, p)?;
            crate::expr::eval_f64(&problem.potential, coords, p, problem.metric.params()).map_err(
                |source| GeomError::Eval {
                    point: p.clone(),
                    source,
                },
            )?;
            for field in &problem.special_fields {
                for comp in &field.components {
                    crate::expr::eval_f64(comp, coords, p, problem.metric.params()).map_err(
                        |source| GeomError::Eval {
                            point: p.clone(),
                            source,
                        },
                    )?;
                }
            }
            Ok(())
        })();
        result.map_err(|source| CatalogError::BoxValidation {
            desc: problem.description.clone(),
            source,
        })?;
    }
    Ok(())
}

fn raw_sample(problem: &SolitonProblem, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            problem
                .sample_box
                .iter()
                .map(|&(lo, hi)| {
                    let u: f64 = rng.random();
                    lo + u * (hi - lo)
                })
                .collect()
        })
        .collect()
}

/// Deterministic pseudorandom points in the problem's box: a ChaCha8 stream
/// seeded with `seed`; coordinates are drawn in declaration order as
/// `lo + u·(hi−lo)` with `u` uniform in [0,1), points consecutively.
pub fn sample_points(
    problem: &SolitonProblem,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, CatalogError> {
    if count == 0 {
        return Err(CatalogError::EmptySample);
    }
    Ok(raw_sample(problem, count, seed))
}

fn need(
    params: &BTreeMap<String, f64>,
    family: &str,
    key: &str,
) -> Result<f64, CatalogError> {
    params.get(key).copied().ok_or(CatalogError::MissingParam {
        family: family.into(),
        param: key.into(),
    })
}

fn opt(params: &BTreeMap<String, f64>, key: &str, default: f64) -> f64 {
    params.get(key).copied().unwrap_or(default)
}

/// Family lookup by identifier with a flat real-valued parameter map — the
/// config-file and CLI entry point.
pub fn instantiate_by_name(
    name: &str,
    params: &BTreeMap<String, f64>,
) -> Result<(SolitonProblem, ExpectedProfile), CatalogError> {
    let family = match name {
        "minkowski_rigid" => Family::MinkowskiRigid {
            dim: opt(params, "dim", 3.0) as usize,
            nu: opt(params, "nu", 1.0) as usize,
            lambda: need(params, name, "lambda")?,
        },
        "timelike_linear" => Family::TimelikeLinear {
            a: need(params, name, "a")?,
        },
        "sphere_rigid" => Family::SphereRigid {
            lambda: need(params, name, "lambda")?,
        },
        "cahen_wallach" => {
            let mut kappas = Vec::new();
            for i in 1..=6 {
                if let Some(&k) = params.get(&format!("kappa{i}")) {
                    kappas.push(k);
                } else {
                    break;
                }
            }
            if kappas.is_empty() {
                return Err(CatalogError::MissingParam {
                    family: name.into(),
                    param: "kappa1".into(),
                });
            }
            Family::CahenWallach {
                kappas,
                a0: opt(params, "a0", 0.0),
                a1: opt(params, "a1", 0.0),
            }
        }
        "walker_case1" => Family::WalkerCase1 {
            alpha: need(params, name, "alpha")?,
            a: [opt(params, "a0", 1.0), opt(params, "a1", 0.0), opt(params, "a2", 0.0)],
            b: [opt(params, "b0", 0.0), opt(params, "b1", 0.0)],
            c: [opt(params, "c0", 0.0), opt(params, "c1", 0.0), opt(params, "c2", 0.0)],
        },
        "walker_case2" => Family::WalkerCase2 {
            a: [opt(params, "a0", 1.0), opt(params, "a1", 0.0), opt(params, "a2", 0.0)],
            b: [opt(params, "b0", 0.0), opt(params, "b1", 0.0)],
            c0: opt(params, "c0", 0.0),
        },
        "N_b" => Family::NB {
            b: need(params, name, "b")?,
        },
        "P_c" => Family::PC {
            c: need(params, name, "c")?,
            k: opt(params, "k", 1.0),
        },
        "CWplus" | "CW+" => Family::CWPlus,
        "CWminus" | "CW-" => Family::CWMinus,
        other => return Err(CatalogError::UnknownFamily(other.into())),
    };
    instantiate(&family)
}

pub struct FamilyInfo {
    pub name: &'static str,
    pub params: &'static str,
    pub summary: &'static str,
}

/// The identifiers `instantiate_by_name` understands, for `catalog-list`.
pub fn family_catalog() -> Vec<FamilyInfo> {
    vec![
        FamilyInfo {
            name: "minkowski_rigid",
            params: "dim (default 3), nu (0|1, default 1), lambda",
            summary: "flat diag(±1,1,..) with quadratic potential (λ/2)Σε_i x_i²",
        },
        FamilyInfo {
            name: "timelike_linear",
            params: "a",
            summary: "-dt²+dx²+dy² with f = a·t; steady, timelike gradient",
        },
        FamilyInfo {
            name: "sphere_rigid",
            params: "lambda (> 0)",
            summary: "round sphere (Einstein constant λ) × line, f = (λ/2)x²",
        },
        FamilyInfo {
            name: "cahen_wallach",
            params: "kappa1..kappa6 (nonzero), a0, a1 (default 0)",
            summary: "plane wave 2dtdy + (Σκ_i x_i²)dy² + Σdx_i², f quadratic in y",
        },
        FamilyInfo {
            name: "walker_case1",
            params: "alpha (nonzero), a0..a2 (default 1,0,0), b0..b1, c0..c2",
            summary: "Walker φ = a(y)e^(αx)/α² + x·b(y) + c(y), spacelike gradient",
        },
        FamilyInfo {
            name: "walker_case2",
            params: "a0..a2 (default 1,0,0), b0..b1, c0",
            summary: "Walker φ = x²a(y) + x·b(y) + c, null gradient",
        },
        FamilyInfo {
            name: "N_b",
            params: "b (nonzero)",
            summary: "homogeneous φ = b⁻²e^(bx), f = bx, ‖∇f‖² = b²",
        },
        FamilyInfo {
            name: "P_c",
            params: "c (nonzero), k (default 1)",
            summary: "homogeneous φ = ½x²α(y), α = 4/(k−cy)², null gradient",
        },
        FamilyInfo {
            name: "CWplus",
            params: "(none)",
            summary: "symmetric plane wave φ = x² in Walker coordinates",
        },
        FamilyInfo {
            name: "CWminus",
            params: "(none)",
            summary: "symmetric plane wave φ = −x²",
        },
    ]
}

/// The concrete instances the acceptance suite runs: at least one per family.
pub fn standard_entries() -> Vec<Family> {
    vec![
        Family::MinkowskiRigid {
            dim: 3,
            nu: 1,
            lambda: 0.7,
        },
        Family::MinkowskiRigid {
            dim: 4,
            nu: 0,
            lambda: -0.5,
        },
        Family::TimelikeLinear { a: 1.3 },
        Family::SphereRigid { lambda: 0.8 },
        Family::CahenWallach {
            kappas: vec![1.0],
            a0: 0.0,
            a1: 0.0,
        },
        Family::CahenWallach {
            kappas: vec![1.5, -0.5],
            a0: 0.3,
            a1: 0.2,
        },
        Family::Walker3 {
            phi: pexpr("exp(x)"),
            potential: pexpr("x"),
            lambda: 0.0,
        },
        Family::WalkerCase1 {
            alpha: 0.8,
            a: [1.0, 0.25, 0.0],
            b: [0.5, -0.3],
            c: [1.0, 0.0, 0.2],
        },
        Family::WalkerCase2 {
            a: [0.9, 0.2, 0.1],
            b: [0.0, 0.4],
            c0: 1.0,
        },
        Family::NB { b: 1.0 },
        Family::NB { b: -0.7 },
        Family::PC { c: 1.0, k: 1.0 },
        Family::CWPlus,
        Family::CWMinus,
    ]
}

/// Rebuild a Walker problem with φ replaced by φ + delta (same potential).
pub fn perturb_walker_phi(
    problem: &SolitonProblem,
    delta: &Expr,
) -> Option<SolitonProblem> {
    let phi = problem.phi.clone()?;
    let new_phi = phi + delta.clone();
    let mut out = problem.clone();
    out.metric = walker_metric(&new_phi);
    out.description = format!("{} [phi perturbed]", problem.description);
    out.phi = Some(new_phi);
    Some(out)
}

/// Rebuild with the potential replaced by f + delta.
pub fn perturb_potential(problem: &SolitonProblem, delta: &Expr) -> SolitonProblem {
    let mut out = problem.clone();
    out.potential = problem.potential.clone() + delta.clone();
    out.description = format!("{} [potential perturbed]", problem.description);
    out
}
