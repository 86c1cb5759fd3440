//! Pointwise tensor calculus on coordinate metrics of dimension ≤ 8 in
//! arbitrary signature: Levi-Civita connection, curvature, Ricci tensor and
//! its covariant derivative, and the scalar-field objects (gradient, Hessian,
//! Laplacian) a soliton check needs.
//!
//! Everything is carried in jet arithmetic: metric entries are evaluated as
//! order-3 jets, the inverse metric is computed by Gauss-Jordan elimination
//! in the jet ring, and every derived tensor keeps enough derivative data for
//! the covariant derivatives downstream. No finite differences anywhere.
//!
//! Conventions (calibrated against the plane-wave family, see tests):
//! - curvature operator `R(X,Y)Z = ∇_X ∇_Y Z − ∇_Y ∇_X Z − ∇_{[X,Y]} Z`,
//! - Ricci tensor `ρ(Y,Z) = trace(X ↦ R(X,Y)Z)`,
//! - four-index tensor `R(X,Y,Z,W) = g(R(X,Y)W, Z)`.
//!
//! With these choices the plane-wave metric `2 dt dy + κ x² dy² + dx²` has
//! `R(∂y,∂x,∂y,∂x) = −κ` and `ρ(∂y,∂y) = −κ`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::expr::{eval_jet, EvalContext, EvalError, Expr};
use crate::jet::Jet;

/// Relative determinant threshold of the degenerate-metric guard.
pub const DET_RTOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("metric is singular at {point:?}: |det| = {det:e} is below threshold")]
    SingularMetric { point: Vec<f64>, det: f64 },
    #[error("evaluation failed at {point:?}: {source}")]
    Eval {
        point: Vec<f64>,
        #[source]
        source: EvalError,
    },
    #[error("metric entry ({i},{j}) given twice with different expressions")]
    ConflictingEntry { i: usize, j: usize },
    #[error("{0}")]
    Invalid(String),
}

/// Symmetric matrix of expressions for the metric components, with the
/// coordinate names and the parameter table they are evaluated under.
#[derive(Debug, Clone)]
pub struct MetricSpec {
    coords: Vec<String>,
    entries: Vec<Expr>, // d*d, both triangles filled
    params: BTreeMap<String, f64>,
}

impl MetricSpec {
    /// Build from the given entries; `(i, j, expr)` fills both `(i,j)` and
    /// `(j,i)`, omitted entries are zero. Every name used by an entry must be
    /// a coordinate or a parameter.
    pub fn new(
        coords: Vec<String>,
        entries: Vec<(usize, usize, Expr)>,
        params: BTreeMap<String, f64>,
    ) -> Result<MetricSpec, GeomError> {
        let d = coords.len();
        if d == 0 || d > crate::jet::MAX_DIM {
            return Err(GeomError::Invalid(format!(
                "dimension {d} out of range 1..={}",
                crate::jet::MAX_DIM
            )));
        }
        let mut grid: Vec<Option<Expr>> = vec![None; d * d];
        for (i, j, e) in entries {
            if i >= d || j >= d {
                return Err(GeomError::Invalid(format!(
                    "metric index ({i},{j}) out of range for dimension {d}"
                )));
            }
            for (a, b) in [(i, j), (j, i)] {
                match &grid[a * d + b] {
                    None => grid[a * d + b] = Some(e.clone()),
                    Some(prev) if *prev == e => {}
                    Some(_) => return Err(GeomError::ConflictingEntry { i: a, j: b }),
                }
            }
        }
        let entries: Vec<Expr> = grid
            .into_iter()
            .map(|o| o.unwrap_or(Expr::Constant(0.0)))
            .collect();
        for e in &entries {
            e.check_bound(&coords, &params)
                .map_err(|source| GeomError::Eval {
                    point: vec![],
                    source,
                })?;
        }
        Ok(MetricSpec {
            coords,
            entries,
            params,
        })
    }

    pub fn diagonal(
        coords: Vec<String>,
        diag: Vec<Expr>,
        params: BTreeMap<String, f64>,
    ) -> Result<MetricSpec, GeomError> {
        let entries = diag
            .into_iter()
            .enumerate()
            .map(|(i, e)| (i, i, e))
            .collect();
        MetricSpec::new(coords, entries, params)
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn params(&self) -> &BTreeMap<String, f64> {
        &self.params
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.dim() + j]
    }
}

#[inline]
fn ix2(d: usize, i: usize, j: usize) -> usize {
    i * d + j
}

#[inline]
fn ix3(d: usize, i: usize, j: usize, k: usize) -> usize {
    (i * d + j) * d + k
}

#[inline]
fn ix4(d: usize, i: usize, j: usize, k: usize, l: usize) -> usize {
    ((i * d + j) * d + k) * d + l
}

/// Metric, inverse metric and Christoffel symbols with enough jet data for
/// two more derivative levels.
pub struct ConnectionPack {
    pub point: Vec<f64>,
    dim: usize,
    g: Vec<Jet>,     // order 3
    ginv: Vec<Jet>,  // order 3
    gamma: Vec<Jet>, // order 2, [k][i][j]
    det: f64,
}

impl ConnectionPack {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    pub fn metric(&self, i: usize, j: usize) -> f64 {
        self.g[ix2(self.dim, i, j)].value()
    }

    pub fn metric_inv(&self, i: usize, j: usize) -> f64 {
        self.ginv[ix2(self.dim, i, j)].value()
    }

    /// Γ^k_{ij}
    pub fn christoffel(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[ix3(self.dim, k, i, j)].value()
    }

    /// ∂_l Γ^k_{ij}
    pub fn christoffel_d1(&self, k: usize, i: usize, j: usize, l: usize) -> f64 {
        self.gamma[ix3(self.dim, k, i, j)].d1(l)
    }

    /// ∂_l ∂_m Γ^k_{ij}
    pub fn christoffel_d2(&self, k: usize, i: usize, j: usize, l: usize, m: usize) -> f64 {
        self.gamma[ix3(self.dim, k, i, j)].d2(l, m)
    }

    /// Components of ∇_k g_{ij}; numerically zero for a Levi-Civita connection.
    pub fn metric_compatibility(&self, k: usize, i: usize, j: usize) -> f64 {
        let d = self.dim;
        let mut r = self.g[ix2(d, i, j)].d1(k);
        for a in 0..d {
            r -= self.christoffel(a, k, i) * self.metric(a, j);
            r -= self.christoffel(a, k, j) * self.metric(i, a);
        }
        r
    }
}

/// All pointwise curvature data: `R`, `ρ`, the Ricci operator, `τ`, and the
/// covariant derivatives `∇ρ`, `∇Ric`, `∇τ`.
pub struct CurvaturePack {
    pub connection: ConnectionPack,
    riem_op: Vec<f64>,   // [l][i][j][k]: component l of R(∂i,∂j)∂k
    riem4: Vec<f64>,     // [i][j][k][l]: R(∂i,∂j,∂k,∂l)
    rho: Vec<f64>,       // ρ_ij
    ric_op: Vec<f64>,    // Ric^i_j
    nabla_rho: Vec<f64>, // [k][i][j]: (∇_k ρ)_ij
    nabla_ric: Vec<f64>, // [k][i][j]: (∇_k Ric)^i_j
    tau: f64,
    dtau: Vec<f64>,
}

impl CurvaturePack {
    pub fn dim(&self) -> usize {
        self.connection.dim
    }

    /// Component `l` of `R(∂i,∂j)∂k`.
    pub fn riemann_op(&self, l: usize, i: usize, j: usize, k: usize) -> f64 {
        self.riem_op[ix4(self.dim(), l, i, j, k)]
    }

    /// `R(∂i,∂j,∂k,∂l) = g(R(∂i,∂j)∂l, ∂k)`.
    pub fn riemann(&self, i: usize, j: usize, k: usize, l: usize) -> f64 {
        self.riem4[ix4(self.dim(), i, j, k, l)]
    }

    pub fn ricci(&self, i: usize, j: usize) -> f64 {
        self.rho[ix2(self.dim(), i, j)]
    }

    /// `Ric^i_j = g^{ia} ρ_{aj}`.
    pub fn ricci_op(&self, i: usize, j: usize) -> f64 {
        self.ric_op[ix2(self.dim(), i, j)]
    }

    /// `(∇_k ρ)_{ij}`.
    pub fn nabla_ricci(&self, k: usize, i: usize, j: usize) -> f64 {
        self.nabla_rho[ix3(self.dim(), k, i, j)]
    }

    /// `(∇_k Ric)^i_j`.
    pub fn nabla_ricci_op(&self, k: usize, i: usize, j: usize) -> f64 {
        self.nabla_ric[ix3(self.dim(), k, i, j)]
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn dtau(&self, k: usize) -> f64 {
        self.dtau[k]
    }

    /// Ricci operator as a row-major matrix.
    pub fn ricci_op_matrix(&self) -> Vec<f64> {
        self.ric_op.clone()
    }

    /// Metric as a row-major matrix.
    pub fn metric_matrix(&self) -> Vec<f64> {
        let d = self.dim();
        (0..d * d)
            .map(|p| self.connection.metric(p / d, p % d))
            .collect()
    }
}

/// Gradient, Hessian, Laplacian and the associated norms of a scalar field,
/// plus the second-level data (`Δ‖∇f‖²`, `∂ Δf`) the Bochner identity needs.
pub struct ScalarPack {
    dim: usize,
    pub value: f64,
    df: Vec<f64>,      // ∂_i f
    grad: Vec<f64>,    // (∇f)^i
    hess: Vec<f64>,    // Hess_ij
    hess_op: Vec<f64>, // H^i_j
    pub laplacian: f64,
    pub grad_norm_sq: f64,
    pub hess_norm_sq: f64,
    pub grad_norm_sq_laplacian: f64,
    laplacian_grad: Vec<f64>, // ∂_k Δf
}

impl ScalarPack {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn df(&self, i: usize) -> f64 {
        self.df[i]
    }

    pub fn grad(&self, i: usize) -> f64 {
        self.grad[i]
    }

    pub fn grad_vec(&self) -> &[f64] {
        &self.grad
    }

    pub fn hessian(&self, i: usize, j: usize) -> f64 {
        self.hess[ix2(self.dim, i, j)]
    }

    /// `H^i_j = g^{ia} Hess_{aj}`.
    pub fn hessian_op(&self, i: usize, j: usize) -> f64 {
        self.hess_op[ix2(self.dim, i, j)]
    }

    pub fn hessian_op_matrix(&self) -> Vec<f64> {
        self.hess_op.clone()
    }

    pub fn laplacian_grad(&self, k: usize) -> f64 {
        self.laplacian_grad[k]
    }
}

/// Pointwise residuals of a vector field: `killing_ij = ∇_i X_j + ∇_j X_i`
/// (indices lowered) and `parallel^k_i = (∇_i X)^k`; both vanish iff the
/// field is Killing resp. parallel at the point.
pub struct FieldResiduals {
    dim: usize,
    pub killing: Vec<f64>,  // d², [i][j]
    pub parallel: Vec<f64>, // d², [k][i]
}

impl FieldResiduals {
    pub fn killing_max(&self) -> f64 {
        self.killing.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn parallel_max(&self) -> f64 {
        self.parallel.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn killing_at(&self, i: usize, j: usize) -> f64 {
        self.killing[ix2(self.dim, i, j)]
    }

    pub fn parallel_at(&self, k: usize, i: usize) -> f64 {
        self.parallel[ix2(self.dim, k, i)]
    }
}

fn eval_entry(e: &Expr, ctx: &EvalContext, point: &[f64]) -> Result<Jet, GeomError> {
    eval_jet(e, ctx).map_err(|source| GeomError::Eval {
        point: point.to_vec(),
        source,
    })
}

/// Gauss-Jordan inversion in the jet ring, pivoting on coefficient values.
/// Returns the inverse jets and the determinant value.
fn invert_jets(d: usize, g: &[Jet], point: &[f64]) -> Result<(Vec<Jet>, f64), GeomError> {
    let order = g[0].order();
    let dim_vars = g[0].dim();
    let mut a: Vec<Jet> = g.to_vec();
    let mut inv: Vec<Jet> = (0..d * d)
        .map(|p| Jet::constant(dim_vars, order, if p / d == p % d { 1.0 } else { 0.0 }))
        .collect();
    let mut det = 1.0f64;
    for col in 0..d {
        let pivot_row = (col..d)
            .max_by(|&r1, &r2| {
                let v1 = a[ix2(d, r1, col)].value().abs();
                let v2 = a[ix2(d, r2, col)].value().abs();
                v1.partial_cmp(&v2).unwrap()
            })
            .unwrap();
        let pv = a[ix2(d, pivot_row, col)].value();
        if pv == 0.0 {
            return Err(GeomError::SingularMetric {
                point: point.to_vec(),
                det: 0.0,
            });
        }
        if pivot_row != col {
            for c in 0..d {
                a.swap(ix2(d, pivot_row, c), ix2(d, col, c));
                inv.swap(ix2(d, pivot_row, c), ix2(d, col, c));
            }
            det = -det;
        }
        det *= pv;
        let pivot_inv = a[ix2(d, col, col)].recip().expect("nonzero pivot");
        for c in 0..d {
            a[ix2(d, col, c)] = a[ix2(d, col, c)].mul(&pivot_inv);
            inv[ix2(d, col, c)] = inv[ix2(d, col, c)].mul(&pivot_inv);
        }
        for row in 0..d {
            if row == col {
                continue;
            }
            let factor = a[ix2(d, row, col)].clone();
            if factor.value() == 0.0 && factor.is_constant() {
                continue;
            }
            for c in 0..d {
                a[ix2(d, row, c)] = a[ix2(d, row, c)].sub(&factor.mul(&a[ix2(d, col, c)]));
                inv[ix2(d, row, c)] = inv[ix2(d, row, c)].sub(&factor.mul(&inv[ix2(d, col, c)]));
            }
        }
    }
    Ok((inv, det))
}

/// Shared jet-level core: metric, inverse and Christoffel jets at a point.
struct Core {
    d: usize,
    point: Vec<f64>,
    g: Vec<Jet>,     // order 3
    ginv: Vec<Jet>,  // order 3
    gamma: Vec<Jet>, // order 2
    det: f64,
}

fn build_core(spec: &MetricSpec, point: &[f64]) -> Result<Core, GeomError> {
    let d = spec.dim();
    assert_eq!(point.len(), d, "point dimension mismatch");
    let ctx = EvalContext::new(spec.coords(), point, 3, spec.params())
        .map_err(|e| GeomError::Invalid(format!("cannot seed jets at {point:?}: {e}")))?;
    let mut g = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            g.push(eval_entry(spec.entry(i, j), &ctx, point)?);
        }
    }
    let (ginv, det) = invert_jets(d, &g, point)?;
    // degenerate-metric guard: |det| relative to the product of row norms
    let mut hadamard = 1.0f64;
    for i in 0..d {
        let row_norm = (0..d)
            .map(|j| g[ix2(d, i, j)].value().powi(2))
            .sum::<f64>()
            .sqrt();
        hadamard *= row_norm;
    }
    if det.abs() <= DET_RTOL * hadamard.max(f64::MIN_POSITIVE) {
        return Err(GeomError::SingularMetric {
            point: point.to_vec(),
            det,
        });
    }
    // Γ^k_ij = ½ g^{kl} (∂_i g_jl + ∂_j g_il − ∂_l g_ij), an order-2 jet
    let mut dg = Vec::with_capacity(d * d * d);
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                dg.push(g[ix2(d, i, j)].derivative(l)); // [l][i][j] = ∂_l g_ij
            }
        }
    }
    let ginv2: Vec<Jet> = ginv.iter().map(|j| j.truncated(2)).collect();
    let mut gamma = Vec::with_capacity(d * d * d);
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = Jet::constant(d, 2, 0.0);
                for l in 0..d {
                    let sum = dg[ix3(d, i, j, l)]
                        .add(&dg[ix3(d, j, i, l)])
                        .sub(&dg[ix3(d, l, i, j)]);
                    acc = acc.add(&ginv2[ix2(d, k, l)].mul(&sum));
                }
                gamma.push(acc.scale(0.5));
            }
        }
    }
    Ok(Core {
        d,
        point: point.to_vec(),
        g,
        ginv,
        gamma,
        det,
    })
}

impl Core {
    fn into_connection(self) -> ConnectionPack {
        ConnectionPack {
            point: self.point,
            dim: self.d,
            g: self.g,
            ginv: self.ginv,
            gamma: self.gamma,
            det: self.det,
        }
    }
}

/// Jet-level curvature built on a [`Core`]; order-1 jets throughout so one
/// more coordinate derivative is available for `∇ρ`, `∇Ric`, `∇τ`.
struct CurvatureJets {
    rop: Vec<Jet>, // [l][i][j][k]
    rho: Vec<Jet>,
    ric: Vec<Jet>,
    tau: Jet,
}

fn curvature_jets(core: &Core) -> CurvatureJets {
    let d = core.d;
    let gamma1: Vec<Jet> = core.gamma.iter().map(|j| j.truncated(1)).collect();
    let mut rop = vec![Jet::constant(d, 1, 0.0); d * d * d * d];
    for l in 0..d {
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue; // antisymmetric in (i,j)
                }
                for k in 0..d {
                    let mut acc = core.gamma[ix3(d, l, j, k)]
                        .derivative(i)
                        .sub(&core.gamma[ix3(d, l, i, k)].derivative(j));
                    for a in 0..d {
                        acc = acc
                            .add(&gamma1[ix3(d, l, i, a)].mul(&gamma1[ix3(d, a, j, k)]))
                            .sub(&gamma1[ix3(d, l, j, a)].mul(&gamma1[ix3(d, a, i, k)]));
                    }
                    rop[ix4(d, l, i, j, k)] = acc;
                }
            }
        }
    }
    let mut rho = Vec::with_capacity(d * d);
    for j in 0..d {
        for k in 0..d {
            let mut acc = Jet::constant(d, 1, 0.0);
            for a in 0..d {
                acc = acc.add(&rop[ix4(d, a, a, j, k)]);
            }
            rho.push(acc);
        }
    }
    let ginv1: Vec<Jet> = core.ginv.iter().map(|j| j.truncated(1)).collect();
    let mut ric = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = Jet::constant(d, 1, 0.0);
            for a in 0..d {
                acc = acc.add(&ginv1[ix2(d, i, a)].mul(&rho[ix2(d, a, j)]));
            }
            ric.push(acc);
        }
    }
    let mut tau = Jet::constant(d, 1, 0.0);
    for i in 0..d {
        for j in 0..d {
            tau = tau.add(&ginv1[ix2(d, i, j)].mul(&rho[ix2(d, i, j)]));
        }
    }
    CurvatureJets { rop, rho, ric, tau }
}

pub fn connection(spec: &MetricSpec, point: &[f64]) -> Result<ConnectionPack, GeomError> {
    Ok(build_core(spec, point)?.into_connection())
}

pub fn curvature(spec: &MetricSpec, point: &[f64]) -> Result<CurvaturePack, GeomError> {
    let core = build_core(spec, point)?;
    Ok(curvature_from_core(core))
}

fn curvature_from_core(core: Core) -> CurvaturePack {
    let d = core.d;
    let cj = curvature_jets(&core);
    let riem_op: Vec<f64> = cj.rop.iter().map(|j| j.value()).collect();
    // R(∂i,∂j,∂k,∂l) = g(R(∂i,∂j)∂l, ∂k) = Σ_a g_{ka} R^a_{ijl}
    let mut riem4 = vec![0.0; d * d * d * d];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let mut acc = 0.0;
                    for a in 0..d {
                        acc += core.g[ix2(d, k, a)].value() * riem_op[ix4(d, a, i, j, l)];
                    }
                    riem4[ix4(d, i, j, k, l)] = acc;
                }
            }
        }
    }
    let rho_val: Vec<f64> = cj.rho.iter().map(|j| j.value()).collect();
    let ric_val: Vec<f64> = cj.ric.iter().map(|j| j.value()).collect();
    let gamma_val = |k: usize, i: usize, j: usize| core.gamma[ix3(d, k, i, j)].value();
    // (∇_k ρ)_ij = ∂_k ρ_ij − Γ^a_{ki} ρ_aj − Γ^a_{kj} ρ_ia
    let mut nabla_rho = vec![0.0; d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = cj.rho[ix2(d, i, j)].d1(k);
                for a in 0..d {
                    acc -= gamma_val(a, k, i) * rho_val[ix2(d, a, j)];
                    acc -= gamma_val(a, k, j) * rho_val[ix2(d, i, a)];
                }
                nabla_rho[ix3(d, k, i, j)] = acc;
            }
        }
    }
    // (∇_k Ric)^i_j = ∂_k Ric^i_j + Γ^i_{ka} Ric^a_j − Γ^a_{kj} Ric^i_a
    let mut nabla_ric = vec![0.0; d * d * d];
    for k in 0..d {
        for i in 0..d {
            for j in 0..d {
                let mut acc = cj.ric[ix2(d, i, j)].d1(k);
                for a in 0..d {
                    acc += gamma_val(i, k, a) * ric_val[ix2(d, a, j)];
                    acc -= gamma_val(a, k, j) * ric_val[ix2(d, i, a)];
                }
                nabla_ric[ix3(d, k, i, j)] = acc;
            }
        }
    }
    let tau = cj.tau.value();
    let dtau: Vec<f64> = (0..d).map(|k| cj.tau.d1(k)).collect();
    CurvaturePack {
        connection: core.into_connection(),
        riem_op,
        riem4,
        rho: rho_val,
        ric_op: ric_val,
        nabla_rho,
        nabla_ric,
        tau,
        dtau,
    }
}

pub fn scalar_pack(spec: &MetricSpec, f: &Expr, point: &[f64]) -> Result<ScalarPack, GeomError> {
    let core = build_core(spec, point)?;
    scalar_pack_on_core(&core, spec, f)
}

fn scalar_pack_on_core(core: &Core, spec: &MetricSpec, f: &Expr) -> Result<ScalarPack, GeomError> {
    let d = core.d;
    let ctx = EvalContext::new(spec.coords(), &core.point, 3, spec.params())
        .expect("core already validated dims");
    let fj = eval_entry(f, &ctx, &core.point)?;
    let df_jets: Vec<Jet> = (0..d).map(|i| fj.derivative(i)).collect(); // order 2
    let ginv2: Vec<Jet> = core.ginv.iter().map(|j| j.truncated(2)).collect();
    let ginv_val = |i: usize, j: usize| core.ginv[ix2(d, i, j)].value();
    let gamma1: Vec<Jet> = core.gamma.iter().map(|j| j.truncated(1)).collect();

    // (∇f)^i = g^{ij} ∂_j f, order 2
    let grad_jets: Vec<Jet> = (0..d)
        .map(|i| {
            let mut acc = Jet::constant(d, 2, 0.0);
            for j in 0..d {
                acc = acc.add(&ginv2[ix2(d, i, j)].mul(&df_jets[j]));
            }
            acc
        })
        .collect();

    // Hess_ij = ∂_i ∂_j f − Γ^k_ij ∂_k f, order 1
    let mut hess_jets = Vec::with_capacity(d * d);
    for i in 0..d {
        for j in 0..d {
            let mut acc = df_jets[j].derivative(i);
            for k in 0..d {
                acc = acc.sub(&gamma1[ix3(d, k, i, j)].mul(&df_jets[k].truncated(1)));
            }
            hess_jets.push(acc);
        }
    }

    let hess: Vec<f64> = hess_jets.iter().map(|j| j.value()).collect();
    let df: Vec<f64> = df_jets.iter().map(|j| j.value()).collect();
    let grad: Vec<f64> = grad_jets.iter().map(|j| j.value()).collect();

    let mut hess_op = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            let mut acc = 0.0;
            for a in 0..d {
                acc += ginv_val(i, a) * hess[ix2(d, a, j)];
            }
            hess_op[ix2(d, i, j)] = acc;
        }
    }

    // Δf = g^{ij} Hess_ij as an order-1 jet (its gradient feeds Bochner)
    let ginv1: Vec<Jet> = core.ginv.iter().map(|j| j.truncated(1)).collect();
    let mut lap_jet = Jet::constant(d, 1, 0.0);
    for i in 0..d {
        for j in 0..d {
            lap_jet = lap_jet.add(&ginv1[ix2(d, i, j)].mul(&hess_jets[ix2(d, i, j)]));
        }
    }
    let laplacian = lap_jet.value();
    let laplacian_grad: Vec<f64> = (0..d).map(|k| lap_jet.d1(k)).collect();

    // ‖∇f‖² = g^{ab} ∂_a f ∂_b f as an order-2 jet, then its Laplacian
    let mut gnsq_jet = Jet::constant(d, 2, 0.0);
    for a in 0..d {
        gnsq_jet = gnsq_jet.add(&grad_jets[a].mul(&df_jets[a]));
    }
    let grad_norm_sq = gnsq_jet.value();
    let mut gnsq_lap = 0.0;
    for i in 0..d {
        for j in 0..d {
            let mut h_u = gnsq_jet.d2(i, j);
            for k in 0..d {
                h_u -= core.gamma[ix3(d, k, i, j)].value() * gnsq_jet.d1(k);
            }
            gnsq_lap += ginv_val(i, j) * h_u;
        }
    }

    let mut hess_norm_sq = 0.0;
    for i in 0..d {
        for j in 0..d {
            for a in 0..d {
                for b in 0..d {
                    hess_norm_sq +=
                        ginv_val(i, a) * ginv_val(j, b) * hess[ix2(d, i, j)] * hess[ix2(d, a, b)];
                }
            }
        }
    }

    Ok(ScalarPack {
        dim: d,
        value: fj.value(),
        df,
        grad,
        hess,
        hess_op,
        laplacian,
        grad_norm_sq,
        hess_norm_sq,
        grad_norm_sq_laplacian: gnsq_lap,
        laplacian_grad,
    })
}

pub fn field_residuals(
    spec: &MetricSpec,
    field: &[Expr],
    point: &[f64],
) -> Result<FieldResiduals, GeomError> {
    let core = build_core(spec, point)?;
    let d = core.d;
    assert_eq!(
        field.len(),
        d,
        "vector field needs one component per coordinate"
    );
    let ctx = EvalContext::new(spec.coords(), point, 1, spec.params())
        .expect("core already validated dims");
    let x_jets: Vec<Jet> = field
        .iter()
        .map(|e| eval_entry(e, &ctx, point))
        .collect::<Result<_, _>>()?;
    let g1: Vec<Jet> = core.g.iter().map(|j| j.truncated(1)).collect();
    // lowered components X_j = g_{ja} X^a as order-1 jets
    let x_low: Vec<Jet> = (0..d)
        .map(|j| {
            let mut acc = Jet::constant(d, 1, 0.0);
            for a in 0..d {
                acc = acc.add(&g1[ix2(d, j, a)].mul(&x_jets[a]));
            }
            acc
        })
        .collect();
    let gamma_val = |k: usize, i: usize, j: usize| core.gamma[ix3(d, k, i, j)].value();
    let cov_low = |i: usize, j: usize| {
        // ∇_i X_j = ∂_i X_j − Γ^a_{ij} X_a
        let mut r = x_low[j].d1(i);
        for a in 0..d {
            r -= gamma_val(a, i, j) * x_low[a].value();
        }
        r
    };
    let mut killing = vec![0.0; d * d];
    let mut parallel = vec![0.0; d * d];
    for i in 0..d {
        for j in 0..d {
            killing[ix2(d, i, j)] = cov_low(i, j) + cov_low(j, i);
            // (∇_i X)^j = ∂_i X^j + Γ^j_{ia} X^a
            let mut p = x_jets[j].d1(i);
            for a in 0..d {
                p += gamma_val(j, i, a) * x_jets[a].value();
            }
            parallel[ix2(d, j, i)] = p;
        }
    }
    Ok(FieldResiduals {
        dim: d,
        killing,
        parallel,
    })
}

/// Curvature and scalar data computed from one shared jet core; the entry
/// point the verification suite uses per sample point.
pub fn full_pack(
    spec: &MetricSpec,
    f: &Expr,
    point: &[f64],
) -> Result<(CurvaturePack, ScalarPack), GeomError> {
    let core = build_core(spec, point)?;
    let scal = scalar_pack_on_core(&core, spec, f)?;
    let curv = curvature_from_core(core);
    Ok((curv, scal))
}
