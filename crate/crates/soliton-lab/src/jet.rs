//! Forward-mode differentiation on truncated multivariate Taylor values.
//!
//! A [`Jet`] stores the Taylor expansion of a scalar function at a point, up
//! to total degree `order ∈ {0,1,2,3}` in `dim ≤ 8` variables. Coefficients
//! are stored in *Taylor normalization* (`c_α = ∂^α f / α!`), which makes the
//! product rule an ordinary truncated polynomial product; the public
//! [`Jet::partial`] accessor converts back to raw partial derivatives.
//!
//! Multi-indices are enumerated in graded lexicographic order, so the
//! coefficient block of degree ≤ k is a prefix of the block of degree ≤ k+1.
//! Binary operations accept operands of different orders and truncate to the
//! lower one (exact for the retained degrees). Jets are immutable values and
//! all operations are pure.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use thiserror::Error;

pub const MAX_DIM: usize = 8;
pub const MAX_ORDER: usize = 3;

#[derive(Debug, Error, PartialEq, Clone)]
pub enum JetError {
    #[error("jet dimension {0} out of range 1..={MAX_DIM}")]
    DimOutOfRange(usize),
    #[error("jet order {0} out of range 0..={MAX_ORDER}")]
    OrderOutOfRange(usize),
    #[error("domain error in `{op}`: operand value {value}")]
    Domain { op: &'static str, value: f64 },
    #[error("multi-index degree {degree} exceeds jet order {order}")]
    DegreeOverflow { degree: usize, order: usize },
    #[error("multi-index has {got} entries, jet has dimension {dim}")]
    IndexLength { got: usize, dim: usize },
}

type Mi = [u8; MAX_DIM];

fn mi_degree(m: &Mi) -> usize {
    m.iter().map(|&e| e as usize).sum()
}

fn mi_factorial(m: &Mi) -> f64 {
    const FACT: [f64; 4] = [1.0, 1.0, 2.0, 6.0];
    m.iter().map(|&e| FACT[e as usize]).product()
}

/// Index tables for a given (dim, order): the graded-lex enumeration, the
/// reverse lookup, and the flattened pair table driving multiplication.
struct Shape {
    dim: usize,
    order: usize,
    indices: Vec<Mi>,
    position: HashMap<Mi, u16>,
    factorial: Vec<f64>,
    /// (i, j, k) with index_k = index_i + index_j, over all ordered pairs.
    prod: Vec<(u16, u16, u16)>,
}

impl Shape {
    fn build(dim: usize, order: usize) -> Shape {
        let mut indices: Vec<Mi> = Vec::new();
        let mut frontier: Vec<Mi> = vec![[0u8; MAX_DIM]];
        indices.push([0u8; MAX_DIM]);
        for _ in 0..order {
            // extend each index of the previous degree by one variable,
            // never decreasing the variable position (keeps lex order unique)
            let mut next: Vec<Mi> = Vec::new();
            for m in &frontier {
                let start = m
                    .iter()
                    .take(dim)
                    .rposition(|&e| e > 0)
                    .unwrap_or(0);
                let first = if m.iter().all(|&e| e == 0) { 0 } else { start };
                for v in first..dim {
                    let mut ext = *m;
                    ext[v] += 1;
                    next.push(ext);
                }
            }
            // within a degree block, order by variable (descending array lex),
            // so the degree-1 block position equals the variable index
            next.sort_by(|a, b| b.cmp(a));
            next.dedup();
            indices.extend(next.iter().copied());
            frontier = next;
        }
        // graded lexicographic: stable within each degree block by construction
        let position: HashMap<Mi, u16> = indices
            .iter()
            .enumerate()
            .map(|(p, m)| (*m, p as u16))
            .collect();
        let factorial = indices.iter().map(mi_factorial).collect();
        let mut prod = Vec::new();
        for (i, a) in indices.iter().enumerate() {
            for (j, b) in indices.iter().enumerate() {
                if mi_degree(a) + mi_degree(b) <= order {
                    let mut sum = [0u8; MAX_DIM];
                    for v in 0..dim {
                        sum[v] = a[v] + b[v];
                    }
                    prod.push((i as u16, j as u16, position[&sum]));
                }
            }
        }
        Shape {
            dim,
            order,
            indices,
            position,
            factorial,
            prod,
        }
    }
}

fn shape(dim: usize, order: usize) -> Arc<Shape> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Shape>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard
        .entry((dim, order))
        .or_insert_with(|| Arc::new(Shape::build(dim, order)))
        .clone()
}

/// Truncated Taylor value of order ≤ 3 at a point.
#[derive(Clone)]
pub struct Jet {
    shape: Arc<Shape>,
    coeffs: Vec<f64>,
}

impl std::fmt::Debug for Jet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Jet")
            .field("dim", &self.shape.dim)
            .field("order", &self.shape.order)
            .field("coeffs", &self.coeffs)
            .finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.dim() == other.dim() && self.order() == other.order() && self.coeffs == other.coeffs
    }
}

fn check_dim_order(dim: usize, order: usize) -> Result<(), JetError> {
    if dim == 0 || dim > MAX_DIM {
        return Err(JetError::DimOutOfRange(dim));
    }
    if order > MAX_ORDER {
        return Err(JetError::OrderOutOfRange(order));
    }
    Ok(())
}

/// Seed jets for every coordinate: jet `i` has value `point[i]`, first
/// partial 1 in direction `i`, and every other coefficient 0.
pub fn seed_jets(point: &[f64], order: usize) -> Result<Vec<Jet>, JetError> {
    check_dim_order(point.len(), order)?;
    let dim = point.len();
    Ok((0..dim)
        .map(|i| {
            let mut j = Jet::constant(dim, order, point[i]);
            if order >= 1 {
                j.coeffs[1 + i] = 1.0;
            }
            j
        })
        .collect())
}

impl Jet {
    pub fn constant(dim: usize, order: usize, value: f64) -> Jet {
        let shape = shape(dim, order);
        let mut coeffs = vec![0.0; shape.indices.len()];
        coeffs[0] = value;
        Jet { shape, coeffs }
    }

    /// Test/diagnostic constructor from Taylor coefficients in graded-lex order.
    pub fn from_taylor_coeffs(dim: usize, order: usize, coeffs: Vec<f64>) -> Result<Jet, JetError> {
        check_dim_order(dim, order)?;
        let shape = shape(dim, order);
        assert_eq!(
            coeffs.len(),
            shape.indices.len(),
            "coefficient count must be C(dim+order, order)"
        );
        Ok(Jet { shape, coeffs })
    }

    pub fn dim(&self) -> usize {
        self.shape.dim
    }

    pub fn order(&self) -> usize {
        self.shape.order
    }

    pub fn num_coeffs(&self) -> usize {
        self.coeffs.len()
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    /// Raw partial derivative `∂^idx` at the base point. `idx` is an exponent
    /// vector of length `dim`.
    pub fn partial(&self, idx: &[usize]) -> Result<f64, JetError> {
        if idx.len() != self.dim() {
            return Err(JetError::IndexLength {
                got: idx.len(),
                dim: self.dim(),
            });
        }
        let degree: usize = idx.iter().sum();
        if degree > self.order() {
            return Err(JetError::DegreeOverflow {
                degree,
                order: self.order(),
            });
        }
        let mut m = [0u8; MAX_DIM];
        for (v, &e) in idx.iter().enumerate() {
            m[v] = e as u8;
        }
        let p = self.shape.position[&m] as usize;
        Ok(self.coeffs[p] * self.shape.factorial[p])
    }

    /// First raw partial in direction `i`.
    pub fn d1(&self, i: usize) -> f64 {
        debug_assert!(self.order() >= 1);
        self.coeffs[1 + i]
    }

    /// Second raw partial ∂_i ∂_j.
    pub fn d2(&self, i: usize, j: usize) -> f64 {
        let mut m = [0u8; MAX_DIM];
        m[i] += 1;
        m[j] += 1;
        let p = self.shape.position[&m] as usize;
        self.coeffs[p] * self.shape.factorial[p]
    }

    /// True when every derivative coefficient vanishes.
    pub fn is_constant(&self) -> bool {
        self.coeffs[1..].iter().all(|&c| c == 0.0)
    }

    /// Truncate to a lower (or equal) order; exact for retained degrees.
    pub fn truncated(&self, order: usize) -> Jet {
        if order >= self.order() {
            return self.clone();
        }
        let shape = shape(self.dim(), order);
        let coeffs = self.coeffs[..shape.indices.len()].to_vec();
        Jet { shape, coeffs }
    }

    /// Partial-derivative jet in direction `i`; order drops by one.
    pub fn derivative(&self, i: usize) -> Jet {
        assert!(self.order() >= 1, "cannot differentiate an order-0 jet");
        let out_shape = shape(self.dim(), self.order() - 1);
        let mut coeffs = vec![0.0; out_shape.indices.len()];
        for (p, m) in out_shape.indices.iter().enumerate() {
            let mut src = *m;
            src[i] += 1;
            let sp = self.shape.position[&src] as usize;
            coeffs[p] = self.coeffs[sp] * (src[i] as f64);
        }
        Jet {
            shape: out_shape,
            coeffs,
        }
    }

    fn common_shape(&self, rhs: &Jet) -> Arc<Shape> {
        assert_eq!(self.dim(), rhs.dim(), "jet dimension mismatch");
        if self.order() <= rhs.order() {
            self.shape.clone()
        } else {
            rhs.shape.clone()
        }
    }

    pub fn add(&self, rhs: &Jet) -> Jet {
        let shape = self.common_shape(rhs);
        let n = shape.indices.len();
        let coeffs = (0..n).map(|p| self.coeffs[p] + rhs.coeffs[p]).collect();
        Jet { shape, coeffs }
    }

    pub fn sub(&self, rhs: &Jet) -> Jet {
        let shape = self.common_shape(rhs);
        let n = shape.indices.len();
        let coeffs = (0..n).map(|p| self.coeffs[p] - rhs.coeffs[p]).collect();
        Jet { shape, coeffs }
    }

    pub fn mul(&self, rhs: &Jet) -> Jet {
        let shape = self.common_shape(rhs);
        let mut coeffs = vec![0.0; shape.indices.len()];
        for &(i, j, k) in &shape.prod {
            coeffs[k as usize] += self.coeffs[i as usize] * rhs.coeffs[j as usize];
        }
        Jet { shape, coeffs }
    }

    pub fn neg(&self) -> Jet {
        let coeffs = self.coeffs.iter().map(|c| -c).collect();
        Jet {
            shape: self.shape.clone(),
            coeffs,
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        let coeffs = self.coeffs.iter().map(|c| c * s).collect();
        Jet {
            shape: self.shape.clone(),
            coeffs,
        }
    }

    pub fn add_scalar(&self, s: f64) -> Jet {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// Compose a univariate function with this jet from the Taylor
    /// coefficients of the outer function at the jet's value:
    /// `c[k] = g^(k)(value)/k!`. Exact at the stored order because the
    /// non-constant part is nilpotent under truncated multiplication.
    fn compose(&self, c: [f64; MAX_ORDER + 1]) -> Jet {
        let mut w = self.clone();
        w.coeffs[0] = 0.0;
        let order = self.order();
        let mut acc = Jet::constant(self.dim(), order, c[order]);
        for k in (0..order).rev() {
            acc = acc.mul(&w).add_scalar(c[k]);
        }
        acc
    }

    pub fn exp(&self) -> Jet {
        let e = self.value().exp();
        self.compose([e, e, e / 2.0, e / 6.0])
    }

    pub fn log(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v <= 0.0 {
            return Err(JetError::Domain { op: "log", value: v });
        }
        Ok(self.compose([v.ln(), 1.0 / v, -1.0 / (2.0 * v * v), 1.0 / (3.0 * v * v * v)]))
    }

    pub fn sqrt(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v <= 0.0 {
            return Err(JetError::Domain { op: "sqrt", value: v });
        }
        let s = v.sqrt();
        Ok(self.compose([
            s,
            0.5 / s,
            -1.0 / (8.0 * v * s),
            1.0 / (16.0 * v * v * s),
        ]))
    }

    pub fn sin(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([s, c, -s / 2.0, -c / 6.0])
    }

    pub fn cos(&self) -> Jet {
        let (s, c) = self.value().sin_cos();
        self.compose([c, -s, -c / 2.0, s / 6.0])
    }

    pub fn recip(&self) -> Result<Jet, JetError> {
        let v = self.value();
        if v == 0.0 {
            return Err(JetError::Domain { op: "div", value: v });
        }
        let v2 = v * v;
        Ok(self.compose([1.0 / v, -1.0 / v2, 1.0 / (v2 * v), -1.0 / (v2 * v2)]))
    }

    pub fn div(&self, rhs: &Jet) -> Result<Jet, JetError> {
        Ok(self.mul(&rhs.recip()?))
    }

    /// Integer power by repeated squaring; negative exponents via `recip`.
    pub fn pow_int(&self, n: i64) -> Result<Jet, JetError> {
        if n < 0 {
            return self.recip()?.pow_int(-n);
        }
        let mut acc = Jet::constant(self.dim(), self.order(), 1.0);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        Ok(acc)
    }

    /// Real power; requires a positive base value.
    pub fn pow_real(&self, p: f64) -> Result<Jet, JetError> {
        let v = self.value();
        if v <= 0.0 {
            return Err(JetError::Domain {
                op: "pow_real",
                value: v,
            });
        }
        let g0 = v.powf(p);
        let g1 = p * v.powf(p - 1.0);
        let g2 = p * (p - 1.0) * v.powf(p - 2.0);
        let g3 = p * (p - 1.0) * (p - 2.0) * v.powf(p - 3.0);
        Ok(self.compose([g0, g1, g2 / 2.0, g3 / 6.0]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!(
            (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs())),
            "{a} vs {b}"
        );
    }

    #[test]
    fn seed_at_origin_3d() {
        let jets = seed_jets(&[0.0, 0.0, 0.0], 3).unwrap();
        let j1 = &jets[1];
        assert_eq!(j1.value(), 0.0);
        assert_eq!(j1.partial(&[0, 1, 0]).unwrap(), 1.0);
        assert_eq!(j1.partial(&[1, 0, 0]).unwrap(), 0.0);
        assert_eq!(j1.partial(&[0, 2, 0]).unwrap(), 0.0);
        assert_eq!(j1.partial(&[1, 1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn seed_2d() {
        let jets = seed_jets(&[2.0, -1.0], 2).unwrap();
        let j0 = &jets[0];
        assert_eq!(j0.value(), 2.0);
        assert_eq!(j0.partial(&[1, 0]).unwrap(), 1.0);
        assert_eq!(j0.partial(&[0, 1]).unwrap(), 0.0);
        assert_eq!(j0.partial(&[2, 0]).unwrap(), 0.0);
        assert_eq!(j0.partial(&[1, 1]).unwrap(), 0.0);
    }

    #[test]
    fn seed_order_zero() {
        let jets = seed_jets(&[1.5], 0).unwrap();
        assert_eq!(jets[0].num_coeffs(), 1);
        assert_eq!(jets[0].value(), 1.5);
    }

    #[test]
    fn seed_rejects_bad_dims() {
        assert!(seed_jets(&[], 1).is_err());
        assert!(seed_jets(&[0.0; 9], 1).is_err());
        assert!(seed_jets(&[0.0], 4).is_err());
    }

    #[test]
    fn coeff_count_matches_binomial() {
        // C(d+order, order)
        let j = Jet::constant(8, 3, 0.0);
        assert_eq!(j.num_coeffs(), 165);
        let j = Jet::constant(3, 2, 0.0);
        assert_eq!(j.num_coeffs(), 10);
    }

    #[test]
    fn square_of_seed() {
        let x = &seed_jets(&[2.0], 2).unwrap()[0];
        let sq = x.mul(x);
        assert_eq!(sq.value(), 4.0);
        assert_eq!(sq.partial(&[1]).unwrap(), 4.0);
        assert_eq!(sq.partial(&[2]).unwrap(), 2.0);
    }

    #[test]
    fn exp_at_zero() {
        let x = &seed_jets(&[0.0], 3).unwrap()[0];
        let e = x.exp();
        for k in 0..=3 {
            assert_close(e.partial(&[k]).unwrap(), 1.0, 1e-15);
        }
    }

    #[test]
    fn sin_at_half_pi() {
        let x = &seed_jets(&[std::f64::consts::FRAC_PI_2], 2).unwrap()[0];
        let s = x.sin();
        assert_close(s.value(), 1.0, 1e-15);
        assert!(s.partial(&[1]).unwrap().abs() < 1e-15);
        assert_close(s.partial(&[2]).unwrap(), -1.0, 1e-15);
    }

    #[test]
    fn mixed_partial_of_product() {
        let jets = seed_jets(&[1.0, 1.0], 2).unwrap();
        let xy = jets[0].mul(&jets[1]);
        assert_eq!(xy.partial(&[1, 1]).unwrap(), 1.0);
    }

    #[test]
    fn exp_third_partial() {
        let x = &seed_jets(&[0.0], 3).unwrap()[0];
        assert_close(x.exp().partial(&[3]).unwrap(), 1.0, 1e-15);
    }

    #[test]
    fn chain_rules_coefficientwise() {
        // d/dx exp = exp and d/dx sin = cos as jets
        let x = &seed_jets(&[0.7], 3).unwrap()[0];
        let e = x.exp();
        let de = e.derivative(0);
        for p in 0..=2 {
            assert_close(de.partial(&[p]).unwrap(), e.partial(&[p]).unwrap(), 1e-14);
        }
        let ds = x.sin().derivative(0);
        let c = x.cos();
        for p in 0..=2 {
            assert_close(ds.partial(&[p]).unwrap(), c.partial(&[p]).unwrap(), 1e-14);
        }
    }

    #[test]
    fn domain_errors() {
        let x = &seed_jets(&[0.0], 2).unwrap()[0];
        assert_eq!(
            x.log().unwrap_err(),
            JetError::Domain { op: "log", value: 0.0 }
        );
        assert!(matches!(x.recip(), Err(JetError::Domain { op: "div", .. })));
        assert!(x.sqrt().is_err());
        assert!(x.pow_real(0.5).is_err());
        let y = &seed_jets(&[2.0], 2).unwrap()[0];
        assert!(y.div(x).is_err());
        assert!(y.div(&y.sub(y).add_scalar(3.0)).is_ok());
    }

    #[test]
    fn degree_overflow() {
        let x = &seed_jets(&[1.0], 2).unwrap()[0];
        assert!(matches!(
            x.partial(&[3]),
            Err(JetError::DegreeOverflow { degree: 3, order: 2 })
        ));
    }

    #[test]
    fn negative_integer_power() {
        // 1/(1-y) at y=2 -> value -1, dy = +1
        let y = &seed_jets(&[2.0], 2).unwrap()[0];
        let one_minus = y.neg().add_scalar(1.0);
        let f = one_minus.pow_int(-1).unwrap();
        assert_close(f.value(), -1.0, 1e-15);
        assert_close(f.partial(&[1]).unwrap(), 1.0, 1e-15);
    }

    #[test]
    fn mixed_order_operands_truncate() {
        let a = &seed_jets(&[1.0, 2.0], 3).unwrap()[0];
        let b = &seed_jets(&[1.0, 2.0], 1).unwrap()[1];
        let p = a.mul(b);
        assert_eq!(p.order(), 1);
        assert_eq!(p.value(), 2.0);
        assert_eq!(p.d1(0), 2.0);
        assert_eq!(p.d1(1), 1.0);
    }

    /// Enumerate β ≤ α and check ∂^α(ab) = Σ C(α,β) ∂^β a ∂^(α−β) b.
    fn leibniz_check(a: &Jet, b: &Jet, alpha: &[usize]) -> (f64, f64) {
        fn binom(n: usize, k: usize) -> f64 {
            let mut r = 1.0;
            for i in 0..k {
                r = r * (n - i) as f64 / (i + 1) as f64;
            }
            r
        }
        let dim = a.dim();
        let mut subs = vec![vec![0usize; dim]];
        for v in 0..dim {
            let mut next = Vec::new();
            for s in &subs {
                for e in 0..=alpha[v] {
                    let mut t = s.clone();
                    t[v] = e;
                    next.push(t);
                }
            }
            subs = next;
        }
        let mut sum = 0.0;
        for beta in &subs {
            let gamma: Vec<usize> = alpha.iter().zip(beta).map(|(a, b)| a - b).collect();
            let coeff: f64 = (0..dim).map(|v| binom(alpha[v], beta[v])).product();
            sum += coeff * a.partial(beta).unwrap() * b.partial(&gamma).unwrap();
        }
        (a.mul(b).partial(alpha).unwrap(), sum)
    }

    proptest! {
        #[test]
        fn leibniz_rule(
            ca in proptest::collection::vec(-2.0f64..2.0, 10),
            cb in proptest::collection::vec(-2.0f64..2.0, 10),
        ) {
            // dim 2, order 3: C(5,3)=10 coefficients
            let a = Jet::from_taylor_coeffs(2, 3, ca).unwrap();
            let b = Jet::from_taylor_coeffs(2, 3, cb).unwrap();
            for alpha in [[0,0],[1,0],[0,1],[2,0],[1,1],[0,2],[3,0],[2,1],[1,2],[0,3]] {
                let (lhs, rhs) = leibniz_check(&a, &b, &alpha);
                prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs().max(rhs.abs())));
            }
        }
    }

    #[test]
    fn finite_difference_consistency() {
        // order-1 and order-2 partials vs central differences on smooth samples
        let h = 1e-4;
        type Plain = fn(f64, f64) -> f64;
        type Jetted = fn(&Jet, &Jet) -> Jet;
        let funcs: Vec<(Plain, Jetted)> = vec![
            (
                |x, y| (x * y).sin() + (0.3 * x).exp(),
                |x, y| x.mul(y).sin().add(&x.scale(0.3).exp()),
            ),
            (
                |x, y| (x * x + y * y + 1.0).sqrt(),
                |x, y| x.mul(x).add(&y.mul(y)).add_scalar(1.0).sqrt().unwrap(),
            ),
            (
                |x, y| (2.0 + x).ln() * y,
                |x, y| x.add_scalar(2.0).log().unwrap().mul(y),
            ),
        ];
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        for (f, fj) in &funcs {
            for _ in 0..50 {
                let (x, y) = (next(), next());
                let s = seed_jets(&[x, y], 2).unwrap();
                let j = fj(&s[0], &s[1]);
                let fx = (f(x + h, y) - f(x - h, y)) / (2.0 * h);
                let fyy = (f(x, y + h) - 2.0 * f(x, y) + f(x, y - h)) / (h * h);
                let fxy = (f(x + h, y + h) - f(x + h, y - h) - f(x - h, y + h)
                    + f(x - h, y - h))
                    / (4.0 * h * h);
                assert_close(j.partial(&[1, 0]).unwrap(), fx, 1e-6);
                assert_close(j.partial(&[0, 2]).unwrap(), fyy, 1e-5);
                assert_close(j.partial(&[1, 1]).unwrap(), fxy, 1e-5);
            }
        }
    }
}
