//! Linear algebra on indefinite inner-product spaces: signature counts,
//! spectra of non-symmetric operators, numerical rank, nilpotency and the
//! causal type of vectors.
//!
//! Nilpotency is detected through scaled matrix powers (`‖A^k‖ / ‖A‖^k`)
//! rather than eigenvalue clustering: for the small defective matrices that
//! show up here, eigensolver accuracy degrades like ε^(1/k) while the power
//! test stays at machine precision. When the power test fires, the reported
//! spectrum is snapped to exact zeros.

use nalgebra::{Complex, DMatrix};
use thiserror::Error;

/// Default relative tolerance for rank, nilpotency and spectrum decisions.
pub const DEFAULT_TOL: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum LinalgError {
    #[error("input matrix is not symmetric (max asymmetry {asym:e} over tolerance)")]
    AsymmetricInput { asym: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CausalType {
    Spacelike,
    Timelike,
    Null,
    Zero,
}

impl CausalType {
    pub fn name(self) -> &'static str {
        match self {
            CausalType::Spacelike => "spacelike",
            CausalType::Timelike => "timelike",
            CausalType::Null => "null",
            CausalType::Zero => "zero",
        }
    }
}

/// Spectrum, rank, nilpotency index, kernel dimension and diagonalizability
/// of a (generally non-symmetric) real operator.
#[derive(Debug, Clone)]
pub struct OperatorProfile {
    /// Complex eigenvalues sorted by (re, im); exact zeros when the power
    /// test certifies nilpotency.
    pub spectrum: Vec<Complex<f64>>,
    pub rank: usize,
    pub kernel_dim: usize,
    /// `Some(0)` for the zero matrix, `Some(k)` when `A^k ≈ 0 ≠ A^(k−1)`,
    /// `None` when the operator is not nilpotent.
    pub nilpotency: Option<usize>,
    pub diagonalizable: bool,
    pub tol: f64,
}

impl OperatorProfile {
    /// Every eigenvalue lies within `tol` of one of the real targets.
    pub fn spectrum_within(&self, targets: &[f64], tol: f64) -> bool {
        self.spectrum.iter().all(|ev| {
            targets
                .iter()
                .any(|&t| (ev - Complex::new(t, 0.0)).norm() <= tol)
        })
    }

    /// Max distance between the two sorted spectra.
    pub fn spectrum_distance(&self, other: &OperatorProfile) -> f64 {
        if self.spectrum.len() != other.spectrum.len() {
            return f64::INFINITY;
        }
        self.spectrum
            .iter()
            .zip(&other.spectrum)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Signature of a symmetric matrix: counts of eigenvalues above `tol`,
/// below `−tol`, and within the `tol` band.
pub fn signature(sym: &DMatrix<f64>, tol: f64) -> Result<(usize, usize, usize), LinalgError> {
    assert!(sym.is_square(), "signature needs a square matrix");
    let asym = (sym - sym.transpose()).amax();
    if asym > tol.max(1e-12) * sym.amax().max(1.0) {
        return Err(LinalgError::AsymmetricInput { asym });
    }
    let sym = (sym + sym.transpose()).scale(0.5);
    let eig = sym.symmetric_eigen();
    let mut pos = 0;
    let mut neg = 0;
    let mut null = 0;
    for &ev in eig.eigenvalues.iter() {
        if ev > tol {
            pos += 1;
        } else if ev < -tol {
            neg += 1;
        } else {
            null += 1;
        }
    }
    Ok((pos, neg, null))
}

fn rank_of_complex(a: &DMatrix<Complex<f64>>, tol: f64) -> usize {
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0f64, |m, s| m.max(*s));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

fn rank_of(a: &DMatrix<f64>, tol: f64) -> usize {
    let sv = a.clone().svd(false, false).singular_values;
    let smax = sv.iter().fold(0.0f64, |m, s| m.max(*s));
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol * smax).count()
}

/// Total on square matrices: spectrum, rank, kernel, nilpotency index and a
/// diagonalizability flag, all at the given relative tolerance.
pub fn operator_profile(a: &DMatrix<f64>, tol: f64) -> OperatorProfile {
    assert!(a.is_square(), "operator profile needs a square matrix");
    let n = a.nrows();
    let rank = rank_of(a, tol);
    let kernel_dim = n - rank;
    let norm = a.norm();

    let nilpotency = if rank == 0 {
        Some(0)
    } else {
        let mut power = a.clone();
        let mut found = None;
        for k in 2..=n {
            power = &power * a;
            if power.norm() < tol * norm.powi(k as i32) {
                found = Some(k);
                break;
            }
        }
        found
    };

    let mut spectrum: Vec<Complex<f64>> = if nilpotency.is_some() {
        vec![Complex::new(0.0, 0.0); n]
    } else {
        a.complex_eigenvalues().iter().copied().collect()
    };
    spectrum.sort_by(|x, y| {
        x.re.partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
    });

    let diagonalizable = match nilpotency {
        Some(0) => true, // zero matrix
        Some(_) => false,
        None => {
            // cluster the spectrum, then compare geometric and algebraic
            // multiplicities via rank(A − λI)
            let ctol = tol * norm.max(1.0);
            let ac = a.map(|v| Complex::new(v, 0.0));
            let mut ok = true;
            let mut i = 0;
            while i < spectrum.len() {
                let mut j = i + 1;
                while j < spectrum.len() && (spectrum[j] - spectrum[i]).norm() <= ctol {
                    j += 1;
                }
                let mult = j - i;
                let mean = spectrum[i..j].iter().sum::<Complex<f64>>() / mult as f64;
                let mut shifted = ac.clone();
                for k in 0..n {
                    shifted[(k, k)] -= mean;
                }
                let geo = n - rank_of_complex(&shifted, ctol.max(tol));
                if geo != mult {
                    ok = false;
                    break;
                }
                i = j;
            }
            ok
        }
    };

    OperatorProfile {
        spectrum,
        rank,
        kernel_dim,
        nilpotency,
        diagonalizable,
        tol,
    }
}

/// Causal classification of a vector against a metric: `zero` when the
/// Euclidean norm is below `tol`, otherwise by the sign of `vᵀ g v` with a
/// `tol`-wide band (relative to `Σ |v_i||g_ij||v_j|`) counted as `null`.
pub fn causal_type(v: &[f64], g: &DMatrix<f64>, tol: f64) -> CausalType {
    let n = v.len();
    assert_eq!(g.nrows(), n, "metric/vector dimension mismatch");
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm < tol {
        return CausalType::Zero;
    }
    let mut q = 0.0;
    let mut scale = 0.0;
    for i in 0..n {
        for j in 0..n {
            q += v[i] * g[(i, j)] * v[j];
            scale += (v[i] * g[(i, j)] * v[j]).abs();
        }
    }
    if q.abs() <= tol * scale.max(f64::MIN_POSITIVE) {
        CausalType::Null
    } else if q > 0.0 {
        CausalType::Spacelike
    } else {
        CausalType::Timelike
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn m(rows: &[&[f64]]) -> DMatrix<f64> {
        let nr = rows.len();
        let nc = rows[0].len();
        DMatrix::from_fn(nr, nc, |i, j| rows[i][j])
    }

    #[test]
    fn signature_examples() {
        let g = m(&[&[-1.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert_eq!(signature(&g, 1e-10).unwrap(), (2, 1, 0));
        // Walker form [[0,0,1],[0,1,0],[1,0,φ]] is Lorentzian for any φ
        for phi in [-3.0, 0.0, 0.4, 10.0] {
            let g = m(&[&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0], &[1.0, 0.0, phi]]);
            assert_eq!(signature(&g, 1e-10).unwrap(), (2, 1, 0));
        }
        let z = DMatrix::zeros(4, 4);
        assert_eq!(signature(&z, 1e-10).unwrap(), (0, 0, 4));
        let bad = m(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(signature(&bad, 1e-10).is_err());
    }

    #[test]
    fn rank_one_two_step_nilpotent() {
        let a = m(&[&[0.0, 0.0, -0.5], &[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0]]);
        let p = operator_profile(&a, DEFAULT_TOL);
        assert_eq!(p.rank, 1);
        assert_eq!(p.kernel_dim, 2);
        assert_eq!(p.nilpotency, Some(2));
        assert!(p.spectrum.iter().all(|ev| ev.norm() == 0.0));
        assert!(!p.diagonalizable);
    }

    #[test]
    fn rank_two_three_step_nilpotent() {
        let a = m(&[&[1.0, -1.0, 1.0], &[1.0, -1.0, 1.0], &[-1.0, 1.0, 0.0]]);
        let p = operator_profile(&a, DEFAULT_TOL);
        assert_eq!(p.rank, 2);
        assert_eq!(p.nilpotency, Some(3));
        assert!(p.spectrum_within(&[0.0], 1e-12));
    }

    #[test]
    fn scaled_diagonal_projector() {
        let lam = 0.73;
        let a = m(&[&[lam, 0.0, 0.0], &[0.0, lam, 0.0], &[0.0, 0.0, 0.0]]);
        let p = operator_profile(&a, DEFAULT_TOL);
        assert_eq!(p.rank, 2);
        assert_eq!(p.nilpotency, None);
        assert!(p.diagonalizable);
        assert!(p.spectrum_within(&[0.0, lam], 1e-12));
    }

    #[test]
    fn zero_matrix_profile() {
        let p = operator_profile(&DMatrix::zeros(3, 3), DEFAULT_TOL);
        assert_eq!(p.rank, 0);
        assert_eq!(p.nilpotency, Some(0));
        assert!(p.diagonalizable);
    }

    #[test]
    fn shear_is_not_diagonalizable() {
        let a = m(&[&[1.0, 1.0], &[0.0, 1.0]]);
        let p = operator_profile(&a, DEFAULT_TOL);
        assert_eq!(p.nilpotency, None);
        assert!(!p.diagonalizable);
    }

    #[test]
    fn causal_examples() {
        // Walker metric with φ = 0.8
        let g = m(&[&[0.0, 0.0, 1.0], &[0.0, 1.0, 0.0], &[1.0, 0.0, 0.8]]);
        let b = 1.3;
        assert_eq!(
            causal_type(&[0.0, b, 0.0], &g, 1e-10),
            CausalType::Spacelike
        );
        assert_eq!(causal_type(&[0.7, 0.0, 0.0], &g, 1e-10), CausalType::Null);
        assert_eq!(causal_type(&[0.0, 0.0, 0.0], &g, 1e-10), CausalType::Zero);
        let mink = m(&[&[-1.0, 0.0], &[0.0, 1.0]]);
        assert_eq!(causal_type(&[1.0, 0.2], &mink, 1e-10), CausalType::Timelike);
    }

    fn random_orthogonal(n: usize, seed: u64) -> DMatrix<f64> {
        let mut state = seed.max(1);
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        let a = DMatrix::from_fn(n, n, |_, _| next());
        a.qr().q()
    }

    proptest! {
        /// Sylvester: signature is invariant under congruence
        #[test]
        fn sylvester_congruence(
            seed in 1u64..u64::MAX,
            diag in proptest::collection::vec(prop_oneof![
                Just(-2.0f64), Just(-1.0), Just(0.0), Just(1.0), Just(2.0)
            ], 3..6),
        ) {
            let n = diag.len();
            let q = random_orthogonal(n, seed);
            let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(diag.clone()));
            let s = q.transpose() * &d * &q;
            let expected = (
                diag.iter().filter(|&&v| v > 0.0).count(),
                diag.iter().filter(|&&v| v < 0.0).count(),
                diag.iter().filter(|&&v| v == 0.0).count(),
            );
            prop_assert_eq!(signature(&s, 1e-6).unwrap(), expected);
            // congruence by a bounded invertible matrix
            let mut p = random_orthogonal(n, seed.wrapping_mul(0x9E3779B97F4A7C15));
            for i in 0..n {
                // scale rows to de-orthogonalize while keeping conditioning
                let sc = 1.0 + 0.5 * (i as f64) / n as f64;
                for j in 0..n {
                    p[(i, j)] *= sc;
                }
            }
            let s2 = p.transpose() * &s * &p;
            prop_assert_eq!(signature(&s2, 1e-6).unwrap(), expected);
        }

        /// profiles are similarity invariants
        #[test]
        fn profile_similarity_invariant(
            seed in 1u64..u64::MAX,
            entries in proptest::collection::vec(-2.0f64..2.0, 9),
        ) {
            let a = DMatrix::from_row_slice(3, 3, &entries);
            let q = random_orthogonal(3, seed);
            let b = &q * &a * q.transpose();
            let pa = operator_profile(&a, 1e-7);
            let pb = operator_profile(&b, 1e-7);
            prop_assert_eq!(pa.rank, pb.rank);
            prop_assert_eq!(pa.nilpotency, pb.nilpotency);
            prop_assert!(pa.spectrum_distance(&pb) < 1e-6 * (1.0 + a.norm()));
        }

        /// strictly upper-triangular nilpotency index matches the value
        /// computed from the zero pattern alone
        #[test]
        fn nilpotency_matches_pattern(
            n in 2usize..6,
            seed in 1u64..u64::MAX,
        ) {
            let mut state = seed;
            let mut next = move || {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                (state >> 11) as f64 / (1u64 << 53) as f64
            };
            let mut a = DMatrix::zeros(n, n);
            let mut pattern = vec![vec![false; n]; n];
            for i in 0..n {
                for j in (i + 1)..n {
                    if next() < 0.6 {
                        a[(i, j)] = 0.5 + next(); // strictly positive: no cancellation
                        pattern[i][j] = true;
                    }
                }
            }
            // boolean matrix powers give the combinatorial index
            let bool_mul = |x: &Vec<Vec<bool>>, y: &Vec<Vec<bool>>| {
                let mut z = vec![vec![false; n]; n];
                for (i, row) in z.iter_mut().enumerate() {
                    for (j, cell) in row.iter_mut().enumerate() {
                        *cell = (0..n).any(|k| x[i][k] && y[k][j]);
                    }
                }
                z
            };
            let is_zero = |x: &Vec<Vec<bool>>| x.iter().all(|r| r.iter().all(|&b| !b));
            let combinatorial = if is_zero(&pattern) {
                Some(0)
            } else {
                let mut acc = pattern.clone();
                let mut idx = None;
                for k in 2..=n {
                    acc = bool_mul(&acc, &pattern);
                    if is_zero(&acc) {
                        idx = Some(k);
                        break;
                    }
                }
                idx
            };
            let p = operator_profile(&a, DEFAULT_TOL);
            prop_assert_eq!(p.nilpotency, combinatorial);
        }
    }
}
