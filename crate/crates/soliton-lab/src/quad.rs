//! Composite Gauss-Legendre quadrature, used to reconstruct soliton
//! potentials from their second derivative.

use std::sync::OnceLock;

/// Nodes and weights of the 16-point Gauss-Legendre rule on [-1, 1],
/// computed once by Newton iteration on the Legendre recurrence.
fn rule16() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre_rule(16))
}

fn gauss_legendre_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre recurrence: (k+1) P_{k+1} = (2k+1) x P_k − k P_{k−1}
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 1..n {
                let p2 = ((2 * k + 1) as f64 * x * p1 - k as f64 * p0) / (k + 1) as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = x;
        weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// ∫_a^b f, composite 16-point Gauss-Legendre over `panels` equal panels.
pub fn integrate<E>(
    f: &mut impl FnMut(f64) -> Result<f64, E>,
    a: f64,
    b: f64,
    panels: usize,
) -> Result<f64, E> {
    let (nodes, weights) = rule16();
    let panels = panels.max(1);
    let h = (b - a) / panels as f64;
    let mut total = 0.0;
    for p in 0..panels {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let half = 0.5 * h;
        let mut acc = 0.0;
        for (x, w) in nodes.iter().zip(weights) {
            acc += w * f(mid + half * x)?;
        }
        total += acc * half;
    }
    Ok(total)
}

/// Solve γ″ = u with γ(y0) = γ′(y0) = 0 at a single point:
/// γ(y) = ∫_{y0}^{y} (y − s) u(s) ds.
pub fn second_antiderivative<E>(
    u: &mut impl FnMut(f64) -> Result<f64, E>,
    y0: f64,
    y: f64,
    panels: usize,
) -> Result<f64, E> {
    integrate(&mut |s| Ok((y - s) * u(s)?), y0, y, panels)
}

#[cfg(test)]
mod tests {
    use super::*;

    type R = Result<f64, std::convert::Infallible>;

    #[test]
    fn polynomial_exactness() {
        // degree-31 polynomial is integrated exactly by one 16-point panel
        let mut f = |x: f64| -> R { Ok(x.powi(31) + 3.0 * x.powi(8)) };
        let got = integrate(&mut f, -1.0, 1.0, 1).unwrap();
        let expected = 2.0 * 3.0 / 9.0;
        assert!((got - expected).abs() < 1e-13);
    }

    #[test]
    fn smooth_integral() {
        let mut f = |x: f64| -> R { Ok((2.0 * x).exp()) };
        let got = integrate(&mut f, 0.0, 1.5, 4).unwrap();
        let expected = (3.0f64.exp() - 1.0) / 2.0;
        assert!((got - expected).abs() < 1e-13 * expected);
    }

    #[test]
    fn double_integration_of_exponential() {
        // γ″ = e^y with γ(0) = γ′(0) = 0 gives γ(y) = e^y − 1 − y
        let mut u = |s: f64| -> R { Ok(s.exp()) };
        for y in [-1.0, -0.3, 0.4, 1.7] {
            let got = second_antiderivative(&mut u, 0.0, y, 8).unwrap();
            let expected = y.exp() - 1.0 - y;
            assert!((got - expected).abs() < 1e-12, "at {y}: {got} vs {expected}");
        }
    }

    #[test]
    fn reversed_limits() {
        let mut f = |x: f64| -> R { Ok(x * x) };
        let fwd = integrate(&mut f, 0.0, 2.0, 3).unwrap();
        let rev = integrate(&mut f, 2.0, 0.0, 3).unwrap();
        assert!((fwd + rev).abs() < 1e-14);
    }
}
