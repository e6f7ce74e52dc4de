/// A quadrature rule on the reference triangle in barycentric coordinates.
/// Weights sum to one, so `|T| Σ wᵢ f(xᵢ)` approximates `∫_T f`.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    /// Total polynomial degree integrated exactly.
    pub degree: usize,
}

/// A Gauss rule on `[0, 1]` with weights summing to one.
#[derive(Debug, Clone)]
pub struct EdgeRule {
    pub points: Vec<f64>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    /// Six-point symmetric rule exact to degree 4.
    pub fn degree4() -> Self {
        const A1: f64 = 0.445_948_490_915_964_886_318_329_253_883;
        const W1: f64 = 0.223_381_589_678_011_465_695_007_008_433;
        const A2: f64 = 0.091_576_213_509_770_743_459_571_463_402_2;
        const W2: f64 = 0.109_951_743_655_321_87;
        let orbit = |a: f64| {
            let b = 1.0 - 2.0 * a;
            [[a, a, b], [a, b, a], [b, a, a]]
        };
        let points: Vec<[f64; 3]> = orbit(A1).into_iter().chain(orbit(A2)).collect();
        let mut weights = vec![W1, W1, W1, W2, W2, W2];
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        Self { points, weights, degree: 4 }
    }

    /// Collapsed tensor Gauss–Legendre rule with `n²` points, exact to
    /// degree `2n − 2`.
    pub fn collapsed_gauss(n: usize) -> Self {
        let g = EdgeRule::gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for (&u, &wu) in g.points.iter().zip(&g.weights) {
            for (&v, &wv) in g.points.iter().zip(&g.weights) {
                let l1 = u;
                let l2 = v * (1.0 - u);
                points.push([1.0 - l1 - l2, l1, l2]);
                // reference area 1/2 is normalized away
                weights.push(2.0 * wu * wv * (1.0 - u));
            }
        }
        Self {
            points,
            weights,
            degree: 2 * n - 2,
        }
    }

    /// High-order rule used for reference integrals of smooth data.
    pub fn fine() -> Self {
        Self::collapsed_gauss(6)
    }
}

impl Default for QuadratureRule {
    fn default() -> Self {
        Self::degree4()
    }
}

impl EdgeRule {
    /// Three-point Gauss rule exact to degree 5.
    pub fn gauss3() -> Self {
        let r = 15f64.sqrt() / 10.0;
        Self {
            points: vec![0.5 - r, 0.5, 0.5 + r],
            weights: vec![5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0],
            degree: 5,
        }
    }

    /// `n`-point Gauss–Legendre rule mapped to `[0, 1]`.
    pub fn gauss_legendre(n: usize) -> Self {
        assert!(n >= 1, "at least one point");
        let mut points = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        for i in 0..n {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                // three-term recurrence for P_n and its derivative
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                let pn = if n == 1 { x } else { p1 };
                let pm = if n == 1 { 1.0 } else { p0 };
                dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
                let step = pn / dp;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            points.push(0.5 * (1.0 - x));
            weights.push(1.0 / ((1.0 - x * x) * dp * dp));
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| points[a].total_cmp(&points[b]));
        Self {
            points: order.iter().map(|&i| points[i]).collect(),
            weights: order.iter().map(|&i| weights[i]).collect(),
            degree: 2 * n - 1,
        }
    }
}

impl Default for EdgeRule {
    fn default() -> Self {
        Self::gauss3()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `∫_ref λ₁^a λ₂^b / |ref| = 2 a! b! / (a+b+2)!`
    fn monomial_exact(a: u32, b: u32) -> f64 {
        let fact = |n: u32| (1..=n).map(f64::from).product::<f64>();
        2.0 * fact(a) * fact(b) / fact(a + b + 2)
    }

    fn check_exactness(rule: &QuadratureRule) {
        assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        for a in 0..=rule.degree as u32 {
            for b in 0..=(rule.degree as u32 - a) {
                let q: f64 = rule
                    .points
                    .iter()
                    .zip(&rule.weights)
                    .map(|(p, w)| w * p[1].powi(a as i32) * p[2].powi(b as i32))
                    .sum();
                let exact = monomial_exact(a, b);
                assert!((q - exact).abs() < 1e-14, "degree ({a},{b}): {q} vs {exact}");
            }
        }
    }

    #[test]
    fn triangle_rules_are_exact_to_stated_degree() {
        check_exactness(&QuadratureRule::degree4());
        check_exactness(&QuadratureRule::fine());
        check_exactness(&QuadratureRule::collapsed_gauss(3));
    }

    #[test]
    fn degree4_is_not_exact_to_degree6() {
        let r = QuadratureRule::degree4();
        let q: f64 = r.points.iter().zip(&r.weights).map(|(p, w)| w * p[1].powi(6)).sum();
        assert!((q - monomial_exact(6, 0)).abs() > 1e-8);
    }

    #[test]
    fn edge_rules_are_exact() {
        for rule in [EdgeRule::gauss3(), EdgeRule::gauss_legendre(3), EdgeRule::gauss_legendre(7), EdgeRule::gauss_legendre(1)] {
            assert!((rule.weights.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            for p in 0..=rule.degree as i32 {
                let q: f64 = rule.points.iter().zip(&rule.weights).map(|(x, w)| w * x.powi(p)).sum();
                assert!((q - 1.0 / (p + 1) as f64).abs() < 1e-15, "power {p}");
            }
        }
        let (a, b) = (EdgeRule::gauss3(), EdgeRule::gauss_legendre(3));
        for i in 0..3 {
            assert!((a.points[i] - b.points[i]).abs() < 1e-15 && (a.weights[i] - b.weights[i]).abs() < 1e-15);
        }
    }
}
