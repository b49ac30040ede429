use nalgebra::{DMatrix, SymmetricEigen};

/// Gauss-Laguerre nodes and weights for `∫_0^∞ e^{-u} g(u) du`, ascending in `u`.
///
/// Golub-Welsch: eigenvalues of the Jacobi matrix are the nodes, squared first
/// eigenvector components are the weights (the weight function has unit mass).
pub fn gauss_laguerre(n: usize) -> Vec<(f64, f64)> {
    assert!(n >= 1, "at least one node required");
    let jacobi = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            (2 * i + 1) as f64
        } else if i + 1 == j {
            j as f64
        } else if j + 1 == i {
            i as f64
        } else {
            0.0
        }
    });
    let eig = SymmetricEigen::new(jacobi);
    let mut rule: Vec<(f64, f64)> = (0..n)
        .map(|k| {
            let v0 = eig.eigenvectors[(0, k)];
            (eig.eigenvalues[k], v0 * v0)
        })
        .collect();
    rule.sort_by(|a, b| a.0.total_cmp(&b.0));
    rule
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrates_monomials() {
        // ∫ u^k e^{-u} du = k!
        let rule = gauss_laguerre(20);
        let mut fact = 1.0;
        for k in 0..20usize {
            if k > 0 {
                fact *= k as f64;
            }
            let approx: f64 = rule.iter().map(|&(u, w)| w * u.powi(k as i32)).sum();
            assert!(((approx - fact) / fact).abs() < 1e-10, "k={k}: {approx} vs {fact}");
        }
    }

    #[test]
    fn weights_sum_to_one() {
        for n in [1, 5, 64, 96] {
            let total: f64 = gauss_laguerre(n).iter().map(|p| p.1).sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n}: {total}");
        }
    }

    #[test]
    fn single_node_rule() {
        assert_eq!(gauss_laguerre(1), vec![(1.0, 1.0)]);
    }
}
