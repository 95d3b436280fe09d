//! Finite-difference weight generation on arbitrary node sets (Fornberg's
//! recurrence), used for both the virtual stencils of the patch backend and
//! the radial grids of the collar discretization.

/// Weights for derivatives 0..=m at evaluation point `z` from samples at `x`.
///
/// Returns `w[k][j]` such that `f^(k)(z) ~ sum_j w[k][j] f(x[j])`.
pub fn fd_weights(z: f64, x: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    assert!(n > m, "need more than m+1 nodes");
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Smallest odd tap count giving accuracy `acc` for the k-th derivative on a
/// symmetric stencil.
pub fn centered_taps(k: usize, acc: usize) -> usize {
    let mut n = k + acc - 1;
    if n % 2 == 0 {
        n += 1;
    }
    n.max(k + 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn classic_central_weights() {
        let x: Vec<f64> = vec![-2.0, -1.0, 0.0, 1.0, 2.0];
        let w = fd_weights(0.0, &x, 2);
        // order-4 first derivative: (1/12)(-f2 + 8f1 - 8f-1 + f-2)
        assert_relative_eq!(w[1][0], 1.0 / 12.0, epsilon = 1e-12);
        assert_relative_eq!(w[1][1], -8.0 / 12.0, epsilon = 1e-12);
        assert_relative_eq!(w[1][3], 8.0 / 12.0, epsilon = 1e-12);
        // order-4 second derivative center coefficient -30/12
        assert_relative_eq!(w[2][2], -30.0 / 12.0, epsilon = 1e-12);
    }

    #[test]
    fn one_sided_convergence() {
        let x: Vec<f64> = (0..7).map(|i| i as f64 * 0.01).collect();
        let w = fd_weights(0.0, &x, 3);
        let f = |t: f64| (2.0 * t).exp();
        let d3: f64 = x.iter().zip(&w[3]).map(|(t, wj)| wj * f(*t)).sum();
        assert_relative_eq!(d3, 8.0, max_relative = 1e-4);
    }
}
