//! Central finite-difference stencils (Fornberg's recursion) and mixed
//! partial derivatives built from their tensor products.

/// Weights of the centered stencil on offsets `-p..=p` approximating the
/// `order`-th derivative with the given even `accuracy`.
pub fn central_weights(order: usize, accuracy: usize) -> Vec<f64> {
    let half = (order + accuracy - 1) / 2;
    let nodes: Vec<f64> = (-(half as i64)..=half as i64).map(|i| i as f64).collect();
    fornberg(&nodes, 0.0, order)
}

// Weights for the m-th derivative at x0 from arbitrary nodes.
fn fornberg(nodes: &[f64], x0: f64, m: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Step that keeps round-off of an `order`-th difference below `tolerance`
/// relative to the function scale, never smaller than `base` (both relative
/// to `scale`).
pub fn step_for(order: usize, base: f64, tolerance: f64, scale: f64) -> f64 {
    if order == 0 {
        return base * scale;
    }
    let floor = (2f64.powi(order as i32) * f64::EPSILON / tolerance).powf(1.0 / order as f64);
    scale * base.max(floor)
}

/// Mixed partial `∂^orders f(x)` with a common step `h` along every axis.
pub fn mixed_partial(
    f: &dyn Fn(&[f64]) -> f64,
    x: &[f64],
    orders: &[usize],
    h: f64,
    accuracy: usize,
) -> f64 {
    let stencils: Vec<Vec<f64>> = orders.iter().map(|&k| central_weights(k, accuracy)).collect();
    let mut point = x.to_vec();
    let mut total = 0.0;
    let mut idx = vec![0usize; orders.len()];
    loop {
        let mut weight = 1.0;
        for (axis, s) in stencils.iter().enumerate() {
            let half = (s.len() / 2) as f64;
            weight *= s[idx[axis]];
            point[axis] = x[axis] + (idx[axis] as f64 - half) * h;
        }
        if weight != 0.0 {
            total += weight * f(&point);
        }
        // odometer over the stencil grid
        let mut axis = 0;
        loop {
            if axis == orders.len() {
                let scale = h.powi(orders.iter().sum::<usize>() as i32);
                return total / scale;
            }
            idx[axis] += 1;
            if idx[axis] < stencils[axis].len() {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_stencils() {
        let w = central_weights(1, 2);
        assert_eq!(w.len(), 3);
        assert!((w[0] + 0.5).abs() < 1e-15 && w[1].abs() < 1e-15 && (w[2] - 0.5).abs() < 1e-15);
        let w = central_weights(2, 4);
        let expected = [-1.0 / 12.0, 4.0 / 3.0, -5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_of_polynomials_and_exponentials() {
        let f = |x: &[f64]| x[0].powi(3) * x[1].powi(2);
        // ∂x ∂y (x³y²) = 6x²y
        let d = mixed_partial(&f, &[1.5, -0.5], &[1, 1], 1e-3, 4);
        assert!((d - 6.0 * 2.25 * -0.5).abs() < 1e-8);
        let e = |x: &[f64]| x[0].exp();
        for k in 0..=5 {
            let h = step_for(k, 2f64.powi(-8), 1e-10, 1.0);
            let d = mixed_partial(&e, &[0.3], &[k], h, 4);
            assert!((d - 0.3f64.exp()).abs() < 1e-3, "order {k}: {d}");
        }
    }
}
