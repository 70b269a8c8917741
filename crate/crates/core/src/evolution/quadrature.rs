//! Composite Simpson weights on arbitrary strictly increasing nodes.

/// Quadrature weights for `int f` over `[nodes[0], nodes[last]]` using the
/// stored nodes only: quadratic panels over consecutive interval pairs, and,
/// when the interval count is odd, the final interval integrated under the
/// quadratic through the last three nodes. Two nodes fall back to the
/// trapezoid; fewer than two give zero weights.
pub fn simpson_weights(nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    let mut w = vec![0.0f64; m];
    if m < 2 {
        return w;
    }
    if m == 2 {
        let h = nodes[1] - nodes[0];
        w[0] = 0.5 * h;
        w[1] = 0.5 * h;
        return w;
    }
    let intervals = m - 1;
    let paired = intervals - (intervals % 2);
    let mut i = 0usize;
    while i < paired {
        let (x0, x1, x2) = (nodes[i], nodes[i + 1], nodes[i + 2]);
        let h0 = x1 - x0;
        let h1 = x2 - x1;
        let big = h0 + h1;
        w[i] += big * (2.0 * h0 - h1) / (6.0 * h0);
        w[i + 1] += big * big * big / (6.0 * h0 * h1);
        w[i + 2] += big * (2.0 * h1 - h0) / (6.0 * h1);
        i += 2;
    }
    if intervals % 2 == 1 {
        // quadratic through the last three nodes, integrated over the final
        // interval only; avoids evaluating the integrand off the schedule
        let (a, b, c) = (nodes[m - 3], nodes[m - 2], nodes[m - 1]);
        let g0 = b - a;
        let g1 = c - b;
        w[m - 3] += -g1 * g1 * g1 / (6.0 * g0 * (g0 + g1));
        w[m - 2] += g1 * (3.0 * g0 + g1) / (6.0 * g0);
        w[m - 1] += g1 * (2.0 * g1 + 3.0 * g0) / (6.0 * (g0 + g1));
    }
    w
}
