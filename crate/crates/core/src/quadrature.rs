//! Gauss–Hermite rules.

use nalgebra::DMatrix;

/// N-point Gauss–Hermite rule for the weight `e^{-t²}`.
///
/// Nodes come from the Jacobi matrix eigenvalues and are then polished by
/// Newton iteration on the normalized Hermite recurrence. Alongside the
/// classical weights the rule keeps `w_i e^{t_i²}`, which is what one needs to
/// integrate functions that already carry their own Gaussian decay and which
/// stays representable when the classical weight underflows.
#[derive(Clone, Debug)]
pub struct GaussHermite {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    flat_weights: Vec<f64>,
}

impl GaussHermite {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Hermite rule needs at least one node");
        let mut jacobi = DMatrix::<f64>::zeros(n, n);
        for k in 1..n {
            let off = (k as f64 / 2.0).sqrt();
            jacobi[(k, k - 1)] = off;
            jacobi[(k - 1, k)] = off;
        }
        let mut nodes: Vec<f64> = jacobi.symmetric_eigenvalues().iter().copied().collect();
        nodes.sort_by(|a, b| a.partial_cmp(b).unwrap());

        let nf = n as f64;
        let mut weights = Vec::with_capacity(n);
        let mut flat_weights = Vec::with_capacity(n);
        for t in nodes.iter_mut() {
            for _ in 0..20 {
                let (pn, pn1, _) = normalized_pair(n, *t);
                let step = pn / ((2.0 * nf).sqrt() * pn1);
                *t -= step;
                if step.abs() <= 1e-16 * t.abs().max(1.0) {
                    break;
                }
            }
            let (_, pn1, log_scale) = normalized_pair(n, *t);
            // ψ_{n-1}(t)² = (pn1 · e^{log_scale})² · e^{-t²}
            let log_poly_sq = 2.0 * (pn1.abs().ln() + log_scale);
            let log_flat = -nf.ln() - log_poly_sq + (*t) * (*t);
            flat_weights.push(log_flat.exp());
            weights.push((-nf.ln() - log_poly_sq).exp());
        }
        GaussHermite { nodes, weights, flat_weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights for `∫ f(t) e^{-t²} dt ≈ Σ w_i f(t_i)`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weights for `∫ g(t) dt ≈ Σ w_i e^{t_i²} g(t_i)`.
    pub fn flat_weights(&self) -> &[f64] {
        &self.flat_weights
    }

    /// `(x_i, W_i)` with `x_i = √h t_i` and `W_i = √h w_i e^{t_i²}`, for
    /// integrating functions that decay like `e^{-x²/h}` over the real line.
    pub fn scaled(&self, h: f64) -> Vec<(f64, f64)> {
        let s = h.sqrt();
        self.nodes
            .iter()
            .zip(&self.flat_weights)
            .map(|(t, w)| (s * t, s * w))
            .collect()
    }

    pub fn max_node(&self) -> f64 {
        self.nodes.last().copied().unwrap_or(0.0)
    }
}

/// Polynomial parts of the normalized Hermite functions of orders `n` and `n-1`
/// at `t`, sharing the returned logarithmic scale: `ψ_k(t) = p_k e^{scale} e^{-t²/2}`.
fn normalized_pair(n: usize, t: f64) -> (f64, f64, f64) {
    let mut prev = 0.0;
    let mut cur = std::f64::consts::PI.powf(-0.25);
    let mut log_scale = 0.0;
    for k in 0..n {
        let kf = k as f64;
        let next = (2.0 / (kf + 1.0)).sqrt() * t * cur - (kf / (kf + 1.0)).sqrt() * prev;
        prev = cur;
        cur = next;
        let mag = cur.abs();
        if mag > 1e100 {
            prev /= mag;
            cur /= mag;
            log_scale += mag.ln();
        }
    }
    (cur, prev, log_scale)
}
