use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::PolicyParameters;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AdamOptions {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    /// Global gradient-norm bound; 0 disables clipping.
    pub grad_clip: f64,
}

impl Default for AdamOptions {
    fn default() -> Self {
        AdamOptions {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            grad_clip: 1.0,
        }
    }
}

/// One bias-corrected Adam update with the encoder and decoder learning
/// rates stored in `params.adam`. Returns the gradient norm before clipping.
pub fn optimizer_step(
    params: &mut PolicyParameters,
    grads: &[f64],
    opts: &AdamOptions,
) -> Result<f64> {
    if grads.len() != params.len() {
        return Err(Error::shape(format!(
            "{} gradients for {} parameters",
            grads.len(),
            params.len()
        )));
    }
    if let Some(i) = grads.iter().position(|g| !g.is_finite()) {
        let block = params
            .layout
            .blocks
            .iter()
            .find(|b| b.range().contains(&i))
            .map_or("?", |b| b.name.as_str());
        return Err(Error::Training(format!(
            "non-finite gradient {} at index {i} ({block}, step {})",
            grads[i], params.adam.step
        )));
    }
    let norm = grads.iter().map(|g| g * g).sum::<f64>().sqrt();
    let scale = if opts.grad_clip > 0.0 && norm > opts.grad_clip {
        opts.grad_clip / norm
    } else {
        1.0
    };
    let split = params.layout.block("dec.phi1").offset;
    let adam = &mut params.adam;
    adam.step += 1;
    let t = adam.step as i32;
    let c1 = 1.0 - opts.beta1.powi(t);
    let c2 = 1.0 - opts.beta2.powi(t);
    for (i, &raw) in grads.iter().enumerate() {
        let g = raw * scale;
        let m = opts.beta1 * adam.m[i] + (1.0 - opts.beta1) * g;
        let v = opts.beta2 * adam.v[i] + (1.0 - opts.beta2) * g * g;
        adam.m[i] = m;
        adam.v[i] = v;
        let lr = if i < split { adam.lr_enc } else { adam.lr_dec };
        params.values[i] -= lr * (m / c1) / ((v / c2).sqrt() + opts.eps);
    }
    if let Some(i) = params.values.iter().position(|v| !v.is_finite()) {
        return Err(Error::Training(format!(
            "parameter {i} became non-finite at step {}",
            params.adam.step
        )));
    }
    Ok(norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::PolicyConfig;

    fn tiny() -> PolicyParameters {
        PolicyParameters::init(
            PolicyConfig {
                input_dim: 1,
                hidden: 1,
                heads: 1,
                layers: 1,
                ..Default::default()
            },
            0,
        )
        .unwrap()
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut p = tiny();
        let before = p.values.clone();
        let g = vec![0.0; p.len()];
        optimizer_step(&mut p, &g, &AdamOptions::default()).unwrap();
        assert_eq!(p.values, before);
    }

    #[test]
    fn non_finite_gradient_is_rejected() {
        let mut p = tiny();
        let mut g = vec![0.0; p.len()];
        g[2] = f64::NAN;
        let err = optimizer_step(&mut p, &g, &AdamOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Training(ref m) if m.contains("index 2")));
    }

    #[test]
    fn quadratic_descent() {
        // f(θ) = θ0² + θ1² on the first two (encoder) entries only.
        let mut p = tiny();
        p.adam.lr_enc = 0.1;
        p.values[0] = 1.0;
        p.values[1] = -0.5;
        let opts = AdamOptions {
            grad_clip: 0.0,
            ..Default::default()
        };
        let grad = |p: &PolicyParameters| {
            let mut g = vec![0.0; p.len()];
            g[0] = 2.0 * p.values[0];
            g[1] = 2.0 * p.values[1];
            g
        };
        let g = grad(&p);
        optimizer_step(&mut p, &g, &opts).unwrap();
        assert!(p.values[0] < 1.0);
        for _ in 1..200 {
            let g = grad(&p);
            optimizer_step(&mut p, &g, &opts).unwrap();
        }
        assert!(
            p.values[0].abs() < 1e-3 && p.values[1].abs() < 1e-3,
            "{:?}",
            &p.values[..2]
        );
    }

    #[test]
    fn clipping_bounds_the_first_step() {
        let mut p = tiny();
        let before = p.values.clone();
        let g = vec![100.0; p.len()];
        optimizer_step(&mut p, &g, &AdamOptions::default()).unwrap();
        // first Adam step moves each entry by about its group learning rate
        let split = p.layout.block("dec.phi1").offset;
        for i in 0..p.len() {
            let lr = if i < split { 1e-3 } else { 1e-4 };
            assert!(((before[i] - p.values[i]) - lr).abs() < 1e-9 * lr.max(1.0) + 1e-9);
        }
    }
}
