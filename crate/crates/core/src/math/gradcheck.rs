//! Central finite-difference checking of tape gradients.

use crate::error::{CoreError, Result};
use crate::math::params::{ParamId, ParamStore};
use crate::math::tape::{NodeId, Tape};

/// Default perturbation step.
pub const DEFAULT_EPS: f64 = 1e-5;

/// Compares analytic gradients against central finite differences.
///
/// `build` constructs the scalar loss on a fresh tape from the current store
/// contents. Returns the maximum over all checked parameter components of
/// |analytic - numeric| / max(1, |numeric|).
pub fn grad_check<F>(store: &mut ParamStore, params: &[ParamId], mut build: F, eps: f64) -> Result<f64>
where
    F: FnMut(&mut Tape, &ParamStore) -> Result<NodeId>,
{
    if eps <= 0.0 {
        return Err(CoreError::InvalidArgument("eps must be positive".into()));
    }

    let mut tape = Tape::new();
    let loss_node = build(&mut tape, store)?;
    let loss = tape.scalar_value(loss_node);
    if !loss.is_finite() {
        return Err(CoreError::NonFinite("loss in grad_check".into()));
    }
    let grads = tape.backward(loss_node);
    let analytic: Vec<Vec<f64>> = params
        .iter()
        .map(|&p| {
            grads
                .param(p)
                .map(|g| g.to_vec())
                .unwrap_or_else(|| vec![0.0; store.values(p).len()])
        })
        .collect();

    let mut eval = |tape: &mut Tape, store: &ParamStore| -> Result<f64> {
        tape.reset();
        let node = build(tape, store)?;
        let v = tape.scalar_value(node);
        if !v.is_finite() {
            return Err(CoreError::NonFinite("loss in grad_check".into()));
        }
        Ok(v)
    };

    let mut max_rel = 0.0f64;
    for (pi, &p) in params.iter().enumerate() {
        for k in 0..store.values(p).len() {
            let orig = store.values(p)[k];
            store.values_mut(p)[k] = orig + eps;
            let plus = eval(&mut tape, store)?;
            store.values_mut(p)[k] = orig - eps;
            let minus = eval(&mut tape, store)?;
            store.values_mut(p)[k] = orig;

            let numeric = (plus - minus) / (2.0 * eps);
            let rel = (analytic[pi][k] - numeric).abs() / numeric.abs().max(1.0);
            if rel > max_rel {
                max_rel = rel;
            }
        }
    }
    Ok(max_rel)
}
