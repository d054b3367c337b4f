//! Central finite-difference gradient checking.
//!
//! Only forward values are used to build the numerical estimate, so the check
//! is independent of every backward rule it validates.

use crate::autodiff::{Array, Graph, Tensor};
use crate::error::{Error, Result};

/// Default step for central differences.
pub const STEP: f64 = 1e-5;

/// Denominator floor: near-zero gradients are compared absolutely.
const REL_FLOOR: f64 = 1e-4;

#[derive(Debug, Clone)]
pub struct GradCheck {
    pub max_rel_err: f64,
    /// (input index, element index) of the worst element.
    pub worst: (usize, usize),
    pub analytic: f64,
    pub numeric: f64,
    pub checked: usize,
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(REL_FLOOR)
}

/// Compares analytic gradients of a scalar function of `inputs` with central
/// differences of step `h`. `f` must rebuild the whole computation from the
/// given leaves.
pub fn check<F>(inputs: &[Array], h: f64, f: F) -> Result<GradCheck>
where
    F: Fn(&mut Graph, &[Tensor]) -> Result<Tensor>,
{
    let eval = |values: &[Array]| -> Result<f64> {
        let mut g = Graph::new();
        let leaves: Vec<Tensor> = values.iter().map(|v| g.constant(v.clone())).collect();
        let out = f(&mut g, &leaves)?;
        scalar(&g, out)
    };

    let mut g = Graph::new();
    let leaves: Vec<Tensor> = inputs.iter().map(|v| g.variable(v.clone())).collect();
    let out = f(&mut g, &leaves)?;
    g.backward(out)?;

    let mut report = GradCheck { max_rel_err: 0.0, worst: (0, 0), analytic: 0.0, numeric: 0.0, checked: 0 };
    let mut probe = inputs.to_vec();
    for (k, leaf) in leaves.iter().enumerate() {
        let analytic = g.grad(*leaf).map(<[f64]>::to_vec).unwrap_or_else(|| vec![0.0; inputs[k].len()]);
        for (i, &grad) in analytic.iter().enumerate() {
            let orig = inputs[k].data()[i];
            probe[k].data_mut()[i] = orig + h;
            let plus = eval(&probe)?;
            probe[k].data_mut()[i] = orig - h;
            let minus = eval(&probe)?;
            probe[k].data_mut()[i] = orig;
            let numeric = (plus - minus) / (2.0 * h);
            let err = relative_error(grad, numeric);
            if err > report.max_rel_err || report.checked == 0 {
                report.max_rel_err = err.max(report.max_rel_err);
                report.worst = (k, i);
                report.analytic = grad;
                report.numeric = numeric;
            }
            report.checked += 1;
        }
    }
    Ok(report)
}

fn scalar(g: &Graph, t: Tensor) -> Result<f64> {
    let v = g.value(t);
    if v.len() != 1 {
        return Err(Error::NonScalarLoss(v.shape().to_vec()));
    }
    Ok(v.data()[0])
}
