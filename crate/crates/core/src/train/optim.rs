use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::ParameterStore;

/// Adam with bias correction.
#[derive(Clone, Debug)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: BTreeMap<String, Vec<f64>>,
    v: BTreeMap<String, Vec<f64>>,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Self { lr, beta1: 0.9, beta2: 0.999, eps: 1e-8, step: 0, m: BTreeMap::new(), v: BTreeMap::new() }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    pub fn moments(&self, name: &str) -> Option<(&[f64], &[f64])> {
        Some((self.m.get(name)?, self.v.get(name)?))
    }

    /// Applies one update to every parameter named in `grads`, then clears them.
    /// A non-finite gradient aborts before anything is modified.
    pub fn step(&mut self, params: &mut ParameterStore, grads: &mut BTreeMap<String, Vec<f64>>) -> Result<()> {
        for (name, g) in grads.iter() {
            let p = params.get(name).ok_or_else(|| Error::Config(format!("gradient for unknown parameter {name}")))?;
            if p.len() != g.len() {
                return Err(Error::Shape(format!("{name}: gradient of {} for {} values", g.len(), p.len())));
            }
            if let Some(i) = g.iter().position(|x| !x.is_finite()) {
                return Err(Error::NonFinite(format!("gradient of {name}[{i}] is {}", g[i])));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let c1 = 1.0 - self.beta1.powi(t);
        let c2 = 1.0 - self.beta2.powi(t);
        let (b1, b2, lr, eps) = (self.beta1, self.beta2, self.lr, self.eps);
        for (name, g) in grads.iter() {
            let p = params.get_mut(name).expect("checked above").data_mut();
            let m = self.m.entry(name.clone()).or_insert_with(|| vec![0.0; g.len()]);
            let v = self.v.entry(name.clone()).or_insert_with(|| vec![0.0; g.len()]);
            for i in 0..g.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                p[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + eps);
            }
        }
        grads.clear();
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::autodiff::Array;

    fn one(value: f64) -> ParameterStore {
        let mut s = ParameterStore::new();
        s.insert("w", Array::vector(vec![value]));
        s
    }

    fn grad(g: f64) -> BTreeMap<String, Vec<f64>> {
        BTreeMap::from([("w".to_owned(), vec![g])])
    }

    #[test]
    fn first_step_moves_by_learning_rate() {
        let mut p = one(0.5);
        let mut adam = Adam::new(0.001);
        let mut g = grad(1.0);
        adam.step(&mut p, &mut g).unwrap();
        assert!(g.is_empty());
        // m̂/√v̂ = 1 exactly, so only ε separates the step from lr
        assert_abs_diff_eq!(p.get("w").unwrap().data()[0], 0.5 - 0.001, epsilon = 1e-10);
    }

    #[test]
    fn zero_gradient_leaves_parameter_and_decays_moments() {
        let mut p = one(0.5);
        let mut adam = Adam::new(0.001);
        adam.step(&mut p, &mut grad(2.0)).unwrap();
        let before = p.get("w").unwrap().data()[0];
        let (m0, v0) = adam.moments("w").map(|(m, v)| (m[0], v[0])).unwrap();
        let mut q = p.clone();
        // first moment still nonzero, so use a fresh optimizer to isolate the zero case
        let mut fresh = Adam::new(0.001);
        fresh.step(&mut q, &mut grad(0.0)).unwrap();
        assert_eq!(q.get("w").unwrap().data()[0], before);
        adam.step(&mut p, &mut grad(0.0)).unwrap();
        let (m1, v1) = adam.moments("w").map(|(m, v)| (m[0], v[0])).unwrap();
        assert_abs_diff_eq!(m1, 0.9 * m0, epsilon = 1e-15);
        assert_abs_diff_eq!(v1, 0.999 * v0, epsilon = 1e-15);
    }

    #[test]
    fn repeated_steps_are_not_idempotent() {
        let mut p = one(0.0);
        let mut adam = Adam::new(0.01);
        adam.step(&mut p, &mut grad(1.0)).unwrap();
        let a = p.get("w").unwrap().data()[0];
        adam.step(&mut p, &mut grad(1.0)).unwrap();
        let b = p.get("w").unwrap().data()[0];
        assert_ne!(a, b);
        assert_eq!(adam.steps(), 2);
    }

    #[test]
    fn nan_gradient_names_parameter() {
        let mut p = one(1.0);
        let err = Adam::new(0.1).step(&mut p, &mut grad(f64::NAN)).unwrap_err();
        assert!(err.to_string().contains("w[0]"), "{err}");
        assert_eq!(p.get("w").unwrap().data()[0], 1.0);
    }
}
