//! Reverse-mode differentiation on a small graph, checked against finite
//! differences.
//!
//! ```text
//! cargo run --example autodiff
//! ```

use asgcn::autodiff::{Array, Graph};
use asgcn::gradcheck;

fn main() -> asgcn::Result<()> {
    // loss = Σ softmax(tanh(x·W + b)) ⊙ t
    let x = Array::from_rows(&[[0.5, -1.0], [2.0, 0.25]])?;
    let w = Array::from_rows(&[[0.1, -0.3, 0.7], [0.4, 0.2, -0.5]])?;
    let b = Array::vector(vec![0.0, 0.1, -0.1]);
    let target = Array::from_rows(&[[1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])?;

    let mut g = Graph::new();
    let (tx, tw, tb) = (g.variable(x.clone()), g.variable(w.clone()), g.variable(b.clone()));
    let tt = g.constant(target.clone());
    let z = g.matmul(tx, tw)?;
    let z = g.add(z, tb)?;
    let z = g.tanh(z);
    let p = g.softmax(z)?;
    let picked = g.mul(p, tt)?;
    let loss = g.sum(picked);
    g.backward(loss)?;

    println!("loss       = {:.6}", g.value(loss).data()[0]);
    println!("dloss/dW   = {:?}", g.grad(tw).unwrap());
    println!("dloss/db   = {:?}", g.grad(tb).unwrap());
    println!("target has no gradient: {}", g.grad(tt).is_none());

    // The same function rebuilt from leaves, compared element by element.
    let report = gradcheck::check(&[x, w, b], gradcheck::STEP, |g, t| {
        let tt = g.constant(target.clone());
        let z = g.matmul(t[0], t[1])?;
        let z = g.add(z, t[2])?;
        let z = g.tanh(z);
        let p = g.softmax(z)?;
        let picked = g.mul(p, tt)?;
        Ok(g.sum(picked))
    })?;
    println!(
        "gradient check: {} elements, max relative error {:.2e} (input {}, element {})",
        report.checked, report.max_rel_err, report.worst.0, report.worst.1
    );
    assert!(report.max_rel_err < 1e-6);
    Ok(())
}
