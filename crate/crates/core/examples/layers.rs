//! The building blocks on one hand-parsed sentence: dependency adjacency in
//! both flavors, position weights, a graph convolution and aspect attention.
//!
//! ```text
//! cargo run --example layers
//! ```

use asgcn::autodiff::{Array, Graph};
use asgcn::data::{AdjacencyMatrix, Flavor, Span};
use asgcn::layers::{aspect_attention, aspect_mask, gcn_layer, position_transform, position_weights, GcnLayer};

fn show(name: &str, a: &AdjacencyMatrix) {
    println!("{name} ({} nonzeros, symmetric: {})", a.nonzeros(), a.is_symmetric());
    for i in 0..a.n() {
        let row: Vec<String> = (0..a.n()).map(|j| format!("{}", a.get(i, j))).collect();
        println!("  {}", row.join(" "));
    }
}

fn main() -> asgcn::Result<()> {
    // "the pasta was great but service slow"
    let tokens = ["the", "pasta", "was", "great", "but", "service", "slow"];
    let heads = [Some(1), Some(3), Some(3), None, Some(3), Some(6), Some(3)];
    let aspect = Span::new(1, 2);
    let n = tokens.len();

    let dg = AdjacencyMatrix::build(&heads, Flavor::Dg)?;
    let dt = AdjacencyMatrix::build(&heads, Flavor::Dt)?;
    show("undirected graph", &dg);
    show("directed tree", &dt);

    let q = position_weights(n, aspect)?;
    println!("position weights: {}", q.iter().map(|w| format!("{w:.3}")).collect::<Vec<_>>().join(" "));

    // Pretend the encoder produced one-hot rows so the layers are easy to follow.
    let mut g = Graph::new();
    let hc = g.constant(Array::identity(n));
    let weighted = position_transform(&mut g, hc, aspect, n)?;
    let layer = GcnLayer { weight: g.constant(Array::identity(n)), bias: g.constant(Array::zeros(&[n])) };
    let adj = g.constant(dg.to_array());
    let h = gcn_layer(&mut g, weighted, adj, &layer)?;
    let keys = aspect_mask(&mut g, h, aspect)?;
    let (_, alpha) = aspect_attention(&mut g, hc, keys, n)?;

    println!("attention over the sentence for aspect `{}`:", tokens[aspect.from]);
    for (tok, a) in tokens.iter().zip(g.value(alpha).data()) {
        println!("  {tok:>8} {a:.4} {}", "#".repeat((a * 60.0).round() as usize));
    }
    Ok(())
}
