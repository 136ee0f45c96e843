//! Decompose the algebra of a weighted multigraph by both routes and show
//! the embedding chain of the incremental route.

use freedim::decompose::{compare_routes, decompose_incremental_default, embedding_parameter_chain, BaseProjection};
use freedim::graph::WeightedGraph;
use freedim::scalar::Scalar;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut g = WeightedGraph::new();
    g.add_vertex("a", Scalar::ratio(1, 2))?;
    g.add_vertex("b", Scalar::ratio(1, 10))?;
    g.add_vertex("c", Scalar::ratio(2, 5))?;
    g.add_vertex("d", Scalar::ratio(1, 5))?;
    g.add_edge("a", "b", 1)?;
    g.add_edge("b", "c", 1)?;
    g.add_edge("c", "d", 2)?;

    let routes = compare_routes(&g, None)?;
    let d = routes.direct.factor().expect("at least two edge units");
    println!("direct:      {d}");
    println!("incremental: {}", routes.incremental.as_ref().expect("factor"));
    println!("routes agree: {}", routes.agree());
    println!("atoms match the boundary set: {}", d.atoms_unnormalized() == g.boundary_set());

    let (_, chain) = decompose_incremental_default(&g)?;
    for entry in &chain {
        let ids: Vec<&str> = entry.vertices.iter().map(|&v| g.id(v)).collect();
        println!("  {:?}: {}", ids, entry.decomposition);
    }
    let params = embedding_parameter_chain(&chain, &BaseProjection::FactorSupport)?;
    let shown: Vec<String> = params.iter().map(ToString::to_string).collect();
    println!("parameters after compressing to the base factor: {}", shown.join(" ≤ "));
    Ok(())
}
