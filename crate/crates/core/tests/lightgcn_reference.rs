mod common;

use common::{dense_propagation, Fixture};
use debias_rec::backbone::{effective_embeddings, init_embeddings, NormalizedGraph};
use debias_rec::{Backbone, HyperParams, Interaction, Table};

fn random_graph(f: &mut Fixture, nu: usize, ni: usize) -> Vec<Interaction> {
    let mut xs = Vec::new();
    for u in 0..nu as u32 {
        // some users stay isolated
        let k = f.below(4).min(ni);
        for i in f.distinct(ni, k) {
            xs.push(Interaction::positive(u, i, 0));
        }
    }
    xs
}

#[test]
fn propagation_matches_dense_reference() {
    let mut f = Fixture::new(21);
    for case in 0..40 {
        let nu = 1 + f.below(7);
        let ni = 1 + f.below(7);
        let d = 1 + f.below(4);
        let layers = f.below(4);
        let xs = random_graph(&mut f, nu, ni);
        let graph = NormalizedGraph::from_interactions(nu, ni, &xs);
        let users: Vec<f64> = (0..nu * d).map(|_| f.signed()).collect();
        let items: Vec<f64> = (0..ni * d).map(|_| f.signed()).collect();
        let (pu, pi) = graph.propagate(
            &Table::from_vec(nu, d, users.clone()).unwrap(),
            &Table::from_vec(ni, d, items.clone()).unwrap(),
            layers,
        );
        let edges: Vec<(u32, u32)> = xs.iter().map(|x| (x.user, x.item)).collect();
        let (ru, ri) = dense_propagation(nu, ni, &edges, &users, &items, d, layers);
        for (a, b) in pu.as_slice().iter().zip(&ru).chain(pi.as_slice().iter().zip(&ri)) {
            assert!((a - b).abs() < 1e-9, "case {case}: {a} vs {b}");
        }
    }
}

#[test]
fn duplicate_interactions_count_once() {
    let xs = vec![
        Interaction::positive(0, 0, 0),
        Interaction::positive(0, 0, 1),
        Interaction::positive(1, 0, 2),
    ];
    let graph = NormalizedGraph::from_interactions(2, 1, &xs);
    assert_eq!(graph.degree_item(), &[2]);
    assert_eq!(graph.degree_user(), &[1, 1]);
}

#[test]
fn mf_effective_embeddings_are_the_identity() {
    let emb = init_embeddings(6, 9, 5, 3, 0.1);
    let hp = HyperParams {
        backbone: Backbone::Mf,
        ..HyperParams::default()
    };
    assert_eq!(effective_embeddings(&emb, None, &hp).unwrap(), emb);
}

#[test]
fn lightgcn_propagates_both_pairs() {
    let mut f = Fixture::new(4);
    let xs = random_graph(&mut f, 5, 6);
    let graph = NormalizedGraph::from_interactions(5, 6, &xs);
    let emb = init_embeddings(5, 6, 3, 1, 0.1);
    let hp = HyperParams {
        backbone: Backbone::LightGcn,
        gcn_layers: 2,
        ..HyperParams::default()
    };
    let eff = effective_embeddings(&emb, Some(&graph), &hp).unwrap();
    let (u, i) = graph.propagate(&emb.user_base, &emb.item_base, 2);
    let (w, z) = graph.propagate(&emb.user_debiased, &emb.item_debiased, 2);
    assert_eq!((eff.user_base, eff.item_base), (u, i));
    assert_eq!((eff.user_debiased, eff.item_debiased), (w, z));
}
