mod common;

use common::{finite_difference, Fixture};
use debias_rec::objective::{composite_loss, hinge_arguments};
use debias_rec::{EmbeddingSet, HingeOrientation, HyperParams, Table, TableId, TrainTriple};

const H: f64 = 1e-4;
const KINK: f64 = 1e-3;

fn random_set(f: &mut Fixture, nu: usize, ni: usize, d: usize) -> EmbeddingSet {
    let mut t = |rows: usize| {
        Table::from_vec(rows, d, (0..rows * d).map(|_| f.signed()).collect()).unwrap()
    };
    EmbeddingSet {
        user_base: t(nu),
        user_debiased: t(nu),
        item_base: t(ni),
        item_debiased: t(ni),
    }
}

fn near_kink(batch: &[TrainTriple], emb: &EmbeddingSet, hp: &HyperParams) -> bool {
    batch.iter().any(|t| {
        let (a, b) = hinge_arguments(
            emb.user_base.row(t.user as usize),
            emb.user_debiased.row(t.user as usize),
            emb.item_base.row(t.pos as usize),
            emb.item_debiased.row(t.pos as usize),
            hp.margin,
            hp.hinge_orientation,
        );
        a.abs() < KINK || b.abs() < KINK
    })
}

/// Worst relative error over all coordinates of all touched rows, compared
/// as whole gradient vectors.
fn relative_error(batch: &[TrainTriple], emb: &EmbeddingSet, hp: &HyperParams) -> f64 {
    let analytic = composite_loss(batch, emb, hp).grad;
    let (mut diff2, mut a2, mut n2) = (0.0, 0.0, 0.0);
    for id in TableId::ALL {
        for row in 0..emb.table(id).rows() {
            for col in 0..emb.dim() {
                let a = analytic.get(id, row as u32).map_or(0.0, |g| g[col]);
                let n = finite_difference(batch, emb, hp, id, row, col, H);
                diff2 += (a - n).powi(2);
                a2 += a * a;
                n2 += n * n;
            }
        }
    }
    diff2.sqrt() / a2.sqrt().max(n2.sqrt()).max(1e-12)
}

fn check(orientation: HingeOrientation, seed: u64) {
    let mut f = Fixture::new(seed);
    let hp = HyperParams {
        alpha: 0.7,
        beta: 0.3,
        margin: 0.1,
        hinge_orientation: orientation,
        dim: 8,
        ..HyperParams::default()
    };
    let (nu, ni) = (3, 5);
    let mut checked = 0;
    let mut attempts = 0;
    while checked < 100 {
        attempts += 1;
        assert!(attempts < 10_000, "too many points near the hinge kink");
        let emb = random_set(&mut f, nu, ni, hp.dim);
        let batch: Vec<TrainTriple> = (0..3)
            .map(|_| {
                let user = f.below(nu) as u32;
                let pos = f.below(ni) as u32;
                let neg = (pos + 1 + f.below(ni - 1) as u32) % ni as u32;
                TrainTriple { user, pos, neg }
            })
            .collect();
        if near_kink(&batch, &emb, &hp) {
            continue;
        }
        let rel = relative_error(&batch, &emb, &hp);
        assert!(rel < 1e-4, "point {checked}: relative error {rel}");
        checked += 1;
    }
}

#[test]
fn composite_gradient_matches_finite_differences() {
    check(HingeOrientation::AsWritten, 1);
}

#[test]
fn swapped_gradient_matches_finite_differences() {
    check(HingeOrientation::Swapped, 2);
}
