//! Embedding initialization, the MF / LightGCN backbones and the binary
//! checkpoint format.
//!
//! LightGCN keeps only neighbourhood aggregation: each layer replaces a
//! node's vector with the degree-normalized sum of its neighbours'
//! vectors, and the output is the mean over layers `0..=K`. User tables
//! propagate together with their item counterpart: (base user, base item)
//! and (debiased user, debiased item).

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::types::{Backbone, EmbeddingSet, HyperParams, Interaction, Table, TableId};

/// Bipartite user–item graph with symmetric degree normalization.
#[derive(Clone, Debug)]
pub struct NormalizedGraph {
    num_users: usize,
    num_items: usize,
    /// Unique (user, item) edges sorted ascending.
    edges: Vec<(u32, u32)>,
    degree_user: Vec<u32>,
    degree_item: Vec<u32>,
    /// `1 / sqrt(deg(u) * deg(i))`, aligned with `edges`.
    weights: Vec<f64>,
    user_adj: Vec<Vec<(u32, f64)>>,
    item_adj: Vec<Vec<(u32, f64)>>,
}

impl NormalizedGraph {
    pub fn from_interactions(num_users: usize, num_items: usize, train: &[Interaction]) -> Self {
        let mut edges: Vec<(u32, u32)> = train.iter().map(Interaction::pair).collect();
        edges.sort_unstable();
        edges.dedup();
        let mut degree_user = vec![0u32; num_users];
        let mut degree_item = vec![0u32; num_items];
        for &(u, i) in &edges {
            degree_user[u as usize] += 1;
            degree_item[i as usize] += 1;
        }
        let weights: Vec<f64> = edges
            .iter()
            .map(|&(u, i)| {
                1.0 / ((degree_user[u as usize] as f64) * (degree_item[i as usize] as f64)).sqrt()
            })
            .collect();
        let mut user_adj = vec![Vec::new(); num_users];
        let mut item_adj = vec![Vec::new(); num_items];
        // edges are sorted by (user, item), so user lists come out item-sorted
        for (&(u, i), &w) in edges.iter().zip(&weights) {
            user_adj[u as usize].push((i, w));
            item_adj[i as usize].push((u, w));
        }
        for adj in &mut item_adj {
            adj.sort_unstable_by_key(|&(u, _)| u);
        }
        NormalizedGraph {
            num_users,
            num_items,
            edges,
            degree_user,
            degree_item,
            weights,
            user_adj,
            item_adj,
        }
    }

    pub fn edges(&self) -> &[(u32, u32)] {
        &self.edges
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn degree_user(&self) -> &[u32] {
        &self.degree_user
    }

    pub fn degree_item(&self) -> &[u32] {
        &self.degree_item
    }

    pub fn num_users(&self) -> usize {
        self.num_users
    }

    pub fn num_items(&self) -> usize {
        self.num_items
    }

    /// One aggregation step for a (user, item) table pair.
    fn step(&self, users: &Table, items: &Table) -> (Table, Table) {
        let d = users.dim();
        let mut next_users = Table::zeros(users.rows(), d);
        let mut next_items = Table::zeros(items.rows(), d);
        aggregate(&self.user_adj, items, &mut next_users);
        aggregate(&self.item_adj, users, &mut next_items);
        (next_users, next_items)
    }

    /// Mean of layers `0..=layers` for a (user, item) table pair.
    ///
    /// The propagation operator is symmetric, so the same call maps
    /// gradients with respect to the output back onto the input tables.
    pub fn propagate(&self, users: &Table, items: &Table, layers: usize) -> (Table, Table) {
        assert_eq!(users.rows(), self.num_users, "user table rows");
        assert_eq!(items.rows(), self.num_items, "item table rows");
        let mut sum_u = users.clone();
        let mut sum_i = items.clone();
        let mut cur = (users.clone(), items.clone());
        for _ in 0..layers {
            cur = self.step(&cur.0, &cur.1);
            add_assign(&mut sum_u, &cur.0);
            add_assign(&mut sum_i, &cur.1);
        }
        let inv = 1.0 / (layers as f64 + 1.0);
        sum_u.scale(inv);
        sum_i.scale(inv);
        (sum_u, sum_i)
    }
}

fn aggregate(adj: &[Vec<(u32, f64)>], source: &Table, out: &mut Table) {
    let d = source.dim();
    if d == 0 {
        return;
    }
    out.as_mut_slice()
        .par_chunks_mut(d)
        .zip(adj.par_iter())
        .for_each(|(row, neigh)| {
            for &(j, w) in neigh {
                for (o, s) in row.iter_mut().zip(source.row(j as usize)) {
                    *o += w * s;
                }
            }
        });
}

fn add_assign(acc: &mut Table, other: &Table) {
    acc.as_mut_slice()
        .iter_mut()
        .zip(other.as_slice())
        .for_each(|(a, b)| *a += b);
}

/// Draws all four tables i.i.d. from `Normal(0, std²)`, one ChaCha stream
/// per table.
pub fn init_embeddings(
    num_users: usize,
    num_items: usize,
    dim: usize,
    seed: u64,
    std: f64,
) -> EmbeddingSet {
    let mut emb = EmbeddingSet::zeros(num_users, num_items, dim);
    if std == 0.0 {
        return emb;
    }
    for id in TableId::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id.index() as u64 + 1);
        for v in emb.table_mut(id).as_mut_slice() {
            let z: f64 = rng.sample(StandardNormal);
            *v = std * z;
        }
    }
    emb
}

/// Embeddings consumed by the objective: the base tables for MF, the
/// layer-averaged propagation for LightGCN.
pub fn effective_embeddings(
    base: &EmbeddingSet,
    graph: Option<&NormalizedGraph>,
    hp: &HyperParams,
) -> Result<EmbeddingSet> {
    match hp.backbone {
        Backbone::Mf => Ok(base.clone()),
        Backbone::LightGcn => {
            let graph = graph.ok_or(Error::GraphMissing)?;
            let (user_base, item_base) =
                graph.propagate(&base.user_base, &base.item_base, hp.gcn_layers);
            let (user_debiased, item_debiased) =
                graph.propagate(&base.user_debiased, &base.item_debiased, hp.gcn_layers);
            Ok(EmbeddingSet {
                user_base,
                user_debiased,
                item_base,
                item_debiased,
            })
        }
    }
}

const MAGIC: &[u8; 4] = b"DBRC";
const VERSION: u32 = 1;
/// Table order on disk.
const DISK_ORDER: [TableId; 4] = [
    TableId::UserBase,
    TableId::UserDebiased,
    TableId::ItemBase,
    TableId::ItemDebiased,
];

/// Serializes an embedding set: `DBRC`, version, user count, item count,
/// dim (u32 LE each), then the tables row-major as f32 LE.
pub fn encode_checkpoint(emb: &EmbeddingSet) -> Vec<u8> {
    let n_floats = 2 * (emb.num_users() + emb.num_items()) * emb.dim();
    let mut buf = Vec::with_capacity(20 + 4 * n_floats);
    buf.extend_from_slice(MAGIC);
    for v in [
        VERSION,
        emb.num_users() as u32,
        emb.num_items() as u32,
        emb.dim() as u32,
    ] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for id in DISK_ORDER {
        for &v in emb.table(id).as_slice() {
            buf.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    buf
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<EmbeddingSet> {
    let mut r = bytes;
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)
        .map_err(|_| Error::Checkpoint("truncated header".into()))?;
    if &magic != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let mut word = || -> Result<u32> {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)
            .map_err(|_| Error::Checkpoint("truncated header".into()))?;
        Ok(u32::from_le_bytes(b))
    };
    let version = word()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let num_users = word()? as usize;
    let num_items = word()? as usize;
    let dim = word()? as usize;
    let body = &bytes[20..];
    let expected = 4 * 2 * (num_users + num_items) * dim;
    if body.len() != expected {
        return Err(Error::Checkpoint(format!(
            "body has {} bytes, expected {expected}",
            body.len()
        )));
    }
    let mut floats = body
        .chunks_exact(4)
        .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64);
    let mut emb = EmbeddingSet::zeros(num_users, num_items, dim);
    for id in DISK_ORDER {
        for v in emb.table_mut(id).as_mut_slice() {
            *v = floats.next().expect("length checked");
        }
    }
    Ok(emb)
}

pub fn write_checkpoint(path: impl AsRef<Path>, emb: &EmbeddingSet) -> Result<()> {
    let path = path.as_ref();
    let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    f.write_all(&encode_checkpoint(emb))
        .map_err(|e| Error::io(path, e))
}

pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<EmbeddingSet> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
