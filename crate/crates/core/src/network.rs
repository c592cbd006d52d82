//! General tensor networks contracted pairwise.
//!
//! A network is a list of nodes, the edges pairing node axes, and the free
//! legs that survive in the output. Contraction proceeds pairwise along a
//! path; by default the path is chosen greedily so that each step produces
//! the smallest possible intermediate.

use crate::error::{Error, Result};
use crate::tensor::{contract_pair, DenseTensor};

/// A `(node, axis)` position in a network.
pub type Leg = (usize, usize);

#[derive(Debug, Clone)]
pub struct ContractionNetwork {
    labels: Vec<String>,
    nodes: Vec<DenseTensor>,
    edges: Vec<(Leg, Leg)>,
    free_legs: Vec<Leg>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LegId {
    Edge(usize),
    Free(usize),
}

#[derive(Debug, Clone)]
struct Live {
    tensor: DenseTensor,
    legs: Vec<LegId>,
}

impl ContractionNetwork {
    pub fn new(
        nodes: Vec<(String, DenseTensor)>,
        edges: Vec<(Leg, Leg)>,
        free_legs: Vec<Leg>,
    ) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::Network("network has no nodes".into()));
        }
        let (labels, nodes): (Vec<_>, Vec<_>) = nodes.into_iter().unzip();
        let mut uses: Vec<Vec<u32>> = nodes.iter().map(|t| vec![0; t.rank()]).collect();
        let mut mark = |leg: Leg| -> Result<()> {
            let (node, axis) = leg;
            let slot = uses
                .get_mut(node)
                .and_then(|axes| axes.get_mut(axis))
                .ok_or_else(|| Error::Network(format!("leg {leg:?} does not exist")))?;
            *slot += 1;
            Ok(())
        };
        for &(a, b) in &edges {
            mark(a)?;
            mark(b)?;
        }
        for &leg in &free_legs {
            mark(leg)?;
        }
        for (node, axes) in uses.iter().enumerate() {
            for (axis, &count) in axes.iter().enumerate() {
                match count {
                    1 => {}
                    0 => {
                        return Err(Error::Network(format!(
                            "axis {axis} of node '{}' is dangling",
                            labels[node]
                        )))
                    }
                    _ => {
                        return Err(Error::Network(format!(
                            "axis {axis} of node '{}' is used {count} times",
                            labels[node]
                        )))
                    }
                }
            }
        }
        for &((na, aa), (nb, ab)) in &edges {
            let (da, db) = (nodes[na].shape()[aa], nodes[nb].shape()[ab]);
            if da != db {
                return Err(Error::Dimension(format!(
                    "edge ({na},{aa})-({nb},{ab}) joins dimensions {da} and {db}"
                )));
            }
        }
        Ok(Self {
            labels,
            nodes,
            edges,
            free_legs,
        })
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn nodes(&self) -> &[DenseTensor] {
        &self.nodes
    }

    pub fn edges(&self) -> &[(Leg, Leg)] {
        &self.edges
    }

    pub fn free_legs(&self) -> &[Leg] {
        &self.free_legs
    }

    /// Greedy pairwise path: at each step contract the connected pair whose
    /// result is smallest, falling back to outer products only when no pair
    /// shares an edge. Ties go to the lexicographically smallest pair.
    ///
    /// Path entries index the current list of live tensors; the two operands
    /// are removed and their result is appended at the end.
    pub fn greedy_path(&self) -> Result<Vec<(usize, usize)>> {
        let mut live = self.initial()?;
        let mut path = Vec::with_capacity(live.len().saturating_sub(1));
        while live.len() > 1 {
            let mut best: Option<(bool, u128, usize, usize)> = None;
            for i in 0..live.len() {
                for j in i + 1..live.len() {
                    let (shared, size) = pair_cost(&live[i], &live[j]);
                    let key = (shared == 0, size, i, j);
                    if best.is_none_or(|b| key < b) {
                        best = Some(key);
                    }
                }
            }
            let (_, _, i, j) = best.expect("at least two live tensors");
            path.push((i, j));
            step(&mut live, i, j)?;
        }
        Ok(path)
    }

    /// Contracts along the greedy path.
    pub fn contract(&self) -> Result<DenseTensor> {
        let path = self.greedy_path()?;
        self.contract_with_path(&path)
    }

    /// Contracts along a caller-supplied path (see [`greedy_path`](Self::greedy_path)
    /// for the indexing convention). The path must reduce the network to one tensor.
    pub fn contract_with_path(&self, path: &[(usize, usize)]) -> Result<DenseTensor> {
        let mut live = self.initial()?;
        for &(i, j) in path {
            if i == j || i >= live.len() || j >= live.len() {
                return Err(Error::Network(format!(
                    "path step ({i}, {j}) invalid with {} live tensors",
                    live.len()
                )));
            }
            step(&mut live, i, j)?;
        }
        if live.len() != 1 {
            return Err(Error::Network(format!(
                "path leaves {} tensors uncontracted",
                live.len()
            )));
        }
        let last = live.pop().expect("one tensor");
        let perm: Vec<usize> = (0..self.free_legs.len())
            .map(|f| {
                last.legs
                    .iter()
                    .position(|&l| l == LegId::Free(f))
                    .expect("free leg survives contraction")
            })
            .collect();
        last.tensor.permute(&perm)
    }

    fn initial(&self) -> Result<Vec<Live>> {
        let mut legs: Vec<Vec<Option<LegId>>> =
            self.nodes.iter().map(|t| vec![None; t.rank()]).collect();
        for (e, &((na, aa), (nb, ab))) in self.edges.iter().enumerate() {
            legs[na][aa] = Some(LegId::Edge(e));
            legs[nb][ab] = Some(LegId::Edge(e));
        }
        for (f, &(n, a)) in self.free_legs.iter().enumerate() {
            legs[n][a] = Some(LegId::Free(f));
        }
        let mut live = Vec::with_capacity(self.nodes.len());
        for (tensor, legs) in self.nodes.iter().zip(legs) {
            let mut item = Live {
                tensor: tensor.clone(),
                legs: legs.into_iter().map(|l| l.expect("validated")).collect(),
            };
            // self-loops are traced out up front
            while let Some((a, b)) = self_loop(&item.legs) {
                item.tensor = item.tensor.trace_axes(a, b)?;
                item.legs = item
                    .legs
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != a && k != b)
                    .map(|(_, &l)| l)
                    .collect();
            }
            live.push(item);
        }
        Ok(live)
    }
}

/// Contracts a network along the greedy path.
pub fn contract_network(net: &ContractionNetwork) -> Result<DenseTensor> {
    net.contract()
}

fn self_loop(legs: &[LegId]) -> Option<(usize, usize)> {
    for a in 0..legs.len() {
        if let LegId::Edge(_) = legs[a] {
            if let Some(b) = (a + 1..legs.len()).find(|&b| legs[b] == legs[a]) {
                return Some((a, b));
            }
        }
    }
    None
}

fn shared_axes(a: &Live, b: &Live) -> Vec<(usize, usize)> {
    a.legs
        .iter()
        .enumerate()
        .filter_map(|(ia, la)| match la {
            LegId::Edge(_) => b.legs.iter().position(|lb| lb == la).map(|ib| (ia, ib)),
            LegId::Free(_) => None,
        })
        .collect()
}

fn pair_cost(a: &Live, b: &Live) -> (usize, u128) {
    let shared = shared_axes(a, b);
    let contracted: u128 = shared
        .iter()
        .map(|&(ia, _)| a.tensor.shape()[ia] as u128)
        .product();
    let total = a.tensor.len() as u128 * b.tensor.len() as u128;
    (shared.len(), total / (contracted * contracted))
}

fn step(live: &mut Vec<Live>, i: usize, j: usize) -> Result<()> {
    let (hi, lo) = if i > j { (i, j) } else { (j, i) };
    let second = live.remove(hi);
    let first = live.remove(lo);
    let (a, b) = if i < j { (first, second) } else { (second, first) };
    let pairs = shared_axes(&a, &b);
    let tensor = contract_pair(&a.tensor, &b.tensor, &pairs)?;
    let legs = a
        .legs
        .iter()
        .enumerate()
        .filter(|(k, _)| !pairs.iter().any(|p| p.0 == *k))
        .map(|(_, &l)| l)
        .chain(
            b.legs
                .iter()
                .enumerate()
                .filter(|(k, _)| !pairs.iter().any(|p| p.1 == *k))
                .map(|(_, &l)| l),
        )
        .collect();
    live.push(Live { tensor, legs });
    Ok(())
}
