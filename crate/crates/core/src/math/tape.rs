//! Reverse-mode gradients over a recorded computation list.
//!
//! The tape records vector-valued intermediate results during a forward pass
//! and replays them in reverse to accumulate adjoints. The op set is exactly
//! what the dense / recurrent / policy-loss computations in this crate need;
//! there is no general graph compiler.
//!
//! Parameters enter the tape through [`Tape::param`], which memoizes one leaf
//! node per [`ParamId`], so a weight matrix used at every recurrent step still
//! accumulates its full gradient at a single node.

use std::collections::HashMap;

use crate::math::params::{ParamId, ParamStore};

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId(usize);

#[derive(Debug, Clone)]
enum Op {
    /// Leaf holding constant input values.
    Const,
    /// Leaf bound to a parameter array.
    Param(ParamId),
    /// y = W x with W row-major (rows x cols).
    MatVec { w: NodeId, x: NodeId, rows: usize, cols: usize },
    Add(NodeId, NodeId),
    Sub(NodeId, NodeId),
    Mul(NodeId, NodeId),
    /// y = scale * a + shift, elementwise.
    Affine { a: NodeId, scale: f64, shift: f64 },
    Sigmoid(NodeId),
    Tanh(NodeId),
    Exp(NodeId),
    /// Elementwise clamp; zero gradient outside the open interval.
    Clamp { a: NodeId, lo: f64, hi: f64 },
    /// Elementwise minimum; gradient follows the smaller argument (ties: first).
    Min(NodeId, NodeId),
    Concat(Vec<NodeId>),
    /// Sum of all elements; output has length 1.
    Sum(NodeId),
}

#[derive(Debug, Clone)]
struct Node {
    value: Vec<f64>,
    op: Op,
}

/// Recorded forward computation.
#[derive(Debug, Default)]
pub struct Tape {
    nodes: Vec<Node>,
    param_nodes: HashMap<usize, NodeId>,
}

/// Numerically stable logistic function, shared by tape and plain forwards.
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// y[i] = sum_j w[i*cols + j] * x[j]; shared by tape and plain forwards so
/// both paths produce bit-identical values.
pub fn matvec_into(w: &[f64], x: &[f64], rows: usize, cols: usize, out: &mut [f64]) {
    debug_assert_eq!(w.len(), rows * cols);
    debug_assert_eq!(x.len(), cols);
    debug_assert_eq!(out.len(), rows);
    for i in 0..rows {
        let row = &w[i * cols..(i + 1) * cols];
        let mut acc = 0.0;
        for j in 0..cols {
            acc += row[j] * x[j];
        }
        out[i] = acc;
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::default()
    }

    /// Drop all recorded nodes, keeping allocations where possible.
    pub fn reset(&mut self) {
        self.nodes.clear();
        self.param_nodes.clear();
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Vec<f64>, op: Op) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    /// Value of a length-1 node.
    pub fn scalar_value(&self, id: NodeId) -> f64 {
        let v = self.value(id);
        assert_eq!(v.len(), 1, "node is not scalar");
        v[0]
    }

    pub fn constant(&mut self, values: &[f64]) -> NodeId {
        self.push(values.to_vec(), Op::Const)
    }

    pub fn scalar(&mut self, v: f64) -> NodeId {
        self.push(vec![v], Op::Const)
    }

    /// Leaf for a parameter array; memoized per id.
    pub fn param(&mut self, store: &ParamStore, id: ParamId) -> NodeId {
        if let Some(&n) = self.param_nodes.get(&id.index()) {
            return n;
        }
        let n = self.push(store.values(id).to_vec(), Op::Param(id));
        self.param_nodes.insert(id.index(), n);
        n
    }

    pub fn matvec(&mut self, w: NodeId, x: NodeId, rows: usize, cols: usize) -> NodeId {
        assert_eq!(self.nodes[w.0].value.len(), rows * cols, "matvec: bad W length");
        assert_eq!(self.nodes[x.0].value.len(), cols, "matvec: bad x length");
        let mut out = vec![0.0; rows];
        matvec_into(&self.nodes[w.0].value, &self.nodes[x.0].value, rows, cols, &mut out);
        self.push(out, Op::MatVec { w, x, rows, cols })
    }

    fn zip(&mut self, a: NodeId, b: NodeId, f: impl Fn(f64, f64) -> f64, op: Op) -> NodeId {
        let (va, vb) = (&self.nodes[a.0].value, &self.nodes[b.0].value);
        assert_eq!(va.len(), vb.len(), "elementwise op: length mismatch");
        let out: Vec<f64> = va.iter().zip(vb).map(|(&x, &y)| f(x, y)).collect();
        self.push(out, op)
    }

    pub fn add(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip(a, b, |x, y| x + y, Op::Add(a, b))
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip(a, b, |x, y| x - y, Op::Sub(a, b))
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip(a, b, |x, y| x * y, Op::Mul(a, b))
    }

    pub fn min(&mut self, a: NodeId, b: NodeId) -> NodeId {
        self.zip(a, b, |x, y| if x <= y { x } else { y }, Op::Min(a, b))
    }

    fn map(&mut self, a: NodeId, f: impl Fn(f64) -> f64, op: Op) -> NodeId {
        let out: Vec<f64> = self.nodes[a.0].value.iter().map(|&x| f(x)).collect();
        self.push(out, op)
    }

    pub fn affine(&mut self, a: NodeId, scale: f64, shift: f64) -> NodeId {
        self.map(a, |x| x * scale + shift, Op::Affine { a, scale, shift })
    }

    pub fn sigmoid(&mut self, a: NodeId) -> NodeId {
        self.map(a, sigmoid, Op::Sigmoid(a))
    }

    pub fn tanh(&mut self, a: NodeId) -> NodeId {
        self.map(a, f64::tanh, Op::Tanh(a))
    }

    pub fn exp(&mut self, a: NodeId) -> NodeId {
        self.map(a, f64::exp, Op::Exp(a))
    }

    pub fn clamp(&mut self, a: NodeId, lo: f64, hi: f64) -> NodeId {
        self.map(a, |x| x.clamp(lo, hi), Op::Clamp { a, lo, hi })
    }

    pub fn concat(&mut self, parts: &[NodeId]) -> NodeId {
        let mut out = Vec::new();
        for &p in parts {
            out.extend_from_slice(&self.nodes[p.0].value);
        }
        self.push(out, Op::Concat(parts.to_vec()))
    }

    pub fn sum(&mut self, a: NodeId) -> NodeId {
        let s: f64 = self.nodes[a.0].value.iter().sum();
        self.push(vec![s], Op::Sum(a))
    }

    /// Mean of a set of scalar nodes.
    pub fn mean_of_scalars(&mut self, parts: &[NodeId]) -> NodeId {
        assert!(!parts.is_empty(), "mean over empty set");
        let cat = self.concat(parts);
        let s = self.sum(cat);
        self.affine(s, 1.0 / parts.len() as f64, 0.0)
    }

    /// Reverse pass from a scalar loss node. Returns adjoints for every node
    /// and accumulated gradients for every parameter leaf.
    pub fn backward(&self, loss: NodeId) -> Gradients {
        assert_eq!(self.nodes[loss.0].value.len(), 1, "loss must be scalar");
        let mut adj: Vec<Vec<f64>> = self.nodes.iter().map(|n| vec![0.0; n.value.len()]).collect();
        adj[loss.0][0] = 1.0;

        for id in (0..=loss.0).rev() {
            // Split off this node's adjoint so parents can be written.
            let g = std::mem::take(&mut adj[id]);
            if g.iter().all(|&x| x == 0.0) {
                adj[id] = g;
                continue;
            }
            match &self.nodes[id].op {
                Op::Const | Op::Param(_) => {}
                Op::MatVec { w, x, rows, cols } => {
                    let (w, x, rows, cols) = (*w, *x, *rows, *cols);
                    {
                        let xv = &self.nodes[x.0].value;
                        let wg = &mut adj[w.0];
                        for i in 0..rows {
                            let gi = g[i];
                            if gi == 0.0 {
                                continue;
                            }
                            let row = &mut wg[i * cols..(i + 1) * cols];
                            for j in 0..cols {
                                row[j] += gi * xv[j];
                            }
                        }
                    }
                    {
                        let wv = &self.nodes[w.0].value;
                        let xg = &mut adj[x.0];
                        for i in 0..rows {
                            let gi = g[i];
                            if gi == 0.0 {
                                continue;
                            }
                            let row = &wv[i * cols..(i + 1) * cols];
                            for j in 0..cols {
                                xg[j] += gi * row[j];
                            }
                        }
                    }
                }
                Op::Add(a, b) => {
                    for (k, &gk) in g.iter().enumerate() {
                        adj[a.0][k] += gk;
                    }
                    for (k, &gk) in g.iter().enumerate() {
                        adj[b.0][k] += gk;
                    }
                }
                Op::Sub(a, b) => {
                    for (k, &gk) in g.iter().enumerate() {
                        adj[a.0][k] += gk;
                    }
                    for (k, &gk) in g.iter().enumerate() {
                        adj[b.0][k] -= gk;
                    }
                }
                Op::Mul(a, b) => {
                    let (a, b) = (*a, *b);
                    for k in 0..g.len() {
                        let (av, bv) = (self.nodes[a.0].value[k], self.nodes[b.0].value[k]);
                        adj[a.0][k] += g[k] * bv;
                        adj[b.0][k] += g[k] * av;
                    }
                }
                Op::Affine { a, scale, .. } => {
                    for (k, &gk) in g.iter().enumerate() {
                        adj[a.0][k] += gk * scale;
                    }
                }
                Op::Sigmoid(a) => {
                    for (k, &gk) in g.iter().enumerate() {
                        let y = self.nodes[id].value[k];
                        adj[a.0][k] += gk * y * (1.0 - y);
                    }
                }
                Op::Tanh(a) => {
                    for (k, &gk) in g.iter().enumerate() {
                        let y = self.nodes[id].value[k];
                        adj[a.0][k] += gk * (1.0 - y * y);
                    }
                }
                Op::Exp(a) => {
                    for (k, &gk) in g.iter().enumerate() {
                        adj[a.0][k] += gk * self.nodes[id].value[k];
                    }
                }
                Op::Clamp { a, lo, hi } => {
                    for (k, &gk) in g.iter().enumerate() {
                        let x = self.nodes[a.0].value[k];
                        if x > *lo && x < *hi {
                            adj[a.0][k] += gk;
                        }
                    }
                }
                Op::Min(a, b) => {
                    let (a, b) = (*a, *b);
                    for k in 0..g.len() {
                        if self.nodes[a.0].value[k] <= self.nodes[b.0].value[k] {
                            adj[a.0][k] += g[k];
                        } else {
                            adj[b.0][k] += g[k];
                        }
                    }
                }
                Op::Concat(parts) => {
                    let mut off = 0;
                    for &p in parts {
                        let len = self.nodes[p.0].value.len();
                        for k in 0..len {
                            adj[p.0][k] += g[off + k];
                        }
                        off += len;
                    }
                }
                Op::Sum(a) => {
                    let ga = g[0];
                    for slot in adj[a.0].iter_mut() {
                        *slot += ga;
                    }
                }
            }
            adj[id] = g;
        }

        let mut param_grads = HashMap::new();
        for (&pid, &nid) in &self.param_nodes {
            param_grads.insert(pid, adj[nid.0].clone());
        }
        Gradients {
            node_adjoints: adj,
            param_grads,
        }
    }
}

/// Result of a backward pass.
#[derive(Debug)]
pub struct Gradients {
    node_adjoints: Vec<Vec<f64>>,
    param_grads: HashMap<usize, Vec<f64>>,
}

impl Gradients {
    /// Gradient of the loss w.r.t. a parameter array, if it appeared on the tape.
    pub fn param(&self, id: ParamId) -> Option<&[f64]> {
        self.param_grads.get(&id.index()).map(|v| v.as_slice())
    }

    /// Gradient of the loss w.r.t. any node's values.
    pub fn node(&self, id: NodeId) -> &[f64] {
        &self.node_adjoints[id.0]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store_with(values: &[f64]) -> (ParamStore, ParamId) {
        let mut store = ParamStore::new();
        let id = store.vector("p", values.to_vec());
        (store, id)
    }

    #[test]
    fn square_gradient() {
        let (store, id) = store_with(&[3.0]);
        let mut tape = Tape::new();
        let w = tape.param(&store, id);
        let sq = tape.mul(w, w);
        let loss = tape.sum(sq);
        assert_eq!(tape.scalar_value(loss), 9.0);
        let grads = tape.backward(loss);
        assert_eq!(grads.param(id).unwrap(), &[6.0]);
    }

    #[test]
    fn param_node_is_memoized() {
        let (store, id) = store_with(&[1.0, 2.0]);
        let mut tape = Tape::new();
        let a = tape.param(&store, id);
        let b = tape.param(&store, id);
        assert_eq!(a, b);
    }

    #[test]
    fn matvec_forward_and_backward() {
        let mut store = ParamStore::new();
        let w = store.add(ParamArray::new("w", vec![2, 3], vec![1., 2., 3., 4., 5., 6.]).unwrap());
        let mut tape = Tape::new();
        let wn = tape.param(&store, w);
        let x = tape.constant(&[1.0, 0.5, -1.0]);
        let y = tape.matvec(wn, x, 2, 3);
        assert_eq!(tape.value(y), &[1.0 + 1.0 - 3.0, 4.0 + 2.5 - 6.0]);
        let loss = tape.sum(y);
        let grads = tape.backward(loss);
        // d(sum)/dW[i][j] = x[j]
        assert_eq!(grads.param(w).unwrap(), &[1.0, 0.5, -1.0, 1.0, 0.5, -1.0]);
        // d(sum)/dx[j] = column sums of W
        assert_eq!(grads.node(x), &[5.0, 7.0, 9.0]);
    }

    use crate::math::params::ParamArray;

    #[test]
    fn min_picks_smaller_branch() {
        let mut tape = Tape::new();
        let a = tape.constant(&[1.0, 5.0]);
        let b = tape.constant(&[2.0, 3.0]);
        let m = tape.min(a, b);
        assert_eq!(tape.value(m), &[1.0, 3.0]);
        let s = tape.sum(m);
        let g = tape.backward(s);
        assert_eq!(g.node(a), &[1.0, 0.0]);
        assert_eq!(g.node(b), &[0.0, 1.0]);
    }

    #[test]
    fn clamp_zero_gradient_outside() {
        let mut tape = Tape::new();
        let a = tape.constant(&[-2.0, 0.5, 2.0]);
        let c = tape.clamp(a, 0.0, 1.0);
        assert_eq!(tape.value(c), &[0.0, 0.5, 1.0]);
        let s = tape.sum(c);
        let g = tape.backward(s);
        assert_eq!(g.node(a), &[0.0, 1.0, 0.0]);
    }

    #[test]
    fn concat_routes_gradients() {
        let mut tape = Tape::new();
        let a = tape.constant(&[1.0]);
        let b = tape.constant(&[2.0, 3.0]);
        let c = tape.concat(&[a, b]);
        let w = tape.constant(&[2.0, 4.0, 8.0]);
        let p = tape.mul(c, w);
        let s = tape.sum(p);
        let g = tape.backward(s);
        assert_eq!(g.node(a), &[2.0]);
        assert_eq!(g.node(b), &[4.0, 8.0]);
    }

    #[test]
    fn sigmoid_is_stable_at_large_inputs() {
        assert_eq!(sigmoid(1000.0), 1.0);
        assert_eq!(sigmoid(-1000.0), 0.0);
        assert!(sigmoid(0.0) == 0.5);
    }
}
