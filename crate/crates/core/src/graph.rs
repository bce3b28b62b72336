//! Typed attributed host graph and the fixed type graph of the DL meta-model.
//!
//! A host graph is a set of typed nodes carrying attributes plus a set of
//! labelled edges. The type graph is not stored as data: it is the typing map
//! returned by [`EdgeLabel::admits`], and [`AttributedGraph::conforms`] checks
//! that every edge of a host graph is an instance of it.

use std::collections::BTreeMap;
use std::collections::BTreeSet;
use std::fmt;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::tensor::TensorShape;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum NodeKind {
    Program,
    Architecture,
    InputLayer,
    Layer,
    Parameters,
    Learner,
    Loss,
    Optimizer,
    Metric,
    Hyperparameters,
    Data,
    Labels,
    Fault,
}

impl NodeKind {
    pub const ALL: [NodeKind; 13] = [
        NodeKind::Program,
        NodeKind::Architecture,
        NodeKind::InputLayer,
        NodeKind::Layer,
        NodeKind::Parameters,
        NodeKind::Learner,
        NodeKind::Loss,
        NodeKind::Optimizer,
        NodeKind::Metric,
        NodeKind::Hyperparameters,
        NodeKind::Data,
        NodeKind::Labels,
        NodeKind::Fault,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            NodeKind::Program => "Program",
            NodeKind::Architecture => "Architecture",
            NodeKind::InputLayer => "InputLayer",
            NodeKind::Layer => "Layer",
            NodeKind::Parameters => "Parameters",
            NodeKind::Learner => "Learner",
            NodeKind::Loss => "Loss",
            NodeKind::Optimizer => "Optimizer",
            NodeKind::Metric => "Metric",
            NodeKind::Hyperparameters => "Hyperparameters",
            NodeKind::Data => "Data",
            NodeKind::Labels => "Labels",
            NodeKind::Fault => "Fault",
        }
    }
}

impl fmt::Display for NodeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum EdgeLabel {
    HasArchitecture,
    HasLearner,
    HasData,
    StartsWith,
    Next,
    HasParams,
    HasLoss,
    HasOptimizer,
    HasMetric,
    HasHyperparams,
    HasLabels,
    EndsWith,
    HasFault,
}

impl EdgeLabel {
    pub const ALL: [EdgeLabel; 13] = [
        EdgeLabel::HasArchitecture,
        EdgeLabel::HasLearner,
        EdgeLabel::HasData,
        EdgeLabel::StartsWith,
        EdgeLabel::Next,
        EdgeLabel::HasParams,
        EdgeLabel::HasLoss,
        EdgeLabel::HasOptimizer,
        EdgeLabel::HasMetric,
        EdgeLabel::HasHyperparams,
        EdgeLabel::HasLabels,
        EdgeLabel::EndsWith,
        EdgeLabel::HasFault,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeLabel::HasArchitecture => "has_architecture",
            EdgeLabel::HasLearner => "has_learner",
            EdgeLabel::HasData => "has_data",
            EdgeLabel::StartsWith => "starts_with",
            EdgeLabel::Next => "next",
            EdgeLabel::HasParams => "has_params",
            EdgeLabel::HasLoss => "has_loss",
            EdgeLabel::HasOptimizer => "has_optimizer",
            EdgeLabel::HasMetric => "has_metric",
            EdgeLabel::HasHyperparams => "has_hyperparams",
            EdgeLabel::HasLabels => "has_labels",
            EdgeLabel::EndsWith => "ends_with",
            EdgeLabel::HasFault => "has_fault",
        }
    }

    /// The typing map of the type graph: whether an edge with this label may
    /// go from a `src` node to a `dst` node.
    ///
    /// Every label has a single (source, target) pair except `next`, whose
    /// source is either the input layer or a hidden layer, and `has_fault`,
    /// which may leave any non-fault node.
    pub fn admits(self, src: NodeKind, dst: NodeKind) -> bool {
        use NodeKind as K;
        match self {
            EdgeLabel::HasArchitecture => src == K::Program && dst == K::Architecture,
            EdgeLabel::HasLearner => src == K::Program && dst == K::Learner,
            EdgeLabel::HasData => src == K::Program && dst == K::Data,
            EdgeLabel::StartsWith => src == K::Architecture && dst == K::InputLayer,
            EdgeLabel::Next => matches!(src, K::InputLayer | K::Layer) && dst == K::Layer,
            EdgeLabel::HasParams => src == K::Layer && dst == K::Parameters,
            EdgeLabel::HasLoss => src == K::Learner && dst == K::Loss,
            EdgeLabel::HasOptimizer => src == K::Learner && dst == K::Optimizer,
            EdgeLabel::HasMetric => src == K::Learner && dst == K::Metric,
            EdgeLabel::HasHyperparams => src == K::Learner && dst == K::Hyperparameters,
            EdgeLabel::HasLabels => src == K::Data && dst == K::Labels,
            EdgeLabel::EndsWith => src == K::Architecture && dst == K::Labels,
            EdgeLabel::HasFault => src != K::Fault && dst == K::Fault,
        }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Closed attribute vocabulary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Attr {
    // layers
    LayerType,
    Units,
    Filters,
    Kernel,
    Strides,
    PoolSize,
    Padding,
    Activation,
    Nonlinear,
    UseBias,
    Rate,
    KernelInitializer,
    BiasInitializer,
    DataFormat,
    TargetShape,
    TargetBatch,
    InShape,
    OutShape,
    ShapeError,
    ShapeDetail,
    Callee,
    // program / learner
    Dialect,
    HasInitializer,
    HasTrainingLoop,
    OptimizerLinked,
    GradsReset,
    Name,
    FromLogits,
    LearningRate,
    Epochs,
    BatchSize,
    // faults
    Code,
    Message,
}

impl Attr {
    pub const ALL: [Attr; 33] = [
        Attr::LayerType,
        Attr::Units,
        Attr::Filters,
        Attr::Kernel,
        Attr::Strides,
        Attr::PoolSize,
        Attr::Padding,
        Attr::Activation,
        Attr::Nonlinear,
        Attr::UseBias,
        Attr::Rate,
        Attr::KernelInitializer,
        Attr::BiasInitializer,
        Attr::DataFormat,
        Attr::TargetShape,
        Attr::TargetBatch,
        Attr::InShape,
        Attr::OutShape,
        Attr::ShapeError,
        Attr::ShapeDetail,
        Attr::Callee,
        Attr::Dialect,
        Attr::HasInitializer,
        Attr::HasTrainingLoop,
        Attr::OptimizerLinked,
        Attr::GradsReset,
        Attr::Name,
        Attr::FromLogits,
        Attr::LearningRate,
        Attr::Epochs,
        Attr::BatchSize,
        Attr::Code,
        Attr::Message,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Attr::LayerType => "layer_type",
            Attr::Units => "units",
            Attr::Filters => "filters",
            Attr::Kernel => "kernel",
            Attr::Strides => "strides",
            Attr::PoolSize => "pool_size",
            Attr::Padding => "padding",
            Attr::Activation => "activation",
            Attr::Nonlinear => "nonlinear",
            Attr::UseBias => "use_bias",
            Attr::Rate => "rate",
            Attr::KernelInitializer => "kernel_initializer",
            Attr::BiasInitializer => "bias_initializer",
            Attr::DataFormat => "data_format",
            Attr::TargetShape => "target_shape",
            Attr::TargetBatch => "target_batch",
            Attr::InShape => "in_shape",
            Attr::OutShape => "out_shape",
            Attr::ShapeError => "shape_error",
            Attr::ShapeDetail => "shape_detail",
            Attr::Callee => "callee",
            Attr::Dialect => "dialect",
            Attr::HasInitializer => "has_initializer",
            Attr::HasTrainingLoop => "has_training_loop",
            Attr::OptimizerLinked => "optimizer_linked",
            Attr::GradsReset => "grads_reset",
            Attr::Name => "name",
            Attr::FromLogits => "from_logits",
            Attr::LearningRate => "learning_rate",
            Attr::Epochs => "epochs",
            Attr::BatchSize => "batch_size",
            Attr::Code => "code",
            Attr::Message => "message",
        }
    }

    pub fn from_name(name: &str) -> Option<Attr> {
        Attr::ALL.iter().copied().find(|a| a.as_str() == name)
    }
}

impl fmt::Display for Attr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum AttrValue {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    IntList(Vec<i64>),
    Shape(TensorShape),
}

impl AttrValue {
    pub fn text(s: impl Into<String>) -> Self {
        AttrValue::Text(s.into())
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            AttrValue::Int(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            AttrValue::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_int_list(&self) -> Option<&[i64]> {
        match self {
            AttrValue::IntList(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_shape(&self) -> Option<&TensorShape> {
        match self {
            AttrValue::Shape(s) => Some(s),
            _ => None,
        }
    }
}

impl From<&str> for AttrValue {
    fn from(s: &str) -> Self {
        AttrValue::Text(s.to_string())
    }
}

impl From<i64> for AttrValue {
    fn from(n: i64) -> Self {
        AttrValue::Int(n)
    }
}

impl From<bool> for AttrValue {
    fn from(b: bool) -> Self {
        AttrValue::Bool(b)
    }
}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Int(n) => write!(f, "{n}"),
            AttrValue::Float(x) => write!(f, "{x:?}"),
            AttrValue::Bool(b) => write!(f, "{b}"),
            AttrValue::Text(s) => f.write_str(s),
            AttrValue::IntList(v) => {
                f.write_str("(")?;
                for (i, n) in v.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{n}")?;
                }
                f.write_str(")")
            }
            AttrValue::Shape(s) => write!(f, "{s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "n{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub kind: NodeKind,
    pub attrs: BTreeMap<Attr, AttrValue>,
    pub source_line: Option<u32>,
}

impl Node {
    pub fn attr(&self, a: Attr) -> Option<&AttrValue> {
        self.attrs.get(&a)
    }

    pub fn text(&self, a: Attr) -> Option<&str> {
        self.attr(a).and_then(AttrValue::as_text)
    }

    pub fn int(&self, a: Attr) -> Option<i64> {
        self.attr(a).and_then(AttrValue::as_int)
    }

    pub fn flag(&self, a: Attr) -> Option<bool> {
        self.attr(a).and_then(AttrValue::as_bool)
    }

    pub fn shape(&self, a: Attr) -> Option<&TensorShape> {
        self.attr(a).and_then(AttrValue::as_shape)
    }

    pub fn layer_type(&self) -> Option<&str> {
        self.text(Attr::LayerType)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: NodeId,
    pub label: EdgeLabel,
    pub dst: NodeId,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("edge {label} references missing node {id}")]
    DanglingEdge { label: EdgeLabel, id: NodeId },
    #[error("node {0} does not exist")]
    NoSuchNode(NodeId),
}

/// A host graph. Node ids are dense indices assigned in insertion order and
/// never renumbered.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AttributedGraph {
    nodes: Vec<Node>,
    edges: BTreeSet<Edge>,
    out_adj: Vec<Vec<(EdgeLabel, NodeId)>>,
    in_adj: Vec<Vec<(EdgeLabel, NodeId)>>,
}

pub fn new_graph() -> AttributedGraph {
    AttributedGraph::default()
}

impl AttributedGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn add_node(&mut self, kind: NodeKind) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        self.nodes.push(Node {
            id,
            kind,
            attrs: BTreeMap::new(),
            source_line: None,
        });
        self.out_adj.push(Vec::new());
        self.in_adj.push(Vec::new());
        id
    }

    pub fn add_node_with(
        &mut self,
        kind: NodeKind,
        attrs: impl IntoIterator<Item = (Attr, AttrValue)>,
        source_line: Option<u32>,
    ) -> NodeId {
        let id = self.add_node(kind);
        let node = &mut self.nodes[id.index()];
        node.attrs.extend(attrs);
        node.source_line = source_line;
        id
    }

    pub fn add_edge(&mut self, src: NodeId, label: EdgeLabel, dst: NodeId) -> Result<(), GraphError> {
        for id in [src, dst] {
            if id.index() >= self.nodes.len() {
                return Err(GraphError::DanglingEdge { label, id });
            }
        }
        if self.edges.insert(Edge { src, label, dst }) {
            self.out_adj[src.index()].push((label, dst));
            self.in_adj[dst.index()].push((label, src));
        }
        Ok(())
    }

    pub fn set_attr(&mut self, id: NodeId, attr: Attr, value: AttrValue) -> Result<(), GraphError> {
        let node = self.nodes.get_mut(id.index()).ok_or(GraphError::NoSuchNode(id))?;
        node.attrs.insert(attr, value);
        Ok(())
    }

    pub fn set_source_line(&mut self, id: NodeId, line: Option<u32>) -> Result<(), GraphError> {
        let node = self.nodes.get_mut(id.index()).ok_or(GraphError::NoSuchNode(id))?;
        node.source_line = line;
        Ok(())
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.nodes.get(id.index())
    }

    pub fn nodes(&self) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter()
    }

    pub fn nodes_of(&self, kind: NodeKind) -> impl Iterator<Item = &Node> + '_ {
        self.nodes.iter().filter(move |n| n.kind == kind)
    }

    pub fn first_of(&self, kind: NodeKind) -> Option<&Node> {
        self.nodes_of(kind).next()
    }

    pub fn edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter()
    }

    pub fn has_edge(&self, src: NodeId, label: EdgeLabel, dst: NodeId) -> bool {
        self.edges.contains(&Edge { src, label, dst })
    }

    pub fn out_edges(&self, id: NodeId) -> &[(EdgeLabel, NodeId)] {
        self.out_adj.get(id.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn in_edges(&self, id: NodeId) -> &[(EdgeLabel, NodeId)] {
        self.in_adj.get(id.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn successors(&self, id: NodeId, label: EdgeLabel) -> impl Iterator<Item = NodeId> + '_ {
        self.out_edges(id)
            .iter()
            .filter(move |(l, _)| *l == label)
            .map(|&(_, n)| n)
    }

    pub fn predecessors(&self, id: NodeId, label: EdgeLabel) -> impl Iterator<Item = NodeId> + '_ {
        self.in_edges(id)
            .iter()
            .filter(move |(l, _)| *l == label)
            .map(|&(_, n)| n)
    }

    /// The single `next` successor, if any.
    pub fn next_of(&self, id: NodeId) -> Option<NodeId> {
        self.successors(id, EdgeLabel::Next).next()
    }

    pub fn prev_of(&self, id: NodeId) -> Option<NodeId> {
        self.predecessors(id, EdgeLabel::Next).next()
    }

    /// Typing conformance: every edge is admitted by the type graph and the
    /// `next` relation is a simple path.
    pub fn conforms(&self) -> bool {
        let typed = self.edges.iter().all(|e| {
            match (self.node(e.src), self.node(e.dst)) {
                (Some(s), Some(d)) => e.label.admits(s.kind, d.kind),
                _ => false,
            }
        });
        typed && self.next_is_simple_path()
    }

    fn next_is_simple_path(&self) -> bool {
        let mut out_deg = vec![0u32; self.nodes.len()];
        let mut in_deg = vec![0u32; self.nodes.len()];
        for e in self.edges.iter().filter(|e| e.label == EdgeLabel::Next) {
            out_deg[e.src.index()] += 1;
            in_deg[e.dst.index()] += 1;
        }
        if out_deg.iter().chain(in_deg.iter()).any(|&d| d > 1) {
            return false;
        }
        // With degrees <= 1 the relation is a union of chains and cycles; a
        // cycle is a component in which every node has an incoming edge.
        let mut visited = vec![false; self.nodes.len()];
        for start in 0..self.nodes.len() {
            if in_deg[start] != 0 {
                continue;
            }
            let mut cur = Some(NodeId(start as u32));
            while let Some(id) = cur {
                visited[id.index()] = true;
                cur = self.next_of(id);
            }
        }
        (0..self.nodes.len()).all(|i| visited[i] || (in_deg[i] == 0 && out_deg[i] == 0))
    }

    /// Nodes reachable from `from` through one or more `next` edges, in path
    /// order, cut off before the first node for which `stop` holds.
    pub fn next_closure(&self, from: NodeId, stop: impl Fn(&Node) -> bool) -> Vec<NodeId> {
        let mut out = Vec::new();
        let mut cur = self.next_of(from);
        while let Some(id) = cur {
            if id == from || out.len() > self.nodes.len() {
                break;
            }
            let node = &self.nodes[id.index()];
            if stop(node) {
                break;
            }
            out.push(id);
            cur = self.next_of(id);
        }
        out
    }

    /// Attach a Fault node with `code` and `message` to `anchor`.
    pub fn attach_fault(&mut self, anchor: NodeId, code: &str, message: &str) -> Result<NodeId, GraphError> {
        if anchor.index() >= self.nodes.len() {
            return Err(GraphError::NoSuchNode(anchor));
        }
        let fault = self.add_node_with(
            NodeKind::Fault,
            [
                (Attr::Code, AttrValue::text(code)),
                (Attr::Message, AttrValue::text(message)),
            ],
            None,
        );
        self.add_edge(anchor, EdgeLabel::HasFault, fault)?;
        Ok(fault)
    }

    /// Fault codes attached to `id`.
    pub fn fault_codes(&self, id: NodeId) -> impl Iterator<Item = &str> + '_ {
        self.successors(id, EdgeLabel::HasFault)
            .filter_map(|f| self.node(f).and_then(|n| n.text(Attr::Code)))
    }

    pub fn has_fault_code(&self, id: NodeId, code: &str) -> bool {
        self.fault_codes(id).any(|c| c == code)
    }

    /// `(code, anchor)` for every Fault node, sorted.
    pub fn fault_set(&self) -> Vec<(String, NodeId)> {
        let mut out: Vec<(String, NodeId)> = self
            .edges
            .iter()
            .filter(|e| e.label == EdgeLabel::HasFault)
            .filter_map(|e| {
                let code = self.node(e.dst)?.text(Attr::Code)?;
                Some((code.to_string(), e.src))
            })
            .collect();
        out.sort();
        out
    }

    /// The graph with every Fault node and `has_fault` edge removed. Fault
    /// nodes are only ever appended, so remaining ids are unchanged.
    pub fn without_faults(&self) -> AttributedGraph {
        let mut g = AttributedGraph::new();
        for n in &self.nodes {
            if n.kind == NodeKind::Fault {
                continue;
            }
            let id = g.add_node_with(n.kind, n.attrs.clone(), n.source_line);
            debug_assert_eq!(id, n.id);
        }
        for e in &self.edges {
            if e.label != EdgeLabel::HasFault && e.src.index() < g.node_count() && e.dst.index() < g.node_count() {
                let _ = g.add_edge(e.src, e.label, e.dst);
            }
        }
        g
    }

    /// Deterministic textual dump: one node per line `id kind {attrs}`, then
    /// one edge per line `src -label-> dst`, both sorted by id.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        for n in &self.nodes {
            let _ = write!(s, "{} {} {{", n.id, n.kind);
            let mut first = true;
            for (k, v) in &n.attrs {
                if !first {
                    s.push_str(", ");
                }
                first = false;
                match v {
                    AttrValue::Text(t) => {
                        let _ = write!(s, "{k}={t:?}");
                    }
                    other => {
                        let _ = write!(s, "{k}={other}");
                    }
                }
            }
            if let Some(line) = n.source_line {
                if !first {
                    s.push_str(", ");
                }
                let _ = write!(s, "line={line}");
            }
            s.push_str("}\n");
        }
        for e in &self.edges {
            let _ = writeln!(s, "{} -{}-> {}", e.src, e.label, e.dst);
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(types: &[&str]) -> (AttributedGraph, Vec<NodeId>) {
        let mut g = new_graph();
        let mut ids = Vec::new();
        let mut prev: Option<NodeId> = None;
        for t in types {
            let id = g.add_node_with(NodeKind::Layer, [(Attr::LayerType, AttrValue::text(*t))], None);
            if let Some(p) = prev {
                g.add_edge(p, EdgeLabel::Next, id).unwrap();
            }
            prev = Some(id);
            ids.push(id);
        }
        (g, ids)
    }

    #[test]
    fn empty_graph() {
        let g = new_graph();
        assert_eq!(g.node_count(), 0);
        assert_eq!(g.edge_count(), 0);
        assert!(g.conforms());
    }

    #[test]
    fn single_program_node_conforms() {
        let mut g = new_graph();
        g.add_node(NodeKind::Program);
        assert!(g.conforms());
    }

    #[test]
    fn dangling_edge_rejected() {
        let mut g = new_graph();
        let p = g.add_node(NodeKind::Program);
        let err = g.add_edge(p, EdgeLabel::HasArchitecture, NodeId(7)).unwrap_err();
        assert_eq!(
            err,
            GraphError::DanglingEdge {
                label: EdgeLabel::HasArchitecture,
                id: NodeId(7)
            }
        );
    }

    #[test]
    fn legal_typing() {
        let mut g = new_graph();
        let p = g.add_node(NodeKind::Program);
        let a = g.add_node(NodeKind::Architecture);
        let i = g.add_node(NodeKind::InputLayer);
        g.add_edge(p, EdgeLabel::HasArchitecture, a).unwrap();
        g.add_edge(a, EdgeLabel::StartsWith, i).unwrap();
        assert!(g.conforms());
    }

    #[test]
    fn next_from_loss_is_ill_typed() {
        let mut g = new_graph();
        let loss = g.add_node(NodeKind::Loss);
        let l = g.add_node(NodeKind::Layer);
        g.add_edge(loss, EdgeLabel::Next, l).unwrap();
        assert!(!g.conforms());
    }

    #[test]
    fn next_sources_enumerated() {
        // only InputLayer and Layer may carry an outgoing `next`
        for k in NodeKind::ALL {
            let ok = EdgeLabel::Next.admits(k, NodeKind::Layer);
            assert_eq!(ok, matches!(k, NodeKind::InputLayer | NodeKind::Layer), "{k}");
        }
    }

    #[test]
    fn branching_next_violates_simple_path() {
        let (mut g, ids) = chain(&["dense", "dense"]);
        let extra = g.add_node(NodeKind::Layer);
        g.add_edge(ids[0], EdgeLabel::Next, extra).unwrap();
        assert!(!g.conforms());
    }

    #[test]
    fn next_cycle_violates_simple_path() {
        let (mut g, ids) = chain(&["dense", "dense", "dense"]);
        g.add_edge(ids[2], EdgeLabel::Next, ids[0]).unwrap();
        assert!(!g.conforms());
    }

    #[test]
    fn closure_without_barrier() {
        let (g, ids) = chain(&["a", "b", "c"]);
        assert_eq!(g.next_closure(ids[0], |_| false), vec![ids[1], ids[2]]);
    }

    #[test]
    fn closure_barrier_at_first_hop() {
        let (g, ids) = chain(&["a", "b", "c"]);
        let b = ids[1];
        assert!(g.next_closure(ids[0], |n| n.id == b).is_empty());
    }

    #[test]
    fn closure_stops_at_learning_layer() {
        let (g, ids) = chain(&["conv2d", "activation", "activation", "dense"]);
        let learning = |n: &Node| matches!(n.layer_type(), Some("dense" | "conv2d"));
        assert_eq!(g.next_closure(ids[0], learning), vec![ids[1], ids[2]]);
    }

    #[test]
    fn fault_attachment_keeps_conformance() {
        let (mut g, ids) = chain(&["dense", "dense"]);
        assert!(g.conforms());
        g.attach_fault(ids[1], "IPS-03", "m").unwrap();
        assert!(g.conforms());
        assert!(g.has_fault_code(ids[1], "IPS-03"));
        assert_eq!(g.without_faults(), chain(&["dense", "dense"]).0);
    }

    #[test]
    fn dump_is_sorted_and_stable() {
        let (mut g, ids) = chain(&["dense", "flatten"]);
        g.set_source_line(ids[0], Some(3)).unwrap();
        g.set_attr(ids[0], Attr::Units, AttrValue::Int(10)).unwrap();
        let expected = "n0 Layer {layer_type=\"dense\", units=10, line=3}\nn1 Layer {layer_type=\"flatten\"}\nn0 -next-> n1\n";
        assert_eq!(g.dump(), expected);
        assert_eq!(g.clone().dump(), expected);
    }

    #[test]
    fn attr_names_roundtrip() {
        for a in Attr::ALL {
            assert_eq!(Attr::from_name(a.as_str()), Some(a));
        }
    }
}
