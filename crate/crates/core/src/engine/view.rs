//! Derived per-node values consulted by pattern predicates.
//!
//! Rule effects only add Fault nodes, so everything here is a function of the
//! non-fault part of the graph and stays valid for a whole fixpoint run.

use crate::graph::{Attr, AttrValue, AttributedGraph, Node, NodeId, NodeKind};
use crate::layer::{is_linear_activation, LayerType};

use super::pattern::{Cmp, Derived, Pred, Term};

pub struct View {
    is_output: Vec<bool>,
    effective_activation: Vec<Option<String>>,
    conv_count: i64,
    pool_count: i64,
}

fn layer_type(n: &Node) -> Option<LayerType> {
    if n.kind != NodeKind::Layer {
        return None;
    }
    n.layer_type().and_then(LayerType::parse)
}

impl View {
    pub fn new(g: &AttributedGraph) -> View {
        let n = g.node_count();
        let mut is_output = vec![false; n];
        let mut effective_activation = vec![None; n];

        // Walk every chain backwards from its tail; the first learning layer
        // seen is the output layer of that chain.
        for tail in g.nodes().filter(|n| matches!(n.kind, NodeKind::Layer | NodeKind::InputLayer)) {
            if g.next_of(tail.id).is_some() {
                continue;
            }
            let mut seen_learning = false;
            let mut last_act: Option<String> = None;
            let mut cur = Some(tail.id);
            let mut steps = 0usize;
            while let Some(id) = cur {
                steps += 1;
                if steps > n {
                    break;
                }
                let node = g.node(id).expect("chain node exists");
                match layer_type(node) {
                    Some(lt) if lt.is_learning() => {
                        if !seen_learning {
                            is_output[id.index()] = true;
                            seen_learning = true;
                        }
                        effective_activation[id.index()] = match last_act.take() {
                            Some(a) => Some(a),
                            None => own_activation(node),
                        };
                    }
                    Some(LayerType::Activation) if node.flag(Attr::Nonlinear) == Some(true)
                        // walking backwards, so the first one met is the last applied
                        && last_act.is_none() => {
                            last_act = node.text(Attr::Activation).map(str::to_string);
                        }
                    _ => {}
                }
                cur = g.prev_of(id);
            }
        }

        let mut conv_count = 0;
        let mut pool_count = 0;
        for node in g.nodes() {
            match layer_type(node) {
                Some(lt) if lt.is_conv() => conv_count += 1,
                Some(lt) if lt.is_pool() => pool_count += 1,
                _ => {}
            }
        }
        View {
            is_output,
            effective_activation,
            conv_count,
            pool_count,
        }
    }

    pub fn derived(&self, node: &Node, d: Derived) -> Option<AttrValue> {
        match d {
            Derived::IsOutput => Some(AttrValue::Bool(self.is_output.get(node.id.index()).copied().unwrap_or(false))),
            Derived::EffectiveActivation => self
                .effective_activation
                .get(node.id.index())
                .cloned()
                .flatten()
                .map(AttrValue::Text),
            Derived::FeatureArea => feature_area(node).map(AttrValue::Int),
            Derived::KernelArea => {
                let k = node.attr(Attr::Kernel)?.as_int_list()?;
                k.iter()
                    .try_fold(1i64, |acc, &x| if x >= 1 { acc.checked_mul(x) } else { None })
                    .map(AttrValue::Int)
            }
            Derived::MaxStride => node
                .attr(Attr::Strides)?
                .as_int_list()?
                .iter()
                .copied()
                .max()
                .map(AttrValue::Int),
            Derived::ConvCount => Some(AttrValue::Int(self.conv_count)),
            Derived::PoolCount => Some(AttrValue::Int(self.pool_count)),
            Derived::ConvPoolCount => Some(AttrValue::Int(self.conv_count + self.pool_count)),
        }
    }

    pub fn term(&self, node: &Node, t: Term) -> Option<AttrValue> {
        match t {
            Term::Attr(a) => node.attr(a).cloned(),
            Term::Derived(d) => self.derived(node, d),
        }
    }

    pub fn eval(&self, node: &Node, p: &Pred) -> Option<bool> {
        match p {
            Pred::Eq(t, v) => self.term(node, *t).map(|x| &x == v),
            Pred::In(t, vs) => self.term(node, *t).map(|x| vs.contains(&x)),
            Pred::NotIn(t, vs) => self.term(node, *t).map(|x| !vs.contains(&x)),
            Pred::Cmp(t, cmp, rhs) => self.term(node, *t)?.as_int().map(|x| cmp.holds(x, *rhs)),
            Pred::Linear(terms, cmp, rhs) => {
                let mut sum = 0i64;
                for (coef, t) in terms {
                    let v = self.term(node, *t)?.as_int()?;
                    sum = sum.checked_add(coef.checked_mul(v)?)?;
                }
                Some(cmp.holds(sum, *rhs))
            }
            Pred::Not(inner) => self.eval(node, inner).map(|b| !b),
            Pred::Any(ps) => {
                let mut unknown = false;
                for p in ps {
                    match self.eval(node, p) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(false)
                }
            }
            Pred::All(ps) => {
                let mut unknown = false;
                for p in ps {
                    match self.eval(node, p) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(true)
                }
            }
        }
    }

    /// `a cmp b` across two nodes. Ordering needs integers; equality works on
    /// any attribute value.
    pub fn compare(&self, a: &Node, ta: Term, cmp: Cmp, b: &Node, tb: Term) -> Option<bool> {
        let va = self.term(a, ta)?;
        let vb = self.term(b, tb)?;
        match (va.as_int(), vb.as_int()) {
            (Some(x), Some(y)) => Some(cmp.holds(x, y)),
            _ => match cmp {
                Cmp::Eq => Some(va == vb),
                Cmp::Ne => Some(va != vb),
                _ => None,
            },
        }
    }
}

fn own_activation(node: &Node) -> Option<String> {
    match node.flag(Attr::Nonlinear) {
        Some(true) => node.text(Attr::Activation).map(str::to_string),
        Some(false) => Some("linear".to_string()),
        None => match node.text(Attr::Activation) {
            Some(a) if is_linear_activation(a) => Some("linear".to_string()),
            Some(a) => Some(a.to_string()),
            None => None,
        },
    }
}

fn feature_area(node: &Node) -> Option<i64> {
    let shape = node.shape(Attr::OutShape)?;
    if shape.rank() < 3 {
        return None;
    }
    let spatial = if node.text(Attr::DataFormat) == Some("channels_first") {
        &shape.dims[2..]
    } else {
        &shape.dims[1..shape.rank() - 1]
    };
    spatial
        .iter()
        .try_fold(1i64, |acc, d| d.known().and_then(|x| acc.checked_mul(i64::try_from(x).ok()?)))
}

/// Nodes reachable forward through `next` whose intermediate nodes all fail
/// `barrier`. The first barrier node itself is included.
pub(crate) fn forward_reach(g: &AttributedGraph, view: &View, from: NodeId, barrier: &Pred) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut cur = g.next_of(from);
    while let Some(id) = cur {
        if id == from || out.len() > g.node_count() {
            break;
        }
        out.push(id);
        let node = g.node(id).expect("reachable node exists");
        if view.eval(node, barrier) == Some(true) {
            break;
        }
        cur = g.next_of(id);
    }
    out
}

/// Mirror of [`forward_reach`] following `next` edges backwards.
pub(crate) fn backward_reach(g: &AttributedGraph, view: &View, to: NodeId, barrier: &Pred) -> Vec<NodeId> {
    let mut out = Vec::new();
    let mut cur = g.prev_of(to);
    while let Some(id) = cur {
        if id == to || out.len() > g.node_count() {
            break;
        }
        out.push(id);
        let node = g.node(id).expect("reachable node exists");
        if view.eval(node, barrier) == Some(true) {
            break;
        }
        cur = g.prev_of(id);
    }
    out
}
