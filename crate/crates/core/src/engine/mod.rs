//! Rule application to a fixpoint.
//!
//! Effects are additive (one Fault node plus a `has_fault` edge) and every
//! pattern carries an implicit NAC forbidding a second fault with the same
//! code on the same anchor. Applications therefore never disable each other
//! and the final fault set does not depend on the order rules are tried in.

mod matcher;
pub mod pattern;
mod view;

use std::fmt;

use thiserror::Error;

use crate::graph::{Attr, AttributedGraph, GraphError, NodeId};

pub use matcher::Match;
pub use pattern::{
    Cmp, Derived, EdgeSpec, FaultSpec, Nac, PathMode, PatternBuilder, Pred, Relation, RulePattern, SlotId, SlotSpec,
    Term,
};
pub use view::View;

use matcher::Matcher;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("match is no longer valid for rule {rule}")]
    StaleMatch { rule: u8 },
    #[error("iteration cap of {cap} rule applications exceeded")]
    IterationCap { cap: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// One rule application, as reported by the trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Application {
    pub rule: u8,
    pub anchor: NodeId,
    pub code: &'static str,
}

impl fmt::Display for Application {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.rule, self.anchor, self.code)
    }
}

#[derive(Debug, Clone)]
pub struct Fixpoint {
    pub graph: AttributedGraph,
    pub trace: Vec<Application>,
}

/// All matches of `p` in `g`, ordered by anchor id.
pub fn find_matches(p: &RulePattern, g: &AttributedGraph) -> Vec<Match> {
    let view = View::new(g);
    Matcher::new(g, &view).all(p)
}

/// Applies `p` at `m`, attaching one Fault node to the anchor.
pub fn apply(p: &RulePattern, mut g: AttributedGraph, m: &Match) -> Result<AttributedGraph, EngineError> {
    let view = View::new(&g);
    if !Matcher::new(&g, &view).validate(p, m) {
        return Err(EngineError::StaleMatch { rule: p.rule });
    }
    let message = render_message(p, &g, &view, m);
    g.attach_fault(m.get(p.anchor()), p.effect.code, &message)?;
    Ok(g)
}

/// Applies rules in `(priority, rule, anchor)` order until no rule matches.
pub fn run_to_fixpoint(g: AttributedGraph, rules: &[RulePattern]) -> Result<Fixpoint, EngineError> {
    let mut g = g;
    let mut order: Vec<&RulePattern> = rules.iter().collect();
    order.sort_by_key(|p| (p.priority, p.rule));
    let cap = 10usize
        .saturating_mul(rules.len().max(1))
        .saturating_mul(g.node_count().max(1));
    let view = View::new(&g);
    let mut trace = Vec::new();
    loop {
        let mut pending = Vec::new();
        {
            let matcher = Matcher::new(&g, &view);
            for p in &order {
                for anchor in matcher.anchors(p) {
                    if let Some(m) = matcher.first_at(p, anchor) {
                        pending.push((*p, m));
                    }
                }
            }
        }
        if pending.is_empty() {
            break;
        }
        for (p, m) in pending {
            let anchor = m.get(p.anchor());
            // an earlier application in this pass may have disabled it
            if g.has_fault_code(anchor, p.effect.code) {
                continue;
            }
            let message = render_message(p, &g, &view, &m);
            g.attach_fault(anchor, p.effect.code, &message)?;
            trace.push(Application {
                rule: p.rule,
                anchor,
                code: p.effect.code,
            });
            if trace.len() > cap {
                return Err(EngineError::IterationCap { cap });
            }
        }
    }
    Ok(Fixpoint { graph: g, trace })
}

/// Expands `{slot.name}` placeholders of the effect message.
fn render_message(p: &RulePattern, g: &AttributedGraph, view: &View, m: &Match) -> String {
    let template = p.effect.message;
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(start) = rest.find('{') {
        out.push_str(&rest[..start]);
        let after = &rest[start + 1..];
        let Some(end) = after.find('}') else {
            out.push_str(&rest[start..]);
            return out;
        };
        out.push_str(&placeholder(p, g, view, m, &after[..end]));
        rest = &after[end + 1..];
    }
    out.push_str(rest);
    out
}

fn placeholder(p: &RulePattern, g: &AttributedGraph, view: &View, m: &Match, key: &str) -> String {
    let Some((slot, name)) = key.split_once('.') else {
        return "?".into();
    };
    let Some(slot) = p.slot_by_name(slot) else {
        return "?".into();
    };
    let Some(node) = g.node(m.get(slot)) else {
        return "?".into();
    };
    let term = match (Attr::from_name(name), Derived::from_name(name)) {
        (Some(a), _) => Term::Attr(a),
        (None, Some(d)) => Term::Derived(d),
        (None, None) => return "?".into(),
    };
    view.term(node, term).map_or_else(|| "?".into(), |v| v.to_string())
}
