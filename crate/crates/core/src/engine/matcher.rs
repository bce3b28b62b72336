//! Backtracking search for injective pattern matches.

use crate::graph::{AttributedGraph, Node, NodeId};

use super::pattern::{EdgeSpec, Nac, PathMode, Pred, Relation, RulePattern, SlotId, SlotSpec};
use super::view::{backward_reach, forward_reach, View};

/// An injective assignment of left-hand side slots to nodes, indexed by slot.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Match {
    pub nodes: Vec<NodeId>,
}

impl Match {
    pub fn get(&self, slot: SlotId) -> NodeId {
        self.nodes[slot.0]
    }
}

/// Constraint set for one search: the slots, edges and relations in scope,
/// plus extra predicates on particular slots.
struct Problem<'p> {
    slots: Vec<&'p SlotSpec>,
    edges: Vec<&'p EdgeSpec>,
    relations: Vec<&'p Relation>,
    extra: Vec<(SlotId, &'p Pred)>,
    /// Slots below this index belong to the left-hand side; NAC slots may
    /// reuse their nodes but stay injective among themselves.
    shared: usize,
}

impl<'p> Problem<'p> {
    fn lhs(p: &'p RulePattern) -> Self {
        Problem {
            slots: p.slots.iter().collect(),
            edges: p.edges.iter().collect(),
            relations: p.relations.iter().collect(),
            extra: Vec::new(),
            shared: 0,
        }
    }

    fn with_nac(p: &'p RulePattern, nac: &'p Nac) -> Self {
        Problem {
            slots: p.slots.iter().chain(nac.slots.iter()).collect(),
            edges: nac.edges.iter().collect(),
            relations: nac.relations.iter().collect(),
            extra: nac.bound.iter().map(|(s, p)| (*s, p)).collect(),
            shared: p.slots.len(),
        }
    }
}

pub(crate) struct Matcher<'g> {
    g: &'g AttributedGraph,
    view: &'g View,
}

impl<'g> Matcher<'g> {
    pub(crate) fn new(g: &'g AttributedGraph, view: &'g View) -> Self {
        Matcher { g, view }
    }

    fn node(&self, id: NodeId) -> &'g Node {
        self.g.node(id).expect("matched node exists")
    }

    fn holds(&self, id: NodeId, p: &Pred) -> bool {
        self.view.eval(self.node(id), p) == Some(true)
    }

    fn slot_ok(&self, prob: &Problem<'_>, slot: SlotId, id: NodeId) -> bool {
        let spec = prob.slots[slot.0];
        let node = self.node(id);
        node.kind == spec.kind
            && spec.preds.iter().all(|p| self.holds(id, p))
            && prob.extra.iter().filter(|(s, _)| *s == slot).all(|(_, p)| self.holds(id, p))
    }

    fn edge_ok(&self, e: &EdgeSpec, src: NodeId, dst: NodeId) -> bool {
        match &e.mode {
            PathMode::Direct => self.g.has_edge(src, e.label, dst),
            PathMode::Closure { barrier } => forward_reach(self.g, self.view, src, barrier).contains(&dst),
        }
    }

    fn relation_ok(&self, r: &Relation, assign: &[Option<NodeId>]) -> Option<bool> {
        let a = assign[r.left.0 .0]?;
        let b = assign[r.right.0 .0]?;
        Some(self.view.compare(self.node(a), r.left.1, r.cmp, self.node(b), r.right.1) == Some(true))
    }

    /// Checks every constraint touching `slot` whose other endpoints are bound.
    fn consistent(&self, prob: &Problem<'_>, slot: SlotId, assign: &[Option<NodeId>]) -> bool {
        for e in &prob.edges {
            if e.src != slot && e.dst != slot {
                continue;
            }
            if let (Some(s), Some(d)) = (assign[e.src.0], assign[e.dst.0]) {
                if !self.edge_ok(e, s, d) {
                    return false;
                }
            }
        }
        for r in &prob.relations {
            if r.left.0 != slot && r.right.0 != slot {
                continue;
            }
            if self.relation_ok(r, assign) == Some(false) {
                return false;
            }
        }
        true
    }

    fn candidates(&self, prob: &Problem<'_>, slot: SlotId, assign: &[Option<NodeId>]) -> Vec<NodeId> {
        for e in &prob.edges {
            if e.dst == slot {
                if let Some(src) = assign[e.src.0] {
                    return match &e.mode {
                        PathMode::Direct => self.g.successors(src, e.label).collect(),
                        PathMode::Closure { barrier } => forward_reach(self.g, self.view, src, barrier),
                    };
                }
            }
            if e.src == slot {
                if let Some(dst) = assign[e.dst.0] {
                    return match &e.mode {
                        PathMode::Direct => self.g.predecessors(dst, e.label).collect(),
                        PathMode::Closure { barrier } => backward_reach(self.g, self.view, dst, barrier),
                    };
                }
            }
        }
        let kind = prob.slots[slot.0].kind;
        self.g.nodes_of(kind).map(|n| n.id).collect()
    }

    fn pick_slot(&self, prob: &Problem<'_>, assign: &[Option<NodeId>]) -> Option<SlotId> {
        let unbound = |s: SlotId| assign[s.0].is_none();
        for e in &prob.edges {
            if unbound(e.dst) && assign[e.src.0].is_some() {
                return Some(e.dst);
            }
            if unbound(e.src) && assign[e.dst.0].is_some() {
                return Some(e.src);
            }
        }
        (0..prob.slots.len()).map(SlotId).find(|&s| unbound(s))
    }

    /// Depth-first extension of `assign`. `found` returns `false` to stop the
    /// search; the function returns `false` when stopped.
    fn solve(
        &self,
        prob: &Problem<'_>,
        assign: &mut Vec<Option<NodeId>>,
        found: &mut dyn FnMut(&[Option<NodeId>]) -> bool,
    ) -> bool {
        let Some(slot) = self.pick_slot(prob, assign) else {
            return found(assign);
        };
        for cand in self.candidates(prob, slot, assign) {
            if assign[prob.shared..].contains(&Some(cand)) {
                continue;
            }
            if !self.slot_ok(prob, slot, cand) {
                continue;
            }
            assign[slot.0] = Some(cand);
            let keep_going = !self.consistent(prob, slot, assign) || self.solve(prob, assign, found);
            assign[slot.0] = None;
            if !keep_going {
                return false;
            }
        }
        true
    }

    fn nac_blocks(&self, p: &RulePattern, nac: &Nac, lhs: &[Option<NodeId>]) -> bool {
        let prob = Problem::with_nac(p, nac);
        let mut assign = lhs.to_vec();
        assign.resize(prob.slots.len(), None);
        // predicates on already bound slots
        for (slot, pred) in &nac.bound {
            match assign.get(slot.0).copied().flatten() {
                Some(id) if self.holds(id, pred) => {}
                _ => return false,
            }
        }
        // constraints among bound slots only
        for e in &prob.edges {
            if let (Some(s), Some(d)) = (assign[e.src.0], assign[e.dst.0]) {
                if !self.edge_ok(e, s, d) {
                    return false;
                }
            }
        }
        for r in &prob.relations {
            if self.relation_ok(r, &assign) == Some(false) {
                return false;
            }
        }
        let mut blocked = false;
        self.solve(&prob, &mut assign, &mut |_| {
            blocked = true;
            false
        });
        blocked
    }

    fn anchor_free(&self, p: &RulePattern, id: NodeId) -> bool {
        !self.g.has_fault_code(id, p.effect.code)
    }

    /// Visits complete matches anchored at `anchor` (all of them, unless
    /// `visit` returns `false`).
    fn matches_at(&self, p: &RulePattern, anchor: NodeId, visit: &mut dyn FnMut(Match) -> bool) {
        let prob = Problem::lhs(p);
        let a = p.anchor();
        if !self.slot_ok(&prob, a, anchor) || !self.anchor_free(p, anchor) {
            return;
        }
        let mut assign = vec![None; prob.slots.len()];
        assign[a.0] = Some(anchor);
        if !self.consistent(&prob, a, &assign) {
            return;
        }
        self.solve(&prob, &mut assign, &mut |full| {
            if p.nacs.iter().any(|nac| self.nac_blocks(p, nac, full)) {
                return true;
            }
            let nodes = full.iter().map(|n| n.expect("complete assignment")).collect();
            visit(Match { nodes })
        });
    }

    pub(crate) fn anchors(&self, p: &RulePattern) -> Vec<NodeId> {
        let kind = p.slots[p.anchor().0].kind;
        self.g.nodes_of(kind).map(|n| n.id).collect()
    }

    pub(crate) fn first_at(&self, p: &RulePattern, anchor: NodeId) -> Option<Match> {
        let mut out = None;
        self.matches_at(p, anchor, &mut |m| {
            out = Some(m);
            false
        });
        out
    }

    pub(crate) fn all(&self, p: &RulePattern) -> Vec<Match> {
        let mut out = Vec::new();
        for anchor in self.anchors(p) {
            let mut here = Vec::new();
            self.matches_at(p, anchor, &mut |m| {
                here.push(m);
                true
            });
            here.sort();
            out.extend(here);
        }
        out
    }

    /// Whether `m` is still a valid match of `p`.
    pub(crate) fn validate(&self, p: &RulePattern, m: &Match) -> bool {
        if m.nodes.len() != p.slots.len() || m.nodes.iter().any(|&n| self.g.node(n).is_none()) {
            return false;
        }
        let mut seen = std::collections::BTreeSet::new();
        if !m.nodes.iter().all(|n| seen.insert(*n)) {
            return false;
        }
        let prob = Problem::lhs(p);
        let assign: Vec<Option<NodeId>> = m.nodes.iter().copied().map(Some).collect();
        let slots_ok = (0..p.slots.len()).all(|i| self.slot_ok(&prob, SlotId(i), m.nodes[i]));
        let edges_ok = p.edges.iter().all(|e| self.edge_ok(e, m.get(e.src), m.get(e.dst)));
        let rels_ok = p.relations.iter().all(|r| self.relation_ok(r, &assign) == Some(true));
        slots_ok
            && edges_ok
            && rels_ok
            && self.anchor_free(p, m.get(p.anchor()))
            && !p.nacs.iter().any(|nac| self.nac_blocks(p, nac, &assign))
    }
}
