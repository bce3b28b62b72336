//! Declarative rule patterns: a left-hand side of typed slots with attribute
//! predicates and edge constraints, a list of negative application conditions,
//! and an additive effect that attaches one Fault node to the anchor slot.

use crate::graph::{Attr, AttrValue, EdgeLabel, NodeKind};
use crate::layer::LayerType;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SlotId(pub usize);

/// Values computed from the graph rather than stored on a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Derived {
    /// Whether a learning layer is the last learning layer of its chain.
    IsOutput,
    /// The activation finally applied to a learning layer's output: the last
    /// non-linear activation layer before the next learning layer, else the
    /// layer's own activation; `"linear"` when there is none.
    EffectiveActivation,
    /// Product of the spatial extents of `out_shape`.
    FeatureArea,
    /// Product of the kernel extents.
    KernelArea,
    /// Largest stride along any axis.
    MaxStride,
    /// Graph-wide layer counts.
    ConvCount,
    PoolCount,
    ConvPoolCount,
}

impl Derived {
    pub const ALL: [Derived; 8] = [
        Derived::IsOutput,
        Derived::EffectiveActivation,
        Derived::FeatureArea,
        Derived::KernelArea,
        Derived::MaxStride,
        Derived::ConvCount,
        Derived::PoolCount,
        Derived::ConvPoolCount,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Derived::IsOutput => "is_output",
            Derived::EffectiveActivation => "effective_activation",
            Derived::FeatureArea => "feature_area",
            Derived::KernelArea => "kernel_area",
            Derived::MaxStride => "max_stride",
            Derived::ConvCount => "conv_count",
            Derived::PoolCount => "pool_count",
            Derived::ConvPoolCount => "conv_pool_count",
        }
    }

    pub fn from_name(name: &str) -> Option<Derived> {
        Derived::ALL.iter().copied().find(|d| d.as_str() == name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Term {
    Attr(Attr),
    Derived(Derived),
}

impl From<Attr> for Term {
    fn from(a: Attr) -> Self {
        Term::Attr(a)
    }
}

impl From<Derived> for Term {
    fn from(d: Derived) -> Self {
        Term::Derived(d)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl Cmp {
    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            Cmp::Lt => a < b,
            Cmp::Le => a <= b,
            Cmp::Gt => a > b,
            Cmp::Ge => a >= b,
            Cmp::Eq => a == b,
            Cmp::Ne => a != b,
        }
    }
}

/// Node predicate with three-valued semantics: a missing operand makes the
/// predicate unknown, and only a definite `true` lets a slot match.
#[derive(Debug, Clone, PartialEq)]
pub enum Pred {
    Eq(Term, AttrValue),
    In(Term, Vec<AttrValue>),
    /// Known and not one of the values.
    NotIn(Term, Vec<AttrValue>),
    Cmp(Term, Cmp, i64),
    /// `sum(coef * term) cmp rhs` over integer terms.
    Linear(Vec<(i64, Term)>, Cmp, i64),
    Not(Box<Pred>),
    Any(Vec<Pred>),
    All(Vec<Pred>),
}

impl Pred {
    pub fn layer(types: &[LayerType]) -> Pred {
        Pred::In(
            Term::Attr(Attr::LayerType),
            types.iter().map(|t| AttrValue::text(t.as_str())).collect(),
        )
    }

    pub fn is(term: impl Into<Term>, v: impl Into<AttrValue>) -> Pred {
        Pred::Eq(term.into(), v.into())
    }

    pub fn text_in(term: impl Into<Term>, values: &[&str]) -> Pred {
        Pred::In(term.into(), values.iter().map(|&s| AttrValue::text(s)).collect())
    }

    pub fn text_not_in(term: impl Into<Term>, values: &[&str]) -> Pred {
        Pred::NotIn(term.into(), values.iter().map(|&s| AttrValue::text(s)).collect())
    }

    pub fn not(p: Pred) -> Pred {
        Pred::Not(Box::new(p))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlotSpec {
    pub name: &'static str,
    pub kind: NodeKind,
    pub preds: Vec<Pred>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PathMode {
    /// A single edge.
    Direct,
    /// One or more `next` edges; nodes strictly between the endpoints must
    /// not satisfy `barrier`.
    Closure { barrier: Pred },
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeSpec {
    pub src: SlotId,
    pub label: EdgeLabel,
    pub dst: SlotId,
    pub mode: PathMode,
}

/// Cross-slot comparison `left cmp right`.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub left: (SlotId, Term),
    pub cmp: Cmp,
    pub right: (SlotId, Term),
}

/// Negative application condition. Its slots are numbered after the
/// left-hand side slots; `bound` adds predicates on already matched slots.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Nac {
    pub slots: Vec<SlotSpec>,
    pub bound: Vec<(SlotId, Pred)>,
    pub edges: Vec<EdgeSpec>,
    pub relations: Vec<Relation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultSpec {
    pub code: &'static str,
    /// Message with `{slot.attr}` placeholders, where `attr` is an attribute
    /// name or a derived value name.
    pub message: &'static str,
    pub anchor: SlotId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RulePattern {
    pub rule: u8,
    pub priority: u8,
    pub slots: Vec<SlotSpec>,
    pub edges: Vec<EdgeSpec>,
    pub relations: Vec<Relation>,
    pub nacs: Vec<Nac>,
    pub effect: FaultSpec,
}

impl RulePattern {
    /// Starts a pattern; the first slot declared becomes the anchor.
    pub fn builder(rule: u8, priority: u8, code: &'static str, message: &'static str) -> PatternBuilder {
        PatternBuilder {
            pattern: RulePattern {
                rule,
                priority,
                slots: Vec::new(),
                edges: Vec::new(),
                relations: Vec::new(),
                nacs: Vec::new(),
                effect: FaultSpec {
                    code,
                    message,
                    anchor: SlotId(0),
                },
            },
        }
    }

    pub fn anchor(&self) -> SlotId {
        self.effect.anchor
    }

    pub fn slot_by_name(&self, name: &str) -> Option<SlotId> {
        self.slots.iter().position(|s| s.name == name).map(SlotId)
    }
}

pub struct PatternBuilder {
    pattern: RulePattern,
}

impl PatternBuilder {
    pub fn slot(&mut self, name: &'static str, kind: NodeKind, preds: Vec<Pred>) -> SlotId {
        self.pattern.slots.push(SlotSpec { name, kind, preds });
        SlotId(self.pattern.slots.len() - 1)
    }

    pub fn edge(&mut self, src: SlotId, label: EdgeLabel, dst: SlotId) {
        self.pattern.edges.push(EdgeSpec {
            src,
            label,
            dst,
            mode: PathMode::Direct,
        });
    }

    pub fn path(&mut self, src: SlotId, dst: SlotId, barrier: Pred) {
        self.pattern.edges.push(EdgeSpec {
            src,
            label: EdgeLabel::Next,
            dst,
            mode: PathMode::Closure { barrier },
        });
    }

    pub fn relate(&mut self, left: (SlotId, Term), cmp: Cmp, right: (SlotId, Term)) {
        self.pattern.relations.push(Relation { left, cmp, right });
    }

    /// Opens a NAC; call [`NacBuilder::done`] to attach it.
    pub fn nac(&mut self) -> NacBuilder<'_> {
        let base = self.pattern.slots.len();
        NacBuilder {
            owner: self,
            base,
            nac: Nac::default(),
        }
    }

    pub fn build(self) -> RulePattern {
        debug_assert!(!self.pattern.slots.is_empty(), "pattern without slots");
        self.pattern
    }
}

pub struct NacBuilder<'a> {
    owner: &'a mut PatternBuilder,
    base: usize,
    nac: Nac,
}

impl NacBuilder<'_> {
    pub fn slot(&mut self, name: &'static str, kind: NodeKind, preds: Vec<Pred>) -> SlotId {
        self.nac.slots.push(SlotSpec { name, kind, preds });
        SlotId(self.base + self.nac.slots.len() - 1)
    }

    pub fn require(&mut self, slot: SlotId, pred: Pred) {
        self.nac.bound.push((slot, pred));
    }

    pub fn edge(&mut self, src: SlotId, label: EdgeLabel, dst: SlotId) {
        self.nac.edges.push(EdgeSpec {
            src,
            label,
            dst,
            mode: PathMode::Direct,
        });
    }

    pub fn path(&mut self, src: SlotId, dst: SlotId, barrier: Pred) {
        self.nac.edges.push(EdgeSpec {
            src,
            label: EdgeLabel::Next,
            dst,
            mode: PathMode::Closure { barrier },
        });
    }

    pub fn relate(&mut self, left: (SlotId, Term), cmp: Cmp, right: (SlotId, Term)) {
        self.nac.relations.push(Relation { left, cmp, right });
    }

    pub fn done(self) {
        self.owner.pattern.nacs.push(self.nac);
    }
}
