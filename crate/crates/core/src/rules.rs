//! The rule catalog: 23 verification rules, each a set of declarative
//! patterns plus stable metadata (code, category, severity, remediation).
//!
//! Codes are `<CATEGORY>-<id>` with a two-digit id and are never renumbered.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Cmp, Derived, Pred, RulePattern, Term};
use crate::graph::{Attr, AttrValue, EdgeLabel, NodeKind};
use crate::layer::LayerType;
use crate::shape::codes as shape_codes;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Category {
    Ips,
    Ut,
    Apim,
    Si,
}

impl Category {
    pub fn as_str(self) -> &'static str {
        match self {
            Category::Ips => "IPS",
            Category::Ut => "UT",
            Category::Apim => "APIM",
            Category::Si => "SI",
        }
    }

    pub fn parse(s: &str) -> Option<Category> {
        match s.to_ascii_uppercase().as_str() {
            "IPS" => Some(Category::Ips),
            "UT" => Some(Category::Ut),
            "APIM" => Some(Category::Apim),
            "SI" => Some(Category::Si),
            _ => None,
        }
    }

    pub fn of_rule(id: u8) -> Option<Category> {
        match id {
            1..=5 => Some(Category::Ips),
            6..=9 => Some(Category::Ut),
            10..=14 => Some(Category::Apim),
            15..=23 => Some(Category::Si),
            _ => None,
        }
    }

    /// Fixpoint priority band. Band 0 (structural facts) is computed by the
    /// engine's derived view rather than by marking rules.
    pub fn band(self) -> u8 {
        match self {
            Category::Ut => 1,
            Category::Ips | Category::Apim => 2,
            Category::Si => 3,
        }
    }
}

impl fmt::Display for Category {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl Severity {
    pub fn as_str(self) -> &'static str {
        match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        }
    }
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleMeta {
    pub id: u8,
    pub code: String,
    pub category: Category,
    pub severity: Severity,
    pub title: String,
    /// One-line statement of the design principle the rule enforces.
    pub principle: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RuleDoc {
    #[serde(flatten)]
    pub meta: RuleMeta,
    pub remediation: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Rule {
    pub meta: RuleMeta,
    pub patterns: Vec<RulePattern>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RuleError {
    #[error("unknown rule {0}")]
    UnknownRule(String),
}

struct Entry {
    title: &'static str,
    principle: &'static str,
    remediation: &'static str,
}

const ENTRIES: [Entry; 23] = [
    Entry {
        title: "Asymmetric Units Initialization",
        principle: "weights of a learning layer must start from non-constant values so units can differentiate",
        remediation: "use a random initializer such as glorot_uniform or he_normal for the kernel",
    },
    Entry {
        title: "Null Biases Initialization",
        principle: "biases are best initialized to zero",
        remediation: "drop the custom bias_initializer or set it to zeros",
    },
    Entry {
        title: "Non-Linear Activation Requirement",
        principle: "convolution and dense layers need a non-linear activation",
        remediation: "add a non-linear activation (e.g. relu) to the layer or right after it",
    },
    Entry {
        title: "Unnecessary Activation Removal",
        principle: "a learning layer's output must not pass through several stacked activations",
        remediation: "keep a single activation after the learning layer",
    },
    Entry {
        title: "Class Probability Conversion",
        principle: "classifiers must map logits to probabilities: sigmoid for one unit, softmax for several",
        remediation: "end the network with sigmoid (single unit) or softmax (several units)",
    },
    Entry {
        title: "Consecutive Layers Compatibility",
        principle: "each layer must receive a tensor of the rank it operates on",
        remediation: "insert a Flatten or Reshape layer so the tensor rank matches the next layer",
    },
    Entry {
        title: "Spatial Size Agreement",
        principle: "spatial filtering and pooling windows must fit inside their input feature maps",
        remediation: "use a larger input, smaller windows, 'same' padding or fewer down-sampling steps",
    },
    Entry {
        title: "Reshaped Data Retention",
        principle: "a reshape must keep the number of elements per sample",
        remediation: "choose a target shape whose product equals the input element count",
    },
    Entry {
        title: "Separate Item Preservation",
        principle: "a reshape must leave the batch dimension untouched",
        remediation: "keep -1 (or None) as the leading batch dimension of the target shape",
    },
    Entry {
        title: "Valid Loss Linkage",
        principle: "the loss must be defined and agree with the output activation it receives",
        remediation: "pair binary_crossentropy with sigmoid, categorical_crossentropy with softmax, and feed logits-based losses un-activated outputs",
    },
    Entry {
        title: "Valid Optimizer Linkage",
        principle: "an optimizer must exist and be wired to the loss or parameters",
        remediation: "create an optimizer and call minimize(loss) on it, or pass it to compile",
    },
    Entry {
        title: "Single Global Initialization",
        principle: "all learnable parameters must be initialized once before training",
        remediation: "run tf.global_variables_initializer() in the session before the training loop",
    },
    Entry {
        title: "Zero Gradients Reset",
        principle: "accumulated gradients must be cleared after every training step",
        remediation: "reset gradients (e.g. optimizer.zero_grad()) at each iteration",
    },
    Entry {
        title: "Iterative Training Procedure",
        principle: "training must update the parameters repeatedly",
        remediation: "call fit, or run the training op inside a loop",
    },
    Entry {
        title: "Effective Neurons Suspension",
        principle: "dropout belongs after max-pooling, not before it",
        remediation: "move the Dropout layer after the MaxPooling layer",
    },
    Entry {
        title: "Useless Bias Removal",
        principle: "a learning layer followed by batch normalization gains nothing from its bias",
        remediation: "set use_bias=False on the layer feeding batch normalization",
    },
    Entry {
        title: "Representative Statistics Estimation",
        principle: "batch normalization must come before dropout",
        remediation: "swap the Dropout and BatchNormalization layers",
    },
    Entry {
        title: "Pyramid-shaped Construction",
        principle: "feature-map area and hidden layer width should shrink with depth",
        remediation: "reduce feature-map area and dense widths progressively through the network",
    },
    Entry {
        title: "Maximum Pooling Domination",
        principle: "max-pooling is the preferred down-sampling operation",
        remediation: "replace average pooling or strided convolution by max-pooling",
    },
    Entry {
        title: "Gradual Feature Expansion",
        principle: "the number of feature maps should grow as spatial resolution shrinks",
        remediation: "keep filter counts non-decreasing across convolutional layers",
    },
    Entry {
        title: "Local Correlation Preservation",
        principle: "convolution window sizes should stay the same or grow with depth",
        remediation: "start with small kernels and keep kernel sizes non-decreasing",
    },
    Entry {
        title: "Maximum Information Utilization",
        principle: "a deep CNN should not pool after nearly every convolution",
        remediation: "remove pooling layers so that at most a third of conv/pool layers are pooling",
    },
    Entry {
        title: "Strive for Symmetry and Homogeneity",
        principle: "deep CNNs should group convolutions into blocks of 2-4 identical layers",
        remediation: "stack 2-4 convolutions with identical filters and kernel size between poolings",
    },
];

pub fn code_of(id: u8) -> Option<String> {
    Category::of_rule(id).map(|c| format!("{}-{:02}", c.as_str(), id))
}

fn severity_of(id: u8, cat: Category) -> Severity {
    match cat {
        Category::Si => Severity::Warning,
        Category::Ips if id == 2 => Severity::Warning,
        _ => Severity::Error,
    }
}

fn meta(id: u8) -> Option<RuleMeta> {
    let cat = Category::of_rule(id)?;
    let e = &ENTRIES[usize::from(id) - 1];
    Some(RuleMeta {
        id,
        code: code_of(id)?,
        category: cat,
        severity: severity_of(id, cat),
        title: e.title.to_string(),
        principle: e.principle.to_string(),
    })
}

pub fn rule_doc(id: u8) -> Result<RuleDoc, RuleError> {
    let meta = meta(id).ok_or_else(|| RuleError::UnknownRule(id.to_string()))?;
    Ok(RuleDoc {
        remediation: ENTRIES[usize::from(id) - 1].remediation.to_string(),
        meta,
    })
}

/// Looks a rule up by code, e.g. `"SI-19"`.
pub fn doc_by_code(code: &str) -> Result<RuleDoc, RuleError> {
    (1..=23u8)
        .find(|&id| code_of(id).is_some_and(|c| c.eq_ignore_ascii_case(code)))
        .map(|id| rule_doc(id).expect("id in range"))
        .ok_or_else(|| RuleError::UnknownRule(code.to_string()))
}

pub fn is_valid_code(code: &str) -> bool {
    doc_by_code(code).is_ok()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogOptions {
    /// Exempt the output layer from the non-linear activation requirement
    /// when the loss owns the output activation (regression or
    /// cross-entropy families).
    pub output_exemption: bool,
}

impl Default for CatalogOptions {
    fn default() -> Self {
        CatalogOptions { output_exemption: true }
    }
}

pub fn catalog() -> Vec<Rule> {
    catalog_with(CatalogOptions::default())
}

pub fn catalog_with(opts: CatalogOptions) -> Vec<Rule> {
    (1..=23u8)
        .map(|id| {
            let meta = meta(id).expect("id in range");
            let patterns = patterns_for(id, &meta, opts);
            Rule { meta, patterns }
        })
        .collect()
}

/// Flattens a rule list into the patterns the engine runs.
pub fn patterns_of(rules: &[Rule]) -> Vec<RulePattern> {
    rules.iter().flat_map(|r| r.patterns.iter().cloned()).collect()
}

/// `--disable` / `--only` selection.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RuleFilter {
    pub disable: Vec<String>,
    /// Category names or codes; empty selects everything.
    pub only: Vec<String>,
}

impl RuleFilter {
    pub fn validate(&self) -> Result<(), RuleError> {
        for c in &self.disable {
            if !is_valid_code(c) {
                return Err(RuleError::UnknownRule(c.clone()));
            }
        }
        for o in &self.only {
            if Category::parse(o).is_none() && !is_valid_code(o) {
                return Err(RuleError::UnknownRule(o.clone()));
            }
        }
        Ok(())
    }

    pub fn selects(&self, meta: &RuleMeta) -> bool {
        if self.disable.iter().any(|d| d.eq_ignore_ascii_case(&meta.code)) {
            return false;
        }
        self.only.is_empty()
            || self.only.iter().any(|o| {
                o.eq_ignore_ascii_case(&meta.code) || Category::parse(o) == Some(meta.category)
            })
    }

    pub fn apply(&self, rules: Vec<Rule>) -> Vec<Rule> {
        rules.into_iter().filter(|r| self.selects(&r.meta)).collect()
    }
}

// Loss families by canonical name.
const REGRESSION_LOSSES: &[&str] = &["mse", "mae", "msle", "mape", "huber", "log_cosh", "poisson"];
const CROSS_ENTROPY_LOSSES: &[&str] = &[
    "binary_crossentropy",
    "categorical_crossentropy",
    "sparse_categorical_crossentropy",
];
const CATEGORICAL_LOSSES: &[&str] = &["categorical_crossentropy", "sparse_categorical_crossentropy"];
const MARGIN_LOSSES: &[&str] = &["hinge", "squared_hinge", "categorical_hinge"];
const CONSTANT_INITIALIZERS: &[&str] = &["zeros", "ones", "constant"];
const PROBABILITY_ACTIVATIONS: &[&str] = &["sigmoid", "softmax"];

fn learning() -> Pred {
    Pred::layer(LayerType::LEARNING)
}

fn is_output(yes: bool) -> Pred {
    Pred::is(Derived::IsOutput, yes)
}

fn eff_act() -> Term {
    Term::Derived(Derived::EffectiveActivation)
}

fn never() -> Pred {
    Pred::Any(vec![])
}

fn patterns_for(id: u8, meta: &RuleMeta, opts: CatalogOptions) -> Vec<RulePattern> {
    let band = meta.category.band();
    // `code` must outlive the patterns; codes are a fixed set so leaking is bounded.
    let code: &'static str = static_code(id);
    let b = |message: &'static str| RulePattern::builder(id, band, code, message);
    let l = NodeKind::Layer;
    match id {
        1 => {
            let mut p = b("{l.layer_type} layer uses constant kernel initializer '{l.kernel_initializer}'");
            p.slot(
                "l",
                l,
                vec![learning(), Pred::text_in(Attr::KernelInitializer, CONSTANT_INITIALIZERS)],
            );
            vec![p.build()]
        }
        2 => {
            let mut p = b("{l.layer_type} layer initializes its bias with '{l.bias_initializer}' instead of zeros");
            p.slot(
                "l",
                l,
                vec![
                    learning(),
                    Pred::is(Attr::UseBias, true),
                    Pred::text_not_in(Attr::BiasInitializer, &["zeros"]),
                ],
            );
            vec![p.build()]
        }
        3 => {
            let mut p = b("{l.layer_type} layer has no non-linear activation before the next learning layer");
            let layer = p.slot("l", l, vec![learning(), Pred::Eq(eff_act(), AttrValue::text("linear"))]);
            if opts.output_exemption {
                for family in [REGRESSION_LOSSES, CROSS_ENTROPY_LOSSES, MARGIN_LOSSES] {
                    let mut nac = p.nac();
                    nac.require(layer, is_output(true));
                    nac.slot("loss", NodeKind::Loss, vec![Pred::text_in(Attr::Name, family)]);
                    nac.done();
                }
            }
            vec![p.build()]
        }
        4 => {
            let act = || vec![Pred::layer(&[LayerType::Activation]), Pred::is(Attr::Nonlinear, true)];
            let mut stacked = b("{l.layer_type} layer is followed by redundant activations {a.activation} and {b.activation}");
            let layer = stacked.slot("l", l, vec![learning()]);
            let first = stacked.slot("a", l, act());
            let second = stacked.slot("b", l, act());
            stacked.path(layer, first, learning());
            stacked.path(first, second, learning());

            let mut own = b("{l.layer_type} layer with activation {l.activation} is followed by another activation {a.activation}");
            let layer = own.slot("l", l, vec![learning(), Pred::is(Attr::Nonlinear, true)]);
            let act_layer = own.slot("a", l, act());
            own.path(layer, act_layer, learning());
            vec![stacked.build(), own.build()]
        }
        5 => {
            let mut missing = b("output layer produces raw logits but loss '{loss.name}' expects probabilities");
            missing.slot(
                "o",
                l,
                vec![learning(), is_output(true), Pred::Eq(eff_act(), AttrValue::text("linear"))],
            );
            missing.slot(
                "loss",
                NodeKind::Loss,
                vec![
                    Pred::text_in(Attr::Name, CROSS_ENTROPY_LOSSES),
                    Pred::is(Attr::FromLogits, false),
                ],
            );

            let mut single = b("softmax on a single-unit output always yields 1");
            single.slot(
                "o",
                l,
                vec![
                    learning(),
                    is_output(true),
                    Pred::Cmp(Term::Attr(Attr::Units), Cmp::Eq, 1),
                    Pred::Eq(eff_act(), AttrValue::text("softmax")),
                ],
            );
            vec![missing.build(), single.build()]
        }
        6..=9 => {
            let err = match id {
                6 => shape_codes::RANK_MISMATCH,
                7 => shape_codes::SPATIAL_UNDERFLOW,
                8 => shape_codes::DATA_LOSS,
                _ => shape_codes::BATCH_ALTERED,
            };
            let mut p = b("{l.shape_detail}");
            p.slot("l", l, vec![Pred::is(Attr::ShapeError, err)]);
            vec![p.build()]
        }
        10 => {
            let out = |act: Pred| vec![learning(), is_output(true), act];
            let mut binary = b("loss '{loss.name}' requires a sigmoid output but the last activation is {o.effective_activation}");
            let o = binary.slot("o", l, out(Pred::text_not_in(eff_act(), &["sigmoid", "linear"])));
            binary.slot(
                "loss",
                NodeKind::Loss,
                vec![Pred::is(Attr::Name, "binary_crossentropy"), Pred::is(Attr::FromLogits, false)],
            );
            // single-unit softmax is reported as a probability conversion fault
            let mut nac = binary.nac();
            nac.require(o, Pred::Cmp(Term::Attr(Attr::Units), Cmp::Eq, 1));
            nac.require(o, Pred::Eq(eff_act(), AttrValue::text("softmax")));
            nac.done();

            let mut categorical =
                b("loss '{loss.name}' requires a softmax output but the last activation is {o.effective_activation}");
            categorical.slot("o", l, out(Pred::text_not_in(eff_act(), &["softmax", "linear"])));
            categorical.slot(
                "loss",
                NodeKind::Loss,
                vec![Pred::text_in(Attr::Name, CATEGORICAL_LOSSES), Pred::is(Attr::FromLogits, false)],
            );

            let mut logits = b("loss '{loss.name}' expects logits but receives {o.effective_activation}-activated outputs");
            logits.slot("o", l, out(Pred::text_in(eff_act(), PROBABILITY_ACTIVATIONS)));
            logits.slot("loss", NodeKind::Loss, vec![Pred::is(Attr::FromLogits, true)]);

            let mut margin = b("margin loss '{loss.name}' receives {o.effective_activation} probabilities");
            margin.slot("o", l, out(Pred::text_in(eff_act(), PROBABILITY_ACTIVATIONS)));
            margin.slot("loss", NodeKind::Loss, vec![Pred::text_in(Attr::Name, MARGIN_LOSSES)]);

            let mut undefined = b("no loss function is defined");
            let learner = undefined.slot("learner", NodeKind::Learner, vec![]);
            let mut nac = undefined.nac();
            let loss = nac.slot("loss", NodeKind::Loss, vec![]);
            nac.edge(learner, EdgeLabel::HasLoss, loss);
            nac.done();

            vec![binary.build(), categorical.build(), logits.build(), margin.build(), undefined.build()]
        }
        11 => {
            let mut absent = b("no optimizer is defined");
            let learner = absent.slot("learner", NodeKind::Learner, vec![]);
            let mut nac = absent.nac();
            let opt = nac.slot("opt", NodeKind::Optimizer, vec![]);
            nac.edge(learner, EdgeLabel::HasOptimizer, opt);
            nac.done();

            let mut unlinked = b("optimizer is not connected to the loss");
            unlinked.slot("learner", NodeKind::Learner, vec![Pred::is(Attr::OptimizerLinked, false)]);
            vec![absent.build(), unlinked.build()]
        }
        12 => {
            let mut p = b("variables are never initialized with a global initializer");
            let learner = p.slot("learner", NodeKind::Learner, vec![Pred::is(Attr::HasInitializer, false)]);
            let prog = p.slot("program", NodeKind::Program, vec![Pred::is(Attr::Dialect, "tensorflow_v1")]);
            p.edge(prog, EdgeLabel::HasLearner, learner);
            vec![p.build()]
        }
        13 => {
            // Only a front end that sets `dialect = "pytorch"` can trigger this.
            let mut p = b("gradients are not reset between training iterations");
            let learner = p.slot("learner", NodeKind::Learner, vec![Pred::is(Attr::GradsReset, false)]);
            let prog = p.slot("program", NodeKind::Program, vec![Pred::is(Attr::Dialect, "pytorch")]);
            p.edge(prog, EdgeLabel::HasLearner, learner);
            vec![p.build()]
        }
        14 => {
            let mut p = b("the model is never trained iteratively (no fit call or training loop)");
            p.slot("learner", NodeKind::Learner, vec![Pred::is(Attr::HasTrainingLoop, false)]);
            vec![p.build()]
        }
        15 => {
            let mut p = b("dropout is placed before max-pooling");
            let d = p.slot("d", l, vec![Pred::layer(&[LayerType::Dropout])]);
            let m = p.slot("m", l, vec![Pred::layer(&[LayerType::MaxPool2d])]);
            p.edge(d, EdgeLabel::Next, m);
            vec![p.build()]
        }
        16 => {
            let mut p = b("{l.layer_type} layer keeps a bias although batch normalization follows");
            let layer = p.slot("l", l, vec![learning(), Pred::is(Attr::UseBias, true)]);
            let bn = p.slot("bn", l, vec![Pred::layer(&[LayerType::BatchNorm])]);
            p.path(layer, bn, Pred::not(Pred::layer(&[LayerType::Activation])));
            vec![p.build()]
        }
        17 => {
            let mut p = b("dropout is placed before batch normalization");
            let d = p.slot("d", l, vec![Pred::layer(&[LayerType::Dropout])]);
            let bn = p.slot("bn", l, vec![Pred::layer(&[LayerType::BatchNorm])]);
            p.edge(d, EdgeLabel::Next, bn);
            vec![p.build()]
        }
        18 => vec![
            increasing_sequence(
                b("hidden layer width grows from {a.units} to {b.units}"),
                vec![Pred::layer(&[LayerType::Dense]), is_output(false)],
                Pred::layer(&[LayerType::Dense]),
                Term::Attr(Attr::Units),
                Cmp::Gt,
            ),
            increasing_sequence(
                b("feature-map area grows from {a.feature_area} to {b.feature_area}"),
                vec![Pred::layer(LayerType::CONV_OR_POOL)],
                Pred::layer(LayerType::CONV_OR_POOL),
                Term::Derived(Derived::FeatureArea),
                Cmp::Gt,
            ),
        ],
        19 => {
            let mut avg = b("down-sampling by average pooling");
            avg.slot("l", l, vec![Pred::layer(&[LayerType::AvgPool2d])]);
            let mut strided = b("down-sampling by strided convolution (strides {l.strides})");
            strided.slot(
                "l",
                l,
                vec![
                    Pred::layer(LayerType::CONV),
                    Pred::Cmp(Term::Derived(Derived::MaxStride), Cmp::Gt, 1),
                ],
            );
            vec![avg.build(), strided.build()]
        }
        20 => vec![increasing_sequence(
            b("filter count decreases from {a.filters} to {b.filters}"),
            vec![Pred::layer(LayerType::CONV)],
            Pred::layer(LayerType::CONV),
            Term::Attr(Attr::Filters),
            Cmp::Lt,
        )],
        21 => vec![increasing_sequence(
            b("kernel size decreases from {a.kernel} to {b.kernel}"),
            vec![Pred::layer(LayerType::CONV)],
            Pred::layer(LayerType::CONV),
            Term::Derived(Derived::KernelArea),
            Cmp::Lt,
        )],
        22 => {
            let mut p = b("{arch.pool_count} of {arch.conv_pool_count} convolution/pooling layers are pooling layers");
            p.slot(
                "arch",
                NodeKind::Architecture,
                vec![
                    Pred::Cmp(Term::Derived(Derived::ConvPoolCount), Cmp::Ge, 10),
                    Pred::Linear(
                        vec![
                            (3, Term::Derived(Derived::PoolCount)),
                            (-1, Term::Derived(Derived::ConvPoolCount)),
                        ],
                        Cmp::Gt,
                        0,
                    ),
                ],
            );
            vec![p.build()]
        }
        23 => {
            let mut p = b("deep CNN ({arch.conv_pool_count} conv/pool layers) has no block of homogeneous convolutions");
            let _arch = p.slot(
                "arch",
                NodeKind::Architecture,
                vec![Pred::Cmp(Term::Derived(Derived::ConvPoolCount), Cmp::Ge, 10)],
            );
            let mut nac = p.nac();
            let a = nac.slot("a", l, vec![Pred::layer(LayerType::CONV)]);
            let c = nac.slot("b", l, vec![Pred::layer(LayerType::CONV)]);
            let transparent = Pred::layer(&[LayerType::Activation, LayerType::BatchNorm, LayerType::Dropout]);
            nac.path(a, c, Pred::not(transparent));
            nac.relate((a, Attr::Filters.into()), Cmp::Eq, (c, Attr::Filters.into()));
            nac.relate((a, Attr::Kernel.into()), Cmp::Eq, (c, Attr::Kernel.into()));
            nac.done();
            vec![p.build()]
        }
        _ => unreachable!("rule ids are 1..=23"),
    }
}

/// Adjacent members `a`, `b` of a layer subsequence (selected by `member`)
/// with `b.term cmp a.term`; anchored at `a` of the first such pair only.
fn increasing_sequence(
    mut p: crate::engine::PatternBuilder,
    member: Vec<Pred>,
    barrier: Pred,
    term: Term,
    cmp: Cmp,
) -> RulePattern {
    let a = p.slot("a", NodeKind::Layer, member.clone());
    let b = p.slot("b", NodeKind::Layer, member.clone());
    p.path(a, b, barrier.clone());
    p.relate((b, term), cmp, (a, term));
    let mut nac = p.nac();
    let c = nac.slot("c", NodeKind::Layer, member.clone());
    let d = nac.slot("d", NodeKind::Layer, member);
    nac.path(c, a, never());
    nac.path(c, d, barrier);
    nac.relate((d, term), cmp, (c, term));
    nac.done();
    p.build()
}

fn static_code(id: u8) -> &'static str {
    const CODES: [&str; 23] = [
        "IPS-01", "IPS-02", "IPS-03", "IPS-04", "IPS-05", "UT-06", "UT-07", "UT-08", "UT-09", "APIM-10", "APIM-11",
        "APIM-12", "APIM-13", "APIM-14", "SI-15", "SI-16", "SI-17", "SI-18", "SI-19", "SI-20", "SI-21", "SI-22",
        "SI-23",
    ];
    CODES[usize::from(id) - 1]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exactly_23_rules_in_id_order() {
        let rules = catalog();
        assert_eq!(rules.len(), 23);
        for (i, r) in rules.iter().enumerate() {
            assert_eq!(usize::from(r.meta.id), i + 1);
            assert!(!r.patterns.is_empty());
            assert!(r.patterns.iter().all(|p| p.rule == r.meta.id && p.effect.code == r.meta.code));
        }
    }

    #[test]
    fn categories_partition_ids() {
        for r in catalog() {
            let expected = match r.meta.id {
                1..=5 => Category::Ips,
                6..=9 => Category::Ut,
                10..=14 => Category::Apim,
                _ => Category::Si,
            };
            assert_eq!(r.meta.category, expected);
            assert!(r.meta.code.starts_with(expected.as_str()));
        }
    }

    #[test]
    fn severities() {
        for r in catalog() {
            let expected = match (r.meta.category, r.meta.id) {
                (Category::Si, _) | (_, 2) => Severity::Warning,
                _ => Severity::Error,
            };
            assert_eq!(r.meta.severity, expected, "{}", r.meta.code);
        }
    }

    #[test]
    fn static_codes_agree() {
        for id in 1..=23 {
            assert_eq!(static_code(id), code_of(id).unwrap());
        }
    }

    #[test]
    fn rule_doc_examples() {
        let d = rule_doc(4).unwrap();
        assert_eq!(d.meta.code, "IPS-04");
        assert_eq!(d.meta.severity, Severity::Error);
        assert_eq!(d.meta.title, "Unnecessary Activation Removal");
        let d = rule_doc(22).unwrap();
        assert_eq!(d.meta.code, "SI-22");
        assert_eq!(d.meta.severity, Severity::Warning);
        assert_eq!(d.meta.title, "Maximum Information Utilization");
        assert_eq!(rule_doc(24), Err(RuleError::UnknownRule("24".into())));
        assert!(rule_doc(0).is_err());
    }

    #[test]
    fn filter_only_category() {
        let f = RuleFilter {
            only: vec!["SI".into()],
            ..Default::default()
        };
        let ids: Vec<u8> = f.apply(catalog()).iter().map(|r| r.meta.id).collect();
        assert_eq!(ids, (15..=23).collect::<Vec<_>>());
    }

    #[test]
    fn filter_disable_code() {
        let f = RuleFilter {
            disable: vec!["si-19".into()],
            ..Default::default()
        };
        let rules = f.apply(catalog());
        assert_eq!(rules.len(), 22);
        assert!(rules.iter().all(|r| r.meta.code != "SI-19"));
        assert!(f.validate().is_ok());
        let bad = RuleFilter {
            disable: vec!["XX-99".into()],
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn doc_by_code_lookup() {
        assert_eq!(doc_by_code("APIM-10").unwrap().meta.id, 10);
        assert!(doc_by_code("APIM-09").is_err());
    }
}
