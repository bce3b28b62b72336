//! Shape propagation along the layer chain.
//!
//! Shape failures never abort propagation: the offending node gets a
//! `shape_error` code plus a human readable `shape_detail`, and dimensions
//! that depend on the failed computation become unknown downstream.

use thiserror::Error;

use crate::graph::{Attr, AttrValue, AttributedGraph, NodeId, NodeKind};
use crate::layer::LayerType;
use crate::tensor::{Dim, TensorShape};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Padding {
    Valid,
    Same,
}

impl Padding {
    pub fn parse(s: &str) -> Option<Padding> {
        match s.to_ascii_lowercase().as_str() {
            "valid" => Some(Padding::Valid),
            "same" => Some(Padding::Same),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("window {window} exceeds input extent {input}")]
pub struct SpatialUnderflow {
    pub input: u64,
    pub window: u64,
}

/// Output extent of a convolution or pooling window along one axis.
///
/// `valid`: `floor((input - window) / stride) + 1`, requires `window <= input`.
/// `same`: `ceil(input / stride)`.
pub fn conv_or_pool_extent(input: u64, window: u64, stride: u64, padding: Padding) -> Result<u64, SpatialUnderflow> {
    let stride = stride.max(1);
    match padding {
        Padding::Valid => {
            if window > input {
                Err(SpatialUnderflow { input, window })
            } else {
                Ok((input - window) / stride + 1)
            }
        }
        Padding::Same => Ok(input.div_ceil(stride)),
    }
}

/// Shape error codes written to the `shape_error` attribute.
pub mod codes {
    pub const RANK_MISMATCH: &str = "rank_mismatch";
    pub const SPATIAL_UNDERFLOW: &str = "spatial_underflow";
    pub const DATA_LOSS: &str = "data_loss";
    pub const BATCH_ALTERED: &str = "batch_altered";
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetBatch {
    Keep,
    Rewrite,
}

impl TargetBatch {
    pub fn as_str(self) -> &'static str {
        match self {
            TargetBatch::Keep => "keep",
            TargetBatch::Rewrite => "rewrite",
        }
    }

    pub fn parse(s: &str) -> Option<TargetBatch> {
        match s {
            "keep" => Some(TargetBatch::Keep),
            "rewrite" => Some(TargetBatch::Rewrite),
            _ => None,
        }
    }
}

/// Requested shape of a reshape: the non-batch target dims (at most one `-1`)
/// and whether the batch axis is kept.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReshapeTarget {
    pub batch: TargetBatch,
    pub dims: Vec<i64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReshapeVerdict {
    Ok,
    DataLoss,
    BatchAltered,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("reshape cannot be checked: input has unknown dimensions")]
pub struct Indeterminate;

pub fn reshape_check(input: &TensorShape, target: &ReshapeTarget) -> Result<ReshapeVerdict, Indeterminate> {
    if target.batch == TargetBatch::Rewrite {
        return Ok(ReshapeVerdict::BatchAltered);
    }
    let n = input.element_count().ok_or(Indeterminate)?;
    let wildcards = target.dims.iter().filter(|&&d| d == -1).count();
    if wildcards > 1 || target.dims.iter().any(|&d| d == 0 || d < -1) {
        return Ok(ReshapeVerdict::DataLoss);
    }
    let known = target
        .dims
        .iter()
        .filter(|&&d| d > 0)
        .try_fold(1u64, |acc, &d| acc.checked_mul(d as u64));
    let Some(known) = known else {
        return Ok(ReshapeVerdict::DataLoss);
    };
    let preserved = if wildcards == 1 { n % known == 0 } else { known == n };
    Ok(if preserved { ReshapeVerdict::Ok } else { ReshapeVerdict::DataLoss })
}

struct Outcome {
    out: Option<TensorShape>,
    error: Option<(&'static str, String)>,
}

impl Outcome {
    fn ok(out: Option<TensorShape>) -> Self {
        Outcome { out, error: None }
    }

    fn fail(out: Option<TensorShape>, code: &'static str, detail: String) -> Self {
        Outcome {
            out,
            error: Some((code, detail)),
        }
    }
}

fn int_list(g: &AttributedGraph, id: NodeId, a: Attr) -> Option<Vec<u64>> {
    let v = g.node(id)?.attr(a)?.as_int_list()?;
    v.iter().map(|&x| u64::try_from(x).ok().filter(|&x| x >= 1)).collect()
}

fn expand(v: Option<Vec<u64>>, n: usize) -> Option<Vec<u64>> {
    match v {
        Some(v) if v.len() == n => Some(v),
        Some(v) if v.len() == 1 => Some(vec![v[0]; n]),
        _ => None,
    }
}

fn channels_first(g: &AttributedGraph, id: NodeId) -> bool {
    g.node(id).and_then(|n| n.text(Attr::DataFormat)) == Some("channels_first")
}

fn spatial_layer(g: &AttributedGraph, id: NodeId, lt: LayerType, input: Option<&TensorShape>) -> Outcome {
    let Some(spatial) = lt.spatial_rank() else {
        return Outcome::ok(None);
    };
    let node = g.node(id).expect("node exists");
    let expected_rank = spatial + 2;
    let cf = channels_first(g, id);
    let is_conv = lt.is_conv();
    let out_channels = |in_ch: Dim| -> Dim {
        if is_conv {
            node.int(Attr::Filters)
                .and_then(|f| u64::try_from(f).ok())
                .filter(|&f| f >= 1)
                .map_or(Dim::Unknown, Dim::Known)
        } else {
            in_ch
        }
    };
    let assemble = |spatial_dims: Vec<Dim>, ch: Dim| -> TensorShape {
        let mut dims = vec![Dim::Batch];
        if cf {
            dims.push(ch);
            dims.extend(spatial_dims);
        } else {
            dims.extend(spatial_dims);
            dims.push(ch);
        }
        TensorShape::new(dims)
    };
    let unknown_out = |ch: Dim| assemble(vec![Dim::Unknown; spatial], out_channels(ch));

    let Some(input) = input else {
        return Outcome::ok(Some(unknown_out(Dim::Unknown)));
    };
    if input.rank() != expected_rank {
        return Outcome::fail(
            Some(unknown_out(Dim::Unknown)),
            codes::RANK_MISMATCH,
            format!("{lt} expects a rank-{expected_rank} input, got rank {} {input}", input.rank()),
        );
    }
    let (in_spatial, in_ch) = if cf {
        (&input.dims[2..], input.dims[1])
    } else {
        (&input.dims[1..expected_rank - 1], input.dims[expected_rank - 1])
    };
    if lt == LayerType::Conv3d {
        return Outcome::ok(Some(unknown_out(in_ch)));
    }
    let window_attr = if is_conv { Attr::Kernel } else { Attr::PoolSize };
    let window = expand(int_list(g, id, window_attr), spatial);
    let strides = match expand(int_list(g, id, Attr::Strides), spatial) {
        Some(s) => Some(s),
        None if !is_conv => window.clone(),
        None => Some(vec![1; spatial]),
    };
    let padding = node.text(Attr::Padding).and_then(Padding::parse).unwrap_or(Padding::Valid);
    let (Some(window), Some(strides)) = (window, strides) else {
        return Outcome::ok(Some(unknown_out(in_ch)));
    };
    let mut dims = Vec::with_capacity(spatial);
    let mut failure = None;
    for axis in 0..spatial {
        match in_spatial[axis] {
            Dim::Known(n) => match conv_or_pool_extent(n, window[axis], strides[axis], padding) {
                Ok(e) => dims.push(Dim::Known(e)),
                Err(u) => {
                    dims.push(Dim::Unknown);
                    failure.get_or_insert(format!(
                        "{lt} window {} exceeds input extent {} on spatial axis {axis} of {input}",
                        u.window, u.input
                    ));
                }
            },
            _ => dims.push(Dim::Unknown),
        }
    }
    let out = assemble(dims, out_channels(in_ch));
    match failure {
        Some(detail) => Outcome::fail(Some(out), codes::SPATIAL_UNDERFLOW, detail),
        None => Outcome::ok(Some(out)),
    }
}

fn reshape_layer(g: &AttributedGraph, id: NodeId, input: Option<&TensorShape>) -> Outcome {
    let node = g.node(id).expect("node exists");
    let Some(target) = node.attr(Attr::TargetShape).and_then(AttrValue::as_int_list) else {
        return Outcome::ok(None);
    };
    let batch = node
        .text(Attr::TargetBatch)
        .and_then(TargetBatch::parse)
        .unwrap_or(TargetBatch::Keep);
    let t = ReshapeTarget {
        batch,
        dims: target.to_vec(),
    };
    let literal_out = || {
        let mut dims = vec![Dim::Batch];
        dims.extend(t.dims.iter().map(|&d| if d >= 1 { Dim::Known(d as u64) } else { Dim::Unknown }));
        TensorShape::new(dims)
    };
    let Some(input) = input else {
        if batch == TargetBatch::Rewrite {
            return Outcome::fail(Some(literal_out()), codes::BATCH_ALTERED, "reshape rewrites the batch dimension".into());
        }
        return Outcome::ok(Some(literal_out()));
    };
    match reshape_check(input, &t) {
        Ok(ReshapeVerdict::BatchAltered) => Outcome::fail(
            Some(literal_out()),
            codes::BATCH_ALTERED,
            format!("reshape of {input} rewrites the batch dimension"),
        ),
        Ok(ReshapeVerdict::DataLoss) => Outcome::fail(
            Some(literal_out()),
            codes::DATA_LOSS,
            format!(
                "reshape of {input} ({} elements) to {} does not preserve the element count",
                input.element_count().unwrap_or(0),
                AttrValue::IntList(t.dims.clone())
            ),
        ),
        Ok(ReshapeVerdict::Ok) => {
            let n = input.element_count().unwrap_or(0);
            let known: u64 = t.dims.iter().filter(|&&d| d > 0).map(|&d| d as u64).product();
            let mut dims = vec![Dim::Batch];
            dims.extend(t.dims.iter().map(|&d| {
                if d == -1 {
                    Dim::Known(n / known.max(1))
                } else {
                    Dim::Known(d as u64)
                }
            }));
            Outcome::ok(Some(TensorShape::new(dims)))
        }
        Err(Indeterminate) => Outcome::ok(Some(literal_out())),
    }
}

fn infer(g: &AttributedGraph, id: NodeId, input: Option<&TensorShape>) -> Outcome {
    let node = g.node(id).expect("node exists");
    let lt = node.layer_type().and_then(LayerType::parse).unwrap_or(LayerType::Unknown);
    match lt {
        LayerType::Dense => {
            let units = node
                .int(Attr::Units)
                .and_then(|u| u64::try_from(u).ok())
                .filter(|&u| u >= 1)
                .map_or(Dim::Unknown, Dim::Known);
            let out = TensorShape::new(vec![Dim::Batch, units]);
            match input {
                Some(s) if s.rank() != 2 => Outcome::fail(
                    Some(out),
                    codes::RANK_MISMATCH,
                    format!("dense expects a rank-2 input, got rank {} {s}", s.rank()),
                ),
                _ => Outcome::ok(Some(out)),
            }
        }
        LayerType::Conv1d | LayerType::Conv2d | LayerType::Conv3d | LayerType::MaxPool2d | LayerType::AvgPool2d => {
            spatial_layer(g, id, lt, input)
        }
        LayerType::Flatten => {
            let flat = input
                .and_then(TensorShape::element_count)
                .map_or(Dim::Unknown, Dim::Known);
            Outcome::ok(Some(TensorShape::new(vec![Dim::Batch, flat])))
        }
        LayerType::Reshape => reshape_layer(g, id, input),
        LayerType::Dropout | LayerType::BatchNorm | LayerType::Activation => Outcome::ok(input.cloned()),
        LayerType::Unknown => Outcome::ok(None),
    }
}

/// Annotate every layer reachable from an input layer with `in_shape` and
/// `out_shape` (and `shape_error`/`shape_detail` where inference fails).
pub fn propagate_shapes(mut g: AttributedGraph) -> AttributedGraph {
    let inputs: Vec<NodeId> = g.nodes_of(NodeKind::InputLayer).map(|n| n.id).collect();
    for input in inputs {
        let mut shape = g.node(input).and_then(|n| n.shape(Attr::OutShape)).cloned();
        let chain = g.next_closure(input, |_| false);
        for id in chain {
            let outcome = infer(&g, id, shape.as_ref());
            if let Some(s) = &shape {
                let _ = g.set_attr(id, Attr::InShape, AttrValue::Shape(s.clone()));
            }
            if let Some(s) = &outcome.out {
                let _ = g.set_attr(id, Attr::OutShape, AttrValue::Shape(s.clone()));
            }
            if let Some((code, detail)) = outcome.error {
                let _ = g.set_attr(id, Attr::ShapeError, AttrValue::text(code));
                let _ = g.set_attr(id, Attr::ShapeDetail, AttrValue::text(detail));
            }
            shape = outcome.out;
        }
    }
    g
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeLabel;

    #[test]
    fn extent_examples() {
        assert_eq!(conv_or_pool_extent(28, 5, 1, Padding::Valid), Ok(24));
        assert_eq!(conv_or_pool_extent(28, 3, 2, Padding::Same), Ok(14));
        assert_eq!(
            conv_or_pool_extent(2, 3, 1, Padding::Valid),
            Err(SpatialUnderflow { input: 2, window: 3 })
        );
    }

    #[test]
    fn reshape_examples() {
        let s = TensorShape::batched(&[784]);
        let keep = |dims: Vec<i64>| ReshapeTarget {
            batch: TargetBatch::Keep,
            dims,
        };
        assert_eq!(reshape_check(&s, &keep(vec![28, 28, 1])), Ok(ReshapeVerdict::Ok));
        assert_eq!(reshape_check(&s, &keep(vec![28, 28, 2])), Ok(ReshapeVerdict::DataLoss));
        let rewrite = ReshapeTarget {
            batch: TargetBatch::Rewrite,
            dims: vec![392],
        };
        assert_eq!(reshape_check(&s, &rewrite), Ok(ReshapeVerdict::BatchAltered));
        assert_eq!(reshape_check(&s, &keep(vec![-1, 28])), Ok(ReshapeVerdict::Ok));
        assert_eq!(reshape_check(&s, &keep(vec![-1, 10])), Ok(ReshapeVerdict::DataLoss));
        let unknown = TensorShape::new(vec![Dim::Batch, Dim::Unknown]);
        assert_eq!(reshape_check(&unknown, &keep(vec![28, 28])), Err(Indeterminate));
    }

    fn graph_with(input: &[u64], layers: Vec<Vec<(Attr, AttrValue)>>) -> (AttributedGraph, Vec<NodeId>) {
        let mut g = AttributedGraph::new();
        let inp = g.add_node_with(
            NodeKind::InputLayer,
            [(Attr::OutShape, AttrValue::Shape(TensorShape::batched(input)))],
            None,
        );
        let mut prev = inp;
        let mut ids = Vec::new();
        for attrs in layers {
            let id = g.add_node_with(NodeKind::Layer, attrs, None);
            g.add_edge(prev, EdgeLabel::Next, id).unwrap();
            prev = id;
            ids.push(id);
        }
        (g, ids)
    }

    fn conv(filters: i64, k: i64) -> Vec<(Attr, AttrValue)> {
        vec![
            (Attr::LayerType, "conv2d".into()),
            (Attr::Filters, filters.into()),
            (Attr::Kernel, AttrValue::IntList(vec![k, k])),
            (Attr::Strides, AttrValue::IntList(vec![1, 1])),
            (Attr::Padding, "valid".into()),
        ]
    }

    fn out(g: &AttributedGraph, id: NodeId) -> TensorShape {
        g.node(id).unwrap().shape(Attr::OutShape).unwrap().clone()
    }

    #[test]
    fn conv_then_flatten() {
        let (g, ids) = graph_with(&[28, 28, 1], vec![conv(32, 5), vec![(Attr::LayerType, "flatten".into())]]);
        let g = propagate_shapes(g);
        assert_eq!(out(&g, ids[0]), TensorShape::batched(&[24, 24, 32]));
        assert_eq!(out(&g, ids[1]), TensorShape::batched(&[18432]));
        assert_eq!(
            g.node(ids[1]).unwrap().shape(Attr::InShape),
            Some(&TensorShape::batched(&[24, 24, 32]))
        );
    }

    #[test]
    fn dense_on_rank_four_is_rank_mismatch() {
        let (g, ids) = graph_with(
            &[28, 28, 1],
            vec![vec![(Attr::LayerType, "dense".into()), (Attr::Units, 10.into())]],
        );
        let g = propagate_shapes(g);
        let n = g.node(ids[0]).unwrap();
        assert_eq!(n.text(Attr::ShapeError), Some(codes::RANK_MISMATCH));
        assert!(n.text(Attr::ShapeDetail).unwrap().contains("rank 4"));
    }

    #[test]
    fn underflow_keeps_propagating() {
        let (g, ids) = graph_with(
            &[2, 2, 3],
            vec![
                conv(8, 3),
                vec![(Attr::LayerType, "flatten".into())],
                vec![(Attr::LayerType, "dense".into()), (Attr::Units, 4.into())],
            ],
        );
        let g = propagate_shapes(g);
        assert_eq!(g.node(ids[0]).unwrap().text(Attr::ShapeError), Some(codes::SPATIAL_UNDERFLOW));
        assert_eq!(out(&g, ids[1]), TensorShape::new(vec![Dim::Batch, Dim::Unknown]));
        assert_eq!(g.node(ids[2]).unwrap().attr(Attr::ShapeError), None);
        assert_eq!(out(&g, ids[2]), TensorShape::batched(&[4]));
    }

    #[test]
    fn pool_defaults_stride_to_window() {
        let (g, ids) = graph_with(
            &[28, 28, 6],
            vec![vec![
                (Attr::LayerType, "maxpool2d".into()),
                (Attr::PoolSize, AttrValue::IntList(vec![2, 2])),
                (Attr::Padding, "valid".into()),
            ]],
        );
        let g = propagate_shapes(g);
        assert_eq!(out(&g, ids[0]), TensorShape::batched(&[14, 14, 6]));
    }

    #[test]
    fn channels_first_layout() {
        let mut attrs = conv(16, 3);
        attrs.push((Attr::DataFormat, "channels_first".into()));
        let (g, ids) = graph_with(&[3, 32, 32], vec![attrs]);
        let g = propagate_shapes(g);
        assert_eq!(out(&g, ids[0]), TensorShape::batched(&[16, 30, 30]));
    }

    #[test]
    fn conv3d_shapes_unknown() {
        let (g, ids) = graph_with(
            &[8, 8, 8, 1],
            vec![vec![
                (Attr::LayerType, "conv3d".into()),
                (Attr::Filters, 4.into()),
                (Attr::Kernel, AttrValue::IntList(vec![3, 3, 3])),
            ]],
        );
        let g = propagate_shapes(g);
        assert_eq!(
            out(&g, ids[0]),
            TensorShape::new(vec![Dim::Batch, Dim::Unknown, Dim::Unknown, Dim::Unknown, Dim::Known(4)])
        );
    }

    #[test]
    fn identity_layers_preserve_elements() {
        for t in ["activation", "dropout", "batchnorm"] {
            let (g, ids) = graph_with(&[5, 7, 3], vec![vec![(Attr::LayerType, t.into())]]);
            let g = propagate_shapes(g);
            assert_eq!(out(&g, ids[0]).element_count(), Some(105));
        }
    }
}
