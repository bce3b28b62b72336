//! Layer kinds recognised on `Layer` nodes (the `layer_type` attribute).

use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum LayerType {
    Dense,
    Conv1d,
    Conv2d,
    Conv3d,
    MaxPool2d,
    AvgPool2d,
    Flatten,
    Reshape,
    Dropout,
    BatchNorm,
    Activation,
    Unknown,
}

impl LayerType {
    pub const ALL: [LayerType; 12] = [
        LayerType::Dense,
        LayerType::Conv1d,
        LayerType::Conv2d,
        LayerType::Conv3d,
        LayerType::MaxPool2d,
        LayerType::AvgPool2d,
        LayerType::Flatten,
        LayerType::Reshape,
        LayerType::Dropout,
        LayerType::BatchNorm,
        LayerType::Activation,
        LayerType::Unknown,
    ];

    pub const LEARNING: &'static [LayerType] =
        &[LayerType::Dense, LayerType::Conv1d, LayerType::Conv2d, LayerType::Conv3d];
    pub const CONV: &'static [LayerType] = &[LayerType::Conv1d, LayerType::Conv2d, LayerType::Conv3d];
    pub const POOL: &'static [LayerType] = &[LayerType::MaxPool2d, LayerType::AvgPool2d];
    pub const CONV_OR_POOL: &'static [LayerType] = &[
        LayerType::Conv1d,
        LayerType::Conv2d,
        LayerType::Conv3d,
        LayerType::MaxPool2d,
        LayerType::AvgPool2d,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            LayerType::Dense => "dense",
            LayerType::Conv1d => "conv1d",
            LayerType::Conv2d => "conv2d",
            LayerType::Conv3d => "conv3d",
            LayerType::MaxPool2d => "maxpool2d",
            LayerType::AvgPool2d => "avgpool2d",
            LayerType::Flatten => "flatten",
            LayerType::Reshape => "reshape",
            LayerType::Dropout => "dropout",
            LayerType::BatchNorm => "batchnorm",
            LayerType::Activation => "activation",
            LayerType::Unknown => "unknown",
        }
    }

    pub fn parse(s: &str) -> Option<LayerType> {
        LayerType::ALL.iter().copied().find(|t| t.as_str() == s)
    }

    pub fn is_learning(self) -> bool {
        Self::LEARNING.contains(&self)
    }

    pub fn is_conv(self) -> bool {
        Self::CONV.contains(&self)
    }

    pub fn is_pool(self) -> bool {
        Self::POOL.contains(&self)
    }

    /// Number of spatial axes the layer operates on, if it is spatial.
    pub fn spatial_rank(self) -> Option<usize> {
        match self {
            LayerType::Conv1d => Some(1),
            LayerType::Conv2d | LayerType::MaxPool2d | LayerType::AvgPool2d => Some(2),
            LayerType::Conv3d => Some(3),
            _ => None,
        }
    }
}

impl fmt::Display for LayerType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Activation names that do not add a non-linearity.
pub fn is_linear_activation(name: &str) -> bool {
    matches!(name, "none" | "linear")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_roundtrip() {
        for t in LayerType::ALL {
            assert_eq!(LayerType::parse(t.as_str()), Some(t));
        }
        assert_eq!(LayerType::parse("lstm"), None);
    }
}
