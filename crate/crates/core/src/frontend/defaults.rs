//! Library defaults applied when a layer call omits an argument, plus the
//! name normalizations used by the recognizers. Every value that stands in
//! for an omitted argument lives here.

pub const STRIDE: i64 = 1;
pub const PADDING: &str = "valid";
pub const ACTIVATION: &str = "none";
pub const USE_BIAS: bool = true;
pub const KERNEL_INITIALIZER: &str = "glorot_uniform";
pub const BIAS_INITIALIZER: &str = "zeros";
pub const DATA_FORMAT: &str = "channels_last";
pub const POOL_SIZE: i64 = 2;
pub const DROPOUT_RATE: f64 = 0.5;
/// Keras `compile` without an optimizer argument.
pub const OPTIMIZER: &str = "rmsprop";
/// Unrolled iterations allowed for a loop that builds layers.
pub const MAX_UNROLL: usize = 64;
/// Executed statements allowed per script.
pub const STATEMENT_BUDGET: usize = 200_000;
/// Longest list the interpreter materializes.
pub const MAX_LIST: usize = 4096;
/// Nested inlined function calls.
pub const MAX_INLINE_DEPTH: usize = 16;

/// `CamelCase` or `camelCase` to `snake_case`.
pub fn snake_case(name: &str) -> String {
    let mut out = String::with_capacity(name.len() + 4);
    let chars: Vec<char> = name.chars().collect();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_ascii_uppercase() {
            let prev_lower = i > 0 && (chars[i - 1].is_ascii_lowercase() || chars[i - 1].is_ascii_digit());
            let next_lower = chars.get(i + 1).is_some_and(|n| n.is_ascii_lowercase());
            let prev_upper = i > 0 && chars[i - 1].is_ascii_uppercase();
            if i > 0 && (prev_lower || (prev_upper && next_lower)) && !out.ends_with('_') {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

pub fn activation_name(raw: &str) -> String {
    let s = snake_case(raw.rsplit('.').next().unwrap_or(raw));
    match s.as_str() {
        "" | "none" => "none".into(),
        "re_lu" => "relu".into(),
        "leaky_re_lu" | "lrelu" => "leaky_relu".into(),
        "p_re_lu" => "prelu".into(),
        "hard_sigmoid" | "hardsigmoid" => "hard_sigmoid".into(),
        _ => s,
    }
}

pub fn initializer_name(raw: &str) -> String {
    let s = snake_case(raw.rsplit('.').next().unwrap_or(raw));
    match s.as_str() {
        "zero" | "zeros_initializer" | "zeros" => "zeros".into(),
        "one" | "ones_initializer" | "ones" => "ones".into(),
        "constant_initializer" | "constant" => "constant".into(),
        "xavier_initializer" | "glorot_uniform_initializer" => "glorot_uniform".into(),
        "glorot_normal_initializer" => "glorot_normal".into(),
        "truncated_normal_initializer" => "truncated_normal".into(),
        "random_normal_initializer" => "random_normal".into(),
        "random_uniform_initializer" => "random_uniform".into(),
        "variance_scaling_initializer" => "variance_scaling".into(),
        _ => s,
    }
}

pub fn loss_name(raw: &str) -> String {
    let s = snake_case(raw.rsplit('.').next().unwrap_or(raw));
    match s.as_str() {
        "mean_squared_error" | "mse" => "mse".into(),
        "mean_absolute_error" | "mae" => "mae".into(),
        "mean_squared_logarithmic_error" | "msle" => "msle".into(),
        "mean_absolute_percentage_error" | "mape" => "mape".into(),
        "huber_loss" | "huber" => "huber".into(),
        "logcosh" | "log_cosh" => "log_cosh".into(),
        "binary_crossentropy" | "binary_cross_entropy" => "binary_crossentropy".into(),
        "categorical_crossentropy" | "categorical_cross_entropy" => "categorical_crossentropy".into(),
        "sparse_categorical_crossentropy" => "sparse_categorical_crossentropy".into(),
        "kullback_leibler_divergence" | "kld" | "kl_divergence" => "kl_divergence".into(),
        _ => s,
    }
}

pub fn optimizer_name(raw: &str) -> String {
    let s = snake_case(raw.rsplit('.').next().unwrap_or(raw));
    let s = s.strip_suffix("_optimizer").unwrap_or(&s).to_string();
    match s.as_str() {
        "gradient_descent" => "sgd".into(),
        "rm_sprop" | "rms_prop" => "rmsprop".into(),
        "ada_grad" => "adagrad".into(),
        "ada_delta" => "adadelta".into(),
        _ => s,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snake_cases() {
        assert_eq!(snake_case("GlorotUniform"), "glorot_uniform");
        assert_eq!(snake_case("BinaryCrossentropy"), "binary_crossentropy");
        assert_eq!(snake_case("relu"), "relu");
        assert_eq!(snake_case("SGD"), "sgd");
    }

    #[test]
    fn normalizations() {
        assert_eq!(loss_name("MeanSquaredError"), "mse");
        assert_eq!(loss_name("keras.losses.mean_absolute_error"), "mae");
        assert_eq!(optimizer_name("GradientDescentOptimizer"), "sgd");
        assert_eq!(optimizer_name("AdamOptimizer"), "adam");
        assert_eq!(optimizer_name("RMSprop"), "rmsprop");
        assert_eq!(initializer_name("Zeros"), "zeros");
        assert_eq!(initializer_name("he_normal"), "he_normal");
        assert_eq!(activation_name("tf.nn.relu"), "relu");
        assert_eq!(activation_name("ReLU"), "relu");
        assert_eq!(activation_name("LeakyReLU"), "leaky_relu");
    }
}
