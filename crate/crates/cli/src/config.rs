//! Flat `key=value` configuration file, read from the path in `DLINT_CONFIG`.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Config {
    pub format: Option<String>,
    pub disable: Vec<String>,
    pub only: Vec<String>,
    pub dialect: Option<String>,
    pub max_unroll: Option<usize>,
    pub trace: Option<bool>,
    pub r3_output_exempt: Option<bool>,
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("config line {line}: {message}")]
    Invalid { line: usize, message: String },
}

pub const ENV_VAR: &str = "DLINT_CONFIG";

fn list(v: &str) -> Vec<String> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(str::to_string).collect()
}

fn boolean(v: &str, line: usize) -> Result<bool, ConfigError> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(ConfigError::Invalid {
            line,
            message: format!("expected a boolean, got '{v}'"),
        }),
    }
}

pub fn parse(text: &str) -> Result<Config, ConfigError> {
    let mut c = Config::default();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.trim();
        if s.is_empty() || s.starts_with('#') {
            continue;
        }
        let Some((k, v)) = s.split_once('=') else {
            return Err(ConfigError::Invalid {
                line,
                message: format!("expected key=value, got '{s}'"),
            });
        };
        let v = v.trim();
        match k.trim().replace('_', "-").as_str() {
            "format" => c.format = Some(v.to_string()),
            "disable" => c.disable = list(v),
            "only" => c.only = list(v),
            "dialect" => c.dialect = Some(v.to_string()),
            "max-unroll" => {
                c.max_unroll = Some(v.parse().map_err(|_| ConfigError::Invalid {
                    line,
                    message: format!("max-unroll must be a non-negative integer, got '{v}'"),
                })?)
            }
            "trace" => c.trace = Some(boolean(v, line)?),
            "r3-output-exempt" => c.r3_output_exempt = Some(boolean(v, line)?),
            other => {
                return Err(ConfigError::Invalid {
                    line,
                    message: format!("unknown key '{other}'"),
                })
            }
        }
    }
    Ok(c)
}

pub fn load(path: &Path) -> Result<Config, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

/// Config named by `DLINT_CONFIG`, or defaults when the variable is unset.
pub fn from_env() -> Result<Config, ConfigError> {
    match std::env::var_os(ENV_VAR) {
        Some(p) if !p.is_empty() => load(Path::new(&p)),
        _ => Ok(Config::default()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let c = parse("# comment\nformat = json\ndisable=SI-19, SI-22\nonly=SI\ndialect=keras\nmax_unroll=8\ntrace=yes\n").unwrap();
        assert_eq!(c.format.as_deref(), Some("json"));
        assert_eq!(c.disable, ["SI-19", "SI-22"]);
        assert_eq!(c.only, ["SI"]);
        assert_eq!(c.max_unroll, Some(8));
        assert_eq!(c.trace, Some(true));
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(parse("colour=red"), Err(ConfigError::Invalid { line: 1, .. })));
        assert!(matches!(parse("\nmax-unroll=-3"), Err(ConfigError::Invalid { line: 2, .. })));
        assert!(matches!(parse("nonsense"), Err(ConfigError::Invalid { line: 1, .. })));
    }
}
