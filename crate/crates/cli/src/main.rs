use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use dlint::config::{self, Config};
use dlint::eval;
use dlint::{check_paths, exit_code, Settings, EXIT_CLEAN, EXIT_FAILURE};
use dlint_core::frontend::Dialect;
use dlint_core::report::{render_json, render_json_many, render_text, Report};
use dlint_core::rules::{catalog_with, rule_doc, CatalogOptions, RuleFilter};

#[derive(Parser)]
#[command(name = "dlint", version, about = "Static checks for Keras and TensorFlow v1 training scripts")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum DialectArg {
    Auto,
    Keras,
    Tf1,
}

#[derive(clap::Args)]
struct Selection {
    /// Rule codes to skip, comma separated.
    #[arg(long, value_delimiter = ',')]
    disable: Vec<String>,
    /// Restrict to categories (IPS, UT, APIM, SI) or codes, comma separated.
    #[arg(long, value_delimiter = ',')]
    only: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Check scripts and report findings.
    Check {
        #[arg(required = true)]
        paths: Vec<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[command(flatten)]
        selection: Selection,
        #[arg(long, value_enum)]
        dialect: Option<DialectArg>,
        /// Iteration cap for loops that build layers.
        #[arg(long)]
        max_unroll: Option<usize>,
        /// Print every rule application to stderr.
        #[arg(long)]
        trace: bool,
        /// Exempt the output layer from the non-linear activation rule when the loss owns its activation.
        #[arg(long)]
        r3_output_exempt: Option<bool>,
    },
    /// List the rule catalog.
    ListRules {
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
        #[command(flatten)]
        selection: Selection,
    },
    /// Score the checker against a labelled corpus manifest.
    Eval {
        manifest: PathBuf,
        #[arg(long, value_enum)]
        format: Option<FormatArg>,
    },
}

fn fail(message: impl std::fmt::Display) -> ExitCode {
    eprintln!("dlint: {message}");
    ExitCode::from(EXIT_FAILURE as u8)
}

fn json_format(flag: Option<FormatArg>, cfg: &Config) -> Result<bool, String> {
    match flag {
        Some(FormatArg::Json) => Ok(true),
        Some(FormatArg::Text) => Ok(false),
        None => match cfg.format.as_deref() {
            None | Some("text") => Ok(false),
            Some("json") => Ok(true),
            Some(other) => Err(format!("unknown format '{other}' in config")),
        },
    }
}

fn filter(sel: Selection, cfg: &Config) -> Result<RuleFilter, String> {
    let f = RuleFilter {
        disable: if sel.disable.is_empty() { cfg.disable.clone() } else { sel.disable },
        only: if sel.only.is_empty() { cfg.only.clone() } else { sel.only },
    };
    f.validate().map_err(|e| e.to_string())?;
    Ok(f)
}

fn emit(text: &str) {
    let mut out = std::io::stdout().lock();
    // a closed pipe is not an analysis failure
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(EXIT_FAILURE as u8) } else { ExitCode::SUCCESS };
        }
    };
    let cfg = match config::from_env() {
        Ok(c) => c,
        Err(e) => return fail(e),
    };
    match run(cli.command, &cfg) {
        Ok(code) => ExitCode::from(code as u8),
        Err(message) => fail(message),
    }
}

fn run(command: Command, cfg: &Config) -> Result<i32, String> {
    match command {
        Command::Check {
            paths,
            format,
            selection,
            dialect,
            max_unroll,
            trace,
            r3_output_exempt,
        } => {
            let json = json_format(format, cfg)?;
            let dialect = match dialect {
                Some(DialectArg::Auto) => Dialect::Auto,
                Some(DialectArg::Keras) => Dialect::Keras,
                Some(DialectArg::Tf1) => Dialect::TensorflowV1,
                None => match &cfg.dialect {
                    Some(d) => d.parse()?,
                    None => Dialect::Auto,
                },
            };
            let mut settings = Settings {
                dialect,
                ..Settings::default()
            };
            settings.analysis.filter = filter(selection, cfg)?;
            if let Some(n) = max_unroll.or(cfg.max_unroll) {
                settings.analysis.frontend.max_unroll = n;
            }
            settings.analysis.catalog = CatalogOptions {
                output_exemption: r3_output_exempt.or(cfg.r3_output_exempt).unwrap_or(true),
            };
            let trace = trace || cfg.trace.unwrap_or(false);

            let analyses = check_paths(&paths, &settings);
            for a in &analyses {
                for w in &a.warnings {
                    eprintln!("{}: warning: {w}", a.report.file);
                }
                if trace {
                    for app in &a.trace {
                        eprintln!("{}: applied {app}", a.report.file);
                    }
                }
            }
            if json {
                let reports: Vec<Report> = analyses.iter().map(|a| a.report.clone()).collect();
                match reports.as_slice() {
                    [one] => emit(&render_json(one)),
                    many => emit(&render_json_many(many)),
                }
            } else {
                for a in &analyses {
                    emit(&render_text(&a.report.diagnostics));
                }
            }
            Ok(exit_code(&analyses))
        }
        Command::ListRules { format, selection } => {
            let json = json_format(format, cfg)?;
            let f = filter(selection, cfg)?;
            let rules = f.apply(catalog_with(CatalogOptions::default()));
            let docs: Vec<_> = rules
                .iter()
                .map(|r| rule_doc(r.meta.id).map_err(|e| e.to_string()))
                .collect::<Result<_, _>>()?;
            if json {
                let mut s = serde_json::to_string_pretty(&docs).map_err(|e| e.to_string())?;
                s.push('\n');
                emit(&s);
            } else {
                let mut s = String::new();
                for d in &docs {
                    s.push_str(&format!(
                        "{:>2}  {:<8} {:<5} {:<8} {}\n",
                        d.meta.id, d.meta.code, d.meta.category, d.meta.severity, d.meta.title
                    ));
                }
                emit(&s);
            }
            Ok(EXIT_CLEAN)
        }
        Command::Eval { manifest, format } => {
            let json = json_format(format, cfg)?;
            let cases = eval::load_manifest(&manifest).map_err(|e| e.to_string())?;
            let settings = Settings::default();
            let summary = eval::evaluate(&cases, |p| dlint::check_file(p, &settings).report);
            if json {
                let mut s = serde_json::to_string_pretty(&summary).map_err(|e| e.to_string())?;
                s.push('\n');
                emit(&s);
            } else {
                emit(&eval::render_text(&summary));
            }
            Ok(if summary.perfect() { EXIT_CLEAN } else { dlint::EXIT_WARNINGS })
        }
    }
}
