//! Run configuration: defaults, optional TOML file, explicit flags.
//! Precedence is flag over file over default, field by field.

use std::fs;
use std::path::PathBuf;

use clap::ValueEnum;
use serde::Deserialize;

use crate::cli::GlobalArgs;
use crate::commands::Failure;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Clone, Debug)]
pub struct RunConfig {
    pub q: f64,
    pub omega: f64,
    pub a: f64,
    pub b: f64,
    pub depth: u32,
    pub tol: f64,
    pub max_terms: u32,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub strict: bool,
}

/// On-disk shape of `--config`. Unknown keys are rejected so typos do not
/// silently fall back to defaults.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    q: Option<f64>,
    omega: Option<f64>,
    a: Option<f64>,
    b: Option<f64>,
    depth: Option<u32>,
    tol: Option<f64>,
    max_terms: Option<u32>,
    output_format: Option<String>,
    output_path: Option<PathBuf>,
}

impl FileConfig {
    /// Parse config file text. Any TOML rejection is an input error.
    pub fn parse(text: &str) -> Result<FileConfig, Failure> {
        toml::from_str(text).map_err(|e| Failure {
            code: 2,
            message: e.to_string(),
        })
    }
}

impl RunConfig {
    pub fn resolve(flags: &GlobalArgs) -> Result<RunConfig, Failure> {
        let file = match &flags.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Failure {
                    code: 2,
                    message: format!("cannot read config {}: {e}", path.display()),
                })?;
                FileConfig::parse(&text).map_err(|e| Failure {
                    code: 2,
                    message: format!("config {}: {}", path.display(), e.message),
                })?
            }
            None => FileConfig::default(),
        };

        let format = match flags.format {
            Some(f) => f,
            None => match file.output_format.as_deref() {
                None => Format::Text,
                Some("text") => Format::Text,
                Some("json") => Format::Json,
                Some("csv") => Format::Csv,
                Some(other) => {
                    return Err(Failure {
                        code: 2,
                        message: format!(
                            "config output_format must be text, json, or csv, got `{other}`"
                        ),
                    });
                }
            },
        };

        Ok(RunConfig {
            q: flags.q.or(file.q).unwrap_or(0.5),
            omega: flags.omega.or(file.omega).unwrap_or(1.0),
            a: flags.a.or(file.a).unwrap_or(2.0),
            b: flags.b.or(file.b).unwrap_or(6.0),
            depth: flags.depth.or(file.depth).unwrap_or(12),
            tol: flags.tol.or(file.tol).unwrap_or(1e-10),
            max_terms: flags.max_terms.or(file.max_terms).unwrap_or(10_000),
            format,
            out: flags.out.clone().or(file.output_path),
            strict: flags.strict,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flags() -> GlobalArgs {
        GlobalArgs::default()
    }

    #[test]
    fn defaults_apply_without_flags_or_file() {
        let cfg = RunConfig::resolve(&flags()).unwrap();
        assert_eq!(cfg.q, 0.5);
        assert_eq!(cfg.omega, 1.0);
        assert_eq!(cfg.a, 2.0);
        assert_eq!(cfg.b, 6.0);
        assert_eq!(cfg.depth, 12);
        assert_eq!(cfg.tol, 1e-10);
        assert_eq!(cfg.max_terms, 10_000);
        assert_eq!(cfg.format, Format::Text);
        assert!(cfg.out.is_none());
        assert!(!cfg.strict);
    }

    #[test]
    fn flags_beat_file_beats_default() {
        let dir = std::env::temp_dir().join(format!("hahn-cfg-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        fs::write(&path, "q = 0.25\ndepth = 7\noutput_format = \"json\"\n").unwrap();

        let mut f = flags();
        f.config = Some(path.clone());
        f.q = Some(0.75);
        let cfg = RunConfig::resolve(&f).unwrap();
        assert_eq!(cfg.q, 0.75, "flag beats file");
        assert_eq!(cfg.depth, 7, "file beats default");
        assert_eq!(cfg.format, Format::Json, "file format applies");
        assert_eq!(cfg.omega, 1.0, "default fills the rest");

        fs::remove_file(&path).unwrap();
        let _ = fs::remove_dir(&dir);
    }

    #[test]
    fn unknown_config_keys_are_rejected() {
        let dir = std::env::temp_dir().join(format!("hahn-cfg-bad-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.toml");
        fs::write(&path, "dpeth = 7\n").unwrap();

        let mut f = flags();
        f.config = Some(path.clone());
        let err = RunConfig::resolve(&f).unwrap_err();
        assert_eq!(err.code, 2);
        assert!(err.message.contains("dpeth"), "{}", err.message);

        fs::remove_file(&path).unwrap();
        let _ = fs::remove_dir(&dir);
    }
}
