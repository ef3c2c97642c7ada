use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use evirank_rankers::StrategyConfig;
use serde::{Deserialize, Serialize};

use crate::RunError;

/// One evaluation run: a benchmark, the strategies to rank it with and
/// where to put the results. Relative paths are resolved against the
/// config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub benchmark: PathBuf,
    pub backends: PathBuf,
    pub output: PathBuf,
    #[serde(default = "one")]
    pub parallelism: usize,
    #[serde(default)]
    pub resume: bool,
    /// Directory overriding some or all prompt templates.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub templates: Option<PathBuf>,
    pub strategies: Vec<StrategyConfig>,
}

fn one() -> usize {
    1
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, RunError> {
        toml::from_str(text).map_err(|e| RunError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, RunError> {
        let text = fs::read_to_string(path).map_err(|e| RunError::Config(format!("{}: {e}", path.display())))?;
        let mut c = Self::parse(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut c.benchmark);
        fix(&mut c.backends);
        fix(&mut c.output);
        if let Some(t) = c.templates.as_mut() {
            fix(t);
        }
        Ok(c)
    }

    pub fn validate(&self) -> Result<(), RunError> {
        if self.parallelism == 0 {
            return Err(RunError::Config("parallelism must be at least 1".into()));
        }
        for (what, p) in [("benchmark", &self.benchmark), ("backends", &self.backends)] {
            if !p.is_file() {
                return Err(RunError::Config(format!("{what} file {} does not exist", p.display())));
            }
        }
        if let Some(t) = &self.templates {
            if !t.is_dir() {
                return Err(RunError::Config(format!("templates directory {} does not exist", t.display())));
            }
        }
        if self.strategies.is_empty() {
            return Err(RunError::Config("no strategies configured".into()));
        }
        let mut seen = BTreeSet::new();
        for s in &self.strategies {
            s.validate().map_err(RunError::Config)?;
            if !seen.insert(s.strategy) {
                return Err(RunError::Config(format!("strategy {} listed twice", s.strategy.as_str())));
            }
        }
        Ok(())
    }
}
