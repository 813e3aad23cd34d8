//! Run configuration: defaults, a flat `key=value` file, then command-line
//! overrides, all funnelled through [`RunConfig::set`].

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use hybridcast::arima::ArimaOrder;
use hybridcast::garch::GarchOrder;
use hybridcast::lstm::LstmConfig;
use serde::Serialize;

pub const MODEL_NAMES: [&str; 4] = ["ag", "lstm", "ag-lstm", "lstm-garch"];

pub const KEYS: [&str; 22] = [
    "input",
    "date_col",
    "value_col",
    "split",
    "subsets",
    "p_max",
    "q_max",
    "d_max",
    "garch_p_max",
    "garch_q_max",
    "order",
    "garch",
    "lookback",
    "hidden",
    "epochs",
    "lr",
    "momentum",
    "grad_clip",
    "seed",
    "models",
    "max_iter",
    "out",
];

/// GARCH stage requested for the statistical component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GarchChoice {
    /// Pick `(P, Q)` by AIC within the caps.
    Auto,
    /// No variance stage; the statistical component is plain ARIMA.
    None,
    Fixed(GarchOrder),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub input: Option<PathBuf>,
    /// Empty when the file has no date column.
    pub date_col: String,
    pub value_col: String,
    pub train_fraction: f64,
    pub subsets: Vec<usize>,
    pub p_max: usize,
    pub q_max: usize,
    pub d_max: usize,
    pub garch_p_max: usize,
    pub garch_q_max: usize,
    /// Explicit ARIMA order; `None` selects one automatically.
    pub order: Option<ArimaOrder>,
    pub garch: GarchChoice,
    pub lookback: usize,
    pub hidden: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub momentum: f64,
    pub grad_clip: f64,
    pub seed: u64,
    pub models: Vec<String>,
    pub max_iter: usize,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let lstm = LstmConfig::default();
        Self {
            input: None,
            date_col: "date".into(),
            value_col: "value".into(),
            train_fraction: 0.91,
            subsets: vec![7, 14, 21],
            p_max: 5,
            q_max: 5,
            d_max: 2,
            garch_p_max: 2,
            garch_q_max: 2,
            order: None,
            garch: GarchChoice::Auto,
            lookback: lstm.lookback_k,
            hidden: lstm.hidden_size,
            epochs: lstm.epochs,
            learning_rate: lstm.learning_rate,
            momentum: lstm.momentum,
            grad_clip: lstm.grad_clip,
            seed: lstm.seed,
            models: MODEL_NAMES.iter().map(|s| s.to_string()).collect(),
            max_iter: 2000,
            out: PathBuf::from("out"),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .trim()
        .parse()
        .map_err(|e| anyhow::anyhow!("{key}: cannot parse {value:?}: {e}"))
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value.split(',').map(|v| parse(key, v)).collect()
}

pub fn parse_order(value: &str) -> Result<ArimaOrder> {
    let parts = parse_list("order", value)?;
    let [p, d, q] = parts[..] else {
        bail!("order: expected p,d,q, got {value:?}");
    };
    Ok(ArimaOrder::new(p, d, q)?)
}

pub fn parse_garch(value: &str) -> Result<GarchChoice> {
    match value.trim() {
        "auto" => Ok(GarchChoice::Auto),
        "none" => Ok(GarchChoice::None),
        v => {
            let parts = parse_list("garch", v)?;
            let [p, q] = parts[..] else {
                bail!("garch: expected P,Q, auto or none, got {value:?}");
            };
            Ok(GarchChoice::Fixed(GarchOrder::new(p, q)?))
        }
    }
}

impl RunConfig {
    /// Applies one setting. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "input" => self.input = Some(PathBuf::from(value.trim())),
            "date_col" => self.date_col = value.trim().to_string(),
            "value_col" => self.value_col = value.trim().to_string(),
            "split" => self.train_fraction = parse(key, value)?,
            "subsets" => self.subsets = parse_list(key, value)?,
            "p_max" => self.p_max = parse(key, value)?,
            "q_max" => self.q_max = parse(key, value)?,
            "d_max" => self.d_max = parse(key, value)?,
            "garch_p_max" => self.garch_p_max = parse(key, value)?,
            "garch_q_max" => self.garch_q_max = parse(key, value)?,
            "order" => self.order = Some(parse_order(value)?),
            "garch" => self.garch = parse_garch(value)?,
            "lookback" => self.lookback = parse(key, value)?,
            "hidden" => self.hidden = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "lr" => self.learning_rate = parse(key, value)?,
            "momentum" => self.momentum = parse(key, value)?,
            "grad_clip" => self.grad_clip = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "models" => self.models = value.split(',').map(|m| m.trim().to_string()).collect(),
            "max_iter" => self.max_iter = parse(key, value)?,
            "out" => self.out = PathBuf::from(value.trim()),
            _ => bail!("unknown key {key:?}; known keys: {}", KEYS.join(", ")),
        }
        Ok(())
    }

    /// Reads `key = value` lines. Blank lines and lines starting with `#`
    /// are skipped.
    pub fn apply_file(&mut self, path: &Path) -> Result<()> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key=value", path.display(), i + 1))?;
            self.set(key.trim(), value)
                .with_context(|| format!("{}:{}", path.display(), i + 1))?;
        }
        Ok(())
    }

    pub fn lstm_config(&self) -> LstmConfig {
        LstmConfig {
            input_dim: 1,
            hidden_size: self.hidden,
            lookback_k: self.lookback,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            seed: self.seed,
            grad_clip: self.grad_clip,
            momentum: self.momentum,
        }
    }

    /// Checks everything that does not need the data.
    pub fn validate(&self) -> Result<()> {
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            bail!("split must be in (0, 1), got {}", self.train_fraction);
        }
        if self.subsets.is_empty() || self.subsets[0] == 0 || self.subsets.windows(2).any(|w| w[0] >= w[1]) {
            bail!(
                "subsets must be strictly increasing positive lengths, got {:?}",
                self.subsets
            );
        }
        if self.models.is_empty() {
            bail!("models must name at least one of {}", MODEL_NAMES.join(", "));
        }
        for (i, m) in self.models.iter().enumerate() {
            if !MODEL_NAMES.contains(&m.as_str()) {
                bail!("unknown model {m:?}; known models: {}", MODEL_NAMES.join(", "));
            }
            if self.models[..i].contains(m) {
                bail!("model {m:?} listed twice");
            }
        }
        if self.garch == GarchChoice::None && self.models.iter().any(|m| m == "lstm-garch") {
            bail!("lstm-garch needs a GARCH stage; use garch=auto or garch=P,Q");
        }
        if self.max_iter == 0 {
            bail!("max_iter must be positive");
        }
        self.lstm_config().validate()?;
        Ok(())
    }
}
