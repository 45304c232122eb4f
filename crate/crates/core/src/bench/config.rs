use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::kernel::KernelConfig;
use crate::lorenz::{EmbeddingConfig, LorenzParams, SplitPlan};

/// Models the harness knows how to train and score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelKind {
    Ls,
    Knn,
    Aslm,
    Qaslm,
    Klms,
    Qklms,
    KlmsAm,
    KlmsQam,
}

impl ModelKind {
    pub const ALL: [ModelKind; 8] = [
        ModelKind::KlmsAm,
        ModelKind::KlmsQam,
        ModelKind::Klms,
        ModelKind::Qklms,
        ModelKind::Aslm,
        ModelKind::Qaslm,
        ModelKind::Knn,
        ModelKind::Ls,
    ];

    /// Unquantized roster of the noiseless comparison.
    pub const NOISELESS: [ModelKind; 5] = [
        ModelKind::KlmsAm,
        ModelKind::Klms,
        ModelKind::Aslm,
        ModelKind::Knn,
        ModelKind::Ls,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Ls => "LS",
            ModelKind::Knn => "KNN",
            ModelKind::Aslm => "ASLM",
            ModelKind::Qaslm => "QASLM",
            ModelKind::Klms => "KLMS",
            ModelKind::Qklms => "QKLMS",
            ModelKind::KlmsAm => "KLMS-AM",
            ModelKind::KlmsQam => "KLMS-QAM",
        }
    }

    pub fn is_quantized(self) -> bool {
        matches!(self, ModelKind::Qaslm | ModelKind::Qklms | ModelKind::KlmsQam)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('_', "-");
        ModelKind::ALL
            .into_iter()
            .find(|m| m.name() == key)
            .ok_or_else(|| Error::UnknownModel(s.to_string()))
    }
}

pub fn parse_roster(s: &str) -> Result<Vec<ModelKind>> {
    if s.trim().eq_ignore_ascii_case("all") {
        return Ok(ModelKind::ALL.to_vec());
    }
    s.split(',')
        .filter(|t| !t.trim().is_empty())
        .map(str::parse)
        .collect()
}

/// How quantization radii are chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantizationConfig {
    /// Fixed radius for QASLM (in `w ∘ x` space); tuned per run when `None`.
    pub epsilon_aslm: Option<f64>,
    /// Fixed radius for QKLMS and KLMS-QAM (raw input space); tuned per run when `None`.
    pub epsilon_klms: Option<f64>,
    /// Codebook size targeted when a radius is tuned.
    pub target_size: usize,
}

impl Default for QuantizationConfig {
    fn default() -> Self {
        Self {
            epsilon_aslm: None,
            epsilon_klms: None,
            target_size: 500,
        }
    }
}

/// Everything needed to reproduce one benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub lorenz: LorenzParams<f64>,
    pub embedding: EmbeddingConfig,
    pub split: SplitPlan,
    /// Training-target SNR in dB; `None` for clean training data.
    pub snr_db: Option<f64>,
    pub delta: f64,
    pub kernel: KernelConfig<f64>,
    pub quantization: QuantizationConfig,
    pub seed: u64,
    pub roster: Vec<ModelKind>,
    /// Measure query latency. Off gives fully reproducible reports.
    pub timing: bool,
    /// Re-select delta, sigma and eta on a hold-out slice of the first run.
    pub grid_search: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            lorenz: LorenzParams::default(),
            embedding: EmbeddingConfig::default(),
            split: SplitPlan::default(),
            snr_db: None,
            delta: 0.1,
            kernel: KernelConfig::default(),
            quantization: QuantizationConfig::default(),
            seed: 42,
            roster: ModelKind::NOISELESS.to_vec(),
            timing: true,
            grid_search: false,
        }
    }
}

fn num<V: FromStr>(key: &str, value: &str) -> Result<V> {
    value.trim().parse().map_err(|_| Error::InvalidParameter {
        name: "config",
        reason: format!("cannot parse `{value}` for `{key}`"),
    })
}

fn flag(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" | "on" => Ok(true),
        "0" | "false" | "no" | "off" => Ok(false),
        _ => Err(Error::InvalidParameter {
            name: "config",
            reason: format!("expected a boolean for `{key}`, got `{value}`"),
        }),
    }
}

fn optional(key: &str, value: &str) -> Result<Option<f64>> {
    match value.trim().to_ascii_lowercase().as_str() {
        "none" | "off" | "auto" | "" => Ok(None),
        _ => num(key, value).map(Some),
    }
}

impl ExperimentConfig {
    /// Paper-default noisy protocol: 20 dB training noise and the full roster.
    pub fn noisy() -> Self {
        Self {
            snr_db: Some(20.0),
            roster: ModelKind::ALL.to_vec(),
            ..Self::default()
        }
    }

    /// Keys accepted by [`ExperimentConfig::set`]; also the CLI flag names.
    pub const KEYS: &'static [&'static str] = &[
        "sigma-l",
        "rho",
        "beta",
        "dt",
        "x0",
        "y0",
        "z0",
        "transient",
        "sample-every",
        "order",
        "horizon",
        "train-len",
        "test-len",
        "stride",
        "runs",
        "noise-db",
        "delta",
        "kernel-sigma",
        "eta",
        "epsilon-aslm",
        "epsilon-klms",
        "codebook-size",
        "seed",
        "models",
        "timing",
        "grid-search",
    ];

    /// Sets one field from its textual key and value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.trim().trim_start_matches("--").replace('_', "-");
        let k = key.as_str();
        match k {
            "sigma-l" => self.lorenz.sigma = num(k, value)?,
            "rho" => self.lorenz.rho = num(k, value)?,
            "beta" => self.lorenz.beta = num(k, value)?,
            "dt" => self.lorenz.dt = num(k, value)?,
            "x0" => self.lorenz.initial[0] = num(k, value)?,
            "y0" => self.lorenz.initial[1] = num(k, value)?,
            "z0" => self.lorenz.initial[2] = num(k, value)?,
            "transient" => self.lorenz.transient = num(k, value)?,
            "sample-every" => self.lorenz.sample_every = num(k, value)?,
            "order" => self.embedding.order = num(k, value)?,
            "horizon" => self.embedding.horizon = num(k, value)?,
            "train-len" => self.split.train_len = num(k, value)?,
            "test-len" => self.split.test_len = num(k, value)?,
            "stride" => self.split.stride = num(k, value)?,
            "runs" => self.split.runs = num(k, value)?,
            "noise-db" => {
                self.snr_db = optional(k, value)?.filter(|v| *v != f64::INFINITY);
            }
            "delta" => self.delta = num(k, value)?,
            "kernel-sigma" => self.kernel.sigma = num(k, value)?,
            "eta" => self.kernel.eta = num(k, value)?,
            "epsilon-aslm" => self.quantization.epsilon_aslm = optional(k, value)?,
            "epsilon-klms" => self.quantization.epsilon_klms = optional(k, value)?,
            "codebook-size" => self.quantization.target_size = num(k, value)?,
            "seed" => self.seed = num(k, value)?,
            "models" => self.roster = parse_roster(value)?,
            "timing" => self.timing = flag(k, value)?,
            "grid-search" => self.grid_search = flag(k, value)?,
            _ => return Err(Error::UnknownKey(key)),
        }
        Ok(())
    }

    /// Applies a flat `key = value` file. Blank lines and `#` comments are skipped.
    pub fn apply_kv_text(&mut self, text: &str) -> Result<()> {
        for line in text.lines() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(char::is_whitespace))
                .ok_or_else(|| Error::invalid("config", format!("expected `key = value`, got `{line}`")))?;
            self.set(key, value)?;
        }
        Ok(())
    }

    /// Serializes to the format read by [`ExperimentConfig::apply_kv_text`].
    pub fn to_kv_text(&self) -> String {
        let opt = |v: Option<f64>| v.map_or_else(|| "none".to_string(), |v| v.to_string());
        let roster: Vec<&str> = self.roster.iter().map(|m| m.name()).collect();
        let l = &self.lorenz;
        let pairs: Vec<(&str, String)> = vec![
            ("sigma-l", l.sigma.to_string()),
            ("rho", l.rho.to_string()),
            ("beta", l.beta.to_string()),
            ("dt", l.dt.to_string()),
            ("x0", l.initial[0].to_string()),
            ("y0", l.initial[1].to_string()),
            ("z0", l.initial[2].to_string()),
            ("transient", l.transient.to_string()),
            ("sample-every", l.sample_every.to_string()),
            ("order", self.embedding.order.to_string()),
            ("horizon", self.embedding.horizon.to_string()),
            ("train-len", self.split.train_len.to_string()),
            ("test-len", self.split.test_len.to_string()),
            ("stride", self.split.stride.to_string()),
            ("runs", self.split.runs.to_string()),
            ("noise-db", opt(self.snr_db)),
            ("delta", self.delta.to_string()),
            ("kernel-sigma", self.kernel.sigma.to_string()),
            ("eta", self.kernel.eta.to_string()),
            ("epsilon-aslm", opt(self.quantization.epsilon_aslm)),
            ("epsilon-klms", opt(self.quantization.epsilon_klms)),
            ("codebook-size", self.quantization.target_size.to_string()),
            ("seed", self.seed.to_string()),
            ("models", roster.join(",")),
            ("timing", self.timing.to_string()),
            ("grid-search", self.grid_search.to_string()),
        ];
        pairs.into_iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.roster.is_empty() {
            return Err(Error::invalid("models", "roster is empty"));
        }
        self.lorenz.validate()?;
        self.kernel.validate()?;
        if self.embedding.order == 0 || self.embedding.horizon == 0 {
            return Err(Error::invalid("embedding", "order and horizon must be at least 1"));
        }
        let s = self.split;
        if s.train_len == 0 || s.test_len == 0 || s.stride == 0 || s.runs == 0 {
            return Err(Error::invalid("split", "lengths, stride and runs must be at least 1"));
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            return Err(Error::invalid("delta", "must be finite and non-negative"));
        }
        if let Some(snr) = self.snr_db {
            if !snr.is_finite() {
                return Err(Error::invalid("noise-db", "must be finite"));
            }
        }
        let q = self.quantization;
        for eps in [q.epsilon_aslm, q.epsilon_klms].into_iter().flatten() {
            if !(eps >= 0.0) {
                return Err(Error::invalid("epsilon", "must be non-negative"));
            }
        }
        let needs_tuning = self.roster.iter().any(|m| m.is_quantized());
        if needs_tuning && (q.target_size == 0 || q.target_size > s.train_len) {
            return Err(Error::invalid("codebook-size", format!("must be in 1..={}", s.train_len)));
        }
        Ok(())
    }
}
