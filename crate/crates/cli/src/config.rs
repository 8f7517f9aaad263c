//! Run configuration: defaults, overridden by a `key = value` file, overridden
//! by command-line flags. Every key accepted here is also what `config.echo`
//! writes, so an echo file can be fed back with `--config`.

use std::path::Path;
use std::str::FromStr;

use scgarch::kalman::default_q_grid;
use scgarch::model::DEFAULT_ORDER_SAMPLES;
use scgarch::{ComparisonScale, KalmanSettings, ModelKind, OrderingStrategy, ScgarchConfig, Sim1Config, Sim2Config};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderingMode {
    Fixed,
    BicExhaustive,
    BicSampled,
}

impl OrderingMode {
    fn name(self) -> &'static str {
        match self {
            OrderingMode::Fixed => "fixed",
            OrderingMode::BicExhaustive => "bic-exhaustive",
            OrderingMode::BicSampled => "bic-sampled",
        }
    }
}

impl FromStr for OrderingMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fixed" => Ok(OrderingMode::Fixed),
            "bic-exhaustive" => Ok(OrderingMode::BicExhaustive),
            "bic-sampled" => Ok(OrderingMode::BicSampled),
            other => Err(format!("unknown ordering {other:?}")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub ordering: OrderingMode,
    /// 0-based fixed ordering; empty means the panel's own order.
    pub order: Vec<usize>,
    pub exhaustive_limit: usize,
    pub order_samples: usize,
    pub kappa: f64,
    pub q: f64,
    pub tune_q: bool,
    pub q_grid: Vec<f64>,
    pub two_pass: bool,
    pub garch_max_iter: usize,
    pub garch_grad_tol: f64,
    pub block_size: usize,
    pub scale: ComparisonScale,
    pub threshold: f64,
    pub candidates: Vec<usize>,
    pub seed: u64,
    /// Simulation length; `None` uses the generator's default.
    pub n: Option<usize>,
    pub q_true: f64,
    pub meas_var: f64,
    pub deltas: [f64; 3],
    pub diag: [f64; 3],
    pub replications: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let garch = scgarch::GarchSettings::<f64>::default();
        let kalman = KalmanSettings::<f64>::default();
        let sim1 = Sim1Config::default();
        let sim2 = Sim2Config::default();
        Self {
            model: ModelKind::Scgarch,
            ordering: OrderingMode::Fixed,
            order: Vec::new(),
            exhaustive_limit: scgarch::model::DEFAULT_EXHAUSTIVE_LIMIT,
            order_samples: DEFAULT_ORDER_SAMPLES,
            kappa: kalman.kappa,
            q: kalman.q,
            tune_q: false,
            q_grid: default_q_grid(),
            two_pass: kalman.two_pass,
            garch_max_iter: garch.optimizer.max_iter,
            garch_grad_tol: garch.optimizer.grad_tol,
            block_size: 65,
            scale: ComparisonScale::Covariance,
            threshold: scgarch::eval::DEFAULT_STABILITY_THRESHOLD,
            candidates: vec![5, 11, 21, 35, 65, 101, 151, 201],
            seed: 1,
            n: None,
            q_true: sim1.q_true,
            meas_var: sim1.meas_var,
            deltas: sim2.deltas,
            diag: sim2.diag,
            replications: 20,
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> CliResult<T> {
    value
        .parse()
        .map_err(|_| CliError::Config(format!("{key}: cannot parse {value:?}")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> CliResult<Vec<T>> {
    if value.trim().is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| parse(key, v.trim())).collect()
}

fn parse_triple(key: &str, value: &str) -> CliResult<[f64; 3]> {
    let v: Vec<f64> = parse_list(key, value)?;
    v.try_into()
        .map_err(|_| CliError::Config(format!("{key}: expected three comma-separated values")))
}

fn join<T: ToString>(v: &[T]) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(",")
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let value = value.trim();
        match key.trim() {
            "model" => self.model = value.parse()?,
            "ordering" => self.ordering = value.parse().map_err(CliError::Config)?,
            "order" => {
                let one_based: Vec<usize> = parse_list(key, value)?;
                if one_based.contains(&0) {
                    return Err(CliError::Config("order: indices are 1-based".into()));
                }
                self.order = one_based.into_iter().map(|k| k - 1).collect();
            }
            "exhaustive_limit" => self.exhaustive_limit = parse(key, value)?,
            "order_samples" => self.order_samples = parse(key, value)?,
            "kappa" => self.kappa = parse(key, value)?,
            "q" => self.q = parse(key, value)?,
            "tune_q" => self.tune_q = parse(key, value)?,
            "q_grid" => self.q_grid = parse_list(key, value)?,
            "two_pass" => self.two_pass = parse(key, value)?,
            "garch_max_iter" => self.garch_max_iter = parse(key, value)?,
            "garch_grad_tol" => self.garch_grad_tol = parse(key, value)?,
            "block_size" => self.block_size = parse(key, value)?,
            "scale" => self.scale = value.parse()?,
            "threshold" => self.threshold = parse(key, value)?,
            "candidates" => self.candidates = parse_list(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "n" => self.n = if value == "auto" { None } else { Some(parse(key, value)?) },
            "q_true" => self.q_true = parse(key, value)?,
            "meas_var" => self.meas_var = parse(key, value)?,
            "deltas" => self.deltas = parse_triple(key, value)?,
            "diag" => self.diag = parse_triple(key, value)?,
            "replications" => self.replications = parse(key, value)?,
            other => return Err(CliError::Config(format!("unknown key {other:?}"))),
        }
        Ok(())
    }

    pub fn apply(&mut self, pairs: &[(String, String)]) -> CliResult<()> {
        pairs.iter().try_for_each(|(k, v)| self.set(k, v))
    }

    /// Defaults, then `file` if given, then `overrides`.
    pub fn load(file: Option<&Path>, overrides: &[(String, String)]) -> CliResult<Self> {
        let mut cfg = Self::default();
        if let Some(path) = file {
            cfg.apply(&scgarch::io::read_key_values(path)?)?;
        }
        cfg.apply(overrides)?;
        Ok(cfg)
    }

    /// Every key with its effective value.
    pub fn echo(&self) -> Vec<(String, String)> {
        let order: Vec<usize> = self.order.iter().map(|k| k + 1).collect();
        [
            ("model", self.model.name().to_string()),
            ("ordering", self.ordering.name().to_string()),
            ("order", join(&order)),
            ("exhaustive_limit", self.exhaustive_limit.to_string()),
            ("order_samples", self.order_samples.to_string()),
            ("kappa", self.kappa.to_string()),
            ("q", self.q.to_string()),
            ("tune_q", self.tune_q.to_string()),
            ("q_grid", join(&self.q_grid)),
            ("two_pass", self.two_pass.to_string()),
            ("garch_max_iter", self.garch_max_iter.to_string()),
            ("garch_grad_tol", self.garch_grad_tol.to_string()),
            ("block_size", self.block_size.to_string()),
            ("scale", self.scale.name().to_string()),
            ("threshold", self.threshold.to_string()),
            ("candidates", join(&self.candidates)),
            ("seed", self.seed.to_string()),
            ("n", self.n.map_or("auto".into(), |n| n.to_string())),
            ("q_true", self.q_true.to_string()),
            ("meas_var", self.meas_var.to_string()),
            ("deltas", join(&self.deltas)),
            ("diag", join(&self.diag)),
            ("replications", self.replications.to_string()),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect()
    }

    pub fn scgarch_config(&self) -> ScgarchConfig<f64> {
        let ordering = match self.ordering {
            OrderingMode::Fixed => OrderingStrategy::Fixed(self.order.clone()),
            OrderingMode::BicExhaustive => OrderingStrategy::BicExhaustive {
                limit: self.exhaustive_limit,
            },
            OrderingMode::BicSampled => OrderingStrategy::BicSampled {
                samples: self.order_samples,
                seed: self.seed,
            },
        };
        let mut cfg = ScgarchConfig {
            ordering,
            kalman: KalmanSettings {
                kappa: self.kappa,
                q: self.q,
                q_grid: self.tune_q.then(|| self.q_grid.clone()),
                two_pass: self.two_pass,
            },
            ..ScgarchConfig::default()
        };
        cfg.garch.optimizer.max_iter = self.garch_max_iter;
        cfg.garch.optimizer.grad_tol = self.garch_grad_tol;
        cfg
    }

    pub fn sim1_config(&self) -> Sim1Config {
        Sim1Config {
            n: self.n.unwrap_or(Sim1Config::default().n),
            q_true: self.q_true,
            meas_var: self.meas_var,
            seed: self.seed,
        }
    }

    pub fn sim2_config(&self) -> Sim2Config {
        Sim2Config {
            n: self.n.unwrap_or(Sim2Config::default().n),
            deltas: self.deltas,
            diag: self.diag,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.set("order", "3,1,2").unwrap();
        cfg.set("q", "0.00031").unwrap();
        cfg.set("scale", "correlation").unwrap();
        cfg.set("n", "300").unwrap();
        let mut back = RunConfig::default();
        back.apply(&cfg.echo()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(cfg.order, vec![2, 0, 1]);
    }

    #[test]
    fn rejects_unknown_and_malformed_keys() {
        let mut cfg = RunConfig::default();
        assert!(matches!(cfg.set("colour", "red"), Err(CliError::Config(_))));
        assert!(matches!(cfg.set("q", "lots"), Err(CliError::Config(_))));
        assert!(matches!(cfg.set("order", "0,1"), Err(CliError::Config(_))));
        assert!(matches!(cfg.set("diag", "1,2"), Err(CliError::Config(_))));
        assert!(cfg.set("model", "dcc").is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("run.cfg");
        std::fs::write(&path, "# settings\nq = 0.001\nseed = 9\n").unwrap();
        let cfg = RunConfig::load(Some(&path), &[("seed".into(), "4".into())]).unwrap();
        assert_eq!((cfg.q, cfg.seed), (0.001, 4));
    }
}
