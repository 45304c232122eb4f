use std::hint::black_box;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::config::{ExperimentConfig, ModelKind};
use crate::augmented::{
    aslm_from_weights, augment_quantized_with_residuals, augment_with_residuals, qaslm_from_weights, train_knn,
};
use crate::error::{Error, Result};
use crate::kernel::{train_klms, train_qklms, KernelConfig, KlmsModel};
use crate::linear::{mse, solve_regularized_ls, RegressionProblem, WeightVector};
use crate::lorenz::{add_noise, generate_lorenz, sliding_splits, EmbeddedDataset, LorenzParams, Split};
use crate::neighbor::Metric;
use crate::predictor::{predict_all, Predictor, StorageCost};
use crate::quantizer::tune_epsilon;
use crate::scalar::Scalar;

/// A trained model as the harness sees it.
pub trait Fitted<T: Scalar>: Predictor<T> + StorageCost {}

impl<T: Scalar, M: Predictor<T> + StorageCost> Fitted<T> for M {}

/// Total scalars a model stores for inference.
pub fn measure_storage<M: StorageCost + ?Sized>(model: &M) -> usize {
    model.storage_scalars()
}

/// Mean wall-clock seconds per query. The first 10% of queries warm up caches
/// and are not timed.
pub fn measure_query_time<T: Scalar, M: Predictor<T> + ?Sized>(model: &M, queries: &[&[T]]) -> Result<f64> {
    if queries.len() < 100 {
        return Err(Error::invalid("queries", "need at least 100 for stable timing"));
    }
    let warm = queries.len() / 10;
    for q in &queries[..warm] {
        black_box(model.predict(black_box(q))?);
    }
    let timed = &queries[warm..];
    let start = Instant::now();
    for q in timed {
        black_box(model.predict(black_box(q))?);
    }
    Ok(start.elapsed().as_secs_f64() / timed.len() as f64)
}

/// Scores of one model on one run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub test_mse: f64,
    pub train_mse: f64,
    pub storage: usize,
    /// Key count of the lookup table or kernel expansion, if any.
    pub table_size: Option<usize>,
    pub epsilon: Option<f64>,
    pub query_seconds: Option<f64>,
}

/// Aggregated statistics of one model over all runs.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelStats {
    pub model: ModelKind,
    pub mean_test_mse: f64,
    /// Sample standard deviation (n - 1) across runs; zero for a single run.
    pub std_test_mse: f64,
    pub mean_train_mse: f64,
    pub storage_scalars: usize,
    pub mean_query_us: Option<f64>,
    pub mean_table_size: Option<f64>,
    pub mean_epsilon: Option<f64>,
    pub runs: Vec<RunOutcome>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub run_count: usize,
    pub models: Vec<ModelStats>,
}

impl ExperimentReport {
    pub fn get(&self, model: ModelKind) -> Option<&ModelStats> {
        self.models.iter().find(|m| m.model == model)
    }
}

pub(crate) fn cast_lorenz<T: Scalar>(p: &LorenzParams<f64>) -> LorenzParams<T> {
    LorenzParams {
        sigma: T::lit(p.sigma),
        rho: T::lit(p.rho),
        beta: T::lit(p.beta),
        dt: T::lit(p.dt),
        initial: p.initial.map(T::lit),
        transient: p.transient,
        sample_every: p.sample_every,
    }
}

/// Generates, normalizes and splits the series described by `cfg`.
pub fn prepare_splits<T: Scalar>(cfg: &ExperimentConfig) -> Result<Vec<Split<T>>> {
    let len = cfg.split.required_len(cfg.embedding);
    let series = generate_lorenz(&cast_lorenz::<T>(&cfg.lorenz), len)?.normalize()?;
    sliding_splits(&series, cfg.split, cfg.embedding)
}

/// Per-run random stream, independent of roster and of the other runs.
pub fn run_rng(seed: u64, run: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(run as u64);
    rng
}

/// Training set of one run after optional noise corruption.
pub fn training_set<T: Scalar>(cfg: &ExperimentConfig, split: &Split<T>) -> Result<EmbeddedDataset<T>> {
    match cfg.snr_db {
        // the series is normalized to unit power
        Some(snr) => add_noise(&split.train, T::lit(snr), T::one(), &mut run_rng(cfg.seed, split.run)),
        None => Ok(split.train.clone()),
    }
}

/// Lazily computed pieces shared between models of one run.
struct RunCache<'a, T: Scalar> {
    cfg: &'a ExperimentConfig,
    train: &'a EmbeddedDataset<T>,
    weights: Option<WeightVector<T>>,
    klms: Option<(KlmsModel<T>, Vec<T>)>,
    eps_klms: Option<T>,
}

impl<'a, T: Scalar> RunCache<'a, T> {
    fn weights(&mut self) -> Result<WeightVector<T>> {
        if self.weights.is_none() {
            let p = RegressionProblem::from_dataset(self.train, T::lit(self.cfg.delta));
            self.weights = Some(solve_regularized_ls(&p)?);
        }
        Ok(self.weights.clone().expect("set above"))
    }

    fn kernel(&self) -> KernelConfig<T> {
        KernelConfig {
            sigma: T::lit(self.cfg.kernel.sigma),
            eta: T::lit(self.cfg.kernel.eta),
        }
    }

    /// Trained KLMS and its residuals on the training set.
    fn klms(&mut self) -> Result<(KlmsModel<T>, Vec<T>)> {
        if self.klms.is_none() {
            let m = train_klms(self.train, self.kernel())?;
            let residuals = self
                .train
                .inputs()
                .zip(self.train.desired())
                .map(|(x, &d)| Ok(d - m.predict(x)?))
                .collect::<Result<Vec<T>>>()?;
            self.klms = Some((m, residuals));
        }
        Ok(self.klms.clone().expect("set above"))
    }

    fn epsilon(&self, fixed: Option<f64>, metric: &Metric<T>) -> Result<T> {
        match fixed {
            Some(e) => Ok(T::lit(e)),
            None => tune_epsilon(
                self.train.dim(),
                self.train.inputs_flat(),
                self.cfg.quantization.target_size,
                metric,
            )
            .map(|c| c.epsilon),
        }
    }

    fn eps_klms(&mut self) -> Result<T> {
        if self.eps_klms.is_none() {
            self.eps_klms = Some(self.epsilon(self.cfg.quantization.epsilon_klms, &Metric::PlainL2)?);
        }
        Ok(self.eps_klms.expect("set above"))
    }

    fn fit(&mut self, kind: ModelKind) -> Result<(Box<dyn Fitted<T>>, Option<usize>, Option<T>)> {
        Ok(match kind {
            ModelKind::Ls => (Box::new(self.weights()?), None, None),
            ModelKind::Knn => {
                let m = train_knn(self.train)?;
                let n = m.index().len();
                (Box::new(m), Some(n), None)
            }
            ModelKind::Aslm => {
                let m = aslm_from_weights(self.weights()?, self.train)?;
                let n = m.table().len();
                (Box::new(m), Some(n), None)
            }
            ModelKind::Qaslm => {
                let w = self.weights()?;
                let eps = self.epsilon(self.cfg.quantization.epsilon_aslm, &Metric::hadamard(w.as_slice())?)?;
                let (m, cb) = qaslm_from_weights(w, self.train, eps)?;
                (Box::new(m), Some(cb.len()), Some(eps))
            }
            ModelKind::Klms => {
                let (m, _) = self.klms()?;
                let n = m.len();
                (Box::new(m), Some(n), None)
            }
            ModelKind::Qklms => {
                let eps = self.eps_klms()?;
                let m = train_qklms(self.train, self.kernel(), eps)?;
                let n = m.len();
                (Box::new(m), Some(n), Some(eps))
            }
            ModelKind::KlmsAm => {
                let (base, residuals) = self.klms()?;
                let m = augment_with_residuals(base, self.train, residuals)?;
                let n = m.table().len();
                (Box::new(m), Some(n), None)
            }
            ModelKind::KlmsQam => {
                let eps = self.eps_klms()?;
                let (base, residuals) = self.klms()?;
                let (m, cb) = augment_quantized_with_residuals(base, self.train, &residuals, eps)?;
                (Box::new(m), Some(cb.len()), Some(eps))
            }
        })
    }
}

fn score<T: Scalar>(model: &dyn Fitted<T>, ds: &EmbeddedDataset<T>) -> Result<f64> {
    let preds = predict_all(model, ds.inputs())?;
    Ok(mse(&preds, ds.desired())?.as_f64())
}

/// Trains and scores every roster model on one split.
pub fn run_split<T: Scalar>(cfg: &ExperimentConfig, split: &Split<T>) -> Result<Vec<RunOutcome>> {
    let train = training_set(cfg, split)?;
    let mut cache = RunCache {
        cfg,
        train: &train,
        weights: None,
        klms: None,
        eps_klms: None,
    };
    let queries: Vec<&[T]> = split.test.inputs().collect();
    cfg.roster
        .iter()
        .map(|&kind| {
            let annotate = |e: Error| Error::Run {
                run: split.run,
                model: kind.name().to_string(),
                source: Box::new(e),
            };
            let (model, table_size, epsilon) = cache.fit(kind).map_err(annotate)?;
            let test_mse = score(model.as_ref(), &split.test).map_err(annotate)?;
            let train_mse = score(model.as_ref(), &train).map_err(annotate)?;
            let query_seconds = if cfg.timing {
                Some(measure_query_time(model.as_ref(), &queries).map_err(annotate)?)
            } else {
                None
            };
            Ok(RunOutcome {
                test_mse,
                train_mse,
                storage: measure_storage(model.as_ref()),
                table_size,
                epsilon: epsilon.map(Scalar::as_f64),
                query_seconds,
            })
        })
        .collect()
}

fn mean(v: impl Iterator<Item = f64>) -> Option<f64> {
    let (n, s) = v.fold((0usize, 0.0), |(n, s), x| (n + 1, s + x));
    (n > 0).then(|| s / n as f64)
}

fn sample_std(v: &[f64]) -> f64 {
    if v.len() < 2 {
        return 0.0;
    }
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

fn aggregate(model: ModelKind, runs: Vec<RunOutcome>) -> ModelStats {
    let tests: Vec<f64> = runs.iter().map(|r| r.test_mse).collect();
    ModelStats {
        model,
        mean_test_mse: mean(tests.iter().copied()).unwrap_or(f64::NAN),
        std_test_mse: sample_std(&tests),
        mean_train_mse: mean(runs.iter().map(|r| r.train_mse)).unwrap_or(f64::NAN),
        storage_scalars: mean(runs.iter().map(|r| r.storage as f64)).map_or(0, |m| m.round() as usize),
        mean_query_us: mean(runs.iter().filter_map(|r| r.query_seconds)).map(|s| s * 1e6),
        mean_table_size: mean(runs.iter().filter_map(|r| r.table_size.map(|n| n as f64))),
        mean_epsilon: mean(runs.iter().filter_map(|r| r.epsilon)),
        runs,
    }
}

/// Runs the full sliding-window protocol.
pub fn run_experiment<T: Scalar>(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let splits = prepare_splits::<T>(cfg)?;
    let cfg = if cfg.grid_search {
        grid_search(cfg, &splits[0])?
    } else {
        cfg.clone()
    };
    let mut per_model: Vec<Vec<RunOutcome>> = vec![Vec::with_capacity(splits.len()); cfg.roster.len()];
    for split in &splits {
        for (slot, outcome) in per_model.iter_mut().zip(run_split(&cfg, split)?) {
            slot.push(outcome);
        }
    }
    let models = cfg
        .roster
        .iter()
        .zip(per_model)
        .map(|(&kind, runs)| aggregate(kind, runs))
        .collect();
    Ok(ExperimentReport {
        run_count: splits.len(),
        config: cfg,
        models,
    })
}

pub const DELTA_GRID: [f64; 5] = [1e-3, 1e-2, 0.1, 1.0, 10.0];
pub const SIGMA_GRID: [f64; 4] = [0.5, 1.0, 2.0, 4.0];
pub const ETA_GRID: [f64; 4] = [0.3, 0.5, 0.7, 0.9];

/// Picks delta, kernel sigma and eta by hold-out MSE on the last fifth of the
/// first run's (possibly noisy) training window.
pub fn grid_search<T: Scalar>(cfg: &ExperimentConfig, first: &Split<T>) -> Result<ExperimentConfig> {
    let train = training_set(cfg, first)?;
    let cut = train.len() - train.len() / 5;
    if cut == 0 || cut == train.len() {
        return Err(Error::invalid("train-len", "too short for a hold-out slice"));
    }
    let fit = train.window(0, cut)?;
    let hold = train.window(cut, train.len() - cut)?;
    let holdout = |m: &dyn Predictor<T>| -> Result<f64> {
        let preds = predict_all(m, hold.inputs())?;
        Ok(mse(&preds, hold.desired())?.as_f64())
    };

    let mut best_delta = (f64::INFINITY, cfg.delta);
    for &delta in &DELTA_GRID {
        let w = solve_regularized_ls(&RegressionProblem::from_dataset(&fit, T::lit(delta)))?;
        let score = holdout(&w)?;
        if score < best_delta.0 {
            best_delta = (score, delta);
        }
    }
    let mut best_kernel = (f64::INFINITY, cfg.kernel);
    for &sigma in &SIGMA_GRID {
        for &eta in &ETA_GRID {
            let kc = KernelConfig {
                sigma: T::lit(sigma),
                eta: T::lit(eta),
            };
            let score = holdout(&train_klms(&fit, kc)?)?;
            if score < best_kernel.0 {
                best_kernel = (score, KernelConfig { sigma, eta });
            }
        }
    }
    Ok(ExperimentConfig {
        delta: best_delta.1,
        kernel: best_kernel.1,
        grid_search: false,
        ..cfg.clone()
    })
}
