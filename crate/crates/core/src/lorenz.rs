//! Lorenz x-component series: generation, normalization, delay embedding,
//! training-noise corruption and sliding train/test windows.

use std::io::{self, BufRead, Write};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lorenz system parameters and integration settings.
///
/// The ODEs are `x' = sigma (y - x)`, `y' = x (rho - z) - y`, `z' = x y - beta z`,
/// integrated with forward Euler at step `dt`. After `transient` discarded steps
/// the x component is recorded once every `sample_every` steps.
#[derive(Debug, Clone, PartialEq)]
pub struct LorenzParams<T> {
    pub sigma: T,
    pub rho: T,
    pub beta: T,
    pub dt: T,
    pub initial: [T; 3],
    pub transient: usize,
    pub sample_every: usize,
}

impl<T: Scalar> Default for LorenzParams<T> {
    fn default() -> Self {
        Self {
            sigma: T::lit(10.0),
            rho: T::lit(28.0),
            beta: T::lit(8.0) / T::lit(3.0),
            dt: T::lit(0.01),
            initial: [T::one(); 3],
            transient: 1000,
            sample_every: 12,
        }
    }
}

impl<T: Scalar> LorenzParams<T> {
    /// Variant with the x-rate set to 1, as printed in the original experiment
    /// description. This setting is not chaotic: trajectories settle onto a
    /// fixed point.
    pub fn printed_rate() -> Self {
        Self {
            sigma: T::one(),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(Error::invalid("dt", "must be positive and finite"));
        }
        for (name, v) in [("sigma", self.sigma), ("rho", self.rho), ("beta", self.beta)] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        if self.initial.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("initial", "must be finite"));
        }
        if self.sample_every == 0 {
            return Err(Error::invalid("sample_every", "must be at least 1"));
        }
        Ok(())
    }
}

/// One forward Euler step of the Lorenz ODEs.
#[inline]
pub fn euler_step<T: Scalar>(p: &LorenzParams<T>, [x, y, z]: [T; 3]) -> [T; 3] {
    let dx = p.sigma * (y - x);
    let dy = x * (p.rho - z) - y;
    let dz = x * y - p.beta * z;
    [x + p.dt * dx, y + p.dt * dy, z + p.dt * dz]
}

/// Integrates the Lorenz system and returns `n_samples` recorded x values.
pub fn generate_lorenz<T: Scalar>(p: &LorenzParams<T>, n_samples: usize) -> Result<TimeSeries<T>> {
    p.validate()?;
    if n_samples == 0 {
        return Err(Error::invalid("n_samples", "must be at least 1"));
    }
    let mut state = p.initial;
    let mut step = 0usize;
    let mut advance = |state: &mut [T; 3], count: usize| -> Result<()> {
        for _ in 0..count {
            *state = euler_step(p, *state);
            step += 1;
            if state.iter().any(|v| !v.is_finite()) {
                return Err(Error::IntegrationDiverged { step });
            }
        }
        Ok(())
    };
    advance(&mut state, p.transient)?;
    let mut values = Vec::with_capacity(n_samples);
    for i in 0..n_samples {
        if i > 0 {
            advance(&mut state, p.sample_every)?;
        }
        values.push(state[0]);
    }
    Ok(TimeSeries { values })
}

/// Ordered sequence of finite real samples.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    values: Vec<T>,
}

impl<T: Scalar> TimeSeries<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("values", "all samples must be finite"));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Population mean and variance.
    pub fn moments(&self) -> (T, T) {
        let n = T::from_usize_lossy(self.values.len());
        let mean = self.values.iter().copied().sum::<T>() / n;
        let var = self
            .values
            .iter()
            .map(|&v| (v - mean) * (v - mean))
            .sum::<T>()
            / n;
        (mean, var)
    }

    /// Rescales to zero mean and unit population variance.
    pub fn normalize(&self) -> Result<Self> {
        if self.values.len() < 2 {
            return Err(Error::InsufficientData {
                needed: 2,
                got: self.values.len(),
            });
        }
        let (mean, var) = self.moments();
        if !(var > T::zero()) {
            return Err(Error::ZeroVariance);
        }
        let sd = var.sqrt();
        Ok(Self {
            values: self.values.iter().map(|&v| (v - mean) / sd).collect(),
        })
    }

    /// One value per line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for v in &self.values {
            writeln!(w, "{v}")?;
        }
        Ok(())
    }

    /// Reads the one-value-per-line format written by [`TimeSeries::write_csv`].
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut values = Vec::new();
        for line in r.lines() {
            let line = line?;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let v: f64 = line
                .parse()
                .map_err(|_| Error::invalid("series", format!("cannot parse `{line}`")))?;
            values.push(T::lit(v));
        }
        Self::new(values)
    }
}

/// Delay-embedding order and prediction horizon.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmbeddingConfig {
    pub order: usize,
    pub horizon: usize,
}

impl Default for EmbeddingConfig {
    fn default() -> Self {
        Self {
            order: 7,
            horizon: 1,
        }
    }
}

impl EmbeddingConfig {
    /// Raw samples needed to form `pairs` input/desired pairs.
    pub fn raw_len_for(&self, pairs: usize) -> usize {
        pairs + self.order + self.horizon - 1
    }

    fn validate(&self) -> Result<()> {
        if self.order == 0 {
            return Err(Error::invalid("order", "must be at least 1"));
        }
        if self.horizon == 0 {
            return Err(Error::invalid("horizon", "must be at least 1"));
        }
        Ok(())
    }
}

/// Paired samples `(x_i, d_i)` with inputs stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddedDataset<T> {
    dim: usize,
    inputs: Vec<T>,
    desired: Vec<T>,
}

impl<T: Scalar> EmbeddedDataset<T> {
    pub fn new(dim: usize, inputs: Vec<T>, desired: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("dim", "must be at least 1"));
        }
        if inputs.len() != dim * desired.len() {
            return Err(Error::LengthMismatch {
                left: inputs.len(),
                right: dim * desired.len(),
            });
        }
        Ok(Self {
            dim,
            inputs,
            desired,
        })
    }

    pub fn from_rows(rows: &[Vec<T>], desired: Vec<T>) -> Result<Self> {
        let dim = rows.first().map(Vec::len).ok_or(Error::Empty)?;
        if rows.len() != desired.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: desired.len(),
            });
        }
        let mut flat = Vec::with_capacity(dim * rows.len());
        for r in rows {
            crate::error::check_dim(dim, r.len())?;
            flat.extend_from_slice(r);
        }
        Self::new(dim, flat, desired)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.desired.len()
    }

    pub fn is_empty(&self) -> bool {
        self.desired.is_empty()
    }

    pub fn input(&self, i: usize) -> &[T] {
        &self.inputs[i * self.dim..(i + 1) * self.dim]
    }

    pub fn inputs(&self) -> impl ExactSizeIterator<Item = &[T]> + '_ {
        self.inputs.chunks_exact(self.dim)
    }

    pub fn inputs_flat(&self) -> &[T] {
        &self.inputs
    }

    pub fn desired(&self) -> &[T] {
        &self.desired
    }

    /// Contiguous sub-range of pairs `[start, start + len)`.
    pub fn window(&self, start: usize, len: usize) -> Result<Self> {
        let end = start + len;
        if end > self.len() {
            return Err(Error::InsufficientData {
                needed: end,
                got: self.len(),
            });
        }
        Ok(Self {
            dim: self.dim,
            inputs: self.inputs[start * self.dim..end * self.dim].to_vec(),
            desired: self.desired[start..end].to_vec(),
        })
    }

    /// One row per pair: the input columns followed by the desired value.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        for (x, d) in self.inputs().zip(&self.desired) {
            for v in x {
                write!(w, "{v},")?;
            }
            writeln!(w, "{d}")?;
        }
        Ok(())
    }
}

/// Delay embedding: `x_i = (s_i, ..., s_{i+L-1})`, `d_i = s_{i+L-1+horizon}`.
pub fn embed<T: Scalar>(ts: &TimeSeries<T>, cfg: EmbeddingConfig) -> Result<EmbeddedDataset<T>> {
    cfg.validate()?;
    let s = ts.values();
    let needed = cfg.order + cfg.horizon;
    if s.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: s.len(),
        });
    }
    let n = s.len() - needed + 1;
    let mut inputs = Vec::with_capacity(n * cfg.order);
    let mut desired = Vec::with_capacity(n);
    for i in 0..n {
        inputs.extend_from_slice(&s[i..i + cfg.order]);
        desired.push(s[i + cfg.order - 1 + cfg.horizon]);
    }
    EmbeddedDataset::new(cfg.order, inputs, desired)
}

/// Noise variance for a given SNR against a reference signal power.
pub fn noise_variance<T: Scalar>(snr_db: T, reference_power: T) -> T {
    reference_power / T::lit(10.0).powf(snr_db / T::lit(10.0))
}

/// Adds zero-mean Gaussian noise to the desired values only.
///
/// The noise variance is `reference_power / 10^(snr_db / 10)`; an infinite SNR
/// leaves the dataset untouched and draws nothing from `rng`.
pub fn add_noise<T: Scalar, R: Rng + ?Sized>(
    ds: &EmbeddedDataset<T>,
    snr_db: T,
    reference_power: T,
    rng: &mut R,
) -> Result<EmbeddedDataset<T>> {
    if snr_db.is_nan() || snr_db == T::neg_infinity() {
        return Err(Error::invalid("snr_db", "must be finite or +inf"));
    }
    let mut out = ds.clone();
    if snr_db == T::infinity() {
        return Ok(out);
    }
    let sd = noise_variance(snr_db, reference_power).sqrt();
    for d in &mut out.desired {
        let g: f64 = rng.sample(StandardNormal);
        *d += sd * T::lit(g);
    }
    Ok(out)
}

/// Sliding train/test window plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitPlan {
    pub train_len: usize,
    pub test_len: usize,
    pub stride: usize,
    pub runs: usize,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self {
            train_len: 2000,
            test_len: 400,
            stride: 50,
            runs: 50,
        }
    }
}

impl SplitPlan {
    /// Embedded pairs spanned by all runs.
    pub fn required_pairs(&self) -> usize {
        (self.runs - 1) * self.stride + self.train_len + self.test_len
    }

    /// Minimum raw series length for this plan under `cfg`.
    pub fn required_len(&self, cfg: EmbeddingConfig) -> usize {
        cfg.raw_len_for(self.required_pairs())
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("train_len", self.train_len),
            ("test_len", self.test_len),
            ("stride", self.stride),
            ("runs", self.runs),
        ] {
            if v == 0 {
                return Err(Error::invalid(name, "must be at least 1"));
            }
        }
        Ok(())
    }
}

/// One sliding-window run.
#[derive(Debug, Clone)]
pub struct Split<T> {
    pub run: usize,
    pub train: EmbeddedDataset<T>,
    pub test: EmbeddedDataset<T>,
}

/// Cuts the embedded series into `plan.runs` train/test windows.
///
/// Run `k` takes training pairs `[k * stride, k * stride + train_len)` and the
/// following `test_len` pairs for testing. Pair `i` starts at raw sample `i`,
/// so the raw offset of run `k` is `k * stride`.
pub fn sliding_splits<T: Scalar>(
    ts: &TimeSeries<T>,
    plan: SplitPlan,
    cfg: EmbeddingConfig,
) -> Result<Vec<Split<T>>> {
    plan.validate()?;
    cfg.validate()?;
    let needed = plan.required_len(cfg);
    if ts.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: ts.len(),
        });
    }
    let all = embed(ts, cfg)?;
    (0..plan.runs)
        .map(|run| {
            let offset = run * plan.stride;
            Ok(Split {
                run,
                train: all.window(offset, plan.train_len)?,
                test: all.window(offset + plan.train_len, plan.test_len)?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn origin_is_fixed_point() {
        let p = LorenzParams {
            rho: 0.0,
            sigma: 10.0,
            initial: [0.0; 3],
            ..LorenzParams::<f64>::default()
        };
        let ts = generate_lorenz(&p, 100).unwrap();
        assert!(ts.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_euler_step_by_hand() {
        let p = LorenzParams::<f64>::default();
        let [x, y, z] = euler_step(&p, [1.0, 1.0, 1.0]);
        assert_eq!(x, 1.0);
        assert!((y - (1.0 + 0.01 * 26.0)).abs() < 1e-15);
        assert!((z - (1.0 + 0.01 * (1.0 - 8.0 / 3.0))).abs() < 1e-15);
    }

    #[test]
    fn divergence_is_reported() {
        let p = LorenzParams {
            dt: 10.0,
            ..LorenzParams::<f64>::default()
        };
        assert!(matches!(
            generate_lorenz(&p, 100),
            Err(Error::IntegrationDiverged { .. })
        ));
    }

    #[test]
    fn bounded_nonconstant_attractor() {
        let ts = generate_lorenz(&LorenzParams::<f64>::default(), 5000).unwrap();
        let v = ts.values();
        assert!(v.iter().all(|x| x.abs() < 100.0));
        let (_, var) = ts.moments();
        assert!(var > 1.0);
    }

    #[test]
    fn normalize_examples() {
        let ts = TimeSeries::new(vec![1.0, -1.0]).unwrap();
        assert_eq!(ts.normalize().unwrap().values(), &[1.0, -1.0]);
        let flat = TimeSeries::new(vec![5.0, 5.0, 5.0]).unwrap();
        assert!(matches!(flat.normalize(), Err(Error::ZeroVariance)));
        let one = TimeSeries::new(vec![5.0]).unwrap();
        assert!(one.normalize().is_err());
    }

    #[test]
    fn embed_examples() {
        let ts = TimeSeries::new(vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let ds = embed(
            &ts,
            EmbeddingConfig {
                order: 2,
                horizon: 1,
            },
        )
        .unwrap();
        assert_eq!(ds.input(0), &[1.0, 2.0]);
        assert_eq!(ds.input(1), &[2.0, 3.0]);
        assert_eq!(ds.desired(), &[3.0, 4.0]);

        let short = TimeSeries::new(vec![0.0f64; 7]).unwrap();
        assert!(matches!(
            embed(&short, EmbeddingConfig::default()),
            Err(Error::InsufficientData { needed: 8, got: 7 })
        ));
    }

    #[test]
    fn infinite_snr_is_identity() {
        let ts = TimeSeries::new((0..20).map(|i| i as f64).collect()).unwrap();
        let ds = embed(&ts, EmbeddingConfig::default()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let out = add_noise(&ds, f64::INFINITY, 1.0, &mut rng).unwrap();
        assert_eq!(out, ds);
        assert!(add_noise(&ds, f64::NAN, 1.0, &mut rng).is_err());
    }

    #[test]
    fn twenty_db_on_unit_power() {
        assert!((noise_variance(20.0f64, 1.0) - 0.01).abs() < 1e-15);
    }

    #[test]
    fn split_windows_by_index() {
        let ts = TimeSeries::new((0..8).map(|i| i as f64).collect()).unwrap();
        let cfg = EmbeddingConfig {
            order: 1,
            horizon: 1,
        };
        let plan = SplitPlan {
            train_len: 4,
            test_len: 2,
            stride: 1,
            runs: 2,
        };
        assert_eq!(plan.required_len(cfg), 8);
        let splits = sliding_splits(&ts, plan, cfg).unwrap();
        // run 0 covers pairs [0..6), run 1 covers [1..7)
        assert_eq!(splits[0].train.input(0), &[0.0]);
        assert_eq!(splits[0].test.input(1), &[5.0]);
        assert_eq!(splits[1].train.input(0), &[1.0]);
        assert_eq!(splits[1].test.input(1), &[6.0]);
        assert_eq!(splits[1].test.desired()[1], 7.0);

        let short = TimeSeries::new((0..7).map(|i| i as f64).collect()).unwrap();
        assert!(matches!(
            sliding_splits(&short, plan, cfg),
            Err(Error::InsufficientData { needed: 8, got: 7 })
        ));
    }

    #[test]
    fn default_plan_minimum_length() {
        let plan = SplitPlan::default();
        let cfg = EmbeddingConfig::default();
        assert_eq!(plan.required_len(cfg), 49 * 50 + 2000 + 400 + 7);
        assert!(plan.required_len(cfg) <= 50 * 50 + 2000 + 400 + 7 + 1);
    }

    #[test]
    fn csv_round_trip() {
        let ts = TimeSeries::new(vec![0.5f64, -1.25, 3.0]).unwrap();
        let mut buf = Vec::new();
        ts.write_csv(&mut buf).unwrap();
        let back = TimeSeries::<f64>::read_csv(buf.as_slice()).unwrap();
        assert_eq!(back, ts);

        let ds = EmbeddedDataset::from_rows(&[vec![1.0, 2.0]], vec![3.0]).unwrap();
        let mut buf = Vec::new();
        ds.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "1,2,3\n");
    }
}
