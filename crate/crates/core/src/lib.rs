//! Augmented space linear model (ASLM) and its comparison family.
//!
//! A least-squares predictor is corrected at query time by the training
//! residual of the nearest training input, found with an exact kd-tree under
//! the `w ∘ x` metric. The same error-table correction wraps any trained base
//! model (here kernel least mean squares), and sequential vector quantization
//! shrinks and denoises the tables.
//!
//! Numeric code is generic over [`Scalar`] (`f32` or `f64`); the `*64` aliases
//! below fix the double-precision instantiation used by the benchmark.
//!
//! ```
//! use aslm::{embed, generate_lorenz, predict_aslm, train_aslm, EmbeddingConfig, LorenzParams};
//!
//! let series = generate_lorenz(&LorenzParams::<f64>::default(), 300)?.normalize()?;
//! let data = embed(&series, EmbeddingConfig::default())?;
//! let train = data.window(0, 250)?;
//! let model = train_aslm(&train, 0.1)?;
//! let y = predict_aslm(&model, data.input(260))?;
//! assert!(y.is_finite());
//! # Ok::<(), aslm::Error>(())
//! ```

pub mod augmented;
pub mod bench;
mod error;
pub mod export;
pub mod kernel;
pub mod linear;
pub mod lorenz;
pub mod neighbor;
pub mod predictor;
pub mod quantizer;
mod scalar;

pub use augmented::{
    augment, augment_quantized, predict_aslm, predict_augmented, predict_knn, train_aslm, train_knn, train_qaslm,
    AslmModel, AugmentedModel, ErrorTable, KnnModel, QuantizedErrorTable,
};
pub use error::{Error, Result};
pub use export::CsvDump;
pub use kernel::{gaussian_kernel, predict_klms, train_klms, train_qklms, KernelConfig, KlmsModel};
pub use linear::{mse, solve_regularized_ls, RegressionProblem, WeightVector};
pub use lorenz::{
    add_noise, embed, euler_step, generate_lorenz, sliding_splits, EmbeddedDataset, EmbeddingConfig, LorenzParams,
    Split, SplitPlan, TimeSeries,
};
pub use neighbor::{brute_force_nearest, Metric, Nearest, NeighborIndex};
pub use predictor::{predict_all, Predictor, StorageCost, ZeroPredictor};
pub use quantizer::{build_quantized_table, quantize_sequential, tune_epsilon, Codebook, EpsilonChoice};
pub use scalar::{dot, squared_distance, Scalar};

pub type TimeSeries64 = TimeSeries<f64>;
pub type Dataset64 = EmbeddedDataset<f64>;
pub type WeightVector64 = WeightVector<f64>;
pub type AslmModel64 = AslmModel<f64>;
pub type KnnModel64 = KnnModel<f64>;
pub type KlmsModel64 = KlmsModel<f64>;
pub type ErrorTable64 = ErrorTable<f64>;
pub type Codebook64 = Codebook<f64>;
pub type NeighborIndex64<P> = NeighborIndex<f64, P>;

pub type TimeSeries32 = TimeSeries<f32>;
pub type Dataset32 = EmbeddedDataset<f32>;
pub type AslmModel32 = AslmModel<f32>;
pub type KlmsModel32 = KlmsModel<f32>;
