//! Dataset files, synthetic ground truth, Weibull fitting and the
//! calibration starting point.

pub mod annotations;
pub mod dataset;
pub mod fit;
pub mod initial;
pub mod synthetic;

pub use annotations::{load_annotations, save_annotations, ExamRequestAnnotation};
pub use dataset::{load_dataset, write_dataset, Dataset, DatasetMeta};
pub use fit::{fit_weibull, fit_weibull_with, FitOptions};
pub use initial::{initial_guess, InitialGuess, InitialGuessOptions};
pub use synthetic::{gen_synthetic, gen_synthetic_with_annotations};
