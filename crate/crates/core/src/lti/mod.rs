//! Linear plants, their structural classification and random test plants.

mod normal_form;
mod structure;
mod system;
mod zeros;

pub use normal_form::{
    random_orthogonal, random_sigma_mr, random_sigma_mr_with, GeneratorOptions, NormalForm,
};
pub use structure::{
    classify, high_frequency_gain, is_positive_definite, strict_relative_degree,
    ClassificationReport, MIN_PHASE_MARGIN,
};
pub use system::StateSpaceSystem;
pub use zeros::{invariant_zeros, rosenbrock_rank_ratio};
pub(crate) use zeros::singular_values;
