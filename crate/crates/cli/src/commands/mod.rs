pub mod pipeline;
pub mod simulate;
pub mod validate;
