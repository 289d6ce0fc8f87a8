pub mod plot;
pub mod run;
pub mod sweep;
pub mod validate;
