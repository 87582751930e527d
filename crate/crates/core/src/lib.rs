pub mod dsl;
pub mod expr;
pub mod model;
pub mod query;
pub mod engine;
pub mod rng;
pub mod models;
pub mod monitor;
pub mod output;
pub mod smc;
pub mod cli;
