//! Agent-based simulation of smart-watch support for people living with
//! dementia in a care home.

pub mod agents;
pub mod cli;
pub mod engine;
pub mod environment;
pub mod experiment;
pub mod metrics;
