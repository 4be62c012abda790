pub mod engine;
pub mod miner;
pub mod model;
pub mod service;
pub mod store;
pub mod syslearn;
