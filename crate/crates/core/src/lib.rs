//! Workbench for analyzing modular-versus-conventional fleet competition:
//! a seeded attacker-defender campaign simulator, an entropy-based decision
//! tree miner over the battle logs, payoff and transition estimators that
//! assemble a three-stage stochastic game, and a bimatrix Nash solver with
//! backward induction across stages.

pub mod error;
pub mod estimator;
pub mod record;
pub mod sim;
pub mod solver;
pub mod strategy;
pub mod tree;

pub use error::{Error, Result};
