//! Perceived Nash equilibria of games played by players who weigh each
//! other's costs through a social range matrix, with a network creation game
//! as the main instance.

pub mod analysis;
pub mod equilibrium;
pub mod error;
pub mod game_core;
pub mod netgame;
pub mod report;
pub mod scalar;
pub mod social_matrix;

pub use equilibrium::{enumerate_pne, EquilibriumReport, Method};
pub use error::{Error, Result};
pub use game_core::Game;
pub use netgame::{InducedGraph, NetGame, NetGameConfig, PurchaseProfile, TargetSet, UtilitySpec};
pub use scalar::{rat, Cost, Dual, Scalar, SocialWeight};
pub use social_matrix::SocialRangeMatrix;
