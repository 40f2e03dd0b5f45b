//! Hellinger-distance geometric quantum discord.
//!
//! D^H(ρ) = 1 − max_σ Tr[√ρ √σ], maximized over completely classical states
//! `σ = Σₙ pₙ |σₙ⟩⟨σₙ|` supported on a product basis of the parties.

pub mod app;
pub mod catalog;
pub mod closed_forms;
pub mod engine;
pub mod error;
pub mod io;
pub mod linalg;
pub mod optim;
pub mod random;
pub mod spin_models;
pub mod states;
pub mod symmetric;

pub use error::{DiscordError, Result};
