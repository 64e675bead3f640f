//! Screened Monte Carlo: running means of `F(X)` gated by a control
//! observable `U(X)` with known mean, with explicit and exact large-deviation
//! rates for the screened error event.

pub mod bounds;
pub mod dist;
pub mod error;
pub mod harness;
pub mod optimize;
pub mod par;
pub mod quadrature;
pub mod rates;
pub mod rng;
pub mod sanov;
pub mod screen;

pub use dist::{DistributionModel, Observable, ObservablePair};
pub use error::{Error, Result};
pub use rng::RandomStream;
pub use screen::{ScreenConfig, Sidedness, StreamState};
