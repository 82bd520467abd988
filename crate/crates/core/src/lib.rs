//! Dynamic perfect sampling for discrete graphical models.
//!
//! A sample drawn from a model stays an exact sample after the model is
//! updated: only the variables near the update are resampled, and the
//! resampled region shrinks round by round until it is empty.
//!
//! ```
//! use dynsampler::factor_graph::{GraphicalModel, UpdateRequest};
//! use dynsampler::resample_engine::{dynamic_sample, product_sample, EngineOptions, ResampleState};
//! use dynsampler::rng::RngStream;
//!
//! let model = GraphicalModel::from_tables(vec![vec![0.5, 0.5]; 2], vec![]).unwrap();
//! let x0 = product_sample(&model, &RngStream::new(0));
//! let update = UpdateRequest::new().set_constraint(vec![0, 1], vec![1.0, 0.5, 0.5, 1.0]);
//! let next = model.apply_update(&update).unwrap();
//! let state = ResampleState::new(x0, next.vbl(&update));
//! let (x, stats) = dynamic_sample(&next, state, &RngStream::new(1), &EngineOptions::default()).unwrap();
//! assert_eq!(x.len(), 2);
//! assert!(stats.iterations >= 1);
//! ```

pub mod bench;
pub mod convergence;
pub mod error;
pub mod factor_graph;
pub mod io;
pub mod oracle;
pub mod resample_engine;
pub mod rng;
pub mod spin_models;

pub use error::{Error, Result};
