//! Exact and bounded probability-proportional-to-size sampling.
//!
//! [`Sampler`] scans a stream of weighted items once. At any point the sample
//! it extracts contains each item with probability exactly proportional to
//! the item's weight and never holds more than the configured bound `n`
//! items. When `n` items cannot be drawn without breaking proportionality,
//! the expected sample size is the largest one compatible with it and the
//! size is concentrated on the two integers around that expectation.
//!
//! ```
//! use ebpps::{Sampler, WeightedItem};
//!
//! let mut sampler = Sampler::with_bound(10, 42).unwrap();
//! for i in 0..12 {
//!     let weight = if i < 6 { 1.0 } else { 4.0 };
//!     sampler.process(WeightedItem::new(i, weight).unwrap()).unwrap();
//! }
//! assert_eq!(sampler.inclusion_probability(1.0).unwrap(), 0.25);
//! assert_eq!(sampler.expected_sample_size(), 7.5);
//! let sample = sampler.extract();
//! assert!(sample.len() == 7 || sample.len() == 8);
//! ```

pub mod baseline;
pub mod bench;
pub mod error;
pub mod latent;
pub mod rng;
pub mod sampler;
pub mod stream;
pub mod verify;

pub use error::{Error, Result};
pub use latent::{DiscardCounter, DownsampleBranch, LatentSample, Sample, UnionCase, WeightedItem};
pub use rng::{RandomSource, SeededRng};
pub use sampler::{Sampler, SamplerConfig, Snapshot};
