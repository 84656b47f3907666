//! Secrecy-rate optimization for a RIS-aided mmWave downlink whose access
//! point drives its RF chains through low-resolution DACs.
//!
//! The crate is `no_std` (it needs `alloc`). Everything here is a pure
//! function of its inputs plus, where randomness is involved, a caller-owned
//! PRNG. File formats, the experiment harness and the CLI live in the `rissec`
//! companion crate.
//!
//! Layout:
//!
//! - [`config`] and [`model`]: system parameters, channel/beamformer/phase
//!   containers and the semi-unitary analog codebook.
//! - [`channel`]: geometric mmWave channel realizations.
//! - [`quant`]: the additive quantization noise model of the DACs.
//! - [`rates`]: user, eavesdropper and secrecy rates.
//! - [`conic`]: a small log-barrier interior-point solver for problems with
//!   linear, convex-quadratic and rotated-cone constraints.
//! - [`sca`] and [`pga`]: digital beamformer design (successive convex
//!   approximation, with projected gradient ascent as a cross-check).
//! - [`bcd`]: element-wise discrete phase optimization of the RIS.
//! - [`ao`]: the alternating optimization loop and the comparison schemes.
#![cfg_attr(not(feature = "std"), no_std)]
// 0.6366 in tests is the one-bit b_Q, not 2/π
#![cfg_attr(test, allow(clippy::approx_constant))]

extern crate alloc;

pub mod ao;
pub mod bcd;
pub mod channel;
pub mod config;
pub mod conic;
pub mod error;
pub mod model;
pub mod pga;
pub mod quant;
pub mod rates;
pub mod sca;

pub use num_complex::Complex64 as C64;

pub use ao::{ao_optimize, mrt_beamformer, run_scheme, AoResult, SchemeKind};
pub use bcd::{bcd_sweep, exhaustive_phase_search, BcdCoefficients};
pub use channel::{gen_channels, gen_direct_channels, path_loss_db, steering_vector};
pub use config::{ConfigError, Geometry, SystemConfig};
pub use error::Error;
pub use model::{build_codebook, BeamformerState, ChannelSet, DirectChannels, PhaseVector};
pub use quant::QuantizationModel;
pub use rates::{secrecy_rate, EffectiveLinks, LinkGains};
