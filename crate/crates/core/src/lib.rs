//! Multipath delay/Doppler/gain estimation from OFDM packets.
//!
//! A packet of `L` OFDM symbols on `K` subcarriers observed through a
//! doubly-dispersive channel is modelled in the frequency domain as a
//! superposition of 2-D complex sinusoids, one per multipath tap. This crate
//! provides the signal model, the transmit ambiguity function, the
//! successive/parallel cancellation estimator built on a 2-D bisection
//! periodogram search, a time-domain waveform oracle used to validate the
//! frequency-domain model, and the Monte Carlo harness that compares the
//! estimator against the single-tap Cramer-Rao bound.
//!
//! The crate is `no_std` (with `alloc`) when the default `std` feature is
//! disabled.
//!
//! ```
//! use ofdm_mpe_core::prelude::*;
//!
//! let cfg = OfdmConfig::new(16, 8, 6.4e-6, 1.6e-6, &[]).unwrap();
//! let chan = MultipathChannel::new(vec![Tap::new(Complex64::new(0.8, 0.3), 50e-9, 120.0)]).unwrap();
//! let x = generate_symbols(&cfg, Constellation::AllOnes, 0).unwrap();
//! let h = channel_coeffs(&cfg, &chan);
//! let y = apply_channel(&x, &h, &NoiseSpec::noiseless()).unwrap();
//!
//! let region = SearchRegion::new(0.0, 400e-9, -2000.0, 2000.0).unwrap();
//! let opts = EstimatorOptions::new(1);
//! let est = initial_estimate(&cfg, &y, &x, &opts, &region).unwrap();
//! assert!((est.taps[0].tau - 50e-9).abs() < 1e-10);
//! ```

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod ambiguity;
pub mod error;
pub mod estimator;
pub mod grid;
pub mod montecarlo;
pub mod rng;
pub mod signal;
pub mod waveform;

mod math;

pub use error::{Error, Result};
pub use num_complex::Complex64;

pub mod prelude {
    pub use crate::ambiguity::{
        ambiguity_approx, ambiguity_exact, ambiguity_psk_closed, ambiguity_psk_dirichlet, ambiguity_psk_null_dc,
        correlation_vector, gram_matrix, AmbiguityForm, AmbiguityGrid, AmbiguityTable,
    };
    pub use crate::error::{Error, Result};
    pub use crate::estimator::{
        bisection_peak, crlb_single_tap, initial_estimate, ls_amplitudes, periodogram, refine, BisectionPeak, Crlb,
        Domain, EstimateSet, EstimatorOptions, SearchRegion, TapEstimate,
    };
    pub use crate::grid::SymbolGrid;
    pub use crate::montecarlo::{match_estimates, run_trials, sample_taps, Matching, ScenarioSpec, TrialStats};
    pub use crate::signal::{
        apply_channel, channel_coeffs, channel_coeffs_direct, generate_symbols, omega_matrix, steering_delay,
        steering_doppler, Constellation, MultipathChannel, NoiseSpec, OfdmConfig, Tap,
    };
    pub use crate::waveform::{apply_ct_channel, matched_filter, synth_tx, window_ambiguity, Waveform, WaveformConfig};
    pub use num_complex::Complex64;
}
