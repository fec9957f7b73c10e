//! Downlink DS-CDMA signal model.

mod channel;
mod codes;
mod model;

pub use channel::{draw_delays, ChannelState, DEFAULT_SINUSOIDS};
pub use codes::{gold_family, SpreadingCode};
pub use model::{
    noise_variance, synthesize_symbol, ConvolutionMatrix, Downlink, SignalGeometry, SymbolRecord, SymbolWindow,
};

/// Convolution matrix of `code` for an `taps`-tap channel.
pub fn build_convolution_matrix(code: &SpreadingCode, taps: usize) -> crate::Result<ConvolutionMatrix> {
    ConvolutionMatrix::new(code, taps)
}
