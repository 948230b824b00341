//! Motor sound synthesis and the acoustic channel.
//!
//! The modulated part of a motor's sound comes from voltage edges. Rotation
//! and ambient noise are lumped into one white Gaussian term scaled to a
//! target SNR. The channel adds multipath taps, uniform Doppler time
//! scaling and superposition of several transmitters.

mod channel;
mod ei;
pub mod filter;
pub mod resample;
pub mod wav;

pub use channel::{
    add_noise_at_snr, add_white_noise, apply_doppler, apply_multipath, doppler_factor, mix_sources, ChannelModel, Tap, DEFAULT_SOUND_SPEED,
};
pub use ei::{render_ei, voltage_edges, EiMode, SpikeKernel};
