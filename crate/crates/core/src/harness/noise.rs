//! Exact-norm noise injection.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linops::{gaussian_signal, Signal};
use crate::scalar::Scalar;

/// Returns `f_true + delta * d` with `d` a seeded random direction of unit
/// norm, so that `||f_delta - f_true|| = delta`.
pub fn add_noise_exact<T: Scalar>(f_true: &Signal<T>, delta: T, seed: u64) -> Result<Signal<T>> {
    add_noise_exact_stream(f_true, delta, seed, 0)
}

/// [`add_noise_exact`] drawing from stream `stream` of the generator.
pub fn add_noise_exact_stream<T: Scalar>(f_true: &Signal<T>, delta: T, seed: u64, stream: u64) -> Result<Signal<T>> {
    if !(delta.is_finite() && delta > T::zero()) {
        return Err(Error::InvalidNoiseLevel(delta.to_f64_lossy()));
    }
    let h = f_true.grid_spacing();
    for attempt in 0..16u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream.wrapping_add(attempt << 32));
        let raw = gaussian_signal::<T>(&mut rng, f_true.len()).into_values();
        let dir = Signal::with_spacing(raw, h)?;
        let norm = dir.norm();
        if norm > T::zero() && norm.is_finite() {
            return Ok(f_true.axpby(T::one(), &dir, delta / norm));
        }
    }
    Err(Error::InvalidParameter("could not draw a non-zero noise direction".into()))
}
