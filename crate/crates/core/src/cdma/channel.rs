//! Multipath Rayleigh fading following Clarke's model, realised as a sum of
//! sinusoids per path.

use num_complex::Complex64;
use rand::Rng;
use std::f64::consts::TAU;

use crate::{CVector, Error, Result};

/// Number of sinusoids per path in the Clarke realisation.
pub const DEFAULT_SINUSOIDS: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq)]
struct Oscillator {
    /// Doppler shift in cycles per symbol, `fdT * cos(angle of arrival)`.
    frequency: f64,
    phase: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct Path {
    delay: usize,
    amplitude: f64,
    oscillators: Vec<Oscillator>,
    gain: Complex64,
}

impl Path {
    fn gain_at(&self, symbol: u64) -> Complex64 {
        if self.oscillators.is_empty() {
            return self.gain;
        }
        let t = symbol as f64;
        let sum: Complex64 = self
            .oscillators
            .iter()
            .map(|o| Complex64::from_polar(1.0, TAU * o.frequency * t + o.phase))
            .sum();
        sum * (self.amplitude / (self.oscillators.len() as f64).sqrt())
    }
}

/// Fading state of the downlink channel shared by all users.
///
/// Taps only change through [`ChannelState::evolve`], i.e. once per symbol.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    paths: Vec<Path>,
    relative_powers_db: Vec<f64>,
    fd_t: f64,
    symbol: u64,
}

impl ChannelState {
    /// Draw a Clarke channel with `sinusoids` oscillators per path. Path
    /// powers are normalised so that the channel has unit total power while
    /// keeping the requested dB ratios.
    pub fn clarke<R: Rng + ?Sized>(
        relative_powers_db: &[f64],
        delays: Vec<usize>,
        fd_t: f64,
        sinusoids: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if relative_powers_db.len() != delays.len() || delays.is_empty() {
            return Err(Error::Dimension(format!(
                "{} path powers for {} delays",
                relative_powers_db.len(),
                delays.len()
            )));
        }
        if !(fd_t >= 0.0) || sinusoids == 0 {
            return Err(Error::Config(format!("invalid Doppler {fd_t} or sinusoid count {sinusoids}")));
        }
        let linear: Vec<f64> = relative_powers_db.iter().map(|db| 10f64.powf(db / 10.0)).collect();
        let total: f64 = linear.iter().sum();
        let mut paths: Vec<Path> = linear
            .iter()
            .zip(&delays)
            .map(|(p, &delay)| {
                let oscillators = (0..sinusoids)
                    .map(|_| Oscillator {
                        frequency: fd_t * (TAU * rng.random::<f64>()).cos(),
                        phase: TAU * rng.random::<f64>(),
                    })
                    .collect();
                Path { delay, amplitude: (p / total).sqrt(), oscillators, gain: Complex64::default() }
            })
            .collect();
        for p in &mut paths {
            p.gain = p.gain_at(0);
        }
        Ok(Self { paths, relative_powers_db: relative_powers_db.to_vec(), fd_t, symbol: 0 })
    }

    /// A time-invariant channel with the given per-path gains.
    pub fn fixed(gains: &[Complex64], delays: Vec<usize>) -> Result<Self> {
        if gains.len() != delays.len() || gains.is_empty() {
            return Err(Error::Dimension(format!("{} gains for {} delays", gains.len(), delays.len())));
        }
        let total: f64 = gains.iter().map(|g| g.norm_sqr()).sum();
        let paths = gains
            .iter()
            .zip(&delays)
            .map(|(&gain, &delay)| Path { delay, amplitude: gain.norm(), oscillators: Vec::new(), gain })
            .collect();
        let relative_powers_db =
            gains.iter().map(|g| 10.0 * (g.norm_sqr() / total.max(f64::MIN_POSITIVE)).log10()).collect();
        Ok(Self { paths, relative_powers_db, fd_t: 0.0, symbol: 0 })
    }

    /// Advance one symbol interval.
    pub fn evolve(&mut self) {
        self.symbol += 1;
        if self.fd_t == 0.0 {
            return;
        }
        let symbol = self.symbol;
        for p in &mut self.paths {
            p.gain = p.gain_at(symbol);
        }
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    /// Current complex gain of each path.
    pub fn taps(&self) -> Vec<Complex64> {
        self.paths.iter().map(|p| p.gain).collect()
    }

    pub fn delays(&self) -> Vec<usize> {
        self.paths.iter().map(|p| p.delay).collect()
    }

    pub fn relative_powers_db(&self) -> &[f64] {
        &self.relative_powers_db
    }

    /// Linear power scale applied to each path.
    pub fn path_powers(&self) -> Vec<f64> {
        self.paths.iter().map(|p| p.amplitude * p.amplitude).collect()
    }

    pub fn fd_t(&self) -> f64 {
        self.fd_t
    }

    /// Symbol index the taps correspond to.
    pub fn symbol(&self) -> u64 {
        self.symbol
    }

    /// Chip-spaced impulse response `h` of length `len`, with each path
    /// placed at its delay.
    pub fn impulse_response(&self, len: usize) -> Result<CVector> {
        let mut h = CVector::zeros(len);
        for p in &self.paths {
            if p.delay >= len {
                return Err(Error::Dimension(format!("path delay {} exceeds {len} taps", p.delay)));
            }
            h[p.delay] += p.gain;
        }
        Ok(h)
    }
}

/// Delays for `paths` paths: the first at chip 0, each following one spaced
/// by 1 or 2 chips with equal probability.
pub fn draw_delays<R: Rng + ?Sized>(paths: usize, rng: &mut R) -> Vec<usize> {
    let mut delays = Vec::with_capacity(paths);
    let mut d = 0;
    for i in 0..paths {
        if i > 0 {
            d += rng.random_range(1..=2usize);
        }
        delays.push(d);
    }
    delays
}
