//! Blinding-laser modulation envelopes.
//!
//! The receiver's AC-coupling removes any constant blinding signal, so the
//! attack modulates the blinding laser. [`square_wave`] produces the basic
//! two-level pattern; [`notch_filter`] removes envelope content from a
//! configurable frequency band so the modulation spectrum avoids the CV-QKD
//! signal band. Band removal is one-sided (positive envelope frequencies):
//! the complex envelope drives an IQ modulator whose positive and negative
//! baseband frequencies are distinct optical sidebands, and the resulting
//! envelope picks up genuine phase modulation.

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};

/// Floor returned by [`verify_notch`] when the band is numerically empty.
pub const SUPPRESSION_FLOOR_DB: f64 = -120.0;

/// Complex modulation envelope of the blinding laser, one repetition period
/// long, with peak magnitude normalized to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct BlindWaveform {
    envelope: Vec<Complex64>,
    rate: f64,
    period_s: f64,
}

impl BlindWaveform {
    /// Wrap an envelope, renormalizing so the peak magnitude is exactly 1.
    pub fn new(mut envelope: Vec<Complex64>, rate: f64) -> Result<Self> {
        if envelope.is_empty() || !(rate > 0.0) {
            return Err(Error::Waveform("empty envelope or non-positive rate".into()));
        }
        let peak = envelope.iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        if !(peak > 0.0) {
            return Err(Error::Waveform("envelope is identically zero".into()));
        }
        for z in &mut envelope {
            *z /= peak;
        }
        let period_s = envelope.len() as f64 / rate;
        Ok(Self {
            envelope,
            rate,
            period_s,
        })
    }

    pub fn envelope(&self) -> &[Complex64] {
        &self.envelope
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn period_s(&self) -> f64 {
        self.period_s
    }

    /// Instantaneous optical power pattern `|envelope|^2`.
    pub fn power_wave(&self) -> Vec<f64> {
        self.envelope.iter().map(|z| z.norm_sqr()).collect()
    }

    /// Mean of `|envelope|^2` over one period.
    pub fn mean_power(&self) -> f64 {
        self.power_wave().iter().sum::<f64>() / self.envelope.len() as f64
    }

    /// True if any sample has a non-negligible imaginary part.
    pub fn has_phase_modulation(&self) -> bool {
        self.envelope.iter().any(|z| z.im.abs() > 1e-9)
    }
}

/// Two-level `{0, 1}` square envelope at `freq` with the given duty cycle.
///
/// `freq` must divide the sample rate into an integer period and stay below
/// a tenth of Nyquist so the edges are resolved.
pub fn square_wave(freq: f64, rate: f64, duty: f64) -> Result<BlindWaveform> {
    if !(freq > 0.0 && rate > 0.0) {
        return Err(Error::Waveform("frequency and rate must be positive".into()));
    }
    if freq > rate / 20.0 {
        return Err(Error::Waveform(format!(
            "modulation at {freq} Hz unresolved at {rate} S/s (limit rate/20)"
        )));
    }
    if !(0.0..=1.0).contains(&duty) {
        return Err(Error::Waveform(format!("duty {duty} outside [0, 1]")));
    }
    let period = (rate / freq).round() as usize;
    let high = (period as f64 * duty).round() as usize;
    let env: Vec<Complex64> = (0..period)
        .map(|i| {
            if i < high || duty >= 1.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        })
        .collect();
    if env.iter().all(|z| z.norm() == 0.0) {
        return Err(Error::Waveform("duty cycle rounds to an empty envelope".into()));
    }
    BlindWaveform::new(env, rate)
}

fn fft_of(env: &[Complex64], inverse: bool) -> Vec<Complex64> {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(env.len())
    } else {
        planner.plan_fft_forward(env.len())
    };
    let mut buf = env.to_vec();
    fft.process(&mut buf);
    if inverse {
        let scale = 1.0 / env.len() as f64;
        for z in &mut buf {
            *z *= scale;
        }
    }
    buf
}

/// Positive-frequency bin indices of one period falling inside `band` Hz.
fn band_bins(n: usize, rate: f64, band: (f64, f64)) -> Vec<usize> {
    let df = rate / n as f64;
    (1..=n / 2)
        .filter(|&k| {
            let f = k as f64 * df;
            f >= band.0 && f <= band.1
        })
        .collect()
}

/// Remove the positive-frequency content of `band` from the envelope,
/// cyclically over one period, and renormalize to unit peak.
pub fn notch_filter(w: &BlindWaveform, band: (f64, f64)) -> Result<BlindWaveform> {
    if !(band.0 >= 0.0 && band.1 > band.0) {
        return Err(Error::Waveform(format!("bad band [{}, {}]", band.0, band.1)));
    }
    if band.1 > w.rate / 2.0 {
        return Err(Error::Waveform(format!(
            "band edge {} beyond Nyquist {}",
            band.1,
            w.rate / 2.0
        )));
    }
    let mut spec = fft_of(&w.envelope, false);
    for k in band_bins(spec.len(), w.rate, band) {
        spec[k] = Complex64::new(0.0, 0.0);
    }
    let env = fft_of(&spec, true);
    BlindWaveform::new(env, w.rate)
}

/// Integrated band power of the envelope relative to the same band of the
/// plain square reference at the same period, in dB (floored at -120 dB).
pub fn verify_notch(w: &BlindWaveform, band: (f64, f64)) -> Result<f64> {
    let freq = 1.0 / w.period_s;
    let reference = square_wave(freq, w.rate, 0.5)?;
    let band_power = |bw: &BlindWaveform| -> f64 {
        let spec = fft_of(&bw.envelope, false);
        band_bins(spec.len(), bw.rate, band)
            .iter()
            .map(|&k| spec[k].norm_sqr())
            .sum()
    };
    let p = band_power(w);
    let p_ref = band_power(&reference);
    if p_ref <= 0.0 || p / p_ref < 1e-12 {
        return Ok(SUPPRESSION_FLOOR_DB);
    }
    Ok(10.0 * (p / p_ref).log10())
}
