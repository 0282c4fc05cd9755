//! Core DSP primitives: framing, sinusoid synthesis, normalized
//! auto/cross-correlation and SNR-controlled noise mixing.
//!
//! Correlations are normalized by the product of the segment L2 norms
//! (no mean removal), so every value lands on a fixed [-1, 1] scale and
//! the voicing threshold downstream is amplitude-free. Zero-energy
//! segments correlate to 0 by convention.

use crate::error::{Error, Result};
use crate::num::{dot, Scalar};

/// A mono waveform with its sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct Waveform<T> {
    samples: Vec<T>,
    sample_rate: u32,
}

impl<T: Scalar> Waveform<T> {
    /// Validates that the rate is positive and every sample is finite.
    pub fn new(samples: Vec<T>, sample_rate: u32) -> Result<Self> {
        if sample_rate == 0 {
            return Err(Error::Domain("sample_rate must be positive".into()));
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::Domain("waveform contains NaN or Inf".into()));
        }
        Ok(Self {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[T] {
        &self.samples
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_secs(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate as f64
    }

    /// Mean-square power over the whole extent.
    pub fn power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        let sum: f64 = self
            .samples
            .iter()
            .map(|s| {
                let v = s.to_f64_lossy();
                v * v
            })
            .sum();
        sum / self.samples.len() as f64
    }

    /// Convert the sample type, e.g. f64 synthesis output to f32 frames.
    pub fn convert<U: Scalar>(&self) -> Waveform<U> {
        Waveform {
            samples: self
                .samples
                .iter()
                .map(|s| U::from_f64(s.to_f64_lossy()))
                .collect(),
            sample_rate: self.sample_rate,
        }
    }
}

/// Ordered overlapping frames cut from a waveform.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameSequence<T> {
    frames: Vec<Vec<T>>,
    frame_len: usize,
    hop: usize,
    sample_rate: u32,
    start_offsets: Vec<usize>,
}

impl<T: Scalar> FrameSequence<T> {
    pub fn frames(&self) -> &[Vec<T>] {
        &self.frames
    }

    pub fn frame(&self, i: usize) -> &[T] {
        &self.frames[i]
    }

    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn sample_rate(&self) -> u32 {
        self.sample_rate
    }

    pub fn start_offsets(&self) -> &[usize] {
        &self.start_offsets
    }

    /// Center time of frame `i` in seconds.
    pub fn center_time(&self, i: usize) -> f64 {
        (self.start_offsets[i] as f64 + self.frame_len as f64 / 2.0) / self.sample_rate as f64
    }

    /// Remove `n_head` leading and `n_tail` trailing frames in place.
    pub fn truncate_edges(&mut self, n_head: usize, n_tail: usize) {
        let keep = self.frames.len().saturating_sub(n_head + n_tail);
        self.frames.drain(..n_head);
        self.frames.truncate(keep);
        self.start_offsets.drain(..n_head);
        self.start_offsets.truncate(keep);
    }
}

/// Number of full frames of `frame_len` at `hop` covering `len` samples.
pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if len < frame_len {
        0
    } else {
        (len - frame_len) / hop + 1
    }
}

/// Split a waveform into overlapping frames.
///
/// Frame `i` covers samples `[i*hop, i*hop + frame_len)`; trailing
/// samples that do not fill a frame are dropped.
pub fn frame_signal<T: Scalar>(
    w: &Waveform<T>,
    frame_len: usize,
    hop: usize,
) -> Result<FrameSequence<T>> {
    if frame_len == 0 {
        return Err(Error::Domain("frame_len must be >= 1".into()));
    }
    if hop == 0 || hop > frame_len {
        return Err(Error::Domain(format!(
            "hop must satisfy 1 <= hop <= frame_len, got hop={hop} frame_len={frame_len}"
        )));
    }
    if w.len() < frame_len {
        return Err(Error::EmptyInput(format!(
            "signal of {} samples is shorter than one frame ({frame_len})",
            w.len()
        )));
    }
    let n = frame_count(w.len(), frame_len, hop);
    let mut frames = Vec::with_capacity(n);
    let mut start_offsets = Vec::with_capacity(n);
    for i in 0..n {
        let start = i * hop;
        frames.push(w.samples()[start..start + frame_len].to_vec());
        start_offsets.push(start);
    }
    Ok(FrameSequence {
        frames,
        frame_len,
        hop,
        sample_rate: w.sample_rate(),
        start_offsets,
    })
}

/// Unit-amplitude cosine: `out[m] = cos(2*pi*f0*m/sample_rate + phase)`.
///
/// Arguments are evaluated in f64 before converting to the sample type.
pub fn synth_cosine<T: Scalar>(f0: f64, phase: f64, n: usize, sample_rate: u32) -> Result<Vec<T>> {
    check_f0_range(f0, sample_rate)?;
    if n == 0 {
        return Err(Error::Domain("sample count must be >= 1".into()));
    }
    let step = 2.0 * std::f64::consts::PI * f0 / sample_rate as f64;
    Ok((0..n)
        .map(|m| T::from_f64((step * m as f64 + phase).cos()))
        .collect())
}

pub(crate) fn check_f0_range(f0: f64, sample_rate: u32) -> Result<()> {
    let nyquist = sample_rate as f64 / 2.0;
    if !(f0 > 0.0 && f0 < nyquist) {
        return Err(Error::Domain(format!(
            "f0 = {f0} Hz outside (0, {nyquist}) at fs = {sample_rate}"
        )));
    }
    Ok(())
}

/// Normalized product of `x[0..len-lag)` and `x[lag..len)`.
///
/// Returns a value in [-1, 1]; either segment having zero energy yields 0.
pub fn normalized_autocorrelation<T: Scalar>(x: &[T], lag: usize) -> Result<T> {
    if lag == 0 || lag >= x.len() {
        return Err(Error::Domain(format!(
            "lag {lag} out of range [1, {})",
            x.len()
        )));
    }
    let head = &x[..x.len() - lag];
    let tail = &x[lag..];
    Ok(normalized_dot(head, tail))
}

/// Zero-lag normalized correlation of two equal-length vectors.
pub fn normalized_crosscorrelation<T: Scalar>(x: &[T], y: &[T]) -> Result<T> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!(
            "length mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Domain("need at least 2 samples".into()));
    }
    Ok(normalized_dot(x, y))
}

#[inline]
pub(crate) fn normalized_dot<T: Scalar>(x: &[T], y: &[T]) -> T {
    let num = dot(x, y);
    let ex = dot(x, x);
    let ey = dot(y, y);
    if ex == T::zero() || ey == T::zero() {
        return T::zero();
    }
    let r = num / (ex.sqrt() * ey.sqrt());
    // Rounding can push |r| a hair past 1 for near-identical segments.
    r.max(-T::one()).min(T::one())
}

/// Additively mix `noise` into `clean` so the result has the requested SNR.
///
/// Powers are mean-square over the full clean extent. The noise must be at
/// least as long as the clean signal; use [`mix_at_snr_tiled`] when it is
/// shorter or when a deterministic segment offset is wanted.
pub fn mix_at_snr<T: Scalar>(
    clean: &Waveform<T>,
    noise: &Waveform<T>,
    snr_db: f64,
) -> Result<Waveform<T>> {
    if noise.len() < clean.len() {
        return Err(Error::Dimension(format!(
            "noise ({} samples) shorter than clean ({} samples); tile explicitly",
            noise.len(),
            clean.len()
        )));
    }
    mix_segment(clean, &noise.samples()[..clean.len()], noise.sample_rate(), snr_db)
}

/// [`mix_at_snr`] with the noise read cyclically starting at `offset`.
pub fn mix_at_snr_tiled<T: Scalar>(
    clean: &Waveform<T>,
    noise: &Waveform<T>,
    snr_db: f64,
    offset: usize,
) -> Result<Waveform<T>> {
    if noise.is_empty() {
        return Err(Error::Degenerate("noise waveform is empty".into()));
    }
    let seg: Vec<T> = (0..clean.len())
        .map(|i| noise.samples()[(offset + i) % noise.len()])
        .collect();
    mix_segment(clean, &seg, noise.sample_rate(), snr_db)
}

fn mix_segment<T: Scalar>(
    clean: &Waveform<T>,
    noise_seg: &[T],
    noise_rate: u32,
    snr_db: f64,
) -> Result<Waveform<T>> {
    if clean.sample_rate() != noise_rate {
        return Err(Error::Domain(format!(
            "sample rate mismatch: clean {} vs noise {}",
            clean.sample_rate(),
            noise_rate
        )));
    }
    let p_clean = clean.power();
    let p_noise = {
        let sum: f64 = noise_seg
            .iter()
            .map(|s| {
                let v = s.to_f64_lossy();
                v * v
            })
            .sum();
        sum / noise_seg.len().max(1) as f64
    };
    if p_clean == 0.0 || p_noise == 0.0 {
        return Err(Error::Degenerate(
            "zero-power clean or noise input to SNR mixing".into(),
        ));
    }
    // 10*log10(p_clean / (g^2 * p_noise)) = snr_db
    let gain = (p_clean / (p_noise * 10f64.powf(snr_db / 10.0))).sqrt();
    let g = T::from_f64(gain);
    let samples = clean
        .samples()
        .iter()
        .zip(noise_seg.iter())
        .map(|(&c, &n)| c + g * n)
        .collect();
    Waveform::new(samples, clean.sample_rate())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tone(f0: f64, n: usize, fs: u32) -> Waveform<f64> {
        Waveform::new(synth_cosine(f0, 0.0, n, fs).unwrap(), fs).unwrap()
    }

    #[test]
    fn frame_counts_match_arithmetic() {
        // 16 kHz, 25 ms frames at 5 ms hop.
        let w = tone(200.0, 16_000, 16_000);
        let fs = frame_signal(&w, 400, 80).unwrap();
        assert_eq!(fs.frame_count(), (16_000 - 400) / 80 + 1);

        let w = tone(200.0, 400, 16_000);
        assert_eq!(frame_signal(&w, 400, 80).unwrap().frame_count(), 1);

        let w = tone(200.0, 560, 16_000);
        let fs = frame_signal(&w, 400, 80).unwrap();
        assert_eq!(fs.frame_count(), 3);
        assert_eq!(fs.start_offsets(), &[0, 80, 160]);
    }

    #[test]
    fn framing_is_lossless_slicing() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<f64> = (0..977).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let w = Waveform::new(samples.clone(), 16_000).unwrap();
        let fs = frame_signal(&w, 160, 37).unwrap();
        for (i, frame) in fs.frames().iter().enumerate() {
            let start = fs.start_offsets()[i];
            assert_eq!(&samples[start..start + 160], frame.as_slice());
        }
    }

    #[test]
    fn short_signal_is_an_error() {
        let w = tone(200.0, 399, 16_000);
        assert!(matches!(
            frame_signal(&w, 400, 80),
            Err(Error::EmptyInput(_))
        ));
    }

    #[test]
    fn cosine_synthesis_examples() {
        // 200 Hz over 400 samples at 16 kHz: exactly 5 periods.
        let x: Vec<f64> = synth_cosine(200.0, 0.0, 400, 16_000).unwrap();
        assert_eq!(x[0], 1.0);
        assert!((x[80] - 1.0).abs() < 1e-12); // one full period

        let flipped: Vec<f64> = synth_cosine(200.0, std::f64::consts::PI, 400, 16_000).unwrap();
        for (a, b) in x.iter().zip(&flipped) {
            assert!((a + b).abs() < 1e-12);
        }

        // 100 Hz over 160 samples: half period at m = 80.
        let y: Vec<f64> = synth_cosine(100.0, 0.0, 160, 16_000).unwrap();
        assert!((y[80] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn cosine_rejects_out_of_band_f0() {
        assert!(synth_cosine::<f64>(8000.0, 0.0, 16, 16_000).is_err());
        assert!(synth_cosine::<f64>(0.0, 0.0, 16, 16_000).is_err());
        assert!(synth_cosine::<f64>(-5.0, 0.0, 16, 16_000).is_err());
    }

    #[test]
    fn autocorrelation_at_period_is_near_one() {
        let w = tone(200.0, 400, 16_000);
        let r = normalized_autocorrelation(w.samples(), 80).unwrap();
        assert!(r >= 0.999, "r = {r}");
    }

    #[test]
    fn autocorrelation_bounds_and_lag_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x: Vec<f64> = (0..64).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let lag = rng.gen_range(1..64);
            let r = normalized_autocorrelation(&x, lag).unwrap();
            assert!((-1.0..=1.0).contains(&r));
        }
        let x = vec![0.5f64; 16];
        assert!(normalized_autocorrelation(&x, 0).is_err());
        assert!(normalized_autocorrelation(&x, 16).is_err());
    }

    #[test]
    fn white_noise_autocorrelation_is_small() {
        // Monte-Carlo oracle: |r| at lag 80 stays below 0.3 for nearly all
        // 400-sample white frames (0.3 is ~5.4 sigma for 320 terms).
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut hits = 0usize;
        for _ in 0..1000 {
            let x: Vec<f64> = (0..400).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let r = normalized_autocorrelation(&x, 80).unwrap();
            if r.abs() < 0.3 {
                hits += 1;
            }
        }
        assert!(hits >= 999, "only {hits}/1000 below 0.3");
    }

    #[test]
    fn crosscorrelation_examples() {
        let x: Vec<f64> = synth_cosine(200.0, 0.0, 400, 16_000).unwrap();
        assert_eq!(normalized_crosscorrelation(&x, &x).unwrap(), 1.0);

        let neg: Vec<f64> = x.iter().map(|v| -v).collect();
        assert_eq!(normalized_crosscorrelation(&x, &neg).unwrap(), -1.0);

        // Quadrature components are orthogonal over integer periods.
        let q: Vec<f64> =
            synth_cosine(200.0, std::f64::consts::FRAC_PI_2, 400, 16_000).unwrap();
        let r = normalized_crosscorrelation(&x, &q).unwrap();
        assert!(r.abs() < 0.01, "r = {r}");

        assert!(normalized_crosscorrelation(&x, &x[..399]).is_err());
    }

    #[test]
    fn correlation_scale_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x: Vec<f64> = (0..200).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let y: Vec<f64> = (0..200).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let base = normalized_crosscorrelation(&x, &y).unwrap();
        for scale in [0.01, 3.0, 1e4] {
            let xs: Vec<f64> = x.iter().map(|v| v * scale).collect();
            let r = normalized_crosscorrelation(&xs, &y).unwrap();
            assert!((r - base).abs() < 1e-9);
        }
        let a = normalized_autocorrelation(&x, 13).unwrap();
        let xs: Vec<f64> = x.iter().map(|v| v * 42.0).collect();
        assert!((normalized_autocorrelation(&xs, 13).unwrap() - a).abs() < 1e-9);
    }

    #[test]
    fn zero_energy_segments_correlate_to_zero() {
        let mut x = vec![0.0f64; 64];
        x[63] = 1.0; // head segment at lag 32 is all zero
        assert_eq!(normalized_autocorrelation(&x, 32).unwrap(), 0.0);
        let z = vec![0.0f64; 64];
        let y: Vec<f64> = (0..64).map(|i| (i as f64).cos()).collect();
        assert_eq!(normalized_crosscorrelation(&z, &y).unwrap(), 0.0);
    }

    fn measured_snr_db(mix: &Waveform<f64>, clean: &Waveform<f64>) -> f64 {
        let res: Vec<f64> = mix
            .samples()
            .iter()
            .zip(clean.samples())
            .map(|(m, c)| m - c)
            .collect();
        let p_res = res.iter().map(|v| v * v).sum::<f64>() / res.len() as f64;
        10.0 * (clean.power() / p_res).log10()
    }

    #[test]
    fn snr_mixing_hits_the_requested_ratio() {
        let clean = tone(150.0, 4000, 16_000);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let noise =
            Waveform::new((0..4000).map(|_| rng.gen_range(-1.0..1.0)).collect(), 16_000).unwrap();

        for snr in [-10.0, 0.0, 10.0] {
            let mix = mix_at_snr(&clean, &noise, snr).unwrap();
            assert!((measured_snr_db(&mix, &clean) - snr).abs() < 1e-6);
        }

        // 0 dB: scaled noise power equals clean power.
        let mix = mix_at_snr(&clean, &noise, 0.0).unwrap();
        let res_power = {
            let res: Vec<f64> = mix
                .samples()
                .iter()
                .zip(clean.samples())
                .map(|(m, c)| m - c)
                .collect();
            res.iter().map(|v| v * v).sum::<f64>() / res.len() as f64
        };
        assert!((res_power / clean.power() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn snr_gain_solves_the_power_equation() {
        // Unit-power clean, noise power 4, -10 dB: g^2 = 2.5.
        let n = 40_000;
        let clean = Waveform::new(
            (0..n)
                .map(|m| std::f64::consts::SQRT_2 * (0.05 * m as f64).sin())
                .collect(),
            16_000,
        )
        .unwrap();
        let noise = Waveform::new(
            (0..n)
                .map(|m| 2.0 * std::f64::consts::SQRT_2 * (0.173 * m as f64).cos())
                .collect(),
            16_000,
        )
        .unwrap();
        let p_c = clean.power();
        let p_n = noise.power();
        let mix = mix_at_snr(&clean, &noise, -10.0).unwrap();
        // Recover g from the first sample: mix = clean + g * noise.
        let g = (mix.samples()[0] - clean.samples()[0]) / noise.samples()[0];
        let expected = (p_c / (p_n * 0.1)).sqrt();
        assert!((g - expected).abs() < 1e-9);
        assert!((g * g * p_n / p_c - 10.0).abs() < 1e-6 * 10.0);
    }

    #[test]
    fn snr_mixing_rejects_degenerate_inputs() {
        let clean = tone(150.0, 400, 16_000);
        let zeros = Waveform::new(vec![0.0f64; 400], 16_000).unwrap();
        assert!(matches!(
            mix_at_snr(&clean, &zeros, 0.0),
            Err(Error::Degenerate(_))
        ));
        assert!(matches!(
            mix_at_snr(&zeros, &clean, 0.0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn tiled_mixing_wraps_the_noise() {
        let clean = tone(100.0, 1000, 16_000);
        let noise =
            Waveform::new((0..160).map(|m| ((m * 37 % 97) as f64 - 48.0) / 48.0).collect(), 16_000)
                .unwrap();
        let mix = mix_at_snr_tiled(&clean, &noise, 5.0, 42).unwrap();
        assert!((measured_snr_db(&mix, &clean) - 5.0).abs() < 1e-6);
    }
}
