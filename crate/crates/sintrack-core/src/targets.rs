//! Per-frame supervised regression targets.
//!
//! Voiced frames map to a unit-amplitude cosine at the ground-truth F0,
//! phase-aligned to the input frame; unvoiced and no-voice frames map to
//! the input frame itself (identity).
//!
//! Phase alignment is solved in closed form. Writing the candidate as
//! `cos(w*m + phi) = alpha*cos(w*m) + beta*sin(w*m)`, the correlation
//! between the frame and the candidate is scale-invariant in
//! `(alpha, beta)`, so the maximum over phases equals the maximum over
//! the whole 2-D span: `corr* = sqrt(a' G^-1 a) / ||x||` with
//! `a = (<x,cos>, <x,sin>)` and `G` the Gram matrix of the basis pair.
//! The tracker reuses the same fit for its voicing confidence.

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::signal::{check_f0_range, synth_cosine};

/// Ground-truth F0 per frame; 0 encodes unvoiced/no-voice.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthF0 {
    values: Vec<f64>,
    frame_len: usize,
    hop: usize,
    sample_rate: u32,
}

impl GroundTruthF0 {
    pub fn new(values: Vec<f64>, frame_len: usize, hop: usize, sample_rate: u32) -> Result<Self> {
        let nyquist = sample_rate as f64 / 2.0;
        for (i, &v) in values.iter().enumerate() {
            if v < 0.0 || !v.is_finite() {
                return Err(Error::Domain(format!("frame {i}: invalid f0 {v}")));
            }
            if v > 0.0 && v >= nyquist {
                return Err(Error::Domain(format!(
                    "frame {i}: f0 {v} Hz >= Nyquist ({nyquist})"
                )));
            }
        }
        Ok(Self {
            values,
            frame_len,
            hop,
            sample_rate,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn frame_count(&self) -> usize {
        self.values.len()
    }

    pub fn is_voiced(&self, i: usize) -> bool {
        self.values[i] > 0.0
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

    pub fn truncate_edges(&mut self, n_head: usize, n_tail: usize) {
        let keep = self.values.len().saturating_sub(n_head + n_tail);
        self.values.drain(..n_head);
        self.values.truncate(keep);
    }

    pub fn truncate_to(&mut self, frames: usize) {
        self.values.truncate(frames);
    }
}

/// Result of fitting a unit sinusoid of known frequency to a frame.
#[derive(Debug, Clone, Copy)]
pub struct PhaseFit {
    /// Phase in (-pi, pi] maximizing the correlation.
    pub phase: f64,
    /// The maximized normalized cross-correlation, in [0, 1].
    pub correlation: f64,
    /// Set when the frame has no energy (phase defaults to 0).
    pub degenerate: bool,
}

/// Phase of `cos(2*pi*f0*m/fs + phi)` maximizing the normalized
/// cross-correlation with `frame`.
pub fn align_phase<T: Scalar>(frame: &[T], f0: f64, sample_rate: u32) -> Result<PhaseFit> {
    if frame.is_empty() {
        return Err(Error::EmptyInput("empty frame".into()));
    }
    check_f0_range(f0, sample_rate)?;

    let w = 2.0 * std::f64::consts::PI * f0 / sample_rate as f64;
    let (mut xc, mut xs, mut cc, mut ss, mut cs, mut xx) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for (m, v) in frame.iter().enumerate() {
        let x = v.to_f64_lossy();
        let arg = w * m as f64;
        let (sin, cos) = arg.sin_cos();
        xc += x * cos;
        xs += x * sin;
        cc += cos * cos;
        ss += sin * sin;
        cs += cos * sin;
        xx += x * x;
    }

    if xx == 0.0 {
        return Ok(PhaseFit {
            phase: 0.0,
            correlation: 0.0,
            degenerate: true,
        });
    }

    let det = cc * ss - cs * cs;
    let (alpha, beta) = if det.abs() <= 1e-12 * cc.max(ss).max(1.0) {
        // Basis collapsed (f0 at the edge of the band over a very short
        // frame): fall back to the in-phase direction.
        (if cc > 0.0 { xc / cc } else { 0.0 }, 0.0)
    } else {
        ((ss * xc - cs * xs) / det, (cc * xs - cs * xc) / det)
    };

    let num = alpha * xc + beta * xs;
    let den = (alpha * alpha * cc + beta * beta * ss + 2.0 * alpha * beta * cs).sqrt() * xx.sqrt();
    let correlation = if den > 0.0 {
        (num / den).clamp(-1.0, 1.0).max(0.0)
    } else {
        0.0
    };

    // u = alpha*cos + beta*sin = A*cos(w*m + phi) with phi = atan2(-beta, alpha).
    let mut phase = (-beta).atan2(alpha);
    if phase <= -std::f64::consts::PI {
        phase = std::f64::consts::PI;
    }
    Ok(PhaseFit {
        phase,
        correlation,
        degenerate: false,
    })
}

/// A per-frame regression target.
#[derive(Debug, Clone, PartialEq)]
pub enum SinusoidTarget<T> {
    /// Unit-amplitude cosine at the ground-truth F0, phase-aligned.
    Voiced {
        f0: f64,
        phase: f64,
        samples: Vec<T>,
    },
    /// The input frame itself.
    Identity { samples: Vec<T> },
}

impl<T: Scalar> SinusoidTarget<T> {
    pub fn samples(&self) -> &[T] {
        match self {
            SinusoidTarget::Voiced { samples, .. } => samples,
            SinusoidTarget::Identity { samples } => samples,
        }
    }

    pub fn is_voiced(&self) -> bool {
        matches!(self, SinusoidTarget::Voiced { .. })
    }
}

/// Build the supervision target for one frame. `f0 = 0` marks an
/// unvoiced/no-voice frame and yields the identity target.
pub fn build_target<T: Scalar>(frame: &[T], f0: f64, sample_rate: u32) -> Result<SinusoidTarget<T>> {
    if f0 == 0.0 {
        return Ok(SinusoidTarget::Identity {
            samples: frame.to_vec(),
        });
    }
    check_f0_range(f0, sample_rate)?;
    let fit = align_phase(frame, f0, sample_rate)?;
    let samples = synth_cosine(f0, fit.phase, frame.len(), sample_rate)?;
    Ok(SinusoidTarget::Voiced {
        f0,
        phase: fit.phase,
        samples,
    })
}
