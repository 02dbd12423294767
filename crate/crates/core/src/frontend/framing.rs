use crate::error::{Error, Result};

/// Overlapping analysis frames, stored row-major (one frame per row).
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    frame_len: usize,
    hop: usize,
    data: Vec<f64>,
}

impl FrameMatrix {
    pub fn num_frames(&self) -> usize {
        self.data.len() / self.frame_len
    }

    pub fn frame_len(&self) -> usize {
        self.frame_len
    }

    pub fn hop(&self) -> usize {
        self.hop
    }

    pub fn frame(&self, j: usize) -> &[f64] {
        &self.data[j * self.frame_len..(j + 1) * self.frame_len]
    }

    pub fn frames(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.frame_len)
    }
}

/// Number of whole frames; the trailing partial frame is dropped.
pub fn frame_count(len: usize, frame_len: usize, hop: usize) -> usize {
    if len < frame_len {
        0
    } else {
        (len - frame_len) / hop + 1
    }
}

/// Splits `samples` into frames of `frame_len` starting every `hop` samples.
pub fn frame_samples(samples: &[f64], frame_len: usize, hop: usize) -> Result<FrameMatrix> {
    if frame_len == 0 || hop == 0 {
        return Err(Error::config("frame length and hop must be at least one sample"));
    }
    if samples.len() < frame_len {
        return Err(Error::TooShort {
            len: samples.len(),
            frame: frame_len,
        });
    }
    let n = frame_count(samples.len(), frame_len, hop);
    let mut data = Vec::with_capacity(n * frame_len);
    for j in 0..n {
        data.extend_from_slice(&samples[j * hop..j * hop + frame_len]);
    }
    Ok(FrameMatrix { frame_len, hop, data })
}

/// Hamming window `0.54 - 0.46 cos(2 pi n / (L - 1))`.
pub fn hamming(len: usize) -> Vec<f64> {
    if len < 2 {
        return vec![1.0; len];
    }
    let denom = (len - 1) as f64;
    (0..len)
        .map(|n| 0.54 - 0.46 * (2.0 * std::f64::consts::PI * n as f64 / denom).cos())
        .collect()
}

pub fn apply_window(frame: &[f64]) -> Vec<f64> {
    frame.iter().zip(hamming(frame.len())).map(|(x, w)| x * w).collect()
}

/// `y[n] = x[n] - alpha x[n-1]`, with `y[0] = x[0]`.
pub fn pre_emphasis(samples: &[f64], alpha: f64) -> Vec<f64> {
    if alpha == 0.0 {
        return samples.to_vec();
    }
    let mut out = Vec::with_capacity(samples.len());
    let mut prev = 0.0;
    for &x in samples {
        out.push(x - alpha * prev);
        prev = x;
    }
    out
}
