//! RIFF/WAVE decoding for mono integer PCM, plus a 16-bit encoder.

use super::Utterance;
use crate::error::{Error, Result};

const FORMAT_PCM: u16 = 1;
const FORMAT_EXTENSIBLE: u16 = 0xFFFE;

fn malformed(chunk: &'static str, reason: impl Into<String>) -> Error {
    Error::WavParse {
        chunk,
        reason: reason.into(),
    }
}

fn u16_at(b: &[u8], at: usize) -> u16 {
    u16::from_le_bytes([b[at], b[at + 1]])
}

fn u32_at(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes([b[at], b[at + 1], b[at + 2], b[at + 3]])
}

struct Format {
    channels: u16,
    sample_rate: u32,
    bits: u16,
}

fn parse_fmt(body: &[u8]) -> Result<Format> {
    if body.len() < 16 {
        return Err(malformed("fmt ", format!("{} bytes, need at least 16", body.len())));
    }
    let tag = u16_at(body, 0);
    let channels = u16_at(body, 2);
    let sample_rate = u32_at(body, 4);
    let block_align = u16_at(body, 12);
    let bits = u16_at(body, 14);

    let pcm = match tag {
        FORMAT_PCM => true,
        // WAVE_FORMAT_EXTENSIBLE: sub-format GUID starts with the format tag.
        FORMAT_EXTENSIBLE if body.len() >= 26 => u16_at(body, 24) == FORMAT_PCM,
        FORMAT_EXTENSIBLE => return Err(malformed("fmt ", "truncated extensible header")),
        _ => false,
    };
    if !pcm {
        return Err(Error::UnsupportedFormat(format!("format tag {tag:#06x} is not integer PCM")));
    }
    if channels != 1 {
        return Err(Error::UnsupportedFormat(format!("{channels} channels, only mono is supported")));
    }
    if !matches!(bits, 8 | 16 | 24 | 32) {
        return Err(Error::UnsupportedFormat(format!("{bits}-bit samples")));
    }
    if sample_rate == 0 {
        return Err(malformed("fmt ", "sample rate is zero"));
    }
    if block_align != bits / 8 {
        return Err(malformed("fmt ", format!("block align {block_align} for {bits}-bit mono")));
    }
    Ok(Format {
        channels,
        sample_rate,
        bits,
    })
}

fn decode_samples(data: &[u8], bits: u16) -> Vec<f64> {
    let width = usize::from(bits / 8);
    let scale = f64::from(bits - 1).exp2();
    data.chunks_exact(width)
        .map(|s| {
            let v: i32 = match bits {
                8 => i32::from(s[0]) - 128,
                16 => i32::from(i16::from_le_bytes([s[0], s[1]])),
                24 => i32::from_le_bytes([0, s[0], s[1], s[2]]) >> 8,
                _ => i32::from_le_bytes([s[0], s[1], s[2], s[3]]),
            };
            f64::from(v) / scale
        })
        .collect()
}

/// Decodes a mono integer-PCM WAV file. Samples are divided by
/// `2^(bits-1)`, so 16-bit data maps exactly onto `[-1, 1)`.
pub fn parse_wav(bytes: &[u8], source_id: &str) -> Result<Utterance> {
    if bytes.len() < 12 {
        return Err(malformed("RIFF", "file shorter than the 12-byte RIFF header"));
    }
    if &bytes[0..4] != b"RIFF" {
        return Err(malformed("RIFF", "missing 'RIFF' magic"));
    }
    if &bytes[8..12] != b"WAVE" {
        return Err(malformed("RIFF", "form type is not 'WAVE'"));
    }

    let mut format = None;
    let mut data = None;
    let mut pos = 12;
    while pos + 8 <= bytes.len() {
        let id = &bytes[pos..pos + 4];
        let size = u32_at(bytes, pos + 4) as usize;
        let body_start = pos + 8;
        let body_end = body_start.checked_add(size).filter(|&e| e <= bytes.len());
        match id {
            b"fmt " => {
                let end = body_end.ok_or_else(|| malformed("fmt ", "chunk runs past end of file"))?;
                format = Some(parse_fmt(&bytes[body_start..end])?);
            }
            b"data" => {
                // Some writers leave the data size unpatched; clamp to the file.
                let end = body_end.unwrap_or(bytes.len());
                data = Some(&bytes[body_start..end]);
            }
            _ => {}
        }
        if data.is_some() && format.is_some() {
            break;
        }
        pos = body_start.saturating_add(size).saturating_add(size & 1);
    }

    let format = format.ok_or_else(|| malformed("fmt ", "no fmt chunk found"))?;
    let data = data.ok_or_else(|| malformed("data", "no data chunk found"))?;
    debug_assert_eq!(format.channels, 1);
    let width = usize::from(format.bits / 8);
    if data.len() % width != 0 {
        return Err(malformed("data", format!("{} bytes is not a whole number of samples", data.len())));
    }
    let samples = decode_samples(data, format.bits);
    if samples.is_empty() {
        return Err(malformed("data", "no samples"));
    }
    Utterance::new(samples, format.sample_rate, source_id)
}

/// Rounds `[-1, 1)` amplitudes to 16-bit PCM values, saturating at the rails.
pub fn to_pcm16(samples: &[f64]) -> Vec<i16> {
    samples
        .iter()
        .map(|&s| (s * 32768.0).round().clamp(-32768.0, 32767.0) as i16)
        .collect()
}

/// Encodes 16-bit mono PCM as a canonical 44-byte-header WAV file.
pub fn encode_wav_i16(samples: &[i16], sample_rate_hz: u32) -> Vec<u8> {
    let data_len = (samples.len() * 2) as u32;
    let mut out = Vec::with_capacity(44 + samples.len() * 2);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(36 + data_len).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&FORMAT_PCM.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&sample_rate_hz.to_le_bytes());
    out.extend_from_slice(&(sample_rate_hz * 2).to_le_bytes());
    out.extend_from_slice(&2u16.to_le_bytes());
    out.extend_from_slice(&16u16.to_le_bytes());
    out.extend_from_slice(b"data");
    out.extend_from_slice(&data_len.to_le_bytes());
    for s in samples {
        out.extend_from_slice(&s.to_le_bytes());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn header(tag: u16, channels: u16, rate: u32, bits: u16, data: &[u8]) -> Vec<u8> {
        let align = channels * bits / 8;
        let mut out = Vec::new();
        out.extend_from_slice(b"RIFF");
        out.extend_from_slice(&(36 + data.len() as u32).to_le_bytes());
        out.extend_from_slice(b"WAVEfmt ");
        out.extend_from_slice(&16u32.to_le_bytes());
        out.extend_from_slice(&tag.to_le_bytes());
        out.extend_from_slice(&channels.to_le_bytes());
        out.extend_from_slice(&rate.to_le_bytes());
        out.extend_from_slice(&(rate * u32::from(align)).to_le_bytes());
        out.extend_from_slice(&align.to_le_bytes());
        out.extend_from_slice(&bits.to_le_bytes());
        out.extend_from_slice(b"data");
        out.extend_from_slice(&(data.len() as u32).to_le_bytes());
        out.extend_from_slice(data);
        out
    }

    #[test]
    fn reads_48k_16bit_mono() {
        let bytes = encode_wav_i16(&[0i16; 480], 48_000);
        let u = parse_wav(&bytes, "t").unwrap();
        assert_eq!(u.sample_rate_hz(), 48_000);
        assert_eq!(u.len(), 480);
    }

    #[test]
    fn normalizes_by_two_to_the_fifteen() {
        let u = parse_wav(&encode_wav_i16(&[-32768, 16384, 0, 32767], 8000), "t").unwrap();
        assert_eq!(u.samples()[0], -1.0);
        assert_eq!(u.samples()[1], 0.5);
        assert_eq!(u.samples()[2], 0.0);
        assert_eq!(u.samples()[3], 32767.0 / 32768.0);
    }

    #[test]
    fn stereo_is_unsupported() {
        let bytes = header(1, 2, 48_000, 16, &[0; 8]);
        assert!(matches!(parse_wav(&bytes, "t"), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn float_encoding_is_unsupported() {
        let bytes = header(3, 1, 48_000, 32, &[0; 8]);
        assert!(matches!(parse_wav(&bytes, "t"), Err(Error::UnsupportedFormat(_))));
    }

    #[test]
    fn malformed_headers_name_the_chunk() {
        match parse_wav(b"RIFX\0\0\0\0WAVE", "t") {
            Err(Error::WavParse { chunk, .. }) => assert_eq!(chunk, "RIFF"),
            other => panic!("unexpected {other:?}"),
        }
        let mut bytes = encode_wav_i16(&[1, 2], 8000);
        bytes.truncate(20);
        match parse_wav(&bytes, "t") {
            Err(Error::WavParse { chunk, .. }) => assert_eq!(chunk, "fmt "),
            other => panic!("unexpected {other:?}"),
        }
        let bytes = header(1, 1, 8000, 16, &[0; 8]);
        let no_data = &bytes[..36];
        match parse_wav(no_data, "t") {
            Err(Error::WavParse { chunk, .. }) => assert_eq!(chunk, "data"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn other_bit_depths_normalize() {
        let u8s = parse_wav(&header(1, 1, 8000, 8, &[0, 128, 192]), "t").unwrap();
        assert_eq!(u8s.samples(), &[-1.0, 0.0, 0.5]);

        // 24-bit: -2^23 and 2^22
        let u24 = parse_wav(&header(1, 1, 8000, 24, &[0, 0, 0x80, 0, 0, 0x40]), "t").unwrap();
        assert_eq!(u24.samples(), &[-1.0, 0.5]);

        let v: i32 = 1 << 30;
        let u32s = parse_wav(&header(1, 1, 8000, 32, &v.to_le_bytes()), "t").unwrap();
        assert_eq!(u32s.samples(), &[0.5]);
    }

    #[test]
    fn skips_unknown_chunks() {
        let mut bytes = b"RIFF\0\0\0\0WAVE".to_vec();
        bytes.extend_from_slice(b"LIST");
        bytes.extend_from_slice(&3u32.to_le_bytes());
        bytes.extend_from_slice(&[1, 2, 3, 0]); // odd size + pad byte
        let wav = encode_wav_i16(&[100, -100], 16_000);
        bytes.extend_from_slice(&wav[12..]);
        let u = parse_wav(&bytes, "t").unwrap();
        assert_eq!(u.len(), 2);
        assert_eq!(u.sample_rate_hz(), 16_000);
    }

    proptest! {
        #[test]
        fn pcm16_round_trip_is_identity(values in prop::collection::vec(any::<i16>(), 1..512), rate in 1u32..200_000) {
            let u = parse_wav(&encode_wav_i16(&values, rate), "p").unwrap();
            prop_assert_eq!(u.sample_rate_hz(), rate);
            prop_assert_eq!(to_pcm16(u.samples()), values);
        }
    }
}
