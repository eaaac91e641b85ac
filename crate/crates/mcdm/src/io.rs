//! Result emission (CSV / JSON-lines) and raw I/Q file interop.
//!
//! Results: fixed column set
//! `system,scheme,snr_db,bits_sent,bit_errors,ber,packets,seed`; the BER is
//! printed in scientific notation with seven significant digits and, being
//! defined as `bit_errors / bits_sent`, is recomputed on read so round trips
//! are exact. Writes are append-safe.
//!
//! I/Q: raw interleaved little-endian `f32` I,Q pairs with no header (the
//! common SDR capture format), plus a plain-text `<path>.meta` sidecar
//! carrying `sample_rate_hz` and optionally `center_freq_hz`.

use std::fs::OpenOptions;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::sweep::BerRecord;
use crate::tx::BasebandSignal;

/// Output format for sweep results.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResultFormat {
    Csv,
    Jsonl,
}

impl FromStr for ResultFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ResultFormat::Csv),
            "jsonl" | "json" => Ok(ResultFormat::Jsonl),
            other => Err(Error::InvalidConfig(format!("unknown format `{other}`"))),
        }
    }
}

pub const CSV_HEADER: &str = "system,scheme,snr_db,bits_sent,bit_errors,ber,packets,seed";

/// One CSV row (no newline).
pub fn csv_row(r: &BerRecord) -> String {
    format!(
        "{},{},{},{},{},{:.6e},{},{}",
        r.system, r.scheme, r.snr_db, r.bits_sent, r.bit_errors, r.ber, r.packets, r.seed
    )
}

fn jsonl_row(r: &BerRecord) -> String {
    format!(
        r#"{{"system":"{}","scheme":"{}","snr_db":{},"bits_sent":{},"bit_errors":{},"ber":{:.6e},"packets":{},"seed":{}}}"#,
        r.system, r.scheme, r.snr_db, r.bits_sent, r.bit_errors, r.ber, r.packets, r.seed
    )
}

/// Appends records to `path`, creating it (with a CSV header) if needed.
pub fn write_results<P: AsRef<Path>>(
    path: P,
    records: &[BerRecord],
    format: ResultFormat,
) -> Result<()> {
    let file = OpenOptions::new()
        .create(true)
        .append(true)
        .open(path.as_ref())?;
    let needs_header = format == ResultFormat::Csv && file.metadata()?.len() == 0;
    let mut w = BufWriter::new(file);
    if needs_header {
        writeln!(w, "{CSV_HEADER}")?;
    }
    for r in records {
        match format {
            ResultFormat::Csv => writeln!(w, "{}", csv_row(r))?,
            ResultFormat::Jsonl => writeln!(w, "{}", jsonl_row(r))?,
        }
    }
    w.flush()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn rebuild_record(
    system: &str,
    scheme: &str,
    snr_db: f64,
    bits_sent: u64,
    bit_errors: u64,
    ber: f64,
    packets: u64,
    seed: u64,
) -> Result<BerRecord> {
    Ok(BerRecord {
        system: system.parse()?,
        scheme: scheme.parse()?,
        snr_db,
        bits_sent,
        bit_errors,
        // ber is derived; recomputing makes the round trip exact
        ber: if bits_sent > 0 {
            bit_errors as f64 / bits_sent as f64
        } else {
            ber
        },
        packets,
        wall_time_s: 0.0,
        seed,
    })
}

/// Reads a CSV result file back into records (`wall_time_s` is not stored).
pub fn read_results_csv<P: AsRef<Path>>(path: P) -> Result<Vec<BerRecord>> {
    let reader = BufReader::new(std::fs::File::open(path.as_ref())?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed == CSV_HEADER {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 8 {
            return Err(Error::InvalidConfig(format!(
                "result line {} has {} fields, expected 8",
                i + 1,
                fields.len()
            )));
        }
        let parse_err = |what: &str| Error::InvalidConfig(format!("bad {what} on line {}", i + 1));
        out.push(rebuild_record(
            fields[0],
            fields[1],
            fields[2].parse().map_err(|_| parse_err("snr_db"))?,
            fields[3].parse().map_err(|_| parse_err("bits_sent"))?,
            fields[4].parse().map_err(|_| parse_err("bit_errors"))?,
            fields[5].parse().map_err(|_| parse_err("ber"))?,
            fields[6].parse().map_err(|_| parse_err("packets"))?,
            fields[7].parse().map_err(|_| parse_err("seed"))?,
        )?);
    }
    Ok(out)
}

/// Reads a JSON-lines result file back into records.
pub fn read_results_jsonl<P: AsRef<Path>>(path: P) -> Result<Vec<BerRecord>> {
    let reader = BufReader::new(std::fs::File::open(path.as_ref())?);
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let v: serde_json::Value = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidConfig(format!("bad JSON on line {}: {e}", i + 1)))?;
        let s =
            |k: &str| -> Result<String> {
                Ok(v.get(k)
                    .and_then(|x| x.as_str())
                    .ok_or_else(|| {
                        Error::InvalidConfig(format!("missing `{k}` on line {}", i + 1))
                    })?
                    .to_string())
            };
        let n = |k: &str| -> Result<f64> {
            v.get(k).and_then(|x| x.as_f64()).ok_or_else(|| {
                Error::InvalidConfig(format!("missing `{k}` on line {}", i + 1))
            })
        };
        out.push(rebuild_record(
            &s("system")?,
            &s("scheme")?,
            n("snr_db")?,
            n("bits_sent")? as u64,
            n("bit_errors")? as u64,
            n("ber")?,
            n("packets")? as u64,
            n("seed")? as u64,
        )?);
    }
    Ok(out)
}

/// Sidecar metadata carried next to a raw I/Q file.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IqMeta {
    pub sample_rate_hz: Option<f64>,
    pub center_freq_hz: Option<f64>,
}

fn meta_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_os_string();
    s.push(".meta");
    s.into()
}

/// Writes raw interleaved little-endian f32 I,Q pairs plus the sidecar.
pub fn write_iq<T: Scalar, P: AsRef<Path>>(
    path: P,
    signal: &BasebandSignal<T>,
    center_freq_hz: Option<f64>,
) -> Result<()> {
    let path = path.as_ref();
    let mut w = BufWriter::new(std::fs::File::create(path)?);
    for s in signal.samples() {
        w.write_all(&(s.re.to_f32().unwrap_or(f32::NAN)).to_le_bytes())?;
        w.write_all(&(s.im.to_f32().unwrap_or(f32::NAN)).to_le_bytes())?;
    }
    w.flush()?;

    let mut meta = format!(
        "sample_rate_hz={}\n",
        signal.sample_rate().to_f64().unwrap_or(0.0)
    );
    if let Some(fc) = center_freq_hz {
        meta.push_str(&format!("center_freq_hz={fc}\n"));
    }
    std::fs::write(meta_path(path), meta)?;
    Ok(())
}

/// Reads a raw I/Q file and its sidecar (the sidecar may be absent).
pub fn read_iq<T: Scalar, P: AsRef<Path>>(path: P) -> Result<(Vec<Complex<T>>, IqMeta)> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    std::fs::File::open(path)?.read_to_end(&mut bytes)?;
    let corrupt = |reason: &str| Error::CorruptIq {
        path: path.display().to_string(),
        reason: reason.to_string(),
    };
    if bytes.len() % 8 != 0 {
        return Err(corrupt(&format!(
            "{} bytes is not a whole number of f32 I,Q pairs",
            bytes.len()
        )));
    }
    let mut samples = Vec::with_capacity(bytes.len() / 8);
    for pair in bytes.chunks_exact(8) {
        let re = f32::from_le_bytes(pair[0..4].try_into().unwrap());
        let im = f32::from_le_bytes(pair[4..8].try_into().unwrap());
        if !re.is_finite() || !im.is_finite() {
            return Err(corrupt("non-finite sample"));
        }
        samples.push(Complex::new(
            T::from_f32(re).unwrap(),
            T::from_f32(im).unwrap(),
        ));
    }

    let mut meta = IqMeta::default();
    if let Ok(text) = std::fs::read_to_string(meta_path(path)) {
        for line in text.lines() {
            if let Some((k, v)) = line.split_once('=') {
                match k.trim() {
                    "sample_rate_hz" => meta.sample_rate_hz = v.trim().parse().ok(),
                    "center_freq_hz" => meta.center_freq_hz = v.trim().parse().ok(),
                    _ => {}
                }
            }
        }
    }
    Ok((samples, meta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modulation::ModulationScheme;
    use crate::sweep::System;
    use num_complex::Complex64;

    fn sample_records() -> Vec<BerRecord> {
        vec![
            BerRecord {
                system: System::Mcdm,
                scheme: ModulationScheme::Bpsk,
                snr_db: 8.0,
                bits_sent: 1_000_000,
                bit_errors: 191,
                ber: 191.0 / 1_000_000.0,
                packets: 176,
                wall_time_s: 1.25,
                seed: 42,
            },
            BerRecord {
                system: System::Ofdm,
                scheme: ModulationScheme::Qam32,
                snr_db: 12.5,
                bits_sent: 256_320,
                bit_errors: 0,
                ber: 0.0,
                packets: 9,
                wall_time_s: 0.5,
                seed: 42,
            },
        ]
    }

    fn records_equal_ignoring_time(a: &BerRecord, b: &BerRecord) -> bool {
        (a.system, a.scheme, a.snr_db, a.bits_sent, a.bit_errors, a.packets, a.seed)
            == (b.system, b.scheme, b.snr_db, b.bits_sent, b.bit_errors, b.packets, b.seed)
            && a.ber == b.ber
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let records = sample_records();
        write_results(&path, &records, ResultFormat::Csv).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with(CSV_HEADER));
        // ber printed with 7 significant digits
        assert!(text.contains("1.910000e-4"), "{text}");
        let back = read_results_csv(&path).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in records.iter().zip(&back) {
            assert!(records_equal_ignoring_time(a, b));
        }
    }

    #[test]
    fn csv_append_keeps_single_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.csv");
        let records = sample_records();
        write_results(&path, &records[..1], ResultFormat::Csv).unwrap();
        write_results(&path, &records[1..], ResultFormat::Csv).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.matches(CSV_HEADER).count(), 1);
        assert_eq!(read_results_csv(&path).unwrap().len(), 2);
    }

    #[test]
    fn empty_write_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.csv");
        write_results(&path, &[], ResultFormat::Csv).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.trim(), CSV_HEADER);
        assert!(read_results_csv(&path).unwrap().is_empty());
    }

    #[test]
    fn jsonl_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.jsonl");
        let records = sample_records();
        write_results(&path, &records, ResultFormat::Jsonl).unwrap();
        let back = read_results_jsonl(&path).unwrap();
        assert_eq!(back.len(), 2);
        for (a, b) in records.iter().zip(&back) {
            assert!(records_equal_ignoring_time(a, b));
        }
    }

    #[test]
    fn iq_round_trip_and_sizes() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("sig.iq");
        let samples = vec![
            Complex64::new(0.25, -1.5),
            Complex64::new(0.5, 0.75),
            Complex64::new(-0.125, 0.0),
            Complex64::new(2.0, -2.0),
        ];
        let sig = BasebandSignal::new(samples.clone(), 499_712.0);
        write_iq(&path, &sig, Some(2.42e9)).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 32);

        let (back, meta) = read_iq::<f64, _>(&path).unwrap();
        assert_eq!(back.len(), 4);
        for (a, e) in back.iter().zip(&samples) {
            // exact: these values are f32-representable
            assert_eq!(a, e);
        }
        assert_eq!(meta.sample_rate_hz, Some(499_712.0));
        assert_eq!(meta.center_freq_hz, Some(2.42e9));
    }

    #[test]
    fn empty_signal_writes_empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("empty.iq");
        let sig = BasebandSignal::<f64>::new(vec![], 1000.0);
        write_iq(&path, &sig, None).unwrap();
        assert_eq!(std::fs::metadata(&path).unwrap().len(), 0);
        let (back, meta) = read_iq::<f64, _>(&path).unwrap();
        assert!(back.is_empty());
        assert_eq!(meta.sample_rate_hz, Some(1000.0));
        assert_eq!(meta.center_freq_hz, None);
    }

    #[test]
    fn truncated_file_is_corrupt() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.iq");
        std::fs::write(&path, [0u8; 12]).unwrap(); // 3 floats: odd count
        assert!(matches!(
            read_iq::<f64, _>(&path),
            Err(Error::CorruptIq { .. })
        ));
    }

    #[test]
    fn f32_quantisation_bound() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("quant.iq");
        let samples: Vec<Complex64> = (0..100)
            .map(|i| Complex64::new((i as f64 * 0.7133).sin(), (i as f64 * 0.311).cos()))
            .collect();
        write_iq(&path, &BasebandSignal::new(samples.clone(), 1.0), None).unwrap();
        let (back, _) = read_iq::<f64, _>(&path).unwrap();
        for (a, e) in back.iter().zip(&samples) {
            assert!((a - e).norm() < 1e-7); // f32 has ~7 decimal digits
        }
    }
}
