//! `mcdm` — multicarrier chirp modem CLI.
//!
//! Subcommands: `sweep` (Monte-Carlo BER study), `tx` (modulate a payload
//! file to raw I/Q), `rx` (demodulate raw I/Q), `basis` (orthogonality and
//! leakage report), `rates` (effective bit rates).

use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};

use mcdm::io::{read_iq, write_iq, write_results, ResultFormat};
use mcdm::modulation::ModulationScheme;
use mcdm::rx::receive_packet;
use mcdm::sweep::{report_rates, run_ber_sweep, BerRecord};
use mcdm::tx::{build_packet, BasebandSignal};
use mcdm::SweepConfig;

#[derive(Parser)]
#[command(name = "mcdm", version, about = "Multicarrier chirp-division multiplexing modem")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a Monte-Carlo BER sweep and write the results.
    Sweep {
        /// Config file path, or a preset name (sim-2017, exp-2017).
        config: String,
        /// Output file.
        #[arg(short, long)]
        output: PathBuf,
        /// Output format: csv or jsonl.
        #[arg(long, default_value = "csv")]
        format: String,
        /// Print ASCII BER curves after the sweep.
        #[arg(long)]
        ascii: bool,
    },
    /// Modulate a payload file into a raw I/Q capture.
    Tx {
        config: String,
        /// Payload bytes to transmit.
        payload: PathBuf,
        /// Output I/Q file (interleaved f32 LE pairs; writes a .meta sidecar).
        #[arg(short, long)]
        output: PathBuf,
        /// Modulation override (defaults to the first scheme in the config).
        #[arg(long)]
        scheme: Option<String>,
        /// Optional carrier frequency recorded in the sidecar, Hz.
        #[arg(long)]
        center_freq: Option<f64>,
    },
    /// Demodulate a raw I/Q capture and decode every packet in it.
    Rx {
        config: String,
        /// Input I/Q file.
        iq: PathBuf,
        /// Reference payload for bit-error accounting.
        #[arg(long = "ref")]
        reference: Option<PathBuf>,
        /// Write decoded payload bytes here.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Modulation override (defaults to the first scheme in the config).
        #[arg(long)]
        scheme: Option<String>,
        /// Include the per-symbol channel estimates in the diagnostics.
        #[arg(long)]
        dump_channel: bool,
    },
    /// Report basis orthogonality and delayed-chirp leakage.
    Basis {
        config: String,
    },
    /// Report effective payload bit rates per scheme.
    Rates {
        config: String,
    },
}

fn main() -> anyhow::Result<()> {
    match Cli::parse().command {
        Command::Sweep {
            config,
            output,
            format,
            ascii,
        } => cmd_sweep(&config, &output, &format, ascii),
        Command::Tx {
            config,
            payload,
            output,
            scheme,
            center_freq,
        } => cmd_tx(&config, &payload, &output, scheme.as_deref(), center_freq),
        Command::Rx {
            config,
            iq,
            reference,
            output,
            scheme,
            dump_channel,
        } => cmd_rx(
            &config,
            &iq,
            reference.as_deref(),
            output.as_deref(),
            scheme.as_deref(),
            dump_channel,
        ),
        Command::Basis { config } => cmd_basis(&config),
        Command::Rates { config } => cmd_rates(&config),
    }
}

fn load_config(path: &str) -> anyhow::Result<SweepConfig> {
    let cfg = SweepConfig::load(path).with_context(|| format!("loading config `{path}`"))?;
    for w in cfg.validate()? {
        eprintln!("warning: {w}");
    }
    Ok(cfg)
}

fn pick_scheme(cfg: &SweepConfig, flag: Option<&str>) -> anyhow::Result<ModulationScheme> {
    match flag {
        Some(s) => Ok(s.parse()?),
        None => cfg
            .schemes
            .first()
            .copied()
            .ok_or_else(|| anyhow::anyhow!("config lists no schemes")),
    }
}

fn cmd_sweep(config: &str, output: &PathBuf, format: &str, ascii: bool) -> anyhow::Result<()> {
    let cfg = load_config(config)?;
    let format: ResultFormat = format.parse()?;
    let records = run_ber_sweep(&cfg)?;
    write_results(output, &records, format)?;
    println!(
        "{} cells -> {} ({} packets, {} bits)",
        records.len(),
        output.display(),
        records.iter().map(|r| r.packets).sum::<u64>(),
        records.iter().map(|r| r.bits_sent).sum::<u64>(),
    );
    if ascii {
        print_ascii_curves(&records);
    }
    Ok(())
}

/// Rough log-scale BER curves: one row per SNR point, one curve per
/// (system, scheme), bar length proportional to -log10(BER).
fn print_ascii_curves(records: &[BerRecord]) {
    let mut curves: Vec<(String, Vec<&BerRecord>)> = Vec::new();
    for r in records {
        let key = format!("{}/{}", r.system, r.scheme);
        match curves.iter_mut().find(|(k, _)| *k == key) {
            Some((_, v)) => v.push(r),
            None => curves.push((key, vec![r])),
        }
    }
    for (key, mut points) in curves {
        points.sort_by(|a, b| a.snr_db.total_cmp(&b.snr_db));
        println!("\n{key}  (each # is one decade of BER)");
        for p in points {
            let bar = if p.ber > 0.0 {
                "#".repeat((-p.ber.log10()).clamp(0.0, 12.0).round() as usize)
            } else {
                "#".repeat(12) + " (no errors)"
            };
            println!("  {:>6.1} dB  {:<10.3e}  {bar}", p.snr_db, p.ber);
        }
    }
}

fn bytes_to_bits(bytes: &[u8]) -> Vec<u8> {
    let mut bits = Vec::with_capacity(bytes.len() * 8);
    for b in bytes {
        for i in (0..8).rev() {
            bits.push((b >> i) & 1);
        }
    }
    bits
}

fn bits_to_bytes(bits: &[u8]) -> Vec<u8> {
    bits.chunks_exact(8)
        .map(|c| c.iter().fold(0u8, |acc, &b| (acc << 1) | (b & 1)))
        .collect()
}

fn cmd_tx(
    config: &str,
    payload: &PathBuf,
    output: &PathBuf,
    scheme: Option<&str>,
    center_freq: Option<f64>,
) -> anyhow::Result<()> {
    let cfg = load_config(config)?;
    let scheme = pick_scheme(&cfg, scheme)?;
    let spec = cfg.packet_spec(scheme)?;
    let basis = cfg.basis(mcdm::System::Mcdm)?;

    let bytes = std::fs::read(payload).with_context(|| format!("reading {}", payload.display()))?;
    let mut bits = bytes_to_bits(&bytes);
    if bits.is_empty() {
        bail!("payload file is empty");
    }
    let per_packet = spec.payload_bits();
    let padding = (per_packet - bits.len() % per_packet) % per_packet;
    if padding > 0 {
        eprintln!("note: padding payload with {padding} zero bits to fill the last packet");
        bits.resize(bits.len() + padding, 0);
    }

    let mut samples = Vec::new();
    let n_packets = bits.len() / per_packet;
    for chunk in bits.chunks_exact(per_packet) {
        samples.extend_from_slice(build_packet(chunk, &spec, &basis, cfg.amplitude)?.samples());
    }
    let signal = BasebandSignal::new(samples, cfg.sample_rate());
    write_iq(output, &signal, center_freq)?;
    println!(
        "{n_packets} packet(s), {} samples ({:.3} ms) at {} Hz -> {}",
        signal.len(),
        signal.len() as f64 / cfg.sample_rate() * 1e3,
        cfg.sample_rate(),
        output.display()
    );
    Ok(())
}

fn cmd_rx(
    config: &str,
    iq: &PathBuf,
    reference: Option<&std::path::Path>,
    output: Option<&std::path::Path>,
    scheme: Option<&str>,
    dump_channel: bool,
) -> anyhow::Result<()> {
    let cfg = load_config(config)?;
    let scheme = pick_scheme(&cfg, scheme)?;
    let spec = cfg.packet_spec(scheme)?;
    let basis = cfg.basis(mcdm::System::Mcdm)?;
    let opts = mcdm::RxOptions {
        collect_channel_estimates: dump_channel,
        ..cfg.rx_options()
    };

    let (samples, meta) = read_iq::<f64, _>(iq)?;
    if let Some(fs) = meta.sample_rate_hz {
        if (fs - cfg.sample_rate()).abs() > 1e-6 {
            eprintln!(
                "warning: capture sample rate {fs} Hz differs from config {} Hz",
                cfg.sample_rate()
            );
        }
    }
    let ref_bits = reference
        .map(std::fs::read)
        .transpose()?
        .map(|b| bytes_to_bits(&b));

    let packet_len = spec.packet_len(cfg.subcarriers);
    let per_packet = spec.payload_bits();
    let mut all_bits = Vec::new();
    let mut offset = 0usize;
    let mut packet_idx = 0usize;
    let mut total_errors = 0u64;
    let mut compared = 0u64;

    while samples.len() - offset >= packet_len {
        let window = BasebandSignal::new(samples[offset..].to_vec(), cfg.sample_rate());
        let want = ref_bits.as_ref().and_then(|bits| {
            let start = packet_idx * per_packet;
            if start < bits.len() {
                let mut chunk = bits[start..bits.len().min(start + per_packet)].to_vec();
                chunk.resize(per_packet, 0); // tx pads the final packet with zeros
                Some(chunk)
            } else {
                None
            }
        });
        let report = receive_packet(&window, &spec, &basis, &opts, want.as_deref())?;
        if !report.sync.detected {
            break;
        }
        let mut diag = serde_json::json!({
            "packet": packet_idx,
            "t_hat": offset + report.sync.t_hat,
            "peak_metric": report.sync.peak_metric,
            "cfo_hz": report.cfo.map(|c| c.delta_f_hat),
            "erasures": report.erasures,
            "symbol_bit_errors": report.symbol_bit_errors,
        });
        if let Some(dump) = &report.channel_estimates {
            diag["channel_estimates"] = dump
                .iter()
                .map(|h| h.iter().map(|c| vec![c.re, c.im]).collect::<Vec<_>>())
                .collect::<Vec<_>>()
                .into();
        }
        println!("{diag}");
        if let Some(errs) = &report.symbol_bit_errors {
            total_errors += errs.iter().sum::<u64>();
            compared += per_packet as u64;
        }
        all_bits.extend_from_slice(&report.bits);
        offset += report.sync.t_hat + packet_len;
        packet_idx += 1;
    }

    if packet_idx == 0 {
        bail!("no packet detected in {}", iq.display());
    }
    eprintln!("decoded {packet_idx} packet(s), {} bits", all_bits.len());
    if compared > 0 {
        eprintln!(
            "bit errors vs reference: {total_errors}/{compared} (BER {:.3e})",
            total_errors as f64 / compared as f64
        );
    }
    if let Some(path) = output {
        std::fs::write(path, bits_to_bytes(&all_bits))?;
        eprintln!("payload written to {}", path.display());
    }
    Ok(())
}

fn cmd_basis(config: &str) -> anyhow::Result<()> {
    let cfg = load_config(config)?;
    let basis = cfg.basis(mcdm::System::Mcdm)?;
    let p = basis.params();
    let k = p.subcarriers();
    println!("subcarriers        K   = {k}");
    println!("spacing            Δf  = {} Hz", p.delta_f());
    println!("chirp rate         μ   = {:.4e} Hz/s", p.chirp_rate());
    println!("symbol duration    T   = {:.6} ms", p.symbol_duration() * 1e3);
    println!("sample rate        f_s = {} Hz", p.sample_rate());
    println!("chirp span         B_c = {:.2} Hz", p.chirp_span());
    println!("occupied bandwidth K·Δf = {:.2} kHz", p.bandwidth() / 1e3);

    // orthogonality via one transform row per subcarrier
    let mut max_off: f64 = 0.0;
    let mut max_diag_dev: f64 = 0.0;
    for m in 0..k {
        let row = basis.oct_forward(&basis.subcarrier(m)?)?;
        for (n, c) in row.iter().enumerate() {
            if n == m {
                max_diag_dev = max_diag_dev.max((c.norm() - 1.0).abs());
            } else {
                max_off = max_off.max(c.norm());
            }
        }
    }
    println!("\northogonality over all {k}x{k} pairs:");
    println!("  max off-diagonal |rho|   = {max_off:.3e}");
    println!("  max diagonal |rho - 1|   = {max_diag_dev:.3e}");

    // diagonal-model leakage for in-guard delays, against the OFDM reference
    let ofdm = cfg.basis(mcdm::System::Ofdm)?;
    let mut delays: Vec<usize> = vec![0, 1, 2, 4, 8, 16, 32, 64, 128]
        .into_iter()
        .filter(|&d| d <= cfg.guard_len)
        .collect();
    for &d in &cfg.channel_delays {
        if !delays.contains(&d) && d <= cfg.guard_len {
            delays.push(d);
        }
    }
    delays.sort_unstable();
    println!("\ndelayed-path leakage (off-diagonal energy after guard overlap-add):");
    println!("  delay[samples]   chirp (μ={:.3e})   μ=0 reference", p.chirp_rate());
    for d in delays {
        let l_mcdm = basis.delay_leakage_db(d)?;
        let l_ofdm = ofdm.delay_leakage_db(d)?;
        println!("  {d:>6}           {l_mcdm:>10.1} dB      {l_ofdm:>10.1} dB");
    }
    Ok(())
}

fn cmd_rates(config: &str) -> anyhow::Result<()> {
    let cfg = load_config(config)?;
    let layout = cfg.layout()?;
    println!(
        "data subcarriers K_s = {}, symbol+guard = {}",
        layout.data_count(),
        match (cfg.nominal_symbol_us, cfg.nominal_guard_us) {
            (Some(t), Some(g)) => format!("{} us (nominal)", t + g),
            _ => format!(
                "{:.3} us (sample-derived)",
                (cfg.subcarriers + cfg.guard_len) as f64 / cfg.sample_rate() * 1e6
            ),
        }
    );
    for (scheme, bps) in report_rates(&cfg)? {
        let pretty = if bps >= 1e6 {
            format!("{:.2} Mbps", bps / 1e6)
        } else {
            format!("{:.2} kbps", bps / 1e3)
        };
        println!("{:>6}  {:>12} bps  ({pretty})", scheme.to_string(), bps);
    }
    Ok(())
}
