//! Sweep configuration: named presets and a plain-text config format.
//!
//! The config format is deliberately minimal: one `key = value` pair per
//! line, `#` comments, dotted section prefixes, comma-separated lists.
//! Parsing starts from a preset base (`preset = sim-2017` unless overridden)
//! and applies the remaining keys on top, so a config file only needs the
//! values it changes. See the repository README for the full key list.

use std::path::Path;
use std::str::FromStr;

use crate::channel::{ChannelProfile, Fading};
use crate::chirp::{ChirpBasis, WaveformParams};
use crate::error::{Error, Result};
use crate::frame::{FrameLayout, DEFAULT_PILOT_SEED};
use crate::modulation::ModulationScheme;
use crate::rx::RxOptions;
use crate::sweep::System;
use crate::tx::PacketSpec;

/// Everything a Monte-Carlo BER sweep needs, in one flat structure.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub systems: Vec<System>,
    pub schemes: Vec<ModulationScheme>,
    pub snr_grid_db: Vec<f64>,

    pub subcarriers: usize,
    pub delta_f_hz: f64,
    /// Chirp rate for the MCDM system; the OFDM system always runs at zero.
    pub mu_hz_per_s: f64,

    pub pilot_count: usize,
    pub null_count: usize,
    pub pilot_seed: u64,

    /// Training half length in samples (the packet carries two halves).
    pub pn_len: usize,
    pub pn_seed: u64,
    pub pause_len: usize,
    pub guard_len: usize,
    pub n_symbols: usize,
    pub amplitude: f64,

    pub channel_delays: Vec<usize>,
    /// Mean tap powers; normalised to unit total when the profile is built.
    pub channel_powers: Vec<f64>,
    pub fading: Fading,
    pub cfo_hz: f64,
    pub timing_offset: usize,

    pub packets_per_point: u64,
    pub min_bit_errors: u64,
    pub min_bits: u64,
    pub master_seed: u64,

    pub sync_threshold: f64,
    pub correct_cfo: bool,

    /// Nominal frame timing for the rate report, in microseconds. When
    /// absent the report uses the exact sample-derived durations.
    pub nominal_symbol_us: Option<u64>,
    pub nominal_guard_us: Option<u64>,
}

impl SweepConfig {
    /// The simulation-study parameter set: K=1024 subcarriers at 488 Hz
    /// spacing, 256 comb pilots, 56 edge nulls, up-chirp rate 2.38e5 Hz/s,
    /// 0.26 ms training, 0.51 ms pause and guard, 3-tap Rayleigh channel.
    pub fn sim_2017() -> Self {
        SweepConfig {
            systems: vec![System::Mcdm, System::Ofdm],
            schemes: ModulationScheme::ALL.to_vec(),
            snr_grid_db: (0..=12).map(|i| 2.0 * i as f64).collect(),
            subcarriers: 1024,
            delta_f_hz: 488.0,
            mu_hz_per_s: 2.38e5,
            pilot_count: 256,
            null_count: 56,
            pilot_seed: DEFAULT_PILOT_SEED,
            // 128 training samples = 0.256 ms at f_s = 499.712 kHz
            pn_len: 64,
            pn_seed: 7,
            // 256 samples = 0.512 ms
            pause_len: 256,
            guard_len: 256,
            n_symbols: 8,
            amplitude: 1.0,
            channel_delays: vec![0, 1, 3],
            channel_powers: vec![0.5, 0.3, 0.2],
            fading: Fading::RayleighBlock,
            cfo_hz: 0.0,
            timing_offset: 0,
            packets_per_point: 200,
            min_bit_errors: 100,
            min_bits: 100_000,
            master_seed: 1,
            // fading can drop the strongest tap well below the total packet
            // energy, so the sweep threshold sits below the 0.5 default
            sync_threshold: 0.25,
            correct_cfo: true,
            nominal_symbol_us: Some(2050),
            nominal_guard_us: Some(510),
        }
    }

    /// The over-the-air experiment parameter set: same frame as
    /// [`Self::sim_2017`] but 1.02 ms training and chirp rate 2.44e5 Hz/s.
    pub fn exp_2017() -> Self {
        SweepConfig {
            mu_hz_per_s: 2.44e5,
            // 512 training samples = 1.024 ms
            pn_len: 256,
            ..Self::sim_2017()
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "sim-2017" => Some(Self::sim_2017()),
            "exp-2017" => Some(Self::exp_2017()),
            _ => None,
        }
    }

    /// Parses config text on top of its preset base.
    pub fn from_text(text: &str) -> Result<Self> {
        let entries = parse_lines(text)?;
        let mut base = Self::sim_2017();
        for e in &entries {
            if e.key == "preset" {
                base = Self::preset(&e.value).ok_or_else(|| Error::ConfigParse {
                    line: e.line,
                    msg: format!("unknown preset `{}`", e.value),
                })?;
            }
        }
        for e in &entries {
            if e.key != "preset" {
                base.apply(e)?;
            }
        }
        base.validate()?;
        Ok(base)
    }

    /// Loads a config file, or a built-in preset when `path` names one.
    pub fn load(path: &str) -> Result<Self> {
        if let Some(preset) = Self::preset(path) {
            return Ok(preset);
        }
        let text = std::fs::read_to_string(Path::new(path))?;
        Self::from_text(&text)
    }

    fn apply(&mut self, e: &Entry) -> Result<()> {
        let line = e.line;
        let v = e.value.as_str();
        match e.key.as_str() {
            "systems" => self.systems = parse_list(v, line)?,
            "schemes" => self.schemes = parse_list(v, line)?,
            "snr_db" => self.snr_grid_db = parse_num_list(v, line)?,
            "waveform.k" => self.subcarriers = parse_num(v, line)?,
            "waveform.delta_f_hz" => self.delta_f_hz = parse_num(v, line)?,
            "waveform.mu" => self.mu_hz_per_s = parse_num(v, line)?,
            "frame.pilots" => self.pilot_count = parse_num(v, line)?,
            "frame.nulls" => self.null_count = parse_num(v, line)?,
            "frame.pilot_seed" => self.pilot_seed = parse_u64(v, line)?,
            "packet.pn_len" => self.pn_len = parse_num(v, line)?,
            "packet.pn_seed" => self.pn_seed = parse_u64(v, line)?,
            "packet.pause" => self.pause_len = parse_num(v, line)?,
            "packet.guard" => self.guard_len = parse_num(v, line)?,
            "packet.symbols" => self.n_symbols = parse_num(v, line)?,
            "packet.amplitude" => self.amplitude = parse_num(v, line)?,
            "channel.delays" => self.channel_delays = parse_num_list(v, line)?,
            "channel.powers" => self.channel_powers = parse_num_list(v, line)?,
            "channel.powers_db" => {
                self.channel_powers = parse_num_list::<f64>(v, line)?
                    .into_iter()
                    .map(|db| 10f64.powf(db / 10.0))
                    .collect()
            }
            "channel.fading" => {
                self.fading = match v {
                    "fixed" => Fading::Fixed,
                    "rayleigh-block" => Fading::RayleighBlock,
                    other => {
                        return Err(Error::ConfigParse {
                            line,
                            msg: format!("unknown fading model `{other}`"),
                        })
                    }
                }
            }
            "channel.cfo_hz" => self.cfo_hz = parse_num(v, line)?,
            "channel.timing_offset" => self.timing_offset = parse_num(v, line)?,
            "sim.packets_per_point" => self.packets_per_point = parse_num(v, line)?,
            "sim.min_bit_errors" => self.min_bit_errors = parse_num(v, line)?,
            "sim.min_bits" => self.min_bits = parse_num(v, line)?,
            "sim.master_seed" => self.master_seed = parse_u64(v, line)?,
            "rx.sync_threshold" => self.sync_threshold = parse_num(v, line)?,
            "rx.correct_cfo" => self.correct_cfo = parse_bool(v, line)?,
            "rates.symbol_us" => self.nominal_symbol_us = Some(parse_num(v, line)?),
            "rates.guard_us" => self.nominal_guard_us = Some(parse_num(v, line)?),
            other => {
                return Err(Error::ConfigParse {
                    line,
                    msg: format!("unknown key `{other}`"),
                })
            }
        }
        Ok(())
    }

    /// Checks everything constructible and returns non-fatal warnings.
    pub fn validate(&self) -> Result<Vec<String>> {
        if self.systems.is_empty() || self.schemes.is_empty() || self.snr_grid_db.is_empty() {
            return Err(Error::InvalidConfig(
                "systems, schemes, and snr_db must be nonempty".into(),
            ));
        }
        if self.packets_per_point == 0 {
            return Err(Error::InvalidConfig("packets_per_point must be >= 1".into()));
        }
        WaveformParams::new(self.subcarriers, self.delta_f_hz, self.mu_hz_per_s)?;
        self.layout()?;
        self.packet_spec(self.schemes[0])?.validate()?;
        self.channel_profile()?;

        let mut warnings = Vec::new();
        if let Some(&max_delay) = self.channel_delays.iter().max() {
            if max_delay > self.guard_len {
                warnings.push(format!(
                    "max channel delay ({max_delay}) exceeds the guard ({}): expect ISI",
                    self.guard_len
                ));
            }
        }
        let t_pn = 2.0 * self.pn_len as f64 / self.sample_rate();
        if self.cfo_hz.abs() >= 1.0 / t_pn {
            warnings.push(format!(
                "cfo {} Hz is outside the estimator's unambiguous range ±{:.1} Hz",
                self.cfo_hz,
                1.0 / t_pn
            ));
        }
        Ok(warnings)
    }

    pub fn sample_rate(&self) -> f64 {
        self.subcarriers as f64 * self.delta_f_hz
    }

    /// Chirp rate a given system runs at.
    pub fn chirp_rate(&self, system: System) -> f64 {
        match system {
            System::Mcdm => self.mu_hz_per_s,
            System::Ofdm => 0.0,
        }
    }

    pub fn basis(&self, system: System) -> Result<ChirpBasis<f64>> {
        ChirpBasis::from_parts(self.subcarriers, self.delta_f_hz, self.chirp_rate(system))
    }

    pub fn layout(&self) -> Result<FrameLayout> {
        FrameLayout::new(
            self.subcarriers,
            self.pilot_count,
            self.null_count,
            self.pilot_seed,
        )
    }

    pub fn packet_spec(&self, scheme: ModulationScheme) -> Result<PacketSpec> {
        Ok(PacketSpec {
            pn_len: self.pn_len,
            pn_seed: self.pn_seed,
            pause_len: self.pause_len,
            guard_len: self.guard_len,
            n_symbols: self.n_symbols,
            layout: self.layout()?,
            scheme,
        })
    }

    pub fn channel_profile(&self) -> Result<ChannelProfile<f64>> {
        let total: f64 = self.channel_powers.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::InvalidConfig("channel powers must be positive".into()));
        }
        let powers = self.channel_powers.iter().map(|p| p / total).collect();
        ChannelProfile::new(self.channel_delays.clone(), powers, self.fading)
    }

    pub fn rx_options(&self) -> RxOptions<f64> {
        RxOptions {
            sync_threshold: self.sync_threshold,
            correct_cfo: self.correct_cfo,
            ..RxOptions::default()
        }
    }
}

struct Entry {
    line: usize,
    key: String,
    value: String,
}

fn parse_lines(text: &str) -> Result<Vec<Entry>> {
    let mut entries = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::ConfigParse {
            line,
            msg: "expected `key = value`".into(),
        })?;
        entries.push(Entry {
            line,
            key: key.trim().to_string(),
            value: value.trim().to_string(),
        });
    }
    Ok(entries)
}

fn parse_num<T: FromStr>(v: &str, line: usize) -> Result<T> {
    v.parse().map_err(|_| Error::ConfigParse {
        line,
        msg: format!("bad number `{v}`"),
    })
}

fn parse_u64(v: &str, line: usize) -> Result<u64> {
    let parsed = if let Some(hex) = v.strip_prefix("0x") {
        u64::from_str_radix(hex, 16).ok()
    } else {
        v.parse().ok()
    };
    parsed.ok_or_else(|| Error::ConfigParse {
        line,
        msg: format!("bad integer `{v}`"),
    })
}

fn parse_bool(v: &str, line: usize) -> Result<bool> {
    match v {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        other => Err(Error::ConfigParse {
            line,
            msg: format!("bad boolean `{other}`"),
        }),
    }
}

fn parse_num_list<T: FromStr>(v: &str, line: usize) -> Result<Vec<T>> {
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse_num(s, line))
        .collect()
}

fn parse_list<T>(v: &str, line: usize) -> Result<Vec<T>>
where
    T: FromStr<Err = Error>,
{
    v.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse().map_err(|e: Error| Error::ConfigParse {
                line,
                msg: e.to_string(),
            })
        })
        .collect()
}
