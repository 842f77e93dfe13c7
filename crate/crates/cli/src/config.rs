//! Scenario files: TOML with `deny_unknown_fields` everywhere. Frequencies
//! are ordinary frequencies in the file, either bare numbers in Hz or strings
//! with a unit suffix ("860kHz"), and become rad/s while parsing.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use slowlight::units::{hz_to_rad, rad_to_hz};

/// A frequency held in rad/s.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Freq(pub f64);

impl Freq {
    pub fn rad(self) -> f64 {
        self.0
    }
}

impl FromStr for Freq {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let t = s.trim();
        let split = t
            .find(|c: char| c.is_ascii_alphabetic() && c != 'e' && c != 'E')
            .unwrap_or(t.len());
        let (num, unit) = (t[..split].trim(), t[split..].trim());
        let value: f64 = num
            .parse()
            .map_err(|_| format!("`{s}` is not a frequency (expected e.g. 860kHz)"))?;
        let scale = match unit.to_ascii_lowercase().as_str() {
            "" | "hz" => 1.0,
            "khz" => 1e3,
            "mhz" => 1e6,
            "ghz" => 1e9,
            _ => return Err(format!("unknown frequency unit `{unit}` in `{s}`")),
        };
        if !value.is_finite() {
            return Err(format!("frequency `{s}` is not finite"));
        }
        Ok(Freq(hz_to_rad(value * scale)))
    }
}

impl<'de> Deserialize<'de> for Freq {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl de::Visitor<'_> for V {
            type Value = Freq;
            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a frequency in Hz or a string such as \"860kHz\"")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Freq, E> {
                if v.is_finite() {
                    Ok(Freq(hz_to_rad(v)))
                } else {
                    Err(E::custom("frequency is not finite"))
                }
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Freq, E> {
                Ok(Freq(hz_to_rad(v as f64)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Freq, E> {
                Ok(Freq(hz_to_rad(v as f64)))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Freq, E> {
                v.parse().map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

impl Serialize for Freq {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(rad_to_hz(self.0))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Fd,
    Td,
    Both,
}

impl Engine {
    pub fn runs_fd(self) -> bool {
        matches!(self, Engine::Fd | Engine::Both)
    }

    pub fn runs_td(self) -> bool {
        matches!(self, Engine::Td | Engine::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GridChoice {
    #[default]
    Default,
    Coarse,
}

fn one() -> f64 {
    1.0
}

fn zero_freq() -> Freq {
    Freq(0.0)
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct MediumSection {
    pub alpha_per_m: f64,
    pub length_m: f64,
    pub hole_width: Freq,
    #[serde(default = "one")]
    pub hole_depth: f64,
    #[serde(default = "zero_freq")]
    pub hole_center: Freq,
    /// Left out: effectively no dephasing.
    pub t2_s: Option<f64>,
    pub t1_s: Option<f64>,
    pub inhomogeneous_width: Option<Freq>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PulseSection {
    /// Intensity FWHM.
    pub fwhm_s: f64,
    /// Peak Rabi frequency.
    #[serde(default = "unit_rabi")]
    pub peak_rabi: Freq,
    #[serde(default = "default_spf")]
    pub samples_per_fwhm: usize,
    #[serde(default = "default_record")]
    pub record_fwhms: f64,
}

fn unit_rabi() -> Freq {
    Freq(hz_to_rad(1.0))
}

fn default_spf() -> usize {
    50
}

fn default_record() -> f64 {
    12.0
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    #[serde(default)]
    pub kind: Engine,
    #[serde(default)]
    pub grid: GridChoice,
    pub z_steps: Option<usize>,
    pub max_alpha_dz: Option<f64>,
    /// Positions (m) where the time-domain field is written out.
    #[serde(default)]
    pub stations_m: Vec<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LevelsSection {
    pub ground_splitting: Freq,
    pub excited_splitting: Freq,
    pub homogeneous_width: Freq,
    pub branching: f64,
    pub optical_lifetime_s: f64,
    pub hyperfine_lifetime_s: f64,
    #[serde(default)]
    pub saturation_per_rate_s: f64,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSection {
    pub half_span: Freq,
    pub step: Freq,
    pub alpha_thermal_per_m: f64,
    /// Features closer than this fraction of the thermal absorption to the
    /// thermal level are ignored.
    #[serde(default = "default_threshold")]
    pub feature_threshold: f64,
}

fn default_threshold() -> f64 {
    1e-3
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSection {
    pub channel: u32,
    #[serde(default = "zero_freq")]
    pub center: Freq,
    #[serde(default = "zero_freq")]
    pub span: Freq,
    pub duration_s: f64,
    pub rate_per_s: f64,
    pub start_s: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct PumpSection {
    #[serde(default = "one_rep")]
    pub repeat: usize,
    pub window_fwhms: Option<f64>,
    pub max_dwell_s: Option<f64>,
    pub segments: Vec<SegmentSection>,
}

fn one_rep() -> usize {
    1
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct EnhancementSection {
    pub inner: Freq,
    pub outer: Freq,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioEntry {
    pub alpha_per_m: f64,
    pub hole_width: Freq,
    pub length_m: Option<f64>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScanSection {
    pub length_m: f64,
    pub width_floor: Freq,
    pub scenarios: Vec<ScenarioEntry>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct LedgerSection {
    /// Uniform snapshot intervals over the record.
    pub intervals: usize,
    /// Also snapshot at the record centre plus half the expected delay,
    /// where a compressed pulse sits in the middle of the sample.
    #[serde(default = "yes")]
    pub midpoint: bool,
}

fn yes() -> bool {
    true
}

impl Default for LedgerSection {
    fn default() -> Self {
        Self {
            intervals: 40,
            midpoint: true,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    pub medium: Option<MediumSection>,
    pub pulse: Option<PulseSection>,
    #[serde(default)]
    pub engine: EngineSection,
    pub levels: Option<LevelsSection>,
    pub probe: Option<ProbeSection>,
    pub pump: Option<PumpSection>,
    pub enhancement: Option<EnhancementSection>,
    pub scan: Option<ScanSection>,
    pub ledger: Option<LedgerSection>,
    #[serde(default)]
    pub output: OutputSection,
}

impl ScenarioConfig {
    pub fn parse(text: &str, origin: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| format!("{origin}: {e}"))
    }

    /// Digest of the resolved configuration, after command-line overrides.
    pub fn digest(&self) -> String {
        use sha2::{Digest, Sha256};
        let canonical = serde_json::to_string(self).expect("config serialises");
        let hash = Sha256::digest(canonical.as_bytes());
        hash.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Looks up a required section, naming it in the error.
pub fn section<'a, T>(s: &'a Option<T>, name: &str, command: &str) -> Result<&'a T, String> {
    s.as_ref()
        .ok_or_else(|| format!("missing section [{name}], required by `{command}`"))
}

pub const PRESETS: [(&str, &str); 5] = [
    ("fig3b", include_str!("../presets/fig3b.toml")),
    ("fig4", include_str!("../presets/fig4.toml")),
    ("fig5", include_str!("../presets/fig5.toml")),
    ("fig6", include_str!("../presets/fig6.toml")),
    ("energy", include_str!("../presets/energy.toml")),
];

pub fn preset(name: &str) -> Result<ScenarioConfig, String> {
    let text = PRESETS
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let names: Vec<&str> = PRESETS.iter().map(|p| p.0).collect();
            format!("unknown preset `{name}` (available: {})", names.join(", "))
        })?;
    ScenarioConfig::parse(text, &format!("preset {name}"))
}
