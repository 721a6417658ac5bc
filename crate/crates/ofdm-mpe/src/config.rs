//! TOML run configuration. Units live in the key names.

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use ofdm_mpe_core::ambiguity::AmbiguityForm;
use ofdm_mpe_core::estimator::{Domain, EstimatorOptions, SearchRegion};
use ofdm_mpe_core::montecarlo::ScenarioSpec;
use ofdm_mpe_core::signal::{Constellation, MultipathChannel, OfdmConfig, Tap};
use ofdm_mpe_core::waveform::WaveformConfig;
use serde::Deserialize;

use crate::error::CliError;

/// Environment variable that overrides `output.dir`.
pub const OUTPUT_DIR_ENV: &str = "OFDM_MPE_OUTPUT_DIR";

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub ofdm: OfdmSection,
    #[serde(default)]
    pub channel: ChannelSection,
    #[serde(default)]
    pub estimator: EstimatorSection,
    #[serde(default)]
    pub sim: SimSection,
    #[serde(default)]
    pub output: OutputSection,
    #[serde(default)]
    pub ambiguity: AmbiguitySection,
    #[serde(default)]
    pub validate: ValidateSection,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Ieee80211,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstellationName {
    AllOnes,
    Psk,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmSection {
    /// Fills `k`, `t_us`, `t_cp_us` and `null_subcarriers`; explicit keys win.
    pub preset: Option<Preset>,
    pub k: Option<usize>,
    pub l: usize,
    pub t_us: Option<f64>,
    pub t_cp_us: Option<f64>,
    /// Must equal `t_us + t_cp_us` when given.
    pub t_d_us: Option<f64>,
    /// 1-based.
    pub null_subcarriers: Option<Vec<usize>>,
    #[serde(default = "default_constellation")]
    pub constellation: ConstellationName,
    #[serde(default = "default_psk_order")]
    pub psk_order: u32,
    #[serde(default)]
    pub symbol_seed: u64,
}

fn default_constellation() -> ConstellationName {
    ConstellationName::AllOnes
}

fn default_psk_order() -> u32 {
    4
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TapEntry {
    pub gain_db: f64,
    #[serde(default)]
    pub phase_deg: f64,
    pub tau_ns: f64,
    pub nu_hz: f64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSection {
    /// Explicit taps for synthetic estimation.
    pub taps: Option<Vec<TapEntry>>,
    /// Random-channel scenario for Monte Carlo sweeps.
    pub scenario: Option<ScenarioSection>,
    /// Noise for synthetic estimation; noiseless when absent.
    pub snr_db: Option<f64>,
    #[serde(default)]
    pub noise_seed: u64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub pdp_db: Vec<f64>,
    pub tau_min_ns: f64,
    pub tau_max_ns: f64,
    pub nu_min_hz: f64,
    pub nu_max_hz: f64,
    pub dtau_min_ns: f64,
    pub dnu_min_hz: f64,
}

impl Default for ScenarioSection {
    fn default() -> Self {
        let s = ScenarioSpec::three_tap();
        Self {
            pdp_db: s.pdp_db,
            tau_min_ns: s.tau_range.0 * 1e9,
            tau_max_ns: s.tau_range.1 * 1e9,
            nu_min_hz: s.nu_range.0,
            nu_max_hz: s.nu_range.1,
            dtau_min_ns: s.dtau_min * 1e9,
            dnu_min_hz: s.dnu_min,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainName {
    MatchedY,
    ZeroForcingH,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimatorSection {
    pub p: usize,
    pub refine_iterations: usize,
    pub gamma: Option<f64>,
    pub domain: DomainName,
    pub early_stop_tol: Option<f64>,
    pub tau_min_ns: f64,
    pub tau_max_ns: f64,
    pub nu_min_hz: f64,
    pub nu_max_hz: f64,
    pub m: usize,
    pub n: usize,
    pub beta: f64,
    pub n_bisect: usize,
    pub eps_tau_ns: f64,
    pub eps_nu_hz: f64,
}

impl Default for EstimatorSection {
    fn default() -> Self {
        Self {
            p: 3,
            refine_iterations: 20,
            gamma: None,
            domain: DomainName::MatchedY,
            early_stop_tol: None,
            tau_min_ns: 0.0,
            tau_max_ns: 200.0,
            nu_min_hz: -500.0,
            nu_max_hz: 500.0,
            m: 16,
            n: 16,
            beta: 1.0,
            n_bisect: 8,
            eps_tau_ns: 0.01,
            eps_nu_hz: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimSection {
    pub trials: usize,
    pub snr_db: Vec<f64>,
    pub seed: u64,
}

impl Default for SimSection {
    fn default() -> Self {
        let s = ScenarioSpec::three_tap();
        Self {
            trials: s.trials,
            snr_db: s.snr_grid_db,
            seed: s.seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormName {
    Approx,
    PskClosed,
    PskNullDc,
    PskDirichlet,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AmbiguitySection {
    pub tau_min_ns: f64,
    pub tau_max_ns: f64,
    pub tau_points: usize,
    pub nu_min_hz: f64,
    pub nu_max_hz: f64,
    pub nu_points: usize,
    pub form: FormName,
}

impl Default for AmbiguitySection {
    fn default() -> Self {
        Self {
            tau_min_ns: -400.0,
            tau_max_ns: 400.0,
            tau_points: 161,
            nu_min_hz: -4000.0,
            nu_max_hz: 4000.0,
            nu_points: 161,
            form: FormName::Approx,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ValidateSection {
    pub oversample: usize,
    /// Defaults to half the cyclic prefix.
    pub in_cp_tau_ns: Option<f64>,
    /// Defaults to `0.005/T_d`.
    pub in_cp_nu_hz: Option<f64>,
    /// Defaults to 1.5 cyclic prefixes.
    pub violating_tau_ns: Option<f64>,
    pub violating_nu_hz: Option<f64>,
    pub loopback_tol: f64,
    pub in_cp_tol: f64,
}

impl Default for ValidateSection {
    fn default() -> Self {
        Self {
            oversample: 16,
            in_cp_tau_ns: None,
            in_cp_nu_hz: None,
            violating_tau_ns: None,
            violating_nu_hz: None,
            loopback_tol: 1e-6,
            in_cp_tol: 1e-2,
        }
    }
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| bad(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("reading {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Validates every section against the library types.
    pub fn check(&self) -> Result<(), CliError> {
        self.ofdm_config()?;
        self.symbols_kind()?;
        self.region()?;
        self.estimator_options()?.validate()?;
        if self.channel.taps.is_some() {
            self.explicit_channel()?;
        }
        if self.sim.trials > 0 {
            self.scenario()?.validate()?;
        }
        self.waveform_config()?;
        if self.ambiguity.tau_points == 0 || self.ambiguity.nu_points == 0 {
            return Err(bad("ambiguity grid needs at least one point per axis"));
        }
        Ok(())
    }

    pub fn ofdm_config(&self) -> Result<OfdmConfig, CliError> {
        let o = &self.ofdm;
        let preset = o
            .preset
            .map(|Preset::Ieee80211| OfdmConfig::ieee80211(o.l))
            .transpose()?;
        let k =
            o.k.or(preset.as_ref().map(|p| p.k()))
                .ok_or_else(|| bad("ofdm.k is required without a preset"))?;
        let t = o.t_us.map(|v| v * 1e-6).or(preset.as_ref().map(|p| p.t()));
        let t = t.ok_or_else(|| bad("ofdm.t_us is required without a preset"))?;
        let t_cp = o.t_cp_us.map(|v| v * 1e-6).or(preset.as_ref().map(|p| p.t_cp()));
        let t_cp = t_cp.ok_or_else(|| bad("ofdm.t_cp_us is required without a preset"))?;
        let nulls = match (&o.null_subcarriers, &preset) {
            (Some(n), _) => n.clone(),
            (None, Some(p)) if p.k() == k => p.null_set().to_vec(),
            _ => Vec::new(),
        };
        let t_d = o.t_d_us.map(|v| v * 1e-6).unwrap_or(t + t_cp);
        Ok(OfdmConfig::with_symbol_duration(k, o.l, t, t_d, t_cp, &nulls)?)
    }

    pub fn symbols_kind(&self) -> Result<Constellation, CliError> {
        match self.ofdm.constellation {
            ConstellationName::AllOnes => Ok(Constellation::AllOnes),
            ConstellationName::Psk if self.ofdm.psk_order >= 2 => Ok(Constellation::Psk(self.ofdm.psk_order)),
            ConstellationName::Psk => Err(bad("ofdm.psk_order must be at least 2")),
        }
    }

    pub fn region(&self) -> Result<SearchRegion, CliError> {
        let e = &self.estimator;
        let r = SearchRegion {
            tau_min: e.tau_min_ns * 1e-9,
            tau_max: e.tau_max_ns * 1e-9,
            nu_min: e.nu_min_hz,
            nu_max: e.nu_max_hz,
            m: e.m,
            n: e.n,
            beta: e.beta,
            n_bisect: e.n_bisect,
            eps_tau: e.eps_tau_ns * 1e-9,
            eps_nu: e.eps_nu_hz,
        };
        r.validate()?;
        Ok(r)
    }

    pub fn estimator_options(&self) -> Result<EstimatorOptions, CliError> {
        let e = &self.estimator;
        let mut opts = EstimatorOptions::new(e.p).with_refinement(e.refine_iterations);
        opts.gamma = e.gamma;
        opts.early_stop_tol = e.early_stop_tol;
        opts.domain = match e.domain {
            DomainName::MatchedY => Domain::MatchedY,
            DomainName::ZeroForcingH => Domain::ZeroForcingH,
        };
        opts.validate()?;
        Ok(opts)
    }

    pub fn explicit_channel(&self) -> Result<MultipathChannel, CliError> {
        let taps = self
            .channel
            .taps
            .as_ref()
            .ok_or_else(|| bad("channel.taps is required for synthetic estimation"))?;
        let taps = taps
            .iter()
            .map(|t| {
                let mag = 10f64.powf(t.gain_db / 20.0);
                Tap::new(
                    Complex64::from_polar(mag, t.phase_deg.to_radians()),
                    t.tau_ns * 1e-9,
                    t.nu_hz,
                )
            })
            .collect();
        Ok(MultipathChannel::new(taps)?)
    }

    pub fn scenario(&self) -> Result<ScenarioSpec, CliError> {
        let s = self.channel.scenario.clone().unwrap_or_default();
        let spec = ScenarioSpec {
            p: s.pdp_db.len(),
            pdp_db: s.pdp_db,
            tau_range: (s.tau_min_ns * 1e-9, s.tau_max_ns * 1e-9),
            nu_range: (s.nu_min_hz, s.nu_max_hz),
            dtau_min: s.dtau_min_ns * 1e-9,
            dnu_min: s.dnu_min_hz,
            snr_grid_db: self.sim.snr_db.clone(),
            trials: self.sim.trials,
            seed: self.sim.seed,
        };
        Ok(spec)
    }

    pub fn waveform_config(&self) -> Result<WaveformConfig, CliError> {
        Ok(WaveformConfig::new(self.validate.oversample)?)
    }

    /// In-prefix and prefix-violating taps for `validate`.
    pub fn validation_taps(&self) -> Result<(Tap, Tap), CliError> {
        let cfg = self.ofdm_config()?;
        let v = &self.validate;
        let one = Complex64::new(1.0, 0.0);
        let nu_default = 0.005 / cfg.t_d();
        let in_cp = Tap::new(
            one,
            v.in_cp_tau_ns.map_or(0.5 * cfg.t_cp(), |t| t * 1e-9),
            v.in_cp_nu_hz.unwrap_or(nu_default),
        );
        let violating = Tap::new(
            one,
            v.violating_tau_ns.map_or(1.5 * cfg.t_cp(), |t| t * 1e-9),
            v.violating_nu_hz.unwrap_or(nu_default),
        );
        Ok((in_cp, violating))
    }

    pub fn ambiguity_form(&self) -> AmbiguityForm {
        match self.ambiguity.form {
            FormName::Approx => AmbiguityForm::Approx,
            FormName::PskClosed => AmbiguityForm::PskClosed,
            FormName::PskNullDc => AmbiguityForm::PskNullDc,
            FormName::PskDirichlet => AmbiguityForm::PskDirichlet,
        }
    }

    /// `output.dir`, unless the environment overrides it.
    pub fn output_dir(&self) -> PathBuf {
        match std::env::var_os(OUTPUT_DIR_ENV) {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.output.dir.clone(),
        }
    }
}
