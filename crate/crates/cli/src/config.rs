//! Experiment configuration: TOML on disk, resolved into a fully explicit
//! [`ExperimentConfig`] before anything is computed.
//!
//! Every field that can be missing is checked here, and errors name the
//! offending field by its dotted path (`right.temperature`, ...).

use std::path::{Path, PathBuf};

use mesoleads::model::Coupling;
use mesoleads::spectral::build_grid;
use mesoleads::{BathSpec, C64, DiscretizationScheme, DriveProtocol, Harmonic, SpectralFunction, SystemModel};
use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    ResonantLevel,
    TwoDotRectification,
    Custom,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: Option<Scenario>,
    output: Option<RawOutput>,
    bath: Option<RawBath>,
    left: Option<RawBath>,
    right: Option<RawBath>,
    baths: Option<Vec<RawBath>>,
    system: Option<RawSystem>,
    numerics: Option<RawNumerics>,
    sweep: Option<RawSweep>,
    chain: Option<RawChain>,
    pauli: Option<RawPauli>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    dir: Option<PathBuf>,
}

/// Bath parameters. `[bath]` holds shared defaults; `[left]`, `[right]` and
/// `[[baths]]` entries override them.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBath {
    name: Option<String>,
    site: Option<usize>,
    temperature: Option<f64>,
    chemical_potential: Option<f64>,
    coupling: Option<f64>,
    cutoff: Option<f64>,
    inner_window: Option<f64>,
    modes: Option<usize>,
    log_ratio: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    energy: Option<f64>,
    energy1: Option<f64>,
    energy2: Option<f64>,
    lambda: Option<f64>,
    hamiltonian: Option<Vec<Vec<f64>>>,
    amplitude: Option<f64>,
    amplitudes: Option<Vec<f64>>,
    frequency: Option<f64>,
    harmonic: Option<HarmonicName>,
    occupations: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HarmonicName {
    Sin,
    Cos,
}

impl From<HarmonicName> for Harmonic {
    fn from(h: HarmonicName) -> Self {
        match h {
            HarmonicName::Sin => Harmonic::Sin,
            HarmonicName::Cos => Harmonic::Cos,
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNumerics {
    t_final: Option<f64>,
    dt: Option<f64>,
    stride: Option<usize>,
    tol: Option<f64>,
    n_max: Option<usize>,
    n_max_limit: Option<usize>,
    max_sweeps: Option<usize>,
    cycle_samples: Option<usize>,
    spectral_points: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    lambdas: Option<Vec<f64>>,
    ratios: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChain {
    length: Option<usize>,
    star_modes: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPauli {
    rate: Option<f64>,
}

/// Fully resolved bath; every default is explicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BathConfig {
    pub name: String,
    pub site: usize,
    pub temperature: f64,
    pub chemical_potential: f64,
    pub coupling: f64,
    pub cutoff: f64,
    pub inner_window: f64,
    pub modes: usize,
    pub log_ratio: f64,
    /// Config section the bath came from, for error messages.
    #[serde(skip)]
    pub section: String,
}

impl BathConfig {
    /// Builds the bath and checks that its lead grid exists.
    pub fn spec(&self) -> Result<BathSpec, CliError> {
        let path = |e: &mesoleads::Error, fallback: &str| {
            let field = match e {
                mesoleads::Error::InvalidParameter { name, .. } => match *name {
                    "n_linear" | "n_log" => "modes",
                    other => other,
                },
                _ => fallback,
            };
            format!("{}.{field}", self.section)
        };
        let spectral = SpectralFunction::flat(self.coupling, self.cutoff)
            .map_err(|e| CliError::config(path(&e, "coupling"), e))?;
        let scheme = DiscretizationScheme::from_total(self.inner_window, self.modes, self.log_ratio)
            .map_err(|e| CliError::config(path(&e, "modes"), e))?;
        build_grid(&scheme, &spectral).map_err(|e| CliError::config(path(&e, "modes"), e))?;
        BathSpec::new(self.temperature, self.chemical_potential, spectral, scheme)
            .map_err(|e| CliError::config(path(&e, "temperature"), e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    /// Real symmetric single-particle Hamiltonian.
    pub hamiltonian: Vec<Vec<f64>>,
    pub amplitudes: Vec<f64>,
    pub frequency: f64,
    pub harmonic: HarmonicName,
    pub occupations: Vec<f64>,
    /// Two-dot hopping, kept for the sweep.
    pub lambda: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Numerics {
    pub t_final: f64,
    /// `None` selects the generator's default step.
    pub dt: Option<f64>,
    pub stride: usize,
    pub tol: f64,
    pub n_max: usize,
    pub n_max_limit: usize,
    pub max_sweeps: usize,
    /// `None` uses `64 n_max` samples per period.
    pub cycle_samples: Option<usize>,
    pub spectral_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Sweep {
    pub lambdas: Vec<f64>,
    /// Values of `omega / lambda`.
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainConfig {
    pub length: usize,
    pub star_modes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub output_dir: Option<PathBuf>,
    pub baths: Vec<BathConfig>,
    pub system: SystemConfig,
    pub numerics: Numerics,
    pub sweep: Option<Sweep>,
    pub chain: ChainConfig,
    /// Pauli rate per bath; defaults to the first bath's coupling.
    pub pauli_rate: f64,
}

fn need<T: Copy>(v: Option<T>, path: &str) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::config(path, "missing"))
}

fn positive(v: f64, path: &str) -> Result<f64, CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::config(path, format!("must be positive, got {v}")))
    }
}

fn resolve_bath(
    defaults: &RawBath,
    raw: &RawBath,
    path: &str,
    name: String,
    site: usize,
) -> Result<BathConfig, CliError> {
    let pick = |a: Option<f64>, b: Option<f64>| a.or(b);
    let p = |f: &str| format!("{path}.{f}");
    let temperature = positive(need(raw.temperature, &p("temperature"))?, &p("temperature"))?;
    let chemical_potential = need(raw.chemical_potential, &p("chemical_potential"))?;
    if !chemical_potential.is_finite() {
        return Err(CliError::config(p("chemical_potential"), "must be finite"));
    }
    let coupling = positive(pick(raw.coupling, defaults.coupling).unwrap_or(1.0), &p("coupling"))?;
    let cutoff = positive(pick(raw.cutoff, defaults.cutoff).unwrap_or(8.0), &p("cutoff"))?;
    let inner_window = positive(
        pick(raw.inner_window, defaults.inner_window).unwrap_or(0.5 * cutoff),
        &p("inner_window"),
    )?;
    let modes = raw.modes.or(defaults.modes).unwrap_or(100);
    if modes < 2 {
        return Err(CliError::config(p("modes"), "need at least two modes"));
    }
    let log_ratio = pick(raw.log_ratio, defaults.log_ratio).unwrap_or(0.1);
    Ok(BathConfig {
        name,
        site,
        temperature,
        chemical_potential,
        coupling,
        cutoff,
        inner_window,
        modes,
        log_ratio,
        section: path.to_string(),
    })
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("--config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CliError::config("config", e.message()))?;
        Self::resolve(raw)
    }

    fn resolve(raw: RawConfig) -> Result<Self, CliError> {
        let scenario = need(raw.scenario, "scenario")?;
        let defaults = raw.bath.unwrap_or_default();
        let sys = raw.system.unwrap_or_default();
        let harmonic = sys.harmonic.unwrap_or(HarmonicName::Sin);
        let frequency = sys.frequency.unwrap_or(0.0);
        if !(frequency >= 0.0 && frequency.is_finite()) {
            return Err(CliError::config("system.frequency", "must be non-negative"));
        }

        let two_terminal = |raw_l: Option<RawBath>, raw_r: Option<RawBath>, right_site: usize| {
            let l = raw_l.ok_or_else(|| CliError::config("left", "missing section"))?;
            let r = raw_r.ok_or_else(|| CliError::config("right", "missing section"))?;
            Ok::<_, CliError>(vec![
                resolve_bath(&defaults, &l, "left", "L".into(), 0)?,
                resolve_bath(&defaults, &r, "right", "R".into(), right_site)?,
            ])
        };

        let (hamiltonian, amplitudes, baths, lambda) = match scenario {
            Scenario::ResonantLevel => {
                let e = sys.energy.unwrap_or(0.0);
                let a = sys.amplitude.unwrap_or(0.0);
                (vec![vec![e]], vec![a], two_terminal(raw.left, raw.right, 0)?, None)
            }
            Scenario::TwoDotRectification => {
                let lambda = need(sys.lambda, "system.lambda")?;
                let (e1, e2) = (sys.energy1.unwrap_or(0.0), sys.energy2.unwrap_or(0.0));
                let a = sys.amplitude.unwrap_or(0.0);
                (
                    vec![vec![e1, lambda], vec![lambda, e2]],
                    vec![a, 0.0],
                    two_terminal(raw.left, raw.right, 1)?,
                    Some(lambda),
                )
            }
            Scenario::Custom => {
                let h = sys
                    .hamiltonian
                    .clone()
                    .ok_or_else(|| CliError::config("system.hamiltonian", "missing"))?;
                let n = h.len();
                if n == 0 || h.iter().any(|row| row.len() != n) {
                    return Err(CliError::config("system.hamiltonian", "must be a non-empty square matrix"));
                }
                let a = sys.amplitudes.clone().unwrap_or_else(|| vec![0.0; n]);
                let list = raw.baths.ok_or_else(|| CliError::config("baths", "missing"))?;
                let mut baths = Vec::with_capacity(list.len());
                for (i, b) in list.iter().enumerate() {
                    let path = format!("baths[{i}]");
                    let site = need(b.site, &format!("{path}.site"))?;
                    if site >= n {
                        return Err(CliError::config(format!("{path}.site"), format!("outside system of {n} sites")));
                    }
                    let name = b.name.clone().unwrap_or_else(|| i.to_string());
                    baths.push(resolve_bath(&defaults, b, &path, name, site)?);
                }
                (h, a, baths, None)
            }
        };
        let n = hamiltonian.len();
        if amplitudes.len() != n {
            return Err(CliError::config("system.amplitudes", format!("expected {n} entries")));
        }
        if frequency == 0.0 && amplitudes.iter().any(|&a| a != 0.0) {
            return Err(CliError::config("system.frequency", "a nonzero amplitude needs a positive frequency"));
        }
        let occupations = sys.occupations.clone().unwrap_or_else(|| vec![0.5; n]);
        if occupations.len() != n || occupations.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(CliError::config("system.occupations", format!("need {n} values in [0, 1]")));
        }
        let mut names: Vec<&str> = baths.iter().map(|b| b.name.as_str()).collect();
        names.sort_unstable();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(CliError::config("baths", "bath names must be unique"));
        }

        let num = raw.numerics.unwrap_or_default();
        let numerics = Numerics {
            t_final: positive(num.t_final.unwrap_or(25.0), "numerics.t_final")?,
            dt: num.dt.map(|dt| positive(dt, "numerics.dt")).transpose()?,
            stride: num.stride.unwrap_or(10).max(1),
            tol: positive(num.tol.unwrap_or(1e-9), "numerics.tol")?,
            n_max: num.n_max.unwrap_or(8).max(1),
            n_max_limit: num.n_max_limit.unwrap_or(256),
            max_sweeps: num.max_sweeps.unwrap_or(10_000),
            cycle_samples: num.cycle_samples,
            spectral_points: num.spectral_points.unwrap_or(1601).max(2),
        };
        let sweep = match raw.sweep {
            None => None,
            Some(s) => {
                let lambdas = s.lambdas.ok_or_else(|| CliError::config("sweep.lambdas", "missing"))?;
                let ratios = s.ratios.ok_or_else(|| CliError::config("sweep.ratios", "missing"))?;
                for (i, &v) in lambdas.iter().enumerate() {
                    positive(v, &format!("sweep.lambdas[{i}]"))?;
                }
                for (i, &v) in ratios.iter().enumerate() {
                    positive(v, &format!("sweep.ratios[{i}]"))?;
                }
                Some(Sweep { lambdas, ratios })
            }
        };
        let ch = raw.chain.unwrap_or_default();
        let chain = ChainConfig {
            length: ch.length.unwrap_or(400),
            star_modes: ch.star_modes.unwrap_or(10_000),
        };
        let pauli_rate = positive(
            raw.pauli.and_then(|p| p.rate).unwrap_or(baths.first().map_or(1.0, |b| b.coupling)),
            "pauli.rate",
        )?;
        Ok(Self {
            scenario,
            output_dir: raw.output.and_then(|o| o.dir),
            baths,
            system: SystemConfig {
                hamiltonian,
                amplitudes,
                frequency,
                harmonic,
                occupations,
                lambda,
            },
            numerics,
            sweep,
            chain,
            pauli_rate,
        })
    }

    pub fn is_static(&self) -> bool {
        self.system.frequency == 0.0 || self.system.amplitudes.iter().all(|&a| a == 0.0)
    }

    pub fn bath_specs(&self) -> Result<Vec<BathSpec>, CliError> {
        self.baths.iter().map(BathConfig::spec).collect()
    }

    pub fn model(&self) -> Result<SystemModel, CliError> {
        let n = self.system.hamiltonian.len();
        let h = Array2::from_shape_fn((n, n), |(i, j)| C64::new(self.system.hamiltonian[i][j], 0.0));
        let drive = DriveProtocol {
            amplitudes: self.system.amplitudes.clone(),
            frequency: self.system.frequency,
            harmonic: self.system.harmonic.into(),
        };
        let couplings = self
            .baths
            .iter()
            .map(|b| Ok(Coupling { site: b.site, bath: b.spec()? }))
            .collect::<Result<Vec<_>, CliError>>()?;
        SystemModel::new(h, drive, couplings).map_err(|e| CliError::config("system", e))
    }

    /// Two-dot model at `(lambda, omega)`; `swap` exchanges the bath
    /// temperatures and chemical potentials (the backward setup).
    pub fn two_dot(&self, lambda: f64, omega: f64, swap: bool) -> Result<SystemModel, CliError> {
        if self.scenario != Scenario::TwoDotRectification {
            return Err(CliError::config("scenario", "the sweep needs the two-dot-rectification scenario"));
        }
        let mut left = self.baths[0].spec()?;
        let mut right = self.baths[1].spec()?;
        if swap {
            std::mem::swap(&mut left.temperature, &mut right.temperature);
            std::mem::swap(&mut left.chemical_potential, &mut right.chemical_potential);
        }
        let h = &self.system.hamiltonian;
        SystemModel::two_dot(
            lambda,
            h[0][0],
            h[1][1],
            self.system.amplitudes[0],
            omega,
            self.system.harmonic.into(),
            left,
            right,
        )
        .map_err(|e| CliError::config("system", e))
    }
}
