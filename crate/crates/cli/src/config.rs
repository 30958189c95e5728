//! Run configuration: a measure description plus tolerance and sampling
//! overrides, read from TOML.
//!
//! ```toml
//! dim = 2
//! seed = 7
//! n_list = [8, 16, 32, 64, 128]
//!
//! [[components]]
//! weight = 0.3
//! generator = [1.0, 0.0, 0.0, 0.0]   # x_1..x_d, xi_1..xi_d
//!
//! [[components]]
//! weight = 0.7
//! generator = [0.0, 0.6, 0.0, 0.8]
//!
//! [tolerances]
//! final_error = 5e-2
//! ```
//!
//! A config without components stands for a seeded random measure: two
//! random orbits with weights 0.3 and 0.7 (one orbit when `dim = 1`).

use std::ops::Range;
use std::path::Path;

use eigenlimit_core::{orbit_through, random_orbit, ConvexMeasure, OrbitMeasure, PhasePoint};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use toml::Spanned;

use crate::error::{CliError, Result};

pub const DEFAULT_N_LIST: [u32; 5] = [8, 16, 32, 64, 128];
const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub eigen: f64,
    pub unitarity: f64,
    pub covariance: f64,
    pub group: f64,
    pub orbit_integral: f64,
    pub quadrature: f64,
    pub final_error: f64,
    pub cross_term: f64,
    pub microlocal: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            eigen: 1e-12,
            unitarity: 1e-12,
            covariance: 1e-9,
            group: 1e-10,
            orbit_integral: 1e-12,
            quadrature: 1e-6,
            final_error: 5e-2,
            cross_term: 1e-2,
            microlocal: 1e-3,
        }
    }
}

impl Tolerances {
    /// Every threshold replaced by `tol`.
    pub fn uniform(tol: f64) -> Self {
        Tolerances {
            eigen: tol,
            unitarity: tol,
            covariance: tol,
            group: tol,
            orbit_integral: tol,
            quadrature: tol,
            final_error: tol,
            cross_term: tol,
            microlocal: tol,
        }
    }
}

/// How many random draws each suite makes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Samples {
    pub orbits: usize,
    pub products: usize,
    pub annihilator_vectors: usize,
    pub covariance_maps: usize,
    pub covariance_max_level: u32,
    pub unitarity_max_level: u32,
    pub quadrature_pairs: usize,
}

impl Default for Samples {
    fn default() -> Self {
        Samples {
            orbits: 20,
            products: 1000,
            annihilator_vectors: 20,
            covariance_maps: 10,
            covariance_max_level: 30,
            unitarity_max_level: 200,
            quadrature_pairs: 10,
        }
    }
}

/// Bumps centered at `radius · e_1` for each radius.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MicrolocalSettings {
    pub radii: Vec<f64>,
    pub width: f64,
    pub amplitude: f64,
    pub n_list: Vec<u32>,
}

impl Default for MicrolocalSettings {
    fn default() -> Self {
        MicrolocalSettings { radii: vec![2.0], width: 0.2, amplitude: 1.0, n_list: vec![8, 16, 32, 64] }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub weight: f64,
    pub generator: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Config {
    pub dim: usize,
    pub seed: u64,
    pub hbar_slack: f64,
    pub n_list: Vec<u32>,
    pub family: String,
    pub components: Vec<Component>,
    pub tolerances: Tolerances,
    pub samples: Samples,
    pub microlocal: MicrolocalSettings,
}

fn default_seed() -> u64 {
    0
}

fn default_n_list() -> Vec<u32> {
    DEFAULT_N_LIST.to_vec()
}

fn default_family() -> String {
    "graded".into()
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawComponent {
    weight: Spanned<f64>,
    generator: Spanned<Vec<f64>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dim: Spanned<usize>,
    #[serde(default = "default_seed")]
    seed: u64,
    #[serde(default)]
    hbar_slack: f64,
    #[serde(default = "default_n_list")]
    n_list: Vec<u32>,
    #[serde(default = "default_family")]
    family: String,
    #[serde(default)]
    components: Vec<Spanned<RawComponent>>,
    #[serde(default)]
    tolerances: Tolerances,
    #[serde(default)]
    samples: Samples,
    #[serde(default)]
    microlocal: MicrolocalSettings,
}

/// 1-based line and column of a byte offset.
fn line_column(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

struct Locator<'a> {
    path: &'a str,
    text: &'a str,
}

impl Locator<'_> {
    fn error(&self, span: Option<Range<usize>>, message: impl Into<String>) -> CliError {
        let (line, column) = span.map_or((1, 1), |s| line_column(self.text, s.start));
        CliError::Config { path: self.path.to_string(), line, column, message: message.into() }
    }
}

impl Config {
    /// Seeded random measure in dimension `dim` with default settings.
    pub fn default_for(dim: usize, seed: u64) -> Result<Self> {
        if dim == 0 {
            return Err(CliError::Argument("dimension must be at least 1".into()));
        }
        Ok(Config {
            dim,
            seed,
            hbar_slack: 0.0,
            n_list: default_n_list(),
            family: default_family(),
            components: Vec::new(),
            tolerances: Tolerances::default(),
            samples: Samples::default(),
            microlocal: MicrolocalSettings::default(),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| CliError::File { path: path.display().to_string(), source })?;
        Self::parse(&text, &path.display().to_string())
    }

    /// Parses and validates; `path` only labels diagnostics.
    pub fn parse(text: &str, path: &str) -> Result<Self> {
        let loc = Locator { path, text };
        let raw: RawConfig = toml::from_str(text).map_err(|e| loc.error(e.span(), e.message()))?;
        let dim = *raw.dim.get_ref();
        if dim == 0 {
            return Err(loc.error(Some(raw.dim.span()), "dim must be at least 1"));
        }
        let mut components = Vec::with_capacity(raw.components.len());
        let mut orbits: Vec<eigenlimit_core::Orbit> = Vec::new();
        for (i, c) in raw.components.iter().enumerate() {
            let c_ref = c.get_ref();
            let weight = *c_ref.weight.get_ref();
            if weight <= 0.0 || !weight.is_finite() {
                return Err(loc.error(Some(c_ref.weight.span()), format!("components[{i}].weight must be positive, got {weight}")));
            }
            let generator = c_ref.generator.get_ref().clone();
            if generator.len() != 2 * dim {
                return Err(loc.error(
                    Some(c_ref.generator.span()),
                    format!("components[{i}].generator needs {} numbers (x then xi), found {}", 2 * dim, generator.len()),
                ));
            }
            let orbit = PhasePoint::from_slice(&generator)
                .and_then(|p| orbit_through(&p))
                .map_err(|e| loc.error(Some(c_ref.generator.span()), format!("components[{i}].generator: {e}")))?;
            if let Some(j) = orbits.iter().position(|o| o.same_orbit(&orbit)) {
                return Err(loc.error(Some(c.span()), format!("components[{i}] lies on the same orbit as components[{j}]")));
            }
            orbits.push(orbit);
            components.push(Component { weight, generator });
        }
        if !components.is_empty() {
            let total: f64 = components.iter().map(|c| c.weight).sum();
            if (total - 1.0).abs() > WEIGHT_SUM_TOL {
                return Err(loc.error(raw.components.first().map(|c| c.span()), format!("component weights sum to {total}, not 1")));
            }
        }
        if raw.n_list.is_empty() {
            return Err(loc.error(None, "n_list is empty"));
        }
        if !raw.hbar_slack.is_finite() {
            return Err(loc.error(None, "hbar_slack must be finite"));
        }
        Ok(Config {
            dim,
            seed: raw.seed,
            hbar_slack: raw.hbar_slack,
            n_list: raw.n_list,
            family: raw.family,
            components,
            tolerances: raw.tolerances,
            samples: raw.samples,
            microlocal: raw.microlocal,
        })
    }

    /// The target measure. Without explicit components it is drawn from the seed.
    pub fn measure(&self) -> Result<ConvexMeasure> {
        if self.components.is_empty() {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            if self.dim == 1 {
                return Ok(ConvexMeasure::single(random_orbit(1, &mut rng)));
            }
            let first = random_orbit(self.dim, &mut rng);
            let mut second = random_orbit(self.dim, &mut rng);
            while second.same_orbit(&first) {
                second = random_orbit(self.dim, &mut rng);
            }
            return Ok(ConvexMeasure::new(vec![(0.3, OrbitMeasure::new(first)), (0.7, OrbitMeasure::new(second))])?);
        }
        let components = self
            .components
            .iter()
            .map(|c| Ok((c.weight, OrbitMeasure::new(orbit_through(&PhasePoint::from_slice(&c.generator)?)?))))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConvexMeasure::new(components)?)
    }

    /// Canonical TOML of the effective configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config is plain data")
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}
