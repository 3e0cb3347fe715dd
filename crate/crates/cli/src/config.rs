//! Run configuration shared by flags and `--config` files.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chaoskit::detectors::{default_refseq, two_circle_refseq, Resolution};
use chaoskit::sets::{make_reference_sequence, RefTemplate, ReferenceSequence};
use chaoskit::{build_system, CatalogEntry, DynamicalSystem, ElementKind};
use clap::{Args, ValueEnum};
use serde::Deserialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Every field is optional so that flags can override a config file.
#[derive(Clone, Debug, Default, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct RunConfig {
    /// translation-flow, integer-translation, rotation, mobius, shift<k>, two-circle
    #[arg(long)]
    pub system: Option<String>,
    /// Rotation number for `rotation`
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Shift truncation length
    #[arg(long = "length")]
    pub length: Option<usize>,
    #[arg(long)]
    pub property: Option<String>,
    #[arg(long)]
    pub x: Option<String>,
    #[arg(long)]
    pub y: Option<String>,
    /// Tuple points, separated by `;`
    #[arg(long)]
    pub points: Option<String>,
    /// symmetric, forward, matnorm or explicit
    #[arg(long)]
    pub refseq: Option<String>,
    /// Comma-separated radii
    #[arg(long, value_delimiter = ',')]
    pub epsilons: Option<Vec<f64>>,
    /// Grid points per unit (cylinder depth on the shift)
    #[arg(long)]
    pub grid: Option<usize>,
    /// Cylinder depth on the shift; same as --grid
    #[arg(long)]
    pub depth: Option<usize>,
    /// Time window `lo,hi`
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub window: Option<Vec<f64>>,
    /// Real-time grid points per unit
    #[arg(long)]
    pub density: Option<usize>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub max_steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Radius for the stable-set probe
    #[arg(long)]
    pub eps: Option<f64>,
    /// Compact set `F` as `lo,hi` for the stable-set probe
    #[arg(long = "f", value_delimiter = ',', allow_hyphen_values = true)]
    pub f: Option<Vec<f64>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON file with the same fields; flags take precedence
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $top:ident, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl RunConfig {
    /// Loads `--config` if given and lays the flags over it.
    pub fn resolve(self) -> Result<RunConfig> {
        let Some(path) = self.config.clone() else {
            return self.validated();
        };
        let mut base = load(&path)?;
        let top = self;
        overlay!(base, top, system, alpha, length, property, x, y, points, refseq, epsilons, grid, depth, window, density, horizon, max_steps, seed, eps, f, out, format);
        base.validated()
    }

    fn validated(self) -> Result<RunConfig> {
        let positive = [
            ("grid", self.grid),
            ("depth", self.depth),
            ("density", self.density),
            ("horizon", self.horizon),
            ("max-steps", self.max_steps),
            ("length", self.length),
        ];
        for (name, v) in positive {
            if v == Some(0) {
                bail!("--{name} must be positive");
            }
        }
        if let Some(e) = &self.epsilons {
            if e.is_empty() || e.iter().any(|v| !(*v > 0.0)) {
                bail!("--epsilons must be positive");
            }
        }
        for (name, w) in [("window", &self.window), ("f", &self.f)] {
            if let Some(w) = w {
                if w.len() != 2 || w[0] > w[1] {
                    bail!("--{name} expects `lo,hi` with lo <= hi");
                }
            }
        }
        Ok(self)
    }

    pub fn system(&self) -> Result<DynamicalSystem> {
        let name = self.system.as_deref().context("--system is required")?;
        Ok(build_system(parse_system(name, self.alpha, self.length)?)?)
    }

    pub fn resolution(&self, system: &DynamicalSystem) -> Result<Resolution> {
        let mut r = Resolution::for_system(system);
        if let Some(e) = &self.epsilons {
            r = r.with_epsilons(e.clone());
        }
        if let Some(g) = self.depth.or(self.grid) {
            r = r.with_space_grid(g);
        }
        if let Some(w) = &self.window {
            r = r.with_window(w[0], w[1]);
        }
        if let Some(d) = self.density {
            r = r.with_density(d);
        }
        if let Some(h) = self.horizon {
            r = r.with_horizon(h);
        }
        if let Some(m) = self.max_steps {
            r.max_steps = m;
        }
        if let Some(s) = self.seed {
            r.seed = s;
        }
        r.validate()?;
        Ok(r)
    }

    pub fn refseq(&self, system: &DynamicalSystem, res: &Resolution) -> Result<ReferenceSequence> {
        let kind = system.element_kind();
        Ok(match self.refseq.as_deref() {
            None => match system.entry() {
                CatalogEntry::TwoCircle => two_circle_refseq(res.horizon_index)?,
                _ => default_refseq(system)?,
            },
            Some("symmetric") => make_reference_sequence(kind, RefTemplate::SymmetricInterval)?,
            Some("forward") => make_reference_sequence(kind, RefTemplate::ForwardInterval)?,
            Some("matnorm") => make_reference_sequence(kind, RefTemplate::MatrixNormBall)?,
            Some("explicit") if kind == ElementKind::CircleExact => two_circle_refseq(res.horizon_index)?,
            Some(other) => bail!("unknown reference sequence `{other}`"),
        })
    }
}

fn load(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn parse_system(name: &str, alpha: Option<f64>, length: Option<usize>) -> Result<CatalogEntry> {
    let entry = match name {
        "translation-flow" | "translation_flow" | "flow" => CatalogEntry::TranslationFlow,
        "integer-translation" | "integer_translation" => CatalogEntry::IntegerTranslation,
        "rotation" | "circle-rotation" | "circle_rotation" => CatalogEntry::CircleRotation {
            alpha: alpha.context("rotation needs --alpha")?,
        },
        "mobius" => CatalogEntry::Mobius,
        "two-circle" | "two_circle" => CatalogEntry::TwoCircle,
        s if s.starts_with("shift") => {
            let k = s.trim_start_matches("shift").trim_start_matches(['-', '_']);
            let alphabet = if k.is_empty() { 2 } else { k.parse().with_context(|| format!("unknown system `{name}`"))? };
            CatalogEntry::FullShift { alphabet, length: length.unwrap_or(64) }
        }
        _ => bail!("unknown system `{name}`"),
    };
    entry.validate()?;
    Ok(entry)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_names() {
        assert_eq!(parse_system("shift2", None, None).unwrap(), CatalogEntry::FullShift { alphabet: 2, length: 64 });
        assert_eq!(parse_system("shift-3", None, Some(128)).unwrap(), CatalogEntry::FullShift { alphabet: 3, length: 128 });
        assert!(parse_system("rotation", None, None).is_err());
        assert!(parse_system("tent", None, None).is_err());
    }

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.json");
        std::fs::write(&path, r#"{"system": "mobius", "horizon": 10, "seed": 3}"#).unwrap();
        let cfg = RunConfig { config: Some(path), horizon: Some(20), ..Default::default() }.resolve().unwrap();
        assert_eq!(cfg.system.as_deref(), Some("mobius"));
        assert_eq!(cfg.horizon, Some(20));
        assert_eq!(cfg.seed, Some(3));
    }

    #[test]
    fn rejects_zero_and_reversed() {
        assert!(RunConfig { horizon: Some(0), ..Default::default() }.resolve().is_err());
        assert!(RunConfig { window: Some(vec![5.0, 1.0]), ..Default::default() }.resolve().is_err());
    }
}
