//! Experiment settings from a JSON file, overridden by command-line flags.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Task {
    Synth,
    Mask,
    Tensorize,
    Complete,
    Eval,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    AlsTg,
    PmacTg,
    /// PMac-TG with ranks picked from the singular spectra.
    APmacTg,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum SynthKind {
    /// Contraction of a random tensor grid.
    #[default]
    Tg,
    /// Contraction of a random tensor train.
    Tt,
    /// Synthetic RGB test image.
    Scene,
}

/// `RxC`, e.g. `3x3` for a grid or `256x256` for an image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Dims(pub usize, pub usize);

impl FromStr for Dims {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let bad = || format!("expected ROWSxCOLS such as 3x3, got `{s}`");
        let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().parse().map_err(|_| bad())?;
        if a == 0 || b == 0 {
            return Err(bad());
        }
        Ok(Dims(a, b))
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.0, self.1)
    }
}

impl Serialize for Dims {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dims {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

/// A single rank (uniform), an explicit list, or `auto`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum RankArg {
    Uniform(usize),
    List(Vec<usize>),
    Auto,
}

impl FromStr for RankArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s.trim().eq_ignore_ascii_case("auto") {
            return Ok(RankArg::Auto);
        }
        let v: Vec<usize> = s
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| format!("expected `auto`, a rank, or a comma-separated list, got `{s}`"))?;
        Ok(match v.as_slice() {
            [r] => RankArg::Uniform(*r),
            _ => RankArg::List(v),
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawRanks {
    One(usize),
    Many(Vec<usize>),
    Word(String),
}

impl Serialize for RankArg {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            RankArg::Uniform(r) => RawRanks::One(*r),
            RankArg::List(v) => RawRanks::Many(v.clone()),
            RankArg::Auto => RawRanks::Word("auto".into()),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for RankArg {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match RawRanks::deserialize(d)? {
            RawRanks::One(r) => Ok(RankArg::Uniform(r)),
            RawRanks::Many(v) => Ok(RankArg::List(v)),
            RawRanks::Word(w) => w.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Every setting is optional here; each task checks what it needs.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize, Args)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Set by the verb; a config file may name it to guard against misuse.
    #[arg(skip)]
    pub task: Option<Task>,

    #[arg(long, value_enum)]
    pub solver: Option<Solver>,
    /// Grid of sites, ROWSxCOLS.
    #[arg(long)]
    pub grid: Option<Dims>,
    /// `auto`, one rank for every bond or split, or the full list.
    #[arg(long)]
    pub ranks: Option<RankArg>,
    /// Mode size shared by every site (synth).
    #[arg(long)]
    pub size: Option<usize>,
    /// Explicit tensor shape, comma separated (synth, mask).
    #[arg(long, value_delimiter = ',')]
    pub shape: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub kind: Option<SynthKind>,
    /// Synthetic image size HEIGHTxWIDTH (synth --kind scene).
    #[arg(long)]
    pub image_size: Option<Dims>,
    /// Sampling rate in (0, 1].
    #[arg(long)]
    pub sr: Option<f64>,
    /// Random seed for generation, masks and ALS padding.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Iteration cap of the solver.
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// Stop once the relative change between iterates drops below this.
    #[arg(long)]
    pub rc_tol: Option<f64>,
    /// Singular-value ratio threshold of a-pmac-tg.
    #[arg(long)]
    pub sv_threshold: Option<f64>,
    /// Return observed entries as given (`true`) or as fitted (`false`).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub clamp_observed: Option<bool>,
    /// Scale of the random padding in the ALS initialization.
    #[arg(long)]
    pub pad_sigma: Option<f64>,

    /// Input tensor.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Mask tensor (1 observed, 0 missing).
    #[arg(long)]
    pub mask: Option<PathBuf>,
    /// Ground truth tensor for metrics.
    #[arg(long)]
    pub truth: Option<PathBuf>,
    /// Estimate tensor (eval).
    #[arg(long)]
    pub estimate: Option<PathBuf>,
    /// Tensorization plan (JSON).
    #[arg(long)]
    pub plan: Option<PathBuf>,
    /// Input image (tensorize).
    #[arg(long)]
    pub image: Option<PathBuf>,
    /// Directory of video frames (tensorize).
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Keep every n-th pixel of each frame.
    #[arg(long)]
    pub decimate: Option<usize>,
    /// Black-on-white text image whose dark pixels are missing (mask).
    #[arg(long)]
    pub mask_image: Option<PathBuf>,
    /// Turn a tensor back into an image or frames (tensorize).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    pub inverse: Option<bool>,
    /// Directory for the generating factors (synth).
    #[arg(long)]
    pub factors: Option<PathBuf>,
    /// JSON-lines solver report; standard output when absent.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Output file (or directory, for frames).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

macro_rules! overlay {
    ($base:ident, $over:ident; $($f:ident),* $(,)?) => {
        ExperimentConfig { $($f: $over.$f.or($base.$f)),* }
    };
}

impl ExperimentConfig {
    /// Reads a JSON config. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.for_each_path(|p| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        });
        Ok(cfg)
    }

    fn for_each_path(&mut self, mut f: impl FnMut(&mut PathBuf)) {
        for p in [
            &mut self.data,
            &mut self.mask,
            &mut self.truth,
            &mut self.estimate,
            &mut self.plan,
            &mut self.image,
            &mut self.frames,
            &mut self.mask_image,
            &mut self.factors,
            &mut self.report,
            &mut self.out,
        ]
        .into_iter()
        .flatten()
        {
            f(p);
        }
    }

    /// Values set in `over` win.
    pub fn merged(self, over: Self) -> Self {
        overlay!(self, over;
            task, solver, grid, ranks, size, shape, kind, image_size, sr, seed,
            max_iters, rc_tol, sv_threshold, clamp_observed, pad_sigma,
            data, mask, truth, estimate, plan, image, frames, decimate,
            mask_image, inverse, factors, report, out,
        )
    }

    /// Input files named by the config that must already exist.
    pub fn check_inputs(&self, task: Task) -> Result<()> {
        let inputs: Vec<&PathBuf> = match task {
            Task::Synth => vec![],
            Task::Mask => [&self.data, &self.mask_image, &self.plan].into_iter().flatten().collect(),
            Task::Tensorize => [&self.image, &self.frames, &self.data, &self.plan]
                .into_iter()
                .flatten()
                .collect(),
            Task::Complete => [&self.data, &self.mask, &self.truth, &self.plan]
                .into_iter()
                .flatten()
                .collect(),
            Task::Eval => [&self.estimate, &self.truth, &self.plan].into_iter().flatten().collect(),
        };
        for p in inputs {
            if !p.exists() {
                return Err(CliError::io(
                    p,
                    std::io::Error::new(std::io::ErrorKind::NotFound, "no such file or directory"),
                ));
            }
        }
        Ok(())
    }
}

/// `value` or a validation error naming the missing setting.
pub fn require<'a, T>(value: &'a Option<T>, name: &str, task: Task) -> Result<&'a T> {
    value
        .as_ref()
        .ok_or_else(|| CliError::config(format!("{task:?} needs `{name}`").to_lowercase()))
}
