use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use tengrid::als::{als_tg_complete, AlsConfig};
use tengrid::imaging::{
    detensorize, detensorize_frames, metric_psnr, metric_re, metric_ssim, read_frames, read_image,
    sample_uniform, synthetic_scene, tensorize, tensorize_frames, text_mask, write_frames, write_image,
    TensorizationPlan,
};
use tengrid::pmac::{pmac_tg_complete, PmacConfig, RankSpec};
use tengrid::report::Metrics;
use tengrid::tensor::{read_tensor, write_tensor};
use tengrid::tg::{save_grid, tg_random, GridShape, TgRanks};
use tengrid::tt::tt_random;
use tengrid::{ObservationMask, Tensor};

use crate::config::{require, ExperimentConfig, RankArg, Solver, SynthKind, Task};
use crate::error::{CliError, Result};

pub fn run(task: Task, cfg: &ExperimentConfig) -> Result<()> {
    cfg.check_inputs(task)?;
    match task {
        Task::Synth => synth(cfg),
        Task::Mask => mask(cfg),
        Task::Tensorize => tensorize_cmd(cfg),
        Task::Complete => complete(cfg),
        Task::Eval => eval(cfg),
    }
}

fn note(msg: impl AsRef<str>) {
    eprintln!("tengrid: {}", msg.as_ref());
}

fn read_plan(path: &Path) -> Result<TensorizationPlan> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl serde::Serialize) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))
}

/// `out` with its extension replaced by `ext`.
fn sibling(out: &Path, ext: &str) -> PathBuf {
    out.with_extension(ext)
}

fn grid_shape(cfg: &ExperimentConfig, task: Task) -> Result<GridShape> {
    let g = require(&cfg.grid, "grid", task)?;
    Ok(match (&cfg.shape, cfg.size) {
        (Some(shape), _) => GridShape::new(g.0, g.1, shape.clone())?,
        (None, Some(size)) => GridShape::uniform(g.0, g.1, size)?,
        (None, None) => return Err(CliError::config("synth needs `shape` or `size`")),
    })
}

fn tg_ranks(rows: usize, cols: usize, ranks: &RankArg) -> Result<TgRanks> {
    Ok(match ranks {
        RankArg::Uniform(r) => TgRanks::uniform(rows, cols, *r)?,
        RankArg::List(v) => TgRanks::from_vector(rows, cols, v)?,
        RankArg::Auto => return Err(CliError::config("tensor-grid bonds cannot be `auto`")),
    })
}

fn synth(cfg: &ExperimentConfig) -> Result<()> {
    let task = Task::Synth;
    let out = require(&cfg.out, "out", task)?;
    let seed = cfg.seed.unwrap_or(0);
    match cfg.kind.unwrap_or_default() {
        SynthKind::Tg => {
            let shape = grid_shape(cfg, task)?;
            let ranks = tg_ranks(shape.rows(), shape.cols(), require(&cfg.ranks, "ranks", task)?)?;
            let grid = tg_random::<f64>(&shape, &ranks, seed)?;
            write_tensor(&grid.contract()?, out)?;
            let dir = cfg.factors.clone().unwrap_or_else(|| sibling(out, "grid"));
            save_grid(&grid, &dir)?;
            note(format!("wrote {} and factors in {}", out.display(), dir.display()));
        }
        SynthKind::Tt => {
            let shape = match (&cfg.shape, cfg.size, cfg.grid) {
                (Some(s), _, _) => s.clone(),
                (None, Some(size), Some(g)) => vec![size; g.0 * g.1],
                _ => return Err(CliError::config("synth --kind tt needs `shape`, or `size` with `grid`")),
            };
            let ranks = match require(&cfg.ranks, "ranks", task)? {
                RankArg::Uniform(r) => vec![*r; shape.len().saturating_sub(1)],
                RankArg::List(v) => v.clone(),
                RankArg::Auto => return Err(CliError::config("train ranks cannot be `auto`")),
            };
            let train = tt_random::<f64>(&shape, &ranks, seed)?;
            write_tensor(&train.contract()?, out)?;
            let dir = cfg.factors.clone().unwrap_or_else(|| sibling(out, "train"));
            fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
            for (k, core) in train.cores().iter().enumerate() {
                write_tensor(core, dir.join(format!("core_{k}.tgt")))?;
            }
            write_json(
                &dir.join("manifest.json"),
                &serde_json::json!({ "sizes": shape, "ranks": train.ranks() }),
            )?;
            note(format!("wrote {} and factors in {}", out.display(), dir.display()));
        }
        SynthKind::Scene => {
            let dims = cfg.image_size.unwrap_or(crate::config::Dims(256, 256));
            write_image(&synthetic_scene(dims.0, dims.1, seed)?, out)?;
            note(format!("wrote {}", out.display()));
        }
    }
    Ok(())
}

fn mask(cfg: &ExperimentConfig) -> Result<()> {
    let task = Task::Mask;
    let out = require(&cfg.out, "out", task)?;
    let mask = if let Some(img) = &cfg.mask_image {
        let plan = read_plan(require(&cfg.plan, "plan", task)?)?;
        text_mask(&read_image(img)?, &plan)?
    } else {
        let sr = *require(&cfg.sr, "sr", task)?;
        let shape = match (&cfg.data, &cfg.shape) {
            (Some(data), _) => read_tensor::<f64>(data)?.shape().to_vec(),
            (None, Some(shape)) => shape.clone(),
            (None, None) => return Err(CliError::config("mask needs `data` or `shape` (or `mask_image`)")),
        };
        sample_uniform(&shape, sr, cfg.seed.unwrap_or(0))?
    };
    mask.write(out)?;
    note(format!(
        "wrote {} ({} of {} entries observed)",
        out.display(),
        mask.count(),
        mask.len()
    ));
    Ok(())
}

fn tensorize_cmd(cfg: &ExperimentConfig) -> Result<()> {
    let task = Task::Tensorize;
    let out = require(&cfg.out, "out", task)?;
    let plan = read_plan(require(&cfg.plan, "plan", task)?)?;
    if cfg.inverse.unwrap_or(false) {
        let t = read_tensor::<f64>(require(&cfg.data, "data", task)?)?;
        if plan.frames() == 1 {
            write_image(&detensorize(&t, &plan)?, out)?;
        } else {
            write_frames(&detensorize_frames(&t, &plan)?, out)?;
        }
    } else {
        let t = match (&cfg.image, &cfg.frames) {
            (Some(img), None) => tensorize(&read_image(img)?, &plan)?,
            (None, Some(dir)) => tensorize_frames(&read_frames(dir, cfg.decimate.unwrap_or(1))?, &plan)?,
            _ => return Err(CliError::config("tensorize needs exactly one of `image` and `frames`")),
        };
        note(format!("tensor shape {:?}", t.shape()));
        write_tensor(&t, out)?;
    }
    note(format!("wrote {}", out.display()));
    Ok(())
}

/// RE and PSNR against `truth`, plus SSIM when a plan maps both to images.
fn metrics(estimate: &Tensor, truth: &Tensor, plan: Option<&TensorizationPlan>) -> Result<Metrics> {
    let ssim = match plan {
        Some(p) => {
            let (a, b) = (detensorize_frames(estimate, p)?, detensorize_frames(truth, p)?);
            let total = a
                .iter()
                .zip(&b)
                .map(|(x, y)| metric_ssim(x, y))
                .sum::<tengrid::Result<f64>>()?;
            Some(total / a.len() as f64)
        }
        None => None,
    };
    Ok(Metrics {
        re: Some(metric_re(estimate, truth)?),
        psnr_db: Some(metric_psnr(estimate, truth)?),
        ssim,
    })
}

fn complete(cfg: &ExperimentConfig) -> Result<()> {
    let task = Task::Complete;
    let solver = *require(&cfg.solver, "solver", task)?;
    let data = read_tensor::<f64>(require(&cfg.data, "data", task)?)?;
    let mask = ObservationMask::read(require(&cfg.mask, "mask", task)?)?;
    let out = require(&cfg.out, "out", task)?;
    let g = require(&cfg.grid, "grid", task)?;
    let shape = GridShape::for_tensor(g.0, g.1, data.shape())?;
    mask.check_shape(data.shape())?;
    // Read optional inputs before the solve so bad files fail fast.
    let truth = cfg.truth.as_ref().map(read_tensor::<f64>).transpose()?;
    let plan = match (&truth, &cfg.plan) {
        (Some(_), Some(p)) => Some(read_plan(p)?),
        _ => None,
    };

    let (x, mut report) = match solver {
        Solver::AlsTg => {
            if cfg.sv_threshold.is_some() {
                return Err(CliError::config("`sv_threshold` applies to a-pmac-tg only"));
            }
            let ranks = tg_ranks(g.0, g.1, require(&cfg.ranks, "ranks", task)?)?;
            let mut ac = AlsConfig::new(ranks);
            ac.max_iters = cfg.max_iters.unwrap_or(ac.max_iters);
            ac.rc_tol = cfg.rc_tol.unwrap_or(ac.rc_tol);
            ac.pad_sigma = cfg.pad_sigma.unwrap_or(ac.pad_sigma);
            ac.seed = cfg.seed.unwrap_or(ac.seed);
            let res = als_tg_complete(&data, &mask, &shape, &ac)?;
            let mut x = res.x;
            if cfg.clamp_observed == Some(true) {
                for ((v, &t), &o) in x.data_mut().iter_mut().zip(data.data()).zip(mask.observed()) {
                    if o {
                        *v = t;
                    }
                }
            }
            (x, res.report)
        }
        Solver::PmacTg | Solver::APmacTg => {
            if cfg.pad_sigma.is_some() {
                return Err(CliError::config("`pad_sigma` applies to als-tg only"));
            }
            let spec = match (solver, &cfg.ranks) {
                (Solver::APmacTg, None | Some(RankArg::Auto)) => RankSpec::Auto,
                (Solver::APmacTg, Some(_)) => {
                    return Err(CliError::config("a-pmac-tg picks its own ranks; drop `ranks`"))
                }
                (_, Some(RankArg::Uniform(r))) => RankSpec::Uniform(*r),
                (_, Some(RankArg::List(v))) => RankSpec::Fixed(v.clone()),
                (_, Some(RankArg::Auto)) => RankSpec::Auto,
                (_, None) => return Err(CliError::config("pmac-tg needs `ranks` (or use a-pmac-tg)")),
            };
            if cfg.sv_threshold.is_some() && spec != RankSpec::Auto {
                return Err(CliError::config("`sv_threshold` applies to a-pmac-tg only"));
            }
            let mut pc = PmacConfig::new(spec);
            pc.max_iters = cfg.max_iters.unwrap_or(pc.max_iters);
            pc.rc_tol = cfg.rc_tol.unwrap_or(pc.rc_tol);
            pc.sv_threshold = cfg.sv_threshold.unwrap_or(pc.sv_threshold);
            pc.clamp_observed = cfg.clamp_observed.unwrap_or(pc.clamp_observed);
            let res = pmac_tg_complete(&data, &mask, &shape, &pc)?;
            (res.x, res.report)
        }
    };

    if let Some(truth) = &truth {
        report.metrics = metrics(&x, truth, plan.as_ref())?;
    }
    write_tensor(&x, out)?;
    match &cfg.report {
        Some(path) => {
            let f = fs::File::create(path).map_err(|e| CliError::io(path, e))?;
            report
                .write_json_lines(std::io::BufWriter::new(f))
                .map_err(|e| CliError::io(path, e))?;
        }
        None => {
            let stdout = std::io::stdout();
            report
                .write_json_lines(stdout.lock())
                .map_err(|e| CliError::io("<stdout>", e))?;
        }
    }
    note(format!(
        "{} finished after {} iterations ({:?}); wrote {}",
        report.solver,
        report.iterations.len(),
        report.termination,
        out.display()
    ));
    Ok(())
}

fn eval(cfg: &ExperimentConfig) -> Result<()> {
    let task = Task::Eval;
    let estimate = read_tensor::<f64>(require(&cfg.estimate, "estimate", task)?)?;
    let truth = read_tensor::<f64>(require(&cfg.truth, "truth", task)?)?;
    let plan = cfg.plan.as_deref().map(read_plan).transpose()?;
    let m = metrics(&estimate, &truth, plan.as_ref())?;
    let text = serde_json::to_string(&m).expect("serializable");
    match &cfg.out {
        Some(path) => fs::write(path, text + "\n").map_err(|e| CliError::io(path, e))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            writeln!(stdout, "{text}").map_err(|e| CliError::io("<stdout>", e))?;
        }
    }
    Ok(())
}
