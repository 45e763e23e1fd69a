use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::json;

use slicematch::io::{
    ortho_to_csv, read_measure, read_measure_csv, read_ortho_csv, render_measure, write_intensity_image,
    write_measure_csv,
};
use slicematch::slicing::domain;
use slicematch::{
    apply_operator, iterate, register_axis_scaling, register_scale_shift, register_translation, sample_haar_orthogonal,
    sliced_residual, stream_rng, sw2, w2_exact, DiscreteMeasure, DistanceKind, IterateOptions, IterationTrace,
    McEstimate, Moments, OrthoMatrix, RegisteredMap, RegistrationReport, Sampler, StepRule, StepSchedule, Sw2Config,
};

use crate::plot::decay_plot;
use crate::Failure;

pub enum BasisSource {
    File(PathBuf),
    Haar(u64),
    Angle(f64),
}

fn ensure_inputs(paths: &[&Path]) -> Result<(), Failure> {
    for p in paths {
        if !p.is_file() {
            return Err(Failure::usage(format!("input file {} does not exist", p.display())));
        }
    }
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<(), Failure> {
    println!("{}", serde_json::to_string_pretty(value).expect("report serializes"));
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

pub fn cmd_match(src: &Path, dst: &Path, basis: BasisSource, out: &Path) -> Result<(), Failure> {
    ensure_inputs(&[src, dst])?;
    let (sigma, _) = read_measure(src)?;
    let (mu, dst_grid) = read_measure(dst)?;
    if sigma.dim() != mu.dim() {
        return Err(slicematch::Error::DimensionMismatch {
            expected: sigma.dim(),
            found: mu.dim(),
        }
        .into());
    }
    let n = sigma.dim();
    let (p, provenance) = match basis {
        BasisSource::File(path) => {
            ensure_inputs(&[&path])?;
            (read_ortho_csv(&path)?, json!({ "kind": "file" }))
        }
        BasisSource::Haar(seed) => (
            sample_haar_orthogonal(&mut stream_rng(seed, domain::ITERATE, 0), n),
            json!({ "kind": "haar", "seed": seed, "stream": { "domain": domain::ITERATE, "index": 0 } }),
        ),
        BasisSource::Angle(a) => {
            if n != 2 {
                return Err(Failure::usage("--angle needs two-dimensional inputs"));
            }
            (OrthoMatrix::rotation_2d(a), json!({ "kind": "angle", "angle": a }))
        }
    };
    let u = apply_operator(&sigma, &mu, &p)?;
    let residual = sliced_residual(&sigma, &mu, &p)?;

    fs::create_dir_all(out)?;
    write_measure_csv(&out.join("matched.csv"), &u)?;
    let mut summary = json!({
        "basis": p.rows(),
        "basis_source": provenance,
        "moments": {
            "source": sigma.moments(),
            "target": mu.moments(),
            "matched": u.moments(),
        },
        "sliced_residual": residual,
    });
    if let Some(grid) = dst_grid {
        let (rendered, lost) = render_measure(&u, grid.height, grid.width)?;
        write_intensity_image(&out.join("matched.png"), &rendered)?;
        summary["rendered_mass_outside_grid"] = json!(lost);
    }
    write_json(&out.join("summary.json"), &summary)
}

pub struct IterateArgs {
    pub src: PathBuf,
    pub dst: PathBuf,
    pub schedule: String,
    pub sampler: Sampler,
    pub iterations: usize,
    pub seed: u64,
    pub tol: f64,
    pub exact_w2: bool,
}

pub fn cmd_iterate(args: &IterateArgs, out: &Path) -> Result<(), Failure> {
    let rule: StepRule = args.schedule.parse().map_err(|e: slicematch::Error| Failure::usage(e.to_string()))?;
    if args.iterations == 0 {
        return Err(Failure::usage("-K must be at least 1"));
    }
    ensure_inputs(&[&args.src, &args.dst])?;
    let schedule = StepSchedule::new(rule, args.iterations).map_err(|e| Failure::usage(e.to_string()))?;
    let (sigma, _) = read_measure(&args.src)?;
    let (mu, _) = read_measure(&args.dst)?;
    let options = IterateOptions {
        tolerance: args.tol,
        record_w2_exact: args.exact_w2,
    };
    let (trace, last) = iterate(&sigma, &mu, &schedule, args.sampler, args.seed, &options)?;
    fs::create_dir_all(out)?;
    fs::write(out.join("trace.jsonl"), trace.to_json_lines())?;
    write_measure_csv(&out.join("final.csv"), &last)?;
    Ok(())
}

pub fn cmd_register(
    src: &Path,
    dst: &Path,
    model: &str,
    kind: DistanceKind,
    dirs: usize,
    seed: Option<u64>,
    strict: bool,
) -> Result<(), Failure> {
    let sw2_config = match (kind, seed) {
        (DistanceKind::SW2, Some(seed)) => Some(Sw2Config {
            num_directions: dirs,
            seed,
        }),
        (DistanceKind::SW2, None) => return Err(Failure::usage("--distance sw2 needs --seed")),
        (DistanceKind::W2, _) => None,
    };
    ensure_inputs(&[src, dst])?;
    let (sigma, _) = read_measure(src)?;
    let (eta, _) = read_measure(dst)?;

    let report = match model {
        "translation" => {
            let map = register_translation(&sigma, &eta)?;
            let pushed = sigma.pushforward(&map)?;
            let objective = match &sw2_config {
                Some(cfg) => sw2(&pushed, &eta, cfg.num_directions, cfg.seed)?.value_sq,
                None => w2_exact(&pushed, &eta)?.powi(2),
            };
            RegistrationReport {
                map: RegisteredMap::ScaleShift(map),
                objective,
                distance_kind: kind,
                degenerate: false,
                sw2_sq_std_error: None,
                sw2: sw2_config,
                axis: None,
            }
        }
        "scale-shift" => register_scale_shift(&sigma, &eta, kind, sw2_config.as_ref())?,
        other => match other.strip_prefix("axis:") {
            Some(path) => {
                if kind != DistanceKind::W2 {
                    return Err(Failure::usage("the axis model is registered under w2 only"));
                }
                let path = Path::new(path);
                ensure_inputs(&[path])?;
                register_axis_scaling(&sigma, &eta, &read_ortho_csv(path)?)?
            }
            None => {
                return Err(Failure::usage(format!(
                    "unknown model `{other}`; expected translation, scale-shift or axis:PATH"
                )))
            }
        },
    };
    print_json(&report)?;
    if strict && report.degenerate {
        return Err(Failure::degenerate("registration flagged degenerate"));
    }
    Ok(())
}

pub fn cmd_w2(a: &Path, b: &Path) -> Result<(), Failure> {
    ensure_inputs(&[a, b])?;
    let value = w2_exact(&read_measure(a)?.0, &read_measure(b)?.0)?;
    print_json(&json!({ "value": value }))
}

pub fn cmd_sw2(a: &Path, b: &Path, dirs: usize, seed: u64) -> Result<(), Failure> {
    if dirs == 0 {
        return Err(Failure::usage("--dirs must be at least 1"));
    }
    ensure_inputs(&[a, b])?;
    let est = sw2(&read_measure(a)?.0, &read_measure(b)?.0, dirs, seed)?;
    print_json(&est)
}

pub fn cmd_make_ortho(dim: usize, seed: u64) -> Result<(), Failure> {
    if dim == 0 {
        return Err(Failure::usage("--dim must be at least 1"));
    }
    let p = sample_haar_orthogonal(&mut stream_rng(seed, domain::MAKE_ORTHO, 0), dim);
    print!("{}", ortho_to_csv(&p));
    Ok(())
}

struct StepRow {
    residual: McEstimate,
    ratio: McEstimate,
    shift_ratio: Option<McEstimate>,
}

pub fn cmd_report(traces: &[PathBuf], target: Option<&Path>, out: &Path) -> Result<(), Failure> {
    if traces.is_empty() {
        return Err(Failure::usage("no trace files given"));
    }
    let refs: Vec<&Path> = traces.iter().map(PathBuf::as_path).collect();
    ensure_inputs(&refs)?;
    let target_mean = match target {
        Some(t) => {
            ensure_inputs(&[t])?;
            Some(read_target_moments(t)?.mean)
        }
        None => None,
    };
    let loaded = traces
        .iter()
        .map(|p| {
            let t = IterationTrace::from_json_lines(&fs::read_to_string(p)?)?;
            if t.is_empty() {
                return Err(slicematch::Error::Parse(format!("{} holds no records", p.display())));
            }
            Ok(t)
        })
        .collect::<slicematch::Result<Vec<_>>>()?;

    let steps = loaded.iter().map(IterationTrace::len).max().unwrap_or(0);
    let mut rows = Vec::with_capacity(steps);
    for k in 0..steps {
        let mut residual = Vec::new();
        let mut ratio = Vec::new();
        let mut shift = Vec::new();
        for t in &loaded {
            let Some(r) = t.records.get(k) else { continue };
            residual.push(r.sliced_residual);
            let r0 = t.records[0].sliced_residual;
            if r0 > 0.0 {
                ratio.push(r.sliced_residual / r0);
            }
            if let Some(m) = &target_mean {
                let d0 = offset_sq(&t.records[0].mean, m)?;
                if d0 > 0.0 {
                    shift.push(offset_sq(&r.mean, m)? / d0);
                }
            }
        }
        rows.push(StepRow {
            residual: McEstimate::from_samples(&residual),
            ratio: McEstimate::from_samples(&ratio),
            shift_ratio: target_mean.as_ref().map(|_| McEstimate::from_samples(&shift)),
        });
    }

    fs::create_dir_all(out)?;
    let mut table = String::from("k,traces,residual_mean,residual_se,ratio_mean,ratio_se");
    if target_mean.is_some() {
        table.push_str(",shift_ratio_mean,shift_ratio_se");
    }
    table.push('\n');
    for (k, row) in rows.iter().enumerate() {
        table.push_str(&format!(
            "{k},{},{:?},{:?},{:?},{:?}",
            row.residual.samples, row.residual.mean, row.residual.std_error, row.ratio.mean, row.ratio.std_error
        ));
        if let Some(s) = &row.shift_ratio {
            table.push_str(&format!(",{:?},{:?}", s.mean, s.std_error));
        }
        table.push('\n');
    }
    fs::write(out.join("summary.csv"), table)?;

    let curve: Vec<f64> = rows
        .iter()
        .map(|r| r.shift_ratio.map_or(r.ratio.mean, |s| s.mean))
        .collect();
    decay_plot(&curve)
        .save(out.join("decay.png"))
        .map_err(|e| slicematch::Error::Image(e.to_string()))?;
    Ok(())
}

fn read_target_moments(path: &Path) -> slicematch::Result<Moments> {
    let m: DiscreteMeasure = if slicematch::io::is_image_path(path) {
        read_measure(path)?.0
    } else {
        read_measure_csv(path)?
    };
    Ok(m.moments())
}

fn offset_sq(mean: &[f64], target: &[f64]) -> slicematch::Result<f64> {
    if mean.len() != target.len() {
        return Err(slicematch::Error::DimensionMismatch {
            expected: target.len(),
            found: mean.len(),
        });
    }
    Ok(mean.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum())
}
