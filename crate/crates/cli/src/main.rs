use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use frameforge::experiments::{
    coordinate_prefix, exp_dichotomy, exp_example23, exp_example23_on, exp_incomparable, exp_pipeline,
    ExperimentReport, PipelineConfig, DEFAULT_SEED,
};
use frameforge::frame::{BuiltinFrame, PatchedFrame};
use frameforge::scalar::parse_scalar;
use frameforge::{
    domination_probe, find_schedule, frame_constant, k_subnorm, min_norm, nk_norm, split_operator,
    subsequence_norm, validate_schedule, verify_pel, AmbientSpace, CoefVector, Example23, FiniteRankOperator,
    FrameError, FrameProvider, FrameSpec, KIndexSet, NkSchedule, NormReport, SplitRule, SplitSystem,
};

#[derive(Parser)]
#[command(name = "frameforge", version, about = "Exact Schauder-frame norms, schedules and splittings")]
struct Cli {
    /// Seed for every randomized family.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Write the JSON result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Group,
}

#[derive(Subcommand)]
enum Group {
    /// Inspect a frame description.
    #[command(subcommand)]
    Frame(FrameCmd),
    /// Evaluate or compare associated norms.
    #[command(subcommand)]
    Norm(NormCmd),
    /// Search and validate composition-decay schedules.
    #[command(subcommand)]
    Nk(NkCmd),
    /// Split finite-rank operators and assemble frames from them.
    #[command(subcommand)]
    Pel(PelCmd),
    /// Run a packaged experiment.
    #[command(subcommand)]
    Exp(ExpCmd),
}

#[derive(Args)]
struct SpecArg {
    /// Frame spec JSON path, or `example23`, `canonical`, `canonical:L1`.
    #[arg(long, default_value = "example23")]
    spec: String,
}

#[derive(Args)]
struct SchedArg {
    /// Schedule: `k+1`, `2k+3`, `3,5,8`, a JSON file, or `find`.
    #[arg(long, default_value = "find")]
    sched: String,
    /// Depth for `--sched find`.
    #[arg(long, default_value_t = 12)]
    kmax: usize,
}

#[derive(Subcommand)]
enum FrameCmd {
    Info {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 12)]
        horizon: usize,
    },
}

#[derive(Subcommand)]
enum NormCmd {
    Eval {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        sched: SchedArg,
        /// `1:1/2,3:-2`, a JSON triple list, or a file holding one.
        #[arg(long = "vec")]
        vector: String,
        /// `min`, `nk`, `k=K` or `subseq=K-SET`.
        #[arg(long, default_value = "nk")]
        mode: String,
    },
    Compare {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        sched: SchedArg,
        /// JSON file with a list of vectors.
        #[arg(long)]
        family: PathBuf,
        #[arg(long, default_value = "nk")]
        a: String,
        #[arg(long, default_value = "min")]
        b: String,
        /// CSV side table (defaults to the `--out` path with a .csv extension).
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum NkCmd {
    Find {
        #[command(flatten)]
        spec: SpecArg,
        #[arg(long, default_value_t = 12)]
        kmax: usize,
    },
    Validate {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        sched: SchedArg,
        #[arg(long, default_value_t = 50)]
        horizon: usize,
    },
}

#[derive(Subcommand)]
enum PelCmd {
    Split {
        /// Operator JSON file.
        #[arg(long)]
        op: PathBuf,
        #[arg(long)]
        m: usize,
    },
    Verify {
        /// Split system JSON file.
        #[arg(long)]
        sys: PathBuf,
    },
    Assemble {
        /// Operator list JSON file or `coordinate:N[:SPACE]`.
        #[arg(long)]
        ops: String,
        #[arg(long, default_value = "m_k=k*d_k")]
        rule: String,
        /// JSON file with the vectors on which `Σ A_k x = x` is checked.
        #[arg(long)]
        test_family: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExpCmd {
    Example23 {
        /// Run against the frame with `x_3` moved to `e_9`.
        #[arg(long)]
        corrupt: bool,
    },
    Incomparable {
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4")]
        l: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "2,4")]
        m: Vec<usize>,
    },
    Dichotomy {
        #[command(flatten)]
        spec: SpecArg,
        #[command(flatten)]
        sched: SchedArg,
        /// JSON file with the block list, or `odd` / `even` for the
        /// packaged families.
        #[arg(long, default_value = "odd")]
        blocks: String,
    },
    Pipeline {
        #[arg(long, default_value = "coordinate:8")]
        ops: String,
        #[arg(long, default_value = "m_k=k")]
        rule: String,
        #[arg(long)]
        test_family: Option<PathBuf>,
        #[arg(long, default_value_t = 8)]
        kmax: usize,
        /// Validation box extends this far past the last schedule value.
        #[arg(long, default_value_t = 20)]
        horizon: usize,
    },
}

#[derive(Clone, Copy, PartialEq)]
enum Precision {
    Exact,
    Float64,
}

fn precision() -> Result<Precision> {
    match std::env::var("FRAMEFORGE_PRECISION").as_deref() {
        Err(_) | Ok("") | Ok("exact") => Ok(Precision::Exact),
        Ok("float64") => Ok(Precision::Float64),
        Ok(other) => bail!("FRAMEFORGE_PRECISION must be exact or float64, got {other:?}"),
    }
}

struct Output {
    out: Option<PathBuf>,
    precision: Precision,
}

/// Drops exact rational fields, leaving the float approximations.
fn strip_exact(v: &mut Value) {
    match v {
        Value::Object(map) => {
            map.remove("exact");
            map.values_mut().for_each(strip_exact);
        }
        Value::Array(items) => items.iter_mut().for_each(strip_exact),
        _ => {}
    }
}

impl Output {
    fn emit<T: Serialize>(&self, value: &T) -> Result<()> {
        let mut v = serde_json::to_value(value)?;
        if self.precision == Precision::Float64 {
            strip_exact(&mut v);
        }
        let text = serde_json::to_string_pretty(&v)? + "\n";
        match &self.out {
            Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn side_table(&self, explicit: Option<&Path>, csv: &str) -> Result<()> {
        let path = explicit
            .map(Path::to_path_buf)
            .or_else(|| self.out.as_ref().map(|p| p.with_extension("csv")));
        if let Some(p) = path {
            fs::write(&p, csv).with_context(|| format!("writing {}", p.display()))?;
        }
        Ok(())
    }

    fn report(&self, r: &ExperimentReport) -> Result<bool> {
        self.emit(r)?;
        if let Some(csv) = &r.csv {
            self.side_table(None, csv)?;
        }
        Ok(r.passed)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn load_spec(arg: &str) -> Result<FrameSpec> {
    match arg.split_once(':') {
        _ if arg == "example23" => Ok(FrameSpec::example23()),
        _ if arg == "canonical" => Ok(FrameSpec::canonical(AmbientSpace::L2)),
        Some(("canonical", sp)) => Ok(FrameSpec::canonical(sp.parse()?)),
        _ => Ok(FrameSpec::from_path(arg).with_context(|| format!("loading frame spec {arg}"))?),
    }
}

fn load_frame(arg: &str) -> Result<BuiltinFrame> {
    Ok(load_spec(arg)?.build()?)
}

fn load_schedule(frame: &BuiltinFrame, s: &SchedArg) -> Result<NkSchedule> {
    if s.sched == "find" {
        return Ok(find_schedule(frame, s.kmax).context("nk find")?);
    }
    Ok(NkSchedule::load(&s.sched)?)
}

fn parse_vector(arg: &str) -> Result<CoefVector> {
    let t = arg.trim();
    if t.starts_with('[') {
        return Ok(serde_json::from_str(t)?);
    }
    if Path::new(t).is_file() {
        return read_json(Path::new(t));
    }
    let mut pairs = Vec::new();
    for item in t.split(',').filter(|s| !s.trim().is_empty()) {
        let (i, v) = item
            .split_once(':')
            .ok_or_else(|| anyhow!("expected index:value, got {item:?}"))?;
        let i: usize = i.trim().parse().with_context(|| format!("bad index {i:?}"))?;
        if i == 0 {
            bail!("indices start at 1");
        }
        pairs.push((i, parse_scalar(v.trim())?));
    }
    Ok(CoefVector::from_pairs(pairs))
}

fn evaluate(frame: &BuiltinFrame, sched: &NkSchedule, a: &CoefVector, mode: &str) -> frameforge::Result<NormReport> {
    let r = match mode.split_once('=') {
        _ if mode == "min" => min_norm(frame, a),
        _ if mode == "nk" => nk_norm(frame, a, sched)?,
        Some(("k", k)) => {
            sched.require_increasing()?;
            let k = k.parse().map_err(|_| FrameError::Parse(format!("bad k {k:?}")))?;
            k_subnorm(frame, a, k, sched)
        }
        Some(("subseq", ks)) => subsequence_norm(frame, a, &ks.parse::<KIndexSet>()?, sched)?,
        _ => {
            return Err(FrameError::Parse(format!(
                "unknown norm mode {mode:?}; use min, nk, k=K or subseq=SET"
            )))
        }
    };
    Ok(r)
}

fn load_ops(arg: &str) -> Result<Vec<FiniteRankOperator>> {
    if let Some(rest) = arg.strip_prefix("coordinate:") {
        let (n, sp) = match rest.split_once(':') {
            Some((n, sp)) => (n, sp.parse()?),
            None => (rest, AmbientSpace::L2),
        };
        return Ok(coordinate_prefix(sp, n.parse().with_context(|| format!("bad count {n:?}"))?));
    }
    read_json(Path::new(arg))
}

fn frame_info(frame: &BuiltinFrame, spec: &FrameSpec, horizon: usize) -> Result<Value> {
    let h = frame.clamp(horizon);
    let fc = frame_constant(frame, h)?;
    let generators: Vec<Value> = (1..=h.min(12))
        .map(|i| serde_json::json!({ "i": i, "x": frame.vector_at(i), "f": frame.functional_at(i) }))
        .collect();
    Ok(serde_json::json!({
        "label": frame.label(),
        "space": frame.space(),
        "len": frame.len(),
        "spec": spec,
        "frame_constant": fc,
        "generators": generators,
    }))
}

fn run(cli: Cli) -> Result<bool> {
    let out = Output {
        out: cli.out,
        precision: precision()?,
    };
    let seed = cli.seed;
    match cli.cmd {
        Group::Frame(FrameCmd::Info { spec, horizon }) => {
            let s = load_spec(&spec.spec)?;
            let frame = s.build()?;
            out.emit(&frame_info(&frame, &s, horizon)?)?;
            Ok(true)
        }
        Group::Norm(NormCmd::Eval { spec, sched, vector, mode }) => {
            let frame = load_frame(&spec.spec)?;
            let sched = load_schedule(&frame, &sched)?;
            let a = parse_vector(&vector)?;
            out.emit(&evaluate(&frame, &sched, &a, &mode)?)?;
            Ok(true)
        }
        Group::Norm(NormCmd::Compare { spec, sched, family, a, b, csv }) => {
            let frame = load_frame(&spec.spec)?;
            let sched = load_schedule(&frame, &sched)?;
            let fam: Vec<CoefVector> = read_json(&family)?;
            let w = domination_probe(
                |v| Ok(evaluate(&frame, &sched, v, &a)?.value),
                |v| Ok(evaluate(&frame, &sched, v, &b)?.value),
                &fam,
            )?;
            out.emit(&w)?;
            out.side_table(csv.as_deref(), &w.to_csv())?;
            Ok(true)
        }
        Group::Nk(NkCmd::Find { spec, kmax }) => {
            let frame = load_frame(&spec.spec)?;
            out.emit(&find_schedule(&frame, kmax)?)?;
            Ok(true)
        }
        Group::Nk(NkCmd::Validate { spec, sched, horizon }) => {
            let frame = load_frame(&spec.spec)?;
            let kmax = sched.kmax;
            let sched = load_schedule(&frame, &sched)?;
            let v = validate_schedule(&frame, &sched, kmax, horizon)?;
            out.emit(&v)?;
            Ok(v.passed)
        }
        Group::Pel(PelCmd::Split { op, m }) => {
            let a: FiniteRankOperator = read_json(&op)?;
            out.emit(&split_operator(&a, m)?)?;
            Ok(true)
        }
        Group::Pel(PelCmd::Verify { sys }) => {
            let s: SplitSystem = read_json(&sys)?;
            let r = verify_pel(&s)?;
            out.emit(&r)?;
            Ok(r.passed)
        }
        Group::Pel(PelCmd::Assemble { ops, rule, test_family }) => {
            let mut cfg = PipelineConfig::new(load_ops(&ops)?, rule.parse::<SplitRule>()?);
            if let Some(p) = test_family {
                cfg.test_family = Some(read_json(&p)?);
            }
            let spec = frameforge::experiments::assembled_spec(&cfg);
            spec.build().context("assembling")?;
            out.emit(&spec)?;
            Ok(true)
        }
        Group::Exp(ExpCmd::Example23 { corrupt }) => {
            let r = if corrupt {
                exp_example23_on(&PatchedFrame::new(Example23).with_vector(3, CoefVector::unit(9)), seed)
            } else {
                exp_example23(seed)
            };
            out.report(&r)
        }
        Group::Exp(ExpCmd::Incomparable { l, m }) => out.report(&exp_incomparable(&l, &m, seed)?),
        Group::Exp(ExpCmd::Dichotomy { spec, sched, blocks }) => {
            let frame = load_frame(&spec.spec)?;
            let sched = load_schedule(&frame, &sched)?;
            let fam: Vec<CoefVector> = match blocks.as_str() {
                "odd" => (2..=7)
                    .map(|i: i64| CoefVector::unit(2 * i as usize - 1).scale(&frameforge::scalar::pow2(2 - 2 * i)))
                    .collect(),
                "even" => (1..=5).map(|i| CoefVector::unit(2 * i)).collect(),
                path => read_json(Path::new(path))?,
            };
            out.report(&exp_dichotomy(&frame, &fam, &sched, seed)?)
        }
        Group::Exp(ExpCmd::Pipeline { ops, rule, test_family, kmax, horizon }) => {
            let mut cfg = PipelineConfig::new(load_ops(&ops)?, rule.parse::<SplitRule>()?);
            cfg.k_max = kmax;
            cfg.extra_horizon = horizon;
            if let Some(p) = test_family {
                cfg.test_family = Some(read_json(&p)?);
            }
            out.report(&exp_pipeline(&cfg, seed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
