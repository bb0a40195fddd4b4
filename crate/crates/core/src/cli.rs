//! The `qtm` command line.
//!
//! Exit status: 0 on success, 1 when a check fails (a JSON witness is
//! printed), 2 on usage, parse and file errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::dynamics::{self, Closure, EvolveOptions};
use crate::error::{QtmError, Result};
use crate::graphs::{self, GraphFormat};
use crate::io;
use crate::machines::{self, BtConvention, BuiltinId, ErasurePathState, InterferometerSeed};
use crate::operators::{random_basis_vector, StepOperator};
use crate::paths::{self, PathOptions, VerifiedPath, Window};
use crate::state::{BasisVector, QuditLattice, WaveState};

#[derive(Parser, Debug)]
#[command(
    name = "qtm",
    version,
    about = "Step-operator quantum Turing machine simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Locality and homogeneity checks plus the computation-basis DPG decision
    Validate(ValidateArgs),
    /// Generate a path from a state and verify distinct path generation
    Path(PathArgs),
    /// Check that powers of T are partial isometries on a sample
    Isometry(IsometryArgs),
    /// Spectrum of H restricted to a verified path
    Spectrum(SpectrumArgs),
    /// Amplitudes of exp(-iHt) applied to a state
    Evolve(EvolveArgs),
    /// Computation-basis graph of the forward path
    Graph(GraphArgs),
}

#[derive(Args, Debug)]
struct Common {
    /// `builtin:NAME` or a machine file
    #[arg(long)]
    machine: String,
    /// Print JSON instead of text
    #[arg(long)]
    json: bool,
    /// Write the main output to this file
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Tolerances {
    #[arg(long, default_value_t = paths::EPS_ORTH)]
    eps_orth: f64,
    #[arg(long, default_value_t = paths::EPS_TERMINAL)]
    eps_terminal: f64,
}

impl Tolerances {
    fn options(&self) -> PathOptions {
        PathOptions {
            eps_orth: self.eps_orth,
            eps_terminal: self.eps_terminal,
        }
    }
}

#[derive(Args, Debug)]
struct ValidateArgs {
    #[command(flatten)]
    common: Common,
    /// Random inputs for the locality check
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Debug)]
struct PathArgs {
    #[command(flatten)]
    common: Common,
    /// State spec or state file
    #[arg(long)]
    state: String,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    #[arg(long, default_value_t = 20)]
    back_steps: usize,
    #[command(flatten)]
    tol: Tolerances,
}

#[derive(Args, Debug)]
struct IsometryArgs {
    #[command(flatten)]
    common: Common,
    /// Largest power n
    #[arg(long, default_value_t = 3)]
    steps: usize,
    /// Sample the basis vectors of this state instead of random ones
    #[arg(long)]
    state: Option<String>,
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Half width of the truncation window
    #[arg(long, default_value_t = 40)]
    window: i64,
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

#[derive(Args, Debug)]
struct SpectrumArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    state: String,
    #[arg(long, default_value_t = 20)]
    steps: usize,
    #[arg(long, default_value_t = 20)]
    back_steps: usize,
    #[arg(long = "K", default_value_t = 1.0)]
    k: f64,
    #[command(flatten)]
    tol: Tolerances,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Method {
    Expm,
    Pathsum,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ClosureArg {
    Basis,
    Orbit,
}

#[derive(Args, Debug)]
struct EvolveArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    state: String,
    #[arg(long = "K", default_value_t = 1.0)]
    k: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    time: f64,
    #[arg(long, value_enum, default_value_t = Method::Expm)]
    method: Method,
    #[arg(long, value_enum, default_value_t = ClosureArg::Basis)]
    closure: ClosureArg,
    /// Closure depth; default 2*ceil(K|t|)+20
    #[arg(long)]
    depth: Option<usize>,
    /// Half width of the truncation window
    #[arg(long)]
    window: Option<i64>,
    /// Series order for the path sum
    #[arg(long, default_value_t = 30)]
    n_max: usize,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Dot,
    Json,
}

#[derive(Args, Debug)]
struct GraphArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long)]
    state: String,
    #[arg(long, default_value_t = 10)]
    steps: usize,
    #[arg(long, value_enum, default_value_t = FormatArg::Dot)]
    format: FormatArg,
    #[arg(long, default_value_t = graphs::NODE_EPS)]
    eps: f64,
}

/// Parses `argv` (including the program name) and runs the subcommand.
pub fn run_command<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run_command`] with explicit output streams.
pub fn run_with_io<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

struct Outcome {
    text: String,
    json: Value,
    failed: bool,
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let (common, outcome) = match cmd {
        Command::Validate(a) => {
            let o = validate(&a)?;
            (a.common, o)
        }
        Command::Path(a) => {
            let o = path(&a)?;
            (a.common, o)
        }
        Command::Isometry(a) => {
            let o = isometry(&a)?;
            (a.common, o)
        }
        Command::Spectrum(a) => {
            let o = spectrum(&a)?;
            (a.common, o)
        }
        Command::Evolve(a) => {
            let o = evolve(&a, err)?;
            (a.common, o)
        }
        Command::Graph(a) => return graph(&a, out, err),
    };
    let body = if common.json {
        let mut s = serde_json::to_string_pretty(&outcome.json)?;
        s.push('\n');
        s
    } else {
        outcome.text
    };
    emit(&body, common.out.as_deref(), out)?;
    if outcome.failed {
        if !common.json {
            // the witness is always machine readable
            let w = outcome.json.get("witness").cloned().unwrap_or(Value::Null);
            writeln!(err, "{}", serde_json::to_string(&w)?)?;
        }
        Ok(1)
    } else {
        Ok(0)
    }
}

fn emit(body: &str, path: Option<&Path>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, body)?,
        None => out.write_all(body.as_bytes())?,
    }
    Ok(())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report serializes")
}

/// Resolves `builtin:NAME` or loads a machine file.
pub fn resolve_machine(spec: &str) -> Result<StepOperator> {
    if spec.starts_with("builtin:") {
        machines::builtin(&spec.parse::<BuiltinId>()?)
    } else {
        io::load_machine(spec)
    }
}

fn parse_list(s: &str) -> Result<Vec<i64>> {
    s.split(',')
        .filter(|x| !x.is_empty())
        .map(|x| {
            x.trim()
                .parse()
                .map_err(|_| QtmError::InvalidArgument(format!("bad site `{x}`")))
        })
        .collect()
}

fn parse_int<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| QtmError::InvalidArgument(format!("bad {what} `{s}`")))
}

/// Builds a state from a mini-spec or loads a state file.
///
/// Specs: `markers:0,4[@HEAD]`, `interf1:z=Z`, `interf2seed`,
/// `interf2chain:N`, `erasure:n=N,b=B[,a=A][,conv=plus|zero]`,
/// `ones:S1,S2,..` (head level 0 at site 0), `basis:L,J[,SITE=LEVEL..]`.
pub fn resolve_state(spec: &str, op: &StepOperator) -> Result<WaveState> {
    let dims = op.dims();
    let (kind, arg) = spec.split_once(':').unwrap_or((spec, ""));
    let psi = match kind {
        "markers" => {
            let (list, head) = match arg.split_once('@') {
                Some((l, h)) => (l, Some(parse_int::<i64>(h, "head position")?)),
                None => (arg, None),
            };
            let markers = parse_list(list)?;
            let head = match head {
                Some(h) => h,
                None => *markers.first().ok_or_else(|| {
                    QtmError::InvalidArgument("markers: needs at least one site".into())
                })?,
            };
            machines::add1_initial_state(&markers, head)?
        }
        "interf1" => {
            let z = arg.strip_prefix("z=").unwrap_or(arg);
            machines::interferometer_seed(InterferometerSeed::One {
                gap: parse_int(z, "gap")?,
            })?
        }
        "interf2seed" => machines::interferometer_seed(InterferometerSeed::Two)?,
        "interf2chain" => machines::interferometer_seed(InterferometerSeed::TwoChain {
            count: parse_int(arg, "count")?,
        })?,
        "erasure" => {
            let mut n = None;
            let mut b = None;
            let mut a = None;
            let mut conv = BtConvention::default();
            for part in arg.split(',').filter(|p| !p.is_empty()) {
                let (key, val) = part.split_once('=').ok_or_else(|| {
                    QtmError::InvalidArgument(format!("bad erasure field `{part}`"))
                })?;
                match key {
                    "n" => n = Some(parse_int(val, "head position")?),
                    "b" => b = Some(parse_int(val, "wall")?),
                    "a" => a = Some(parse_int(val, "left wall")?),
                    "conv" => {
                        conv = match val {
                            "plus" => BtConvention::HeadSitePlus,
                            "zero" => BtConvention::HeadSiteZero,
                            other => {
                                return Err(QtmError::InvalidArgument(format!(
                                    "unknown convention `{other}`"
                                )))
                            }
                        }
                    }
                    other => {
                        return Err(QtmError::InvalidArgument(format!(
                            "unknown erasure field `{other}`"
                        )))
                    }
                }
            }
            let (n, b) = match (n, b) {
                (Some(n), Some(b)) => (n, b),
                _ => return Err(QtmError::InvalidArgument("erasure: needs n= and b=".into())),
            };
            let mut st = ErasurePathState::new(n, b).with_convention(conv);
            if let Some(a) = a {
                st = st.with_left_wall(a);
            }
            st.build()?
        }
        "ones" => {
            let lattice = QuditLattice::from_entries(
                dims.qudit,
                parse_list(arg)?.into_iter().map(|s| (s, 1)),
            )?;
            WaveState::basis(dims, BasisVector::new(0, 0, lattice))?
        }
        "basis" => {
            let mut parts = arg.split(',');
            let l = parse_int(parts.next().unwrap_or(""), "head level")?;
            let j = parse_int(parts.next().unwrap_or(""), "head position")?;
            let mut lattice = QuditLattice::new(dims.qudit)?;
            for p in parts {
                let (s, v) = p
                    .split_once('=')
                    .ok_or_else(|| QtmError::InvalidArgument(format!("bad lattice entry `{p}`")))?;
                lattice.set(parse_int(s, "site")?, parse_int(v, "level")?)?;
            }
            WaveState::basis(dims, BasisVector::new(l, j, lattice))?
        }
        _ if Path::new(spec).exists() => io::load_state(spec, Some(dims))?,
        _ => {
            return Err(QtmError::InvalidArgument(format!(
                "unknown state spec or missing file `{spec}`"
            )))
        }
    };
    if psi.dims() != dims {
        return Err(QtmError::DimensionMismatch {
            expected: dims,
            found: psi.dims(),
        });
    }
    for b in psi.basis_vectors() {
        if b.head_level >= dims.head {
            return Err(QtmError::LevelOutOfRange {
                level: b.head_level,
                dim: dims.head,
            });
        }
    }
    Ok(psi)
}

fn validate(a: &ValidateArgs) -> Result<Outcome> {
    let op = resolve_machine(&a.common.machine)?;
    let locality = op.check_homogeneity_locality(a.samples, a.seed);
    let dpg = op.check_dpg_computation_basis();
    let nonzeros = op
        .reduced_matrix()
        .nonzeros(crate::operators::EPS_ZERO)
        .len();
    let failed = !locality.passed;
    let text = format!(
        "machine: {} ({})\nterms: {}\nreduced matrix nonzeros: {}\nlocality/homogeneity: {} ({} samples)\ndistinct path generating in the computation basis: {}\n",
        op.name(),
        op.dims(),
        op.terms().len(),
        nonzeros,
        if locality.passed { "pass" } else { "FAIL" },
        locality.samples,
        dpg.distinct,
    );
    let json = json!({
        "schema": "qtm/validate/v1",
        "machine": op.name(),
        "head_dim": op.dims().head,
        "qudit_dim": op.dims().qudit,
        "terms": op.terms().len(),
        "reduced_matrix_nonzeros": nonzeros,
        "locality": to_value(&locality),
        "dpg_computation_basis": to_value(&dpg),
        "witness": if failed { to_value(&locality.violation) } else { Value::Null },
    });
    Ok(Outcome { text, json, failed })
}

fn state_json(psi: &WaveState) -> Value {
    Value::Array(
        psi.iter()
            .map(|(b, a)| {
                json!({
                    "head_level": b.head_level,
                    "head_pos": b.head_pos,
                    "lattice": b.lattice.entries().collect::<Vec<_>>(),
                    "amplitude": [a.re, a.im],
                })
            })
            .collect(),
    )
}

fn path(a: &PathArgs) -> Result<Outcome> {
    let op = resolve_machine(&a.common.machine)?;
    let seed = resolve_state(&a.state, &op)?;
    let opts = a.tol.options();
    let p = paths::generate_path(&op, &seed, a.steps, a.back_steps, opts)?;
    let report = paths::verify_distinct_path(&op, &p, opts.eps_orth)?;
    let failed = !report.passed();
    let shift = if failed {
        None
    } else {
        Some(paths::classify_shift_type(&VerifiedPath::verify(
            &op,
            p.clone(),
            opts.eps_orth,
        )?))
    };
    let mut text = format!(
        "machine: {}\npath indices: {}..={} ({} states)\nforward terminal: {}\nbackward terminal: {}\nclassification: {}\n",
        op.name(),
        p.m_min(),
        p.m_max(),
        p.len(),
        p.forward_terminal,
        p.backward_terminal,
        to_value(&p.classification).as_str().unwrap_or_default(),
    );
    if let Some(c) = p.cycle {
        text += &format!(
            "cycle: period {}, phase {:.6}, weight {:.12}\n",
            c.period, c.phase, c.weight
        );
    }
    let (wmin, wmax) = p
        .weights
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &w| {
            (lo.min(w), hi.max(w))
        });
    if !p.weights.is_empty() {
        text += &format!("weights: min {wmin:.12}, max {wmax:.12}\n");
    }
    text += &format!(
        "orthogonal: {} (max overlap {:.3e})\nbackstep: {} (defect {:.3e})\nforward step: {} (defect {:.3e})\n",
        report.orthogonal,
        report.max_cross_overlap,
        report.backstep_ok,
        report.max_backstep_defect,
        report.forwardstep_ok,
        report.max_forwardstep_defect
    );
    if !report.low_weight_bonds.is_empty() {
        text += &format!(
            "warning: bonds below {:e}: {:?}\n",
            paths::WEIGHT_FLOOR,
            report.low_weight_bonds
        );
    }
    text += &match shift {
        Some(s) => format!("shift type: {}\n", serde_json::to_string(&s)?),
        None => "distinct path generation: FAIL\n".to_string(),
    };
    let states: Vec<Value> = p
        .states
        .iter()
        .enumerate()
        .map(|(i, s)| json!({ "k": i as i64 - p.origin as i64, "components": state_json(s) }))
        .collect();
    let json = json!({
        "schema": "qtm/path/v1",
        "machine": op.name(),
        "m_min": p.m_min(),
        "m_max": p.m_max(),
        "weights": p.weights,
        "forward_terminal": p.forward_terminal,
        "backward_terminal": p.backward_terminal,
        "cycle": to_value(&p.cycle),
        "classification": to_value(&p.classification),
        "dpg": to_value(&report),
        "shift_type": to_value(&shift),
        "states": states,
        "witness": to_value(&report.witness),
    });
    Ok(Outcome { text, json, failed })
}

fn isometry(a: &IsometryArgs) -> Result<Outcome> {
    let op = resolve_machine(&a.common.machine)?;
    let dims = op.dims();
    let sample: Vec<BasisVector> = match &a.state {
        Some(spec) => resolve_state(spec, &op)?.basis_vectors().cloned().collect(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            (0..a.samples)
                .map(|_| random_basis_vector(&mut rng, dims, 6, 3))
                .collect()
        }
    };
    let report = paths::check_power_partial_isometry(
        &op,
        a.steps,
        &sample,
        Window::new(a.window),
        a.tolerance,
    )?;
    let mut text = format!(
        "machine: {}\nsample: {} basis vectors\n",
        op.name(),
        report.samples
    );
    text += "n  idem(A)    idem(B)    herm(A)    herm(B)\n";
    for p in &report.powers {
        text += &format!(
            "{:<2} {:.3e}  {:.3e}  {:.3e}  {:.3e}\n",
            p.n, p.a_idempotence, p.b_idempotence, p.a_hermiticity, p.b_hermiticity
        );
    }
    text += &format!(
        "max commutator: {:.3e}\npower partial isometry on sample: {}\n",
        report.max_commutator,
        if report.passed { "pass" } else { "FAIL" }
    );
    let failed = !report.passed;
    let mut json = to_value(&report);
    json["schema"] = json!("qtm/isometry/v1");
    json["machine"] = json!(op.name());
    json["witness"] = if failed {
        json!({ "powers": to_value(&report.powers), "max_commutator": report.max_commutator })
    } else {
        Value::Null
    };
    Ok(Outcome { text, json, failed })
}

fn spectrum(a: &SpectrumArgs) -> Result<Outcome> {
    let op = resolve_machine(&a.common.machine)?;
    let seed = resolve_state(&a.state, &op)?;
    let opts = a.tol.options();
    let p = paths::generate_path(&op, &seed, a.steps, a.back_steps, opts)?;
    let report = paths::verify_distinct_path(&op, &p, opts.eps_orth)?;
    if !report.passed() {
        let json = json!({
            "schema": "qtm/spectrum/v1",
            "machine": op.name(),
            "dpg": to_value(&report),
            "witness": to_value(&report.witness),
        });
        return Ok(Outcome {
            text: "path is not distinct path generating; no spectrum\n".into(),
            json,
            failed: true,
        });
    }
    let verified = VerifiedPath::verify(&op, p, opts.eps_orth)?;
    let h = dynamics::path_hamiltonian(&verified, a.k)?;
    let s = dynamics::eigensystem(&h);
    let mut text = format!(
        "machine: {}\npath states: {}\nK: {}\neigenvalues:\n",
        op.name(),
        h.n,
        h.k
    );
    for e in &s.eigenvalues {
        text += &format!("  {e:.12}\n");
    }
    for cf in &s.closed_forms {
        text += &format!(
            "closed form {}: {}{}\n",
            cf.name,
            if cf.agrees { "agrees" } else { "DISAGREES" },
            if cf.agrees {
                String::new()
            } else {
                format!(" ({})", cf.note)
            }
        );
    }
    let json = json!({
        "schema": "qtm/spectrum/v1",
        "machine": op.name(),
        "hamiltonian": to_value(&h),
        "eigenvalues": s.eigenvalues,
        "closed_forms": to_value(&s.closed_forms),
        "witness": Value::Null,
    });
    Ok(Outcome {
        text,
        json,
        failed: false,
    })
}

fn evolve(a: &EvolveArgs, err: &mut dyn Write) -> Result<Outcome> {
    let op = resolve_machine(&a.common.machine)?;
    let psi0 = resolve_state(&a.state, &op)?.normalized()?;
    let (state, extra) = match a.method {
        Method::Expm => {
            let opts = EvolveOptions {
                closure: match a.closure {
                    ClosureArg::Basis => Closure::ComputationBasis,
                    ClosureArg::Orbit => Closure::StateOrbit,
                },
                depth: a.depth,
                window: a.window.map(Window::new),
            };
            let e = dynamics::evolve(&op, a.k, &psi0, a.time, opts)?;
            if e.boundary_mass > 1e-10 {
                writeln!(
                    err,
                    "warning: {:.3e} of the probability reached the subspace boundary; increase --depth",
                    e.boundary_mass
                )?;
            }
            let extra = json!({ "dimension": e.dimension, "depth": e.depth, "boundary_mass": e.boundary_mass });
            (e.state, extra)
        }
        Method::Pathsum => {
            let s = dynamics::pathsum_state(&op, a.k, &psi0, a.time, a.n_max)?;
            (s, json!({ "n_max": a.n_max }))
        }
    };
    let energy = dynamics::energy(&op, a.k, &state)?;
    let mut text = format!(
        "machine: {}\nK: {}  t: {}\nnorm: {:.12}\nenergy: {:.12}\ncomponents: {}\n",
        op.name(),
        a.k,
        a.time,
        state.norm(),
        energy,
        state.len()
    );
    for (b, amp) in state.iter() {
        text += &format!(
            "  {:<40} {:>+.10} {:>+.10}i\n",
            b.to_string(),
            amp.re,
            amp.im
        );
    }
    let json = json!({
        "schema": "qtm/evolve/v1",
        "machine": op.name(),
        "K": a.k,
        "time": a.time,
        "method": format!("{:?}", a.method).to_lowercase(),
        "norm": state.norm(),
        "energy": energy,
        "details": extra,
        "amplitudes": state_json(&state),
        "witness": Value::Null,
    });
    Ok(Outcome {
        text,
        json,
        failed: false,
    })
}

fn graph(a: &GraphArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32> {
    let op = resolve_machine(&a.common.machine)?;
    let seed = resolve_state(&a.state, &op)?;
    let g = graphs::build_graph(&op, &seed, a.steps, a.eps)?;
    let r = graphs::classify_structure(&g);
    let format = match a.format {
        FormatArg::Dot => GraphFormat::Dot,
        FormatArg::Json => GraphFormat::Json,
    };
    let exported = graphs::export_graph(&g, format);
    match &a.common.out {
        Some(p) => {
            fs::write(p, &exported)?;
            if a.common.json {
                let mut v = to_value(&r);
                v["schema"] = json!("qtm/graph-structure/v1");
                writeln!(out, "{}", serde_json::to_string_pretty(&v)?)?;
            } else {
                write!(out, "{}", structure_text(&r))?;
            }
        }
        None => {
            out.write_all(exported.as_bytes())?;
            write!(err, "{}", structure_text(&r))?;
        }
    }
    Ok(0)
}

fn structure_text(r: &graphs::StructureReport) -> String {
    let mut s = format!(
        "nodes: {}  edges: {}\nbranch nodes: {}  merge nodes: {}  leaves: {}\ntree: {}\nbranch stages: {:?}\n",
        r.nodes, r.edges, r.branch_nodes, r.merge_nodes, r.leaves, r.is_tree, r.stage_positions
    );
    for l in &r.loops {
        s += &format!(
            "loop: steps {}..{}  sites {}..{}  arm lengths {:?}  depth {}\n",
            l.open_step,
            l.close_step,
            l.open_site,
            l.close_site.map_or("?".to_string(), |c| c.to_string()),
            l.arm_lengths,
            l.depth
        );
    }
    s
}
