use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::anyhow;
use clap::{Parser, Subcommand};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use symcoord::io::{
    discrete_from_json, document_mode, reduced_from_json, reduced_to_json, specs_from_json, to_pretty, tuple_from_json,
    tuple_to_json, IoError, JsonScalar, Mode,
};
use symcoord::orbits::{check_membership, random_specs, OrbitSpec};
use symcoord::reduction::{canonical_section, lift, reduce, sample_tuple, DiscreteData, FuchsTuple, ReductionError};
use symcoord::scalar::GaussianRational;
use symcoord::symplectic::{momentum, verify_pullback, SymplecticError};

const SAMPLE_ATTEMPTS: usize = 50;
const DEFAULT_FLOAT_TOL: f64 = 1e-10;

#[derive(Parser)]
#[command(name = "symcoord", version, about = "Symplectic coordinates on reduced products of coadjoint orbits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Arithmetic: exact Gaussian rationals or complex floats.
    #[arg(long, global = true, default_value = "exact")]
    mode: String,
    /// Matrix size.
    #[arg(long, global = true, default_value_t = 3)]
    m: usize,
    /// Number of orbits N.
    #[arg(long = "n-orbits", global = true, default_value_t = 4)]
    n_orbits: usize,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 25)]
    trials: usize,
    /// Zero tolerance; ignored in exact mode.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Orbit specs as JSON (a list, or an object with a "specs" field).
    #[arg(long, global = true)]
    specs: Option<PathBuf>,
    /// Anchors, lambda and orderings as JSON; missing fields take defaults.
    #[arg(long, global = true)]
    discrete: Option<PathBuf>,
    /// Output file; stdout when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a random tuple on the zero-momentum level.
    Sample,
    /// Map a tuple to its reduced coordinates.
    Reduce { input: PathBuf },
    /// Map reduced coordinates back to a tuple in section form.
    Lift { input: PathBuf },
    /// Check both round trips on a tuple.
    Roundtrip { input: PathBuf },
    /// Check the symplectic pullback identities on random tangent pairs.
    Verify { input: PathBuf },
    /// Report orbit membership and momentum of a tuple.
    Check { input: PathBuf },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn rejected(e: impl Into<anyhow::Error>) -> Self {
        Failure { code: 2, error: e.into() }
    }

    fn verification(e: impl Into<anyhow::Error>) -> Self {
        Failure { code: 4, error: e.into() }
    }

    fn io(e: impl Into<anyhow::Error>) -> Self {
        Failure { code: 5, error: e.into() }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        match e {
            IoError::Spec(_) => Failure::rejected(e),
            IoError::Reduction(r) => r.into(),
            other => Failure::io(other),
        }
    }
}

impl From<ReductionError> for Failure {
    fn from(e: ReductionError) -> Self {
        match e.domain_condition() {
            Some(condition) => Failure { code: 3, error: anyhow!("{e}\n  failed condition: {condition}") },
            None => match e {
                ReductionError::Orbit(_) | ReductionError::TraceCondition => Failure::rejected(e),
                ReductionError::InvalidTuple(_) => Failure::io(e),
                other => Failure::verification(other),
            },
        }
    }
}

impl From<SymplecticError> for Failure {
    fn from(e: SymplecticError) -> Self {
        match e {
            SymplecticError::Reduction(r) | SymplecticError::StepThroughBoundary(r) => r.into(),
            other => Failure::verification(other),
        }
    }
}

struct Ctx {
    cli: Cli,
    tol: f64,
}

impl Ctx {
    fn write(&self, doc: &Value) -> Result<(), Failure> {
        let text = to_pretty(doc);
        match &self.cli.out {
            Some(path) => std::fs::write(path, text).map_err(|e| Failure::io(anyhow!("writing {}: {e}", path.display()))),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.cli.seed)
    }

    fn discrete<S: JsonScalar>(&self, specs: &[OrbitSpec<S>]) -> Result<DiscreteData<S>, Failure> {
        match &self.cli.discrete {
            Some(path) => Ok(discrete_from_json(&read_json(path)?, specs, self.tol)?),
            None => Ok(DiscreteData::default_for(specs)?),
        }
    }
}

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::io(anyhow!("reading {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::io(anyhow!("parsing {}: {e}", path.display())))
}

fn validated<S: JsonScalar>(doc: &Value, tol: f64) -> Result<FuchsTuple<S>, Failure> {
    let t: FuchsTuple<S> = tuple_from_json(doc, tol)?;
    Ok(FuchsTuple::new(t.specs().to_vec(), t.matrices().to_vec(), t.poles.clone(), tol)?)
}

fn sample<S: JsonScalar>(ctx: &Ctx) -> Result<(), Failure> {
    let (m, n) = (ctx.cli.m, ctx.cli.n_orbits);
    let mut rng = ctx.rng();
    let specs: Vec<OrbitSpec<S>> = match &ctx.cli.specs {
        Some(path) => specs_from_json(&read_json(path)?, ctx.tol)?,
        None => {
            if m < 2 || n < 3 {
                return Err(Failure::rejected(anyhow!("need m >= 2 and N >= 3, got m = {m}, N = {n}")));
            }
            random_specs(m, n, &[], &mut rng)
        }
    };
    let data = ctx.discrete(&specs)?;
    let tuple = sample_tuple(&specs, &data, &mut rng, SAMPLE_ATTEMPTS, ctx.tol).map_err(|e| match e {
        ReductionError::LiftedOffOrbit { .. } => {
            Failure::rejected(anyhow!("no point of this spec combination found after {SAMPLE_ATTEMPTS} attempts: {e}"))
        }
        other => other.into(),
    })?;
    // the written tuple must pass the same checks as any input
    let tuple = FuchsTuple::new(tuple.specs().to_vec(), tuple.matrices().to_vec(), None, ctx.tol)?;
    ctx.write(&tuple_to_json(&tuple))
}

fn reduce_cmd<S: JsonScalar>(ctx: &Ctx, doc: &Value) -> Result<(), Failure> {
    let tuple = validated::<S>(doc, ctx.tol)?;
    let data = ctx.discrete(tuple.specs())?;
    ctx.write(&reduced_to_json(&reduce(&tuple, &data, ctx.tol)?))
}

fn lift_cmd<S: JsonScalar>(ctx: &Ctx, doc: &Value) -> Result<(), Failure> {
    let point = reduced_from_json::<S>(doc, ctx.tol)?;
    match lift(&point, ctx.tol) {
        Ok(tuple) => ctx.write(&tuple_to_json(&tuple)),
        Err(e @ ReductionError::LiftedOffOrbit { .. }) => {
            // still write the matrices so the failure can be inspected
            let matrices = symcoord::reduction::lift_matrices(&point);
            let tuple = FuchsTuple::from_parts_unchecked(point.specs.clone(), matrices, None)?;
            ctx.write(&tuple_to_json(&tuple))?;
            Err(e.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn roundtrip<S: JsonScalar>(ctx: &Ctx, doc: &Value) -> Result<(), Failure> {
    let tuple = validated::<S>(doc, ctx.tol)?;
    let data = ctx.discrete(tuple.specs())?;
    let section = canonical_section(&tuple, &data, ctx.tol)?;
    let point = reduce(&tuple, &data, ctx.tol)?;
    let lifted = lift(&point, ctx.tol)?;
    let again = reduce(&lifted, &data, ctx.tol)?;
    let verdict = |exact: bool, close: bool| match (S::MODE, exact, close) {
        (_, true, _) => "exact match",
        (Mode::Float, false, true) => "match within tolerance",
        _ => "mismatch",
    };
    let close_tol = ctx.tol.max(DEFAULT_FLOAT_TOL).sqrt();
    let up = verdict(lifted == section, lifted.approx_eq(&section, close_tol));
    let down = verdict(again == point, again.approx_eq(&point, close_tol));
    let passed = up != "mismatch" && down != "mismatch";
    ctx.write(&json!({
        "mode": S::MODE.as_str(),
        "lift_of_reduce_equals_section": up,
        "reduce_of_lift_equals_identity": down,
        "passed": passed,
    }))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::verification(anyhow!("round trip failed")))
    }
}

fn verify<S: JsonScalar>(ctx: &Ctx, doc: &Value) -> Result<(), Failure> {
    if ctx.cli.trials == 0 {
        return Err(Failure::rejected(anyhow!("trials must be at least 1")));
    }
    let tuple = validated::<S>(doc, ctx.tol)?;
    let data = ctx.discrete(tuple.specs())?;
    let report = verify_pullback(&tuple, &data, ctx.cli.trials, &mut ctx.rng(), ctx.tol)?;
    let mut out = report.to_json();
    out["mode"] = json!(S::MODE.as_str());
    out["passed"] = json!(report.passed());
    ctx.write(&out)?;
    if report.passed() {
        Ok(())
    } else {
        Err(Failure::verification(anyhow!("pullback identities failed")))
    }
}

fn check<S: JsonScalar>(ctx: &Ctx, doc: &Value) -> Result<(), Failure> {
    let tuple = tuple_from_json::<S>(doc, ctx.tol)?;
    let members: Vec<Value> = tuple
        .matrices()
        .iter()
        .zip(tuple.specs())
        .map(|(a, spec)| {
            let report = check_membership(a, spec, ctx.tol);
            let failures: Vec<String> = report.failures.iter().map(|f| format!("{f:?}")).collect();
            json!({ "member": report.is_member(), "failures": failures })
        })
        .collect();
    let all_members = members.iter().all(|v| v["member"] == json!(true));
    let mu = momentum(&tuple);
    let scale = tuple.matrices().iter().map(|a| a.max_modulus()).fold(1.0, f64::max);
    let momentum_zero = mu.entries().all(|x| x.is_zero_tol(ctx.tol * scale));
    let passed = all_members && momentum_zero;
    ctx.write(&json!({
        "mode": S::MODE.as_str(),
        "membership": members,
        "momentum_zero": momentum_zero,
        "momentum_max_modulus": mu.max_modulus(),
        "passed": passed,
    }))?;
    if passed {
        Ok(())
    } else {
        Err(Failure::verification(anyhow!("tuple is not on the zero-momentum level")))
    }
}

fn dispatch<S: JsonScalar>(ctx: &Ctx, doc: Option<&Value>) -> Result<(), Failure> {
    let doc = || doc.ok_or_else(|| Failure::io(anyhow!("missing input document")));
    match &ctx.cli.command {
        Command::Sample => sample::<S>(ctx),
        Command::Reduce { .. } => reduce_cmd::<S>(ctx, doc()?),
        Command::Lift { .. } => lift_cmd::<S>(ctx, doc()?),
        Command::Roundtrip { .. } => roundtrip::<S>(ctx, doc()?),
        Command::Verify { .. } => verify::<S>(ctx, doc()?),
        Command::Check { .. } => check::<S>(ctx, doc()?),
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let input = match &cli.command {
        Command::Sample => None,
        Command::Reduce { input }
        | Command::Lift { input }
        | Command::Roundtrip { input }
        | Command::Verify { input }
        | Command::Check { input } => Some(read_json(input)?),
    };
    // input documents carry their own mode
    let mode = match &input {
        Some(doc) => document_mode(doc)?,
        None => Mode::parse(&cli.mode)?,
    };
    let tol = match mode {
        Mode::Exact => 0.0,
        Mode::Float => cli.tol.unwrap_or(DEFAULT_FLOAT_TOL),
    };
    let ctx = Ctx { cli, tol };
    match mode {
        Mode::Exact => dispatch::<GaussianRational>(&ctx, input.as_ref()),
        Mode::Float => dispatch::<Complex64>(&ctx, input.as_ref()),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure { code, error }) => {
            eprintln!("error: {error}");
            ExitCode::from(code)
        }
    }
}
