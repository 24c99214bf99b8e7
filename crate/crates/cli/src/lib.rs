//! The `maurer` command line: every subcommand renders its report into a
//! string so runs are easy to test and byte-for-byte reproducible.
//!
//! Exit codes: 0 on success (or a complete verdict), 1 when a violation,
//! rejection or incompleteness verdict is found, 2 on usage and parse errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};

use maurer_core::apply::{apply, trace, ApplyResult, TraceEnd};
use maurer_core::counting::{
    all_transformations, classify_regime, exact_thread_count, parse_rational, small_unit_inequality_holds,
    small_unit_lhs, thread_count_bound, CountingError, RegimeParams, Verdict,
};
use maurer_core::dsl::{parse_threads, print_threads};
use maurer_core::sls::{parse_machine_file, validate_strictness, write_machine_file, SlsMachine};
use maurer_core::thread::{check_guarded, distinct_states, solve, ActionId, ThreadGraph};
use maurer_core::tpfc::{
    check_membership, synthesize_lean, synthesize_wide, verify_completeness, Membership, SweepMode, Synthesizer,
    TpfcParams, TransformationTable, Witness,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_VIOLATION: u8 = 1;
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(stdout: String) -> Self {
        Outcome {
            code: EXIT_OK,
            stdout,
            stderr: String::new(),
        }
    }

    fn with_code(code: u8, stdout: String) -> Self {
        Outcome {
            code,
            stdout,
            stderr: String::new(),
        }
    }
}

/// Failures that end a command early.
enum Failure {
    Usage(String),
    Violation(String),
}

type CmdResult = Result<Outcome, Failure>;

fn usage(msg: impl Into<String>) -> Failure {
    Failure::Usage(msg.into())
}

#[derive(Parser, Debug)]
#[command(
    name = "maurer",
    version,
    about = "Threads on Maurer machines: apply, check, synthesize and count"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse a thread file, check guardedness and print the normalized
    /// specification with the size of its solution.
    Parse {
        /// Thread file in the `X = a ? Y : Z` syntax.
        threadfile: PathBuf,
    },
    /// Apply a thread to a machine state. Prints the final state, or
    /// `undefined (↑)` on deadlock or divergence.
    Apply {
        /// Machine file with `[params]` and `[op NAME]` sections.
        #[arg(long)]
        machine: PathBuf,
        /// Thread file.
        #[arg(long)]
        thread: PathBuf,
        /// Initial state such as `data0=1,data1=0`; unlisted cells take the
        /// minimum of their domain.
        #[arg(long, default_value = "")]
        state: String,
        /// Also print a step trace cut off after this many actions.
        #[arg(long)]
        max_steps: Option<usize>,
    },
    /// Compute the input and output region of one data-manipulation
    /// instruction by brute force and check them against the strict
    /// load/store constraints.
    Regions {
        #[arg(long)]
        machine: PathBuf,
        #[arg(long)]
        op: String,
    },
    /// Build a witness machine and thread for a transformation table and
    /// write them to a directory.
    Synthesize {
        #[arg(long, value_enum)]
        mode: SynthArg,
        /// Table file: a `k=K l=L` header, then `in -> out` rows.
        #[arg(long)]
        transform: PathBuf,
        /// `T` compares only the external half of data memory.
        #[arg(long, value_parser = parse_flag, action = ArgAction::Set)]
        f: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Synthesize and check a witness for every transformation at (k, l),
    /// or for a seeded random sample.
    Verify {
        #[arg(long)]
        k: u32,
        #[arg(long)]
        l: u32,
        #[arg(long, value_parser = parse_flag, action = ArgAction::Set)]
        f: bool,
        #[arg(long, value_enum)]
        synth: SynthArg,
        #[arg(long, value_enum, default_value = "exhaustive")]
        mode: ModeArg,
        #[arg(long, default_value_t = 1000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Exact counting bounds.
    #[command(subcommand)]
    Count(CountCommand),
    /// Decide which known result settles completeness at a parameter point.
    Classify(ClassifyArgs),
}

#[derive(Subcommand, Debug)]
enum CountCommand {
    /// Compare the transformations a small operating unit can reach
    /// against all transformations of external memory. `--ems` may be a
    /// fraction such as 3/2, in which case only the symbolic test runs.
    Lemma1 {
        #[arg(long)]
        ems: String,
    },
    /// Evaluate the raw thread bound ((d+w)e^2+2)^e; with `--exact`, also
    /// count threads over d+w actions by enumeration.
    Threads {
        #[arg(long)]
        d: u64,
        #[arg(long)]
        w: u64,
        #[arg(long)]
        e: u64,
        #[arg(long)]
        exact: bool,
    },
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    #[arg(long)]
    k: u32,
    #[arg(long)]
    l: u32,
    #[arg(long)]
    m: u64,
    #[arg(long)]
    d: u64,
    #[arg(long)]
    e: u64,
    #[arg(long, value_parser = parse_flag, action = ArgAction::Set)]
    f: bool,
    #[arg(long, default_value_t = 1)]
    u: u64,
    #[arg(long, default_value_t = 1)]
    v: u64,
    /// Bits of internal data memory used as working area.
    #[arg(long, default_value_t = 0)]
    ims: u64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum SynthArg {
    Lean,
    Wide,
}

impl From<SynthArg> for Synthesizer {
    fn from(s: SynthArg) -> Self {
        match s {
            SynthArg::Lean => Synthesizer::Lean,
            SynthArg::Wide => Synthesizer::Wide,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Exhaustive,
    Sample,
}

fn parse_flag(s: &str) -> Result<bool, String> {
    match s {
        "T" | "t" | "true" => Ok(true),
        "F" | "f" | "false" => Ok(false),
        _ => Err(format!("expected T or F, got `{s}`")),
    }
}

/// Runs one invocation. `args` includes the program name.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Outcome {
                    code: EXIT_USAGE,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(text)
            };
        }
    };
    let result = match cli.command {
        Command::Parse { threadfile } => cmd_parse(&threadfile),
        Command::Apply {
            machine,
            thread,
            state,
            max_steps,
        } => cmd_apply(&machine, &thread, &state, max_steps),
        Command::Regions { machine, op } => cmd_regions(&machine, &op),
        Command::Synthesize {
            mode,
            transform,
            f,
            out,
        } => cmd_synthesize(mode.into(), &transform, f, &out),
        Command::Verify {
            k,
            l,
            f,
            synth,
            mode,
            samples,
            seed,
        } => {
            let mode = match mode {
                ModeArg::Exhaustive => SweepMode::Exhaustive,
                ModeArg::Sample => SweepMode::Sample { n: samples, seed },
            };
            cmd_verify(k, l, f, synth.into(), mode)
        }
        Command::Count(CountCommand::Lemma1 { ems }) => cmd_small_unit(&ems),
        Command::Count(CountCommand::Threads { d, w, e, exact }) => cmd_threads(d, w, e, exact),
        Command::Classify(a) => cmd_classify(&a),
    };
    match result {
        Ok(out) => out,
        Err(Failure::Usage(msg)) => Outcome {
            code: EXIT_USAGE,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
        Err(Failure::Violation(msg)) => Outcome {
            code: EXIT_VIOLATION,
            stdout: String::new(),
            stderr: format!("error: {msg}\n"),
        },
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_thread(path: &Path) -> Result<ThreadGraph, Failure> {
    let spec = parse_threads(&read(path)?).map_err(|e| usage(format!("{}:{e}", path.display())))?;
    solve(&spec).map_err(|e| Failure::Violation(format!("{}: {e}", path.display())))
}

fn load_machine(path: &Path) -> Result<SlsMachine, Failure> {
    parse_machine_file(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn cmd_parse(path: &Path) -> CmdResult {
    let spec = parse_threads(&read(path)?).map_err(|e| usage(format!("{}:{e}", path.display())))?;
    let mut out = print_threads(&spec);
    if let Err(e) = check_guarded(&spec) {
        return Ok(Outcome::with_code(EXIT_VIOLATION, format!("{out}# not guarded: {e}\n")));
    }
    let g = solve(&spec).map_err(|e| Failure::Violation(e.to_string()))?;
    let actions: Vec<String> = g.actions().iter().map(|a| a.to_string()).collect();
    let _ = writeln!(out, "# root: {}", spec.root());
    let _ = writeln!(out, "# equations: {}", spec.equations().len());
    let _ = writeln!(out, "# graph nodes: {}", g.len());
    let _ = writeln!(out, "# distinct states: {}", distinct_states(&g));
    let _ = writeln!(out, "# actions: {}", actions.join(" "));
    Ok(Outcome::ok(out))
}

fn cmd_apply(machine: &Path, thread: &Path, state: &str, max_steps: Option<usize>) -> CmdResult {
    let m = load_machine(machine)?;
    let p = load_thread(thread)?;
    let layout = m.layout();
    let s = layout.parse_state(state).map_err(|e| usage(format!("--state: {e}")))?;
    let mut out = String::new();
    if let Some(n) = max_steps {
        let (tr, _) =
            trace(&p, &m.machine, ApplyResult::Defined(s.clone()), n).map_err(|e| Failure::Violation(e.to_string()))?;
        for (i, st) in tr.steps.iter().enumerate() {
            let _ = writeln!(out, "{:>5}  {st}", i + 1);
        }
        if tr.end == TraceEnd::Truncated {
            let _ = writeln!(out, "trace cut off after {n} steps");
        }
        if tr.used_tau {
            let _ = writeln!(out, "note: tau ran as the identity with reply T");
        }
    }
    let result = apply(&p, &m.machine, ApplyResult::Defined(s)).map_err(|e| Failure::Violation(e.to_string()))?;
    match result {
        ApplyResult::Defined(end) => {
            let _ = writeln!(out, "{}", layout.format_state(&end));
        }
        ApplyResult::Undefined => out.push_str("undefined (↑)\n"),
    }
    Ok(Outcome::ok(out))
}

fn cmd_regions(machine: &Path, op: &str) -> CmdResult {
    let m = load_machine(machine)?;
    let action: ActionId = op.parse().map_err(|e| usage(format!("--op: {e:?}")))?;
    if !m.data_manip.contains(&action) {
        let known: Vec<String> = m.data_manip.iter().map(|a| a.to_string()).collect();
        return Err(usage(format!(
            "--op: no instruction `{op}` (have: {})",
            known.join(", ")
        )));
    }
    let report = validate_strictness(&m);
    let check = report
        .regions
        .iter()
        .find(|c| c.action == action)
        .expect("every instruction is checked");
    let layout = m.layout();
    let names = |cells: &std::collections::BTreeSet<usize>| {
        cells.iter().map(|&c| layout.cell_name(c)).collect::<Vec<_>>().join(" ")
    };
    let interp = m.machine.interpretation(&action).expect("instruction is interpreted");
    let mut out = String::new();
    let _ = writeln!(out, "instruction: {action}");
    let _ = writeln!(out, "source: {:?}", check.source);
    let _ = writeln!(out, "IR: {{{}}}", names(&check.ir));
    let _ = writeln!(out, "OR: {{{}}}", names(&check.or));
    let _ = writeln!(out, "declared IR: {{{}}}", names(interp.operation.declared_ir()));
    let _ = writeln!(out, "declared OR: {{{}}}", names(interp.operation.declared_or()));
    let violations: Vec<_> = report.violations.iter().filter(|v| v.action == action).collect();
    for v in &violations {
        let _ = writeln!(out, "violation ({:?}): {}", v.constraint, v.detail);
    }
    if violations.is_empty() {
        out.push_str("strict: yes\n");
        Ok(Outcome::ok(out))
    } else {
        out.push_str("strict: no\n");
        Ok(Outcome::with_code(EXIT_VIOLATION, out))
    }
}

fn cmd_synthesize(synth: Synthesizer, transform: &Path, f: bool, out_dir: &Path) -> CmdResult {
    let text = read(transform)?;
    let t = TransformationTable::parse(&text).map_err(|e| usage(format!("{}: {e}", transform.display())))?;
    let (witness, params): (Witness, TpfcParams) = match synth {
        Synthesizer::Lean => (
            synthesize_lean(&t, f).map_err(|e| usage(e.to_string()))?,
            TpfcParams::lean(t.k(), t.l(), f).map_err(|e| usage(e.to_string()))?,
        ),
        Synthesizer::Wide => {
            if !f {
                return Err(usage("--mode wide realizes only --f T"));
            }
            (
                synthesize_wide(&t).map_err(|e| usage(e.to_string()))?,
                TpfcParams::wide(t.k(), t.l()).map_err(|e| usage(e.to_string()))?,
            )
        }
    };
    let machine_text = write_machine_file(&witness.machine).map_err(|e| Failure::Violation(e.to_string()))?;
    let thread_text = print_threads(&witness.thread.to_spec());
    fs::create_dir_all(out_dir).map_err(|e| usage(format!("{}: {e}", out_dir.display())))?;
    let machine_path = out_dir.join("machine.txt");
    let thread_path = out_dir.join("thread.txt");
    for (path, body) in [(&machine_path, &machine_text), (&thread_path, &thread_text)] {
        fs::write(path, body).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let mut out = String::new();
    let _ = writeln!(out, "synthesizer: {synth}");
    let _ = writeln!(out, "class: {params}");
    let _ = writeln!(out, "instructions: {}", witness.machine.d());
    let _ = writeln!(out, "thread states: {}", distinct_states(&witness.thread));
    let _ = writeln!(out, "wrote {}", machine_path.display());
    let _ = writeln!(out, "wrote {}", thread_path.display());
    match check_membership(&t, &params, &witness) {
        Ok(Membership::Accepted(cov)) => {
            let _ = writeln!(out, "check: accepted ({:?}, {} runs)", cov.quantifier, cov.runs);
            Ok(Outcome::ok(out))
        }
        Ok(Membership::Rejected(r)) => {
            let _ = writeln!(out, "check: rejected ({:?}): {}", r.clause, r.detail);
            Ok(Outcome::with_code(EXIT_VIOLATION, out))
        }
        Err(e) => Err(Failure::Violation(e.to_string())),
    }
}

fn cmd_verify(k: u32, l: u32, f: bool, synth: Synthesizer, mode: SweepMode) -> CmdResult {
    let report = verify_completeness(k, l, f, synth, mode).map_err(|e| usage(e.to_string()))?;
    let code = if report.complete() { EXIT_OK } else { EXIT_VIOLATION };
    Ok(Outcome::with_code(code, report.to_string()))
}

fn counting(e: CountingError) -> Failure {
    usage(e.to_string())
}

fn cmd_small_unit(ems_text: &str) -> CmdResult {
    let ems = parse_rational(ems_text).ok_or_else(|| usage(format!("--ems: expected N or N/M, got `{ems_text}`")))?;
    let symbolic = small_unit_inequality_holds(&ems).map_err(counting)?;
    let even = ems.is_integer() && (ems.to_integer() % 2u32) == 0u32.into();
    let mut out = String::new();
    if even {
        let n: u64 = ems
            .to_integer()
            .try_into()
            .map_err(|_| usage("--ems is too large for exact evaluation"))?;
        let lhs = small_unit_lhs(n).map_err(counting)?;
        let rhs = all_transformations(n).map_err(counting)?;
        let holds = lhs < rhs;
        let _ = writeln!(out, "lhs={lhs} rhs={rhs} holds={holds}");
        let _ = writeln!(out, "symbolic: ems > 1 is {symbolic}");
        if holds != symbolic {
            return Ok(Outcome::with_code(EXIT_VIOLATION, out));
        }
    } else {
        let _ = writeln!(out, "holds={symbolic} (symbolic: ems > 1; ems is not an even integer)");
    }
    Ok(Outcome::ok(out))
}

fn cmd_threads(d: u64, w: u64, e: u64, exact: bool) -> CmdResult {
    let bound = thread_count_bound(d, w, e).map_err(counting)?;
    let mut out = format!("bound={bound}\n");
    if exact {
        let alphabet = usize::try_from(d + w).map_err(|_| usage("--d + --w is too large"))?;
        let e = usize::try_from(e).map_err(|_| usage("--e is too large"))?;
        let n = exact_thread_count(alphabet, e).map_err(counting)?;
        let _ = writeln!(
            out,
            "exact={n} (threads over {alphabet} actions with at most {e} states)"
        );
        let _ = writeln!(out, "exact <= bound: {}", n <= bound);
    }
    Ok(Outcome::ok(out))
}

fn cmd_classify(a: &ClassifyArgs) -> CmdResult {
    let p = RegimeParams {
        k: a.k,
        l: a.l,
        m: a.m,
        d: a.d,
        e: a.e,
        f: a.f,
        u: a.u,
        v: a.v,
        ims: a.ims,
    };
    let v = classify_regime(&p).map_err(counting)?;
    let code = match v.verdict {
        Verdict::IncompleteFewThreads | Verdict::IncompleteSmallUnit => EXIT_VIOLATION,
        _ => EXIT_OK,
    };
    Ok(Outcome::with_code(code, v.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags() {
        assert_eq!(parse_flag("T"), Ok(true));
        assert_eq!(parse_flag("false"), Ok(false));
        assert!(parse_flag("yes").is_err());
    }

    #[test]
    fn odd_ems_is_symbolic_only() {
        let out = cmd_small_unit("3").ok().unwrap();
        assert!(out.stdout.starts_with("holds=true (symbolic"));
    }
}
