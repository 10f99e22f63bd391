//! `supervisionary`: run guests under policies, execute scripts, parse terms
//! and dump kernel state.  Reports are JSON on stdout, diagnostics on stderr.
//!
//! Exit codes: 0 success, 1 guest or script failure, 2 usage error.

use clap::{Args, Parser, Subcommand};
use host::{run_guest, Script};
use kernel::driver::Driver;
use kernel::{Kernel, Syscall, Vfs};
use serde_json::{json, Value};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Proof-gated kernel runner.
#[derive(Parser, Debug)]
#[command(name = "supervisionary", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run a WebAssembly guest (binary or text format).
    Run(RunArgs),
    /// Execute a script against a fresh kernel.
    Script {
        file: PathBuf,
        #[command(flatten)]
        fs: FsArgs,
    },
    /// Parse a term or policy file and print it back with its type.
    Parse { file: PathBuf },
    /// Print the canonical heap listing or the syscall history.
    Dump(DumpArgs),
}

#[derive(Args, Debug)]
struct RunArgs {
    image: PathBuf,
    /// Policy term to install before the guest starts.
    #[arg(long)]
    policy: Option<PathBuf>,
    /// Script proving the policy refines the boot policy.  It sees the
    /// policy term as `policy` and must install it.
    #[arg(long, requires = "policy")]
    refine: Option<PathBuf>,
    #[command(flatten)]
    fs: FsArgs,
    /// Write the final filesystem as a manifest.
    #[arg(long, value_name = "FILE")]
    fs_dump: Option<PathBuf>,
    /// Include the guest's syscall trace in the report.
    #[arg(long)]
    trace: bool,
}

#[derive(Args, Debug)]
struct FsArgs {
    /// Filesystem image: a JSON manifest of base64 contents or a directory.
    #[arg(long, value_name = "FILE|DIR")]
    fs: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct DumpArgs {
    #[arg(long, conflicts_with = "history")]
    heaps: bool,
    #[arg(long)]
    history: bool,
    /// Script to run before dumping.
    #[arg(long)]
    script: Option<PathBuf>,
    #[command(flatten)]
    fs: FsArgs,
}

/// A failure and the exit code it maps to.
struct Failure {
    code: u8,
    message: String,
    report: Option<Value>,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
        report: None,
    }
}

fn failed(message: impl Into<String>, report: Option<Value>) -> Failure {
    Failure {
        code: 1,
        message: message.into(),
        report,
    }
}

fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn boot(fs: &FsArgs) -> Result<Kernel, Failure> {
    let Some(path) = &fs.fs else {
        return Ok(Kernel::new());
    };
    let vfs = if path.is_dir() {
        Vfs::from_directory(path)
    } else {
        Vfs::from_manifest(&read_text(path)?)
    };
    vfs.map(Kernel::with_vfs)
        .map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn parse_script(path: &Path) -> Result<Script, Failure> {
    Script::parse(&read_text(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn run_script_file(path: &Path, driver: &mut Driver, preset: &[(&str, u64)]) -> Result<Vec<String>, Failure> {
    let script = parse_script(path)?;
    script.run_with(driver, preset).map(|t| t.lines).map_err(|f| {
        let report = json!({ "transcript": f.transcript.lines, "error": f.error.to_string() });
        failed(format!("{}: {}", path.display(), f.error), Some(report))
    })
}

/// Installs the policy in `path`.  Without a refinement script only the boot
/// policy itself is accepted, so an operator cannot loosen anything either.
fn install_policy(driver: &mut Driver, path: &Path, refine: Option<&Path>) -> Result<(), Failure> {
    let policy = driver
        .parse_term(&read_text(path)?)
        .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    let same = |d: &Driver| d.kernel().heaps().alpha_equivalent(policy, d.kernel().policy().current());
    match refine {
        None if same(driver) == Ok(true) => Ok(()),
        None => Err(usage(format!(
            "{}: only the boot policy may be used without --refine",
            path.display()
        ))),
        Some(script) => {
            run_script_file(script, driver, &[("policy", policy.value())])?;
            if same(driver) == Ok(true) {
                Ok(())
            } else {
                Err(failed(
                    format!("{}: script did not install the policy", script.display()),
                    None,
                ))
            }
        }
    }
}

fn run(args: RunArgs) -> Result<Value, Failure> {
    let image = std::fs::read(&args.image).map_err(|e| usage(format!("{}: {e}", args.image.display())))?;
    let mut driver = Driver::new(boot(&args.fs)?);
    if let Some(policy) = &args.policy {
        install_policy(&mut driver, policy, args.refine.as_deref())?;
    }
    let mut kernel = driver.into_kernel();
    // The report covers the guest only, not the operator's setup calls.
    kernel.clear_trace();
    let outcome = run_guest(&image, kernel);
    if let Some(path) = &args.fs_dump {
        std::fs::write(path, outcome.kernel.vfs().to_manifest())
            .map_err(|e| usage(format!("{}: {e}", path.display())))?;
    }
    let mut report = serde_json::to_value(outcome.report()).expect("report serializes");
    if !args.trace {
        report.as_object_mut().unwrap().remove("trace");
    }
    if outcome.status == 0 {
        Ok(report)
    } else {
        let message = outcome.error.clone().unwrap_or_else(|| format!("guest exited with status {}", outcome.status));
        Err(failed(message, Some(report)))
    }
}

fn script(file: &Path, fs: &FsArgs) -> Result<Value, Failure> {
    let mut driver = Driver::new(boot(fs)?);
    let lines = run_script_file(file, &mut driver, &[])?;
    Ok(json!({
        "transcript": lines,
        "heap_digest": driver.kernel().heap_digest(),
        "state_digest": driver.kernel().state_digest(),
    }))
}

fn parse(file: &Path) -> Result<Value, Failure> {
    let mut driver = Driver::default();
    let t = driver
        .parse_term(&read_text(file)?)
        .map_err(|e| usage(format!("{}: {e}", file.display())))?;
    let h = driver.kernel().heaps();
    let ty = h.term(t).expect("parsed term is live").ty;
    Ok(json!({
        "handle": t.value(),
        "term": h.print_term(t).expect("live term prints"),
        "type": h.print_type(ty).expect("live type prints"),
    }))
}

fn dump(args: DumpArgs) -> Result<Value, Failure> {
    let mut driver = Driver::new(boot(&args.fs)?);
    if let Some(script) = &args.script {
        run_script_file(script, &mut driver, &[])?;
    }
    let k = driver.kernel();
    if args.history {
        let history: Vec<Value> = k
            .policy()
            .history()
            .iter()
            .map(|m| {
                let name = u32::try_from(m.number).ok().and_then(Syscall::from_number).map(|s| s.import_name());
                json!({ "number": m.number, "name": name, "arg1": m.arg1, "arg2": m.arg2 })
            })
            .collect();
        Ok(json!({ "history": history }))
    } else {
        Ok(k.heaps().dump_value())
    }
}

fn execute(cli: Cli) -> Result<Value, Failure> {
    match cli.command {
        Command::Run(args) => run(args),
        Command::Script { file, fs } => script(&file, &fs),
        Command::Parse { file } => parse(&file),
        Command::Dump(args) => dump(args),
    }
}

fn print(v: &Value) {
    // A closed pipe downstream is not an error worth reporting.
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "{}", serde_json::to_string_pretty(v).expect("json serializes"));
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    // Deep terms recurse in the kernel; give it room.
    let result = std::thread::Builder::new()
        .stack_size(256 << 20)
        .spawn(move || execute(cli))
        .expect("spawn worker")
        .join()
        .expect("worker panicked");
    match result {
        Ok(v) => {
            print(&v);
            ExitCode::SUCCESS
        }
        Err(f) => {
            if let Some(report) = &f.report {
                print(report);
            }
            eprintln!("supervisionary: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
