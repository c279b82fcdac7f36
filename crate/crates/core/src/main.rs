use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lavgap::harness::{
    emit_report, emit_samples, load_config, run, run_checks, Format, HarnessError, EXIT_CONFIG, EXIT_FALSIFIED,
    EXIT_OK,
};
use lavgap::problems::list_examples;

#[derive(Parser)]
#[command(name = "lavgap", version, about = "Lipschitz reparametrization and Lavrentiev-gap experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Jsonl,
}

#[derive(Subcommand)]
enum Command {
    /// Run the hypothesis checkers and the convergence study.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Report file; defaults to the config's report_path, then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
    },
    /// Run the hypothesis checkers only.
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// List the registered problems.
    ListExamples,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), HarnessError> {
    std::fs::write(path, bytes).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_stdout(bytes: &[u8]) -> Result<(), HarnessError> {
    let mut out = std::io::stdout().lock();
    out.write_all(bytes)
        .and_then(|_| out.flush())
        .map_err(|source| HarnessError::Io {
            path: PathBuf::from("<stdout>"),
            source,
        })
}

fn status(falsified: bool) -> i32 {
    if falsified {
        EXIT_FALSIFIED
    } else {
        EXIT_OK
    }
}

fn execute(command: Command) -> Result<i32, HarnessError> {
    match command {
        Command::Run { config, out, format } => {
            let config = load_config(&config)?;
            let file = run(&config)?;
            let format = match format {
                FormatArg::Csv => Format::Csv,
                FormatArg::Jsonl => Format::JsonLines,
            };
            let bytes = emit_report(&file, format);
            match out.or_else(|| config.outputs.report_path.clone()) {
                Some(path) => write_file(&path, &bytes)?,
                None => write_stdout(&bytes)?,
            }
            if let Some(path) = &config.outputs.samples_path {
                write_file(path, &emit_samples(&file.report))?;
            }
            let falsified = file.verdicts.falsified_required();
            for name in &falsified {
                eprintln!("required hypothesis {name} falsified");
            }
            Ok(status(!falsified.is_empty()))
        }
        Command::Check { config } => {
            let config = load_config(&config)?;
            config.validate()?;
            let verdicts = run_checks(&config)?;
            let mut text = String::new();
            for r in &verdicts.reports {
                let role = if verdicts.is_required(r.name) { "required" } else { "reported" };
                text.push_str(&format!("{} {} {}\n", r.name, r.verdict.as_str(), role));
            }
            write_stdout(text.as_bytes())?;
            Ok(status(!verdicts.falsified_required().is_empty()))
        }
        Command::ListExamples => {
            let mut text = String::new();
            for info in list_examples() {
                text.push_str(&format!("{}\t{}\n", info.name, info.summary));
            }
            write_stdout(text.as_bytes())?;
            Ok(EXIT_OK)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            // exit status 2 is reserved for falsified hypotheses
            let code = if err.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            return ExitCode::from(code as u8);
        }
    };
    match execute(cli.command) {
        Ok(code) => ExitCode::from(code as u8),
        Err(err) => {
            eprintln!("lavgap: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
