use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hapticvlm::embedding::{write_database, EmbeddingVector};
use hapticvlm::haptics::{export_wav, synthesize, HapticPattern, PatternId, DEFAULT_SAMPLE_RATE_HZ};
use hapticvlm::service::{self, load_database, AppConfig, AppContext};
use hapticvlm::study::{
    confusion_matrix, generate_plan, paired_t_tests, pairwise_report, pairwise_rows, parse_log, rm_anova, summarize,
    trial_records, AccuracyTable, AnovaMode, LogEntry,
};
use hapticvlm::thermal::{PeltierConfig, ThermalMode, ThermalState};
use hapticvlm::vlm::{evaluate_tolerance, parse_eval_cases, DEFAULT_TOLERANCE_C};

type CliResult = Result<(), Box<dyn std::error::Error>>;

#[derive(Parser)]
#[command(name = "hapticvlm", version, about = "Haptic rendering engine and study tooling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Material embedding databases.
    Db {
        #[command(subcommand)]
        command: DbCommand,
    },
    /// Vibrotactile pattern rendering.
    Synth {
        #[command(subcommand)]
        command: SynthCommand,
    },
    /// Peltier plate simulation.
    Thermal {
        #[command(subcommand)]
        command: ThermalCommand,
    },
    /// Temperature estimate evaluation.
    Temp {
        #[command(subcommand)]
        command: TempCommand,
    },
    /// Trial plans and the study server.
    Study {
        #[command(subcommand)]
        command: StudyCommand,
    },
    /// Confusion, ANOVA and pairwise statistics from trial logs.
    Stats {
        /// Log files or directories of `.jsonl` logs.
        #[arg(long = "log", required = true, num_args = 1..)]
        logs: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_value = "confusion,anova,pairwise")]
        report: Vec<Report>,
        #[arg(long, value_enum, default_value_t = Mode::Factorial)]
        mode: Mode,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum DbCommand {
    /// Converts a text import (`name, audio_key, c0, c1, ...`) to the binary format.
    Build {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Matches a query vector against a database.
    Query {
        #[arg(long)]
        db: PathBuf,
        /// Comma-separated components.
        #[arg(long, allow_hyphen_values = true)]
        vector: String,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        threshold: f64,
        #[arg(long, default_value_t = 3)]
        top_k: usize,
    },
}

#[derive(Subcommand)]
enum SynthCommand {
    Render {
        #[arg(long)]
        pattern: PatternId,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = DEFAULT_SAMPLE_RATE_HZ)]
        rate: u32,
        #[arg(long)]
        duration: Option<f64>,
    },
}

#[derive(Subcommand)]
enum ThermalCommand {
    /// Prints `time_s,plate_c,mode` rows.
    Simulate {
        #[arg(long, default_value = "hot")]
        mode: ThermalMode,
        #[arg(long, default_value_t = 10.0)]
        duration: f64,
        #[arg(long, default_value_t = 0.5)]
        dt: f64,
        #[arg(long, allow_hyphen_values = true)]
        start: Option<f64>,
    },
}

#[derive(Subcommand)]
enum TempCommand {
    /// Scores `predicted,actual` rows against a tolerance.
    Evaluate {
        #[arg(long)]
        cases: PathBuf,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE_C)]
        tolerance: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
}

#[derive(Subcommand)]
enum StudyCommand {
    Plan {
        #[arg(long)]
        participant: String,
        #[arg(long)]
        seed: u64,
    },
    Serve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides `server.port`; 0 picks a free port.
        #[arg(long)]
        port: Option<u16>,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Report {
    Confusion,
    Anova,
    Pairwise,
    Accuracy,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Factorial,
    Single,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Csv,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        // a closed pipe (`hapticvlm study plan ... | head`) is not an error
        Err(e)
            if e.downcast_ref::<io::Error>()
                .is_some_and(|e| e.kind() == io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Db { command } => db(command),
        Command::Synth {
            command:
                SynthCommand::Render {
                    pattern,
                    out,
                    rate,
                    duration,
                },
        } => {
            let mut p = HapticPattern::builtin(pattern);
            if let Some(d) = duration {
                p = p.with_param("duration_s", d)?;
            }
            let buf = synthesize(&p, rate)?;
            export_wav(&buf, &out)?;
            writeln!(
                io::stdout(),
                "{} {} samples at {} Hz, peak {:.3} -> {}",
                pattern,
                buf.samples.len(),
                rate,
                buf.peak(),
                out.display()
            )?;
            Ok(())
        }
        Command::Thermal {
            command:
                ThermalCommand::Simulate {
                    mode,
                    duration,
                    dt,
                    start,
                },
        } => {
            let cfg = PeltierConfig::default();
            let mut state = ThermalState::at_ambient(&cfg);
            if let Some(t) = start {
                state.plate_temp_c = t;
            }
            state = state.set_mode(mode);
            writeln!(io::stdout(), "time_s,plate_c,mode")?;
            writeln!(
                io::stdout(),
                "{:.3},{:.4},{:?}",
                state.sim_time_s,
                state.plate_temp_c,
                state.mode
            )?;
            let steps = (duration / dt).round() as usize;
            for _ in 0..steps {
                state = state.step(&cfg, dt)?;
                writeln!(
                    io::stdout(),
                    "{:.3},{:.4},{:?}",
                    state.sim_time_s,
                    state.plate_temp_c,
                    state.mode
                )?;
            }
            Ok(())
        }
        Command::Temp {
            command:
                TempCommand::Evaluate {
                    cases,
                    tolerance,
                    format,
                },
        } => {
            let text = std::fs::read_to_string(&cases)?;
            let eval = evaluate_tolerance(&parse_eval_cases(&text)?, tolerance)?;
            match format {
                Format::Text => write!(io::stdout(), "{}", eval.report())?,
                Format::Csv => write!(io::stdout(), "{}", eval.rows())?,
            }
            Ok(())
        }
        Command::Study {
            command: StudyCommand::Plan { participant, seed },
        } => {
            let plan = generate_plan(&participant, seed);
            writeln!(io::stdout(), "trial,condition")?;
            for (i, c) in plan.trials.iter().enumerate() {
                writeln!(io::stdout(), "{i},{c}")?;
            }
            Ok(())
        }
        Command::Study {
            command: StudyCommand::Serve { config, port },
        } => {
            let path = service::config_path(config.as_deref());
            let mut cfg = AppConfig::load(&path)?;
            if let Some(p) = port {
                cfg.port = p;
            }
            service::run(AppContext::load(cfg)?)?;
            Ok(())
        }
        Command::Stats {
            logs,
            report,
            mode,
            format,
        } => stats(&logs, &report, mode, format),
    }
}

fn db(command: DbCommand) -> CliResult {
    match command {
        DbCommand::Build { input, out } => {
            let db = load_database(&input)?;
            let file = std::fs::File::create(&out)?;
            write_database(&db, std::io::BufWriter::new(file))?;
            writeln!(
                io::stdout(),
                "{} materials, dimension {} -> {}",
                db.len(),
                db.dimension(),
                out.display()
            )?;
        }
        DbCommand::Query {
            db,
            vector,
            threshold,
            top_k,
        } => {
            let db = load_database(&db)?;
            let components = vector
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<Result<Vec<_>, _>>()?;
            let query = EmbeddingVector::new(components)?;
            match db.match_material(&query, threshold)? {
                Some(m) => writeln!(io::stdout(), "{m}")?,
                None => writeln!(io::stdout(), "no match above {threshold}")?,
            }
            for c in db.top_k(&query, top_k.min(db.len()))? {
                writeln!(io::stdout(), "  {:<16} {:.6}", c.name, c.similarity)?;
            }
        }
    }
    Ok(())
}

fn collect_logs(paths: &[PathBuf]) -> Result<Vec<LogEntry>, Box<dyn std::error::Error>> {
    let mut files: Vec<PathBuf> = Vec::new();
    for p in paths {
        if p.is_dir() {
            let mut found: Vec<PathBuf> = std::fs::read_dir(p)?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.extension().is_some_and(|x| x == "jsonl"))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p.clone());
        }
    }
    let mut entries = Vec::new();
    for f in &files {
        let text = std::fs::read_to_string(f).map_err(|e| format!("{}: {e}", display(f)))?;
        entries.extend(parse_log(&text).map_err(|e| format!("{}: {e}", display(f)))?);
    }
    Ok(entries)
}

fn display(p: &Path) -> String {
    p.display().to_string()
}

fn stats(logs: &[PathBuf], reports: &[Report], mode: Mode, format: Format) -> CliResult {
    let records = trial_records(&collect_logs(logs)?);
    for report in reports {
        match report {
            Report::Confusion => {
                let m = confusion_matrix(&records)?;
                match format {
                    Format::Text => {
                        write!(io::stdout(), "{}", m.report())?;
                        write!(io::stdout(), "{}", summarize(&m).report())?;
                    }
                    Format::Csv => write!(io::stdout(), "{}", m.rows())?,
                }
            }
            Report::Accuracy => write!(io::stdout(), "{}", AccuracyTable::from_records(&records)?.rows())?,
            Report::Anova => {
                let data = AccuracyTable::from_records(&records)?.to_repeated_measures()?;
                let mode = match mode {
                    Mode::Factorial => AnovaMode::Factorial,
                    Mode::Single => AnovaMode::SingleFactor,
                };
                let table = rm_anova(&data, mode)?;
                match format {
                    Format::Text => write!(io::stdout(), "{}", table.report())?,
                    Format::Csv => write!(io::stdout(), "{}", table.rows())?,
                }
            }
            Report::Pairwise => {
                let results = paired_t_tests(&AccuracyTable::from_records(&records)?)?;
                match format {
                    Format::Text => write!(io::stdout(), "{}", pairwise_report(&results))?,
                    Format::Csv => write!(io::stdout(), "{}", pairwise_rows(&results))?,
                }
            }
        }
        writeln!(io::stdout())?;
    }
    Ok(())
}
