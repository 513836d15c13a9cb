//! `reflect-sim`: run simulated experiments, re-analyze reports, export radar data.
//!
//! Exit codes: 0 success, 1 invalid input, 2 I/O failure.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use reflect_core::lexicon::{LexiconSet, DIMENSIONS};
use reflect_core::sim::experiment::analyze_sessions;
use reflect_core::sim::{analyze, export_radar, run_experiment, ExperimentConfig, RunReport};
use reflect_core::Error;

#[derive(Debug, Parser)]
#[command(version, about = "Simulated reflection experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a seeded experiment with simulated personas and write the report.
    Simulate {
        /// Participants per condition.
        #[arg(long, default_value_t = 64)]
        n: usize,
        /// Assisted turns per session.
        #[arg(long, default_value_t = 10)]
        turns: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Clusters for the unaided-profile k-means.
        #[arg(long, default_value_t = 3)]
        k: usize,
        /// Report JSON path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-score a report's transcripts, optionally with another lexicon.
    Analyze {
        #[arg(long)]
        report: PathBuf,
        /// Lexicon JSON; the embedded one by default.
        #[arg(long)]
        lexicon: Option<PathBuf>,
        /// Write the re-analyzed report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-cluster a report's unaided z-scores.
    Kmeans {
        #[arg(long)]
        report: PathBuf,
        #[arg(long)]
        k: usize,
        /// Seed for k-means++; the report's seed by default.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write radar.csv and manifest.json for a report.
    Radar {
        #[arg(long)]
        report: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(text) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Io(_) => 2,
        _ => 1,
    }
}

fn run(command: Command) -> Result<String, Error> {
    match command {
        Command::Simulate { n, turns, epsilon, seed, k, out } => {
            let config = ExperimentConfig { n_per_condition: n, turns, epsilon, seed, k, ..Default::default() };
            let report = run_experiment(&config)?;
            write_report(&report, &out)?;
            let mut text = summary(&report);
            let _ = writeln!(text, "report: {}", out.display());
            Ok(text)
        }
        Command::Analyze { report, lexicon, out } => {
            let report = read_report(&report)?;
            let lexicon = match lexicon {
                Some(path) => LexiconSet::load(&path)?,
                None => LexiconSet::embedded(),
            };
            let report = analyze(&report, &lexicon)?;
            if let Some(out) = out {
                write_report(&report, &out)?;
            }
            Ok(summary(&report))
        }
        Command::Kmeans { report, k, seed } => {
            let report = read_report(&report)?;
            let analysis = analyze_sessions(&report.sessions, k, seed.unwrap_or(report.config.seed))?;
            let c = &analysis.clusters;
            let mut text = format!(
                "k={k} iterations={} converged={} persona_ari={:.4}\n",
                c.iterations, c.converged, analysis.cluster_persona_ari
            );
            let _ = writeln!(text, "cluster\tn\t{}", DIMENSIONS.join("\t"));
            for (i, centroid) in c.centroids.iter().enumerate() {
                let n = c.assignments.iter().filter(|&&a| a == i).count();
                let _ = writeln!(text, "{i}\t{n}\t{:.4}\t{:.4}\t{:.4}", centroid[0], centroid[1], centroid[2]);
            }
            Ok(text)
        }
        Command::Radar { report, out } => {
            let report = read_report(&report)?;
            export_radar(&report, &out)?;
            Ok(format!("radar: {}\n", out.display()))
        }
    }
}

fn read_report(path: &Path) -> Result<RunReport, Error> {
    let text = std::fs::read_to_string(path)?;
    let report: RunReport = serde_json::from_str(&text)?;
    report.config.validate()?;
    Ok(report)
}

fn write_report(report: &RunReport, path: &Path) -> Result<(), Error> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

fn summary(report: &RunReport) -> String {
    let a = &report.analysis;
    let mut text = format!(
        "sessions={} seed={} epsilon={} turns={}\n",
        report.sessions.len(),
        report.config.seed,
        report.config.epsilon,
        report.config.turns
    );
    let _ = writeln!(text, "condition\tspread\t{}", DIMENSIONS.join("\t"));
    for c in &a.conditions {
        let z = c.assisted_mean_z;
        let _ = writeln!(text, "{:?}\t{:.4}\t{:.4}\t{:.4}\t{:.4}", c.condition, c.spread, z[0], z[1], z[2]);
    }
    let _ = writeln!(text, "persona\tcondition\tn\tunaided\tassisted");
    for p in &a.personas {
        let _ = writeln!(
            text,
            "{}\t{:?}\t{}\t{}\t{}",
            p.persona, p.condition, p.n, DIMENSIONS[p.unaided_argmax], DIMENSIONS[p.assisted_argmax]
        );
    }
    let d: Vec<String> = a.cohens_d.iter().map(|d| d.map_or("undefined".into(), |d| format!("{d:.4}"))).collect();
    let _ = writeln!(text, "cohens_d (experimental vs baseline, assisted): {}", d.join(" "));
    let _ = writeln!(text, "cluster/persona ARI: {:.4}", a.cluster_persona_ari);
    text
}
