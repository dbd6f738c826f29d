// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use rhbm::experiment::{
    cmd_eval_embedding, cmd_generate, cmd_stats, cmd_sweep, sweep_csv, ExperimentConfig,
    SweepParam, SweepSpec,
};
use rhbm::Error;

/// Random Hyperbolic Block Model toolkit.
#[derive(Parser)]
#[command(name = "rhbm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Calibrate the model and sample one graph.
    Generate(ModelArgs),
    /// Vary one parameter over a list of values and several seeds.
    Sweep {
        #[command(flatten)]
        model: ModelArgs,
        /// nodes, avg-degree, communities, rho, q or beta.
        #[arg(long)]
        param: String,
        /// Comma-separated values (may be empty); defaults to the reference grid.
        #[arg(long, allow_hyphen_values = true)]
        values: Option<String>,
        /// Seeds per value.
        #[arg(long, default_value_t = 10)]
        seeds: usize,
        #[arg(long)]
        parallel: bool,
    },
    /// Statistics of an edge list.
    Stats {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        /// Output directory for stats.csv and stats_mixing.csv.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare an S^D embedding with the graph it was inferred from.
    EvalEmbedding {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        partition: PathBuf,
        #[arg(long)]
        embedding: PathBuf,
        /// Reference mixing matrix; defaults to the input graph's.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, default_value_t = 10)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ModelArgs {
    /// Flat key=value file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long)]
    avg_degree: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    communities: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    rho: Option<f64>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ModelArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut c = ExperimentConfig::default();
        if let Some(path) = &self.config {
            c.apply_file(path)?;
        }
        macro_rules! take {
            ($($f:ident),*) => { $(if let Some(v) = self.$f.clone() { c.$f = v; })* };
        }
        take!(nodes, avg_degree, gamma, beta, communities, rho, q, seed, tol, max_iter, samples, out);
        c.validate()?;
        Ok(c)
    }
}

fn exit_code(e: &Error) -> ExitCode {
    match e {
        Error::Infeasible(_) => ExitCode::from(2),
        _ => ExitCode::from(1),
    }
}

fn write(path: &std::path::Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io { path: dir.into(), source: e })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io { path: path.into(), source: e })
}

fn parse_values(list: &str) -> Result<Vec<f64>, Error> {
    list.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse().map_err(|_| Error::Domain(format!("invalid sweep value {v:?}"))))
        .collect()
}

fn run(cli: Cli) -> Result<ExitCode, Error> {
    match cli.command {
        Command::Generate(args) => {
            let config = args.resolve()?;
            let out = cmd_generate(&config)?;
            let r = &out.report;
            println!(
                "{} nodes, {} edges, mean degree {:.3}, mixing error {:.4}",
                out.stats.num_nodes, out.stats.num_edges, out.stats.mean_degree, out.mixing_error
            );
            println!(
                "calibration: {} after {} iterations (degree residual {:.3e}, block residual {:.3e})",
                if r.converged { "converged" } else { "NOT converged" },
                r.iterations,
                r.max_degree_residual,
                r.max_block_residual
            );
            println!("wrote {}", config.out.display());
            Ok(if r.converged { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Sweep { model, param, values, seeds, parallel } => {
            let base = model.resolve()?;
            let param = SweepParam::parse(&param)?;
            let values = match values {
                Some(list) => parse_values(&list)?,
                None => param.grid(),
            };
            let spec = SweepSpec {
                param,
                values,
                seeds,
                parallel,
            };
            let rows = cmd_sweep(&spec, &base)?;
            let path = base.out.join(format!("sweep_{}.csv", param.name()));
            write(&path, &sweep_csv(&rows))?;
            for r in rows.iter().filter(|r| r.error.is_some()) {
                eprintln!("{}={} seed {}: {}", param.name(), r.value, r.config.seed, r.error.as_deref().unwrap_or(""));
            }
            let failed = rows.iter().filter(|r| !r.converged).count();
            println!("{} cells, {} not converged; wrote {}", rows.len(), failed, path.display());
            Ok(if failed == 0 { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Stats { edges, partition, out } => {
            let stats = cmd_stats(&edges, &partition)?;
            print!("{}", stats.to_csv());
            if let Some(dir) = out {
                rhbm::experiment::write_stats(&stats, &dir.join("stats.csv"), &dir.join("stats_mixing.csv"))?;
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::EvalEmbedding { edges, partition, embedding, target, samples, seed, out } => {
            let eval = cmd_eval_embedding(&edges, &partition, &embedding, samples, seed, target.as_deref())?;
            print!("{}", eval.to_csv());
            if let Some(dir) = out {
                write(&dir.join("embedding_eval.csv"), &eval.to_csv())?;
                write(&dir.join("embedding_degrees.csv"), &eval.degree_csv())?;
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
