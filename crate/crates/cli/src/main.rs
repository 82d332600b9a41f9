use std::path::PathBuf;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use kiea_cli::{output, Setup};
use kiea_core::{ClusterParams, GaParams, KnowledgeBase, RunBudget, Weights};

#[derive(Parser)]
#[command(name = "kiea", version, about = "Knowledge-integrated GA runs and experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One two-stage run: fingerprint, classify, continue under the pilot's strategy.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        function: String,
        #[arg(long)]
        kb: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Include wall-clock times in the output files.
        #[arg(long)]
        wall_clock: bool,
    },
    /// Record pilot fingerprints for the default pilots and save the knowledge base.
    BuildKb {
        #[command(flatten)]
        common: Common,
        /// Output file.
        #[arg(long)]
        kb: PathBuf,
        /// Fingerprints per pilot.
        #[arg(long, default_value_t = kiea_cli::DEFAULT_FINGERPRINTS)]
        count: usize,
    },
    /// Classify fresh fingerprints of a function against a knowledge base.
    Classify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        function: String,
        #[arg(long)]
        kb: PathBuf,
        /// Pilot the fingerprints should be classified as.
        #[arg(long)]
        expected: Option<String>,
        #[arg(long, default_value_t = 50)]
        reps: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Plain GA runs over a population size x mutation rate grid.
    StrategyGrid {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        function: String,
        #[arg(long, value_delimiter = ',', default_value = "40,60")]
        pops: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.01,0.1")]
        muts: Vec<f64>,
        #[arg(long, default_value_t = kiea_cli::DEFAULT_REPS)]
        reps: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Paired runs with and without the knowledge base.
    Convergence {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        function: String,
        #[arg(long)]
        kb: PathBuf,
        #[arg(long, default_value_t = kiea_cli::DEFAULT_REPS)]
        reps: usize,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        wall_clock: bool,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = kiea_cli::DEFAULT_DIM)]
    dim: usize,
    #[arg(long, default_value_t = kiea_cli::DEFAULT_SEED)]
    seed: u64,
    /// Generations recorded before classification.
    #[arg(long, default_value_t = kiea_cli::DEFAULT_G_C)]
    gc: usize,
    /// Initial population size.
    #[arg(long)]
    pop: Option<usize>,
    /// Initial per-gene mutation rate.
    #[arg(long = "mut")]
    mutation: Option<f64>,
    /// Initial crossover rate.
    #[arg(long)]
    cross: Option<f64>,
    /// Mutation standard deviation as a fraction of the axis width.
    #[arg(long)]
    sigma: Option<f64>,
    /// Function evaluation budget.
    #[arg(long, default_value_t = kiea_cli::DEFAULT_FES)]
    fes: u64,
    /// Generation budget.
    #[arg(long, default_value_t = kiea_cli::DEFAULT_MAX_GENERATIONS)]
    gens: usize,
    #[arg(long, default_value_t = kiea_cli::DEFAULT_TERMINATION_ERROR)]
    term_error: f64,
    /// `paper`, `similarity` or six comma-separated reals.
    #[arg(long, default_value = "paper")]
    weights: Weights,
}

impl Common {
    fn setup(&self) -> Setup {
        let d = GaParams::default();
        Setup {
            dim: self.dim,
            seed: self.seed,
            s0: GaParams {
                population_size: self.pop.unwrap_or(d.population_size),
                mutation_rate: self.mutation.unwrap_or(d.mutation_rate),
                crossover_rate: self.cross.unwrap_or(d.crossover_rate),
                mutation_sigma_fraction: self.sigma.unwrap_or(d.mutation_sigma_fraction),
                ..d
            },
            budget: RunBudget {
                max_generations: self.gens,
                max_evaluations: self.fes,
                termination_error: self.term_error,
            },
            g_c: self.gc,
            weights: self.weights,
            cluster: ClusterParams::default(),
        }
    }
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run {
            common,
            function,
            kb,
            out,
            wall_clock,
        } => {
            let setup = common.setup();
            let registry = setup.registry()?;
            let f = registry.get(&function)?;
            let kb = KnowledgeBase::load(&kb)?;
            let result = kiea_cli::single_run(f, &kb, &setup)?;
            let r = &result.run;
            println!(
                "{} seed {}: pilot {}, strategy {}, {} evaluations, {} generations, best {:e}, converged {}",
                r.function, r.seed, result.chosen_pilot, r.strategy_id, r.evaluations, r.generations, r.best_fitness, r.converged
            );
            print_files(&output::write_run(&out, &result, wall_clock)?);
        }
        Command::BuildKb { common, kb, count } => {
            let setup = common.setup();
            let built = kiea_cli::build_default_kb(&setup, count)?;
            built.save(&kb)?;
            println!(
                "{} pilots x {count} fingerprints, G_C = {}",
                built.pilots.len(),
                setup.g_c
            );
            print_files(&[kb]);
        }
        Command::Classify {
            common,
            function,
            kb,
            expected,
            reps,
            out,
        } => {
            let setup = common.setup();
            let registry = setup.registry()?;
            let f = registry.get(&function)?;
            let kb = KnowledgeBase::load(&kb)?;
            let matrix = kiea_cli::classify_matrix(f, &kb, &setup, reps, expected.as_deref())?;
            println!("{function}: {:?}, majority {}", matrix.label_counts(), matrix.majority());
            if let Some(rate) = matrix.success_rate() {
                println!("success rate {rate:.3}");
            }
            print_files(&output::write_classify(&out, &matrix)?);
        }
        Command::StrategyGrid {
            common,
            function,
            pops,
            muts,
            reps,
            out,
        } => {
            let setup = common.setup();
            let registry = setup.registry()?;
            let f = registry.get(&function)?;
            let grid = kiea_cli::strategy_grid(f, &setup, &pops, &muts, reps)?;
            for c in &grid.cells {
                println!(
                    "pop {:>4} mut {:<6} mean evaluations {:>12.1} success {:.2}",
                    c.population_size, c.mutation_rate, c.mean_evaluations, c.success_rate
                );
            }
            let b = grid.best_cell();
            println!("best: pop {} mut {}", b.population_size, b.mutation_rate);
            print_files(&output::write_grid(&out, &grid)?);
        }
        Command::Convergence {
            common,
            function,
            kb,
            reps,
            out,
            wall_clock,
        } => {
            let setup = common.setup();
            let registry = setup.registry()?;
            let f = registry.get(&function)?;
            let kb = KnowledgeBase::load(&kb)?;
            let report = kiea_cli::convergence_compare(f, &kb, &setup, reps)?;
            for arm in [&report.baseline, &report.kiea] {
                println!(
                    "{:<8} mean {:>12.1} std {:>12.1} worst {:>12.1} success {:.2}",
                    arm.arm, arm.mean, arm.std, arm.order_stats[4], arm.success_rate
                );
            }
            print_files(&output::write_convergence(&out, &report, wall_clock)?);
        }
    }
    Ok(())
}
