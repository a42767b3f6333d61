//! Command-line surface. [`run`] executes a parsed command and writes its
//! report; the binary only maps errors to exit codes.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use netprice_core::instances::{
    gen_counterexample, gen_expstruct, gen_jump, gen_ppad, gen_random, BimatrixGame,
};
use netprice_core::pricing::{
    fptas, grid_bruteforce_opt, optimal_scaled, optimal_shifted, optimal_uniform_price,
    DEFAULT_GRID_CAP,
};
use netprice_core::rat::{int, parse_rat, parse_rat_list};
use netprice_core::sweep::{equilibrium_at_price_vector, sweep};
use netprice_core::transfer::{
    default_tol, is_eps_approx_equilibrium, is_equilibrium_exact, iterate_fixed_point, transfer,
    PriceAssignment,
};
use netprice_core::{Error, GroupedInstance, ProbVec, Rat, Side};
use rand::{Rng, SeedableRng};

use crate::format::{parse_instance, parse_probvec, serialize_instance, FormatError};
use crate::output::{self, Mode};

#[derive(thiserror::Error, Debug)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Format(#[from] FormatError),
    #[error("{0}")]
    Core(#[from] Error),
    #[error("{0}")]
    Usage(String),
    /// `verify` ran and the vector is not an equilibrium.
    #[error("check failed")]
    CheckFailed,
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::CheckFailed => 1,
            CliError::Core(e) | CliError::Format(FormatError::Invalid(e)) if e.is_internal() => 3,
            _ => 2,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "netprice", version, about = "Exact equilibria and optimal prices for network pricing games")]
pub struct Cli {
    /// Emit a JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Pess,
    Opt,
}

impl From<SideArg> for Side {
    fn from(s: SideArg) -> Side {
        match s {
            SideArg::Pess => Side::Pessimistic,
            SideArg::Opt => Side::Optimistic,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Uniform,
    Shift,
    Scale,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Start {
    Zero,
    One,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GenFamily {
    Counterexample,
    Jump,
    Expstruct,
    Random,
    Ppad,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GameArg {
    Pennies,
    Random,
}

#[derive(Args, Debug)]
pub struct PriceArgs {
    /// Uniform price.
    #[arg(long, conflicts_with = "prices")]
    pub price: Option<String>,
    /// One price per group, comma separated.
    #[arg(long)]
    pub prices: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Equilibrium as a piecewise-linear function of the price.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "pess")]
        side: SideArg,
        /// Per-agent price offsets, comma separated.
        #[arg(long)]
        offsets: Option<String>,
    },
    /// Equilibrium at one price or price vector.
    Eval {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        price: PriceArgs,
        #[arg(long, value_enum, default_value = "pess")]
        side: SideArg,
    },
    /// Revenue-maximizing price along a one-parameter family.
    Optimize {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "uniform")]
        family: Family,
        /// Base price vector for the shift and scale families.
        #[arg(long)]
        base: Option<String>,
        /// Equilibrium side; only the uniform family supports `opt`.
        #[arg(long, value_enum, default_value = "pess")]
        side: SideArg,
    },
    /// Approximately optimal per-group prices.
    Fptas {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        eps: String,
    },
    /// Best per-group prices on a regular grid.
    Grid {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        lo: String,
        #[arg(long)]
        hi: String,
        #[arg(long)]
        step: String,
        #[arg(long, default_value_t = DEFAULT_GRID_CAP)]
        cap: u128,
    },
    /// Check whether a vector is an (approximate) equilibrium.
    Verify {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        price: PriceArgs,
        /// File holding the probability vector.
        #[arg(long)]
        q: PathBuf,
        /// Accept deviations strictly below eps instead of exact equality.
        #[arg(long)]
        eps: Option<String>,
    },
    /// Iterate the best-response map from all-zeros or all-ones.
    Oracle {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        price: PriceArgs,
        #[arg(long, value_enum, default_value = "zero")]
        start: Start,
        #[arg(long, default_value_t = 10_000)]
        max_iters: usize,
        #[arg(long)]
        tol: Option<String>,
    },
    /// Write a generated instance.
    Gen {
        #[arg(long, value_enum)]
        family: GenFamily,
        #[arg(long, default_value_t = 4)]
        n: usize,
        #[arg(long, default_value_t = 0.5)]
        density: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Make the random instance diagonally dominant.
        #[arg(long)]
        dd: bool,
        #[arg(long, default_value = "1/100")]
        delta: String,
        #[arg(long, value_enum, default_value = "pennies")]
        game: GameArg,
        /// Output file, or `-` for standard output.
        #[arg(long)]
        out: PathBuf,
    },
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn load(path: &Path) -> Result<GroupedInstance, CliError> {
    Ok(parse_instance(&read(path)?)?)
}

fn rat(s: &str) -> Result<Rat, CliError> {
    Ok(parse_rat(s)?)
}

fn rats(s: &str) -> Result<Vec<Rat>, CliError> {
    Ok(parse_rat_list(s)?)
}

/// Per-group prices from `--price` (shared by all groups) or `--prices`.
fn group_prices(g: &GroupedInstance, args: &PriceArgs) -> Result<Vec<Rat>, CliError> {
    match (&args.price, &args.prices) {
        (Some(p), None) => Ok(vec![rat(p)?; g.k]),
        (None, Some(ps)) => {
            let ps = rats(ps)?;
            if ps.len() != g.k {
                return Err(CliError::Usage(format!("expected {} prices, got {}", g.k, ps.len())));
            }
            Ok(ps)
        }
        _ => Err(CliError::Usage("give --price or --prices".into())),
    }
}

fn emit(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes())
        .map_err(|source| CliError::Io { path: PathBuf::from("<stdout>"), source })
}

fn ppad_game(game: GameArg, n: usize, seed: u64) -> Result<BimatrixGame, CliError> {
    match game {
        GameArg::Pennies => Ok(BimatrixGame::matching_pennies()),
        GameArg::Random => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut m = || -> Vec<Vec<Rat>> {
                (0..n)
                    .map(|_| (0..n).map(|_| netprice_core::rat::frac(rng.gen_range(-4..=4), 4)).collect())
                    .collect()
            };
            let (a, b) = (m(), m());
            Ok(BimatrixGame::new(a, b)?)
        }
    }
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    let mode = if cli.json { Mode::Json } else { Mode::Text };
    match &cli.command {
        Command::Solve { input, side, offsets } => {
            let g = load(input)?;
            let offsets = offsets.as_deref().map(rats).transpose()?.unwrap_or_default();
            let outcome = sweep(&g.instance, &offsets, (*side).into())?;
            emit(out, &output::piecewise(&outcome.equilibrium, mode))
        }
        Command::Eval { input, price, side } => {
            let g = load(input)?;
            let prices = group_prices(&g, price)?;
            let q = equilibrium_at_price_vector(&g, &prices, (*side).into())?;
            emit(out, &output::probvec(&q, mode))
        }
        Command::Optimize { input, family, base, side } => {
            let g = load(input)?;
            let side = Side::from(*side);
            if side == Side::Optimistic && *family != Family::Uniform {
                return Err(CliError::Usage("only the uniform family supports --side opt".into()));
            }
            let base = match (family, base) {
                (Family::Uniform, _) => None,
                (_, Some(b)) => Some(rats(b)?),
                (_, None) => return Err(CliError::Usage("--base is required for this family".into())),
            };
            let result = match family {
                Family::Uniform => optimal_uniform_price(&sweep(&g.instance, &[], side)?.equilibrium)?,
                Family::Shift => optimal_shifted(&g, base.as_deref().unwrap_or_default())?,
                Family::Scale => optimal_scaled(&g, base.as_deref().unwrap_or_default())?,
            };
            emit(out, &output::pricing(&result, mode))
        }
        Command::Fptas { input, eps } => {
            let g = load(input)?;
            emit(out, &output::pricing(&fptas(&g, &rat(eps)?)?, mode))
        }
        Command::Grid { input, lo, hi, step, cap } => {
            let g = load(input)?;
            let result = grid_bruteforce_opt(&g, &rat(lo)?, &rat(hi)?, &rat(step)?, *cap)?;
            emit(out, &output::pricing(&result, mode))
        }
        Command::Verify { input, price, q, eps } => {
            let g = load(input)?;
            let prices = PriceAssignment::from_groups(&g, &group_prices(&g, price)?);
            let q = parse_probvec(&read(q)?)?;
            if q.len() != g.instance.n() {
                return Err(CliError::Usage(format!("expected {} probabilities", g.instance.n())));
            }
            let best = transfer(&g.instance, &prices, &q);
            let deviation = q.iter().zip(best.iter()).map(|(a, b)| num_traits::Signed::abs(&(a - b))).max();
            let deviation = deviation.unwrap_or_else(|| int(0));
            let ok = match eps {
                Some(e) => is_eps_approx_equilibrium(&g.instance, &prices, &q, &rat(e)?),
                None => is_equilibrium_exact(&g.instance, &prices, &q),
            };
            let text = match mode {
                Mode::Text => format!(
                    "equilibrium: {}\nmax deviation = {deviation}\nbest response {}",
                    if ok { "yes" } else { "no" },
                    output::probvec(&best, Mode::Text)
                ),
                Mode::Json => format!(
                    "{}\n",
                    serde_json::json!({
                        "equilibrium": ok,
                        "max_deviation": netprice_core::rat::to_fraction_string(&deviation),
                    })
                ),
            };
            emit(out, &text)?;
            if ok {
                Ok(())
            } else {
                Err(CliError::CheckFailed)
            }
        }
        Command::Oracle { input, price, start, max_iters, tol } => {
            let g = load(input)?;
            let prices = PriceAssignment::from_groups(&g, &group_prices(&g, price)?);
            let n = g.instance.n();
            let from = match start {
                Start::Zero => ProbVec::zeros(n),
                Start::One => ProbVec::ones(n),
            };
            let tol = tol.as_deref().map(rat).transpose()?.unwrap_or_else(default_tol);
            let run = iterate_fixed_point(&g.instance, &prices, &from, *max_iters, &tol);
            let text = match mode {
                Mode::Text => format!(
                    "{}converged: {}\niterations = {}\n",
                    output::probvec(&run.q, Mode::Text),
                    if run.converged { "yes" } else { "no" },
                    run.iters
                ),
                Mode::Json => format!(
                    "{}\n",
                    serde_json::json!({
                        "q": run.q.iter().map(netprice_core::rat::to_fraction_string).collect::<Vec<_>>(),
                        "converged": run.converged,
                        "iterations": run.iters,
                    })
                ),
            };
            emit(out, &text)
        }
        Command::Gen { family, n, density, seed, dd, delta, game, out: path } => {
            let (g, extra) = match family {
                GenFamily::Counterexample => (GroupedInstance::single_group(gen_counterexample(*n)?), String::new()),
                GenFamily::Jump => (GroupedInstance::new(gen_jump(), 2, vec![0, 1])?, String::new()),
                GenFamily::Expstruct => (gen_expstruct(*n)?, String::new()),
                GenFamily::Random => {
                    (GroupedInstance::single_group(gen_random(*n, *density, *seed, *dd)?), String::new())
                }
                GenFamily::Ppad => {
                    let gadget = gen_ppad(&ppad_game(*game, *n, *seed)?, &rat(delta)?)?;
                    let r = &gadget.roles;
                    let mut roles = format!("# price 1/2, delta {}\n", gadget.delta);
                    for (i, (x, y)) in r.x.iter().zip(&r.y).enumerate() {
                        roles.push_str(&format!("# role X{0} = agent {1}, Y{0} = agent {2}\n", i + 1, x + 1, y + 1));
                    }
                    for (i, row) in r.u.iter().enumerate() {
                        for (j, u) in row.iter().enumerate() {
                            let v = r.v[i][j];
                            roles.push_str(&format!(
                                "# role U{0}{1} = agent {2}, V{0}{1} = agent {3}\n",
                                i + 1,
                                j + 1,
                                u + 1,
                                v + 1
                            ));
                        }
                    }
                    (GroupedInstance::single_group(gadget.instance), roles)
                }
            };
            let text = format!("{}{}", serialize_instance(&g), extra);
            if path.as_os_str() == "-" {
                emit(out, &text)
            } else {
                std::fs::write(path, text).map_err(|source| CliError::Io { path: path.clone(), source })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (Result<(), CliError>, String) {
        let cli = Cli::try_parse_from(std::iter::once("netprice").chain(args.iter().copied())).unwrap();
        let mut buf = Vec::new();
        let r = run(&cli, &mut buf);
        (r, String::from_utf8(buf).unwrap())
    }

    #[test]
    fn gen_then_eval_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("chain.txt");
        let fs = f.to_str().unwrap();
        run_args(&["gen", "--family", "counterexample", "--n", "4", "--out", fs]).0.unwrap();
        let (r, text) = run_args(&["eval", "--in", fs, "--price", "1"]);
        r.unwrap();
        assert_eq!(text, "q = [1/2, 1/4, 1, 1]\n");
    }

    #[test]
    fn exit_codes() {
        let (r, _) = run_args(&["solve", "--in", "/nonexistent/file"]);
        assert_eq!(r.unwrap_err().exit_code(), 1);
        assert_eq!(CliError::Core(Error::NegativePrice).exit_code(), 2);
        assert_eq!(CliError::Core(Error::InternalInvariantViolation("x".into())).exit_code(), 3);
        assert_eq!(CliError::Format(FormatError::MissingAgent { agent: 1 }).exit_code(), 2);
    }
}
