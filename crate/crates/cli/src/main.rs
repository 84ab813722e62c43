//! `gtp`: derive distributions, price payoffs, emit hedge tables,
//! verify replication, and compute upper/lower expected values for
//! finite-horizon betting games.
//!
//! Exit codes: 0 success/verified, 1 usage error, 2 arbitrage or
//! incoherent game, 3 verification failure, 4 enumeration cap exceeded.

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gtp_core::*;

#[derive(Parser)]
#[command(
    name = "gtp",
    version,
    about = "Exact pricing and distribution engine for finite-horizon betting games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derive a probability mass function from a family or a game
    Pmf(PmfArgs),
    /// Price a payoff by backward induction (or the closed form)
    Price(GameArgs),
    /// Emit the replicating hedge table
    Hedge(GameArgs),
    /// Replay every admissible path and check replication exactly
    Verify(GameArgs),
    /// Compute upper and lower expected values with witnesses
    Bounds(GameArgs),
    /// Rewrite an asset game as a discounted two-label ticket game
    ReduceCrr(CrrArgs),
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct OutputOpts {
    /// Output format (default json; verify defaults to a summary line)
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Decimal places shown next to exact values (rendering only)
    #[arg(long)]
    precision: Option<u32>,
    /// Write output to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PmfArgs {
    /// One of: binomial, hypergeometric, polya, staircase, multinomial
    #[arg(long, conflicts_with = "spec")]
    family: Option<String>,
    /// Game description as JSON; the pmf comes from path enumeration
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Rounds
    #[arg(long)]
    n: Option<usize>,
    /// Success probability (binomial) or comma-separated simplex point
    /// (multinomial)
    #[arg(long)]
    p: Option<String>,
    /// Red balls
    #[arg(long)]
    nu1: Option<u64>,
    /// Black balls
    #[arg(long)]
    nu2: Option<u64>,
    /// Balls added per draw (0 with replacement, -1 without, >0 Polya)
    #[arg(long)]
    c: Option<i64>,
    /// Comma-separated target weights on {0..N} (staircase)
    #[arg(long)]
    q: Option<String>,
    /// Re-derive the closed form from the game by enumeration and
    /// report agreement on stderr
    #[arg(long)]
    check: bool,
    /// Enumeration cap (refuses, never truncates)
    #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
    cap: u64,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct GameArgs {
    /// Game description as JSON
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Asset game given inline (with --s0 --u --d --r --n)
    #[arg(long)]
    crr: bool,
    #[arg(long)]
    s0: Option<String>,
    #[arg(long)]
    u: Option<String>,
    #[arg(long)]
    d: Option<String>,
    #[arg(long)]
    r: Option<String>,
    #[arg(long)]
    n: Option<usize>,
    /// Payoff: call:K, put:K, digital:K, power:K, constant:C, band:EPS,
    /// identity, or table:FILE
    #[arg(long)]
    payoff: String,
    /// Cross-check the result against an independent route
    #[arg(long)]
    check: bool,
    /// Enumeration cap (refuses, never truncates)
    #[arg(long, default_value_t = DEFAULT_PATH_CAP)]
    cap: u64,
    #[command(flatten)]
    output: OutputOpts,
}

#[derive(Args)]
struct CrrArgs {
    #[arg(long)]
    s0: String,
    #[arg(long)]
    u: String,
    #[arg(long)]
    d: String,
    #[arg(long)]
    r: String,
    #[arg(long)]
    n: usize,
    #[command(flatten)]
    output: OutputOpts,
}

struct CliError {
    code: i32,
    message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    fn verification(message: impl Into<String>) -> Self {
        CliError {
            code: 3,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::Arbitrage(_) | Error::CoherenceViolation(_) => 2,
            Error::EnumerationCap { .. } => 4,
            _ => 1,
        };
        let message = match &e {
            Error::IncompleteGame(_) => {
                format!("{e}; `gtp bounds` still computes upper and lower values")
            }
            _ => e.to_string(),
        };
        CliError { code, message }
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = i32::from(e.use_stderr());
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Pmf(args) => cmd_pmf(args),
        Command::Price(args) => cmd_price(args),
        Command::Hedge(args) => cmd_hedge(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Bounds(args) => cmd_bounds(args),
        Command::ReduceCrr(args) => cmd_reduce_crr(args),
    };
    if let Err(e) = result {
        if !e.message.is_empty() {
            eprintln!("error: {}", e.message);
        }
        std::process::exit(e.code);
    }
}

fn emit(output: &OutputOpts, text: &str) -> Result<(), CliError> {
    match &output.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout();
            if let Err(e) = writeln!(stdout, "{}", text.trim_end_matches('\n')) {
                if e.kind() == std::io::ErrorKind::BrokenPipe {
                    std::process::exit(0);
                }
                return Err(CliError::usage(format!("cannot write to stdout: {e}")));
            }
            Ok(())
        }
    }
}

fn parse_rat_arg(name: &str, value: &str) -> Result<Rat, CliError> {
    parse_rat(value)
        .map_err(|_| CliError::usage(format!("--{name}: cannot parse rational {value:?}")))
}

fn parse_rat_list(name: &str, value: &str) -> Result<Vec<Rat>, CliError> {
    value
        .split(',')
        .map(|s| parse_rat_arg(name, s.trim()))
        .collect()
}

fn require<T>(opt: Option<T>, flag: &str, ctx: &str) -> Result<T, CliError> {
    opt.ok_or_else(|| CliError::usage(format!("{ctx} requires --{flag}")))
}

fn load_spec(path: &PathBuf) -> Result<GameSpec, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
    GameSpec::from_json_str(&text).map_err(CliError::from)
}

fn parse_state_key(key: &str) -> Result<Quantity, CliError> {
    let parts: Vec<&str> = key.split_whitespace().collect();
    if parts.len() <= 1 {
        Ok(Quantity::Scalar(parse_rat_arg("table key", key)?))
    } else {
        let v = parts
            .iter()
            .map(|s| parse_rat_arg("table key", s))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Quantity::Vector(v))
    }
}

fn parse_payoff(s: &str, horizon: usize) -> Result<Payoff, CliError> {
    if s == "identity" {
        return Ok(Payoff::identity());
    }
    let (kind, arg) = s
        .split_once(':')
        .ok_or_else(|| CliError::usage(format!("unknown payoff {s:?}")))?;
    match kind {
        "call" => Ok(Payoff::call(parse_rat_arg("payoff", arg)?)),
        "put" => Ok(Payoff::put(parse_rat_arg("payoff", arg)?)),
        "digital" => Ok(Payoff::digital(parse_rat_arg("payoff", arg)?)),
        "constant" => Ok(Payoff::constant(parse_rat_arg("payoff", arg)?)),
        "power" => {
            let k: usize = arg.parse().map_err(|_| {
                CliError::usage(format!("power payoff needs an integer, got {arg:?}"))
            })?;
            Ok(Payoff::power(k))
        }
        "band" => Ok(Payoff::band(horizon, parse_rat_arg("payoff", arg)?)),
        "table" => {
            let text = fs::read_to_string(arg)
                .map_err(|e| CliError::usage(format!("cannot read payoff table {arg}: {e}")))?;
            let raw: BTreeMap<String, String> = serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("payoff table {arg}: {e}")))?;
            let mut table = BTreeMap::new();
            for (k, v) in raw {
                table.insert(parse_state_key(&k)?, parse_rat_arg("table value", &v)?);
            }
            Ok(Payoff::table(table))
        }
        _ => Err(CliError::usage(format!("unknown payoff {s:?}"))),
    }
}

/// A game from either a JSON file or inline asset-game flags; the
/// closed-form route is kept when the game came from --crr.
fn resolve_game(args: &GameArgs, ctx: &str) -> Result<(GameSpec, Option<CrrSpec>), CliError> {
    match (&args.spec, args.crr) {
        (Some(_), true) | (None, false) => Err(CliError::usage(format!(
            "{ctx} needs exactly one spec source: --spec FILE or --crr with --s0 --u --d --r --n"
        ))),
        (Some(path), false) => Ok((load_spec(path)?, None)),
        (None, true) => {
            let s0 = parse_rat_arg("s0", &require(args.s0.clone(), "s0", ctx)?)?;
            let u = parse_rat_arg("u", &require(args.u.clone(), "u", ctx)?)?;
            let d = parse_rat_arg("d", &require(args.d.clone(), "d", ctx)?)?;
            let r = parse_rat_arg("r", &require(args.r.clone(), "r", ctx)?)?;
            let n = require(args.n, "n", ctx)?;
            let crr = CrrSpec::new(s0, u, d, r, n).map_err(CliError::from)?;
            Ok((crr.game(), Some(crr)))
        }
    }
}

fn arbitrage_json(cert: &ArbitrageCertificate) -> serde_json::Value {
    let stake = match &cert.stake {
        Quantity::Scalar(m) => render_rat(m),
        Quantity::Vector(v) => v.iter().map(render_rat).collect::<Vec<_>>().join(" "),
    };
    serde_json::json!({
        "arbitrage": {
            "round": cert.round,
            "state": cert.state,
            "stake": stake,
            "guaranteed_gain": render_rat(&cert.guaranteed_gain),
        }
    })
}

/// Prints the certificate and converts the error when a quoted price
/// admits arbitrage; passes everything else through.
fn surface_arbitrage<T>(result: Result<T, Error>, output: &OutputOpts) -> Result<T, CliError> {
    result.map_err(|e| match e {
        Error::Arbitrage(cert) => {
            let text = serde_json::to_string_pretty(&arbitrage_json(&cert)).expect("json");
            let _ = emit(output, &text);
            CliError {
                code: 2,
                message: format!("arbitrage detected at round {}", cert.round),
            }
        }
        other => CliError::from(other),
    })
}

fn pretty(value: &serde_json::Value) -> String {
    serde_json::to_string_pretty(value).expect("json")
}

fn cmd_pmf(args: PmfArgs) -> Result<(), CliError> {
    let (pmf, check_game): (Pmf, Option<GameSpec>) = match (&args.family, &args.spec) {
        (Some(family), None) => match family.as_str() {
            "binomial" => {
                let n = require(args.n, "n", "binomial")?;
                let p = parse_rat_arg("p", &require(args.p.clone(), "p", "binomial")?)?;
                let pmf = binomial_pmf(n, &p).map_err(CliError::from)?;
                let game = GameSpec::rescaled(p, n).map_err(CliError::from)?;
                (pmf, Some(game))
            }
            "hypergeometric" => {
                let n = require(args.n, "n", "hypergeometric")?;
                let nu1 = require(args.nu1, "nu1", "hypergeometric")?;
                let nu2 = require(args.nu2, "nu2", "hypergeometric")?;
                let pmf = hypergeometric_pmf(nu1, nu2, n).map_err(CliError::from)?;
                let game = GameSpec::urn(nu1, nu2, n).map_err(CliError::from)?;
                (pmf, Some(game))
            }
            "polya" => {
                let n = require(args.n, "n", "polya")?;
                let nu1 = require(args.nu1, "nu1", "polya")?;
                let nu2 = require(args.nu2, "nu2", "polya")?;
                let c = args.c.unwrap_or(1);
                let pmf = polya_pmf(nu1, nu2, c, n).map_err(CliError::from)?;
                let game = if c >= 0 {
                    GameSpec::polya_urn(nu1, nu2, c, n).map_err(CliError::from)?
                } else {
                    GameSpec::urn(nu1, nu2, n).map_err(CliError::from)?
                };
                (pmf, Some(game))
            }
            "staircase" => {
                let q = parse_rat_list("q", &require(args.q.clone(), "q", "staircase")?)?;
                let points = q
                    .iter()
                    .enumerate()
                    .map(|(m, w)| (PmfPoint::Int(m as i64), w.clone()))
                    .collect();
                let pmf = Pmf::new(points).map_err(CliError::from)?;
                let (game, _) = GameSpec::staircase(&q).map_err(CliError::from)?;
                (pmf, Some(game))
            }
            "multinomial" => {
                let n = require(args.n, "n", "multinomial")?;
                let p = parse_rat_list("p", &require(args.p.clone(), "p", "multinomial")?)?;
                let pmf = multinomial_pmf(n, &p).map_err(CliError::from)?;
                let game = GameSpec::multilabel_constant(p, n).map_err(CliError::from)?;
                (pmf, Some(game))
            }
            other => return Err(CliError::usage(format!("unknown family {other:?}"))),
        },
        (None, Some(path)) => {
            let spec = load_spec(path)?;
            let stat = default_statistic(&spec);
            let pmf = surface_arbitrage(pmf_by_enumeration(&spec, &stat, args.cap), &args.output)?;
            (pmf, None)
        }
        _ => {
            return Err(CliError::usage(
                "pmf needs exactly one spec source: --family ... or --spec FILE",
            ))
        }
    };

    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&pmf.to_json(args.output.precision)),
        Format::Csv => pmf.to_csv(args.output.precision),
    };
    emit(&args.output, &text)?;

    if args.check {
        match check_game {
            Some(game) => {
                let stat = default_statistic(&game);
                let derived =
                    surface_arbitrage(pmf_by_enumeration(&game, &stat, args.cap), &args.output)?;
                if derived == pmf {
                    eprintln!("check: game enumeration matches the closed form exactly");
                } else {
                    return Err(CliError::verification(
                        "game enumeration disagrees with the closed form",
                    ));
                }
            }
            None => {
                return Err(CliError::usage(
                    "--check applies to families; a --spec pmf already comes from enumeration",
                ))
            }
        }
    }
    Ok(())
}

fn cmd_price(args: GameArgs) -> Result<(), CliError> {
    let (game, crr) = resolve_game(&args, "price")?;
    let payoff = parse_payoff(&args.payoff, game.horizon())?;
    let price = match &crr {
        Some(crr_spec) => crr_price(crr_spec, &payoff).map_err(CliError::from)?,
        None => surface_arbitrage(backward_induct(&game, &payoff), &args.output)?
            .initial_price()
            .clone(),
    };
    let mut body = serde_json::Map::new();
    body.insert(
        "price".into(),
        serde_json::Value::String(render_rat(&price)),
    );
    if let Some(digits) = args.output.precision {
        body.insert(
            "price_decimal".into(),
            serde_json::Value::String(decimal_string(&price, digits)),
        );
    }
    emit(&args.output, &pretty(&serde_json::Value::Object(body)))?;

    if args.check {
        // independent route: lattice for the closed form, enumeration for
        // the lattice
        let lattice = surface_arbitrage(backward_induct(&game, &payoff), &args.output)?;
        if lattice.initial_price() != &price {
            return Err(CliError::verification(
                "backward induction disagrees with the price",
            ));
        }
        let paths = surface_arbitrage(enumerate_paths(&game, args.cap), &args.output)?;
        let discount = num_pow(game.update().growth(), game.horizon());
        let mut acc = Rat::from_integer(0.into());
        for (path, w) in &paths {
            let terminal = path.terminal_key(&game);
            let v = payoff
                .eval(&game.state_value(&terminal))
                .map_err(CliError::from)?;
            acc += w * v;
        }
        if acc / discount != price {
            return Err(CliError::verification(
                "path enumeration disagrees with the price",
            ));
        }
        eprintln!(
            "check: backward induction and {}-path enumeration agree exactly",
            paths.len()
        );
    }
    Ok(())
}

fn num_pow(base: Rat, exp: usize) -> Rat {
    let mut acc = Rat::from_integer(1.into());
    for _ in 0..exp {
        acc *= &base;
    }
    acc
}

fn cmd_hedge(args: GameArgs) -> Result<(), CliError> {
    let (game, _) = resolve_game(&args, "hedge")?;
    let payoff = parse_payoff(&args.payoff, game.horizon())?;
    let lattice = surface_arbitrage(backward_induct(&game, &payoff), &args.output)?;
    let plan = delta_hedge(&lattice, &game).map_err(CliError::from)?;
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => pretty(&plan.to_json(&game)),
        Format::Csv => plan.hedge_csv(&game),
    };
    emit(&args.output, &text)
}

fn cmd_verify(args: GameArgs) -> Result<(), CliError> {
    let (game, _) = resolve_game(&args, "verify")?;
    let payoff = parse_payoff(&args.payoff, game.horizon())?;
    let lattice = surface_arbitrage(backward_induct(&game, &payoff), &args.output)?;
    let plan = delta_hedge(&lattice, &game).map_err(CliError::from)?;
    let report = surface_arbitrage(
        verify_replication_capped(&plan, &game, &payoff, args.cap),
        &args.output,
    )?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Json => {
            let body = serde_json::json!({
                "paths": report.paths_checked,
                "max_residual": render_rat(&report.max_abs_residual),
                "verified": report.ok(),
            });
            emit(&args.output, &pretty(&body))?;
        }
        Format::Csv => {
            emit(
                &args.output,
                &format!(
                    "{} paths, max residual {}",
                    report.paths_checked,
                    render_rat(&report.max_abs_residual)
                ),
            )?;
        }
    }
    if report.ok() {
        Ok(())
    } else {
        Err(CliError::verification(format!(
            "{} of {} paths fail to replicate",
            report.violations.len(),
            report.paths_checked
        )))
    }
}

fn cmd_bounds(args: GameArgs) -> Result<(), CliError> {
    let (game, _) = resolve_game(&args, "bounds")?;
    let payoff = parse_payoff(&args.payoff, game.horizon())?;
    let report = surface_arbitrage(upper_lower(&game, &payoff), &args.output)?;
    emit(&args.output, &pretty(&report.to_json()))
}

fn cmd_reduce_crr(args: CrrArgs) -> Result<(), CliError> {
    let crr = CrrSpec::new(
        parse_rat_arg("s0", &args.s0)?,
        parse_rat_arg("u", &args.u)?,
        parse_rat_arg("d", &args.d)?,
        parse_rat_arg("r", &args.r)?,
        args.n,
    )
    .map_err(CliError::from)?;
    let reduction = crr_to_multilabel(&crr);
    let layers = reduction.game.reachable_layers().map_err(CliError::from)?;
    let mut rows = Vec::new();
    for round in 1..=args.n {
        for key in &layers[round - 1] {
            let (x1, x2) = reduction.ticket_values(round, key);
            let p = reduction.price_star(round, key);
            rows.push(serde_json::json!({
                "round": round,
                "up_moves": key.count(0),
                "down_moves": key.count(1),
                "x1": render_rat(&x1),
                "x2": render_rat(&x2),
                "price": [render_rat(&p[0]), render_rat(&p[1])],
            }));
        }
    }
    let game_json: serde_json::Value =
        serde_json::from_str(&reduction.game.to_json_string().map_err(CliError::from)?)
            .expect("valid json");
    let body = serde_json::json!({ "game": game_json, "rounds": rows });
    emit(&args.output, &pretty(&body))
}
