use std::fmt::Display;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cryptocomb::braid::BraidWord;
use cryptocomb::compose::{compose, obfuscate, ComposeVariant};
use cryptocomb::entropy::{entropy_report, info_flow, psi_values, EntropyError, SimpleGraph};
use cryptocomb::jones::{derive_key, jones_with, JonesOptions, DEFAULT_STRAND_CAP};
use cryptocomb::laurent::LaurentPoly;
use cryptocomb::protocol::{eve_attack, random_braids, run_multi_party, run_two_party, ProtocolConfig};
use cryptocomb::pushgame::{
    class_count, count_solutions, decide_colorable_mod, enumerate_solutions, proper_coloring, solve, Colorability,
    SimplexBoard,
};
use cryptocomb::succession::{joint_norep, simulate_urn, to_f64, Prior, Replacement, UrnModel};
use serde_json::{json, Value};

use crate::server;

#[derive(Debug, Parser)]
#[command(name = "cryptocomb", version, about = "Braid key agreement, succession rules, push games and graph entropy")]
pub struct Cli {
    /// Output format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,
    /// Seed for every random choice.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Jones polynomial of a braid closure and the key derived from it.
    Jones(JonesArgs),
    /// Connected sum of two knot braids.
    Compose(ComposeArgs),
    /// Simulated key agreement over random braids.
    Keyagree(KeyagreeArgs),
    /// Exact succession probability for an urn model.
    Succession(SuccessionArgs),
    /// Push game analysis.
    Pushgame {
        #[command(subcommand)]
        action: PushAction,
    },
    /// Reachability entropy and information flow of a graph.
    Entropy(EntropyArgs),
    /// Serve push-game sessions over HTTP.
    Serve(ServeArgs),
}

/// Braids are written `B4: 1 -2 3` or as a bare list `1,-2,3`, in which case
/// the strand count is one more than the largest generator.
#[derive(Debug, Args)]
pub struct JonesArgs {
    #[arg(long, value_parser = parse_braid)]
    pub braid: BraidWord,
    #[arg(long, default_value_t = 3)]
    pub key_power: u32,
    /// Largest strand count computed directly.
    #[arg(long, default_value_t = DEFAULT_STRAND_CAP)]
    pub cap: usize,
    /// Reduce the braid before computing.
    #[arg(long)]
    pub simplify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum VariantArg {
    #[default]
    Conjugate,
    Shift,
    Split,
}

#[derive(Debug, Args)]
pub struct ComposeArgs {
    #[arg(long, value_parser = parse_braid)]
    pub b1: BraidWord,
    #[arg(long, value_parser = parse_braid)]
    pub b2: BraidWord,
    #[arg(long, value_enum, default_value_t)]
    pub variant: VariantArg,
    /// Split point in `b1` for the split variant. Defaults to the middle.
    #[arg(long)]
    pub split_at: Option<usize>,
    /// Random knot-preserving moves applied to the result.
    #[arg(long, default_value_t = 0)]
    pub obfuscate: usize,
    /// Also check that the Jones polynomial is multiplicative.
    #[arg(long)]
    pub jones: bool,
}

#[derive(Debug, Args)]
pub struct KeyagreeArgs {
    /// Participants. Two runs the offer/response exchange; more runs the
    /// broadcast version, where one initiator opens and the rest derive keys.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..=6))]
    pub parties: u64,
    #[arg(long, default_value_t = 3, value_parser = clap::value_parser!(u64).range(2..=5))]
    pub max_strands: u64,
    #[arg(long, default_value_t = 6)]
    pub max_len: usize,
    /// Obfuscating moves per transmitted braid.
    #[arg(long, default_value_t = 8)]
    pub moves: usize,
    #[arg(long, default_value_t = 3)]
    pub key_power: u32,
    #[arg(long, value_enum, default_value_t)]
    pub variant: VariantArg,
    /// Print every message on the wire.
    #[arg(long)]
    pub transcript: bool,
    /// Recover the key from the transcript alone (two parties only).
    #[arg(long)]
    pub eve: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorArg {
    Uniform,
    Binomial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReplacementArg {
    With,
    Without,
}

#[derive(Debug, Args)]
pub struct SuccessionArgs {
    #[arg(long, value_enum)]
    pub prior: PriorArg,
    #[arg(long, value_enum)]
    pub replacement: ReplacementArg,
    /// Balls in the urn.
    #[arg(long = "G")]
    pub g: u64,
    /// White draws observed so far.
    #[arg(long)]
    pub k: u64,
    /// Also estimate by simulation with this many trials.
    #[arg(long)]
    pub simulate: Option<u64>,
}

/// Labelings are `all:L` or a list like `0,1,1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelsArg {
    All(u64),
    List(Vec<u64>),
}

impl LabelsArg {
    fn resolve(&self, v: usize) -> Vec<u64> {
        match self {
            LabelsArg::All(l) => vec![*l; v],
            LabelsArg::List(xs) => xs.clone(),
        }
    }
}

#[derive(Debug, Args)]
pub struct BoardArgs {
    /// `triangular:R`, `hexagonal:S`, a board JSON file, or inline JSON.
    #[arg(long)]
    pub board: String,
    /// Label modulus. Builders default to 2; JSON boards keep their own.
    #[arg(long)]
    pub m: Option<u64>,
    /// Starting labels. Defaults to the board's own.
    #[arg(long, value_parser = parse_labels)]
    pub from: Option<LabelsArg>,
    /// Target labels.
    #[arg(long, value_parser = parse_labels, default_value = "all:1")]
    pub target: LabelsArg,
}

#[derive(Debug, Subcommand)]
pub enum PushAction {
    /// One plan reaching the target.
    Solve(BoardArgs),
    /// Number of plans reaching the target.
    Count(BoardArgs),
    /// Number of labeling classes under pushes.
    Classes(BoardArgs),
    /// Whether the vertices admit a proper coloring with `n + 1` colors.
    Colorable(BoardArgs),
    /// Every plan reaching the target.
    Enumerate {
        #[command(flatten)]
        board: BoardArgs,
        #[arg(long, default_value_t = 1000)]
        cap: usize,
    },
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Graph JSON `{"n":N,"edges":[[u,v],...]}`; `-` reads standard input.
    #[arg(long)]
    pub graph: PathBuf,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, env = "CRYPTOCOMB_PORT", default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Directory for session snapshots.
    #[arg(long, env = "CRYPTOCOMB_DATA")]
    pub data: Option<PathBuf>,
}

fn parse_braid(s: &str) -> Result<BraidWord, String> {
    let s = s.trim();
    if s.starts_with('B') {
        return s.parse().map_err(|e| format!("{e}"));
    }
    let word = s
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<i64>().map_err(|_| format!("bad letter {t:?}")))
        .collect::<Result<Vec<_>, _>>()?;
    let strands = word.iter().map(|g| g.unsigned_abs() as usize + 1).max().unwrap_or(1);
    BraidWord::from_signed(strands, &word).map_err(|e| e.to_string())
}

fn parse_labels(s: &str) -> Result<LabelsArg, String> {
    if let Some(l) = s.strip_prefix("all:") {
        return l.trim().parse().map(LabelsArg::All).map_err(|_| format!("bad label {l:?}"));
    }
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<u64>().map_err(|_| format!("bad label {t:?}")))
        .collect::<Result<Vec<_>, _>>()
        .map(LabelsArg::List)
}

struct Report {
    text: String,
    json: Value,
}

fn err(e: impl Display) -> String {
    e.to_string()
}

pub fn run(cli: Cli) -> ExitCode {
    match execute(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(r)) => {
            let body = match cli.format {
                Format::Text => r.text.trim_end().to_string(),
                Format::Json => serde_json::to_string_pretty(&r.json).expect("values serialize"),
            };
            // a closed pipe downstream is not our failure
            let _ = writeln!(std::io::stdout().lock(), "{body}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn execute(cli: &Cli) -> Result<Option<Report>, String> {
    let report = match &cli.command {
        Command::Jones(a) => jones(a)?,
        Command::Compose(a) => compose_cmd(a, cli.seed)?,
        Command::Keyagree(a) => keyagree(a, cli.seed)?,
        Command::Succession(a) => succession(a, cli.seed)?,
        Command::Pushgame { action } => pushgame(action)?,
        Command::Entropy(a) => entropy(a)?,
        Command::Serve(a) => {
            serve(a)?;
            return Ok(None);
        }
    };
    Ok(Some(report))
}

fn poly_json(p: &LaurentPoly) -> Value {
    match p.t_terms() {
        Some(terms) => json!(terms.into_iter().map(|(e, c)| (e, c.to_string())).collect::<Vec<_>>()),
        None => Value::Null,
    }
}

fn jones(a: &JonesArgs) -> Result<Report, String> {
    let opts = JonesOptions { strand_cap: a.cap, simplify: a.simplify, cancel: None };
    let r = jones_with(&a.braid, &opts).map_err(err)?;
    let key = derive_key(&r.polynomial, a.key_power).map_err(err)?;
    Ok(Report {
        text: format!("V = {}\nkey = {key}\n", r.polynomial),
        json: json!({
            "braid": a.braid,
            "polynomial": r.polynomial.to_string(),
            "terms": poly_json(&r.polynomial),
            "trace_part": r.trace_part.to_string(),
            "exponent_sum": r.exponent_sum,
            "strands_used": r.strands_used,
            "key": key.to_string(),
        }),
    })
}

fn variant(v: VariantArg, split_at: Option<usize>) -> ComposeVariant {
    match v {
        VariantArg::Conjugate => ComposeVariant::Conjugate,
        VariantArg::Shift => ComposeVariant::Shift,
        VariantArg::Split => ComposeVariant::Split(split_at),
    }
}

fn compose_cmd(a: &ComposeArgs, seed: u64) -> Result<Report, String> {
    let mut c = compose(&a.b1, &a.b2, variant(a.variant, a.split_at)).map_err(err)?;
    if a.obfuscate > 0 {
        c = obfuscate(&c, a.obfuscate, seed);
    }
    let mut text = format!("{c}\n");
    let mut out = json!({ "braid": c });
    if a.jones {
        let opts = JonesOptions { strand_cap: 14, ..JonesOptions::simplifying() };
        let j = |b: &BraidWord| jones_with(b, &opts).map(|r| r.polynomial).map_err(err);
        let (v, v1, v2) = (j(&c)?, j(&a.b1)?, j(&a.b2)?);
        let product = &v1 * &v2;
        let ok = v == product;
        text += &format!("V = {v}\nV(b1) V(b2) = {product}\nmultiplicative: {}\n", if ok { "yes" } else { "no" });
        out["polynomial"] = json!(v.to_string());
        out["product"] = json!(product.to_string());
        out["multiplicative"] = json!(ok);
    }
    Ok(Report { text, json: out })
}

fn keyagree(a: &KeyagreeArgs, seed: u64) -> Result<Report, String> {
    let cfg = ProtocolConfig {
        seed,
        obfuscation_moves: a.moves,
        key_power: a.key_power,
        variant: variant(a.variant, None),
        ..ProtocolConfig::default()
    };
    let parties = a.parties as usize;
    let braids = random_braids(seed, parties.max(2) + 1, a.max_strands as usize, a.max_len);
    let outcome = if parties == 2 {
        run_two_party(&braids[0], &braids[1], &braids[2], &cfg)
    } else {
        run_multi_party(&braids[0], &braids[1..parties], &cfg)
    }
    .map_err(err)?;
    let key = outcome.shared_key();
    let mut text = format!("session {}\nkey = {key}\nV = {}\n", outcome.session, outcome.shared_polynomial());
    for p in &outcome.parties {
        text += &format!("{}: {}\n", p.name, p.key);
    }
    let mut out = json!({
        "session": outcome.session,
        "key": key.to_string(),
        "polynomial": outcome.shared_polynomial().to_string(),
        "parties": outcome.parties.iter().map(|p| json!({"name": p.name, "key": p.key.to_string()})).collect::<Vec<_>>(),
    });
    if a.eve {
        if parties != 2 {
            return Err("--eve needs exactly two parties".into());
        }
        let stolen = eve_attack(&outcome.transcript, a.key_power).map_err(err)?;
        text += &format!("eve = {stolen} ({})\n", if &stolen == key { "recovered" } else { "missed" });
        out["eve"] = json!(stolen.to_string());
    }
    if a.transcript {
        for m in &outcome.transcript {
            text += &format!("{}\n", serde_json::to_string(m).map_err(err)?);
        }
        out["transcript"] = json!(outcome.transcript);
    }
    Ok(Report { text, json: out })
}

fn succession(a: &SuccessionArgs, seed: u64) -> Result<Report, String> {
    let prior = match a.prior {
        PriorArg::Uniform => Prior::Uniform,
        PriorArg::Binomial => Prior::Binomial,
    };
    let replacement = match a.replacement {
        ReplacementArg::With => Replacement::With,
        ReplacementArg::Without => Replacement::Without,
    };
    let model = UrnModel::new(a.g, prior, replacement).map_err(err)?;
    let p = model.succession(a.k).map_err(err)?;
    let mut text = format!("{p}\n~ {:.12}\n", to_f64(&p));
    let mut out = json!({ "probability": p.to_string(), "decimal": to_f64(&p) });
    if replacement == Replacement::Without {
        let joint = joint_norep(a.g, a.k, prior).map_err(err)?;
        text += &format!("joint = {joint}\n");
        out["joint"] = json!(joint.to_string());
    }
    if let Some(trials) = a.simulate {
        let e = simulate_urn(&model, a.k, trials, seed).map_err(err)?;
        text += &format!("simulated = {:.6} +/- {:.6} ({} conditioned trials)\n", e.estimate, e.stderr, e.conditioned);
        out["simulation"] = json!(e);
    }
    Ok(Report { text, json: out })
}

fn load_board(a: &BoardArgs) -> Result<SimplexBoard, String> {
    let spec = a.board.trim();
    let mut board = if spec.starts_with('{') {
        spec.parse().map_err(err)?
    } else if Path::new(spec).is_file() {
        std::fs::read_to_string(spec).map_err(|e| format!("{spec}: {e}"))?.parse().map_err(err)?
    } else {
        SimplexBoard::build(spec, a.m.unwrap_or(2)).map_err(err)?
    };
    if let Some(m) = a.m {
        if m != board.m() {
            board = board.with_modulus(m).map_err(err)?;
        }
    }
    if let Some(from) = &a.from {
        board = board.with_labels(from.resolve(board.vertex_count())).map_err(err)?;
    }
    Ok(board)
}

fn plan_text(plan: &[u64]) -> String {
    plan.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")
}

fn pushgame(action: &PushAction) -> Result<Report, String> {
    match action {
        PushAction::Solve(a) => {
            let b = load_board(a)?;
            let target = a.target.resolve(b.vertex_count());
            Ok(match solve(&b, &target).map_err(err)? {
                Some(plan) => Report {
                    text: format!("{}\n", plan_text(&plan.0)),
                    json: json!({ "solvable": true, "plan": plan, "pushes": plan.total_pushes() }),
                },
                None => Report { text: "no solution\n".into(), json: json!({ "solvable": false, "plan": null }) },
            })
        }
        PushAction::Count(a) => {
            let b = load_board(a)?;
            let n = count_solutions(&b, &a.target.resolve(b.vertex_count())).map_err(err)?;
            Ok(Report { text: format!("{n}\n"), json: json!({ "count": n.to_string() }) })
        }
        PushAction::Classes(a) => {
            let n = class_count(&load_board(a)?);
            Ok(Report { text: format!("{n}\n"), json: json!({ "classes": n.to_string() }) })
        }
        PushAction::Colorable(a) => {
            let b = load_board(a)?;
            let verdict = decide_colorable_mod(&b, b.m());
            let word = match verdict {
                Colorability::Yes => "yes",
                Colorability::No => "no",
                Colorability::Inconclusive => "inconclusive",
            };
            let coloring = (verdict == Colorability::Yes).then(|| proper_coloring(&b)).flatten();
            Ok(Report { text: format!("{word}\n"), json: json!({ "colorable": verdict, "coloring": coloring }) })
        }
        PushAction::Enumerate { board, cap } => {
            let b = load_board(board)?;
            let plans = enumerate_solutions(&b, &board.target.resolve(b.vertex_count()), *cap).map_err(err)?;
            let text = plans.iter().map(|p| plan_text(&p.0) + "\n").collect();
            Ok(Report { text, json: json!({ "count": plans.len(), "plans": plans }) })
        }
    }
}

fn entropy(a: &EntropyArgs) -> Result<Report, String> {
    let text = if a.graph.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(err)?;
        s
    } else {
        std::fs::read_to_string(&a.graph).map_err(|e| format!("{}: {e}", a.graph.display()))?
    };
    let g: SimpleGraph = text.parse().map_err(err)?;
    let join = |v: &[_]| v.iter().map(ToString::to_string).collect::<Vec<String>>().join(" ");
    match entropy_report(&g) {
        Ok(r) => Ok(Report {
            text: format!(
                "psi = {}\nG_psi = {}\np = {}\nH = {} bits\nIF = {}\n",
                join(&r.psi),
                r.g_psi,
                join(&r.probabilities),
                r.entropy_bits,
                r.info_flow
            ),
            json: serde_json::to_value(&r).map_err(err)?,
        }),
        Err(EntropyError::ZeroPsi) => {
            let psi = psi_values(&g);
            let flow = info_flow(&g);
            Ok(Report {
                text: format!("psi = {}\nG_psi = 0\nH undefined\nIF = {flow}\n", join(&psi)),
                json: json!({
                    "psi": psi.iter().map(ToString::to_string).collect::<Vec<_>>(),
                    "g_psi": "0",
                    "probabilities": null,
                    "entropy_bits": null,
                    "info_flow": flow.to_string(),
                }),
            })
        }
        Err(e) => Err(e.to_string()),
    }
}

fn serve(a: &ServeArgs) -> Result<(), String> {
    let state = match &a.data {
        Some(dir) => server::AppState::persistent(dir).map_err(err)?,
        None => server::AppState::new(),
    };
    let addr = format!("{}:{}", a.host, a.port);
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build().map_err(err)?;
    rt.block_on(async move {
        let listener = tokio::net::TcpListener::bind(&addr).await.map_err(|e| format!("{addr}: {e}"))?;
        eprintln!("listening on http://{addr}");
        axum::serve(listener, server::router(state)).await.map_err(err)
    })
}
