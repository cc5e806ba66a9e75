//! `teamsem`: team-semantics model checking for modal logic and its
//! extensions with inclusion atoms and the nonemptiness operator.
//!
//! Exit codes: 0 = the queried property holds / success; 1 = it fails
//! (unsatisfied, not bisimilar, closure counterexample found); 2 = usage or
//! input error; 3 = evaluation budget exceeded.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use teamsem_core::bisimulation::{k_bisimilar, team_k_bisimilar};
use teamsem_core::characteristic::{
    hintikka, synthesize, BotEncoding, CharDialect, CharError, CharOptions,
};
use teamsem_core::closure::{
    check_bisim_invariance, check_downward, check_empty_team, check_union, run_property_suite,
    ClosureOptions, ClosureProperty, ClosureReport, Counterexample, Domain, SuiteConfig,
};
use teamsem_core::formulas::{parse, Formula, ParseError, PropSymbol};
use teamsem_core::game::{
    audit_lower_bound, essential_elements, find_strategy, lower_bound_witness, strategy_to_json,
    witness_atom, AuditOutcome, GameError,
};
use teamsem_core::kripke::{load_model, save_model, KripkeModel, ModelError, Team};
use teamsem_core::semantics::{eval, EvalConfig, EvalError, EvalMode, Semantics};
use teamsem_core::Dialect;

#[derive(Parser)]
#[command(
    name = "teamsem",
    version,
    about = "Team-semantics model checking for modal logic, inclusion atoms, and the nonemptiness operator"
)]
struct Cli {
    /// Emit machine-readable JSON instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a formula on a team (exit 0 = satisfied, 1 = not).
    Check(CheckArgs),
    /// Bounded bisimilarity of two pointed models.
    Bisim(BisimArgs),
    /// Bounded team bisimilarity.
    Teambisim(TeamBisimArgs),
    /// Print the depth-k characteristic formula of a pointed model.
    Hintikka(HintikkaArgs),
    /// Synthesize a class description from a manifest of (model, team) pairs.
    Synthesize(SynthesizeArgs),
    /// Check a closure property of a formula over a bounded model domain.
    Closure(ClosureArgs),
    /// Search a winning semantic-game strategy, or audit the nab lower bound.
    Game(GameArgs),
    /// Build the arity-n inclusion-atom witness model and team.
    Witness(WitnessArgs),
    /// Run the generated-formula closure-law suites.
    Props(PropsArgs),
    /// Rewrite between the nonemptiness operator and nonempty disjunction.
    Rewrite(RewriteArgs),
}

#[derive(Args)]
struct ModelTeamArgs {
    /// Model document (JSON).
    #[arg(long)]
    model: PathBuf,
    /// Named team from the model document.
    #[arg(long, conflicts_with = "team_inline")]
    team: Option<String>,
    /// Comma-separated world names forming the team.
    #[arg(long)]
    team_inline: Option<String>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    target: ModelTeamArgs,
    /// Formula in the concrete syntax.
    #[arg(long)]
    formula: String,
    #[arg(long, value_enum, default_value_t = ModeArg::Optimized)]
    mode: ModeArg,
    /// Team-semantics flavour; only lax is supported.
    #[arg(long, value_enum, default_value_t = SemanticsArg::Lax)]
    semantics: SemanticsArg,
    /// Evaluation budget in visited (position, team) pairs.
    #[arg(long, default_value_t = 10_000_000)]
    max_steps: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Reference,
    Optimized,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsArg {
    Lax,
    Strict,
}

#[derive(Args)]
struct BisimArgs {
    /// Left model document.
    #[arg(long)]
    left: PathBuf,
    #[arg(long)]
    left_world: String,
    /// Right model document (defaults to the left one).
    #[arg(long)]
    right: Option<PathBuf>,
    #[arg(long)]
    right_world: String,
    #[arg(short, long)]
    k: u32,
}

#[derive(Args)]
struct TeamBisimArgs {
    #[arg(long)]
    left: PathBuf,
    #[arg(long, conflicts_with = "left_team_inline")]
    left_team: Option<String>,
    #[arg(long)]
    left_team_inline: Option<String>,
    #[arg(long)]
    right: Option<PathBuf>,
    #[arg(long, conflicts_with = "right_team_inline")]
    right_team: Option<String>,
    #[arg(long)]
    right_team_inline: Option<String>,
    #[arg(short, long)]
    k: u32,
}

#[derive(Args)]
struct HintikkaArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    world: String,
    #[arg(short, long)]
    k: u32,
}

#[derive(Args)]
struct SynthesizeArgs {
    /// Manifest: {"k": N, "dialect": "minc"|"mlnab",
    ///            "pairs": [{"model": PATH, "team": NAME}, ..]};
    /// model paths are relative to the manifest.
    #[arg(long)]
    manifest: PathBuf,
    /// Drop the valid diagonal inclusion atoms.
    #[arg(long)]
    minimize: bool,
    /// Spell top/bot as literal pairs over the first proposition.
    #[arg(long, value_enum, default_value_t = BotArg::Constant)]
    bot_encoding: BotArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum BotArg {
    Constant,
    LiteralPair,
}

#[derive(Args)]
struct ClosureArgs {
    #[arg(long, value_enum)]
    property: PropertyArg,
    #[arg(long)]
    formula: String,
    /// Domain bound: every model with at most this many worlds is checked.
    #[arg(long, default_value_t = 2)]
    max_worlds: usize,
    /// Comma-separated proposition names of the domain (default: the
    /// formula's propositions).
    #[arg(long)]
    props: Option<String>,
    /// Bisimulation depth (bisim property only; defaults to the formula's
    /// modal depth).
    #[arg(short, long)]
    k: Option<u32>,
    #[arg(long, default_value_t = 10_000_000)]
    max_steps: u64,
    /// Parallelize per-model work (reporting order is unaffected).
    #[arg(long)]
    parallel: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum PropertyArg {
    Downward,
    Union,
    EmptyTeam,
    Bisim,
}

#[derive(Args)]
struct GameArgs {
    /// Model document (JSON); required unless --audit is used.
    #[arg(long, required_unless_present = "audit")]
    model: Option<PathBuf>,
    /// Named team from the model document.
    #[arg(long, conflicts_with = "team_inline")]
    team: Option<String>,
    /// Comma-separated world names forming the team.
    #[arg(long)]
    team_inline: Option<String>,
    #[arg(long)]
    formula: String,
    #[arg(long, default_value_t = 10_000_000)]
    max_steps: u64,
    /// Audit the 2^n lower bound instead: build the arity-n witness and run
    /// the element-removal argument against the formula.
    #[arg(long, conflicts_with_all = ["model", "team", "team_inline"])]
    audit: Option<u32>,
}

#[derive(Args)]
struct WitnessArgs {
    /// Inclusion-atom arity.
    #[arg(short)]
    n: u32,
    /// Output model document; the witness team is named "T".
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PropsArgs {
    #[arg(long, value_enum, default_value_t = DialectArg::All)]
    dialect: DialectArg,
    /// Generated formulas per dialect.
    #[arg(long, default_value_t = 200)]
    count: usize,
    #[arg(long, default_value_t = 2)]
    max_worlds: usize,
    /// Comma-separated proposition names.
    #[arg(long, default_value = "p")]
    props: String,
    /// Modal-depth cap for generated formulas.
    #[arg(long, default_value_t = 2)]
    max_k: u32,
    #[arg(long, default_value_t = 12)]
    max_nodes: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 10_000_000)]
    max_steps: u64,
    #[arg(long)]
    parallel: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum DialectArg {
    Ml,
    Minc,
    Mlnab,
    Mlnedisj,
    All,
}

#[derive(Args)]
struct RewriteArgs {
    #[arg(long)]
    formula: String,
    #[arg(long, value_enum)]
    direction: DirectionArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    NablaToNedis,
    NedisToNabla,
}

// --- error plumbing ---

#[derive(Debug)]
enum CliError {
    Io(String),
    Parse(ParseError),
    Model(ModelError),
    Eval(EvalError),
    Game(GameError),
    Char(CharError),
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Io(m) | CliError::Usage(m) => write!(f, "{m}"),
            CliError::Parse(e) => write!(f, "formula: {e}"),
            CliError::Model(e) => write!(f, "model: {e}"),
            CliError::Eval(e) => write!(f, "{e}"),
            CliError::Game(e) => write!(f, "{e}"),
            CliError::Char(e) => write!(f, "{e}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Eval(EvalError::BudgetExceeded { .. }) => 3,
            CliError::Game(GameError::Eval(EvalError::BudgetExceeded { .. })) => 3,
            CliError::Game(GameError::WitnessTooLarge { .. }) => 3,
            _ => 2,
        }
    }
}

impl From<ParseError> for CliError {
    fn from(e: ParseError) -> Self {
        CliError::Parse(e)
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        CliError::Model(e)
    }
}

impl From<EvalError> for CliError {
    fn from(e: EvalError) -> Self {
        CliError::Eval(e)
    }
}

impl From<GameError> for CliError {
    fn from(e: GameError) -> Self {
        CliError::Game(e)
    }
}

impl From<CharError> for CliError {
    fn from(e: CharError) -> Self {
        CliError::Char(e)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(cli: Cli) -> Result<u8, CliError> {
    let json = cli.json;
    match cli.command {
        Command::Check(args) => cmd_check(args, json),
        Command::Bisim(args) => cmd_bisim(args, json),
        Command::Teambisim(args) => cmd_teambisim(args, json),
        Command::Hintikka(args) => cmd_hintikka(args, json),
        Command::Synthesize(args) => cmd_synthesize(args, json),
        Command::Closure(args) => cmd_closure(args, json),
        Command::Game(args) => cmd_game(args, json),
        Command::Witness(args) => cmd_witness(args, json),
        Command::Props(args) => cmd_props(args, json),
        Command::Rewrite(args) => cmd_rewrite(args, json),
    }
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn load_model_file(path: &Path) -> Result<(KripkeModel, Vec<(String, Team)>), CliError> {
    Ok(load_model(&read_file(path)?)?)
}

fn resolve_team(
    model: &KripkeModel,
    teams: &[(String, Team)],
    name: Option<&str>,
    inline: Option<&str>,
) -> Result<Team, CliError> {
    match (name, inline) {
        (Some(name), None) => teams
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t.clone())
            .ok_or_else(|| CliError::Usage(format!("model document has no team `{name}`"))),
        (None, Some(inline)) => {
            let names: Vec<&str> = inline
                .split(',')
                .map(str::trim)
                .filter(|s| !s.is_empty())
                .collect();
            Ok(model.team_from_names(&names)?)
        }
        (None, None) => Err(CliError::Usage(
            "provide --team NAME or --team-inline w1,w2,..".into(),
        )),
        (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
    }
}

fn parse_formula(text: &str) -> Result<Formula, CliError> {
    let formula = parse(text)?;
    warn_large_inclusion_arity(&formula);
    Ok(formula)
}

/// Inclusion atoms above arity 8 make witness teams grow as 2^n; warn but
/// proceed.
fn warn_large_inclusion_arity(f: &Formula) {
    if let Formula::Incl(lhs, _) = f {
        if lhs.len() > 8 {
            eprintln!(
                "warning: inclusion atom of arity {} (witness teams grow as 2^n)",
                lhs.len()
            );
        }
    }
    for child in f.children() {
        warn_large_inclusion_arity(child);
    }
}

fn parse_props(spec: &str) -> Result<Vec<PropSymbol>, CliError> {
    spec.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| PropSymbol::new(s).map_err(|e| CliError::Usage(e.to_string())))
        .collect()
}

fn formula_props(f: &Formula, out: &mut Vec<PropSymbol>) {
    match f {
        Formula::Prop(p) | Formula::NegProp(p) if !out.contains(p) => {
            out.push(p.clone());
        }
        _ => {}
    }
    for child in f.children() {
        formula_props(child, out);
    }
}

fn emit(json_mode: bool, value: serde_json::Value, human: String) {
    if json_mode {
        println!("{value}");
    } else {
        println!("{human}");
    }
}

fn cmd_check(args: CheckArgs, json: bool) -> Result<u8, CliError> {
    let (model, teams) = load_model_file(&args.target.model)?;
    let team = resolve_team(
        &model,
        &teams,
        args.target.team.as_deref(),
        args.target.team_inline.as_deref(),
    )?;
    let formula = parse_formula(&args.formula)?;
    let config = EvalConfig {
        mode: match args.mode {
            ModeArg::Reference => EvalMode::Reference,
            ModeArg::Optimized => EvalMode::Optimized,
        },
        semantics: match args.semantics {
            SemanticsArg::Lax => Semantics::Lax,
            SemanticsArg::Strict => Semantics::Strict,
        },
        max_steps: args.max_steps,
        memo_enabled: true,
    };
    let verdict = eval(&model, &team, &formula, &config)?;
    emit(
        json,
        json!({
            "verdict": if verdict { "sat" } else { "unsat" },
            "team": team.names(&model),
            "formula": formula.to_string(),
        }),
        if verdict { "SAT".into() } else { "UNSAT".into() },
    );
    Ok(u8::from(!verdict))
}

fn cmd_bisim(args: BisimArgs, json: bool) -> Result<u8, CliError> {
    let (left, _) = load_model_file(&args.left)?;
    let (right, _) = match &args.right {
        Some(path) => load_model_file(path)?,
        None => (left.clone(), Vec::new()),
    };
    let lw = left
        .world_index(&args.left_world)
        .ok_or_else(|| CliError::Model(ModelError::UnknownWorld(args.left_world.clone())))?;
    let rw = right
        .world_index(&args.right_world)
        .ok_or_else(|| CliError::Model(ModelError::UnknownWorld(args.right_world.clone())))?;
    let verdict = k_bisimilar(&left, lw, &right, rw, args.k)?;
    emit(
        json,
        json!({ "bisimilar": verdict, "k": args.k }),
        format!(
            "{} at depth {}",
            if verdict { "bisimilar" } else { "not bisimilar" },
            args.k
        ),
    );
    Ok(u8::from(!verdict))
}

fn cmd_teambisim(args: TeamBisimArgs, json: bool) -> Result<u8, CliError> {
    let (left, left_teams) = load_model_file(&args.left)?;
    let (right, right_teams) = match &args.right {
        Some(path) => load_model_file(path)?,
        None => (left.clone(), left_teams.clone()),
    };
    let lt = resolve_team(
        &left,
        &left_teams,
        args.left_team.as_deref(),
        args.left_team_inline.as_deref(),
    )?;
    let rt = resolve_team(
        &right,
        &right_teams,
        args.right_team.as_deref(),
        args.right_team_inline.as_deref(),
    )?;
    let verdict = team_k_bisimilar(&left, &lt, &right, &rt, args.k)?;
    emit(
        json,
        json!({ "team_bisimilar": verdict, "k": args.k }),
        format!(
            "teams {} at depth {}",
            if verdict { "bisimilar" } else { "not bisimilar" },
            args.k
        ),
    );
    Ok(u8::from(!verdict))
}

fn cmd_hintikka(args: HintikkaArgs, json: bool) -> Result<u8, CliError> {
    let (model, _) = load_model_file(&args.model)?;
    let w = model
        .world_index(&args.world)
        .ok_or_else(|| CliError::Model(ModelError::UnknownWorld(args.world.clone())))?;
    let chi = hintikka(&model, w, args.k)?;
    emit(
        json,
        json!({ "formula": chi.to_string(), "world": args.world, "k": args.k }),
        chi.to_string(),
    );
    Ok(0)
}

fn cmd_synthesize(args: SynthesizeArgs, json: bool) -> Result<u8, CliError> {
    let text = read_file(&args.manifest)?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("malformed manifest: {e}")))?;
    let k = doc["k"]
        .as_u64()
        .ok_or_else(|| CliError::Usage("manifest needs an integer `k`".into()))? as u32;
    let dialect = match doc["dialect"].as_str() {
        Some("minc") => CharDialect::Minc,
        Some("mlnab") => CharDialect::MlNab,
        other => {
            return Err(CliError::Usage(format!(
                "manifest `dialect` must be \"minc\" or \"mlnab\", got {other:?}"
            )))
        }
    };
    let base = args.manifest.parent().unwrap_or(Path::new("."));
    let mut loaded: Vec<(KripkeModel, Team)> = Vec::new();
    let entries = doc["pairs"]
        .as_array()
        .ok_or_else(|| CliError::Usage("manifest needs a `pairs` array".into()))?;
    for entry in entries {
        let rel = entry["model"]
            .as_str()
            .ok_or_else(|| CliError::Usage("pair entries need a `model` path".into()))?;
        let team_name = entry["team"]
            .as_str()
            .ok_or_else(|| CliError::Usage("pair entries need a `team` name".into()))?;
        let (model, teams) = load_model_file(&base.join(rel))?;
        let team = resolve_team(&model, &teams, Some(team_name), None)?;
        loaded.push((model, team));
    }
    let pairs: Vec<(&KripkeModel, &Team)> = loaded.iter().map(|(m, t)| (m, t)).collect();
    let opts = CharOptions {
        minimize: args.minimize,
        bot_encoding: match args.bot_encoding {
            BotArg::Constant => BotEncoding::Constant,
            BotArg::LiteralPair => BotEncoding::LiteralPair,
        },
    };
    let formula = synthesize(&pairs, k, dialect, &opts)?;
    emit(
        json,
        json!({
            "formula": formula.to_string(),
            "k": k,
            "pairs": pairs.len(),
        }),
        formula.to_string(),
    );
    Ok(0)
}

fn model_json(model: &KripkeModel, teams: &[(String, Team)]) -> serde_json::Value {
    serde_json::from_str(&save_model(model, teams)).expect("canonical document")
}

fn counterexample_json(cex: &Counterexample) -> serde_json::Value {
    match cex {
        Counterexample::Downward {
            model,
            team,
            subteam,
        } => json!({
            "kind": "downward",
            "model": model_json(model, &[]),
            "team": team.names(model),
            "subteam": subteam.names(model),
        }),
        Counterexample::Union {
            model,
            team1,
            team2,
        } => json!({
            "kind": "union",
            "model": model_json(model, &[]),
            "team1": team1.names(model),
            "team2": team2.names(model),
        }),
        Counterexample::EmptyTeam { model } => json!({
            "kind": "empty-team",
            "model": model_json(model, &[]),
        }),
        Counterexample::BisimInvariance {
            left_model,
            left_team,
            right_model,
            right_team,
            k,
        } => json!({
            "kind": "bisim-invariance",
            "k": k,
            "left_model": model_json(left_model, &[]),
            "left_team": left_team.names(left_model),
            "right_model": model_json(right_model, &[]),
            "right_team": right_team.names(right_model),
        }),
    }
}

fn describe_counterexample(cex: &Counterexample) -> String {
    match cex {
        Counterexample::Downward {
            model,
            team,
            subteam,
        } => format!(
            "counterexample: team {{{}}} satisfies, subteam {{{}}} does not (model: {} worlds, {} edges)",
            team.names(model).join(","),
            subteam.names(model).join(","),
            model.world_count(),
            model.edges().count(),
        ),
        Counterexample::Union {
            model,
            team1,
            team2,
        } => format!(
            "counterexample: {{{}}} and {{{}}} satisfy, their union does not",
            team1.names(model).join(","),
            team2.names(model).join(","),
        ),
        Counterexample::EmptyTeam { model } => format!(
            "counterexample: the empty team fails (model: {} worlds)",
            model.world_count()
        ),
        Counterexample::BisimInvariance {
            left_model,
            left_team,
            right_team,
            k,
            ..
        } => format!(
            "counterexample: {{{}}} satisfies but {k}-bisimilar {{{}}} does not",
            left_team.names(left_model).join(","),
            right_team.names(left_model).join(","),
        ),
    }
}

fn report_closure(report: &ClosureReport, json: bool) -> u8 {
    let verdict = if report.passed { "pass" } else { "fail" };
    if json {
        let mut value = json!({
            "property": report.property.to_string(),
            "verdict": verdict,
            "instances": report.instances,
        });
        if let Some(cex) = &report.counterexample {
            value["counterexample"] = counterexample_json(cex);
        }
        println!("{value}");
    } else {
        println!("{}: {verdict} ({} instances)", report.property, report.instances);
        if let Some(cex) = &report.counterexample {
            println!("{}", describe_counterexample(cex));
        }
    }
    u8::from(!report.passed)
}

fn cmd_closure(args: ClosureArgs, json: bool) -> Result<u8, CliError> {
    let formula = parse_formula(&args.formula)?;
    let props = match &args.props {
        Some(spec) => parse_props(spec)?,
        None => {
            let mut out = Vec::new();
            formula_props(&formula, &mut out);
            out.sort();
            out
        }
    };
    let k = args.k.unwrap_or_else(|| formula.modal_depth());
    let domain = Domain::new(args.max_worlds, props, k);
    let opts = ClosureOptions {
        eval: EvalConfig::default().with_max_steps(args.max_steps),
        parallel: args.parallel,
    };
    let report = match args.property {
        PropertyArg::Downward => check_downward(&formula, &domain, &opts)?,
        PropertyArg::Union => check_union(&formula, &domain, &opts)?,
        PropertyArg::EmptyTeam => check_empty_team(&formula, &domain, &opts)?,
        PropertyArg::Bisim => check_bisim_invariance(&formula, k, &domain, &opts)?,
    };
    debug_assert_eq!(
        matches!(args.property, PropertyArg::Bisim),
        report.property == ClosureProperty::BisimInvariance
    );
    Ok(report_closure(&report, json))
}

fn cmd_game(args: GameArgs, json: bool) -> Result<u8, CliError> {
    let formula = parse_formula(&args.formula)?;
    let config = EvalConfig::default().with_max_steps(args.max_steps);
    if let Some(n) = args.audit {
        let report = audit_lower_bound(&formula, n, &config)?;
        let (verdict, human): (&str, String) = match &report.outcome {
            AuditOutcome::Certificate {
                element_name,
                strategy_verified,
                formula_holds_after_removal,
                atom_fails_after_removal,
                ..
            } => (
                "certificate",
                format!(
                    "certificate: removing {element_name} keeps the formula satisfied \
                     (strategy verified: {strategy_verified}, formula holds after removal: \
                     {formula_holds_after_removal}, atom fails after removal: \
                     {atom_fails_after_removal}); the formula does not define the arity-{n} \
                     inclusion atom"
                ),
            ),
            AuditOutcome::NoCertificate => (
                "no-certificate",
                format!(
                    "no certificate at n={n}: {} nab occurrences >= 2^{n}; \
                     absence of a certificate proves nothing",
                    report.occ_nabla
                ),
            ),
            AuditOutcome::FailsOnWitness => (
                "fails-on-witness",
                "the formula already fails on the witness team, so it does not define the atom"
                    .into(),
            ),
        };
        emit(
            json,
            json!({
                "audit": verdict,
                "n": n,
                "occ_nabla": report.occ_nabla,
                "team_size": report.team_size,
            }),
            human,
        );
        return Ok(0);
    }

    let model_path = args
        .model
        .as_ref()
        .ok_or_else(|| CliError::Usage("provide --model FILE (or --audit N)".into()))?;
    let (model, teams) = load_model_file(model_path)?;
    let team = resolve_team(
        &model,
        &teams,
        args.team.as_deref(),
        args.team_inline.as_deref(),
    )?;
    match find_strategy(&model, &team, &formula, &config)? {
        Some(strategy) => {
            let doc = strategy_to_json(&model, &formula, &strategy);
            emit(
                json,
                json!({ "verdict": "winning", "strategy": doc }),
                format!(
                    "winning strategy:\n{}",
                    serde_json::to_string_pretty(&doc).unwrap()
                ),
            );
            Ok(0)
        }
        None => {
            emit(
                json,
                json!({ "verdict": "none" }),
                "no winning strategy (the team does not satisfy the formula)".into(),
            );
            Ok(1)
        }
    }
}

fn cmd_witness(args: WitnessArgs, json: bool) -> Result<u8, CliError> {
    let (model, team) = lower_bound_witness(args.n)?;
    let atom = witness_atom(args.n);
    let essential = essential_elements(&model, &team, &atom, &EvalConfig::default())?;
    assert_eq!(essential, team);
    let doc = save_model(&model, &[("T".to_string(), team.clone())]);
    fs::write(&args.out, &doc)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", args.out.display())))?;
    emit(
        json,
        json!({
            "n": args.n,
            "worlds": model.world_count(),
            "team": team.names(&model),
            "atom": atom.to_string(),
            "out": args.out.display().to_string(),
        }),
        format!(
            "wrote {} ({} worlds; team T = {{{}}} of size {}; atom {})",
            args.out.display(),
            model.world_count(),
            team.names(&model).join(","),
            team.len(),
            atom,
        ),
    );
    Ok(0)
}

fn cmd_props(args: PropsArgs, json: bool) -> Result<u8, CliError> {
    let props = parse_props(&args.props)?;
    let domain = Domain::new(args.max_worlds, props, args.max_k);
    let opts = ClosureOptions {
        eval: EvalConfig::default().with_max_steps(args.max_steps),
        parallel: args.parallel,
    };
    let dialects: Vec<Dialect> = match args.dialect {
        DialectArg::Ml => vec![Dialect::Ml],
        DialectArg::Minc => vec![Dialect::Minc],
        DialectArg::Mlnab => vec![Dialect::MlNab],
        DialectArg::Mlnedisj => vec![Dialect::MlNeDisj],
        DialectArg::All => vec![
            Dialect::Ml,
            Dialect::Minc,
            Dialect::MlNab,
            Dialect::MlNeDisj,
        ],
    };
    let mut all_pass = true;
    let mut results = Vec::new();
    for dialect in dialects {
        let mut cfg = SuiteConfig::new(dialect, args.count, args.seed, domain.clone());
        cfg.max_nodes = args.max_nodes;
        let report = run_property_suite(&cfg, &opts)?;
        all_pass &= report.passed();
        if json {
            results.push(json!({
                "dialect": dialect.to_string(),
                "formulas": report.formula_count,
                "models": report.models_checked,
                "instances": report.instances,
                "failures": report
                    .failures
                    .iter()
                    .map(|f| json!({
                        "formula": f.formula.to_string(),
                        "property": f.property,
                        "detail": f.detail,
                    }))
                    .collect::<Vec<_>>(),
            }));
        } else {
            println!(
                "{dialect}: {} ({} formulas, {} models, {} instances)",
                if report.passed() { "pass" } else { "FAIL" },
                report.formula_count,
                report.models_checked,
                report.instances,
            );
            for failure in &report.failures {
                println!(
                    "  {} violated by {}: {}",
                    failure.property, failure.formula, failure.detail
                );
            }
        }
    }
    if json {
        println!("{}", json!({ "suites": results, "verdict": if all_pass { "pass" } else { "fail" } }));
    }
    Ok(u8::from(!all_pass))
}

fn cmd_rewrite(args: RewriteArgs, json: bool) -> Result<u8, CliError> {
    let formula = parse_formula(&args.formula)?;
    let rewritten = match args.direction {
        DirectionArg::NablaToNedis => formula.nabla_to_nedis(),
        DirectionArg::NedisToNabla => formula.nedis_to_nabla(),
    }
    .map_err(EvalError::InvalidFormula)?;
    emit(
        json,
        json!({ "formula": rewritten.to_string() }),
        rewritten.to_string(),
    );
    Ok(0)
}
