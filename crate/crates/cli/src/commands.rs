//! Subcommand definitions and their reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use hetroute_core::costs::{AffineEdgeCost, Assumption1Report};
use hetroute_core::efficiency::{theorem3_applicable, BoundVerdict, SocialOptimum};
use hetroute_core::equilibrium::{
    verify_nash_with_tolerance, Convexity, Equilibrium, NashCertificate, StepRule, Variant,
};
use hetroute_core::potential::{check_potential_exists, Mode, SamplingPlan, SymmetryReport};
use hetroute_core::tolls::{nonnegative_shift, verify_toll_condition, TollReport};
use hetroute_core::{
    price_of_anarchy, solve_equilibrium, solve_social_optimum, EdgeId, FlowVector, Game,
    PoAReport, SolveOptions, TollScheme, UserType, Verdict,
};
use serde::Serialize;

use crate::csvio::{read_flows, write_flows, write_trace, TypeAliases};
use crate::error::{CliError, LoadError};
use crate::format::{AutoToll, GameFile, LoadedGame, TollsDecl};
use crate::repro;
use crate::report::{opt_sig, sig, Fields, Table};

#[derive(Debug, Parser)]
#[command(name = "hetroute", version, about = "Equilibria, tolls and efficiency of two-type routing games")]
pub struct Cli {
    /// Emit JSON instead of text tables.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide whether the game admits a potential and check the cost assumptions.
    Check(CheckArgs),
    /// Compute an equilibrium by minimizing the potential.
    Solve(SolveArgs),
    /// Compute the social optimum.
    Opt(OptArgs),
    /// Construct tolls that restore a potential.
    Tolls(TollArgs),
    /// Compare the equilibrium with the social optimum.
    Poa(PoaArgs),
    /// Certify how close supplied flows are to an equilibrium.
    Verify(VerifyArgs),
    /// Reproduce the six-route example from the embedded fixture.
    ReproPaper,
}

#[derive(Debug, Args)]
pub struct GameArgs {
    #[arg(long)]
    pub game: PathBuf,
    /// Load costs that violate nonnegativity or own-flow monotonicity.
    #[arg(long)]
    pub allow_unchecked: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StepRuleArg {
    ExactLineSearch,
    Harmonic,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum VariantArg {
    Pairwise,
    Classic,
}

/// Overrides for the solver settings in the game file.
#[derive(Debug, Args, Default)]
pub struct SolverArgs {
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long)]
    pub gap_tol: Option<f64>,
    #[arg(long, value_enum)]
    pub step_rule: Option<StepRuleArg>,
    #[arg(long, value_enum)]
    pub variant: Option<VariantArg>,
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SolverArgs {
    fn apply(&self, mut opts: SolveOptions) -> SolveOptions {
        if let Some(x) = self.max_iters {
            opts.max_iters = x;
        }
        if let Some(x) = self.gap_tol {
            opts.gap_tol = x;
        }
        if let Some(x) = self.step_rule {
            opts.step_rule = match x {
                StepRuleArg::ExactLineSearch => StepRule::ExactLineSearch,
                StepRuleArg::Harmonic => StepRule::Harmonic,
            };
        }
        if let Some(x) = self.variant {
            opts.variant = match x {
                VariantArg::Pairwise => Variant::Pairwise,
                VariantArg::Classic => Variant::Classic,
            };
        }
        if let Some(x) = self.seed {
            opts.seed = x;
        }
        opts
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Edgewise,
    Pathwise,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, value_enum, default_value = "pathwise")]
    pub mode: ModeArg,
    /// Seed of the random sample points used for non-affine costs.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Write the iteration trace as CSV (`iter,V,gap`).
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Write the equilibrium path flows as CSV.
    #[arg(long)]
    pub flows_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Count tolls as costs instead of transfers.
    #[arg(long)]
    pub include_tolls: bool,
    #[arg(long)]
    pub flows_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Indistinguishable,
    #[value(name = "distinguishable_1")]
    Distinguishable1,
    #[value(name = "distinguishable_2")]
    Distinguishable2,
}

impl From<StrategyArg> for AutoToll {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Indistinguishable => AutoToll::Indistinguishable,
            StrategyArg::Distinguishable1 => AutoToll::Distinguishable1,
            StrategyArg::Distinguishable2 => AutoToll::Distinguishable2,
        }
    }
}

#[derive(Debug, Args)]
pub struct TollArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long, value_enum, default_value = "indistinguishable")]
    pub strategy: StrategyArg,
    /// Constant added to every edge's toll (indistinguishable scheme only).
    #[arg(long, default_value_t = 0.0)]
    pub constant: f64,
    /// Shift each edge's toll up until it is nonnegative on sampled flows.
    #[arg(long)]
    pub nonnegative_tolls: bool,
    /// Write the game with the constructed tolls to this file.
    #[arg(long)]
    pub write_game: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PoaArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub include_tolls: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub game: GameArgs,
    #[arg(long)]
    pub flows: PathBuf,
    /// Flow above which a path counts as used (default 1e-7 times the largest demand).
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Relative tolerance on demand conservation.
    #[arg(long, default_value_t = 1e-9)]
    pub feasibility_tol: f64,
    /// Largest epsilon accepted as an equilibrium.
    #[arg(long, default_value_t = 1e-6)]
    pub epsilon_tol: f64,
}

/// A command's result in both output forms.
pub trait Report: Serialize {
    fn render(&self) -> String;
    /// Whether the command's check succeeded; false gives exit code 1.
    fn passed(&self) -> bool {
        true
    }
}

fn read_to_string(path: &Path) -> Result<String, LoadError> {
    fs::read_to_string(path).map_err(|source| LoadError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn load(args: &GameArgs) -> Result<(GameFile, LoadedGame), CliError> {
    let text = read_to_string(&args.game)?;
    let file = GameFile::parse(&text).map_err(LoadError::from)?;
    let loaded = file.build(args.allow_unchecked)?;
    Ok((file, loaded))
}

fn write_file(path: &Path, f: impl FnOnce(&mut fs::File) -> std::io::Result<()>) -> Result<(), CliError> {
    fs::File::create(path)
        .and_then(|mut file| f(&mut file))
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Runs the command, writes its report to `out` and returns the exit code.
pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<i32, CliError> {
    match &cli.command {
        Command::Check(a) => emit(cli.json, out, &check(a)?),
        Command::Solve(a) => emit(cli.json, out, &solve(a)?),
        Command::Opt(a) => emit(cli.json, out, &opt(a)?),
        Command::Tolls(a) => emit(cli.json, out, &tolls(a)?),
        Command::Poa(a) => emit(cli.json, out, &poa(a)?),
        Command::Verify(a) => emit(cli.json, out, &verify(a)?),
        Command::ReproPaper => emit(cli.json, out, &repro::run()?),
    }
}

fn emit<R: Report>(json: bool, out: &mut dyn Write, report: &R) -> Result<i32, CliError> {
    let text = if json {
        let mut s = serde_json::to_string_pretty(report).expect("reports serialize");
        s.push('\n');
        s
    } else {
        report.render()
    };
    out.write_all(text.as_bytes())
        .map_err(|e| CliError::Input(format!("writing output: {e}")))?;
    Ok(if report.passed() { 0 } else { 1 })
}

fn verdict_name(v: Verdict) -> &'static str {
    match v {
        Verdict::EdgewiseSymmetric => "edgewise symmetric",
        Verdict::PathwiseSymmetric => "pathwise symmetric",
        Verdict::Asymmetric => "asymmetric",
    }
}

fn convexity_name(c: Convexity) -> &'static str {
    match c {
        Convexity::Certified => "certified",
        Convexity::StationaryOnly => "stationary only",
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

#[derive(Debug, Serialize)]
pub struct GameSummary {
    pub edges: usize,
    pub commodities: usize,
    pub paths: usize,
    pub tolled: bool,
}

impl GameSummary {
    fn of(game: &Game) -> Self {
        GameSummary {
            edges: game.num_edges(),
            commodities: game.commodities().len(),
            paths: game.num_paths(),
            tolled: game.tolls().is_some(),
        }
    }

    fn add_to(&self, f: &mut Fields) {
        f.add("edges", self.edges.to_string())
            .add("commodities", self.commodities.to_string())
            .add("paths", self.paths.to_string())
            .add("tolled", yes_no(self.tolled));
    }
}

#[derive(Debug, Serialize)]
pub struct EdgeAssumption {
    pub edge: EdgeId,
    pub report: Assumption1Report,
}

#[derive(Debug, Serialize)]
pub struct CheckReport {
    pub game: GameSummary,
    pub symmetry: SymmetryReport,
    pub assumption1_violations: Vec<EdgeAssumption>,
    pub passed: bool,
}

impl Report for CheckReport {
    fn render(&self) -> String {
        let s = &self.symmetry;
        let mut f = Fields::new();
        self.game.add_to(&mut f);
        f.add("verdict", verdict_name(s.verdict))
            .add("symbolic", yes_no(s.symbolic))
            .add("max edge residual", sig(s.max_abs_residual))
            .add("max path-pair residual", sig(s.max_abs_pair_residual))
            .add("tolerance", sig(s.tol))
            .add("path pairs checked", s.pairs_checked.to_string())
            .add("cost assumptions", if self.assumption1_violations.is_empty() { "ok" } else { "violated" });
        let mut out = f.render();
        let asymmetric: Vec<_> = s.edges.iter().filter(|e| e.max_abs > s.tol).collect();
        if !asymmetric.is_empty() {
            let mut t = Table::new(["edge", "residual"]);
            for e in asymmetric {
                t.row([e.edge.0.to_string(), sig(e.max_abs)]);
            }
            out.push('\n');
            out.push_str(&t.render());
        }
        if !self.assumption1_violations.is_empty() {
            let mut t = Table::new(["edge", "kind", "coefficient", "value"]);
            for ea in &self.assumption1_violations {
                for v in &ea.report.violations {
                    t.row([
                        ea.edge.0.to_string(),
                        format!("{:?}", v.kind).to_lowercase(),
                        v.coefficient.unwrap_or("-").to_string(),
                        sig(v.value),
                    ]);
                }
            }
            out.push('\n');
            out.push_str(&t.render());
        }
        out.push_str(if self.passed { "\nPASS\n" } else { "\nFAIL\n" });
        out
    }

    fn passed(&self) -> bool {
        self.passed
    }
}

pub fn check(args: &CheckArgs) -> Result<CheckReport, CliError> {
    let (_, loaded) = load(&args.game)?;
    let game = &loaded.game;
    let mode = match args.mode {
        ModeArg::Edgewise => Mode::Edgewise,
        ModeArg::Pathwise => Mode::Pathwise,
    };
    let symmetry = check_potential_exists(game, mode, &SamplingPlan::default_for(game, args.seed), None);
    let violations: Vec<EdgeAssumption> = loaded
        .assumption1
        .into_iter()
        .map(|(edge, report)| EdgeAssumption { edge, report })
        .collect();
    let passed = symmetry.verdict.admits_potential() && violations.is_empty();
    Ok(CheckReport {
        game: GameSummary::of(game),
        symmetry,
        assumption1_violations: violations,
        passed,
    })
}

#[derive(Debug, Serialize)]
pub struct PathRow {
    pub path_id: usize,
    pub commodity: usize,
    pub edges: Vec<usize>,
    pub flow: [f64; 2],
    pub cost: [f64; 2],
}

pub fn path_rows(game: &Game, flows: &FlowVector) -> Result<Vec<PathRow>, CliError> {
    let costs = game.path_costs(flows)?;
    Ok(game
        .paths()
        .paths()
        .iter()
        .enumerate()
        .map(|(p, path)| PathRow {
            path_id: p,
            commodity: path.commodity,
            edges: path.edges.iter().map(|e| e.0).collect(),
            flow: flows.as_slice()[p],
            cost: costs[p],
        })
        .collect())
}

pub fn path_table(rows: &[PathRow], type_names: &[String; 2]) -> String {
    let [a, b] = type_names;
    let mut t = Table::new([
        "path".to_string(),
        "commodity".into(),
        "edges".into(),
        format!("flow {a}"),
        format!("flow {b}"),
        format!("cost {a}"),
        format!("cost {b}"),
    ]);
    for r in rows {
        t.row([
            r.path_id.to_string(),
            r.commodity.to_string(),
            join_edges(&r.edges),
            sig(r.flow[0]),
            sig(r.flow[1]),
            sig(r.cost[0]),
            sig(r.cost[1]),
        ]);
    }
    t.render()
}

pub fn join_edges(edges: &[usize]) -> String {
    edges.iter().map(usize::to_string).collect::<Vec<_>>().join("-")
}

fn names(loaded: &LoadedGame) -> [String; 2] {
    loaded
        .type_names
        .clone()
        .unwrap_or_else(|| UserType::ALL.map(|t| t.name().to_string()))
}

#[derive(Debug, Serialize)]
pub struct SolveReport {
    pub game: GameSummary,
    pub options: SolveOptions,
    pub converged: bool,
    pub iterations: usize,
    pub potential: f64,
    pub gap: f64,
    pub convexity: Convexity,
    pub epsilon: f64,
    pub certificate: NashCertificate,
    pub paths: Vec<PathRow>,
    #[serde(skip)]
    type_names: [String; 2],
}

impl SolveReport {
    fn new(loaded: &LoadedGame, options: SolveOptions, eq: Equilibrium) -> Result<Self, CliError> {
        Ok(SolveReport {
            game: GameSummary::of(&loaded.game),
            options,
            converged: eq.converged,
            iterations: eq.iterations,
            potential: eq.potential,
            gap: eq.gap,
            convexity: eq.convexity,
            epsilon: eq.certificate.epsilon,
            paths: path_rows(&loaded.game, &eq.flows)?,
            certificate: eq.certificate,
            type_names: names(loaded),
        })
    }
}

impl Report for SolveReport {
    fn render(&self) -> String {
        let mut f = Fields::new();
        self.game.add_to(&mut f);
        f.add("converged", yes_no(self.converged))
            .add("iterations", self.iterations.to_string())
            .add("potential", sig(self.potential))
            .add("duality gap", sig(self.gap))
            .add("nash epsilon", sig(self.epsilon))
            .add("convexity", convexity_name(self.convexity));
        format!("{}\n{}", f.render(), path_table(&self.paths, &self.type_names))
    }

    fn passed(&self) -> bool {
        self.converged
    }
}

pub fn solve(args: &SolveArgs) -> Result<SolveReport, CliError> {
    let (_, loaded) = load(&args.game)?;
    let opts = args.solver.apply(loaded.solver);
    let eq = solve_equilibrium(&loaded.game, &opts)?;
    if let Some(path) = &args.trace {
        write_file(path, |f| write_trace(f, &eq.trace))?;
    }
    if let Some(path) = &args.flows_out {
        write_file(path, |f| write_flows(f, &eq.flows, loaded.type_names.as_ref()))?;
    }
    SolveReport::new(&loaded, opts, eq)
}

#[derive(Debug, Serialize)]
pub struct OptReport {
    pub game: GameSummary,
    pub options: SolveOptions,
    pub include_tolls: bool,
    pub converged: bool,
    pub iterations: usize,
    pub social_cost: f64,
    pub gap: f64,
    pub convexity: Convexity,
    pub paths: Vec<PathRow>,
    #[serde(skip)]
    type_names: [String; 2],
}

impl Report for OptReport {
    fn render(&self) -> String {
        let mut f = Fields::new();
        self.game.add_to(&mut f);
        f.add("tolls counted", yes_no(self.include_tolls))
            .add("converged", yes_no(self.converged))
            .add("iterations", self.iterations.to_string())
            .add("social cost", sig(self.social_cost))
            .add("duality gap", sig(self.gap))
            .add("convexity", convexity_name(self.convexity));
        format!("{}\n{}", f.render(), path_table(&self.paths, &self.type_names))
    }

    fn passed(&self) -> bool {
        self.converged
    }
}

pub fn opt(args: &OptArgs) -> Result<OptReport, CliError> {
    let (_, loaded) = load(&args.game)?;
    let opts = args.solver.apply(loaded.solver);
    let SocialOptimum {
        flows,
        cost,
        gap,
        iterations,
        converged,
        convexity,
        ..
    } = solve_social_optimum(&loaded.game, &opts, args.include_tolls)?;
    if let Some(path) = &args.flows_out {
        write_file(path, |f| write_flows(f, &flows, loaded.type_names.as_ref()))?;
    }
    Ok(OptReport {
        game: GameSummary::of(&loaded.game),
        options: opts,
        include_tolls: args.include_tolls,
        converged,
        iterations,
        social_cost: cost,
        gap,
        convexity,
        paths: path_rows(&loaded.game, &flows)?,
        type_names: names(&loaded),
    })
}

#[derive(Debug, Serialize)]
pub struct TollRow {
    pub edge: usize,
    /// Toll on each type is `alpha[t] . phi + beta[t]`.
    pub alpha: [[f64; 2]; 2],
    pub beta: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct TollsReport {
    pub strategy: &'static str,
    pub type_independent: bool,
    pub tolls: Vec<TollRow>,
    pub condition: TollReport,
    pub tolled_symmetry: SymmetryReport,
    pub passed: bool,
}

impl Report for TollsReport {
    fn render(&self) -> String {
        let mut f = Fields::new();
        f.add("strategy", self.strategy)
            .add("type independent", yes_no(self.type_independent))
            .add("condition residual", sig(self.condition.max_residual))
            .add("condition tolerance", sig(self.condition.tol))
            .add("tolled verdict", verdict_name(self.tolled_symmetry.verdict));
        let mut t = Table::new(["edge", "a11", "a12", "a21", "a22", "b1", "b2"]);
        for r in &self.tolls {
            t.row([
                r.edge.to_string(),
                sig(r.alpha[0][0]),
                sig(r.alpha[0][1]),
                sig(r.alpha[1][0]),
                sig(r.alpha[1][1]),
                sig(r.beta[0]),
                sig(r.beta[1]),
            ]);
        }
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{}\n{}\n{verdict}\n", f.render(), t.render())
    }

    fn passed(&self) -> bool {
        self.passed
    }
}

pub fn tolls(args: &TollArgs) -> Result<TollsReport, CliError> {
    let (mut file, loaded) = load(&args.game)?;
    let base = loaded.game.without_tolls();
    let strategy = AutoToll::from(args.strategy);
    let mut scheme = strategy.scheme(&base)?;
    if args.constant != 0.0 {
        if !matches!(strategy, AutoToll::Indistinguishable) {
            return Err(CliError::Input(
                "--constant applies to the indistinguishable scheme only".into(),
            ));
        }
        let constants = vec![args.constant; base.num_edges()];
        scheme = hetroute_core::tolls::indistinguishable_tolls(&base, &[], &constants);
    }
    let plan = SamplingPlan::default_for(&base, 0);
    if args.nonnegative_tolls {
        scheme = nonnegative_shift(&scheme, &plan);
    }
    let coefficients: Vec<AffineEdgeCost> = scheme
        .edges()
        .iter()
        .map(|t| *t.as_affine().expect("schemes for affine games are affine"))
        .collect();
    let condition = verify_toll_condition(&base, &scheme, &plan, None);
    let tolled = base.with_tolls(scheme.clone());
    let tolled_symmetry = check_potential_exists(&tolled, Mode::Pathwise, &plan, None);
    let passed = condition.passed && tolled_symmetry.verdict.admits_potential();

    if let Some(path) = &args.write_game {
        file.tolls = TollsDecl::Linear(coefficients.iter().copied().enumerate().collect());
        let text = file.to_string();
        write_file(path, |f| f.write_all(text.as_bytes()))?;
    }
    Ok(TollsReport {
        strategy: strategy.keyword(),
        type_independent: TollScheme::is_type_independent(&scheme),
        tolls: coefficients
            .iter()
            .enumerate()
            .map(|(e, a)| TollRow {
                edge: e,
                alpha: a.alpha,
                beta: a.beta,
            })
            .collect(),
        condition,
        tolled_symmetry,
        passed,
    })
}

#[derive(Debug, Serialize)]
pub struct PoaOutput {
    pub report: PoAReport,
    pub bound_check: BoundVerdict,
}

impl Report for PoaOutput {
    fn render(&self) -> String {
        let r = &self.report;
        let mut f = Fields::new();
        f.add("cost at equilibrium", sig(r.cost_at_equilibrium))
            .add("cost at optimum", sig(r.cost_at_optimum))
            .add("ratio", sig(r.ratio))
            .add("zero over zero", yes_no(r.zero_over_zero))
            .add("bound applicable", yes_no(r.bound_applicable))
            .add("bound", opt_sig(r.bound_value))
            .add("tolls counted", yes_no(r.include_tolls))
            .add("equilibrium epsilon", sig(r.equilibrium_epsilon))
            .add("equilibrium gap", sig(r.equilibrium_gap))
            .add("optimum gap", sig(r.optimum_gap))
            .add("optimum certified", yes_no(r.optimum_certified));
        let mut out = f.render();
        if !self.bound_check.failing.is_empty() {
            let mut t = Table::new(["edge", "symmetric", "psd", "determinant", "asymmetry"]);
            for d in &self.bound_check.failing {
                t.row([
                    d.edge.0.to_string(),
                    yes_no(d.symmetric).to_string(),
                    yes_no(d.psd).to_string(),
                    sig(d.determinant),
                    sig(d.asymmetry),
                ]);
            }
            out.push('\n');
            out.push_str(&t.render());
        }
        out
    }
}

pub fn poa(args: &PoaArgs) -> Result<PoaOutput, CliError> {
    let (_, loaded) = load(&args.game)?;
    let opts = args.solver.apply(loaded.solver);
    let result = price_of_anarchy(&loaded.game, &opts, args.include_tolls)?;
    Ok(PoaOutput {
        report: result.report,
        bound_check: theorem3_applicable(&loaded.game)?,
    })
}

#[derive(Debug, Serialize)]
pub struct VerifyReport {
    pub epsilon: f64,
    pub epsilon_tol: f64,
    pub certificate: NashCertificate,
    pub paths: Vec<PathRow>,
    pub passed: bool,
    #[serde(skip)]
    type_names: [String; 2],
}

impl Report for VerifyReport {
    fn render(&self) -> String {
        let mut f = Fields::new();
        f.add("nash epsilon", sig(self.epsilon))
            .add("accepted up to", sig(self.epsilon_tol));
        if let Some(w) = &self.certificate.worst {
            f.add(
                "worst deviation",
                format!(
                    "commodity {} {}: path {} -> path {} saves {}",
                    w.commodity,
                    self.type_names[w.user_type.index()],
                    w.used_path.0,
                    w.better_path.0,
                    sig(w.cost_gap)
                ),
            );
        }
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        format!("{}\n{}\n{verdict}\n", f.render(), path_table(&self.paths, &self.type_names))
    }

    fn passed(&self) -> bool {
        self.passed
    }
}

pub fn verify(args: &VerifyArgs) -> Result<VerifyReport, CliError> {
    let (_, loaded) = load(&args.game)?;
    let game = &loaded.game;
    let text = read_to_string(&args.flows)?;
    let aliases = TypeAliases::new(loaded.type_names.as_ref());
    let flows = read_flows(&text, game.num_paths(), &aliases)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.flows.display())))?;
    let certificate = verify_nash_with_tolerance(game, &flows, args.threshold, args.feasibility_tol)?;
    Ok(VerifyReport {
        epsilon: certificate.epsilon,
        epsilon_tol: args.epsilon_tol,
        passed: certificate.epsilon <= args.epsilon_tol,
        paths: path_rows(game, &flows)?,
        certificate,
        type_names: names(&loaded),
    })
}
