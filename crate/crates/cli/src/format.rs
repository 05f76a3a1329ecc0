//! The `hetroute-game/1` text format.
//!
//! One declaration per line, `#` starts a comment. The first declaration must
//! be the version tag. Everything else may appear in any order:
//!
//! ```text
//! hetroute-game/1
//! types car truck
//! vertices 0 1 2
//! edge 0 0 1 affine a11=1 a12=0.5 a21=0.5 a22=2 b1=1 b2=3
//! edge 1 1 2 platooning length=1 velocity_slope=-0.5 free_flow_speed=1 fuel_weight=0 drag=0.1 rolling=0.5 platoon_slope=-0.2
//! commodity 0 2 5 1
//! path 0 0 1
//! toll 0 a12=0.1
//! tolls auto=indistinguishable
//! solver gap_tol=1e-10 seed=3
//! ```
//!
//! `path k e...` lines switch the whole game to explicit path lists. `toll`
//! lines and `tolls auto=...` are mutually exclusive.

use std::collections::BTreeMap;
use std::fmt;

use hetroute_core::costs::{
    platooning_affine, platooning_affine_unchecked, AffineEdgeCost, PhysicalConstants,
};
use hetroute_core::equilibrium::{StepRule, Variant};
use hetroute_core::tolls::{distinguishable_tolls, indistinguishable_tolls, Strategy};
use hetroute_core::{
    Commodity, EdgeCostFunction, EdgeId, Game, Graph, PathSet, PlatooningParams, SolveOptions,
    TollScheme, VertexId,
};

use crate::error::{LoadError, ParseError, ValidationError};

pub const VERSION_TAG: &str = "hetroute-game/1";

const AFFINE_KEYS: [&str; 6] = ["a11", "a12", "a21", "a22", "b1", "b2"];
const PLATOONING_KEYS: [&str; 7] = [
    "length",
    "velocity_slope",
    "free_flow_speed",
    "fuel_weight",
    "drag",
    "rolling",
    "platoon_slope",
];
const PHYSICAL_KEYS: [&str; 13] = [
    "length",
    "velocity_slope",
    "free_flow_speed",
    "fuel_weight",
    "platoon_slope",
    "engine_efficiency",
    "fuel_energy_density",
    "drag_coefficient",
    "frontal_area",
    "air_density",
    "mass",
    "gravity",
    "rolling_coefficient",
];
const SOLVER_KEYS: [&str; 5] = ["max_iters", "gap_tol", "step_rule", "variant", "seed"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CostDecl {
    Affine(AffineEdgeCost),
    Platooning(PlatooningParams),
    /// Platooning with the fuel constants given before lumping.
    PlatooningPhysical {
        length: f64,
        velocity_slope: f64,
        free_flow_speed: f64,
        fuel_weight: f64,
        platoon_slope: f64,
        constants: PhysicalConstants,
    },
}

impl CostDecl {
    pub fn keyword(&self) -> &'static str {
        match self {
            CostDecl::Affine(_) => "affine",
            CostDecl::Platooning(_) => "platooning",
            CostDecl::PlatooningPhysical { .. } => "platooning-physical",
        }
    }

    /// Named parameters in canonical order.
    pub fn fields(&self) -> Vec<(&'static str, f64)> {
        let values: Vec<f64> = match *self {
            CostDecl::Affine(a) => affine_values(&a).to_vec(),
            CostDecl::Platooning(p) => vec![
                p.length,
                p.velocity_slope,
                p.free_flow_speed,
                p.fuel_weight,
                p.drag,
                p.rolling,
                p.platoon_slope,
            ],
            CostDecl::PlatooningPhysical {
                length,
                velocity_slope,
                free_flow_speed,
                fuel_weight,
                platoon_slope,
                constants: c,
            } => vec![
                length,
                velocity_slope,
                free_flow_speed,
                fuel_weight,
                platoon_slope,
                c.engine_efficiency,
                c.fuel_energy_density,
                c.drag_coefficient,
                c.frontal_area,
                c.air_density,
                c.mass,
                c.gravity,
                c.rolling_coefficient,
            ],
        };
        self.keys().iter().copied().zip(values).collect()
    }

    fn keys(&self) -> &'static [&'static str] {
        match self {
            CostDecl::Affine(_) => &AFFINE_KEYS,
            CostDecl::Platooning(_) => &PLATOONING_KEYS,
            CostDecl::PlatooningPhysical { .. } => &PHYSICAL_KEYS,
        }
    }

    pub fn platooning_params(&self) -> Option<PlatooningParams> {
        match *self {
            CostDecl::Affine(_) => None,
            CostDecl::Platooning(p) => Some(p),
            CostDecl::PlatooningPhysical {
                length,
                velocity_slope,
                free_flow_speed,
                fuel_weight,
                platoon_slope,
                constants,
            } => {
                let (drag, rolling) = constants.lump(length);
                Some(PlatooningParams {
                    length,
                    velocity_slope,
                    free_flow_speed,
                    fuel_weight,
                    drag,
                    rolling,
                    platoon_slope,
                })
            }
        }
    }

    /// The affine cost this declaration stands for, checked unless
    /// `unchecked` is set.
    pub fn to_cost(&self, unchecked: bool) -> hetroute_core::Result<AffineEdgeCost> {
        match (self, self.platooning_params()) {
            (CostDecl::Affine(a), _) if unchecked => Ok(*a),
            (CostDecl::Affine(a), _) => AffineEdgeCost::new(a.alpha, a.beta),
            (_, Some(p)) if unchecked => Ok(platooning_affine_unchecked(&p)),
            (_, Some(p)) => platooning_affine(&p),
            (_, None) => unreachable!("non-affine declarations are platooning"),
        }
    }
}

fn affine_values(a: &AffineEdgeCost) -> [f64; 6] {
    [
        a.alpha[0][0],
        a.alpha[0][1],
        a.alpha[1][0],
        a.alpha[1][1],
        a.beta[0],
        a.beta[1],
    ]
}

fn affine_from(v: &[f64]) -> AffineEdgeCost {
    AffineEdgeCost::unchecked([[v[0], v[1]], [v[2], v[3]]], [v[4], v[5]])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeDecl {
    pub id: usize,
    pub tail: u32,
    pub head: u32,
    pub cost: CostDecl,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommodityDecl {
    pub source: u32,
    pub sink: u32,
    pub demand: [f64; 2],
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathDecl {
    pub commodity: usize,
    pub edges: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AutoToll {
    Indistinguishable,
    Distinguishable1,
    Distinguishable2,
}

impl AutoToll {
    pub fn keyword(self) -> &'static str {
        match self {
            AutoToll::Indistinguishable => "indistinguishable",
            AutoToll::Distinguishable1 => "distinguishable_1",
            AutoToll::Distinguishable2 => "distinguishable_2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [
            AutoToll::Indistinguishable,
            AutoToll::Distinguishable1,
            AutoToll::Distinguishable2,
        ]
        .into_iter()
        .find(|a| a.keyword() == s)
    }

    /// Builds the scheme for an untolled game.
    pub fn scheme(self, game: &Game) -> hetroute_core::Result<TollScheme> {
        match self {
            AutoToll::Indistinguishable => Ok(indistinguishable_tolls(game, &[], &[])),
            AutoToll::Distinguishable1 => distinguishable_tolls(game, Strategy::ChargeFirst),
            AutoToll::Distinguishable2 => distinguishable_tolls(game, Strategy::ChargeSecond),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum TollsDecl {
    #[default]
    None,
    /// Per-edge affine tolls; edges not listed are untolled.
    Linear(Vec<(usize, AffineEdgeCost)>),
    Auto(AutoToll),
}

/// Solver settings present in the file; absent keys keep their defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SolverDecl {
    pub max_iters: Option<usize>,
    pub gap_tol: Option<f64>,
    pub step_rule: Option<StepRule>,
    pub variant: Option<Variant>,
    pub seed: Option<u64>,
}

impl SolverDecl {
    pub fn apply(&self, mut opts: SolveOptions) -> SolveOptions {
        if let Some(x) = self.max_iters {
            opts.max_iters = x;
        }
        if let Some(x) = self.gap_tol {
            opts.gap_tol = x;
        }
        if let Some(x) = self.step_rule {
            opts.step_rule = x;
        }
        if let Some(x) = self.variant {
            opts.variant = x;
        }
        if let Some(x) = self.seed {
            opts.seed = x;
        }
        opts
    }

    fn is_empty(&self) -> bool {
        *self == SolverDecl::default()
    }
}

fn step_rule_name(r: StepRule) -> &'static str {
    match r {
        StepRule::ExactLineSearch => "exact_line_search",
        StepRule::Harmonic => "harmonic",
    }
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Pairwise => "pairwise",
        Variant::Classic => "classic",
    }
}

/// Source lines of declarations, used to point validation errors at the file.
#[derive(Debug, Clone, Default)]
struct Lines {
    edges: BTreeMap<usize, usize>,
    commodities: Vec<usize>,
    vertices: Option<usize>,
}

/// Parsed game file. Equality ignores source positions.
#[derive(Debug, Clone, Default)]
pub struct GameFile {
    pub type_names: Option<[String; 2]>,
    pub vertices: Vec<u32>,
    pub edges: Vec<EdgeDecl>,
    pub commodities: Vec<CommodityDecl>,
    pub paths: Vec<PathDecl>,
    pub tolls: TollsDecl,
    pub solver: SolverDecl,
    lines: Lines,
}

impl PartialEq for GameFile {
    fn eq(&self, other: &Self) -> bool {
        self.type_names == other.type_names
            && self.vertices == other.vertices
            && self.edges == other.edges
            && self.commodities == other.commodities
            && self.paths == other.paths
            && self.tolls == other.tolls
            && self.solver == other.solver
    }
}

struct Line<'a> {
    number: usize,
    tokens: Vec<&'a str>,
}

impl<'a> Line<'a> {
    fn err(&self, field: impl Into<Option<String>>, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.number,
            field: field.into(),
            message: message.into(),
        }
    }

    fn arity(&self, at_least: usize, usage: &str) -> Result<(), ParseError> {
        if self.tokens.len() < at_least {
            return Err(self.err(None, format!("expected `{usage}`")));
        }
        Ok(())
    }

    fn exact(&self, n: usize, usage: &str) -> Result<(), ParseError> {
        if self.tokens.len() != n {
            return Err(self.err(None, format!("expected `{usage}`")));
        }
        Ok(())
    }

    fn number<T: std::str::FromStr>(&self, i: usize, field: &str) -> Result<T, ParseError> {
        self.tokens[i]
            .parse()
            .map_err(|_| self.err(field.to_string(), format!("`{}` is not a valid number", self.tokens[i])))
    }

    fn real(&self, i: usize, field: &str) -> Result<f64, ParseError> {
        parse_real(self.tokens[i]).map_err(|m| self.err(field.to_string(), m))
    }

    /// `key=value` pairs from token `from` on, each key at most once and
    /// from `allowed`.
    fn pairs(&self, from: usize, allowed: &[&str]) -> Result<BTreeMap<&'a str, &'a str>, ParseError> {
        let mut out = BTreeMap::new();
        for tok in &self.tokens[from..] {
            let (k, v) = tok
                .split_once('=')
                .ok_or_else(|| self.err(tok.to_string(), "expected key=value"))?;
            if !allowed.contains(&k) {
                return Err(self.err(
                    k.to_string(),
                    format!("unknown key (expected one of {})", allowed.join(", ")),
                ));
            }
            if out.insert(k, v).is_some() {
                return Err(self.err(k.to_string(), "duplicate key"));
            }
        }
        Ok(out)
    }

    /// Values for `keys` in order; missing keys take `default` or are an error.
    fn floats(&self, from: usize, keys: &[&str], default: Option<f64>) -> Result<Vec<f64>, ParseError> {
        let pairs = self.pairs(from, keys)?;
        keys.iter()
            .map(|k| match pairs.get(k) {
                Some(v) => parse_real(v).map_err(|m| self.err(k.to_string(), m)),
                None => default.ok_or_else(|| self.err(k.to_string(), "missing")),
            })
            .collect()
    }
}

fn parse_real(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        Ok(_) => Err(format!("`{s}` is not finite")),
        Err(_) => Err(format!("`{s}` is not a valid number")),
    }
}

fn tokenize(text: &str) -> impl Iterator<Item = Line<'_>> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let content = raw.split_once('#').map_or(raw, |(c, _)| c);
        let tokens: Vec<&str> = content.split_whitespace().collect();
        (!tokens.is_empty()).then_some(Line {
            number: i + 1,
            tokens,
        })
    })
}

impl GameFile {
    pub fn parse(text: &str) -> Result<GameFile, ParseError> {
        let mut lines = tokenize(text);
        match lines.next() {
            Some(l) if l.tokens == [VERSION_TAG] => {}
            Some(l) => return Err(l.err(None, format!("expected version tag `{VERSION_TAG}`"))),
            None => {
                return Err(ParseError {
                    line: 1,
                    field: None,
                    message: format!("empty file; expected version tag `{VERSION_TAG}`"),
                })
            }
        }

        let mut file = GameFile::default();
        let mut linear_tolls: Vec<(usize, AffineEdgeCost)> = Vec::new();
        let mut auto_toll: Option<AutoToll> = None;
        let mut seen_types = false;
        let mut seen_solver = false;

        for line in lines {
            match line.tokens[0] {
                "types" => {
                    if seen_types {
                        return Err(line.err(None, "duplicate `types` line"));
                    }
                    seen_types = true;
                    let names = &line.tokens[1..];
                    if names.len() != 2 {
                        return Err(line.err(
                            None,
                            format!(
                                "unsupported type count {}: exactly two user types are supported",
                                names.len()
                            ),
                        ));
                    }
                    if names[0] == names[1] {
                        return Err(line.err(None, "type names must differ"));
                    }
                    file.type_names = Some([names[0].to_string(), names[1].to_string()]);
                }
                "vertices" => {
                    if file.lines.vertices.is_some() {
                        return Err(line.err(None, "duplicate `vertices` line"));
                    }
                    file.lines.vertices = Some(line.number);
                    for i in 1..line.tokens.len() {
                        file.vertices.push(line.number(i, "vertex")?);
                    }
                }
                "edge" => {
                    line.arity(5, "edge ID TAIL HEAD KIND key=value...")?;
                    let id: usize = line.number(1, "edge id")?;
                    let tail = line.number(2, "tail")?;
                    let head = line.number(3, "head")?;
                    let cost = match line.tokens[4] {
                        "affine" => CostDecl::Affine(affine_from(&line.floats(5, &AFFINE_KEYS, None)?)),
                        "platooning" => {
                            let v = line.floats(5, &PLATOONING_KEYS, None)?;
                            CostDecl::Platooning(PlatooningParams {
                                length: v[0],
                                velocity_slope: v[1],
                                free_flow_speed: v[2],
                                fuel_weight: v[3],
                                drag: v[4],
                                rolling: v[5],
                                platoon_slope: v[6],
                            })
                        }
                        "platooning-physical" => {
                            let v = line.floats(5, &PHYSICAL_KEYS, None)?;
                            CostDecl::PlatooningPhysical {
                                length: v[0],
                                velocity_slope: v[1],
                                free_flow_speed: v[2],
                                fuel_weight: v[3],
                                platoon_slope: v[4],
                                constants: PhysicalConstants {
                                    engine_efficiency: v[5],
                                    fuel_energy_density: v[6],
                                    drag_coefficient: v[7],
                                    frontal_area: v[8],
                                    air_density: v[9],
                                    mass: v[10],
                                    gravity: v[11],
                                    rolling_coefficient: v[12],
                                },
                            }
                        }
                        other => {
                            return Err(line.err(
                                "cost kind".to_string(),
                                format!("unknown cost kind `{other}` (expected affine, platooning or platooning-physical)"),
                            ))
                        }
                    };
                    if file.lines.edges.insert(id, line.number).is_some() {
                        return Err(line.err("edge id".to_string(), format!("edge {id} declared twice")));
                    }
                    file.edges.push(EdgeDecl { id, tail, head, cost });
                }
                "commodity" => {
                    line.exact(5, "commodity SOURCE SINK DEMAND1 DEMAND2")?;
                    file.lines.commodities.push(line.number);
                    file.commodities.push(CommodityDecl {
                        source: line.number(1, "source")?,
                        sink: line.number(2, "sink")?,
                        demand: [line.real(3, "demand1")?, line.real(4, "demand2")?],
                    });
                }
                "path" => {
                    line.arity(3, "path COMMODITY EDGE...")?;
                    let commodity = line.number(1, "commodity")?;
                    let edges = (2..line.tokens.len())
                        .map(|i| line.number(i, "edge"))
                        .collect::<Result<_, _>>()?;
                    file.paths.push(PathDecl { commodity, edges });
                }
                "toll" => {
                    line.arity(2, "toll EDGE key=value...")?;
                    if auto_toll.is_some() {
                        return Err(line.err(None, "`toll` lines cannot be combined with `tolls auto=...`"));
                    }
                    let e: usize = line.number(1, "edge")?;
                    if linear_tolls.iter().any(|(x, _)| *x == e) {
                        return Err(line.err("edge".to_string(), format!("toll for edge {e} declared twice")));
                    }
                    linear_tolls.push((e, affine_from(&line.floats(2, &AFFINE_KEYS, Some(0.0))?)));
                }
                "tolls" => {
                    line.exact(2, "tolls auto=KIND")?;
                    if !linear_tolls.is_empty() || auto_toll.is_some() {
                        return Err(line.err(None, "only one toll declaration style is allowed"));
                    }
                    let pairs = line.pairs(1, &["auto"])?;
                    let kind = pairs["auto"];
                    auto_toll = Some(AutoToll::parse(kind).ok_or_else(|| {
                        line.err(
                            "auto".to_string(),
                            format!("unknown scheme `{kind}` (expected indistinguishable, distinguishable_1 or distinguishable_2)"),
                        )
                    })?);
                }
                "solver" => {
                    if seen_solver {
                        return Err(line.err(None, "duplicate `solver` line"));
                    }
                    seen_solver = true;
                    file.solver = parse_solver(&line)?;
                }
                other => return Err(line.err(None, format!("unknown declaration `{other}`"))),
            }
        }
        file.tolls = match (auto_toll, linear_tolls.is_empty()) {
            (Some(a), _) => TollsDecl::Auto(a),
            (None, false) => TollsDecl::Linear(linear_tolls),
            (None, true) => TollsDecl::None,
        };
        Ok(file)
    }

    /// Validates the declarations and builds the game, with any declared
    /// tolls applied. Cost-assumption violations are errors unless
    /// `allow_unchecked` is set, in which case they are returned.
    pub fn build(&self, allow_unchecked: bool) -> Result<LoadedGame, LoadError> {
        let edge_line = |e: usize| self.lines.edges.get(&e).copied();
        let mut decls: Vec<&EdgeDecl> = self.edges.iter().collect();
        decls.sort_by_key(|d| d.id);

        let mut costs = Vec::with_capacity(decls.len());
        for d in &decls {
            let cost = d.cost.to_cost(allow_unchecked).map_err(|err| ValidationError {
                line: edge_line(d.id),
                message: format!("edge {}: {err}", d.id),
            })?;
            costs.push(EdgeCostFunction::Affine(cost));
        }

        let graph = Graph::new(
            self.vertices.iter().copied().map(VertexId),
            decls
                .iter()
                .map(|d| (EdgeId(d.id), VertexId(d.tail), VertexId(d.head))),
        )
        .map_err(|err| self.locate(err))?;

        let commodities: Vec<Commodity> = self
            .commodities
            .iter()
            .map(|c| Commodity::new(VertexId(c.source), VertexId(c.sink), c.demand))
            .collect();

        let game = if self.paths.is_empty() {
            Game::new(graph, commodities, costs)
        } else {
            let mut lists = vec![Vec::new(); self.commodities.len()];
            for p in &self.paths {
                let slot = lists.get_mut(p.commodity).ok_or_else(|| ValidationError {
                    line: None,
                    message: format!("path refers to unknown commodity {}", p.commodity),
                })?;
                slot.push(p.edges.iter().copied().map(EdgeId).collect());
            }
            Game::with_paths(graph, commodities, costs, PathSet::from_lists(lists))
        }
        .map_err(|err| self.locate(err))?;

        let grid = hetroute_core::costs::SampleGrid {
            max: [game.total_demand().max(1.0); 2],
            resolution: 8,
        };
        let violations = game.validate_assumption1(&grid);
        if !allow_unchecked {
            if let Some((e, report)) = violations.first() {
                let v = &report.violations[0];
                return Err(ValidationError {
                    line: edge_line(e.0),
                    message: format!(
                        "edge {}: cost assumption violated ({:?} {} = {})",
                        e.0,
                        v.kind,
                        v.coefficient.unwrap_or("value"),
                        v.value
                    ),
                }
                .into());
            }
        }

        let tolls = match &self.tolls {
            TollsDecl::None => None,
            TollsDecl::Linear(list) => {
                let mut coeffs = vec![AffineEdgeCost::unchecked([[0.0; 2]; 2], [0.0; 2]); game.num_edges()];
                for (e, a) in list {
                    let slot = coeffs.get_mut(*e).ok_or_else(|| ValidationError {
                        line: None,
                        message: format!("toll refers to unknown edge {e}"),
                    })?;
                    *slot = *a;
                }
                Some(TollScheme::linear(coeffs))
            }
            TollsDecl::Auto(a) => Some(a.scheme(&game).map_err(|err| ValidationError {
                line: None,
                message: err.to_string(),
            })?),
        };
        let game = match tolls {
            Some(t) => game.with_tolls(t),
            None => game,
        };

        Ok(LoadedGame {
            game,
            solver: self.solver.apply(SolveOptions::default()),
            type_names: self.type_names.clone(),
            assumption1: violations,
        })
    }

    fn locate(&self, err: hetroute_core::Error) -> LoadError {
        use hetroute_core::Error as E;
        let line = match &err {
            E::UnknownVertex { edge, .. } => self.lines.edges.get(&edge.0).copied(),
            E::NonDenseEdgeId { found, .. } => self.lines.edges.get(found).copied(),
            E::UnknownCommodityVertex { commodity, .. }
            | E::InvalidDemand { commodity }
            | E::InvalidPath { commodity, .. } => self.lines.commodities.get(*commodity).copied(),
            _ => None,
        };
        ValidationError {
            line,
            message: err.to_string(),
        }
        .into()
    }
}

fn parse_solver(line: &Line<'_>) -> Result<SolverDecl, ParseError> {
    let pairs = line.pairs(1, &SOLVER_KEYS)?;
    let mut out = SolverDecl::default();
    let bad = |k: &str, v: &str, what: &str| line.err(k.to_string(), format!("`{v}` is not {what}"));
    for (k, v) in pairs {
        match k {
            "max_iters" => out.max_iters = Some(v.parse().map_err(|_| bad(k, v, "a count"))?),
            "gap_tol" => {
                out.gap_tol = Some(parse_real(v).map_err(|m| line.err(k.to_string(), m))?)
            }
            "seed" => out.seed = Some(v.parse().map_err(|_| bad(k, v, "an unsigned integer"))?),
            "step_rule" => {
                out.step_rule = Some(match v {
                    "exact_line_search" => StepRule::ExactLineSearch,
                    "harmonic" => StepRule::Harmonic,
                    _ => return Err(bad(k, v, "exact_line_search or harmonic")),
                })
            }
            "variant" => {
                out.variant = Some(match v {
                    "pairwise" => Variant::Pairwise,
                    "classic" => Variant::Classic,
                    _ => return Err(bad(k, v, "pairwise or classic")),
                })
            }
            _ => unreachable!("keys are filtered by `pairs`"),
        }
    }
    Ok(out)
}

/// A built game together with the file settings that travel with it.
#[derive(Debug, Clone)]
pub struct LoadedGame {
    pub game: Game,
    pub solver: SolveOptions,
    pub type_names: Option<[String; 2]>,
    /// Edges failing the cost assumptions; empty unless loaded unchecked.
    pub assumption1: Vec<(EdgeId, hetroute_core::costs::Assumption1Report)>,
}

fn write_pairs(f: &mut fmt::Formatter<'_>, pairs: &[(&str, f64)]) -> fmt::Result {
    for (k, v) in pairs {
        write!(f, " {k}={v}")?;
    }
    Ok(())
}

/// Canonical serialization. `f64` is written with its shortest round-trip
/// representation, so parsing the output gives back an equal `GameFile`.
impl fmt::Display for GameFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{VERSION_TAG}")?;
        if let Some([a, b]) = &self.type_names {
            writeln!(f, "types {a} {b}")?;
        }
        if !self.vertices.is_empty() {
            f.write_str("vertices")?;
            for v in &self.vertices {
                write!(f, " {v}")?;
            }
            writeln!(f)?;
        }
        for e in &self.edges {
            write!(f, "edge {} {} {} {}", e.id, e.tail, e.head, e.cost.keyword())?;
            write_pairs(f, &e.cost.fields())?;
            writeln!(f)?;
        }
        for c in &self.commodities {
            writeln!(f, "commodity {} {} {} {}", c.source, c.sink, c.demand[0], c.demand[1])?;
        }
        for p in &self.paths {
            write!(f, "path {}", p.commodity)?;
            for e in &p.edges {
                write!(f, " {e}")?;
            }
            writeln!(f)?;
        }
        match &self.tolls {
            TollsDecl::None => {}
            TollsDecl::Auto(a) => writeln!(f, "tolls auto={}", a.keyword())?,
            TollsDecl::Linear(list) => {
                for (e, a) in list {
                    write!(f, "toll {e}")?;
                    let values = affine_values(a);
                    write_pairs(f, &AFFINE_KEYS.iter().copied().zip(values).collect::<Vec<_>>())?;
                    writeln!(f)?;
                }
            }
        }
        if !self.solver.is_empty() {
            let s = &self.solver;
            f.write_str("solver")?;
            if let Some(x) = s.max_iters {
                write!(f, " max_iters={x}")?;
            }
            if let Some(x) = s.gap_tol {
                write!(f, " gap_tol={x}")?;
            }
            if let Some(x) = s.step_rule {
                write!(f, " step_rule={}", step_rule_name(x))?;
            }
            if let Some(x) = s.variant {
                write!(f, " variant={}", variant_name(x))?;
            }
            if let Some(x) = s.seed {
                write!(f, " seed={x}")?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn version_tag_is_required() {
        let err = GameFile::parse("vertices 0 1\n").unwrap_err();
        assert_eq!(err.line, 1);
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = "# header\n\nhetroute-game/1 # tag\nvertices 0 1 # two\n";
        let file = GameFile::parse(text).unwrap();
        assert_eq!(file.vertices, vec![0, 1]);
    }

    #[test]
    fn unknown_key_names_the_field() {
        let text = "hetroute-game/1\nvertices 0 1\nedge 0 0 1 affine a11=1 a12=0 a21=0 a22=1 b1=0 b3=0\n";
        let err = GameFile::parse(text).unwrap_err();
        assert_eq!(err.line, 3);
        assert_eq!(err.field.as_deref(), Some("b3"));
    }
}
