use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use hetroute_cli::csvio::{read_flows, TypeAliases};
use hetroute_cli::format::GameFile;
use hetroute_cli::LoadError;
use proptest::prelude::*;
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn hetroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hetroute")).args(args).output().unwrap()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const TWO_ROADS: &str = "hetroute-game/1
vertices 0 1
edge 0 0 1 affine a11=1 a12=0.2 a21=0.2 a22=2 b1=1 b2=0
edge 1 0 1 affine a11=2 a12=0 a21=0 a22=1 b1=0 b2=1
commodity 0 1 3 2
";

#[test]
fn fixture_loads_with_explicit_paths() {
    let text = std::fs::read_to_string(fixture("fig1.game")).unwrap();
    let game = GameFile::parse(&text).unwrap().build(false).unwrap().game;
    assert_eq!(game.num_edges(), 12);
    assert_eq!(game.commodities().len(), 3);
    assert_eq!(game.num_paths(), 9);
}

#[test]
fn empty_commodity_list_gives_zero_paths() {
    let game = GameFile::parse("hetroute-game/1\nvertices 0 1\nedge 0 0 1 affine a11=1 a12=0 a21=0 a22=1 b1=0 b2=0\n")
        .unwrap()
        .build(false)
        .unwrap()
        .game;
    assert_eq!(game.num_paths(), 0);
}

#[test]
fn unknown_vertex_names_the_edge_and_its_line() {
    let text = "hetroute-game/1\nvertices 0 1\n\nedge 0 0 7 affine a11=1 a12=0 a21=0 a22=1 b1=0 b2=0\n";
    let err = GameFile::parse(text).unwrap().build(false).unwrap_err();
    let LoadError::Validation(v) = err else { panic!("{err}") };
    assert_eq!(v.line, Some(4));
    assert!(v.message.contains("edge 0"), "{}", v.message);
}

#[test]
fn parse_errors_point_at_line_and_field() {
    let cases: [(&str, usize, Option<&str>); 6] = [
        ("hetroute-game/2\n", 1, None),
        ("hetroute-game/1\ntypes car bus truck\n", 2, None),
        ("hetroute-game/1\nvertices 0 x\n", 2, Some("vertex")),
        ("hetroute-game/1\n# c\ncommodity 0 1 inf 0\n", 3, Some("demand1")),
        ("hetroute-game/1\nedge 0 0 1 affine a11=1\n", 2, Some("a12")),
        ("hetroute-game/1\ntolls auto=indistinguishable\ntoll 0 a12=1\n", 3, None),
    ];
    for (text, line, field) in cases {
        let err = GameFile::parse(text).unwrap_err();
        assert_eq!(err.line, line, "{text:?}: {err}");
        assert_eq!(err.field.as_deref(), field, "{text:?}: {err}");
    }
    let err = GameFile::parse("hetroute-game/1\ntypes car\n").unwrap_err();
    assert!(err.message.contains("unsupported type count 1"), "{err}");
}

#[test]
fn fixture_round_trips() {
    for name in ["fig1.game", "platooning.game", "platooning_no_fuel.game", "zero_demand.game"] {
        let text = std::fs::read_to_string(fixture(name)).unwrap();
        let file = GameFile::parse(&text).unwrap();
        let again = GameFile::parse(&file.to_string()).unwrap();
        assert_eq!(file, again, "{name}");
    }
}

#[test]
fn physical_constants_are_lumped() {
    let text = "hetroute-game/1
vertices 0 1
edge 0 0 1 platooning-physical length=2 velocity_slope=-0.5 free_flow_speed=1 fuel_weight=0 platoon_slope=-0.2 engine_efficiency=0.4 fuel_energy_density=36 drag_coefficient=0.6 frontal_area=10 air_density=1.2 mass=20 gravity=9.81 rolling_coefficient=0.006
";
    let file = GameFile::parse(text).unwrap();
    let p = file.edges[0].cost.platooning_params().unwrap();
    assert!((p.drag - 2.0 * 1.2 * 10.0 * 0.6 / (2.0 * 0.4 * 36.0)).abs() < 1e-12);
    assert!((p.rolling - 2.0 * 20.0 * 9.81 * 0.006 / (0.4 * 36.0)).abs() < 1e-12);
    assert_eq!(GameFile::parse(&file.to_string()).unwrap(), file);
}

#[test]
fn cost_assumption_violations_need_the_override() {
    let dir = tempfile::tempdir().unwrap();
    let game = write(
        &dir,
        "neg.game",
        "hetroute-game/1\nvertices 0 1\nedge 0 0 1 affine a11=-1 a12=0 a21=0 a22=1 b1=0 b2=0\ncommodity 0 1 1 1\n",
    );
    let out = hetroute(&["check", "--game", path_str(&game)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = hetroute(&["check", "--json", "--allow-unchecked", "--game", path_str(&game)]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["assumption1_violations"][0]["edge"], 0);
}

#[test]
fn input_errors_exit_with_two() {
    let missing = hetroute(&["solve", "--game", "/nonexistent/game"]);
    assert_eq!(missing.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(&dir, "bad.game", "hetroute-game/1\nedge 0\n");
    let out = hetroute(&["solve", "--game", path_str(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));
}

#[test]
fn asymmetric_game_fails_solve_until_tolled() {
    let dir = tempfile::tempdir().unwrap();
    let platooning = fixture("platooning.game");
    let out = hetroute(&["solve", "--game", path_str(&platooning)]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("tolls"));

    for strategy in ["indistinguishable", "distinguishable_1", "distinguishable_2"] {
        let tolled = dir.path().join(format!("{strategy}.game"));
        let out = hetroute(&[
            "tolls",
            "--game",
            path_str(&platooning),
            "--strategy",
            strategy,
            "--write-game",
            path_str(&tolled),
        ]);
        assert_eq!(out.status.code(), Some(0), "{strategy}");
        let out = hetroute(&["check", "--game", path_str(&tolled)]);
        assert_eq!(out.status.code(), Some(0), "{strategy}");
        let out = hetroute(&["solve", "--json", "--game", path_str(&tolled)]);
        assert_eq!(out.status.code(), Some(0), "{strategy}");
        let report: Value = serde_json::from_slice(&out.stdout).unwrap();
        assert!(report["epsilon"].as_f64().unwrap() <= 1e-6, "{strategy}");
    }
}

#[test]
fn nonnegative_tolls_are_nonnegative_at_zero_flow() {
    let out = hetroute(&[
        "tolls",
        "--json",
        "--game",
        path_str(&fixture("platooning.game")),
        "--strategy",
        "distinguishable_2",
        "--nonnegative-tolls",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    for row in report["tolls"].as_array().unwrap() {
        for t in 0..2 {
            assert!(row["beta"][t].as_f64().unwrap() >= 0.0);
        }
    }
}

#[test]
fn json_reports_are_byte_identical_across_runs() {
    let game = fixture("fig1.game");
    for cmd in ["solve", "opt", "poa", "check"] {
        let args = [cmd, "--json", "--game", path_str(&game), "--seed", "7"];
        let a = hetroute(&args);
        let b = hetroute(&args);
        assert_eq!(a.status.code(), Some(0), "{cmd}");
        assert_eq!(a.stdout, b.stdout, "{cmd}");
    }
}

#[test]
fn solve_writes_trace_and_flows_that_verify() {
    let dir = tempfile::tempdir().unwrap();
    let trace = dir.path().join("trace.csv");
    let flows = dir.path().join("flows.csv");
    let game = fixture("fig1.game");
    let out = hetroute(&[
        "solve",
        "--game",
        path_str(&game),
        "--trace",
        path_str(&trace),
        "--flows-out",
        path_str(&flows),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let trace = std::fs::read_to_string(trace).unwrap();
    let mut lines = trace.lines();
    assert_eq!(lines.next(), Some("iter,V,gap"));
    assert_eq!(lines.next().unwrap().split(',').next(), Some("0"));

    let text = std::fs::read_to_string(&flows).unwrap();
    assert!(text.starts_with("# types car=theta1,truck=theta2\npath_id,type,flow\n"));
    let out = hetroute(&["verify", "--game", path_str(&game), "--flows", path_str(&flows)]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn verify_rejects_infeasible_and_flags_non_equilibria() {
    let dir = tempfile::tempdir().unwrap();
    let game = write(&dir, "g.game", TWO_ROADS);
    let short = write(&dir, "short.csv", "path_id,type,flow\n0,theta1,1\n");
    assert_eq!(hetroute(&["verify", "--game", path_str(&game), "--flows", path_str(&short)]).status.code(), Some(1));

    // All traffic on the first road is not an equilibrium.
    let lopsided = write(&dir, "lop.csv", "path_id,type,flow\n0,theta1,3\n0,theta2,2\n");
    let out = hetroute(&["verify", "--json", "--game", path_str(&game), "--flows", path_str(&lopsided)]);
    assert_eq!(out.status.code(), Some(1));
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["epsilon"].as_f64().unwrap() > 1.0);

    let unknown = write(&dir, "unk.csv", "path_id,type,flow\n0,bus,3\n");
    assert_eq!(hetroute(&["verify", "--game", path_str(&game), "--flows", path_str(&unknown)]).status.code(), Some(2));
}

#[test]
fn repro_text_output_is_a_table() {
    let out = hetroute(&["repro-paper"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("price of anarchy"));
    assert!(text.trim_end().ends_with("PASS"));
}

#[test]
fn game_type_names_are_flow_aliases() {
    let aliases = TypeAliases::new(Some(&["car".into(), "truck".into()]));
    let flows = read_flows("path_id,type,flow\n1,truck,2\n", 2, &aliases).unwrap();
    assert_eq!(flows.as_slice(), &[[0.0, 0.0], [0.0, 2.0]]);
}

fn number() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6f64..1e6,
        any::<f64>().prop_filter("finite", |x| x.is_finite()),
        Just(0.0),
        Just(-0.0),
        Just(1e-300),
    ]
}

fn cost_line() -> impl Strategy<Value = String> {
    prop_oneof![
        prop::collection::vec(number(), 6).prop_map(|v| format!(
            "affine a11={} a12={} a21={} a22={} b1={} b2={}",
            v[0], v[1], v[2], v[3], v[4], v[5]
        )),
        prop::collection::vec(number(), 7).prop_map(|v| format!(
            "platooning length={} velocity_slope={} free_flow_speed={} fuel_weight={} drag={} rolling={} platoon_slope={}",
            v[0], v[1], v[2], v[3], v[4], v[5], v[6]
        )),
    ]
}

fn game_text() -> impl Strategy<Value = String> {
    (
        prop::option::of(Just("types car truck\n")),
        prop::collection::vec((0u32..6, 0u32..6, cost_line()), 0..5),
        prop::collection::vec((0u32..6, 0u32..6, number(), number()), 0..3),
        prop::collection::vec((0usize..3, prop::collection::vec(0usize..5, 1..4)), 0..4),
        prop::option::of((1usize..100, 1e-12f64..1.0, any::<u64>())),
        prop::option::of(prop::sample::select(vec!["indistinguishable", "distinguishable_1", "distinguishable_2"])),
    )
        .prop_map(|(types, edges, commodities, paths, solver, auto)| {
            let mut s = String::from("# generated\nhetroute-game/1\n");
            s.push_str(types.unwrap_or(""));
            s.push_str("vertices 0 1 2 3 4 5\n");
            for (i, (a, b, cost)) in edges.iter().enumerate().rev() {
                s.push_str(&format!("edge {i} {a} {b} {cost}\n"));
            }
            for (a, b, d1, d2) in commodities {
                s.push_str(&format!("commodity {a} {b} {d1} {d2}  # note\n"));
            }
            for (k, es) in paths {
                let es: Vec<String> = es.iter().map(|e| e.to_string()).collect();
                s.push_str(&format!("path {k} {}\n", es.join(" ")));
            }
            if let Some((iters, tol, seed)) = solver {
                s.push_str(&format!("solver seed={seed} gap_tol={tol} max_iters={iters} variant=classic\n"));
            }
            if let Some(kind) = auto {
                s.push_str(&format!("tolls auto={kind}\n"));
            }
            s
        })
}

proptest! {
    #[test]
    fn parse_serialize_parse_is_identity(text in game_text()) {
        let file = GameFile::parse(&text).unwrap();
        let printed = file.to_string();
        let again = GameFile::parse(&printed).unwrap();
        prop_assert_eq!(&file, &again);
        prop_assert_eq!(printed, again.to_string());
    }
}
