use schemata_core::basesolver::Builtin;
use schemata_core::oracle::{evidence, Oracle, OracleResult, ProverEvidence};
use schemata_core::tableau::{check_measure, prove, NodeStatus, ProofRun, ProverConfig, RuleTag, Verdict};
use schemata_core::{parse_problem, Problem};

fn load(name: &str) -> Problem {
    let path = format!("{}/../../corpus/{name}.schema", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap();
    parse_problem(&text).unwrap()
}

fn run(problem: &Problem) -> ProofRun {
    let run = prove(problem, &Builtin, &ProverConfig::default()).unwrap();
    assert!(run.violations.is_empty(), "{:?}", run.violations);
    assert!(check_measure(&run, problem, false).unwrap().is_empty());
    run
}

#[test]
fn chain_is_unsat_and_oracle_agrees() {
    let p = load("chain");
    assert_eq!(run(&p).verdict, Verdict::Unsat);
    assert!(matches!(
        Oracle::new(&p).check(5).unwrap(),
        OracleResult::UnsatUpTo { depth: 5, .. }
    ));
}

#[test]
fn trace_closes_by_loop_and_base_refutation() {
    let r = run(&load("trace"));
    assert_eq!(r.verdict, Verdict::Unsat);
    assert!(r.tree.count(RuleTag::Loop) >= 1);
    let refuted: Vec<Vec<String>> = r
        .tree
        .nodes
        .iter()
        .filter(|n| n.status == NodeStatus::BaseUnsat)
        .map(|n| {
            n.label
                .iter()
                .filter(|f| !matches!(f, schemata_core::Formula::Eq(..)))
                .map(|f| schemata_core::print::formula_to_string(&r.tree.sig, f))
                .collect()
        })
        .collect();
    assert!(refuted.contains(&vec!["(not (p b))".to_string(), "(p b)".to_string()]), "{refuted:?}");
}

#[test]
fn depth_example_is_sat_with_a_checked_witness() {
    let p = load("depth");
    let r = run(&p);
    assert!(matches!(r.verdict, Verdict::Sat { .. }));
    match evidence(&r, &p).unwrap() {
        ProverEvidence::Sat { holds, depth, .. } => {
            assert_eq!(holds, Some(true));
            assert!(depth.unwrap() <= 2);
        }
        other => panic!("{other:?}"),
    }
    assert!(matches!(Oracle::new(&p).check(2).unwrap(), OracleResult::SatAtDepth { .. }));
}

#[test]
fn dag_probe_is_sat_and_grounded_at_depth_three() {
    let p = load("dag_probe");
    let r = run(&p);
    assert!(matches!(r.verdict, Verdict::Sat { .. }));
    assert!(matches!(
        Oracle::new(&p).check(3).unwrap(),
        OracleResult::SatAtDepth { depth, .. } if depth <= 3
    ));
}

#[test]
fn loops_target_layers_with_fewer_n_explosions() {
    for name in ["chain", "trace"] {
        let r = run(&load(name));
        for n in &r.tree.nodes {
            if let Some(t) = n.loop_target {
                let target = &r.tree.nodes[t];
                assert!(target.layer);
                assert!(target.nexp < n.nexp);
                assert!(r.tree.path_to(n.id).contains(&t));
            }
        }
    }
}

#[test]
fn node_limit_reports_resource_limit() {
    let p = load("chain");
    let config = ProverConfig {
        max_nodes: 5,
        ..ProverConfig::default()
    };
    let r = prove(&p, &Builtin, &config).unwrap();
    assert!(matches!(r.verdict, Verdict::ResourceLimit { .. }));
}
