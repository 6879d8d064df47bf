use std::time::Duration;

use atom_core::bench::{
    self, import_external_embedding, BenchCase, BenchRecord, CaseStatus, GraphModel, SweepSpec,
};
use atom_core::embedding::EmbeddingError;
use atom_core::{embed, ChimeraTopology, EngineConfig, ViolationKind};
use tempfile::TempDir;

fn ba_star_sweep() -> Vec<BenchCase> {
    SweepSpec {
        models: vec![GraphModel::BaStar],
        nodes: vec![100, 200],
        degrees: vec![10],
        seeds: vec![1, 2, 3],
        time_limit: Duration::from_secs(120),
        ..SweepSpec::desk()
    }
    .cases()
}

fn strip(records: &[BenchRecord]) -> Vec<BenchRecord> {
    records.iter().map(BenchRecord::without_timing).collect()
}

#[test]
fn ba_star_sweep_is_feasible_and_repeatable() {
    let cases = ba_star_sweep();
    let first = bench::run_sweep(&cases, 1);
    assert_eq!(first.len(), 6);
    for r in &first {
        assert!(r.feasible, "{r:?}");
        assert_eq!(r.status, CaseStatus::Ok);
        assert!(r.qubits.unwrap() >= r.n);
        assert!(r.iterations.unwrap() <= 3 * r.n);
    }
    let again = bench::run_sweep(&cases, 2);
    assert_eq!(strip(&first), strip(&again));
}

#[test]
fn tiny_time_limit_times_out_every_case() {
    let mut cases = ba_star_sweep();
    for c in &mut cases {
        c.time_limit = Duration::from_secs_f64(0.000001);
    }
    let records = bench::run_sweep(&cases, 1);
    assert!(records
        .iter()
        .all(|r| r.status == CaseStatus::Timeout && !r.feasible && r.qubits.is_none()));
}

#[test]
fn generator_failure_is_an_error_record() {
    let case = BenchCase {
        model: GraphModel::Regular,
        num_nodes: 5,
        degree: 3,
        seed: 1,
        config: EngineConfig::default(),
        time_limit: Duration::from_secs(10),
    };
    let r = bench::run_case(&case);
    assert_eq!(r.status, CaseStatus::Error);
    assert!(!r.feasible);
}

#[test]
fn topology_cap_is_an_infeasible_record() {
    let mut case = ba_star_sweep().remove(0);
    case.config.max_topology = Some((2, 2));
    assert_eq!(bench::run_case(&case).status, CaseStatus::Infeasible);
}

#[test]
fn csv_has_header_and_one_row_per_record() {
    let mut cases = ba_star_sweep();
    cases.truncate(1);
    let records = bench::run_sweep(&cases, 1);
    let mut buf = Vec::new();
    bench::write_csv(&records, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[0],
        "model,n,d,seed,feasible,status,seconds,qubits,topo_n,topo_m,topo_c,enclosing_n,enclosing_m,\
         iterations,expansions,max_chain,edges"
    );
    assert!(lines[1].starts_with("ba_star,100,10,1,true,ok,"));
}

#[test]
fn json_round_trips() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("records.json");
    let mut cases = ba_star_sweep();
    cases.truncate(2);
    cases[1].time_limit = Duration::ZERO;
    let records = bench::run_sweep(&cases, 1);
    bench::emit_json(&records, &path).unwrap();
    assert_eq!(bench::read_json(&path).unwrap(), records);
}

fn own_embedding(dir: &TempDir) -> (atom_core::LogicalGraph, atom_core::EmbedOutcome, std::path::PathBuf) {
    let graph = GraphModel::BaComplete.generate(60, 6, 11).unwrap();
    let outcome = embed(&graph, &EngineConfig::default()).unwrap();
    let path = dir.path().join("emb.json");
    outcome.embedding.to_doc().save(&path).unwrap();
    (graph, outcome, path)
}

#[test]
fn import_of_own_output_reproduces_metrics() {
    let dir = TempDir::new().unwrap();
    let (graph, outcome, path) = own_embedding(&dir);
    let summary = import_external_embedding(&path, &graph, Some(outcome.report.topology)).unwrap();
    assert!(summary.report.feasible);
    assert_eq!(summary.topology, outcome.report.topology);
    assert_eq!(summary.qubits, outcome.report.qubits_used);
    assert_eq!(summary.min_enclosing, outcome.report.min_enclosing);
    assert!(import_external_embedding(&path, &graph, None).unwrap().report.feasible);
}

#[test]
fn import_reports_broken_chain() {
    let dir = TempDir::new().unwrap();
    let (graph, outcome, path) = own_embedding(&dir);
    let mut doc = atom_core::EmbeddingDoc::load(&path).unwrap();
    // a free node with no used neighbor cannot join any chain
    let (&victim, _) = doc.chains.iter().max_by_key(|(_, c)| c.len()).unwrap();
    let t = doc.topology;
    let used: std::collections::BTreeSet<usize> = doc.chains.values().flatten().copied().collect();
    let stray = (0..t.num_nodes())
        .rev()
        .find(|&u| {
            !used.contains(&u)
                && t
                    .neighbors(t.coord_of(u).unwrap())
                    .unwrap()
                    .iter()
                    .all(|&w| !used.contains(&t.node_index(w).unwrap()))
        })
        .unwrap();
    doc.chains.get_mut(&victim).unwrap().push(stray);
    doc.save(&path).unwrap();

    let summary = import_external_embedding(&path, &graph, None).unwrap();
    assert!(!summary.report.feasible);
    assert_eq!(summary.qubits, outcome.report.qubits_used + 1);
    let broken: Vec<_> = summary
        .report
        .violations
        .iter()
        .filter(|v| v.kind() == ViolationKind::ChainConnectivity)
        .collect();
    assert_eq!(broken.len(), 1);
    assert!(broken[0].to_string().contains(&format!("chain of {victim} ")));
}

#[test]
fn import_rejects_topology_mismatch() {
    let dir = TempDir::new().unwrap();
    let (graph, outcome, path) = own_embedding(&dir);
    let t = outcome.report.topology;
    let other = ChimeraTopology::new(t.rows(), t.cols() + 1, t.shore()).unwrap();
    assert!(matches!(
        import_external_embedding(&path, &graph, Some(other)),
        Err(EmbeddingError::TopologyMismatch { .. })
    ));
}
