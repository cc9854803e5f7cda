mod common;

use std::fs;
use std::path::Path;
use std::process::Command;

use common::*;
use dynembed::io;

fn dynembed(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dynembed")).args(args).output().expect("spawn dynembed")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_edges(dir: &Path, name: &str, edges: &[(&str, &str, f64)]) -> std::path::PathBuf {
    let p = dir.join(name);
    let body: String = edges.iter().map(|(a, b, w)| format!("{a}\t{b}\t{w}\n")).collect();
    fs::write(&p, format!("# test graph\n{body}")).unwrap();
    p
}

fn path_graph(dir: &Path) -> std::path::PathBuf {
    write_edges(dir, "path.tsv", &[("a", "b", 1.0), ("b", "c", 2.0), ("c", "d", 1.0), ("b", "e", 0.5)])
}

#[test]
fn similarity_writes_outputs_and_config() {
    let dir = tempfile::tempdir().unwrap();
    let edges = path_graph(dir.path());
    let out = dir.path().join("out");
    let o = dynembed(&["similarity", "--edges", path(&edges), "--t", "0.5", "-o", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["psi.csv", "dsq.csv", "similarity.json", "resolved_config.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let config: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("resolved_config.json")).unwrap()).unwrap();
    assert_eq!(config["command"], "similarity");
    assert_eq!(config["time"]["t"], 0.5);
    let (ids, psi) = io::read_matrix_csv(&out.join("psi.csv")).unwrap();
    assert_eq!(ids, ["a", "b", "c", "d", "e"]);
    assert!(max_abs(&(&psi - psi.transpose())) == 0.0);
}

#[test]
fn single_edge_at_zero_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write_edges(dir.path(), "one.tsv", &[("x", "y", 1.0)]);
    let out = dir.path().join("out");
    assert!(dynembed(&["similarity", "--edges", path(&edges), "--t", "0", "-o", path(&out)]).status.success());
    let (_, psi) = io::read_matrix_csv(&out.join("psi.csv")).unwrap();
    assert_eq!(psi, nalgebra::DMatrix::identity(2, 2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let edges = path_graph(dir.path());
    let run = |name: &str| {
        let out = dir.path().join(name);
        assert!(dynembed(&["cluster", "--edges", path(&edges), "--louvain", "--t", "1", "--seed", "3", "-o", path(&out)]).status.success());
        assert!(dynembed(&["embed", "--edges", path(&edges), "--c", "2", "-o", path(&out.join("emb"))]).status.success());
        (
            fs::read(out.join("partition.csv")).unwrap(),
            fs::read(out.join("cluster.json")).unwrap(),
            fs::read(out.join("emb/embedding.csv")).unwrap(),
        )
    };
    assert_eq!(run("r1"), run("r2"));
}

#[test]
fn long_centered_interval_on_tree_gives_half_resistance() {
    let dir = tempfile::tempdir().unwrap();
    let edges = path_graph(dir.path());
    let out = dir.path().join("out");
    let o = dynembed(&["similarity", "--edges", path(&edges), "--interval", "1e9", "--center", "-o", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, d2) = io::read_matrix_csv(&out.join("dsq.csv")).unwrap();
    let w = {
        let mut w = nalgebra::DMatrix::zeros(5, 5);
        for (i, j, x) in [(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (1, 4, 0.5)] {
            w[(i, j)] = x;
            w[(j, i)] = x;
        }
        w
    };
    let kappa = gram_distances(&laplacian_pinv(&laplacian(&w)));
    assert!(max_abs(&(d2 - kappa / 2.0)) < 1e-6);
}

#[test]
fn rank_against_identical_reference() {
    let dir = tempfile::tempdir().unwrap();
    let edges = write_edges(
        dir.path(),
        "dag.tsv",
        &[("a", "b", 1.0), ("a", "c", 1.0), ("b", "c", 1.0), ("c", "d", 1.0), ("b", "d", 0.5), ("d", "e", 1.0)],
    );
    let out = dir.path().join("first");
    assert!(dynembed(&["rank", "--edges", path(&edges), "--directed", "--dynamics", "influence", "-o", path(&out)]).status.success());
    let ranking = fs::read_to_string(out.join("ranking.csv")).unwrap();
    let reference: String = std::iter::once("node_id,rank\n".to_string())
        .chain(ranking.lines().skip(1).map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            format!("{},{}\n", f[1], f[0])
        }))
        .collect();
    let refpath = dir.path().join("ref.csv");
    fs::write(&refpath, reference).unwrap();
    let out2 = dir.path().join("second");
    let o = dynembed(&[
        "rank", "--edges", path(&edges), "--directed", "--dynamics", "influence", "--reference", path(&refpath), "-o", path(&out2),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out2.join("ranking.json")).unwrap()).unwrap();
    assert!((meta["spearman"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn scan_finds_two_cliques() {
    let dir = tempfile::tempdir().unwrap();
    let mut edges = Vec::new();
    let names: Vec<String> = (0..8).map(|i| format!("n{i}")).collect();
    for i in 0..8 {
        for j in (i + 1)..8 {
            let w = if i / 4 == j / 4 { 1.0 } else if (i, j) == (3, 4) { 0.1 } else { continue };
            edges.push((names[i].as_str(), names[j].as_str(), w));
        }
    }
    let edges = write_edges(dir.path(), "cliques.tsv", &edges);
    let out = dir.path().join("out");
    let o = dynembed(&["scan", "--edges", path(&edges), "--tmin", "0.1", "--tmax", "100", "--npoints", "20", "--seeds", "3", "-o", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let scan: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("scan.json")).unwrap()).unwrap();
    let plateaus = scan["plateaus"].as_array().unwrap();
    assert!(plateaus.iter().any(|p| p["k"] == 2), "{scan}");
    assert!(out.join("vi.csv").exists() && out.join("partitions.csv").exists());
}

#[test]
fn signed_tribes_split() {
    let dir = tempfile::tempdir().unwrap();
    let edges = dir.path().join("tribes.tsv");
    fs::write(&edges, dynembed::datasets::tribes_tsv()).unwrap();
    let out = dir.path().join("out");
    let o = dynembed(&["cluster", "--edges", path(&edges), "--dynamics", "signed", "--spectral", "--c", "2", "--k", "3", "-o", path(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (ids, p) = io::read_partition_csv(&out.join("partition.csv")).unwrap();
    assert_eq!(ids.len(), 16);
    assert_eq!(p.k(), 3);
}

#[test]
fn lif_gen_and_sim() {
    let dir = tempfile::tempdir().unwrap();
    let params = dir.path().join("params.json");
    let p = dynembed::lif::LifParams::scaled(2, 16, 4);
    fs::write(&params, serde_json::to_string(&p).unwrap()).unwrap();
    let gen = dir.path().join("gen");
    assert!(dynembed(&["lif-gen", "--params", path(&params), "--seed", "5", "-o", path(&gen)]).status.success());
    let (_, w) = io::read_matrix_csv(&gen.join("W_N.csv")).unwrap();
    assert_eq!(w.shape(), (40, 40));
    let sim = dir.path().join("sim");
    let wn = gen.join("W_N.csv");
    let o = dynembed(&["lif-sim", "--wn", path(&wn), "--params", path(&params), "--duration", "200", "-o", path(&sim)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(fs::read_to_string(sim.join("spikes.csv")).unwrap().starts_with("time_ms,neuron_id\n"));
    assert!(sim.join("coactivation.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let edges = path_graph(dir.path());
    let out = dir.path().join("out");
    assert_eq!(dynembed(&["similarity", "--bogus"]).status.code(), Some(2));
    assert_eq!(dynembed(&["--help"]).status.code(), Some(0));
    assert_eq!(dynembed(&["similarity", "--edges", path(&edges), "--t", "1", "--interval", "1", "-o", path(&out)]).status.code(), Some(2));
    let o = dynembed(&["similarity", "--edges", path(&edges), "--directed", "--dynamics", "signed", "--t", "1", "-o", path(&out)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("dynembed: "));
    let bad = dir.path().join("bad.tsv");
    fs::write(&bad, "a\tb\n").unwrap();
    assert_eq!(dynembed(&["similarity", "--edges", path(&bad), "--t", "1", "-o", path(&out)]).status.code(), Some(2));
    let params = dir.path().join("p.json");
    fs::write(&params, r#"{"p_ee": 2.0}"#).unwrap();
    assert_eq!(dynembed(&["lif-gen", "--params", path(&params), "-o", path(&out)]).status.code(), Some(2));
}
