mod common;

use std::path::Path;

use common::*;
use narrative_net::extraction::TokenBudget;
use narrative_net::io::{read_networks, write_networks};
use narrative_net::pipeline::*;
use narrative_net::taxonomy::{CoarseCategory, RelationshipRecord};

fn extract_opts(dir: &Path, corpus: CorpusSource, fixtures: &Path) -> ExtractOptions {
    ExtractOptions {
        corpus,
        backend: Backend::Mock {
            fixtures: fixtures.to_path_buf(),
        },
        budget: TokenBudget::default(),
        out: dir.join("networks.jsonl"),
        rejects: dir.join("rejects.csv"),
        workers: 2,
    }
}

fn e2e_extract(dir: &Path) -> (ExtractOptions, RunManifest) {
    let fx = e2e_fixture();
    let opts = extract_opts(dir, CorpusSource::Directory(fx.join("corpus")), &fx.join("mock.json"));
    let manifest = cmd_extract(&opts).unwrap();
    (opts, manifest)
}

#[test]
fn extract_fixture_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let (opts, m) = e2e_extract(dir.path());
    assert_eq!(m.get("input_volumes"), 5);
    assert_eq!(m.get("processed"), 4);
    assert_eq!(m.get("rejected"), 1);
    assert_eq!(m.get("rejected_content_filtered"), 1);
    assert_eq!(m.get("processed") + m.get("rejected"), m.get("input_volumes"));
    assert_eq!(m.get("malformed_records_dropped"), 1);
    assert_eq!(m.truncated_volumes, vec!["v5"]);

    let nets = read_networks(&opts.out).unwrap().networks;
    let ids: Vec<_> = nets.iter().map(|n| n.volume_id.as_str()).collect();
    assert_eq!(ids, ["v1", "v2", "v4", "v5"]);
    assert_eq!(nets[0].records.len(), 6);
    // fenced reply parsed, truncated reply salvaged to its complete prefix
    assert_eq!(nets[1].records.len(), 6);
    assert_eq!(nets[3].records.len(), 2);

    let (header, rows) = read_csv(&opts.rejects);
    assert_eq!(header, ["volume_id", "reason", "detail"]);
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][..2], ["v3".to_string(), "content_filtered".to_string()]);

    let written: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(manifest_path(&opts.out)).unwrap()).unwrap();
    assert_eq!(written["command"], "extract");
    assert_eq!(written["truncated_volumes"][0], "v5");
    assert_eq!(written["config_digest"].as_str().unwrap().len(), 64);
}

#[test]
fn extract_three_volume_manifest_with_filter() {
    let dir = tempfile::tempdir().unwrap();
    let fx = e2e_fixture();
    let manifest_csv = dir.path().join("corpus.csv");
    let corpus = fx.join("corpus");
    std::fs::write(
        &manifest_csv,
        format!(
            "volume_id,path\nv1,{0}/v1.txt\nv3,{0}/v3.txt\nv4,{0}/v4.txt\n",
            corpus.display()
        ),
    )
    .unwrap();
    let opts = extract_opts(dir.path(), CorpusSource::Manifest(manifest_csv), &fx.join("mock.json"));
    let m = cmd_extract(&opts).unwrap();
    assert_eq!((m.get("processed"), m.get("rejected")), (2, 1));
    assert_eq!(read_csv(&opts.rejects).1.len(), 1);
}

#[test]
fn extract_empty_corpus() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("empty");
    std::fs::create_dir(&corpus).unwrap();
    let fixtures = dir.path().join("mock.json");
    std::fs::write(&fixtures, "{}").unwrap();
    let opts = extract_opts(dir.path(), CorpusSource::Directory(corpus), &fixtures);
    let m = cmd_extract(&opts).unwrap();
    assert!(m.counts.values().all(|v| *v == 0));
    assert_eq!(std::fs::read(&opts.out).unwrap(), b"");
    assert_eq!(std::fs::read_to_string(&opts.rejects).unwrap(), "volume_id,reason,detail\n");
}

#[test]
fn every_rejection_reason_is_logged() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("corpus");
    std::fs::create_dir(&corpus).unwrap();
    for id in ["long", "filtered", "missing", "garbage", "ok"] {
        let words = if id == "long" { 400 } else { 5 };
        std::fs::write(corpus.join(format!("{id}.txt")), "word ".repeat(words)).unwrap();
    }
    let fixtures = dir.path().join("mock.json");
    std::fs::write(
        &fixtures,
        r#"{
            "long": {"finish_reason": "completed", "response": "[]"},
            "filtered": {"finish_reason": "content_filter"},
            "garbage": {"finish_reason": "completed", "response": "I could not find any characters."},
            "ok": {"finish_reason": "completed", "response": "[]"}
        }"#,
    )
    .unwrap();
    let mut opts = extract_opts(dir.path(), CorpusSource::Directory(corpus), &fixtures);
    // the template alone is a few thousand tokens; 400 words push past this
    let overhead = narrative_net::extraction::Extractor::new(narrative_net::extraction::MockClient::new())
        .prompt_overhead();
    opts.budget = TokenBudget::new(overhead + 100, 100).unwrap();
    let m = cmd_extract(&opts).unwrap();
    assert_eq!(m.get("processed"), 1);
    for reason in ["too_long", "content_filtered", "transport", "malformed"] {
        assert_eq!(m.get(&format!("rejected_{reason}")), 1, "{reason}");
    }
    let reasons: Vec<(String, String)> = read_csv(&opts.rejects)
        .1
        .into_iter()
        .map(|r| (r[0].clone(), r[1].clone()))
        .collect();
    assert_eq!(
        reasons,
        [
            ("filtered".into(), "content_filtered".into()),
            ("garbage".into(), "malformed".into()),
            ("long".into(), "too_long".into()),
            ("missing".into(), "transport".into()),
        ]
    );
}

#[test]
fn extract_is_deterministic_across_worker_counts() {
    let fx = e2e_fixture();
    let mut outputs = Vec::new();
    for workers in [1, 4] {
        let dir = tempfile::tempdir().unwrap();
        let mut opts = extract_opts(dir.path(), CorpusSource::Directory(fx.join("corpus")), &fx.join("mock.json"));
        opts.workers = workers;
        cmd_extract(&opts).unwrap();
        outputs.push((
            std::fs::read(&opts.out).unwrap(),
            std::fs::read(&opts.rejects).unwrap(),
        ));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn clean_counts_and_idempotence() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("raw.jsonl");
    let p = planted("a", 6, 1, false).network;
    let mut inconsistent = p.clone();
    inconsistent.records[0].coarse_category = CoarseCategory::Familial;
    let mut twin = p.clone();
    twin.volume_id = "b".into();
    let mut dup = inconsistent.records[1].clone();
    std::mem::swap(&mut dup.character_1, &mut dup.character_2);
    inconsistent.records.push(dup);
    write_networks(&input, &[inconsistent, twin]).unwrap();
    std::fs::write(
        &input,
        std::fs::read_to_string(&input).unwrap() + "{broken\n",
    )
    .unwrap();

    let once = dir.path().join("once.jsonl");
    let m = cmd_clean(&input, &once).unwrap();
    assert_eq!(m.get("repaired_records"), 1);
    assert_eq!(m.get("duplicate_records_dropped"), 1);
    assert_eq!(m.get("duplicate_networks_dropped"), 1);
    assert_eq!(m.get("bad_lines"), 1);
    assert_eq!(m.get("networks_out"), 1);
    assert_eq!(m.notices.len(), 1);

    let twice = dir.path().join("twice.jsonl");
    let m2 = cmd_clean(&once, &twice).unwrap();
    assert_eq!(std::fs::read(&once).unwrap(), std::fs::read(&twice).unwrap());
    assert_eq!(m2.get("repaired_records") + m2.get("duplicate_records_dropped"), 0);
}

#[test]
fn analyze_planted_contrast() {
    let dir = tempfile::tempdir().unwrap();
    let mut nets = Vec::new();
    let mut metas = Vec::new();
    let mut expected: Vec<(bool, f64, f64, f64, f64)> = Vec::new();
    for i in 0..40 {
        let fiction = i % 2 == 0;
        let id = format!("vol{i:02}");
        let decade = (i / 2) % 4;
        // fiction grows by decade; nonfiction: larger, fragmented, triangle-rich
        let p = if fiction {
            planted(&id, 6 + i % 5 + decade, 1 + i % 2, i % 3 == 0)
        } else {
            planted(&id, 14 + i % 7, 2 + i % 3, true)
        };
        expected.push((
            fiction,
            p.nodes as f64,
            p.edges.len() as f64,
            p.components as f64,
            brute_transitivity(p.nodes, &p.edges),
        ));
        metas.push(meta(&id, 1850 + 10 * decade as i32, fiction));
        nets.push(p.network);
    }
    let networks = dir.path().join("nets.jsonl");
    let metadata = dir.path().join("meta.csv");
    write_networks(&networks, &nets).unwrap();
    write_metadata_csv(&metadata, &metas);
    let out_dir = dir.path().join("reports");
    let m = cmd_analyze(&AnalyzeOptions {
        networks,
        metadata: Some(metadata),
        out_dir: out_dir.clone(),
        svg_metrics: DEFAULT_SVG_METRICS.map(String::from).to_vec(),
    })
    .unwrap();
    assert_eq!(m.get("networks_analyzed"), 40);
    assert_eq!(m.get("svg_files"), DEFAULT_SVG_METRICS.len() as u64);

    let (header, rows) = read_csv(&out_dir.join(COMPARISON_FILE));
    assert_eq!(
        header,
        ["metric", "fiction_mean", "nonfiction_mean", "t", "df", "p", "n_fiction", "n_nonfiction"]
    );
    let mean_of = |fiction: bool, k: usize| {
        let vals: Vec<f64> = expected
            .iter()
            .filter(|e| e.0 == fiction)
            .map(|e| [e.1, e.2, e.3, e.4][k])
            .collect();
        vals.iter().sum::<f64>() / vals.len() as f64
    };
    for (k, metric) in ["node_count", "edge_count", "component_count", "transitivity"].iter().enumerate() {
        let row = rows.iter().find(|r| r[0] == *metric).unwrap_or_else(|| panic!("{metric}"));
        let fiction: f64 = row[1].parse().unwrap();
        let nonfiction: f64 = row[2].parse().unwrap();
        assert!((fiction - mean_of(true, k)).abs() < 1e-12, "{metric}");
        assert!((nonfiction - mean_of(false, k)).abs() < 1e-12, "{metric}");
        assert_eq!(row[6..], ["20".to_string(), "20".to_string()]);
    }
    let nodes = rows.iter().find(|r| r[0] == "node_count").unwrap();
    assert!(nodes[5].parse::<f64>().unwrap() < 1e-6);

    let (th, trows) = read_csv(&out_dir.join(TRENDS_FILE));
    assert_eq!(th, ["metric", "group", "r", "p", "n_decades"]);
    let trend = trows
        .iter()
        .find(|r| r[0] == "node_count" && r[1] == "fiction")
        .unwrap_or_else(|| panic!("{trows:?}"));
    assert_eq!(trend[4], "4");
    assert!(trend[2].parse::<f64>().unwrap() > 0.9);

    let (mh, mrows) = read_csv(&out_dir.join(METRICS_FILE));
    assert_eq!(mrows.len(), 40);
    assert_eq!(mh.len(), 1 + narrative_net::metrics::METRIC_NAMES.len());
    let (ch, crows) = read_csv(&out_dir.join(COMMUNITIES_FILE));
    assert_eq!(ch, ["volume_id", "node", "community_id", "graph_scope"]);
    let full_rows = crows.iter().filter(|r| r[0] == "vol00" && r[3] == "full").count();
    assert_eq!(full_rows, expected[0].1 as usize);
    let svg = std::fs::read_to_string(out_dir.join(svg_file_name("node_count"))).unwrap();
    assert_eq!(svg.matches(r#"class="mean""#).count(), 2);
}

#[test]
fn analyze_one_decade_and_no_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let nets: Vec<_> = (0..6)
        .map(|i| planted(&format!("v{i}"), 5 + i, 1, i % 2 == 0).network)
        .collect();
    let networks = dir.path().join("nets.jsonl");
    write_networks(&networks, &nets).unwrap();

    let metadata = dir.path().join("meta.csv");
    let metas: Vec<_> = (0..6).map(|i| meta(&format!("v{i}"), 1901 + i, i < 3)).collect();
    write_metadata_csv(&metadata, &metas);
    let out_dir = dir.path().join("one_decade");
    let m = cmd_analyze(&AnalyzeOptions {
        networks: networks.clone(),
        metadata: Some(metadata),
        out_dir: out_dir.clone(),
        svg_metrics: vec![],
    })
    .unwrap();
    assert_eq!(read_csv(&out_dir.join(TRENDS_FILE)).1.len(), 0);
    assert!(m.notices.iter().any(|n| n.contains("need at least 3 decades")));

    let out_dir = dir.path().join("bare");
    let m = cmd_analyze(&AnalyzeOptions {
        networks,
        metadata: None,
        out_dir: out_dir.clone(),
        svg_metrics: vec!["node_count".into()],
    })
    .unwrap();
    assert_eq!(read_csv(&out_dir.join(METRICS_FILE)).1.len(), 6);
    assert_eq!(read_csv(&out_dir.join(COMPARISON_FILE)).1.len(), 0);
    assert!(m.notices.iter().any(|n| n.contains("no network has metadata")));
    // without metadata the histogram has a single pooled group
    let svg = std::fs::read_to_string(out_dir.join(svg_file_name("node_count"))).unwrap();
    assert!(svg.contains(r#"data-group="all""#));
}

#[test]
fn analyze_rejects_unknown_svg_metric_and_missing_input() {
    let dir = tempfile::tempdir().unwrap();
    let opts = AnalyzeOptions {
        networks: dir.path().join("absent.jsonl"),
        metadata: None,
        out_dir: dir.path().join("out"),
        svg_metrics: vec![],
    };
    assert!(cmd_analyze(&opts).is_err());
    let opts = AnalyzeOptions {
        svg_metrics: vec!["bogus".into()],
        ..opts
    };
    assert!(matches!(cmd_analyze(&opts), Err(PipelineError::Input(_))));
}

#[test]
fn validate_self_and_disjoint() {
    let dir = tempfile::tempdir().unwrap();
    let gold = dir.path().join("gold.jsonl");
    let nets = vec![planted("g1", 5, 1, true).network, planted("g2", 4, 2, false).network];
    write_networks(&gold, &nets).unwrap();
    let out = dir.path().join("acc.csv");
    cmd_validate(&gold, &gold, &out, false).unwrap();
    let (header, rows) = read_csv(&out);
    assert_eq!(
        header,
        ["volume_id", "attribute", "matched", "correct", "accuracy", "kappa", "unmatched_gold", "unmatched_pred"]
    );
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| r[4] == "1" && r[5] == "1"));

    let other = dir.path().join("other.jsonl");
    write_networks(&other, &[planted("zz", 4, 1, false).network]).unwrap();
    let err = cmd_validate(&gold, &other, &out, false).unwrap_err();
    assert!(err.to_string().contains("share no volume_id"));
}

#[test]
fn validate_fuzzy_pairs_flag() {
    let dir = tempfile::tempdir().unwrap();
    let gold_net = planted("v", 3, 1, false).network;
    let mut pred_net = gold_net.clone();
    for r in &mut pred_net.records {
        *r = RelationshipRecord {
            character_1: r.character_1.replace("person", "persun"),
            ..r.clone()
        };
    }
    let (gold, pred) = (dir.path().join("g.jsonl"), dir.path().join("p.jsonl"));
    write_networks(&gold, &[gold_net]).unwrap();
    write_networks(&pred, &[pred_net]).unwrap();
    let out = dir.path().join("acc.csv");
    let exact = cmd_validate(&gold, &pred, &out, false).unwrap();
    assert_eq!(exact.get("matched_pairs"), 0);
    let fuzzy = cmd_validate(&gold, &pred, &out, true).unwrap();
    assert_eq!(fuzzy.get("matched_pairs"), 2);
}

#[test]
fn align_cases() {
    let dir = tempfile::tempdir().unwrap();
    let left = dir.path().join("pg.csv");
    let right = dir.path().join("catalog.csv");
    let out = dir.path().join("matches.csv");
    let volumes = vec![meta("pg1", 1813, true), meta("pg2", 1859, false)];
    write_metadata_csv(&left, &volumes);
    write_metadata_csv(&right, &volumes);
    let m = cmd_align(&left, &right, 0.8, &out).unwrap();
    assert_eq!(m.get("matched"), 2);
    let rows = read_csv(&out).1;
    assert!(rows.iter().all(|r| r[0] == r[1] && r[2] == "1" && r[3] == "1"));

    // "abcde" vs "abcdx" sits exactly at 0.8; a ten-character title with one
    // substitution sits at 0.9
    let mut pg = vec![meta("pg1", 1, true), meta("pg2", 1, true)];
    pg[0].title = "abcde".into();
    pg[1].title = "abcdefghij".into();
    let mut cat = vec![meta("c1", 1, true), meta("c2", 1, true)];
    cat[0].title = "abcdx".into();
    cat[1].title = "abcdefghix".into();
    write_metadata_csv(&left, &pg);
    write_metadata_csv(&right, &cat);
    let m = cmd_align(&left, &right, 0.8, &out).unwrap();
    assert_eq!((m.get("matched"), m.get("unmatched")), (1, 1));
    let rows = read_csv(&out).1;
    assert_eq!(rows[0], ["pg1", "", "", ""]);
    assert_eq!(rows[1][..3], ["pg2".to_string(), "c2".to_string(), "0.9".to_string()]);

    std::fs::write(&right, "id,name\n1,x\n").unwrap();
    assert!(matches!(
        cmd_align(&left, &right, 0.8, &out),
        Err(PipelineError::Data(narrative_net::io::DataError::Header { .. }))
    ));
}
