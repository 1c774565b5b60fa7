#![allow(dead_code)]

use std::path::{Path, PathBuf};

use narrative_net::alignment::VolumeMetadata;
use narrative_net::taxonomy::{Affinity, CharacterNetwork, FineCategory, RelationshipRecord};

pub fn e2e_fixture() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures/e2e")
}

/// A network with planted structure: `nodes` characters split into
/// `components` chains, each chain of three or more optionally closed into
/// a triangle at its head.
#[derive(Debug, Clone)]
pub struct Planted {
    pub network: CharacterNetwork,
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub components: usize,
}

pub fn planted(id: &str, nodes: usize, components: usize, triangles: bool) -> Planted {
    assert!(components >= 1 && nodes >= 2 * components);
    let fine = [
        FineCategory::Friend,
        FineCategory::Colleague,
        FineCategory::Brother,
        FineCategory::Enemy,
        FineCategory::Teacher,
    ];
    let aff = [Affinity::Positive, Affinity::Neutral, Affinity::Negative];
    let mut edges = Vec::new();
    let base = nodes / components;
    let mut start = 0;
    for c in 0..components {
        let len = if c + 1 == components { nodes - start } else { base };
        for k in start..start + len - 1 {
            edges.push((k, k + 1));
        }
        if triangles && len >= 3 {
            edges.push((start, start + 2));
        }
        start += len;
    }
    let records = edges
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| {
            RelationshipRecord::new(
                format!("{id} person {a:03}"),
                format!("{id} person {b:03}"),
                aff[i % aff.len()],
                fine[i % fine.len()],
            )
        })
        .collect();
    Planted {
        network: CharacterNetwork::new(id, records),
        nodes,
        edges,
        components,
    }
}

/// Closed-triplet ratio by enumerating every vertex triple.
pub fn brute_transitivity(n: usize, edges: &[(usize, usize)]) -> f64 {
    let mut adj = vec![vec![false; n]; n];
    for &(a, b) in edges {
        adj[a][b] = true;
        adj[b][a] = true;
    }
    let (mut closed, mut connected) = (0usize, 0usize);
    for center in 0..n {
        for a in 0..n {
            for b in a + 1..n {
                if a != center && b != center && adj[center][a] && adj[center][b] {
                    connected += 1;
                    if adj[a][b] {
                        closed += 1;
                    }
                }
            }
        }
    }
    if connected == 0 {
        0.0
    } else {
        closed as f64 / connected as f64
    }
}

pub fn meta(id: &str, year: i32, fiction: bool) -> VolumeMetadata {
    VolumeMetadata {
        volume_id: id.into(),
        title: format!("Title of {id}"),
        author: "Author".into(),
        language: "en".into(),
        year: Some(year),
        is_fiction: Some(fiction),
    }
}

pub fn write_metadata_csv(path: &Path, rows: &[VolumeMetadata]) {
    let mut text = String::from("volume_id,title,author,language,year,is_fiction\n");
    for r in rows {
        text.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.volume_id,
            r.title,
            r.author,
            r.language,
            r.year.map(|y| y.to_string()).unwrap_or_default(),
            r.is_fiction.map(|f| f.to_string()).unwrap_or_default()
        ));
    }
    std::fs::write(path, text).unwrap();
}

/// Parses a CSV into header + rows of strings.
pub fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|row| row.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

pub fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}
