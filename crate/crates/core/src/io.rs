//! File formats: JSONL networks and the CSV tables read or written by the
//! pipeline commands.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::alignment::VolumeMetadata;
use crate::taxonomy::{parse_json_record, CharacterNetwork};

#[derive(Debug, thiserror::Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Csv { path: PathBuf, source: csv::Error },
    #[error("{path}: missing CSV column(s) {missing:?}; found {found:?}")]
    Header {
        path: PathBuf,
        missing: Vec<String>,
        found: Vec<String>,
    },
    #[error("{path}, line {line}: {message}")]
    Row {
        path: PathBuf,
        line: u64,
        message: String,
    },
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> DataError + '_ {
    move |source| DataError::Csv {
        path: path.to_path_buf(),
        source,
    }
}

/// A JSONL line that could not be read as a network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BadLine {
    pub line: usize,
    pub message: String,
}

/// Networks read from JSONL plus what was skipped on the way.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct NetworkFile {
    pub networks: Vec<CharacterNetwork>,
    pub bad_lines: Vec<BadLine>,
    /// Records inside otherwise valid lines that failed schema validation.
    pub malformed_records_dropped: usize,
    /// Non-blank lines seen.
    pub lines: usize,
}

/// Parses one JSONL line. Invalid records are dropped and counted; labels
/// are kept as written (no repair).
pub fn parse_network_line(line: &str) -> Result<(CharacterNetwork, usize), String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("invalid JSON: {e}"))?;
    let obj = value.as_object().ok_or("line is not a JSON object")?;
    let volume_id = obj
        .get("volume_id")
        .and_then(Value::as_str)
        .ok_or("missing string field `volume_id`")?;
    let raw_records = obj
        .get("records")
        .and_then(Value::as_array)
        .ok_or("missing array field `records`")?;
    let mut records = Vec::with_capacity(raw_records.len());
    let mut dropped = 0;
    for raw in raw_records {
        match parse_json_record(raw) {
            Ok(r) => records.push(r),
            Err(_) => dropped += 1,
        }
    }
    Ok((CharacterNetwork::new(volume_id, records), dropped))
}

pub fn parse_networks<R: BufRead>(reader: R) -> std::io::Result<NetworkFile> {
    let mut out = NetworkFile::default();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.lines += 1;
        match parse_network_line(&line) {
            Ok((net, dropped)) => {
                out.malformed_records_dropped += dropped;
                out.networks.push(net);
            }
            Err(message) => out.bad_lines.push(BadLine {
                line: i + 1,
                message,
            }),
        }
    }
    Ok(out)
}

pub fn read_networks(path: &Path) -> Result<NetworkFile, DataError> {
    let file = File::open(path).map_err(io_err(path))?;
    parse_networks(BufReader::new(file)).map_err(io_err(path))
}

/// One compact JSON object per line, fields in schema order.
pub fn write_networks_to<W: Write>(nets: &[CharacterNetwork], mut out: W) -> std::io::Result<()> {
    for net in nets {
        serde_json::to_writer(&mut out, net)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_networks(path: &Path, nets: &[CharacterNetwork]) -> Result<(), DataError> {
    let file = File::create(path).map_err(io_err(path))?;
    write_networks_to(nets, BufWriter::new(file)).map_err(io_err(path))
}

/// Opens a CSV file and checks that every `required` column is present.
/// Returns the reader and the column index of each required name.
fn open_csv(path: &Path, required: &[&str]) -> Result<(csv::Reader<File>, Vec<usize>), DataError> {
    let file = File::open(path).map_err(io_err(path))?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(file);
    let headers: Vec<String> = reader
        .headers()
        .map_err(csv_err(path))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut index = Vec::new();
    let mut missing = Vec::new();
    for name in required {
        match headers.iter().position(|h| h == name) {
            Some(i) => index.push(i),
            None => missing.push(name.to_string()),
        }
    }
    if !missing.is_empty() {
        return Err(DataError::Header {
            path: path.to_path_buf(),
            missing,
            found: headers,
        });
    }
    Ok((reader, index))
}

fn parse_flag(raw: &str) -> Result<Option<bool>, String> {
    match raw.to_ascii_lowercase().as_str() {
        "" => Ok(None),
        "true" | "1" | "yes" | "y" | "t" => Ok(Some(true)),
        "false" | "0" | "no" | "n" | "f" => Ok(Some(false)),
        other => Err(format!("is_fiction `{other}` is not a boolean")),
    }
}

pub const METADATA_COLUMNS: [&str; 6] =
    ["volume_id", "title", "author", "language", "year", "is_fiction"];

/// Reads a metadata/catalog CSV with columns
/// `volume_id,title,author,language,year,is_fiction`. Empty `year` and
/// `is_fiction` cells read as absent.
pub fn read_metadata(path: &Path) -> Result<Vec<VolumeMetadata>, DataError> {
    let (mut reader, idx) = open_csv(path, &METADATA_COLUMNS)?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err(path))?;
        let line = row.position().map_or(0, |p| p.line());
        let cell = |i: usize| row.get(idx[i]).unwrap_or("");
        let bad = |message: String| DataError::Row {
            path: path.to_path_buf(),
            line,
            message,
        };
        let year = match cell(4) {
            "" => None,
            y => Some(y.parse::<i32>().map_err(|_| bad(format!("year `{y}` is not an integer")))?),
        };
        out.push(VolumeMetadata {
            volume_id: cell(0).to_string(),
            title: cell(1).to_string(),
            author: cell(2).to_string(),
            language: cell(3).to_string(),
            year,
            is_fiction: parse_flag(cell(5)).map_err(bad)?,
        });
    }
    Ok(out)
}

/// Reads a corpus manifest CSV `volume_id,path`. Relative paths resolve
/// against the manifest's directory.
pub fn read_corpus_manifest(path: &Path) -> Result<Vec<(String, PathBuf)>, DataError> {
    let (mut reader, idx) = open_csv(path, &["volume_id", "path"])?;
    let base = path.parent().unwrap_or(Path::new(""));
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row.map_err(csv_err(path))?;
        let file = PathBuf::from(row.get(idx[1]).unwrap_or(""));
        let file = if file.is_relative() { base.join(file) } else { file };
        out.push((row.get(idx[0]).unwrap_or("").to_string(), file));
    }
    Ok(out)
}

/// Writes a CSV with a fixed header and string rows.
pub fn write_table<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), DataError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut writer = csv::Writer::from_path(path).map_err(csv_err(path))?;
    writer.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        writer.write_record(row).map_err(csv_err(path))?;
    }
    writer.flush().map_err(io_err(path))
}

/// Empty cell for absent values, shortest round-trip decimal otherwise.
pub fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taxonomy::{Affinity, FineCategory, RelationshipRecord};

    #[test]
    fn jsonl_round_trip() {
        let nets = vec![
            CharacterNetwork::new(
                "v1",
                vec![RelationshipRecord::new("A", "B", Affinity::Positive, FineCategory::Friend)],
            ),
            CharacterNetwork::new("v2", vec![]),
        ];
        let mut buf = Vec::new();
        write_networks_to(&nets, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(
            r#"{"volume_id":"v1","records":[{"character_1":"A","character_2":"B","affinity":"positive","coarse_category":"social","fine_category":"friend"}]}"#
        ));
        let back = parse_networks(&buf[..]).unwrap();
        assert_eq!(back.networks, nets);
        assert_eq!(back.lines, 2);
    }

    #[test]
    fn bad_lines_and_records_counted() {
        let text = concat!(
            "{\"volume_id\":\"v1\",\"records\":[",
            "{\"character_1\":\"A\",\"character_2\":\"B\",\"affinity\":\"positive\",\"coarse_category\":\"familial\",\"fine_category\":\"friend\"},",
            "{\"character_1\":\"A\",\"character_2\":\"C\",\"affinity\":\"happy\",\"coarse_category\":\"social\",\"fine_category\":\"friend\"}]}\n",
            "\n",
            "not json\n",
            "{\"records\":[]}\n",
        );
        let f = parse_networks(text.as_bytes()).unwrap();
        assert_eq!(f.networks.len(), 1);
        assert_eq!(f.malformed_records_dropped, 1);
        assert_eq!(f.lines, 3);
        assert_eq!(f.bad_lines.iter().map(|b| b.line).collect::<Vec<_>>(), vec![3, 4]);
        // inconsistent coarse label survives reading unrepaired
        assert!(!f.networks[0].records[0].is_consistent());
    }

    #[test]
    fn metadata_csv() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("meta.csv");
        std::fs::write(
            &path,
            "volume_id,title,author,language,year,is_fiction,extra\n\
             pg1,\"Emma, a novel\",Jane Austen,en,1815,true,x\n\
             pg2,Essays,Anon,en,,,y\n",
        )
        .unwrap();
        let rows = read_metadata(&path).unwrap();
        assert_eq!(rows[0].title, "Emma, a novel");
        assert_eq!(rows[0].year, Some(1815));
        assert_eq!(rows[0].is_fiction, Some(true));
        assert_eq!((rows[1].year, rows[1].is_fiction), (None, None));

        std::fs::write(&path, "id,title\npg1,Emma\n").unwrap();
        match read_metadata(&path) {
            Err(DataError::Header { missing, .. }) => assert!(missing.contains(&"author".to_string())),
            other => panic!("expected header error, got {other:?}"),
        }
        std::fs::write(&path, "volume_id,title,author,language,year,is_fiction\np,t,a,en,later,true\n").unwrap();
        assert!(matches!(read_metadata(&path), Err(DataError::Row { line: 2, .. })));
    }

    #[test]
    fn corpus_manifest_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.csv");
        std::fs::write(&path, "volume_id,path\nv1,texts/v1.txt\nv2,/abs/v2.txt\n").unwrap();
        let rows = read_corpus_manifest(&path).unwrap();
        assert_eq!(rows[0], ("v1".into(), dir.path().join("texts/v1.txt")));
        assert_eq!(rows[1].1, PathBuf::from("/abs/v2.txt"));
    }

    #[test]
    fn optional_cells() {
        assert_eq!(fmt_opt(None), "");
        assert_eq!(fmt_opt(Some(0.5)), "0.5");
        assert_eq!(fmt_opt(Some(1.0)), "1");
    }
}
