//! Flow and trace CSV files.
//!
//! Flow files have the header `path_id,type,flow`. Types are `theta1` and
//! `theta2`, or any alias declared in the game's `types` line or in a
//! `# types car=theta1,truck=theta2` comment at the top of the file.
//! Missing rows are zero flow.

use std::collections::BTreeMap;
use std::io::Write;

use hetroute_core::equilibrium::TraceRow;
use hetroute_core::{FlowVector, PathId, UserType};
use serde::{Deserialize, Serialize};

use crate::error::ParseError;

#[derive(Debug, Serialize, Deserialize)]
struct FlowRow {
    path_id: usize,
    #[serde(rename = "type")]
    user_type: String,
    flow: f64,
}

/// Type names accepted for each user type.
#[derive(Debug, Clone, Default)]
pub struct TypeAliases(BTreeMap<String, UserType>);

impl TypeAliases {
    pub fn new(type_names: Option<&[String; 2]>) -> Self {
        let mut map = BTreeMap::new();
        for t in UserType::ALL {
            map.insert(t.name().to_string(), t);
        }
        if let Some(names) = type_names {
            for t in UserType::ALL {
                map.insert(names[t.index()].clone(), t);
            }
        }
        TypeAliases(map)
    }

    fn resolve(&self, name: &str) -> Option<UserType> {
        self.0.get(name).copied()
    }

    /// Reads `name=theta1,name=theta2` pairs.
    fn extend_from(&mut self, list: &str, line: usize) -> Result<(), ParseError> {
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (alias, canonical) = item.split_once('=').ok_or_else(|| ParseError {
                line,
                field: Some("types".into()),
                message: format!("expected alias=theta1 or alias=theta2, found `{item}`"),
            })?;
            let t = UserType::ALL
                .into_iter()
                .find(|t| t.name() == canonical.trim())
                .ok_or_else(|| ParseError {
                    line,
                    field: Some("types".into()),
                    message: format!("`{canonical}` is not theta1 or theta2"),
                })?;
            self.0.insert(alias.trim().to_string(), t);
        }
        Ok(())
    }
}

/// Parses a flow file for a game with `num_paths` paths.
pub fn read_flows(text: &str, num_paths: usize, aliases: &TypeAliases) -> Result<FlowVector, ParseError> {
    let mut aliases = aliases.clone();
    for (i, line) in text.lines().enumerate() {
        let Some(comment) = line.trim().strip_prefix('#') else {
            if line.trim().is_empty() {
                continue;
            }
            break;
        };
        if let Some(list) = comment.trim().strip_prefix("types") {
            aliases.extend_from(list.trim(), i + 1)?;
        }
    }

    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header_ok = reader
        .headers()
        .map(|h| h.iter().eq(["path_id", "type", "flow"]))
        .unwrap_or(false);
    if !header_ok {
        return Err(ParseError {
            line: 1,
            field: None,
            message: "expected header `path_id,type,flow`".into(),
        });
    }

    let mut flows = FlowVector::zeros(num_paths);
    let mut seen = vec![[false; 2]; num_paths];
    for record in reader.records() {
        let record = record.map_err(|e| ParseError {
            line: e.position().map_or(0, |p| p.line() as usize),
            field: None,
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        let row: FlowRow = record.deserialize(None).map_err(|e| ParseError {
            line,
            field: match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err
                    .field()
                    .and_then(|i| ["path_id", "type", "flow"].get(i as usize))
                    .map(|s| s.to_string()),
                _ => None,
            },
            message: e.to_string(),
        })?;
        let err = |field: &str, message: String| ParseError {
            line,
            field: Some(field.into()),
            message,
        };
        if row.path_id >= num_paths {
            return Err(err("path_id", format!("no path {} (game has {num_paths})", row.path_id)));
        }
        let t = aliases
            .resolve(&row.user_type)
            .ok_or_else(|| err("type", format!("unknown type `{}`", row.user_type)))?;
        if !row.flow.is_finite() {
            return Err(err("flow", "flow must be finite".into()));
        }
        let slot = &mut seen[row.path_id][t.index()];
        if *slot {
            return Err(err("path_id", format!("duplicate row for path {} {t}", row.path_id)));
        }
        *slot = true;
        flows.set(PathId(row.path_id), t, row.flow);
    }
    Ok(flows)
}

/// Writes every path and type, using the game's type names when it has them.
pub fn write_flows<W: Write>(out: W, flows: &FlowVector, type_names: Option<&[String; 2]>) -> std::io::Result<()> {
    let mut out = out;
    if let Some([a, b]) = type_names {
        writeln!(out, "# types {a}=theta1,{b}=theta2")?;
    }
    let mut writer = csv::Writer::from_writer(out);
    for (p, row) in flows.as_slice().iter().enumerate() {
        for t in UserType::ALL {
            let name = type_names.map_or(t.name(), |n| n[t.index()].as_str());
            writer.serialize(FlowRow {
                path_id: p,
                user_type: name.to_string(),
                flow: row[t.index()],
            })?;
        }
    }
    writer.flush()
}

#[derive(Serialize)]
struct TraceCsvRow {
    iter: usize,
    #[serde(rename = "V")]
    value: f64,
    gap: f64,
}

/// `iter,V,gap`, one row per iteration.
pub fn write_trace<W: Write>(out: W, trace: &[TraceRow]) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for r in trace {
        writer.serialize(TraceCsvRow {
            iter: r.iter,
            value: r.value,
            gap: r.gap,
        })?;
    }
    writer.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn aliases_from_comment_and_missing_rows() {
        let text = "# types car=theta1,truck=theta2\npath_id,type,flow\n0,car,1.5\n1,truck,2\n";
        let f = read_flows(text, 3, &TypeAliases::new(None)).unwrap();
        assert_eq!(f.as_slice(), &[[1.5, 0.0], [0.0, 2.0], [0.0, 0.0]]);
    }

    #[test]
    fn duplicate_row_is_an_error() {
        let text = "path_id,type,flow\n0,theta1,1\n0,theta1,2\n";
        let err = read_flows(text, 1, &TypeAliases::new(None)).unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn write_then_read() {
        let flows = FlowVector::from_vec(vec![[0.1, 0.2], [3.0, 0.0]]);
        let names = ["car".to_string(), "truck".to_string()];
        let mut buf = Vec::new();
        write_flows(&mut buf, &flows, Some(&names)).unwrap();
        let back = read_flows(std::str::from_utf8(&buf).unwrap(), 2, &TypeAliases::new(None)).unwrap();
        assert_eq!(back, flows);
    }
}
