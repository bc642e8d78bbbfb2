//! String-labeled edge lists. Real interaction data names nodes (protein
//! identifiers); the solver core is purely numeric, so labeled inputs are
//! mapped to dense 0-based ids in first-appearance order and the mapping is
//! written next to the command's output artifact.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};

use netprior::error::{Error, Result};
use netprior::{Network, ObservationMask};

/// Accumulates label -> id assignments across the files of one invocation.
#[derive(Debug, Default)]
pub struct LabelSpace {
    ids: HashMap<String, usize>,
    labels: Vec<String>,
}

impl LabelSpace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Loads a previously written "label<TAB>id" mapping file.
    pub fn from_file(path: &str) -> Result<Self> {
        let mut space = Self::new();
        let reader = BufReader::new(File::open(path)?);
        let mut pairs = Vec::new();
        for (idx, line) in reader.lines().enumerate() {
            let line = line?;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let mut it = trimmed.split_whitespace();
            let (label, id) = match (it.next(), it.next()) {
                (Some(l), Some(i)) => (l, i),
                _ => {
                    return Err(Error::Parse {
                        line: idx + 1,
                        msg: "expected label and id".into(),
                    })
                }
            };
            let id: usize = id.parse().map_err(|e| Error::Parse {
                line: idx + 1,
                msg: format!("bad id {id:?}: {e}"),
            })?;
            pairs.push((label.to_string(), id));
        }
        pairs.sort_by_key(|&(_, id)| id);
        for (expected, (label, id)) in pairs.into_iter().enumerate() {
            if id != expected {
                return Err(Error::InvalidParam(format!(
                    "id map is not dense: expected id {expected}, found {id}"
                )));
            }
            space.intern(&label);
        }
        Ok(space)
    }

    fn intern(&mut self, label: &str) -> usize {
        if let Some(&id) = self.ids.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.ids.insert(label.to_string(), id);
        self.labels.push(label.to_string());
        id
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn write(&self, path: &str, header_lines: &[String]) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for line in header_lines {
            writeln!(w, "# {line}")?;
        }
        for (id, label) in self.labels.iter().enumerate() {
            writeln!(w, "{label}\t{id}")?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Raw pairs plus whether any endpoint required a label mapping.
pub struct LoadedEdges {
    pub pairs: Vec<(usize, usize)>,
    pub declared_p: Option<usize>,
    pub labeled: bool,
}

/// Reads an edge list that may use either dense integer ids or string
/// labels. A file is treated as labeled as soon as one endpoint fails to
/// parse as an integer; labels are interned into `space` in file order.
/// The "#p=" header only applies to purely numeric files.
pub fn load_edges_flexible(path: &str, space: &mut LabelSpace) -> Result<LoadedEdges> {
    let reader = BufReader::new(File::open(path)?);
    let mut declared_p = None;
    let mut raw: Vec<(String, String)> = Vec::new();
    let mut labeled = false;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            if let Some(value) = rest.trim().strip_prefix("p=") {
                declared_p = Some(value.trim().parse::<usize>().map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("bad node count header: {e}"),
                })?);
            }
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let (u, v) = match (it.next(), it.next()) {
            (Some(u), Some(v)) => (u, v),
            _ => {
                return Err(Error::Parse {
                    line: lineno,
                    msg: "expected two node tokens".into(),
                })
            }
        };
        if it.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                msg: "expected exactly two node tokens".into(),
            });
        }
        labeled |= u.parse::<usize>().is_err() || v.parse::<usize>().is_err();
        raw.push((u.to_string(), v.to_string()));
    }

    let pairs = if labeled {
        raw.iter()
            .map(|(u, v)| (space.intern(u), space.intern(v)))
            .collect()
    } else {
        raw.iter()
            .map(|(u, v)| (u.parse::<usize>().unwrap(), v.parse::<usize>().unwrap()))
            .collect()
    };
    Ok(LoadedEdges {
        pairs,
        declared_p: if labeled { None } else { declared_p },
        labeled,
    })
}

fn implied_p(loaded: &LoadedEdges, space: &LabelSpace) -> Result<usize> {
    if loaded.labeled || !space.is_empty() {
        return Ok(space.len().max(
            loaded
                .pairs
                .iter()
                .map(|&(u, v)| u.max(v) + 1)
                .max()
                .unwrap_or(0),
        ));
    }
    let max_id = loaded.pairs.iter().map(|&(u, v)| u.max(v)).max();
    match (loaded.declared_p, max_id) {
        (Some(p), _) => Ok(p),
        (None, Some(m)) => Ok(m + 1),
        (None, None) => Err(Error::Parse {
            line: 0,
            msg: "empty edge list with no #p= header".into(),
        }),
    }
}

/// Loads a network, interning labels when present.
pub fn load_network_flexible(path: &str, space: &mut LabelSpace) -> Result<Network> {
    let loaded = load_edges_flexible(path, space)?;
    let p = implied_p(&loaded, space)?;
    Network::new(p, loaded.pairs)
}

/// Loads an observation mask, interning labels when present.
pub fn load_mask_flexible(path: &str, space: &mut LabelSpace) -> Result<ObservationMask> {
    let loaded = load_edges_flexible(path, space)?;
    let p = implied_p(&loaded, space)?;
    ObservationMask::new(p, loaded.pairs)
}

/// Writes the mapping next to an artifact when labels were used; returns
/// the mapping path.
pub fn write_idmap_if_labeled(
    space: &LabelSpace,
    artifact_path: &str,
    header_lines: &[String],
) -> Result<Option<String>> {
    if space.is_empty() {
        return Ok(None);
    }
    let path = format!("{artifact_path}.idmap");
    space.write(&path, header_lines)?;
    Ok(Some(path))
}
