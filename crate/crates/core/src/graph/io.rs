//! Edge-list TSV files: optional "#p=<int>" header, "u<TAB>v" lines,
//! "#"-prefixed comments ignored. Masks use the same format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Network, ObservationMask};

fn parse_lines(path: &Path) -> Result<(Option<usize>, Vec<(usize, usize)>)> {
    let file = File::open(path)?;
    let reader = BufReader::new(file);
    let mut declared_p = None;
    let mut pairs = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(rest) = trimmed.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(value) = rest.strip_prefix("p=") {
                declared_p = Some(value.trim().parse::<usize>().map_err(|e| Error::Parse {
                    line: lineno,
                    msg: format!("bad node count header: {e}"),
                })?);
            }
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let u = parse_id(it.next(), lineno)?;
        let v = parse_id(it.next(), lineno)?;
        if it.next().is_some() {
            return Err(Error::Parse {
                line: lineno,
                msg: "expected exactly two node ids".into(),
            });
        }
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        pairs.push((u, v));
    }
    Ok((declared_p, pairs))
}

fn parse_id(token: Option<&str>, lineno: usize) -> Result<usize> {
    let token = token.ok_or_else(|| Error::Parse {
        line: lineno,
        msg: "missing node id".into(),
    })?;
    token.parse::<usize>().map_err(|e| Error::Parse {
        line: lineno,
        msg: format!("bad node id {token:?}: {e}"),
    })
}

fn implied_p(declared: Option<usize>, pairs: &[(usize, usize)]) -> Result<usize> {
    let max_id = pairs.iter().map(|&(u, v)| u.max(v)).max();
    match declared {
        Some(p) => {
            if let Some(m) = max_id {
                if m >= p {
                    return Err(Error::NodeOutOfRange { id: m, p });
                }
            }
            Ok(p)
        }
        None => match max_id {
            Some(m) => Ok(m + 1),
            None => Err(Error::Parse {
                line: 0,
                msg: "empty edge list with no #p= header".into(),
            }),
        },
    }
}

/// Loads a network from an edge-list file.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<Network> {
    let (declared, pairs) = parse_lines(path.as_ref())?;
    let p = implied_p(declared, &pairs)?;
    Network::new(p, pairs)
}

/// Loads an observation mask; same file format as networks.
pub fn load_mask(path: impl AsRef<Path>) -> Result<ObservationMask> {
    let (declared, pairs) = parse_lines(path.as_ref())?;
    let p = implied_p(declared, &pairs)?;
    ObservationMask::new(p, pairs)
}

/// Writes a network as edge-list TSV. `header` lines are emitted first as
/// "#"-comments, then "#p=<int>", then one "u<TAB>v" line per edge.
pub fn save_edge_list(net: &Network, path: impl AsRef<Path>, header: &[String]) -> Result<()> {
    write_pairs(net.p(), net.edges(), path, header)
}

/// Writes a mask in the same format as [`save_edge_list`].
pub fn save_mask(mask: &ObservationMask, path: impl AsRef<Path>, header: &[String]) -> Result<()> {
    write_pairs(mask.p(), mask.observed(), path, header)
}

fn write_pairs(
    p: usize,
    pairs: impl Iterator<Item = (usize, usize)>,
    path: impl AsRef<Path>,
    header: &[String],
) -> Result<()> {
    let file = File::create(path)?;
    let mut w = BufWriter::new(file);
    for line in header {
        writeln!(w, "# {line}")?;
    }
    writeln!(w, "#p={p}")?;
    for (u, v) in pairs {
        writeln!(w, "{u}\t{v}")?;
    }
    w.flush()?;
    Ok(())
}
