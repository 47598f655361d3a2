use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use super::{GeneratorError, TopologySpec};

/// Reads a trade network for `n` agents from a file.
///
/// One `i j` pair per line, 1-based, meaning agent `j` may buy from agent
/// `i` (entry `f_ij` may be nonzero). Blank lines and lines starting with
/// `#` are skipped. Duplicate pairs are merged; self-loops are rejected.
pub fn load_edge_list(path: &Path, n: usize) -> Result<TopologySpec, GeneratorError> {
    let file = File::open(path).map_err(|source| GeneratorError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_edge_list(BufReader::new(file), n, path)
}

/// [`load_edge_list`] over any reader; `origin` only labels errors.
pub fn parse_edge_list<R: BufRead>(
    reader: R,
    n: usize,
    origin: &Path,
) -> Result<TopologySpec, GeneratorError> {
    let err = |line: usize, message: String| GeneratorError::EdgeList {
        path: PathBuf::from(origin),
        line,
        message,
    };
    let mut edges = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| GeneratorError::Io {
            path: origin.to_path_buf(),
            source,
        })?;
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        if fields.len() != 2 {
            return Err(err(lineno, format!("expected two agent indices, got {content:?}")));
        }
        let parse = |s: &str| -> Result<usize, GeneratorError> {
            let v: usize = s
                .parse()
                .map_err(|_| err(lineno, format!("invalid agent index {s:?}")))?;
            if v == 0 || v > n {
                return Err(err(lineno, format!("agent {v} outside 1..={n}")));
            }
            Ok(v - 1)
        };
        let i = parse(fields[0])?;
        let j = parse(fields[1])?;
        if i == j {
            return Err(err(lineno, format!("self-loop at line {lineno}")));
        }
        edges.push((i, j));
    }
    TopologySpec::from_edges(n, edges)
}
