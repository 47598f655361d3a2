use std::io::{BufRead, Write};

use super::{parse_error, Fingerprint, IoError};
use crate::matrix::CirculationMatrix;

/// Writes `m` in triplet format, column by column, rows ascending. The
/// stored diagonal is always written, even when it is 0.
pub fn write_matrix<W: Write>(
    mut w: W,
    m: &CirculationMatrix,
    fingerprint: Option<&Fingerprint>,
) -> std::io::Result<()> {
    if let Some(fp) = fingerprint {
        writeln!(w, "{fp}")?;
    }
    writeln!(w, "cfm {} {}", m.n(), m.nnz())?;
    for (i, j, v) in m.entries() {
        writeln!(w, "{} {} {:?}", i + 1, j + 1, v)?;
    }
    w.flush()
}

/// Reads a triplet file and validates the matrix. A missing diagonal entry
/// is implied from the column's off-diagonal sum.
pub fn read_matrix<R: BufRead>(r: R) -> Result<CirculationMatrix, IoError> {
    let mut header: Option<(usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in r.lines().enumerate() {
        let lineno = idx + 1;
        let line = line?;
        let content = line.trim();
        if content.is_empty() || content.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let Some((n, nnz)) = header else {
            if fields.len() != 3 || fields[0] != "cfm" {
                return Err(parse_error(lineno, format!("expected \"cfm <n> <nnz>\", got {content:?}")));
            }
            let n: usize = fields[1]
                .parse()
                .map_err(|_| parse_error(lineno, format!("invalid dimension {:?}", fields[1])))?;
            let nnz: usize = fields[2]
                .parse()
                .map_err(|_| parse_error(lineno, format!("invalid entry count {:?}", fields[2])))?;
            header = Some((n, nnz));
            triplets.reserve(nnz.min(1 << 24));
            continue;
        };
        if fields.len() != 3 {
            return Err(parse_error(lineno, format!("expected \"i j f_ij\", got {content:?}")));
        }
        let index = |s: &str| -> Result<usize, IoError> {
            let v: usize = s
                .parse()
                .map_err(|_| parse_error(lineno, format!("invalid index {s:?}")))?;
            if v == 0 || v > n {
                return Err(parse_error(lineno, format!("index {v} outside 1..={n}")));
            }
            Ok(v - 1)
        };
        let i = index(fields[0])?;
        let j = index(fields[1])?;
        let f: f64 = fields[2]
            .parse()
            .map_err(|_| parse_error(lineno, format!("invalid value {:?}", fields[2])))?;
        if triplets.len() == nnz {
            return Err(parse_error(lineno, format!("more than the {nnz} entries announced")));
        }
        triplets.push((i, j, f));
    }
    let Some((n, nnz)) = header else {
        return Err(parse_error(0, "missing \"cfm <n> <nnz>\" header"));
    };
    if triplets.len() != nnz {
        return Err(parse_error(
            0,
            format!("header announces {nnz} entries, found {}", triplets.len()),
        ));
    }
    Ok(CirculationMatrix::checked_from_triplets(n, triplets)?)
}
