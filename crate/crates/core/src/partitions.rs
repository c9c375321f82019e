//! Integer partitions in multiplicity-vector form and their text cache.
//!
//! A partition of `n` is stored as `[ν₁, …, νₙ]` where `ν_j` counts the parts
//! equal to `j`, so `Σ j·ν_j = n`. Rows for each `n` are kept in ascending
//! lexicographic order, which makes the cache file byte-stable.
//!
//! Cache format:
//!
//! ```text
//! partitions v1 n_cap=3
//! 1: 1
//! 2: 0 1
//! 2: 2 0
//! 3: 0 0 1
//! 3: 1 1 0
//! 3: 3 0 0
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

/// Default enumeration depth, enough for μ up to 16/3 at the standard truncation.
pub const DEFAULT_N_CAP: usize = 32;

const HEADER_PREFIX: &str = "partitions v1 n_cap=";

/// Multiplicities `nu[j-1]` = number of parts equal to `j`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PartitionVector(Vec<u32>);

impl PartitionVector {
    pub fn new(nu: Vec<u32>) -> Self {
        PartitionVector(nu)
    }

    pub fn multiplicities(&self) -> &[u32] {
        &self.0
    }

    /// Σ j·ν_j.
    pub fn weight(&self) -> usize {
        self.0
            .iter()
            .enumerate()
            .map(|(i, &nu)| (i + 1) * nu as usize)
            .sum()
    }

    /// Iterator over `(j, ν_j)` with `j` starting at 1, skipping zero multiplicities.
    pub fn parts(&self) -> impl Iterator<Item = (usize, u32)> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &nu)| nu > 0)
            .map(|(i, &nu)| (i + 1, nu))
    }
}

/// All partitions of every `n` in `1..=n_cap`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionTable {
    n_cap: usize,
    per_n: Vec<Vec<PartitionVector>>,
}

impl PartitionTable {
    pub fn n_cap(&self) -> usize {
        self.n_cap
    }

    /// Partitions of `n`, or an empty slice for `n = 0` or `n > n_cap`.
    pub fn of(&self, n: usize) -> &[PartitionVector] {
        if n == 0 || n > self.n_cap {
            return &[];
        }
        &self.per_n[n - 1]
    }

    /// Total number of stored rows across all `n`.
    pub fn total_rows(&self) -> usize {
        self.per_n.iter().map(Vec::len).sum()
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{HEADER_PREFIX}{}\n", self.n_cap);
        for (idx, rows) in self.per_n.iter().enumerate() {
            let n = idx + 1;
            for row in rows {
                write!(out, "{n}:").unwrap();
                for nu in row.multiplicities() {
                    write!(out, " {nu}").unwrap();
                }
                out.push('\n');
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.split_inclusive('\n').enumerate();
        let (_, header) = lines.next().ok_or_else(|| Error::Parse {
            line: 1,
            message: "empty partition cache".into(),
        })?;
        let header = header.strip_suffix('\n').ok_or_else(|| Error::Parse {
            line: 1,
            message: "missing trailing newline".into(),
        })?;
        let n_cap: usize = header
            .strip_prefix(HEADER_PREFIX)
            .and_then(|s| s.parse().ok())
            .filter(|&n| n >= 1)
            .ok_or_else(|| Error::Parse {
                line: 1,
                message: format!("expected header `{HEADER_PREFIX}<N>`, found `{header}`"),
            })?;

        let mut per_n: Vec<Vec<PartitionVector>> = vec![Vec::new(); n_cap];
        let mut last_n = 0usize;
        let mut last_line = 1usize;
        for (idx, raw) in lines {
            let line_no = idx + 1;
            last_line = line_no;
            let line = raw.strip_suffix('\n').ok_or_else(|| Error::Parse {
                line: line_no,
                message: "missing trailing newline".into(),
            })?;
            let (n_str, rest) = line.split_once(':').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected `<n>: nu1 ... nun`, found `{line}`"),
            })?;
            let n: usize = n_str.trim().parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("bad partition size `{n_str}`"),
            })?;
            let nu = rest
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<u32>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("bad multiplicity `{tok}`"),
                    })
                })
                .collect::<Result<Vec<u32>>>()?;

            let invalid = |message: String| Error::Validation {
                line: line_no,
                message,
            };
            if n == 0 || n > n_cap {
                return Err(invalid(format!("n = {n} outside 1..={n_cap}")));
            }
            if n < last_n {
                return Err(invalid(format!("n = {n} after n = {last_n}")));
            }
            if nu.len() != n {
                return Err(invalid(format!("row for n = {n} has {} entries", nu.len())));
            }
            let row = PartitionVector::new(nu);
            if row.weight() != n {
                return Err(invalid(format!(
                    "row sums to {} but belongs to n = {n}",
                    row.weight()
                )));
            }
            let bucket = &mut per_n[n - 1];
            if let Some(prev) = bucket.last() {
                if *prev >= row {
                    return Err(invalid(format!(
                        "rows for n = {n} not in strictly ascending order"
                    )));
                }
            }
            bucket.push(row);
            last_n = n;
        }

        for (idx, rows) in per_n.iter().enumerate() {
            let n = idx + 1;
            let expected = partition_count(n);
            if rows.len() as u64 != expected {
                return Err(Error::Validation {
                    line: last_line,
                    message: format!("n = {n} has {} rows, expected {expected}", rows.len()),
                });
            }
        }
        Ok(PartitionTable { n_cap, per_n })
    }
}

/// Enumerate all partitions of `1..=n_cap` in ascending lexicographic row order.
pub fn enumerate_partitions(n_cap: usize) -> PartitionTable {
    assert!(n_cap >= 1, "n_cap must be at least 1");
    let per_n = (1..=n_cap)
        .map(|n| {
            let mut rows = Vec::new();
            let mut nu = vec![0u32; n];
            fill(n, 1, n, &mut nu, &mut rows);
            rows
        })
        .collect();
    PartitionTable { n_cap, per_n }
}

// Chooses nu[j-1] in ascending order so rows come out lexicographically sorted.
// `rest` must still be expressible with parts >= j.
fn fill(n: usize, j: usize, rest: usize, nu: &mut [u32], out: &mut Vec<PartitionVector>) {
    if j == n {
        // only the single part n can remain
        nu[j - 1] = u32::from(rest == n);
        out.push(PartitionVector::new(nu.to_vec()));
        nu[j - 1] = 0;
        return;
    }
    for count in 0..=rest / j {
        let left = rest - count * j;
        // parts larger than j can only make up 0 or something > j
        if left != 0 && left <= j {
            continue;
        }
        nu[j - 1] = count as u32;
        if left == 0 {
            out.push(PartitionVector::new(nu.to_vec()));
        } else {
            fill(n, j + 1, left, nu, out);
        }
    }
    nu[j - 1] = 0;
}

/// p(n) by the standard coin-change recurrence over part sizes.
pub fn partition_count(n: usize) -> u64 {
    let mut ways = vec![0u64; n + 1];
    ways[0] = 1;
    for part in 1..=n {
        for total in part..=n {
            ways[total] += ways[total - part];
        }
    }
    ways[n]
}

pub fn save_partitions(table: &PartitionTable, path: &Path) -> Result<()> {
    fs::write(path, table.to_text()).map_err(|e| Error::io(path, e))
}

pub fn load_partitions(path: &Path) -> Result<PartitionTable> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    PartitionTable::from_text(&text)
}
