//! Plain-text polytope files.
//!
//! ```text
//! # refgov-polytope v1
//! dim 19
//! ordering grlex-desc:n=3:p=3
//! rows 296
//! g_1 g_2 ... g_d | rhs | tag
//! ```
//!
//! Numbers are written with 17 significant digits, which round-trips every `f64`.

use std::fmt::Write as _;
use std::io::{BufRead, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::moas::{Polytope, RowTag};

pub const HEADER: &str = "# refgov-polytope v1";

pub fn write_polytope<W: Write>(polytope: &Polytope, mut out: W) -> Result<()> {
    out.write_all(to_string(polytope).as_bytes())?;
    Ok(())
}

pub fn to_string(polytope: &Polytope) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{HEADER}");
    let _ = writeln!(s, "dim {}", polytope.dim());
    let _ = writeln!(s, "ordering {}", polytope.ordering());
    let _ = writeln!(s, "rows {}", polytope.len());
    for i in 0..polytope.len() {
        let coeffs: Vec<String> = polytope.row(i).iter().map(|v| format!("{v:.16e}")).collect();
        let _ = writeln!(s, "{} | {:.16e} | {}", coeffs.join(" "), polytope.rhs(i), polytope.tag(i));
    }
    s
}

pub fn save(polytope: &Polytope, path: &Path) -> Result<()> {
    std::fs::write(path, to_string(polytope))?;
    Ok(())
}

pub fn load(path: &Path) -> Result<Polytope> {
    let file = std::fs::File::open(path)?;
    read_polytope(std::io::BufReader::new(file))
}

pub fn read_polytope<R: BufRead>(input: R) -> Result<Polytope> {
    let mut lines = input.lines().enumerate();
    let mut next = |what: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((i, line)) => Ok((i + 1, line?)),
            None => Err(Error::Parse {
                line: 0,
                reason: format!("unexpected end of file, expected {what}"),
            }),
        }
    };
    let (_, head) = next("header")?;
    if head.trim() != HEADER {
        return Err(Error::Parse {
            line: 1,
            reason: format!("expected `{HEADER}`, found `{}`", head.trim()),
        });
    }
    let keyed = |(line, text): (usize, String), key: &str| -> Result<String> {
        text.trim()
            .strip_prefix(key)
            .and_then(|r| r.strip_prefix(' '))
            .map(|r| r.trim().to_string())
            .ok_or_else(|| Error::Parse {
                line,
                reason: format!("expected `{key} <value>`"),
            })
    };
    let parse_usize = |line: usize, s: &str| -> Result<usize> {
        s.parse().map_err(|_| Error::Parse {
            line,
            reason: format!("expected a non-negative integer, found `{s}`"),
        })
    };
    let l = next("dim")?;
    let n = l.0;
    let dim = parse_usize(n, &keyed(l, "dim")?)?;
    let ordering = keyed(next("ordering")?, "ordering")?;
    let l = next("rows")?;
    let n = l.0;
    let count = parse_usize(n, &keyed(l, "rows")?)?;

    let mut poly = Polytope::new(dim, ordering);
    for _ in 0..count {
        let (line, text) = next("a row")?;
        let err = |reason: String| Error::Parse { line, reason };
        let parts: Vec<&str> = text.split('|').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(err("expected `g_1 ... g_d | rhs | tag`".into()));
        }
        let coeffs = parts[0]
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|_| err(format!("bad number `{t}`"))))
            .collect::<Result<Vec<f64>>>()?;
        if coeffs.len() != dim {
            return Err(err(format!("expected {dim} coefficients, found {}", coeffs.len())));
        }
        let rhs: f64 = parts[1]
            .parse()
            .map_err(|_| err(format!("bad number `{}`", parts[1])))?;
        let tag: RowTag = parts[2].parse().map_err(err)?;
        poly.push_row(&coeffs, rhs, tag)?;
    }
    // Trailing blank lines are tolerated; anything else is not.
    for (i, line) in lines {
        if !line?.trim().is_empty() {
            return Err(Error::Parse {
                line: i + 1,
                reason: format!("more rows than the declared {count}"),
            });
        }
    }
    Ok(poly)
}
