//! Plain-text operator files.
//!
//! ```text
//! # comment lines start with '#'
//! dims 2 1
//! weights 0.25 0.5        (optional; defaults to 1/Σn for every block)
//! 1,0   0,-1
//! 0,1   -1,0
//! 3.5,0
//! ```
//!
//! After the header come the rows of each block in order, one row per line,
//! entries written `re,im` and separated by whitespace.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::algebra::{AlgebraDescriptor, Block, Operator};
use crate::dense::Matrix;
use crate::error::{Error, Result};

fn bad(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Structural(format!("line {line}: {msg}"))
}

fn parse_entry(tok: &str, line: usize) -> Result<Complex64> {
    let (re, im) = tok
        .split_once(',')
        .ok_or_else(|| bad(line, format!("entry `{tok}` is not of the form re,im")))?;
    let re: f64 = re.trim().parse().map_err(|_| bad(line, format!("bad real part in `{tok}`")))?;
    let im: f64 = im.trim().parse().map_err(|_| bad(line, format!("bad imaginary part in `{tok}`")))?;
    Ok(Complex64::new(re, im))
}

pub fn parse(text: &str) -> Result<Operator> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (ln, header) = lines.next().ok_or_else(|| Error::Structural("empty matrix file".into()))?;
    let dims: Vec<usize> = match header.strip_prefix("dims") {
        Some(rest) => rest
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| bad(ln, format!("bad dimension `{t}`"))))
            .collect::<Result<_>>()?,
        None => return Err(bad(ln, "expected a `dims` header")),
    };
    if dims.is_empty() {
        return Err(bad(ln, "no block dimensions given"));
    }

    let mut pending = None;
    let alg = match lines.next() {
        Some((ln, l)) if l.starts_with("weights") => {
            let weights: Vec<f64> = l["weights".len()..]
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| bad(ln, format!("bad weight `{t}`"))))
                .collect::<Result<_>>()?;
            if weights.len() != dims.len() {
                return Err(bad(ln, "one weight per block is required"));
            }
            AlgebraDescriptor::new(
                dims.iter()
                    .zip(&weights)
                    .map(|(&dim, &weight)| Block { dim, weight })
                    .collect(),
            )?
        }
        other => {
            pending = other;
            AlgebraDescriptor::uniform(&dims)?
        }
    };

    let mut rows = pending.into_iter().chain(lines);
    let mut blocks = Vec::with_capacity(dims.len());
    for &n in &dims {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            let (ln, row) = rows
                .next()
                .ok_or_else(|| Error::Structural(format!("file ends inside a {n}x{n} block")))?;
            let entries: Vec<Complex64> = row
                .split_whitespace()
                .map(|t| parse_entry(t, ln))
                .collect::<Result<_>>()?;
            if entries.len() != n {
                return Err(bad(ln, format!("expected {n} entries, found {}", entries.len())));
            }
            for (j, z) in entries.into_iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        blocks.push(m);
    }
    if let Some((ln, _)) = rows.next() {
        return Err(bad(ln, "trailing data after the last block"));
    }
    Operator::new(Arc::new(alg), blocks)
}

pub fn read(path: &Path) -> Result<Operator> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Structural(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

/// Writes `x` so that `parse(&format(x)) == x` bit for bit.
pub fn format(x: &Operator) -> String {
    let alg = x.algebra();
    let mut out = String::from("dims");
    for d in alg.dims() {
        let _ = write!(out, " {d}");
    }
    out.push_str("\nweights");
    for b in alg.blocks() {
        let _ = write!(out, " {:?}", b.weight);
    }
    out.push('\n');
    for m in x.blocks() {
        for i in 0..m.nrows() {
            let row: Vec<String> = (0..m.ncols())
                .map(|j| format!("{:?},{:?}", m[(i, j)].re, m[(i, j)].im))
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_documented_example() {
        let x = parse("# demo\ndims 2 1\nweights 0.25 0.5\n1,0 0,-1\n0,1 -1,0\n3.5,0\n").unwrap();
        assert_eq!(x.algebra().dims(), vec![2, 1]);
        assert_eq!(x.blocks()[0][(0, 1)], Complex64::new(0.0, -1.0));
        assert_eq!(x.blocks()[1][(0, 0)], Complex64::new(3.5, 0.0));
        assert!(x.is_self_adjoint());
    }

    #[test]
    fn default_weights_are_uniform() {
        let x = parse("dims 1 1\n1,0\n2,0\n").unwrap();
        assert_eq!(x.algebra().blocks()[0].weight, 0.5);
    }

    #[test]
    fn round_trip() {
        let alg = Arc::new(AlgebraDescriptor::from_pairs(&[(2, 0.3), (1, 0.4)]).unwrap());
        let x = Operator::from_fn(&alg, |k, i, j| Complex64::new(0.1 * (k + i) as f64, 1.0 / (3.0 + j as f64)));
        assert_eq!(parse(&format(&x)).unwrap(), x);
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(parse("").is_err());
        assert!(parse("2 2\n").is_err());
        assert!(parse("dims 2\n1,0 0,0\n").is_err());
        assert!(parse("dims 1\n1\n").is_err());
        assert!(parse("dims 1\n1,0\n2,0\n").is_err());
        assert!(parse("dims 1\nweights 0.5 0.5\n1,0\n").is_err());
        assert!(parse("dims 1\nweights 0.5\n1,0\n").is_err());
    }
}
