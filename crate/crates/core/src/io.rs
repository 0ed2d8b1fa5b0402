//! Dense matrix text format: the size n on the first line, then n lines of
//! n space-separated 0/1 tokens.

use crate::instance::Instance;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ParseError {
    #[error("line 1: expected a positive matrix size, found {found:?}")]
    BadHeader { found: String },
    #[error("line {line}: expected {expected} rows, input ends after {got}")]
    MissingRows {
        line: usize,
        expected: usize,
        got: usize,
    },
    #[error("line {line}: expected {expected} tokens, found {found}")]
    WrongTokenCount {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}, token {col}: expected '0' or '1', found {found:?}")]
    BadToken {
        line: usize,
        col: usize,
        found: String,
    },
    #[error("line {line}: unexpected trailing content")]
    TrailingContent { line: usize },
}

/// Parses the dense text format. Blank lines are only allowed after the
/// matrix body; anything else is a hard error with a line/column position
/// (both 1-based).
pub fn parse_matrix(text: &str) -> Result<Instance, ParseError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().unwrap_or((0, ""));
    let n: usize = match header.trim().parse() {
        Ok(n) if n > 0 => n,
        _ => {
            return Err(ParseError::BadHeader {
                found: header.trim().to_string(),
            })
        }
    };

    let mut rows: Vec<Vec<u8>> = Vec::with_capacity(n);
    for (idx, line) in &mut lines {
        let line_no = idx + 1;
        let mut row = Vec::with_capacity(n);
        for (t, token) in line.split_whitespace().enumerate() {
            match token {
                "0" => row.push(0),
                "1" => row.push(1),
                other => {
                    return Err(ParseError::BadToken {
                        line: line_no,
                        col: t + 1,
                        found: other.to_string(),
                    })
                }
            }
        }
        if row.len() != n {
            return Err(ParseError::WrongTokenCount {
                line: line_no,
                expected: n,
                found: row.len(),
            });
        }
        rows.push(row);
        if rows.len() == n {
            break;
        }
    }
    if rows.len() < n {
        return Err(ParseError::MissingRows {
            line: rows.len() + 2,
            expected: n,
            got: rows.len(),
        });
    }
    for (idx, line) in lines {
        if !line.trim().is_empty() {
            return Err(ParseError::TrailingContent { line: idx + 1 });
        }
    }
    Ok(Instance::from_rows(&rows).expect("validated while parsing"))
}

/// Serializes an instance in the dense text format, ending with a newline.
pub fn write_matrix(inst: &Instance) -> String {
    let n = inst.n();
    let mut out = String::with_capacity((n + 1) * (2 * n + 1));
    out.push_str(&n.to_string());
    out.push('\n');
    for row in inst.rows() {
        for (j, &v) in row.iter().enumerate() {
            if j > 0 {
                out.push(' ');
            }
            out.push(if v == 1 { '1' } else { '0' });
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_simple_matrix() {
        let inst = parse_matrix("2\n1 0\n0 1\n").unwrap();
        assert_eq!(inst, Instance::identity(2));
    }

    #[test]
    fn tolerates_trailing_blank_lines() {
        assert!(parse_matrix("1\n1\n\n  \n").is_ok());
    }

    #[test]
    fn header_errors() {
        assert_eq!(
            parse_matrix(""),
            Err(ParseError::BadHeader {
                found: String::new()
            })
        );
        assert_eq!(
            parse_matrix("0\n"),
            Err(ParseError::BadHeader {
                found: "0".to_string()
            })
        );
        assert_eq!(
            parse_matrix("x\n1\n"),
            Err(ParseError::BadHeader {
                found: "x".to_string()
            })
        );
    }

    #[test]
    fn body_errors_carry_positions() {
        assert_eq!(
            parse_matrix("2\n1 0\n0 2\n"),
            Err(ParseError::BadToken {
                line: 3,
                col: 2,
                found: "2".to_string()
            })
        );
        assert_eq!(
            parse_matrix("2\n1 0 1\n0 1\n"),
            Err(ParseError::WrongTokenCount {
                line: 2,
                expected: 2,
                found: 3
            })
        );
        assert_eq!(
            parse_matrix("3\n1 0 1\n0 1 0\n"),
            Err(ParseError::MissingRows {
                line: 4,
                expected: 3,
                got: 2
            })
        );
        assert_eq!(
            parse_matrix("1\n1\n1 0\n"),
            Err(ParseError::TrailingContent { line: 3 })
        );
    }

    proptest! {
        #[test]
        fn roundtrip(n in 1usize..9, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(seed);
            let inst = Instance::from_fn(n, |_, _| rng.random::<bool>());
            prop_assert_eq!(parse_matrix(&write_matrix(&inst)).unwrap(), inst);
        }
    }
}
