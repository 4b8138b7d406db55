use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Word alignment as a set of 0-based `(source, target)` index pairs.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Alignment {
    points: BTreeSet<(usize, usize)>,
}

impl Alignment {
    pub fn new(points: impl IntoIterator<Item = (usize, usize)>) -> Self {
        Self {
            points: points.into_iter().collect(),
        }
    }

    pub fn points(&self) -> &BTreeSet<(usize, usize)> {
        &self.points
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Source indices aligned to target word `t`.
    pub fn sources_of(&self, t: usize) -> impl Iterator<Item = usize> + '_ {
        self.points.iter().filter(move |p| p.1 == t).map(|p| p.0)
    }

    /// Renders back to Pharaoh `i-j` notation.
    pub fn to_pharaoh(&self) -> String {
        self.points
            .iter()
            .map(|(s, t)| format!("{s}-{t}"))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Parses one line of Pharaoh-format alignments (`"0-0 1-2 2-1"`).
/// Column positions in errors are 1-based character offsets.
pub fn parse_pharaoh(line: &str) -> Result<Alignment> {
    let mut points = BTreeSet::new();
    let mut col = 0usize;
    for piece in line.split(' ') {
        let start = col + 1;
        col += piece.chars().count() + 1;
        let piece = piece.trim();
        if piece.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { column: start, message };
        let (s, t) = piece
            .split_once('-')
            .ok_or_else(|| err(format!("expected i-j, found {piece:?}")))?;
        let s: usize = s.parse().map_err(|_| err(format!("bad source index in {piece:?}")))?;
        let t: usize = t.parse().map_err(|_| err(format!("bad target index in {piece:?}")))?;
        points.insert((s, t));
    }
    Ok(Alignment { points })
}

/// Parses an alignment file, one line per sentence pair.
pub fn parse_pharaoh_file(text: &str) -> Result<Vec<Alignment>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| {
            parse_pharaoh(l).map_err(|e| match e {
                Error::Parse { column, message } => Error::Data {
                    line: i + 1,
                    message: format!("column {column}: {message}"),
                },
                other => other,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_pairs() {
        let a = parse_pharaoh("0-0 1-2 2-1").unwrap();
        assert_eq!(a, Alignment::new([(0, 0), (1, 2), (2, 1)]));
    }

    #[test]
    fn empty_line_is_empty_alignment() {
        assert!(parse_pharaoh("").unwrap().is_empty());
    }

    #[test]
    fn duplicates_collapse() {
        assert_eq!(parse_pharaoh("0-0 0-0").unwrap().points().len(), 1);
    }

    #[test]
    fn malformed_token_reports_column() {
        match parse_pharaoh("0-0 1x2") {
            Err(Error::Parse { column, .. }) => assert_eq!(column, 5),
            other => panic!("{other:?}"),
        }
        assert!(parse_pharaoh("0-a").is_err());
    }

    #[test]
    fn file_errors_name_the_line() {
        match parse_pharaoh_file("0-0\n1-1 oops\n") {
            Err(Error::Data { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn pharaoh_roundtrip() {
        let a = parse_pharaoh("2-1 0-0 1-2").unwrap();
        assert_eq!(parse_pharaoh(&a.to_pharaoh()).unwrap(), a);
    }
}
