use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AgentKind, Policy};
use crate::error::{invalid, Error, Result};
use crate::metrics::evaluate_with;
use crate::model::IncrementalModel;
use crate::stream::Search;

/// One evaluated STATIC-RW configuration.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridPoint {
    #[serde(rename = "S")]
    pub s: usize,
    #[serde(rename = "RW")]
    pub rw: usize,
    #[serde(rename = "BLEU")]
    pub bleu: f64,
    /// `None` when every translation was empty.
    #[serde(rename = "AP")]
    pub ap: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TuneResult {
    pub best: GridPoint,
    pub grid: Vec<GridPoint>,
}

fn ap_key(p: &GridPoint) -> f64 {
    p.ap.unwrap_or(f64::INFINITY)
}

/// Highest BLEU with AP at most `ap_max`; ties go to lower AP, then smaller
/// S, then smaller RW.
pub fn select_best(grid: &[GridPoint], ap_max: f64) -> Option<GridPoint> {
    grid.iter()
        .filter(|p| p.ap.is_some_and(|a| a <= ap_max))
        .min_by(|a, b| {
            b.bleu
                .total_cmp(&a.bleu)
                .then(ap_key(a).total_cmp(&ap_key(b)))
                .then(a.s.cmp(&b.s))
                .then(a.rw.cmp(&b.rw))
        })
        .copied()
}

fn report_order(grid: &[GridPoint]) -> Vec<GridPoint> {
    let mut g = grid.to_vec();
    g.sort_by(|a, b| {
        ap_key(a)
            .total_cmp(&ap_key(b))
            .then(b.bleu.total_cmp(&a.bleu))
            .then(a.s.cmp(&b.s))
            .then(a.rw.cmp(&b.rw))
    });
    g
}

/// Tab-separated `S RW BLEU AP` rows sorted by AP, then descending BLEU.
pub fn grid_tsv(grid: &[GridPoint]) -> String {
    let mut out = String::new();
    for p in report_order(grid) {
        let ap = p.ap.map_or_else(|| "NA".to_string(), |a| format!("{a:.6}"));
        let _ = writeln!(out, "{}\t{}\t{:.6}\t{ap}", p.s, p.rw, p.bleu);
    }
    out
}

pub fn grid_json(grid: &[GridPoint]) -> Result<String> {
    Ok(serde_json::to_string_pretty(&report_order(grid))?)
}

/// Evaluates STATIC-RW for every `(S, RW)` pair and picks the best one under
/// the AP budget. Grid points run in parallel; the result does not depend on
/// scheduling.
#[allow(clippy::too_many_arguments)]
pub fn tune_static_rw<M, F>(
    model: &M,
    dev_src: &[Vec<u32>],
    dev_ref: &[Vec<String>],
    s_range: &[usize],
    rw_range: &[usize],
    ap_max: f64,
    search: Search,
    detok: F,
) -> Result<TuneResult>
where
    M: IncrementalModel + Sync,
    F: Fn(&[u32]) -> Vec<String> + Sync,
{
    if dev_src.is_empty() {
        return Err(invalid("empty development set"));
    }
    if s_range.is_empty() || rw_range.is_empty() {
        return Err(invalid("empty S or RW range"));
    }
    if s_range.iter().chain(rw_range).any(|&v| v == 0) {
        return Err(invalid("S and RW must be positive"));
    }
    let pairs: Vec<(usize, usize)> = s_range
        .iter()
        .flat_map(|&s| rw_range.iter().map(move |&rw| (s, rw)))
        .collect();
    let grid = pairs
        .par_iter()
        .map(|&(s, rw)| {
            let policy = Policy::Agent(AgentKind::StaticRw { s, rw });
            let r = evaluate_with(model, policy, dev_src, dev_ref, search, &detok)?;
            Ok(GridPoint {
                s,
                rw,
                bleu: r.bleu,
                ap: r.ap,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    match select_best(&grid, ap_max) {
        Some(best) => Ok(TuneResult { best, grid }),
        None => Err(Error::NoFeasibleAgent { ap_max, grid }),
    }
}

/// Parses `3`, `1..4` (inclusive) or `1,2,5`.
pub fn parse_range(s: &str) -> Result<Vec<usize>> {
    let bad = || invalid(format!("bad range {s:?}; expected N, A..B or A,B,C"));
    let out: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let a: usize = a.trim().parse().map_err(|_| bad())?;
        let b: usize = b.trim().trim_start_matches('=').parse().map_err(|_| bad())?;
        (a..=b).collect()
    } else {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if out.is_empty() || out.contains(&0) {
        return Err(bad());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gp(s: usize, rw: usize, bleu: f64, ap: f64) -> GridPoint {
        GridPoint {
            s,
            rw,
            bleu,
            ap: Some(ap),
        }
    }

    #[test]
    fn constrained_argmax() {
        let g = [gp(1, 1, 0.50, 0.60), gp(2, 1, 0.52, 0.70), gp(3, 1, 0.53, 0.80)];
        let b = select_best(&g, 0.75).unwrap();
        assert_eq!((b.s, b.rw), (2, 1));
    }

    #[test]
    fn ties_prefer_lower_ap_then_smaller_params() {
        let g = [gp(2, 1, 0.5, 0.72), gp(3, 1, 0.5, 0.70)];
        assert_eq!(select_best(&g, 0.75).unwrap().s, 3);
        let g = [gp(2, 2, 0.5, 0.7), gp(2, 1, 0.5, 0.7), gp(3, 1, 0.5, 0.7)];
        let b = select_best(&g, 0.75).unwrap();
        assert_eq!((b.s, b.rw), (2, 1));
    }

    #[test]
    fn infeasible_budget() {
        let g = [
            gp(1, 1, 0.5, 0.6),
            GridPoint {
                s: 2,
                rw: 1,
                bleu: 0.0,
                ap: None,
            },
        ];
        assert!(select_best(&g, 0.5).is_none());
    }

    #[test]
    fn report_sorted_by_ap_then_bleu() {
        let g = [gp(3, 1, 0.53, 0.80), gp(1, 1, 0.50, 0.60), gp(2, 1, 0.40, 0.60)];
        let tsv = grid_tsv(&g);
        let rows: Vec<&str> = tsv.lines().map(|l| l.split('\t').next().unwrap()).collect();
        assert_eq!(rows, ["1", "2", "3"]);
        let json: Vec<GridPoint> = serde_json::from_str(&grid_json(&g).unwrap()).unwrap();
        assert_eq!(json[0], g[1]);
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("1..4").unwrap(), [1, 2, 3, 4]);
        assert_eq!(parse_range("2,5").unwrap(), [2, 5]);
        assert_eq!(parse_range("3").unwrap(), [3]);
        assert!(parse_range("0..2").is_err());
        assert!(parse_range("x").is_err());
        assert!(parse_range("4..2").is_err());
    }
}
