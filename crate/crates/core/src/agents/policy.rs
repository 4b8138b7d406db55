use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::EOS;

/// What an agent may look at after a READ. Token sequences start right
/// after the committed prefix.
#[derive(Clone, Copy, Debug)]
pub struct AgentContext<'a> {
    pub committed_len: usize,
    pub current: &'a [u32],
    pub current_probs: &'a [f32],
    /// Continuation before this READ, aligned to the same commit point;
    /// `None` on the first READ.
    pub previous: Option<(&'a [u32], &'a [f32])>,
    pub source_read: usize,
    pub source_finished: bool,
}

impl AgentContext<'_> {
    /// Words of the current continuation that could be committed.
    pub fn available(&self) -> usize {
        self.current
            .iter()
            .position(|&t| t == EOS)
            .unwrap_or(self.current.len())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentKind {
    /// Wait until end: never commits mid-stream.
    Wue,
    /// Wait if worse: commit while the word's probability did not drop.
    Wiw,
    /// Wait if diff: commit while the word stayed the same.
    Wid,
    /// `s` READs, then `rw` words every `rw` READs.
    StaticRw { s: usize, rw: usize },
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Wue => f.write_str("wue"),
            Self::Wiw => f.write_str("wiw"),
            Self::Wid => f.write_str("wid"),
            Self::StaticRw { s, rw } => write!(f, "static:{s},{rw}"),
        }
    }
}

/// A streaming agent or the chunk baseline, as named on the command line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Policy {
    Agent(AgentKind),
    Chunk(usize),
}

pub const POLICY_FORMS: &str = "wue, wiw, wid, static:S,RW, chunk:N";

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Agent(k) => k.fmt(f),
            Self::Chunk(n) => write!(f, "chunk:{n}"),
        }
    }
}

fn positive(s: &str, what: &str, input: &str) -> Result<usize> {
    match s.trim().parse::<usize>() {
        Ok(v) if v > 0 => Ok(v),
        _ => Err(invalid(format!("{what} must be a positive integer in {input:?}"))),
    }
}

impl FromStr for Policy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || invalid(format!("unknown agent {s:?}; expected one of: {POLICY_FORMS}"));
        match s {
            "wue" => return Ok(Self::Agent(AgentKind::Wue)),
            "wiw" => return Ok(Self::Agent(AgentKind::Wiw)),
            "wid" => return Ok(Self::Agent(AgentKind::Wid)),
            _ => {}
        }
        if let Some(rest) = s.strip_prefix("static:") {
            let (a, b) = rest.split_once(',').ok_or_else(bad)?;
            return Ok(Self::Agent(AgentKind::StaticRw {
                s: positive(a, "S", s)?,
                rw: positive(b, "RW", s)?,
            }));
        }
        if let Some(rest) = s.strip_prefix("chunk:") {
            return Ok(Self::Chunk(positive(rest, "N", s)?));
        }
        Err(bad())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.parse::<Policy>()? {
            Policy::Agent(k) => Ok(k),
            Policy::Chunk(_) => Err(invalid("chunk decoding is not a streaming agent")),
        }
    }
}

/// An agent with its per-sentence counters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Agent {
    kind: AgentKind,
    reads: usize,
    reads_since_phase: usize,
    in_startup: bool,
}

impl Agent {
    pub fn new(kind: AgentKind) -> Self {
        Self {
            kind,
            reads: 0,
            reads_since_phase: 0,
            in_startup: true,
        }
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn reset(&mut self) {
        *self = Self::new(self.kind);
    }

    /// Number of words to commit after the latest READ, clamped to what the
    /// continuation holds before `</s>`.
    pub fn decide(&mut self, ctx: &AgentContext<'_>) -> usize {
        let n = match self.kind {
            AgentKind::Wue => 0,
            AgentKind::Wiw => decide_wiw(ctx),
            AgentKind::Wid => decide_wid(ctx),
            AgentKind::StaticRw { s, rw } => self.static_rw(s, rw),
        };
        n.min(ctx.available())
    }

    fn static_rw(&mut self, s: usize, rw: usize) -> usize {
        self.reads += 1;
        if self.in_startup {
            if self.reads >= s {
                self.in_startup = false;
                self.reads_since_phase = 0;
            }
            return 0;
        }
        self.reads_since_phase += 1;
        if self.reads_since_phase == rw {
            self.reads_since_phase = 0;
            rw
        } else {
            0
        }
    }
}

fn decide_wiw(ctx: &AgentContext<'_>) -> usize {
    let Some((_, prev_p)) = ctx.previous else {
        return 0;
    };
    ctx.current_probs
        .iter()
        .zip(prev_p)
        .take_while(|(new, old)| new >= old)
        .count()
}

fn decide_wid(ctx: &AgentContext<'_>) -> usize {
    let Some((prev_t, _)) = ctx.previous else {
        return 0;
    };
    ctx.current.iter().zip(prev_t).take_while(|(a, b)| a == b).count()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx<'a>(cur: &'a [u32], cur_p: &'a [f32], prev: Option<(&'a [u32], &'a [f32])>) -> AgentContext<'a> {
        AgentContext {
            committed_len: 0,
            current: cur,
            current_probs: cur_p,
            previous: prev,
            source_read: 2,
            source_finished: false,
        }
    }

    #[test]
    fn wue_never_commits_mid_stream() {
        let mut a = Agent::new(AgentKind::Wue);
        assert_eq!(a.decide(&ctx(&[4, 5], &[0.9, 0.9], Some((&[4], &[0.1])))), 0);
    }

    #[test]
    fn wiw_scans_until_probability_drops() {
        let mut a = Agent::new(AgentKind::Wiw);
        assert_eq!(a.decide(&ctx(&[4, 5], &[0.5, 0.3], Some((&[4], &[0.4])))), 1);
        assert_eq!(a.decide(&ctx(&[4, 5], &[0.4, 0.3], Some((&[4], &[0.4])))), 1);
        assert_eq!(
            a.decide(&ctx(&[4, 5, 6], &[0.6, 0.5, 0.9], Some((&[4, 5], &[0.5, 0.6])))),
            1
        );
        assert_eq!(a.decide(&ctx(&[4], &[0.3], Some((&[4], &[0.4])))), 0);
    }

    #[test]
    fn wid_scans_until_word_changes() {
        let mut a = Agent::new(AgentKind::Wid);
        let p = [0.5; 3];
        assert_eq!(a.decide(&ctx(&[7, 8, 9], &p, Some((&[7, 8], &p[..2])))), 2);
        assert_eq!(a.decide(&ctx(&[7, 8, 9], &p, Some((&[7, 6], &p[..2])))), 1);
        assert_eq!(a.decide(&ctx(&[7], &p[..1], Some((&[], &[])))), 0);
    }

    #[test]
    fn first_read_commits_nothing() {
        for kind in [AgentKind::Wiw, AgentKind::Wid] {
            assert_eq!(Agent::new(kind).decide(&ctx(&[4], &[0.9], None)), 0);
        }
    }

    #[test]
    fn commits_stop_before_end_of_sentence() {
        let mut a = Agent::new(AgentKind::Wid);
        assert_eq!(
            a.decide(&ctx(&[4, EOS], &[0.5, 0.5], Some((&[4, EOS], &[0.5, 0.5])))),
            1
        );
    }

    #[test]
    fn static_rw_schedule() {
        let mut a = Agent::new(AgentKind::StaticRw { s: 5, rw: 2 });
        let words = [4u32; 10];
        let probs = [0.5f32; 10];
        let got: Vec<usize> = (0..7).map(|_| a.decide(&ctx(&words, &probs, None))).collect();
        assert_eq!(got, [0, 0, 0, 0, 0, 0, 2]);
    }

    #[test]
    fn static_rw_ignores_tokens() {
        let mut a = Agent::new(AgentKind::StaticRw { s: 1, rw: 1 });
        let mut b = a.clone();
        let p = [0.5f32; 3];
        for _ in 0..4 {
            let x = a.decide(&ctx(&[4, 5, 6], &p, None));
            let y = b.decide(&ctx(&[6, 4, 5], &p, Some((&[9], &[0.1]))));
            assert_eq!(x, y);
        }
    }

    #[test]
    fn policy_strings() {
        for s in ["wue", "wiw", "wid", "static:5,2", "chunk:6"] {
            assert_eq!(s.parse::<Policy>().unwrap().to_string(), s);
        }
        assert_eq!(
            "static:3,1".parse::<Policy>().unwrap(),
            Policy::Agent(AgentKind::StaticRw { s: 3, rw: 1 })
        );
        for bad in [
            "",
            "waitk",
            "static:0,1",
            "static:3",
            "chunk:",
            "chunk:-1",
            "static:a,b",
        ] {
            assert!(bad.parse::<Policy>().is_err(), "{bad}");
        }
        assert!("chunk:4".parse::<AgentKind>().is_err());
    }
}
