//! The `netprice v1` instance format.
//!
//! ```text
//! # comment
//! netprice v1
//! agents <n>
//! groups <k>                # optional, default 1
//! agent <i> <g> <a> <b>     # 1-based agent index and group, rationals
//! edge <j> <i> <w>          # T[j][i] = w: influence of agent j on agent i
//! ```
//!
//! Rationals are `int`, `int/int` or exact decimals. Unlisted edges are 0.

use std::fmt::Write as _;

use netprice_core::rat::parse_rat;
use netprice_core::{Error, GroupedInstance, Instance, ProbVec, Rat};
use num_traits::Zero;

#[derive(thiserror::Error, Debug, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: agent {agent} is defined twice")]
    DuplicateAgent { line: usize, agent: usize },
    #[error("line {line}: edge {from} -> {to} is defined twice")]
    DuplicateEdge { line: usize, from: usize, to: usize },
    #[error("line {line}: no agent {agent} (agents are 1..={n})")]
    UnknownAgentRef { line: usize, agent: usize, n: usize },
    #[error("line {line}: agent {agent} is in group {group}, but groups are 1..={k}")]
    GroupOutOfRange { line: usize, agent: usize, group: usize, k: usize },
    #[error("agent {agent} is never defined")]
    MissingAgent { agent: usize },
    #[error(transparent)]
    Invalid(#[from] Error),
}

fn syntax(line: usize, msg: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, msg: msg.into() }
}

fn count(line: usize, tok: &str) -> Result<usize, FormatError> {
    tok.parse().map_err(|_| syntax(line, format!("expected a positive integer, found `{tok}`")))
}

fn rational(line: usize, tok: &str) -> Result<Rat, FormatError> {
    parse_rat(tok).map_err(|_| syntax(line, format!("expected a rational, found `{tok}`")))
}

pub fn parse_instance(text: &str) -> Result<GroupedInstance, FormatError> {
    let mut header = false;
    let mut n: Option<usize> = None;
    let mut k: Option<usize> = None;
    let mut agents: Vec<Option<(usize, Rat, Rat)>> = Vec::new();
    let mut t: Vec<Vec<Option<Rat>>> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let toks: Vec<&str> = body.split_whitespace().collect();
        if !header {
            if toks != ["netprice", "v1"] {
                return Err(syntax(line, "expected the header `netprice v1`"));
            }
            header = true;
            continue;
        }
        let agent_ref = |tok: &str, n: usize| -> Result<usize, FormatError> {
            let i = count(line, tok)?;
            if i == 0 || i > n {
                return Err(FormatError::UnknownAgentRef { line, agent: i, n });
            }
            Ok(i - 1)
        };
        match toks.as_slice() {
            ["agents", m] => {
                if n.is_some() {
                    return Err(syntax(line, "`agents` given twice"));
                }
                let m = count(line, m)?;
                if m == 0 {
                    return Err(FormatError::Invalid(Error::EmptyInstance));
                }
                n = Some(m);
                agents = vec![None; m];
                t = vec![vec![None; m]; m];
            }
            ["groups", g] => {
                if k.is_some() {
                    return Err(syntax(line, "`groups` given twice"));
                }
                let g = count(line, g)?;
                if g == 0 {
                    return Err(syntax(line, "at least one group is required"));
                }
                k = Some(g);
            }
            ["agent", i, g, a, b] => {
                let m = n.ok_or_else(|| syntax(line, "`agents` must come before `agent`"))?;
                let i = agent_ref(i, m)?;
                let g = count(line, g)?;
                if g == 0 {
                    return Err(syntax(line, "groups are numbered from 1"));
                }
                if agents[i].is_some() {
                    return Err(FormatError::DuplicateAgent { line, agent: i + 1 });
                }
                agents[i] = Some((g, rational(line, a)?, rational(line, b)?));
            }
            ["edge", j, i, w] => {
                let m = n.ok_or_else(|| syntax(line, "`agents` must come before `edge`"))?;
                let (j, i) = (agent_ref(j, m)?, agent_ref(i, m)?);
                if j == i {
                    return Err(FormatError::Invalid(Error::SelfLoop { agent: i }));
                }
                if t[j][i].is_some() {
                    return Err(FormatError::DuplicateEdge { line, from: j + 1, to: i + 1 });
                }
                t[j][i] = Some(rational(line, w)?);
            }
            _ => return Err(syntax(line, format!("unrecognized line `{body}`"))),
        }
    }
    if !header {
        return Err(syntax(1, "missing header `netprice v1`"));
    }
    let n = n.ok_or_else(|| syntax(text.lines().count().max(1), "missing `agents` line"))?;
    let k = k.unwrap_or(1);
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    let mut groups = Vec::with_capacity(n);
    for (i, entry) in agents.into_iter().enumerate() {
        let (g, lo, hi) = entry.ok_or(FormatError::MissingAgent { agent: i + 1 })?;
        if g > k {
            let line = line_of_agent(text, i + 1);
            return Err(FormatError::GroupOutOfRange { line, agent: i + 1, group: g, k });
        }
        groups.push(g - 1);
        a.push(lo);
        b.push(hi);
    }
    let t = t.into_iter().map(|row| row.into_iter().map(Option::unwrap_or_default).collect()).collect();
    let inst = Instance::new(a, b, t)?;
    Ok(GroupedInstance::new(inst, k, groups)?)
}

fn line_of_agent(text: &str, agent: usize) -> usize {
    text.lines()
        .position(|l| {
            let mut it = l.split('#').next().unwrap_or("").split_whitespace();
            it.next() == Some("agent") && it.next().and_then(|s| s.parse().ok()) == Some(agent)
        })
        .map_or(0, |p| p + 1)
}

/// Canonical form: header, counts, agents in order, then the nonzero edges
/// by source and target.
pub fn serialize_instance(g: &GroupedInstance) -> String {
    let inst = &g.instance;
    let mut out = String::new();
    out.push_str("# `edge j i w`: agent j adds w to agent i's utility when both buy\n");
    out.push_str("netprice v1\n");
    writeln!(out, "agents {}", inst.n()).unwrap();
    writeln!(out, "groups {}", g.k).unwrap();
    for i in 0..inst.n() {
        writeln!(out, "agent {} {} {} {}", i + 1, g.groups[i] + 1, inst.a[i], inst.b[i]).unwrap();
    }
    for (j, row) in inst.t.iter().enumerate() {
        for (i, w) in row.iter().enumerate() {
            if !w.is_zero() {
                writeln!(out, "edge {} {} {}", j + 1, i + 1, w).unwrap();
            }
        }
    }
    out
}

/// Reads a probability vector written as `q = [x, y, ...]`, `[x, y]` or a
/// plain comma- or space-separated list.
pub fn parse_probvec(text: &str) -> Result<ProbVec, FormatError> {
    let body: String = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or(""))
        .collect::<Vec<_>>()
        .join(" ");
    let body = body.trim();
    let body = body.strip_prefix("q").map(|r| r.trim_start()).and_then(|r| r.strip_prefix('=')).unwrap_or(body);
    let body = body.trim().trim_start_matches('[').trim_end_matches(']');
    let values = body
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|tok| rational(1, tok))
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(syntax(1, "empty probability vector"));
    }
    Ok(ProbVec::new(values)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use netprice_core::instances::gen_jump;
    use netprice_core::rat::{frac, int};

    const JUMP: &str = "\
# `edge j i w`: agent j adds w to agent i's utility when both buy
netprice v1
agents 2
groups 1
agent 1 1 0 1
agent 2 1 0 1
edge 1 2 2
edge 2 1 2
";

    #[test]
    fn minimal_file() {
        let g = parse_instance("netprice v1\nagents 1\nagent 1 1 0 1\n").unwrap();
        assert_eq!(g.k, 1);
        assert_eq!(g.instance.a, vec![int(0)]);
        assert_eq!(g.instance.b, vec![int(1)]);
    }

    #[test]
    fn jump_round_trips_byte_identically() {
        let g = parse_instance(JUMP).unwrap();
        assert_eq!(g.instance, gen_jump());
        assert_eq!(serialize_instance(&g), JUMP);
    }

    #[test]
    fn decimals_comments_and_groups() {
        let text = "# hi\n\nnetprice v1 # header\nagents 2\ngroups 2\nagent 2 2 0.5 3/2\nagent 1 1 0 1\nedge 2 1 -0.25\n";
        let g = parse_instance(text).unwrap();
        assert_eq!(g.groups, vec![0, 1]);
        assert_eq!(g.instance.a[1], frac(1, 2));
        assert_eq!(g.instance.t[1][0], frac(-1, 4));
        assert_eq!(parse_instance(&serialize_instance(&g)).unwrap(), g);
    }

    #[test]
    fn errors() {
        let base = "netprice v1\nagents 2\nagent 1 1 0 1\nagent 2 1 0 1\n";
        let err = |extra: &str| parse_instance(&format!("{base}{extra}")).unwrap_err();
        assert_eq!(err("edge 1 1 2\n"), FormatError::Invalid(Error::SelfLoop { agent: 0 }));
        assert_eq!(err("edge 1 2 1\nedge 1 2 3\n"), FormatError::DuplicateEdge { line: 6, from: 1, to: 2 });
        assert_eq!(err("agent 1 1 0 1\n"), FormatError::DuplicateAgent { line: 5, agent: 1 });
        assert_eq!(err("edge 1 3 1\n"), FormatError::UnknownAgentRef { line: 5, agent: 3, n: 2 });
        assert!(matches!(err("edge 1 2 x\n"), FormatError::Syntax { line: 5, .. }));
        assert!(matches!(err("vertex 1\n"), FormatError::Syntax { line: 5, .. }));
        assert_eq!(
            parse_instance("netprice v1\nagents 2\nagent 1 1 0 1\n").unwrap_err(),
            FormatError::MissingAgent { agent: 2 }
        );
        assert_eq!(
            parse_instance("netprice v1\nagents 1\nagent 1 2 0 1\n").unwrap_err(),
            FormatError::GroupOutOfRange { line: 3, agent: 1, group: 2, k: 1 }
        );
        assert!(matches!(parse_instance("agents 1\n").unwrap_err(), FormatError::Syntax { line: 1, .. }));
        assert_eq!(
            parse_instance("netprice v1\nagents 1\nagent 1 1 1 1\n").unwrap_err(),
            FormatError::Invalid(Error::DegenerateInterval { agent: 0 })
        );
    }

    #[test]
    fn probvec_forms() {
        let want = ProbVec::new(vec![frac(1, 2), frac(1, 4), int(1), int(1)]).unwrap();
        assert_eq!(parse_probvec("q = [1/2, 1/4, 1, 1]\n").unwrap(), want);
        assert_eq!(parse_probvec("0.5 0.25 1 1").unwrap(), want);
        assert!(parse_probvec("q = [3/2]").is_err());
        assert!(parse_probvec("").is_err());
    }
}
