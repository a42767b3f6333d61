//! Deterministic text and JSON renderings of results.
//!
//! Text mode prints integers without a denominator; JSON always uses
//! `num/den` strings so that values survive any JSON reader exactly.

use std::fmt::Write as _;

use netprice_core::model::Approach;
use netprice_core::rat::to_fraction_string;
use netprice_core::{structure_of, PiecewiseEquilibrium, PricingOutcome, ProbVec, Rat, Side, Structure};
use num_traits::{One, Signed, Zero};
use serde_json::{json, Value};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Text,
    Json,
}

fn list(values: &[Rat]) -> String {
    let parts: Vec<String> = values.iter().map(ToString::to_string).collect();
    format!("[{}]", parts.join(", "))
}

fn json_list(values: &[Rat]) -> Value {
    Value::Array(values.iter().map(|v| Value::String(to_fraction_string(v))).collect())
}

fn side_name(side: Side) -> &'static str {
    match side {
        Side::Pessimistic => "pessimistic",
        Side::Optimistic => "optimistic",
    }
}

fn structure_string(s: &Structure) -> String {
    s.0.iter().map(|l| l.symbol()).collect()
}

pub fn probvec(q: &ProbVec, mode: Mode) -> String {
    match mode {
        Mode::Text => format!("q = {}\n", list(q)),
        Mode::Json => {
            let doc = json!({ "q": json_list(q), "structure": structure_string(&structure_of(q)) });
            format!("{doc}\n")
        }
    }
}

/// `c0 + c1 p` with zero terms dropped.
fn affine(c0: &Rat, c1: &Rat) -> String {
    let slope = if c1.is_one() {
        "p".to_string()
    } else if *c1 == -Rat::one() {
        "-p".to_string()
    } else {
        format!("{c1}*p")
    };
    match (c0.is_zero(), c1.is_zero()) {
        (_, true) => c0.to_string(),
        (true, false) => slope,
        (false, false) if c1.is_negative() => format!("{c0} - {}", slope.trim_start_matches('-')),
        (false, false) => format!("{c0} + {slope}"),
    }
}

fn interval(side: Side, lo: &Option<Rat>, hi: &Option<Rat>) -> String {
    let lo_s = lo.as_ref().map_or("-inf".to_string(), ToString::to_string);
    let hi_s = hi.as_ref().map_or("+inf".to_string(), ToString::to_string);
    let open = if lo.is_some() && side == Side::Pessimistic { '[' } else { '(' };
    let close = if hi.is_some() && side == Side::Optimistic { ']' } else { ')' };
    format!("{open}{lo_s}, {hi_s}{close}")
}

fn segment_structures(pwl: &PiecewiseEquilibrium) -> Vec<String> {
    pwl.segments
        .iter()
        .map(|s| {
            let q = ProbVec::new(s.value_at(&s.interior_point())).expect("segment values are probabilities");
            structure_string(&structure_of(&q))
        })
        .collect()
}

/// Segments from the highest prices down, separated by their breakpoints.
pub fn piecewise(pwl: &PiecewiseEquilibrium, mode: Mode) -> String {
    let structures = segment_structures(pwl);
    let segs = &pwl.segments;
    match mode {
        Mode::Text => {
            let mut out = String::new();
            writeln!(
                out,
                "{} equilibrium: {} agents, {} segments",
                side_name(pwl.side),
                pwl.n(),
                segs.len()
            )
            .unwrap();
            for (idx, seg) in segs.iter().enumerate() {
                if idx > 0 {
                    let bp = segs[idx - 1].lo.as_ref().expect("inner breakpoint");
                    let kind = if pwl.is_jump(idx - 1) { "jump" } else { "continuous" };
                    writeln!(out, "breakpoint {bp} ({kind})").unwrap();
                }
                writeln!(
                    out,
                    "segment {}: p in {}  structure {}",
                    idx + 1,
                    interval(pwl.side, &seg.lo, &seg.hi),
                    structures[idx]
                )
                .unwrap();
                for (i, (c0, c1)) in seg.c0.iter().zip(&seg.c1).enumerate() {
                    writeln!(out, "  q_{} = {}", i + 1, affine(c0, c1)).unwrap();
                }
            }
            out
        }
        Mode::Json => {
            let bound = |b: &Option<Rat>| b.as_ref().map_or(Value::Null, |v| Value::String(to_fraction_string(v)));
            let segments: Vec<Value> = segs
                .iter()
                .zip(&structures)
                .map(|(s, st)| {
                    json!({
                        "lo": bound(&s.lo),
                        "hi": bound(&s.hi),
                        "structure": st,
                        "c0": json_list(&s.c0),
                        "c1": json_list(&s.c1),
                    })
                })
                .collect();
            let breakpoints: Vec<Value> = (0..segs.len().saturating_sub(1))
                .map(|idx| {
                    json!({
                        "price": bound(&segs[idx].lo),
                        "jump": pwl.is_jump(idx),
                    })
                })
                .collect();
            let doc = json!({
                "side": side_name(pwl.side),
                "n": pwl.n(),
                "segments": segments,
                "breakpoints": breakpoints,
            });
            format!("{doc}\n")
        }
    }
}

fn attainment(out: &PricingOutcome) -> &'static str {
    match (out.attained, out.approach) {
        (true, _) => "yes",
        (false, Some(Approach::FromAbove)) => "no (supremum at right limit)",
        (false, _) => "no (supremum at left limit)",
    }
}

pub fn pricing(out: &PricingOutcome, mode: Mode) -> String {
    match mode {
        Mode::Text => {
            let mut s = String::new();
            if let [p] = out.prices.as_slice() {
                writeln!(s, "price = {p}").unwrap();
            } else {
                writeln!(s, "prices = {}", list(&out.prices)).unwrap();
            }
            writeln!(s, "revenue = {}", out.revenue).unwrap();
            writeln!(s, "attained: {}", attainment(out)).unwrap();
            if let Some(x) = &out.parameter {
                writeln!(s, "parameter = {x}").unwrap();
            }
            s
        }
        Mode::Json => {
            let approach = match out.approach {
                Some(Approach::FromBelow) => Value::String("from_below".into()),
                Some(Approach::FromAbove) => Value::String("from_above".into()),
                None => Value::Null,
            };
            let doc = json!({
                "prices": json_list(&out.prices),
                "revenue": to_fraction_string(&out.revenue),
                "attained": out.attained,
                "approach": approach,
                "parameter": out.parameter.as_ref().map_or(Value::Null, |x| Value::String(to_fraction_string(x))),
            });
            format!("{doc}\n")
        }
    }
}
