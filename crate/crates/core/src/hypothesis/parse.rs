use std::collections::HashMap;

use num_bigint::BigInt;

use super::explicit::{ExplicitClass, Hypothesis};
use super::support::{BasisFamily, Family, IndexSet, Lattice, LatticeKind, PowerSeq, Support};
use super::HypothesisError;
use crate::metric_core::{Coord, Metric, Point};

fn at(line: usize, msg: impl Into<String>) -> HypothesisError {
    HypothesisError::ParseAt { line, msg: msg.into() }
}

fn parse_coord(s: &str) -> Result<Coord, String> {
    let (v, half) = match s.split_once(':') {
        Some((v, "sqrt2half")) => (v, true),
        Some(_) => return Err(format!("bad scale `{s}`")),
        None => (s, false),
    };
    let value = v.parse().map_err(|e| format!("{e}"))?;
    Ok(Coord { value, half })
}

fn parse_family(body: &str) -> Result<Family, String> {
    let mut words = body.split_whitespace();
    let kind = words.next().ok_or("empty family")?;
    let mut kv: HashMap<&str, &str> = HashMap::new();
    let mut flags = Vec::new();
    for w in words {
        match w.split_once('=') {
            Some((k, v)) => {
                kv.insert(k, v);
            }
            None => flags.push(w),
        }
    }
    let int = |key: &str, default: Option<i64>| -> Result<BigInt, String> {
        match kv.get(key) {
            Some(v) => v.parse::<BigInt>().map_err(|_| format!("bad integer {key}={v}")),
            None => default.map(BigInt::from).ok_or(format!("missing {key}=")),
        }
    };
    let err = |e: HypothesisError| e.to_string();
    match kind {
        "lattice" => {
            let lk = match kv.get("kind").copied().unwrap_or("real") {
                "real" => LatticeKind::Real,
                "atom" => LatticeKind::Atom,
                other => return Err(format!("bad lattice kind `{other}`")),
            };
            let ray = flags.contains(&"ray");
            Lattice::new(lk, int("offset", Some(0))?, int("step", None)?, ray).map(Family::Lattice).map_err(err)
        }
        "powers" => {
            let from = int("from", Some(1))?;
            let from: u32 = from.try_into().map_err(|_| "bad from=".to_string())?;
            PowerSeq::new(int("scale", Some(1))?, int("base", None)?, int("shift", Some(0))?, from)
                .map(Family::Powers)
                .map_err(err)
        }
        "basis" => {
            let coef = parse_coord(kv.get("scale").ok_or("missing scale=")?)?;
            let indices: IndexSet = kv.get("indices").copied().unwrap_or("all").parse().map_err(err)?;
            BasisFamily::new(coef, indices).map(Family::Basis).map_err(err)
        }
        other => Err(format!("unknown family `{other}`")),
    }
}

/// Parses the class text format:
///
/// ```text
/// metric l2
/// class b5
/// hypothesis h1
/// finite: svec:1=1
/// family: basis scale=3/5:sqrt2half indices=all
/// family: lattice step=2 offset=0 [ray] [kind=atom]
/// family: powers base=3 shift=-1 [scale=1] [from=1]
/// ```
pub fn parse_class(text: &str) -> Result<ExplicitClass, HypothesisError> {
    let mut metric: Option<Metric> = None;
    let mut name = String::from("class");
    let mut members: Vec<(String, Vec<Point>, Vec<Family>)> = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with("metric") {
            metric = Some(line.parse().map_err(|e| at(line_no, format!("{e}")))?);
        } else if let Some(rest) = line.strip_prefix("class ") {
            name = rest.trim().to_string();
        } else if let Some(rest) = line.strip_prefix("hypothesis ") {
            members.push((rest.trim().to_string(), Vec::new(), Vec::new()));
        } else if let Some(rest) = line.strip_prefix("finite:") {
            let cur = members.last_mut().ok_or_else(|| at(line_no, "support line before any hypothesis"))?;
            for tok in rest.split_whitespace() {
                cur.1.push(tok.parse().map_err(|e| at(line_no, format!("{e}")))?);
            }
        } else if let Some(rest) = line.strip_prefix("family:") {
            let cur = members.last_mut().ok_or_else(|| at(line_no, "support line before any hypothesis"))?;
            let body = rest.replace("sep-witness", "");
            cur.2.push(parse_family(&body).map_err(|m| at(line_no, m))?);
        } else if line == "regimes:" {
            break;
        } else {
            return Err(at(line_no, format!("unrecognized line `{line}`")));
        }
    }
    let metric = metric.ok_or_else(|| at(1, "missing metric header"))?;
    let members = members.into_iter().map(|(id, pts, fams)| Hypothesis::new(id, Support::new(pts, fams))).collect();
    ExplicitClass::new(name, metric, members)
}

/// Renders a class back into the text format.
pub fn render_class(class: &ExplicitClass) -> String {
    use super::ClassOracle;
    use itertools::Itertools;
    let mut out = format!("metric {}\nclass {}\n", class.metric(), class.name());
    for h in class.members() {
        out.push_str(&format!("hypothesis {}\n", h.id));
        if !h.support.finite_part().is_empty() {
            out.push_str(&format!("finite: {}\n", h.support.finite_part().iter().join(" ")));
        }
        for f in h.support.families() {
            out.push_str(&format!("family: {f}\n"));
        }
    }
    out
}
