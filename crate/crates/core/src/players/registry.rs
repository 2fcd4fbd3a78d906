use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::hypothesis::{closure_dimension_finite, DimResult, ExplicitClass, HypothesisClass, HypothesisError};
use crate::metric_core::{Point, Scalar};

use super::{Adversary, Enumeration, ErmSearch, Generator, Ladder, Limit, NonUniform, PlayerError, Scripted, Trap, Uniform};

/// `gen:uniform d_star=2` or `adv:staged_trap fixture=prime_reals eps=1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlayerSpec {
    pub role: String,
    pub name: String,
    pub params: BTreeMap<String, String>,
}

impl PlayerSpec {
    pub fn get(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn parse_or<T: FromStr>(&self, key: &str, default: T) -> Result<T, PlayerError> {
        match self.get(key) {
            Some(v) => v.parse().map_err(|_| PlayerError::BadParam(format!("{key}={v}"))),
            None => Ok(default),
        }
    }

    fn parse_opt<T: FromStr>(&self, key: &str) -> Result<Option<T>, PlayerError> {
        self.get(key).map(|v| v.parse().map_err(|_| PlayerError::BadParam(format!("{key}={v}")))).transpose()
    }
}

impl FromStr for PlayerSpec {
    type Err = PlayerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut words = s.split_whitespace();
        let head = words.next().ok_or_else(|| PlayerError::Unknown(s.into()))?;
        let (role, name) = head.split_once(':').ok_or_else(|| PlayerError::Unknown(head.into()))?;
        if role != "gen" && role != "adv" {
            return Err(PlayerError::Unknown(head.into()));
        }
        let mut params = BTreeMap::new();
        for w in words {
            let (k, v) = w.split_once('=').ok_or_else(|| PlayerError::BadParam(w.into()))?;
            params.insert(k.to_string(), v.to_string());
        }
        Ok(PlayerSpec { role: role.into(), name: name.into(), params })
    }
}

impl fmt::Display for PlayerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.role, self.name)?;
        for (k, v) in &self.params {
            write!(f, " {k}={v}")?;
        }
        Ok(())
    }
}

/// What a player is built against.
#[derive(Clone, Debug)]
pub struct PlayerContext {
    pub class: HypothesisClass,
    pub eps: Scalar,
    pub eps_prime: Scalar,
    pub budget: usize,
    pub seed: u64,
}

fn explicit<'a>(ctx: &'a PlayerContext, what: &'static str) -> Result<&'a ExplicitClass, PlayerError> {
    ctx.class.as_explicit().ok_or(PlayerError::Hypothesis(HypothesisError::NeedsExplicit(what)))
}

fn dimension(class: &ExplicitClass, ctx: &PlayerContext) -> Result<usize, PlayerError> {
    match closure_dimension_finite(class, &ctx.eps, &ctx.eps_prime)? {
        DimResult::Finite { d, .. } => Ok(d),
        other => Err(PlayerError::BadParam(format!("closure dimension is {other}; pass d_star"))),
    }
}

/// Generic generators: `uniform [d_star=]`, `nonuniform`, `limit [c=]`, `erm_search`.
pub fn build_generator(spec: &PlayerSpec, ctx: &PlayerContext) -> Result<Box<dyn Generator>, PlayerError> {
    if spec.role != "gen" {
        return Err(PlayerError::Unknown(spec.to_string()));
    }
    let budget = spec.parse_or("budget", ctx.budget)?;
    Ok(match spec.name.as_str() {
        "uniform" => {
            let d_star = match spec.parse_opt("d_star")? {
                Some(d) => d,
                None => dimension(explicit(ctx, "uniform without d_star")?, ctx)? + 1,
            };
            Box::new(Uniform::new(ctx.class.clone(), &ctx.eps, &ctx.eps_prime, d_star, budget))
        }
        "nonuniform" => {
            let ladder = Ladder::prefixes(explicit(ctx, "nonuniform")?, &ctx.eps, &ctx.eps_prime)?;
            Box::new(NonUniform::new(ladder, &ctx.eps, &ctx.eps_prime, budget))
        }
        "limit" => {
            let class = explicit(ctx, "limit")?;
            let mut parts = Vec::new();
            let mut c = 0;
            for h in class.members() {
                let part = class.restrict(&[h.id.as_str()])?;
                c = c.max(dimension(&part, ctx)?);
                parts.push(HypothesisClass::explicit(part));
            }
            let c = spec.parse_or("c", c)?;
            Box::new(Limit::new(parts, c, &ctx.eps, &ctx.eps_prime, budget))
        }
        "erm_search" => Box::new(ErmSearch::new(ctx.class.clone(), &ctx.eps_prime, budget)),
        _ => return Err(PlayerError::Unknown(spec.to_string())),
    })
}

fn parse_points(list: &str) -> Result<Vec<Point>, PlayerError> {
    list.split(',').filter(|s| !s.is_empty()).map(|s| s.parse().map_err(PlayerError::from)).collect()
}

/// Generic adversaries: `enumeration target= [window=] [seed=]`,
/// `scripted points=a,b,... [target=]`, `trap target= [prefix=]`.
pub fn build_adversary(spec: &PlayerSpec, ctx: &PlayerContext) -> Result<Box<dyn Adversary>, PlayerError> {
    if spec.role != "adv" {
        return Err(PlayerError::Unknown(spec.to_string()));
    }
    let target = match spec.get("target") {
        Some(id) => {
            let h = explicit(ctx, "target=")?
                .member(id)
                .ok_or_else(|| PlayerError::BadParam(format!("no member `{id}`")))?;
            Some(Arc::new(h.clone()))
        }
        None => None,
    };
    let need = || target.clone().ok_or_else(|| PlayerError::BadParam("missing target=".into()));
    Ok(match spec.name.as_str() {
        "enumeration" => {
            let window = spec.parse_or("window", 1)?;
            let seed = spec.parse_or("seed", ctx.seed)?;
            let prefix = parse_points(spec.get("prefix").unwrap_or(""))?;
            Box::new(Enumeration::shuffled(need()?, window, seed).with_prefix(prefix))
        }
        "scripted" => {
            let points = parse_points(spec.get("points").ok_or_else(|| PlayerError::BadParam("missing points=".into()))?)?;
            Box::new(Scripted::new(points, target.map(|h| h as _)))
        }
        "trap" => {
            let h = need()?;
            let prefix = spec.parse_or("prefix", 0)?;
            let base = h.support.iter();
            Box::new(
                Trap::new(base, prefix, ctx.class.metric().clone(), ctx.eps_prime.clone(), ctx.budget).with_target(h),
            )
        }
        _ => return Err(PlayerError::Unknown(spec.to_string())),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::parse_class;

    fn ctx() -> PlayerContext {
        let text = "metric abs\nhypothesis evens\nfamily: lattice step=2\nhypothesis mult3\nfamily: lattice step=3\n";
        PlayerContext {
            class: HypothesisClass::explicit(parse_class(text).unwrap()),
            eps: Scalar::new(1, 2),
            eps_prime: Scalar::new(1, 2),
            budget: 100,
            seed: 0,
        }
    }

    #[test]
    fn specs_round_trip() {
        let s: PlayerSpec = "adv:staged_trap fixture=prime_reals eps=1".parse().unwrap();
        assert_eq!(s.role, "adv");
        assert_eq!(s.get("fixture"), Some("prime_reals"));
        assert_eq!(s.to_string().parse::<PlayerSpec>().unwrap(), s);
        assert!("uniform".parse::<PlayerSpec>().is_err());
        assert!("gen:uniform d_star".parse::<PlayerSpec>().is_err());
    }

    #[test]
    fn builds_generic_players() {
        let c = ctx();
        for s in ["gen:uniform", "gen:uniform d_star=2", "gen:nonuniform", "gen:limit", "gen:erm_search"] {
            build_generator(&s.parse().unwrap(), &c).unwrap();
        }
        for s in ["adv:enumeration target=evens window=3", "adv:scripted points=real:0,real:6", "adv:trap target=mult3"] {
            build_adversary(&s.parse().unwrap(), &c).unwrap();
        }
        assert!(matches!(build_generator(&"gen:nope".parse().unwrap(), &c), Err(PlayerError::Unknown(_))));
        assert!(build_adversary(&"adv:enumeration".parse().unwrap(), &c).is_err());
    }
}
