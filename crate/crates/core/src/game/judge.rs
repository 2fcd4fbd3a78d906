use std::fmt;

use super::Transcript;
use crate::players::Move;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    EventuallyCorrect(usize),
    FailsWithinHorizon(Vec<usize>),
    Inconclusive(String),
}

impl Verdict {
    pub fn is_correct(&self) -> bool {
        matches!(self, Verdict::EventuallyCorrect(_))
    }

    pub fn is_failure(&self) -> bool {
        matches!(self, Verdict::FailsWithinHorizon(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::EventuallyCorrect(t) => write!(f, "eventually_correct(t*={t})"),
            Verdict::FailsWithinHorizon(e) => {
                write!(f, "fails_within_horizon(errors={},last={})", e.len(), e.last().copied().unwrap_or(0))
            }
            Verdict::Inconclusive(why) => write!(f, "inconclusive({why})"),
        }
    }
}

/// Finite-horizon evidence rule for "in the limit": an error inside the last
/// `tail_num/tail_den` of the horizon fails; a clean suffix of at least
/// `clean_num/clean_den` of the horizon succeeds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct JudgePolicy {
    pub tail_num: usize,
    pub tail_den: usize,
    pub clean_num: usize,
    pub clean_den: usize,
}

impl Default for JudgePolicy {
    fn default() -> Self {
        JudgePolicy { tail_num: 1, tail_den: 4, clean_num: 1, clean_den: 2 }
    }
}

pub fn judge_limit(tr: &Transcript) -> Verdict {
    judge_limit_with(tr, JudgePolicy::default())
}

/// Abstaining counts as an error once any emission has happened.
pub fn judge_limit_with(tr: &Transcript, policy: JudgePolicy) -> Verdict {
    let h = tr.rounds.len();
    if tr.rounds.iter().all(|r| r.mv == Move::Abstain) {
        return Verdict::Inconclusive("no emissions".into());
    }
    let errors: Vec<usize> = tr.rounds.iter().filter(|r| !r.passes()).map(|r| r.t).collect();
    let Some(&last) = errors.last() else { return Verdict::EventuallyCorrect(1) };
    if last * policy.tail_den > h * (policy.tail_den - policy.tail_num) {
        return Verdict::FailsWithinHorizon(errors);
    }
    if (h - last) * policy.clean_den >= h * policy.clean_num {
        Verdict::EventuallyCorrect(last + 1)
    } else {
        Verdict::Inconclusive(format!("clean suffix {} of {h}", h - last))
    }
}

/// Rounds after the last failing round (abstentions count as failures).
pub fn clean_suffix(tr: &Transcript) -> usize {
    let h = tr.rounds.len();
    tr.rounds.iter().rposition(|r| !r.passes()).map_or(h, |i| h - i - 1)
}

/// No clean suffix longer than half the horizon.
pub fn defeated(tr: &Transcript) -> bool {
    clean_suffix(tr) * 2 <= tr.rounds.len()
}

fn judge_from_threshold(tr: &Transcript, d: usize) -> Verdict {
    let Some(t0) = tr.cover_profile.iter().position(|&v| v >= d).map(|i| i + 1) else {
        return Verdict::Inconclusive(format!("cover never reaches {d}"));
    };
    let errors: Vec<usize> = tr.rounds.iter().filter(|r| r.t >= t0 && !r.passes()).map(|r| r.t).collect();
    if errors.is_empty() {
        Verdict::EventuallyCorrect(t0)
    } else {
        Verdict::FailsWithinHorizon(errors)
    }
}

/// Every round from the first one whose prefix needs `d_star` balls must pass.
pub fn judge_uniform(tr: &Transcript, d_star: usize) -> Verdict {
    judge_from_threshold(tr, d_star)
}

/// As `judge_uniform`, with the committed hypothesis's own threshold.
pub fn judge_nonuniform(tr: &Transcript, d_h: usize) -> Verdict {
    judge_from_threshold(tr, d_h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{GameConfig, Round};
    use crate::metric_core::{Metric, Point, Scalar};

    fn transcript(flags: &[Option<bool>], cover: Vec<usize>) -> Transcript {
        let rounds = flags
            .iter()
            .enumerate()
            .map(|(i, f)| Round {
                t: i + 1,
                revealed: Point::real(i as i64),
                mv: if f.is_some() { Move::Emit(Point::real(-1)) } else { Move::Abstain },
                member_ok: *f,
                novel_ok: f.map(|_| true),
                scored: f.is_some(),
            })
            .collect();
        Transcript {
            config: GameConfig::new(Scalar::one(), Scalar::one(), Scalar::one(), flags.len()),
            class: "c".into(),
            metric: Metric::Abs,
            centers: vec![],
            generator: "g".into(),
            adversary: "a".into(),
            committed: "h".into(),
            rounds,
            cover_profile: cover,
            uus: "override".into(),
            notes: vec![],
        }
    }

    #[test]
    fn limit_examples() {
        let mut f = vec![Some(true); 100];
        for x in &mut f[..3] {
            *x = Some(false);
        }
        assert_eq!(judge_limit(&transcript(&f, vec![1; 100])), Verdict::EventuallyCorrect(4));
        let alt: Vec<Option<bool>> = (0..100).map(|i| Some(i % 2 == 0)).collect();
        assert!(judge_limit(&transcript(&alt, vec![1; 100])).is_failure());
        assert!(matches!(judge_limit(&transcript(&[None; 10], vec![1; 10])), Verdict::Inconclusive(_)));
        let mut mid = vec![Some(true); 100];
        mid[60] = Some(false);
        assert!(matches!(judge_limit(&transcript(&mid, vec![1; 100])), Verdict::Inconclusive(_)));
    }

    #[test]
    fn clean_suffix_counts_tail() {
        let f = [Some(true), None, Some(true), Some(true)];
        assert_eq!(clean_suffix(&transcript(&f, vec![1; 4])), 2);
        assert!(defeated(&transcript(&f, vec![1; 4])));
        assert_eq!(clean_suffix(&transcript(&[Some(true); 3], vec![1; 3])), 3);
    }

    #[test]
    fn threshold_examples() {
        let f = [None, Some(false), Some(true), Some(true)];
        assert_eq!(judge_uniform(&transcript(&f, vec![1, 1, 2, 2]), 2), Verdict::EventuallyCorrect(3));
        assert!(judge_uniform(&transcript(&f, vec![1, 2, 2, 2]), 2).is_failure());
        assert!(matches!(judge_uniform(&transcript(&f, vec![1, 1, 1, 1]), 5), Verdict::Inconclusive(_)));
        let g = [None, None, Some(true)];
        assert!(judge_nonuniform(&transcript(&g, vec![1, 2, 2]), 2).is_failure());
    }
}
