use super::{profile, GameError, Transcript};
use crate::hypothesis::Concept;
use crate::metric_core::{in_set_ball, sq_dist, Metric, Point, Scalar, Surd};

/// Novelty flags recomputed at a smaller radius.
pub fn replay_novelty(tr: &Transcript, delta_prime: &Scalar) -> Result<Vec<Option<bool>>, GameError> {
    if delta_prime > &tr.config.eps_prime {
        return Err(GameError::RadiusTooLarge(delta_prime.to_string()));
    }
    novelty_under(tr, &tr.metric, delta_prime)
}

fn novelty_under(tr: &Transcript, metric: &Metric, radius: &Scalar) -> Result<Vec<Option<bool>>, GameError> {
    let revealed = tr.revealed();
    tr.rounds
        .iter()
        .enumerate()
        .map(|(i, r)| match r.mv.point() {
            Some(p) => Ok(Some(!in_set_ball(metric, &revealed[..=i], radius, p)?)),
            None => Ok(None),
        })
        .collect()
}

/// Checks `rho2 <= m * rho1` on every pair of transcript points (with `rho2`
/// the transcript's metric), then recomputes novelty under `rho1` at
/// `eps_prime / m`. Each original novel emission must stay novel.
pub fn replay_metric_transfer(tr: &Transcript, rho1: &Metric, m: &Scalar) -> Result<Vec<Option<bool>>, GameError> {
    if !m.is_positive() {
        return Err(GameError::Config(format!("scale factor {m} must be positive")));
    }
    let mut pts: Vec<Point> = tr.revealed();
    pts.extend(tr.emitted().map(|(_, p)| p.clone()));
    pts.sort();
    pts.dedup();
    let m_sq = m.square();
    for (i, p) in pts.iter().enumerate() {
        for q in &pts[i + 1..] {
            let lhs = sq_dist(&tr.metric, p, q)?;
            let rhs: Surd = sq_dist(rho1, p, q)?.scale(&m_sq);
            if lhs > rhs {
                return Err(GameError::ScaleBound { p: p.to_string(), q: q.to_string() });
            }
        }
    }
    let radius = &tr.config.eps_prime / m;
    let flags = novelty_under(tr, rho1, &radius)?;
    for (r, f) in tr.rounds.iter().zip(&flags) {
        if r.novel_ok == Some(true) && *f != Some(true) {
            return Err(GameError::ScaleBound { p: r.revealed.to_string(), q: format!("{}", r.mv) });
        }
    }
    Ok(flags)
}

/// Cover profile of the transcript's reveals at another radius.
pub fn replay_cover_profile(tr: &Transcript, radius: &Scalar) -> Result<Vec<usize>, GameError> {
    profile(&tr.metric, radius, &tr.centers, &tr.revealed())
}

/// First round whose prefix needs at least `d` balls.
pub fn threshold_round(profile: &[usize], d: usize) -> Option<usize> {
    profile.iter().position(|&v| v >= d).map(|i| i + 1)
}

/// Whether the reveals `eps`-cover the first `truncation` support points of `h`.
pub fn check_cover_obligation(
    tr: &Transcript,
    h: &dyn Concept,
    eps: &Scalar,
    truncation: usize,
) -> Result<bool, GameError> {
    let revealed = tr.revealed();
    for p in h.points().take(truncation) {
        if !in_set_ball(&tr.metric, &revealed, eps, &p)? {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::game::{run_game, tests::evens_mult3, CommitPolicy, GameConfig};
    use crate::hypothesis::{Hypothesis, Support};
    use crate::players::{Enumeration, Scripted, Uniform};

    fn played(horizon: usize) -> (Transcript, Arc<dyn Concept>) {
        let c = evens_mult3();
        let h: Arc<dyn Concept> = Arc::new(c.as_explicit().unwrap().members()[0].clone());
        let half = Scalar::new(1, 2);
        let cfg = GameConfig::new(half.clone(), half.clone(), Scalar::one(), horizon);
        let mut adv = Enumeration::new(h.clone());
        let mut gen = Uniform::new(c.clone(), &half, &half, 1, 100);
        (run_game(&cfg, &c, &mut adv, &mut gen, CommitPolicy::Upfront(h.clone())).unwrap(), h)
    }

    #[test]
    fn novelty_replays() {
        let (tr, _) = played(12);
        let orig: Vec<Option<bool>> = tr.rounds.iter().map(|r| r.novel_ok).collect();
        assert_eq!(replay_novelty(&tr, &Scalar::new(1, 2)).unwrap(), orig);
        let smaller = replay_novelty(&tr, &Scalar::new(1, 4)).unwrap();
        assert!(orig.iter().zip(&smaller).all(|(a, b)| *a != Some(true) || *b == Some(true)));
        assert!(replay_novelty(&tr, &Scalar::one()).is_err());
    }

    #[test]
    fn metric_transfer_identity_and_violation() {
        let (tr, _) = played(8);
        let orig: Vec<Option<bool>> = tr.rounds.iter().map(|r| r.novel_ok).collect();
        assert_eq!(replay_metric_transfer(&tr, &Metric::Abs, &Scalar::one()).unwrap(), orig);
        assert!(matches!(
            replay_metric_transfer(&tr, &Metric::Abs, &Scalar::new(1, 2)),
            Err(GameError::ScaleBound { .. })
        ));
    }

    #[test]
    fn cover_obligation() {
        let (tr, h) = played(9);
        assert!(check_cover_obligation(&tr, h.as_ref(), &Scalar::new(1, 2), 9).unwrap());
        let two = Support::from_points([Point::real(0), Point::real(100)]);
        let c = evens_mult3();
        let half = Scalar::new(1, 2);
        let cfg = GameConfig::new(half.clone(), half.clone(), Scalar::one(), 4);
        let mut adv = Scripted::new(vec![Point::real(0)], None);
        let h2 = Hypothesis::new("two", two);
        let mut gen = Uniform::new(c.clone(), &half, &half, 1, 100);
        let tr = run_game(&cfg, &c, &mut adv, &mut gen, CommitPolicy::Upfront(Arc::new(h2.clone()))).unwrap();
        assert!(!check_cover_obligation(&tr, &h2, &half, 10).unwrap());
        assert_eq!(replay_cover_profile(&tr, &Scalar::int(200)).unwrap(), vec![1; 4]);
        assert_eq!(threshold_round(&[0, 1, 1, 2], 2), Some(4));
    }
}
