use std::path::Path;

use rayon::prelude::*;

use super::report::{token, Report};
use super::{CliError, CoverMode, DimMode, Expectation, Global, EXIT_MISMATCH, EXIT_OK};
use crate::fixtures::{
    build_fixture_adversary, build_fixture_generator, fixture_class, fixture_spec, verify_fixture, FIXTURES,
};
use crate::game::{clean_suffix, judge_limit, judge_nonuniform, judge_uniform, run_game, CommitPolicy, GameConfig, Transcript};
use crate::hypothesis::{bruteforce_profile, closure_dimension_finite, parse_class, render_class, HypothesisClass};
use crate::metric_core::{covering_number_exact, covering_number_greedy, packing_greedy, parse_points_file, Scalar};
use crate::players::{build_adversary, build_generator, Adversary, Generator, PlayerContext, PlayerSpec};

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::Io { path: path.display().to_string(), msg: e.to_string() })
}

/// A class file, or `fixture:<name>`.
pub(super) struct ClassRef {
    pub label: String,
    pub bytes: Vec<u8>,
    pub fixture: Option<String>,
    pub class: HypothesisClass,
}

pub(super) fn load_class(spec: &str) -> Result<ClassRef, CliError> {
    if let Some(name) = spec.strip_prefix("fixture:") {
        let class = fixture_class(name)?;
        return Ok(ClassRef { label: spec.into(), bytes: spec.as_bytes().to_vec(), fixture: Some(name.into()), class });
    }
    let text = read(Path::new(spec))?;
    let class = HypothesisClass::explicit(parse_class(&text)?);
    Ok(ClassRef { label: spec.into(), bytes: text.into_bytes(), fixture: None, class })
}

fn context(g: &Global, class: &HypothesisClass, seed: u64) -> PlayerContext {
    PlayerContext { class: class.clone(), eps: g.eps.clone(), eps_prime: g.eps_prime.clone(), budget: g.budget, seed }
}

fn generator(c: &ClassRef, spec: &str, ctx: &PlayerContext) -> Result<Box<dyn Generator>, CliError> {
    let spec: PlayerSpec = spec.parse()?;
    if let Some(name) = &c.fixture {
        if let Some(g) = build_fixture_generator(name, &spec, ctx)? {
            return Ok(g);
        }
    }
    Ok(build_generator(&spec, ctx)?)
}

fn adversary(c: &ClassRef, spec: &str, ctx: &PlayerContext) -> Result<Box<dyn Adversary>, CliError> {
    let spec: PlayerSpec = spec.parse()?;
    if let Some(name) = &c.fixture {
        if let Some(a) = build_fixture_adversary(name, &spec, ctx)? {
            return Ok(a);
        }
    }
    Ok(build_adversary(&spec, ctx)?)
}

fn game_config(g: &Global, seed: u64, uus_override: bool) -> GameConfig {
    let mut cfg = GameConfig::new(g.eps.clone(), g.eps_prime.clone(), g.r.clone(), g.horizon);
    cfg.seed = seed;
    cfg.budget = g.budget;
    cfg.uus_override = uus_override;
    cfg
}

fn config_header(r: &mut Report, g: &Global) {
    r.config("eps", &g.eps)
        .config("eps_prime", &g.eps_prime)
        .config("r", &g.r)
        .config("horizon", g.horizon)
        .config("seed", g.seed)
        .config("budget", g.budget);
}

pub(super) fn cover(g: &Global, path: &Path, radii: &[Scalar], mode: CoverMode) -> Result<Report, CliError> {
    let text = read(path)?;
    let (metric, points) = parse_points_file(&text)?;
    let mode_name = format!("{mode:?}").to_lowercase();
    let mut r = Report::new("cover");
    r.config("mode", &mode_name).config("seed", g.seed);
    r.config("metric", metric.as_ref().map_or("none".to_string(), |m| m.to_string()));
    r.input(&path.display().to_string(), text.as_bytes());
    for radius in radii {
        let value = match (&metric, mode) {
            (None, _) => 0,
            (Some(m), CoverMode::Exact) => covering_number_exact(m, &points, radius, &points)?,
            (Some(m), CoverMode::Greedy) => covering_number_greedy(m, &points, radius, &points)?,
            (Some(m), CoverMode::Packing) => packing_greedy(m, &points, radius)?,
        };
        r.row(vec![("radius", radius.to_string()), ("mode", mode_name.clone()), ("value", value.to_string())]);
    }
    r.summary("points", points.len()).summary("rows", radii.len());
    Ok(r)
}

pub(super) fn dim(
    g: &Global,
    class: &str,
    mode: DimMode,
    ground: Option<&Path>,
    max_len: Option<usize>,
) -> Result<Report, CliError> {
    let c = load_class(class)?;
    let mut r = Report::new("dim");
    r.config("eps", &g.eps).config("eps_prime", &g.eps_prime).config("mode", format!("{mode:?}").to_lowercase());
    r.input(&c.label, &c.bytes);
    let result = match mode {
        DimMode::Formula => {
            let explicit =
                c.class.as_explicit().ok_or_else(|| CliError::Input("formula requires explicit class".into()))?;
            closure_dimension_finite(explicit, &g.eps, &g.eps_prime)?
        }
        DimMode::Brute => {
            let (Some(ground), Some(max_len)) = (ground, max_len) else {
                return Err(CliError::Input("brute mode requires --ground and --max-len".into()));
            };
            let text = read(ground)?;
            r.input(&ground.display().to_string(), text.as_bytes());
            r.config("max_len", max_len);
            let (_, points) = parse_points_file(&text)?;
            let rep = bruteforce_profile(&c.class, &g.eps, &g.eps_prime, &points, max_len)?;
            let achieved: Vec<String> = rep.achieved.iter().map(usize::to_string).collect();
            r.summary("achieved", achieved.join(","));
            rep.result
        }
    };
    r.row(vec![("class", c.class.name()), ("result", result.to_string())]);
    r.summary("dimension", result.to_string());
    Ok(r)
}

pub(super) struct PlayOpts {
    pub d_star: Option<usize>,
    pub d_h: Option<usize>,
    pub uus_override: bool,
    pub expect: Option<Expectation>,
}

fn play_one(
    g: &Global,
    c: &ClassRef,
    gen: &str,
    adv: &str,
    seed: u64,
    uus_override: bool,
) -> Result<Transcript, CliError> {
    let ctx = context(g, &c.class, seed);
    let mut gen = generator(c, gen, &ctx)?;
    let mut adv = adversary(c, adv, &ctx)?;
    Ok(run_game(&game_config(g, seed, uus_override), &c.class, adv.as_mut(), gen.as_mut(), CommitPolicy::Deferred)?)
}

fn errors(tr: &Transcript) -> usize {
    tr.rounds.iter().filter(|r| !r.passes()).count()
}

pub(super) fn play(
    g: &Global,
    class: &str,
    gen: &str,
    adv: &str,
    transcript: &Path,
    opts: &PlayOpts,
) -> Result<(Report, i32), CliError> {
    let c = load_class(class)?;
    let tr = play_one(g, &c, gen, adv, g.seed, opts.uus_override)?;
    let text = tr.render();
    std::fs::write(transcript, &text)
        .map_err(|e| CliError::Io { path: transcript.display().to_string(), msg: e.to_string() })?;
    let mut r = Report::new("play");
    config_header(&mut r, g);
    r.config("generator", gen).config("adversary", adv);
    r.input(&c.label, &c.bytes);
    let limit = judge_limit(&tr);
    r.row(vec![("judge", "limit".into()), ("verdict", limit.to_string())]);
    if let Some(d) = opts.d_star {
        r.row(vec![("judge", format!("uniform(d*={d})")), ("verdict", judge_uniform(&tr, d).to_string())]);
    }
    if let Some(d) = opts.d_h {
        r.row(vec![("judge", format!("nonuniform(d_h={d})")), ("verdict", judge_nonuniform(&tr, d).to_string())]);
    }
    r.summary("rounds", tr.rounds.len())
        .summary("errors", errors(&tr))
        .summary("clean_suffix", clean_suffix(&tr))
        .summary("committed", &tr.committed)
        .summary("transcript", transcript.display())
        .summary("transcript_sha256", super::sha256_hex(text.as_bytes()));
    let code = match opts.expect {
        Some(Expectation::Correct) if !limit.is_correct() => EXIT_MISMATCH,
        Some(Expectation::Fails) if !limit.is_failure() => EXIT_MISMATCH,
        _ => EXIT_OK,
    };
    r.summary("expect", opts.expect.map_or("-".into(), |e| format!("{e:?}").to_lowercase()));
    Ok((r, code))
}

pub(super) fn tournament(
    g: &Global,
    class: &str,
    gens: &[String],
    advs: &[String],
    seeds: u64,
    uus_override: bool,
) -> Result<Report, CliError> {
    let c = load_class(class)?;
    let mut games: Vec<(String, &str, &str, u64)> = Vec::new();
    for gen in gens {
        for adv in advs {
            for s in 0..seeds {
                let seed = g.seed + s;
                games.push((format!("{}|{}|{seed}", token(gen), token(adv)), gen, adv, seed));
            }
        }
    }
    games.sort_by(|a, b| a.0.cmp(&b.0));
    let results: Vec<Vec<(&str, String)>> = games
        .par_iter()
        .map(|(key, gen, adv, seed)| match play_one(g, &c, gen, adv, *seed, uus_override) {
            Ok(tr) => vec![
                ("game", key.clone()),
                ("verdict", judge_limit(&tr).to_string()),
                ("errors", errors(&tr).to_string()),
                ("clean_suffix", clean_suffix(&tr).to_string()),
            ],
            Err(e) => vec![("game", key.clone()), ("verdict", "error".into()), ("detail", e.to_string())],
        })
        .collect();
    let mut r = Report::new("tournament");
    config_header(&mut r, g);
    r.config("seeds", seeds);
    r.input(&c.label, &c.bytes);
    let mut counts = [0usize; 4];
    for row in results {
        let v = &row[1].1;
        let slot = if v.starts_with("eventually_correct") {
            0
        } else if v.starts_with("fails") {
            1
        } else if v.starts_with("inconclusive") {
            2
        } else {
            3
        };
        counts[slot] += 1;
        r.row(row);
    }
    r.summary("games", games.len())
        .summary("eventually_correct", counts[0])
        .summary("fails_within_horizon", counts[1])
        .summary("inconclusive", counts[2])
        .summary("errors", counts[3]);
    Ok(r)
}

pub(super) fn fixture_list() -> Report {
    let mut r = Report::new("fixture_list");
    for name in FIXTURES {
        let s = fixture_spec(name).expect("registered");
        r.row(vec![("name", name.into()), ("regimes", s.expected_regimes.len().to_string()), ("summary", s.summary.into())]);
    }
    r.summary("fixtures", FIXTURES.len());
    r
}

pub(super) fn fixture_show(name: &str) -> Result<Report, CliError> {
    let s = fixture_spec(name)?;
    let mut r = Report::new("fixture_show");
    r.config("name", name);
    for (k, v) in &s.params {
        r.row(vec![("param", k.to_string()), ("value", v.clone())]);
    }
    for reg in &s.expected_regimes {
        r.row(vec![
            ("regime", reg.label.into()),
            ("gamma", reg.gamma.to_string()),
            ("gamma_prime", reg.gamma_prime.to_string()),
            ("expected", reg.expected.to_string()),
        ]);
    }
    let class = fixture_class(name)?;
    if let Some(e) = class.as_explicit() {
        r.input("class_text", render_class(e).as_bytes());
    }
    r.summary("class", class.name()).summary("regimes", s.expected_regimes.len());
    Ok(r)
}

pub(super) fn verify(g: &Global, name: &str) -> Result<(Report, i32), CliError> {
    let rows = verify_fixture(name, g.budget)?;
    let mut r = Report::new("verify");
    r.config("fixture", name).config("budget", g.budget);
    let mut failed = 0;
    for row in &rows {
        failed += usize::from(!row.pass);
        r.row(vec![
            ("regime", row.regime.label.into()),
            ("gamma", row.regime.gamma.to_string()),
            ("gamma_prime", row.regime.gamma_prime.to_string()),
            ("expected", row.regime.expected.to_string()),
            ("result", if row.pass { "pass" } else { "fail" }.into()),
            ("observed", row.observed.clone()),
        ]);
    }
    r.summary("rows", rows.len()).summary("passed", rows.len() - failed).summary("failed", failed);
    Ok((r, if failed == 0 { EXIT_OK } else { EXIT_MISMATCH }))
}
