use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_genlab"));
    c.env_remove("GENLAB_BUDGET");
    c
}

fn tmp(name: &str, contents: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, contents).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn rows(o: &Output) -> Vec<String> {
    stdout(o).lines().filter(|l| l.starts_with("row ")).map(String::from).collect()
}

const EVENS_MULT3: &str = "metric discrete\nclass evens_mult3\nhypothesis evens\nfamily: lattice kind=atom step=2 offset=0 ray\nhypothesis mult3\nfamily: lattice kind=atom step=3 offset=0 ray\n";

#[test]
fn cover_examples() {
    let p = tmp("line.txt", "0\nreal:3\nreal:6\n");
    let o = run(&["cover", p.to_str().unwrap(), "--radius", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(rows(&o)[0].ends_with("value=3"), "{}", stdout(&o));

    let e = tmp("empty.txt", "");
    let o = run(&["cover", e.to_str().unwrap(), "--radius", "1"]);
    assert!(rows(&o)[0].ends_with("value=0"));

    let a = tmp("atoms.txt", "metric discrete\natom:1\natom:2\natom:3\natom:4\natom:5\n");
    for mode in ["exact", "greedy"] {
        let o = run(&["cover", a.to_str().unwrap(), "--radius", "1/2", "--mode", mode]);
        assert!(rows(&o)[0].ends_with("value=5"));
    }
}

#[test]
fn cover_parse_error_names_the_line() {
    let p = tmp("bad.txt", "real:1\nreal:x\n");
    let o = run(&["cover", p.to_str().unwrap(), "--radius", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
}

#[test]
fn dim_examples() {
    let c = tmp("evens_mult3.txt", EVENS_MULT3);
    let o = run(&["dim", c.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("summary dimension=finite(0)"), "{}", stdout(&o));

    let ground: String = (1..=6).map(|k| format!("svec:{k}=3/5:sqrt2half\n")).collect();
    let g = tmp("b5_ground.txt", &ground);
    let o = run(&[
        "dim", "fixture:two_hypotheses", "--mode", "brute", "--ground", g.to_str().unwrap(), "--max-len", "6",
        "--eps", "3/10", "--eps-prime", "3/5",
    ]);
    assert!(stdout(&o).contains("dimension=lower_bound(6,budget=6)"), "{}", stdout(&o));

    let o = run(&["dim", "fixture:l2_case1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("formula requires explicit class"));
}

#[test]
fn play_writes_transcript_and_verdicts() {
    let t = tmp("t400.txt", "");
    let o = run(&[
        "play", "fixture:prime_reals", "--eps", "1/2", "--eps-prime", "1", "--horizon", "400", "--generator",
        "gen:limit", "--adversary", "adv:obligated", "--transcript", t.to_str().unwrap(), "--expect", "correct",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(rows(&o)[0].contains("verdict=eventually_correct"));
    let text = std::fs::read_to_string(&t).unwrap();
    assert_eq!(text.lines().filter(|l| l.starts_with("round ")).count(), 400);

    let o = run(&[
        "play", "fixture:prime_reals", "--eps", "1", "--eps-prime", "1", "--horizon", "200", "--generator",
        "gen:fixture", "--adversary", "adv:staged_trap", "--transcript", t.to_str().unwrap(), "--expect", "fails",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));

    let o = run(&[
        "play", "fixture:prime_reals", "--eps", "1", "--eps-prime", "1", "--horizon", "200", "--generator",
        "gen:fixture", "--adversary", "adv:staged_trap", "--transcript", t.to_str().unwrap(), "--expect", "correct",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn play_horizon_zero_is_empty_and_inconclusive() {
    let t = tmp("t0.txt", "");
    let c = tmp("evens_mult3_b.txt", EVENS_MULT3);
    let o = run(&[
        "play", c.to_str().unwrap(), "--r", "1/2", "--horizon", "0", "--generator", "gen:erm_search", "--adversary",
        "adv:enumeration target=evens", "--transcript", t.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(rows(&o)[0].contains("verdict=inconclusive"));
    let text = std::fs::read_to_string(&t).unwrap();
    assert!(!text.lines().any(|l| l.starts_with("round ")));
}

#[test]
fn play_registry_miss_is_an_input_error() {
    let t = tmp("tmiss.txt", "");
    let o = run(&[
        "play", "fixture:prime_reals", "--generator", "gen:nope", "--adversary", "adv:obligated", "--transcript",
        t.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tournament_is_sorted_and_reproducible() {
    let c = tmp("evens_mult3_c.txt", EVENS_MULT3);
    let args = [
        "tournament", c.to_str().unwrap(), "--r", "1/2", "--horizon", "30", "--seeds", "3", "--generator",
        "gen:uniform d_star=1", "--generator", "gen:erm_search", "--adversary", "adv:enumeration target=mult3 window=4",
        "--adversary", "adv:enumeration target=evens window=2",
    ];
    let a = run(&args);
    let b = bin().args(args).env("RAYON_NUM_THREADS", "1").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let keys: Vec<String> = rows(&a).iter().map(|r| r.split_whitespace().nth(1).unwrap().to_string()).collect();
    assert_eq!(keys.len(), 12);
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert!(stdout(&a).contains("summary games=12 eventually_correct=12"), "{}", stdout(&a));
}

#[test]
fn budget_comes_from_the_environment() {
    let o = bin().args(["verify", "embedding"]).env("GENLAB_BUDGET", "777").output().unwrap();
    assert!(stdout(&o).contains("budget=777"));
    let o = bin().args(["verify", "embedding", "--budget", "55"]).env("GENLAB_BUDGET", "777").output().unwrap();
    assert!(stdout(&o).contains("budget=55"));
}

#[test]
fn fixture_list_and_show() {
    let o = run(&["fixture", "list"]);
    assert_eq!(rows(&o).len(), 6);
    let o = run(&["fixture", "show", "l2_case2"]);
    assert_eq!(rows(&o).iter().filter(|r| r.starts_with("row regime=")).count(), 4);
    let o = run(&["fixture", "show", "missing"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn verify_reports_rows_and_exit_codes() {
    let o = run(&["verify", "two_hypotheses"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(rows(&o).iter().all(|r| r.contains("result=pass")));

    let o = run(&["verify", "l2_case2"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(rows(&o).len(), 4);

    let o = run(&["verify", "unknown_fixture"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown fixture"));
}

#[test]
fn out_flag_writes_the_same_report() {
    let out = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli").join("list_report.txt");
    std::fs::create_dir_all(out.parent().unwrap()).unwrap();
    let o = run(&["fixture", "list", "--out", out.to_str().unwrap()]);
    assert!(o.stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), stdout(&run(&["fixture", "list"])));
}
