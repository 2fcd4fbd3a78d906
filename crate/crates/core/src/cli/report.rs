use std::fmt::Write as _;

use sha2::{Digest, Sha256};

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Keeps values on one line: spaces become `_`.
pub fn token(v: impl ToString) -> String {
    let s = v.to_string();
    if s.is_empty() {
        "-".into()
    } else {
        s.replace(char::is_whitespace, "_")
    }
}

/// Line-oriented `key=value` report: header, body rows, summary.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Report {
    command: String,
    config: Vec<(String, String)>,
    inputs: Vec<(String, String)>,
    rows: Vec<Vec<(String, String)>>,
    summary: Vec<(String, String)>,
}

impl Report {
    pub fn new(command: &str) -> Self {
        Report { command: command.into(), ..Default::default() }
    }

    pub fn config(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.config.push((key.into(), token(value)));
        self
    }

    /// Records the digest of an input by label.
    pub fn input(&mut self, label: &str, bytes: &[u8]) -> &mut Self {
        self.inputs.push((token(label), sha256_hex(bytes)));
        self
    }

    pub fn row(&mut self, fields: Vec<(&str, String)>) -> &mut Self {
        self.rows.push(fields.into_iter().map(|(k, v)| (k.to_string(), token(v))).collect());
        self
    }

    pub fn summary(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.summary.push((key.into(), token(value)));
        self
    }

    pub fn rows(&self) -> usize {
        self.rows.len()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "tool=genlab version={} command={}", env!("CARGO_PKG_VERSION"), self.command);
        let join = |kv: &[(String, String)]| kv.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(" ");
        let _ = writeln!(out, "config {}", join(&self.config));
        for (label, digest) in &self.inputs {
            let _ = writeln!(out, "input name={label} sha256={digest}");
        }
        for r in &self.rows {
            let _ = writeln!(out, "row {}", join(r));
        }
        let _ = writeln!(out, "summary {}", join(&self.summary));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digest_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn render_layout() {
        let mut r = Report::new("cover");
        r.config("radius", "1").input("pts.txt", b"").row(vec![("value", "3".into()), ("note", "two words".into())]);
        r.summary("rows", 1);
        let text = r.render();
        let lines: Vec<&str> = text.lines().collect();
        assert!(lines[0].starts_with("tool=genlab version="));
        assert_eq!(lines[1], "config radius=1");
        assert!(lines[2].starts_with("input name=pts.txt sha256=e3b0"));
        assert_eq!(lines[3], "row value=3 note=two_words");
        assert_eq!(lines[4], "summary rows=1");
    }
}
