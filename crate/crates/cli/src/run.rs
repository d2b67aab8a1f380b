use qsync::explorer::{export_dot, export_json, DotOptions};
use qsync::json::{MatrixJson, Sig17};
use qsync::lemmalab::{run_suite, SuiteConfig};
use qsync::syncsearch::{is_synchronizing, minimal_sync_word, n_for_no_sync_up_to, no_sync_certificate};
use qsync::{channel_a, channel_b, explore, ChannelFamilyParam, Error, KrausChannel};
use serde::Serialize;
use serde_json::Value;

use crate::args::{Command, Format};

/// Rendered output of one subcommand.
pub struct Report {
    pub body: String,
    /// False when a certificate or check did not validate.
    pub passed: bool,
    pub summary: String,
}

#[derive(Serialize)]
struct ChannelOut<'a> {
    label: &'a str,
    completeness_defect: Sig17,
    factors: Vec<MatrixJson<'a>>,
}

#[derive(Serialize)]
struct ChannelsOut<'a> {
    n: u32,
    theta: Sig17,
    channels: Vec<ChannelOut<'a>>,
}

#[derive(Serialize)]
struct SyncOut<'a> {
    n: u32,
    word: String,
    tol: Sig17,
    synchronizing: bool,
    image_diameter: Sig17,
    common_image: Option<MatrixJson<'a>>,
}

#[derive(Serialize)]
struct SearchOut {
    n: u32,
    max_len: u64,
    tol: Sig17,
    found: bool,
    word: Option<String>,
    length: Option<usize>,
    words_checked: u64,
}

#[derive(Serialize)]
struct BoundOut {
    l: usize,
    epsilon: Sig17,
    epsilon_prime: Sig17,
    n: u32,
    theta: Sig17,
}

#[derive(Serialize)]
struct CertifyOut {
    n: u32,
    l: usize,
    epsilon: Sig17,
    theoretical_floor: Sig17,
    min_observed_distance: Sig17,
    closest_word: String,
    words_checked: u64,
    validates: bool,
}

/// `{"error": name, "detail": text}`.
#[derive(Serialize)]
pub struct ErrorOut {
    pub error: &'static str,
    pub detail: String,
}

impl From<&Error> for ErrorOut {
    fn from(e: &Error) -> Self {
        Self { error: e.name(), detail: e.to_string() }
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    serde_json::to_string(value).expect("report serializes")
}

/// Top-level `key: value` lines for the text format.
fn to_text(json: &str) -> String {
    let value: Value = serde_json::from_str(json).expect("valid JSON");
    let render = |v: &Value| match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    };
    match value {
        Value::Object(map) => map.iter().map(|(k, v)| format!("{k}: {}\n", render(v))).collect(),
        Value::Array(items) => items.iter().map(|v| format!("{}\n", render(v))).collect(),
        other => format!("{}\n", render(&other)),
    }
}

fn param(n: u32) -> Result<ChannelFamilyParam, Error> {
    ChannelFamilyParam::new(n)
}

fn channel_out(ch: &KrausChannel) -> ChannelOut<'_> {
    ChannelOut {
        label: ch.label(),
        completeness_defect: Sig17(ch.completeness_defect()),
        factors: ch.factors().iter().map(MatrixJson).collect(),
    }
}

pub fn run(command: &Command) -> Result<Report, Error> {
    let format = command.output().format;
    let finish = |json: String, passed: bool, summary: String| Report {
        body: match format {
            Format::Text => to_text(&json),
            _ => json + "\n",
        },
        passed,
        summary,
    };

    match command {
        Command::Channels { n, .. } => {
            let p = param(*n)?;
            let (a, b) = (channel_a(), channel_b(p));
            let out = ChannelsOut {
                n: *n,
                theta: Sig17(p.theta()),
                channels: vec![channel_out(&a), channel_out(&b)],
            };
            Ok(finish(to_json(&out), true, format!("channels: A and B_{n}")))
        }
        Command::SyncCheck { n, word, tol, .. } => {
            let verdict = is_synchronizing(word, param(*n)?, *tol)?;
            let out = SyncOut {
                n: *n,
                word: word.to_string(),
                tol: Sig17(*tol),
                synchronizing: verdict.synchronizing,
                image_diameter: Sig17(verdict.image_diameter),
                common_image: verdict.common_image.as_ref().map(|rho| MatrixJson(rho.mat())),
            };
            let summary = format!("sync-check: {word} synchronizing={}", verdict.synchronizing);
            Ok(finish(to_json(&out), true, summary))
        }
        Command::Search { n, max_len, tol, .. } => {
            let outcome = minimal_sync_word(param(*n)?, *max_len as usize, *tol)?;
            let out = SearchOut {
                n: *n,
                max_len: *max_len,
                tol: Sig17(*tol),
                found: outcome.witness.is_some(),
                word: outcome.witness.as_ref().map(ToString::to_string),
                length: outcome.witness.as_ref().map(|w| w.len()),
                words_checked: outcome.words_checked,
            };
            let summary = format!("search: {} words checked", outcome.words_checked);
            Ok(finish(to_json(&out), true, summary))
        }
        Command::Bound { l, epsilon, .. } => {
            let p = n_for_no_sync_up_to(*l as usize, *epsilon)?;
            let out = BoundOut {
                l: p.l,
                epsilon: Sig17(p.epsilon),
                epsilon_prime: Sig17(p.epsilon_prime),
                n: p.n,
                theta: Sig17(p.theta),
            };
            Ok(finish(to_json(&out), true, format!("bound: n = {}", p.n)))
        }
        Command::Certify { n, l, .. } => {
            let c = no_sync_certificate(*n, *l as usize)?;
            let out = CertifyOut {
                n: c.n,
                l: c.l,
                epsilon: Sig17(c.epsilon),
                theoretical_floor: Sig17(c.theoretical_floor),
                min_observed_distance: Sig17(c.min_observed_distance),
                closest_word: c.closest_word.to_string(),
                words_checked: c.words_checked,
                validates: c.validates(),
            };
            let summary = format!("certify: {} words checked, validates={}", c.words_checked, c.validates());
            Ok(finish(to_json(&out), c.validates(), summary))
        }
        Command::Explore { n, depth, grid, no_self_loops, integer_labels, .. } => {
            let graph = explore(param(*n)?, *depth as usize, *grid)?;
            let summary = format!("explore: {} nodes, {} edges", graph.node_count(), graph.edges.len());
            let body = match format {
                Format::Dot => {
                    let options = DotOptions { self_loops: !no_self_loops, integer_labels: *integer_labels };
                    export_dot(&graph, &options)?
                }
                Format::Json => export_json(&graph) + "\n",
                Format::Text => to_text(&export_json(&graph)),
            };
            Ok(Report { body, passed: true, summary })
        }
        Command::Verify { n, word, s_max, trials, seed, .. } => {
            let config = SuiteConfig { seed: *seed, trials: *trials, n: *n, s_max: *s_max, word: word.clone() };
            let reports = run_suite(&config)?;
            let failures: u64 = reports.iter().map(|r| r.failures).sum();
            let summary = format!("verify: {} checks, {failures} failures", reports.len());
            Ok(finish(to_json(&reports), failures == 0, summary))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::Parser;

    use crate::args::Cli;

    fn run_args(args: &[&str]) -> Result<Report, Error> {
        let cli = Cli::try_parse_from(std::iter::once("qsync").chain(args.iter().copied())).unwrap();
        run(&cli.command)
    }

    fn json(args: &[&str]) -> Value {
        serde_json::from_str(&run_args(args).unwrap().body).unwrap()
    }

    #[test]
    fn sync_check_reports_common_image() {
        let v = json(&["sync-check", "--n", "1", "--word", "ABA"]);
        assert_eq!(v["synchronizing"], true);
        assert!(v["image_diameter"].as_f64().unwrap() <= 1e-12);
        assert_eq!(v["common_image"][1][1][0].as_f64(), Some(1.0));
        assert_eq!(v["common_image"][0][0][0].as_f64(), Some(0.0));
    }

    #[test]
    fn bound_and_search_examples() {
        let v = json(&["bound", "--l", "4", "--epsilon", "0.4"]);
        assert_eq!(v["n"], 63);
        assert_eq!(v["epsilon_prime"].as_f64(), Some(0.025));
        assert_eq!(v["theta"].as_f64(), Some(std::f64::consts::PI / 126.0));

        let v = json(&["search", "--n", "63", "--max-len", "4"]);
        assert_eq!(v["found"], false);
        assert_eq!(v["words_checked"], 30);
    }

    #[test]
    fn failed_certificate_is_not_passed() {
        let report = run_args(&["certify", "--n", "63", "--l", "4"]).unwrap();
        assert!(report.passed);
        assert!(matches!(
            run_args(&["certify", "--n", "2", "--l", "3"]),
            Err(Error::FloorNonpositive { .. })
        ));
    }

    #[test]
    fn text_format_lists_fields() {
        let text = run_args(&["bound", "--l", "1", "--epsilon", "0.4", "--format", "text"]).unwrap().body;
        assert!(text.contains("n: 16\n"));
    }
}
