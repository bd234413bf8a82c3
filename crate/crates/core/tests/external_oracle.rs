use std::io::{BufRead, BufReader, Write};
use std::net::TcpListener;
use std::sync::Arc;
use std::thread;
use std::time::Duration;

use cfgraph::oracle::{EdgeCountThreshold, ExternalOptions, ExternalOracle, OracleError};
use cfgraph::protocol::{parse_request, Request};
use cfgraph::search::run_pipeline;
use cfgraph::*;

/// POSIX sh loop answering hello with ready and classify with `|E| >= 10`.
const SH_THRESHOLD_SHIM: &str = r#"while IFS= read -r line; do
  case "$line" in
    *'"hello"'*) echo '{"type":"ready"}' ;;
    *) m=$(printf '%s' "$line" | tr -cd '[' | wc -c); l=0; [ $((m - 1)) -ge 10 ] && l=1
       echo "{\"type\":\"label\",\"label\":$l}" ;;
  esac
done"#;

fn opts(ms: u64) -> ExternalOptions {
    ExternalOptions {
        timeout: Duration::from_millis(ms),
    }
}

fn twelve_edges(n: usize) -> Graph {
    let u = Arc::new(VertexUniverse::anonymous(n).unwrap());
    Graph::from_indices(u, 0..12)
}

#[test]
fn subprocess_matches_builtin_run_for_run() {
    let e = twelve_edges(10);
    let external: Arc<dyn Classifier> = Arc::new(ExternalOracle::spawn(SH_THRESHOLD_SHIM, 10, opts(5000)).unwrap());
    let builtin: Arc<dyn Classifier> = Arc::new(EdgeCountThreshold { threshold: 10 });
    for seed in 0..5 {
        let cfg = SearchConfig {
            seed,
            eta_phase1: 200,
            eta_phase2: 200,
            ..SearchConfig::default()
        };
        let run = |c: &Arc<dyn Classifier>| {
            let mut s = OracleSession::new(Arc::clone(c));
            run_pipeline(&e, &mut s, &cfg, None).unwrap().record()
        };
        let (a, b) = (run(&external), run(&builtin));
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}

fn serve_tcp<F>(respond: F) -> String
where
    F: Fn(&str) -> Option<String> + Send + 'static,
{
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut out = stream.try_clone().unwrap();
        for line in BufReader::new(stream).lines() {
            let Ok(line) = line else { break };
            match respond(&line) {
                Some(reply) => {
                    if writeln!(out, "{reply}").is_err() {
                        break;
                    }
                }
                None => thread::sleep(Duration::from_secs(5)),
            }
        }
    });
    addr
}

#[test]
fn tcp_loopback_threshold() {
    let addr = serve_tcp(|line| {
        Some(match parse_request(line, Some(8)).unwrap() {
            Request::Hello { .. } => r#"{"type":"ready"}"#.to_string(),
            Request::Classify { edges } => format!(r#"{{"type":"label","label":{}}}"#, (edges.len() >= 10) as u8),
        })
    });
    let oracle = ExternalOracle::connect_tcp(&addr, 8, opts(5000)).unwrap();
    let e = twelve_edges(8);
    assert_eq!(oracle.classify(&e).unwrap(), Label::One);
    assert_eq!(oracle.classify(&Graph::empty(Arc::clone(e.universe()))).unwrap(), Label::Zero);
    assert_eq!(oracle.describe(), format!("tcp:{addr}"));
}

#[test]
fn recorded_transcript_replays_byte_for_byte() {
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data/threshold_transcript.txt")).unwrap();
    let mut exchanges = Vec::new();
    let mut pending = None;
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.is_empty()) {
        if let Some(req) = line.strip_prefix("> ") {
            pending = Some(req.to_string());
        } else if let Some(resp) = line.strip_prefix("< ") {
            exchanges.push((pending.take().unwrap(), resp.to_string()));
        }
    }
    let script = exchanges.clone();
    let (tx, rx) = std::sync::mpsc::channel();
    let listener = TcpListener::bind("127.0.0.1:0").unwrap();
    let addr = listener.local_addr().unwrap().to_string();
    thread::spawn(move || {
        let (stream, _) = listener.accept().unwrap();
        let mut out = stream.try_clone().unwrap();
        let mut lines = BufReader::new(stream).lines();
        for (want, reply) in script {
            let got = lines.next().unwrap().unwrap();
            tx.send((got, want)).unwrap();
            writeln!(out, "{reply}").unwrap();
        }
    });

    let oracle = ExternalOracle::connect_tcp(&addr, 6, opts(5000)).unwrap();
    let u = Arc::new(VertexUniverse::anonymous(6).unwrap());
    let by_threshold = EdgeCountThreshold { threshold: 3 };
    for (request, _) in &exchanges[1..] {
        let Request::Classify { edges } = parse_request(request, Some(6)).unwrap() else {
            panic!("expected classify")
        };
        let g = Graph::from_edges(Arc::clone(&u), edges).unwrap();
        assert_eq!(oracle.classify(&g).unwrap(), by_threshold.classify(&g).unwrap());
    }
    let seen: Vec<(String, String)> = rx.try_iter().collect();
    assert_eq!(seen.len(), exchanges.len());
    for (got, want) in seen {
        assert_eq!(got, want);
    }
}

#[test]
fn label_outside_zero_one_closes_session() {
    let addr = serve_tcp(|line| {
        Some(if line.contains("hello") {
            r#"{"type":"ready"}"#.into()
        } else {
            r#"{"type":"label","label":2}"#.into()
        })
    });
    let oracle = ExternalOracle::connect_tcp(&addr, 5, opts(5000)).unwrap();
    let g = twelve_edges(6);
    let g = Graph::from_indices(Arc::new(VertexUniverse::anonymous(5).unwrap()), g.indices().filter(|&i| i < 10));
    let err = oracle.classify(&g).unwrap_err();
    assert!(matches!(err, OracleError::Protocol(_)), "{err}");
    assert!(oracle.is_closed());
    assert!(oracle.classify(&g).is_err());
}

#[test]
fn error_reply_closes_session() {
    let addr = serve_tcp(|line| {
        Some(if line.contains("hello") {
            r#"{"type":"ready"}"#.into()
        } else {
            r#"{"type":"error","message":"model not loaded"}"#.into()
        })
    });
    let oracle = ExternalOracle::connect_tcp(&addr, 4, opts(5000)).unwrap();
    let g = Graph::empty(Arc::new(VertexUniverse::anonymous(4).unwrap()));
    match oracle.classify(&g) {
        Err(OracleError::Backend(m)) => assert_eq!(m, "model not loaded"),
        other => panic!("{other:?}"),
    }
    assert!(oracle.is_closed());
}

#[test]
fn silent_classifier_times_out() {
    let addr = serve_tcp(|line| line.contains("hello").then(|| r#"{"type":"ready"}"#.to_string()));
    let oracle = ExternalOracle::connect_tcp(&addr, 4, opts(200)).unwrap();
    let g = Graph::empty(Arc::new(VertexUniverse::anonymous(4).unwrap()));
    assert!(matches!(oracle.classify(&g), Err(OracleError::Timeout(_))));
    assert!(oracle.is_closed());
}

#[test]
fn bad_handshake_is_reported() {
    let err = ExternalOracle::spawn("echo not-json", 4, opts(2000)).err().unwrap();
    assert!(matches!(err, OracleError::Handshake(_)), "{err}");
    let err = ExternalOracle::spawn("exit 3", 4, opts(2000)).err().unwrap();
    assert!(matches!(err, OracleError::Handshake(_)), "{err}");
}

#[test]
fn subprocess_timeout_kills_child() {
    let shim = r#"read line; echo '{"type":"ready"}'; sleep 30"#;
    let oracle = ExternalOracle::spawn(shim, 4, opts(300)).unwrap();
    let g = Graph::empty(Arc::new(VertexUniverse::anonymous(4).unwrap()));
    let started = std::time::Instant::now();
    assert!(matches!(oracle.classify(&g), Err(OracleError::Timeout(_))));
    assert!(started.elapsed() < Duration::from_secs(10));
    assert!(oracle.is_closed());
}
