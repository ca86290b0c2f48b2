//! Wire-level tests: a raw TCP client against the running HTTP service.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::net::TcpStream;
use std::sync::Arc;

use covscreen_core::corpus::Label;
use covscreen_leaderboard::{serve, Leaderboard, TrackTruth};

fn truth() -> TrackTruth {
    let mut labels = BTreeMap::new();
    labels.insert("p0".to_string(), Label::Covid);
    labels.insert("p1".to_string(), Label::Covid);
    labels.insert("n0".to_string(), Label::NonCovid);
    labels.insert("n1".to_string(), Label::NonCovid);
    TrackTruth::new(labels).unwrap()
}

const GOOD_SCORES: &str = "p0 0.900000\np1 0.800000\nn0 0.200000\nn1 0.100000\n";

/// Boots the server on an ephemeral port and returns its address.
fn spawn_server() -> (std::net::SocketAddr, tempfile::TempDir) {
    let dir = tempfile::tempdir().unwrap();
    let board = Arc::new(
        Leaderboard::open(truth(), truth(), dir.path().join("journal.ndjson"), 42).unwrap(),
    );
    let (tx, rx) = std::sync::mpsc::channel();
    std::thread::spawn(move || {
        let rt = tokio::runtime::Builder::new_current_thread()
            .enable_io()
            .build()
            .unwrap();
        rt.block_on(async move {
            let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
            tx.send(listener.local_addr().unwrap()).unwrap();
            serve(board, listener).await.unwrap();
        });
    });
    (rx.recv().unwrap(), dir)
}

/// Minimal HTTP/1.1 exchange; returns (status, body).
fn request(
    addr: std::net::SocketAddr,
    method: &str,
    path: &str,
    headers: &[(&str, &str)],
    body: &str,
) -> (u16, String) {
    let mut stream = TcpStream::connect(addr).unwrap();
    let mut req = format!("{method} {path} HTTP/1.1\r\nHost: localhost\r\nConnection: close\r\n");
    for (k, v) in headers {
        req.push_str(&format!("{k}: {v}\r\n"));
    }
    req.push_str(&format!("Content-Length: {}\r\n\r\n{body}", body.len()));
    stream.write_all(req.as_bytes()).unwrap();
    let mut raw = String::new();
    stream.read_to_string(&mut raw).unwrap();
    let status: u16 = raw
        .split_whitespace()
        .nth(1)
        .expect("status line")
        .parse()
        .expect("numeric status");
    let body = raw
        .split_once("\r\n\r\n")
        .map(|(_, b)| b.to_string())
        .unwrap_or_default();
    (status, body)
}

fn json(body: &str) -> serde_json::Value {
    serde_json::from_str(body).unwrap_or_else(|e| panic!("bad JSON {body:?}: {e}"))
}

#[test]
fn full_wire_protocol() {
    let (addr, _dir) = spawn_server();

    // Register.
    let (status, body) = request(
        addr,
        "POST",
        "/teams",
        &[("Content-Type", "application/json")],
        "{\"name\":\"wire\"}",
    );
    assert_eq!(status, 201, "{body}");
    let team = json(&body);
    let token = team["token"].as_str().unwrap().to_string();
    assert_eq!(team["tickets_remaining"], 25);

    // Duplicate name.
    let (status, body) = request(
        addr,
        "POST",
        "/teams",
        &[("Content-Type", "application/json")],
        "{\"name\":\"wire\"}",
    );
    assert_eq!(status, 409);
    assert_eq!(json(&body)["code"], "DUPLICATE_NAME");

    // Submit without a token.
    let (status, body) = request(addr, "POST", "/tracks/test/submissions", &[], GOOD_SCORES);
    assert_eq!(status, 401);
    assert_eq!(json(&body)["code"], "AUTH");

    // Valid submission.
    let (status, body) = request(
        addr,
        "POST",
        "/tracks/test/submissions",
        &[("X-Auth-Token", &token)],
        GOOD_SCORES,
    );
    assert_eq!(status, 200, "{body}");
    let metrics = json(&body);
    assert_eq!(metrics["auc"], 1.0);
    assert_eq!(metrics["tickets_remaining"], 24);

    // Malformed body.
    let (status, body) = request(
        addr,
        "POST",
        "/tracks/test/submissions",
        &[("X-Auth-Token", &token)],
        "p0 not-a-number\n",
    );
    assert_eq!(status, 400);
    assert_eq!(json(&body)["code"], "MALFORMED");

    // Wrong id set.
    let (status, body) = request(
        addr,
        "POST",
        "/tracks/test/submissions",
        &[("X-Auth-Token", &token)],
        "p0 0.900000\np1 0.800000\nn0 0.200000\n",
    );
    assert_eq!(status, 422);
    let err = json(&body);
    assert_eq!(err["code"], "ID_MISMATCH");
    assert!(err["message"].as_str().unwrap().contains("n1"));

    // Unknown track.
    let (status, body) = request(
        addr,
        "POST",
        "/tracks/bogus/submissions",
        &[("X-Auth-Token", &token)],
        GOOD_SCORES,
    );
    assert_eq!(status, 404);
    assert_eq!(json(&body)["code"], "UNKNOWN_TRACK");

    // Leaderboard reflects the single accepted submission.
    let (status, body) = request(addr, "GET", "/tracks/test/leaderboard", &[], "");
    assert_eq!(status, 200);
    let rows = json(&body);
    assert_eq!(rows.as_array().unwrap().len(), 1);
    assert_eq!(rows[0]["best_auc"], 1.0);
    assert_eq!(rows[0]["rank"], 1);
    assert!(rows[0].get("token").is_none(), "token must not leak");

    // Validation board is independent.
    let (_, body) = request(addr, "GET", "/tracks/val/leaderboard", &[], "");
    assert_eq!(json(&body).as_array().unwrap().len(), 0);
}
