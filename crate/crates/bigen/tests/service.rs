use std::io::{BufRead, BufReader};
use std::net::SocketAddr;
use std::process::{Command, Stdio};
use std::time::Duration;

use bigen::report::{self, AnalyzeOptions};
use bigen::service::{self, ServiceConfig};
use bigen_core::{Bigraph, Modality};
use futures::{SinkExt, StreamExt};
use serde_json::{json, Value};
use tokio::net::TcpStream;
use tokio_tungstenite::tungstenite::Message;
use tokio_tungstenite::{connect_async, MaybeTlsStream, WebSocketStream};

type Ws = WebSocketStream<MaybeTlsStream<TcpStream>>;

async fn start(config: ServiceConfig) -> SocketAddr {
    let (addr, server) = service::bind("127.0.0.1:0".parse().unwrap(), config).await.unwrap();
    tokio::spawn(server);
    addr
}

async fn open(addr: SocketAddr, body: Value) -> (reqwest::StatusCode, Value) {
    let resp = reqwest::Client::new().post(format!("http://{addr}/sessions")).json(&body).send().await.unwrap();
    (resp.status(), resp.json().await.unwrap())
}

async fn get(addr: SocketAddr, path: &str) -> (reqwest::StatusCode, Value) {
    let resp = reqwest::get(format!("http://{addr}{path}")).await.unwrap();
    (resp.status(), resp.json().await.unwrap())
}

async fn connect(addr: SocketAddr, id: &str) -> Ws {
    connect_async(format!("ws://{addr}/sessions/{id}/ws")).await.unwrap().0
}

/// Next JSON message, or `None` once the server closes.
async fn next(ws: &mut Ws) -> Option<Value> {
    loop {
        let frame = tokio::time::timeout(Duration::from_secs(20), ws.next()).await.expect("message in time")?;
        match frame.ok()? {
            Message::Text(t) => return Some(serde_json::from_str(&t).unwrap()),
            Message::Close(_) => return None,
            _ => continue,
        }
    }
}

/// Errors travel on the sender's own channel, so snapshots already in the
/// broadcast queue may arrive around them.
async fn next_error(ws: &mut Ws) -> Value {
    loop {
        let msg = next(ws).await.expect("error reply");
        if msg["type"] == "error" {
            return msg;
        }
        assert_eq!(msg["type"], "snapshot");
    }
}

async fn send(ws: &mut Ws, v: Value) {
    ws.send(Message::Text(v.to_string().into())).await.unwrap();
}

fn applet(iterations: u64) -> Value {
    json!({"m": 10, "T": iterations, "p": 0.5, "u": 3, "v": 3, "alpha": 0.5, "beta": 0.5, "b": 0.5})
}

fn check_snapshot(s: &Value, m: u64) {
    assert_eq!(s["type"], "snapshot");
    let c = &s["counts"];
    assert_eq!(c["users"].as_u64().unwrap() + c["items"].as_u64().unwrap(), 2 * m + s["t"].as_u64().unwrap());
}

#[tokio::test(flavor = "multi_thread")]
async fn steering_round_trip() {
    let addr = start(ServiceConfig::default()).await;
    let (status, opened) = open(addr, json!({"params": applet(2000), "seed": 7, "snapshot_every": 10})).await;
    assert_eq!(status, 201);
    let first = &opened["snapshot"];
    assert_eq!(first["counts"], json!({"users": 10, "items": 10, "edges": 10}));
    assert_eq!(first["histograms"]["user"]["degrees"], json!([[1, 10]]));
    let id = opened["id"].as_str().unwrap();

    let mut ws = connect(addr, id).await;
    let hello = next(&mut ws).await.unwrap();
    assert_eq!((hello["seq"].as_u64(), hello["t"].as_u64()), (Some(0), Some(0)));

    send(&mut ws, json!({"type": "control", "action": "start"})).await;
    let mut last_seq = 0;
    loop {
        let s = next(&mut ws).await.unwrap();
        check_snapshot(&s, 10);
        assert!(s["seq"].as_u64().unwrap() > last_seq);
        last_seq = s["seq"].as_u64().unwrap();
        if s["t"].as_u64().unwrap() >= 30 {
            break;
        }
    }
    send(&mut ws, json!({"type": "param_update", "patch": {"alpha": 0.9}, "client_tag": "slider-1"})).await;
    let mut acked_at = None;
    let mut echoed = false;
    while !echoed {
        let msg = next(&mut ws).await.expect("stream continues");
        match msg["type"].as_str().unwrap() {
            "ack" => {
                assert_eq!(msg["client_tag"], "slider-1");
                assert_eq!(msg["params"]["alpha"], 0.9);
                acked_at = Some(msg["applied_at_t"].as_u64().unwrap());
            }
            "snapshot" => {
                check_snapshot(&msg, 10);
                assert!(msg["seq"].as_u64().unwrap() > last_seq);
                last_seq = msg["seq"].as_u64().unwrap();
                if let Some(t) = acked_at {
                    assert!(msg["t"].as_u64().unwrap() >= t);
                    echoed = msg["params"]["alpha"] == 0.9;
                }
            }
            other => panic!("unexpected {other}: {msg}"),
        }
    }
    assert!(acked_at.unwrap() >= 30);

    // m is fixed for the session's lifetime
    send(&mut ws, json!({"type": "control", "action": "pause"})).await;
    send(&mut ws, json!({"type": "param_update", "patch": {"m": 5}, "client_tag": "bad"})).await;
    let msg = next_error(&mut ws).await;
    assert_eq!((msg["code"].as_str(), msg["field"].as_str()), (Some("invalid_params"), Some("m")));
    assert_eq!(msg["client_tag"], "bad");
    send(&mut ws, json!({"type": "nonsense"})).await;
    assert_eq!(next_error(&mut ws).await["code"], "bad_message");
    send(&mut ws, json!({"type": "control", "action": "set_speed", "speed": -1})).await;
    assert_eq!(next_error(&mut ws).await["code"], "bad_message");
}

#[tokio::test(flavor = "multi_thread")]
async fn pulls_match_snapshots() {
    let addr = start(ServiceConfig::default()).await;
    let (_, opened) = open(addr, json!({"params": applet(30), "seed": 3, "snapshot_every": 1000})).await;
    let id = opened["id"].as_str().unwrap().to_string();
    let mut ws = connect(addr, &id).await;
    next(&mut ws).await.unwrap();
    send(&mut ws, json!({"type": "control", "action": "start"})).await;
    let done = loop {
        let s = next(&mut ws).await.unwrap();
        if s["state"]["finished"] == true {
            break s;
        }
    };
    assert_eq!(done["t"], 30);
    assert_eq!(done["state"]["running"], false);

    let (status, edges) = get(addr, &format!("/sessions/{id}/edges")).await;
    assert_eq!(status, 200);
    assert_eq!(edges["t"], 30);
    let mut g = Bigraph::empty();
    for _ in 0..edges["users"].as_u64().unwrap() {
        g.add_node(Modality::User);
    }
    for _ in 0..edges["items"].as_u64().unwrap() {
        g.add_node(Modality::Item);
    }
    for e in edges["edges"].as_array().unwrap() {
        g.add_edge(e[0].as_u64().unwrap() as usize, e[1].as_u64().unwrap() as usize).unwrap();
    }
    assert_eq!(g.edge_count() as u64, done["counts"]["edges"].as_u64().unwrap());
    assert_eq!(g.user_count() + g.item_count(), 50);

    // small graphs are not sampled, so the snapshot equals the exact report
    let rep = report::analyze(&g, None, None, &AnalyzeOptions::default()).unwrap();
    assert_eq!(done["sampled"], false);
    let close = |v: &Value, x: f64| (v.as_f64().unwrap() - x).abs() < 1e-9;
    assert!(close(&done["neighborhood"]["mean_similar_users"], rep.neighborhood.mean_similar_users));
    assert!(close(&done["neighborhood"]["mean_neighbor_items"], rep.neighborhood.mean_neighbor_items));
    assert_eq!(done["blcc"]["user"]["defined"].as_u64().unwrap() as usize, rep.blcc.user.defined);

    let (status, hist) = get(addr, &format!("/sessions/{id}/histogram")).await;
    assert_eq!(status, 200);
    assert_eq!(serde_json::to_value(&rep.histograms.user).unwrap(), hist["user"]);
}

#[tokio::test(flavor = "multi_thread")]
async fn rejections_and_limits() {
    let addr = start(ServiceConfig { max_sessions: 2, snapshot_every: 100 }).await;
    let (status, err) = open(addr, json!({"params": {"p": 1.2}})).await;
    assert_eq!(status, 422);
    assert_eq!((err["type"].as_str(), err["field"].as_str()), (Some("error"), Some("p")));

    let (status, _) = open(addr, json!({})).await;
    assert_eq!(status, 201);
    let (status, big) = open(addr, json!({"params": {"m": 3000, "T": 0}})).await;
    assert_eq!(status, 201);
    let (status, err) = open(addr, json!({})).await;
    assert_eq!(status, 503);
    assert_eq!(err["code"], "too_many_sessions");

    let big_id = big["id"].as_str().unwrap();
    let (status, err) = get(addr, &format!("/sessions/{big_id}/edges")).await;
    assert_eq!(status, 413);
    assert_eq!(err["code"], "too_large");
    let (status, _) = get(addr, "/sessions/999/histogram").await;
    assert_eq!(status, 404);

    let resp = reqwest::Client::new().delete(format!("http://{addr}/sessions/{big_id}")).send().await.unwrap();
    assert_eq!(resp.status(), 204);
    let (_, health) = get(addr, "/health").await;
    assert_eq!((health["status"].as_str(), health["sessions"].as_u64()), (Some("ok"), Some(1)));

    let mut ws = connect(addr, "999").await;
    let msg = next(&mut ws).await.unwrap();
    assert_eq!((msg["type"].as_str(), msg["code"].as_str()), (Some("error"), Some("unknown_session")));
    assert!(next(&mut ws).await.is_none());
}

#[tokio::test(flavor = "multi_thread")]
async fn sessions_are_independent() {
    let addr = start(ServiceConfig::default()).await;
    let body = json!({"params": applet(500), "seed": 11, "snapshot_every": 500});
    let (_, a) = open(addr, body.clone()).await;
    let (_, b) = open(addr, body).await;
    let mut wa = connect(addr, a["id"].as_str().unwrap()).await;
    let mut wb = connect(addr, b["id"].as_str().unwrap()).await;
    next(&mut wa).await.unwrap();
    next(&mut wb).await.unwrap();
    send(&mut wa, json!({"type": "control", "action": "start"})).await;
    let ra = next(&mut wa).await.unwrap();
    assert_eq!(ra["t"], 500);
    // b never started
    let (_, hb) = get(addr, &format!("/sessions/{}/histogram", b["id"].as_str().unwrap())).await;
    assert_eq!(hb["t"], 0);
    send(&mut wb, json!({"type": "control", "action": "start"})).await;
    let rb = next(&mut wb).await.unwrap();
    // same seed and parameters, separate streams: same graph statistics
    assert_eq!(ra["counts"], rb["counts"]);
    assert_eq!(ra["histograms"], rb["histograms"]);
}

#[tokio::test(flavor = "multi_thread")]
async fn throttled_speed() {
    let addr = start(ServiceConfig::default()).await;
    let (_, opened) = open(addr, json!({"params": applet(100_000), "snapshot_every": 10})).await;
    let mut ws = connect(addr, opened["id"].as_str().unwrap()).await;
    next(&mut ws).await.unwrap();
    send(&mut ws, json!({"type": "control", "action": "set_speed", "speed": 200.0})).await;
    send(&mut ws, json!({"type": "control", "action": "start"})).await;
    let started = std::time::Instant::now();
    let mut t = 0;
    while t < 100 {
        let s = next(&mut ws).await.unwrap();
        t = s["t"].as_u64().unwrap();
        assert_eq!(s["speed"], 200.0);
    }
    // 100 iterations at 200 per second take about half a second
    assert!(started.elapsed() >= Duration::from_millis(300), "{:?}", started.elapsed());
}

#[test]
fn serve_subcommand_listens() {
    let mut child = Command::new(env!("CARGO_BIN_EXE_bigen"))
        .args(["serve", "--port", "0", "--max-sessions", "3", "--snapshot-every", "50"])
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut line = String::new();
    BufReader::new(child.stdout.take().unwrap()).read_line(&mut line).unwrap();
    let url = line.trim().strip_prefix("listening on ").expect("address line").to_string();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let health: Value = rt.block_on(async { reqwest::get(format!("{url}/health")).await.unwrap().json().await.unwrap() });
    child.kill().unwrap();
    child.wait().unwrap();
    assert_eq!(health["max_sessions"], 3);
}
