//! A service on an ephemeral port with a scratch data directory.

#![allow(dead_code)]

use std::net::SocketAddr;
use std::path::Path;
use std::sync::Arc;

use reqwest::{Client, Response, StatusCode};
use serde_json::{json, Value};
use sparc_service::{open, serve_on, AppState, ServiceConfig};
use tokio::net::TcpListener;
use tokio::task::JoinHandle;

pub fn fixture(name: &str) -> String {
    let path = format!("{}/../core/corpus/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub struct Server {
    pub addr: SocketAddr,
    pub client: Client,
    handle: JoinHandle<std::io::Result<()>>,
}

impl Server {
    pub async fn start(config: ServiceConfig) -> Server {
        let state: Arc<AppState> = open(config).expect("store opens");
        let listener = TcpListener::bind("127.0.0.1:0").await.expect("bind");
        let addr = listener.local_addr().unwrap();
        let handle = tokio::spawn(serve_on(listener, state));
        Server {
            addr,
            client: Client::new(),
            handle,
        }
    }

    pub async fn in_dir(dir: &Path) -> Server {
        Server::start(ServiceConfig {
            data_dir: dir.to_path_buf(),
            ..ServiceConfig::default()
        })
        .await
    }

    /// Stops serving and waits for the state to be released.
    pub async fn stop(self) {
        self.handle.abort();
        let _ = self.handle.await;
    }

    pub fn url(&self, path: &str) -> String {
        format!("http://{}{path}", self.addr)
    }

    pub async fn send(&self, method: reqwest::Method, path: &str, token: Option<&str>, body: Option<Value>) -> (StatusCode, Value) {
        let mut req = self.client.request(method, self.url(path));
        if let Some(t) = token {
            req = req.bearer_auth(t);
        }
        if let Some(b) = body {
            req = req.json(&b);
        }
        let resp: Response = req.send().await.expect("request is sent");
        let status = resp.status();
        let text = resp.text().await.unwrap_or_default();
        let value = if text.is_empty() { Value::Null } else { serde_json::from_str(&text).unwrap_or(Value::String(text)) };
        (status, value)
    }

    pub async fn get(&self, path: &str, token: Option<&str>) -> (StatusCode, Value) {
        self.send(reqwest::Method::GET, path, token, None).await
    }

    pub async fn post(&self, path: &str, token: Option<&str>, body: Value) -> (StatusCode, Value) {
        self.send(reqwest::Method::POST, path, token, Some(body)).await
    }

    pub async fn put(&self, path: &str, token: Option<&str>, body: Value) -> (StatusCode, Value) {
        self.send(reqwest::Method::PUT, path, token, Some(body)).await
    }

    pub async fn delete(&self, path: &str, token: Option<&str>) -> (StatusCode, Value) {
        self.send(reqwest::Method::DELETE, path, token, None).await
    }

    /// Registers and logs in, returning the session token.
    pub async fn account(&self, user: &str) -> String {
        let creds = json!({ "username": user, "password": "secret" });
        let (s, _) = self.post("/api/register", None, creds.clone()).await;
        assert_eq!(s, StatusCode::CREATED);
        let (s, body) = self.post("/api/login", None, creds).await;
        assert_eq!(s, StatusCode::OK);
        body["token"].as_str().expect("token").to_string()
    }

    pub async fn run(&self, token: Option<&str>, body: Value) -> (StatusCode, Value) {
        self.post("/api/run", token, body).await
    }
}

/// Every url in a tree response, folders before their contents.
pub fn urls(tree: &Value) -> Vec<String> {
    let mut out = Vec::new();
    for f in tree["folders"].as_array().into_iter().flatten() {
        out.push(f["url"].as_str().unwrap().to_string());
        out.extend(urls(f));
    }
    for f in tree["files"].as_array().into_iter().flatten() {
        out.push(f["url"].as_str().unwrap().to_string());
    }
    out
}
