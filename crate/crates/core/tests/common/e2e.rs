//! A live HTTP service on a loopback port.

use std::net::SocketAddr;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use qobj_emu::backend::Registry;
use qobj_emu::service::{http, Service, ServiceConfig};
use serde_json::Value;
use tokio::sync::oneshot;

use super::criteria::registry;
use super::fixtures;

pub struct Server {
    pub base: String,
    pub svc: Arc<Service>,
    stop: Option<oneshot::Sender<()>>,
    thread: Option<JoinHandle<()>>,
}

impl Server {
    pub fn start(data_dir: &Path, workers: usize) -> Server {
        Server::with_registry(registry().clone(), data_dir, workers)
    }

    pub fn with_registry(reg: Registry, data_dir: &Path, workers: usize) -> Server {
        let cfg = ServiceConfig { data_dir: Some(data_dir.to_path_buf()), workers };
        let svc = Service::start(reg, &cfg).expect("service starts");
        let (addr_tx, addr_rx) = std::sync::mpsc::channel::<SocketAddr>();
        let (stop, stop_rx) = oneshot::channel::<()>();
        let s = svc.clone();
        let thread = thread::spawn(move || {
            let rt = tokio::runtime::Builder::new_current_thread().enable_all().build().unwrap();
            rt.block_on(async move {
                let listener = tokio::net::TcpListener::bind("127.0.0.1:0").await.unwrap();
                addr_tx.send(listener.local_addr().unwrap()).unwrap();
                http::serve(listener, s, async {
                    let _ = stop_rx.await;
                })
                .await
                .unwrap();
            });
        });
        let addr = addr_rx.recv_timeout(Duration::from_secs(10)).expect("server bound");
        Server { base: format!("http://{addr}"), svc, stop: Some(stop), thread: Some(thread) }
    }

    pub fn url(&self, path: &str) -> String {
        format!("{}{path}", self.base)
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        if let Some(s) = self.stop.take() {
            let _ = s.send(());
        }
        if let Some(t) = self.thread.take() {
            let _ = t.join();
        }
    }
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder().http_status_as_error(false).build().into()
}

/// Status code and body text.
pub fn get(url: &str) -> (u16, String) {
    let mut r = agent().get(url).call().expect("request sent");
    let code = r.status().as_u16();
    (code, r.body_mut().read_to_string().unwrap_or_default())
}

pub fn post(url: &str, body: &[u8]) -> (u16, String) {
    let mut r = agent().post(url).header("content-type", "application/json").send(body).expect("request sent");
    let code = r.status().as_u16();
    (code, r.body_mut().read_to_string().unwrap_or_default())
}

pub fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("not JSON ({e}): {text}"))
}

/// Polls until the job reaches a terminal state.
pub fn wait_terminal(srv: &Server, id: &str, limit: Duration) -> Result<String, String> {
    let start = Instant::now();
    loop {
        let (code, body) = get(&srv.url(&format!("/v1/jobs/{id}/status")));
        if code != 200 {
            return Err(format!("status returned {code}: {body}"));
        }
        let st = json(&body)["status"].as_str().unwrap_or_default().to_string();
        if matches!(st.as_str(), "DONE" | "ERROR" | "CANCELLED") {
            return Ok(st);
        }
        if start.elapsed() > limit {
            return Err(format!("job {id} still {st} after {limit:?}"));
        }
        thread::sleep(Duration::from_millis(5));
    }
}

/// Submits the Bell listing over HTTP and replays it through the CLI with
/// the seed, job id and date the service recorded.
pub fn bell_over_http_matches_cli() -> Result<String, String> {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let listing = fixtures().join("listings/25_bell_qobj.json");
    let body = std::fs::read(&listing).map_err(|e| e.to_string())?;

    let start = Instant::now();
    let srv = Server::start(&dir.path().join("data"), 1);
    let (code, text) = post(&srv.url("/v1/backends/ibmqx2/jobs"), &body);
    if code != 201 {
        return Err(format!("submit returned {code}: {text}"));
    }
    let id = json(&text)["job_id"].as_str().ok_or("no job_id")?.to_string();
    let st = wait_terminal(&srv, &id, Duration::from_secs(2))?;
    if st != "DONE" {
        return Err(format!("job ended {st}"));
    }
    let (code, served) = get(&srv.url(&format!("/v1/jobs/{id}/result")));
    if code != 200 {
        return Err(format!("result returned {code}: {served}"));
    }
    let elapsed = start.elapsed();
    drop(srv);

    let v = json(&served);
    let seed = v["results"][0]["seed"].as_u64().ok_or("result has no seed")?;
    let date = v["date"].as_str().ok_or("result has no date")?;
    let out = dir.path().join("cli.json");
    let status = Command::new(env!("CARGO_BIN_EXE_qobj-emu"))
        .arg("run")
        .arg(&listing)
        .args(["--backend", "ibmqx2", "--seed", &seed.to_string(), "--job-id", &id, "--date", date])
        .arg("--out")
        .arg(&out)
        .status()
        .map_err(|e| e.to_string())?;
    if !status.success() {
        return Err(format!("cli exited {status}"));
    }
    let local = std::fs::read(&out).map_err(|e| e.to_string())?;
    if local != served.as_bytes() {
        return Err(format!(
            "bytes differ\nservice: {served}\ncli:     {}",
            String::from_utf8_lossy(&local)
        ));
    }
    if elapsed >= Duration::from_secs(2) {
        return Err(format!("service round trip took {elapsed:?}"));
    }
    Ok(format!("{} identical bytes, service round trip {elapsed:.0?}", local.len()))
}
