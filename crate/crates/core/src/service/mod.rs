//! Job service: submission, a FIFO queue drained by worker threads,
//! cancellation, and result delivery. The HTTP front end lives in [`http`].

pub mod chunk;
pub mod http;
pub mod store;

use std::collections::{HashMap, HashSet, VecDeque};
use std::path::PathBuf;
use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread::JoinHandle;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::Serialize;
use thiserror::Error;

use crate::backend::{Backend, Registry, RunOptions};
use crate::model::validate::Options;
use crate::model::{self, JobState, JobStatus, Mode, ParseError, Qobj, ResultDocument, ValidationReport};
use crate::EngineError;
use store::{JobMeta, Store};

#[derive(Debug, Clone, Default)]
pub struct ServiceConfig {
    /// Persistence root. Jobs live only in memory when unset.
    pub data_dir: Option<PathBuf>,
    /// Worker threads started by [`Service::start`]. Zero leaves the queue
    /// to be drained by hand.
    pub workers: usize,
}

#[derive(Debug, Error)]
pub enum ServiceError {
    #[error("unknown backend {0:?}")]
    UnknownBackend(String),
    #[error("unknown job {0:?}")]
    UnknownJob(String),
    #[error("malformed Qobj: {0}")]
    Malformed(ParseError),
    #[error("Qobj rejected with {} error(s)", .0.errors().count())]
    Rejected(ValidationReport),
    #[error("job {job_id} is {} and has no result", status.as_str())]
    NotReady { job_id: String, status: JobState },
    #[error("{0} not available for this backend")]
    NotAvailable(&'static str),
    #[error("storage: {0}")]
    Storage(String),
}

impl ServiceError {
    pub fn code(&self) -> &'static str {
        match self {
            ServiceError::UnknownBackend(_) => "UnknownBackend",
            ServiceError::UnknownJob(_) => "UnknownJob",
            ServiceError::Malformed(_) => "MalformedQobj",
            ServiceError::Rejected(_) => "RejectedSubmission",
            ServiceError::NotReady { .. } => "NotReady",
            ServiceError::NotAvailable(_) => "NotAvailable",
            ServiceError::Storage(_) => "Storage",
        }
    }
}

fn storage(e: std::io::Error) -> ServiceError {
    ServiceError::Storage(e.to_string())
}

/// Reply to a successful submission.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Submitted {
    pub job_id: String,
    pub status: JobState,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_credits: Option<i64>,
}

struct Job {
    meta: JobMeta,
    qobj: Arc<Qobj>,
    cancel: Arc<AtomicBool>,
    result: Option<Arc<str>>,
}

#[derive(Default)]
struct State {
    jobs: HashMap<String, Job>,
    queue: VecDeque<String>,
    busy: HashSet<String>,
    next_seq: u64,
    shutdown: bool,
}

/// A job that has left the queue and is about to execute.
pub struct Ticket {
    pub job_id: String,
    backend: Arc<Backend>,
    qobj: Arc<Qobj>,
    cancel: Arc<AtomicBool>,
}

impl Ticket {
    /// Runs the engines. Holds no service lock.
    pub fn execute(&self) -> Result<ResultDocument, EngineError> {
        if self.cancel.load(Ordering::Relaxed) {
            return Err(EngineError::Cancelled);
        }
        let opts = RunOptions {
            job_id: self.job_id.clone(),
            date: Some(now_string()),
            seed: None,
            cancel: Some(&self.cancel),
        };
        self.backend.run(&self.qobj, &opts)
    }
}

pub fn now_string() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Secs, true)
}

pub struct Service {
    registry: Arc<Registry>,
    store: Option<Store>,
    state: Mutex<State>,
    wake: Condvar,
    workers: Mutex<Vec<JoinHandle<()>>>,
}

impl std::fmt::Debug for Service {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Service").field("data_dir", &self.store.as_ref().map(Store::root)).finish_non_exhaustive()
    }
}

fn message(meta: &JobMeta, queue: &VecDeque<String>) -> String {
    match meta.status {
        JobState::Queued => {
            let pos = queue.iter().position(|j| *j == meta.job_id).map_or(0, |p| p + 1);
            format!("job is queued at position {pos} of {}", queue.len())
        }
        _ => meta.status_msg.clone(),
    }
}

impl Service {
    /// Builds the service and recovers jobs from `data_dir`. Jobs caught
    /// mid-execution by a restart end in ERROR; queued jobs are queued again.
    pub fn new(registry: Registry, cfg: &ServiceConfig) -> Result<Service, ServiceError> {
        let store = cfg.data_dir.as_deref().map(Store::open).transpose().map_err(storage)?;
        let mut st = State::default();
        if let Some(s) = &store {
            for j in s.load_all().map_err(storage)? {
                let mut meta = j.meta;
                let qobj = match model::parse_qobj(&j.qobj, Mode::Lenient) {
                    Ok(q) => q.value,
                    Err(e) => {
                        tracing::warn!("job {}: stored Qobj unreadable: {e}", meta.job_id);
                        continue;
                    }
                };
                st.next_seq = st.next_seq.max(meta.seq + 1);
                match meta.status {
                    JobState::Initializing | JobState::Running => {
                        meta.status = JobState::Error;
                        meta.status_msg = "interrupted by a service restart".into();
                        meta.finished = Some(Utc::now());
                        s.save_meta(&meta).map_err(storage)?;
                    }
                    JobState::Queued => st.queue.push_back(meta.job_id.clone()),
                    _ => {}
                }
                let result = (meta.status == JobState::Done).then_some(j.result).flatten().map(Arc::from);
                st.jobs.insert(
                    meta.job_id.clone(),
                    Job { meta, qobj: Arc::new(qobj), cancel: Default::default(), result },
                );
            }
        }
        Ok(Service {
            registry: Arc::new(registry),
            store,
            state: Mutex::new(st),
            wake: Condvar::new(),
            workers: Mutex::new(Vec::new()),
        })
    }

    /// [`Service::new`] plus `cfg.workers` worker threads.
    pub fn start(registry: Registry, cfg: &ServiceConfig) -> Result<Arc<Service>, ServiceError> {
        let svc = Arc::new(Service::new(registry, cfg)?);
        for _ in 0..cfg.workers {
            let s = svc.clone();
            let h = std::thread::Builder::new()
                .name("qobj-worker".into())
                .spawn(move || s.worker_loop())
                .map_err(storage)?;
            svc.workers.lock().unwrap().push(h);
        }
        Ok(svc)
    }

    /// Stops the workers after their current job.
    pub fn shutdown(&self) {
        self.lock().shutdown = true;
        self.wake.notify_all();
        let hs: Vec<_> = self.workers.lock().unwrap().drain(..).collect();
        for h in hs {
            let _ = h.join();
        }
    }

    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn persist(&self, meta: &JobMeta) {
        if let Some(s) = &self.store {
            if let Err(e) = s.save_meta(meta) {
                tracing::error!("job {}: cannot save meta: {e}", meta.job_id);
            }
        }
    }

    /// Moves a job along the lifecycle. Illegal moves are refused.
    fn transition(&self, job: &mut Job, next: JobState, msg: impl Into<String>) -> bool {
        if !job.meta.status.can_move_to(next) {
            tracing::error!("job {}: refused {:?} -> {:?}", job.meta.job_id, job.meta.status, next);
            return false;
        }
        job.meta.status = next;
        job.meta.status_msg = msg.into();
        match next {
            JobState::Running => job.meta.started = Some(Utc::now()),
            s if s.is_terminal() => job.meta.finished = Some(Utc::now()),
            _ => {}
        }
        self.persist(&job.meta);
        true
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn backend(&self, name: &str) -> Result<&Arc<Backend>, ServiceError> {
        self.registry.get(name).ok_or_else(|| ServiceError::UnknownBackend(name.into()))
    }

    pub fn submit(&self, backend_name: &str, bytes: &[u8]) -> Result<Submitted, ServiceError> {
        let backend = self.backend(backend_name)?;
        let raw = model::parse::parse_json(bytes).map_err(ServiceError::Malformed)?;
        let q = model::parse_qobj_value(raw.clone(), Mode::Lenient).map_err(ServiceError::Malformed)?;
        let report = backend.validate(&q, &raw, Options::default());
        if report.has_errors() {
            return Err(ServiceError::Rejected(report));
        }
        let qobj = q.value;
        let job_id = uuid::Uuid::new_v4().to_string();
        let mut st = self.lock();
        let meta = JobMeta {
            job_id: job_id.clone(),
            backend_name: backend_name.into(),
            qobj_id: qobj.qobj_id.clone(),
            seq: st.next_seq,
            status: JobState::Queued,
            status_msg: String::new(),
            submitted: Utc::now(),
            started: None,
            finished: None,
            max_credits: qobj.config.max_credits,
            cursor: 0,
        };
        if let Some(s) = &self.store {
            s.create(&meta, bytes).map_err(storage)?;
        }
        st.next_seq += 1;
        let max_credits = meta.max_credits;
        st.jobs.insert(
            job_id.clone(),
            Job { meta, qobj: Arc::new(qobj), cancel: Default::default(), result: None },
        );
        st.queue.push_back(job_id.clone());
        drop(st);
        self.wake.notify_one();
        tracing::info!("job {job_id} queued on {backend_name}");
        Ok(Submitted { job_id, status: JobState::Queued, max_credits })
    }

    pub fn status(&self, job_id: &str) -> Result<JobStatus, ServiceError> {
        let st = self.lock();
        let j = st.jobs.get(job_id).ok_or_else(|| ServiceError::UnknownJob(job_id.into()))?;
        Ok(JobStatus {
            job_id: job_id.into(),
            status: j.meta.status,
            status_msg: message(&j.meta, &st.queue),
        })
    }

    /// Stored metadata of a job.
    pub fn meta(&self, job_id: &str) -> Result<JobMeta, ServiceError> {
        let st = self.lock();
        st.jobs.get(job_id).map(|j| j.meta.clone()).ok_or_else(|| ServiceError::UnknownJob(job_id.into()))
    }

    /// Queued jobs leave the queue at once; running jobs stop at the next
    /// shot boundary. Finished jobs are left alone.
    pub fn cancel(&self, job_id: &str) -> Result<JobStatus, ServiceError> {
        {
            let mut guard = self.lock();
            let st = &mut *guard;
            let j = st.jobs.get_mut(job_id).ok_or_else(|| ServiceError::UnknownJob(job_id.into()))?;
            match j.meta.status {
                JobState::Queued => {
                    st.queue.retain(|q| q != job_id);
                    self.transition(j, JobState::Cancelled, "job was cancelled before it ran");
                }
                JobState::Initializing | JobState::Running => {
                    j.cancel.store(true, Ordering::Relaxed);
                    j.meta.status_msg = "cancellation requested".into();
                }
                _ => {}
            }
        }
        self.status(job_id)
    }

    /// The whole result document, byte for byte as stored.
    pub fn result(&self, job_id: &str) -> Result<Arc<str>, ServiceError> {
        let st = self.lock();
        let j = st.jobs.get(job_id).ok_or_else(|| ServiceError::UnknownJob(job_id.into()))?;
        j.result.clone().ok_or_else(|| ServiceError::NotReady {
            job_id: job_id.into(),
            status: j.meta.status,
        })
    }

    /// The next window of at most `chunk` shots per experiment. Advances the
    /// delivery cursor.
    pub fn result_chunk(&self, job_id: &str, chunk: u64) -> Result<ResultDocument, ServiceError> {
        let mut st = self.lock();
        let j = st.jobs.get_mut(job_id).ok_or_else(|| ServiceError::UnknownJob(job_id.into()))?;
        let Some(text) = j.result.clone() else {
            return Err(ServiceError::NotReady { job_id: job_id.into(), status: j.meta.status });
        };
        let doc: ResultDocument =
            serde_json::from_str(&text).map_err(|e| ServiceError::Storage(format!("stored result: {e}")))?;
        let (out, cursor) = chunk::next_chunk(&doc, j.meta.cursor, chunk);
        if cursor != j.meta.cursor {
            j.meta.cursor = cursor;
            self.persist(&j.meta);
        }
        Ok(out)
    }

    pub fn backend_status(&self, name: &str) -> Result<model::BackendStatus, ServiceError> {
        let b = self.backend(name)?;
        let st = self.lock();
        let pending = st
            .jobs
            .values()
            .filter(|j| j.meta.backend_name == name && j.meta.status == JobState::Queued)
            .count();
        Ok(b.status(pending as u64))
    }

    /// Jobs of one backend, newest first.
    pub fn list_jobs(
        &self,
        name: &str,
        since: Option<DateTime<Utc>>,
        status: Option<JobState>,
    ) -> Result<Vec<JobStatus>, ServiceError> {
        self.backend(name)?;
        let st = self.lock();
        let mut js: Vec<&Job> = st
            .jobs
            .values()
            .filter(|j| j.meta.backend_name == name)
            .filter(|j| since.is_none_or(|t| j.meta.submitted >= t))
            .filter(|j| status.is_none_or(|s| j.meta.status == s))
            .collect();
        js.sort_by_key(|j| std::cmp::Reverse(j.meta.seq));
        Ok(js
            .into_iter()
            .map(|j| JobStatus {
                job_id: j.meta.job_id.clone(),
                status: j.meta.status,
                status_msg: message(&j.meta, &st.queue),
            })
            .collect())
    }

    /// Takes the oldest queued job whose backend is idle and moves it to
    /// INITIALIZING.
    pub fn pick(&self) -> Option<String> {
        let mut guard = self.lock();
        let st = &mut *guard;
        let pos = st.queue.iter().position(|id| !st.busy.contains(&st.jobs[id].meta.backend_name))?;
        let id = st.queue.remove(pos).expect("position is in range");
        let j = st.jobs.get_mut(&id).expect("queued jobs exist");
        st.busy.insert(j.meta.backend_name.clone());
        self.transition(j, JobState::Initializing, "job is being prepared for execution");
        Some(id)
    }

    /// INITIALIZING to RUNNING. A job whose backend vanished goes to ERROR.
    pub fn begin(&self, job_id: &str) -> Option<Ticket> {
        let mut guard = self.lock();
        let st = &mut *guard;
        let j = st.jobs.get_mut(job_id)?;
        if j.meta.status != JobState::Initializing {
            return None;
        }
        let Some(backend) = self.registry.get(&j.meta.backend_name).cloned() else {
            self.transition(j, JobState::Error, "backend is no longer available");
            st.busy.remove(&j.meta.backend_name);
            return None;
        };
        self.transition(j, JobState::Running, "job is running");
        Some(Ticket { job_id: job_id.into(), backend, qobj: j.qobj.clone(), cancel: j.cancel.clone() })
    }

    /// Records the outcome of [`Ticket::execute`].
    pub fn finish(&self, ticket: Ticket, outcome: Result<ResultDocument, EngineError>) {
        let text = outcome.as_ref().ok().map(model::to_json);
        let mut guard = self.lock();
        let st = &mut *guard;
        let Some(j) = st.jobs.get_mut(&ticket.job_id) else { return };
        st.busy.remove(&j.meta.backend_name);
        match (outcome, text) {
            (Ok(_), Some(text)) => {
                if let Some(s) = &self.store {
                    if let Err(e) = s.save_result(&ticket.job_id, &text) {
                        self.transition(j, JobState::Error, format!("cannot store result: {e}"));
                        return;
                    }
                }
                j.result = Some(Arc::from(text));
                self.transition(j, JobState::Done, "job has successfully run");
            }
            (Err(EngineError::Cancelled), _) => {
                self.transition(j, JobState::Cancelled, "job was cancelled while running");
            }
            (Err(e), _) => {
                self.transition(j, JobState::Error, e.to_string());
            }
            (Ok(_), None) => unreachable!("text is computed from Ok"),
        }
        drop(guard);
        self.wake.notify_all();
    }

    /// Runs one queued job to completion on the calling thread.
    pub fn run_next(&self) -> Option<String> {
        let id = self.pick()?;
        if let Some(t) = self.begin(&id) {
            let out = t.execute();
            self.finish(t, out);
        }
        Some(id)
    }

    fn worker_loop(&self) {
        loop {
            {
                let mut st = self.lock();
                loop {
                    if st.shutdown {
                        return;
                    }
                    let ready = st.queue.iter().any(|id| !st.busy.contains(&st.jobs[id].meta.backend_name));
                    if ready {
                        break;
                    }
                    st = self.wake.wait(st).unwrap_or_else(|p| p.into_inner());
                }
            }
            self.run_next();
        }
    }
}

impl Drop for Service {
    fn drop(&mut self) {
        self.lock().shutdown = true;
        self.wake.notify_all();
    }
}
