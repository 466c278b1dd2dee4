//! On-disk job directories: `<root>/jobs/<job_id>/{qobj,meta,result}.json`.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use crate::model::JobState;

/// Everything about a job except the Qobj and the result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobMeta {
    pub job_id: String,
    pub backend_name: String,
    pub qobj_id: String,
    /// Submission order across the whole service.
    pub seq: u64,
    pub status: JobState,
    pub status_msg: String,
    pub submitted: DateTime<Utc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub started: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub finished: Option<DateTime<Utc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_credits: Option<i64>,
    /// Shots already served by chunked result calls.
    #[serde(default)]
    pub cursor: u64,
}

/// A job as found on disk.
#[derive(Debug)]
pub struct StoredJob {
    pub meta: JobMeta,
    pub qobj: Vec<u8>,
    pub result: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

impl Store {
    pub fn open(root: &Path) -> io::Result<Store> {
        fs::create_dir_all(root.join("jobs"))?;
        Ok(Store { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn dir(&self, id: &str) -> PathBuf {
        self.root.join("jobs").join(id)
    }

    pub fn create(&self, meta: &JobMeta, qobj: &[u8]) -> io::Result<()> {
        let d = self.dir(&meta.job_id);
        fs::create_dir_all(&d)?;
        write_atomic(&d.join("qobj.json"), qobj)?;
        self.save_meta(meta)
    }

    pub fn save_meta(&self, meta: &JobMeta) -> io::Result<()> {
        let bytes = serde_json::to_vec_pretty(meta).map_err(io::Error::other)?;
        write_atomic(&self.dir(&meta.job_id).join("meta.json"), &bytes)
    }

    pub fn save_result(&self, id: &str, result: &str) -> io::Result<()> {
        write_atomic(&self.dir(id).join("result.json"), result.as_bytes())
    }

    /// Every readable job directory. Unreadable ones are skipped with a
    /// warning.
    pub fn load_all(&self) -> io::Result<Vec<StoredJob>> {
        let mut out = Vec::new();
        for e in fs::read_dir(self.root.join("jobs"))? {
            let d = e?.path();
            if !d.is_dir() {
                continue;
            }
            match load_one(&d) {
                Ok(j) => out.push(j),
                Err(err) => tracing::warn!("skipping {}: {err}", d.display()),
            }
        }
        out.sort_by_key(|j| j.meta.seq);
        Ok(out)
    }
}

fn load_one(d: &Path) -> io::Result<StoredJob> {
    let meta: JobMeta = serde_json::from_slice(&fs::read(d.join("meta.json"))?).map_err(io::Error::other)?;
    let qobj = fs::read(d.join("qobj.json"))?;
    let result = match fs::read_to_string(d.join("result.json")) {
        Ok(s) => Some(s),
        Err(e) if e.kind() == io::ErrorKind::NotFound => None,
        Err(e) => return Err(e),
    };
    Ok(StoredJob { meta, qobj, result })
}
