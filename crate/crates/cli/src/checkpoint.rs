//! Resumable state for long table sweeps.
//!
//! Completed rows are written next to the output file as `<out>.ckpt`
//! whenever the save interval has elapsed. A rerun with the same
//! configuration picks the rows back up and skips their items. The file
//! is removed once the sweep finishes.

use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use serde_json::Value;

#[derive(Serialize, Deserialize)]
struct State {
    key: String,
    rows: Vec<Vec<Value>>,
}

pub struct Checkpoint {
    path: Option<PathBuf>,
    key: String,
    pub rows: Vec<Vec<Value>>,
    interval: Duration,
    last: Instant,
}

pub fn state_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".ckpt");
    PathBuf::from(s)
}

impl Checkpoint {
    /// `key` fingerprints the configuration; state saved under another key is ignored.
    pub fn open(out: Option<&Path>, key: String, interval: Duration) -> Result<Self> {
        let path = out.map(state_path);
        let mut rows = Vec::new();
        if let Some(p) = path.as_ref().filter(|p| p.exists()) {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            if let Ok(state) = serde_json::from_str::<State>(&text) {
                if state.key == key {
                    rows = state.rows;
                }
            }
        }
        Ok(Self { path, key, rows, interval, last: Instant::now() })
    }

    /// The saved row whose first cell is `item`, if any.
    pub fn done(&self, item: &Value) -> Option<&Vec<Value>> {
        self.rows.iter().find(|r| r.first() == Some(item))
    }

    pub fn push(&mut self, row: Vec<Value>) -> Result<()> {
        self.rows.push(row);
        if self.last.elapsed() >= self.interval {
            self.save()?;
        }
        Ok(())
    }

    fn save(&mut self) -> Result<()> {
        if let Some(p) = &self.path {
            let state = State { key: self.key.clone(), rows: self.rows.clone() };
            let tmp = p.with_extension("ckpt.tmp");
            std::fs::write(&tmp, serde_json::to_vec(&state)?)?;
            std::fs::rename(&tmp, p)?;
        }
        self.last = Instant::now();
        Ok(())
    }

    pub fn finish(self) -> Result<()> {
        if let Some(p) = self.path.filter(|p| p.exists()) {
            std::fs::remove_file(p)?;
        }
        Ok(())
    }
}
