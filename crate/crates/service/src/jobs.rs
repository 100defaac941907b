use std::collections::HashMap;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tokio::sync::Semaphore;

use glens_core::contagion::{PathCaps, PropagationView};
use glens_core::graph::Date;
use glens_core::patterns::{match_motif_with, motif_census_with, CensusOptions, MatchOptions, Motif};
use glens_core::risk::{build_windows, rolling_predict_with, BoostParams, RollingParams};
use glens_core::{Exec, RunControl};

use crate::dataset::{Dataset, GRACE_DAYS};
use crate::error::ApiError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum JobRequest {
    Census {
        k: usize,
        #[serde(default)]
        date: Option<Date>,
        #[serde(default)]
        budget: Option<u64>,
    },
    Match {
        motif: Motif,
        #[serde(default)]
        date: Option<Date>,
        #[serde(default)]
        max_sets: Option<usize>,
    },
    RollingPredict {
        #[serde(default = "three")]
        width_months: u32,
        #[serde(default = "three")]
        stride_months: u32,
        #[serde(default)]
        n_trees: Option<usize>,
    },
    Importance {
        #[serde(default)]
        date: Option<Date>,
        #[serde(default)]
        max_len: Option<usize>,
        #[serde(default)]
        max_paths: Option<usize>,
    },
}

fn three() -> u32 {
    3
}

impl JobRequest {
    pub fn kind(&self) -> &'static str {
        match self {
            JobRequest::Census { .. } => "census",
            JobRequest::Match { .. } => "match",
            JobRequest::RollingPredict { .. } => "rolling_predict",
            JobRequest::Importance { .. } => "importance",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JobState {
    Queued,
    Running,
    Done,
    Cancelled,
    Failed,
}

impl JobState {
    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Done | JobState::Cancelled | JobState::Failed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JobStatus {
    pub id: String,
    pub kind: &'static str,
    pub state: JobState,
    pub progress: f64,
    /// The result may be incomplete (cancelled, truncated or over budget).
    pub partial: bool,
    pub result: Option<Value>,
    pub error: Option<String>,
}

/// Output of one finished run.
#[derive(Clone, Debug, PartialEq)]
pub struct JobOutput {
    pub result: Value,
    pub partial: bool,
    pub cancelled: bool,
}

struct Job {
    ctrl: Arc<RunControl>,
    status: Mutex<JobStatus>,
}

impl Job {
    fn snapshot(&self) -> JobStatus {
        let mut s = self.status.lock().expect("job status").clone();
        if s.state == JobState::Running {
            s.progress = self.ctrl.progress();
        }
        s
    }

    /// Terminal states are never left.
    fn transition(&self, f: impl FnOnce(&mut JobStatus)) {
        let mut s = self.status.lock().expect("job status");
        if !s.state.is_terminal() {
            f(&mut s);
        }
    }
}

pub struct JobRegistry {
    next: AtomicU64,
    jobs: Mutex<HashMap<String, Arc<Job>>>,
    permits: Arc<Semaphore>,
}

impl JobRegistry {
    pub fn new(workers: usize) -> Self {
        JobRegistry { next: AtomicU64::new(1), jobs: Mutex::default(), permits: Arc::new(Semaphore::new(workers.max(1))) }
    }

    /// Queues the job; it starts once a worker permit is free.
    pub fn submit(&self, dataset: Arc<Dataset>, req: JobRequest) -> JobStatus {
        let id = format!("job-{}", self.next.fetch_add(1, Ordering::SeqCst));
        let job = Arc::new(Job {
            ctrl: Arc::new(RunControl::new()),
            status: Mutex::new(JobStatus {
                id: id.clone(),
                kind: req.kind(),
                state: JobState::Queued,
                progress: 0.0,
                partial: false,
                result: None,
                error: None,
            }),
        });
        self.jobs.lock().expect("job table").insert(id, job.clone());
        let permits = self.permits.clone();
        let queued = job.snapshot();
        tokio::spawn(async move {
            let Ok(_permit) = permits.acquire_owned().await else { return };
            if job.ctrl.is_cancelled() {
                return;
            }
            job.transition(|s| s.state = JobState::Running);
            let ctrl = job.ctrl.clone();
            let outcome = tokio::task::spawn_blocking(move || run_job(&dataset, &req, &ctrl)).await;
            let cancel_requested = job.ctrl.is_cancelled();
            let mut s = job.status.lock().expect("job status");
            if s.state.is_terminal() {
                return;
            }
            match outcome {
                Ok(Ok(out)) => {
                    s.state = if out.cancelled || cancel_requested { JobState::Cancelled } else { JobState::Done };
                    s.partial = out.partial || s.state == JobState::Cancelled;
                    s.progress = if s.state == JobState::Done { 1.0 } else { job.ctrl.progress() };
                    s.result = Some(out.result);
                }
                Ok(Err(e)) => {
                    s.state = JobState::Failed;
                    s.progress = job.ctrl.progress();
                    s.error = Some(format!("{}: {}", e.code, e.message));
                }
                Err(_) => {
                    s.state = JobState::Failed;
                    s.progress = job.ctrl.progress();
                    s.error = Some("internal error".into());
                }
            }
        });
        queued
    }

    pub fn status(&self, id: &str) -> Result<JobStatus, ApiError> {
        Ok(self.get(id)?.snapshot())
    }

    /// Queued jobs become cancelled at once; running jobs stop at their next
    /// progress check and keep what they finished.
    pub fn cancel(&self, id: &str) -> Result<JobStatus, ApiError> {
        let job = self.get(id)?;
        job.ctrl.cancel();
        job.transition(|s| {
            if s.state == JobState::Queued {
                s.state = JobState::Cancelled;
                s.partial = true;
            }
        });
        Ok(job.snapshot())
    }

    fn get(&self, id: &str) -> Result<Arc<Job>, ApiError> {
        self.jobs.lock().expect("job table").get(id).cloned().ok_or_else(|| ApiError::not_found("UnknownJob", format!("job {id}")))
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("analytic payloads serialise")
}

/// Runs one job synchronously. Results depend only on the dataset and request.
pub fn run_job(dataset: &Dataset, req: &JobRequest, ctrl: &RunControl) -> Result<JobOutput, ApiError> {
    let exec = Exec::default();
    match req {
        JobRequest::Census { k, date, budget } => {
            let g = dataset.snapshot(*date).simple_view(glens_core::ViewMode::Directed);
            let mut opts = CensusOptions { exec, ..Default::default() };
            if let Some(b) = budget {
                opts.budget = *b;
            }
            let r = motif_census_with(&g, *k, &opts, Some(ctrl))?;
            Ok(JobOutput { result: to_value(&r), partial: r.truncated || r.cancelled, cancelled: r.cancelled })
        }
        JobRequest::Match { motif, date, max_sets } => {
            let g = dataset.snapshot(*date).simple_view(glens_core::ViewMode::Directed);
            let mut opts = MatchOptions { exec, ..Default::default() };
            if let Some(m) = max_sets {
                opts.max_sets = *m;
            }
            let r = match_motif_with(&g, motif, &opts, Some(ctrl));
            Ok(JobOutput { result: to_value(&r), partial: r.partial(), cancelled: r.cancelled })
        }
        JobRequest::RollingPredict { width_months, stride_months, n_trees } => {
            let plan = build_windows(dataset.span, *width_months, *stride_months)?;
            let mut params = RollingParams { grace_days: GRACE_DAYS, exec, ..Default::default() };
            if let Some(n) = n_trees {
                params.boost = BoostParams { n_trees: *n, ..params.boost };
            }
            let r = rolling_predict_with(&dataset.network, &plan, &params, Some(ctrl));
            Ok(JobOutput { result: to_value(&r), partial: r.cancelled, cancelled: r.cancelled })
        }
        JobRequest::Importance { date, max_len, max_paths } => {
            let view = PropagationView::new(&dataset.snapshot(*date));
            let mut caps = PathCaps::default();
            if let Some(l) = max_len {
                caps.max_len = *l;
            }
            if let Some(p) = max_paths {
                caps.max_paths = *p;
            }
            let r = view.importance_with(caps, exec, Some(ctrl));
            Ok(JobOutput { result: to_value(&r), partial: r.cancelled || r.truncated_seeds > 0, cancelled: r.cancelled })
        }
    }
}
