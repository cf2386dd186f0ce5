//! Collection service for crowd clustering tasks.
//!
//! Tasks and submissions are kept in memory and persisted to an append-only
//! event log that is replayed on startup. Consensus is computed on request
//! from the submissions present at that moment.

mod api;
mod error;
mod events;
mod model;
mod store;

use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use tokio::sync::{RwLock, RwLockReadGuard};

pub use api::router;
pub use error::{CollectError, Result};
pub use events::{replay, Event, EventLog, EventRecord};
pub use model::{
    ConsensusDocument, CreatedTask, Item, ItemGroup, Submission, SubmissionRequest, Task, TaskDescriptor, TaskStatus,
};
pub use store::Store;

/// Milliseconds since the Unix epoch.
pub type Clock = Arc<dyn Fn() -> u64 + Send + Sync>;

pub fn system_clock() -> Clock {
    Arc::new(|| {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map_or(0, |d| d.as_millis() as u64)
    })
}

struct Inner {
    store: Store,
    log: EventLog,
}

/// Shared handle to the service state. Writes go through one lock holder at
/// a time and are on disk before they become visible.
#[derive(Clone)]
pub struct Service {
    inner: Arc<RwLock<Inner>>,
    clock: Clock,
}

pub struct StoreGuard<'a>(RwLockReadGuard<'a, Inner>);

impl std::ops::Deref for StoreGuard<'_> {
    type Target = Store;

    fn deref(&self) -> &Store {
        &self.0.store
    }
}

impl Service {
    /// Opens the log at `path`, replaying it into a fresh store.
    pub fn open(path: impl AsRef<Path>, clock: Clock) -> Result<Self> {
        let (log, records) = EventLog::open(path)?;
        let mut store = Store::new();
        for record in records {
            let seq = record.seq;
            store.apply(record.event).map_err(|message| CollectError::CorruptLog {
                path: log.path().display().to_string(),
                line: seq as usize,
                message,
            })?;
        }
        log::info!("replayed {} tasks from {}", store.num_tasks(), log.path().display());
        Ok(Self {
            inner: Arc::new(RwLock::new(Inner { store, log })),
            clock,
        })
    }

    pub async fn read(&self) -> StoreGuard<'_> {
        StoreGuard(self.inner.read().await)
    }

    async fn commit(&self, make: impl FnOnce(&Store, u64) -> Result<Event>) -> Result<Event> {
        let mut inner = self.inner.write().await;
        let event = make(&inner.store, (self.clock)())?;
        inner.log.append(event.clone())?;
        inner.store.apply(event.clone()).map_err(CollectError::Internal)?;
        Ok(event)
    }

    pub async fn create_task(&self, descriptor: TaskDescriptor) -> Result<Task> {
        match self.commit(|s, now| s.create_event(descriptor, now)).await? {
            Event::TaskCreated(task) => Ok(task),
            other => Err(CollectError::Internal(format!("unexpected event {other:?}"))),
        }
    }

    pub async fn submit(&self, task_id: &str, request: SubmissionRequest) -> Result<Submission> {
        match self.commit(|s, now| s.submit_event(task_id, request, now)).await? {
            Event::SubmissionAdded(sub) => Ok(sub),
            other => Err(CollectError::Internal(format!("unexpected event {other:?}"))),
        }
    }

    pub async fn close(&self, task_id: &str) -> Result<Task> {
        self.commit(|s, now| s.close_event(task_id, now)).await?;
        Ok(self.read().await.task(task_id)?.clone())
    }
}

#[derive(Debug, Clone)]
pub struct ServiceConfig {
    pub addr: SocketAddr,
    pub data: PathBuf,
    pub ui_dir: Option<PathBuf>,
}

impl ServiceConfig {
    pub const DEFAULT_ADDR: &'static str = "127.0.0.1:8080";
    pub const DEFAULT_DATA: &'static str = "collect-events.jsonl";

    /// Reads `COLLECT_ADDR`, `COLLECT_DATA` and `COLLECT_UI`.
    pub fn from_env() -> Result<Self> {
        let addr = std::env::var("COLLECT_ADDR").unwrap_or_else(|_| Self::DEFAULT_ADDR.into());
        let addr = addr
            .parse()
            .map_err(|e| CollectError::field("COLLECT_ADDR", format!("invalid address {addr:?}: {e}")))?;
        let data = std::env::var_os("COLLECT_DATA").map_or_else(|| PathBuf::from(Self::DEFAULT_DATA), PathBuf::from);
        let ui_dir = std::env::var_os("COLLECT_UI").map(PathBuf::from);
        Ok(Self { addr, data, ui_dir })
    }
}

pub async fn serve(config: ServiceConfig) -> Result<()> {
    let service = Service::open(&config.data, system_clock())?;
    let app = router(service, config.ui_dir.as_deref());
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    log::info!("listening on http://{}", listener.local_addr()?);
    axum::serve(listener, app).await?;
    Ok(())
}
