use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crowd_consensus::formats::ResultDocument;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    pub item_id: String,
    pub image_url: String,
    #[serde(default)]
    pub caption: String,
}

/// Body of `POST /api/tasks`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskDescriptor {
    pub title: String,
    pub num_clusters: usize,
    pub items: Vec<Item>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskStatus {
    Open,
    Closed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Task {
    pub task_id: String,
    pub title: String,
    pub num_clusters: usize,
    pub items: Vec<Item>,
    /// Unix time in milliseconds.
    pub created_at: u64,
    pub status: TaskStatus,
}

/// Body of `POST /api/tasks/{id}/solutions`. Groups arrive as signed
/// integers so that out-of-range values get a field-level error instead of
/// a decode failure.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubmissionRequest {
    pub worker_id: String,
    pub assignment: BTreeMap<String, i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Submission {
    pub task_id: String,
    pub worker_id: String,
    /// item_id -> group in `1..=num_clusters`.
    pub assignment: BTreeMap<String, u32>,
    pub submitted_at: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CreatedTask {
    pub task_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ItemGroup {
    pub item_id: String,
    pub group: u32,
}

/// Response of `POST /api/tasks/{id}/consensus`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsensusDocument {
    pub task_id: String,
    pub num_submissions: usize,
    pub items: Vec<ItemGroup>,
    pub result: ResultDocument,
}
