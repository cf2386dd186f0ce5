//! In-memory task state rebuilt from events.
//!
//! Validation lives here so that a request is turned into an [`Event`] only
//! when it is acceptable; applying an event never fails for events the store
//! itself produced.

use std::collections::{BTreeMap, HashMap, HashSet};

use crowd_consensus::{ClusteringSolution, Ensemble, Partition};

use crate::error::{CollectError, Result};
use crate::events::Event;
use crate::model::{Submission, SubmissionRequest, Task, TaskDescriptor, TaskStatus};

#[derive(Debug, Clone)]
struct TaskEntry {
    task: Task,
    /// Latest submission per worker, in order of each worker's first submission.
    submissions: Vec<Submission>,
}

#[derive(Debug, Clone, Default)]
pub struct Store {
    tasks: Vec<TaskEntry>,
    index: HashMap<String, usize>,
}

impl Store {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn task(&self, task_id: &str) -> Result<&Task> {
        self.entry(task_id).map(|e| &e.task)
    }

    pub fn submissions(&self, task_id: &str) -> Result<&[Submission]> {
        self.entry(task_id).map(|e| e.submissions.as_slice())
    }

    pub fn num_tasks(&self) -> usize {
        self.tasks.len()
    }

    fn entry(&self, task_id: &str) -> Result<&TaskEntry> {
        self.index
            .get(task_id)
            .map(|&i| &self.tasks[i])
            .ok_or_else(|| CollectError::NotFound(format!("no task with id {task_id:?}")))
    }

    pub fn create_event(&self, descriptor: TaskDescriptor, now: u64) -> Result<Event> {
        validate_descriptor(&descriptor)?;
        Ok(Event::TaskCreated(Task {
            task_id: format!("task-{}", self.tasks.len() + 1),
            title: descriptor.title,
            num_clusters: descriptor.num_clusters,
            items: descriptor.items,
            created_at: now,
            status: TaskStatus::Open,
        }))
    }

    pub fn submit_event(&self, task_id: &str, request: SubmissionRequest, now: u64) -> Result<Event> {
        let task = self.task(task_id)?;
        if task.status == TaskStatus::Closed {
            return Err(CollectError::Conflict(format!("task {task_id} is closed")));
        }
        let assignment = validate_assignment(task, &request)?;
        Ok(Event::SubmissionAdded(Submission {
            task_id: task.task_id.clone(),
            worker_id: request.worker_id,
            assignment,
            submitted_at: now,
        }))
    }

    pub fn close_event(&self, task_id: &str, now: u64) -> Result<Event> {
        let task = self.task(task_id)?;
        if task.status == TaskStatus::Closed {
            return Err(CollectError::Conflict(format!("task {task_id} is already closed")));
        }
        Ok(Event::TaskClosed {
            task_id: task.task_id.clone(),
            closed_at: now,
        })
    }

    /// Applies an event to the state. Errors only for events that could not
    /// have been produced by this store, which on replay means a corrupt log.
    pub fn apply(&mut self, event: Event) -> std::result::Result<(), String> {
        match event {
            Event::TaskCreated(task) => {
                if self.index.contains_key(&task.task_id) {
                    return Err(format!("task {} created twice", task.task_id));
                }
                self.index.insert(task.task_id.clone(), self.tasks.len());
                self.tasks.push(TaskEntry {
                    task,
                    submissions: Vec::new(),
                });
            }
            Event::SubmissionAdded(sub) => {
                let &i = self
                    .index
                    .get(&sub.task_id)
                    .ok_or_else(|| format!("submission for unknown task {}", sub.task_id))?;
                let subs = &mut self.tasks[i].submissions;
                match subs.iter_mut().find(|s| s.worker_id == sub.worker_id) {
                    Some(existing) => *existing = sub,
                    None => subs.push(sub),
                }
            }
            Event::TaskClosed { task_id, .. } => {
                let &i = self
                    .index
                    .get(&task_id)
                    .ok_or_else(|| format!("close of unknown task {task_id}"))?;
                self.tasks[i].task.status = TaskStatus::Closed;
            }
        }
        Ok(())
    }

    /// The current submissions of a task as an ensemble: items in task order,
    /// workers in order of first submission.
    pub fn ensemble(&self, task_id: &str) -> Result<Ensemble> {
        let entry = self.entry(task_id)?;
        if entry.submissions.len() < 2 {
            return Err(CollectError::Conflict(format!(
                "consensus needs at least 2 submissions, task {task_id} has {}",
                entry.submissions.len()
            )));
        }
        if entry.task.items.len() < 2 {
            return Err(CollectError::Conflict(format!("consensus needs at least 2 items, task {task_id} has 1")));
        }
        let n = entry.task.num_clusters;
        let solutions = entry
            .submissions
            .iter()
            .map(|s| {
                let labels = entry.task.items.iter().map(|item| s.assignment[&item.item_id]).collect();
                Partition::new(labels, n).map(|p| ClusteringSolution::new(s.worker_id.clone(), p))
            })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| CollectError::Internal(e.to_string()))?;
        Ensemble::new(n, solutions).map_err(|e| CollectError::Internal(e.to_string()))
    }
}

fn validate_descriptor(d: &TaskDescriptor) -> Result<()> {
    if d.num_clusters < 2 {
        return Err(CollectError::field("num_clusters", "num_clusters must be at least 2"));
    }
    if u32::try_from(d.num_clusters).is_err() {
        return Err(CollectError::field("num_clusters", "num_clusters is too large"));
    }
    if d.items.is_empty() {
        return Err(CollectError::field("items", "a task needs at least one item"));
    }
    let mut seen = HashSet::new();
    for (i, item) in d.items.iter().enumerate() {
        if item.item_id.is_empty() {
            return Err(CollectError::field(format!("items[{i}].item_id"), "item_id must not be empty"));
        }
        if !seen.insert(item.item_id.as_str()) {
            return Err(CollectError::field(
                format!("items[{i}].item_id"),
                format!("duplicate item_id {:?}", item.item_id),
            ));
        }
    }
    Ok(())
}

fn validate_assignment(task: &Task, request: &SubmissionRequest) -> Result<BTreeMap<String, u32>> {
    if request.worker_id.trim().is_empty() {
        return Err(CollectError::field("worker_id", "worker_id must not be empty"));
    }
    let known: HashSet<&str> = task.items.iter().map(|i| i.item_id.as_str()).collect();
    if let Some(unknown) = request.assignment.keys().find(|k| !known.contains(k.as_str())) {
        return Err(CollectError::field(
            format!("assignment.{unknown}"),
            format!("unknown item_id {unknown:?}"),
        ));
    }
    if let Some(missing) = task.items.iter().find(|i| !request.assignment.contains_key(&i.item_id)) {
        return Err(CollectError::field(
            format!("assignment.{}", missing.item_id),
            format!("item {:?} is not assigned to a group", missing.item_id),
        ));
    }
    let n = task.num_clusters as i64;
    request
        .assignment
        .iter()
        .map(|(item, &group)| {
            if (1..=n).contains(&group) {
                Ok((item.clone(), group as u32))
            } else {
                Err(CollectError::field(
                    format!("assignment.{item}"),
                    format!("group {group} is outside 1..={n}"),
                ))
            }
        })
        .collect()
}
