use std::collections::BTreeMap;
use std::path::Path;

use ccb_core::bridge::Problem;
use ccb_core::fixtures;

use crate::ServiceError;

/// Problems available to participants, keyed by id.
#[derive(Debug, Clone, Default)]
pub struct ProblemStore {
    problems: BTreeMap<String, Problem>,
}

impl ProblemStore {
    pub fn new(problems: impl IntoIterator<Item = Problem>) -> Self {
        Self { problems: problems.into_iter().map(|p| (p.id.clone(), p)).collect() }
    }

    /// The problems compiled into the library.
    pub fn bundled() -> Self {
        Self::new(fixtures::bundled_problems())
    }

    /// Every `*.problem.json` file in `dir`.
    pub fn from_dir(dir: impl AsRef<Path>) -> Result<Self, ServiceError> {
        let dir = dir.as_ref();
        let entries = std::fs::read_dir(dir).map_err(|e| ServiceError::Storage(format!("{}: {e}", dir.display())))?;
        let mut paths: Vec<_> = entries
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.ends_with(".problem.json")))
            .collect();
        paths.sort();
        let mut problems = Vec::new();
        for path in paths {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| ServiceError::Storage(format!("{}: {e}", path.display())))?;
            let problem: Problem =
                text.parse().map_err(|e| ServiceError::Storage(format!("{}: {e}", path.display())))?;
            problems.push(problem);
        }
        Ok(Self::new(problems))
    }

    pub fn get(&self, id: &str) -> Result<&Problem, ServiceError> {
        self.problems.get(id).ok_or_else(|| ServiceError::UnknownProblem(id.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &Problem> {
        self.problems.values()
    }

    pub fn len(&self) -> usize {
        self.problems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.problems.is_empty()
    }
}
