use std::sync::{Arc, Mutex};

use super::state::StateVec;
use crate::model::StateHandle;

/// Append-only store backing the quantum payloads of transcripts.
#[derive(Debug, Default)]
pub struct StateStore {
    states: Mutex<Vec<Arc<StateVec>>>,
}

impl StateStore {
    pub fn new() -> Self {
        StateStore::default()
    }

    pub fn insert(&self, state: StateVec) -> StateHandle {
        let mut guard = self.states.lock().expect("state store poisoned");
        guard.push(Arc::new(state));
        StateHandle(guard.len() as u64 - 1)
    }

    pub fn get(&self, handle: StateHandle) -> Option<Arc<StateVec>> {
        let guard = self.states.lock().expect("state store poisoned");
        guard.get(handle.0 as usize).cloned()
    }

    pub fn len(&self) -> usize {
        self.states.lock().expect("state store poisoned").len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn handles_are_distinct_under_concurrent_inserts() {
        let store = StateStore::new();
        let handles: Vec<StateHandle> = std::thread::scope(|s| {
            let workers: Vec<_> = (0..4)
                .map(|_| s.spawn(|| (0..50).map(|k| store.insert(StateVec::basis(4, k % 4))).collect::<Vec<_>>()))
                .collect();
            workers.into_iter().flat_map(|w| w.join().unwrap()).collect()
        });
        let mut ids: Vec<u64> = handles.iter().map(|h| h.0).collect();
        ids.sort_unstable();
        ids.dedup();
        assert_eq!(ids.len(), 200);
        assert_eq!(store.len(), 200);
        assert!(store.get(StateHandle(200)).is_none());
    }
}
