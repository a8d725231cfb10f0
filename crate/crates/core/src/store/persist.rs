use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, PoisonError, RwLock};

use super::{parse, serialize, StoreError, TripleGraph};

/// A graph with a single writer and snapshot readers, optionally backed by
/// a file that is rewritten atomically (temp file + rename) on every
/// mutation.
#[derive(Debug)]
pub struct KnowledgeStore {
    path: Option<PathBuf>,
    current: RwLock<Arc<TripleGraph>>,
    writer: Mutex<()>,
}

impl KnowledgeStore {
    pub fn in_memory(graph: TripleGraph) -> Self {
        KnowledgeStore { path: None, current: RwLock::new(Arc::new(graph)), writer: Mutex::new(()) }
    }

    /// Loads `path`, or creates it from `seed` when it does not exist yet.
    pub fn open(path: impl Into<PathBuf>, seed: impl FnOnce() -> TripleGraph) -> Result<Self, StoreError> {
        let path = path.into();
        let graph = if path.exists() {
            parse(&fs::read_to_string(&path)?)?
        } else {
            let graph = seed();
            write_atomically(&path, &serialize(&graph))?;
            graph
        };
        Ok(KnowledgeStore { path: Some(path), current: RwLock::new(Arc::new(graph)), writer: Mutex::new(()) })
    }

    pub fn path(&self) -> Option<&Path> {
        self.path.as_deref()
    }

    /// Immutable view of the latest committed graph.
    pub fn snapshot(&self) -> Arc<TripleGraph> {
        self.current.read().unwrap_or_else(PoisonError::into_inner).clone()
    }

    /// Runs `f` on a copy of the graph and commits the copy if `f` succeeds
    /// and the file write succeeds. On any error the store is unchanged.
    pub fn update<T, E>(&self, f: impl FnOnce(&mut TripleGraph) -> Result<T, E>) -> Result<T, E>
    where
        E: From<StoreError>,
    {
        let _guard = self.writer.lock().unwrap_or_else(PoisonError::into_inner);
        let mut working = (*self.snapshot()).clone();
        let out = f(&mut working)?;
        if let Some(path) = &self.path {
            write_atomically(path, &serialize(&working)).map_err(E::from)?;
        }
        *self.current.write().unwrap_or_else(PoisonError::into_inner) = Arc::new(working);
        Ok(out)
    }
}

fn write_atomically(path: &Path, contents: &str) -> Result<(), StoreError> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| StoreError::Io(e.error))?;
    Ok(())
}
