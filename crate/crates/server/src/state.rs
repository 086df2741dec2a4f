//! The service state: event store, catalog and their on-disk logs.
//!
//! Lock order is journal, catalog, event log, store. Ingest holds the event log
//! lock while it validates, writes and commits a batch, and takes the store
//! write lock only for the in-memory commit, so readers see a batch entirely
//! or not at all.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};
use std::sync::{Mutex, RwLock};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use lava_core::catalog::{Actor, Catalog, CatalogCommand, CatalogError, CatalogOp, CatalogOutcome};
use lava_core::chart::ChartRegistry;
use lava_core::indicator::{Clock, Engine, IndicatorError, IndicatorRun, IndicatorSpec};
use lava_core::ingest::{prepare_batch, IngestReport, RawEvent};
use lava_core::methods::MethodRegistry;
use lava_core::model::{SchemaSet, Timestamp};
use lava_core::query::Pseudonymizer;
use lava_core::store::EventStore;
use rand::RngCore;
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::auth::Tokens;
use crate::eventlog::{EventLog, LogError};
use crate::journal::{Journal, JournalError};

#[derive(Debug, thiserror::Error)]
pub enum StateError {
    #[error(transparent)]
    Log(#[from] LogError),
    #[error(transparent)]
    Journal(#[from] JournalError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: {reason}")]
    Config { path: PathBuf, reason: String },
    #[error("stored events are inconsistent: {0}")]
    Store(String),
}

#[derive(Debug, Clone)]
pub struct Settings {
    pub data_dir: PathBuf,
    pub admin_token: Option<String>,
    /// Public URL of the service, used in embed snippets. When unset the
    /// request's Host header is used.
    pub base_url: Option<String>,
    /// Built editor assets, served under /app.
    pub app_dir: Option<PathBuf>,
    pub compact_every: u64,
}

impl Settings {
    pub fn new(data_dir: impl Into<PathBuf>) -> Self {
        Self {
            data_dir: data_dir.into(),
            admin_token: None,
            base_url: None,
            app_dir: None,
            compact_every: 256,
        }
    }
}

/// Why a catalog change was refused.
#[derive(Debug, thiserror::Error)]
pub enum MutationError {
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Indicator(#[from] IndicatorError),
    #[error(transparent)]
    Journal(#[from] JournalError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Digests {
    pub events: usize,
    pub store_digest: String,
    pub catalog_digest: String,
}

pub struct AppState {
    pub settings: Settings,
    pub schemas: SchemaSet,
    pub methods: MethodRegistry,
    pub charts: ChartRegistry,
    pub pseudonymizer: Pseudonymizer,
    pub tokens: Tokens,
    store: RwLock<EventStore>,
    log: Mutex<EventLog>,
    catalog: RwLock<Catalog>,
    journal: Mutex<Journal>,
}

struct WallClock(Instant);

impl Clock for WallClock {
    fn now_micros(&self) -> u64 {
        self.0.elapsed().as_micros() as u64
    }
}

fn read_optional(path: &Path) -> Result<Option<Vec<u8>>, StateError> {
    match fs::read(path) {
        Ok(bytes) => Ok(Some(bytes)),
        Err(e) if e.kind() == io::ErrorKind::NotFound => Ok(None),
        Err(source) => Err(StateError::Io { path: path.into(), source }),
    }
}

/// The pseudonymization key: `secret` in the data dir, created on first start.
pub fn load_secret(dir: &Path) -> Result<Vec<u8>, StateError> {
    let path = dir.join("secret");
    if let Some(bytes) = read_optional(&path)? {
        let text = String::from_utf8_lossy(&bytes);
        return hex::decode(text.trim()).map_err(|e| StateError::Config { path, reason: e.to_string() });
    }
    let mut key = vec![0u8; 32];
    rand::rngs::OsRng.fill_bytes(&mut key);
    fs::write(&path, hex::encode(&key)).map_err(|source| StateError::Io { path, source })?;
    Ok(key)
}

impl AppState {
    /// Opens the data directory, replaying the event log and the catalog
    /// journal.
    ///
    /// Optional files: `schemas.json` (a list of category schemas, default
    /// the built-in ones) and `tokens.json` (bearer token to user id).
    pub fn open(settings: Settings) -> Result<Self, StateError> {
        let dir = &settings.data_dir;
        fs::create_dir_all(dir).map_err(|source| StateError::Io { path: dir.clone(), source })?;
        let schemas_path = dir.join("schemas.json");
        let schemas = match read_optional(&schemas_path)? {
            Some(bytes) => serde_json::from_slice(&bytes)
                .map_err(|e| StateError::Config { path: schemas_path, reason: e.to_string() })?,
            None => SchemaSet::lcdm_defaults(),
        };
        let tokens_path = dir.join("tokens.json");
        let mut tokens = match read_optional(&tokens_path)? {
            Some(bytes) => Tokens::from_json(&bytes)
                .map_err(|e| StateError::Config { path: tokens_path, reason: e.to_string() })?,
            None => Tokens::default(),
        };
        if let Some(admin) = &settings.admin_token {
            tokens.set_admin(admin);
        }
        let secret = load_secret(dir)?;
        let (log, events) = EventLog::open(dir.join("events.log"))?;
        let store = EventStore::from_events(events).map_err(|e| StateError::Store(e.to_string()))?;
        let (journal, catalog) = Journal::open(dir, settings.compact_every)?;
        tracing::info!(events = store.len(), indicators = catalog.indicators().count(), dir = %dir.display(), "state loaded");
        Ok(Self {
            settings,
            schemas,
            methods: MethodRegistry::with_defaults(),
            charts: ChartRegistry::with_defaults(),
            pseudonymizer: Pseudonymizer::new(secret),
            tokens,
            store: RwLock::new(store),
            log: Mutex::new(log),
            catalog: RwLock::new(catalog),
            journal: Mutex::new(journal),
        })
    }

    pub fn read_store<T>(&self, f: impl FnOnce(&EventStore) -> T) -> T {
        f(&self.store.read().expect("store lock poisoned"))
    }

    pub fn read_catalog<T>(&self, f: impl FnOnce(&Catalog) -> T) -> T {
        f(&self.catalog.read().expect("catalog lock poisoned"))
    }

    /// Validates a batch, makes the accepted events durable and then visible.
    pub fn ingest(&self, batch: Vec<RawEvent>) -> Result<IngestReport, LogError> {
        let mut log = self.log.lock().expect("log lock poisoned");
        let prepared = {
            let store = self.store.read().expect("store lock poisoned");
            prepare_batch(&store, &self.schemas, batch)
        };
        if !prepared.events.is_empty() {
            log.append(&prepared.events)?;
            self.store
                .write()
                .expect("store lock poisoned")
                .commit(prepared.events)
                .expect("the log lock keeps batches from racing");
        }
        Ok(prepared.report)
    }

    /// Runs an indicator against the current store.
    pub fn execute(&self, spec: &IndicatorSpec, requester: &str) -> Result<IndicatorRun, IndicatorError> {
        let catalog = self.catalog.read().expect("catalog lock poisoned");
        let store = self.store.read().expect("store lock poisoned");
        let clock = WallClock(Instant::now());
        self.engine(&store)
            .with_parts(&*catalog)
            .with_clock(&clock)
            .execute(spec, requester)
    }

    pub fn engine<'a>(&'a self, store: &'a EventStore) -> Engine<'a> {
        Engine::new(store, &self.schemas, &self.methods, &self.charts, &self.pseudonymizer)
    }

    /// Applies a catalog command, checking indicator specs against the method
    /// and chart registries first, and journals it.
    pub fn mutate(&self, actor: Actor, op: CatalogOp) -> Result<CatalogOutcome, MutationError> {
        let mut journal = self.journal.lock().expect("journal lock poisoned");
        let mut catalog = self.catalog.write().expect("catalog lock poisoned");
        if let CatalogOp::SaveIndicator { spec } | CatalogOp::UpdateIndicator { spec, .. } = &op {
            let store = self.store.read().expect("store lock poisoned");
            self.engine(&store).with_parts(&*catalog).validate(spec)?;
        }
        let command = CatalogCommand { actor, at: now(), op };
        let mut next = catalog.clone();
        let outcome = next.apply(command.clone())?;
        journal.record(&command, &next)?;
        *catalog = next;
        Ok(outcome)
    }

    /// Content hashes of the store (events in commit order) and the catalog.
    pub fn digests(&self) -> Digests {
        let catalog = self.catalog.read().expect("catalog lock poisoned");
        let store = self.store.read().expect("store lock poisoned");
        let mut hasher = Sha256::new();
        for event in store.events() {
            hasher.update(serde_json::to_vec(event).expect("events serialize"));
            hasher.update(b"\n");
        }
        let store_digest = hex::encode(hasher.finalize());
        let catalog_digest = hex::encode(Sha256::digest(serde_json::to_vec(&*catalog).expect("catalog serializes")));
        Digests {
            events: store.len(),
            store_digest,
            catalog_digest,
        }
    }
}

fn now() -> Timestamp {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs() as i64);
    Timestamp::from_epoch_seconds(secs).expect("the clock is within the supported range")
}
