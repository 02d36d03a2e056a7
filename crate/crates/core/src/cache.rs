//! Memo table shared by every recursion, optionally persisted to a
//! line-oriented file of `<key>\t<num>/<den>` records.

use std::collections::HashMap;
use std::fmt;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use log::warn;
use parking_lot::{Mutex, RwLock};

use crate::constraints::Constraint;
use crate::scalar::{parse_count, Count};

/// Identifies one memoized count.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub enum CountKey {
    /// Rational curves of degree `d` (tangencies and incidences).
    Rational { r: u8, d: u32, c: Constraint },
    /// Rational curves with a marked point on a codim-`u` space and `v`
    /// special tangents there.
    Special { r: u8, d: u32, c: Constraint, u: u32, v: u32 },
    /// Rational curves with a node; the node condition sits in `c`.
    Nodal { r: u8, d: u32, c: Constraint },
    /// Ordered two-nodal reducible pairs with per-component constraints.
    Rr2 { r: u8, d1: u32, d2: u32, g1: Constraint, g2: Constraint, k: u32, l: u32 },
    /// Two-nodal reducible pairs with the constraint distributed over both
    /// components.
    Rr2Total { r: u8, d1: u32, d2: u32, c: Constraint, k: u32, l: u32 },
    /// Elliptic curves with fixed j-invariant.
    Elliptic { r: u8, d: u32, c: Constraint },
}

impl fmt::Display for CountKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CountKey::Rational { r, d, c } => write!(f, "R|{r}|{d}|{c}"),
            CountKey::Special { r, d, c, u, v } => write!(f, "W|{r}|{d}|{c}|{u}|{v}"),
            CountKey::Nodal { r, d, c } => write!(f, "N|{r}|{d}|{c}"),
            CountKey::Rr2 { r, d1, d2, g1, g2, k, l } => write!(f, "RR2|{r}|{d1},{d2}|{g1}|{g2}|{k},{l}"),
            CountKey::Rr2Total { r, d1, d2, c, k, l } => write!(f, "RR2T|{r}|{d1},{d2}|{c}|{k},{l}"),
            CountKey::Elliptic { r, d, c } => write!(f, "J|{r}|{d}|{c}"),
        }
    }
}

impl fmt::Debug for CountKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Default)]
pub struct Cache {
    memory: RwLock<HashMap<CountKey, Count>>,
    /// Records replayed from disk, keyed by their text form.
    persisted: RwLock<HashMap<String, Count>>,
    sink: Mutex<Option<(PathBuf, File)>>,
}

impl Cache {
    pub fn in_memory() -> Self {
        Self::default()
    }

    /// Replay `path` if it exists and append new records to it. I/O
    /// failures leave the cache usable in memory.
    pub fn with_file(path: impl AsRef<Path>) -> Self {
        let path = path.as_ref().to_path_buf();
        let cache = Self::default();
        if let Ok(file) = File::open(&path) {
            let mut loaded = cache.persisted.write();
            for (lineno, line) in BufReader::new(file).lines().enumerate() {
                let Ok(line) = line else {
                    warn!("{}: unreadable line {}", path.display(), lineno + 1);
                    continue;
                };
                match parse_record(&line) {
                    Some((key, value)) => {
                        loaded.insert(key, value);
                    }
                    None if line.trim().is_empty() => {}
                    None => warn!("{}: skipping corrupted record on line {}", path.display(), lineno + 1),
                }
            }
        }
        match OpenOptions::new().create(true).append(true).open(&path) {
            Ok(file) => *cache.sink.lock() = Some((path, file)),
            Err(err) => warn!("cache file {} unavailable ({err}); continuing in memory", path.display()),
        }
        cache
    }

    pub fn get(&self, key: &CountKey) -> Option<Count> {
        if let Some(v) = self.memory.read().get(key) {
            return Some(v.clone());
        }
        let persisted = self.persisted.read();
        if persisted.is_empty() {
            return None;
        }
        let v = persisted.get(&key.to_string())?.clone();
        drop(persisted);
        self.memory.write().insert(*key, v.clone());
        Some(v)
    }

    pub fn insert(&self, key: CountKey, value: Count) {
        let fresh = self.memory.write().insert(key, value.clone()).is_none();
        if !fresh {
            return;
        }
        let mut sink = self.sink.lock();
        if let Some((path, file)) = sink.as_mut() {
            if let Err(err) = writeln!(file, "{key}\t{}", record_value(&value)) {
                warn!("cache file {} write failed ({err}); continuing in memory", path.display());
                *sink = None;
            }
        }
    }

    /// Cached value, or the result of `compute`, which is then stored.
    /// Concurrent callers may compute the same key twice; both store the
    /// same value because computations are deterministic.
    pub fn get_or_compute(&self, key: CountKey, compute: impl FnOnce() -> Count) -> Count {
        if let Some(v) = self.get(&key) {
            return v;
        }
        let v = compute();
        self.insert(key, v.clone());
        v
    }

    /// Fallible variant of [`Cache::get_or_compute`]; errors are not cached.
    pub fn get_or_try_compute<E>(
        &self,
        key: CountKey,
        compute: impl FnOnce() -> Result<Count, E>,
    ) -> Result<Count, E> {
        if let Some(v) = self.get(&key) {
            return Ok(v);
        }
        let v = compute()?;
        self.insert(key, v.clone());
        Ok(v)
    }

    pub fn len(&self) -> usize {
        self.memory.read().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn clear(&self) {
        self.memory.write().clear();
        self.persisted.write().clear();
    }
}

fn record_value(v: &Count) -> String {
    format!("{}/{}", v.numer(), v.denom())
}

fn parse_record(line: &str) -> Option<(String, Count)> {
    let (key, value) = line.split_once('\t')?;
    if key.is_empty() {
        return None;
    }
    Some((key.to_string(), parse_count(value.trim())?))
}

/// Text form used in cache files, exposed for round-trip tests.
pub fn serialize_record(key: &CountKey, value: &Count) -> String {
    format!("{key}\t{}", record_value(value))
}

/// Inverse of [`serialize_record`] on the value side.
pub fn deserialize_value(line: &str) -> Option<Count> {
    parse_record(line).map(|(_, v)| v)
}
