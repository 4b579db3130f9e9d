//! Heavy query store: results of queries whose measured runtime exceeded a
//! threshold, keyed by dataset, dataset version and canonical query text.
//!
//! The optional log file is append-only. Each record is a little-endian `u32`
//! length followed by that many bytes; strings inside a record carry their own
//! `u32` length. A truncated final record is ignored on load.

use std::collections::HashMap;
use std::fs::{File, OpenOptions};
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use ldx_core::rdf::{Literal, Term};
use ldx_core::{Origin, QueryResult};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HvsKey {
    pub source: String,
    pub version: u64,
    pub query: String,
}

impl HvsKey {
    pub fn new(source: impl Into<String>, version: u64, query: impl Into<String>) -> Self {
        HvsKey {
            source: source.into(),
            version,
            query: query.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HvsEntry {
    pub result: QueryResult,
    pub measured_runtime: Duration,
    pub stored_at: SystemTime,
}

struct Slot {
    entry: HvsEntry,
    bytes: usize,
    last_used: u64,
}

pub struct HeavyQueryStore {
    threshold: Duration,
    max_bytes: Option<usize>,
    slots: HashMap<HvsKey, Slot>,
    bytes: usize,
    tick: u64,
    log: Option<(PathBuf, BufWriter<File>)>,
}

impl std::fmt::Debug for HeavyQueryStore {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("HeavyQueryStore")
            .field("threshold", &self.threshold)
            .field("entries", &self.slots.len())
            .field("bytes", &self.bytes)
            .finish_non_exhaustive()
    }
}

fn result_bytes(r: &QueryResult) -> usize {
    let cell = |c: &Option<Term>| match c {
        None => 1,
        Some(Term::Uri(u)) => 1 + u.len(),
        Some(Term::Literal(l)) => {
            1 + l.lexical.len() + l.language.as_ref().map_or(0, String::len) + l.datatype.as_ref().map_or(0, String::len)
        }
    };
    r.columns.iter().map(String::len).sum::<usize>() + r.rows.iter().flatten().map(cell).sum::<usize>()
}

impl HeavyQueryStore {
    pub fn new(threshold: Duration) -> Self {
        HeavyQueryStore {
            threshold,
            max_bytes: None,
            slots: HashMap::new(),
            bytes: 0,
            tick: 0,
            log: None,
        }
    }

    /// Evicts least recently used entries once the stored results exceed
    /// `max_bytes` (estimated from their text).
    pub fn with_max_bytes(mut self, max_bytes: usize) -> Self {
        self.max_bytes = Some(max_bytes);
        self
    }

    /// Loads the entries recorded in `path`, then keeps appending new ones.
    pub fn open(path: impl AsRef<Path>, threshold: Duration) -> io::Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut store = HeavyQueryStore::new(threshold);
        if path.exists() {
            let mut data = Vec::new();
            File::open(&path)?.read_to_end(&mut data)?;
            for (key, entry) in decode_log(&data) {
                store.put(key, entry);
            }
        }
        store.rewrite_log(path)?;
        Ok(store)
    }

    pub fn threshold(&self) -> Duration {
        self.threshold
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn bytes(&self) -> usize {
        self.bytes
    }

    pub fn get(&mut self, key: &HvsKey) -> Option<&HvsEntry> {
        self.tick += 1;
        let slot = self.slots.get_mut(key)?;
        slot.last_used = self.tick;
        Some(&slot.entry)
    }

    pub fn contains(&self, key: &HvsKey) -> bool {
        self.slots.contains_key(key)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&HvsKey, &HvsEntry)> {
        self.slots.iter().map(|(k, s)| (k, &s.entry))
    }

    /// Stores `result` when `runtime` exceeds the threshold. Returns whether
    /// it was stored.
    pub fn offer(&mut self, key: HvsKey, result: &QueryResult, runtime: Duration) -> bool {
        if runtime <= self.threshold {
            return false;
        }
        // Entries for older versions of this dataset can never be hit again.
        let stale = self
            .slots
            .keys()
            .any(|k| k.source == key.source && k.version < key.version);
        if stale {
            self.retain_version(&key.source, key.version);
        }
        let entry = HvsEntry {
            result: result.clone(),
            measured_runtime: runtime,
            stored_at: SystemTime::now(),
        };
        if let Some((_, w)) = &mut self.log {
            let record = encode_record(&key, &entry);
            let written = w.write_all(&record).and_then(|_| w.flush());
            if let Err(e) = written {
                log::warn!("heavy query log write failed: {e}");
            }
        }
        self.put(key, entry);
        self.evict();
        true
    }

    fn put(&mut self, key: HvsKey, entry: HvsEntry) {
        self.tick += 1;
        let bytes = result_bytes(&entry.result) + key.query.len();
        self.bytes += bytes;
        let slot = Slot {
            entry,
            bytes,
            last_used: self.tick,
        };
        if let Some(old) = self.slots.insert(key, slot) {
            self.bytes -= old.bytes;
        }
    }

    fn evict(&mut self) {
        let Some(max) = self.max_bytes else {
            return;
        };
        let mut evicted = false;
        while self.bytes > max && self.slots.len() > 1 {
            let oldest = self
                .slots
                .iter()
                .min_by_key(|(_, s)| s.last_used)
                .map(|(k, _)| k.clone())
                .expect("non-empty");
            let slot = self.slots.remove(&oldest).expect("present");
            self.bytes -= slot.bytes;
            evicted = true;
        }
        if evicted {
            self.compact();
        }
    }

    /// Drops the entries of `source` recorded for any other version.
    pub fn retain_version(&mut self, source: &str, version: u64) -> usize {
        let before = self.slots.len();
        self.slots.retain(|k, _| k.source != source || k.version == version);
        self.bytes = self.slots.values().map(|s| s.bytes).sum();
        let removed = before - self.slots.len();
        if removed > 0 {
            self.compact();
        }
        removed
    }

    pub fn clear(&mut self) {
        self.slots.clear();
        self.bytes = 0;
        self.compact();
    }

    fn compact(&mut self) {
        if let Some((path, _)) = self.log.take() {
            if let Err(e) = self.rewrite_log(path) {
                log::warn!("heavy query log compaction failed: {e}");
            }
        }
    }

    fn rewrite_log(&mut self, path: PathBuf) -> io::Result<()> {
        let tmp = path.with_extension("tmp");
        {
            let mut w = BufWriter::new(File::create(&tmp)?);
            for (key, slot) in &self.slots {
                w.write_all(&encode_record(key, &slot.entry))?;
            }
            w.flush()?;
        }
        std::fs::rename(&tmp, &path)?;
        let file = OpenOptions::new().append(true).open(&path)?;
        self.log = Some((path, BufWriter::new(file)));
        Ok(())
    }
}

fn put_str(out: &mut Vec<u8>, s: &str) {
    out.extend_from_slice(&(s.len() as u32).to_le_bytes());
    out.extend_from_slice(s.as_bytes());
}

fn encode_record(key: &HvsKey, entry: &HvsEntry) -> Vec<u8> {
    let mut body = Vec::new();
    put_str(&mut body, &key.source);
    body.extend_from_slice(&key.version.to_le_bytes());
    put_str(&mut body, &key.query);
    body.extend_from_slice(&(entry.measured_runtime.as_micros() as u64).to_le_bytes());
    let stored = entry.stored_at.duration_since(UNIX_EPOCH).unwrap_or_default().as_secs();
    body.extend_from_slice(&stored.to_le_bytes());
    let r = &entry.result;
    body.extend_from_slice(&(r.columns.len() as u32).to_le_bytes());
    for c in &r.columns {
        put_str(&mut body, c);
    }
    body.extend_from_slice(&(r.rows.len() as u32).to_le_bytes());
    for cell in r.rows.iter().flatten() {
        match cell {
            None => body.push(0),
            Some(Term::Uri(u)) => {
                body.push(1);
                put_str(&mut body, u);
            }
            Some(Term::Literal(l)) => {
                body.push(2);
                put_str(&mut body, &l.lexical);
                put_str(&mut body, l.language.as_deref().unwrap_or(""));
                put_str(&mut body, l.datatype.as_deref().unwrap_or(""));
            }
        }
    }
    let mut out = Vec::with_capacity(body.len() + 4);
    out.extend_from_slice(&(body.len() as u32).to_le_bytes());
    out.extend_from_slice(&body);
    out
}

struct Reader<'a> {
    data: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, n: usize) -> Option<&[u8]> {
        if self.data.len() < n {
            return None;
        }
        let (head, tail) = self.data.split_at(n);
        self.data = tail;
        Some(head)
    }

    fn u8(&mut self) -> Option<u8> {
        Some(self.take(1)?[0])
    }

    fn u32(&mut self) -> Option<u32> {
        Some(u32::from_le_bytes(self.take(4)?.try_into().ok()?))
    }

    fn u64(&mut self) -> Option<u64> {
        Some(u64::from_le_bytes(self.take(8)?.try_into().ok()?))
    }

    fn string(&mut self) -> Option<String> {
        let n = self.u32()? as usize;
        String::from_utf8(self.take(n)?.to_vec()).ok()
    }
}

fn decode_record(body: &[u8]) -> Option<(HvsKey, HvsEntry)> {
    let mut r = Reader { data: body };
    let source = r.string()?;
    let version = r.u64()?;
    let query = r.string()?;
    let runtime = Duration::from_micros(r.u64()?);
    let stored_at = UNIX_EPOCH + Duration::from_secs(r.u64()?);
    let ncols = r.u32()? as usize;
    let columns = (0..ncols).map(|_| r.string()).collect::<Option<Vec<_>>>()?;
    let nrows = r.u32()? as usize;
    let mut rows = Vec::with_capacity(nrows.min(1 << 20));
    for _ in 0..nrows {
        let mut row = Vec::with_capacity(ncols);
        for _ in 0..ncols {
            row.push(match r.u8()? {
                0 => None,
                1 => Some(Term::Uri(r.string()?)),
                2 => {
                    let lexical = r.string()?;
                    let language = Some(r.string()?).filter(|s| !s.is_empty());
                    let datatype = Some(r.string()?).filter(|s| !s.is_empty());
                    Some(Term::Literal(Literal {
                        lexical,
                        language,
                        datatype,
                    }))
                }
                _ => return None,
            });
        }
        rows.push(row);
    }
    let result = QueryResult {
        columns,
        rows,
        origin: Origin::Cache,
        elapsed: runtime,
    };
    Some((
        HvsKey { source, version, query },
        HvsEntry {
            result,
            measured_runtime: runtime,
            stored_at,
        },
    ))
}

fn decode_log(mut data: &[u8]) -> Vec<(HvsKey, HvsEntry)> {
    let mut out = Vec::new();
    while data.len() >= 4 {
        let n = u32::from_le_bytes(data[..4].try_into().expect("4 bytes")) as usize;
        let Some(body) = data.get(4..4 + n) else {
            log::warn!("ignoring truncated heavy query log record");
            break;
        };
        match decode_record(body) {
            Some(rec) => out.push(rec),
            None => log::warn!("skipping unreadable heavy query log record"),
        }
        data = &data[4 + n..];
    }
    out
}
