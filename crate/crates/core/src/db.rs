//! On-disk model database: JSON Lines shards keyed by canonical model.
//!
//! Layout of a database directory:
//!
//! ```text
//! manifest.json       {"max_nodes":..,"counts":{"2":32,..},"engine":"..","config":{..}}
//! models_n2.jsonl     one record per line, ascending canonical key
//! models_n3.jsonl
//! ...
//! ```
//!
//! A record line is
//! `{"model":"<canonical>","n":2,"params":{"a(1->0)":"globally",..},"meta":{..}}`
//! where `a(i->j)` is the rate of the edge `i -> j` and `leak(i)` the leak
//! rate of compartment `i`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs::{self, File, OpenOptions};
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{model_class, ModelClass};
use crate::enumerate::{enumerate_keyed, EnumerationConfig, EnumerationError};
use crate::identifiability::{
    assess_canonical, AssessConfig, AssessError, AssessmentRecord, IdStatus, Provenance,
    ENGINE_VERSION,
};
use crate::model::{canonicalize, parse_model, relabel_result, Model, ModelError, ParamKey};

/// Assessments slower than this are reported as hotspots.
pub const HOTSPOT_SECONDS: f64 = 60.0;

#[derive(Debug, Error)]
pub enum DbError {
    #[error("I/O error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}:{line}: {message}")]
    Format {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("model {0} is not in the database")]
    NotFound(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Assess(#[from] AssessError),
    #[error(transparent)]
    Enumeration(#[from] EnumerationError),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DbError + '_ {
    move |source| DbError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Exact line schema of a shard.
#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
struct RecordLine {
    model: String,
    n: usize,
    params: BTreeMap<String, IdStatus>,
    meta: Provenance,
}

impl RecordLine {
    fn from_record(r: &AssessmentRecord) -> Self {
        RecordLine {
            model: r.key.clone(),
            n: r.model.n(),
            params: r
                .statuses
                .iter()
                .map(|(k, v)| (k.to_string(), *v))
                .collect(),
            meta: r.provenance.clone(),
        }
    }

    fn into_record(self) -> Result<AssessmentRecord, String> {
        let model = parse_model(&self.model).map_err(|e| e.to_string())?;
        if canonicalize(&model).key != self.model {
            return Err(format!("'{}' is not in canonical form", self.model));
        }
        if model.n() != self.n {
            return Err(format!("n = {} disagrees with the model", self.n));
        }
        let statuses: BTreeMap<ParamKey, IdStatus> = self
            .params
            .into_iter()
            .map(|(k, v)| Ok((k.parse::<ParamKey>().map_err(|e| e.to_string())?, v)))
            .collect::<Result<_, String>>()?;
        let expected: BTreeSet<ParamKey> = model.params().into_iter().collect();
        if statuses.keys().copied().collect::<BTreeSet<_>>() != expected {
            return Err("parameter set differs from the model's edges and leaks".into());
        }
        if statuses.values().any(|s| *s == IdStatus::Undetermined) {
            return Err("undetermined status in a published record".into());
        }
        Ok(AssessmentRecord {
            key: self.model,
            model,
            statuses,
            provenance: self.meta,
        })
    }
}

/// Serializes one record as a shard line (no trailing newline).
pub fn record_to_json(r: &AssessmentRecord) -> String {
    serde_json::to_string(&RecordLine::from_record(r)).expect("serializable")
}

/// Parses one shard line.
pub fn record_from_json(line: &str) -> Result<AssessmentRecord, String> {
    let raw: RecordLine = serde_json::from_str(line).map_err(|e| e.to_string())?;
    raw.into_record()
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct Manifest {
    pub max_nodes: usize,
    pub counts: BTreeMap<String, usize>,
    pub engine: String,
    pub config: AssessConfig,
}

/// Index bucket attributes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexKey {
    pub n: usize,
    pub inputs: usize,
    pub leaks: usize,
    pub class: ModelClass,
}

impl IndexKey {
    fn of(r: &AssessmentRecord) -> Self {
        IndexKey {
            n: r.model.n(),
            inputs: r.model.num_inputs(),
            leaks: r.model.num_leaks(),
            class: model_class(&r.statuses),
        }
    }
}

/// In-memory database. Immutable once built or loaded.
#[derive(Debug, Clone, Default)]
pub struct Database {
    records: BTreeMap<String, AssessmentRecord>,
    index: BTreeMap<IndexKey, Vec<String>>,
    manifest: Option<Manifest>,
}

/// One built-in filter atom; a [`Filter`] is their conjunction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    Nodes(usize),
    Inputs(usize),
    Leaks(usize),
    StronglyConnected(bool),
    HasStatus(IdStatus),
    AllStatus(IdStatus),
    Class(ModelClass),
}

impl Atom {
    pub fn matches(&self, m: &Model, r: &BTreeMap<ParamKey, IdStatus>) -> bool {
        match *self {
            Atom::Nodes(n) => m.n() == n,
            Atom::Inputs(k) => m.num_inputs() == k,
            Atom::Leaks(k) => m.num_leaks() == k,
            Atom::StronglyConnected(b) => m.strongly_connected() == b,
            Atom::HasStatus(s) => r.values().any(|v| *v == s),
            Atom::AllStatus(s) => r.values().all(|v| *v == s),
            Atom::Class(c) => model_class(r) == c,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Filter {
    pub atoms: Vec<Atom>,
}

impl Filter {
    pub fn new(atoms: Vec<Atom>) -> Self {
        Filter { atoms }
    }

    pub fn matches(&self, m: &Model, r: &BTreeMap<ParamKey, IdStatus>) -> bool {
        self.atoms.iter().all(|a| a.matches(m, r))
    }
}

impl Database {
    pub fn from_records(records: impl IntoIterator<Item = AssessmentRecord>) -> Self {
        let mut db = Database::default();
        for r in records {
            db.insert(r);
        }
        db
    }

    fn insert(&mut self, r: AssessmentRecord) {
        let key = r.key.clone();
        if let Some(old) = self.records.insert(key.clone(), r) {
            if let Some(v) = self.index.get_mut(&IndexKey::of(&old)) {
                v.retain(|k| *k != key);
            }
        }
        let ik = IndexKey::of(&self.records[&key]);
        let bucket = self.index.entry(ik).or_default();
        let pos = bucket.binary_search(&key).unwrap_or_else(|p| p);
        bucket.insert(pos, key);
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn manifest(&self) -> Option<&Manifest> {
        self.manifest.as_ref()
    }

    pub fn max_nodes(&self) -> usize {
        self.records.values().map(|r| r.model.n()).max().unwrap_or(0)
    }

    /// Record counts per vertex count.
    pub fn counts(&self) -> BTreeMap<usize, usize> {
        let mut out = BTreeMap::new();
        for r in self.records.values() {
            *out.entry(r.model.n()).or_insert(0) += 1;
        }
        out
    }

    pub fn record(&self, key: &str) -> Option<&AssessmentRecord> {
        self.records.get(key)
    }

    /// Statuses of `m` in the caller's labeling.
    pub fn get(&self, m: &Model) -> Result<BTreeMap<ParamKey, IdStatus>, DbError> {
        let c = canonicalize(m);
        let rec = self
            .records
            .get(&c.key)
            .ok_or_else(|| DbError::NotFound(m.encode()))?;
        Ok(relabel_result(&rec.statuses, &c.permutation.inverse()))
    }

    /// Every record, ascending canonical key.
    pub fn iter(&self) -> impl Iterator<Item = (&Model, &BTreeMap<ParamKey, IdStatus>)> {
        self.records.values().map(|r| (&r.model, &r.statuses))
    }

    pub fn records(&self) -> impl Iterator<Item = &AssessmentRecord> {
        self.records.values()
    }

    /// Records satisfying `pred`, ascending canonical key.
    pub fn filterby<'a, F>(
        &'a self,
        pred: F,
    ) -> impl Iterator<Item = (&'a Model, &'a BTreeMap<ParamKey, IdStatus>)> + 'a
    where
        F: Fn(&Model, &BTreeMap<ParamKey, IdStatus>) -> bool + 'a,
    {
        self.iter().filter(move |(m, r)| pred(m, r))
    }

    pub fn filter(&self, f: &Filter) -> Vec<(&Model, &BTreeMap<ParamKey, IdStatus>)> {
        self.iter().filter(|(m, r)| f.matches(m, r)).collect()
    }

    /// Index buckets; members of each bucket are in ascending key order.
    pub fn index(&self) -> &BTreeMap<IndexKey, Vec<String>> {
        &self.index
    }

    pub fn bucket(&self, key: &IndexKey) -> &[String] {
        self.index.get(key).map_or(&[], Vec::as_slice)
    }

    /// Writes all shards and the manifest into `dir`.
    pub fn save(&self, dir: &Path, config: &AssessConfig) -> Result<(), DbError> {
        fs::create_dir_all(dir).map_err(io_err(dir))?;
        let counts = self.counts();
        for n in counts.keys() {
            let path = shard_path(dir, *n);
            let recs = self.records.values().filter(|r| r.model.n() == *n);
            write_shard(&path, recs)?;
        }
        let manifest = Manifest {
            max_nodes: self.max_nodes(),
            counts: counts.iter().map(|(n, c)| (n.to_string(), *c)).collect(),
            engine: format!("compartdb {ENGINE_VERSION}"),
            config: self
                .manifest
                .as_ref()
                .map_or_else(|| config.clone(), |m| m.config.clone()),
        };
        let path = dir.join("manifest.json");
        let text = serde_json::to_string_pretty(&manifest).expect("serializable") + "\n";
        fs::write(&path, text).map_err(io_err(&path))?;
        Ok(())
    }

    /// Loads a database directory, checking every record.
    pub fn load(dir: &Path) -> Result<Database, DbError> {
        let mpath = dir.join("manifest.json");
        let text = fs::read_to_string(&mpath).map_err(io_err(&mpath))?;
        let manifest: Manifest = serde_json::from_str(&text).map_err(|e| DbError::Format {
            path: mpath.clone(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let mut db = Database::default();
        for n in 1..=manifest.max_nodes {
            let path = shard_path(dir, n);
            if !path.exists() {
                continue;
            }
            for r in read_shard(&path)? {
                db.insert(r);
            }
        }
        for (n, c) in &manifest.counts {
            let actual = n
                .parse::<usize>()
                .ok()
                .and_then(|n| db.counts().get(&n).copied())
                .unwrap_or(0);
            if actual != *c {
                return Err(DbError::Format {
                    path: mpath.clone(),
                    line: 0,
                    message: format!("manifest count for n={n} is {c}, shard has {actual}"),
                });
            }
        }
        db.manifest = Some(manifest);
        Ok(db)
    }
}

pub fn shard_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("models_n{n}.jsonl"))
}

fn partial_path(dir: &Path, n: usize) -> PathBuf {
    dir.join(format!("models_n{n}.partial.jsonl"))
}

fn write_shard<'a>(
    path: &Path,
    recs: impl Iterator<Item = &'a AssessmentRecord>,
) -> Result<(), DbError> {
    let tmp = path.with_extension("jsonl.tmp");
    {
        let f = File::create(&tmp).map_err(io_err(&tmp))?;
        let mut w = BufWriter::new(f);
        for r in recs {
            writeln!(w, "{}", record_to_json(r)).map_err(io_err(&tmp))?;
        }
        w.flush().map_err(io_err(&tmp))?;
    }
    fs::rename(&tmp, path).map_err(io_err(path))
}

fn read_shard(path: &Path) -> Result<Vec<AssessmentRecord>, DbError> {
    let f = File::open(path).map_err(io_err(path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(io_err(path))?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(record_from_json(&line).map_err(|message| DbError::Format {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        })?);
    }
    Ok(out)
}

/// Options for [`build`].
#[derive(Clone, Debug)]
pub struct BuildOptions {
    pub max_nodes: usize,
    /// Smallest vertex count to include (the shipped database starts at 2).
    pub min_nodes: usize,
    pub max_inputs: usize,
    pub config: AssessConfig,
}

impl BuildOptions {
    pub fn new(max_nodes: usize, config: AssessConfig) -> Self {
        BuildOptions {
            max_nodes,
            min_nodes: 2,
            max_inputs: 2,
            config,
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct BuildReport {
    /// Records assessed in this run (excludes resumed ones).
    pub assessed: usize,
    pub resumed: usize,
    /// `(canonical key, seconds)` for assessments over [`HOTSPOT_SECONDS`].
    pub hotspots: Vec<(String, f64)>,
}

/// Enumerates and assesses every model for `n = min_nodes..=max_nodes`,
/// writing shards and a manifest. Previously assessed keys (complete
/// shards or partial progress files) are reused.
///
/// `progress(n, done, total)` is called after every batch.
pub fn build(
    dir: &Path,
    opts: &BuildOptions,
    progress: &(dyn Fn(usize, usize, usize) + Sync),
) -> Result<(Database, BuildReport), DbError> {
    opts.config.validate()?;
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut report = BuildReport::default();
    let mut db = Database::default();
    for n in opts.min_nodes..=opts.max_nodes {
        let ecfg = EnumerationConfig {
            n,
            max_inputs: opts.max_inputs.min(n),
            outputs_exactly: 1,
        };
        let models = enumerate_keyed(&ecfg)?;
        let mut have: BTreeMap<String, AssessmentRecord> = BTreeMap::new();
        for path in [shard_path(dir, n), partial_path(dir, n)] {
            if path.exists() {
                for r in read_shard(&path)? {
                    if r.provenance.seed == opts.config.seed
                        && r.provenance.prime == opts.config.prime
                        && r.provenance.prime2 == opts.config.confirmation_prime
                    {
                        have.insert(r.key.clone(), r);
                    }
                }
            }
        }
        let wanted: BTreeSet<&String> = models.iter().map(|(k, _)| k).collect();
        have.retain(|k, _| wanted.contains(k));
        report.resumed += have.len();
        let todo: Vec<&(String, Model)> =
            models.iter().filter(|(k, _)| !have.contains_key(k)).collect();

        let ppath = partial_path(dir, n);
        let mut partial = BufWriter::new(
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(&ppath)
                .map_err(io_err(&ppath))?,
        );
        let total = models.len();
        let mut done = have.len();
        for chunk in todo.chunks(512) {
            let results: Vec<Result<(AssessmentRecord, f64), AssessError>> = chunk
                .par_iter()
                .map(|(k, m)| {
                    let t = Instant::now();
                    let r = assess_canonical(k, m, &opts.config)?;
                    Ok((r, t.elapsed().as_secs_f64()))
                })
                .collect();
            for res in results {
                let (r, secs) = res?;
                if secs > HOTSPOT_SECONDS {
                    report.hotspots.push((r.key.clone(), secs));
                }
                writeln!(partial, "{}", record_to_json(&r)).map_err(io_err(&ppath))?;
                have.insert(r.key.clone(), r);
                report.assessed += 1;
            }
            partial.flush().map_err(io_err(&ppath))?;
            done += chunk.len();
            progress(n, done, total);
        }
        drop(partial);
        write_shard(&shard_path(dir, n), have.values())?;
        fs::remove_file(&ppath).map_err(io_err(&ppath))?;
        for r in have.into_values() {
            db.insert(r);
        }
    }
    db.manifest = None;
    db.save(dir, &opts.config)?;
    let db = Database::load(dir)?;
    Ok((db, report))
}
