//! Model-level classification, statistics tables, heatmaps and the
//! leak-removal conjecture check.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::db::Database;
use crate::enumerate::MAX_ENUMERATION_VERTICES;
use crate::identifiability::{assess_model, AssessConfig, AssessError, IdStatus};
use crate::model::{canonicalize, Model, ParamKey};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelClass {
    #[serde(rename = "globally")]
    Identifiable,
    #[serde(rename = "locally")]
    LocallyIdentifiable,
    #[serde(rename = "nonidentifiable")]
    NonIdentifiable,
}

impl ModelClass {
    pub const ALL: [ModelClass; 3] = [
        ModelClass::Identifiable,
        ModelClass::LocallyIdentifiable,
        ModelClass::NonIdentifiable,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelClass::Identifiable => "globally",
            ModelClass::LocallyIdentifiable => "locally",
            ModelClass::NonIdentifiable => "nonidentifiable",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for ModelClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ModelClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "globally" | "identifiable" => Ok(ModelClass::Identifiable),
            "locally" => Ok(ModelClass::LocallyIdentifiable),
            "nonidentifiable" => Ok(ModelClass::NonIdentifiable),
            _ => Err(format!("unknown model class '{s}'")),
        }
    }
}

/// Worst status wins; a model without parameters is identifiable.
pub fn model_class(r: &BTreeMap<ParamKey, IdStatus>) -> ModelClass {
    let mut class = ModelClass::Identifiable;
    for s in r.values() {
        match s {
            IdStatus::NonIdentifiable | IdStatus::Undetermined => {
                return ModelClass::NonIdentifiable
            }
            IdStatus::Locally => class = ModelClass::LocallyIdentifiable,
            IdStatus::Globally => {}
        }
    }
    class
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dimension {
    Nodes,
    Leaks,
    Inputs,
    LeaksInputs,
}

impl Dimension {
    fn group(self, m: &Model) -> Vec<usize> {
        match self {
            Dimension::Nodes => vec![m.n()],
            Dimension::Leaks => vec![m.num_leaks()],
            Dimension::Inputs => vec![m.num_inputs()],
            Dimension::LeaksInputs => vec![m.num_leaks(), m.num_inputs()],
        }
    }

    fn header(self) -> &'static str {
        match self {
            Dimension::Nodes => "nodes",
            Dimension::Leaks => "leaks",
            Dimension::Inputs => "inputs",
            Dimension::LeaksInputs => "leaks,inputs",
        }
    }
}

impl FromStr for Dimension {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "nodes" => Ok(Dimension::Nodes),
            "leaks" => Ok(Dimension::Leaks),
            "inputs" => Ok(Dimension::Inputs),
            "leaks-inputs" | "leaksxinputs" => Ok(Dimension::LeaksInputs),
            _ => Err(format!("unknown grouping '{s}'")),
        }
    }
}

/// Class counts per group, columns ordered as [`ModelClass::ALL`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StatsTable {
    pub dimension: Dimension,
    pub rows: BTreeMap<Vec<usize>, [usize; 3]>,
}

impl StatsTable {
    pub fn row(&self, group: &[usize]) -> [usize; 3] {
        self.rows.get(group).copied().unwrap_or([0; 3])
    }

    pub fn total(&self) -> usize {
        self.rows.values().flatten().sum()
    }

    pub fn column_totals(&self) -> [usize; 3] {
        let mut t = [0; 3];
        for r in self.rows.values() {
            for (a, b) in t.iter_mut().zip(r) {
                *a += b;
            }
        }
        t
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{},globally,locally,nonidentifiable\n", self.dimension.header());
        for (g, c) in &self.rows {
            let g: Vec<String> = g.iter().map(usize::to_string).collect();
            writeln!(s, "{},{},{},{}", g.join(","), c[0], c[1], c[2]).unwrap();
        }
        s
    }
}

pub fn stats_by(db: &Database, dim: Dimension) -> StatsTable {
    let mut rows: BTreeMap<Vec<usize>, [usize; 3]> = BTreeMap::new();
    for (m, r) in db.iter() {
        rows.entry(dim.group(m)).or_default()[model_class(r).index()] += 1;
    }
    StatsTable {
        dimension: dim,
        rows,
    }
}

/// Counts by number of inputs (rows `0..=2`) and leaks (columns `0..=4`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Heatmap {
    pub class: Option<ModelClass>,
    pub cells: Vec<Vec<usize>>,
}

pub const HEATMAP_ROWS: usize = 3;
pub const HEATMAP_COLS: usize = MAX_ENUMERATION_VERTICES + 1;

impl Heatmap {
    pub fn total(&self) -> usize {
        self.cells.iter().flatten().sum()
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("inputs\\leaks");
        for c in 0..HEATMAP_COLS {
            write!(s, ",{c}").unwrap();
        }
        s.push('\n');
        for (i, row) in self.cells.iter().enumerate() {
            write!(s, "{i}").unwrap();
            for v in row {
                write!(s, ",{v}").unwrap();
            }
            s.push('\n');
        }
        s
    }

    /// Cell-shaded rendering of the CSV grid, white to dark blue.
    pub fn to_svg(&self) -> String {
        const CELL: usize = 64;
        const MARGIN: usize = 48;
        let w = MARGIN + CELL * HEATMAP_COLS + 8;
        let h = MARGIN + CELL * HEATMAP_ROWS + 8;
        let max = self.cells.iter().flatten().copied().max().unwrap_or(0).max(1);
        let title = self.class.map_or("all", ModelClass::as_str);
        let mut s = String::new();
        writeln!(
            s,
            r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(s, r#"<title>{title}</title>"#).unwrap();
        writeln!(s, r#"<text x="{}" y="14" text-anchor="middle">leaks</text>"#, MARGIN + CELL * HEATMAP_COLS / 2).unwrap();
        writeln!(
            s,
            r#"<text x="12" y="{}" text-anchor="middle" transform="rotate(-90 12 {})">inputs</text>"#,
            MARGIN + CELL * HEATMAP_ROWS / 2,
            MARGIN + CELL * HEATMAP_ROWS / 2
        )
        .unwrap();
        for c in 0..HEATMAP_COLS {
            writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="middle">{c}</text>"#,
                MARGIN + c * CELL + CELL / 2,
                MARGIN - 8
            )
            .unwrap();
        }
        for (r, row) in self.cells.iter().enumerate() {
            let y = MARGIN + r * CELL;
            writeln!(
                s,
                r#"<text x="{}" y="{}" text-anchor="end">{r}</text>"#,
                MARGIN - 8,
                y + CELL / 2 + 4
            )
            .unwrap();
            for (c, &v) in row.iter().enumerate() {
                let x = MARGIN + c * CELL;
                let t = v as f64 / max as f64;
                let shade = |lo: f64, hi: f64| (lo + (hi - lo) * t).round() as u8;
                let (red, green, blue) = (shade(255.0, 8.0), shade(255.0, 48.0), shade(255.0, 107.0));
                let ink = if t > 0.5 { "white" } else { "black" };
                writeln!(
                    s,
                    r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="#{red:02x}{green:02x}{blue:02x}" stroke="#888"/>"##
                )
                .unwrap();
                writeln!(
                    s,
                    r#"<text x="{}" y="{}" text-anchor="middle" fill="{ink}">{v}</text>"#,
                    x + CELL / 2,
                    y + CELL / 2 + 4
                )
                .unwrap();
            }
        }
        s.push_str("</svg>\n");
        s
    }
}

pub fn heatmap(db: &Database, class: Option<ModelClass>) -> Heatmap {
    let mut cells = vec![vec![0; HEATMAP_COLS]; HEATMAP_ROWS];
    for (m, r) in db.iter() {
        if class.is_some_and(|c| model_class(r) != c) {
            continue;
        }
        let (i, l) = (m.num_inputs(), m.num_leaks());
        if i < HEATMAP_ROWS && l < HEATMAP_COLS {
            cells[i][l] += 1;
        }
    }
    Heatmap { class, cells }
}

/// A strongly connected model with inputs and a single leak whose removal
/// makes some parameter non-identifiable.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    /// Canonical labeling of the model with its leak.
    #[serde(serialize_with = "ser_model")]
    pub model: Model,
    pub leak: usize,
    #[serde(serialize_with = "ser_statuses")]
    pub before: BTreeMap<ParamKey, IdStatus>,
    /// Statuses of the leak-free model, in the same labeling as `model`.
    #[serde(serialize_with = "ser_statuses")]
    pub after: BTreeMap<ParamKey, IdStatus>,
}

fn ser_model<S: serde::Serializer>(m: &Model, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&m.encode())
}

fn ser_statuses<S: serde::Serializer>(
    r: &BTreeMap<ParamKey, IdStatus>,
    s: S,
) -> Result<S::Ok, S::Error> {
    use serde::ser::SerializeMap;
    let mut map = s.serialize_map(Some(r.len()))?;
    for (k, v) in r {
        map.serialize_entry(&k.to_string(), v)?;
    }
    map.end()
}

impl Counterexample {
    pub fn without_leak(&self) -> Model {
        self.model.remove_leak(self.leak).expect("counterexample has its leak")
    }

    /// Re-derives both assessments from scratch and checks the defining
    /// properties.
    pub fn verify(&self, cfg: &AssessConfig) -> Result<bool, AssessError> {
        let before = assess_model(&self.model, cfg)?;
        let after = assess_model(&self.without_leak(), cfg)?;
        Ok(is_candidate(&self.model)
            && before == self.before
            && after == self.after
            && model_class(&before) != ModelClass::NonIdentifiable
            && after.values().any(|s| *s == IdStatus::NonIdentifiable))
    }
}

impl fmt::Display for Counterexample {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.model)?;
        writeln!(f, "  before:")?;
        for (k, v) in &self.before {
            writeln!(f, "    {k}: {v}")?;
        }
        writeln!(f, "  after removing leak({}):", self.leak)?;
        for (k, v) in &self.after {
            writeln!(f, "    {k}: {v}")?;
        }
        Ok(())
    }
}

fn is_candidate(m: &Model) -> bool {
    m.strongly_connected() && m.num_inputs() >= 1 && m.num_leaks() == 1
}

/// Statuses for `m` from the database, assessing it directly when absent.
pub fn lookup_or_assess(
    db: &Database,
    m: &Model,
    cfg: &AssessConfig,
) -> Result<BTreeMap<ParamKey, IdStatus>, AssessError> {
    match db.get(m) {
        Ok(r) => Ok(r),
        Err(_) => assess_model(m, cfg),
    }
}

/// Scans models with `n <= max_nodes` for leak-removal counterexamples,
/// in ascending key order.
pub fn check_conjecture_4_5(
    db: &Database,
    max_nodes: usize,
    cfg: &AssessConfig,
) -> Result<Vec<Counterexample>, AssessError> {
    let candidates: Vec<(&Model, &BTreeMap<ParamKey, IdStatus>)> = db
        .iter()
        .filter(|(m, r)| {
            m.n() <= max_nodes
                && is_candidate(m)
                && model_class(r) != ModelClass::NonIdentifiable
        })
        .collect();
    let found: Vec<Option<Counterexample>> = candidates
        .par_iter()
        .map(|(m, r)| {
            let leak = m.leaks()[0];
            let reduced = m.remove_leak(leak).expect("model has the leak");
            let after = lookup_or_assess(db, &reduced, cfg)?;
            Ok(after
                .values()
                .any(|s| *s == IdStatus::NonIdentifiable)
                .then(|| Counterexample {
                    model: **m,
                    leak,
                    before: (*r).clone(),
                    after,
                }))
        })
        .collect::<Result<_, AssessError>>()?;
    Ok(found.into_iter().flatten().collect())
}

/// The two readings of "the target of the edge directly leads to an output".
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum EdgeReading {
    /// The target vertex is itself an output.
    #[serde(rename = "target-is-output")]
    TargetIsOutput,
    /// The target vertex has an edge into an output.
    #[serde(rename = "target-feeds-output")]
    TargetFeedsOutput,
}

impl EdgeReading {
    pub const BOTH: [EdgeReading; 2] = [EdgeReading::TargetIsOutput, EdgeReading::TargetFeedsOutput];

    fn applies(self, m: &Model, from: usize, to: usize) -> bool {
        if !m.is_input(from) {
            return false;
        }
        match self {
            EdgeReading::TargetIsOutput => m.is_output(to),
            EdgeReading::TargetFeedsOutput => {
                m.out_neighbors(to).into_iter().any(|w| m.is_output(w))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeReport {
    pub reading: EdgeReading,
    pub edges: usize,
    pub globally: usize,
    pub locally: usize,
    pub nonidentifiable: usize,
    /// `(canonical model, edge, status)` for every edge that is not globally
    /// identifiable.
    pub exceptions: Vec<(String, String, IdStatus)>,
}

/// Statuses of edges `i -> j` with an input at `i`, under both readings.
pub fn edge_regularity_report(db: &Database, max_nodes: usize) -> Vec<EdgeReport> {
    EdgeReading::BOTH
        .iter()
        .map(|&reading| {
            let mut rep = EdgeReport {
                reading,
                edges: 0,
                globally: 0,
                locally: 0,
                nonidentifiable: 0,
                exceptions: Vec::new(),
            };
            for (m, r) in db.iter().filter(|(m, _)| m.n() <= max_nodes) {
                for (k, s) in r {
                    let ParamKey::Edge { from, to } = *k else { continue };
                    if !reading.applies(m, from as usize, to as usize) {
                        continue;
                    }
                    rep.edges += 1;
                    match s {
                        IdStatus::Globally => rep.globally += 1,
                        IdStatus::Locally => rep.locally += 1,
                        _ => rep.nonidentifiable += 1,
                    }
                    if *s != IdStatus::Globally {
                        rep.exceptions.push((m.encode(), k.to_string(), *s));
                    }
                }
            }
            rep
        })
        .collect()
}

/// Canonical keys of a list of models, for isomorphism comparisons.
pub fn canonical_keys<'a>(models: impl IntoIterator<Item = &'a Model>) -> Vec<String> {
    let mut v: Vec<String> = models.into_iter().map(|m| canonicalize(m).key).collect();
    v.sort();
    v
}
