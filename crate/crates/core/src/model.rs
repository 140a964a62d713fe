//! Linear compartment models: representation, validation, graph predicates,
//! canonical labeling and relabeling of per-parameter results.
//!
//! A model is a directed graph on `n` compartments plus three vertex sets:
//! inputs, outputs and leaks. Every edge `i -> j` and every leak carries one
//! rate constant, named by a [`ParamKey`].

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use thiserror::Error;

/// Largest supported vertex count; canonicalization enumerates all `n!`
/// relabelings.
pub const MAX_VERTICES: usize = 8;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("syntax error at byte {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("invalid model: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("vertex {0} has no leak")]
    NotALeak(usize),
    #[error("permutation does not match the model size")]
    BadPermutation,
}

fn join_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

/// One broken model invariant.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("model must have at least one vertex")]
    Empty,
    #[error("{0} vertices exceed the supported maximum of {MAX_VERTICES}")]
    TooManyVertices(usize),
    #[error("{set} vertex {vertex} out of range [0, {n})")]
    OutOfRange {
        set: &'static str,
        vertex: usize,
        n: usize,
    },
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {0}->{1}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} listed twice in {set}")]
    DuplicateVertex { set: &'static str, vertex: usize },
}

/// Unchecked model description, as read from user input.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RawModel {
    pub n: usize,
    pub edges: Vec<(usize, usize)>,
    pub inputs: Vec<usize>,
    pub outputs: Vec<usize>,
    pub leaks: Vec<usize>,
}

/// A validated linear compartment model.
///
/// Vertex sets and adjacency rows are bitmasks, so models are `Copy` and
/// cheap to relabel.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Model {
    n: u8,
    adj: [u8; MAX_VERTICES],
    inputs: u8,
    outputs: u8,
    leaks: u8,
}

/// Checks every invariant of `raw`, reporting all violations at once.
pub fn validate(raw: &RawModel) -> Result<Model, ModelError> {
    let n = raw.n;
    let mut bad = Vec::new();
    if n == 0 {
        bad.push(Violation::Empty);
    }
    if n > MAX_VERTICES {
        bad.push(Violation::TooManyVertices(n));
        return Err(ModelError::Invalid(bad));
    }
    let mut adj = [0u8; MAX_VERTICES];
    for &(i, j) in &raw.edges {
        let mut ok = true;
        for v in [i, j] {
            if v >= n {
                bad.push(Violation::OutOfRange {
                    set: "edge",
                    vertex: v,
                    n,
                });
                ok = false;
            }
        }
        if i == j {
            bad.push(Violation::SelfLoop(i));
            ok = false;
        }
        if ok {
            if adj[i] & (1 << j) != 0 {
                bad.push(Violation::DuplicateEdge(i, j));
            }
            adj[i] |= 1 << j;
        }
    }
    let mut mask_of = |set: &'static str, vs: &[usize]| {
        let mut mask = 0u8;
        for &v in vs {
            if v >= n {
                bad.push(Violation::OutOfRange { set, vertex: v, n });
            } else if mask & (1 << v) != 0 {
                bad.push(Violation::DuplicateVertex { set, vertex: v });
            } else {
                mask |= 1 << v;
            }
        }
        mask
    };
    let inputs = mask_of("input", &raw.inputs);
    let outputs = mask_of("output", &raw.outputs);
    let leaks = mask_of("leak", &raw.leaks);
    if !bad.is_empty() {
        return Err(ModelError::Invalid(bad));
    }
    Ok(Model {
        n: n as u8,
        adj,
        inputs,
        outputs,
        leaks,
    })
}

fn bits(mask: u8) -> impl Iterator<Item = usize> {
    (0..8).filter(move |i| mask & (1 << i) != 0)
}

impl Model {
    /// Convenience constructor; same checks as [`validate`].
    pub fn new(
        n: usize,
        edges: &[(usize, usize)],
        inputs: &[usize],
        outputs: &[usize],
        leaks: &[usize],
    ) -> Result<Model, ModelError> {
        validate(&RawModel {
            n,
            edges: edges.to_vec(),
            inputs: inputs.to_vec(),
            outputs: outputs.to_vec(),
            leaks: leaks.to_vec(),
        })
    }

    /// Builds a model from bitmasks; callers guarantee the invariants.
    pub(crate) fn from_masks(n: usize, adj: &[u8], inputs: u8, outputs: u8, leaks: u8) -> Model {
        let mut a = [0u8; MAX_VERTICES];
        a[..n].copy_from_slice(&adj[..n]);
        Model {
            n: n as u8,
            adj: a,
            inputs,
            outputs,
            leaks,
        }
    }

    pub fn n(&self) -> usize {
        self.n as usize
    }

    /// Edges `(i, j)` meaning `i -> j`, sorted lexicographically.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        (0..self.n())
            .flat_map(|i| bits(self.adj[i]).map(move |j| (i, j)))
            .collect()
    }

    pub fn num_edges(&self) -> usize {
        self.adj.iter().map(|r| r.count_ones() as usize).sum()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        from < self.n() && self.adj[from] & (1 << to) != 0
    }

    pub fn out_neighbors(&self, v: usize) -> Vec<usize> {
        bits(self.adj[v]).collect()
    }

    pub fn inputs(&self) -> Vec<usize> {
        bits(self.inputs).collect()
    }

    pub fn outputs(&self) -> Vec<usize> {
        bits(self.outputs).collect()
    }

    pub fn leaks(&self) -> Vec<usize> {
        bits(self.leaks).collect()
    }

    pub fn is_input(&self, v: usize) -> bool {
        self.inputs & (1 << v) != 0
    }

    pub fn is_output(&self, v: usize) -> bool {
        self.outputs & (1 << v) != 0
    }

    pub fn is_leak(&self, v: usize) -> bool {
        self.leaks & (1 << v) != 0
    }

    pub fn num_inputs(&self) -> usize {
        self.inputs.count_ones() as usize
    }

    pub fn num_outputs(&self) -> usize {
        self.outputs.count_ones() as usize
    }

    pub fn num_leaks(&self) -> usize {
        self.leaks.count_ones() as usize
    }

    /// All rate constants, edges first (by `(from, to)`), then leaks.
    pub fn params(&self) -> Vec<ParamKey> {
        let mut out: Vec<ParamKey> = self
            .edges()
            .into_iter()
            .map(|(i, j)| ParamKey::Edge {
                from: i as u8,
                to: j as u8,
            })
            .collect();
        out.extend(self.leaks().into_iter().map(|i| ParamKey::Leak(i as u8)));
        out
    }

    pub fn num_params(&self) -> usize {
        self.num_edges() + self.num_leaks()
    }

    /// Undirected connectivity of the graph.
    pub fn weakly_connected(&self) -> bool {
        let n = self.n();
        let mut und = [0u8; MAX_VERTICES];
        for i in 0..n {
            und[i] |= self.adj[i];
            for j in bits(self.adj[i]) {
                und[j] |= 1 << i;
            }
        }
        closure(&und, 1) == full_mask(n)
    }

    /// Every ordered pair of vertices joined by a directed path.
    pub fn strongly_connected(&self) -> bool {
        let n = self.n();
        (0..n).all(|v| closure(&self.adj, 1 << v) == full_mask(n))
    }

    /// Every vertex has a (possibly empty) directed path to some output.
    pub fn all_reach_output(&self) -> bool {
        let n = self.n();
        let rev = self.reversed_adj();
        closure(&rev, self.outputs) == full_mask(n)
    }

    fn reversed_adj(&self) -> [u8; MAX_VERTICES] {
        let mut rev = [0u8; MAX_VERTICES];
        for i in 0..self.n() {
            for j in bits(self.adj[i]) {
                rev[j] |= 1 << i;
            }
        }
        rev
    }

    /// The same model with the leak at `v` removed.
    pub fn remove_leak(&self, v: usize) -> Result<Model, ModelError> {
        if v >= self.n() || !self.is_leak(v) {
            return Err(ModelError::NotALeak(v));
        }
        let mut m = *self;
        m.leaks &= !(1 << v);
        Ok(m)
    }

    /// Relabels vertex `i` as `perm[i]`.
    pub fn relabel(&self, perm: &Permutation) -> Result<Model, ModelError> {
        if perm.len() != self.n() {
            return Err(ModelError::BadPermutation);
        }
        Ok(self.relabel_unchecked(perm.as_slice()))
    }

    fn relabel_unchecked(&self, p: &[u8]) -> Model {
        let map_mask = |mask: u8| {
            let mut out = 0u8;
            for v in bits(mask) {
                out |= 1 << p[v];
            }
            out
        };
        let mut adj = [0u8; MAX_VERTICES];
        for i in 0..self.n() {
            adj[p[i] as usize] = map_mask(self.adj[i]);
        }
        Model {
            n: self.n,
            adj,
            inputs: map_mask(self.inputs),
            outputs: map_mask(self.outputs),
            leaks: map_mask(self.leaks),
        }
    }

    /// Writes the text encoding into `buf` (cleared first).
    fn encode_into(&self, buf: &mut Vec<u8>) {
        fn list(buf: &mut Vec<u8>, mask: u8) {
            buf.push(b'[');
            let mut first = true;
            for v in bits(mask) {
                if !first {
                    buf.push(b',');
                }
                first = false;
                buf.push(b'0' + v as u8);
            }
            buf.push(b']');
        }
        buf.clear();
        buf.extend_from_slice(b"graph=[");
        for i in 0..self.n() {
            if i > 0 {
                buf.push(b',');
            }
            list(buf, self.adj[i]);
        }
        buf.extend_from_slice(b"];in=");
        list(buf, self.inputs);
        buf.extend_from_slice(b";out=");
        list(buf, self.outputs);
        buf.extend_from_slice(b";leak=");
        list(buf, self.leaks);
    }

    /// Text encoding, e.g. `graph=[[1],[0,2],[0,1]];in=[0,1];out=[2];leak=[0]`.
    pub fn encode(&self) -> String {
        let mut buf = Vec::with_capacity(64);
        self.encode_into(&mut buf);
        String::from_utf8(buf).expect("ascii")
    }
}

fn full_mask(n: usize) -> u8 {
    ((1u16 << n) - 1) as u8
}

/// Vertices reachable from `start` along `adj`.
fn closure(adj: &[u8; MAX_VERTICES], start: u8) -> u8 {
    let mut seen = start;
    let mut frontier = start;
    while frontier != 0 {
        let mut next = 0u8;
        for v in bits(frontier) {
            next |= adj[v];
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.encode())
    }
}

impl fmt::Debug for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Model({})", self.encode())
    }
}

impl FromStr for Model {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_model(s)
    }
}

/// Same as [`Model::encode`].
pub fn format_model(m: &Model) -> String {
    m.encode()
}

/// Parses the text encoding produced by [`format_model`].
pub fn parse_model(s: &str) -> Result<Model, ModelError> {
    let mut p = Parser { s: s.as_bytes(), pos: 0 };
    p.expect("graph=")?;
    let graph = p.nested_list()?;
    p.expect(";in=")?;
    let inputs = p.list()?;
    p.expect(";out=")?;
    let outputs = p.list()?;
    if p.pos == s.len() {
        return Err(p.error("missing field 'leak'"));
    }
    p.expect(";leak=")?;
    let leaks = p.list()?;
    if p.pos != s.len() {
        return Err(p.error("trailing characters"));
    }
    let edges = graph
        .iter()
        .enumerate()
        .flat_map(|(i, row)| row.iter().map(move |&j| (i, j)))
        .collect();
    validate(&RawModel {
        n: graph.len(),
        edges,
        inputs,
        outputs,
        leaks,
    })
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ModelError {
        ModelError::Parse {
            pos: self.pos,
            message: message.to_string(),
        }
    }

    fn expect(&mut self, lit: &str) -> Result<(), ModelError> {
        if self.s[self.pos..].starts_with(lit.as_bytes()) {
            self.pos += lit.len();
            Ok(())
        } else {
            Err(self.error(&format!("expected '{lit}'")))
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn number(&mut self) -> Result<usize, ModelError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.error("expected a vertex index"));
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| ModelError::Parse {
                pos: start,
                message: "vertex index too large".into(),
            })
    }

    fn list(&mut self) -> Result<Vec<usize>, ModelError> {
        self.expect("[")?;
        let mut out = Vec::new();
        if self.peek() == Some(b']') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.number()?);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.error("expected ',' or ']'")),
            }
        }
    }

    fn nested_list(&mut self) -> Result<Vec<Vec<usize>>, ModelError> {
        self.expect("[")?;
        let mut out = Vec::new();
        if self.peek() == Some(b']') {
            self.pos += 1;
            return Ok(out);
        }
        loop {
            out.push(self.list()?);
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {
                    self.pos += 1;
                    return Ok(out);
                }
                _ => return Err(self.error("expected ',' or ']'")),
            }
        }
    }
}

/// Names one rate constant.
///
/// `Edge { from: i, to: j }` is the rate of flow `i -> j` (the `(j, i)` entry
/// of the compartmental matrix); `Leak(i)` is the outflow rate of `i`.
/// The derived order puts every edge before every leak.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ParamKey {
    Edge { from: u8, to: u8 },
    Leak(u8),
}

impl ParamKey {
    pub fn edge(from: usize, to: usize) -> Self {
        ParamKey::Edge {
            from: from as u8,
            to: to as u8,
        }
    }

    pub fn leak(v: usize) -> Self {
        ParamKey::Leak(v as u8)
    }

    pub fn relabel(self, perm: &Permutation) -> Self {
        let p = perm.as_slice();
        match self {
            ParamKey::Edge { from, to } => ParamKey::Edge {
                from: p[from as usize],
                to: p[to as usize],
            },
            ParamKey::Leak(v) => ParamKey::Leak(p[v as usize]),
        }
    }
}

impl fmt::Display for ParamKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamKey::Edge { from, to } => write!(f, "a({from}->{to})"),
            ParamKey::Leak(v) => write!(f, "leak({v})"),
        }
    }
}

impl FromStr for ParamKey {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ModelError::Parse {
            pos: 0,
            message: format!("bad parameter name '{s}'"),
        };
        if let Some(inner) = s.strip_prefix("a(").and_then(|r| r.strip_suffix(')')) {
            let (a, b) = inner.split_once("->").ok_or_else(bad)?;
            let from: u8 = a.parse().map_err(|_| bad())?;
            let to: u8 = b.parse().map_err(|_| bad())?;
            return Ok(ParamKey::Edge { from, to });
        }
        if let Some(inner) = s.strip_prefix("leak(").and_then(|r| r.strip_suffix(')')) {
            return Ok(ParamKey::Leak(inner.parse().map_err(|_| bad())?));
        }
        Err(bad())
    }
}

/// A bijection on `[0, n)`; `perm[i]` is the new label of vertex `i`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Permutation(Vec<u8>);

impl Permutation {
    pub fn identity(n: usize) -> Self {
        Permutation((0..n as u8).collect())
    }

    pub fn from_images(images: Vec<usize>) -> Option<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            if i >= n || seen[i] {
                return None;
            }
            seen[i] = true;
        }
        Some(Permutation(images.into_iter().map(|i| i as u8).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    pub fn apply(&self, v: usize) -> usize {
        self.0[v] as usize
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &p)| i == p as usize)
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0u8; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p as usize] = i as u8;
        }
        Permutation(inv)
    }

    /// `self` after `first`: vertex `v` goes to `self(first(v))`.
    pub fn after(&self, first: &Permutation) -> Self {
        Permutation(first.0.iter().map(|&v| self.0[v as usize]).collect())
    }
}

/// All permutations of `[0, n)` in lexicographic order (identity first).
fn permutations(n: usize) -> &'static [Vec<u8>] {
    static TABLE: OnceLock<Vec<Vec<Vec<u8>>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        (0..=MAX_VERTICES)
            .map(|k| {
                let mut all = Vec::new();
                let mut cur: Vec<u8> = (0..k as u8).collect();
                loop {
                    all.push(cur.clone());
                    // next lexicographic permutation
                    let Some(i) = (1..cur.len()).rev().find(|&i| cur[i - 1] < cur[i]) else {
                        break;
                    };
                    let j = (i..cur.len()).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
                    cur.swap(i - 1, j);
                    cur[i..].reverse();
                }
                all
            })
            .collect()
    });
    &table[n]
}

/// Canonical representative of a model's isomorphism class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalForm {
    pub canonical: Model,
    /// Maps original labels to canonical labels.
    pub permutation: Permutation,
    /// Text encoding of `canonical`.
    pub key: String,
}

/// Picks the relabeling with the lexicographically smallest text encoding.
pub fn canonicalize(m: &Model) -> CanonicalForm {
    let mut best: Option<(Vec<u8>, &Vec<u8>)> = None;
    let mut buf = Vec::with_capacity(96);
    for p in permutations(m.n()) {
        m.relabel_unchecked(p).encode_into(&mut buf);
        match &best {
            Some((b, _)) if buf >= *b => {}
            _ => best = Some((buf.clone(), p)),
        }
    }
    let (key, p) = best.expect("at least the identity permutation");
    CanonicalForm {
        canonical: m.relabel_unchecked(p),
        permutation: Permutation(p.clone()),
        key: String::from_utf8(key).expect("ascii"),
    }
}

/// Canonical key only.
pub fn canonical_key(m: &Model) -> String {
    canonicalize(m).key
}

/// Moves a per-parameter result along a vertex relabeling.
pub fn relabel_result<V: Clone>(
    r: &BTreeMap<ParamKey, V>,
    perm: &Permutation,
) -> BTreeMap<ParamKey, V> {
    r.iter().map(|(k, v)| (k.relabel(perm), v.clone())).collect()
}
