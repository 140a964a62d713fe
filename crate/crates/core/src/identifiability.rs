//! Per-parameter structural identifiability from the input-output
//! coefficient map.
//!
//! A parameter is non-identifiable when the fiber of the coefficient map
//! through a generic point projects onto infinitely many values of it,
//! locally identifiable when that projection is finite with two or more
//! points, and globally identifiable when it is a single point.
//!
//! Each trial specializes the parameters at a random point over a prime
//! field and decides the three cases twice: a Jacobian rank test separates
//! non-identifiable parameters, and a Gröbner basis of the fiber ideal both
//! re-derives that split and counts the projected points through minimal
//! polynomials. Statuses are published once trials over two different
//! primes agree.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::groebner::{is_groebner_basis, is_unit_ideal, staircase_size};
use crate::algebra::{
    buchberger, minimal_polynomial, AlgebraError, Coefficient, Fp, MinPoly, MonomialOrder,
    MultiPoly, PrimeField, RowEchelon,
};
use crate::ioeq::{model_coefficient_map, CoefficientMap};
use crate::model::{canonicalize, relabel_result, Model, ParamKey};

/// Version string stored with every record.
pub const ENGINE_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Default specialization prime, 2^31 - 1.
pub const DEFAULT_PRIME: u64 = 2_147_483_647;
/// Default confirmation prime.
pub const DEFAULT_CONFIRMATION_PRIME: u64 = 2_147_483_629;
/// Default base seed. Fixed so that published databases are reproducible.
pub const DEFAULT_SEED: u64 = 20_240_601;
/// Minimal-polynomial search bound for positive-dimensional fibers.
pub const DEFAULT_DEGREE_CAP: usize = 256;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IdStatus {
    Globally,
    Locally,
    #[serde(rename = "nonidentifiable")]
    NonIdentifiable,
    Undetermined,
}

impl IdStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            IdStatus::Globally => "globally",
            IdStatus::Locally => "locally",
            IdStatus::NonIdentifiable => "nonidentifiable",
            IdStatus::Undetermined => "undetermined",
        }
    }
}

impl fmt::Display for IdStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for IdStatus {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "globally" => Ok(IdStatus::Globally),
            "locally" => Ok(IdStatus::Locally),
            "nonidentifiable" | "non-identifiable" | "non" => Ok(IdStatus::NonIdentifiable),
            "undetermined" => Ok(IdStatus::Undetermined),
            _ => Err(format!("unknown status '{s}'")),
        }
    }
}

/// Outcome of the Jacobian rank test for one parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum JacobianVerdict {
    LocallyOrBetter,
    NonIdentifiable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AssessConfig {
    pub prime: u64,
    pub confirmation_prime: u64,
    pub seed: u64,
    pub max_trials: u32,
    /// `None`: staircase size for zero-dimensional fibers, otherwise
    /// [`DEFAULT_DEGREE_CAP`].
    pub degree_cap: Option<usize>,
    /// Re-check the Buchberger postcondition on every basis.
    pub verify_groebner: bool,
    #[serde(default)]
    pub method: FiberMethod,
}

/// How the Gröbner side treats positive-dimensional fibers.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FiberMethod {
    /// Fix the parameters outside a Jacobian column basis at their
    /// specialization values and work with the resulting finite fiber.
    #[default]
    Sliced,
    /// Basis of the whole fiber ideal; finiteness of each projection is
    /// tested with a random hyperplane.
    Full,
}

impl Default for AssessConfig {
    fn default() -> Self {
        AssessConfig {
            prime: DEFAULT_PRIME,
            confirmation_prime: DEFAULT_CONFIRMATION_PRIME,
            seed: DEFAULT_SEED,
            max_trials: 6,
            degree_cap: None,
            verify_groebner: false,
            method: FiberMethod::Sliced,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    #[error("model {key}: statuses undetermined after {trials} trials")]
    Undetermined { key: String, trials: u32 },
    #[error("model {key}: internal error: {message}")]
    Internal { key: String, message: String },
}

impl AssessConfig {
    pub fn validate(&self) -> Result<(), AssessError> {
        PrimeField::new(self.prime)?;
        PrimeField::new(self.confirmation_prime)?;
        if self.prime == self.confirmation_prime {
            return Err(AssessError::Config("primes must be distinct".into()));
        }
        if self.max_trials < 2 {
            return Err(AssessError::Config("max_trials must be at least 2".into()));
        }
        Ok(())
    }
}

/// Where a published record came from.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub prime: u64,
    pub prime2: u64,
    pub seed: u64,
    pub trials: u32,
    pub version: String,
}

/// Published statuses of one canonical model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AssessmentRecord {
    pub key: String,
    /// The canonical model the statuses refer to.
    pub model: Model,
    pub statuses: BTreeMap<ParamKey, IdStatus>,
    pub provenance: Provenance,
}

/// Jacobian of the coefficient map at `point`, one row per coefficient.
fn jacobian_rows(c: &[MultiPoly<Fp>], point: &[Fp]) -> Result<Vec<Vec<Fp>>, AlgebraError> {
    let k = point.len();
    c.iter()
        .map(|f| {
            (0..k)
                .map(|v| f.partial_derivative(v).evaluate(point))
                .collect()
        })
        .collect()
}

/// Parameter `k` is locally identifiable or better iff `e_k` lies in the
/// row space of the Jacobian at a generic point.
pub fn jacobian_test(
    c: &[MultiPoly<Fp>],
    point: &[Fp],
) -> Result<Vec<JacobianVerdict>, AlgebraError> {
    let rows = jacobian_rows(c, point)?;
    Ok(verdicts(&rows, point.len()))
}

fn verdicts(rows: &[Vec<Fp>], k: usize) -> Vec<JacobianVerdict> {
    let ech = RowEchelon::new(rows, k);
    (0..k)
        .map(|k| {
            if ech.contains_unit(k) {
                JacobianVerdict::LocallyOrBetter
            } else {
                JacobianVerdict::NonIdentifiable
            }
        })
        .collect()
}

/// Why a single trial could not be published.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrialFailure {
    /// Retry with another point.
    Unlucky(String),
    /// A mathematical invariant broke; indicates a bug.
    Internal(String),
}

/// Gröbner-side classification at one specialization point.
///
/// `rng` supplies the random hyperplanes used to test finiteness of each
/// projection when the fiber is positive-dimensional.
pub fn groebner_classify(
    c: &[MultiPoly<Fp>],
    point: &[Fp],
    cfg: &AssessConfig,
    rng: &mut impl Rng,
) -> Result<Vec<IdStatus>, TrialFailure> {
    let k = point.len();
    if k == 0 {
        return Ok(vec![]);
    }
    if c.is_empty() {
        return Ok(vec![IdStatus::NonIdentifiable; k]);
    }
    let field = point[0].field();
    let ord = MonomialOrder::Grevlex;
    let gens: Vec<MultiPoly<Fp>> = c
        .iter()
        .map(|f| {
            let v = f.evaluate(point).expect("arity checked");
            f.sub(&MultiPoly::constant(k, v))
        })
        .collect();
    let gb = buchberger(&gens, ord);
    if is_unit_ideal(&gb) {
        return Err(TrialFailure::Internal(
            "fiber ideal is the unit ideal".into(),
        ));
    }
    if cfg.verify_groebner && !is_groebner_basis(&gb, ord) {
        return Err(TrialFailure::Internal("Buchberger postcondition failed".into()));
    }
    let staircase = staircase_size(&gb, ord, 1 << 16);
    let cap = cfg
        .degree_cap
        .or(staircase)
        .unwrap_or(DEFAULT_DEGREE_CAP);

    let mut out = Vec::with_capacity(k);
    for (var, value) in point.iter().enumerate().take(k) {
        if staircase.is_none() && !projection_is_finite(&gb, var, value, field, rng) {
            out.push(IdStatus::NonIdentifiable);
            continue;
        }
        out.push(finite_status(var, &gb, ord, cap, value, staircase.is_some())?);
    }
    Ok(out)
}

/// Columns of `rows` forming a basis of its column space, taking every
/// index in `first` before any other.
fn column_basis(rows: &[Vec<Fp>], k: usize, first: &[usize]) -> Vec<usize> {
    let m = rows.len();
    let col = |j: usize| -> Vec<Fp> { rows.iter().map(|r| r[j]).collect() };
    let mut chosen: Vec<usize> = Vec::new();
    let mut cols: Vec<Vec<Fp>> = Vec::new();
    let rest = (0..k).filter(|j| !first.contains(j));
    for j in first.iter().copied().chain(rest) {
        let v = col(j);
        if cols.is_empty() || !RowEchelon::new(&cols, m).contains(&v) {
            if v.iter().all(Coefficient::is_zero) {
                continue;
            }
            cols.push(v);
            chosen.push(j);
        }
    }
    chosen
}

/// Gröbner-side classification on the fiber sliced along a transcendence
/// basis of the parameters over the coefficients.
///
/// Parameters the Jacobian leaves free are fixed at their values in
/// `point`; the rest form a column basis of the Jacobian, so the slice is
/// finite and the degree of each identifiable parameter over the
/// coefficient field is unchanged.
pub fn sliced_classify(
    c: &[MultiPoly<Fp>],
    point: &[Fp],
    cfg: &AssessConfig,
) -> Result<Vec<IdStatus>, TrialFailure> {
    let k = point.len();
    if k == 0 {
        return Ok(vec![]);
    }
    let rows = jacobian_rows(c, point).map_err(|e| TrialFailure::Internal(e.to_string()))?;
    let jac = verdicts(&rows, k);
    let ident: Vec<usize> = (0..k)
        .filter(|&j| jac[j] == JacobianVerdict::LocallyOrBetter)
        .collect();
    if ident.is_empty() {
        return Ok(vec![IdStatus::NonIdentifiable; k]);
    }
    let basis = column_basis(&rows, k, &ident);
    if !ident.iter().all(|j| basis.contains(j)) {
        return Err(TrialFailure::Internal(
            "identifiable columns are linearly dependent".into(),
        ));
    }
    let fixed: Vec<(usize, Fp)> = (0..k)
        .filter(|j| !basis.contains(j))
        .map(|j| (j, point[j]))
        .collect();
    let field = point[0].field();
    let ord = MonomialOrder::Grevlex;
    let mut gens: Vec<MultiPoly<Fp>> = c
        .iter()
        .map(|f| {
            let v = f.evaluate(point).expect("arity checked");
            f.evaluate_partial(&fixed).sub(&MultiPoly::constant(k, v))
        })
        .filter(|g| !g.is_zero())
        .collect();
    for (j, v) in &fixed {
        gens.push(MultiPoly::var(k, *j, field.one()).sub(&MultiPoly::constant(k, *v)));
    }
    let gb = buchberger(&gens, ord);
    if is_unit_ideal(&gb) {
        return Err(TrialFailure::Internal("sliced fiber is empty".into()));
    }
    if cfg.verify_groebner && !is_groebner_basis(&gb, ord) {
        return Err(TrialFailure::Internal("Buchberger postcondition failed".into()));
    }
    let Some(staircase) = staircase_size(&gb, ord, 1 << 16) else {
        return Err(TrialFailure::Unlucky("sliced fiber is not finite".into()));
    };
    let cap = cfg.degree_cap.unwrap_or(staircase);
    let mut out = vec![IdStatus::NonIdentifiable; k];
    for &var in &ident {
        out[var] = finite_status(var, &gb, ord, cap, &point[var], cfg.degree_cap.is_none())?;
    }
    Ok(out)
}

/// Globally or locally, from the minimal polynomial of `x_var` modulo
/// `gb`. With `exhaustive`, `cap` is the staircase size and a missing
/// minimal polynomial is a bug.
fn finite_status(
    var: usize,
    gb: &[MultiPoly<Fp>],
    ord: MonomialOrder,
    cap: usize,
    value: &Fp,
    exhaustive: bool,
) -> Result<IdStatus, TrialFailure> {
    let q = match minimal_polynomial(var, gb, ord, cap) {
        MinPoly::Found(q) => q,
        MinPoly::NotFound if exhaustive => {
            return Err(TrialFailure::Internal(
                "no minimal polynomial below the staircase size".into(),
            ))
        }
        MinPoly::NotFound => {
            return Err(TrialFailure::Unlucky(format!(
                "minimal polynomial of variable {var} exceeds degree cap {cap}"
            )))
        }
    };
    if !q.eval(value).is_zero() {
        return Err(TrialFailure::Internal(
            "specialization point is not a root of its minimal polynomial".into(),
        ));
    }
    let sqf = q
        .squarefree_part()
        .map_err(|e| TrialFailure::Internal(e.to_string()))?;
    match sqf.degree() {
        Some(1) => {
            if sqf.coefficients()[0].neg() != *value {
                return Err(TrialFailure::Unlucky(
                    "degree-1 minimal polynomial with a foreign root".into(),
                ));
            }
            Ok(IdStatus::Globally)
        }
        Some(_) => Ok(IdStatus::Locally),
        None => Err(TrialFailure::Internal("constant minimal polynomial".into())),
    }
}

/// `x_var` takes finitely many values on the variety of `gb` iff adding
/// `x_var = r` for a random `r` off the specialization empties it.
fn projection_is_finite(
    gb: &[MultiPoly<Fp>],
    var: usize,
    value: &Fp,
    field: PrimeField,
    rng: &mut impl Rng,
) -> bool {
    let k = gb[0].nvars();
    let r = loop {
        let r = field.elem(rng.gen_range(1..field.modulus()));
        if r != *value {
            break r;
        }
    };
    let mut gens = gb.to_vec();
    gens.push(MultiPoly::var(k, var, field.one()).sub(&MultiPoly::constant(k, r)));
    is_unit_ideal(&buchberger(&gens, MonomialOrder::Grevlex))
}

/// Deterministic RNG for trial `trial` of the model with canonical key `key`.
pub fn trial_rng(key: &str, trial: u32, seed: u64) -> ChaCha8Rng {
    // FNV-1a over the key, then splitmix-style mixing with trial and seed
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in key.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    let mut z = h ^ seed.rotate_left(17) ^ (trial as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^= z >> 31;
    ChaCha8Rng::seed_from_u64(z)
}

/// Random point with no zero coordinate.
pub fn random_point(field: PrimeField, k: usize, rng: &mut impl Rng) -> Vec<Fp> {
    (0..k)
        .map(|_| field.elem(rng.gen_range(1..field.modulus())))
        .collect()
}

/// One full trial: Jacobian and Gröbner at the same point, cross-checked.
pub fn run_trial(
    cmap: &CoefficientMap,
    field: PrimeField,
    cfg: &AssessConfig,
    rng: &mut impl Rng,
) -> Result<Vec<IdStatus>, TrialFailure> {
    let k = cmap.params.len();
    let c: Vec<MultiPoly<Fp>> = cmap
        .coefficients
        .iter()
        .map(|f| f.map_coefficients(|q| field.from_rational(q)))
        .collect::<Result<_, _>>()
        .map_err(|e| TrialFailure::Unlucky(e.to_string()))?;
    let point = random_point(field, k, rng);
    let jac = jacobian_test(&c, &point).map_err(|e| TrialFailure::Internal(e.to_string()))?;
    let gro = match cfg.method {
        FiberMethod::Sliced => sliced_classify(&c, &point, cfg)?,
        FiberMethod::Full => groebner_classify(&c, &point, cfg, rng)?,
    };
    for (j, g) in jac.iter().zip(&gro) {
        let j_non = *j == JacobianVerdict::NonIdentifiable;
        let g_non = *g == IdStatus::NonIdentifiable;
        if j_non != g_non {
            return Err(TrialFailure::Unlucky(
                "Jacobian and Gröbner disagree on non-identifiability".into(),
            ));
        }
    }
    Ok(gro)
}

/// Assesses a model given in canonical labeling. Statuses refer to `canonical`.
pub fn assess_canonical(
    key: &str,
    canonical: &Model,
    cfg: &AssessConfig,
) -> Result<AssessmentRecord, AssessError> {
    cfg.validate()?;
    let cmap = model_coefficient_map(canonical);
    let primes = [cfg.prime, cfg.confirmation_prime];
    let mut done: Vec<(usize, Vec<IdStatus>)> = Vec::new();
    for trial in 0..cfg.max_trials {
        let which = (trial % 2) as usize;
        let field = PrimeField::new(primes[which])?;
        let mut rng = trial_rng(key, trial, cfg.seed);
        match run_trial(&cmap, field, cfg, &mut rng) {
            Ok(st) => {
                let agreed = done.iter().any(|(w, prev)| *w != which && *prev == st);
                if agreed {
                    let statuses = cmap.params.iter().copied().zip(st).collect();
                    return Ok(AssessmentRecord {
                        key: key.to_string(),
                        model: *canonical,
                        statuses,
                        provenance: Provenance {
                            prime: cfg.prime,
                            prime2: cfg.confirmation_prime,
                            seed: cfg.seed,
                            trials: trial + 1,
                            version: ENGINE_VERSION.to_string(),
                        },
                    });
                }
                done.push((which, st));
            }
            Err(TrialFailure::Unlucky(_)) => {}
            Err(TrialFailure::Internal(message)) => {
                return Err(AssessError::Internal {
                    key: key.to_string(),
                    message,
                })
            }
        }
    }
    Err(AssessError::Undetermined {
        key: key.to_string(),
        trials: cfg.max_trials,
    })
}

/// Assesses any model; the record is keyed and labeled canonically.
pub fn assess(m: &Model, cfg: &AssessConfig) -> Result<AssessmentRecord, AssessError> {
    let c = canonicalize(m);
    assess_canonical(&c.key, &c.canonical, cfg)
}

/// Statuses of `m` in its own labeling.
pub fn assess_model(
    m: &Model,
    cfg: &AssessConfig,
) -> Result<BTreeMap<ParamKey, IdStatus>, AssessError> {
    let c = canonicalize(m);
    let rec = assess_canonical(&c.key, &c.canonical, cfg)?;
    Ok(relabel_result(&rec.statuses, &c.permutation.inverse()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::Monomial;

    fn field() -> PrimeField {
        PrimeField::new(DEFAULT_PRIME).unwrap()
    }

    fn poly(f: &PrimeField, terms: &[(i64, [u16; 2])]) -> MultiPoly<Fp> {
        MultiPoly::from_terms(
            2,
            terms
                .iter()
                .map(|(c, e)| (Monomial::from_exponents(e), f.from_i64(*c))),
        )
    }

    fn sum(f: &PrimeField) -> MultiPoly<Fp> {
        poly(f, &[(1, [1, 0]), (1, [0, 1])])
    }

    fn prod(f: &PrimeField) -> MultiPoly<Fp> {
        poly(f, &[(1, [1, 1])])
    }

    fn pt(f: &PrimeField) -> Vec<Fp> {
        vec![f.elem(2), f.elem(3)]
    }

    #[test]
    fn jacobian_examples() {
        use JacobianVerdict::*;
        let f = field();
        assert_eq!(
            jacobian_test(&[sum(&f), prod(&f)], &pt(&f)).unwrap(),
            vec![LocallyOrBetter, LocallyOrBetter]
        );
        assert_eq!(
            jacobian_test(&[prod(&f)], &pt(&f)).unwrap(),
            vec![NonIdentifiable, NonIdentifiable]
        );
        let a = poly(&f, &[(1, [1, 0])]);
        assert_eq!(
            jacobian_test(&[a, prod(&f)], &pt(&f)).unwrap(),
            vec![LocallyOrBetter, LocallyOrBetter]
        );
    }

    #[test]
    fn groebner_examples() {
        let f = field();
        let cfg = AssessConfig::default();
        let mut rng = trial_rng("test", 0, 1);
        assert_eq!(
            groebner_classify(&[sum(&f), prod(&f)], &pt(&f), &cfg, &mut rng).unwrap(),
            vec![IdStatus::Locally, IdStatus::Locally]
        );
        let b = poly(&f, &[(1, [0, 1])]);
        assert_eq!(
            groebner_classify(&[sum(&f), prod(&f), b], &pt(&f), &cfg, &mut rng).unwrap(),
            vec![IdStatus::Globally, IdStatus::Globally]
        );
        assert_eq!(
            groebner_classify(&[prod(&f)], &pt(&f), &cfg, &mut rng).unwrap(),
            vec![IdStatus::NonIdentifiable, IdStatus::NonIdentifiable]
        );
        assert_eq!(
            groebner_classify(&[], &pt(&f), &cfg, &mut rng).unwrap(),
            vec![IdStatus::NonIdentifiable; 2]
        );
    }

    #[test]
    fn assess_two_node_examples() {
        use IdStatus::*;
        let cfg = AssessConfig::default();
        let m = Model::new(2, &[(1, 0)], &[0], &[0], &[0]).unwrap();
        let r = assess_model(&m, &cfg).unwrap();
        assert_eq!(
            r,
            BTreeMap::from([(ParamKey::edge(1, 0), Globally), (ParamKey::leak(0), Globally)])
        );
        let m = Model::new(2, &[(0, 1), (1, 0)], &[0], &[1], &[0]).unwrap();
        let r = assess_model(&m, &cfg).unwrap();
        assert_eq!(
            r,
            BTreeMap::from([
                (ParamKey::edge(0, 1), Globally),
                (ParamKey::edge(1, 0), Locally),
                (ParamKey::leak(0), Locally)
            ])
        );
    }

    #[test]
    fn assess_symmetric_sink() {
        let m = Model::new(3, &[(0, 2), (1, 2)], &[], &[2], &[]).unwrap();
        let r = assess_model(&m, &AssessConfig::default()).unwrap();
        assert_eq!(
            r,
            BTreeMap::from([
                (ParamKey::edge(0, 2), IdStatus::Locally),
                (ParamKey::edge(1, 2), IdStatus::Locally)
            ])
        );
    }

    #[test]
    fn config_validation() {
        let mut cfg = AssessConfig::default();
        cfg.confirmation_prime = cfg.prime;
        assert!(cfg.validate().is_err());
        let cfg = AssessConfig {
            max_trials: 1,
            ..AssessConfig::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = AssessConfig {
            prime: 100,
            ..AssessConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn status_strings() {
        for s in [IdStatus::Globally, IdStatus::Locally, IdStatus::NonIdentifiable] {
            assert_eq!(s.as_str().parse::<IdStatus>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{s}\""));
        }
    }
}
