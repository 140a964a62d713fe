//! ODE systems, compartmental matrices and input-output equations.
//!
//! For output `o`, every trajectory satisfies
//!
//! ```text
//! det(sI - A) y_o = sum_{j in inputs} (-1)^(o+j) M_{j,o}(sI - A) u_j
//! ```
//!
//! where `s` is the derivative operator and `M_{j,o}` is the minor obtained
//! by deleting row `j` and column `o`. The coefficients of this equation (as
//! polynomials in `s`) are the identifiable-function generators.

use std::fmt;

use crate::algebra::coeff::rat;
use crate::algebra::{Coefficient, Monomial, MultiPoly, Rational};
use crate::model::{Model, ParamKey};

/// Square matrix of polynomials.
pub type PolyMatrix = Vec<Vec<MultiPoly<Rational>>>;

/// Variable names for a parameter list, in ring order.
pub fn param_names(params: &[ParamKey]) -> Vec<String> {
    params.iter().map(|p| p.to_string()).collect()
}

fn param_index(params: &[ParamKey], key: ParamKey) -> usize {
    params
        .iter()
        .position(|&p| p == key)
        .expect("parameter belongs to the model")
}

/// `A` with `A[j][i] = rate(i -> j)` and `A[i][i] = -leak_i - sum_j rate(i -> j)`,
/// over `nvars` variables (parameters first, in `model.params()` order).
fn compartmental_matrix_in(m: &Model, nvars: usize) -> PolyMatrix {
    let n = m.n();
    let params = m.params();
    let var = |k: ParamKey| MultiPoly::var(nvars, param_index(&params, k), rat(1));
    let mut a = vec![vec![MultiPoly::zero(nvars); n]; n];
    for (i, j) in m.edges() {
        let r = var(ParamKey::edge(i, j));
        a[j][i] = a[j][i].add(&r);
        a[i][i] = a[i][i].sub(&r);
    }
    for i in m.leaks() {
        a[i][i] = a[i][i].sub(&var(ParamKey::leak(i)));
    }
    a
}

/// Compartmental matrix in the model's parameters.
pub fn compartmental_matrix(m: &Model) -> PolyMatrix {
    compartmental_matrix_in(m, m.num_params())
}

/// Determinant by cofactor expansion along the first remaining row.
pub fn cofactor_determinant<C: Coefficient>(m: &[Vec<MultiPoly<C>>], one: &C) -> MultiPoly<C> {
    let nvars = m.first().and_then(|r| r.first()).map_or(0, |p| p.nvars());
    determinant_in(m, nvars, one)
}

/// Like [`cofactor_determinant`] with an explicit arity, so that the empty
/// matrix yields the constant 1 in `nvars` variables.
fn determinant_in<C: Coefficient>(m: &[Vec<MultiPoly<C>>], nvars: usize, one: &C) -> MultiPoly<C> {
    let cols: Vec<usize> = (0..m.len()).collect();
    expand(m, 0, &cols, nvars, one)
}

fn expand<C: Coefficient>(
    m: &[Vec<MultiPoly<C>>],
    row: usize,
    cols: &[usize],
    nvars: usize,
    one: &C,
) -> MultiPoly<C> {
    if cols.is_empty() {
        return MultiPoly::constant(nvars, one.clone());
    }
    let mut acc = MultiPoly::zero(nvars);
    for (k, &c) in cols.iter().enumerate() {
        let entry = &m[row][c];
        if entry.is_zero() {
            continue;
        }
        let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
        let term = entry.mul(&expand(m, row + 1, &rest, nvars, one));
        acc = if k % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// Right-hand side of one state equation, `x_i' = ...`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StateEquation {
    pub state: usize,
    /// Signed rate terms `(sign, parameter, state it multiplies)`.
    pub terms: Vec<(i8, ParamKey, usize)>,
    pub input: bool,
}

/// The linear ODE system of a model.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OdeSystem {
    pub equations: Vec<StateEquation>,
    /// Output equations `y = x_o`.
    pub outputs: Vec<usize>,
}

/// Writes the ODE system term by term: leak, outflows, inflows, input.
pub fn to_ode_system(m: &Model) -> OdeSystem {
    let n = m.n();
    let equations = (0..n)
        .map(|i| {
            let mut terms = Vec::new();
            if m.is_leak(i) {
                terms.push((-1, ParamKey::leak(i), i));
            }
            for j in m.out_neighbors(i) {
                terms.push((-1, ParamKey::edge(i, j), i));
            }
            for j in 0..n {
                if m.has_edge(j, i) {
                    terms.push((1, ParamKey::edge(j, i), j));
                }
            }
            StateEquation {
                state: i,
                terms,
                input: m.is_input(i),
            }
        })
        .collect();
    OdeSystem {
        equations,
        outputs: m.outputs(),
    }
}

impl fmt::Display for OdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for eq in &self.equations {
            write!(f, "x{}' =", eq.state)?;
            if eq.terms.is_empty() && !eq.input {
                write!(f, " 0")?;
            }
            for (k, (sign, p, x)) in eq.terms.iter().enumerate() {
                match (k, sign) {
                    (0, -1) => write!(f, " -")?,
                    (0, _) => write!(f, " ")?,
                    (_, -1) => write!(f, " - ")?,
                    _ => write!(f, " + ")?,
                }
                write!(f, "{p}*x{x}")?;
            }
            if eq.input {
                let sep = if eq.terms.is_empty() { " " } else { " + " };
                write!(f, "{sep}u{}", eq.state)?;
            }
            writeln!(f)?;
        }
        for o in &self.outputs {
            writeln!(f, "y{o} = x{o}")?;
        }
        Ok(())
    }
}

/// Polynomial coefficients keyed by derivative order.
pub type Terms = Vec<(usize, MultiPoly<Rational>)>;

/// Input-output equation for one output.
///
/// Coefficients are polynomials in the model's parameters (ring order of
/// `params`). `lhs` is monic of order `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IoEquation {
    pub params: Vec<ParamKey>,
    pub output: usize,
    /// `(derivative order of y, coefficient)`, strictly decreasing orders.
    pub lhs: Terms,
    /// Per input vertex, `(derivative order of u_j, coefficient)`.
    pub rhs: Vec<(usize, Terms)>,
}

/// Splits a polynomial in `params + s` into coefficients of `s^d`, highest first.
fn split_by_s(p: &MultiPoly<Rational>, nparams: usize) -> Vec<(usize, MultiPoly<Rational>)> {
    let mut buckets: Vec<Vec<(Monomial, Rational)>> = Vec::new();
    for (m, c) in p.terms() {
        let d = m.exponents()[nparams] as usize;
        if buckets.len() <= d {
            buckets.resize(d + 1, Vec::new());
        }
        buckets[d].push((Monomial::from_exponents(&m.exponents()[..nparams]), c.clone()));
    }
    buckets
        .into_iter()
        .enumerate()
        .rev()
        .filter(|(_, t)| !t.is_empty())
        .map(|(d, t)| (d, MultiPoly::from_terms(nparams, t)))
        .collect()
}

/// Builds the input-output equation of `m` for output vertex `output`.
pub fn io_equation(m: &Model, output: usize) -> IoEquation {
    let n = m.n();
    let params = m.params();
    let k = params.len();
    let nvars = k + 1;
    let a = compartmental_matrix_in(m, nvars);
    let s = MultiPoly::var(nvars, k, rat(1));
    let mut char_matrix = a.clone();
    for (i, row) in char_matrix.iter_mut().enumerate() {
        for (j, e) in row.iter_mut().enumerate() {
            *e = if i == j { s.sub(e) } else { e.neg() };
        }
    }
    let one = rat(1);
    let det = cofactor_determinant(&char_matrix, &one);
    let lhs = split_by_s(&det, k);
    let rhs = m
        .inputs()
        .into_iter()
        .map(|j| {
            let minor: PolyMatrix = (0..n)
                .filter(|&r| r != j)
                .map(|r| {
                    (0..n)
                        .filter(|&c| c != output)
                        .map(|c| char_matrix[r][c].clone())
                        .collect()
                })
                .collect();
            let mut cof = determinant_in(&minor, nvars, &one);
            if (output + j) % 2 == 1 {
                cof = cof.neg();
            }
            (j, split_by_s(&cof, k))
        })
        .collect();
    IoEquation {
        params,
        output,
        lhs,
        rhs,
    }
}

impl fmt::Display for IoEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = param_names(&self.params);
        let deriv = |sym: &str, d: usize| match d {
            0 => sym.to_string(),
            _ => format!("{sym}^({d})"),
        };
        let side = |f: &mut fmt::Formatter<'_>,
                    terms: &[(usize, MultiPoly<Rational>)],
                    sym: &str,
                    first: &mut bool|
         -> fmt::Result {
            for (d, c) in terms {
                if !*first {
                    write!(f, " + ")?;
                }
                *first = false;
                if c.is_constant() && c.terms().first().is_some_and(|(_, v)| v.is_one()) {
                    write!(f, "{}", deriv(sym, *d))?;
                } else {
                    write!(f, "({})*{}", c.display_with(&names), deriv(sym, *d))?;
                }
            }
            Ok(())
        };
        let mut first = true;
        side(f, &self.lhs, &format!("y{}", self.output), &mut first)?;
        write!(f, " =")?;
        let mut first = true;
        for (j, terms) in &self.rhs {
            if !first {
                write!(f, " +")?;
            }
            write!(f, " ")?;
            let mut inner_first = true;
            side(f, terms, &format!("u{j}"), &mut inner_first)?;
            first = false;
        }
        if first {
            write!(f, " 0")?;
        }
        Ok(())
    }
}

/// Ordered list of non-constant IO coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CoefficientMap {
    pub params: Vec<ParamKey>,
    pub coefficients: Vec<MultiPoly<Rational>>,
}

impl CoefficientMap {
    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }
}

/// lhs coefficients below the leading one (descending order), then rhs
/// coefficients grouped by ascending input; constants are dropped.
pub fn coefficient_map(eq: &IoEquation) -> CoefficientMap {
    let lhs = eq.lhs.iter().map(|(_, c)| c);
    let rhs = eq.rhs.iter().flat_map(|(_, terms)| terms.iter().map(|(_, c)| c));
    CoefficientMap {
        params: eq.params.clone(),
        coefficients: lhs.chain(rhs).filter(|c| !c.is_constant()).cloned().collect(),
    }
}

/// Coefficient map of the first output, the database convention.
pub fn model_coefficient_map(m: &Model) -> CoefficientMap {
    match m.outputs().first() {
        Some(&o) => coefficient_map(&io_equation(m, o)),
        None => CoefficientMap {
            params: m.params(),
            coefficients: vec![],
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(m: &Model) -> Vec<String> {
        param_names(&m.params())
    }

    fn show(p: &MultiPoly<Rational>, m: &Model) -> String {
        p.display_with(&names(m)).to_string()
    }

    fn feeder_model() -> Model {
        Model::new(3, &[(0, 1), (1, 0), (2, 0)], &[2], &[0], &[0]).unwrap()
    }

    fn symmetric_sink() -> Model {
        Model::new(3, &[(0, 2), (1, 2)], &[], &[2], &[]).unwrap()
    }

    #[test]
    fn ode_system_feeder_model() {
        let text = to_ode_system(&feeder_model()).to_string();
        assert_eq!(
            text,
            "x0' = -leak(0)*x0 - a(0->1)*x0 + a(1->0)*x1 + a(2->0)*x2\n\
             x1' = -a(1->0)*x1 + a(0->1)*x0\n\
             x2' = -a(2->0)*x2 + u2\n\
             y0 = x0\n"
        );
    }

    #[test]
    fn ode_system_sink_and_leak_only() {
        let text = to_ode_system(&symmetric_sink()).to_string();
        assert_eq!(
            text,
            "x0' = -a(0->2)*x0\nx1' = -a(1->2)*x1\nx2' = a(0->2)*x0 + a(1->2)*x1\ny2 = x2\n"
        );
        let single = Model::new(1, &[], &[], &[0], &[0]).unwrap();
        assert_eq!(to_ode_system(&single).to_string(), "x0' = -leak(0)*x0\ny0 = x0\n");
    }

    #[test]
    fn matrix_examples() {
        let m = symmetric_sink();
        let a = compartmental_matrix(&m);
        let rows: Vec<Vec<String>> = a
            .iter()
            .map(|r| r.iter().map(|p| show(p, &m)).collect())
            .collect();
        assert_eq!(
            rows,
            vec![
                vec!["-a(0->2)", "0", "0"],
                vec!["0", "-a(1->2)", "0"],
                vec!["a(0->2)", "a(1->2)", "0"],
            ]
        );
        let m = feeder_model();
        let a = compartmental_matrix(&m);
        let row0: Vec<String> = a[0].iter().map(|p| show(p, &m)).collect();
        assert_eq!(row0, vec!["-a(0->1) - leak(0)", "a(1->0)", "a(2->0)"]);

        let bare = Model::new(2, &[], &[], &[0], &[]).unwrap();
        assert!(compartmental_matrix(&bare).iter().flatten().all(|p| p.is_zero()));
    }

    #[test]
    fn io_equation_two_state() {
        // edges 1->0, leak 0, input 0, output 0
        let m = Model::new(2, &[(1, 0)], &[0], &[0], &[0]).unwrap();
        let eq = io_equation(&m, 0);
        let lhs: Vec<(usize, String)> = eq.lhs.iter().map(|(d, c)| (*d, show(c, &m))).collect();
        assert_eq!(
            lhs,
            vec![
                (2, "1".to_string()),
                (1, "a(1->0) + leak(0)".to_string()),
                (0, "a(1->0)*leak(0)".to_string())
            ]
        );
        let rhs: Vec<(usize, String)> = eq.rhs[0].1.iter().map(|(d, c)| (*d, show(c, &m))).collect();
        assert_eq!(rhs, vec![(1, "1".to_string()), (0, "a(1->0)".to_string())]);
        assert_eq!(eq.rhs[0].0, 0);

        let c = coefficient_map(&eq);
        let shown: Vec<String> = c.coefficients.iter().map(|p| show(p, &m)).collect();
        assert_eq!(shown, vec!["a(1->0) + leak(0)", "a(1->0)*leak(0)", "a(1->0)"]);
    }

    #[test]
    fn io_equation_symmetric_sink() {
        let m = symmetric_sink();
        let eq = io_equation(&m, 2);
        let lhs: Vec<(usize, String)> = eq.lhs.iter().map(|(d, c)| (*d, show(c, &m))).collect();
        assert_eq!(
            lhs,
            vec![
                (3, "1".to_string()),
                (2, "a(0->2) + a(1->2)".to_string()),
                (1, "a(0->2)*a(1->2)".to_string())
            ]
        );
        assert!(eq.rhs.is_empty());
        let c = coefficient_map(&eq);
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn parameter_free_map_is_empty() {
        let m = Model::new(1, &[], &[0], &[0], &[]).unwrap();
        assert!(model_coefficient_map(&m).is_empty());
    }

    #[test]
    fn rhs_sign_off_diagonal() {
        // edges 0<->1, input 0, output 1: rhs is +a(0->1) u0
        let m = Model::new(2, &[(0, 1), (1, 0)], &[0], &[1], &[1]).unwrap();
        let eq = io_equation(&m, 1);
        let rhs: Vec<(usize, String)> = eq.rhs[0].1.iter().map(|(d, c)| (*d, show(c, &m))).collect();
        assert_eq!(rhs, vec![(0, "a(0->1)".to_string())]);
    }
}
