//! Buchberger's algorithm, multivariate division, and minimal polynomials
//! of variables modulo an ideal.

use std::collections::{HashMap, HashSet};

use super::coeff::Coefficient;
use super::poly::{Monomial, MonomialOrder, MultiPoly};
use super::univariate::UniPoly;

/// Remainder of `f` on multivariate division by `basis`.
///
/// No term of the result is divisible by a leading term of `basis`.
pub fn normal_form<C: Coefficient>(
    f: &MultiPoly<C>,
    basis: &[MultiPoly<C>],
    ord: MonomialOrder,
) -> MultiPoly<C> {
    let divisors: Vec<(Monomial, C, &MultiPoly<C>)> = basis
        .iter()
        .filter_map(|g| {
            let (m, c) = g.leading_term(ord)?;
            Some((m.clone(), c.inv().expect("field coefficient"), g))
        })
        .collect();
    reduce_with(f, &divisors, ord)
}

fn reduce_with<C: Coefficient>(
    f: &MultiPoly<C>,
    divisors: &[(Monomial, C, &MultiPoly<C>)],
    ord: MonomialOrder,
) -> MultiPoly<C> {
    let nvars = f.nvars();
    let mut p = f.clone();
    let mut rem: Vec<(Monomial, C)> = Vec::new();
    while let Some((lm, lc)) = p.leading_term(ord) {
        match divisors.iter().find(|(m, _, _)| m.divides(lm)) {
            Some((m, lc_inv, g)) => {
                let q = m.quotient_of(lm);
                let k = lc.mul(lc_inv).neg();
                p = p.add_scaled(g, &q, &k);
            }
            None => rem.push(p.pop_leading(ord).unwrap()),
        }
    }
    MultiPoly::from_terms(nvars, rem)
}

/// S-polynomial of `f` and `g`.
pub fn s_polynomial<C: Coefficient>(
    f: &MultiPoly<C>,
    g: &MultiPoly<C>,
    ord: MonomialOrder,
) -> MultiPoly<C> {
    let (fm, fc) = f.leading_term(ord).expect("nonzero");
    let (gm, gc) = g.leading_term(ord).expect("nonzero");
    let l = fm.lcm(gm);
    let a = MultiPoly::monomial(fm.quotient_of(&l), fc.inv().unwrap());
    let b = MultiPoly::monomial(gm.quotient_of(&l), gc.inv().unwrap());
    a.mul(f).sub(&b.mul(g))
}

/// Reduced Gröbner basis of the ideal generated by `generators`.
///
/// Pairs are selected by the normal strategy (smallest lcm first) and
/// pruned with the coprime-leading-term and chain criteria. The result is
/// monic, inter-reduced and sorted by ascending leading monomial. An
/// inconsistent system yields `[1]`; an empty or all-zero input yields `[]`.
pub fn buchberger<C: Coefficient>(
    generators: &[MultiPoly<C>],
    ord: MonomialOrder,
) -> Vec<MultiPoly<C>> {
    let mut basis: Vec<MultiPoly<C>> = generators
        .iter()
        .filter(|g| !g.is_zero())
        .map(|g| g.make_monic(ord))
        .collect();
    if let Some(unit) = basis.iter().find(|g| g.is_constant()) {
        return vec![unit.clone()];
    }
    let mut lms: Vec<Monomial> = basis
        .iter()
        .map(|g| g.leading_term(ord).unwrap().0.clone())
        .collect();
    let mut pending: HashSet<(usize, usize)> = HashSet::new();
    for j in 0..basis.len() {
        for i in 0..j {
            pending.insert((i, j));
        }
    }
    while let Some(&(i, j)) = pending
        .iter()
        .min_by(|a, b| {
            let la = lms[a.0].lcm(&lms[a.1]);
            let lb = lms[b.0].lcm(&lms[b.1]);
            ord.cmp(&la, &lb).then(a.cmp(b))
        })
    {
        pending.remove(&(i, j));
        if lms[i].coprime(&lms[j]) {
            continue;
        }
        let l = lms[i].lcm(&lms[j]);
        let key = |a: usize, b: usize| if a < b { (a, b) } else { (b, a) };
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && lms[k].divides(&l)
                && !pending.contains(&key(i, k))
                && !pending.contains(&key(j, k))
        });
        if chain {
            continue;
        }
        let s = s_polynomial(&basis[i], &basis[j], ord);
        let r = normal_form(&s, &basis, ord);
        if r.is_zero() {
            continue;
        }
        let r = r.make_monic(ord);
        if r.is_constant() {
            return vec![r];
        }
        let new = basis.len();
        lms.push(r.leading_term(ord).unwrap().0.clone());
        basis.push(r);
        for k in 0..new {
            pending.insert((k, new));
        }
    }
    reduce_basis(basis, ord)
}

/// Turns a Gröbner basis into the reduced one.
pub fn reduce_basis<C: Coefficient>(
    basis: Vec<MultiPoly<C>>,
    ord: MonomialOrder,
) -> Vec<MultiPoly<C>> {
    let mut basis: Vec<MultiPoly<C>> = basis
        .into_iter()
        .filter(|g| !g.is_zero())
        .map(|g| g.make_monic(ord))
        .collect();
    basis.sort_by(|a, b| {
        ord.cmp(
            a.leading_term(ord).unwrap().0,
            b.leading_term(ord).unwrap().0,
        )
    });
    // minimal basis: drop anything whose leading monomial is a multiple of another's
    let mut minimal: Vec<MultiPoly<C>> = Vec::new();
    for g in basis {
        let lm = g.leading_term(ord).unwrap().0.clone();
        if !minimal
            .iter()
            .any(|h| h.leading_term(ord).unwrap().0.divides(&lm))
        {
            minimal.push(g);
        }
    }
    let mut reduced = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<MultiPoly<C>> = minimal
            .iter()
            .enumerate()
            .filter(|&(k, _)| k != i)
            .map(|(_, g)| g.clone())
            .collect();
        let (lm, lc) = minimal[i].leading_term(ord).unwrap();
        let head = MultiPoly::monomial(lm.clone(), lc.clone());
        let tail = minimal[i].sub(&head);
        reduced.push(head.add(&normal_form(&tail, &others, ord)));
    }
    reduced
}

/// Whether every S-polynomial of `basis` reduces to zero.
pub fn is_groebner_basis<C: Coefficient>(basis: &[MultiPoly<C>], ord: MonomialOrder) -> bool {
    for j in 0..basis.len() {
        for i in 0..j {
            let s = s_polynomial(&basis[i], &basis[j], ord);
            if !normal_form(&s, basis, ord).is_zero() {
                return false;
            }
        }
    }
    true
}

/// `true` iff the basis is `{1}`.
pub fn is_unit_ideal<C: Coefficient>(basis: &[MultiPoly<C>]) -> bool {
    basis.iter().any(|g| !g.is_zero() && g.is_constant())
}

/// Number of standard monomials when the ideal is zero-dimensional.
///
/// Returns `None` for positive-dimensional ideals, or when the count would
/// exceed `limit`.
pub fn staircase_size<C: Coefficient>(
    basis: &[MultiPoly<C>],
    ord: MonomialOrder,
    limit: usize,
) -> Option<usize> {
    let nvars = basis.first()?.nvars();
    let lms: Vec<Monomial> = basis
        .iter()
        .filter_map(|g| g.leading_term(ord).map(|(m, _)| m.clone()))
        .collect();
    let mut bounds = vec![u16::MAX; nvars];
    for m in &lms {
        if m.is_one() {
            return Some(0);
        }
        if let Some(v) = m.pure_power_of() {
            bounds[v] = bounds[v].min(m.exponents()[v]);
        }
    }
    if bounds.contains(&u16::MAX) {
        return None;
    }
    let mut count = 0usize;
    let mut exps = vec![0u16; nvars];
    fn walk(
        var: usize,
        exps: &mut Vec<u16>,
        bounds: &[u16],
        lms: &[Monomial],
        count: &mut usize,
        limit: usize,
    ) -> bool {
        if var == exps.len() {
            let m = Monomial::from_exponents(exps);
            if !lms.iter().any(|l| l.divides(&m)) {
                *count += 1;
            }
            return *count <= limit;
        }
        for e in 0..bounds[var] {
            exps[var] = e;
            // prune: once the prefix is already in the ideal, larger exponents are too
            let mut probe = exps.clone();
            probe[var + 1..].iter_mut().for_each(|x| *x = 0);
            if lms.iter().any(|l| l.divides(&Monomial::from_exponents(&probe))) {
                break;
            }
            if !walk(var + 1, exps, bounds, lms, count, limit) {
                return false;
            }
        }
        exps[var] = 0;
        true
    }
    if walk(0, &mut exps, &bounds, &lms, &mut count, limit) {
        Some(count)
    } else {
        None
    }
}

/// Outcome of a minimal-polynomial search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MinPoly<C> {
    /// Least-degree monic `q` with `q(x_var)` in the ideal.
    Found(UniPoly<C>),
    /// The powers `1, x, ..., x^cap` are independent modulo the ideal.
    NotFound,
}

/// Least-degree monic univariate `q` with `NF(q(x_var), basis) = 0`, found
/// as the first linear dependence among normal forms of successive powers.
pub fn minimal_polynomial<C: Coefficient>(
    var: usize,
    basis: &[MultiPoly<C>],
    ord: MonomialOrder,
    degree_cap: usize,
) -> MinPoly<C> {
    let Some(one) = basis
        .iter()
        .find_map(|g| g.terms().first().map(|(_, c)| c.one_like()))
    else {
        return MinPoly::NotFound;
    };
    let nvars = basis[0].nvars();
    let divisors: Vec<(Monomial, C, &MultiPoly<C>)> = basis
        .iter()
        .filter_map(|g| {
            let (m, c) = g.leading_term(ord)?;
            Some((m.clone(), c.inv().unwrap(), g))
        })
        .collect();
    let x = Monomial::var(nvars, var);

    // rows: (reduced vector, combination of powers it equals)
    let mut rows: Vec<(MultiPoly<C>, Vec<C>)> = Vec::new();
    let mut pivot_of: HashMap<Monomial, usize> = HashMap::new();
    let mut power = reduce_with(&MultiPoly::constant(nvars, one.clone()), &divisors, ord);
    for d in 0..=degree_cap {
        let mut w = power.clone();
        let mut combo = vec![one.zero_like(); d + 1];
        combo[d] = one.clone();
        while let Some((lm, lc)) = w.leading_term(ord) {
            let Some(&r) = pivot_of.get(lm) else {
                break;
            };
            let k = lc.neg();
            let (row, row_combo) = &rows[r];
            w = w.add_scaled(row, &Monomial::one(nvars), &k);
            for (c, rc) in combo.iter_mut().zip(row_combo) {
                *c = c.add(&k.mul(rc));
            }
        }
        match w.leading_term(ord) {
            None => return MinPoly::Found(UniPoly::new(combo)),
            Some((lm, lc)) => {
                let inv = lc.inv().unwrap();
                let lm = lm.clone();
                let w = w.scale(&inv);
                let combo: Vec<C> = combo.iter().map(|c| c.mul(&inv)).collect();
                pivot_of.insert(lm, rows.len());
                rows.push((w, combo));
            }
        }
        if d < degree_cap {
            let shifted = MultiPoly::zero(nvars).add_scaled(&power, &x, &one);
            power = reduce_with(&shifted, &divisors, ord);
        }
    }
    MinPoly::NotFound
}
