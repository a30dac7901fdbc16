use std::collections::{BTreeMap, BTreeSet};

use crate::crs::{check_crs_rule, CrsRule, MetaTerm, MetaVar, Substitute, Valuation};
use crate::error::{Error, Result};
use crate::names::{Atom, VarName};
use crate::nominal::{derive_fresh, FreshCtx, Subst, Term};
use crate::perm::Permutation;
use crate::rewrite::{check_closed_rule, check_closed_term, closedness_violation, NominalRule};

/// Λ_t: for each variable, the atoms abstracted above any of its occurrences.
pub type LambdaMap = BTreeMap<VarName, BTreeSet<Atom>>;

pub fn lambda_map(t: &Term) -> LambdaMap {
    let mut out = LambdaMap::new();
    fn go(t: &Term, above: &mut Vec<Atom>, out: &mut LambdaMap) {
        match t {
            Term::Atom(_) => {}
            Term::Susp(_, x) => out.entry(x.clone()).or_default().extend(above.iter().cloned()),
            Term::Abs(a, b) => {
                above.push(a.clone());
                go(b, above, out);
                above.pop();
            }
            Term::App(_, b) => go(b, above, out),
            Term::Tuple(ts) => ts.iter().for_each(|c| go(c, above, out)),
        }
    }
    go(t, &mut Vec::new(), &mut out);
    out
}

/// `xs` (sorted) and `x̄s = π·xs` for an occurrence `π·X`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ArgLists {
    pub xs: Vec<Atom>,
    pub xbar: Vec<Atom>,
}

pub fn arg_lists(delta: &FreshCtx, lam: &LambdaMap, p: &Permutation, x: &VarName) -> ArgLists {
    let inv = p.inverse();
    let xs: BTreeSet<Atom> = lam
        .get(x)
        .into_iter()
        .flatten()
        .map(|a| inv.apply(a))
        .filter(|a| !delta.contains(a, x))
        .collect();
    let xs: Vec<Atom> = xs.into_iter().collect();
    let xbar = xs.iter().map(|a| p.apply(a)).collect();
    ArgLists { xs, xbar }
}

fn closed_or_err(delta: &FreshCtx, t: &Term) -> Result<()> {
    if check_closed_term(delta, t) {
        return Ok(());
    }
    let locus = closedness_violation(delta, t)
        .map(|v| v.to_string())
        .unwrap_or_else(|| "closedness check failed".to_string());
    Err(Error::NotClosed(locus))
}

/// Closed (or ground) nominal term to CRS meta-term.
pub fn translate_term(delta: &FreshCtx, t: &Term) -> Result<MetaTerm> {
    if t.is_ground() {
        return MetaTerm::from_ground(t);
    }
    closed_or_err(delta, t)?;
    Ok(translate_with(delta, &lambda_map(t), t))
}

fn translate_with(delta: &FreshCtx, lam: &LambdaMap, t: &Term) -> MetaTerm {
    match t {
        Term::Atom(a) => MetaTerm::Var(a.clone()),
        Term::Susp(p, x) => {
            let al = arg_lists(delta, lam, p, x);
            MetaTerm::MApp(
                MetaVar { name: x.clone(), arity: al.xbar.len() },
                al.xbar.into_iter().map(MetaTerm::Var).collect(),
            )
        }
        Term::Abs(a, b) => MetaTerm::Abs(a.clone(), Box::new(translate_with(delta, lam, b))),
        Term::App(f, b) => MetaTerm::App(f.clone(), Box::new(translate_with(delta, lam, b))),
        Term::Tuple(ts) => MetaTerm::Tuple(ts.iter().map(|c| translate_with(delta, lam, c)).collect()),
    }
}

/// Closed with a function application at the root of the left-hand side.
pub fn check_standard(r: &NominalRule) -> bool {
    matches!(r.lhs, Term::App(..)) && check_closed_rule(r)
}

pub fn translate_rule(r: &NominalRule) -> Result<CrsRule> {
    if !matches!(r.lhs, Term::App(..)) {
        return Err(Error::NotStandard(format!("{}: left-hand side is not a function application", r.name)));
    }
    if !check_closed_rule(r) {
        let locus = closedness_violation(&r.ctx, &r.as_pair())
            .map(|v| v.to_string())
            .unwrap_or_else(|| "closedness check failed".into());
        return Err(Error::NotStandard(format!("{}: not closed: {locus}", r.name)));
    }
    let lam = lambda_map(&r.as_pair());
    let lhs = translate_with(&r.ctx, &lam, &r.lhs);
    let rhs = translate_with(&r.ctx, &lam, &r.rhs);
    debug_assert_eq!(lhs, translate_with(&r.ctx, &lambda_map(&r.lhs), &r.lhs));
    debug_assert_eq!(rhs, translate_with(&r.ctx, &lambda_map(&r.rhs), &r.rhs));
    let out = CrsRule::new(&r.name, lhs, rhs);
    let bad = check_crs_rule(&out);
    if let Some(v) = bad.first() {
        return Err(Error::InvalidRule { name: r.name.clone(), detail: v.to_string() });
    }
    Ok(out)
}

/// Leftmost occurrence of each variable: its permutation.
fn leftmost_perms(t: &Term) -> BTreeMap<VarName, Permutation> {
    let mut out = BTreeMap::new();
    t.visit(&mut |s| {
        if let Term::Susp(p, x) = s {
            out.entry(x.clone()).or_insert_with(|| p.clone());
        }
    });
    out
}

pub fn translate_subst(delta: &FreshCtx, t: &Term, sigma: &Subst) -> Result<Valuation> {
    if !t.is_ground() {
        closed_or_err(delta, t)?;
    }
    let vars = t.vars();
    if let Some(x) = sigma.keys().find(|x| !vars.contains(*x)) {
        return Err(Error::Precondition(format!("{x} is substituted but does not occur in the term")));
    }
    if !t.subst(sigma).is_ground() {
        return Err(Error::Precondition("instance is not ground".into()));
    }
    for (a, x) in delta.iter() {
        if let Some(s) = sigma.get(x) {
            if !derive_fresh(&FreshCtx::new(), a, s) {
                return Err(Error::Precondition(format!("substitution violates {a}#{x}")));
            }
        }
    }
    let lam = lambda_map(t);
    let left = leftmost_perms(t);
    let mut out = Valuation::new();
    for (x, s) in sigma {
        let p = &left[x];
        let al = arg_lists(delta, &lam, p, x);
        let body = MetaTerm::from_ground(&s.perm_act(p))?;
        let z = MetaVar { name: x.clone(), arity: al.xbar.len() };
        out.insert(z, Substitute::new(al.xbar, body)?);
    }
    Ok(out)
}
