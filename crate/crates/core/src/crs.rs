use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::fresh::FreshNameSource;
use crate::names::{Atom, FunSym, VarName};
use crate::nominal::{Position, Term};
use crate::perm::Permutation;

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct MetaVar {
    pub name: VarName,
    pub arity: usize,
}

impl MetaVar {
    pub fn new(name: &str, arity: usize) -> MetaVar {
        MetaVar { name: VarName::new(name), arity }
    }
}

impl fmt::Display for MetaVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

/// CRS meta-term; a term when it has no meta-applications. Applications follow the
/// same one-argument convention as nominal terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum MetaTerm {
    Var(Atom),
    MApp(MetaVar, Vec<MetaTerm>),
    Abs(Atom, Box<MetaTerm>),
    App(FunSym, Box<MetaTerm>),
    Tuple(Vec<MetaTerm>),
}

impl MetaTerm {
    pub fn var(a: &str) -> MetaTerm {
        MetaTerm::Var(Atom::new(a))
    }

    pub fn abs(a: &str, body: MetaTerm) -> MetaTerm {
        MetaTerm::Abs(Atom::new(a), Box::new(body))
    }

    pub fn app(f: &str, args: Vec<MetaTerm>) -> MetaTerm {
        MetaTerm::apply(FunSym::new(f, args.len()), args)
    }

    pub fn apply(sym: FunSym, mut args: Vec<MetaTerm>) -> MetaTerm {
        let arg = if sym.arity() == 1 && args.len() == 1 {
            args.pop().unwrap()
        } else {
            MetaTerm::Tuple(args)
        };
        MetaTerm::App(sym, Box::new(arg))
    }

    /// `Z(args…)` with arity `args.len()`.
    pub fn mapp(z: &str, args: Vec<MetaTerm>) -> MetaTerm {
        MetaTerm::MApp(MetaVar::new(z, args.len()), args)
    }

    /// `Z(a, b, …)` with variable arguments.
    pub fn mvars(z: &str, args: &[&str]) -> MetaTerm {
        MetaTerm::mapp(z, args.iter().map(|a| MetaTerm::var(a)).collect())
    }

    pub fn children(&self) -> Vec<&MetaTerm> {
        match self {
            MetaTerm::Var(_) => Vec::new(),
            MetaTerm::MApp(_, args) | MetaTerm::Tuple(args) => args.iter().collect(),
            MetaTerm::Abs(_, t) | MetaTerm::App(_, t) => vec![&**t],
        }
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a MetaTerm)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn is_term(&self) -> bool {
        self.metavars().is_empty()
    }

    pub fn metavars(&self) -> BTreeSet<MetaVar> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let MetaTerm::MApp(z, _) = t {
                out.insert(z.clone());
            }
        });
        out
    }

    pub fn free_vars(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_free(&mut Vec::new(), &mut out);
        out
    }

    fn collect_free(&self, bound: &mut Vec<Atom>, out: &mut BTreeSet<Atom>) {
        match self {
            MetaTerm::Var(a) => {
                if !bound.contains(a) {
                    out.insert(a.clone());
                }
            }
            MetaTerm::Abs(a, t) => {
                bound.push(a.clone());
                t.collect_free(bound, out);
                bound.pop();
            }
            _ => self.children().iter().for_each(|c| c.collect_free(bound, out)),
        }
    }

    pub fn bound_vars(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let MetaTerm::Abs(a, _) = t {
                out.insert(a.clone());
            }
        });
        out
    }

    pub fn all_vars(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| match t {
            MetaTerm::Var(a) | MetaTerm::Abs(a, _) => {
                out.insert(a.clone());
            }
            _ => {}
        });
        out
    }

    pub fn symbols(&self) -> BTreeSet<FunSym> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let MetaTerm::App(f, _) = t {
                out.insert(f.clone());
            }
        });
        out
    }

    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        fn go(t: &MetaTerm, path: &mut Vec<usize>, out: &mut Vec<Position>) {
            out.push(Position(path.clone()));
            for (i, c) in t.children().into_iter().enumerate() {
                path.push(i + 1);
                go(c, path, out);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn subterm_at(&self, p: &Position) -> Result<&MetaTerm> {
        let mut cur = self;
        for &i in &p.0 {
            cur = *cur
                .children()
                .get(i.wrapping_sub(1))
                .ok_or_else(|| Error::InvalidPosition(p.to_string()))?;
        }
        Ok(cur)
    }

    pub fn replace_at(&self, p: &Position, new: MetaTerm) -> Result<MetaTerm> {
        fn go(t: &MetaTerm, path: &[usize], new: MetaTerm) -> Option<MetaTerm> {
            let Some((&i, rest)) = path.split_first() else {
                return Some(new);
            };
            match t {
                MetaTerm::Abs(a, b) if i == 1 => Some(MetaTerm::Abs(a.clone(), Box::new(go(b, rest, new)?))),
                MetaTerm::App(f, b) if i == 1 => Some(MetaTerm::App(f.clone(), Box::new(go(b, rest, new)?))),
                MetaTerm::Tuple(ts) | MetaTerm::MApp(_, ts) if i >= 1 && i <= ts.len() => {
                    let mut ts = ts.clone();
                    ts[i - 1] = go(&ts[i - 1], rest, new)?;
                    Some(match t {
                        MetaTerm::MApp(z, _) => MetaTerm::MApp(z.clone(), ts),
                        _ => MetaTerm::Tuple(ts),
                    })
                }
                _ => None,
            }
        }
        go(self, &p.0, new).ok_or_else(|| Error::InvalidPosition(p.to_string()))
    }

    /// A CRS term read as a ground nominal term.
    pub fn to_nominal(&self) -> Result<Term> {
        Ok(match self {
            MetaTerm::Var(a) => Term::Atom(a.clone()),
            MetaTerm::MApp(..) => return Err(Error::NotGround),
            MetaTerm::Abs(a, b) => Term::Abs(a.clone(), Box::new(b.to_nominal()?)),
            MetaTerm::App(f, b) => Term::App(f.clone(), Box::new(b.to_nominal()?)),
            MetaTerm::Tuple(ts) => Term::Tuple(ts.iter().map(|t| t.to_nominal()).collect::<Result<_>>()?),
        })
    }

    /// A ground nominal term read as a CRS term.
    pub fn from_ground(t: &Term) -> Result<MetaTerm> {
        Ok(match t {
            Term::Atom(a) => MetaTerm::Var(a.clone()),
            Term::Susp(..) => return Err(Error::NotGround),
            Term::Abs(a, b) => MetaTerm::Abs(a.clone(), Box::new(MetaTerm::from_ground(b)?)),
            Term::App(f, b) => MetaTerm::App(f.clone(), Box::new(MetaTerm::from_ground(b)?)),
            Term::Tuple(ts) => MetaTerm::Tuple(ts.iter().map(MetaTerm::from_ground).collect::<Result<_>>()?),
        })
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CrsRule {
    pub name: String,
    pub lhs: MetaTerm,
    pub rhs: MetaTerm,
}

impl CrsRule {
    pub fn new(name: &str, lhs: MetaTerm, rhs: MetaTerm) -> CrsRule {
        CrsRule { name: name.to_string(), lhs, rhs }
    }
}

/// `λ̲(a1…an).body`
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Substitute {
    pub binders: Vec<Atom>,
    pub body: MetaTerm,
}

impl Substitute {
    pub fn new(binders: Vec<Atom>, body: MetaTerm) -> Result<Substitute> {
        let set: BTreeSet<&Atom> = binders.iter().collect();
        if set.len() != binders.len() {
            return Err(Error::Precondition("substitute binders must be distinct".into()));
        }
        if !body.is_term() {
            return Err(Error::Precondition("substitute body must be a term".into()));
        }
        Ok(Substitute { binders, body })
    }

    pub fn free_vars(&self) -> BTreeSet<Atom> {
        let mut fv = self.body.free_vars();
        for b in &self.binders {
            fv.remove(b);
        }
        fv
    }

    pub fn bound_vars(&self) -> BTreeSet<Atom> {
        let mut bv = self.body.bound_vars();
        bv.extend(self.binders.iter().cloned());
        bv
    }

    /// The substitute as nested abstractions, for α-comparison.
    fn as_abs(&self) -> MetaTerm {
        self.binders
            .iter()
            .rev()
            .fold(self.body.clone(), |acc, b| MetaTerm::Abs(b.clone(), Box::new(acc)))
    }
}

pub type Valuation = BTreeMap<MetaVar, Substitute>;

/// Simultaneous capture-avoiding substitution of atoms by terms.
pub fn capture_avoiding_subst(
    t: &MetaTerm,
    pairs: &BTreeMap<Atom, MetaTerm>,
    src: &mut FreshNameSource,
) -> MetaTerm {
    src.reserve_all(t.all_vars().iter().map(|a| a.name().to_string()));
    for (k, v) in pairs {
        src.reserve(k.name());
        src.reserve_all(v.all_vars().iter().map(|a| a.name().to_string()));
    }
    cas(t, pairs, src)
}

fn cas(t: &MetaTerm, pairs: &BTreeMap<Atom, MetaTerm>, src: &mut FreshNameSource) -> MetaTerm {
    if pairs.is_empty() {
        return t.clone();
    }
    match t {
        MetaTerm::Var(a) => pairs.get(a).cloned().unwrap_or_else(|| t.clone()),
        MetaTerm::Abs(a, body) => {
            let fv = body.free_vars();
            let mut inner: BTreeMap<Atom, MetaTerm> = pairs
                .iter()
                .filter(|(k, _)| *k != a && fv.contains(*k))
                .map(|(k, v)| (k.clone(), v.clone()))
                .collect();
            if inner.is_empty() {
                return t.clone();
            }
            let clash = inner.values().any(|v| v.free_vars().contains(a));
            if clash {
                let a2 = src.fresh_atom(a);
                inner.insert(a.clone(), MetaTerm::Var(a2.clone()));
                MetaTerm::Abs(a2, Box::new(cas(body, &inner, src)))
            } else {
                MetaTerm::Abs(a.clone(), Box::new(cas(body, &inner, src)))
            }
        }
        MetaTerm::App(f, b) => MetaTerm::App(f.clone(), Box::new(cas(b, pairs, src))),
        MetaTerm::Tuple(ts) => MetaTerm::Tuple(ts.iter().map(|c| cas(c, pairs, src)).collect()),
        MetaTerm::MApp(z, ts) => MetaTerm::MApp(z.clone(), ts.iter().map(|c| cas(c, pairs, src)).collect()),
    }
}

pub fn apply_substitute(sub: &Substitute, args: &[MetaTerm], src: &mut FreshNameSource) -> Result<MetaTerm> {
    if sub.binders.len() != args.len() {
        return Err(Error::LengthMismatch(sub.binders.len(), args.len()));
    }
    let pairs: BTreeMap<Atom, MetaTerm> = sub.binders.iter().cloned().zip(args.iter().cloned()).collect();
    Ok(capture_avoiding_subst(&sub.body, &pairs, src))
}

/// Replaces meta-applications bottom-up and develops the created redexes. Binders of `t`
/// that would capture a free variable of a substitute are renamed first.
pub fn apply_valuation(sigma: &Valuation, t: &MetaTerm, src: &mut FreshNameSource) -> Result<MetaTerm> {
    let mut danger = BTreeSet::new();
    for z in t.metavars() {
        let sub = sigma.get(&z).ok_or_else(|| Error::UnboundMetaVar(z.to_string()))?;
        danger.extend(sub.free_vars());
        src.reserve_all(sub.body.all_vars().iter().map(|a| a.name().to_string()));
        src.reserve_all(sub.binders.iter().map(|a| a.name().to_string()));
    }
    src.reserve_all(t.all_vars().iter().map(|a| a.name().to_string()));
    av(sigma, t, &danger, &mut Vec::new(), src)
}

fn av(
    sigma: &Valuation,
    t: &MetaTerm,
    danger: &BTreeSet<Atom>,
    ren: &mut Vec<(Atom, Atom)>,
    src: &mut FreshNameSource,
) -> Result<MetaTerm> {
    Ok(match t {
        MetaTerm::Var(a) => MetaTerm::Var(
            ren.iter()
                .rev()
                .find(|(from, _)| from == a)
                .map(|(_, to)| to.clone())
                .unwrap_or_else(|| a.clone()),
        ),
        MetaTerm::Abs(a, b) => {
            let to = if danger.contains(a) { src.fresh_atom(a) } else { a.clone() };
            ren.push((a.clone(), to.clone()));
            let body = av(sigma, b, danger, ren, src);
            ren.pop();
            MetaTerm::Abs(to, Box::new(body?))
        }
        MetaTerm::App(f, b) => MetaTerm::App(f.clone(), Box::new(av(sigma, b, danger, ren, src)?)),
        MetaTerm::Tuple(ts) => MetaTerm::Tuple(
            ts.iter().map(|c| av(sigma, c, danger, ren, src)).collect::<Result<_>>()?,
        ),
        MetaTerm::MApp(z, ts) => {
            let args: Vec<MetaTerm> = ts.iter().map(|c| av(sigma, c, danger, ren, src)).collect::<Result<_>>()?;
            let sub = sigma.get(z).ok_or_else(|| Error::UnboundMetaVar(z.to_string()))?;
            apply_substitute(sub, &args, src)?
        }
    })
}

pub fn check_safety(r: &CrsRule, sigma: &Valuation) -> bool {
    let mut bv = r.lhs.bound_vars();
    bv.extend(r.rhs.bound_vars());
    for (z, s) in sigma {
        let fv = s.free_vars();
        if !fv.is_disjoint(&bv) {
            return false;
        }
        for (z2, s2) in sigma {
            if z2 != z && !fv.is_disjoint(&s2.bound_vars()) {
                return false;
            }
        }
    }
    true
}

/// Equality up to renaming of bound variables.
pub fn crs_alpha_eq(t: &MetaTerm, u: &MetaTerm) -> bool {
    alpha_env(t, u, &mut Vec::new())
}

fn alpha_env(t: &MetaTerm, u: &MetaTerm, env: &mut Vec<(Atom, Atom)>) -> bool {
    match (t, u) {
        (MetaTerm::Var(a), MetaTerm::Var(b)) => {
            match env.iter().rev().find(|(x, y)| x == a || y == b) {
                Some((x, y)) => x == a && y == b,
                None => a == b,
            }
        }
        (MetaTerm::Abs(a, s), MetaTerm::Abs(b, v)) => {
            env.push((a.clone(), b.clone()));
            let r = alpha_env(s, v, env);
            env.pop();
            r
        }
        (MetaTerm::App(f, s), MetaTerm::App(g, v)) => f == g && alpha_env(s, v, env),
        (MetaTerm::Tuple(ss), MetaTerm::Tuple(vs)) => {
            ss.len() == vs.len() && ss.iter().zip(vs).all(|(s, v)| alpha_env(s, v, env))
        }
        (MetaTerm::MApp(z, ss), MetaTerm::MApp(w, vs)) => {
            z == w && ss.len() == vs.len() && ss.iter().zip(vs).all(|(s, v)| alpha_env(s, v, env))
        }
        _ => false,
    }
}

pub fn crs_rule_alpha_eq(r: &CrsRule, s: &CrsRule) -> bool {
    crs_alpha_eq(&r.lhs, &s.lhs) && crs_alpha_eq(&r.rhs, &s.rhs)
}

/// Matches a rule left-hand side against a term.
pub fn crs_match(l: &MetaTerm, s: &MetaTerm) -> Option<Valuation> {
    let mut val = Valuation::new();
    if cm(l, s, &mut Vec::new(), &mut val) {
        Some(val)
    } else {
        None
    }
}

fn innermost_left(env: &[(Atom, Atom)], a: &Atom) -> Option<usize> {
    env.iter().rposition(|(x, _)| x == a)
}

fn innermost_right(env: &[(Atom, Atom)], b: &Atom) -> Option<usize> {
    env.iter().rposition(|(_, y)| y == b)
}

fn cm(l: &MetaTerm, s: &MetaTerm, env: &mut Vec<(Atom, Atom)>, val: &mut Valuation) -> bool {
    match (l, s) {
        (MetaTerm::Var(a), MetaTerm::Var(b)) => match (innermost_left(env, a), innermost_right(env, b)) {
            (Some(i), Some(j)) => i == j,
            (None, None) => a == b,
            _ => false,
        },
        (MetaTerm::Abs(a, lb), MetaTerm::Abs(b, sb)) => {
            env.push((a.clone(), b.clone()));
            let r = cm(lb, sb, env, val);
            env.pop();
            r
        }
        (MetaTerm::App(f, la), MetaTerm::App(g, sa)) => f == g && cm(la, sa, env, val),
        (MetaTerm::Tuple(ls), MetaTerm::Tuple(ss)) => {
            ls.len() == ss.len() && ls.iter().zip(ss).all(|(l, s)| cm(l, s, env, val))
        }
        (MetaTerm::MApp(z, args), s) => {
            let mut idx = Vec::new();
            let mut binders = Vec::new();
            for arg in args {
                let MetaTerm::Var(a) = arg else { return false };
                let Some(i) = innermost_left(env, a) else { return false };
                let b = env[i].1.clone();
                if innermost_right(env, &b) != Some(i) || idx.contains(&i) {
                    return false;
                }
                idx.push(i);
                binders.push(b);
            }
            for x in s.free_vars() {
                if let Some(k) = innermost_right(env, &x) {
                    if !idx.contains(&k) {
                        return false;
                    }
                }
            }
            let sub = Substitute { binders, body: s.clone() };
            match val.get(z) {
                Some(old) => crs_alpha_eq(&old.as_abs(), &sub.as_abs()),
                None => {
                    val.insert(z.clone(), sub);
                    true
                }
            }
        }
        _ => false,
    }
}

/// One rewrite step with `r`; returns the redex position and the result.
pub fn crs_rewrite_step_at(
    t: &MetaTerm,
    r: &CrsRule,
    p: Option<&Position>,
    src: &mut FreshNameSource,
) -> Option<(Position, MetaTerm)> {
    if !t.is_term() {
        return None;
    }
    let avoid: BTreeSet<Atom> = t.all_vars();
    src.reserve_all(avoid.iter().map(|a| a.name().to_string()));
    let rr = barendregt_rename_rule_avoiding(r, &avoid, src);
    let positions = match p {
        Some(p) => vec![p.clone()],
        None => t.positions(),
    };
    for pos in positions {
        let Ok(sub) = t.subterm_at(&pos) else { continue };
        if let Some(sigma) = crs_match(&rr.lhs, sub) {
            let rhs = apply_valuation(&sigma, &rr.rhs, src).ok()?;
            return Some((pos.clone(), t.replace_at(&pos, rhs).ok()?));
        }
    }
    None
}

pub fn crs_rewrite_step(
    t: &MetaTerm,
    r: &CrsRule,
    p: Option<&Position>,
    src: &mut FreshNameSource,
) -> Option<MetaTerm> {
    crs_rewrite_step_at(t, r, p, src).map(|(_, t)| t)
}

/// First leftmost-outermost step over `rules`: (rule index, position, result).
pub fn crs_step_any(t: &MetaTerm, rules: &[CrsRule], src: &mut FreshNameSource) -> Option<(usize, Position, MetaTerm)> {
    for pos in t.positions() {
        for (i, r) in rules.iter().enumerate() {
            if let Some((p, u)) = crs_rewrite_step_at(t, r, Some(&pos), src) {
                return Some((i, p, u));
            }
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct CrsTraceStep {
    pub rule: String,
    pub at: Position,
    pub term: MetaTerm,
}

#[derive(Clone, Debug)]
pub struct CrsNormalized {
    pub term: MetaTerm,
    pub normal: bool,
    pub trace: Vec<CrsTraceStep>,
}

pub fn crs_normalize(t: &MetaTerm, rules: &[CrsRule], max_steps: usize) -> CrsNormalized {
    let mut src = FreshNameSource::new();
    let mut cur = t.clone();
    let mut trace = Vec::new();
    for _ in 0..max_steps {
        match crs_step_any(&cur, rules, &mut src) {
            Some((i, at, u)) => {
                trace.push(CrsTraceStep { rule: rules[i].name.clone(), at, term: u.clone() });
                cur = u;
            }
            None => return CrsNormalized { term: cur, normal: true, trace },
        }
    }
    let normal = crs_step_any(&cur, rules, &mut src).is_none();
    CrsNormalized { term: cur, normal, trace }
}

/// Gives every binder its own name, distinct from the free variables. Binders whose
/// names are still unused keep them.
pub fn barendregt_rename(t: &MetaTerm, src: &mut FreshNameSource) -> MetaTerm {
    src.reserve_all(t.all_vars().iter().map(|a| a.name().to_string()));
    let mut taken = t.free_vars();
    br(t, &mut taken, &mut Vec::new(), src)
}

pub fn barendregt_rename_rule(r: &CrsRule, src: &mut FreshNameSource) -> CrsRule {
    barendregt_rename_rule_avoiding(r, &BTreeSet::new(), src)
}

/// As `barendregt_rename_rule`, additionally keeping binders away from `avoid`.
pub fn barendregt_rename_rule_avoiding(r: &CrsRule, avoid: &BTreeSet<Atom>, src: &mut FreshNameSource) -> CrsRule {
    src.reserve_all(r.lhs.all_vars().iter().map(|a| a.name().to_string()));
    src.reserve_all(r.rhs.all_vars().iter().map(|a| a.name().to_string()));
    src.reserve_all(avoid.iter().map(|a| a.name().to_string()));
    let mut taken = r.lhs.free_vars();
    taken.extend(r.rhs.free_vars());
    taken.extend(avoid.iter().cloned());
    let lhs = br(&r.lhs, &mut taken, &mut Vec::new(), src);
    let rhs = br(&r.rhs, &mut taken, &mut Vec::new(), src);
    CrsRule { name: r.name.clone(), lhs, rhs }
}

fn br(t: &MetaTerm, taken: &mut BTreeSet<Atom>, env: &mut Vec<(Atom, Atom)>, src: &mut FreshNameSource) -> MetaTerm {
    match t {
        MetaTerm::Var(a) => MetaTerm::Var(
            env.iter()
                .rev()
                .find(|(x, _)| x == a)
                .map(|(_, y)| y.clone())
                .unwrap_or_else(|| a.clone()),
        ),
        MetaTerm::Abs(a, b) => {
            let to = if taken.contains(a) { src.fresh_atom(a) } else { a.clone() };
            taken.insert(to.clone());
            env.push((a.clone(), to.clone()));
            let body = br(b, taken, env, src);
            env.pop();
            MetaTerm::Abs(to, Box::new(body))
        }
        MetaTerm::App(f, b) => MetaTerm::App(f.clone(), Box::new(br(b, taken, env, src))),
        MetaTerm::Tuple(ts) => MetaTerm::Tuple(ts.iter().map(|c| br(c, taken, env, src)).collect()),
        MetaTerm::MApp(z, ts) => MetaTerm::MApp(z.clone(), ts.iter().map(|c| br(c, taken, env, src)).collect()),
    }
}

/// True when all binders are pairwise distinct and distinct from the free variables.
pub fn is_barendregt(t: &MetaTerm) -> bool {
    let mut seen = t.free_vars();
    let mut ok = true;
    t.visit(&mut |s| {
        if let MetaTerm::Abs(a, _) = s {
            ok &= seen.insert(a.clone());
        }
    });
    ok
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum RuleClause {
    LhsClosed,
    RhsClosed,
    LhsRoot,
    MetaVarsOfRhs,
    ArgumentsDistinctBound,
    ArityConsistent,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct RuleViolation {
    pub clause: RuleClause,
    pub side: &'static str,
    pub at: Position,
    pub detail: String,
}

impl fmt::Display for RuleViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let what = match self.clause {
            RuleClause::LhsClosed | RuleClause::RhsClosed => "side must be closed",
            RuleClause::LhsRoot => "left-hand side must be a function application",
            RuleClause::MetaVarsOfRhs => "meta-variables of the right-hand side must occur on the left",
            RuleClause::ArgumentsDistinctBound => {
                "left-hand meta-application arguments must be pairwise-distinct bound variables"
            }
            RuleClause::ArityConsistent => "meta-variable used with two arities",
        };
        write!(f, "{what} ({} at {}: {})", self.side, self.at, self.detail)
    }
}

pub fn check_crs_rule(r: &CrsRule) -> Vec<RuleViolation> {
    let mut out = Vec::new();
    for (side, t, clause) in [
        ("lhs", &r.lhs, RuleClause::LhsClosed),
        ("rhs", &r.rhs, RuleClause::RhsClosed),
    ] {
        free_occurrences(t, &mut Vec::new(), &mut Vec::new(), &mut |a, at| {
            out.push(RuleViolation {
                clause: clause.clone(),
                side,
                at,
                detail: format!("free variable {a}"),
            })
        });
    }
    if !matches!(r.lhs, MetaTerm::App(..)) {
        out.push(RuleViolation {
            clause: RuleClause::LhsRoot,
            side: "lhs",
            at: Position::root(),
            detail: "root is not f(…)".into(),
        });
    }
    let mut arities: BTreeMap<VarName, usize> = BTreeMap::new();
    for (side, t) in [("lhs", &r.lhs), ("rhs", &r.rhs)] {
        for p in t.positions() {
            if let Ok(MetaTerm::MApp(z, _)) = t.subterm_at(&p) {
                if let Some(&n) = arities.get(&z.name) {
                    if n != z.arity {
                        out.push(RuleViolation {
                            clause: RuleClause::ArityConsistent,
                            side,
                            at: p.clone(),
                            detail: format!("{} has arity {n} and {}", z.name, z.arity),
                        });
                    }
                } else {
                    arities.insert(z.name.clone(), z.arity);
                }
            }
        }
    }
    let lmv = r.lhs.metavars();
    for p in r.rhs.positions() {
        if let Ok(MetaTerm::MApp(z, _)) = r.rhs.subterm_at(&p) {
            if !lmv.contains(z) {
                out.push(RuleViolation {
                    clause: RuleClause::MetaVarsOfRhs,
                    side: "rhs",
                    at: p.clone(),
                    detail: format!("{} does not occur in the left-hand side", z.name),
                });
            }
        }
    }
    for p in r.lhs.positions() {
        if let Ok(MetaTerm::MApp(z, args)) = r.lhs.subterm_at(&p) {
            let mut seen = BTreeSet::new();
            for arg in args {
                let problem = match arg {
                    MetaTerm::Var(a) if !seen.insert(a.clone()) => Some(format!("{a} repeated in {}", z.name)),
                    MetaTerm::Var(_) => None,
                    _ => Some(format!("argument of {} is not a variable", z.name)),
                };
                if let Some(detail) = problem {
                    out.push(RuleViolation {
                        clause: RuleClause::ArgumentsDistinctBound,
                        side: "lhs",
                        at: p.clone(),
                        detail,
                    });
                }
            }
        }
    }
    out
}

fn free_occurrences(
    t: &MetaTerm,
    bound: &mut Vec<Atom>,
    path: &mut Vec<usize>,
    report: &mut impl FnMut(&Atom, Position),
) {
    match t {
        MetaTerm::Var(a) => {
            if !bound.contains(a) {
                report(a, Position(path.clone()));
            }
        }
        MetaTerm::Abs(a, b) => {
            bound.push(a.clone());
            path.push(1);
            free_occurrences(b, bound, path, report);
            path.pop();
            bound.pop();
        }
        _ => {
            for (i, c) in t.children().into_iter().enumerate() {
                path.push(i + 1);
                free_occurrences(c, bound, path, report);
                path.pop();
            }
        }
    }
}

/// Applies a permutation to a CRS term read as a nominal term.
pub fn perm_act_term(p: &Permutation, t: &MetaTerm) -> Result<MetaTerm> {
    MetaTerm::from_ground(&t.to_nominal()?.perm_act(p))
}
