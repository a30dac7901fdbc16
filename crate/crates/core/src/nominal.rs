use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::names::{Atom, FunSym, VarName};
use crate::perm::{ds, Permutation};

/// Nominal term. An application holds one argument: the element itself for unary
/// symbols, otherwise a tuple of the symbol's arity (or a variable standing for one).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Term {
    Atom(Atom),
    Susp(Permutation, VarName),
    Abs(Atom, Box<Term>),
    App(FunSym, Box<Term>),
    Tuple(Vec<Term>),
}

impl Term {
    pub fn atom(a: &str) -> Term {
        Term::Atom(Atom::new(a))
    }

    pub fn var(x: &str) -> Term {
        Term::Susp(Permutation::id(), VarName::new(x))
    }

    pub fn susp(p: Permutation, x: &str) -> Term {
        Term::Susp(p, VarName::new(x))
    }

    pub fn abs(a: &str, body: Term) -> Term {
        Term::Abs(Atom::new(a), Box::new(body))
    }

    /// `f(args…)` with arity `args.len()`.
    pub fn app(f: &str, args: Vec<Term>) -> Term {
        let sym = FunSym::new(f, args.len());
        Term::apply(sym, args)
    }

    pub fn apply(sym: FunSym, mut args: Vec<Term>) -> Term {
        let arg = if sym.arity() == 1 && args.len() == 1 {
            args.pop().unwrap()
        } else {
            Term::Tuple(args)
        };
        Term::App(sym, Box::new(arg))
    }

    /// `t[a -> s]`, encoded as `sub([a]t, s)`.
    pub fn sub(a: &Atom, t: Term, s: Term) -> Term {
        Term::App(
            FunSym::sub(),
            Box::new(Term::Tuple(vec![Term::Abs(a.clone(), Box::new(t)), s])),
        )
    }

    /// Arguments of an application as a list (the single argument of a unary symbol,
    /// the tuple elements otherwise).
    pub fn app_args(&self) -> Option<(&FunSym, Vec<&Term>)> {
        match self {
            Term::App(f, arg) => {
                if f.arity() == 1 {
                    Some((f, vec![&**arg]))
                } else if let Term::Tuple(es) = &**arg {
                    Some((f, es.iter().collect()))
                } else {
                    Some((f, vec![&**arg]))
                }
            }
            _ => None,
        }
    }

    pub fn perm_act(&self, p: &Permutation) -> Term {
        if p.is_empty() {
            return self.clone();
        }
        match self {
            Term::Atom(a) => Term::Atom(p.apply(a)),
            Term::Susp(q, x) => Term::Susp(p.compose(q), x.clone()),
            Term::Abs(a, t) => Term::Abs(p.apply(a), Box::new(t.perm_act(p))),
            Term::App(f, t) => Term::App(f.clone(), Box::new(t.perm_act(p))),
            Term::Tuple(ts) => Term::Tuple(ts.iter().map(|t| t.perm_act(p)).collect()),
        }
    }

    /// Capturing instantiation: `(π·X)σ = π·σ(X)`.
    pub fn subst(&self, sigma: &Subst) -> Term {
        match self {
            Term::Atom(_) => self.clone(),
            Term::Susp(p, x) => match sigma.get(x) {
                Some(s) => s.perm_act(p),
                None => self.clone(),
            },
            Term::Abs(a, t) => Term::Abs(a.clone(), Box::new(t.subst(sigma))),
            Term::App(f, t) => Term::App(f.clone(), Box::new(t.subst(sigma))),
            Term::Tuple(ts) => Term::Tuple(ts.iter().map(|t| t.subst(sigma)).collect()),
        }
    }

    /// A(t): atoms, with suspensions contributing the support of their permutation.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Term::Atom(a) => {
                out.insert(a.clone());
            }
            Term::Susp(p, _) => out.extend(p.support()),
            Term::Abs(a, t) => {
                out.insert(a.clone());
                t.collect_atoms(out);
            }
            Term::App(_, t) => t.collect_atoms(out),
            Term::Tuple(ts) => ts.iter().for_each(|t| t.collect_atoms(out)),
        }
    }

    /// Every atom written anywhere, including cancelling swappings.
    pub fn atoms_mentioned(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| match t {
            Term::Atom(a) | Term::Abs(a, _) => {
                out.insert(a.clone());
            }
            Term::Susp(p, _) => out.extend(p.mentioned()),
            _ => {}
        });
        out
    }

    pub fn vars(&self) -> BTreeSet<VarName> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Susp(_, x) = t {
                out.insert(x.clone());
            }
        });
        out
    }

    pub fn is_ground(&self) -> bool {
        self.vars().is_empty()
    }

    /// Function symbols used, including `sub`.
    pub fn symbols(&self) -> BTreeSet<FunSym> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::App(f, _) = t {
                out.insert(f.clone());
            }
        });
        out
    }

    pub fn tuple_widths(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.visit(&mut |t| {
            if let Term::Tuple(ts) = t {
                out.insert(ts.len());
            }
        });
        out
    }

    /// Pre-order traversal.
    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Term)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn children(&self) -> Vec<&Term> {
        match self {
            Term::Atom(_) | Term::Susp(..) => Vec::new(),
            Term::Abs(_, t) | Term::App(_, t) => vec![&**t],
            Term::Tuple(ts) => ts.iter().collect(),
        }
    }

    /// All positions in pre-order, which is also lexicographic order.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_positions(&mut path, &mut out);
        out
    }

    fn collect_positions(&self, path: &mut Vec<usize>, out: &mut Vec<Position>) {
        out.push(Position(path.clone()));
        for (i, c) in self.children().into_iter().enumerate() {
            path.push(i + 1);
            c.collect_positions(path, out);
            path.pop();
        }
    }

    pub fn subterm_at(&self, p: &Position) -> Result<&Term> {
        let mut cur = self;
        for &i in &p.0 {
            cur = *cur
                .children()
                .get(i.wrapping_sub(1))
                .ok_or_else(|| Error::InvalidPosition(p.to_string()))?;
        }
        Ok(cur)
    }

    pub fn replace_at(&self, p: &Position, new: Term) -> Result<Term> {
        self.replace_from(&p.0, new)
            .ok_or_else(|| Error::InvalidPosition(p.to_string()))
    }

    fn replace_from(&self, path: &[usize], new: Term) -> Option<Term> {
        let Some((&i, rest)) = path.split_first() else {
            return Some(new);
        };
        match self {
            Term::Abs(a, t) if i == 1 => Some(Term::Abs(a.clone(), Box::new(t.replace_from(rest, new)?))),
            Term::App(f, t) if i == 1 => Some(Term::App(f.clone(), Box::new(t.replace_from(rest, new)?))),
            Term::Tuple(ts) if i >= 1 && i <= ts.len() => {
                let mut ts = ts.clone();
                ts[i - 1] = ts[i - 1].replace_from(rest, new)?;
                Some(Term::Tuple(ts))
            }
            _ => None,
        }
    }

    /// Atoms with an occurrence outside every abstraction of themselves (ground terms only).
    pub fn unabstracted_atoms(&self) -> Result<BTreeSet<Atom>> {
        if !self.is_ground() {
            return Err(Error::NotGround);
        }
        let mut out = BTreeSet::new();
        fn go(t: &Term, bound: &mut Vec<Atom>, out: &mut BTreeSet<Atom>) {
            match t {
                Term::Atom(a) => {
                    if !bound.contains(a) {
                        out.insert(a.clone());
                    }
                }
                Term::Susp(..) => {}
                Term::Abs(a, t) => {
                    bound.push(a.clone());
                    go(t, bound, out);
                    bound.pop();
                }
                Term::App(_, t) => go(t, bound, out),
                Term::Tuple(ts) => ts.iter().for_each(|t| go(t, bound, out)),
            }
        }
        go(self, &mut Vec::new(), &mut out);
        Ok(out)
    }

    /// Applies an injective renaming to atoms and variables.
    pub fn rename(&self, fa: &impl Fn(&Atom) -> Atom, fv: &impl Fn(&VarName) -> VarName) -> Term {
        match self {
            Term::Atom(a) => Term::Atom(fa(a)),
            Term::Susp(p, x) => Term::Susp(p.rename(fa), fv(x)),
            Term::Abs(a, t) => Term::Abs(fa(a), Box::new(t.rename(fa, fv))),
            Term::App(f, t) => Term::App(f.clone(), Box::new(t.rename(fa, fv))),
            Term::Tuple(ts) => Term::Tuple(ts.iter().map(|t| t.rename(fa, fv)).collect()),
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }
}

/// Path of 1-based child indices.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Position(pub Vec<usize>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    /// Accepts `ε`, `e` or the empty string for the root, else indices separated by `.` or `·`.
    pub fn parse(s: &str) -> Result<Position> {
        let s = s.trim();
        if s.is_empty() || s == "ε" || s == "e" {
            return Ok(Position::root());
        }
        s.split(['.', '·'])
            .map(|part| match part.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(Error::InvalidPosition(s.to_string())),
            })
            .collect::<Result<Vec<_>>>()
            .map(Position)
    }

    pub fn child(&self, i: usize) -> Position {
        let mut v = self.0.clone();
        v.push(i);
        Position(v)
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("ε");
        }
        let parts: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        f.write_str(&parts.join("."))
    }
}

/// Set of primitive constraints `a#X`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct FreshCtx(BTreeSet<(Atom, VarName)>);

impl FreshCtx {
    pub fn new() -> FreshCtx {
        FreshCtx::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (Atom, VarName)>>(pairs: I) -> FreshCtx {
        FreshCtx(pairs.into_iter().collect())
    }

    /// Convenience: `&[("a", "X")]`.
    pub fn of(pairs: &[(&str, &str)]) -> FreshCtx {
        FreshCtx::from_pairs(pairs.iter().map(|(a, x)| (Atom::new(a), VarName::new(x))))
    }

    pub fn insert(&mut self, a: Atom, x: VarName) {
        self.0.insert((a, x));
    }

    pub fn contains(&self, a: &Atom, x: &VarName) -> bool {
        self.0.contains(&(a.clone(), x.clone()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &(Atom, VarName)> {
        self.0.iter()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn union(&self, other: &FreshCtx) -> FreshCtx {
        FreshCtx(self.0.union(&other.0).cloned().collect())
    }

    pub fn extend(&mut self, other: &FreshCtx) {
        self.0.extend(other.0.iter().cloned());
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.0.iter().map(|(a, _)| a.clone()).collect()
    }

    pub fn vars(&self) -> BTreeSet<VarName> {
        self.0.iter().map(|(_, x)| x.clone()).collect()
    }

    pub fn rename(&self, fa: &impl Fn(&Atom) -> Atom, fv: &impl Fn(&VarName) -> VarName) -> FreshCtx {
        FreshCtx(self.0.iter().map(|(a, x)| (fa(a), fv(x))).collect())
    }
}

impl fmt::Display for FreshCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(a, x)| format!("{a}#{x}")).collect();
        f.write_str(&parts.join(", "))
    }
}

pub type Subst = BTreeMap<VarName, Term>;

/// Δ ⊢ a # t.
pub fn derive_fresh(delta: &FreshCtx, a: &Atom, t: &Term) -> bool {
    match t {
        Term::Atom(b) => a != b,
        Term::Susp(p, x) => delta.contains(&p.inverse().apply(a), x),
        Term::Abs(b, s) => a == b || derive_fresh(delta, a, s),
        Term::App(_, s) => derive_fresh(delta, a, s),
        Term::Tuple(ts) => ts.iter().all(|s| derive_fresh(delta, a, s)),
    }
}

/// Δ ⊢ s ≈α t.
pub fn derive_alpha(delta: &FreshCtx, s: &Term, t: &Term) -> bool {
    match (s, t) {
        (Term::Atom(a), Term::Atom(b)) => a == b,
        (Term::Susp(p, x), Term::Susp(q, y)) => {
            x == y && ds(p, q).iter().all(|a| delta.contains(a, x))
        }
        (Term::Abs(a, s1), Term::Abs(b, t1)) => {
            if a == b {
                derive_alpha(delta, s1, t1)
            } else {
                let sw = Permutation::swap(b, a);
                derive_alpha(delta, &s1.perm_act(&sw), t1) && derive_fresh(delta, b, s1)
            }
        }
        (Term::App(f, s1), Term::App(g, t1)) => f == g && derive_alpha(delta, s1, t1),
        (Term::Tuple(ss), Term::Tuple(ts)) => {
            ss.len() == ts.len() && ss.iter().zip(ts).all(|(s, t)| derive_alpha(delta, s, t))
        }
        _ => false,
    }
}
