use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::fresh::FreshNameSource;
use crate::names::{Atom, FunSym, VarName};
use crate::nominal::{derive_alpha, derive_fresh, FreshCtx, Position, Subst, Term};
use crate::perm::{ds, Permutation};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NominalRule {
    pub name: String,
    pub ctx: FreshCtx,
    pub lhs: Term,
    pub rhs: Term,
}

impl NominalRule {
    /// Checks V(rhs) ∪ V(ctx) ⊆ V(lhs).
    pub fn new(name: &str, ctx: FreshCtx, lhs: Term, rhs: Term) -> Result<NominalRule> {
        let lv = lhs.vars();
        let stray: Vec<String> = rhs
            .vars()
            .into_iter()
            .chain(ctx.vars())
            .filter(|x| !lv.contains(x))
            .map(|x| x.to_string())
            .collect();
        if !stray.is_empty() {
            return Err(Error::InvalidRule {
                name: name.to_string(),
                detail: format!("variables {} do not occur in the left-hand side", stray.join(", ")),
            });
        }
        Ok(NominalRule { name: name.to_string(), ctx, lhs, rhs })
    }

    /// A(R): atoms of the context and both sides.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = self.ctx.atoms();
        out.extend(self.lhs.atoms());
        out.extend(self.rhs.atoms());
        out
    }

    pub fn names(&self) -> BTreeSet<String> {
        let mut out = ctx_term_names(&self.ctx, &self.lhs);
        out.extend(ctx_term_names(&FreshCtx::new(), &self.rhs));
        out
    }

    pub fn as_pair(&self) -> Term {
        Term::Tuple(vec![self.lhs.clone(), self.rhs.clone()])
    }
}

/// Every atom and variable name written in `Δ ⊢ t`.
pub fn ctx_term_names(delta: &FreshCtx, t: &Term) -> BTreeSet<String> {
    let mut out: BTreeSet<String> = t.atoms_mentioned().iter().map(|a| a.name().to_string()).collect();
    out.extend(t.vars().iter().map(|x| x.name().to_string()));
    out.extend(delta.atoms().iter().map(|a| a.name().to_string()));
    out.extend(delta.vars().iter().map(|x| x.name().to_string()));
    out
}

/// Finds θ with Δ ⊢ lθ ≈α s and Δ ⊢ ∇θ. Variables of `l` and `s` must be disjoint.
pub fn nominal_match(delta: &FreshCtx, nabla: &FreshCtx, l: &Term, s: &Term) -> Option<Subst> {
    let mut theta = Subst::new();
    if !match_into(delta, l, s.clone(), &mut theta) {
        return None;
    }
    for (a, x) in nabla.iter() {
        match theta.get(x) {
            Some(u) if derive_fresh(delta, a, u) => {}
            _ => return None,
        }
    }
    debug_assert!(derive_alpha(delta, &l.subst(&theta), s));
    Some(theta)
}

fn match_into(delta: &FreshCtx, l: &Term, s: Term, theta: &mut Subst) -> bool {
    match (l, s) {
        (Term::Atom(a), Term::Atom(b)) => *a == b,
        (Term::Susp(p, x), s) => {
            let cand = s.perm_act(&p.inverse());
            match theta.get(x) {
                Some(u) => derive_alpha(delta, u, &cand),
                None => {
                    theta.insert(x.clone(), cand);
                    true
                }
            }
        }
        (Term::Abs(a, lb), Term::Abs(b, sb)) => {
            if *a == b {
                match_into(delta, lb, *sb, theta)
            } else {
                // [b]s' ≈ [a]u iff a # s' and (a b)·s' ≈ u
                derive_fresh(delta, a, &sb)
                    && match_into(delta, lb, sb.perm_act(&Permutation::swap(a, &b)), theta)
            }
        }
        (Term::App(f, la), Term::App(g, sa)) => *f == g && match_into(delta, la, *sa, theta),
        (Term::Tuple(ls), Term::Tuple(ss)) => {
            ls.len() == ss.len()
                && ls.iter().zip(ss).all(|(l, s)| match_into(delta, l, s, theta))
        }
        _ => false,
    }
}

/// Renames every atom and variable of `Δ ⊢ t` to a fresh name; returns the renamed pair.
fn freshen_ctx_term(delta: &FreshCtx, terms: &[&Term], src: &mut FreshNameSource) -> (FreshCtx, Vec<Term>) {
    let mut atoms = delta.atoms();
    let mut vars = delta.vars();
    for t in terms {
        atoms.extend(t.atoms_mentioned());
        vars.extend(t.vars());
    }
    for t in terms {
        src.reserve_all(ctx_term_names(delta, t));
    }
    let amap: BTreeMap<Atom, Atom> = atoms.into_iter().map(|a| (a.clone(), src.fresh_atom(&a))).collect();
    let vmap: BTreeMap<VarName, VarName> = vars.into_iter().map(|x| (x.clone(), src.fresh_var(&x))).collect();
    let fa = |a: &Atom| amap[a].clone();
    let fv = |x: &VarName| vmap[x].clone();
    (
        delta.rename(&fa, &fv),
        terms.iter().map(|t| t.rename(&fa, &fv)).collect(),
    )
}

/// Matching-based closedness check.
pub fn check_closed_term(delta: &FreshCtx, t: &Term) -> bool {
    let mut src = FreshNameSource::new();
    let (nabla_hat, ts) = freshen_ctx_term(delta, &[t], &mut src);
    let t_hat = &ts[0];
    // entries on variables absent from the term hold for any choice of θ there
    let present = t_hat.vars();
    let nabla_hat = FreshCtx::from_pairs(nabla_hat.iter().filter(|(_, x)| present.contains(x)).cloned());
    let mut hat_atoms = nabla_hat.atoms();
    hat_atoms.extend(t_hat.atoms());
    let mut vs = delta.vars();
    vs.extend(t.vars());
    let mut ambient = delta.clone();
    for a in &hat_atoms {
        for x in &vs {
            ambient.insert(a.clone(), x.clone());
        }
    }
    nominal_match(&ambient, &nabla_hat, t_hat, t).is_some()
}

pub fn check_closed_rule(r: &NominalRule) -> bool {
    check_closed_term(&r.ctx, &r.as_pair())
}

/// Which closedness condition fails, and where.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ClosednessViolation {
    UnabstractedAtom { atom: Atom, at: Position },
    NonUniformCapture { var: VarName, atom: Atom, at: Position, other: Position },
    UncapturedDifference { var: VarName, atom: Atom, at: Position, other: Position },
}

impl std::fmt::Display for ClosednessViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ClosednessViolation::UnabstractedAtom { atom, at } => {
                write!(f, "unabstracted atom {atom} at {at}")
            }
            ClosednessViolation::NonUniformCapture { var, atom, at, other } => write!(
                f,
                "{atom} is captured in the occurrence of {var} at {at} but not at {other}, and {atom}#{var} is missing"
            ),
            ClosednessViolation::UncapturedDifference { var, atom, at, other } => write!(
                f,
                "occurrences of {var} at {at} and {other} differ on {atom}, which is not abstracted in both, and {atom}#{var} is missing"
            ),
        }
    }
}

struct VarOcc {
    var: VarName,
    perm: Permutation,
    binders: BTreeSet<Atom>,
    at: Position,
}

/// Direct check of the three closedness conditions; `None` means closed.
pub fn closedness_violation(delta: &FreshCtx, t: &Term) -> Option<ClosednessViolation> {
    let mut occs = Vec::new();
    let mut free = None;
    scan(t, &mut Vec::new(), &mut Vec::new(), &mut occs, &mut free);
    if let Some(v) = free {
        return Some(v);
    }
    for o1 in &occs {
        let inv = o1.perm.inverse();
        for b in &o1.binders {
            let a = inv.apply(b);
            for o2 in occs.iter().filter(|o| o.var == o1.var) {
                if !o2.binders.contains(&o2.perm.apply(&a)) && !delta.contains(&a, &o1.var) {
                    return Some(ClosednessViolation::NonUniformCapture {
                        var: o1.var.clone(),
                        atom: a,
                        at: o1.at.clone(),
                        other: o2.at.clone(),
                    });
                }
            }
        }
    }
    for (i, o1) in occs.iter().enumerate() {
        for o2 in occs[i..].iter().filter(|o| o.var == o1.var) {
            for a in ds(&o1.perm, &o2.perm) {
                let captured = o1.binders.contains(&o1.perm.apply(&a))
                    && o2.binders.contains(&o2.perm.apply(&a));
                if !captured && !delta.contains(&a, &o1.var) {
                    return Some(ClosednessViolation::UncapturedDifference {
                        var: o1.var.clone(),
                        atom: a,
                        at: o1.at.clone(),
                        other: o2.at.clone(),
                    });
                }
            }
        }
    }
    None
}

fn scan(
    t: &Term,
    bound: &mut Vec<Atom>,
    path: &mut Vec<usize>,
    occs: &mut Vec<VarOcc>,
    free: &mut Option<ClosednessViolation>,
) {
    match t {
        Term::Atom(a) => {
            if !bound.contains(a) && free.is_none() {
                *free = Some(ClosednessViolation::UnabstractedAtom {
                    atom: a.clone(),
                    at: Position(path.clone()),
                });
            }
        }
        Term::Susp(p, x) => occs.push(VarOcc {
            var: x.clone(),
            perm: p.clone(),
            binders: bound.iter().cloned().collect(),
            at: Position(path.clone()),
        }),
        Term::Abs(a, b) => {
            bound.push(a.clone());
            path.push(1);
            scan(b, bound, path, occs, free);
            path.pop();
            bound.pop();
        }
        Term::App(_, b) => {
            path.push(1);
            scan(b, bound, path, occs, free);
            path.pop();
        }
        Term::Tuple(ts) => {
            for (i, c) in ts.iter().enumerate() {
                path.push(i + 1);
                scan(c, bound, path, occs, free);
                path.pop();
            }
        }
    }
}

pub fn check_closed_oracle(delta: &FreshCtx, t: &Term) -> bool {
    closedness_violation(delta, t).is_none()
}

/// Renames all atoms and variables of `r` to names outside `avoid` and the rule's own names.
pub fn freshen_rule(r: &NominalRule, avoid: &BTreeSet<String>, src: &mut FreshNameSource) -> NominalRule {
    src.reserve_all(avoid.iter().cloned());
    let (ctx, ts) = freshen_ctx_term(&r.ctx, &[&r.lhs, &r.rhs], src);
    let mut ts = ts.into_iter();
    NominalRule {
        name: r.name.clone(),
        ctx,
        lhs: ts.next().unwrap(),
        rhs: ts.next().unwrap(),
    }
}

/// One step with `r` used verbatim. Returns the position rewritten and the result.
pub fn rewrite_step_at(
    delta: &FreshCtx,
    s: &Term,
    r: &NominalRule,
    p: Option<&Position>,
) -> Option<(Position, Term)> {
    let try_at = |pos: &Position| -> Option<(Position, Term)> {
        let sub = s.subterm_at(pos).ok()?;
        let theta = nominal_match(delta, &r.ctx, &r.lhs, sub)?;
        let out = s.replace_at(pos, r.rhs.subst(&theta)).ok()?;
        Some((pos.clone(), out))
    };
    match p {
        Some(pos) => try_at(pos),
        None => s.positions().iter().find_map(try_at),
    }
}

pub fn rewrite_step(delta: &FreshCtx, s: &Term, r: &NominalRule, p: Option<&Position>) -> Option<Term> {
    rewrite_step_at(delta, s, r, p).map(|(_, t)| t)
}

/// Freshened copy of `r` for `Δ ⊢ s` together with the extended context Δ, A(R̂)#V(Δ,s).
pub fn closed_instance(
    delta: &FreshCtx,
    s: &Term,
    r: &NominalRule,
    src: &mut FreshNameSource,
) -> (NominalRule, FreshCtx) {
    let avoid = ctx_term_names(delta, s);
    let hat = freshen_rule(r, &avoid, src);
    let mut vs = delta.vars();
    vs.extend(s.vars());
    let mut ext = delta.clone();
    for a in hat.atoms() {
        for x in &vs {
            ext.insert(a.clone(), x.clone());
        }
    }
    (hat, ext)
}

pub fn closed_rewrite_step_at(
    delta: &FreshCtx,
    s: &Term,
    r: &NominalRule,
    p: Option<&Position>,
    src: &mut FreshNameSource,
) -> Option<(Position, Term)> {
    let (hat, ext) = closed_instance(delta, s, r, src);
    rewrite_step_at(&ext, s, &hat, p)
}

pub fn closed_rewrite_step(
    delta: &FreshCtx,
    s: &Term,
    r: &NominalRule,
    p: Option<&Position>,
    src: &mut FreshNameSource,
) -> Option<Term> {
    closed_rewrite_step_at(delta, s, r, p, src).map(|(_, t)| t)
}

/// First leftmost-outermost closed step over `rules`: (rule index, position, result).
pub fn closed_step_any(
    delta: &FreshCtx,
    s: &Term,
    rules: &[NominalRule],
    src: &mut FreshNameSource,
) -> Option<(usize, Position, Term)> {
    let inst: Vec<(NominalRule, FreshCtx)> =
        rules.iter().map(|r| closed_instance(delta, s, r, src)).collect();
    for pos in s.positions() {
        for (i, (hat, ext)) in inst.iter().enumerate() {
            if let Some((p, t)) = rewrite_step_at(ext, s, hat, Some(&pos)) {
                return Some((i, p, t));
            }
        }
    }
    None
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub rule: String,
    pub at: Position,
    pub term: Term,
}

#[derive(Clone, Debug)]
pub struct Normalized {
    pub term: Term,
    pub steps: usize,
    /// False when the budget ran out before a normal form was reached.
    pub normal: bool,
    pub trace: Vec<TraceStep>,
}

pub fn normalize(delta: &FreshCtx, s: &Term, rules: &[NominalRule], max_steps: usize) -> Normalized {
    let mut src = FreshNameSource::new();
    let mut cur = s.clone();
    let mut trace = Vec::new();
    for _ in 0..max_steps {
        match closed_step_any(delta, &cur, rules, &mut src) {
            Some((i, at, t)) => {
                trace.push(TraceStep { rule: rules[i].name.clone(), at, term: t.clone() });
                cur = t;
            }
            None => {
                return Normalized { term: cur, steps: trace.len(), normal: true, trace };
            }
        }
    }
    let normal = closed_step_any(delta, &cur, rules, &mut src).is_none();
    Normalized { term: cur, steps: trace.len(), normal, trace }
}

/// Symbols and tuple widths for which substitution rules are generated.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SigmaSignature {
    pub symbols: BTreeSet<FunSym>,
    pub widths: BTreeSet<usize>,
}

impl SigmaSignature {
    /// Everything a term needs: its symbols (minus `sub`) and every tuple width it
    /// uses or its symbols imply.
    pub fn of_term(t: &Term) -> SigmaSignature {
        let mut sig = SigmaSignature::default();
        sig.add_term(t);
        sig
    }

    pub fn add_term(&mut self, t: &Term) {
        for f in t.symbols() {
            if !f.is_sub() {
                self.add_symbol(f);
            }
        }
        self.widths.extend(t.tuple_widths());
    }

    pub fn add_symbol(&mut self, f: FunSym) {
        if f.arity() != 1 {
            self.widths.insert(f.arity());
        }
        self.symbols.insert(f);
    }

    pub fn merge(&mut self, other: &SigmaSignature) {
        self.symbols.extend(other.symbols.iter().cloned());
        self.widths.extend(other.widths.iter().cloned());
    }
}

/// The explicit substitution rules: σ_var, σ_ε, σ_abs, one σ_f per symbol, one σ_prod per width.
pub fn explicit_subst_rules(sig: &SigmaSignature) -> Vec<NominalRule> {
    let a = Atom::new("a");
    let b = Atom::new("b");
    let x = || Term::var("X");
    let y = || Term::var("Y");
    let mut out = vec![
        NominalRule {
            name: "sigma_var".into(),
            ctx: FreshCtx::new(),
            lhs: Term::sub(&a, Term::Atom(a.clone()), x()),
            rhs: x(),
        },
        NominalRule {
            name: "sigma_eps".into(),
            ctx: FreshCtx::of(&[("a", "Y")]),
            lhs: Term::sub(&a, y(), x()),
            rhs: y(),
        },
        NominalRule {
            name: "sigma_abs".into(),
            ctx: FreshCtx::of(&[("b", "Y")]),
            lhs: Term::sub(&a, Term::Abs(b.clone(), Box::new(x())), y()),
            rhs: Term::Abs(b.clone(), Box::new(Term::sub(&a, x(), y()))),
        },
    ];
    for f in &sig.symbols {
        out.push(NominalRule {
            name: format!("sigma_{}", f.name()),
            ctx: FreshCtx::new(),
            lhs: Term::sub(&a, Term::App(f.clone(), Box::new(x())), y()),
            rhs: Term::App(f.clone(), Box::new(Term::sub(&a, x(), y()))),
        });
    }
    for &n in &sig.widths {
        let xs: Vec<Term> = (1..=n).map(|i| Term::var(&format!("X{i}"))).collect();
        out.push(NominalRule {
            name: format!("sigma_prod{n}"),
            ctx: FreshCtx::new(),
            lhs: Term::sub(&a, Term::Tuple(xs.clone()), y()),
            rhs: Term::Tuple(xs.into_iter().map(|xi| Term::sub(&a, xi, y())).collect()),
        });
    }
    out
}

/// Normal form under the explicit substitution rules.
pub fn nf_sigma(delta: &FreshCtx, t: &Term) -> Result<Term> {
    let rules = explicit_subst_rules(&SigmaSignature::of_term(t));
    let budget = 100_000;
    let n = normalize(delta, t, &rules, budget);
    if n.normal {
        Ok(n.term)
    } else {
        Err(Error::BudgetExhausted(budget))
    }
}
