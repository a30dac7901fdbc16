use std::collections::{BTreeMap, BTreeSet};

use crate::crs::{barendregt_rename_rule, check_crs_rule, CrsRule, MetaTerm, MetaVar, Valuation};
use crate::error::{Error, Result};
use crate::fresh::FreshNameSource;
use crate::names::{Atom, VarName};
use crate::nominal::{FreshCtx, Subst, Term};
use crate::perm::{cycle_to_swappings, Permutation};
use crate::rewrite::{check_closed_rule, closedness_violation, NominalRule, SigmaSignature};

/// Φ: argument list of the leftmost meta-application of each meta-variable.
pub type PhiMap = BTreeMap<MetaVar, Vec<Atom>>;

fn var_args(z: &MetaVar, args: &[MetaTerm]) -> Result<Vec<Atom>> {
    let mut out = Vec::new();
    for a in args {
        match a {
            MetaTerm::Var(x) if !out.contains(x) => out.push(x.clone()),
            MetaTerm::Var(x) => {
                return Err(Error::Precondition(format!("{}: arguments must be pairwise-distinct, {x} repeats", z.name)))
            }
            _ => return Err(Error::Precondition(format!("{}: arguments must be variables", z.name))),
        }
    }
    Ok(out)
}

pub fn phi(t: &MetaTerm) -> Result<PhiMap> {
    let mut out = PhiMap::new();
    let mut err = None;
    t.visit(&mut |s| {
        if let MetaTerm::MApp(z, args) = s {
            if err.is_none() && !out.contains_key(z) {
                match var_args(z, args) {
                    Ok(xs) => {
                        out.insert(z.clone(), xs);
                    }
                    Err(e) => err = Some(e),
                }
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(out),
    }
}

/// A list of swappings taking each `s[i]` to `t[i]`.
pub fn psi(s: &[Atom], t: &[Atom]) -> Result<Permutation> {
    if s.len() != t.len() {
        return Err(Error::LengthMismatch(s.len(), t.len()));
    }
    for list in [s, t] {
        let mut seen = BTreeSet::new();
        for a in list {
            if !seen.insert(a) {
                return Err(Error::DuplicateAtom(a.to_string()));
            }
        }
    }
    let mut f: Vec<(Atom, Atom)> = s.iter().cloned().zip(t.iter().cloned()).collect();
    let mut out = Permutation::id();
    while let Some((start, _)) = f.first().cloned() {
        let fwd = |a: &Atom| f.iter().find(|(x, _)| x == a).map(|(_, y)| y.clone());
        let back = |a: &Atom| f.iter().find(|(_, y)| y == a).map(|(x, _)| x.clone());
        let mut chain = vec![start.clone()];
        let mut is_cycle = false;
        let mut cur = start.clone();
        while let Some(next) = fwd(&cur) {
            if next == start {
                is_cycle = true;
                break;
            }
            chain.push(next.clone());
            cur = next;
        }
        if !is_cycle {
            let mut cur = start.clone();
            while let Some(prev) = back(&cur) {
                chain.insert(0, prev.clone());
                cur = prev;
            }
        }
        out = out.compose(&cycle_to_swappings(&chain)?);
        f.retain(|(x, _)| !chain.contains(x));
    }
    Ok(out)
}

fn nominal_var(z: &MetaVar) -> VarName {
    z.name.clone()
}

/// `Left`: the rule's left-hand side as a nominal term with its freshness context.
pub fn left_translate(l: &MetaTerm) -> Result<(FreshCtx, Term)> {
    let phi_l = phi(l)?;
    let mut ctx = FreshCtx::new();
    let t = left_go(l, &phi_l, &mut Vec::new(), &mut ctx)?;
    Ok((ctx, t))
}

fn left_go(t: &MetaTerm, phi_l: &PhiMap, above: &mut Vec<Atom>, ctx: &mut FreshCtx) -> Result<Term> {
    Ok(match t {
        MetaTerm::Var(a) => Term::Atom(a.clone()),
        MetaTerm::MApp(z, args) => {
            let bs = var_args(z, args)?;
            let base = &phi_l[z];
            let x = nominal_var(z);
            for a in above.iter() {
                if !base.contains(a) {
                    ctx.insert(a.clone(), x.clone());
                }
            }
            Term::Susp(psi(base, &bs)?, x)
        }
        MetaTerm::Abs(a, b) => {
            above.push(a.clone());
            let body = left_go(b, phi_l, above, ctx);
            above.pop();
            Term::Abs(a.clone(), Box::new(body?))
        }
        MetaTerm::App(f, b) => Term::App(f.clone(), Box::new(left_go(b, phi_l, above, ctx)?)),
        MetaTerm::Tuple(ts) => Term::Tuple(ts.iter().map(|c| left_go(c, phi_l, above, ctx)).collect::<Result<_>>()?),
    })
}

/// `Right`: the rule's right-hand side relative to the left-hand side's Φ. Non-variable
/// (or repeated) arguments become explicit substitutions.
pub fn right_translate(r: &MetaTerm, phi_l: &PhiMap) -> Result<(FreshCtx, Term)> {
    let mut ctx = FreshCtx::new();
    let t = right_go(r, phi_l, &mut Vec::new(), &mut ctx)?;
    Ok((ctx, t))
}

fn right_go(t: &MetaTerm, phi_l: &PhiMap, above: &mut Vec<Atom>, ctx: &mut FreshCtx) -> Result<Term> {
    Ok(match t {
        MetaTerm::Var(a) => Term::Atom(a.clone()),
        MetaTerm::MApp(z, args) => {
            let base = phi_l.get(z).ok_or_else(|| Error::UnboundMetaVar(z.to_string()))?;
            let x = nominal_var(z);
            for a in above.iter() {
                ctx.insert(a.clone(), x.clone());
            }
            let mut swaps = Vec::new();
            let mut seen = Vec::new();
            let mut subs = Vec::new();
            for (j, arg) in args.iter().enumerate() {
                match arg {
                    MetaTerm::Var(v) if !seen.contains(v) => {
                        seen.push(v.clone());
                        swaps.push((base[j].clone(), v.clone()));
                    }
                    _ => subs.push((base[j].clone(), arg)),
                }
            }
            let mut out = Term::Susp(Permutation::from_pairs(swaps), x);
            for (a, arg) in subs {
                out = Term::sub(&a, out, right_go(arg, phi_l, above, ctx)?);
            }
            out
        }
        MetaTerm::Abs(a, b) => {
            above.push(a.clone());
            let body = right_go(b, phi_l, above, ctx);
            above.pop();
            Term::Abs(a.clone(), Box::new(body?))
        }
        MetaTerm::App(f, b) => Term::App(f.clone(), Box::new(right_go(b, phi_l, above, ctx)?)),
        MetaTerm::Tuple(ts) => Term::Tuple(ts.iter().map(|c| right_go(c, phi_l, above, ctx)).collect::<Result<_>>()?),
    })
}

fn uses_sub(t: &Term) -> bool {
    t.symbols().iter().any(|f| f.is_sub())
}

/// CRS rule to closed nominal rule. When the right-hand side needs explicit
/// substitutions, also returns the signature for the σ-rules.
pub fn translate_crs_rule(r: &CrsRule) -> Result<(NominalRule, Option<SigmaSignature>)> {
    let bad = check_crs_rule(r);
    if !bad.is_empty() {
        let detail = bad.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; ");
        return Err(Error::InvalidRule { name: r.name.clone(), detail });
    }
    let renamed = barendregt_rename_rule(r, &mut FreshNameSource::new());
    let phi_l = phi(&renamed.lhs)?;
    let (dl, l) = left_translate(&renamed.lhs)?;
    let (dr, rt) = right_translate(&renamed.rhs, &phi_l)?;
    let out = NominalRule::new(&r.name, dl.union(&dr), l, rt)?;
    if !check_closed_rule(&out) {
        let locus = closedness_violation(&out.ctx, &out.as_pair())
            .map(|v| v.to_string())
            .unwrap_or_else(|| "closedness check failed".into());
        return Err(Error::NotClosed(format!("{}: {locus}", r.name)));
    }
    let sig = if uses_sub(&out.rhs) {
        let mut sig = SigmaSignature::of_term(&out.lhs);
        sig.add_term(&out.rhs);
        Some(sig)
    } else {
        None
    };
    Ok((out, sig))
}

/// ⟨σ⟩_Φ: each substitute body with its binders swapped onto Φ(Z).
pub fn translate_valuation(sigma: &Valuation, phi_t: &PhiMap) -> Result<Subst> {
    let mut out = Subst::new();
    for (z, sub) in sigma {
        let base = phi_t
            .get(z)
            .ok_or_else(|| Error::Precondition(format!("{z} has no leftmost occurrence")))?;
        if base.len() != sub.binders.len() {
            return Err(Error::ArityMismatch {
                name: z.name.to_string(),
                expected: base.len(),
                found: sub.binders.len(),
            });
        }
        let mut body = sub.body.to_nominal()?;
        let mut binders = sub.binders.clone();
        let clash = binders.iter().zip(base).any(|(b, a)| b != a && base.contains(b));
        if clash {
            let mut src = FreshNameSource::new();
            src.reserve_all(body.atoms_mentioned().iter().map(|a| a.name().to_string()));
            src.reserve_all(base.iter().chain(&binders).map(|a| a.name().to_string()));
            let fresh: Vec<Atom> = binders.iter().map(|b| src.fresh_atom(b)).collect();
            body = body.perm_act(&Permutation::from_pairs(fresh.iter().cloned().zip(binders.iter().cloned())));
            binders = fresh;
        }
        let pi = Permutation::from_pairs(binders.into_iter().zip(base.iter().cloned()).rev());
        out.insert(nominal_var(z), body.perm_act(&pi));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crs::Substitute;
    use crate::rewrite::check_closed_term;

    fn at(s: &str) -> Atom {
        Atom::new(s)
    }

    fn atoms(xs: &[&str]) -> Vec<Atom> {
        xs.iter().map(|a| at(a)).collect()
    }

    fn v(s: &str) -> MetaTerm {
        MetaTerm::var(s)
    }

    fn perm(pairs: &[(&str, &str)]) -> Permutation {
        Permutation::from_pairs(pairs.iter().map(|(a, b)| (at(a), at(b))))
    }

    fn exotic() -> MetaTerm {
        MetaTerm::abs(
            "c",
            MetaTerm::Tuple(vec![
                MetaTerm::abs("a", MetaTerm::abs("b", MetaTerm::mvars("Z", &["a", "b", "c"]))),
                MetaTerm::abs("x", MetaTerm::abs("y", MetaTerm::mvars("Z", &["x", "c", "y"]))),
            ]),
        )
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi(&exotic()).unwrap()[&MetaVar::new("Z", 3)], atoms(&["a", "b", "c"]));
        assert_eq!(phi(&MetaTerm::mvars("Z", &[])).unwrap()[&MetaVar::new("Z", 0)], vec![]);
        let t = MetaTerm::app("f", vec![MetaTerm::abs("a", MetaTerm::mvars("X", &["a"])), MetaTerm::abs("b", MetaTerm::mvars("X", &["b"]))]);
        assert_eq!(phi(&t).unwrap()[&MetaVar::new("X", 1)], atoms(&["a"]));
        assert!(phi(&MetaTerm::abs("a", MetaTerm::mvars("Z", &["a", "a"]))).is_err());
    }

    #[test]
    fn psi_examples() {
        let p = psi(&atoms(&["a", "b", "c"]), &atoms(&["x", "c", "y"])).unwrap();
        assert_eq!(p.to_string(), "(a x)(b y)(b c)");
        assert!(psi(&[], &[]).unwrap().is_empty());
        assert_eq!(psi(&atoms(&["a", "b"]), &atoms(&["b", "a"])).unwrap(), perm(&[("a", "b")]));
        assert_eq!(psi(&atoms(&["b", "c"]), &atoms(&["c", "y"])).unwrap().to_string(), "(b y)(b c)");
        let q = psi(&atoms(&["b", "a"]), &atoms(&["c", "b"])).unwrap();
        assert_eq!(q.apply(&at("b")), at("c"));
        assert_eq!(q.apply(&at("a")), at("b"));
        assert!(matches!(psi(&atoms(&["a"]), &[]), Err(Error::LengthMismatch(1, 0))));
        assert!(matches!(psi(&atoms(&["a", "a"]), &atoms(&["b", "c"])), Err(Error::DuplicateAtom(_))));
    }

    #[test]
    fn left_examples() {
        let t = MetaTerm::app("f", vec![MetaTerm::abs("a", MetaTerm::mvars("X", &[])), MetaTerm::abs("b", MetaTerm::mvars("X", &[]))]);
        let (ctx, l) = left_translate(&t).unwrap();
        assert_eq!(ctx, FreshCtx::of(&[("a", "X"), ("b", "X")]));
        assert_eq!(l, Term::app("f", vec![Term::abs("a", Term::var("X")), Term::abs("b", Term::var("X"))]));

        let t = MetaTerm::app("f", vec![MetaTerm::abs("a", MetaTerm::mvars("X", &["a"])), MetaTerm::abs("b", MetaTerm::mvars("X", &["b"]))]);
        let (ctx, l) = left_translate(&t).unwrap();
        assert_eq!(ctx, FreshCtx::of(&[("b", "X")]));
        assert_eq!(
            l,
            Term::app("f", vec![Term::abs("a", Term::var("X")), Term::abs("b", Term::susp(perm(&[("a", "b")]), "X"))])
        );
        assert!(check_closed_term(&ctx, &l));

        let (ctx, l) = left_translate(&exotic()).unwrap();
        assert_eq!(ctx, FreshCtx::of(&[("x", "Z"), ("y", "Z")]));
        let want_perm = perm(&[("b", "y"), ("b", "c"), ("a", "x")]);
        match &l {
            Term::Abs(_, body) => match body.as_ref() {
                Term::Tuple(ts) => match &ts[1] {
                    Term::Abs(_, b) => match b.as_ref() {
                        Term::Abs(_, s) => match s.as_ref() {
                            Term::Susp(p, _) => assert!(p.same_action(&want_perm)),
                            other => panic!("{other:?}"),
                        },
                        other => panic!("{other:?}"),
                    },
                    other => panic!("{other:?}"),
                },
                other => panic!("{other:?}"),
            },
            other => panic!("{other:?}"),
        }
        assert!(check_closed_term(&ctx, &l));
    }

    fn beta() -> CrsRule {
        CrsRule::new(
            "beta",
            MetaTerm::app("app", vec![MetaTerm::app("lam", vec![MetaTerm::abs("a", MetaTerm::mvars("Z", &["a"]))]), MetaTerm::mvars("Z'", &[])]),
            MetaTerm::mapp("Z", vec![MetaTerm::mvars("Z'", &[])]),
        )
    }

    #[test]
    fn beta_rule() {
        let (r, sig) = translate_crs_rule(&beta()).unwrap();
        assert!(r.ctx.is_empty());
        assert_eq!(r.lhs, Term::app("app", vec![Term::app("lam", vec![Term::abs("a", Term::var("Z"))]), Term::var("Z'")]));
        assert_eq!(r.rhs, Term::sub(&at("a"), Term::var("Z"), Term::var("Z'")));
        let sig = sig.unwrap();
        assert!(sig.widths.contains(&2));
        assert!(sig.symbols.iter().all(|f| !f.is_sub()));
    }

    #[test]
    fn diff_rule() {
        let lhs = MetaTerm::app("diff", vec![MetaTerm::abs("a", MetaTerm::app("sin", vec![MetaTerm::mvars("Z", &["a"])]))]);
        let rhs = MetaTerm::abs(
            "b",
            MetaTerm::app(
                "mult",
                vec![
                    MetaTerm::app("app", vec![MetaTerm::app("diff", vec![MetaTerm::abs("c", MetaTerm::mvars("Z", &["c"]))]), v("b")]),
                    MetaTerm::app("cos", vec![MetaTerm::mvars("Z", &["b"])]),
                ],
            ),
        );
        let (r, sig) = translate_crs_rule(&CrsRule::new("diff", lhs, rhs)).unwrap();
        assert!(sig.is_none());
        assert_eq!(r.ctx, FreshCtx::of(&[("b", "Z"), ("c", "Z")]));
        let want = Term::abs(
            "b",
            Term::app(
                "mult",
                vec![
                    Term::app("app", vec![Term::app("diff", vec![Term::abs("c", Term::susp(perm(&[("a", "c")]), "Z"))]), Term::atom("b")]),
                    Term::app("cos", vec![Term::susp(perm(&[("a", "b")]), "Z")]),
                ],
            ),
        );
        assert_eq!(r.rhs, want);
    }

    #[test]
    fn beta_lam_rule() {
        let lhs = MetaTerm::app(
            "app",
            vec![MetaTerm::app("lam", vec![MetaTerm::abs("a", MetaTerm::app("lam", vec![MetaTerm::abs("b", MetaTerm::mvars("X", &["a", "b"]))]))]), MetaTerm::mvars("Y", &[])],
        );
        let rhs = MetaTerm::app(
            "lam",
            vec![MetaTerm::abs("d", MetaTerm::app("app", vec![MetaTerm::app("lam", vec![MetaTerm::abs("c", MetaTerm::mvars("X", &["c", "d"]))]), MetaTerm::mvars("Y", &[])]))],
        );
        let (r, _) = translate_crs_rule(&CrsRule::new("beta_lam", lhs, rhs)).unwrap();
        assert_eq!(r.ctx, FreshCtx::of(&[("c", "X"), ("d", "X"), ("d", "Y")]));
        let want = Term::app(
            "lam",
            vec![Term::abs(
                "d",
                Term::app("app", vec![Term::app("lam", vec![Term::abs("c", Term::susp(perm(&[("a", "c"), ("b", "d")]), "X"))]), Term::var("Y")]),
            )],
        );
        assert_eq!(r.rhs, want);
    }

    #[test]
    fn prenex_rules() {
        let lhs = MetaTerm::app("and", vec![MetaTerm::mvars("P", &[]), MetaTerm::app("forall", vec![MetaTerm::abs("a", MetaTerm::mvars("Q", &["a"]))])]);
        let rhs = MetaTerm::app("forall", vec![MetaTerm::abs("b", MetaTerm::app("and", vec![MetaTerm::mvars("P", &[]), MetaTerm::mvars("Q", &["b"])]))]);
        let (r, _) = translate_crs_rule(&CrsRule::new("r1", lhs, rhs)).unwrap();
        assert_eq!(r.ctx, FreshCtx::of(&[("b", "P"), ("b", "Q")]));
        assert_eq!(
            r.rhs,
            Term::app("forall", vec![Term::abs("b", Term::app("and", vec![Term::var("P"), Term::susp(perm(&[("a", "b")]), "Q")]))])
        );

        let lhs = MetaTerm::app("not", vec![MetaTerm::app("forall", vec![MetaTerm::abs("a", MetaTerm::mvars("Q", &["a"]))])]);
        let rhs = MetaTerm::app("exists", vec![MetaTerm::abs("b", MetaTerm::app("not", vec![MetaTerm::mvars("Q", &["b"])]))]);
        let (r, _) = translate_crs_rule(&CrsRule::new("r10", lhs, rhs)).unwrap();
        assert_eq!(r.ctx, FreshCtx::of(&[("b", "Q")]));
        assert_eq!(r.lhs, Term::app("not", vec![Term::app("forall", vec![Term::abs("a", Term::var("Q"))])]));
        assert_eq!(
            r.rhs,
            Term::app("exists", vec![Term::abs("b", Term::app("not", vec![Term::susp(perm(&[("a", "b")]), "Q")]))])
        );
    }

    #[test]
    fn invalid_rule_rejected() {
        let bad = CrsRule::new(
            "bad",
            MetaTerm::app("f", vec![MetaTerm::abs("a", MetaTerm::mvars("Z", &["a", "a"]))]),
            MetaTerm::mvars("Z", &["a", "a"]),
        );
        match translate_crs_rule(&bad) {
            Err(Error::InvalidRule { detail, .. }) => assert!(detail.contains("pairwise-distinct")),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn valuation_examples() {
        let z = MetaVar::new("Z", 3);
        let phi_t: PhiMap = [(z.clone(), atoms(&["a", "b", "c"]))].into();
        let body = MetaTerm::app("g", vec![v("d"), v("e"), v("f"), v("z")]);
        let sigma: Valuation = [(z.clone(), Substitute::new(atoms(&["d", "e", "f"]), body).unwrap())].into();
        let out = translate_valuation(&sigma, &phi_t).unwrap();
        assert_eq!(
            out[&VarName::new("Z")],
            Term::app("g", vec![Term::atom("a"), Term::atom("b"), Term::atom("c"), Term::atom("z")])
        );

        let z0 = MetaVar::new("W", 0);
        let phi0: PhiMap = [(z0.clone(), vec![])].into();
        let s0: Valuation = [(z0, Substitute::new(vec![], v("k")).unwrap())].into();
        assert_eq!(translate_valuation(&s0, &phi0).unwrap()[&VarName::new("W")], Term::atom("k"));

        let same: Valuation = [(z.clone(), Substitute::new(atoms(&["a", "b", "c"]), MetaTerm::app("h", vec![v("c"), v("a")])).unwrap())].into();
        assert_eq!(
            translate_valuation(&same, &phi_t).unwrap()[&VarName::new("Z")],
            Term::app("h", vec![Term::atom("c"), Term::atom("a")])
        );

        let z2 = MetaVar::new("Y", 2);
        let phi2: PhiMap = [(z2.clone(), atoms(&["a", "b"]))].into();
        let crossed: Valuation = [(z2.clone(), Substitute::new(atoms(&["b", "a"]), MetaTerm::app("g", vec![v("b"), v("a")])).unwrap())].into();
        assert_eq!(
            translate_valuation(&crossed, &phi2).unwrap()[&VarName::new("Y")],
            Term::app("g", vec![Term::atom("a"), Term::atom("b")])
        );

        let short: Valuation = [(z, Substitute::new(atoms(&["d"]), v("d")).unwrap())].into();
        assert!(matches!(translate_valuation(&short, &phi_t), Err(Error::ArityMismatch { .. })));
    }
}
