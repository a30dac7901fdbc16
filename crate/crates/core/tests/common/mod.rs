//! Generators and randomized checks shared by the property tests and the acceptance
//! runner. Every check runs 500 cases from a fixed seed.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use nomcrs_core::crs::{barendregt_rename, capture_avoiding_subst, MetaTerm, MetaVar};
use nomcrs_core::crs_to_nrs::{left_translate, psi};
use nomcrs_core::nrs_to_crs::{arg_lists, lambda_map, translate_term};
use nomcrs_core::rewrite::{check_closed_oracle, check_closed_term, nf_sigma};
use nomcrs_core::{derive_alpha, Atom, FreshCtx, FreshNameSource, FunSym, Permutation, Term, VarName};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

pub const CASES: u32 = 500;
pub const SEED: [u8; 32] = *b"nomcrs-property-seed-0123456789!";

pub fn run<S: Strategy>(
    name: &str,
    strat: S,
    test: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    let config = Config { cases: CASES, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::from_seed(RngAlgorithm::ChaCha, &SEED));
    runner.run(&strat, test).map_err(|e| format!("{name}: {e}"))
}

const ATOMS: [&str; 6] = ["a", "b", "c", "d", "e", "f"];
const VARS: [&str; 2] = ["X", "Y"];

pub fn atom() -> impl Strategy<Value = Atom> {
    prop::sample::select(&ATOMS[..]).prop_map(Atom::new)
}

pub fn var() -> impl Strategy<Value = VarName> {
    prop::sample::select(&VARS[..]).prop_map(VarName::new)
}

pub fn perm() -> impl Strategy<Value = Permutation> {
    prop::collection::vec((atom(), atom()), 0..4).prop_map(Permutation::from_pairs)
}

pub fn ctx() -> impl Strategy<Value = FreshCtx> {
    prop::collection::vec((atom(), var()), 0..5).prop_map(FreshCtx::from_pairs)
}

fn leaf(ground: bool) -> BoxedStrategy<Term> {
    if ground {
        prop_oneof![3 => atom().prop_map(Term::Atom), 1 => Just(Term::app("k", vec![]))].boxed()
    } else {
        prop_oneof![
            3 => atom().prop_map(Term::Atom),
            1 => Just(Term::app("k", vec![])),
            3 => (perm(), var()).prop_map(|(p, x)| Term::Susp(p, x)),
        ]
        .boxed()
    }
}

/// Nominal terms over `f/2`, `g/1`, `k/0`, pairs and abstractions.
pub fn term(depth: u32, ground: bool) -> BoxedStrategy<Term> {
    leaf(ground)
        .prop_recursive(depth, 24, 2, |inner| {
            prop_oneof![
                3 => (atom(), inner.clone()).prop_map(|(a, t)| Term::Abs(a, Box::new(t))),
                2 => (inner.clone(), inner.clone()).prop_map(|(s, t)| Term::app("f", vec![s, t])),
                1 => inner.clone().prop_map(|t| Term::app("g", vec![t])),
                1 => (inner.clone(), inner).prop_map(|(s, t)| Term::Tuple(vec![s, t])),
            ]
        })
        .boxed()
}

/// Builds a closed CRS meta-term from a stream of choices: meta-variables `Z0`, `Z1`,
/// `Z2` (arities 0, 1, 2) applied to distinct bound variables.
pub fn build_meta(choices: &[u8]) -> MetaTerm {
    let mut it = choices.iter().copied().chain(std::iter::repeat(0));
    fn go(it: &mut impl Iterator<Item = u8>, env: &mut Vec<Atom>, depth: u32) -> MetaTerm {
        let c = it.next().unwrap();
        let kind = if depth == 0 { c % 3 } else { c % 7 };
        match kind {
            0 if !env.is_empty() => MetaTerm::Var(env[it.next().unwrap() as usize % env.len()].clone()),
            1 | 2 => {
                let n = (it.next().unwrap() % 3) as usize;
                if env.iter().collect::<BTreeSet<_>>().len() < n {
                    return MetaTerm::mapp("Z0", vec![]);
                }
                let mut pool: Vec<Atom> = env.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect();
                let mut args = Vec::new();
                for _ in 0..n {
                    let i = it.next().unwrap() as usize % pool.len();
                    args.push(MetaTerm::Var(pool.remove(i)));
                }
                MetaTerm::MApp(MetaVar::new(&format!("Z{n}"), n), args)
            }
            3 | 4 => {
                let a = Atom::new(ATOMS[it.next().unwrap() as usize % ATOMS.len()]);
                env.push(a.clone());
                let body = go(it, env, depth - 1);
                env.pop();
                MetaTerm::Abs(a, Box::new(body))
            }
            5 => {
                let s = go(it, env, depth - 1);
                let t = go(it, env, depth - 1);
                MetaTerm::app("f", vec![s, t])
            }
            6 => MetaTerm::app("g", vec![go(it, env, depth - 1)]),
            _ => MetaTerm::app("k", vec![]),
        }
    }
    go(&mut it, &mut Vec::new(), 4)
}

pub fn closed_meta() -> impl Strategy<Value = MetaTerm> {
    prop::collection::vec(any::<u8>(), 0..48).prop_map(|cs| build_meta(&cs))
}

/// Closed nominal terms-in-context, obtained by translating closed meta-terms.
pub fn closed_nominal() -> impl Strategy<Value = (FreshCtx, Term)> {
    closed_meta().prop_map(|m| {
        let m = barendregt_rename(&m, &mut FreshNameSource::new());
        left_translate(&m).expect("generated meta-terms are valid left-hand sides")
    })
}

fn fresh_atoms(t: &Term, n: usize) -> Vec<Atom> {
    let used: BTreeSet<String> = t.atoms_mentioned().iter().map(|a| a.name().to_string()).collect();
    let mut src = FreshNameSource::with_reserved(used);
    (0..n).map(|_| src.fresh_atom(&Atom::new("n"))).collect()
}

/// Renames selected binders `[a]t` to `[n](a n)·t` with `n` new.
pub fn alpha_variant(t: &Term, picks: &[bool]) -> Term {
    let fresh = fresh_atoms(t, 64);
    let mut k = 0;
    fn go(t: &Term, picks: &[bool], fresh: &[Atom], k: &mut usize) -> Term {
        match t {
            Term::Abs(a, b) => {
                let i = *k;
                *k += 1;
                let body = go(b, picks, fresh, k);
                if picks.get(i).copied().unwrap_or(false) && i < fresh.len() {
                    let n = fresh[i].clone();
                    Term::Abs(n.clone(), Box::new(body.perm_act(&Permutation::swap(a, &n))))
                } else {
                    Term::Abs(a.clone(), Box::new(body))
                }
            }
            Term::App(f, b) => Term::App(f.clone(), Box::new(go(b, picks, fresh, k))),
            Term::Tuple(ts) => Term::Tuple(ts.iter().map(|c| go(c, picks, fresh, k)).collect()),
            other => other.clone(),
        }
    }
    go(t, picks, &fresh, &mut k)
}

/// `ctx` plus `n#X` for every atom of `extra` not already in `base` and every variable.
fn with_fresh_for_vars(ctx: &FreshCtx, terms: &[&Term]) -> FreshCtx {
    let mut out = ctx.clone();
    let mut vars = BTreeSet::new();
    let mut atoms = BTreeSet::new();
    for t in terms {
        vars.extend(t.vars());
        atoms.extend(t.atoms_mentioned());
    }
    for a in atoms.iter().filter(|a| a.name().starts_with('n')) {
        for x in &vars {
            out.insert(a.clone(), x.clone());
        }
    }
    out
}

pub fn prop_alpha_laws() -> Result<(), String> {
    let strat = (ctx(), term(4, false), prop::collection::vec(any::<bool>(), 8), prop::collection::vec(any::<bool>(), 8), term(3, false));
    run("alpha-equivalence laws", strat, |(ctx, s, p1, p2, other)| {
        let t = alpha_variant(&s, &p1);
        let u = alpha_variant(&t, &p2);
        let d = with_fresh_for_vars(&ctx, &[&s, &t, &u]);
        prop_assert!(derive_alpha(&d, &s, &s), "reflexivity");
        prop_assert!(derive_alpha(&d, &s, &t), "variant not equivalent");
        prop_assert!(derive_alpha(&d, &t, &s), "symmetry");
        prop_assert!(derive_alpha(&d, &t, &u));
        prop_assert!(derive_alpha(&d, &s, &u), "transitivity");
        prop_assert_eq!(derive_alpha(&d, &s, &other), derive_alpha(&d, &other, &s), "symmetry on arbitrary pairs");
        if derive_alpha(&d, &s, &other) {
            prop_assert!(derive_alpha(&d, &t, &other), "transitivity through a variant");
        }
        Ok(())
    })
}

pub fn prop_perm_laws() -> Result<(), String> {
    let strat = (perm(), perm(), term(3, false), atom());
    run("permutation laws", strat, |(p, q, t, a)| {
        let e = FreshCtx::new();
        prop_assert_eq!(p.inverse().apply(&p.apply(&a)), a.clone());
        prop_assert_eq!(p.compose(&p.inverse()).apply(&a), a.clone());
        prop_assert_eq!(p.compose(&q).apply(&a), p.apply(&q.apply(&a)));
        prop_assert_eq!(p.inverse().inverse(), p.clone());
        prop_assert_eq!(p.compose(&q).inverse(), q.inverse().compose(&p.inverse()));
        prop_assert!(derive_alpha(&e, &t.perm_act(&p).perm_act(&p.inverse()), &t));
        prop_assert!(derive_alpha(&e, &t.perm_act(&q).perm_act(&p), &t.perm_act(&p.compose(&q))));
        if t.is_ground() {
            prop_assert_eq!(t.perm_act(&q).perm_act(&p), t.perm_act(&p.compose(&q)));
        }
        Ok(())
    })
}

fn distinct_pair() -> impl Strategy<Value = (Vec<Atom>, Vec<Atom>)> {
    let pool: Vec<Atom> = "abcdefghijkl".chars().map(|c| Atom::new(&c.to_string())).collect();
    (0usize..=6).prop_flat_map(move |n| {
        (
            prop::sample::subsequence(pool.clone(), n).prop_shuffle(),
            prop::sample::subsequence(pool.clone(), n).prop_shuffle(),
        )
    })
}

pub fn prop_psi_mapping() -> Result<(), String> {
    run("psi maps each s[i] to t[i]", distinct_pair(), |(s, t)| {
        let p = psi(&s, &t).map_err(|e| TestCaseError::fail(e.to_string()))?;
        for (a, b) in s.iter().zip(&t) {
            prop_assert_eq!(&p.apply(a), b, "psi({:?}, {:?}) = {}", s, t, p);
        }
        Ok(())
    })
}

fn meta_closed_and_arities(m: &MetaTerm) -> Result<(), String> {
    if !m.free_vars().is_empty() {
        return Err(format!("free variables {:?}", m.free_vars()));
    }
    let mut arities: BTreeMap<VarName, usize> = BTreeMap::new();
    let mut bad = None;
    fn walk(m: &MetaTerm, env: &mut Vec<Atom>, arities: &mut BTreeMap<VarName, usize>, bad: &mut Option<String>) {
        match m {
            MetaTerm::MApp(z, args) => {
                if *arities.entry(z.name.clone()).or_insert(z.arity) != z.arity || args.len() != z.arity {
                    *bad = Some(format!("{} used with two arities", z.name));
                }
                let mut seen = BTreeSet::new();
                for a in args {
                    match a {
                        MetaTerm::Var(x) if env.contains(x) && seen.insert(x.clone()) => {}
                        _ => *bad = Some(format!("argument {a:?} of {} is not a distinct bound variable", z.name)),
                    }
                }
            }
            MetaTerm::Abs(a, b) => {
                env.push(a.clone());
                walk(b, env, arities, bad);
                env.pop();
            }
            _ => m.children().into_iter().for_each(|c| walk(c, env, arities, bad)),
        }
    }
    walk(m, &mut Vec::new(), &mut arities, &mut bad);
    bad.map_or(Ok(()), Err)
}

fn closed_or_ground() -> impl Strategy<Value = (FreshCtx, Term)> {
    prop_oneof![
        3 => closed_nominal(),
        1 => term(4, true).prop_filter("closed", |t| t.unabstracted_atoms().map(|s| s.is_empty()).unwrap_or(false))
            .prop_map(|t| (FreshCtx::new(), t)),
    ]
}

pub fn prop_translate_closed_arity() -> Result<(), String> {
    run("translation keeps closedness and arities", closed_or_ground(), |(ctx, t)| {
        prop_assert!(check_closed_term(&ctx, &t), "generator produced a non-closed term");
        let m = translate_term(&ctx, &t).map_err(|e| TestCaseError::fail(e.to_string()))?;
        meta_closed_and_arities(&m).map_err(TestCaseError::fail)?;
        for x in t.vars() {
            let n = m.metavars().iter().filter(|z| z.name == x).count();
            prop_assert_eq!(n, 1, "{} translated with several arities", x);
        }
        Ok(())
    })
}

pub fn prop_argument_base_uniform() -> Result<(), String> {
    run("argument base is the same at every occurrence", closed_nominal(), |(ctx, t)| {
        let lam = lambda_map(&t);
        let mut base: BTreeMap<VarName, Vec<Atom>> = BTreeMap::new();
        let mut ok = Ok(());
        t.visit(&mut |s| {
            if let Term::Susp(p, x) = s {
                let al = arg_lists(&ctx, &lam, p, x);
                let back: Vec<Atom> = al.xbar.iter().map(|a| p.inverse().apply(a)).collect();
                let first = base.entry(x.clone()).or_insert_with(|| back.clone());
                if *first != back {
                    ok = Err(TestCaseError::fail(format!("{x}: {first:?} vs {back:?}")));
                }
            }
        });
        ok
    })
}

pub fn prop_sigma_correct() -> Result<(), String> {
    let strat = (term(3, true), atom(), term(2, true));
    run("sigma normal forms are capture-avoiding substitution", strat, |(t, a, s)| {
        let e = FreshCtx::new();
        let nf = nf_sigma(&e, &Term::sub(&a, t.clone(), s.clone())).map_err(|e| TestCaseError::fail(e.to_string()))?;
        let mt = MetaTerm::from_ground(&t).unwrap();
        let ms = MetaTerm::from_ground(&s).unwrap();
        let pairs: BTreeMap<Atom, MetaTerm> = [(a.clone(), ms)].into();
        let want = capture_avoiding_subst(&mt, &pairs, &mut FreshNameSource::new()).to_nominal().unwrap();
        prop_assert!(
            derive_alpha(&e, &nf, &want),
            "nf = {:?}, expected {:?}",
            nf,
            want
        );
        prop_assert!(!nf.symbols().iter().any(FunSym::is_sub));
        Ok(())
    })
}

fn closedness_inputs() -> impl Strategy<Value = (FreshCtx, Term)> {
    prop_oneof![
        2 => (ctx(), term(4, false)),
        1 => closed_nominal(),
        1 => (closed_nominal(), any::<prop::sample::Index>()).prop_map(|((ctx, t), i)| {
            let pairs: Vec<_> = ctx.iter().cloned().collect();
            if pairs.is_empty() {
                return (ctx, t);
            }
            let drop = i.index(pairs.len());
            let kept = pairs.into_iter().enumerate().filter(|(j, _)| *j != drop).map(|(_, p)| p);
            (FreshCtx::from_pairs(kept), t)
        }),
    ]
}

pub fn prop_closedness_oracle() -> Result<(), String> {
    run("matching-based closedness agrees with the direct check", closedness_inputs(), |(ctx, t)| {
        prop_assert_eq!(check_closed_term(&ctx, &t), check_closed_oracle(&ctx, &t), "on {} |- {:?}", ctx, t);
        Ok(())
    })
}

pub fn all() -> Vec<(&'static str, fn() -> Result<(), String>)> {
    vec![
        ("alpha-equivalence laws", prop_alpha_laws),
        ("permutation laws", prop_perm_laws),
        ("psi mapping", prop_psi_mapping),
        ("translation closedness and arity", prop_translate_closed_arity),
        ("argument base uniformity", prop_argument_base_uniform),
        ("sigma correctness", prop_sigma_correct),
        ("closedness oracle", prop_closedness_oracle),
    ]
}
