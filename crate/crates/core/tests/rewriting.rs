use nomcrs_core::crs::{crs_alpha_eq, crs_normalize};
use nomcrs_core::rewrite::{closed_rewrite_step, explicit_subst_rules, nf_sigma, normalize, SigmaSignature};
use nomcrs_core::syntax::{parse_crs, parse_crs_term, parse_nrs, parse_nrs_term, print_term, Sig};
use nomcrs_core::{derive_alpha, FreshCtx, FreshNameSource};

#[test]
fn prenex_normal_form() {
    let file = parse_nrs(
        "sig and/2 forall/1 exists/1 not/1.
         a#P |- and(P, forall([a]Q)) -> forall([a]and(P, Q))
         not(forall([a]Q)) -> exists([a]not(Q))
         not(exists([a]Q)) -> forall([a]not(Q))",
    )
    .unwrap();
    let mut sig = file.sig.clone();
    let (_, t) = parse_nrs_term("and(f(c), not(exists([a]g(a))))", &mut sig).unwrap();
    let n = normalize(&FreshCtx::new(), &t, &file.nrs_rules(), 100);
    assert!(n.normal);
    assert_eq!(n.steps, 2);
    let (_, want) = parse_nrs_term("forall([b]and(f(c), not(g(b))))", &mut sig).unwrap();
    assert!(derive_alpha(&FreshCtx::new(), &n.term, &want), "{}", print_term(&n.term));
}

#[test]
fn closed_rewriting_avoids_capture() {
    let file = parse_nrs("a#P |- and(P, forall([a]Q)) -> forall([a]and(P, Q))").unwrap();
    let r = &file.nrs_rules()[0];
    let mut sig = file.sig.clone();
    let (_, t) = parse_nrs_term("and(f(a), forall([a]g(a)))", &mut sig).unwrap();
    let out = closed_rewrite_step(&FreshCtx::new(), &t, r, None, &mut FreshNameSource::new()).unwrap();
    let (_, want) = parse_nrs_term("forall([b]and(f(a), g(b)))", &mut sig).unwrap();
    assert!(derive_alpha(&FreshCtx::new(), &out, &want), "{}", print_term(&out));
}

#[test]
fn sigma_rules_substitute() {
    let mut sig = Sig::new();
    let (_, t) = parse_nrs_term("f(a, [b]g(a, b))[a -> b]", &mut sig).unwrap();
    let nf = nf_sigma(&FreshCtx::new(), &t).unwrap();
    let (_, want) = parse_nrs_term("f(b, [c]g(b, c))", &mut sig).unwrap();
    assert!(derive_alpha(&FreshCtx::new(), &nf, &want), "{}", print_term(&nf));
    let rules = explicit_subst_rules(&SigmaSignature::of_term(&t));
    assert!(rules.iter().any(|r| r.name == "sigma_abs"));
}

#[test]
fn crs_beta_normalizes() {
    let file = parse_crs("beta: app(lam([a]Z(a)), Z') => Z(Z')").unwrap();
    let mut sig = file.sig.clone();
    let t = parse_crs_term("app(lam([x]app(lam([y]f(x, y)), x)), c)", &mut sig).unwrap();
    let n = crs_normalize(&t, &file.crs_rules(), 10);
    assert!(n.normal);
    assert_eq!(n.trace.len(), 2);
    assert!(crs_alpha_eq(&n.term, &parse_crs_term("f(c, c)", &mut sig).unwrap()));
}
