//! Command implementations. Each returns an [`Outcome`] so the binary and the tests
//! share one code path.

use std::collections::BTreeMap;

use nomcrs_core::crs::{
    barendregt_rename_rule, capture_avoiding_subst, check_crs_rule, crs_alpha_eq, crs_normalize, crs_rewrite_step_at,
    crs_rule_alpha_eq, crs_step_any, CrsRule, MetaTerm,
};
use nomcrs_core::crs_to_nrs::translate_crs_rule;
use nomcrs_core::nrs_to_crs::{translate_rule, translate_term};
use nomcrs_core::rewrite::{
    check_closed_term, closed_rewrite_step_at, closed_step_any, closedness_violation, explicit_subst_rules, normalize,
    NominalRule, SigmaSignature,
};
use nomcrs_core::syntax::{
    parse_alpha_judgement, parse_crs, parse_crs_rule, parse_crs_term, parse_fresh_judgement, parse_nrs,
    parse_nrs_term, print_crs_rule, print_ctx_term, print_file, print_meta_term, print_term, Item, Sig,
    SpecFile,
};
use nomcrs_core::{derive_alpha, derive_fresh, Atom, Error, FreshCtx, FreshNameSource, Position, Term};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FALSE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_PRECONDITION: i32 = 3;

pub const DEFAULT_MAX_STEPS: usize = 10_000;

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn new(code: i32) -> Outcome {
        Outcome { code, ..Outcome::default() }
    }

    fn out(&mut self, line: impl AsRef<str>) {
        self.stdout.push_str(line.as_ref());
        self.stdout.push('\n');
    }

    fn err(&mut self, line: impl AsRef<str>) {
        self.stderr.push_str(line.as_ref());
        self.stderr.push('\n');
    }

    fn fail(code: i32, msg: impl AsRef<str>) -> Outcome {
        let mut o = Outcome::new(code);
        o.err(msg);
        o
    }
}

fn code_for(e: &Error) -> i32 {
    match e {
        Error::Syntax { .. } | Error::InvalidPosition(_) => EXIT_USAGE,
        _ => EXIT_PRECONDITION,
    }
}

fn from_error(e: Error) -> Outcome {
    Outcome::fail(code_for(&e), format!("error: {e}"))
}

/// The step budget, overridable with `NOMCRS_MAX_STEPS`.
pub fn max_steps() -> usize {
    std::env::var("NOMCRS_MAX_STEPS")
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_MAX_STEPS)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Direction {
    Nrs2Crs,
    Crs2Nrs,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum System {
    Nrs,
    Crs,
}

fn with_sig(items: Vec<Item>, sig: &Sig) -> SpecFile {
    let mut f = SpecFile::from_items(items);
    for (k, v) in sig {
        f.sig.entry(k.clone()).or_insert(*v);
    }
    f
}

pub fn translate(dir: Direction, input: &str, with_sigma: bool) -> Outcome {
    match dir {
        Direction::Nrs2Crs => translate_nrs2crs(input),
        Direction::Crs2Nrs => translate_crs2nrs(input, with_sigma),
    }
}

fn translate_nrs2crs(input: &str) -> Outcome {
    let file = match parse_nrs(input) {
        Ok(f) => f,
        Err(e) => return from_error(e),
    };
    let mut o = Outcome::new(EXIT_OK);
    let mut items = Vec::new();
    for it in &file.items {
        match it {
            Item::NrsRule(r) => match translate_rule(r) {
                Ok(c) => items.push(Item::CrsRule(c)),
                Err(e) => {
                    o.code = EXIT_PRECONDITION;
                    o.err(format!("rule {}: {e}", r.name));
                }
            },
            Item::Term { name, ctx, term } => match translate_term(ctx, term) {
                Ok(t) => items.push(Item::CrsTerm { name: name.clone(), term: t }),
                Err(e) => {
                    o.code = EXIT_PRECONDITION;
                    o.err(format!("term {name}: {e}"));
                }
            },
            _ => {}
        }
    }
    o.stdout = print_file(&with_sig(items, &file.sig));
    o
}

fn translate_crs2nrs(input: &str, with_sigma: bool) -> Outcome {
    let file = match parse_crs(input) {
        Ok(f) => f,
        Err(e) => return from_error(e),
    };
    let mut o = Outcome::new(EXIT_OK);
    let mut items = Vec::new();
    let mut sigma: Option<SigmaSignature> = None;
    for it in &file.items {
        match it {
            Item::CrsRule(r) => match translate_crs_rule(r) {
                Ok((n, sig)) => {
                    if let Some(s) = sig {
                        sigma.get_or_insert_with(SigmaSignature::default).merge(&s);
                    }
                    items.push(Item::NrsRule(n));
                }
                Err(e) => {
                    o.code = EXIT_PRECONDITION;
                    o.err(format!("rule {}: {e}", r.name));
                }
            },
            Item::CrsTerm { name, term } => match term.to_nominal() {
                Ok(t) => items.push(Item::Term { name: name.clone(), ctx: FreshCtx::new(), term: t }),
                Err(e) => {
                    o.code = EXIT_PRECONDITION;
                    o.err(format!("term {name}: {e}"));
                }
            },
            _ => {}
        }
    }
    if let Some(sig) = &sigma {
        if with_sigma {
            items.extend(explicit_subst_rules(sig).into_iter().map(Item::NrsRule));
        } else {
            o.err("note: translated rules use explicit substitution; pass --with-sigma to include the sigma rules");
        }
    }
    o.stdout = print_file(&with_sig(items, &file.sig));
    o
}

fn nrs_subject(file: &SpecFile, term: &str) -> Result<(FreshCtx, Term), Error> {
    if let Some((ctx, t)) = file.term(term) {
        return Ok((ctx.clone(), t.clone()));
    }
    parse_nrs_term(term, &mut file.sig.clone())
}

fn crs_subject(file: &SpecFile, term: &str) -> Result<MetaTerm, Error> {
    if let Some(t) = file.crs_term(term) {
        return Ok(t.clone());
    }
    parse_crs_term(term, &mut file.sig.clone())
}

/// Rewrites `term` (a term or the name of a `term` declaration in the rules file).
/// With `at`, performs a single step at that position.
pub fn rewrite(sys: System, rules: &str, term: &str, steps: Option<usize>, at: Option<&str>, trace: bool) -> Outcome {
    let at = match at.map(Position::parse).transpose() {
        Ok(p) => p,
        Err(e) => return from_error(e),
    };
    let limit = steps.unwrap_or_else(max_steps);
    match sys {
        System::Nrs => rewrite_nrs(rules, term, limit, at, trace),
        System::Crs => rewrite_crs(rules, term, limit, at, trace),
    }
}

fn rewrite_nrs(rules: &str, term: &str, limit: usize, at: Option<Position>, trace: bool) -> Outcome {
    let (file, (ctx, t)) = match parse_nrs(rules).and_then(|f| nrs_subject(&f, term).map(|t| (f, t))) {
        Ok(x) => x,
        Err(e) => return from_error(e),
    };
    let rs = file.nrs_rules();
    let mut o = Outcome::new(EXIT_OK);
    let (steps, last, normal) = if let Some(p) = at {
        if limit == 0 {
            (Vec::new(), t.clone(), false)
        } else {
            let mut src = FreshNameSource::new();
            let hit = rs.iter().find_map(|r| closed_rewrite_step_at(&ctx, &t, r, Some(&p), &mut src).map(|(_, u)| (r, u)));
            match hit {
                Some((r, u)) => (vec![(r.name.clone(), p.clone(), u.clone())], u, false),
                None => return Outcome::fail(EXIT_FALSE, format!("no rule applies at {p}")),
            }
        }
    } else {
        let n = normalize(&ctx, &t, &rs, limit);
        let steps = n.trace.into_iter().map(|s| (s.rule, s.at, s.term)).collect();
        (steps, n.term, n.normal)
    };
    if trace {
        for (i, (rule, p, u)) in steps.iter().enumerate() {
            o.out(format!("{}: {rule} at {p}: {}", i + 1, print_ctx_term(&ctx, u)));
        }
    }
    o.out(print_ctx_term(&ctx, &last));
    o.err(status_line(steps.len(), normal));
    o
}

fn status_line(n: usize, normal: bool) -> String {
    let what = if normal { "normal form" } else { "stopped" };
    format!("{n} step{}, {what}", if n == 1 { "" } else { "s" })
}

fn rewrite_crs(rules: &str, term: &str, limit: usize, at: Option<Position>, trace: bool) -> Outcome {
    let (file, t) = match parse_crs(rules).and_then(|f| crs_subject(&f, term).map(|t| (f, t))) {
        Ok(x) => x,
        Err(e) => return from_error(e),
    };
    let rs = file.crs_rules();
    for r in &rs {
        if let Some(v) = check_crs_rule(r).first() {
            return Outcome::fail(EXIT_PRECONDITION, format!("rule {}: {v}", r.name));
        }
    }
    let mut o = Outcome::new(EXIT_OK);
    let (steps, last, normal) = if let Some(p) = at {
        if limit == 0 {
            (Vec::new(), t.clone(), false)
        } else {
            let mut src = FreshNameSource::new();
            let hit = rs.iter().find_map(|r| crs_rewrite_step_at(&t, r, Some(&p), &mut src).map(|(_, u)| (r, u)));
            match hit {
                Some((r, u)) => (vec![(r.name.clone(), p.clone(), u.clone())], u, false),
                None => return Outcome::fail(EXIT_FALSE, format!("no rule applies at {p}")),
            }
        }
    } else {
        let n = crs_normalize(&t, &rs, limit);
        let steps = n.trace.into_iter().map(|s| (s.rule, s.at, s.term)).collect();
        (steps, n.term, n.normal)
    };
    if trace {
        for (i, (rule, p, u)) in steps.iter().enumerate() {
            o.out(format!("{}: {rule} at {p}: {}", i + 1, print_meta_term(u)));
        }
    }
    o.out(print_meta_term(&last));
    o.err(status_line(steps.len(), normal));
    o
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum CheckKind {
    Closed,
    Alpha,
    Fresh,
    CrsRule,
}

pub fn check(kind: CheckKind, arg: &str) -> Outcome {
    let mut sig = Sig::new();
    let verdict = |ok: bool, why: Option<String>| {
        let mut o = Outcome::new(if ok { EXIT_OK } else { EXIT_FALSE });
        o.out(if ok { "true" } else { "false" });
        if let Some(w) = why {
            o.out(w);
        }
        o
    };
    match kind {
        CheckKind::Closed => match parse_nrs_term(arg, &mut sig) {
            Ok((ctx, t)) => {
                let ok = check_closed_term(&ctx, &t);
                let why = if ok { None } else { closedness_violation(&ctx, &t).map(|v| v.to_string()) };
                verdict(ok, why)
            }
            Err(e) => from_error(e),
        },
        CheckKind::Alpha => match parse_alpha_judgement(arg, &mut sig) {
            Ok((ctx, s, t)) => verdict(derive_alpha(&ctx, &s, &t), None),
            Err(e) => from_error(e),
        },
        CheckKind::Fresh => match parse_fresh_judgement(arg, &mut sig) {
            Ok((ctx, a, t)) => verdict(derive_fresh(&ctx, &a, &t), None),
            Err(e) => from_error(e),
        },
        CheckKind::CrsRule => match parse_crs_rule(arg, &mut sig) {
            Ok(r) => {
                let bad = check_crs_rule(&r);
                let why = (!bad.is_empty()).then(|| bad.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("\n"));
                verdict(bad.is_empty(), why)
            }
            Err(e) => from_error(e),
        },
    }
}

/// Replaces every `sub([a]t, s)` by `t` with `s` substituted for `a`.
pub fn decode_sub(t: &MetaTerm) -> MetaTerm {
    let mut src = FreshNameSource::new();
    decode(t, &mut src)
}

fn decode(t: &MetaTerm, src: &mut FreshNameSource) -> MetaTerm {
    match t {
        MetaTerm::App(f, arg) if f.is_sub() => {
            if let MetaTerm::Tuple(ts) = arg.as_ref() {
                if let [MetaTerm::Abs(a, body), s] = ts.as_slice() {
                    let body = decode(body, src);
                    let s = decode(s, src);
                    let pairs: BTreeMap<Atom, MetaTerm> = [(a.clone(), s)].into();
                    return capture_avoiding_subst(&body, &pairs, src);
                }
            }
            MetaTerm::App(f.clone(), Box::new(decode(arg, src)))
        }
        MetaTerm::Var(_) => t.clone(),
        MetaTerm::MApp(z, args) => MetaTerm::MApp(z.clone(), args.iter().map(|c| decode(c, src)).collect()),
        MetaTerm::Abs(a, b) => MetaTerm::Abs(a.clone(), Box::new(decode(b, src))),
        MetaTerm::App(f, b) => MetaTerm::App(f.clone(), Box::new(decode(b, src))),
        MetaTerm::Tuple(ts) => MetaTerm::Tuple(ts.iter().map(|c| decode(c, src)).collect()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    /// Equal once explicit substitutions are carried out.
    PassModuloSub,
    Fail,
    Error(String),
}

/// Per rule: CRS to NRS and back, compared with the renamed original.
pub fn roundtrip_rules(rules: &[CrsRule]) -> Vec<(String, Verdict, Option<CrsRule>)> {
    rules
        .iter()
        .map(|r| {
            let orig = barendregt_rename_rule(r, &mut FreshNameSource::new());
            let (n, sig) = match translate_crs_rule(r) {
                Ok(x) => x,
                Err(e) => return (r.name.clone(), Verdict::Error(e.to_string()), None),
            };
            let back = match translate_rule(&n) {
                Ok(b) => b,
                Err(e) => return (r.name.clone(), Verdict::Error(e.to_string()), None),
            };
            let verdict = if sig.is_none() {
                if crs_rule_alpha_eq(&back, &orig) {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                }
            } else {
                let decoded = CrsRule::new(&back.name, decode_sub(&back.lhs), decode_sub(&back.rhs));
                if crs_rule_alpha_eq(&decoded, &orig) {
                    Verdict::PassModuloSub
                } else {
                    Verdict::Fail
                }
            };
            (r.name.clone(), verdict, Some(back))
        })
        .collect()
}

pub fn roundtrip(input: &str) -> Outcome {
    let file = match parse_crs(input) {
        Ok(f) => f,
        Err(e) => return from_error(e),
    };
    let mut o = Outcome::new(EXIT_OK);
    for (name, verdict, back) in roundtrip_rules(&file.crs_rules()) {
        let shown = back.as_ref().map(print_crs_rule).unwrap_or_default();
        match verdict {
            Verdict::Pass => o.out(format!("PASS {name}: {shown}")),
            Verdict::PassModuloSub => {
                o.out(format!("PASS {name}: {shown}"));
                o.out(format!("  note: {name} depends on the sigma rules; equal after carrying out sub"));
            }
            Verdict::Fail => {
                o.code = EXIT_FALSE;
                o.out(format!("FAIL {name}: {shown}"));
            }
            Verdict::Error(e) => {
                if o.code == EXIT_OK {
                    o.code = EXIT_PRECONDITION;
                }
                o.out(format!("ERROR {name}: {e}"));
            }
        }
    }
    o
}

/// One simulated step: the source step and, when found, the matching target result.
#[derive(Clone, Debug)]
pub struct SimStep {
    pub rule: String,
    pub at: Position,
    pub source: String,
    pub expected: String,
    pub found: Option<String>,
    /// Target steps used (always 1 for nrs2crs).
    pub target_steps: usize,
}

pub fn simulate_nrs2crs(rules: &[NominalRule], ctx: &FreshCtx, t: &Term, steps: usize) -> Result<Vec<SimStep>, Error> {
    let crs: Vec<CrsRule> = rules.iter().map(translate_rule).collect::<Result<_, _>>()?;
    let mut src = FreshNameSource::new();
    let mut cur = t.clone();
    let mut out = Vec::new();
    for _ in 0..steps {
        let Some((i, at, next)) = closed_step_any(ctx, &cur, rules, &mut src) else { break };
        let from = translate_term(ctx, &cur)?;
        let to = translate_term(ctx, &next)?;
        let found = from
            .positions()
            .iter()
            .flat_map(|p| crs.iter().map(move |r| (p.clone(), r)))
            .filter_map(|(p, r)| crs_rewrite_step_at(&from, r, Some(&p), &mut src).map(|(_, v)| v))
            .find(|v| crs_alpha_eq(v, &to));
        out.push(SimStep {
            rule: rules[i].name.clone(),
            at,
            source: print_ctx_term(ctx, &next),
            expected: print_meta_term(&to),
            found: found.as_ref().map(print_meta_term),
            target_steps: 1,
        });
        if found.is_none() {
            break;
        }
        cur = next;
    }
    Ok(out)
}

/// Searches one translated-rule step followed by at most `k - 1` sigma steps.
pub fn simulate_crs2nrs(rules: &[CrsRule], t: &MetaTerm, steps: usize, k: usize) -> Result<Vec<SimStep>, Error> {
    let mut nrs = Vec::new();
    let mut sig = SigmaSignature::default();
    for r in rules {
        let (n, _) = translate_crs_rule(r)?;
        sig.add_term(&n.lhs);
        sig.add_term(&n.rhs);
        nrs.push(n);
    }
    let mut src = FreshNameSource::new();
    let mut cur = t.clone();
    let mut out = Vec::new();
    let empty = FreshCtx::new();
    for _ in 0..steps {
        let Some((i, at, next)) = crs_step_any(&cur, rules, &mut src) else { break };
        let s = cur.to_nominal()?;
        let target = next.to_nominal()?;
        let mut sig_here = sig.clone();
        sig_here.add_term(&s);
        let sigma = explicit_subst_rules(&sig_here);
        let mut found = None;
        'search: for p in s.positions() {
            for r in &nrs {
                let Some((_, s1)) = closed_rewrite_step_at(&empty, &s, r, Some(&p), &mut src) else { continue };
                let n = normalize(&empty, &s1, &sigma, k.saturating_sub(1));
                if n.normal && derive_alpha(&empty, &n.term, &target) {
                    found = Some((n.term, 1 + n.steps));
                    break 'search;
                }
            }
        }
        out.push(SimStep {
            rule: rules[i].name.clone(),
            at,
            source: print_meta_term(&next),
            expected: print_term(&target),
            found: found.as_ref().map(|(t, _)| print_term(t)),
            target_steps: found.as_ref().map(|(_, n)| *n).unwrap_or(0),
        });
        if found.is_none() {
            break;
        }
        cur = next;
    }
    Ok(out)
}

pub const DEFAULT_SIGMA_BOUND: usize = 10;

pub fn simulate(dir: Direction, rules: &str, term: &str, steps: usize, k: usize) -> Outcome {
    let result = match dir {
        Direction::Nrs2Crs => parse_nrs(rules).and_then(|f| {
            let (ctx, t) = nrs_subject(&f, term)?;
            if !t.is_ground() {
                return Err(Error::NotGround);
            }
            simulate_nrs2crs(&f.nrs_rules(), &ctx, &t, steps)
        }),
        Direction::Crs2Nrs => parse_crs(rules).and_then(|f| {
            let t = crs_subject(&f, term)?;
            if !t.is_term() {
                return Err(Error::NotGround);
            }
            simulate_crs2nrs(&f.crs_rules(), &t, steps, k)
        }),
    };
    let trace = match result {
        Ok(s) => s,
        Err(e) => return from_error(e),
    };
    let mut o = Outcome::new(EXIT_OK);
    for (i, s) in trace.iter().enumerate() {
        o.out(format!("step {}: {} at {}: {}", i + 1, s.rule, s.at, s.source));
        match &s.found {
            Some(f) => o.out(format!("  MATCH in {} target step(s): {f}", s.target_steps)),
            None => {
                o.code = EXIT_FALSE;
                o.out(format!("  MISMATCH: expected {}", s.expected));
            }
        }
    }
    if o.code == EXIT_OK {
        o.out(format!("MATCH ({} step{})", trace.len(), if trace.len() == 1 { "" } else { "s" }));
    } else {
        o.out("MISMATCH");
    }
    o
}
