//! Concrete syntax for rule files, terms and judgements.
//!
//! One declaration per line. `#` at the start of a line begins a comment.
//!
//! ```text
//! sig and/2 forall/1 p/0.
//! r1: a#P |- and(P, forall([a]Q)) -> forall([a]and(P, Q))
//! beta: app(lam([a]Z(a)), Z') => Z(Z')
//! term t = and(p, forall([b]f(b)))
//! subst s = {X := f(a), Y := [b]b}
//! valuation v = {Z := \(a, b).g(a, b)}
//! ```

use std::collections::BTreeMap;

use crate::crs::{CrsRule, MetaTerm, MetaVar, Substitute, Valuation};
use crate::error::{Error, Result};
use crate::names::{Atom, FunSym, VarName};
use crate::nominal::{FreshCtx, Subst, Term};
use crate::perm::Permutation;
use crate::rewrite::NominalRule;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Mode {
    Nrs,
    Crs,
}

/// Declared (or inferred) arities by symbol name.
pub type Sig = BTreeMap<String, usize>;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Item {
    NrsRule(NominalRule),
    CrsRule(CrsRule),
    Term { name: String, ctx: FreshCtx, term: Term },
    CrsTerm { name: String, term: MetaTerm },
    Subst { name: String, subst: Subst },
    Valuation { name: String, valuation: Valuation },
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct SpecFile {
    pub sig: Sig,
    pub items: Vec<Item>,
}

impl SpecFile {
    /// A file whose signature lists every symbol its items use.
    pub fn from_items(items: Vec<Item>) -> SpecFile {
        let mut sig = Sig::new();
        let mut add = |syms: std::collections::BTreeSet<FunSym>| {
            for f in syms {
                if !f.is_sub() {
                    sig.insert(f.name().to_string(), f.arity());
                }
            }
        };
        for it in &items {
            match it {
                Item::NrsRule(r) => {
                    add(r.lhs.symbols());
                    add(r.rhs.symbols());
                }
                Item::CrsRule(r) => {
                    add(r.lhs.symbols());
                    add(r.rhs.symbols());
                }
                Item::Term { term, .. } => add(term.symbols()),
                Item::CrsTerm { term, .. } => add(term.symbols()),
                Item::Subst { subst, .. } => subst.values().for_each(|t| add(t.symbols())),
                Item::Valuation { valuation, .. } => valuation.values().for_each(|s| add(s.body.symbols())),
            }
        }
        SpecFile { sig, items }
    }

    pub fn nrs_rules(&self) -> Vec<NominalRule> {
        self.items
            .iter()
            .filter_map(|it| match it {
                Item::NrsRule(r) => Some(r.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn crs_rules(&self) -> Vec<CrsRule> {
        self.items
            .iter()
            .filter_map(|it| match it {
                Item::CrsRule(r) => Some(r.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn term(&self, name: &str) -> Option<(&FreshCtx, &Term)> {
        self.items.iter().find_map(|it| match it {
            Item::Term { name: n, ctx, term } if n == name => Some((ctx, term)),
            _ => None,
        })
    }

    pub fn crs_term(&self, name: &str) -> Option<&MetaTerm> {
        self.items.iter().find_map(|it| match it {
            Item::CrsTerm { name: n, term } if n == name => Some(term),
            _ => None,
        })
    }

    pub fn subst(&self, name: &str) -> Option<&Subst> {
        self.items.iter().find_map(|it| match it {
            Item::Subst { name: n, subst } if n == name => Some(subst),
            _ => None,
        })
    }

    pub fn valuation(&self, name: &str) -> Option<&Valuation> {
        self.items.iter().find_map(|it| match it {
            Item::Valuation { name: n, valuation } if n == name => Some(valuation),
            _ => None,
        })
    }
}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Ident(String),
    Num(usize),
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Comma,
    Dot,
    Hash,
    Turnstile,
    Arrow,
    FatArrow,
    Colon,
    Assign,
    Eq,
    Slash,
    Lambda,
    Approx,
    EmptySet,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Num(n) => format!("`{n}`"),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::LBrack => "`[`".into(),
            Tok::RBrack => "`]`".into(),
            Tok::LBrace => "`{`".into(),
            Tok::RBrace => "`}`".into(),
            Tok::Comma => "`,`".into(),
            Tok::Dot => "`.`".into(),
            Tok::Hash => "`#`".into(),
            Tok::Turnstile => "`|-`".into(),
            Tok::Arrow => "`->`".into(),
            Tok::FatArrow => "`=>`".into(),
            Tok::Colon => "`:`".into(),
            Tok::Assign => "`:=`".into(),
            Tok::Eq => "`=`".into(),
            Tok::Slash => "`/`".into(),
            Tok::Lambda => "`\\`".into(),
            Tok::Approx => "`~`".into(),
            Tok::EmptySet => "`∅`".into(),
            Tok::End => "end of line".into(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    col: usize,
}

fn lex(text: &str, line: usize) -> Result<Vec<Token>> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        let next = chars.get(i + 1).copied();
        let mut push = |tok: Tok, len: usize| {
            out.push(Token { tok, col });
            len
        };
        i += match (c, next) {
            (c, _) if c.is_whitespace() => 1,
            ('-', Some('>')) => push(Tok::Arrow, 2),
            ('=', Some('>')) => push(Tok::FatArrow, 2),
            ('|', Some('-')) => push(Tok::Turnstile, 2),
            (':', Some('=')) => push(Tok::Assign, 2),
            ('(', _) => push(Tok::LParen, 1),
            (')', _) => push(Tok::RParen, 1),
            ('[', _) => push(Tok::LBrack, 1),
            (']', _) => push(Tok::RBrack, 1),
            ('{', _) => push(Tok::LBrace, 1),
            ('}', _) => push(Tok::RBrace, 1),
            (',', _) => push(Tok::Comma, 1),
            ('.', _) | ('·', _) => push(Tok::Dot, 1),
            ('#', _) => push(Tok::Hash, 1),
            ('⊢', _) => push(Tok::Turnstile, 1),
            ('→', _) | ('↦', _) => push(Tok::Arrow, 1),
            ('⇒', _) => push(Tok::FatArrow, 1),
            (':', _) => push(Tok::Colon, 1),
            ('=', _) => push(Tok::Eq, 1),
            ('/', _) => push(Tok::Slash, 1),
            ('\\', _) | ('λ', _) => push(Tok::Lambda, 1),
            ('~', _) | ('≈', _) => push(Tok::Approx, 1),
            ('∅', _) => push(Tok::EmptySet, 1),
            (c, _) if c.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let s: String = chars[i..j].iter().collect();
                let n = s.parse().map_err(|_| Error::Syntax { line, col, msg: format!("number {s} is too large") })?;
                push(Tok::Num(n), j - i)
            }
            (c, _) if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_' || chars[j] == '\'') {
                    j += 1;
                }
                push(Tok::Ident(chars[i..j].iter().collect()), j - i)
            }
            (c, _) => return Err(Error::Syntax { line, col, msg: format!("unexpected character `{c}`") }),
        };
    }
    out.push(Token { tok: Tok::End, col: chars.len() + 1 });
    Ok(out)
}

fn is_upper(s: &str) -> bool {
    s.chars().next().is_some_and(|c| c.is_ascii_uppercase())
}

/// Parsed term shared by both formalisms. Variables carry a permutation (nominal)
/// or arguments (CRS), never both.
enum Ast {
    Atom(Atom),
    Var(Permutation, VarName, Vec<Ast>),
    Abs(Atom, Box<Ast>),
    App(FunSym, Box<Ast>),
    Tuple(Vec<Ast>),
}

impl Ast {
    fn nominal(self) -> Term {
        match self {
            Ast::Atom(a) => Term::Atom(a),
            Ast::Var(p, x, _) => Term::Susp(p, x),
            Ast::Abs(a, b) => Term::Abs(a, Box::new(b.nominal())),
            Ast::App(f, b) => Term::App(f, Box::new(b.nominal())),
            Ast::Tuple(ts) => Term::Tuple(ts.into_iter().map(Ast::nominal).collect()),
        }
    }

    fn meta(self) -> MetaTerm {
        match self {
            Ast::Atom(a) => MetaTerm::Var(a),
            Ast::Var(_, x, args) => MetaTerm::MApp(MetaVar { name: x, arity: args.len() }, args.into_iter().map(Ast::meta).collect()),
            Ast::Abs(a, b) => MetaTerm::Abs(a, Box::new(b.meta())),
            Ast::App(f, b) => MetaTerm::App(f, Box::new(b.meta())),
            Ast::Tuple(ts) => MetaTerm::Tuple(ts.into_iter().map(Ast::meta).collect()),
        }
    }
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    line: usize,
    mode: Mode,
    sig: &'a mut Sig,
}

impl<'a> Parser<'a> {
    fn new(text: &str, line: usize, mode: Mode, sig: &'a mut Sig) -> Result<Parser<'a>> {
        Ok(Parser { toks: lex(text, line)?, pos: 0, line, mode, sig })
    }

    fn peek(&self) -> &Tok {
        self.peek_at(0)
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn col(&self) -> usize {
        self.toks[self.pos.min(self.toks.len() - 1)].col
    }

    fn bump(&mut self) -> Tok {
        let t = self.peek().clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn fail_at<T>(&self, col: usize, msg: String) -> Result<T> {
        Err(Error::Syntax { line: self.line, col, msg })
    }

    fn expected<T>(&self, what: &str) -> Result<T> {
        self.fail_at(self.col(), format!("expected {what}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, tok: Tok) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.expected(&tok.describe())
        }
    }

    fn lower_at(&self, k: usize) -> bool {
        matches!(self.peek_at(k), Tok::Ident(s) if !is_upper(s))
    }

    fn upper_at(&self, k: usize) -> bool {
        matches!(self.peek_at(k), Tok::Ident(s) if is_upper(s))
    }

    fn atom(&mut self) -> Result<Atom> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_upper(&s) => {
                self.bump();
                Ok(Atom::new(&s))
            }
            _ => self.expected("an atom"),
        }
    }

    fn variable(&mut self) -> Result<VarName> {
        match self.peek().clone() {
            Tok::Ident(s) if is_upper(&s) => {
                self.bump();
                Ok(VarName::new(&s))
            }
            _ => self.expected("a variable"),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) => {
                self.bump();
                Ok(s)
            }
            _ => self.expected(what),
        }
    }

    fn end(&mut self) -> Result<()> {
        self.expect(Tok::End)
    }

    fn term(&mut self) -> Result<Ast> {
        if *self.peek() == Tok::LBrack && self.lower_at(1) && *self.peek_at(2) == Tok::RBrack {
            self.bump();
            let a = self.atom()?;
            self.bump();
            let body = self.term()?;
            return Ok(Ast::Abs(a, Box::new(body)));
        }
        let mut t = self.primary()?;
        while self.mode == Mode::Nrs && *self.peek() == Tok::LBrack && self.lower_at(1) && *self.peek_at(2) == Tok::Arrow {
            self.bump();
            let a = self.atom()?;
            self.bump();
            let s = self.term()?;
            self.expect(Tok::RBrack)?;
            t = Ast::App(FunSym::sub(), Box::new(Ast::Tuple(vec![Ast::Abs(a, Box::new(t)), s])));
        }
        Ok(t)
    }

    fn swap_ahead(&self) -> bool {
        *self.peek() == Tok::LParen && self.lower_at(1) && self.lower_at(2) && *self.peek_at(3) == Tok::RParen
    }

    fn primary(&mut self) -> Result<Ast> {
        let col = self.col();
        match self.peek().clone() {
            Tok::LParen if self.swap_ahead() => {
                if self.mode == Mode::Crs {
                    return self.fail_at(col, "suspensions are not part of CRS syntax".into());
                }
                let mut pairs = Vec::new();
                while self.swap_ahead() {
                    self.bump();
                    let a = self.atom()?;
                    let b = self.atom()?;
                    self.bump();
                    pairs.push((a, b));
                }
                self.expect(Tok::Dot)?;
                let x = self.variable()?;
                Ok(Ast::Var(Permutation::from_pairs(pairs), x, Vec::new()))
            }
            Tok::LParen => {
                self.bump();
                if *self.peek() == Tok::RParen {
                    self.bump();
                    return Ok(Ast::Tuple(Vec::new()));
                }
                let first = self.term()?;
                if *self.peek() != Tok::Comma {
                    self.expect(Tok::RParen)?;
                    return Ok(first);
                }
                let mut ts = vec![first];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    ts.push(self.term()?);
                }
                self.expect(Tok::RParen)?;
                Ok(Ast::Tuple(ts))
            }
            Tok::Ident(s) if is_upper(&s) => {
                self.bump();
                let args = if *self.peek() == Tok::LParen {
                    if self.mode == Mode::Nrs {
                        return self.fail_at(self.col(), format!("variable {s} takes no arguments"));
                    }
                    self.args()?
                } else {
                    Vec::new()
                };
                Ok(Ast::Var(Permutation::id(), VarName::new(&s), args))
            }
            Tok::Ident(s) => {
                self.bump();
                if *self.peek() == Tok::LParen {
                    let args = self.args()?;
                    self.apply(&s, args, col)
                } else if self.sig.get(&s) == Some(&0) {
                    Ok(Ast::App(FunSym::new(&s, 0), Box::new(Ast::Tuple(Vec::new()))))
                } else {
                    Ok(Ast::Atom(Atom::new(&s)))
                }
            }
            _ => self.expected("a term"),
        }
    }

    fn args(&mut self) -> Result<Vec<Ast>> {
        self.expect(Tok::LParen)?;
        let mut out = Vec::new();
        if *self.peek() == Tok::RParen {
            self.bump();
            return Ok(out);
        }
        loop {
            out.push(self.term()?);
            match self.peek() {
                Tok::Comma => {
                    self.bump();
                }
                Tok::RParen => {
                    self.bump();
                    return Ok(out);
                }
                _ => return self.expected("`,` or `)`"),
            }
        }
    }

    /// `f(t1, …, tk)`: k arguments for arity k, or one argument standing for the whole
    /// argument of a symbol of any other arity.
    fn apply(&mut self, name: &str, mut args: Vec<Ast>, col: usize) -> Result<Ast> {
        let k = args.len();
        let n = if name == FunSym::sub().name() { 2 } else { *self.sig.entry(name.to_string()).or_insert(k) };
        let sym = FunSym::new(name, n);
        if k == n && n != 1 {
            Ok(Ast::App(sym, Box::new(Ast::Tuple(args))))
        } else if k == 1 {
            Ok(Ast::App(sym, Box::new(args.pop().unwrap())))
        } else {
            self.fail_at(col, format!("{name} has arity {n} but is given {k} arguments"))
        }
    }

    /// `a#X, b#Y |-`, `∅ |-`, `{a#X} |-` or `|-`; nothing when no context follows.
    fn context(&mut self, required: bool) -> Result<FreshCtx> {
        let mut ctx = FreshCtx::new();
        match self.peek() {
            Tok::Turnstile => {
                self.bump();
                return Ok(ctx);
            }
            Tok::EmptySet => {
                self.bump();
                self.expect(Tok::Turnstile)?;
                return Ok(ctx);
            }
            Tok::LBrace => {
                self.bump();
                if *self.peek() != Tok::RBrace {
                    self.constraints(&mut ctx)?;
                }
                self.expect(Tok::RBrace)?;
                self.expect(Tok::Turnstile)?;
                return Ok(ctx);
            }
            _ => {}
        }
        if required || (self.lower_at(0) && *self.peek_at(1) == Tok::Hash && self.upper_at(2)) {
            self.constraints(&mut ctx)?;
            self.expect(Tok::Turnstile)?;
        }
        Ok(ctx)
    }

    fn constraints(&mut self, ctx: &mut FreshCtx) -> Result<()> {
        loop {
            let a = self.atom()?;
            self.expect(Tok::Hash)?;
            let x = self.variable()?;
            ctx.insert(a, x);
            if *self.peek() != Tok::Comma {
                return Ok(());
            }
            self.bump();
        }
    }

    fn has_turnstile(&self) -> bool {
        self.toks[self.pos..].iter().any(|t| t.tok == Tok::Turnstile)
    }

    fn nominal(&mut self) -> Result<Term> {
        Ok(self.term()?.nominal())
    }

    fn meta(&mut self) -> Result<MetaTerm> {
        Ok(self.term()?.meta())
    }

    fn sig_decl(&mut self) -> Result<()> {
        self.bump();
        while let Tok::Ident(_) = self.peek() {
            let col = self.col();
            let name = self.ident("a symbol")?;
            self.expect(Tok::Slash)?;
            let n = match self.bump() {
                Tok::Num(n) => n,
                _ => {
                    self.pos -= 1;
                    return self.expected("an arity");
                }
            };
            if name == FunSym::sub().name() && n != 2 {
                return self.fail_at(col, "sub is reserved with arity 2".into());
            }
            match self.sig.get(&name) {
                Some(&m) if m != n => return self.fail_at(col, format!("{name} declared with arity {m} and {n}")),
                _ => {
                    self.sig.insert(name, n);
                }
            }
        }
        if *self.peek() == Tok::Dot {
            self.bump();
        }
        self.end()
    }

    fn subst_body(&mut self) -> Result<Subst> {
        self.expect(Tok::LBrace)?;
        let mut out = Subst::new();
        while *self.peek() != Tok::RBrace {
            let x = self.variable()?;
            self.expect(Tok::Assign)?;
            let t = self.nominal()?;
            out.insert(x, t);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    fn substitute(&mut self) -> Result<Substitute> {
        let col = self.col();
        let mut binders = Vec::new();
        if *self.peek() == Tok::Lambda {
            self.bump();
            self.expect(Tok::LParen)?;
            while *self.peek() != Tok::RParen {
                binders.push(self.atom()?);
                if *self.peek() == Tok::Comma {
                    self.bump();
                } else {
                    break;
                }
            }
            self.expect(Tok::RParen)?;
            self.expect(Tok::Dot)?;
        }
        let body = self.meta()?;
        Substitute::new(binders, body).or_else(|e| self.fail_at(col, e.to_string()))
    }

    fn valuation_body(&mut self) -> Result<Valuation> {
        self.expect(Tok::LBrace)?;
        let mut out = Valuation::new();
        while *self.peek() != Tok::RBrace {
            let z = self.variable()?;
            self.expect(Tok::Assign)?;
            let s = self.substitute()?;
            out.insert(MetaVar { name: z, arity: s.binders.len() }, s);
            if *self.peek() == Tok::Comma {
                self.bump();
            } else {
                break;
            }
        }
        self.expect(Tok::RBrace)?;
        Ok(out)
    }

    fn named(&mut self, keyword: &str) -> bool {
        matches!(self.peek(), Tok::Ident(k) if k == keyword) && matches!(self.peek_at(1), Tok::Ident(_)) && *self.peek_at(2) == Tok::Eq
    }

    fn item(&mut self, default_name: String) -> Result<Option<Item>> {
        if *self.peek() == Tok::End {
            return Ok(None);
        }
        if matches!(self.peek(), Tok::Ident(k) if k == "sig") && matches!(self.peek_at(1), Tok::Ident(_)) && *self.peek_at(2) == Tok::Slash {
            self.sig_decl()?;
            return Ok(None);
        }
        for kw in ["term", "subst", "valuation"] {
            if self.named(kw) {
                self.bump();
                let name = self.ident("a name")?;
                self.bump();
                let col = self.col();
                let item = match (kw, self.mode) {
                    ("term", Mode::Nrs) => {
                        let ctx = self.context(false)?;
                        Item::Term { name, ctx, term: self.nominal()? }
                    }
                    ("term", Mode::Crs) => Item::CrsTerm { name, term: self.meta()? },
                    ("subst", Mode::Nrs) => Item::Subst { name, subst: self.subst_body()? },
                    ("valuation", Mode::Crs) => Item::Valuation { name, valuation: self.valuation_body()? },
                    (kw, _) => return self.fail_at(col, format!("`{kw}` declarations are not allowed in this file kind")),
                };
                self.end()?;
                return Ok(Some(item));
            }
        }
        let name = if matches!(self.peek(), Tok::Ident(_)) && *self.peek_at(1) == Tok::Colon {
            let n = self.ident("a rule name")?;
            self.bump();
            n
        } else {
            default_name
        };
        let item = match self.mode {
            Mode::Nrs => {
                let ctx = self.context(false)?;
                let lhs = self.nominal()?;
                self.expect(Tok::Arrow)?;
                let rhs = self.nominal()?;
                self.end()?;
                Item::NrsRule(NominalRule::new(&name, ctx, lhs, rhs).or_else(|e| self.fail_at(1, e.to_string()))?)
            }
            Mode::Crs => {
                let lhs = self.meta()?;
                self.expect(Tok::FatArrow)?;
                let rhs = self.meta()?;
                self.end()?;
                Item::CrsRule(CrsRule::new(&name, lhs, rhs))
            }
        };
        Ok(Some(item))
    }
}

pub fn parse_file(text: &str, mode: Mode) -> Result<SpecFile> {
    let mut file = SpecFile::default();
    let mut rules = 0;
    for (i, line) in text.lines().enumerate() {
        if line.trim_start().starts_with('#') {
            continue;
        }
        let mut p = Parser::new(line, i + 1, mode, &mut file.sig)?;
        if let Some(item) = p.item(format!("r{}", rules + 1))? {
            if matches!(item, Item::NrsRule(_) | Item::CrsRule(_)) {
                rules += 1;
            }
            file.items.push(item);
        }
    }
    Ok(file)
}

pub fn parse_nrs(text: &str) -> Result<SpecFile> {
    parse_file(text, Mode::Nrs)
}

pub fn parse_crs(text: &str) -> Result<SpecFile> {
    parse_file(text, Mode::Crs)
}

/// `[ctx |-] t`, resolving symbols against (and extending) `sig`.
pub fn parse_nrs_term(text: &str, sig: &mut Sig) -> Result<(FreshCtx, Term)> {
    let mut p = Parser::new(text, 1, Mode::Nrs, sig)?;
    let ctx = p.context(false)?;
    let t = p.nominal()?;
    p.end()?;
    Ok((ctx, t))
}

pub fn parse_crs_term(text: &str, sig: &mut Sig) -> Result<MetaTerm> {
    let mut p = Parser::new(text, 1, Mode::Crs, sig)?;
    let t = p.meta()?;
    p.end()?;
    Ok(t)
}

pub fn parse_nrs_rule(text: &str, sig: &mut Sig) -> Result<NominalRule> {
    let mut p = Parser::new(text, 1, Mode::Nrs, sig)?;
    match p.item("r1".into())? {
        Some(Item::NrsRule(r)) => Ok(r),
        _ => p.fail_at(1, "expected a rule".into()),
    }
}

pub fn parse_crs_rule(text: &str, sig: &mut Sig) -> Result<CrsRule> {
    let mut p = Parser::new(text, 1, Mode::Crs, sig)?;
    match p.item("r1".into())? {
        Some(Item::CrsRule(r)) => Ok(r),
        _ => p.fail_at(1, "expected a rule".into()),
    }
}

/// `[ctx |-] a # t`
pub fn parse_fresh_judgement(text: &str, sig: &mut Sig) -> Result<(FreshCtx, Atom, Term)> {
    let mut p = Parser::new(text, 1, Mode::Nrs, sig)?;
    let ctx = if p.has_turnstile() { p.context(true)? } else { FreshCtx::new() };
    let a = p.atom()?;
    p.expect(Tok::Hash)?;
    let t = p.nominal()?;
    p.end()?;
    Ok((ctx, a, t))
}

/// `[ctx |-] s ~ t` (also `≈`).
pub fn parse_alpha_judgement(text: &str, sig: &mut Sig) -> Result<(FreshCtx, Term, Term)> {
    let mut p = Parser::new(text, 1, Mode::Nrs, sig)?;
    let ctx = if p.has_turnstile() { p.context(true)? } else { FreshCtx::new() };
    let s = p.nominal()?;
    p.expect(Tok::Approx)?;
    let t = p.nominal()?;
    p.end()?;
    Ok((ctx, s, t))
}

fn app_string(f: &FunSym, elems: Option<Vec<String>>, whole: impl FnOnce() -> String) -> String {
    if f.arity() != 1 {
        if let Some(es) = elems {
            if es.len() == f.arity() {
                return if es.is_empty() { f.name().to_string() } else { format!("{}({})", f.name(), es.join(", ")) };
            }
        }
    }
    format!("{}({})", f.name(), whole())
}

pub fn print_term(t: &Term) -> String {
    match t {
        Term::Atom(a) => a.to_string(),
        Term::Susp(p, x) if p.is_empty() => x.to_string(),
        Term::Susp(p, x) => format!("{p}.{x}"),
        Term::Abs(a, b) => format!("[{a}]{}", print_term(b)),
        Term::App(f, arg) => {
            if f.is_sub() {
                if let Term::Tuple(ts) = arg.as_ref() {
                    if let [Term::Abs(a, body), s] = ts.as_slice() {
                        let inner = match body.as_ref() {
                            Term::Abs(..) => format!("({})", print_term(body)),
                            other => print_term(other),
                        };
                        return format!("{inner}[{a} -> {}]", print_term(s));
                    }
                }
            }
            let elems = match arg.as_ref() {
                Term::Tuple(ts) => Some(ts.iter().map(print_term).collect()),
                _ => None,
            };
            app_string(f, elems, || print_term(arg))
        }
        Term::Tuple(ts) => format!("({})", ts.iter().map(print_term).collect::<Vec<_>>().join(", ")),
    }
}

pub fn print_ctx_term(ctx: &FreshCtx, t: &Term) -> String {
    if ctx.is_empty() {
        print_term(t)
    } else {
        format!("{ctx} |- {}", print_term(t))
    }
}

pub fn print_meta_term(t: &MetaTerm) -> String {
    match t {
        MetaTerm::Var(a) => a.to_string(),
        MetaTerm::MApp(z, args) if args.is_empty() => z.name.to_string(),
        MetaTerm::MApp(z, args) => format!("{}({})", z.name, args.iter().map(print_meta_term).collect::<Vec<_>>().join(", ")),
        MetaTerm::Abs(a, b) => format!("[{a}]{}", print_meta_term(b)),
        MetaTerm::App(f, arg) => {
            let elems = match arg.as_ref() {
                MetaTerm::Tuple(ts) => Some(ts.iter().map(print_meta_term).collect()),
                _ => None,
            };
            app_string(f, elems, || print_meta_term(arg))
        }
        MetaTerm::Tuple(ts) => format!("({})", ts.iter().map(print_meta_term).collect::<Vec<_>>().join(", ")),
    }
}

pub fn print_nrs_rule(r: &NominalRule) -> String {
    let lhs = print_ctx_term(&r.ctx, &r.lhs);
    format!("{lhs} -> {}", print_term(&r.rhs))
}

pub fn print_crs_rule(r: &CrsRule) -> String {
    format!("{} => {}", print_meta_term(&r.lhs), print_meta_term(&r.rhs))
}

pub fn print_subst(s: &Subst) -> String {
    let parts: Vec<String> = s.iter().map(|(x, t)| format!("{x} := {}", print_term(t))).collect();
    format!("{{{}}}", parts.join(", "))
}

pub fn print_substitute(s: &Substitute) -> String {
    if s.binders.is_empty() {
        return print_meta_term(&s.body);
    }
    let bs: Vec<String> = s.binders.iter().map(|b| b.to_string()).collect();
    format!("\\({}).{}", bs.join(", "), print_meta_term(&s.body))
}

pub fn print_valuation(v: &Valuation) -> String {
    let parts: Vec<String> = v.iter().map(|(z, s)| format!("{} := {}", z.name, print_substitute(s))).collect();
    format!("{{{}}}", parts.join(", "))
}

pub fn print_sig(sig: &Sig) -> String {
    let parts: Vec<String> = sig.iter().map(|(f, n)| format!("{f}/{n}")).collect();
    format!("sig {}.", parts.join(" "))
}

pub fn print_file(f: &SpecFile) -> String {
    let mut out = String::new();
    if !f.sig.is_empty() {
        out.push_str(&print_sig(&f.sig));
        out.push('\n');
    }
    for it in &f.items {
        let line = match it {
            Item::NrsRule(r) => format!("{}: {}", r.name, print_nrs_rule(r)),
            Item::CrsRule(r) => format!("{}: {}", r.name, print_crs_rule(r)),
            Item::Term { name, ctx, term } => format!("term {name} = {}", print_ctx_term(ctx, term)),
            Item::CrsTerm { name, term } => format!("term {name} = {}", print_meta_term(term)),
            Item::Subst { name, subst } => format!("subst {name} = {}", print_subst(subst)),
            Item::Valuation { name, valuation } => format!("valuation {name} = {}", print_valuation(valuation)),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nrs_term(s: &str) -> Term {
        parse_nrs_term(s, &mut Sig::new()).unwrap().1
    }

    #[test]
    fn prenex_rule_parses() {
        let f = parse_nrs("a#P |- and(P, forall([a]Q)) -> forall([a] and(P, Q))").unwrap();
        let r = &f.nrs_rules()[0];
        assert_eq!(r.name, "r1");
        assert_eq!(r.ctx, FreshCtx::of(&[("a", "P")]));
        assert_eq!(r.lhs, Term::app("and", vec![Term::var("P"), Term::app("forall", vec![Term::abs("a", Term::var("Q"))])]));
        assert_eq!(r.rhs, Term::app("forall", vec![Term::abs("a", Term::app("and", vec![Term::var("P"), Term::var("Q")]))]));
        assert_eq!(print_nrs_rule(r), "a#P |- and(P, forall([a]Q)) -> forall([a]and(P, Q))");
    }

    #[test]
    fn beta_parses() {
        let f = parse_crs("app(lam([a]Z(a)), Z') => Z(Z')").unwrap();
        let r = &f.crs_rules()[0];
        assert_eq!(
            r.lhs,
            MetaTerm::app("app", vec![MetaTerm::app("lam", vec![MetaTerm::abs("a", MetaTerm::mvars("Z", &["a"]))]), MetaTerm::mvars("Z'", &[])])
        );
        assert_eq!(r.rhs, MetaTerm::mapp("Z", vec![MetaTerm::mvars("Z'", &[])]));
        assert_eq!(print_crs_rule(r), "app(lam([a]Z(a)), Z') => Z(Z')");
    }

    #[test]
    fn suspensions_and_substitutions() {
        let t = nrs_term("[b](a b)(c d).X[a -> Y]");
        let p = Permutation::from_pairs([(Atom::new("a"), Atom::new("b")), (Atom::new("c"), Atom::new("d"))]);
        assert_eq!(t, Term::abs("b", Term::sub(&Atom::new("a"), Term::susp(p, "X"), Term::var("Y"))));
        assert_eq!(print_term(&t), "[b](a b)(c d).X[a -> Y]");
        let g = nrs_term("([b]X)[a -> Y]");
        assert_eq!(g, Term::sub(&Atom::new("a"), Term::abs("b", Term::var("X")), Term::var("Y")));
        assert_eq!(print_term(&g), "([b]X)[a -> Y]");
        assert_eq!(nrs_term("(a b)·X"), nrs_term("(a b).X"));
        assert_eq!(nrs_term("sub([a]X, Y)"), nrs_term("X[a -> Y]"));
    }

    #[test]
    fn arities_and_constants() {
        let f = parse_nrs("sig f/2 c/0.\nterm t = f(c, a)\nterm u = f(X)").unwrap();
        let (_, t) = f.term("t").unwrap();
        assert_eq!(t, &Term::app("f", vec![Term::app("c", vec![]), Term::atom("a")]));
        let (_, u) = f.term("u").unwrap();
        assert_eq!(u, &Term::App(FunSym::new("f", 2), Box::new(Term::var("X"))));
        assert_eq!(print_term(u), "f(X)");
        assert_eq!(print_term(t), "f(c, a)");
        assert!(parse_nrs("sig f/2.\nterm t = f(a, b, c)").is_err());
        assert!(parse_nrs("term t = g(a)\nterm u = g(a, b)").is_err());
    }

    #[test]
    fn contexts_sorted_and_printed() {
        let (ctx, t) = parse_nrs_term("b#Y, a#X |- f(X, Y)", &mut Sig::new()).unwrap();
        assert_eq!(print_ctx_term(&ctx, &t), "a#X, b#Y |- f(X, Y)");
        let (ctx, a, t) = parse_fresh_judgement("∅ ⊢ a # a", &mut Sig::new()).unwrap();
        assert!(ctx.is_empty());
        assert_eq!(a, Atom::new("a"));
        assert_eq!(t, Term::atom("a"));
        let (ctx, s, t) = parse_alpha_judgement("{a#X} ⊢ [a](a b)·X ≈ [b]X", &mut Sig::new()).unwrap();
        assert_eq!(ctx, FreshCtx::of(&[("a", "X")]));
        assert_eq!(print_term(&s), "[a](a b).X");
        assert_eq!(print_term(&t), "[b]X");
    }

    #[test]
    fn file_round_trip() {
        let text = "# prenex\nsig and/2 forall/1 p/0.\nr1: a#P |- and(P, forall([a]Q)) -> forall([a]and(P, Q))\nterm t = and(p, forall([b]f(b)))\nsubst s = {X := (), Y := [b]b}\n";
        let f = parse_nrs(text).unwrap();
        let printed = print_file(&f);
        assert_eq!(parse_nrs(&printed).unwrap(), f);
        assert!(printed.starts_with("sig and/2 f/1 forall/1 p/0.\n"));

        let text = "beta: app(lam([a]Z(a)), Z') => Z(Z')\nterm u = app(lam([a]f(a, a)), c)\nvaluation v = {Z := \\(a).f(a, a), Z' := c}\n";
        let f = parse_crs(text).unwrap();
        let printed = print_file(&f);
        assert_eq!(parse_crs(&printed).unwrap(), f);
        assert!(printed.contains("valuation v = {Z := \\(a).f(a, a), Z' := c}"));
    }

    #[test]
    fn errors_carry_positions() {
        match parse_nrs("r1: f(X, a)\nr2: f(X -> a") {
            Err(Error::Syntax { line, col, msg }) => {
                assert_eq!(line, 1);
                assert_eq!(col, 12);
                assert!(msg.contains("expected `->`"), "{msg}");
            }
            other => panic!("{other:?}"),
        }
        match parse_crs("f((a b).X) => X") {
            Err(Error::Syntax { line: 1, col: 3, .. }) => {}
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_nrs("f(X(a)) -> X"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_nrs("f(a) -> Y"), Err(Error::Syntax { .. })));
        assert!(matches!(parse_nrs("f(a) ? b"), Err(Error::Syntax { col: 6, .. })));
    }

    #[test]
    fn empty_input() {
        assert!(parse_crs("").unwrap().items.is_empty());
        assert_eq!(print_file(&SpecFile::default()), "");
    }
}
