use std::collections::HashSet;

use crate::names::{Atom, VarName};

/// Supplies names that avoid everything reserved so far and everything it already handed out.
#[derive(Clone, Debug, Default)]
pub struct FreshNameSource {
    counter: usize,
    reserved: HashSet<String>,
}

impl FreshNameSource {
    pub fn new() -> FreshNameSource {
        FreshNameSource::default()
    }

    pub fn with_reserved<I, S>(names: I) -> FreshNameSource
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut src = FreshNameSource::new();
        src.reserve_all(names);
        src
    }

    pub fn reserve(&mut self, name: &str) {
        self.reserved.insert(name.to_string());
    }

    pub fn reserve_all<I, S>(&mut self, names: I)
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        for n in names {
            self.reserved.insert(n.into());
        }
    }

    pub fn is_reserved(&self, name: &str) -> bool {
        self.reserved.contains(name)
    }

    /// Number of names emitted so far.
    pub fn counter(&self) -> usize {
        self.counter
    }

    /// `base` stripped of trailing digits and primes, followed by the smallest unused number.
    pub fn fresh(&mut self, base: &str) -> String {
        let stem = base.trim_end_matches(|c: char| c.is_ascii_digit() || c == '\'');
        let stem = if stem.is_empty() { base } else { stem };
        let mut n = 0usize;
        loop {
            let cand = format!("{stem}{n}");
            if !self.reserved.contains(&cand) {
                self.reserved.insert(cand.clone());
                self.counter += 1;
                return cand;
            }
            n += 1;
        }
    }

    pub fn fresh_atom(&mut self, base: &Atom) -> Atom {
        Atom::new(&self.fresh(base.name()))
    }

    pub fn fresh_var(&mut self, base: &VarName) -> VarName {
        VarName::new(&self.fresh(base.name()))
    }
}
