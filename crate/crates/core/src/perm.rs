use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};
use crate::names::Atom;

/// Transposition of two distinct atoms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Swapping {
    pub left: Atom,
    pub right: Atom,
}

impl Swapping {
    /// `None` for `(a a)`, which is the identity.
    pub fn new(left: Atom, right: Atom) -> Option<Swapping> {
        if left == right {
            None
        } else {
            Some(Swapping { left, right })
        }
    }

    pub fn apply(&self, a: &Atom) -> Atom {
        if *a == self.left {
            self.right.clone()
        } else if *a == self.right {
            self.left.clone()
        } else {
            a.clone()
        }
    }
}

/// A list of swappings; the rightmost one acts first.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Debug)]
pub struct Permutation {
    swaps: Vec<Swapping>,
}

impl Permutation {
    pub fn id() -> Permutation {
        Permutation { swaps: Vec::new() }
    }

    pub fn swap(a: &Atom, b: &Atom) -> Permutation {
        Permutation::from_pairs([(a.clone(), b.clone())])
    }

    /// Identity swappings are dropped.
    pub fn from_pairs<I: IntoIterator<Item = (Atom, Atom)>>(pairs: I) -> Permutation {
        Permutation {
            swaps: pairs.into_iter().filter_map(|(a, b)| Swapping::new(a, b)).collect(),
        }
    }

    pub fn swaps(&self) -> &[Swapping] {
        &self.swaps
    }

    /// True for the empty list (not merely the identity function).
    pub fn is_empty(&self) -> bool {
        self.swaps.is_empty()
    }

    pub fn apply(&self, a: &Atom) -> Atom {
        let mut cur = a.clone();
        for s in self.swaps.iter().rev() {
            cur = s.apply(&cur);
        }
        cur
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            swaps: self.swaps.iter().rev().cloned().collect(),
        }
    }

    /// `self ∘ other`: other acts first.
    pub fn compose(&self, other: &Permutation) -> Permutation {
        let mut swaps = self.swaps.clone();
        swaps.extend(other.swaps.iter().cloned());
        Permutation { swaps }
    }

    pub fn mentioned(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        for s in &self.swaps {
            out.insert(s.left.clone());
            out.insert(s.right.clone());
        }
        out
    }

    pub fn support(&self) -> BTreeSet<Atom> {
        self.mentioned()
            .into_iter()
            .filter(|a| self.apply(a) != *a)
            .collect()
    }

    /// Renames every atom in the swap list with `f`, which must be injective.
    pub fn rename(&self, f: &impl Fn(&Atom) -> Atom) -> Permutation {
        Permutation::from_pairs(self.swaps.iter().map(|s| (f(&s.left), f(&s.right))))
    }

    /// Pointwise equality on the union of supports.
    pub fn same_action(&self, other: &Permutation) -> bool {
        ds(self, other).is_empty()
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.swaps.is_empty() {
            return f.write_str("Id");
        }
        for s in &self.swaps {
            write!(f, "({} {})", s.left, s.right)?;
        }
        Ok(())
    }
}

/// Difference set: atoms on which the two permutations disagree.
pub fn ds(p: &Permutation, q: &Permutation) -> BTreeSet<Atom> {
    let mut cand = p.mentioned();
    cand.extend(q.mentioned());
    cand.into_iter().filter(|a| p.apply(a) != q.apply(a)).collect()
}

/// Finite injective map of atoms, in two-line (array) form.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ArrayMapping {
    pairs: BTreeMap<Atom, Atom>,
}

impl ArrayMapping {
    pub fn new<I: IntoIterator<Item = (Atom, Atom)>>(pairs: I) -> Result<ArrayMapping> {
        let mut map = BTreeMap::new();
        let mut seen = BTreeSet::new();
        for (a, b) in pairs {
            if map.contains_key(&a) {
                return Err(Error::NotAPermutation(format!("{a} mapped twice")));
            }
            if !seen.insert(b.clone()) {
                return Err(Error::NotAPermutation(format!("{b} is the image of two atoms")));
            }
            map.insert(a, b);
        }
        Ok(ArrayMapping { pairs: map })
    }

    pub fn pairs(&self) -> &BTreeMap<Atom, Atom> {
        &self.pairs
    }

    pub fn get(&self, a: &Atom) -> Option<&Atom> {
        self.pairs.get(a)
    }
}

/// Disjoint cycles, each started from the smallest atom not yet covered.
pub fn mapping_to_cycles(f: &ArrayMapping) -> Result<Vec<Vec<Atom>>> {
    for b in f.pairs.values() {
        if !f.pairs.contains_key(b) {
            return Err(Error::NotAPermutation(format!("{b} is an image but not in the domain")));
        }
    }
    let mut used = BTreeSet::new();
    let mut cycles = Vec::new();
    for start in f.pairs.keys() {
        if used.contains(start) {
            continue;
        }
        let mut cycle = vec![start.clone()];
        used.insert(start.clone());
        let mut cur = f.pairs[start].clone();
        while cur != *start {
            used.insert(cur.clone());
            cycle.push(cur.clone());
            cur = f.pairs[&cur].clone();
        }
        cycles.push(cycle);
    }
    Ok(cycles)
}

/// `(a1 … ak)` becomes `(a1 ak)(a1 ak-1)…(a1 a2)`.
pub fn cycle_to_swappings(c: &[Atom]) -> Result<Permutation> {
    let mut seen = BTreeSet::new();
    for a in c {
        if !seen.insert(a) {
            return Err(Error::DuplicateAtom(a.to_string()));
        }
    }
    if c.len() < 2 {
        return Ok(Permutation::id());
    }
    Ok(Permutation::from_pairs(
        c[1..].iter().rev().map(|b| (c[0].clone(), b.clone())),
    ))
}

/// Later cycles end up leftmost.
pub fn mapping_to_swappings(f: &ArrayMapping) -> Result<Permutation> {
    let mut out = Permutation::id();
    for c in mapping_to_cycles(f)? {
        out = cycle_to_swappings(&c)?.compose(&out);
    }
    Ok(out)
}
