use std::fmt;
use std::sync::Arc;

/// Object-level name. Ordered by name, which fixes the order used for sorted argument lists.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Atom(Arc<str>);

impl Atom {
    pub fn new(name: &str) -> Atom {
        Atom(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for Atom {
    fn from(s: &str) -> Atom {
        Atom::new(s)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Nominal unknown (and CRS meta-variable name).
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VarName(Arc<str>);

impl VarName {
    pub fn new(name: &str) -> VarName {
        VarName(Arc::from(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl From<&str> for VarName {
    fn from(s: &str) -> VarName {
        VarName::new(s)
    }
}

impl fmt::Display for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Debug for VarName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Function symbol with its arity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FunSym {
    name: Arc<str>,
    arity: usize,
}

impl FunSym {
    pub fn new(name: &str, arity: usize) -> FunSym {
        FunSym { name: Arc::from(name), arity }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// The reserved binary symbol encoding explicit substitution `t[a -> s]` as `sub([a]t, s)`.
    pub fn sub() -> FunSym {
        FunSym::new(SUB, 2)
    }

    pub fn is_sub(&self) -> bool {
        &*self.name == SUB && self.arity == 2
    }
}

pub const SUB: &str = "sub";

impl fmt::Display for FunSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}

impl fmt::Debug for FunSym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.name, self.arity)
    }
}
