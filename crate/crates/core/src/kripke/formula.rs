use std::fmt;

/// Modal-propositional formula.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Formula {
    Atom(String),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    /// Necessity: holds at every successor.
    Box(Box<Formula>),
    /// Possibility: holds at some successor.
    Diamond(Box<Formula>),
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Self {
        Formula::Not(Box::new(self))
    }

    pub fn and(self, rhs: Formula) -> Self {
        Formula::And(Box::new(self), Box::new(rhs))
    }

    pub fn or(self, rhs: Formula) -> Self {
        Formula::Or(Box::new(self), Box::new(rhs))
    }

    pub fn implies(self, rhs: Formula) -> Self {
        Formula::Implies(Box::new(self), Box::new(rhs))
    }

    pub fn necessarily(self) -> Self {
        Formula::Box(Box::new(self))
    }

    pub fn possibly(self) -> Self {
        Formula::Diamond(Box::new(self))
    }

    /// Height of the syntax tree; an atom has depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Formula::Atom(_) => 0,
            Formula::Not(f) | Formula::Box(f) | Formula::Diamond(f) => 1 + f.depth(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) => {
                1 + a.depth().max(b.depth())
            }
        }
    }

    /// Atom names in first-occurrence order.
    pub fn atoms(&self) -> Vec<&str> {
        fn walk<'a>(f: &'a Formula, out: &mut Vec<&'a str>) {
            match f {
                Formula::Atom(a) => {
                    if !out.contains(&a.as_str()) {
                        out.push(a);
                    }
                }
                Formula::Not(x) | Formula::Box(x) | Formula::Diamond(x) => walk(x, out),
                Formula::And(x, y) | Formula::Or(x, y) | Formula::Implies(x, y) => {
                    walk(x, out);
                    walk(y, out);
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Atom(_) | Formula::Not(_) | Formula::Box(_) | Formula::Diamond(_) => 4,
            Formula::And(..) => 3,
            Formula::Or(..) => 2,
            Formula::Implies(..) => 1,
        }
    }
}

/// Renders in the CLI surface syntax with the minimum parentheses needed to
/// parse back to the same tree.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn child(f: &mut fmt::Formatter<'_>, x: &Formula, min: u8) -> fmt::Result {
            if x.precedence() < min {
                write!(f, "({x})")
            } else {
                write!(f, "{x}")
            }
        }
        match self {
            Formula::Atom(a) => f.write_str(a),
            Formula::Not(x) => {
                f.write_str("!")?;
                child(f, x, 4)
            }
            Formula::Box(x) => {
                f.write_str("[]")?;
                child(f, x, 4)
            }
            Formula::Diamond(x) => {
                f.write_str("<>")?;
                child(f, x, 4)
            }
            Formula::And(a, b) => {
                child(f, a, 3)?;
                f.write_str(" & ")?;
                child(f, b, 4)
            }
            Formula::Or(a, b) => {
                child(f, a, 2)?;
                f.write_str(" | ")?;
                child(f, b, 3)
            }
            Formula::Implies(a, b) => {
                child(f, a, 2)?;
                f.write_str(" -> ")?;
                child(f, b, 1)
            }
        }
    }
}
