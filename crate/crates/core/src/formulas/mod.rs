//! Formula ASTs in negation normal form, spanning plain modal logic and its
//! team-semantics extensions: inclusion atoms (`[.. <= ..]`), the
//! nonemptiness operator (`nab`), and nonempty disjunction (`|!`).
//!
//! Concrete syntax (ASCII):
//!
//! ```text
//! atom     := IDENT | "~" IDENT | "top" | "bot"
//! unary    := "dia" f | "box" f | "nab" f
//! incl     := "[" f ("," f)* "<=" f ("," f)* "]"
//! binary   := f "&" f | f "|" f | f "|!" f
//! ```
//!
//! Precedence: unary > `&` > `|` = `|!`; all binary operators are
//! left-associative and parentheses override. `IDENT` matches
//! `[a-zA-Z_][a-zA-Z0-9_]*` and may not be one of the keywords `dia`,
//! `box`, `nab`, `top`, `bot`.

mod parse;

use std::fmt;

use thiserror::Error;

pub use parse::{parse, ParseError, ParseErrorKind};

/// Reserved words of the concrete syntax.
pub const KEYWORDS: [&str; 5] = ["dia", "box", "nab", "top", "bot"];

/// A proposition symbol. The name is a nonempty identifier and not a keyword.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PropSymbol(String);

impl PropSymbol {
    pub fn new(name: impl Into<String>) -> Result<Self, FormulaError> {
        let name = name.into();
        if !is_identifier(&name) {
            return Err(FormulaError::BadPropName(name));
        }
        Ok(PropSymbol(name))
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PropSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

pub(crate) fn is_identifier(s: &str) -> bool {
    let mut chars = s.chars();
    let head_ok = matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_');
    head_ok
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !KEYWORDS.contains(&s)
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormulaError {
    #[error("`{0}` is not a valid proposition name")]
    BadPropName(String),
    #[error("inclusion atom sides have different arities ({lhs} vs {rhs})")]
    InclArityMismatch { lhs: usize, rhs: usize },
    #[error("inclusion atom sides must be nonempty")]
    InclEmpty,
    #[error("inclusion atom arguments must be plain modal-logic formulas")]
    InclArgNotMl,
    #[error("formula contains an inclusion atom")]
    InclusionPresent,
}

/// A formula in negation normal form.
///
/// `Top` and `Bot` are primitive constants: `Top` holds in every team and
/// `Bot` holds exactly in the empty team. Negation appears only on
/// proposition symbols. Inclusion atoms carry two equal-length nonempty
/// argument lists whose members are plain `ML` formulas (no nesting of
/// inclusion atoms, no `nab`, no `|!`).
///
/// The derived `Ord` is the canonical structural order used wherever
/// generated conjunctions and disjunctions are sorted; negative literals
/// sort before positive ones.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    Top,
    Bot,
    NegProp(PropSymbol),
    Prop(PropSymbol),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    /// Nonempty disjunction `|!`: both disjuncts need a nonempty witness
    /// unless the whole team is empty.
    NeDisj(Box<Formula>, Box<Formula>),
    Dia(Box<Formula>),
    Box(Box<Formula>),
    /// Nonemptiness operator `nab`: the team is empty or some nonempty
    /// subteam satisfies the argument.
    Nab(Box<Formula>),
    /// Inclusion atom `[lhs_1,..,lhs_n <= rhs_1,..,rhs_n]`.
    Incl(Vec<Formula>, Vec<Formula>),
}

/// The least syntactic dialect a formula belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dialect {
    /// Plain modal logic: no inclusion atoms, no `nab`, no `|!`.
    Ml,
    /// Modal inclusion logic: inclusion atoms allowed, no `nab`/`|!`.
    Minc,
    /// Modal logic with the nonemptiness operator: `nab` allowed.
    MlNab,
    /// Modal logic with nonempty disjunction: `|!` allowed.
    MlNeDisj,
    /// More than one extension present.
    Mixed,
}

impl fmt::Display for Dialect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Dialect::Ml => "ML",
            Dialect::Minc => "MINC",
            Dialect::MlNab => "ML(nab)",
            Dialect::MlNeDisj => "ML(|!)",
            Dialect::Mixed => "mixed",
        };
        f.write_str(s)
    }
}

impl Dialect {
    /// Dialects whose satisfying-team families are closed under unions.
    pub fn is_union_closed(self) -> bool {
        !matches!(self, Dialect::Mixed)
    }
}

impl Formula {
    pub fn prop(name: &str) -> Formula {
        Formula::Prop(PropSymbol::new(name).expect("valid proposition name"))
    }

    pub fn negprop(name: &str) -> Formula {
        Formula::NegProp(PropSymbol::new(name).expect("valid proposition name"))
    }

    pub fn and(lhs: Formula, rhs: Formula) -> Formula {
        Formula::And(Box::new(lhs), Box::new(rhs))
    }

    pub fn or(lhs: Formula, rhs: Formula) -> Formula {
        Formula::Or(Box::new(lhs), Box::new(rhs))
    }

    pub fn nedisj(lhs: Formula, rhs: Formula) -> Formula {
        Formula::NeDisj(Box::new(lhs), Box::new(rhs))
    }

    pub fn dia(inner: Formula) -> Formula {
        Formula::Dia(Box::new(inner))
    }

    pub fn box_(inner: Formula) -> Formula {
        Formula::Box(Box::new(inner))
    }

    pub fn nab(inner: Formula) -> Formula {
        Formula::Nab(Box::new(inner))
    }

    /// Builds an inclusion atom, enforcing equal nonempty arity and plain-ML
    /// arguments.
    pub fn incl(lhs: Vec<Formula>, rhs: Vec<Formula>) -> Result<Formula, FormulaError> {
        if lhs.is_empty() || rhs.is_empty() {
            return Err(FormulaError::InclEmpty);
        }
        if lhs.len() != rhs.len() {
            return Err(FormulaError::InclArityMismatch {
                lhs: lhs.len(),
                rhs: rhs.len(),
            });
        }
        if lhs.iter().chain(rhs.iter()).any(|f| !f.is_pure_ml()) {
            return Err(FormulaError::InclArgNotMl);
        }
        Ok(Formula::Incl(lhs, rhs))
    }

    /// Conjunction of a list; the empty conjunction is `Top`.
    pub fn big_and(parts: Vec<Formula>) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::Top,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of a list; the empty disjunction is `Bot`.
    pub fn big_or(parts: Vec<Formula>) -> Formula {
        let mut it = parts.into_iter();
        match it.next() {
            None => Formula::Bot,
            Some(first) => it.fold(first, Formula::or),
        }
    }

    /// Child subformulas in positional order. For inclusion atoms the
    /// left-hand arguments come first, then the right-hand ones.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::Top | Formula::Bot | Formula::Prop(_) | Formula::NegProp(_) => Vec::new(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::NeDisj(a, b) => vec![a, b],
            Formula::Dia(a) | Formula::Box(a) | Formula::Nab(a) => vec![a],
            Formula::Incl(lhs, rhs) => lhs.iter().chain(rhs.iter()).collect(),
        }
    }

    /// Modal depth: nesting depth of `dia`/`box`. `nab` adds nothing and an
    /// inclusion atom has the maximum depth of its arguments.
    pub fn modal_depth(&self) -> u32 {
        match self {
            Formula::Top | Formula::Bot | Formula::Prop(_) | Formula::NegProp(_) => 0,
            Formula::And(a, b) | Formula::Or(a, b) | Formula::NeDisj(a, b) => {
                a.modal_depth().max(b.modal_depth())
            }
            Formula::Dia(a) | Formula::Box(a) => a.modal_depth() + 1,
            Formula::Nab(a) => a.modal_depth(),
            Formula::Incl(lhs, rhs) => lhs
                .iter()
                .chain(rhs.iter())
                .map(Formula::modal_depth)
                .max()
                .unwrap_or(0),
        }
    }

    /// Number of `nab` occurrences in the syntax tree.
    pub fn occ_nabla(&self) -> usize {
        let own = usize::from(matches!(self, Formula::Nab(_)));
        own + self.children().iter().map(|c| c.occ_nabla()).sum::<usize>()
    }

    /// Number of nodes in the syntax tree.
    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub fn contains_incl(&self) -> bool {
        matches!(self, Formula::Incl(..)) || self.children().iter().any(|c| c.contains_incl())
    }

    pub fn contains_nab(&self) -> bool {
        matches!(self, Formula::Nab(_)) || self.children().iter().any(|c| c.contains_nab())
    }

    pub fn contains_nedisj(&self) -> bool {
        matches!(self, Formula::NeDisj(..)) || self.children().iter().any(|c| c.contains_nedisj())
    }

    /// True for plain `ML` formulas (also admitting `top`/`bot`).
    pub fn is_pure_ml(&self) -> bool {
        !self.contains_incl() && !self.contains_nab() && !self.contains_nedisj()
    }

    /// The least dialect admitting this formula.
    pub fn dialect(&self) -> Dialect {
        match (
            self.contains_incl(),
            self.contains_nab(),
            self.contains_nedisj(),
        ) {
            (false, false, false) => Dialect::Ml,
            (true, false, false) => Dialect::Minc,
            (false, true, false) => Dialect::MlNab,
            (false, false, true) => Dialect::MlNeDisj,
            _ => Dialect::Mixed,
        }
    }

    /// All occurrence positions of the syntax tree in preorder.
    pub fn positions(&self) -> Vec<Position> {
        let mut out = Vec::with_capacity(self.node_count());
        let mut path = Vec::new();
        collect_positions(self, &mut path, &mut out);
        out
    }

    /// The subformula occurrence addressed by `pos`, if any.
    pub fn subformula_at(&self, pos: &Position) -> Option<&Formula> {
        let mut node = self;
        for &step in &pos.0 {
            node = *node.children().get(step as usize)?;
        }
        Some(node)
    }

    /// Replaces every `nab t` by `t |! top`, bottom-up. The input must not
    /// contain inclusion atoms.
    pub fn nabla_to_nedis(&self) -> Result<Formula, FormulaError> {
        if self.contains_incl() {
            return Err(FormulaError::InclusionPresent);
        }
        Ok(self.map_no_incl(&|f| match f {
            Formula::Nab(a) => Formula::nedisj(*a, Formula::Top),
            other => other,
        }))
    }

    /// Replaces every `t |! u` by `(t | u) & (nab t & nab u)`, bottom-up.
    /// The input must not contain inclusion atoms.
    pub fn nedis_to_nabla(&self) -> Result<Formula, FormulaError> {
        if self.contains_incl() {
            return Err(FormulaError::InclusionPresent);
        }
        Ok(self.map_no_incl(&|f| match f {
            Formula::NeDisj(a, b) => Formula::and(
                Formula::or((*a).clone(), (*b).clone()),
                Formula::and(Formula::Nab(a), Formula::Nab(b)),
            ),
            other => other,
        }))
    }

    /// Bottom-up rewriting for inclusion-free formulas: children are rewritten
    /// first, then `op` is applied to the rebuilt node.
    fn map_no_incl(&self, op: &impl Fn(Formula) -> Formula) -> Formula {
        let rebuilt = match self {
            Formula::Top => Formula::Top,
            Formula::Bot => Formula::Bot,
            Formula::Prop(p) => Formula::Prop(p.clone()),
            Formula::NegProp(p) => Formula::NegProp(p.clone()),
            Formula::And(a, b) => Formula::and(a.map_no_incl(op), b.map_no_incl(op)),
            Formula::Or(a, b) => Formula::or(a.map_no_incl(op), b.map_no_incl(op)),
            Formula::NeDisj(a, b) => Formula::nedisj(a.map_no_incl(op), b.map_no_incl(op)),
            Formula::Dia(a) => Formula::dia(a.map_no_incl(op)),
            Formula::Box(a) => Formula::box_(a.map_no_incl(op)),
            Formula::Nab(a) => Formula::nab(a.map_no_incl(op)),
            Formula::Incl(..) => unreachable!("checked by callers"),
        };
        op(rebuilt)
    }
}

fn collect_positions(f: &Formula, path: &mut Vec<u16>, out: &mut Vec<Position>) {
    out.push(Position(path.clone()));
    for (i, child) in f.children().into_iter().enumerate() {
        path.push(i as u16);
        collect_positions(child, path, out);
        path.pop();
    }
}

/// An occurrence position in a formula tree: the sequence of child indices
/// from the root. Two equal subformulas at different occurrences have
/// distinct positions.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Position(Vec<u16>);

impl Position {
    pub fn root() -> Position {
        Position(Vec::new())
    }

    pub fn child(&self, index: u16) -> Position {
        let mut path = self.0.clone();
        path.push(index);
        Position(path)
    }

    pub fn is_root(&self) -> bool {
        self.0.is_empty()
    }

    pub fn steps(&self) -> &[u16] {
        &self.0
    }

    /// Parses a dot-separated path; the empty string is the root.
    pub fn parse(s: &str) -> Option<Position> {
        if s.is_empty() {
            return Some(Position::root());
        }
        let steps = s
            .split('.')
            .map(|part| part.parse::<u16>().ok())
            .collect::<Option<Vec<_>>>()?;
        Some(Position(steps))
    }
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for step in &self.0 {
            if !first {
                f.write_str(".")?;
            }
            write!(f, "{step}")?;
            first = false;
        }
        Ok(())
    }
}

// Canonical printing. Binary children are parenthesized unless they are the
// left child with the same connective, so `a | b | c` stays flat while
// `p | (q & r)` keeps its shape explicit. Unary operators parenthesize
// binary arguments only.
impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, f)
    }
}

fn binary_op(f: &Formula) -> Option<&'static str> {
    match f {
        Formula::And(..) => Some("&"),
        Formula::Or(..) => Some("|"),
        Formula::NeDisj(..) => Some("|!"),
        _ => None,
    }
}

fn write_formula(f: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    match f {
        Formula::Top => out.write_str("top"),
        Formula::Bot => out.write_str("bot"),
        Formula::Prop(p) => write!(out, "{p}"),
        Formula::NegProp(p) => write!(out, "~{p}"),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::NeDisj(a, b) => {
            let op = binary_op(f).unwrap();
            write_binary_child(a, Some(op), out)?;
            write!(out, " {op} ")?;
            write_binary_child(b, None, out)
        }
        Formula::Dia(a) => {
            out.write_str("dia ")?;
            write_unary_child(a, out)
        }
        Formula::Box(a) => {
            out.write_str("box ")?;
            write_unary_child(a, out)
        }
        Formula::Nab(a) => {
            out.write_str("nab ")?;
            write_unary_child(a, out)
        }
        Formula::Incl(lhs, rhs) => {
            out.write_str("[")?;
            write_list(lhs, out)?;
            out.write_str(" <= ")?;
            write_list(rhs, out)?;
            out.write_str("]")
        }
    }
}

fn write_list(items: &[Formula], out: &mut fmt::Formatter<'_>) -> fmt::Result {
    for (i, item) in items.iter().enumerate() {
        if i > 0 {
            out.write_str(",")?;
        }
        write_formula(item, out)?;
    }
    Ok(())
}

fn write_binary_child(
    child: &Formula,
    parent_op_if_left: Option<&str>,
    out: &mut fmt::Formatter<'_>,
) -> fmt::Result {
    let needs_parens = match binary_op(child) {
        Some(child_op) => parent_op_if_left != Some(child_op),
        None => false,
    };
    if needs_parens {
        out.write_str("(")?;
        write_formula(child, out)?;
        out.write_str(")")
    } else {
        write_formula(child, out)
    }
}

fn write_unary_child(child: &Formula, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    if binary_op(child).is_some() {
        out.write_str("(")?;
        write_formula(child, out)?;
        out.write_str(")")
    } else {
        write_formula(child, out)
    }
}
