//! Truncated linear temporal logic formulas over named feature channels.
//!
//! A [`Formula`] is an immutable tree of temporal and Boolean operators whose
//! leaves are scalar [`Predicate`]s of the form `feature < c` or `feature > c`.
//! Predicates are bound to a [`FeatureSchema`] when parsed, so evaluation never
//! has to look names up again.
//!
//! The concrete text syntax is handled by [`parse`] and [`unparse`]; see the
//! [`parser`] module for the grammar and precedence table.

mod parser;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

pub use parser::{parse, parse_with_scales, unparse, ParseError, KEYWORDS};

/// Comparison direction of a predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Comparator {
    /// `feature < threshold`
    Lt,
    /// `feature > threshold`
    Gt,
}

impl Comparator {
    pub fn symbol(self) -> &'static str {
        match self {
            Comparator::Lt => "<",
            Comparator::Gt => ">",
        }
    }
}

/// A scalar comparison of one feature channel against a threshold.
///
/// `scale` multiplies the predicate's robustness so that channels measured in
/// different units can be put on a common footing. It is always positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    feature: String,
    index: usize,
    comparator: Comparator,
    threshold: f64,
    scale: f64,
}

impl Predicate {
    /// Builds a predicate bound to `schema`. Fails if the feature is unknown,
    /// the threshold is not finite, or the scale is not a positive finite number.
    pub fn new(
        schema: &FeatureSchema,
        feature: &str,
        comparator: Comparator,
        threshold: f64,
        scale: f64,
    ) -> Result<Self, FormulaError> {
        let index = schema
            .index_of(feature)
            .ok_or_else(|| FormulaError::UnknownFeature(feature.to_string()))?;
        if !threshold.is_finite() {
            return Err(FormulaError::InvalidThreshold(threshold));
        }
        if !(scale.is_finite() && scale > 0.0) {
            return Err(FormulaError::InvalidScale(scale));
        }
        Ok(Predicate {
            feature: feature.to_string(),
            index,
            comparator,
            threshold,
            scale,
        })
    }

    pub fn feature(&self) -> &str {
        &self.feature
    }

    /// Column of the feature in the schema the predicate was bound to.
    pub fn index(&self) -> usize {
        self.index
    }

    pub fn comparator(&self) -> Comparator {
        self.comparator
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Signed margin of the comparison for one feature value, before clamping.
    pub fn margin(&self, value: f64) -> f64 {
        match self.comparator {
            Comparator::Lt => self.scale * (self.threshold - value),
            Comparator::Gt => self.scale * (value - self.threshold),
        }
    }

    /// Strict Boolean satisfaction for one feature value.
    pub fn holds(&self, value: f64) -> bool {
        match self.comparator {
            Comparator::Lt => value < self.threshold,
            Comparator::Gt => value > self.threshold,
        }
    }

    /// Same predicate with a different threshold.
    pub fn with_threshold(&self, threshold: f64) -> Self {
        Predicate {
            threshold,
            ..self.clone()
        }
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.feature,
            self.comparator.symbol(),
            parser::format_number(self.threshold)
        )
    }
}

/// Abstract syntax tree of a formula.
#[derive(Debug, Clone, PartialEq)]
pub enum Formula {
    True,
    Pred(Predicate),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Eventually(Box<Formula>),
    Always(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Then(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
}

#[allow(clippy::should_implement_trait)]
impl Formula {
    pub fn pred(p: Predicate) -> Self {
        Formula::Pred(p)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Self {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Self {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Self {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Formula) -> Self {
        Formula::Eventually(Box::new(f))
    }

    pub fn always(f: Formula) -> Self {
        Formula::Always(Box::new(f))
    }

    pub fn until(a: Formula, b: Formula) -> Self {
        Formula::Until(Box::new(a), Box::new(b))
    }

    pub fn then(a: Formula, b: Formula) -> Self {
        Formula::Then(Box::new(a), Box::new(b))
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    /// Conjunction of a non-empty list, folded to the left.
    pub fn all(parts: impl IntoIterator<Item = Formula>) -> Option<Self> {
        parts.into_iter().reduce(Formula::and)
    }

    /// Direct children, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::True | Formula::Pred(_) => Vec::new(),
            Formula::Not(a) | Formula::Eventually(a) | Formula::Always(a) | Formula::Next(a) => {
                vec![a]
            }
            Formula::And(a, b)
            | Formula::Or(a, b)
            | Formula::Implies(a, b)
            | Formula::Until(a, b)
            | Formula::Then(a, b) => vec![a, b],
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    /// Height of the tree; a leaf has depth 1.
    pub fn depth(&self) -> usize {
        1 + self
            .children()
            .into_iter()
            .map(Formula::depth)
            .max()
            .unwrap_or(0)
    }

    /// Post-order enumeration of every node: children precede parents and
    /// each node appears exactly once.
    pub fn subformulas(&self) -> Vec<&Formula> {
        let mut out = Vec::with_capacity(self.size());
        self.collect_post_order(&mut out);
        out
    }

    fn collect_post_order<'a>(&'a self, out: &mut Vec<&'a Formula>) {
        for child in self.children() {
            child.collect_post_order(out);
        }
        out.push(self);
    }

    /// Every predicate leaf, in post-order.
    pub fn predicates(&self) -> Vec<&Predicate> {
        self.subformulas()
            .into_iter()
            .filter_map(|f| match f {
                Formula::Pred(p) => Some(p),
                _ => None,
            })
            .collect()
    }

    /// Names of the features referenced by the formula, deduplicated in order
    /// of first appearance.
    pub fn features(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.predicates()
            .into_iter()
            .map(Predicate::feature)
            .filter(|name| seen.insert(*name))
            .collect()
    }

    /// Rebuilds the tree with every predicate passed through `f`.
    pub fn map_predicates(&self, f: &mut impl FnMut(&Predicate) -> Predicate) -> Formula {
        let mut go = |x: &Formula| Box::new(x.map_predicates(f));
        match self {
            Formula::True => Formula::True,
            Formula::Pred(p) => Formula::Pred(f(p)),
            Formula::Not(a) => Formula::Not(go(a)),
            Formula::Eventually(a) => Formula::Eventually(go(a)),
            Formula::Always(a) => Formula::Always(go(a)),
            Formula::Next(a) => Formula::Next(go(a)),
            Formula::And(a, b) => {
                let a = go(a);
                Formula::And(a, go(b))
            }
            Formula::Or(a, b) => {
                let a = go(a);
                Formula::Or(a, go(b))
            }
            Formula::Implies(a, b) => {
                let a = go(a);
                Formula::Implies(a, go(b))
            }
            Formula::Until(a, b) => {
                let a = go(a);
                Formula::Until(a, go(b))
            }
            Formula::Then(a, b) => {
                let a = go(a);
                Formula::Then(a, go(b))
            }
        }
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&unparse(self))
    }
}

/// Ordered, duplicate-free list of feature channel names.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    names: Vec<String>,
}

impl FeatureSchema {
    /// Names must be valid identifiers, distinct, and not reserved words.
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Result<Self, FormulaError> {
        let names: Vec<String> = names.into_iter().map(Into::into).collect();
        if names.is_empty() {
            return Err(FormulaError::EmptySchema);
        }
        let mut seen = HashSet::new();
        for name in &names {
            if !parser::is_identifier(name) || KEYWORDS.contains(&name.as_str()) {
                return Err(FormulaError::InvalidFeatureName(name.clone()));
            }
            if !seen.insert(name.as_str()) {
                return Err(FormulaError::DuplicateFeature(name.clone()));
            }
        }
        Ok(FeatureSchema { names })
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dimension(&self) -> usize {
        self.names.len()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FormulaError {
    #[error("unknown feature `{0}`")]
    UnknownFeature(String),
    #[error("predicate threshold must be finite, got {0}")]
    InvalidThreshold(f64),
    #[error("predicate scale must be positive and finite, got {0}")]
    InvalidScale(f64),
    #[error("feature schema must not be empty")]
    EmptySchema,
    #[error("`{0}` is not a usable feature name")]
    InvalidFeatureName(String),
    #[error("duplicate feature `{0}`")]
    DuplicateFeature(String),
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> FeatureSchema {
        FeatureSchema::new(["a", "b"]).unwrap()
    }

    fn pa() -> Formula {
        Formula::pred(Predicate::new(&schema(), "a", Comparator::Lt, 1.0, 1.0).unwrap())
    }

    fn pb() -> Formula {
        Formula::pred(Predicate::new(&schema(), "b", Comparator::Gt, 0.0, 1.0).unwrap())
    }

    #[test]
    fn subformulas_of_leaf() {
        let p = pa();
        assert_eq!(p.subformulas(), vec![&p]);
    }

    #[test]
    fn subformulas_of_conjunction() {
        let f = Formula::and(pa(), pb());
        assert_eq!(f.subformulas(), vec![&pa(), &pb(), &f]);
    }

    #[test]
    fn subformulas_of_double_negation() {
        let inner = Formula::not(pa());
        let f = Formula::not(inner.clone());
        assert_eq!(f.subformulas(), vec![&pa(), &inner, &f]);
        assert_eq!(f.size(), 3);
        assert_eq!(f.depth(), 3);
    }

    #[test]
    fn schema_rejects_bad_names() {
        assert_eq!(
            FeatureSchema::new(["x", "x"]),
            Err(FormulaError::DuplicateFeature("x".into()))
        );
        assert!(matches!(
            FeatureSchema::new(["F"]),
            Err(FormulaError::InvalidFeatureName(_))
        ));
        assert!(matches!(
            FeatureSchema::new(["1x"]),
            Err(FormulaError::InvalidFeatureName(_))
        ));
        assert_eq!(
            FeatureSchema::new(Vec::<String>::new()),
            Err(FormulaError::EmptySchema)
        );
    }

    #[test]
    fn predicate_rejects_bad_scale() {
        let s = schema();
        assert_eq!(
            Predicate::new(&s, "a", Comparator::Lt, 1.0, 0.0),
            Err(FormulaError::InvalidScale(0.0))
        );
        assert_eq!(
            Predicate::new(&s, "zz", Comparator::Lt, 1.0, 1.0),
            Err(FormulaError::UnknownFeature("zz".into()))
        );
    }

    #[test]
    fn predicate_margin_respects_scale() {
        let s = schema();
        let p = Predicate::new(&s, "a", Comparator::Gt, 2.0, 0.5).unwrap();
        assert_eq!(p.margin(4.0), 1.0);
        assert!(p.holds(4.0));
        assert!(!p.holds(2.0));
    }
}
