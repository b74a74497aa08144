use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{ModelError, Rational};

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() || c == '_' => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

macro_rules! ident_newtype {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(try_from = "String", into = "String")]
        pub struct $name(String);

        impl $name {
            pub fn new(name: &str) -> Result<Self, ModelError> {
                if is_ident(name) {
                    Ok($name(name.to_string()))
                } else {
                    Err(ModelError::InvalidIdent(name.to_string()))
                }
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl TryFrom<String> for $name {
            type Error = ModelError;
            fn try_from(s: String) -> Result<Self, ModelError> {
                $name::new(&s)
            }
        }

        impl From<$name> for String {
            fn from(id: $name) -> String {
                id.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }
    };
}

ident_newtype!(
    /// State name, `[A-Za-z_][A-Za-z0-9_]*`.
    StateId
);
ident_newtype!(
    /// Action label, same lexical class as [`StateId`].
    Label
);

/// Finitely supported probability distribution with exact weights.
///
/// Zero weights are never stored, so the key set is the support. Weights sum
/// to exactly one.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dist {
    weights: BTreeMap<StateId, Rational>,
}

impl Dist {
    /// Builds a distribution from `(state, weight)` entries. Zero entries are
    /// dropped; negative weights, repeated states, or a total other than one
    /// are rejected.
    pub fn new<I>(entries: I) -> Result<Self, ModelError>
    where
        I: IntoIterator<Item = (StateId, Rational)>,
    {
        let mut weights = BTreeMap::new();
        let mut total = Rational::zero();
        for (state, w) in entries {
            if w.is_negative() {
                return Err(ModelError::NegativeWeight { state: state.to_string() });
            }
            total += &w;
            if weights.contains_key(&state) {
                return Err(ModelError::DuplicateEntry { state: state.to_string() });
            }
            weights.insert(state, w);
        }
        if !total.is_one() {
            return Err(ModelError::NotNormalized { total });
        }
        weights.retain(|_, w| !w.is_zero());
        Ok(Dist { weights })
    }

    pub fn dirac(state: StateId) -> Self {
        let mut weights = BTreeMap::new();
        weights.insert(state, Rational::one());
        Dist { weights }
    }

    /// Caller guarantees nonnegative weights summing to one.
    pub(crate) fn from_map_unchecked(mut weights: BTreeMap<StateId, Rational>) -> Self {
        weights.retain(|_, w| !w.is_zero());
        debug_assert!(weights.values().sum::<Rational>().is_one());
        Dist { weights }
    }

    /// Normalizes a nonnegative mass vector with positive total.
    pub fn normalized(mass: &BTreeMap<StateId, Rational>) -> Option<Self> {
        let total: Rational = mass.values().sum();
        if !total.is_positive() || mass.values().any(Rational::is_negative) {
            return None;
        }
        Some(Dist::from_map_unchecked(
            mass.iter().map(|(s, w)| (s.clone(), w / &total)).collect(),
        ))
    }

    /// Parses a distribution literal `s1:p1,s2:p2,...`; a bare state name is
    /// the Dirac distribution on it.
    pub fn parse_literal(text: &str) -> Result<Self, ModelError> {
        let text = text.trim();
        if !text.contains(':') {
            return Ok(Dist::dirac(StateId::new(text)?));
        }
        let mut entries = Vec::new();
        for entry in text.split(',') {
            let (state, weight) = entry.split_once(':').ok_or_else(|| ModelError::Parse {
                line: 0,
                message: format!("expected `state:weight`, found `{}`", entry.trim()),
            })?;
            let state = StateId::new(state.trim())?;
            let weight: Rational = weight.trim().parse().map_err(|e| ModelError::Parse {
                line: 0,
                message: format!("{e}"),
            })?;
            entries.push((state, weight));
        }
        Dist::new(entries)
    }

    pub fn weight(&self, state: &StateId) -> Rational {
        self.weights.get(state).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn get(&self, state: &StateId) -> Option<&Rational> {
        self.weights.get(state)
    }

    pub fn support(&self) -> impl Iterator<Item = &StateId> + '_ {
        self.weights.keys()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&StateId, &Rational)> + '_ {
        self.weights.iter()
    }

    pub fn weights(&self) -> &BTreeMap<StateId, Rational> {
        &self.weights
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    pub fn contains(&self, state: &StateId) -> bool {
        self.weights.contains_key(state)
    }

    /// True iff the support is contained in the support of `other`.
    pub fn support_within(&self, other: &Dist) -> bool {
        self.weights.keys().all(|s| other.contains(s))
    }

    pub fn is_dirac(&self) -> bool {
        self.weights.len() == 1
    }
}

impl fmt::Display for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (s, w)) in self.weights.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{s}:{w}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Dist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{self}}}")
    }
}

/// Adds `coef * dist` into a raw mass vector.
pub(crate) fn accumulate(acc: &mut BTreeMap<StateId, Rational>, coef: &Rational, dist: &Dist) {
    if coef.is_zero() {
        return;
    }
    for (s, w) in dist.iter() {
        *acc.entry(s.clone()).or_insert_with(Rational::zero) += coef * w;
    }
}

/// The n-ary convex combination `Σ p_i · φ_i` of the free convex algebra on
/// distributions.
pub fn convex_combine(coefficients: &[Rational], dists: &[Dist]) -> Result<Dist, ModelError> {
    if coefficients.len() != dists.len() || dists.is_empty() {
        return Err(ModelError::Arity {
            expected: dists.len(),
            found: coefficients.len(),
        });
    }
    check_convex(coefficients)?;
    let mut acc = BTreeMap::new();
    for (p, d) in coefficients.iter().zip(dists) {
        accumulate(&mut acc, p, d);
    }
    Ok(Dist::from_map_unchecked(acc))
}

/// Checks that coefficients are nonnegative and sum to one.
pub fn check_convex(coefficients: &[Rational]) -> Result<(), ModelError> {
    if let Some(p) = coefficients.iter().find(|p| p.is_negative()) {
        return Err(ModelError::Coefficient(format!("negative coefficient {p}")));
    }
    let total: Rational = coefficients.iter().sum();
    if !total.is_one() {
        return Err(ModelError::Coefficient(format!("coefficients sum to {total}, not 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(text: &str) -> Dist {
        Dist::parse_literal(text).unwrap()
    }

    fn r(n: i64, m: i64) -> Rational {
        Rational::new(n, m)
    }

    #[test]
    fn ident_validation() {
        assert!(StateId::new("x_0").is_ok());
        assert!(StateId::new("_a9").is_ok());
        assert!(StateId::new("0x").is_err());
        assert!(StateId::new("").is_err());
        assert!(Label::new("a-b").is_err());
    }

    #[test]
    fn midpoint_of_diracs() {
        let out = convex_combine(&[r(1, 2), r(1, 2)], &[d("y1"), d("y2")]).unwrap();
        assert_eq!(out, d("y1:1/2,y2:1/2"));
    }

    #[test]
    fn projection_drops_zero_weight_argument() {
        let phi = d("a:1/3,b:2/3");
        let psi = d("c:1");
        let out = convex_combine(&[r(0, 1), r(1, 1)], &[phi, psi.clone()]).unwrap();
        assert_eq!(out, psi);
        assert_eq!(out.support_len(), 1);
    }

    #[test]
    fn ternary_equals_nested_binary() {
        let three = convex_combine(&[r(1, 3), r(1, 3), r(1, 3)], &[d("a"), d("b"), d("c")]).unwrap();
        let inner = convex_combine(&[r(1, 2), r(1, 2)], &[d("a"), d("b")]).unwrap();
        let nested = convex_combine(&[r(2, 3), r(1, 3)], &[inner, d("c")]).unwrap();
        assert_eq!(three, nested);
        assert_eq!(three, d("a:1/3,b:1/3,c:1/3"));
    }

    #[test]
    fn combine_errors() {
        assert!(matches!(
            convex_combine(&[r(1, 2), r(1, 4)], &[d("a"), d("b")]),
            Err(ModelError::Coefficient(_))
        ));
        assert!(matches!(
            convex_combine(&[r(1, 1)], &[d("a"), d("b")]),
            Err(ModelError::Arity { .. })
        ));
        assert!(matches!(
            convex_combine(&[r(3, 2), r(-1, 2)], &[d("a"), d("b")]),
            Err(ModelError::Coefficient(_))
        ));
    }

    #[test]
    fn literal_parsing() {
        assert_eq!(d("x1").to_string(), "x1:1");
        assert_eq!(d(" x2:1/2 , x1:1/2 ").to_string(), "x1:1/2,x2:1/2");
        assert!(matches!(
            Dist::parse_literal("x1:1/2"),
            Err(ModelError::NotNormalized { .. })
        ));
        assert!(matches!(
            Dist::parse_literal("x1:1/2,x1:1/2"),
            Err(ModelError::DuplicateEntry { .. })
        ));
        assert!(Dist::parse_literal("x1:1/2,x2:").is_err());
        assert_eq!(d("x1:1,x2:0").support_len(), 1);
    }
}
