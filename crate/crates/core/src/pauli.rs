//! Observables as weighted sums of Pauli strings.
//!
//! A Hamiltonian is decomposed as H = Σ_k c_k · P_k where each P_k is a
//! tensor product of single-qubit Pauli operators.  Terms are partitioned
//! into qubit-wise commuting groups so that each group can be measured with
//! single-qubit basis rotations, and each group carries a sampling
//! probability proportional to its coefficient weight.

use std::collections::HashMap;
use std::io::Read;

use serde::Deserialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ObservableError {
    #[error("observable has no terms")]
    Empty,
    #[error("observable has no measurable (non-identity) terms")]
    NoMeasurableTerms,
    #[error("pauli string length {found} does not match qubit count {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("invalid pauli letter '{0}' (expected I, X, Y or Z)")]
    InvalidLetter(char),
    #[error("qubit count must be at least {min}, got {got}")]
    TooFewQubits { min: usize, got: usize },
    #[error("transverse-field Ising model requires nonzero J and g")]
    DegenerateTfim,
    #[error("malformed observable document: {0}")]
    Malformed(String),
}

/// Single-qubit Pauli operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Result<Self, ObservableError> {
        match c {
            'I' => Ok(Pauli::I),
            'X' => Ok(Pauli::X),
            'Y' => Ok(Pauli::Y),
            'Z' => Ok(Pauli::Z),
            other => Err(ObservableError::InvalidLetter(other)),
        }
    }

    pub fn to_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }
}

/// A tensor product of Pauli operators, one letter per qubit.
///
/// Letter `k` acts on qubit `k` (qubit 0 is the least significant bit of a
/// basis-state index).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PauliString {
    letters: Vec<Pauli>,
}

impl PauliString {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Self { letters }
    }

    /// Parse a string like `"ZZI"` into a Pauli string.
    pub fn parse(s: &str) -> Result<Self, ObservableError> {
        let letters = s.chars().map(Pauli::from_char).collect::<Result<_, _>>()?;
        Ok(Self { letters })
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    /// Qubit-wise commutation: at each position the letters are equal or at
    /// least one of them is the identity.
    pub fn qubitwise_commutes(&self, other: &PauliString) -> bool {
        self.letters
            .iter()
            .zip(&other.letters)
            .all(|(&a, &b)| a == Pauli::I || b == Pauli::I || a == b)
    }
}

impl std::fmt::Display for PauliString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for p in &self.letters {
            write!(f, "{}", p.to_char())?;
        }
        Ok(())
    }
}

/// One weighted Pauli term.
#[derive(Debug, Clone, PartialEq)]
pub struct Term {
    pub coeff: f64,
    pub string: PauliString,
}

impl Term {
    pub fn new(coeff: f64, string: PauliString) -> Self {
        Self { coeff, string }
    }
}

/// How an observable is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ObservableKind {
    /// Sum of Pauli terms measured group by group.
    PauliSum,
    /// I − |0…0⟩⟨0…0|: a computational-basis measurement where a shot
    /// yields 0 on the all-zeros bitstring and 1 otherwise.
    ZeroProjector,
}

/// A weighted Pauli-term sum with a qubit-wise-commuting group partition.
///
/// Immutable after construction.  All-identity terms are folded into
/// `constant`: they contribute to exact expectations but are never measured.
#[derive(Debug, Clone)]
pub struct Observable {
    n: usize,
    kind: ObservableKind,
    terms: Vec<Term>,
    constant: f64,
    groups: Vec<Vec<usize>>,
    group_probs: Vec<f64>,
}

impl Observable {
    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> ObservableKind {
        self.kind
    }

    /// Measurable (non-identity) terms.
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    /// Coefficient of the all-identity component.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    pub fn n_groups(&self) -> usize {
        self.groups.len()
    }

    pub fn group_probs(&self) -> &[f64] {
        &self.group_probs
    }

    /// Σ|c_i| over all terms including the identity component.
    pub fn one_norm(&self) -> f64 {
        self.one_norm_bound(true)
    }

    /// Σ|c_i|, optionally excluding the identity component.  Upper bounds
    /// the spectral norm of the observable when the constant is included.
    pub fn one_norm_bound(&self, include_identity: bool) -> f64 {
        match self.kind {
            ObservableKind::ZeroProjector => 1.0,
            ObservableKind::PauliSum => {
                let base: f64 = self.terms.iter().map(|t| t.coeff.abs()).sum();
                if include_identity {
                    base + self.constant.abs()
                } else {
                    base
                }
            }
        }
    }

    /// The measurement basis letter of each qubit for group `j`: the unique
    /// non-identity letter appearing at that position, or I when every term
    /// in the group acts trivially there.
    pub fn group_basis(&self, j: usize) -> Vec<Pauli> {
        let mut basis = vec![Pauli::I; self.n];
        for &idx in &self.groups[j] {
            for (q, &p) in self.terms[idx].string.letters().iter().enumerate() {
                if p != Pauli::I {
                    basis[q] = p;
                }
            }
        }
        basis
    }

    fn from_grouped(
        n: usize,
        kind: ObservableKind,
        terms: Vec<Term>,
        constant: f64,
        groups: Vec<Vec<usize>>,
    ) -> Self {
        let total: f64 = terms.iter().map(|t| t.coeff.abs()).sum();
        let group_probs = groups
            .iter()
            .map(|g| g.iter().map(|&i| terms[i].coeff.abs()).sum::<f64>() / total)
            .collect();
        Self {
            n,
            kind,
            terms,
            constant,
            groups,
            group_probs,
        }
    }
}

/// Greedy qubit-wise-commuting grouping.
///
/// Terms are visited in descending |coefficient| order (ties keep input
/// order); each joins the first existing group it commutes with qubit-wise,
/// otherwise it starts a new group.
pub fn group_qubitwise(terms: Vec<Term>) -> Result<Observable, ObservableError> {
    if terms.is_empty() {
        return Err(ObservableError::Empty);
    }
    let n = terms[0].string.len();
    for t in &terms {
        if t.string.len() != n {
            return Err(ObservableError::LengthMismatch {
                expected: n,
                found: t.string.len(),
            });
        }
    }

    let mut constant = 0.0;
    let mut measurable = Vec::new();
    for t in terms {
        if t.string.is_identity() {
            constant += t.coeff;
        } else {
            measurable.push(t);
        }
    }
    if measurable.is_empty() {
        return Err(ObservableError::NoMeasurableTerms);
    }

    let mut order: Vec<usize> = (0..measurable.len()).collect();
    order.sort_by(|&a, &b| {
        measurable[b]
            .coeff
            .abs()
            .partial_cmp(&measurable[a].coeff.abs())
            .unwrap()
    });

    let mut groups: Vec<Vec<usize>> = Vec::new();
    for idx in order {
        let string = &measurable[idx].string;
        let slot = groups.iter_mut().find(|g| {
            g.iter()
                .all(|&m| string.qubitwise_commutes(&measurable[m].string))
        });
        match slot {
            Some(g) => g.push(idx),
            None => groups.push(vec![idx]),
        }
    }

    Ok(Observable::from_grouped(
        n,
        ObservableKind::PauliSum,
        measurable,
        constant,
        groups,
    ))
}

/// Transverse-field Ising chain with open boundaries:
/// H = −J Σ Z_i Z_{i+1} − g Σ X_i, grouped as {all ZZ}, {all X}.
pub fn build_tfim(n: usize, j: f64, g: f64) -> Result<Observable, ObservableError> {
    if n < 2 {
        return Err(ObservableError::TooFewQubits { min: 2, got: n });
    }
    if j == 0.0 || g == 0.0 {
        return Err(ObservableError::DegenerateTfim);
    }
    let mut terms = Vec::new();
    for i in 0..n - 1 {
        let mut letters = vec![Pauli::I; n];
        letters[i] = Pauli::Z;
        letters[i + 1] = Pauli::Z;
        terms.push(Term::new(-j, PauliString::new(letters)));
    }
    for i in 0..n {
        let mut letters = vec![Pauli::I; n];
        letters[i] = Pauli::X;
        terms.push(Term::new(-g, PauliString::new(letters)));
    }
    let groups = vec![(0..n - 1).collect(), (n - 1..2 * n - 1).collect()];
    Ok(Observable::from_grouped(
        n,
        ObservableKind::PauliSum,
        terms,
        0.0,
        groups,
    ))
}

/// Cost observable for state compilation: I − |0…0⟩⟨0…0|, measured directly
/// in the computational basis as a Bernoulli outcome per shot.
pub fn build_projector_cost(n: usize) -> Result<Observable, ObservableError> {
    if n < 1 {
        return Err(ObservableError::TooFewQubits { min: 1, got: n });
    }
    Ok(Observable {
        n,
        kind: ObservableKind::ZeroProjector,
        terms: Vec::new(),
        constant: 0.0,
        groups: vec![Vec::new()],
        group_probs: vec![1.0],
    })
}

#[derive(Deserialize)]
struct TermDoc {
    coeff: f64,
    pauli: String,
}

#[derive(Deserialize)]
struct ObservableDoc {
    n_qubits: usize,
    terms: Vec<TermDoc>,
}

/// Load an observable from a JSON document of the form
/// `{"n_qubits": n, "terms": [{"coeff": c, "pauli": "XYZ…"}, …]}`.
///
/// Duplicate Pauli strings are merged by coefficient addition before
/// grouping; exact zero coefficients after merging are dropped.
pub fn load_observable<R: Read>(reader: R) -> Result<Observable, ObservableError> {
    let doc: ObservableDoc =
        serde_json::from_reader(reader).map_err(|e| ObservableError::Malformed(e.to_string()))?;
    let mut merged: Vec<Term> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for td in doc.terms {
        let string = PauliString::parse(&td.pauli)?;
        if string.len() != doc.n_qubits {
            return Err(ObservableError::LengthMismatch {
                expected: doc.n_qubits,
                found: string.len(),
            });
        }
        match seen.get(&td.pauli) {
            Some(&i) => merged[i].coeff += td.coeff,
            None => {
                seen.insert(td.pauli.clone(), merged.len());
                merged.push(Term::new(td.coeff, string));
            }
        }
    }
    merged.retain(|t| t.coeff != 0.0 || t.string.is_identity());
    group_qubitwise(merged)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn term(c: f64, s: &str) -> Term {
        Term::new(c, PauliString::parse(s).unwrap())
    }

    #[test]
    fn greedy_grouping_matches_hand_rule() {
        let obs = group_qubitwise(vec![term(1.0, "ZZ"), term(0.5, "ZI"), term(0.8, "XX")]).unwrap();
        assert_eq!(obs.n_groups(), 2);
        // ZZ (1.0) first, XX (0.8) starts a new group, ZI (0.5) joins the ZZ group.
        assert_eq!(obs.groups()[0], vec![0, 1]);
        assert_eq!(obs.groups()[1], vec![2]);
        let p = obs.group_probs();
        assert!((p[0] - 1.5 / 2.3).abs() < 1e-12);
        assert!((p[1] - 0.8 / 2.3).abs() < 1e-12);
    }

    #[test]
    fn singleton_term() {
        let obs = group_qubitwise(vec![term(2.0, "Z")]).unwrap();
        assert_eq!(obs.n_groups(), 1);
        assert_eq!(obs.group_probs(), &[1.0]);
    }

    #[test]
    fn x_and_z_on_same_qubit_do_not_commute_qubitwise() {
        let obs = group_qubitwise(vec![term(1.0, "XI"), term(1.0, "ZI")]).unwrap();
        assert_eq!(obs.n_groups(), 2);
    }

    #[test]
    fn grouping_rejects_bad_input() {
        assert!(matches!(
            group_qubitwise(vec![]),
            Err(ObservableError::Empty)
        ));
        assert!(matches!(
            group_qubitwise(vec![term(1.0, "Z"), term(1.0, "ZZ")]),
            Err(ObservableError::LengthMismatch { .. })
        ));
    }

    #[test]
    fn one_norm_examples() {
        let obs = build_tfim(2, 1.0, 1.5).unwrap();
        assert_eq!(obs.one_norm(), 4.0);
        let obs = group_qubitwise(vec![term(1.0, "Z")]).unwrap();
        assert_eq!(obs.one_norm(), 1.0);
        let obs = group_qubitwise(vec![term(-0.5, "XX"), term(0.5, "YY")]).unwrap();
        assert_eq!(obs.one_norm(), 1.0);
    }

    #[test]
    fn identity_term_folds_into_constant() {
        let obs = group_qubitwise(vec![term(0.25, "II"), term(1.0, "ZZ")]).unwrap();
        assert_eq!(obs.constant(), 0.25);
        assert_eq!(obs.terms().len(), 1);
        assert_eq!(obs.one_norm(), 1.25);
        assert_eq!(obs.one_norm_bound(false), 1.0);
    }

    #[test]
    fn tfim_structure() {
        let obs = build_tfim(2, 1.0, 1.5).unwrap();
        assert_eq!(obs.terms().len(), 3);
        assert_eq!(obs.n_groups(), 2);

        let obs = build_tfim(6, 1.0, 1.5).unwrap();
        assert_eq!(obs.groups()[0].len(), 5);
        assert_eq!(obs.groups()[1].len(), 6);

        assert!(build_tfim(2, 1.0, 0.0).is_err());
        assert!(build_tfim(1, 1.0, 1.5).is_err());
    }

    #[test]
    fn load_merges_duplicates() {
        let doc = r#"{"n_qubits":1,"terms":[{"coeff":0.5,"pauli":"Z"},{"coeff":0.5,"pauli":"Z"}]}"#;
        let obs = load_observable(doc.as_bytes()).unwrap();
        assert_eq!(obs.terms().len(), 1);
        assert!((obs.terms()[0].coeff - 1.0).abs() < 1e-15);
    }

    #[test]
    fn load_rejects_invalid_documents() {
        assert!(load_observable(&b"not json"[..]).is_err());
        let bad_letter = r#"{"n_qubits":2,"terms":[{"coeff":1.0,"pauli":"ZB"}]}"#;
        assert!(matches!(
            load_observable(bad_letter.as_bytes()),
            Err(ObservableError::InvalidLetter('B'))
        ));
        let bad_len = r#"{"n_qubits":2,"terms":[{"coeff":1.0,"pauli":"Z"}]}"#;
        assert!(matches!(
            load_observable(bad_len.as_bytes()),
            Err(ObservableError::LengthMismatch { .. })
        ));
        let bad_coeff = r#"{"n_qubits":1,"terms":[{"coeff":"x","pauli":"Z"}]}"#;
        assert!(load_observable(bad_coeff.as_bytes()).is_err());
    }

    #[test]
    fn load_single_term() {
        let doc = r#"{"n_qubits":1,"terms":[{"coeff":1.0,"pauli":"Z"}]}"#;
        let obs = load_observable(doc.as_bytes()).unwrap();
        assert_eq!(obs.terms().len(), 1);
        assert_eq!(obs.n_qubits(), 1);
    }

    #[test]
    fn group_probs_are_a_distribution() {
        let obs = group_qubitwise(vec![
            term(0.3, "XY"),
            term(-1.2, "ZZ"),
            term(0.7, "ZI"),
            term(0.1, "YY"),
        ])
        .unwrap();
        let sum: f64 = obs.group_probs().iter().sum();
        assert!((sum - 1.0).abs() < 1e-12);
        assert!(obs.group_probs().iter().all(|&p| p >= 0.0));
        let mut all: Vec<usize> = obs.groups().iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..obs.terms().len()).collect::<Vec<_>>());
    }
}
