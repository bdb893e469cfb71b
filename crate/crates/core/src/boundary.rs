//! The integrable boundary family.
//!
//! A boundary is labelled by two rates `(a, c)` (`alpha, gamma` on the left,
//! `beta, delta` on the right) and four special species
//! `s1 <= s2 < f2 <= f1` with `f1 - f2 = s2 - s1`. The species split into five
//! classes, each with its own injection/extraction/transmutation rules.
//!
//! Two independent constructions of the left boundary matrix live here: a
//! block template ([`build_boundary`]) and an interpreter of the per-class
//! transition rules ([`build_boundary_by_rules`]). The template is the one the
//! rest of the crate uses; the interpreter exists to cross-check it.
//!
//! Right boundaries are defined by conjugating a left boundary with the
//! species-reversal permutation `U`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{reversal, QMat};
use crate::rational::Rat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

/// Behaviour of the intermediate species `s2 < t < f2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// Intermediate species never change at the boundary.
    Inert,
    /// Intermediate species decay to `s2` (rate `c~`) and `f2` (rate `a`).
    Decaying,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Variant::Inert => "inert",
            Variant::Decaying => "decaying",
        })
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Side::Left => "left",
            Side::Right => "right",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpeciesClass {
    VerySlow,
    Slow,
    Intermediate,
    Fast,
    VeryFast,
}

/// One member of the integrable boundary family.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "SpecRecord", into = "SpecRecord")]
pub struct BoundarySpec {
    side: Side,
    rate_a: Rat,
    rate_c: Rat,
    s1: usize,
    s2: usize,
    f2: usize,
    f1: usize,
    variant: Variant,
    n_species: usize,
}

#[derive(Serialize, Deserialize)]
struct SpecRecord {
    side: Side,
    a: Rat,
    c: Rat,
    s1: usize,
    s2: usize,
    f2: usize,
    f1: usize,
    variant: Variant,
    #[serde(rename = "N")]
    n: usize,
}

impl From<BoundarySpec> for SpecRecord {
    fn from(s: BoundarySpec) -> Self {
        SpecRecord {
            side: s.side,
            a: s.rate_a,
            c: s.rate_c,
            s1: s.s1,
            s2: s.s2,
            f2: s.f2,
            f1: s.f1,
            variant: s.variant,
            n: s.n_species,
        }
    }
}

impl TryFrom<SpecRecord> for BoundarySpec {
    type Error = Error;

    fn try_from(r: SpecRecord) -> Result<Self> {
        BoundarySpec::new(r.side, r.n, [r.s1, r.s2, r.f2, r.f1], r.variant, r.a, r.c)
    }
}

impl BoundarySpec {
    /// Validates the labels and rates. The variant is normalized to
    /// [`Variant::Inert`] when there are no intermediate species.
    pub fn new(
        side: Side,
        n_species: usize,
        [s1, s2, f2, f1]: [usize; 4],
        variant: Variant,
        rate_a: Rat,
        rate_c: Rat,
    ) -> Result<Self> {
        if n_species < 2 {
            return Err(Error::InvalidSpec(format!("N = {n_species} is below 2")));
        }
        if !(1 <= s1 && s1 <= s2 && s2 < f2 && f2 <= f1 && f1 <= n_species) {
            return Err(Error::InvalidSpec(format!(
                "labels ({s1},{s2},{f2},{f1}) violate 1 <= s1 <= s2 < f2 <= f1 <= {n_species}"
            )));
        }
        if f1 - f2 != s2 - s1 {
            return Err(Error::InvalidSpec(format!(
                "labels ({s1},{s2},{f2},{f1}) violate f1 - f2 = s2 - s1"
            )));
        }
        if rate_a.is_negative() || rate_c.is_negative() {
            return Err(Error::InvalidSpec(format!(
                "rates must be nonnegative, got a = {rate_a}, c = {rate_c}"
            )));
        }
        if (&rate_a + &rate_c).is_zero() {
            return Err(Error::DegenerateRates);
        }
        let variant = if f2 == s2 + 1 { Variant::Inert } else { variant };
        Ok(BoundarySpec {
            side,
            rate_a,
            rate_c,
            s1,
            s2,
            f2,
            f1,
            variant,
            n_species,
        })
    }

    /// Left boundary with unit rates.
    pub fn left_unit(n_species: usize, labels: [usize; 4], variant: Variant) -> Result<Self> {
        Self::new(Side::Left, n_species, labels, variant, Rat::one(), Rat::one())
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn rate_a(&self) -> &Rat {
        &self.rate_a
    }

    pub fn rate_c(&self) -> &Rat {
        &self.rate_c
    }

    pub fn labels(&self) -> [usize; 4] {
        [self.s1, self.s2, self.f2, self.f1]
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn n_species(&self) -> usize {
        self.n_species
    }

    pub fn with_rates(&self, a: Rat, c: Rat) -> Result<Self> {
        Self::new(self.side, self.n_species, self.labels(), self.variant, a, c)
    }

    pub fn with_side(&self, side: Side) -> Self {
        BoundarySpec { side, ..self.clone() }
    }

    /// The same boundary seen from the other end of the chain: the side flips
    /// and the labels are reflected by `t -> N + 1 - t`. This is an
    /// involution, and `U B(mirror) U = B(self)`.
    pub fn mirror(&self) -> Self {
        let n1 = self.n_species + 1;
        BoundarySpec {
            side: match self.side {
                Side::Left => Side::Right,
                Side::Right => Side::Left,
            },
            s1: n1 - self.f1,
            s2: n1 - self.f2,
            f2: n1 - self.s2,
            f1: n1 - self.s1,
            ..self.clone()
        }
    }

    /// The left boundary whose `U`-conjugate defines this one (identity for
    /// left boundaries).
    pub fn left_form(&self) -> Self {
        match self.side {
            Side::Left => self.clone(),
            Side::Right => self.mirror(),
        }
    }

    /// `(a~, c~)` for this spec at the given `q`.
    pub fn tilde_rates(&self, q: &Rat) -> (Rat, Rat) {
        tilde_rates(&self.rate_a, &self.rate_c, q).expect("validated rates")
    }

    /// Fails with [`Error::NonMarkovian`] when a tilde rate is negative.
    pub fn check_q(&self, q: &Rat) -> Result<()> {
        if !q.is_positive() {
            return Err(Error::InvalidParameter(format!("q must be positive, got {q}")));
        }
        let (at, ct) = self.tilde_rates(q);
        if at.is_negative() || ct.is_negative() {
            return Err(Error::NonMarkovian(format!(
                "a + c + q - 1 = {} is negative for a = {}, c = {}, q = {q}",
                &(&self.rate_a + &self.rate_c) + &(q - &Rat::one()),
                self.rate_a,
                self.rate_c
            )));
        }
        Ok(())
    }

    /// Non-fatal remarks about this spec at the given `q`.
    pub fn warnings(&self, q: &Rat) -> Vec<String> {
        let mut out = Vec::new();
        if (&(&self.rate_a + &self.rate_c) + &(q - &Rat::one())).is_zero() {
            out.push(format!(
                "{} boundary: a + c + q - 1 = 0, tilde rates vanish",
                self.side
            ));
        }
        out
    }

    /// Short label such as `left(1,1,3,3,decaying; a=1, c=2)`.
    pub fn describe(&self) -> String {
        format!(
            "{}({},{},{},{},{}; a={}, c={})",
            self.side, self.s1, self.s2, self.f2, self.f1, self.variant, self.rate_a, self.rate_c
        )
    }
}

/// `((a + c + q - 1) a / (a + c), (a + c + q - 1) c / (a + c))`.
pub fn tilde_rates(a: &Rat, c: &Rat, q: &Rat) -> Result<(Rat, Rat)> {
    let sum = a + c;
    if sum.is_zero() {
        return Err(Error::DegenerateRates);
    }
    let factor = &(&sum + q) - &Rat::one();
    let scale = &factor / &sum;
    Ok((a * &scale, c * &scale))
}

/// Class of `species` (1-based) relative to the spec's own labels.
pub fn classify(spec: &BoundarySpec, species: usize) -> Result<SpeciesClass> {
    if species == 0 || species > spec.n_species {
        return Err(Error::InvalidSpecies {
            species,
            n: spec.n_species,
        });
    }
    Ok(class_of(spec.labels(), species))
}

fn class_of([s1, s2, f2, f1]: [usize; 4], t: usize) -> SpeciesClass {
    if t < s1 {
        SpeciesClass::VerySlow
    } else if t <= s2 {
        SpeciesClass::Slow
    } else if t < f2 {
        SpeciesClass::Intermediate
    } else if t <= f1 {
        SpeciesClass::Fast
    } else {
        SpeciesClass::VeryFast
    }
}

/// Symbolic rate of a boundary transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RateSymbol {
    /// `alpha` (left) or `beta` (right).
    A,
    /// `gamma` (left) or `delta` (right).
    C,
    ATilde,
    CTilde,
}

impl RateSymbol {
    pub fn evaluate(self, a: &Rat, c: &Rat, q: &Rat) -> Result<Rat> {
        Ok(match self {
            RateSymbol::A => a.clone(),
            RateSymbol::C => c.clone(),
            RateSymbol::ATilde => tilde_rates(a, c, q)?.0,
            RateSymbol::CTilde => tilde_rates(a, c, q)?.1,
        })
    }
}

impl fmt::Display for RateSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateSymbol::A => "a",
            RateSymbol::C => "c",
            RateSymbol::ATilde => "a~",
            RateSymbol::CTilde => "c~",
        })
    }
}

/// `from -> to` at `rate`, species 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Transition {
    pub from: usize,
    pub to: usize,
    pub rate: RateSymbol,
}

/// The boundary transitions prescribed by the class rules, sorted by
/// `(from, to)`.
pub fn transitions(spec: &BoundarySpec) -> Vec<Transition> {
    let n = spec.n_species;
    let left = spec.left_form();
    let [s1, s2, f2, f1] = left.labels();
    let partner = |t: usize| s1 + f1 - t;
    let mut out = Vec::new();
    let mut push = |from: usize, to: usize, rate: RateSymbol| {
        out.push(Transition { from, to, rate })
    };
    for t in 1..=n {
        match class_of(left.labels(), t) {
            SpeciesClass::VerySlow => {
                push(t, s1, RateSymbol::C);
                push(t, f1, RateSymbol::A);
            }
            SpeciesClass::Slow => push(t, partner(t), RateSymbol::A),
            SpeciesClass::Intermediate => {
                if left.variant == Variant::Decaying {
                    push(t, s2, RateSymbol::CTilde);
                    push(t, f2, RateSymbol::A);
                }
            }
            SpeciesClass::Fast => push(t, partner(t), RateSymbol::CTilde),
            SpeciesClass::VeryFast => {
                push(t, s1, RateSymbol::CTilde);
                push(t, f1, RateSymbol::ATilde);
            }
        }
    }
    if spec.side == Side::Right {
        for tr in &mut out {
            tr.from = n + 1 - tr.from;
            tr.to = n + 1 - tr.to;
        }
    }
    out.sort();
    out
}

/// Assembles `sum r(i -> j) E_{ji} - diag(outflow)` from a transition list.
pub fn generator_from_transitions(
    n: usize,
    list: &[Transition],
    a: &Rat,
    c: &Rat,
    q: &Rat,
) -> Result<QMat> {
    let mut b = QMat::zeros(n, n);
    for tr in list {
        let r = tr.rate.evaluate(a, c, q)?;
        b[(tr.to - 1, tr.from - 1)] += &r;
        b[(tr.from - 1, tr.from - 1)] -= &r;
    }
    Ok(b)
}

/// Boundary matrix from the transition-rule interpreter. Independent of
/// [`build_boundary`]; used to cross-check it.
pub fn build_boundary_by_rules(spec: &BoundarySpec, q: &Rat) -> Result<QMat> {
    spec.check_q(q)?;
    generator_from_transitions(spec.n_species, &transitions(spec), &spec.rate_a, &spec.rate_c, q)
}

/// Block template for a left boundary (labels taken from `spec` regardless
/// of its side).
fn left_template(spec: &BoundarySpec, q: &Rat) -> QMat {
    let n = spec.n_species;
    let (a, c) = (&spec.rate_a, &spec.rate_c);
    let (at, ct) = spec.tilde_rates(q);
    let [s1, s2, f2, f1] = spec.labels();
    let idx = |t: usize| t - 1;
    let mut b = QMat::zeros(n, n);

    let sigma = a + c;
    let sigma_prime = a + &ct;
    let sigma_tilde = &at + &ct;

    // Very slow block: -sigma on the diagonal, gamma into row s1, alpha into row f1.
    for t in 1..s1 {
        b[(idx(t), idx(t))] = -&sigma;
        b[(idx(s1), idx(t))] = c.clone();
        b[(idx(f1), idx(t))] = a.clone();
    }
    // Slow/fast pairing along the anti-diagonal of the two special blocks.
    for t in s1..=s2 {
        b[(idx(t), idx(t))] = -a;
        b[(idx(s1 + f1 - t), idx(t))] = a.clone();
    }
    for t in f2..=f1 {
        b[(idx(t), idx(t))] = -&ct;
        b[(idx(s1 + f1 - t), idx(t))] = ct.clone();
    }
    // Intermediate block: zero, or decay into rows s2 and f2.
    if spec.variant == Variant::Decaying {
        for t in s2 + 1..f2 {
            b[(idx(t), idx(t))] = -&sigma_prime;
            b[(idx(s2), idx(t))] = ct.clone();
            b[(idx(f2), idx(t))] = a.clone();
        }
    }
    // Very fast block: -sigma~ on the diagonal, gamma~ into row s1, alpha~ into row f1.
    for t in f1 + 1..=n {
        b[(idx(t), idx(t))] = -&sigma_tilde;
        b[(idx(s1), idx(t))] = ct.clone();
        b[(idx(f1), idx(t))] = at.clone();
    }
    b
}

/// Boundary matrix of the spec: the block template for a left spec, the
/// `U`-conjugated template for a right spec.
pub fn build_boundary(spec: &BoundarySpec, q: &Rat) -> Result<QMat> {
    match spec.side {
        Side::Left => {
            spec.check_q(q)?;
            Ok(left_template(spec, q))
        }
        Side::Right => build_right_boundary(spec, q),
    }
}

/// `U B(b, d | s1'', s2'', f2'', f1'') U^{-1}` with `f_j'' = N + 1 - s_j'`
/// and `s_j'' = N + 1 - f_j'`.
pub fn build_right_boundary(spec: &BoundarySpec, q: &Rat) -> Result<QMat> {
    if spec.side != Side::Right {
        return Err(Error::InvalidSpec(
            "build_right_boundary needs a right-side spec".into(),
        ));
    }
    spec.check_q(q)?;
    let u = reversal(spec.n_species);
    Ok(left_template(&spec.left_form(), q).conjugate(&u, &u))
}

/// `B = b0 + b0_plus + b0_minus`, each part Markovian.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryParts {
    pub b0: QMat,
    /// Very-slow species turning into `s1` (rate `gamma`).
    pub b0_plus: QMat,
    /// Very-fast species turning into `f1` (rate `alpha~`).
    pub b0_minus: QMat,
}

impl BoundaryParts {
    pub fn sum(&self) -> QMat {
        &(&self.b0 + &self.b0_plus) + &self.b0_minus
    }

    fn conjugate(&self, u: &QMat) -> Self {
        BoundaryParts {
            b0: self.b0.conjugate(u, u),
            b0_plus: self.b0_plus.conjugate(u, u),
            b0_minus: self.b0_minus.conjugate(u, u),
        }
    }
}

/// Splits the boundary matrix into `b0 + b0+ + b0-`. For a right spec the
/// parts of its left form are conjugated by `U`, so they sum to the right
/// boundary matrix.
pub fn decompose_boundary(spec: &BoundarySpec, q: &Rat) -> Result<BoundaryParts> {
    let left = spec.left_form();
    let b = build_boundary(&left, q)?;
    let n = spec.n_species;
    let [s1, _, _, f1] = left.labels();
    let (at, _) = left.tilde_rates(q);
    let mut plus = QMat::zeros(n, n);
    for t in 1..s1 {
        plus[(t - 1, t - 1)] = -&left.rate_c;
        plus[(s1 - 1, t - 1)] = left.rate_c.clone();
    }
    let mut minus = QMat::zeros(n, n);
    for t in f1 + 1..=n {
        minus[(t - 1, t - 1)] = -&at;
        minus[(f1 - 1, t - 1)] = at.clone();
    }
    let b0 = &(&b - &plus) - &minus;
    let parts = BoundaryParts {
        b0,
        b0_plus: plus,
        b0_minus: minus,
    };
    Ok(match spec.side {
        Side::Left => parts,
        Side::Right => parts.conjugate(&reversal(n)),
    })
}

/// All left boundaries for `N` species with unit rates. Specs with
/// intermediate species appear twice (inert, then decaying).
pub fn enumerate_specs(n: usize) -> Vec<BoundarySpec> {
    let mut out = Vec::new();
    for s1 in 1..=n {
        for s2 in s1..=n {
            for f2 in s2 + 1..=n {
                let f1 = f2 + (s2 - s1);
                if f1 > n {
                    continue;
                }
                let labels = [s1, s2, f2, f1];
                out.push(BoundarySpec::left_unit(n, labels, Variant::Inert).expect("valid labels"));
                if f2 > s2 + 1 {
                    out.push(
                        BoundarySpec::left_unit(n, labels, Variant::Decaying).expect("valid labels"),
                    );
                }
            }
        }
    }
    out
}

/// `V b V^{-1}` with `V = diag(weights)`.
pub fn deform_boundary(b: &QMat, weights: &[Rat]) -> Result<QMat> {
    if weights.len() != b.rows() || !b.is_square() {
        return Err(Error::InvalidDimension(format!(
            "{} weights for a {}x{} matrix",
            weights.len(),
            b.rows(),
            b.cols()
        )));
    }
    if weights.iter().any(Rat::is_zero) {
        return Err(Error::SingularConjugation);
    }
    let mut out = b.clone();
    for i in 0..b.rows() {
        for j in 0..b.cols() {
            if !b[(i, j)].is_zero() {
                out[(i, j)] = &(&b[(i, j)] * &weights[i]) / &weights[j];
            }
        }
    }
    Ok(out)
}

/// Compares the `U`-conjugation definition of a right boundary with the
/// left template under the same labels and the exchange
/// `(b, d) <-> (b~, d~)`. Returns both matrices; they need not agree.
pub fn right_exchange_diagnostic(spec: &BoundarySpec, q: &Rat) -> Result<(QMat, QMat)> {
    let conjugated = build_right_boundary(spec, q)?;
    let (bt, dt) = spec.tilde_rates(q);
    let same_labels = spec.with_side(Side::Left);
    let mut exchanged = QMat::zeros(spec.n_species, spec.n_species);
    for tr in transitions(&same_labels) {
        let r = match tr.rate {
            RateSymbol::A => bt.clone(),
            RateSymbol::C => dt.clone(),
            RateSymbol::ATilde => spec.rate_a.clone(),
            RateSymbol::CTilde => spec.rate_c.clone(),
        };
        exchanged[(tr.to - 1, tr.from - 1)] += &r;
        exchanged[(tr.from - 1, tr.from - 1)] -= &r;
    }
    Ok((conjugated, exchanged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat;

    fn left(n: usize, labels: [usize; 4], variant: Variant, a: Rat, c: Rat) -> BoundarySpec {
        BoundarySpec::new(Side::Left, n, labels, variant, a, c).unwrap()
    }

    #[test]
    fn tilde_rate_values() {
        assert_eq!(tilde_rates(&rat!(1), &rat!(2), &rat!(1)).unwrap(), (rat!(1), rat!(2)));
        assert_eq!(tilde_rates(&rat!(1), &rat!(1), &rat!(3)).unwrap(), (rat!(2), rat!(2)));
        assert_eq!(
            tilde_rates(&rat!(2), &rat!(1), &rat!(1, 2)).unwrap(),
            (rat!(5, 3), rat!(5, 6))
        );
        assert_eq!(
            tilde_rates(&rat!(0), &rat!(0), &rat!(2)),
            Err(Error::DegenerateRates)
        );
    }

    #[test]
    fn spec_validation() {
        let bad = [[1, 1, 1, 1], [2, 1, 3, 3], [1, 2, 3, 3], [1, 1, 3, 4], [0, 0, 1, 1]];
        for labels in bad {
            assert!(matches!(
                BoundarySpec::left_unit(4, labels, Variant::Inert),
                Err(Error::InvalidSpec(_))
            ));
        }
        assert!(BoundarySpec::new(Side::Left, 2, [1, 1, 2, 2], Variant::Inert, rat!(-1), rat!(2)).is_err());
        assert_eq!(
            BoundarySpec::new(Side::Left, 2, [1, 1, 2, 2], Variant::Inert, rat!(0), rat!(0)),
            Err(Error::DegenerateRates)
        );
    }

    #[test]
    fn variant_normalized_without_intermediates() {
        let s = BoundarySpec::left_unit(3, [1, 1, 2, 2], Variant::Decaying).unwrap();
        assert_eq!(s.variant(), Variant::Inert);
        let s = BoundarySpec::left_unit(3, [1, 1, 3, 3], Variant::Decaying).unwrap();
        assert_eq!(s.variant(), Variant::Decaying);
    }

    #[test]
    fn classification_examples() {
        let s = BoundarySpec::left_unit(2, [1, 1, 2, 2], Variant::Inert).unwrap();
        assert_eq!(classify(&s, 1).unwrap(), SpeciesClass::Slow);
        assert_eq!(classify(&s, 2).unwrap(), SpeciesClass::Fast);
        let s = BoundarySpec::left_unit(3, [2, 2, 3, 3], Variant::Inert).unwrap();
        assert_eq!(classify(&s, 1).unwrap(), SpeciesClass::VerySlow);
        let s = BoundarySpec::left_unit(3, [1, 1, 3, 3], Variant::Inert).unwrap();
        assert_eq!(classify(&s, 2).unwrap(), SpeciesClass::Intermediate);
        assert_eq!(classify(&s, 4), Err(Error::InvalidSpecies { species: 4, n: 3 }));
        assert_eq!(classify(&s, 0), Err(Error::InvalidSpecies { species: 0, n: 3 }));
    }

    #[test]
    fn n2_boundary_matches_one_species_asep() {
        let (a, c, q) = (rat!(2, 3), rat!(5), rat!(1, 4));
        let spec = left(2, [1, 1, 2, 2], Variant::Inert, a.clone(), c.clone());
        let (_, ct) = tilde_rates(&a, &c, &q).unwrap();
        let expected = QMat::from_rows(vec![vec![-&a, ct.clone()], vec![a.clone(), -&ct]]).unwrap();
        assert_eq!(build_boundary(&spec, &q).unwrap(), expected);
    }

    #[test]
    fn n3_intermediate_variants() {
        let (a, c, q) = (rat!(1), rat!(2), rat!(3, 4));
        let (_, ct) = tilde_rates(&a, &c, &q).unwrap();
        let z = Rat::zero();
        let decaying = left(3, [1, 1, 3, 3], Variant::Decaying, a.clone(), c.clone());
        let expected = QMat::from_rows(vec![
            vec![-&a, ct.clone(), ct.clone()],
            vec![z.clone(), -(&a + &ct), z.clone()],
            vec![a.clone(), a.clone(), -&ct],
        ])
        .unwrap();
        assert_eq!(build_boundary(&decaying, &q).unwrap(), expected);

        let inert = left(3, [1, 1, 3, 3], Variant::Inert, a.clone(), c.clone());
        let expected = QMat::from_rows(vec![
            vec![-&a, z.clone(), ct.clone()],
            vec![z.clone(), z.clone(), z.clone()],
            vec![a.clone(), z.clone(), -&ct],
        ])
        .unwrap();
        assert_eq!(build_boundary(&inert, &q).unwrap(), expected);
    }

    #[test]
    fn negative_tilde_rates_rejected() {
        let spec = left(2, [1, 1, 2, 2], Variant::Inert, rat!(1, 4), rat!(1, 4));
        assert!(matches!(
            build_boundary(&spec, &rat!(1, 4)),
            Err(Error::NonMarkovian(_))
        ));
        // a + c + q - 1 = 0 is accepted with a warning.
        assert!(build_boundary(&spec, &rat!(1, 2)).is_ok());
        assert_eq!(spec.warnings(&rat!(1, 2)).len(), 1);
    }

    #[test]
    fn right_boundary_examples() {
        let (b, d, q) = (rat!(3), rat!(1, 2), rat!(2));
        let (_, dt) = tilde_rates(&b, &d, &q).unwrap();
        let spec = BoundarySpec::new(Side::Right, 2, [1, 1, 2, 2], Variant::Inert, b.clone(), d.clone()).unwrap();
        let expected = QMat::from_rows(vec![vec![-&dt, b.clone()], vec![dt.clone(), -&b]]).unwrap();
        assert_eq!(build_boundary(&spec, &q).unwrap(), expected);

        // N = 3, labels (1,1,2,2): [[-d~, b, b], [d~, -b, d], [0, 0, -(b+d)]].
        let spec = BoundarySpec::new(Side::Right, 3, [1, 1, 2, 2], Variant::Inert, b.clone(), d.clone()).unwrap();
        let z = Rat::zero();
        let expected = QMat::from_rows(vec![
            vec![-&dt, b.clone(), b.clone()],
            vec![dt.clone(), -&b, d.clone()],
            vec![z.clone(), z, -(&b + &d)],
        ])
        .unwrap();
        assert_eq!(build_right_boundary(&spec, &q).unwrap(), expected);

        let left_spec = spec.with_side(Side::Left);
        assert!(matches!(
            build_right_boundary(&left_spec, &q),
            Err(Error::InvalidSpec(_))
        ));
    }

    #[test]
    fn mirror_is_involution() {
        for n in 2..=6 {
            for spec in enumerate_specs(n) {
                assert_eq!(spec.mirror().mirror(), spec);
                assert_eq!(spec.mirror().side(), Side::Right);
            }
        }
    }

    #[test]
    fn decomposition_examples() {
        let q = rat!(3, 2);
        let spec = left(2, [1, 1, 2, 2], Variant::Inert, rat!(1), rat!(3));
        let parts = decompose_boundary(&spec, &q).unwrap();
        assert!(parts.b0_plus.is_zero() && parts.b0_minus.is_zero());
        assert_eq!(parts.b0, build_boundary(&spec, &q).unwrap());

        let c = rat!(3);
        let spec = left(3, [2, 2, 3, 3], Variant::Inert, rat!(1), c.clone());
        let parts = decompose_boundary(&spec, &q).unwrap();
        let z = Rat::zero();
        let expected_plus = QMat::from_rows(vec![
            vec![-&c, z.clone(), z.clone()],
            vec![c.clone(), z.clone(), z.clone()],
            vec![z.clone(), z.clone(), z],
        ])
        .unwrap();
        assert_eq!(parts.b0_plus, expected_plus);
        assert!(parts.b0_minus.is_zero());
    }

    #[test]
    fn decomposition_of_right_spec_sums_to_right_matrix() {
        let q = rat!(1, 3);
        for spec in enumerate_specs(4) {
            let right = spec.with_rates(rat!(2), rat!(1)).unwrap().with_side(Side::Right);
            let parts = decompose_boundary(&right, &q).unwrap();
            assert_eq!(parts.sum(), build_boundary(&right, &q).unwrap());
        }
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_specs(2).len(), 1);
        assert_eq!(enumerate_specs(3).len(), 4);
        assert_eq!(enumerate_specs(5).len(), 20);
    }

    #[test]
    fn deformation() {
        let (a, ct) = (rat!(2), rat!(5, 3));
        let b = QMat::from_rows(vec![vec![-&a, ct.clone()], vec![a.clone(), -&ct]]).unwrap();
        assert_eq!(deform_boundary(&b, &[rat!(1), rat!(1)]).unwrap(), b);
        let w = rat!(7, 2);
        let d = deform_boundary(&b, &[rat!(1), w.clone()]).unwrap();
        let expected = QMat::from_rows(vec![
            vec![-&a, &ct / &w],
            vec![&a * &w, -&ct],
        ])
        .unwrap();
        assert_eq!(d, expected);
        // Weights (w, 1) put w on the extraction entry instead.
        let flipped = deform_boundary(&b, &[w.clone(), rat!(1)]).unwrap();
        let expected = QMat::from_rows(vec![
            vec![-&a, &w * &ct],
            vec![&a / &w, -&ct],
        ])
        .unwrap();
        assert_eq!(flipped, expected);
        assert!(d.column_sums().iter().any(|s| !s.is_zero()));
        assert_eq!(
            deform_boundary(&b, &[rat!(1), rat!(0)]),
            Err(Error::SingularConjugation)
        );
    }

    #[test]
    fn spec_serializes_as_flat_record() {
        let spec = left(3, [1, 1, 3, 3], Variant::Decaying, rat!(1, 2), rat!(2));
        let json = serde_json::to_string(&spec).unwrap();
        assert_eq!(
            json,
            r#"{"side":"left","a":"1/2","c":"2","s1":1,"s2":1,"f2":3,"f1":3,"variant":"decaying","N":3}"#
        );
        assert_eq!(serde_json::from_str::<BoundarySpec>(&json).unwrap(), spec);
        let broken = json.replace(r#""f1":3"#, r#""f1":2"#);
        assert!(serde_json::from_str::<BoundarySpec>(&broken).is_err());
    }

    #[test]
    fn exchange_diagnostic_differs_for_n2() {
        let spec = BoundarySpec::new(Side::Right, 2, [1, 1, 2, 2], Variant::Inert, rat!(2), rat!(1)).unwrap();
        let (conj, exch) = right_exchange_diagnostic(&spec, &rat!(1, 2)).unwrap();
        assert_ne!(conj, exch);
    }
}
