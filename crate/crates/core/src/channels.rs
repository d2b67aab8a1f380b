//! Qutrit states, Kraus channels and the two-letter channel family `{A, B_n}`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matlib::{unit, ComplexMat3, SchattenOrder, HERMITIAN_TOL};

/// Tolerance on `|tr ρ - 1|` and on negative eigenvalues of a density matrix.
pub const STATE_TOL: f64 = 1e-9;

/// Largest completeness defect `‖∑K†K - I‖_∞` a channel may have and still be applied.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Drift in trace or Hermiticity beyond which `apply` re-symmetrizes and renormalizes.
const CLEANUP_THRESHOLD: f64 = 1e-13;

const MAX_KRAUS_FACTORS: usize = 9;

/// A qutrit density matrix: Hermitian, positive semidefinite, unit trace.
#[derive(Clone, Copy, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMat3,
}

impl DensityMatrix {
    /// Validates `mat` against the density-matrix invariants and stores its
    /// Hermitian part.
    pub fn new(mat: ComplexMat3) -> Result<Self> {
        let deviation = mat.hermitian_deviation();
        if deviation > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (deviation {deviation:e})"
            )));
        }
        let mat = mat.symmetrized();
        let trace = mat.trace().re;
        if (trace - 1.0).abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace is {trace}, expected 1")));
        }
        let min_eig = mat.eigenvalues_of_hermitian()[2];
        if min_eig < -STATE_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (eigenvalue {min_eig:e})"
            )));
        }
        Ok(Self { mat })
    }

    pub(crate) fn from_mat_unchecked(mat: ComplexMat3) -> Self {
        Self { mat }
    }

    /// The basis projector `|e_i⟩⟨e_i|` for `i` in `0..3`.
    pub fn basis(i: usize) -> Self {
        assert!(i < 3, "basis index {i} out of range");
        Self { mat: ComplexMat3::outer(unit(i), unit(i)) }
    }

    /// The pure state `|v⟩⟨v| / ⟨v|v⟩`.
    pub fn pure(v: [Complex64; 3]) -> Result<Self> {
        let norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if !(norm_sqr.is_finite() && norm_sqr > 0.0) {
            return Err(Error::InvalidState("pure state from a zero or non-finite vector".into()));
        }
        let scale = norm_sqr.sqrt();
        let u = v.map(|z| z / scale);
        Ok(Self { mat: ComplexMat3::outer(u, u) })
    }

    /// `I / 3`.
    pub fn maximally_mixed() -> Self {
        Self { mat: ComplexMat3::diagonal([1.0 / 3.0; 3]) }
    }

    pub fn mat(&self) -> &ComplexMat3 {
        &self.mat
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> [f64; 3] {
        self.mat.eigenvalues_of_hermitian()
    }
}

impl fmt::Debug for DensityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_tuple("DensityMatrix").field(&self.mat).finish()
    }
}

/// `D(ρ, σ) = ½ tr|ρ - σ|`, half the sum of absolute eigenvalues of the difference.
pub fn trace_distance(rho: &DensityMatrix, sigma: &DensityMatrix) -> f64 {
    half_trace_norm(&(rho.mat - sigma.mat))
}

pub(crate) fn half_trace_norm(hermitian: &ComplexMat3) -> f64 {
    let eig = hermitian.symmetrized().eigenvalues_of_hermitian();
    0.5 * eig.iter().map(|x| x.abs()).sum::<f64>()
}

/// A Kraus representation `ρ ↦ ∑ K_i ρ K_i†`.
///
/// Construction only checks the factor count; completeness is measured once
/// and enforced when the channel is applied.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    factors: Vec<ComplexMat3>,
    label: String,
    defect: f64,
}

impl KrausChannel {
    pub fn new(factors: Vec<ComplexMat3>, label: impl Into<String>) -> Result<Self> {
        let label = label.into();
        if factors.is_empty() || factors.len() > MAX_KRAUS_FACTORS {
            return Err(Error::InvalidChannel {
                label,
                reason: format!("{} Kraus factors, expected 1..=9", factors.len()),
            });
        }
        let defect = defect_of(&factors);
        Ok(Self { factors, label, defect })
    }

    pub fn factors(&self) -> &[ComplexMat3] {
        &self.factors
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// `‖∑K_i†K_i - I‖_∞`.
    pub fn completeness_defect(&self) -> f64 {
        self.defect
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.defect <= COMPLETENESS_TOL
    }

    fn ensure_valid(&self) -> Result<()> {
        if self.is_trace_preserving() {
            Ok(())
        } else {
            Err(Error::InvalidChannel {
                label: self.label.clone(),
                reason: format!("completeness defect {:e} exceeds {COMPLETENESS_TOL:e}", self.defect),
            })
        }
    }

    /// The linear map `M ↦ ∑ K_i M K_i†` on arbitrary matrices.
    pub fn apply_matrix(&self, m: &ComplexMat3) -> ComplexMat3 {
        self.factors
            .iter()
            .fold(ComplexMat3::zero(), |acc, k| acc + k.multiply(m).multiply(&k.adjoint()))
    }

    /// Applies the channel to a state.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.ensure_valid()?;
        Ok(self.apply_unchecked(rho))
    }

    pub(crate) fn apply_unchecked(&self, rho: &DensityMatrix) -> DensityMatrix {
        DensityMatrix::from_mat_unchecked(clean_up(self.apply_matrix(&rho.mat)))
    }
}

fn defect_of(factors: &[ComplexMat3]) -> f64 {
    let gram = factors
        .iter()
        .fold(ComplexMat3::zero(), |acc, k| acc + k.adjoint().multiply(k));
    (gram - ComplexMat3::identity()).schatten_norm(SchattenOrder::Infinity)
}

fn clean_up(m: ComplexMat3) -> ComplexMat3 {
    let asymmetry = m.hermitian_deviation();
    let trace = m.trace().re;
    if asymmetry <= CLEANUP_THRESHOLD && (trace - 1.0).abs() <= CLEANUP_THRESHOLD {
        return m;
    }
    log::debug!("state cleanup: hermitian deviation {asymmetry:e}, trace drift {:e}", trace - 1.0);
    let sym = m.symmetrized();
    sym.scale_real(1.0 / sym.trace().re)
}

/// `‖∑K_i†K_i - I‖_∞` of a channel.
pub fn completeness_defect(channel: &KrausChannel) -> f64 {
    channel.completeness_defect()
}

/// Index `n ≥ 1` of the rotation letter `B_n`, with angle `θ = π / (2n)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ChannelFamilyParam {
    n: u32,
}

impl ChannelFamilyParam {
    pub fn new(n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be a positive integer".into()));
        }
        Ok(Self { n })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn theta(&self) -> f64 {
        PI / (2.0 * f64::from(self.n))
    }
}

/// The letter `A`: Kraus factors `A_1 = |e_2⟩⟨e_1|` and `A_2 = |e_3⟩⟨e_2| - |e_2⟩⟨e_3|`.
pub fn channel_a() -> KrausChannel {
    let a1 = ComplexMat3::from_real([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]]);
    let a2 = ComplexMat3::from_real([[0.0, 0.0, 0.0], [0.0, 0.0, -1.0], [0.0, 1.0, 0.0]]);
    KrausChannel::new(vec![a1.unwrap(), a2.unwrap()], "A").expect("two factors")
}

/// The rotation matrix of `B_n`: angle `θ` in the `(e_1, e_2)` plane, identity on `e_3`.
///
/// `n = 1` uses exact entries so that the states of the first automaton stay
/// exactly representable.
pub fn rotation_matrix(param: ChannelFamilyParam) -> ComplexMat3 {
    let (c, s) = if param.n == 1 {
        (0.0, 1.0)
    } else {
        let theta = param.theta();
        (theta.cos(), theta.sin())
    };
    ComplexMat3::from_real([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]]).expect("finite")
}

/// The letter `B_n`, a single unitary Kraus factor.
pub fn channel_b(param: ChannelFamilyParam) -> KrausChannel {
    KrausChannel::new(vec![rotation_matrix(param)], format!("B_{}", param.n)).expect("one factor")
}

/// A letter of the two-symbol alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Letter {
    A,
    B,
}

impl Letter {
    pub const ALL: [Letter; 2] = [Letter::A, Letter::B];

    pub fn as_char(self) -> char {
        match self {
            Letter::A => 'A',
            Letter::B => 'B',
        }
    }
}

impl fmt::Display for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A finite word over `{A, B}`, applied left to right.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<Letter>);

impl Word {
    pub fn empty() -> Self {
        Self(Vec::new())
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Self(letters)
    }

    /// The `index`-th word of length `len` in lexicographic order with `A < B`.
    pub fn from_index(len: usize, index: u64) -> Self {
        debug_assert!(len >= 64 || index < (1u64 << len));
        Self(
            (0..len)
                .rev()
                .map(|bit| if bit < 64 && (index >> bit) & 1 == 1 { Letter::B } else { Letter::A })
                .collect(),
        )
    }

    /// `A · Bⁿ · A`.
    pub fn rotation_sandwich(n: u32) -> Self {
        let mut letters = vec![Letter::A];
        letters.extend(std::iter::repeat_n(Letter::B, n as usize));
        letters.push(Letter::A);
        Self(letters)
    }

    pub fn letters(&self) -> &[Letter] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn push(&mut self, letter: Letter) {
        self.0.push(letter);
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.0.clone();
        letters.extend_from_slice(&other.0);
        Word(letters)
    }

    /// Maximal runs of equal letters, in order.
    pub fn runs(&self) -> Vec<(Letter, usize)> {
        let mut runs: Vec<(Letter, usize)> = Vec::new();
        for &letter in &self.0 {
            match runs.last_mut() {
                Some((last, count)) if *last == letter => *count += 1,
                _ => runs.push((letter, 1)),
            }
        }
        runs
    }

    pub fn count(&self, letter: Letter) -> usize {
        self.0.iter().filter(|&&l| l == letter).count()
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.iter().try_for_each(|l| write!(f, "{l}"))
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c.to_ascii_uppercase() {
                'A' => Ok(Letter::A),
                'B' => Ok(Letter::B),
                other => Err(Error::InvalidArgument(format!(
                    "word letter {other:?} is not A or B"
                ))),
            })
            .collect::<Result<Vec<_>>>()
            .map(Word)
    }
}

/// The pair of channels `{A, B_n}` for a fixed `n`.
#[derive(Clone, Debug)]
pub struct Alphabet {
    param: ChannelFamilyParam,
    a: KrausChannel,
    b: KrausChannel,
}

impl Alphabet {
    pub fn new(param: ChannelFamilyParam) -> Self {
        Self { param, a: channel_a(), b: channel_b(param) }
    }

    pub fn param(&self) -> ChannelFamilyParam {
        self.param
    }

    pub fn channel(&self, letter: Letter) -> &KrausChannel {
        match letter {
            Letter::A => &self.a,
            Letter::B => &self.b,
        }
    }

    pub(crate) fn step(&self, letter: Letter, rho: &DensityMatrix) -> DensityMatrix {
        self.channel(letter).apply_unchecked(rho)
    }

    /// `δ*(ρ, w)`: folds the letters of `w` over `rho` from the left.
    pub fn apply_word(&self, word: &Word, rho: &DensityMatrix) -> Result<DensityMatrix> {
        self.a.ensure_valid()?;
        self.b.ensure_valid()?;
        Ok(word.letters().iter().fold(*rho, |state, &l| self.step(l, &state)))
    }

    /// The word as a linear map on arbitrary matrices.
    pub fn apply_word_matrix(&self, word: &Word, m: &ComplexMat3) -> ComplexMat3 {
        word.letters()
            .iter()
            .fold(*m, |acc, &l| self.channel(l).apply_matrix(&acc))
    }
}

/// `δ*(ρ, w)` for the channel family at `param`.
pub fn apply_word(word: &Word, rho: &DensityMatrix, param: ChannelFamilyParam) -> Result<DensityMatrix> {
    Alphabet::new(param).apply_word(word, rho)
}

/// Nine pure states whose affine hull is every trace-one Hermitian 3×3 matrix:
/// the basis projectors, then `½(e_i + e_j)(e_i + e_j)†` and
/// `½(e_i + i·e_j)(e_i + i·e_j)†` for `i < j`.
pub fn affine_probe_states() -> Vec<DensityMatrix> {
    const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];
    let basis = (0..3).map(DensityMatrix::basis);
    let superpose = |phase: Complex64| {
        PAIRS.into_iter().map(move |(i, j)| {
            let mut v = unit(i);
            v[j] = phase;
            DensityMatrix::pure(v).expect("nonzero vector")
        })
    };
    basis
        .chain(superpose(Complex64::new(1.0, 0.0)))
        .chain(superpose(Complex64::i()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: usize) -> DensityMatrix {
        DensityMatrix::basis(i)
    }

    fn word(s: &str) -> Word {
        s.parse().unwrap()
    }

    fn param(n: u32) -> ChannelFamilyParam {
        ChannelFamilyParam::new(n).unwrap()
    }

    fn plus_12() -> DensityMatrix {
        DensityMatrix::new(
            ComplexMat3::from_real([[0.5, 0.5, 0.0], [0.5, 0.5, 0.0], [0.0, 0.0, 0.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::new(ComplexMat3::diagonal([0.5, 0.5, 0.0])).is_ok());
        assert!(matches!(
            DensityMatrix::new(ComplexMat3::diagonal([0.5, 0.6, 0.0])),
            Err(Error::InvalidState(_))
        ));
        assert!(matches!(
            DensityMatrix::new(ComplexMat3::diagonal([1.5, -0.5, 0.0])),
            Err(Error::InvalidState(_))
        ));
        let skew = ComplexMat3::from_real([[1.0, 1.0, 0.0], [0.0, 0.0, 0.0], [0.0, 0.0, 0.0]]).unwrap();
        assert!(DensityMatrix::new(skew).is_err());
        assert!(DensityMatrix::pure([Complex64::new(0.0, 0.0); 3]).is_err());
    }

    #[test]
    fn channel_a_permutes_basis() {
        let a = channel_a();
        assert!(a.completeness_defect() <= 1e-15);
        assert_eq!(a.apply(&e(0)).unwrap(), e(1));
        assert_eq!(a.apply(&e(1)).unwrap(), e(2));
        assert_eq!(a.apply(&e(2)).unwrap(), e(1));
    }

    #[test]
    fn channel_b_examples() {
        let b1 = rotation_matrix(param(1));
        let want = ComplexMat3::from_real([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]).unwrap();
        assert_eq!(b1, want);

        for n in 1..=20 {
            let bn = rotation_matrix(param(n));
            let power = (0..n).fold(ComplexMat3::identity(), |acc, _| acc * bn);
            assert!(power.approx_eq(&want, 1e-12), "n={n}");
            let b = channel_b(param(n));
            assert!(b.completeness_defect() <= 1e-12);
            assert!(b.apply(&e(2)).unwrap().mat().approx_eq(e(2).mat(), 1e-15));
        }
    }

    #[test]
    fn apply_examples_from_reachable_graph() {
        let rho = channel_b(param(2)).apply(&e(0)).unwrap();
        assert!(rho.mat().approx_eq(plus_12().mat(), 1e-15));

        let next = channel_a().apply(&plus_12()).unwrap();
        assert!(next.mat().approx_eq(&ComplexMat3::diagonal([0.0, 0.5, 0.5]), 1e-15));
    }

    #[test]
    fn invalid_channel_is_rejected_on_apply() {
        let half = ComplexMat3::identity().scale_real(0.5);
        let ch = KrausChannel::new(vec![half], "half").unwrap();
        assert!((completeness_defect(&ch) - 0.75).abs() < 1e-15);
        assert!(matches!(ch.apply(&e(0)), Err(Error::InvalidChannel { .. })));

        assert!(KrausChannel::new(vec![], "none").is_err());
        assert!(KrausChannel::new(vec![half; 10], "ten").is_err());
    }

    #[test]
    fn apply_word_examples() {
        assert_eq!(apply_word(&word("ABA"), &e(0), param(1)).unwrap(), e(1));
        assert_eq!(apply_word(&Word::empty(), &plus_12(), param(5)).unwrap(), plus_12());
        assert_eq!(apply_word(&word("AA"), &e(1), param(1)).unwrap(), e(1));
    }

    #[test]
    fn trace_distance_examples() {
        assert!((trace_distance(&e(1), &e(2)) - 1.0).abs() < 1e-15);
        assert_eq!(trace_distance(&plus_12(), &plus_12()), 0.0);
        let mixed = DensityMatrix::new(ComplexMat3::diagonal([0.5, 0.5, 0.0])).unwrap();
        assert!((trace_distance(&e(0), &mixed) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn probes() {
        let probes = affine_probe_states();
        assert_eq!(probes.len(), 9);
        for i in 0..3 {
            assert!(probes.contains(&e(i)));
        }
        // I/3 is the average of the basis projectors.
        let avg = probes[..3]
            .iter()
            .fold(ComplexMat3::zero(), |acc, p| acc + p.mat().scale_real(1.0 / 3.0));
        assert!(avg.approx_eq(DensityMatrix::maximally_mixed().mat(), 1e-15));
        // Imaginary superposition of e1, e2 carries ±i/2 off the diagonal.
        assert!((probes[6].mat().get(0, 1) - Complex64::new(0.0, -0.5)).norm() < 1e-15);
    }

    #[test]
    fn word_parsing_and_runs() {
        let w = word("aabBBa");
        assert_eq!(w.to_string(), "AABBBA");
        assert_eq!(w.runs(), vec![(Letter::A, 2), (Letter::B, 3), (Letter::A, 1)]);
        assert!("ABC".parse::<Word>().is_err());
        assert_eq!(Word::from_index(3, 0).to_string(), "AAA");
        assert_eq!(Word::from_index(3, 5).to_string(), "BAB");
        assert_eq!(Word::rotation_sandwich(2).to_string(), "ABBA");
        assert_eq!(Word::empty().runs(), vec![]);
    }
}
