//! Synchronization tests, exhaustive minimal-word search, and the
//! no-short-synchronizing-word machinery for small rotation angles.
//!
//! A word is treated as synchronizing when the images of the nine
//! [`affine_probe_states`] lie within `tol` of each other in trace distance.
//! Every letter acts affinely on density matrices, so collapsing the probes
//! collapses the whole state space.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::channels::{
    affine_probe_states, trace_distance, Alphabet, ChannelFamilyParam, DensityMatrix, Letter, Word,
};
use crate::error::{Error, Result};

/// Default probe-diameter threshold below which a word counts as synchronizing.
pub const DEFAULT_SYNC_TOL: f64 = 1e-9;

/// Longest word length the exhaustive search accepts.
pub const MAX_SEARCH_LEN: usize = 24;

/// Longest word length a no-sync certificate enumerates.
pub const MAX_CERTIFICATE_LEN: usize = 20;

/// Slack allowed below the theoretical floor when validating a certificate.
pub const CERTIFICATE_SLACK: f64 = 1e-9;

/// Leading letters fixed per parallel work item.
const SPLIT_DEPTH: usize = 8;

const PROBES: usize = 9;

type ProbeImages = [DensityMatrix; PROBES];

/// Outcome of testing one word.
#[derive(Clone, Debug, PartialEq)]
pub struct SyncVerdict {
    pub synchronizing: bool,
    pub image_diameter: f64,
    /// Image of `|e_1⟩⟨e_1|`, present exactly when the word synchronizes.
    pub common_image: Option<DensityMatrix>,
    pub word: Word,
}

/// Result of an exhaustive search.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchOutcome {
    /// First synchronizing word in (length, lexicographic) order, if any.
    pub witness: Option<Word>,
    /// Nonempty words examined, up to and including the witness.
    pub words_checked: u64,
}

/// Parameters guaranteeing that no word of length at most `l` synchronizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TheoremParams {
    pub l: usize,
    pub epsilon: f64,
    pub epsilon_prime: f64,
    pub n: u32,
    pub theta: f64,
}

/// Brute-force evidence that `|e_2⟩⟨e_2|` and `|e_3⟩⟨e_3|` stay apart under
/// every word of length at most `l`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoSyncCertificate {
    pub n: u32,
    pub l: usize,
    /// `4·l·θ(n)`.
    pub epsilon: f64,
    /// `1 - 2ε`.
    pub theoretical_floor: f64,
    pub min_observed_distance: f64,
    /// A word attaining the minimum (the empty word when `l = 0`).
    pub closest_word: Word,
    pub words_checked: u64,
}

impl NoSyncCertificate {
    pub fn validates(&self) -> bool {
        self.min_observed_distance >= self.theoretical_floor - CERTIFICATE_SLACK
    }
}

/// Largest pairwise trace distance in `states`.
pub fn diameter(states: &[DensityMatrix]) -> f64 {
    let mut worst: f64 = 0.0;
    for (i, rho) in states.iter().enumerate() {
        for sigma in &states[i + 1..] {
            worst = worst.max(trace_distance(rho, sigma));
        }
    }
    worst
}

/// Largest pairwise trace distance between the images of `states` under `word`.
pub fn image_diameter(word: &Word, param: ChannelFamilyParam, states: &[DensityMatrix]) -> Result<f64> {
    if states.is_empty() {
        return Err(Error::EmptyStateSet);
    }
    let alphabet = Alphabet::new(param);
    let images = states
        .iter()
        .map(|rho| alphabet.apply_word(word, rho))
        .collect::<Result<Vec<_>>>()?;
    Ok(diameter(&images))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol <= 0.1 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("tolerance {tol} must lie in (0, 0.1]")))
    }
}

/// Tests `word` against the probe states.
pub fn is_synchronizing(word: &Word, param: ChannelFamilyParam, tol: f64) -> Result<SyncVerdict> {
    check_tol(tol)?;
    let alphabet = Alphabet::new(param);
    let images = affine_probe_states()
        .iter()
        .map(|rho| alphabet.apply_word(word, rho))
        .collect::<Result<Vec<_>>>()?;
    let image_diameter = diameter(&images);
    let synchronizing = image_diameter <= tol;
    Ok(SyncVerdict {
        synchronizing,
        image_diameter,
        common_image: synchronizing.then(|| images[0]),
        word: word.clone(),
    })
}

fn probe_images() -> ProbeImages {
    affine_probe_states().try_into().expect("nine probes")
}

fn step_all(alphabet: &Alphabet, letter: Letter, images: &ProbeImages) -> ProbeImages {
    images.map(|rho| alphabet.step(letter, &rho))
}

fn collapsed(images: &ProbeImages, tol: f64) -> bool {
    // Entry differences bound the trace distance from below (|Δ_ij| ≤ 2D), so
    // this prefilter never rejects a collapsed tuple.
    let first = images[0].mat();
    if images[1..].iter().any(|im| im.mat().max_abs_diff(first) > 2.0 * tol) {
        return false;
    }
    diameter(images) <= tol
}

/// Depth-first walk below `images`; returns the offset of the first leaf at
/// `remaining` more letters whose images collapse.
fn first_collapse(alphabet: &Alphabet, images: &ProbeImages, remaining: usize, tol: f64) -> Option<u64> {
    if remaining == 0 {
        return collapsed(images, tol).then_some(0);
    }
    Letter::ALL.iter().enumerate().find_map(|(bit, &letter)| {
        let next = step_all(alphabet, letter, images);
        first_collapse(alphabet, &next, remaining - 1, tol)
            .map(|offset| ((bit as u64) << (remaining - 1)) | offset)
    })
}

/// Shortest synchronizing word of length at most `max_len`, first in
/// lexicographic order (`A < B`) among those of minimal length.
///
/// Subtrees below a fixed prefix are searched in parallel; the merge keeps the
/// first hit in enumeration order, so the result matches a sequential scan.
pub fn minimal_sync_word(param: ChannelFamilyParam, max_len: usize, tol: f64) -> Result<SearchOutcome> {
    check_tol(tol)?;
    if !(1..=MAX_SEARCH_LEN).contains(&max_len) {
        return Err(Error::InvalidArgument(format!(
            "max_len {max_len} must lie in 1..={MAX_SEARCH_LEN}"
        )));
    }
    let alphabet = Alphabet::new(param);
    let root = probe_images();
    for len in 1..=max_len {
        let split = len.min(SPLIT_DEPTH);
        let rest = len - split;
        let hit = (0..1u64 << split).into_par_iter().find_map_first(|prefix| {
            let start = Word::from_index(split, prefix)
                .letters()
                .iter()
                .fold(root, |images, &l| step_all(&alphabet, l, &images));
            first_collapse(&alphabet, &start, rest, tol).map(|offset| (prefix << rest) | offset)
        });
        if let Some(index) = hit {
            return Ok(SearchOutcome {
                witness: Some(Word::from_index(len, index)),
                words_checked: (1u64 << len) - 2 + index + 1,
            });
        }
    }
    Ok(SearchOutcome { witness: None, words_checked: (1u64 << (max_len + 1)) - 2 })
}

/// Chooses `n` so that `θ(n) = π/(2n) ≤ ε/(4l)`, i.e. `n = ⌈2πl/ε⌉`.
pub fn n_for_no_sync_up_to(l: usize, epsilon: f64) -> Result<TheoremParams> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(Error::EpsilonOutOfRange(epsilon));
    }
    if l == 0 {
        return Err(Error::InvalidArgument("l must be at least 1".into()));
    }
    let epsilon_prime = epsilon / (4.0 * l as f64);
    let estimate = (PI / (2.0 * epsilon_prime)).ceil();
    if estimate > f64::from(u32::MAX) {
        return Err(Error::InvalidArgument(format!("required n = {estimate} does not fit in u32")));
    }
    let mut n = estimate as u32;
    let theta = |n: u32| PI / (2.0 * f64::from(n));
    // Guard against the ceiling landing one short after rounding.
    while theta(n) > epsilon_prime {
        n += 1;
    }
    Ok(TheoremParams { l, epsilon, epsilon_prime, n, theta: theta(n) })
}

#[derive(Clone, Copy)]
struct Closest {
    distance: f64,
    len: usize,
    index: u64,
}

impl Closest {
    fn better(self, other: Self) -> Self {
        let key = |c: &Self| (c.distance, c.len, c.index);
        if key(&other).partial_cmp(&key(&self)) == Some(std::cmp::Ordering::Less) {
            other
        } else {
            self
        }
    }
}

fn closest_below(
    alphabet: &Alphabet,
    pair: (DensityMatrix, DensityMatrix),
    len: usize,
    index: u64,
    remaining: usize,
) -> Closest {
    let here = Closest { distance: trace_distance(&pair.0, &pair.1), len, index };
    if remaining == 0 {
        return here;
    }
    Letter::ALL.iter().enumerate().fold(here, |best, (bit, &letter)| {
        let next = (alphabet.step(letter, &pair.0), alphabet.step(letter, &pair.1));
        best.better(closest_below(alphabet, next, len + 1, (index << 1) | bit as u64, remaining - 1))
    })
}

/// Enumerates every word of length at most `l` and records how close the
/// images of `|e_2⟩⟨e_2|` and `|e_3⟩⟨e_3|` come, against the floor `1 - 2·4lθ(n)`.
pub fn no_sync_certificate(n: u32, l: usize) -> Result<NoSyncCertificate> {
    let param = ChannelFamilyParam::new(n)?;
    if l > MAX_CERTIFICATE_LEN {
        return Err(Error::InvalidArgument(format!(
            "l {l} exceeds the certificate limit {MAX_CERTIFICATE_LEN}"
        )));
    }
    let alphabet = Alphabet::new(param);
    let pair = (DensityMatrix::basis(1), DensityMatrix::basis(2));

    let root = Closest { distance: trace_distance(&pair.0, &pair.1), len: 0, index: 0 };
    let split = l.min(SPLIT_DEPTH);
    // Words shorter than the split are scored directly; longer ones are
    // walked in parallel below each split-length prefix.
    let shallow = (1..split).flat_map(|len| (0..1u64 << len).map(move |i| (len, i)));
    let best_shallow = shallow.fold(root, |best, (len, index)| {
        let w = Word::from_index(len, index);
        let image = |rho: &DensityMatrix| {
            w.letters().iter().fold(*rho, |s, &letter| alphabet.step(letter, &s))
        };
        best.better(Closest { distance: trace_distance(&image(&pair.0), &image(&pair.1)), len, index })
    });
    let best = if split == 0 {
        best_shallow
    } else {
        (0..1u64 << split)
            .into_par_iter()
            .map(|prefix| {
                let w = Word::from_index(split, prefix);
                let start = w.letters().iter().fold(pair, |(x, y), &letter| {
                    (alphabet.step(letter, &x), alphabet.step(letter, &y))
                });
                closest_below(&alphabet, start, split, prefix, l - split)
            })
            .reduce(|| best_shallow, Closest::better)
    };

    let epsilon = 4.0 * l as f64 * param.theta();
    let certificate = NoSyncCertificate {
        n,
        l,
        epsilon,
        theoretical_floor: 1.0 - 2.0 * epsilon,
        min_observed_distance: best.distance,
        closest_word: Word::from_index(best.len, best.index),
        words_checked: (1u64 << (l + 1)) - 2,
    };
    if epsilon >= 0.5 {
        return Err(Error::FloorNonpositive { epsilon, min_observed: best.distance });
    }
    Ok(certificate)
}
