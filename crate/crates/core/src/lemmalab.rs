//! Seeded numerical checks of the distance inequalities behind the
//! construction: contraction under channels, the Hölder and Frobenius norm
//! chains, the single-step rotation bound, its iterates, and the bound for
//! words that interleave `A` and `B` runs.
//!
//! Every trial draws from its own ChaCha20 stream (selected by trial index),
//! so results do not depend on how trials are scheduled across threads.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::channels::{
    half_trace_norm, rotation_matrix, trace_distance, Alphabet, ChannelFamilyParam, DensityMatrix,
    KrausChannel, Letter, Word,
};
use crate::error::{Error, Result};
use crate::json::{Params, Sig17};
use crate::matlib::{ComplexMat3, SchattenOrder};

/// Slack added to every bound before an observation counts as a failure.
pub const CHECK_SLACK: f64 = 1e-10;

pub const DEFAULT_SEED: u64 = 20250101;

/// The sharper form of the single-step bound applies only for angles up to this.
pub const FOUR_EPSILON_LIMIT: f64 = 2.0 / 9.0;

const MAX_DRAW_ATTEMPTS: usize = 100;

/// A deterministic source of random draws: ChaCha20 keyed by the seed, with
/// independent streams for independent trials.
#[derive(Clone, Debug)]
pub struct RandomSource {
    seed: u64,
    rng: ChaCha20Rng,
}

impl RandomSource {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// An independent source on stream `index` of the same key.
    pub fn split(&self, index: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        Self { seed: self.seed, rng }
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn uniform(&mut self) -> f64 {
        self.rng.random()
    }

    pub fn below(&mut self, bound: u64) -> u64 {
        self.rng.random_range(0..bound)
    }

    fn complex_normal(&mut self) -> Complex64 {
        Complex64::new(self.normal(), self.normal())
    }

    /// Uniform on the closed unit disc.
    pub fn unit_disc(&mut self) -> Complex64 {
        let radius = self.uniform().sqrt();
        let angle = 2.0 * PI * self.uniform();
        Complex64::from_polar(radius, angle)
    }

    pub fn ginibre(&mut self) -> ComplexMat3 {
        let entries = [[(); 3]; 3].map(|row| row.map(|_| self.complex_normal()));
        ComplexMat3::new(entries).expect("normal draws are finite")
    }

    pub fn disc_matrix(&mut self) -> ComplexMat3 {
        let entries = [[(); 3]; 3].map(|row| row.map(|_| self.unit_disc()));
        ComplexMat3::new(entries).expect("disc draws are finite")
    }
}

/// `GG† / tr(GG†)` for a complex Gaussian `G`.
pub fn random_density(src: &mut RandomSource) -> DensityMatrix {
    loop {
        let g = src.ginibre();
        let gram = g.multiply(&g.adjoint()).symmetrized();
        let trace = gram.trace().re;
        if trace > 0.0 {
            return DensityMatrix::from_mat_unchecked(gram.scale_real(1.0 / trace));
        }
    }
}

/// A channel with `k` Kraus factors: the column-orthonormalized stack of `k`
/// Gaussian blocks, cut back into 3×3 pieces.
pub fn random_channel(src: &mut RandomSource, k: usize) -> Result<KrausChannel> {
    if !(1..=9).contains(&k) {
        return Err(Error::InvalidArgument(format!("Kraus count {k} must lie in 1..=9")));
    }
    for _ in 0..MAX_DRAW_ATTEMPTS {
        let blocks: Vec<ComplexMat3> = (0..k).map(|_| src.ginibre()).collect();
        // Column c of the stacked 3k×3 matrix.
        let mut columns: Vec<Vec<Complex64>> = (0..3)
            .map(|c| blocks.iter().flat_map(|b| (0..3).map(move |r| b.get(r, c))).collect())
            .collect();
        if orthonormalize(&mut columns) {
            let factors = (0..k)
                .map(|block| {
                    let mut entries = [[Complex64::new(0.0, 0.0); 3]; 3];
                    for (r, row) in entries.iter_mut().enumerate() {
                        for (c, z) in row.iter_mut().enumerate() {
                            *z = columns[c][3 * block + r];
                        }
                    }
                    ComplexMat3::new(entries)
                })
                .collect::<Result<Vec<_>>>()?;
            return KrausChannel::new(factors, format!("random_k{k}"));
        }
    }
    Err(Error::DegenerateDraw { attempts: MAX_DRAW_ATTEMPTS })
}

/// Modified Gram–Schmidt in place; false if a column is numerically dependent.
fn orthonormalize(columns: &mut [Vec<Complex64>]) -> bool {
    for i in 0..columns.len() {
        let original: f64 = columns[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for j in 0..i {
            let (done, rest) = columns.split_at_mut(i);
            let proj: Complex64 = done[j].iter().zip(&rest[0]).map(|(q, v)| q.conj() * v).sum();
            for (v, q) in rest[0].iter_mut().zip(&done[j]) {
                *v -= proj * q;
            }
        }
        let norm: f64 = columns[i].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 1e-8 * original) {
            return false;
        }
        for v in &mut columns[i] {
            *v /= norm;
        }
    }
    true
}

/// A word of uniformly random length in `1..=max_len` with uniform letters.
pub fn random_word(src: &mut RandomSource, max_len: usize) -> Word {
    let len = 1 + src.below(max_len.max(1) as u64) as usize;
    Word::from_letters((0..len).map(|_| Letter::ALL[src.below(2) as usize]).collect())
}

/// An observed quantity and the bound it must respect.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Bound {
    pub observed: f64,
    pub bound: f64,
}

impl Bound {
    pub fn new(observed: f64, bound: f64) -> Self {
        Self { observed, bound }
    }

    pub fn holds(&self) -> bool {
        self.observed <= self.bound + CHECK_SLACK
    }

    pub fn margin(&self) -> f64 {
        self.bound - self.observed
    }
}

/// Aggregated outcome of one randomized check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub check_name: String,
    pub trials: u64,
    pub failures: u64,
    /// Smallest `bound - observed` over all trials.
    pub worst_margin: f64,
    pub seed: u64,
    pub params: Params,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

impl Serialize for CheckReport {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("CheckReport", 6)?;
        s.serialize_field("check_name", &self.check_name)?;
        s.serialize_field("trials", &self.trials)?;
        s.serialize_field("failures", &self.failures)?;
        s.serialize_field("worst_margin", &Sig17(self.worst_margin))?;
        s.serialize_field("seed", &self.seed)?;
        s.serialize_field("params", &self.params)?;
        s.end()
    }
}

/// Runs `trial` on streams `0..trials` in parallel and folds the results.
/// Both reductions are order independent.
fn run_trials<F>(name: &str, trials: u64, src: &RandomSource, params: Params, trial: F) -> CheckReport
where
    F: Fn(&mut RandomSource) -> Vec<Bound> + Sync,
{
    let (failures, worst_margin) = (0..trials)
        .into_par_iter()
        .map(|t| {
            let bounds = trial(&mut src.split(t));
            let failed = bounds.iter().any(|b| !b.holds());
            let margin = bounds.iter().map(Bound::margin).fold(f64::INFINITY, f64::min);
            (u64::from(failed), margin)
        })
        .reduce(|| (0, f64::INFINITY), |a, b| (a.0 + b.0, a.1.min(b.1)));
    CheckReport {
        check_name: name.to_owned(),
        trials,
        failures,
        worst_margin,
        seed: src.seed(),
        params,
    }
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(Error::InvalidArgument("trials must be at least 1".into()))
    } else {
        Ok(())
    }
}

/// `D(Φρ, Φσ) ≤ D(ρ, σ)`.
pub fn contraction_bound(channel: &KrausChannel, rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<Bound> {
    Ok(Bound::new(
        trace_distance(&channel.apply(rho)?, &channel.apply(sigma)?),
        trace_distance(rho, sigma),
    ))
}

/// Channels with 1 to 3 Kraus factors acting on random state pairs.
pub fn check_contraction(trials: u64, src: &RandomSource) -> Result<CheckReport> {
    check_trials(trials)?;
    Ok(run_trials("contraction", trials, src, Params::default(), |rng| {
        let k = 1 + rng.below(3) as usize;
        let channel = random_channel(rng, k).expect("random channel");
        let rho = random_density(rng);
        let sigma = random_density(rng);
        vec![contraction_bound(&channel, &rho, &sigma).expect("valid channel")]
    }))
}

/// `‖MN‖₁ ≤ ‖M‖_∞‖N‖₁`, `‖M‖_∞ ≤ ‖M‖_F` and `‖M‖_F ≤ 3·max|M_ij|`.
pub fn holder_bounds(m: &ComplexMat3, n: &ComplexMat3) -> [Bound; 3] {
    let frobenius = m.schatten_norm(SchattenOrder::Two);
    let operator = m.schatten_norm(SchattenOrder::Infinity);
    [
        Bound::new(
            m.multiply(n).schatten_norm(SchattenOrder::One),
            operator * n.schatten_norm(SchattenOrder::One),
        ),
        Bound::new(operator, frobenius),
        Bound::new(frobenius, 3.0 * m.max_abs_entry()),
    ]
}

/// Matrix pairs with entries uniform in the unit disc.
pub fn check_holder(trials: u64, src: &RandomSource) -> Result<CheckReport> {
    check_trials(trials)?;
    Ok(run_trials("holder", trials, src, Params::default(), |rng| {
        let m = rng.disc_matrix();
        let n = rng.disc_matrix();
        holder_bounds(&m, &n).to_vec()
    }))
}

/// `δ(θ) = 3θ + 4.5θ²`, the certified single-step distance bound for `B_n`.
pub fn step_bound(theta: f64) -> f64 {
    3.0 * theta + 4.5 * theta * theta
}

/// The entry bound `max|(B - I)_ij| ≤ θ`, which does not depend on the state.
pub fn rotation_entry_bound(param: ChannelFamilyParam) -> Bound {
    let deviation = (rotation_matrix(param) - ComplexMat3::identity()).max_abs_entry();
    Bound::new(deviation, param.theta())
}

/// Bounds on `D(ρ, BρB†)` for the rotation letter, from coarse to fine:
/// the intermediate `‖BρB† - ρ‖₁ ≤ ‖B - I‖_∞(‖B‖_∞ + 1) ≤ 3θ(2 + 3θ)`,
/// then `D ≤ 3θ + 4.5θ²`, and `D ≤ 4θ` when `θ ≤ 2/9`.
pub fn rotation_bounds(param: ChannelFamilyParam, rho: &DensityMatrix) -> Vec<Bound> {
    let theta = param.theta();
    let b = rotation_matrix(param);
    let rotated = b.multiply(rho.mat()).multiply(&b.adjoint());
    let diff = rotated - *rho.mat();
    let diff_norm = diff.schatten_norm(SchattenOrder::One);
    let e_norm = (b - ComplexMat3::identity()).schatten_norm(SchattenOrder::Infinity);
    let factored = e_norm * (b.schatten_norm(SchattenOrder::Infinity) + 1.0);
    let distance = half_trace_norm(&diff);

    let mut bounds = vec![
        rotation_entry_bound(param),
        Bound::new(diff_norm, factored),
        Bound::new(factored, 3.0 * theta * (2.0 + 3.0 * theta)),
        Bound::new(distance, step_bound(theta)),
    ];
    if theta <= FOUR_EPSILON_LIMIT {
        bounds.push(Bound::new(distance, 4.0 * theta));
    }
    bounds
}

pub fn check_rotation_bounds(n: u32, trials: u64, src: &RandomSource) -> Result<CheckReport> {
    check_trials(trials)?;
    let param = ChannelFamilyParam::new(n)?;
    let theta = param.theta();
    let params = Params::default()
        .int("n", n.into())
        .real("theta", theta)
        .real("delta", step_bound(theta))
        .int("four_theta_clause", i64::from(theta <= FOUR_EPSILON_LIMIT));
    Ok(run_trials("rotation_bounds", trials, src, params, |rng| {
        rotation_bounds(param, &random_density(rng))
    }))
}

/// `D(Bˢρ, ρ) ≤ s·δ` for `s = 0..=s_max`.
pub fn power_bounds(param: ChannelFamilyParam, s_max: usize, rho: &DensityMatrix) -> Vec<Bound> {
    let alphabet = Alphabet::new(param);
    let delta = step_bound(param.theta());
    let mut state = *rho;
    let mut bounds = Vec::with_capacity(s_max + 1);
    for s in 0..=s_max {
        if s > 0 {
            state = alphabet.step(Letter::B, &state);
        }
        bounds.push(Bound::new(trace_distance(&state, rho), s as f64 * delta));
    }
    bounds
}

pub fn check_power_bound(n: u32, s_max: usize, trials: u64, src: &RandomSource) -> Result<CheckReport> {
    check_trials(trials)?;
    let param = ChannelFamilyParam::new(n)?;
    let params = Params::default()
        .int("n", n.into())
        .int("s_max", s_max as i64)
        .real("delta", step_bound(param.theta()));
    Ok(run_trials("power_bound", trials, src, params, |rng| {
        power_bounds(param, s_max, &random_density(rng))
    }))
}

/// `D(w(ρ), A^{Σa}(ρ)) ≤ δ·Σb`, where `Σa` and `Σb` count the `A` and `B`
/// letters of `w` (the sums of its run lengths).
pub fn word_decomposition_bound(param: ChannelFamilyParam, word: &Word, rho: &DensityMatrix) -> Result<Bound> {
    let alphabet = Alphabet::new(param);
    let (sum_a, sum_b) = run_sums(word);
    let only_a = Word::from_letters(vec![Letter::A; sum_a]);
    let lhs = alphabet.apply_word(word, rho)?;
    let rhs = alphabet.apply_word(&only_a, rho)?;
    Ok(Bound::new(trace_distance(&lhs, &rhs), step_bound(param.theta()) * sum_b as f64))
}

fn run_sums(word: &Word) -> (usize, usize) {
    word.runs().iter().fold((0, 0), |(a, b), &(letter, len)| match letter {
        Letter::A => (a + len, b),
        Letter::B => (a, b + len),
    })
}

pub fn check_word_decomposition(n: u32, word: &Word, trials: u64, src: &RandomSource) -> Result<CheckReport> {
    check_trials(trials)?;
    if word.is_empty() {
        return Err(Error::InvalidArgument("word must be nonempty".into()));
    }
    let param = ChannelFamilyParam::new(n)?;
    let (sum_a, sum_b) = run_sums(word);
    let params = Params::default()
        .int("n", n.into())
        .text("word", word.to_string())
        .int("runs", word.runs().len() as i64)
        .int("sum_a", sum_a as i64)
        .int("sum_b", sum_b as i64)
        .real("delta", step_bound(param.theta()));
    Ok(run_trials("word_decomposition", trials, src, params, |rng| {
        vec![word_decomposition_bound(param, word, &random_density(rng)).expect("valid channels")]
    }))
}

/// Settings for [`run_suite`].
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub trials: u64,
    pub n: u32,
    pub s_max: usize,
    /// Word for the decomposition check; `A·Bⁿ·A` when absent.
    pub word: Option<Word>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, trials: 10_000, n: 16, s_max: 32, word: None }
    }
}

/// All five checks, in a fixed order.
pub fn run_suite(config: &SuiteConfig) -> Result<Vec<CheckReport>> {
    let src = RandomSource::new(config.seed);
    let word = config.word.clone().unwrap_or_else(|| Word::rotation_sandwich(config.n));
    Ok(vec![
        check_contraction(config.trials, &src)?,
        check_holder(config.trials, &src)?,
        check_rotation_bounds(config.n, config.trials, &src)?,
        check_power_bound(config.n, config.s_max, config.trials, &src)?,
        check_word_decomposition(config.n, &word, config.trials, &src)?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channels::channel_b;

    fn param(n: u32) -> ChannelFamilyParam {
        ChannelFamilyParam::new(n).unwrap()
    }

    fn src() -> RandomSource {
        RandomSource::new(DEFAULT_SEED)
    }

    #[test]
    fn random_density_is_valid_and_reproducible() {
        for seed in 0..50 {
            let rho = random_density(&mut RandomSource::new(seed));
            assert!((rho.mat().trace().re - 1.0).abs() <= 1e-12);
            assert!(rho.eigenvalues()[2] >= -1e-12);
            assert!(DensityMatrix::new(*rho.mat()).is_ok());
            assert_eq!(rho, random_density(&mut RandomSource::new(seed)));
        }
    }

    #[test]
    fn split_streams_are_distinct_and_stable() {
        let a = random_density(&mut src().split(3));
        let b = random_density(&mut src().split(4));
        assert_ne!(a, b);
        assert_eq!(a, random_density(&mut src().split(3)));
    }

    #[test]
    fn random_channels_are_complete() {
        for k in 1..=9 {
            let mut rng = RandomSource::new(k as u64);
            let ch = random_channel(&mut rng, k).unwrap();
            assert_eq!(ch.factors().len(), k);
            assert!(ch.completeness_defect() <= 1e-12, "k={k}");
            let again = random_channel(&mut RandomSource::new(k as u64), k).unwrap();
            assert_eq!(ch, again);
        }
        let u = random_channel(&mut src(), 1).unwrap().factors()[0];
        assert!((u.adjoint() * u).approx_eq(&ComplexMat3::identity(), 1e-12));
        assert!(random_channel(&mut src(), 0).is_err());
        assert!(random_channel(&mut src(), 10).is_err());
    }

    #[test]
    fn contraction_edge_cases() {
        let mut rng = src();
        let rho = random_density(&mut rng);
        let sigma = random_density(&mut rng);
        let unitary = random_channel(&mut rng, 1).unwrap();
        let b = contraction_bound(&unitary, &rho, &sigma).unwrap();
        assert!((b.observed - b.bound).abs() <= 1e-10);

        // Replace every input with |e_1⟩⟨e_1|.
        let reset = (0..3)
            .map(|j| {
                let mut rows = [[0.0; 3]; 3];
                rows[0][j] = 1.0;
                ComplexMat3::from_real(rows).unwrap()
            })
            .collect();
        let reset = KrausChannel::new(reset, "reset").unwrap();
        let b = contraction_bound(&reset, &rho, &sigma).unwrap();
        assert!(b.observed.abs() < 1e-15);
        assert!(b.holds());
    }

    #[test]
    fn holder_examples() {
        let id = ComplexMat3::identity();
        let [product, ..] = holder_bounds(&id, &id);
        assert!((product.observed - 3.0).abs() < 1e-14 && (product.bound - 3.0).abs() < 1e-14);

        let p = ComplexMat3::diagonal([1.0, 0.0, 0.0]);
        let [product, ..] = holder_bounds(&p, &p);
        assert!((product.observed - 1.0).abs() < 1e-14 && (product.bound - 1.0).abs() < 1e-14);
        assert!(product.holds());
    }

    #[test]
    fn rotation_examples() {
        let e3 = DensityMatrix::basis(2);
        let bounds = rotation_bounds(param(8), &e3);
        assert_eq!(bounds.len(), 5);
        assert!(bounds[3].observed.abs() < 1e-15);
        assert!(bounds.iter().all(Bound::holds));
        assert!((4.0 * param(8).theta() - 0.78540).abs() < 1e-5);

        // θ = π/2 exceeds 2/9: only the coarse bound, ≈ 15.81.
        let bounds = rotation_bounds(param(1), &DensityMatrix::basis(0));
        assert_eq!(bounds.len(), 4);
        assert!((bounds[3].bound - 15.815).abs() < 1e-3);
        assert!(bounds.iter().all(Bound::holds));

        for n in [1, 2, 3, 8, 100] {
            let entry = rotation_entry_bound(param(n));
            assert!(entry.holds(), "n={n}");
        }
    }

    #[test]
    fn power_examples() {
        let e1 = DensityMatrix::basis(0);
        let bounds = power_bounds(param(8), 8, &e1);
        assert_eq!(bounds[0].observed, 0.0);
        assert_eq!(bounds[0].bound, 0.0);
        assert!((bounds[8].observed - 1.0).abs() < 1e-12);
        assert!((bounds[8].bound - 8.0 * step_bound(PI / 16.0)).abs() < 1e-12);
        assert!((bounds[8].bound - 6.1).abs() < 0.01);
        assert!(bounds.iter().all(Bound::holds));
    }

    #[test]
    fn decomposition_examples() {
        let e1 = DensityMatrix::basis(0);
        let b = word_decomposition_bound(param(8), &"AAAA".parse().unwrap(), &e1).unwrap();
        assert_eq!((b.observed, b.bound), (0.0, 0.0));

        let b = word_decomposition_bound(param(8), &"AB".parse().unwrap(), &e1).unwrap();
        assert!((b.bound - step_bound(PI / 16.0)).abs() < 1e-15);
        assert!((b.bound - 0.76).abs() < 0.01);
        assert!(b.holds());

        let b = word_decomposition_bound(param(8), &"BBBBBBBB".parse().unwrap(), &e1).unwrap();
        assert!((b.observed - 1.0).abs() < 1e-12);
        assert!(b.holds());

        assert!(check_word_decomposition(8, &Word::empty(), 1, &src()).is_err());
    }

    #[test]
    fn reports_are_deterministic_and_serialize_in_order() {
        let a = check_contraction(200, &src()).unwrap();
        let b = check_contraction(200, &src()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.failures, 0);
        assert!(a.worst_margin >= -1e-10);
        let json = serde_json::to_string(&a).unwrap();
        assert_eq!(json, serde_json::to_string(&b).unwrap());
        assert!(json.starts_with(r#"{"check_name":"contraction","trials":200,"failures":0,"worst_margin":"#));
        assert!(json.ends_with(r#","seed":20250101,"params":{}}"#));
    }

    #[test]
    fn unitary_letter_preserves_distance() {
        let mut rng = src();
        let b = channel_b(param(5));
        for _ in 0..50 {
            let bound = contraction_bound(&b, &random_density(&mut rng), &random_density(&mut rng)).unwrap();
            assert!((bound.observed - bound.bound).abs() <= 1e-10);
        }
    }

    #[test]
    fn suite_passes_at_small_scale() {
        let config = SuiteConfig { trials: 300, ..Default::default() };
        let reports = run_suite(&config).unwrap();
        assert_eq!(reports.len(), 5);
        for r in &reports {
            assert!(r.passed(), "{r:?}");
        }
    }
}
