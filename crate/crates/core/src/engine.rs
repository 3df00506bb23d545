//! Framework enumeration and the quantum prediction as a sum of nonrandom
//! parts of classical per-framework predictions.
//!
//! A framework `(B', S_n, …, S_1, B)` fixes the epistemic restrictions for
//! the measurement, the channels and the preparation. The classical
//! prediction of a framework is an ordinary law of total probability over
//! the restricted distributions; the quantum probability is
//! `(1/Zⁿ) Σ_F ΔR^F` plus the random part `(1/d) tr E`.
//!
//! Because every restricted object is constant on lines (states,
//! measurements) or depends only on the displacement class (channels), a
//! framework evaluates in `O(n d²)` through per-line vectors instead of
//! `O(d⁴)` phase-space sums: pushing a line distribution through a channel
//! is a `d × d` transfer-matrix product. The identity used is that a line
//! of the image striation, shifted by a displacement, is again a line of
//! the image striation, with indices composing affinely. The same pipeline
//! evaluated per framework ("enumerate") or accumulated per striation
//! level ("aggregate") gives bit-reproducible, associativity-controlled
//! sums.

use crate::error::{Error, Result};
use crate::field::FiniteField;
use crate::linalg::CMat;
use crate::mrs;
use crate::ops::{Channel, PhaseOps};
use crate::phase::{
    all_striations, image_line_scale, legal_symplectics, point_from_index, redundancy_factor,
    striation_image, SetMode, Slope, Striation, SymplecticMatrix,
};
use crate::quasi::{quasi_of_channel, quasi_of_measurement, wigner_of_state};
use crate::restricted::{marginal, restrict_channel, restrict_measurement};
use crate::util::PairwiseSum;
use crate::CONTRIB_TOL;

/// A framework `(B', S_n, …, S_1, B)`. The chain is stored in application
/// order (`S_1` first).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Framework {
    pub prep: Slope,
    pub chain: Vec<SymplecticMatrix>,
    pub meas: Slope,
}

impl Framework {
    pub fn label(&self, field: &FiniteField) -> String {
        let mut parts = vec![format!("B'={}", self.meas.label(field))];
        for s in self.chain.iter().rev() {
            parts.push(s.label(field));
        }
        parts.push(format!("B={}", self.prep.label(field)));
        format!("({})", parts.join(", "))
    }
}

/// A preparation, a chain of unital channels, and a measurement effect.
#[derive(Debug, Clone)]
pub struct ExperimentSpec {
    pub field: FiniteField,
    pub state: CMat,
    pub channels: Vec<Channel>,
    pub effect: CMat,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum FrameworkFilter {
    /// Every `(B', S_n, …, S_1, B)` combination.
    All,
    /// Only frameworks with `B' = S_n ⋯ S_1 B`; the rest contribute zero.
    Coherent,
}

/// Options for [`quantum_predict`] and friends.
#[derive(Clone, Debug)]
pub struct PredictOptions {
    pub mode: SetMode,
    pub filter: FrameworkFilter,
    /// Explicit minimal reconstructing set; when `mode` is `Mrs` and this
    /// is empty, a search runs with `mrs_budget`.
    pub mrs_set: Option<Vec<SymplecticMatrix>>,
    pub mrs_budget: u64,
    /// Per-framework rows retained in the report.
    pub report_rows: usize,
    /// Threshold for counting a framework as contributing.
    pub contrib_tol: f64,
    pub threads: usize,
}

impl Default for PredictOptions {
    fn default() -> Self {
        Self {
            mode: SetMode::FullGroup,
            filter: FrameworkFilter::Coherent,
            mrs_set: None,
            mrs_budget: mrs::DEFAULT_BUDGET,
            report_rows: 256,
            contrib_tol: CONTRIB_TOL,
            threads: 1,
        }
    }
}

/// One framework's classical prediction and its nonrandom part.
#[derive(Debug, Clone)]
pub struct FrameworkRow {
    pub framework: Framework,
    pub classical: f64,
    pub delta: f64,
}

/// Result of a quantum prediction.
#[derive(Debug, Clone)]
pub struct PredictOutcome {
    /// `Δ-sum + (1/d) tr E`, clamped to `[0, 1]`.
    pub probability: f64,
    /// The unclamped value.
    pub raw: f64,
    /// `(1/Zⁿ) Σ_F ΔR^F`.
    pub delta_sum: f64,
    /// `(1/d) tr E`.
    pub random_part: f64,
    pub z: usize,
    pub framework_count: u64,
    /// Frameworks with `|ΔR^F|` above the contribution threshold.
    pub contributing: u64,
    pub rows: Vec<FrameworkRow>,
    pub rows_truncated: bool,
}

/// The symplectic set selected by the mode, with its redundancy factor.
pub fn resolve_set(
    field: &FiniteField,
    opts: &PredictOptions,
) -> Result<(Vec<SymplecticMatrix>, usize)> {
    match opts.mode {
        SetMode::FullGroup => Ok((
            legal_symplectics(field),
            redundancy_factor(field, SetMode::FullGroup),
        )),
        SetMode::Mrs => {
            let set = match &opts.mrs_set {
                Some(set) => {
                    if !mrs::verify(field, set) {
                        return Err(Error::MrsUnavailable(
                            "supplied set fails the pairwise certificate".into(),
                        ));
                    }
                    set.clone()
                }
                None => match mrs::search(field, opts.mrs_budget).outcome {
                    mrs::MrsOutcome::Found(set) => set,
                    mrs::MrsOutcome::Exhausted => {
                        return Err(Error::MrsUnavailable(
                            "search exhausted without finding a set".into(),
                        ))
                    }
                    mrs::MrsOutcome::BudgetExceeded => {
                        return Err(Error::MrsUnavailable("search budget exceeded".into()))
                    }
                },
            };
            Ok((set, 1))
        }
    }
}

/// Enumerates frameworks in deterministic order: preparation striation,
/// then the chain (first channel outermost), then the measurement
/// striation. Counts are `(d+1)²·|set|ⁿ` for `All` and `(d+1)·|set|ⁿ` for
/// `Coherent`. Materializes the whole list; the predict entry points
/// stream instead.
pub fn enumerate_frameworks(
    field: &FiniteField,
    n_channels: usize,
    set: &[SymplecticMatrix],
    filter: FrameworkFilter,
) -> Vec<Framework> {
    let slopes: Vec<Slope> = all_striations(field).iter().map(|b| b.slope()).collect();
    let mut out = Vec::new();
    let mut chain = Vec::with_capacity(n_channels);
    for &prep in &slopes {
        enumerate_rec(field, &slopes, set, filter, prep, prep, &mut chain, &mut out);
    }
    out
}

#[allow(clippy::too_many_arguments)]
fn enumerate_rec(
    field: &FiniteField,
    slopes: &[Slope],
    set: &[SymplecticMatrix],
    filter: FrameworkFilter,
    prep: Slope,
    current: Slope,
    chain: &mut Vec<SymplecticMatrix>,
    out: &mut Vec<Framework>,
) {
    if chain.len() == chain.capacity() {
        match filter {
            FrameworkFilter::Coherent => out.push(Framework {
                prep,
                chain: chain.clone(),
                meas: current,
            }),
            FrameworkFilter::All => {
                for &meas in slopes {
                    out.push(Framework {
                        prep,
                        chain: chain.clone(),
                        meas,
                    });
                }
            }
        }
        return;
    }
    for s in set {
        chain.push(*s);
        let next = striation_image(field, s, current);
        enumerate_rec(field, slopes, set, filter, prep, next, chain, out);
        chain.pop();
    }
}

/// The image of a striation under a whole chain (applied in order).
pub fn apply_chain_image(field: &FiniteField, chain: &[SymplecticMatrix], b: Slope) -> Slope {
    chain
        .iter()
        .fold(b, |cur, s| striation_image(field, s, cur))
}

// --- compiled experiment -------------------------------------------------

struct Compiled {
    d: usize,
    striations: Vec<Striation>,
    set: Vec<SymplecticMatrix>,
    trace_e: f64,
    /// Δ line probabilities of the prepared state, per striation.
    drho: Vec<Vec<f64>>,
    /// Δ line values of the effect, per striation.
    de_line: Vec<Vec<f64>>,
    /// Transfer matrices: `transfer[i][s][b]` is the flat `d×d` map from
    /// Δ line distributions on `b` to Δ line distributions on `image[s][b]`.
    transfer: Vec<Vec<Vec<Vec<f64>>>>,
    image: Vec<Vec<usize>>,
    /// `lineidx[b][point_index]` is the line of the point in striation `b`.
    lineidx: Vec<Vec<usize>>,
}

impl Compiled {
    fn new(spec: &ExperimentSpec, set: Vec<SymplecticMatrix>) -> Result<Self> {
        let field = &spec.field;
        let d = field.order();
        let ops = PhaseOps::new(field);
        if spec.state.dim() != d || spec.effect.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: spec.state.dim(),
            });
        }
        let striations = all_striations(field);
        let wq = wigner_of_state(&ops, &spec.state)?;
        let qm = quasi_of_measurement(&ops, &spec.effect)?;
        let trace_e = qm.trace_e();

        let mut drho = Vec::with_capacity(d + 1);
        let mut de_line = Vec::with_capacity(d + 1);
        for b in &striations {
            let rho = marginal(&wq, b)?;
            drho.push(rho.iter().map(|p| p - 1.0 / d as f64).collect());
            let rm = restrict_measurement(&qm, b)?;
            // line value of R^B(E|·) minus (1/d) tr E, one entry per line
            let mut lines = vec![0.0; d];
            for (t, line) in b.lines().iter().enumerate() {
                let pt = line.points(field)[0];
                lines[t] = rm.value(field, pt) - trace_e / d as f64;
            }
            de_line.push(lines);
        }

        let lineidx: Vec<Vec<usize>> = striations
            .iter()
            .map(|b| {
                (0..d * d)
                    .map(|idx| b.line_index(field, point_from_index(field, idx)))
                    .collect()
            })
            .collect();

        let mut image = vec![vec![0usize; d + 1]; set.len()];
        let mut transfer = Vec::with_capacity(spec.channels.len());
        for ch in &spec.channels {
            if ch.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: ch.dim(),
                });
            }
            let qe = quasi_of_channel(&ops, ch)?;
            let mut per_s = Vec::with_capacity(set.len());
            for (si, s) in set.iter().enumerate() {
                let rc = restrict_channel(&qe, s)?;
                let dp = rc.nonrandom();
                let mut per_b = Vec::with_capacity(d + 1);
                for (bi, b) in striations.iter().enumerate() {
                    let (img_slope, lambda) = image_line_scale(field, s, b.slope());
                    let img = img_slope.order_index(field);
                    image[si][bi] = img;
                    // line sums of ΔP^S over the image striation
                    let mut sigma = vec![0.0; d];
                    for (didx, dv) in dp.iter().enumerate() {
                        sigma[lineidx[img][didx]] += dv;
                    }
                    // M[t][c] = σ(t − λ·c)
                    let mut m = vec![0.0; d * d];
                    for t in 0..d {
                        for c in 0..d {
                            let j = field
                                .sub(field.element(t), field.mul(lambda, field.element(c)))
                                .index();
                            m[t * d + c] = sigma[j];
                        }
                    }
                    per_b.push(m);
                }
                per_s.push(per_b);
            }
            transfer.push(per_s);
        }

        Ok(Self {
            d,
            striations,
            set,
            trace_e,
            drho,
            de_line,
            transfer,
            image,
            lineidx,
        })
    }

    /// `ΔR^F` for a measurement striation against the pipeline state `dv`
    /// living on striation `b_end`.
    fn contract(&self, meas: usize, b_end: usize, dv: &[f64]) -> f64 {
        if meas == b_end {
            self.de_line[meas]
                .iter()
                .zip(dv)
                .map(|(e, v)| e * v)
                .sum()
        } else {
            // generic phase-space sum: R^{B'}(E|β) is a line value of B',
            // the pipeline state spreads dv uniformly over lines of b_end
            let d = self.d as f64;
            let mut acc = 0.0;
            for idx in 0..self.d * self.d {
                acc += self.de_line[meas][self.lineidx[meas][idx]]
                    * dv[self.lineidx[b_end][idx]];
            }
            acc / d
        }
    }
}

// --- per-framework enumeration -------------------------------------------

struct ChunkAccum {
    sum: PairwiseSum,
    count: u64,
    contributing: u64,
    rows: Vec<FrameworkRow>,
    rows_cap: usize,
    rows_truncated: bool,
    contrib_tol: f64,
    trace_e_over_d: f64,
}

impl ChunkAccum {
    fn record(&mut self, compiled: &Compiled, prep: usize, chain: &[usize], meas: usize, dr: f64) {
        self.sum.push(dr);
        self.count += 1;
        if dr.abs() > self.contrib_tol {
            self.contributing += 1;
        }
        if self.rows.len() < self.rows_cap {
            let fw = Framework {
                prep: self.slope_of(compiled, prep),
                chain: chain.iter().map(|&si| compiled.set[si]).collect(),
                meas: self.slope_of(compiled, meas),
            };
            self.rows.push(FrameworkRow {
                framework: fw,
                classical: dr + self.trace_e_over_d,
                delta: dr,
            });
        } else {
            self.rows_truncated = true;
        }
    }

    fn slope_of(&self, compiled: &Compiled, b: usize) -> Slope {
        compiled.striations[b].slope()
    }
}

fn run_chunk(compiled: &Compiled, prep: usize, filter: FrameworkFilter, acc: &mut ChunkAccum) {
    let n = compiled.transfer.len();
    let d = compiled.d;
    // one scratch line-vector per depth
    let mut scratch: Vec<Vec<f64>> = (0..n).map(|_| vec![0.0; d]).collect();
    let mut chain = Vec::with_capacity(n);
    rec(compiled, prep, filter, 0, prep, &mut chain, &mut scratch, acc);

    #[allow(clippy::too_many_arguments)]
    fn rec(
        compiled: &Compiled,
        prep: usize,
        filter: FrameworkFilter,
        depth: usize,
        b_cur: usize,
        chain: &mut Vec<usize>,
        scratch: &mut [Vec<f64>],
        acc: &mut ChunkAccum,
    ) {
        let n = compiled.transfer.len();
        if depth == n {
            let dv: &[f64] = if n == 0 {
                &compiled.drho[prep]
            } else {
                &scratch[n - 1]
            };
            match filter {
                FrameworkFilter::Coherent => {
                    let dr = compiled.contract(b_cur, b_cur, dv);
                    acc.record(compiled, prep, chain, b_cur, dr);
                }
                FrameworkFilter::All => {
                    for meas in 0..compiled.striations.len() {
                        let dr = compiled.contract(meas, b_cur, dv);
                        acc.record(compiled, prep, chain, meas, dr);
                    }
                }
            }
            return;
        }
        let d = compiled.d;
        for si in 0..compiled.set.len() {
            let m = &compiled.transfer[depth][si][b_cur];
            let b_next = compiled.image[si][b_cur];
            // scratch[depth] = M · (previous level)
            let (prev, rest) = scratch.split_at_mut(depth);
            let src: &[f64] = if depth == 0 {
                &compiled.drho[prep]
            } else {
                &prev[depth - 1]
            };
            let dst = &mut rest[0];
            for t in 0..d {
                let row = &m[t * d..(t + 1) * d];
                dst[t] = row.iter().zip(src).map(|(a, b)| a * b).sum();
            }
            chain.push(si);
            rec(compiled, prep, filter, depth + 1, b_next, chain, scratch, acc);
            chain.pop();
        }
    }
}

/// The quantum prediction as a per-framework sum of nonrandom parts:
/// `P = (1/Zⁿ) Σ_F ΔR^F + (1/d) tr E`, matching the Hilbert-space Born
/// value. Frameworks stream in deterministic enumeration order; the sum
/// uses a pairwise reduction per preparation striation so results are
/// bit-identical for any thread count.
pub fn quantum_predict(spec: &ExperimentSpec, opts: &PredictOptions) -> Result<PredictOutcome> {
    let (set, z) = resolve_set(&spec.field, opts)?;
    let compiled = Compiled::new(spec, set)?;
    let n = spec.channels.len();
    let d = compiled.d;
    let trace_e_over_d = compiled.trace_e / d as f64;

    let chunk_count = d + 1;
    let make_acc = |rows_cap: usize| ChunkAccum {
        sum: PairwiseSum::new(),
        count: 0,
        contributing: 0,
        rows: Vec::new(),
        rows_cap,
        rows_truncated: false,
        contrib_tol: opts.contrib_tol,
        trace_e_over_d,
    };

    let chunks: Vec<ChunkAccum> = if opts.threads <= 1 {
        (0..chunk_count)
            .map(|prep| {
                let mut acc = make_acc(opts.report_rows);
                run_chunk(&compiled, prep, opts.filter, &mut acc);
                acc
            })
            .collect()
    } else {
        let next = std::sync::atomic::AtomicUsize::new(0);
        let mut slots: Vec<Option<ChunkAccum>> = (0..chunk_count).map(|_| None).collect();
        let slot_refs: Vec<std::sync::Mutex<&mut Option<ChunkAccum>>> =
            slots.iter_mut().map(std::sync::Mutex::new).collect();
        std::thread::scope(|scope| {
            for _ in 0..opts.threads.min(chunk_count) {
                scope.spawn(|| loop {
                    let prep = next.fetch_add(1, std::sync::atomic::Ordering::Relaxed);
                    if prep >= chunk_count {
                        break;
                    }
                    let mut acc = make_acc(opts.report_rows);
                    run_chunk(&compiled, prep, opts.filter, &mut acc);
                    **slot_refs[prep].lock().unwrap() = Some(acc);
                });
            }
        });
        slots.into_iter().map(|s| s.unwrap()).collect()
    };

    // deterministic merge in preparation-striation order
    let mut delta_sum = 0.0;
    let mut count = 0;
    let mut contributing = 0;
    let mut rows = Vec::new();
    let mut rows_truncated = false;
    for acc in chunks {
        delta_sum += acc.sum.total();
        count += acc.count;
        contributing += acc.contributing;
        rows_truncated |= acc.rows_truncated;
        for row in acc.rows {
            if rows.len() < opts.report_rows {
                rows.push(row);
            } else {
                rows_truncated = true;
            }
        }
    }
    let zn = (z as f64).powi(n as i32);
    let delta_sum = delta_sum / zn;
    let raw = delta_sum + trace_e_over_d;
    Ok(PredictOutcome {
        probability: raw.clamp(0.0, 1.0),
        raw,
        delta_sum,
        random_part: trace_e_over_d,
        z,
        framework_count: count,
        contributing,
        rows,
        rows_truncated,
    })
}

/// The same framework sum evaluated by striation-level dynamic programming
/// (sum first, contract once): numerically a reassociation of
/// [`quantum_predict`]'s sum, and far cheaper for large `|set|ⁿ`.
/// Returns `(delta_sum, framework_count)`.
pub fn quantum_predict_aggregate(
    spec: &ExperimentSpec,
    opts: &PredictOptions,
) -> Result<(f64, u64)> {
    let (set, z) = resolve_set(&spec.field, opts)?;
    let compiled = Compiled::new(spec, set)?;
    let n = spec.channels.len();
    let d = compiled.d;
    let nb = d + 1;
    let mut w: Vec<Vec<f64>> = compiled.drho.clone();
    for depth in 0..n {
        let mut next: Vec<Vec<f64>> = vec![vec![0.0; d]; nb];
        for (si, _) in compiled.set.iter().enumerate() {
            for b in 0..nb {
                let m = &compiled.transfer[depth][si][b];
                let img = compiled.image[si][b];
                let src = &w[b];
                let dst = &mut next[img];
                for t in 0..d {
                    let row = &m[t * d..(t + 1) * d];
                    dst[t] += row.iter().zip(src).map(|(a, b)| a * b).sum::<f64>();
                }
            }
        }
        w = next;
    }
    let mut total = 0.0;
    match opts.filter {
        FrameworkFilter::Coherent => {
            for b in 0..nb {
                total += compiled.contract(b, b, &w[b]);
            }
        }
        FrameworkFilter::All => {
            for b_end in 0..nb {
                for meas in 0..nb {
                    total += compiled.contract(meas, b_end, &w[b_end]);
                }
            }
        }
    }
    let count = {
        let chains = (compiled.set.len() as u64).pow(n as u32);
        match opts.filter {
            FrameworkFilter::Coherent => nb as u64 * chains,
            FrameworkFilter::All => (nb as u64) * (nb as u64) * chains,
        }
    };
    Ok((total / (z as f64).powi(n as i32), count))
}

/// The classical prediction `R^F` of a single framework: a genuine
/// probability obtained by the ordinary law of total probability over the
/// restricted distributions.
pub fn classical_predict(spec: &ExperimentSpec, fw: &Framework) -> Result<f64> {
    if fw.chain.len() != spec.channels.len() {
        return Err(Error::DimensionMismatch {
            expected: spec.channels.len(),
            got: fw.chain.len(),
        });
    }
    let set = fw.chain.clone();
    // compile against exactly the chain's matrices (set indices = chain order)
    let compiled = Compiled::new(
        spec,
        if set.is_empty() {
            vec![SymplecticMatrix::identity(&spec.field)]
        } else {
            set
        },
    )?;
    let field = &spec.field;
    let d = compiled.d;
    let prep = fw.prep.order_index(field);
    let meas = fw.meas.order_index(field);
    let mut b_cur = prep;
    let mut dv = compiled.drho[prep].clone();
    for (depth, _) in fw.chain.iter().enumerate() {
        let si = if fw.chain.is_empty() { 0 } else { depth };
        let m = &compiled.transfer[depth][si][b_cur];
        let mut next = vec![0.0; d];
        for t in 0..d {
            let row = &m[t * d..(t + 1) * d];
            next[t] = row.iter().zip(&dv).map(|(a, b)| a * b).sum();
        }
        b_cur = compiled.image[si][b_cur];
        dv = next;
    }
    let dr = compiled.contract(meas, b_cur, &dv);
    Ok(dr + compiled.trace_e / d as f64)
}

/// Report from [`coherence_equivalence_check`].
#[derive(Debug, Clone)]
pub struct CoherenceReport {
    /// `(1/Zⁿ) Σ` over all frameworks.
    pub delta_sum_all: f64,
    /// `(1/Zⁿ) Σ` over coherent frameworks only.
    pub delta_sum_coherent: f64,
    pub deviation: f64,
    /// Largest `|ΔR^F|` over the incoherent frameworks inspected.
    pub max_incoherent: f64,
    pub incoherent_checked: u64,
    pub incoherent_total: u64,
}

/// Verifies that the full framework sum equals the coherent-only sum and
/// that incoherent frameworks vanish individually. `sample` bounds the
/// number of incoherent frameworks inspected per preparation striation
/// (deterministically seeded); `None` inspects all of them.
pub fn coherence_equivalence_check(
    spec: &ExperimentSpec,
    opts: &PredictOptions,
    sample: Option<(u64, u64)>,
) -> Result<CoherenceReport> {
    let all = quantum_predict_aggregate(
        spec,
        &PredictOptions {
            filter: FrameworkFilter::All,
            ..opts.clone()
        },
    )?;
    let coherent = quantum_predict_aggregate(
        spec,
        &PredictOptions {
            filter: FrameworkFilter::Coherent,
            ..opts.clone()
        },
    )?;

    let (set, _z) = resolve_set(&spec.field, opts)?;
    let compiled = Compiled::new(spec, set)?;
    let n = spec.channels.len();
    let d = compiled.d;
    let nb = d + 1;
    let chains = (compiled.set.len() as u64).pow(n as u32);
    let incoherent_total = nb as u64 * chains * (nb as u64 - 1);

    let mut max_incoherent = 0.0f64;
    let mut checked = 0u64;
    match sample {
        None => {
            // exhaustive: walk every (prep, chain) pipeline, contract with
            // every non-matching measurement striation
            for prep in 0..nb {
                walk_incoherent(
                    &compiled,
                    prep,
                    0,
                    prep,
                    &mut vec![vec![0.0; d]; n],
                    &mut max_incoherent,
                    &mut checked,
                );
            }
        }
        Some((per_prep, seed)) => {
            use rand::Rng;
            let mut rng = crate::sampling::rng(seed);
            for prep in 0..nb {
                for _ in 0..per_prep {
                    let mut chain = Vec::with_capacity(n);
                    for _ in 0..n {
                        chain.push(rng.gen_range(0..compiled.set.len()));
                    }
                    let mut b_cur = prep;
                    let mut dv = compiled.drho[prep].clone();
                    for (depth, &si) in chain.iter().enumerate() {
                        let m = &compiled.transfer[depth][si][b_cur];
                        let mut next = vec![0.0; d];
                        for t in 0..d {
                            let row = &m[t * d..(t + 1) * d];
                            next[t] = row.iter().zip(&dv).map(|(a, b)| a * b).sum();
                        }
                        b_cur = compiled.image[si][b_cur];
                        dv = next;
                    }
                    let meas_options: Vec<usize> = (0..nb).filter(|&m| m != b_cur).collect();
                    let meas = meas_options[rng.gen_range(0..meas_options.len())];
                    let dr = compiled.contract(meas, b_cur, &dv);
                    max_incoherent = max_incoherent.max(dr.abs());
                    checked += 1;
                }
            }
        }
    }

    Ok(CoherenceReport {
        delta_sum_all: all.0,
        delta_sum_coherent: coherent.0,
        deviation: (all.0 - coherent.0).abs(),
        max_incoherent,
        incoherent_checked: checked,
        incoherent_total,
    })
}

fn walk_incoherent(
    compiled: &Compiled,
    prep: usize,
    depth: usize,
    b_cur: usize,
    scratch: &mut Vec<Vec<f64>>,
    max_incoherent: &mut f64,
    checked: &mut u64,
) {
    let n = compiled.transfer.len();
    let d = compiled.d;
    if depth == n {
        let dv: &[f64] = if n == 0 {
            &compiled.drho[prep]
        } else {
            &scratch[n - 1]
        };
        for meas in 0..compiled.striations.len() {
            if meas == b_cur {
                continue;
            }
            let dr = compiled.contract(meas, b_cur, dv);
            *max_incoherent = max_incoherent.max(dr.abs());
            *checked += 1;
        }
        return;
    }
    for si in 0..compiled.set.len() {
        let m = &compiled.transfer[depth][si][b_cur];
        let b_next = compiled.image[si][b_cur];
        let (prev, rest) = scratch.split_at_mut(depth);
        let src: &[f64] = if depth == 0 {
            &compiled.drho[prep]
        } else {
            &prev[depth - 1]
        };
        let dst = &mut rest[0];
        for t in 0..d {
            let row = &m[t * d..(t + 1) * d];
            dst[t] = row.iter().zip(src).map(|(a, b)| a * b).sum();
        }
        walk_incoherent(
            compiled,
            prep,
            depth + 1,
            b_next,
            scratch,
            max_incoherent,
            checked,
        );
    }
}

/// The Hilbert-space Born value `tr(E ℰ_n(⋯ℰ_1(w)⋯))`; the oracle the
/// framework sum is checked against.
pub fn born_oracle(spec: &ExperimentSpec) -> f64 {
    let mut w = spec.state.clone();
    for ch in &spec.channels {
        w = ch.apply(&w);
    }
    spec.effect.trace_prod(&w).re
}
