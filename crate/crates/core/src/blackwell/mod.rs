//! Blackwell informativeness: garbling kernels, the LP decision procedure for
//! dominance, interval pooling, and the experiment constructors and random
//! generators used across the crate.

mod simplex;

use rand::Rng;
use serde::Serialize;

use crate::belief::{Belief, Experiment};
use crate::rng::substream;
use crate::{Error, Result, Scalar};

use simplex::{phase_one, Phase1};

const MAX_PIVOTS: usize = 20_000;

/// Row-stochastic signal transformation `Q(s̃|s)`; rows are source signals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GarblingKernel<T = f64> {
    rows: Vec<Vec<T>>,
}

impl<T: Scalar> GarblingKernel<T> {
    pub fn new(rows: Vec<Vec<T>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::InvalidKernel("empty kernel".into()));
        }
        let k = rows[0].len();
        for (s, row) in rows.iter().enumerate() {
            if row.len() != k {
                return Err(Error::InvalidKernel(format!("row {s} has wrong length")));
            }
            if row.iter().any(|q| !q.is_finite() || *q < T::zero()) {
                return Err(Error::InvalidKernel(format!("row {s} has a negative entry")));
            }
            let total: T = row.iter().copied().sum();
            if (total - T::one()).abs() > T::stochastic_tol() {
                return Err(Error::InvalidKernel(format!("row {s} sums to {total}")));
            }
        }
        Ok(Self { rows })
    }

    pub fn identity(k: usize) -> Result<Self> {
        Self::new(
            (0..k)
                .map(|i| (0..k).map(|j| if i == j { T::one() } else { T::zero() }).collect())
                .collect(),
        )
    }

    pub fn source_signals(&self) -> usize {
        self.rows.len()
    }

    pub fn target_signals(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<T>] {
        &self.rows
    }

    #[inline]
    pub fn q(&self, from: usize, to: usize) -> T {
        self.rows[from][to]
    }

    /// Garble by `self`, then by `next`.
    pub fn then(&self, next: &GarblingKernel<T>) -> Result<Self> {
        if self.target_signals() != next.source_signals() {
            return Err(Error::DimensionMismatch("kernel composition".into()));
        }
        let rows = self
            .rows
            .iter()
            .map(|row| {
                (0..next.target_signals())
                    .map(|c| row.iter().enumerate().map(|(m, q)| *q * next.q(m, c)).sum())
                    .collect()
            })
            .collect();
        Ok(Self { rows })
    }
}

/// `p̃(s̃|ω) = Σ_s Q(s̃|s) p(s|ω)`.
pub fn apply_garbling<T: Scalar>(exp: &Experiment<T>, q: &GarblingKernel<T>) -> Result<Experiment<T>> {
    if q.source_signals() != exp.num_signals() {
        return Err(Error::DimensionMismatch(format!(
            "kernel has {} source signals, experiment has {}",
            q.source_signals(),
            exp.num_signals()
        )));
    }
    let rows = exp
        .rows()
        .iter()
        .map(|row| {
            (0..q.target_signals())
                .map(|t| row.iter().enumerate().map(|(s, p)| *p * q.q(s, t)).sum())
                .collect()
        })
        .collect();
    Experiment::new(rows)
}

/// Largest absolute entrywise difference between two experiments of equal shape.
pub fn max_abs_difference<T: Scalar>(a: &Experiment<T>, b: &Experiment<T>) -> Option<T> {
    if a.num_states() != b.num_states() || a.num_signals() != b.num_signals() {
        return None;
    }
    Some(
        a.rows()
            .iter()
            .zip(b.rows())
            .flat_map(|(ra, rb)| ra.iter().zip(rb).map(|(x, y)| (*x - *y).abs()))
            .fold(T::zero(), T::max),
    )
}

/// Decides whether `more` is Blackwell more informative than `less` and, if
/// so, returns a garbling kernel taking `more` to `less`.
///
/// The kernel entries are the unknowns of a feasibility LP with one equality
/// per `(ω, s̃)` pair plus one row-sum equality per source signal. Before
/// solving, signals of `more` that never occur get a uniform row, entries
/// into never-occurring signals of `less` are fixed at zero, and one
/// likelihood equality per state is dropped because the row sums imply it.
/// The clamped, renormalized kernel must reproduce `less` within ten times
/// the LP feasibility tolerance. A numerical failure is retried with the
/// variables in a different order, which sends Bland's rule down another
/// path; the last error is returned if every order fails.
pub fn find_garbling<T: Scalar>(
    more: &Experiment<T>,
    less: &Experiment<T>,
) -> Result<Option<GarblingKernel<T>>> {
    if more.num_states() != less.num_states() {
        return Err(Error::DimensionMismatch(format!(
            "experiments over {} and {} states",
            more.num_states(),
            less.num_states()
        )));
    }
    let (n_states, k_src, k_dst) = (more.num_states(), more.num_signals(), less.num_signals());
    let occurs = |e: &Experiment<T>, k: usize| (0..n_states).any(|w| e.p(w, k) > T::zero());
    let src: Vec<usize> = (0..k_src).filter(|&s| occurs(more, s)).collect();
    let dst: Vec<usize> = (0..k_dst).filter(|&t| occurs(less, t)).collect();
    let var = |i: usize, j: usize| i * dst.len() + j;
    let n_vars = src.len() * dst.len();

    let mut a = Vec::new();
    let mut b = Vec::new();
    for w in 0..n_states {
        for (j, &t) in dst.iter().enumerate().take(dst.len().saturating_sub(1)) {
            let mut row = vec![T::zero(); n_vars];
            for (i, &s) in src.iter().enumerate() {
                row[var(i, j)] = more.p(w, s);
            }
            a.push(row);
            b.push(less.p(w, t));
        }
    }
    for i in 0..src.len() {
        let mut row = vec![T::zero(); n_vars];
        for j in 0..dst.len() {
            row[var(i, j)] = T::one();
        }
        a.push(row);
        b.push(T::one());
    }

    let (n_src, n_dst) = (src.len(), dst.len());
    let orders: [Box<dyn Fn(usize) -> usize>; 4] = [
        Box::new(|p| p),
        Box::new(move |p| n_vars - 1 - p),
        Box::new(move |p| var(p % n_src, p / n_src)),
        Box::new(move |p| var(n_src - 1 - p % n_src, n_dst - 1 - p / n_src)),
    ];
    let mut failure = Error::LpNumerical { residual: f64::NAN };
    for order in &orders {
        let perm: Vec<usize> = (0..n_vars).map(order).collect();
        let a_perm: Vec<Vec<T>> = a.iter().map(|row| perm.iter().map(|&v| row[v]).collect()).collect();
        let x_perm = match phase_one(&a_perm, &b, MAX_PIVOTS) {
            Ok(Phase1::Infeasible { .. }) => return Ok(None),
            Ok(Phase1::Feasible(x)) => x,
            Err(e) => {
                failure = e;
                continue;
            }
        };
        let mut x = vec![T::zero(); n_vars];
        for (p, &v) in perm.iter().enumerate() {
            x[v] = x_perm[p];
        }
        match kernel_from_solution(more, less, &src, &dst, &x) {
            Ok(kernel) => return Ok(Some(kernel)),
            Err(e) => failure = e,
        }
    }
    Err(failure)
}

/// Clamps and renormalizes an LP solution into a full kernel and checks that
/// it reproduces `less`.
fn kernel_from_solution<T: Scalar>(
    more: &Experiment<T>,
    less: &Experiment<T>,
    src: &[usize],
    dst: &[usize],
    x: &[T],
) -> Result<GarblingKernel<T>> {
    let (k_src, k_dst) = (more.num_signals(), less.num_signals());
    let uniform = T::one() / T::lit(k_dst as f64);
    let mut rows = vec![vec![uniform; k_dst]; k_src];
    for (i, &s) in src.iter().enumerate() {
        let mut row = vec![T::zero(); k_dst];
        for (j, &t) in dst.iter().enumerate() {
            row[t] = x[i * dst.len() + j].max(T::zero());
        }
        let total: T = row.iter().copied().sum();
        if !(total > T::zero()) {
            return Err(Error::LpNumerical { residual: 1.0 });
        }
        rows[s] = row.into_iter().map(|v| v / total).collect();
    }
    let kernel = GarblingKernel::new(rows).map_err(|_| Error::LpNumerical { residual: f64::NAN })?;
    let garbled = apply_garbling(more, &kernel)?;
    let residual = max_abs_difference(&garbled, less).unwrap_or(T::infinity());
    if residual > T::lp_tol() * T::lit(10.0) {
        return Err(Error::LpNumerical {
            residual: residual.as_f64(),
        });
    }
    Ok(kernel)
}

/// Kernel merging each group of consecutive signals into one signal.
///
/// `groups` must list contiguous index blocks, in order, covering `0..k`.
pub fn pooling_kernel<T: Scalar>(k: usize, groups: &[Vec<usize>]) -> Result<GarblingKernel<T>> {
    let mut next = 0;
    for g in groups {
        if g.is_empty() {
            return Err(Error::InvalidParameter("empty pooling block".into()));
        }
        for (offset, &s) in g.iter().enumerate() {
            if s != next + offset {
                return Err(Error::InvalidParameter(format!(
                    "pooling blocks must be consecutive intervals in signal order; got {groups:?}"
                )));
            }
        }
        next += g.len();
    }
    if next != k {
        return Err(Error::InvalidParameter(format!(
            "pooling blocks cover {next} of {k} signals"
        )));
    }
    let mut rows = vec![vec![T::zero(); groups.len()]; k];
    for (b, g) in groups.iter().enumerate() {
        for &s in g {
            rows[s][b] = T::one();
        }
    }
    GarblingKernel::new(rows)
}

/// Merges interval blocks of adjacent signals.
pub fn pool_adjacent_signals<T: Scalar>(exp: &Experiment<T>, groups: &[Vec<usize>]) -> Result<Experiment<T>> {
    apply_garbling(exp, &pooling_kernel(exp.num_signals(), groups)?)
}

/// Interval blocks starting at each cut point (cut points in `1..k`, increasing).
pub fn blocks_from_cuts(k: usize, cuts: &[usize]) -> Result<Vec<Vec<usize>>> {
    let mut bounds = vec![0];
    for &c in cuts {
        if c == 0 || c >= k || c <= *bounds.last().unwrap() {
            return Err(Error::InvalidParameter(format!("bad cut points {cuts:?} for {k} signals")));
        }
        bounds.push(c);
    }
    bounds.push(k);
    Ok(bounds.windows(2).map(|w| (w[0]..w[1]).collect()).collect())
}

/// Two states, signals (low, high), accuracy `q ∈ [0.5, 1]`.
pub fn binary_symmetric<T: Scalar>(q: T) -> Result<Experiment<T>> {
    if !(q >= T::lit(0.5) && q <= T::one()) {
        return Err(Error::InvalidParameter(format!("accuracy {q} outside [0.5, 1]")));
    }
    Experiment::new(vec![vec![q, T::one() - q], vec![T::one() - q, q]])
}

/// Identity likelihood: signal `l` reveals state `l`.
pub fn fully_informative<T: Scalar>(n_states: usize) -> Result<Experiment<T>> {
    Experiment::new(
        (0..n_states)
            .map(|i| (0..n_states).map(|j| if i == j { T::one() } else { T::zero() }).collect())
            .collect(),
    )
}

/// Single signal in every state.
pub fn uninformative<T: Scalar>(n_states: usize) -> Result<Experiment<T>> {
    Experiment::new(vec![vec![T::one()]; n_states])
}

/// Reveals only whether `ω < ω_k` (signal 0) or `ω ≥ ω_k` (signal 1); `k` is 1-based.
pub fn threshold_reveal<T: Scalar>(n_states: usize, k: usize) -> Result<Experiment<T>> {
    if k < 1 || k > n_states {
        return Err(Error::InvalidParameter(format!("threshold {k} outside 1..={n_states}")));
    }
    Experiment::new(
        (1..=n_states)
            .map(|l| {
                if l < k {
                    vec![T::one(), T::zero()]
                } else {
                    vec![T::zero(), T::one()]
                }
            })
            .collect(),
    )
}

/// Reveals every state except `ω_l` and `ω_{l+1}`, which share a signal; `l` is 1-based.
pub fn pool_pair_reveal<T: Scalar>(n_states: usize, l: usize) -> Result<Experiment<T>> {
    if l < 1 || l + 1 > n_states {
        return Err(Error::InvalidParameter(format!("pooled pair {l} outside 1..{n_states}")));
    }
    let n_signals = n_states - 1;
    Experiment::new(
        (1..=n_states)
            .map(|w| {
                let col = if w <= l { w - 1 } else { w - 2 };
                (0..n_signals).map(|c| if c == col { T::one() } else { T::zero() }).collect()
            })
            .collect(),
    )
}

/// Three states; signal 0 iff the middle state. Not MLRP.
pub fn middle_reveal<T: Scalar>() -> Result<Experiment<T>> {
    Experiment::new(vec![
        vec![T::zero(), T::one()],
        vec![T::one(), T::zero()],
        vec![T::zero(), T::one()],
    ])
}

/// MLRP experiment `p(s|ω) ∝ exp(a_s·b_ω + c_s)` with increasing `a`, `b`.
pub fn sample_mlrp_experiment<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    n_states: usize,
    n_signals: usize,
) -> Result<Experiment<T>> {
    if n_states < 2 || n_signals < 1 {
        return Err(Error::InvalidParameter(format!(
            "need L >= 2 and K >= 1, got L={n_states}, K={n_signals}"
        )));
    }
    let mut a: Vec<f64> = (0..n_signals).map(|_| rng.random_range(-2.0..2.0)).collect();
    let mut b: Vec<f64> = (0..n_states).map(|_| rng.random_range(-1.5..1.5)).collect();
    let c: Vec<f64> = (0..n_signals).map(|_| rng.random_range(-1.0..1.0)).collect();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let rows = b
        .iter()
        .map(|bw| {
            let w: Vec<f64> = a.iter().zip(&c).map(|(a_s, c_s)| (a_s * bw + c_s).exp()).collect();
            let total: f64 = w.iter().sum();
            w.into_iter().map(|v| T::lit(v / total)).collect()
        })
        .collect();
    Experiment::new(rows)
}

/// Deterministic in `seed`.
pub fn random_mlrp_experiment<T: Scalar>(seed: u64, n_states: usize, n_signals: usize) -> Result<Experiment<T>> {
    sample_mlrp_experiment(&mut substream(seed, 0), n_states, n_signals)
}

/// Random kernel; roughly one row in five is a point mass.
pub fn sample_garbling<T: Scalar, R: Rng + ?Sized>(
    rng: &mut R,
    k_src: usize,
    k_dst: usize,
) -> Result<GarblingKernel<T>> {
    if k_src == 0 || k_dst == 0 {
        return Err(Error::InvalidParameter("kernel dimensions must be positive".into()));
    }
    let rows = (0..k_src)
        .map(|_| {
            if rng.random_bool(0.2) {
                let hit = rng.random_range(0..k_dst);
                (0..k_dst).map(|t| if t == hit { T::one() } else { T::zero() }).collect()
            } else {
                let w: Vec<f64> = (0..k_dst).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
                let total: f64 = w.iter().sum();
                w.into_iter().map(|v| T::lit(v / total)).collect()
            }
        })
        .collect();
    GarblingKernel::new(rows)
}

/// Random interval partition of `0..k` into at least one block.
pub fn sample_interval_blocks<R: Rng + ?Sized>(rng: &mut R, k: usize) -> Vec<Vec<usize>> {
    let cuts: Vec<usize> = (1..k).filter(|_| rng.random_bool(0.5)).collect();
    blocks_from_cuts(k, &cuts).expect("sampled cuts are valid")
}

/// Full-support belief with exponential weights.
pub fn sample_full_support_belief<T: Scalar, R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Belief<T>> {
    let w: Vec<f64> = (0..n).map(|_| 0.05 - (1.0 - rng.random::<f64>()).ln()).collect();
    let total: f64 = w.iter().sum();
    Belief::from_weights(w.into_iter().map(|v| T::lit(v / total)).collect())
}

/// Whether `more` Blackwell-dominates `less`.
pub fn is_more_informative<T: Scalar>(more: &Experiment<T>, less: &Experiment<T>) -> Result<bool> {
    Ok(find_garbling(more, less)?.is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::belief::is_mlrp_experiment;

    #[test]
    fn identity_and_collapse() {
        let e = binary_symmetric(0.8).unwrap();
        assert_eq!(apply_garbling(&e, &GarblingKernel::identity(2).unwrap()).unwrap(), e);
        let collapse = GarblingKernel::new(vec![vec![1.0], vec![1.0]]).unwrap();
        let u = apply_garbling(&e, &collapse).unwrap();
        assert!(u.is_uninformative());
        assert_eq!(u.num_signals(), 1);
    }

    #[test]
    fn symmetric_flip_garbling() {
        let flip = GarblingKernel::new(vec![vec![0.75, 0.25], vec![0.25, 0.75]]).unwrap();
        let g = apply_garbling(&binary_symmetric(0.9).unwrap(), &flip).unwrap();
        let target = binary_symmetric(0.7).unwrap();
        assert!(max_abs_difference(&g, &target).unwrap() < 1e-15);
    }

    #[test]
    fn garbling_dimension_mismatch() {
        let e = binary_symmetric(0.8).unwrap();
        let k = GarblingKernel::identity(3).unwrap();
        assert!(matches!(apply_garbling(&e, &k), Err(Error::DimensionMismatch(_))));
    }

    #[test]
    fn find_garbling_from_full_information_is_the_likelihood() {
        let e = random_mlrp_experiment::<f64>(3, 3, 4).unwrap();
        let k = find_garbling(&fully_informative(3).unwrap(), &e).unwrap().unwrap();
        for (kr, er) in k.rows().iter().zip(e.rows()) {
            for (a, b) in kr.iter().zip(er) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn find_garbling_binary_symmetric() {
        let k: GarblingKernel = find_garbling(&binary_symmetric(0.9).unwrap(), &binary_symmetric(0.7).unwrap())
            .unwrap()
            .unwrap();
        assert!((k.q(0, 1) - 0.25).abs() < 1e-12);
        assert!((k.q(1, 0) - 0.25).abs() < 1e-12);
        assert!(find_garbling(&binary_symmetric(0.7).unwrap(), &binary_symmetric(0.9).unwrap())
            .unwrap()
            .is_none());
    }

    #[test]
    fn find_garbling_state_mismatch() {
        assert!(find_garbling(&fully_informative::<f64>(3).unwrap(), &binary_symmetric(0.7).unwrap()).is_err());
    }

    #[test]
    fn find_garbling_f32() {
        let k = find_garbling(
            &binary_symmetric(0.9f32).unwrap(),
            &binary_symmetric(0.7f32).unwrap(),
        )
        .unwrap()
        .unwrap();
        assert!((k.q(0, 1) - 0.25).abs() < 1e-5);
    }

    #[test]
    fn pooling() {
        let e = random_mlrp_experiment::<f64>(11, 3, 3).unwrap();
        let singles = vec![vec![0], vec![1], vec![2]];
        assert_eq!(pool_adjacent_signals(&e, &singles).unwrap(), e);
        assert!(pool_adjacent_signals(&e, &[vec![0, 1, 2]]).unwrap().is_uninformative());

        let pooled = pool_adjacent_signals(&e, &[vec![0], vec![1, 2]]).unwrap();
        assert_eq!(pooled.num_signals(), 2);
        for w in 0..3 {
            assert!((pooled.p(w, 1) - (e.p(w, 1) + e.p(w, 2))).abs() < 1e-15);
        }
        assert!(is_mlrp_experiment(&pooled));
        assert!(find_garbling(&e, &pooled).unwrap().is_some());

        assert!(pool_adjacent_signals(&e, &[vec![0, 2], vec![1]]).is_err());
        assert!(pool_adjacent_signals(&e, &[vec![1], vec![0], vec![2]]).is_err());
        assert!(pool_adjacent_signals(&e, &[vec![0], vec![1]]).is_err());
    }

    #[test]
    fn cut_points() {
        assert_eq!(blocks_from_cuts(4, &[1, 3]).unwrap(), vec![vec![0], vec![1, 2], vec![3]]);
        assert_eq!(blocks_from_cuts(2, &[]).unwrap(), vec![vec![0, 1]]);
        assert!(blocks_from_cuts(4, &[3, 1]).is_err());
        assert!(blocks_from_cuts(4, &[4]).is_err());
    }

    #[test]
    fn constructors() {
        let t: Experiment = threshold_reveal(3, 2).unwrap();
        assert_eq!(t.rows(), &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
        assert!(is_mlrp_experiment(&t));

        let p: Experiment = pool_pair_reveal(3, 2).unwrap();
        assert_eq!(p.rows(), &[vec![1.0, 0.0], vec![0.0, 1.0], vec![0.0, 1.0]]);
        let p: Experiment = pool_pair_reveal(4, 2).unwrap();
        assert_eq!(p.num_signals(), 3);
        assert_eq!(p.row(1), p.row(2));
        assert!(is_mlrp_experiment(&p));

        assert!(binary_symmetric(0.5).unwrap().is_uninformative());
        assert!(binary_symmetric(1.0).unwrap().is_fully_informative());
        assert!(binary_symmetric(0.4).is_err());
        assert!(threshold_reveal::<f64>(3, 0).is_err());
        assert!(threshold_reveal::<f64>(3, 4).is_err());
        assert!(pool_pair_reveal::<f64>(3, 3).is_err());
        assert!(!is_mlrp_experiment(&middle_reveal::<f64>().unwrap()));
    }

    #[test]
    fn random_mlrp() {
        let e = random_mlrp_experiment::<f64>(1, 4, 1).unwrap();
        assert!(e.is_uninformative());
        for seed in 0..50 {
            let e = random_mlrp_experiment::<f64>(seed, 4, 5).unwrap();
            assert!(is_mlrp_experiment(&e));
        }
        assert_eq!(
            random_mlrp_experiment::<f64>(9, 4, 5).unwrap(),
            random_mlrp_experiment::<f64>(9, 4, 5).unwrap()
        );
        assert!(random_mlrp_experiment::<f64>(9, 1, 5).is_err());
    }

    #[test]
    fn kernel_composition() {
        let mut rng = substream(5, 0);
        let a = sample_garbling::<f64, _>(&mut rng, 4, 3).unwrap();
        let b = sample_garbling::<f64, _>(&mut rng, 3, 2).unwrap();
        let e = sample_mlrp_experiment::<f64, _>(&mut rng, 3, 4).unwrap();
        let two_step = apply_garbling(&apply_garbling(&e, &a).unwrap(), &b).unwrap();
        let one_step = apply_garbling(&e, &a.then(&b).unwrap()).unwrap();
        assert!(max_abs_difference(&two_step, &one_step).unwrap() < 1e-14);
    }
}
