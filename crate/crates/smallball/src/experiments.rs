//! Instance families shared by constant fitting, the experiment runner and
//! the verification suite.

use smallball_core::bounds::{
    cosine_product_integral, esseen_bound, fit_constant, theorem_shape, FittedConstant, TheoremKind, TheoremParams,
};
use smallball_core::chain::{make_independent_chain, make_two_state_chain};
use smallball_core::instances::{balanced_chain_in_bucket, balanced_chain_with_lambda, instance_rng, random_integer_instance};
use smallball_core::prg::{build_mgg_expander, log2_size_for, PrgSpec};
use smallball_core::sampler::coord_constant;
use smallball_core::transfer::{char_fn, exact_sum_distribution, exact_sum_distribution_steps, DEFAULT_CELL_BUDGET};
use smallball_core::{Result, SignSystem, WeightSystem};

use crate::constants::{ConstantFile, COORD, COS, DIFF, EQUAL, ESSEEN, PRG, SIZE};

/// Seed of every committed fit. Verification runs draw fresh instances from
/// their own seed.
pub const FIT_SEED: u64 = 0x05ee_df17;

pub const EQUAL_STATES: [usize; 3] = [2, 3, 4];
pub const EQUAL_BUCKETS: [f64; 4] = [0.0, 0.2, 0.5, 0.8];
pub const EQUAL_BUCKET_HALFWIDTH: f64 = 0.05;
pub const EQUAL_LENGTHS: std::ops::RangeInclusive<usize> = 8..=16;
pub const FIT_EQUAL_REPLICATES: u64 = 8;
pub const CHECK_EQUAL_REPLICATES: u64 = 2;
pub const DIFF_LENGTHS: std::ops::RangeInclusive<usize> = 1..=60;
pub const PRG_BLOCK_LENGTHS: [u32; 2] = [2, 4];
pub const PRG_MAX_BLOCKS: usize = 8;
pub const FIT_ESSEEN_INSTANCES: u64 = 2000;
pub const COS_LENGTHS: std::ops::RangeInclusive<usize> = 1..=100;
pub const COORD_DIMS: std::ops::RangeInclusive<usize> = 2..=64;
pub const SIZE_LENGTHS: std::ops::RangeInclusive<usize> = 1..=10_000;

/// One instance: its parameters, the measured probability and the
/// constant-free theorem value it is compared with.
#[derive(Debug, Clone, PartialEq)]
pub struct Measured {
    pub id: String,
    pub params: TheoremParams,
    pub prob: f64,
    pub shape: f64,
}

impl Measured {
    pub fn ratio(&self) -> f64 {
        self.prob / self.shape
    }
}

/// Balanced chains with `lambda` in each bucket, all-ones weights, exact
/// `sup_x0 P(|S - x0| <= 1)`. Replicate 0 sits at the bucket center.
pub fn equal_weight_family(seed: u64, replicates: u64) -> Result<Vec<Measured>> {
    let mut out = Vec::new();
    let mut index = 0u64;
    for &states in &EQUAL_STATES {
        for &center in &EQUAL_BUCKETS {
            for rep in 0..replicates {
                let mut rng = instance_rng(seed, index);
                index += 1;
                let (chain, f) = if rep == 0 {
                    balanced_chain_with_lambda(&mut rng, states, center)?
                } else {
                    balanced_chain_in_bucket(&mut rng, states, center, EQUAL_BUCKET_HALFWIDTH)?
                };
                let lambda = smallball_core::chain::spectral_lambda(&chain)?.clamp(0.0, 1.0);
                for n in EQUAL_LENGTHS {
                    let signs = SignSystem::repeated(&chain, &f, n)?;
                    let dist = exact_sum_distribution(&chain, &signs, &WeightSystem::all_ones(n), DEFAULT_CELL_BUDGET)?;
                    let params = TheoremParams { n, d: 1, lambda, radius: 1.0 };
                    out.push(Measured {
                        id: format!("equal-N{states}-b{center}-r{rep}-n{n}"),
                        params,
                        prob: dist.sup_window(1.0).1,
                        shape: theorem_shape(TheoremKind::ScalarHalfUnit, &params)?,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// Independent fair signs, `v = (1, ..., n)`, `max_x0 P(S = x0)`.
pub fn distinct_int_family(lengths: impl IntoIterator<Item = usize>) -> Result<Vec<Measured>> {
    let chain = make_independent_chain(&[0.5, 0.5])?;
    lengths
        .into_iter()
        .map(|n| {
            let signs = SignSystem::split_labeling(&chain, n)?;
            let dist = exact_sum_distribution(&chain, &signs, &WeightSystem::arange(n), DEFAULT_CELL_BUDGET)?;
            let params = TheoremParams { n, d: 1, lambda: 0.0, radius: 0.0 };
            Ok(Measured {
                id: format!("arange-n{n}"),
                params,
                prob: dist.max_point().1,
                shape: theorem_shape(TheoremKind::DistinctInt, &params)?,
            })
        })
        .collect()
}

/// Expander-walk signs with all-ones weights, `sup_x0 P(|S - x0| <= 1)`,
/// computed on the walk chain.
pub fn prg_family() -> Result<Vec<Measured>> {
    let mut out = Vec::new();
    for k in PRG_BLOCK_LENGTHS {
        let g = build_mgg_expander(k)?;
        let chain = g.as_markov_chain()?;
        for blocks in 1..=PRG_MAX_BLOCKS {
            let n = blocks * k as usize;
            let spec = PrgSpec::new(g.clone(), n)?;
            let steps: Vec<Vec<i64>> = spec
                .block_values(&vec![1.0; n])?
                .into_iter()
                .map(|row| row.into_iter().map(|x| x.round() as i64).collect())
                .collect();
            let dist = exact_sum_distribution_steps(&chain, &steps, DEFAULT_CELL_BUDGET)?;
            let params = TheoremParams { n, d: 1, lambda: 0.0, radius: 1.0 };
            out.push(Measured {
                id: format!("mgg-k{k}-n{n}"),
                params,
                prob: dist.sup_window(1.0).1,
                shape: theorem_shape(TheoremKind::Prg, &params)?,
            });
        }
    }
    Ok(out)
}

/// Random integer instance with its exact `sup_x0 P(|S - x0| <= 1)` and the
/// Fourier side `2 int_{-1}^{1} |phi|` (the `R = eps = 1` Esseen bound
/// without its constant).
#[derive(Debug, Clone, PartialEq)]
pub struct EsseenPoint {
    pub id: String,
    pub n: usize,
    pub prob: f64,
    pub fourier: f64,
}

pub fn esseen_point(seed: u64, index: u64) -> Result<EsseenPoint> {
    let inst = random_integer_instance(&mut instance_rng(seed, index), 4, 8, 5)?;
    let w = WeightSystem::integers(&inst.weights)?;
    let dist = exact_sum_distribution(&inst.chain, &inst.signs, &w, DEFAULT_CELL_BUDGET)?;
    let mut failure = None;
    let fourier = esseen_bound(
        |xi| match char_fn(&inst.chain, &inst.signs, &w, xi) {
            Ok(v) => v.modulus(),
            Err(e) => {
                failure = Some(e);
                0.0
            }
        },
        1,
        1.0,
        1.0,
        1.0,
    )?;
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(EsseenPoint { id: format!("int-{seed}-{index}"), n: inst.weights.len(), prob: dist.sup_window(1.0).1, fourier })
}

pub fn esseen_family(seed: u64, count: u64) -> Result<Vec<EsseenPoint>> {
    (0..count).map(|i| esseen_point(seed, i)).collect()
}

/// `(k, int_{-1}^{1} |cos(2 pi xi)|^k dxi)`.
pub fn cosine_family() -> Result<Vec<(usize, f64)>> {
    COS_LENGTHS.map(|k| Ok((k, cosine_product_integral(&vec![1.0; k])?))).collect()
}

/// `(d, 1 / (median |v_1| sqrt(d)))`.
pub fn coord_family() -> Result<Vec<(usize, f64)>> {
    COORD_DIMS.map(|d| Ok((d, coord_constant(d)?))).collect()
}

/// `(n, log2 |D|)` with the even block length nearest above `sqrt(n)`.
pub fn size_family() -> Vec<(usize, f64)> {
    SIZE_LENGTHS.map(|n| (n, log2_size_for(n))).collect()
}

/// Two-state chain with split labels, all-ones weights, `P(S = 0)`.
pub fn tightness_point(lambda: f64, n: usize) -> Result<f64> {
    let chain = make_two_state_chain(lambda)?;
    let signs = SignSystem::split_labeling(&chain, n)?;
    Ok(exact_sum_distribution(&chain, &signs, &WeightSystem::all_ones(n), DEFAULT_CELL_BUDGET)?.prob_at(0))
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

fn range_label(r: &std::ops::RangeInclusive<usize>) -> String {
    format!("{}..={}", r.start(), r.end())
}

pub fn fit_equal(seed: u64, replicates: u64) -> Result<FittedConstant> {
    let family = equal_weight_family(seed, replicates)?;
    fit_constant(
        EQUAL,
        "balanced reversible chains, all-ones weights, sup over x0 of P(|S - x0| <= 1), ratio to 1/((1-lambda) sqrt(n))",
        &format!(
            "N in {EQUAL_STATES:?}; lambda buckets {EQUAL_BUCKETS:?} +- {EQUAL_BUCKET_HALFWIDTH}; n in {}; {replicates} replicates; seed {seed}",
            range_label(&EQUAL_LENGTHS)
        ),
        &family.iter().map(|m| (m.prob, m.shape)).collect::<Vec<_>>(),
    )
}

/// Every committed constant, refit from scratch.
pub fn fit_all() -> Result<Vec<ConstantFile>> {
    let mut out = vec![fit_equal(FIT_SEED, FIT_EQUAL_REPLICATES)?.into()];

    let diff = distinct_int_family(DIFF_LENGTHS)?;
    out.push(
        fit_constant(
            DIFF,
            "independent fair signs, v = (1..n), max over x0 of P(S = x0), ratio to n^(-3/2)",
            &format!("n in {}", range_label(&DIFF_LENGTHS)),
            &diff.iter().map(|m| (m.prob, m.shape)).collect::<Vec<_>>(),
        )?
        .into(),
    );

    let prg = prg_family()?;
    out.push(
        fit_constant(
            PRG,
            "MGG expander walks, all-ones weights, sup over x0 of P(|S - x0| <= 1), ratio to n^(-1/2)",
            &format!("k in {PRG_BLOCK_LENGTHS:?}; n = k * b for b in 1..={PRG_MAX_BLOCKS}"),
            &prg.iter().map(|m| (m.prob, m.shape)).collect::<Vec<_>>(),
        )?
        .into(),
    );

    let es = esseen_family(FIT_SEED, FIT_ESSEEN_INSTANCES)?;
    out.push(
        fit_constant(
            ESSEEN,
            "random reversible chains N <= 4, n <= 8, integer weights 1..=5, sup over x0 of P(|S - x0| <= 1), ratio to (R + 1/eps) int_{-1}^{1} |phi| with R = eps = 1",
            &format!("{FIT_ESSEEN_INSTANCES} instances; seed {FIT_SEED}"),
            &es.iter().map(|p| (p.prob, p.fourier)).collect::<Vec<_>>(),
        )?
        .into(),
    );

    let cos = cosine_family()?;
    out.push(
        fit_constant(
            COS,
            "int_{-1}^{1} |cos(2 pi xi)|^k dxi, ratio to k^(-1/2)",
            &format!("k in {}", range_label(&COS_LENGTHS)),
            &cos.iter().map(|&(k, v)| (v, 1.0 / (k as f64).sqrt())).collect::<Vec<_>>(),
        )?
        .into(),
    );

    let coord = coord_family()?;
    out.push(
        fit_constant(
            COORD,
            "uniform unit vector in R^d: smallest C with P(|v_1| >= 1/(C sqrt(d))) >= 1/2",
            &format!("d in {}", range_label(&COORD_DIMS)),
            &coord.iter().map(|&(_, c)| (c, 1.0)).collect::<Vec<_>>(),
        )?
        .into(),
    );

    let size = size_family();
    out.push(
        fit_constant(
            SIZE,
            "log2 |D| for the degree-8 expander generator with k the even ceiling of sqrt(n), ratio to sqrt(n)",
            &format!("n in {}", range_label(&SIZE_LENGTHS)),
            &size.iter().map(|&(n, bits)| (bits, (n as f64).sqrt())).collect::<Vec<_>>(),
        )?
        .into(),
    );
    Ok(out)
}
