//! The full verification suite, one entry per acceptance criterion.
//!
//! Reports carry only deterministic content; wall-clock time is returned
//! beside them so that two runs with the same seed serialize identically.

use std::time::{Duration, Instant};

use serde::Serialize;

use smallball_core::bounds::{theorem_bound, BoundReport, TheoremKind, TheoremParams, BOUND_RTOL};
use smallball_core::chain::make_independent_chain;
use smallball_core::instances::{instance_rng, random_integer_instance};
use smallball_core::oracles::{brute_force_char_fn, brute_force_distribution};
use smallball_core::prg::{build_mgg_expander, log2_size_for, prg_smallball, PrgMode, PrgSpec, DEFAULT_WALK_BUDGET};
use smallball_core::sampler::first_coord_tail_exact;
use smallball_core::transfer::{
    char_fn, exact_sum_distribution, exact_sum_distribution_rational, find_prime, integer_step_values,
    DEFAULT_CELL_BUDGET,
};
use smallball_core::{Result, SignSystem, WeightSystem};

use crate::claims;
use crate::constants::{Constants, COORD, COS, ESSEEN, SIZE};
use crate::experiments::{
    cosine_family, distinct_int_family, equal_weight_family, esseen_point, fit_equal, loglog_slope, size_family,
    tightness_point, CHECK_EQUAL_REPLICATES, FIT_EQUAL_REPLICATES,
};

pub const DEFAULT_SEED: u64 = 1;
pub const ORACLE_INSTANCES: u64 = 200;
pub const ORACLE_TOL: f64 = 1e-10;
pub const REFIT_TOL: f64 = 0.05;
pub const DIFF_CHECK_LENGTHS: [usize; 5] = [9, 16, 25, 36, 49];
pub const DIFF_SLOPE: (f64, f64) = (-1.7, -1.3);
pub const PRG_CHECK_LENGTHS: [usize; 3] = [8, 12, 16];
pub const MGG_CHECK_BOUND: f64 = 0.884;
pub const TIGHTNESS_LAMBDAS: [f64; 3] = [0.0, 0.3, 0.6];
pub const TIGHTNESS_LENGTHS: [usize; 5] = [64, 128, 256, 512, 1024];
pub const TIGHTNESS_SLOPE: (f64, f64) = (-0.55, -0.45);
pub const ESSEEN_CHECK_INSTANCES: u64 = 200;
pub const SUITE_LIMIT: Duration = Duration::from_secs(600);

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub checks: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub pass: bool,
    pub criteria: Vec<CriterionReport>,
}

/// A finished criterion plus the bound rows it produced and its timing.
#[derive(Debug, Clone)]
pub struct CriterionRun {
    pub report: CriterionReport,
    pub rows: Vec<BoundReport>,
    pub elapsed: Duration,
    pub limit: Option<Duration>,
}

impl CriterionRun {
    pub fn within_limit(&self) -> bool {
        self.limit.is_none_or(|l| self.elapsed <= l)
    }
}

#[derive(Debug, Clone)]
pub struct SuiteRun {
    pub seed: u64,
    pub runs: Vec<CriterionRun>,
    pub elapsed: Duration,
}

impl SuiteRun {
    pub fn report(&self) -> SuiteReport {
        let criteria: Vec<_> = self.runs.iter().map(|r| r.report.clone()).collect();
        SuiteReport { seed: self.seed, pass: criteria.iter().all(|c| c.pass), criteria }
    }

    pub fn rows(&self) -> Vec<BoundReport> {
        self.runs.iter().flat_map(|r| r.rows.iter().cloned()).collect()
    }

    pub fn within_limits(&self) -> bool {
        self.elapsed <= SUITE_LIMIT && self.runs.iter().all(CriterionRun::within_limit)
    }

    /// Every criterion passed inside its time limit.
    pub fn pass(&self) -> bool {
        self.report().pass && self.within_limits()
    }
}

struct Outcome {
    pass: bool,
    checks: u64,
    detail: String,
    rows: Vec<BoundReport>,
}

fn criterion_seed(seed: u64, id: u32) -> u64 {
    seed ^ ((id as u64) << 48)
}

fn ok(bound_rows: &[BoundReport]) -> bool {
    bound_rows.iter().all(|r| r.pass)
}

fn worst_ratio(rows: &[BoundReport]) -> f64 {
    rows.iter().map(|r| r.ratio).fold(0.0, f64::max)
}

fn oracle_equivalence(seed: u64) -> Result<Outcome> {
    let (mut char_err, mut mass_err) = (0.0f64, 0.0f64);
    for i in 0..ORACLE_INSTANCES {
        let inst = random_integer_instance(&mut instance_rng(seed, i), 4, 8, 6)?;
        let w = WeightSystem::integers(&inst.weights)?;
        for j in 0..3 {
            // Points of a golden-ratio sequence in [-1, 1).
            let xi = ((3 * i + j) as f64 * 0.618_033_988_749_894_8).fract() * 2.0 - 1.0;
            let a = char_fn(&inst.chain, &inst.signs, &w, xi)?;
            let b = brute_force_char_fn(&inst.chain, &inst.signs, &w, xi)?;
            char_err = char_err.max((a.as_complex() - b.as_complex()).norm());
        }
        let dp = exact_sum_distribution(&inst.chain, &inst.signs, &w, DEFAULT_CELL_BUDGET)?;
        let bf = brute_force_distribution(&inst.chain, &inst.signs, &inst.weights)?;
        let (lo, hi) = bf.span();
        let (dlo, dhi) = dp.span();
        for s in lo.min(dlo)..=hi.max(dhi) {
            mass_err = mass_err.max((dp.prob_at(s) - bf.prob_at(s)).abs());
        }
    }
    Ok(Outcome {
        pass: char_err <= ORACLE_TOL && mass_err <= ORACLE_TOL,
        checks: ORACLE_INSTANCES,
        detail: format!("max |char_fn error| {char_err:e}; max mass error {mass_err:e}"),
        rows: Vec::new(),
    })
}

fn extremal_value() -> Result<Outcome> {
    let chain = make_independent_chain(&[0.5, 0.5])?;
    let signs = SignSystem::split_labeling(&chain, 10)?;
    let w = WeightSystem::all_ones(10);
    let float = exact_sum_distribution(&chain, &signs, &w, DEFAULT_CELL_BUDGET)?.prob_at(0);
    let steps = integer_step_values(&signs, &w)?;
    let exact = exact_sum_distribution_rational(&chain, &steps)?
        .into_iter()
        .find(|(s, _)| *s == 0)
        .map(|(_, q)| q);
    let target = 252.0 / 1024.0;
    // 252/1024 in lowest terms.
    let rational_ok = exact.as_ref().is_some_and(|q| q.to_string() == "63/256");
    Ok(Outcome {
        pass: (float - target).abs() <= 1e-12 && rational_ok,
        checks: 2,
        detail: format!(
            "P(S = 0) = {float}; rational {}",
            exact.map_or_else(|| "missing".into(), |q| q.to_string())
        ),
        rows: Vec::new(),
    })
}

fn equal_weight_bound(seed: u64, c: &Constants) -> Result<Outcome> {
    let tc = c.theorem();
    let rows: Vec<_> = equal_weight_family(seed, CHECK_EQUAL_REPLICATES)?
        .into_iter()
        .map(|m| Ok(BoundReport::new(m.id, &m.params, m.prob, theorem_bound(TheoremKind::ScalarHalfUnit, &m.params, &tc)?)))
        .collect::<Result<_>>()?;
    let refit = fit_equal(seed, FIT_EQUAL_REPLICATES)?.value;
    let drift = (refit / tc.equal - 1.0).abs();
    Ok(Outcome {
        pass: ok(&rows) && drift < REFIT_TOL,
        checks: rows.len() as u64 + 1,
        detail: format!("worst ratio {}; refit C_equal {refit} (relative change {drift:e})", worst_ratio(&rows)),
        rows,
    })
}

fn distinct_scaling(c: &Constants) -> Result<Outcome> {
    let tc = c.theorem();
    let family = distinct_int_family(DIFF_CHECK_LENGTHS)?;
    let slope = loglog_slope(&family.iter().map(|m| (m.params.n as f64, m.prob)).collect::<Vec<_>>());
    let rows: Vec<_> = family
        .into_iter()
        .map(|m| Ok(BoundReport::new(m.id, &m.params, m.prob, theorem_bound(TheoremKind::DistinctInt, &m.params, &tc)?)))
        .collect::<Result<_>>()?;
    Ok(Outcome {
        pass: ok(&rows) && (DIFF_SLOPE.0..=DIFF_SLOPE.1).contains(&slope),
        checks: rows.len() as u64 + 1,
        detail: format!("slope {slope}; worst ratio {}", worst_ratio(&rows)),
        rows,
    })
}

fn negative_moment() -> Result<Outcome> {
    let r = claims::negative_moment()?;
    Ok(Outcome {
        pass: r.pass,
        checks: r.instances,
        detail: format!("max exact/bound - 1 = {:e}", r.max_violation),
        rows: Vec::new(),
    })
}

fn cosine_integral(c: &Constants) -> Result<Outcome> {
    let cc = c.get(COS);
    let fam = cosine_family()?;
    let worst = fam.iter().map(|&(k, v)| v * (k as f64).sqrt()).fold(0.0, f64::max);
    Ok(Outcome {
        pass: worst <= cc * (1.0 + BOUND_RTOL),
        checks: fam.len() as u64,
        detail: format!("max sqrt(k) * integral {worst}; C_cos {cc}"),
        rows: Vec::new(),
    })
}

fn decomposition(seed: u64) -> Result<Outcome> {
    let (l1, mean) = claims::decomposition(seed, claims::DEFAULT_BUDGET)?;
    let avg = claims::averaging(seed)?;
    let avg_ok = avg.iter().all(|r| r.pass);
    Ok(Outcome {
        pass: l1.pass && avg_ok,
        checks: l1.instances + avg.iter().map(|r| r.instances).sum::<u64>(),
        detail: format!(
            "L1 form max lhs - rhs {:e} ({}); expectation form max {:e} ({}); averaging facts max {:e} / {:e} / {:e} ({})",
            l1.max_violation,
            if l1.pass { "holds" } else { "violated" },
            mean.max_violation,
            if mean.pass { "holds" } else { "violated" },
            avg[0].max_violation,
            avg[1].max_violation,
            avg[2].max_violation,
            if avg_ok { "hold" } else { "violated" },
        ),
        rows: Vec::new(),
    })
}

fn switching() -> Result<Outcome> {
    let (dom, chain) = claims::switching(claims::DEFAULT_BUDGET, 4)?;
    Ok(Outcome {
        pass: dom.pass,
        checks: dom.instances,
        detail: format!(
            "max domination deficit {:e}; moment chain max excess {:e} ({})",
            dom.max_violation,
            chain.max_violation,
            if chain.pass { "holds" } else { "violated" }
        ),
        rows: Vec::new(),
    })
}

fn prg(c: &Constants) -> Result<Outcome> {
    let tc = c.theorem();
    let mut g4 = build_mgg_expander(4)?;
    let lam4 = g4.certify_lambda()?;
    let mut rows = Vec::new();
    for k in [2u32, 4] {
        let g = build_mgg_expander(k)?;
        for n in PRG_CHECK_LENGTHS {
            let spec = PrgSpec::new(g.clone(), n)?;
            let p = prg_smallball(&spec, &vec![1.0; n], 0, 0.0, 1.0, PrgMode::Exact { budget: DEFAULT_WALK_BUDGET })?;
            let params = TheoremParams { n, d: 1, lambda: 0.0, radius: 1.0 };
            rows.push(BoundReport::new(
                format!("mgg-k{k}-n{n}"),
                &params,
                p.value(),
                theorem_bound(TheoremKind::Prg, &params, &tc)?,
            ));
        }
    }
    let c1 = c.get(SIZE);
    let size = size_family();
    let size_worst = size.iter().map(|&(n, bits)| bits / (n as f64).sqrt()).fold(0.0, f64::max);
    let size_ok = size_worst <= c1 * (1.0 + BOUND_RTOL)
        && PRG_CHECK_LENGTHS.iter().all(|&n| log2_size_for(n) <= c1 * (n as f64).sqrt() * (1.0 + BOUND_RTOL));
    Ok(Outcome {
        pass: lam4 < MGG_CHECK_BOUND && ok(&rows) && size_ok,
        checks: 1 + rows.len() as u64 + size.len() as u64,
        detail: format!(
            "k = 4 lambda {lam4}; worst ratio {}; max log2|D| / sqrt(n) {size_worst} vs C_1 {c1}",
            worst_ratio(&rows)
        ),
        rows,
    })
}

fn tightness() -> Result<Outcome> {
    let mut slopes = Vec::new();
    let mut norm_max = Vec::new();
    for lam in TIGHTNESS_LAMBDAS {
        let pts: Vec<(f64, f64)> =
            TIGHTNESS_LENGTHS.iter().map(|&n| Ok((n as f64, tightness_point(lam, n)?))).collect::<Result<_>>()?;
        slopes.push(loglog_slope(&pts));
        let scale = |n: f64| ((1.0 - lam) * n / (1.0 + lam)).sqrt();
        norm_max.push(pts.iter().map(|&(n, p)| p * scale(n)).fold(0.0, f64::max));
    }
    let slopes_ok = slopes.iter().all(|s| (TIGHTNESS_SLOPE.0..=TIGHTNESS_SLOPE.1).contains(s));
    let overall = norm_max.iter().copied().fold(0.0, f64::max);
    Ok(Outcome {
        pass: slopes_ok && overall <= 2.0 * norm_max[0],
        checks: (TIGHTNESS_LAMBDAS.len() * TIGHTNESS_LENGTHS.len()) as u64,
        detail: format!("slopes {slopes:?}; max normalized value per lambda {norm_max:?}"),
        rows: Vec::new(),
    })
}

fn coordinate_tail(c: &Constants) -> Result<Outcome> {
    let cc = c.get(COORD);
    let mut worst = f64::INFINITY;
    let mut checks = 0;
    for d in crate::experiments::COORD_DIMS {
        let t = 1.0 / (cc * (d as f64).sqrt());
        worst = worst.min(first_coord_tail_exact(d, t)?);
        checks += 1;
    }
    let t3 = 1.0 / (cc * 3f64.sqrt());
    let d3_err = (first_coord_tail_exact(3, t3)? - (1.0 - t3)).abs();
    Ok(Outcome {
        pass: worst >= 0.5 - 1e-10 && d3_err <= 1e-10,
        checks: checks + 1,
        detail: format!("min tail {worst}; d = 3 error {d3_err:e}"),
        rows: Vec::new(),
    })
}

fn esseen(seed: u64, c: &Constants) -> Result<Outcome> {
    let ce = c.get(ESSEEN);
    let mut worst = 0.0f64;
    let mut esseen_fail = 0u64;
    let mut residue_fail = 0u64;
    for i in 0..ESSEEN_CHECK_INSTANCES {
        let pt = esseen_point(seed, i)?;
        let ratio = pt.prob / (ce * pt.fourier);
        worst = worst.max(ratio);
        if ratio > 1.0 + BOUND_RTOL {
            esseen_fail += 1;
        }
        // Same instance stream as `esseen_point`.
        let inst = random_integer_instance(&mut instance_rng(seed, i), 4, 8, 5)?;
        let w = WeightSystem::integers(&inst.weights)?;
        let p = find_prime(&w)?;
        let d = exact_sum_distribution(&inst.chain, &inst.signs, &w, DEFAULT_CELL_BUDGET)?;
        let (lo, hi) = d.span();
        residue_fail += (lo..=hi).filter(|&x| d.prob_at(x) > d.residue_mass(x, p)).count() as u64;
    }
    Ok(Outcome {
        pass: esseen_fail == 0 && residue_fail == 0,
        checks: 2 * ESSEEN_CHECK_INSTANCES,
        detail: format!(
            "worst prob / bound {worst}; Esseen failures {esseen_fail}; residue failures {residue_fail}"
        ),
        rows: Vec::new(),
    })
}

type Runner<'a> = Box<dyn Fn() -> Result<Outcome> + 'a>;

fn criteria<'a>(seed: u64, c: &'a Constants) -> Vec<(u32, &'static str, Option<u64>, Runner<'a>)> {
    let s = move |id| criterion_seed(seed, id);
    vec![
        (1, "transfer matrix agrees with path enumeration", Some(30), Box::new(move || oracle_equivalence(s(1)))),
        (2, "extremal value 252/1024 for ten fair signs", None, Box::new(extremal_value)),
        (3, "equal-weight bound with fitted C_equal", Some(60), Box::new(move || equal_weight_bound(s(3), c))),
        (4, "n^(-3/2) scaling for distinct integer weights", Some(60), Box::new(move || distinct_scaling(c))),
        (5, "binomial negative moment bound", Some(5), Box::new(negative_moment)),
        (6, "cosine product integral with fitted C_cos", Some(30), Box::new(move || cosine_integral(c))),
        (7, "decomposition inequality and averaging facts", Some(60), Box::new(move || decomposition(s(7)))),
        (8, "switching-sequence domination", Some(30), Box::new(switching)),
        (9, "expander-walk generator", Some(60), Box::new(move || prg(c))),
        (10, "tightness of the 1/sqrt(n) rate", Some(60), Box::new(tightness)),
        (11, "first-coordinate tail with fitted C_coord", None, Box::new(move || coordinate_tail(c))),
        (12, "Esseen and residue-class domination", None, Box::new(move || esseen(s(12), c))),
    ]
}

fn run_one(id: u32, name: &str, limit: Option<u64>, f: &dyn Fn() -> Result<Outcome>) -> CriterionRun {
    let start = Instant::now();
    let (report, rows) = match f() {
        Ok(o) => (CriterionReport { id, name: name.into(), pass: o.pass, checks: o.checks, detail: o.detail }, o.rows),
        Err(e) => (CriterionReport { id, name: name.into(), pass: false, checks: 0, detail: format!("error: {e}") }, Vec::new()),
    };
    CriterionRun { report, rows, elapsed: start.elapsed(), limit: limit.map(Duration::from_secs) }
}

/// Criteria 1 to 12, optionally reporting each run as it finishes.
pub fn run_checks(seed: u64, constants: &Constants, mut progress: impl FnMut(&CriterionRun)) -> SuiteRun {
    let start = Instant::now();
    let runs = criteria(seed, constants)
        .into_iter()
        .map(|(id, name, limit, f)| {
            let r = run_one(id, name, limit, &*f);
            progress(&r);
            r
        })
        .collect();
    SuiteRun { seed, runs, elapsed: start.elapsed() }
}

pub fn report_bytes(report: &SuiteReport) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(report).expect("serializable report");
    v.push(b'\n');
    v
}

/// Every criterion. The last one reruns 1 to 12 and demands a byte-identical
/// report and a total runtime inside the suite limit.
pub fn verify_all(seed: u64, constants: &Constants, mut progress: impl FnMut(&CriterionRun)) -> SuiteRun {
    let start = Instant::now();
    let first = run_checks(seed, constants, &mut progress);
    let second = run_checks(seed, constants, |_| {});
    let identical = report_bytes(&first.report()) == report_bytes(&second.report());
    let elapsed = start.elapsed();
    let last = CriterionRun {
        report: CriterionReport {
            id: 13,
            name: "deterministic reports".into(),
            pass: identical,
            checks: 1,
            detail: format!("rerun report {}", if identical { "byte-identical" } else { "differs" }),
        },
        rows: Vec::new(),
        elapsed: second.elapsed,
        limit: Some(SUITE_LIMIT),
    };
    progress(&last);
    let mut runs = first.runs;
    runs.push(last);
    SuiteRun { seed, runs, elapsed }
}
