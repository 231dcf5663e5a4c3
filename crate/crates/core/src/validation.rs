//! Dual-engine validation suite behind `hetnet validate` and the
//! `acceptance` test target. Each criterion returns a pass/fail verdict plus
//! the numbers it was decided on; nothing here adjusts tolerances.
//!
//! The special-function oracles below deliberately use different algorithms
//! from [`crate::numerics`]: power series and periodic trapezoid sums for
//! `I0`, and the Poisson mixture of regularised gamma tails for Marcum Q1.

use std::f64::consts::PI;
use std::path::PathBuf;

use crate::activity::{active_count_weights, sample_truncated_poisson};
use crate::association::{
    exclusion_radius, interferer_distance_pdf, nearest_macro_law, nearest_sbs_cdf, nearest_sbs_pdf, serving_distance_pdf,
    serving_support, serving_weight, total_mass,
};
use crate::cli::config::{Config, Engine, PolicySelection, SweepSpec, SweepVariable};
use crate::cli::sweep::{run_sweep, RunManifest, MANIFEST_FILE};
use crate::coverage::{classical_ppp_coverage, optimal_threshold, CoverageEvaluator, CoverageOptions, CoverageReport};
use crate::error::{Error, Result};
use crate::kernel::ClusterKernel;
use crate::laplace::{laplace_inter, laplace_intra, laplace_macro, IntraMode, LaplaceContext};
use crate::montecarlo::empirical::{
    empirical_inter_laplace, empirical_intra_laplace, empirical_macro_laplace, sample_member_distance,
    sample_nearest_macro_distance, sample_v0, TabulatedCdf,
};
use crate::montecarlo::{derive_seed, simulate_coverage, trial_rng, SimConfig};
use crate::numerics::{bessel_i0, bessel_i0_scaled, marcum_q1, marcum_q1_complement};
use crate::params::{AssociationPolicy, Model, NetworkParams, RawParams, Tier};
use crate::stats::{chi_square_gof, chi_square_independence, ks_p_value, ks_statistic};

/// Significance level of the distribution tests.
pub const SIGNIFICANCE: f64 = 0.01;

pub const CRITERIA: [(u8, &str); 9] = [
    (1, "dual-engine agreement"),
    (2, "classical single-tier reduction"),
    (3, "monotone coverage/throughput trade-off"),
    (4, "policy dominance"),
    (5, "optimal distance threshold"),
    (6, "distribution suite"),
    (7, "Laplace transform suite"),
    (8, "numerics floor"),
    (9, "sweep determinism"),
];

#[derive(Debug, Clone)]
pub struct ValidationOptions {
    /// Trials per simulated coverage point.
    pub trials: u64,
    /// Trials per point of the threshold check, which needs tighter intervals.
    pub threshold_trials: u64,
    pub seed: u64,
    /// Samples per distribution test.
    pub distribution_samples: usize,
    /// Samples per empirical intra-cluster / macro transform.
    pub laplace_samples: u64,
    /// Samples per empirical inter-cluster transform (each draws a full field).
    pub inter_laplace_samples: u64,
    /// Scratch directory for the determinism check; a temporary one if unset.
    pub work_dir: Option<PathBuf>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self {
            trials: 100_000,
            threshold_trials: 200_000,
            seed: 1,
            distribution_samples: 100_000,
            laplace_samples: 100_000,
            inter_laplace_samples: 20_000,
            work_dir: None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriterionResult {
    pub id: u8,
    pub title: &'static str,
    pub passed: bool,
    pub summary: String,
    pub details: Vec<String>,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] criterion {}: {} — {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.summary
        )
    }
}

/// Baseline grid used by criteria 1, 3 and 4.
pub const GRID_SIGMAS: [f64; 2] = [0.02, 0.04];
pub const GRID_NBARS: [f64; 4] = [1.0, 3.0, 5.0, 7.0];
/// Threshold-search grid (km); its middle point is the default D.
pub fn d_grid() -> Vec<f64> {
    (0..13).map(|i| 0.01 * 25f64.powf(i as f64 / 12.0)).collect()
}

#[derive(Debug, Clone)]
struct GridPoint {
    sigma: f64,
    nbar: f64,
    params: NetworkParams,
    /// Indexed by policy (P1, P2).
    simplified: [CoverageReport; 2],
    exact: [CoverageReport; 2],
    simulated: [CoverageReport; 2],
}

pub struct Validator {
    opts: ValidationOptions,
    grid: Option<Vec<GridPoint>>,
}

fn grid_params(sigma: f64, nbar: f64) -> Result<NetworkParams> {
    NetworkParams::baseline().with(|r| {
        r.sigma_s = sigma;
        r.sigma_u = sigma;
        r.nbar_as = nbar;
    })
}

fn policy_index(p: AssociationPolicy) -> usize {
    match p {
        AssociationPolicy::MaxPower => 0,
        AssociationPolicy::Threshold => 1,
    }
}

impl Validator {
    pub fn new(opts: ValidationOptions) -> Self {
        Self { opts, grid: None }
    }

    pub fn run(&mut self, id: u8) -> CriterionResult {
        let title = CRITERIA.iter().find(|(i, _)| *i == id).map_or("unknown", |(_, t)| t);
        let outcome = match id {
            1 => self.criterion_1(),
            2 => self.criterion_2(),
            3 => self.criterion_3(),
            4 => self.criterion_4(),
            5 => self.criterion_5(),
            6 => self.criterion_6(),
            7 => self.criterion_7(),
            8 => self.criterion_8(),
            9 => self.criterion_9(),
            _ => Err(Error::invalid("criterion", format!("no criterion {id}"))),
        };
        match outcome {
            Ok((passed, summary, details)) => CriterionResult { id, title, passed, summary, details },
            Err(e) => CriterionResult { id, title, passed: false, summary: format!("error: {e}"), details: vec![] },
        }
    }

    /// Runs all criteria in order, reporting each as it finishes.
    pub fn run_all(&mut self, mut each: impl FnMut(&CriterionResult)) -> Vec<CriterionResult> {
        CRITERIA
            .iter()
            .map(|&(id, _)| {
                let r = self.run(id);
                each(&r);
                r
            })
            .collect()
    }

    fn grid(&mut self) -> Result<&[GridPoint]> {
        if self.grid.is_none() {
            let mut points = Vec::new();
            for &sigma in &GRID_SIGMAS {
                for &nbar in &GRID_NBARS {
                    let params = grid_params(sigma, nbar)?;
                    let model = Model::thomas(params)?;
                    let simplified_ev = CoverageEvaluator::new(model.clone(), CoverageOptions::default())?;
                    let simplified =
                        AssociationPolicy::BOTH.iter().map(|&p| simplified_ev.coverage(p)).collect::<Result<Vec<_>>>()?;
                    // built after the first pass so the inter-cluster table is shared
                    let exact_ev =
                        simplified_ev.with_options(CoverageOptions::default().with_mode(IntraMode::ExactTruncatedSum))?;
                    let mut exact = Vec::new();
                    let mut simulated = Vec::new();
                    for policy in AssociationPolicy::BOTH {
                        exact.push(exact_ev.coverage(policy)?);
                        let sim = SimConfig {
                            trials: self.opts.trials,
                            seed: derive_seed(self.opts.seed, points.len() as u64),
                            ..SimConfig::default()
                        };
                        simulated.push(simulate_coverage(&model, policy, &sim)?);
                    }
                    let arr = |v: Vec<CoverageReport>| -> [CoverageReport; 2] { v.try_into().expect("two policies") };
                    points.push(GridPoint {
                        sigma,
                        nbar,
                        params,
                        simplified: arr(simplified),
                        exact: arr(exact),
                        simulated: arr(simulated),
                    });
                }
            }
            self.grid = Some(points);
        }
        Ok(self.grid.as_deref().expect("grid just built"))
    }

    fn criterion_1(&mut self) -> Result<Verdict> {
        let grid = self.grid()?;
        let mut details = Vec::new();
        let (mut worst, mut worst_exact, mut outside) = (0.0f64, 0.0f64, 0);
        for g in grid {
            for policy in AssociationPolicy::BOTH {
                let i = policy_index(policy);
                let sim = &g.simulated[i];
                let d = g.simplified[i].total_coverage - sim.total_coverage;
                let de = g.exact[i].total_coverage - sim.total_coverage;
                worst = worst.max(d.abs());
                worst_exact = worst_exact.max(de.abs());
                let ok = d.abs() <= 0.01;
                outside += usize::from(!ok);
                details.push(format!(
                    "sigma={:.2} km nbar={} {policy}: analytic {:.4} (exact-sum {:.4}) vs sim {:.4} ± {:.4}; Δ={:+.4} (exact-sum Δ={:+.4}) {}",
                    g.sigma,
                    g.nbar,
                    g.simplified[i].total_coverage,
                    g.exact[i].total_coverage,
                    sim.total_coverage,
                    sim.provenance.half_width(None).unwrap_or(f64::NAN),
                    d,
                    de,
                    if ok { "ok" } else { "OUTSIDE ±0.01" }
                ));
            }
        }
        let n = grid.len() * 2;
        Ok((
            outside == 0,
            format!(
                "simplified-mode max |Δ| = {worst:.4} (limit 0.01), {outside}/{n} points outside; exact-sum mode max |Δ| = {worst_exact:.4}"
            ),
            details,
        ))
    }

    fn criterion_2(&mut self) -> Result<Verdict> {
        let base = RawParams::baseline();
        let params = NetworkParams::new(RawParams { p_s: base.p_s * 1e-30, nbar_as: 0.0, ..base })?;
        let target = classical_ppp_coverage(params.beta());
        let model = Model::thomas(params)?;
        let ev = CoverageEvaluator::new(model.clone(), CoverageOptions::default())?;
        let mut details = vec![format!("closed form 1/(1+√β·atan√β) at β = {}: {target:.6}", params.beta())];
        let mut ok = true;
        for (k, policy) in AssociationPolicy::BOTH.into_iter().enumerate() {
            let a = ev.coverage(policy)?.total_coverage;
            let sim = SimConfig { trials: self.opts.trials, seed: derive_seed(self.opts.seed, 1000 + k as u64), ..SimConfig::default() };
            let s = simulate_coverage(&model, policy, &sim)?;
            let pass = (a - target).abs() <= 0.01 && (s.total_coverage - target).abs() <= 0.01;
            ok &= pass;
            details.push(format!(
                "{policy}: analytic {a:.6} (Δ={:+.2e}), sim {:.4} ± {:.4} (Δ={:+.4}) {}",
                a - target,
                s.total_coverage,
                s.provenance.half_width(None).unwrap_or(f64::NAN),
                s.total_coverage - target,
                if pass { "ok" } else { "OUTSIDE ±0.01" }
            ));
        }
        Ok((ok, format!("both engines within ±0.01 of {target:.4}: {ok}"), details))
    }

    fn criterion_3(&mut self) -> Result<Verdict> {
        let grid = self.grid()?.to_vec();
        let mut details = Vec::new();
        let mut violations = 0;
        for &sigma in &GRID_SIGMAS {
            let pts: Vec<&GridPoint> = grid.iter().filter(|g| g.sigma == sigma).collect();
            for policy in AssociationPolicy::BOTH {
                let i = policy_index(policy);
                let mut line = format!("sigma={sigma:.2} {policy}:");
                for w in pts.windows(2) {
                    let (a, b) = (w[0], w[1]);
                    let (ca, cb) = (a.simplified[i].total_coverage, b.simplified[i].total_coverage);
                    let (ta, tb) = (a.simplified[i].throughput, b.simplified[i].throughput);
                    let (sa, sb) = (&a.simulated[i], &b.simulated[i]);
                    let slack = sa.provenance.half_width(None).unwrap_or(0.0) + sb.provenance.half_width(None).unwrap_or(0.0);
                    let tslack = throughput_half_width(&a.params, sa) + throughput_half_width(&b.params, sb);
                    let checks = [
                        cb <= ca,
                        tb >= ta,
                        sb.total_coverage <= sa.total_coverage + slack,
                        sb.throughput >= sa.throughput - tslack,
                    ];
                    let bad = checks.iter().filter(|c| !**c).count();
                    violations += bad;
                    line += &format!(
                        " [{}→{}: Pc {:.4}→{:.4} (sim {:.4}→{:.4}), T {:.3}→{:.3} (sim {:.3}→{:.3}){}]",
                        a.nbar,
                        b.nbar,
                        ca,
                        cb,
                        sa.total_coverage,
                        sb.total_coverage,
                        ta,
                        tb,
                        sa.throughput,
                        sb.throughput,
                        if bad == 0 { "" } else { " VIOLATION" }
                    );
                }
                details.push(line);
            }
        }
        Ok((
            violations == 0,
            format!("{violations} monotonicity violations over nbar 1→3→5→7 (analytic strict, simulation within summed 95% CIs)"),
            details,
        ))
    }

    fn criterion_4(&mut self) -> Result<Verdict> {
        let grid = self.grid()?;
        let mut details = Vec::new();
        let mut worst = f64::INFINITY;
        let mut ok = true;
        for g in grid {
            let gap = g.simplified[0].total_coverage - g.simplified[1].total_coverage;
            let sim_gap = g.simulated[0].total_coverage - g.simulated[1].total_coverage;
            let slack = g.simulated[0].provenance.half_width(None).unwrap_or(0.0)
                + g.simulated[1].provenance.half_width(None).unwrap_or(0.0);
            let pass = gap >= -0.005 && sim_gap >= -0.005 - slack;
            ok &= pass;
            worst = worst.min(gap);
            details.push(format!(
                "sigma={:.2} nbar={}: P1 − P2 = {gap:+.4} analytic, {sim_gap:+.4} sim (D = {:.0} m) {}",
                g.sigma,
                g.nbar,
                g.params.distance_threshold() * 1e3,
                if pass { "ok" } else { "VIOLATION" }
            ));
        }
        Ok((ok, format!("min analytic P1 − P2 = {worst:+.4} (limit −0.005)"), details))
    }

    fn criterion_5(&mut self) -> Result<Verdict> {
        let grid = d_grid();
        let mut details = Vec::new();
        let mut ok = true;
        let mut d_stars = Vec::new();
        for (k, &nbar) in [1.0, 4.0, 7.0].iter().enumerate() {
            let params = NetworkParams::baseline().with(|r| r.nbar_as = nbar)?;
            let model = Model::thomas(params)?;
            // n̄ = 7 exceeds n_s0/3, where only the exact sum is reliable
            let ev = CoverageEvaluator::new(model.clone(), CoverageOptions::default().with_mode(IntraMode::ExactTruncatedSum))?;
            let search = optimal_threshold(&ev, &grid)?;
            let (left, right) = (search.grid_coverage[0], *search.grid_coverage.last().expect("non-empty grid"));
            let seed = derive_seed(self.opts.seed, 2000 + k as u64);
            // common random numbers: the three runs share realizations
            let sim_at = |d: f64| -> Result<CoverageReport> {
                let m = model.with_params(params.with_distance_threshold(d)?)?;
                simulate_coverage(&m, AssociationPolicy::Threshold, &SimConfig { trials: self.opts.threshold_trials, seed, ..SimConfig::default() })
            };
            let s_star = sim_at(search.d_star)?;
            let s_left = sim_at(grid[0])?;
            let s_right = sim_at(*grid.last().expect("non-empty grid"))?;
            let hw = s_star.provenance.half_width(None).unwrap_or(f64::NAN);
            let margin = (search.coverage - left).min(search.coverage - right);
            let interior = search.d_star > grid[0] && search.d_star < *grid.last().expect("non-empty grid");
            let sim_peak = s_star.total_coverage > s_left.total_coverage && s_star.total_coverage > s_right.total_coverage;
            let pass = interior && margin > 2.0 * hw && sim_peak;
            ok &= pass;
            d_stars.push(search.d_star);
            details.push(format!(
                "nbar={nbar}: D* = {:.1} m, Pc(D*) = {:.4} (sim {:.4} ± {hw:.4}), ends {:.4} / {:.4} (sim {:.4} / {:.4}); margin {margin:.4} vs 2·hw {:.4} {}",
                search.d_star * 1e3,
                search.coverage,
                s_star.total_coverage,
                left,
                right,
                s_left.total_coverage,
                s_right.total_coverage,
                2.0 * hw,
                if pass { "ok" } else { "FAIL" }
            ));
        }
        let monotone = d_stars.windows(2).all(|w| w[1] <= w[0]);
        ok &= monotone;
        Ok((
            ok,
            format!(
                "interior maxima clear the endpoints by > 2 half-widths; D* = {} m ({})",
                d_stars.iter().map(|d| format!("{:.1}", d * 1e3)).collect::<Vec<_>>().join(" → "),
                if monotone { "non-increasing" } else { "NOT non-increasing" }
            ),
            details,
        ))
    }

    fn criterion_6(&mut self) -> Result<Verdict> {
        let n = self.opts.distribution_samples;
        let params = NetworkParams::baseline();
        let kernel = ClusterKernel::gaussian(params.sigma_s())?;
        let mut tests: Vec<(String, f64)> = Vec::new();
        let mut rng = trial_rng(derive_seed(self.opts.seed, 3000), 0);

        let sigma_u = params.sigma_u();
        let mut v: Vec<f64> = (0..n).map(|_| sample_v0(&kernel, &mut rng)).collect();
        let d = ks_statistic(&mut v, |x| -(-x * x / (2.0 * sigma_u * sigma_u)).exp_m1());
        tests.push(("V0 ~ Rayleigh (KS)".into(), ks_p_value(d, n)));

        for nu0 in [0.05, 0.15] {
            let mut u: Vec<f64> = (0..n).map(|_| sample_member_distance(&kernel, nu0, &mut rng)).collect();
            let d = ks_statistic(&mut u, |x| kernel.distance_cdf(x, nu0).unwrap_or(f64::NAN));
            tests.push((format!("F_U at nu0 = {nu0} km (KS)"), ks_p_value(d, n)));
        }

        let nu0 = 0.05;
        let mut rs: Vec<f64> = (0..n)
            .map(|_| (0..params.n_s0()).map(|_| sample_member_distance(&kernel, nu0, &mut rng)).fold(f64::INFINITY, f64::min))
            .collect();
        let d = ks_statistic(&mut rs, |x| nearest_sbs_cdf(&params, &kernel, x, nu0).unwrap_or(f64::NAN));
        tests.push(("F_Rs at nu0 = 0.05 km (KS)".into(), ks_p_value(d, n)));

        // literal association draws: members from planar offsets, macros from a PPP
        let mut serving: [Vec<f64>; 4] = Default::default();
        let mut pit: [Vec<f64>; 4] = Default::default();
        let mut pairs: [Vec<(f64, f64)>; 4] = Default::default();
        let sf = |e: f64| kernel.distance_sf(e, nu0);
        let mut members = vec![0.0; params.n_s0() as usize];
        let mut draws = 0u64;
        while serving.iter().any(|s| s.len() < n) || pit.iter().any(|p| p.len() < n) {
            draws += 1;
            if draws > 50_000_000 {
                return Err(Error::Simulation("distribution suite: too few draws hit every branch".into()));
            }
            members.iter_mut().for_each(|m| *m = sample_member_distance(&kernel, nu0, &mut rng));
            let rm = sample_nearest_macro_distance(params.lambda_m(), 4.0, &mut rng);
            let (j, &r_s) = members.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("n_s0 ≥ 1");
            for policy in AssociationPolicy::BOTH {
                let small = match policy {
                    AssociationPolicy::MaxPower => r_s < params.xi_sm() * rm,
                    AssociationPolicy::Threshold => r_s <= params.distance_threshold(),
                };
                let slot = 2 * policy_index(policy) + usize::from(small);
                let (x, e) = match (policy, small) {
                    (_, true) => (r_s, r_s),
                    (AssociationPolicy::MaxPower, false) => (rm, params.xi_sm() * rm),
                    (AssociationPolicy::Threshold, false) => (rm, params.distance_threshold()),
                };
                if serving[slot].len() < n {
                    serving[slot].push(x);
                }
                if pit[slot].len() < n {
                    let sfe = sf(e)?;
                    if sfe <= 0.0 {
                        continue;
                    }
                    let mut transformed = Vec::with_capacity(members.len());
                    for (k, &w) in members.iter().enumerate() {
                        if small && k == j {
                            continue;
                        }
                        transformed.push(1.0 - sf(w)? / sfe);
                    }
                    if transformed.len() >= 2 {
                        pairs[slot].push((transformed[0], transformed[1]));
                    }
                    pit[slot].extend(transformed);
                }
            }
        }
        let names = ["P1 macro", "P1 small", "P2 macro", "P2 small"];
        for (slot, name) in names.iter().enumerate() {
            let policy = AssociationPolicy::BOTH[slot / 2];
            let tier = if slot % 2 == 1 { Tier::Small } else { Tier::Macro };
            let (lo, hi) = serving_support(&params, &kernel, policy, tier, nu0);
            let hi = if hi.is_finite() { hi } else { 4.0 };
            let cdf = TabulatedCdf::from_pdf(
                |x| serving_weight(&params, &kernel, policy, tier, x, nu0, Some(1.0)),
                lo,
                hi,
                4000,
            )?;
            let d = ks_statistic(&mut serving[slot], |x| cdf.cdf(x));
            tests.push((format!("serving distance, {name} (KS)"), ks_p_value(d, n)));
            let d = ks_statistic(&mut pit[slot], |u| u.clamp(0.0, 1.0));
            tests.push((format!("interferer distance, {name} (KS of PIT)"), ks_p_value(d, n)));
            let mut table = vec![vec![0u64; 5]; 5];
            let bin = |u: f64| ((u * 5.0) as usize).min(4);
            for &(a, b) in &pairs[slot] {
                table[bin(a)][bin(b)] += 1;
            }
            let chi = chi_square_independence(&table);
            tests.push((format!("interferer pair independence, {name} (chi-square, {} pairs)", pairs[slot].len()), chi.p_value));
        }

        for (nbar, conditioned) in [(3.0, false), (3.0, true), (7.0, false), (7.0, true)] {
            let weights = active_count_weights(nbar, params.n_s0(), conditioned);
            let mut counts = vec![0u64; weights.len()];
            for _ in 0..n {
                counts[sample_truncated_poisson(nbar, params.n_s0(), conditioned, &mut rng) as usize] += 1;
            }
            let chi = chi_square_gof(&counts, &weights);
            let label = if conditioned { "weighted-truncated" } else { "truncated" };
            tests.push((format!("{label} Poisson PMF, nbar = {nbar} (chi-square)"), chi.p_value));
        }

        let failed = tests.iter().filter(|(_, p)| p.is_nan() || *p <= SIGNIFICANCE).count();
        let details = tests
            .iter()
            .map(|(name, p)| format!("{name}: p = {p:.4} {}", if *p > SIGNIFICANCE { "ok" } else { "REJECTED" }))
            .collect();
        Ok((
            failed == 0,
            format!("{} tests at significance {SIGNIFICANCE}, {failed} rejected ({n} samples each, {draws} association draws)", tests.len()),
            details,
        ))
    }

    fn criterion_7(&mut self) -> Result<Verdict> {
        let params = NetworkParams::baseline();
        let kernel = ClusterKernel::gaussian(params.sigma_s())?;
        let nu0 = 0.05;
        let s_grid = |x: f64, power: f64| -> Vec<f64> {
            (0..10).map(|k| x.powf(params.alpha()) / power * 10f64.powf((k as f64 - 4.0) / 3.0)).collect()
        };
        let mut details = Vec::new();
        let mut ok = true;
        let mut worst_z = 0.0f64;
        let mut record = |name: String, analytic: Vec<f64>, est: Vec<crate::montecarlo::empirical::LaplaceEstimate>| {
            let mut zmax = 0.0f64;
            let mut all = true;
            for (a, e) in analytic.iter().zip(&est) {
                let diff = (a - e.mean).abs();
                let z = if e.standard_error > 0.0 { diff / e.standard_error } else if diff == 0.0 { 0.0 } else { f64::INFINITY };
                zmax = zmax.max(z);
                all &= diff <= 3.0 * e.standard_error;
            }
            worst_z = worst_z.max(zmax);
            ok &= all;
            let range = format!(
                "L from {:.3} to {:.3}",
                analytic.iter().cloned().fold(f64::INFINITY, f64::min),
                analytic.iter().cloned().fold(0.0, f64::max)
            );
            details.push(format!("{name}: max |Δ|/SE = {zmax:.2} over 10 s-values ({range}) {}", if all { "ok" } else { "OUTSIDE 3 SE" }));
        };

        let branches = [
            (AssociationPolicy::MaxPower, Tier::Macro, 0.3),
            (AssociationPolicy::MaxPower, Tier::Small, 0.03),
            (AssociationPolicy::Threshold, Tier::Macro, 0.3),
            (AssociationPolicy::Threshold, Tier::Small, 0.03),
        ];
        for (k, &(policy, tier, x)) in branches.iter().enumerate() {
            let s = s_grid(x, params.power(tier));
            let ctx = LaplaceContext { params: &params, kernel: &kernel, policy, tier, nu0, x: Some(x), mode: IntraMode::ExactTruncatedSum };
            let analytic = s.iter().map(|&s| laplace_intra(&ctx, s)).collect::<Result<Vec<_>>>()?;
            let est = empirical_intra_laplace(&params, &kernel, policy, tier, nu0, x, &s, self.opts.laplace_samples, derive_seed(self.opts.seed, 4000 + k as u64))?;
            record(format!("intra {policy} {tier} (x = {x} km)"), analytic, est);

            let analytic = s.iter().map(|&s| laplace_macro(&params, policy, tier, s, Some(x))).collect::<Result<Vec<_>>>()?;
            let est = empirical_macro_laplace(&params, policy, tier, x, 20.0, &s, self.opts.laplace_samples, derive_seed(self.opts.seed, 4100 + k as u64))?;
            record(format!("macro {policy} {tier} (x = {x} km)"), analytic, est);
        }
        let s = s_grid(0.03, params.p_s());
        let analytic = s.iter().map(|&s| laplace_inter(&params, &kernel, s)).collect::<Result<Vec<_>>>()?;
        let est = empirical_inter_laplace(&params, &kernel, 4.0, &s, self.opts.inter_laplace_samples, derive_seed(self.opts.seed, 4200))?;
        record("inter-cluster".into(), analytic, est);

        // value at s = 0
        let mut at_zero = true;
        for &(policy, tier, x) in &branches {
            for mode in [IntraMode::ExactTruncatedSum, IntraMode::SimplifiedExponential] {
                let ctx = LaplaceContext { params: &params, kernel: &kernel, policy, tier, nu0, x: Some(x), mode };
                at_zero &= laplace_intra(&ctx, 0.0)? == 1.0;
            }
            at_zero &= laplace_macro(&params, policy, tier, 0.0, Some(x))? == 1.0;
        }
        at_zero &= laplace_inter(&params, &kernel, 0.0)? == 1.0;
        ok &= at_zero;
        details.push(format!("all transforms equal 1 at s = 0: {at_zero}"));

        // simplified vs exact intra transform for n̄ up to n_s0/3
        let mut worst_gap = 0.0f64;
        for nbar in [1.0, 2.0, params.n_s0() as f64 / 3.0] {
            let p = params.with(|r| r.nbar_as = nbar)?;
            for &(policy, tier, x) in &branches {
                for s in s_grid(x, p.power(tier)) {
                    let ctx = |mode| LaplaceContext { params: &p, kernel: &kernel, policy, tier, nu0, x: Some(x), mode };
                    let gap = (laplace_intra(&ctx(IntraMode::SimplifiedExponential), s)? - laplace_intra(&ctx(IntraMode::ExactTruncatedSum), s)?).abs();
                    worst_gap = worst_gap.max(gap);
                }
            }
        }
        let mut worst_cov_gap = 0.0f64;
        for g in self.grid()?.iter().filter(|g| g.nbar <= g.params.n_s0() as f64 / 3.0) {
            for i in 0..2 {
                worst_cov_gap = worst_cov_gap.max((g.simplified[i].total_coverage - g.exact[i].total_coverage).abs());
            }
        }
        let gap_ok = worst_gap <= 0.01 && worst_cov_gap <= 0.01;
        ok &= gap_ok;
        details.push(format!(
            "simplified vs exact for nbar ≤ n_s0/3: max transform gap {worst_gap:.4}, max coverage gap {worst_cov_gap:.4} (limit 0.01) {}",
            if gap_ok { "ok" } else { "EXCEEDED" }
        ));
        Ok((ok, format!("worst |Δ|/SE = {worst_z:.2} (limit 3); s = 0 exact; simplified-vs-exact within 0.01: {gap_ok}"), details))
    }

    fn criterion_8(&mut self) -> Result<Verdict> {
        let mut details = Vec::new();
        let mut ok = true;

        let mut worst_q = 0.0f64;
        for &a in &[0.0, 0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
            for &b in &[0.01, 0.1, 0.5, 1.0, 2.0, 3.0, 5.0, 10.0, 20.0, 30.0] {
                let (q, p) = marcum_oracle(a, b);
                let rel = |x: f64, r: f64| if r == 0.0 { x.abs() } else { ((x - r) / r).abs() };
                // relative error of both Q and 1 − Q, so deep tails on either side count
                let e = rel(marcum_q1(a, b)?, q).max(rel(marcum_q1_complement(a, b)?, p));
                worst_q = worst_q.max(e);
            }
        }
        let q_ok = worst_q <= 1e-9;
        ok &= q_ok;
        details.push(format!("Marcum Q1 vs Poisson-mixture series: worst relative error {worst_q:.2e} (limit 1e-9)"));

        let mut worst_i = 0.0f64;
        for k in 0..=200 {
            let x = k as f64 * 0.25;
            let series = i0_series(x);
            worst_i = worst_i.max(((bessel_i0(x)? - series) / series).abs());
        }
        for &x in &[0.0, 0.5, 3.0, 15.0, 60.0, 300.0, 1e3, 1e4] {
            let oracle = i0_scaled_trapezoid(x);
            worst_i = worst_i.max(((bessel_i0_scaled(x)? - oracle) / oracle).abs());
        }
        let i_ok = worst_i <= 1e-10;
        ok &= i_ok;
        details.push(format!("Bessel I0 vs power series / trapezoid sums: worst relative error {worst_i:.2e} (limit 1e-10)"));

        let params = NetworkParams::baseline();
        let kernel = ClusterKernel::gaussian(params.sigma_s())?;
        let mut masses: Vec<(String, f64)> = Vec::new();
        let sigma = params.sigma_s();
        for nu0 in [0.0, 0.05, 0.2, 1.0] {
            let (lo, hi) = kernel.distance_support(nu0);
            masses.push((format!("member distance, nu0 = {nu0}"), total_mass(|u| kernel.distance_pdf(u, nu0), lo, hi, sigma)?));
            masses.push((format!("nearest SBS, nu0 = {nu0}"), total_mass(|u| nearest_sbs_pdf(&params, &kernel, u, nu0), lo, hi, sigma)?));
        }
        masses.push(("user-centre distance".into(), total_mass(|v| kernel.user_center_distance_pdf(v), 0.0, f64::INFINITY, sigma)?));
        masses.push(("inter-cluster member distance, nu = 0.3".into(), total_mass(|t| kernel.intercluster_distance_pdf(t, 0.3), 0.0, f64::INFINITY, sigma)?));
        let law = nearest_macro_law(&params);
        masses.push(("nearest macro".into(), total_mass(|r| Ok(law.density(r)), 0.0, f64::INFINITY, law.scale())?));
        for nu0 in [0.02, 0.1] {
            for policy in AssociationPolicy::BOTH {
                for tier in Tier::BOTH {
                    let (lo, hi) = serving_support(&params, &kernel, policy, tier, nu0);
                    let scale = if tier == Tier::Macro { law.scale() } else { sigma };
                    let m = total_mass(|x| serving_distance_pdf(&params, &kernel, policy, tier, x, nu0), lo, hi, scale)?;
                    masses.push((format!("serving distance {policy} {tier}, nu0 = {nu0}"), m));
                    let x = if tier == Tier::Macro { 0.3 } else { 0.03 };
                    let e = exclusion_radius(&params, policy, tier, x);
                    let m = total_mass(|w| interferer_distance_pdf(&params, &kernel, policy, tier, w, nu0, x), e, f64::INFINITY, sigma)?;
                    masses.push((format!("interferer distance {policy} {tier}, nu0 = {nu0}"), m));
                }
            }
        }
        for (nbar, conditioned) in [(3.0, false), (3.0, true), (7.0, true)] {
            let w: f64 = active_count_weights(nbar, params.n_s0(), conditioned).iter().sum();
            masses.push((format!("active-count weights nbar = {nbar}, conditioned = {conditioned}"), w));
        }
        let worst_mass = masses.iter().map(|(_, m)| (m - 1.0).abs()).fold(0.0, f64::max);
        let m_ok = worst_mass <= 1e-6;
        ok &= m_ok;
        for (name, m) in &masses {
            details.push(format!("∫ {name} = {m:.9}"));
        }
        Ok((
            ok,
            format!("Marcum {worst_q:.1e} (≤1e-9), I0 {worst_i:.1e} (≤1e-10), {} densities within {worst_mass:.1e} of unit mass (≤1e-6)", masses.len()),
            details,
        ))
    }

    fn criterion_9(&mut self) -> Result<Verdict> {
        let params = NetworkParams::baseline();
        let config = Config {
            params,
            sweep: SweepSpec {
                variable: SweepVariable::NbarAs,
                values: vec![1.0, 2.0],
                series: None,
                engines: vec![Engine::Analytic, Engine::Simulation],
                policy: PolicySelection::Both,
                sigma_coupled: true,
                intra_mode: IntraMode::default(),
            },
            sim: SimConfig { trials: 3000, seed: self.opts.seed, ..SimConfig::default() },
        };
        let scratch;
        let root = match &self.opts.work_dir {
            Some(d) => d.clone(),
            None => {
                scratch = std::env::temp_dir().join(format!("hetnet-validate-{}", std::process::id()));
                scratch.clone()
            }
        };
        let (a, b) = (root.join("first"), root.join("second"));
        run_sweep(&config)?.write(&a)?;
        let manifest = RunManifest::load(a.join(MANIFEST_FILE))?;
        run_sweep(&manifest.config()?)?.write(&b)?;
        let first = std::fs::read(a.join(&manifest.csv_file))?;
        let second = std::fs::read(b.join(&manifest.csv_file))?;
        let same = first == second;
        if self.opts.work_dir.is_none() {
            let _ = std::fs::remove_dir_all(&root);
        }
        Ok((
            same,
            format!("re-run from manifest gives {} CSV ({} bytes)", if same { "a byte-identical" } else { "a DIFFERENT" }, first.len()),
            vec![format!("{} rows, both engines, both policies", manifest.rows.len())],
        ))
    }
}

type Verdict = (bool, String, Vec<String>);

/// 95% half-width of a simulated throughput, from the per-tier intervals.
fn throughput_half_width(params: &NetworkParams, rep: &CoverageReport) -> f64 {
    let hm = rep.provenance.half_width(Some(Tier::Macro)).unwrap_or(0.0);
    let hs = rep.provenance.half_width(Some(Tier::Small)).unwrap_or(0.0);
    (params.lambda_m() * hm + params.lambda_p() * params.nbar_as() * hs) * (1.0 + params.beta()).log2()
}

/// `(Q1(a, b), 1 − Q1(a, b))` from the Poisson mixture
/// `Q1 = Σ_k Pois(k; a²/2) · Q(k+1, b²/2)`, with the regularised gamma
/// tails of integer order summed as finite Poisson sums. All terms are
/// non-negative, so both outputs keep full relative accuracy.
fn marcum_oracle(a: f64, b: f64) -> (f64, f64) {
    let mu = a * a / 2.0;
    let y = b * b / 2.0;
    let kmax = (mu + 40.0 * mu.sqrt() + 60.0) as usize;
    let jmax = (y + 40.0 * y.sqrt() + 60.0) as usize + kmax;
    let mut ln_fact = vec![0.0; jmax + 1];
    for i in 1..=jmax {
        ln_fact[i] = ln_fact[i - 1] + (i as f64).ln();
    }
    let ln_pois = |k: usize, m: f64| -> f64 {
        if m == 0.0 {
            if k == 0 { 0.0 } else { f64::NEG_INFINITY }
        } else {
            k as f64 * m.ln() - m - ln_fact[k]
        }
    };
    // terms of e^{-y} y^j / j!
    let gy: Vec<f64> = (0..=jmax).map(|j| ln_pois(j, y).exp()).collect();
    // upper[k] = Σ_{j ≤ k} gy[j] = Q(k+1, y); lower[k] = Σ_{j > k} gy[j]
    let mut upper = vec![0.0; kmax + 1];
    let mut acc = 0.0;
    for k in 0..=kmax {
        acc += gy[k];
        upper[k] = acc;
    }
    let mut lower = vec![0.0; kmax + 1];
    let mut tail: f64 = gy[kmax + 1..].iter().rev().sum();
    for k in (0..=kmax).rev() {
        lower[k] = tail;
        tail += gy[k];
    }
    let (mut q, mut p) = (0.0, 0.0);
    for k in 0..=kmax {
        let w = ln_pois(k, mu).exp();
        q += w * upper[k];
        p += w * lower[k];
    }
    (q, p)
}

/// `I0(x) = Σ (x²/4)^k / (k!)²`.
fn i0_series(x: f64) -> f64 {
    let q = x * x / 4.0;
    let (mut term, mut sum) = (1.0f64, 1.0f64);
    for k in 1..1000 {
        term *= q / (k as f64 * k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

/// `e^{-x} I0(x) = (1/π) ∫_0^π e^{x (cos θ − 1)} dθ`; the trapezoid rule is
/// spectrally accurate for this periodic integrand.
fn i0_scaled_trapezoid(x: f64) -> f64 {
    let n = 4000;
    let h = PI / n as f64;
    let f = |t: f64| (x * (t.cos() - 1.0)).exp();
    let inner: f64 = (1..n).map(|i| f(i as f64 * h)).sum();
    (0.5 * (f(0.0) + f(PI)) + inner) * h / PI
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn oracles_agree_with_textbook_values() {
        // Q1(0, b) = exp(-b²/2)
        let (q, p) = marcum_oracle(0.0, 2.0);
        assert!((q - (-2.0f64).exp()).abs() < 1e-15);
        assert!((q + p - 1.0).abs() < 1e-14);
        assert!((i0_series(1.0) - 1.266_065_877_752_008_4).abs() < 1e-15);
        assert!((i0_scaled_trapezoid(1.0) - 1.266_065_877_752_008_4 * (-1.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn d_grid_is_centred_on_the_default_threshold() {
        let g = d_grid();
        assert_eq!(g.len(), 13);
        assert!((g[6] - RawParams::DEFAULT_D_KM).abs() < 1e-12);
        assert!((g[12] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn unknown_criterion_fails_cleanly() {
        let r = Validator::new(ValidationOptions::default()).run(42);
        assert!(!r.passed);
        assert!(r.line().starts_with("[FAIL] criterion 42"));
    }

    #[test]
    fn determinism_criterion_passes() {
        let dir = tempfile::tempdir().unwrap();
        let mut v = Validator::new(ValidationOptions { work_dir: Some(dir.path().to_path_buf()), ..ValidationOptions::default() });
        let r = v.run(9);
        assert!(r.passed, "{}", r.line());
    }
}
