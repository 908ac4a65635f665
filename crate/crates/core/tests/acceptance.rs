//! Acceptance checklist: the mathematical guarantees the crate advertises,
//! exercised end to end with pinned tolerances and exactly one PASS/FAIL
//! line per criterion. The target runs without the libtest harness so the
//! twelve lines always reach stdout in order; a nonzero exit code reports
//! any failed criterion to `cargo test`.
//!
//! Expensive runs are shared: criteria 1 and 2 reuse one decaying baseline,
//! 5 and 6 one certified breaking attempt, 7 and 8 one momentum-split pair,
//! and criterion 9 inspects the characteristic flow of every run above.
//! Total wall time is a few minutes, dominated by the n = 8192 transport
//! run (noted below; everything else stays at n = 1024 on the same box).

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::OnceLock;
use std::time::Instant;

use breakwater::breaking::{breaking_outcome, certificate, slope_inequality_excess, Outcome};
use breakwater::characteristics::sign_preservation;
use breakwater::config::{GridConfig, OutputConfig};
use breakwater::diagnostics::{identity_residuals, verify_decay, Identity};
use breakwater::dynamics::{integrate_fixed, run, RunResult, TerminalStatus};
use breakwater::grid::{Field, Grid};
use breakwater::initdata::{ProfileKind, ProfileSpec};
use breakwater::io::run_single;
use breakwater::spectral::SpectralWorkspace;
use breakwater::{EquationParams, SimConfig};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Half-width of the periodic box for every criterion. Gaussian-type data
/// of width O(1) sits below 1e-100 at the boundary, so the box faithfully
/// models the whole line.
const HALF_LENGTH: f64 = 20.0 * std::f64::consts::PI;

fn main() {
    type Criterion = fn() -> Result<String, String>;
    let criteria: [Criterion; 12] = [
        criterion_01_energy_pair_decays_exponentially,
        criterion_02_momentum_and_mass_means_agree,
        criterion_03_undamped_run_conserves_energy,
        criterion_04_differential_identities_hold_pointwise,
        criterion_05_certified_data_break_in_finite_time,
        criterion_06_slope_obeys_the_riccati_inequality,
        criterion_07_single_sign_momentum_runs_globally,
        criterion_08_momentum_transports_along_characteristics,
        criterion_09_flow_remains_an_increasing_diffeomorphism,
        criterion_10_operators_match_independent_oracles,
        criterion_11_random_certificates_are_internally_consistent,
        criterion_12_identical_configs_reproduce_bytes,
    ];
    let mut failed = 0u32;
    for (index, body) in criteria.iter().enumerate() {
        let number = index as u32 + 1;
        match catch_unwind(AssertUnwindSafe(body)) {
            Ok(Ok(detail)) => println!("criterion {number:02} PASS - {detail}"),
            Ok(Err(detail)) => {
                failed += 1;
                println!("criterion {number:02} FAIL - {detail}");
            }
            Err(payload) => {
                failed += 1;
                println!("criterion {number:02} FAIL - panicked: {}", panic_text(&payload));
            }
        }
    }
    println!("acceptance: {} of 12 criteria satisfied", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}

fn panic_text(payload: &(dyn std::any::Any + Send)) -> String {
    if let Some(s) = payload.downcast_ref::<&str>() {
        (*s).to_string()
    } else if let Some(s) = payload.downcast_ref::<String>() {
        s.clone()
    } else {
        "opaque panic payload".to_string()
    }
}

fn verdict(pass: bool, detail: String) -> Result<String, String> {
    if pass {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn workspace(n_points: usize) -> SpectralWorkspace {
    let grid = Grid::new(HALF_LENGTH, n_points).expect("grid parameters are valid");
    SpectralWorkspace::new(grid, 0.4).expect("dealias fraction is valid")
}

fn config(
    params: EquationParams,
    profile: ProfileSpec,
    n_points: usize,
    t_end: f64,
    sample_interval: f64,
) -> SimConfig {
    SimConfig {
        params,
        grid: GridConfig { half_length: HALF_LENGTH, n_points },
        profile,
        t_end,
        dt_init: 0.01,
        dt_min: 1e-9,
        slope_floor: -1e4,
        norm_cap: 1e6,
        sample_interval,
        dealias_fraction: 0.4,
        seed_stride: 8,
        output: OutputConfig::default(),
        sweep: None,
    }
}

/// A finished run plus the configuration that produced it, cached so
/// several criteria can interrogate the same trajectory.
struct Shared {
    config: SimConfig,
    result: RunResult,
    wall_seconds: f64,
}

fn shared<'a>(cell: &'a OnceLock<Shared>, make: impl FnOnce() -> SimConfig) -> &'a Shared {
    cell.get_or_init(|| {
        let config = make();
        let started = Instant::now();
        let result = run(&config).expect("acceptance run hit a contract error");
        Shared { config, result, wall_seconds: started.elapsed().as_secs_f64() }
    })
}

/// Criterion 1's run: Gaussian data, generic coefficients, gentle damping.
fn baseline_config() -> SimConfig {
    config(
        EquationParams::new(0.1, 0.3, 0.2, 0.1, 0.1),
        ProfileSpec::new(ProfileKind::Gaussian, 0.5, 1.0, 0.0),
        1024,
        5.0,
        0.05,
    )
}

fn baseline() -> &'static Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    shared(&CELL, baseline_config)
}

fn conservative() -> &'static Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    shared(&CELL, || {
        let mut c = baseline_config();
        c.params.lambda = 0.0;
        c
    })
}

/// Data the breaking certificate vouches for, integrated with the damping
/// set to half the certified ceiling so the guarantee applies. The profile
/// slope at the origin (amplitude/width = -1.32) beats the certificate
/// threshold with a margin near 30 percent.
fn certified() -> &'static Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    shared(&CELL, || {
        let profile = ProfileSpec::new(ProfileKind::GaussianDerivative, -0.66, 0.5, 0.0);
        let ws = workspace(1024);
        let u0 = profile.realize(&ws).expect("profile is realizable");
        let scouting = EquationParams::new(0.0, 0.1, 0.1, 0.1, 0.05);
        let cert = certificate(&ws, &scouting, &u0);
        assert!(
            cert.condition_holds && cert.lambda0 > 0.0,
            "breaking fixture lost its certificate: lambda0 {:.6}",
            cert.lambda0
        );
        let params = EquationParams::new(cert.lambda0 / 2.0, 0.1, 0.1, 0.1, 0.05);
        // The certified breaking time is well under t = 4 for this data;
        // t_end = 8 leaves no doubt that reaching it means no detection.
        config(params, profile, 1024, 8.0, 0.05)
    })
}

/// Momentum with exactly one sign change and no polynomial source
/// (alpha + Gamma = 0, beta = gamma = 0): the regime with a global
/// solution and sign-carrying characteristics. n = 8192 is the resolution
/// where the dealias cutoff clears the product spectrum well enough that
/// transported-momentum checks resolve below every tolerance used here;
/// this is the one deliberately heavy run in the suite.
fn split() -> &'static Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    shared(&CELL, || {
        config(
            EquationParams::new(0.1, 0.2, 0.0, 0.0, -0.2),
            ProfileSpec::new(ProfileKind::MomentumSplit, 1.0, 1.0, 0.0),
            8192,
            10.0,
            0.025,
        )
    })
}

/// The undamped variant for the drift half of criterion 8; the shorter
/// window and n = 4096 keep the conservative truncation's band-edge
/// accumulation far below the 1e-5 bar (measured 5e-9).
fn split_conservative() -> &'static Shared {
    static CELL: OnceLock<Shared> = OnceLock::new();
    shared(&CELL, || {
        config(
            EquationParams::new(0.0, 0.2, 0.0, 0.0, -0.2),
            ProfileSpec::new(ProfileKind::MomentumSplit, 1.0, 1.0, 0.0),
            4096,
            5.0,
            0.025,
        )
    })
}

/// H0 e^{lambda t} and H1 e^{2 lambda t} must stay constant to 1e-6
/// relative over t in [0, 5]; the only systematic error sources are RK4
/// truncation (~1e-11 here) and round-off, so the bar has real margin.
fn criterion_01_energy_pair_decays_exponentially() -> Result<String, String> {
    let s = baseline();
    let decay = verify_decay(&s.result.series, s.config.params.lambda);
    let finished = s.result.status == TerminalStatus::ReachedTEnd;
    let detail = format!(
        "H1 deviation {:.3e}, H0 deviation {:.3e} (tol 1e-6), status {}",
        decay.h1_max_deviation, decay.h0_max_deviation, s.result.status
    );
    verdict(
        finished && decay.h1_max_deviation <= 1e-6 && decay.h0_max_deviation <= 1e-6,
        detail,
    )
}

/// The mean of m = u - u_xx equals the mean of u identically (u_xx
/// integrates to zero over the period), so their gap is pure quadrature
/// round-off; the shared mean must also follow the e^{-lambda t} law.
fn criterion_02_momentum_and_mass_means_agree() -> Result<String, String> {
    let s = baseline();
    let decay = verify_decay(&s.result.series, s.config.params.lambda);
    let recs = s.result.series.records();
    let h0_0 = recs[0].h0;
    let lambda = s.config.params.lambda;
    let mean_drift = recs
        .iter()
        .map(|r| (r.h0 - (-lambda * r.t).exp() * h0_0).abs())
        .fold(0.0f64, f64::max);
    let detail = format!(
        "max relative |int m - int u| {:.3e} (tol 1e-12), max |int u - e^(-lt) int u0| {:.3e} (tol 1e-8)",
        decay.mass_identity_deviation, mean_drift
    );
    verdict(decay.mass_identity_deviation <= 1e-12 && mean_drift <= 1e-8, detail)
}

/// With lambda = 0 the energy must be conserved, not merely slowly drifting:
/// relative H1 drift at most 1e-8 across the whole window.
fn criterion_03_undamped_run_conserves_energy() -> Result<String, String> {
    let s = conservative();
    let decay = verify_decay(&s.result.series, 0.0);
    let finished = s.result.status == TerminalStatus::ReachedTEnd;
    let detail = format!(
        "H1 relative drift {:.3e} over t in [0, 5] (tol 1e-8), status {}",
        decay.h1_max_deviation, s.result.status
    );
    verdict(finished && decay.h1_max_deviation <= 1e-8, detail)
}

/// The three differential identities hold pointwise for any smooth field,
/// so a manufactured v(t, x) checks the discretization alone. With slab
/// spacing 0.005 the centered time stencil contributes ~1e-9 and spectral
/// x-derivatives round-off, comfortably under the 1e-8 bar.
fn criterion_04_differential_identities_hold_pointwise() -> Result<String, String> {
    let ws = workspace(1024);
    let grid = ws.grid().clone();
    let t0 = 0.7;
    let delta = 0.005;
    let slab_at = |shift: f64| -> [Field; 5] {
        let mut slices = Vec::with_capacity(5);
        for j in -2i32..=2 {
            let t = t0 + f64::from(j) * delta;
            slices.push(Field::from_fn(grid.clone(), move |x| {
                shift + (-t).exp() * x.sin() + 0.3 * (-2.0 * t).exp() * (2.0 * x).cos()
            }));
        }
        slices.try_into().expect("exactly five slices")
    };
    let generic = EquationParams::new(0.1, 0.3, 0.2, 0.1, 0.1);
    let slab = slab_at(0.0);
    let momentum = identity_residuals(&ws, &generic, &slab, delta, Identity::Momentum)
        .expect("momentum identity is evaluable");
    let energy = identity_residuals(&ws, &generic, &slab, delta, Identity::Energy)
        .expect("energy identity is evaluable");
    // The square-root form needs the polynomial source gone (beta = gamma = 0,
    // Gamma = -alpha) and v - v_xx strictly positive; a constant shift of 4
    // keeps the momentum above 2.6 without touching any derivative.
    let restricted = EquationParams::new(0.1, 0.3, 0.0, 0.0, -0.3);
    let shifted = slab_at(4.0);
    let sqrt_form = identity_residuals(&ws, &restricted, &shifted, delta, Identity::SqrtMomentum)
        .expect("square-root identity is evaluable on shifted data");
    let detail = format!(
        "max-norm residuals: momentum {momentum:.3e}, energy {energy:.3e}, sqrt-momentum {sqrt_form:.3e} (tol 1e-8)"
    );
    verdict(momentum <= 1e-8 && energy <= 1e-8 && sqrt_form <= 1e-8, detail)
}

/// Data certified for breaking (condition margin at least 10 percent,
/// damping at half the certified ceiling) must end in BlowUpDetected with
/// the tracked slope through -1e4 while sup|u| never exceeds the initial
/// H1 norm by more than 1e-6 relative, and the run must be labeled Broke.
fn criterion_05_certified_data_break_in_finite_time() -> Result<String, String> {
    let s = certified();
    let ws = workspace(s.config.grid.n_points);
    let u0 = &s.result.sampled_fields[0];
    let cert = certificate(&ws, &s.config.params, u0);
    let threshold = cert.u0_h1.sqrt().max(cert.u0_h1 * cert.u0_h1);
    let margin = -(cert.theta0 * cert.y0) / threshold - 1.0;
    let recs = s.result.series.records();
    let min_slope = recs.iter().map(|r| r.slope_min).fold(f64::INFINITY, f64::min);
    let amplitude_bounded = recs
        .iter()
        .all(|r| r.sup_abs_u <= cert.u0_h1 * (1.0 + 1e-6));
    let outcome = breaking_outcome(&s.result.series, &s.result.status);
    let detected = matches!(s.result.status, TerminalStatus::BlowUpDetected(_));
    let detail = format!(
        "condition margin {:.1}%, guaranteed {}, status {}, min slope {:.4e} (need < -1e4), \
         amplitude bounded {}, outcome {} ({:.0} s)",
        margin * 100.0,
        cert.guaranteed,
        s.result.status,
        min_slope,
        amplitude_bounded,
        outcome,
        s.wall_seconds
    );
    verdict(
        margin >= 0.10
            && cert.guaranteed
            && detected
            && min_slope < -1e4
            && amplitude_bounded
            && outcome == Outcome::Broke,
        detail,
    )
}

/// Along the certified run, every trustworthy centered-difference sample of
/// the tracked slope must satisfy
///   y' + y^2/2 + lambda y <= u0_h1^2/4 + 3 kappa max(u0_h1, u0_h1^4) + 1e-3.
fn criterion_06_slope_obeys_the_riccati_inequality() -> Result<String, String> {
    let s = certified();
    let grid = s.config.build_grid().expect("config already validated");
    let recs = s.result.series.records();
    let u0_h1 = (2.0 * recs[0].h1).sqrt();
    let excess = slope_inequality_excess(&s.result.trace, &s.config.params, u0_h1, &grid);
    let detail = format!(
        "largest inequality excess {:.3e} over {} slope samples (tol 1e-3)",
        excess,
        s.result.trace.len()
    );
    verdict(excess <= 1e-3, detail)
}

/// One-sign-change momentum with no polynomial source runs to t = 10
/// without incident: no slope below -(u0 H1 norm) - 1e-6 at any sample,
/// and no seed's momentum strictly flips sign (dead band 1e-10 sup|m0|).
fn criterion_07_single_sign_momentum_runs_globally() -> Result<String, String> {
    let s = split();
    let recs = s.result.series.records();
    let u0_h1 = (2.0 * recs[0].h1).sqrt();
    let floor = -u0_h1 - 1e-6;
    let min_slope = recs.iter().map(|r| r.slope_min).fold(f64::INFINITY, f64::min);
    let sign = sign_preservation(&s.result.flow, &s.config.params);
    let finished = s.result.status == TerminalStatus::ReachedTEnd;
    let detail = format!(
        "status {}, min slope {:.6} vs floor {:.6}, sign flips {} over {} seeds x {} samples ({:.0} s)",
        s.result.status,
        min_slope,
        floor,
        sign.violations,
        s.result.flow.seeds().len(),
        s.result.flow.snapshots().len(),
        s.wall_seconds
    );
    verdict(
        finished && min_slope >= floor && sign.hypothesis_met && sign.preserved,
        detail,
    )
}

/// e^{lambda t} m(t, q) q_x^2 must reproduce m0 plus the accumulated source
/// integral: residual at most 1e-4 relative to sup|m0| on the damped run,
/// and at most 1e-5 drift on an undamped run over t in [0, 5] (the source
/// vanishes identically here, so the identity is pure transport).
fn criterion_08_momentum_transports_along_characteristics() -> Result<String, String> {
    let s = split();
    let damped = s.result.flow.transport_residual(s.config.params.lambda);
    let c = split_conservative();
    let drift = c.result.flow.transport_residual(0.0);
    let finished = s.result.status == TerminalStatus::ReachedTEnd
        && c.result.status == TerminalStatus::ReachedTEnd;
    let detail = format!(
        "damped residual {:.3e} (tol 1e-4), undamped drift {:.3e} (tol 1e-5)",
        damped, drift
    );
    verdict(finished && damped <= 1e-4 && drift <= 1e-5, detail)
}

/// Every run in this checklist must keep its characteristic flow an
/// increasing diffeomorphism: q_x stays positive (finite log q_x is the
/// structural witness) and seeds never cross or touch.
fn criterion_09_flow_remains_an_increasing_diffeomorphism() -> Result<String, String> {
    let runs: [(&str, &Shared); 5] = [
        ("baseline", baseline()),
        ("conservative", conservative()),
        ("certified", certified()),
        ("split", split()),
        ("split-conservative", split_conservative()),
    ];
    let mut worst_log = f64::INFINITY;
    let mut bad: Vec<&str> = Vec::new();
    for (name, s) in runs {
        let min_log = s.result.flow.min_log_qx();
        worst_log = worst_log.min(min_log);
        let ok = min_log.is_finite()
            && s.result.flow.seeds_stay_ordered()
            && !s.result.flow.snapshots().is_empty();
        if !ok {
            bad.push(name);
        }
    }
    let detail = format!(
        "5 runs, min log q_x {:.4} (finite means q_x > 0), violations: {}",
        worst_log,
        if bad.is_empty() { "none".to_string() } else { bad.join(", ") }
    );
    verdict(bad.is_empty(), detail)
}

/// The core operators against independent oracles: the spectral Helmholtz
/// solve against direct quadrature of the periodized e^{-|d|}/2 kernel at
/// 64 probe points (tol 1e-8), the Parseval identity (tol 1e-12 relative),
/// and the integrator's step-halving convergence order (window [3.5, 4.3]).
fn criterion_10_operators_match_independent_oracles() -> Result<String, String> {
    let ws = workspace(1024);
    let grid = ws.grid().clone();
    let f_fn = |y: f64| (1.0 + 0.5 * y - 0.3 * y * y) * (-y * y / 8.0).exp();
    let f = Field::from_fn(grid.clone(), f_fn);
    let inverse = ws.helmholtz_inverse(&f);
    let stride = grid.len() / 64;
    let mut oracle_err = 0.0f64;
    for probe in 0..64 {
        let i = probe * stride;
        let x = grid.x()[i];
        let reference = green_oracle(&f_fn, x);
        oracle_err = oracle_err.max((inverse.values()[i] - reference).abs());
    }

    let spectral = ws.sobolev_norm(&f, 0.0);
    let physical = ws.l2_norm_physical(&f);
    let parseval = (spectral - physical).abs() / physical;

    // Step-halving on smooth Gaussian data, far from the stability edge
    // (k_max |u + Gamma| dt ~ 0.8), so the dt^4 term dominates cleanly.
    let params = EquationParams::new(0.1, 0.3, 0.2, 0.1, 0.1);
    let u0 = Field::from_fn(grid.clone(), |x| 0.5 * (-x * x).exp());
    let t = 0.5;
    let solution = |steps: usize| {
        integrate_fixed(&ws, &params, &u0, t / steps as f64, steps)
            .expect("fixed-step integration stays finite")
    };
    let coarse = solution(20);
    let mid = solution(40);
    let fine = solution(80);
    let e1 = coarse.add_scaled(-1.0, &mid).expect("same grid").max_abs();
    let e2 = mid.add_scaled(-1.0, &fine).expect("same grid").max_abs();
    let order = (e1 / e2).log2();

    let detail = format!(
        "Green-oracle max error {:.3e} at 64 probes (tol 1e-8), Parseval gap {:.3e} (tol 1e-12), \
         step-halving order {:.3} from gaps {:.2e} / {:.2e} (window [3.5, 4.3])",
        oracle_err, parseval, order, e1, e2
    );
    verdict(
        oracle_err <= 1e-8 && parseval <= 1e-12 && (3.5..=4.3).contains(&order),
        detail,
    )
}

/// 100 randomized feasible data sets: the certificate must report
/// eps0 in (0, 1) and lambda0 > 0, the damping bound at lambda = lambda0/2
/// must hold in the form eps0/(4 lambda) + 1/y0 > 0, and eliminating eps0
/// must return the norm cap: U0 = (1 - eps0) theta0^2 y0^2 to 1e-12.
fn criterion_11_random_certificates_are_internally_consistent() -> Result<String, String> {
    let ws = workspace(1024);
    let mut rng = ChaCha8Rng::seed_from_u64(0x2026_0819);
    let quartic_root = (std::f64::consts::PI / 2.0).powf(0.25);
    let mut violations = 0usize;
    let mut first_problems: Vec<String> = Vec::new();
    for case in 0..100 {
        // For A (x/w) e^{-(x/w)^2} the steepest slope is A/w at x = 0 and
        // the H1 norm is |A| n(w), n(w) = (pi/2)^{1/4} sqrt((w^2+3)/(4w)).
        // Writing a for the H1 norm and r(w) = 2/((pi/2)^{1/4} sqrt(w(w^2+3)))
        // so that |y0| = a r, the certificate condition
        //   theta0 a r > max(sqrt(a), a^2)
        // is exactly a in ((theta0 r)^{-2}, theta0 r). The coefficient draws
        // keep kappa <= 0.12, hence theta0 >= 0.905, which leaves that window
        // open for every width in [0.45, 0.65]; sampling its middle 90
        // percent dodges the closed-form-versus-grid round-off at the edges.
        let w: f64 = rng.gen_range(0.45..0.65);
        let alpha = rng.gen_range(-0.12..0.12);
        let beta = rng.gen_range(-0.36..0.36);
        let gamma = rng.gen_range(-0.48..0.48);
        let cap_gamma = rng.gen_range(-0.12..0.12);
        let scouting = EquationParams::new(0.0, alpha, beta, gamma, cap_gamma);
        let n_w = quartic_root * ((w * w + 3.0) / (4.0 * w)).sqrt();
        let r_w = 2.0 / (quartic_root * (w * (w * w + 3.0)).sqrt());
        let hi = scouting.theta0() * r_w;
        let lo = 1.0 / (hi * hi);
        let a = lo + rng.gen_range(0.05..0.95) * (hi - lo);
        let profile = ProfileSpec::new(ProfileKind::GaussianDerivative, -a / n_w, w, 0.0);
        let u0 = profile.realize(&ws).expect("profile is realizable");
        let cert = certificate(&ws, &scouting, &u0);

        let lambda = cert.lambda0 / 2.0;
        let damping_headroom = cert.eps0 / (4.0 * lambda) + 1.0 / cert.y0;
        let rebuilt = (1.0 - cert.eps0) * cert.theta0 * cert.theta0 * cert.y0 * cert.y0;
        let rearrangement = (rebuilt - cert.u0_cap).abs() / cert.u0_cap;
        let ok = cert.condition_holds
            && cert.eps0 > 0.0
            && cert.eps0 < 1.0
            && cert.lambda0 > 0.0
            && damping_headroom > 0.0
            && rearrangement <= 1e-12;
        if !ok {
            violations += 1;
            if first_problems.len() < 3 {
                first_problems.push(format!(
                    "case {case}: w {w:.3}, a {a:.3}, eps0 {:.3e}, lambda0 {:.3e}, headroom {:.3e}, rearrangement {:.3e}",
                    cert.eps0, cert.lambda0, damping_headroom, rearrangement
                ));
            }
        }
    }
    let detail = if violations == 0 {
        "100 fixtures: eps0 in (0,1), lambda0 > 0, damping headroom positive, rearrangement within 1e-12".to_string()
    } else {
        format!("{violations} of 100 fixtures failed; first: {}", first_problems.join("; "))
    };
    verdict(violations == 0, detail)
}

/// Two fresh runs of the same configuration must serialize byte-identical
/// timeseries CSVs: the adaptive controller, samplers, and writers contain
/// no hidden nondeterminism.
fn criterion_12_identical_configs_reproduce_bytes() -> Result<String, String> {
    let dir = tempfile::tempdir().expect("temp dir is creatable");
    let first = run_single(&baseline_config(), &dir.path().join("first"))
        .expect("first rerun completes");
    let second = run_single(&baseline_config(), &dir.path().join("second"))
        .expect("second rerun completes");
    let a = std::fs::read(dir.path().join("first").join("timeseries.csv"))
        .expect("first timeseries exists");
    let b = std::fs::read(dir.path().join("second").join("timeseries.csv"))
        .expect("second timeseries exists");
    let identical = a == b;
    let detail = format!(
        "timeseries.csv {} bytes per run, byte-identical {} (statuses {} / {})",
        a.len(),
        identical,
        first.status,
        second.status
    );
    verdict(!a.is_empty() && identical, detail)
}

/// Periodization of the line kernel e^{-|d|}/2 on a circle of circumference
/// 2 HALF_LENGTH: summing both image tails geometrically gives
/// (e^{-r} + e^{-(2L - r)}) / (2 (1 - e^{-2L})) with r = d mod 2L.
fn periodic_green(d: f64) -> f64 {
    let period = 2.0 * HALF_LENGTH;
    let r = d.rem_euclid(period);
    ((-r).exp() + (r - period).exp()) / (2.0 * (1.0 - (-period).exp()))
}

/// Direct quadrature oracle for (1 - d_xx)^{-1} f at one point, splitting
/// the integral at the kernel's kink so each piece is smooth inside.
fn green_oracle(f: &impl Fn(f64) -> f64, x: f64) -> f64 {
    let integrand = |y: f64| periodic_green(x - y) * f(y);
    adaptive_simpson(&integrand, -HALF_LENGTH, x, 1e-12)
        + adaptive_simpson(&integrand, x, HALF_LENGTH, 1e-12)
}

fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if a == b {
        return 0.0;
    }
    let m = 0.5 * (a + b);
    let (fa, fm, fb) = (f(a), f(m), f(b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_refine(f, a, m, b, fa, fm, fb, whole, tol, 48)
}

#[allow(clippy::too_many_arguments)]
fn simpson_refine<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    m: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let err = left + right - whole;
    if depth == 0 || err.abs() <= 15.0 * tol {
        // Richardson tail: Simpson's composite error cancels to O(h^6).
        return left + right + err / 15.0;
    }
    simpson_refine(f, a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_refine(f, m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}
