use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::Rng;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::run::{nondecreasing_within, run};
use crate::coloring::{Coloring, K_MAX};
use crate::error::{Error, Result};
use crate::estimate::{
    dense_failure_bound, efron_stein_sides, estimate_not_dense, estimate_theta_scan, fit_exponent_from, run_annealed,
    run_quenched, Estimate, McParams, QuenchedMoments, SpecModel,
};
use crate::events::{arms_on, arms_on_shifted, cells_with_nucleus_in, EventSpec, PreparedEvent, SafeZone};
use crate::geom::{build_complex, incircle, sample_poisson, Point, PointSet, Rect, RegionGraph, RegionSpec, Window};
use crate::oracle::{brute_pivotal, random_arm_instance, BruteRegion};
use crate::stream::SeedPath;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fast,
    Full,
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            "" => Err("empty suite name; expected `fast` or `full`".into()),
            other => Err(format!("unknown suite `{other}`; expected `fast` or `full`")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Gate {
    Hard,
    Soft,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct Criterion {
    pub id: u32,
    pub name: &'static str,
    pub gate: Gate,
    pub verdict: Verdict,
    pub measured: String,
    pub bound: String,
    pub seconds: f64,
}

impl fmt::Display for Criterion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match self.verdict {
            Verdict::Pass => "PASS",
            Verdict::Warn => "WARN",
            Verdict::Fail => "FAIL",
        };
        let g = match self.gate {
            Gate::Hard => "hard",
            Gate::Soft => "soft",
        };
        write!(
            f,
            "[{v}] {:>2} {} ({g}) | measured: {} | bound: {} | {:.1} s",
            self.id, self.name, self.measured, self.bound, self.seconds
        )
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub suite: Suite,
    pub criteria: Vec<Criterion>,
}

impl Report {
    /// Every hard gate passed.
    pub fn passed(&self) -> bool {
        self.criteria
            .iter()
            .all(|c| c.gate == Gate::Soft || c.verdict != Verdict::Fail)
    }
}

/// Sample sizes per suite. Tolerances do not depend on the suite.
struct Budgets {
    geometry_sets: u64,
    arm_instances: u64,
    pivotal_instances: u64,
    cross: Vec<(f64, u64)>,
    arm_scales: Vec<(f64, u64)>,
    efron_stein_km: u64,
    jensen_km: u64,
    variance: Vec<(f64, u64)>,
    dense_envs: u64,
    theta_replicates: u64,
    determinism_replicates: u64,
}

impl Budgets {
    fn of(suite: Suite) -> Self {
        match suite {
            Suite::Fast => Self {
                geometry_sets: 100,
                arm_instances: 500,
                pivotal_instances: 200,
                cross: vec![(16.0, 1000), (32.0, 500), (64.0, 250)],
                arm_scales: vec![(16.0, 3000), (32.0, 1500), (64.0, 800)],
                efron_stein_km: 60,
                jensen_km: 100,
                variance: vec![(16.0, 80), (32.0, 80), (64.0, 50)],
                dense_envs: 1000,
                theta_replicates: 300,
                determinism_replicates: 200,
            },
            Suite::Full => Self {
                geometry_sets: 100,
                arm_instances: 2000,
                pivotal_instances: 500,
                cross: vec![(16.0, 10_000), (32.0, 10_000), (64.0, 10_000)],
                arm_scales: vec![(16.0, 100_000), (32.0, 100_000), (64.0, 100_000), (128.0, 100_000)],
                efron_stein_km: 200,
                jensen_km: 300,
                variance: vec![(16.0, 300), (32.0, 300), (64.0, 300)],
                dense_envs: 10_000,
                theta_replicates: 2000,
                determinism_replicates: 1000,
            },
        }
    }
}

/// Master seed of every acceptance experiment.
const SEED: u64 = 20_240_601;

/// Run a suite, calling `on_result` as each criterion finishes.
pub fn verify(suite: Suite, workers: usize, mut on_result: impl FnMut(&Criterion)) -> Report {
    let b = Budgets::of(suite);
    let root = SeedPath::root(SEED);
    let workers = workers.max(1);
    let mut criteria = Vec::new();
    let mut push = |c: Criterion| {
        on_result(&c);
        criteria.push(c);
    };
    let timed = |id: u32, name: &'static str, gate: Gate, f: &dyn Fn() -> Result<(Verdict, String, String)>| {
        let t = Instant::now();
        let (verdict, measured, bound) = f().unwrap_or_else(|e| (Verdict::Fail, format!("error: {e}"), "-".into()));
        Criterion {
            id,
            name,
            gate,
            verdict,
            measured,
            bound,
            seconds: t.elapsed().as_secs_f64(),
        }
    };

    push(timed(1, "geometry correctness", Gate::Hard, &|| geometry(b.geometry_sets, &root.child(1))));
    push(timed(2, "arm detector oracle equivalence", Gate::Hard, &|| {
        arm_oracle(b.arm_instances, &root.child(2))
    }));
    push(timed(3, "pivotal oracle equivalence", Gate::Hard, &|| {
        pivotal_oracle(b.pivotal_instances, &root.child(3))
    }));
    push(timed(4, "crossing symmetry", Gate::Hard, &|| crossing(&b.cross, &root.child(4), workers)));

    // Criteria 5 and 9 share one set of arm-event runs.
    let t = Instant::now();
    let arms = arm_runs(&b.arm_scales, &root.child(5), workers);
    let shared = t.elapsed().as_secs_f64();
    let mut c5 = timed(5, "universal arm exponents", Gate::Soft, &|| match &arms {
        Ok(a) => Ok(exponents(a)),
        Err(e) => Err(e.clone()),
    });
    c5.seconds += shared;
    push(c5);

    push(timed(6, "Efron-Stein inequality", Gate::Hard, &|| {
        efron_stein(b.efron_stein_km, &root.child(6), workers)
    }));
    push(timed(7, "Jensen gap and moment ratio", Gate::Hard, &|| {
        jensen(b.jensen_km, &root.child(7), workers)
    }));
    push(timed(8, "quantitative variance bound", Gate::Soft, &|| {
        variance_bound(&b.variance, &root.child(8), workers)
    }));
    push(timed(9, "quasi-multiplicativity", Gate::Soft, &|| match &arms {
        Ok(a) => Ok(quasi_multiplicativity(a)),
        Err(e) => Err(e.clone()),
    }));
    push(timed(10, "dense environment bound", Gate::Soft, &|| dense(b.dense_envs, &root.child(10), workers)));
    push(timed(11, "theta scan", Gate::Soft, &|| theta(b.theta_replicates, &root.child(11), workers)));
    push(timed(12, "determinism and worker invariance", Gate::Hard, &|| {
        determinism(b.determinism_replicates)
    }));
    Report { suite, criteria }
}

fn pass_if(ok: bool) -> Verdict {
    if ok {
        Verdict::Pass
    } else {
        Verdict::Fail
    }
}

fn geometry(sets: u64, stream: &SeedPath) -> Result<(Verdict, String, String)> {
    let window = Window::new(0.0, 0.0, 10.0, 10.0)?;
    let (mut triangles, mut bad, mut euler_bad, mut asym) = (0usize, 0usize, 0u64, 0u64);
    for s in 0..sets {
        let mut rng = stream.child(s).rng();
        let pts: Vec<Point> = (0..50)
            .map(|_| Point::new(rng.random_range(0.0..10.0), rng.random_range(0.0..10.0)))
            .collect();
        let cx = build_complex(&PointSet::from_points(pts, window)?)?;
        for t in cx.triangles() {
            triangles += 1;
            let [a, b, c] = t.map(|k| cx.nucleus(k as usize));
            let ccw = crate::geom::orient2d(a, b, c) > 0.0;
            let inside = (0..cx.len())
                .filter(|k| !t.contains(&(*k as u32)))
                .any(|k| {
                    let d = incircle(a, b, c, cx.nucleus(k));
                    if ccw {
                        d > 0.0
                    } else {
                        d < 0.0
                    }
                });
            bad += usize::from(inside);
        }
        let e = cx.edges().count() as i64;
        let f = cx.triangles().len() as i64 + 1;
        euler_bad += u64::from(cx.len() as i64 - e + f != 2);
        asym += (0..cx.len())
            .flat_map(|i| cx.neighbors(i).iter().map(move |&j| (i, j as usize)))
            .filter(|&(i, j)| i == j || !cx.neighbors(j).contains(&(i as u32)))
            .count() as u64;
    }
    Ok((
        pass_if(bad == 0 && euler_bad == 0 && asym == 0),
        format!(
            "{bad} of {triangles} triangles with a nucleus inside the circumcircle; Euler failures {euler_bad}/{sets}; asymmetric adjacencies {asym}"
        ),
        "0 violations".into(),
    ))
}

fn arm_oracle(instances: u64, stream: &SeedPath) -> Result<(Verdict, String, String)> {
    let (mut agree, mut total, mut mutant_caught) = (0u64, 0u64, 0u64);
    for i in 0..instances {
        let inst = random_arm_instance(stream, i, 25)?;
        let cx = build_complex(&inst.points)?;
        let g = RegionGraph::new_unchecked(&cx, &inst.region)?;
        let b = BruteRegion::new(&inst.points.points, inst.points.window.rect(), &inst.region);
        for j in 1..=4u32 {
            let truth = b.arms(&inst.coloring, j);
            total += 1;
            agree += u64::from(arms_on(&g, &inst.coloring, j) == truth);
            if j >= 2 {
                mutant_caught += u64::from(arms_on_shifted(&g, &inst.coloring, j, 1) != truth);
            }
        }
    }
    Ok((
        pass_if(agree == total && mutant_caught > 0),
        format!(
            "{agree}/{total} agree over {instances} instances (four region kinds, j=1..4); off-by-one mutant disagrees {mutant_caught} times"
        ),
        "100% agreement; mutant caught".into(),
    ))
}

fn pivotal_oracle(instances: u64, stream: &SeedPath) -> Result<(Verdict, String, String)> {
    let window = Window::new(-3.0, -3.0, 3.0, 3.0)?;
    let square = Rect::new(-1.0, -1.0, 1.0, 1.0);
    let (mut agree, mut done, mut pivotal, mut k) = (0u64, 0u64, 0u64, 0u64);
    while done < instances {
        let s = stream.child(k);
        k += 1;
        let points = sample_poisson(window, 0.3, &s.child(0))?;
        if !(4..=12).contains(&points.len()) {
            continue;
        }
        let Ok(cx) = build_complex(&points) else { continue };
        let inner = match k % 4 {
            0 => EventSpec::cross(RegionSpec::rectangle(Point::default(), 2.0, 1.5)),
            1 => EventSpec::arms(RegionSpec::annulus(Point::default(), 0.5, 2.5), 2),
            2 => EventSpec::arms(RegionSpec::annulus(Point::default(), 0.5, 2.5), 3),
            _ => EventSpec::arms(RegionSpec::annulus(Point::default(), 0.0, 2.0), 1),
        };
        let ev = PreparedEvent::new(&cx, &points, &inner, SafeZone::Skip)?;
        let coloring = Coloring::sample(points.len(), 0.5, &s.child(1))?;
        let d = cells_with_nucleus_in(&cx, &square);
        let fast = ev.pivotal_under(&coloring, &d, K_MAX)?;
        let mut err = None;
        let brute = brute_pivotal(&coloring, &d, |c| {
            ev.holds(c).unwrap_or_else(|e| {
                err = Some(e);
                false
            })
        });
        if let Some(e) = err {
            return Err(e);
        }
        done += 1;
        agree += u64::from(fast == brute);
        pivotal += u64::from(brute);
    }
    Ok((
        pass_if(agree == done),
        format!("{agree}/{done} agree ({pivotal} pivotal)"),
        "100% agreement".into(),
    ))
}

fn crossing(budget: &[(f64, u64)], stream: &SeedPath, workers: usize) -> Result<(Verdict, String, String)> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, &(r, n)) in budget.iter().enumerate() {
        let specs = vec![
            EventSpec::cross(RegionSpec::rectangle(Point::default(), r, r)),
            EventSpec::cross(RegionSpec::rectangle(Point::default(), 2.0 * r, r)),
        ];
        let model = SpecModel::new(specs, 1.0, 0.5)?;
        let run = run_annealed(&model, n, &stream.child(k as u64), workers)?;
        let (sq, long) = (run.estimates[0], run.estimates[1]);
        let sigma = (0.25 / run.kept as f64).sqrt();
        let z = (sq.value - 0.5) / sigma;
        ok &= z.abs() <= 3.0 && long.value > 0.05 && long.value < 0.95;
        parts.push(format!(
            "R={r}: P[Cross(R,R)]={:.4} (z={z:+.2}), P[Cross(2R,R)]={:.4}, n={}",
            sq.value, long.value, run.kept
        ));
    }
    Ok((pass_if(ok), parts.join("; "), "|z| <= 3 and long crossing in (0.05, 0.95)".into()))
}

/// Annealed arm probabilities at every scale, shared by the exponent and
/// quasi-multiplicativity criteria.
struct ArmRuns {
    scales: Vec<f64>,
    /// Per scale: the estimates of [`arm_events`] in order.
    estimates: Vec<Vec<Estimate>>,
    kept: Vec<u64>,
}

const QM_JS: [u32; 3] = [1, 2, 4];

/// Events at scale `R`: half-plane 2 and 3 arms, plane 5 arms from radius
/// 4, plane 1, 2, 4 arms from 4 and, at `R = 64`, from 16.
fn arm_events(big_r: f64) -> Vec<EventSpec> {
    let c = Point::default();
    let half = |j| {
        EventSpec::arms(
            RegionSpec::HalfPlaneAnnulus {
                center: c,
                r: 4.0,
                big_r,
                orientation: 0,
            },
            j,
        )
    };
    let mut v = vec![half(2), half(3), EventSpec::arms(RegionSpec::annulus(c, 4.0, big_r), 5)];
    v.extend(QM_JS.iter().map(|&j| EventSpec::arms(RegionSpec::annulus(c, 4.0, big_r), j)));
    if big_r == 64.0 {
        v.extend(QM_JS.iter().map(|&j| EventSpec::arms(RegionSpec::annulus(c, 16.0, 64.0), j)));
    }
    v
}

fn arm_runs(budget: &[(f64, u64)], stream: &SeedPath, workers: usize) -> Result<ArmRuns> {
    let mut out = ArmRuns {
        scales: Vec::new(),
        estimates: Vec::new(),
        kept: Vec::new(),
    };
    for (k, &(r, n)) in budget.iter().enumerate() {
        let model = SpecModel::new(arm_events(r), 1.0, 0.5)?;
        let run = run_annealed(&model, n, &stream.child(k as u64), workers)?;
        out.scales.push(r);
        out.estimates.push(run.estimates);
        out.kept.push(run.kept);
    }
    Ok(out)
}

fn exponents(a: &ArmRuns) -> (Verdict, String, String) {
    let families = [("alpha2+", 0usize, 1.0, 0.3), ("alpha3+", 1, 2.0, 0.4), ("alpha5", 2, 2.0, 0.4)];
    let mut verdict = Verdict::Pass;
    let mut parts = Vec::new();
    for (name, idx, target, tol) in families {
        // Trailing scales without successes are dropped.
        let mut scales = a.scales.clone();
        let mut ests: Vec<Estimate> = a.estimates.iter().map(|e| e[idx]).collect();
        while ests.last().is_some_and(|e| e.value == 0.0) {
            ests.pop();
            scales.pop();
        }
        let dropped = a.scales.len() - scales.len();
        match fit_exponent_from(4.0, &scales, &ests) {
            Ok(fit) => {
                let dev = (fit.slope - target).abs();
                let v = if dev <= tol {
                    Verdict::Pass
                } else if dev <= 2.0 * tol {
                    Verdict::Warn
                } else {
                    Verdict::Fail
                };
                verdict = verdict.max(v);
                let probs: Vec<String> = ests.iter().map(|e| format!("{:.2e}", e.value)).collect();
                parts.push(format!(
                    "{name} slope {:.3} +- {:.3} (target {target} +- {tol}; probs [{}]{})",
                    fit.slope,
                    fit.slope_sampling_error,
                    probs.join(", "),
                    if dropped > 0 {
                        format!("; {dropped} scale(s) without successes dropped")
                    } else {
                        String::new()
                    }
                ));
            }
            Err(e) => {
                verdict = Verdict::Fail;
                parts.push(format!("{name}: {e}"));
            }
        }
    }
    let scales: Vec<String> = a.scales.iter().zip(&a.kept).map(|(s, n)| format!("{s}x{n}")).collect();
    parts.push(format!("r=4, R x replicates: {}", scales.join(", ")));
    (
        verdict,
        parts.join("; "),
        "warn outside tolerance, fail outside twice the tolerance".into(),
    )
}

fn quasi_multiplicativity(a: &ArmRuns) -> (Verdict, String, String) {
    let (Some(i16), Some(i64)) = (a.scales.iter().position(|&s| s == 16.0), a.scales.iter().position(|&s| s == 64.0))
    else {
        return (Verdict::Fail, "scales 16 and 64 are not both in the suite".into(), "-".into());
    };
    let c = 20f64;
    let mut verdict = Verdict::Pass;
    let mut parts = Vec::new();
    for (q, &j) in QM_JS.iter().enumerate() {
        let a13 = a.estimates[i64][3 + q];
        let a12 = a.estimates[i16][3 + q];
        let a23 = a.estimates[i64][6 + q];
        if a13.value == 0.0 || a12.value == 0.0 || a23.value == 0.0 {
            verdict = Verdict::Fail;
            parts.push(format!("j={j}: an estimate has no successes"));
            continue;
        }
        let ratio = a13.value / (a12.value * a23.value);
        // Delta-method standard error of the log ratio.
        let sl = [a13, a12, a23]
            .iter()
            .map(|e| (e.std_error / e.value).powi(2))
            .sum::<f64>()
            .sqrt();
        let (lo, hi) = ((ratio.ln() - 3.0 * sl).exp(), (ratio.ln() + 3.0 * sl).exp());
        let ok = hi >= 1.0 / c && lo <= c;
        if !ok {
            verdict = Verdict::Fail;
        }
        parts.push(format!("j={j}: ratio {ratio:.3} (3-sigma range {lo:.3}..{hi:.3})"));
    }
    (verdict, parts.join("; "), "ratio range meets [1/20, 20] at (4, 16, 64)".into())
}

fn efron_stein(km: u64, stream: &SeedPath, workers: usize) -> Result<(Verdict, String, String)> {
    let c = Point::default();
    let events = [
        ("Cross(8,8)", EventSpec::cross(RegionSpec::square(c, 8.0))),
        ("A1(2,8)", EventSpec::arms(RegionSpec::annulus(c, 2.0, 8.0), 1)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (k, (name, spec)) in events.iter().enumerate() {
        let params = McParams::new(1.0, 0.5, stream.child(k as u64)).with_workers(workers);
        let es = efron_stein_sides(spec, 2.0, &params, km, km)?;
        let slack = 3.0 * es.lhs.std_error.hypot(es.rhs.std_error);
        ok &= es.lhs.value <= es.rhs.value + slack;
        parts.push(format!(
            "{name}: lhs {:.3e} +- {:.1e}, rhs {:.3e} +- {:.1e}",
            es.lhs.value, es.lhs.std_error, es.rhs.value, es.rhs.std_error
        ));
    }
    parts.push(format!("rho=2, K=M={km}"));
    Ok((pass_if(ok), parts.join("; "), "lhs <= rhs + 3 sigma".into()))
}

fn jensen(km: u64, stream: &SeedPath, workers: usize) -> Result<(Verdict, String, String)> {
    let c = Point::default();
    let specs = vec![
        EventSpec::arms(RegionSpec::annulus(c, 4.0, 64.0), 1),
        EventSpec::arms(RegionSpec::annulus(c, 4.0, 64.0), 4),
    ];
    let model = SpecModel::new(specs, 1.0, 0.5)?;
    let run = run_quenched(&model, km, km, stream, workers)?;
    let mut jensen_ok = true;
    let mut ratio_ok = true;
    let mut parts = Vec::new();
    for (j, q) in [1, 4].iter().zip(&run.moments) {
        let slack = 3.0 * q.second_moment.std_error.hypot(q.annealed_square.std_error);
        jensen_ok &= q.second_moment.value >= q.annealed_square.value - slack;
        let ratio = q.moment_ratio();
        ratio_ok &= ratio <= 5.0;
        parts.push(format!(
            "j={j}: second moment {:.3e}, annealed square {:.3e}, ratio {ratio:.3}",
            q.second_moment.value, q.annealed_square.value
        ));
    }
    parts.push(format!("(r,R)=(4,64), K=M={km}"));
    let verdict = if !jensen_ok {
        Verdict::Fail
    } else if !ratio_ok {
        Verdict::Warn
    } else {
        Verdict::Pass
    };
    Ok((
        verdict,
        parts.join("; "),
        "second moment >= annealed square - 3 sigma (hard); ratio <= 5 (soft)".into(),
    ))
}

fn variance_bound(budget: &[(f64, u64)], stream: &SeedPath, workers: usize) -> Result<(Verdict, String, String)> {
    let c = Point::default();
    let mut rows: Vec<(f64, QuenchedMoments, QuenchedMoments)> = Vec::new();
    for (k, &(r, km)) in budget.iter().enumerate() {
        let specs = vec![
            EventSpec::cross(RegionSpec::square(c, r)),
            EventSpec::arms(RegionSpec::annulus(c, 1.0, r), 4),
        ];
        let model = SpecModel::new(specs, 1.0, 0.5)?;
        let mut run = run_quenched(&model, km, km, &stream.child(k as u64), workers)?;
        let arm = run.moments.pop().expect("two events");
        let cross = run.moments.pop().expect("two events");
        rows.push((r, cross, arm));
    }
    let scale = |r: f64, arm: &QuenchedMoments| r * r * arm.mean_q.value.powi(2);
    let (r0, cross0, arm0) = &rows[0];
    let c_fit = cross0.variance.value / scale(*r0, arm0);
    if !(c_fit.is_finite() && c_fit > 0.0) {
        return Ok((
            Verdict::Fail,
            format!("C not fitted at R={r0}: variance {:.3e}, alpha4 {:.3e}", cross0.variance.value, arm0.mean_q.value),
            "-".into(),
        ));
    }
    let mut ok = true;
    let mut parts = vec![format!("C={c_fit:.3e} from R={r0}")];
    for (r, cross, arm) in &rows[1..] {
        let bound = 3.0 * c_fit * scale(*r, arm);
        ok &= cross.variance.value <= bound;
        parts.push(format!(
            "R={r}: Var {:.3e} +- {:.1e} vs 3C R^2 alpha4^2 = {bound:.3e} (alpha4 {:.3e})",
            cross.variance.value, cross.variance.std_error, arm.mean_q.value
        ));
    }
    Ok((pass_if(ok), parts.join("; "), "Var <= 3 C R^2 alpha4(1,R)^2".into()))
}

fn dense(envs: u64, stream: &SeedPath, workers: usize) -> Result<(Verdict, String, String)> {
    let (big_r, delta) = (40.0, 0.2);
    let params = McParams::new(1.0, 0.5, *stream).with_workers(workers);
    let e = estimate_not_dense(big_r, delta, &params, envs)?;
    let bound = dense_failure_bound(big_r, delta, 10.0);
    Ok((
        pass_if(e.value <= bound),
        format!("P[not Dense_0.2(B_40)] = {:.3e} over {} environments", e.value, e.n),
        format!("10 delta^-2 exp(-(delta R)^2/2) = {bound:.3e}"),
    ))
}

fn theta(replicates: u64, stream: &SeedPath, workers: usize) -> Result<(Verdict, String, String)> {
    let ps = [0.52, 0.54, 0.56, 0.58, 0.60];
    let params = McParams::new(1.0, 0.5, *stream).with_workers(workers);
    let (ests, _) = estimate_theta_scan(&ps, 64.0, &params, replicates)?;
    let positive = ests.iter().all(|e| e.value > 0.0);
    let monotone = nondecreasing_within(&ests, 3.0);
    let vals: Vec<String> = ps.iter().zip(&ests).map(|(p, e)| format!("{p}: {:.4}", e.value)).collect();
    Ok((
        pass_if(positive && monotone),
        format!("theta(p, 64) = {} (n={})", vals.join(", "), ests[0].n),
        "all > 0, nondecreasing within 3 sigma".into(),
    ))
}

fn determinism(replicates: u64) -> Result<(Verdict, String, String)> {
    let cfg = |experiment: &str, workers: usize| -> Result<ExperimentConfig> {
        let v = match experiment {
            "cross-prob" => serde_json::json!({
                "experiment": "cross-prob",
                "master_seed": 12,
                "geometry": {"scales": [6, 10], "aspects": [1, 2]},
                "budget": {"replicates": replicates},
                "workers": workers,
            }),
            _ => serde_json::json!({
                "experiment": "quenched-moments",
                "master_seed": 12,
                "geometry": {"events": [
                    {"kind": "arms", "region": {"kind": "annulus", "r": 1, "R": 6}, "j": 2},
                    {"kind": "cross", "region": {"kind": "rectangle", "lambda1": 6, "lambda2": 3}}
                ]},
                "budget": {"K": 20, "M": 20},
                "workers": workers,
            }),
        };
        ExperimentConfig::from_value(v).map_err(|e| Error::Parameter {
            name: e.path,
            reason: e.message,
        })
    };
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["cross-prob", "quenched-moments"] {
        let runs = [1usize, 1, 8]
            .iter()
            .map(|&w| run(&cfg(name, w)?).map_err(|e| Error::DegenerateGeometry(e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        let csv: Vec<String> = runs.iter().map(|r| r.to_csv()).collect();
        let same = csv[0] == csv[1] && csv[0] == csv[2] && runs[0].rows == runs[2].rows;
        ok &= same;
        parts.push(format!(
            "{name}: repeat {} / workers 1 vs 8 {}",
            if csv[0] == csv[1] { "identical" } else { "DIFFERENT" },
            if csv[0] == csv[2] { "identical" } else { "DIFFERENT" }
        ));
    }
    Ok((pass_if(ok), parts.join("; "), "byte-identical outputs".into()))
}
