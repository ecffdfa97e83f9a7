//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
//! if any criterion fails. Every tolerance and runtime budget is pinned below.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use synlat::dynamics::{integrate, integrate_many, Frame, Scenario, TimeGrid};
use synlat::filter::{cascade_metrics, filter_metrics, gamma_for_target, max_absorption_frequency, FilterStage};
use synlat::lattice::{AuxCavities, InputPulse, LatticeConfig, LossModel, PhaseSchedule};
use synlat::memory::{run_memory, MemoryOptions, MemoryPlan, MemoryReport, MemoryVariant};
use synlat::params::CavitySpec;
use synlat::spectrum::{
    filter_response, filter_response_on, group_velocity_at_frequency, reflection, ring_dispersion, ring_eigenvalues,
    FrequencyGrid, ResponseOptions, Termination,
};
use synlat::Result;

const KAPPA: f64 = 1.0;
const PORT: f64 = 4.0;
const T_P: f64 = 2.5;
const T_IO: f64 = 20.0;
const T_S: f64 = 10.0;

struct Line {
    id: u32,
    name: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

fn run(id: u32, name: &'static str, budget_secs: f64, f: impl FnOnce() -> Result<(bool, String)>) -> Line {
    let start = Instant::now();
    let (pass, detail) = match f() {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let elapsed = start.elapsed();
    let budget = Duration::from_secs_f64(budget_secs);
    Line {
        id,
        name,
        pass: pass && elapsed <= budget,
        detail,
        elapsed,
        budget,
    }
}

fn gaussian_input() -> InputPulse<f64> {
    InputPulse::gaussian(1.0, T_P, 0.0, T_IO / 2.0).unwrap()
}

fn memory_run(plan: &MemoryPlan<f64>, losses: &LossModel<f64>, dt: f64) -> Result<MemoryReport<f64>> {
    let end = plan.nominal_end(T_P);
    let lattice = plan.lattice(end, KAPPA, 0.0)?;
    let opts = MemoryOptions {
        dt: Some(dt),
        ..Default::default()
    };
    run_memory(plan, &lattice, losses, &gaussian_input(), &opts)
}

fn fig4c_losses() -> LossModel<f64> {
    LossModel::new(PORT, 0.0, 0.2 * KAPPA, 1.0, 0.01 * KAPPA).unwrap()
}

fn fig6_intrinsic() -> LossModel<f64> {
    LossModel::new(0.0, 0.0, 0.1 * KAPPA, 1.0, 0.1 * KAPPA).unwrap()
}

fn c1_dispersion() -> Result<(bool, String)> {
    let mut worst: f64 = 0.0;
    for phi in [0.0, FRAC_PI_4, FRAC_PI_2] {
        let num = ring_eigenvalues(64, KAPPA, 0.0, phi, AuxCavities::Single)?;
        let exact = ring_dispersion(64, KAPPA, 0.0, phi, AuxCavities::Single);
        for (a, b) in num.iter().zip(&exact) {
            // relative to the band half-width, since the band crosses zero
            worst = worst.max((a - b).abs() / (2.0 * KAPPA));
        }
    }
    Ok((worst < 1e-10, format!("max relative error {worst:.2e} (limit 1e-10)")))
}

fn c2_group_velocity() -> Result<(bool, String)> {
    let v = |off: f64| group_velocity_at_frequency(off, KAPPA, 0.0, AuxCavities::Single, 0.0);
    let (vb, vc) = (v(-1.1 * KAPPA)?, v(-1.8 * KAPPA)?);
    let derived_ok = (vb - 1.670).abs() < 5e-4 && (vc - 0.872).abs() < 5e-4;
    let eb = (vb - 1.65).abs() / 1.65;
    let ec = (vc - 0.9).abs() / 0.9;
    Ok((
        derived_ok && eb < 0.03 && ec < 0.03,
        format!(
            "v(w0-1.1k) = {vb:.4} (vs 1.65: {:.2}%), v(w0-1.8k) = {vc:.4} (vs 0.9: {:.2}%), limit 3%",
            100.0 * eb,
            100.0 * ec
        ),
    ))
}

fn c3_lossless_memory(reports: &mut Vec<MemoryReport<f64>>) -> Result<(bool, String)> {
    let plans: Vec<MemoryPlan<f64>> = [0.5, 1.0, 2.0]
        .iter()
        .map(|&r| MemoryPlan::new(MemoryVariant::PresetEcho, T_IO, T_S, r))
        .collect::<Result<_>>()?;
    let results: Vec<Result<MemoryReport<f64>>> = std::thread::scope(|s| {
        let handles: Vec<_> = plans
            .iter()
            .map(|p| s.spawn(move || memory_run(p, &LossModel::port_only(PORT), 0.01)))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut pass = true;
    let mut parts = Vec::new();
    for (plan, r) in plans.iter().zip(results) {
        let r = r?;
        let ideal = plan.tau();
        let delay_err = (r.delay - ideal).abs() / ideal;
        pass &= r.efficiency >= 0.99 && r.fidelity >= 0.99 && delay_err < 0.05 && r.valid;
        parts.push(format!(
            "r={}: eta={:.5} F={:.5} tau={:.3} ({:.2}%)",
            plan.ramp,
            r.efficiency,
            r.fidelity,
            r.delay,
            100.0 * delay_err
        ));
        reports.push(r);
    }
    Ok((pass, parts.join("; ")))
}

fn c4_lossy_memory(lossless_eta: f64) -> Result<(bool, String)> {
    let plan = MemoryPlan::new(MemoryVariant::PresetEcho, T_IO, T_S, 1.0)?;
    let losses = fig4c_losses();
    let (a, b) = std::thread::scope(|s| {
        let h1 = s.spawn(|| memory_run(&plan, &losses, 0.01));
        let h2 = s.spawn(|| memory_run(&plan, &losses, 0.005));
        (h1.join().unwrap(), h2.join().unwrap())
    });
    let (a, b) = (a?, b?);
    let diff = (a.efficiency - b.efficiency).abs();
    Ok((
        a.efficiency < lossless_eta && a.fidelity >= 0.98 && diff < 1e-4 && a.valid,
        format!(
            "eta={:.5} (lossless {:.5}) F={:.5} |eta(dt)-eta(dt/2)|={diff:.2e} (limit 1e-4)",
            a.efficiency, lossless_eta, a.fidelity
        ),
    ))
}

fn c5_on_demand() -> Result<(bool, String)> {
    let reports: Vec<Result<MemoryReport<f64>>> = std::thread::scope(|s| {
        let handles: Vec<_> = [5.0, 20.0, 60.0]
            .iter()
            .map(|&ts| {
                s.spawn(move || {
                    let plan = MemoryPlan::new(MemoryVariant::OnDemand, T_IO, ts, 1.0)?;
                    memory_run(&plan, &LossModel::port_only(PORT), 0.01)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let reports: Vec<MemoryReport<f64>> = reports.into_iter().collect::<Result<_>>()?;
    let drift = reports.iter().filter_map(|r| r.freeze_drift).fold(0.0, f64::max);
    let spread = |f: fn(&MemoryReport<f64>) -> f64| {
        let v: Vec<f64> = reports.iter().map(f).collect();
        v.iter().copied().fold(f64::MIN, f64::max) - v.iter().copied().fold(f64::MAX, f64::min)
    };
    let d_eta = spread(|r| r.efficiency);
    let d_f = spread(|r| r.fidelity);
    let valid = reports.iter().all(|r| r.valid);
    Ok((
        drift < 1e-3 && d_eta < 1e-3 && d_f < 1e-3 && valid,
        format!(
            "hold drift {drift:.2e}; eta={:.5} spread {d_eta:.2e}; F={:.5} spread {d_f:.2e} (limits 1e-3)",
            reports[0].efficiency, reports[0].fidelity
        ),
    ))
}

fn ledger_scenario(frame: Frame, dt: f64) -> Result<Scenario<f64>> {
    // lossy echo with all ramp end points on the time grid
    let plan = MemoryPlan::new(MemoryVariant::PresetEcho, T_IO, T_S, 1.0)?;
    let lattice = LatticeConfig::symmetric(80, KAPPA, LAB_OMEGA0, AuxCavities::Single)?;
    let input = InputPulse::gaussian(1.0, T_P, LAB_OMEGA0, T_IO / 2.0)?;
    Scenario::new(
        lattice,
        fig4c_losses(),
        plan.build_schedule()?,
        input,
        TimeGrid::new(0.0, 60.0, dt)?,
    )?
    .with_frame(frame)
}

/// Cavity frequency for the lab-frame ledger run. In the rotating frame the RK4
/// truncation error at dt = 1e-3 is already below round-off, so the order of
/// the scheme is only observable once the fast carrier is integrated explicitly.
const LAB_OMEGA0: f64 = 20.0;

fn c6_ledger() -> Result<(bool, String)> {
    let runs = integrate_many(&[
        ledger_scenario(Frame::Lab, 1e-3)?,
        ledger_scenario(Frame::Lab, 5e-4)?,
        ledger_scenario(Frame::Rotating, 1e-3)?,
    ]);
    let mut it = runs.into_iter();
    let coarse = it.next().unwrap()?.ledger_residual();
    let fine = it.next().unwrap()?.ledger_residual();
    let rotating = it.next().unwrap()?.ledger_residual();
    let ratio = coarse / fine;
    Ok((
        coarse < 1e-6 && rotating < 1e-6 && ratio >= 12.0,
        format!(
            "lab frame: residual {coarse:.2e} at dt=1e-3 (limit 1e-6), {fine:.2e} at dt/2, ratio {ratio:.1} (need >= 12); rotating frame {rotating:.2e}"
        ),
    ))
}

fn c7_time_frequency() -> Result<(bool, String)> {
    let stage = FilterStage::targeting(KAPPA, 0.0, -1.8 * KAPPA, &fig6_intrinsic())?;
    let lattice = stage.lattice(120)?;
    let freqs: Vec<f64> = (0..20).map(|k| -1.9 + 3.8 * k as f64 / 19.0).collect();
    let t_end = 200.0;
    let scenarios: Vec<Scenario<f64>> = freqs
        .iter()
        .map(|&w| {
            Scenario::new(
                lattice.clone(),
                stage.losses.clone(),
                PhaseSchedule::constant(0.0),
                InputPulse::continuous(1.0, w, 0.0, 10.0)?,
                TimeGrid::new(0.0, t_end, 0.01)?,
            )
        })
        .collect::<Result<_>>()?;
    let trajectories = integrate_many(&scenarios);
    let mut worst: f64 = 0.0;
    for (&w, traj) in freqs.iter().zip(trajectories) {
        let traj = traj?;
        // average the power ratio over the last 20 time units
        let from = traj.times.partition_point(|t| *t < t_end - 20.0);
        let ratio: f64 = (from..traj.len())
            .map(|k| traj.output[k].norm_sqr() / traj.input[k].norm_sqr())
            .sum::<f64>()
            / (traj.len() - from) as f64;
        let f = reflection(&lattice, &stage.losses, 0.0, w, Termination::Open).expect("non-singular");
        worst = worst.max((ratio - f).abs());
    }
    Ok((worst < 1e-2, format!("max |f_dyn - f_green| = {worst:.2e} over 20 frequencies (limit 1e-2)")))
}

fn fig6_grid() -> FrequencyGrid<f64> {
    FrequencyGrid::around(0.0, KAPPA)
}

fn c8_hump() -> Result<(bool, String, f64)> {
    let stage = FilterStage::targeting(KAPPA, 0.0, -1.8 * KAPPA, &fig6_intrinsic())?;
    let curve = filter_response(&stage.lattice(32)?, &stage.losses, &fig6_grid(), ResponseOptions::default())?;
    let m = filter_metrics(&curve)?;
    let (pass, detail, hump) = match (m.hump_db, m.minima) {
        (Some(h), Some((a, b))) => (
            h > m.min_db + 1.0,
            format!(
                "gamma={:.4}, minima at {a:.3}, {b:.3} ({:.2} dB), hump {h:.2} dB",
                stage.port_rate(),
                m.min_db
            ),
            h,
        ),
        _ => (false, "no pair of stopband minima".to_string(), f64::NAN),
    };
    Ok((pass && curve.meta.converged, detail, hump))
}

fn c9_cascade(single_hump: f64) -> Result<(bool, String)> {
    let stages = vec![
        FilterStage::targeting(KAPPA, 0.0, -1.8 * KAPPA, &fig6_intrinsic())?,
        FilterStage::targeting(KAPPA, 0.0, -1.1 * KAPPA, &fig6_intrinsic())?,
    ];
    let (_, m) = cascade_metrics(&stages, &fig6_grid())?;
    let suppression = match m.hump_db {
        Some(h) => single_hump - h,
        None => f64::INFINITY,
    };
    Ok((
        (m.shape_factor - 0.85).abs() <= 0.05 && suppression >= 10.0,
        format!(
            "shape factor {:.4} (3 dB {:.4}, 25 dB {:.4}; target 0.85 +/- 0.05), hump suppressed by {suppression:.2} dB (need >= 10)",
            m.shape_factor, m.width_3db, m.width_25db
        ),
    ))
}

fn c10_params() -> Result<(bool, String)> {
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for k in 0..=12 {
        let length = 0.3 + 0.3 * k as f64 / 12.0;
        let bw = CavitySpec::new(length, 0.25)?.bandwidth() / (2.0 * PI) / 1e6;
        lo = lo.min(bw);
        hi = hi.max(bw);
    }
    Ok((
        lo >= 50.0 && hi <= 110.0,
        format!("4kappa spans 2pi x [{lo:.2}, {hi:.2}] MHz (bracket [50, 110])"),
    ))
}

fn symmetric_pulse_scenario(phi: f64, scale: f64) -> Result<Scenario<f64>> {
    Scenario::new(
        LatticeConfig::symmetric(60, KAPPA, 0.0, AuxCavities::Single)?,
        LossModel::port_only(PORT),
        PhaseSchedule::constant(phi),
        InputPulse::gaussian(scale, T_P, 0.0, 10.0)?,
        TimeGrid::new(0.0, 25.0, 0.01)?,
    )
    .map(|s| s.with_snapshot_every(500))
}

fn c11_properties(echo_reports: &[MemoryReport<f64>]) -> Result<(bool, String)> {
    let mut parts = Vec::new();
    let mut pass = true;

    // gauge invariance: a constant phase leaves populations and the output unchanged
    let a = integrate(&symmetric_pulse_scenario(0.0, 1.0)?)?;
    let b = integrate(&symmetric_pulse_scenario(0.7, 1.0)?)?;
    let pop_gap = a
        .final_state
        .amplitudes
        .iter()
        .zip(&b.final_state.amplitudes)
        .map(|(x, y)| (x.norm_sqr() - y.norm_sqr()).abs())
        .fold(0.0, f64::max);
    let out_gap = a.output.iter().zip(&b.output).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let ok = pop_gap < 1e-12 && out_gap < 1e-12;
    pass &= ok;
    parts.push(format!("gauge {pop_gap:.1e}/{out_gap:.1e}"));

    // mirror symmetry: at phi = 0 the populations are even in j
    let n = a.final_state.amplitudes.len();
    let pops = a.final_state.populations();
    let mirror = (0..n).map(|i| (pops[i] - pops[n - 1 - i]).abs()).fold(0.0, f64::max);
    let echo = echo_reports.iter().filter_map(|r| r.echo_drift).fold(0.0, f64::max);
    let ok = mirror < 1e-12 && echo < 1e-3 && echo_reports.len() == 3;
    pass &= ok;
    parts.push(format!("mirror {mirror:.1e}, echo drift {echo:.2e}"));

    // linearity: doubling the input doubles every amplitude
    let c = integrate(&symmetric_pulse_scenario(0.0, 2.0)?)?;
    let lin = a
        .output
        .iter()
        .zip(&c.output)
        .map(|(x, y)| (*x * 2.0 - y).norm())
        .fold(0.0, f64::max);
    let plan = MemoryPlan::new(MemoryVariant::PresetEcho, T_IO, T_S, 1.0)?;
    let lattice = plan.lattice(plan.nominal_end(T_P), KAPPA, 0.0)?;
    let f1 = run_memory(&plan, &lattice, &LossModel::port_only(PORT), &gaussian_input(), &Default::default())?;
    let f3 = run_memory(
        &plan,
        &lattice,
        &LossModel::port_only(PORT),
        &gaussian_input().scaled(3.0),
        &Default::default(),
    )?;
    let df = (f1.fidelity - f3.fidelity).abs();
    let ok = lin < 1e-12 && df < 1e-12;
    pass &= ok;
    parts.push(format!("linearity {lin:.1e}, F rescale {df:.1e}"));

    // loss scaling: uniform extra loss C multiplies eta by exp(-C tau)
    let eta0 = f1.efficiency;
    let mut worst: f64 = 0.0;
    for extra in [0.01, 0.02] {
        let r = run_memory(
            &plan,
            &lattice,
            &LossModel::port_only(PORT).with_extra_uniform(extra),
            &gaussian_input(),
            &Default::default(),
        )?;
        let predicted = eta0 * (-extra * plan.tau()).exp();
        worst = worst.max((r.efficiency - predicted).abs() / predicted);
    }
    let ok = worst < 0.05;
    pass &= ok;
    parts.push(format!("loss scaling {:.2}%", 100.0 * worst));

    // filter symmetry: f(w0 + d) = f(w0 - d) for symmetric losses
    let stage = FilterStage::targeting(KAPPA, 0.3, 0.3 - 1.8 * KAPPA, &fig6_intrinsic())?;
    let curve = stage.response(&FrequencyGrid::new(0.3 - 3.0, 0.3 + 3.0, 601)?)?;
    let m = curve.f.len();
    let asym = (0..m).map(|i| (curve.f[i] - curve.f[m - 1 - i]).abs()).fold(0.0, f64::max);
    let ok = asym < 1e-9;
    pass &= ok;
    parts.push(format!("filter symmetry {asym:.1e}"));

    // condition consistency: with little intrinsic loss the deepest point sits at the predicted frequency
    let small = LossModel::new(0.0, 0.0, 0.0, 1.0, 1e-3 * KAPPA)?;
    let stage = FilterStage::targeting(KAPPA, 0.0, -1.5 * KAPPA, &small)?;
    let grid = FrequencyGrid::new(-2.0, 0.0, 401)?;
    // uniform loss only, so matched ends represent the unbounded lattice exactly
    let lat = stage.lattice(64)?;
    let curve = filter_response_on(&lat, &stage.losses, &grid, 0.0, Termination::Matched)?;
    let (imin, _) = curve
        .f
        .iter()
        .enumerate()
        .fold((0, f64::MAX), |acc, (i, v)| if *v < acc.1 { (i, *v) } else { acc });
    let predicted = max_absorption_frequency(&stage)?.0;
    let miss = (curve.omega[imin] - predicted).abs();
    let ok = miss <= grid.step();
    pass &= ok;
    parts.push(format!("argmin offset {miss:.1e} (step {:.1e})", grid.step()));

    let g = gamma_for_target(-1.8, KAPPA, 0.0)?;
    parts.push(format!("gamma(w0-1.8k) = {g:.4}"));
    Ok((pass, parts.join("; ")))
}

fn main() -> ExitCode {
    let suite = Instant::now();
    let mut lines = Vec::new();
    lines.push(run(1, "dispersion oracle", 1.0, c1_dispersion));
    lines.push(run(2, "group-velocity values", 0.1, c2_group_velocity));

    let mut echo_reports = Vec::new();
    lines.push(run(3, "lossless memory", 10.0, || c3_lossless_memory(&mut echo_reports)));
    let lossless_eta = echo_reports
        .iter()
        .find(|r| r.efficiency.is_finite())
        .map_or(f64::NAN, |r| r.efficiency);
    lines.push(run(4, "lossy memory", 10.0, || c4_lossy_memory(lossless_eta)));
    lines.push(run(5, "on-demand freeze", 20.0, c5_on_demand));
    lines.push(run(6, "flux ledger and integrator order", 5.0, c6_ledger));
    lines.push(run(7, "time/frequency equivalence", 30.0, c7_time_frequency));

    let mut single_hump = f64::NAN;
    lines.push(run(8, "filter hump", 5.0, || {
        let (pass, detail, hump) = c8_hump()?;
        single_hump = hump;
        Ok((pass, detail))
    }));
    lines.push(run(9, "two-stage shape factor", 5.0, || c9_cascade(single_hump)));
    lines.push(run(10, "physical parameters", 0.1, c10_params));
    lines.push(run(11, "property suite", 60.0, || c11_properties(&echo_reports)));

    let mut failed = 0;
    for l in &lines {
        if !l.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2}. {} ({:.2} s, budget {:.1} s): {}",
            if l.pass { "PASS" } else { "FAIL" },
            l.id,
            l.name,
            l.elapsed.as_secs_f64(),
            l.budget.as_secs_f64(),
            l.detail
        );
    }
    println!(
        "acceptance: {} passed, {} failed in {:.1} s",
        lines.len() - failed,
        failed,
        suite.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
