//! Acceptance gate: one test per exit criterion, each printing a single
//! PASS/FAIL line (plus per-clause details for the end-to-end runs).
//!
//! Oracles here are independent of the library path they certify: direct
//! transform summation, fixed-step Runge-Kutta integration, and central
//! finite differences of the objective.

use hgoct::functional::{
    adjoint_source, chi_terminal, evaluate_terms, gradient_spectrum, projected_expectation_signal,
};
use hgoct::optimizer::{optimize, optimize_from, OptimizationState, RelaxationConfig};
use hgoct::problems::{
    build_11ls_sized, build_coulomb, build_hcl_sized, build_tls, build_tls_sized, morse_potential,
};
use hgoct::quantum::{
    propagate_backward_inhomogeneous, propagate_forward, ControlField, HamiltonianModel,
    SourceTerm, StateVector, TimeGrid,
};
use hgoct::spectral::{
    frequency, CosineTransform, Spectrum, SpectrumInterpolant, TimeSignal,
};
use hgoct::Complex;

// ---------------------------------------------------------------------------
// shared helpers

fn lcg(seed: &mut u64) -> f64 {
    *seed = seed
        .wrapping_mul(6364136223846793005)
        .wrapping_add(1442695040888963407);
    ((*seed >> 11) as f64) / ((1u64 << 53) as f64)
}

fn report(criterion: &str, pass: bool, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion}: {verdict} — {detail}");
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// Largest |spectrum| over bins with frequency in [lo, hi].
fn band_max(spec: &Spectrum<f64>, tgrid: &TimeGrid<f64>, lo: f64, hi: f64) -> f64 {
    spec.values
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let w = frequency(tgrid, *k);
            w >= lo && w <= hi
        })
        .fold(0.0f64, |m, (_, &v)| m.max(v.abs()))
}

/// Largest |spectrum| over bins with frequency outside [lo, hi].
fn outside_band_max(spec: &Spectrum<f64>, tgrid: &TimeGrid<f64>, lo: f64, hi: f64) -> f64 {
    spec.values
        .iter()
        .enumerate()
        .filter(|(k, _)| {
            let w = frequency(tgrid, *k);
            w < lo || w > hi
        })
        .fold(0.0f64, |m, (_, &v)| m.max(v.abs()))
}

fn dipole_spectrum(
    problem: &hgoct::problems::ProblemSpec<f64>,
    traj: &hgoct::quantum::Trajectory<f64>,
    ct: &CosineTransform<f64>,
) -> Spectrum<f64> {
    let signal = projected_expectation_signal(traj, &problem.weights).unwrap();
    ct.forward(&signal).unwrap()
}

fn initial_trajectory(
    problem: &hgoct::problems::ProblemSpec<f64>,
    tol: f64,
) -> hgoct::quantum::Trajectory<f64> {
    let interp = SpectrumInterpolant::new(&problem.initial_spectrum, &problem.tgrid);
    propagate_forward(&problem.model, &interp, &problem.psi0, &problem.tgrid, tol).unwrap()
}

// ---------------------------------------------------------------------------
// 1. eigenstructure anchors

#[test]
fn criterion_1_eigenstructure_anchors() {
    let coulomb = build_coulomb::<f64>().unwrap();
    let e = |n: usize| coulomb.eigenpairs[n].0;
    let gap10 = e(1) - e(0);
    let gap50 = e(5) - e(0);

    let hcl = build_hcl_sized::<f64>(2000.0, 256).unwrap();
    let h = |n: usize| hcl.eigenpairs[n].0;
    let gap20 = h(2) - h(0);
    // Bottom-of-well curvature by central differences of the potential.
    let (d0, a, mass): (f64, f64, f64) = (0.171, 0.975, 1785.0);
    let dx = 1e-4;
    let v2 = (morse_potential(dx, d0, a) - 2.0 * morse_potential(0.0, d0, a)
        + morse_potential(-dx, d0, a))
        / (dx * dx);
    let omega0 = (v2 / mass).sqrt();

    let tls = build_tls::<f64>();
    let tls_gap = tls.eigenpairs[1].0 - tls.eigenpairs[0].0;

    let ok = (gap10 - 0.395).abs() <= 0.01
        && (gap50 - 0.624).abs() <= 0.01
        && (gap20 - 2.54e-2).abs() <= 2e-4
        && (omega0 - 1.35e-2).abs() <= 1e-4
        && tls_gap == 3.0;
    report(
        "1 (eigenstructure anchors)",
        ok,
        &format!(
            "coulomb gaps {gap10:.4}/{gap50:.4}, hcl gap {gap20:.4e}, well frequency {omega0:.4e}, tls gap {tls_gap}"
        ),
    );
}

// ---------------------------------------------------------------------------
// 2. transform suite

#[test]
fn criterion_2_transform_suite() {
    let mut seed = 7u64;
    let mut worst_round = 0.0f64;
    let mut worst_lin = 0.0f64;
    let mut worst_direct = 0.0f64;
    for &n_t in &[256usize, 1024, 4096] {
        let tgrid = TimeGrid::new(100.0, n_t);
        let ct = CosineTransform::new(&tgrid);
        let random_signal = |seed: &mut u64| {
            TimeSignal::new((0..n_t).map(|_| 2.0 * lcg(seed) - 1.0).collect())
        };
        for rep in 0..100 {
            let s = random_signal(&mut seed);
            let spec = ct.forward(&s).unwrap();
            let back = ct.inverse(&spec).unwrap();
            let max = s.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
            let err = s
                .values
                .iter()
                .zip(&back.values)
                .fold(0.0f64, |m, (&a, &b)| m.max((a - b).abs()));
            worst_round = worst_round.max(err / max);

            if rep < 3 {
                // Direct O(N^2) summation oracle.
                let dt = tgrid.dt();
                let scale = (2.0 / std::f64::consts::PI).sqrt() * dt;
                let spec_max = spec.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
                for k in (0..n_t).step_by(n_t / 64) {
                    let w = frequency(&tgrid, k);
                    let direct: f64 = s
                        .values
                        .iter()
                        .enumerate()
                        .map(|(j, &v)| v * (w * tgrid.node(j)).cos())
                        .sum::<f64>()
                        * scale;
                    worst_direct =
                        worst_direct.max((direct - spec.values[k]).abs() / spec_max);
                }
            }
        }
        // Linearity on a fresh pair.
        let f = random_signal(&mut seed);
        let g = random_signal(&mut seed);
        let (a, b) = (1.7, -0.3);
        let combo = TimeSignal::new(
            f.values
                .iter()
                .zip(&g.values)
                .map(|(&x, &y)| a * x + b * y)
                .collect(),
        );
        let lhs = ct.forward(&combo).unwrap();
        let ff = ct.forward(&f).unwrap();
        let gg = ct.forward(&g).unwrap();
        let max = lhs.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
        for k in 0..n_t {
            let rhs = a * ff.values[k] + b * gg.values[k];
            worst_lin = worst_lin.max((lhs.values[k] - rhs).abs() / max);
        }
    }
    let ok = worst_round <= 1e-12 && worst_lin <= 1e-13 && worst_direct <= 1e-12;
    report(
        "2 (transform suite)",
        ok,
        &format!(
            "roundtrip {worst_round:.2e} (≤1e-12), linearity {worst_lin:.2e} (≤1e-13), direct sum {worst_direct:.2e} (≤1e-12)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 3. propagation suite

/// Fixed-step RK4 for `dv/dt = -i H(t) v + G(t)` (G optional), independent
/// of the production stepper.
fn rk4_drive(
    model: &HamiltonianModel<f64>,
    field: &dyn Fn(f64) -> f64,
    source: Option<&dyn Fn(f64) -> Vec<Complex<f64>>>,
    v0: &[Complex<f64>],
    t0: f64,
    t1: f64,
    steps: usize,
) -> Vec<Complex<f64>> {
    let dim = v0.len();
    let h = (t1 - t0) / steps as f64;
    let mut scratch = vec![Complex::new(0.0, 0.0); dim];
    let mut rhs = |t: f64, v: &[Complex<f64>]| -> Vec<Complex<f64>> {
        let mut out = vec![Complex::new(0.0, 0.0); dim];
        model.apply_h_to(field(t), v, &mut out, &mut scratch);
        let minus_i = Complex::new(0.0, -1.0);
        let mut d: Vec<Complex<f64>> = out.iter().map(|&hv| minus_i * hv).collect();
        if let Some(g) = source {
            for (dv, gv) in d.iter_mut().zip(g(t)) {
                *dv += gv;
            }
        }
        d
    };
    let mut v = v0.to_vec();
    for n in 0..steps {
        let t = t0 + n as f64 * h;
        let k1 = rhs(t, &v);
        let mid1: Vec<_> = v.iter().zip(&k1).map(|(&a, &b)| a + b * (h / 2.0)).collect();
        let k2 = rhs(t + h / 2.0, &mid1);
        let mid2: Vec<_> = v.iter().zip(&k2).map(|(&a, &b)| a + b * (h / 2.0)).collect();
        let k3 = rhs(t + h / 2.0, &mid2);
        let end: Vec<_> = v.iter().zip(&k3).map(|(&a, &b)| a + b * h).collect();
        let k4 = rhs(t + h, &end);
        for i in 0..dim {
            v[i] += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (h / 6.0);
        }
    }
    v
}

#[test]
fn criterion_3_propagation_suite() {
    // Norm drift under the benchmark guess field on the full grid.
    let p = build_tls::<f64>();
    let interp = SpectrumInterpolant::new(&p.initial_spectrum, &p.tgrid);
    let traj = propagate_forward(&p.model, &interp, &p.psi0, &p.tgrid, 1e-9).unwrap();
    let drift = (traj.terminal.norm() - 1.0).abs();

    // Stationary eigenstate under zero field: amplitude e^{-i E t} exactly.
    let small = build_tls_sized::<f64>(256);
    let (e1, phi1) = (&small.eigenpairs[1].0, &small.eigenpairs[1].1);
    let zero = |_t: f64| 0.0;
    let traj_stat =
        propagate_forward(&small.model, &zero, phi1, &small.tgrid, 1e-12).unwrap();
    let mut phase_err = 0.0f64;
    for (j, node) in traj_stat.nodes.iter().enumerate() {
        let t = small.tgrid.node(j);
        let expected = Complex::from_polar(1.0, -e1 * t);
        for (a, b) in node.amplitudes.iter().zip(&phi1.amplitudes) {
            phase_err = phase_err.max((a - expected * b).norm());
        }
    }

    // Forward fine-step oracle on a coarse grid.
    let pc = build_tls_sized::<f64>(512);
    let interp_c = SpectrumInterpolant::new(&pc.initial_spectrum, &pc.tgrid);
    let traj_c = propagate_forward(&pc.model, &interp_c, &pc.psi0, &pc.tgrid, 1e-10).unwrap();
    let field_fn = |t: f64| interp_c.value(t);
    let oracle_fwd = rk4_drive(
        &pc.model,
        &field_fn,
        None,
        &pc.psi0.amplitudes,
        0.0,
        100.0,
        200_000,
    );
    let fwd_err = traj_c
        .terminal
        .amplitudes
        .iter()
        .zip(&oracle_fwd)
        .fold(0.0f64, |m, (&a, &b)| m.max((a - b).norm()));

    // Backward inhomogeneous oracle: integrate in reversed time s = T - t,
    // where d chi/ds = +i H chi - G.
    let chi_t = StateVector::new(
        vec![
            Complex::new(0.6, -0.2),
            Complex::new(-0.3, 0.7),
        ],
        pc.psi0.basis,
    );
    struct Drive;
    impl SourceTerm<f64> for Drive {
        fn eval(&self, t: f64, out: &mut [Complex<f64>]) {
            out[0] = Complex::new((0.11 * t).sin(), 0.02 * t.cos());
            out[1] = Complex::new(0.05, -0.03 * (0.2 * t).cos());
        }
        fn is_zero(&self) -> bool {
            false
        }
    }
    let chi_traj = propagate_backward_inhomogeneous(
        &pc.model,
        &interp_c,
        &Drive,
        &chi_t,
        &pc.tgrid,
        1e-10,
    )
    .unwrap();
    // Oracle by time reversal and conjugation: with s = T - t and a real
    // symmetric Hamiltonian, y(s) = conj(chi(T - s)) obeys
    // dy/ds = -i H(T-s) y - conj(G(T-s)), a forward problem for RK4.
    let source_fn = |s: f64| -> Vec<Complex<f64>> {
        let t = 100.0 - s;
        let mut g = vec![Complex::new(0.0, 0.0); 2];
        Drive.eval(t, &mut g);
        g.iter().map(|&v| -v.conj()).collect()
    };
    let reversed_field = |s: f64| field_fn(100.0 - s);
    let y0: Vec<Complex<f64>> = chi_t.amplitudes.iter().map(|v| v.conj()).collect();
    let y_end = rk4_drive(
        &pc.model,
        &reversed_field,
        Some(&source_fn),
        &y0,
        0.0,
        100.0,
        200_000,
    );
    let bwd_err = chi_traj
        .initial
        .amplitudes
        .iter()
        .zip(&y_end)
        .fold(0.0f64, |m, (&a, &b)| m.max((a - b.conj()).norm()));

    let ok = drift <= 1e-9 && phase_err <= 1e-9 && fwd_err <= 1e-7 && bwd_err <= 1e-6;
    report(
        "3 (propagation suite)",
        ok,
        &format!(
            "norm drift {drift:.2e} (≤1e-9), stationary phase {phase_err:.2e} (≤1e-9), forward oracle {fwd_err:.2e} (≤1e-7), backward oracle {bwd_err:.2e} (≤1e-6)"
        ),
    );
}

// ---------------------------------------------------------------------------
// 4. adjoint gradient against finite differences

fn gradient_vs_fd(problem: &hgoct::problems::ProblemSpec<f64>, seed0: u64, tol: f64) -> f64 {
    let delta = 1e-6;
    let ct = CosineTransform::new(&problem.tgrid);
    let dw = frequency(&problem.tgrid, 1);
    let filter = &problem.weights.field_filter.values;
    let fmax = filter.iter().fold(0.0f64, |m, &v| m.max(v));
    let support: Vec<usize> = (0..filter.len())
        .filter(|&k| filter[k] >= 1e-3 * fmax)
        .collect();

    let j_of = |spec: &Spectrum<f64>| -> f64 {
        let interp = SpectrumInterpolant::new(spec, &problem.tgrid);
        let psi =
            propagate_forward(&problem.model, &interp, &problem.psi0, &problem.tgrid, tol).unwrap();
        evaluate_terms(&psi, spec, &problem.weights, &ct, &problem.model)
            .unwrap()
            .j_total
    };

    let mut seed = seed0;
    let mut worst = 0.0f64;
    for _field in 0..5 {
        let mut eps = Spectrum::zeros(problem.tgrid.n_t);
        for &k in &support {
            eps.values[k] = 0.3 * (lcg(&mut seed) - 0.5) * filter[k] / fmax;
        }
        let interp = SpectrumInterpolant::new(&eps, &problem.tgrid);
        let psi =
            propagate_forward(&problem.model, &interp, &problem.psi0, &problem.tgrid, tol).unwrap();
        let chi_t = chi_terminal(&psi.terminal, &problem.weights, &problem.model).unwrap();
        let src = adjoint_source(&psi, &problem.weights, &ct, &problem.model, &interp, tol).unwrap();
        let chi = propagate_backward_inhomogeneous(
            &problem.model,
            &interp,
            &src,
            &chi_t,
            &problem.tgrid,
            tol,
        )
        .unwrap();
        let g = gradient_spectrum(&psi, &chi, &problem.model, &problem.weights, &eps, &ct).unwrap();
        // Error is measured relative to the gradient's largest component:
        // on bins where the derivative crosses zero, a pointwise relative
        // error is unresolvable by central differences at delta = 1e-6 in
        // f64, while any systematic defect still exceeds 1e-4 of the scale.
        let gmax = support
            .iter()
            .map(|&k| {
                let c = if k == 0 { 0.5 } else { 1.0 };
                (dw * c * g.values[k]).abs()
            })
            .fold(0.0f64, f64::max);

        for _probe in 0..10 {
            let k = support[(lcg(&mut seed) * support.len() as f64) as usize % support.len()];
            let c = if k == 0 { 0.5 } else { 1.0 };
            let mut plus = eps.clone();
            plus.values[k] += delta;
            let mut minus = eps.clone();
            minus.values[k] -= delta;
            let fd = (j_of(&plus) - j_of(&minus)) / (2.0 * delta);
            let analytic = dw * c * g.values[k];
            let rel = (fd - analytic).abs() / fd.abs().max(gmax);
            if rel > 1e-4 {
                println!(
                    "  gradient mismatch at bin {k}: fd {fd:+.6e}, adjoint {analytic:+.6e}, rel {rel:.2e}"
                );
            }
            worst = worst.max(rel);
        }
    }
    worst
}

#[test]
fn criterion_4_adjoint_gradient_oracle() {
    // Grid sizes chosen so the O(dt^2) interpolant/quadrature mismatch sits
    // below the 1e-4 bar; the ladder needs the finer grid because its
    // target band lies near omega = 10.
    let tls = build_tls_sized::<f64>(8192);
    let worst_tls = gradient_vs_fd(&tls, 42, 1e-11);
    let lls = build_11ls_sized::<f64>(32768);
    println!("  grids: tls n_t = {}, ladder n_t = {}", tls.tgrid.n_t, lls.tgrid.n_t);
    let worst_11ls = gradient_vs_fd(&lls, 1234, 1e-12);
    let ok = worst_tls <= 1e-4 && worst_11ls <= 1e-4;
    report(
        "4 (adjoint gradient vs finite differences)",
        ok,
        &format!("worst relative error: tls {worst_tls:.2e}, 11ls {worst_11ls:.2e} (≤1e-4)"),
    );
}

// ---------------------------------------------------------------------------
// 5. TLS end-to-end

#[test]
fn criterion_5_tls_end_to_end() {
    let p = build_tls::<f64>();
    let cfg = RelaxationConfig::for_problem(&p, 200);
    let ct = CosineTransform::new(&p.tgrid);
    let initial_band = band_max(&dipole_spectrum(&p, &initial_trajectory(&p, 1e-9), &ct), &p.tgrid, 2.7, 3.3);

    let r = optimize(&p, &cfg, &mut |_| {}).unwrap();
    let converged = r.termination == hgoct::optimizer::Termination::Converged
        && r.history.len() <= 200;
    let monotone = r
        .history
        .windows(2)
        .all(|w| w[1].j.j_total > w[0].j.j_total);
    let spec_max = r.field_spectrum.values.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let leakage = outside_band_max(&r.field_spectrum, &p.tgrid, 0.5, 1.5);
    let confined = leakage < 1e-6 * spec_max;
    let final_band = band_max(&dipole_spectrum(&p, &r.trajectory, &ct), &p.tgrid, 2.7, 3.3);
    let growth = final_band / initial_band;
    let grew = growth >= 10.0;

    println!(
        "  clause a (converged ≤ 200 iters): {} ({:?}, {} iterations)",
        if converged { "pass" } else { "fail" },
        r.termination,
        r.history.len()
    );
    println!(
        "  clause b (J strictly increasing): {}",
        if monotone { "pass" } else { "fail" }
    );
    println!(
        "  clause c (field outside [0.5,1.5] < 1e-6 of max): {} (leakage {:.3e} of max)",
        if confined { "pass" } else { "fail" },
        leakage / spec_max
    );
    println!(
        "  clause d (band [2.7,3.3] emission ≥ 10×): {} (growth {:.2}×, {:.3e} → {:.3e})",
        if grew { "pass" } else { "fail" },
        growth,
        initial_band,
        final_band
    );
    report(
        "5 (tls end-to-end)",
        converged && monotone && confined && grew,
        &format!(
            "converged {converged}, monotone {monotone}, confinement {confined}, growth {growth:.2}×"
        ),
    );
}

// ---------------------------------------------------------------------------
// 6. 11-level ladder end-to-end

#[test]
fn criterion_6_11ls_end_to_end() {
    let p = build_11ls_sized::<f64>(2048);
    let mut cfg = RelaxationConfig::for_problem(&p, 500);
    // The ladder's level spacings near 10 force sub-millisecond steps at
    // the default budget; 1e-7 over [0, T] keeps J errors four orders
    // below the convergence scale while roughly tripling throughput.
    cfg.propagation_tol = 1e-7;
    let ct = CosineTransform::new(&p.tgrid);
    let initial_band = band_max(
        &dipole_spectrum(&p, &initial_trajectory(&p, 1e-9), &ct),
        &p.tgrid,
        9.9,
        10.1,
    );

    let r = optimize(&p, &cfg, &mut |rec| {
        if rec.index % 25 == 0 {
            println!(
                "  iter {:3}: J = {:+.6e}, metric = {:.3e}, K = {:.3e}",
                rec.index, rec.j.j_total, rec.metric, rec.k_used
            );
        }
    })
    .unwrap();
    let converged = r.termination == hgoct::optimizer::Termination::Converged;
    let monotone = r.history.windows(2).all(|w| w[1].j.j_total > w[0].j.j_total);
    // The field filter is a hard cut at 1.3, so confinement must be exact.
    let confined = r
        .field_spectrum
        .values
        .iter()
        .enumerate()
        .all(|(k, &v)| frequency(&p.tgrid, k) <= 1.3 || v == 0.0);
    let final_band = band_max(&dipole_spectrum(&p, &r.trajectory, &ct), &p.tgrid, 9.9, 10.1);
    let growth = final_band / initial_band;
    let grew = growth >= 10.0;

    println!(
        "  clause a (converges at tolerance 1e-3): {} ({:?}, {} iterations)",
        if converged { "pass" } else { "fail" },
        r.termination,
        r.history.len()
    );
    println!(
        "  clause b (J strictly increasing): {}",
        if monotone { "pass" } else { "fail" }
    );
    println!(
        "  clause c (field confined to [0, 1.3]): {}",
        if confined { "pass" } else { "fail" }
    );
    println!(
        "  clause d (band [9.9,10.1] emission ≥ 10×): {} (growth {:.2}×, {:.3e} → {:.3e})",
        if grew { "pass" } else { "fail" },
        growth,
        initial_band,
        final_band
    );
    report(
        "6 (11-level end-to-end)",
        converged && monotone && confined && grew,
        &format!(
            "converged {converged}, monotone {monotone}, confinement {confined}, growth {growth:.2}×"
        ),
    );
}

// ---------------------------------------------------------------------------
// 7. diatomic with forbidden-subspace control

fn hcl_clauses(p: &hgoct::problems::ProblemSpec<f64>, criterion: &str, require_converged: bool) {
    let cfg = RelaxationConfig::for_problem(p, 200);
    let r = optimize(p, &cfg, &mut |_| {}).unwrap();
    let converged = r.termination == hgoct::optimizer::Termination::Converged;
    let monotone = r.history.windows(2).all(|w| w[1].j.j_total > w[0].j.j_total);
    // -j_forb is the time integral of the forbidden-subspace population
    // weighted by the penalty (weights ≥ 1 on every forbidden level), so
    // dividing by T bounds the time-averaged forbidden population. It must
    // stay below 1% at every iterate: bounded, never escaping upward.
    let forb: Vec<f64> = r.history.iter().map(|rec| -rec.j.j_forb).collect();
    let forb_start = forb.first().copied().unwrap_or(0.0);
    let forb_bound = 0.01 * p.tgrid.total_time;
    let bounded = forb.iter().all(|&v| v <= forb_bound);
    let pop_high = p.population_above(&r.trajectory.terminal, 19);
    let pop_ok = pop_high < 0.05;

    println!(
        "  termination {:?} after {} iterations (converged required: {require_converged})",
        r.termination,
        r.history.len()
    );
    println!(
        "  clause a (forbidden-population integral bounded): {} (start {:.3e}, max {:.3e}, bound {:.3e})",
        if bounded { "pass" } else { "fail" },
        forb_start,
        forb.iter().cloned().fold(0.0f64, f64::max),
        forb_bound
    );
    println!(
        "  clause b (population above level 19 at T < 5%): {} ({:.3e})",
        if pop_ok { "pass" } else { "fail" },
        pop_high
    );
    report(
        criterion,
        bounded && pop_ok && monotone && (!require_converged || converged),
        &format!(
            "bounded {bounded}, terminal high-level population {pop_high:.3e}, monotone {monotone}, termination {:?}",
            r.termination
        ),
    );
}

#[test]
fn criterion_7_hcl_smoke() {
    let p = build_hcl_sized::<f64>(2000.0, 1024).unwrap();
    hcl_clauses(&p, "7 (diatomic, smoke horizon)", false);
}

/// Full-horizon variant; run with `--ignored` (takes up to an hour).
#[test]
#[ignore]
fn criterion_7_hcl_full() {
    let p = hgoct::problems::build_hcl::<f64>().unwrap();
    hcl_clauses(&p, "7 (diatomic, full horizon)", true);
}

// ---------------------------------------------------------------------------
// optional: soft-core Coulomb emission gain (no convergence requirement)

#[test]
#[ignore]
fn optional_coulomb_emission_gain() {
    let p = build_coulomb::<f64>().unwrap();
    let cfg = RelaxationConfig::for_problem(&p, 500);
    let ct = CosineTransform::new(&p.tgrid);
    let initial_band = band_max(
        &dipole_spectrum(&p, &initial_trajectory(&p, 1e-9), &ct),
        &p.tgrid,
        0.61,
        0.63,
    );
    let r = optimize(&p, &cfg, &mut |_| {}).unwrap();
    let final_band = band_max(&dipole_spectrum(&p, &r.trajectory, &ct), &p.tgrid, 0.61, 0.63);
    let growth = final_band / initial_band;
    report(
        "optional (coulomb band emission ≥ 5×)",
        growth >= 5.0,
        &format!("growth {growth:.2}× ({initial_band:.3e} → {final_band:.3e}), termination {:?}", r.termination),
    );
}

// ---------------------------------------------------------------------------
// 8. optimizer properties

#[test]
fn criterion_8_optimizer_properties() {
    let p = build_tls_sized::<f64>(256);
    let mut cfg = RelaxationConfig::new(0.5, 1e-12, 5).unwrap();
    cfg.gamma_schedule = None;

    let run = |cfg: &RelaxationConfig<f64>| {
        let mut spectra = Vec::new();
        let r = optimize_from(&p, cfg, None, &mut |rec, eps| {
            spectra.push((rec.clone(), eps.clone()));
        })
        .unwrap();
        (r, spectra)
    };
    let (r1, s1) = run(&cfg);
    let (r2, _) = run(&cfg);

    let monotone = r1
        .history
        .windows(2)
        .all(|w| w[1].j.j_total > w[0].j.j_total);
    let deterministic = r1.history == r2.history
        && r1.field_spectrum.values == r2.field_spectrum.values;

    // Snapshot after two iterations, then resume; the tail must match.
    let (rec2, eps2) = &s1[1];
    let state = OptimizationState {
        next_iteration: rec2.index + 1,
        field_spectrum: eps2.clone(),
        k: rec2.k_used,
        history: r1.history[..2].to_vec(),
    };
    let resumed = optimize_from(&p, &cfg, Some(state), &mut |_, _| {}).unwrap();
    let resume_equiv = resumed.history == r1.history
        && resumed.field_spectrum.values == r1.field_spectrum.values;

    // Filter confinement at every accepted iterate.
    let filter = &p.weights.field_filter.values;
    let confined = s1.iter().all(|(_, eps)| {
        filter
            .iter()
            .zip(&eps.values)
            .all(|(&f, &e)| f != 0.0 || e == 0.0)
    });

    let ok = monotone && deterministic && resume_equiv && confined;
    report(
        "8 (optimizer properties)",
        ok,
        &format!(
            "monotone {monotone}, deterministic {deterministic}, resume bit-equivalent {resume_equiv}, filter-confined {confined}"
        ),
    );
}
