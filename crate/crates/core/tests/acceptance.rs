//! Acceptance suite. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line.

mod common;

use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use twisted_conv::bochner::{sample_points, verify_bochner, Scheme};
use twisted_conv::channel::{admissibility, compose, TwistedChannel};
use twisted_conv::char_fn::{ClassicalCF, LevyFunction, QuantumCF};
use twisted_conv::fock_oracle::{
    commutation_checks, generator_sign_sweep, mixture_channel_check, operator_generator_check, phase_action_checks,
    qcf_trace, quadrature_form_check, weyl_composition_check, weyl_matrix, DensityMatrix, DEFAULT_DIFF_STEP,
};
use twisted_conv::phase_space::{PhaseVector, SymplecticForm};
use twisted_conv::semigroup::{
    channel_at, generator_residual, generator_residual_with_noise_coefficient, propagate_m, SemigroupGenerator,
};

type Verdict = Result<String, String>;

fn fail(msg: impl Into<String>) -> String {
    msg.into()
}

fn lib<T>(r: twisted_conv::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * a.norm().max(1.0)
}

fn pv(v: DVector<f64>) -> PhaseVector {
    PhaseVector::from_vector(v).expect("even length")
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let elapsed = start.elapsed();
    if elapsed > limit {
        return Err(format!("runtime {elapsed:.2?} exceeds {limit:?}"));
    }
    Ok(elapsed)
}

fn random_phi<R: Rng>(rng: &mut R, dim: usize) -> ClassicalCF {
    match rng.random_range(0..4) {
        0 => ClassicalCF::Unit,
        1 => {
            let p = gaussian_matrix(rng, dim, dim, 0.4);
            ClassicalCF::gaussian(gaussian_vector(rng, dim, 0.5), p.transpose() * p).unwrap()
        }
        2 => ClassicalCF::point_mass(gaussian_vector(rng, dim, 0.7)).unwrap(),
        _ => ClassicalCF::mixture(vec![
            (gaussian_vector(rng, dim, 0.5), 0.3),
            (gaussian_vector(rng, dim, 0.5), 0.7),
        ])
        .unwrap(),
    }
}

fn random_channel<R: Rng>(rng: &mut R, n: usize) -> TwistedChannel {
    let dim = 2 * n;
    let a = gaussian_matrix(rng, dim, dim, 0.5);
    let m = admissible_noise(rng, &a, 0.3);
    TwistedChannel::new(random_phi(rng, dim), m, a).expect("admissible by construction")
}

fn random_input<R: Rng>(rng: &mut R, n: usize) -> QuantumCF {
    QuantumCF::gaussian_state(gaussian_vector(rng, 2 * n, 0.5), random_state_covariance(rng, n)).unwrap()
}

struct Pools {
    channel_pairs: Vec<(TwistedChannel, TwistedChannel, TwistedChannel)>,
    semigroup_channels: Vec<TwistedChannel>,
}

/// 1. Sequential vs composed application, plus componentwise matrices.
fn criterion_1(pools: &mut Pools) -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1001);
    let mut worst_value = 0.0_f64;
    let mut worst_matrix = 0.0_f64;
    for k in 0..200 {
        let n = 1 + k % 3;
        let dim = 2 * n;
        let ch1 = random_channel(&mut rng, n);
        let ch2 = random_channel(&mut rng, n);
        let composed = lib(compose(&ch2, &ch1))?;
        let a_expected = ch1.a() * ch2.a();
        let m_expected = ch2.m() + ch2.a().transpose() * ch1.m() * ch2.a();
        worst_matrix = worst_matrix
            .max(max_abs(&(composed.a() - &a_expected)))
            .max(max_abs(&(composed.m() - &m_expected)));
        let f = random_input(&mut rng, n);
        let sequential = lib(ch2.apply(&lib(ch1.apply(&f))?))?;
        let direct = lib(composed.apply(&f))?;
        for _ in 0..100 {
            let xi = gaussian_vector(&mut rng, dim, 0.8);
            let a = lib(sequential.eval(&xi))?;
            let b = lib(direct.eval(&xi))?;
            worst_value = worst_value.max((a - b).norm() / a.norm().max(1.0));
        }
        pools.channel_pairs.push((ch1, ch2, composed));
    }
    let elapsed = within(Duration::from_secs(10), start)?;
    if worst_value > 1e-12 || worst_matrix > 1e-12 {
        return Err(fail(format!("value {worst_value:.2e}, matrix {worst_matrix:.2e}")));
    }
    Ok(format!(
        "200 pairs, max value dev {worst_value:.2e}, max matrix dev {worst_matrix:.2e}, {elapsed:.2?}"
    ))
}

fn generators() -> Vec<(&'static str, SemigroupGenerator)> {
    let mut rng = ChaCha8Rng::seed_from_u64(2002);
    let j = j_matrix(1);
    let jump = LevyFunction::zero(2)
        .unwrap()
        .with_atom(DVector::from_column_slice(&[0.7, -0.2]), 0.4)
        .unwrap()
        .with_atom(DVector::from_column_slice(&[-0.3, 0.5]), 0.8)
        .unwrap();
    let mut out = vec![
        ("attenuator", SemigroupGenerator::attenuator(1, 0.5).unwrap()),
        (
            "rotation",
            SemigroupGenerator::new(j.clone(), DMatrix::identity(2, 2) * 0.3, jump.clone()).unwrap(),
        ),
        (
            "zero drift",
            SemigroupGenerator::new(DMatrix::zeros(2, 2), DMatrix::identity(2, 2), jump.clone()).unwrap(),
        ),
    ];
    for (k, n) in [(0, 1), (1, 2)] {
        let dim = 2 * n;
        let a = gaussian_matrix(&mut rng, dim, dim, 0.4);
        let noise = admissible_rate(&mut rng, &a, 0.3);
        let gamma = if k == 0 {
            jump.clone()
        } else {
            LevyFunction::zero(dim)
                .unwrap()
                .with_atom(gaussian_vector(&mut rng, dim, 0.5), 0.6)
                .unwrap()
        };
        let name = if k == 0 {
            "random-admissible 1"
        } else {
            "random-admissible 2"
        };
        out.push((name, SemigroupGenerator::new(a, noise, gamma).unwrap()));
    }
    out
}

/// 2. compose(T_s, T_t) against T_{s+t}.
fn criterion_2(pools: &mut Pools) -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2003);
    let (mut wa, mut wm, mut wphi) = (0.0_f64, 0.0_f64, 0.0_f64);
    for (_, gen) in generators() {
        let dim = gen.dim();
        for _ in 0..20 {
            let s = rng.random_range(0.0..2.0);
            let t = rng.random_range(0.0..2.0);
            let ts = lib(channel_at(&gen, s, 1e-12))?;
            let tt = lib(channel_at(&gen, t, 1e-12))?;
            let tst = lib(channel_at(&gen, s + t, 1e-12))?;
            let composed = lib(compose(&ts, &tt))?;
            wa = wa.max(max_abs(&(composed.a() - tst.a())));
            wm = wm.max(max_abs(&(composed.m() - tst.m())));
            for _ in 0..5 {
                let xi = gaussian_vector(&mut rng, dim, 1.0);
                let d = lib(composed.phi().eval(&xi))? - lib(tst.phi().eval(&xi))?;
                wphi = wphi.max(d.norm());
            }
            pools.semigroup_channels.push(tst);
        }
    }
    let elapsed = within(Duration::from_secs(30), start)?;
    if wa > 1e-11 || wm > 1e-9 || wphi > 1e-8 {
        return Err(fail(format!("A {wa:.2e}, M {wm:.2e}, phi {wphi:.2e}")));
    }
    Ok(format!(
        "5 generators x 20 pairs, A {wa:.2e}, M {wm:.2e}, phi {wphi:.2e}, {elapsed:.2?}"
    ))
}

/// 3. No admissibility violations among the instances of 1 and 2.
fn criterion_3(pools: &Pools) -> Verdict {
    let mut checked = 0;
    let mut violations = 0;
    let mut worst = f64::INFINITY;
    let all = pools
        .channel_pairs
        .iter()
        .flat_map(|(a, b, c)| [a, b, c])
        .chain(pools.semigroup_channels.iter());
    for ch in all {
        let form = SymplecticForm::new(ch.modes()).unwrap();
        let report = lib(admissibility(ch.m(), ch.a(), &form, 1e-9))?;
        checked += 1;
        worst = worst.min(report.min_eigenvalue);
        if !report.is_psd {
            violations += 1;
        }
    }
    if violations > 0 {
        return Err(format!("{violations} violations out of {checked}"));
    }
    Ok(format!(
        "{checked} channels, 0 violations, lowest eigenvalue {worst:.2e}"
    ))
}

/// 4. Outputs of valid Gaussian inputs are quantum Bochner; K = I/4 is not.
fn criterion_4(pools: &Pools) -> Verdict {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4004);
    let mut outputs = Vec::new();
    for (ch1, _, composed) in pools.channel_pairs.iter().step_by(40) {
        let n = ch1.modes();
        outputs.push(lib(composed.apply(&random_input(&mut rng, n)))?);
        outputs.push(lib(ch1.apply(&QuantumCF::vacuum(n).unwrap()))?);
    }
    for ch in pools.semigroup_channels.iter().step_by(25) {
        outputs.push(lib(ch.apply(&random_input(&mut rng, ch.modes())))?);
    }
    let mut worst = f64::INFINITY;
    for f in &outputs {
        let form = SymplecticForm::new(f.modes()).unwrap();
        for seed in 0..5 {
            let pts = lib(sample_points(f.modes(), 50, 2.0, seed, Scheme::RandomGaussian))?;
            let r = lib(verify_bochner(f, &pts, &form, 1e-10))?;
            worst = worst.min(r.min_eigenvalue);
            if !r.is_positive || r.min_eigenvalue < -1e-8 {
                return Err(format!(
                    "output failed at seed {seed}: min eigenvalue {:.3e}",
                    r.min_eigenvalue
                ));
            }
        }
    }
    let impostor = QuantumCF::gaussian_state(DVector::zeros(2), DMatrix::identity(2, 2) * 0.25).unwrap();
    let form = SymplecticForm::new(1).unwrap();
    let mut caught = None;
    for seed in 0..5 {
        let pts = lib(sample_points(1, 50, 2.0, seed, Scheme::RandomGaussian))?;
        let r = lib(verify_bochner(&impostor, &pts, &form, 1e-10))?;
        if !r.is_positive {
            caught = Some((seed, r.min_eigenvalue));
            break;
        }
    }
    let Some((seed, min)) = caught else {
        return Err("K = I/4 passed every seed".into());
    };
    let elapsed = within(Duration::from_secs(20), start)?;
    Ok(format!(
        "{} outputs x 5 seeds positive (lowest {worst:.2e}); K=I/4 rejected at seed {seed} ({min:.3e}), {elapsed:.2?}",
        outputs.len()
    ))
}

/// 5. Fock traces and operator identities at D = 40.
fn criterion_5() -> Verdict {
    let start = Instant::now();
    let d = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(5005);
    let vac = lib(DensityMatrix::vacuum(d))?;
    let alpha = Complex64::new(0.6, -0.3);
    let coh = lib(DensityMatrix::coherent(alpha, d))?;
    let mut trace_dev = 0.0_f64;
    for _ in 0..40 {
        let xi = uniform_in_ball(&mut rng, 2, 2.0);
        let z = Complex64::new(xi[0], xi[1]);
        let envelope = (-0.5 * xi.norm_squared()).exp();
        let v = lib(qcf_trace(&vac, &pv(xi.clone()), d))?;
        // Tr(W(α)|0⟩⟨0|W(α)† W(z)) = ⟨0|W(-α)W(z)W(α)|0⟩ = e^{2i Im(ᾱz)} e^{-|z|²/2}
        let c = lib(qcf_trace(&coh, &pv(xi.clone()), d))?;
        let expected = Complex64::new(0.0, 2.0 * (alpha.conj() * z).im).exp() * envelope;
        trace_dev = trace_dev.max((v - envelope).norm()).max((c - expected).norm());
    }
    let mut weyl_dev = 0.0_f64;
    let mut min_block = usize::MAX;
    for _ in 0..10 {
        let a = uniform_in_ball(&mut rng, 2, 2.0);
        let b = uniform_in_ball(&mut rng, 2, 2.0);
        let z1 = Complex64::new(a[0], a[1]);
        let z2 = Complex64::new(b[0], b[1]);
        for r in [
            lib(weyl_composition_check(z1, z2, d))?,
            lib(quadrature_form_check(&pv(a.clone()), d))?,
            lib(commutation_checks(z1, d))?,
        ] {
            if !r.pass {
                return Err(format!("{} failed: {:?}", r.identity, r));
            }
            let block: usize = r
                .note
                .as_deref()
                .and_then(|s| s.strip_prefix("block "))
                .and_then(|s| s.parse().ok())
                .unwrap_or(0);
            min_block = min_block.min(block);
            weyl_dev = weyl_dev.max(r.max_residual);
        }
    }
    // direct restatement of the composition law on the vacuum column
    let z1 = Complex64::new(1.0, 0.4);
    let z2 = Complex64::new(-0.3, 0.9);
    let lhs = lib(weyl_matrix(z1, d))?.matrix() * lib(weyl_matrix(z2, d))?.matrix();
    let rhs = lib(weyl_matrix(z1 + z2, d))?.matrix() * Complex64::new(0.0, -(z1.conj() * z2).im).exp();
    let column_dev = (0..6).map(|i| (lhs[(i, 0)] - rhs[(i, 0)]).norm()).fold(0.0, f64::max);

    let rho = lib(DensityMatrix::random(d, 5, 3, 55))?;
    let atoms = vec![
        (DVector::from_column_slice(&[0.4, -0.2]), 0.25),
        (DVector::from_column_slice(&[-0.1, 0.5]), 0.35),
        (DVector::from_column_slice(&[0.2, 0.3]), 0.4),
    ];
    let pts: Vec<PhaseVector> = (0..50).map(|_| pv(uniform_in_ball(&mut rng, 2, 1.0))).collect();
    let mix = lib(mixture_channel_check(&rho, &atoms, &pts))?;
    let elapsed = within(Duration::from_secs(60), start)?;
    if trace_dev > 1e-8 || weyl_dev > 1e-8 || column_dev > 1e-8 || mix.max_residual > 1e-6 {
        return Err(format!(
            "traces {trace_dev:.2e}, Weyl {weyl_dev:.2e}, column {column_dev:.2e}, mixture {:.2e}",
            mix.max_residual
        ));
    }
    Ok(format!(
        "traces {trace_dev:.2e}, Weyl/quadrature form/commutators {weyl_dev:.2e} (smallest block {min_block}), mixture {:.2e}, {elapsed:.2?}",
        mix.max_residual
    ))
}

/// 6. Finite-difference generator residual, with the unhalved control.
fn criterion_6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6006);
    let gen = lib(SemigroupGenerator::attenuator(1, 0.5))?;
    let inputs = [
        ("vacuum", lib(QuantumCF::vacuum(1))?),
        (
            "coherent",
            lib(QuantumCF::gaussian_state(
                DVector::from_column_slice(&[0.6, -0.4]),
                DMatrix::identity(2, 2) * 0.5,
            ))?,
        ),
    ];
    let mut worst = 0.0_f64;
    let mut control = f64::INFINITY;
    for (_, f0) in &inputs {
        for t in [0.1, 0.5] {
            let mut control_max = 0.0_f64;
            for _ in 0..20 {
                let xi = pv(uniform_in_ball(&mut rng, 2, 1.5));
                worst = worst.max(lib(generator_residual(&gen, f0, t, &xi, 1e-4))?);
                control_max = control_max.max(lib(generator_residual_with_noise_coefficient(
                    &gen, f0, t, &xi, 1e-4, 1.0,
                ))?);
            }
            control = control.min(control_max);
        }
    }
    if worst > 1e-5 || control <= 1e-2 {
        return Err(format!("residual {worst:.2e}, unhalved control {control:.2e}"));
    }
    Ok(format!("max residual {worst:.2e}; unhalved control ≥ {control:.2e}"))
}

/// 7. Phase-action identities and the operator generator at D = 40.
fn criterion_7() -> Verdict {
    let start = Instant::now();
    let d = 40;
    let mut rng = ChaCha8Rng::seed_from_u64(7007);
    let states = [
        lib(DensityMatrix::vacuum(d))?,
        lib(DensityMatrix::coherent(Complex64::new(0.5, 0.0), d))?,
        lib(DensityMatrix::random(d, 5, 3, 77))?,
    ];
    let mut phase = 0.0_f64;
    for rho in &states {
        for _ in 0..5 {
            let xi = pv(uniform_in_ball(&mut rng, 2, 1.2));
            phase = phase.max(lib(phase_action_checks(rho, &xi, DEFAULT_DIFF_STEP))?.max_residual);
        }
    }
    let gen = lib(SemigroupGenerator::attenuator(1, 0.5))?;
    let pts: Vec<PhaseVector> = (0..20).map(|_| pv(uniform_in_ball(&mut rng, 2, 1.2))).collect();
    let mut generator = 0.0_f64;
    for rho in &states[..2] {
        generator = generator.max(lib(operator_generator_check(&gen, rho, &pts, DEFAULT_DIFF_STEP))?.max_residual);
    }
    let sweep = lib(generator_sign_sweep(&gen, &states[1], &pts[..8], DEFAULT_DIFF_STEP))?;
    let elapsed = within(Duration::from_secs(60), start)?;
    if phase > 1e-5 || generator > 1e-5 {
        return Err(format!("phase action {phase:.2e}, generator {generator:.2e}"));
    }
    Ok(format!(
        "phase action {phase:.2e}, operator generator {generator:.2e}, best signs {:?}, {elapsed:.2?}",
        sweep.best
    ))
}

/// 8. Closed-form Gaussian action and the attenuator fixed point.
fn criterion_8() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(8008);
    let mut worst = 0.0_f64;
    for k in 0..50 {
        let n = 1 + k % 3;
        let dim = 2 * n;
        let a = gaussian_matrix(&mut rng, dim, dim, 0.5);
        let m = admissible_noise(&mut rng, &a, 0.3);
        let phi = if k % 2 == 0 {
            ClassicalCF::Unit
        } else {
            let p = gaussian_matrix(&mut rng, dim, dim, 0.4);
            lib(ClassicalCF::gaussian(
                gaussian_vector(&mut rng, dim, 0.5),
                p.transpose() * p,
            ))?
        };
        let ch = lib(TwistedChannel::new(phi, m, a))?;
        let g = random_input(&mut rng, n);
        let closed = lib(ch.apply_gaussian(&g))?;
        let lazy = lib(ch.apply(&g))?;
        for _ in 0..100 {
            let xi = gaussian_vector(&mut rng, dim, 0.8);
            let a = lib(closed.eval(&xi))?;
            let b = lib(lazy.eval(&xi))?;
            if !close(a, b, 1e-12) {
                return Err(format!("closed form {a} vs lazy {b}"));
            }
            worst = worst.max((a - b).norm());
        }
    }
    let gen = lib(SemigroupGenerator::attenuator(1, 0.5))?;
    let vac = lib(QuantumCF::vacuum(1))?;
    let mut fixed = 0.0_f64;
    for t in [0.5, 1.0, 5.0] {
        let QuantumCF::GaussianState { covariance, .. } = lib(lib(channel_at(&gen, t, 1e-10))?.apply_gaussian(&vac))?
        else {
            return Err("apply_gaussian returned a non-Gaussian qcf".into());
        };
        fixed = fixed.max(max_abs(&(covariance - DMatrix::identity(2, 2) * 0.5)));
    }
    if fixed > 1e-12 {
        return Err(format!("fixed point deviation {fixed:.2e}"));
    }
    Ok(format!(
        "50 channels x 100 points, max dev {worst:.2e}; K_t - I/2 {fixed:.2e}"
    ))
}

/// Composite trapezoid for `∫_0^t e^{τAᵀ} N e^{τA} dτ`, stepping `e^{τA}`
/// by repeated multiplication with a Taylor-summed `e^{hA}`.
fn trapezoid_m(a: &DMatrix<f64>, n: &DMatrix<f64>, t: f64, panels: usize) -> DMatrix<f64> {
    let dim = a.nrows();
    let h = t / panels as f64;
    let ha = a * h;
    let mut step = DMatrix::identity(dim, dim);
    let mut term = DMatrix::identity(dim, dim);
    for k in 1..20 {
        term = &term * &ha / k as f64;
        step += &term;
    }
    let mut e = DMatrix::identity(dim, dim);
    let mut sum = n * 0.5;
    for k in 1..=panels {
        e = &e * &step;
        let f = e.transpose() * n * &e;
        sum += if k == panels { f * 0.5 } else { f };
    }
    sum * h
}

/// 9. Augmented exponential against trapezoid quadrature; `M_t/t → N`.
fn criterion_9() -> Verdict {
    let mut worst = 0.0_f64;
    for (_, gen) in generators() {
        for t in [0.1, 1.0, 3.0] {
            let m = lib(propagate_m(&gen, t))?;
            let oracle = trapezoid_m(gen.a(), gen.noise(), t, 100_000);
            worst = worst.max(max_abs(&(m - oracle)));
        }
    }
    let mut slopes = Vec::new();
    for (name, gen) in generators() {
        let devs: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&t| lib(propagate_m(&gen, t)).map(|m| max_abs(&(m / t - gen.noise()))))
            .collect::<Result<_, _>>()?;
        if devs[0] < 1e-13 {
            continue;
        }
        let (r1, r2) = (devs[0] / devs[1], devs[1] / devs[2]);
        if !(5.0..20.0).contains(&r1) || !(5.0..20.0).contains(&r2) {
            return Err(format!("{name}: deviations {devs:?} do not decay linearly"));
        }
        slopes.push(devs[0] / 1e-2);
    }
    if worst > 1e-8 {
        return Err(format!("trapezoid deviation {worst:.2e}"));
    }
    Ok(format!(
        "max dev vs trapezoid {worst:.2e}; ‖M_t/t - N‖/t ≈ {:.2} .. {:.2}",
        slopes.iter().copied().fold(f64::INFINITY, f64::min),
        slopes.iter().copied().fold(0.0, f64::max)
    ))
}

fn main() {
    let mut pools = Pools {
        channel_pairs: Vec::new(),
        semigroup_channels: Vec::new(),
    };
    let results = vec![
        ("1 composition law", criterion_1(&mut pools)),
        ("2 semigroup law", criterion_2(&mut pools)),
        ("3 admissibility preservation", criterion_3(&pools)),
        ("4 quantum Bochner positivity", criterion_4(&pools)),
        ("5 Fock oracle agreement", criterion_5()),
        ("6 generator PDE", criterion_6()),
        ("7 operator generator", criterion_7()),
        ("8 Gaussian closed form", criterion_8()),
        ("9 M_t integral", criterion_9()),
    ];
    let mut failed = 0;
    for (name, r) in &results {
        match r {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
