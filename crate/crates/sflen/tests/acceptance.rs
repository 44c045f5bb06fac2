//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! hard criterion fails. Run with `cargo test -p sflen --test acceptance`.

use std::time::Instant;

use sflen::{run_sweep, ExperimentConfig, RegionSpec, Wrap};
use sflen_core::filterbank::{build_filter_bank, build_hankel, hankel_entry, impulse_vector, kron, BankKind, FilterBank, HankelKind, ImpulseKind, DEFAULT_TOL_EIG};
use sflen_core::lds::{conditioning_check, conditioning_threshold, gen_inputs, hug_band, make_random_system, sample_region, simulate, DKind, InputKind, HUG_Q};
use sflen_core::learner::{context_from_q, fixed_losses, loss_and_grad, precompute_features, predict, run_online, slot_kernels, PredictorSpec, PredictorState, Variant};
use sflen_core::linalg::{gauss_legendre, Mat};
use sflen_core::regret::{ogd_regret_bound, solve_comparator, solve_comparator_with_context};

/// Step scale and radius of the length-generalization and regret experiments.
const EXPERIMENT_R: f64 = 10.0;
const EXPERIMENT_ETA0: f64 = 1.2;

struct Report {
    hard_failures: Vec<String>,
}

impl Report {
    fn line(&mut self, name: &str, pass: bool, hard: bool, detail: String, secs: f64) {
        let tag = match (pass, hard) {
            (true, _) => "PASS",
            (false, true) => "FAIL",
            (false, false) => "FAIL (report only)",
        };
        println!("[{tag}] {name}: {detail} ({secs:.1} s)");
        if !pass && hard {
            self.hard_failures.push(name.to_string());
        }
    }
}

fn jobs() -> usize {
    std::thread::available_parallelism().map_or(4, |n| n.get())
}

fn closed_forms(rep: &mut Report) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for n in [1, 2, 17, 255] {
        for kind in [HankelKind::H, HankelKind::N] {
            let m = build_hankel(n, kind).unwrap();
            for i in 0..n {
                for j in 0..n {
                    // exact rational oracle: numerator over an integer product
                    let s = (i + j + 2) as u128;
                    let exact = match kind {
                        HankelKind::H => 2.0 / ((s - 1) * s * (s + 1)) as f64,
                        HankelKind::N => 24.0 / ((s - 1) * s * (s + 1) * (s + 2) * (s + 3)) as f64,
                    };
                    worst = worst.max((m.entries[(i, j)] - exact).abs());
                }
            }
        }
    }
    let small = build_hankel(2, HankelKind::H).unwrap().entries;
    let examples = small[(0, 0)] == 1.0 / 3.0 && small[(0, 1)] == 1.0 / 12.0 && small[(1, 1)] == 1.0 / 30.0 && hankel_entry(HankelKind::N, 1, 1) == 0.2;
    let (nodes, weights) = gauss_legendre(200);
    let mut quad: f64 = 0.0;
    for n in [1, 8, 32] {
        for (kind, imp) in [(HankelKind::H, ImpulseKind::Plain), (HankelKind::N, ImpulseKind::Squared)] {
            let m = build_hankel(n, kind).unwrap();
            let mut acc = vec![0.0; n * n];
            for (a, w) in nodes.iter().zip(&weights) {
                let mu = impulse_vector(*a, n, imp).unwrap().values;
                for i in 0..n {
                    for j in 0..n {
                        acc[i * n + j] += w * mu[i] * mu[j];
                    }
                }
            }
            for i in 0..n {
                for j in 0..n {
                    quad = quad.max((acc[i * n + j] - m.entries[(i, j)]).abs());
                }
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let pass = worst <= 1e-15 && quad <= 1e-10 && examples && secs < 5.0;
    rep.line("1 closed-form matrices", pass, true, format!("max |entry - formula| {worst:.1e} (<= 1e-15), quadrature {quad:.1e} (<= 1e-10), examples {examples}"), secs);
}

struct BankChecks {
    ortho: f64,
    residual: f64,
    max_l1_ratio: f64,
}

fn bank_checks(bank: &FilterBank, kind: HankelKind) -> BankChecks {
    let n = bank.filter_length();
    let m = build_hankel(n, kind).unwrap().entries;
    let mut ortho: f64 = 0.0;
    let mut residual: f64 = 0.0;
    let s1 = bank.eigenvalues()[0];
    let mut max_l1_ratio: f64 = 0.0;
    let log_t = (bank.horizon() as f64).ln();
    for i in 0..bank.num_filters() {
        let phi = bank.filter(i);
        for j in 0..=i {
            let d: f64 = phi.iter().zip(bank.filter(j)).map(|(a, b)| a * b).sum();
            ortho = ortho.max((d - if i == j { 1.0 } else { 0.0 }).abs());
        }
        let mphi = m.matvec(phi);
        let r: f64 = mphi.iter().zip(phi).map(|(a, b)| (a - bank.eigenvalues()[i] * b).powi(2)).sum::<f64>().sqrt();
        residual = residual.max(r / s1);
        let l1: f64 = phi.iter().map(|v| v.abs()).sum();
        max_l1_ratio = max_l1_ratio.max(l1 * bank.eigenvalues()[i].powf(0.25) / log_t);
    }
    BankChecks { ortho, residual, max_l1_ratio }
}

fn eigen_suite(rep: &mut Report) {
    let start = Instant::now();
    let k = 24;
    let c = (std::f64::consts::PI.powi(2) / 4.0).exp();
    let mut details = Vec::new();
    let mut pass = true;
    let mut c0 = [0.0; 2];
    for t in [64usize, 256, 1024] {
        for (idx, (bk, hk)) in [(BankKind::VanillaH, HankelKind::H), (BankKind::TwoArN, HankelKind::N)].into_iter().enumerate() {
            let bank = build_filter_bank(t, k, bk, DEFAULT_TOL_EIG).unwrap();
            let ch = bank_checks(&bank, hk);
            if t == 64 {
                c0[idx] = ch.max_l1_ratio;
            }
            let l1_ok = ch.max_l1_ratio <= 2.0 * c0[idx];
            let mut ok = ch.ortho <= 1e-8 && ch.residual <= 1e-10 && l1_ok;
            let mut extra = String::new();
            if hk == HankelKind::N {
                let trace: f64 = (1..=t - 2).map(|i| hankel_entry(HankelKind::N, i, i)).sum();
                let log_t = (t as f64).ln();
                let decay_ok = bank.eigenvalues().iter().take(20).enumerate().all(|(j, s)| *s <= 1.5f64.min(1e6 * c.powf(-((j + 1) as f64) / log_t)));
                let mut corr: f64 = 0.0;
                for a in 0..=1000 {
                    let mu = impulse_vector(a as f64 / 1000.0, t - 2, ImpulseKind::Squared).unwrap().values;
                    for i in 0..k {
                        let d: f64 = bank.filter(i).iter().zip(&mu).map(|(x, y)| x * y).sum();
                        corr = corr.max(d.abs() / (6f64.powf(0.25) * bank.eigenvalues()[i].powf(0.25)));
                    }
                }
                ok &= trace < 1.5 && decay_ok && corr <= 1.0;
                extra = format!(" trace {trace:.4} decay {decay_ok} corr/bound {corr:.3}");
            }
            pass &= ok;
            details.push(format!("T={t} {}: ortho {:.1e} resid {:.1e} l1 {:.3}/C0 {:.3}{extra}", bk.as_str(), ch.ortho, ch.residual, ch.max_l1_ratio, c0[idx]));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 60.0;
    rep.line("2 eigen suite", pass, true, details.join("; "), secs);
}

fn tensor_identity(rep: &mut Report) {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for alpha in [0.1, 0.5, 0.9, 0.99] {
        for l in [4usize, 8, 16] {
            let long = impulse_vector(alpha, l * l, ImpulseKind::Plain).unwrap().values;
            let a = impulse_vector(alpha, l, ImpulseKind::Plain).unwrap().values;
            let b = impulse_vector(alpha.powi(l as i32), l, ImpulseKind::Plain).unwrap().values;
            let s = 1.0 / (1.0 - alpha.powi(l as i32));
            for (x, y) in long.iter().zip(kron(&a, &b)) {
                worst = worst.max((x - s * y).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    rep.line("3 tensor identity", worst <= 1e-12 && secs < 1.0, true, format!("max error {worst:.1e} (<= 1e-12)"), secs);
}

fn lcg(state: &mut u64) -> f64 {
    *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
    (*state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
}

fn gradients(rep: &mut Report) {
    let start = Instant::now();
    let variants = [Variant::Vanilla, Variant::TwoAr, Variant::Tensor];
    let mut worst: f64 = 0.0;
    let mut state = 7u64;
    for case in 0..20 {
        let variant = variants[case % 3];
        let t_len = 10 + 2 * case;
        let k = if variant == Variant::Tensor { 2 } else { 3 + case % 4 };
        let l = 1 + (case * 7) % t_len;
        let (d_in, d_out) = (1 + case % 3, 1 + (case / 3) % 3);
        let spec = PredictorSpec::new(variant, t_len, l, k, 1.0).unwrap();
        let bank = sflen::bank_for(variant, t_len, k).unwrap();
        let eig: Vec<f64> = (0..5).map(|i| 0.5 + 0.1 * i as f64).collect();
        let sys = make_random_system(5, d_in, d_out, &eig, case as u64, DKind::Zero).unwrap();
        let u = gen_inputs(InputKind::UnitSphere, d_in, t_len, case as u64).unwrap();
        let y = simulate(&sys, &u, None).unwrap();
        let f = precompute_features(&spec, &slot_kernels(&spec, &bank).unwrap(), &u.values).unwrap();
        let mut m = PredictorState::zeros(&spec, d_in, d_out);
        for s in &mut m.m {
            s.as_mut_slice().iter_mut().for_each(|v| *v = lcg(&mut state));
        }
        let t = t_len - case % 3;
        let loss = |st: &PredictorState| -> f64 {
            let p = predict(st, &spec, &f, &y, t).unwrap();
            p.iter().zip(y.get(t - 1)).map(|(a, b)| (a - b) * (a - b)).sum()
        };
        let g = loss_and_grad(&predict(&m, &spec, &f, &y, t).unwrap(), y.get(t - 1), &f.at(t));
        let h = 1e-6;
        let mut num = 0.0;
        let mut den = 0.0;
        for s in 0..m.m.len() {
            for e in 0..d_in * d_out {
                let mut p = m.clone();
                p.m[s].as_mut_slice()[e] += h;
                let mut q = m.clone();
                q.m[s].as_mut_slice()[e] -= h;
                let fd = (loss(&p) - loss(&q)) / (2.0 * h);
                let an = g.gradient[s].as_slice()[e];
                num += (fd - an) * (fd - an);
                den += an * an;
            }
        }
        worst = worst.max(num.sqrt() / den.sqrt().max(1e-12));
    }
    let secs = start.elapsed().as_secs_f64();
    rep.line("4 gradient correctness", worst <= 1e-6 && secs < 30.0, true, format!("20 instances, worst relative error {worst:.1e} (<= 1e-6)"), secs);
}

fn representation(rep: &mut Report) {
    let start = Instant::now();
    let t_len = 512;
    let eig = sample_region(&hug_band(t_len, HUG_Q).unwrap(), 32, 101).unwrap();
    let sys = make_random_system(32, 8, 8, &eig, 102, DKind::Zero).unwrap();
    let u = gen_inputs(InputKind::UnitSphere, 8, t_len, 103).unwrap();
    let y = simulate(&sys, &u, None).unwrap();
    let mut res = Vec::new();
    for k in [4, 8, 16, 24] {
        let spec = PredictorSpec::new(Variant::Vanilla, t_len, t_len, k, 1e6).unwrap();
        let bank = build_filter_bank(t_len, k, BankKind::VanillaH, DEFAULT_TOL_EIG).unwrap();
        res.push(solve_comparator(&spec, &bank, &u.values, &y, 1e-12).unwrap().total_loss);
    }
    let inversions = res.windows(2).filter(|w| w[1] > w[0]).count();
    let ratio = res[3] / res[0];
    let secs = start.elapsed().as_secs_f64();
    let pass = ratio <= 1e-3 && inversions <= 1 && secs < 120.0;
    let shown: Vec<String> = res.iter().map(|v| format!("{v:.2e}")).collect();
    rep.line("5 representation", pass, true, format!("residual at k=4,8,16,24: {} ; k=24/k=4 = {ratio:.1e} (<= 1e-3), inversions {inversions}", shown.join(", ")), secs);
}

fn desk(region: RegionSpec, variant: Variant, qs: &[f64]) -> ExperimentConfig {
    ExperimentConfig {
        q_grid: qs.to_vec(),
        region,
        variant: Wrap(variant),
        r: EXPERIMENT_R,
        eta0: Some(EXPERIMENT_ETA0),
        skip_comparator: true,
        ..ExperimentConfig::desk()
    }
}

fn dichotomy(rep: &mut Report) {
    let start = Instant::now();
    let a = run_sweep(&desk(RegionSpec::A, Variant::Vanilla, &[0.5, 0.875, 1.0]), jobs()).unwrap();
    let b = run_sweep(&desk(RegionSpec::B, Variant::Vanilla, &[0.5]), jobs()).unwrap();
    let c = run_sweep(&desk(RegionSpec::B, Variant::TwoAr, &[0.5]), jobs()).unwrap();
    let all_ok = [&a, &b, &c].iter().all(|s| s.all_succeeded());
    let cond = [&a, &b, &c].iter().all(|s| s.seeds.iter().all(|d| d.as_ref().is_ok_and(|d| d.conditioning.pass)));
    let fw = |s: &sflen::SweepResult, q: f64| s.aggregate_for(q).map_or(f64::NAN, |g| g.final_window);
    let (a_half, a_78, a_one) = (fw(&a, 0.5), fw(&a, 0.875), fw(&a, 1.0));
    let secs = start.elapsed().as_secs_f64();
    let pre = format!("3 seeds, runs ok {all_ok}, conditioning {cond}");
    let pass_a = all_ok && cond && a_78 <= 2.0 * a_one && a_half >= 10.0 * a_one;
    rep.line(
        "6a dichotomy, region A vanilla",
        pass_a,
        true,
        format!("{pre}; final-window loss q=1/2 {a_half:.3e}, q=7/8 {a_78:.3e}, q=1 {a_one:.3e}; 7/8 vs 1 ratio {:.3} (<= 2), 1/2 vs 1 ratio {:.3} (>= 10)", a_78 / a_one, a_half / a_one),
        secs,
    );
    let b_half = fw(&b, 0.5);
    rep.line("6b dichotomy, region B vanilla q=1/2", all_ok && cond && b_half >= 0.1, true, format!("final-window loss {b_half:.3e} (>= 0.1)"), 0.0);
    let c_half = fw(&c, 0.5);
    rep.line("6c dichotomy, region B two-ar q=1/2", all_ok && cond && c_half <= 0.1, true, format!("final-window loss {c_half:.3e} (<= 0.1)"), 0.0);
}

fn regret_sublinearity(rep: &mut Report) {
    let start = Instant::now();
    let mut means = Vec::new();
    let mut details = Vec::new();
    let mut envelope_ok = true;
    let mut all_ok = true;
    for t_len in [1usize << 10, 1 << 12] {
        let cfg = ExperimentConfig {
            horizon: t_len,
            q_grid: vec![HUG_Q],
            r: EXPERIMENT_R,
            eta0: Some(EXPERIMENT_ETA0),
            ..ExperimentConfig::desk()
        };
        let sweep = run_sweep(&cfg, jobs()).unwrap();
        all_ok &= sweep.all_succeeded();
        let regrets: Vec<f64> = sweep.cells.iter().filter_map(|c| c.outcome.as_ref().ok()?.regret.map(|r| r.regret)).collect();
        all_ok &= regrets.len() == cfg.seeds.len();
        let mean = regrets.iter().sum::<f64>() / regrets.len() as f64;
        let t = t_len as f64;
        let normalized = mean / (t.sqrt() * t.ln());
        // worst-case envelope with ‖B‖ = ‖C‖ = 1: 12 k^{3/2} r²
        let envelope = ogd_regret_bound(cfg.k, cfg.r, t_len) / (t.sqrt() * t.ln());
        envelope_ok &= normalized <= envelope;
        details.push(format!("T={t_len}: mean regret {mean:.4}, regret/(sqrt(T) ln T) {normalized:.2e} vs envelope {envelope:.2e}"));
        means.push(mean);
    }
    let ratio = means[1] / means[0];
    let secs = start.elapsed().as_secs_f64();
    rep.line("7 regret sublinearity", all_ok && ratio <= 4.8 && secs < 600.0, true, format!("{}; ratio {ratio:.3} (<= 4.8)", details.join("; ")), secs);
    rep.line("7 normalized regret within envelope", envelope_ok, false, "see line above".into(), 0.0);
}

fn ogd_inequality(rep: &mut Report) {
    let start = Instant::now();
    let mut worst_margin = f64::INFINITY;
    let mut state = 99u64;
    let mut cases = 0;
    for (variant, k, q) in [(Variant::Vanilla, 8, 0.5), (Variant::TwoAr, 8, 0.875), (Variant::Tensor, 3, 1.0)] {
        let t_len = 512;
        let eig = sample_region(&hug_band(t_len, HUG_Q).unwrap(), 16, 5).unwrap();
        let sys = make_random_system(16, 3, 3, &eig, 6, DKind::Zero).unwrap();
        let u = gen_inputs(InputKind::UnitSphere, 3, t_len, 7).unwrap();
        let cond = conditioning_check(&u, conditioning_threshold(&sys, t_len)).unwrap();
        assert!(cond.pass);
        let y = simulate(&sys, &u, None).unwrap();
        let spec = PredictorSpec::new(variant, t_len, context_from_q(t_len, q), k, 1.0).unwrap();
        let bank = sflen::bank_for(variant, t_len, k).unwrap();
        let run = run_online(&spec, &bank, &u.values, &y).unwrap();
        let bound = ogd_regret_bound(spec.slots(), spec.r, t_len);
        let mut points: Vec<Vec<Mat>> = vec![PredictorState::zeros(&spec, 3, 3).m];
        points.push(solve_comparator_with_context(&spec, &bank, &u.values, &y, 1e-9).unwrap().m_star);
        for _ in 0..5 {
            points.push(
                (0..spec.slots())
                    .map(|_| {
                        let mut m = Mat::from_fn(3, 3, |_, _| lcg(&mut state));
                        let n = m.frobenius_norm();
                        m.scale(spec.r * (lcg(&mut state) + 0.5) / n);
                        m
                    })
                    .collect(),
            );
        }
        for m in &points {
            let fixed: f64 = fixed_losses(&spec, &bank, &u.values, &y, m).unwrap().iter().sum();
            worst_margin = worst_margin.min(bound - (run.total_loss() - fixed));
            cases += 1;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    rep.line("8 OGD regret inequality", worst_margin >= 0.0 && secs < 120.0, true, format!("{cases} comparisons over 3 variants, smallest slack {worst_margin:.3e} (>= 0)"), secs);
}

fn main() {
    // libtest-style filtering arguments are ignored; the suite always runs whole
    let mut rep = Report { hard_failures: Vec::new() };
    closed_forms(&mut rep);
    eigen_suite(&mut rep);
    tensor_identity(&mut rep);
    gradients(&mut rep);
    representation(&mut rep);
    dichotomy(&mut rep);
    regret_sublinearity(&mut rep);
    ogd_inequality(&mut rep);
    if rep.hard_failures.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: {} failed: {}", rep.hard_failures.len(), rep.hard_failures.join(", "));
        std::process::exit(1);
    }
}
