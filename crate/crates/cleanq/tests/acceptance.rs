//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its measured numbers.
//!
//! Run with:
//!
//! ```text
//! cargo test -p cleanq --test acceptance -- --nocapture
//! ```

use std::time::Instant;

use rayon::prelude::*;

use cleanq::channels::{
    apply_unitary, discarding_channel, entry00_direct, measuring_channel, partial_trace,
    partial_trace_matrix, pure_outcome_probability,
};
use cleanq::circuits::{
    assemble, haar_random, hadamard_test, random_density_matrix, simulate_sequential, unfold,
    Circuit, Gate, RepeatedInteractionPlan, TracePart,
};
use cleanq::linalg::UnitaryMatrix;
use cleanq::registers::{computational_zero, dqc_input, maximally_mixed, RegisterLayout};
use cleanq::seeding::derive;
use cleanq::thermo::{
    beta_threshold, gibbs_state, partition_function, perturb, spectral_gap, trace_distance,
    von_neumann_entropy, Hamiltonian,
};
use cleanq::verify::{random_gapped_diagonal_hamiltonian, swap_forwarding};

const SEED: u64 = 0xacce97;

fn pow2(e: i64) -> f64 {
    (2.0f64).powi(e as i32)
}

/// Structured circuits injected beside the Haar ensembles.
fn structured(layout: &RegisterLayout) -> Vec<UnitaryMatrix> {
    let n = layout.n();
    let mut layer = Circuit::new(n).unwrap();
    for w in 0..n {
        layer.push(Gate::H(w)).unwrap();
    }
    vec![
        UnitaryMatrix::identity(1 << n),
        swap_forwarding(layout).unwrap(),
        assemble(&layer).unwrap(),
    ]
}

/// Criterion 1: for every layout with n <= 8 and d > a, over 1000 Haar
/// circuits per layout, the discard-channel (0,0) entry equals the direct
/// entry sum to 1e-10 and respects the 2^(a-d) bound to 1e-9, within five
/// minutes.
#[test]
fn acceptance_01_punchline_identity_and_bound() {
    let started = Instant::now();
    let trials = 1000usize;
    let mut layouts_covered = 0usize;
    let mut worst_dev = 0.0f64;
    let mut worst_excess = f64::NEG_INFINITY;

    for n in 1..=8usize {
        // The same 1000 Haar samples serve every layout of this width; the
        // conjugation is hoisted per (U, a) and the cheap partial trace and
        // entry sum run per c.
        let inputs: Vec<_> = (0..n)
            .map(|a| {
                let layout = RegisterLayout::new(a, n - a, 0, n).unwrap();
                dqc_input(&layout).unwrap()
            })
            .collect();
        let layouts: Vec<Vec<RegisterLayout>> = (0..n)
            .map(|a| {
                (0..n - a)
                    .map(|c| RegisterLayout::new(a, n - a, c, n - c).unwrap())
                    .collect()
            })
            .collect();

        let (dev, excess) = (0..trials)
            .into_par_iter()
            .map(|t| {
                let u = haar_random(n, derive(SEED, n as u64, t as u64)).unwrap();
                let mut dev = 0.0f64;
                let mut excess = f64::NEG_INFINITY;
                for a in 0..n {
                    let conjugated = apply_unitary(&inputs[a], &u).unwrap();
                    for (c, layout) in layouts[a].iter().enumerate() {
                        let entry = partial_trace(&conjugated, c).unwrap().entry(0, 0).re;
                        let direct = entry00_direct(&u, layout).unwrap();
                        dev = dev.max((entry - direct).abs());
                        excess = excess.max(entry - pow2(a as i64 - layout.d() as i64));
                        if t == 0 {
                            // The hoisted pipeline is the channel pipeline.
                            let composed =
                                discarding_channel(&u, layout, &inputs[a]).unwrap().entry(0, 0).re;
                            assert_eq!(composed, entry);
                        }
                    }
                }
                (dev, excess)
            })
            .reduce(
                || (0.0, f64::NEG_INFINITY),
                |x, y| (x.0.max(y.0), x.1.max(y.1)),
            );
        worst_dev = worst_dev.max(dev);
        worst_excess = worst_excess.max(excess);
        layouts_covered += layouts.iter().map(Vec::len).sum::<usize>();
    }

    let elapsed = started.elapsed();
    assert!(worst_dev <= 1e-10, "identity deviation {worst_dev:.3e}");
    assert!(worst_excess <= 1e-9, "bound excess {worst_excess:.3e}");
    assert!(
        elapsed.as_secs_f64() <= 300.0,
        "runtime {:.1}s exceeds five minutes",
        elapsed.as_secs_f64()
    );
    println!(
        "ACCEPTANCE 01 punchline identity: PASS ({layouts_covered} layouts x {trials} trials, \
         max identity dev {worst_dev:.2e}, max bound excess {worst_excess:.2e}, {:.1}s)",
        elapsed.as_secs_f64()
    );
}

/// Criterion 2: SWAP forwarding reaches entry00 = 2^(a-d) within 1e-12 for
/// (a,d) in {(1,2), (1,3), (2,3)}.
#[test]
fn acceptance_02_entry_saturation() {
    for (a, b, c, d) in [(1usize, 2usize, 1usize, 2usize), (1, 3, 1, 3), (2, 3, 2, 3)] {
        let layout = RegisterLayout::new(a, b, c, d).unwrap();
        let u = swap_forwarding(&layout).unwrap();
        let expected = pow2(a as i64 - d as i64);
        let direct = entry00_direct(&u, &layout).unwrap();
        let channel = discarding_channel(&u, &layout, &dqc_input(&layout).unwrap())
            .unwrap()
            .entry(0, 0)
            .re;
        assert!(
            (direct - expected).abs() <= 1e-12,
            "direct entry {direct} vs {expected} at (a,d)=({a},{d})"
        );
        assert!(
            (channel - expected).abs() <= 1e-12,
            "channel entry {channel} vs {expected} at (a,d)=({a},{d})"
        );
    }
    println!("ACCEPTANCE 02 entry saturation: PASS (SWAP forwarding exact at (1,2), (1,3), (2,3))");
}

const MEASURE_LAYOUTS: [(usize, usize, usize, usize); 6] = [
    (1, 2, 1, 2),
    (1, 3, 1, 3),
    (2, 3, 2, 3),
    (1, 4, 2, 3),
    (2, 2, 1, 3),
    (1, 5, 1, 5),
];

/// Criterion 3: exact-pure-outcome probability over 1000 Haar samples plus
/// structured circuits stays within 2^(a-d) + 1e-9, and so does the
/// per-trial entry chain sum.
#[test]
fn acceptance_03_measurement_bound() {
    let trials = 1000usize;
    let mut worst_margin = f64::INFINITY;
    for (a, b, c, d) in MEASURE_LAYOUTS {
        let layout = RegisterLayout::new(a, b, c, d).unwrap();
        let rho = dqc_input(&layout).unwrap();
        let target = computational_zero(d).unwrap();
        let bound = pow2(a as i64 - d as i64);

        let eval = |u: &UnitaryMatrix| -> (f64, f64) {
            let outcomes = measuring_channel(u, &layout, &rho).unwrap();
            let p = pure_outcome_probability(&outcomes, &target, 0.0).unwrap();
            let chain: f64 = outcomes
                .iter()
                .filter_map(|o| o.post_state.as_ref().map(|s| o.probability * s.entry(0, 0).re))
                .sum();
            (p, chain)
        };

        let (max_p, max_chain) = (0..trials)
            .into_par_iter()
            .map(|t| {
                let u = haar_random(layout.n(), derive(SEED, 0x300 + a as u64 * 16 + c as u64, t as u64))
                    .unwrap();
                eval(&u)
            })
            .reduce(
                || (f64::NEG_INFINITY, f64::NEG_INFINITY),
                |x, y| (x.0.max(y.0), x.1.max(y.1)),
            );
        let (mut max_p, mut max_chain) = (max_p, max_chain);
        for u in structured(&layout) {
            let (p, chain) = eval(&u);
            max_p = max_p.max(p);
            max_chain = max_chain.max(chain);
        }

        assert!(
            max_p <= bound + 1e-9,
            "pure-outcome probability {max_p} above bound {bound} at ({a},{b},{c},{d})"
        );
        assert!(
            max_chain <= bound + 1e-9,
            "entry chain {max_chain} above bound {bound} at ({a},{b},{c},{d})"
        );
        worst_margin = worst_margin.min(bound - max_p);
    }
    println!(
        "ACCEPTANCE 03 measurement bound: PASS ({} layouts x 1000 trials, min margin {worst_margin:.3e})",
        MEASURE_LAYOUTS.len()
    );
}

/// Criterion 4: 1000 perturbed pairs per eps in {0.05, 0.1, 0.25} on up to
/// six qubits keep |(tr_F(σ-σ'))_{0,0}| within 2 eps + 1e-9.
#[test]
fn acceptance_04_lemma00() {
    let trials = 1000usize;
    for (i, eps) in [0.05f64, 0.1, 0.25].into_iter().enumerate() {
        let worst = (0..trials)
            .into_par_iter()
            .map(|t| {
                let n = 3 + t % 4; // up to six qubits
                let f = t % (n + 1);
                let sigma =
                    random_density_matrix(n, derive(SEED, 0x400 + i as u64, 2 * t as u64)).unwrap();
                let (sigma2, _) =
                    perturb(&sigma, eps, derive(SEED, 0x400 + i as u64, 2 * t as u64 + 1)).unwrap();
                let diff = sigma.matrix().sub(sigma2.matrix());
                partial_trace_matrix(&diff, f).unwrap().get(0, 0).norm()
            })
            .reduce(|| 0.0, f64::max);
        assert!(
            worst <= 2.0 * eps + 1e-9,
            "entry shift {worst} above 2*{eps}"
        );
        println!(
            "ACCEPTANCE 04 lemma00 eps={eps}: PASS (1000 pairs, max entry shift {worst:.4} <= {})",
            2.0 * eps
        );
    }
}

/// Criterion 5: the robust measurement bound (2^(a-d)+2eps)/(1-2eps') holds
/// over the same ensembles for (eps, eps') in {(0,0.1), (0.05,0.1), (0.1,0.2)}.
#[test]
fn acceptance_05_robust_measurement_bound() {
    let trials = 1000usize;
    for (cfg, (eps, eps_prime)) in [(0.0f64, 0.1f64), (0.05, 0.1), (0.1, 0.2)].into_iter().enumerate()
    {
        let mut worst_margin = f64::INFINITY;
        for (a, b, c, d) in MEASURE_LAYOUTS {
            let layout = RegisterLayout::new(a, b, c, d).unwrap();
            let rho = dqc_input(&layout).unwrap();
            let target = computational_zero(d).unwrap();
            let bound = (pow2(a as i64 - d as i64) + 2.0 * eps) / (1.0 - 2.0 * eps_prime);

            let stream = 0x500 + cfg as u64 * 64 + a as u64 * 8 + c as u64;
            let eval = |u: &UnitaryMatrix, pseed: u64| -> f64 {
                let (tilde, _) = perturb(&rho, eps, pseed).unwrap();
                let outcomes = measuring_channel(u, &layout, &tilde).unwrap();
                pure_outcome_probability(&outcomes, &target, eps_prime).unwrap()
            };

            let mut max_p = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let u = haar_random(layout.n(), derive(SEED, stream, t as u64)).unwrap();
                    eval(&u, derive(SEED, stream ^ 0xffff, t as u64))
                })
                .reduce(|| f64::NEG_INFINITY, f64::max);
            for (i, u) in structured(&layout).into_iter().enumerate() {
                max_p = max_p.max(eval(&u, derive(SEED, stream ^ 0xaaaa, i as u64)));
            }

            assert!(
                max_p <= bound + 1e-9,
                "robust probability {max_p} above bound {bound} at ({a},{b},{c},{d}), eps={eps}, eps'={eps_prime}"
            );
            worst_margin = worst_margin.min(bound - max_p);
        }
        println!(
            "ACCEPTANCE 05 robust bound (eps={eps}, eps'={eps_prime}): PASS (min margin {worst_margin:.3e})"
        );
    }
}

/// Criterion 6: Gibbs closed forms on 100 random gapped diagonal
/// Hamiltonians up to four qubits, plus the exact single-qubit worked case.
#[test]
fn acceptance_06_gibbs_closed_forms() {
    let mut worst_identity = 0.0f64;
    for t in 0..100u64 {
        let d = 1 + (t as usize) % 4;
        let (h, gamma) = random_gapped_diagonal_hamiltonian(d, derive(SEED, 0x600, t)).unwrap();
        let info = spectral_gap(&h).unwrap();
        let ground = info.ground_projector().unwrap();

        // Distance identity at a fixed moderate temperature.
        let beta = 1.7;
        let dist = trace_distance(&gibbs_state(&h, beta).unwrap(), &ground).unwrap();
        let z = partition_function(&h, beta).unwrap();
        worst_identity = worst_identity.max((dist - (1.0 - 1.0 / z)).abs());

        // Just above the threshold the distance drops below eps'.
        let eps_prime = 0.05 + 0.4 * ((t % 9) as f64 / 9.0);
        let threshold = beta_threshold(d, gamma, eps_prime).unwrap();
        let dist = trace_distance(&gibbs_state(&h, threshold * 1.01).unwrap(), &ground).unwrap();
        assert!(
            dist < eps_prime,
            "distance {dist} not below {eps_prime} past the threshold (trial {t})"
        );
    }
    assert!(worst_identity <= 1e-10, "identity deviation {worst_identity:.3e}");

    // Worked single-qubit case: H = diag(0,1) at beta = ln 6.
    let h = Hamiltonian::diagonal(1, &[0.0, 1.0]).unwrap();
    let g = gibbs_state(&h, 6.0f64.ln()).unwrap();
    let dist = trace_distance(&g, &computational_zero(1).unwrap()).unwrap();
    assert!((dist - 1.0 / 7.0).abs() <= 1e-12, "distance {dist} vs 1/7");

    println!(
        "ACCEPTANCE 06 gibbs closed forms: PASS (100 Hamiltonians, max identity dev {worst_identity:.2e}, worked case |d - 1/7| <= 1e-12)"
    );
}

/// Criterion 7: entropy suite — input entropy b, unitary invariance,
/// Araki-Lieb, and the chain consequence H(tr_C U[rho]) >= b - c.
#[test]
fn acceptance_07_entropy_suite() {
    // H(dqc_input(a,b)) = b.
    for (a, b) in [(0usize, 3usize), (1, 1), (1, 3), (2, 2), (3, 1), (3, 0)] {
        if a + b == 0 {
            continue;
        }
        let layout = RegisterLayout::new(a, b, a, b).unwrap();
        let h = von_neumann_entropy(&dqc_input(&layout).unwrap());
        assert!((h - b as f64).abs() <= 1e-9, "H = {h} vs b = {b}");
    }

    // Unitary invariance over 500 random pairs.
    let worst_invariance = (0..500usize)
        .into_par_iter()
        .map(|t| {
            let n = 2 + t % 2;
            let sigma = random_density_matrix(n, derive(SEED, 0x700, t as u64)).unwrap();
            let u = haar_random(n, derive(SEED, 0x701, t as u64)).unwrap();
            let evolved = apply_unitary(&sigma, &u).unwrap();
            (von_neumann_entropy(&sigma) - von_neumann_entropy(&evolved)).abs()
        })
        .reduce(|| 0.0, f64::max);
    assert!(worst_invariance <= 1e-9, "invariance dev {worst_invariance:.3e}");

    // Araki-Lieb on 500 random states up to six qubits.
    let worst_araki = (0..500usize)
        .into_par_iter()
        .map(|t| {
            let n = 2 + t % 5;
            let sigma = random_density_matrix(n, derive(SEED, 0x702, t as u64)).unwrap();
            let c = t % (n + 1);
            let (lhs, rhs) = cleanq::thermo::araki_lieb_check(&sigma, c).unwrap();
            lhs - rhs
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    assert!(worst_araki <= 1e-9, "Araki-Lieb excess {worst_araki:.3e}");

    // Chain consequence on 500 Haar trials.
    let mut worst_slack = f64::NEG_INFINITY;
    for (count, (a, b, c, d)) in [(300usize, (1usize, 3usize, 1usize, 3usize)), (200, (1, 2, 1, 2))] {
        let layout = RegisterLayout::new(a, b, c, d).unwrap();
        let rho = dqc_input(&layout).unwrap();
        let slack = (0..count)
            .into_par_iter()
            .map(|t| {
                let u = haar_random(layout.n(), derive(SEED, 0x703 + a as u64, t as u64)).unwrap();
                let evolved = apply_unitary(&rho, &u).unwrap();
                let h_out = von_neumann_entropy(&partial_trace(&evolved, c).unwrap());
                (b as f64 - c as f64) - h_out
            })
            .reduce(|| f64::NEG_INFINITY, f64::max);
        worst_slack = worst_slack.max(slack);
    }
    assert!(worst_slack <= 1e-8, "entropy chain slack {worst_slack:.3e}");

    println!(
        "ACCEPTANCE 07 entropy suite: PASS (invariance {worst_invariance:.2e}, araki-lieb excess {worst_araki:.2e}, chain slack {worst_slack:.2e})"
    );
}

/// Criterion 8: the staircase reaches purity exactly at step n, never
/// before, with dyadic entries at every step, and the unfolded circuit
/// agrees with sequential simulation.
#[test]
fn acceptance_08_staircase() {
    for n in 2..=4usize {
        let plan = RepeatedInteractionPlan::staircase(n).unwrap();
        for k in 1..=n {
            let prefix = plan.prefix(k).unwrap();
            let sequential = simulate_sequential(&prefix, &maximally_mixed(n).unwrap()).unwrap();
            let (circuit, layout) = unfold(&prefix).unwrap();
            let unfolded =
                discarding_channel(&assemble(&circuit).unwrap(), &layout, &dqc_input(&layout).unwrap())
                    .unwrap();
            let agreement = sequential.matrix().max_abs_diff(unfolded.matrix());
            assert!(agreement <= 1e-10, "pipelines differ by {agreement:.3e} at n={n}, k={k}");

            let entry = unfolded.entry(0, 0).re;
            let expected = pow2(k as i64 - n as i64);
            assert!(
                (entry - expected).abs() <= 1e-10,
                "entry {entry} vs {expected} at n={n}, k={k}"
            );

            let purity = unfolded.purity();
            if k == n {
                assert!(purity >= 1.0 - 1e-10, "purity {purity} at final step, n={n}");
            } else {
                assert!(purity < 1.0 - 1e-3, "purity {purity} too high at step {k} of {n}");
            }
        }
    }
    println!("ACCEPTANCE 08 staircase: PASS (n in 2..=4: dyadic entries, purity exactly at step n)");
}

/// Criterion 9: Hadamard test — exact for the identity; for Pauli Z and a
/// Haar circuit on two qubits, 1e5 shots land within 0.02 of the exact
/// normalized trace in at least 95 of 100 seeded repetitions, within a
/// minute.
#[test]
fn acceptance_09_hadamard_test() {
    let started = Instant::now();

    let identity = UnitaryMatrix::identity(8);
    for seed in 0..5u64 {
        assert_eq!(
            hadamard_test(&identity, 1000, seed, TracePart::Real).unwrap(),
            1.0
        );
    }

    let mut z_circuit = Circuit::new(1).unwrap();
    z_circuit.push(Gate::S(0)).unwrap();
    z_circuit.push(Gate::S(0)).unwrap();
    let z = assemble(&z_circuit).unwrap();
    let haar = haar_random(2, derive(SEED, 0x900, 0)).unwrap();

    for (name, u) in [("pauli-z", &z), ("haar-n2", &haar)] {
        let exact = u.matrix().trace().re / u.dim() as f64;
        let hits = (0..100u64)
            .into_par_iter()
            .filter(|&rep| {
                let estimate =
                    hadamard_test(u, 100_000, derive(SEED, 0x901, rep), TracePart::Real).unwrap();
                (estimate - exact).abs() <= 0.02
            })
            .count();
        assert!(hits >= 95, "{name}: only {hits}/100 repetitions within 0.02");
        println!("ACCEPTANCE 09 hadamard test ({name}): PASS ({hits}/100 within 0.02 of {exact:.4})");
    }

    let elapsed = started.elapsed();
    assert!(elapsed.as_secs_f64() <= 60.0, "runtime {:.1}s", elapsed.as_secs_f64());
    println!(
        "ACCEPTANCE 09 hadamard test: PASS (identity exact, runtime {:.1}s)",
        elapsed.as_secs_f64()
    );
}

/// Criterion 10: `suite --seed 0` is byte-deterministic.
#[test]
fn acceptance_10_suite_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("suite1.json");
    let out2 = dir.path().join("suite2.json");
    for out in [&out1, &out2] {
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_cleanq"))
            .args(["suite", "--seed", "0", "--out"])
            .arg(out)
            .status()
            .expect("running the suite binary");
        assert!(status.success(), "suite exited with {status}");
    }
    let bytes1 = std::fs::read(&out1).unwrap();
    let bytes2 = std::fs::read(&out2).unwrap();
    assert_eq!(bytes1, bytes2, "suite outputs differ between runs");

    // Sanity: the canonical output parses and covers every bound.
    let suite: cleanq::verify::SuiteReport = serde_json::from_slice(&bytes1).unwrap();
    assert_eq!(suite.violations, 0);
    for theorem in cleanq::verify::ALL_THEOREMS {
        assert!(
            suite.reports.iter().any(|r| r.theorem == theorem),
            "suite is missing {theorem:?}"
        );
    }
    println!(
        "ACCEPTANCE 10 determinism: PASS (two runs byte-identical, {} bytes, {} reports, 0 violations)",
        bytes1.len(),
        suite.reports.len()
    );
}
