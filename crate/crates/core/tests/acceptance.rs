//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use itertools::Itertools;
use num_rational::Ratio;
use qauth_core::authproto::{
    auth_encode, auth_verify, keygen, pauli_attack_analyze, probe_state, purity_protocol_analyze,
    soundness_exact, AuthKey, Scheme, Verdict,
};
use qauth_core::densesim::{
    bob_output, case_seed, ciphertext_density, ciphertext_density_with_reference,
    dense_pauli_outcome, phase_attack_demo, product_state_soundness_demo, random_adversaries,
    random_density_pair, soundness_measure, tensor_power_distance_demo, trace_distance,
    AdversaryChannel,
};
use qauth_core::gf2;
use qauth_core::ptcodes::{classify_error, epsilon_exact, ErrorClass, PurityTestingFamily};
use qauth_core::state::{kron, CVector, C64};
use qauth_core::{DenseState, DensityMatrix, PauliVector};
use rayon::prelude::*;

type Rational = Ratio<u64>;
type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

const SOUNDNESS_PARAMS: [(u32, u32); 4] = [(2, 1), (2, 2), (3, 1), (2, 3)];

fn bound_oracle(r: u32, s: u32) -> Rational {
    Rational::new(2 * r as u64, (1u64 << s) + 1)
}

fn to_f64(q: Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn c1_soundness_bound() -> Outcome {
    let mut parts = Vec::new();
    for (r, s) in SOUNDNESS_PARAMS {
        let fam = PurityTestingFamily::build(r, s).map_err(|e| e.to_string())?;
        let eps = epsilon_exact(&fam).map_err(|e| e.to_string())?;
        let bound = bound_oracle(r, s);
        ensure(eps <= bound, || format!("({r},{s}): {eps} > {bound}"))?;
        parts.push(format!("({r},{s}) {eps}<={bound}"));
    }
    Ok(parts.join(", "))
}

fn c2_undetected_ceiling() -> Outcome {
    let mut parts = Vec::new();
    for (r, s) in SOUNDNESS_PARAMS {
        let fam = PurityTestingFamily::build(r, s).map_err(|e| e.to_string())?;
        let n = fam.n();
        let worst = (1u64..1 << (2 * n))
            .into_par_iter()
            .map(|bits| {
                let e = PauliVector::new(n, bits).unwrap();
                fam.codes()
                    .iter()
                    .filter(|c| classify_error(c, e).unwrap() == ErrorClass::Undetected)
                    .count()
            })
            .max()
            .unwrap_or(0);
        ensure(worst <= 2 * r as usize, || {
            format!("({r},{s}): {worst} codes miss one error")
        })?;
        parts.push(format!("({r},{s}) max {worst}<={}", 2 * r));
    }
    Ok(parts.join(", "))
}

fn c3_general_position() -> Outcome {
    let mut parts = Vec::new();
    for r in 1..=2u32 {
        for s in 1..=3u32 {
            let fam = PurityTestingFamily::build(r, s).map_err(|e| e.to_string())?;
            let size = (2 * r as usize).min(fam.len());
            let mut subsets = 0usize;
            for combo in fam.codes().iter().combinations(size) {
                let rows: Vec<u64> = combo
                    .iter()
                    .flat_map(|c| c.generators().iter().copied())
                    .collect();
                let rank = gf2::rank(&rows);
                ensure(rank == size * s as usize, || {
                    format!("({r},{s}): rank {rank} < {}", size * s as usize)
                })?;
                subsets += 1;
            }
            parts.push(format!("({r},{s}) {subsets}x{size}"));
        }
    }
    Ok(parts.join(", "))
}

fn scheme22() -> Result<Scheme, String> {
    Scheme::build(2, 2).map_err(|e| e.to_string())
}

fn c4_completeness() -> Outcome {
    let sc = scheme22()?;
    let keys: Vec<AuthKey> = sc.all_keys().collect();
    ensure(keys.len() == 320, || format!("{} keys", keys.len()))?;
    let probes: Vec<DenseState> = (0..4)
        .map(|i| DenseState::basis(2, i).unwrap())
        .chain((0..3).map(|i| probe_state(2, i).unwrap()))
        .collect();
    let worst = keys
        .par_iter()
        .map(|k| {
            probes
                .iter()
                .map(|psi| {
                    let sent = auth_encode(&sc, k, psi).unwrap();
                    let (v, out) = auth_verify(&sc, k, &sent).unwrap();
                    if v != Verdict::Accept {
                        f64::INFINITY
                    } else {
                        (1.0 - out.overlap_sq(psi).unwrap()).abs()
                    }
                })
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    ensure(worst < 1e-10, || format!("worst infidelity {worst:e}"))?;
    Ok(format!(
        "320 keys x {} messages, worst infidelity {worst:.1e}",
        probes.len()
    ))
}

fn c5_dense_symbolic() -> Outcome {
    let sc = scheme22()?;
    sc.dense().map_err(|e| e.to_string())?;
    let keys: Vec<AuthKey> = sc.all_keys().collect();
    let n = sc.n();
    let mismatches: Vec<String> = keys
        .par_iter()
        .flat_map_iter(|key| {
            let sc = &sc;
            (0..1u64 << (2 * n)).filter_map(move |bits| {
                let e = PauliVector::new(n, bits).unwrap();
                let sym = pauli_attack_analyze(sc, key, e).unwrap();
                match dense_pauli_outcome(sc, key, e) {
                    Ok(d) if d == sym => None,
                    Ok(d) => Some(format!("k={} e={e}: dense {d:?} symbolic {sym:?}", key.k)),
                    Err(err) => Some(format!("k={} e={e}: {err}", key.k)),
                }
            })
        })
        .collect();
    ensure(mismatches.is_empty(), || {
        format!("{} mismatches, first {}", mismatches.len(), mismatches[0])
    })?;
    Ok(format!("{} keys x 256 attacks agree", keys.len()))
}

fn c6_random_unitaries() -> Outcome {
    let sc = scheme22()?;
    let eps = to_f64(epsilon_exact(sc.family()).map_err(|e| e.to_string())?);
    let advs = random_adversaries(sc.n(), 100, 42).map_err(|e| e.to_string())?;
    let mut worst = f64::INFINITY;
    for (i, adv) in advs.iter().enumerate() {
        let psi = probe_state(sc.m(), case_seed(42, i as u64)).unwrap();
        let v = soundness_measure(&sc, adv, &psi).map_err(|e| e.to_string())?;
        ensure(v >= 1.0 - eps - 1e-9, || {
            format!("case {i}: {v} < {}", 1.0 - eps)
        })?;
        worst = worst.min(v);
    }
    Ok(format!(
        "100 cases, min Tr(P1 rho)={worst:.6} >= {:.6}",
        1.0 - eps
    ))
}

fn c7_encryption() -> Outcome {
    let sc = scheme22()?;
    let dim = 1usize << sc.n();
    let mixed = DensityMatrix::maximally_mixed(dim);
    let probes: Vec<DenseState> = vec![
        DenseState::zero(2).unwrap(),
        DenseState::basis(2, 3).unwrap(),
        DenseState::normalized(CVector::from_vec(vec![C64::new(0.5, 0.0); 4])).unwrap(),
        probe_state(2, 9).unwrap(),
        probe_state(2, 10).unwrap(),
    ];
    let rhos: Vec<DensityMatrix> = probes
        .iter()
        .map(|p| ciphertext_density(&sc, p).unwrap())
        .collect();
    let mut worst: f64 = 0.0;
    for rho in &rhos {
        worst = worst.max((rho.matrix() - mixed.matrix()).camax());
    }
    ensure(worst < 1e-10, || format!("max entry deviation {worst:e}"))?;
    let mut worst_d: f64 = 0.0;
    for (a, b) in rhos.iter().tuple_combinations() {
        worst_d = worst_d.max(trace_distance(a, b).unwrap());
    }
    ensure(worst_d < 1e-10, || format!("pairwise distance {worst_d:e}"))?;
    // Message maximally entangled with a 2-qubit reference.
    let mut bell = vec![C64::new(0.0, 0.0); 16];
    for j in 0..4 {
        bell[j + 4 * j] = C64::new(0.5, 0.0);
    }
    let ent = DenseState::new(bell).unwrap();
    let joint = ciphertext_density_with_reference(&sc, &ent, 2).map_err(|e| e.to_string())?;
    let expected = kron(
        &DensityMatrix::maximally_mixed(4).matrix().clone(),
        mixed.matrix(),
    );
    let dev = (joint.matrix() - expected).camax();
    ensure(dev < 1e-10, || format!("entangled probe deviation {dev:e}"))?;
    Ok(format!(
        "{} probes + entangled reference, max deviation {:.1e}, max pairwise D {worst_d:.1e}",
        probes.len(),
        worst.max(dev)
    ))
}

fn c8_purity_equivalence() -> Outcome {
    let sc = scheme22()?;
    let n = sc.n();
    let mut checked = 0usize;
    for key in sc.all_keys().filter(|k| k.x == 0 && k.y.is_zero()) {
        for bits in 0..1u64 << (2 * n) {
            let e = PauliVector::new(n, bits).unwrap();
            let a = purity_protocol_analyze(&sc, key.k, e).map_err(|e| e.to_string())?;
            let b = pauli_attack_analyze(&sc, &key, e).map_err(|e| e.to_string())?;
            ensure(a == b, || format!("k={} e={e}: {a:?} vs {b:?}", key.k))?;
            checked += 1;
        }
    }
    ensure(checked == 5 * 256, || format!("{checked} pairs"))?;
    Ok(format!("{checked} (k, e) pairs agree"))
}

fn c9_phase_attack() -> Outcome {
    let mut margin = f64::INFINITY;
    for seed in 0..100u64 {
        let (a, b) = random_density_pair(2, case_seed(5, seed));
        let r = phase_attack_demo(&a, &b).map_err(|e| e.to_string())?;
        ensure(r.achieved >= r.floor - 1e-9, || {
            format!("seed {seed}: {} < {}", r.achieved, r.floor)
        })?;
        margin = margin.min(r.achieved - r.floor);
    }
    Ok(format!("100 pairs, min margin {margin:.3e}"))
}

fn c10_tensor_power() -> Outcome {
    let rho0 = DenseState::zero(1).unwrap().density();
    let rho1 = DensityMatrix::maximally_mixed(2);
    let mut last = None;
    for t in 1..=10u32 {
        let r = tensor_power_distance_demo(&rho0, &rho1, t).map_err(|e| e.to_string())?;
        ensure((r.delta - 0.5).abs() < 1e-12, || {
            format!("delta {}", r.delta)
        })?;
        let oracle = 1.0 - 0.5f64.powi(t as i32);
        ensure((r.distance - oracle).abs() < 1e-10, || {
            format!("t={t}: D={} oracle {oracle}", r.distance)
        })?;
        if r.bound > 0.0 {
            ensure(r.distance >= r.bound, || {
                format!("t={t}: D={} < {}", r.distance, r.bound)
            })?;
        }
        last = Some(r);
    }
    let r = last.unwrap();
    let formula = 1.0 - 2.0 * (-1.25f64).exp();
    ensure(
        (r.bound - formula).abs() < 1e-12 && (r.bound - 0.427).abs() < 1e-3,
        || format!("t=10 bound {}", r.bound),
    )?;
    Ok(format!(
        "t=1..10, t=10: D={:.6} >= {:.6}",
        r.distance, r.bound
    ))
}

/// Accept fraction `a` and intact-accept fraction `g` of one copy under a
/// Pauli attack on `|0…0⟩`.
fn copy_fractions(sc: &Scheme, e: PauliVector) -> (f64, f64) {
    let m = sc.m();
    let rep = soundness_exact(sc, e).unwrap();
    let k = rep.outcomes.len() as f64;
    let acc = rep.outcomes.iter().filter(|o| o.verdict == Verdict::Accept);
    let a = acc.clone().count() as f64 / k;
    let g = acc
        .filter(|o| o.logical_effect & ((1 << m) - 1) == 0)
        .count() as f64
        / k;
    (a, g)
}

fn c11_product_soundness() -> Outcome {
    let sc = Scheme::build(2, 1).map_err(|e| e.to_string())?;
    let n = sc.n();
    let eps = to_f64(epsilon_exact(sc.family()).map_err(|e| e.to_string())?);
    let floor = 1.0 - 2.0 * eps - 1e-8;
    let mask = (1u64 << n) - 1;
    let mut worst = f64::INFINITY;
    let mut pairs = 0;
    for (b1, b2) in (0..1u64 << (2 * n)).cartesian_product(0..1u64 << (2 * n)) {
        let (e1, e2) = (
            PauliVector::new(n, b1).unwrap(),
            PauliVector::new(n, b2).unwrap(),
        );
        let x = (b1 & mask) | ((b2 & mask) << n);
        let z = (b1 >> n) | ((b2 >> n) << n);
        let joint = PauliVector::from_parts(2 * n, x, z).unwrap();
        let rep = product_state_soundness_demo(&sc, &AdversaryChannel::Pauli(joint), 2)
            .map_err(|e| e.to_string())?;
        let ((a1, g1), (a2, g2)) = (copy_fractions(&sc, e1), copy_fractions(&sc, e2));
        let oracle = 1.0 - (a1 * a2 - g1 * g2);
        ensure((rep.value - oracle).abs() < 1e-10, || {
            format!("{e1}{e2}: {} vs oracle {oracle}", rep.value)
        })?;
        let (c1, c2) = (a1 - g1, a2 - g2);
        ensure(rep.value >= 1.0 - c1 - c2 - 1e-10, || {
            format!("{e1}{e2}: below 1-c1-c2")
        })?;
        ensure(rep.value >= floor, || {
            format!("{e1}{e2}: {} < {floor}", rep.value)
        })?;
        ensure(rep.hybrid_holds(1e-10), || {
            format!("{e1}{e2}: hybrid {rep:?}")
        })?;
        worst = worst.min(rep.value);
        pairs += 1;
    }
    let advs = random_adversaries(2 * n, 25, 8).map_err(|e| e.to_string())?;
    let mut worst_u = f64::INFINITY;
    for (i, adv) in advs.iter().enumerate() {
        let rep = product_state_soundness_demo(&sc, adv, 2).map_err(|e| e.to_string())?;
        ensure(rep.value >= floor, || {
            format!("unitary {i}: {} < {floor}", rep.value)
        })?;
        ensure(rep.hybrid_holds(1e-10), || {
            format!("unitary {i}: hybrid {rep:?}")
        })?;
        worst_u = worst_u.min(rep.value);
    }
    // Single copy of a two-copy output is the one-copy channel.
    let one = bob_output(
        &sc,
        &AdversaryChannel::identity(n),
        &[DenseState::zero(sc.m()).unwrap()],
    )
    .map_err(|e| e.to_string())?;
    ensure((one.accept_probability() - 1.0).abs() < 1e-10, || {
        "identity rejected".into()
    })?;
    Ok(format!(
        "(2,1) eps={eps:.4}: {pairs} Pauli pairs min {worst:.4}, 25 unitaries min {worst_u:.4}, floor {floor:.4}"
    ))
}

fn c12_key_length() -> Outcome {
    let mut parts = Vec::new();
    for (r, s) in [
        (2, 1),
        (2, 2),
        (3, 1),
        (2, 3),
        (3, 2),
        (4, 1),
        (2, 4),
        (4, 2),
    ] {
        let sc = Scheme::build(r, s).map_err(|e| e.to_string())?;
        let m = sc.m();
        let codes = (1u64 << s) + 1;
        let index_bits = (0..).find(|&b| 1u64 << b >= codes).unwrap();
        let expected = 2 * m + s as usize + index_bits;
        for seed in 0..4 {
            let key = keygen(seed, &sc);
            let len = key.to_bitstring(&sc).map_err(|e| e.to_string())?.len();
            ensure(len == expected, || {
                format!("({r},{s}): {len} != {expected}")
            })?;
        }
        ensure(expected > 2 * m, || format!("({r},{s}): no overhead"))?;
        parts.push(format!("({r},{s}) {expected}>{}", 2 * m));
    }
    Ok(parts.join(", "))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 12] = [
        ("soundness bound, exhaustive", c1_soundness_bound),
        ("undetected-count ceiling", c2_undetected_ceiling),
        ("general position", c3_general_position),
        ("completeness (2,2)", c4_completeness),
        ("symbolic/dense equivalence (2,2)", c5_dense_symbolic),
        ("random unitary soundness (2,2)", c6_random_unitaries),
        ("perfect encryption (2,2)", c7_encryption),
        ("purity protocol equivalence (2,2)", c8_purity_equivalence),
        ("phase attack floor", c9_phase_attack),
        ("tensor power distance", c10_tensor_power),
        ("two-copy product soundness", c11_product_soundness),
        ("key length accounting", c12_key_length),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
