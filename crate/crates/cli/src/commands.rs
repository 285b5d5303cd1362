use std::path::Path;

use anyhow::{anyhow, bail, Context};
use clap::ValueEnum;
use itertools::Itertools;
use qauth_core::authproto::{
    attack_table_csv, auth_encode, auth_verify, keygen as draw_key, pad_message, probe_state,
    seed_commitment, soundness_exact, soundness_max, unpad_message, AuthKey, Envelope,
    EnvelopeHeader, Scheme, Verdict,
};
use qauth_core::densesim::{
    case_seed, ciphertext_density, ciphertext_density_with_reference, dense_pauli_outcome,
    detected_everywhere, fidelity_floor_check, phase_attack_demo, product_state_soundness_demo,
    random_adversaries, random_density_pair, soundness_measure, tensor_power_distance_demo,
    trace_distance, AdversaryChannel, DemoRecord,
};
use qauth_core::gf2::to_hex;
use qauth_core::ptcodes::{
    epsilon_table, rational_string, PurityTestingFamily, Rational, MAX_EXHAUSTIVE_N,
};
use qauth_core::state::{apply_pauli_xz, CVector, C64, MAX_DENSE_QUBITS};
use qauth_core::{DenseState, DensityMatrix, PauliVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::report::Report;
use crate::{FamilyArgs, Format};

/// Exhaustive cap used when `QAUTH_MAX_N` is unset.
pub const DEFAULT_MAX_N: usize = 8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Completeness,
    PauliEquiv,
    RandomUnitary,
    Encryption,
    FidelityFloor,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Demo {
    PhaseAttack,
    TensorPower,
    ProductSoundness,
}

pub fn exhaustive_cap() -> anyhow::Result<usize> {
    match std::env::var("QAUTH_MAX_N") {
        Err(_) => Ok(DEFAULT_MAX_N),
        Ok(v) => {
            let cap: usize = v
                .trim()
                .parse()
                .with_context(|| format!("QAUTH_MAX_N={v:?} is not an integer"))?;
            if cap > MAX_EXHAUSTIVE_N {
                bail!("QAUTH_MAX_N={cap} exceeds the hard limit {MAX_EXHAUSTIVE_N}");
            }
            Ok(cap)
        }
    }
}

fn require_cap(n: usize) -> anyhow::Result<usize> {
    let cap = exhaustive_cap()?;
    if n > cap {
        bail!(
            "exhaustive enumeration needs n={n} but the cap is {cap}; rerun with QAUTH_MAX_N={n} (hard limit {MAX_EXHAUSTIVE_N})"
        );
    }
    Ok(cap)
}

fn load_family(args: &FamilyArgs) -> anyhow::Result<PurityTestingFamily> {
    load_family_or(args, None)
}

fn load_family_or(
    args: &FamilyArgs,
    default: Option<(u32, u32)>,
) -> anyhow::Result<PurityTestingFamily> {
    if let Some(path) = &args.family {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let fam = PurityTestingFamily::from_json(&text)
            .with_context(|| format!("loading family file {}", path.display()))?;
        if args.r.is_some_and(|r| r != fam.r()) || args.s.is_some_and(|s| s != fam.s()) {
            bail!(
                "--r/--s disagree with the family file ({}, {})",
                fam.r(),
                fam.s()
            );
        }
        return Ok(fam);
    }
    let (r, s) = match (args.r, args.s, default) {
        (Some(r), Some(s), _) => (r, s),
        (None, None, Some(d)) => d,
        _ => bail!("give --family FILE or both --r and --s"),
    };
    Ok(PurityTestingFamily::build(r, s)?)
}

fn load_scheme(args: &FamilyArgs) -> anyhow::Result<Scheme> {
    Ok(Scheme::new(load_family(args)?)?)
}

fn parse_error(text: &str, n: usize) -> anyhow::Result<PauliVector> {
    let e: PauliVector = text.parse()?;
    if e.n() != n {
        bail!("error {text:?} has {} qubits, the code has n={n}", e.n());
    }
    Ok(e)
}

fn ratio_f64(q: Rational) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

fn key_json(scheme: &Scheme, key: &AuthKey) -> Value {
    json!({
        "k": key.k,
        "x": to_hex(key.x, 2 * scheme.m()),
        "y": to_hex(key.y.bits(), scheme.s()),
    })
}

fn record_json(r: &DemoRecord) -> Value {
    json!({ "name": r.name, "lhs": r.lhs, "rhs": r.rhs, "margin": r.margin(), "pass": r.pass })
}

fn records_csv(records: &[DemoRecord]) -> String {
    let mut out = String::from("name,lhs,rhs,margin,pass\n");
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.name,
            r.lhs,
            r.rhs,
            r.margin(),
            r.pass
        ));
    }
    out
}

fn records_report(command: &str, seed: u64, records: Vec<DemoRecord>) -> Report {
    let mut rep = Report::new(command, seed);
    rep.pass = records.iter().all(|r| r.pass);
    rep.csv = Some(records_csv(&records));
    rep.set(
        "records",
        Value::Array(records.iter().map(record_json).collect()),
    );
    rep
}

pub fn family(
    r: u32,
    s: u32,
    seed: u64,
    format: Format,
    out: Option<&Path>,
) -> anyhow::Result<Report> {
    let fam = PurityTestingFamily::build(r, s)?;
    let mut rep = Report::new("family", seed);
    rep.set("r", r)
        .set("s", s)
        .set("n", fam.n())
        .set("m", fam.m())
        .set("codes", fam.len())
        .set("epsilon_bound", rational_string(&fam.epsilon_bound()))
        .set("degenerate", fam.m() == 0)
        .set("field", serde_json::to_value(fam.tower().descriptor())?);
    if fam.m() == 0 {
        rep.set("note", "m = 0: the codes carry no message qubits");
    }
    if let Some(path) = out {
        std::fs::write(path, fam.to_json()?)
            .with_context(|| format!("writing {}", path.display()))?;
        rep.set("family_file", path.display().to_string());
    }
    if format == Format::Csv {
        rep.csv = Some(fam.undetected_csv(require_cap(fam.n())?)?);
    }
    Ok(rep)
}

pub fn epsilon(args: &FamilyArgs, seed: u64) -> anyhow::Result<Report> {
    let fam = load_family(args)?;
    let table = epsilon_table(&fam, require_cap(fam.n())?)?;
    let mut rep = Report::new("epsilon", seed);
    rep.pass = table.passes();
    let eps = rational_string(&table.epsilon);
    let bound = rational_string(&table.bound);
    let mut csv = String::from("weight,max_undetected,codes,epsilon_exact,bound,pass\n");
    for (w, u) in table.per_weight.iter().enumerate().skip(1) {
        csv.push_str(&format!(
            "{w},{u},{},{eps},{bound},{}\n",
            fam.len(),
            rep.pass
        ));
    }
    rep.csv = Some(csv);
    rep.set("r", fam.r())
        .set("s", fam.s())
        .set("n", fam.n())
        .set("codes", fam.len())
        .set("epsilon_exact", eps)
        .set("bound", bound)
        .set("max_undetected", table.max_undetected)
        .set("worst_error", table.worst_error.to_string())
        .set("labels_scanned", table.labels_scanned)
        .set(
            "per_weight",
            Value::Array(
                table
                    .per_weight
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(w, u)| json!({ "weight": w, "max_undetected": u }))
                    .collect(),
            ),
        );
    Ok(rep)
}

pub fn attack(
    args: &FamilyArgs,
    seed: u64,
    error: Option<&str>,
    exhaustive: bool,
) -> anyhow::Result<Report> {
    let scheme = load_scheme(args)?;
    let fam = scheme.family();
    let mut rep = Report::new("attack", seed);
    rep.set("r", fam.r()).set("s", fam.s());
    if exhaustive {
        let cap = require_cap(scheme.n())?;
        let (max, worst) = soundness_max(&scheme, cap)?;
        let table = epsilon_table(fam, cap)?;
        let agree = max == table.epsilon;
        rep.pass = agree && max <= fam.epsilon_bound();
        rep.set("max_corruption", rational_string(&max))
            .set("worst_error", worst.to_string())
            .set("epsilon_exact", rational_string(&table.epsilon))
            .set("bound", rational_string(&fam.epsilon_bound()))
            .set("agrees_with_epsilon", agree);
        let errors: Vec<PauliVector> = PauliVector::all(scheme.n()).skip(1).collect();
        rep.csv = Some(attack_table_csv(&scheme, &errors)?);
        return Ok(rep);
    }
    let text = error.ok_or_else(|| anyhow!("give --error or --exhaustive"))?;
    let e = parse_error(text, scheme.n())?;
    let key = draw_key(seed, &scheme);
    let report = soundness_exact(&scheme, e)?;
    rep.pass = report.corruption_probability <= fam.epsilon_bound();
    rep.set("error", e.to_string())
        .set("key", key_json(&scheme, &key))
        .set(
            "key_verdict",
            report.outcomes[key.k].verdict.letter().to_string(),
        )
        .set(
            "outcomes",
            Value::Array(
                report
                    .outcomes
                    .iter()
                    .enumerate()
                    .map(|(k, o)| {
                        json!({
                            "k": k,
                            "verdict": o.verdict.letter().to_string(),
                            "logical_effect": to_hex(o.logical_effect, 2 * scheme.m()),
                        })
                    })
                    .collect(),
            ),
        )
        .set("corruption_probability", report.corruption_string());
    rep.csv = Some(attack_table_csv(&scheme, &[e])?);
    Ok(rep)
}

fn check_dense(scheme: &Scheme) -> anyhow::Result<()> {
    if scheme.n() > MAX_DENSE_QUBITS {
        bail!(
            "dense simulation needs n={} qubits, above the cap {MAX_DENSE_QUBITS}",
            scheme.n()
        );
    }
    Ok(())
}

pub fn dense_verify(
    suite: Suite,
    args: &FamilyArgs,
    seed: u64,
    cases: Option<usize>,
) -> anyhow::Result<Report> {
    let scheme = load_scheme(args)?;
    check_dense(&scheme)?;
    let name = suite.to_possible_value().expect("no skipped variants");
    let mut rep = match suite {
        Suite::Completeness => completeness(&scheme, seed)?,
        Suite::PauliEquiv => pauli_equiv(&scheme, seed)?,
        Suite::RandomUnitary => random_unitary(&scheme, seed, cases.unwrap_or(100))?,
        Suite::Encryption => encryption(&scheme, seed)?,
        Suite::FidelityFloor => fidelity_floor(&scheme, seed, cases.unwrap_or(10))?,
    };
    rep.set("suite", name.get_name())
        .set("r", scheme.family().r())
        .set("s", scheme.family().s());
    Ok(rep)
}

fn case_report(seed: u64, cases: Vec<Value>, csv: String) -> Report {
    let mut rep = Report::new("dense-verify", seed);
    rep.pass = cases.iter().all(|c| c["pass"] == Value::Bool(true));
    rep.set("cases_run", cases.len())
        .set("cases", Value::Array(cases));
    rep.csv = Some(csv);
    rep
}

fn completeness(scheme: &Scheme, seed: u64) -> anyhow::Result<Report> {
    let m = scheme.m();
    let mut probes: Vec<DenseState> = (0..1usize << m)
        .map(|i| DenseState::basis(m, i))
        .collect::<Result<_, _>>()?;
    for i in 0..2 {
        probes.push(probe_state(m, case_seed(seed, i))?);
    }
    let mut cases = Vec::new();
    let mut csv = String::from("k,x,y,accepted,worst_infidelity,pass\n");
    for key in scheme.all_keys() {
        let mut worst: f64 = 0.0;
        let mut accepted = true;
        for psi in &probes {
            let (v, out) = auth_verify(scheme, &key, &auth_encode(scheme, &key, psi)?)?;
            accepted &= v == Verdict::Accept;
            worst = worst.max((1.0 - out.overlap_sq(psi)?).abs());
        }
        let pass = accepted && worst < 1e-10;
        let kj = key_json(scheme, &key);
        csv.push_str(&format!(
            "{},{},{},{accepted},{worst:e},{pass}\n",
            key.k,
            kj["x"].as_str().unwrap_or_default(),
            kj["y"].as_str().unwrap_or_default()
        ));
        cases.push(
            json!({ "key": kj, "accepted": accepted, "worst_infidelity": worst, "pass": pass }),
        );
    }
    let mut rep = case_report(seed, cases, csv);
    rep.set("messages_per_key", probes.len());
    Ok(rep)
}

/// Keys checked per code by the Pauli equivalence suite when the full key
/// set would take too long.
const DENSE_WORK_LIMIT: u64 = 50_000_000;

fn pauli_equiv(scheme: &Scheme, seed: u64) -> anyhow::Result<Report> {
    let n = scheme.n();
    require_cap(n)?;
    let attacks = 1u64 << (2 * n);
    let work = scheme.key_count() * attacks * (1u64 << (n + scheme.m()));
    let keys: Vec<AuthKey> = if work <= DENSE_WORK_LIMIT {
        scheme.all_keys().collect()
    } else {
        // One seeded key per code; the pad and syndrome only move signs.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut by_code: Vec<Option<AuthKey>> = vec![None; scheme.num_codes()];
        while by_code.iter().any(Option::is_none) {
            let key = qauth_core::authproto::keygen_from(scheme, &mut rng);
            by_code[key.k].get_or_insert(key);
        }
        by_code.into_iter().flatten().collect()
    };
    let mut cases = Vec::new();
    let mut csv = String::from("k,x,y,attacks,mismatches,pass\n");
    for key in &keys {
        let mut mismatches = 0u64;
        let mut first = None;
        for e in PauliVector::all(n) {
            let sym = qauth_core::authproto::pauli_attack_analyze(scheme, key, e)?;
            let dense = dense_pauli_outcome(scheme, key, e)?;
            if sym != dense {
                mismatches += 1;
                first.get_or_insert(e.to_string());
            }
        }
        let kj = key_json(scheme, key);
        csv.push_str(&format!(
            "{},{},{},{attacks},{mismatches},{}\n",
            key.k,
            kj["x"].as_str().unwrap_or_default(),
            kj["y"].as_str().unwrap_or_default(),
            mismatches == 0
        ));
        cases.push(json!({
            "key": kj,
            "attacks": attacks,
            "mismatches": mismatches,
            "first_mismatch": first,
            "pass": mismatches == 0,
        }));
    }
    let mut rep = case_report(seed, cases, csv);
    rep.set("all_keys", keys.len() as u64 == scheme.key_count());
    Ok(rep)
}

fn random_unitary(scheme: &Scheme, seed: u64, cases: usize) -> anyhow::Result<Report> {
    let fam = scheme.family();
    let eps = epsilon_table(fam, require_cap(scheme.n())?)?.epsilon;
    let rhs = 1.0 - ratio_f64(eps);
    let advs = random_adversaries(scheme.n(), cases, seed)?;
    let mut out = Vec::new();
    let mut csv = String::from("case,ancilla,value,rhs,pass\n");
    for (i, adv) in advs.iter().enumerate() {
        let psi = probe_state(scheme.m(), case_seed(seed, i as u64))?;
        let value = soundness_measure(scheme, adv, &psi)?;
        let pass = value >= rhs - 1e-9;
        csv.push_str(&format!(
            "{i},{},{value},{rhs},{pass}\n",
            adv.ancilla_qubits()
        ));
        out.push(json!({ "case": i, "ancilla": adv.ancilla_qubits(), "value": value, "rhs": rhs, "pass": pass }));
    }
    let mut rep = case_report(seed, out, csv);
    rep.set("epsilon_exact", rational_string(&eps));
    Ok(rep)
}

fn encryption(scheme: &Scheme, seed: u64) -> anyhow::Result<Report> {
    let (n, m) = (scheme.n(), scheme.m());
    let dim = 1usize << n;
    let mixed = DensityMatrix::maximally_mixed(dim);
    let mut probes: Vec<(String, DenseState)> = vec![
        ("zero".into(), DenseState::zero(m)?),
        ("ones".into(), DenseState::basis(m, (1usize << m) - 1)?),
        (
            "uniform".into(),
            DenseState::normalized(CVector::from_element(1 << m, C64::new(1.0, 0.0)))?,
        ),
    ];
    for i in 0..2 {
        probes.push((
            format!("random-{i}"),
            probe_state(m, case_seed(seed, i as u64))?,
        ));
    }
    let mut cases = Vec::new();
    let mut csv = String::from("probe,max_deviation,pass\n");
    let mut rhos = Vec::new();
    for (name, psi) in &probes {
        let rho = ciphertext_density(scheme, psi)?;
        let dev = (rho.matrix() - mixed.matrix()).camax();
        csv.push_str(&format!("{name},{dev:e},{}\n", dev < 1e-10));
        cases.push(json!({ "probe": name, "max_deviation": dev, "pass": dev < 1e-10 }));
        rhos.push(rho);
    }
    if m > 0 && n + m <= MAX_DENSE_QUBITS {
        let d = 1usize << m;
        let mut amps = vec![C64::new(0.0, 0.0); d * d];
        for j in 0..d {
            amps[j + d * j] = C64::new(1.0 / (d as f64).sqrt(), 0.0);
        }
        let joint = ciphertext_density_with_reference(scheme, &DenseState::new(amps)?, m)?;
        let expected =
            qauth_core::state::kron(DensityMatrix::maximally_mixed(d).matrix(), mixed.matrix());
        let dev = (joint.matrix() - expected).camax();
        csv.push_str(&format!("entangled-reference,{dev:e},{}\n", dev < 1e-10));
        cases.push(
            json!({ "probe": "entangled-reference", "max_deviation": dev, "pass": dev < 1e-10 }),
        );
    }
    let mut worst_pair: f64 = 0.0;
    for (a, b) in rhos.iter().tuple_combinations() {
        worst_pair = worst_pair.max(trace_distance(a, b)?);
    }
    let mut rep = case_report(seed, cases, csv);
    rep.pass &= worst_pair < 1e-10;
    rep.set("max_pairwise_distance", worst_pair);
    Ok(rep)
}

fn fidelity_floor(scheme: &Scheme, seed: u64, cases: usize) -> anyhow::Result<Report> {
    let (n, m) = (scheme.n(), scheme.m());
    let mut attacks: Vec<(String, AdversaryChannel)> =
        vec![("identity".into(), AdversaryChannel::identity(n))];
    if let Some(e) = detected_everywhere(scheme) {
        attacks.push((format!("pauli-{e}"), AdversaryChannel::Pauli(e)));
    }
    for (i, adv) in random_adversaries(n, cases, seed)?.into_iter().enumerate() {
        attacks.push((format!("unitary-{i}"), adv));
    }
    let mut out = Vec::new();
    let mut csv = String::from("attack,fidelity,p_acc,epsilon,floor,pass\n");
    for (i, (name, adv)) in attacks.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(case_seed(seed ^ 0xf1de, i as u64));
        let rho = DensityMatrix::random(1 << m, &mut rng);
        let r = fidelity_floor_check(scheme, adv, &rho)?;
        let pass = r.holds(1e-8);
        let show = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_else(|| "vacuous".into());
        csv.push_str(&format!(
            "{name},{},{},{},{},{pass}\n",
            show(r.fidelity),
            r.p_acc,
            r.epsilon,
            show(r.floor)
        ));
        out.push(json!({
            "attack": name,
            "fidelity": r.fidelity,
            "p_acc": r.p_acc,
            "epsilon": r.epsilon,
            "floor": r.floor,
            "vacuous": r.floor.is_none(),
            "pass": pass,
        }));
    }
    Ok(case_report(seed, out, csv))
}

pub fn lowerbound(
    demo: Demo,
    args: &FamilyArgs,
    seed: u64,
    cases: Option<usize>,
) -> anyhow::Result<Report> {
    let name = demo.to_possible_value().expect("no skipped variants");
    let mut rep = match demo {
        Demo::PhaseAttack => {
            let z0 = DenseState::zero(1)?.density();
            let z1 = DenseState::basis(1, 1)?.density();
            let r = phase_attack_demo(&z0, &z1)?;
            let mut records = vec![DemoRecord::at_least(
                "orthogonal-pure",
                r.achieved,
                r.floor,
                1e-9,
            )];
            for i in 0..cases.unwrap_or(100) {
                let (a, b) = random_density_pair(2, case_seed(seed, i as u64));
                let r = phase_attack_demo(&a, &b)?;
                records.push(DemoRecord::at_least(
                    format!("random-{i}"),
                    r.achieved,
                    r.floor,
                    1e-9,
                ));
            }
            records_report("lowerbound", seed, records)
        }
        Demo::TensorPower => {
            let rho0 = DenseState::zero(1)?.density();
            let rho1 = DensityMatrix::maximally_mixed(2);
            let mut records = Vec::new();
            for t in 1..=10 {
                let r = tensor_power_distance_demo(&rho0, &rho1, t)?;
                records.push(DemoRecord {
                    name: format!("delta=0.5,t={t}"),
                    lhs: r.distance,
                    rhs: r.bound,
                    pass: r.holds(1e-12),
                });
            }
            records_report("lowerbound", seed, records)
        }
        Demo::ProductSoundness => product_soundness(args, seed, cases.unwrap_or(25))?,
    };
    rep.set("demo", name.get_name());
    Ok(rep)
}

fn product_soundness(args: &FamilyArgs, seed: u64, cases: usize) -> anyhow::Result<Report> {
    let scheme = Scheme::new(load_family_or(args, Some((2, 1)))?)?;
    let n = scheme.n();
    if 2 * n > MAX_DENSE_QUBITS {
        bail!(
            "two copies need {} qubits, above the cap {MAX_DENSE_QUBITS}",
            2 * n
        );
    }
    let eps = epsilon_table(scheme.family(), require_cap(n)?)?.epsilon;
    let floor = 1.0 - 2.0 * ratio_f64(eps);
    let joint_keys = scheme.key_count().pow(2);
    let pairs = 1u64 << (4 * n);
    if pairs * joint_keys > DENSE_WORK_LIMIT {
        bail!(
            "exhaustive product Paulis at n={n} need {pairs} pairs x {joint_keys} joint keys; use (r, s) = (2, 1)"
        );
    }
    let mask = (1u64 << n) - 1;
    let mut records = Vec::new();
    let mut push = |name: String, rep: qauth_core::densesim::ProductSoundnessReport| {
        records.push(DemoRecord::at_least(name.clone(), rep.value, floor, 1e-8));
        records.push(DemoRecord::at_least(
            format!("{name}:hybrid"),
            rep.per_copy.iter().sum(),
            1.0 - rep.value,
            1e-10,
        ));
    };
    for (b1, b2) in (0..1u64 << (2 * n)).cartesian_product(0..1u64 << (2 * n)) {
        let x = (b1 & mask) | ((b2 & mask) << n);
        let z = (b1 >> n) | ((b2 >> n) << n);
        let e = PauliVector::from_parts(2 * n, x, z)?;
        let rep = product_state_soundness_demo(&scheme, &AdversaryChannel::Pauli(e), 2)?;
        push(format!("pauli-{e}"), rep);
    }
    for (i, adv) in random_adversaries(2 * n, cases, seed)?.iter().enumerate() {
        push(
            format!("unitary-{i}"),
            product_state_soundness_demo(&scheme, adv, 2)?,
        );
    }
    let mut rep = records_report("lowerbound", seed, records);
    rep.set("r", scheme.family().r())
        .set("s", scheme.family().s())
        .set("epsilon_exact", rational_string(&eps))
        .set("floor", floor);
    Ok(rep)
}

pub fn keygen(args: &FamilyArgs, seed: u64, out: Option<&Path>) -> anyhow::Result<Report> {
    let scheme = load_scheme(args)?;
    let key = draw_key(seed, &scheme);
    if let Some(path) = out {
        std::fs::write(path, key.to_json(&scheme)?)
            .with_context(|| format!("writing {}", path.display()))?;
    }
    let mut rep = Report::new("keygen", seed);
    rep.set("r", scheme.family().r())
        .set("s", scheme.family().s())
        .set("key", key_json(&scheme, &key))
        .set("key_bits", key.to_bitstring(&scheme)?.len());
    Ok(rep)
}

fn parse_bits(text: &str) -> anyhow::Result<usize> {
    text.chars()
        .enumerate()
        .try_fold(0usize, |acc, (i, c)| match c {
            '0' => Ok(acc),
            '1' => Ok(acc | (1 << i)),
            other => bail!("message bit {other:?} is not 0 or 1"),
        })
}

fn bits_string(index: usize, len: usize) -> String {
    (0..len)
        .map(|i| if (index >> i) & 1 == 1 { '1' } else { '0' })
        .collect()
}

pub fn send(
    args: &FamilyArgs,
    seed: u64,
    key_path: &Path,
    message: &str,
    out: Option<&Path>,
) -> anyhow::Result<Report> {
    let out = out.ok_or_else(|| anyhow!("send needs --out for the envelope"))?;
    let scheme = load_scheme(args)?;
    check_dense(&scheme)?;
    let key_text = std::fs::read_to_string(key_path)
        .with_context(|| format!("reading {}", key_path.display()))?;
    let key = AuthKey::from_json(&scheme, &key_text)?;
    let len = message.chars().count();
    if len > scheme.m() {
        bail!("message has {len} bits, the code carries m={}", scheme.m());
    }
    let msg = DenseState::basis(len, parse_bits(message)?)?;
    let (padded, pad) = pad_message(&msg, scheme.m())?;
    let envelope = Envelope {
        header: EnvelopeHeader {
            r: scheme.family().r(),
            s: scheme.family().s(),
            pad,
            seed_commitment: seed_commitment(seed),
        },
        payload: auth_encode(&scheme, &key, &padded)?,
    };
    std::fs::write(out, envelope.to_bytes()?)
        .with_context(|| format!("writing {}", out.display()))?;
    let mut rep = Report::new("send", seed);
    rep.set("r", envelope.header.r)
        .set("s", envelope.header.s)
        .set("n", scheme.n())
        .set("m", scheme.m())
        .set("pad", pad)
        .set("seed_commitment", envelope.header.seed_commitment.clone())
        .set("envelope", out.display().to_string());
    Ok(rep)
}

pub fn receive(
    key_path: &Path,
    envelope_path: &Path,
    error: Option<&str>,
    seed: u64,
) -> anyhow::Result<Report> {
    let bytes = std::fs::read(envelope_path)
        .with_context(|| format!("reading {}", envelope_path.display()))?;
    let envelope = Envelope::from_bytes(&bytes)?;
    let (r, s, pad) = (envelope.header.r, envelope.header.s, envelope.header.pad);
    let scheme = Scheme::build(r, s)?;
    if pad > scheme.m() {
        bail!("envelope pad {pad} exceeds m={}", scheme.m());
    }
    let key_text = std::fs::read_to_string(key_path)
        .with_context(|| format!("reading {}", key_path.display()))?;
    let key = AuthKey::from_json(&scheme, &key_text)?;
    let mut received = envelope.payload;
    let mut rep = Report::new("receive", seed);
    if let Some(text) = error {
        let e = parse_error(text, scheme.n())?;
        received = DenseState::new(apply_pauli_xz(
            e.x_part(),
            e.z_part(),
            received.amps().as_slice(),
        ))?;
        rep.set("error", e.to_string());
    }
    let (verdict, out) = auth_verify(&scheme, &key, &received)?;
    rep.set("r", r)
        .set("s", s)
        .set("verdict", verdict.letter().to_string());
    if verdict == Verdict::Accept {
        match unpad_message(&out, pad) {
            Ok(msg) => {
                let len = msg.n();
                let dist: Vec<Value> = msg
                    .amps()
                    .iter()
                    .enumerate()
                    .filter(|(_, a)| a.norm_sqr() > 1e-12)
                    .map(|(i, a)| json!({ "bits": bits_string(i, len), "probability": a.norm_sqr() }))
                    .collect();
                rep.set("pad_intact", true)
                    .set("outcomes", Value::Array(dist));
            }
            Err(_) => {
                rep.set("pad_intact", false);
            }
        }
    }
    Ok(rep)
}
