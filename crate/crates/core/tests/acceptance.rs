//! End-to-end acceptance run: one pass/fail line per criterion.
//! Runs with its own harness so the lines always reach the test log.

use std::collections::BTreeSet;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use corrbi::bicat::{check_covariant, coherence_sample, interchange_sample, random_algebra, random_correspondence, CovariantCorrespondence};
use corrbi::corr::{corr_multiplicity, tensor, verify_iso, GraphSpec};
use corrbi::instance::Instance;
use corrbi::pimsner::{
    core_embedding, core_stage, cp_correspondence, cuntz, incompatible_covariance, isometry_counterexample, lambda_associativity,
    lambda_checks, o1_stage, random_graph, relative_sets, roundtrip_check, sample_arrows, sharp, trichotomy, trichotomy_suite,
    GradedArrow, Representation, RepresentationReport,
};

struct Outcome {
    ok: bool,
    summary: String,
}

fn within(limit: Duration, start: Instant, ok: bool, summary: String) -> Outcome {
    let t = start.elapsed();
    let in_time = t <= limit;
    let note = if in_time { String::new() } else { format!(", over the {}s budget", limit.as_secs()) };
    Outcome { ok: ok && in_time, summary: format!("{summary} ({:.2}s{note})", t.as_secs_f64()) }
}

/// Representations generated along criteria 1 to 4, for the agreement check.
#[derive(Default)]
struct Reps(Vec<RepresentationReport>);

impl Reps {
    fn fock_and_stages(&mut self, g: &GraphSpec, fock_level: usize, max_stage: usize) {
        let j = g.relative().clone();
        self.0.push(Representation::fock(g, fock_level).check(&j));
        self.0.push(Representation::fock(g, fock_level).check(&g.receivers()));
        for n in 1..=max_stage {
            let st = core_stage(g, n).expect("stage");
            self.0.push(Representation::stage(&st).check(&j));
            self.0.push(Representation::stage(&st).check(&g.receivers()));
        }
    }
}

fn criterion_1(reps: &mut Reps) -> Outcome {
    let start = Instant::now();
    let g = cuntz(2, &[0]);
    let mut bad = Vec::new();
    for n in 0..=6 {
        match core_stage(&g, n) {
            Ok(s) if s.block_sizes() == vec![1usize << n] && s.oracle_dim() == 1 << (2 * n) => {}
            Ok(s) => bad.push(format!("N={n}: blocks {:?}", s.block_sizes())),
            Err(e) => bad.push(format!("N={n}: {e}")),
        }
        if n < 6 {
            match core_embedding(&g, n) {
                Ok(m) if m == vec![vec![2]] => {}
                other => bad.push(format!("embedding {n}: {other:?}")),
            }
        }
    }
    reps.fock_and_stages(&g, 4, 3);
    let summary = if bad.is_empty() { "two loops, J = {v}: blocks [2^N] for N = 0..6, embeddings [2], oracle agrees".into() } else { bad.join("; ") };
    within(Duration::from_secs(30), start, bad.is_empty(), summary)
}

fn criterion_2(reps: &mut Reps) -> Outcome {
    let start = Instant::now();
    let g = cuntz(2, &[]);
    let mut bad = Vec::new();
    for n in 0..=5 {
        let want: Vec<usize> = (0..=n).map(|k| 1 << k).collect();
        match core_stage(&g, n) {
            Ok(s) if s.block_sizes() == want => {}
            Ok(s) => bad.push(format!("N={n}: blocks {:?}", s.block_sizes())),
            Err(e) => bad.push(format!("N={n}: {e}")),
        }
    }
    reps.fock_and_stages(&g, 4, 3);
    let summary = if bad.is_empty() { "two loops, J = {}: blocks [1, 2, ..., 2^N] for N = 0..5, oracle agrees".into() } else { bad.join("; ") };
    within(Duration::from_secs(30), start, bad.is_empty(), summary)
}

fn criterion_3(reps: &mut Reps) -> Outcome {
    let start = Instant::now();
    let suite = trichotomy_suite();
    let mut bad = Vec::new();
    let mut bimodules = 0;
    for (name, g) in &suite {
        match trichotomy(g, 3) {
            Ok(t) if t.coincide() => bimodules += t.bimodule as usize,
            Ok(t) => bad.push(format!("{name}: {t:?}")),
            Err(e) => bad.push(format!("{name}: {e}")),
        }
        reps.fock_and_stages(g, 3, 3);
    }
    let ok = bad.is_empty() && suite.len() >= 12;
    let summary = if ok {
        format!("{} graphs, three booleans coincide ({bimodules} bimodule triples)", suite.len())
    } else {
        format!("{} graphs; {}", suite.len(), bad.join("; "))
    };
    within(Duration::from_secs(60), start, ok, summary)
}

fn criterion_4(reps: &mut Reps) -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut bad = Vec::new();
    let mut instances = 0;
    for i in 0..10 {
        let g = random_graph(&mut rng, 4, 6, 6, 400);
        for j in relative_sets(&g) {
            let h = g.with_relative(j.iter().copied());
            for n in 1..=4 {
                instances += 1;
                match o1_stage(&h, n) {
                    Ok(o) if o.fibers_hold() && o.saturation.holds() => {}
                    Ok(o) => bad.push(format!("graph {i} J={j:?} N={n}: oracle {} vs tensor {}, {:?}", o.oracle_dim, o.tensor_dim(), o.saturation)),
                    Err(e) => bad.push(format!("graph {i} J={j:?} N={n}: {e}")),
                }
            }
            reps.fock_and_stages(&h, 3, 2);
        }
    }
    let summary = if bad.is_empty() {
        format!("10 seeded graphs, {instances} (graph, J, N) instances: degree-one fibers and semi-saturation hold")
    } else {
        bad.join("; ")
    };
    within(Duration::from_secs(120), start, bad.is_empty(), summary)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = Vec::new();
    for k in 0..20 {
        match coherence_sample(&mut rng, false) {
            Ok((p, t)) => {
                for c in [p, t] {
                    if !(c.ok && c.exact) {
                        bad.push(format!("chain {k}: {} {:?}", c.name, c.counterexample));
                    }
                }
            }
            Err(e) => bad.push(format!("chain {k}: {e}")),
        }
        match interchange_sample(&mut rng) {
            Ok(c) if c.ok && c.exact => {}
            other => bad.push(format!("square {k}: {other:?}")),
        }
    }
    let summary = if bad.is_empty() { "20 pentagons, 20 triangles, 20 interchange squares commute exactly".into() } else { bad.join("; ") };
    within(Duration::from_secs(60), start, bad.is_empty(), summary)
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut bad = Vec::new();
    let mut pairs = 0;
    while pairs < 50 {
        let (a, b, c) = (random_algebra(&mut rng), random_algebra(&mut rng), random_algebra(&mut rng));
        let (Some(e), Some(f)) = (random_correspondence(&a, &b, &mut rng), random_correspondence(&b, &c, &mut rng)) else { continue };
        pairs += 1;
        let t = tensor(&e, &f).expect("composable");
        let lhs = corr_multiplicity(&t.product);
        let rhs = corr_multiplicity(&e).compose(&corr_multiplicity(&f));
        if lhs != rhs {
            bad.push(format!("pair {pairs}: {:?} vs {:?}", lhs.0, rhs.0));
        }
    }
    let summary = if bad.is_empty() { "50 seeded pairs: multiplicity of the tensor product is the matrix product".into() } else { bad.join("; ") };
    within(Duration::from_secs(30), start, bad.is_empty(), summary)
}

fn criterion_7(reps: &Reps) -> Outcome {
    let start = Instant::now();
    let disagree: Vec<&RepresentationReport> = reps.0.iter().filter(|r| !r.criteria_agree()).collect();
    let covariant = reps.0.iter().filter(|r| r.identity_criterion).count();
    let ok = disagree.is_empty() && !reps.0.is_empty();
    let summary = if ok {
        format!("{} representations, subspace and identity criteria agree ({covariant} covariant)", reps.0.len())
    } else {
        format!("{} disagreements, first: {:?}", disagree.len(), disagree.first())
    };
    within(Duration::from_secs(60), start, ok, summary)
}

fn composable() -> (Vec<(CovariantCorrespondence, CovariantCorrespondence)>, Vec<[CovariantCorrespondence; 3]>) {
    let s = sample_arrows();
    let by = |name: &str| s.iter().find(|a| a.name == name).expect("sample").arrow.clone();
    let (id2, swap, id3, rot) = (by("two-cycle identity"), by("two-cycle swap"), by("three-cycle identity"), by("three-cycle rotation"));
    let (onto2, onto3) = (by("loop and edge onto two-cycle"), by("loop with source onto three-cycle"));
    let pairs = vec![(onto2.clone(), swap.clone()), (id2.clone(), swap.clone()), (rot.clone(), rot.clone()), (onto3.clone(), rot.clone())];
    let triples = vec![[onto2, swap.clone(), swap], [rot.clone(), rot.clone(), id3], [onto3, rot.clone(), rot]];
    (pairs, triples)
}

fn criterion_8() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let samples = sample_arrows();
    for s in &samples {
        match roundtrip_check(&s.graph, &s.arrow, 3, false) {
            Ok(rt) if rt.passed() && rt.exact() => {}
            Ok(rt) => bad.push(format!("{}: {:?}", s.name, rt.first_failure())),
            Err(e) => bad.push(format!("{}: {e}", s.name)),
        }
    }
    let (pairs, triples) = composable();
    let mut squares = 0;
    for (a, b) in &pairs {
        match lambda_checks(a, b, 2) {
            Ok(cs) => {
                squares += cs.len();
                bad.extend(cs.into_iter().filter(|c| !(c.ok && c.exact)).map(|c| format!("{}: {:?}", c.name, c.counterexample)));
            }
            Err(e) => bad.push(e.to_string()),
        }
    }
    for [f, g, h] in &triples {
        match lambda_associativity(f, g, h, 2) {
            Ok(cs) => {
                squares += cs.len();
                bad.extend(cs.into_iter().filter(|c| !(c.ok && c.exact)).map(|c| format!("{}: {:?}", c.name, c.counterexample)));
            }
            Err(e) => bad.push(e.to_string()),
        }
    }
    let ok = bad.is_empty() && samples.len() >= 5 && pairs.len() >= 3;
    let summary = if ok {
        format!(
            "{} arrows round-trip exactly at N = 3; {} lambda checks on {} composable pairs and {} triples commute",
            samples.len(),
            squares,
            pairs.len(),
            triples.len()
        )
    } else {
        bad.join("; ")
    };
    within(Duration::from_secs(60), start, ok, summary)
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut bad = Vec::new();
    let cc = isometry_counterexample();
    let r = verify_iso(&cc.u);
    if !(r.isometric.ok && !r.surjective.ok && !r.is_valid()) || check_covariant(&cc).is_valid() {
        bad.push(format!("isometric inclusion not rejected: {r:?}"));
    }
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../fixtures/incompatible_covariance.json");
    match std::fs::read_to_string(path).map_err(|e| e.to_string()).and_then(|t| Instance::parse(&t).map_err(|e| e.to_string())) {
        Ok(inst) => {
            if corrbi::report::all_passed(&inst.validate()) {
                bad.push("fixture reported valid".into());
            }
        }
        Err(e) => bad.push(format!("fixture: {e}")),
    }
    match incompatible_covariance(2) {
        Ok(rep) if rep.laws_hold() && !rep.identity_criterion && rep.criteria_agree() => {}
        other => bad.push(format!("restricted representation: {other:?}")),
    }
    let summary = if bad.is_empty() {
        "non-unitary isometry rejected (surjectivity fails); fixture invalid; restricted covariance fails under both criteria".into()
    } else {
        bad.join("; ")
    };
    within(Duration::from_secs(30), start, bad.is_empty(), summary)
}

/// Representations induced by sample arrows and their graded stages also
/// feed the agreement check.
fn arrow_representations(reps: &mut Reps) {
    for s in sample_arrows() {
        let Ok(sh) = sharp(&s.graph, &s.arrow, 2) else { continue };
        let j: BTreeSet<usize> = s.graph.relative().clone();
        reps.0.push(Representation::from_sharp(&s.graph, &sh).check(&j));
        if let Ok(gr) = GradedArrow::new(&s.arrow, 2) {
            if let Ok(r) = cp_correspondence(&s.graph, &sh, &gr) {
                reps.0.push(r.covariance);
            }
        }
    }
}

fn main() -> ExitCode {
    let mut reps = Reps::default();
    let results = vec![
        criterion_1(&mut reps),
        criterion_2(&mut reps),
        criterion_3(&mut reps),
        criterion_4(&mut reps),
        criterion_5(),
        criterion_6(),
        {
            arrow_representations(&mut reps);
            criterion_7(&reps)
        },
        criterion_8(),
        criterion_9(),
    ];
    let mut all = true;
    for (i, r) in results.iter().enumerate() {
        all &= r.ok;
        println!("criterion {} {}: {}", i + 1, if r.ok { "pass" } else { "FAIL" }, r.summary);
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
