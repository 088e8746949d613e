//! The acceptance suite: one PASS/FAIL line per criterion, with its time
//! limit. Runs without the libtest harness so the lines always show.

use hochcyc::ainfty::builtins::{all, curved_matrix};
use hochcyc::ainfty::AInfty;
use hochcyc::complexes::{curvature_square, degeneracy_check, dsquare_sweep, t_lemma_check, Complex, Variant};
use hochcyc::graded::{Element, GradedModule, Tuple, Word};
use hochcyc::homology::{homology_with, naive_oracle, ChainModel, HomologyOptions, Truncation};
use hochcyc::openclosed::axioms::{axiom_suite, synthetic_family, toy_axiom_family, AxiomInput};
use hochcyc::openclosed::toy::{curved_toy, toy_zero_energy, toy_zero_energy_over};
use hochcyc::openclosed::{
    chain_map_residual, eta_independence, extended_p, random_family, theorem1_rewrite_check, theorem1_rewrite_residual,
};
use hochcyc::scalars::{Cap, Q};
use hochcyc::signs::{lemma_sign_suite, SignSuiteParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;
use std::time::{Duration, Instant};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn variants(a: &AInfty) -> Vec<Variant> {
    Variant::ALL.into_iter().filter(|v| a.unit.is_some() || !v.needs_unit()).collect()
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t <= limit, || format!("{what} took {t:.2?}, limit {limit:?}"))
}

fn c1_ainfty_relations() -> Outcome {
    let cap = Cap::new(Q::int(3), 6, 2);
    let mut notes = Vec::new();
    for a in all() {
        let start = Instant::now();
        let r = a.residual(&cap);
        ensure(r.passed(), || format!("{}: {:?}", a.name, r.witnesses))?;
        within(Duration::from_secs(10), start, &a.name)?;
        notes.push(format!("{} {} inputs", a.name, r.checked));
    }
    Ok(notes.join(", "))
}

fn c2_dsquare() -> Outcome {
    let start = Instant::now();
    let cap = Cap::new(Q::int(2), 5, 2);
    let mut count = 0;
    for a in all() {
        for v in variants(&a) {
            let r = dsquare_sweep(&a, v, &cap).map_err(|e| e.to_string())?;
            ensure(r.passed(), || format!("{} {v}: {:?}", a.name, r.witnesses))?;
            count += r.checked;
        }
    }
    let a = curved_matrix();
    let cx = Complex::new(&a, Variant::ExtendedConnes).map_err(|e| e.to_string())?;
    let one = Word::single(Tuple::new(), a.ring.one());
    let d1 = cx.diff(&one, &cap).map_err(|e| e.to_string())?;
    ensure(!d1.is_zero(), || "d(1) vanishes for a curved algebra".into())?;
    let d2 = cx.diff(&d1, &cap).map_err(|e| e.to_string())?;
    ensure(d2.is_zero(), || format!("d^2(1) = {}", d2.display(&a.module)))?;
    let control = curvature_square(&a, &cap);
    let mu0 = a.curvature();
    let mut want = Word::zero();
    for (g, s) in mu0.iter() {
        for (h, r) in mu0.iter() {
            want.add_term([g, h].into_iter().collect(), &a.ring.mul_capped(s, r, &cap).neg());
        }
    }
    ensure(control == want && !control.is_zero(), || {
        format!("without the quotient d^2(1) = {}", control.display(&a.module))
    })?;
    within(Duration::from_secs(30), start, "d^2 sweep")?;
    Ok(format!("{count} chains; d^2(1) = 0 in extended-connes, = -mu0⊗mu0 without the quotient"))
}

fn c3_t_lemma() -> Outcome {
    let start = Instant::now();
    let cap = Cap::new(Q::int(2), 5, 2);
    for (i, a) in all().into_iter().enumerate() {
        let r = t_lemma_check(&a, &cap, 1000, 1000 + i as u64);
        ensure(r.checked == 1000 && r.passed(), || format!("{}: {:?}", a.name, r.witnesses))?;
    }
    within(Duration::from_secs(30), start, "t-lemma")?;
    Ok("1000 words per algebra".into())
}

fn c4_degeneracy() -> Outcome {
    let cap = Cap::new(Q::int(2), 4, 2);
    let mut count = 0;
    for a in all().into_iter().filter(|a| a.unit.is_some()) {
        for v in Variant::ALL.into_iter().filter(|v| v.needs_unit()) {
            let r = degeneracy_check(&a, v, &cap).map_err(|e| e.to_string())?;
            ensure(r.passed() && r.checked > 0, || format!("{} {v}: {:?}", a.name, r.witnesses))?;
            count += r.checked;
        }
    }
    Ok(format!("{count} degenerate chains"))
}

fn c5_signs() -> Outcome {
    let start = Instant::now();
    let r = lemma_sign_suite(&SignSuiteParams::default());
    for c in &r.checks {
        ensure(c.passed(), || format!("{}: {:?}", c.name, c.counterexample))?;
    }
    within(Duration::from_secs(60), start, "sign lemmas")?;
    Ok(format!("{} identities, {} cases", r.checks.len(), r.checks.iter().map(|c| c.cases).sum::<u64>()))
}

fn random_words(a: &AInfty, rng: &mut ChaCha8Rng, count: usize, max_weight: usize) -> Vec<Word> {
    (0..count)
        .map(|_| {
            let terms = rng.gen_range(1..=3);
            (0..terms)
                .map(|_| {
                    let k = rng.gen_range(1..=max_weight);
                    let t: Tuple = (0..k).map(|_| rng.gen_range(0..a.module.len()) as u16).collect();
                    (t, a.ring.int(rng.gen_range(1..=4)))
                })
                .collect()
        })
        .collect()
}

fn c6_rewrite() -> Outcome {
    let start = Instant::now();
    let target = Arc::new(GradedModule::from_pairs(&[("o1", 0), ("o2", 1), ("o3", 2)]));
    let cap = Cap::new(Q::int(3), 7, 2);
    let mut detected = Vec::new();
    for (ai, a) in all().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6000 + ai as u64);
        let mut caught = 0;
        for f in 0..200u64 {
            let n = 2 + (f % 2) as i64;
            let seed = 1_000 * ai as u64 + f;
            let words = random_words(&a, &mut rng, 4, 6);
            let p = random_family(seed, a.module.clone(), a.ring.clone(), target.len(), 8, true);
            let r = theorem1_rewrite_check(&a, &p, n, &words, &cap).map_err(|e| format!("{}: {e}", a.name))?;
            ensure(r.passed(), || format!("{} family {seed}: {:?}", a.name, r.witnesses))?;
            let raw = random_family(seed, a.module.clone(), a.ring.clone(), target.len(), 8, false);
            if words.iter().any(|w| !theorem1_rewrite_residual(&a, &raw, n, w, &cap).unwrap().is_zero()) {
                caught += 1;
            }
        }
        detected.push((a.name.clone(), caught));
    }
    // every pure word of weight <= 3 on one family
    let a = hochcyc::ainfty::builtins::exterior(2);
    let words: Vec<Word> = (1..=3)
        .flat_map(|k| a.module.tuples_of_length(k))
        .map(|t| Word::single(t, a.ring.one()))
        .collect();
    let p = random_family(77, a.module.clone(), a.ring.clone(), target.len(), 8, true);
    let r = theorem1_rewrite_check(&a, &p, 2, &words, &cap).map_err(|e| e.to_string())?;
    ensure(r.passed(), || format!("exhaustive: {:?}", r.witnesses))?;
    for (name, caught) in &detected {
        ensure(*caught > 0, || format!("{name}: no unsymmetrized family was caught"))?;
    }
    within(Duration::from_secs(120), start, "rewrite")?;
    Ok(format!("200 families per algebra, unsymmetrized caught {detected:?}"))
}

fn c7_chain_maps() -> Outcome {
    let cap = Cap::new(Q::int(2), 4, 2);
    let mut lines = 0;
    for n in [2, 3] {
        let inst = toy_zero_energy(n).map_err(|e| e.to_string())?;
        let a = inst.algebra();
        for v in [Variant::Hochschild, Variant::NormalizedHochschild, Variant::Connes, Variant::ReducedConnes] {
            let r = chain_map_residual(&a, &inst.p, inst.target(), n, v, &cap, inst.zeta()).map_err(|e| e.to_string())?;
            ensure(r.passed(), || format!("n={n} {v}: {:?} {:?}", r.residual.witnesses, r.descent))?;
            if v == Variant::ReducedConnes {
                ensure(r.descent.iter().any(|c| c.name.contains("unit")), || "no unit-chain check".into())?;
            }
            lines += r.residual.checked;
        }
    }
    Ok(format!("{lines} chains, n = 2 and 3, including T/<zeta> and the unit chain"))
}

fn c8_extended() -> Outcome {
    let c = curved_toy().map_err(|e| e.to_string())?;
    let inst = &c.inst;
    let a = inst.algebra();
    ensure(a.is_curved(), || "toy is not curved".into())?;
    let zero = Element::zero();
    let eta = inst.sphere.as_ref().and_then(|s| s.eta.clone()).ok_or("no eta")?;
    let cap = Cap::new(Q::int(2), 3, 0);
    let p = extended_p(inst, &zero, &zero, &eta, &cap).map_err(|e| e.to_string())?;
    let r = chain_map_residual(&a, &p, inst.target(), inst.n, Variant::ExtendedConnes, &cap, inst.zeta())
        .map_err(|e| e.to_string())?;
    ensure(r.passed(), || format!("{:?} {:?}", r.residual.witnesses, r.descent))?;
    let trunc = Truncation::new(Cap::new(Q::int(1), 2, 0));
    let e = eta_independence(inst, &zero, &eta, &c.eta_alt, &trunc).map_err(|e| e.to_string())?;
    ensure(e.passed(), || format!("{:?}", e.checks))?;
    Ok(format!("{} chains; eta independence: {} checks", r.residual.checked, e.checks.len()))
}

fn c9_homology_oracle() -> Outcome {
    let start = Instant::now();
    // energy 2 puts curved_matrix over the oracle bound at weight 4
    let cap = Cap::new(Q::int(1), 4, 2);
    let opts = HomologyOptions { representatives: false, levels: false };
    let mut runs = 0;
    for a in all() {
        for v in variants(&a) {
            let model = ChainModel::new(&a, v, &cap).map_err(|e| e.to_string())?;
            let (lo, hi) = model.full_window().unwrap_or((0, 0));
            let trunc = Truncation::new(cap.clone()).with_window(lo.max(hi - 7), hi);
            let e = homology_with(&a, v, &trunc, &opts).map_err(|e| format!("{} {v}: {e}", a.name))?;
            let o = naive_oracle(&a, v, &trunc).map_err(|e| format!("{} {v}: {e}", a.name))?;
            ensure(e.betti() == o.betti && e.ranks() == o.ranks, || {
                format!("{} {v}: engine {:?}/{:?}, oracle {:?}/{:?}", a.name, e.betti(), e.ranks(), o.betti, o.ranks)
            })?;
            runs += 1;
        }
    }
    within(Duration::from_secs(300), start, "homology sweep")?;
    Ok(format!("{runs} algebra/variant pairs agree"))
}

fn c10_axioms() -> Outcome {
    for n in [2, 3] {
        let (geom, refinement) = toy_axiom_family(n).map_err(|e| e.to_string())?;
        let inst = toy_zero_energy_over(n, geom.ring.clone()).map_err(|e| e.to_string())?;
        let zeta = geom.zeta();
        let mut input = AxiomInput::from_instance(&inst, Cap::new(Q::int(0), 3, 2), 2);
        input.interior = &geom.x;
        input.one_x = Some(geom.one_x);
        input.zeta = Some(&zeta);
        input.push = Some(&geom.push);
        input.refinement = Some(&refinement);
        let r = axiom_suite(&input).map_err(|e| e.to_string())?;
        ensure(r.passed() && r.skipped.is_empty(), || format!("toy n={n}: {:?} {:?}", r.checks, r.skipped))?;
    }
    let good = synthetic_family(false).map_err(|e| e.to_string())?;
    let r = axiom_suite(&good.input()).map_err(|e| e.to_string())?;
    ensure(r.passed(), || format!("synthetic: {:?}", r.checks))?;
    let names: Vec<&str> = r.checks.iter().map(|c| c.name.as_str()).collect();
    for want in ["linearity", "cyclic", "interior", "degree", "unit", "fundamental class", "divisor"] {
        ensure(names.iter().any(|n| n.starts_with(want)), || format!("no {want} check"))?;
    }
    ensure(r.checks.iter().filter(|c| c.name.starts_with("unit")).count() >= 2, || "one unit branch".into())?;
    let bad = synthetic_family(true).map_err(|e| e.to_string())?;
    let r = axiom_suite(&bad.input()).map_err(|e| e.to_string())?;
    let failed: Vec<&str> = r.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
    ensure(!failed.is_empty() && failed.iter().all(|n| n.starts_with("divisor")), || {
        format!("corrupted family: failures {failed:?}")
    })?;
    Ok(format!("{} checks; corrupted divisor caught by {failed:?}", names.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("mu-hat squared vanishes", c1_ainfty_relations),
        ("d^2 = 0 on all variants", c2_dsquare),
        ("t-lemma on random words", c3_t_lemma),
        ("degeneracy", c4_degeneracy),
        ("sign lemmas", c5_signs),
        ("rewrite on cyclic families", c6_rewrite),
        ("chain maps on the toy", c7_chain_maps),
        ("extended map and eta independence", c8_extended),
        ("homology agrees with the oracle", c9_homology_oracle),
        ("axiom suite", c10_axioms),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let out = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let t = start.elapsed();
        match out {
            Ok(note) => println!("acceptance {:>2} PASS {name} ({t:.2?}): {note}", i + 1),
            Err(why) => {
                failed += 1;
                println!("acceptance {:>2} FAIL {name} ({t:.2?}): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
