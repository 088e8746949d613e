//! Command-line driver: a parsed [`RunConfig`] runs one command and yields a
//! JSON [`Report`]. Exit status is 0 when every check passes, 1 when one
//! fails and 2 on usage or input errors.

use clap::{Parser, Subcommand};
use hochcyc::ainfty::{AInfty, CheckLine, ResidualReport, Witness};
use hochcyc::complexes::{curvature_square, degeneracy_check, dsquare_sweep, t_lemma_check, Variant};
use hochcyc::family::twist_odd;
use hochcyc::format::{load, Instance};
use hochcyc::graded::{Element, Parity, Tuple, Word};
use hochcyc::homology::{compare, homology, naive_oracle, Truncation};
use hochcyc::openclosed::axioms::{axiom_suite, synthetic_family, AxiomInput};
use hochcyc::openclosed::{
    chain_map_residual, chain_map_residual_signed, eta_independence, extended_p, random_family, sphere_chain_map_check, sphere_deformed,
    structure_residual, structure_terms, theorem1_rewrite_check, OCInstance, StructureTerm, TermKind,
};
use hochcyc::scalars::{Cap, Q};
use hochcyc::signs::{lemma_sign_suite, SignSuiteParams};
use serde::Serialize;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser, Debug)]
#[command(name = "hochcyc", version, about = "Checks and homology for curved A-infinity algebras and open-closed maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Energy cap (a rational, e.g. `5/2`).
    #[arg(long, global = true, default_value = "2", value_parser = parse_q)]
    pub energy: Q,
    /// Tensor weight cap; each command has its own default.
    #[arg(long, global = true)]
    pub weight: Option<usize>,
    /// Cap on the total degree in the formal variables.
    #[arg(long = "var-total", global = true, default_value_t = 2)]
    pub var_total: u32,
    /// One of hochschild, normalized, connes, reduced-connes, extended-connes, extended-reduced-connes.
    #[arg(long, global = true, value_parser = parse_variant)]
    pub variant: Option<Variant>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
}

#[derive(Subcommand, Debug, Clone)]
pub enum Command {
    /// Validate an algebra and check the A-infinity relations and the unit.
    CheckAinfty { input: String },
    /// Check d^2 = 0 on the chain complexes, plus degeneracy for unital inputs.
    Dsquare { input: String },
    /// Check d(1 - t) = (1 - t) mu-hat on random words.
    TLemma {
        input: String,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
    },
    /// Betti numbers of a truncated complex.
    Homology {
        input: String,
        /// Cross-check against the naive oracle.
        #[arg(long)]
        oracle: bool,
        /// Degree window `lo:hi`.
        #[arg(long, value_parser = parse_window)]
        window: Option<(i64, i64)>,
    },
    /// List the terms of the structure equation for given arities.
    ExpandStructure {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        l: usize,
        /// List the d-on-alpha composites separately.
        #[arg(long)]
        exclude_d: bool,
    },
    /// Structure equation, chain-map, rewrite and extension checks.
    VerifyTheorems {
        input: String,
        /// Largest number of interior inputs in the structure equation.
        #[arg(long = "max-l", default_value_t = 1)]
        max_l: usize,
        /// Random cyclic families for the rewrite check.
        #[arg(long, default_value_t = 20)]
        families: usize,
    },
    /// Axiom suite for an open-closed family (`synthetic` and `synthetic-corrupt` are builtin).
    Axioms {
        input: String,
        #[arg(long = "max-l", default_value_t = 2)]
        max_l: usize,
    },
    /// Exhaustive and random checks of the sign identities.
    SignLemmas {
        #[arg(long = "rotation-k", default_value_t = 6)]
        rotation_k: usize,
        #[arg(long = "splitting-k", default_value_t = 8)]
        splitting_k: usize,
        #[arg(long, default_value_t = 2000)]
        trials: usize,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckAinfty { .. } => "check-ainfty",
            Command::Dsquare { .. } => "dsquare",
            Command::TLemma { .. } => "t-lemma",
            Command::Homology { .. } => "homology",
            Command::ExpandStructure { .. } => "expand-structure",
            Command::VerifyTheorems { .. } => "verify-theorems",
            Command::Axioms { .. } => "axioms",
            Command::SignLemmas { .. } => "sign-lemmas",
        }
    }

    fn inputs(&self) -> Vec<String> {
        match self {
            Command::CheckAinfty { input }
            | Command::Dsquare { input }
            | Command::TLemma { input, .. }
            | Command::Homology { input, .. }
            | Command::VerifyTheorems { input, .. }
            | Command::Axioms { input, .. } => vec![input.clone()],
            Command::ExpandStructure { .. } | Command::SignLemmas { .. } => vec![],
        }
    }

    fn default_weight(&self) -> usize {
        match self {
            Command::TLemma { .. } => 5,
            Command::Homology { .. } | Command::VerifyTheorems { .. } | Command::Axioms { .. } => 3,
            _ => 4,
        }
    }
}

fn parse_q(s: &str) -> Result<Q, String> {
    let q: Q = s.parse()?;
    if q.is_negative() {
        return Err("the energy cap must be nonnegative".into());
    }
    Ok(q)
}

fn parse_variant(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: hochcyc::complexes::ComplexError| e.to_string())
}

fn parse_window(s: &str) -> Result<(i64, i64), String> {
    let (lo, hi) = s.split_once(':').ok_or("expected `lo:hi`")?;
    let lo: i64 = lo.trim().parse().map_err(|_| format!("bad lower bound `{lo}`"))?;
    let hi: i64 = hi.trim().parse().map_err(|_| format!("bad upper bound `{hi}`"))?;
    if lo > hi {
        return Err(format!("empty window {lo}:{hi}"));
    }
    Ok((lo, hi))
}

/// Everything a run depends on.
#[derive(Clone, Debug)]
pub struct RunConfig {
    pub command: Command,
    pub inputs: Vec<String>,
    pub cap: Cap,
    pub variant: Option<Variant>,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl From<Cli> for RunConfig {
    fn from(cli: Cli) -> RunConfig {
        let weight = cli.weight.unwrap_or_else(|| cli.command.default_weight());
        RunConfig {
            inputs: cli.command.inputs(),
            cap: Cap::new(cli.energy, weight, cli.var_total),
            variant: cli.variant,
            seed: cli.seed,
            output: cli.output,
            command: cli.command,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checked: Option<usize>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub witnesses: Vec<Witness>,
}

impl Check {
    fn line(l: CheckLine) -> Check {
        Check { name: l.name, passed: l.passed, detail: l.detail, checked: None, witnesses: vec![] }
    }

    fn residual(name: &str, r: ResidualReport) -> Check {
        Check {
            name: name.to_string(),
            passed: r.passed(),
            detail: format!("{} inputs, {} failures", r.checked, r.failures),
            checked: Some(r.checked),
            witnesses: r.witnesses,
        }
    }

    fn simple(name: &str, passed: bool, detail: String) -> Check {
        Check { name: name.to_string(), passed, detail, checked: None, witnesses: vec![] }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BettiTable {
    pub algebra: String,
    pub variant: Variant,
    pub source: &'static str,
    pub window: (i64, i64),
    pub betti: Vec<(i64, usize)>,
    pub ranks: Vec<(i64, usize)>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub unstable: Vec<i64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub engine_version: String,
    pub inputs: Vec<String>,
    pub cap: Cap,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<Variant>,
    pub passed: bool,
    pub checks: Vec<Check>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub skipped: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub betti: Vec<BettiTable>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<StructureTerm>,
    /// Milliseconds per check; the only part of a report that varies between runs.
    pub timings: BTreeMap<String, f64>,
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }

    /// One `PASS`/`FAIL` line per check.
    pub fn summary(&self) -> String {
        self.checks
            .iter()
            .map(|c| format!("{} {}: {}\n", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail))
            .collect()
    }
}

/// Errors that make a run meaningless: exit status 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}


struct Run {
    report: Report,
}

impl Run {
    /// Runs `f` and records its timing under `key`; an error becomes a failed check.
    fn timed<T, E: std::fmt::Display>(&mut self, key: &str, f: impl FnOnce() -> Result<T, E>) -> Option<T> {
        let start = Instant::now();
        let out = f();
        let ms = (start.elapsed().as_secs_f64() * 10_000.0).round() / 10.0;
        self.report.timings.insert(key.to_string(), ms);
        match out {
            Ok(t) => Some(t),
            Err(e) => {
                self.push(Check::simple(key, false, format!("error: {e}")));
                None
            }
        }
    }

    fn push(&mut self, c: Check) {
        self.report.checks.push(c);
    }
}

fn load_input(spec: &str) -> Result<Instance, UsageError> {
    load(spec).map_err(|e| UsageError(e.to_string()))
}

fn algebra_of(spec: &str) -> Result<AInfty, UsageError> {
    Ok(load_input(spec)?.algebra())
}

fn variants_for(a: &AInfty, chosen: Option<Variant>) -> Vec<Variant> {
    match chosen {
        Some(v) => vec![v],
        None => Variant::ALL.into_iter().filter(|v| a.unit.is_some() || !v.needs_unit()).collect(),
    }
}

/// `-μ_0 ⊗ μ_0`, with the Koszul sign for moving coefficients to the front.
fn minus_mu0_squared(a: &AInfty, cap: &Cap) -> Word {
    let ring = &*a.ring;
    let c = a.curvature();
    let mut out = Word::zero();
    for (g, s) in c.iter() {
        for (h, r) in c.iter() {
            let r = twist_odd(ring, r, a.module.shifted_parity(g));
            let t: Tuple = [g, h].into_iter().collect();
            out.add_term(t, &ring.mul_capped(s, &r, cap).neg());
        }
    }
    out.truncate(ring, cap)
}

/// Every pure tensor of weight `1..=cap.weight` with coefficient 1.
fn all_words(a: &AInfty, cap: &Cap) -> Vec<Word> {
    (1..=cap.weight)
        .flat_map(|k| a.module.tuples_of_length(k))
        .map(|t| Word::single(t, a.ring.one()))
        .collect()
}

fn chain_check(name: String, r: hochcyc::openclosed::ChainMapReport) -> Check {
    let passed = r.passed();
    let bad: Vec<String> = r.descent.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect();
    let mut detail = format!(
        "d P = (-1)^{} P ∂ on {} chains, {} failures; {} descent checks",
        r.sign,
        r.residual.checked,
        r.residual.failures,
        r.descent.len()
    );
    if !bad.is_empty() {
        detail = format!("{detail}; failed: {}", bad.join("; "));
    }
    Check { name, passed, detail, checked: Some(r.residual.checked), witnesses: r.residual.witnesses }
}

fn rewrite_checks(run: &mut Run, a: &AInfty, n: i64, target_len: usize, families: usize, seed: u64, cap: &Cap) {
    let words = all_words(a, cap);
    let key = format!("random cyclic families ({families})");
    let out = run.timed(&key, || -> Result<_, String> {
        let mut failures = Vec::new();
        let mut controls = 0;
        for i in 0..families as u64 {
            let s = seed.wrapping_add(i);
            let p = random_family(s, a.module.clone(), a.ring.clone(), target_len, cap.weight + 1, true);
            match theorem1_rewrite_check(a, &p, n, &words, cap) {
                Ok(r) if r.passed() => {}
                Ok(r) => failures.extend(r.witnesses.into_iter().map(|w| Witness { input: format!("seed {s}: {}", w.input), value: w.value })),
                Err(e) => failures.push(Witness { input: format!("seed {s}"), value: e.to_string() }),
            }
            let raw = random_family(s, a.module.clone(), a.ring.clone(), target_len, cap.weight + 1, false);
            let detected = words.iter().any(|w| {
                hochcyc::openclosed::theorem1_rewrite_residual(a, &raw, n, w, cap).map(|r| !r.is_zero()).unwrap_or(true)
            });
            if detected {
                controls += 1;
            }
        }
        Ok((failures, controls))
    });
    if let Some((failures, controls)) = out {
        let r = ResidualReport::new(families, failures);
        run.push(Check::residual("rewrite on random cyclic families", r));
        run.push(Check::simple(
            "control: unsymmetrized families leave a residual",
            controls == families && families > 0,
            format!("{controls} of {families} families give a nonzero witness"),
        ));
    }
}

fn verify_family(run: &mut Run, inst: &OCInstance, max_l: usize, families: usize, seed: u64, cap: &Cap) {
    let a = inst.algebra();
    let n = inst.n;
    let target = inst.target();
    let zeta = inst.zeta();
    if let Some(r) = run.timed("structure equation", || structure_residual(inst, cap, max_l)) {
        run.push(Check::residual(&format!("structure equation, l <= {max_l}"), r));
    }
    for v in Variant::ALL.into_iter().filter(|v| !v.is_extended()) {
        if (v.needs_unit() && a.unit.is_none()) || (v.is_reduced() && zeta.is_none()) {
            run.report.skipped.push(format!("chain map {v}: needs a unit and zeta"));
            continue;
        }
        let key = format!("chain map {v}");
        if let Some(r) = run.timed(&key, || chain_map_residual(&a, &inst.p, target, n, v, cap, zeta)) {
            run.push(chain_check(key, r));
        }
    }
    if !inst.p.is_empty() {
        let key = "control: mutated chain-map sign";
        if let Some(r) =
            run.timed(key, || chain_map_residual_signed(&a, &inst.p, target, n, Variant::Hochschild, cap, zeta, Parity::of(n)))
        {
            run.push(Check::simple(key, !r.residual.passed(), format!("{} failures with the wrong sign", r.residual.failures)));
        }
    }
    let words = all_words(&a, cap);
    if let Some(r) = run.timed("rewrite on p", || theorem1_rewrite_check(&a, &inst.p, n, &words, cap)) {
        run.push(Check::residual("rewrite on p", r));
    }
    rewrite_checks(run, &a, n, target.module.len(), families, seed, cap);
    let Some(eta) = inst.sphere.as_ref().and_then(|s| s.eta.clone()) else {
        run.report.skipped.push("extended map: no eta".into());
        return;
    };
    let zero = Element::zero();
    let Some(p) = run.timed("extended map", || extended_p(inst, &zero, &zero, &eta, cap)) else {
        return;
    };
    for v in Variant::ALL.into_iter().filter(|v| v.is_extended()) {
        if v.is_reduced() && a.unit.is_none() {
            continue;
        }
        let key = format!("extended chain map {v}");
        if let Some(r) = run.timed(&key, || chain_map_residual(&a, &p, target, n, v, cap, zeta)) {
            run.push(chain_check(key, r));
        }
    }
    use hochcyc::family::Multilinear;
    let p1 = p.eval(&[], &[]);
    if !p1.is_zero() {
        let mut bare = p.clone();
        bare.add(&[], &[], &p1.neg());
        let key = "control: extended map without eta";
        if let Some(r) = run.timed(key, || chain_map_residual(&a, &bare, target, n, Variant::ExtendedConnes, cap, zeta)) {
            run.push(Check::simple(key, !r.passed(), format!("{} failures without the eta term", r.residual.failures)));
        }
    }
    if let Some(line) = run.timed("sphere chain map", || sphere_chain_map_check(inst, &zero, cap)) {
        run.push(Check::line(line));
    }
    // Prefer a shift `d x` the sphere operator sees, so the comparison is not vacuous.
    let shifts: Vec<Element> = target.module.gens().map(|g| target.differential.image(g)).filter(|x| !x.is_zero()).collect();
    let seen = |x: &Element| sphere_deformed(inst, &zero, x, cap).map(|v| !v.is_zero()).unwrap_or(false);
    let exact = shifts.iter().find(|x| seen(x)).or(shifts.first()).cloned();
    match exact {
        Some(dx) => {
            let mut eta2 = eta.clone();
            eta2.add_assign(&dx);
            let trunc = Truncation::new(cap.with_weight(cap.weight.min(2)));
            if let Some(r) = run.timed("eta independence", || eta_independence(inst, &zero, &eta, &eta2, &trunc)) {
                run.report.checks.extend(r.checks.into_iter().map(Check::line));
            }
        }
        None => run.report.skipped.push("eta independence: d_T is zero".into()),
    }
}

pub fn run(cfg: &RunConfig) -> Result<Report, UsageError> {
    let mut run = Run {
        report: Report {
            command: cfg.command.name().to_string(),
            engine_version: hochcyc::VERSION.to_string(),
            inputs: cfg.inputs.clone(),
            cap: cfg.cap.clone(),
            seed: cfg.seed,
            variant: cfg.variant,
            passed: false,
            checks: vec![],
            skipped: vec![],
            betti: vec![],
            terms: vec![],
            timings: BTreeMap::new(),
        },
    };
    let cap = &cfg.cap;
    match &cfg.command {
        Command::CheckAinfty { input } => {
            let a = algebra_of(input)?;
            let valid = run.timed("validate", || a.validate());
            run.push(Check::simple("validate", valid.is_some(), "degree law and valuations".into()));
            if valid.is_some() {
                let r = run.timed("mu-hat squared", || Ok::<_, String>(a.residual(cap)));
                run.push(Check::residual(&format!("mu-hat ∘ mu-hat = 0, weight <= {}", cap.weight), r.unwrap()));
                if a.unit.is_some() {
                    if let Some(u) = run.timed("unit", || a.unit_check()) {
                        run.report.checks.extend(u.checks.into_iter().map(Check::line));
                    }
                }
            }
        }
        Command::Dsquare { input } => {
            let a = algebra_of(input)?;
            for v in variants_for(&a, cfg.variant) {
                let key = format!("d^2 = 0 on {v}");
                if let Some(r) = run.timed(&key, || dsquare_sweep(&a, v, cap)) {
                    run.push(Check::residual(&key, r));
                }
                if a.unit.is_some() && v.needs_unit() {
                    let key = format!("degeneracy on {v}");
                    if let Some(r) = run.timed(&key, || degeneracy_check(&a, v, cap)) {
                        run.push(Check::residual(&key, r));
                    }
                }
            }
            if a.is_curved() {
                let got = curvature_square(&a, cap);
                let want = minus_mu0_squared(&a, cap);
                run.push(Check::simple(
                    "control: d^2(1) = -mu0 ⊗ mu0 without the cyclic quotient",
                    got == want && !got.is_zero(),
                    got.display(&a.module),
                ));
            }
        }
        Command::TLemma { input, trials } => {
            let a = algebra_of(input)?;
            let r = run.timed("t-lemma", || Ok::<_, String>(t_lemma_check(&a, cap, *trials, cfg.seed)));
            run.push(Check::residual("d(1 - t) = (1 - t) mu-hat", r.unwrap()));
        }
        Command::Homology { input, oracle, window } => {
            let a = algebra_of(input)?;
            let v = cfg.variant.unwrap_or(Variant::Hochschild);
            let mut trunc = Truncation::new(cap.clone());
            if let Some((lo, hi)) = window {
                trunc = trunc.with_window(*lo, *hi);
            }
            let Some(r) = run.timed("engine", || homology(&a, v, &trunc)) else {
                return Ok(finish(run));
            };
            let unstable: Vec<i64> = r.rows.iter().filter(|x| x.unstable).map(|x| x.degree).collect();
            run.push(Check::simple(
                "homology",
                true,
                format!("window {:?}, unstable degrees {unstable:?}", r.window),
            ));
            let table = BettiTable {
                algebra: a.name.clone(),
                variant: v,
                source: "engine",
                window: r.window,
                betti: r.betti(),
                ranks: r.ranks(),
                unstable,
            };
            run.report.betti.push(table);
            if *oracle {
                let trunc = trunc.clone().with_window(r.window.0, r.window.1);
                if let Some(o) = run.timed("oracle", || naive_oracle(&a, v, &trunc)) {
                    let diffs = compare(&r, &o);
                    run.push(Check::simple(
                        "engine = oracle",
                        diffs.is_empty() && r.betti() == o.betti && r.ranks() == o.ranks,
                        if diffs.is_empty() { format!("{} chains", o.chains) } else { diffs.join("; ") },
                    ));
                    run.report.betti.push(BettiTable {
                        algebra: a.name.clone(),
                        variant: v,
                        source: "oracle",
                        window: o.window,
                        betti: o.betti,
                        ranks: o.ranks,
                        unstable: vec![],
                    });
                }
            }
        }
        Command::ExpandStructure { k, l, exclude_d } => {
            let terms = structure_terms(*k, *l, *exclude_d);
            let expected = (*k).max(1) * (k + 1) * (1 << l) + 1 + usize::from(*k == 0);
            run.push(Check::simple(
                "term count",
                terms.len() == expected,
                format!("{} terms, expected {expected}", terms.len()),
            ));
            if *k == 0 {
                let sphere = terms.iter().any(|t| t.kind == TermKind::Sphere);
                run.push(Check::simple("sphere term present", sphere, format!("q_{{∅,{}}}(γ ⊗ ζ)", l + 1)));
            }
            run.report.terms = terms;
        }
        Command::VerifyTheorems { input, max_l, families } => match load_input(input)? {
            Instance::Family(inst) => verify_family(&mut run, &inst, *max_l, *families, cfg.seed, cap),
            other => {
                let a = other.algebra();
                rewrite_checks(&mut run, &a, 2, a.module.len().max(2), *families, cfg.seed, cap);
            }
        },
        Command::Axioms { input, max_l } => {
            let report = match input.as_str() {
                "synthetic" | "synthetic-corrupt" => {
                    let fam = synthetic_family(input == "synthetic-corrupt").map_err(|e| UsageError(e.to_string()))?;
                    run.timed("axioms", || axiom_suite(&fam.input()))
                }
                _ => match load_input(input)? {
                    Instance::Family(inst) => {
                        let ai = AxiomInput::from_instance(&inst, cap.clone(), *max_l);
                        run.timed("axioms", || axiom_suite(&ai))
                    }
                    other => return Err(UsageError(format!("`{input}` is a {}; axioms need a family", other.kind()))),
                },
            };
            if let Some(r) = report {
                run.report.checks.extend(r.checks.into_iter().map(Check::line));
                run.report.skipped.extend(r.skipped);
            }
        }
        Command::SignLemmas { rotation_k, splitting_k, trials } => {
            let params = SignSuiteParams { rotation_k: *rotation_k, splitting_k: *splitting_k, trials: *trials, seed: cfg.seed };
            let r = run.timed("sign lemmas", || Ok::<_, String>(lemma_sign_suite(&params))).unwrap();
            for c in r.checks {
                let passed = c.passed();
                run.push(Check {
                    name: c.name,
                    passed,
                    detail: format!("{} cases, {} failures", c.cases, c.failures),
                    checked: Some(c.cases as usize),
                    witnesses: c
                        .counterexample
                        .map(|v| Witness { input: "counterexample".into(), value: v })
                        .into_iter()
                        .collect(),
                });
            }
        }
    }
    Ok(finish(run))
}

fn finish(mut run: Run) -> Report {
    run.report.passed = !run.report.checks.is_empty() && run.report.checks.iter().all(|c| c.passed);
    run.report
}
