//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use viewcheck::{load_example, run, EXAMPLES};
use viewcheck_core::design::{lemma335_check, small_alphabets};
use viewcheck_core::{laws, view, Bits, Predicate, QName, Value, View};
use viewcheck_dsl::{parse, printer, Model, Verdict};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn model(name: &str) -> Result<Model, String> {
    load_example(name).map_err(|d| format!("{name}: {d}"))
}

/// Runs every check of a fixture under a per-check time limit; returns
/// verdicts and details.
fn run_fixture(name: &str, limit: Duration) -> Result<Vec<(String, Verdict, String)>, String> {
    let m = model(name)?;
    let mut out = Vec::new();
    for c in &m.checks {
        let t = Instant::now();
        let o = c.run().map_err(|e| format!("{name}: {e}"))?;
        ensure(t.elapsed() < limit, || format!("{name}: `{}` took {:?}", c.text, t.elapsed()))?;
        out.push((c.text.clone(), o.verdict, o.detail));
    }
    Ok(out)
}

fn expect_all_equal(names: &[&str]) -> Outcome {
    let mut n = 0;
    for name in names {
        for (q, v, d) in run_fixture(name, Duration::from_secs(5))? {
            ensure(v == Verdict::Holds, || format!("{name}: `{q}` {}", v.name()))?;
            if q.contains(" expect ") {
                ensure(d == "equal", || format!("{name}: `{q}` gave {d}"))?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} equalities"))
}

const LO: i64 = -2;
const HI: i64 = 12;
const W: usize = (HI - LO + 1) as usize;

fn solutions() -> Vec<(i64, i64)> {
    (LO..=HI)
        .flat_map(|x| (LO..=HI).map(move |y| (x, y)))
        .filter(|&(x, y)| x >= 0 && y >= 0 && x + y == 10)
        .collect()
}

/// Observation index of a system state, per example view.
fn observe(which: usize, x: i64, y: i64) -> usize {
    let d = |v: i64| (v - LO) as usize;
    match which {
        1 => d(x) + W * d(y),
        2 => d(x.max(y)),
        _ => d(x) + W * usize::from(x >= y),
    }
}

fn local_oracle(which: usize, nu: usize) -> Vec<bool> {
    let mut out = vec![false; nu * nu];
    for &(x, y) in &solutions() {
        for &(x2, y2) in &solutions() {
            out[observe(which, x, y) + nu * observe(which, x2, y2)] = true;
        }
    }
    out
}

fn matches(p: &Predicate, expected: &[bool]) -> bool {
    p.space_size() == expected.len() && expected.iter().enumerate().all(|(i, e)| p.contains(i) == *e)
}

fn view_and_system(which: usize, kind: &str) -> Result<(View, viewcheck_core::Program), String> {
    let m = model(&format!("ex-v{which}-{kind}"))?;
    let v = m.view(&format!("V{which}")).ok_or("missing view")?.clone();
    let p = m.system("ExSys").ok_or("missing system")?.clone();
    Ok((v, p))
}

fn criterion_1() -> Outcome {
    let msg = expect_all_equal(&["ex-v1-localise", "ex-v2-localise", "ex-v3-localise"])?;
    for which in 1..=3 {
        let (v, p) = view_and_system(which, "localise")?;
        let l = view::localise(&v, &p).map_err(|e| e.to_string())?;
        ensure(matches(l.support(), &local_oracle(which, v.vu_size())), || {
            format!("V{which}: localisation differs from the enumeration oracle")
        })?;
    }
    Ok(format!("{msg}, oracle agrees"))
}

fn criterion_2() -> Outcome {
    let msg = expect_all_equal(&["ex-v1-globalise", "ex-v2-globalise", "ex-v3-globalise"])?;
    for which in 1..=3 {
        let (v, p) = view_and_system(which, "globalise")?;
        let l = view::localise(&v, &p).and_then(|l| l.to_local()).map_err(|e| e.to_string())?;
        let g = view::globalise(&v, &l).map_err(|e| e.to_string())?;
        // The example views are total functions, so G holds at (s, s') iff
        // the pair of observations is in the localisation.
        let nu = v.vu_size();
        let loc = local_oracle(which, nu);
        let expected: Vec<bool> = (0..W.pow(4))
            .map(|i| {
                let d = |k: u32| (i / W.pow(k) % W) as i64 + LO;
                loc[observe(which, d(0), d(1)) + nu * observe(which, d(2), d(3))]
            })
            .collect();
        ensure(matches(g.support(), &expected), || format!("V{which}: globalisation differs from the oracle"))?;
    }
    Ok(format!("{msg}, oracle agrees"))
}

fn criterion_3() -> Outcome {
    let msg = expect_all_equal(&["guess-infer"])?;
    let m = model("guess-infer")?;
    let (p, v) = (m.system("Guess0").ok_or("missing")?, m.view("Alice").ok_or("missing")?);
    let prog = v.program_alphabet().map_err(|e| e.to_string())?;
    for c in m.checks.iter().filter(|c| c.text.starts_with("infer")) {
        let sign = if c.text.contains("vu:r_A' < 0") { -1 } else { 1 };
        let (lo, hi) = if sign < 0 { (8, 10) } else { (1, 6) };
        let viewcheck_dsl::elaborate::Elaborated::Infer { observation, .. } = &c.query else {
            return Err("unexpected query".into());
        };
        let got = view::infer(p, v, observation).map_err(|e| e.to_string())?;
        // Digits: n, g, r, n', g', r' with n, g from 1 and r from -1.
        let expected: Vec<bool> = (0..prog.size() as usize)
            .map(|i| {
                let d = prog.decode(i);
                let (n, g, r2) = (d[0] as i64 + 1, d[1] as i64 + 1, d[5] as i64 - 1);
                g == 7 && r2.signum() == sign && (lo..=hi).contains(&n)
            })
            .collect();
        ensure(matches(got.support(), &expected), || format!("`{}` differs from the oracle", c.text))?;
    }
    Ok(format!("{msg}, oracle agrees for both fixes"))
}

fn criterion_4() -> Outcome {
    for (name, v) in [("ex-v1-localise", "V1"), ("ex-v2-localise", "V2"), ("ex-v3-localise", "V3")] {
        let m = model(name)?;
        let view = m.view(v).ok_or("missing view")?;
        let r = view::is_healthy(view::Healthiness::Vh, view).map_err(|e| e.to_string())?;
        ensure(r.equal, || format!("{v} is not a VH fixpoint"))?;
    }
    let dir = std::env::temp_dir().join(format!("viewcheck-acc-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let file = dir.join("partial.bk");
    std::fs::write(
        &file,
        "domain B = 0..1\nalphabet sys S { x: B }\nalphabet view W { a: B }\nview N over S, W = sys:x == 0 && vu:a == 0\n",
    )
    .map_err(|e| e.to_string())?;
    let (code, out) = run(["healthy", file.to_str().unwrap(), "N", "--json"]);
    let _ = std::fs::remove_dir_all(&dir);
    let json: serde_json::Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let r = &json["results"][0];
    ensure(code == 1 && r["verdict"] == "fails", || format!("non-total view: exit {code}, {out}"))?;
    ensure(r["witness"]["sys:x"] == 1, || format!("witness {}", r["witness"]))?;
    Ok("V1-V3 VH-healthy; non-total view unhealthy, witness sys:x=1".into())
}

fn views(n: usize, m: usize) -> Vec<View> {
    let (sys, vu) = small_alphabets(n, m).unwrap();
    let a = Arc::new(sys.union(&vu).unwrap());
    (0..1u64 << (n * m))
        .map(|b| View::new(Predicate::from_bits(&a, Bits::from_u64(n * m, b)).unwrap()).unwrap())
        .collect()
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let (code, out) = run(["lemma335", "--max-sys", "1", "--max-vu", "2", "--first", "--json"]);
    let json: serde_json::Value = serde_json::from_str(&out).map_err(|e| e.to_string())?;
    let c = &json["results"][0]["counterexamples"][0];
    ensure(code == 1, || format!("exit {code}"))?;
    ensure(c["view"] == "{(0, 0)}" && c["pre"] == "true" && c["post"] == "true", || format!("first counterexample {c}"))?;
    let w = &c["witness"];
    ensure(w["ok"] == false && w["ok'"] == false && w["vu:a"] == 1 && w["vu:a'"] == 0, || {
        format!("witness {w}")
    })?;

    let mut checked = 0usize;
    let mut surjective = 0usize;
    for n in 1..=2 {
        for m in 1..=2 {
            for v in views(n, m) {
                let prog = v.program_alphabet().map_err(|e| e.to_string())?;
                let mut all_equal = true;
                for pre in 0..1u64 << n {
                    for post in 0..1u64 << (n * n) {
                        let pre = Predicate::from_bits(v.sys(), Bits::from_u64(n, pre)).map_err(|e| e.to_string())?;
                        let post = Predicate::from_bits(&prog, Bits::from_u64(n * n, post)).map_err(|e| e.to_string())?;
                        all_equal &= lemma335_check(&v, &pre, &post).map_err(|e| e.to_string())?.equal;
                        checked += 1;
                    }
                }
                let surj = (0..v.vu_size()).all(|u| (0..v.sys_size()).any(|s| v.relates(s, u)));
                surjective += usize::from(surj);
                ensure(all_equal == surj, || {
                    format!("|Sys|={n} |Vu|={m} view {}: equal={all_equal} surjective={surj}", v.predicate().to_dnf())
                })?;
            }
        }
    }
    ensure(t.elapsed() < Duration::from_secs(60), || format!("took {:?}", t.elapsed()))?;
    Ok(format!(
        "first counterexample V={{(0, 0)}}, pre=post=true; biconditional holds on {checked} checks ({surjective} surjective views)"
    ))
}

fn criterion_6() -> Outcome {
    let t = Instant::now();
    let m = model("auth-paradox")?;
    let outcomes: Vec<_> = m.checks.iter().map(|c| c.run()).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let verdicts: Vec<Verdict> = outcomes.iter().map(|o| o.verdict).collect();
    ensure(
        verdicts == [Verdict::Holds, Verdict::Holds, Verdict::Leaks, Verdict::Clean],
        || format!("verdicts {:?}", verdicts.iter().map(|v| v.name()).collect::<Vec<_>>()),
    )?;
    let entries = outcomes[2].entries.as_ref().ok_or("no entries")?;
    let nouser = Value::Sym("NOUSER".into());
    ensure(
        entries.iter().any(|e| e.observation.value(&QName::vu("m").primed()) == Some(nouser.clone())),
        || "no NOUSER entry".into(),
    )?;
    ensure(t.elapsed() < Duration::from_secs(5), || format!("took {:?}", t.elapsed()))?;
    Ok(format!("both refine; Impl1 leaks ({} entries, NOUSER among them); Impl2 clean", entries.len()))
}

fn criterion_7() -> Outcome {
    let required = [
        "galois adjunction",
        "complement identity",
        "VH1 fixpoint iff total",
        "VH1 idempotent",
        "localise and globalise monotone",
        "infer within program",
        "VHD = VH = VH1",
    ];
    let results = laws::run_laws(500, 20_240_601).map_err(|e| e.to_string())?;
    for name in required {
        ensure(results.iter().any(|r| r.name == name), || format!("law `{name}` missing"))?;
    }
    for r in &results {
        ensure(r.instances >= 500, || format!("{}: {} instances", r.name, r.instances))?;
        ensure(r.passed(), || format!("{}: {}", r.name, r.failure.clone().unwrap_or_default()))?;
    }
    Ok(format!("{} laws x 500 instances, zero failures", results.len()))
}

const SOUP: &[&str] = &[
    "domain", "alphabet", "sys", "view", "vu", "over", "system", "design", "secret", "policy", "filter",
    "check", "healthy", "localise", "globalise", "infer", "leak", "refines", "lemma335", "delta", "expect",
    "baseline", "bool", "if", "then", "else", "true", "false", "max", "min", "x", "V", "S", "W", "0", "7",
    "-3", "99999999999999999999", "..", "=", "==", "!=", "<", "<=", ">", ">=", "&&", "||", "->", "<->", "|-",
    "!", "+", "-", "*", "(", ")", "{", "}", ",", ":", "'", "′", "#", "\n", " ", "sys:x", "vu:a'", "@", "\"",
];

fn fuzz_input(rng: &mut ChaCha8Rng, fixtures: &[&str]) -> String {
    match rng.random_range(0..3) {
        0 => {
            let n = rng.random_range(0..40);
            (0..n).map(|_| SOUP[rng.random_range(0..SOUP.len())]).collect::<Vec<_>>().join(" ")
        }
        1 => {
            let n = rng.random_range(0..64);
            let bytes: Vec<u8> = (0..n).map(|_| rng.random()).collect();
            String::from_utf8_lossy(&bytes).into_owned()
        }
        _ => {
            let mut chars: Vec<char> = fixtures[rng.random_range(0..fixtures.len())].chars().collect();
            for _ in 0..rng.random_range(1..4) {
                let at = rng.random_range(0..=chars.len());
                match rng.random_range(0..4) {
                    0 => chars.truncate(at),
                    1 => {
                        let end = (at + rng.random_range(1..8)).min(chars.len());
                        chars.drain(at..end);
                    }
                    2 => {
                        let tok = SOUP[rng.random_range(0..SOUP.len())];
                        chars.splice(at..at, tok.chars());
                    }
                    _ => {
                        if at < chars.len() {
                            chars[at] = char::from(rng.random_range(32u8..127));
                        }
                    }
                }
            }
            chars.into_iter().collect()
        }
    }
}

fn criterion_8() -> Outcome {
    for (name, src) in EXAMPLES {
        let ast = parse(src).map_err(|d| format!("{name}: {d}"))?;
        let printed = printer::spec(&ast);
        let again = parse(&printed).map_err(|d| format!("{name} reprint: {d}"))?;
        ensure(again == ast, || format!("{name}: round trip changed the tree"))?;
    }
    let fixtures: Vec<&str> = EXAMPLES.iter().map(|(_, s)| *s).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut rejected = 0usize;
    let mut kinds = BTreeSet::new();
    for i in 0..100_000 {
        let input = fuzz_input(&mut rng, &fixtures);
        let result = catch_unwind(AssertUnwindSafe(|| {
            let parsed = parse(&input);
            // Elaborate a sample of inputs that parse.
            let elab = match &parsed {
                Ok(spec) if i % 50 == 0 => Some(viewcheck_dsl::elaborate_with_limit(spec, 1 << 20).err()),
                _ => None,
            };
            (parsed.err(), elab)
        }))
        .map_err(|_| format!("panic on input {input:?}"))?;
        let (perr, eerr) = result;
        for d in perr.into_iter().chain(eerr.flatten()) {
            ensure(d.pos.line >= 1 && d.pos.col >= 1, || format!("unpositioned diagnostic `{d}` for {input:?}"))?;
            kinds.insert(format!("{:?}", d.kind));
            rejected += 1;
        }
    }
    Ok(format!(
        "8 fixtures round-trip; 100000 fuzz inputs, {rejected} positioned diagnostics ({}), no panics",
        kinds.into_iter().collect::<Vec<_>>().join("/")
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 localisation equalities", criterion_1),
        ("2 globalisation equalities", criterion_2),
        ("3 guessing game inference", criterion_3),
        ("4 healthiness", criterion_4),
        ("5 design lemma refutation", criterion_5),
        ("6 refinement paradox", criterion_6),
        ("7 property suites", criterion_7),
        ("8 spec language robustness", criterion_8),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        let t = Instant::now();
        let r = catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match r {
            Ok(msg) => println!("[PASS] criterion {name} ({secs:.2} s): {msg}"),
            Err(msg) => {
                failed += 1;
                println!("[FAIL] criterion {name} ({secs:.2} s): {msg}");
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", 8 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
