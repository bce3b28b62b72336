//! One PASS/FAIL line per acceptance criterion.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};

use dlint::{check_file, check_source, eval, exit_code, Settings};
use dlint_core::engine::run_to_fixpoint;
use dlint_core::frontend::ScriptSource;
use dlint_core::rules::{catalog, patterns_of, RuleFilter};
use dlint_core::{analyze, AnalysisOptions};

use common::{chain, keras_source, observed, oracle, random_stack, shaped_graph};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn corpus(rel: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(rel)
}

fn found_codes(path: &Path) -> BTreeSet<String> {
    check_file(path, &Settings::default())
        .report
        .diagnostics
        .iter()
        .map(|d| d.code.clone())
        .collect()
}

fn fig1_exact() -> Outcome {
    let start = Instant::now();
    let codes = found_codes(&corpus("base/fig1.py"));
    let took = start.elapsed();
    let want: BTreeSet<String> = ["APIM-10", "SI-20", "SI-21"].map(String::from).into();
    if codes != want {
        return Err(format!("found {codes:?}"));
    }
    if took >= Duration::from_secs(1) {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("{codes:?} in {took:?}"))
}

fn corpus_recall_precision() -> Outcome {
    let cases = eval::load_manifest(&corpus("manifest.tsv")).map_err(|e| e.to_string())?;
    let synthetic: Vec<_> = cases.into_iter().filter(|c| c.path.to_string_lossy().contains("synthetic")).collect();
    if synthetic.len() != 28 {
        return Err(format!("{} synthetic cases, expected 28", synthetic.len()));
    }
    let s = eval::evaluate(&synthetic, |p| check_file(p, &Settings::default()).report);
    let imperfect: Vec<_> = s
        .per_rule
        .iter()
        .filter(|(_, c)| c.recall() != Some(1.0) || c.precision() != Some(1.0))
        .map(|(k, c)| format!("{k} {c:?}"))
        .collect();
    if !imperfect.is_empty() {
        return Err(imperfect.join("; "));
    }
    Ok(format!("{} rules at 100% recall and precision over {} programs", s.per_rule.len(), synthetic.len()))
}

fn clean_baselines() -> Outcome {
    for f in ["base/lenet_tf.py", "base/vgg16_keras.py"] {
        let codes = found_codes(&corpus(f));
        if !codes.is_empty() {
            return Err(format!("{f}: {codes:?}"));
        }
    }
    Ok("lenet_tf.py and vgg16_keras.py report nothing".into())
}

fn shape_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(4);
    for i in 0..1000 {
        let stack = random_stack(&mut rng, 24);
        let g = shaped_graph(&keras_source(&stack));
        let got: Vec<_> = chain(&g).into_iter().map(observed).collect();
        if got != oracle(&stack) {
            return Err(format!("stack {i} disagrees: {stack:?}"));
        }
    }
    let took = start.elapsed();
    if took >= Duration::from_secs(10) {
        return Err(format!("took {took:?}"));
    }
    Ok(format!("1000 stacks agree in {took:?}"))
}

fn engine_properties() -> Outcome {
    let mut rng = StdRng::seed_from_u64(5);
    let patterns = patterns_of(&catalog());
    let mut largest = 0;
    for i in 0..100 {
        let stack = random_stack(&mut rng, 1000);
        let g = shaped_graph(&keras_source(&stack));
        largest = largest.max(stack.layers.len());
        let base = run_to_fixpoint(g.clone(), &patterns).map_err(|e| format!("graph {i}: {e}"))?;
        let distinct: BTreeSet<_> = base.trace.iter().map(|a| (a.code, a.anchor)).collect();
        if distinct.len() != base.trace.len() || base.trace.len() > 23 * g.node_count() {
            return Err(format!("graph {i}: {} applications over {} nodes", base.trace.len(), g.node_count()));
        }
        if base.graph.without_faults().dump() != g.dump() {
            return Err(format!("graph {i}: rewriting changed more than faults"));
        }
        let mut shuffled = patterns.clone();
        shuffled.shuffle(&mut rng);
        for p in &mut shuffled {
            p.priority = rng.gen();
        }
        let other = run_to_fixpoint(g, &shuffled).map_err(|e| format!("graph {i}: {e}"))?;
        if other.graph.fault_set() != base.graph.fault_set() {
            return Err(format!("graph {i}: fault sets differ under reordering"));
        }
    }
    Ok(format!("100 graphs up to {largest} layers: bounded, confluent, faults only"))
}

fn pooling_rule_exhaustive() -> Outcome {
    let opts = AnalysisOptions {
        filter: RuleFilter { only: vec!["SI-22".into()], ..Default::default() },
        ..Default::default()
    };
    for c in 0..=15usize {
        for p in 0..=15usize {
            let mut src = String::from(
                "from keras.models import Sequential\nfrom keras.layers import *\nmodel = Sequential()\n\
                 model.add(InputLayer(input_shape=(8, 8, 3)))\n",
            );
            for _ in 0..c {
                src.push_str("model.add(Conv2D(4, (1, 1), padding='same'))\n");
            }
            for _ in 0..p {
                src.push_str("model.add(MaxPooling2D((1, 1)))\n");
            }
            src.push_str("model.add(Flatten())\nmodel.add(Dense(2, activation='softmax'))\n");
            let a = analyze(&ScriptSource::new("r22.py", src), &opts);
            let fired = a.report.diagnostics.iter().any(|d| d.code == "SI-22");
            let want = p + c >= 10 && 3 * p > p + c;
            if fired != want || a.failed {
                return Err(format!("conv={c} pool={p}: fired={fired}, expected {want}"));
            }
        }
    }
    Ok("256 (conv, pool) combinations agree".into())
}

fn deep_model_end_to_end() -> Outcome {
    let mut src = String::from(
        "from keras.models import Sequential\nfrom keras.layers import *\nmodel = Sequential()\n\
         model.add(InputLayer(input_shape=(64, 64, 3)))\n",
    );
    let mut layers = 0;
    for (filters, convs) in [(32, 4), (64, 5), (128, 7), (256, 7), (256, 8)] {
        for _ in 0..convs {
            src.push_str(&format!("model.add(Conv2D({filters}, (3, 3), activation='relu', padding='same'))\n"));
            layers += 1;
        }
        src.push_str("model.add(MaxPooling2D((2, 2)))\n");
        layers += 1;
    }
    src.push_str("model.add(Flatten())\nmodel.add(Dense(10, activation='softmax'))\n");
    src.push_str("model.compile(loss='categorical_crossentropy', optimizer='adam')\nmodel.fit(x, y)\n");
    layers += 2;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("deep.py");
    std::fs::write(&path, src).map_err(|e| e.to_string())?;
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_dlint"))
        .arg("check")
        .arg(&path)
        .env_remove("DLINT_CONFIG")
        .output()
        .map_err(|e| e.to_string())?;
    let took = start.elapsed();
    if out.status.code() != Some(0) {
        return Err(format!("exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stdout)));
    }
    if took >= Duration::from_secs(5) {
        return Err(format!("took {took:?}"));
    }
    if layers != 38 {
        return Err(format!("built {layers} layers, expected 38"));
    }
    Ok(format!("{layers}-layer model checked in {took:?}"))
}

fn mutate(rng: &mut StdRng, text: &str) -> String {
    let mut chars: Vec<char> = text.chars().collect();
    const ALPHABET: &[u8] = b"()[]{}:,.=+-*/'\"#\\\n\t 0123456789abcxyz_";
    for _ in 0..rng.gen_range(1..=4) {
        if chars.is_empty() {
            break;
        }
        let i = rng.gen_range(0..chars.len());
        match rng.gen_range(0..6) {
            0 => {
                chars.remove(i);
            }
            1 => chars.insert(i, ALPHABET[rng.gen_range(0..ALPHABET.len())] as char),
            2 => chars.truncate(i),
            3 => {
                let j = rng.gen_range(0..chars.len());
                chars.swap(i, j);
            }
            4 => {
                let end = (i + rng.gen_range(1..40)).min(chars.len());
                let piece: Vec<char> = chars[i..end].to_vec();
                let at = rng.gen_range(0..=chars.len());
                chars.splice(at..at, piece);
            }
            _ => {
                let digit = char::from_digit(rng.gen_range(0..10), 10).unwrap();
                if chars[i].is_ascii_digit() {
                    chars[i] = digit;
                }
            }
        }
    }
    chars.into_iter().collect()
}

fn fuzz() -> Outcome {
    let bases: Vec<String> = std::fs::read_dir(corpus("synthetic"))
        .map_err(|e| e.to_string())?
        .filter_map(|e| e.ok())
        .map(|e| e.path())
        .chain(["base/fig1.py", "base/lenet_tf.py", "base/vgg16_keras.py"].map(corpus))
        .map(|p| std::fs::read_to_string(p).unwrap())
        .collect();
    let mut rng = StdRng::seed_from_u64(8);
    let settings = Settings::default();
    // panics are caught and reported as internal errors; count them as crashes
    std::panic::set_hook(Box::new(|_| {}));
    let mut by_code = [0usize; 4];
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for i in 0..10_000 {
        let base = &bases[rng.gen_range(0..bases.len())];
        let text = mutate(&mut rng, base);
        let a = check_source(&ScriptSource::new("fuzz.py", text.clone()), &settings);
        if a.report.diagnostics.iter().any(|d| d.message.contains("internal error")) {
            let _ = std::panic::take_hook();
            return Err(format!("mutant {i} panicked:\n{text}"));
        }
        let code = exit_code(std::slice::from_ref(&a));
        by_code[code as usize] += 1;
        // every 50th mutant also goes through the binary
        if i % 50 == 0 {
            let path = dir.path().join(format!("m{i}.py"));
            std::fs::write(&path, &text).map_err(|e| e.to_string())?;
            let out = Command::new(env!("CARGO_BIN_EXE_dlint"))
                .arg("check")
                .arg(&path)
                .env_remove("DLINT_CONFIG")
                .output()
                .map_err(|e| e.to_string())?;
            match out.status.code() {
                Some(c) if c == code => {}
                other => return Err(format!("mutant {i}: binary exit {other:?}, library {code}")),
            }
        }
    }
    let _ = std::panic::take_hook();
    Ok(format!("10000 mutants, exit codes 0..3 = {by_code:?}"))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("fig1 reports exactly APIM-10, SI-20, SI-21 within 1s", fig1_exact),
        ("synthetic corpus at 100% recall and precision", corpus_recall_precision),
        ("clean baselines report nothing", clean_baselines),
        ("shape inference matches the oracle on 1000 stacks within 10s", shape_oracle),
        ("rewriting is bounded, confluent and adds only faults", engine_properties),
        ("excess-pooling rule matches its threshold everywhere", pooling_rule_exhaustive),
        ("deep model checked end to end within 5s", deep_model_end_to_end),
        ("10000 mutated scripts never crash", fuzz),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS  {name} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} ({detail})", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
