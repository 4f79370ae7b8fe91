//! Acceptance suite: one test per release criterion, each printing a
//! PASS/FAIL line (run with `--nocapture` to see them).
//!
//! The oracles here (lattice enumerator, full-table edit distance) are
//! deliberately re-implemented from scratch rather than imported from the
//! library they check.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::Command;

use beamstrike_core::analysis::{
    build_transition_matrix, map_to_upos, pos_diff, qualifies_for_transition, PosMapping,
    RuleTagger, Tagger, Upos, PENN_TO_UPOS,
};
use beamstrike_core::bodega::{character_score, evaluate_sample, TokenF1Similarity};
use beamstrike_core::text::non_skip_count;
use beamstrike_core::victim::ConstantVictim;
use beamstrike_core::{
    apply_edits, attack, lime_importance, logit_importance, tokenize, AttackConfig, Edit,
    LimeConfig, LinearBagVictim, QueryLedger, TableProvider, TokenizedDocument, Victim,
};
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

/// Prints the criterion verdict even when the test panics mid-way.
struct Criterion {
    number: u8,
    name: &'static str,
    passed: bool,
}

impl Criterion {
    fn start(number: u8, name: &'static str) -> Self {
        Criterion {
            number,
            name,
            passed: false,
        }
    }

    fn pass(mut self) {
        self.passed = true;
    }
}

impl Drop for Criterion {
    fn drop(&mut self) {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        println!("ACCEPTANCE {} ({}): {}", self.number, self.name, verdict);
    }
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * (rng.next_u32() as f64 / u32::MAX as f64)
}

// ---------------------------------------------------------------------------
// Criterion 1: per-sample composite score is exactly the component product.

#[test]
fn criterion_1_bodega_composition() {
    let gate = Criterion::start(1, "bodega composition");

    // Drive real evaluations and check the product identity bit-exactly.
    let doc = tokenize("fake story spreads", "c1", 1).unwrap();
    let vocab: BTreeMap<String, f64> = [("fake".to_string(), 2.0)].into_iter().collect();
    let victim = LinearBagVictim::new(vocab, 0.0);
    let provider = TableProvider::new(
        [("fake".to_string(), vec!["true".to_string()])]
            .into_iter()
            .collect(),
        Vec::new(),
    );
    let config = AttackConfig {
        beam_size_k: 2,
        branching_b: 1,
        hypothesis_count_h: 1,
        ..AttackConfig::default()
    };
    let outcome = attack(&doc, &victim, &provider, &TokenF1Similarity, &config).unwrap();
    let record = evaluate_sample(&doc, &outcome, &victim, &TokenF1Similarity);
    assert_eq!(
        record.bodega,
        f64::from(record.confusion) * record.semantic * record.character
    );
    assert!(record.valid);

    // Failure outcomes compose to exactly zero.
    let constant = ConstantVictim {
        probabilities: vec![0.1, 0.9],
    };
    let failed = attack(&doc, &constant, &provider, &TokenF1Similarity, &config).unwrap();
    let failed_record = evaluate_sample(&doc, &failed, &constant, &TokenF1Similarity);
    assert_eq!(failed_record.confusion, 0);
    assert_eq!(failed_record.bodega, 0.0);
    assert_eq!(
        failed_record.bodega,
        f64::from(failed_record.confusion) * failed_record.semantic * failed_record.character
    );

    // Published-row sanity: 1.00 * 0.91 * 0.99 lands on the reported 0.90.
    let published: f64 = 1.00 * 0.91 * 0.99;
    assert!((published - 0.9009).abs() < 1e-12);
    assert!((published - 0.90).abs() < 0.005);

    gate.pass();
}

// ---------------------------------------------------------------------------
// Criteria 2 and 6 share randomized small instances and the enumerator.

struct Instance {
    doc: TokenizedDocument,
    victim: LinearBagVictim,
    provider: TableProvider,
    candidates: Vec<Vec<String>>,
    max_candidates: usize,
}

fn random_instance(rng: &mut ChaCha8Rng, tag: usize) -> Instance {
    let pool: Vec<String> = (0..20).map(|i| format!("t{i:02}")).collect();
    let n = 3 + (rng.next_u32() as usize % 4);

    let mut remaining = pool.clone();
    let mut words = Vec::with_capacity(n);
    for _ in 0..n {
        let idx = rng.next_u32() as usize % remaining.len();
        words.push(remaining.swap_remove(idx));
    }

    let mut vocab = BTreeMap::new();
    for word in &pool {
        vocab.insert(word.clone(), uniform(rng, -2.0, 2.0));
    }
    let victim = LinearBagVictim::new(vocab, uniform(rng, -1.0, 1.0));

    let max_candidates = 1 + (rng.next_u32() as usize % 4);
    let mut candidates = Vec::with_capacity(n);
    let mut lookup = BTreeMap::new();
    for word in &words {
        let mut others: Vec<String> = pool.iter().filter(|w| *w != word).cloned().collect();
        let mut list = Vec::with_capacity(max_candidates);
        for _ in 0..max_candidates {
            let idx = rng.next_u32() as usize % others.len();
            list.push(others.swap_remove(idx));
        }
        candidates.push(list.clone());
        lookup.insert(word.clone(), list);
    }

    let gold = (rng.next_u32() & 1) as usize;
    let doc = tokenize(&words.join(" "), &format!("acc{tag}"), gold).unwrap();
    Instance {
        doc,
        victim,
        provider: TableProvider::new(lookup, Vec::new()),
        candidates,
        max_candidates,
    }
}

/// Exhaustive enumeration over keep / substitute / delete at every position.
fn enumerate_lattice(instance: &Instance) -> (bool, Option<usize>) {
    let doc = &instance.doc;
    let n = doc.tokens.len();
    let radix: Vec<usize> = instance.candidates.iter().map(|c| c.len() + 2).collect();
    let mut counter = vec![0usize; n];
    let mut success = false;
    let mut min_edits: Option<usize> = None;

    'outer: loop {
        let mut edits: Vec<Edit> = Vec::new();
        for (pos, &choice) in counter.iter().enumerate() {
            if choice == 0 {
                continue;
            }
            if choice <= instance.candidates[pos].len() {
                edits.push(Edit::substitute(
                    pos,
                    instance.candidates[pos][choice - 1].clone(),
                ));
            } else {
                edits.push(Edit::delete(pos));
            }
        }
        let text = apply_edits(doc, &edits).unwrap();
        if instance.victim.predict(&[text.as_str()]).unwrap()[0] != doc.gold_label {
            success = true;
            min_edits = Some(min_edits.map_or(edits.len(), |m| m.min(edits.len())));
        }
        let mut i = 0;
        loop {
            if i == n {
                break 'outer;
            }
            counter[i] += 1;
            if counter[i] < radix[i] {
                break;
            }
            counter[i] = 0;
            i += 1;
        }
    }
    (success, min_edits)
}

#[test]
fn criterion_2_brute_force_oracle_equivalence() {
    let gate = Criterion::start(2, "brute-force oracle equivalence");
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    let mut attackable = 0usize;

    for trial in 0..50 {
        let instance = random_instance(&mut rng, trial);
        let (oracle_success, oracle_min) = enumerate_lattice(&instance);
        let config = AttackConfig {
            beam_size_k: 50_000,
            branching_b: instance.max_candidates,
            hypothesis_count_h: usize::MAX,
            max_queries: 10_000_000,
            ..AttackConfig::default()
        };
        let outcome = attack(
            &instance.doc,
            &instance.victim,
            &instance.provider,
            &TokenF1Similarity,
            &config,
        )
        .unwrap();

        assert_eq!(outcome.success, oracle_success, "trial {trial}");
        if oracle_success {
            attackable += 1;
            let beam_min = outcome
                .hypotheses
                .iter()
                .map(|h| non_skip_count(&h.edits))
                .min();
            assert_eq!(beam_min, oracle_min, "trial {trial}");
        }
    }
    assert!(attackable >= 10, "degenerate fixture set: {attackable}/50");
    gate.pass();
}

#[test]
fn criterion_6_monotone_beam_width() {
    let gate = Criterion::start(6, "monotone success in beam width");
    let widths = [1usize, 2, 4, 8, 16];
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC2);
    let mut successes = vec![0usize; widths.len()];

    for trial in 0..50 {
        let instance = random_instance(&mut rng, trial);
        let mut previous = false;
        for (w, &k) in widths.iter().enumerate() {
            let config = AttackConfig {
                beam_size_k: k,
                branching_b: instance.max_candidates,
                hypothesis_count_h: 1,
                max_queries: 10_000_000,
                ..AttackConfig::default()
            };
            let outcome = attack(
                &instance.doc,
                &instance.victim,
                &instance.provider,
                &TokenF1Similarity,
                &config,
            )
            .unwrap();
            assert!(
                outcome.success || !previous,
                "trial {trial}: k={k} lost the success found at k={}",
                widths[w - 1]
            );
            if outcome.success {
                successes[w] += 1;
            }
            previous = outcome.success;
        }
    }
    for pair in successes.windows(2) {
        assert!(pair[1] >= pair[0], "rates not monotone: {successes:?}");
    }
    gate.pass();
}

// ---------------------------------------------------------------------------
// Criterion 3: importance correctness on analytic victims.

fn random_linear_victim(
    rng: &mut ChaCha8Rng,
    n: usize,
    lo: f64,
    hi: f64,
    min_gap: f64,
) -> (LinearBagVictim, Vec<String>, Vec<f64>) {
    let words: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    loop {
        let coeffs: Vec<f64> = (0..n).map(|_| uniform(rng, lo, hi)).collect();
        let mut sorted = coeffs.clone();
        sorted.sort_by(f64::total_cmp);
        if !sorted.windows(2).all(|w| w[1] - w[0] >= min_gap) {
            continue;
        }
        let vocab: BTreeMap<String, f64> =
            words.iter().cloned().zip(coeffs.iter().copied()).collect();
        return (
            LinearBagVictim::new(vocab, uniform(rng, -1.0, 1.0)),
            words,
            coeffs,
        );
    }
}

fn argsort_desc(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    idx
}

fn spearman(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let rank = |values: &[f64]| {
        let order = argsort_desc(values);
        let mut ranks = vec![0usize; n];
        for (r, &i) in order.iter().enumerate() {
            ranks[i] = r;
        }
        ranks
    };
    let (ra, rb) = (rank(a), rank(b));
    let d2: f64 = ra
        .iter()
        .zip(&rb)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    1.0 - 6.0 * d2 / (n as f64 * (n as f64 * n as f64 - 1.0))
}

#[test]
fn criterion_3_importance_correctness() {
    let gate = Criterion::start(3, "importance ranking correctness");

    let mut rng = ChaCha8Rng::seed_from_u64(0xACC3);
    for trial in 0..100 {
        let n = 3 + (rng.next_u32() as usize % 8);
        let (victim, words, coeffs) = random_linear_victim(&mut rng, n, 0.1, 4.0, 1e-3);
        let doc = tokenize(&words.join(" "), &format!("logit{trial}"), 1).unwrap();
        let ranking = logit_importance(&doc, &victim, &QueryLedger::new()).unwrap();
        assert_eq!(ranking.order, argsort_desc(&coeffs), "trial {trial}");
    }

    for trial in 0u64..20 {
        let (victim, words, coeffs) = random_linear_victim(&mut rng, 5, -2.5, 2.5, 0.4);
        let doc = tokenize(&words.join(" "), &format!("lime{trial}"), 1).unwrap();
        let config = LimeConfig {
            num_samples: 500,
            rng_seed: 0xACC3 + trial,
            ..LimeConfig::default()
        };
        let ranking = lime_importance(&doc, &victim, &config, &QueryLedger::new()).unwrap();
        let rho = spearman(&ranking.scores, &coeffs);
        assert!(rho >= 0.9, "trial {trial}: spearman {rho:.3}");
    }
    gate.pass();
}

// ---------------------------------------------------------------------------
// Criterion 4: exact query accounting on the fixed-order search.

#[test]
fn criterion_4_query_accounting() {
    let gate = Criterion::start(4, "query accounting");
    let doc = tokenize("v w x y z", "c4", 1).unwrap();
    let n = doc.tokens.len() as u64;
    let victim = ConstantVictim {
        probabilities: vec![0.1, 0.9],
    };
    let lookup: BTreeMap<String, Vec<String>> = ["v", "w", "x", "y", "z"]
        .into_iter()
        .map(|w| (w.to_string(), vec!["q".to_string()]))
        .collect();
    let provider = TableProvider::new(lookup, Vec::new());

    for depth in 1..=5u64 {
        let config = AttackConfig {
            beam_size_k: 1,
            branching_b: 1,
            hypothesis_count_h: 1,
            max_depth: Some(depth as usize),
            ..AttackConfig::default()
        };
        let outcome = attack(&doc, &victim, &provider, &TokenF1Similarity, &config).unwrap();
        assert_eq!(outcome.queries.importance, n + 1);
        assert_eq!(outcome.queries.expansion, 3 * depth);
        assert_eq!(outcome.queries.verification, 0);
        assert_eq!(outcome.queries.total, (n + 1) + 3 * depth);
    }
    gate.pass();
}

// ---------------------------------------------------------------------------
// Criterion 5: character score against an independent DP oracle.

/// Full-table edit distance, separate from the two-row production version.
fn dp_oracle(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.chars().collect();
    let b: Vec<char> = b.chars().collect();
    let mut table = vec![vec![0usize; b.len() + 1]; a.len() + 1];
    for (i, row) in table.iter_mut().enumerate() {
        row[0] = i;
    }
    for (j, cell) in table[0].iter_mut().enumerate() {
        *cell = j;
    }
    for i in 1..=a.len() {
        for j in 1..=b.len() {
            let cost = usize::from(a[i - 1] != b[j - 1]);
            table[i][j] = (table[i - 1][j] + 1)
                .min(table[i][j - 1] + 1)
                .min(table[i - 1][j - 1] + cost);
        }
    }
    table[a.len()][b.len()]
}

#[test]
fn criterion_5_character_score_oracle() {
    let gate = Criterion::start(5, "character score vs DP oracle");
    let alphabet: Vec<char> = "abcdefgh ABC123,.!?-ÄöüßẞΩλ文字🙂".chars().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(0xACC5);
    let mut random_string = |min_len: usize, max_len: usize| -> String {
        let len = min_len + (rng.next_u32() as usize % (max_len - min_len + 1));
        (0..len)
            .map(|_| alphabet[rng.next_u32() as usize % alphabet.len()])
            .collect()
    };

    for trial in 0..1000 {
        let original = random_string(1, 30);
        let adversarial = random_string(0, 30);
        let dist = dp_oracle(&original, &adversarial);
        let max_len = original.chars().count().max(adversarial.chars().count());
        let expected = 1.0 - dist as f64 / max_len as f64;
        let got = character_score(&original, &adversarial);
        assert_eq!(got, expected, "trial {trial}: {original:?} vs {adversarial:?}");
        assert!((0.0..=1.0).contains(&got));
    }
    // Anchors.
    assert_eq!(character_score("same", "same"), 1.0);
    assert_eq!(character_score("ab", ""), 0.0);
    assert!((character_score("kitten", "sitting") - (1.0 - 3.0 / 7.0)).abs() < 1e-15);
    gate.pass();
}

// ---------------------------------------------------------------------------
// Criterion 7: the POS pipeline.

#[test]
fn criterion_7_pos_pipeline() {
    let gate = Criterion::start(7, "pos mapping and transition pipeline");

    // Totality: the bundled inventory resolves without any fallback warning.
    let mapping = PosMapping::default();
    assert_eq!(mapping.len(), PENN_TO_UPOS.len());
    let all_tags: Vec<String> = PENN_TO_UPOS.iter().map(|(p, _)| p.to_string()).collect();
    let (resolved, warnings) = map_to_upos(&all_tags, &mapping);
    assert_eq!(warnings, 0);
    assert_eq!(resolved.len(), all_tags.len());
    for ((penn, expected), got) in PENN_TO_UPOS.iter().zip(&resolved) {
        assert_eq!(got, expected, "tag {penn}");
    }
    // 17-tag UPOS inventory, spot anchors included.
    assert_eq!(Upos::ALL.len(), 17);
    assert_eq!(mapping.lookup("NN"), Some(Upos::Noun));
    assert_eq!(mapping.lookup("ADD"), Some(Upos::X));
    assert_eq!(mapping.lookup("$"), Some(Upos::Sym));

    // A URL that tagged as five tokens collapsing to one period: length not
    // preserved, so the sample is excluded from the transition stratum.
    let url_window = ["NN", "NFP", "NNP", ":", "ADD"];
    let orig_penn: Vec<String> = ["NNS", "VBP"]
        .iter()
        .chain(url_window.iter())
        .map(|t| t.to_string())
        .collect();
    let adv_penn: Vec<String> = ["NNS", "VBP", "NFP"].iter().map(|t| t.to_string()).collect();
    let (orig_upos, _) = map_to_upos(&orig_penn, &mapping);
    let (adv_upos, _) = map_to_upos(&adv_penn, &mapping);
    let diff = pos_diff(&orig_upos, &adv_upos);
    assert!(!diff.length_preserved);
    assert!(diff.changed_positions.is_empty());
    assert!(!qualifies_for_transition(1, &diff));

    // Transition totals conserve the qualifying sample count.
    let samples = vec![
        (vec![Upos::Propn, Upos::Verb], vec![Upos::Noun, Upos::Verb]),
        (vec![Upos::Det, Upos::Propn], vec![Upos::Det, Upos::Noun]),
        (vec![Upos::Sym], vec![Upos::Punct]),
    ];
    let matrix = build_transition_matrix(&samples).unwrap();
    assert_eq!(matrix.total(), samples.len() as u64);
    assert_eq!(matrix.count(Upos::Propn, Upos::Noun), 2);
    assert_eq!(matrix.count(Upos::Sym, Upos::Punct), 1);
    for tag in Upos::ALL {
        assert_eq!(matrix.count(tag, tag), 0);
    }

    // The bundled rule tagger reproduces the URL-collapse shape end to end.
    let tagger = RuleTagger;
    let orig = tagger.tag("police say http://t.co/tYCeEMKwOo").unwrap();
    let adv = tagger.tag("police say .").unwrap();
    assert_eq!(orig.len(), adv.len(), "rule tagger keeps URLs to one token");

    gate.pass();
}

// ---------------------------------------------------------------------------
// Criterion 8: end-to-end determinism of the attack command.

#[test]
fn criterion_8_end_to_end_determinism() {
    let gate = Criterion::start(8, "end-to-end determinism");
    let dir = tempfile::tempdir().unwrap();
    let config_path = dir.path().join("config.toml");
    let dataset_path = dir.path().join("toy.jsonl");
    fs::write(
        &config_path,
        r#"
[attack]
beam_size_k = 3
branching_b = 2
hypothesis_count_h = 2
importance_method = "lime"

[lime]
num_samples = 64

[victim]
kind = "linear_bag"
bias = -0.5
[victim.vocabulary]
fake = 2.0
hoax = 1.5
story = 0.3

[provider]
kind = "table"
fallback = ["thing"]
[provider.table]
fake = ["true", "real"]
hoax = ["tale"]
"#,
    )
    .unwrap();
    fs::write(
        &dataset_path,
        "{\"id\":\"s0\",\"label\":1,\"text\":\"fake hoax story today\"}\n\
         {\"id\":\"s1\",\"label\":1,\"text\":\"the fake story keeps spreading\"}\n\
         {\"id\":\"s2\",\"label\":0,\"text\":\"calm verified reporting here\"}\n",
    )
    .unwrap();

    let run = |out: &Path| {
        let output = Command::new(env!("CARGO_BIN_EXE_beamstrike"))
            .args([
                "attack",
                "--config",
                config_path.to_str().unwrap(),
                "--dataset",
                dataset_path.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
                "--seed",
                "1234",
            ])
            .output()
            .unwrap();
        assert!(output.status.success(), "{}", String::from_utf8_lossy(&output.stderr));
        fs::read(out.join("outcomes.jsonl")).unwrap()
    };

    let first = run(&dir.path().join("run1"));
    let second = run(&dir.path().join("run2"));
    assert!(!first.is_empty());
    assert_eq!(first, second, "outcomes.jsonl differed between identical runs");
    gate.pass();
}

// ---------------------------------------------------------------------------
// Criterion 9: graceful degradation on unreachable endpoints.

fn closed_port() -> u16 {
    let listener = std::net::TcpListener::bind("127.0.0.1:0").unwrap();
    listener.local_addr().unwrap().port()
}

#[test]
fn criterion_9_degradation_without_crash() {
    let gate = Criterion::start(9, "degradation on unreachable endpoints");
    let dir = tempfile::tempdir().unwrap();
    let dataset_path = dir.path().join("toy.jsonl");
    fs::write(
        &dataset_path,
        "{\"id\":\"s0\",\"label\":1,\"text\":\"fake story one\"}\n\
         {\"id\":\"s1\",\"label\":1,\"text\":\"fake story two\"}\n\
         {\"id\":\"s2\",\"label\":1,\"text\":\"fake story three\"}\n",
    )
    .unwrap();

    // Unreachable victim: every sample degrades to a failure outcome, the
    // process still exits cleanly with all artifacts written.
    let victim_config = dir.path().join("dead_victim.toml");
    fs::write(
        &victim_config,
        format!(
            "[victim]\nkind = \"http\"\nurl = \"http://127.0.0.1:{}\"\ntimeout_s = 2\n",
            closed_port()
        ),
    )
    .unwrap();
    let out_victim = dir.path().join("out_victim");
    let output = Command::new(env!("CARGO_BIN_EXE_beamstrike"))
        .args([
            "attack",
            "--config",
            victim_config.to_str().unwrap(),
            "--dataset",
            dataset_path.to_str().unwrap(),
            "--out",
            out_victim.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "dead victim crashed the run: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let outcomes = fs::read_to_string(out_victim.join("outcomes.jsonl")).unwrap();
    assert_eq!(outcomes.lines().count(), 3);
    for line in outcomes.lines() {
        let value: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(value["success"], false);
        assert!(value["error"].is_string(), "missing error note: {line}");
    }
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_victim.join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["success_rate"], 0.0);
    assert_eq!(summary["valid_records"], 0);

    // Unreachable provider: expansions degrade to delete/skip, and deleting
    // the trigger still flips this victim, so successes survive.
    let provider_config = dir.path().join("dead_provider.toml");
    fs::write(
        &provider_config,
        format!(
            "[victim]\nkind = \"keyword_rule\"\ntriggers = [\"fake\"]\n\n\
             [provider]\nkind = \"http\"\nurl = \"http://127.0.0.1:{}\"\ntimeout_s = 2\n",
            closed_port()
        ),
    )
    .unwrap();
    let out_provider = dir.path().join("out_provider");
    let output = Command::new(env!("CARGO_BIN_EXE_beamstrike"))
        .args([
            "attack",
            "--config",
            provider_config.to_str().unwrap(),
            "--dataset",
            dataset_path.to_str().unwrap(),
            "--out",
            out_provider.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(
        output.status.success(),
        "dead provider crashed the run: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_provider.join("summary.json")).unwrap())
            .unwrap();
    let success_rate = summary["success_rate"].as_f64().unwrap();
    assert!(
        success_rate > 0.0,
        "expected nonzero successes with a dead provider, got {summary}"
    );
    gate.pass();
}
