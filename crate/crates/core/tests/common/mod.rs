#![allow(dead_code)]

use std::path::{Path, PathBuf};

use serde_json::json;

/// Runs the CLI in-process and returns `(exit code, stdout, stderr)`.
pub fn run_cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("compsel").chain(args.iter().copied());
    let code = compsel::cli::run_with_io(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

pub fn scenario_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/paper-fig2.json")
}

fn write_lines(path: &Path, rows: &[serde_json::Value]) {
    let text: String = rows.iter().map(|r| format!("{r}\n")).collect();
    std::fs::write(path, text).unwrap();
}

/// Input files for every subcommand, written into `dir`.
pub struct Fixtures {
    pub corpus: PathBuf,
    pub validation: PathBuf,
    pub vectors: PathBuf,
    pub validation_vectors: PathBuf,
    pub ppl: PathBuf,
    pub runs: PathBuf,
    pub crossing: PathBuf,
}

const TRAIN: [&str; 8] = [
    "the cat sat on the mat",
    "dogs chase cats in the park",
    "stock prices fell sharply today",
    "the mat was red and the cat was black",
    "rain is expected over the weekend",
    "a cat and a dog became friends",
    "markets rallied after the announcement",
    "parks are busy when the weather is warm",
];
const VALIDATION: [&str; 3] = ["where did the cat sit", "the dog in the park", "weather for the weekend"];

pub fn write_fixtures(dir: &Path) -> Fixtures {
    let f = Fixtures {
        corpus: dir.join("train.jsonl"),
        validation: dir.join("val.jsonl"),
        vectors: dir.join("train_vecs.jsonl"),
        validation_vectors: dir.join("val_vecs.jsonl"),
        ppl: dir.join("ppl.jsonl"),
        runs: dir.join("runs.jsonl"),
        crossing: dir.join("crossing.json"),
    };
    let train: Vec<_> = TRAIN
        .iter()
        .enumerate()
        .map(|(i, t)| json!({ "id": format!("t{i}"), "text": t }))
        .collect();
    write_lines(&f.corpus, &train);
    let val: Vec<_> = VALIDATION
        .iter()
        .enumerate()
        .map(|(i, t)| json!({ "id": format!("v{i}"), "text": t }))
        .collect();
    write_lines(&f.validation, &val);

    let vec_of = |i: usize| vec![(i as f64 * 0.7).sin(), (i as f64 * 1.3).cos(), 0.25 * i as f64 - 0.5];
    let tv: Vec<_> = (0..TRAIN.len())
        .map(|i| json!({ "id": format!("t{i}"), "vector": vec_of(i) }))
        .collect();
    write_lines(&f.vectors, &tv);
    let vv: Vec<_> = (0..VALIDATION.len())
        .map(|i| json!({ "id": format!("v{i}"), "vector": vec_of(i + 11) }))
        .collect();
    write_lines(&f.validation_vectors, &vv);

    let ppl: Vec<_> = (0..TRAIN.len())
        .map(|i| json!({ "id": format!("t{i}"), "score": 3.0 + ((i * 5) % 8) as f64 }))
        .collect();
    write_lines(&f.ppl, &ppl);

    let mut runs = Vec::new();
    for (m, lam, fixed) in [("random", 2.0, 0.0), ("bm25", 4.0, 1e3), ("ppl", 8.0, 2e5)] {
        for i in 1..=6 {
            let k = 1e4 * i as f64 / 6.0;
            let c = 10.0 * k + fixed;
            let full = 10.0 * 1e4 + fixed;
            let p = 0.3 * (1.0 - (-lam * c / full).exp()) + 0.2;
            runs.push(json!({ "method": m, "tokens_trained": k, "compute": c, "performance": p }));
        }
    }
    write_lines(&f.runs, &runs);

    let crossing = json!({
        "curve": { "p0": 0.3, "pbar": 0.6, "lam": 1.0 },
        "cost": { "label": "ppl", "fixed_selection_flops": 4000.0, "train_flops_per_token": 1.0, "dataset_tokens": 1000.0 },
        "frontier": { "a": 0.05, "b": 0.0 },
        "ratio_grid": (10..=100).map(|i| i as f64 / 10.0).collect::<Vec<_>>(),
        "max_tasks": 50,
    });
    std::fs::write(&f.crossing, crossing.to_string()).unwrap();
    f
}
