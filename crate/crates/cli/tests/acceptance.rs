//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use cantor_doubling::measure::max_component_measure;
use cantor_doubling::min_uniform_constant;
use cantor_doubling::rational::{integer, ratio};
use cantor_doubling::{
    ball_ratio, check_corollary, check_theorem1, check_theorem2, check_theorem3, classify_series,
    doubling_series, enumerate_balls, interval_measure, CantorConfig, Corollary, ExtensionOptions,
    ExtensionVerdict, Growth, Horizon, Interval, Lattice, MatchingTail, MeasureSpec, OracleOptions,
    OracleReport, Outcome, ProbVector, Rational, SequenceSpec, TailRule, Word, WordMeasureRule,
    DEFAULT_BALL_BUDGET, DEFAULT_BUDGET,
};
use cantor_doubling_cli::commands::oracle_options;
use cantor_doubling_cli::RunConfig;
use num::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const GEOMETRY_DEPTH: usize = 12;
const GEOMETRY_TIME_LIMIT: Duration = Duration::from_secs(5);
const ORACLE_SCHEDULE: [usize; 4] = [4, 6, 8, 10];
const ORACLE_EVAL_DEPTH: usize = 14;
const ORACLE_TIME_LIMIT: Duration = Duration::from_secs(120);
const MIN_DICHOTOMY_CONFIGS: usize = 10;
const SOUNDNESS_BALLS: usize = 100;
const ADDITIVITY_DEPTH: usize = 8;
const RESTRICTION_DEPTH: usize = 8;
const KERNEL_VECTORS: usize = 1000;
const KERNEL_MAX_LEN: usize = 8;
const SEED: u64 = 0x5eed_cafe;

type Criterion = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($arg:tt)+) => {
        if !$cond {
            return Err(format!($($arg)+));
        }
    };
}

struct Entry {
    name: String,
    run: RunConfig,
    config: CantorConfig,
}

fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/corpus")
}

fn load_corpus() -> Vec<Entry> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|path| {
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            let resolved = RunConfig::load(&path).unwrap().resolve().unwrap();
            Entry {
                name,
                run: resolved.run,
                config: resolved.config,
            }
        })
        .collect()
}

fn gamma() -> Rational {
    ratio(3, 2)
}

fn criterion_1(corpus: &[Entry]) -> Criterion {
    let start = Instant::now();
    ensure!(corpus.len() == 20, "corpus has {} configs", corpus.len());
    let mut gap_levels = 0;
    for e in corpus {
        let cfg = &e.config;
        let levels = cfg.levels(GEOMETRY_DEPTH);
        for k in 1..=GEOMETRY_DEPTH {
            let n = integer(cfg.n(k) as i64);
            let eps = levels[k].epsilon.clone().unwrap();
            let lhs = &n * &levels[k].delta + (n - Rational::one()) * eps;
            ensure!(
                lhs == levels[k - 1].delta,
                "{}: tiling fails at k = {k}",
                e.name
            );
            let Some(g) = cfg.gap_context(k) else {
                continue;
            };
            gap_levels += 1;
            let (m, s) = (g.m, g.s as i64);
            ensure!(
                cfg.depth_sandwich_holds(k, m)
                    && !cfg.depth_sandwich_holds(k, m + 1)
                    && !cfg.depth_sandwich_holds(k, m - 1),
                "{}: m_{k} = {m} is not the unique depth",
                e.name
            );
            ensure!(
                cfg.count_sandwich_holds(k, m, s)
                    && !cfg.count_sandwich_holds(k, m, s + 1)
                    && !cfg.count_sandwich_holds(k, m, s - 1),
                "{}: s_{k} = {s} is not the unique count",
                e.name
            );
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < GEOMETRY_TIME_LIMIT, "took {elapsed:?}");
    Ok(format!(
        "{} configs, {gap_levels} gap levels checked, {:.2} s",
        corpus.len(),
        elapsed.as_secs_f64()
    ))
}

fn criterion_2() -> Criterion {
    let tenth = CantorConfig::constant(2, ratio(1, 10)).unwrap();
    for k in 1..=GEOMETRY_DEPTH {
        let g = tenth.gap_context(k);
        ensure!(
            g.map(|g| (g.m, g.s)) == Some((2, 1)),
            "(2, 1/10) at k = {k}: {g:?}"
        );
    }
    let thirds = CantorConfig::middle_thirds();
    let levels = thirds.levels(GEOMETRY_DEPTH);
    for k in 1..=GEOMETRY_DEPTH {
        ensure!(
            !thirds.in_lambda(k),
            "middle thirds has k = {k} in the gap set"
        );
        ensure!(
            levels[k].epsilon.as_ref() == Some(&levels[k].delta),
            "middle thirds: gap and component lengths differ at k = {k}"
        );
    }
    Ok(format!("k <= {GEOMETRY_DEPTH}, exact"))
}

fn strip_words(outcome: &Outcome) -> Outcome {
    match outcome {
        Outcome::NotDoubling {
            witness,
            growth_per_period,
            period,
        } => Outcome::NotDoubling {
            witness: witness
                .iter()
                .map(|r| cantor_doubling::ConditionRecord {
                    word: None,
                    gap_index: None,
                    ..r.clone()
                })
                .collect(),
            growth_per_period: growth_per_period.clone(),
            period: *period,
        },
        other => other.clone(),
    }
}

fn same_verdict(a: &Outcome, b: &Outcome) -> bool {
    match (a, b) {
        (
            Outcome::NotDoubling {
                growth_per_period: ga,
                period: pa,
                ..
            },
            Outcome::NotDoubling {
                growth_per_period: gb,
                period: pb,
                ..
            },
        ) => ga == gb && pa == pb,
        _ => a.same_kind(b),
    }
}

fn criterion_3(corpus: &[Entry]) -> Criterion {
    let corollaries = [
        Corollary::BoundedBranching,
        Corollary::BoundedDepth,
        Corollary::UltimatelyUniform,
    ];
    let mut applied = 0;
    let mut level_only = 0;
    for e in corpus {
        let Some(seq) = e.run.measure.as_matching() else {
            continue;
        };
        let full = check_theorem1(&e.config, seq, Horizon::Symbolic).map_err(|x| x.to_string())?;
        for which in corollaries {
            let Ok(v) = check_corollary(&e.config, seq, which, Horizon::Symbolic) else {
                continue;
            };
            applied += 1;
            ensure!(
                same_verdict(&v.outcome, &full.outcome),
                "{}: {} gives {} but the full check gives {}",
                e.name,
                which.name(),
                v.outcome.kind(),
                full.outcome.kind()
            );
        }
        let rule = WordMeasureRule::LevelOnly {
            sequence: seq.clone(),
        };
        let horizon = e.run.horizons.checker;
        let words =
            check_theorem2(&e.config, &rule, horizon, DEFAULT_BUDGET).map_err(|x| x.to_string())?;
        let levels =
            check_theorem1(&e.config, seq, Horizon::Levels(horizon)).map_err(|x| x.to_string())?;
        ensure!(
            strip_words(&words.outcome) == levels.outcome,
            "{}: word check outcome differs",
            e.name
        );
        ensure!(
            words.sup_constant == levels.sup_constant,
            "{}: word check constant {} vs {}",
            e.name,
            words.sup_constant,
            levels.sup_constant
        );
        level_only += 1;
    }
    Ok(format!(
        "{applied} corollary verdicts agree, {level_only} level-only word checks reproduce the level check"
    ))
}

/// Constant `n = 2`, matching vectors and period-one tails in `c` and `P`.
fn eventually_constant(e: &Entry) -> bool {
    let Some(seq) = e.run.measure.as_matching() else {
        return false;
    };
    let c_single =
        !matches!(e.config.c_spec().tail(), TailRule::Periodic { values } if values.len() > 1);
    let p_single = match &seq.tail {
        MatchingTail::Uniform => true,
        MatchingTail::Periodic { vectors } => vectors.len() == 1,
    };
    e.config.n_period() == 1 && e.config.n_max() == 2 && c_single && p_single
}

struct OracleRuns {
    reports: Vec<(String, OracleReport)>,
    dichotomy: Vec<(String, Outcome, Growth)>,
    elapsed: Duration,
}

fn oracle_runs(corpus: &[Entry]) -> Result<OracleRuns, String> {
    let options = OracleOptions {
        eval_depth: ORACLE_EVAL_DEPTH,
        budget: DEFAULT_BALL_BUDGET,
        gamma: gamma(),
    };
    let start = Instant::now();
    let mut reports = Vec::new();
    let mut dichotomy = Vec::new();
    for e in corpus.iter().filter(|e| eventually_constant(e)) {
        let seq = e.run.measure.as_matching().unwrap();
        let verdict =
            check_theorem1(&e.config, seq, Horizon::Symbolic).map_err(|x| x.to_string())?;
        if matches!(verdict.outcome, Outcome::Unknown { .. }) {
            continue;
        }
        let report = doubling_series(&e.run.measure, &e.config, &ORACLE_SCHEDULE, &options)
            .map_err(|x| format!("{}: {x}", e.name))?;
        let label = classify_series(&report.series, &options.gamma);
        dichotomy.push((e.name.clone(), verdict.outcome, label));
        reports.push((e.name.clone(), report));
    }
    let elapsed = start.elapsed();
    for e in corpus {
        if reports.iter().any(|(n, _)| n == &e.name) {
            continue;
        }
        let options = oracle_options(&e.run, None);
        let report = doubling_series(
            &e.run.measure,
            &e.config,
            &e.run.horizons.schedule,
            &options,
        )
        .map_err(|x| format!("{}: {x}", e.name))?;
        reports.push((e.name.clone(), report));
    }
    Ok(OracleRuns {
        reports,
        dichotomy,
        elapsed,
    })
}

fn sup_at(report: &OracleReport, depth: usize) -> Rational {
    report
        .series
        .iter()
        .find(|p| p.depth == depth)
        .expect("depth in schedule")
        .sup_ratio
        .clone()
}

fn criterion_4(runs: &OracleRuns) -> Criterion {
    ensure!(
        runs.dichotomy.len() >= MIN_DICHOTOMY_CONFIGS,
        "only {} decided eventually-constant configs",
        runs.dichotomy.len()
    );
    let (mut bounded, mut growing) = (0, 0);
    for (name, outcome, label) in &runs.dichotomy {
        match outcome {
            Outcome::Doubling { .. } => {
                ensure!(
                    *label == Growth::Bounded,
                    "{name}: doubling but the oracle series grows"
                );
                bounded += 1;
            }
            Outcome::NotDoubling { .. } => {
                ensure!(
                    *label == Growth::Growing,
                    "{name}: not doubling but the oracle series stays bounded"
                );
                growing += 1;
            }
            Outcome::Unknown { .. } => unreachable!(),
        }
    }
    let report = |name: &str| {
        runs.reports
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, r)| r)
            .ok_or_else(|| format!("{name} missing from the oracle runs"))
    };
    let skew = report("quarter_geometric_skew")?;
    let (s6, s10) = (sup_at(skew, 6), sup_at(skew, 10));
    ensure!(
        s10 >= gamma() * &s6,
        "quarter skew: sup(10) = {s10} < 3/2 sup(6) = {s6}"
    );
    let thirds = report("middle_thirds_uniform")?;
    let values: Vec<Rational> = [6, 8, 10].iter().map(|&k| sup_at(thirds, k)).collect();
    ensure!(
        values.iter().all(|v| v == &values[0]),
        "middle thirds uniform: sup ratios {values:?} differ"
    );
    ensure!(runs.elapsed < ORACLE_TIME_LIMIT, "took {:?}", runs.elapsed);
    Ok(format!(
        "{} configs ({bounded} bounded, {growing} growing), {:.1} s",
        runs.dichotomy.len(),
        runs.elapsed.as_secs_f64()
    ))
}

fn criterion_5(corpus: &[Entry], runs: &OracleRuns) -> Criterion {
    for (name, report) in &runs.reports {
        ensure!(
            report
                .series
                .windows(2)
                .all(|w| w[0].sup_ratio <= w[1].sup_ratio),
            "{name}: sup series decreases"
        );
    }
    let pool: Vec<&Entry> = corpus.iter().filter(|e| e.config.n_max() == 2).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut checked = 0;
    let mut attempts = 0;
    let enumerations: Vec<_> = pool
        .iter()
        .map(|e| enumerate_balls(&e.config, 6, DEFAULT_BALL_BUDGET).map_err(|x| x.to_string()))
        .collect::<Result<_, _>>()?;
    let lattices: Vec<Lattice> = pool
        .iter()
        .map(|e| Lattice::new(&e.config, ORACLE_EVAL_DEPTH))
        .collect();
    while checked < SOUNDNESS_BALLS {
        attempts += 1;
        ensure!(
            attempts < 100_000,
            "found only {checked} balls with gap boundaries"
        );
        let i = rng.gen_range(0..pool.len());
        let balls = &enumerations[i].balls;
        let centre = &balls[rng.gen_range(0..balls.len())];
        let r = &centre.radii[rng.gen_range(0..centre.radii.len())];
        let x = &centre.center;
        let lattice = &lattices[i];
        let two = integer(2);
        let boundaries = [x - r, x + r, x - &two * r, x + &two * r];
        let in_gaps = boundaries.iter().all(|b| {
            lattice
                .exact(b)
                .is_some_and(|p| lattice.in_gap(&p, ORACLE_EVAL_DEPTH))
        });
        if !in_gaps {
            continue;
        }
        let e = pool[i];
        let br = ball_ratio(&e.run.measure, &e.config, x, r, ORACLE_EVAL_DEPTH);
        ensure!(
            br.big.is_exact() && br.small.is_exact(),
            "{}: ball ({x}, {r}) has inexact bounds",
            e.name
        );
        ensure!(
            br.ratio_lower == &br.big.upper / &br.small.lower,
            "{}: conservative ratio differs from the exact one at ({x}, {r})",
            e.name
        );
        checked += 1;
    }
    Ok(format!(
        "{checked} balls exact, {} series non-decreasing",
        runs.reports.len()
    ))
}

fn criterion_6(corpus: &[Entry]) -> Criterion {
    let names = [
        "middle_thirds_skew",
        "tenth_skew",
        "ternary_skew",
        "mixed_branching",
        "last_letter_middle_thirds",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut words = 0;
    let mut intervals = 0;
    for name in names {
        let e = corpus
            .iter()
            .find(|e| e.name == name)
            .ok_or_else(|| format!("{name} missing"))?;
        let (spec, cfg) = (&e.run.measure, &e.config);
        for k in 0..ADDITIVITY_DEPTH {
            for w in Word::all(cfg, k) {
                let parent = spec.component_measure(cfg, &w).map_err(|x| x.to_string())?;
                let children: Rational = (1..=cfg.n(k + 1))
                    .map(|i| spec.component_measure(cfg, &w.child(i)).unwrap())
                    .sum();
                ensure!(parent == children, "{name}: additivity fails at {w:?}");
                words += 1;
            }
        }
        for depth in [2, 4, 6, 8] {
            let cap = integer(2) * max_component_measure(spec, cfg, depth);
            for _ in 0..50 {
                let mut a = ratio(rng.gen_range(-100..1100), 1000);
                let mut b = ratio(rng.gen_range(-100..1100), 1000);
                if a > b {
                    std::mem::swap(&mut a, &mut b);
                }
                let bounds =
                    interval_measure(spec, cfg, &Interval::new(a.clone(), b.clone()), depth);
                ensure!(
                    bounds.lower <= bounds.upper && bounds.width() <= cap,
                    "{name}: bracket on [{a}, {b}] at depth {depth} is too wide"
                );
                intervals += 1;
            }
        }
    }
    Ok(format!(
        "{words} additivity identities, {intervals} interval brackets within twice the largest component"
    ))
}

fn two_gap(c: TailRule) -> CantorConfig {
    CantorConfig::new(
        SequenceSpec::constant(integer(2)),
        SequenceSpec::new(vec![], c).unwrap(),
    )
    .unwrap()
}

fn criterion_7() -> Criterion {
    let options = ExtensionOptions::default();
    let uniform = MeasureSpec::uniform();
    let schedule = [4, 6, RESTRICTION_DEPTH];
    let families = [
        ("constant", two_gap(TailRule::constant(ratio(1, 5))), false),
        (
            "geometric",
            two_gap(TailRule::Geometric {
                coefficient: Rational::one(),
                ratio: ratio(1, 4),
            }),
            true,
        ),
        (
            "harmonic",
            two_gap(TailRule::Power {
                coefficient: ratio(1, 4),
                exponent: 1,
            }),
            false,
        ),
    ];
    let mut detail = String::new();
    for (label, cfg, expected) in &families {
        let v = check_theorem3(cfg, &uniform, &schedule, &options).map_err(|x| x.to_string())?;
        ensure!(
            v.is_extendable() == *expected,
            "{label} family: extendable = {}",
            v.is_extendable()
        );
        if let ExtensionVerdict::Extendable {
            measure,
            restriction,
            doubling,
        } = v
        {
            ensure!(
                restriction.passed && restriction.depth == RESTRICTION_DEPTH,
                "restriction fails at {:?}",
                restriction.first_failure
            );
            let bound = integer(2) * measure.max_density() / measure.min_density();
            ensure!(
                doubling.sup_ratio <= bound && doubling.within_bound,
                "extension sup ratio {} exceeds {bound}",
                doubling.sup_ratio
            );
            detail = format!(
                ", {} components restrict correctly, sup ratio {} <= {}",
                restriction.components_checked,
                decimal(&doubling.sup_ratio),
                decimal(&bound)
            );
        }
    }
    Ok(format!(
        "constant/geometric/harmonic give no/yes/no{detail}"
    ))
}

fn decimal(x: &Rational) -> String {
    use num::ToPrimitive;
    format!("{:.3}", x.to_f64().unwrap_or(f64::NAN))
}

fn window(p: &[Rational], start: usize, len: usize) -> Rational {
    p[start..start + len].iter().sum()
}

/// Smallest `C >= 1` with `a <= C b` for every pair of equal-length windows
/// of length at least `s` whose starts differ by at most the length.
fn naive_min(p: &[Rational], s: usize) -> Rational {
    let n = p.len();
    let mut best = Rational::one();
    for l in s..=n {
        for a in 0..=n - l {
            for b in 0..=n - l {
                if a.abs_diff(b) <= l {
                    let r = window(p, a, l) / window(p, b, l);
                    if r > best {
                        best = r;
                    }
                }
            }
        }
    }
    best
}

fn criterion_8() -> Criterion {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    for _ in 0..KERNEL_VECTORS {
        let len = rng.gen_range(1..=KERNEL_MAX_LEN);
        let weights: Vec<i64> = (0..len).map(|_| rng.gen_range(1..=20)).collect();
        let total: i64 = weights.iter().sum();
        let p: Vec<Rational> = weights.iter().map(|&w| ratio(w, total)).collect();
        for s in 1..=3 {
            let got = min_uniform_constant(&p, s).min_c;
            let want = naive_min(&p, s);
            ensure!(got == want, "{p:?} at s = {s}: {got} vs {want}");
        }
    }
    let even = min_uniform_constant(&[ratio(1, 2), ratio(1, 2)], 1).min_c;
    ensure!(even == integer(1), "(1/2, 1/2) gives {even}");
    let skew = ProbVector::new(vec![ratio(1, 3), ratio(2, 3)]).unwrap();
    let single = min_uniform_constant(skew.entries(), 1).min_c;
    ensure!(single == integer(2), "(1/3, 2/3) gives {single}");
    let doubled = min_uniform_constant(&skew.doubled(), 2).min_c;
    ensure!(
        doubled == ratio(5, 4),
        "doubled (1/3, 2/3) at s = 2 gives {doubled}"
    );
    Ok(format!(
        "{KERNEL_VECTORS} vectors at s = 1, 2, 3 and three hand values, exact"
    ))
}

fn run_binary(args: &[&str]) -> Result<String, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cantor-doubling"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    let text = String::from_utf8(out.stdout).map_err(|e| e.to_string())?;
    Ok(text
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"generated_at\""))
        .collect::<Vec<_>>()
        .join("\n"))
}

fn criterion_9() -> Criterion {
    let path = corpus_dir().join("quarter_geometric_skew.json");
    let path = path.to_str().unwrap();
    let runs: [&[&str]; 3] = [
        &["check", path, "--horizon", "8"],
        &["check", path, "--symbolic"],
        &["oracle", path, "--schedule", "2,3,4,5"],
    ];
    for args in runs {
        let first = run_binary(args)?;
        let second = run_binary(args)?;
        ensure!(first == second, "{args:?} differs between runs");
        ensure!(!first.is_empty(), "{args:?} printed nothing");
    }
    Ok("check and oracle reports identical across repeated runs".into())
}

fn main() {
    let corpus = load_corpus();
    let mut results: Vec<(usize, &str, Criterion)> = vec![
        (1, "geometry exactness", criterion_1(&corpus)),
        (2, "hand-derived gap data", criterion_2()),
        (3, "checker and criterion coherence", criterion_3(&corpus)),
    ];
    match oracle_runs(&corpus) {
        Ok(runs) => {
            results.push((4, "checker verdicts against the oracle", criterion_4(&runs)));
            results.push((5, "oracle soundness", criterion_5(&corpus, &runs)));
        }
        Err(e) => {
            results.push((4, "checker verdicts against the oracle", Err(e.clone())));
            results.push((5, "oracle soundness", Err(e)));
        }
    }
    results.push((6, "measure engine", criterion_6(&corpus)));
    results.push((7, "extension dichotomy", criterion_7()));
    results.push((8, "uniformity kernel", criterion_8()));
    results.push((9, "CLI determinism", criterion_9()));

    let mut failed = 0;
    for (n, title, result) in &results {
        match result {
            Ok(detail) => println!("PASS criterion {n} ({title}): {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {n} ({title}): {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
