//! Acceptance suite. Each criterion prints one `PASS` or `FAIL` line; the
//! process exits non-zero if any criterion fails.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use range_median::datagen::{self, Op};
use range_median::harness::{self, BenchConfig, Mode, Structure};
use range_median::oracle::oracle_select_values;
use range_median::types::ceil_log2;
use range_median::{
    filter, naive_filter, CascadeTree, CompactTree, DynamicTree, ElementHandle, Parallelism,
    RangeQuery, SelectionStrategy,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        let held: bool = $cond;
        if !held {
            return Err(format!($($msg)+));
        }
    };
}

const SAMPLE: [f64; 10] = [3.0, 7.0, 5.5, 4.0, 9.0, 6.2, 9.0, 4.0, 2.0, 5.0];

fn worked_example() -> Outcome {
    let start = Instant::now();
    let q = RangeQuery::median(3, 8);
    let oracle = oracle_select_values(&SAMPLE, &q).map_err(|e| e.to_string())?;
    ensure!(
        oracle.value == 5.5 && oracle.index == 3,
        "oracle gave {oracle:?}"
    );

    let mut cascade = CascadeTree::new(&SAMPLE).unwrap();
    let got = cascade.query(&q).unwrap();
    ensure!(got.value == 5.5 && got.index == 3, "cascade gave {got:?}");
    let root = cascade.root();
    let low_count = (root.low_pred()[8] - root.low_pred()[2]) as usize;
    let high_count = q.len() - low_count;
    let p = q.resolve(SAMPLE.len()).unwrap();

    let mut compact = CompactTree::new(&SAMPLE).unwrap();
    let got = compact.query(&q).unwrap();
    ensure!(got.value == 5.5 && got.index == 3, "compact gave {got:?}");
    let bits = compact.root().lowbits().unwrap();
    let compact_low = bits[2..8].iter().filter(|&&b| b).count();

    let (mut dynamic, h) = DynamicTree::from_values(&SAMPLE).unwrap();
    let got = dynamic.query(h[2], h[7], None).unwrap();
    ensure!(got == 5.5, "dynamic gave {got}");
    let elapsed = start.elapsed();

    ensure!(
        low_count == 2 && compact_low == 2,
        "low counts {low_count}/{compact_low}, expected 2"
    );
    ensure!(high_count == 4, "high count {high_count}, expected 4");
    ensure!(
        p == 3 && p > low_count && p - low_count == 1,
        "descent rank {}",
        p - low_count
    );
    ensure!(elapsed < Duration::from_millis(1), "took {elapsed:?}");
    Ok(format!(
        "value 5.5 at index 3 from all four; low=2 high=4 next rank=1; {elapsed:?}"
    ))
}

fn oracle_equivalence() -> Outcome {
    let mut trials = 0;
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = rng.gen_range(1..=2000);
        // half the seeds use a tiny value range to force many ties
        let range = if seed % 2 == 0 { 8 } else { 1 << 40 };
        let values = datagen::random_ints(n, range, seed);
        let strategy = if seed % 3 == 0 {
            SelectionStrategy::Deterministic
        } else {
            SelectionStrategy::Randomized { seed }
        };
        let mut cascade = CascadeTree::with_strategy(&values, strategy).unwrap();
        let mut compact = CompactTree::with_strategy(&values, strategy).unwrap();
        let (mut dynamic, handles) = DynamicTree::from_values(&values).unwrap();
        for q in datagen::random_queries(n, 500, true, seed) {
            let expected = oracle_select_values(&values, &q).unwrap();
            let a = cascade.query(&q).unwrap();
            let b = compact.query(&q).unwrap();
            let c = dynamic
                .query(handles[q.left - 1], handles[q.right - 1], q.rank)
                .unwrap();
            ensure!(
                a == expected && b == expected && c == expected.value,
                "seed {seed} query {q}: oracle {expected:?}, cascade {a:?}, compact {b:?}, dynamic {c}"
            );
            trials += 1;
        }
    }
    ensure!(trials == 10_000, "ran {trials} trials");
    Ok(format!(
        "{trials} random-rank queries over 20 seeds agree exactly"
    ))
}

fn lazy_amortization() -> Outcome {
    let n = 1usize << 16;
    let values = datagen::random_reals(n, 7);
    let step_limit = 2 * u64::from(ceil_log2(n));
    let mut worst_ratio: f64 = 0.0;
    for k in [1usize, 4, 16, 64, 256] {
        let queries = datagen::random_queries(n, k, true, k as u64);
        let mut cascade = CascadeTree::new(&values).unwrap();
        let mut compact = CompactTree::new(&values).unwrap();
        let mut max_steps = 0;
        for q in &queries {
            let (_, t) = cascade.query_traced(q).unwrap();
            let (_, u) = compact.query_traced(q).unwrap();
            max_steps = max_steps.max(t.cascade_steps).max(u.cascade_steps);
        }
        let bound = (n * (k.ilog2() as usize + 2)) as u64;
        for (name, partitioned) in [
            ("cascade", cascade.stats().elements_partitioned),
            ("compact", compact.stats().elements_partitioned),
        ] {
            ensure!(
                partitioned <= bound,
                "{name} k={k}: partitioned {partitioned} > {bound}"
            );
            worst_ratio = worst_ratio.max(partitioned as f64 / bound as f64);
        }
        ensure!(
            max_steps <= step_limit,
            "k={k}: {max_steps} cascade steps > {step_limit}"
        );
    }
    Ok(format!(
        "partitioned at most {:.0}% of n(floor(log2 k)+2); steps per query <= {step_limit}",
        worst_ratio * 100.0
    ))
}

fn linear_space() -> Outcome {
    let mut small = CompactTree::new(&datagen::random_reals(1024, 1)).unwrap();
    small.build_eager(Parallelism::default());
    let payload = small.space_report().payload_bits;
    ensure!(payload == 10 * 1024, "payload {payload} bits for n=1024");

    let n = 1usize << 20;
    let mut big = CompactTree::new(&datagen::random_reals(n, 2)).unwrap();
    big.build_eager(Parallelism::default());
    let report = big.space_report();
    let words = report.words_per_element(n);
    ensure!(words <= 4.0, "{words:.3} words per element");
    Ok(format!(
        "n=1024 payload {payload} bits; n=2^20 uses {words:.3} words/element ({} directory bits)",
        report.directory_bits
    ))
}

fn eager_queries() -> Outcome {
    let n = 1usize << 20;
    let mut tree = CompactTree::new(&datagen::random_reals(n, 3)).unwrap();
    tree.build_eager(Parallelism::default());
    let limit = u64::from(ceil_log2(n)) + 1;
    let mut max_nodes = 0;
    for q in datagen::random_queries(n, 100_000, true, 4) {
        let (_, t) = tree.query_frozen(&q).map_err(|e| e.to_string())?;
        ensure!(t.splits == 0, "query {q} split {} nodes", t.splits);
        max_nodes = max_nodes.max(t.nodes_visited);
    }
    ensure!(max_nodes <= limit, "visited {max_nodes} nodes > {limit}");
    Ok(format!(
        "10^5 queries, at most {max_nodes} nodes visited (limit {limit}), no splits"
    ))
}

fn dynamic_updates() -> Outcome {
    let ops = datagen::random_ops(10_000, 1000, 11);
    let mut tree = DynamicTree::new();
    let mut by_id: Vec<Option<ElementHandle>> = vec![None];
    let mut shadow: Vec<(ElementHandle, i64)> = Vec::new();
    let (mut queries, mut updates) = (0u64, 0u64);
    for op in &ops {
        match *op {
            Op::Insert { after, value } => {
                let anchor = (after != 0).then(|| by_id[after].unwrap());
                let h = tree.insert(anchor, value).map_err(|e| e.to_string())?;
                let pos = match anchor {
                    None => 0,
                    Some(a) => shadow.iter().position(|x| x.0 == a).unwrap() + 1,
                };
                shadow.insert(pos, (h, value));
                by_id.push(Some(h));
                updates += 1;
            }
            Op::Delete { id } => {
                let h = by_id[id].take().unwrap();
                tree.delete(h).map_err(|e| e.to_string())?;
                shadow.retain(|x| x.0 != h);
                updates += 1;
            }
            Op::Query { from, to, rank } => {
                let (a, b) = (by_id[from].unwrap(), by_id[to].unwrap());
                let lo = shadow.iter().position(|x| x.0 == a).unwrap();
                let hi = shadow.iter().position(|x| x.0 == b).unwrap();
                let window: Vec<i64> = shadow[lo..=hi].iter().map(|x| x.1).collect();
                let q = RangeQuery {
                    left: 1,
                    right: window.len(),
                    rank,
                };
                let expected = oracle_select_values(&window, &q).unwrap().value;
                let got = tree.query(a, b, rank).map_err(|e| e.to_string())?;
                ensure!(got == expected, "query {from}..{to}: {got} != {expected}");
                queries += 1;
            }
        }
    }
    tree.audit()?;
    let n_max = tree.max_len() as f64;
    let bound = 8.0 * updates as f64 * n_max.log2();
    let rebuilt = tree.stats().rebuild_elements as f64;
    ensure!(rebuilt <= bound, "rebuilt {rebuilt} elements > {bound:.0}");
    Ok(format!(
        "{queries} queries exact over {updates} updates; rebuilt {rebuilt} elements (bound {bound:.0})"
    ))
}

fn median_filter() -> Outcome {
    for seed in 0..20 {
        let img = datagen::random_image(64, 64, 255, seed);
        for r in [1, 2, 5] {
            let (fast, _) = filter(&img, r, Parallelism::default()).unwrap();
            ensure!(
                fast == naive_filter(&img, r).unwrap(),
                "image {seed} r={r} differs"
            );
        }
    }
    let img = datagen::random_image(256, 256, 255, 99);
    let mut per_pixel = Vec::new();
    for r in [2usize, 4, 8, 16] {
        let (_, stats) = filter(&img, r, Parallelism::default()).unwrap();
        per_pixel.push((r, stats.comparisons as f64 / (256.0 * 256.0)));
    }
    // best single constant for y = c * log2(r)^2 in the multiplicative sense
    let ratios: Vec<f64> = per_pixel
        .iter()
        .map(|&(r, y)| y / (r as f64).log2().powi(2))
        .collect();
    let c = (ratios.iter().map(|x| x.ln()).sum::<f64>() / ratios.len() as f64).exp();
    let report = per_pixel
        .iter()
        .map(|(r, y)| format!("r={r}:{y:.0}"))
        .collect::<Vec<_>>()
        .join(" ");
    let worst = ratios
        .iter()
        .map(|x| (x / c).max(c / x))
        .fold(1.0, f64::max);
    ensure!(
        worst <= 2.0,
        "filter matches naive on 60 images, but comparisons per pixel [{report}] \
         are off the c*log2(r)^2 fit (c={c:.1}) by {worst:.2}x"
    );
    Ok(format!(
        "filter matches naive on 60 images; per-pixel [{report}] within {worst:.2}x of c={c:.1}"
    ))
}

fn scaling() -> Outcome {
    let cfg = BenchConfig {
        structure: Structure::Cascade,
        mode: Mode::Lazy,
        strategy: SelectionStrategy::default(),
        seed: 0,
        grid: "n=2^14:2^18,k=n".parse().unwrap(),
        reps: 1,
        parallelism: Parallelism::default(),
    };
    let rows = harness::run_grid(&cfg).map_err(|e| e.to_string())?;
    let constants: Vec<f64> = rows
        .iter()
        .map(|r| r.comparisons as f64 / (r.n as f64 * (r.n as f64).log2()))
        .collect();
    let hi = constants.iter().copied().fold(f64::MIN, f64::max);
    let lo = constants.iter().copied().fold(f64::MAX, f64::min);
    let list = constants
        .iter()
        .map(|c| format!("{c:.2}"))
        .collect::<Vec<_>>()
        .join(" ");
    ensure!(
        hi / lo <= 1.5,
        "comparisons/(n log2 n) = [{list}] spread {:.2}",
        hi / lo
    );
    Ok(format!(
        "comparisons/(n log2 n) = [{list}], spread {:.2}",
        hi / lo
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 worked example", worked_example, Duration::from_secs(1)),
        (
            "2 oracle equivalence",
            oracle_equivalence,
            Duration::from_secs(60),
        ),
        (
            "3 lazy amortization",
            lazy_amortization,
            Duration::from_secs(10),
        ),
        ("4 linear space", linear_space, Duration::from_secs(30)),
        (
            "5 eager query bound",
            eager_queries,
            Duration::from_secs(20),
        ),
        (
            "6 dynamic updates",
            dynamic_updates,
            Duration::from_secs(60),
        ),
        ("7 median filter", median_filter, Duration::from_secs(120)),
        ("8 scaling", scaling, Duration::from_secs(120)),
    ];
    let mut failures = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run().and_then(|detail| {
            let elapsed = start.elapsed();
            if elapsed < limit {
                Ok(format!("{detail} [{elapsed:.2?}]"))
            } else {
                Err(format!(
                    "{detail}, but took {elapsed:.2?} (limit {limit:?})"
                ))
            }
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL criterion {name}: {detail}");
            }
        }
    }
    if failures > 0 {
        println!("{failures} of 8 acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all 8 acceptance criteria passed");
}
