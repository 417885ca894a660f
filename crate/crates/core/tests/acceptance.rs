//! Acceptance suite: one line per criterion, non-zero exit if any fails.

mod common;

use std::path::PathBuf;
use std::time::Instant;

use outline_energy::analysis::{load_distribution, Dataset};
use outline_energy::geometry::{
    canonical_outline, polygon_area, ShapeKind, FLOOR_AREA, MIN_EDGE_LENGTH,
};
use outline_energy::io;
use outline_energy::numerics::{least_squares_min_norm, symmetric_eigen, Matrix};
use outline_energy::pipeline::{self, AnalysisReport, FitsReport, PipelineConfig};
use outline_energy::sampler::{default_priors, perturb, GridCell, FEATURE_COLUMNS};
use outline_energy::surrogate::{fit, monomial_exponents, r_squared, Condition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Context {
    dir: tempfile::TempDir,
    config: PipelineConfig,
    dataset: Dataset,
    analysis: AnalysisReport,
    fits: FitsReport,
}

impl Context {
    fn build() -> Context {
        let dir = tempfile::tempdir().expect("temp dir");
        let config = PipelineConfig {
            out: dir.path().to_path_buf(),
            ..PipelineConfig::default()
        };
        pipeline::run_all(&config).expect("default pipeline runs");
        let dataset = pipeline::generate(&config).expect("generate");
        let analysis =
            serde_json::from_value(common::read_json(&dir.path().join("analysis.json"))).unwrap();
        let fits =
            serde_json::from_value(common::read_json(&dir.path().join("fits.json"))).unwrap();
        Context {
            dir,
            config,
            dataset,
            analysis,
            fits,
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

type Criterion = (&'static str, fn(&Context) -> Checks);

/// Named sub-checks of one criterion.
#[derive(Default)]
struct Checks {
    items: Vec<(bool, String)>,
}

impl Checks {
    fn check(&mut self, ok: bool, what: impl Into<String>) {
        self.items.push((ok, what.into()));
    }

    fn passed(&self) -> bool {
        self.items.iter().all(|(ok, _)| *ok)
    }

    fn summary(&self) -> String {
        let failed: Vec<&str> = self
            .items
            .iter()
            .filter(|(ok, _)| !ok)
            .map(|(_, s)| s.as_str())
            .collect();
        if failed.is_empty() {
            format!("{} checks", self.items.len())
        } else {
            format!("failed: {}", failed.join("; "))
        }
    }
}

fn c1_dataset_shape(ctx: &Context) -> Checks {
    let mut c = Checks::default();
    let ds = &ctx.dataset;
    c.check(ds.len() == 5760, format!("{} rows", ds.len()));
    for k in ShapeKind::ALL {
        let n = ds.loads_of(k).len();
        c.check(n == 1440, format!("{k}: {n} rows"));
    }
    let file = std::fs::read(ctx.path("dataset.csv")).unwrap();
    let again = io::to_csv_string(&pipeline::generate(&ctx.config).unwrap()).unwrap();
    c.check(file == again.as_bytes(), "rerun is byte-identical");
    for threads in [1, 2, 4] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        let csv =
            pool.install(|| io::to_csv_string(&pipeline::generate(&ctx.config).unwrap()).unwrap());
        c.check(
            csv.as_bytes() == file.as_slice(),
            format!("{threads} thread(s) byte-identical"),
        );
    }
    c
}

fn c2_sampler_statistics(_: &Context) -> Checks {
    let mut c = Checks::default();
    let priors = default_priors();
    let n = 10_000;
    for material in 0..priors.materials.len() {
        // WWR 0.3, shading 0.15 m, glazing 2.72, orientation 180°.
        let cell = GridCell {
            shape: ShapeKind::Square,
            index: 0,
            wwr: 2,
            shading: 1,
            glazing: 1,
            orientation: 6,
            material,
        };
        let nominal = cell.nominal(&priors).to_array();
        let m = &priors.materials[material];
        let sigma = [
            priors.orientation.sigma,
            priors.wwr.sigma,
            priors.shading_depth.sigma,
            priors.glazing_u.sigma,
            m.thickness.sigma,
            m.conductivity.sigma,
            m.density.sigma,
            m.shc.sigma,
        ];
        let mut rng = ChaCha8Rng::seed_from_u64(2024 + material as u64);
        let draws: Vec<[f64; 8]> = (0..n)
            .map(|_| perturb(&cell, &priors, &mut rng).unwrap().to_array())
            .collect();
        for f in 0..8 {
            let mean = draws.iter().map(|d| d[f]).sum::<f64>() / n as f64;
            let sd =
                (draws.iter().map(|d| (d[f] - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
            let name = format!("{}/{}", m.name, FEATURE_COLUMNS[f]);
            c.check(
                (sd / sigma[f] - 1.0).abs() <= 0.10,
                format!("{name} std {sd:.5} vs {}", sigma[f]),
            );
            c.check(
                (mean - nominal[f]).abs() <= 3.0 * sigma[f] / (n as f64).sqrt(),
                format!("{name} mean {mean:.5} vs {}", nominal[f]),
            );
        }
    }
    c
}

fn c3_geometry(_: &Context) -> Checks {
    let mut c = Checks::default();
    for k in ShapeKind::ALL {
        let o = canonical_outline(k);
        let area = polygon_area(&o.vertices).unwrap();
        c.check(
            (area - FLOOR_AREA).abs() <= 1e-9,
            format!("{k} area {area}"),
        );
        c.check(
            o.min_edge_length() >= MIN_EDGE_LENGTH,
            format!("{k} min edge {}", o.min_edge_length()),
        );
        let expected = if k == ShapeKind::Square { 40.0 } else { 58.0 };
        c.check(
            o.perimeter == expected,
            format!("{k} perimeter {}", o.perimeter),
        );
    }
    c
}

fn c4_shape_ordering(ctx: &Context) -> Checks {
    let mut c = Checks::default();
    let s = &ctx.analysis.shape_summary;
    let sq = s.get(ShapeKind::Square).unwrap();
    let mut std_sum = 0.0;
    for k in [ShapeKind::TShape, ShapeKind::UShape, ShapeKind::LShape] {
        let o = s.get(k).unwrap();
        c.check(
            sq.mean < o.mean,
            format!("mean square {:.2} < {k} {:.2}", sq.mean, o.mean),
        );
        std_sum += o.std;
    }
    let gap = ctx.analysis.shape_comparison.unwrap().mean_pct;
    c.check((8.0..=16.0).contains(&gap), format!("mean gap {gap:.2}%"));
    c.check(
        sq.std < std_sum / 3.0,
        format!("std square {:.2} < avg {:.2}", sq.std, std_sum / 3.0),
    );
    c
}

fn c5_load_range(ctx: &Context) -> Checks {
    let mut c = Checks::default();
    let lo = ctx
        .dataset
        .rows
        .iter()
        .map(|r| r.load)
        .fold(f64::INFINITY, f64::min);
    let hi = ctx
        .dataset
        .rows
        .iter()
        .map(|r| r.load)
        .fold(f64::NEG_INFINITY, f64::max);
    c.check(lo >= 150.0, format!("min load {lo:.2}"));
    c.check(hi <= 450.0, format!("max load {hi:.2}"));
    c
}

fn c6_pca_structure(ctx: &Context) -> Checks {
    let mut c = Checks::default();
    let p = &ctx.analysis.pca;
    let r = &p.explained_ratio;
    c.check(
        (0.30..=0.50).contains(&r[0]),
        format!("PC1 ratio {:.4} in [0.30, 0.50]", r[0]),
    );
    let mut top: Vec<usize> = p.ranked_variables(0)[..4].to_vec();
    top.sort();
    c.check(
        top == [4, 5, 6, 7],
        format!("top-4 |PC1| loadings are wall features (got {top:?})"),
    );
    for (i, v) in r.iter().enumerate().take(5).skip(1) {
        c.check(
            (0.08..=0.17).contains(v),
            format!("PC{} ratio {v:.4} in [0.08, 0.17]", i + 1),
        );
    }
    c.check(
        p.cumulative_ratio[4] >= 0.80,
        format!("5-PC cumulative {:.4} >= 0.80", p.cumulative_ratio[4]),
    );
    let sum: f64 = r.iter().sum();
    c.check((sum - 1.0).abs() <= 1e-10, format!("ratios sum to {sum}"));
    c
}

fn c7_numerics_oracles(_: &Context) -> Checks {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_res, mut worst_orth) = (0.0f64, 0.0f64);
    for _ in 0..100 {
        let mut a = Matrix::zeros(8, 8);
        for i in 0..8 {
            for j in i..8 {
                let v = rng.random_range(-1.0..1.0);
                a[(i, j)] = v;
                a[(j, i)] = v;
            }
        }
        let e = symmetric_eigen(&a).unwrap();
        for k in 0..8 {
            let v = e.eigenvectors.column(k);
            let av = a.mul_vec(&v);
            for i in 0..8 {
                worst_res = worst_res.max((av[i] - e.eigenvalues[k] * v[i]).abs());
            }
            for l in 0..8 {
                let dot: f64 = (0..8)
                    .map(|i| e.eigenvectors[(i, k)] * e.eigenvectors[(i, l)])
                    .sum();
                worst_orth = worst_orth.max((dot - if k == l { 1.0 } else { 0.0 }).abs());
            }
        }
    }
    c.check(worst_res <= 1e-8, format!("eigen residual {worst_res:.2e}"));
    c.check(
        worst_orth <= 1e-10,
        format!("orthonormality {worst_orth:.2e}"),
    );
    for (rows, cols) in [(6, 4), (4, 6)] {
        let mut worst = 0.0f64;
        for _ in 0..50 {
            let x: Vec<Vec<f64>> = (0..rows)
                .map(|_| (0..cols).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let y: Vec<f64> = (0..rows).map(|_| rng.random_range(-5.0..5.0)).collect();
            let beta = least_squares_min_norm(&Matrix::from_rows(&x).unwrap(), &y).unwrap();
            let pinv = common::full_rank_pinv(&x);
            for (j, b) in beta.iter().enumerate() {
                let expected: f64 = pinv[j].iter().zip(&y).map(|(p, v)| p * v).sum();
                worst = worst.max((b - expected).abs());
            }
        }
        c.check(
            worst <= 1e-8,
            format!("{rows}x{cols} least squares gap {worst:.2e}"),
        );
    }
    c
}

fn c8_surrogate_self_consistency(_: &Context) -> Checks {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let scale = [360.0, 0.5, 0.45, 4.5, 0.25, 1.3, 2100.0, 1100.0];
    let xs: Vec<[f64; 8]> = (0..600)
        .map(|_| std::array::from_fn(|i| scale[i] * rng.random_range(0.05..1.0)))
        .collect();
    let (train, test) = xs.split_at(180);
    let n = train.len() as f64;
    let mean: Vec<f64> = (0..8)
        .map(|i| train.iter().map(|x| x[i]).sum::<f64>() / n)
        .collect();
    let sd: Vec<f64> = (0..8)
        .map(|i| (train.iter().map(|x| (x[i] - mean[i]).powi(2)).sum::<f64>() / (n - 1.0)).sqrt())
        .collect();
    let coef: Vec<f64> = (0..45).map(|_| rng.random_range(-10.0..10.0)).collect();
    // Quadratic basis in graded order: 1, z_i, then z_i z_j for i <= j.
    let target = |x: &[f64; 8]| {
        let z: Vec<f64> = (0..8).map(|i| (x[i] - mean[i]) / sd[i]).collect();
        let mut basis = vec![1.0];
        basis.extend(&z);
        for i in 0..8 {
            for j in i..8 {
                basis.push(z[i] * z[j]);
            }
        }
        basis.iter().zip(&coef).map(|(b, k)| b * k).sum::<f64>()
    };
    let y_train: Vec<f64> = train.iter().map(target).collect();
    let y_test: Vec<f64> = test.iter().map(target).collect();
    let (model, _) = fit(train, &y_train, 2).unwrap();
    let r2 = r_squared(&model, test, &y_test).unwrap();
    c.check((r2 - 1.0).abs() <= 1e-8, format!("r2_test {r2}"));
    let gap = model
        .coefficients
        .iter()
        .zip(&coef)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    c.check(gap <= 1e-6, format!("coefficient gap {gap:.2e}"));
    c
}

fn c9_surrogate_directions(ctx: &Context) -> Checks {
    let mut c = Checks::default();
    let f = &ctx.fits;
    let get = |cond, d| f.get(cond, d).unwrap();
    for cond in [Condition::Square, Condition::Tul] {
        let r = get(cond, 2).r2_test;
        c.check(r >= 0.90, format!("{cond} degree-2 r2_test {r:.4}"));
    }
    let (pooled, square) = (
        get(Condition::Pooled, 2).r2_test,
        get(Condition::Square, 2).r2_test,
    );
    c.check(
        pooled <= square - 0.05,
        format!("pooled {pooled:.4} vs square {square:.4}"),
    );
    for (d, expected) in [(1, 9), (2, 45), (3, 165), (4, 495)] {
        c.check(
            monomial_exponents(d).len() == expected,
            format!("degree {d} basis size"),
        );
        for cond in Condition::ALL {
            c.check(
                get(cond, d).n_monomials == expected,
                format!("{cond} degree {d} monomials"),
            );
        }
    }
    let sq4 = get(Condition::Square, 4);
    c.check(
        sq4.n_train == 432 && sq4.n_train < sq4.n_monomials && sq4.r2_train.is_finite(),
        format!("square degree-4 fit on {} rows", sq4.n_train),
    );
    c
}

fn c10_format_stability(ctx: &Context) -> Checks {
    let mut c = Checks::default();
    let path = ctx.path("dataset.csv");
    let back = io::read_dataset(&path).unwrap();
    let bits = |d: &Dataset| -> Vec<u64> {
        d.rows
            .iter()
            .flat_map(|r| r.features.to_array().into_iter().chain([r.load]))
            .map(f64::to_bits)
            .collect()
    };
    c.check(
        bits(&back) == bits(&ctx.dataset),
        "CSV floats round-trip bit-exactly",
    );
    c.check(
        io::to_csv_string(&back).unwrap().as_bytes() == std::fs::read(&path).unwrap(),
        "re-serialized CSV is byte-identical",
    );
    let config_json = serde_json::to_value(&ctx.config).unwrap();
    for (file, schema, value) in [
        (
            "analysis.json",
            "analysis-report.schema.json",
            common::read_json(&ctx.path("analysis.json")),
        ),
        (
            "fits.json",
            "fit-report.schema.json",
            common::read_json(&ctx.path("fits.json")),
        ),
        (
            "provenance.json",
            "provenance.schema.json",
            common::read_json(&ctx.path("provenance.json")),
        ),
        ("config", "pipeline-config.schema.json", config_json),
    ] {
        let errors = common::schema_errors(schema, &value);
        c.check(errors.is_empty(), format!("{file} validates {errors:?}"));
    }
    let figures: Vec<PathBuf> = std::fs::read_dir(ctx.path("figures"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .collect();
    c.check(figures.len() == 5, format!("{} figures", figures.len()));
    for fig in &figures {
        let parsed = common::svg_elements(fig);
        c.check(
            parsed.is_ok(),
            format!("{} well-formed {:?}", fig.display(), parsed.err()),
        );
    }
    c.check(
        common::count_elements(&ctx.path("figures/scree.svg"), "rect", Some("bar")) == 8,
        "scree plot has 8 bars",
    );
    c.check(
        load_distribution(&ctx.dataset, pipeline::DENSITY_BINS).is_ok(),
        "density computable",
    );
    c
}

fn main() {
    let start = Instant::now();
    let ctx = Context::build();
    let criteria: [Criterion; 10] = [
        ("dataset shape and byte stability", c1_dataset_shape),
        ("sampler statistics", c2_sampler_statistics),
        ("outline geometry", c3_geometry),
        ("shape ordering of load", c4_shape_ordering),
        ("load magnitude", c5_load_range),
        ("PCA structure", c6_pca_structure),
        ("eigen and least-squares oracles", c7_numerics_oracles),
        ("surrogate self-consistency", c8_surrogate_self_consistency),
        ("surrogate directions", c9_surrogate_directions),
        ("format stability", c10_format_stability),
    ];
    let mut failures = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let checks = run(&ctx);
        let verdict = if checks.passed() { "PASS" } else { "FAIL" };
        if !checks.passed() {
            failures += 1;
        }
        println!(
            "criterion {:>2} {verdict}  {title}: {}",
            i + 1,
            checks.summary()
        );
    }
    println!(
        "{} of {} criteria passed in {:.1} s",
        criteria.len() - failures,
        criteria.len(),
        start.elapsed().as_secs_f64()
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
