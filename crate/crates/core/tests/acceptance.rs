//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use q2mono::cli::{first_non_monotone, sweep, sweep_ratios};
use q2mono::constraints::{check_global_ratio, check_local, check_main};
use q2mono::lorenz::{certify, check_row_condition, check_row_condition_strict, decompose, LorenzParams};
use q2mono::mmatrix::{exact_mmatrix_z, inverse_min_entry, sufficient_mmatrix};
use q2mono::solve::{convergence_study, linf_error, solve_dirichlet, PoissonProblem};
use q2mono::sparse::SparseMatrix;
use q2mono::{assemble, PointClass, TensorMesh};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, &'static str, Duration, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn uniform_stencils() -> Check {
    let mut rows = 0;
    for m in 2..=6 {
        let mesh = TensorMesh::uniform(m).unwrap();
        let a = assemble(&mesh);
        let h = 1.0 / (2.0 * m as f64);
        let s = 1.0 / (h * h);
        for k in 0..a.dim() {
            let (i, j) = a.shape().unflatten(k);
            let class = mesh.classify(i, j).unwrap();
            let axis = |odd: bool| -> Vec<(isize, f64)> {
                if odd { vec![(-1, -1.0), (1, -1.0)] } else { vec![(-2, 0.25), (-1, -2.0), (1, -2.0), (2, 0.25)] }
            };
            let (diag, ex, ey) = match class {
                PointClass::Boundary => {
                    ensure(a.matrix().row(k).eq([(k, 1.0)]), || format!("boundary row ({i},{j})"))?;
                    continue;
                }
                PointClass::CellCenter => (4.0, axis(true), axis(true)),
                PointClass::Knot => (7.0, axis(false), axis(false)),
                PointClass::EdgeCenter2 => (5.5, axis(false), axis(true)),
                PointClass::EdgeCenter3 => (5.5, axis(true), axis(false)),
            };
            let mut expect = vec![((i, j), diag)];
            expect.extend(ex.iter().map(|&(d, c)| (((i as isize + d) as usize, j), c)));
            expect.extend(ey.iter().map(|&(d, c)| ((i, (j as isize + d) as usize), c)));
            ensure(a.matrix().row_nnz(k) == expect.len(), || format!("nnz at ({i},{j}), m={m}"))?;
            for (col, c) in expect {
                let got = a.get((i, j), col) / s;
                ensure((got - c).abs() <= 1e-14 * c.abs(), || format!("({i},{j})->{col:?}: {got} vs {c}, m={m}"))?;
            }
            rows += 1;
        }
    }
    Ok(format!("{rows} interior rows on 2..6-cell uniform meshes"))
}

fn row_sums() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0_f64;
    for t in 0..20 {
        let mesh = common::random_mesh(&mut rng, 8, 32.0 / 25.0);
        let a = assemble(&mesh);
        let scale = a.matrix().max_abs();
        for (k, s) in a.matrix().row_sums().into_iter().enumerate() {
            let expect = if a.shape().is_boundary(k) { 1.0 } else { 0.0 };
            let dev = (s - expect).abs() / scale;
            worst = worst.max(dev);
            ensure(dev <= 1e-12, || format!("mesh {t} row {k}: sum {s}"))?;
        }
    }
    Ok(format!("20 random meshes, worst relative deviation {worst:.1e}"))
}

fn uniform_monotone() -> Check {
    let mut worst = f64::INFINITY;
    for m in 2..=16 {
        let a = assemble(&TensorMesh::uniform(m).unwrap());
        let r = inverse_min_entry(a.matrix()).map_err(|e| e.to_string())?;
        let rel = r.min_entry / r.inverse_max_abs;
        worst = worst.min(rel);
        ensure(rel >= -1e-12, || format!("{0}x{0} interior: min {1:e}", 2 * m - 1, r.min_entry))?;
    }
    Ok(format!("interior 3x3..31x31, smallest min/max {worst:.1e}"))
}

fn sweep_reproduction() -> Check {
    let recs = sweep(&sweep_ratios("1.0", "6.0", "0.05").unwrap()).map_err(|e| e.to_string())?;
    let first = first_non_monotone(&recs).ok_or("no negative entry found")?;
    let label = first.ratio.label();
    ensure(label == "5.35", || format!("first negative at {label}"))?;
    let rel = (first.min_inverse_entry / -6.14e-8 - 1.0).abs();
    ensure(rel <= 0.05, || format!("min entry {:e} is {:.1}% off", first.min_inverse_entry, 100.0 * rel))?;
    let last_nonneg = recs.iter().rposition(|r| r.monotone).unwrap_or(0);
    for w in recs[last_nonneg..].windows(2) {
        ensure(w[1].min_inverse_entry <= w[0].min_inverse_entry, || {
            format!("min entry rises between {} and {}", w[0].ratio.label(), w[1].ratio.label())
        })?;
    }
    Ok(format!("first negative at {label}, min {:.3e}", first.min_inverse_entry))
}

fn table_reproduction() -> Check {
    let table: [(u8, [f64; 4], [f64; 3]); 3] = [
        (1, [2.66e-5, 1.97e-6, 1.54e-7, 1.37e-8], [3.74, 3.67, 3.49]),
        (2, [4.92e-2, 3.19e-3, 2.29e-4, 1.80e-5], [3.94, 3.79, 3.67]),
        (3, [1.20, 1.03e-1, 9.10e-3, 9.64e-4], [3.54, 3.50, 3.23]),
    ];
    let mut summary = Vec::new();
    for (test, errors, orders) in table {
        let prob = PoissonProblem::benchmark(test).unwrap();
        let rows = convergence_study(&prob, &[7, 15, 31, 63], 1.01).map_err(|e| e.to_string())?;
        for (k, row) in rows.iter().enumerate() {
            let rel = (row.linf_error / errors[k] - 1.0).abs();
            ensure(rel <= 0.25, || format!("test {test} {}: {:.3e} vs {:.2e}", row.grid_label(), row.linf_error, errors[k]))?;
            if let Some(o) = row.order {
                ensure((o - orders[k - 1]).abs() <= 0.15, || format!("test {test} {}: order {o:.2} vs {}", row.grid_label(), orders[k - 1]))?;
            }
        }
        let ords: Vec<String> = rows.iter().filter_map(|r| r.order).map(|o| format!("{o:.2}")).collect();
        summary.push(format!("test {test} orders {}", ords.join("/")));
    }
    Ok(summary.join("; "))
}

fn soundness() -> Check {
    let corpus = common::corpus();
    let grid = [1.0 / 1024.0, 0.1, 0.25, 0.5];
    let mut certified = 0;
    for (name, mesh) in &corpus {
        let a = assemble(mesh);
        let oracle = inverse_min_entry(a.matrix()).map_err(|e| e.to_string())?;
        for eps1 in grid {
            let p = LorenzParams::new(eps1, 1.0).unwrap();
            if certify(mesh, p).map_err(|e| e.to_string())?.passed() {
                certified += 1;
                ensure(oracle.is_nonnegative, || format!("{name}, eps1={eps1}: certified but min entry {:e}", oracle.min_entry))?;
            }
            // the explicit constraints at this ℓ must certify too
            if p.ell() > 1.0 && common::has_interior_knot(mesh) && check_local(mesh, p.ell()).unwrap().pass {
                ensure(certify(mesh, p).unwrap().passed(), || format!("{name}: local constraints at ell={} hold but certify fails", p.ell()))?;
            }
        }
    }
    Ok(format!("{} meshes, {certified} certified (mesh, eps1) pairs, 0 counterexamples", corpus.len()))
}

fn main_constraints_certify_at_half() -> Check {
    let p = LorenzParams::new(0.5, 1.0).unwrap();
    let mut failures = Vec::new();
    let mut checked = 0;
    for (name, mesh) in common::corpus() {
        if check_main(&mesh).pass {
            checked += 1;
            if !certify(&mesh, p).map_err(|e| e.to_string())?.passed() {
                failures.push(name);
            }
        }
    }
    ensure(failures.is_empty(), || {
        format!("{} of {checked} meshes passing the main constraints fail certify(1/2, 1), e.g. {}", failures.len(), failures[0])
    })?;
    Ok(format!("{checked} meshes"))
}

fn implication_chain() -> Check {
    let p = LorenzParams::default();
    let (mut global, mut main, mut knots) = (0, 0, 0);
    for (name, mesh) in common::corpus() {
        let g = check_global_ratio(&mesh).pass;
        let m = check_main(&mesh).pass;
        let l = check_local(&mesh, 4.0).unwrap().pass;
        ensure(!g || m, || format!("{name}: global ratio holds, main constraints fail"))?;
        ensure(!m || l, || format!("{name}: main constraints hold, local(4) fails"))?;
        global += g as usize;
        main += m as usize;

        let a = assemble(&mesh);
        if common::has_interior_knot(&mesh) {
            knots += 1;
            let strict = check_row_condition_strict(&mesh, &a, p).map_err(|e| e.to_string())?;
            ensure(!strict.pass, || format!("{name}: strict row condition passes at eps2=1"))?;
        }
        if m {
            let dec = decompose(&mesh, &a, p).map_err(|e| e.to_string())?;
            ensure(check_row_condition(&dec).unwrap().pass, || format!("{name}: relaxed row condition fails"))?;
        }
    }
    Ok(format!("{global} global-ratio, {main} main-constraint passes; strict row condition fails on all {knots} meshes with knots"))
}

fn quadratic_exactness() -> Check {
    let corpus = common::corpus();
    let mut worst = 0.0_f64;
    for (name, mesh) in &corpus {
        for (label, u, f) in common::quadratics() {
            let prob = PoissonProblem::manufactured(move |_, _| f, u);
            let sol = solve_dirichlet(mesh, &prob).map_err(|e| e.to_string())?;
            let e = linf_error(&sol, u, mesh).unwrap();
            worst = worst.max(e);
            ensure(e <= 1e-10, || format!("{name}, u = {label}: error {e:e}"))?;
        }
    }
    Ok(format!("{} meshes x 6 polynomials, worst error {worst:.1e}", corpus.len()))
}

fn appendix_matrix() -> Check {
    let a = SparseMatrix::from_dense_rows(&[vec![10.0, 0.0, 0.0], vec![-10.0, 2.0, -10.0], vec![0.0, 0.0, 10.0]]).unwrap();
    ensure(!sufficient_mmatrix(&a), || "row-sum test accepted it".into())?;
    let v = exact_mmatrix_z(&a).map_err(|e| e.to_string())?;
    ensure(v.is_m_matrix && !v.singular, || "inverse test rejected it".into())?;
    Ok("row-sum test rejects, inverse test accepts".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1", "uniform stencil golden test", Duration::from_secs(1), uniform_stencils),
        ("2", "row-sum identity", Duration::from_secs(5), row_sums),
        ("3", "uniform monotonicity", Duration::from_secs(30), uniform_monotone),
        ("4", "sweep reproduction", Duration::from_secs(60), sweep_reproduction),
        ("5", "accuracy table reproduction", Duration::from_secs(120), table_reproduction),
        ("6a", "certificate soundness", Duration::from_secs(120), soundness),
        ("6b", "main constraints => certify(eps1=1/2, eps2=1)", Duration::from_secs(120), main_constraints_certify_at_half),
        ("7", "implication chain and row conditions", Duration::from_secs(120), implication_chain),
        ("8", "quadratic exactness", Duration::from_secs(120), quadratic_exactness),
        ("9", "appendix matrix regression", Duration::from_secs(1), appendix_matrix),
    ];
    let mut failed = 0;
    for (id, title, limit, run) in criteria {
        let t = Instant::now();
        let mut result = run();
        let elapsed = t.elapsed();
        if result.is_ok() && elapsed > limit {
            result = Err(format!("took {:.2?}, limit {limit:?}", elapsed));
        }
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("{tag} [{id}] {title} ({:.2?}): {detail}", elapsed);
        failed += result.is_err() as usize;
    }
    println!("{} of {} criteria passed", 10 - failed, 10);
    if failed == 0 { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
