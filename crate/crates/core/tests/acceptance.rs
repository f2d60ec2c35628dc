//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use witness_resolve::kernels::{minimal_dependent_rowset_oracle, row_sparse_oracle};
use witness_resolve::linearizer::{assemble_system, nominal_generators, witness_residual};
use witness_resolve::prioritizer::prioritize_with;
use witness_resolve::*;

use common::{
    fixture, random_over_model, random_rotation, random_translation, random_under_model, FIXTURES,
};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T>(r: witness_resolve::Result<T>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn names<T: AsRef<str>>(items: impl IntoIterator<Item = T>) -> BTreeSet<String> {
    items.into_iter().map(|s| s.as_ref().to_owned()).collect()
}

fn cids(ids: &[ConstraintId]) -> BTreeSet<String> {
    names(ids.iter().map(|c| c.as_str()))
}

fn criterion_1() -> Outcome {
    let expected = [
        ("fig1_row1", (false, false)),
        ("fig1_row2", (false, true)),
        ("fig1_row3", (true, true)),
    ];
    let mut worst = Duration::ZERO;
    for (name, (over, under)) in expected {
        let m = fixture(name);
        let pre = fixture(&format!("{name}_pre"));
        let updated = ok(update_gcs_after_edit(&pre, m.entities().to_vec()), name)?;
        ensure!(
            updated.constraints().len() == m.constraints().len(),
            "{name}: update yields a different constraint set"
        );
        for (u, c) in updated.constraints().iter().zip(m.constraints()) {
            let same_param = match (u.parameter, c.parameter) {
                (Some(a), Some(b)) => (a - b).abs() <= 1e-9,
                (a, b) => a == b,
            };
            ensure!(
                u.id == c.id && u.kind == c.kind && u.operands == c.operands && same_param,
                "{name}: {} differs",
                c.id
            );
        }
        let t = Instant::now();
        let s = ok(classify(&m), name)?;
        let dt = t.elapsed();
        worst = worst.max(dt);
        ensure!(dt < Duration::from_secs(1), "{name}: classify took {dt:?}");
        ensure!(s.over == over, "{name}: over = {}", s.over);
        // Row 3 is judged on its over flag only.
        if !over {
            ensure!(s.under == under, "{name}: under = {}", s.under);
        }
    }
    let row3 = ok(classify(&fixture("fig1_row3")), "fig1_row3")?;
    ensure!(
        row3.over_dim == 1,
        "fig1_row3: over_dim = {}",
        row3.over_dim
    );
    Ok(format!("well / under / over, slowest classify {worst:?}"))
}

fn criterion_2() -> Outcome {
    let m = fixture("fig1_row3");
    let parts = ok(detect_minimal_over_parts(&m), "detect")?;
    ensure!(parts.len() == 1, "{} parts", parts.len());
    ensure!(
        cids(&parts[0].constraints) == names(["C5", "C6", "C7"]),
        "part {:?}",
        parts[0].constraints
    );
    let opts = ok(over_options(&m, &parts[0]), "options")?;
    let mut removed = BTreeSet::new();
    for o in &opts {
        match &o.action {
            Action::Remove { constraint } => removed.insert(constraint.as_str().to_owned()),
            Action::Add { .. } => return Err(format!("unexpected add option {}", o.describe())),
        };
    }
    ensure!(
        opts.len() == 3 && removed == names(["C5", "C6", "C7"]),
        "options {removed:?}"
    );
    let session = ok(Session::start(m.clone()), "session")?;
    for o in &session.presentation().options {
        let Action::Remove { constraint } = &o.action else {
            return Err("session offers an addition".into());
        };
        ensure!(
            !["C1", "C2", "C3", "C4", "C8"].contains(&constraint.as_str()),
            "{constraint} offered"
        );
    }
    for c in ["C5", "C6", "C7"] {
        let s = ok(classify(&ok(m.without_constraint(&c.into()), c)?), c)?;
        ensure!(
            s.over_dim == 0,
            "removing {c} leaves over_dim {}",
            s.over_dim
        );
    }
    Ok("single part {C5, C6, C7}, three removals, each clears the dependency".into())
}

fn criterion_3() -> Outcome {
    let m = fixture("duplicate_perpendicular");
    let parts = ok(detect_minimal_over_parts(&m), "detect")?;
    let smallest = parts.iter().map(|p| p.constraints.len()).min().unwrap_or(0);
    ensure!(smallest == 2, "smallest part has {smallest} constraints");
    ensure!(
        parts
            .iter()
            .any(|p| cids(&p.constraints) == names(["C7", "C8"])),
        "no part {{C7, C8}}"
    );
    Ok(format!("{} parts, minimal part {{C7, C8}}", parts.len()))
}

/// Left null vector of the rows `s` of `g`.
fn circuit_vector(g: &DMatrix<f64>, s: &[usize]) -> DVector<f64> {
    let gs = DMatrix::from_fn(s.len(), g.ncols(), |r, c| g[(s[r], c)]);
    let eig = SymmetricEigen::new(&gs * gs.transpose());
    let k = eig.eigenvalues.imin();
    let mut y = DVector::zeros(g.nrows());
    for (r, &row) in s.iter().enumerate() {
        y[row] = eig.eigenvectors[(r, k)];
    }
    y
}

fn matrix_rank(cols: &[DVector<f64>]) -> usize {
    if cols.is_empty() {
        return 0;
    }
    let m = DMatrix::from_columns(cols);
    let sv = m.singular_values();
    sv.iter().filter(|&&v| v > 1e-7 * sv.max().max(1.0)).count()
}

fn left_null_dim(g: &DMatrix<f64>) -> usize {
    let sv = g.transpose().singular_values();
    let cutoff = 1e-8 * sv.max().max(1.0);
    g.nrows() - sv.iter().filter(|&&v| v > cutoff).count()
}

/// Sizes of a minimum-size basis of the row dependency space, built from
/// the circuit list by the matroid greedy rule.
fn optimal_basis_sizes(g: &DMatrix<f64>, circuits: &[Vec<usize>], dim: usize) -> Vec<usize> {
    let mut basis: Vec<DVector<f64>> = Vec::new();
    let mut sizes = Vec::new();
    for s in circuits {
        if basis.len() == dim {
            break;
        }
        let y = circuit_vector(g, s);
        basis.push(y);
        if matrix_rank(&basis) == basis.len() {
            sizes.push(s.len());
        } else {
            basis.pop();
        }
    }
    sizes
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut models, mut parts_seen) = (0, 0);
    while models < 200 {
        let m = random_over_model(&mut rng);
        let a = ok(analyze(&m), "analyze")?;
        let g = &a.system.g;
        ensure!(
            m.entities().len() <= 8 && g.nrows() <= 22,
            "model {models} exceeds the size limits"
        );
        let parts = ok(detect_minimal_over_parts(&m), "detect")?;
        let dim = left_null_dim(g);
        ensure!(
            parts.len() == dim,
            "model {models}: {} parts, dim NullSpace(Gᵀ) = {dim}",
            parts.len()
        );
        let circuits = ok(minimal_dependent_rowset_oracle(g), "oracle")?;
        for p in &parts {
            ensure!(
                circuits.contains(&p.rows),
                "model {models}: part rows {:?} are not a minimal dependent set",
                p.rows
            );
        }
        let mut got: Vec<usize> = parts.iter().map(|p| p.rows.len()).collect();
        got.sort_unstable();
        let mut want = optimal_basis_sizes(g, &circuits, dim);
        want.sort_unstable();
        ensure!(
            got == want,
            "model {models}: part sizes {got:?}, oracle {want:?}"
        );
        models += 1;
        parts_seen += parts.len();
    }
    let dt = start.elapsed();
    ensure!(dt < Duration::from_secs(60), "suite took {dt:?}");
    Ok(format!("{models} models, {parts_seen} parts, {dt:.1?}"))
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut checked_parts, mut globally_maximal) = (0, 0);
    for k in 0..200 {
        let m = random_under_model(&mut rng, 16);
        let a = ok(analyze(&m), "analyze")?;
        let mut order: Vec<usize> = (0..m.entities().len()).collect();
        order.sort_by(|&x, &y| m.entities()[x].id.cmp(&m.entities()[y].id));
        let groups: Vec<Vec<usize>> = order
            .iter()
            .map(|&i| a.system.motion.block(i).collect())
            .collect();
        let best = ok(
            row_sparse_oracle(&nominal_generators(&m), &a.free, &groups),
            "oracle",
        )?;
        let parts = ok(detect_maximal_well_parts(&m), "detect")?;
        ensure!(
            parts[0].entities.len() == best.len(),
            "model {k}: largest part {} entities, oracle {}",
            parts[0].entities.len(),
            best.len()
        );
        let mut remaining: Vec<EntityId> = m.entities().iter().map(|e| e.id.clone()).collect();
        for p in &parts {
            ensure!(
                ok(is_part_well(&m, &p.entities), "well")?,
                "model {k}: part {:?} is not well",
                p.entities
            );
            ensure!(
                ok(
                    is_part_maximal_among(&m, &p.entities, &remaining),
                    "maximal"
                )?,
                "model {k}: part {:?} is not maximal",
                p.entities
            );
            if ok(is_part_maximal(&m, &p.entities), "maximal")? {
                globally_maximal += 1;
            }
            remaining.retain(|e| !p.contains(e));
            checked_parts += 1;
        }
    }
    let dt = start.elapsed();
    ensure!(dt < Duration::from_secs(120), "suite took {dt:?}");
    Ok(format!("200 models, {checked_parts} parts ({globally_maximal} maximal in the whole model), {dt:.1?}"))
}

fn criterion_6() -> Outcome {
    let m = fixture("duplicate_perpendicular");
    let greedy = ok(greedy_over_baseline(&m, None), "greedy over")?;
    let dup: ConstraintId = "C8".into();
    let g = greedy
        .iter()
        .filter(|p| p.contains(&dup))
        .map(|p| p.constraints.len())
        .max()
        .unwrap_or(0);
    ensure!(g > 2, "greedy part through C8 has {g} constraints");

    let m = fixture("greedy_well_trap");
    let optimal = ok(detect_maximal_well_parts(&m), "well")?;
    let greedy = ok(greedy_well_baseline(&m), "greedy well")?;
    let (o, gw) = (
        optimal[0].entities.len(),
        greedy.iter().map(|p| p.entities.len()).max().unwrap_or(0),
    );
    ensure!(gw < o, "greedy largest {gw}, optimal {o}");
    Ok(format!(
        "over: greedy {g} vs optimal 2; well: greedy {gw} vs optimal {o}"
    ))
}

fn finite_differences() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(71);
    let mut models: Vec<Model> = FIXTURES.iter().map(|n| fixture(n)).collect();
    models.extend((0..20).map(|_| random_over_model(&mut rng)));
    let mut worst = 0.0f64;
    for m in &models {
        let rs = ok(assemble_system(m), "assemble")?;
        let x = rs.layout.coordinates(m);
        let j = rs.jacobian_at(&x);
        let h = 1e-6;
        for col in 0..x.len() {
            let (mut xp, mut xm) = (x.clone(), x.clone());
            xp[col] += h;
            xm[col] -= h;
            let (fp, fm) = (rs.evaluate(&xp), rs.evaluate(&xm));
            for r in 0..rs.row_count() {
                let fd = (fp[r] - fm[r]) / (2.0 * h);
                let rel = (fd - j[(r, col)]).abs() / j[(r, col)].abs().max(1.0);
                worst = worst.max(rel);
            }
        }
    }
    ensure!(
        worst <= 1e-5,
        "Jacobian deviates from finite differences by {worst:.2e}"
    );
    Ok(format!("jacobian {worst:.1e}"))
}

fn rigid_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(72);
    let mut worst = 0.0f64;
    for name in ["fig1_row1", "fig1_row3", "crank_analog", "bracket"] {
        let m = fixture(name);
        let ids: Vec<ConstraintId> = m.constraints().iter().map(|c| c.id.clone()).collect();
        let base: Vec<f64> = ids
            .iter()
            .map(|c| change_rate(&m, c))
            .collect::<witness_resolve::Result<_>>()
            .map_err(|e| e.to_string())?;
        for _ in 0..50 {
            let moved = m.transformed(&random_rotation(&mut rng), &random_translation(&mut rng));
            for (c, &r0) in ids.iter().zip(&base) {
                let r = ok(change_rate(&moved, c), name)?;
                worst = worst.max((r - r0).abs() / r0.abs().max(1e-12));
            }
        }
    }
    ensure!(
        worst <= 1e-6,
        "change rate drifts by {worst:.2e} under rigid motion"
    );
    Ok(format!("rigid drift {worst:.1e}"))
}

fn weight_scaling() -> Outcome {
    let hash = |a: &EntityId, b: &EntityId| {
        let (a, b) = if a < b { (a, b) } else { (b, a) };
        let h = a
            .as_str()
            .bytes()
            .chain(b.as_str().bytes())
            .fold(7u64, |h, x| h.wrapping_mul(31).wrapping_add(x as u64));
        0.5 + (h % 1000) as f64 / 500.0
    };
    let mut cases: Vec<(Model, Vec<ResolutionOption>, Mode)> = Vec::new();
    for name in ["fig1_row3", "duplicate_perpendicular", "bracket"] {
        let m = fixture(name);
        let parts = ok(detect_minimal_over_parts(&m), name)?;
        for p in &parts {
            cases.push((m.clone(), ok(over_options(&m, p), name)?, Mode::Over));
        }
    }
    for name in [
        "fig1_row2",
        "three_clusters",
        "crank_analog",
        "greedy_well_trap",
    ] {
        let m = fixture(name);
        let parts = ok(detect_maximal_well_parts(&m), name)?;
        if parts.len() >= 2 {
            cases.push((
                m.clone(),
                ok(under_options(&m, &parts[0], &parts[1]), name)?,
                Mode::Under,
            ));
        }
    }
    let mut compared = 0;
    for (m, opts, mode) in &cases {
        let order = |s: f64| -> Result<Vec<String>, String> {
            let w = |a: &EntityId, b: &EntityId| s * hash(a, b);
            Ok(
                ok(prioritize_with(m, opts.clone(), *mode, &w), "prioritize")?
                    .into_iter()
                    .map(|o| o.id)
                    .collect(),
            )
        };
        let base = order(1.0)?;
        for s in [1e-3, 0.37, 12.5, 4e3] {
            ensure!(
                order(s)? == base,
                "ranking changes when weights are scaled by {s}"
            );
        }
        compared += base.len();
    }
    Ok(format!(
        "{} option sets ({compared} options) keep their order",
        cases.len()
    ))
}

fn random_option(rng: &mut impl Rng, removal: bool) -> ResolutionOption {
    let c: ConstraintId = format!("C{}", rng.random_range(0..100)).into();
    let action = if removal {
        Action::Remove {
            constraint: c.clone(),
        }
    } else {
        Action::Add {
            constraint: Constraint {
                id: c.clone(),
                kind: ConstraintKind::Distance,
                operands: vec!["A".into(), "B".into()],
                parameter: Some(1.0),
            },
        }
    };
    let score = match rng.random_range(0..4) {
        0 => None,
        1 => Some(rng.random_range(0..3) as f64 * 0.25),
        _ => Some(rng.random_range(0.0..2.0)),
    };
    ResolutionOption {
        id: format!("{:016x}", rng.random::<u64>()),
        action,
        target: Target::Over {
            constraints: vec![c],
        },
        precedence: rng.random_range(1..=5),
        score,
    }
}

fn comparator_transitivity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(73);
    for t in 0..1000 {
        let (removal, mode) = if t % 2 == 0 {
            (true, Mode::Over)
        } else {
            (false, Mode::Under)
        };
        let o: Vec<ResolutionOption> = (0..3).map(|_| random_option(&mut rng, removal)).collect();
        let cmp = |i: usize, j: usize| compare(&o[i], &o[j], mode).map_err(|e| e.to_string());
        for (i, j, k) in [
            (0, 1, 2),
            (0, 2, 1),
            (1, 0, 2),
            (1, 2, 0),
            (2, 0, 1),
            (2, 1, 0),
        ] {
            ensure!(
                cmp(i, j)? == cmp(j, i)?.reverse(),
                "triple {t}: comparator is not antisymmetric"
            );
            if cmp(i, j)? != Ordering::Greater && cmp(j, k)? != Ordering::Greater {
                ensure!(
                    cmp(i, k)? != Ordering::Greater,
                    "triple {t}: not transitive"
                );
            }
            if cmp(i, j)? == Ordering::Equal && cmp(j, k)? == Ordering::Equal {
                ensure!(
                    cmp(i, k)? == Ordering::Equal,
                    "triple {t}: ties are not transitive"
                );
            }
        }
    }
    Ok("1000 triples".into())
}

fn criterion_7() -> Outcome {
    let parts = [
        finite_differences()?,
        rigid_invariance()?,
        weight_scaling()?,
        comparator_transitivity()?,
    ];
    Ok(parts.join("; "))
}

fn criterion_8() -> Outcome {
    let mut steps = Vec::new();
    for name in FIXTURES {
        let m = fixture(name);
        let mut s = ok(Session::start(m.clone()), name)?;
        ok(s.auto_resolve(), name)?;
        let state = ok(classify(s.current()), name)?;
        ensure!(state.is_well(), "{name}: ends {}", state.label());
        let replayed = ok(replay(&m, s.journal()), name)?;
        ensure!(
            serialize_model(&replayed) == s.current_document(),
            "{name}: replay differs"
        );
        steps.push(format!("{name} {}", s.journal().len()));
    }
    Ok(format!("decisions per fixture: {}", steps.join(", ")))
}

/// Residual after every accepted decision of a journal.
fn witness_along(initial: &Model, journal: &[JournalEntry]) -> Result<f64, String> {
    let mut worst = 0.0f64;
    for k in 0..journal.len() {
        if journal[k].verdict == Verdict::Accepted {
            let m = ok(replay(initial, &journal[..=k]), "replay")?;
            worst = worst.max(ok(witness_residual(&m), "witness")?);
        }
    }
    Ok(worst)
}

fn criterion_9() -> Outcome {
    let mut worst = 0.0f64;
    let mut accepts = 0;
    let mut check = |m: &Model, j: &[JournalEntry]| -> Result<(), String> {
        worst = worst.max(witness_along(m, j)?);
        accepts += j.iter().filter(|e| e.verdict == Verdict::Accepted).count();
        Ok(())
    };
    for name in FIXTURES {
        let m = fixture(name);
        let start = ok(Session::start(m.clone()), name)?;
        for o in &start.presentation().options {
            let mut s = start.clone();
            ok(s.accept(&o.id), name)?;
            check(&m, s.journal())?;
        }
        let mut s = start.clone();
        ok(s.auto_resolve(), name)?;
        check(&m, s.journal())?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..30 {
        let m = random_under_model(&mut rng, 8);
        let mut s = ok(Session::start(m.clone()), "session")?;
        ok(s.auto_resolve(), "auto")?;
        check(&m, s.journal())?;
    }
    for _ in 0..30 {
        let m = random_over_model(&mut rng);
        let mut s = ok(Session::start(m.clone()), "session")?;
        while s.phase() == Phase::OverResolution {
            let top = s
                .presentation()
                .top
                .clone()
                .ok_or("over phase without options")?;
            ok(s.accept(&top), "accept")?;
        }
        check(&m, s.journal())?;
    }
    ensure!(worst <= 1e-6, "witness residual reached {worst:.2e}");
    Ok(format!("{accepts} accepts, max residual {worst:.1e}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("classification triple", criterion_1),
        ("row-3 options exactness", criterion_2),
        ("duplicate detection", criterion_3),
        ("over oracle equivalence", criterion_4),
        ("under oracle equivalence", criterion_5),
        ("greedy separation", criterion_6),
        ("change-rate properties", criterion_7),
        ("end-to-end auto resolve", criterion_8),
        ("witness preservation", criterion_9),
    ];
    let mut failed = 0;
    for (k, (title, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or(p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS {}: {title} ({detail}) [{:.1?}]", k + 1, t.elapsed()),
            Err(why) => {
                failed += 1;
                println!("FAIL {}: {title}: {why} [{:.1?}]", k + 1, t.elapsed());
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
