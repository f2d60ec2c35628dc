#![allow(dead_code)]

use nalgebra::{Rotation3, Unit, Vector3};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use witness_resolve::{
    classify, measure_parameter, parse_model, Constraint, ConstraintKind, EntityId,
    GeometricEntity as E, Model,
};

pub const FIXTURES: &[&str] = &[
    "fig1_row1",
    "fig1_row2",
    "fig1_row3",
    "duplicate_perpendicular",
    "greedy_well_trap",
    "bracket",
    "three_clusters",
    "crank_analog",
];

pub fn fixture(name: &str) -> Model {
    let path = format!("{}/fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    parse_model(&text).unwrap_or_else(|e| panic!("{path}: {e}"))
}

pub fn ids<T: From<&'static str>>(list: &[&'static str]) -> Vec<T> {
    list.iter().map(|&s| T::from(s)).collect()
}

pub fn random_rotation(rng: &mut impl Rng) -> Rotation3<f64> {
    let axis = loop {
        let v = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        if v.norm() > 0.2 {
            break Unit::new_normalize(v);
        }
    };
    Rotation3::from_axis_angle(&axis, rng.random_range(-3.1..3.1))
}

pub fn random_translation(rng: &mut impl Rng) -> Vector3<f64> {
    Vector3::new(
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
        rng.random_range(-5.0..5.0),
    )
}

fn random_point(rng: &mut impl Rng) -> [f64; 3] {
    [
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
        rng.random_range(-2.0..2.0),
    ]
}

fn measured(m: &Model, id: String, kind: ConstraintKind, a: &EntityId, b: &EntityId) -> Constraint {
    let ops = [a.clone(), b.clone()];
    let p = kind
        .is_parameterized()
        .then(|| measure_parameter(m, kind, &ops).unwrap());
    Constraint {
        id: id.into(),
        kind,
        operands: ops.to_vec(),
        parameter: p,
    }
}

fn rows_of(kind: ConstraintKind, planes: usize) -> usize {
    match (kind, planes) {
        (ConstraintKind::Parallel, _) => 2,
        (ConstraintKind::Distance, 2) => 3,
        _ => 1,
    }
}

/// Vertices and planes with constraints measured from the geometry until
/// the row budget is used, plus a planted dependency (a duplicate or an
/// extra measured constraint). At most 8 entities and 22 rows; only
/// over-constrained results are returned.
pub fn random_over_model(rng: &mut impl Rng) -> Model {
    loop {
        if let Some(m) = try_over_model(rng) {
            return m;
        }
    }
}

fn try_over_model(rng: &mut impl Rng) -> Option<Model> {
    let nv = rng.random_range(3..=6);
    let np = rng.random_range(0..=2usize.min(8 - nv));
    let frame = random_rotation(rng);
    let axes: Vec<[f64; 3]> = (0..3)
        .map(|k| (frame * Vector3::ith(k, 1.0)).into())
        .collect();
    let mut entities = Vec::new();
    let mut normal_of = Vec::new();
    for i in 0..np {
        let k = rng.random_range(0..3);
        normal_of.push(k);
        entities.push(E::plane(&format!("P{}", i + 1), axes[k], random_point(rng)));
    }
    for i in 0..nv {
        entities.push(E::vertex(&format!("V{}", i + 1), random_point(rng)));
    }
    let base = Model::new(entities.clone(), vec![]).ok()?;

    let mut pool: Vec<(ConstraintKind, usize, usize, usize)> = Vec::new();
    for i in 0..entities.len() {
        for j in i + 1..entities.len() {
            match (i < np, j < np) {
                (true, true) if normal_of[i] == normal_of[j] => {
                    pool.push((ConstraintKind::Parallel, i, j, 2));
                    pool.push((ConstraintKind::Distance, i, j, 2));
                }
                (true, true) => pool.push((ConstraintKind::Perpendicular, i, j, 2)),
                (true, false) => pool.push((ConstraintKind::Distance, i, j, 1)),
                _ => pool.push((ConstraintKind::Distance, i, j, 0)),
            }
        }
    }
    pool.shuffle(rng);
    let budget = rng.random_range(6..=20);
    let mut cons: Vec<Constraint> = Vec::new();
    let mut rows = 0;
    let mut rest = pool.into_iter();
    for (kind, i, j, planes) in rest.by_ref() {
        let r = rows_of(kind, planes);
        if rows + r > budget {
            continue;
        }
        rows += r;
        cons.push(measured(
            &base,
            format!("C{}", cons.len() + 1),
            kind,
            &entities[i].id,
            &entities[j].id,
        ));
        if rows == budget {
            break;
        }
    }
    if cons.is_empty() {
        return None;
    }
    // Planted dependency.
    if rng.random_bool(0.4) {
        let src = cons[rng.random_range(0..cons.len())].clone();
        let r = rows_of(
            src.kind,
            src.operands
                .iter()
                .filter(|o| o.as_str().starts_with('P'))
                .count(),
        );
        if rows + r <= 22 {
            cons.insert(
                rng.random_range(0..=cons.len()),
                Constraint {
                    id: format!("C{}", cons.len() + 1).into(),
                    ..src
                },
            );
        }
    } else {
        for (kind, i, j, planes) in rest {
            let r = rows_of(kind, planes);
            if rows + r > 22 {
                continue;
            }
            rows += r;
            cons.push(measured(
                &base,
                format!("C{}", cons.len() + 1),
                kind,
                &entities[i].id,
                &entities[j].id,
            ));
            let m = Model::new(entities.clone(), cons.clone()).ok()?;
            if classify(&m).ok()?.over {
                break;
            }
        }
    }
    let m = Model::new(entities, cons).ok()?;
    classify(&m).ok()?.over.then_some(m)
}

/// Rigid vertex clusters (each vertex braced to up to three earlier ones,
/// optionally a plane held by three vertex distances) loosely linked by a
/// few inter-cluster distances. At most `max_entities` entities; only
/// under-constrained, not over-constrained results are returned.
pub fn random_under_model(rng: &mut impl Rng, max_entities: usize) -> Model {
    loop {
        if let Some(m) = try_under_model(rng, max_entities) {
            return m;
        }
    }
}

fn try_under_model(rng: &mut impl Rng, max_entities: usize) -> Option<Model> {
    let clusters = rng.random_range(2..=4);
    let mut entities: Vec<E> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    let mut cons: Vec<(ConstraintKind, usize, usize)> = Vec::new();
    for _ in 0..clusters {
        let size = rng.random_range(1..=4);
        let mut vs = Vec::new();
        for _ in 0..size {
            if entities.len() >= max_entities {
                break;
            }
            let v = entities.len();
            entities.push(E::vertex(&format!("V{:02}", v + 1), random_point(rng)));
            let mut earlier = vs.clone();
            earlier.shuffle(rng);
            for &u in earlier.iter().take(3) {
                cons.push((ConstraintKind::Distance, u, v));
            }
            vs.push(v);
        }
        if vs.len() >= 3 && entities.len() < max_entities && rng.random_bool(0.4) {
            let p = entities.len();
            let n: [f64; 3] = (random_rotation(rng) * Vector3::z()).into();
            entities.push(E::plane(&format!("P{:02}", p + 1), n, random_point(rng)));
            for &u in vs.iter().take(3) {
                cons.push((ConstraintKind::Distance, p, u));
            }
        }
        if !vs.is_empty() {
            members.push(vs);
        }
    }
    for a in 0..members.len() {
        for b in a + 1..members.len() {
            let links = rng.random_range(0..=4usize);
            let mut used = Vec::new();
            for _ in 0..links {
                let u = *members[a].choose(rng)?;
                let v = *members[b].choose(rng)?;
                if !used.contains(&(u, v)) {
                    used.push((u, v));
                    cons.push((ConstraintKind::Distance, u, v));
                }
            }
        }
    }
    let base = Model::new(entities.clone(), vec![]).ok()?;
    let cons = cons
        .iter()
        .enumerate()
        .map(|(k, &(kind, i, j))| {
            measured(
                &base,
                format!("C{}", k + 1),
                kind,
                &entities[i].id,
                &entities[j].id,
            )
        })
        .collect();
    let m = Model::new(entities, cons).ok()?;
    let s = classify(&m).ok()?;
    (s.under && !s.over).then_some(m)
}
