//! Residual equations `F(X) = 0` and their analytic Jacobian.
//!
//! Every row is a smooth function of the raw coordinate vector. Auxiliary
//! data that depends on the witness (projection frames of parallel rows, the
//! side of a plane a point lies on) is frozen when the system is assembled,
//! so the Jacobian is exact for the function as assembled.

use nalgebra::DMatrix;

use super::layout::Layout;
use crate::error::{Error, Result};
use crate::model::{pairing, Constraint, ConstraintId, ConstraintKind, Model, Pairing, Vec3};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OffsetTarget {
    Value(f64),
    /// Raw coordinate index holding the target (a cylinder radius).
    Coordinate(usize),
}

/// Shape of one scalar equation. Indices refer to the raw coordinate vector;
/// vector operands are the three coordinates starting at the index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RowForm {
    /// `a·b − target`
    Dot { a: usize, b: usize, target: f64 },
    /// `axis·(a × b)`
    Cross { a: usize, b: usize, axis: [f64; 3] },
    /// `sign · n·(q − p) − target`
    Offset {
        normal: usize,
        origin: usize,
        point: usize,
        sign: f64,
        target: OffsetTarget,
    },
    /// `‖a − b‖² − target_sq`
    PointDistSq { a: usize, b: usize, target_sq: f64 },
    /// `‖w − (w·a)a‖² − target_sq` with `w = q − p`
    AxisDistSq {
        axis: usize,
        origin: usize,
        point: usize,
        target_sq: f64,
    },
    /// `x[a] − x[b]`
    Difference { a: usize, b: usize },
    /// `x[index] − target`
    Scalar { index: usize, target: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub constraint: ConstraintId,
    /// Index into the model's constraint list.
    pub constraint_index: usize,
    pub form: RowForm,
}

fn v3(x: &[f64], i: usize) -> Vec3 {
    Vec3::new(x[i], x[i + 1], x[i + 2])
}

impl RowForm {
    pub fn value(&self, x: &[f64]) -> f64 {
        match *self {
            RowForm::Dot { a, b, target } => v3(x, a).dot(&v3(x, b)) - target,
            RowForm::Cross { a, b, axis } => Vec3::from(axis).dot(&v3(x, a).cross(&v3(x, b))),
            RowForm::Offset {
                normal,
                origin,
                point,
                sign,
                target,
            } => {
                let t = match target {
                    OffsetTarget::Value(v) => v,
                    OffsetTarget::Coordinate(i) => x[i],
                };
                sign * v3(x, normal).dot(&(v3(x, point) - v3(x, origin))) - t
            }
            RowForm::PointDistSq { a, b, target_sq } => {
                (v3(x, a) - v3(x, b)).norm_squared() - target_sq
            }
            RowForm::AxisDistSq {
                axis,
                origin,
                point,
                target_sq,
            } => {
                let a = v3(x, axis);
                let w = v3(x, point) - v3(x, origin);
                (w - a * w.dot(&a)).norm_squared() - target_sq
            }
            RowForm::Difference { a, b } => x[a] - x[b],
            RowForm::Scalar { index, target } => x[index] - target,
        }
    }

    /// Partial derivatives as `(raw index, value)`; indices may repeat.
    pub fn gradient(&self, x: &[f64]) -> Vec<(usize, f64)> {
        let mut g = Vec::with_capacity(9);
        let push3 = |g: &mut Vec<(usize, f64)>, at: usize, v: Vec3| {
            for k in 0..3 {
                g.push((at + k, v[k]));
            }
        };
        match *self {
            RowForm::Dot { a, b, .. } => {
                push3(&mut g, a, v3(x, b));
                push3(&mut g, b, v3(x, a));
            }
            RowForm::Cross { a, b, axis } => {
                let u = Vec3::from(axis);
                push3(&mut g, a, v3(x, b).cross(&u));
                push3(&mut g, b, u.cross(&v3(x, a)));
            }
            RowForm::Offset {
                normal,
                origin,
                point,
                sign,
                target,
            } => {
                let n = v3(x, normal);
                push3(&mut g, normal, (v3(x, point) - v3(x, origin)) * sign);
                push3(&mut g, point, n * sign);
                push3(&mut g, origin, -n * sign);
                if let OffsetTarget::Coordinate(i) = target {
                    g.push((i, -1.0));
                }
            }
            RowForm::PointDistSq { a, b, .. } => {
                let d = (v3(x, a) - v3(x, b)) * 2.0;
                push3(&mut g, a, d);
                push3(&mut g, b, -d);
            }
            RowForm::AxisDistSq {
                axis,
                origin,
                point,
                ..
            } => {
                let a = v3(x, axis);
                let w = v3(x, point) - v3(x, origin);
                let s = w.dot(&a);
                let aa = a.dot(&a);
                let grad_w = w * 2.0 + a * (2.0 * s * aa - 4.0 * s);
                let grad_a = w * (2.0 * s * aa - 4.0 * s) + a * (2.0 * s * s);
                push3(&mut g, axis, grad_a);
                push3(&mut g, point, grad_w);
                push3(&mut g, origin, -grad_w);
            }
            RowForm::Difference { a, b } => {
                g.push((a, 1.0));
                g.push((b, -1.0));
            }
            RowForm::Scalar { index, .. } => g.push((index, 1.0)),
        }
        g
    }
}

/// The assembled system `F(X) = 0`, one row per scalar equation.
#[derive(Debug, Clone)]
pub struct ResidualSystem {
    pub rows: Vec<Row>,
    /// Row range owned by each constraint, in model order.
    pub constraint_rows: Vec<std::ops::Range<usize>>,
    pub layout: Layout,
}

impl ResidualSystem {
    pub fn row_count(&self) -> usize {
        self.rows.len()
    }

    pub fn evaluate(&self, x: &[f64]) -> Vec<f64> {
        self.rows.iter().map(|r| r.form.value(x)).collect()
    }

    /// Jacobian `∂F/∂X` at raw coordinates `x`.
    pub fn jacobian_at(&self, x: &[f64]) -> DMatrix<f64> {
        let mut j = DMatrix::zeros(self.rows.len(), self.layout.raw_len);
        for (i, r) in self.rows.iter().enumerate() {
            for (col, v) in r.form.gradient(x) {
                j[(i, col)] += v;
            }
        }
        j
    }

    pub fn rows_of(&self, constraint_index: usize) -> std::ops::Range<usize> {
        self.constraint_rows[constraint_index].clone()
    }
}

/// Orthonormal basis of the plane orthogonal to `d`.
pub(crate) fn orthogonal_frame(d: &Vec3) -> (Vec3, Vec3) {
    let abs = d.abs();
    let e = if abs.x <= abs.y && abs.x <= abs.z {
        Vec3::x()
    } else if abs.y <= abs.z {
        Vec3::y()
    } else {
        Vec3::z()
    };
    let u = d.cross(&e).normalize();
    let v = d.cross(&u).normalize();
    (u, v)
}

fn side(n: Vec3, origin: Vec3, point: Vec3) -> f64 {
    if n.dot(&(point - origin)) >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Rows contributed by one constraint, evaluated against `m`'s geometry.
pub(crate) fn constraint_rows(m: &Model, layout: &Layout, c: &Constraint) -> Result<Vec<RowForm>> {
    let idx = |k: usize| {
        m.entity_index(&c.operands[k])
            .ok_or_else(|| Error::DanglingReference {
                constraint: c.id.0.clone(),
                entity: c.operands[k].0.clone(),
            })
    };
    let ia = idx(0)?;
    let ib = if c.operands.len() > 1 {
        Some(idx(1)?)
    } else {
        None
    };
    let ents = m.entities();
    let (ea, eb) = (&ents[ia], ib.map(|i| &ents[i]));
    let pairing = pairing(c.kind, ea, eb).map_err(|reason| Error::Inadmissible {
        constraint: c.id.0.clone(),
        reason,
    })?;
    let slot = |i: usize| &layout.slots[i];
    let op = |k: usize| {
        if k == 0 {
            ia
        } else {
            ib.expect("binary constraint")
        }
    };
    let dir = |k: usize| slot(op(k)).direction().expect("direction-bearing operand");
    let point = |k: usize| slot(op(k)).point();
    let geo_dir = |k: usize| ents[op(k)].direction().expect("direction-bearing operand");
    let geo_point = |k: usize| ents[op(k)].reference_point();
    let param = c.internal_parameter().unwrap_or(0.0);

    let parallel = |out: &mut Vec<RowForm>| {
        let (u, v) = orthogonal_frame(&geo_dir(0));
        for axis in [u, v] {
            out.push(RowForm::Cross {
                a: dir(0),
                b: dir(1),
                axis: [axis.x, axis.y, axis.z],
            });
        }
    };
    let offset = |plane: usize, target: OffsetTarget| {
        let other = 1 - plane;
        RowForm::Offset {
            normal: dir(plane),
            origin: point(plane),
            point: point(other),
            sign: side(geo_dir(plane), geo_point(plane), geo_point(other)),
            target,
        }
    };

    let mut rows = Vec::with_capacity(3);
    match pairing {
        Pairing::Directions => match c.kind {
            ConstraintKind::Angle => rows.push(RowForm::Dot {
                a: dir(0),
                b: dir(1),
                target: param.cos(),
            }),
            ConstraintKind::Perpendicular => rows.push(RowForm::Dot {
                a: dir(0),
                b: dir(1),
                target: 0.0,
            }),
            ConstraintKind::Parallel => parallel(&mut rows),
            _ => unreachable!("direction pairing only for angle kinds"),
        },
        Pairing::PlaneOffsetCompound => {
            parallel(&mut rows);
            rows.push(offset(0, OffsetTarget::Value(param)));
        }
        Pairing::PlaneOffset { plane } => rows.push(offset(plane, OffsetTarget::Value(param))),
        Pairing::AxisSeparationCompound => {
            parallel(&mut rows);
            rows.push(RowForm::AxisDistSq {
                axis: dir(0),
                origin: point(0),
                point: point(1),
                target_sq: param * param,
            });
        }
        Pairing::AxisDistance { cylinder } => rows.push(RowForm::AxisDistSq {
            axis: dir(cylinder),
            origin: point(cylinder),
            point: point(1 - cylinder),
            target_sq: param * param,
        }),
        Pairing::Positions => rows.push(RowForm::PointDistSq {
            a: point(0),
            b: point(1),
            target_sq: param * param,
        }),
        Pairing::EqualPositions => {
            for k in 0..3 {
                rows.push(RowForm::Difference {
                    a: point(0) + k,
                    b: point(1) + k,
                });
            }
        }
        Pairing::EqualIntrinsic => rows.push(RowForm::Difference {
            a: slot(ia).intrinsic().expect("intrinsic"),
            b: slot(op(1)).intrinsic().expect("intrinsic"),
        }),
        Pairing::Intrinsic => rows.push(RowForm::Scalar {
            index: slot(ia).intrinsic().expect("intrinsic"),
            target: param,
        }),
        Pairing::Tangent { plane } => {
            let cyl = 1 - plane;
            rows.push(RowForm::Dot {
                a: dir(plane),
                b: dir(cyl),
                target: 0.0,
            });
            let radius = slot(op(cyl)).intrinsic().expect("cylinder radius");
            rows.push(offset(plane, OffsetTarget::Coordinate(radius)));
        }
    }
    Ok(rows)
}

/// Assembles the residual system of a model.
pub fn assemble_system(m: &Model) -> Result<ResidualSystem> {
    let layout = Layout::of(m);
    let mut rows = Vec::new();
    let mut ranges = Vec::with_capacity(m.constraints().len());
    for (ci, c) in m.constraints().iter().enumerate() {
        let start = rows.len();
        for form in constraint_rows(m, &layout, c)? {
            rows.push(Row {
                constraint: c.id.clone(),
                constraint_index: ci,
                form,
            });
        }
        ranges.push(start..rows.len());
    }
    Ok(ResidualSystem {
        rows,
        constraint_rows: ranges,
        layout,
    })
}

/// Jacobian of the residual system at the model's witness geometry.
pub fn jacobian(rs: &ResidualSystem, m: &Model) -> DMatrix<f64> {
    rs.jacobian_at(&rs.layout.coordinates(m))
}

/// Largest absolute row residual at the witness.
pub fn witness_residual(m: &Model) -> Result<f64> {
    let rs = assemble_system(m)?;
    let x = rs.layout.coordinates(m);
    Ok(rs
        .evaluate(&x)
        .into_iter()
        .fold(0.0, |acc, v| acc.max(v.abs())))
}

/// Largest absolute residual of a single constraint against `m`'s geometry.
pub(crate) fn constraint_residual(m: &Model, c: &Constraint) -> Result<f64> {
    let layout = Layout::of(m);
    let x = layout.coordinates(m);
    Ok(constraint_rows(m, &layout, c)?
        .iter()
        .fold(0.0, |acc, r| acc.max(r.value(&x).abs())))
}
