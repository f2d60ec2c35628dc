use nalgebra::DMatrix;

use super::layout::Layout;
use super::residual::orthogonal_frame;
use crate::kernels::column_basis;
use crate::model::{Geometry, Model, Vec3};

/// Generators of motions that leave the geometry unchanged: the six global
/// rigid motions followed by every entity's self-symmetries. Columns are in
/// motion coordinates and are not orthonormalised.
pub fn nominal_generators(m: &Model) -> DMatrix<f64> {
    let layout = Layout::of(m);
    let mut cols: Vec<Vec<f64>> = Vec::new();
    let n = layout.motion_len;
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let put =
        |col: &mut Vec<f64>, at: usize, v: Vec3| col[at..at + 3].copy_from_slice(v.as_slice());

    for k in 0..3 {
        let w = Vec3::ith(k, 1.0);
        let mut col = vec![0.0; n];
        for (e, s) in m.entities().iter().zip(&layout.slots) {
            put(&mut col, s.motion, w);
            put(&mut col, s.motion + 3, w.cross(&e.reference_point()));
        }
        cols.push(col);
    }
    for k in 0..3 {
        let mut col = vec![0.0; n];
        for s in &layout.slots {
            put(&mut col, s.motion + 3, Vec3::ith(k, 1.0));
        }
        cols.push(col);
    }
    for (e, s) in m.entities().iter().zip(&layout.slots) {
        let mut single = |at: usize, v: Vec3| {
            let mut col = vec![0.0; n];
            put(&mut col, at, v);
            cols.push(col);
        };
        match e.geometry {
            Geometry::Plane { normal, .. } => {
                let (u, v) = orthogonal_frame(&normal);
                single(s.motion, normal);
                single(s.motion + 3, u);
                single(s.motion + 3, v);
            }
            Geometry::Cylinder { axis, .. } => {
                single(s.motion, axis);
                single(s.motion + 3, axis);
            }
            Geometry::Line { direction, .. } => single(s.motion, direction),
            Geometry::Vertex { .. } => {
                for k in 0..3 {
                    single(s.motion, Vec3::ith(k, 1.0));
                }
            }
        }
    }
    DMatrix::from_fn(n, cols.len(), |r, c| cols[c][r])
}

/// Orthonormal basis `B` of the nominal free perturbation space.
pub fn nominal_space(m: &Model) -> DMatrix<f64> {
    column_basis(&nominal_generators(m))
}
