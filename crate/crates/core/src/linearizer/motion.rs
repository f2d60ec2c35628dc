use nalgebra::DMatrix;

use super::layout::Layout;
use crate::model::{Model, Vec3};

/// Block-diagonal map `T` from motion coordinates `ΔX′` to raw coordinate
/// perturbations `ΔX`.
#[derive(Debug, Clone)]
pub struct MotionTransform {
    pub layout: Layout,
    pub matrix: DMatrix<f64>,
}

impl MotionTransform {
    pub fn column_count(&self) -> usize {
        self.layout.motion_len
    }

    /// Motion-coordinate column range of entity `index`.
    pub fn block(&self, index: usize) -> std::ops::Range<usize> {
        self.layout.slots[index].motion_range()
    }
}

pub fn motion_transform(m: &Model) -> MotionTransform {
    let layout = Layout::of(m);
    let mut t = DMatrix::zeros(layout.raw_len, layout.motion_len);
    for (e, s) in m.entities().iter().zip(&layout.slots) {
        if let (Some(row), Some(d)) = (s.direction(), e.direction()) {
            for k in 0..3 {
                let col = Vec3::ith(k, 1.0).cross(&d);
                for r in 0..3 {
                    t[(row + r, s.motion + k)] = col[r];
                }
            }
        }
        let p = s.point();
        for k in 0..3 {
            t[(p + k, s.motion + 3 + k)] = 1.0;
        }
        if let Some(i) = s.intrinsic() {
            t[(i, s.motion + 6)] = 1.0;
        }
    }
    MotionTransform { layout, matrix: t }
}
