use crate::model::{Geometry, Model};

/// Where one entity's raw coordinates and motion coordinates live.
#[derive(Debug, Clone, PartialEq)]
pub struct EntitySlots {
    /// First raw coordinate (direction first when present, then point, then intrinsic).
    pub raw: usize,
    pub raw_len: usize,
    /// First motion coordinate: `ω` (3), `t` (3), then the intrinsic scalar.
    pub motion: usize,
    pub has_direction: bool,
    pub has_intrinsic: bool,
}

impl EntitySlots {
    pub fn direction(&self) -> Option<usize> {
        self.has_direction.then_some(self.raw)
    }

    pub fn point(&self) -> usize {
        if self.has_direction {
            self.raw + 3
        } else {
            self.raw
        }
    }

    pub fn intrinsic(&self) -> Option<usize> {
        self.has_intrinsic.then_some(self.raw + 6)
    }

    pub fn motion_len(&self) -> usize {
        6 + usize::from(self.has_intrinsic)
    }

    pub fn motion_range(&self) -> std::ops::Range<usize> {
        self.motion..self.motion + self.motion_len()
    }

    pub fn raw_range(&self) -> std::ops::Range<usize> {
        self.raw..self.raw + self.raw_len
    }
}

/// Coordinate layout of a model, in entity order.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub slots: Vec<EntitySlots>,
    pub raw_len: usize,
    pub motion_len: usize,
}

impl Layout {
    pub fn of(m: &Model) -> Self {
        let mut slots = Vec::with_capacity(m.entities().len());
        let (mut raw, mut motion) = (0, 0);
        for e in m.entities() {
            let (has_direction, has_intrinsic) = match e.geometry {
                Geometry::Plane { .. } => (true, false),
                Geometry::Cylinder { .. } => (true, true),
                Geometry::Line { length, .. } => (true, length.is_some()),
                Geometry::Vertex { .. } => (false, false),
            };
            let raw_len = if has_direction { 6 } else { 3 } + usize::from(has_intrinsic);
            let s = EntitySlots {
                raw,
                raw_len,
                motion,
                has_direction,
                has_intrinsic,
            };
            raw += raw_len;
            motion += s.motion_len();
            slots.push(s);
        }
        Layout {
            slots,
            raw_len: raw,
            motion_len: motion,
        }
    }

    /// Raw coordinate vector `X` of the model's witness geometry.
    pub fn coordinates(&self, m: &Model) -> Vec<f64> {
        let mut x = vec![0.0; self.raw_len];
        for (e, s) in m.entities().iter().zip(&self.slots) {
            if let (Some(i), Some(d)) = (s.direction(), e.direction()) {
                x[i..i + 3].copy_from_slice(d.as_slice());
            }
            let p = s.point();
            x[p..p + 3].copy_from_slice(e.reference_point().as_slice());
            if let (Some(i), Some(v)) = (s.intrinsic(), e.intrinsic()) {
                x[i] = v;
            }
        }
        x
    }
}
