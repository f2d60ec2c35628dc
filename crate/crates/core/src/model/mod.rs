//! Entities, constraints and models.
//!
//! A [`Model`] couples a witness geometry (the entities) with a geometric
//! constraint system over it. Models are immutable values: every edit
//! produces a new model.

mod document;
mod measure;
mod update;

use std::collections::HashSet;
use std::fmt;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

pub use document::{parse_model, serialize_model};
pub use measure::measure_parameter;
pub use update::update_gcs_after_edit;

pub type Vec3 = Vector3<f64>;

macro_rules! string_id {
    ($name:ident) => {
        #[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub String);

        impl $name {
            pub fn new(s: impl Into<String>) -> Self {
                Self(s.into())
            }

            pub fn as_str(&self) -> &str {
                &self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(&self.0)
            }
        }

        impl From<&str> for $name {
            fn from(s: &str) -> Self {
                Self(s.to_owned())
            }
        }

        impl From<String> for $name {
            fn from(s: String) -> Self {
                Self(s)
            }
        }
    };
}

string_id!(EntityId);
string_id!(ConstraintId);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EntityKind {
    Plane,
    Cylinder,
    Line,
    Vertex,
}

/// Entity classes used by the type-precedence table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EntityClass {
    Face,
    Edge,
    Vertex,
}

impl EntityKind {
    pub fn class(self) -> EntityClass {
        match self {
            EntityKind::Plane | EntityKind::Cylinder => EntityClass::Face,
            EntityKind::Line => EntityClass::Edge,
            EntityKind::Vertex => EntityClass::Vertex,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Geometry {
    Plane {
        normal: Vec3,
        point: Vec3,
    },
    Cylinder {
        axis: Vec3,
        point: Vec3,
        radius: f64,
    },
    Line {
        direction: Vec3,
        point: Vec3,
        length: Option<f64>,
    },
    Vertex {
        position: Vec3,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeometricEntity {
    pub id: EntityId,
    pub geometry: Geometry,
}

impl GeometricEntity {
    pub fn plane(id: &str, normal: [f64; 3], point: [f64; 3]) -> Self {
        Self {
            id: id.into(),
            geometry: Geometry::Plane {
                normal: normal.into(),
                point: point.into(),
            },
        }
    }

    pub fn cylinder(id: &str, axis: [f64; 3], point: [f64; 3], radius: f64) -> Self {
        Self {
            id: id.into(),
            geometry: Geometry::Cylinder {
                axis: axis.into(),
                point: point.into(),
                radius,
            },
        }
    }

    pub fn line(id: &str, direction: [f64; 3], point: [f64; 3], length: Option<f64>) -> Self {
        Self {
            id: id.into(),
            geometry: Geometry::Line {
                direction: direction.into(),
                point: point.into(),
                length,
            },
        }
    }

    pub fn vertex(id: &str, position: [f64; 3]) -> Self {
        Self {
            id: id.into(),
            geometry: Geometry::Vertex {
                position: position.into(),
            },
        }
    }

    pub fn kind(&self) -> EntityKind {
        match self.geometry {
            Geometry::Plane { .. } => EntityKind::Plane,
            Geometry::Cylinder { .. } => EntityKind::Cylinder,
            Geometry::Line { .. } => EntityKind::Line,
            Geometry::Vertex { .. } => EntityKind::Vertex,
        }
    }

    /// Normal, axis or line direction. Vertices carry none.
    pub fn direction(&self) -> Option<Vec3> {
        match self.geometry {
            Geometry::Plane { normal, .. } => Some(normal),
            Geometry::Cylinder { axis, .. } => Some(axis),
            Geometry::Line { direction, .. } => Some(direction),
            Geometry::Vertex { .. } => None,
        }
    }

    /// Reference point: plane point, axis point, line start or vertex position.
    pub fn reference_point(&self) -> Vec3 {
        match self.geometry {
            Geometry::Plane { point, .. }
            | Geometry::Cylinder { point, .. }
            | Geometry::Line { point, .. } => point,
            Geometry::Vertex { position } => position,
        }
    }

    /// Intrinsic size scalar: cylinder radius or line length.
    pub fn intrinsic(&self) -> Option<f64> {
        match self.geometry {
            Geometry::Cylinder { radius, .. } => Some(radius),
            Geometry::Line { length, .. } => length,
            _ => None,
        }
    }

    /// Applies the rigid motion `x ↦ rotation · x + translation`.
    pub fn transformed(&self, rotation: &nalgebra::Rotation3<f64>, translation: &Vec3) -> Self {
        let map_point = |p: Vec3| rotation * p + translation;
        let geometry = match &self.geometry {
            Geometry::Plane { normal, point } => Geometry::Plane {
                normal: rotation * normal,
                point: map_point(*point),
            },
            Geometry::Cylinder {
                axis,
                point,
                radius,
            } => Geometry::Cylinder {
                axis: rotation * axis,
                point: map_point(*point),
                radius: *radius,
            },
            Geometry::Line {
                direction,
                point,
                length,
            } => Geometry::Line {
                direction: rotation * direction,
                point: map_point(*point),
                length: *length,
            },
            Geometry::Vertex { position } => Geometry::Vertex {
                position: map_point(*position),
            },
        };
        Self {
            id: self.id.clone(),
            geometry,
        }
    }

    pub(crate) fn validate(&self) -> Result<()> {
        let invalid = |reason: String| Error::InvalidEntity {
            entity: self.id.0.clone(),
            reason,
        };
        let finite = |v: &Vec3| v.iter().all(|c| c.is_finite());
        if let Some(d) = self.direction() {
            if !finite(&d) || (d.norm() - 1.0).abs() > tolerance::UNIT {
                return Err(invalid(format!("direction norm {} is not 1", d.norm())));
            }
        }
        if !finite(&self.reference_point()) {
            return Err(invalid("non-finite coordinates".into()));
        }
        match self.geometry {
            Geometry::Cylinder { radius, .. } if !(radius > 0.0 && radius.is_finite()) => {
                Err(invalid(format!("radius {radius} must be positive")))
            }
            Geometry::Line {
                length: Some(l), ..
            } if !(l > 0.0 && l.is_finite()) => {
                Err(invalid(format!("length {l} must be positive")))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ConstraintKind {
    Angle,
    Parallel,
    Perpendicular,
    Distance,
    EqualPosition,
    EqualAngleParam,
    EqualLengthParam,
    Length,
    Tangent,
}

impl ConstraintKind {
    pub const ALL: [ConstraintKind; 9] = [
        ConstraintKind::Angle,
        ConstraintKind::Parallel,
        ConstraintKind::Perpendicular,
        ConstraintKind::Distance,
        ConstraintKind::EqualPosition,
        ConstraintKind::EqualAngleParam,
        ConstraintKind::EqualLengthParam,
        ConstraintKind::Length,
        ConstraintKind::Tangent,
    ];

    pub fn is_parameterized(self) -> bool {
        matches!(
            self,
            ConstraintKind::Angle | ConstraintKind::Distance | ConstraintKind::Length
        )
    }

    pub fn arity(self) -> usize {
        match self {
            ConstraintKind::Length => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ConstraintKind::Angle => "Angle",
            ConstraintKind::Parallel => "Parallel",
            ConstraintKind::Perpendicular => "Perpendicular",
            ConstraintKind::Distance => "Distance",
            ConstraintKind::EqualPosition => "EqualPosition",
            ConstraintKind::EqualAngleParam => "EqualAngleParam",
            ConstraintKind::EqualLengthParam => "EqualLengthParam",
            ConstraintKind::Length => "Length",
            ConstraintKind::Tangent => "Tangent",
        }
    }
}

impl fmt::Display for ConstraintKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A geometric constraint. Angle parameters are held in degrees, the unit
/// used by model documents; the linearizer converts them to radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub id: ConstraintId,
    pub kind: ConstraintKind,
    #[serde(rename = "entities")]
    pub operands: Vec<EntityId>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<f64>,
}

impl Constraint {
    pub fn new(id: &str, kind: ConstraintKind, operands: &[&str], parameter: Option<f64>) -> Self {
        Self {
            id: id.into(),
            kind,
            operands: operands.iter().map(|&s| s.into()).collect(),
            parameter,
        }
    }

    /// Parameter in internal units (radians for angles).
    pub fn internal_parameter(&self) -> Option<f64> {
        match self.kind {
            ConstraintKind::Angle => self.parameter.map(f64::to_radians),
            _ => self.parameter,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ops: Vec<&str> = self.operands.iter().map(EntityId::as_str).collect();
        write!(f, "{}({})", self.kind, ops.join(","))?;
        match (self.kind, self.parameter) {
            (ConstraintKind::Angle, Some(p)) => write!(f, "={p}°"),
            (_, Some(p)) => write!(f, "={p}"),
            _ => Ok(()),
        }
    }
}

/// How a constraint kind applies to a particular operand pairing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Pairing {
    /// Two direction-bearing entities (angle, parallel, perpendicular).
    Directions,
    /// Plane-plane distance: parallel normals plus signed offset.
    PlaneOffsetCompound,
    /// Offset of the second operand's position from the plane (first operand index given).
    PlaneOffset { plane: usize },
    /// Cylinder-cylinder distance: parallel axes plus axis separation.
    AxisSeparationCompound,
    /// Distance from a position to a cylinder axis (cylinder operand index given).
    AxisDistance { cylinder: usize },
    /// Euclidean distance between two positions.
    Positions,
    /// Coincident positions.
    EqualPositions,
    /// Equal intrinsic scalars.
    EqualIntrinsic,
    /// A single intrinsic scalar.
    Intrinsic,
    /// Plane tangent to cylinder (plane operand index given).
    Tangent { plane: usize },
}

fn has_position(kind: EntityKind) -> bool {
    matches!(kind, EntityKind::Line | EntityKind::Vertex)
}

/// Resolves the operand pairing of `kind` over entities `a` (and `b`), or
/// explains why the pairing is inadmissible.
pub(crate) fn pairing(
    kind: ConstraintKind,
    a: &GeometricEntity,
    b: Option<&GeometricEntity>,
) -> std::result::Result<Pairing, String> {
    use EntityKind::*;
    let ka = a.kind();
    let kb = b.map(GeometricEntity::kind);
    let bad = || {
        let kinds = match kb {
            Some(kb) => format!("{ka:?}, {kb:?}"),
            None => format!("{ka:?}"),
        };
        format!("{kind} is not defined for ({kinds})")
    };
    match (kind, kb) {
        (ConstraintKind::Length, None) => match ka {
            Cylinder => Ok(Pairing::Intrinsic),
            Line if a.intrinsic().is_some() => Ok(Pairing::Intrinsic),
            _ => Err(bad()),
        },
        (ConstraintKind::Length, Some(_)) | (_, None) => Err(bad()),
        (
            ConstraintKind::Angle | ConstraintKind::Parallel | ConstraintKind::Perpendicular,
            Some(kb),
        ) => {
            if ka != Vertex && kb != Vertex {
                Ok(Pairing::Directions)
            } else {
                Err(bad())
            }
        }
        (ConstraintKind::Distance, Some(kb)) => match (ka, kb) {
            (Plane, Plane) => Ok(Pairing::PlaneOffsetCompound),
            (Plane, Cylinder) | (Cylinder, Plane) => {
                let plane = if ka == Plane { 0 } else { 1 };
                let (p, c) = if plane == 0 {
                    (a, b.unwrap())
                } else {
                    (b.unwrap(), a)
                };
                let n = p.direction().unwrap();
                let axis = c.direction().unwrap();
                if n.dot(&axis).abs() > tolerance::WITNESS {
                    Err("plane-cylinder distance requires the cylinder axis to be parallel to the plane"
                        .into())
                } else {
                    Ok(Pairing::PlaneOffset { plane })
                }
            }
            (Plane, _) => Ok(Pairing::PlaneOffset { plane: 0 }),
            (_, Plane) => Ok(Pairing::PlaneOffset { plane: 1 }),
            (Cylinder, Cylinder) => Ok(Pairing::AxisSeparationCompound),
            (Cylinder, _) => Ok(Pairing::AxisDistance { cylinder: 0 }),
            (_, Cylinder) => Ok(Pairing::AxisDistance { cylinder: 1 }),
            _ => Ok(Pairing::Positions),
        },
        (ConstraintKind::EqualPosition, Some(kb)) => {
            if has_position(ka) && has_position(kb) {
                Ok(Pairing::EqualPositions)
            } else {
                Err(bad())
            }
        }
        (ConstraintKind::EqualLengthParam, Some(kb)) => {
            let ok = match (ka, kb) {
                (Cylinder, Cylinder) => true,
                (Line, Line) => a.intrinsic().is_some() && b.unwrap().intrinsic().is_some(),
                _ => false,
            };
            if ok {
                Ok(Pairing::EqualIntrinsic)
            } else {
                Err(bad())
            }
        }
        // No entity kind carries an angle-valued intrinsic parameter.
        (ConstraintKind::EqualAngleParam, Some(_)) => Err(bad()),
        (ConstraintKind::Tangent, Some(kb)) => match (ka, kb) {
            (Plane, Cylinder) => Ok(Pairing::Tangent { plane: 0 }),
            (Cylinder, Plane) => Ok(Pairing::Tangent { plane: 1 }),
            _ => Err(bad()),
        },
    }
}

/// Entities plus the ordered constraint list over them.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Model {
    entities: Vec<GeometricEntity>,
    constraints: Vec<Constraint>,
}

impl Model {
    /// Builds a model, checking id uniqueness, entity invariants, references
    /// and operand admissibility.
    pub fn new(entities: Vec<GeometricEntity>, constraints: Vec<Constraint>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entities {
            if !seen.insert(e.id.0.as_str()) {
                return Err(Error::DuplicateId(e.id.0.clone()));
            }
            e.validate()?;
        }
        let model = Model {
            entities,
            constraints: Vec::new(),
        };
        let mut cids = HashSet::new();
        for c in &constraints {
            if !cids.insert(c.id.0.as_str()) {
                return Err(Error::DuplicateId(c.id.0.clone()));
            }
            model.check_constraint(c)?;
        }
        Ok(Model {
            constraints,
            ..model
        })
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn entities(&self) -> &[GeometricEntity] {
        &self.entities
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn entity(&self, id: &EntityId) -> Option<&GeometricEntity> {
        self.entities.iter().find(|e| &e.id == id)
    }

    pub fn entity_index(&self, id: &EntityId) -> Option<usize> {
        self.entities.iter().position(|e| &e.id == id)
    }

    pub fn constraint(&self, id: &ConstraintId) -> Option<&Constraint> {
        self.constraints.iter().find(|c| &c.id == id)
    }

    pub fn constraint_index(&self, id: &ConstraintId) -> Option<usize> {
        self.constraints.iter().position(|c| &c.id == id)
    }

    /// Checks references, parameter presence and operand admissibility of `c`
    /// against this model's entities.
    pub fn check_constraint(&self, c: &Constraint) -> Result<()> {
        let inadmissible = |reason: String| Error::Inadmissible {
            constraint: c.id.0.clone(),
            reason,
        };
        if c.operands.len() != c.kind.arity() {
            return Err(inadmissible(format!(
                "{} takes {} operand(s), got {}",
                c.kind,
                c.kind.arity(),
                c.operands.len()
            )));
        }
        let mut ops = Vec::with_capacity(2);
        for op in &c.operands {
            let e = self.entity(op).ok_or_else(|| Error::DanglingReference {
                constraint: c.id.0.clone(),
                entity: op.0.clone(),
            })?;
            ops.push(e);
        }
        if ops.len() == 2 && ops[0].id == ops[1].id {
            return Err(inadmissible("operands must be distinct entities".into()));
        }
        match (c.kind.is_parameterized(), c.parameter) {
            (true, None) => return Err(inadmissible(format!("{} requires a parameter", c.kind))),
            (false, Some(_)) => return Err(inadmissible(format!("{} takes no parameter", c.kind))),
            (true, Some(p)) if !p.is_finite() || p < 0.0 => {
                return Err(inadmissible(format!(
                    "parameter {p} must be finite and non-negative"
                )))
            }
            _ => {}
        }
        pairing(c.kind, ops[0], ops.get(1).copied()).map_err(inadmissible)?;
        Ok(())
    }

    /// Returns a copy with `c` appended.
    pub fn with_constraint(&self, c: Constraint) -> Result<Self> {
        if self.constraint(&c.id).is_some() {
            return Err(Error::DuplicateId(c.id.0.clone()));
        }
        self.check_constraint(&c)?;
        let mut next = self.clone();
        next.constraints.push(c);
        Ok(next)
    }

    /// Returns a copy without the constraint `id`.
    pub fn without_constraint(&self, id: &ConstraintId) -> Result<Self> {
        let idx = self
            .constraint_index(id)
            .ok_or_else(|| Error::UnknownConstraint(id.0.clone()))?;
        let mut next = self.clone();
        next.constraints.remove(idx);
        Ok(next)
    }

    /// Sub-model over `ids` holding only the constraints whose operands all
    /// lie inside the set.
    pub fn induced(&self, ids: &[EntityId]) -> Result<Self> {
        for id in ids {
            if self.entity(id).is_none() {
                return Err(Error::UnknownEntity(id.0.clone()));
            }
        }
        let keep: HashSet<&EntityId> = ids.iter().collect();
        let entities = self
            .entities
            .iter()
            .filter(|e| keep.contains(&e.id))
            .cloned()
            .collect();
        let constraints = self
            .constraints
            .iter()
            .filter(|c| c.operands.iter().all(|o| keep.contains(o)))
            .cloned()
            .collect();
        Ok(Model {
            entities,
            constraints,
        })
    }

    /// Applies one rigid motion to every entity.
    pub fn transformed(&self, rotation: &nalgebra::Rotation3<f64>, translation: &Vec3) -> Self {
        Model {
            entities: self
                .entities
                .iter()
                .map(|e| e.transformed(rotation, translation))
                .collect(),
            constraints: self.constraints.clone(),
        }
    }

    /// Entity ids that share at least one constraint with `id`.
    pub fn neighbors(&self, id: &EntityId) -> Vec<EntityId> {
        let mut out: Vec<EntityId> = Vec::new();
        for c in &self.constraints {
            if c.operands.contains(id) {
                for o in &c.operands {
                    if o != id && !out.contains(o) {
                        out.push(o.clone());
                    }
                }
            }
        }
        out
    }
}
