//! JSON model documents.
//!
//! ```json
//! {"entities":[{"id":"F1","kind":"Plane","normal":[0,0,-1],"point":[0,0,0]}],
//!  "constraints":[{"id":"C1","kind":"Distance","entities":["F1","F3"],"parameter":1.0}]}
//! ```

use serde::{Deserialize, Serialize};

use super::{Constraint, ConstraintKind, EntityKind, GeometricEntity, Geometry, Model, Vec3};
use crate::error::{Error, Result};
use crate::tolerance;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Document {
    #[serde(default)]
    entities: Vec<EntityDoc>,
    #[serde(default)]
    constraints: Vec<ConstraintDoc>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EntityDoc {
    id: String,
    kind: EntityKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    normal: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    axis: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    point: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    position: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    radius: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    length: Option<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConstraintDoc {
    id: String,
    kind: ConstraintKind,
    entities: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    parameter: Option<f64>,
}

fn unit(id: &str, field: &str, v: Option<[f64; 3]>) -> Result<Vec3> {
    let v: Vec3 = v
        .ok_or_else(|| Error::Schema(format!("entity `{id}` is missing `{field}`")))?
        .into();
    let norm = v.norm();
    if !norm.is_finite() || (norm - 1.0).abs() > tolerance::RENORMALIZE {
        return Err(Error::InvalidEntity {
            entity: id.to_owned(),
            reason: format!("`{field}` has norm {norm}, expected a unit vector"),
        });
    }
    if (norm - 1.0).abs() > tolerance::UNIT {
        Ok(v / norm)
    } else {
        Ok(v)
    }
}

fn required<T>(id: &str, field: &str, v: Option<T>) -> Result<T> {
    v.ok_or_else(|| Error::Schema(format!("entity `{id}` is missing `{field}`")))
}

fn forbid<T>(id: &str, kind: EntityKind, field: &str, v: &Option<T>) -> Result<()> {
    match v {
        Some(_) => Err(Error::Schema(format!(
            "entity `{id}` of kind {kind:?} has no `{field}`"
        ))),
        None => Ok(()),
    }
}

impl EntityDoc {
    fn into_entity(self) -> Result<GeometricEntity> {
        let id = self.id.as_str();
        let geometry = match self.kind {
            EntityKind::Plane => {
                forbid(id, self.kind, "axis", &self.axis)?;
                forbid(id, self.kind, "direction", &self.direction)?;
                forbid(id, self.kind, "position", &self.position)?;
                forbid(id, self.kind, "radius", &self.radius)?;
                forbid(id, self.kind, "length", &self.length)?;
                Geometry::Plane {
                    normal: unit(id, "normal", self.normal)?,
                    point: required(id, "point", self.point)?.into(),
                }
            }
            EntityKind::Cylinder => {
                forbid(id, self.kind, "normal", &self.normal)?;
                forbid(id, self.kind, "direction", &self.direction)?;
                forbid(id, self.kind, "position", &self.position)?;
                forbid(id, self.kind, "length", &self.length)?;
                Geometry::Cylinder {
                    axis: unit(id, "axis", self.axis)?,
                    point: required(id, "point", self.point)?.into(),
                    radius: required(id, "radius", self.radius)?,
                }
            }
            EntityKind::Line => {
                forbid(id, self.kind, "normal", &self.normal)?;
                forbid(id, self.kind, "axis", &self.axis)?;
                forbid(id, self.kind, "position", &self.position)?;
                forbid(id, self.kind, "radius", &self.radius)?;
                Geometry::Line {
                    direction: unit(id, "direction", self.direction)?,
                    point: required(id, "point", self.point)?.into(),
                    length: self.length,
                }
            }
            EntityKind::Vertex => {
                forbid(id, self.kind, "normal", &self.normal)?;
                forbid(id, self.kind, "axis", &self.axis)?;
                forbid(id, self.kind, "direction", &self.direction)?;
                forbid(id, self.kind, "point", &self.point)?;
                forbid(id, self.kind, "radius", &self.radius)?;
                forbid(id, self.kind, "length", &self.length)?;
                Geometry::Vertex {
                    position: required(id, "position", self.position)?.into(),
                }
            }
        };
        Ok(GeometricEntity {
            id: self.id.into(),
            geometry,
        })
    }

    fn from_entity(e: &GeometricEntity) -> Self {
        let mut doc = EntityDoc {
            id: e.id.0.clone(),
            kind: e.kind(),
            normal: None,
            axis: None,
            direction: None,
            point: None,
            position: None,
            radius: None,
            length: None,
        };
        let arr = |v: &Vec3| [v.x, v.y, v.z];
        match &e.geometry {
            Geometry::Plane { normal, point } => {
                doc.normal = Some(arr(normal));
                doc.point = Some(arr(point));
            }
            Geometry::Cylinder {
                axis,
                point,
                radius,
            } => {
                doc.axis = Some(arr(axis));
                doc.point = Some(arr(point));
                doc.radius = Some(*radius);
            }
            Geometry::Line {
                direction,
                point,
                length,
            } => {
                doc.direction = Some(arr(direction));
                doc.point = Some(arr(point));
                doc.length = *length;
            }
            Geometry::Vertex { position } => doc.position = Some(arr(position)),
        }
        doc
    }
}

/// Parses and validates a JSON model document.
pub fn parse_model(document: &str) -> Result<Model> {
    let doc: Document = serde_json::from_str(document).map_err(|e| Error::Schema(e.to_string()))?;
    let entities = doc
        .entities
        .into_iter()
        .map(EntityDoc::into_entity)
        .collect::<Result<Vec<_>>>()?;
    let constraints = doc
        .constraints
        .into_iter()
        .map(|c| Constraint {
            id: c.id.into(),
            kind: c.kind,
            operands: c.entities.into_iter().map(Into::into).collect(),
            parameter: c.parameter,
        })
        .collect();
    Model::new(entities, constraints)
}

/// Serialises a model to its JSON document form.
pub fn serialize_model(m: &Model) -> String {
    let doc = Document {
        entities: m.entities().iter().map(EntityDoc::from_entity).collect(),
        constraints: m
            .constraints()
            .iter()
            .map(|c| ConstraintDoc {
                id: c.id.0.clone(),
                kind: c.kind,
                entities: c.operands.iter().map(|o| o.0.clone()).collect(),
                parameter: c.parameter,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&doc).expect("model documents always serialise")
}
