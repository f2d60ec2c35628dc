use super::{pairing, ConstraintKind, EntityId, GeometricEntity, Model, Pairing, Vec3};
use crate::error::{Error, Result};
use crate::tolerance;

pub(crate) fn point_axis_distance(point: Vec3, axis_point: Vec3, axis: Vec3) -> f64 {
    let w = point - axis_point;
    (w - axis * w.dot(&axis)).norm()
}

/// Measures the dimension the witness geometry realises for a parameterised
/// constraint kind. Angles come back in degrees.
pub fn measure_parameter(m: &Model, kind: ConstraintKind, operands: &[EntityId]) -> Result<f64> {
    if !kind.is_parameterized() {
        return Err(Error::NotParameterized(kind.name().into()));
    }
    let ops = operands
        .iter()
        .map(|id| {
            m.entity(id)
                .ok_or_else(|| Error::UnknownEntity(id.0.clone()))
        })
        .collect::<Result<Vec<_>>>()?;
    if ops.len() != kind.arity() {
        return Err(Error::Degenerate(format!(
            "{kind} takes {} operand(s)",
            kind.arity()
        )));
    }
    measure_entities(kind, ops[0], ops.get(1).copied())
}

pub(crate) fn measure_entities(
    kind: ConstraintKind,
    a: &GeometricEntity,
    b: Option<&GeometricEntity>,
) -> Result<f64> {
    let pairing = pairing(kind, a, b).map_err(Error::Degenerate)?;
    let ops = [Some(a), b];
    let ent = |i: usize| ops[i].expect("binary pairing");
    match pairing {
        Pairing::Directions => {
            let (d1, d2) = (a.direction().unwrap(), ent(1).direction().unwrap());
            Ok(d1.dot(&d2).clamp(-1.0, 1.0).acos().to_degrees())
        }
        Pairing::PlaneOffsetCompound => {
            let (n1, n2) = (a.direction().unwrap(), ent(1).direction().unwrap());
            if n1.cross(&n2).norm() > tolerance::WITNESS {
                return Err(Error::Degenerate(format!(
                    "planes `{}` and `{}` are not parallel",
                    a.id,
                    ent(1).id
                )));
            }
            Ok(n1
                .dot(&(ent(1).reference_point() - a.reference_point()))
                .abs())
        }
        Pairing::PlaneOffset { plane } => {
            let (p, q) = (ent(plane), ent(1 - plane));
            let n = p.direction().unwrap();
            Ok(n.dot(&(q.reference_point() - p.reference_point())).abs())
        }
        Pairing::AxisSeparationCompound => {
            let (a1, a2) = (a.direction().unwrap(), ent(1).direction().unwrap());
            if a1.cross(&a2).norm() > tolerance::WITNESS {
                return Err(Error::Degenerate(format!(
                    "cylinder axes `{}` and `{}` are not parallel",
                    a.id,
                    ent(1).id
                )));
            }
            Ok(point_axis_distance(
                ent(1).reference_point(),
                a.reference_point(),
                a1,
            ))
        }
        Pairing::AxisDistance { cylinder } => {
            let (c, q) = (ent(cylinder), ent(1 - cylinder));
            Ok(point_axis_distance(
                q.reference_point(),
                c.reference_point(),
                c.direction().unwrap(),
            ))
        }
        Pairing::Positions => Ok((a.reference_point() - ent(1).reference_point()).norm()),
        Pairing::Intrinsic => Ok(a.intrinsic().expect("intrinsic pairing")),
        Pairing::EqualPositions | Pairing::EqualIntrinsic | Pairing::Tangent { .. } => {
            Err(Error::NotParameterized(kind.name().into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::GeometricEntity as E;

    fn cube(height: f64) -> Model {
        Model::new(
            vec![
                E::plane("F1", [0., 0., -1.], [0.5, 0.5, 0.]),
                E::plane("F2", [0., 1., 0.], [0.5, height, 0.5]),
                E::plane("F3", [0., 0., 1.], [0.5, 0.5, 1.]),
                E::plane("F4", [0., -1., 0.], [0.5, 0., 0.5]),
            ],
            vec![],
        )
        .unwrap()
    }

    #[test]
    fn plane_plane_offset() {
        let m = cube(1.0);
        let d =
            measure_parameter(&m, ConstraintKind::Distance, &["F1".into(), "F3".into()]).unwrap();
        assert_eq!(d, 1.0);
        let m = cube(2.0);
        let d =
            measure_parameter(&m, ConstraintKind::Distance, &["F2".into(), "F4".into()]).unwrap();
        assert_eq!(d, 2.0);
    }

    #[test]
    fn angle_of_identical_directions_is_zero() {
        let m = Model::new(
            vec![
                E::line("L1", [0., 0., 1.], [0.; 3], None),
                E::line("L2", [0., 0., 1.], [1., 0., 0.], None),
            ],
            vec![],
        )
        .unwrap();
        let a = measure_parameter(&m, ConstraintKind::Angle, &["L1".into(), "L2".into()]).unwrap();
        assert_eq!(a, 0.0);
    }

    #[test]
    fn unparameterized_and_degenerate_requests_fail() {
        let m = cube(1.0);
        assert!(matches!(
            measure_parameter(&m, ConstraintKind::Parallel, &["F1".into(), "F3".into()]),
            Err(Error::NotParameterized(_))
        ));
        assert!(matches!(
            measure_parameter(&m, ConstraintKind::Distance, &["F1".into(), "F2".into()]),
            Err(Error::Degenerate(_))
        ));
        let v = Model::new(
            vec![E::vertex("V1", [0.; 3]), E::vertex("V2", [0.; 3])],
            vec![],
        )
        .unwrap();
        assert!(matches!(
            measure_parameter(&v, ConstraintKind::Angle, &["V1".into(), "V2".into()]),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn cylinder_distances() {
        let m = Model::new(
            vec![
                E::plane("P", [0., 0., 1.], [0., 0., 0.]),
                E::cylinder("C", [1., 0., 0.], [0., 0., 3.], 0.5),
                E::vertex("V", [7., 4., 3.]),
            ],
            vec![],
        )
        .unwrap();
        let d = measure_parameter(&m, ConstraintKind::Distance, &["P".into(), "C".into()]).unwrap();
        assert_eq!(d, 3.0);
        let d = measure_parameter(&m, ConstraintKind::Distance, &["V".into(), "C".into()]).unwrap();
        assert_eq!(d, 4.0);
        let r = measure_parameter(&m, ConstraintKind::Length, &["C".into()]).unwrap();
        assert_eq!(r, 0.5);
    }
}
