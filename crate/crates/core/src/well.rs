//! Maximal well-constrained parts.
//!
//! A set of entities is a well-constrained part when every free perturbation
//! of the model, restricted to those entities, is a nominal one. The largest
//! such set is found by group-sparse fitting of the nominal generators `B`
//! against a basis `F` of `NullSpace(G)`, grouped by entity motion blocks.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::analyzer::{analyze, classify, Analysis};
use crate::error::{Error, Result};
use crate::kernels::{row_sparse_fit, GroupedSystem};
use crate::linearizer::nominal_generators;
use crate::model::{EntityId, Model};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WellPart {
    /// Member entities, sorted by id.
    pub entities: Vec<EntityId>,
    /// 1 for the largest part.
    pub rank_order: usize,
}

impl WellPart {
    pub fn contains(&self, id: &EntityId) -> bool {
        self.entities.contains(id)
    }
}

/// Entity blocks of `B` and `F`, ordered by entity id.
pub(crate) struct BlockSystem {
    b: DMatrix<f64>,
    f: DMatrix<f64>,
    /// Model entity index of each block, sorted by id.
    entity: Vec<usize>,
    ids: Vec<EntityId>,
    ranges: Vec<std::ops::Range<usize>>,
    full: GroupedSystem,
}

impl BlockSystem {
    pub(crate) fn new(m: &Model, a: &Analysis) -> Result<Self> {
        let mut entity: Vec<usize> = (0..m.entities().len()).collect();
        entity.sort_by(|&x, &y| m.entities()[x].id.cmp(&m.entities()[y].id));
        let ranges: Vec<_> = entity.iter().map(|&i| a.system.motion.block(i)).collect();
        let ids = entity.iter().map(|&i| m.entities()[i].id.clone()).collect();
        let b = nominal_generators(m);
        let f = a.free.clone();
        let groups: Vec<Vec<usize>> = ranges.iter().map(|r| r.clone().collect()).collect();
        let full = GroupedSystem::new(&b, &f, &groups)?;
        Ok(BlockSystem {
            b,
            f,
            entity,
            ids,
            ranges,
            full,
        })
    }

    fn block_of(&self, id: &EntityId) -> Result<usize> {
        self.ids
            .binary_search(id)
            .map_err(|_| Error::UnknownEntity(id.0.clone()))
    }

    fn blocks_of(&self, ids: &[EntityId]) -> Result<Vec<usize>> {
        let mut out = ids
            .iter()
            .map(|id| self.block_of(id))
            .collect::<Result<Vec<_>>>()?;
        out.sort_unstable();
        out.dedup();
        Ok(out)
    }

    pub(crate) fn consistent(&self, blocks: &[usize]) -> bool {
        self.full.consistent(blocks)
    }

    /// The largest consistent block set among `remaining`.
    fn largest_among(&self, remaining: &[usize]) -> Result<Vec<usize>> {
        let rows: Vec<usize> = remaining
            .iter()
            .flat_map(|&k| self.ranges[k].clone())
            .collect();
        let pick =
            |m: &DMatrix<f64>| DMatrix::from_fn(rows.len(), m.ncols(), |r, c| m[(rows[r], c)]);
        let mut groups = Vec::with_capacity(remaining.len());
        let mut at = 0;
        for &k in remaining {
            let len = self.ranges[k].len();
            groups.push((at..at + len).collect::<Vec<_>>());
            at += len;
        }
        let fit = row_sparse_fit(&pick(&self.b), &pick(&self.f), &groups)?;
        Ok(fit.zero_groups.into_iter().map(|g| remaining[g]).collect())
    }
}

pub fn detect_maximal_well_parts(m: &Model) -> Result<Vec<WellPart>> {
    detect_in(m, &analyze(m)?)
}

pub(crate) fn detect_in(m: &Model, a: &Analysis) -> Result<Vec<WellPart>> {
    if a.state.over {
        return Err(Error::OverConstraintPresent);
    }
    let blocks = BlockSystem::new(m, a)?;
    let mut remaining: Vec<usize> = (0..blocks.entity.len()).collect();
    let mut parts = Vec::new();
    while !remaining.is_empty() {
        let mut part = blocks.largest_among(&remaining)?;
        if part.is_empty() {
            // Nothing is well-constrained on its own (e.g. a free radius);
            // the first remaining entity stands alone.
            part = vec![remaining[0]];
        }
        remaining.retain(|k| !part.contains(k));
        parts.push(WellPart {
            entities: part.iter().map(|&k| blocks.ids[k].clone()).collect(),
            rank_order: parts.len() + 1,
        });
    }
    Ok(parts)
}

/// Whether every free perturbation restricted to `entities` is nominal.
pub fn is_part_well(m: &Model, entities: &[EntityId]) -> Result<bool> {
    let a = analyze(m)?;
    let blocks = BlockSystem::new(m, &a)?;
    Ok(blocks.consistent(&blocks.blocks_of(entities)?))
}

/// Whether the sub-model induced by `entities` classifies as well-constrained.
/// This is stricter than [`is_part_well`]: rigidity imposed through entities
/// outside the set does not count.
pub fn is_induced_well(m: &Model, entities: &[EntityId]) -> Result<bool> {
    Ok(classify(&m.induced(entities)?)?.is_well())
}

/// Whether no outside entity can join the well-constrained part `entities`.
pub fn is_part_maximal(m: &Model, entities: &[EntityId]) -> Result<bool> {
    let all: Vec<EntityId> = m.entities().iter().map(|e| e.id.clone()).collect();
    is_part_maximal_among(m, entities, &all)
}

/// Maximality against the entities of `candidates` only. Parts after the
/// first are maximal among the entities not yet taken by earlier parts: a
/// part can stay extendable by an entity that already belongs to a larger
/// one (two vertices held by a distance are rigid on their own).
pub fn is_part_maximal_among(
    m: &Model,
    entities: &[EntityId],
    candidates: &[EntityId],
) -> Result<bool> {
    let a = analyze(m)?;
    let blocks = BlockSystem::new(m, &a)?;
    let inside = blocks.blocks_of(entities)?;
    if !blocks.consistent(&inside) {
        return Err(Error::PartNotWell);
    }
    let outside: Vec<usize> = blocks
        .blocks_of(candidates)?
        .into_iter()
        .filter(|k| !inside.contains(k))
        .collect();
    Ok(outside.into_iter().all(|k| {
        let mut grown = inside.clone();
        grown.push(k);
        grown.sort_unstable();
        !blocks.consistent(&grown)
    }))
}

/// Greedy baseline: seed with the first remaining entity (by id), add every
/// further entity whose inclusion keeps the induced sub-model
/// well-constrained, then repeat on what is left.
pub fn greedy_well_baseline(m: &Model) -> Result<Vec<WellPart>> {
    if classify(m)?.over {
        return Err(Error::OverConstraintPresent);
    }
    let mut remaining: Vec<EntityId> = m.entities().iter().map(|e| e.id.clone()).collect();
    remaining.sort();
    let mut parts: Vec<Vec<EntityId>> = Vec::new();
    while !remaining.is_empty() {
        let mut part = vec![remaining[0].clone()];
        for id in &remaining[1..] {
            part.push(id.clone());
            if !is_induced_well(m, &part)? {
                part.pop();
            }
        }
        remaining.retain(|id| !part.contains(id));
        parts.push(part);
    }
    parts.sort_by_key(|p| std::cmp::Reverse(p.len()));
    Ok(parts
        .into_iter()
        .enumerate()
        .map(|(i, mut entities)| {
            entities.sort();
            WellPart {
                entities,
                rank_order: i + 1,
            }
        })
        .collect())
}
