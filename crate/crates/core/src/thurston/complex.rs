//! Level-n tilings obtained by pulling back the two faces.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::json;

use super::rule::{identity, mat_mul, Mat, RuleName, SubdivisionMap};
use super::{sq_len, sub, Bary, Face, TilePoint};
use crate::error::{Error, Result};
use crate::measure::FiniteMeasure;
use crate::numerics::{format_rational, sqrt_rational, BallReal};

/// An n-tile. `verts[k]` is the vertex sent to corner `k` by the n-th iterate.
#[derive(Clone, Debug)]
pub struct Tile {
    pub id: usize,
    pub face: Face,
    pub verts: [TilePoint; 3],
    /// Face this tile is mapped onto by the n-th iterate.
    pub target: Face,
    /// `+1` if the labels run counterclockwise on the tile's face.
    pub orientation: i8,
    /// Index of the (n-1)-tile this tile maps onto (`None` at level 0).
    pub image: Option<usize>,
    /// Index of the (n-1)-tile containing this tile (`None` at level 0).
    pub container: Option<usize>,
    m: Mat,
}

#[derive(Clone, Debug)]
pub struct TileComplex {
    pub rule: RuleName,
    pub level: usize,
    pub tiles: Vec<Tile>,
}

impl TileComplex {
    pub fn level0(rule: RuleName) -> Self {
        let tiles = [Face::Front, Face::Back]
            .into_iter()
            .enumerate()
            .map(|(id, face)| {
                let m = identity();
                Tile {
                    id,
                    face,
                    verts: std::array::from_fn(|k| column_point(face, &m, k)),
                    target: face,
                    orientation: 1,
                    image: None,
                    container: None,
                    m,
                }
            })
            .collect();
        TileComplex { rule, level: 0, tiles }
    }

    /// The level-`n` complex of a rule.
    pub fn build(map: &SubdivisionMap, n: usize) -> Self {
        let mut c = TileComplex::level0(map.rule.name);
        for _ in 0..n {
            c = subdivide(&c, map).expect("same rule");
        }
        c
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// All tile vertices, each once.
    pub fn vertices(&self) -> Vec<TilePoint> {
        let mut v: Vec<TilePoint> = self.tiles.iter().flat_map(|t| t.verts.iter().cloned()).collect();
        v.sort();
        v.dedup();
        v
    }

    /// Pairs of tiles sharing an edge.
    pub fn adjacency(&self) -> Vec<(usize, usize)> {
        let mut edges: HashMap<(TilePoint, TilePoint), Vec<usize>> = HashMap::new();
        for t in &self.tiles {
            for k in 0..3 {
                let (a, b) = (t.verts[k].clone(), t.verts[(k + 1) % 3].clone());
                let key = if a <= b { (a, b) } else { (b, a) };
                edges.entry(key).or_default().push(t.id);
            }
        }
        let mut out: Vec<(usize, usize)> =
            edges.values().filter(|ts| ts.len() == 2).map(|ts| (ts[0].min(ts[1]), ts[0].max(ts[1]))).collect();
        out.sort_unstable();
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        let tiles: Vec<serde_json::Value> = self
            .tiles
            .iter()
            .map(|t| {
                let verts: Vec<Vec<String>> =
                    t.verts.iter().map(|v| v.bary().iter().map(format_rational).collect()).collect();
                json!({"id": t.id, "face": t.face, "verts": verts, "target": t.target, "orientation": t.orientation})
            })
            .collect();
        let parent: Vec<Option<usize>> = self.tiles.iter().map(|t| t.image).collect();
        json!({"rule": self.rule, "level": self.level, "tiles": tiles, "parent": parent})
    }
}

fn column_point(face: Face, m: &Mat, k: usize) -> TilePoint {
    let b: Bary = std::array::from_fn(|i| m[i][k].clone());
    TilePoint::canonical(face, b)
}

/// Pulls the complex back once: each n-tile splits into `deg` (n+1)-tiles.
pub fn subdivide(c: &TileComplex, map: &SubdivisionMap) -> Result<TileComplex> {
    if c.rule != map.rule.name {
        return Err(Error::RuleMismatch);
    }
    let deg = map.degree();
    let mut tiles = Vec::with_capacity(c.tiles.len() * deg);
    for parent in &c.tiles {
        for t in 0..deg {
            let chart = map.chart(parent.target, t);
            let m = mat_mul(&parent.m, &chart.m);
            let id = parent.id * deg + t;
            let image = match parent.image {
                Some(i) => i * deg + t,
                None => chart.target.index(),
            };
            let verts: [TilePoint; 3] = std::array::from_fn(|k| column_point(parent.face, &m, k));
            let orientation = if super::rule::det(&m) > BigRational::zero() { 1 } else { -1 };
            tiles.push(Tile {
                id,
                face: parent.face,
                verts,
                target: chart.target,
                orientation,
                image: Some(image),
                container: Some(parent.id),
                m,
            });
        }
    }
    Ok(TileComplex { rule: c.rule, level: c.level + 1, tiles })
}

/// Ids of the tiles containing the vertex `v`.
pub fn flower(c: &TileComplex, v: &TilePoint) -> Result<Vec<usize>> {
    let ids: Vec<usize> = c.tiles.iter().filter(|t| t.verts.contains(v)).map(|t| t.id).collect();
    if ids.is_empty() {
        Err(Error::NotAVertex)
    } else {
        Ok(ids)
    }
}

fn barycenter(t: &Tile) -> TilePoint {
    let third = BigRational::new(1.into(), 3.into());
    let b: Bary = std::array::from_fn(|i| (t.verts[0].bary()[i].clone() + &t.verts[1].bary()[i] + &t.verts[2].bary()[i]) * &third);
    TilePoint::canonical(t.face, b)
}

/// Equal weights `1/(2 deg^n)` at the barycenters of the n-tiles.
pub fn mme_tile_measure(map: &SubdivisionMap, n: usize) -> FiniteMeasure<TilePoint> {
    let c = TileComplex::build(map, n);
    let w = BigRational::new(1.into(), c.len().into());
    FiniteMeasure::new(c.tiles.iter().map(|t| (barycenter(t), w.clone())).collect()).expect("barycenters are distinct")
}

/// Largest tile diameter; a tile lies in one face, so this is its longest side.
pub fn max_tile_diameter(c: &TileComplex, prec: i64) -> BallReal {
    let mut best = BigRational::zero();
    for t in &c.tiles {
        for k in 0..3 {
            let d = sq_len(&sub(t.verts[k].bary(), t.verts[(k + 1) % 3].bary()));
            if d > best {
                best = d;
            }
        }
    }
    sqrt_rational(&best, prec).expect("nonnegative")
}
