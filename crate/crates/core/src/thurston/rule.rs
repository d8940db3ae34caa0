//! Subdivision rule tables and the piecewise-affine maps they define.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{Bary, Face, TilePoint};
use crate::error::{Error, Result};
use crate::numerics::rat;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleName {
    G1,
    G2,
}

impl std::str::FromStr for RuleName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "g1" => Ok(RuleName::G1),
            "g2" => Ok(RuleName::G2),
            _ => Err(Error::Parse(format!("unknown rule `{s}` (expected g1 or g2)"))),
        }
    }
}

/// How one face is cut into small triangles, and which corner each new vertex maps to.
///
/// The same table is used on both faces. Label `k` means the vertex maps to
/// corner `k` of the big triangle (`A`, `B`, `C`). Tiles list vertex indices
/// counterclockwise in barycentric orientation.
#[derive(Clone, Debug)]
pub struct SubdivisionRule {
    pub name: RuleName,
    pub vertices: Vec<Bary>,
    pub labels: Vec<usize>,
    pub tiles: Vec<[usize; 3]>,
}

fn b(x: (i64, i64), y: (i64, i64), z: (i64, i64)) -> Bary {
    [rat(x.0, x.1), rat(y.0, y.1), rat(z.0, z.1)]
}

impl SubdivisionRule {
    pub fn get(name: RuleName) -> Self {
        match name {
            RuleName::G1 => Self::g1(),
            RuleName::G2 => Self::g2(),
        }
    }

    /// Barycentric subdivision: six triangles per face around the face center.
    pub fn g1() -> Self {
        let vertices = vec![
            b((1, 1), (0, 1), (0, 1)), // 0 A
            b((0, 1), (1, 1), (0, 1)), // 1 B
            b((0, 1), (0, 1), (1, 1)), // 2 C
            b((0, 1), (1, 2), (1, 2)), // 3 D, midpoint of BC
            b((1, 2), (0, 1), (1, 2)), // 4 E, midpoint of CA
            b((1, 2), (1, 2), (0, 1)), // 5 F, midpoint of AB
            b((1, 3), (1, 3), (1, 3)), // 6 O, center
        ];
        // corners -> A, midpoints -> B, center -> C
        let labels = vec![0, 0, 0, 1, 1, 1, 2];
        let tiles = vec![[0, 5, 6], [5, 1, 6], [1, 3, 6], [3, 2, 6], [2, 4, 6], [4, 0, 6]];
        SubdivisionRule { name: RuleName::G1, vertices, labels, tiles }
    }

    /// Eight triangles per face: edge midpoints plus two interior points
    /// `P` (toward `A`) and `Q` (toward edge `BC`).
    pub fn g2() -> Self {
        let vertices = vec![
            b((1, 1), (0, 1), (0, 1)),    // 0 A
            b((0, 1), (1, 1), (0, 1)),    // 1 B
            b((0, 1), (0, 1), (1, 1)),    // 2 C
            b((0, 1), (1, 2), (1, 2)),    // 3 D
            b((1, 2), (0, 1), (1, 2)),    // 4 E
            b((1, 2), (1, 2), (0, 1)),    // 5 F
            b((2, 5), (3, 10), (3, 10)),  // 6 P
            b((1, 5), (2, 5), (2, 5)),    // 7 Q
        ];
        let labels = vec![0, 1, 1, 2, 2, 2, 1, 0];
        let tiles = vec![[0, 5, 6], [0, 6, 4], [5, 1, 7], [1, 3, 7], [3, 2, 7], [2, 4, 7], [5, 7, 6], [6, 7, 4]];
        SubdivisionRule { name: RuleName::G2, vertices, labels, tiles }
    }

    /// Tiles per face, which is also the degree of the map.
    pub fn degree(&self) -> usize {
        self.tiles.len()
    }
}

pub(crate) type Mat = [[BigRational; 3]; 3];

pub(crate) fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    std::array::from_fn(|i| std::array::from_fn(|j| (0..3).fold(BigRational::zero(), |s, k| s + &a[i][k] * &b[k][j])))
}

pub(crate) fn mat_vec(a: &Mat, v: &Bary) -> Bary {
    std::array::from_fn(|i| (0..3).fold(BigRational::zero(), |s, k| s + &a[i][k] * &v[k]))
}

pub(crate) fn det(a: &Mat) -> BigRational {
    &a[0][0] * (&a[1][1] * &a[2][2] - &a[1][2] * &a[2][1]) - &a[0][1] * (&a[1][0] * &a[2][2] - &a[1][2] * &a[2][0])
        + &a[0][2] * (&a[1][0] * &a[2][1] - &a[1][1] * &a[2][0])
}

fn inverse(a: &Mat) -> Option<Mat> {
    let d = det(a);
    if d.is_zero() {
        return None;
    }
    let c = |i: usize, j: usize| {
        let (r0, r1) = ((i + 1) % 3, (i + 2) % 3);
        let (c0, c1) = ((j + 1) % 3, (j + 2) % 3);
        &a[r0][c0] * &a[r1][c1] - &a[r0][c1] * &a[r1][c0]
    };
    // inverse = adjugate / det, adjugate = transpose of cofactors
    Some(std::array::from_fn(|i| std::array::from_fn(|j| c(j, i) / &d)))
}

pub(crate) fn identity() -> Mat {
    std::array::from_fn(|i| std::array::from_fn(|j| if i == j { BigRational::one() } else { BigRational::zero() }))
}

/// Parity of a permutation of `(0, 1, 2)`: `+1` even, `-1` odd.
fn parity(l: [usize; 3]) -> i32 {
    let inv = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).filter(|&(i, j)| l[i] > l[j]).count();
    if inv % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Affine chart of one 1-tile: column `k` of `m` is the tile vertex labelled `k`.
#[derive(Clone, Debug)]
pub struct Chart {
    pub face: Face,
    pub tile: usize,
    pub target: Face,
    pub(crate) m: Mat,
    pub(crate) minv: Mat,
}

/// The piecewise-affine branched cover defined by a rule.
#[derive(Clone, Debug)]
pub struct SubdivisionMap {
    pub rule: SubdivisionRule,
    /// Charts indexed by `face * degree + tile`.
    pub charts: Vec<Chart>,
}

impl SubdivisionMap {
    pub fn new(rule: SubdivisionRule) -> Result<Self> {
        let mut charts = Vec::new();
        for face in [Face::Front, Face::Back] {
            for (t, tile) in rule.tiles.iter().enumerate() {
                let labels = [rule.labels[tile[0]], rule.labels[tile[1]], rule.labels[tile[2]]];
                let mut seen = [false; 3];
                for &l in &labels {
                    if l > 2 || seen[l] {
                        return Err(Error::InvalidRule(format!("tile {t} does not carry labels A, B, C once each")));
                    }
                    seen[l] = true;
                }
                let mut m: Mat = identity();
                for (pos, &v) in tile.iter().enumerate() {
                    for i in 0..3 {
                        m[i][labels[pos]] = rule.vertices[v][i].clone();
                    }
                }
                let minv = inverse(&m).ok_or_else(|| Error::InvalidRule(format!("tile {t} is degenerate")))?;
                let target = if face.sign() * parity(labels) > 0 { Face::Front } else { Face::Back };
                charts.push(Chart { face, tile: t, target, m, minv });
            }
        }
        let map = SubdivisionMap { rule, charts };
        map.validate()?;
        Ok(map)
    }

    pub fn get(name: RuleName) -> Self {
        Self::new(SubdivisionRule::get(name)).expect("built-in rules are valid")
    }

    pub fn degree(&self) -> usize {
        self.rule.degree()
    }

    pub fn chart(&self, face: Face, tile: usize) -> &Chart {
        &self.charts[face.index() * self.degree() + tile]
    }

    /// Checks the table: tiles are positively oriented and fill the face,
    /// neighbours map to opposite faces, and the charts agree on shared edges.
    pub fn validate(&self) -> Result<()> {
        let r = &self.rule;
        let mut area = BigRational::zero();
        for (t, tile) in r.tiles.iter().enumerate() {
            let m: Mat = std::array::from_fn(|i| std::array::from_fn(|j| r.vertices[tile[j]][i].clone()));
            let d = det(&m);
            if !d.is_positive() {
                return Err(Error::InvalidRule(format!("tile {t} is not counterclockwise")));
            }
            area += d;
        }
        if !area.is_one() {
            return Err(Error::InvalidRule("tiles do not cover the face exactly".into()));
        }
        let mut edges: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tile) in r.tiles.iter().enumerate() {
            for k in 0..3 {
                let (u, v) = (tile[k], tile[(k + 1) % 3]);
                edges.entry((u.min(v), u.max(v))).or_default().push(t);
            }
        }
        let half = BigRational::new(1.into(), 2.into());
        for face in [Face::Front, Face::Back] {
            for (&(u, v), ts) in &edges {
                if ts.len() == 2 {
                    let (c0, c1) = (self.chart(face, ts[0]), self.chart(face, ts[1]));
                    if c0.target == c1.target {
                        return Err(Error::InvalidRule(format!("tiles {} and {} fold onto the same face", ts[0], ts[1])));
                    }
                    let mid: Bary = std::array::from_fn(|i| (&r.vertices[u][i] + &r.vertices[v][i]) * &half);
                    for p in [&r.vertices[u], &r.vertices[v], &mid] {
                        let a = TilePoint::canonical(c0.target, mat_vec(&c0.minv, p));
                        let b = TilePoint::canonical(c1.target, mat_vec(&c1.minv, p));
                        if a != b {
                            return Err(Error::InvalidRule("charts disagree on a shared edge".into()));
                        }
                    }
                } else if ts.len() == 1 {
                    let on_boundary = (0..3).any(|k| r.vertices[u][k].is_zero() && r.vertices[v][k].is_zero());
                    if !on_boundary {
                        return Err(Error::InvalidRule("interior edge with a single tile".into()));
                    }
                } else {
                    return Err(Error::InvalidRule("edge shared by more than two tiles".into()));
                }
            }
        }
        let fronts = self.charts.iter().filter(|c| c.target == Face::Front).count();
        if fronts != self.degree() {
            return Err(Error::InvalidRule("front face is not covered degree-many times".into()));
        }
        Ok(())
    }

    /// Index of a 1-tile containing `p`, preferring the lowest index on ties.
    pub fn locate(&self, p: &TilePoint) -> usize {
        let face = p.face();
        for t in 0..self.degree() {
            let c = self.chart(face, t);
            let l = mat_vec(&c.minv, p.bary());
            if l.iter().all(|x| !x.is_negative()) {
                return face.index() * self.degree() + t;
            }
        }
        unreachable!("the tiles of a validated rule cover each face")
    }

    /// The map itself; exact on rational points.
    pub fn eval(&self, p: &TilePoint) -> TilePoint {
        let c = &self.charts[self.locate(p)];
        TilePoint::canonical(c.target, mat_vec(&c.minv, p.bary()))
    }

    /// The distinct points mapped to `x`, at most one per 1-tile.
    pub fn preimages(&self, x: &TilePoint) -> Vec<TilePoint> {
        let faces: &[Face] = if x.on_equator() { &[Face::Front, Face::Back] } else { std::slice::from_ref(&x.face) };
        let mut out: Vec<TilePoint> = Vec::new();
        for c in &self.charts {
            if faces.contains(&c.target) {
                out.push(TilePoint::canonical(c.face, mat_vec(&c.m, x.bary())));
            }
        }
        out.sort();
        out.dedup();
        out
    }

    /// Whether `p` lies in the open 1-tile with chart index `k`.
    pub fn in_tile_interior(&self, k: usize, p: &TilePoint) -> bool {
        let c = &self.charts[k];
        !p.on_equator() && p.face == c.face && mat_vec(&c.minv, p.bary()).iter().all(|x| x.is_positive())
    }

    /// Vertices of the 1-tiles, each once.
    pub fn vertices(&self) -> Vec<TilePoint> {
        let mut v: Vec<TilePoint> = Vec::new();
        for face in [Face::Front, Face::Back] {
            for x in &self.rule.vertices {
                v.push(TilePoint::canonical(face, x.clone()));
            }
        }
        v.sort();
        v.dedup();
        v
    }

    /// Number of 1-tiles containing `v`, halved; 1 at points that are not vertices.
    pub fn local_degree(&self, v: &TilePoint) -> usize {
        let n = self.incident_tiles(v);
        if n == 0 {
            1
        } else {
            n / 2
        }
    }

    fn incident_tiles(&self, v: &TilePoint) -> usize {
        let mut n = 0;
        for c in &self.charts {
            let tile = &self.rule.tiles[c.tile];
            if tile.iter().any(|&k| TilePoint::canonical(c.face, self.rule.vertices[k].clone()) == *v) {
                n += 1;
            }
        }
        n
    }

    /// Vertices with local degree above one.
    pub fn critical_points(&self) -> Vec<(TilePoint, usize)> {
        self.vertices().into_iter().map(|v| {
            let d = self.local_degree(&v);
            (v, d)
        }).filter(|(_, d)| *d > 1).collect()
    }

    /// Forward orbits of the critical points, which land among the corners.
    pub fn postcritical_set(&self) -> Vec<TilePoint> {
        let mut post: Vec<TilePoint> = Vec::new();
        let mut frontier: Vec<TilePoint> = self.critical_points().into_iter().map(|(c, _)| self.eval(&c)).collect();
        while let Some(p) = frontier.pop() {
            if !post.contains(&p) {
                frontier.push(self.eval(&p));
                post.push(p);
            }
        }
        post.sort();
        post
    }

    /// Vertices fixed by the map.
    pub fn fixed_vertices(&self) -> Vec<TilePoint> {
        self.vertices().into_iter().filter(|v| self.eval(v) == *v).collect()
    }
}
