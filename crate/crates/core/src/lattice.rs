//! Finite windows of the integer lattice `Z^N` with the standard generators
//! `{±e_1, …, ±e_N}`.
//!
//! Word distance for these generators is the L1 distance. Windows are either
//! boxes `[-R, R]^N` (the default) or word balls `B_R(0)`; sites are indexed
//! row-major over the bounding box, and every field defined on a window is
//! extended by zero outside it.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A lattice point, stored as its integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site(Vec<i32>);

impl Site {
    pub fn new(coords: impl Into<Vec<i32>>) -> Self {
        Site(coords.into())
    }

    pub fn origin(dim: usize) -> Self {
        Site(vec![0; dim])
    }

    /// The generator `+e_axis` (or `-e_axis` when `negative`).
    pub fn unit(dim: usize, axis: usize, negative: bool) -> Self {
        let mut c = vec![0; dim];
        c[axis] = if negative { -1 } else { 1 };
        Site(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i32] {
        &self.0
    }

    pub fn l1_norm(&self) -> u64 {
        self.0.iter().map(|c| c.unsigned_abs() as u64).sum()
    }

    pub fn offset(&self, by: &[i32]) -> Site {
        Site(self.0.iter().zip(by).map(|(a, b)| a + b).collect())
    }

    /// The `2N` lattice neighbours `x ± e_i`.
    pub fn neighbors(&self) -> impl Iterator<Item = Site> + '_ {
        (0..self.dim()).flat_map(move |axis| {
            [1, -1].into_iter().map(move |step| {
                let mut c = self.0.clone();
                c[axis] += step;
                Site(c)
            })
        })
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<i32>> for Site {
    fn from(v: Vec<i32>) -> Self {
        Site(v)
    }
}

impl From<&[i32]> for Site {
    fn from(v: &[i32]) -> Self {
        Site(v.to_vec())
    }
}

/// Word metric for the standard generating set, i.e. the L1 distance.
pub fn word_distance(x: &[i32], y: &[i32]) -> Result<u64> {
    if x.len() != y.len() {
        return Err(Error::InvalidInput(format!(
            "dimension mismatch: {} vs {}",
            x.len(),
            y.len()
        )));
    }
    Ok(l1(x, y))
}

#[inline]
pub(crate) fn l1(x: &[i32], y: &[i32]) -> u64 {
    x.iter().zip(y).map(|(a, b)| (a - b).unsigned_abs() as u64).sum()
}

/// A duplicate-free set of lattice sites of a common dimension.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SiteSet {
    sites: BTreeSet<Site>,
}

impl SiteSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, site: Site) -> bool {
        self.sites.insert(site)
    }

    pub fn contains(&self, site: &Site) -> bool {
        self.sites.contains(site)
    }

    pub fn contains_coords(&self, coords: &[i32]) -> bool {
        // BTreeSet<Site> cannot be queried by slice without allocating.
        self.sites.contains(&Site::from(coords))
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Site> {
        self.sites.iter()
    }

    pub fn dim(&self) -> Option<usize> {
        self.sites.iter().next().map(Site::dim)
    }

    pub fn union(&self, other: &SiteSet) -> SiteSet {
        SiteSet {
            sites: self.sites.union(&other.sites).cloned().collect(),
        }
    }

    pub fn is_disjoint(&self, other: &SiteSet) -> bool {
        self.sites.is_disjoint(&other.sites)
    }

    pub fn is_subset(&self, other: &SiteSet) -> bool {
        self.sites.is_subset(&other.sites)
    }

    /// Word distance from `x` to the nearest member; `None` for an empty set.
    pub fn distance_to(&self, x: &[i32]) -> Option<u64> {
        self.sites.iter().map(|s| l1(s.coords(), x)).min()
    }

    /// Largest coordinate magnitude over all members.
    pub fn sup_extent(&self) -> i32 {
        self.sites
            .iter()
            .flat_map(|s| s.coords().iter().map(|c| c.abs()))
            .max()
            .unwrap_or(0)
    }

    /// Connectedness in the Cayley graph.
    pub fn is_connected(&self) -> bool {
        let Some(start) = self.sites.iter().next() else {
            return true;
        };
        let mut seen = BTreeSet::new();
        let mut stack = vec![start.clone()];
        seen.insert(start.clone());
        while let Some(x) = stack.pop() {
            for y in x.neighbors() {
                if self.sites.contains(&y) && seen.insert(y.clone()) {
                    stack.push(y);
                }
            }
        }
        seen.len() == self.sites.len()
    }
}

impl FromIterator<Site> for SiteSet {
    fn from_iter<I: IntoIterator<Item = Site>>(iter: I) -> Self {
        SiteSet {
            sites: iter.into_iter().collect(),
        }
    }
}

impl<'a> IntoIterator for &'a SiteSet {
    type Item = &'a Site;
    type IntoIter = std::collections::btree_set::Iter<'a, Site>;

    fn into_iter(self) -> Self::IntoIter {
        self.sites.iter()
    }
}

/// Calls `visit` on every point of the box `[-r, r]^dim`, row-major.
fn for_each_in_box(dim: usize, r: i32, mut visit: impl FnMut(&[i32])) {
    let mut c = vec![-r; dim];
    loop {
        visit(&c);
        let mut axis = dim;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            if c[axis] < r {
                c[axis] += 1;
                break;
            }
            c[axis] = -r;
        }
    }
}

/// The closed word ball `{x : d(x, center) ≤ r}`.
pub fn ball(center: &Site, r: i64) -> Result<SiteSet> {
    if r < 0 {
        return Err(Error::InvalidInput(format!("ball radius {r} is negative")));
    }
    let r = i32::try_from(r).map_err(|_| Error::InvalidInput("ball radius too large".into()))?;
    let mut out = SiteSet::new();
    for_each_in_box(center.dim(), r, |off| {
        if off.iter().map(|c| c.unsigned_abs() as u64).sum::<u64>() <= r as u64 {
            out.insert(center.offset(off));
        }
    });
    Ok(out)
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Volume `β(r) = |B_r(0)|` of the word ball in `Z^dim`.
///
/// Uses the closed form `Σ_k 2^k C(dim, k) C(r, k)`: choose which `k`
/// coordinates are nonzero, their signs, and a composition of at most `r`
/// into `k` positive parts.
pub fn growth_function(r: i64, dim: usize) -> Result<u128> {
    if r < 1 {
        return Err(Error::InvalidInput(format!("growth radius {r} must be ≥ 1")));
    }
    if dim == 0 {
        return Err(Error::InvalidInput("dimension must be ≥ 1".into()));
    }
    let (r, n) = (r as u64, dim as u64);
    Ok((0..=n.min(r))
        .map(|k| (1u128 << k) * binomial(n, k) * binomial(r, k))
        .sum())
}

/// Measured constants `(C₁, C₂)` with `C₁ r^N ≤ β(r) ≤ C₂ r^N` for `1 ≤ r ≤ r_max`.
pub fn growth_constants(dim: usize, r_max: i64) -> Result<(f64, f64)> {
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for r in 1..=r_max {
        let ratio = growth_function(r, dim)? as f64 / (r as f64).powi(dim as i32);
        lo = lo.min(ratio);
        hi = hi.max(ratio);
    }
    Ok((lo, hi))
}

/// Sites outside `region` adjacent to some member of it.
pub fn vertex_boundary(region: &SiteSet) -> Result<SiteSet> {
    if region.is_empty() {
        return Err(Error::InvalidInput("vertex boundary of an empty region".into()));
    }
    Ok(region
        .iter()
        .flat_map(|x| x.neighbors().collect::<Vec<_>>())
        .filter(|y| !region.contains(y))
        .collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WindowShape {
    /// `[-R, R]^N`
    Box,
    /// `B_R(0)` in the word metric.
    WordBall,
}

impl fmt::Display for WindowShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            WindowShape::Box => "box",
            WindowShape::WordBall => "word-ball",
        })
    }
}

impl std::str::FromStr for WindowShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "box" => Ok(WindowShape::Box),
            "word-ball" | "ball" => Ok(WindowShape::WordBall),
            other => Err(Error::InvalidInput(format!("unknown window shape {other:?}"))),
        }
    }
}

const ABSENT: u32 = u32::MAX;

/// A finite computational window centred at the origin.
#[derive(Clone, Debug)]
pub struct LatticeWindow {
    dim: usize,
    radius: i32,
    shape: WindowShape,
    /// Flattened coordinates, `dim` per site, row-major over the bounding box.
    coords: Vec<i32>,
    /// Dense lookup over the bounding box `[-R, R]^N`.
    lookup: Vec<u32>,
    strides: Vec<usize>,
}

impl PartialEq for LatticeWindow {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.radius == other.radius && self.shape == other.shape
    }
}

impl Eq for LatticeWindow {}

impl LatticeWindow {
    pub fn new(dim: usize, radius: i64, shape: WindowShape) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be ≥ 1".into()));
        }
        if radius < 1 {
            return Err(Error::InvalidInput(format!("window radius {radius} must be ≥ 1")));
        }
        let radius = i32::try_from(radius)
            .map_err(|_| Error::InvalidInput("window radius too large".into()))?;
        let side = (2 * radius + 1) as usize;
        let volume = side
            .checked_pow(dim as u32)
            .filter(|v| *v < ABSENT as usize)
            .ok_or_else(|| Error::InvalidInput("window too large".into()))?;
        let mut strides = vec![1usize; dim];
        for axis in (0..dim.saturating_sub(1)).rev() {
            strides[axis] = strides[axis + 1] * side;
        }
        let mut coords = Vec::new();
        let mut lookup = vec![ABSENT; volume];
        let mut slot = 0usize;
        let mut count = 0u32;
        for_each_in_box(dim, radius, |c| {
            let inside = match shape {
                WindowShape::Box => true,
                WindowShape::WordBall => {
                    c.iter().map(|x| x.unsigned_abs() as i64).sum::<i64>() <= radius as i64
                }
            };
            if inside {
                lookup[slot] = count;
                coords.extend_from_slice(c);
                count += 1;
            }
            slot += 1;
        });
        Ok(LatticeWindow {
            dim,
            radius,
            shape,
            coords,
            lookup,
            strides,
        })
    }

    pub fn boxed(dim: usize, radius: i64) -> Result<Self> {
        Self::new(dim, radius, WindowShape::Box)
    }

    pub fn word_ball(dim: usize, radius: i64) -> Result<Self> {
        Self::new(dim, radius, WindowShape::WordBall)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> i32 {
        self.radius
    }

    pub fn shape(&self) -> WindowShape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn site(&self, index: usize) -> &[i32] {
        &self.coords[index * self.dim..(index + 1) * self.dim]
    }

    pub fn sites(&self) -> impl ExactSizeIterator<Item = &[i32]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    fn slot(&self, coords: &[i32]) -> Option<usize> {
        let mut slot = 0usize;
        for (c, s) in coords.iter().zip(&self.strides) {
            if c.abs() > self.radius {
                return None;
            }
            slot += (c + self.radius) as usize * s;
        }
        Some(slot)
    }

    pub fn index_of(&self, coords: &[i32]) -> Option<usize> {
        if coords.len() != self.dim {
            return None;
        }
        self.slot(coords)
            .map(|s| self.lookup[s])
            .filter(|&i| i != ABSENT)
            .map(|i| i as usize)
    }

    pub fn contains(&self, coords: &[i32]) -> bool {
        self.index_of(coords).is_some()
    }

    /// Index of `site + step·e_axis`, or `None` if that neighbour is exterior.
    #[inline]
    pub fn neighbor(&self, index: usize, axis: usize, step: i32) -> Option<usize> {
        let c = self.site(index);
        let moved = c[axis] + step;
        if moved.abs() > self.radius {
            return None;
        }
        let mut slot = 0usize;
        for (a, (x, s)) in c.iter().zip(&self.strides).enumerate() {
            let x = if a == axis { moved } else { *x };
            slot += (x + self.radius) as usize * s;
        }
        let i = self.lookup[slot];
        (i != ABSENT).then_some(i as usize)
    }

    /// The window of the same shape with radius enlarged by `by`.
    pub fn grow(&self, by: i64) -> Result<Self> {
        Self::new(self.dim, self.radius as i64 + by, self.shape)
    }

    /// Whether every site of `self` also lies in `other`.
    pub fn is_subwindow_of(&self, other: &LatticeWindow) -> bool {
        self.dim == other.dim && self.sites().all(|c| other.contains(c))
    }

    /// For each site of `self`, its index in `larger` (`None` when absent).
    pub fn embedding_into(&self, larger: &LatticeWindow) -> Vec<Option<usize>> {
        self.sites().map(|c| larger.index_of(c)).collect()
    }

    pub fn to_site_set(&self) -> SiteSet {
        self.sites().map(Site::from).collect()
    }

    /// Word distance from a site to the exterior of the window.
    pub fn depth(&self, coords: &[i32]) -> i64 {
        match self.shape {
            WindowShape::Box => coords
                .iter()
                .map(|c| (self.radius - c.abs()) as i64 + 1)
                .min()
                .unwrap_or(0),
            WindowShape::WordBall => {
                self.radius as i64 + 1 - coords.iter().map(|c| c.abs() as i64).sum::<i64>()
            }
        }
    }

    /// Indices of sites at word distance ≥ `margin` from the exterior.
    pub fn interior(&self, margin: i64) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.depth(self.site(i)) >= margin)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_ball_size(dim: usize, r: i32) -> usize {
        let mut n = 0;
        for_each_in_box(dim, r, |c| {
            if c.iter().map(|x| x.abs()).sum::<i32>() <= r {
                n += 1;
            }
        });
        n
    }

    #[test]
    fn word_distance_examples() {
        assert_eq!(word_distance(&[0, 0], &[0, 0]).unwrap(), 0);
        assert_eq!(word_distance(&[0, 0], &[2, -3]).unwrap(), 5);
        assert!(matches!(
            word_distance(&[0, 0], &[1]),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn ball_sizes() {
        let e = Site::origin(2);
        assert_eq!(ball(&e, 0).unwrap().len(), 1);
        assert!(ball(&e, 0).unwrap().contains(&e));
        assert_eq!(ball(&e, 1).unwrap().len(), 5);
        assert_eq!(ball(&e, 2).unwrap().len(), brute_ball_size(2, 2));
        assert_eq!(ball(&e, 2).unwrap().len(), 13);
        assert!(ball(&e, -1).is_err());
        let shifted = ball(&Site::new(vec![7, -3]), 3).unwrap();
        assert_eq!(shifted.len(), ball(&e, 3).unwrap().len());
    }

    #[test]
    fn growth_matches_enumeration() {
        assert_eq!(growth_function(3, 1).unwrap(), 7);
        assert_eq!(growth_function(2, 2).unwrap(), 13);
        for dim in 1..=3 {
            for r in 1..=8 {
                assert_eq!(
                    growth_function(r, dim).unwrap() as usize,
                    brute_ball_size(dim, r as i32),
                    "dim {dim} r {r}"
                );
            }
        }
        assert!(growth_function(0, 2).is_err());
    }

    #[test]
    fn growth_ratio_bracket_in_two_dimensions() {
        // β(r) = 2r² + 2r + 1 in Z², so β(r)/r² decreases from 5 toward 2.
        for r in 1..=50i64 {
            let ratio = growth_function(r, 2).unwrap() as f64 / (r * r) as f64;
            assert_eq!(growth_function(r, 2).unwrap(), (2 * r * r + 2 * r + 1) as u128);
            if r >= 2 {
                assert!((1.0..=3.25).contains(&ratio), "r = {r}: {ratio}");
            }
        }
        let (c1, c2) = growth_constants(2, 50).unwrap();
        assert!(c1 >= 2.0 && c2 <= 5.0, "{c1} {c2}");
    }

    #[test]
    fn boundary_of_single_site_and_ball() {
        let e = Site::origin(2);
        let single: SiteSet = std::iter::once(e.clone()).collect();
        let b = vertex_boundary(&single).unwrap();
        assert_eq!(b.len(), 4);
        assert!(b.iter().all(|y| y.l1_norm() == 1));

        let b2 = ball(&e, 2).unwrap();
        let boundary = vertex_boundary(&b2).unwrap();
        assert_eq!(boundary.len(), 12);
        assert!(boundary.iter().all(|y| y.l1_norm() == 3));
        assert!(boundary.is_disjoint(&b2));
        assert!(vertex_boundary(&SiteSet::new()).is_err());
    }

    #[test]
    fn window_indexing_is_a_bijection() {
        for shape in [WindowShape::Box, WindowShape::WordBall] {
            let w = LatticeWindow::new(2, 4, shape).unwrap();
            for (i, c) in w.sites().enumerate() {
                assert_eq!(w.index_of(c), Some(i));
            }
            for i in 0..w.len() {
                for axis in 0..2 {
                    for step in [-1, 1] {
                        let mut c = w.site(i).to_vec();
                        c[axis] += step;
                        assert_eq!(w.neighbor(i, axis, step), w.index_of(&c));
                    }
                }
            }
        }
        assert_eq!(LatticeWindow::word_ball(2, 4).unwrap().len(), 41);
        assert_eq!(LatticeWindow::boxed(3, 2).unwrap().len(), 125);
    }

    #[test]
    fn box_index_is_row_major() {
        let w = LatticeWindow::boxed(2, 1).unwrap();
        assert_eq!(w.site(0), &[-1, -1]);
        assert_eq!(w.site(1), &[-1, 0]);
        assert_eq!(w.site(3), &[0, -1]);
        assert_eq!(w.index_of(&[0, 0]), Some(4));
        assert_eq!(w.index_of(&[2, 0]), None);
    }

    #[test]
    fn connectivity() {
        let e = Site::origin(2);
        assert!(ball(&e, 3).unwrap().is_connected());
        let split: SiteSet = [Site::new(vec![0, 0]), Site::new(vec![2, 0])]
            .into_iter()
            .collect();
        assert!(!split.is_connected());
    }
}
