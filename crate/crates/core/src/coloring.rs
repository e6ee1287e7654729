//! Colorings of a fixed environment.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::VoronoiComplex;
use crate::stream::SeedPath;

/// Default cap on the number of cells recolored exhaustively.
pub const K_MAX: usize = 20;

/// One sign per cell: `+1` black, `-1` white.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Coloring {
    signs: Vec<i8>,
    p: f64,
    stream: Option<SeedPath>,
}

pub fn color(complex: &VoronoiComplex, p: f64, stream: &SeedPath) -> Result<Coloring> {
    Coloring::sample(complex.len(), p, stream)
}

impl Coloring {
    /// Independent signs for `n` cells, black with probability `p`.
    pub fn sample(n: usize, p: f64, stream: &SeedPath) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param("p", format!("must lie in [0, 1], got {p}")));
        }
        let mut rng = stream.rng();
        let signs = if p == 0.5 {
            let mut s = Vec::with_capacity(n);
            while s.len() < n {
                let bits: u64 = rng.random();
                let take = (n - s.len()).min(64);
                s.extend((0..take).map(|k| if bits >> k & 1 == 1 { 1i8 } else { -1 }));
            }
            s
        } else {
            (0..n).map(|_| if rng.random_bool(p) { 1i8 } else { -1 }).collect()
        };
        Ok(Self {
            signs,
            p,
            stream: Some(*stream),
        })
    }

    /// Every cell the same color.
    pub fn constant(n: usize, black: bool) -> Self {
        Self {
            signs: vec![if black { 1 } else { -1 }; n],
            p: if black { 1.0 } else { 0.0 },
            stream: None,
        }
    }

    pub fn from_signs(signs: Vec<i8>, p: f64) -> Result<Self> {
        if signs.iter().any(|&s| s != 1 && s != -1) {
            return Err(Error::param("signs", "entries must be +1 or -1"));
        }
        Ok(Self { signs, p, stream: None })
    }

    pub fn len(&self) -> usize {
        self.signs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.signs.is_empty()
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn stream(&self) -> Option<SeedPath> {
        self.stream
    }

    pub fn sign(&self, cell: usize) -> i8 {
        self.signs[cell]
    }

    pub fn is_black(&self, cell: usize) -> bool {
        self.signs[cell] > 0
    }

    pub fn set(&mut self, cell: usize, black: bool) {
        self.signs[cell] = if black { 1 } else { -1 };
    }

    /// Copy with the sign at `cell` negated.
    pub fn flip(&self, cell: usize) -> Result<Coloring> {
        if cell >= self.len() {
            return Err(Error::Index { index: cell, len: self.len() });
        }
        let mut c = self.clone();
        c.signs[cell] = -c.signs[cell];
        Ok(c)
    }

    /// Swap black and white everywhere.
    pub fn inverted(&self) -> Coloring {
        Self {
            signs: self.signs.iter().map(|s| -s).collect(),
            p: 1.0 - self.p,
            stream: self.stream,
        }
    }
}

/// All `2^k` recolorings of `free_cells`, other cells fixed to `base`.
/// Assignment `mask` paints free cell `free_cells[b]` black iff bit `b` is set.
#[derive(Clone, Debug)]
pub struct ColoringEnumeration {
    base: Coloring,
    free_cells: Vec<usize>,
    cursor: u64,
}

pub fn enumerate_recolorings(coloring: &Coloring, cells: &[usize], k_max: usize) -> Result<ColoringEnumeration> {
    let mut free = cells.to_vec();
    free.sort_unstable();
    free.dedup();
    if let Some(&bad) = free.iter().find(|&&c| c >= coloring.len()) {
        return Err(Error::Index { index: bad, len: coloring.len() });
    }
    if free.len() > k_max {
        return Err(Error::Capacity { size: free.len(), limit: k_max });
    }
    Ok(ColoringEnumeration {
        base: coloring.clone(),
        free_cells: free,
        cursor: 0,
    })
}

impl ColoringEnumeration {
    pub fn free_cells(&self) -> &[usize] {
        &self.free_cells
    }

    pub fn size(&self) -> u64 {
        1u64 << self.free_cells.len()
    }

    pub fn base(&self) -> &Coloring {
        &self.base
    }

    /// Write assignment `mask` into `out`, which must agree with the base off
    /// the free cells.
    pub fn assign(&self, mask: u64, out: &mut Coloring) {
        for (b, &c) in self.free_cells.iter().enumerate() {
            out.set(c, mask >> b & 1 == 1);
        }
    }
}

impl Iterator for ColoringEnumeration {
    type Item = Coloring;

    fn next(&mut self) -> Option<Coloring> {
        if self.cursor >= 1u64 << self.free_cells.len() {
            return None;
        }
        let mut c = self.base.clone();
        self.assign(self.cursor, &mut c);
        self.cursor += 1;
        Some(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn extreme_parameters() {
        let s = SeedPath::root(1);
        assert!(Coloring::sample(100, 1.0, &s).unwrap().signs().iter().all(|&x| x == 1));
        assert!(Coloring::sample(100, 0.0, &s).unwrap().signs().iter().all(|&x| x == -1));
        assert!(Coloring::sample(10, 1.5, &s).is_err());
        assert!(Coloring::sample(10, -0.1, &s).is_err());
    }

    #[test]
    fn half_fraction_concentrates() {
        let n = 100_000;
        let c = Coloring::sample(n, 0.5, &SeedPath::root(2)).unwrap();
        let frac = c.signs().iter().filter(|&&x| x == 1).count() as f64 / n as f64;
        assert!((frac - 0.5).abs() <= 3.0 * 0.5 / (n as f64).sqrt());
        let c = Coloring::sample(n, 0.3, &SeedPath::root(2)).unwrap();
        let frac = c.signs().iter().filter(|&&x| x == 1).count() as f64 / n as f64;
        assert!((frac - 0.3).abs() <= 3.0 * (0.21f64 / n as f64).sqrt());
    }

    #[test]
    fn regenerates_exactly() {
        let s = SeedPath::root(4).child(9);
        assert_eq!(Coloring::sample(777, 0.5, &s).unwrap(), Coloring::sample(777, 0.5, &s).unwrap());
    }

    #[test]
    fn flip_contract() {
        let c = Coloring::sample(50, 0.4, &SeedPath::root(5)).unwrap();
        let f = c.flip(7).unwrap();
        assert_eq!(f.sign(7), -c.sign(7));
        assert!((0..50).filter(|&i| i != 7).all(|i| f.sign(i) == c.sign(i)));
        assert_eq!(f.p(), c.p());
        assert_eq!(f.stream(), c.stream());
        assert_eq!(f.flip(7).unwrap(), c);
        assert!(matches!(c.flip(50), Err(Error::Index { index: 50, len: 50 })));
    }

    #[test]
    fn enumeration_counts() {
        let c = Coloring::sample(10, 0.5, &SeedPath::root(6)).unwrap();
        let all: Vec<_> = enumerate_recolorings(&c, &[], K_MAX).unwrap().collect();
        assert_eq!(all, vec![c.clone()]);
        let cells = [1, 4, 8];
        let all: Vec<_> = enumerate_recolorings(&c, &cells, K_MAX).unwrap().collect();
        assert_eq!(all.len(), 8);
        let distinct: HashSet<Vec<i8>> = all.iter().map(|x| x.signs().to_vec()).collect();
        assert_eq!(distinct.len(), 8);
        for x in &all {
            assert!((0..10).filter(|i| !cells.contains(i)).all(|i| x.sign(i) == c.sign(i)));
        }
    }

    #[test]
    fn enumeration_capacity() {
        let c = Coloring::constant(30, true);
        let cells: Vec<usize> = (0..21).collect();
        assert!(matches!(
            enumerate_recolorings(&c, &cells, K_MAX),
            Err(Error::Capacity { size: 21, limit: 20 })
        ));
        assert!(enumerate_recolorings(&c, &cells[..20], K_MAX).is_ok());
    }
}
