//! Index algebra for the transmit-direction lattice `{0, .., bound-1}^(K*K)`.
//!
//! Every coded-input label, decoding-matrix column, and time-slot row is
//! addressed by a lattice point. The lexicographic enumeration order fixed
//! here (last coordinate varies fastest) is the one flat-index convention
//! used everywhere, so encoder and decoder always agree on column ordering.
//!
//! Coordinates are laid out row-major by user then node: the coordinate for
//! user `k` and node `m` sits at position `k * K + m`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default cap on lattice cardinality; guards accidental blowups at K >= 4.
pub const DEFAULT_LATTICE_CAP: u64 = 1_000_000;

/// One point of the direction lattice: a `K*K`-tuple of exponents, each in
/// `0..bound`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirectionIndex {
    coords: Vec<u32>,
    bound: u32,
}

/// Result of shifting a direction one step down in a single coordinate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Shift {
    /// The shifted direction lies inside the smaller lattice.
    Within(DirectionIndex),
    /// The shift left the lattice (a coordinate hit -1, or another
    /// coordinate equals the smaller bound); the labelled input reads as
    /// the zero vector.
    OutOfLattice,
}

impl DirectionIndex {
    pub fn new(coords: Vec<u32>, bound: u32) -> Self {
        assert!(bound >= 1, "lattice bound must be at least 1");
        let users = (coords.len() as f64).sqrt().round() as usize;
        assert_eq!(users * users, coords.len(), "coordinate count must be a perfect square");
        assert!(coords.iter().all(|c| *c < bound), "coordinates must lie below the bound");
        Self { coords, bound }
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    /// Number of users K, with K*K coordinates.
    pub fn users(&self) -> usize {
        (self.coords.len() as f64).sqrt().round() as usize
    }

    /// Exponent for the (user `k`, node `m`) coordinate, zero-based.
    pub fn coord(&self, user: usize, node: usize) -> u32 {
        let k = self.users();
        assert!(user < k && node < k, "coordinate out of range");
        self.coords[user * k + node]
    }

    /// Rank of this point in the lexicographic enumeration of its lattice.
    pub fn flat_index(&self) -> usize {
        let mut index = 0usize;
        for &c in &self.coords {
            index = index * self.bound as usize + c as usize;
        }
        index
    }

    /// True when every coordinate lies below `bound`.
    pub fn fits_bound(&self, bound: u32) -> bool {
        self.coords.iter().all(|c| *c < bound)
    }
}

/// `bound^(K*K)` with overflow and cap checks.
pub fn lattice_size_capped(users: usize, bound: u32, cap: u64) -> Result<usize> {
    let mut size: u128 = 1;
    for _ in 0..users * users {
        size = size.saturating_mul(bound as u128);
        if size > cap as u128 {
            return Err(Error::SizeOverflow { requested: size, cap });
        }
    }
    Ok(size as usize)
}

pub fn lattice_size(users: usize, bound: u32) -> Result<usize> {
    lattice_size_capped(users, bound, DEFAULT_LATTICE_CAP)
}

/// All `bound^(K*K)` directions in lexicographic order (last coordinate
/// fastest). The position of each element equals its `flat_index`.
pub fn enumerate_lattice(users: usize, bound: u32) -> Result<Vec<DirectionIndex>> {
    enumerate_lattice_capped(users, bound, DEFAULT_LATTICE_CAP)
}

pub fn enumerate_lattice_capped(users: usize, bound: u32, cap: u64) -> Result<Vec<DirectionIndex>> {
    assert!(users >= 1 && bound >= 1, "users and bound must be at least 1");
    let len = users * users;
    let size = lattice_size_capped(users, bound, cap)?;
    let mut out = Vec::with_capacity(size);
    let mut coords = vec![0u32; len];
    loop {
        out.push(DirectionIndex { coords: coords.clone(), bound });
        // Odometer increment, last coordinate fastest.
        let mut pos = len;
        loop {
            if pos == 0 {
                return Ok(out);
            }
            pos -= 1;
            coords[pos] += 1;
            if coords[pos] < bound {
                break;
            }
            coords[pos] = 0;
        }
    }
}

/// Shifts direction `p` (drawn from the bound-(N+1) lattice) one step down
/// in the (user, node) coordinate, landing in the bound-N lattice.
///
/// Returns [`Shift::OutOfLattice`] when the shifted coordinate would reach
/// -1 or any other coordinate equals or exceeds N; inputs labelled by such
/// directions read as zero.
pub fn decrement(p: &DirectionIndex, user: usize, node: usize) -> Shift {
    debug_assert!(p.bound >= 2, "decrement expects a bound of at least 2");
    let inner_bound = p.bound - 1;
    let k = p.users();
    assert!(user < k && node < k, "coordinate out of range");
    let pos = user * k + node;
    if p.coords[pos] == 0 {
        return Shift::OutOfLattice;
    }
    let mut coords = p.coords.clone();
    coords[pos] -= 1;
    if coords.iter().any(|c| *c >= inner_bound) {
        return Shift::OutOfLattice;
    }
    Shift::Within(DirectionIndex { coords, bound: inner_bound })
}
