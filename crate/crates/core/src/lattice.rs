//! Hypercubic lattice geometry: sites, bonds, plaquettes, closed-form counts
//! and the enhanced temporal gauge.
//!
//! Sites carry coordinates `1..=L` in each direction, direction 0 being time.
//! Linear site indices use a mixed-radix encoding with the time coordinate
//! varying fastest. Free bonds are enumerated first (site order, then
//! direction), followed by the wrapping bonds of a periodic lattice, so a free
//! bond has the same index under both boundary conditions.

use std::fmt;

use petgraph::unionfind::UnionFind;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Free,
    Periodic,
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoundaryCondition::Free => write!(f, "free"),
            BoundaryCondition::Periodic => write!(f, "periodic"),
        }
    }
}

impl std::str::FromStr for BoundaryCondition {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "free" => Ok(BoundaryCondition::Free),
            "periodic" => Ok(BoundaryCondition::Periodic),
            other => invalid(format!("unknown boundary condition '{other}'")),
        }
    }
}

/// Lattice coordinates, `1..=L` per direction; entries beyond `d` are unused.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Site {
    coords: [usize; MAX_DIM],
    d: usize,
}

impl Site {
    pub fn new(coords: &[usize]) -> Self {
        assert!(coords.len() <= MAX_DIM);
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Site { coords: c, d: coords.len() }
    }

    pub fn coords(&self) -> &[usize] {
        &self.coords[..self.d]
    }

    pub fn coord(&self, mu: usize) -> usize {
        self.coords[mu]
    }
}

/// `b_mu(x)`: the bond leaving `origin` in direction `direction`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub origin: Site,
    pub direction: usize,
    /// Extra bond of a periodic lattice, from coordinate `L` back to `1`.
    pub wraps: bool,
}

/// A bond as it appears along a plaquette boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BondRef {
    pub index: usize,
    /// Traversed against its orientation (the variable enters as `U^dagger`).
    pub reversed: bool,
}

/// `p_{mu nu}(x)` with `mu < nu`; bonds in holonomy order
/// `b_mu(x), b_nu(x + e_mu), b_mu(x + e_nu)^dagger, b_nu(x)^dagger`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Plaquette {
    pub origin: Site,
    pub plane: (usize, usize),
    pub bonds: [BondRef; 4],
}

impl Plaquette {
    /// True if any constituent bond is an extra (wrapping) bond.
    pub fn has_wrapping_bond(&self, lattice: &Lattice) -> bool {
        self.bonds.iter().any(|b| lattice.bonds()[b.index].wraps)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "LatticeSpec", into = "LatticeSpec")]
pub struct Lattice {
    d: usize,
    l: usize,
    a: f64,
    bc: BoundaryCondition,
    bonds: Vec<Bond>,
    bond_at: Vec<Option<usize>>,
    plaquettes: Vec<Plaquette>,
}

/// The serialized form of a lattice: `d`, `L`, `a`, `bc`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub d: usize,
    #[serde(rename = "L")]
    pub l: usize,
    pub a: f64,
    pub bc: BoundaryCondition,
}

impl TryFrom<LatticeSpec> for Lattice {
    type Error = crate::Error;

    fn try_from(s: LatticeSpec) -> Result<Self> {
        build_lattice(s.d, s.l, s.a, s.bc)
    }
}

impl From<Lattice> for LatticeSpec {
    fn from(l: Lattice) -> Self {
        l.spec()
    }
}

/// Closed-form counts for a lattice; all fields are exact integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeCounts {
    /// `L^d`
    pub sites: usize,
    /// `d (L-1) L^{d-1}`
    pub free_bonds: usize,
    /// `d L^{d-1}` for periodic lattices, zero for free ones.
    pub extra_bonds: usize,
    /// Plaquettes present under the lattice's boundary condition.
    pub plaquettes: usize,
    /// Free bonds left after the enhanced temporal gauge.
    pub retained_bonds: usize,
}

pub fn build_lattice(d: usize, l: usize, a: f64, bc: BoundaryCondition) -> Result<Lattice> {
    if !(2..=MAX_DIM).contains(&d) {
        return invalid(format!("dimension d = {d} must be 2, 3 or 4"));
    }
    if l < 2 {
        return invalid(format!("L = {l} must be at least 2"));
    }
    if !(a > 0.0 && a <= 1.0) {
        return invalid(format!("lattice spacing a = {a} must lie in (0, 1]"));
    }
    let n_sites = l.pow(d as u32);
    let mut lat = Lattice {
        d,
        l,
        a,
        bc,
        bonds: Vec::new(),
        bond_at: vec![None; n_sites * d],
        plaquettes: Vec::new(),
    };
    for s in 0..n_sites {
        let site = lat.site(s);
        for mu in 0..d {
            if site.coord(mu) < l {
                lat.bond_at[s * d + mu] = Some(lat.bonds.len());
                lat.bonds.push(Bond { origin: site, direction: mu, wraps: false });
            }
        }
    }
    if bc == BoundaryCondition::Periodic {
        for s in 0..n_sites {
            let site = lat.site(s);
            for mu in 0..d {
                if site.coord(mu) == l {
                    lat.bond_at[s * d + mu] = Some(lat.bonds.len());
                    lat.bonds.push(Bond { origin: site, direction: mu, wraps: true });
                }
            }
        }
    }
    for s in 0..n_sites {
        for mu in 0..d {
            for nu in (mu + 1)..d {
                if let Some(p) = lat.make_plaquette(s, mu, nu) {
                    lat.plaquettes.push(p);
                }
            }
        }
    }
    Ok(lat)
}

impl Lattice {
    pub fn d(&self) -> usize {
        self.d
    }

    /// Sites per side.
    pub fn l(&self) -> usize {
        self.l
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn bc(&self) -> BoundaryCondition {
        self.bc
    }

    pub fn spec(&self) -> LatticeSpec {
        LatticeSpec { d: self.d, l: self.l, a: self.a, bc: self.bc }
    }

    pub fn n_sites(&self) -> usize {
        self.l.pow(self.d as u32)
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn plaquettes(&self) -> &[Plaquette] {
        &self.plaquettes
    }

    /// Site with linear index `idx` (time coordinate fastest).
    pub fn site(&self, idx: usize) -> Site {
        let mut c = [0; MAX_DIM];
        let mut r = idx;
        for slot in c.iter_mut().take(self.d) {
            *slot = r % self.l + 1;
            r /= self.l;
        }
        Site { coords: c, d: self.d }
    }

    pub fn site_index(&self, site: &Site) -> usize {
        (0..self.d).rev().fold(0, |acc, mu| acc * self.l + (site.coord(mu) - 1))
    }

    /// `x + e_mu`, or `None` past the boundary of a free lattice.
    pub fn neighbor(&self, site: &Site, mu: usize) -> Option<Site> {
        let mut s = *site;
        if s.coords[mu] < self.l {
            s.coords[mu] += 1;
            Some(s)
        } else if self.bc == BoundaryCondition::Periodic {
            s.coords[mu] = 1;
            Some(s)
        } else {
            None
        }
    }

    /// Index of `b_mu(x)` if that bond exists.
    pub fn bond_index(&self, site: &Site, mu: usize) -> Option<usize> {
        self.bond_at[self.site_index(site) * self.d + mu]
    }

    /// Linear indices of the two endpoints of a bond.
    pub fn bond_endpoints(&self, bond: &Bond) -> (usize, usize) {
        let from = self.site_index(&bond.origin);
        let to = self
            .neighbor(&bond.origin, bond.direction)
            .expect("bond terminal exists by construction");
        (from, self.site_index(&to))
    }

    /// The plaquette `p_{mu nu}(x)`, if all four bonds exist.
    pub fn plaquette_at(&self, site: &Site, mu: usize, nu: usize) -> Option<Plaquette> {
        if mu >= nu || nu >= self.d {
            return None;
        }
        self.make_plaquette(self.site_index(site), mu, nu)
    }

    fn make_plaquette(&self, s: usize, mu: usize, nu: usize) -> Option<Plaquette> {
        let x = self.site(s);
        let x_mu = self.neighbor(&x, mu)?;
        let x_nu = self.neighbor(&x, nu)?;
        let b0 = self.bond_index(&x, mu)?;
        let b1 = self.bond_index(&x_mu, nu)?;
        let b2 = self.bond_index(&x_nu, mu)?;
        let b3 = self.bond_index(&x, nu)?;
        Some(Plaquette {
            origin: x,
            plane: (mu, nu),
            bonds: [
                BondRef { index: b0, reversed: false },
                BondRef { index: b1, reversed: false },
                BondRef { index: b2, reversed: true },
                BondRef { index: b3, reversed: true },
            ],
        })
    }

    /// Counts obtained by enumeration.
    pub fn counts(&self) -> LatticeCounts {
        let free_bonds = self.bonds.iter().filter(|b| !b.wraps).count();
        LatticeCounts {
            sites: self.n_sites(),
            free_bonds,
            extra_bonds: self.bonds.len() - free_bonds,
            plaquettes: self.plaquettes.len(),
            retained_bonds: free_bonds - enhanced_temporal_gauge(self).fixed().len(),
        }
    }
}

pub fn counts(lattice: &Lattice) -> LatticeCounts {
    lattice.counts()
}

/// Closed-form lattice counting formulas.
pub mod closed_form {
    /// `L^d`
    pub fn sites(d: usize, l: usize) -> usize {
        l.pow(d as u32)
    }

    /// `d (L-1) L^{d-1}`
    pub fn free_bonds(d: usize, l: usize) -> usize {
        d * (l - 1) * l.pow(d as u32 - 1)
    }

    /// `d L^{d-1}`
    pub fn extra_bonds(d: usize, l: usize) -> usize {
        d * l.pow(d as u32 - 1)
    }

    /// Retained bonds after the enhanced temporal gauge:
    /// `(L-1)^2`, `(2L+1)(L-1)^2`, `(3L^3 - L^2 - L - 1)(L-1)` for d = 2, 3, 4.
    pub fn retained_bonds(d: usize, l: usize) -> usize {
        match d {
            2 => (l - 1).pow(2),
            3 => (2 * l + 1) * (l - 1).pow(2),
            4 => (3 * l.pow(3) - l * l - l - 1) * (l - 1),
            _ => panic!("dimension {d} unsupported"),
        }
    }

    /// Free-boundary plaquettes `d(d-1)/2 (L-1)^2 L^{d-2}`.
    pub fn free_plaquettes(d: usize, l: usize) -> usize {
        d * (d - 1) / 2 * (l - 1).pow(2) * l.pow(d as u32 - 2)
    }

    /// Periodic plaquettes `d(d-1)/2 L^d`.
    pub fn periodic_plaquettes(d: usize, l: usize) -> usize {
        d * (d - 1) / 2 * l.pow(d as u32)
    }
}

/// Bonds set to the identity by a maximal-tree gauge fixing, and the rest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeFixing {
    fixed: Vec<usize>,
    retained: Vec<usize>,
    is_fixed: Vec<bool>,
}

impl GaugeFixing {
    pub fn fixed(&self) -> &[usize] {
        &self.fixed
    }

    /// Variables left to integrate, in bond-index order.
    pub fn retained(&self) -> &[usize] {
        &self.retained
    }

    pub fn is_fixed(&self, bond: usize) -> bool {
        self.is_fixed[bond]
    }

    /// True if the fixed bonds form a spanning tree of the lattice sites.
    pub fn is_maximal_tree(&self, lattice: &Lattice) -> bool {
        let n = lattice.n_sites();
        if self.fixed.len() + 1 != n {
            return false;
        }
        let mut uf = UnionFind::<usize>::new(n);
        for &b in &self.fixed {
            let (x, y) = lattice.bond_endpoints(&lattice.bonds()[b]);
            if !uf.union(x, y) {
                return false;
            }
        }
        true
    }

    /// True if adding `bond` to the fixed set closes a loop.
    pub fn closes_loop(&self, lattice: &Lattice, bond: usize) -> bool {
        let mut uf = UnionFind::<usize>::new(lattice.n_sites());
        for &b in &self.fixed {
            let (x, y) = lattice.bond_endpoints(&lattice.bonds()[b]);
            uf.union(x, y);
        }
        let (x, y) = lattice.bond_endpoints(&lattice.bonds()[bond]);
        uf.equiv(x, y)
    }
}

/// The enhanced temporal gauge: every temporal bond, plus the comb of
/// direction-1 bonds at `x^0 = 1`, the direction-2 bonds at `x^0 = x^1 = 1`
/// and the direction-3 bonds at `x^0 = x^1 = x^2 = 1`. Only free bonds are
/// fixed; wrapping bonds of a periodic lattice are always retained.
pub fn enhanced_temporal_gauge(lattice: &Lattice) -> GaugeFixing {
    let mut is_fixed = vec![false; lattice.bonds().len()];
    for (i, b) in lattice.bonds().iter().enumerate() {
        if b.wraps {
            continue;
        }
        let mu = b.direction;
        // b_mu is fixed when all coordinates below mu sit at 1
        is_fixed[i] = (0..mu).all(|nu| b.origin.coord(nu) == 1);
    }
    let fixed = (0..is_fixed.len()).filter(|&i| is_fixed[i]).collect();
    let retained = (0..is_fixed.len()).filter(|&i| !is_fixed[i]).collect();
    GaugeFixing { fixed, retained, is_fixed }
}
