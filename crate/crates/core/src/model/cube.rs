use crate::error::{Error, Result};

/// Default upper bound on `(2L+1)^d`; Hamiltonians are stored densely.
pub const DEFAULT_SITE_BUDGET: usize = 5_000;

/// A lattice point of `ℤ^d`.
pub type Site = Vec<i32>;

/// The cube `Λ_L = {n ∈ ℤ^d : |n_i| ≤ L}` with its sites in lexicographic order.
///
/// Index and coordinates are related by a mixed-radix encoding, so
/// [`LatticeCube::index_of`] needs no lookup table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeCube {
    dim: usize,
    half_side: usize,
    sites: Vec<Site>,
}

impl LatticeCube {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn half_side(&self) -> usize {
        self.half_side
    }

    /// Side length `2L + 1`.
    pub fn side(&self) -> usize {
        2 * self.half_side + 1
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, index: usize) -> &[i32] {
        &self.sites[index]
    }

    pub fn contains(&self, site: &[i32]) -> bool {
        site.len() == self.dim && site.iter().all(|&c| c.unsigned_abs() as usize <= self.half_side)
    }

    pub fn index_of(&self, site: &[i32]) -> Option<usize> {
        if !self.contains(site) {
            return None;
        }
        let side = self.side();
        let l = self.half_side as i64;
        Some(
            site.iter()
                .fold(0usize, |acc, &c| acc * side + (c as i64 + l) as usize),
        )
    }

    /// Indices of the cube neighbours (ℓ¹ distance one) of site `index`.
    pub fn neighbors(&self, index: usize) -> Vec<usize> {
        let site = &self.sites[index];
        let l = self.half_side as i32;
        let mut out = Vec::with_capacity(2 * self.dim);
        let mut stride = 1usize;
        for axis in (0..self.dim).rev() {
            let c = site[axis];
            if c > -l {
                out.push(index - stride);
            }
            if c < l {
                out.push(index + stride);
            }
            stride *= self.side();
        }
        out.sort_unstable();
        out
    }

    /// Number of unordered adjacent pairs inside the cube: `d·(2L)·(2L+1)^{d-1}`.
    pub fn edge_count(&self) -> usize {
        let side = self.side();
        self.dim * (side - 1) * side.pow(self.dim as u32 - 1)
    }
}

/// ℓ¹ norm `|n| = Σ|n_i|`.
pub fn l1_norm(site: &[i32]) -> u64 {
    site.iter().map(|c| c.unsigned_abs() as u64).sum()
}

pub fn l1_distance(a: &[i32], b: &[i32]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (*x as i64 - *y as i64).unsigned_abs())
        .sum()
}

pub fn enumerate_cube(dim: usize, half_side: usize) -> Result<LatticeCube> {
    enumerate_cube_with_budget(dim, half_side, DEFAULT_SITE_BUDGET)
}

pub fn enumerate_cube_with_budget(
    dim: usize,
    half_side: usize,
    budget: usize,
) -> Result<LatticeCube> {
    if dim == 0 {
        return Err(Error::invalid("dimension must be at least 1"));
    }
    let side = 2 * half_side as u128 + 1;
    let count = side.checked_pow(dim as u32).unwrap_or(u128::MAX);
    if count > budget as u128 {
        return Err(Error::SiteBudget {
            sites: count,
            budget,
        });
    }
    let count = count as usize;
    let side = side as usize;
    let l = half_side as i32;
    let sites = (0..count)
        .map(|mut idx| {
            let mut site = vec![0i32; dim];
            for axis in (0..dim).rev() {
                site[axis] = (idx % side) as i32 - l;
                idx /= side;
            }
            site
        })
        .collect();
    Ok(LatticeCube {
        dim,
        half_side,
        sites,
    })
}

/// Indices of `Λ^{int}_{L,p} = {n ∈ Λ_L : |n_i| < L − p}`; empty when `p ≥ L`.
pub fn interior_cube(cube: &LatticeCube, degree: usize) -> Vec<usize> {
    if degree >= cube.half_side {
        return Vec::new();
    }
    let bound = (cube.half_side - degree) as u32;
    cube.sites
        .iter()
        .enumerate()
        .filter(|(_, s)| s.iter().all(|c| c.unsigned_abs() < bound))
        .map(|(i, _)| i)
        .collect()
}
