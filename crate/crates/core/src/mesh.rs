//! Periodic one-dimensional meshes on the unit interval.
//!
//! Node `j` sits at `x_{j+1/2}`; node 0 is the left end of the domain and
//! node `N` its periodic image at `x = 1`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    nodes: Vec<f64>,
    sizes: Vec<f64>,
    h_max: f64,
    h_min: f64,
}

impl Mesh {
    /// Builds a mesh from explicit node coordinates.
    ///
    /// The nodes must be strictly increasing, start at 0 and end at 1.
    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument(
                "a mesh needs at least two nodes".into(),
            ));
        }
        if nodes[0] != 0.0 || *nodes.last().unwrap() != 1.0 {
            return Err(Error::InvalidArgument("mesh must span [0, 1]".into()));
        }
        let sizes: Vec<f64> = nodes.windows(2).map(|w| w[1] - w[0]).collect();
        if sizes.iter().any(|&h| h.is_nan() || h <= 0.0) {
            return Err(Error::InvalidArgument(
                "mesh nodes must be strictly increasing".into(),
            ));
        }
        let h_max = sizes.iter().copied().fold(f64::MIN, f64::max);
        let h_min = sizes.iter().copied().fold(f64::MAX, f64::min);
        Ok(Self {
            nodes,
            sizes,
            h_max,
            h_min,
        })
    }

    pub fn uniform(cells: usize) -> Result<Self> {
        if cells == 0 {
            return Err(Error::InvalidArgument("uniform mesh needs N >= 1".into()));
        }
        let n = cells as f64;
        let nodes = (0..=cells).map(|j| j as f64 / n).collect();
        Self::from_nodes(nodes)
    }

    /// Uniform mesh whose interior nodes are independently shifted by a
    /// uniform random amount in `[-fraction/N, fraction/N]`.
    ///
    /// The offsets come from a SplitMix64 stream seeded with `seed`, so a
    /// given `(cells, fraction, seed)` always produces the same nodes.
    pub fn perturbed(cells: usize, fraction: f64, seed: u64) -> Result<Self> {
        if cells < 2 {
            return Err(Error::InvalidArgument("perturbed mesh needs N >= 2".into()));
        }
        if !(0.0..0.5).contains(&fraction) {
            return Err(Error::InvalidArgument(format!(
                "perturbation fraction {fraction} outside [0, 0.5)"
            )));
        }
        let n = cells as f64;
        let mut rng = SplitMix64::new(seed);
        let mut nodes = Vec::with_capacity(cells + 1);
        nodes.push(0.0);
        for j in 1..cells {
            // uniform in [-1, 1]
            let r = 2.0 * rng.next_unit() - 1.0;
            nodes.push(j as f64 / n + r * fraction / n);
        }
        nodes.push(1.0);
        Self::from_nodes(nodes)
    }

    pub fn cells(&self) -> usize {
        self.sizes.len()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn sizes(&self) -> &[f64] {
        &self.sizes
    }

    pub fn h(&self, cell: usize) -> f64 {
        self.sizes[cell]
    }

    pub fn h_max(&self) -> f64 {
        self.h_max
    }

    pub fn h_min(&self) -> f64 {
        self.h_min
    }

    /// Left endpoint of `cell`.
    pub fn left(&self, cell: usize) -> f64 {
        self.nodes[cell]
    }

    pub fn center(&self, cell: usize) -> f64 {
        0.5 * (self.nodes[cell] + self.nodes[cell + 1])
    }

    /// Cell containing `x`; points on an interior node resolve to the cell on
    /// their left, `x = 0` to the first cell.
    pub fn locate(&self, x: f64) -> usize {
        let n = self.cells();
        match self.nodes.partition_point(|&node| node < x) {
            0 => 0,
            i if i > n => n - 1,
            i => i - 1,
        }
    }
}

/// SplitMix64 (Steele, Lea & Flood 2014).
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform double in `[0, 1)` from the top 53 bits.
    pub fn next_unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_nodes() {
        let m = Mesh::uniform(4).unwrap();
        assert_eq!(m.nodes(), &[0.0, 0.25, 0.5, 0.75, 1.0]);
        let m = Mesh::uniform(1).unwrap();
        assert_eq!(m.nodes(), &[0.0, 1.0]);
        assert_eq!(m.h_max(), 1.0);
        assert_eq!(m.h_min(), 1.0);
        let m = Mesh::uniform(20).unwrap();
        assert!((m.h_max() / m.h_min() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(Mesh::uniform(0).is_err());
        assert!(Mesh::perturbed(1, 0.1, 0).is_err());
        assert!(Mesh::perturbed(10, 0.5, 0).is_err());
        assert!(Mesh::perturbed(10, -0.1, 0).is_err());
        assert!(Mesh::from_nodes(vec![0.0, 0.6, 0.5, 1.0]).is_err());
        assert!(Mesh::from_nodes(vec![0.1, 1.0]).is_err());
    }

    #[test]
    fn zero_perturbation_is_uniform() {
        assert_eq!(
            Mesh::perturbed(10, 0.0, 1).unwrap(),
            Mesh::uniform(10).unwrap()
        );
    }

    #[test]
    fn perturbation_bounds() {
        let m = Mesh::perturbed(10, 0.1, 42).unwrap();
        for &h in m.sizes() {
            assert!((0.08 - 1e-15..=0.12 + 1e-15).contains(&h), "h = {h}");
        }
        assert!(m.h_max() / m.h_min() <= 1.5);
    }

    #[test]
    fn perturbation_is_deterministic() {
        let a = Mesh::perturbed(40, 0.1, 7).unwrap();
        let b = Mesh::perturbed(40, 0.1, 7).unwrap();
        let bits = |m: &Mesh| m.nodes().iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        assert_eq!(bits(&a), bits(&b));
        assert_ne!(bits(&a), bits(&Mesh::perturbed(40, 0.1, 8).unwrap()));
    }

    #[test]
    fn splitmix_reference_stream() {
        // first outputs for seed 1234567 from the reference C implementation
        let mut r = SplitMix64::new(1234567);
        assert_eq!(r.next_u64(), 6457827717110365317);
        assert_eq!(r.next_u64(), 3203168211198807973);
    }

    #[test]
    fn locate_cells() {
        let m = Mesh::uniform(4).unwrap();
        assert_eq!(m.locate(0.0), 0);
        assert_eq!(m.locate(0.1), 0);
        assert_eq!(m.locate(0.25), 0);
        assert_eq!(m.locate(0.26), 1);
        assert_eq!(m.locate(1.0), 3);
    }

    proptest::proptest! {
        #[test]
        fn sizes_sum_to_one(n in 2usize..200, frac in 0.0f64..0.49, seed in proptest::num::u64::ANY) {
            let m = Mesh::perturbed(n, frac, seed).unwrap();
            let total: f64 = m.sizes().iter().sum();
            proptest::prop_assert!((total - 1.0).abs() < 1e-14);
            for (j, &x) in m.nodes().iter().enumerate() {
                proptest::prop_assert!((x - j as f64 / n as f64).abs() <= frac / n as f64 + 1e-15);
            }
        }
    }
}
