//! Connected-component bookkeeping for the evolving graph.
//!
//! The accepted edge set is never stored. Only the union-find forest and the
//! size statistics that the engine and the order parameters need are kept:
//!
//! * per-root component sizes,
//! * the number of components,
//! * the exact integer `Σ s²` over all components,
//! * a multiset of sizes (count per size plus the set of occupied sizes),
//!   which answers two-smallest, largest and range-sum queries.
//!
//! A merge touches the size multiset in O(1), plus an ordered-set update only
//! when a size class becomes empty or non-empty.

use std::collections::BTreeSet;

use crate::error::{BfwError, Result};

/// Union-find over `n` nodes with component size statistics.
#[derive(Debug, Clone)]
pub struct ComponentPartition {
    parent: Vec<u32>,
    size: Vec<u32>,
    component_count: usize,
    sum_sq: u64,
    size_counts: Vec<u32>,
    occupied: BTreeSet<u32>,
}

/// `Σ s` and `Σ s²` over the components whose size is at most some limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PrefixSums {
    pub sum: u64,
    pub sum_sq: u64,
}

impl ComponentPartition {
    /// `n` singleton components.
    pub fn new(node_count: usize) -> Result<Self> {
        if node_count < 2 {
            return Err(BfwError::InvalidConfig(format!(
                "node count must be at least 2, got {node_count}"
            )));
        }
        if node_count > u32::MAX as usize {
            return Err(BfwError::InvalidConfig(format!(
                "node count {node_count} exceeds the 32-bit node id range"
            )));
        }
        let mut size_counts = vec![0u32; node_count + 1];
        size_counts[1] = node_count as u32;
        Ok(Self {
            parent: (0..node_count as u32).collect(),
            size: vec![1; node_count],
            component_count: node_count,
            sum_sq: node_count as u64,
            size_counts,
            occupied: BTreeSet::from([1]),
        })
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    /// Exact `Σ s²` over every component, singletons included.
    pub fn sum_sq_sizes(&self) -> u64 {
        self.sum_sq
    }

    fn check(&self, v: u32) -> Result<()> {
        if (v as usize) < self.parent.len() {
            Ok(())
        } else {
            Err(BfwError::NodeOutOfRange {
                node: v,
                node_count: self.parent.len(),
            })
        }
    }

    /// Canonical representative of `v`'s component, compressing the path.
    pub fn find(&mut self, v: u32) -> Result<u32> {
        self.check(v)?;
        Ok(self.find_root(v))
    }

    pub(crate) fn find_root(&mut self, v: u32) -> u32 {
        let mut root = v;
        while self.parent[root as usize] != root {
            root = self.parent[root as usize];
        }
        let mut cur = v;
        while self.parent[cur as usize] != root {
            let next = self.parent[cur as usize];
            self.parent[cur as usize] = root;
            cur = next;
        }
        root
    }

    /// Size of the component containing `v`.
    pub fn component_size(&mut self, v: u32) -> Result<u32> {
        let r = self.find(v)?;
        Ok(self.size[r as usize])
    }

    pub(crate) fn root_size(&self, root: u32) -> u32 {
        self.size[root as usize]
    }

    /// Joins the components of `a` and `b` and returns the merged size.
    ///
    /// Union by size; between equal sizes the lower root id becomes the root.
    pub fn merge(&mut self, a: u32, b: u32) -> Result<u32> {
        self.check(a)?;
        self.check(b)?;
        let ra = self.find_root(a);
        let rb = self.find_root(b);
        if ra == rb {
            return Err(BfwError::SameComponent(a, b));
        }
        Ok(self.merge_roots(ra, rb))
    }

    pub(crate) fn merge_roots(&mut self, ra: u32, rb: u32) -> u32 {
        debug_assert_ne!(ra, rb);
        let (sa, sb) = (self.size[ra as usize], self.size[rb as usize]);
        let (root, child) = if sa > sb || (sa == sb && ra < rb) {
            (ra, rb)
        } else {
            (rb, ra)
        };
        let merged = sa + sb;
        self.parent[child as usize] = root;
        self.size[root as usize] = merged;
        self.component_count -= 1;
        self.sum_sq += 2 * sa as u64 * sb as u64;
        self.remove_size(sa);
        self.remove_size(sb);
        self.insert_size(merged);
        merged
    }

    fn remove_size(&mut self, s: u32) {
        let c = &mut self.size_counts[s as usize];
        *c -= 1;
        if *c == 0 {
            self.occupied.remove(&s);
        }
    }

    fn insert_size(&mut self, s: u32) {
        let c = &mut self.size_counts[s as usize];
        *c += 1;
        if *c == 1 {
            self.occupied.insert(s);
        }
    }

    /// The two smallest component sizes, with multiplicity.
    pub fn two_smallest(&self) -> Result<(u32, u32)> {
        if self.component_count < 2 {
            return Err(BfwError::TooFewComponents(self.component_count));
        }
        let mut it = self.occupied.iter();
        let first = *it.next().expect("at least two components");
        if self.size_counts[first as usize] >= 2 {
            return Ok((first, first));
        }
        let second = *it.next().expect("at least two components");
        Ok((first, second))
    }

    pub fn largest(&self) -> u32 {
        *self.occupied.last().expect("partition is never empty")
    }

    /// Number of components of exactly size `s`.
    pub fn count_of_size(&self, s: u32) -> u32 {
        self.size_counts.get(s as usize).copied().unwrap_or(0)
    }

    /// Distinct sizes in ascending order with their multiplicities.
    pub fn size_classes(&self) -> impl DoubleEndedIterator<Item = (u32, u32)> + '_ {
        self.occupied
            .iter()
            .map(move |&s| (s, self.size_counts[s as usize]))
    }

    /// Component sizes in descending order, one entry per component.
    pub fn sizes_descending(&self) -> impl Iterator<Item = u32> + '_ {
        self.size_classes()
            .rev()
            .flat_map(|(s, c)| std::iter::repeat_n(s, c as usize))
    }

    /// `Σ s` and `Σ s²` over components with `s ≤ limit`.
    pub fn size_prefix_sum(&self, limit: u64) -> PrefixSums {
        let limit = limit.min(u32::MAX as u64) as u32;
        self.occupied
            .range(..=limit)
            .fold(PrefixSums::default(), |acc, &s| {
                let c = self.size_counts[s as usize] as u64;
                let s = s as u64;
                PrefixSums {
                    sum: acc.sum + c * s,
                    sum_sq: acc.sum_sq + c * s * s,
                }
            })
    }

    /// Sizes of every root, read straight from the forest. Used to check the
    /// cached statistics.
    pub fn root_sizes(&self) -> Vec<u32> {
        self.parent
            .iter()
            .enumerate()
            .filter(|&(i, &p)| i as u32 == p)
            .map(|(i, _)| self.size[i])
            .collect()
    }
}
