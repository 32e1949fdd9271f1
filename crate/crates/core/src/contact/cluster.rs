use nalgebra::Vector3;

use crate::real::Real;

/// Bounding sphere of a run of nodes in [`NodeClusters::order`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cluster<T: Real> {
    pub center: Vector3<T>,
    pub radius: T,
    pub start: usize,
    pub end: usize,
}

/// Spatial grouping of a grain's surface nodes used to skip whole groups
/// that are provably outside another grain.
#[derive(Clone, Debug, PartialEq)]
pub struct NodeClusters<T: Real> {
    /// Node indices, grouped so that every cluster is a contiguous run.
    pub order: Vec<usize>,
    pub clusters: Vec<Cluster<T>>,
}

impl<T: Real> NodeClusters<T> {
    /// Median splits along the longest axis until groups hold at most
    /// `max_size` nodes.
    pub fn build(nodes: &[Vector3<T>], max_size: usize) -> Self {
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        let mut clusters = Vec::new();
        split(nodes, &mut order, 0, nodes.len(), max_size.max(1), &mut clusters);
        Self { order, clusters }
    }

    pub fn len(&self) -> usize {
        self.clusters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clusters.is_empty()
    }

    pub fn members(&self, c: &Cluster<T>) -> &[usize] {
        &self.order[c.start..c.end]
    }
}

fn split<T: Real>(
    nodes: &[Vector3<T>],
    order: &mut [usize],
    start: usize,
    end: usize,
    max_size: usize,
    out: &mut Vec<Cluster<T>>,
) {
    if start == end {
        return;
    }
    let slice = &mut order[start..end];
    let mut lo = nodes[slice[0]];
    let mut hi = lo;
    for &i in slice.iter() {
        lo = lo.inf(&nodes[i]);
        hi = hi.sup(&nodes[i]);
    }
    if end - start <= max_size {
        let center = (lo + hi) * T::lit(0.5);
        let radius = slice
            .iter()
            .map(|&i| (nodes[i] - center).norm())
            .fold(T::zero(), |a, b| a.max(b));
        out.push(Cluster {
            center,
            radius,
            start,
            end,
        });
        return;
    }
    let extent = hi - lo;
    let axis = extent.imax();
    slice.sort_by(|&a, &b| {
        nodes[a][axis]
            .partial_cmp(&nodes[b][axis])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    let mid = start + (end - start) / 2;
    split(nodes, order, start, mid, max_size, out);
    split(nodes, order, mid, end, max_size, out);
}
