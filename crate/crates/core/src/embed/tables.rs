use rand::Rng;

use crate::error::{Error, Result};
use crate::graph::NodeNames;
use crate::real::Real;
use crate::rng::{self, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Center = 0,
    Context = 1,
}

/// One embedding row: the center or context vector of `node` in `view`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Param {
    pub side: Side,
    pub view: usize,
    pub node: usize,
}

impl Param {
    pub fn center(view: usize, node: usize) -> Self {
        Param {
            side: Side::Center,
            view,
            node,
        }
    }

    pub fn context(view: usize, node: usize) -> Self {
        Param {
            side: Side::Context,
            view,
            node,
        }
    }
}

/// Per-view center and context vectors for every node.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTables<T> {
    num_views: usize,
    num_nodes: usize,
    dim: usize,
    data: Vec<T>,
}

/// View-specific dimension `floor(D / |V|)`.
pub fn view_dim(total_dim: usize, num_views: usize) -> Result<usize> {
    if num_views == 0 {
        return Err(Error::Config("graph has no views".into()));
    }
    let d = total_dim / num_views;
    if d == 0 {
        return Err(Error::Config(format!(
            "dimension {total_dim} is smaller than the number of views ({num_views})"
        )));
    }
    Ok(d)
}

impl<T: Real> EmbeddingTables<T> {
    pub fn zeros(num_views: usize, num_nodes: usize, dim: usize) -> Self {
        EmbeddingTables {
            num_views,
            num_nodes,
            dim,
            data: vec![T::zero(); 2 * num_views * num_nodes * dim],
        }
    }

    /// Centers uniform on [-0.5/d, 0.5/d), contexts zero. View `v` draws from
    /// its own stream, so a view's initial table does not depend on the others.
    pub fn init(num_views: usize, num_nodes: usize, total_dim: usize, seed: u64) -> Result<Self> {
        let dim = view_dim(total_dim, num_views)?;
        let mut tables = Self::zeros(num_views, num_nodes, dim);
        for v in 0..num_views {
            let mut rng = rng::stream(seed, Stream::Init, &[v as u64]);
            let start = tables.row_index(Param::center(v, 0)) * dim;
            for x in &mut tables.data[start..start + num_nodes * dim] {
                *x = T::lit((rng.gen::<f64>() - 0.5) / dim as f64);
            }
        }
        Ok(tables)
    }

    pub fn num_views(&self) -> usize {
        self.num_views
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Dense row number of `p`, in `0..2 * |V| * |U|`.
    #[inline]
    pub fn row_index(&self, p: Param) -> usize {
        ((p.side as usize) * self.num_views + p.view) * self.num_nodes + p.node
    }

    pub fn num_rows(&self) -> usize {
        2 * self.num_views * self.num_nodes
    }

    #[inline]
    pub fn row(&self, p: Param) -> &[T] {
        let k = self.row_index(p) * self.dim;
        &self.data[k..k + self.dim]
    }

    #[inline]
    pub fn row_mut(&mut self, p: Param) -> &mut [T] {
        let k = self.row_index(p) * self.dim;
        &mut self.data[k..k + self.dim]
    }

    pub fn center(&self, view: usize, node: usize) -> &[T] {
        self.row(Param::center(view, node))
    }

    pub fn context(&self, view: usize, node: usize) -> &[T] {
        self.row(Param::context(view, node))
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [T] {
        &mut self.data
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    /// Copies of the center and context tables of one view, as a single-view
    /// table set.
    pub fn view(&self, v: usize) -> EmbeddingTables<T> {
        let mut out = Self::zeros(1, self.num_nodes, self.dim);
        for i in 0..self.num_nodes {
            out.row_mut(Param::center(0, i))
                .copy_from_slice(self.center(v, i));
            out.row_mut(Param::context(0, i))
                .copy_from_slice(self.context(v, i));
        }
        out
    }

    pub fn convert<U: Real>(&self) -> EmbeddingTables<U> {
        EmbeddingTables {
            num_views: self.num_views,
            num_nodes: self.num_nodes,
            dim: self.dim,
            data: self.data.iter().map(|x| U::lit(x.as_f64())).collect(),
        }
    }

    /// Final embeddings: per-node concatenation of the view-specific center
    /// vectors, in view order.
    pub fn aggregate(&self, names: &NodeNames) -> Embeddings<T> {
        assert_eq!(names.len(), self.num_nodes);
        let dim = self.num_views * self.dim;
        let mut values = Vec::with_capacity(self.num_nodes * dim);
        for i in 0..self.num_nodes {
            for v in 0..self.num_views {
                values.extend_from_slice(self.center(v, i));
            }
        }
        Embeddings {
            names: names.clone(),
            dim,
            values,
        }
    }
}

/// One vector per node with a name table.
#[derive(Debug, Clone, PartialEq)]
pub struct Embeddings<T> {
    pub names: NodeNames,
    pub dim: usize,
    pub values: Vec<T>,
}

impl<T: Real> Embeddings<T> {
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_f64(&self) -> Embeddings<f64> {
        Embeddings {
            names: self.names.clone(),
            dim: self.dim,
            values: self.values.iter().map(|x| x.as_f64()).collect(),
        }
    }
}
