use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Polynomial degree of the Lagrange element.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub enum Order {
    P1,
    P2,
}

impl Order {
    pub fn from_degree(degree: usize) -> Result<Order> {
        match degree {
            1 => Ok(Order::P1),
            2 => Ok(Order::P2),
            other => Err(Error::InvalidInput(format!(
                "unsupported element order {other} (expected 1 or 2)"
            ))),
        }
    }

    pub fn degree(self) -> usize {
        match self {
            Order::P1 => 1,
            Order::P2 => 2,
        }
    }

    /// Nodes per tetrahedron.
    pub fn n_local(self) -> usize {
        match self {
            Order::P1 => 4,
            Order::P2 => 10,
        }
    }
}

impl TryFrom<usize> for Order {
    type Error = Error;
    fn try_from(degree: usize) -> Result<Order> {
        Order::from_degree(degree)
    }
}

impl From<Order> for usize {
    fn from(order: Order) -> usize {
        order.degree()
    }
}

/// Local edges of a tet, in P2 node order after the four vertices.
pub const TET_EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Basis values and reference gradients at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct Shape {
    pub values: Vec<f64>,
    pub gradients: Vec<[f64; 3]>,
}

const BARY_GRAD: [[f64; 3]; 4] = [
    [-1.0, -1.0, -1.0],
    [1.0, 0.0, 0.0],
    [0.0, 1.0, 0.0],
    [0.0, 0.0, 1.0],
];

fn barycentric(xi: [f64; 3]) -> [f64; 4] {
    [1.0 - xi[0] - xi[1] - xi[2], xi[0], xi[1], xi[2]]
}

/// Lagrange basis on the reference tet with vertices `0, e₁, e₂, e₃`.
pub fn reference_shape(order: usize, xi: [f64; 3]) -> Result<Shape> {
    Ok(shape(Order::from_degree(order)?, xi))
}

pub fn shape(order: Order, xi: [f64; 3]) -> Shape {
    let l = barycentric(xi);
    match order {
        Order::P1 => Shape {
            values: l.to_vec(),
            gradients: BARY_GRAD.to_vec(),
        },
        Order::P2 => {
            let mut values = Vec::with_capacity(10);
            let mut gradients = Vec::with_capacity(10);
            for i in 0..4 {
                values.push(l[i] * (2.0 * l[i] - 1.0));
                gradients.push(BARY_GRAD[i].map(|g| (4.0 * l[i] - 1.0) * g));
            }
            for (i, j) in TET_EDGES {
                values.push(4.0 * l[i] * l[j]);
                let mut g = [0.0; 3];
                for d in 0..3 {
                    g[d] = 4.0 * (BARY_GRAD[i][d] * l[j] + l[i] * BARY_GRAD[j][d]);
                }
                gradients.push(g);
            }
            Shape { values, gradients }
        }
    }
}

/// Reference coordinates of the local nodes.
pub fn local_nodes(order: Order) -> Vec<[f64; 3]> {
    let vertices = [[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut nodes = vertices.to_vec();
    if order == Order::P2 {
        for (i, j) in TET_EDGES {
            nodes.push([0, 1, 2].map(|d| 0.5 * (vertices[i][d] + vertices[j][d])));
        }
    }
    nodes
}
