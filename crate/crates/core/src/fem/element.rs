use nalgebra::Matrix3;

use crate::Vec3;

/// Affine map `x = p₀ + J ξ` from the reference tet onto a mesh tet.
#[derive(Debug, Clone, Copy)]
pub struct ElementGeometry {
    pub origin: Vec3,
    pub jacobian: Matrix3<f64>,
    /// `J⁻ᵀ`, mapping reference gradients to physical ones.
    pub inv_transpose: Matrix3<f64>,
    /// `det J = 6·volume`.
    pub det: f64,
}

impl ElementGeometry {
    pub fn new(points: [Vec3; 4]) -> ElementGeometry {
        let jacobian = Matrix3::from_columns(&[
            points[1] - points[0],
            points[2] - points[0],
            points[3] - points[0],
        ]);
        let det = jacobian.determinant();
        let inv = jacobian
            .try_inverse()
            .expect("mesh tets have positive volume");
        ElementGeometry {
            origin: points[0],
            jacobian,
            inv_transpose: inv.transpose(),
            det,
        }
    }

    pub fn map(&self, xi: [f64; 3]) -> Vec3 {
        self.origin + self.jacobian * Vec3::from(xi)
    }

    pub fn to_reference(&self, x: &Vec3) -> [f64; 3] {
        let xi = self.inv_transpose.transpose() * (x - self.origin);
        [xi.x, xi.y, xi.z]
    }

    pub fn gradient(&self, reference: [f64; 3]) -> Vec3 {
        self.inv_transpose * Vec3::from(reference)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_gradient() {
        let g = ElementGeometry::new([
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(3.0, 0.5, 0.0),
            Vec3::new(1.2, 2.0, 0.1),
            Vec3::new(0.9, 0.3, 1.5),
        ]);
        let xi = [0.2, 0.3, 0.1];
        let back = g.to_reference(&g.map(xi));
        for d in 0..3 {
            assert!((back[d] - xi[d]).abs() < 1e-14);
        }
        // φ = ξ₁ has physical gradient equal to the first row of J⁻¹.
        let grad = g.gradient([1.0, 0.0, 0.0]);
        let e = Vec3::new(0.3, -0.2, 0.7);
        let dx = g.map(xi) + e * 1e-3;
        let dphi = g.to_reference(&dx)[0] - xi[0];
        assert!((dphi - grad.dot(&e) * 1e-3).abs() < 1e-14);
        assert!(g.det > 0.0);
    }
}
