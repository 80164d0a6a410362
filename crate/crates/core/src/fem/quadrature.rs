//! Fixed symmetric quadrature rules.
//!
//! Volume integrals use a 14-point rule of degree 5 on the reference tet
//! `{ξ ≥ 0, ξ₁+ξ₂+ξ₃ ≤ 1}` (weights sum to its volume 1/6); surface integrals
//! use a 7-point rule of degree 5 with weights normalized to sum to 1.

/// Quadrature point in barycentric coordinates with its weight.
#[derive(Debug, Clone, Copy)]
pub struct TetPoint {
    pub bary: [f64; 4],
    pub weight: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct TriPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

impl TetPoint {
    /// Reference coordinates `(ξ₁, ξ₂, ξ₃) = (L₁, L₂, L₃)`.
    pub fn xi(&self) -> [f64; 3] {
        [self.bary[1], self.bary[2], self.bary[3]]
    }
}

pub fn tet_rule() -> Vec<TetPoint> {
    const A: f64 = 0.092_735_250_310_891_226_402_323_91;
    const WA: f64 = 0.012_248_840_519_393_658_257_285_03;
    const B: f64 = 0.310_885_919_263_300_609_797_345_7;
    const WB: f64 = 0.018_781_320_953_002_641_799_864_28;
    const C: f64 = 0.045_503_704_125_649_649_491_880_53;
    const WC: f64 = 0.007_091_003_462_846_911_073_011_571;
    let mut pts = Vec::with_capacity(14);
    for (a, w) in [(A, WA), (B, WB)] {
        for k in 0..4 {
            let mut bary = [a; 4];
            bary[k] = 1.0 - 3.0 * a;
            pts.push(TetPoint { bary, weight: w });
        }
    }
    let d = 0.5 - C;
    for (i, j) in [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)] {
        let mut bary = [d; 4];
        bary[i] = C;
        bary[j] = C;
        pts.push(TetPoint { bary, weight: WC });
    }
    pts
}

pub fn tri_rule() -> Vec<TriPoint> {
    let s15 = 15f64.sqrt();
    let mut pts = vec![TriPoint {
        bary: [1.0 / 3.0; 3],
        weight: 9.0 / 40.0,
    }];
    for (beta, w) in [
        ((6.0 + s15) / 21.0, (155.0 + s15) / 1200.0),
        ((6.0 - s15) / 21.0, (155.0 - s15) / 1200.0),
    ] {
        for k in 0..3 {
            let mut bary = [beta; 3];
            bary[k] = 1.0 - 2.0 * beta;
            pts.push(TriPoint { bary, weight: w });
        }
    }
    pts
}
