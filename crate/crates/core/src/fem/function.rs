use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result, Vec3};

type VectorFn = Arc<dyn Fn(&Vec3) -> Vec3 + Send + Sync>;
type ScalarFn = Arc<dyn Fn(&Vec3) -> f64 + Send + Sync>;

/// Analytic vector field with optional divergence and curl.
#[derive(Clone)]
pub struct FieldFunction {
    value: VectorFn,
    divergence: Option<ScalarFn>,
    curl: Option<VectorFn>,
}

impl fmt::Debug for FieldFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldFunction")
            .field("divergence", &self.divergence.is_some())
            .field("curl", &self.curl.is_some())
            .finish()
    }
}

impl FieldFunction {
    pub fn new(value: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        FieldFunction {
            value: Arc::new(value),
            divergence: None,
            curl: None,
        }
    }

    pub fn zero() -> Self {
        FieldFunction::new(|_| Vec3::zeros())
            .with_divergence(|_| 0.0)
            .with_curl(|_| Vec3::zeros())
    }

    pub fn constant(c: Vec3) -> Self {
        FieldFunction::new(move |_| c)
            .with_divergence(|_| 0.0)
            .with_curl(|_| Vec3::zeros())
    }

    pub fn with_divergence(mut self, div: impl Fn(&Vec3) -> f64 + Send + Sync + 'static) -> Self {
        self.divergence = Some(Arc::new(div));
        self
    }

    pub fn with_curl(mut self, curl: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        self.curl = Some(Arc::new(curl));
        self
    }

    pub fn value(&self, x: &Vec3) -> Vec3 {
        (self.value)(x)
    }

    pub fn has_divergence(&self) -> bool {
        self.divergence.is_some()
    }

    pub fn has_curl(&self) -> bool {
        self.curl.is_some()
    }

    pub fn divergence(&self, x: &Vec3) -> Result<f64> {
        self.divergence
            .as_ref()
            .map(|d| d(x))
            .ok_or_else(|| Error::InvalidInput("field has no divergence callback".into()))
    }

    pub fn curl(&self, x: &Vec3) -> Result<Vec3> {
        self.curl
            .as_ref()
            .map(|c| c(x))
            .ok_or_else(|| Error::InvalidInput("field has no curl callback".into()))
    }

    /// `c·self`, carrying over the available derivatives.
    pub fn scaled(&self, c: f64) -> FieldFunction {
        let v = self.value.clone();
        let mut out = FieldFunction::new(move |x| v(x) * c);
        if let Some(d) = self.divergence.clone() {
            out = out.with_divergence(move |x| c * d(x));
        }
        if let Some(k) = self.curl.clone() {
            out = out.with_curl(move |x| k(x) * c);
        }
        out
    }

    /// Largest relative mismatch between the divergence/curl callbacks and
    /// central differences of the value at `samples` seeded random points of
    /// the box `[lo, hi]`.
    pub fn derivative_audit(&self, lo: Vec3, hi: Vec3, samples: usize, seed: u64) -> f64 {
        let h = 1e-5 * (hi - lo).norm().max(1.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: f64 = 0.0;
        for _ in 0..samples {
            let x = Vec3::from_fn(|i, _| rng.gen_range(lo[i]..hi[i]));
            let mut jac = [[0.0; 3]; 3];
            let mut scale: f64 = 0.0;
            for j in 0..3 {
                let mut e = Vec3::zeros();
                e[j] = h;
                let d = (self.value(&(x + e)) - self.value(&(x - e))) / (2.0 * h);
                for i in 0..3 {
                    jac[i][j] = d[i];
                    scale = scale.max(d[i].abs());
                }
            }
            let scale = scale.max(self.value(&x).norm()).max(1e-300);
            if let Some(div) = &self.divergence {
                let fd = jac[0][0] + jac[1][1] + jac[2][2];
                worst = worst.max((div(&x) - fd).abs() / scale);
            }
            if let Some(curl) = &self.curl {
                let fd = Vec3::new(
                    jac[2][1] - jac[1][2],
                    jac[0][2] - jac[2][0],
                    jac[1][0] - jac[0][1],
                );
                worst = worst.max((curl(&x) - fd).norm() / scale);
            }
        }
        worst
    }
}

/// Analytic scalar field with an optional gradient.
#[derive(Clone)]
pub struct ScalarFunction {
    value: ScalarFn,
    gradient: Option<VectorFn>,
}

impl fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarFunction")
            .field("gradient", &self.gradient.is_some())
            .finish()
    }
}

impl ScalarFunction {
    pub fn new(value: impl Fn(&Vec3) -> f64 + Send + Sync + 'static) -> Self {
        ScalarFunction {
            value: Arc::new(value),
            gradient: None,
        }
    }

    pub fn zero() -> Self {
        ScalarFunction::new(|_| 0.0).with_gradient(|_| Vec3::zeros())
    }

    pub fn constant(c: f64) -> Self {
        ScalarFunction::new(move |_| c).with_gradient(|_| Vec3::zeros())
    }

    pub fn with_gradient(mut self, grad: impl Fn(&Vec3) -> Vec3 + Send + Sync + 'static) -> Self {
        self.gradient = Some(Arc::new(grad));
        self
    }

    pub fn value(&self, x: &Vec3) -> f64 {
        (self.value)(x)
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }

    pub fn gradient(&self, x: &Vec3) -> Result<Vec3> {
        self.gradient
            .as_ref()
            .map(|g| g(x))
            .ok_or_else(|| Error::InvalidInput("scalar field has no gradient callback".into()))
    }

    pub fn scaled(&self, c: f64) -> ScalarFunction {
        let v = self.value.clone();
        let mut out = ScalarFunction::new(move |x| c * v(x));
        if let Some(g) = self.gradient.clone() {
            out = out.with_gradient(move |x| g(x) * c);
        }
        out
    }
}
