//! Analytic test functions with known minima, used to exercise the swarm
//! without training any networks.

use std::f64::consts::PI;

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64 + x.iter().map(|v| v * v - 10.0 * (2.0 * PI * v).cos()).sum::<f64>()
}

#[derive(Debug, Clone)]
pub struct BenchFunction {
    pub name: &'static str,
    pub dim: usize,
    pub bounds: Vec<(f64, f64)>,
    pub minimum_position: Vec<f64>,
    pub minimum_value: f64,
    function: fn(&[f64]) -> f64,
}

impl BenchFunction {
    pub fn sphere(dim: usize) -> Self {
        Self {
            name: "sphere",
            dim,
            bounds: vec![(-5.12, 5.12); dim],
            minimum_position: vec![0.0; dim],
            minimum_value: 0.0,
            function: sphere,
        }
    }

    pub fn rastrigin(dim: usize) -> Self {
        Self {
            name: "rastrigin",
            dim,
            bounds: vec![(-5.12, 5.12); dim],
            minimum_position: vec![0.0; dim],
            minimum_value: 0.0,
            function: rastrigin,
        }
    }

    pub fn by_name(name: &str, dim: usize) -> Option<Self> {
        match name.to_ascii_lowercase().as_str() {
            "sphere" => Some(Self::sphere(dim)),
            "rastrigin" => Some(Self::rastrigin(dim)),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        (self.function)(x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sphere_values() {
        assert_eq!(sphere(&[0.0, 0.0]), 0.0);
        assert_eq!(sphere(&[1.0, 1.0]), 2.0);
        assert_eq!(sphere(&[3.0, 4.0]), 25.0);
    }

    #[test]
    fn rastrigin_values() {
        assert_eq!(rastrigin(&[0.0; 5]), 0.0);
        // 20 + (1 - 10) + (0 - 10)
        assert!((rastrigin(&[1.0, 0.0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn minima_are_exact() {
        for f in [BenchFunction::sphere(7), BenchFunction::rastrigin(7)] {
            assert!((f.eval(&f.minimum_position) - f.minimum_value).abs() <= 1e-12);
        }
    }

    #[test]
    fn rastrigin_nonnegative_in_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10_000 {
            let x: Vec<f64> = (0..4).map(|_| rng.random_range(-5.12..=5.12)).collect();
            assert!(rastrigin(&x) >= 0.0);
        }
    }

    #[test]
    fn lookup_by_name() {
        assert_eq!(BenchFunction::by_name("Rastrigin", 3).unwrap().dim, 3);
        assert!(BenchFunction::by_name("ackley", 3).is_none());
    }
}
