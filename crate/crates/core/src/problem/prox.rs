//! Proximal operators and the nonsmooth terms built from them.

use ndarray::{Array1, ArrayView1, Zip};

use super::{ExtReal, Point, ProxOracle};
use crate::error::{check_dim, Error, Result};

/// Prox of `weight * |.|_1`: componentwise `sign(x) max(|x| - weight*step, 0)`.
pub fn prox_soft_threshold(x: ArrayView1<f64>, weight: f64, step: f64) -> Point {
    assert!(weight >= 0.0, "soft-threshold weight must be >= 0");
    assert!(step > 0.0, "prox step must be > 0");
    let t = weight * step;
    x.mapv(|xi| xi.signum() * (xi.abs() - t).max(0.0))
}

/// Projection onto the box `[lo, hi]`.
pub fn prox_box(x: ArrayView1<f64>, lo: ArrayView1<f64>, hi: ArrayView1<f64>) -> Result<Point> {
    check_dim(x.len(), lo.len())?;
    check_dim(x.len(), hi.len())?;
    if let Some(i) = lo.iter().zip(hi.iter()).position(|(l, h)| !(l <= h)) {
        return Err(Error::InvalidArgument(format!("box has lo > hi in component {i}")));
    }
    Ok(clamp(x, lo, hi))
}

/// Prox of `(alpha/2) |.|^2`, i.e. `x / (1 + alpha*step)`.
pub fn prox_scaled_quadratic(x: ArrayView1<f64>, alpha: f64, step: f64) -> Point {
    assert!(alpha >= 0.0, "quadratic weight must be >= 0");
    assert!(step > 0.0, "prox step must be > 0");
    let s = 1.0 / (1.0 + alpha * step);
    x.mapv(|xi| xi * s)
}

fn clamp(x: ArrayView1<f64>, lo: ArrayView1<f64>, hi: ArrayView1<f64>) -> Point {
    Zip::from(x).and(lo).and(hi).map_collect(|&xi, &l, &h| xi.max(l).min(h))
}

/// `h = 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroFunction;

impl ProxOracle for ZeroFunction {
    fn value(&self, _x: ArrayView1<f64>) -> ExtReal {
        ExtReal::Finite(0.0)
    }

    fn prox(&self, x: ArrayView1<f64>, _step: f64) -> Point {
        x.to_owned()
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }

    fn subdifferential_gap(&self, _y: ArrayView1<f64>, g: ArrayView1<f64>) -> Option<f64> {
        Some(g.iter().fold(0.0, |m, gi| m.max(gi.abs())))
    }
}

/// `h = weight * |.|_1`.
#[derive(Debug, Clone, Copy)]
pub struct L1Norm {
    weight: f64,
}

impl L1Norm {
    pub fn new(weight: f64) -> Self {
        assert!(weight >= 0.0 && weight.is_finite(), "l1 weight must be finite and >= 0");
        L1Norm { weight }
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }
}

fn l1_subgradient_gap(weight: f64, y: f64, g: f64) -> f64 {
    if y > 0.0 {
        (g - weight).abs()
    } else if y < 0.0 {
        (g + weight).abs()
    } else {
        (g.abs() - weight).max(0.0)
    }
}

impl ProxOracle for L1Norm {
    fn value(&self, x: ArrayView1<f64>) -> ExtReal {
        ExtReal::Finite(self.weight * x.iter().map(|v| v.abs()).sum::<f64>())
    }

    fn prox(&self, x: ArrayView1<f64>, step: f64) -> Point {
        prox_soft_threshold(x, self.weight, step)
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }

    fn subdifferential_gap(&self, y: ArrayView1<f64>, g: ArrayView1<f64>) -> Option<f64> {
        Some(
            y.iter()
                .zip(g.iter())
                .fold(0.0, |m, (&yi, &gi)| m.max(l1_subgradient_gap(self.weight, yi, gi))),
        )
    }
}

/// `h = l1 |.|_1 + (l2/2) |.|^2`, which is `l2`-convex.
#[derive(Debug, Clone, Copy)]
pub struct ElasticNetPenalty {
    l1: f64,
    l2: f64,
}

impl ElasticNetPenalty {
    pub fn new(l1: f64, l2: f64) -> Self {
        assert!(l1 >= 0.0 && l1.is_finite(), "l1 weight must be finite and >= 0");
        assert!(l2 >= 0.0 && l2.is_finite(), "l2 weight must be finite and >= 0");
        ElasticNetPenalty { l1, l2 }
    }
}

impl ProxOracle for ElasticNetPenalty {
    fn value(&self, x: ArrayView1<f64>) -> ExtReal {
        let (a, q) = x.iter().fold((0.0, 0.0), |(a, q), v| (a + v.abs(), q + v * v));
        ExtReal::Finite(self.l1 * a + 0.5 * self.l2 * q)
    }

    fn prox(&self, x: ArrayView1<f64>, step: f64) -> Point {
        // The two proxes compose for this pair.
        let shrunk = prox_soft_threshold(x, self.l1, step);
        prox_scaled_quadratic(shrunk.view(), self.l2, step)
    }

    fn strong_convexity(&self) -> f64 {
        self.l2
    }

    fn subdifferential_gap(&self, y: ArrayView1<f64>, g: ArrayView1<f64>) -> Option<f64> {
        Some(y.iter().zip(g.iter()).fold(0.0, |m, (&yi, &gi)| {
            m.max(l1_subgradient_gap(self.l1, yi, gi - self.l2 * yi))
        }))
    }
}

/// Indicator of the box `[lo, hi]`.
#[derive(Debug, Clone)]
pub struct BoxIndicator {
    lo: Array1<f64>,
    hi: Array1<f64>,
}

impl BoxIndicator {
    pub fn new(lo: Array1<f64>, hi: Array1<f64>) -> Result<Self> {
        check_dim(lo.len(), hi.len())?;
        if let Some(i) = lo.iter().zip(hi.iter()).position(|(l, h)| !(l <= h)) {
            return Err(Error::InvalidArgument(format!("box has lo > hi in component {i}")));
        }
        Ok(BoxIndicator { lo, hi })
    }

    pub fn lo(&self) -> ArrayView1<'_, f64> {
        self.lo.view()
    }

    pub fn hi(&self) -> ArrayView1<'_, f64> {
        self.hi.view()
    }
}

impl ProxOracle for BoxIndicator {
    fn value(&self, x: ArrayView1<f64>) -> ExtReal {
        let inside = Zip::from(x).and(&self.lo).and(&self.hi).all(|&xi, &l, &h| l <= xi && xi <= h);
        if inside {
            ExtReal::Finite(0.0)
        } else {
            ExtReal::PosInfinity
        }
    }

    fn prox(&self, x: ArrayView1<f64>, _step: f64) -> Point {
        clamp(x, self.lo.view(), self.hi.view())
    }

    fn strong_convexity(&self) -> f64 {
        0.0
    }

    fn is_indicator(&self) -> bool {
        true
    }

    /// Normal cone of the box: zero inside, one-sided at active bounds.
    fn subdifferential_gap(&self, y: ArrayView1<f64>, g: ArrayView1<f64>) -> Option<f64> {
        let mut worst: f64 = 0.0;
        for i in 0..y.len() {
            let (yi, gi, l, h) = (y[i], g[i], self.lo[i], self.hi[i]);
            let gap = if l == h {
                0.0
            } else if yi <= l {
                gi.max(0.0)
            } else if yi >= h {
                (-gi).max(0.0)
            } else {
                gi.abs()
            };
            worst = worst.max(gap);
        }
        Some(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    fn scalar_soft(x: f64, w: f64, t: f64) -> f64 {
        prox_soft_threshold(array![x].view(), w, t)[0]
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(scalar_soft(2.0, 1.0, 1.0), 1.0);
        assert_eq!(scalar_soft(-0.5, 1.0, 1.0), 0.0);
        assert!((scalar_soft(0.3, 0.7, 0.2) - 0.16).abs() < 1e-15);
        assert_eq!(scalar_soft(-3.0, 1.0, 0.5), -2.5);
    }

    #[test]
    fn box_examples() {
        let lo = array![0.0, 0.0];
        let hi = array![1.0, 1.0];
        let inside = array![0.25, 0.75];
        assert_eq!(prox_box(inside.view(), lo.view(), hi.view()).unwrap(), inside);
        assert_eq!(prox_box(array![2.0, -3.0].view(), lo.view(), hi.view()).unwrap(), array![1.0, 0.0]);
    }

    #[test]
    fn inverted_box_is_invalid() {
        let r = prox_box(array![0.0].view(), array![1.0].view(), array![0.0].view());
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
        assert!(BoxIndicator::new(array![1.0, 0.0], array![2.0, -1.0]).is_err());
    }

    #[test]
    fn scaled_quadratic_examples() {
        let x = array![2.0, -1.0];
        assert_eq!(prox_scaled_quadratic(x.view(), 0.0, 3.0), x);
        assert_eq!(prox_scaled_quadratic(array![2.0].view(), 1.0, 1.0)[0], 1.0);
        let far = prox_scaled_quadratic(array![5.0, -7.0].view(), 1e12, 1.0);
        assert!(far.iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn subdifferential_gaps() {
        let l1 = L1Norm::new(0.5);
        let y = array![1.0, -2.0, 0.0];
        assert_eq!(l1.subdifferential_gap(y.view(), array![0.5, -0.5, 0.3].view()), Some(0.0));
        let gap = l1.subdifferential_gap(y.view(), array![0.5, -0.5, 0.7].view()).unwrap();
        assert!((gap - 0.2).abs() < 1e-15);

        let b = BoxIndicator::new(array![0.0, 0.0], array![1.0, 1.0]).unwrap();
        let y = array![0.0, 1.0];
        assert_eq!(b.subdifferential_gap(y.view(), array![-3.0, 2.0].view()), Some(0.0));
        assert_eq!(b.subdifferential_gap(y.view(), array![1.0, 0.0].view()), Some(1.0));
    }

    fn prox_optimality_holds(h: &dyn ProxOracle, x: &Point, t: f64, u: &Point) -> bool {
        let p = h.prox(x.view(), t);
        let obj = |z: &Point| h.value(z.view()).to_f64() + (z - x).dot(&(z - x)) / (2.0 * t);
        obj(&p) <= obj(u) + 1e-12 * (1.0 + obj(u).abs())
    }

    proptest! {
        #[test]
        fn prox_is_optimal_and_nonexpansive(
            x in proptest::collection::vec(-5.0f64..5.0, 4),
            z in proptest::collection::vec(-5.0f64..5.0, 4),
            u in proptest::collection::vec(-2.0f64..2.0, 4),
            t in 0.01f64..3.0,
        ) {
            let (x, z, u) = (Array1::from(x), Array1::from(z), Array1::from(u));
            let oracles: Vec<Box<dyn ProxOracle>> = vec![
                Box::new(ZeroFunction),
                Box::new(L1Norm::new(0.7)),
                Box::new(ElasticNetPenalty::new(0.3, 1.5)),
                Box::new(BoxIndicator::new(Array1::from_elem(4, -1.0), Array1::from_elem(4, 1.0)).unwrap()),
            ];
            for h in &oracles {
                prop_assert!(prox_optimality_holds(h.as_ref(), &x, t, &u));
                let (px, pz) = (h.prox(x.view(), t), h.prox(z.view(), t));
                prop_assert!((&px - &pz).dot(&(&px - &pz)).sqrt() <= (&x - &z).dot(&(&x - &z)).sqrt() + 1e-12);
                prop_assert!(h.value(px.view()).is_finite());
            }
        }
    }
}
