use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Shape parameters of an analytic domain centred at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    Disk { radius: f64 },
    Rectangle { width: f64, height: f64 },
    /// `|x/a|^p + |y/b|^p < 1` with `p >= 2`.
    Superellipse { a: f64, b: f64, p: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bbox {
    pub min: [f64; 2],
    pub max: [f64; 2],
}

impl Bbox {
    pub fn contains(&self, p: [f64; 2]) -> bool {
        p[0] >= self.min[0] && p[0] <= self.max[0] && p[1] >= self.min[1] && p[1] <= self.max[1]
    }
}

/// A domain described by an exact signed distance function.
///
/// Erosion by `eps` is stored as a constant shift of the sdf, so
/// `{sdf < 0}` of the eroded domain is `{x : d(x) > eps}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticDomain {
    shape: Shape,
    center: [f64; 2],
    offset: f64,
}

impl AnalyticDomain {
    pub fn new(shape: Shape) -> Result<Self, GeometryError> {
        let ok = match shape {
            Shape::Disk { radius } => radius > 0.0 && radius.is_finite(),
            Shape::Rectangle { width, height } => {
                width > 0.0 && height > 0.0 && width.is_finite() && height.is_finite()
            }
            Shape::Superellipse { a, b, p } => {
                a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() && p >= 2.0 && p.is_finite()
            }
        };
        if !ok {
            return Err(GeometryError::InvalidShape(shape));
        }
        Ok(Self { shape, center: [0.0, 0.0], offset: 0.0 })
    }

    pub fn disk(radius: f64) -> Self {
        Self::new(Shape::Disk { radius }).expect("disk radius must be positive")
    }

    pub fn rectangle(width: f64, height: f64) -> Self {
        Self::new(Shape::Rectangle { width, height }).expect("rectangle sides must be positive")
    }

    pub fn superellipse(a: f64, b: f64, p: f64) -> Self {
        Self::new(Shape::Superellipse { a, b, p }).expect("superellipse needs a, b > 0 and p >= 2")
    }

    pub fn with_center(mut self, center: [f64; 2]) -> Self {
        self.center = center;
        self
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    /// Total erosion applied so far.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    pub fn base_shape(&self) -> Shape {
        self.shape
    }

    /// The shape whose zero sublevel set equals this domain.
    ///
    /// Disks and rectangles shrink in closed form; a superellipse keeps its
    /// base parameters and must be read together with [`Self::offset`].
    pub fn kind(&self) -> Shape {
        let e = self.offset;
        match self.shape {
            Shape::Disk { radius } => Shape::Disk { radius: radius - e },
            Shape::Rectangle { width, height } => Shape::Rectangle {
                width: width - 2.0 * e,
                height: height - 2.0 * e,
            },
            s @ Shape::Superellipse { .. } => s,
        }
    }

    pub fn sdf(&self, p: [f64; 2]) -> f64 {
        let q = [p[0] - self.center[0], p[1] - self.center[1]];
        shape_sdf(&self.shape, q) + self.offset
    }

    /// Bounding box of the uneroded shape; it contains every eroded domain too.
    pub fn bbox(&self) -> Bbox {
        let (hx, hy) = match self.shape {
            Shape::Disk { radius } => (radius, radius),
            Shape::Rectangle { width, height } => (0.5 * width, 0.5 * height),
            Shape::Superellipse { a, b, .. } => (a, b),
        };
        Bbox {
            min: [self.center[0] - hx, self.center[1] - hy],
            max: [self.center[0] + hx, self.center[1] + hy],
        }
    }

    pub fn inradius(&self) -> f64 {
        let r = match self.shape {
            Shape::Disk { radius } => radius,
            Shape::Rectangle { width, height } => 0.5 * width.min(height),
            // p >= 2 keeps |c(t)| >= min(a, b) along the boundary.
            Shape::Superellipse { a, b, .. } => a.min(b),
        };
        r - self.offset
    }

    /// `Ω_eps = {x in Ω : d(x) > eps}`.
    pub fn erode(&self, eps: f64) -> Result<Self, GeometryError> {
        let inradius = self.inradius();
        if !(eps < inradius) {
            return Err(GeometryError::EmptyErosion { eps, inradius });
        }
        if !(eps > 0.0) {
            return Err(GeometryError::InvalidErosion(eps));
        }
        Ok(Self { offset: self.offset + eps, ..*self })
    }

    /// Outward unit normal of the level set through `p`, by central differences of the sdf.
    pub fn normal(&self, p: [f64; 2]) -> [f64; 2] {
        let b = self.bbox();
        let eta = 1e-7 * (b.max[0] - b.min[0]).max(b.max[1] - b.min[1]);
        let gx = self.sdf([p[0] + eta, p[1]]) - self.sdf([p[0] - eta, p[1]]);
        let gy = self.sdf([p[0], p[1] + eta]) - self.sdf([p[0], p[1] - eta]);
        let n = gx.hypot(gy);
        if n > 0.0 {
            [gx / n, gy / n]
        } else {
            [1.0, 0.0]
        }
    }
}

fn shape_sdf(shape: &Shape, q: [f64; 2]) -> f64 {
    match *shape {
        Shape::Disk { radius } => q[0].hypot(q[1]) - radius,
        Shape::Rectangle { width, height } => {
            let dx = q[0].abs() - 0.5 * width;
            let dy = q[1].abs() - 0.5 * height;
            let outside = dx.max(0.0).hypot(dy.max(0.0));
            outside + dx.max(dy).min(0.0)
        }
        Shape::Superellipse { a, b, p } => superellipse_sdf(a, b, p, q),
    }
}

const SAMPLES: usize = 256;

fn superellipse_point(a: f64, b: f64, p: f64, t: f64) -> [f64; 2] {
    let e = 2.0 / p;
    [a * t.cos().max(0.0).powf(e), b * t.sin().max(0.0).powf(e)]
}

// Distance to the boundary curve in the first quadrant (the shape is symmetric
// and convex, so the closest point of a first-quadrant query lies there too).
fn superellipse_sdf(a: f64, b: f64, p: f64, q: [f64; 2]) -> f64 {
    let q = [q[0].abs(), q[1].abs()];
    let dist2 = |t: f64| {
        let c = superellipse_point(a, b, p, t);
        (c[0] - q[0]).powi(2) + (c[1] - q[1]).powi(2)
    };
    let step = std::f64::consts::FRAC_PI_2 / SAMPLES as f64;
    let mut best = 0;
    let mut best_val = f64::INFINITY;
    for k in 0..=SAMPLES {
        let v = dist2(k as f64 * step);
        if v < best_val {
            best_val = v;
            best = k;
        }
    }
    let mut lo = (best as f64 - 1.0).max(0.0) * step;
    let mut hi = ((best + 1).min(SAMPLES)) as f64 * step;
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - g * (hi - lo);
    let mut x2 = lo + g * (hi - lo);
    let mut f1 = dist2(x1);
    let mut f2 = dist2(x2);
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = dist2(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = dist2(x2);
        }
    }
    let d = best_val.min(f1).min(f2).sqrt();
    let level = (q[0] / a).powf(p) + (q[1] / b).powf(p);
    if level < 1.0 {
        -d
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_sdf_values() {
        let d = AnalyticDomain::disk(1.0);
        assert_eq!(d.sdf([0.0, 0.0]), -1.0);
        assert!((d.sdf([3.0, 4.0]) - 4.0).abs() < 1e-15);
    }

    #[test]
    fn rectangle_sdf_inside_and_corner() {
        let r = AnalyticDomain::rectangle(2.0, 1.0);
        assert_eq!(r.sdf([0.0, 0.0]), -0.5);
        assert!((r.sdf([0.9, 0.0]) + 0.1).abs() < 1e-15);
        assert!((r.sdf([2.0, 1.5]) - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn superellipse_with_p2_is_ellipse_like() {
        // p = 2 and a = b is a disk.
        let s = AnalyticDomain::superellipse(1.0, 1.0, 2.0);
        for &(x, y) in &[(0.0, 0.0), (0.3, 0.2), (1.5, -0.7), (-0.2, 0.9)] {
            let exact = f64::hypot(x, y) - 1.0;
            assert!((s.sdf([x, y]) - exact).abs() < 1e-10, "({x},{y})");
        }
    }

    #[test]
    fn superellipse_axis_distance() {
        let s = AnalyticDomain::superellipse(2.0, 1.0, 4.0);
        assert!((s.sdf([0.0, 0.0]) + 1.0).abs() < 1e-10);
        assert!((s.sdf([2.5, 0.0]) - 0.5).abs() < 1e-10);
        assert_eq!(s.inradius(), 1.0);
    }

    #[test]
    fn erosion_examples() {
        let d = AnalyticDomain::disk(1.0).erode(0.1).unwrap();
        assert_eq!(d.kind(), Shape::Disk { radius: 0.9 });
        let r = AnalyticDomain::rectangle(2.0, 1.0).erode(0.25).unwrap();
        assert_eq!(r.kind(), Shape::Rectangle { width: 1.5, height: 0.5 });
        assert!(matches!(
            AnalyticDomain::disk(1.0).erode(1.5),
            Err(GeometryError::EmptyErosion { .. })
        ));
    }

    #[test]
    fn erosion_shifts_sdf() {
        let base = AnalyticDomain::superellipse(1.5, 1.0, 3.0);
        let e = base.erode(0.2).unwrap();
        for &p in &[[0.1, 0.2], [1.4, 0.0], [2.0, 2.0]] {
            assert_eq!(e.sdf(p), base.sdf(p) + 0.2);
        }
    }

    #[test]
    fn invalid_shapes_rejected() {
        assert!(AnalyticDomain::new(Shape::Disk { radius: -1.0 }).is_err());
        assert!(AnalyticDomain::new(Shape::Superellipse { a: 1.0, b: 1.0, p: 1.5 }).is_err());
    }

    #[test]
    fn normal_of_disk_is_radial() {
        let d = AnalyticDomain::disk(1.0);
        let n = d.normal([0.6, 0.8]);
        assert!((n[0] - 0.6).abs() < 1e-6 && (n[1] - 0.8).abs() < 1e-6);
    }
}
