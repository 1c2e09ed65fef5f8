//! Rasterization of simple shapes. A pixel `(x, y)` belongs to a shape when
//! its center `(x + 0.5, y + 0.5)` does.

use serde::{Deserialize, Serialize};

/// Rectangle `[x0, x1) x [y0, y1)` or closed disk, in pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    Rectangle { x0: f64, y0: f64, x1: f64, y1: f64 },
    Disk { cx: f64, cy: f64, radius: f64 },
}

impl Shape {
    #[inline]
    pub fn contains(&self, x: usize, y: usize) -> bool {
        let px = x as f64 + 0.5;
        let py = y as f64 + 0.5;
        match *self {
            Shape::Rectangle { x0, y0, x1, y1 } => px >= x0 && px < x1 && py >= y0 && py < y1,
            Shape::Disk { cx, cy, radius } => {
                let dx = px - cx;
                let dy = py - cy;
                dx * dx + dy * dy <= radius * radius
            }
        }
    }

    /// Bounding box `(x0, y0, x1, y1)`.
    pub fn bounds(&self) -> (f64, f64, f64, f64) {
        match *self {
            Shape::Rectangle { x0, y0, x1, y1 } => (x0, y0, x1, y1),
            Shape::Disk { cx, cy, radius } => (cx - radius, cy - radius, cx + radius, cy + radius),
        }
    }

    pub fn is_finite(&self) -> bool {
        let (a, b, c, d) = self.bounds();
        [a, b, c, d].iter().all(|v| v.is_finite())
    }

    /// Whether the bounding box lies inside a `width x height` image.
    pub fn fits_within(&self, width: usize, height: usize) -> bool {
        let (x0, y0, x1, y1) = self.bounds();
        self.is_finite() && x0 >= 0.0 && y0 >= 0.0 && x1 <= width as f64 && y1 <= height as f64 && x0 <= x1 && y0 <= y1
    }
}
