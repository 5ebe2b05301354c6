use num_integer::Roots;

use crate::error::{Error, Result};

/// A lattice or half-lattice point, stored by its doubled coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct HalfPoint {
    pub x2: i64,
    pub y2: i64,
}

impl HalfPoint {
    pub const fn integer(x: i64, y: i64) -> Self {
        HalfPoint { x2: 2 * x, y2: 2 * y }
    }

    /// The point `(x2/2, y2/2)`.
    pub const fn from_doubled(x2: i64, y2: i64) -> Self {
        HalfPoint { x2, y2 }
    }

    pub const fn is_integral(self) -> bool {
        self.x2 % 2 == 0 && self.y2 % 2 == 0
    }

    pub fn as_f64(self) -> (f64, f64) {
        (self.x2 as f64 / 2.0, self.y2 as f64 / 2.0)
    }
}

/// A finite counting window in ℤ².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum Window {
    /// Closed max-norm ball `2·max(|x−cx|, |y−cy|) ≤ side`.
    Square { center: (i64, i64), side: i64 },
    /// Closed Euclidean ball `|p − center| ≤ radius`.
    Disc { center: HalfPoint, radius: i64 },
}

/// Coordinates beyond this magnitude are rejected so that every slice
/// computation stays comfortably inside `i128`.
pub const COORD_LIMIT: i64 = 1 << 40;

impl Window {
    pub fn square(cx: i64, cy: i64, side: i64) -> Result<Self> {
        let w = Window::Square { center: (cx, cy), side };
        w.validate()?;
        Ok(w)
    }

    pub fn disc(center: HalfPoint, radius: i64) -> Result<Self> {
        let w = Window::Disc { center, radius };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let (size, far) = match *self {
            Window::Square { center: (cx, cy), side } => (side, cx.abs().max(cy.abs())),
            Window::Disc { center, radius } => (radius, center.x2.abs().max(center.y2.abs()) / 2),
        };
        if size < 1 {
            return Err(Error::InvalidWindow("size must be at least 1"));
        }
        if size > COORD_LIMIT || far > COORD_LIMIT {
            return Err(Error::InvalidWindow("window extends beyond the supported range"));
        }
        Ok(())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Window::Square { .. } => "square",
            Window::Disc { .. } => "disc",
        }
    }

    /// Side length for squares, radius for discs.
    pub fn size(&self) -> i64 {
        match *self {
            Window::Square { side, .. } => side,
            Window::Disc { radius, .. } => radius,
        }
    }

    /// Inclusive range of x over which the window is nonempty.
    pub fn x_range(&self) -> (i64, i64) {
        match *self {
            Window::Square { center: (cx, _), side } => (cx - side / 2, cx + side / 2),
            Window::Disc { center, radius } => {
                // |2x − x2| ≤ 2R
                (ceil_half(center.x2 - 2 * radius), floor_half(center.x2 + 2 * radius))
            }
        }
    }

    /// Inclusive range of y inside the window at abscissa `x`.
    pub fn y_range(&self, x: i64) -> Option<(i64, i64)> {
        match *self {
            Window::Square { center: (cx, cy), side } => {
                let h = side / 2;
                ((x - cx).abs() <= h).then_some((cy - h, cy + h))
            }
            Window::Disc { center, radius } => {
                let dx = (2 * x - center.x2) as i128;
                let rem = 4 * (radius as i128) * (radius as i128) - dx * dx;
                if rem < 0 {
                    return None;
                }
                let s = rem.sqrt() as i64;
                Some((ceil_half(center.y2 - s), floor_half(center.y2 + s)))
            }
        }
    }

    pub fn contains(&self, x: i64, y: i64) -> bool {
        match self.y_range(x) {
            Some((lo, hi)) => lo <= y && y <= hi,
            None => false,
        }
    }

    /// The same window translated by `(dx, dy)`.
    pub fn shifted(&self, dx: i64, dy: i64) -> Self {
        match *self {
            Window::Square { center: (cx, cy), side } => Window::Square { center: (cx + dx, cy + dy), side },
            Window::Disc { center, radius } => Window::Disc {
                center: HalfPoint::from_doubled(center.x2 + 2 * dx, center.y2 + 2 * dy),
                radius,
            },
        }
    }

    /// Number of lattice points in the window.
    pub fn lattice_points(&self) -> u64 {
        let (lo, hi) = self.x_range();
        (lo..=hi)
            .filter_map(|x| self.y_range(x))
            .map(|(a, b)| if b >= a { (b - a + 1) as u64 } else { 0 })
            .sum()
    }
}

fn floor_half(v: i64) -> i64 {
    v.div_euclid(2)
}

fn ceil_half(v: i64) -> i64 {
    -(-v).div_euclid(2)
}
