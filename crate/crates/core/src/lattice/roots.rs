use num_integer::Roots;

/// Integer solutions of `A·y² + B·y + C = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IntRoots {
    None,
    One(i128),
    Two(i128, i128),
    /// The polynomial vanishes identically.
    All,
}

impl IntRoots {
    /// Number of roots in the closed interval `[lo, hi]`.
    pub fn count_in(self, lo: i128, hi: i128) -> u64 {
        if hi < lo {
            return 0;
        }
        let inside = |y: i128| (lo <= y && y <= hi) as u64;
        match self {
            IntRoots::None => 0,
            IntRoots::One(y) => inside(y),
            IntRoots::Two(y0, y1) => inside(y0) + inside(y1),
            IntRoots::All => (hi - lo + 1) as u64,
        }
    }

    pub fn for_each(self, mut f: impl FnMut(i128)) {
        match self {
            IntRoots::One(y) => f(y),
            IntRoots::Two(a, b) => {
                f(a);
                f(b)
            }
            IntRoots::None | IntRoots::All => {}
        }
    }
}

/// Exact integer roots of a quadratic (or lower-degree) polynomial.
///
/// Returns `None` when an intermediate product overflows `i128`.
pub fn integer_roots(a: i128, b: i128, c: i128) -> Option<IntRoots> {
    if a == 0 {
        if b == 0 {
            return Some(if c == 0 { IntRoots::All } else { IntRoots::None });
        }
        return Some(if c % b == 0 { IntRoots::One(-c / b) } else { IntRoots::None });
    }
    let disc = b.checked_mul(b)?.checked_sub(a.checked_mul(c)?.checked_mul(4)?)?;
    if disc < 0 {
        return Some(IntRoots::None);
    }
    let s = disc.sqrt();
    if s * s != disc {
        return Some(IntRoots::None);
    }
    let den = 2 * a;
    let root = |num: i128| (num % den == 0).then(|| num / den);
    Some(match (root(-b + s), root(-b - s)) {
        (Some(y0), Some(y1)) if y0 == y1 => IntRoots::One(y0),
        (Some(y0), Some(y1)) => IntRoots::Two(y0, y1),
        (Some(y), None) | (None, Some(y)) => IntRoots::One(y),
        (None, None) => IntRoots::None,
    })
}
