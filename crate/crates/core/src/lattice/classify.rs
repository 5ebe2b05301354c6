use num_rational::Ratio;
#[allow(unused_imports)]
use num_traits::Float;

/// The candidate isolated solution on the column `3x + a = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum IsolatedPoint {
    /// `a = 0`: the column is `x = 0`, which belongs to the line family.
    NotApplicable,
    /// `a ≠ 0, b = 0`: the column equation reduces to `(x + a)x² = 0`,
    /// which has no solution at `x = −a/3`.
    Absent,
    /// `a, b ≠ 0`: the point `(−a/3, −a²/(9b))`, checked by substitution.
    Present {
        x: (i128, i128),
        y: (i128, i128),
        on_curve: bool,
        integral: bool,
    },
}

/// Behaviour of one algebraic branch `y±(x)` far from the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BranchAsymptote {
    pub sign: i8,
    /// Abscissa magnitude at which the slope was sampled.
    pub probe_x: f64,
    /// `max(|y(±X)/(±X)| − 3^{−1/2})` over both directions.
    pub deviation: f64,
    /// Deviation at ten times the probe abscissa.
    pub deviation_far: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct CubicClassification {
    pub a: i64,
    pub b: i64,
    /// Whether the whole line `x = 0` solves the equation.
    pub line_family: bool,
    pub isolated_point: IsolatedPoint,
    pub branches: [BranchAsymptote; 2],
    /// Tolerance the branch slopes were held to.
    pub slope_tolerance: f64,
    /// True when both branches approach slopes `±3^{−1/2}` within tolerance,
    /// so neither can contain a rational-slope line.
    pub slopes_irrational: bool,
}

fn branch(a: f64, b: f64, x: f64, sign: f64) -> f64 {
    let root = (3.0 * x * x + 4.0 * a * x + a * a + b * b).sqrt();
    (-b * x + sign * x.abs() * root) / (3.0 * x + a)
}

fn slope_deviation(a: f64, b: f64, big: f64, sign: f64) -> f64 {
    let target = 3f64.sqrt().recip();
    [big, -big]
        .iter()
        .map(|&x| ((branch(a, b, x, sign) / x).abs() - target).abs())
        .fold(0.0, f64::max)
}

/// Solution families of `(x + a)(x² − y²) = 2(y + b)xy`.
///
/// Solving for y at fixed x gives `(3x + a)y² + 2bx·y − (x + a)x² = 0`, so off
/// the column `3x + a = 0` the solutions are the two branches
/// `y± = (−bx ± |x|·√(3x² + 4ax + a² + b²)) / (3x + a)`.
pub fn classify_cubic(a: i64, b: i64) -> CubicClassification {
    let isolated_point = if a == 0 {
        IsolatedPoint::NotApplicable
    } else if b == 0 {
        IsolatedPoint::Absent
    } else {
        let (ai, bi) = (a as i128, b as i128);
        let x = Ratio::new(-ai, 3);
        let y = Ratio::new(-ai * ai, 9 * bi);
        let lhs = (x + Ratio::from_integer(ai)) * (x * x - y * y);
        let rhs = Ratio::from_integer(2) * (y + Ratio::from_integer(bi)) * x * y;
        IsolatedPoint::Present {
            x: (*x.numer(), *x.denom()),
            y: (*y.numer(), *y.denom()),
            on_curve: lhs == rhs,
            integral: x.is_integer() && y.is_integer(),
        }
    };
    let (af, bf) = (a as f64, b as f64);
    let probe = 1e6 * af.abs().max(bf.abs()).max(1.0);
    let tol = 1e-6;
    let branches = [1.0, -1.0].map(|s| BranchAsymptote {
        sign: s as i8,
        probe_x: probe,
        deviation: slope_deviation(af, bf, probe, s),
        deviation_far: slope_deviation(af, bf, 10.0 * probe, s),
    });
    let slopes_irrational = branches.iter().all(|br| br.deviation <= tol && br.deviation_far <= br.deviation.max(1e-15));
    CubicClassification {
        a,
        b,
        line_family: a == 0,
        isolated_point,
        branches,
        slope_tolerance: tol,
        slopes_irrational,
    }
}
