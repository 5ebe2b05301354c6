//! Expansion of the resonance constraint under the half-shift substitution
//! `ξ₁ = x + ξ/2`, `η₁ = y + η/2` (so `ζ₂ = ζ/2 − (x, y)`).

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::{self, Write};
use core::ops::{Add, Mul, Neg, Sub};

use num_rational::Ratio;
use num_traits::{One, Signed, Zero};

pub type Rational = Ratio<i128>;

/// Variables in monomial exponent order.
pub const VARIABLES: [&str; 5] = ["ξ", "η", "τ", "x", "y"];

/// Exponents of ξ, η, τ, x, y.
pub type Monomial = [u8; 5];

/// A sparse polynomial with rational coefficients in ξ, η, τ, x, y.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Poly {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(c, [0; 5])
    }

    pub fn term(c: Rational, m: Monomial) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    /// The variable with index `i` in [`VARIABLES`].
    pub fn var(i: usize) -> Self {
        let mut m = [0; 5];
        m[i] = 1;
        Poly::term(Rational::one(), m)
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        let e = self.terms.entry(m).or_insert_with(Rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).copied().unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter().rev()
    }

    pub fn scale(&self, c: Rational) -> Self {
        let mut p = Poly::zero();
        for (m, v) in &self.terms {
            p.add_term(*m, *v * c);
        }
        p
    }

    pub fn pow(&self, k: u32) -> Self {
        (0..k).fold(Poly::constant(Rational::one()), |acc, _| &acc * self)
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &rhs.terms {
            p.add_term(*m, *c);
        }
        p
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(-Rational::one())
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self + &(-rhs)
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &rhs.terms {
                let mut m = *m1;
                for (e, d) in m.iter_mut().zip(m2) {
                    *e += d;
                }
                p.add_term(m, *c1 * *c2);
            }
        }
        p
    }
}

fn write_monomial(f: &mut impl Write, m: &Monomial) -> fmt::Result {
    let mut first = true;
    for (name, &e) in VARIABLES.iter().zip(m) {
        if e == 0 {
            continue;
        }
        if !first {
            f.write_char('·')?;
        }
        first = false;
        f.write_str(name)?;
        if e > 1 {
            write!(f, "^{e}")?;
        }
    }
    Ok(())
}

fn write_ratio(f: &mut impl Write, c: &Rational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let a = c.abs();
            let constant = *m == [0; 5];
            if !a.is_one() || constant {
                write_ratio(f, &a)?;
                if !constant {
                    f.write_char('·')?;
                }
            }
            write_monomial(f, m)?;
        }
        Ok(())
    }
}

fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// φ(p, s) = p³ − 3ps².
fn phase_poly(p: &Poly, s: &Poly) -> Poly {
    &p.pow(3) - &(&p.scale(q(3, 1)) * &s.pow(2))
}

/// `τ − φ(ζ₁) − φ(ζ − ζ₁)` with `ζ₁ = (x + ξ/2, y + η/2)`, fully expanded.
pub fn expanded_form() -> Poly {
    let (xi, eta, tau, x, y) = (Poly::var(0), Poly::var(1), Poly::var(2), Poly::var(3), Poly::var(4));
    let half = q(1, 2);
    let xi1 = &x + &xi.scale(half);
    let eta1 = &y + &eta.scale(half);
    let xi2 = &xi.scale(half) - &x;
    let eta2 = &eta.scale(half) - &y;
    &(&tau - &phase_poly(&xi1, &eta1)) - &phase_poly(&xi2, &eta2)
}

/// `τ − ¼ξ³ + (7/4)ξη² + 3ξ(x² − y²) − 6ηxy`, the reference form as displayed.
pub fn reference_form() -> Poly {
    let mut p = Poly::zero();
    p.add_term([0, 0, 1, 0, 0], q(1, 1));
    p.add_term([3, 0, 0, 0, 0], q(-1, 4));
    p.add_term([1, 2, 0, 0, 0], q(7, 4));
    p.add_term([1, 0, 0, 2, 0], q(3, 1));
    p.add_term([1, 0, 0, 0, 2], q(-3, 1));
    p.add_term([0, 1, 0, 1, 1], q(-6, 1));
    p
}

/// Monomial ξη².
pub const XI_ETA_SQ: Monomial = [1, 2, 0, 0, 0];

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct TermComparison {
    pub monomial: String,
    pub expanded: String,
    pub reference: String,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct KFormReport {
    pub substitution: String,
    pub expanded: String,
    pub reference: String,
    pub terms: Vec<TermComparison>,
    /// Coefficient of ξη² in the expansion, as `p/q`.
    pub xi_eta_sq_coefficient: String,
    pub reference_xi_eta_sq_coefficient: String,
    pub forms_agree: bool,
    pub summary: String,
}

fn ratio_string(c: &Rational) -> String {
    let mut s = String::new();
    let _ = write_ratio(&mut s, c);
    s
}

/// Expands the constraint and compares it term by term with the reference.
pub fn kform_report() -> KFormReport {
    let e = expanded_form();
    let r = reference_form();
    let mut monomials: Vec<Monomial> = e.terms.keys().chain(r.terms.keys()).copied().collect();
    monomials.sort_unstable();
    monomials.dedup();
    monomials.reverse();
    let terms: Vec<TermComparison> = monomials
        .iter()
        .map(|m| {
            let (ce, cr) = (e.coefficient(m), r.coefficient(m));
            let mut name = String::new();
            if *m == [0; 5] {
                name.push('1');
            } else {
                let _ = write_monomial(&mut name, m);
            }
            TermComparison { monomial: name, expanded: ratio_string(&ce), reference: ratio_string(&cr), agree: ce == cr }
        })
        .collect();
    let ce = e.coefficient(&XI_ETA_SQ);
    let cr = r.coefficient(&XI_ETA_SQ);
    let forms_agree = e == r;
    let mismatched: Vec<&str> = terms.iter().filter(|t| !t.agree).map(|t| t.monomial.as_str()).collect();
    let summary = alloc::format!(
        "expansion yields coefficient {} on ξ·η^2 (reference form: {}); {} of {} terms differ: {}",
        ratio_string(&ce),
        ratio_string(&cr),
        mismatched.len(),
        terms.len(),
        mismatched.join(", ")
    );
    KFormReport {
        substitution: String::from("ξ₁ = x + ξ/2, η₁ = y + η/2, ξ₂ = ξ/2 − x, η₂ = η/2 − y"),
        expanded: alloc::format!("{e}"),
        reference: alloc::format!("{r}"),
        terms,
        xi_eta_sq_coefficient: ratio_string(&ce),
        reference_xi_eta_sq_coefficient: ratio_string(&cr),
        forms_agree,
        summary,
    }
}
