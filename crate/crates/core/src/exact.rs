//! Exact sums of floating-point products, kept as non-overlapping
//! expansions, and correctly rounded quotients of such sums.
//!
//! Interaction coefficients and scaling factors are ratios of rate sums.
//! Evaluating them exactly and rounding once makes them depend only on the
//! real values of the inputs: summation order, species order and exact
//! rescaling of all rates cannot change a single bit.
//!
//! Products are split with Dekker's method and are exact as long as no
//! intermediate overflows or underflows.

use std::cmp::Ordering;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let err = (a - (s - bb)) + (b - bb);
    (s, err)
}

const SPLITTER: f64 = 134_217_729.0; // 2^27 + 1

#[inline]
fn split(a: f64) -> (f64, f64) {
    let c = SPLITTER * a;
    let big = c - a;
    let hi = c - big;
    (hi, a - hi)
}

#[inline]
fn two_product(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let (ahi, alo) = split(a);
    let (bhi, blo) = split(b);
    let err = alo * blo - (((p - ahi * bhi) - alo * bhi) - ahi * blo);
    (p, err)
}

/// An exact sum, stored as components of increasing magnitude that do not
/// overlap. Zero components are dropped, so the empty expansion is zero.
#[derive(Debug, Clone, Default)]
pub struct Expansion {
    terms: Vec<f64>,
}

impl Expansion {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_f64(x: f64) -> Self {
        let mut e = Self::new();
        e.add(x);
        e
    }

    pub fn clear(&mut self) {
        self.terms.clear();
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds one double exactly.
    pub fn add(&mut self, b: f64) {
        if b == 0.0 {
            return;
        }
        let mut q = b;
        let mut w = 0;
        for i in 0..self.terms.len() {
            let (s, err) = two_sum(q, self.terms[i]);
            q = s;
            if err != 0.0 {
                self.terms[w] = err;
                w += 1;
            }
        }
        self.terms.truncate(w);
        if q != 0.0 {
            self.terms.push(q);
        }
    }

    /// Adds `a * b` exactly.
    pub fn add_product(&mut self, a: f64, b: f64) {
        let (p, err) = two_product(a, b);
        self.add(err);
        self.add(p);
    }

    pub fn add_expansion(&mut self, other: &Expansion) {
        for &t in &other.terms {
            self.add(t);
        }
    }

    pub fn sub_expansion(&mut self, other: &Expansion) {
        for &t in &other.terms {
            self.add(-t);
        }
    }

    /// Adds `other * b` exactly.
    pub fn add_scaled(&mut self, other: &Expansion, b: f64) {
        for &t in &other.terms {
            self.add_product(t, b);
        }
    }

    pub fn signum(&self) -> Ordering {
        // The largest component dominates the sum of the rest.
        match self.terms.last() {
            None => Ordering::Equal,
            Some(&t) if t > 0.0 => Ordering::Greater,
            Some(_) => Ordering::Less,
        }
    }

    pub fn abs(&self) -> Expansion {
        if self.signum() == Ordering::Less {
            self.negated()
        } else {
            self.clone()
        }
    }

    pub fn negated(&self) -> Expansion {
        Expansion {
            terms: self.terms.iter().map(|t| -t).collect(),
        }
    }

    pub fn cmp_exact(&self, other: &Expansion) -> Ordering {
        let mut d = self.clone();
        d.sub_expansion(other);
        d.signum()
    }

    /// The larger of two expansions, by exact value.
    pub fn max<'a>(&'a self, other: &'a Expansion) -> &'a Expansion {
        if self.cmp_exact(other) == Ordering::Less {
            other
        } else {
            self
        }
    }

    fn approx(&self) -> f64 {
        self.terms.iter().sum()
    }

    /// The exact value rounded to the nearest double.
    pub fn to_f64(&self) -> f64 {
        let one = Expansion::from_f64(1.0);
        if self.signum() == Ordering::Less {
            -quotient(&self.negated(), &one)
        } else {
            quotient(self, &one)
        }
    }
}

/// `numer - q * denom`, exactly.
fn residual(numer: &Expansion, denom: &Expansion, q: f64) -> Expansion {
    let mut r = numer.clone();
    r.add_scaled(denom, -q);
    r
}

/// `numer / denom` rounded to nearest (ties to even). Requires `numer >= 0`
/// and `denom > 0`.
pub fn quotient(numer: &Expansion, denom: &Expansion) -> f64 {
    debug_assert!(numer.signum() != Ordering::Less);
    debug_assert!(denom.signum() == Ordering::Greater);
    if numer.is_zero() {
        return 0.0;
    }
    let mut q = numer.approx() / denom.approx();
    if !(q.is_finite() && q > 0.0) {
        q = f64::MIN_POSITIVE;
    }
    // Bracket the exact quotient x as q <= x < next_up(q).
    while residual(numer, denom, q).signum() == Ordering::Less {
        q = q.next_down();
    }
    loop {
        let up = q.next_up();
        if residual(numer, denom, up).signum() == Ordering::Less {
            break;
        }
        q = up;
    }
    let up = q.next_up();
    // x - q versus up - x, i.e. r(q) + r(up) against zero.
    let mut d = residual(numer, denom, q);
    d.add_expansion(&residual(numer, denom, up));
    match d.signum() {
        Ordering::Less => q,
        Ordering::Greater => up,
        Ordering::Equal => {
            if q.to_bits() & 1 == 0 {
                q
            } else {
                up
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cancellation_is_exact() {
        let mut e = Expansion::new();
        e.add(1e100);
        e.add(1.0);
        e.add(-1e100);
        assert_eq!(e.to_f64(), 1.0);
        e.add(-1.0);
        assert!(e.is_zero());
    }

    #[test]
    fn products_are_exact() {
        let a = 0.1;
        let b = 3.0;
        let mut e = Expansion::new();
        e.add_product(a, b);
        e.add(-(a * b));
        // a*b in doubles differs from the exact product by a tiny residue.
        assert_eq!(e.to_f64(), a.mul_add(b, -(a * b)));
    }

    #[test]
    fn simple_quotients() {
        let q = |n: f64, d: f64| quotient(&Expansion::from_f64(n), &Expansion::from_f64(d));
        assert_eq!(q(1.0, 3.0), 1.0 / 3.0);
        assert_eq!(q(2.0, 2.0), 1.0);
        assert_eq!(q(0.0, 5.0), 0.0);
        assert_eq!(q(1.0, 10.0), 0.1);
    }

    #[test]
    fn compare() {
        let a = Expansion::from_f64(2.0);
        let mut b = Expansion::from_f64(2.0);
        b.add(1e-300);
        assert_eq!(a.cmp_exact(&b), Ordering::Less);
        assert_eq!(b.max(&a).to_f64(), 2.0);
        assert_eq!(a.negated().abs().to_f64(), 2.0);
    }

    proptest! {
        #[test]
        fn single_division_matches_hardware(n in 1e-6f64..1e6, d in 1e-6f64..1e6) {
            prop_assert_eq!(quotient(&Expansion::from_f64(n), &Expansion::from_f64(d)), n / d);
        }

        #[test]
        fn order_and_power_of_two_scale_invariant(xs in proptest::collection::vec(-1e3f64..1e3, 1..20), k in -20i32..20) {
            let mut fwd = Expansion::new();
            let mut rev = Expansion::new();
            let mut scaled = Expansion::new();
            let s = 2f64.powi(k);
            for &x in &xs {
                fwd.add_product(x, 0.3);
            }
            for &x in xs.iter().rev() {
                rev.add_product(x, 0.3);
                scaled.add_product(x * s, 0.3);
            }
            prop_assert_eq!(fwd.to_f64(), rev.to_f64());
            let mut d = Expansion::from_f64(7.0);
            d.add(1e-9);
            let mut ds = Expansion::from_f64(7.0 * s);
            ds.add(1e-9 * s);
            let (a, b) = (fwd.abs(), scaled.abs());
            if !a.is_zero() {
                prop_assert_eq!(quotient(&a, &d), quotient(&b, &ds));
            }
        }
    }
}
