//! Coefficient rings usable inside graded tensors, vectors and series.

use std::fmt::Debug;

use crate::rat::Rat;

/// A unital associative coefficient ring whose nonzero elements are
/// homogeneous for the Z2 grading.
pub trait Coeff: Clone + PartialEq + Debug + Send + Sync {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_rat(q: Rat) -> Self;
    /// True only for an exactly known zero.
    fn is_zero(&self) -> bool;
    fn add_assign(&mut self, o: &Self);
    fn mul(&self, o: &Self) -> Self;
    fn scale(&self, q: &Rat) -> Self;
    /// Parity of a homogeneous element; zero is even.
    fn parity(&self) -> u8;
    /// `Some(q)` when the element is exactly `q·1`.
    fn as_scalar(&self) -> Option<Rat>;

    fn neg(&self) -> Self {
        self.scale(&Rat::int(-1))
    }

    fn add(&self, o: &Self) -> Self {
        let mut s = self.clone();
        s.add_assign(o);
        s
    }

    fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    /// `self += q * o`.
    fn add_scaled(&mut self, o: &Self, q: &Rat) {
        if !q.is_zero() {
            self.add_assign(&o.scale(q));
        }
    }
}

impl Coeff for Rat {
    fn zero() -> Rat {
        Rat::zero()
    }
    fn one() -> Rat {
        Rat::one()
    }
    fn from_rat(q: Rat) -> Rat {
        q
    }
    fn is_zero(&self) -> bool {
        Rat::is_zero(self)
    }
    fn add_assign(&mut self, o: &Rat) {
        *self = Rat::add(self, o);
    }
    fn mul(&self, o: &Rat) -> Rat {
        Rat::mul(self, o)
    }
    fn scale(&self, q: &Rat) -> Rat {
        Rat::mul(self, q)
    }
    fn parity(&self) -> u8 {
        0
    }
    fn as_scalar(&self) -> Option<Rat> {
        Some(self.clone())
    }
    fn neg(&self) -> Rat {
        Rat::neg(self)
    }
}
