//! Short Weierstrass curves `y^2 = x^3 + a4 x + a6` over `F_p` and the
//! affine chord-tangent group law.

use rand::Rng;

use super::field::{Fe, Fp};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Point {
    Infinity,
    Affine { x: Fe, y: Fe },
}

impl Point {
    pub fn is_infinity(&self) -> bool {
        matches!(self, Point::Infinity)
    }

    pub fn x(&self) -> Option<Fe> {
        match self {
            Point::Infinity => None,
            Point::Affine { x, .. } => Some(*x),
        }
    }
}

/// A curve with good reduction at `p`. `4 a4^3 + 27 a6^2 != 0` in `F_p`.
#[derive(Clone, Debug)]
pub struct ReducedCurve {
    pub field: Fp,
    pub a4: Fe,
    pub a6: Fe,
}

impl ReducedCurve {
    /// Returns `None` if the reduction is singular.
    pub fn new(p: u64, a4: i64, a6: i64) -> Option<Self> {
        let field = Fp::new(p);
        let a4 = field.from_i64(a4);
        let a6 = field.from_i64(a6);
        Self::from_field(field, a4, a6)
    }

    pub fn from_field(field: Fp, a4: Fe, a6: Fe) -> Option<Self> {
        let f = &field;
        let disc = f.add(
            f.mul(f.from_u64(4), f.mul(a4, f.sqr(a4))),
            f.mul(f.from_u64(27), f.sqr(a6)),
        );
        if disc.is_zero() {
            return None;
        }
        Some(ReducedCurve { field, a4, a6 })
    }

    #[inline]
    pub fn p(&self) -> u64 {
        self.field.p()
    }

    /// The quadratic twist by the field's smallest non-residue `d`:
    /// `y^2 = x^3 + d^2 a4 x + d^3 a6`.
    pub fn twist(&self) -> ReducedCurve {
        let f = &self.field;
        let d = f.nonresidue();
        let d2 = f.sqr(d);
        ReducedCurve {
            field: self.field.clone(),
            a4: f.mul(d2, self.a4),
            a6: f.mul(f.mul(d2, d), self.a6),
        }
    }

    /// `x^3 + a4 x + a6`.
    #[inline]
    pub fn rhs(&self, x: Fe) -> Fe {
        let f = &self.field;
        f.add(f.mul(f.add(f.sqr(x), self.a4), x), self.a6)
    }

    pub fn point(&self, x: u64, y: u64) -> Option<Point> {
        let f = &self.field;
        let (x, y) = (f.from_u64(x), f.from_u64(y));
        (f.sqr(y) == self.rhs(x)).then_some(Point::Affine { x, y })
    }

    pub fn contains(&self, pt: &Point) -> bool {
        match *pt {
            Point::Infinity => true,
            Point::Affine { x, y } => self.field.sqr(y) == self.rhs(x),
        }
    }

    pub fn neg(&self, pt: &Point) -> Point {
        match *pt {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => Point::Affine {
                x,
                y: self.field.neg(y),
            },
        }
    }

    pub fn double(&self, pt: &Point) -> Point {
        let f = &self.field;
        match *pt {
            Point::Infinity => Point::Infinity,
            Point::Affine { x, y } => {
                if y.is_zero() {
                    return Point::Infinity;
                }
                let three_x2 = f.mul(f.from_u64(3), f.sqr(x));
                let num = f.add(three_x2, self.a4);
                let den = f.add(y, y);
                let lambda = f.mul(num, f.inv(den).expect("nonzero"));
                let x3 = f.sub(f.sqr(lambda), f.add(x, x));
                let y3 = f.sub(f.mul(lambda, f.sub(x, x3)), y);
                Point::Affine { x: x3, y: y3 }
            }
        }
    }

    pub fn add(&self, a: &Point, b: &Point) -> Point {
        let f = &self.field;
        match (*a, *b) {
            (Point::Infinity, _) => *b,
            (_, Point::Infinity) => *a,
            (Point::Affine { x: x1, y: y1 }, Point::Affine { x: x2, y: y2 }) => {
                if x1 == x2 {
                    if y1 == y2 {
                        return self.double(a);
                    }
                    return Point::Infinity;
                }
                let lambda = f.mul(f.sub(y2, y1), f.inv(f.sub(x2, x1)).expect("nonzero"));
                let x3 = f.sub(f.sub(f.sqr(lambda), x1), x2);
                let y3 = f.sub(f.mul(lambda, f.sub(x1, x3)), y1);
                Point::Affine { x: x3, y: y3 }
            }
        }
    }

    pub fn sub(&self, a: &Point, b: &Point) -> Point {
        self.add(a, &self.neg(b))
    }

    /// `k * pt` by left-to-right double-and-add.
    pub fn mul(&self, k: u64, pt: &Point) -> Point {
        let mut acc = Point::Infinity;
        if k == 0 {
            return acc;
        }
        for bit in (0..64 - k.leading_zeros()).rev() {
            acc = self.double(&acc);
            if (k >> bit) & 1 == 1 {
                acc = self.add(&acc, pt);
            }
        }
        acc
    }

    /// Uniformly random affine point with a uniformly chosen sign.
    pub fn random_point<R: Rng>(&self, rng: &mut R) -> Point {
        let f = &self.field;
        loop {
            let x = f.from_u64(rng.gen_range(0..f.p()));
            if let Some(y) = f.sqrt(self.rhs(x)) {
                let y = if rng.gen::<bool>() { f.neg(y) } else { y };
                return Point::Affine { x, y };
            }
        }
    }

    /// Every point of the group, infinity first. `O(p)`; for tests and the
    /// enumeration oracle only.
    pub fn all_points(&self) -> Vec<Point> {
        let f = &self.field;
        let mut out = vec![Point::Infinity];
        for xi in 0..f.p() {
            let x = f.from_u64(xi);
            let r = self.rhs(x);
            if let Some(y) = f.sqrt(r) {
                out.push(Point::Affine { x, y });
                if !y.is_zero() {
                    out.push(Point::Affine { x, y: f.neg(y) });
                }
            }
        }
        out
    }
}
