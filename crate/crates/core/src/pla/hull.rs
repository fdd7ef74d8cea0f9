//! Streaming minimal-strip maintenance for a run of vertical bands.
//!
//! Each added point contributes a vertical band `[lo, hi]`. The hull keeps the
//! upper chain of band tops and the lower chain of band bottoms that still
//! constrain the set of feasible lines, plus the four rectangle corners that
//! pin the extreme feasible slopes. A point whose band cannot be stabbed
//! together with the previous ones is rejected and the caller starts a new
//! segment with it.

use crate::key::HullCoord;

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct HullPoint<C> {
    pub x: C,
    pub y: C,
}

#[derive(Debug, Clone, Copy)]
struct Slope<C> {
    dx: C,
    dy: C,
}

impl<C: HullCoord> Slope<C> {
    #[inline]
    fn lt(self, o: Self) -> bool {
        self.dy * o.dx < self.dx * o.dy
    }

    #[inline]
    fn gt(self, o: Self) -> bool {
        self.dy * o.dx > self.dx * o.dy
    }

    #[inline]
    fn eq(self, o: Self) -> bool {
        self.dy * o.dx == self.dx * o.dy
    }
}

#[inline]
fn diff<C: HullCoord>(a: HullPoint<C>, b: HullPoint<C>) -> Slope<C> {
    Slope {
        dx: a.x - b.x,
        dy: a.y - b.y,
    }
}

#[inline]
fn cross<C: HullCoord>(o: HullPoint<C>, a: HullPoint<C>, b: HullPoint<C>) -> C {
    let oa = diff(a, o);
    let ob = diff(b, o);
    oa.dx * ob.dy - oa.dy * ob.dx
}

/// Line in coordinates relative to the first point of the run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Line {
    pub slope: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone)]
pub(crate) struct StreamingHull<C> {
    upper: Vec<HullPoint<C>>,
    lower: Vec<HullPoint<C>>,
    upper_start: usize,
    lower_start: usize,
    rect: [HullPoint<C>; 4],
    points: usize,
}

impl<C: HullCoord> StreamingHull<C> {
    pub fn new() -> Self {
        let origin = HullPoint {
            x: C::ZERO,
            y: C::ZERO,
        };
        Self {
            upper: Vec::new(),
            lower: Vec::new(),
            upper_start: 0,
            lower_start: 0,
            rect: [origin; 4],
            points: 0,
        }
    }

    #[cfg(test)]
    pub fn len(&self) -> usize {
        self.points
    }

    pub fn reset(&mut self) {
        self.points = 0;
    }

    /// Adds the band `[lo, hi]` at abscissa `x` (strictly greater than the
    /// previous one). Returns `false` when no line can stab this band together
    /// with the current run; the hull is left untouched so that `line()` still
    /// describes the closed run.
    pub fn add(&mut self, x: C, lo: C, hi: C) -> bool {
        let p1 = HullPoint { x, y: hi };
        let p2 = HullPoint { x, y: lo };

        if self.points == 0 {
            self.rect[0] = p1;
            self.rect[1] = p2;
            self.upper.clear();
            self.lower.clear();
            self.upper.push(p1);
            self.lower.push(p2);
            self.upper_start = 0;
            self.lower_start = 0;
            self.points = 1;
            return true;
        }

        if self.points == 1 {
            self.rect[2] = p2;
            self.rect[3] = p1;
            self.upper.push(p1);
            self.lower.push(p2);
            self.points = 2;
            return true;
        }

        let min_slope = diff(self.rect[2], self.rect[0]);
        let max_slope = diff(self.rect[3], self.rect[1]);
        let below_min = diff(p1, self.rect[2]).lt(min_slope);
        let above_max = diff(p2, self.rect[3]).gt(max_slope);
        if below_min || above_max {
            return false;
        }

        if diff(p1, self.rect[1]).lt(max_slope) {
            // The band top lowers the maximum slope: find the lower-chain
            // vertex that now supports it.
            let mut min = diff(self.lower[self.lower_start], p1);
            let mut min_i = self.lower_start;
            for i in self.lower_start + 1..self.lower.len() {
                let val = diff(self.lower[i], p1);
                if val.gt(min) {
                    break;
                }
                min = val;
                min_i = i;
            }
            self.rect[1] = self.lower[min_i];
            self.rect[3] = p1;
            self.lower_start = min_i;

            let mut end = self.upper.len();
            while end >= self.upper_start + 2
                && cross(self.upper[end - 2], self.upper[end - 1], p1) <= C::ZERO
            {
                end -= 1;
            }
            self.upper.truncate(end);
            self.upper.push(p1);
        }

        if diff(p2, self.rect[0]).gt(min_slope) {
            let mut max = diff(self.upper[self.upper_start], p2);
            let mut max_i = self.upper_start;
            for i in self.upper_start + 1..self.upper.len() {
                let val = diff(self.upper[i], p2);
                if val.lt(max) {
                    break;
                }
                max = val;
                max_i = i;
            }
            self.rect[0] = self.upper[max_i];
            self.rect[2] = p2;
            self.upper_start = max_i;

            let mut end = self.lower.len();
            while end >= self.lower_start + 2
                && cross(self.lower[end - 2], self.lower[end - 1], p2) >= C::ZERO
            {
                end -= 1;
            }
            self.lower.truncate(end);
            self.lower.push(p2);
        }

        self.points += 1;
        true
    }

    /// Line splitting the minimal strip in two halves: it passes through the
    /// crossing of the two extreme feasible lines and takes the mean of their
    /// slopes. Negative slopes are clamped to zero, which stays feasible
    /// because ranks never decrease.
    pub fn line(&self) -> Line {
        debug_assert!(self.points > 0);
        if self.points == 1 {
            let y = (self.rect[0].y.to_f64() + self.rect[1].y.to_f64()) / 2.0;
            return Line {
                slope: 0.0,
                intercept: y,
            };
        }

        let [p0, p1, p2, p3] = self.rect;
        let min_slope = diff(p2, p0);
        let max_slope = diff(p3, p1);

        let (ix, iy) = if min_slope.eq(max_slope) {
            (p0.x.to_f64(), p0.y.to_f64())
        } else {
            let a = min_slope.dx * max_slope.dy - min_slope.dy * max_slope.dx;
            let b = (p1.x - p0.x) * (p3.y - p1.y) - (p1.y - p0.y) * (p3.x - p1.x);
            let t = b.to_f64() / a.to_f64();
            (
                p0.x.to_f64() + t * min_slope.dx.to_f64(),
                p0.y.to_f64() + t * min_slope.dy.to_f64(),
            )
        };

        let lo = min_slope.dy.to_f64() / min_slope.dx.to_f64();
        let hi = max_slope.dy.to_f64() / max_slope.dx.to_f64();
        let slope = ((lo + hi) / 2.0).max(0.0);
        Line {
            slope,
            intercept: iy - ix * slope,
        }
    }
}
