//! Adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! Subintervals live in a max-heap keyed on their error estimate; the worst one
//! is bisected until the global estimate meets the tolerance. Semi-infinite
//! integrals are split at `domain_split_point`; the tail `[c, ∞)` is mapped to
//! `s ∈ [0, 1)` with `x = c + c·s/(1−s)` and integrated in the same heap so the
//! tolerance is controlled globally.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{domain, Error, Result};

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss weights for the nodes `XGK[1], XGK[3], XGK[5], XGK[7]`.
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

/// Tolerances and limits for adaptive integration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureSpec {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
    /// Where `[0, ∞)` is split before the tail transform.
    pub domain_split_point: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            abs_tol: 1e-14,
            rel_tol: 1e-11,
            max_subdivisions: 4000,
            domain_split_point: 1.0,
        }
    }
}

impl QuadratureSpec {
    pub fn with_split(self, split: f64) -> Self {
        QuadratureSpec {
            domain_split_point: split,
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0) || !(self.rel_tol > 0.0) {
            return Err(domain("quadrature tolerances must be strictly positive"));
        }
        if self.max_subdivisions < 1 {
            return Err(domain("max_subdivisions must be at least 1"));
        }
        if !(self.domain_split_point > 0.0) || !self.domain_split_point.is_finite() {
            return Err(domain("domain_split_point must be positive and finite"));
        }
        Ok(())
    }
}

/// Converged integral estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    // 0 = plain, 1 = mapped tail
    piece: u8,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        k += WGK[j] * s;
        if j % 2 == 1 {
            g += WG[j / 2] * s;
        }
    }
    let k = k * h;
    let g = g * h;
    (k, (k - g).abs())
}

struct Driver<'a, F> {
    f: &'a mut F,
    split: f64,
}

impl<F: FnMut(f64) -> f64> Driver<'_, F> {
    fn eval(&mut self, piece: u8, a: f64, b: f64) -> Segment {
        let (value, error) = if piece == 0 {
            kronrod(self.f, a, b)
        } else {
            let c = self.split;
            let f = &mut *self.f;
            let mut g = |s: f64| {
                let one_minus = 1.0 - s;
                let x = c + c * s / one_minus;
                let v = f(x);
                if v == 0.0 {
                    0.0
                } else {
                    v * c / (one_minus * one_minus)
                }
            };
            kronrod(&mut g, a, b)
        };
        Segment {
            a,
            b,
            value,
            error,
            piece,
        }
    }
}

fn adapt<F: FnMut(f64) -> f64>(
    f: &mut F,
    pieces: &[(u8, f64, f64)],
    split: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    let mut driver = Driver { f, split };
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Segment> = Vec::new();
    for &(piece, a, b) in pieces {
        heap.push(driver.eval(piece, a, b));
    }
    let mut subdivisions = 0usize;
    loop {
        let (value, error) = totals(&heap, &frozen);
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::Convergence {
                estimate: value,
                error,
                subdivisions,
            });
        }
        if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
            return Ok(Quadrature {
                value,
                abs_error: error,
                subdivisions,
            });
        }
        if subdivisions >= spec.max_subdivisions {
            return Err(Error::Convergence {
                estimate: value,
                error,
                subdivisions,
            });
        }
        let Some(worst) = heap.pop() else {
            // Everything left is at machine resolution.
            return Err(Error::Convergence {
                estimate: value,
                error,
                subdivisions,
            });
        };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b || (worst.b - worst.a) < 1e-15 * worst.a.abs().max(1e-300) {
            frozen.push(worst);
            continue;
        }
        heap.push(driver.eval(worst.piece, worst.a, mid));
        heap.push(driver.eval(worst.piece, mid, worst.b));
        subdivisions += 1;
    }
}

fn totals(heap: &BinaryHeap<Segment>, frozen: &[Segment]) -> (f64, f64) {
    let mut value = 0.0;
    let mut error = 0.0;
    for s in heap.iter().chain(frozen.iter()) {
        value += s.value;
        error += s.error;
    }
    (value, error)
}

/// `∫₀^∞ f(x) dx`.
pub fn integrate_semi_infinite<F: FnMut(f64) -> f64>(
    mut f: F,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    spec.validate()?;
    let c = spec.domain_split_point;
    adapt(&mut f, &[(0, 0.0, c), (1, 0.0, 1.0)], c, spec)
}

/// `∫ₐᵇ f(x) dx` over a finite interval.
pub fn integrate_interval<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    b: f64,
    spec: &QuadratureSpec,
) -> Result<Quadrature> {
    spec.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(domain("integration bounds must be finite"));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
        });
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let q = adapt(&mut f, &[(0, lo, hi)], 1.0, spec)?;
    Ok(Quadrature {
        value: sign * q.value,
        ..q
    })
}
