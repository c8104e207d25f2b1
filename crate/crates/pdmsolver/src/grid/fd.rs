//! Fourth-order finite-difference stencils on uniform grids.
//!
//! Interior points use 5-point central stencils; the two points at each
//! boundary use one-sided stencils of matching order (5-point for the
//! first derivative, 6-point for the second). All weights are exact for
//! polynomials through degree 4 (degree 5 for the 6-point stencils), so
//! `d2(x^2)` and friends come out to rounding error.

use super::Samples;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DerivOrder {
    First,
    Second,
}

// (offsets relative to the evaluation point, weights * 12)
type Stencil = (&'static [isize], &'static [f64]);

const D1_CENTRAL: Stencil = (&[-2, -1, 1, 2], &[1.0, -8.0, 8.0, -1.0]);
const D1_EDGE0: Stencil = (&[0, 1, 2, 3, 4], &[-25.0, 48.0, -36.0, 16.0, -3.0]);
const D1_EDGE1: Stencil = (&[-1, 0, 1, 2, 3], &[-3.0, -10.0, 18.0, -6.0, 1.0]);

const D2_CENTRAL: Stencil = (&[-2, -1, 0, 1, 2], &[-1.0, 16.0, -30.0, 16.0, -1.0]);
const D2_EDGE0: Stencil = (
    &[0, 1, 2, 3, 4, 5],
    &[45.0, -154.0, 214.0, -156.0, 61.0, -10.0],
);
const D2_EDGE1: Stencil = (
    &[-1, 0, 1, 2, 3, 4],
    &[10.0, -15.0, -4.0, 14.0, -6.0, 1.0],
);

/// Stencil for point `i` of `n`, as (offsets, weights*12, mirror) where
/// `mirror` flips the offsets (and, for odd derivatives, the signs).
fn stencil_for(order: DerivOrder, i: usize, n: usize) -> (Stencil, bool) {
    let near_left = i < 2;
    let near_right = i >= n - 2;
    match order {
        DerivOrder::First => {
            if near_left {
                (if i == 0 { D1_EDGE0 } else { D1_EDGE1 }, false)
            } else if near_right {
                (if i == n - 1 { D1_EDGE0 } else { D1_EDGE1 }, true)
            } else {
                (D1_CENTRAL, false)
            }
        }
        DerivOrder::Second => {
            if near_left {
                (if i == 0 { D2_EDGE0 } else { D2_EDGE1 }, false)
            } else if near_right {
                (if i == n - 1 { D2_EDGE0 } else { D2_EDGE1 }, true)
            } else {
                (D2_CENTRAL, false)
            }
        }
    }
}

pub(super) fn derivative_masked(s: &Samples, order: DerivOrder) -> Samples {
    let n = s.len();
    let h = s.grid().spacing();
    let scale = match order {
        DerivOrder::First => 1.0 / (12.0 * h),
        DerivOrder::Second => 1.0 / (12.0 * h * h),
    };
    let sign_flip = order == DerivOrder::First;
    let mut out = Samples::constant(s.grid(), 0.0);
    'point: for i in 0..n {
        if !s.is_valid(i) {
            out.invalidate(i);
            continue;
        }
        let ((offsets, weights), mirror) = stencil_for(order, i, n);
        let mut acc = 0.0;
        for (&off, &w) in offsets.iter().zip(weights) {
            let (j, w) = if mirror {
                (i as isize - off, if sign_flip { -w } else { w })
            } else {
                (i as isize + off, w)
            };
            debug_assert!(j >= 0 && (j as usize) < n);
            let j = j as usize;
            if !s.is_valid(j) {
                out.invalidate(i);
                continue 'point;
            }
            acc += w * s.value(j);
        }
        out.values[i] = acc * scale;
    }
    out
}
