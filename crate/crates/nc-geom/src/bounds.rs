//! Closed-form bounds on the maximum coding number, and the ring
//! constructions that achieve the lower bounds.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::Radius;

/// Floor for closed-form counts, with 1e-9 slack. Several of the formulas
/// hit exact integers (2*pi / arccos(1/2) is exactly 6) which f64 rounding
/// can land a few ulps below; the slack absorbs that without affecting any
/// non-degenerate value.
pub(crate) fn floor_tol(x: f64) -> u64 {
    (x + 1e-9).floor() as u64
}

/// Strict upper bound 2*pi*R/d for layouts with pairwise node separation at
/// least d: a combination's nodes sit on a convex perimeter of length at
/// most 2*pi*R, consumed in arcs of at least d each. Compare with `<`.
pub fn ub_fixed_separation(r: Radius, d: f64) -> f64 {
    assert!(d > 0.0 && d.is_finite(), "separation must be positive");
    std::f64::consts::TAU * r.get() / d
}

/// Strict upper bound sqrt(4*pi*N) for a square grid of N lattice points,
/// obtained from `ub_fixed_separation` with the pitch eliminated via the
/// area count N ~ pi R^2 / d^2.
pub fn ub_square_grid(n: usize) -> f64 {
    assert!(n >= 1, "a grid needs at least one point");
    (4.0 * std::f64::consts::PI * n as f64).sqrt()
}

/// Number of nodes a circle of radius i*d can carry at pairwise chord
/// distance >= d: floor(2*pi / arccos(1 - 1/(2 i^2))), the angular step
/// being the chord-d central angle at that radius.
pub fn cyclic_ring_count(i: u64) -> u64 {
    assert!(i >= 1, "rings are numbered from 1");
    let i = i as f64;
    let theta = (1.0 - 1.0 / (2.0 * i * i)).acos();
    floor_tol(std::f64::consts::TAU / theta)
}

fn count_from_cos(arg: f64) -> Result<u64> {
    if !(-1.0..=1.0).contains(&arg) {
        return Err(Error::TrigDomain(arg));
    }
    let theta = arg.acos();
    if theta <= 0.0 {
        return Err(Error::TrigDomain(arg));
    }
    Ok(floor_tol(std::f64::consts::TAU / theta))
}

/// Achievable coding number on the outermost ring when the disk radius is
/// close to an even multiple of d: floor(2*pi / arccos(1 - 2 d^2 / R^2)).
/// Grows like R/d, i.e. on the order of sqrt(N).
pub fn lb_cyclic_case1(r: Radius, d: f64) -> Result<u64> {
    let rr = r.get();
    count_from_cos(1.0 - 2.0 * d * d / (rr * rr))
}

/// Achievable coding number when the disk radius sits mid-way between ring
/// multiples, pairing ring R/2 with ring R/2 + d:
/// floor(2*pi / arccos(R^2 / (2 (R/2 + d)^2) - 1)). Grows like (R/d)^(1/2),
/// i.e. on the order of N^(1/4).
pub fn lb_cyclic_case2(r: Radius, d: f64) -> Result<u64> {
    let rr = r.get();
    let half_plus = rr / 2.0 + d;
    count_from_cos(rr * rr / (2.0 * half_plus * half_plus) - 1.0)
}

/// The ring construction carved out of a square grid: a boundary annulus of
/// width `delta` catches a grid node in every sector of angle `phi`, sectors
/// are spent alternately on combination nodes and mandatory empty gaps of
/// angle `omega`, and `count` sectors fit around the circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SquareGridRing {
    pub delta: f64,
    pub phi: f64,
    pub omega: f64,
    pub count: u64,
}

/// Achievable coding number for a square grid of pitch d inside radius R,
/// via the annulus construction. The gap angle is evaluated at the widest
/// admissible annulus, 1.5 d; `delta` itself is reported from its formula.
pub fn lb_square_grid(r: Radius, d: f64) -> Result<SquareGridRing> {
    let rr = r.get();
    let delta = ((rr * rr + d * (5.0 * d + 4.0 * rr)).sqrt() - rr) / 2.0;
    let phi_arg = std::f64::consts::SQRT_2 * d / (d * d + rr * rr).sqrt();
    if !(-1.0..=1.0).contains(&phi_arg) {
        return Err(Error::TrigDomain(phi_arg));
    }
    let phi = phi_arg.asin();
    let omega = (rr / (std::f64::consts::SQRT_2 * (rr + 1.5 * d))).asin();
    let step = phi + omega;
    if step <= 0.0 {
        return Err(Error::TrigDomain(phi_arg));
    }
    Ok(SquareGridRing { delta, phi, omega, count: floor_tol(std::f64::consts::TAU / step) })
}

/// Reference curve lambda^(1/2 + epsilon) for the high-density scaling of
/// the mean maximum coding number. Carries no constant; experiments fit the
/// constant empirically.
pub fn stochastic_ub_curve(lambda: f64, epsilon: f64) -> f64 {
    assert!(lambda > 0.0 && epsilon >= 0.0, "need a positive density");
    lambda.powf(0.5 + epsilon)
}
