//! Geometry of the unit sphere `S²` around a pole `p`: colatitudes, EW
//! circles, Piron paths and the half-pole band.
//!
//! Points of the open northern hemisphere `N_p = {q : 0 < θ(p, q) < π/2}` are
//! described by colatitude `θ` and a longitude measured in a fixed frame
//! `(u, w)` of the equator plane with `w = p × u`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg;

pub const MAX_HOPS: usize = 64;

/// Pole `p` of `R³` with a fixed orthonormal frame `(u, w)` of its equator.
#[derive(Debug, Clone)]
pub struct SphereFrame {
    pole: DVector<f64>,
    u: DVector<f64>,
    w: DVector<f64>,
}

impl SphereFrame {
    /// Normalizes `pole`. The reference axis `u` is the projection onto the
    /// equator of the coordinate axis least aligned with `p`.
    pub fn new(pole: &DVector<f64>) -> Result<Self> {
        Error::check_dim(3, pole.len())?;
        let n = pole.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidInput("pole must be a nonzero vector".into()));
        }
        let p = pole / n;
        let axis = (0..3).min_by(|&i, &j| p[i].abs().total_cmp(&p[j].abs())).unwrap_or(0);
        let mut e = DVector::zeros(3);
        e[axis] = 1.0;
        let u = &e - &p * p.dot(&e);
        let u = &u / u.norm();
        let w = linalg::cross(&p, &u);
        Ok(SphereFrame { pole: p, u, w })
    }

    pub fn pole(&self) -> &DVector<f64> {
        &self.pole
    }

    /// Unit vector at colatitude `theta` and longitude `lambda`.
    pub fn point(&self, theta: f64, lambda: f64) -> DVector<f64> {
        &self.pole * theta.cos() + self.equator_vector(lambda) * theta.sin()
    }

    /// Equator vector at longitude `lambda`.
    pub fn equator_vector(&self, lambda: f64) -> DVector<f64> {
        &self.u * lambda.cos() + &self.w * lambda.sin()
    }

    /// Longitude in `(−π, π]`.
    pub fn longitude(&self, v: &DVector<f64>) -> f64 {
        v.dot(&self.w).atan2(v.dot(&self.u))
    }

    /// Angle in `[0, π)` of the line through `v`, projected onto the equator.
    pub fn angle(&self, v: &DVector<f64>) -> f64 {
        let r = self.longitude(v).rem_euclid(PI);
        if r >= PI {
            0.0
        } else {
            r
        }
    }

    /// `⟨p, v⟩²`, the pure-state weight of the line through a unit `v`.
    pub fn pole_weight(&self, v: &DVector<f64>) -> f64 {
        self.pole.dot(v).powi(2)
    }

    /// `θ(p, v)` for a unit `v`.
    pub fn colatitude(&self, v: &DVector<f64>) -> f64 {
        self.pole.dot(v).clamp(-1.0, 1.0).acos()
    }
}

impl Serialize for SphereFrame {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Json<'a> {
            pole: &'a [f64],
        }
        Json { pole: self.pole.as_slice() }.serialize(serializer)
    }
}

fn check_unit(v: &DVector<f64>) -> Result<()> {
    Error::check_dim(3, v.len())?;
    if (v.norm() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidInput(format!("expected a unit vector, norm is {}", v.norm())));
    }
    Ok(())
}

/// Angle between unit vectors, `arccos ⟨p, q⟩`.
pub fn theta(p: &DVector<f64>, q: &DVector<f64>) -> Result<f64> {
    check_unit(p)?;
    check_unit(q)?;
    Ok(p.dot(q).clamp(-1.0, 1.0).acos())
}

fn check_northern(frame: &SphereFrame, q: &DVector<f64>) -> Result<()> {
    check_unit(q)?;
    let c = frame.pole.dot(q);
    if c >= 1.0 - 1e-9 {
        return Err(Error::Precondition("point is at the pole".into()));
    }
    if c <= 1e-9 {
        return Err(Error::Precondition("point is not in the open northern hemisphere".into()));
    }
    Ok(())
}

/// `x = p × q / ‖p × q‖`, the equator point of `EW(q)`.
fn ew_equator_point(frame: &SphereFrame, q: &DVector<f64>) -> DVector<f64> {
    linalg::cross(&frame.pole, q).normalize()
}

/// Normal of the plane of `EW(q)`, the great circle through `q` and the
/// equator vector orthogonal to `q`. `y ∈ EW(q)` iff `|⟨y, n⟩| ≤ 1e-9`.
pub fn ew_normal(frame: &SphereFrame, q: &DVector<f64>) -> Result<DVector<f64>> {
    check_northern(frame, q)?;
    let x = ew_equator_point(frame, q);
    Ok(linalg::cross(q, &x).normalize())
}

/// Point of `EW(q)` at parameter `t`: `cos t · q + sin t · x`.
pub fn ew_point(frame: &SphereFrame, q: &DVector<f64>, t: f64) -> Result<DVector<f64>> {
    check_northern(frame, q)?;
    Ok(q * t.cos() + ew_equator_point(frame, q) * t.sin())
}

#[derive(Debug, Clone, Serialize)]
pub struct PironPath {
    pub frame: SphereFrame,
    #[serde(serialize_with = "crate::linalg::plain::vectors")]
    pub points: Vec<DVector<f64>>,
}

impl PironPath {
    pub fn hops(&self) -> usize {
        self.points.len().saturating_sub(1)
    }

    /// Plot-ready form: pole and points as plain arrays.
    pub fn to_json(&self) -> PathJson {
        PathJson {
            pole: self.frame.pole.iter().copied().collect(),
            points: self.points.iter().map(|v| v.iter().copied().collect()).collect(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct PathJson {
    pub pole: Vec<f64>,
    pub points: Vec<Vec<f64>>,
}

impl TryFrom<PathJson> for PironPath {
    type Error = Error;
    fn try_from(j: PathJson) -> Result<Self> {
        let frame = SphereFrame::new(&DVector::from_vec(j.pole))?;
        let points = j
            .points
            .into_iter()
            .map(|p| {
                Error::check_dim(3, p.len())?;
                Ok(DVector::from_vec(p))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(PironPath { frame, points })
    }
}

/// Longitude gained by one hop along `EW(a)` from colatitude `alpha` down to
/// colatitude `beta ≥ alpha`.
fn hop_gain(alpha: f64, beta: f64) -> f64 {
    if beta <= alpha {
        return 0.0;
    }
    let t = (beta.cos() / alpha.cos()).clamp(-1.0, 1.0).acos();
    t.sin().atan2(t.cos() * alpha.sin())
}

/// Longitude reached by `n` hops of equal colatitude steps.
fn equal_steps_gain(a: f64, b: f64, n: usize) -> f64 {
    let step = (b - a) / n as f64;
    (0..n).map(|i| hop_gain(a + step * i as f64, a + step * (i + 1) as f64)).sum()
}

/// Longitude gap `|λ(r) − λ(q)|` wrapped to `[0, π]`, with its sign.
fn longitude_gap(frame: &SphereFrame, q: &DVector<f64>, r: &DVector<f64>) -> (f64, f64) {
    let mut d = frame.longitude(r) - frame.longitude(q);
    d = (d + PI).rem_euclid(2.0 * PI) - PI;
    (d.abs(), if d < 0.0 { -1.0 } else { 1.0 })
}

fn check_pair(frame: &SphereFrame, q: &DVector<f64>, r: &DVector<f64>) -> Result<(f64, f64)> {
    check_northern(frame, q)?;
    check_northern(frame, r)?;
    let (a, b) = (frame.colatitude(q), frame.colatitude(r));
    if a >= b - 1e-9 {
        return Err(Error::Precondition("θ(p, q) must be smaller than θ(p, r)".into()));
    }
    Ok((a, b))
}

/// Longitude gap that [`MAX_HOPS`] hops of equal colatitude steps close on
/// the way from `q` down to the colatitude of `r`. When this is below `π`, no
/// other step profile does noticeably better, so a larger gap cannot be
/// closed within the hop budget.
pub fn piron_reach(frame: &SphereFrame, q: &DVector<f64>, r: &DVector<f64>) -> Result<f64> {
    let (a, b) = check_pair(frame, q, r)?;
    Ok(equal_steps_gain(a, b, MAX_HOPS))
}

/// Whether [`piron_path`] can connect `q` to `r` within the hop budget.
pub fn piron_reachable(frame: &SphereFrame, q: &DVector<f64>, r: &DVector<f64>) -> Result<bool> {
    let (a, b) = check_pair(frame, q, r)?;
    let (gap, _) = longitude_gap(frame, q, r);
    Ok(gap <= hop_gain(a, b) || gap <= equal_steps_gain(a, b, MAX_HOPS))
}

fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    // f(lo) ≤ 0 ≤ f(hi)
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Walks the hops `(colatitude, sign)` along successive EW circles from `q`.
fn walk(frame: &SphereFrame, q: &DVector<f64>, hops: &[(f64, f64)]) -> Vec<DVector<f64>> {
    let mut points = vec![q.clone()];
    for &(beta, sign) in hops {
        let a = points.last().expect("path starts at q").clone();
        let alpha = frame.colatitude(&a);
        let t = (beta.cos() / alpha.cos()).clamp(-1.0, 1.0).acos();
        let x = ew_equator_point(frame, &a);
        points.push((&a * t.cos() + x * (sign * t.sin())).normalize());
    }
    points
}

/// Builds a chain `q = q₀, …, q_n ≈ r` in `N_p` with `q_{i+1} ∈ EW(q_i)` and
/// non-decreasing colatitude.
///
/// One hop from colatitude `α` to `β` moves the longitude by
/// `g(α, β) = atan2(sin t, sin α · cos t)` with `cos t = cos β / cos α`. If the
/// longitude gap is below `g(θ_q, θ_r)`, two hops of opposite sign meet it
/// (bisection on the middle colatitude). Otherwise the smallest hop count `n`
/// whose equal colatitude steps reach the gap is used, and the step profile is
/// blended from one long hop towards equal steps until the gap is met.
///
/// Fails with [`Error::HopBudgetExceeded`] when even 64 hops cannot close the
/// gap, which happens for `r` nearly opposite `q` in longitude with little
/// colatitude to spend.
pub fn piron_path(frame: &SphereFrame, q: &DVector<f64>, r: &DVector<f64>, tol: f64) -> Result<PironPath> {
    let (a, b) = check_pair(frame, q, r)?;
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    let n_q = ew_normal(frame, q)?;
    if r.dot(&n_q).abs() <= tol {
        return Ok(PironPath { frame: frame.clone(), points: vec![q.clone(), r.clone()] });
    }
    let (gap, sign) = longitude_gap(frame, q, r);
    let one = hop_gain(a, b);

    let hops: Vec<(f64, f64)> = if gap < one {
        // net gain g(a, m) − g(m, b) runs from −one to one as m goes from a to b
        let m = bisect(a, b, |m| hop_gain(a, m) - hop_gain(m, b) - gap);
        vec![(m, sign), (b, -sign)]
    } else {
        let n = (2..=MAX_HOPS)
            .find(|&n| equal_steps_gain(a, b, n) >= gap)
            .ok_or(Error::HopBudgetExceeded {
                max_hops: MAX_HOPS,
                needed: gap,
                reach: equal_steps_gain(a, b, MAX_HOPS),
            })?;
        let span = b - a;
        let profile = |s: f64| -> Vec<f64> {
            // colatitude steps: (1 − s)·[one long hop] + s·[n equal steps]
            (0..n).map(|i| s * span / n as f64 + if i == 0 { (1.0 - s) * span } else { 0.0 }).collect()
        };
        let gain = |s: f64| {
            let mut lat = a;
            profile(s)
                .iter()
                .map(|step| {
                    let next = (lat + step).min(b);
                    let g = hop_gain(lat, next);
                    lat = next;
                    g
                })
                .sum::<f64>()
        };
        let s = bisect(0.0, 1.0, |s| gain(s) - gap);
        let mut lat = a;
        profile(s)
            .iter()
            .enumerate()
            .map(|(i, step)| {
                lat = if i + 1 == n { b } else { (lat + step).min(b) };
                (lat, sign)
            })
            .collect()
    };
    let points = walk(frame, q, &hops);
    let path = PironPath { frame: frame.clone(), points };
    let end = path.points.last().expect("nonempty");
    if (end - r).norm() > tol {
        return Err(Error::InvariantViolation(format!(
            "path ends {:e} away from the target",
            (end - r).norm()
        )));
    }
    Ok(path)
}

/// Checks endpoints, EW membership of each hop, hemisphere membership,
/// non-decreasing colatitude and the hop budget.
pub fn verify_piron_path(path: &PironPath, q: &DVector<f64>, r: &DVector<f64>, tol: f64) -> bool {
    let pts = &path.points;
    if pts.len() < 2 || pts.len() > MAX_HOPS + 1 || pts.iter().any(|v| v.len() != 3) {
        return false;
    }
    if q.len() != 3 || r.len() != 3 {
        return false;
    }
    if (&pts[0] - q).norm() > tol || (&pts[pts.len() - 1] - r).norm() > tol {
        return false;
    }
    let frame = &path.frame;
    for v in pts {
        let c = frame.pole.dot(v);
        if (v.norm() - 1.0).abs() > tol || c <= 0.0 || c >= 1.0 {
            return false;
        }
    }
    pts.windows(2).all(|w| {
        let Ok(n) = ew_normal(frame, &w[0]) else { return false };
        w[1].dot(&n).abs() <= tol && frame.colatitude(&w[1]) >= frame.colatitude(&w[0]) - tol
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct HalfPole {
    /// `p'` in `span{p, z}` with `θ(p, p') = θ(p, z)/2`.
    #[serde(serialize_with = "crate::linalg::plain::vector")]
    pub pole: DVector<f64>,
    /// `min θ(p, x')` over the equator of `p'`: `π/2 − θ(p, z)/2`.
    pub band_lo: f64,
    /// `max θ(p, x')` over the equator of `p'`: `π/2 + θ(p, z)/2`.
    pub band_hi: f64,
    /// Whether the equator of `p'` lies in `(θ(p, z), π − θ(p, z))`, i.e.
    /// `θ(p, z) < π/3`.
    pub inside_open_band: bool,
}

pub fn half_pole(frame: &SphereFrame, z: &DVector<f64>) -> Result<HalfPole> {
    check_northern(frame, z)?;
    let th = frame.colatitude(z);
    let horizontal = (z - &frame.pole * frame.pole.dot(z)).normalize();
    let pole = &frame.pole * (th / 2.0).cos() + horizontal * (th / 2.0).sin();
    let band_lo = FRAC_PI_2 - th / 2.0;
    Ok(HalfPole { pole, band_lo, band_hi: FRAC_PI_2 + th / 2.0, inside_open_band: band_lo > th + 1e-12 })
}
