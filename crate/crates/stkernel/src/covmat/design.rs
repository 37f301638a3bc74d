use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};

/// Space-time sampling design, stored time-major.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpaceTimeDesign {
    dim: usize,
    coords: Vec<f64>,
    times: Vec<f64>,
    /// Start offset of each distinct time, followed by n.
    slices: Vec<usize>,
    /// Input position of each stored point.
    order: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundingBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub t_lower: f64,
    pub t_upper: f64,
}

fn key(v: f64) -> u64 {
    // +0 and -0 are the same point
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

impl SpaceTimeDesign {
    /// Builds a design from (coords, t) pairs. Points are reordered time-major
    /// (stable within a time); duplicates are rejected.
    pub fn new(dim: usize, points: Vec<(Vec<f64>, f64)>) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::Validation(format!("design dim must be 1, 2 or 3, got {dim}")));
        }
        if points.is_empty() {
            return Err(Error::Validation("design has no points".into()));
        }
        for (i, (c, t)) in points.iter().enumerate() {
            if c.len() != dim {
                return Err(Error::Validation(format!("point {i} has {} coordinates, expected {dim}", c.len())));
            }
            if !t.is_finite() || c.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("point {i} has a non-finite coordinate")));
            }
        }
        let mut order: Vec<usize> = (0..points.len()).collect();
        order.sort_by(|&a, &b| points[a].1.total_cmp(&points[b].1));
        let mut seen = HashSet::with_capacity(points.len());
        let mut coords = Vec::with_capacity(points.len() * dim);
        let mut times = Vec::with_capacity(points.len());
        let mut slices = Vec::new();
        for (k, &i) in order.iter().enumerate() {
            let (c, t) = &points[i];
            let mut kv: Vec<u64> = c.iter().map(|&x| key(x)).collect();
            kv.push(key(*t));
            if !seen.insert(kv) {
                return Err(Error::Validation(format!("duplicate design point at input row {i}")));
            }
            if k == 0 || *t != times[k - 1] {
                slices.push(k);
            }
            coords.extend_from_slice(c);
            times.push(*t);
        }
        slices.push(times.len());
        Ok(SpaceTimeDesign { dim, coords, times, slices, order })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn coords(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn time(&self, i: usize) -> f64 {
        self.times[i]
    }

    /// Input row of the i-th stored point.
    pub fn input_index(&self, i: usize) -> usize {
        self.order[i]
    }

    /// Start offsets of the time slices, with n appended.
    pub fn slice_offsets(&self) -> &[usize] {
        &self.slices
    }

    pub fn n_times(&self) -> usize {
        self.slices.len() - 1
    }

    pub fn points(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        (0..self.len()).map(|i| (self.coords(i), self.times[i]))
    }

    /// Spatial distance and absolute time lag between stored points i and j.
    pub fn lag(&self, i: usize, j: usize) -> (f64, f64) {
        self.lag_to(i, self.coords(j), self.times[j])
    }

    pub fn lag_to(&self, i: usize, s: &[f64], t: f64) -> (f64, f64) {
        let r2: f64 = self.coords(i).iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum();
        (r2.sqrt(), (self.times[i] - t).abs())
    }

    pub fn bounding_box(&self) -> BoundingBox {
        let mut lower = vec![f64::INFINITY; self.dim];
        let mut upper = vec![f64::NEG_INFINITY; self.dim];
        for (c, _) in self.points() {
            for k in 0..self.dim {
                lower[k] = lower[k].min(c[k]);
                upper[k] = upper[k].max(c[k]);
            }
        }
        BoundingBox { lower, upper, t_lower: self.times[0], t_upper: self.times[self.len() - 1] }
    }

    /// Design with the points whose stored index satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> Result<Self> {
        let pts = (0..self.len()).filter(|&i| keep(i)).map(|i| (self.coords(i).to_vec(), self.times[i])).collect();
        SpaceTimeDesign::new(self.dim, pts)
    }

    /// Points in stored order as owned pairs.
    pub fn to_points(&self) -> Vec<(Vec<f64>, f64)> {
        self.points().map(|(c, t)| (c.to_vec(), t)).collect()
    }
}

fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    (0..n).map(|i| if i == n - 1 { hi } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }).collect()
}

/// Regular lattice with `n_space` points per spatial axis on `space` and
/// `m_time` times on `horizon`, endpoints included.
pub fn grid_design(
    n_space: usize,
    m_time: usize,
    dim: usize,
    space: (f64, f64),
    horizon: (f64, f64),
) -> Result<SpaceTimeDesign> {
    if n_space == 0 || m_time == 0 {
        return Err(Error::Validation(format!("grid sizes must be positive, got n_space={n_space}, m_time={m_time}")));
    }
    if !(space.0 <= space.1) || !(horizon.0 <= horizon.1) {
        return Err(Error::Validation("grid extents must be ordered intervals".into()));
    }
    if (n_space > 1 && space.0 == space.1) || (m_time > 1 && horizon.0 == horizon.1) {
        return Err(Error::Validation("degenerate extent with more than one grid point".into()));
    }
    let axis = linspace(space.0, space.1, n_space);
    let times = linspace(horizon.0, horizon.1, m_time);
    let n_sp = n_space.pow(dim as u32);
    let mut pts = Vec::with_capacity(n_sp * m_time);
    for &t in &times {
        for k in 0..n_sp {
            let mut c = Vec::with_capacity(dim);
            let mut rem = k;
            for _ in 0..dim {
                c.push(axis[rem % n_space]);
                rem /= n_space;
            }
            pts.push((c, t));
        }
    }
    SpaceTimeDesign::new(dim, pts)
}
