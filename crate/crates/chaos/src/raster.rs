//! Convergence-time rasters of F_p over a rectangle of starting points.

use std::io::{self, Write};

use rayon::prelude::*;

use crate::riemann::{MapParams, RiemannPoint};
use qfc_qstate::{QfcError, Result, C64};

pub const DEFAULT_CYCLE_TOL: f64 = 1e-9;
pub const MAX_PERIOD: usize = 8;
pub const NON_CONVERGENT: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RasterJob {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
    pub width: usize,
    pub height: usize,
    pub max_iters: usize,
    pub cycle_tol: f64,
    pub params: MapParams,
}

impl RasterJob {
    /// Square viewport [−r, r]² at n×n pixels.
    pub fn square(r: f64, n: usize, max_iters: usize, p: C64) -> Self {
        RasterJob {
            re_min: -r,
            re_max: r,
            im_min: -r,
            im_max: r,
            width: n,
            height: n,
            max_iters,
            cycle_tol: DEFAULT_CYCLE_TOL,
            params: MapParams::new(p),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return Err(QfcError::OutOfRange { field: "max_iters", value: self.max_iters as f64 });
        }
        if !(self.cycle_tol > 0.0) {
            return Err(QfcError::OutOfRange { field: "cycle_tol", value: self.cycle_tol });
        }
        if self.width < 2 {
            return Err(QfcError::OutOfRange { field: "width", value: self.width as f64 });
        }
        if self.height < 2 {
            return Err(QfcError::OutOfRange { field: "height", value: self.height as f64 });
        }
        if !(self.re_max > self.re_min) {
            return Err(QfcError::OutOfRange { field: "re_max", value: self.re_max });
        }
        if !(self.im_max > self.im_min) {
            return Err(QfcError::OutOfRange { field: "im_max", value: self.im_max });
        }
        Ok(())
    }

    /// Pixel centre; endpoints inclusive, row 0 at im_max.
    pub fn pixel(&self, row: usize, col: usize) -> C64 {
        let re = self.re_min + col as f64 * (self.re_max - self.re_min) / (self.width - 1) as f64;
        let im = self.im_max - row as f64 * (self.im_max - self.im_min) / (self.height - 1) as f64;
        C64::new(re, im)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RasterGrid {
    pub width: usize,
    pub height: usize,
    pub max_iters: usize,
    /// row-major; first-arrival step or −1
    pub counts: Vec<i32>,
}

impl RasterGrid {
    pub fn get(&self, row: usize, col: usize) -> i32 {
        self.counts[row * self.width + col]
    }

    pub fn non_convergent(&self) -> usize {
        self.counts.iter().filter(|&&c| c == NON_CONVERGENT).count()
    }

    /// Plain PGM: −1 → 0, c → 1 + ⌊254c/max_iters⌋.
    pub fn write_pgm<W: Write>(&self, w: W) -> io::Result<()> {
        self.write_pgm_annotated(w, &[])
    }

    /// As [`write_pgm`](Self::write_pgm) with `# ` comment lines after the magic number.
    pub fn write_pgm_annotated<W: Write>(&self, mut w: W, comments: &[String]) -> io::Result<()> {
        writeln!(w, "P2")?;
        for c in comments {
            writeln!(w, "# {c}")?;
        }
        writeln!(w, "{} {}", self.width, self.height)?;
        writeln!(w, "255")?;
        for row in self.counts.chunks(self.width) {
            let mut line = String::new();
            for &c in row {
                let v = if c < 0 { 0 } else { 1 + (c as usize * 254) / self.max_iters };
                let s = v.to_string();
                if !line.is_empty() && line.len() + 1 + s.len() > 70 {
                    writeln!(w, "{line}")?;
                    line.clear();
                }
                if !line.is_empty() {
                    line.push(' ');
                }
                line.push_str(&s);
            }
            writeln!(w, "{line}")?;
        }
        Ok(())
    }
}

/// Orbit classification of one starting point: first-arrival step into an
/// attracting cycle, or None.
pub fn classify(z0: RiemannPoint, p: C64, max_iters: usize, cycle_tol: f64) -> Option<usize> {
    let mut orbit = Vec::with_capacity(max_iters + 1);
    let mut h = z0.to_homogeneous();
    orbit.push(h);
    for _ in 0..max_iters {
        h = h.map(p);
        orbit.push(h);
    }
    let n = max_iters;
    let burn = max_iters / 2;
    let period = (1..=MAX_PERIOD)
        .filter(|&per| n >= per && n - per >= burn)
        .find(|&per| orbit[n].chordal(orbit[n - per]) < cycle_tol)?;
    let cycle = &orbit[n - period + 1..=n];
    let multiplier: f64 = cycle.iter().map(|c| c.spherical_derivative(p)).product();
    if !(multiplier < 1.0) {
        return None;
    }
    orbit
        .iter()
        .position(|z| cycle.iter().any(|c| z.chordal(*c) < cycle_tol))
}

pub fn julia_raster(job: &RasterJob) -> Result<RasterGrid> {
    job.validate()?;
    let p = job.params.p;
    let counts: Vec<i32> = (0..job.height)
        .into_par_iter()
        .flat_map_iter(|row| {
            (0..job.width).map(move |col| {
                let z0 = RiemannPoint::Finite(job.pixel(row, col));
                match classify(z0, p, job.max_iters, job.cycle_tol) {
                    Some(k) => k as i32,
                    None => NON_CONVERGENT,
                }
            })
        })
        .collect();
    Ok(RasterGrid {
        width: job.width,
        height: job.height,
        max_iters: job.max_iters,
        counts,
    })
}

/// Pixels with a 4-neighbour of different count.
pub fn boundary_mask(grid: &RasterGrid) -> Vec<bool> {
    let (w, h) = (grid.width, grid.height);
    let mut mask = vec![false; w * h];
    for r in 0..h {
        for c in 0..w {
            let v = grid.get(r, c);
            let differs = (r > 0 && grid.get(r - 1, c) != v)
                || (r + 1 < h && grid.get(r + 1, c) != v)
                || (c > 0 && grid.get(r, c - 1) != v)
                || (c + 1 < w && grid.get(r, c + 1) != v);
            mask[r * w + c] = differs;
        }
    }
    mask
}

/// Least-squares slope of ln N(s) against ln(1/s) over box sizes s.
pub fn box_counting_dimension(mask: &[bool], width: usize, height: usize, sizes: &[usize]) -> Result<f64> {
    if mask.len() != width * height {
        return Err(QfcError::DimensionMismatch(format!(
            "mask of {} for {width}×{height}",
            mask.len()
        )));
    }
    let mut pts = Vec::new();
    for &s in sizes {
        let (bw, bh) = (width.div_ceil(s), height.div_ceil(s));
        let mut hit = vec![false; bw * bh];
        for r in 0..height {
            for c in 0..width {
                if mask[r * width + c] {
                    hit[(r / s) * bw + c / s] = true;
                }
            }
        }
        let n = hit.iter().filter(|&&b| b).count();
        if n > 0 {
            pts.push(((1.0 / s as f64).ln(), (n as f64).ln()));
        }
    }
    if pts.len() < 2 {
        return Err(QfcError::DegenerateInput("fewer than two occupied box sizes".into()));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

/// Sizes 1, 2, 4, … up to `max`.
pub fn dyadic_sizes(max: usize) -> Vec<usize> {
    std::iter::successors(Some(1usize), |s| Some(s * 2)).take_while(|&s| s <= max).collect()
}

/// Lossless dump: row, col, re, im, count.
pub fn write_raster_csv<W: Write>(job: &RasterJob, grid: &RasterGrid, mut w: W) -> io::Result<()> {
    writeln!(w, "row,col,re,im,count")?;
    for r in 0..grid.height {
        for c in 0..grid.width {
            let z = job.pixel(r, c);
            writeln!(w, "{r},{c},{:.16e},{:.16e},{}", z.re, z.im, grid.get(r, c))?;
        }
    }
    Ok(())
}
