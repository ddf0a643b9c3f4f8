//! Complex-valued functions sampled on a uniform periodic box grid, with the
//! flat binary snapshot format and CSV slice export.
//!
//! Binary layout: header `n: u64 le, N: u64 le, L: f64 le`, payload
//! interleaved `re, im` as little-endian f64, row-major with the last axis
//! fastest.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    pub n: usize,
    /// Points per axis; a power of two.
    pub points: usize,
    /// Half-width of the box `[-L, L)` per axis.
    pub box_half: f64,
    pub values: Vec<Complex64>,
}

impl GridFunction {
    pub fn zeros(n: usize, points: usize, box_half: f64) -> Self {
        assert!(points.is_power_of_two(), "grid points must be a power of two");
        Self {
            n,
            points,
            box_half,
            values: vec![Complex64::new(0.0, 0.0); points.pow(n as u32)],
        }
    }

    pub fn from_fn(
        n: usize,
        points: usize,
        box_half: f64,
        mut f: impl FnMut(&[f64]) -> Complex64,
    ) -> Self {
        let mut g = Self::zeros(n, points, box_half);
        let mut coords = vec![0.0; n];
        let mut idx = vec![0usize; n];
        for flat in 0..g.values.len() {
            g.unflatten(flat, &mut idx);
            for (a, &i) in coords.iter_mut().zip(idx.iter()) {
                *a = g.coord(i);
            }
            g.values[flat] = f(&coords);
        }
        g
    }

    pub fn dx(&self) -> f64 {
        2.0 * self.box_half / self.points as f64
    }

    /// Physical coordinate of grid index `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.box_half + self.dx() * i as f64
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn unflatten(&self, mut flat: usize, idx: &mut [usize]) {
        for j in (0..self.n).rev() {
            idx[j] = flat % self.points;
            flat /= self.points;
        }
    }

    /// `L²` norm with the grid measure `dxⁿ`.
    pub fn l2_norm(&self) -> f64 {
        let cell = self.dx().powi(self.n as i32);
        (self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * cell).sqrt()
    }

    pub fn linf_distance(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Fraction of `L²` mass within `width` of the box boundary, the
    /// containment monitor for periodic-image control.
    pub fn boundary_mass(&self, width: f64) -> f64 {
        let total: f64 = self.values.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut idx = vec![0usize; self.n];
        let mut near = 0.0;
        for flat in 0..self.values.len() {
            self.unflatten(flat, &mut idx);
            let close = idx
                .iter()
                .any(|&i| (self.coord(i).abs() - self.box_half).abs() <= width);
            if close {
                near += self.values[flat].norm_sqr();
            }
        }
        near / total
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(&(self.n as u64).to_le_bytes())?;
        w.write_all(&(self.points as u64).to_le_bytes())?;
        w.write_all(&self.box_half.to_le_bytes())?;
        for v in &self.values {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<GridFunction> {
        let mut r = BufReader::new(File::open(path)?);
        let mut buf8 = [0u8; 8];
        r.read_exact(&mut buf8)?;
        let n = u64::from_le_bytes(buf8) as usize;
        r.read_exact(&mut buf8)?;
        let points = u64::from_le_bytes(buf8) as usize;
        r.read_exact(&mut buf8)?;
        let box_half = f64::from_le_bytes(buf8);
        if n == 0 || n > 8 {
            return Err(Error::GridFormat(format!("implausible dimension {n}")));
        }
        if !points.is_power_of_two() {
            return Err(Error::GridFormat(format!(
                "points per axis must be a power of two, got {points}"
            )));
        }
        let count = points.pow(n as u32);
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut buf8)?;
            let re = f64::from_le_bytes(buf8);
            r.read_exact(&mut buf8)?;
            let im = f64::from_le_bytes(buf8);
            values.push(Complex64::new(re, im));
        }
        Ok(GridFunction {
            n,
            points,
            box_half,
            values,
        })
    }

    /// CSV export of a 1-D slice along `axis` through grid index `at` on the
    /// other axes: rows `x, re, im, abs`.
    pub fn slice_csv(&self, axis: usize, at: &[usize]) -> Result<String> {
        if axis >= self.n || at.len() != self.n {
            return Err(Error::Argument(format!(
                "slice axis {axis} with {} anchors in dimension {}",
                at.len(),
                self.n
            )));
        }
        let mut out = String::from("x,re,im,abs\n");
        let mut idx = at.to_vec();
        for i in 0..self.points {
            idx[axis] = i;
            let mut flat = 0usize;
            for &j in idx.iter() {
                flat = flat * self.points + j;
            }
            let v = self.values[flat];
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.coord(i),
                v.re,
                v.im,
                v.norm()
            ));
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coords_and_norms() {
        let g = GridFunction::from_fn(1, 8, 4.0, |x| Complex64::new(x[0], 0.0));
        assert_eq!(g.dx(), 1.0);
        assert_eq!(g.coord(0), -4.0);
        assert_eq!(g.coord(7), 3.0);
        assert!(g.l2_norm() > 0.0);
    }

    #[test]
    fn binary_roundtrip() {
        let g = GridFunction::from_fn(2, 8, 2.0, |x| Complex64::new(x[0] * x[1], x[0] - x[1]));
        let dir = std::env::temp_dir().join("wavefront_grid_roundtrip.bin");
        g.save(&dir).unwrap();
        let h = GridFunction::load(&dir).unwrap();
        assert_eq!(g, h);
        std::fs::remove_file(dir).ok();
    }

    #[test]
    fn slice_export_shape() {
        let g = GridFunction::from_fn(2, 4, 2.0, |x| Complex64::new(x[0], x[1]));
        let csv = g.slice_csv(0, &[0, 2]).unwrap();
        assert_eq!(csv.lines().count(), 5);
        assert!(g.slice_csv(2, &[0, 0]).is_err());
    }
}
