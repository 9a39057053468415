//! Complex fields on a [`Grid`], stored row-major in either the physical or
//! the frequency representation, plus the binary snapshot format.
//!
//! Frequency data holds the coefficients `c_k` of `u(x) = Σ_k c_k e^{i ξ_k·x}`,
//! so Plancherel reads `‖u‖_{L²}² = L^d Σ_k |c_k|²`. Fields are value
//! semantic: operations return new fields and never mutate their inputs.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rustfft::FftDirection;

use crate::error::{Error, Result};
use crate::grid::{dft_all_axes, Grid, MAX_DIM};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Representation {
    Physical,
    Frequency,
}

#[derive(Clone, Debug)]
pub struct Field {
    grid: Grid,
    rep: Representation,
    data: Vec<Complex64>,
}

impl Field {
    pub fn zeros(grid: Grid, rep: Representation) -> Field {
        Field {
            grid,
            rep,
            data: vec![Complex64::new(0.0, 0.0); grid.total_points()],
        }
    }

    pub fn from_data(grid: Grid, rep: Representation, data: Vec<Complex64>) -> Result<Field> {
        if data.len() != grid.total_points() {
            return Err(Error::GridMismatch);
        }
        Ok(Field { grid, rep, data })
    }

    /// `A e^{i ξ_k·x}` for a signed mode vector `k`: a single frequency
    /// coefficient equal to `A`.
    pub fn plane_wave(grid: Grid, modes: &[i64], amplitude: Complex64) -> Result<Field> {
        let flat = grid.flat_of_modes(modes).ok_or(Error::GridMismatch)?;
        let mut f = Field::zeros(grid, Representation::Frequency);
        f.data[flat] = amplitude;
        Ok(f)
    }

    /// Smooth bump `A exp(-|x - c|²/(2w²))` centered in the box. With
    /// `w ≲ L/10` the periodic images are far below double precision.
    pub fn gaussian_bump(grid: Grid, amplitude: f64, width: f64) -> Field {
        let c = grid.box_length() / 2.0;
        let mut f = Field::zeros(grid, Representation::Physical);
        let d = grid.d();
        let mut x = [0.0f64; MAX_DIM];
        for flat in 0..grid.total_points() {
            grid.coordinates_of_flat(flat, &mut x[..d]);
            let r2: f64 = x[..d].iter().map(|&xi| (xi - c) * (xi - c)).sum();
            f.data[flat] = Complex64::new(amplitude * (-r2 / (2.0 * width * width)).exp(), 0.0);
        }
        f
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn representation(&self) -> Representation {
        self.rep
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn to_physical(&self) -> Field {
        self.clone().into_physical()
    }

    pub fn to_frequency(&self) -> Field {
        self.clone().into_frequency()
    }

    pub fn into_physical(mut self) -> Field {
        if self.rep == Representation::Frequency {
            dft_all_axes(&self.grid, &mut self.data, FftDirection::Inverse);
            self.rep = Representation::Physical;
        }
        self
    }

    pub fn into_frequency(mut self) -> Field {
        if self.rep == Representation::Physical {
            dft_all_axes(&self.grid, &mut self.data, FftDirection::Forward);
            let scale = 1.0 / self.grid.total_points() as f64;
            for v in &mut self.data {
                *v *= scale;
            }
            self.rep = Representation::Frequency;
        }
        self
    }

    /// Frequency coefficient of a signed mode vector.
    pub fn coefficient(&self, modes: &[i64]) -> Result<Complex64> {
        if self.rep != Representation::Frequency {
            return Err(Error::WrongRepresentation {
                expected: Representation::Frequency,
                found: self.rep,
            });
        }
        let flat = self.grid.flat_of_modes(modes).ok_or(Error::GridMismatch)?;
        Ok(self.data[flat])
    }

    pub fn map(&self, f: impl Fn(Complex64) -> Complex64) -> Field {
        Field {
            grid: self.grid,
            rep: self.rep,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip(other, |a, b| a - b)
    }

    pub fn scale(&self, c: Complex64) -> Field {
        self.map(|z| z * c)
    }

    pub fn zip(
        &self,
        other: &Field,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Field> {
        if self.grid != other.grid || self.rep != other.rep {
            return Err(Error::GridMismatch);
        }
        Ok(Field {
            grid: self.grid,
            rep: self.rep,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn is_finite(&self) -> bool {
        self.data
            .iter()
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Writes the binary snapshot: magic `RNLS`, version 1, `d` (u8),
    /// `points_per_axis` (u32 LE), `box_length` (f64 LE), representation tag
    /// (u8: 0 physical, 1 frequency), then row-major `(re, im)` f64 LE pairs.
    pub fn write_snapshot(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(b"RNLS")?;
        w.write_all(&[1u8, self.grid.d() as u8])?;
        w.write_all(&(self.grid.points_per_axis() as u32).to_le_bytes())?;
        w.write_all(&self.grid.box_length().to_le_bytes())?;
        w.write_all(&[match self.rep {
            Representation::Physical => 0u8,
            Representation::Frequency => 1u8,
        }])?;
        let mut buf = Vec::with_capacity(self.data.len() * 16);
        for z in &self.data {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
        w.write_all(&buf)?;
        Ok(())
    }

    pub fn write_snapshot_file(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write_snapshot(&mut w)
    }

    pub fn read_snapshot(r: &mut impl Read) -> Result<Field> {
        let mut head = [0u8; 4];
        r.read_exact(&mut head)?;
        if &head != b"RNLS" {
            return Err(Error::SnapshotFormat(format!(
                "bad magic {:?}, expected \"RNLS\"",
                head
            )));
        }
        let mut vd = [0u8; 2];
        r.read_exact(&mut vd)?;
        if vd[0] != 1 {
            return Err(Error::SnapshotFormat(format!(
                "unsupported version {}",
                vd[0]
            )));
        }
        let d = vd[1] as usize;
        let mut u32buf = [0u8; 4];
        r.read_exact(&mut u32buf)?;
        let points = u32::from_le_bytes(u32buf) as usize;
        let mut f64buf = [0u8; 8];
        r.read_exact(&mut f64buf)?;
        let box_length = f64::from_le_bytes(f64buf);
        let mut reptag = [0u8; 1];
        r.read_exact(&mut reptag)?;
        let rep = match reptag[0] {
            0 => Representation::Physical,
            1 => Representation::Frequency,
            t => {
                return Err(Error::SnapshotFormat(format!(
                    "unknown representation tag {t}"
                )))
            }
        };
        if d == 0 || d > MAX_DIM {
            return Err(Error::SnapshotFormat(format!("bad dimension {d}")));
        }
        if points < 8 || !points.is_power_of_two() {
            return Err(Error::SnapshotFormat(format!(
                "bad points_per_axis {points}"
            )));
        }
        // Companion boxes of rescaled fields may sit below the 2π floor, so
        // validate shape here rather than through Grid::new.
        let grid = Grid::new(d, points, f64::max(box_length, 2.0 * std::f64::consts::PI))?
            .with_box_length(box_length)?;
        let total = grid.total_points();
        let mut raw = vec![0u8; total * 16];
        r.read_exact(&mut raw)?;
        let mut data = Vec::with_capacity(total);
        for chunk in raw.chunks_exact(16) {
            let re = f64::from_le_bytes(chunk[..8].try_into().unwrap());
            let im = f64::from_le_bytes(chunk[8..].try_into().unwrap());
            data.push(Complex64::new(re, im));
        }
        Ok(Field { grid, rep, data })
    }

    pub fn read_snapshot_file(path: impl AsRef<Path>) -> Result<Field> {
        let mut r = std::io::BufReader::new(std::fs::File::open(path)?);
        Field::read_snapshot(&mut r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid2() -> Grid {
        Grid::new(2, 16, 4.0 * PI).unwrap()
    }

    #[test]
    fn representation_round_trip_is_exact() {
        let g = grid2();
        let f = Field::gaussian_bump(g, 1.0, g.box_length() / 12.0);
        let back = f.to_frequency().into_physical();
        let err: f64 = f
            .data()
            .iter()
            .zip(back.data())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-13, "round trip error {err}");
    }

    #[test]
    fn plane_wave_has_unit_modulus_samples() {
        let g = grid2();
        let f = Field::plane_wave(g, &[3, -2], Complex64::new(2.0, 0.0)).unwrap();
        let p = f.to_physical();
        for z in p.data() {
            assert!((z.norm() - 2.0).abs() < 1e-12);
        }
        // Forward transform recovers the single coefficient.
        let c = p.to_frequency().coefficient(&[3, -2]).unwrap();
        assert!((c - Complex64::new(2.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn snapshot_round_trip_bits() {
        let g = grid2();
        let f = Field::gaussian_bump(g, 0.7, 1.3).into_frequency();
        let mut buf = Vec::new();
        f.write_snapshot(&mut buf).unwrap();
        // 4 magic + 2 version/d + 4 points + 8 box + 1 rep + payload
        assert_eq!(buf.len(), 19 + 16 * g.total_points());
        let back = Field::read_snapshot(&mut buf.as_slice()).unwrap();
        assert_eq!(back.grid(), f.grid());
        assert_eq!(back.representation(), f.representation());
        for (a, b) in f.data().iter().zip(back.data()) {
            assert_eq!(a.re.to_bits(), b.re.to_bits());
            assert_eq!(a.im.to_bits(), b.im.to_bits());
        }
    }

    #[test]
    fn snapshot_rejects_garbage() {
        let mut junk: &[u8] = b"JUNKxxxxxxxxxxxxxxxxx";
        assert!(Field::read_snapshot(&mut junk).is_err());
    }
}
