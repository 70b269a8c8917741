use crate::error::CoreError;

/// Uniform periodic box `[0, L)^3` with `n` samples per axis.
///
/// Wavenumbers follow the usual FFT layout: axis index `j` carries the
/// integer mode `m = j` for `j < n/2` and `m = j - n` otherwise, so the
/// Nyquist mode `m = -n/2` appears exactly once. The physical wavenumber is
/// `k = 2 pi m / L`.
#[derive(Debug, Clone)]
pub struct Grid3 {
    n: usize,
    length: f64,
    wavenumbers: Vec<f64>,
}

impl PartialEq for Grid3 {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.length == other.length
    }
}

impl Grid3 {
    /// Builds a grid, rejecting odd `n`, `n < 8` and non-positive `L`.
    pub fn new(n: usize, length: f64) -> Result<Self, CoreError> {
        if n % 2 != 0 {
            return Err(CoreError::InvalidGrid(format!("n = {n} is odd")));
        }
        if n < 8 {
            return Err(CoreError::InvalidGrid(format!("n = {n} is below the minimum of 8")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(CoreError::InvalidGrid(format!("box length {length} must be positive and finite")));
        }
        let tau = 2.0 * std::f64::consts::PI;
        let wavenumbers = (0..n).map(|j| tau * Self::mode_for(n, j) as f64 / length).collect();
        Ok(Grid3 { n, length, wavenumbers })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Grid spacing `h = L / n`.
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Cell volume `h^3`.
    pub fn cell_volume(&self) -> f64 {
        let h = self.spacing();
        h * h * h
    }

    /// Total number of sample points `n^3`.
    pub fn point_count(&self) -> usize {
        self.n * self.n * self.n
    }

    fn mode_for(n: usize, j: usize) -> i64 {
        debug_assert!(j < n);
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// Integer mode carried by axis index `j`.
    pub fn mode(&self, j: usize) -> i64 {
        Self::mode_for(self.n, j)
    }

    /// Axis index carrying integer mode `m in [-n/2, n/2)`.
    pub fn index_of_mode(&self, m: i64) -> usize {
        let half = (self.n / 2) as i64;
        assert!(m >= -half && m < half, "mode {m} outside [-{half}, {half})");
        m.rem_euclid(self.n as i64) as usize
    }

    /// Physical wavenumber `2 pi m / L` for axis index `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        self.wavenumbers[j]
    }

    /// Per-axis wavenumbers in FFT layout.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Physical coordinate of sample index `j` along one axis.
    pub fn coordinate(&self, j: usize) -> f64 {
        self.spacing() * j as f64
    }

    /// Signed distance between coordinates under periodic wrap, in `[-L/2, L/2)`.
    pub fn wrapped_delta(&self, x: f64, y: f64) -> f64 {
        let mut d = (x - y) % self.length;
        if d < -0.5 * self.length {
            d += self.length;
        } else if d >= 0.5 * self.length {
            d -= self.length;
        }
        d
    }

    /// Periodic Euclidean distance from sample `(i, j, k)` to a point `c`.
    pub fn distance_to(&self, idx: [usize; 3], c: [f64; 3]) -> f64 {
        let dx = self.wrapped_delta(self.coordinate(idx[0]), c[0]);
        let dy = self.wrapped_delta(self.coordinate(idx[1]), c[1]);
        let dz = self.wrapped_delta(self.coordinate(idx[2]), c[2]);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    /// Box center `(L/2, L/2, L/2)`.
    pub fn center(&self) -> [f64; 3] {
        let c = 0.5 * self.length;
        [c, c, c]
    }

    /// Largest integer mode kept by the two-thirds dealiasing rule.
    pub fn dealias_cap(&self) -> i64 {
        (self.n / 3) as i64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(Grid3::new(7, 1.0).is_err());
        assert!(Grid3::new(9, 1.0).is_err());
        assert!(Grid3::new(6, 1.0).is_err());
        assert!(Grid3::new(8, 0.0).is_err());
        assert!(Grid3::new(8, -2.0).is_err());
        assert!(Grid3::new(8, f64::NAN).is_err());
        assert!(Grid3::new(8, 1.0).is_ok());
    }

    #[test]
    fn nyquist_mode_appears_once() {
        let g = Grid3::new(8, 2.0 * std::f64::consts::PI).unwrap();
        let modes: Vec<i64> = (0..8).map(|j| g.mode(j)).collect();
        assert_eq!(modes, vec![0, 1, 2, 3, -4, -3, -2, -1]);
        assert_eq!(modes.iter().filter(|&&m| m == -4).count(), 1);
        assert!(!modes.contains(&4));
    }

    #[test]
    fn wavenumbers_match_modes() {
        let l = 3.0;
        let g = Grid3::new(16, l).unwrap();
        for j in 0..16 {
            let expect = 2.0 * std::f64::consts::PI * g.mode(j) as f64 / l;
            assert_eq!(g.wavenumber(j), expect);
        }
    }

    #[test]
    fn mode_index_round_trip() {
        let g = Grid3::new(12, 1.0).unwrap();
        for j in 0..12 {
            assert_eq!(g.index_of_mode(g.mode(j)), j);
        }
    }

    #[test]
    fn wrapped_distance_is_symmetric_and_small() {
        let g = Grid3::new(8, 4.0).unwrap();
        assert!((g.wrapped_delta(0.5, 3.9) - 0.6).abs() < 1e-12);
        assert!((g.wrapped_delta(3.9, 0.5).abs() - 0.6).abs() < 1e-12);
        assert!(g.wrapped_delta(0.0, 2.0).abs() <= 2.0);
    }
}
