use serde::{Deserialize, Serialize};

use super::UnitSeries;
use crate::error::{Error, Result};
use crate::math::Matrix;

/// Window length `n`, feature count `j`, forecast horizon `z`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WindowGeometry {
    pub n: usize,
    pub j: usize,
    pub z: usize,
}

impl WindowGeometry {
    pub fn new(n: usize, j: usize, z: usize) -> Result<Self> {
        let g = WindowGeometry { n, j, z };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidGeometry(format!("window length {} < 2", self.n)));
        }
        if self.j < 1 {
            return Err(Error::InvalidGeometry("no features".into()));
        }
        if self.z < 1 || self.z >= self.n {
            return Err(Error::InvalidGeometry(format!(
                "horizon {} must satisfy 1 <= Z < N = {}",
                self.z, self.n
            )));
        }
        Ok(())
    }

    /// Conditioning prefix length `N − Z`.
    pub fn x(&self) -> usize {
        self.n - self.z
    }

    pub fn check(&self, values: &Matrix) -> Result<()> {
        if values.shape() != (self.j, self.n) {
            return Err(Error::GeometryMismatch(format!(
                "window is {}x{}, model expects {}x{}",
                values.rows(),
                values.cols(),
                self.j,
                self.n
            )));
        }
        Ok(())
    }
}

/// A J×N window of measurements (`values[j][n]` = feature j at step n).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub values: Matrix,
    /// Remaining cycles after the window's last step. `None` for windows
    /// built from forecasts.
    pub rul_target: Option<f64>,
    pub unit_id: u32,
    pub end_cycle: u32,
}

impl Instance {
    pub fn features(&self) -> usize {
        self.values.rows()
    }

    pub fn steps(&self) -> usize {
        self.values.cols()
    }

    pub fn is_synthetic(&self) -> bool {
        self.rul_target.is_none()
    }

    pub fn target(&self) -> Result<f64> {
        self.rul_target
            .ok_or_else(|| Error::InvalidArgument("instance has no RUL target".into()))
    }
}

/// Cuts `unit` into windows of `geometry.n` consecutive cycles, ending at
/// cycles `n, n + stride, …`. Units shorter than the window yield nothing.
pub fn make_windows(
    unit: &UnitSeries,
    geometry: &WindowGeometry,
    stride: usize,
    rul_cap: Option<f64>,
) -> Result<Vec<Instance>> {
    if stride == 0 {
        return Err(Error::InvalidArgument("stride must be positive".into()));
    }
    let len = unit.len();
    let n = geometry.n;
    if unit.features() != geometry.j {
        return Err(Error::GeometryMismatch(format!(
            "unit {} has {} features, geometry expects {}",
            unit.unit_id,
            unit.features(),
            geometry.j
        )));
    }
    let mut out = Vec::new();
    if len < n {
        return Ok(out);
    }
    let mut end = n;
    while end <= len {
        let start = end - n;
        let values = Matrix::from_fn(geometry.j, n, |j, step| unit.readings[start + step][j])?;
        let mut rul = (len - end) as f64;
        if let Some(cap) = rul_cap {
            rul = rul.min(cap);
        }
        out.push(Instance {
            values,
            rul_target: Some(rul),
            unit_id: unit.unit_id,
            end_cycle: unit.cycles[end - 1],
        });
        end += stride;
    }
    Ok(out)
}
