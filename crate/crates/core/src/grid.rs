//! Uniform space-time grids.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    /// `values[k][j]` is the average over `[x_min + j dx, x_min + (j+1) dx]`.
    CellAverage,
    /// `values[k][j]` is the value at `x_min + j dx`.
    Nodal,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct GridMeta {
    #[serde(default)]
    pub cfl: Option<f64>,
    #[serde(default)]
    pub flux_id: Option<String>,
    /// Time step of the scheme that produced the grid, when it differs from
    /// the storage spacing.
    #[serde(default)]
    pub scheme_dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSolution {
    pub kind: GridKind,
    pub x_min: f64,
    pub dx: f64,
    pub t_min: f64,
    pub dt: f64,
    /// Indexed `(time_step, cell)`.
    pub values: Vec<Vec<f64>>,
    #[serde(default)]
    pub meta: GridMeta,
}

/// The JSON envelope written next to CSV exports.
#[derive(Serialize)]
struct Envelope<'a> {
    kind: GridKind,
    x_min: f64,
    dx: f64,
    t_min: f64,
    dt: f64,
    cells: usize,
    steps: usize,
    cfl: Option<f64>,
    flux_id: Option<&'a str>,
    scheme_dt: Option<f64>,
    values: &'a [Vec<f64>],
}

impl GridSolution {
    pub fn new(kind: GridKind, x_min: f64, dx: f64, t_min: f64, dt: f64, values: Vec<Vec<f64>>) -> Result<Self> {
        let g = Self {
            kind,
            x_min,
            dx,
            t_min,
            dt,
            values,
            meta: GridMeta::default(),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dx > 0.0) || !(self.dt > 0.0) {
            return Err(Error::invalid("grid spacings must be positive"));
        }
        let n = self.values.first().map(Vec::len).unwrap_or(0);
        if n == 0 || self.values.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("grid rows must be non-empty and of equal length"));
        }
        Ok(())
    }

    /// Samples `f(t, x)` at the nodes of a nodal grid.
    pub fn sample_nodal<F: FnMut(f64, f64) -> f64>(
        x_min: f64,
        dx: f64,
        nx: usize,
        t_min: f64,
        dt: f64,
        nt: usize,
        mut f: F,
    ) -> Result<Self> {
        let values = (0..nt)
            .map(|k| {
                let t = t_min + k as f64 * dt;
                (0..nx).map(|j| f(t, x_min + j as f64 * dx)).collect()
            })
            .collect();
        Self::new(GridKind::Nodal, x_min, dx, t_min, dt, values)
    }

    pub fn nt(&self) -> usize {
        self.values.len()
    }

    pub fn nx(&self) -> usize {
        self.values[0].len()
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t_min + k as f64 * self.dt
    }

    /// Position attached to column `j`: the cell centre or the node.
    pub fn x(&self, j: usize) -> f64 {
        match self.kind {
            GridKind::CellAverage => self.x_min + (j as f64 + 0.5) * self.dx,
            GridKind::Nodal => self.x_min + j as f64 * self.dx,
        }
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.nx()).map(|j| self.x(j)).collect()
    }

    pub fn x_max(&self) -> f64 {
        match self.kind {
            GridKind::CellAverage => self.x_min + self.nx() as f64 * self.dx,
            GridKind::Nodal => self.x_min + (self.nx() - 1) as f64 * self.dx,
        }
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.nt() - 1)
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.values[k]
    }

    pub fn last_row(&self) -> &[f64] {
        self.values.last().expect("non-empty grid")
    }

    /// Index of the stored row closest to `t`.
    pub fn nearest_row(&self, t: f64) -> usize {
        let k = ((t - self.t_min) / self.dt).round();
        (k.max(0.0) as usize).min(self.nt() - 1)
    }

    /// Linear interpolation in `x` within row `k`, clamped to the grid.
    pub fn interpolate_row(&self, k: usize, x: f64) -> f64 {
        let row = &self.values[k];
        let s = (x - self.x(0)) / self.dx;
        if s <= 0.0 {
            return row[0];
        }
        let n = row.len();
        if s >= (n - 1) as f64 {
            return row[n - 1];
        }
        let j = s.floor() as usize;
        let w = s - j as f64;
        row[j] * (1.0 - w) + row[j + 1] * w
    }

    /// Bilinear interpolation, clamped to the grid.
    pub fn interpolate(&self, t: f64, x: f64) -> f64 {
        let s = (t - self.t_min) / self.dt;
        if s <= 0.0 {
            return self.interpolate_row(0, x);
        }
        let last = self.nt() - 1;
        if s >= last as f64 {
            return self.interpolate_row(last, x);
        }
        let k = s.floor() as usize;
        let w = s - k as f64;
        self.interpolate_row(k, x) * (1.0 - w) + self.interpolate_row(k + 1, x) * w
    }

    /// `sum(values) * dx` for row `k`.
    pub fn mass(&self, k: usize) -> f64 {
        self.values[k].iter().sum::<f64>() * self.dx
    }

    /// Grid restricted to every `stride`-th row.
    pub fn thin_rows(&self, stride: usize) -> Self {
        let stride = stride.max(1);
        let mut values: Vec<Vec<f64>> = self.values.iter().step_by(stride).cloned().collect();
        if !(self.nt() - 1).is_multiple_of(stride) {
            // keep the grid uniform: drop the partial tail
            values.truncate((self.nt() - 1) / stride + 1);
        }
        Self {
            dt: self.dt * stride as f64,
            values,
            ..self.clone()
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "t,x,value")?;
        for k in 0..self.nt() {
            let t = self.t(k);
            for (j, v) in self.values[k].iter().enumerate() {
                writeln!(w, "{},{},{}", t, self.x(j), v)?;
            }
        }
        Ok(())
    }

    pub fn to_json_envelope(&self) -> String {
        let env = Envelope {
            kind: self.kind,
            x_min: self.x_min,
            dx: self.dx,
            t_min: self.t_min,
            dt: self.dt,
            cells: self.nx(),
            steps: self.nt(),
            cfl: self.meta.cfl,
            flux_id: self.meta.flux_id.as_deref(),
            scheme_dt: self.meta.scheme_dt,
            values: &self.values,
        };
        serde_json::to_string(&env).expect("grid serializes")
    }

    /// Reads the envelope written by [`GridSolution::to_json_envelope`].
    pub fn from_json_envelope(s: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Owned {
            kind: GridKind,
            x_min: f64,
            dx: f64,
            t_min: f64,
            dt: f64,
            #[serde(default)]
            cfl: Option<f64>,
            #[serde(default)]
            flux_id: Option<String>,
            #[serde(default)]
            scheme_dt: Option<f64>,
            values: Vec<Vec<f64>>,
        }
        let o: Owned = serde_json::from_str(s)?;
        let mut g = Self::new(o.kind, o.x_min, o.dx, o.t_min, o.dt, o.values)?;
        g.meta = GridMeta {
            cfl: o.cfl,
            flux_id: o.flux_id,
            scheme_dt: o.scheme_dt,
        };
        Ok(g)
    }
}
