//! Time evolution: the split-step spectral engine, the Volterra reduction
//! and the records they produce.

mod initial;
mod spectral;
mod volterra;

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

pub use initial::{initial_data, smooth_noise, InitialData};
pub use spectral::{step_strang, Observables, SpectralEngine};
pub use volterra::{
    free_projection, kernel, kernel_at, reconstruct_field, solve_volterra, MemoryKernel, VolterraSolution,
    MAX_VOLTERRA_STEPS,
};

use crate::grid::{FourierGrid, Space, SpinorField};
use crate::{Complex64, Error, Result, Spinor};

/// Append-only time series sampled by an engine.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrajectoryRecord {
    pub t: Vec<f64>,
    pub y: Vec<Complex64>,
    pub charge: Vec<f64>,
    pub energy: Vec<f64>,
    pub dist: Vec<f64>,
    /// (time, file name) of every field dump.
    pub snapshots: Vec<(f64, String)>,
}

impl TrajectoryRecord {
    pub fn push(&mut self, t: f64, y: Complex64, charge: f64, energy: f64) -> Result<()> {
        if let Some(&last) = self.t.last() {
            if !(t > last) {
                return Err(Error::InvalidInput(format!("record time {t} does not follow {last}")));
            }
        }
        self.t.push(t);
        self.y.push(y);
        self.charge.push(charge);
        self.energy.push(energy);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// max |Q(t) − Q(0)| / Q(0).
    pub fn charge_drift(&self) -> f64 {
        relative_drift(&self.charge)
    }

    /// max |E(t) − E(0)| / |E(0)|.
    pub fn energy_drift(&self) -> f64 {
        relative_drift(&self.energy)
    }

    /// CSV with columns t, re_y, im_y, Q, E (and dist when recorded).
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let with_dist = !self.dist.is_empty();
        if with_dist && self.dist.len() != self.t.len() {
            return Err(Error::InvalidInput("distance series length differs from the time grid".into()));
        }
        write!(w, "t,re_y,im_y,Q,E")?;
        if with_dist {
            write!(w, ",dist")?;
        }
        writeln!(w)?;
        for i in 0..self.t.len() {
            write!(
                w,
                "{:.12e},{:.12e},{:.12e},{:.12e},{:.12e}",
                self.t[i], self.y[i].re, self.y[i].im, self.charge[i], self.energy[i]
            )?;
            if with_dist {
                write!(w, ",{:.12e}", self.dist[i])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

fn relative_drift(v: &[f64]) -> f64 {
    let Some(&first) = v.first() else { return 0.0 };
    let worst = v.iter().map(|x| (x - first).abs()).fold(0.0, f64::max);
    if first == 0.0 {
        worst
    } else {
        worst / first.abs()
    }
}

/// Header line of a field dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotHeader {
    pub n: usize,
    pub l: f64,
    pub m: f64,
    pub time: f64,
    pub space: Space,
    pub byte_order: String,
    pub components: usize,
}

/// Writes a JSON header line, then the samples as little-endian f64 pairs
/// (re, im) in row-major [i][j][k][component] order.
pub fn write_snapshot<W: Write>(mut w: W, field: &SpinorField, m: f64, time: f64) -> Result<()> {
    let header = SnapshotHeader {
        n: field.grid.n,
        l: field.grid.l,
        m,
        time,
        space: field.space,
        byte_order: "little".into(),
        components: 4,
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(field.data.len() * 64);
    for s in &field.data {
        for z in s.iter() {
            buf.extend_from_slice(&z.re.to_le_bytes());
            buf.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_snapshot<R: BufRead>(mut r: R) -> Result<(SnapshotHeader, SpinorField)> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: SnapshotHeader = serde_json::from_str(line.trim_end())?;
    if header.byte_order != "little" || header.components != 4 {
        return Err(Error::InvalidInput("unsupported snapshot layout".into()));
    }
    let grid = FourierGrid::new(header.n, header.l)?;
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() != grid.len() * 64 {
        return Err(Error::InvalidInput(format!(
            "snapshot body has {} bytes, expected {}",
            bytes.len(),
            grid.len() * 64
        )));
    }
    let val = |k: usize| f64::from_le_bytes(bytes[8 * k..8 * k + 8].try_into().unwrap());
    let data = (0..grid.len())
        .map(|i| {
            let b = 8 * i;
            Spinor::new(
                Complex64::new(val(b), val(b + 1)),
                Complex64::new(val(b + 2), val(b + 3)),
                Complex64::new(val(b + 4), val(b + 5)),
                Complex64::new(val(b + 6), val(b + 7)),
            )
        })
        .collect();
    let field = SpinorField { grid, data, space: header.space };
    Ok((header, field))
}
