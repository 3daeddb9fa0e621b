use std::io::Write;

use serde::Serialize;

use crate::grid::GridFunction;

/// Diagnostics at one recorded time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub t: f64,
    pub mass: f64,
    pub h1: f64,
    pub energy: f64,
    pub energy_m: f64,
    pub linf: f64,
    pub luxemburg: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Snapshot {
    pub step: usize,
    pub time: f64,
    pub field: GridFunction,
}

/// Output of one evolution run.
#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryRecord {
    pub dt: f64,
    pub steps: usize,
    /// Steps actually taken (smaller than `steps` when the run aborted).
    pub completed: usize,
    pub diagnostics: Vec<Diagnostics>,
    /// Fields at every recorded time, aligned with `diagnostics`.
    pub fields: Vec<GridFunction>,
    pub snapshots: Vec<Snapshot>,
    pub final_state: GridFunction,
    /// Largest number of inner stages per nonlinear substep (Yosida only).
    pub max_substeps: usize,
}

impl TrajectoryRecord {
    pub fn times(&self) -> Vec<f64> {
        self.diagnostics.iter().map(|d| d.t).collect()
    }

    pub fn series(&self, f: impl Fn(&Diagnostics) -> f64) -> Vec<f64> {
        self.diagnostics.iter().map(f).collect()
    }

    /// Largest `|M(t) − M(0)| / M(0)`.
    pub fn relative_mass_drift(&self) -> f64 {
        let m0 = self.diagnostics[0].mass;
        if m0 == 0.0 {
            return 0.0;
        }
        self.diagnostics.iter().map(|d| (d.mass - m0).abs() / m0).fold(0.0, f64::max)
    }

    /// Largest `|E_m(t) − E_m(0)|`.
    pub fn energy_drift(&self) -> f64 {
        let e0 = self.diagnostics[0].energy_m;
        self.diagnostics.iter().map(|d| (d.energy_m - e0).abs()).fold(0.0, f64::max)
    }

    /// First recorded time with `‖u‖_∞ < threshold`.
    pub fn extinction_time(&self, threshold: f64) -> Option<f64> {
        self.diagnostics.iter().find(|d| d.linf < threshold).map(|d| d.t)
    }

    /// CSV with header `t,mass,h1,energy,energy_m,linf,luxemburg`, preceded by
    /// a `# config_digest: …` comment line.
    pub fn write_csv<W: Write>(&self, w: W, digest: &str) -> csv::Result<()> {
        let mut w = w;
        writeln!(w, "# config_digest: {digest}")?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "mass", "h1", "energy", "energy_m", "linf", "luxemburg"])?;
        for d in &self.diagnostics {
            out.write_record([
                format!("{:e}", d.t),
                format!("{:e}", d.mass),
                format!("{:e}", d.h1),
                format!("{:e}", d.energy),
                format!("{:e}", d.energy_m),
                format!("{:e}", d.linf),
                d.luxemburg.map(|x| format!("{x:e}")).unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}
