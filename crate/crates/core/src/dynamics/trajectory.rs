use crate::state_maps::ActionAnglePoint;
use std::io::{self, Write};

/// Sampled curve in a 2-D chart. `positions[k]` and `velocities[k]` belong to
/// `times[k]`; angles are stored unwrapped.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub positions: Vec<[f64; 2]>,
    pub velocities: Option<Vec<[f64; 2]>>,
    pub noise: Option<Vec<f64>>,
}

impl Trajectory {
    pub fn with_velocities(capacity: usize) -> Self {
        Self {
            times: Vec::with_capacity(capacity),
            positions: Vec::with_capacity(capacity),
            velocities: Some(Vec::with_capacity(capacity)),
            noise: None,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn push(&mut self, t: f64, x: [f64; 2], v: [f64; 2]) {
        self.times.push(t);
        self.positions.push(x);
        self.velocities.get_or_insert_with(Vec::new).push(v);
    }

    pub fn point(&self, k: usize) -> ActionAnglePoint {
        let [action, angle] = self.positions[k];
        ActionAnglePoint { action, angle }
    }

    pub fn velocity(&self, k: usize) -> Option<[f64; 2]> {
        self.velocities.as_ref().map(|v| v[k])
    }

    pub fn last_point(&self) -> Option<ActionAnglePoint> {
        (!self.is_empty()).then(|| self.point(self.len() - 1))
    }

    /// Checks strictly increasing times and matching series lengths.
    pub fn is_consistent(&self) -> bool {
        let n = self.times.len();
        self.positions.len() == n
            && self.velocities.as_ref().is_none_or(|v| v.len() == n)
            && self.noise.as_ref().is_none_or(|v| v.len() == n)
            && self.times.windows(2).all(|w| w[1] > w[0])
    }

    /// Writes `t,<x1>,<x2>,d<x1>,d<x2>[,xi]` rows with round-trip float formatting.
    pub fn write_csv<W: Write>(&self, mut w: W, names: [&str; 2]) -> io::Result<()> {
        let [a, b] = names;
        write!(w, "t,{a},{b},d{a},d{b}")?;
        if self.noise.is_some() {
            write!(w, ",xi")?;
        }
        writeln!(w)?;
        for k in 0..self.len() {
            let [x1, x2] = self.positions[k];
            write!(w, "{:?},{:?},{:?}", self.times[k], x1, x2)?;
            match self.velocity(k) {
                Some([v1, v2]) => write!(w, ",{v1:?},{v2:?}")?,
                None => write!(w, ",,")?,
            }
            if let Some(xi) = &self.noise {
                write!(w, ",{:?}", xi[k])?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}
