use rayon::prelude::*;

use crate::coloring::color;
use crate::error::{Error, Result};
use crate::events::{EventSpec, PreparedEvent, SafeZone};
use crate::geom::{build_complex, sample_poisson, window_margin, PointSet, Rect, VoronoiComplex, Window};
use crate::stream::SeedPath;

/// Shared Monte Carlo parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McParams {
    pub intensity: f64,
    pub p: f64,
    pub stream: SeedPath,
    pub workers: usize,
}

impl McParams {
    pub fn new(intensity: f64, p: f64, stream: SeedPath) -> Self {
        Self {
            intensity,
            p,
            stream,
            workers: 1,
        }
    }

    pub fn with_workers(mut self, workers: usize) -> Self {
        self.workers = workers;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !(self.intensity.is_finite() && self.intensity > 0.0) {
            return Err(Error::param("intensity", "must be finite and positive"));
        }
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::param("p", "must lie in [0, 1]"));
        }
        if self.workers == 0 {
            return Err(Error::param("workers", "must be at least 1"));
        }
        Ok(())
    }
}

/// A random environment together with a family of events evaluated on
/// independent colorings of it.
pub trait EventModel: Sync {
    type Env: Send;

    /// Number of events reported by [`EventModel::outcomes`].
    fn arity(&self) -> usize;

    /// Draw an environment; `None` marks a discarded replicate.
    fn environment(&self, stream: &SeedPath) -> Result<Option<Self::Env>>;

    /// Draw one coloring of `env` and push the event indicators onto `out`,
    /// which the runners pass in empty.
    fn outcomes(&self, env: &Self::Env, stream: &SeedPath, out: &mut Vec<bool>) -> Result<()>;
}

/// Poisson environments in a window padded around all events' regions.
#[derive(Clone, Debug)]
pub struct SpecModel {
    specs: Vec<EventSpec>,
    intensity: f64,
    p: f64,
    window: Window,
    fixed_window: bool,
}

pub struct SpecEnv {
    pub points: PointSet,
    pub complex: VoronoiComplex,
    pub events: Vec<PreparedEvent>,
}

/// Fresh attempts allowed when an environment is too degenerate to
/// triangulate.
const DEGENERATE_RETRIES: u64 = 64;

impl SpecModel {
    pub fn new(specs: Vec<EventSpec>, intensity: f64, p: f64) -> Result<Self> {
        let bbox = Self::validate_specs(&specs)?;
        let m = window_margin(bbox.diameter());
        let g = bbox.grow(m);
        let window = Window::new(g.xmin, g.ymin, g.xmax, g.ymax)?;
        Ok(Self {
            specs,
            intensity,
            p,
            window,
            fixed_window: false,
        })
    }

    /// Environments in an explicit window, without safe-zone checks or
    /// discards. For tiny test environments.
    pub fn with_window(specs: Vec<EventSpec>, intensity: f64, p: f64, window: Window) -> Result<Self> {
        Self::validate_specs(&specs)?;
        Ok(Self {
            specs,
            intensity,
            p,
            window,
            fixed_window: true,
        })
    }

    fn validate_specs(specs: &[EventSpec]) -> Result<Rect> {
        if specs.is_empty() {
            return Err(Error::param("events", "at least one event is required"));
        }
        let mut bbox = specs[0].dependency_bbox();
        for s in specs {
            s.validate()?;
            bbox = bbox.union(&s.dependency_bbox());
        }
        Ok(bbox)
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn specs(&self) -> &[EventSpec] {
        &self.specs
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// Environment with its events prepared, before the discard decision.
    pub fn prepare(&self, stream: &SeedPath) -> Result<SpecEnv> {
        let zone = if self.fixed_window { SafeZone::Skip } else { SafeZone::Check };
        let mut last = None;
        for attempt in 0..DEGENERATE_RETRIES {
            let s = if attempt == 0 { *stream } else { stream.child(attempt) };
            let points = sample_poisson(self.window, self.intensity, &s)?;
            let complex = match build_complex(&points) {
                Ok(c) => c,
                Err(e @ Error::DegenerateGeometry(_)) => {
                    last = Some(e);
                    continue;
                }
                Err(e) => return Err(e),
            };
            let events = self
                .specs
                .iter()
                .map(|s| PreparedEvent::new(&complex, &points, s, zone))
                .collect::<Result<Vec<_>>>()?;
            return Ok(SpecEnv { points, complex, events });
        }
        Err(last.expect("at least one attempt"))
    }
}

impl EventModel for SpecModel {
    type Env = SpecEnv;

    fn arity(&self) -> usize {
        self.specs.len()
    }

    fn environment(&self, stream: &SeedPath) -> Result<Option<SpecEnv>> {
        let env = self.prepare(stream)?;
        if !self.fixed_window && env.events.iter().any(|e| e.has_boundary_cells()) {
            return Ok(None);
        }
        Ok(Some(env))
    }

    fn outcomes(&self, env: &SpecEnv, stream: &SeedPath, out: &mut Vec<bool>) -> Result<()> {
        let coloring = color(&env.complex, self.p, stream)?;
        out.clear();
        for e in &env.events {
            out.push(e.holds(&coloring)?);
        }
        Ok(())
    }
}

/// Map `f` over `0..n` on a pool of `workers` threads, results in index
/// order. The first error in index order wins.
pub fn par_map<T, F>(workers: usize, n: u64, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    if workers <= 1 {
        return (0..n).map(f).collect();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::param("workers", e.to_string()))?;
    let results: Vec<Result<T>> = pool.install(|| (0..n).into_par_iter().map(&f).collect());
    results.into_iter().collect()
}
