use serde::{Deserialize, Serialize};

use super::{par_map, Estimate, EventModel, McParams, SpecModel};
use crate::error::{Error, Result};
use crate::events::EventSpec;
use crate::stream::SeedPath;

/// Annealed frequencies of every event of a model over shared replicates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnealedRun {
    pub estimates: Vec<Estimate>,
    pub successes: Vec<u64>,
    pub kept: u64,
    pub discarded: u64,
}

/// Replicate `i` draws its environment from `stream.child(i).child(0)` and
/// its coloring from `stream.child(i).child(1)`.
pub fn run_annealed<M: EventModel>(model: &M, replicates: u64, stream: &SeedPath, workers: usize) -> Result<AnnealedRun> {
    if replicates == 0 {
        return Err(Error::param("replicates", "must be at least 1"));
    }
    let per: Vec<Option<Vec<bool>>> = par_map(workers, replicates, |i| {
        let s = stream.child(i);
        let Some(env) = model.environment(&s.child(0))? else {
            return Ok(None);
        };
        let mut out = Vec::with_capacity(model.arity());
        model.outcomes(&env, &s.child(1), &mut out)?;
        Ok(Some(out))
    })?;
    let mut successes = vec![0u64; model.arity()];
    let mut kept = 0u64;
    for o in per.iter().flatten() {
        kept += 1;
        for (s, &b) in successes.iter_mut().zip(o) {
            *s += u64::from(b);
        }
    }
    let discarded = replicates - kept;
    if kept == 0 {
        return Err(Error::AllDiscarded { discarded });
    }
    Ok(AnnealedRun {
        estimates: successes.iter().map(|&s| Estimate::proportion(s, kept)).collect(),
        successes,
        kept,
        discarded,
    })
}

/// Annealed probability of one event: fresh environment and fresh coloring
/// per replicate, discarded replicates excluded.
pub fn estimate_annealed(spec: &EventSpec, params: &McParams, replicates: u64) -> Result<Estimate> {
    params.validate()?;
    let model = SpecModel::new(vec![spec.clone()], params.intensity, params.p)?;
    Ok(run_annealed(&model, replicates, &params.stream, params.workers)?.estimates[0])
}
