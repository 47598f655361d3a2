//! Turning a configuration into matrices, a schedule and `x(0)`.

use std::fs::File;
use std::io::BufReader;

use anyhow::{anyhow, bail, Context, Result};
use log::info;
use rand::Rng;

use circflow::generators::{generate_matrix, generate_schedule, ScheduleSpec};
use circflow::io::{read_matrix, read_wealth};
use circflow::rng::{derive_seed, stream_rng, STREAM_WEALTH};
use circflow::{CirculationMatrix, Schedule, UnitWealth, WealthVector};

use crate::config::{Loaded, Mode};

/// The matrix pool, in configuration order. Generated matrix `r` (0-based)
/// uses seed `derive_seed(seed, r)`.
pub fn matrices(cfg: &Loaded) -> Result<Vec<CirculationMatrix>> {
    let n = cfg.config.economy.n;
    let seed = cfg.seed();
    let mut out = Vec::new();
    for (r, src) in cfg.sources().iter().enumerate() {
        let m = if let Some(file) = &src.file {
            let path = cfg.path(file);
            let reader = BufReader::new(
                File::open(&path).with_context(|| format!("opening {}", path.display()))?,
            );
            let m = read_matrix(reader).with_context(|| format!("loading {}", path.display()))?;
            if m.n() != n {
                bail!("{}: matrix has n = {}, economy.n is {n}", path.display(), m.n());
            }
            m
        } else {
            let topo = cfg.topology_spec(src.topology.as_ref().expect("checked at load"))?;
            let spend = src.spending.as_ref().expect("filled at load").spec();
            let m = generate_matrix(&topo, &spend, derive_seed(seed, r as u64))?;
            info!("generated matrix {} ({} stored entries)", r + 1, m.nnz());
            m
        };
        out.push(m);
    }
    Ok(out)
}

pub fn schedule(cfg: &Loaded, matrices: Vec<CirculationMatrix>) -> Result<Schedule> {
    let spec = ScheduleSpec::new(cfg.schedule_kind(), cfg.steps(), cfg.seed());
    Ok(generate_schedule(&spec, matrices)?)
}

pub enum InitialWealth {
    Float(WealthVector),
    Units(UnitWealth),
}

impl InitialWealth {
    pub fn to_f64(&self) -> WealthVector {
        match self {
            InitialWealth::Float(x) => x.clone(),
            InitialWealth::Units(u) => u.to_f64(),
        }
    }
}

/// `x(0)` per `[economy.initial]`. Uniform draws use the wealth stream of
/// the seed.
pub fn initial_wealth(cfg: &Loaded) -> Result<InitialWealth> {
    let c = &cfg.config;
    let n = c.economy.n;
    let init = &c.economy.initial;
    let values: Vec<f64> = if let Some(v) = init.equal {
        vec![v; n]
    } else if let Some(u) = init.uniform {
        let mut rng = stream_rng(cfg.seed(), STREAM_WEALTH);
        match c.mode {
            Mode::Float => (0..n).map(|_| u.low + (u.high - u.low) * rng.random::<f64>()).collect(),
            Mode::Integer => (0..n)
                .map(|_| rng.random_range(u.low as u64..=u.high as u64) as f64)
                .collect(),
        }
    } else if let Some(p) = init.point_mass {
        let mut v = vec![0.0; n];
        v[p.agent - 1] = p.amount;
        v
    } else if let Some(file) = &init.from_file {
        let path = cfg.path(file);
        let reader =
            BufReader::new(File::open(&path).with_context(|| format!("opening {}", path.display()))?);
        let v = read_wealth(reader).with_context(|| format!("reading {}", path.display()))?;
        if v.len() != n {
            bail!(
                "{}: {} wealth values for economy.n = {n}",
                path.display(),
                v.len()
            );
        }
        v
    } else {
        unreachable!("a default is applied at load")
    };
    match c.mode {
        Mode::Float => Ok(InitialWealth::Float(WealthVector::new(values)?)),
        Mode::Integer => {
            let units = values
                .iter()
                .enumerate()
                .map(|(i, &v)| {
                    if v >= 0.0 && v.fract() == 0.0 && v < u64::MAX as f64 {
                        Ok(v as u64)
                    } else {
                        Err(anyhow!(
                            "agent {}: integer mode needs whole non-negative units, got {v}",
                            i + 1
                        ))
                    }
                })
                .collect::<Result<Vec<u64>>>()?;
            Ok(InitialWealth::Units(UnitWealth::new(units)?))
        }
    }
}
