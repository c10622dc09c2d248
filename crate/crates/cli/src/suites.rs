//! Benchmark suites: desk-scale versions of the generator grids, fuzzed and
//! unrolled variants of them, and duplicated protocols.

use std::collections::BTreeSet;
use std::path::Path;

use anyhow::{bail, Context, Result};
use chorex_core::testgen::{
    fuzz, generate, unroll_transform, FuzzError, FuzzParams, GenParams, UnrollError, UnrollParams,
};
use chorex_core::{amend, parse_choreography, parse_network, project, Choreography, Network, ProcessName};

use crate::protocols::PROTOCOLS;

/// Preset suite names accepted by `bench --suite`.
pub const PRESETS: &[&str] =
    &["size", "processes", "ifs-finite", "ifs-procedures", "procedures", "table2-small", "fuzz", "unroll", "duplicate"];

/// Seeds per grid cell.
pub const GRID_SEEDS: u64 = 8;
/// Seeds per cell of the two-parameter conditionals/procedures grid.
pub const PAIR_SEEDS: u64 = 3;
/// Conditional counts of the `ifs-finite` grid.
pub const IFS: [usize; 7] = [1, 2, 4, 8, 12, 16, 20];
/// Fuzzer rows as (deletions, swaps).
pub const FUZZ_ROWS: [(usize, usize); 3] = [(0, 1), (1, 0), (2, 2)];
/// Unroller settings as (unfoldings, shifts).
pub const UNROLL_ROWS: [(usize, usize); 2] = [(1, 1), (2, 2)];

/// One benchmark input.
#[derive(Debug, Clone)]
pub struct Instance {
    pub name: String,
    pub network: Network,
    /// The amended choreography the network was projected from, if any.
    pub source: Option<Choreography>,
}

impl Instance {
    fn projected(name: String, c: &Choreography) -> Result<Self> {
        let source = amend(c);
        let network = project(&source).with_context(|| format!("projecting {name}"))?;
        Ok(Instance { name, network, source: Some(source) })
    }
}

/// Generator parameters of a grid suite, with instance names.
pub fn grid(suite: &str) -> Option<Vec<(String, GenParams)>> {
    let mut out = Vec::new();
    let mut cells = |label: String, p: GenParams, seeds: u64| {
        for s in 0..seeds {
            out.push((format!("{label}-{s}"), p.seed(s)));
        }
    };
    match suite {
        "size" => (1..=8).for_each(|k| cells(format!("size-{k}"), GenParams::new(6, 50 * k, 0, 0), GRID_SEEDS)),
        "processes" => {
            (1..=6).for_each(|k| cells(format!("processes-{k}"), GenParams::new(5 * k, 100, 0, 0), GRID_SEEDS))
        }
        "ifs-finite" => IFS.iter().for_each(|&f| cells(format!("ifs-{f}"), GenParams::new(6, 50, f, 0), GRID_SEEDS)),
        "ifs-procedures" => {
            for j in 0..=5 {
                for k in 0..=3 {
                    cells(format!("ifsproc-{j}-{k}"), GenParams::new(5, 100, j, k), PAIR_SEEDS);
                }
            }
        }
        "procedures" => (1..=8).for_each(|k| cells(format!("procedures-{k}"), GenParams::new(5, 20, 8, k), GRID_SEEDS)),
        "table2-small" => {
            for s in ["size", "processes", "ifs-finite", "ifs-procedures", "procedures"] {
                out.extend(grid(s).expect("preset"));
            }
        }
        _ => return None,
    }
    Some(out)
}

/// Projections of the amended choreographies of a grid suite.
pub fn generated(suite: &str) -> Result<Option<Vec<Instance>>> {
    let Some(cells) = grid(suite) else { return Ok(None) };
    let mut out = Vec::with_capacity(cells.len());
    for (name, p) in cells {
        let c = generate(&p).with_context(|| format!("generating {name}"))?;
        out.push(Instance::projected(name, &c)?);
    }
    Ok(Some(out))
}

/// Fuzzed copies of `base`, one per instance that has enough actions.
pub fn fuzzed(base: &[Instance], deletions: usize, swaps: usize) -> Vec<Instance> {
    base.iter()
        .enumerate()
        .filter_map(|(i, inst)| match fuzz(&inst.network, &FuzzParams::new(deletions, swaps).seed(i as u64)) {
            Ok(network) => {
                Some(Instance { name: format!("fuzz-d{deletions}-s{swaps}/{}", inst.name), network, source: None })
            }
            Err(FuzzError::NothingToFuzz(_)) => None,
        })
        .collect()
}

/// Unrolled copies of the instances of `base` that have procedures.
pub fn unrolled(base: &[Instance], unfoldings: usize, shifts: usize) -> Vec<Instance> {
    base.iter()
        .enumerate()
        .filter_map(|(i, inst)| {
            match unroll_transform(&inst.network, &UnrollParams::new(unfoldings, shifts).seed(i as u64)) {
                Ok(network) => Some(Instance {
                    name: format!("unroll-u{unfoldings}-s{shifts}/{}", inst.name),
                    network,
                    source: None,
                }),
                Err(UnrollError::NothingToUnroll) => None,
            }
        })
        .collect()
}

/// Two disjoint copies of `n`; the second has `suffix` appended to every
/// process name.
pub fn doubled(n: &Network, suffix: &str) -> Network {
    let copy = n.rename_processes(|p| ProcessName::new(format!("{p}{suffix}")));
    let mut out = n.clone();
    out.processes.extend(copy.processes);
    out
}

/// Each protocol, followed by its doubled version.
pub fn duplicate() -> Result<Vec<Instance>> {
    let mut out = Vec::new();
    for (name, text) in PROTOCOLS {
        let c = parse_choreography(text)?.components.remove(0);
        let single = Instance::projected(name.to_string(), &c)?;
        let double = Instance { name: format!("{name}-double"), network: doubled(&single.network, "_b"), source: None };
        out.push(single);
        out.push(double);
    }
    Ok(out)
}

/// Instances of a preset suite, or of a directory of `.net` files (sorted
/// by file name).
pub fn load(suite: &str) -> Result<Vec<Instance>> {
    if let Some(v) = generated(suite)? {
        return Ok(v);
    }
    match suite {
        "fuzz" => {
            let base = generated("table2-small")?.expect("preset");
            Ok(FUZZ_ROWS.iter().flat_map(|&(d, s)| fuzzed(&base, d, s)).collect())
        }
        "unroll" => {
            let base = unroll_base()?;
            Ok(UNROLL_ROWS.iter().flat_map(|&(u, s)| unrolled(&base, u, s)).collect())
        }
        "duplicate" => duplicate(),
        _ => {
            let dir = Path::new(suite);
            if !dir.is_dir() {
                bail!("unknown suite `{suite}` (expected one of {} or a directory)", PRESETS.join(", "));
            }
            from_dir(dir)
        }
    }
}

/// Grid instances with procedures: the inputs of the `unroll` suite.
pub fn unroll_base() -> Result<Vec<Instance>> {
    let mut base = generated("ifs-procedures")?.expect("preset");
    base.extend(generated("procedures")?.expect("preset"));
    base.retain(|i| i.network.processes.values().any(|t| !t.defs.is_empty()));
    Ok(base)
}

fn from_dir(dir: &Path) -> Result<Vec<Instance>> {
    let mut paths: Vec<_> = std::fs::read_dir(dir)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
    paths.retain(|p| p.extension().is_some_and(|e| e == "net"));
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?;
            let network = parse_network(&text).with_context(|| format!("parsing {}", p.display()))?;
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(Instance { name, network, source: None })
        })
        .collect()
}

/// Processes named in a comma-separated list.
pub fn process_list(s: &str) -> BTreeSet<ProcessName> {
    s.split(',').map(str::trim).filter(|p| !p.is_empty()).map(ProcessName::new).collect()
}
