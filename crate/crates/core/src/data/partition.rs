//! Splitting a dataset across simulated clients.

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::data::dataset::{Sample, TabularDataset};
use crate::rng::{rng_from, SimRng};
use crate::{Error, Result};

/// Dirichlet draws attempted before giving up on a partition with an empty shard.
pub const MAX_DIRICHLET_DRAWS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartitionMode {
    #[default]
    Dirichlet,
    PureGroup,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PartitionConfig {
    pub num_clients: usize,
    /// Dirichlet concentration; larger values give more homogeneous clients.
    pub concentration: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub mode: PartitionMode,
}

impl PartitionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.num_clients == 0 {
            return Err(Error::InvalidConfig(
                "num_clients must be at least 1".into(),
            ));
        }
        if !(self.concentration > 0.0 && self.concentration.is_finite()) {
            return Err(Error::InvalidConfig(
                "Dirichlet concentration must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One client's local data. `weight` is `n_k / n` over the whole partition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClientShard {
    pub client_id: usize,
    pub samples: Vec<Sample>,
    /// Row indices into the partitioned dataset, ascending.
    pub indices: Vec<usize>,
    pub weight: f64,
}

impl ClientShard {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Whether both sensitive groups are present.
    pub fn has_both_groups(&self) -> bool {
        let ones = self.samples.iter().filter(|s| s.sensitive == 1).count();
        ones > 0 && ones < self.samples.len()
    }

    /// Wraps a whole dataset as a single client of weight 1.
    pub fn whole(ds: &TabularDataset) -> ClientShard {
        ClientShard {
            client_id: 0,
            samples: ds.samples.clone(),
            indices: (0..ds.len()).collect(),
            weight: 1.0,
        }
    }
}

/// Empirical joint distribution of `(A, Y)`, indexed `p[a][y]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellProbs {
    pub p: [[f64; 2]; 2],
}

impl CellProbs {
    pub fn of_samples(samples: &[Sample]) -> CellProbs {
        let mut p = [[0.0; 2]; 2];
        for s in samples {
            let (a, y) = s.cell();
            p[a][y] += 1.0;
        }
        let n = samples.len().max(1) as f64;
        for row in &mut p {
            for v in row.iter_mut() {
                *v /= n;
            }
        }
        CellProbs { p }
    }

    pub fn group(&self, a: usize) -> f64 {
        self.p[a][0] + self.p[a][1]
    }

    pub fn label(&self, y: usize) -> f64 {
        self.p[0][y] + self.p[1][y]
    }

    pub fn l1_distance(&self, other: &CellProbs) -> f64 {
        self.p
            .iter()
            .flatten()
            .zip(other.p.iter().flatten())
            .map(|(x, y)| (x - y).abs())
            .sum()
    }
}

pub fn cell_probs(shard: &ClientShard) -> CellProbs {
    CellProbs::of_samples(&shard.samples)
}

pub fn partition(ds: &TabularDataset, config: &PartitionConfig) -> Result<Vec<ClientShard>> {
    match config.mode {
        PartitionMode::Dirichlet => dirichlet_partition(ds, config),
        PartitionMode::PureGroup => pure_group_partition(ds, config),
    }
}

/// Integer counts summing to `total`, proportional to `props`, by the
/// largest-remainder rule (ties go to the lower client index).
pub(crate) fn largest_remainder(props: &[f64], total: usize) -> Vec<usize> {
    let mut counts: Vec<usize> = props
        .iter()
        .map(|p| (p * total as f64).floor() as usize)
        .collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..props.len()).collect();
    let frac = |k: usize| props[k] * total as f64 - counts[k] as f64;
    order.sort_by(|&i, &j| frac(j).total_cmp(&frac(i)).then(i.cmp(&j)));
    for &k in order.iter().take(total.saturating_sub(assigned)) {
        counts[k] += 1;
    }
    counts
}

fn dirichlet_draw(rng: &mut SimRng, k: usize, alpha: f64) -> Vec<f64> {
    let gamma = Gamma::new(alpha, 1.0).expect("positive concentration");
    loop {
        let draws: Vec<f64> = (0..k).map(|_| gamma.sample(rng)).collect();
        let sum: f64 = draws.iter().sum();
        if sum > 0.0 && sum.is_finite() {
            return draws.into_iter().map(|x| x / sum).collect();
        }
    }
}

fn build_shards(ds: &TabularDataset, mut members: Vec<Vec<usize>>) -> Vec<ClientShard> {
    let n: usize = members.iter().map(Vec::len).sum();
    members
        .iter_mut()
        .enumerate()
        .map(|(client_id, idx)| {
            idx.sort_unstable();
            ClientShard {
                client_id,
                samples: idx.iter().map(|&i| ds.samples[i].clone()).collect(),
                indices: idx.clone(),
                weight: idx.len() as f64 / n as f64,
            }
        })
        .collect()
}

/// Splits each `(A, Y)` cell across clients with proportions drawn from a
/// symmetric Dirichlet distribution.
pub fn dirichlet_partition(
    ds: &TabularDataset,
    config: &PartitionConfig,
) -> Result<Vec<ClientShard>> {
    config.validate()?;
    let k = config.num_clients;
    let mut cells: Vec<Vec<usize>> = vec![Vec::new(); 4];
    for (i, s) in ds.samples.iter().enumerate() {
        let (a, y) = s.cell();
        cells[2 * a + y].push(i);
    }
    let mut rng = rng_from(config.seed, &[0xD1]);
    for _ in 0..MAX_DIRICHLET_DRAWS {
        let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];
        for cell in &cells {
            let props = dirichlet_draw(&mut rng, k, config.concentration);
            let counts = largest_remainder(&props, cell.len());
            let mut shuffled = cell.clone();
            shuffled.shuffle(&mut rng);
            let mut start = 0;
            for (client, &c) in counts.iter().enumerate() {
                members[client].extend_from_slice(&shuffled[start..start + c]);
                start += c;
            }
        }
        if members.iter().all(|m| !m.is_empty()) {
            let shards = build_shards(ds, members);
            let single_group = shards.iter().filter(|s| !s.has_both_groups()).count();
            if single_group > 0 {
                log::warn!("{single_group} client(s) hold only one sensitive group");
            }
            return Ok(shards);
        }
    }
    Err(Error::EmptyShardAfterRetries(MAX_DIRICHLET_DRAWS))
}

/// Half of the clients receive only `A = 0` samples and the other half only
/// `A = 1`; within a group the samples are dealt out uniformly at random.
/// With an odd client count group 0 gets the extra client.
pub fn pure_group_partition(
    ds: &TabularDataset,
    config: &PartitionConfig,
) -> Result<Vec<ClientShard>> {
    config.validate()?;
    let k = config.num_clients;
    if k < 2 {
        return Err(Error::InvalidConfig(
            "a pure-group partition needs at least two clients".into(),
        ));
    }
    if k % 2 == 1 {
        log::warn!("odd client count {k}: group 0 receives one more client");
    }
    let clients_per_group = [k.div_ceil(2), k / 2];
    let mut rng = rng_from(config.seed, &[0xB6]);
    let mut members: Vec<Vec<usize>> = Vec::with_capacity(k);
    for (group, &m) in clients_per_group.iter().enumerate() {
        let mut idx: Vec<usize> = ds
            .samples
            .iter()
            .enumerate()
            .filter(|(_, s)| s.sensitive as usize == group)
            .map(|(i, _)| i)
            .collect();
        if idx.len() < m {
            return Err(Error::InsufficientGroupSamples {
                group: group as u8,
                available: idx.len(),
                needed: m,
            });
        }
        idx.shuffle(&mut rng);
        let counts = largest_remainder(&vec![1.0 / m as f64; m], idx.len());
        let mut start = 0;
        for c in counts {
            members.push(idx[start..start + c].to_vec());
            start += c;
        }
    }
    Ok(build_shards(ds, members))
}
