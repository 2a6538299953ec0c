//! Two-department admission data: each department admits both groups at the
//! same rate, yet the pooled admission rates differ by 48 points.
//!
//! Group 0 is female. Department A: 90 women (18 admitted), 10 men
//! (2 admitted). Department B: 10 women (8 admitted), 90 men (72 admitted).

use crate::data::{ClientShard, Sample};
use crate::fairness::{FairnessStats, MetricKind};
use crate::model::ModelParams;

fn department(client_id: usize, groups: [(usize, usize); 2]) -> ClientShard {
    let mut samples = Vec::new();
    for (a, (total, admitted)) in groups.into_iter().enumerate() {
        for i in 0..total {
            let y = u8::from(i < admitted);
            let x = if y == 1 { 1.0 } else { -1.0 };
            samples.push(Sample::new(vec![x], a as u8, y).expect("binary fixture"));
        }
    }
    ClientShard {
        client_id,
        indices: (0..samples.len()).collect(),
        samples,
        weight: 0.5,
    }
}

/// Both departments as equally weighted clients, plus a model that predicts
/// the admission decision exactly.
pub fn admission_shards() -> (Vec<ClientShard>, ModelParams) {
    let shards = vec![
        department(0, [(90, 18), (10, 2)]),
        department(1, [(10, 8), (90, 72)]),
    ];
    (shards, ModelParams::from_parts(vec![0.0, 40.0], 0.0))
}

/// Statistical-parity quadruples of the two departments.
pub fn admission_stats() -> Vec<FairnessStats> {
    let sp = MetricKind::StatisticalParity;
    vec![
        FairnessStats::new(0.18, 0.9, 0.02, 0.1, sp),
        FairnessStats::new(0.08, 0.1, 0.72, 0.9, sp),
    ]
}
