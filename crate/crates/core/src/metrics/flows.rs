use std::collections::BTreeMap;

use serde::Serialize;

use crate::country::CountryCode;
use crate::ingest::YearWindow;
use crate::mobility::MigrationEvent;

/// Event counts per (origin, destination) pair within a period.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FlowMatrix {
    pub period: YearWindow,
    pub counts: BTreeMap<(CountryCode, CountryCode), u64>,
}

impl FlowMatrix {
    pub fn new(period: YearWindow) -> Self {
        FlowMatrix {
            period,
            counts: BTreeMap::new(),
        }
    }

    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, origin: CountryCode, destination: CountryCode) -> u64 {
        self.counts
            .get(&(origin, destination))
            .copied()
            .unwrap_or(0)
    }

    /// Rows sorted by descending count, then by key.
    pub fn ranked(&self) -> Vec<((CountryCode, CountryCode), u64)> {
        let mut rows: Vec<_> = self.counts.iter().map(|(k, v)| (*k, *v)).collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        rows
    }
}

/// Inflows (destination = focal) and outflows (origin = focal) among events
/// dated inside `period`.
pub fn aggregate_flows(
    events: &[MigrationEvent],
    focal: CountryCode,
    period: YearWindow,
) -> (FlowMatrix, FlowMatrix) {
    let mut inflows = FlowMatrix::new(period);
    let mut outflows = FlowMatrix::new(period);
    for e in events.iter().filter(|e| period.contains(e.year)) {
        if e.destination == focal {
            *inflows.counts.entry((e.origin, e.destination)).or_default() += 1;
        } else if e.origin == focal {
            *outflows
                .counts
                .entry((e.origin, e.destination))
                .or_default() += 1;
        }
    }
    (inflows, outflows)
}
