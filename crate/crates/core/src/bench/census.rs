use serde::Serialize;

/// Cost of one field of one structure entry.
pub const FIELD_UNITS: u64 = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Id,
    Score,
    Weight,
    Bitmask,
}

/// Entry counts of live structures; graph and tf-idf storage never enter.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct Census {
    fields: u64,
}

impl Census {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records `entries` entries, each made of `fields`.
    pub fn add(&mut self, entries: u64, fields: &[Field]) -> &mut Self {
        self.fields += entries * fields.len() as u64;
        self
    }

    pub fn merge(&mut self, other: &Census) -> &mut Self {
        self.fields += other.fields;
        self
    }
}

pub fn measure_logical_bytes(census: &Census) -> u64 {
    census.fields * FIELD_UNITS
}

/// Tracks the largest census seen.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PeakMeter {
    pub current: u64,
    pub peak: u64,
}

impl PeakMeter {
    pub fn record(&mut self, bytes: u64) {
        self.current = bytes;
        self.peak = self.peak.max(bytes);
    }
}
