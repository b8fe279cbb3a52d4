/// Thirty days.
pub const SECONDS_PER_MONTH: f64 = 2_592_000.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrafficEstimate {
    pub connections: f64,
    pub per_connection_bps: f64,
    pub aggregate_bps: f64,
    pub bytes_per_month: f64,
}

impl TrafficEstimate {
    pub fn gbps(&self) -> f64 {
        self.aggregate_bps / 1e9
    }

    /// Decimal terabytes (10^12 bytes).
    pub fn terabytes_per_month(&self) -> f64 {
        self.bytes_per_month / 1e12
    }
}

/// Aggregate traffic of `connections` links each carrying `per_connection_bps`.
pub fn traffic_estimate(connections: f64, per_connection_bps: f64) -> TrafficEstimate {
    let aggregate_bps = connections * per_connection_bps;
    TrafficEstimate {
        connections,
        per_connection_bps,
        aggregate_bps,
        bytes_per_month: aggregate_bps / 8.0 * SECONDS_PER_MONTH,
    }
}
