//! Weibull session law and its two-quantile calibration.

use rand::Rng;
use rand_distr::{Distribution, Weibull};
use statrs::function::gamma::gamma;

use super::SimError;

/// Session duration law in hours: F(t) = 1 − exp(−(t/scale)^shape).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SessionLaw {
    pub shape: f64,
    pub scale_hours: f64,
}

impl SessionLaw {
    pub fn new(shape: f64, scale_hours: f64) -> Result<Self, SimError> {
        if !(shape > 0.0 && shape.is_finite() && scale_hours > 0.0 && scale_hours.is_finite()) {
            return Err(SimError::InvalidConfig(format!(
                "session law needs positive shape and scale, got {shape} and {scale_hours}"
            )));
        }
        Ok(SessionLaw { shape, scale_hours })
    }

    pub fn cdf(&self, hours: f64) -> f64 {
        if hours <= 0.0 {
            return 0.0;
        }
        1.0 - (-(hours / self.scale_hours).powf(self.shape)).exp()
    }

    pub fn quantile(&self, p: f64) -> f64 {
        self.scale_hours * (-(1.0 - p).ln()).powf(1.0 / self.shape)
    }

    pub fn mean_hours(&self) -> f64 {
        self.scale_hours * gamma(1.0 + 1.0 / self.shape)
    }

    pub fn sample_hours<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        Weibull::new(self.scale_hours, self.shape).expect("validated parameters").sample(rng)
    }
}

/// Solve F(h1) = f1 and F(h2) = f2 for a Weibull law.
pub fn calibrate_churn(q1: (f64, f64), q2: (f64, f64)) -> Result<SessionLaw, SimError> {
    let ((h1, f1), (h2, f2)) = (q1, q2);
    let valid = 0.0 < h1 && h1 < h2 && h2.is_finite() && 0.0 < f1 && f1 < f2 && f2 < 1.0;
    if !valid {
        return Err(SimError::DegenerateQuantiles { q1, q2 });
    }
    let (y1, y2) = ((-(1.0 - f1).ln()).ln(), (-(1.0 - f2).ln()).ln());
    let shape = (y2 - y1) / (h2.ln() - h1.ln());
    let scale_hours = h1 / (-(1.0 - f1).ln()).powf(1.0 / shape);
    SessionLaw::new(shape, scale_hours)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChurnModel {
    pub session: SessionLaw,
    /// Joins per hour.
    pub arrival_rate: f64,
    /// Session scale factor applied once a node's degree reaches the hub
    /// threshold. 1.0 disables it.
    pub hub_availability_boost: f64,
}

impl ChurnModel {
    /// Arrival rate that keeps `population` nodes alive on average
    /// (population / mean session).
    pub fn steady_state(session: SessionLaw, population: usize) -> Self {
        ChurnModel { session, arrival_rate: population as f64 / session.mean_hours(), hub_availability_boost: 1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn observed_quantiles() {
        let law = calibrate_churn((4.0, 0.40), (24.0, 0.75)).unwrap();
        assert!((law.cdf(4.0) - 0.40).abs() < 1e-9);
        assert!((law.cdf(24.0) - 0.75).abs() < 1e-9);
        // ln(−ln 0.25 / −ln 0.6) / ln 6 and 4 / (−ln 0.6)^(1/k), by hand.
        assert!((law.shape - 0.557_196).abs() < 1e-6, "{}", law.shape);
        assert!((law.scale_hours - 13.354_36).abs() < 1e-4, "{}", law.scale_hours);
    }

    #[test]
    fn doubling_quantiles_force_exponential() {
        let law = calibrate_churn((3.0, 0.5), (6.0, 0.75)).unwrap();
        assert!((law.shape - 1.0).abs() < 1e-12);
        assert!((law.mean_hours() - 3.0 / std::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn degenerate_quantiles_rejected() {
        assert!(calibrate_churn((24.0, 0.75), (4.0, 0.40)).is_err());
        assert!(calibrate_churn((4.0, 0.75), (24.0, 0.40)).is_err());
        assert!(calibrate_churn((4.0, 0.0), (24.0, 0.40)).is_err());
        assert!(calibrate_churn((4.0, 0.4), (24.0, 1.0)).is_err());
    }

    #[test]
    fn quantile_inverts_cdf() {
        let law = SessionLaw::new(0.557, 13.4).unwrap();
        for p in [0.1, 0.4, 0.75, 0.99] {
            assert!((law.cdf(law.quantile(p)) - p).abs() < 1e-12);
        }
    }

    #[test]
    fn samples_follow_law() {
        let law = calibrate_churn((4.0, 0.40), (24.0, 0.75)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 20_000;
        let draws: Vec<f64> = (0..n).map(|_| law.sample_hours(&mut rng)).collect();
        let below = draws.iter().filter(|&&h| h < 4.0).count() as f64 / n as f64;
        let above = draws.iter().filter(|&&h| h > 24.0).count() as f64 / n as f64;
        assert!((below - 0.40).abs() < 0.02, "{below}");
        assert!((above - 0.25).abs() < 0.02, "{above}");
    }
}
