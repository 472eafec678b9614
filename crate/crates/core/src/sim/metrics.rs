use serde::Serialize;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct EdCounters {
    pub sent: u64,
    pub received: u64,
    pub energy_j: f64,
}

/// Network-wide counters for one run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Metrics {
    pub packets_sent: u64,
    pub packets_received: u64,
    pub total_energy_j: f64,
    pub per_ed: Vec<EdCounters>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Summary {
    pub pdr: Option<f64>,
    /// Total energy divided by PDR.
    pub ec_j: Option<f64>,
}

impl Metrics {
    pub fn new(num_eds: usize) -> Self {
        Metrics {
            per_ed: vec![EdCounters::default(); num_eds],
            ..Default::default()
        }
    }

    pub(crate) fn record_sent(&mut self, ed: usize, energy_j: f64) {
        self.packets_sent += 1;
        self.total_energy_j += energy_j;
        let c = &mut self.per_ed[ed];
        c.sent += 1;
        c.energy_j += energy_j;
    }

    pub(crate) fn record_received(&mut self, ed: usize) {
        self.packets_received += 1;
        self.per_ed[ed].received += 1;
    }

    pub fn summary(&self) -> Summary {
        compute_metrics(
            self.packets_sent,
            self.packets_received,
            self.total_energy_j,
        )
    }
}

/// PDR is undefined without traffic; EC is undefined when nothing arrived.
pub fn compute_metrics(sent: u64, received: u64, total_energy_j: f64) -> Summary {
    if sent == 0 {
        return Summary {
            pdr: None,
            ec_j: None,
        };
    }
    let pdr = received as f64 / sent as f64;
    let ec_j = (pdr > 0.0).then(|| total_energy_j / pdr);
    Summary {
        pdr: Some(pdr),
        ec_j,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metric_examples() {
        assert_eq!(
            compute_metrics(100, 50, 1.0),
            Summary {
                pdr: Some(0.5),
                ec_j: Some(2.0)
            }
        );
        assert_eq!(compute_metrics(10, 10, 3.25).ec_j, Some(3.25));
        assert_eq!(
            compute_metrics(10, 0, 3.0),
            Summary {
                pdr: Some(0.0),
                ec_j: None
            }
        );
        assert_eq!(
            compute_metrics(0, 0, 0.0),
            Summary {
                pdr: None,
                ec_j: None
            }
        );
    }

    #[test]
    fn counters_accumulate() {
        let mut m = Metrics::new(2);
        m.record_sent(0, 0.5);
        m.record_sent(1, 0.25);
        m.record_received(1);
        assert_eq!(m.packets_sent, 2);
        assert_eq!(m.packets_received, 1);
        assert_eq!(m.total_energy_j, 0.75);
        assert_eq!(
            m.per_ed[1],
            EdCounters {
                sent: 1,
                received: 1,
                energy_j: 0.25
            }
        );
    }
}
