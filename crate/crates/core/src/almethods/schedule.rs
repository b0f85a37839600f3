use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};

/// Ticks of the superposed node clocks within one outer iteration.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PoissonSchedule {
    /// `î(k, 0), …, î(k, τ(k) − 1)`.
    pub nodes: Vec<usize>,
}

impl PoissonSchedule {
    /// `τ(k)`.
    pub fn tick_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Lazily samples one [`PoissonSchedule`] per outer iteration: the tick count
/// is Poisson with mean `N τ` and each tick picks a node uniformly. This is the
/// superposition of `N` independent rate-1 clocks observed over `τ` time units.
#[derive(Clone, Debug)]
pub struct ScheduleStream {
    rng: ChaCha8Rng,
    nodes: usize,
    counts: Poisson<f64>,
}

impl ScheduleStream {
    pub fn new(nodes: usize, tau: f64, seed: u64) -> Self {
        assert!(nodes > 0, "schedule needs at least one node");
        assert!(tau > 0.0, "expected ticks per node must be positive");
        ScheduleStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            nodes,
            counts: Poisson::new(nodes as f64 * tau).expect("positive finite rate"),
        }
    }

    pub fn next_schedule(&mut self) -> PoissonSchedule {
        let count = self.counts.sample(&mut self.rng) as usize;
        let nodes = (0..count).map(|_| self.rng.random_range(0..self.nodes)).collect();
        PoissonSchedule { nodes }
    }
}

impl Iterator for ScheduleStream {
    type Item = PoissonSchedule;

    fn next(&mut self) -> Option<PoissonSchedule> {
        Some(self.next_schedule())
    }
}

/// `k_max` schedules from one seeded stream.
pub fn sample_poisson_schedule(n: usize, tau: f64, k_max: usize, seed: u64) -> Vec<PoissonSchedule> {
    ScheduleStream::new(n, tau, seed).take(k_max).collect()
}
