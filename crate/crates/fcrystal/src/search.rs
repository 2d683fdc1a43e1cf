//! Shared budget/seed configuration for searches and certified slope
//! computations.

/// Knobs shared by every bounded search in the crate.
///
/// `budget` is a deterministic step count, not a wall clock: certifications
/// cap twisted-power lengths by it, and witness searches cap candidate
/// expansions by it, so output for a fixed `(input, seed)` is reproducible.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchConfig {
    /// Exponent window: candidate matrix entries range over `[-window, window]`.
    pub window: i64,
    /// Largest residue-extension degree a search may move into.
    pub m_max: u32,
    /// Deterministic step budget.
    pub budget: u64,
    /// Seed for any randomized candidate order.
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(window: i64, m_max: u32, budget: u64, seed: u64) -> Self {
        assert!(window >= 0, "exponent window must be nonnegative");
        assert!(m_max >= 1, "residue degree cap must be at least 1");
        SearchConfig { window, m_max, budget, seed }
    }

    pub fn with_budget(&self, budget: u64) -> Self {
        SearchConfig { budget, ..self.clone() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        SearchConfig { seed, ..self.clone() }
    }
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig { window: 2, m_max: 2, budget: 10_000, seed: 0 }
    }
}
