use crate::num::ValueCmp;

/// A coalition formation game with a common joint-utility function and a
/// coalition size cap. Every member of a coalition receives the coalition's
/// joint utility, so agents rank coalitions identically.
pub trait Game {
    fn agent_ids(&self) -> &[String];

    /// Coalition size cap, between 1 and the number of agents.
    fn kappa(&self) -> usize;

    /// Joint utility of a coalition given as sorted, duplicate-free agent
    /// indices. The empty coalition has utility 0.
    fn utility(&self, members: &[usize]) -> f64;

    /// Whether every utility value is an integer, enabling exact comparisons.
    fn is_integral(&self) -> bool;

    /// Whether the utility function is known to be monotone (by construction
    /// or by a completed verification). Checkers only skip deviations to
    /// empty coalitions when this holds.
    fn is_monotone(&self) -> bool;

    fn agent_count(&self) -> usize {
        self.agent_ids().len()
    }

    /// Comparison policy for this game at tolerance `epsilon`.
    fn value_cmp(&self, epsilon: f64) -> ValueCmp {
        if self.is_integral() {
            ValueCmp::Exact
        } else {
            ValueCmp::Eps(epsilon)
        }
    }

    fn agent_index(&self, id: &str) -> crate::error::Result<usize> {
        self.agent_ids()
            .iter()
            .position(|a| a == id)
            .ok_or_else(|| crate::error::Error::InvalidReference(format!("unknown agent id {id:?}")))
    }
}
