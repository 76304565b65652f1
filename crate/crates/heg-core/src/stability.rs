//! Stability concepts for common-ranking coalition formation games.
//!
//! Every checker returns a [`StabilityReport`]: whether the property holds
//! and, when it does not, a witness that can be re-verified independently.
//! Witnesses are deterministic: the first violation in canonical order
//! (agents by index; coalitions by the partition's canonical order; candidate
//! coalitions by size, then lexicographically).

use std::ops::ControlFlow;

use serde::Serialize;

use crate::enumerate::{count_subsets_up_to, for_each_partition, for_each_subset_up_to};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::num::{Limits, ValueCmp};
use crate::partition::{Coalition, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "concept", rename_all = "kebab-case")]
pub enum Concept {
    Ns,
    Cis,
    Core,
    ApproxCore { alpha: f64 },
    Perfect,
    So,
    Po,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Witness {
    /// An agent strictly gains by moving to `target` (empty = splitting off).
    Deviation {
        agent: String,
        target: Vec<String>,
        utility_before: f64,
        utility_after: f64,
    },
    /// Every member strictly prefers `members` to its current coalition.
    BlockingCoalition {
        members: Vec<String>,
        value: f64,
        member_utilities: Vec<f64>,
    },
    /// An agent whose best attainable coalition beats its current one.
    BetterCoalition {
        agent: String,
        members: Vec<String>,
        value: f64,
        current: f64,
    },
    /// A partition with strictly higher social welfare.
    BetterPartition {
        coalitions: Vec<Vec<String>>,
        welfare: f64,
        current_welfare: f64,
    },
    /// A partition that Pareto-dominates the checked one.
    DominatingPartition { coalitions: Vec<Vec<String>> },
}

#[derive(Clone, Debug, Serialize)]
pub struct StabilityReport {
    #[serde(flatten)]
    pub concept: Concept,
    pub holds: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl StabilityReport {
    fn holds(concept: Concept) -> Self {
        StabilityReport {
            concept,
            holds: true,
            witness: None,
        }
    }

    fn violated(concept: Concept, witness: Witness) -> Self {
        StabilityReport {
            concept,
            holds: false,
            witness: Some(witness),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

fn validate_partition<G: Game>(g: &G, p: &Partition) -> Result<()> {
    if p.agent_count() != g.agent_count() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} agents, game has {}",
            p.agent_count(),
            g.agent_count()
        )));
    }
    if let Some(c) = p.coalitions().iter().find(|c| c.len() > g.kappa()) {
        return Err(Error::InvalidPartition(format!(
            "coalition of size {} exceeds the game's cap {}",
            c.len(),
            g.kappa()
        )));
    }
    Ok(())
}

/// A single-agent deviation: moving to an existing smaller coalition, or to
/// an empty one when the game is not known monotone.
struct Deviation {
    agent: usize,
    /// Index into the partition's coalitions, or None for splitting off.
    target: Option<usize>,
    utility_before: f64,
    utility_after: f64,
}

fn deviation_witness<G: Game>(g: &G, p: &Partition, d: &Deviation) -> Witness {
    Witness::Deviation {
        agent: g.agent_ids()[d.agent].clone(),
        target: match d.target {
            Some(t) => p.coalitions()[t].ids(g),
            None => Vec::new(),
        },
        utility_before: d.utility_before,
        utility_after: d.utility_after,
    }
}

/// First deviation, in agent-then-target order, accepted by `violates`.
/// `violates` receives the deviation and the would-be target's current value.
fn scan_deviations<G, F>(g: &G, p: &Partition, cmp: ValueCmp, mut violates: F) -> Option<Deviation>
where
    G: Game,
    F: FnMut(&Deviation, f64) -> bool,
{
    let own: Vec<f64> = p.coalitions().iter().map(|c| g.utility(c)).collect();
    for agent in 0..g.agent_count() {
        let source = p.coalition_index_of(agent);
        for (t, c) in p.coalitions().iter().enumerate() {
            if t == source || c.len() >= g.kappa() {
                continue;
            }
            let after = g.utility(&c.with(agent));
            let d = Deviation {
                agent,
                target: Some(t),
                utility_before: own[source],
                utility_after: after,
            };
            if cmp.gt(after, own[source]) && violates(&d, own[t]) {
                return Some(d);
            }
        }
        // Splitting off matters only when utilities can shrink as coalitions
        // grow; monotone games never prefer the singleton.
        if !g.is_monotone() && p.coalition_of(agent).len() >= 2 {
            let after = g.utility(&[agent]);
            let d = Deviation {
                agent,
                target: None,
                utility_before: own[source],
                utility_after: after,
            };
            if cmp.gt(after, own[source]) && violates(&d, 0.0) {
                return Some(d);
            }
        }
    }
    None
}

/// Nash stability: no agent strictly gains by joining a coalition that still
/// has room (or, for games not known monotone, by splitting off).
pub fn is_nash_stable<G: Game>(g: &G, p: &Partition, limits: &Limits) -> Result<StabilityReport> {
    limits.validate()?;
    validate_partition(g, p)?;
    let cmp = g.value_cmp(limits.epsilon);
    Ok(match scan_deviations(g, p, cmp, |_, _| true) {
        Some(d) => StabilityReport::violated(Concept::Ns, deviation_witness(g, p, &d)),
        None => StabilityReport::holds(Concept::Ns),
    })
}

/// Contractual individual stability: a deviation only counts if it hurts
/// neither the destination's current members nor the agents left behind.
pub fn is_cis<G: Game>(g: &G, p: &Partition, limits: &Limits) -> Result<StabilityReport> {
    limits.validate()?;
    validate_partition(g, p)?;
    let cmp = g.value_cmp(limits.epsilon);
    let found = scan_deviations(g, p, cmp, |d, target_before| {
        let destination_hurt = cmp.gt(target_before, d.utility_after);
        let source = p.coalition_of(d.agent);
        let source_hurt = cmp.gt(d.utility_before, g.utility(&source.without(d.agent)));
        !destination_hurt && !source_hurt
    });
    Ok(match found {
        Some(d) => StabilityReport::violated(Concept::Cis, deviation_witness(g, p, &d)),
        None => StabilityReport::holds(Concept::Cis),
    })
}

/// Shared blocking predicate: under factor `alpha`, coalition `members`
/// blocks when `alpha * U(members)` strictly exceeds every member's current
/// utility.
fn coalition_blocks(
    value: f64,
    members: &[usize],
    current: &[f64],
    alpha: f64,
    cmp: ValueCmp,
) -> bool {
    members.iter().all(|&i| cmp.gt(alpha * value, current[i]))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "alpha must lie in (0, 1], got {alpha}"
        )));
    }
    Ok(())
}

/// Comparison policy for blocking at factor `alpha`: a fractional factor
/// forces the epsilon path even on integer-valued games.
fn alpha_cmp<G: Game>(g: &G, alpha: f64, epsilon: f64) -> ValueCmp {
    if alpha == 1.0 {
        g.value_cmp(epsilon)
    } else {
        ValueCmp::Eps(epsilon)
    }
}

/// Does `c` block `p` outright (alpha = 1)?
pub fn blocks<G: Game>(g: &G, c: &Coalition, p: &Partition, limits: &Limits) -> Result<bool> {
    alpha_blocks(g, c, p, 1.0, limits)
}

/// Does `c` block `p` under approximation factor `alpha`?
pub fn alpha_blocks<G: Game>(
    g: &G,
    c: &Coalition,
    p: &Partition,
    alpha: f64,
    limits: &Limits,
) -> Result<bool> {
    limits.validate()?;
    check_alpha(alpha)?;
    validate_partition(g, p)?;
    if c.len() > g.kappa() {
        return Err(Error::InvalidArgument(format!(
            "blocking candidate of size {} exceeds the cap {}",
            c.len(),
            g.kappa()
        )));
    }
    if let Some(&m) = c.members().iter().find(|&&m| m >= g.agent_count()) {
        return Err(Error::InvalidReference(format!(
            "agent index {m} out of range"
        )));
    }
    let current = p.agent_utilities(g);
    let cmp = alpha_cmp(g, alpha, limits.epsilon);
    Ok(coalition_blocks(g.utility(c), c, &current, alpha, cmp))
}

/// First blocking coalition in canonical order, if any. Parallelized over
/// the smallest member when `limits.threads > 1`, with a deterministic
/// reduction to the canonically first witness.
fn find_blocking<G: Game + Sync>(
    g: &G,
    p: &Partition,
    alpha: f64,
    limits: &Limits,
) -> Result<Option<(Vec<usize>, f64)>> {
    let n = g.agent_count();
    let cap = g.kappa().min(n);
    let candidates = count_subsets_up_to(n, cap);
    if candidates > limits.subset_budget as u128 {
        return Err(Error::Capability(format!(
            "blocking scan needs {candidates} candidate coalitions, budget is {}",
            limits.subset_budget
        )));
    }
    let current = p.agent_utilities(g);
    let cmp = alpha_cmp(g, alpha, limits.epsilon);
    if limits.threads <= 1 {
        let mut found = None;
        let pool: Vec<usize> = (0..n).collect();
        let _ = for_each_subset_up_to(&pool, cap, |s| {
            let value = g.utility(s);
            if coalition_blocks(value, s, &current, alpha, cmp) {
                found = Some((s.to_vec(), value));
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        return Ok(found);
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(limits.threads)
        .build()
        .map_err(|e| Error::Capability(format!("cannot build thread pool: {e}")))?;
    let first = pool.install(|| {
        use rayon::prelude::*;
        (0..n)
            .into_par_iter()
            .filter_map(|lead| {
                // Stratum: candidates whose smallest member is `lead`,
                // scanned in the same size-then-lex order as the global scan.
                let mut hit: Option<(Vec<usize>, f64)> = None;
                let singleton = [lead];
                let v = g.utility(&singleton);
                if coalition_blocks(v, &singleton, &current, alpha, cmp) {
                    return Some((vec![lead], v));
                }
                let rest: Vec<usize> = (lead + 1..n).collect();
                let _ = for_each_subset_up_to(&rest, cap.saturating_sub(1), |tail| {
                    let mut s = Vec::with_capacity(tail.len() + 1);
                    s.push(lead);
                    s.extend_from_slice(tail);
                    let value = g.utility(&s);
                    if coalition_blocks(value, &s, &current, alpha, cmp) {
                        hit = Some((s, value));
                        ControlFlow::Break(())
                    } else {
                        ControlFlow::Continue(())
                    }
                });
                hit
            })
            .min_by(|a, b| (a.0.len(), &a.0).cmp(&(b.0.len(), &b.0)))
    });
    Ok(first)
}

/// Core stability: no coalition of size <= kappa strictly improves all of
/// its members.
pub fn is_core_stable<G: Game + Sync>(
    g: &G,
    p: &Partition,
    limits: &Limits,
) -> Result<StabilityReport> {
    limits.validate()?;
    validate_partition(g, p)?;
    report_blocking(g, p, 1.0, Concept::Core, limits)
}

/// Approximate core stability at factor `alpha` in (0, 1].
pub fn is_alpha_core_stable<G: Game + Sync>(
    g: &G,
    p: &Partition,
    alpha: f64,
    limits: &Limits,
) -> Result<StabilityReport> {
    limits.validate()?;
    check_alpha(alpha)?;
    validate_partition(g, p)?;
    report_blocking(g, p, alpha, Concept::ApproxCore { alpha }, limits)
}

fn report_blocking<G: Game + Sync>(
    g: &G,
    p: &Partition,
    alpha: f64,
    concept: Concept,
    limits: &Limits,
) -> Result<StabilityReport> {
    Ok(match find_blocking(g, p, alpha, limits)? {
        Some((members, value)) => {
            let current = p.agent_utilities(g);
            let member_utilities = members.iter().map(|&i| current[i]).collect();
            StabilityReport::violated(
                concept,
                Witness::BlockingCoalition {
                    members: members.iter().map(|&i| g.agent_ids()[i].clone()).collect(),
                    value,
                    member_utilities,
                },
            )
        }
        None => StabilityReport::holds(concept),
    })
}

/// Best attainable utility per agent: max over coalitions containing the
/// agent with size <= kappa, together with the first maximizing coalition in
/// canonical order.
pub fn best_coalition_values<G: Game>(g: &G, limits: &Limits) -> Result<Vec<(f64, Vec<usize>)>> {
    let n = g.agent_count();
    let cap = g.kappa().min(n);
    let candidates = count_subsets_up_to(n, cap);
    if candidates > limits.subset_budget as u128 {
        return Err(Error::Capability(format!(
            "per-agent maximum needs {candidates} candidate coalitions, budget is {}",
            limits.subset_budget
        )));
    }
    let mut best: Vec<(f64, Vec<usize>)> = (0..n).map(|i| (g.utility(&[i]), vec![i])).collect();
    let pool: Vec<usize> = (0..n).collect();
    let _ = for_each_subset_up_to(&pool, cap, |s| {
        let value = g.utility(s);
        for &i in s {
            if value > best[i].0 {
                best[i] = (value, s.to_vec());
            }
        }
        ControlFlow::Continue(())
    });
    Ok(best)
}

/// Perfection: every agent already sits in one of its best coalitions.
pub fn is_perfect<G: Game>(g: &G, p: &Partition, limits: &Limits) -> Result<StabilityReport> {
    limits.validate()?;
    validate_partition(g, p)?;
    let cmp = g.value_cmp(limits.epsilon);
    let best = best_coalition_values(g, limits)?;
    let current = p.agent_utilities(g);
    for agent in 0..g.agent_count() {
        if cmp.gt(best[agent].0, current[agent]) {
            return Ok(StabilityReport::violated(
                Concept::Perfect,
                Witness::BetterCoalition {
                    agent: g.agent_ids()[agent].clone(),
                    members: best[agent]
                        .1
                        .iter()
                        .map(|&i| g.agent_ids()[i].clone())
                        .collect(),
                    value: best[agent].0,
                    current: current[agent],
                },
            ));
        }
    }
    Ok(StabilityReport::holds(Concept::Perfect))
}

/// Sum over coalitions of size times value; equals the sum of agent utilities.
pub fn social_welfare<G: Game>(g: &G, p: &Partition) -> f64 {
    p.coalitions()
        .iter()
        .map(|c| c.len() as f64 * g.utility(c))
        .sum()
}

/// Social optimality by exhaustive partition enumeration.
pub fn is_socially_optimal<G: Game>(
    g: &G,
    p: &Partition,
    limits: &Limits,
) -> Result<StabilityReport> {
    limits.validate()?;
    validate_partition(g, p)?;
    let n = g.agent_count();
    if n > limits.partition_limit {
        return Err(Error::Capability(format!(
            "exhaustive partition search limited to {} agents, got {n}",
            limits.partition_limit
        )));
    }
    let cmp = g.value_cmp(limits.epsilon);
    let welfare = social_welfare(g, p);
    let mut witness = None;
    let _ = for_each_partition(n, g.kappa(), |blocks| {
        let w: f64 = blocks
            .iter()
            .map(|b| b.len() as f64 * g.utility(b))
            .sum();
        if cmp.gt(w, welfare) {
            witness = Some((blocks.to_vec(), w));
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(match witness {
        Some((blocks, w)) => StabilityReport::violated(
            Concept::So,
            Witness::BetterPartition {
                coalitions: blocks
                    .iter()
                    .map(|b| b.iter().map(|&i| g.agent_ids()[i].clone()).collect())
                    .collect(),
                welfare: w,
                current_welfare: welfare,
            },
        ),
        None => StabilityReport::holds(Concept::So),
    })
}

/// Does `a` Pareto-dominate `b`: every agent at least as well off, at least
/// one strictly better?
pub fn pareto_dominates<G: Game>(
    g: &G,
    a: &Partition,
    b: &Partition,
    limits: &Limits,
) -> Result<bool> {
    limits.validate()?;
    validate_partition(g, a)?;
    validate_partition(g, b)?;
    let cmp = g.value_cmp(limits.epsilon);
    let ua = a.agent_utilities(g);
    let ub = b.agent_utilities(g);
    let all_ge = ua.iter().zip(&ub).all(|(x, y)| cmp.ge(*x, *y));
    let any_gt = ua.iter().zip(&ub).any(|(x, y)| cmp.gt(*x, *y));
    Ok(all_ge && any_gt)
}

/// Pareto optimality by exhaustive partition enumeration.
pub fn is_pareto_optimal<G: Game>(
    g: &G,
    p: &Partition,
    limits: &Limits,
) -> Result<StabilityReport> {
    limits.validate()?;
    validate_partition(g, p)?;
    let n = g.agent_count();
    if n > limits.partition_limit {
        return Err(Error::Capability(format!(
            "exhaustive partition search limited to {} agents, got {n}",
            limits.partition_limit
        )));
    }
    let cmp = g.value_cmp(limits.epsilon);
    let current = p.agent_utilities(g);
    let mut witness = None;
    let _ = for_each_partition(n, g.kappa(), |blocks| {
        let mut utilities = vec![0.0; n];
        for b in blocks {
            let u = g.utility(b);
            for &i in b {
                utilities[i] = u;
            }
        }
        let all_ge = utilities.iter().zip(&current).all(|(x, y)| cmp.ge(*x, *y));
        let any_gt = utilities.iter().zip(&current).any(|(x, y)| cmp.gt(*x, *y));
        if all_ge && any_gt {
            witness = Some(blocks.to_vec());
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    Ok(match witness {
        Some(blocks) => StabilityReport::violated(
            Concept::Po,
            Witness::DominatingPartition {
                coalitions: blocks
                    .iter()
                    .map(|b| b.iter().map(|&i| g.agent_ids()[i].clone()).collect())
                    .collect(),
            },
        ),
        None => StabilityReport::holds(Concept::Po),
    })
}
