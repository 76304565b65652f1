//! Constructive procedures: imitative better-response dynamics, the
//! swap-based contractual-stability construction, and greedy coalition
//! extraction with its brute-force counterpart.

use std::ops::ControlFlow;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::enumerate::{count_subsets_up_to, for_each_subset_up_to};
use crate::error::{Error, Result};
use crate::game::Game;
use crate::instance::Instance;
use crate::num::Limits;
use crate::partition::{Coalition, Partition};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepKind {
    BetterResponse,
    Imitation,
    CisSwap,
}

/// One move of a dynamic. `from` and `to` snapshot the coalitions as they
/// were before the move, as agent ids.
#[derive(Clone, Debug, Serialize)]
pub struct MoveStep {
    pub kind: StepKind,
    pub agent: String,
    /// The exchanged agent on swap steps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub partner: Option<String>,
    pub from: Vec<String>,
    pub to: Vec<String>,
    pub utility_before: f64,
    pub utility_after: f64,
    /// Agent utilities after the move, sorted non-increasing.
    pub psi_after: Vec<f64>,
    /// Number of critical members of the swapped coalition, before and
    /// after, on swap steps.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_before: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma_after: Option<usize>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct MoveTrace {
    pub steps: Vec<MoveStep>,
    /// Seed that produced the initial partition, when the caller used one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// A-priori bound on the number of moves, when one is guaranteed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub move_bound: Option<u64>,
}

impl MoveTrace {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("trace serialization cannot fail")
    }
}

/// Agents in seeded order (seed 0 keeps index order), chunked into blocks of
/// size kappa plus one smaller leftover block.
pub fn initial_block_partition(g: &Instance, seed: u64) -> Partition {
    let n = g.agent_count();
    let mut order: Vec<usize> = (0..n).collect();
    if seed != 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);
    }
    let blocks: Vec<Vec<usize>> = order.chunks(g.kappa()).map(|c| c.to_vec()).collect();
    Partition::from_blocks_unchecked(&blocks, n, g.kappa())
}

fn block_sizes(n: usize, kappa: usize) -> Vec<usize> {
    let mut sizes = vec![kappa; n / kappa];
    if !n.is_multiple_of(kappa) {
        sizes.push(n % kappa);
    }
    sizes
}

fn require_block_partition(g: &Instance, p: &Partition) -> Result<()> {
    let mut got: Vec<usize> = p.coalitions().iter().map(|c| c.len()).collect();
    got.sort_unstable();
    let mut want = block_sizes(g.agent_count(), g.kappa());
    want.sort_unstable();
    if got != want {
        return Err(Error::InvalidArgument(format!(
            "expected a block partition with sizes {want:?}, got {got:?}"
        )));
    }
    Ok(())
}

/// Mutable partition state for the dynamics. Slots keep their index even
/// when drained empty, so a move burst can keep pointing at its source.
struct Slots {
    blocks: Vec<Vec<usize>>,
    member_slot: Vec<usize>,
}

impl Slots {
    fn from_partition(p: &Partition, n: usize) -> Self {
        let blocks: Vec<Vec<usize>> = p.coalitions().iter().map(|c| c.members().to_vec()).collect();
        let mut member_slot = vec![0usize; n];
        for (idx, b) in blocks.iter().enumerate() {
            for &m in b {
                member_slot[m] = idx;
            }
        }
        Slots {
            blocks,
            member_slot,
        }
    }

    fn move_agent(&mut self, agent: usize, to: usize) {
        let from = self.member_slot[agent];
        self.blocks[from].retain(|&m| m != agent);
        let pos = self.blocks[to].binary_search(&agent).unwrap_err();
        self.blocks[to].insert(pos, agent);
        self.member_slot[agent] = to;
    }

    fn swap(&mut self, out_agent: usize, in_agent: usize) {
        let slot = self.member_slot[out_agent];
        let other = self.member_slot[in_agent];
        self.blocks[slot].retain(|&m| m != out_agent);
        let pos = self.blocks[slot].binary_search(&in_agent).unwrap_err();
        self.blocks[slot].insert(pos, in_agent);
        self.blocks[other].retain(|&m| m != in_agent);
        let pos = self.blocks[other].binary_search(&out_agent).unwrap_err();
        self.blocks[other].insert(pos, out_agent);
        self.member_slot[out_agent] = other;
        self.member_slot[in_agent] = slot;
    }

    /// Non-empty slot indices in canonical coalition order.
    fn canonical_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.blocks.len())
            .filter(|&i| !self.blocks[i].is_empty())
            .collect();
        idx.sort_by(|&a, &b| self.blocks[a].cmp(&self.blocks[b]));
        idx
    }

    fn psi(&self, g: &Instance) -> Vec<f64> {
        let mut out = vec![0.0; self.member_slot.len()];
        for b in &self.blocks {
            if b.is_empty() {
                continue;
            }
            let u = g.joint_utility(b);
            for &m in b {
                out[m] = u;
            }
        }
        out.sort_unstable_by(|a, b| b.partial_cmp(a).expect("utilities are finite"));
        out
    }

    fn into_partition(self, n: usize, kappa: usize) -> Partition {
        Partition::from_blocks_unchecked(&self.blocks, n, kappa)
    }

    fn ids(&self, g: &Instance, slot: usize) -> Vec<String> {
        self.blocks[slot]
            .iter()
            .map(|&m| g.agent_ids()[m].clone())
            .collect()
    }
}

fn with_member(members: &[usize], agent: usize) -> Vec<usize> {
    let mut v = Vec::with_capacity(members.len() + 1);
    let pos = members.binary_search(&agent).unwrap_err();
    v.extend_from_slice(&members[..pos]);
    v.push(agent);
    v.extend_from_slice(&members[pos..]);
    v
}

fn without_member(members: &[usize], agent: usize) -> Vec<usize> {
    members.iter().copied().filter(|&m| m != agent).collect()
}

/// Better-response dynamics with imitation: while the last mover's target
/// still has room, the smallest-index agent of the mover's former coalition
/// follows along; otherwise the first agent (by index, then by canonical
/// target order) with a strictly improving move takes it. Terminates at a
/// partition no agent wants to leave.
///
/// The initial partition must be a block partition (sizes kappa, ...,
/// kappa, remainder); the dynamics keep that shape after every burst.
pub fn imitative_brd(
    g: &Instance,
    p0: &Partition,
    limits: &Limits,
) -> Result<(Partition, MoveTrace)> {
    limits.validate()?;
    require_block_partition(g, p0)?;
    let n = g.agent_count();
    let kappa = g.kappa();
    let cmp = g.value_cmp(limits.epsilon);
    let move_bound = g.level_bound().map(|beta| {
        (beta as u128)
            .saturating_mul(g.skill_ids().len() as u128)
            .saturating_mul((n / kappa) as u128)
            .saturating_mul(kappa as u128)
            .min(u64::MAX as u128) as u64
    });
    let mut slots = Slots::from_partition(p0, n);
    let mut trace = MoveTrace {
        steps: Vec::new(),
        seed: None,
        move_bound,
    };
    // (source slot, target slot) of the last move while its burst lasts
    let mut burst: Option<(usize, usize)> = None;

    loop {
        if trace.steps.len() as u64 >= limits.step_cap {
            return Err(Error::Capability(format!(
                "dynamics exceeded the step cap of {}",
                limits.step_cap
            )));
        }
        let mut moved = false;
        if let Some((src, tgt)) = burst {
            if slots.blocks[tgt].len() < kappa && !slots.blocks[src].is_empty() {
                let follower = slots.blocks[src][0];
                let before = g.joint_utility(&slots.blocks[src]);
                let joined = with_member(&slots.blocks[tgt], follower);
                let after = g.joint_utility(&joined);
                // Always improving: the target beat the follower's old
                // coalition already, and adding the follower cannot shrink it.
                if cmp.gt(after, before) {
                    let from = slots.ids(g, src);
                    let to = slots.ids(g, tgt);
                    slots.move_agent(follower, tgt);
                    trace.steps.push(MoveStep {
                        kind: StepKind::Imitation,
                        agent: g.agent_ids()[follower].clone(),
                        partner: None,
                        from,
                        to,
                        utility_before: before,
                        utility_after: after,
                        psi_after: slots.psi(g),
                        gamma_before: None,
                        gamma_after: None,
                    });
                    moved = true;
                } else {
                    burst = None;
                }
            } else {
                burst = None;
            }
        }
        if !moved {
            let order = slots.canonical_order();
            'scan: for agent in 0..n {
                let own = slots.member_slot[agent];
                let before = g.joint_utility(&slots.blocks[own]);
                for &tgt in &order {
                    if tgt == own || slots.blocks[tgt].len() >= kappa {
                        continue;
                    }
                    let joined = with_member(&slots.blocks[tgt], agent);
                    let after = g.joint_utility(&joined);
                    if cmp.gt(after, before) {
                        let from = slots.ids(g, own);
                        let to = slots.ids(g, tgt);
                        slots.move_agent(agent, tgt);
                        trace.steps.push(MoveStep {
                            kind: StepKind::BetterResponse,
                            agent: g.agent_ids()[agent].clone(),
                            partner: None,
                            from,
                            to,
                            utility_before: before,
                            utility_after: after,
                            psi_after: slots.psi(g),
                            gamma_before: None,
                            gamma_after: None,
                        });
                        burst = Some((own, tgt));
                        moved = true;
                        break 'scan;
                    }
                }
            }
        }
        if !moved {
            break;
        }
    }
    Ok((slots.into_partition(n, kappa), trace))
}

/// Is the agent's expertise strictly above the coalition's joint level on
/// some skill? For members this says removing them loses value; for
/// outsiders it says joining would add value.
pub fn is_critical(g: &Instance, agent: usize, members: &[usize]) -> bool {
    let rest = without_member(members, agent);
    (0..g.skill_ids().len())
        .any(|s| g.expertise_of(agent, s) > g.joint_expertise(&rest, s))
}

/// Number of members critical for their own coalition.
pub fn gamma(g: &Instance, members: &[usize]) -> usize {
    members
        .iter()
        .filter(|&&m| is_critical(g, m, members))
        .count()
}

/// Builds a partition no agent can leave harmlessly for a better coalition,
/// by repeated swaps between the full blocks and the leftover block: a
/// non-critical member who would gain by joining the leftover trades places
/// with a leftover agent whose expertise tops the block somewhere. Swap
/// choice is canonical-first (block order, then agent index on both sides).
pub fn cis_algorithm(
    g: &Instance,
    seed: u64,
    limits: &Limits,
) -> Result<(Partition, MoveTrace)> {
    limits.validate()?;
    let n = g.agent_count();
    let kappa = g.kappa();
    let cmp = g.value_cmp(limits.epsilon);
    let p0 = initial_block_partition(g, seed);
    let mut trace = MoveTrace {
        steps: Vec::new(),
        seed: Some(seed),
        move_bound: None,
    };
    if n.is_multiple_of(kappa) {
        // All blocks are full; nobody has anywhere to go.
        return Ok((p0, trace));
    }
    let mut slots = Slots::from_partition(&p0, n);
    // The unique non-full slot keeps its identity across swaps.
    let leftover = (0..slots.blocks.len())
        .find(|&i| slots.blocks[i].len() < kappa)
        .expect("remainder block exists when kappa does not divide n");

    loop {
        if trace.steps.len() as u64 >= limits.step_cap {
            return Err(Error::Capability(format!(
                "swap sequence exceeded the step cap of {}",
                limits.step_cap
            )));
        }
        let mut found = None;
        'outer: for idx in slots.canonical_order() {
            if idx == leftover {
                continue;
            }
            let block = &slots.blocks[idx];
            let block_value = g.joint_utility(block);
            for &j in block {
                let harmless = !cmp.gt(block_value, g.joint_utility(&without_member(block, j)));
                if !harmless {
                    continue;
                }
                let gain = cmp.gt(
                    g.joint_utility(&with_member(&slots.blocks[leftover], j)),
                    block_value,
                );
                if gain {
                    found = Some((idx, j, block_value));
                    break 'outer;
                }
            }
        }
        let Some((idx, j, block_value)) = found else {
            break;
        };
        // The gain condition forces the leftover's joint level above the
        // block's on some skill, so a partner always exists.
        let partner = slots.blocks[leftover]
            .iter()
            .copied()
            .find(|&c| is_critical(g, c, &slots.blocks[idx]))
            .expect("a beneficial move implies a critical leftover agent");
        let gamma_before = gamma(g, &slots.blocks[idx]);
        let from = slots.ids(g, idx);
        let to = slots.ids(g, leftover);
        slots.swap(j, partner);
        let gamma_after = gamma(g, &slots.blocks[idx]);
        trace.steps.push(MoveStep {
            kind: StepKind::CisSwap,
            agent: g.agent_ids()[j].clone(),
            partner: Some(g.agent_ids()[partner].clone()),
            from,
            to,
            utility_before: block_value,
            utility_after: g.joint_utility(&slots.blocks[leftover]),
            psi_after: slots.psi(g),
            gamma_before: Some(gamma_before),
            gamma_after: Some(gamma_after),
        });
    }
    Ok((slots.into_partition(n, kappa), trace))
}

fn checked_pool(g: &Instance, pool: &[usize]) -> Result<Vec<usize>> {
    if pool.is_empty() {
        return Err(Error::InvalidArgument("pool must not be empty".into()));
    }
    let mut sorted = pool.to_vec();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument("pool contains duplicates".into()));
    }
    if let Some(&m) = sorted.last() {
        if m >= g.agent_count() {
            return Err(Error::InvalidReference(format!(
                "agent index {m} out of range"
            )));
        }
    }
    Ok(sorted)
}

/// Standard greedy: repeatedly add the pool agent with the largest marginal
/// gain (ties break to the smallest index) until the size cap or the pool is
/// exhausted. The result is within a factor 1 - 1/e of the best coalition
/// over the pool.
pub fn greedy_max_joint_utility(g: &Instance, pool: &[usize]) -> Result<Coalition> {
    let pool = checked_pool(g, pool)?;
    let target = g.kappa().min(pool.len());
    let skills = g.skill_ids().len();
    let mut level = vec![0.0f64; skills];
    let mut chosen: Vec<usize> = Vec::with_capacity(target);
    while chosen.len() < target {
        let mut best: Option<(usize, f64)> = None;
        for &cand in &pool {
            if chosen.contains(&cand) {
                continue;
            }
            let gain: f64 = (0..skills)
                .map(|s| (g.expertise_of(cand, s) - level[s]).max(0.0))
                .sum();
            if best.is_none_or(|(_, b)| gain > b) {
                best = Some((cand, gain));
            }
        }
        let (pick, _) = best.expect("pool larger than chosen set");
        for (s, l) in level.iter_mut().enumerate() {
            *l = l.max(g.expertise_of(pick, s));
        }
        chosen.push(pick);
    }
    Coalition::new(chosen)
}

/// Exact optimum over all non-empty subsets of the pool up to the size cap,
/// by enumeration in canonical order (first maximizer wins).
pub fn brute_force_max_joint_utility(
    g: &Instance,
    pool: &[usize],
    limits: &Limits,
) -> Result<Coalition> {
    limits.validate()?;
    let pool = checked_pool(g, pool)?;
    let cap = g.kappa().min(pool.len());
    let candidates = count_subsets_up_to(pool.len(), cap);
    if candidates > limits.subset_budget as u128 {
        return Err(Error::Capability(format!(
            "optimum scan needs {candidates} candidate coalitions, budget is {}",
            limits.subset_budget
        )));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let _ = for_each_subset_up_to(&pool, cap, |s| {
        let value = g.joint_utility(s);
        if best.as_ref().is_none_or(|(b, _)| value > *b) {
            best = Some((value, s.to_vec()));
        }
        ControlFlow::<()>::Continue(())
    });
    let (_, members) = best.expect("pool is non-empty");
    Coalition::new(members)
}

/// Repeatedly extract the greedy coalition from the remaining agents. The
/// result withstands every blocking coalition up to factor 1 - 1/e.
pub fn greedy_core_partition(g: &Instance) -> Partition {
    let n = g.agent_count();
    let mut remaining: Vec<usize> = (0..n).collect();
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    while !remaining.is_empty() {
        let c = greedy_max_joint_utility(g, &remaining)
            .expect("remaining pool is non-empty");
        remaining.retain(|&m| !c.contains(m));
        blocks.push(c.members().to_vec());
    }
    Partition::from_blocks_unchecked(&blocks, n, g.kappa())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::num::{ValueCmp, DEFAULT_EPSILON, ONE_MINUS_INV_E};
    use crate::stability::{is_alpha_core_stable, is_cis, is_nash_stable};

    fn single_skill(levels: &[f64], kappa: usize) -> Instance {
        let agents = (1..=levels.len()).map(|i| format!("a{i}")).collect();
        let rows = levels.iter().map(|&l| vec![l]).collect();
        Instance::new(agents, vec!["s1".into()], rows, kappa).unwrap()
    }

    #[test]
    fn chunking_with_leftover() {
        let g = single_skill(&[1.0, 2.0, 3.0, 4.0, 5.0], 2);
        let p = initial_block_partition(&g, 0);
        let lists = p.to_id_lists(&g);
        assert_eq!(
            lists,
            vec![
                vec!["a1".to_string(), "a2".into()],
                vec!["a3".into(), "a4".into()],
                vec!["a5".into()],
            ]
        );
    }

    #[test]
    fn chunking_without_leftover() {
        let g = single_skill(&[1.0, 2.0, 3.0, 4.0], 2);
        let p = initial_block_partition(&g, 0);
        assert_eq!(p.coalitions().len(), 2);
        assert!(p.coalitions().iter().all(|c| c.len() == 2));
    }

    #[test]
    fn seeded_shuffles_keep_the_size_multiset() {
        let g = single_skill(&[1.0; 7], 3);
        for seed in [0u64, 1, 2, 99] {
            let p = initial_block_partition(&g, seed);
            let mut sizes: Vec<usize> = p.coalitions().iter().map(|c| c.len()).collect();
            sizes.sort_unstable();
            assert_eq!(sizes, vec![1, 3, 3]);
            let again = initial_block_partition(&g, seed);
            assert_eq!(p.to_id_lists(&g), again.to_id_lists(&g));
        }
    }

    #[test]
    fn stable_start_returns_unchanged() {
        let g = single_skill(&[1.0, 2.0, 3.0, 4.0], 2);
        let p0 = initial_block_partition(&g, 0);
        let limits = Limits::default();
        let (p, trace) = imitative_brd(&g, &p0, &limits).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(p.to_id_lists(&g), p0.to_id_lists(&g));
        assert!(is_nash_stable(&g, &p, &limits).unwrap().holds);
    }

    #[test]
    fn non_block_start_is_rejected() {
        let g = single_skill(&[1.0, 2.0], 2);
        let p0 = Partition::singletons(2, 2);
        assert!(matches!(
            imitative_brd(&g, &p0, &Limits::default()),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn a_move_burst_follows_the_leader() {
        let g = single_skill(&[1.0, 1.0, 1.0, 5.0, 5.0, 5.0, 9.0], 3);
        let p0 = initial_block_partition(&g, 0);
        let limits = Limits::default();
        let (p, trace) = imitative_brd(&g, &p0, &limits).unwrap();
        let kinds: Vec<StepKind> = trace.steps.iter().map(|s| s.kind).collect();
        assert_eq!(kinds, vec![StepKind::BetterResponse, StepKind::Imitation]);
        assert!(is_nash_stable(&g, &p, &limits).unwrap().holds);
        if let Some(bound) = trace.move_bound {
            assert!((trace.steps.len() as u64) <= bound);
        }
    }

    #[test]
    fn potential_rises_at_every_step() {
        let g = single_skill(&[1.0, 2.0, 3.0, 4.0, 5.0], 2);
        let p0 = initial_block_partition(&g, 0);
        let limits = Limits::default();
        let (_, trace) = imitative_brd(&g, &p0, &limits).unwrap();
        assert!(!trace.steps.is_empty());
        let cmp = ValueCmp::Exact;
        let start = {
            let slots = Slots::from_partition(&p0, 5);
            slots.psi(&g)
        };
        let mut prev = start;
        for step in &trace.steps {
            assert!(step.utility_after > step.utility_before);
            let ord = crate::hgcrp::lex_compare(&step.psi_after, &prev, cmp).unwrap();
            assert_eq!(ord, std::cmp::Ordering::Greater);
            prev = step.psi_after.clone();
        }
    }

    #[test]
    fn move_bound_reflects_the_level_bound() {
        let g = single_skill(&[1.0, 3.0, 2.0, 3.0, 1.0], 2);
        assert_eq!(g.level_bound(), Some(3));
        let p0 = initial_block_partition(&g, 0);
        let (_, trace) = imitative_brd(&g, &p0, &Limits::default()).unwrap();
        let (beta, skills, n, kappa) = (3u64, 1u64, 5u64, 2u64);
        assert_eq!(trace.move_bound, Some(beta * skills * (n / kappa) * kappa));
    }

    #[test]
    fn criticality_matches_the_utility_difference() {
        let g = Instance::new(
            vec!["alice".into(), "bob".into()],
            vec!["py".into(), "java".into(), "sql".into()],
            vec![vec![1.0, 3.0, 3.0], vec![3.0, 3.0, 1.0]],
            2,
        )
        .unwrap();
        let both = [0usize, 1];
        for agent in 0..2 {
            let by_skill = is_critical(&g, agent, &both);
            let by_value =
                g.joint_utility(&both) > g.joint_utility(&without_member(&both, agent));
            assert_eq!(by_skill, by_value);
            assert!(by_skill);
        }
        assert!(is_critical(&g, 0, &[0]));
    }

    #[test]
    fn clones_are_never_critical_together() {
        let g = Instance::new(
            vec!["a".into(), "b".into()],
            vec!["s".into()],
            vec![vec![2.0], vec![2.0]],
            2,
        )
        .unwrap();
        assert!(!is_critical(&g, 0, &[0, 1]));
        assert!(!is_critical(&g, 1, &[0, 1]));
        assert_eq!(gamma(&g, &[0, 1]), 0);
    }

    #[test]
    fn outsider_criticality_uses_the_whole_coalition() {
        let g = single_skill(&[5.0, 3.0, 7.0], 2);
        // agent 2 tops the block {0, 1}, agent 1 does not
        assert!(is_critical(&g, 2, &[0, 1]));
        assert!(!is_critical(&g, 1, &[0, 2]));
    }

    #[test]
    fn divisible_population_returns_the_blocks() {
        let g = single_skill(&[1.0, 2.0, 3.0, 4.0], 2);
        let limits = Limits::default();
        let (p, trace) = cis_algorithm(&g, 0, &limits).unwrap();
        assert!(trace.steps.is_empty());
        assert_eq!(p.to_id_lists(&g), initial_block_partition(&g, 0).to_id_lists(&g));
        assert!(is_cis(&g, &p, &limits).unwrap().holds);
    }

    #[test]
    fn swaps_settle_into_contractual_stability() {
        let g = single_skill(&[5.0, 3.0, 7.0], 2);
        let limits = Limits::default();
        let (p, trace) = cis_algorithm(&g, 0, &limits).unwrap();
        assert!(is_cis(&g, &p, &limits).unwrap().holds);
        assert_eq!(trace.steps.len(), 1);
        let step = &trace.steps[0];
        assert_eq!(step.kind, StepKind::CisSwap);
        assert_eq!(step.agent, "a2");
        assert_eq!(step.partner.as_deref(), Some("a3"));
        let (n, kappa) = (3usize, 2usize);
        assert!(trace.steps.len() <= (n / kappa) * n);
    }

    #[test]
    fn a_swap_can_keep_the_critical_count_flat() {
        // The entrant dominates the remaining member on the only skill, so
        // one critical agent replaces another instead of adding one.
        let g = single_skill(&[5.0, 3.0, 7.0], 2);
        let (_, trace) = cis_algorithm(&g, 0, &Limits::default()).unwrap();
        let step = &trace.steps[0];
        assert_eq!(step.gamma_before, Some(1));
        assert_eq!(step.gamma_after, Some(1));
    }

    #[test]
    fn real_valued_runs_stay_within_the_swap_bound() {
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in [5usize, 7, 8] {
            let levels: Vec<f64> = (0..n).map(|_| 1.0 - rng.gen::<f64>()).collect();
            let g = single_skill(&levels, 3);
            let limits = Limits::default();
            let (p, trace) = cis_algorithm(&g, 1, &limits).unwrap();
            assert!(is_cis(&g, &p, &limits).unwrap().holds);
            assert!(trace.steps.len() <= (n / 3) * n);
        }
    }

    #[test]
    fn greedy_takes_the_single_agent() {
        let g = single_skill(&[2.0], 1);
        let c = greedy_max_joint_utility(&g, &[0]).unwrap();
        assert_eq!(c.members(), &[0]);
    }

    #[test]
    fn greedy_takes_everyone_when_the_cap_allows() {
        let g = single_skill(&[1.0, 2.0, 3.0], 3);
        let c = greedy_max_joint_utility(&g, &[0, 1, 2]).unwrap();
        assert_eq!(c.members(), &[0, 1, 2]);
    }

    #[test]
    fn empty_pool_is_rejected() {
        let g = single_skill(&[1.0], 1);
        assert!(greedy_max_joint_utility(&g, &[]).is_err());
        assert!(brute_force_max_joint_utility(&g, &[], &Limits::default()).is_err());
    }

    /// Coverage-style instance where greedy is suboptimal: the big set traps
    /// the first pick.
    fn coverage_trap() -> Instance {
        let sets: [&[usize]; 3] = [&[1, 2, 3, 4], &[1, 2, 5], &[3, 4, 6]];
        let rows = sets
            .iter()
            .map(|set| (1..=6).map(|s| if set.contains(&s) { 1.0 } else { 0.0 }).collect())
            .collect();
        Instance::new(
            vec!["big".into(), "left".into(), "right".into()],
            (1..=6).map(|s| format!("u{s}")).collect(),
            rows,
            2,
        )
        .unwrap()
    }

    #[test]
    fn greedy_lands_between_the_guarantee_and_the_optimum() {
        let g = coverage_trap();
        let pool = [0usize, 1, 2];
        let limits = Limits::default();
        let greedy = greedy_max_joint_utility(&g, &pool).unwrap();
        let best = brute_force_max_joint_utility(&g, &pool, &limits).unwrap();
        let gv = g.joint_utility(&greedy);
        let bv = g.joint_utility(&best);
        assert_eq!(gv, 5.0);
        assert_eq!(bv, 6.0);
        assert_eq!(best.members(), &[1, 2]);
        assert!(gv >= (ONE_MINUS_INV_E - DEFAULT_EPSILON) * bv);
        assert!(gv < bv);
    }

    #[test]
    fn brute_force_tie_break_is_canonical() {
        let g = single_skill(&[2.0, 2.0, 2.0], 2);
        let best = brute_force_max_joint_utility(&g, &[0, 1, 2], &Limits::default()).unwrap();
        assert_eq!(best.members(), &[0]);
    }

    #[test]
    fn brute_force_respects_the_budget() {
        let g = single_skill(&[1.0; 6], 3);
        let limits = Limits {
            subset_budget: 5,
            ..Limits::default()
        };
        assert!(matches!(
            brute_force_max_joint_utility(&g, &[0, 1, 2, 3, 4, 5], &limits),
            Err(Error::Capability(_))
        ));
    }

    #[test]
    fn small_population_forms_the_grand_coalition() {
        let g = single_skill(&[1.0, 2.0], 2);
        let p = greedy_core_partition(&g);
        assert_eq!(p.coalitions().len(), 1);
        assert_eq!(p.coalitions()[0].members(), &[0, 1]);
    }

    #[test]
    fn extraction_order_starts_with_the_greedy_best() {
        let g = coverage_trap();
        let p = greedy_core_partition(&g);
        let limits = Limits::default();
        let report = is_alpha_core_stable(&g, &p, ONE_MINUS_INV_E, &limits).unwrap();
        assert!(report.holds);
        let first = greedy_max_joint_utility(&g, &[0, 1, 2]).unwrap();
        let opt = brute_force_max_joint_utility(&g, &[0, 1, 2], &limits).unwrap();
        assert!(
            g.joint_utility(&first)
                >= (ONE_MINUS_INV_E - DEFAULT_EPSILON) * g.joint_utility(&opt)
        );
    }
}
