//! Games given by an explicit joint-utility table, plus the potential-vector
//! machinery shared by all common-ranking games.
//!
//! A table-backed game stores one utility per non-empty subset of agents.
//! Construction verifies monotonicity and submodularity exhaustively when the
//! agent count is small enough; the outcome is recorded on the instance so
//! checkers know whether deviations to empty coalitions can be skipped.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::enumerate::for_each_partition;
use crate::error::{Error, Result};
use crate::game::Game;
use crate::num::Limits;
use crate::num::ValueCmp;
use crate::partition::Partition;

/// Hard cap on table size: 2^20 utilities.
const MAX_TABLE_AGENTS: usize = 20;
/// Tables up to this many agents are verified on construction.
const AUTO_VERIFY_AGENTS: usize = 12;

#[derive(Clone, Debug)]
pub struct TableGame {
    agent_ids: Vec<String>,
    kappa: usize,
    /// Indexed by membership bitmask; entry 0 is the empty set's 0.
    table: Vec<f64>,
    integral: bool,
    monotone: Option<bool>,
    submodular: Option<bool>,
}

impl TableGame {
    /// Builds a table game from per-subset utilities. `kappa` defaults to the
    /// number of agents when absent. Every non-empty subset of the agent list
    /// must appear exactly once in `entries`.
    pub fn new(
        agent_ids: Vec<String>,
        kappa: Option<usize>,
        entries: &BTreeMap<String, f64>,
    ) -> Result<Self> {
        let n = agent_ids.len();
        if n == 0 {
            return Err(Error::InvalidInstance("table game has no agents".into()));
        }
        if n > MAX_TABLE_AGENTS {
            return Err(Error::Capability(format!(
                "table form supports at most {MAX_TABLE_AGENTS} agents, got {n}"
            )));
        }
        for id in &agent_ids {
            if id.is_empty() || id.contains(',') {
                return Err(Error::InvalidInstance(format!(
                    "agent id {id:?} cannot be used in subset keys"
                )));
            }
        }
        let kappa = kappa.unwrap_or(n);
        if kappa == 0 || kappa > n {
            return Err(Error::InvalidInstance(format!(
                "kappa must lie in 1..={n}, got {kappa}"
            )));
        }
        let lookup: std::collections::HashMap<&str, usize> = agent_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.as_str(), i))
            .collect();
        if lookup.len() != n {
            return Err(Error::InvalidInstance("duplicate agent id".into()));
        }
        let mut table = vec![f64::NAN; 1usize << n];
        table[0] = 0.0;
        for (key, &value) in entries {
            let mut mask = 0usize;
            for part in key.split(',') {
                let part = part.trim();
                let idx = *lookup.get(part).ok_or_else(|| {
                    Error::InvalidReference(format!("unknown agent id {part:?} in key {key:?}"))
                })?;
                if mask & (1 << idx) != 0 {
                    return Err(Error::InvalidInstance(format!(
                        "duplicate agent {part:?} in key {key:?}"
                    )));
                }
                mask |= 1 << idx;
            }
            if mask == 0 {
                return Err(Error::InvalidInstance("empty subset key".into()));
            }
            if !value.is_finite() || value < 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "utility for {key:?} must be finite and >= 0, got {value}"
                )));
            }
            if !table[mask].is_nan() {
                return Err(Error::InvalidInstance(format!(
                    "subset {key:?} appears more than once"
                )));
            }
            table[mask] = value;
        }
        if let Some(mask) = table.iter().position(|v| v.is_nan()) {
            let members: Vec<&str> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| agent_ids[i].as_str())
                .collect();
            return Err(Error::InvalidInstance(format!(
                "utility table is missing subset {:?}",
                members.join(",")
            )));
        }
        let integral = table.iter().all(|v| v.fract() == 0.0);
        let mut game = TableGame {
            agent_ids,
            kappa,
            table,
            integral,
            monotone: None,
            submodular: None,
        };
        if n <= AUTO_VERIFY_AGENTS {
            let report = check_monotone_submodular(
                &game,
                CheckMode::Exhaustive {
                    limit: AUTO_VERIFY_AGENTS,
                },
            )?;
            game.monotone = Some(report.monotone);
            game.submodular = Some(report.submodular);
        }
        Ok(game)
    }

    /// Tabulates any game into the explicit table form.
    pub fn tabulate<G: Game>(g: &G) -> Result<Self> {
        let n = g.agent_count();
        if n > MAX_TABLE_AGENTS {
            return Err(Error::Capability(format!(
                "cannot tabulate a game with {n} agents (cap {MAX_TABLE_AGENTS})"
            )));
        }
        let mut entries = BTreeMap::new();
        let mut members = Vec::with_capacity(n);
        for mask in 1usize..(1 << n) {
            members.clear();
            for i in 0..n {
                if mask & (1 << i) != 0 {
                    members.push(i);
                }
            }
            let key = members
                .iter()
                .map(|&i| g.agent_ids()[i].as_str())
                .collect::<Vec<_>>()
                .join(",");
            entries.insert(key, g.utility(&members));
        }
        TableGame::new(g.agent_ids().to_vec(), Some(g.kappa()), &entries)
    }

    pub fn verified_monotone(&self) -> Option<bool> {
        self.monotone
    }

    pub fn verified_submodular(&self) -> Option<bool> {
        self.submodular
    }

    pub fn to_json(&self) -> String {
        let n = self.agent_ids.len();
        let mut utilities = BTreeMap::new();
        for mask in 1usize..(1 << n) {
            let mut ids: Vec<&str> = (0..n)
                .filter(|i| mask & (1 << i) != 0)
                .map(|i| self.agent_ids[i].as_str())
                .collect();
            ids.sort_unstable();
            utilities.insert(ids.join(","), self.table[mask]);
        }
        let dto = TableDto {
            kind: "hgcrp".into(),
            agents: self.agent_ids.clone(),
            kappa: Some(self.kappa),
            utilities,
        };
        serde_json::to_string_pretty(&dto).expect("table serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: TableDto =
            serde_json::from_str(text).map_err(|e| Error::parse_json("table game", &e))?;
        if dto.kind != "hgcrp" {
            return Err(Error::Parse(format!(
                "expected instance type \"hgcrp\", got {:?}",
                dto.kind
            )));
        }
        TableGame::new(dto.agents, dto.kappa, &dto.utilities)
    }

    fn mask_of(&self, members: &[usize]) -> usize {
        let mut mask = 0usize;
        for &m in members {
            debug_assert!(m < self.agent_ids.len());
            mask |= 1 << m;
        }
        mask
    }
}

impl Game for TableGame {
    fn agent_ids(&self) -> &[String] {
        &self.agent_ids
    }

    fn kappa(&self) -> usize {
        self.kappa
    }

    fn utility(&self, members: &[usize]) -> f64 {
        self.table[self.mask_of(members)]
    }

    fn is_integral(&self) -> bool {
        self.integral
    }

    fn is_monotone(&self) -> bool {
        self.monotone == Some(true)
    }
}

#[derive(Serialize, Deserialize)]
struct TableDto {
    #[serde(rename = "type")]
    kind: String,
    agents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    kappa: Option<usize>,
    utilities: BTreeMap<String, f64>,
}

/// A game defined by an arbitrary joint-utility closure.
pub struct CallableGame<F: Fn(&[usize]) -> f64> {
    agent_ids: Vec<String>,
    kappa: usize,
    utility: F,
    integral: bool,
    monotone: bool,
}

impl<F: Fn(&[usize]) -> f64> CallableGame<F> {
    pub fn new(agent_ids: Vec<String>, kappa: usize, utility: F) -> Self {
        CallableGame {
            agent_ids,
            kappa,
            utility,
            integral: false,
            monotone: false,
        }
    }

    pub fn integral(mut self, yes: bool) -> Self {
        self.integral = yes;
        self
    }

    /// Declare the closure monotone; the caller vouches for it.
    pub fn monotone(mut self, yes: bool) -> Self {
        self.monotone = yes;
        self
    }
}

impl<F: Fn(&[usize]) -> f64> Game for CallableGame<F> {
    fn agent_ids(&self) -> &[String] {
        &self.agent_ids
    }

    fn kappa(&self) -> usize {
        self.kappa
    }

    fn utility(&self, members: &[usize]) -> f64 {
        (self.utility)(members)
    }

    fn is_integral(&self) -> bool {
        self.integral
    }

    fn is_monotone(&self) -> bool {
        self.monotone
    }
}

#[derive(Clone, Copy, Debug)]
pub enum CheckMode {
    /// Check every pair X subset-of Y and every triple (X, Y, x) with x
    /// outside Y. Rejected when the game has more agents than `limit`.
    Exhaustive { limit: usize },
    /// Spot-check seeded random pairs and triples.
    Sampled { triples: u64, seed: u64 },
}

#[derive(Clone, Debug, Serialize)]
pub struct SetPairViolation {
    pub subset: Vec<String>,
    pub superset: Vec<String>,
    pub subset_value: f64,
    pub superset_value: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MarginalViolation {
    pub small_set: Vec<String>,
    pub large_set: Vec<String>,
    pub agent: String,
    pub small_marginal: f64,
    pub large_marginal: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct MonotoneSubmodularReport {
    pub monotone: bool,
    pub submodular: bool,
    pub monotone_counterexample: Option<SetPairViolation>,
    pub submodular_counterexample: Option<MarginalViolation>,
    pub exhaustive: bool,
    pub checks: u64,
}

/// Checks whether a game's utility is monotone and submodular.
///
/// Violations are reported with the witnessing sets. In exhaustive mode the
/// scan visits supersets in ascending bitmask order, so the reported
/// counterexample is deterministic; sampled mode is deterministic per seed.
pub fn check_monotone_submodular<G: Game>(
    g: &G,
    mode: CheckMode,
) -> Result<MonotoneSubmodularReport> {
    let n = g.agent_count();
    if n > 63 {
        return Err(Error::Capability(format!(
            "monotonicity check supports at most 63 agents, got {n}"
        )));
    }
    match mode {
        CheckMode::Exhaustive { limit } => {
            if n > limit {
                return Err(Error::Capability(format!(
                    "exhaustive check limited to {limit} agents, got {n}; request sampled mode"
                )));
            }
            Ok(check_exhaustive(g))
        }
        CheckMode::Sampled { triples, seed } => Ok(check_sampled(g, triples, seed)),
    }
}

fn members_of(mask: u64, n: usize) -> Vec<usize> {
    (0..n).filter(|i| mask & (1 << i) != 0).collect()
}

fn ids_of<G: Game>(g: &G, mask: u64) -> Vec<String> {
    members_of(mask, g.agent_count())
        .into_iter()
        .map(|i| g.agent_ids()[i].clone())
        .collect()
}

fn check_exhaustive<G: Game>(g: &G) -> MonotoneSubmodularReport {
    let n = g.agent_count();
    let full: u64 = (1u64 << n) - 1;
    let cmp = g.value_cmp(crate::num::DEFAULT_EPSILON);
    // One utility evaluation per subset; the scans below are pure lookups.
    let mut value = vec![0.0f64; (full + 1) as usize];
    for mask in 1..=full {
        value[mask as usize] = g.utility(&members_of(mask, n));
    }
    let mut checks = 0u64;
    let mut monotone_counterexample = None;
    'mono: for y in 1..=full {
        // proper submasks of y, descending
        let mut x = (y - 1) & y;
        loop {
            checks += 1;
            if cmp.gt(value[x as usize], value[y as usize]) {
                monotone_counterexample = Some(SetPairViolation {
                    subset: ids_of(g, x),
                    superset: ids_of(g, y),
                    subset_value: value[x as usize],
                    superset_value: value[y as usize],
                });
                break 'mono;
            }
            if x == 0 {
                break;
            }
            x = (x - 1) & y;
        }
    }
    let mut submodular_counterexample = None;
    'sub: for y in 0..=full {
        let mut x = y;
        loop {
            for agent in 0..n {
                let bit = 1u64 << agent;
                if y & bit != 0 {
                    continue;
                }
                checks += 1;
                let small = value[(x | bit) as usize] - value[x as usize];
                let large = value[(y | bit) as usize] - value[y as usize];
                if cmp.gt(large, small) {
                    submodular_counterexample = Some(MarginalViolation {
                        small_set: ids_of(g, x),
                        large_set: ids_of(g, y),
                        agent: g.agent_ids()[agent].clone(),
                        small_marginal: small,
                        large_marginal: large,
                    });
                    break 'sub;
                }
            }
            if x == 0 {
                break;
            }
            x = (x - 1) & y;
        }
    }
    MonotoneSubmodularReport {
        monotone: monotone_counterexample.is_none(),
        submodular: submodular_counterexample.is_none(),
        monotone_counterexample,
        submodular_counterexample,
        exhaustive: true,
        checks,
    }
}

fn check_sampled<G: Game>(g: &G, triples: u64, seed: u64) -> MonotoneSubmodularReport {
    let n = g.agent_count();
    let full: u64 = (1u64 << n) - 1;
    let cmp = g.value_cmp(crate::num::DEFAULT_EPSILON);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut checks = 0u64;
    let mut monotone_counterexample = None;
    let mut submodular_counterexample = None;
    for _ in 0..triples {
        let agent = rng.gen_range(0..n);
        let bit = 1u64 << agent;
        let y = rng.gen::<u64>() & full & !bit;
        let x = rng.gen::<u64>() & y;
        let vx = g.utility(&members_of(x, n));
        let vy = g.utility(&members_of(y, n));
        checks += 1;
        if monotone_counterexample.is_none() && cmp.gt(vx, vy) {
            monotone_counterexample = Some(SetPairViolation {
                subset: ids_of(g, x),
                superset: ids_of(g, y),
                subset_value: vx,
                superset_value: vy,
            });
        }
        let vxa = g.utility(&members_of(x | bit, n));
        let vya = g.utility(&members_of(y | bit, n));
        checks += 1;
        if submodular_counterexample.is_none() && cmp.gt(vya - vy, vxa - vx) {
            submodular_counterexample = Some(MarginalViolation {
                small_set: ids_of(g, x),
                large_set: ids_of(g, y),
                agent: g.agent_ids()[agent].clone(),
                small_marginal: vxa - vx,
                large_marginal: vya - vy,
            });
        }
        if monotone_counterexample.is_some() && submodular_counterexample.is_some() {
            break;
        }
    }
    MonotoneSubmodularReport {
        monotone: monotone_counterexample.is_none(),
        submodular: submodular_counterexample.is_none(),
        monotone_counterexample,
        submodular_counterexample,
        exhaustive: false,
        checks,
    }
}

/// Agent utilities under a partition, sorted non-increasing. Two partitions
/// are compared lexicographically on these vectors.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PotentialVector(Vec<f64>);

impl PotentialVector {
    pub fn values(&self) -> &[f64] {
        &self.0
    }
}

pub fn psi<G: Game>(g: &G, p: &Partition) -> PotentialVector {
    let mut v = p.agent_utilities(g);
    v.sort_by(|a, b| b.partial_cmp(a).expect("utilities are finite"));
    PotentialVector(v)
}

/// Lexicographic comparison of two potential vectors of equal length.
pub fn lex_compare(a: &[f64], b: &[f64], cmp: ValueCmp) -> Result<Ordering> {
    if a.len() != b.len() {
        return Err(Error::InvalidArgument(format!(
            "potential vectors have different lengths ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    Ok(cmp.lex_cmp(a, b))
}

/// The partition maximizing the potential vector, found by exhaustive
/// enumeration. Ties are broken toward the canonically smallest partition.
/// For monotone submodular games the result is simultaneously Nash stable,
/// core stable, and Pareto optimal.
pub fn psi_maximal_partition<G: Game>(g: &G, limits: &Limits) -> Result<Partition> {
    limits.validate()?;
    let n = g.agent_count();
    if n > limits.partition_limit {
        return Err(Error::Capability(format!(
            "exhaustive partition search limited to {} agents, got {n}",
            limits.partition_limit
        )));
    }
    let cmp = g.value_cmp(limits.epsilon);
    let mut best: Option<(Vec<f64>, Vec<Vec<usize>>)> = None;
    let _ = for_each_partition(n, g.kappa(), |blocks| {
        let mut utilities = Vec::with_capacity(n);
        for b in blocks {
            let u = g.utility(b);
            utilities.extend(std::iter::repeat_n(u, b.len()));
        }
        utilities.sort_by(|a, b| b.partial_cmp(a).expect("utilities are finite"));
        let better = match &best {
            None => true,
            Some((bu, bb)) => match cmp.lex_cmp(&utilities, bu) {
                Ordering::Greater => true,
                Ordering::Equal => blocks < bb.as_slice(),
                Ordering::Less => false,
            },
        };
        if better {
            best = Some((utilities, blocks.to_vec()));
        }
        ControlFlow::Continue(())
    });
    let (_, blocks) = best.expect("at least one partition exists");
    Ok(Partition::from_blocks_unchecked(&blocks, n, g.kappa()))
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two agents where the pair is worth less than one of the singletons.
    pub(crate) fn non_monotone_pair() -> TableGame {
        let mut entries = BTreeMap::new();
        entries.insert("1".to_string(), 1.0);
        entries.insert("1,2".to_string(), 2.0);
        entries.insert("2".to_string(), 3.0);
        TableGame::new(vec!["1".into(), "2".into()], None, &entries).unwrap()
    }

    #[test]
    fn kappa_defaults_to_agent_count() {
        let g = non_monotone_pair();
        assert_eq!(g.kappa(), 2);
        assert_eq!(g.utility(&[0, 1]), 2.0);
        assert_eq!(g.utility(&[]), 0.0);
    }

    #[test]
    fn construction_flags_non_monotone_table() {
        let g = non_monotone_pair();
        assert_eq!(g.verified_monotone(), Some(false));
        assert!(!g.is_monotone());
        let report =
            check_monotone_submodular(&g, CheckMode::Exhaustive { limit: 12 }).unwrap();
        assert!(!report.monotone);
        let ce = report.monotone_counterexample.unwrap();
        assert_eq!(ce.subset, vec!["2".to_string()]);
        assert_eq!(ce.superset, vec!["1".to_string(), "2".to_string()]);
    }

    #[test]
    fn constant_positive_table_is_monotone_and_submodular() {
        let mut entries = BTreeMap::new();
        for key in ["1", "2", "3", "1,2", "1,3", "2,3", "1,2,3"] {
            entries.insert(key.to_string(), 5.0);
        }
        let g = TableGame::new(
            vec!["1".into(), "2".into(), "3".into()],
            Some(2),
            &entries,
        )
        .unwrap();
        assert_eq!(g.verified_monotone(), Some(true));
        assert_eq!(g.verified_submodular(), Some(true));
    }

    #[test]
    fn table_requires_every_subset() {
        let mut entries = BTreeMap::new();
        entries.insert("1".to_string(), 1.0);
        entries.insert("2".to_string(), 1.0);
        let err = TableGame::new(vec!["1".into(), "2".into()], None, &entries).unwrap_err();
        assert!(err.to_string().contains("missing subset"));
    }

    #[test]
    fn json_round_trip() {
        let g = non_monotone_pair();
        let text = g.to_json();
        let h = TableGame::from_json(&text).unwrap();
        assert_eq!(h.utility(&[1]), 3.0);
        assert_eq!(h.to_json(), text);
    }

    #[test]
    fn tabulated_game_matches_source() {
        let heg = crate::instance::Instance::new(
            vec!["a".into(), "b".into()],
            vec!["s".into(), "t".into()],
            vec![vec![2.0, 0.0], vec![1.0, 3.0]],
            2,
        )
        .unwrap();
        let table = TableGame::tabulate(&heg).unwrap();
        assert_eq!(table.utility(&[0]), 2.0);
        assert_eq!(table.utility(&[1]), 4.0);
        assert_eq!(table.utility(&[0, 1]), 5.0);
        assert_eq!(table.verified_monotone(), Some(true));
        assert_eq!(table.verified_submodular(), Some(true));
    }

    #[test]
    fn supermodular_callable_is_caught() {
        let g = CallableGame::new(
            vec!["a".into(), "b".into(), "c".into()],
            3,
            |members: &[usize]| {
                let k = members.len() as f64;
                k * k
            },
        )
        .integral(true);
        let report =
            check_monotone_submodular(&g, CheckMode::Exhaustive { limit: 12 }).unwrap();
        assert!(report.monotone);
        assert!(!report.submodular);
        let ce = report.submodular_counterexample.unwrap();
        assert!(ce.large_marginal > ce.small_marginal);
    }

    #[test]
    fn exhaustive_check_rejects_large_callables() {
        let ids: Vec<String> = (0..14).map(|i| format!("a{i}")).collect();
        let g = CallableGame::new(ids, 3, |m: &[usize]| m.len() as f64);
        let err = check_monotone_submodular(&g, CheckMode::Exhaustive { limit: 12 }).unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
        let ok = check_monotone_submodular(
            &g,
            CheckMode::Sampled {
                triples: 1000,
                seed: 7,
            },
        )
        .unwrap();
        assert!(ok.monotone && ok.submodular);
    }

    #[test]
    fn psi_sorts_non_increasing() {
        let g = non_monotone_pair();
        let p = Partition::singletons(2, 2);
        let v = psi(&g, &p);
        assert_eq!(v.values(), &[3.0, 1.0]);
    }

    #[test]
    fn lex_compare_orders_potentials() {
        let a = [3.0, 1.0];
        let b = [2.0, 2.0];
        assert_eq!(lex_compare(&a, &b, ValueCmp::Exact).unwrap(), Ordering::Greater);
        assert!(lex_compare(&a, &[1.0], ValueCmp::Exact).is_err());
    }

    #[test]
    fn psi_maximal_prefers_the_split_pair() {
        let g = non_monotone_pair();
        let best = psi_maximal_partition(&g, &Limits::default()).unwrap();
        assert_eq!(best.coalitions().len(), 2);
        assert_eq!(psi(&g, &best).values(), &[3.0, 1.0]);
    }

    #[test]
    fn psi_maximal_respects_partition_limit() {
        let ids: Vec<String> = (0..9).map(|i| format!("a{i}")).collect();
        let g = CallableGame::new(ids, 3, |m: &[usize]| m.len() as f64);
        let err = psi_maximal_partition(&g, &Limits::default()).unwrap_err();
        assert!(matches!(err, Error::Capability(_)));
    }
}
