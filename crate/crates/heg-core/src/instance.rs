//! Expertise-based team formation instances.
//!
//! An instance holds a set of agents, a set of skills, a non-negative
//! expertise level per (agent, skill), and a coalition size cap. A
//! coalition's level on a skill is the maximum over its members, and its
//! joint utility is the sum of those maxima across all skills; every member
//! receives the joint utility. Adding members never lowers any per-skill
//! maximum, so the joint utility is monotone, and marginal gains shrink as
//! coalitions grow (submodularity).

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::game::Game;
use crate::partition::Partition;
use serde::{Deserialize, Serialize};

/// Provenance carried by generated instances, stored under the reserved
/// `meta` key in the JSON form. Reduction-aware operations (such as the
/// witness-partition construction) require it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorMeta {
    pub generator: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub universe_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cover_bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub padding_agents: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct Instance {
    agent_ids: Vec<String>,
    skill_ids: Vec<String>,
    /// expertise[agent][skill]
    expertise: Vec<Vec<f64>>,
    kappa: usize,
    /// Maximum level when every value is a non-negative integer.
    level_bound: Option<u64>,
    meta: Option<GeneratorMeta>,
    agent_lookup: HashMap<String, usize>,
    skill_lookup: HashMap<String, usize>,
}

impl Instance {
    pub fn new(
        agent_ids: Vec<String>,
        skill_ids: Vec<String>,
        expertise: Vec<Vec<f64>>,
        kappa: usize,
    ) -> Result<Self> {
        let n = agent_ids.len();
        if n == 0 {
            return Err(Error::InvalidInstance("instance has no agents".into()));
        }
        if kappa == 0 || kappa > n {
            return Err(Error::InvalidInstance(format!(
                "kappa must lie in 1..={n}, got {kappa}"
            )));
        }
        if expertise.len() != n {
            return Err(Error::InvalidInstance(format!(
                "{} expertise rows for {n} agents",
                expertise.len()
            )));
        }
        for (a, row) in expertise.iter().enumerate() {
            if row.len() != skill_ids.len() {
                return Err(Error::InvalidInstance(format!(
                    "agent {:?} has {} expertise values for {} skills",
                    agent_ids[a],
                    row.len(),
                    skill_ids.len()
                )));
            }
            for (s, &v) in row.iter().enumerate() {
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::InvalidInstance(format!(
                        "expertise of agent {:?} on skill {:?} must be finite and >= 0, got {v}",
                        agent_ids[a], skill_ids[s]
                    )));
                }
            }
        }
        let agent_lookup = build_lookup(&agent_ids, "agent")?;
        let skill_lookup = build_lookup(&skill_ids, "skill")?;
        let level_bound = derive_level_bound(&expertise);
        Ok(Instance {
            agent_ids,
            skill_ids,
            expertise,
            kappa,
            level_bound,
            meta: None,
            agent_lookup,
            skill_lookup,
        })
    }

    pub fn with_meta(mut self, meta: GeneratorMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn meta(&self) -> Option<&GeneratorMeta> {
        self.meta.as_ref()
    }

    pub fn skill_ids(&self) -> &[String] {
        &self.skill_ids
    }

    pub fn skill_count(&self) -> usize {
        self.skill_ids.len()
    }

    /// Maximum expertise level when the instance is integer-valued.
    pub fn level_bound(&self) -> Option<u64> {
        self.level_bound
    }

    pub fn skill_index(&self, id: &str) -> Result<usize> {
        self.skill_lookup
            .get(id)
            .copied()
            .ok_or_else(|| Error::InvalidReference(format!("unknown skill id {id:?}")))
    }

    pub fn expertise_of(&self, agent: usize, skill: usize) -> f64 {
        self.expertise[agent][skill]
    }

    /// Highest expertise on `skill` among `members` (0 for the empty set).
    pub fn joint_expertise(&self, members: &[usize], skill: usize) -> f64 {
        members
            .iter()
            .map(|&a| self.expertise[a][skill])
            .fold(0.0, f64::max)
    }

    /// Sum of the per-skill maxima over `members`; 0 for the empty set.
    pub fn joint_utility(&self, members: &[usize]) -> f64 {
        (0..self.skill_ids.len())
            .map(|s| self.joint_expertise(members, s))
            .sum()
    }

    /// Utility gained by adding `candidate` to `members`, computed skill by
    /// skill as the sum of max(candidate level - coalition level, 0). Equal
    /// to the plain utility difference, but cheaper and numerically exact.
    pub fn marginal_gain(&self, members: &[usize], candidate: usize) -> Result<f64> {
        if members.contains(&candidate) {
            return Err(Error::InvalidArgument(format!(
                "agent {:?} is already a member",
                self.agent_ids[candidate]
            )));
        }
        Ok((0..self.skill_ids.len())
            .map(|s| (self.expertise[candidate][s] - self.joint_expertise(members, s)).max(0.0))
            .sum())
    }

    /// The utility agent `agent` receives under `p`.
    pub fn agent_utility(&self, p: &Partition, agent: usize) -> Result<f64> {
        if p.agent_count() != self.agent_ids.len() {
            return Err(Error::InvalidPartition(format!(
                "partition covers {} agents, instance has {}",
                p.agent_count(),
                self.agent_ids.len()
            )));
        }
        if agent >= self.agent_ids.len() {
            return Err(Error::InvalidReference(format!(
                "agent index {agent} out of range"
            )));
        }
        Ok(self.joint_utility(p.coalition_of(agent)))
    }

    pub fn to_json(&self) -> String {
        let dto = InstanceDto {
            kind: "heg".into(),
            skills: self.skill_ids.clone(),
            kappa: self.kappa,
            agents: self
                .agent_ids
                .iter()
                .zip(&self.expertise)
                .map(|(id, row)| AgentDto {
                    id: id.clone(),
                    expertise: row.clone(),
                })
                .collect(),
            meta: self.meta.clone(),
        };
        serde_json::to_string_pretty(&dto).expect("instance serialization cannot fail")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: InstanceDto =
            serde_json::from_str(text).map_err(|e| Error::parse_json("instance", &e))?;
        if dto.kind != "heg" {
            return Err(Error::Parse(format!(
                "expected instance type \"heg\", got {:?}",
                dto.kind
            )));
        }
        let (ids, rows): (Vec<String>, Vec<Vec<f64>>) = dto
            .agents
            .into_iter()
            .map(|a| (a.id, a.expertise))
            .unzip();
        let mut inst = Instance::new(ids, dto.skills, rows, dto.kappa)?;
        inst.meta = dto.meta;
        Ok(inst)
    }
}

impl Game for Instance {
    fn agent_ids(&self) -> &[String] {
        &self.agent_ids
    }

    fn kappa(&self) -> usize {
        self.kappa
    }

    fn utility(&self, members: &[usize]) -> f64 {
        self.joint_utility(members)
    }

    fn is_integral(&self) -> bool {
        self.level_bound.is_some()
    }

    fn is_monotone(&self) -> bool {
        true
    }

    fn agent_index(&self, id: &str) -> Result<usize> {
        self.agent_lookup
            .get(id)
            .copied()
            .ok_or_else(|| Error::InvalidReference(format!("unknown agent id {id:?}")))
    }
}

fn build_lookup(ids: &[String], what: &str) -> Result<HashMap<String, usize>> {
    let mut map = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if map.insert(id.clone(), i).is_some() {
            return Err(Error::InvalidInstance(format!("duplicate {what} id {id:?}")));
        }
    }
    Ok(map)
}

fn derive_level_bound(expertise: &[Vec<f64>]) -> Option<u64> {
    let mut max = 0u64;
    for row in expertise {
        for &v in row {
            if v.fract() != 0.0 || v > u64::MAX as f64 {
                return None;
            }
            max = max.max(v as u64);
        }
    }
    Some(max)
}

#[derive(Serialize, Deserialize)]
struct InstanceDto {
    #[serde(rename = "type")]
    kind: String,
    skills: Vec<String>,
    kappa: usize,
    agents: Vec<AgentDto>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    meta: Option<GeneratorMeta>,
}

#[derive(Serialize, Deserialize)]
struct AgentDto {
    id: String,
    expertise: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Two agents over (programming, database, languages)-style skills:
    /// one strong on the first skill, one strong on the last, tied middle.
    pub(crate) fn duo() -> Instance {
        Instance::new(
            vec!["alice".into(), "bob".into()],
            vec!["py".into(), "java".into(), "sql".into()],
            vec![vec![1.0, 3.0, 3.0], vec![3.0, 3.0, 1.0]],
            2,
        )
        .unwrap()
    }

    #[test]
    fn pairing_complementary_agents_sums_skill_maxima() {
        let g = duo();
        assert_eq!(g.joint_utility(&[0, 1]), 9.0);
        for s in 0..3 {
            assert_eq!(g.joint_expertise(&[0, 1], s), 3.0);
        }
        assert_eq!(g.joint_utility(&[0]), 7.0);
        assert_eq!(g.joint_utility(&[1]), 7.0);
        assert_eq!(g.joint_utility(&[]), 0.0);
    }

    #[test]
    fn marginal_gain_counts_only_improvements() {
        let g = duo();
        // alice joining bob: py +0, java +0, sql +2
        assert_eq!(g.marginal_gain(&[1], 0).unwrap(), 2.0);
        assert_eq!(g.marginal_gain(&[0], 1).unwrap(), 2.0);
        assert_eq!(g.marginal_gain(&[], 0).unwrap(), 7.0);
        assert!(g.marginal_gain(&[0], 0).is_err());
    }

    #[test]
    fn marginal_gain_equals_utility_difference() {
        let g = duo();
        let diff = g.joint_utility(&[0, 1]) - g.joint_utility(&[1]);
        assert_eq!(g.marginal_gain(&[1], 0).unwrap(), diff);
    }

    #[test]
    fn level_bound_derivation() {
        let g = duo();
        assert_eq!(g.level_bound(), Some(3));
        let r = Instance::new(
            vec!["a".into()],
            vec!["s".into()],
            vec![vec![0.5]],
            1,
        )
        .unwrap();
        assert_eq!(r.level_bound(), None);
        assert!(!r.is_integral());
    }

    #[test]
    fn validation_rejects_bad_shapes() {
        assert!(Instance::new(vec![], vec![], vec![], 1).is_err());
        assert!(Instance::new(
            vec!["a".into()],
            vec!["s".into()],
            vec![vec![1.0]],
            2
        )
        .is_err());
        assert!(Instance::new(
            vec!["a".into(), "a".into()],
            vec!["s".into()],
            vec![vec![1.0], vec![1.0]],
            1
        )
        .is_err());
        assert!(Instance::new(
            vec!["a".into()],
            vec!["s".into()],
            vec![vec![-1.0]],
            1
        )
        .is_err());
        assert!(Instance::new(
            vec!["a".into()],
            vec!["s".into(), "t".into()],
            vec![vec![1.0]],
            1
        )
        .is_err());
    }

    #[test]
    fn unknown_references_error() {
        let g = duo();
        assert!(g.agent_index("alice").is_ok());
        assert!(g.agent_index("carol").is_err());
        assert!(g.skill_index("rust").is_err());
    }

    #[test]
    fn json_round_trip_preserves_everything() {
        let g = duo();
        let text = g.to_json();
        let h = Instance::from_json(&text).unwrap();
        assert_eq!(h.agent_ids(), g.agent_ids());
        assert_eq!(h.skill_ids(), g.skill_ids());
        assert_eq!(h.kappa(), 2);
        assert_eq!(h.level_bound(), Some(3));
        assert_eq!(h.joint_utility(&[0, 1]), 9.0);
        // serialization is deterministic
        assert_eq!(h.to_json(), text);
    }

    #[test]
    fn parse_reports_line_and_column() {
        let err = Instance::from_json("{\"type\":\"heg\",\n  \"skills\": [,]}").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
    }
}
