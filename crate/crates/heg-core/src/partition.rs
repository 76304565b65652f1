//! Coalitions and partitions over agent indices.
//!
//! Agents are addressed by their index in the owning instance's agent list.
//! A [`Coalition`] is a non-empty sorted set of indices; a [`Partition`] is a
//! disjoint cover of the full agent set whose coalitions all respect the size
//! cap. Both carry a canonical form: coalition members ascend, and coalitions
//! are ordered by their smallest member.

use crate::error::{Error, Result};
use crate::game::Game;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(Vec<usize>);

impl Coalition {
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        if members.is_empty() {
            return Err(Error::InvalidArgument("coalition must be non-empty".into()));
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidArgument(
                "coalition contains a duplicate agent".into(),
            ));
        }
        Ok(Coalition(members))
    }

    pub fn singleton(agent: usize) -> Self {
        Coalition(vec![agent])
    }

    pub fn members(&self) -> &[usize] {
        &self.0
    }

    pub fn contains(&self, agent: usize) -> bool {
        self.0.binary_search(&agent).is_ok()
    }

    /// Members with `agent` inserted; `agent` must not already be present.
    pub fn with(&self, agent: usize) -> Vec<usize> {
        debug_assert!(!self.contains(agent));
        let mut v = Vec::with_capacity(self.0.len() + 1);
        let pos = self.0.partition_point(|&m| m < agent);
        v.extend_from_slice(&self.0[..pos]);
        v.push(agent);
        v.extend_from_slice(&self.0[pos..]);
        v
    }

    /// Members with `agent` removed (possibly empty).
    pub fn without(&self, agent: usize) -> Vec<usize> {
        self.0.iter().copied().filter(|&m| m != agent).collect()
    }

    pub fn ids<G: Game>(&self, g: &G) -> Vec<String> {
        let ids = g.agent_ids();
        self.0.iter().map(|&m| ids[m].clone()).collect()
    }
}

impl std::ops::Deref for Coalition {
    type Target = [usize];
    fn deref(&self) -> &[usize] {
        &self.0
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Partition {
    coalitions: Vec<Coalition>,
    /// agent index -> position in `coalitions`
    membership: Vec<usize>,
    kappa: usize,
}

impl Partition {
    /// Validates disjointness, full coverage of `0..n_agents`, and the size
    /// cap, then stores the canonical form.
    pub fn new(coalitions: Vec<Coalition>, n_agents: usize, kappa: usize) -> Result<Self> {
        let mut sorted = coalitions;
        sorted.sort();
        let mut membership = vec![usize::MAX; n_agents];
        for (idx, c) in sorted.iter().enumerate() {
            if c.len() > kappa {
                return Err(Error::InvalidPartition(format!(
                    "coalition of size {} exceeds the cap {kappa}",
                    c.len()
                )));
            }
            for &m in c.members() {
                if m >= n_agents {
                    return Err(Error::InvalidPartition(format!(
                        "agent index {m} out of range for {n_agents} agents"
                    )));
                }
                if membership[m] != usize::MAX {
                    return Err(Error::InvalidPartition(format!(
                        "agent index {m} appears in more than one coalition"
                    )));
                }
                membership[m] = idx;
            }
        }
        if let Some(missing) = membership.iter().position(|&x| x == usize::MAX) {
            return Err(Error::InvalidPartition(format!(
                "agent index {missing} is absent from the partition"
            )));
        }
        Ok(Partition {
            coalitions: sorted,
            membership,
            kappa,
        })
    }

    pub fn singletons(n_agents: usize, kappa: usize) -> Self {
        Partition {
            coalitions: (0..n_agents).map(Coalition::singleton).collect(),
            membership: (0..n_agents).collect(),
            kappa,
        }
    }

    /// Builds a partition from raw member lists (used by enumeration and the
    /// solvers, which guarantee validity by construction).
    pub(crate) fn from_blocks_unchecked(blocks: &[Vec<usize>], n_agents: usize, kappa: usize) -> Self {
        let coalitions: Vec<Coalition> = blocks
            .iter()
            .filter(|b| !b.is_empty())
            .map(|b| Coalition::new(b.clone()).expect("solver produced an invalid coalition"))
            .collect();
        Partition::new(coalitions, n_agents, kappa).expect("solver produced an invalid partition")
    }

    pub fn coalitions(&self) -> &[Coalition] {
        &self.coalitions
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    pub fn agent_count(&self) -> usize {
        self.membership.len()
    }

    pub fn coalition_index_of(&self, agent: usize) -> usize {
        self.membership[agent]
    }

    pub fn coalition_of(&self, agent: usize) -> &Coalition {
        &self.coalitions[self.membership[agent]]
    }

    /// The partition after `agent` leaves its coalition and joins the
    /// coalition at `target` (an index into `coalitions()`). An emptied
    /// source coalition is dropped.
    pub fn move_agent(&self, agent: usize, target: usize) -> Partition {
        let source = self.membership[agent];
        debug_assert_ne!(source, target);
        let mut blocks: Vec<Vec<usize>> = self
            .coalitions
            .iter()
            .map(|c| c.members().to_vec())
            .collect();
        blocks[source].retain(|&m| m != agent);
        blocks[target].push(agent);
        Partition::from_blocks_unchecked(&blocks, self.agent_count(), self.kappa)
    }

    /// The partition after `agent` splits off into a fresh singleton.
    pub fn split_off(&self, agent: usize) -> Partition {
        let source = self.membership[agent];
        let mut blocks: Vec<Vec<usize>> = self
            .coalitions
            .iter()
            .map(|c| c.members().to_vec())
            .collect();
        blocks[source].retain(|&m| m != agent);
        blocks.push(vec![agent]);
        Partition::from_blocks_unchecked(&blocks, self.agent_count(), self.kappa)
    }

    /// The deviation partition: `c` forms, every other coalition keeps its
    /// remaining members, and emptied residues disappear.
    pub fn induce(&self, c: &Coalition) -> Partition {
        let mut blocks: Vec<Vec<usize>> = self
            .coalitions
            .iter()
            .map(|d| d.members().iter().copied().filter(|m| !c.contains(*m)).collect())
            .collect();
        blocks.push(c.members().to_vec());
        Partition::from_blocks_unchecked(&blocks, self.agent_count(), self.kappa)
    }

    /// Per-agent utilities under `g` (each agent gets its coalition's value).
    pub fn agent_utilities<G: Game>(&self, g: &G) -> Vec<f64> {
        let values: Vec<f64> = self.coalitions.iter().map(|c| g.utility(c)).collect();
        self.membership.iter().map(|&ci| values[ci]).collect()
    }

    pub fn to_id_lists<G: Game>(&self, g: &G) -> Vec<Vec<String>> {
        self.coalitions.iter().map(|c| c.ids(g)).collect()
    }

    pub fn to_json<G: Game>(&self, g: &G) -> String {
        let dto = PartitionDto {
            coalitions: self.to_id_lists(g),
        };
        serde_json::to_string_pretty(&dto).expect("partition serialization cannot fail")
    }

    /// Parses `{"coalitions": [["a1","a2"], ...]}` against the game's agent
    /// list, validating coverage and the size cap.
    pub fn from_json<G: Game>(text: &str, g: &G) -> Result<Partition> {
        let dto: PartitionDto =
            serde_json::from_str(text).map_err(|e| Error::parse_json("partition", &e))?;
        let mut coalitions = Vec::with_capacity(dto.coalitions.len());
        for ids in &dto.coalitions {
            let mut members = Vec::with_capacity(ids.len());
            for id in ids {
                members.push(g.agent_index(id)?);
            }
            coalitions.push(Coalition::new(members).map_err(|e| match e {
                Error::InvalidArgument(msg) => Error::InvalidPartition(msg),
                other => other,
            })?);
        }
        Partition::new(coalitions, g.agent_count(), g.kappa())
    }
}

#[derive(serde::Serialize, serde::Deserialize)]
struct PartitionDto {
    coalitions: Vec<Vec<String>>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: &[usize]) -> Coalition {
        Coalition::new(v.to_vec()).unwrap()
    }

    #[test]
    fn coalition_canonicalizes_and_rejects_duplicates() {
        assert_eq!(c(&[2, 0, 1]).members(), &[0, 1, 2]);
        assert!(Coalition::new(vec![]).is_err());
        assert!(Coalition::new(vec![1, 1]).is_err());
    }

    #[test]
    fn partition_canonical_order_is_by_smallest_member() {
        let p = Partition::new(vec![c(&[3, 4]), c(&[0, 2]), c(&[1])], 5, 2).unwrap();
        let blocks: Vec<&[usize]> = p.coalitions().iter().map(|x| x.members()).collect();
        assert_eq!(blocks, vec![&[0, 2][..], &[1][..], &[3, 4][..]]);
        assert_eq!(p.coalition_of(2).members(), &[0, 2]);
    }

    #[test]
    fn partition_rejects_overlap_gap_and_oversize() {
        assert!(Partition::new(vec![c(&[0, 1]), c(&[1, 2])], 3, 2).is_err());
        assert!(Partition::new(vec![c(&[0, 1])], 3, 2).is_err());
        assert!(Partition::new(vec![c(&[0, 1, 2])], 3, 2).is_err());
        assert!(Partition::new(vec![c(&[0, 3])], 3, 2).is_err());
    }

    #[test]
    fn move_agent_drops_empty_source() {
        let p = Partition::new(vec![c(&[0]), c(&[1, 2])], 3, 3).unwrap();
        let q = p.move_agent(0, 1);
        assert_eq!(q.coalitions().len(), 1);
        assert_eq!(q.coalition_of(0).members(), &[0, 1, 2]);
    }

    #[test]
    fn induce_keeps_residues() {
        let p = Partition::new(vec![c(&[0, 1]), c(&[2, 3])], 4, 2).unwrap();
        let q = p.induce(&c(&[1, 2]));
        let blocks: Vec<&[usize]> = q.coalitions().iter().map(|x| x.members()).collect();
        assert_eq!(blocks, vec![&[0][..], &[1, 2][..], &[3][..]]);
    }
}
