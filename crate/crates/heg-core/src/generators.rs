//! Instance constructors: reductions from coverage and covering problems,
//! graph-based instances, and seeded random families.

use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::enumerate::for_each_subset_up_to;
use crate::error::{Error, Result};
use crate::game::Game;
use crate::instance::{GeneratorMeta, Instance};
use crate::partition::Partition;

pub const MAX_COVERAGE_TAG: &str = "max-coverage";
pub const SET_COVER_TAG: &str = "set-cover";
pub const GRAPH_TAG: &str = "hvcg";

/// A family of subsets of {1..m} with a selection budget k.
#[derive(Clone, Debug)]
pub struct SetSystem {
    universe_size: usize,
    sets: Vec<Vec<usize>>,
    k: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SetSystemDto {
    m: usize,
    sets: Vec<Vec<usize>>,
    k: usize,
}

impl SetSystem {
    pub fn new(universe_size: usize, sets: Vec<Vec<usize>>, k: usize) -> Result<Self> {
        if universe_size == 0 {
            return Err(Error::InvalidArgument("universe must not be empty".into()));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("budget k must be positive".into()));
        }
        let mut normalized = Vec::with_capacity(sets.len());
        for (i, set) in sets.into_iter().enumerate() {
            let mut s = set;
            s.sort_unstable();
            s.dedup();
            if let Some(&bad) = s.iter().find(|&&e| e == 0 || e > universe_size) {
                return Err(Error::InvalidArgument(format!(
                    "set {} contains element {bad}, outside 1..={universe_size}",
                    i + 1
                )));
            }
            normalized.push(s);
        }
        Ok(SetSystem {
            universe_size,
            sets: normalized,
            k,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: SetSystemDto =
            serde_json::from_str(text).map_err(|e| Error::parse_json("set system", &e))?;
        SetSystem::new(dto.m, dto.sets, dto.k)
    }

    pub fn universe_size(&self) -> usize {
        self.universe_size
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of universe elements covered by the chosen sets (by index).
    pub fn coverage_of(&self, chosen: &[usize]) -> usize {
        let mut hit = vec![false; self.universe_size + 1];
        for &i in chosen {
            for &e in &self.sets[i] {
                hit[e] = true;
            }
        }
        hit.iter().filter(|&&h| h).count()
    }

    /// Size of the smallest sub-family covering the whole universe, by
    /// exhaustive search; None when even the full family falls short.
    /// Intended for desk-scale families.
    pub fn min_cover_size(&self) -> Option<usize> {
        let pool: Vec<usize> = (0..self.sets.len()).collect();
        let mut found = None;
        let _ = for_each_subset_up_to(&pool, self.sets.len(), |chosen| {
            if self.coverage_of(chosen) == self.universe_size {
                found = Some(chosen.len());
                ControlFlow::Break(())
            } else {
                ControlFlow::Continue(())
            }
        });
        found
    }

    /// Can the universe be covered within the budget k?
    pub fn has_cover_within_budget(&self) -> bool {
        self.min_cover_size().is_some_and(|c| c <= self.k)
    }
}

fn element_skills(m: usize) -> Vec<String> {
    (1..=m).map(|e| format!("u{e}")).collect()
}

fn membership_row(set: &[usize], m: usize) -> Vec<f64> {
    let mut row = vec![0.0; m];
    for &e in set {
        row[e - 1] = 1.0;
    }
    row
}

/// One agent per set, one skill per universe element, expertise 1 where the
/// set contains the element. A coalition's joint utility equals the size of
/// the union of its sets. The size cap is the selection budget, clamped to
/// the number of sets.
pub fn from_max_coverage(ss: &SetSystem) -> Result<Instance> {
    let n = ss.sets.len();
    let m = ss.universe_size;
    let agents: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let rows: Vec<Vec<f64>> = ss.sets.iter().map(|s| membership_row(s, m)).collect();
    let instance = Instance::new(agents, element_skills(m), rows, ss.k.min(n))?;
    Ok(instance.with_meta(GeneratorMeta {
        generator: MAX_COVERAGE_TAG.into(),
        universe_size: Some(m),
        family_size: Some(n),
        cover_bound: Some(ss.k),
        padding_agents: Vec::new(),
    }))
}

/// The coverage construction plus x = ceil((n-k)/(k-1)) padding agents with
/// full expertise on every skill. Padding inflates the population so that
/// every feasible partition has more coalitions than padding agents, which
/// ties perfect partitions to exact covers of size k.
pub fn from_set_cover(ss: &SetSystem) -> Result<Instance> {
    let n = ss.sets.len();
    let m = ss.universe_size;
    let k = ss.k;
    if k < 2 {
        return Err(Error::InvalidArgument(format!(
            "padded construction needs k >= 2, got {k}"
        )));
    }
    if n < k {
        return Err(Error::InvalidArgument(format!(
            "family of {n} sets is smaller than the budget {k}"
        )));
    }
    let x = (n - k).div_ceil(k - 1);
    let mut agents: Vec<String> = (1..=n).map(|i| format!("a{i}")).collect();
    let mut rows: Vec<Vec<f64>> = ss.sets.iter().map(|s| membership_row(s, m)).collect();
    let padding: Vec<String> = (1..=x).map(|i| format!("x{i}")).collect();
    for id in &padding {
        agents.push(id.clone());
        rows.push(vec![1.0; m]);
    }
    let instance = Instance::new(agents, element_skills(m), rows, k)?;
    Ok(instance.with_meta(GeneratorMeta {
        generator: SET_COVER_TAG.into(),
        universe_size: Some(m),
        family_size: Some(n),
        cover_bound: Some(k),
        padding_agents: padding,
    }))
}

/// The adversarial partition for padded covering instances: each padding
/// agent anchors one full coalition, and the leftover original agents form a
/// coalition C whose value falls short of the universe size. Candidate C
/// memberships are tried in canonical order; None when every candidate
/// reaches full coverage.
pub fn hardness_witness_partition(g: &Instance) -> Result<Option<Partition>> {
    let meta = g.meta().ok_or_else(|| {
        Error::InvalidArgument("instance carries no generator metadata".into())
    })?;
    if meta.generator != SET_COVER_TAG {
        return Err(Error::InvalidArgument(format!(
            "witness construction needs a {SET_COVER_TAG} instance, got {:?}",
            meta.generator
        )));
    }
    let m = meta
        .universe_size
        .ok_or_else(|| Error::InvalidArgument("metadata lacks the universe size".into()))?;
    let k = g.kappa();
    let padding: Vec<usize> = meta
        .padding_agents
        .iter()
        .map(|id| g.agent_index(id))
        .collect::<Result<_>>()?;
    let originals: Vec<usize> = (0..g.agent_count())
        .filter(|i| !padding.contains(i))
        .collect();
    let x = padding.len();
    let n = originals.len();
    if x == 0 {
        // No padding: the only shape is the single coalition of all originals.
        let all = originals.clone();
        if g.joint_utility(&all) < m as f64 {
            return Ok(Some(Partition::from_blocks_unchecked(
                &[all],
                g.agent_count(),
                k,
            )));
        }
        return Ok(None);
    }
    let leftover = n - x * (k - 1);
    if leftover == 0 || leftover > k {
        return Err(Error::InvalidArgument(format!(
            "metadata inconsistent with the padded shape (leftover {leftover})"
        )));
    }
    let mut witness = None;
    let _ = for_each_subset_up_to(&originals, leftover, |c| {
        if c.len() < leftover {
            return ControlFlow::Continue(());
        }
        if g.joint_utility(c) < m as f64 {
            witness = Some(c.to_vec());
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    let Some(c) = witness else {
        return Ok(None);
    };
    let rest: Vec<usize> = originals.iter().copied().filter(|i| !c.contains(i)).collect();
    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(x + 1);
    for (i, chunk) in rest.chunks(k - 1).enumerate() {
        let mut block = chunk.to_vec();
        block.push(padding[i]);
        blocks.push(block);
    }
    blocks.push(c);
    Ok(Some(Partition::from_blocks_unchecked(
        &blocks,
        g.agent_count(),
        k,
    )))
}

/// An undirected graph with non-negative edge weights and a coalition cap.
#[derive(Clone, Debug)]
pub struct WeightedGraph {
    vertices: Vec<String>,
    /// (u, v, weight) with u < v
    edges: Vec<(usize, usize, f64)>,
    kappa: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDto {
    vertices: Vec<String>,
    edges: Vec<(String, String, f64)>,
    kappa: usize,
}

impl WeightedGraph {
    pub fn new(
        vertices: Vec<String>,
        edges: Vec<(String, String, f64)>,
        kappa: usize,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidArgument("graph has no vertices".into()));
        }
        for (i, v) in vertices.iter().enumerate() {
            if vertices[..i].contains(v) {
                return Err(Error::InvalidArgument(format!("duplicate vertex id {v:?}")));
            }
        }
        if kappa == 0 || kappa > vertices.len() {
            return Err(Error::InvalidArgument(format!(
                "kappa must lie in 1..={}, got {kappa}",
                vertices.len()
            )));
        }
        let index = |id: &str| -> Result<usize> {
            vertices
                .iter()
                .position(|v| v == id)
                .ok_or_else(|| Error::InvalidReference(format!("unknown vertex id {id:?}")))
        };
        let mut resolved = Vec::with_capacity(edges.len());
        for (a, b, w) in &edges {
            let (mut u, mut v) = (index(a)?, index(b)?);
            if u == v {
                return Err(Error::InvalidArgument(format!("self-loop at {a:?}")));
            }
            if u > v {
                std::mem::swap(&mut u, &mut v);
            }
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::InvalidArgument(format!(
                    "edge {a:?}-{b:?} must have a finite non-negative weight, got {w}"
                )));
            }
            if resolved.iter().any(|&(x, y, _)| (x, y) == (u, v)) {
                return Err(Error::InvalidArgument(format!(
                    "duplicate edge between {a:?} and {b:?}"
                )));
            }
            resolved.push((u, v, *w));
        }
        Ok(WeightedGraph {
            vertices,
            edges: resolved,
            kappa,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let dto: GraphDto =
            serde_json::from_str(text).map_err(|e| Error::parse_json("graph", &e))?;
        WeightedGraph::new(dto.vertices, dto.edges, dto.kappa)
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[(usize, usize, f64)] {
        &self.edges
    }

    pub fn kappa(&self) -> usize {
        self.kappa
    }

    /// Total weight of edges with at least one endpoint among `members`,
    /// summed directly over the edge list.
    pub fn incident_weight(&self, members: &[usize]) -> f64 {
        self.edges
            .iter()
            .filter(|(u, v, _)| members.contains(u) || members.contains(v))
            .map(|(_, _, w)| w)
            .sum()
    }
}

/// One agent per vertex, one skill per edge; expertise equals the edge
/// weight on incident edges. A coalition's joint utility is then the total
/// weight of edges it touches (the per-skill maximum stops endpoints from
/// double counting).
pub fn from_graph(wg: &WeightedGraph) -> Result<Instance> {
    let skills: Vec<String> = wg
        .edges
        .iter()
        .map(|&(u, v, _)| format!("{}~{}", wg.vertices[u], wg.vertices[v]))
        .collect();
    let rows: Vec<Vec<f64>> = (0..wg.vertices.len())
        .map(|a| {
            wg.edges
                .iter()
                .map(|&(u, v, w)| if u == a || v == a { w } else { 0.0 })
                .collect()
        })
        .collect();
    let instance = Instance::new(wg.vertices.clone(), skills, rows, wg.kappa)?;
    Ok(instance.with_meta(GeneratorMeta {
        generator: GRAPH_TAG.into(),
        universe_size: None,
        family_size: Some(wg.edges.len()),
        cover_bound: None,
        padding_agents: Vec::new(),
    }))
}

/// Parameters for seeded random instances. With `beta` set, levels are
/// integers drawn from 1..=beta; otherwise reals from (0, 1]. `density` is
/// the probability that an entry is non-zero.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomParams {
    pub agents: usize,
    pub skills: usize,
    pub kappa: usize,
    #[serde(default)]
    pub beta: Option<u64>,
    pub density: f64,
}

impl RandomParams {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::parse_json("random parameters", &e))
    }
}

pub fn random_instance(params: &RandomParams, seed: u64) -> Result<Instance> {
    if params.agents == 0 {
        return Err(Error::InvalidArgument("need at least one agent".into()));
    }
    if params.skills == 0 {
        return Err(Error::InvalidArgument("need at least one skill".into()));
    }
    if params.kappa == 0 || params.kappa > params.agents {
        return Err(Error::InvalidArgument(format!(
            "kappa must lie in 1..={}, got {}",
            params.agents, params.kappa
        )));
    }
    if !(0.0..=1.0).contains(&params.density) {
        return Err(Error::InvalidArgument(format!(
            "density must lie in [0, 1], got {}",
            params.density
        )));
    }
    if params.beta == Some(0) {
        return Err(Error::InvalidArgument("beta must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let agents: Vec<String> = (1..=params.agents).map(|i| format!("a{i}")).collect();
    let skills: Vec<String> = (1..=params.skills).map(|i| format!("s{i}")).collect();
    let rows: Vec<Vec<f64>> = (0..params.agents)
        .map(|_| {
            (0..params.skills)
                .map(|_| {
                    if rng.gen::<f64>() >= params.density {
                        0.0
                    } else {
                        match params.beta {
                            Some(beta) => rng.gen_range(1..=beta) as f64,
                            // 1 - [0,1) lands in (0,1]
                            None => 1.0 - rng.gen::<f64>(),
                        }
                    }
                })
                .collect()
        })
        .collect();
    Instance::new(agents, skills, rows, params.kappa)
}
