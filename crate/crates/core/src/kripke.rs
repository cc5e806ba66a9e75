//! Finite Kripke models and teams.
//!
//! Worlds are identified by name but addressed by index into the model's
//! declared world order; a [`Team`] is a bitset over those indices. Teams are
//! plain values: they carry no reference to a model and are validated against
//! one at each operation.

use std::collections::HashMap;
use std::fmt;

use smallvec::SmallVec;
use thiserror::Error;

use crate::formulas::{is_identifier, PropSymbol};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("duplicate world id `{0}`")]
    DuplicateWorld(String),
    #[error("duplicate proposition `{0}`")]
    DuplicateProp(String),
    #[error("unknown world `{0}`")]
    UnknownWorld(String),
    #[error("unknown proposition `{0}`")]
    UnknownProp(String),
    #[error("world index {index} out of range (model has {count} worlds)")]
    WorldOutOfRange { index: usize, count: usize },
    #[error("team is not a subset of the model's worlds")]
    TeamNotInModel,
    #[error("malformed model document: {0}")]
    Malformed(String),
}

/// A set of worlds of one model, stored as a bitset over world indices.
///
/// Invariant: no trailing zero words, so equal sets compare equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Team {
    words: SmallVec<[u64; 2]>,
}

impl Team {
    pub fn empty() -> Team {
        Team::default()
    }

    pub fn singleton(index: usize) -> Team {
        let mut t = Team::empty();
        t.insert(index);
        t
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Team {
        let mut t = Team::empty();
        for i in indices {
            t.insert(i);
        }
        t
    }

    /// The full team `{0, .., count-1}`.
    pub fn full(count: usize) -> Team {
        let mut t = Team::empty();
        for i in 0..count {
            t.insert(i);
        }
        t
    }

    fn trim(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    pub fn insert(&mut self, index: usize) {
        let word = index / 64;
        if self.words.len() <= word {
            self.words.resize(word + 1, 0);
        }
        self.words[word] |= 1u64 << (index % 64);
    }

    pub fn remove(&mut self, index: usize) {
        let word = index / 64;
        if word < self.words.len() {
            self.words[word] &= !(1u64 << (index % 64));
            self.trim();
        }
    }

    pub fn contains(&self, index: usize) -> bool {
        let word = index / 64;
        word < self.words.len() && self.words[word] & (1u64 << (index % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn union(&self, other: &Team) -> Team {
        let (long, short) = if self.words.len() >= other.words.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut words = long.words.clone();
        for (i, w) in short.words.iter().enumerate() {
            words[i] |= w;
        }
        Team { words }
    }

    pub fn intersection(&self, other: &Team) -> Team {
        let n = self.words.len().min(other.words.len());
        let mut words: SmallVec<[u64; 2]> = SmallVec::with_capacity(n);
        for i in 0..n {
            words.push(self.words[i] & other.words[i]);
        }
        let mut t = Team { words };
        t.trim();
        t
    }

    pub fn difference(&self, other: &Team) -> Team {
        let mut words = self.words.clone();
        for (i, w) in other.words.iter().enumerate().take(words.len()) {
            words[i] &= !w;
        }
        let mut t = Team { words };
        t.trim();
        t
    }

    pub fn without(&self, index: usize) -> Team {
        let mut t = self.clone();
        t.remove(index);
        t
    }

    pub fn is_subset(&self, other: &Team) -> bool {
        if self.words.len() > other.words.len() {
            return false;
        }
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &Team) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .any(|(a, b)| a & b != 0)
    }

    /// Member indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let tz = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + tz)
            })
        })
    }

    pub fn max_index(&self) -> Option<usize> {
        let last = self.words.last()?;
        Some((self.words.len() - 1) * 64 + 63 - last.leading_zeros() as usize)
    }

    /// All subsets of this team, the empty team first. Order is fixed:
    /// subset `j` keeps exactly the members whose rank has bit set in `j`.
    pub fn subsets(&self) -> impl Iterator<Item = Team> {
        let members: Vec<usize> = self.iter().collect();
        assert!(members.len() < 64, "team too large for subset enumeration");
        let total: u64 = 1u64 << members.len();
        (0..total).map(move |j| {
            Team::from_indices(
                members
                    .iter()
                    .enumerate()
                    .filter(|(rank, _)| j >> rank & 1 == 1)
                    .map(|(_, &m)| m),
            )
        })
    }

    /// Number of subsets, for budget checks before enumerating.
    pub fn subset_count(&self) -> u64 {
        1u64.checked_shl(self.len() as u32).unwrap_or(u64::MAX)
    }

    /// Dense key when the team fits one word: the raw bit pattern.
    pub(crate) fn small_key(&self) -> Option<u64> {
        match self.words.len() {
            0 => Some(0),
            1 => Some(self.words[0]),
            _ => None,
        }
    }

    /// Names of members under a model's world order.
    pub fn names<'a>(&self, model: &'a KripkeModel) -> Vec<&'a str> {
        self.iter().map(|i| model.world_name(i)).collect()
    }
}

impl fmt::Debug for Team {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A finite Kripke model: ordered proposition set, ordered worlds, an
/// accessibility relation, and a valuation defined exactly on the declared
/// propositions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KripkeModel {
    props: Vec<PropSymbol>,
    worlds: Vec<String>,
    succ: Vec<Team>,
    pred: Vec<Team>,
    valuation: Vec<Team>,
    world_lookup: HashMap<String, usize>,
    prop_lookup: HashMap<String, usize>,
}

impl KripkeModel {
    /// Builds a model from names. Edges and valuations refer to declared
    /// worlds; referential integrity is enforced.
    pub fn new(
        props: Vec<PropSymbol>,
        worlds: Vec<String>,
        edges: &[(String, String)],
        valuation: &[(String, Vec<String>)],
    ) -> Result<KripkeModel, ModelError> {
        let mut world_lookup = HashMap::with_capacity(worlds.len());
        for (i, w) in worlds.iter().enumerate() {
            if world_lookup.insert(w.clone(), i).is_some() {
                return Err(ModelError::DuplicateWorld(w.clone()));
            }
        }
        let mut prop_lookup = HashMap::with_capacity(props.len());
        for (i, p) in props.iter().enumerate() {
            if prop_lookup.insert(p.name().to_string(), i).is_some() {
                return Err(ModelError::DuplicateProp(p.name().to_string()));
            }
        }
        let n = worlds.len();
        let mut succ = vec![Team::empty(); n];
        let mut pred = vec![Team::empty(); n];
        for (from, to) in edges {
            let fi = *world_lookup
                .get(from)
                .ok_or_else(|| ModelError::UnknownWorld(from.clone()))?;
            let ti = *world_lookup
                .get(to)
                .ok_or_else(|| ModelError::UnknownWorld(to.clone()))?;
            succ[fi].insert(ti);
            pred[ti].insert(fi);
        }
        let mut val = vec![Team::empty(); props.len()];
        for (prop, members) in valuation {
            let pi = *prop_lookup
                .get(prop)
                .ok_or_else(|| ModelError::UnknownProp(prop.clone()))?;
            for m in members {
                let mi = *world_lookup
                    .get(m)
                    .ok_or_else(|| ModelError::UnknownWorld(m.clone()))?;
                val[pi].insert(mi);
            }
        }
        Ok(KripkeModel {
            props,
            worlds,
            succ,
            pred,
            valuation: val,
            world_lookup,
            prop_lookup,
        })
    }

    pub fn world_count(&self) -> usize {
        self.worlds.len()
    }

    pub fn worlds(&self) -> &[String] {
        &self.worlds
    }

    pub fn props(&self) -> &[PropSymbol] {
        &self.props
    }

    pub fn world_name(&self, index: usize) -> &str {
        &self.worlds[index]
    }

    pub fn world_index(&self, name: &str) -> Option<usize> {
        self.world_lookup.get(name).copied()
    }

    pub fn prop_index(&self, name: &str) -> Option<usize> {
        self.prop_lookup.get(name).copied()
    }

    /// Worlds where proposition `prop_index` holds.
    pub fn prop_worlds(&self, prop_index: usize) -> &Team {
        &self.valuation[prop_index]
    }

    pub fn successors(&self, world: usize) -> &Team {
        &self.succ[world]
    }

    pub fn predecessors(&self, world: usize) -> &Team {
        &self.pred[world]
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.succ[from].contains(to)
    }

    /// Edges in (from, to) index order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.world_count())
            .flat_map(move |from| self.succ[from].iter().map(move |to| (from, to)))
    }

    pub fn full_team(&self) -> Team {
        Team::full(self.world_count())
    }

    /// The whole relation is the identity on the world set.
    pub fn relation_is_identity(&self) -> bool {
        (0..self.world_count()).all(|w| self.succ[w] == Team::singleton(w))
    }

    pub fn check_world(&self, index: usize) -> Result<(), ModelError> {
        if index < self.world_count() {
            Ok(())
        } else {
            Err(ModelError::WorldOutOfRange {
                index,
                count: self.world_count(),
            })
        }
    }

    pub fn check_team(&self, team: &Team) -> Result<(), ModelError> {
        match team.max_index() {
            Some(max) if max >= self.world_count() => Err(ModelError::TeamNotInModel),
            _ => Ok(()),
        }
    }

    /// Resolves world names into a team.
    pub fn team_from_names<S: AsRef<str>>(&self, names: &[S]) -> Result<Team, ModelError> {
        let mut t = Team::empty();
        for name in names {
            let i = self
                .world_index(name.as_ref())
                .ok_or_else(|| ModelError::UnknownWorld(name.as_ref().to_string()))?;
            t.insert(i);
        }
        Ok(t)
    }

    /// All teams of this model, ascending by bit pattern.
    pub fn teams(&self) -> impl Iterator<Item = Team> {
        self.full_team().subsets()
    }
}

/// Image `R[T]` of a team under the accessibility relation.
pub fn image(model: &KripkeModel, team: &Team) -> Result<Team, ModelError> {
    model.check_team(team)?;
    let mut out = Team::empty();
    for w in team.iter() {
        out = out.union(&model.succ[w]);
    }
    Ok(out)
}

/// Preimage `R^{-1}[T]`.
pub fn preimage(model: &KripkeModel, team: &Team) -> Result<Team, ModelError> {
    model.check_team(team)?;
    let mut out = Team::empty();
    for w in team.iter() {
        out = out.union(&model.pred[w]);
    }
    Ok(out)
}

/// The team step relation `T[R]S`: `S ⊆ R[T]` and `T ⊆ R^{-1}[S]`.
pub fn step_rel(model: &KripkeModel, t: &Team, s: &Team) -> Result<bool, ModelError> {
    model.check_team(t)?;
    model.check_team(s)?;
    Ok(s.is_subset(&image(model, t)?) && t.is_subset(&preimage(model, s)?))
}

/// Every model with up to `max_worlds` canonically named worlds `w0..` over
/// the given propositions, each produced exactly once. Valuations and edge
/// sets are swept exhaustively; no quotient by isomorphism is taken.
pub fn enumerate_models(
    max_worlds: usize,
    props: &[PropSymbol],
) -> impl Iterator<Item = KripkeModel> + '_ {
    (0..=max_worlds).flat_map(move |n| enumerate_models_of_size(n, props))
}

fn enumerate_models_of_size(
    n: usize,
    props: &[PropSymbol],
) -> impl Iterator<Item = KripkeModel> + '_ {
    let edge_bits = n * n;
    let val_bits = n * props.len();
    assert!(
        edge_bits < 63 && val_bits < 63,
        "enumeration domain too large"
    );
    let worlds: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
    (0..1u64 << edge_bits).flat_map(move |edge_mask| {
        let worlds = worlds.clone();
        (0..1u64 << val_bits).map(move |val_mask| {
            build_model(n, props, &worlds, edge_mask, val_mask)
        })
    })
}

fn build_model(
    n: usize,
    props: &[PropSymbol],
    worlds: &[String],
    edge_mask: u64,
    val_mask: u64,
) -> KripkeModel {
    let mut succ = vec![Team::empty(); n];
    let mut pred = vec![Team::empty(); n];
    for (i, row) in succ.iter_mut().enumerate() {
        for j in 0..n {
            if edge_mask >> (i * n + j) & 1 == 1 {
                row.insert(j);
            }
        }
    }
    for (j, row) in pred.iter_mut().enumerate() {
        for i in 0..n {
            if edge_mask >> (i * n + j) & 1 == 1 {
                row.insert(i);
            }
        }
    }
    let mut valuation = vec![Team::empty(); props.len()];
    for (pi, val) in valuation.iter_mut().enumerate() {
        for w in 0..n {
            if val_mask >> (pi * n + w) & 1 == 1 {
                val.insert(w);
            }
        }
    }
    let world_lookup = worlds
        .iter()
        .enumerate()
        .map(|(i, w)| (w.clone(), i))
        .collect();
    let prop_lookup = props
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name().to_string(), i))
        .collect();
    KripkeModel {
        props: props.to_vec(),
        worlds: worlds.to_vec(),
        succ,
        pred,
        valuation,
        world_lookup,
        prop_lookup,
    }
}

// --- model document (JSON) ---

/// Parses a model document. Returns the model and its named teams in
/// document order.
pub fn load_model(text: &str) -> Result<(KripkeModel, Vec<(String, Team)>), ModelError> {
    let doc: serde_json::Value =
        serde_json::from_str(text).map_err(|e| ModelError::Malformed(e.to_string()))?;
    let obj = doc
        .as_object()
        .ok_or_else(|| ModelError::Malformed("expected a JSON object".into()))?;
    for key in obj.keys() {
        if !matches!(key.as_str(), "props" | "worlds" | "edges" | "valuation" | "teams") {
            return Err(ModelError::Malformed(format!("unknown field `{key}`")));
        }
    }

    let props_raw = string_array(obj.get("props"), "props")?;
    let mut props = Vec::with_capacity(props_raw.len());
    for name in &props_raw {
        if !is_identifier(name) {
            return Err(ModelError::Malformed(format!(
                "`{name}` is not a valid proposition name"
            )));
        }
        props.push(PropSymbol::new(name.clone()).unwrap());
    }
    let worlds = string_array(obj.get("worlds"), "worlds")?;

    let mut edges = Vec::new();
    if let Some(v) = obj.get("edges") {
        let arr = v
            .as_array()
            .ok_or_else(|| ModelError::Malformed("`edges` must be an array".into()))?;
        for e in arr {
            let pair = e
                .as_array()
                .filter(|p| p.len() == 2)
                .ok_or_else(|| ModelError::Malformed("each edge must be a pair".into()))?;
            let from = pair[0]
                .as_str()
                .ok_or_else(|| ModelError::Malformed("edge endpoints must be strings".into()))?;
            let to = pair[1]
                .as_str()
                .ok_or_else(|| ModelError::Malformed("edge endpoints must be strings".into()))?;
            edges.push((from.to_string(), to.to_string()));
        }
    }

    let mut valuation = Vec::new();
    if let Some(v) = obj.get("valuation") {
        let map = v
            .as_object()
            .ok_or_else(|| ModelError::Malformed("`valuation` must be an object".into()))?;
        for (prop, members) in map {
            let members = members
                .as_array()
                .ok_or_else(|| ModelError::Malformed("valuation entries must be arrays".into()))?
                .iter()
                .map(|m| {
                    m.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| ModelError::Malformed("world ids must be strings".into()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            valuation.push((prop.clone(), members));
        }
    }

    let model = KripkeModel::new(props, worlds, &edges, &valuation)?;

    let mut teams = Vec::new();
    if let Some(v) = obj.get("teams") {
        let map = v
            .as_object()
            .ok_or_else(|| ModelError::Malformed("`teams` must be an object".into()))?;
        for (name, members) in map {
            let members = members
                .as_array()
                .ok_or_else(|| ModelError::Malformed("team entries must be arrays".into()))?
                .iter()
                .map(|m| {
                    m.as_str()
                        .map(str::to_string)
                        .ok_or_else(|| ModelError::Malformed("world ids must be strings".into()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            teams.push((name.clone(), model.team_from_names(&members)?));
        }
    }

    Ok((model, teams))
}

fn string_array(value: Option<&serde_json::Value>, field: &str) -> Result<Vec<String>, ModelError> {
    let v = value.ok_or_else(|| ModelError::Malformed(format!("missing field `{field}`")))?;
    let arr = v
        .as_array()
        .ok_or_else(|| ModelError::Malformed(format!("`{field}` must be an array")))?;
    arr.iter()
        .map(|s| {
            s.as_str()
                .map(str::to_string)
                .ok_or_else(|| ModelError::Malformed(format!("`{field}` entries must be strings")))
        })
        .collect()
}

/// Serializes a model with named teams. The output is canonical: every
/// declared proposition appears in the valuation (possibly with an empty
/// list), teams are sorted by name, and members follow world order.
pub fn save_model(model: &KripkeModel, teams: &[(String, Team)]) -> String {
    use serde_json::{json, Map, Value};

    let mut root = Map::new();
    root.insert(
        "props".into(),
        json!(model.props().iter().map(|p| p.name()).collect::<Vec<_>>()),
    );
    root.insert("worlds".into(), json!(model.worlds()));
    let edges: Vec<Value> = model
        .edges()
        .map(|(f, t)| json!([model.world_name(f), model.world_name(t)]))
        .collect();
    root.insert("edges".into(), Value::Array(edges));
    let mut valuation = Map::new();
    for (pi, p) in model.props().iter().enumerate() {
        valuation.insert(p.name().into(), json!(model.prop_worlds(pi).names(model)));
    }
    root.insert("valuation".into(), Value::Object(valuation));
    let mut sorted: Vec<&(String, Team)> = teams.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut team_map = Map::new();
    for (name, team) in sorted {
        team_map.insert(name.clone(), json!(team.names(model)));
    }
    root.insert("teams".into(), Value::Object(team_map));
    let mut out = serde_json::to_string_pretty(&Value::Object(root)).expect("serializable");
    out.push('\n');
    out
}
