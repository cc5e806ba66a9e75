//! Team-semantics evaluation under lax semantics.
//!
//! Two modes are provided. `Reference` implements the team clauses
//! literally: disjunction searches all covers `T1 ∪ T2 = T` (overlap
//! allowed), diamond searches all successor teams `S` with `T[R]S`, `nab`
//! searches nonempty subteams, and box evaluates at `R[T]`. `Optimized`
//! exploits flatness of plain modal logic (pointwise truth tables) and
//! union closure of the extensions: every connective of the language
//! preserves unions, so each team has a unique maximal satisfying subteam
//! per subformula, computable by fixpoint pruning. Both modes must agree
//! everywhere; any divergence is a bug in the optimizer.
//!
//! Work is metered: a session charges one step per visited (position, team)
//! pair and per search-loop iteration, and fails with a budget error rather
//! than running away.
//!
//! Formulas can be [compiled](CompiledFormula) once and evaluated against
//! many models sharing the proposition vocabulary; sweeps over enumerated
//! model spaces reuse the lowered arena.

use std::collections::HashMap;
use std::sync::Arc;

use smallvec::SmallVec;
use thiserror::Error;

use crate::formulas::{Dialect, Formula};
use crate::kripke::{KripkeModel, ModelError, Team};

/// Evaluation strategy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalMode {
    /// Literal truth conditions; the ground truth.
    Reference,
    /// Flatness + maximal-subteam fixpoints; validated against `Reference`.
    Optimized,
}

/// Team-semantics flavour. Only lax semantics is implemented; requesting
/// strict semantics is an explicit error, never a silent approximation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Semantics {
    Lax,
    Strict,
}

#[derive(Clone, Copy, Debug)]
pub struct EvalConfig {
    pub mode: EvalMode,
    pub memo_enabled: bool,
    /// Cap on visited (position, team) pairs and search steps.
    pub max_steps: u64,
    pub semantics: Semantics,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            mode: EvalMode::Optimized,
            memo_enabled: true,
            max_steps: 10_000_000,
            semantics: Semantics::Lax,
        }
    }
}

impl EvalConfig {
    pub fn reference() -> Self {
        EvalConfig {
            mode: EvalMode::Reference,
            ..Default::default()
        }
    }

    pub fn optimized() -> Self {
        EvalConfig::default()
    }

    pub fn with_max_steps(mut self, max_steps: u64) -> Self {
        self.max_steps = max_steps;
        self
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EvalError {
    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("evaluation budget of {max_steps} steps exceeded")]
    BudgetExceeded { max_steps: u64 },
    #[error("operation requires a plain modal-logic formula")]
    NotPureMl,
    #[error("maximal subteams require a union-closed dialect; got {0} (use reference mode)")]
    NotUnionClosed(Dialect),
    #[error("strict semantics is not supported")]
    StrictUnsupported,
    #[error("malformed formula: {0}")]
    InvalidFormula(#[from] crate::formulas::FormulaError),
}

type NodeId = u32;

#[derive(Clone, PartialEq, Eq, Hash)]
enum NodeKind {
    Top,
    Bot,
    /// Index into the arena's proposition table.
    Prop(u32),
    NegProp(u32),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    NeDisj(NodeId, NodeId),
    Dia(NodeId),
    Box(NodeId),
    Nab(NodeId),
    Incl(Vec<NodeId>, Vec<NodeId>),
}

struct Node {
    kind: NodeKind,
    pure_ml: bool,
}

/// Copyable view of a node used while recursing; inclusion atoms keep their
/// payload in the arena.
#[derive(Clone, Copy)]
enum Shape {
    Top,
    Bot,
    Prop(u32),
    NegProp(u32),
    And(NodeId, NodeId),
    Or(NodeId, NodeId),
    NeDisj(NodeId, NodeId),
    Dia(NodeId),
    Box(NodeId),
    Nab(NodeId),
    Incl,
}

struct Arena {
    nodes: Vec<Node>,
    root: NodeId,
    interned: HashMap<NodeKind, NodeId>,
    prop_names: Vec<String>,
    prop_lookup: HashMap<String, u32>,
}

/// A formula lowered into a hash-consed arena, independent of any model.
/// Compile once, evaluate against many models that declare the same
/// proposition names.
#[derive(Clone)]
pub struct CompiledFormula {
    arena: Arc<Arena>,
}

impl CompiledFormula {
    pub fn compile(formula: &Formula) -> Result<CompiledFormula, EvalError> {
        let mut lowering = Lowering {
            nodes: Vec::new(),
            interned: HashMap::new(),
            prop_names: Vec::new(),
            prop_lookup: HashMap::new(),
        };
        let root = lowering.lower(formula)?;
        Ok(CompiledFormula {
            arena: Arc::new(Arena {
                nodes: lowering.nodes,
                root,
                interned: lowering.interned,
                prop_names: lowering.prop_names,
                prop_lookup: lowering.prop_lookup,
            }),
        })
    }
}

struct Lowering {
    nodes: Vec<Node>,
    interned: HashMap<NodeKind, NodeId>,
    prop_names: Vec<String>,
    prop_lookup: HashMap<String, u32>,
}

impl Lowering {
    fn lower(&mut self, f: &Formula) -> Result<NodeId, EvalError> {
        let (kind, pure_ml) = match f {
            Formula::Top => (NodeKind::Top, true),
            Formula::Bot => (NodeKind::Bot, true),
            Formula::Prop(p) => (NodeKind::Prop(self.prop(p.name())), true),
            Formula::NegProp(p) => (NodeKind::NegProp(self.prop(p.name())), true),
            Formula::And(a, b) => {
                let (a, b) = (self.lower(a)?, self.lower(b)?);
                (NodeKind::And(a, b), self.both_pure(a, b))
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.lower(a)?, self.lower(b)?);
                (NodeKind::Or(a, b), self.both_pure(a, b))
            }
            Formula::NeDisj(a, b) => {
                let (a, b) = (self.lower(a)?, self.lower(b)?);
                (NodeKind::NeDisj(a, b), false)
            }
            Formula::Dia(a) => {
                let a = self.lower(a)?;
                (NodeKind::Dia(a), self.nodes[a as usize].pure_ml)
            }
            Formula::Box(a) => {
                let a = self.lower(a)?;
                (NodeKind::Box(a), self.nodes[a as usize].pure_ml)
            }
            Formula::Nab(a) => {
                let a = self.lower(a)?;
                (NodeKind::Nab(a), false)
            }
            Formula::Incl(lhs, rhs) => {
                if lhs.is_empty() || rhs.is_empty() {
                    return Err(crate::formulas::FormulaError::InclEmpty.into());
                }
                if lhs.len() != rhs.len() {
                    return Err(crate::formulas::FormulaError::InclArityMismatch {
                        lhs: lhs.len(),
                        rhs: rhs.len(),
                    }
                    .into());
                }
                let mut left = Vec::with_capacity(lhs.len());
                let mut right = Vec::with_capacity(rhs.len());
                for arg in lhs {
                    left.push(self.lower_ml_arg(arg)?);
                }
                for arg in rhs {
                    right.push(self.lower_ml_arg(arg)?);
                }
                (NodeKind::Incl(left, right), false)
            }
        };
        if let Some(&id) = self.interned.get(&kind) {
            return Ok(id);
        }
        let id = self.nodes.len() as NodeId;
        self.nodes.push(Node {
            kind: kind.clone(),
            pure_ml,
        });
        self.interned.insert(kind, id);
        Ok(id)
    }

    fn lower_ml_arg(&mut self, arg: &Formula) -> Result<NodeId, EvalError> {
        if !arg.is_pure_ml() {
            return Err(crate::formulas::FormulaError::InclArgNotMl.into());
        }
        self.lower(arg)
    }

    fn both_pure(&self, a: NodeId, b: NodeId) -> bool {
        self.nodes[a as usize].pure_ml && self.nodes[b as usize].pure_ml
    }

    fn prop(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.prop_lookup.get(name) {
            return i;
        }
        let i = self.prop_names.len() as u32;
        self.prop_names.push(name.to_string());
        self.prop_lookup.insert(name.to_string(), i);
        i
    }
}

/// Truth-value pattern of an inclusion-atom side at one world.
type Pattern = SmallVec<[u64; 1]>;

enum BoolMemo {
    Dense(Vec<Vec<u8>>),
    Sparse(HashMap<(NodeId, Team), bool>),
    Off,
}

enum TeamMemo {
    Dense(Vec<Vec<Option<Team>>>),
    Sparse(HashMap<(NodeId, Team), Team>),
    Off,
}

const DENSE_WORLD_LIMIT: usize = 13;

/// An evaluation session for one (model, formula) pair. Sessions share a
/// memo table across the teams they evaluate, so sweeps over many teams of
/// one model are cheap.
pub struct Evaluator<'m> {
    model: &'m KripkeModel,
    arena: Arc<Arena>,
    /// Arena proposition index -> model proposition index.
    prop_map: Vec<u32>,
    /// Pointwise truth per node, present exactly for plain-ML nodes.
    point_truth: Vec<Option<Team>>,
    /// Per inclusion node: (left patterns per world, right patterns per world).
    incl_patterns: Vec<Option<(Vec<Pattern>, Vec<Pattern>)>>,
    config: EvalConfig,
    steps: u64,
    memo_bool: BoolMemo,
    memo_team: TeamMemo,
}

impl<'m> Evaluator<'m> {
    pub fn new(
        model: &'m KripkeModel,
        formula: &Formula,
        config: EvalConfig,
    ) -> Result<Evaluator<'m>, EvalError> {
        Evaluator::with_compiled(&CompiledFormula::compile(formula)?, model, config)
    }

    /// Builds a session from a pre-compiled formula; the model must declare
    /// every proposition the formula mentions.
    pub fn with_compiled(
        compiled: &CompiledFormula,
        model: &'m KripkeModel,
        config: EvalConfig,
    ) -> Result<Evaluator<'m>, EvalError> {
        if config.semantics == Semantics::Strict {
            return Err(EvalError::StrictUnsupported);
        }
        let arena = compiled.arena.clone();
        let mut prop_map = Vec::with_capacity(arena.prop_names.len());
        for name in &arena.prop_names {
            let idx = model
                .prop_index(name)
                .ok_or_else(|| EvalError::UnknownProposition(name.clone()))?;
            prop_map.push(idx as u32);
        }
        let node_count = arena.nodes.len();
        let mut session = Evaluator {
            model,
            arena,
            prop_map,
            point_truth: vec![None; node_count],
            incl_patterns: Vec::new(),
            config,
            steps: 0,
            memo_bool: BoolMemo::Off,
            memo_team: TeamMemo::Off,
        };
        session.compute_point_truth();
        session.compute_incl_patterns();
        if config.memo_enabled {
            if model.world_count() <= DENSE_WORLD_LIMIT {
                session.memo_bool = BoolMemo::Dense(vec![Vec::new(); node_count]);
                session.memo_team = TeamMemo::Dense(vec![Vec::new(); node_count]);
            } else {
                session.memo_bool = BoolMemo::Sparse(HashMap::new());
                session.memo_team = TeamMemo::Sparse(HashMap::new());
            }
        }
        Ok(session)
    }

    pub fn steps_used(&self) -> u64 {
        self.steps
    }

    fn prop_worlds(&self, arena_prop: u32) -> &Team {
        self.model.prop_worlds(self.prop_map[arena_prop as usize] as usize)
    }

    /// Maps every preorder occurrence of `formula` (which must be the
    /// formula this session was built for) to its arena node. Occurrences
    /// of equal subformulas share nodes.
    pub(crate) fn preorder_map(&self, formula: &Formula) -> Vec<NodeId> {
        let mut out = vec![0; formula.node_count()];
        let mut counter = 0usize;
        self.map_walk(formula, &mut counter, &mut out);
        out
    }

    fn map_walk(&self, f: &Formula, counter: &mut usize, out: &mut Vec<NodeId>) -> NodeId {
        let slot = *counter;
        *counter += 1;
        let arena_prop = |name: &str| *self.arena.prop_lookup.get(name).expect("prop was lowered");
        let kind = match f {
            Formula::Top => NodeKind::Top,
            Formula::Bot => NodeKind::Bot,
            Formula::Prop(p) => NodeKind::Prop(arena_prop(p.name())),
            Formula::NegProp(p) => NodeKind::NegProp(arena_prop(p.name())),
            Formula::And(a, b) => {
                let (a, b) = (self.map_walk(a, counter, out), self.map_walk(b, counter, out));
                NodeKind::And(a, b)
            }
            Formula::Or(a, b) => {
                let (a, b) = (self.map_walk(a, counter, out), self.map_walk(b, counter, out));
                NodeKind::Or(a, b)
            }
            Formula::NeDisj(a, b) => {
                let (a, b) = (self.map_walk(a, counter, out), self.map_walk(b, counter, out));
                NodeKind::NeDisj(a, b)
            }
            Formula::Dia(a) => NodeKind::Dia(self.map_walk(a, counter, out)),
            Formula::Box(a) => NodeKind::Box(self.map_walk(a, counter, out)),
            Formula::Nab(a) => NodeKind::Nab(self.map_walk(a, counter, out)),
            Formula::Incl(lhs, rhs) => {
                let l: Vec<NodeId> =
                    lhs.iter().map(|a| self.map_walk(a, counter, out)).collect();
                let r: Vec<NodeId> =
                    rhs.iter().map(|a| self.map_walk(a, counter, out)).collect();
                NodeKind::Incl(l, r)
            }
        };
        let id = *self.arena.interned.get(&kind).expect("same formula was lowered");
        out[slot] = id;
        id
    }

    /// Evaluates an arbitrary arena node on a team, in the session's mode.
    pub(crate) fn eval_node(&mut self, node: NodeId, team: &Team) -> Result<bool, EvalError> {
        match self.config.mode {
            EvalMode::Reference => self.eval_ref(node, team),
            EvalMode::Optimized => self.eval_opt(node, team),
        }
    }

    /// Does the team satisfy the formula?
    pub fn eval_team(&mut self, team: &Team) -> Result<bool, EvalError> {
        self.model.check_team(team)?;
        let root = self.arena.root;
        self.eval_node(root, team)
    }

    /// Pointwise satisfaction at a single world; the formula must be plain ML.
    pub fn eval_point(&mut self, world: usize) -> Result<bool, EvalError> {
        self.model.check_world(world)?;
        match &self.point_truth[self.arena.root as usize] {
            Some(truth) => Ok(truth.contains(world)),
            None => Err(EvalError::NotPureMl),
        }
    }

    /// The largest subteam of `team` satisfying the formula.
    pub fn max_subteam(&mut self, team: &Team) -> Result<Team, EvalError> {
        self.model.check_team(team)?;
        let root = self.arena.root;
        match self.config.mode {
            EvalMode::Reference => {
                self.charge_subsets(team)?;
                let mut acc = Team::empty();
                for s in team.subsets() {
                    if self.eval_ref(root, &s)? {
                        acc = acc.union(&s);
                    }
                }
                Ok(acc)
            }
            EvalMode::Optimized => self.max_team(root, team),
        }
    }

    fn charge(&mut self) -> Result<(), EvalError> {
        self.steps += 1;
        if self.steps > self.config.max_steps {
            Err(EvalError::BudgetExceeded {
                max_steps: self.config.max_steps,
            })
        } else {
            Ok(())
        }
    }

    fn charge_subsets(&mut self, team: &Team) -> Result<(), EvalError> {
        if team.len() >= 62 || team.subset_count() > self.config.max_steps {
            return Err(EvalError::BudgetExceeded {
                max_steps: self.config.max_steps,
            });
        }
        Ok(())
    }

    fn compute_point_truth(&mut self) {
        let full = self.model.full_team();
        for id in 0..self.arena.nodes.len() {
            if !self.arena.nodes[id].pure_ml {
                continue;
            }
            let truth = match &self.arena.nodes[id].kind {
                NodeKind::Top => full.clone(),
                NodeKind::Bot => Team::empty(),
                NodeKind::Prop(p) => self.prop_worlds(*p).clone(),
                NodeKind::NegProp(p) => full.difference(self.prop_worlds(*p)),
                NodeKind::And(a, b) => self.truth(*a).intersection(self.truth(*b)),
                NodeKind::Or(a, b) => self.truth(*a).union(self.truth(*b)),
                NodeKind::Dia(a) => {
                    let inner = self.truth(*a);
                    Team::from_indices(
                        full.iter().filter(|&w| self.model.successors(w).intersects(inner)),
                    )
                }
                NodeKind::Box(a) => {
                    let inner = self.truth(*a);
                    Team::from_indices(
                        full.iter().filter(|&w| self.model.successors(w).is_subset(inner)),
                    )
                }
                NodeKind::NeDisj(..) | NodeKind::Nab(_) | NodeKind::Incl(..) => {
                    unreachable!("not pure ML")
                }
            };
            self.point_truth[id] = Some(truth);
        }
    }

    fn truth(&self, id: NodeId) -> &Team {
        self.point_truth[id as usize]
            .as_ref()
            .expect("child of pure-ML node is pure ML")
    }

    fn compute_incl_patterns(&mut self) {
        let mut patterns = vec![None; self.arena.nodes.len()];
        for (id, slot) in patterns.iter_mut().enumerate() {
            if let NodeKind::Incl(lhs, rhs) = &self.arena.nodes[id].kind {
                *slot = Some((self.side_patterns(lhs), self.side_patterns(rhs)));
            }
        }
        self.incl_patterns = patterns;
    }

    fn side_patterns(&self, args: &[NodeId]) -> Vec<Pattern> {
        let words = args.len().div_ceil(64);
        (0..self.model.world_count())
            .map(|w| {
                let mut pat: Pattern = SmallVec::from_elem(0u64, words);
                for (i, &arg) in args.iter().enumerate() {
                    if self.truth(arg).contains(w) {
                        pat[i / 64] |= 1u64 << (i % 64);
                    }
                }
                pat
            })
            .collect()
    }

    /// `NodeKind` without the inclusion-atom payload, cheap to copy out of
    /// the arena before recursing with `&mut self`.
    fn shape(&self, node: NodeId) -> Shape {
        match &self.arena.nodes[node as usize].kind {
            NodeKind::Top => Shape::Top,
            NodeKind::Bot => Shape::Bot,
            NodeKind::Prop(p) => Shape::Prop(*p),
            NodeKind::NegProp(p) => Shape::NegProp(*p),
            NodeKind::And(a, b) => Shape::And(*a, *b),
            NodeKind::Or(a, b) => Shape::Or(*a, *b),
            NodeKind::NeDisj(a, b) => Shape::NeDisj(*a, *b),
            NodeKind::Dia(a) => Shape::Dia(*a),
            NodeKind::Box(a) => Shape::Box(*a),
            NodeKind::Nab(a) => Shape::Nab(*a),
            NodeKind::Incl(..) => Shape::Incl,
        }
    }

    // --- memo plumbing ---

    fn memo_get_bool(&self, node: NodeId, team: &Team) -> Option<bool> {
        match &self.memo_bool {
            BoolMemo::Dense(table) => {
                let row = &table[node as usize];
                let key = team.small_key()? as usize;
                match row.get(key) {
                    Some(1) => Some(false),
                    Some(2) => Some(true),
                    _ => None,
                }
            }
            BoolMemo::Sparse(map) => map.get(&(node, team.clone())).copied(),
            BoolMemo::Off => None,
        }
    }

    fn memo_put_bool(&mut self, node: NodeId, team: &Team, value: bool) {
        match &mut self.memo_bool {
            BoolMemo::Dense(table) => {
                let row = &mut table[node as usize];
                if row.is_empty() {
                    row.resize(1 << self.model.world_count(), 0);
                }
                let key = team.small_key().expect("dense models fit one word") as usize;
                row[key] = if value { 2 } else { 1 };
            }
            BoolMemo::Sparse(map) => {
                map.insert((node, team.clone()), value);
            }
            BoolMemo::Off => {}
        }
    }

    fn memo_get_team(&self, node: NodeId, team: &Team) -> Option<Team> {
        match &self.memo_team {
            TeamMemo::Dense(table) => {
                let row = &table[node as usize];
                let key = team.small_key()? as usize;
                row.get(key).and_then(|v| v.clone())
            }
            TeamMemo::Sparse(map) => map.get(&(node, team.clone())).cloned(),
            TeamMemo::Off => None,
        }
    }

    fn memo_put_team(&mut self, node: NodeId, team: &Team, value: Team) {
        match &mut self.memo_team {
            TeamMemo::Dense(table) => {
                let row = &mut table[node as usize];
                if row.is_empty() {
                    row.resize(1 << self.model.world_count(), None);
                }
                let key = team.small_key().expect("dense models fit one word") as usize;
                row[key] = Some(value);
            }
            TeamMemo::Sparse(map) => {
                map.insert((node, team.clone()), value);
            }
            TeamMemo::Off => {}
        }
    }

    // --- reference mode ---

    fn eval_ref(&mut self, node: NodeId, team: &Team) -> Result<bool, EvalError> {
        self.charge()?;
        if let Some(v) = self.memo_get_bool(node, team) {
            return Ok(v);
        }
        let value = match self.shape(node) {
            Shape::Top => true,
            Shape::Bot => team.is_empty(),
            Shape::Prop(p) => team.is_subset(self.prop_worlds(p)),
            Shape::NegProp(p) => !team.intersects(self.prop_worlds(p)),
            Shape::And(a, b) => self.eval_ref(a, team)? && self.eval_ref(b, team)?,
            Shape::Or(a, b) => self.search_cover(a, b, team, false)?,
            Shape::NeDisj(a, b) => team.is_empty() || self.search_cover(a, b, team, true)?,
            Shape::Dia(a) => {
                let img = image(self.model, team);
                self.charge_subsets(&img)?;
                let mut found = false;
                for s in img.subsets() {
                    self.charge()?;
                    if step_rel_fast(self.model, team, &s) && self.eval_ref(a, &s)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            Shape::Box(a) => {
                let img = image(self.model, team);
                self.eval_ref(a, &img)?
            }
            Shape::Nab(a) => {
                if team.is_empty() {
                    true
                } else {
                    self.charge_subsets(team)?;
                    let mut found = false;
                    for s in team.subsets() {
                        self.charge()?;
                        if !s.is_empty() && self.eval_ref(a, &s)? {
                            found = true;
                            break;
                        }
                    }
                    found
                }
            }
            Shape::Incl => self.eval_incl(node, team),
        };
        self.memo_put_bool(node, team, value);
        Ok(value)
    }

    /// Searches a cover `T1 ∪ T2 = T` with the left part satisfying `a` and
    /// the right part satisfying `b`. With `nonempty`, both parts must be
    /// nonempty (nonempty disjunction).
    fn search_cover(
        &mut self,
        a: NodeId,
        b: NodeId,
        team: &Team,
        nonempty: bool,
    ) -> Result<bool, EvalError> {
        self.charge_subsets(team)?;
        for t1 in team.subsets() {
            self.charge()?;
            if nonempty && t1.is_empty() {
                continue;
            }
            if !self.eval_ref(a, &t1)? {
                continue;
            }
            // The second part must contain everything t1 misses.
            let rest = team.difference(&t1);
            self.charge_subsets(&t1)?;
            for extra in t1.subsets() {
                self.charge()?;
                let t2 = rest.union(&extra);
                if nonempty && t2.is_empty() {
                    continue;
                }
                if self.eval_ref(b, &t2)? {
                    return Ok(true);
                }
            }
        }
        Ok(false)
    }

    fn eval_incl(&self, node: NodeId, team: &Team) -> bool {
        let (left, right) = self.incl_patterns[node as usize]
            .as_ref()
            .expect("patterns computed at construction");
        team.iter().all(|w| {
            let lp = &left[w];
            team.iter().any(|v| &right[v] == lp)
        })
    }

    // --- optimized mode ---

    /// Boolean verdicts take shortcuts justified by flatness and union
    /// closure; maximal subteams of children are consulted only where the
    /// clause needs a witness.
    fn eval_opt(&mut self, node: NodeId, team: &Team) -> Result<bool, EvalError> {
        self.charge()?;
        if let Some(truth) = &self.point_truth[node as usize] {
            return Ok(team.is_subset(truth));
        }
        if let Some(v) = self.memo_get_bool(node, team) {
            return Ok(v);
        }
        let value = match self.shape(node) {
            Shape::Top | Shape::Bot | Shape::Prop(_) | Shape::NegProp(_) => {
                unreachable!("literals are pure ML")
            }
            Shape::And(a, b) => self.eval_opt(a, team)? && self.eval_opt(b, team)?,
            // T satisfies a|b iff the maximal satisfying subteams cover T.
            Shape::Or(a, b) => {
                &self.max_team(a, team)?.union(&self.max_team(b, team)?) == team
            }
            Shape::NeDisj(a, b) => {
                team.is_empty() || {
                    let left = self.max_team(a, team)?;
                    let right = self.max_team(b, team)?;
                    !left.is_empty() && !right.is_empty() && &left.union(&right) == team
                }
            }
            Shape::Nab(a) => team.is_empty() || !self.max_team(a, team)?.is_empty(),
            // Any witness team lies inside the maximal satisfying subteam of
            // R[T], which itself satisfies; T[R]S then only needs the
            // preimage check.
            Shape::Dia(a) => {
                let witness = self.max_team(a, &image(self.model, team))?;
                team.is_subset(&preimage(self.model, &witness))
            }
            Shape::Box(a) => {
                let img = image(self.model, team);
                self.eval_opt(a, &img)?
            }
            Shape::Incl => self.eval_incl(node, team),
        };
        self.memo_put_bool(node, team, value);
        Ok(value)
    }

    /// Largest subteam of `team` satisfying `node`. Sound for every
    /// connective of the language because all of them preserve unions.
    fn max_team(&mut self, node: NodeId, team: &Team) -> Result<Team, EvalError> {
        self.charge()?;
        // Whole plain-ML subtrees are flat: the maximal subteam is the set of
        // members satisfying the formula pointwise.
        if let Some(truth) = &self.point_truth[node as usize] {
            return Ok(team.intersection(truth));
        }
        if let Some(v) = self.memo_get_team(node, team) {
            return Ok(v);
        }
        let value = match self.shape(node) {
            Shape::Top | Shape::Bot | Shape::Prop(_) | Shape::NegProp(_) => {
                unreachable!("literals are pure ML")
            }
            Shape::And(a, b) => {
                let mut current = team.clone();
                loop {
                    self.charge()?;
                    let next = self
                        .max_team(a, &current)?
                        .intersection(&self.max_team(b, &current)?);
                    if next == current {
                        break current;
                    }
                    current = next;
                }
            }
            Shape::Or(a, b) => self.max_team(a, team)?.union(&self.max_team(b, team)?),
            Shape::NeDisj(a, b) => {
                let left = self.max_team(a, team)?;
                let right = self.max_team(b, team)?;
                if left.is_empty() || right.is_empty() {
                    Team::empty()
                } else {
                    left.union(&right)
                }
            }
            Shape::Nab(a) => {
                if self.max_team(a, team)?.is_empty() {
                    Team::empty()
                } else {
                    team.clone()
                }
            }
            Shape::Dia(a) => {
                let mut current = team.clone();
                loop {
                    self.charge()?;
                    let witness = self.max_team(a, &image(self.model, &current))?;
                    let next = current.intersection(&preimage(self.model, &witness));
                    if next == current {
                        break current;
                    }
                    current = next;
                }
            }
            Shape::Box(a) => {
                let mut current = team.clone();
                loop {
                    self.charge()?;
                    let allowed = self.max_team(a, &image(self.model, &current))?;
                    let next = Team::from_indices(
                        current
                            .iter()
                            .filter(|&w| self.model.successors(w).is_subset(&allowed)),
                    );
                    if next == current {
                        break current;
                    }
                    current = next;
                }
            }
            Shape::Incl => {
                let pats = self.incl_patterns[node as usize]
                    .take()
                    .expect("patterns computed at construction");
                let mut current = team.clone();
                let mut budget_err = None;
                loop {
                    if let Err(e) = self.charge() {
                        budget_err = Some(e);
                        break;
                    }
                    let (left, right) = &pats;
                    let next = Team::from_indices(current.iter().filter(|&w| {
                        let lp = &left[w];
                        current.iter().any(|v| &right[v] == lp)
                    }));
                    if next == current {
                        break;
                    }
                    current = next;
                }
                self.incl_patterns[node as usize] = Some(pats);
                if let Some(e) = budget_err {
                    return Err(e);
                }
                current
            }
        };
        self.memo_put_team(node, team, value.clone());
        Ok(value)
    }
}

/// `R[T]` without revalidating the team (internal hot path).
fn image(model: &KripkeModel, team: &Team) -> Team {
    let mut out = Team::empty();
    for w in team.iter() {
        out = out.union(model.successors(w));
    }
    out
}

fn preimage(model: &KripkeModel, team: &Team) -> Team {
    let mut out = Team::empty();
    for w in team.iter() {
        out = out.union(model.predecessors(w));
    }
    out
}

fn step_rel_fast(model: &KripkeModel, t: &Team, s: &Team) -> bool {
    s.is_subset(&image(model, t)) && t.is_subset(&preimage(model, s))
}

/// Evaluates `K, T |= formula`.
pub fn eval(
    model: &KripkeModel,
    team: &Team,
    formula: &Formula,
    config: &EvalConfig,
) -> Result<bool, EvalError> {
    Evaluator::new(model, formula, *config)?.eval_team(team)
}

/// Evaluates a plain-ML formula at a single world; agrees with `eval` on the
/// singleton team.
pub fn eval_point(
    model: &KripkeModel,
    world: usize,
    formula: &Formula,
) -> Result<bool, EvalError> {
    if !formula.is_pure_ml() {
        return Err(EvalError::NotPureMl);
    }
    Evaluator::new(model, formula, EvalConfig::default())?.eval_point(world)
}

/// All teams of the model satisfying the formula, ascending by bit pattern.
pub fn satisfying_teams(
    model: &KripkeModel,
    formula: &Formula,
    config: &EvalConfig,
) -> Result<Vec<Team>, EvalError> {
    let team_count = 1u64
        .checked_shl(model.world_count() as u32)
        .unwrap_or(u64::MAX);
    if team_count > config.max_steps {
        return Err(EvalError::BudgetExceeded {
            max_steps: config.max_steps,
        });
    }
    let mut session = Evaluator::new(model, formula, *config)?;
    let mut out = Vec::new();
    for team in model.teams() {
        if session.eval_team(&team)? {
            out.push(team);
        }
    }
    Ok(out)
}

/// The unique largest subteam of `team` satisfying `formula`.
///
/// In optimized mode the formula must lie in a union-closed dialect; mixed
/// formulas are accepted in reference mode only.
pub fn max_subteam(
    model: &KripkeModel,
    team: &Team,
    formula: &Formula,
    config: &EvalConfig,
) -> Result<Team, EvalError> {
    if config.mode == EvalMode::Optimized && !formula.dialect().is_union_closed() {
        return Err(EvalError::NotUnionClosed(formula.dialect()));
    }
    Evaluator::new(model, formula, *config)?.max_subteam(team)
}
#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse;
    use crate::kripke::{enumerate_models, KripkeModel};
    use crate::formulas::PropSymbol;

    /// Two isolated worlds `w`, `v`; only `v` satisfies `p`.
    fn two_world_model() -> KripkeModel {
        KripkeModel::new(
            vec![PropSymbol::new("p").unwrap()],
            vec!["w".into(), "v".into()],
            &[],
            &[("p".into(), vec!["v".into()])],
        )
        .unwrap()
    }

    fn both_modes(model: &KripkeModel, team: &Team, formula: &Formula) -> bool {
        let r = eval(model, team, formula, &EvalConfig::reference()).unwrap();
        let o = eval(model, team, formula, &EvalConfig::optimized()).unwrap();
        assert_eq!(r, o, "mode disagreement on {formula} over {team:?}");
        r
    }

    #[test]
    fn inclusion_atom_on_two_world_model() {
        let m = two_world_model();
        let f = parse("[p <= ~p]").unwrap();
        assert!(both_modes(&m, &Team::from_indices([0, 1]), &f));
        assert!(!both_modes(&m, &Team::singleton(0), &f));
        assert!(!both_modes(&m, &Team::singleton(1), &f));
        assert!(both_modes(&m, &Team::empty(), &f));
    }

    #[test]
    fn empty_team_property_sampler() {
        let m = two_world_model();
        for text in [
            "p", "~p", "bot", "top", "p & ~p", "dia p", "box bot", "nab (p & ~p)",
            "[p <= ~p]", "p |! ~p",
        ] {
            let f = parse(text).unwrap();
            assert!(both_modes(&m, &Team::empty(), &f), "empty team on {text}");
        }
    }

    /// The arity-2 lower-bound team: worlds `w(a1 a2 b1 b2)` over the
    /// identity relation, team pairing each left pattern with its cyclic
    /// successor as right pattern.
    fn cyclic_witness_model() -> (KripkeModel, Team) {
        let props: Vec<PropSymbol> = ["p1", "p2", "q1", "q2"]
            .iter()
            .map(|p| PropSymbol::new(*p).unwrap())
            .collect();
        let worlds: Vec<String> = (0..16)
            .map(|i| format!("w{:02b}{:02b}", i >> 2, i & 3))
            .collect();
        let edges: Vec<(String, String)> =
            worlds.iter().map(|w| (w.clone(), w.clone())).collect();
        let mut valuation: Vec<(String, Vec<String>)> = Vec::new();
        for (pi, name) in ["p1", "p2"].iter().enumerate() {
            let members = (0..16usize)
                .filter(|i| (i >> 2) >> (1 - pi) & 1 == 1)
                .map(|i| worlds[i].clone())
                .collect();
            valuation.push((name.to_string(), members));
        }
        for (qi, name) in ["q1", "q2"].iter().enumerate() {
            let members = (0..16usize)
                .filter(|i| (i & 3) >> (1 - qi) & 1 == 1)
                .map(|i| worlds[i].clone())
                .collect();
            valuation.push((name.to_string(), members));
        }
        let model = KripkeModel::new(props, worlds, &edges, &valuation).unwrap();
        let team = model
            .team_from_names(&["w0001", "w0110", "w1011", "w1100"])
            .unwrap();
        (model, team)
    }

    #[test]
    fn cyclic_team_satisfies_atom_but_no_proper_subteam() {
        let (model, team) = cyclic_witness_model();
        let atom = parse("[p1,p2 <= q1,q2]").unwrap();
        assert!(both_modes(&model, &team, &atom));
        let mut proper = 0;
        for sub in team.subsets() {
            if sub == team || sub.is_empty() {
                continue;
            }
            proper += 1;
            assert!(!both_modes(&model, &sub, &atom), "subteam {sub:?} must fail");
        }
        assert_eq!(proper, 14);
    }

    #[test]
    fn eval_point_cases() {
        let m = two_world_model();
        let p = parse("p").unwrap();
        assert!(eval_point(&m, 1, &p).unwrap());
        assert!(!eval_point(&m, 0, &p).unwrap());
        assert!(eval_point(&m, 0, &parse("top").unwrap()).unwrap());
        assert_eq!(
            eval_point(&m, 0, &parse("nab p").unwrap()),
            Err(EvalError::NotPureMl)
        );
    }

    #[test]
    fn satisfying_teams_cases() {
        let m = two_world_model();
        let atom = parse("[p <= ~p]").unwrap();
        assert_eq!(
            satisfying_teams(&m, &atom, &EvalConfig::default()).unwrap(),
            vec![Team::empty(), Team::from_indices([0, 1])]
        );
        assert_eq!(
            satisfying_teams(&m, &parse("p").unwrap(), &EvalConfig::default()).unwrap(),
            vec![Team::empty(), Team::singleton(1)]
        );
        assert_eq!(
            satisfying_teams(&m, &parse("top").unwrap(), &EvalConfig::default())
                .unwrap()
                .len(),
            4
        );
    }

    #[test]
    fn max_subteam_cases() {
        let m = two_world_model();
        let p = parse("p").unwrap();
        let all = Team::from_indices([0, 1]);
        for config in [EvalConfig::reference(), EvalConfig::optimized()] {
            assert_eq!(max_subteam(&m, &all, &p, &config).unwrap(), Team::singleton(1));
            assert_eq!(
                max_subteam(&m, &Team::singleton(0), &p, &config).unwrap(),
                Team::empty()
            );
            let atom = parse("[p <= ~p]").unwrap();
            assert_eq!(max_subteam(&m, &all, &atom, &config).unwrap(), all);
        }
    }

    #[test]
    fn max_subteam_rejects_mixed_in_optimized_mode() {
        let m = two_world_model();
        let mixed = parse("[p <= ~p] & nab p").unwrap();
        assert!(matches!(
            max_subteam(&m, &Team::empty(), &mixed, &EvalConfig::optimized()),
            Err(EvalError::NotUnionClosed(Dialect::Mixed))
        ));
        assert!(max_subteam(&m, &m.full_team(), &mixed, &EvalConfig::reference()).is_ok());
    }

    #[test]
    fn unknown_proposition_rejected() {
        let m = two_world_model();
        assert_eq!(
            eval(&m, &Team::empty(), &parse("zz").unwrap(), &EvalConfig::default()),
            Err(EvalError::UnknownProposition("zz".to_string()))
        );
    }

    #[test]
    fn strict_semantics_rejected() {
        let m = two_world_model();
        let config = EvalConfig {
            semantics: Semantics::Strict,
            ..Default::default()
        };
        assert_eq!(
            eval(&m, &Team::empty(), &parse("p").unwrap(), &config),
            Err(EvalError::StrictUnsupported)
        );
    }

    #[test]
    fn memoization_does_not_change_verdicts() {
        let props = [PropSymbol::new("p").unwrap()];
        let f = parse("nab p | [p <= ~p] & box (p |! ~p)").unwrap();
        for m in enumerate_models(2, &props) {
            for mode in [EvalMode::Reference, EvalMode::Optimized] {
                let with_memo = EvalConfig {
                    mode,
                    ..Default::default()
                };
                let without_memo = EvalConfig {
                    mode,
                    memo_enabled: false,
                    ..Default::default()
                };
                for t in m.teams() {
                    assert_eq!(
                        eval(&m, &t, &f, &with_memo).unwrap(),
                        eval(&m, &t, &f, &without_memo).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn budget_is_an_error_not_a_verdict() {
        let m = two_world_model();
        let f = parse("nab p | nab ~p").unwrap();
        let config = EvalConfig::reference().with_max_steps(3);
        assert_eq!(
            eval(&m, &m.full_team(), &f, &config),
            Err(EvalError::BudgetExceeded { max_steps: 3 })
        );
    }

    #[test]
    fn modes_agree_on_small_enumeration() {
        let props = [PropSymbol::new("p").unwrap()];
        let models: Vec<_> = enumerate_models(2, &props).collect();
        let formulas = [
            "p", "~p", "p | ~p", "p & ~p", "dia p", "box p", "dia (p | ~p) & box p",
            "nab p", "nab dia p", "[p <= ~p]", "[p,~p <= ~p,p]", "p |! ~p",
            "nab p | box ~p", "dia nab p", "box (p |! ~p)", "[dia p <= p]",
        ];
        for text in formulas {
            let f = parse(text).unwrap();
            for m in &models {
                let mut reference = Evaluator::new(m, &f, EvalConfig::reference()).unwrap();
                let mut optimized = Evaluator::new(m, &f, EvalConfig::optimized()).unwrap();
                for t in m.teams() {
                    assert_eq!(
                        reference.eval_team(&t).unwrap(),
                        optimized.eval_team(&t).unwrap(),
                        "disagreement on {text}"
                    );
                }
            }
        }
    }

    #[test]
    fn flatness_on_small_enumeration() {
        let props = [PropSymbol::new("p").unwrap()];
        let models: Vec<_> = enumerate_models(2, &props).collect();
        for text in ["p", "~p", "p | ~p", "dia p", "box (p | ~p)", "dia box p"] {
            let f = parse(text).unwrap();
            for m in &models {
                let mut session = Evaluator::new(m, &f, EvalConfig::reference()).unwrap();
                for t in m.teams() {
                    let team_verdict = session.eval_team(&t).unwrap();
                    let pointwise = t.iter().all(|w| eval_point(m, w, &f).unwrap());
                    assert_eq!(team_verdict, pointwise, "flatness of {text}");
                }
            }
        }
    }

    #[test]
    fn compiled_formula_reuses_across_models() {
        let props = [PropSymbol::new("p").unwrap()];
        let compiled = CompiledFormula::compile(&parse("[p <= ~p] | nab p").unwrap()).unwrap();
        for m in enumerate_models(2, &props) {
            let f = parse("[p <= ~p] | nab p").unwrap();
            let mut from_compiled =
                Evaluator::with_compiled(&compiled, &m, EvalConfig::optimized()).unwrap();
            let mut fresh = Evaluator::new(&m, &f, EvalConfig::optimized()).unwrap();
            for t in m.teams() {
                assert_eq!(
                    from_compiled.eval_team(&t).unwrap(),
                    fresh.eval_team(&t).unwrap()
                );
            }
        }
        // A model lacking the proposition rejects the compiled formula.
        let bare = KripkeModel::new(vec![], vec!["w".into()], &[], &[]).unwrap();
        assert!(matches!(
            Evaluator::with_compiled(&compiled, &bare, EvalConfig::default()),
            Err(EvalError::UnknownProposition(_))
        ));
    }

    #[test]
    fn eval_point_agrees_with_singleton_eval() {
        let props = [PropSymbol::new("p").unwrap()];
        let models: Vec<_> = enumerate_models(2, &props).collect();
        for text in ["p", "~p", "dia p", "box ~p", "p & (p | ~p)", "bot", "top"] {
            let f = parse(text).unwrap();
            for m in &models {
                for w in 0..m.world_count() {
                    assert_eq!(
                        eval_point(m, w, &f).unwrap(),
                        eval(m, &Team::singleton(w), &f, &EvalConfig::reference()).unwrap(),
                    );
                }
            }
        }
    }
}
