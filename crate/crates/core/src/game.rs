//! Semantic-game strategies for nonemptiness-operator formulas.
//!
//! A strategy assigns a team to every occurrence in the syntax tree. It is
//! winning when the root gets the evaluated team, literal positions get
//! teams satisfying their literal, conjunction children repeat the parent,
//! disjunction children cover it, a `nab` child is a subteam (nonempty when
//! the parent is), a diamond child `S` obeys the team step `F(parent)[R]S`,
//! and a box child is exactly the relational image of the parent. A winning
//! strategy exists if and only if the team satisfies the formula.
//!
//! On identity-relation models, removing one element from every assigned
//! team keeps a strategy winning as long as no `nab` witness was exactly
//! the removed singleton; a formula with few `nab` occurrences therefore
//! cannot pin down large teams. `lower_bound_witness` builds the model and
//! team that turn this into a size bound for defining inclusion atoms, and
//! `audit_lower_bound` runs the argument against a candidate formula.

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::formulas::{Formula, Position, PropSymbol};
use crate::kripke::{KripkeModel, ModelError, Team};
use crate::semantics::{EvalConfig, EvalError, Evaluator};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error("the semantic game supports `nab` formulas only (no inclusion atoms, no `|!`)")]
    UnsupportedConnective,
    #[error("strategy assigns {got} positions, formula has {want}")]
    StrategyNotTotal { got: usize, want: usize },
    #[error("the accessibility relation must be the identity relation")]
    RelationNotIdentity,
    #[error("removal would empty the `nab` witness at position `{position}`")]
    RemovalPrecondition { position: Position },
    #[error("witness arity must be at least 1")]
    WitnessArityZero,
    #[error("witness arity {n} exceeds the supported maximum {max}")]
    WitnessTooLarge { n: u32, max: u32 },
    #[error("malformed strategy document: {0}")]
    MalformedStrategy(String),
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// A strategy: one team per occurrence position, stored in preorder.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Strategy {
    teams: Vec<Team>,
}

impl Strategy {
    /// Builds a strategy from a position map; it must cover exactly the
    /// positions of the formula.
    pub fn from_assignments(
        formula: &Formula,
        assignments: &[(Position, Team)],
    ) -> Result<Strategy, GameError> {
        let positions = formula.positions();
        if assignments.len() != positions.len() {
            return Err(GameError::StrategyNotTotal {
                got: assignments.len(),
                want: positions.len(),
            });
        }
        let mut teams = vec![None; positions.len()];
        for (pos, team) in assignments {
            let idx = positions.iter().position(|p| p == pos).ok_or_else(|| {
                GameError::MalformedStrategy(format!("position `{pos}` is not in the formula"))
            })?;
            if teams[idx].replace(team.clone()).is_some() {
                return Err(GameError::MalformedStrategy(format!(
                    "position `{pos}` assigned twice"
                )));
            }
        }
        Ok(Strategy {
            teams: teams.into_iter().map(Option::unwrap).collect(),
        })
    }

    pub(crate) fn from_preorder(teams: Vec<Team>) -> Strategy {
        Strategy { teams }
    }

    /// Team at a preorder node index.
    pub fn team_at_index(&self, index: usize) -> Option<&Team> {
        self.teams.get(index)
    }

    /// Team at an occurrence position of `formula`.
    pub fn team_at(&self, formula: &Formula, position: &Position) -> Option<&Team> {
        let idx = formula.positions().iter().position(|p| p == position)?;
        self.teams.get(idx)
    }

    pub fn len(&self) -> usize {
        self.teams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.teams.is_empty()
    }

    /// Position/team pairs in preorder.
    pub fn assignments(&self, formula: &Formula) -> Vec<(Position, Team)> {
        formula
            .positions()
            .into_iter()
            .zip(self.teams.iter().cloned())
            .collect()
    }
}

/// Serializes a strategy as a map from dot-separated position paths to
/// world-name lists.
pub fn strategy_to_json(model: &KripkeModel, formula: &Formula, strategy: &Strategy) -> Value {
    let mut map = Map::new();
    for (pos, team) in strategy.assignments(formula) {
        map.insert(pos.to_string(), json!(team.names(model)));
    }
    Value::Object(map)
}

pub fn strategy_from_json(
    model: &KripkeModel,
    formula: &Formula,
    value: &Value,
) -> Result<Strategy, GameError> {
    let obj = value
        .as_object()
        .ok_or_else(|| GameError::MalformedStrategy("expected a JSON object".into()))?;
    let mut assignments = Vec::with_capacity(obj.len());
    for (path, members) in obj {
        let pos = Position::parse(path)
            .ok_or_else(|| GameError::MalformedStrategy(format!("bad position `{path}`")))?;
        let names = members
            .as_array()
            .ok_or_else(|| GameError::MalformedStrategy("entries must be arrays".into()))?
            .iter()
            .map(|v| {
                v.as_str()
                    .map(str::to_string)
                    .ok_or_else(|| GameError::MalformedStrategy("world ids must be strings".into()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let team = model.team_from_names(&names)?;
        assignments.push((pos, team));
    }
    Strategy::from_assignments(formula, &assignments)
}

/// Preorder game arena for a `nab` formula.
struct Arena {
    kinds: Vec<GameNode>,
}

#[derive(Clone, Copy)]
enum GameNode {
    Top,
    Bot,
    Prop(usize),
    NegProp(usize),
    And(usize, usize),
    Or(usize, usize),
    Dia(usize),
    Box(usize),
    Nab(usize),
}

impl Arena {
    fn build(model: &KripkeModel, formula: &Formula) -> Result<Arena, GameError> {
        let mut kinds = Vec::with_capacity(formula.node_count());
        Arena::walk(model, formula, &mut kinds)?;
        Ok(Arena { kinds })
    }

    fn walk(
        model: &KripkeModel,
        f: &Formula,
        kinds: &mut Vec<GameNode>,
    ) -> Result<usize, GameError> {
        let slot = kinds.len();
        kinds.push(GameNode::Top);
        let node = match f {
            Formula::Top => GameNode::Top,
            Formula::Bot => GameNode::Bot,
            Formula::Prop(p) => GameNode::Prop(resolve_prop(model, p)?),
            Formula::NegProp(p) => GameNode::NegProp(resolve_prop(model, p)?),
            Formula::And(a, b) => {
                let a = Arena::walk(model, a, kinds)?;
                let b = Arena::walk(model, b, kinds)?;
                GameNode::And(a, b)
            }
            Formula::Or(a, b) => {
                let a = Arena::walk(model, a, kinds)?;
                let b = Arena::walk(model, b, kinds)?;
                GameNode::Or(a, b)
            }
            Formula::Dia(a) => GameNode::Dia(Arena::walk(model, a, kinds)?),
            Formula::Box(a) => GameNode::Box(Arena::walk(model, a, kinds)?),
            Formula::Nab(a) => GameNode::Nab(Arena::walk(model, a, kinds)?),
            Formula::NeDisj(..) | Formula::Incl(..) => {
                return Err(GameError::UnsupportedConnective)
            }
        };
        kinds[slot] = node;
        Ok(slot)
    }
}

fn resolve_prop(model: &KripkeModel, p: &PropSymbol) -> Result<usize, GameError> {
    model
        .prop_index(p.name())
        .ok_or_else(|| GameError::Eval(EvalError::UnknownProposition(p.name().to_string())))
}

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

/// Checks the eight winning-strategy clauses.
pub fn verify_strategy(
    model: &KripkeModel,
    team: &Team,
    formula: &Formula,
    strategy: &Strategy,
) -> Result<bool, GameError> {
    model.check_team(team)?;
    let arena = Arena::build(model, formula)?;
    if strategy.teams.len() != arena.kinds.len() {
        return Err(GameError::StrategyNotTotal {
            got: strategy.teams.len(),
            want: arena.kinds.len(),
        });
    }
    for t in &strategy.teams {
        model.check_team(t)?;
    }
    // (i) the root is assigned the evaluated team
    if strategy.teams[0] != *team {
        return Ok(false);
    }
    for (idx, node) in arena.kinds.iter().enumerate() {
        let mine = &strategy.teams[idx];
        let ok = match *node {
            GameNode::Top => true,
            GameNode::Bot => mine.is_empty(),
            // (ii)/(iii) literal teams satisfy their literal
            GameNode::Prop(p) => mine.is_subset(model.prop_worlds(p)),
            GameNode::NegProp(p) => !mine.intersects(model.prop_worlds(p)),
            // (iv) conjunction children equal the parent
            GameNode::And(a, b) => {
                strategy.teams[a] == *mine && strategy.teams[b] == *mine
            }
            // (v) disjunction children cover the parent
            GameNode::Or(a, b) => strategy.teams[a].union(&strategy.teams[b]) == *mine,
            // (vi) `nab` child is a subteam, nonempty when the parent is
            GameNode::Nab(a) => {
                strategy.teams[a].is_subset(mine)
                    && (mine.is_empty() || !strategy.teams[a].is_empty())
            }
            // (vii) diamond: F(parent)[R]F(child)
            GameNode::Dia(a) => {
                let child = &strategy.teams[a];
                child.is_subset(&image(model, mine)) && mine.is_subset(&preimage(model, child))
            }
            // (viii) box child is the image of the parent
            GameNode::Box(a) => strategy.teams[a] == image(model, mine),
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Reusable strategy search over one (model, formula) pair.
pub struct StrategySolver<'m> {
    model: &'m KripkeModel,
    arena: Arena,
    session: Evaluator<'m>,
    /// Arena index -> evaluator node, for pruning by satisfaction.
    eval_nodes: Vec<u32>,
    max_steps: u64,
}

impl<'m> StrategySolver<'m> {
    pub fn new(
        model: &'m KripkeModel,
        formula: &Formula,
        config: &EvalConfig,
    ) -> Result<StrategySolver<'m>, GameError> {
        let arena = Arena::build(model, formula)?;
        let session = Evaluator::new(model, formula, *config)?;
        let eval_nodes = session.preorder_map(formula);
        Ok(StrategySolver {
            model,
            arena,
            session,
            eval_nodes,
            max_steps: config.max_steps,
        })
    }

    fn check_subset_budget(&self, team: &Team) -> Result<(), GameError> {
        if team.len() >= 62 || team.subset_count() > self.max_steps {
            return Err(GameError::Eval(EvalError::BudgetExceeded {
                max_steps: self.max_steps,
            }));
        }
        Ok(())
    }

    /// Finds a winning strategy for the team, or proves there is none.
    /// Search order is fixed: disjunction splits by increasing first-part
    /// size, `nab` and diamond witnesses by increasing size, ties by bit
    /// pattern.
    pub fn find(&mut self, team: &Team) -> Result<Option<Strategy>, GameError> {
        self.model.check_team(team)?;
        let mut teams = vec![Team::empty(); self.arena.kinds.len()];
        if self.solve(0, team.clone(), &mut teams)? {
            Ok(Some(Strategy::from_preorder(teams)))
        } else {
            Ok(None)
        }
    }

    fn satisfies(&mut self, idx: usize, team: &Team) -> Result<bool, EvalError> {
        self.session.eval_node(self.eval_nodes[idx], team)
    }

    fn solve(
        &mut self,
        idx: usize,
        team: Team,
        teams: &mut Vec<Team>,
    ) -> Result<bool, GameError> {
        let ok = match self.arena.kinds[idx] {
            GameNode::Top => true,
            GameNode::Bot => team.is_empty(),
            GameNode::Prop(p) => team.is_subset(self.model.prop_worlds(p)),
            GameNode::NegProp(p) => !team.intersects(self.model.prop_worlds(p)),
            GameNode::And(a, b) => {
                self.solve(a, team.clone(), teams)? && self.solve(b, team.clone(), teams)?
            }
            GameNode::Or(a, b) => {
                self.check_subset_budget(&team)?;
                let mut found = false;
                'outer: for t1 in ordered_subsets(&team) {
                    if !self.satisfies(a, &t1)? {
                        continue;
                    }
                    let rest = team.difference(&t1);
                    for extra in ordered_subsets(&t1) {
                        let t2 = rest.union(&extra);
                        if !self.satisfies(b, &t2)? {
                            continue;
                        }
                        if self.solve(a, t1.clone(), teams)? && self.solve(b, t2, teams)? {
                            found = true;
                            break 'outer;
                        }
                    }
                }
                found
            }
            GameNode::Nab(a) => {
                if team.is_empty() {
                    self.solve(a, Team::empty(), teams)?
                } else {
                    self.check_subset_budget(&team)?;
                    let mut found = false;
                    for s in ordered_subsets(&team) {
                        if s.is_empty() || !self.satisfies(a, &s)? {
                            continue;
                        }
                        if self.solve(a, s, teams)? {
                            found = true;
                            break;
                        }
                    }
                    found
                }
            }
            GameNode::Dia(a) => {
                let img = image(self.model, &team);
                self.check_subset_budget(&img)?;
                let mut found = false;
                for s in ordered_subsets(&img) {
                    if !team.is_subset(&preimage(self.model, &s)) {
                        continue;
                    }
                    if !self.satisfies(a, &s)? {
                        continue;
                    }
                    if self.solve(a, s, teams)? {
                        found = true;
                        break;
                    }
                }
                found
            }
            GameNode::Box(a) => self.solve(a, image(self.model, &team), teams)?,
        };
        if ok {
            teams[idx] = team;
        }
        Ok(ok)
    }
}

/// Subsets ordered by size, then bit pattern.
fn ordered_subsets(team: &Team) -> Vec<Team> {
    let mut subs: Vec<Team> = team.subsets().collect();
    subs.sort_by_key(|s| (s.len(), s.clone()));
    subs
}

/// Searches a winning strategy; one exists iff the team satisfies the
/// formula.
pub fn find_strategy(
    model: &KripkeModel,
    team: &Team,
    formula: &Formula,
    config: &EvalConfig,
) -> Result<Option<Strategy>, GameError> {
    StrategySolver::new(model, formula, config)?.find(team)
}

/// Drops `element` from every assigned team. Requires the identity
/// relation, and fails when some `nab` witness is exactly the removed
/// element (removal could then change the verdict). Whenever it succeeds,
/// the result is again a winning strategy, for the team minus the element.
pub fn remove_element(
    model: &KripkeModel,
    formula: &Formula,
    strategy: &Strategy,
    element: usize,
) -> Result<Strategy, GameError> {
    model.check_world(element)?;
    if !model.relation_is_identity() {
        return Err(GameError::RelationNotIdentity);
    }
    let arena = Arena::build(model, formula)?;
    if strategy.teams.len() != arena.kinds.len() {
        return Err(GameError::StrategyNotTotal {
            got: strategy.teams.len(),
            want: arena.kinds.len(),
        });
    }
    let positions = formula.positions();
    for node in &arena.kinds {
        if let GameNode::Nab(child) = node {
            if strategy.teams[*child] == Team::singleton(element) {
                return Err(GameError::RemovalPrecondition {
                    position: positions[*child].clone(),
                });
            }
        }
    }
    Ok(Strategy {
        teams: strategy
            .teams
            .iter()
            .map(|t| t.without(element))
            .collect(),
    })
}

/// The members of `team` whose single removal falsifies the formula.
pub fn essential_elements(
    model: &KripkeModel,
    team: &Team,
    formula: &Formula,
    config: &EvalConfig,
) -> Result<Team, EvalError> {
    model.check_team(team)?;
    let mut session = Evaluator::new(model, formula, *config)?;
    let mut essential = Team::empty();
    for a in team.iter() {
        if !session.eval_team(&team.without(a))? {
            essential.insert(a);
        }
    }
    Ok(essential)
}

const WITNESS_MAX_ARITY: u32 = 6;

/// The inclusion atom `[p1,..,pn <= q1,..,qn]`.
pub fn witness_atom(n: u32) -> Formula {
    let lhs = (1..=n).map(|i| Formula::prop(&format!("p{i}"))).collect();
    let rhs = (1..=n).map(|i| Formula::prop(&format!("q{i}"))).collect();
    Formula::Incl(lhs, rhs)
}

/// Builds the identity-relation model over worlds `w(a¯ b¯)` for all pairs
/// of `n`-bit vectors, with `p_i` reading the bits of `a¯` and `q_j` the
/// bits of `b¯`, and the team pairing every `a¯` with its cyclic successor
/// `a¯+1 (mod 2^n)`. The team has size `2^n`, satisfies the `n`-ary
/// inclusion atom, and every single removal falsifies it; all three facts
/// are re-checked during construction.
pub fn lower_bound_witness(n: u32) -> Result<(KripkeModel, Team), GameError> {
    if n == 0 {
        return Err(GameError::WitnessArityZero);
    }
    if n > WITNESS_MAX_ARITY {
        return Err(GameError::WitnessTooLarge {
            n,
            max: WITNESS_MAX_ARITY,
        });
    }
    let n_usize = n as usize;
    let side = 1usize << n;
    let props: Vec<PropSymbol> = (1..=n_usize)
        .map(|i| PropSymbol::new(format!("p{i}")).unwrap())
        .chain((1..=n_usize).map(|j| PropSymbol::new(format!("q{j}")).unwrap()))
        .collect();
    let worlds: Vec<String> = (0..side)
        .flat_map(|a| {
            (0..side).map(move |b| format!("w{:0w$b}{:0w$b}", a, b, w = n_usize))
        })
        .collect();
    let edges: Vec<(String, String)> = worlds.iter().map(|w| (w.clone(), w.clone())).collect();
    let world_of = |a: usize, b: usize| a * side + b;
    let mut valuation: Vec<(String, Vec<String>)> = Vec::new();
    for i in 1..=n_usize {
        // p_i holds where bit i of the left vector (counted from the left) is 1
        let members = (0..side)
            .filter(|a| a >> (n_usize - i) & 1 == 1)
            .flat_map(|a| (0..side).map(move |b| world_of(a, b)))
            .map(|w| worlds[w].clone())
            .collect();
        valuation.push((format!("p{i}"), members));
    }
    for j in 1..=n_usize {
        let members = (0..side)
            .filter(|b| b >> (n_usize - j) & 1 == 1)
            .flat_map(|b| (0..side).map(move |a| world_of(a, b)))
            .map(|w| worlds[w].clone())
            .collect();
        valuation.push((format!("q{j}"), members));
    }
    let model = KripkeModel::new(props, worlds, &edges, &valuation)?;
    let team = Team::from_indices((0..side).map(|a| world_of(a, (a + 1) % side)));

    // Construction guarantees.
    let atom = witness_atom(n);
    let config = EvalConfig::default();
    assert_eq!(team.len(), side, "witness team must have 2^n members");
    let mut session = Evaluator::new(&model, &atom, config).map_err(GameError::Eval)?;
    assert!(
        session.eval_team(&team).map_err(GameError::Eval)?,
        "witness team must satisfy the inclusion atom"
    );
    for a in team.iter() {
        assert!(
            !session.eval_team(&team.without(a)).map_err(GameError::Eval)?,
            "removing any element must falsify the inclusion atom"
        );
    }
    Ok((model, team))
}

/// Outcome of auditing a formula against the arity-`n` witness.
#[derive(Clone, Debug)]
pub enum AuditOutcome {
    /// The formula survives removal of `element`, the atom does not: the
    /// formula does not define the inclusion atom.
    Certificate {
        element: usize,
        element_name: String,
        strategy_verified: bool,
        formula_holds_after_removal: bool,
        atom_fails_after_removal: bool,
    },
    /// Enough `nab` occurrences; the removal argument does not apply.
    NoCertificate,
    /// The formula already fails on the witness team (which itself shows it
    /// does not define the atom).
    FailsOnWitness,
}

#[derive(Clone, Debug)]
pub struct AuditReport {
    pub n: u32,
    pub occ_nabla: usize,
    pub team_size: usize,
    pub outcome: AuditOutcome,
}

impl AuditReport {
    /// A certificate with every re-check green.
    pub fn certified(&self) -> bool {
        matches!(
            self.outcome,
            AuditOutcome::Certificate {
                strategy_verified: true,
                formula_holds_after_removal: true,
                atom_fails_after_removal: true,
                ..
            }
        )
    }
}

/// Runs the removal argument against the arity-`n` witness: when the
/// formula satisfies the witness team but has fewer than `2^n` `nab`
/// occurrences, some essential element of the inclusion atom can be
/// removed without falsifying the formula.
pub fn audit_lower_bound(
    formula: &Formula,
    n: u32,
    config: &EvalConfig,
) -> Result<AuditReport, GameError> {
    if formula.contains_incl() || formula.contains_nedisj() {
        return Err(GameError::UnsupportedConnective);
    }
    let (model, team) = lower_bound_witness(n)?;
    let occ = formula.occ_nabla();
    let mut report = AuditReport {
        n,
        occ_nabla: occ,
        team_size: team.len(),
        outcome: AuditOutcome::NoCertificate,
    };
    let mut session = Evaluator::new(&model, formula, *config)?;
    if !session.eval_team(&team)? {
        report.outcome = AuditOutcome::FailsOnWitness;
        return Ok(report);
    }
    if occ as u64 >= 1u64 << n {
        return Ok(report);
    }
    let strategy = find_strategy(&model, &team, formula, config)?
        .expect("a satisfied formula has a winning strategy");
    // Elements pinned by some nab witness; at most one per nab occurrence.
    let arena = Arena::build(&model, formula)?;
    let mut pinned = Team::empty();
    for node in &arena.kinds {
        if let GameNode::Nab(child) = node {
            let witness = &strategy.teams[*child];
            if witness.len() == 1 {
                pinned.insert(witness.iter().next().unwrap());
            }
        }
    }
    let removable = team.difference(&pinned);
    let element = removable
        .iter()
        .next()
        .expect("fewer nab occurrences than team members leaves a removable element");
    let stripped = remove_element(&model, formula, &strategy, element)?;
    let after = team.without(element);
    let strategy_verified = verify_strategy(&model, &after, formula, &stripped)?;
    let formula_holds_after_removal = session.eval_team(&after)?;
    let atom = witness_atom(n);
    let atom_fails_after_removal =
        !crate::semantics::eval(&model, &after, &atom, config)?;
    report.outcome = AuditOutcome::Certificate {
        element,
        element_name: model.world_name(element).to_string(),
        strategy_verified,
        formula_holds_after_removal,
        atom_fails_after_removal,
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse;

    fn two_world_model() -> KripkeModel {
        KripkeModel::new(
            vec![PropSymbol::new("p").unwrap()],
            vec!["w".into(), "v".into()],
            &[],
            &[("p".into(), vec!["v".into()])],
        )
        .unwrap()
    }

    #[test]
    fn verify_hand_built_strategy() {
        let m = two_world_model();
        let f = parse("p | ~p").unwrap();
        let team = Team::from_indices([0, 1]);
        let good = Strategy::from_assignments(
            &f,
            &[
                (Position::root(), team.clone()),
                (Position::root().child(0), Team::singleton(1)),
                (Position::root().child(1), Team::singleton(0)),
            ],
        )
        .unwrap();
        assert!(verify_strategy(&m, &team, &f, &good).unwrap());

        // p assigned to the world where p fails: clause (ii) breaks.
        let bad = Strategy::from_assignments(
            &f,
            &[
                (Position::root(), team.clone()),
                (Position::root().child(0), Team::singleton(0)),
                (Position::root().child(1), Team::singleton(0)),
            ],
        )
        .unwrap();
        assert!(!verify_strategy(&m, &team, &f, &bad).unwrap());
    }

    #[test]
    fn empty_team_all_empty_strategy() {
        let m = two_world_model();
        for text in ["p & ~p", "nab p", "dia p | box p", "nab (p | ~p)"] {
            let f = parse(text).unwrap();
            let all_empty = Strategy {
                teams: vec![Team::empty(); f.node_count()],
            };
            assert!(
                verify_strategy(&m, &Team::empty(), &f, &all_empty).unwrap(),
                "all-empty strategy wins on the empty team for {text}"
            );
        }
    }

    #[test]
    fn find_strategy_agrees_with_eval_on_examples() {
        let m = two_world_model();
        let config = EvalConfig::default();
        let team = Team::from_indices([0, 1]);
        let f = parse("p | ~p").unwrap();
        let found = find_strategy(&m, &team, &f, &config).unwrap();
        let strategy = found.expect("satisfiable");
        assert!(verify_strategy(&m, &team, &f, &strategy).unwrap());

        let f = parse("nab p").unwrap();
        assert!(find_strategy(&m, &Team::singleton(0), &f, &config)
            .unwrap()
            .is_none());
        let any = find_strategy(&m, &Team::empty(), &f, &config)
            .unwrap()
            .expect("empty team always wins");
        assert!(verify_strategy(&m, &Team::empty(), &f, &any).unwrap());
    }

    #[test]
    fn strategies_reject_unsupported_formulas() {
        let m = two_world_model();
        let config = EvalConfig::default();
        for text in ["[p <= ~p]", "p |! ~p"] {
            let f = parse(text).unwrap();
            assert_eq!(
                find_strategy(&m, &Team::empty(), &f, &config).unwrap_err(),
                GameError::UnsupportedConnective
            );
        }
    }

    fn identity_two_worlds() -> KripkeModel {
        KripkeModel::new(
            vec![PropSymbol::new("p").unwrap()],
            vec!["a".into(), "b".into()],
            &[("a".into(), "a".into()), ("b".into(), "b".into())],
            &[("p".into(), vec!["b".into()])],
        )
        .unwrap()
    }

    #[test]
    fn remove_element_keeps_strategy_winning() {
        let m = identity_two_worlds();
        let f = parse("nab p").unwrap();
        let team = Team::from_indices([0, 1]);
        let strategy = Strategy::from_assignments(
            &f,
            &[
                (Position::root(), team.clone()),
                (Position::root().child(0), Team::singleton(1)),
            ],
        )
        .unwrap();
        assert!(verify_strategy(&m, &team, &f, &strategy).unwrap());
        let stripped = remove_element(&m, &f, &strategy, 0).unwrap();
        assert!(verify_strategy(&m, &Team::singleton(1), &f, &stripped).unwrap());

        // Removing the nab witness itself violates the precondition.
        assert_eq!(
            remove_element(&m, &f, &strategy, 1).unwrap_err(),
            GameError::RemovalPrecondition {
                position: Position::root().child(0)
            }
        );
    }

    #[test]
    fn remove_element_requires_identity_relation() {
        let m = two_world_model();
        let f = parse("p | ~p").unwrap();
        let strategy = Strategy {
            teams: vec![Team::empty(); f.node_count()],
        };
        assert_eq!(
            remove_element(&m, &f, &strategy, 0).unwrap_err(),
            GameError::RelationNotIdentity
        );
    }

    #[test]
    fn remove_element_on_disjunction_strategy() {
        let m = identity_two_worlds();
        let f = parse("p | ~p").unwrap();
        let team = Team::from_indices([0, 1]);
        let strategy = Strategy::from_assignments(
            &f,
            &[
                (Position::root(), team.clone()),
                (Position::root().child(0), Team::singleton(1)),
                (Position::root().child(1), Team::singleton(0)),
            ],
        )
        .unwrap();
        assert!(verify_strategy(&m, &team, &f, &strategy).unwrap());
        let stripped = remove_element(&m, &f, &strategy, 0).unwrap();
        assert!(verify_strategy(&m, &Team::singleton(1), &f, &stripped).unwrap());
    }

    #[test]
    fn essential_elements_cases() {
        let (model, team) = lower_bound_witness(2).unwrap();
        let atom = witness_atom(2);
        let config = EvalConfig::default();
        assert_eq!(
            essential_elements(&model, &team, &atom, &config).unwrap(),
            team,
            "every member of the witness team is essential"
        );
        assert_eq!(
            essential_elements(&model, &model.full_team(), &atom, &config).unwrap(),
            Team::empty(),
            "in the full team every pattern appears four times"
        );
        assert_eq!(
            essential_elements(&model, &Team::empty(), &atom, &config).unwrap(),
            Team::empty()
        );
    }

    #[test]
    fn witness_shapes() {
        let (model, team) = lower_bound_witness(1).unwrap();
        assert_eq!(team.names(&model), vec!["w01", "w10"]);
        let (model, team) = lower_bound_witness(2).unwrap();
        assert_eq!(
            team.names(&model),
            vec!["w0001", "w0110", "w1011", "w1100"]
        );
        assert_eq!(model.world_count(), 16);
        assert!(model.relation_is_identity());
        assert!(lower_bound_witness(0).is_err());
        assert!(lower_bound_witness(99).is_err());
    }

    #[test]
    fn audit_produces_certificate_for_small_formulas() {
        let config = EvalConfig::default();
        // One nab occurrence cannot pin a 2-element team.
        let report = audit_lower_bound(&parse("nab top").unwrap(), 1, &config).unwrap();
        assert!(report.certified(), "{report:?}");

        // occ_nabla = 2 = 2^1: the argument no longer applies.
        let enough = parse("nab (p1 & ~q1) & nab (~p1 & q1)").unwrap();
        let report = audit_lower_bound(&enough, 1, &config).unwrap();
        assert!(matches!(report.outcome, AuditOutcome::NoCertificate));

        // A formula failing on the witness team is reported as such.
        let failing = parse("nab (p1 & q1)").unwrap();
        let report = audit_lower_bound(&failing, 1, &config).unwrap();
        assert!(matches!(report.outcome, AuditOutcome::FailsOnWitness));
    }

    #[test]
    fn oversized_search_spaces_error_out() {
        // 64-member team on the arity-6 witness: the nab subset space is
        // unenumerable, so the search must fail with a budget error rather
        // than panic.
        let (model, _) = lower_bound_witness(6).unwrap();
        let full = model.full_team();
        let f = parse("nab p1").unwrap();
        assert!(matches!(
            find_strategy(&model, &full, &f, &EvalConfig::default()),
            Err(GameError::Eval(EvalError::BudgetExceeded { .. }))
        ));
    }

    #[test]
    fn strategy_json_round_trip() {
        let m = two_world_model();
        let f = parse("p | ~p").unwrap();
        let team = Team::from_indices([0, 1]);
        let strategy = find_strategy(&m, &team, &f, &EvalConfig::default())
            .unwrap()
            .unwrap();
        let doc = strategy_to_json(&m, &f, &strategy);
        let back = strategy_from_json(&m, &f, &doc).unwrap();
        assert_eq!(strategy, back);
    }
}
