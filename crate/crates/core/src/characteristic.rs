//! Characteristic formulas.
//!
//! `hintikka` builds the depth-`k` characteristic formula of a pointed
//! model; it is satisfied at a point exactly by the `k`-bisimilar points.
//! On top of it, `eta` describes range totality of a team (every member of
//! the evaluated team is `k`-bisimilar to some member of the described
//! team), and `psi` (with unary inclusion atoms) and `zeta` (with the
//! nonemptiness operator) both tighten `eta` into a full description:
//! a team satisfies them exactly when it is empty or team-`k`-bisimilar to
//! the described team. `synthesize` disjoins such descriptions over a
//! finite sample of (model, team) pairs, defining the closure of the sample
//! under unions, team bisimilarity, and the empty team.
//!
//! Empty big operators follow the conventions: an empty conjunction is
//! `top`, an empty disjunction is `bot`. By default those constants are
//! primitive; `BotEncoding::LiteralPair` instead spells them `p | ~p` and
//! `p & ~p` over the first declared proposition.

use thiserror::Error;

use crate::formulas::Formula;
use crate::kripke::{KripkeModel, ModelError, Team};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharError {
    #[error("literal-pair encoding requires at least one declared proposition")]
    LiteralPairNeedsProp,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// How `top`/`bot` are spelled in generated formulas.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BotEncoding {
    #[default]
    Constant,
    /// `p | ~p` and `p & ~p` over the first declared proposition.
    LiteralPair,
}

/// Which extension the synthesized description uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CharDialect {
    /// Unary inclusion atoms (`psi`).
    Minc,
    /// Nonemptiness operators (`zeta`).
    MlNab,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct CharOptions {
    pub bot_encoding: BotEncoding,
    /// Drop the valid diagonal atoms `[x <= x]` from `psi`.
    pub minimize: bool,
}

/// Per-model cache of Hintikka formulas, level by level.
pub struct HintikkaTable<'m> {
    model: &'m KripkeModel,
    levels: Vec<Vec<Formula>>,
}

impl<'m> HintikkaTable<'m> {
    pub fn new(model: &'m KripkeModel) -> HintikkaTable<'m> {
        HintikkaTable {
            model,
            levels: Vec::new(),
        }
    }

    pub fn get(&mut self, world: usize, k: u32) -> &Formula {
        self.ensure(k);
        &self.levels[k as usize][world]
    }

    fn ensure(&mut self, k: u32) {
        if self.levels.is_empty() {
            self.levels.push(self.base_level());
        }
        while self.levels.len() <= k as usize {
            let prev = self.levels.last().unwrap();
            let next = (0..self.model.world_count())
                .map(|w| self.step(w, prev))
                .collect();
            self.levels.push(next);
        }
    }

    /// Depth 0: the conjunction of positive then negative literals, each
    /// group in sorted proposition order.
    fn base_level(&self) -> Vec<Formula> {
        let mut prop_order: Vec<usize> = (0..self.model.props().len()).collect();
        prop_order.sort_by_key(|&i| self.model.props()[i].name());
        (0..self.model.world_count())
            .map(|w| {
                let mut parts = Vec::new();
                for &pi in &prop_order {
                    if self.model.prop_worlds(pi).contains(w) {
                        parts.push(Formula::Prop(self.model.props()[pi].clone()));
                    }
                }
                for &pi in &prop_order {
                    if !self.model.prop_worlds(pi).contains(w) {
                        parts.push(Formula::NegProp(self.model.props()[pi].clone()));
                    }
                }
                Formula::big_and(parts)
            })
            .collect()
    }

    /// Depth k+1: previous formula, a diamond per distinct successor
    /// formula, and a box over their disjunction (`box bot` when there are
    /// no successors).
    fn step(&self, world: usize, prev: &[Formula]) -> Formula {
        let mut succ: Vec<Formula> = self
            .model
            .successors(world)
            .iter()
            .map(|v| prev[v].clone())
            .collect();
        succ.sort();
        succ.dedup();
        let mut parts = vec![prev[world].clone()];
        parts.extend(succ.iter().cloned().map(Formula::dia));
        parts.push(Formula::box_(Formula::big_or(succ)));
        Formula::big_and(parts)
    }
}

/// The depth-`k` characteristic formula of the pointed model `(K, w)`.
pub fn hintikka(model: &KripkeModel, world: usize, k: u32) -> Result<Formula, CharError> {
    model.check_world(world)?;
    Ok(HintikkaTable::new(model).get(world, k).clone())
}

fn bot_for(model: &KripkeModel, opts: &CharOptions) -> Result<Formula, CharError> {
    match opts.bot_encoding {
        BotEncoding::Constant => Ok(Formula::Bot),
        BotEncoding::LiteralPair => {
            let p = model
                .props()
                .first()
                .ok_or(CharError::LiteralPairNeedsProp)?;
            Ok(Formula::and(
                Formula::Prop(p.clone()),
                Formula::NegProp(p.clone()),
            ))
        }
    }
}

/// Rewrites the primitive constants into literal pairs over the first
/// declared proposition.
fn encode_constants(f: &Formula, model: &KripkeModel) -> Result<Formula, CharError> {
    let p = model
        .props()
        .first()
        .ok_or(CharError::LiteralPairNeedsProp)?
        .clone();
    fn walk(f: &Formula, p: &crate::formulas::PropSymbol) -> Formula {
        match f {
            Formula::Top => Formula::or(Formula::Prop(p.clone()), Formula::NegProp(p.clone())),
            Formula::Bot => Formula::and(Formula::Prop(p.clone()), Formula::NegProp(p.clone())),
            Formula::Prop(_) | Formula::NegProp(_) => f.clone(),
            Formula::And(a, b) => Formula::and(walk(a, p), walk(b, p)),
            Formula::Or(a, b) => Formula::or(walk(a, p), walk(b, p)),
            Formula::NeDisj(a, b) => Formula::nedisj(walk(a, p), walk(b, p)),
            Formula::Dia(a) => Formula::dia(walk(a, p)),
            Formula::Box(a) => Formula::box_(walk(a, p)),
            Formula::Nab(a) => Formula::nab(walk(a, p)),
            Formula::Incl(lhs, rhs) => Formula::Incl(
                lhs.iter().map(|a| walk(a, p)).collect(),
                rhs.iter().map(|a| walk(a, p)).collect(),
            ),
        }
    }
    Ok(walk(f, &p))
}

fn finish(f: Formula, model: &KripkeModel, opts: &CharOptions) -> Result<Formula, CharError> {
    match opts.bot_encoding {
        BotEncoding::Constant => Ok(f),
        BotEncoding::LiteralPair => encode_constants(&f, model),
    }
}

/// Distinct member Hintikka formulas in canonical (sorted) order, so that
/// team-bisimilar teams produce structurally identical descriptions.
fn distinct_member_formulas(
    table: &mut HintikkaTable<'_>,
    team: &Team,
    k: u32,
) -> Vec<Formula> {
    let mut out: Vec<Formula> = team.iter().map(|w| table.get(w, k).clone()).collect();
    out.sort();
    out.dedup();
    out
}

/// Range-totality formula: `K',T'` satisfies it iff every member of `T'`
/// is `k`-bisimilar to some member of `team`. The empty team is described
/// by `bot`.
pub fn eta(
    model: &KripkeModel,
    team: &Team,
    k: u32,
    opts: &CharOptions,
) -> Result<Formula, CharError> {
    model.check_team(team)?;
    if team.is_empty() {
        return bot_for(model, opts);
    }
    let mut table = HintikkaTable::new(model);
    let parts = distinct_member_formulas(&mut table, team, k);
    finish(Formula::big_or(parts), model, opts)
}

/// Inclusion-logic description of `(model, team)` at depth `k`: satisfied
/// by exactly the empty team and the team-`k`-bisimilar teams.
pub fn psi(
    model: &KripkeModel,
    team: &Team,
    k: u32,
    opts: &CharOptions,
) -> Result<Formula, CharError> {
    model.check_team(team)?;
    if team.is_empty() {
        return bot_for(model, opts);
    }
    let mut table = HintikkaTable::new(model);
    let distinct = distinct_member_formulas(&mut table, team, k);
    let mut parts = vec![Formula::big_or(distinct.clone())];
    for u in &distinct {
        for v in &distinct {
            if opts.minimize && u == v {
                continue;
            }
            parts.push(Formula::Incl(vec![u.clone()], vec![v.clone()]));
        }
    }
    finish(Formula::big_and(parts), model, opts)
}

/// Nonemptiness-operator description of `(model, team)` at depth `k`; same
/// contract as [`psi`].
pub fn zeta(
    model: &KripkeModel,
    team: &Team,
    k: u32,
    opts: &CharOptions,
) -> Result<Formula, CharError> {
    model.check_team(team)?;
    if team.is_empty() {
        return bot_for(model, opts);
    }
    let mut table = HintikkaTable::new(model);
    let distinct = distinct_member_formulas(&mut table, team, k);
    let mut parts = vec![Formula::big_or(distinct.clone())];
    parts.extend(distinct.into_iter().map(Formula::nab));
    finish(Formula::big_and(parts), model, opts)
}

/// Disjoins the per-pair descriptions, dropping structural duplicates. A
/// team satisfies the result iff it is a union of subteams, each empty or
/// team-`k`-bisimilar to a listed pair. The empty list yields `bot`, the
/// description of the empty-team-only class.
pub fn synthesize(
    pairs: &[(&KripkeModel, &Team)],
    k: u32,
    dialect: CharDialect,
    opts: &CharOptions,
) -> Result<Formula, CharError> {
    let mut parts: Vec<Formula> = Vec::new();
    let inner = CharOptions {
        bot_encoding: BotEncoding::Constant,
        minimize: opts.minimize,
    };
    for (model, team) in pairs {
        let description = match dialect {
            CharDialect::Minc => psi(model, team, k, &inner)?,
            CharDialect::MlNab => zeta(model, team, k, &inner)?,
        };
        if !parts.contains(&description) {
            parts.push(description);
        }
    }
    let result = Formula::big_or(parts);
    match opts.bot_encoding {
        BotEncoding::Constant => Ok(result),
        BotEncoding::LiteralPair => {
            let model = pairs
                .first()
                .map(|(m, _)| *m)
                .ok_or(CharError::LiteralPairNeedsProp)?;
            encode_constants(&result, model)
        }
    }
}
