//! Brute-force closure-property verification over bounded model domains.
//!
//! Each check sweeps every model of the domain (canonical enumeration, no
//! isomorphism reduction), every team, and reports the first counterexample
//! in enumeration order, or a pass. Counterexamples carry the concrete
//! models and teams so they can be re-checked independently with `eval`.

use rayon::prelude::*;

use crate::bisimulation::{BisimClassifier, TeamSignature};
use crate::formulas::{Dialect, Formula, PropSymbol};
use crate::generate::{formula_batch, GenConfig};
use crate::kripke::{enumerate_models, KripkeModel, Team};
use crate::semantics::{EvalConfig, EvalError, EvalMode, Evaluator};

/// A bounded stand-in for the class of all models-with-teams over a fixed
/// proposition set.
#[derive(Clone, Debug)]
pub struct Domain {
    pub max_worlds: usize,
    pub props: Vec<PropSymbol>,
    /// Depth cap for bisimulation-related sweeps (generated formulas keep
    /// their modal depth within this bound).
    pub max_k: u32,
}

impl Domain {
    pub fn new(max_worlds: usize, props: Vec<PropSymbol>, max_k: u32) -> Domain {
        Domain {
            max_worlds,
            props,
            max_k,
        }
    }

    pub fn models(&self) -> Vec<KripkeModel> {
        enumerate_models(self.max_worlds, &self.props).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ClosureProperty {
    Downward,
    Union,
    EmptyTeam,
    BisimInvariance,
}

impl std::fmt::Display for ClosureProperty {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ClosureProperty::Downward => "downward closure",
            ClosureProperty::Union => "union closure",
            ClosureProperty::EmptyTeam => "empty team property",
            ClosureProperty::BisimInvariance => "bisimulation invariance",
        };
        f.write_str(s)
    }
}

#[derive(Clone, Debug)]
#[allow(clippy::large_enum_variant)]
pub enum Counterexample {
    /// `team` satisfies the formula, `subteam ⊆ team` does not.
    Downward {
        model: KripkeModel,
        team: Team,
        subteam: Team,
    },
    /// Both parts satisfy the formula, the union does not.
    Union {
        model: KripkeModel,
        team1: Team,
        team2: Team,
    },
    /// The empty team fails the formula.
    EmptyTeam { model: KripkeModel },
    /// Team-`k`-bisimilar pairs with different verdicts (left satisfies).
    BisimInvariance {
        left_model: KripkeModel,
        left_team: Team,
        right_model: KripkeModel,
        right_team: Team,
        k: u32,
    },
}

#[derive(Clone, Debug)]
pub struct ClosureReport {
    pub property: ClosureProperty,
    pub passed: bool,
    pub counterexample: Option<Counterexample>,
    /// Number of (model, team...) instances inspected.
    pub instances: u64,
}

impl ClosureReport {
    fn pass(property: ClosureProperty, instances: u64) -> ClosureReport {
        ClosureReport {
            property,
            passed: true,
            counterexample: None,
            instances,
        }
    }

    fn fail(property: ClosureProperty, instances: u64, cex: Counterexample) -> ClosureReport {
        ClosureReport {
            property,
            passed: false,
            counterexample: Some(cex),
            instances,
        }
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub struct ClosureOptions {
    pub eval: EvalConfig,
    /// Parallelize per-model work; reporting order stays fixed
    /// (collect, then pick the first counterexample in enumeration order).
    pub parallel: bool,
}

/// Satisfying teams of one model as a membership vector indexed by the
/// team's bit pattern (domains keep models small).
fn sat_vector(
    model: &KripkeModel,
    formula: &Formula,
    config: &EvalConfig,
) -> Result<Vec<bool>, EvalError> {
    let mut session = Evaluator::new(model, formula, *config)?;
    let mut out = Vec::with_capacity(1 << model.world_count());
    for team in model.teams() {
        out.push(session.eval_team(&team)?);
    }
    Ok(out)
}

fn team_key(team: &Team) -> usize {
    team.small_key().expect("domain models fit one word") as usize
}

/// Runs `per_model` over the models, in parallel when asked, and returns
/// the outputs in enumeration order.
fn map_models<T: Send>(
    models: &[KripkeModel],
    parallel: bool,
    per_model: impl Fn(&KripkeModel) -> Result<T, EvalError> + Sync,
) -> Result<Vec<T>, EvalError> {
    if parallel {
        models.par_iter().map(&per_model).collect()
    } else {
        models.iter().map(&per_model).collect()
    }
}

/// Does every subteam of a satisfying team satisfy the formula?
pub fn check_downward(
    formula: &Formula,
    domain: &Domain,
    opts: &ClosureOptions,
) -> Result<ClosureReport, EvalError> {
    let models = domain.models();
    let found = map_models(&models, opts.parallel, |model| {
        let sat = sat_vector(model, formula, &opts.eval)?;
        let mut instances = 0u64;
        for team in model.teams() {
            if !sat[team_key(&team)] {
                continue;
            }
            for sub in team.subsets() {
                instances += 1;
                if !sat[team_key(&sub)] {
                    return Ok((instances, Some((team, sub))));
                }
            }
        }
        Ok((instances, None))
    })?;
    let mut instances = 0;
    for (i, (count, cex)) in found.into_iter().enumerate() {
        instances += count;
        if let Some((team, subteam)) = cex {
            return Ok(ClosureReport::fail(
                ClosureProperty::Downward,
                instances,
                Counterexample::Downward {
                    model: models[i].clone(),
                    team,
                    subteam,
                },
            ));
        }
    }
    Ok(ClosureReport::pass(ClosureProperty::Downward, instances))
}

/// Does the union of two satisfying teams satisfy the formula?
pub fn check_union(
    formula: &Formula,
    domain: &Domain,
    opts: &ClosureOptions,
) -> Result<ClosureReport, EvalError> {
    let models = domain.models();
    let found = map_models(&models, opts.parallel, |model| {
        let sat = sat_vector(model, formula, &opts.eval)?;
        let teams: Vec<Team> = model.teams().collect();
        let mut instances = 0u64;
        for t1 in &teams {
            if !sat[team_key(t1)] {
                continue;
            }
            for t2 in &teams {
                if !sat[team_key(t2)] {
                    continue;
                }
                instances += 1;
                if !sat[team_key(&t1.union(t2))] {
                    return Ok((instances, Some((t1.clone(), t2.clone()))));
                }
            }
        }
        Ok((instances, None))
    })?;
    let mut instances = 0;
    for (i, (count, cex)) in found.into_iter().enumerate() {
        instances += count;
        if let Some((team1, team2)) = cex {
            return Ok(ClosureReport::fail(
                ClosureProperty::Union,
                instances,
                Counterexample::Union {
                    model: models[i].clone(),
                    team1,
                    team2,
                },
            ));
        }
    }
    Ok(ClosureReport::pass(ClosureProperty::Union, instances))
}

/// Does the empty team satisfy the formula in every model?
pub fn check_empty_team(
    formula: &Formula,
    domain: &Domain,
    opts: &ClosureOptions,
) -> Result<ClosureReport, EvalError> {
    let models = domain.models();
    let found = map_models(&models, opts.parallel, |model| {
        let mut session = Evaluator::new(model, formula, opts.eval)?;
        session.eval_team(&Team::empty())
    })?;
    for (i, ok) in found.into_iter().enumerate() {
        if !ok {
            return Ok(ClosureReport::fail(
                ClosureProperty::EmptyTeam,
                i as u64 + 1,
                Counterexample::EmptyTeam {
                    model: models[i].clone(),
                },
            ));
        }
    }
    Ok(ClosureReport::pass(
        ClosureProperty::EmptyTeam,
        models.len() as u64,
    ))
}

/// Do team-`k`-bisimilar pairs (across all domain models) agree on the
/// formula? Pairs are grouped by canonical team signature; within a group
/// every verdict must match the first one seen.
pub fn check_bisim_invariance(
    formula: &Formula,
    k: u32,
    domain: &Domain,
    opts: &ClosureOptions,
) -> Result<ClosureReport, EvalError> {
    let models = domain.models();
    let verdicts = map_models(&models, opts.parallel, |model| {
        sat_vector(model, formula, &opts.eval)
    })?;
    let mut classifier = BisimClassifier::new(&domain.props);
    let mut first_seen: std::collections::HashMap<TeamSignature, (usize, Team, bool)> =
        std::collections::HashMap::new();
    let mut instances = 0u64;
    for (i, model) in models.iter().enumerate() {
        let classes = classifier.point_classes(model, k);
        for team in model.teams() {
            instances += 1;
            let mut sig: TeamSignature = team.iter().map(|w| classes[w]).collect();
            sig.sort_unstable();
            sig.dedup();
            let verdict = verdicts[i][team_key(&team)];
            match first_seen.get(&sig) {
                None => {
                    first_seen.insert(sig, (i, team, verdict));
                }
                Some(&(j, ref witness, previous)) if previous != verdict => {
                    // Orient the counterexample so the left side satisfies.
                    let (li, lt, ri, rt) = if previous {
                        (j, witness.clone(), i, team)
                    } else {
                        (i, team, j, witness.clone())
                    };
                    return Ok(ClosureReport::fail(
                        ClosureProperty::BisimInvariance,
                        instances,
                        Counterexample::BisimInvariance {
                            left_model: models[li].clone(),
                            left_team: lt,
                            right_model: models[ri].clone(),
                            right_team: rt,
                            k,
                        },
                    ));
                }
                Some(_) => {}
            }
        }
    }
    Ok(ClosureReport::pass(
        ClosureProperty::BisimInvariance,
        instances,
    ))
}

// --- generated-formula suite ---

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub dialect: Dialect,
    pub formula_count: usize,
    pub seed: u64,
    pub domain: Domain,
    pub max_nodes: usize,
}

impl SuiteConfig {
    pub fn new(dialect: Dialect, formula_count: usize, seed: u64, domain: Domain) -> SuiteConfig {
        SuiteConfig {
            dialect,
            formula_count,
            seed,
            domain,
            max_nodes: 12,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SuiteFailure {
    pub formula: Formula,
    pub property: String,
    pub detail: String,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteReport {
    pub formula_count: usize,
    pub models_checked: usize,
    pub instances: u64,
    pub failures: Vec<SuiteFailure>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks the closure laws on a batch of generated formulas: flatness and
/// downward closure for plain ML, union closure, the empty team property,
/// and bisimulation invariance at `k = md(formula)` for every dialect.
pub fn run_property_suite(
    cfg: &SuiteConfig,
    opts: &ClosureOptions,
) -> Result<SuiteReport, EvalError> {
    let gen_cfg = GenConfig::new(cfg.dialect, cfg.domain.props.clone())
        .with_size(cfg.domain.max_k, cfg.max_nodes);
    let formulas = formula_batch(&gen_cfg, cfg.seed, cfg.formula_count);
    let models = cfg.domain.models();
    let mut report = SuiteReport {
        formula_count: formulas.len(),
        models_checked: models.len(),
        ..Default::default()
    };

    // Pointwise truth per (model, world) is only meaningful for plain ML.
    let flat_mode = cfg.dialect == Dialect::Ml;

    let mut classifier = BisimClassifier::new(&cfg.domain.props);
    for formula in &formulas {
        let eval_cfg = if flat_mode {
            EvalConfig {
                mode: EvalMode::Reference,
                ..opts.eval
            }
        } else {
            opts.eval
        };
        let per_model = map_models(&models, opts.parallel, |model| {
            let sat = sat_vector(model, formula, &eval_cfg)?;
            let flat_ok = if flat_mode {
                let mut point = Evaluator::new(model, formula, EvalConfig::default())?;
                let pointwise: Vec<bool> = (0..model.world_count())
                    .map(|w| point.eval_point(w))
                    .collect::<Result<_, _>>()?;
                model
                    .teams()
                    .all(|t| sat[team_key(&t)] == t.iter().all(|w| pointwise[w]))
            } else {
                true
            };
            Ok((sat, flat_ok))
        })?;

        let mut first_seen: std::collections::HashMap<TeamSignature, bool> =
            std::collections::HashMap::new();
        let k = formula.modal_depth();
        for (i, (sat, flat_ok)) in per_model.iter().enumerate() {
            let model = &models[i];
            report.instances += sat.len() as u64;
            if !flat_ok {
                report.failures.push(SuiteFailure {
                    formula: formula.clone(),
                    property: "flatness".into(),
                    detail: format!("model #{i}: team verdict differs from pointwise"),
                });
            }
            if !sat[0] {
                report.failures.push(SuiteFailure {
                    formula: formula.clone(),
                    property: "empty team".into(),
                    detail: format!("model #{i}: empty team fails"),
                });
            }
            let teams: Vec<Team> = model.teams().collect();
            for t1 in &teams {
                if !sat[team_key(t1)] {
                    continue;
                }
                if flat_mode {
                    for sub in t1.subsets() {
                        if !sat[team_key(&sub)] {
                            report.failures.push(SuiteFailure {
                                formula: formula.clone(),
                                property: "downward closure".into(),
                                detail: format!(
                                    "model #{i}: {:?} satisfies but subteam {:?} fails",
                                    t1, sub
                                ),
                            });
                        }
                    }
                }
                for t2 in &teams {
                    if sat[team_key(t2)] && !sat[team_key(&t1.union(t2))] {
                        report.failures.push(SuiteFailure {
                            formula: formula.clone(),
                            property: "union closure".into(),
                            detail: format!(
                                "model #{i}: union of {:?} and {:?} fails",
                                t1, t2
                            ),
                        });
                    }
                }
            }
            let classes = classifier.point_classes(model, k);
            for team in &teams {
                let mut sig: TeamSignature = team.iter().map(|w| classes[w]).collect();
                sig.sort_unstable();
                sig.dedup();
                let verdict = sat[team_key(team)];
                match first_seen.get(&sig) {
                    None => {
                        first_seen.insert(sig, verdict);
                    }
                    Some(&previous) if previous != verdict => {
                        report.failures.push(SuiteFailure {
                            formula: formula.clone(),
                            property: "bisimulation invariance".into(),
                            detail: format!(
                                "model #{i}: team {:?} disagrees with an earlier \
                                 {k}-bisimilar team",
                                team
                            ),
                        });
                    }
                    Some(_) => {}
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulas::parse;
    use crate::semantics::eval;

    fn domain() -> Domain {
        Domain::new(2, vec![PropSymbol::new("p").unwrap()], 2)
    }

    fn reverify(cex: &Counterexample, formula: &Formula) {
        let config = EvalConfig::reference();
        match cex {
            Counterexample::Downward {
                model,
                team,
                subteam,
            } => {
                assert!(subteam.is_subset(team));
                assert!(eval(model, team, formula, &config).unwrap());
                assert!(!eval(model, subteam, formula, &config).unwrap());
            }
            Counterexample::Union {
                model,
                team1,
                team2,
            } => {
                assert!(eval(model, team1, formula, &config).unwrap());
                assert!(eval(model, team2, formula, &config).unwrap());
                assert!(!eval(model, &team1.union(team2), formula, &config).unwrap());
            }
            Counterexample::EmptyTeam { model } => {
                assert!(!eval(model, &Team::empty(), formula, &config).unwrap());
            }
            Counterexample::BisimInvariance {
                left_model,
                left_team,
                right_model,
                right_team,
                k,
            } => {
                assert!(crate::bisimulation::team_k_bisimilar(
                    left_model, left_team, right_model, right_team, *k
                )
                .unwrap());
                assert!(eval(left_model, left_team, formula, &config).unwrap());
                assert!(!eval(right_model, right_team, formula, &config).unwrap());
            }
        }
    }

    #[test]
    fn inclusion_atom_is_not_downward_closed() {
        let formula = parse("[p <= ~p]").unwrap();
        let report = check_downward(&formula, &domain(), &ClosureOptions::default()).unwrap();
        assert!(!report.passed);
        let cex = report.counterexample.unwrap();
        reverify(&cex, &formula);
        if let Counterexample::Downward { team, subteam, .. } = &cex {
            assert_eq!(team.len(), 2);
            assert_eq!(subteam.len(), 1);
        } else {
            panic!("wrong counterexample kind");
        }
    }

    #[test]
    fn nonemptiness_is_not_downward_closed() {
        let formula = parse("nab p").unwrap();
        let report = check_downward(&formula, &domain(), &ClosureOptions::default()).unwrap();
        assert!(!report.passed);
        reverify(&report.counterexample.unwrap(), &formula);
    }

    #[test]
    fn plain_ml_is_downward_closed() {
        let formula = parse("p").unwrap();
        let report = check_downward(&formula, &domain(), &ClosureOptions::default()).unwrap();
        assert!(report.passed, "plain ML formulas are downward closed");
    }

    #[test]
    fn union_closure_of_extensions() {
        let opts = ClosureOptions::default();
        let wide = Domain::new(2, domain_props_4(), 2);
        let formula = parse("[p1,p2 <= q1,q2]").unwrap();
        assert!(check_union(&formula, &wide, &opts).unwrap().passed);
        let formula = parse("nab p").unwrap();
        assert!(check_union(&formula, &domain(), &opts).unwrap().passed);
        let empty_domain = Domain::new(0, vec![], 0);
        let formula = parse("top").unwrap();
        let report = check_union(&formula, &empty_domain, &opts).unwrap();
        assert!(report.passed);
    }

    fn domain_props_4() -> Vec<PropSymbol> {
        ["p1", "p2", "q1", "q2"]
            .iter()
            .map(|p| PropSymbol::new(*p).unwrap())
            .collect()
    }

    #[test]
    fn empty_team_property_checks() {
        let opts = ClosureOptions::default();
        for text in ["[p <= ~p]", "bot", "nab (p & ~p)"] {
            let formula = parse(text).unwrap();
            assert!(
                check_empty_team(&formula, &domain(), &opts).unwrap().passed,
                "{text}"
            );
        }
    }

    #[test]
    fn bisim_invariance_at_modal_depth() {
        let opts = ClosureOptions::default();
        let formula = parse("[p <= ~p]").unwrap();
        assert!(
            check_bisim_invariance(&formula, 0, &domain(), &opts)
                .unwrap()
                .passed
        );
        let formula = parse("nab dia p").unwrap();
        assert!(
            check_bisim_invariance(&formula, 1, &domain(), &opts)
                .unwrap()
                .passed
        );
    }

    #[test]
    fn depth_one_formula_fails_depth_zero_invariance() {
        let formula = parse("dia p").unwrap();
        let report =
            check_bisim_invariance(&formula, 0, &domain(), &ClosureOptions::default()).unwrap();
        assert!(!report.passed);
        reverify(&report.counterexample.unwrap(), &formula);
    }

    #[test]
    fn parallel_run_reports_identical_counterexample() {
        let formula = parse("[p <= ~p]").unwrap();
        let serial = check_downward(&formula, &domain(), &ClosureOptions::default()).unwrap();
        let parallel = check_downward(
            &formula,
            &domain(),
            &ClosureOptions {
                parallel: true,
                ..Default::default()
            },
        )
        .unwrap();
        match (
            serial.counterexample.unwrap(),
            parallel.counterexample.unwrap(),
        ) {
            (
                Counterexample::Downward {
                    model: m1,
                    team: t1,
                    subteam: s1,
                },
                Counterexample::Downward {
                    model: m2,
                    team: t2,
                    subteam: s2,
                },
            ) => {
                assert_eq!(m1, m2);
                assert_eq!(t1, t2);
                assert_eq!(s1, s2);
            }
            _ => panic!("wrong counterexample kinds"),
        }
    }

    #[test]
    fn union_closure_over_triples() {
        // Binary checks imply finite unions; spot-check triples directly.
        let formulas = ["[p <= ~p]", "nab p", "p |! ~p", "dia p | nab ~p"];
        let models = domain().models();
        let config = EvalConfig::default();
        for text in formulas {
            let formula = parse(text).unwrap();
            for model in &models {
                let sat: Vec<Team> =
                    crate::semantics::satisfying_teams(model, &formula, &config).unwrap();
                for a in &sat {
                    for b in &sat {
                        for c in &sat {
                            let union = a.union(b).union(c);
                            assert!(
                                eval(model, &union, &formula, &config).unwrap(),
                                "{text}: triple union must satisfy"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn small_suite_passes_per_dialect() {
        for dialect in [Dialect::Ml, Dialect::Minc, Dialect::MlNab, Dialect::MlNeDisj] {
            let cfg = SuiteConfig::new(dialect, 40, 11, domain());
            let report = run_property_suite(&cfg, &ClosureOptions::default()).unwrap();
            assert!(
                report.passed(),
                "dialect {dialect:?} failures: {:?}",
                report.failures
            );
            assert_eq!(report.formula_count, 40);
        }
    }
}
