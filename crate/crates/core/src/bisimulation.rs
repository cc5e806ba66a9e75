//! Bounded bisimulation.
//!
//! `k_bisimilar` relates pointed models: at depth 0 both points satisfy the
//! same propositions, and at depth `k+1` additionally every successor on
//! either side has a depth-`k` bisimilar partner on the other. Team
//! `k`-bisimilarity lifts this with domain and range totality: every member
//! of either team has a `k`-bisimilar partner in the other.
//!
//! Proposition agreement is taken over the union of the two models'
//! declared propositions; a proposition missing from a model holds nowhere
//! in it.

use std::collections::HashMap;

use crate::formulas::PropSymbol;
use crate::kripke::{KripkeModel, ModelError, Team};

/// Pairwise point bisimilarity between two models at a fixed depth,
/// computed bottom-up. Reused when many teams of the same model pair are
/// compared.
pub struct TeamBisimChecker<'a> {
    left: &'a KripkeModel,
    right: &'a KripkeModel,
    /// `table[w * right_count + w']` = left `w` and right `w'` are
    /// `k`-bisimilar.
    table: Vec<bool>,
}

impl<'a> TeamBisimChecker<'a> {
    pub fn new(left: &'a KripkeModel, right: &'a KripkeModel, k: u32) -> TeamBisimChecker<'a> {
        let ln = left.world_count();
        let rn = right.world_count();
        let mut prop_names: Vec<&str> = left
            .props()
            .iter()
            .chain(right.props().iter())
            .map(PropSymbol::name)
            .collect();
        prop_names.sort_unstable();
        prop_names.dedup();

        // Depth 0: identical proposition satisfaction.
        let mut table = vec![false; ln * rn];
        for w in 0..ln {
            for v in 0..rn {
                table[w * rn + v] = prop_names.iter().all(|p| {
                    let in_left = left
                        .prop_index(p)
                        .is_some_and(|i| left.prop_worlds(i).contains(w));
                    let in_right = right
                        .prop_index(p)
                        .is_some_and(|i| right.prop_worlds(i).contains(v));
                    in_left == in_right
                });
            }
        }
        let base = table.clone();
        for _ in 0..k {
            let prev = table;
            table = vec![false; ln * rn];
            for w in 0..ln {
                for v in 0..rn {
                    if !base[w * rn + v] {
                        continue;
                    }
                    let forth = left.successors(w).iter().all(|w2| {
                        right.successors(v).iter().any(|v2| prev[w2 * rn + v2])
                    });
                    let back = forth
                        && right.successors(v).iter().all(|v2| {
                            left.successors(w).iter().any(|w2| prev[w2 * rn + v2])
                        });
                    table[w * rn + v] = back;
                }
            }
        }
        TeamBisimChecker { left, right, table }
    }

    pub fn points_bisimilar(&self, w: usize, v: usize) -> bool {
        self.table[w * self.right.world_count() + v]
    }

    /// Domain and range totality over the precomputed point relation.
    pub fn teams_bisimilar(&self, t: &Team, t2: &Team) -> bool {
        let domain = t
            .iter()
            .all(|w| t2.iter().any(|v| self.points_bisimilar(w, v)));
        domain
            && t2
                .iter()
                .all(|v| t.iter().any(|w| self.points_bisimilar(w, v)))
    }

    pub fn left(&self) -> &KripkeModel {
        self.left
    }

    pub fn right(&self) -> &KripkeModel {
        self.right
    }
}

/// `K,w` and `K',w'` are `k`-bisimilar.
pub fn k_bisimilar(
    left: &KripkeModel,
    w: usize,
    right: &KripkeModel,
    v: usize,
    k: u32,
) -> Result<bool, ModelError> {
    left.check_world(w)?;
    right.check_world(v)?;
    Ok(TeamBisimChecker::new(left, right, k).points_bisimilar(w, v))
}

/// `K,T` and `K',T'` are team `k`-bisimilar.
pub fn team_k_bisimilar(
    left: &KripkeModel,
    t: &Team,
    right: &KripkeModel,
    t2: &Team,
    k: u32,
) -> Result<bool, ModelError> {
    left.check_team(t)?;
    right.check_team(t2)?;
    Ok(TeamBisimChecker::new(left, right, k).teams_bisimilar(t, t2))
}

/// Canonical signature of a team under `k`-bisimulation: the sorted set of
/// interned point classes of its members.
pub type TeamSignature = Vec<u32>;

/// Interns bounded-bisimulation classes so that worlds of *different*
/// models can be compared by class id: two worlds get the same id at depth
/// `k` exactly when they are `k`-bisimilar. Classification is relative to
/// the classifier's proposition list, fixed at construction.
pub struct BisimClassifier {
    prop_names: Vec<String>,
    level0: HashMap<u64, u32>,
    /// One interner per depth >= 1, keyed by (base class, sorted distinct
    /// successor classes one level down).
    steps: Vec<HashMap<(u32, Vec<u32>), u32>>,
    next_id: u32,
}

impl BisimClassifier {
    pub fn new(props: &[PropSymbol]) -> BisimClassifier {
        assert!(props.len() <= 64, "too many propositions to classify");
        let mut prop_names: Vec<String> =
            props.iter().map(|p| p.name().to_string()).collect();
        prop_names.sort_unstable();
        prop_names.dedup();
        BisimClassifier {
            prop_names,
            level0: HashMap::new(),
            steps: Vec::new(),
            next_id: 0,
        }
    }

    fn fresh(&mut self) -> u32 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// The `k`-bisimulation class of every world of the model.
    pub fn point_classes(&mut self, model: &KripkeModel, k: u32) -> Vec<u32> {
        let n = model.world_count();
        let world_bits: Vec<u64> = (0..n)
            .map(|w| {
                let mut bits = 0u64;
                for (i, p) in self.prop_names.iter().enumerate() {
                    if model
                        .prop_index(p)
                        .is_some_and(|pi| model.prop_worlds(pi).contains(w))
                    {
                        bits |= 1 << i;
                    }
                }
                bits
            })
            .collect();
        let mut classes: Vec<u32> = world_bits
            .into_iter()
            .map(|bits| {
                if let Some(&id) = self.level0.get(&bits) {
                    id
                } else {
                    let id = self.fresh();
                    self.level0.insert(bits, id);
                    id
                }
            })
            .collect();
        let base = classes.clone();
        for level in 1..=k as usize {
            if self.steps.len() < level {
                self.steps.push(HashMap::new());
            }
            classes = (0..n)
                .map(|w| {
                    let mut succ: Vec<u32> =
                        model.successors(w).iter().map(|v| classes[v]).collect();
                    succ.sort_unstable();
                    succ.dedup();
                    (base[w], succ)
                })
                .collect::<Vec<_>>()
                .into_iter()
                .map(|key| {
                    if let Some(&id) = self.steps[level - 1].get(&key) {
                        id
                    } else {
                        let id = self.fresh();
                        self.steps[level - 1].insert(key, id);
                        id
                    }
                })
                .collect();
        }
        classes
    }

    /// Sorted distinct member classes; two teams (of any models classified
    /// by this classifier) are team `k`-bisimilar iff their signatures are
    /// equal.
    pub fn team_signature(&mut self, model: &KripkeModel, team: &Team, k: u32) -> TeamSignature {
        let classes = self.point_classes(model, k);
        let mut sig: Vec<u32> = team.iter().map(|w| classes[w]).collect();
        sig.sort_unstable();
        sig.dedup();
        sig
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kripke::enumerate_models;

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
    fn reflexive_at_any_depth() {
        let m = two_world_model();
        for k in 0..4 {
            assert!(k_bisimilar(&m, 0, &m, 0, k).unwrap());
            assert!(k_bisimilar(&m, 1, &m, 1, k).unwrap());
        }
    }

    #[test]
    fn valuation_difference_breaks_depth_zero() {
        let m = two_world_model();
        assert!(!k_bisimilar(&m, 0, &m, 1, 0).unwrap());
    }

    #[test]
    fn successor_structure_shows_up_at_depth_one() {
        let looping = KripkeModel::new(
            vec![PropSymbol::new("p").unwrap()],
            vec!["u".into()],
            &[("u".into(), "u".into())],
            &[],
        )
        .unwrap();
        let stuck = KripkeModel::new(
            vec![PropSymbol::new("p").unwrap()],
            vec!["x".into()],
            &[],
            &[],
        )
        .unwrap();
        assert!(k_bisimilar(&looping, 0, &stuck, 0, 0).unwrap());
        assert!(!k_bisimilar(&looping, 0, &stuck, 0, 1).unwrap());
    }

    #[test]
    fn team_bisimilarity_edge_cases() {
        let m = two_world_model();
        let t = Team::from_indices([0, 1]);
        assert!(team_k_bisimilar(&m, &t, &m, &t, 3).unwrap());
        assert!(team_k_bisimilar(&m, &Team::empty(), &m, &Team::empty(), 2).unwrap());
        assert!(!team_k_bisimilar(&m, &Team::empty(), &m, &t, 0).unwrap());
        assert!(!team_k_bisimilar(&m, &Team::singleton(0), &m, &Team::singleton(1), 0).unwrap());
    }

    #[test]
    fn world_bounds_checked() {
        let m = two_world_model();
        assert!(k_bisimilar(&m, 7, &m, 0, 1).is_err());
        assert!(team_k_bisimilar(&m, &Team::singleton(9), &m, &Team::empty(), 0).is_err());
    }

    fn small_pairs() -> Vec<(KripkeModel, Vec<Team>)> {
        let props = [PropSymbol::new("p").unwrap()];
        enumerate_models(2, &props)
            .map(|m| {
                let teams: Vec<Team> = m.teams().collect();
                (m, teams)
            })
            .collect()
    }

    #[test]
    fn monotone_in_depth() {
        // Team k-bisimilarity implies team n-bisimilarity for all n <= k.
        let instances = small_pairs();
        for (m1, teams1) in &instances {
            for (m2, teams2) in &instances {
                let checkers: Vec<TeamBisimChecker> =
                    (0..=3).map(|k| TeamBisimChecker::new(m1, m2, k)).collect();
                for t1 in teams1 {
                    for t2 in teams2 {
                        for k in (1..=3usize).rev() {
                            if checkers[k].teams_bisimilar(t1, t2) {
                                for (n, checker) in checkers.iter().enumerate().take(k) {
                                    assert!(
                                        checker.teams_bisimilar(t1, t2),
                                        "k={k} holds but n={n} fails"
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn transfer_to_successor_teams() {
        // If (K,T) and (K',T') are team (k+1)-bisimilar, then: every S with
        // T[R]S has a partner S' with T'[R']S' that is team k-bisimilar
        // (and vice versa); the images are team k-bisimilar; and every
        // cover of T is matched by a cover of T' at depth k+1.
        use crate::kripke::{image, step_rel};
        let instances = small_pairs();
        let k = 1u32;
        for (m1, teams1) in &instances {
            for (m2, teams2) in &instances {
                let deep = TeamBisimChecker::new(m1, m2, k + 1);
                let shallow = TeamBisimChecker::new(m1, m2, k);
                for t1 in teams1 {
                    for t2 in teams2 {
                        if !deep.teams_bisimilar(t1, t2) {
                            continue;
                        }
                        // (i) forth over team steps
                        for s in teams1 {
                            if step_rel(m1, t1, s).unwrap() {
                                assert!(
                                    teams2.iter().any(|s2| step_rel(m2, t2, s2).unwrap()
                                        && shallow.teams_bisimilar(s, s2)),
                                    "no partner for step team"
                                );
                            }
                        }
                        // (ii) back over team steps
                        for s2 in teams2 {
                            if step_rel(m2, t2, s2).unwrap() {
                                assert!(
                                    teams1.iter().any(|s| step_rel(m1, t1, s).unwrap()
                                        && shallow.teams_bisimilar(s, s2)),
                                    "no partner for step team (back)"
                                );
                            }
                        }
                        // (iii) images stay bisimilar
                        assert!(shallow.teams_bisimilar(
                            &image(m1, t1).unwrap(),
                            &image(m2, t2).unwrap()
                        ));
                        // (iv) covers are matched at full depth
                        for t1a in t1.subsets() {
                            for t1b in t1.subsets() {
                                if t1a.union(&t1b) != *t1 {
                                    continue;
                                }
                                let matched = t2.subsets().any(|t2a| {
                                    t2.subsets().any(|t2b| {
                                        t2a.union(&t2b) == *t2
                                            && deep.teams_bisimilar(&t1a, &t2a)
                                            && deep.teams_bisimilar(&t1b, &t2b)
                                    })
                                });
                                assert!(matched, "cover not matched");
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn classifier_matches_pairwise_checker() {
        let props = [PropSymbol::new("p").unwrap()];
        let models: Vec<KripkeModel> = enumerate_models(2, &props).collect();
        for k in 0..=2u32 {
            let mut classifier = BisimClassifier::new(&props);
            let classes: Vec<Vec<u32>> =
                models.iter().map(|m| classifier.point_classes(m, k)).collect();
            for (i, m1) in models.iter().enumerate() {
                for (j, m2) in models.iter().enumerate() {
                    let checker = TeamBisimChecker::new(m1, m2, k);
                    for w in 0..m1.world_count() {
                        for v in 0..m2.world_count() {
                            assert_eq!(
                                classes[i][w] == classes[j][v],
                                checker.points_bisimilar(w, v),
                                "class ids disagree with pairwise check"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn signatures_decide_team_bisimilarity() {
        let props = [PropSymbol::new("p").unwrap()];
        let models: Vec<KripkeModel> = enumerate_models(2, &props).collect();
        let k = 2u32;
        let mut classifier = BisimClassifier::new(&props);
        let mut tagged: Vec<(usize, Team, TeamSignature)> = Vec::new();
        for (i, m) in models.iter().enumerate() {
            for t in m.teams() {
                let sig = classifier.team_signature(m, &t, k);
                tagged.push((i, t, sig));
            }
        }
        for (i, t1, sig1) in &tagged {
            for (j, t2, sig2) in &tagged {
                let expected =
                    team_k_bisimilar(&models[*i], t1, &models[*j], t2, k).unwrap();
                assert_eq!(sig1 == sig2, expected);
            }
        }
    }
}
