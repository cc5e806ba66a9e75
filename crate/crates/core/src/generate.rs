//! Seeded random formula generation for the property suites.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::formulas::{Dialect, Formula, PropSymbol};

#[derive(Clone, Debug)]
pub struct GenConfig {
    /// Connectives are drawn from this dialect's grammar.
    pub dialect: Dialect,
    pub props: Vec<PropSymbol>,
    pub max_modal_depth: u32,
    pub max_nodes: usize,
    pub incl_max_arity: usize,
}

impl GenConfig {
    pub fn new(dialect: Dialect, props: Vec<PropSymbol>) -> GenConfig {
        GenConfig {
            dialect,
            props,
            max_modal_depth: 2,
            max_nodes: 14,
            incl_max_arity: 2,
        }
    }

    pub fn with_size(mut self, max_modal_depth: u32, max_nodes: usize) -> GenConfig {
        self.max_modal_depth = max_modal_depth;
        self.max_nodes = max_nodes;
        self
    }
}

/// A deterministic batch: same config and seed, same formulas.
pub fn formula_batch(cfg: &GenConfig, seed: u64, count: usize) -> Vec<Formula> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_formula(cfg, &mut rng)).collect()
}

pub fn random_formula(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Formula {
    // Rejection keeps the size bound exact without starving subtrees.
    let mut budget = cfg.max_nodes;
    loop {
        let mut fuel = budget;
        let f = gen(cfg, rng, &mut fuel, cfg.max_modal_depth, false);
        if f.node_count() <= cfg.max_nodes {
            return f;
        }
        budget = budget.saturating_sub(2).max(1);
    }
}

fn literal(cfg: &GenConfig, rng: &mut ChaCha8Rng) -> Formula {
    if cfg.props.is_empty() || rng.random_range(0..12u32) == 0 {
        return if rng.random_bool(0.5) {
            Formula::Top
        } else {
            Formula::Bot
        };
    }
    let p = cfg.props[rng.random_range(0..cfg.props.len())].clone();
    if rng.random_bool(0.5) {
        Formula::Prop(p)
    } else {
        Formula::NegProp(p)
    }
}

fn gen(
    cfg: &GenConfig,
    rng: &mut ChaCha8Rng,
    fuel: &mut usize,
    md_left: u32,
    pure_only: bool,
) -> Formula {
    if *fuel <= 1 {
        *fuel = fuel.saturating_sub(1);
        return literal(cfg, rng);
    }
    *fuel -= 1;

    // (kind, weight); modal operators only while depth budget remains.
    let mut choices: Vec<(u8, u32)> = vec![(0, 3), (1, 3), (2, 3)];
    if md_left > 0 {
        choices.push((3, 2));
        choices.push((4, 2));
    }
    if !pure_only {
        match cfg.dialect {
            Dialect::Ml => {}
            Dialect::Minc => choices.push((5, 3)),
            Dialect::MlNab => choices.push((6, 4)),
            Dialect::MlNeDisj => choices.push((7, 4)),
            Dialect::Mixed => {
                choices.push((5, 2));
                choices.push((6, 2));
                choices.push((7, 2));
            }
        }
    }
    let total: u32 = choices.iter().map(|(_, w)| w).sum();
    let mut roll = rng.random_range(0..total);
    let kind = choices
        .iter()
        .find(|(_, w)| {
            if roll < *w {
                true
            } else {
                roll -= w;
                false
            }
        })
        .unwrap()
        .0;

    match kind {
        0 => literal(cfg, rng),
        1 => Formula::and(
            gen(cfg, rng, fuel, md_left, pure_only),
            gen(cfg, rng, fuel, md_left, pure_only),
        ),
        2 => Formula::or(
            gen(cfg, rng, fuel, md_left, pure_only),
            gen(cfg, rng, fuel, md_left, pure_only),
        ),
        3 => Formula::dia(gen(cfg, rng, fuel, md_left - 1, pure_only)),
        4 => Formula::box_(gen(cfg, rng, fuel, md_left - 1, pure_only)),
        5 => {
            let arity = rng.random_range(1..=cfg.incl_max_arity.max(1));
            let side = |rng: &mut ChaCha8Rng, fuel: &mut usize| {
                (0..arity)
                    .map(|_| {
                        let mut arg_fuel = (*fuel).min(3);
                        let arg = gen(cfg, rng, &mut arg_fuel, md_left, true);
                        *fuel = fuel.saturating_sub(arg.node_count());
                        arg
                    })
                    .collect::<Vec<_>>()
            };
            let lhs = side(rng, fuel);
            let rhs = side(rng, fuel);
            Formula::Incl(lhs, rhs)
        }
        6 => Formula::nab(gen(cfg, rng, fuel, md_left, pure_only)),
        _ => Formula::nedisj(
            gen(cfg, rng, fuel, md_left, pure_only),
            gen(cfg, rng, fuel, md_left, pure_only),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn props() -> Vec<PropSymbol> {
        vec![PropSymbol::new("p").unwrap()]
    }

    #[test]
    fn deterministic_batches() {
        let cfg = GenConfig::new(Dialect::Minc, props());
        assert_eq!(formula_batch(&cfg, 7, 20), formula_batch(&cfg, 7, 20));
        assert_ne!(formula_batch(&cfg, 7, 20), formula_batch(&cfg, 8, 20));
    }

    #[test]
    fn respects_dialect_and_bounds() {
        for dialect in [Dialect::Ml, Dialect::Minc, Dialect::MlNab, Dialect::MlNeDisj] {
            let cfg = GenConfig::new(dialect, props()).with_size(2, 9);
            for f in formula_batch(&cfg, 42, 300) {
                assert!(f.node_count() <= 9, "{f} too large");
                assert!(f.modal_depth() <= 2, "{f} too deep");
                let observed = f.dialect();
                let admissible = match dialect {
                    Dialect::Ml => observed == Dialect::Ml,
                    Dialect::Minc => matches!(observed, Dialect::Ml | Dialect::Minc),
                    Dialect::MlNab => matches!(observed, Dialect::Ml | Dialect::MlNab),
                    Dialect::MlNeDisj => matches!(observed, Dialect::Ml | Dialect::MlNeDisj),
                    Dialect::Mixed => true,
                };
                assert!(admissible, "{f} escapes dialect {dialect:?}");
            }
        }
    }

    #[test]
    fn extensions_actually_occur() {
        let cfg = GenConfig::new(Dialect::MlNab, props()).with_size(2, 9);
        let batch = formula_batch(&cfg, 1, 200);
        assert!(batch.iter().filter(|f| f.contains_nab()).count() > 50);
        let cfg = GenConfig::new(Dialect::Minc, props()).with_size(2, 12);
        let batch = formula_batch(&cfg, 1, 200);
        assert!(batch.iter().filter(|f| f.contains_incl()).count() > 30);
        let cfg = GenConfig::new(Dialect::MlNeDisj, props()).with_size(2, 9);
        let batch = formula_batch(&cfg, 1, 200);
        assert!(batch.iter().filter(|f| f.contains_nedisj()).count() > 50);
    }

    #[test]
    fn generated_incl_atoms_are_well_formed() {
        let cfg = GenConfig::new(Dialect::Minc, props()).with_size(2, 12);
        for f in formula_batch(&cfg, 5, 200) {
            fn check(f: &Formula) {
                if let Formula::Incl(lhs, rhs) = f {
                    assert_eq!(lhs.len(), rhs.len());
                    assert!(!lhs.is_empty());
                    assert!(lhs.iter().chain(rhs.iter()).all(Formula::is_pure_ml));
                }
                for c in f.children() {
                    check(c);
                }
            }
            check(&f);
        }
    }
}
