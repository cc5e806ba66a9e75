//! Shared fixtures for the benchmarks.

use teamsem_core::formulas::{parse, Formula, PropSymbol};
use teamsem_core::kripke::{enumerate_models, KripkeModel};

pub fn props_p() -> Vec<PropSymbol> {
    vec![PropSymbol::new("p").unwrap()]
}

pub fn three_world_models() -> Vec<KripkeModel> {
    enumerate_models(3, &props_p()).collect()
}

pub fn sample_formulas() -> Vec<(&'static str, Formula)> {
    [
        "[p <= ~p]",
        "nab dia p",
        "p |! box ~p",
        "dia (p | ~p) & box p",
        "nab p | nab ~p",
    ]
    .into_iter()
    .map(|text| (text, parse(text).unwrap()))
    .collect()
}
