//! Seeded generators for guarded specifications, used by property checks
//! and benchmarks.

use rand::Rng;

use super::{ActionId, RecSpec, ThreadTerm};

/// Shape limits for [`random_spec`].
#[derive(Debug, Clone)]
pub struct SpecShape {
    pub max_equations: usize,
    pub max_depth: usize,
    pub actions: Vec<ActionId>,
}

impl Default for SpecShape {
    fn default() -> Self {
        SpecShape {
            max_equations: 4,
            max_depth: 3,
            actions: vec![
                ActionId::named("a"),
                ActionId::named("b"),
                ActionId::indexed("load", 0),
                ActionId::indexed("store", 1),
                ActionId::tau(),
            ],
        }
    }
}

/// A random guarded specification with between one and
/// `shape.max_equations` equations, rooted at the first.
pub fn random_spec<R: Rng + ?Sized>(rng: &mut R, shape: &SpecShape) -> RecSpec {
    let n = rng.random_range(1..=shape.max_equations.max(1));
    let names: Vec<String> = (0..n).map(|i| format!("X{i}")).collect();
    let equations = names
        .iter()
        .map(|name| (name.clone(), guarded_term(rng, shape, &names)))
        .collect::<Vec<_>>();
    RecSpec::from_equations(equations).expect("generated spec is well formed")
}

fn guarded_term<R: Rng + ?Sized>(rng: &mut R, shape: &SpecShape, names: &[String]) -> ThreadTerm {
    match rng.random_range(0..8) {
        0 => ThreadTerm::Stop,
        1 => ThreadTerm::Dead,
        _ => post_term(rng, shape, names, shape.max_depth),
    }
}

fn post_term<R: Rng + ?Sized>(rng: &mut R, shape: &SpecShape, names: &[String], depth: usize) -> ThreadTerm {
    let action = if shape.actions.is_empty() {
        ActionId::named("a")
    } else {
        shape.actions[rng.random_range(0..shape.actions.len())].clone()
    };
    let on_true = any_term(rng, shape, names, depth.saturating_sub(1));
    if rng.random_bool(0.3) {
        ThreadTerm::prefix(action, on_true)
    } else {
        let on_false = any_term(rng, shape, names, depth.saturating_sub(1));
        ThreadTerm::post(action, on_true, on_false)
    }
}

fn any_term<R: Rng + ?Sized>(rng: &mut R, shape: &SpecShape, names: &[String], depth: usize) -> ThreadTerm {
    let roll = rng.random_range(0..10);
    match roll {
        0 => ThreadTerm::Stop,
        1 => ThreadTerm::Dead,
        2..=6 => ThreadTerm::Var(names[rng.random_range(0..names.len())].clone()),
        _ if depth == 0 => ThreadTerm::Var(names[rng.random_range(0..names.len())].clone()),
        _ => post_term(rng, shape, names, depth),
    }
}
