//! Proof terms for intuitionistic propositional logic, System F and its
//! atomic fragment System Fat: typing, reduction, the Russell–Prawitz and
//! atomic translations, and the machinery that checks strict simulation and
//! commuting diagrams between them.

pub mod analysis;
pub mod gen;
pub mod rewriting;
pub mod syntax;
pub mod translate;
pub mod typing;
