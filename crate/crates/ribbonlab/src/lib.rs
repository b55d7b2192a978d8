//! A workbench for ribbon combinatory algebras: combinator terms and planar
//! bracket abstraction, equational axiom packs with a rewrite engine and
//! bounded proof search, arity inference, the internal PROB, framed-tangle
//! translation with knot invariants, and the concrete model of
//! group-labelled rational trees.

pub mod arity;
pub mod axioms;
pub mod gmodel;
pub mod poly;
pub mod prob;
pub mod tangle;
pub mod term;

pub use arity::{check_arity_equation, constant_arity, cur, infer_arity, Arity};
pub use axioms::{
    apply_rule_at, axiom_set, axiom_set_by_name, normalize, prove_equal, rewrite_once,
    validate_axioms, AxiomSet, Direction, ModelEq, ModelHooks, PackName, ProofStep, Report, Rule,
    RuleKind, Verdict,
};
pub use poly::LaurentPoly;
pub use prob::{
    braid_sigma, bridge_trace_duality, compose_m, duality_pair, id, make_morphism,
    make_morphism_trusted, tensor_left, tensor_m, tensor_right, trace_left, trivial_loop,
    twist_theta, BridgeDirection, Morphism, ProbError,
};
pub use tangle::{
    closed_invariants, diag_atom, diag_compose, diag_tensor, export_diagram, from_tangle,
    invariants, kauffman_bracket, simplify, translate, ExportFormat, Gen, InvariantBundle, Link,
    Slice, TangleDiagram, TangleError,
};
pub use term::{
    b_power, bullet, compose, lambda_star, parse_term, render_term, Const, Pos, Term, TermError,
};
