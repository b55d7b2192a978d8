//! The concrete ribbon combinatory algebra of rational group-labelled binary
//! trees, wired up as model hooks for axiom validation.

pub mod den;
pub mod group;
pub mod tree;

use std::rc::Rc;

pub use den::{den_apply, den_combinator, den_member, describe_tree, DenSet, Pattern, Verdict3};
pub use group::{load_group, Group, GroupError};
pub use tree::{lolli, sample_trees, tree_act, tree_equal, tree_split, RegularTree};

use crate::axioms::{ModelEq, ModelHooks};
use crate::prob::{duality_alpha_from_trace, duality_beta_from_trace};
use crate::term::{Const, Term};

use self::den::{enumerate, Solver};

/// Default sampling parameters: at most 3 automaton states, pools bounded by
/// a fixed budget, deterministic in the seed.
pub const DEFAULT_MAX_STATES: usize = 3;
pub const DEFAULT_SEED: u64 = 1729;

#[derive(Debug, Clone)]
pub struct TreeModel {
    pub group: Group,
    pub seed: u64,
    /// Norm-`e` trees used to instantiate metavariables (as orbit sets).
    pub arg_pool: Vec<RegularTree>,
    /// Probe trees for extensional comparisons.
    pub probes: Vec<RegularTree>,
}

impl TreeModel {
    pub fn new(group: Group, seed: u64) -> TreeModel {
        let raw = sample_trees(&group, DEFAULT_MAX_STATES, 24, seed);
        // trees whose root label is not the identity drive the braided
        // structure; conjugation by their norms is what separates C+ from C-
        let nontrivial: Vec<RegularTree> = raw
            .iter()
            .filter(|t| t.norm() != group.identity)
            .cloned()
            .collect();

        let mut arg_pool: Vec<RegularTree> = Vec::new();
        let push_arg = |t: RegularTree, pool: &mut Vec<RegularTree>| {
            if t.norm() == group.identity && !pool.iter().any(|have| tree_equal(have, &t)) {
                pool.push(t);
            }
        };
        for t in &raw {
            push_arg(t.clone(), &mut arg_pool);
            // t ⊸ t has norm e whatever |t| is, keeping rich subtrees
            push_arg(lolli(&group, t, t), &mut arg_pool);
        }
        for t in nontrivial.iter().take(3) {
            // nest once more so the c-then-d subtree has a non-identity norm
            let inner = lolli(&group, t, t);
            push_arg(lolli(&group, &inner, &inner), &mut arg_pool);
        }
        for a in raw.iter().take(6) {
            for b in raw.iter().take(6) {
                if a.norm() == b.norm() {
                    push_arg(lolli(&group, a, b), &mut arg_pool);
                }
            }
        }
        arg_pool.truncate(14);

        let mut probes: Vec<RegularTree> = Vec::new();
        let push_probe = |t: RegularTree, probes: &mut Vec<RegularTree>| {
            if !probes.iter().any(|have| tree_equal(have, &t)) {
                probes.push(t);
            }
        };
        for t in raw.iter().take(4) {
            push_probe(t.clone(), &mut probes);
        }
        for a in raw.iter().take(3) {
            for b in raw.iter().take(3) {
                push_probe(lolli(&group, a, b), &mut probes);
            }
        }
        // members of the combinator sets have the right nesting shapes; pick
        // pattern-variable tuples with non-identity norms so conjugation bites
        let mut tuples: Vec<[RegularTree; 3]> = Vec::new();
        let fallback = |k: usize| raw[k % raw.len()].clone();
        match (nontrivial.first(), nontrivial.get(1)) {
            (Some(a), Some(b)) => {
                tuples.push([a.clone(), b.clone(), fallback(1)]);
                tuples.push([b.clone(), a.clone(), a.clone()]);
            }
            (Some(a), None) => {
                tuples.push([a.clone(), a.clone(), fallback(1)]);
            }
            _ => {}
        }
        tuples.push([fallback(0), fallback(1), fallback(2)]);
        let solver = Solver::new(&group);
        for konst in [
            Const::B,
            Const::Cplus,
            Const::Cminus,
            Const::I,
            Const::ThetaPlus,
            Const::ThetaMinus,
            Const::Tr,
        ] {
            if let Ok(DenSet::Patterns(pats)) = den_combinator(konst) {
                for tuple in &tuples {
                    let mut env = std::collections::HashMap::new();
                    env.insert("x".to_string(), Pattern::Tree(tuple[0].clone()));
                    env.insert("y".to_string(), Pattern::Tree(tuple[1].clone()));
                    env.insert("z".to_string(), Pattern::Tree(tuple[2].clone()));
                    for pat in &pats {
                        if let Some(t) = solver.instantiate(pat, &env, 64) {
                            push_probe(t, &mut probes);
                        }
                    }
                }
            }
        }
        probes.truncate(36);
        TreeModel {
            group,
            seed,
            arg_pool,
            probes,
        }
    }

    /// Evaluates a ground term into a denotation set.
    pub fn term_den(&self, t: &Term) -> Result<DenSet, String> {
        match t {
            Term::Const(c) => self.constant(*c),
            Term::App(f, a) => {
                let fd = self.term_den(f)?;
                let ad = self.term_den(a)?;
                Ok(den_apply(&self.group, &fd, &ad))
            }
            Term::Bullet(b) => Ok(DenSet::BulletOf(Rc::new(self.term_den(b)?))),
            Term::Var(v) => Err(format!("free variable {v} has no denotation")),
        }
    }

    /// Extensional comparison: exact when both sides enumerate, probe-based
    /// otherwise.
    pub fn den_equal(&self, s1: &DenSet, s2: &DenSet) -> ModelEq {
        let e1 = enumerate(&self.group, s1);
        let e2 = enumerate(&self.group, s2);
        if let (Some(m1), Some(m2)) = (&e1, &e2) {
            for t in m1 {
                if !m2.iter().any(|u| tree_equal(u, t)) {
                    return ModelEq::Distinct {
                        witness: format!("lhs member {} missing on rhs", describe_tree(t)),
                    };
                }
            }
            for t in m2 {
                if !m1.iter().any(|u| tree_equal(u, t)) {
                    return ModelEq::Distinct {
                        witness: format!("rhs member {} missing on lhs", describe_tree(t)),
                    };
                }
            }
            return ModelEq::Equal;
        }
        let mut probe_set: Vec<RegularTree> = Vec::new();
        for members in [&e1, &e2].into_iter().flatten() {
            for t in members {
                if !probe_set.iter().any(|u| tree_equal(u, t)) {
                    probe_set.push(t.clone());
                }
            }
        }
        for t in &self.probes {
            if !probe_set.iter().any(|u| tree_equal(u, t)) {
                probe_set.push(t.clone());
            }
        }
        let mut inconclusive = 0usize;
        for p in &probe_set {
            let v1 = den_member(&self.group, p, s1);
            let v2 = den_member(&self.group, p, s2);
            match (v1, v2) {
                (Verdict3::True, Verdict3::False) | (Verdict3::False, Verdict3::True) => {
                    return ModelEq::Distinct {
                        witness: format!("probe {} separates the sides", describe_tree(p)),
                    };
                }
                (Verdict3::Inconclusive, _) | (_, Verdict3::Inconclusive) => inconclusive += 1,
                _ => {}
            }
        }
        if inconclusive > 0 {
            ModelEq::Inconclusive {
                reason: format!("{inconclusive} of {} probes undecided", probe_set.len()),
            }
        } else {
            ModelEq::Equal
        }
    }
}

impl ModelHooks for TreeModel {
    type Elem = DenSet;

    fn constant(&self, c: Const) -> Result<DenSet, String> {
        match c {
            Const::Alpha => self.term_den(&duality_alpha_from_trace().term),
            Const::Beta => self.term_den(&duality_beta_from_trace().term),
            other => den_combinator(other).map_err(|e| e.to_string()),
        }
    }

    fn apply(&self, f: &DenSet, a: &DenSet) -> DenSet {
        den_apply(&self.group, f, a)
    }

    fn bullet(&self, a: &DenSet) -> DenSet {
        DenSet::BulletOf(Rc::new(a.clone()))
    }

    fn sample(&self, index: usize) -> DenSet {
        let t = &self.arg_pool[index % self.arg_pool.len()];
        DenSet::Orbit(t.clone())
    }

    fn equal(&self, a: &DenSet, b: &DenSet) -> ModelEq {
        self.den_equal(a, b)
    }
}

/// Deterministic search for a sampled instance distinguishing `C+` from
/// `C-`: first probe members of the two sets directly, then fall back to
/// fully applied instances. Note the applied form `C± a b c` can never
/// distinguish them (every argument member has identity norm, which is the
/// (C) axiom); the sets themselves differ exactly when conjugation acts
/// nontrivially.
pub fn braid_distinction_search(model: &TreeModel, attempts: usize) -> Option<String> {
    let cp = model.constant(Const::Cplus).ok()?;
    let cm = model.constant(Const::Cminus).ok()?;
    if let ModelEq::Distinct { witness } = model.den_equal(&cp, &cm) {
        return Some(format!("C+ vs C- as sets: {witness}"));
    }
    let n = model.arg_pool.len();
    for i in 0..attempts {
        let a = model.sample(i);
        let b = model.sample((i / n) + 1);
        let c = model.sample((i / (n * n)) + 2);
        let lhs = model.apply(&model.apply(&model.apply(&cp, &a), &b), &c);
        let rhs = model.apply(&model.apply(&model.apply(&cm, &a), &b), &c);
        if let ModelEq::Distinct { witness } = model.den_equal(&lhs, &rhs) {
            return Some(format!("applied instance {i}: {witness}"));
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{axiom_set, validate_axioms, PackName};

    fn s3_model() -> TreeModel {
        TreeModel::new(Group::builtin("S3").unwrap(), DEFAULT_SEED)
    }

    #[test]
    fn arg_pool_is_norm_identity() {
        let m = s3_model();
        assert!(!m.arg_pool.is_empty());
        for t in &m.arg_pool {
            assert_eq!(t.norm(), m.group.identity);
            t.check_consistency(&m.group).unwrap();
        }
    }

    #[test]
    fn c_rule_holds_on_samples() {
        let m = s3_model();
        let cp = m.constant(Const::Cplus).unwrap();
        let (a, b, c) = (m.sample(0), m.sample(1), m.sample(2));
        let lhs = m.apply(&m.apply(&m.apply(&cp, &a), &b), &c);
        let rhs = m.apply(&m.apply(&a, &c), &b);
        assert!(matches!(m.den_equal(&lhs, &rhs), ModelEq::Equal));
    }

    #[test]
    fn corrupted_rule_fails_with_witness() {
        // C+ = C- as raw sets is false over a nonabelian group
        let m = s3_model();
        let report = validate_axioms(
            &crate::axioms::AxiomSet {
                name: PackName::Bcpmi,
                includes: vec![],
                rules: vec![crate::axioms::definition_rule(
                    "corrupted",
                    Term::con(Const::Cplus),
                    Term::con(Const::Cminus),
                )],
            },
            &m,
            1,
        );
        assert!(report.total_fail() > 0);
    }

    #[test]
    fn planar_pack_validates_on_small_budget() {
        let m = s3_model();
        let pack = axiom_set(PackName::PlanarExt);
        let report = validate_axioms(&pack, &m, 4);
        assert_eq!(report.total_fail(), 0, "report: {report:?}");
    }

    #[test]
    fn z2_has_no_braid_distinction() {
        let m = TreeModel::new(Group::builtin("Z2").unwrap(), DEFAULT_SEED);
        assert!(braid_distinction_search(&m, 12).is_none());
    }

    #[test]
    fn s3_distinguishes_braids() {
        let m = s3_model();
        assert!(braid_distinction_search(&m, 40).is_some());
    }

    #[test]
    fn trivial_loop_acts_as_identity() {
        let m = s3_model();
        let tr = m.constant(Const::Tr).unwrap();
        let i = m.constant(Const::I).unwrap();
        let loop_set = m.apply(&tr, &i);
        for k in 0..3 {
            let a = m.sample(k);
            let lhs = m.apply(&loop_set, &a);
            assert!(
                matches!(m.den_equal(&lhs, &a), ModelEq::Equal),
                "loop failed on sample {k}"
            );
        }
    }
}
