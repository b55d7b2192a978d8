//! Pattern-set denotations of the combinators over rational group-labelled
//! trees, with a two-phase membership solver: structural matching first,
//! then action-constraint resolution.

use std::collections::HashMap;
use std::rc::Rc;

use thiserror::Error;

use super::group::Group;
use super::tree::{lolli, tree_act, tree_equal, tree_split, RegularTree};
use crate::term::Const;

/// Schematic member description. `Act(word, p)` conjugates `p` by the
/// product of the named variables' norms (signs invert).
#[derive(Debug, Clone, PartialEq)]
pub enum Pattern {
    Var(String),
    Tree(RegularTree),
    /// `(d, c)` parts of `d ⊸ c`.
    Lolli(Box<Pattern>, Box<Pattern>),
    Act(Vec<(String, i8)>, Box<Pattern>),
}

impl Pattern {
    pub fn var(s: &str) -> Pattern {
        Pattern::Var(s.to_string())
    }

    pub fn lolli(d: Pattern, c: Pattern) -> Pattern {
        Pattern::Lolli(Box::new(d), Box::new(c))
    }

    pub fn act(word: Vec<(&str, i8)>, p: Pattern) -> Pattern {
        Pattern::Act(
            word.into_iter().map(|(v, s)| (v.to_string(), s)).collect(),
            Box::new(p),
        )
    }

    fn rename(&self, suffix: &str) -> Pattern {
        match self {
            Pattern::Var(x) => Pattern::Var(format!("{x}{suffix}")),
            Pattern::Tree(t) => Pattern::Tree(t.clone()),
            Pattern::Lolli(d, c) => {
                Pattern::lolli(d.rename(suffix), c.rename(suffix))
            }
            Pattern::Act(w, b) => Pattern::Act(
                w.iter().map(|(v, s)| (format!("{v}{suffix}"), *s)).collect(),
                Box::new(b.rename(suffix)),
            ),
        }
    }

    fn has_vars(&self) -> bool {
        match self {
            Pattern::Var(_) => true,
            Pattern::Tree(_) => false,
            Pattern::Lolli(d, c) => d.has_vars() || c.has_vars(),
            Pattern::Act(_, _) => true,
        }
    }
}

/// Lazily-described equivariant subsets of the tree carrier.
#[derive(Debug, Clone)]
pub enum DenSet {
    Patterns(Vec<Pattern>),
    Orbit(RegularTree),
    Finite(Vec<RegularTree>),
    Applied(Rc<DenSet>, Rc<DenSet>),
    /// `S'`: the bullet of a set.
    BulletOf(Rc<DenSet>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DenError {
    #[error("no pattern-set denotation for constant {0:?}")]
    Unsupported(Const),
}

/// The exact pattern sets of the combinators over the tree model.
pub fn den_combinator(c: Const) -> Result<DenSet, DenError> {
    use Pattern as P;
    let x = || P::var("x");
    let y = || P::var("y");
    let z = || P::var("z");
    let pat = match c {
        Const::B => P::lolli(
            P::lolli(y(), z()),
            P::lolli(P::lolli(x(), y()), P::lolli(x(), z())),
        ),
        Const::Cplus => P::lolli(
            P::lolli(P::act(vec![("x", 1)], y()), P::lolli(x(), z())),
            P::lolli(x(), P::lolli(y(), z())),
        ),
        Const::Cminus => P::lolli(
            P::lolli(y(), P::lolli(P::act(vec![("y", -1)], x()), z())),
            P::lolli(x(), P::lolli(y(), z())),
        ),
        Const::I => P::lolli(x(), x()),
        Const::ThetaPlus => P::lolli(
            P::lolli(P::act(vec![("x", 1)], x()), y()),
            P::lolli(x(), y()),
        ),
        Const::ThetaMinus => P::lolli(
            P::lolli(P::act(vec![("x", -1)], x()), y()),
            P::lolli(x(), y()),
        ),
        Const::Tr => P::lolli(
            P::lolli(P::lolli(x(), y()), P::lolli(x(), z())),
            P::lolli(y(), z()),
        ),
        other => return Err(DenError::Unsupported(other)),
    };
    Ok(DenSet::Patterns(vec![pat]))
}

/// Three-valued membership/equality outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict3 {
    True,
    False,
    Inconclusive,
}

type Env = HashMap<String, Pattern>;

struct MemberOutcome {
    sats: Vec<Env>,
    maybe: bool,
}

impl MemberOutcome {
    fn verdict(&self) -> Verdict3 {
        if !self.sats.is_empty() {
            Verdict3::True
        } else if self.maybe {
            Verdict3::Inconclusive
        } else {
            Verdict3::False
        }
    }
}

enum UnifyOutcome {
    Sat(Env),
    Unsat,
    Stuck,
}

pub struct Solver<'g> {
    group: &'g Group,
    fresh: usize,
    fuel: usize,
}

const DEFAULT_SOLVER_FUEL: usize = 20_000;

impl<'g> Solver<'g> {
    pub fn new(group: &'g Group) -> Solver<'g> {
        Solver {
            group,
            fresh: 0,
            fuel: DEFAULT_SOLVER_FUEL,
        }
    }

    fn fresh_name(&mut self, base: &str) -> String {
        self.fresh += 1;
        format!("{base}%{}", self.fresh)
    }

    fn spend(&mut self) -> bool {
        if self.fuel == 0 {
            return false;
        }
        self.fuel -= 1;
        true
    }

    /// Fully instantiates a pattern to a tree, if its variables are bound.
    pub fn instantiate(&self, p: &Pattern, env: &Env, depth: usize) -> Option<RegularTree> {
        if depth == 0 {
            return None;
        }
        match p {
            Pattern::Tree(t) => Some(t.clone()),
            Pattern::Var(x) => {
                let bound = env.get(x)?;
                self.instantiate(bound, env, depth - 1)
            }
            Pattern::Lolli(d, c) => {
                let dt = self.instantiate(d, env, depth - 1)?;
                let ct = self.instantiate(c, env, depth - 1)?;
                Some(lolli(self.group, &dt, &ct))
            }
            Pattern::Act(word, b) => {
                let h = self.word_product(word, env, depth)?;
                let bt = self.instantiate(b, env, depth - 1)?;
                Some(tree_act(self.group, h, &bt))
            }
        }
    }

    fn word_product(&self, word: &[(String, i8)], env: &Env, depth: usize) -> Option<usize> {
        let mut h = self.group.identity;
        for (v, sign) in word {
            let t = self.instantiate(&Pattern::Var(v.clone()), env, depth - 1)?;
            let n = t.norm();
            let factor = if *sign >= 0 { n } else { self.group.inverse(n) };
            h = self.group.op(h, factor);
        }
        Some(h)
    }

    fn resolve_top(&self, p: Pattern, env: &Env) -> Pattern {
        let mut cur = p;
        let mut guard = 0;
        while let Pattern::Var(x) = &cur {
            match env.get(x) {
                Some(next) => {
                    cur = next.clone();
                    guard += 1;
                    if guard > 64 {
                        break;
                    }
                }
                None => break,
            }
        }
        cur
    }

    /// First-order unification restricted to the forms the model produces.
    /// Action constraints are deferred until their norm words are
    /// determined; any leftover constraints make the outcome `Stuck`.
    fn unify(&mut self, mut eqs: Vec<(Pattern, Pattern)>, mut env: Env) -> UnifyOutcome {
        loop {
            if eqs.is_empty() {
                return UnifyOutcome::Sat(env);
            }
            let mut progressed = false;
            let mut deferred: Vec<(Pattern, Pattern)> = Vec::new();
            while let Some((a, b)) = eqs.pop() {
                if !self.spend() {
                    return UnifyOutcome::Stuck;
                }
                let a = self.resolve_top(a, &env);
                let b = self.resolve_top(b, &env);
                match (a, b) {
                    (Pattern::Var(x), Pattern::Var(y)) if x == y => {
                        progressed = true;
                    }
                    (Pattern::Var(x), q) | (q, Pattern::Var(x)) => {
                        env.insert(x, q);
                        progressed = true;
                    }
                    (Pattern::Tree(s), Pattern::Tree(t)) => {
                        if !tree_equal(&s, &t) {
                            return UnifyOutcome::Unsat;
                        }
                        progressed = true;
                    }
                    (Pattern::Lolli(d1, c1), Pattern::Lolli(d2, c2)) => {
                        eqs.push((*d1, *d2));
                        eqs.push((*c1, *c2));
                        progressed = true;
                    }
                    (Pattern::Lolli(d, c), Pattern::Tree(t))
                    | (Pattern::Tree(t), Pattern::Lolli(d, c)) => {
                        let (td, tc) = tree_split(&t);
                        eqs.push((*d, Pattern::Tree(td)));
                        eqs.push((*c, Pattern::Tree(tc)));
                        progressed = true;
                    }
                    (Pattern::Act(w, body), other) | (other, Pattern::Act(w, body)) => {
                        if let Some(h) = self.word_product(&w, &env, 32) {
                            // act(h, body) = other  <=>  body = act(h⁻¹, other)
                            match self.instantiate(&other, &env, 32) {
                                Some(t) => {
                                    let hm = self.group.inverse(h);
                                    eqs.push((*body, Pattern::Tree(tree_act(self.group, hm, &t))));
                                    progressed = true;
                                }
                                None => match other {
                                    Pattern::Lolli(d2, c2) => match *body {
                                        Pattern::Lolli(bd, bc) => {
                                            eqs.push((Pattern::Act(w.clone(), bd), *d2));
                                            eqs.push((Pattern::Act(w, bc), *c2));
                                            progressed = true;
                                        }
                                        other_body => deferred
                                            .push((Pattern::Act(w, Box::new(other_body)), Pattern::Lolli(d2, c2))),
                                    },
                                    other => deferred.push((Pattern::Act(w, body), other)),
                                },
                            }
                        } else {
                            // conjugation distributes over ⊸, which may
                            // unblock the word later
                            match (*body, other) {
                                (Pattern::Lolli(bd, bc), Pattern::Lolli(d2, c2)) => {
                                    eqs.push((Pattern::Act(w.clone(), bd), *d2));
                                    eqs.push((Pattern::Act(w, bc), *c2));
                                    progressed = true;
                                }
                                (Pattern::Lolli(bd, bc), Pattern::Tree(t)) => {
                                    let (td, tc) = tree_split(&t);
                                    eqs.push((Pattern::Act(w.clone(), bd), Pattern::Tree(td)));
                                    eqs.push((Pattern::Act(w, bc), Pattern::Tree(tc)));
                                    progressed = true;
                                }
                                (body, other) => {
                                    deferred.push((Pattern::Act(w, Box::new(body)), other))
                                }
                            }
                        }
                    }
                }
            }
            if deferred.is_empty() && eqs.is_empty() {
                // everything consumed this pass
                if progressed {
                    return UnifyOutcome::Sat(env);
                }
                return UnifyOutcome::Sat(env);
            }
            if !progressed {
                return UnifyOutcome::Stuck;
            }
            eqs = deferred;
        }
    }

    /// Membership of a (possibly variable-carrying) candidate in a set,
    /// under an environment of earlier bindings.
    fn member(&mut self, cand: &Pattern, set: &DenSet, env: &Env) -> MemberOutcome {
        if !self.spend() {
            return MemberOutcome {
                sats: Vec::new(),
                maybe: true,
            };
        }
        match set {
            DenSet::Patterns(pats) => {
                let mut sats = Vec::new();
                let mut maybe = false;
                for pat in pats {
                    let suffix = self.fresh_name("");
                    let renamed = pat.rename(&suffix);
                    match self.unify(vec![(cand.clone(), renamed)], env.clone()) {
                        UnifyOutcome::Sat(e) => sats.push(e),
                        UnifyOutcome::Stuck => maybe = true,
                        UnifyOutcome::Unsat => {}
                    }
                }
                MemberOutcome { sats, maybe }
            }
            DenSet::Orbit(t) => {
                let mut sats = Vec::new();
                let mut maybe = false;
                for h in 0..self.group.order {
                    let conj = tree_act(self.group, h, t);
                    match self.unify(vec![(cand.clone(), Pattern::Tree(conj))], env.clone()) {
                        UnifyOutcome::Sat(e) => sats.push(e),
                        UnifyOutcome::Stuck => maybe = true,
                        UnifyOutcome::Unsat => {}
                    }
                }
                MemberOutcome { sats, maybe }
            }
            DenSet::Finite(ts) => {
                let mut sats = Vec::new();
                let mut maybe = false;
                for t in ts {
                    match self.unify(vec![(cand.clone(), Pattern::Tree(t.clone()))], env.clone()) {
                        UnifyOutcome::Sat(e) => sats.push(e),
                        UnifyOutcome::Stuck => maybe = true,
                        UnifyOutcome::Unsat => {}
                    }
                }
                MemberOutcome { sats, maybe }
            }
            DenSet::Applied(a, b) => {
                // t ∈ a·b iff some x ⊸ t in a has x ∈ b
                let x = self.fresh_name("q");
                let lolli_cand = Pattern::lolli(Pattern::Var(x.clone()), cand.clone());
                let inner = self.member(&lolli_cand, a, env);
                let mut sats = Vec::new();
                let mut maybe = inner.maybe;
                for e in inner.sats {
                    let arg = Pattern::Var(x.clone());
                    let out = self.member(&arg, b, &e);
                    maybe |= out.maybe;
                    sats.extend(out.sats);
                }
                MemberOutcome { sats, maybe }
            }
            DenSet::BulletOf(s) => {
                // members are (|x|⁻¹ • (x ⊸ w)) ⊸ w with x ∈ s
                let Some(t) = self.instantiate(cand, env, 32) else {
                    return MemberOutcome {
                        sats: Vec::new(),
                        maybe: true,
                    };
                };
                let (td, tc) = tree_split(&t);
                let mut sats = Vec::new();
                let mut maybe = false;
                for h in 0..self.group.order {
                    let u = tree_act(self.group, h, &td);
                    let (ud, uc) = tree_split(&u);
                    if ud.norm() != h || !tree_equal(&uc, &tc) {
                        continue;
                    }
                    let out = self.member(&Pattern::Tree(ud), s, env);
                    maybe |= out.maybe;
                    sats.extend(out.sats);
                }
                MemberOutcome { sats, maybe }
            }
        }
    }
}

/// Decidable membership of a concrete tree.
pub fn den_member(g: &Group, t: &RegularTree, set: &DenSet) -> Verdict3 {
    let mut solver = Solver::new(g);
    let cand = Pattern::Tree(t.clone());
    solver.member(&cand, set, &Env::new()).verdict()
}

fn substitute(p: &Pattern, env: &Env, depth: usize) -> Pattern {
    if depth == 0 {
        return p.clone();
    }
    match p {
        Pattern::Var(x) => match env.get(x) {
            Some(b) => substitute(b, env, depth - 1),
            None => p.clone(),
        },
        Pattern::Tree(_) => p.clone(),
        Pattern::Lolli(d, c) => Pattern::lolli(
            substitute(d, env, depth - 1),
            substitute(c, env, depth - 1),
        ),
        Pattern::Act(w, b) => {
            Pattern::Act(w.clone(), Box::new(substitute(b, env, depth - 1)))
        }
    }
}

/// Enumerates a set's members when it is finitely presentable.
pub fn enumerate(g: &Group, set: &DenSet) -> Option<Vec<RegularTree>> {
    match set {
        DenSet::Finite(ts) => Some(dedup(ts.clone())),
        DenSet::Orbit(t) => Some(dedup(
            (0..g.order).map(|h| tree_act(g, h, t)).collect(),
        )),
        DenSet::Patterns(pats) => {
            let solver = Solver::new(g);
            let mut out = Vec::new();
            for p in pats {
                if p.has_vars() {
                    return None;
                }
                out.push(solver.instantiate(p, &Env::new(), 64)?);
            }
            Some(dedup(out))
        }
        DenSet::Applied(a, b) => match den_apply_eager(g, a, b)? {
            DenSet::Finite(ts) => Some(dedup(ts)),
            other => enumerate(g, &other),
        },
        DenSet::BulletOf(_) => None,
    }
}

fn dedup(ts: Vec<RegularTree>) -> Vec<RegularTree> {
    let mut out: Vec<RegularTree> = Vec::new();
    for t in ts {
        if !out.iter().any(|have| tree_equal(have, &t)) {
            out.push(t);
        }
    }
    out
}

fn den_apply_eager(g: &Group, a: &DenSet, b: &DenSet) -> Option<DenSet> {
    let b_members = enumerate(g, b)?;
    match a {
        DenSet::Patterns(pats) => {
            let mut solver = Solver::new(g);
            let mut residuals = Vec::new();
            for pat in pats {
                let suffix = solver.fresh_name("");
                let renamed = pat.rename(&suffix);
                let Pattern::Lolli(d, c) = renamed else {
                    return None;
                };
                for bm in &b_members {
                    match solver.unify(
                        vec![((*d).clone(), Pattern::Tree(bm.clone()))],
                        Env::new(),
                    ) {
                        UnifyOutcome::Sat(env) => {
                            residuals.push(substitute(&c, &env, 64));
                        }
                        UnifyOutcome::Unsat => {}
                        UnifyOutcome::Stuck => return None,
                    }
                }
            }
            if residuals.iter().all(|p| !p.has_vars()) {
                let solver = Solver::new(g);
                let trees = residuals
                    .iter()
                    .map(|p| solver.instantiate(p, &Env::new(), 64))
                    .collect::<Option<Vec<_>>>()?;
                Some(DenSet::Finite(dedup(trees)))
            } else {
                Some(DenSet::Patterns(residuals))
            }
        }
        DenSet::Orbit(_) | DenSet::Finite(_) => {
            let a_members = enumerate(g, a)?;
            let mut out = Vec::new();
            for m in a_members {
                let (md, mc) = tree_split(&m);
                if b_members.iter().any(|bm| tree_equal(bm, &md)) {
                    out.push(mc);
                }
            }
            Some(DenSet::Finite(dedup(out)))
        }
        DenSet::BulletOf(s) => {
            // a' b = { w | x ⊸ w ∈ b for some x ∈ a }
            let mut out = Vec::new();
            for bm in &b_members {
                let (bd, bc) = tree_split(bm);
                match den_member(g, &bd, s) {
                    Verdict3::True => out.push(bc),
                    Verdict3::False => {}
                    Verdict3::Inconclusive => return None,
                }
            }
            Some(DenSet::Finite(dedup(out)))
        }
        DenSet::Applied(inner_a, inner_b) => {
            let evaluated = den_apply_eager(g, inner_a, inner_b)?;
            den_apply_eager(g, &evaluated, b)
        }
    }
}

/// Application `a b = {y | ∃x. (x ⊸ y) ∈ a and x ∈ b}`: eager when both
/// sides are finitely presentable, lazy otherwise.
pub fn den_apply(g: &Group, a: &DenSet, b: &DenSet) -> DenSet {
    den_apply_eager(g, a, b)
        .unwrap_or_else(|| DenSet::Applied(Rc::new(a.clone()), Rc::new(b.clone())))
}

/// Short description of a tree for witnesses.
pub fn describe_tree(t: &RegularTree) -> String {
    let p = t.pruned();
    let states: Vec<String> = p
        .states
        .iter()
        .map(|s| format!("(c{} d{} v{})", s.c, s.d, s.val))
        .collect();
    format!("[{}]", states.join(" "))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gmodel::tree::sample_trees;

    fn s3() -> Group {
        Group::builtin("S3").unwrap()
    }

    #[test]
    fn leaf_is_in_i() {
        let g = s3();
        let i = den_combinator(Const::I).unwrap();
        let leaf = RegularTree::leaf(&g);
        assert_eq!(den_member(&g, &leaf, &i), Verdict3::True);
    }

    #[test]
    fn lolli_uu_in_i() {
        let g = s3();
        let i = den_combinator(Const::I).unwrap();
        for u in sample_trees(&g, 3, 8, 2) {
            let t = lolli(&g, &u, &u);
            assert_eq!(den_member(&g, &t, &i), Verdict3::True);
        }
    }

    #[test]
    fn nonidentity_norm_not_in_i() {
        let g = s3();
        let i = den_combinator(Const::I).unwrap();
        let trees = sample_trees(&g, 3, 24, 42);
        let bad = trees.iter().find(|t| t.norm() != g.identity).unwrap();
        assert_eq!(den_member(&g, bad, &i), Verdict3::False);
    }

    #[test]
    fn unsupported_constant_errors() {
        assert!(den_combinator(Const::Alpha).is_err());
        assert!(den_combinator(Const::W).is_err());
    }

    #[test]
    fn identity_applied_to_orbit_is_the_orbit() {
        let g = s3();
        let i = den_combinator(Const::I).unwrap();
        let trees = sample_trees(&g, 3, 10, 5);
        let t = &trees[trees.len() - 1];
        let arg = DenSet::Orbit(t.clone());
        let applied = den_apply(&g, &i, &arg);
        let got = enumerate(&g, &applied).expect("I x is enumerable");
        let want = enumerate(&g, &arg).unwrap();
        assert_eq!(got.len(), want.len());
        for w in &want {
            assert!(got.iter().any(|m| tree_equal(m, w)));
        }
    }

    #[test]
    fn bullet_law_on_samples() {
        // a' b = b a extensionally
        let g = s3();
        let trees = sample_trees(&g, 2, 6, 8);
        let norm_e: Vec<_> = trees.iter().filter(|t| t.norm() == g.identity).collect();
        let a = DenSet::Orbit(norm_e[0].clone());
        let b = DenSet::Orbit(lolli(&g, norm_e[0], norm_e[0]));
        let lhs = den_apply(&g, &DenSet::BulletOf(Rc::new(a.clone())), &b);
        let rhs = den_apply(&g, &b, &a);
        let l = enumerate(&g, &lhs).unwrap();
        let r = enumerate(&g, &rhs).unwrap();
        assert_eq!(l.len(), r.len());
        for t in &l {
            assert!(r.iter().any(|u| tree_equal(u, t)));
        }
    }
}
