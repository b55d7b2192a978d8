//! Arity inference and checking (the order/degree calculus), plus currying.

use serde::{Deserialize, Serialize};

use crate::axioms::{prove_equal, AxiomSet, PackName, Verdict};
use crate::term::{b_power, bullet, compose, Const, Term};

/// An arity `m -> n`: a box with `m` inputs and `n` outputs. Inference
/// reports the minimal arity; weakening `m -> n` to `m+1 -> n+1` is always
/// sound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arity {
    pub dom: usize,
    pub cod: usize,
}

impl Arity {
    pub fn new(dom: usize, cod: usize) -> Arity {
        Arity { dom, cod }
    }

    pub fn weaken(self, by: usize) -> Arity {
        Arity::new(self.dom + by, self.cod + by)
    }

    /// Whether `self` weakens to `target`.
    pub fn weakens_to(self, target: Arity) -> bool {
        target.dom >= self.dom && target.dom - self.dom == target.cod.wrapping_sub(self.cod)
            && target.cod >= self.cod
    }
}

impl std::fmt::Display for Arity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} -> {}", self.dom, self.cod)
    }
}

/// Arities of the combinator constants.
pub fn constant_arity(c: Const) -> Arity {
    match c {
        Const::B => Arity::new(2, 1),
        Const::Cplus | Const::Cminus | Const::C => Arity::new(2, 2),
        Const::I => Arity::new(0, 0),
        Const::ThetaPlus | Const::ThetaMinus => Arity::new(1, 1),
        Const::Tr => Arity::new(1, 2),
        Const::Alpha => Arity::new(0, 2),
        Const::Beta => Arity::new(2, 0),
        Const::W => Arity::new(1, 2),
        Const::K => Arity::new(1, 0),
    }
}

/// Structural arity inference. Sound but not complete: `None` means no arity
/// was derived, not that none exists.
pub fn infer_arity(t: &Term) -> Option<Arity> {
    match t {
        Term::Const(c) => Some(constant_arity(*c)),
        Term::Bullet(_) => Some(Arity::new(0, 1)),
        Term::Var(_) => None,
        Term::App(f, a) => {
            match f.as_ref() {
                // a ∘ b: compose after weakening to a common middle
                Term::App(g, x) if matches!(g.as_ref(), Term::Const(Const::B)) => {
                    let left = infer_arity(x)?;
                    let right = infer_arity(a)?;
                    let mid = left.cod.max(right.dom);
                    let left = left.weaken(mid - left.cod);
                    let right = right.weaken(mid - right.dom);
                    Some(Arity::new(left.dom, right.cod))
                }
                // B a: left tensor, one strand below
                Term::Const(Const::B) => {
                    let inner = infer_arity(a)?;
                    Some(inner.weaken(1))
                }
                _ => None,
            }
        }
    }
}

/// Builds the defining equation `a' ∘ B^{m+1} = (B a) ∘ B^n` and searches for
/// a proof. In braided packs the `C±`-form `(C± B a) ∘ B^m = (B a) ∘ B^n` is
/// also accepted.
pub fn check_arity_equation(
    a: &Term,
    m: usize,
    n: usize,
    set: &AxiomSet,
    fuel: usize,
) -> Verdict {
    let lhs = compose(bullet(a.clone()), b_power(m + 1));
    let rhs = compose(Term::app(Term::con(Const::B), a.clone()), b_power(n));
    let bullet_form = prove_equal(&lhs, &rhs, set, fuel);
    if bullet_form.is_equal() {
        return bullet_form;
    }
    if !braided(set.name) {
        return bullet_form;
    }
    for braid in [Const::Cplus, Const::Cminus] {
        let lhs_c = c_form_lhs(a, m, braid);
        let v = prove_equal(&lhs_c, &rhs, set, fuel);
        if v.is_equal() {
            return v;
        }
    }
    bullet_form
}

fn braided(name: PackName) -> bool {
    !matches!(name, PackName::PlanarExt)
}

fn c_form_lhs(a: &Term, m: usize, braid: Const) -> Term {
    let head = Term::app(Term::app(Term::con(braid), Term::con(Const::B)), a.clone());
    compose(head, b_power(m))
}

/// Currying: `cur(a) = (a I)' ∘ B^m` for `a : m+1 -> 1`; at `m = 0` the unit
/// law drops the trailing `∘ I`.
pub fn cur(a: &Term, m: usize) -> Term {
    let headed = bullet(Term::app(a.clone(), Term::con(Const::I)));
    if m == 0 {
        headed
    } else {
        compose(headed, b_power(m))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::axiom_set;
    use crate::term::{parse_term, render_term};

    fn pt(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn constant_table_matches() {
        assert_eq!(constant_arity(Const::B), Arity::new(2, 1));
        assert_eq!(constant_arity(Const::Tr), Arity::new(1, 2));
        assert_eq!(constant_arity(Const::Alpha), Arity::new(0, 2));
        assert_eq!(constant_arity(Const::Beta), Arity::new(2, 0));
        assert_eq!(constant_arity(Const::W), Arity::new(1, 2));
        assert_eq!(constant_arity(Const::K), Arity::new(1, 0));
        assert_eq!(constant_arity(Const::C), Arity::new(2, 2));
    }

    #[test]
    fn infer_composition() {
        assert_eq!(infer_arity(&pt("C+ ∘ C-")), Some(Arity::new(2, 2)));
    }

    #[test]
    fn infer_left_tensor() {
        assert_eq!(infer_arity(&pt("B C+")), Some(Arity::new(3, 3)));
    }

    #[test]
    fn infer_bullet() {
        assert_eq!(infer_arity(&pt("I'")), Some(Arity::new(0, 1)));
    }

    #[test]
    fn infer_weakens_composition_middles() {
        // B : 2 -> 1 composed with C+ : 2 -> 2 forces B up to 3 -> 2.
        assert_eq!(infer_arity(&pt("B ∘ C+")), Some(Arity::new(3, 2)));
    }

    #[test]
    fn infer_fails_on_plain_application() {
        assert_eq!(infer_arity(&pt("C+ I")), None);
    }

    #[test]
    fn check_arity_of_i() {
        let planar = axiom_set(PackName::PlanarExt);
        assert!(check_arity_equation(&pt("I"), 0, 0, &planar, 1_000).is_equal());
    }

    #[test]
    fn check_arity_of_b() {
        let planar = axiom_set(PackName::PlanarExt);
        assert!(check_arity_equation(&pt("B"), 2, 1, &planar, 1_000).is_equal());
    }

    #[test]
    fn check_arity_of_tr_via_c_form() {
        let traced = axiom_set(PackName::Traced);
        assert!(check_arity_equation(&pt("Tr"), 1, 2, &traced, 1_000).is_equal());
    }

    #[test]
    fn cur_formula() {
        assert_eq!(render_term(&cur(&pt("B"), 1)), "(B I)' ∘ B");
        assert_eq!(render_term(&cur(&pt("Tr"), 0)), "(Tr I)'");
    }

    #[test]
    fn cur_beta_law_for_b() {
        let planar = axiom_set(PackName::PlanarExt);
        let lhs = compose(cur(&pt("B"), 1), Term::con(Const::B));
        assert!(prove_equal(&lhs, &pt("B"), &planar, 10_000).is_equal());
    }
}
