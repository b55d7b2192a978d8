//! The internal PROB: arity-indexed morphisms with composition, tensors,
//! braid and twist families, left trace, duality, and the trace/duality
//! bridges.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arity::{check_arity_equation, infer_arity, Arity};
use crate::axioms::AxiomSet;
use crate::term::{compose, parse_term, Const, Term};

/// An arity-checked term. `weakening` records how far the declared arity
/// sits above the minimal inferred one; `trusted` records constructions that
/// bypassed the check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Morphism {
    #[serde(with = "term_as_text")]
    pub term: Term,
    pub dom: usize,
    pub cod: usize,
    pub weakening: usize,
    pub trusted: bool,
}

mod term_as_text {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &Term, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&crate::term::render_term(t))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Term, D::Error> {
        let s = String::deserialize(d)?;
        parse_term(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error)]
pub enum ProbError {
    #[error("arity mismatch: {term} does not check at {dom} -> {cod} ({detail})")]
    ArityMismatch {
        term: String,
        dom: usize,
        cod: usize,
        detail: String,
    },
    #[error("cannot trace a morphism with zero-width {0}")]
    ZeroWidthTrace(&'static str),
    #[error("duality index must be at least 1")]
    ZeroDuality,
}

impl Morphism {
    pub fn arity(&self) -> Arity {
        Arity::new(self.dom, self.cod)
    }
}

/// The identity on `n` strands, carried by `I`.
pub fn id(n: usize) -> Morphism {
    Morphism {
        term: Term::con(Const::I),
        dom: n,
        cod: n,
        weakening: n,
        trusted: false,
    }
}

/// Validates the arity (structural inference first, semantic check second)
/// and tags the term.
pub fn make_morphism(
    t: &Term,
    dom: usize,
    cod: usize,
    set: &AxiomSet,
    fuel: usize,
) -> Result<Morphism, ProbError> {
    if let Some(min) = infer_arity(t) {
        if min.weakens_to(Arity::new(dom, cod)) {
            return Ok(Morphism {
                term: t.clone(),
                dom,
                cod,
                weakening: dom - min.dom,
                trusted: false,
            });
        }
    }
    if check_arity_equation(t, dom, cod, set, fuel).is_equal() {
        return Ok(Morphism {
            term: t.clone(),
            dom,
            cod,
            weakening: 0,
            trusted: false,
        });
    }
    Err(ProbError::ArityMismatch {
        term: crate::term::render_term(t),
        dom,
        cod,
        detail: "inference finds no compatible arity and the defining equation has no proof \
                 within fuel"
            .to_string(),
    })
}

/// Tags a term with a declared arity without checking; the flag is recorded.
pub fn make_morphism_trusted(t: &Term, dom: usize, cod: usize) -> Morphism {
    Morphism {
        term: t.clone(),
        dom,
        cod,
        weakening: 0,
        trusted: true,
    }
}

/// `f ; g`, weakening the smaller side so the middles agree. Composition
/// with a literal `I` carrier is collapsed by the unit law.
pub fn compose_m(f: &Morphism, g: &Morphism) -> Morphism {
    let mid = f.cod.max(g.dom);
    let (fw, gw) = (mid - f.cod, mid - g.dom);
    let dom = f.dom + fw;
    let cod = g.cod + gw;
    let trusted = f.trusted || g.trusted;
    let term = if f.term == Term::con(Const::I) {
        g.term.clone()
    } else if g.term == Term::con(Const::I) {
        f.term.clone()
    } else {
        compose(f.term.clone(), g.term.clone())
    };
    Morphism {
        term,
        dom,
        cod,
        weakening: f.weakening.max(g.weakening) + fw.max(gw),
        trusted,
    }
}

/// `l + h`: left tensor, iterated `B`-prefixing. A literal `I` carrier stays
/// `I` (`B I = I`).
pub fn tensor_left(l: usize, h: &Morphism) -> Morphism {
    let term = if h.term == Term::con(Const::I) {
        Term::con(Const::I)
    } else {
        let mut t = h.term.clone();
        for _ in 0..l {
            t = Term::app(Term::con(Const::B), t);
        }
        t
    };
    Morphism {
        term,
        dom: h.dom + l,
        cod: h.cod + l,
        weakening: h.weakening,
        trusted: h.trusted,
    }
}

/// `h + l`: right tensor. The carrier is unchanged; only the declared arity
/// widens.
pub fn tensor_right(h: &Morphism, l: usize) -> Morphism {
    Morphism {
        term: h.term.clone(),
        dom: h.dom + l,
        cod: h.cod + l,
        weakening: h.weakening + l,
        trusted: h.trusted,
    }
}

/// `f + g`, computed as `(f + m') ; (n + g)`; the interchange law makes the
/// other order provably equal.
pub fn tensor_m(f: &Morphism, g: &Morphism) -> Morphism {
    compose_m(&tensor_right(f, g.dom), &tensor_left(f.cod, g))
}

/// The braid family `σ_{m,n} : m+n -> n+m`.
pub fn braid_sigma(m: usize, n: usize) -> Morphism {
    let term = sigma_term(m, n);
    Morphism {
        term,
        dom: m + n,
        cod: n + m,
        weakening: 0,
        trusted: false,
    }
}

fn sigma_term(m: usize, n: usize) -> Term {
    match (m, n) {
        (_, 0) => Term::con(Const::I),
        (0, 1) => Term::con(Const::I),
        (m, 1) => compose(
            Term::app(Term::con(Const::B), sigma_term(m - 1, 1)),
            Term::con(Const::Cplus),
        ),
        (m, n) => compose(
            sigma_term(m, 1),
            Term::app(Term::con(Const::B), sigma_term(m, n - 1)),
        ),
    }
}

/// The twist family `θ_m : m -> m`.
pub fn twist_theta(m: usize) -> Morphism {
    let term = theta_term(m);
    Morphism {
        term,
        dom: m,
        cod: m,
        weakening: 0,
        trusted: false,
    }
}

fn theta_term(m: usize) -> Term {
    match m {
        0 => Term::con(Const::I),
        1 => Term::con(Const::ThetaPlus),
        m => compose(
            compose(
                compose(Term::con(Const::ThetaPlus), sigma_term(1, m - 1)),
                theta_term(m - 1),
            ),
            sigma_term(m - 1, 1),
        ),
    }
}

/// Left trace: `Tr · f` closes the first strand; `(1+m -> 1+n)` becomes
/// `(m -> n)`.
pub fn trace_left(f: &Morphism) -> Result<Morphism, ProbError> {
    if f.dom == 0 {
        return Err(ProbError::ZeroWidthTrace("domain"));
    }
    if f.cod == 0 {
        return Err(ProbError::ZeroWidthTrace("codomain"));
    }
    Ok(Morphism {
        term: Term::app(Term::con(Const::Tr), f.term.clone()),
        dom: f.dom - 1,
        cod: f.cod - 1,
        weakening: f.weakening,
        trusted: f.trusted,
    })
}

/// The trivial loop `○ = Tr I : 0 -> 0`.
pub fn trivial_loop() -> Morphism {
    trace_left(&id(1)).expect("id(1) has positive width")
}

/// Iterated duality `(α_n : 0 -> 2n, β_n : 2n -> 0)` with
/// `α_{n+1} = α ∘ (B α_n)` and `β_{n+1} = (B β_n) ∘ β`.
pub fn duality_pair(n: usize) -> Result<(Morphism, Morphism), ProbError> {
    if n == 0 {
        return Err(ProbError::ZeroDuality);
    }
    let alpha = Morphism {
        term: alpha_term(n),
        dom: 0,
        cod: 2 * n,
        weakening: 0,
        trusted: false,
    };
    let beta = Morphism {
        term: beta_term(n),
        dom: 2 * n,
        cod: 0,
        weakening: 0,
        trusted: false,
    };
    Ok((alpha, beta))
}

fn alpha_term(n: usize) -> Term {
    if n == 1 {
        Term::con(Const::Alpha)
    } else {
        compose(
            Term::con(Const::Alpha),
            Term::app(Term::con(Const::B), alpha_term(n - 1)),
        )
    }
}

fn beta_term(n: usize) -> Term {
    if n == 1 {
        Term::con(Const::Beta)
    } else {
        compose(
            Term::app(Term::con(Const::B), beta_term(n - 1)),
            Term::con(Const::Beta),
        )
    }
}

/// Closed terms bridging trace and duality.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BridgeDirection {
    /// From a trace combinator to a duality: `α, β` built out of `Tr`.
    ToDuality,
    /// From a duality to a trace combinator: `Tr` built out of `α, β`.
    ToTrace,
}

/// `α = Tr (Tr ∘ (B Tr) ∘ (B C+) ∘ C+) : 0 -> 2` from the trace combinator.
pub fn duality_alpha_from_trace() -> Morphism {
    let tr = || Term::con(Const::Tr);
    let b = || Term::con(Const::B);
    let cp = || Term::con(Const::Cplus);
    let chain = compose(
        compose(compose(tr(), Term::app(b(), tr())), Term::app(b(), cp())),
        cp(),
    );
    make_morphism_trusted(&Term::app(tr(), chain), 0, 2)
}

/// `β = Tr (C+ ∘ (B C+) ∘ (B B) ∘ B) : 2 -> 0` from the trace combinator.
pub fn duality_beta_from_trace() -> Morphism {
    let tr = || Term::con(Const::Tr);
    let b = || Term::con(Const::B);
    let cp = || Term::con(Const::Cplus);
    let chain = compose(
        compose(compose(cp(), Term::app(b(), cp())), Term::app(b(), b())),
        b(),
    );
    make_morphism_trusted(&Term::app(tr(), chain), 2, 0)
}

/// `Tr = (C+ B β) ∘ (B α) ∘ B : 1 -> 2` from a duality.
pub fn trace_from_duality() -> Morphism {
    let b = || Term::con(Const::B);
    let term = compose(
        compose(
            Term::app(
                Term::app(Term::con(Const::Cplus), b()),
                Term::con(Const::Beta),
            ),
            Term::app(b(), Term::con(Const::Alpha)),
        ),
        b(),
    );
    make_morphism_trusted(&term, 1, 2)
}

/// The quoted closed bridge terms with their arities.
pub fn bridge_trace_duality(direction: BridgeDirection) -> Vec<Morphism> {
    match direction {
        BridgeDirection::ToDuality => {
            vec![duality_alpha_from_trace(), duality_beta_from_trace()]
        }
        BridgeDirection::ToTrace => vec![trace_from_duality()],
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{axiom_set, prove_equal, PackName};
    use crate::term::{parse_term, render_term};

    fn pt(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn traced() -> AxiomSet {
        axiom_set(PackName::Traced)
    }

    #[test]
    fn make_morphism_accepts_b() {
        let m = make_morphism(&pt("B"), 2, 1, &traced(), 1_000).unwrap();
        assert_eq!((m.dom, m.cod), (2, 1));
        assert!(!m.trusted);
    }

    #[test]
    fn make_morphism_accepts_tr() {
        let m = make_morphism(&pt("Tr"), 1, 2, &traced(), 1_000).unwrap();
        assert_eq!((m.dom, m.cod), (1, 2));
    }

    #[test]
    fn make_morphism_rejects_bad_arity() {
        let err = make_morphism(&pt("C+"), 3, 1, &traced(), 400);
        assert!(matches!(err, Err(ProbError::ArityMismatch { .. })));
    }

    #[test]
    fn compose_records_weakening() {
        let f = make_morphism(&pt("B"), 2, 1, &traced(), 1_000).unwrap();
        let g = make_morphism(&pt("C+"), 2, 2, &traced(), 1_000).unwrap();
        let h = compose_m(&f, &g);
        assert_eq!((h.dom, h.cod), (3, 2));
        assert!(h.weakening > 0);
    }

    #[test]
    fn compose_with_identity_normalizes() {
        let b = make_morphism(&pt("B"), 2, 1, &traced(), 1_000).unwrap();
        let h = compose_m(&id(2), &b);
        assert_eq!(h.term, pt("B"));
        assert_eq!((h.dom, h.cod), (2, 1));
    }

    #[test]
    fn tensor_of_identities_is_identity() {
        let t = tensor_m(&id(1), &id(1));
        assert_eq!(t.term, pt("I"));
        assert_eq!((t.dom, t.cod), (2, 2));
    }

    #[test]
    fn tensor_left_prefixes_b() {
        let cp = make_morphism(&pt("C+"), 2, 2, &traced(), 1_000).unwrap();
        let t = tensor_left(1, &cp);
        assert_eq!(t.term, pt("B C+"));
        assert_eq!((t.dom, t.cod), (3, 3));
    }

    #[test]
    fn tensor_right_keeps_term() {
        let cp = make_morphism(&pt("C+"), 2, 2, &traced(), 1_000).unwrap();
        let t = tensor_right(&cp, 1);
        assert_eq!(t.term, pt("C+"));
        assert_eq!((t.dom, t.cod), (3, 3));
    }

    #[test]
    fn sigma_base_cases() {
        assert_eq!(braid_sigma(0, 1).term, pt("I"));
        assert_eq!(braid_sigma(2, 0).term, pt("I"));
        assert_eq!(braid_sigma(1, 1).term, pt("(B I) ∘ C+"));
        assert_eq!(braid_sigma(2, 1).term, pt("(B ((B I) ∘ C+)) ∘ C+"));
    }

    #[test]
    fn sigma_one_one_equals_cplus() {
        let pack = axiom_set(PackName::Bcpmi);
        assert!(prove_equal(&braid_sigma(1, 1).term, &pt("C+"), &pack, 1_000).is_equal());
    }

    #[test]
    fn sigma_arity_is_inferable() {
        for (m, n) in [(1, 1), (2, 1), (1, 2), (2, 2)] {
            let s = braid_sigma(m, n);
            let inferred = infer_arity(&s.term).expect("sigma arity inferable");
            assert!(inferred.weakens_to(Arity::new(m + n, n + m)), "sigma({m},{n})");
        }
    }

    #[test]
    fn theta_base_cases() {
        assert_eq!(twist_theta(0).term, pt("I"));
        assert_eq!(twist_theta(1).term, pt("Th+"));
        let t2 = twist_theta(2);
        assert_eq!(
            render_term(&t2.term),
            "Th+ ∘ (B I ∘ C+) ∘ Th+ ∘ (B I ∘ C+)"
        );
        assert!(infer_arity(&t2.term)
            .expect("theta_2 inferable")
            .weakens_to(Arity::new(2, 2)));
    }

    #[test]
    fn trace_shifts_arity() {
        let cp = make_morphism(&pt("C+"), 2, 2, &traced(), 1_000).unwrap();
        let t = trace_left(&cp).unwrap();
        assert_eq!(t.term, pt("Tr C+"));
        assert_eq!((t.dom, t.cod), (1, 1));
    }

    #[test]
    fn trace_rejects_zero_width() {
        assert!(trace_left(&id(0)).is_err());
    }

    #[test]
    fn trivial_loop_is_closed() {
        let l = trivial_loop();
        assert_eq!(l.term, pt("Tr I"));
        assert_eq!((l.dom, l.cod), (0, 0));
    }

    #[test]
    fn duality_pair_arities() {
        let (a1, b1) = duality_pair(1).unwrap();
        assert_eq!(a1.term, pt("Alpha"));
        assert_eq!(b1.term, pt("Beta"));
        let (a2, b2) = duality_pair(2).unwrap();
        assert_eq!(a2.term, pt("Alpha ∘ (B Alpha)"));
        assert_eq!(b2.term, pt("(B Beta) ∘ Beta"));
        assert_eq!((a2.dom, a2.cod), (0, 4));
        assert_eq!((b2.dom, b2.cod), (4, 0));
    }

    #[test]
    fn bridge_terms_match_quoted_shapes() {
        let alpha = duality_alpha_from_trace();
        assert_eq!(alpha.term, pt("Tr (Tr ∘ (B Tr) ∘ (B C+) ∘ C+)"));
        assert_eq!((alpha.dom, alpha.cod), (0, 2));
        assert!(alpha.trusted);
        let beta = duality_beta_from_trace();
        assert_eq!(beta.term, pt("Tr (C+ ∘ (B C+) ∘ (B B) ∘ B)"));
        assert_eq!((beta.dom, beta.cod), (2, 0));
        let tr = trace_from_duality();
        assert_eq!(tr.term, pt("(C+ B Beta) ∘ (B Alpha) ∘ B"));
        assert_eq!((tr.dom, tr.cod), (1, 2));
    }
}
