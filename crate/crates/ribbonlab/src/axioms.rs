//! Named equational axiom packs, a directed rewrite engine, bounded
//! bidirectional equality search, and model-based axiom validation.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::term::{compose, render_term, Const, Pos, Term};

/// How a rule entered its pack.
///
/// `Axiom` rules are the boxed equations of the underlying definitions.
/// `Bridge` rules are definitional glue (e.g. `C+ I a = a'` linking the
/// primitive bullet to its braided encoding). `Lemma` rules are proven
/// consequences added so that bounded search can find compositional proofs;
/// each has a replay test deriving it from the axioms alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RuleKind {
    Axiom,
    Bridge,
    Lemma,
}

#[derive(Debug, Clone)]
pub struct Rule {
    pub name: String,
    pub lhs: Term,
    pub rhs: Term,
    /// Oriented rules are used left-to-right by `normalize`/`rewrite_once`;
    /// `prove_equal` uses every rule in both directions.
    pub oriented: bool,
    pub kind: RuleKind,
}

impl Rule {
    fn new(name: &str, oriented: bool, kind: RuleKind, lhs: Term, rhs: Term) -> Rule {
        debug_assert!(
            !oriented || pattern_vars(&rhs).iter().all(|v| pattern_vars(&lhs).contains(v)),
            "oriented rule {name} drops metavariables"
        );
        Rule {
            name: name.to_string(),
            lhs,
            rhs,
            oriented,
            kind,
        }
    }
}

fn pattern_vars(t: &Term) -> HashSet<String> {
    t.var_occurrences().into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PackName {
    PlanarExt,
    Bcpmi,
    Balanced,
    Traced,
    RibbonDuality,
    CurryBciwk,
}

impl PackName {
    pub const ALL: [PackName; 6] = [
        PackName::PlanarExt,
        PackName::Bcpmi,
        PackName::Balanced,
        PackName::Traced,
        PackName::RibbonDuality,
        PackName::CurryBciwk,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PackName::PlanarExt => "planar_ext",
            PackName::Bcpmi => "bcpmi",
            PackName::Balanced => "balanced",
            PackName::Traced => "traced",
            PackName::RibbonDuality => "ribbon_duality",
            PackName::CurryBciwk => "curry_bciwk",
        }
    }

    pub fn parse(s: &str) -> Result<PackName, AxiomError> {
        PackName::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| AxiomError::UnknownPack(s.to_string()))
    }
}

impl fmt::Display for PackName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone)]
pub struct AxiomSet {
    pub name: PackName,
    pub includes: Vec<PackName>,
    /// Full transitive rule set, deduplicated by name.
    pub rules: Vec<Rule>,
}

#[derive(Debug, Error)]
pub enum AxiomError {
    #[error("unknown axiom pack `{0}`")]
    UnknownPack(String),
}

// ---------------------------------------------------------------------------
// Pack construction
// ---------------------------------------------------------------------------

fn c(k: Const) -> Term {
    Term::con(k)
}

fn v(name: &str) -> Term {
    Term::var(name)
}

fn app(f: Term, a: Term) -> Term {
    Term::app(f, a)
}

fn app3(f: Term, a: Term, b: Term, d: Term) -> Term {
    Term::app(Term::app(Term::app(f, a), b), d)
}

fn bul(t: Term) -> Term {
    Term::bullet(t)
}

const SIGNS: [(Const, Const, &str); 2] = [
    (Const::Cplus, Const::ThetaPlus, "+"),
    (Const::Cminus, Const::ThetaMinus, "-"),
];

fn planar_rules() -> Vec<Rule> {
    let b = || c(Const::B);
    let i = || c(Const::I);
    let mut rules = vec![
        Rule::new(
            "B",
            true,
            RuleKind::Axiom,
            app3(b(), v("a"), v("b"), v("c")),
            app(v("a"), app(v("b"), v("c"))),
        ),
        Rule::new("I", true, RuleKind::Axiom, app(i(), v("a")), v("a")),
        Rule::new(
            "bullet",
            true,
            RuleKind::Axiom,
            app(bul(v("a")), v("b")),
            app(v("b"), v("a")),
        ),
        Rule::new("BI", true, RuleKind::Axiom, app(b(), i()), i()),
        Rule::new(
            "bullet-app",
            false,
            RuleKind::Axiom,
            bul(app(v("a"), v("b"))),
            compose(bul(v("b")), compose(bul(v("a")), b())),
        ),
        Rule::new(
            "arity-B",
            false,
            RuleKind::Axiom,
            compose(bul(b()), compose(b(), compose(b(), b()))),
            compose(app(b(), b()), b()),
        ),
        Rule::new(
            "arity-I",
            false,
            RuleKind::Axiom,
            compose(bul(i()), b()),
            app(b(), i()),
        ),
        Rule::new(
            "arity-bullet",
            false,
            RuleKind::Axiom,
            compose(bul(bul(v("a"))), b()),
            compose(app(b(), bul(v("a"))), b()),
        ),
    ];
    // Proven consequences (Lemma rules); each is replay-derived from the
    // axioms above in tests/lemmas.rs.
    rules.extend([
        Rule::new(
            "assoc",
            false,
            RuleKind::Lemma,
            compose(compose(v("x"), v("y")), v("z")),
            compose(v("x"), compose(v("y"), v("z"))),
        ),
        Rule::new(
            "b-dist",
            false,
            RuleKind::Lemma,
            app(b(), compose(v("x"), v("y"))),
            compose(app(b(), v("x")), app(b(), v("y"))),
        ),
        Rule::new("unit-l", false, RuleKind::Lemma, compose(i(), v("x")), v("x")),
        Rule::new("unit-r", false, RuleKind::Lemma, compose(v("x"), i()), v("x")),
        Rule::new(
            "swap-bullet",
            false,
            RuleKind::Lemma,
            compose(v("x"), bul(v("u"))),
            compose(bul(v("u")), app(b(), v("x"))),
        ),
    ]);
    rules
}

fn bcpmi_rules() -> Vec<Rule> {
    let b = || c(Const::B);
    let i = || c(Const::I);
    let mut rules = Vec::new();
    for (cc, _, s) in SIGNS {
        rules.push(Rule::new(
            &format!("C{s}"),
            true,
            RuleKind::Axiom,
            app3(c(cc), v("a"), v("b"), v("c")),
            app(app(v("a"), v("c")), v("b")),
        ));
    }
    rules.push(Rule::new(
        "C2",
        false,
        RuleKind::Axiom,
        app(app(c(Const::Cplus), v("a")), v("b")),
        app(app(c(Const::Cminus), v("a")), v("b")),
    ));
    for (cc, _, s) in SIGNS {
        rules.push(Rule::new(
            &format!("rho{s}"),
            false,
            RuleKind::Axiom,
            app(app(c(cc), b()), i()),
            app(b(), i()),
        ));
        // the (alpha) axiom of the braided pack: B has arity 2 -> 1
        rules.push(Rule::new(
            &format!("c-arity-B{s}"),
            false,
            RuleKind::Axiom,
            compose(app(app(c(cc), b()), b()), compose(b(), b())),
            compose(app(b(), b()), b()),
        ));
    }
    rules.push(Rule::new(
        "cox1+",
        true,
        RuleKind::Axiom,
        compose(c(Const::Cplus), c(Const::Cminus)),
        app(b(), app(b(), i())),
    ));
    rules.push(Rule::new(
        "cox1-",
        true,
        RuleKind::Axiom,
        compose(c(Const::Cminus), c(Const::Cplus)),
        app(b(), app(b(), i())),
    ));
    for (cc, _, s) in SIGNS {
        rules.push(Rule::new(
            &format!("cox2{s}"),
            false,
            RuleKind::Axiom,
            compose(app(app(c(cc), b()), c(cc)), compose(b(), b())),
            compose(app(b(), c(cc)), compose(b(), b())),
        ));
        rules.push(Rule::new(
            &format!("cox3{s}"),
            false,
            RuleKind::Axiom,
            compose(app(b(), c(cc)), compose(c(cc), app(b(), c(cc)))),
            compose(c(cc), compose(app(b(), c(cc)), c(cc))),
        ));
        rules.push(Rule::new(
            &format!("bc{s}"),
            false,
            RuleKind::Axiom,
            compose(app(b(), b()), c(cc)),
            compose(c(cc), compose(app(b(), c(cc)), b())),
        ));
        // naturality of the braid at 0 -> 1 boxes
        rules.push(Rule::new(
            &format!("bc-bullet{s}"),
            false,
            RuleKind::Axiom,
            compose(app(b(), bul(v("a"))), c(cc)),
            bul(v("a")),
        ));
        // bullet as a braided application
        rules.push(Rule::new(
            &format!("bullet-bridge{s}"),
            true,
            RuleKind::Bridge,
            app(app(c(cc), i()), v("a")),
            bul(v("a")),
        ));
        rules.push(Rule::new(
            &format!("c-bullet{s}"),
            false,
            RuleKind::Lemma,
            app(app(c(cc), v("y")), v("x")),
            compose(bul(v("x")), v("y")),
        ));
        rules.push(Rule::new(
            &format!("arity-C{s}-bullet"),
            false,
            RuleKind::Lemma,
            compose(bul(c(cc)), compose(b(), compose(b(), b()))),
            compose(app(b(), c(cc)), compose(b(), b())),
        ));
    }
    rules
}

fn balanced_rules() -> Vec<Rule> {
    let b = || c(Const::B);
    let i = || c(Const::I);
    let mut rules = Vec::new();
    for (cc, th, s) in SIGNS {
        rules.push(Rule::new(
            &format!("theta1{s}"),
            false,
            RuleKind::Axiom,
            compose(app(b(), c(th)), b()),
            compose(app(app(c(cc), b()), c(th)), b()),
        ));
    }
    rules.push(Rule::new(
        "theta2+",
        true,
        RuleKind::Axiom,
        compose(c(Const::ThetaPlus), c(Const::ThetaMinus)),
        app(b(), i()),
    ));
    rules.push(Rule::new(
        "theta2-",
        true,
        RuleKind::Axiom,
        compose(c(Const::ThetaMinus), c(Const::ThetaPlus)),
        app(b(), i()),
    ));
    for (cc, th, s) in SIGNS {
        rules.push(Rule::new(
            &format!("theta3{s}"),
            false,
            RuleKind::Axiom,
            app(app(c(cc), c(th)), v("a")),
            app(app(c(cc), i()), v("a")),
        ));
        let chain = compose(
            compose(compose(compose(c(th), c(cc)), c(th)), c(cc)),
            b(),
        );
        rules.push(Rule::new(
            &format!("theta4{s}"),
            false,
            RuleKind::Axiom,
            compose(b(), c(th)),
            chain,
        ));
        rules.push(Rule::new(
            &format!("arity-theta{s}-bullet"),
            false,
            RuleKind::Lemma,
            compose(bul(c(th)), compose(b(), b())),
            compose(app(b(), c(th)), b()),
        ));
        rules.push(Rule::new(
            &format!("twist-absorb{s}"),
            false,
            RuleKind::Lemma,
            compose(bul(v("a")), c(th)),
            bul(v("a")),
        ));
    }
    rules
}

fn traced_rules() -> Vec<Rule> {
    let b = || c(Const::B);
    let tr = || c(Const::Tr);
    let mut rules = Vec::new();
    for (cc, th, s) in SIGNS {
        rules.push(Rule::new(
            &format!("left-tightening{s}"),
            false,
            RuleKind::Axiom,
            compose(app(app(c(cc), b()), tr()), b()),
            compose(app(b(), tr()), compose(b(), b())),
        ));
        rules.push(Rule::new(
            &format!("right-tightening{s}"),
            false,
            RuleKind::Axiom,
            compose(compose(app(b(), tr()), app(app(c(cc), b()), b())), b()),
            compose(b(), tr()),
        ));
        rules.push(Rule::new(
            &format!("yanking{s}"),
            true,
            RuleKind::Axiom,
            app(tr(), c(cc)),
            c(th),
        ));
        rules.push(Rule::new(
            &format!("exchange{s}"),
            false,
            RuleKind::Axiom,
            compose(
                compose(compose(tr(), tr()), app(app(c(cc), b()), c(Const::Cminus))),
                app(b(), c(Const::Cplus)),
            ),
            compose(tr(), tr()),
        ));
    }
    rules.extend([
        Rule::new(
            "arity-Tr-bullet",
            false,
            RuleKind::Lemma,
            compose(bul(tr()), compose(b(), b())),
            compose(app(b(), tr()), compose(b(), b())),
        ),
        Rule::new(
            "lt-app",
            false,
            RuleKind::Lemma,
            compose(v("a"), app(tr(), v("f"))),
            app(tr(), compose(app(b(), v("a")), v("f"))),
        ),
        Rule::new(
            "rt-app",
            false,
            RuleKind::Lemma,
            compose(app(tr(), v("f")), v("b")),
            app(tr(), compose(v("f"), app(b(), v("b")))),
        ),
        Rule::new(
            "ex-app",
            false,
            RuleKind::Lemma,
            app(
                tr(),
                app(
                    tr(),
                    compose(compose(c(Const::Cplus), v("f")), c(Const::Cminus)),
                ),
            ),
            app(tr(), app(tr(), v("f"))),
        ),
    ]);
    rules
}

fn ribbon_duality_rules() -> Vec<Rule> {
    let b = || c(Const::B);
    let i = || c(Const::I);
    let al = || c(Const::Alpha);
    let be = || c(Const::Beta);
    let mut rules = vec![
        Rule::new(
            "arity-alpha",
            false,
            RuleKind::Axiom,
            compose(bul(al()), b()),
            compose(app(b(), al()), compose(b(), b())),
        ),
        Rule::new(
            "arity-beta",
            false,
            RuleKind::Axiom,
            compose(bul(be()), compose(b(), compose(b(), b()))),
            app(b(), be()),
        ),
        Rule::new(
            "duality1",
            false,
            RuleKind::Axiom,
            compose(al(), app(b(), be())),
            app(b(), i()),
        ),
        Rule::new(
            "duality2",
            false,
            RuleKind::Axiom,
            compose(app(b(), al()), be()),
            app(b(), i()),
        ),
    ];
    for (_, th, s) in SIGNS {
        rules.push(Rule::new(
            &format!("duality-theta{s}"),
            false,
            RuleKind::Axiom,
            compose(al(), c(th)),
            compose(al(), app(b(), c(th))),
        ));
    }
    rules
}

fn curry_rules() -> Vec<Rule> {
    let b = || c(Const::B);
    let i = || c(Const::I);
    let cc = || c(Const::C);
    let w = || c(Const::W);
    let k = || c(Const::K);
    let b2 = || compose(b(), b());
    let b3 = || compose(b(), compose(b(), b()));
    let mut rules = vec![
        Rule::new(
            "B",
            true,
            RuleKind::Axiom,
            app3(b(), v("a"), v("b"), v("c")),
            app(v("a"), app(v("b"), v("c"))),
        ),
        Rule::new(
            "C",
            true,
            RuleKind::Axiom,
            app3(cc(), v("a"), v("b"), v("c")),
            app(app(v("a"), v("c")), v("b")),
        ),
        Rule::new("I", true, RuleKind::Axiom, app(i(), v("a")), v("a")),
        Rule::new(
            "W",
            true,
            RuleKind::Axiom,
            app(app(w(), v("a")), v("b")),
            app(app(v("a"), v("b")), v("b")),
        ),
        Rule::new(
            "K",
            true,
            RuleKind::Axiom,
            app(app(k(), v("a")), v("b")),
            v("a"),
        ),
        Rule::new(
            "bullet",
            true,
            RuleKind::Axiom,
            app(bul(v("a")), v("b")),
            app(v("b"), v("a")),
        ),
        Rule::new(
            "ax-b",
            false,
            RuleKind::Axiom,
            app(app(cc(), b3()), b()),
            compose(app(b(), b()), b()),
        ),
        Rule::new(
            "ax-c",
            false,
            RuleKind::Axiom,
            app(app(cc(), b3()), cc()),
            compose(app(b(), cc()), b2()),
        ),
        Rule::new(
            "ax-w",
            false,
            RuleKind::Axiom,
            app(app(cc(), b2()), w()),
            compose(app(b(), w()), b2()),
        ),
        Rule::new(
            "ax-k",
            false,
            RuleKind::Axiom,
            app(app(cc(), b2()), k()),
            compose(app(b(), k()), i()),
        ),
        Rule::new(
            "ax-i",
            false,
            RuleKind::Axiom,
            app(app(cc(), b()), i()),
            compose(app(b(), i()), i()),
        ),
        Rule::new(
            "ax-bc",
            false,
            RuleKind::Axiom,
            compose(b(), cc()),
            compose(compose(app(b(), cc()), cc()), app(b(), b())),
        ),
        Rule::new(
            "ax-bw",
            false,
            RuleKind::Axiom,
            compose(b(), w()),
            compose(
                compose(
                    compose(compose(app(b(), w()), w()), app(b(), cc())),
                    app(b2(), b()),
                ),
                b(),
            ),
        ),
        Rule::new(
            "ax-bk",
            false,
            RuleKind::Axiom,
            compose(b(), k()),
            compose(k(), k()),
        ),
        Rule::new(
            "ax-cc1",
            false,
            RuleKind::Axiom,
            compose(cc(), cc()),
            app(b2(), i()),
        ),
        Rule::new(
            "ax-cc2",
            false,
            RuleKind::Axiom,
            compose(compose(app(b(), cc()), cc()), app(b(), cc())),
            compose(compose(cc(), app(b(), cc())), cc()),
        ),
        Rule::new(
            "ax-cw",
            false,
            RuleKind::Axiom,
            compose(cc(), w()),
            compose(compose(app(b(), w()), cc()), app(b(), cc())),
        ),
        Rule::new(
            "ax-ck",
            false,
            RuleKind::Axiom,
            compose(cc(), k()),
            app(b(), k()),
        ),
        Rule::new("ax-wc", false, RuleKind::Axiom, compose(w(), cc()), w()),
        Rule::new(
            "ax-ww",
            false,
            RuleKind::Axiom,
            compose(w(), w()),
            compose(w(), app(b(), w())),
        ),
        Rule::new(
            "ax-wk",
            false,
            RuleKind::Axiom,
            compose(w(), k()),
            app(b(), i()),
        ),
        Rule::new("ax-i2", true, RuleKind::Axiom, app(b(), i()), i()),
    ];
    // Derived conveniences (replay-tested against the Curry axioms).
    rules.extend([
        Rule::new(
            "assoc",
            false,
            RuleKind::Lemma,
            compose(compose(v("x"), v("y")), v("z")),
            compose(v("x"), compose(v("y"), v("z"))),
        ),
        Rule::new(
            "b-dist",
            false,
            RuleKind::Lemma,
            app(b(), compose(v("x"), v("y"))),
            compose(app(b(), v("x")), app(b(), v("y"))),
        ),
        Rule::new("unit-l", false, RuleKind::Lemma, compose(i(), v("x")), v("x")),
        Rule::new("unit-r", false, RuleKind::Lemma, compose(v("x"), i()), v("x")),
    ]);
    rules
}

/// Recorded pack inclusions.
pub fn pack_includes(name: PackName) -> Vec<PackName> {
    match name {
        PackName::PlanarExt => vec![],
        PackName::Bcpmi => vec![PackName::PlanarExt],
        PackName::Balanced => vec![PackName::Bcpmi],
        PackName::Traced => vec![PackName::Balanced],
        PackName::RibbonDuality => vec![PackName::Balanced],
        PackName::CurryBciwk => vec![],
    }
}

fn own_rules(name: PackName) -> Vec<Rule> {
    match name {
        PackName::PlanarExt => planar_rules(),
        PackName::Bcpmi => bcpmi_rules(),
        PackName::Balanced => balanced_rules(),
        PackName::Traced => traced_rules(),
        PackName::RibbonDuality => ribbon_duality_rules(),
        PackName::CurryBciwk => curry_rules(),
    }
}

/// Builds the named pack with its full transitive rule set.
pub fn axiom_set(name: PackName) -> AxiomSet {
    let mut rules: Vec<Rule> = Vec::new();
    let mut seen: HashSet<String> = HashSet::new();
    fn collect(name: PackName, rules: &mut Vec<Rule>, seen: &mut HashSet<String>) {
        for inc in pack_includes(name) {
            collect(inc, rules, seen);
        }
        for r in own_rules(name) {
            if seen.insert(r.name.clone()) {
                rules.push(r);
            }
        }
    }
    collect(name, &mut rules, &mut seen);
    AxiomSet {
        name,
        includes: pack_includes(name),
        rules,
    }
}

/// Parses a pack by name.
pub fn axiom_set_by_name(name: &str) -> Result<AxiomSet, AxiomError> {
    Ok(axiom_set(PackName::parse(name)?))
}

impl AxiomSet {
    pub fn rule(&self, name: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.name == name)
    }

    /// Pack restricted to its boxed axioms, without bridge or lemma rules.
    pub fn axioms_only(&self) -> AxiomSet {
        AxiomSet {
            name: self.name,
            includes: self.includes.clone(),
            rules: self
                .rules
                .iter()
                .filter(|r| r.kind == RuleKind::Axiom)
                .cloned()
                .collect(),
        }
    }

    /// Pack extended with extra (e.g. definitional) rules.
    pub fn extended(&self, extra: Vec<Rule>) -> AxiomSet {
        let mut rules = self.rules.clone();
        rules.extend(extra);
        AxiomSet {
            name: self.name,
            includes: self.includes.clone(),
            rules,
        }
    }

    /// Plain-text listing, one rule per line: name, lhs, rhs.
    pub fn export_listing(&self) -> String {
        let mut out = String::new();
        for r in &self.rules {
            let arrow = if r.oriented { "->" } else { "=" };
            let kind = match r.kind {
                RuleKind::Axiom => "",
                RuleKind::Bridge => "  [bridge]",
                RuleKind::Lemma => "  [lemma]",
            };
            out.push_str(&format!(
                "{}\t{} {} {}{}\n",
                r.name,
                render_term(&r.lhs),
                arrow,
                render_term(&r.rhs),
                kind
            ));
        }
        out
    }
}

/// A definitional rule, for extending packs (e.g. with the trace/duality
/// bridges).
pub fn definition_rule(name: &str, lhs: Term, rhs: Term) -> Rule {
    Rule::new(name, false, RuleKind::Bridge, lhs, rhs)
}

// ---------------------------------------------------------------------------
// Matching and rewriting
// ---------------------------------------------------------------------------

type Bindings = Vec<(String, Term)>;

fn match_pattern(pat: &Term, t: &Term, binds: &mut Bindings) -> bool {
    match (pat, t) {
        (Term::Var(x), _) => {
            if let Some((_, bound)) = binds.iter().find(|(n, _)| n == x) {
                bound == t
            } else {
                binds.push((x.clone(), t.clone()));
                true
            }
        }
        (Term::Const(a), Term::Const(b)) => a == b,
        (Term::App(pf, pa), Term::App(tf, ta)) => {
            match_pattern(pf, tf, binds) && match_pattern(pa, ta, binds)
        }
        (Term::Bullet(pb), Term::Bullet(tb)) => match_pattern(pb, tb, binds),
        _ => false,
    }
}

fn instantiate(pat: &Term, binds: &Bindings) -> Term {
    match pat {
        Term::Var(x) => binds
            .iter()
            .find(|(n, _)| n == x)
            .map(|(_, t)| t.clone())
            .expect("rule metavariable unbound"),
        Term::Const(_) => pat.clone(),
        Term::App(f, a) => Term::app(instantiate(f, binds), instantiate(a, binds)),
        Term::Bullet(b) => Term::bullet(instantiate(b, binds)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

/// One step of a replayable proof.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProofStep {
    pub rule: String,
    pub pos: Pos,
    pub dir: Direction,
}

/// Applies `rule` at `pos` in the given direction, if it matches there.
pub fn apply_rule_at(t: &Term, rule: &Rule, pos: &[u8], dir: Direction) -> Option<Term> {
    let sub = t.subterm(pos)?;
    let (from, to) = match dir {
        Direction::Forward => (&rule.lhs, &rule.rhs),
        Direction::Backward => (&rule.rhs, &rule.lhs),
    };
    let mut binds = Vec::new();
    if !match_pattern(from, sub, &mut binds) {
        return None;
    }
    // A reversed oriented rule may leave metavariables unbound; refuse such
    // steps rather than inventing terms.
    if to.var_occurrences().iter().any(|x| !binds.iter().any(|(n, _)| n == x)) {
        return None;
    }
    let replacement = instantiate(to, &binds);
    t.replace_at(pos, replacement)
}

/// All single-step rewrites with oriented rules, leftmost-outermost
/// positions first, rules in pack order.
pub fn rewrite_once(t: &Term, set: &AxiomSet) -> Vec<(Term, String, Pos)> {
    let mut out = Vec::new();
    for pos in t.positions() {
        for rule in set.rules.iter().filter(|r| r.oriented) {
            if let Some(next) = apply_rule_at(t, rule, &pos, Direction::Forward) {
                out.push((next, rule.name.clone(), pos.clone()));
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct Normalized {
    pub term: Term,
    pub steps: Vec<(String, Pos)>,
    pub fuel_exhausted: bool,
    pub cycle_detected: bool,
}

/// Repeatedly applies the first available oriented rewrite. On a cycle,
/// returns the smallest term seen (node count, then lexicographic render).
pub fn normalize(t: &Term, set: &AxiomSet, fuel: usize) -> Normalized {
    let mut current = t.clone();
    let mut steps = Vec::new();
    let mut visited: HashSet<Term> = HashSet::new();
    visited.insert(current.clone());
    let mut smallest = current.clone();
    let mut remaining = fuel;
    loop {
        if remaining == 0 {
            return Normalized {
                term: current,
                steps,
                fuel_exhausted: true,
                cycle_detected: false,
            };
        }
        let mut next = None;
        'outer: for pos in current.positions() {
            for rule in set.rules.iter().filter(|r| r.oriented) {
                if let Some(n) = apply_rule_at(&current, rule, &pos, Direction::Forward) {
                    next = Some((n, rule.name.clone(), pos));
                    break 'outer;
                }
            }
        }
        match next {
            None => {
                return Normalized {
                    term: current,
                    steps,
                    fuel_exhausted: false,
                    cycle_detected: false,
                }
            }
            Some((n, rule, pos)) => {
                remaining -= 1;
                steps.push((rule, pos));
                if term_measure(&n) < term_measure(&smallest) {
                    smallest = n.clone();
                }
                if !visited.insert(n.clone()) {
                    return Normalized {
                        term: smallest,
                        steps,
                        fuel_exhausted: false,
                        cycle_detected: true,
                    };
                }
                current = n;
            }
        }
    }
}

fn term_measure(t: &Term) -> (usize, String) {
    (t.node_count(), render_term(t))
}

// ---------------------------------------------------------------------------
// Bounded bidirectional equality search
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Verdict {
    Equal(Vec<ProofStep>),
    Unknown { explored: usize },
}

impl Verdict {
    pub fn is_equal(&self) -> bool {
        matches!(self, Verdict::Equal(_))
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Side {
    Left,
    Right,
}

/// Bidirectional breadth-first search over the rewrite graph, rules used in
/// both directions, memoized per call. `fuel` counts explored nodes.
pub fn prove_equal(t: &Term, u: &Term, set: &AxiomSet, fuel: usize) -> Verdict {
    if t == u {
        return Verdict::Equal(Vec::new());
    }
    // parent maps: term -> (predecessor, step applied to reach it)
    let mut seen_l: HashMap<Term, Option<(Term, ProofStep)>> = HashMap::new();
    let mut seen_r: HashMap<Term, Option<(Term, ProofStep)>> = HashMap::new();
    seen_l.insert(t.clone(), None);
    seen_r.insert(u.clone(), None);
    let mut queue: VecDeque<(Term, Side)> = VecDeque::new();
    queue.push_back((t.clone(), Side::Left));
    queue.push_back((u.clone(), Side::Right));
    let mut explored = 0usize;

    while let Some((cur, side)) = queue.pop_front() {
        if explored >= fuel {
            return Verdict::Unknown { explored };
        }
        explored += 1;
        for pos in cur.positions() {
            for rule in &set.rules {
                for dir in [Direction::Forward, Direction::Backward] {
                    let Some(next) = apply_rule_at(&cur, rule, &pos, dir) else {
                        continue;
                    };
                    let step = ProofStep {
                        rule: rule.name.clone(),
                        pos: pos.clone(),
                        dir,
                    };
                    let (mine, other) = match side {
                        Side::Left => (&mut seen_l, &seen_r),
                        Side::Right => (&mut seen_r, &seen_l),
                    };
                    if mine.contains_key(&next) {
                        continue;
                    }
                    if other.contains_key(&next) {
                        mine.insert(next.clone(), Some((cur.clone(), step)));
                        let proof = reconstruct(&seen_l, &seen_r, &next);
                        return Verdict::Equal(proof);
                    }
                    mine.insert(next.clone(), Some((cur.clone(), step)));
                    queue.push_back((next, side));
                }
            }
        }
    }
    Verdict::Unknown { explored }
}

fn reconstruct(
    seen_l: &HashMap<Term, Option<(Term, ProofStep)>>,
    seen_r: &HashMap<Term, Option<(Term, ProofStep)>>,
    meet: &Term,
) -> Vec<ProofStep> {
    // walk back to the left root
    let mut left_steps = Vec::new();
    let mut cur = meet.clone();
    while let Some(Some((prev, step))) = seen_l.get(&cur) {
        left_steps.push(step.clone());
        cur = prev.clone();
    }
    left_steps.reverse();
    // walk forward to the right root, flipping directions
    let mut right_steps = Vec::new();
    let mut cur = meet.clone();
    while let Some(Some((prev, step))) = seen_r.get(&cur) {
        let flipped = ProofStep {
            rule: step.rule.clone(),
            pos: step.pos.clone(),
            dir: match step.dir {
                Direction::Forward => Direction::Backward,
                Direction::Backward => Direction::Forward,
            },
        };
        right_steps.push(flipped);
        cur = prev.clone();
    }
    left_steps.extend(right_steps);
    left_steps
}

/// Replays a proof, returning the final term if every step applies.
pub fn replay_proof(t: &Term, set: &AxiomSet, proof: &[ProofStep]) -> Option<Term> {
    let mut cur = t.clone();
    for step in proof {
        let rule = set.rule(&step.rule)?;
        cur = apply_rule_at(&cur, rule, &step.pos, step.dir)?;
    }
    Some(cur)
}

// ---------------------------------------------------------------------------
// Model-based validation
// ---------------------------------------------------------------------------

/// Three-valued result of a model equality check.
#[derive(Debug, Clone)]
pub enum ModelEq {
    Equal,
    Distinct { witness: String },
    Inconclusive { reason: String },
}

/// Hooks a concrete model provides so axiom packs can be validated in it.
pub trait ModelHooks {
    type Elem: Clone;

    fn constant(&self, c: Const) -> Result<Self::Elem, String>;
    fn apply(&self, f: &Self::Elem, a: &Self::Elem) -> Self::Elem;
    fn bullet(&self, a: &Self::Elem) -> Self::Elem;
    /// Deterministic sampler for metavariable instantiations.
    fn sample(&self, index: usize) -> Self::Elem;
    fn equal(&self, a: &Self::Elem, b: &Self::Elem) -> ModelEq;
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RuleReport {
    pub rule: String,
    pub pass: usize,
    pub fail: usize,
    pub inconclusive: usize,
    pub witnesses: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Report {
    pub pack: String,
    pub samples_per_rule: usize,
    pub rules: Vec<RuleReport>,
}

impl Report {
    pub fn total_fail(&self) -> usize {
        self.rules.iter().map(|r| r.fail).sum()
    }

    pub fn total_inconclusive(&self) -> usize {
        self.rules.iter().map(|r| r.inconclusive).sum()
    }

    pub fn total_checks(&self) -> usize {
        self.rules
            .iter()
            .map(|r| r.pass + r.fail + r.inconclusive)
            .sum()
    }
}

fn eval_in_model<H: ModelHooks>(
    t: &Term,
    hooks: &H,
    env: &HashMap<String, H::Elem>,
) -> Result<H::Elem, String> {
    match t {
        Term::Const(c) => hooks.constant(*c),
        Term::Var(x) => env
            .get(x)
            .cloned()
            .ok_or_else(|| format!("unbound metavariable {x}")),
        Term::App(f, a) => {
            let fe = eval_in_model(f.as_ref(), hooks, env)?;
            let ae = eval_in_model(a.as_ref(), hooks, env)?;
            Ok(hooks.apply(&fe, &ae))
        }
        Term::Bullet(b) => {
            let be = eval_in_model(b.as_ref(), hooks, env)?;
            Ok(hooks.bullet(&be))
        }
    }
}

/// Instantiates each rule's metavariables with sampled model elements,
/// evaluates both sides, and records pass/fail/inconclusive counts.
pub fn validate_axioms<H: ModelHooks>(set: &AxiomSet, hooks: &H, budget: usize) -> Report {
    let mut reports = Vec::new();
    for rule in &set.rules {
        let vars: Vec<String> = {
            let mut vs: Vec<String> = pattern_vars(&rule.lhs).into_iter().collect();
            for v in pattern_vars(&rule.rhs) {
                if !vs.contains(&v) {
                    vs.push(v);
                }
            }
            vs.sort();
            vs
        };
        let instances = if vars.is_empty() { 1 } else { budget };
        let mut pass = 0;
        let mut fail = 0;
        let mut inconclusive = 0;
        let mut witnesses = Vec::new();
        for inst in 0..instances {
            let mut env = HashMap::new();
            for (vi, name) in vars.iter().enumerate() {
                env.insert(name.clone(), hooks.sample(inst * vars.len() + vi));
            }
            let lhs = eval_in_model(&rule.lhs, hooks, &env);
            let rhs = eval_in_model(&rule.rhs, hooks, &env);
            match (lhs, rhs) {
                (Ok(l), Ok(r)) => match hooks.equal(&l, &r) {
                    ModelEq::Equal => pass += 1,
                    ModelEq::Distinct { witness } => {
                        fail += 1;
                        if witnesses.len() < 3 {
                            witnesses.push(format!("instance {inst}: {witness}"));
                        }
                    }
                    ModelEq::Inconclusive { reason } => {
                        inconclusive += 1;
                        if witnesses.len() < 3 {
                            witnesses.push(format!("instance {inst} inconclusive: {reason}"));
                        }
                    }
                },
                (Err(e), _) | (_, Err(e)) => {
                    inconclusive += 1;
                    if witnesses.len() < 3 {
                        witnesses.push(format!("instance {inst} inconclusive: {e}"));
                    }
                }
            }
        }
        reports.push(RuleReport {
            rule: rule.name.clone(),
            pass,
            fail,
            inconclusive,
            witnesses,
        });
    }
    Report {
        pack: set.name.as_str().to_string(),
        samples_per_rule: budget,
        rules: reports,
    }
}

/// Ground fillers for instantiating rule metavariables in closure tests:
/// nested bullets of `I` are distinct and live in every pack.
pub fn ground_fillers(n: usize) -> Vec<Term> {
    (0..n)
        .map(|k| {
            let mut t = Term::con(Const::I);
            for _ in 0..=k {
                t = Term::bullet(t);
            }
            t
        })
        .collect()
}

/// Instantiates a rule's sides with ground fillers (metavariables in sorted
/// order get fillers in order).
pub fn instantiate_rule_ground(rule: &Rule) -> (Term, Term) {
    let mut vars: Vec<String> = pattern_vars(&rule.lhs)
        .union(&pattern_vars(&rule.rhs))
        .cloned()
        .collect();
    vars.sort();
    let fillers = ground_fillers(vars.len());
    let mut lhs = rule.lhs.clone();
    let mut rhs = rule.rhs.clone();
    for (v, g) in vars.iter().zip(fillers.iter()) {
        lhs = lhs.subst_var(v, g);
        rhs = rhs.subst_var(v, g);
    }
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::parse_term;

    fn pt(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    #[test]
    fn packs_build_and_contain_expected_rules() {
        let traced = axiom_set(PackName::Traced);
        assert!(traced.rule("yanking+").is_some());
        let bcpmi = axiom_set(PackName::Bcpmi);
        assert!(bcpmi.rule("cox1+").is_some());
        let planar = axiom_set(PackName::PlanarExt);
        assert!(planar.rule("BI").is_some());
        assert!(planar.rule("C+").is_none());
    }

    #[test]
    fn yanking_rule_shape() {
        let traced = axiom_set(PackName::Traced);
        let r = traced.rule("yanking+").unwrap();
        assert_eq!(r.lhs, pt("Tr C+"));
        assert_eq!(r.rhs, pt("Th+"));
    }

    #[test]
    fn cox1_rule_shape() {
        let bcpmi = axiom_set(PackName::Bcpmi);
        let r = bcpmi.rule("cox1+").unwrap();
        assert_eq!(r.lhs, pt("C+ ∘ C-"));
        assert_eq!(r.rhs, pt("B (B I)"));
    }

    #[test]
    fn rewrite_once_c_rule_at_root() {
        let bcpmi = axiom_set(PackName::Bcpmi);
        let t = pt("C+ a0' b0' c0'");
        let results = rewrite_once(&t, &bcpmi);
        let expect = pt("a0' c0' b0'");
        assert!(results.iter().any(|(n, r, p)| n == &expect && r == "C+" && p.is_empty()));
    }

    #[test]
    fn rewrite_once_normal_form_is_empty() {
        let planar = axiom_set(PackName::PlanarExt);
        assert!(rewrite_once(&pt("I"), &planar).is_empty());
    }

    #[test]
    fn rewrite_once_bi() {
        let planar = axiom_set(PackName::PlanarExt);
        let results = rewrite_once(&pt("B I"), &planar);
        assert!(results
            .iter()
            .any(|(n, r, p)| n == &pt("I") && r == "BI" && p.is_empty()));
    }

    #[test]
    fn normalize_bi() {
        let planar = axiom_set(PackName::PlanarExt);
        let n = normalize(&pt("B I"), &planar, 10);
        assert_eq!(n.term, pt("I"));
        assert!(!n.fuel_exhausted);
    }

    #[test]
    fn normalize_yanking() {
        let traced = axiom_set(PackName::Traced);
        let n = normalize(&pt("Tr C+"), &traced, 10);
        assert_eq!(n.term, pt("Th+"));
        let n = normalize(&pt("Tr C-"), &traced, 10);
        assert_eq!(n.term, pt("Th-"));
    }

    #[test]
    fn normalize_bullet_bridge() {
        let bcpmi = axiom_set(PackName::Bcpmi);
        let n = normalize(&pt("C+ I a0'"), &bcpmi, 10);
        assert_eq!(n.term, pt("a0''"));
    }

    #[test]
    fn prove_arity_i_one_step() {
        let planar = axiom_set(PackName::PlanarExt);
        match prove_equal(&pt("I' ∘ B"), &pt("B I"), &planar, 100) {
            Verdict::Equal(proof) => assert_eq!(proof.len(), 1),
            v => panic!("expected Equal, got {v:?}"),
        }
    }

    #[test]
    fn prove_cox1() {
        let bcpmi = axiom_set(PackName::Bcpmi);
        assert!(prove_equal(&pt("C+ ∘ C-"), &pt("B (B I)"), &bcpmi, 100).is_equal());
    }

    #[test]
    fn prove_bullet_example() {
        let bcpmi = axiom_set(PackName::Bcpmi);
        let a0 = pt("Tr'");
        let lhs = Term::app(Term::bullet(a0.clone()), pt("Th+"));
        let rhs = Term::app(pt("Th+"), a0);
        assert!(prove_equal(&lhs, &rhs, &bcpmi, 100).is_equal());
    }

    #[test]
    fn prove_chain_with_proof_replay() {
        let planar = axiom_set(PackName::PlanarExt);
        let lhs = pt("((B I)' ∘ B) ∘ B");
        let rhs = pt("B");
        match prove_equal(&lhs, &rhs, &planar, 10_000) {
            Verdict::Equal(proof) => {
                let end = replay_proof(&lhs, &planar, &proof).expect("replay applies");
                assert_eq!(end, rhs);
            }
            v => panic!("expected Equal, got {v:?}"),
        }
    }

    #[test]
    fn unknown_when_unprovable() {
        let planar = axiom_set(PackName::PlanarExt);
        let v = prove_equal(&pt("B"), &pt("I"), &planar, 200);
        match v {
            Verdict::Unknown { explored } => assert!(explored > 0),
            _ => panic!("B = I should not be provable"),
        }
    }

    #[test]
    fn export_listing_has_one_line_per_rule() {
        let pack = axiom_set(PackName::Balanced);
        let listing = pack.export_listing();
        assert_eq!(listing.lines().count(), pack.rules.len());
        assert!(listing.contains("theta2+"));
    }

    #[test]
    fn pack_closure_every_rule_proves_in_one_step() {
        for name in PackName::ALL {
            let pack = axiom_set(name);
            for rule in &pack.rules {
                let (lhs, rhs) = instantiate_rule_ground(rule);
                match prove_equal(&lhs, &rhs, &pack, 50_000) {
                    Verdict::Equal(proof) => {
                        assert!(
                            proof.len() <= 1,
                            "rule {} in {} took {} steps",
                            rule.name,
                            name,
                            proof.len()
                        );
                    }
                    v => panic!("rule {} in {} not proved: {v:?}", rule.name, name),
                }
            }
        }
    }
}
