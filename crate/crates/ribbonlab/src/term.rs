//! Combinator term syntax: construction, parsing, printing, and planar
//! bracket abstraction.

use std::fmt;
use std::rc::Rc;

use thiserror::Error;

/// Combinator constants.
///
/// `W`, `K` and `C` belong to the symmetric (Curry) pack only; the other nine
/// are the ribbon constants.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Const {
    B,
    Cplus,
    Cminus,
    I,
    ThetaPlus,
    ThetaMinus,
    Tr,
    Alpha,
    Beta,
    W,
    K,
    C,
}

impl Const {
    pub const ALL: [Const; 12] = [
        Const::B,
        Const::Cplus,
        Const::Cminus,
        Const::I,
        Const::ThetaPlus,
        Const::ThetaMinus,
        Const::Tr,
        Const::Alpha,
        Const::Beta,
        Const::W,
        Const::K,
        Const::C,
    ];

    /// The nine constants that make sense in every ribbon pack.
    pub const RIBBON: [Const; 9] = [
        Const::B,
        Const::Cplus,
        Const::Cminus,
        Const::I,
        Const::ThetaPlus,
        Const::ThetaMinus,
        Const::Tr,
        Const::Alpha,
        Const::Beta,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Const::B => "B",
            Const::Cplus => "C+",
            Const::Cminus => "C-",
            Const::I => "I",
            Const::ThetaPlus => "Th+",
            Const::ThetaMinus => "Th-",
            Const::Tr => "Tr",
            Const::Alpha => "Alpha",
            Const::Beta => "Beta",
            Const::W => "W",
            Const::K => "K",
            Const::C => "C",
        }
    }

    pub fn from_name(s: &str) -> Option<Const> {
        Const::ALL.iter().copied().find(|c| c.name() == s)
    }
}

/// Applicative combinator terms. `Var` nodes only appear in polynomials fed
/// to bracket abstraction and in schematic rule patterns; ground terms are
/// `Var`-free.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Term {
    Const(Const),
    App(Rc<Term>, Rc<Term>),
    Bullet(Rc<Term>),
    Var(String),
}

/// Path into a term: 0 descends into the function (or bullet body), 1 into
/// the argument.
pub type Pos = Vec<u8>;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TermError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown constant name `{0}`")]
    UnknownConstant(String),
    #[error("abstraction precondition violated: {0}")]
    Abstraction(String),
}

impl Term {
    pub fn con(c: Const) -> Term {
        Term::Const(c)
    }

    pub fn app(f: Term, a: Term) -> Term {
        Term::App(Rc::new(f), Rc::new(a))
    }

    pub fn apps<I: IntoIterator<Item = Term>>(f: Term, args: I) -> Term {
        args.into_iter().fold(f, Term::app)
    }

    pub fn bullet(body: Term) -> Term {
        Term::Bullet(Rc::new(body))
    }

    pub fn var(name: &str) -> Term {
        Term::Var(name.to_string())
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Const(_) => true,
            Term::Var(_) => false,
            Term::App(f, a) => f.is_ground() && a.is_ground(),
            Term::Bullet(b) => b.is_ground(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Term::Const(_) | Term::Var(_) => 1,
            Term::App(f, a) => 1 + f.node_count() + a.node_count(),
            Term::Bullet(b) => 1 + b.node_count(),
        }
    }

    pub fn contains_const(&self, c: Const) -> bool {
        match self {
            Term::Const(k) => *k == c,
            Term::Var(_) => false,
            Term::App(f, a) => f.contains_const(c) || a.contains_const(c),
            Term::Bullet(b) => b.contains_const(c),
        }
    }

    pub fn subterm(&self, pos: &[u8]) -> Option<&Term> {
        let mut cur = self;
        for step in pos {
            cur = match (cur, step) {
                (Term::App(f, _), 0) => f,
                (Term::App(_, a), 1) => a,
                (Term::Bullet(b), 0) => b,
                _ => return None,
            };
        }
        Some(cur)
    }

    /// Rebuilds the term with `replacement` grafted at `pos`.
    pub fn replace_at(&self, pos: &[u8], replacement: Term) -> Option<Term> {
        if pos.is_empty() {
            return Some(replacement);
        }
        match (self, pos[0]) {
            (Term::App(f, a), 0) => Some(Term::App(
                Rc::new(f.replace_at(&pos[1..], replacement)?),
                a.clone(),
            )),
            (Term::App(f, a), 1) => Some(Term::App(
                f.clone(),
                Rc::new(a.replace_at(&pos[1..], replacement)?),
            )),
            (Term::Bullet(b), 0) => Some(Term::Bullet(Rc::new(
                b.replace_at(&pos[1..], replacement)?,
            ))),
            _ => None,
        }
    }

    /// All positions in leftmost-outermost order (pre-order walk).
    pub fn positions(&self) -> Vec<Pos> {
        let mut out = Vec::new();
        let mut stack = vec![(self, Vec::new())];
        while let Some((t, pos)) = stack.pop() {
            out.push(pos.clone());
            match t {
                Term::App(f, a) => {
                    let mut pa = pos.clone();
                    pa.push(1);
                    stack.push((a, pa));
                    let mut pf = pos;
                    pf.push(0);
                    stack.push((f, pf));
                }
                Term::Bullet(b) => {
                    let mut pb = pos;
                    pb.push(0);
                    stack.push((b, pb));
                }
                _ => {}
            }
        }
        out
    }

    /// Substitutes `g` for every occurrence of variable `x`.
    pub fn subst_var(&self, x: &str, g: &Term) -> Term {
        match self {
            Term::Var(v) if v == x => g.clone(),
            Term::Var(_) | Term::Const(_) => self.clone(),
            Term::App(f, a) => Term::app(f.subst_var(x, g), a.subst_var(x, g)),
            Term::Bullet(b) => Term::bullet(b.subst_var(x, g)),
        }
    }

    /// Substitutes constants, used when collapsing braided terms onto the
    /// symmetric pack.
    pub fn subst_const(&self, map: &[(Const, Term)]) -> Term {
        match self {
            Term::Const(c) => map
                .iter()
                .find(|(k, _)| k == c)
                .map(|(_, t)| t.clone())
                .unwrap_or_else(|| self.clone()),
            Term::Var(_) => self.clone(),
            Term::App(f, a) => Term::app(f.subst_const(map), a.subst_const(map)),
            Term::Bullet(b) => Term::bullet(b.subst_const(map)),
        }
    }

    /// Free variables in left-to-right occurrence order, with repeats.
    pub fn var_occurrences(&self) -> Vec<String> {
        let mut out = Vec::new();
        fn walk(t: &Term, out: &mut Vec<String>) {
            match t {
                Term::Var(v) => out.push(v.clone()),
                Term::Const(_) => {}
                Term::App(f, a) => {
                    walk(f, out);
                    walk(a, out);
                }
                Term::Bullet(b) => walk(b, out),
            }
        }
        walk(self, &mut out);
        out
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_term(self))
    }
}

/// `a ∘ b`, i.e. `B a b`.
pub fn compose(a: Term, b: Term) -> Term {
    Term::app(Term::app(Term::con(Const::B), a), b)
}

/// Splits a composition node, if the term is one.
pub fn as_compose(t: &Term) -> Option<(&Term, &Term)> {
    if let Term::App(f, b) = t {
        if let Term::App(g, a) = f.as_ref() {
            if matches!(g.as_ref(), Term::Const(Const::B)) {
                return Some((a, b));
            }
        }
    }
    None
}

/// `B^n` with `B^0 = I` and `B^1` normalized to `B` (unit law `a ∘ I = a`).
pub fn b_power(n: usize) -> Term {
    match n {
        0 => Term::con(Const::I),
        1 => Term::con(Const::B),
        _ => compose(Term::con(Const::B), b_power(n - 1)),
    }
}

/// `a•`.
pub fn bullet(a: Term) -> Term {
    Term::bullet(a)
}

/// Planar bracket abstraction: `λ*x.x = I`, `λ*x.(p q) = B q• (λ*x.p)` when
/// `x` is free in `p`, and `λ*x.(p q) = B p (λ*x.q)` when `x` is free in `q`.
pub fn lambda_star(x: &str, p: &Term) -> Result<Term, TermError> {
    let occs = p.var_occurrences();
    let uses = occs.iter().filter(|v| v.as_str() == x).count();
    if uses == 0 {
        return Err(TermError::Abstraction(format!("`{x}` is not free in the body")));
    }
    if uses > 1 {
        return Err(TermError::Abstraction(format!("`{x}` is used more than once")));
    }
    match occs.last() {
        Some(last) if last == x => {}
        _ => {
            return Err(TermError::Abstraction(format!(
                "`{x}` is not the rightmost variable"
            )))
        }
    }
    abstract_planar(x, p)
}

fn abstract_planar(x: &str, p: &Term) -> Result<Term, TermError> {
    match p {
        Term::Var(v) if v == x => Ok(Term::con(Const::I)),
        Term::App(f, a) => {
            let in_fun = f.var_occurrences().iter().any(|v| v == x);
            if in_fun {
                let body = abstract_planar(x, f)?;
                Ok(Term::app(
                    Term::app(Term::con(Const::B), Term::bullet(a.as_ref().clone())),
                    body,
                ))
            } else {
                let body = abstract_planar(x, a)?;
                Ok(Term::app(Term::app(Term::con(Const::B), f.as_ref().clone()), body))
            }
        }
        Term::Bullet(_) => Err(TermError::Abstraction(
            "cannot abstract under a bullet".to_string(),
        )),
        _ => Err(TermError::Abstraction(format!("`{x}` does not occur here"))),
    }
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Name(String),
    LParen,
    RParen,
    Prime,
    Compose,
}

fn lex(input: &str) -> Result<Vec<(usize, Tok)>, TermError> {
    let mut toks = Vec::new();
    let bytes: Vec<char> = input.chars().collect();
    let mut i = 0;
    let mut byte_pos = 0;
    while i < bytes.len() {
        let ch = bytes[i];
        let start = byte_pos;
        match ch {
            c if c.is_whitespace() => {
                i += 1;
                byte_pos += c.len_utf8();
            }
            '(' => {
                toks.push((start, Tok::LParen));
                i += 1;
                byte_pos += 1;
            }
            ')' => {
                toks.push((start, Tok::RParen));
                i += 1;
                byte_pos += 1;
            }
            '\'' => {
                toks.push((start, Tok::Prime));
                i += 1;
                byte_pos += 1;
            }
            '∘' => {
                toks.push((start, Tok::Compose));
                i += 1;
                byte_pos += '∘'.len_utf8();
            }
            ';' => {
                toks.push((start, Tok::Compose));
                i += 1;
                byte_pos += 1;
            }
            c if c.is_alphanumeric() || c == '_' => {
                let mut name = String::new();
                while i < bytes.len() && (bytes[i].is_alphanumeric() || bytes[i] == '_') {
                    name.push(bytes[i]);
                    byte_pos += bytes[i].len_utf8();
                    i += 1;
                }
                // `C+`, `C-`, `Th+`, `Th-` carry their sign.
                if i < bytes.len() && (bytes[i] == '+' || bytes[i] == '-') {
                    let signed = format!("{}{}", name, bytes[i]);
                    if Const::from_name(&signed).is_some() {
                        name = signed;
                        byte_pos += 1;
                        i += 1;
                    }
                }
                toks.push((start, Tok::Name(name)));
            }
            other => {
                return Err(TermError::Syntax {
                    pos: start,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        }
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    idx: usize,
    len: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.idx).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.idx).map(|(p, _)| *p).unwrap_or(self.len)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.idx).map(|(_, t)| t.clone());
        self.idx += 1;
        t
    }

    fn parse_compose(&mut self) -> Result<Term, TermError> {
        let mut acc = self.parse_app()?;
        while matches!(self.peek(), Some(Tok::Compose)) {
            self.bump();
            let rhs = self.parse_app()?;
            acc = compose(acc, rhs);
        }
        Ok(acc)
    }

    fn parse_app(&mut self) -> Result<Term, TermError> {
        let mut acc = self.parse_postfix()?;
        loop {
            match self.peek() {
                Some(Tok::Name(_)) | Some(Tok::LParen) => {
                    let arg = self.parse_postfix()?;
                    acc = Term::app(acc, arg);
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn parse_postfix(&mut self) -> Result<Term, TermError> {
        let mut t = self.parse_atom()?;
        while matches!(self.peek(), Some(Tok::Prime)) {
            self.bump();
            t = Term::bullet(t);
        }
        Ok(t)
    }

    fn parse_atom(&mut self) -> Result<Term, TermError> {
        let pos = self.pos();
        match self.bump() {
            Some(Tok::Name(name)) => {
                if let Some(c) = Const::from_name(&name) {
                    Ok(Term::con(c))
                } else if name.chars().next().is_some_and(|c| c.is_lowercase()) {
                    Ok(Term::Var(name))
                } else {
                    Err(TermError::UnknownConstant(name))
                }
            }
            Some(Tok::LParen) => {
                let t = self.parse_compose()?;
                match self.bump() {
                    Some(Tok::RParen) => Ok(t),
                    _ => Err(TermError::Syntax {
                        pos: self.pos(),
                        msg: "expected `)`".to_string(),
                    }),
                }
            }
            other => Err(TermError::Syntax {
                pos,
                msg: format!("expected a term, found {other:?}"),
            }),
        }
    }
}

/// Parses the term grammar. `x ∘ y` (or `x ; y`) desugars to `B x y`; the
/// postfix apostrophe to `Bullet`.
pub fn parse_term(text: &str) -> Result<Term, TermError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        idx: 0,
        len: text.len(),
    };
    let t = p.parse_compose()?;
    if p.idx != p.toks.len() {
        return Err(TermError::Syntax {
            pos: p.pos(),
            msg: "trailing input".to_string(),
        });
    }
    Ok(t)
}

// Precedence levels used by the renderer: compositions (0), application
// spines (1), postfix/atoms (2).
fn render_prec(t: &Term, prec: u8, out: &mut String) {
    if let Some((a, b)) = as_compose(t) {
        if prec > 0 {
            out.push('(');
        }
        render_prec(a, 0, out);
        out.push_str(" ∘ ");
        render_prec(b, 1, out);
        if prec > 0 {
            out.push(')');
        }
        return;
    }
    match t {
        Term::Const(c) => out.push_str(c.name()),
        Term::Var(v) => out.push_str(v),
        Term::App(f, a) => {
            if prec > 1 {
                out.push('(');
            }
            render_prec(f, 1, out);
            out.push(' ');
            render_prec(a, 2, out);
            if prec > 1 {
                out.push(')');
            }
        }
        Term::Bullet(b) => {
            match b.as_ref() {
                Term::Const(_) | Term::Var(_) | Term::Bullet(_) => render_prec(b, 2, out),
                _ => {
                    out.push('(');
                    render_prec(b, 0, out);
                    out.push(')');
                }
            }
            out.push('\'');
        }
    }
}

/// Renders with minimal parentheses; `parse_term(render_term(t))` returns a
/// term structurally equal to `t`.
pub fn render_term(t: &Term) -> String {
    let mut s = String::new();
    render_prec(t, 0, &mut s);
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn b() -> Term {
        Term::con(Const::B)
    }
    fn i() -> Term {
        Term::con(Const::I)
    }

    #[test]
    fn parse_simple_application() {
        assert_eq!(parse_term("B I").unwrap(), Term::app(b(), i()));
    }

    #[test]
    fn parse_left_associates() {
        let t = parse_term("B I Tr").unwrap();
        assert_eq!(t, Term::app(Term::app(b(), i()), Term::con(Const::Tr)));
    }

    #[test]
    fn parse_compose_sugar() {
        let t = parse_term("C+ ∘ C-").unwrap();
        assert_eq!(t, compose(Term::con(Const::Cplus), Term::con(Const::Cminus)));
        assert_eq!(parse_term("C+ ; C-").unwrap(), t);
    }

    #[test]
    fn parse_trefoil_body() {
        let t = parse_term("Tr (Tr (C+ ∘ C+ ∘ C+))").unwrap();
        let c = Term::con(Const::Cplus);
        let body = compose(compose(c.clone(), c.clone()), c);
        let expect = Term::app(
            Term::con(Const::Tr),
            Term::app(Term::con(Const::Tr), body),
        );
        assert_eq!(t, expect);
    }

    #[test]
    fn parse_bullet_sugar() {
        assert_eq!(parse_term("I'").unwrap(), Term::bullet(i()));
        assert_eq!(
            parse_term("(B I)'").unwrap(),
            Term::bullet(Term::app(b(), i()))
        );
    }

    #[test]
    fn render_examples() {
        assert_eq!(render_term(&Term::app(b(), i())), "B I");
        assert_eq!(render_term(&Term::bullet(Term::app(b(), i()))), "(B I)'");
        assert_eq!(
            render_term(&Term::app(
                Term::app(b(), Term::con(Const::Cplus)),
                Term::con(Const::Cminus)
            )),
            "C+ ∘ C-"
        );
    }

    #[test]
    fn unknown_constant_is_rejected() {
        assert!(matches!(
            parse_term("Foo"),
            Err(TermError::UnknownConstant(_))
        ));
    }

    #[test]
    fn syntax_error_has_position() {
        match parse_term("B @") {
            Err(TermError::Syntax { pos, .. }) => assert_eq!(pos, 2),
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn compose_builds_b_application() {
        let t = compose(Term::con(Const::Cplus), Term::con(Const::Cminus));
        assert_eq!(render_term(&t), "C+ ∘ C-");
        assert!(as_compose(&t).is_some());
    }

    #[test]
    fn b_power_small_cases() {
        assert_eq!(b_power(0), i());
        assert_eq!(b_power(1), b());
        assert_eq!(b_power(2), compose(b(), b()));
        assert_eq!(render_term(&b_power(3)), "B ∘ (B ∘ B)");
    }

    #[test]
    fn lambda_star_identity() {
        assert_eq!(lambda_star("x", &Term::var("x")).unwrap(), i());
    }

    #[test]
    fn lambda_star_argument_case() {
        // λ*x. a0 x = B a0 I for ground a0
        let a0 = Term::con(Const::ThetaPlus);
        let p = Term::app(a0.clone(), Term::var("x"));
        let got = lambda_star("x", &p).unwrap();
        assert_eq!(got, Term::app(Term::app(b(), a0), i()));
    }

    #[test]
    fn lambda_star_function_case() {
        // λ*x. x a0 = B a0' I for ground a0
        let a0 = Term::con(Const::ThetaPlus);
        let p = Term::app(Term::var("x"), a0.clone());
        let got = lambda_star("x", &p).unwrap();
        assert_eq!(got, Term::app(Term::app(b(), Term::bullet(a0)), i()));
    }

    #[test]
    fn lambda_star_rejects_non_rightmost() {
        let p = Term::app(Term::var("x"), Term::var("y"));
        assert!(lambda_star("x", &p).is_err());
    }

    #[test]
    fn lambda_star_rejects_duplicates() {
        let p = Term::app(Term::var("x"), Term::var("x"));
        assert!(lambda_star("x", &p).is_err());
    }

    fn arb_term() -> impl Strategy<Value = Term> {
        let leaf = prop_oneof![
            proptest::sample::select(Const::ALL.to_vec()).prop_map(Term::con),
            "[a-z][a-z0-9]{0,3}".prop_map(|s| Term::Var(s)),
        ];
        leaf.prop_recursive(5, 64, 3, |inner| {
            prop_oneof![
                (inner.clone(), inner.clone()).prop_map(|(f, a)| Term::app(f, a)),
                inner.clone().prop_map(Term::bullet),
                (inner.clone(), inner).prop_map(|(a, b)| compose(a, b)),
            ]
        })
    }

    proptest! {
        #[test]
        fn render_parse_round_trip(t in arb_term()) {
            let rendered = render_term(&t);
            let back = parse_term(&rendered).unwrap();
            prop_assert_eq!(back, t);
        }
    }
}
