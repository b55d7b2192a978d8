//! Sliced framed-tangle diagrams: the semantic oracle for the geometric
//! fragment. Strand 0 is the bottom wire; left tensor adds below, weakening
//! pads above.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arity::Arity;
use crate::poly::LaurentPoly;
use crate::prob::{compose_m, id, make_morphism_trusted, tensor_left, tensor_right, Morphism};
use crate::term::{render_term, Const, Term};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Gen {
    XPos,
    XNeg,
    TwistPos,
    TwistNeg,
    Cup,
    Cap,
}

impl Gen {
    /// (inputs, outputs)
    pub fn width(self) -> (usize, usize) {
        match self {
            Gen::XPos | Gen::XNeg => (2, 2),
            Gen::TwistPos | Gen::TwistNeg => (1, 1),
            Gen::Cup => (0, 2),
            Gen::Cap => (2, 0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Slice {
    pub offset: usize,
    pub gen: Gen,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TangleDiagram {
    pub dom: usize,
    pub cod: usize,
    pub slices: Vec<Slice>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum TangleError {
    #[error("slice {index} ({gen:?} at offset {offset}) does not fit width {width}")]
    Width {
        index: usize,
        gen: Gen,
        offset: usize,
        width: usize,
    },
    #[error("diagram codomain mismatch: slices yield {got}, declared {declared}")]
    CodMismatch { got: usize, declared: usize },
    #[error("composition widths differ: {left} vs {right}")]
    ComposeMismatch { left: usize, right: usize },
    #[error("term is not in the geometric fragment at `{subterm}`: {reason}")]
    NotGeometric { subterm: String, reason: String },
    #[error("diagram is open ({dom} -> {cod}); a closed diagram is required")]
    OpenDiagram { dom: usize, cod: usize },
    #[error("crossing count {count} exceeds the limit {limit}")]
    CrossingLimit { count: usize, limit: usize },
    #[error("cannot close a diagram with dom {dom} != cod {cod}")]
    CannotClose { dom: usize, cod: usize },
}

impl TangleDiagram {
    /// Validates width bookkeeping while constructing.
    pub fn new(dom: usize, slices: Vec<Slice>) -> Result<TangleDiagram, TangleError> {
        let mut width = dom;
        for (index, s) in slices.iter().enumerate() {
            let (i, o) = s.gen.width();
            if s.offset + i > width {
                return Err(TangleError::Width {
                    index,
                    gen: s.gen,
                    offset: s.offset,
                    width,
                });
            }
            width = width - i + o;
        }
        Ok(TangleDiagram {
            dom,
            cod: width,
            slices,
        })
    }

    pub fn identity(n: usize) -> TangleDiagram {
        TangleDiagram {
            dom: n,
            cod: n,
            slices: Vec::new(),
        }
    }

    pub fn crossing_count(&self) -> usize {
        self.slices
            .iter()
            .filter(|s| matches!(s.gen, Gen::XPos | Gen::XNeg))
            .count()
    }

    /// Signed crossing sum plus signed curl sum (blackboard framing).
    pub fn writhe(&self) -> i64 {
        self.slices
            .iter()
            .map(|s| match s.gen {
                Gen::XPos | Gen::TwistPos => 1,
                Gen::XNeg | Gen::TwistNeg => -1,
                _ => 0,
            })
            .sum()
    }

    /// Iterated left-trace closure of a `n -> n` diagram.
    pub fn close(&self) -> Result<TangleDiagram, TangleError> {
        if self.dom != self.cod {
            return Err(TangleError::CannotClose {
                dom: self.dom,
                cod: self.cod,
            });
        }
        let mut d = self.clone();
        while d.dom > 0 {
            let mut slices = vec![Slice {
                offset: 0,
                gen: Gen::Cup,
            }];
            slices.extend(d.slices.iter().map(|s| Slice {
                offset: s.offset + 1,
                gen: s.gen,
            }));
            slices.push(Slice {
                offset: 0,
                gen: Gen::Cap,
            });
            d = TangleDiagram::new(d.dom - 1, slices)?;
        }
        Ok(d)
    }
}

/// Single-slice diagram padded with identity strands; `width` is the input
/// width of the ambient slice.
pub fn diag_atom(gen: Gen, offset: usize, width: usize) -> Result<TangleDiagram, TangleError> {
    TangleDiagram::new(width, vec![Slice { offset, gen }])
}

pub fn diag_compose(
    d1: &TangleDiagram,
    d2: &TangleDiagram,
) -> Result<TangleDiagram, TangleError> {
    if d1.cod != d2.dom {
        return Err(TangleError::ComposeMismatch {
            left: d1.cod,
            right: d2.dom,
        });
    }
    let mut slices = d1.slices.clone();
    slices.extend(d2.slices.iter().copied());
    TangleDiagram::new(d1.dom, slices)
}

/// `d1 ⊗ d2` with `d1` on the bottom strands.
pub fn diag_tensor(d1: &TangleDiagram, d2: &TangleDiagram) -> Result<TangleDiagram, TangleError> {
    let mut slices = d1.slices.clone();
    slices.extend(d2.slices.iter().map(|s| Slice {
        offset: s.offset + d1.cod,
        gen: s.gen,
    }));
    TangleDiagram::new(d1.dom + d2.dom, slices)
}

// ---------------------------------------------------------------------------
// Translation between morphisms and diagrams
// ---------------------------------------------------------------------------

/// Minimal arity within the geometric fragment (extends structural inference
/// with the trace-application rule).
fn geo_arity(t: &Term) -> Option<Arity> {
    match t {
        Term::Const(Const::I) => Some(Arity::new(0, 0)),
        Term::Const(Const::Cplus) | Term::Const(Const::Cminus) => Some(Arity::new(2, 2)),
        Term::Const(Const::ThetaPlus) | Term::Const(Const::ThetaMinus) => Some(Arity::new(1, 1)),
        Term::Const(Const::Alpha) => Some(Arity::new(0, 2)),
        Term::Const(Const::Beta) => Some(Arity::new(2, 0)),
        Term::App(f, a) => match f.as_ref() {
            Term::App(g, x) if matches!(g.as_ref(), Term::Const(Const::B)) => {
                let left = geo_arity(x)?;
                let right = geo_arity(a)?;
                let mid = left.cod.max(right.dom);
                Some(Arity::new(
                    left.dom + (mid - left.cod),
                    right.cod + (mid - right.dom),
                ))
            }
            Term::Const(Const::B) => Some(geo_arity(a)?.weaken(1)),
            Term::Const(Const::Tr) => {
                let inner = geo_arity(a)?;
                if inner.dom >= 1 && inner.cod >= 1 {
                    Some(Arity::new(inner.dom - 1, inner.cod - 1))
                } else {
                    None
                }
            }
            _ => None,
        },
        _ => None,
    }
}

fn not_geometric(t: &Term, reason: &str) -> TangleError {
    TangleError::NotGeometric {
        subterm: render_term(t),
        reason: reason.to_string(),
    }
}

fn translate_at(t: &Term, dom: usize, cod: usize) -> Result<Vec<Slice>, TangleError> {
    let pad = |gen: Gen| -> Vec<Slice> { vec![Slice { offset: 0, gen }] };
    match t {
        Term::Const(Const::I) if dom == cod => Ok(Vec::new()),
        Term::Const(Const::Cplus) if dom == cod && dom >= 2 => Ok(pad(Gen::XPos)),
        Term::Const(Const::Cminus) if dom == cod && dom >= 2 => Ok(pad(Gen::XNeg)),
        Term::Const(Const::ThetaPlus) if dom == cod && dom >= 1 => Ok(pad(Gen::TwistPos)),
        Term::Const(Const::ThetaMinus) if dom == cod && dom >= 1 => Ok(pad(Gen::TwistNeg)),
        Term::Const(Const::Alpha) if cod == dom + 2 => Ok(pad(Gen::Cup)),
        Term::Const(Const::Beta) if dom == cod + 2 => Ok(pad(Gen::Cap)),
        Term::App(f, a) => match f.as_ref() {
            Term::App(g, x) if matches!(g.as_ref(), Term::Const(Const::B)) => {
                let left = geo_arity(x).ok_or_else(|| {
                    not_geometric(x, "no arity derivable in the geometric fragment")
                })?;
                if dom < left.dom {
                    return Err(not_geometric(t, "composition narrower than its left factor"));
                }
                let mid = left.cod + (dom - left.dom);
                let mut slices = translate_at(x, dom, mid)?;
                slices.extend(translate_at(a, mid, cod)?);
                Ok(slices)
            }
            Term::Const(Const::B) => {
                if dom == 0 || cod == 0 {
                    return Err(not_geometric(t, "left tensor needs positive width"));
                }
                let inner = translate_at(a, dom - 1, cod - 1)?;
                Ok(inner
                    .into_iter()
                    .map(|s| Slice {
                        offset: s.offset + 1,
                        gen: s.gen,
                    })
                    .collect())
            }
            Term::Const(Const::Tr) => {
                let inner = translate_at(a, dom + 1, cod + 1)?;
                let mut slices = vec![Slice {
                    offset: 0,
                    gen: Gen::Cup,
                }];
                slices.extend(inner.into_iter().map(|s| Slice {
                    offset: s.offset + 1,
                    gen: s.gen,
                }));
                slices.push(Slice {
                    offset: 0,
                    gen: Gen::Cap,
                });
                Ok(slices)
            }
            _ => Err(not_geometric(t, "application node is not a tangle generator")),
        },
        Term::Const(Const::B) => Err(not_geometric(t, "B as a 2 -> 1 box is not a tangle generator")),
        Term::Const(Const::Tr) => Err(not_geometric(
            t,
            "the bare trace combinator has no tangle (odd boundary)",
        )),
        Term::Bullet(_) => Err(not_geometric(t, "bullets have no tangle (odd boundary)")),
        _ => Err(not_geometric(t, "outside the geometric fragment")),
    }
}

/// Translates a geometric morphism into a framed tangle diagram.
pub fn translate(f: &Morphism) -> Result<TangleDiagram, TangleError> {
    let slices = translate_at(&f.term, f.dom, f.cod)?;
    let d = TangleDiagram::new(f.dom, slices)?;
    if d.cod != f.cod {
        return Err(TangleError::CodMismatch {
            got: d.cod,
            declared: f.cod,
        });
    }
    Ok(d)
}

/// Inverse direction of the generator dictionary: rebuilds a morphism from a
/// diagram.
pub fn from_tangle(d: &TangleDiagram) -> Result<Morphism, TangleError> {
    let mut width = d.dom;
    let mut acc = id(d.dom);
    for (index, s) in d.slices.iter().enumerate() {
        let (gin, gout) = s.gen.width();
        if s.offset + gin > width {
            return Err(TangleError::Width {
                index,
                gen: s.gen,
                offset: s.offset,
                width,
            });
        }
        let konst = match s.gen {
            Gen::XPos => Const::Cplus,
            Gen::XNeg => Const::Cminus,
            Gen::TwistPos => Const::ThetaPlus,
            Gen::TwistNeg => Const::ThetaMinus,
            Gen::Cup => Const::Alpha,
            Gen::Cap => Const::Beta,
        };
        let base = make_morphism_trusted(&Term::con(konst), gin, gout);
        let lifted = tensor_left(s.offset, &base);
        let padded = tensor_right(&lifted, width - s.offset - gin);
        acc = compose_m(&acc, &padded);
        width = width - gin + gout;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Framed simplification
// ---------------------------------------------------------------------------

fn cancels(a: Slice, b: Slice) -> bool {
    match (a.gen, b.gen) {
        (Gen::XPos, Gen::XNeg) | (Gen::XNeg, Gen::XPos) => a.offset == b.offset,
        (Gen::TwistPos, Gen::TwistNeg) | (Gen::TwistNeg, Gen::TwistPos) => a.offset == b.offset,
        // snake: a zig-zag cup/cap pair straightens
        (Gen::Cup, Gen::Cap) => a.offset + 1 == b.offset || a.offset == b.offset + 1,
        _ => false,
    }
}

/// Swaps adjacent slices when they act on disjoint strands, returning the
/// reordered pair.
fn commute(first: Slice, second: Slice) -> Option<(Slice, Slice)> {
    let (in1, out1) = first.gen.width();
    let (in2, _) = second.gen.width();
    if second.offset >= first.offset + out1 {
        // second sits above first's output block
        Some((
            Slice {
                offset: second.offset - out1 + in1,
                gen: second.gen,
            },
            first,
        ))
    } else if second.offset + in2 <= first.offset {
        // second sits strictly below first
        let (in2, out2) = second.gen.width();
        Some((
            second,
            Slice {
                offset: first.offset - in2 + out2,
                gen: first.gen,
            },
        ))
    } else {
        None
    }
}

/// Applies framed local moves greedily until no move applies or fuel runs
/// out. Unframed Reidemeister I is never applied, so twists are preserved.
pub fn simplify(d: &TangleDiagram, fuel: usize) -> TangleDiagram {
    let mut slices = d.slices.clone();
    let mut budget = fuel;
    loop {
        if budget == 0 {
            break;
        }
        if let Some(next) = try_cancel_with_transport(&slices) {
            slices = next;
            budget = budget.saturating_sub(1);
            continue;
        }
        if let Some(next) = try_braid_move(&slices) {
            slices = next;
            budget = budget.saturating_sub(1);
            continue;
        }
        break;
    }
    TangleDiagram::new(d.dom, slices).expect("moves preserve width bookkeeping")
}

/// Looks for a cancellable pair, transporting the later slice leftwards
/// through commuting slices until it either cancels or blocks.
fn try_cancel_with_transport(slices: &[Slice]) -> Option<Vec<Slice>> {
    for i in 0..slices.len() {
        // Walk a candidate backwards from j toward i.
        'cand: for j in (i + 1)..slices.len() {
            let mut moved = slices[j];
            // transport j down to position i+1, requiring every hop to commute
            let mut intermediate: Vec<Slice> = Vec::new();
            for k in ((i + 1)..j).rev() {
                match commute(slices[k], moved) {
                    Some((m2, k2)) => {
                        moved = m2;
                        intermediate.push(k2);
                    }
                    None => continue 'cand,
                }
            }
            intermediate.reverse();
            if cancels(slices[i], moved) {
                let mut out = slices[..i].to_vec();
                out.extend(intermediate);
                out.extend_from_slice(&slices[j + 1..]);
                return Some(out);
            }
        }
    }
    None
}

/// One Reidemeister III rewrite in the canonical direction (higher offset
/// pattern becomes the lower one).
fn try_braid_move(slices: &[Slice]) -> Option<Vec<Slice>> {
    for i in 0..slices.len().saturating_sub(2) {
        let (a, b, c) = (slices[i], slices[i + 1], slices[i + 2]);
        let same_sign = a.gen == c.gen
            && a.gen == b.gen
            && matches!(a.gen, Gen::XPos | Gen::XNeg);
        if same_sign && b.offset + 1 == a.offset && a.offset == c.offset {
            let mut out = slices.to_vec();
            out[i] = Slice {
                offset: b.offset,
                gen: a.gen,
            };
            out[i + 1] = Slice {
                offset: a.offset,
                gen: a.gen,
            };
            out[i + 2] = Slice {
                offset: b.offset,
                gen: a.gen,
            };
            return Some(out);
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Links and invariants
// ---------------------------------------------------------------------------

/// A closed diagram with its component count and writhe.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Link {
    pub diagram: TangleDiagram,
    pub components: usize,
    pub writhe: i64,
}

impl Link {
    pub fn new(diagram: TangleDiagram) -> Result<Link, TangleError> {
        if diagram.dom != 0 || diagram.cod != 0 {
            return Err(TangleError::OpenDiagram {
                dom: diagram.dom,
                cod: diagram.cod,
            });
        }
        let components = count_components(&diagram.slices, true);
        let writhe = diagram.writhe();
        Ok(Link {
            diagram,
            components,
            writhe,
        })
    }
}

/// Counts closed loops by replaying the slices over a union-find of strand
/// identities. With `crossings_pass` the two strands of a crossing continue
/// through each other; resolved diagrams never contain crossings.
fn count_components(slices: &[Slice], crossings_pass: bool) -> usize {
    let mut parent: Vec<usize> = Vec::new();
    fn find(parent: &mut Vec<usize>, mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut strands: Vec<usize> = Vec::new();
    let mut loops = 0;
    for s in slices {
        match s.gen {
            Gen::Cup => {
                let node = parent.len();
                parent.push(node);
                strands.insert(s.offset, node);
                strands.insert(s.offset, node);
            }
            Gen::Cap => {
                let a = strands.remove(s.offset);
                let b = strands.remove(s.offset);
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra == rb {
                    loops += 1;
                } else {
                    parent[ra] = rb;
                }
            }
            Gen::XPos | Gen::XNeg => {
                assert!(crossings_pass, "resolved diagrams carry no crossings");
                strands.swap(s.offset, s.offset + 1);
            }
            Gen::TwistPos | Gen::TwistNeg => {}
        }
    }
    assert!(strands.is_empty(), "closed diagram consumed all strands");
    loops
}

/// Kauffman bracket by the 2^c state sum. `XPos` resolves to
/// `A·(identity) + A⁻¹·(cup-cap)`; every closed loop contributes
/// `δ = -A² - A⁻²`; curls contribute `-A^{±3}`.
pub fn kauffman_bracket(l: &Link, crossing_limit: usize) -> Result<LaurentPoly, TangleError> {
    let crossings: Vec<usize> = l
        .diagram
        .slices
        .iter()
        .enumerate()
        .filter(|(_, s)| matches!(s.gen, Gen::XPos | Gen::XNeg))
        .map(|(i, _)| i)
        .collect();
    if crossings.len() > crossing_limit {
        return Err(TangleError::CrossingLimit {
            count: crossings.len(),
            limit: crossing_limit,
        });
    }
    let delta = LaurentPoly::delta();
    let mut total = LaurentPoly::zero();
    for mask in 0..(1u64 << crossings.len()) {
        let mut weight_exp = 0i64;
        let mut resolved: Vec<Slice> = Vec::new();
        let mut cross_idx = 0;
        for (i, s) in l.diagram.slices.iter().enumerate() {
            if cross_idx < crossings.len() && crossings[cross_idx] == i {
                let smooth_to_e = mask >> cross_idx & 1 == 1;
                let sign = if s.gen == Gen::XPos { 1 } else { -1 };
                // identity smoothing weighs A^sign, cup-cap weighs A^-sign
                weight_exp += if smooth_to_e { -sign } else { sign };
                if smooth_to_e {
                    resolved.push(Slice {
                        offset: s.offset,
                        gen: Gen::Cap,
                    });
                    resolved.push(Slice {
                        offset: s.offset,
                        gen: Gen::Cup,
                    });
                }
                cross_idx += 1;
            } else if !matches!(s.gen, Gen::TwistPos | Gen::TwistNeg) {
                resolved.push(*s);
            }
        }
        let loops = count_components(&resolved, false);
        let contribution = &LaurentPoly::monomial(weight_exp, 1) * &delta.pow(loops);
        total = &total + &contribution;
    }
    // each curl is a global framing factor -A^{±3}
    for s in &l.diagram.slices {
        match s.gen {
            Gen::TwistPos => total = &total * &LaurentPoly::monomial(3, -1),
            Gen::TwistNeg => total = &total * &LaurentPoly::monomial(-3, -1),
            _ => {}
        }
    }
    Ok(total)
}

/// The bundle used by equality tests: differing bundles distinguish two
/// links; equal bundles are only "not distinguished".
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvariantBundle {
    pub writhe: i64,
    pub components: usize,
    pub bracket: LaurentPoly,
}

pub fn invariants(l: &Link, crossing_limit: usize) -> Result<InvariantBundle, TangleError> {
    Ok(InvariantBundle {
        writhe: l.writhe,
        components: l.components,
        bracket: kauffman_bracket(l, crossing_limit)?,
    })
}

/// Closure-based bundle for an `n -> n` diagram.
pub fn closed_invariants(
    d: &TangleDiagram,
    crossing_limit: usize,
) -> Result<InvariantBundle, TangleError> {
    let link = Link::new(d.close()?)?;
    invariants(&link, crossing_limit)
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Svg,
}

pub fn export_diagram(d: &TangleDiagram, format: ExportFormat) -> Vec<u8> {
    match format {
        ExportFormat::Json => serde_json::to_vec_pretty(d).expect("diagram serializes"),
        ExportFormat::Svg => render_svg(d).into_bytes(),
    }
}

const XSTEP: usize = 60;
const YSTEP: usize = 40;

fn render_svg(d: &TangleDiagram) -> String {
    let mut max_width = d.dom;
    let mut width = d.dom;
    for s in &d.slices {
        let (i, o) = s.gen.width();
        width = width - i + o;
        max_width = max_width.max(width);
    }
    let h = (max_width.max(1)) * YSTEP + YSTEP;
    let w = (d.slices.len() + 1) * XSTEP + XSTEP;
    // strand index 0 is drawn at the bottom
    let y = |strand: usize| -> usize { h - (strand + 1) * YSTEP };
    let mut parts = Vec::new();
    parts.push(format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w}\" height=\"{h}\" \
         viewBox=\"0 0 {w} {h}\">"
    ));
    parts.push("<g fill=\"none\" stroke=\"black\" stroke-width=\"2\">".to_string());
    let mut cur = d.dom;
    for (col, s) in d.slices.iter().enumerate() {
        let x0 = XSTEP / 2 + col * XSTEP;
        let x1 = x0 + XSTEP;
        let xm = x0 + XSTEP / 2;
        let (i, o) = s.gen.width();
        // passthrough strands below the generator
        for k in 0..s.offset {
            parts.push(format!("<line x1=\"{x0}\" y1=\"{}\" x2=\"{x1}\" y2=\"{}\"/>", y(k), y(k)));
        }
        // passthrough strands above
        for k in (s.offset + i)..cur {
            let shifted = k - i + o;
            parts.push(format!(
                "<line x1=\"{x0}\" y1=\"{}\" x2=\"{x1}\" y2=\"{}\"/>",
                y(k),
                y(shifted)
            ));
        }
        let (ya, yb) = (y(s.offset), y(s.offset + 1));
        match s.gen {
            Gen::XPos | Gen::XNeg => {
                // the over strand is drawn whole, the under strand with a gap
                let (over_from, over_to, under_from, under_to) = if s.gen == Gen::XPos {
                    (ya, yb, yb, ya)
                } else {
                    (yb, ya, ya, yb)
                };
                let (uf, ut) = (under_from as f64, under_to as f64);
                let um = (uf + ut) / 2.0;
                parts.push(format!(
                    "<line x1=\"{x0}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
                    uf,
                    x0 + XSTEP / 3,
                    uf + (um - uf) * 0.6
                ));
                parts.push(format!(
                    "<line x1=\"{}\" y1=\"{}\" x2=\"{x1}\" y2=\"{}\"/>",
                    x1 - XSTEP / 3,
                    ut - (ut - um) * 0.6,
                    ut
                ));
                parts.push(format!(
                    "<line x1=\"{x0}\" y1=\"{over_from}\" x2=\"{x1}\" y2=\"{over_to}\"/>"
                ));
            }
            Gen::TwistPos | Gen::TwistNeg => {
                parts.push(format!("<line x1=\"{x0}\" y1=\"{ya}\" x2=\"{x1}\" y2=\"{ya}\"/>"));
                let r = YSTEP / 4;
                parts.push(format!("<circle cx=\"{xm}\" cy=\"{}\" r=\"{r}\"/>", ya - r));
                let label = if s.gen == Gen::TwistPos { "+" } else { "-" };
                parts.push(format!(
                    "<text x=\"{xm}\" y=\"{}\" font-size=\"12\" stroke=\"none\" \
                     fill=\"black\" text-anchor=\"middle\">{label}</text>",
                    ya - 2 * r - 4
                ));
            }
            Gen::Cup => {
                parts.push(format!(
                    "<path d=\"M {x1} {ya} C {xm} {ya}, {xm} {yb}, {x1} {yb}\"/>"
                ));
            }
            Gen::Cap => {
                parts.push(format!(
                    "<path d=\"M {x0} {ya} C {xm} {ya}, {xm} {yb}, {x0} {yb}\"/>"
                ));
            }
        }
        cur = cur - i + o;
    }
    // trailing identity wires so the codomain is visible
    let x0 = XSTEP / 2 + d.slices.len() * XSTEP;
    for k in 0..cur {
        parts.push(format!(
            "<line x1=\"{x0}\" y1=\"{}\" x2=\"{}\" y2=\"{}\"/>",
            y(k),
            x0 + XSTEP / 2,
            y(k)
        ));
    }
    parts.push("</g>".to_string());
    parts.push("</svg>".to_string());
    parts.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::axioms::{axiom_set, prove_equal, AxiomSet, PackName};
    use crate::prob::{braid_sigma, make_morphism, trace_left};
    use crate::term::parse_term;

    fn pt(s: &str) -> Term {
        parse_term(s).unwrap()
    }

    fn traced() -> AxiomSet {
        axiom_set(PackName::Traced)
    }

    fn morphism(s: &str, dom: usize, cod: usize) -> Morphism {
        make_morphism(&pt(s), dom, cod, &traced(), 2_000).unwrap()
    }

    #[test]
    fn atom_widths() {
        let x = diag_atom(Gen::XPos, 0, 2).unwrap();
        assert_eq!((x.dom, x.cod), (2, 2));
        let cup = diag_atom(Gen::Cup, 0, 0).unwrap();
        assert_eq!((cup.dom, cup.cod), (0, 2));
        assert!(diag_atom(Gen::XPos, 1, 2).is_err());
    }

    #[test]
    fn compose_and_tensor_bookkeeping() {
        let x = diag_atom(Gen::XPos, 0, 2).unwrap();
        let y = diag_atom(Gen::XNeg, 0, 2).unwrap();
        let both = diag_compose(&x, &y).unwrap();
        assert_eq!(both.slices.len(), 2);
        let id1 = TangleDiagram::identity(1);
        let t = diag_tensor(&id1, &x).unwrap();
        assert_eq!(t.slices[0].offset, 1);
        assert_eq!((t.dom, t.cod), (3, 3));
    }

    #[test]
    fn circle_has_one_component() {
        let cup = diag_atom(Gen::Cup, 0, 0).unwrap();
        let cap = diag_atom(Gen::Cap, 0, 2).unwrap();
        let circle = diag_compose(&cup, &cap).unwrap();
        let link = Link::new(circle).unwrap();
        assert_eq!(link.components, 1);
        assert_eq!(link.writhe, 0);
    }

    #[test]
    fn translate_generators() {
        let d = translate(&morphism("C+", 2, 2)).unwrap();
        assert_eq!(d.slices, vec![Slice { offset: 0, gen: Gen::XPos }]);
        let d = translate(&morphism("Th+", 1, 1)).unwrap();
        assert_eq!(d.slices, vec![Slice { offset: 0, gen: Gen::TwistPos }]);
    }

    #[test]
    fn translate_rejects_b() {
        let b = make_morphism(&pt("B"), 2, 1, &traced(), 1_000).unwrap();
        assert!(matches!(
            translate(&b),
            Err(TangleError::NotGeometric { .. })
        ));
    }

    #[test]
    fn translate_trefoil_shape() {
        let body = morphism("C+ ∘ C+ ∘ C+", 2, 2);
        let once = trace_left(&body).unwrap();
        let twice = trace_left(&once).unwrap();
        let d = translate(&twice).unwrap();
        assert_eq!((d.dom, d.cod), (0, 0));
        assert_eq!(d.crossing_count(), 3);
        let link = Link::new(d).unwrap();
        assert_eq!(link.components, 1);
        assert_eq!(link.writhe, 3);
    }

    #[test]
    fn translate_respects_left_tensor_shift() {
        let sigma = braid_sigma(1, 1);
        let lifted = tensor_left(1, &sigma);
        let d = translate(&lifted).unwrap();
        // (B I) ∘ C+ lifted: identity slices vanish, crossing at offset 1
        assert_eq!(d.slices, vec![Slice { offset: 1, gen: Gen::XPos }]);
    }

    #[test]
    fn functoriality_on_compose() {
        let f = morphism("C+", 2, 2);
        let g = morphism("Th+ ∘ Th-", 2, 2);
        let composed = compose_m(&f, &g);
        let lhs = translate(&composed).unwrap();
        let rhs = diag_compose(&translate(&f).unwrap(), &translate(&g).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn simplify_r2() {
        let d = diag_compose(
            &diag_atom(Gen::XPos, 0, 2).unwrap(),
            &diag_atom(Gen::XNeg, 0, 2).unwrap(),
        )
        .unwrap();
        let s = simplify(&d, 100);
        assert!(s.slices.is_empty());
    }

    #[test]
    fn simplify_twist_pair() {
        let d = diag_compose(
            &diag_atom(Gen::TwistPos, 0, 1).unwrap(),
            &diag_atom(Gen::TwistNeg, 0, 1).unwrap(),
        )
        .unwrap();
        assert!(simplify(&d, 100).slices.is_empty());
    }

    #[test]
    fn simplify_snake() {
        // zig-zag: cup then cap one step up
        let d = TangleDiagram::new(
            1,
            vec![
                Slice { offset: 0, gen: Gen::Cup },
                Slice { offset: 1, gen: Gen::Cap },
            ],
        )
        .unwrap();
        assert_eq!((d.dom, d.cod), (1, 1));
        assert!(simplify(&d, 100).slices.is_empty());
    }

    #[test]
    fn simplify_never_drops_circles() {
        let circle = TangleDiagram::new(
            0,
            vec![
                Slice { offset: 0, gen: Gen::Cup },
                Slice { offset: 0, gen: Gen::Cap },
            ],
        )
        .unwrap();
        let s = simplify(&circle, 100);
        assert_eq!(s.slices.len(), 2);
    }

    #[test]
    fn bracket_unknot() {
        let circle = TangleDiagram::new(
            0,
            vec![
                Slice { offset: 0, gen: Gen::Cup },
                Slice { offset: 0, gen: Gen::Cap },
            ],
        )
        .unwrap();
        let link = Link::new(circle).unwrap();
        assert_eq!(kauffman_bracket(&link, 16).unwrap(), LaurentPoly::delta());
    }

    #[test]
    fn bracket_curled_unknot() {
        let d = TangleDiagram::new(
            0,
            vec![
                Slice { offset: 0, gen: Gen::Cup },
                Slice { offset: 0, gen: Gen::TwistPos },
                Slice { offset: 0, gen: Gen::Cap },
            ],
        )
        .unwrap();
        let link = Link::new(d).unwrap();
        // (-A^3) · δ
        let expect = &LaurentPoly::monomial(3, -1) * &LaurentPoly::delta();
        assert_eq!(kauffman_bracket(&link, 16).unwrap(), expect);
    }

    #[test]
    fn closure_of_braid_crossing_equals_twist_bundle() {
        // Tr C+ and Th+ agree on writhe, components, and bracket
        let tr_c = translate(&trace_left(&morphism("C+", 2, 2)).unwrap()).unwrap();
        let th = translate(&morphism("Th+", 1, 1)).unwrap();
        let b1 = closed_invariants(&tr_c, 16).unwrap();
        let b2 = closed_invariants(&th, 16).unwrap();
        assert_eq!(b1, b2);
    }

    #[test]
    fn export_json_schema() {
        let d = diag_atom(Gen::XPos, 0, 2).unwrap();
        let bytes = export_diagram(&d, ExportFormat::Json);
        let v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["dom"], 2);
        assert_eq!(v["cod"], 2);
        assert_eq!(v["slices"][0]["offset"], 0);
        assert_eq!(v["slices"][0]["gen"], "XPos");
    }

    #[test]
    fn export_empty_diagram() {
        let d = TangleDiagram::identity(0);
        let json = export_diagram(&d, ExportFormat::Json);
        assert!(!json.is_empty());
        let svg = export_diagram(&d, ExportFormat::Svg);
        assert!(String::from_utf8(svg).unwrap().starts_with("<svg"));
    }

    #[test]
    fn from_tangle_round_trip_small() {
        let f = morphism("C+ ∘ Th+ ∘ C-", 2, 2);
        let d = translate(&f).unwrap();
        let back = from_tangle(&d).unwrap();
        assert_eq!((back.dom, back.cod), (2, 2));
        let pack = traced();
        assert!(prove_equal(&back.term, &f.term, &pack, 20_000).is_equal());
    }
}
