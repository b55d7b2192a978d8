use ribbonlab::axioms::*;
use ribbonlab::term::*;
use ribbonlab::prob::*;
use ribbonlab::arity::*;
use std::time::Instant;

fn main() {
    let traced = axiom_set(PackName::Traced);
    let bcpmi = axiom_set(PackName::Bcpmi);

    // Hexagon: sigma(l, m+n) = sigma(l,m) ∘ (B^m sigma(l,n))
    println!("== hexagon");
    for l in 0..=2usize { for m in 0..=2usize { for n in 0..=2usize {
        if l == 0 && m == 0 && n == 0 { continue; }
        let lhs = braid_sigma(l, m + n);
        let sm = braid_sigma(l, m);
        let sn = braid_sigma(l, n);
        let rhs = compose_m(&tensor_right(&sm, n), &tensor_left(m, &sn));
        let t0 = Instant::now();
        let v = prove_equal(&lhs.term, &rhs.term, &bcpmi, 200_000);
        println!("  l={l} m={m} n={n}: {} ({:?}) sizes {} vs {}", match &v { Verdict::Equal(p) => format!("OK {}", p.len()), Verdict::Unknown{explored} => format!("UNKNOWN {explored}") }, t0.elapsed(), lhs.term.node_count(), rhs.term.node_count());
    }}}

    // Interchange on small corpus
    println!("== interchange");
    let small: Vec<(&str, usize, usize)> = vec![("I",0,0),("C+",2,2),("C-",2,2),("Th+",1,1),("Th-",1,1),("Tr",1,2),("Alpha",0,2),("Beta",2,0),("Th+ ∘ Th-",1,1),("B C+",3,3)];
    let dual = axiom_set(PackName::RibbonDuality);
    for (fs, fm, fn_) in &small { for (gs, gm, gn) in &small {
        let f = make_morphism_trusted(&parse_term(fs).unwrap(), *fm, *fn_);
        let g = make_morphism_trusted(&parse_term(gs).unwrap(), *gm, *gn);
        if f.term.node_count() > 4 || g.term.node_count() > 4 { continue; }
        let way1 = compose_m(&tensor_right(&f, g.dom), &tensor_left(f.cod, &g));
        let way2 = compose_m(&tensor_left(f.dom, &g), &tensor_right(&f, g.cod));
        if way1.term == way2.term { continue; }
        let pack = if fs.contains("Alpha")||fs.contains("Beta")||gs.contains("Alpha")||gs.contains("Beta") { &dual } else { &traced };
        let t0 = Instant::now();
        let v = prove_equal(&way1.term, &way2.term, pack, 200_000);
        match v { Verdict::Equal(p) => println!("  {fs} + {gs}: OK {} ({:?})", p.len(), t0.elapsed()),
                  Verdict::Unknown{explored} => println!("  {fs} + {gs}: UNKNOWN {explored} ({:?})  [{} vs {}]", t0.elapsed(), render_term(&way1.term), render_term(&way2.term)) }
    }}
}
