use dgkit::dgmod::RightModule;
use dgkit::fixtures::q2;
use dgkit::{Field, Matrix};
fn main() {
    let q = Field::Q;
    let cat = q2(q);
    let comps = vec![
        dgkit::complex::Complex::unit(q),
        dgkit::complex::Complex::zero(q),
    ];
    let mut action = Vec::new();
    for a in 0..2 {
        let mut row = Vec::new();
        for a2 in 0..2 {
            let src = comps[a].tensor(&cat.hom(a2, a).clone());
            let mut g = dgkit::complex::GradedMap::zero(&src, &comps[a2], 0);
            if a == 0 && a2 == 0 {
                g.set_block(0, Matrix::identity(q, 1));
            }
            row.push(g);
        }
        action.push(row);
    }
    let s = RightModule::new_unchecked(cat.clone(), comps, action);
    let rep = s.validate();
    for f in &rep.failures {
        println!("{} at {}", f.axiom, f.location);
    }
}
