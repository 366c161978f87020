use algact::boundary::enumerate_boundary;
use algact::family::generate;
use std::time::Instant;

fn main() {
    let m = algact::monoid::MonoidPresentation::new(algact::monoid::MonoidKind::FreeAbelian { rank: 1 }).unwrap();
    let act = algact::action::Action::Shift(
        algact::action::ShiftAction::new(m, algact::shift::FiniteGroup::cyclic(3).unwrap()).unwrap(),
    );
    let t0 = Instant::now();
    let fam = generate(&act, 8);
    eprintln!("generate: {:?}", t0.elapsed());
    let t1 = Instant::now();
    let level = enumerate_boundary(&act, &fam).unwrap();
    eprintln!("enumerate ({} pts): {:?}", level.points.len(), t1.elapsed());
    let t2 = Instant::now();
    let v = level.to_json(&act);
    eprintln!("to_json: {:?}", t2.elapsed());
    let t3 = Instant::now();
    let s = serde_json::to_string_pretty(&v).unwrap();
    eprintln!("stringify ({} bytes): {:?}", s.len(), t3.elapsed());
}
