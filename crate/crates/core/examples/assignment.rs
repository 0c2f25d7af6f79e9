// Minimum-cost assignment with gating, Hungarian versus greedy.

use motune::assoc::{build_cost, gate, AssocMethod, CostMatrix};
use motune::{BBox, Detection};

pub fn run() -> motune::Result<()> {
    // the greedy pick of the 1 leaves the expensive 4
    let c = CostMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
    for m in [AssocMethod::Hungarian, AssocMethod::Greedy] {
        let a = m.solve(&c);
        println!("{m:>9}: pairs {:?}, total {}", a.pairs, c.total(&a.pairs));
    }

    let tracks = [BBox::new(0.0, 0.0, 10.0, 10.0)?, BBox::new(100.0, 0.0, 10.0, 10.0)?];
    let dets = [
        Detection::new(BBox::new(1.0, 1.0, 10.0, 10.0)?, 0.9)?,
        Detection::new(BBox::new(300.0, 0.0, 10.0, 10.0)?, 0.9)?,
    ];
    let cost = build_cost(&tracks, &dets);
    let gated = gate(&AssocMethod::Hungarian.solve(&cost), &cost, 0.3);
    println!("matched {:?}", gated.pairs);
    println!("unmatched tracks {:?}, dets {:?}", gated.unmatched_tracks, gated.unmatched_dets);
    Ok(())
}

#[allow(dead_code)]
fn main() -> motune::Result<()> {
    run()
}
