use ribbonflow::eigen::{family_eigen, FamilyKind};
use ribbonflow::measures::{plane_point, survivor_check};
use ribbonflow::renorm::{direction_from_sequence, Direction, RaySpec};
use ribbonflow::{shrinking_sequence, QuadNum};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let w1 = family_eigen(&FamilyKind::Tripod { t: QuadNum::int(2) })?;
    let w2 = family_eigen(&FamilyKind::Tripod { t: QuadNum::int(3) })?;
    let ray: RaySpec = "(h^-1 v^-1)".parse()?;
    let (Direction::Exact(t1), Direction::Exact(t2)) =
        (direction_from_sequence(&w1.lambda, &ray)?, direction_from_sequence(&w2.lambda, &ray)?)
    else {
        unreachable!()
    };

    let data = shrinking_sequence(&w1.lambda, &t1, 12)?;
    let f = plane_point(w2.graph.clone(), w2.oracle.clone(), &t2);
    let g = w2.graph.as_ref();
    let report = survivor_check(g, &f, &data, 12, &g.root(), 12)?;
    assert!(report.passed());
    println!("survives to depth {} on {} vertices", report.depth, report.checked);
    Ok(())
}
