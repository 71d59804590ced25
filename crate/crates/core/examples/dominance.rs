//! Dominance, ε-dominance, and lines in objective space.

use corrpath::cost::{dominates, eps_dominates, line_through, perp_distance, CostVec, Eps};

fn main() {
    let a = CostVec::new(80.0, 30.0);
    let b = CostVec::new(90.0, 28.0);
    let eps = Eps::uniform(0.1);
    println!("{a:?} dominates {b:?}: {}", dominates(a, b));
    println!("{a:?} eps-dominates {b:?} at {eps:?}: {}", eps_dominates(a, b, eps));
    println!("{b:?} eps-dominates {a:?} at {eps:?}: {}", eps_dominates(b, a, eps));

    // normalized costs on y = 0.5x + 0.1
    let line = line_through(CostVec::new(0.2, 0.2), CostVec::new(0.8, 0.5)).expect("two distinct points");
    println!("line a={:.3} b={:.3} slope={:.3}", line.a(), line.b(), line.slope());
    for p in [CostVec::new(0.5, 0.35), CostVec::new(0.5, 0.5)] {
        println!("distance of {p:?}: {:.4}", perp_distance(line, p));
    }
}
