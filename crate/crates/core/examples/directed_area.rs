//! Directed area of a circle in several directions, exact and sampled, plus
//! the cylinder-restricted variant.

use incidence_lab::geom::Direction;
use incidence_lab::polyzero::{cylinder_directed_area, directed_area, AreaMode, MultiPoly};

fn main() -> incidence_lab::Result<()> {
    // (x - 1/2)^2 + (y - 1/2)^2 = 4/25; every direction sees twice the diameter.
    let circle = MultiPoly::parse("1 2 0\n1 0 2\n-1 1 0\n-1 0 1\n17/50 0 0\n")?;
    for v in [[1, 0], [0, 1], [3, 4], [1, -1]] {
        let dir = Direction::from_ints(&v)?;
        let exact = directed_area(&circle, &dir, 1024, AreaMode::ExactRoots)?;
        let sampled = directed_area(&circle, &dir, 1024, AreaMode::Sampled { samples: 256 })?;
        println!("v={v:?}: exact {:.4}  sampled {:.4}", exact.value, sampled.value);
    }
    let tube = cylinder_directed_area(&circle, &Direction::axis(2, 1), &[0.5, 0.5], 0.1, 1024, AreaMode::ExactRoots)?;
    println!("inside the width-0.2 strip: {:.4}", tube.value);
    Ok(())
}
