//! Generates grid and random deployments for each field shape and prints an
//! ASCII sketch of the C-shaped random field.

use cbmds::{generate_deployment, FieldSpec, Shape};

fn main() {
    for shape in [Shape::Square, Shape::CShape, Shape::LShape, Shape::HShape] {
        let grid = generate_deployment(&FieldSpec::grid(shape, 1)).unwrap();
        let random = generate_deployment(&FieldSpec::random(shape, 120, 1)).unwrap();
        println!(
            "{:<6} grid {:>3} nodes, random {:>3} nodes",
            shape.name(),
            grid.len(),
            random.len()
        );
    }

    let field = generate_deployment(&FieldSpec::random(Shape::CShape, 161, 2)).unwrap();
    let mut canvas = vec![vec![' '; 41]; 21];
    for p in &field.positions {
        let col = (p.x * 4.0).round() as usize;
        let row = 20 - (p.y * 2.0).round() as usize;
        canvas[row][col] = '*';
    }
    println!();
    for row in canvas {
        println!("|{}|", row.into_iter().collect::<String>());
    }
}
