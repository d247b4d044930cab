//! Rigid and similarity Procrustes fits, including a mirrored target and a
//! collinear input that gets flagged.

use cbmds::{procrustes_rigid, procrustes_similarity, Point};

fn main() {
    let src = vec![
        Point::new(0.0, 0.0),
        Point::new(2.0, 0.0),
        Point::new(1.0, 1.5),
        Point::new(-0.5, 2.0),
    ];
    let mirrored: Vec<_> = src.iter().map(|p| Point::new(5.0 - p.x, p.y + 1.0)).collect();
    let fit = procrustes_rigid(&src, &mirrored).unwrap();
    println!(
        "mirror: reflection {}, residual {:.2e}, t = ({:.3}, {:.3})",
        fit.transform.is_reflection(),
        fit.residual,
        fit.transform.t.x,
        fit.transform.t.y
    );

    let scaled: Vec<_> = src.iter().map(|p| Point::new(3.0 * p.y, -3.0 * p.x)).collect();
    let fit = procrustes_similarity(&src, &scaled).unwrap();
    println!("scaled: s = {:.6}, residual {:.2e}", fit.transform.s, fit.residual);

    let line: Vec<_> = (0..4).map(|i| Point::new(i as f64, 2.0 * i as f64)).collect();
    let fit = procrustes_rigid(&line, &src).unwrap();
    println!("collinear source: ill_conditioned = {}", fit.ill_conditioned);
}
