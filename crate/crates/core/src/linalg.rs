use nalgebra::Matrix3;

/// `exp(A)` for a real 3×3 matrix by scaling and squaring with a
/// degree-18 Taylor polynomial.
pub fn expm3(a: &Matrix3<f64>) -> Matrix3<f64> {
    let norm = a.iter().map(|x| x.abs()).sum::<f64>();
    let mut squarings = 0u32;
    let mut scale = 1.0;
    while norm * scale > 0.25 {
        scale *= 0.5;
        squarings += 1;
    }
    let x = a * scale;
    let mut term = Matrix3::identity();
    let mut sum = Matrix3::identity();
    for k in 1..=18 {
        term = term * x / k as f64;
        sum += term;
    }
    for _ in 0..squarings {
        sum = sum * sum;
    }
    sum
}
