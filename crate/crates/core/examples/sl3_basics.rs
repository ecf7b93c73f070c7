//! Exponential map, actions and the adjoint on SL(3).

use homography_observer::sl3::{adjoint, exp_sl3, group_action, measurement_map, AlgebraElement, ProjectivePoint};

fn main() -> homography_observer::Result<()> {
    let x = AlgebraElement::from_coordinates(&[0.2, -0.1, 0.05, 0.3, 0.0, -0.2, 0.1, 0.15]);
    let h = exp_sl3(&x);
    println!("H = exp(X):{}", h.matrix());
    println!("det H = {:.3e}", h.determinant());
    println!("‖H·exp(−X) − I‖ = {:.3e}", (h.matrix() * exp_sl3(&-x).matrix() - nalgebra::Matrix3::identity()).norm());

    let p = ProjectivePoint::from_xyz(0.3, -0.2, 1.0)?;
    println!("H⁻¹ acting on p̊ (measurement): {:?}", measurement_map(&h, &p).to_array());
    println!("H acting on p:                  {:?}", group_action(&h, &p).to_array());

    let y = AlgebraElement::from_coordinates(&[0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
    let ad = adjoint(&h, &y);
    println!("Ad_H Y has trace {:.1e} and norm {:.4}", ad.trace(), ad.norm());
    Ok(())
}
