//! Converting pixels to bearing directions and back.

use homography_observer::scene::{direction_to_pixel, pixel_to_direction};
use homography_observer::CameraIntrinsics;
use nalgebra::Vector2;

fn main() -> homography_observer::Result<()> {
    let intr = CameraIntrinsics::new(520.0, 515.0, 320.0, 240.0)?;
    for uv in [Vector2::new(320.0, 240.0), Vector2::new(0.0, 0.0), Vector2::new(640.0, 480.0), Vector2::new(100.0, 400.0)] {
        let p = pixel_to_direction(&intr, &uv)?;
        let back = direction_to_pixel(&intr, &p)?;
        println!("({:6.1}, {:6.1}) -> {:?} -> ({:.6}, {:.6})", uv.x, uv.y, p.to_array(), back.x, back.y);
    }
    Ok(())
}
