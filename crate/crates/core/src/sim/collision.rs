use super::vehicle::VehicleState;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CollisionReport {
    pub collided: bool,
    /// Colliding vehicle id pairs, smaller id first.
    pub pairs: Vec<(u32, u32)>,
}

impl CollisionReport {
    pub fn involves(&self, id: u32) -> bool {
        self.pairs.iter().any(|&(a, b)| a == id || b == id)
    }
}

fn project<T: Scalar>(corners: &[(T, T); 4], axis: (T, T)) -> (T, T) {
    let mut lo = T::infinity();
    let mut hi = T::neg_infinity();
    for &(x, y) in corners {
        let p = x * axis.0 + y * axis.1;
        lo = lo.min(p);
        hi = hi.max(p);
    }
    (lo, hi)
}

/// Separating-axis test on the two oriented footprints. Touching edges do not count.
pub fn rectangles_overlap<T: Scalar>(a: &VehicleState<T>, b: &VehicleState<T>) -> bool {
    let reach = (a.length + a.width + b.length + b.width) * T::half();
    if (a.x - b.x).abs() > reach || (a.y - b.y).abs() > reach {
        return false;
    }
    let ca = a.corners();
    let cb = b.corners();
    let axes = [
        a.psi.sin_cos(),
        (a.psi + T::FRAC_PI_2()).sin_cos(),
        b.psi.sin_cos(),
        (b.psi + T::FRAC_PI_2()).sin_cos(),
    ];
    axes.iter().all(|&(s, c)| {
        let axis = (c, s);
        let (alo, ahi) = project(&ca, axis);
        let (blo, bhi) = project(&cb, axis);
        ahi > blo && bhi > alo
    })
}

pub fn detect_collision<T: Scalar>(vehicles: &[VehicleState<T>]) -> CollisionReport {
    let mut report = CollisionReport::default();
    for (i, a) in vehicles.iter().enumerate() {
        for b in &vehicles[i + 1..] {
            if rectangles_overlap(a, b) {
                report.pairs.push((a.id.min(b.id), a.id.max(b.id)));
            }
        }
    }
    report.collided = !report.pairs.is_empty();
    report
}
