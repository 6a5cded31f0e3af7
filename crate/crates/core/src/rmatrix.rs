//! Combinatorial R on pairs of carrier states and its energy function.

use crate::carrier::CarrierElement;

/// Result of exchanging `alpha (x) beta` into `beta~ (x) alpha~`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Exchange {
    /// Image of `beta`; same capacity as `beta`.
    pub beta: CarrierElement,
    /// Image of `alpha`; same capacity as `alpha`.
    pub alpha: CarrierElement,
    /// Local energy `min(alpha_0, beta_1)`.
    pub energy: u32,
}

/// Maps `alpha (x) beta` to `beta~ (x) alpha~` and reports the local energy.
pub fn combinatorial_r(alpha: CarrierElement, beta: CarrierElement) -> Exchange {
    let a = alpha.pair();
    let b = beta.pair();
    let flow_in = a[1].min(b[0]);
    let flow_out = a[0].min(b[1]);
    let alpha_holes = a[0] + flow_in - flow_out;
    let alpha_balls = a[1] + flow_out - flow_in;
    let beta_holes = b[0] + flow_out - flow_in;
    let beta_balls = b[1] + flow_in - flow_out;
    Exchange {
        beta: CarrierElement::from_pair(beta_holes, beta_balls).expect("capacity preserved"),
        alpha: CarrierElement::from_pair(alpha_holes, alpha_balls).expect("capacity preserved"),
        energy: a[0].min(b[1]),
    }
}

/// Carrier element decorated with a spectral power `zeta^power`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Affine {
    pub element: CarrierElement,
    pub power: i64,
}

/// `alpha zeta^a (x) beta zeta^b -> beta~ zeta^(b+H) (x) alpha~ zeta^(a-H)`.
pub fn affine_r(left: Affine, right: Affine) -> (Affine, Affine) {
    let ex = combinatorial_r(left.element, right.element);
    let h = ex.energy as i64;
    (
        Affine { element: ex.beta, power: right.power + h },
        Affine { element: ex.alpha, power: left.power - h },
    )
}
