//! Shared setup for the propagation benchmarks.

use inertial_core::{initial_ground_state, LiouvilleVec, ProtocolParams, SpinorState};

/// Reference protocol at `δ/α₀` together with its initial ground state.
pub fn reference_case(delta_over_alpha0: f64) -> (ProtocolParams, SpinorState, LiouvilleVec) {
    let params = ProtocolParams::reference(delta_over_alpha0);
    let (psi0, v0) = initial_ground_state(&params).expect("reference protocol is regular at t = 0");
    (params, psi0, v0)
}
