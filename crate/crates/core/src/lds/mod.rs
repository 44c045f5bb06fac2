//! Noiseless diagonal linear dynamical systems.
//!
//! With inputs `u_0 … u_{T-1}` and state `x_0`, the simulator runs
//!
//! ```text
//! y_{s+1} = C x_s + D u_s
//! x_{s+1} = A x_s + B u_s
//! ```
//!
//! for `s = 0 … T-1` and returns `y_1 … y_T`. With `x_0 = 0` and `D = 0` the
//! output `y_t` depends on `u_{t-2}, u_{t-3}, …` only.

mod inputs;
mod region;
mod sequence;
mod system;

pub use inputs::{conditioning_check, conditioning_threshold, gen_inputs, Conditioning, InputKind, InputSequence};
pub use region::{hug_band, region_bounds, sample_region, EigRegion, Interval, RegionKind, HUG_Q};
pub use sequence::Sequence;
pub use system::{make_random_system, simulate, simulate_noisy, DKind, LdsSystem};
