//! Time evolution of the rotor under the centrifuge field, field-free
//! relaxation afterwards, and the thermal ensemble average.

mod ensemble;
mod frame;
mod propagate;
mod relax;
mod system;

pub use ensemble::{
    ensemble_run, ensemble_run_relaxing_in_field, thermal_members, DensityTrajectory, DEFAULT_ENSEMBLE_TAIL,
};
pub use frame::FieldFreeFrame;
pub use propagate::{
    free_phase_full, interaction_matrix, propagate, propagate_rotating_frame, AngleOperators, Integrator,
    PropagationOptions, QuantumState, DEFAULT_DT_PS,
};
pub use relax::{
    field_free_relax, hermitian_eigen, relax_pure_states, Mixture, RelaxationParams, DEFAULT_TAU_COH_PS,
    DEFAULT_TAU_POP_PS,
};
pub use system::RotorSystem;
