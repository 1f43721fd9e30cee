//! Operator algebra over two three-level emitters and two truncated cavity
//! modes.

mod operator;
mod ops;
mod params;
mod space;

pub use operator::{expectation, kron, tensor_embed, CMatrix, DensityState, Operator};
pub use ops::{build_operators, build_operators_in_frame, CollapseOperator, Frame, OpenSystem, OperatorSet};
pub(crate) use operator::{hermiticity_defect as matrix_hermiticity_defect, trace_product as operator_trace_product};
pub(crate) use ops::emitter_lowering;
pub use params::DeviceParams;
pub use space::{build_space, Level, Slot, SpaceDescriptor, EMITTER_LEVELS, MODE_COUNT, N_EMITTERS};
