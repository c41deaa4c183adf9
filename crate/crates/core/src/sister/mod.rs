//! Sister H-surfaces in M²(κ)×ℝ: boundary observables, frame-integration conjugation and
//! mirror extension.

mod conjugate;
mod extend;
mod observables;

pub use conjugate::{conjugate_mesh, conjugate_with_signs, ConjugateMesh, Frame4};
pub use observables::{boundary_observables, max_height, BoundaryTrace, Observables};
pub use extend::{
    boundary_fits, horizontal_kernel, horizontal_kernel_report, symmetry_extend, BoundaryFits, Extension,
    ExtensionMode, KernelReport, Mirror, rotational_defect,
};
