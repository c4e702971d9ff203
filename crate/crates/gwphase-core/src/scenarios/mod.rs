//! Concrete physical models: the complex-cone two-level system, dichroic
//! Jones-calculus optics, and the Aharonov–Casher effective moment with its
//! topological winding factors.

mod ac;
mod cone;
mod jones;

pub use ac::{
    ac_geometric_phase, effective_moment, neglected_term_report, topological_factor,
    winding_number, AcModel, NeglectedTerms, PlanarPath, TopologicalFactor, WindingResult,
};
pub use cone::{cone_chart, cone_loop, ComplexCone, Handedness};
pub use jones::{
    cycle_eigenpolarizations, helical_fiber_loop, propagate_sequence, sequence_phase_extract,
    JonesSegment,
};
