//! Exact arithmetic in k and K/k, the algebra V, norm forms and the
//! shifted form F.

pub mod element;
pub mod embedding;
pub mod extension;
pub mod field;
pub mod form;
pub mod ideal;
pub mod linalg;
pub mod poly;
pub mod spec_file;

pub use element::FieldElement;
pub use embedding::{archimedean_invariants, product_constant, AlgebraPoint, ArchimedeanInvariants, Embeddings};
pub use extension::{build_norm_form, ExtensionSpec, NormFormPoly};
pub use field::{FieldSpec, Signature, DEFAULT_EMBEDDING_PRECISION};
pub use form::{build_shifted_form, ShiftedForm, Shifts};
pub use ideal::{denominator_ideal, denominator_ideal_of, is_duality_compatible, trace_dual_basis, IdealSpec};
pub use linalg::Q;
pub use poly::{FlatPoly, IntPoly, Poly, RealPoly};
