//! Exact polynomials, sum-of-squares certificates, pseudo-expectations and
//! a small semidefinite search.

pub mod certificate;
pub mod closure;
pub mod library;
pub mod pe;
pub mod poly;
pub mod sdp;
pub mod search;

pub use certificate::{verify_certificate, verify_refutation, Certificate, EqTerm, IneqTerm, Verification};
pub use closure::{closure_e, closure_g, ConstraintSet};
pub use poly::{vars, Monomial, Polynomial, Vars};
pub use library::{certificate_library, LibraryEntry, LibraryFact};
pub use pe::{check_pseudo_expectation, PeReport, PseudoExpectation};
pub use search::{search_certificate, SdpSummary, SearchOutcome};
