//! Covering radius of PGL₂(q) acting on the projective line.
//!
//! * [`gf`]: the field tower GF(p) ⊂ GF(q) ⊂ GF(q²) with table arithmetic.
//! * [`projline`]: the projective line, Möbius maps and the group as permutations.
//! * [`metric`]: Hamming distance and distance to the group.
//! * [`witness`]: the explicit far permutation for q ≡ 1 (mod 6) and its certificate.
//! * [`cover`]: exact covering radius by pruned exhaustive search, and sampling.
//!
//! Kernels take an [`Exec`] and run on rayon when the `parallel` feature is
//! enabled (the default); results never depend on the thread count.

pub mod cover;
pub mod gf;
pub mod metric;
pub mod par;
pub mod projline;
pub mod witness;

pub use cover::{exact_covering_radius, sample_distances, stabilize_triple, SearchOptions, SearchReport};
pub use gf::{Fe, FieldTower};
pub use metric::{distance_to_group, expected_cr, hamming, DistanceResult};
pub use par::Exec;
pub use projline::{Group, MobiusMap, Permutation, Point, ProjectiveLine, Storage};
pub use witness::{certify, CertificateReport, WitnessContext};
