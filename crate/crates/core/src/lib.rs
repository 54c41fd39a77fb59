//! Exact algebraic machinery for multivariable Lubin-Tate coefficient rings
//! at finite truncation: p-adic arithmetic, Lubin-Tate formal group laws,
//! the multivariable Laurent ring with its Frobenius / unit / plectic /
//! glectic monoid actions, etale phi-modules, monoid presentations with
//! normal forms, and Hahn generalized power series.
//!
//! Everything is immutable and pure: values can be shared freely across
//! threads.
//!
//! ```
//! use plectic_core::padic::PadicRingSpec;
//! use plectic_core::lubin_tate::{lt_add_law, LubinTatePoly};
//! use plectic_core::multivar::{act_phi, act_gamma, RingSpecDelta};
//!
//! // The cyclotomic law over Z_2 is T1 + T2 + T1*T2 on the nose.
//! let zp = PadicRingSpec::qp(2, 16)?;
//! let f = LubinTatePoly::cyclotomic(&zp, 16)?;
//! let law = lt_add_law(&f, 8, 6)?;
//! assert_eq!(law.len(), 3);
//!
//! // A two-variable coefficient ring where phi and the unit action commute.
//! let base = PadicRingSpec::qp(2, 30)?;
//! let std = LubinTatePoly::standard(&base, 30)?;
//! let ring = RingSpecDelta::uniform(&base, vec!["a".into(), "b".into()], std, 4, 20, 3)?;
//! let x = ring.var(0);
//! let gammas = [base.from_u64(3, 30), base.from_u64(5, 30)];
//! let one_way = act_phi(&act_gamma(&x, &gammas)?, &[1, 0])?;
//! let other = act_gamma(&act_phi(&x, &[1, 0])?, &gammas)?;
//! assert!(one_way.eq_at_window(&other));
//! # Ok::<(), plectic_core::CoreError>(())
//! ```

#![forbid(unsafe_code)]

pub mod error;
pub mod fq;
pub mod hahn;
pub mod lubin_tate;
pub mod monoid;
pub mod multivar;
pub mod padic;
pub mod phigamma;
pub mod residue;
pub mod series;

pub use error::{CoreError, LossReport};
pub use hahn::{completion_classify, embed_residue, CompletionClass, ExponentFamily, HahnCtx, HahnSeries, QExp, VarSequence};
pub use fq::{FqCtx, FqElem};
pub use lubin_tate::{lt_add_law, lt_check_axioms, lt_inverse, lt_scalar, LtAxiomReport, LubinTatePoly};
pub use monoid::{coind_finite_field, glectic_act, minimal_cosets, minimal_relations, plectic_act, plectic_mul, sd_normal_form, GlecticElement, NSubmonoid, PlecticElement, SemidirectPresentation};
pub use multivar::{act_gamma, act_phi, permute_vars, substitute, MultivarJson, MultivarLaurent, RingSpecDelta};
pub use phigamma::{build_sd, fixed_points, IntegralModule, ResidueModule, ResidueRing, SearchBox, SdPresentation};
pub use padic::{ArithOp, PadicElement, PadicRingSpec, Valuation};
pub use residue::LaurentPoly;
pub use series::{Monomial, SeriesJson, TruncatedSeries};
