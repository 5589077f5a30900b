//! Compact security games and the gadget constructions built on them.

mod bcbs;
mod bimatrix;
mod esg;
mod vertex_cover;

pub use bcbs::{bcbs_extract, bcbs_gadget, bcbs_identity_exact, BcbsExtraction, BcbsGadget};
pub use bimatrix::{bimatrix_extract, bimatrix_gadget, BimatrixExtraction};
pub use esg::{
    esg_lipschitz_bound, network_security_game, ExtendedSecurityGame,
};
pub use vertex_cover::{
    vc_principal_value, vc_scheme_value, vertex_cover_gadget, ObjectiveTensor, VcGadget, VcVerdict,
};
