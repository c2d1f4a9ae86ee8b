//! Graded modules over `k[x_1..x_n]`, realized one degree at a time.

mod fp;
mod module;
mod ops;

pub use fp::{map_from_gen_images, FPGradedModule, Relation};
pub use module::{
    actions_commute, field_of, monomial_actions, monomial_multiples, poly_action, poly_times, BasisLabel,
    DegreewiseModule, GradedModuleMap, GradedPiece, Module, ModuleMap,
};
pub(crate) use module::Memo;
pub use ops::{
    cokernel_dw, hom_piece, hom_space, image_dw, kernel_dw, tensor_piece, tensor_quotient, CokernelModule,
    DirectSum, ImageModule, KernelModule,
};
