//! Declarative model schemas and their symbolic compilation.
//!
//! Compilation happens once per model type and never reads case data.

mod blocks;
pub mod cache;
mod compile;
mod docs;
mod schema;

pub use blocks::expand_blocks;
pub use cache::{cache_load, cache_store, schema_hash, CacheError, CacheOutcome, ModelCache};
pub use compile::{
    compile_model, derive_init_plan, CompiledModel, CompiledService, CompiledVar, InitPlan, IterJacEntry, JacBlock,
    Jacobians, Slot, SlotKind, Triplet,
};
pub use docs::render_docs;
pub use schema::{
    build_schema, BlockKind, BlockSpec, DiscreteKind, DiscreteSpec, Element, ModelFlags, ModelSchema, ParamKind,
    ParamSpec, PowerBase, SchemaBuilder, ServiceKind, ServiceSpec, VarKind, VarScope, VarSpec, STATUS_PARAM,
};

use crate::expr::ExprError;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SchemaError {
    #[error("{model}: `{name}` is not a valid identifier")]
    InvalidName { model: String, name: String },
    #[error("{model}: duplicate element name `{name}`")]
    Duplicate { model: String, name: String },
    #[error("{model}.{element}: {source}")]
    Equation {
        model: String,
        element: String,
        #[source]
        source: ExprError,
    },
    #[error("{model}.{element}: reference to unknown name `{name}`")]
    Dangling { model: String, element: String, name: String },
    #[error("{model}: state `{name}` has no differential equation")]
    MissingEquation { model: String, name: String },
    #[error("{model}: `{name}` sets a linked value but is not external or has no v_str")]
    Setter { model: String, name: String },
    #[error("{model}: reduce service `{name}` may only be consumed by a repeat service")]
    ReduceMisuse { model: String, name: String },
    #[error("{model}: block `{block}` exports `{name}`, which is already declared")]
    BlockCollision { model: String, block: String, name: String },
    #[error("{model}: cyclic service dependency among {}", names.join(", "))]
    CyclicService { model: String, names: Vec<String> },
    #[error("malformed schema document: {message}")]
    Format { message: String },
}
