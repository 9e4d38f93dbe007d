//! Infer latent friendship ties from logs of who played online games with
//! whom.
//!
//! The pipeline runs from an [`store::EventStore`] through per-pair
//! [`series`] and [`features`], single-feature models and trees in [`stats`]
//! and [`eval`], to threshold selection in [`infer`] and the statistics of
//! the resulting [`graph`]. [`synth`] generates worlds with planted
//! friendships for testing. The guide in `book/` walks through each stage.

pub mod cooperative;
pub mod eval;
pub mod features;
pub mod graph;
pub mod infer;
pub mod labels;
pub mod series;
pub mod stats;
pub mod store;
pub mod synth;
pub mod temporal;

// The guide's snippets run as doc-tests, one module per chapter.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/event-store.md")]
    mod event_store {}
    #[doc = include_str!("../../../book/src/autocorrelation.md")]
    mod autocorrelation {}
    #[doc = include_str!("../../../book/src/features.md")]
    mod features {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/inference.md")]
    mod inference {}
    #[doc = include_str!("../../../book/src/graph.md")]
    mod graph {}
    #[doc = include_str!("../../../book/src/synthetic-world.md")]
    mod synthetic_world {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
