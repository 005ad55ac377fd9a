pub mod bundle;
pub mod config;
pub mod exit;
pub mod format;
pub mod pipeline;
pub mod svg;
