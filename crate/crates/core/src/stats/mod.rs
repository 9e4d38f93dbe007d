pub mod logistic;
pub mod roc;
pub mod tree;
