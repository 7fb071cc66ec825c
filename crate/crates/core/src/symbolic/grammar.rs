use serde::{Deserialize, Serialize};

use super::expr::{BinaryOp, UnaryOp};
use crate::error::{Error, Result};

/// Search space for slice fitting: operators, variables and size limits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grammar {
    pub unary: Vec<UnaryOp>,
    pub binary: Vec<BinaryOp>,
    /// Number of variables, indexed from 0.
    pub n_vars: usize,
    /// Starting values seeded into every constant fit, in addition to the
    /// logarithmic multistart grid.
    pub constant_pool: Vec<f64>,
    pub max_depth: usize,
    pub max_nodes: usize,
    /// Free constants allowed per structure (at most 2).
    pub max_constants: usize,
}

impl Default for Grammar {
    fn default() -> Self {
        Self {
            unary: UnaryOp::ALL.to_vec(),
            binary: BinaryOp::ALL.to_vec(),
            n_vars: 1,
            constant_pool: vec![0.5, 1.0, 2.0, 3.0, 10.0],
            max_depth: 8,
            max_nodes: 9,
            max_constants: 2,
        }
    }
}

impl Grammar {
    pub fn validate(&self) -> Result<()> {
        if self.unary.is_empty() && self.binary.is_empty() {
            return Err(Error::Config("grammar needs at least one operator".into()));
        }
        if self.n_vars == 0 {
            return Err(Error::Config("grammar needs at least one variable".into()));
        }
        if self.max_constants > 2 {
            return Err(Error::Config("at most two free constants per structure".into()));
        }
        if self.max_nodes == 0 || self.max_depth == 0 {
            return Err(Error::Config("node and depth limits must be positive".into()));
        }
        Ok(())
    }

    pub fn with_max_nodes(mut self, n: usize) -> Self {
        self.max_nodes = n;
        self
    }

    pub fn with_max_depth(mut self, d: usize) -> Self {
        self.max_depth = d;
        self
    }
}
