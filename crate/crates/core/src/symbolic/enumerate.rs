//! Exhaustive enumeration of canonical expression structures.
//!
//! Structures are hash-consed in an arena and generated in order of node
//! count. Each equivalence class under the rewrite rules below is generated
//! exactly once:
//!
//! * no operator is applied to constant-only operands (those fold);
//! * `add`/`mul` operands are ordered and chains are left-deep and sorted,
//!   with at most one trailing constant per chain;
//! * `sub(a, c)` and `div(a, c)` are spelled `add(a, c')` and `mul(a, c')`;
//! * `x op x` forms that collapse (`add(a,a)`, `mul(a,a)`, `sub(a,a)`,
//!   `div(a,a)`) are skipped;
//! * unary compositions that reduce to shorter forms (`sqrt(pow2 a)`,
//!   `abs(abs a)`, `cos(abs a)`, `exp(add(a, c))`, `pow2(mul(a, c))`, ...) are
//!   skipped.

use super::expr::{BinaryOp, Expression, UnaryOp};
use super::grammar::Grammar;
use crate::scalar::Scalar;

pub type NodeId = u32;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NodeKind {
    Const,
    Var(u8),
    Unary(UnaryOp, NodeId),
    Binary(BinaryOp, NodeId, NodeId),
}

#[derive(Debug, Clone, Copy)]
pub struct Node {
    pub kind: NodeKind,
    pub size: u8,
    pub depth: u8,
    pub n_const: u8,
    pub has_var: bool,
}

/// Arena of canonical structures grouped by node count.
#[derive(Debug, Clone)]
pub struct StructureArena {
    nodes: Vec<Node>,
    /// `levels[n]` holds the ids with exactly `n` nodes.
    levels: Vec<Vec<NodeId>>,
}

impl StructureArena {
    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id as usize]
    }

    pub fn level(&self, size: usize) -> &[NodeId] {
        self.levels.get(size).map_or(&[], Vec::as_slice)
    }

    pub fn max_size(&self) -> usize {
        self.levels.len().saturating_sub(1)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Builds the expression for `id`; constants are placeholders equal to 0.
    pub fn to_expression<T: Scalar>(&self, id: NodeId) -> Expression<T> {
        match self.node(id).kind {
            NodeKind::Const => Expression::Const(T::zero()),
            NodeKind::Var(i) => Expression::Var(i as usize),
            NodeKind::Unary(op, a) => Expression::unary(op, self.to_expression(a)),
            NodeKind::Binary(op, a, b) => {
                Expression::binary(op, self.to_expression(a), self.to_expression(b))
            }
        }
    }

    /// Enumerates every canonical structure up to `grammar.max_nodes` nodes.
    pub fn build(grammar: &Grammar) -> Self {
        let mut arena = Self::leaves(grammar);
        for size in 2..=grammar.max_nodes {
            arena.grow(grammar, size);
        }
        arena
    }

    /// Arena holding only the single-node structures.
    pub fn leaves(grammar: &Grammar) -> Self {
        let mut arena = StructureArena {
            nodes: Vec::new(),
            levels: vec![Vec::new(); grammar.max_nodes + 1],
        };
        if grammar.max_nodes == 0 {
            return arena;
        }
        if grammar.max_constants > 0 {
            arena.push(Node {
                kind: NodeKind::Const,
                size: 1,
                depth: 1,
                n_const: 1,
                has_var: false,
            });
        }
        for v in 0..grammar.n_vars.min(u8::MAX as usize) {
            arena.push(Node {
                kind: NodeKind::Var(v as u8),
                size: 1,
                depth: 1,
                n_const: 0,
                has_var: true,
            });
        }
        arena
    }

    /// Generates level `size`; every smaller level must already exist.
    pub fn grow(&mut self, grammar: &Grammar, size: usize) {
        if size < 2 || size >= self.levels.len() || !self.levels[size].is_empty() {
            return;
        }
        for &op in &grammar.unary {
            for i in 0..self.levels[size - 1].len() {
                let child = self.levels[size - 1][i];
                if let Some(node) = self.unary_node(grammar, op, child) {
                    self.push(node);
                }
            }
        }
        for &op in &grammar.binary {
            for left_size in 1..size - 1 {
                let right_size = size - 1 - left_size;
                for li in 0..self.levels[left_size].len() {
                    let l = self.levels[left_size][li];
                    for ri in 0..self.levels[right_size].len() {
                        let r = self.levels[right_size][ri];
                        if let Some(node) = self.binary_node(grammar, op, l, r) {
                            self.push(node);
                        }
                    }
                }
            }
        }
    }

    fn push(&mut self, node: Node) {
        let id = self.nodes.len() as NodeId;
        self.levels[node.size as usize].push(id);
        self.nodes.push(node);
    }

    fn is_const(&self, id: NodeId) -> bool {
        matches!(self.node(id).kind, NodeKind::Const)
    }

    fn is_binary_with_trailing_const(&self, id: NodeId, op: BinaryOp) -> bool {
        matches!(self.node(id).kind, NodeKind::Binary(o, _, r) if o == op && self.is_const(r))
    }

    fn unary_node(&self, g: &Grammar, op: UnaryOp, child: NodeId) -> Option<Node> {
        let c = self.node(child);
        if !c.has_var || c.depth as usize + 1 > g.max_depth {
            return None;
        }
        use UnaryOp::*;
        let inner = match c.kind {
            NodeKind::Unary(o, _) => Some(o),
            _ => None,
        };
        let scaled = self.is_binary_with_trailing_const(child, BinaryOp::Mul);
        let shifted = self.is_binary_with_trailing_const(child, BinaryOp::Add);
        let reject = match op {
            Pow2 => matches!(inner, Some(Sqrt | Abs)) || scaled,
            Sqrt => matches!(inner, Some(Pow2)) || scaled,
            Abs => matches!(inner, Some(Abs | Pow2 | Sqrt | Exp)) || scaled,
            Cos => matches!(inner, Some(Abs)),
            Sin => false,
            Exp => shifted,
        };
        if reject {
            return None;
        }
        Some(Node {
            kind: NodeKind::Unary(op, child),
            size: c.size + 1,
            depth: c.depth + 1,
            n_const: c.n_const,
            has_var: true,
        })
    }

    fn binary_node(&self, g: &Grammar, op: BinaryOp, l: NodeId, r: NodeId) -> Option<Node> {
        let (ln, rn) = (self.node(l), self.node(r));
        if !(ln.has_var || rn.has_var) {
            return None;
        }
        let n_const = ln.n_const + rn.n_const;
        if n_const as usize > g.max_constants {
            return None;
        }
        let depth = ln.depth.max(rn.depth) + 1;
        if depth as usize > g.max_depth {
            return None;
        }
        if l == r {
            return None;
        }
        let ok = match op {
            BinaryOp::Add | BinaryOp::Mul => {
                // sorted, left-deep chains: ids decrease to the right, so the
                // constant (id 0) can only trail
                if matches!(rn.kind, NodeKind::Binary(o, ..) if o == op) {
                    false
                } else if let NodeKind::Binary(o, _, last) = ln.kind {
                    if o == op {
                        last > r && !(self.is_const(last) && self.is_const(r))
                    } else {
                        l > r
                    }
                } else {
                    l > r
                }
            }
            BinaryOp::Sub => {
                !self.is_const(r)
                    && !self.is_binary_with_trailing_const(r, BinaryOp::Add)
            }
            BinaryOp::Div => {
                !self.is_const(r)
                    && !self.is_binary_with_trailing_const(r, BinaryOp::Mul)
                    && !self.is_binary_with_trailing_const(l, BinaryOp::Mul)
            }
        };
        if !ok {
            return None;
        }
        // an additive constant folds into a trailing constant of the sum
        if op == BinaryOp::Add && self.is_const(r) && self.is_binary_with_trailing_const(l, BinaryOp::Add) {
            return None;
        }
        Some(Node {
            kind: NodeKind::Binary(op, l, r),
            size: ln.size + rn.size + 1,
            depth,
            n_const,
            has_var: true,
        })
    }
}
