//! Postfix form of an expression for fast repeated evaluation.

use super::enumerate::{NodeId, NodeKind, StructureArena};
#[cfg(test)]
use super::expr::Expression;
use super::expr::{BinaryOp, UnaryOp};
use crate::scalar::Scalar;

pub(crate) const MAX_STACK: usize = 32;

#[derive(Debug, Clone, Copy)]
pub(crate) enum Instr {
    Var(u8),
    Const(u8),
    Unary(UnaryOp),
    Binary(BinaryOp),
}

#[derive(Debug, Clone)]
pub(crate) struct Program {
    code: Vec<Instr>,
    n_const: usize,
}

impl Program {
    pub fn from_arena(arena: &StructureArena, id: NodeId) -> Self {
        let mut p = Program {
            code: Vec::with_capacity(arena.node(id).size as usize),
            n_const: 0,
        };
        p.emit_arena(arena, id);
        p
    }

    fn emit_arena(&mut self, arena: &StructureArena, id: NodeId) {
        match arena.node(id).kind {
            NodeKind::Const => {
                self.code.push(Instr::Const(self.n_const as u8));
                self.n_const += 1;
            }
            NodeKind::Var(i) => self.code.push(Instr::Var(i)),
            NodeKind::Unary(op, a) => {
                self.emit_arena(arena, a);
                self.code.push(Instr::Unary(op));
            }
            NodeKind::Binary(op, a, b) => {
                self.emit_arena(arena, a);
                self.emit_arena(arena, b);
                self.code.push(Instr::Binary(op));
            }
        }
    }

    /// Compiles `e`; constants become slots in prefix order.
    #[cfg(test)]
    pub fn from_expression<T: Scalar>(e: &Expression<T>) -> Self {
        let mut p = Program {
            code: Vec::with_capacity(e.node_count()),
            n_const: 0,
        };
        p.emit_expr(e);
        p
    }

    #[cfg(test)]
    fn emit_expr<T: Scalar>(&mut self, e: &Expression<T>) {
        match e {
            Expression::Const(_) => {
                self.code.push(Instr::Const(self.n_const as u8));
                self.n_const += 1;
            }
            Expression::Var(i) => self.code.push(Instr::Var(*i as u8)),
            Expression::Unary(op, a) => {
                self.emit_expr(a);
                self.code.push(Instr::Unary(*op));
            }
            Expression::Binary(op, a, b) => {
                self.emit_expr(a);
                self.emit_expr(b);
                self.code.push(Instr::Binary(*op));
            }
        }
    }

    pub fn n_const(&self) -> usize {
        self.n_const
    }

    #[inline]
    pub fn eval<T: Scalar>(&self, vars: &[T], consts: &[T]) -> Option<T> {
        let mut stack = [T::zero(); MAX_STACK];
        let mut sp = 0usize;
        for ins in &self.code {
            match *ins {
                Instr::Var(i) => {
                    stack[sp] = *vars.get(i as usize)?;
                    sp += 1;
                }
                Instr::Const(k) => {
                    stack[sp] = consts[k as usize];
                    sp += 1;
                }
                Instr::Unary(op) => {
                    stack[sp - 1] = op.apply(stack[sp - 1])?;
                }
                Instr::Binary(op) => {
                    sp -= 1;
                    stack[sp - 1] = op.apply(stack[sp - 1], stack[sp])?;
                }
            }
        }
        Some(stack[0])
    }
}
