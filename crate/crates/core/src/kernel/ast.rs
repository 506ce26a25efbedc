use std::fmt;

use crate::ops::BasicOpClass;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarType {
    Int,
    Float,
}

impl fmt::Display for ScalarType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScalarType::Int => "int",
            ScalarType::Float => "float",
        })
    }
}

/// Index into [`KernelProgram::declarations`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VarId(pub usize);

#[derive(Debug, Clone, PartialEq)]
pub struct Declaration {
    pub name: String,
    pub ty: ScalarType,
    /// Empty for scalars.
    pub dims: Vec<u64>,
}

impl Declaration {
    pub fn is_array(&self) -> bool {
        !self.dims.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
    BitNot,
}

impl UnaryOp {
    pub fn class(self) -> BasicOpClass {
        match self {
            UnaryOp::Neg => BasicOpClass::Subtract,
            UnaryOp::Not => BasicOpClass::Logic,
            UnaryOp::BitNot => BasicOpClass::Bitwise,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Rem,
    BitAnd,
    BitOr,
    BitXor,
    Shl,
    Shr,
    And,
    Or,
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl BinaryOp {
    pub fn class(self) -> BasicOpClass {
        use BinaryOp::*;
        match self {
            Add => BasicOpClass::Add,
            Sub => BasicOpClass::Subtract,
            Mul => BasicOpClass::Multiply,
            Div | Rem => BasicOpClass::Divide,
            BitAnd | BitOr | BitXor | Shl | Shr => BasicOpClass::Bitwise,
            And | Or => BasicOpClass::Logic,
            Lt | Le | Gt | Ge | Eq | Ne => BasicOpClass::Compare,
        }
    }

    pub fn is_comparison(self) -> bool {
        matches!(self.class(), BasicOpClass::Compare)
    }

    pub fn is_logic(self) -> bool {
        matches!(self, BinaryOp::And | BinaryOp::Or)
    }

    pub fn is_int_only(self) -> bool {
        use BinaryOp::*;
        matches!(self, Rem | BitAnd | BitOr | BitXor | Shl | Shr)
    }

    pub fn symbol(self) -> &'static str {
        use BinaryOp::*;
        match self {
            Add => "+",
            Sub => "-",
            Mul => "*",
            Div => "/",
            Rem => "%",
            BitAnd => "&",
            BitOr => "|",
            BitXor => "^",
            Shl => "<<",
            Shr => ">>",
            And => "&&",
            Or => "||",
            Lt => "<",
            Le => "<=",
            Gt => ">",
            Ge => ">=",
            Eq => "==",
            Ne => "!=",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Int(i64),
    Float(f64),
    Scalar(VarId),
    Element {
        array: VarId,
        indices: Vec<Expr>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Expr>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Expr>,
        rhs: Box<Expr>,
    },
}

impl Expr {
    /// Whether evaluating this expression reads `var` as a scalar.
    pub fn reads_scalar(&self, var: VarId) -> bool {
        match self {
            Expr::Int(_) | Expr::Float(_) => false,
            Expr::Scalar(v) => *v == var,
            Expr::Element { indices, .. } => indices.iter().any(|e| e.reads_scalar(var)),
            Expr::Unary { operand, .. } => operand.reads_scalar(var),
            Expr::Binary { lhs, rhs, .. } => lhs.reads_scalar(var) || rhs.reads_scalar(var),
        }
    }

    pub fn scalars_read(&self, out: &mut Vec<VarId>) {
        match self {
            Expr::Int(_) | Expr::Float(_) => {}
            Expr::Scalar(v) => out.push(*v),
            Expr::Element { indices, .. } => indices.iter().for_each(|e| e.scalars_read(out)),
            Expr::Unary { operand, .. } => operand.scalars_read(out),
            Expr::Binary { lhs, rhs, .. } => {
                lhs.scalars_read(out);
                rhs.scalars_read(out);
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LValue {
    pub var: VarId,
    /// Empty for scalar targets.
    pub indices: Vec<Expr>,
}

/// Loop variable update applied after every iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    /// `Add` or `Sub`.
    pub op: BinaryOp,
    pub amount: Expr,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForLoop {
    pub var: VarId,
    pub init: Expr,
    /// Comparison of the loop variable (left) against `bound` (right).
    pub cmp: BinaryOp,
    pub bound: Expr,
    pub step: Step,
    pub body: Vec<Statement>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    /// `target = value`, or `target op= value` when `op` is set.
    Assign {
        target: LValue,
        op: Option<BinaryOp>,
        value: Expr,
    },
    For(ForLoop),
    If {
        cond: Expr,
        then_branch: Vec<Statement>,
        else_branch: Vec<Statement>,
    },
}

impl Statement {
    /// Scalars written anywhere inside this statement, loop variables included.
    pub fn scalars_written(&self, out: &mut Vec<VarId>) {
        match self {
            Statement::Assign { target, .. } => {
                if target.indices.is_empty() {
                    out.push(target.var);
                }
            }
            Statement::For(l) => {
                out.push(l.var);
                l.body.iter().for_each(|s| s.scalars_written(out));
            }
            Statement::If {
                then_branch,
                else_branch,
                ..
            } => {
                then_branch.iter().for_each(|s| s.scalars_written(out));
                else_branch.iter().for_each(|s| s.scalars_written(out));
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct KernelProgram {
    pub declarations: Vec<Declaration>,
    pub statements: Vec<Statement>,
}

impl KernelProgram {
    pub fn decl(&self, var: VarId) -> &Declaration {
        &self.declarations[var.0]
    }

    pub fn lookup(&self, name: &str) -> Option<VarId> {
        self.declarations
            .iter()
            .position(|d| d.name == name)
            .map(VarId)
    }
}
