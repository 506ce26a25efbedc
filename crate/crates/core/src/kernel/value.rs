//! Runtime values and operator semantics shared by the interpreter and the
//! static counter's constant folding.
//!
//! Integers are 64-bit two's complement with wrapping arithmetic; shift
//! amounts are taken modulo 64. Mixed int/float operands promote to float.
//! Comparisons and logic operators yield integer 0 or 1; logic operators
//! always evaluate both operands.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::ast::{BinaryOp, ScalarType, UnaryOp};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Value {
    Int(i64),
    Float(f64),
}

impl Value {
    pub fn zero(ty: ScalarType) -> Self {
        match ty {
            ScalarType::Int => Value::Int(0),
            ScalarType::Float => Value::Float(0.0),
        }
    }

    pub fn truthy(self) -> bool {
        match self {
            Value::Int(v) => v != 0,
            Value::Float(v) => v != 0.0,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Value::Int(v) => v as f64,
            Value::Float(v) => v,
        }
    }

    pub fn as_int(self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(v),
            Value::Float(_) => None,
        }
    }

    /// Convert for storage into a variable of type `ty`. Float into int is
    /// rejected by the type checker, so it never reaches here.
    pub fn coerce(self, ty: ScalarType) -> Self {
        match (ty, self) {
            (ScalarType::Float, Value::Int(v)) => Value::Float(v as f64),
            _ => self,
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(v) => write!(f, "{v}"),
            Value::Float(v) => write!(f, "{v:?}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EvalFault {
    DivisionByZero,
    /// An integer-only operator met a float. The type checker prevents this.
    TypeMismatch,
}

fn b(v: bool) -> Value {
    Value::Int(i64::from(v))
}

pub fn apply_unary(op: UnaryOp, v: Value) -> Result<Value, EvalFault> {
    Ok(match (op, v) {
        (UnaryOp::Neg, Value::Int(x)) => Value::Int(x.wrapping_neg()),
        (UnaryOp::Neg, Value::Float(x)) => Value::Float(-x),
        (UnaryOp::Not, x) => b(!x.truthy()),
        (UnaryOp::BitNot, Value::Int(x)) => Value::Int(!x),
        (UnaryOp::BitNot, Value::Float(_)) => return Err(EvalFault::TypeMismatch),
    })
}

pub fn apply_binary(op: BinaryOp, l: Value, r: Value) -> Result<Value, EvalFault> {
    use BinaryOp::*;
    match op {
        And => return Ok(b(l.truthy() && r.truthy())),
        Or => return Ok(b(l.truthy() || r.truthy())),
        _ => {}
    }
    match (l, r) {
        (Value::Int(x), Value::Int(y)) => Ok(match op {
            Add => Value::Int(x.wrapping_add(y)),
            Sub => Value::Int(x.wrapping_sub(y)),
            Mul => Value::Int(x.wrapping_mul(y)),
            Div | Rem if y == 0 => return Err(EvalFault::DivisionByZero),
            Div => Value::Int(x.wrapping_div(y)),
            Rem => Value::Int(x.wrapping_rem(y)),
            BitAnd => Value::Int(x & y),
            BitOr => Value::Int(x | y),
            BitXor => Value::Int(x ^ y),
            Shl => Value::Int(x.wrapping_shl((y & 63) as u32)),
            Shr => Value::Int(x.wrapping_shr((y & 63) as u32)),
            Lt => b(x < y),
            Le => b(x <= y),
            Gt => b(x > y),
            Ge => b(x >= y),
            Eq => b(x == y),
            Ne => b(x != y),
            And | Or => unreachable!(),
        }),
        _ => {
            if op.is_int_only() {
                return Err(EvalFault::TypeMismatch);
            }
            let (x, y) = (l.as_f64(), r.as_f64());
            Ok(match op {
                Add => Value::Float(x + y),
                Sub => Value::Float(x - y),
                Mul => Value::Float(x * y),
                Div if y == 0.0 => return Err(EvalFault::DivisionByZero),
                Div => Value::Float(x / y),
                Lt => b(x < y),
                Le => b(x <= y),
                Gt => b(x > y),
                Ge => b(x >= y),
                Eq => b(x == y),
                Ne => b(x != y),
                _ => unreachable!("integer-only operators handled above"),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrapping_and_promotion() {
        assert_eq!(
            apply_binary(BinaryOp::Add, Value::Int(i64::MAX), Value::Int(1)),
            Ok(Value::Int(i64::MIN))
        );
        assert_eq!(
            apply_binary(BinaryOp::Div, Value::Int(i64::MIN), Value::Int(-1)),
            Ok(Value::Int(i64::MIN))
        );
        assert_eq!(
            apply_binary(BinaryOp::Mul, Value::Int(2), Value::Float(1.5)),
            Ok(Value::Float(3.0))
        );
        assert_eq!(
            apply_binary(BinaryOp::Shl, Value::Int(1), Value::Int(65)),
            Ok(Value::Int(2))
        );
    }

    #[test]
    fn division_by_zero() {
        for op in [BinaryOp::Div, BinaryOp::Rem] {
            assert_eq!(
                apply_binary(op, Value::Int(1), Value::Int(0)),
                Err(EvalFault::DivisionByZero)
            );
        }
        assert_eq!(
            apply_binary(BinaryOp::Div, Value::Float(1.0), Value::Int(0)),
            Err(EvalFault::DivisionByZero)
        );
    }

    #[test]
    fn logic_yields_int() {
        assert_eq!(
            apply_binary(BinaryOp::And, Value::Float(0.5), Value::Int(3)),
            Ok(Value::Int(1))
        );
        assert_eq!(apply_unary(UnaryOp::Not, Value::Int(0)), Ok(Value::Int(1)));
    }
}
