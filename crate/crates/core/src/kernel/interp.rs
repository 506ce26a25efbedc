//! Counting interpreter: executes a kernel and tallies every evaluated
//! operation under the same rules as [`count_static`](super::count_static).

use std::collections::{BTreeMap, HashMap};

use serde::Serialize;
use thiserror::Error;

use super::ast::*;
use super::count::assign_cost;
use super::value::{apply_binary, apply_unary, EvalFault, Value};
use crate::ops::{normalized_weight, BasicOpClass, OpCategory};
use crate::tally::{BopsTally, TallyOverflow};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum InterpError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("index {index} out of bounds for dimension {dim} of `{array}` (size {size})")]
    IndexOutOfBounds {
        array: String,
        dim: usize,
        index: i64,
        size: u64,
    },
    #[error("scalar `{0}` is read before being assigned and has no input binding")]
    Unbound(String),
    #[error("input `{0}` does not name a declared scalar")]
    UnknownInput(String),
    #[error("input `{0}` is a float but the variable is an integer")]
    InputType(String),
    #[error("array `{name}` has {elements} elements, above the limit of {limit}")]
    ArrayTooLarge {
        name: String,
        elements: u128,
        limit: u64,
    },
    #[error("step budget of {0} evaluated operations exceeded (non-terminating kernel?)")]
    BudgetExceeded(u64),
    #[error(transparent)]
    Overflow(#[from] TallyOverflow),
}

#[derive(Debug, Clone, Copy)]
pub struct InterpOptions {
    /// Maximum evaluated BOPs before the run is abandoned.
    pub max_ops: u64,
    pub max_array_elements: u64,
}

impl Default for InterpOptions {
    fn default() -> Self {
        InterpOptions {
            max_ops: 1_000_000_000,
            max_array_elements: 1 << 26,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ArrayState {
    pub dims: Vec<u64>,
    /// Row-major contents.
    pub values: Vec<Value>,
}

/// Variables after execution. Arrays that were never touched are omitted.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct FinalState {
    pub scalars: BTreeMap<String, Value>,
    pub arrays: BTreeMap<String, ArrayState>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Execution {
    pub tally: BopsTally,
    pub state: FinalState,
}

pub fn interpret(
    program: &KernelProgram,
    inputs: &HashMap<String, Value>,
) -> Result<Execution, InterpError> {
    interpret_with(program, inputs, InterpOptions::default())
}

pub fn interpret_with(
    program: &KernelProgram,
    inputs: &HashMap<String, Value>,
    options: InterpOptions,
) -> Result<Execution, InterpError> {
    let mut scalars: Vec<Option<Value>> = vec![None; program.declarations.len()];
    for (name, value) in inputs {
        let var = program
            .lookup(name)
            .filter(|v| !program.decl(*v).is_array())
            .ok_or_else(|| InterpError::UnknownInput(name.clone()))?;
        let ty = program.decl(var).ty;
        if ty == ScalarType::Int && matches!(value, Value::Float(_)) {
            return Err(InterpError::InputType(name.clone()));
        }
        scalars[var.0] = Some(value.coerce(ty));
    }
    let mut m = Machine {
        prog: program,
        scalars,
        arrays: vec![None; program.declarations.len()],
        tally: BopsTally::ZERO,
        options,
    };
    m.block(&program.statements)?;

    let mut state = FinalState::default();
    for (i, d) in program.declarations.iter().enumerate() {
        if let Some(v) = m.scalars[i] {
            state.scalars.insert(d.name.clone(), v);
        }
        if let Some(values) = m.arrays[i].take() {
            state.arrays.insert(
                d.name.clone(),
                ArrayState {
                    dims: d.dims.clone(),
                    values,
                },
            );
        }
    }
    Ok(Execution {
        tally: m.tally,
        state,
    })
}

struct Machine<'p> {
    prog: &'p KernelProgram,
    scalars: Vec<Option<Value>>,
    arrays: Vec<Option<Vec<Value>>>,
    tally: BopsTally,
    options: InterpOptions,
}

fn fault(f: EvalFault) -> InterpError {
    match f {
        EvalFault::DivisionByZero => InterpError::DivisionByZero,
        EvalFault::TypeMismatch => unreachable!("type checker rejects int-only ops on floats"),
    }
}

impl Machine<'_> {
    fn check_budget(&self) -> Result<(), InterpError> {
        if self.tally.total()? > self.options.max_ops {
            Err(InterpError::BudgetExceeded(self.options.max_ops))
        } else {
            Ok(())
        }
    }

    fn eval(&mut self, e: &Expr, t: &mut BopsTally) -> Result<Value, InterpError> {
        Ok(match e {
            Expr::Int(v) => Value::Int(*v),
            Expr::Float(v) => Value::Float(*v),
            Expr::Scalar(v) => self.scalars[v.0]
                .ok_or_else(|| InterpError::Unbound(self.prog.decl(*v).name.clone()))?,
            Expr::Element { array, indices } => {
                let at = self.element_index(*array, indices, t)?;
                self.array_mut(*array)?[at]
            }
            Expr::Unary { op, operand } => {
                let v = self.eval(operand, t)?;
                t.record(op.class())?;
                apply_unary(*op, v).map_err(fault)?
            }
            Expr::Binary { op, lhs, rhs } => {
                let l = self.eval(lhs, t)?;
                let r = self.eval(rhs, t)?;
                t.record(op.class())?;
                apply_binary(*op, l, r).map_err(fault)?
            }
        })
    }

    /// Evaluates index expressions, charges the addressing BOPs and returns
    /// the row-major offset.
    fn element_index(
        &mut self,
        array: VarId,
        indices: &[Expr],
        t: &mut BopsTally,
    ) -> Result<usize, InterpError> {
        let mut idx = Vec::with_capacity(indices.len());
        for e in indices {
            let v = self.eval(e, t)?;
            idx.push(v.as_int().expect("type checker keeps indices integral"));
        }
        let decl = self.prog.decl(array);
        let op = BasicOpClass::array_addressing(decl.dims.len() as u32)
            .expect("element access on an array");
        t.add(OpCategory::Addressing, normalized_weight(op))?;
        let mut flat: u64 = 0;
        for (dim, (&i, &size)) in idx.iter().zip(&decl.dims).enumerate() {
            if i < 0 || i as u64 >= size {
                return Err(InterpError::IndexOutOfBounds {
                    array: decl.name.clone(),
                    dim,
                    index: i,
                    size,
                });
            }
            flat = flat * size + i as u64;
        }
        Ok(flat as usize)
    }

    fn array_mut(&mut self, array: VarId) -> Result<&mut Vec<Value>, InterpError> {
        if self.arrays[array.0].is_none() {
            let decl = self.prog.decl(array);
            let elements: u128 = decl.dims.iter().map(|&d| u128::from(d)).product();
            if elements > u128::from(self.options.max_array_elements) {
                return Err(InterpError::ArrayTooLarge {
                    name: decl.name.clone(),
                    elements,
                    limit: self.options.max_array_elements,
                });
            }
            self.arrays[array.0] = Some(vec![Value::zero(decl.ty); elements as usize]);
        }
        Ok(self.arrays[array.0].as_mut().expect("allocated above"))
    }

    fn block(&mut self, stmts: &[Statement]) -> Result<(), InterpError> {
        for s in stmts {
            self.stmt(s)?;
            self.check_budget()?;
        }
        Ok(())
    }

    fn stmt(&mut self, s: &Statement) -> Result<(), InterpError> {
        match s {
            Statement::Assign { target, op, value } => self.assign(target, *op, value),
            Statement::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let mut t = self.tally;
                let c = self.eval(cond, &mut t)?;
                self.tally = t;
                if c.truthy() {
                    self.block(then_branch)
                } else {
                    self.block(else_branch)
                }
            }
            Statement::For(l) => self.for_loop(l),
        }
    }

    fn assign(
        &mut self,
        target: &LValue,
        op: Option<BinaryOp>,
        value: &Expr,
    ) -> Result<(), InterpError> {
        let mut t = self.tally;
        let ty = self.prog.decl(target.var).ty;
        if target.indices.is_empty() {
            let rhs = self.eval(value, &mut t)?;
            let new = match op {
                None => rhs,
                Some(op) => {
                    let old = self.scalars[target.var.0].ok_or_else(|| {
                        InterpError::Unbound(self.prog.decl(target.var).name.clone())
                    })?;
                    t.record(op.class())?;
                    apply_binary(op, old, rhs).map_err(fault)?
                }
            };
            self.scalars[target.var.0] = Some(new.coerce(ty));
        } else {
            let at = self.element_index(target.var, &target.indices, &mut t)?;
            let rhs = self.eval(value, &mut t)?;
            let slot = &mut self.array_mut(target.var)?[at];
            let new = match op {
                None => rhs,
                Some(op) => {
                    t.record(op.class())?;
                    apply_binary(op, *slot, rhs).map_err(fault)?
                }
            };
            *slot = new.coerce(ty);
        }
        debug_assert_eq!(
            t.total()
                .ok()
                .zip(self.tally.total().ok())
                .map(|(a, b)| a - b),
            assign_cost(self.prog, target, op, value)
                .ok()
                .and_then(|c| c.total().ok()),
            "dynamic assignment cost must match the static rule"
        );
        self.tally = t;
        Ok(())
    }

    fn for_loop(&mut self, l: &ForLoop) -> Result<(), InterpError> {
        let mut t = self.tally;
        let v0 = self.eval(&l.init, &mut t)?;
        self.tally = t;
        self.scalars[l.var.0] = Some(v0);
        loop {
            self.check_budget()?;
            // The exit check is free: evaluate the bound into scratch and only
            // charge it when the iteration runs.
            let mut scratch = BopsTally::ZERO;
            let bound = self.eval(&l.bound, &mut scratch)?;
            let cur = self.scalars[l.var.0]
                .ok_or_else(|| InterpError::Unbound(self.prog.decl(l.var).name.clone()))?;
            if !apply_binary(l.cmp, cur, bound).map_err(fault)?.truthy() {
                break;
            }
            scratch.record(l.cmp.class())?;
            self.tally = self.tally.checked_add(&scratch)?;
            self.block(&l.body)?;

            let mut t = self.tally;
            let amount = self.eval(&l.step.amount, &mut t)?;
            t.record(l.step.op.class())?;
            let cur = self.scalars[l.var.0]
                .ok_or_else(|| InterpError::Unbound(self.prog.decl(l.var).name.clone()))?;
            self.scalars[l.var.0] = Some(apply_binary(l.step.op, cur, amount).map_err(fault)?);
            self.tally = t;
        }
        Ok(())
    }
}
