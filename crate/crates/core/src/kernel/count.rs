//! Static BOPs counting.
//!
//! Counting rules, shared with the interpreter:
//!
//! * declarations and plain scalar moves cost nothing;
//! * each arithmetic, bitwise or logic operator (unary ones included) is one
//!   arithmetic BOP, each comparison one comparing BOP;
//! * an N-dimensional array read or write is N addressing BOPs;
//! * a compound assignment adds one arithmetic BOP and addresses its target
//!   once;
//! * a `for` loop costs its init expression once, then per executed iteration
//!   one comparing BOP for the bound check, one arithmetic BOP for the step,
//!   plus the operators inside the bound and step expressions. The failing
//!   exit check is free;
//! * an `if` costs its condition per evaluation plus the taken branch.
//!
//! Trip counts are derived by constant-propagating integer scalars whose
//! values do not depend on inputs or array contents. Loops whose body control
//! depends on the iteration are walked iteration by iteration (up to a budget);
//! otherwise one body pass is scaled by the trip count.

use std::collections::BTreeSet;

use serde::Serialize;

use super::ast::*;
use super::value::{apply_binary, apply_unary, Value};
use crate::ops::{normalized_weight, BasicOpClass, OpCategory};
use crate::tally::{BopsTally, TallyOverflow};

/// Result of static counting. `exact` is false when any trip count or branch
/// could not be resolved; the tally is then an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct StaticCount {
    pub tally: BopsTally,
    pub exact: bool,
}

/// Upper limit on loop iterations walked one by one across a whole program.
pub const DEFAULT_WALK_BUDGET: u64 = 10_000_000;

pub fn count_static(program: &KernelProgram) -> Result<StaticCount, TallyOverflow> {
    count_static_with_budget(program, DEFAULT_WALK_BUDGET)
}

pub fn count_static_with_budget(
    program: &KernelProgram,
    walk_budget: u64,
) -> Result<StaticCount, TallyOverflow> {
    let mut c = Counter {
        prog: program,
        env: vec![None; program.declarations.len()],
        exact: true,
        walk_budget,
    };
    let tally = c.block(&program.statements)?;
    Ok(StaticCount {
        tally,
        exact: c.exact,
    })
}

/// Operator cost of evaluating `e` once. Independent of values.
pub fn expr_cost(prog: &KernelProgram, e: &Expr) -> Result<BopsTally, TallyOverflow> {
    let mut t = BopsTally::ZERO;
    add_expr_cost(prog, e, &mut t)?;
    Ok(t)
}

fn add_expr_cost(prog: &KernelProgram, e: &Expr, t: &mut BopsTally) -> Result<(), TallyOverflow> {
    match e {
        Expr::Int(_) | Expr::Float(_) | Expr::Scalar(_) => Ok(()),
        Expr::Element { array, indices } => {
            for i in indices {
                add_expr_cost(prog, i, t)?;
            }
            add_addressing(prog, *array, t)
        }
        Expr::Unary { op, operand } => {
            add_expr_cost(prog, operand, t)?;
            t.record(op.class())
        }
        Expr::Binary { op, lhs, rhs } => {
            add_expr_cost(prog, lhs, t)?;
            add_expr_cost(prog, rhs, t)?;
            t.record(op.class())
        }
    }
}

fn add_addressing(
    prog: &KernelProgram,
    array: VarId,
    t: &mut BopsTally,
) -> Result<(), TallyOverflow> {
    let dims = prog.decl(array).dims.len() as u32;
    match BasicOpClass::array_addressing(dims) {
        Some(op) => t.add(OpCategory::Addressing, normalized_weight(op)),
        None => Ok(()),
    }
}

/// Per-iteration control cost of a loop: bound check plus step.
pub(crate) fn loop_control_cost(
    prog: &KernelProgram,
    l: &ForLoop,
) -> Result<BopsTally, TallyOverflow> {
    let mut t = BopsTally::ZERO;
    add_expr_cost(prog, &l.bound, &mut t)?;
    t.record(l.cmp.class())?;
    add_expr_cost(prog, &l.step.amount, &mut t)?;
    t.record(l.step.op.class())?;
    Ok(t)
}

pub(crate) fn assign_cost(
    prog: &KernelProgram,
    target: &LValue,
    op: Option<BinaryOp>,
    value: &Expr,
) -> Result<BopsTally, TallyOverflow> {
    let mut t = BopsTally::ZERO;
    for i in &target.indices {
        add_expr_cost(prog, i, &mut t)?;
    }
    if !target.indices.is_empty() {
        add_addressing(prog, target.var, &mut t)?;
    }
    add_expr_cost(prog, value, &mut t)?;
    if let Some(op) = op {
        t.record(op.class())?;
    }
    Ok(t)
}

struct Counter<'p> {
    prog: &'p KernelProgram,
    /// Statically known scalar values; `None` when input- or data-dependent.
    env: Vec<Option<Value>>,
    exact: bool,
    walk_budget: u64,
}

enum Trip {
    Known(u64),
    Unknown,
}

impl Counter<'_> {
    fn eval(&self, e: &Expr) -> Option<Value> {
        match e {
            Expr::Int(v) => Some(Value::Int(*v)),
            Expr::Float(v) => Some(Value::Float(*v)),
            Expr::Scalar(v) => self.env[v.0],
            Expr::Element { .. } => None,
            Expr::Unary { op, operand } => apply_unary(*op, self.eval(operand)?).ok(),
            Expr::Binary { op, lhs, rhs } => {
                apply_binary(*op, self.eval(lhs)?, self.eval(rhs)?).ok()
            }
        }
    }

    fn block(&mut self, stmts: &[Statement]) -> Result<BopsTally, TallyOverflow> {
        let mut t = BopsTally::ZERO;
        for s in stmts {
            t = t.checked_add(&self.stmt(s)?)?;
        }
        Ok(t)
    }

    fn stmt(&mut self, s: &Statement) -> Result<BopsTally, TallyOverflow> {
        match s {
            Statement::Assign { target, op, value } => {
                let cost = assign_cost(self.prog, target, *op, value)?;
                if target.indices.is_empty() {
                    let ty = self.prog.decl(target.var).ty;
                    let rhs = self.eval(value);
                    self.env[target.var.0] = match op {
                        None => rhs.map(|v| v.coerce(ty)),
                        Some(op) => self.env[target.var.0]
                            .zip(rhs)
                            .and_then(|(l, r)| apply_binary(*op, l, r).ok())
                            .map(|v| v.coerce(ty)),
                    };
                }
                Ok(cost)
            }
            Statement::If {
                cond,
                then_branch,
                else_branch,
            } => {
                let cond_cost = expr_cost(self.prog, cond)?;
                let branch = match self.eval(cond) {
                    Some(v) => {
                        let taken = if v.truthy() { then_branch } else { else_branch };
                        self.block(taken)?
                    }
                    None => {
                        let before = self.env.clone();
                        let then_t = self.block(then_branch)?;
                        let then_env = std::mem::replace(&mut self.env, before);
                        let else_t = self.block(else_branch)?;
                        for (slot, other) in self.env.iter_mut().zip(then_env) {
                            if *slot != other {
                                *slot = None;
                            }
                        }
                        if then_t != else_t {
                            self.exact = false;
                        }
                        if else_t.total()? > then_t.total()? {
                            else_t
                        } else {
                            then_t
                        }
                    }
                };
                cond_cost.checked_add(&branch)
            }
            Statement::For(l) => self.for_loop(l),
        }
    }

    fn for_loop(&mut self, l: &ForLoop) -> Result<BopsTally, TallyOverflow> {
        let init_cost = expr_cost(self.prog, &l.init)?;
        let control = loop_control_cost(self.prog, l)?;
        let start = self.eval(&l.init).and_then(Value::as_int);
        self.env[l.var.0] = start.map(Value::Int);

        let mut written = Vec::new();
        l.body.iter().for_each(|s| s.scalars_written(&mut written));
        let written: BTreeSet<VarId> = written.into_iter().collect();
        let mut header_reads = Vec::new();
        l.bound.scalars_read(&mut header_reads);
        l.step.amount.scalars_read(&mut header_reads);
        let header_stable = !written.contains(&l.var)
            && header_reads
                .iter()
                .all(|v| *v == l.var || !written.contains(v));

        let trip = match start {
            Some(v0) if header_stable => self.trip_count(l, v0),
            _ => Trip::Unknown,
        };
        let Trip::Known(trips) = trip else {
            return self.unresolved_loop(l, &written, init_cost, control);
        };
        let v0 = start.expect("known trip implies known start");

        let mut watched = written.clone();
        watched.insert(l.var);
        let per_iteration_varies = l.body.iter().any(|s| control_reads(s, &watched));

        let mut total = init_cost;
        if trips == 0 {
            return Ok(total);
        }
        if per_iteration_varies && trips <= self.walk_budget {
            self.walk_budget -= trips;
            let mut v = v0;
            for _ in 0..trips {
                self.env[l.var.0] = Some(Value::Int(v));
                let body = self.block(&l.body)?;
                total = total.checked_add(&control)?.checked_add(&body)?;
                v = self
                    .step_value(l, v)
                    .expect("trip count implies a known step");
            }
            self.env[l.var.0] = Some(Value::Int(v));
            return Ok(total);
        }
        if per_iteration_varies {
            // Too many iterations to walk: scale the first one.
            self.exact = false;
        }
        self.env[l.var.0] = Some(Value::Int(v0));
        let body = self.block(&l.body)?;
        total = total.checked_add(&control.checked_add(&body)?.checked_mul(trips)?)?;
        if trips > 1 {
            for v in &written {
                self.env[v.0] = None;
            }
        }
        self.env[l.var.0] = self.final_value(l, v0, trips).map(Value::Int);
        Ok(total)
    }

    /// Non-constant trip count: one iteration is counted as the estimate.
    fn unresolved_loop(
        &mut self,
        l: &ForLoop,
        written: &BTreeSet<VarId>,
        init_cost: BopsTally,
        control: BopsTally,
    ) -> Result<BopsTally, TallyOverflow> {
        self.exact = false;
        self.env[l.var.0] = None;
        for v in written {
            self.env[v.0] = None;
        }
        let body = self.block(&l.body)?;
        self.env[l.var.0] = None;
        for v in written {
            self.env[v.0] = None;
        }
        init_cost.checked_add(&control)?.checked_add(&body)
    }

    fn step_value(&mut self, l: &ForLoop, v: i64) -> Option<i64> {
        self.env[l.var.0] = Some(Value::Int(v));
        let amount = self.eval(&l.step.amount)?.as_int()?;
        Some(match l.step.op {
            BinaryOp::Add => v.wrapping_add(amount),
            _ => v.wrapping_sub(amount),
        })
    }

    fn final_value(&self, l: &ForLoop, v0: i64, trips: u64) -> Option<i64> {
        let d = self.eval(&l.step.amount)?.as_int()?;
        let d = if l.step.op == BinaryOp::Add {
            d
        } else {
            d.wrapping_neg()
        };
        Some(v0.wrapping_add(d.wrapping_mul(trips as i64)))
    }

    fn check(&mut self, l: &ForLoop, v: i64) -> Option<bool> {
        self.env[l.var.0] = Some(Value::Int(v));
        let bound = self.eval(&l.bound)?;
        Some(apply_binary(l.cmp, Value::Int(v), bound).ok()?.truthy())
    }

    fn trip_count(&mut self, l: &ForLoop, v0: i64) -> Trip {
        let affine = !l.bound.reads_scalar(l.var) && !l.step.amount.reads_scalar(l.var);
        if affine {
            let bound = self.eval(&l.bound).and_then(Value::as_int);
            let amount = self.eval(&l.step.amount).and_then(Value::as_int);
            if let (Some(b), Some(a)) = (bound, amount) {
                let d = if l.step.op == BinaryOp::Add {
                    i128::from(a)
                } else {
                    -i128::from(a)
                };
                return closed_form_trips(l.cmp, i128::from(v0), i128::from(b), d);
            }
            return Trip::Unknown;
        }
        // Bound or step depends on the loop variable: simulate the header.
        let mut v = v0;
        let mut n = 0u64;
        loop {
            match self.check(l, v) {
                Some(true) => {}
                Some(false) => {
                    self.env[l.var.0] = Some(Value::Int(v0));
                    return Trip::Known(n);
                }
                None => return Trip::Unknown,
            }
            n += 1;
            if n > self.walk_budget {
                return Trip::Unknown;
            }
            match self.step_value(l, v) {
                Some(next) => v = next,
                None => return Trip::Unknown,
            }
        }
    }
}

/// Iterations of `for (v = v0; v cmp b; v += d)` without wrap-around, or
/// `Unknown` for loops that never terminate or leave the i64 range.
fn closed_form_trips(cmp: BinaryOp, v0: i128, b: i128, d: i128) -> Trip {
    let ceil_div = |n: i128, m: i128| (n + m - 1).div_euclid(m);
    let holds = |v: i128| match cmp {
        BinaryOp::Lt => v < b,
        BinaryOp::Le => v <= b,
        BinaryOp::Gt => v > b,
        BinaryOp::Ge => v >= b,
        BinaryOp::Eq => v == b,
        _ => v != b,
    };
    if !holds(v0) {
        return Trip::Known(0);
    }
    let trips: i128 = match (cmp, d.signum()) {
        (_, 0) => return Trip::Unknown,
        (BinaryOp::Lt, 1) => ceil_div(b - v0, d),
        (BinaryOp::Le, 1) => (b - v0) / d + 1,
        (BinaryOp::Gt, -1) => ceil_div(v0 - b, -d),
        (BinaryOp::Ge, -1) => (v0 - b) / -d + 1,
        (BinaryOp::Eq, _) => 1,
        (BinaryOp::Ne, _) if (b - v0) % d == 0 && (b - v0) / d > 0 => (b - v0) / d,
        _ => return Trip::Unknown,
    };
    let last = v0 + d * trips;
    if last < i128::from(i64::MIN) || last > i128::from(i64::MAX) {
        return Trip::Unknown;
    }
    match u64::try_from(trips) {
        Ok(t) => Trip::Known(t),
        Err(_) => Trip::Unknown,
    }
}

/// Whether any loop header or branch condition nested in `s` reads a
/// variable in `vars`.
fn control_reads(s: &Statement, vars: &BTreeSet<VarId>) -> bool {
    let reads = |e: &Expr| {
        let mut r = Vec::new();
        e.scalars_read(&mut r);
        r.iter().any(|v| vars.contains(v))
    };
    match s {
        Statement::Assign { .. } => false,
        Statement::For(l) => {
            reads(&l.init)
                || reads(&l.bound)
                || reads(&l.step.amount)
                || l.body.iter().any(|s| control_reads(s, vars))
        }
        Statement::If {
            cond,
            then_branch,
            else_branch,
        } => {
            reads(cond)
                || then_branch.iter().any(|s| control_reads(s, vars))
                || else_branch.iter().any(|s| control_reads(s, vars))
        }
    }
}
