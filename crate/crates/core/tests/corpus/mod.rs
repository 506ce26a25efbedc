//! Random kernel programs with constant loop bounds.
//!
//! Every generated program is well formed and runs without errors: scalars
//! are initialised up front, array indices are reduced modulo the extent of a
//! non-negative expression, and each assignment adds a bounded amount to at
//! most one existing value so nothing overflows.

#![allow(dead_code)]

use rand::Rng;

const SCALARS: [&str; 4] = ["s0", "s1", "s2", "s3"];
const LOOP_VARS: [&str; 3] = ["i0", "i1", "i2"];

pub struct Gen<R> {
    rng: R,
    /// Loop variables in scope, innermost last.
    scope: Vec<&'static str>,
    out: String,
    indent: usize,
}

impl<R: Rng> Gen<R> {
    pub fn new(rng: R) -> Self {
        Gen {
            rng,
            scope: Vec::new(),
            out: String::new(),
            indent: 0,
        }
    }

    pub fn program(&mut self) -> String {
        self.out.clear();
        self.scope.clear();
        self.out.push_str("long s0; long s1; long s2; long s3;\n");
        self.out.push_str("long i0; long i1; long i2;\n");
        self.out.push_str("double d0;\nlong a[8];\nlong b[4][4];\n");
        for s in SCALARS {
            let v = self.rng.random_range(-5..20);
            self.line(&format!("{s} = {v};"));
        }
        self.line("d0 = 0.5;");
        let n = self.rng.random_range(1..6);
        for _ in 0..n {
            self.statement(0);
        }
        std::mem::take(&mut self.out)
    }

    fn line(&mut self, s: &str) {
        for _ in 0..self.indent {
            self.out.push_str("  ");
        }
        self.out.push_str(s);
        self.out.push('\n');
    }

    fn pick<T: Copy>(&mut self, xs: &[T]) -> T {
        xs[self.rng.random_range(0..xs.len())]
    }

    /// A value in `0..=40`-ish that never grows with execution.
    fn small(&mut self) -> String {
        if !self.scope.is_empty() && self.rng.random_bool(0.6) {
            let v = self.pick(&self.scope.clone());
            match self.rng.random_range(0..4) {
                0 => v.to_string(),
                1 => format!("{v} + {}", self.rng.random_range(0..4)),
                2 => format!("{v} * {}", self.rng.random_range(1..3)),
                _ => format!("({v} & 3)"),
            }
        } else {
            self.rng.random_range(0..10).to_string()
        }
    }

    /// Index into an extent of `ext`, from a non-negative expression.
    fn index(&mut self, ext: u32) -> String {
        if !self.scope.is_empty() && self.rng.random_bool(0.7) {
            format!("({}) % {ext}", self.small())
        } else {
            self.rng.random_range(0..ext).to_string()
        }
    }

    fn array_ref(&mut self) -> String {
        if self.rng.random_bool(0.5) {
            format!("a[{}]", self.index(8))
        } else {
            format!("b[{}][{}]", self.index(4), self.index(4))
        }
    }

    /// A reference to one possibly growing value.
    fn base(&mut self) -> String {
        match self.rng.random_range(0..3) {
            0 => self.pick(&SCALARS).to_string(),
            1 => self.array_ref(),
            _ => self.small(),
        }
    }

    fn int_expr(&mut self) -> String {
        let base = self.base();
        match self.rng.random_range(0..7) {
            0 => base,
            1 => format!("{base} + {}", self.small()),
            2 => format!("{base} - {}", self.small()),
            3 => format!("({base}) % 7"),
            4 => format!("({base}) ^ {}", self.small()),
            5 => format!("-({base}) + {}", self.small()),
            _ => format!("({base}) | ({} << 1)", self.small()),
        }
    }

    fn cond(&mut self) -> String {
        let cmp = self.pick(&["<", "<=", ">", ">=", "==", "!="]);
        let lhs = if !self.scope.is_empty() && self.rng.random_bool(0.7) {
            self.pick(&self.scope.clone()).to_string()
        } else {
            self.int_expr()
        };
        let c = format!("({lhs}) {cmp} {}", self.rng.random_range(0..8));
        match self.rng.random_range(0..5) {
            0 => format!("{c} && {}", self.cond_leaf()),
            1 => format!("{c} || {}", self.cond_leaf()),
            2 => format!("!({c})"),
            _ => c,
        }
    }

    fn cond_leaf(&mut self) -> String {
        let e = self.small();
        format!("({e}) < {}", self.rng.random_range(0..6))
    }

    fn assign(&mut self) {
        let target = if self.rng.random_bool(0.5) {
            self.pick(&SCALARS).to_string()
        } else {
            self.array_ref()
        };
        let s = match self.rng.random_range(0..6) {
            0 => format!("{target} += {};", self.small()),
            1 => format!("{target} -= {};", self.small()),
            2 => {
                let e = self.small();
                format!("d0 = d0 + {e} * 0.25;")
            }
            _ => format!("{target} = {};", self.int_expr()),
        };
        self.line(&s);
    }

    fn statement(&mut self, depth: usize) {
        let roll = self.rng.random_range(0..10);
        if depth < LOOP_VARS.len() && roll < 4 {
            self.for_loop(depth);
        } else if depth < 4 && roll < 6 {
            let c = self.cond();
            self.line(&format!("if ({c}) {{"));
            self.block(depth + 1);
            if self.rng.random_bool(0.5) {
                self.line("} else {");
                self.block(depth + 1);
            }
            self.line("}");
        } else {
            self.assign();
        }
    }

    fn block(&mut self, depth: usize) {
        self.indent += 1;
        let n = self.rng.random_range(1..4);
        for _ in 0..n {
            self.statement(depth);
        }
        self.indent -= 1;
    }

    fn for_loop(&mut self, depth: usize) {
        let v = LOOP_VARS[self.scope.len()];
        let header = match self.rng.random_range(0..4) {
            0 => {
                let hi = self.rng.random_range(0..9);
                format!("for ({v} = 10 - {hi}; {v} >= 1; {v}--)")
            }
            1 => {
                let hi = self.rng.random_range(1..12);
                format!("for ({v} = 0; {v} < {hi}; {v} += 2)")
            }
            2 => {
                let hi = self.rng.random_range(0..8);
                format!("for ({v} = 1; {v} <= {hi}; {v}++)")
            }
            _ => {
                let hi = self.rng.random_range(0..9);
                format!("for ({v} = 0; {v} < {hi} + 1; {v}++)")
            }
        };
        self.line(&format!("{header} {{"));
        self.scope.push(v);
        self.block(depth + 1);
        self.scope.pop();
        self.line("}");
    }
}
