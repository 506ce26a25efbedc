use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use super::ast::*;
use super::lexer::{tokenize, Tok, Token};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Syntax(String),
    Undeclared(String),
    Redeclared(String),
    DimensionMismatch {
        name: String,
        expected: usize,
        found: usize,
    },
    Unsupported(String),
    Type(String),
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Syntax(m) => write!(f, "syntax error: {m}"),
            ParseErrorKind::Undeclared(n) => write!(f, "undeclared identifier `{n}`"),
            ParseErrorKind::Redeclared(n) => write!(f, "`{n}` is declared more than once"),
            ParseErrorKind::DimensionMismatch {
                name,
                expected,
                found,
            } => write!(
                f,
                "`{name}` has {expected} dimension(s) but is accessed with {found} index(es)"
            ),
            ParseErrorKind::Unsupported(c) => write!(f, "unsupported construct: {c}"),
            ParseErrorKind::Type(m) => write!(f, "type error: {m}"),
        }
    }
}

/// A parse failure at a 1-based line and column.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

impl ParseError {
    pub(crate) fn new(line: usize, col: usize, kind: ParseErrorKind) -> Self {
        ParseError { line, col, kind }
    }
}

const INT_TYPES: [&str; 3] = ["long", "int", "short"];
const FLOAT_TYPES: [&str; 2] = ["double", "float"];
const UNSUPPORTED_KEYWORDS: [&str; 17] = [
    "while", "do", "switch", "case", "goto", "return", "break", "continue", "struct", "union",
    "typedef", "void", "char", "sizeof", "unsigned", "signed", "const",
];
const RESERVED: [&str; 3] = ["for", "if", "else"];

/// Parse kernel source text into a checked program.
pub fn parse(source: &str) -> Result<KernelProgram, ParseError> {
    let toks = tokenize(source)?;
    let mut p = Parser {
        toks,
        pos: 0,
        prog: KernelProgram::default(),
        names: HashMap::new(),
    };
    while !p.at_eof() {
        if p.at_type_keyword() {
            p.declaration()?;
        } else {
            let stmts = p.statement()?;
            p.prog.statements.extend(stmts);
        }
    }
    Ok(p.prog)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    prog: KernelProgram,
    names: HashMap<String, VarId>,
}

type PResult<T> = Result<T, ParseError>;

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, ahead: usize) -> &Tok {
        &self.toks[(self.pos + ahead).min(self.toks.len() - 1)].tok
    }

    fn at_eof(&self) -> bool {
        self.peek().tok == Tok::Eof
    }

    fn advance(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn err_here(&self, kind: ParseErrorKind) -> ParseError {
        let t = self.peek();
        ParseError::new(t.line, t.col, kind)
    }

    fn err_at(t: &Token, kind: ParseErrorKind) -> ParseError {
        ParseError::new(t.line, t.col, kind)
    }

    fn describe(tok: &Tok) -> String {
        match tok {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Int(v) => format!("`{v}`"),
            Tok::Float(v) => format!("`{v}`"),
            Tok::Punct(p) => format!("`{p}`"),
            Tok::Quoted => "a string literal".into(),
            Tok::Eof => "end of input".into(),
        }
    }

    fn is_punct(&self, p: &str) -> bool {
        matches!(&self.peek().tok, Tok::Punct(q) if *q == p)
    }

    fn eat_punct(&mut self, p: &str) -> bool {
        if self.is_punct(p) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect_punct(&mut self, p: &str) -> PResult<()> {
        if self.eat_punct(p) {
            Ok(())
        } else {
            Err(self.err_here(ParseErrorKind::Syntax(format!(
                "expected `{p}`, found {}",
                Self::describe(&self.peek().tok)
            ))))
        }
    }

    fn is_keyword(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn at_type_keyword(&self) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s)
            if INT_TYPES.contains(&s.as_str()) || FLOAT_TYPES.contains(&s.as_str()))
    }

    fn check_unsupported_keyword(&self) -> PResult<()> {
        if let Tok::Ident(s) = &self.peek().tok {
            if UNSUPPORTED_KEYWORDS.contains(&s.as_str()) {
                let what = match s.as_str() {
                    "while" | "do" => format!("`{s}` loop (only `for` loops are supported)"),
                    "char" => "`char` (strings are not supported)".to_string(),
                    _ => format!("`{s}`"),
                };
                return Err(self.err_here(ParseErrorKind::Unsupported(what)));
            }
        }
        Ok(())
    }

    fn declaration(&mut self) -> PResult<()> {
        let first = self.advance();
        let ty_name = match &first.tok {
            Tok::Ident(s) => s.clone(),
            _ => unreachable!("caller checked for a type keyword"),
        };
        let ty = if FLOAT_TYPES.contains(&ty_name.as_str()) {
            ScalarType::Float
        } else {
            // `long long`, `long int`, `short int` and friends.
            while matches!(&self.peek().tok, Tok::Ident(s) if INT_TYPES.contains(&s.as_str())) {
                self.advance();
            }
            ScalarType::Int
        };
        loop {
            if self.is_punct("*") {
                return Err(self.err_here(ParseErrorKind::Unsupported("pointer".into())));
            }
            let name_tok = self.advance();
            let name = match &name_tok.tok {
                Tok::Ident(s)
                    if !RESERVED.contains(&s.as_str())
                        && !UNSUPPORTED_KEYWORDS.contains(&s.as_str())
                        && !INT_TYPES.contains(&s.as_str())
                        && !FLOAT_TYPES.contains(&s.as_str()) =>
                {
                    s.clone()
                }
                other => {
                    return Err(Self::err_at(
                        &name_tok,
                        ParseErrorKind::Syntax(format!(
                            "expected identifier in declaration, found {}",
                            Self::describe(other)
                        )),
                    ))
                }
            };
            if self.is_punct("(") {
                return Err(
                    self.err_here(ParseErrorKind::Unsupported("function definition".into()))
                );
            }
            let mut dims = Vec::new();
            while self.eat_punct("[") {
                let t = self.advance();
                match t.tok {
                    Tok::Int(n) if n > 0 => dims.push(n as u64),
                    _ => {
                        return Err(Self::err_at(
                            &t,
                            ParseErrorKind::Syntax(
                                "array dimension must be a positive integer literal".into(),
                            ),
                        ))
                    }
                }
                self.expect_punct("]")?;
            }
            if self.names.contains_key(&name) {
                return Err(Self::err_at(&name_tok, ParseErrorKind::Redeclared(name)));
            }
            let id = VarId(self.prog.declarations.len());
            self.prog.declarations.push(Declaration {
                name: name.clone(),
                ty,
                dims: dims.clone(),
            });
            self.names.insert(name, id);
            if self.is_punct("=") {
                let eq = self.advance();
                if !dims.is_empty() {
                    return Err(Self::err_at(
                        &eq,
                        ParseErrorKind::Unsupported("array initializer".into()),
                    ));
                }
                let (value, vty) = self.expr()?;
                Self::check_assignable(&eq, ty, vty)?;
                self.prog.statements.push(Statement::Assign {
                    target: LValue {
                        var: id,
                        indices: vec![],
                    },
                    op: None,
                    value,
                });
            }
            if self.eat_punct(",") {
                continue;
            }
            self.expect_punct(";")?;
            return Ok(());
        }
    }

    fn check_assignable(at: &Token, target: ScalarType, value: ScalarType) -> PResult<()> {
        if target == ScalarType::Int && value == ScalarType::Float {
            Err(Self::err_at(
                at,
                ParseErrorKind::Type("cannot assign a float value to an integer variable".into()),
            ))
        } else {
            Ok(())
        }
    }

    /// Parses one statement. Bare blocks and empty statements flatten, so the
    /// result may hold zero or several statements.
    fn statement(&mut self) -> PResult<Vec<Statement>> {
        self.check_unsupported_keyword()?;
        if self.at_type_keyword() {
            return Err(self.err_here(ParseErrorKind::Unsupported(
                "declaration inside a block (declare at top level)".into(),
            )));
        }
        if self.eat_punct(";") {
            return Ok(vec![]);
        }
        if self.is_punct("{") {
            return self.block();
        }
        if self.is_keyword("for") {
            return Ok(vec![self.for_loop()?]);
        }
        if self.is_keyword("if") {
            return Ok(vec![self.if_statement()?]);
        }
        if self.is_keyword("else") {
            return Err(self.err_here(ParseErrorKind::Syntax("`else` without `if`".into())));
        }
        let s = self.simple_assignment()?;
        self.expect_punct(";")?;
        Ok(vec![s])
    }

    fn block(&mut self) -> PResult<Vec<Statement>> {
        self.expect_punct("{")?;
        let mut out = Vec::new();
        while !self.is_punct("}") {
            if self.at_eof() {
                return Err(self.err_here(ParseErrorKind::Syntax("unclosed `{`".into())));
            }
            out.extend(self.statement()?);
        }
        self.advance();
        Ok(out)
    }

    fn body(&mut self) -> PResult<Vec<Statement>> {
        if self.is_punct("{") {
            self.block()
        } else {
            self.statement()
        }
    }

    fn resolve(&self, tok: &Token) -> PResult<VarId> {
        match &tok.tok {
            Tok::Ident(name) => self
                .names
                .get(name)
                .copied()
                .ok_or_else(|| Self::err_at(tok, ParseErrorKind::Undeclared(name.clone()))),
            other => Err(Self::err_at(
                tok,
                ParseErrorKind::Syntax(format!(
                    "expected identifier, found {}",
                    Self::describe(other)
                )),
            )),
        }
    }

    fn lvalue(&mut self) -> PResult<(LValue, ScalarType, Token)> {
        let t = self.advance();
        if matches!(t.tok, Tok::Ident(_)) && self.is_punct("(") {
            return Err(Self::err_at(
                &t,
                ParseErrorKind::Unsupported("function call".into()),
            ));
        }
        if t.tok == Tok::Punct("*") {
            return Err(Self::err_at(
                &t,
                ParseErrorKind::Unsupported("pointer".into()),
            ));
        }
        let var = self.resolve(&t)?;
        let indices = self.indices(&t, var)?;
        let ty = self.prog.decl(var).ty;
        Ok((LValue { var, indices }, ty, t))
    }

    fn indices(&mut self, at: &Token, var: VarId) -> PResult<Vec<Expr>> {
        let mut indices = Vec::new();
        while self.is_punct("[") {
            self.advance();
            let idx_tok = self.peek().clone();
            let (e, ty) = self.expr()?;
            if ty != ScalarType::Int {
                return Err(Self::err_at(
                    &idx_tok,
                    ParseErrorKind::Type("array index must be an integer".into()),
                ));
            }
            indices.push(e);
            self.expect_punct("]")?;
        }
        let decl = self.prog.decl(var);
        if indices.len() != decl.dims.len() {
            return Err(Self::err_at(
                at,
                ParseErrorKind::DimensionMismatch {
                    name: decl.name.clone(),
                    expected: decl.dims.len(),
                    found: indices.len(),
                },
            ));
        }
        Ok(indices)
    }

    fn compound_op(p: &str) -> Option<BinaryOp> {
        Some(match p {
            "+=" => BinaryOp::Add,
            "-=" => BinaryOp::Sub,
            "*=" => BinaryOp::Mul,
            "/=" => BinaryOp::Div,
            "%=" => BinaryOp::Rem,
            "&=" => BinaryOp::BitAnd,
            "|=" => BinaryOp::BitOr,
            "^=" => BinaryOp::BitXor,
            "<<=" => BinaryOp::Shl,
            ">>=" => BinaryOp::Shr,
            _ => return None,
        })
    }

    /// `lv = e`, `lv op= e`, `lv++`, `lv--`, `++lv`, `--lv`.
    fn simple_assignment(&mut self) -> PResult<Statement> {
        if self.is_punct("++") || self.is_punct("--") {
            let t = self.advance();
            let op = if t.tok == Tok::Punct("++") {
                BinaryOp::Add
            } else {
                BinaryOp::Sub
            };
            let (target, _, _) = self.lvalue()?;
            return Ok(Statement::Assign {
                target,
                op: Some(op),
                value: Expr::Int(1),
            });
        }
        let (target, tty, _) = self.lvalue()?;
        let op_tok = self.advance();
        let p = match op_tok.tok {
            Tok::Punct(p) => p,
            ref other => {
                return Err(Self::err_at(
                    &op_tok,
                    ParseErrorKind::Syntax(format!(
                        "expected assignment, found {}",
                        Self::describe(other)
                    )),
                ))
            }
        };
        match p {
            "=" => {
                let (value, vty) = self.expr()?;
                Self::check_assignable(&op_tok, tty, vty)?;
                Ok(Statement::Assign {
                    target,
                    op: None,
                    value,
                })
            }
            "++" | "--" => Ok(Statement::Assign {
                target,
                op: Some(if p == "++" {
                    BinaryOp::Add
                } else {
                    BinaryOp::Sub
                }),
                value: Expr::Int(1),
            }),
            _ => match Self::compound_op(p) {
                Some(op) => {
                    let (value, vty) = self.expr()?;
                    let result = Self::binary_type(&op_tok, op, tty, vty)?;
                    Self::check_assignable(&op_tok, tty, result)?;
                    Ok(Statement::Assign {
                        target,
                        op: Some(op),
                        value,
                    })
                }
                None => Err(Self::err_at(
                    &op_tok,
                    ParseErrorKind::Syntax(format!("expected assignment, found `{p}`")),
                )),
            },
        }
    }

    fn expect_loop_var(&mut self, var: VarId) -> PResult<()> {
        let t = self.advance();
        let v = self.resolve(&t)?;
        if v != var {
            return Err(Self::err_at(
                &t,
                ParseErrorKind::Syntax(format!(
                    "for-loop header must use loop variable `{}` consistently",
                    self.prog.decl(var).name
                )),
            ));
        }
        Ok(())
    }

    fn for_loop(&mut self) -> PResult<Statement> {
        self.advance();
        self.expect_punct("(")?;
        if self.at_type_keyword() {
            return Err(self.err_here(ParseErrorKind::Unsupported(
                "declaration in for-loop header (declare at top level)".into(),
            )));
        }
        let var_tok = self.advance();
        let var = self.resolve(&var_tok)?;
        let decl = self.prog.decl(var);
        if decl.is_array() || decl.ty != ScalarType::Int {
            return Err(Self::err_at(
                &var_tok,
                ParseErrorKind::Type("loop variable must be an integer scalar".into()),
            ));
        }
        self.expect_punct("=")?;
        let init_tok = self.peek().clone();
        let (init, ity) = self.expr()?;
        Self::check_assignable(&init_tok, ScalarType::Int, ity)?;
        self.expect_punct(";")?;

        // Condition: `var cmp bound` or `bound cmp var`.
        let cond_tok = self.peek().clone();
        let (cmp, bound) = if matches!(&cond_tok.tok, Tok::Ident(_))
            && self.resolve(&cond_tok).ok() == Some(var)
            && matches!(self.peek_at(1), Tok::Punct(p) if ["<", "<=", ">", ">=", "==", "!="].contains(p))
        {
            self.advance();
            let cmp = self.comparison_op()?;
            let (bound, bty) = self.shift_expr()?;
            Self::int_only(&cond_tok, bty, "loop bound")?;
            (cmp, bound)
        } else {
            let (bound, bty) = self.shift_expr()?;
            Self::int_only(&cond_tok, bty, "loop bound")?;
            let cmp = self.comparison_op()?;
            self.expect_loop_var(var)?;
            let flipped = match cmp {
                BinaryOp::Lt => BinaryOp::Gt,
                BinaryOp::Le => BinaryOp::Ge,
                BinaryOp::Gt => BinaryOp::Lt,
                BinaryOp::Ge => BinaryOp::Le,
                other => other,
            };
            (flipped, bound)
        };
        self.expect_punct(";")?;

        let step = self.for_step(var)?;
        self.expect_punct(")")?;
        let body = self.body()?;
        Ok(Statement::For(ForLoop {
            var,
            init,
            cmp,
            bound,
            step,
            body,
        }))
    }

    fn comparison_op(&mut self) -> PResult<BinaryOp> {
        let t = self.advance();
        Ok(match t.tok {
            Tok::Punct("<") => BinaryOp::Lt,
            Tok::Punct("<=") => BinaryOp::Le,
            Tok::Punct(">") => BinaryOp::Gt,
            Tok::Punct(">=") => BinaryOp::Ge,
            Tok::Punct("==") => BinaryOp::Eq,
            Tok::Punct("!=") => BinaryOp::Ne,
            ref other => {
                return Err(Self::err_at(
                    &t,
                    ParseErrorKind::Syntax(format!(
                        "for-loop condition must compare the loop variable, found {}",
                        Self::describe(other)
                    )),
                ))
            }
        })
    }

    fn int_only(at: &Token, ty: ScalarType, what: &str) -> PResult<()> {
        if ty == ScalarType::Int {
            Ok(())
        } else {
            Err(Self::err_at(
                at,
                ParseErrorKind::Type(format!("{what} must be an integer")),
            ))
        }
    }

    fn for_step(&mut self, var: VarId) -> PResult<Step> {
        let unsupported = |t: &Token| {
            Self::err_at(
                t,
                ParseErrorKind::Unsupported(
                    "for-loop step (use v++, v--, v += e, v -= e, v = v + e or v = v - e)".into(),
                ),
            )
        };
        if self.is_punct("++") || self.is_punct("--") {
            let t = self.advance();
            self.expect_loop_var(var)?;
            let op = if t.tok == Tok::Punct("++") {
                BinaryOp::Add
            } else {
                BinaryOp::Sub
            };
            return Ok(Step {
                op,
                amount: Expr::Int(1),
            });
        }
        self.expect_loop_var(var)?;
        let t = self.advance();
        match t.tok {
            Tok::Punct("++") => Ok(Step {
                op: BinaryOp::Add,
                amount: Expr::Int(1),
            }),
            Tok::Punct("--") => Ok(Step {
                op: BinaryOp::Sub,
                amount: Expr::Int(1),
            }),
            Tok::Punct(p @ ("+=" | "-=")) => {
                let at = self.peek().clone();
                let (amount, ty) = self.expr()?;
                Self::int_only(&at, ty, "loop step")?;
                let op = if p == "+=" {
                    BinaryOp::Add
                } else {
                    BinaryOp::Sub
                };
                Ok(Step { op, amount })
            }
            Tok::Punct("=") => {
                let at = self.peek().clone();
                let (e, ty) = self.expr()?;
                Self::int_only(&at, ty, "loop step")?;
                match e {
                    Expr::Binary {
                        op: op @ (BinaryOp::Add | BinaryOp::Sub),
                        lhs,
                        rhs,
                    } if *lhs == Expr::Scalar(var) && !rhs.reads_scalar(var) => {
                        Ok(Step { op, amount: *rhs })
                    }
                    Expr::Binary {
                        op: BinaryOp::Add,
                        lhs,
                        rhs,
                    } if *rhs == Expr::Scalar(var) && !lhs.reads_scalar(var) => Ok(Step {
                        op: BinaryOp::Add,
                        amount: *lhs,
                    }),
                    _ => Err(unsupported(&at)),
                }
            }
            _ => Err(unsupported(&t)),
        }
    }

    fn if_statement(&mut self) -> PResult<Statement> {
        self.advance();
        self.expect_punct("(")?;
        let cond_tok = self.peek().clone();
        let (cond, _) = self.expr()?;
        let ok = match &cond {
            Expr::Binary { op, .. } => op.is_comparison() || op.is_logic(),
            Expr::Unary {
                op: UnaryOp::Not, ..
            } => true,
            _ => false,
        };
        if !ok {
            return Err(Self::err_at(
                &cond_tok,
                ParseErrorKind::Type(
                    "if condition must be a comparison or logic expression".into(),
                ),
            ));
        }
        self.expect_punct(")")?;
        let then_branch = self.body()?;
        let else_branch = if self.is_keyword("else") {
            self.advance();
            self.body()?
        } else {
            vec![]
        };
        Ok(Statement::If {
            cond,
            then_branch,
            else_branch,
        })
    }

    // Expressions, lowest precedence first.

    fn expr(&mut self) -> PResult<(Expr, ScalarType)> {
        let e = self.binary_level(0)?;
        if self.is_punct("?") {
            return Err(self.err_here(ParseErrorKind::Unsupported("conditional operator".into())));
        }
        if self.is_punct("=") || Self::compound_op_at(self) {
            return Err(self.err_here(ParseErrorKind::Unsupported(
                "assignment inside an expression".into(),
            )));
        }
        Ok(e)
    }

    fn compound_op_at(&self) -> bool {
        matches!(&self.peek().tok, Tok::Punct(p) if Self::compound_op(p).is_some())
    }

    fn shift_expr(&mut self) -> PResult<(Expr, ScalarType)> {
        // Level of `<<`/`>>` in LEVELS, i.e. everything binding tighter than
        // comparisons.
        self.binary_level(7)
    }

    fn binary_type(at: &Token, op: BinaryOp, l: ScalarType, r: ScalarType) -> PResult<ScalarType> {
        if op.is_int_only() && (l == ScalarType::Float || r == ScalarType::Float) {
            return Err(Self::err_at(
                at,
                ParseErrorKind::Type(format!(
                    "operator `{}` requires integer operands",
                    op.symbol()
                )),
            ));
        }
        Ok(if op.is_comparison() || op.is_logic() {
            ScalarType::Int
        } else if l == ScalarType::Float || r == ScalarType::Float {
            ScalarType::Float
        } else {
            ScalarType::Int
        })
    }

    fn binary_level(&mut self, level: usize) -> PResult<(Expr, ScalarType)> {
        const LEVELS: [&[(&str, BinaryOp)]; 10] = [
            &[("||", BinaryOp::Or)],
            &[("&&", BinaryOp::And)],
            &[("|", BinaryOp::BitOr)],
            &[("^", BinaryOp::BitXor)],
            &[("&", BinaryOp::BitAnd)],
            &[("==", BinaryOp::Eq), ("!=", BinaryOp::Ne)],
            &[
                ("<", BinaryOp::Lt),
                ("<=", BinaryOp::Le),
                (">", BinaryOp::Gt),
                (">=", BinaryOp::Ge),
            ],
            &[("<<", BinaryOp::Shl), (">>", BinaryOp::Shr)],
            &[("+", BinaryOp::Add), ("-", BinaryOp::Sub)],
            &[
                ("*", BinaryOp::Mul),
                ("/", BinaryOp::Div),
                ("%", BinaryOp::Rem),
            ],
        ];
        if level == LEVELS.len() {
            return self.unary();
        }
        let (mut lhs, mut lty) = self.binary_level(level + 1)?;
        loop {
            let found = match &self.peek().tok {
                Tok::Punct(p) => LEVELS[level]
                    .iter()
                    .find(|(s, _)| s == p)
                    .map(|(_, op)| *op),
                _ => None,
            };
            let Some(op) = found else { break };
            let op_tok = self.advance();
            let (rhs, rty) = self.binary_level(level + 1)?;
            lty = Self::binary_type(&op_tok, op, lty, rty)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
        Ok((lhs, lty))
    }

    fn unary(&mut self) -> PResult<(Expr, ScalarType)> {
        let t = self.peek().clone();
        let op = match t.tok {
            Tok::Punct("-") => Some(UnaryOp::Neg),
            Tok::Punct("!") => Some(UnaryOp::Not),
            Tok::Punct("~") => Some(UnaryOp::BitNot),
            Tok::Punct("+") => {
                self.advance();
                return self.unary();
            }
            Tok::Punct("*") | Tok::Punct("&") => {
                return Err(Self::err_at(
                    &t,
                    ParseErrorKind::Unsupported("pointer".into()),
                ))
            }
            Tok::Punct("++") | Tok::Punct("--") => {
                return Err(Self::err_at(
                    &t,
                    ParseErrorKind::Unsupported("increment inside an expression".into()),
                ))
            }
            _ => None,
        };
        let Some(op) = op else {
            return self.postfix();
        };
        self.advance();
        // Fold negative literals so `-5` is a constant, not an operation.
        if op == UnaryOp::Neg {
            match self.peek().tok {
                Tok::Int(v) => {
                    self.advance();
                    return Ok((Expr::Int(v.wrapping_neg()), ScalarType::Int));
                }
                Tok::Float(v) => {
                    self.advance();
                    return Ok((Expr::Float(-v), ScalarType::Float));
                }
                _ => {}
            }
        }
        let (operand, ty) = self.unary()?;
        let ty = match op {
            UnaryOp::Neg => ty,
            UnaryOp::Not => ScalarType::Int,
            UnaryOp::BitNot => {
                Self::int_only(&t, ty, "operand of `~`")?;
                ScalarType::Int
            }
        };
        Ok((
            Expr::Unary {
                op,
                operand: Box::new(operand),
            },
            ty,
        ))
    }

    fn postfix(&mut self) -> PResult<(Expr, ScalarType)> {
        let e = self.primary()?;
        if self.is_punct("++") || self.is_punct("--") {
            return Err(self.err_here(ParseErrorKind::Unsupported(
                "increment inside an expression".into(),
            )));
        }
        if self.is_punct(".") || self.is_punct("->") {
            return Err(self.err_here(ParseErrorKind::Unsupported("struct member access".into())));
        }
        Ok(e)
    }

    fn primary(&mut self) -> PResult<(Expr, ScalarType)> {
        let t = self.advance();
        match &t.tok {
            Tok::Int(v) => Ok((Expr::Int(*v), ScalarType::Int)),
            Tok::Float(v) => Ok((Expr::Float(*v), ScalarType::Float)),
            Tok::Quoted => Err(Self::err_at(
                &t,
                ParseErrorKind::Unsupported("string literal".into()),
            )),
            Tok::Punct("(") => {
                let e = self.expr()?;
                self.expect_punct(")")?;
                Ok(e)
            }
            Tok::Ident(name) => {
                if UNSUPPORTED_KEYWORDS.contains(&name.as_str()) {
                    return Err(Self::err_at(
                        &t,
                        ParseErrorKind::Unsupported(format!("`{name}`")),
                    ));
                }
                if self.is_punct("(") {
                    return Err(Self::err_at(
                        &t,
                        ParseErrorKind::Unsupported(format!("function call `{name}(...)`")),
                    ));
                }
                let var = self.resolve(&t)?;
                let indices = self.indices(&t, var)?;
                let ty = self.prog.decl(var).ty;
                if indices.is_empty() {
                    Ok((Expr::Scalar(var), ty))
                } else {
                    Ok((
                        Expr::Element {
                            array: var,
                            indices,
                        },
                        ty,
                    ))
                }
            }
            other => Err(Self::err_at(
                &t,
                ParseErrorKind::Syntax(format!(
                    "expected expression, found {}",
                    Self::describe(other)
                )),
            )),
        }
    }
}
