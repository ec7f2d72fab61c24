//! The mini imperative language every generated SUT is written in.
//!
//! Programs take `k` integer inputs `x0..x{k-1}`, assign integer locals
//! `v0, v1, ...`, and branch through `if`/`else` and (non-nested) `loop`
//! statements. Arithmetic is limited to `+`, `-` and `*` over `i64`; there is
//! no division anywhere in the language.
//!
//! Statements (assignments) and branches (conditions of `if` and `loop`)
//! carry dense identifiers assigned in pre-order, which the interpreter uses
//! to index its coverage tables.

mod render;
mod syntax;
mod validate;

use std::fmt;

pub use render::render;
pub use syntax::{parse, parse_tokens, Token};
pub use validate::{validate, Violation};

/// Error raised while reading program text.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SutError {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("invalid program: {}", join_violations(.0))]
    Invalid(Vec<Violation>),
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A variable: either an input parameter or a local.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarId {
    Input(u32),
    Local(u32),
}

impl fmt::Display for VarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarId::Input(i) => write!(f, "x{i}"),
            VarId::Local(i) => write!(f, "v{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
}

impl BinOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
        }
    }

    /// Checked application; `None` on 64-bit overflow.
    pub fn apply(self, a: i64, b: i64) -> Option<i64> {
        match self {
            BinOp::Add => a.checked_add(b),
            BinOp::Sub => a.checked_sub(b),
            BinOp::Mul => a.checked_mul(b),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expr {
    Const(i64),
    Var(VarId),
    Bin(BinOp, Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn var(v: VarId) -> Self {
        Expr::Var(v)
    }

    pub fn bin(op: BinOp, left: Expr, right: Expr) -> Self {
        Expr::Bin(op, Box::new(left), Box::new(right))
    }

    /// Calls `f` on every variable read by this expression, left to right.
    pub fn for_each_var(&self, f: &mut impl FnMut(VarId)) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => f(*v),
            Expr::Bin(_, l, r) => {
                l.for_each_var(f);
                r.for_each_var(f);
            }
        }
    }
}

/// Relational operator of a condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RelOp {
    Lt,
    Le,
    Gt,
    Ge,
    Eq,
    Ne,
}

impl RelOp {
    pub const ALL: [RelOp; 6] = [
        RelOp::Lt,
        RelOp::Le,
        RelOp::Gt,
        RelOp::Ge,
        RelOp::Eq,
        RelOp::Ne,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
            RelOp::Eq => "==",
            RelOp::Ne => "!=",
        }
    }

    pub fn holds(self, a: i64, b: i64) -> bool {
        match self {
            RelOp::Lt => a < b,
            RelOp::Le => a <= b,
            RelOp::Gt => a > b,
            RelOp::Ge => a >= b,
            RelOp::Eq => a == b,
            RelOp::Ne => a != b,
        }
    }

    /// The relation that holds exactly when `self` does not.
    pub fn negate(self) -> RelOp {
        match self {
            RelOp::Lt => RelOp::Ge,
            RelOp::Le => RelOp::Gt,
            RelOp::Gt => RelOp::Le,
            RelOp::Ge => RelOp::Lt,
            RelOp::Eq => RelOp::Ne,
            RelOp::Ne => RelOp::Eq,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StmtId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BranchId(pub u32);

impl fmt::Display for StmtId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for BranchId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Cond {
    pub left: Expr,
    pub rel: RelOp,
    pub right: Expr,
    pub id: BranchId,
}

impl Cond {
    /// Condition with a placeholder id; ids are assigned by [`Program::new`].
    pub fn new(left: Expr, rel: RelOp, right: Expr) -> Self {
        Cond {
            left,
            rel,
            right,
            id: BranchId(0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Stmt {
    Assign {
        target: VarId,
        value: Expr,
        id: StmtId,
    },
    If {
        cond: Cond,
        then_block: Vec<Stmt>,
        else_block: Option<Vec<Stmt>>,
    },
    Loop {
        cond: Cond,
        body: Vec<Stmt>,
    },
}

impl Stmt {
    pub fn assign(target: VarId, value: Expr) -> Self {
        Stmt::Assign {
            target,
            value,
            id: StmtId(0),
        }
    }

    pub fn if_then(cond: Cond, then_block: Vec<Stmt>) -> Self {
        Stmt::If {
            cond,
            then_block,
            else_block: None,
        }
    }

    pub fn if_else(cond: Cond, then_block: Vec<Stmt>, else_block: Vec<Stmt>) -> Self {
        Stmt::If {
            cond,
            then_block,
            else_block: Some(else_block),
        }
    }

    pub fn looping(cond: Cond, body: Vec<Stmt>) -> Self {
        Stmt::Loop { cond, body }
    }
}

/// Structural size of a program.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct Metrics {
    /// Number of assignment nodes.
    pub statements: usize,
    /// Number of conditions (`if` plus `loop`).
    pub branches: usize,
    pub loops: usize,
}

impl std::ops::Add for Metrics {
    type Output = Metrics;

    fn add(self, o: Metrics) -> Metrics {
        Metrics {
            statements: self.statements + o.statements,
            branches: self.branches + o.branches,
            loops: self.loops + o.loops,
        }
    }
}

/// Counts assignments, conditions and loops in a statement list.
pub fn compute_metrics(block: &[Stmt]) -> Metrics {
    block
        .iter()
        .map(stmt_metrics)
        .fold(Metrics::default(), |a, b| a + b)
}

fn stmt_metrics(s: &Stmt) -> Metrics {
    match s {
        Stmt::Assign { .. } => Metrics {
            statements: 1,
            ..Metrics::default()
        },
        Stmt::If {
            then_block,
            else_block,
            ..
        } => {
            let inner = compute_metrics(then_block)
                + else_block
                    .as_deref()
                    .map(compute_metrics)
                    .unwrap_or_default();
            inner
                + Metrics {
                    branches: 1,
                    ..Metrics::default()
                }
        }
        Stmt::Loop { body, .. } => {
            compute_metrics(body)
                + Metrics {
                    branches: 1,
                    loops: 1,
                    ..Metrics::default()
                }
        }
    }
}

/// A complete SUT: name, input arity and body.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    name: String,
    input_arity: u32,
    body: Vec<Stmt>,
    metrics: Metrics,
    local_slots: u32,
}

impl Program {
    /// Builds a program and (re)assigns statement and branch ids in pre-order.
    pub fn new(name: impl Into<String>, input_arity: u32, mut body: Vec<Stmt>) -> Self {
        let mut next = (0u32, 0u32);
        renumber(&mut body, &mut next);
        Self::with_ids(name, input_arity, body)
    }

    /// Builds a program keeping the ids already present in `body`.
    ///
    /// Such a program may violate the id invariants; check with [`validate`].
    pub fn with_ids(name: impl Into<String>, input_arity: u32, body: Vec<Stmt>) -> Self {
        let metrics = compute_metrics(&body);
        let mut max_local = None::<u32>;
        visit_vars(&body, &mut |v| {
            if let VarId::Local(i) = v {
                max_local = Some(max_local.map_or(i, |m| m.max(i)));
            }
        });
        Program {
            name: name.into(),
            input_arity,
            body,
            metrics,
            local_slots: max_local.map_or(0, |m| m + 1),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn input_arity(&self) -> u32 {
        self.input_arity
    }

    pub fn body(&self) -> &[Stmt] {
        &self.body
    }

    pub fn metrics(&self) -> Metrics {
        self.metrics
    }

    /// Size of the local-variable frame (`1 + highest local index`).
    pub fn local_slots(&self) -> u32 {
        self.local_slots
    }

    pub fn into_body(self) -> Vec<Stmt> {
        self.body
    }
}

fn renumber(block: &mut [Stmt], next: &mut (u32, u32)) {
    for s in block {
        match s {
            Stmt::Assign { id, .. } => {
                *id = StmtId(next.0);
                next.0 += 1;
            }
            Stmt::If {
                cond,
                then_block,
                else_block,
            } => {
                cond.id = BranchId(next.1);
                next.1 += 1;
                renumber(then_block, next);
                if let Some(e) = else_block {
                    renumber(e, next);
                }
            }
            Stmt::Loop { cond, body } => {
                cond.id = BranchId(next.1);
                next.1 += 1;
                renumber(body, next);
            }
        }
    }
}

fn visit_vars(block: &[Stmt], f: &mut impl FnMut(VarId)) {
    for s in block {
        match s {
            Stmt::Assign { target, value, .. } => {
                f(*target);
                value.for_each_var(f);
            }
            Stmt::If {
                cond,
                then_block,
                else_block,
            } => {
                cond.left.for_each_var(f);
                cond.right.for_each_var(f);
                visit_vars(then_block, f);
                if let Some(e) = else_block {
                    visit_vars(e, f);
                }
            }
            Stmt::Loop { cond, body } => {
                cond.left.for_each_var(f);
                cond.right.for_each_var(f);
                visit_vars(body, f);
            }
        }
    }
}
