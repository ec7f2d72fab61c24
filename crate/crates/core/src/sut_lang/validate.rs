use std::collections::HashSet;
use std::fmt;

use super::{BranchId, Cond, Expr, Program, Stmt, StmtId, VarId};

/// A broken validity rule.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// A loop whose condition has this id sits inside another loop's body.
    NestedLoop {
        branch: BranchId,
    },
    /// A variable read before it is declared: an input beyond the arity, or a
    /// local with no earlier assignment in program order.
    UndeclaredVariable {
        var: VarId,
        context: String,
    },
    DuplicateStmtId(StmtId),
    DuplicateBranchId(BranchId),
    /// Ids are not the dense pre-order sequence `0, 1, 2, ...`.
    StmtIdOutOfOrder {
        found: StmtId,
        expected: StmtId,
    },
    BranchIdOutOfOrder {
        found: BranchId,
        expected: BranchId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NestedLoop { branch } => write!(f, "nested loop at branchId={branch}"),
            Violation::UndeclaredVariable { var, context } => {
                write!(f, "undeclared variable `{var}` in {context}")
            }
            Violation::DuplicateStmtId(id) => write!(f, "duplicate stmtId={id}"),
            Violation::DuplicateBranchId(id) => write!(f, "duplicate branchId={id}"),
            Violation::StmtIdOutOfOrder { found, expected } => {
                write!(f, "stmtId={found} out of pre-order (expected {expected})")
            }
            Violation::BranchIdOutOfOrder { found, expected } => {
                write!(f, "branchId={found} out of pre-order (expected {expected})")
            }
        }
    }
}

/// Returns every violation in `program`; the program is valid iff the list is empty.
///
/// Locals are declared by their first assignment in program (pre-)order, so a
/// local assigned inside an `if` block may be read after the `if`. Reads of a
/// local that was declared but not assigned on the executed path see zero.
pub fn validate(program: &Program) -> Vec<Violation> {
    let mut v = Validator {
        arity: program.input_arity(),
        declared: HashSet::new(),
        stmt_ids: HashSet::new(),
        branch_ids: HashSet::new(),
        next_stmt: 0,
        next_branch: 0,
        out: Vec::new(),
    };
    v.block(program.body(), false);
    v.out
}

struct Validator {
    arity: u32,
    declared: HashSet<u32>,
    stmt_ids: HashSet<StmtId>,
    branch_ids: HashSet<BranchId>,
    next_stmt: u32,
    next_branch: u32,
    out: Vec<Violation>,
}

impl Validator {
    fn block(&mut self, stmts: &[Stmt], in_loop: bool) {
        for s in stmts {
            self.stmt(s, in_loop);
        }
    }

    fn stmt(&mut self, s: &Stmt, in_loop: bool) {
        match s {
            Stmt::Assign { target, value, id } => {
                self.stmt_id(*id);
                self.reads(value, &format!("stmtId={id}"));
                match target {
                    VarId::Local(i) => {
                        self.declared.insert(*i);
                    }
                    VarId::Input(i) if *i >= self.arity => {
                        self.out.push(Violation::UndeclaredVariable {
                            var: *target,
                            context: format!("stmtId={id}"),
                        });
                    }
                    VarId::Input(_) => {}
                }
            }
            Stmt::If {
                cond,
                then_block,
                else_block,
            } => {
                self.cond(cond);
                self.block(then_block, in_loop);
                if let Some(e) = else_block {
                    self.block(e, in_loop);
                }
            }
            Stmt::Loop { cond, body } => {
                if in_loop {
                    self.out.push(Violation::NestedLoop { branch: cond.id });
                }
                self.cond(cond);
                self.block(body, true);
            }
        }
    }

    fn cond(&mut self, c: &Cond) {
        if !self.branch_ids.insert(c.id) {
            self.out.push(Violation::DuplicateBranchId(c.id));
        } else if c.id.0 != self.next_branch {
            self.out.push(Violation::BranchIdOutOfOrder {
                found: c.id,
                expected: BranchId(self.next_branch),
            });
        }
        self.next_branch += 1;
        let ctx = format!("branchId={}", c.id);
        self.reads(&c.left, &ctx);
        self.reads(&c.right, &ctx);
    }

    fn stmt_id(&mut self, id: StmtId) {
        if !self.stmt_ids.insert(id) {
            self.out.push(Violation::DuplicateStmtId(id));
        } else if id.0 != self.next_stmt {
            self.out.push(Violation::StmtIdOutOfOrder {
                found: id,
                expected: StmtId(self.next_stmt),
            });
        }
        self.next_stmt += 1;
    }

    fn reads(&mut self, e: &Expr, context: &str) {
        let mut bad = Vec::new();
        e.for_each_var(&mut |v| {
            let ok = match v {
                VarId::Input(i) => i < self.arity,
                VarId::Local(i) => self.declared.contains(&i),
            };
            if !ok {
                bad.push(v);
            }
        });
        for var in bad {
            self.out.push(Violation::UndeclaredVariable {
                var,
                context: context.to_string(),
            });
        }
    }
}
