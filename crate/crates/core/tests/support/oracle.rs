//! Random small programs and a reference evaluator written from the
//! language semantics, independent of the instrumenting interpreter.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use sbstlab::sut_lang::{validate, BinOp, Cond, Expr, Program, RelOp, Stmt, VarId};

pub struct GenParams {
    pub arity: u32,
    pub max_conditions: usize,
    pub max_literal: i64,
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    p: &'r GenParams,
    declared: Vec<u32>,
    next_local: u32,
    conditions: usize,
}

impl<R: Rng> Gen<'_, R> {
    fn var(&mut self) -> VarId {
        if !self.declared.is_empty() && self.rng.gen_bool(0.4) {
            VarId::Local(self.declared[self.rng.gen_range(0..self.declared.len())])
        } else {
            VarId::Input(self.rng.gen_range(0..self.p.arity))
        }
    }

    fn expr(&mut self, depth: u32) -> Expr {
        match self.rng.gen_range(0..if depth == 0 { 2 } else { 3 }) {
            0 => Expr::var(self.var()),
            1 => Expr::Const(self.rng.gen_range(-self.p.max_literal..=self.p.max_literal)),
            _ => {
                let op = [BinOp::Add, BinOp::Sub, BinOp::Mul][self.rng.gen_range(0..3)];
                Expr::bin(op, self.expr(depth - 1), self.expr(depth - 1))
            }
        }
    }

    fn cond(&mut self) -> Cond {
        self.conditions += 1;
        let rel = RelOp::ALL[self.rng.gen_range(0..6)];
        Cond::new(self.expr(1), rel, self.expr(1))
    }

    fn assign(&mut self) -> Stmt {
        let value = self.expr(2);
        let target = if !self.declared.is_empty() && self.rng.gen_bool(0.3) {
            self.declared[self.rng.gen_range(0..self.declared.len())]
        } else {
            self.next_local += 1;
            self.next_local - 1
        };
        let s = Stmt::assign(VarId::Local(target), value);
        if !self.declared.contains(&target) {
            self.declared.push(target);
        }
        s
    }

    fn block(&mut self, in_loop: bool, len: usize) -> Vec<Stmt> {
        let mut out = Vec::new();
        for _ in 0..len {
            let room = self.conditions < self.p.max_conditions;
            let s = match self.rng.gen_range(0..5) {
                0 | 1 => self.assign(),
                2 if room => {
                    let c = self.cond();
                    let then_len = self.rng.gen_range(0..3);
                    Stmt::if_then(c, self.block(in_loop, then_len))
                }
                3 if room => {
                    let c = self.cond();
                    let (a, b) = (self.rng.gen_range(0..3), self.rng.gen_range(0..3));
                    Stmt::if_else(c, self.block(in_loop, a), self.block(in_loop, b))
                }
                4 if room && !in_loop => {
                    let c = self.cond();
                    let body_len = self.rng.gen_range(1..4);
                    Stmt::looping(c, self.block(true, body_len))
                }
                _ => self.assign(),
            };
            out.push(s);
        }
        out
    }
}

/// A valid program with at most `max_conditions` conditions.
pub fn random_program(rng: &mut impl Rng, p: &GenParams) -> Program {
    loop {
        let mut g = Gen {
            rng: &mut *rng,
            p,
            declared: Vec::new(),
            next_local: 0,
            conditions: 0,
        };
        let len = g.rng.gen_range(1..6);
        let body = g.block(false, len);
        let program = Program::new("oracle", p.arity, body);
        if validate(&program).is_empty() {
            return program;
        }
    }
}

/// What one execution touched, by statement and branch id.
#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct Touched {
    pub stmts: BTreeSet<u32>,
    pub outcomes: BTreeSet<(u32, bool)>,
}

pub const LOOP_CAP: u32 = 1000;

struct Halt;

struct Ref<'a> {
    inputs: Vec<i64>,
    locals: Vec<i64>,
    out: &'a mut Touched,
}

impl Ref<'_> {
    fn get(&self, v: VarId) -> i64 {
        match v {
            VarId::Input(i) => self.inputs[i as usize],
            VarId::Local(i) => self.locals.get(i as usize).copied().unwrap_or(0),
        }
    }

    fn set(&mut self, v: VarId, x: i64) {
        match v {
            VarId::Input(i) => self.inputs[i as usize] = x,
            VarId::Local(i) => {
                let i = i as usize;
                if self.locals.len() <= i {
                    self.locals.resize(i + 1, 0);
                }
                self.locals[i] = x;
            }
        }
    }

    fn eval(&self, e: &Expr) -> Result<i64, Halt> {
        Ok(match e {
            Expr::Const(n) => *n,
            Expr::Var(v) => self.get(*v),
            Expr::Bin(op, a, b) => {
                let (a, b) = (self.eval(a)?, self.eval(b)?);
                match op {
                    BinOp::Add => a.checked_add(b),
                    BinOp::Sub => a.checked_sub(b),
                    BinOp::Mul => a.checked_mul(b),
                }
                .ok_or(Halt)?
            }
        })
    }

    fn test(&mut self, c: &Cond) -> Result<bool, Halt> {
        let (l, r) = (self.eval(&c.left)?, self.eval(&c.right)?);
        let taken = match c.rel {
            RelOp::Lt => l < r,
            RelOp::Le => l <= r,
            RelOp::Gt => l > r,
            RelOp::Ge => l >= r,
            RelOp::Eq => l == r,
            RelOp::Ne => l != r,
        };
        self.out.outcomes.insert((c.id.0, taken));
        Ok(taken)
    }

    fn run(&mut self, block: &[Stmt]) -> Result<(), Halt> {
        for s in block {
            match s {
                Stmt::Assign { target, value, id } => {
                    self.out.stmts.insert(id.0);
                    let v = self.eval(value)?;
                    self.set(*target, v);
                }
                Stmt::If {
                    cond,
                    then_block,
                    else_block,
                } => {
                    if self.test(cond)? {
                        self.run(then_block)?;
                    } else if let Some(e) = else_block {
                        self.run(e)?;
                    }
                }
                Stmt::Loop { cond, body } => {
                    let mut n = 0;
                    while n < LOOP_CAP {
                        if !self.test(cond)? {
                            break;
                        }
                        self.run(body)?;
                        n += 1;
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs `program` on `inputs`; returns what was touched and whether it
/// stopped on an arithmetic overflow.
pub fn reference_run(program: &Program, inputs: &[i64]) -> (Touched, bool) {
    let mut out = Touched::default();
    let halted = Ref {
        inputs: inputs.to_vec(),
        locals: Vec::new(),
        out: &mut out,
    }
    .run(program.body())
    .is_err();
    (out, halted)
}

/// Every input vector of length `k` over `lo..=hi`.
pub fn all_inputs(k: u32, lo: i64, hi: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (lo..=hi).map(move |v| {
                    let mut p = prefix.clone();
                    p.push(v);
                    p
                })
            })
            .collect();
    }
    out
}
