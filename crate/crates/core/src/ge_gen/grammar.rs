use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::sut_lang::{RelOp, Token, VarId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum NonTerminal {
    Program,
    TopList,
    TopStmt,
    /// Block, statement and conditionals at `if` nesting depth `1..=max`.
    Block(u8),
    InnerStmt(u8),
    LoopBody,
    Assign,
    If(u8),
    IfElse(u8),
    Loop,
    LoopBound,
    Cond,
    CondLhs,
    CondRhs,
    Rel,
    Op,
    Var,
    Target,
    /// Expression at nesting depth `1..=max`; the deepest level has no operators.
    Expr(u8),
}

impl fmt::Display for NonTerminal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            NonTerminal::Program => "program",
            NonTerminal::TopList => "top-list",
            NonTerminal::TopStmt => "top-stmt",
            NonTerminal::Block(d) => return write!(f, "<block{d}>"),
            NonTerminal::InnerStmt(d) => return write!(f, "<inner-stmt{d}>"),
            NonTerminal::LoopBody => "loop-body",
            NonTerminal::Assign => "assign",
            NonTerminal::If(d) => return write!(f, "<if{d}>"),
            NonTerminal::IfElse(d) => return write!(f, "<if-else{d}>"),
            NonTerminal::Loop => "loop",
            NonTerminal::LoopBound => "loop-bound",
            NonTerminal::Cond => "cond",
            NonTerminal::CondLhs => "cond-lhs",
            NonTerminal::CondRhs => "cond-rhs",
            NonTerminal::Rel => "rel",
            NonTerminal::Op => "op",
            NonTerminal::Var => "var",
            NonTerminal::Target => "target",
            NonTerminal::Expr(d) => return write!(f, "<expr{d}>"),
        };
        write!(f, "<{s}>")
    }
}

/// Grammar symbol.
///
/// Besides ordinary terminals and nonterminals, a few context-sensitive
/// terminals resolve against the mapper's variable scope. Those marked as
/// choices consume one codon each; the loop-counter markers consume none.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Symbol {
    N(NonTerminal),
    T(Token),
    /// Choice: one of the inputs `x0..x{k-1}`.
    InputVar,
    /// Choice: an input other than the last one emitted.
    OtherInput,
    /// Choice: one of the locals declared so far (falls back to an input).
    LocalVar,
    /// Choice: a not-yet-used local as assignment target.
    FreshLocal,
    /// Choice: a declared local other than an active loop counter
    /// (falls back to a fresh local).
    ExistingLocal,
    /// Declares the pending assignment target once its value is complete.
    Commit,
    /// Choice: integer literal `codon - 128`.
    Literal,
    /// Allocates a fresh loop counter, declares it, and emits it.
    OpenCounter,
    /// Emits the innermost active loop counter.
    Counter,
    CloseCounter,
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::N(n) => write!(f, "{n}"),
            Symbol::T(t) => write!(f, "\"{}\"", token_text(t)),
            Symbol::InputVar => f.write_str("INPUT"),
            Symbol::OtherInput => f.write_str("OTHER-INPUT"),
            Symbol::LocalVar => f.write_str("LOCAL"),
            Symbol::FreshLocal => f.write_str("FRESH"),
            Symbol::ExistingLocal => f.write_str("EXISTING"),
            Symbol::Commit => f.write_str("COMMIT"),
            Symbol::Literal => f.write_str("LITERAL"),
            Symbol::OpenCounter => f.write_str("COUNTER+"),
            Symbol::Counter => f.write_str("COUNTER"),
            Symbol::CloseCounter => f.write_str("COUNTER-"),
        }
    }
}

pub(crate) fn token_text(t: &Token) -> String {
    match t {
        Token::Program => "program".into(),
        Token::If => "if".into(),
        Token::Else => "else".into(),
        Token::Loop => "loop".into(),
        Token::LParen => "(".into(),
        Token::RParen => ")".into(),
        Token::LBrace => "{".into(),
        Token::RBrace => "}".into(),
        Token::Comma => ",".into(),
        Token::Semi => ";".into(),
        Token::Assign => "=".into(),
        Token::Plus => "+".into(),
        Token::Minus => "-".into(),
        Token::Star => "*".into(),
        Token::Rel(r) => r.symbol().into(),
        Token::Int(n) => n.to_string(),
        Token::Var(v) => v.to_string(),
        Token::Ident(s) => s.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Production(pub Vec<Symbol>);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrammarError {
    #[error("nonterminal {0} is referenced but has no rule")]
    Undefined(NonTerminal),
    #[error("nonterminal {0} has no productions")]
    Empty(NonTerminal),
    #[error("{0} can derive a loop, which would nest loops")]
    LoopInLoopBody(NonTerminal),
    #[error("production of {0} contains a division")]
    Division(NonTerminal),
}

/// Knobs of the built-in grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GrammarParams {
    pub input_arity: u32,
    /// Maximum expression nesting depth (at least 1).
    pub expr_depth: u8,
    /// Maximum `if` nesting depth (at least 1).
    pub max_nesting: u8,
}

impl Default for GrammarParams {
    fn default() -> Self {
        GrammarParams {
            input_arity: 5,
            expr_depth: 4,
            max_nesting: 3,
        }
    }
}

/// A BNF grammar: ordered productions per nonterminal and a start symbol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrammarSpec {
    rules: BTreeMap<NonTerminal, Vec<Production>>,
    start: NonTerminal,
    input_arity: u32,
}

impl GrammarSpec {
    pub fn new(
        rules: BTreeMap<NonTerminal, Vec<Production>>,
        start: NonTerminal,
        input_arity: u32,
    ) -> Result<Self, GrammarError> {
        let g = GrammarSpec {
            rules,
            start,
            input_arity,
        };
        g.check()?;
        Ok(g)
    }

    /// The shipped SUT grammar.
    ///
    /// Loops appear only as top-level statements; their condition is always
    /// `counter < bound` over a fresh counter that starts at 0 and is
    /// incremented as the last statement of the body. Conditions compare an
    /// input-based left side with a literal or a different input, and `if`
    /// nesting is capped at `max_nesting`.
    pub fn builtin(params: GrammarParams) -> Self {
        use NonTerminal as N;
        use Symbol::*;

        let n = Symbol::N;
        let t = Symbol::T;
        let p = |syms: Vec<Symbol>| Production(syms);
        let depth = params.expr_depth.max(1);
        let nest = params.max_nesting.max(1);

        let mut header = vec![
            t(Token::Program),
            t(Token::Ident("sut".into())),
            t(Token::LParen),
        ];
        for i in 0..params.input_arity {
            if i > 0 {
                header.push(t(Token::Comma));
            }
            header.push(t(Token::Var(VarId::Input(i))));
        }
        header.push(t(Token::RParen));
        header.push(n(N::TopList));

        let mut rules = BTreeMap::new();
        rules.insert(N::Program, vec![p(header)]);
        rules.insert(
            N::TopList,
            vec![
                p(vec![n(N::TopStmt)]),
                p(vec![n(N::TopStmt), n(N::TopList)]),
                p(vec![n(N::TopStmt), n(N::TopList)]),
                p(vec![n(N::TopStmt), n(N::TopList)]),
            ],
        );
        rules.insert(
            N::TopStmt,
            vec![
                p(vec![n(N::Assign)]),
                p(vec![n(N::If(1))]),
                p(vec![n(N::Assign)]),
                p(vec![n(N::IfElse(1))]),
                p(vec![n(N::Assign)]),
                p(vec![n(N::Loop)]),
            ],
        );
        rules.insert(
            N::LoopBody,
            vec![
                p(vec![n(N::InnerStmt(1))]),
                p(vec![n(N::InnerStmt(1)), n(N::LoopBody)]),
            ],
        );
        let if_head = vec![t(Token::If), t(Token::LParen), n(N::Cond), t(Token::RParen)];
        let braced = |inner: NonTerminal| vec![t(Token::LBrace), n(inner), t(Token::RBrace)];
        for d in 1..=nest {
            rules.insert(
                N::Block(d),
                vec![
                    p(vec![n(N::InnerStmt(d))]),
                    p(vec![n(N::InnerStmt(d)), n(N::Block(d))]),
                ],
            );
            let inner = if d < nest {
                vec![
                    p(vec![n(N::Assign)]),
                    p(vec![n(N::If(d + 1))]),
                    p(vec![n(N::Assign)]),
                    p(vec![n(N::IfElse(d + 1))]),
                ]
            } else {
                vec![p(vec![n(N::Assign)])]
            };
            rules.insert(N::InnerStmt(d), inner);
            rules.insert(
                N::If(d),
                vec![p([if_head.clone(), braced(N::Block(d))].concat())],
            );
            rules.insert(
                N::IfElse(d),
                vec![p([
                    if_head.clone(),
                    braced(N::Block(d)),
                    vec![t(Token::Else)],
                    braced(N::Block(d)),
                ]
                .concat())],
            );
        }
        rules.insert(
            N::Assign,
            vec![p(vec![
                n(N::Target),
                t(Token::Assign),
                n(N::Expr(1)),
                t(Token::Semi),
                Commit,
            ])],
        );
        rules.insert(N::Target, vec![p(vec![FreshLocal]), p(vec![ExistingLocal])]);
        rules.insert(
            N::Loop,
            vec![p(vec![
                OpenCounter,
                t(Token::Assign),
                t(Token::Int(0)),
                t(Token::Semi),
                t(Token::Loop),
                t(Token::LParen),
                Counter,
                t(Token::Rel(RelOp::Lt)),
                n(N::LoopBound),
                t(Token::RParen),
                t(Token::LBrace),
                n(N::LoopBody),
                Counter,
                t(Token::Assign),
                t(Token::LParen),
                Counter,
                t(Token::Plus),
                t(Token::Int(1)),
                t(Token::RParen),
                t(Token::Semi),
                t(Token::RBrace),
                CloseCounter,
            ])],
        );
        rules.insert(
            N::LoopBound,
            vec![
                p(vec![InputVar]),
                p(vec![
                    t(Token::LParen),
                    InputVar,
                    n(N::Op),
                    Literal,
                    t(Token::RParen),
                ]),
            ],
        );
        rules.insert(
            N::Cond,
            vec![p(vec![n(N::CondLhs), n(N::Rel), n(N::CondRhs)])],
        );
        rules.insert(
            N::CondLhs,
            vec![
                p(vec![InputVar]),
                p(vec![LocalVar]),
                p(vec![InputVar]),
                p(vec![
                    t(Token::LParen),
                    InputVar,
                    n(N::Op),
                    n(N::Expr(3.min(depth))),
                    t(Token::RParen),
                ]),
            ],
        );
        rules.insert(
            N::CondRhs,
            vec![
                p(vec![Literal]),
                p(vec![OtherInput]),
                p(vec![
                    t(Token::LParen),
                    OtherInput,
                    n(N::Op),
                    Literal,
                    t(Token::RParen),
                ]),
            ],
        );
        rules.insert(
            N::Rel,
            RelOp::ALL
                .iter()
                .map(|r| p(vec![t(Token::Rel(*r))]))
                .collect(),
        );
        rules.insert(
            N::Op,
            vec![
                p(vec![t(Token::Plus)]),
                p(vec![t(Token::Minus)]),
                p(vec![t(Token::Star)]),
            ],
        );
        rules.insert(N::Var, vec![p(vec![InputVar]), p(vec![LocalVar])]);
        for d in 1..=depth {
            let mut prods = vec![p(vec![n(N::Var)]), p(vec![Literal])];
            if d < depth {
                prods.push(p(vec![n(N::Var)]));
                prods.push(p(vec![
                    t(Token::LParen),
                    n(N::Expr(d + 1)),
                    n(N::Op),
                    n(N::Expr(d + 1)),
                    t(Token::RParen),
                ]));
            }
            rules.insert(N::Expr(d), prods);
        }

        GrammarSpec::new(rules, N::Program, params.input_arity)
            .expect("built-in grammar is well formed")
    }

    pub fn start(&self) -> NonTerminal {
        self.start
    }

    pub fn input_arity(&self) -> u32 {
        self.input_arity
    }

    pub fn productions(&self, nt: NonTerminal) -> &[Production] {
        self.rules.get(&nt).map_or(&[], Vec::as_slice)
    }

    /// Checks that every nonterminal is defined and non-empty, that no
    /// production divides, and that loop bodies cannot derive loops.
    pub fn check(&self) -> Result<(), GrammarError> {
        let mut referenced = vec![self.start];
        for (lhs, prods) in &self.rules {
            if prods.is_empty() {
                return Err(GrammarError::Empty(*lhs));
            }
            for prod in prods {
                for sym in &prod.0 {
                    match sym {
                        Symbol::N(n) => referenced.push(*n),
                        Symbol::T(tok) if token_text(tok).contains('/') => {
                            return Err(GrammarError::Division(*lhs))
                        }
                        _ => {}
                    }
                }
            }
        }
        if let Some(missing) = referenced.iter().find(|n| !self.rules.contains_key(n)) {
            return Err(GrammarError::Undefined(*missing));
        }
        for body in self.loop_bodies() {
            if self.reachable(body).contains(&NonTerminal::Loop) {
                return Err(GrammarError::LoopInLoopBody(body));
            }
        }
        Ok(())
    }

    /// Nonterminals appearing between the braces of a `loop` production.
    fn loop_bodies(&self) -> Vec<NonTerminal> {
        let mut out = Vec::new();
        for prods in self.rules.values() {
            for prod in prods {
                let syms = &prod.0;
                let Some(start) = syms.iter().position(|s| *s == Symbol::T(Token::Loop)) else {
                    continue;
                };
                let mut depth = 0;
                for s in &syms[start..] {
                    match s {
                        Symbol::T(Token::LBrace) => depth += 1,
                        Symbol::T(Token::RBrace) => depth -= 1,
                        Symbol::N(n) if depth > 0 => out.push(*n),
                        _ => {}
                    }
                }
            }
        }
        out
    }

    /// All nonterminals derivable from `from`, including itself.
    pub fn reachable(&self, from: NonTerminal) -> BTreeSet<NonTerminal> {
        let mut seen = BTreeSet::from([from]);
        let mut stack = vec![from];
        while let Some(nt) = stack.pop() {
            for prod in self.productions(nt) {
                for sym in &prod.0 {
                    if let Symbol::N(n) = sym {
                        if seen.insert(*n) {
                            stack.push(*n);
                        }
                    }
                }
            }
        }
        seen
    }
}

impl fmt::Display for GrammarSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (lhs, prods) in &self.rules {
            let alts: Vec<String> = prods
                .iter()
                .map(|p| {
                    p.0.iter()
                        .map(|s| s.to_string())
                        .collect::<Vec<_>>()
                        .join(" ")
                })
                .collect();
            writeln!(f, "{lhs} ::= {}", alts.join(" | "))?;
        }
        Ok(())
    }
}
