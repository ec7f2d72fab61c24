use super::grammar::{GrammarSpec, Symbol};
use crate::sut_lang::{parse_tokens, Program, SutError, Token, VarId};

/// Integer genotype of a GE individual; each codon is in `0..=255`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Genotype {
    codons: Vec<u8>,
}

impl Genotype {
    /// Panics on an empty codon list.
    pub fn new(codons: Vec<u8>) -> Self {
        assert!(!codons.is_empty(), "a genotype needs at least one codon");
        Genotype { codons }
    }

    pub fn codons(&self) -> &[u8] {
        &self.codons
    }

    pub fn len(&self) -> usize {
        self.codons.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MappingFailure {
    #[error("codons exhausted after {0} wraps with nonterminals left")]
    WrapsExhausted(u32),
    #[error("mapped program is invalid: {0}")]
    Invalid(SutError),
}

struct Codons<'g> {
    codons: &'g [u8],
    at: usize,
    wraps: u32,
    max_wraps: u32,
}

impl Codons<'_> {
    fn next(&mut self) -> Result<usize, MappingFailure> {
        if self.at == self.codons.len() {
            if self.wraps == self.max_wraps {
                return Err(MappingFailure::WrapsExhausted(self.max_wraps));
            }
            self.wraps += 1;
            self.at = 0;
        }
        let c = self.codons[self.at];
        self.at += 1;
        Ok(c as usize)
    }
}

#[derive(Default)]
struct Scope {
    /// Locals in declaration order.
    declared: Vec<u32>,
    next_local: u32,
    counters: Vec<u32>,
    pending: Option<(u32, bool)>,
    last_input: Option<usize>,
}

/// Maps a genotype through `grammar` with the codon-modulo rule.
///
/// The leftmost nonterminal is always expanded next, choosing production
/// `codon mod count`; every expansion consumes a codon, including
/// nonterminals with a single production. On running out of codons the
/// reader wraps to the start, at most `max_wraps` times.
pub fn map_genotype(
    genotype: &Genotype,
    grammar: &GrammarSpec,
    max_wraps: u32,
) -> Result<Program, MappingFailure> {
    let tokens = derive_tokens(genotype, grammar, max_wraps)?;
    parse_tokens(tokens).map_err(MappingFailure::Invalid)
}

pub(crate) fn derive_tokens(
    genotype: &Genotype,
    grammar: &GrammarSpec,
    max_wraps: u32,
) -> Result<Vec<Token>, MappingFailure> {
    let k = grammar.input_arity().max(1) as usize;
    let mut codons = Codons {
        codons: &genotype.codons,
        at: 0,
        wraps: 0,
        max_wraps,
    };
    let mut scope = Scope::default();
    let mut out = Vec::new();
    let mut stack: Vec<&Symbol> = Vec::new();
    let start = Symbol::N(grammar.start());
    stack.push(&start);

    while let Some(sym) = stack.pop() {
        match sym {
            Symbol::N(nt) => {
                let prods = grammar.productions(*nt);
                let choice = codons.next()? % prods.len();
                stack.extend(prods[choice].0.iter().rev());
            }
            Symbol::T(tok) => out.push(tok.clone()),
            Symbol::InputVar => {
                let i = codons.next()? % k;
                scope.last_input = Some(i);
                out.push(Token::Var(VarId::Input(i as u32)));
            }
            Symbol::OtherInput => {
                let c = codons.next()?;
                let i = match scope.last_input {
                    Some(last) if k > 1 => (last + 1 + c % (k - 1)) % k,
                    _ => c % k,
                };
                scope.last_input = Some(i);
                out.push(Token::Var(VarId::Input(i as u32)));
            }
            Symbol::LocalVar => {
                let c = codons.next()?;
                let v = if scope.declared.is_empty() {
                    VarId::Input((c % k) as u32)
                } else {
                    VarId::Local(scope.declared[c % scope.declared.len()])
                };
                out.push(Token::Var(v));
            }
            Symbol::FreshLocal | Symbol::ExistingLocal => {
                let c = codons.next()?;
                let reusable: Vec<u32> = if *sym == Symbol::ExistingLocal {
                    scope
                        .declared
                        .iter()
                        .copied()
                        .filter(|v| !scope.counters.contains(v))
                        .collect()
                } else {
                    Vec::new()
                };
                let target = if reusable.is_empty() {
                    let v = scope.next_local;
                    scope.next_local += 1;
                    (v, true)
                } else {
                    (reusable[c % reusable.len()], false)
                };
                scope.pending = Some(target);
                out.push(Token::Var(VarId::Local(target.0)));
            }
            Symbol::Commit => {
                if let Some((v, true)) = scope.pending.take() {
                    scope.declared.push(v);
                }
            }
            Symbol::Literal => {
                let value = codons.next()? as i64 - 128;
                if value < 0 {
                    out.push(Token::Minus);
                }
                out.push(Token::Int(value.unsigned_abs()));
            }
            Symbol::OpenCounter => {
                let v = scope.next_local;
                scope.next_local += 1;
                scope.declared.push(v);
                scope.counters.push(v);
                out.push(Token::Var(VarId::Local(v)));
            }
            Symbol::Counter => {
                let v = *scope.counters.last().expect("counter used outside a loop");
                out.push(Token::Var(VarId::Local(v)));
            }
            Symbol::CloseCounter => {
                scope.counters.pop();
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ge_gen::grammar::{GrammarParams, NonTerminal, Production};
    use crate::sut_lang::{render, validate, RelOp};
    use std::collections::BTreeMap;

    /// S ::= "program" "p" "(" "x0" ")" A ; A ::= three alternatives.
    fn toy() -> GrammarSpec {
        let t = Symbol::T;
        let assign = |n: u64| {
            Production(vec![
                t(Token::Var(VarId::Local(0))),
                t(Token::Assign),
                t(Token::Int(n)),
                t(Token::Semi),
            ])
        };
        let rules = BTreeMap::from([
            (
                NonTerminal::Program,
                vec![Production(vec![
                    t(Token::Program),
                    t(Token::Ident("p".into())),
                    t(Token::LParen),
                    t(Token::Var(VarId::Input(0))),
                    t(Token::RParen),
                    Symbol::N(NonTerminal::Assign),
                ])],
            ),
            (
                NonTerminal::Assign,
                vec![assign(10), assign(11), assign(12)],
            ),
        ]);
        GrammarSpec::new(rules, NonTerminal::Program, 1).unwrap()
    }

    fn assigned_value(p: &Program) -> i64 {
        match &p.body()[0] {
            crate::sut_lang::Stmt::Assign {
                value: crate::sut_lang::Expr::Const(n),
                ..
            } => *n,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn codon_modulo_selects_production() {
        // Program (1 production) consumes codon 5, Assign picks 7 mod 3 = 1
        let p = map_genotype(&Genotype::new(vec![5, 7]), &toy(), 0).unwrap();
        assert_eq!(assigned_value(&p), 11);
    }

    #[test]
    fn single_production_still_consumes_a_codon() {
        // if Program did not consume, Assign would read 2 and pick index 2
        let p = map_genotype(&Genotype::new(vec![2, 0]), &toy(), 0).unwrap();
        assert_eq!(assigned_value(&p), 10);
    }

    #[test]
    fn wrapping_reuses_codons() {
        let g = Genotype::new(vec![4]);
        assert_eq!(
            map_genotype(&g, &toy(), 0),
            Err(MappingFailure::WrapsExhausted(0))
        );
        // second read wraps to codon 0: 4 mod 3 = 1
        let p = map_genotype(&g, &toy(), 1).unwrap();
        assert_eq!(assigned_value(&p), 11);
    }

    #[test]
    fn all_zero_genotype_maps_to_minimal_program() {
        let grammar = GrammarSpec::builtin(GrammarParams {
            input_arity: 3,
            ..GrammarParams::default()
        });
        let g = Genotype::new(vec![0; 200]);
        let a = map_genotype(&g, &grammar, 3).unwrap();
        let b = map_genotype(&g, &grammar, 3).unwrap();
        assert_eq!(a, b);
        assert!(validate(&a).is_empty());
        assert_eq!(render(&a), "program sut(x0, x1, x2)\nv0 = x0;\n");
    }

    #[test]
    fn loops_get_counters_and_increments() {
        let grammar = GrammarSpec::builtin(GrammarParams {
            input_arity: 2,
            ..GrammarParams::default()
        });
        // Program, TopList -> TopStmt (0), TopStmt -> Loop (5), Loop,
        // LoopBound -> INPUT (0) INPUT x1 (1), LoopBody -> InnerStmt (0),
        // InnerStmt -> Assign (0), Assign, Target -> FRESH (0), FRESH (0),
        // Expr1 -> Var (0), Var -> LOCAL (1), LOCAL picks counter (0)
        let g = Genotype::new(vec![0, 0, 5, 0, 0, 1, 0, 0, 0, 0, 0, 0, 1, 0]);
        let p = map_genotype(&g, &grammar, 0).unwrap();
        assert_eq!(
            render(&p),
            "program sut(x0, x1)\nv0 = 0;\nloop (v0 < x1) {\n    v1 = v0;\n    v0 = (v0 + 1);\n}\n"
        );
        let crate::sut_lang::Stmt::Loop { cond, .. } = &p.body()[1] else {
            panic!()
        };
        assert_eq!(cond.rel, RelOp::Lt);
    }

    #[test]
    fn literal_codons_map_to_signed_values() {
        let grammar = GrammarSpec::builtin(GrammarParams {
            input_arity: 1,
            ..GrammarParams::default()
        });
        // ..., Expr1 -> LITERAL (1), literal codon 3 -> -125
        let g = Genotype::new(vec![0, 0, 0, 0, 0, 0, 1, 3]);
        let p = map_genotype(&g, &grammar, 0).unwrap();
        assert_eq!(render(&p), "program sut(x0)\nv0 = -125;\n");
    }
}
