use super::{validate, BinOp, Cond, Expr, Program, RelOp, Stmt, SutError, VarId};

/// Lexical token of the program text format.
///
/// Also produced directly by the grammatical-evolution mapper, which feeds
/// token streams to [`parse_tokens`] without going through text.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Token {
    Program,
    If,
    Else,
    Loop,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Assign,
    Plus,
    Minus,
    Star,
    Rel(RelOp),
    /// Unsigned magnitude; negative literals are `Minus` followed by `Int`.
    Int(u64),
    Var(VarId),
    Ident(String),
}

impl Token {
    fn describe(&self) -> String {
        match self {
            Token::Program => "`program`".into(),
            Token::If => "`if`".into(),
            Token::Else => "`else`".into(),
            Token::Loop => "`loop`".into(),
            Token::LParen => "`(`".into(),
            Token::RParen => "`)`".into(),
            Token::LBrace => "`{`".into(),
            Token::RBrace => "`}`".into(),
            Token::Comma => "`,`".into(),
            Token::Semi => "`;`".into(),
            Token::Assign => "`=`".into(),
            Token::Plus => "`+`".into(),
            Token::Minus => "`-`".into(),
            Token::Star => "`*`".into(),
            Token::Rel(r) => format!("`{}`", r.symbol()),
            Token::Int(n) => format!("integer {n}"),
            Token::Var(v) => format!("variable `{v}`"),
            Token::Ident(s) => format!("identifier `{s}`"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> SutError {
    SutError::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn lex(text: &str) -> Result<Vec<(Token, Pos)>, SutError> {
    let mut out = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let bytes = line.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let pos = Pos {
                line: ln + 1,
                column: i + 1,
            };
            let c = bytes[i];
            let two = |next: u8| bytes.get(i + 1) == Some(&next);
            let (tok, len) = match c {
                b' ' | b'\t' | b'\r' => {
                    i += 1;
                    continue;
                }
                b'#' => break,
                b'(' => (Token::LParen, 1),
                b')' => (Token::RParen, 1),
                b'{' => (Token::LBrace, 1),
                b'}' => (Token::RBrace, 1),
                b',' => (Token::Comma, 1),
                b';' => (Token::Semi, 1),
                b'+' => (Token::Plus, 1),
                b'-' => (Token::Minus, 1),
                b'*' => (Token::Star, 1),
                b'<' if two(b'=') => (Token::Rel(RelOp::Le), 2),
                b'<' => (Token::Rel(RelOp::Lt), 1),
                b'>' if two(b'=') => (Token::Rel(RelOp::Ge), 2),
                b'>' => (Token::Rel(RelOp::Gt), 1),
                b'=' if two(b'=') => (Token::Rel(RelOp::Eq), 2),
                b'=' => (Token::Assign, 1),
                b'!' if two(b'=') => (Token::Rel(RelOp::Ne), 2),
                b'/' => return Err(syntax(pos, "unexpected `/`: the language has no division")),
                b'0'..=b'9' => {
                    let end = scan(bytes, i, |b| b.is_ascii_digit());
                    let n = line[i..end]
                        .parse::<u64>()
                        .map_err(|_| syntax(pos, "integer literal out of range"))?;
                    (Token::Int(n), end - i)
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    let end = scan(bytes, i, |b| b.is_ascii_alphanumeric() || b == b'_');
                    (word(&line[i..end]), end - i)
                }
                _ => {
                    let ch = line[i..].chars().next().unwrap_or('?');
                    return Err(syntax(pos, format!("unexpected character `{ch}`")));
                }
            };
            out.push((tok, pos));
            i += len;
        }
    }
    Ok(out)
}

fn scan(bytes: &[u8], start: usize, pred: impl Fn(u8) -> bool) -> usize {
    let mut end = start;
    while end < bytes.len() && pred(bytes[end]) {
        end += 1;
    }
    end
}

fn word(w: &str) -> Token {
    match w {
        "program" => return Token::Program,
        "if" => return Token::If,
        "else" => return Token::Else,
        "loop" => return Token::Loop,
        _ => {}
    }
    let (head, digits) = w.split_at(1);
    if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
        if let Ok(i) = digits.parse::<u32>() {
            match head {
                "x" => return Token::Var(VarId::Input(i)),
                "v" => return Token::Var(VarId::Local(i)),
                _ => {}
            }
        }
    }
    Token::Ident(w.to_string())
}

/// Parses program text, reassigning ids in pre-order, and validates it.
pub fn parse(text: &str) -> Result<Program, SutError> {
    let toks = lex(text)?;
    let end = Pos {
        line: text.lines().count().max(1),
        column: text.lines().last().map_or(1, |l| l.len() + 1),
    };
    Parser {
        toks: &toks,
        at: 0,
        end,
    }
    .program()
}

/// Parses an already tokenized program (positions are reported as token indices).
pub fn parse_tokens(tokens: Vec<Token>) -> Result<Program, SutError> {
    let toks: Vec<(Token, Pos)> = tokens
        .into_iter()
        .enumerate()
        .map(|(i, t)| {
            (
                t,
                Pos {
                    line: 1,
                    column: i + 1,
                },
            )
        })
        .collect();
    let end = Pos {
        line: 1,
        column: toks.len() + 1,
    };
    Parser {
        toks: &toks,
        at: 0,
        end,
    }
    .program()
}

struct Parser<'t> {
    toks: &'t [(Token, Pos)],
    at: usize,
    end: Pos,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.toks.get(self.at).map(|(t, _)| t)
    }

    fn pos(&self) -> Pos {
        self.toks.get(self.at).map_or(self.end, |(_, p)| *p)
    }

    fn bump(&mut self) -> Option<&Token> {
        let t = self.toks.get(self.at).map(|(t, _)| t);
        self.at += 1;
        t
    }

    fn unexpected(&self, wanted: &str) -> SutError {
        let found = self
            .peek()
            .map_or_else(|| "end of input".to_string(), Token::describe);
        syntax(self.pos(), format!("expected {wanted}, found {found}"))
    }

    fn expect(&mut self, tok: Token) -> Result<(), SutError> {
        if self.peek() == Some(&tok) {
            self.at += 1;
            Ok(())
        } else {
            Err(self.unexpected(&tok.describe()))
        }
    }

    fn program(mut self) -> Result<Program, SutError> {
        self.expect(Token::Program)?;
        let name = match self.bump() {
            Some(Token::Ident(s)) => s.clone(),
            Some(Token::Var(v)) => v.to_string(),
            _ => {
                self.at -= 1;
                return Err(self.unexpected("program name"));
            }
        };
        self.expect(Token::LParen)?;
        let mut arity = 0u32;
        if self.peek() != Some(&Token::RParen) {
            loop {
                let pos = self.pos();
                match self.bump() {
                    Some(Token::Var(VarId::Input(i))) if *i == arity => arity += 1,
                    Some(Token::Var(VarId::Input(_))) => {
                        return Err(syntax(pos, format!("expected parameter `x{arity}`")))
                    }
                    _ => {
                        self.at -= 1;
                        return Err(self.unexpected(&format!("parameter `x{arity}`")));
                    }
                }
                if self.peek() == Some(&Token::Comma) {
                    self.at += 1;
                } else {
                    break;
                }
            }
        }
        self.expect(Token::RParen)?;
        let body = self.block_until(None)?;
        let program = Program::new(name, arity, body);
        let violations = validate(&program);
        if violations.is_empty() {
            Ok(program)
        } else {
            Err(SutError::Invalid(violations))
        }
    }

    /// Statements until `close` (or end of input when `close` is `None`).
    fn block_until(&mut self, close: Option<Token>) -> Result<Vec<Stmt>, SutError> {
        let mut out = Vec::new();
        loop {
            match (self.peek(), &close) {
                (None, None) => return Ok(out),
                (None, Some(c)) => return Err(self.unexpected(&c.describe())),
                (Some(t), Some(c)) if t == c => {
                    self.at += 1;
                    return Ok(out);
                }
                _ => out.push(self.stmt()?),
            }
        }
    }

    fn braced(&mut self) -> Result<Vec<Stmt>, SutError> {
        self.expect(Token::LBrace)?;
        self.block_until(Some(Token::RBrace))
    }

    fn stmt(&mut self) -> Result<Stmt, SutError> {
        match self.peek() {
            Some(Token::If) => {
                self.at += 1;
                let cond = self.paren_cond()?;
                let then_block = self.braced()?;
                let else_block = if self.peek() == Some(&Token::Else) {
                    self.at += 1;
                    Some(self.braced()?)
                } else {
                    None
                };
                Ok(Stmt::If {
                    cond,
                    then_block,
                    else_block,
                })
            }
            Some(Token::Loop) => {
                self.at += 1;
                let cond = self.paren_cond()?;
                let body = self.braced()?;
                Ok(Stmt::Loop { cond, body })
            }
            Some(Token::Var(v)) => {
                let target = *v;
                self.at += 1;
                self.expect(Token::Assign)?;
                let value = self.expr()?;
                self.expect(Token::Semi)?;
                Ok(Stmt::assign(target, value))
            }
            _ => Err(self.unexpected("statement")),
        }
    }

    fn paren_cond(&mut self) -> Result<Cond, SutError> {
        self.expect(Token::LParen)?;
        let left = self.expr()?;
        let rel = match self.peek() {
            Some(Token::Rel(r)) => *r,
            _ => return Err(self.unexpected("relational operator")),
        };
        self.at += 1;
        let right = self.expr()?;
        self.expect(Token::RParen)?;
        Ok(Cond::new(left, rel, right))
    }

    fn expr(&mut self) -> Result<Expr, SutError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.at += 1;
            lhs = Expr::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Expr, SutError> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(&Token::Star) {
            self.at += 1;
            lhs = Expr::bin(BinOp::Mul, lhs, self.factor()?);
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, SutError> {
        let pos = self.pos();
        match self.peek() {
            Some(Token::Int(n)) => {
                let n = *n;
                self.at += 1;
                i64::try_from(n)
                    .map(Expr::Const)
                    .map_err(|_| syntax(pos, "integer literal out of range"))
            }
            Some(Token::Minus) => {
                self.at += 1;
                match self.peek() {
                    Some(Token::Int(n)) => {
                        let n = *n;
                        self.at += 1;
                        i64::try_from(-(n as i128))
                            .map(Expr::Const)
                            .map_err(|_| syntax(pos, "integer literal out of range"))
                    }
                    _ => Err(self.unexpected("integer literal after unary `-`")),
                }
            }
            Some(Token::Var(v)) => {
                let v = *v;
                self.at += 1;
                Ok(Expr::Var(v))
            }
            Some(Token::LParen) => {
                self.at += 1;
                let e = self.expr()?;
                self.expect(Token::RParen)?;
                Ok(e)
            }
            _ => Err(self.unexpected("expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sut_lang::{render, Metrics};

    #[test]
    fn single_constant_assignment() {
        let p = parse("program p(x0)\nv0 = 3;\n").unwrap();
        assert_eq!(p.body().len(), 1);
        assert!(matches!(
            &p.body()[0],
            Stmt::Assign {
                target: VarId::Local(0),
                value: Expr::Const(3),
                ..
            }
        ));
    }

    #[test]
    fn division_is_a_syntax_error() {
        let err = parse("program p(x0, x1)\nv0 = x0 / x1;\n").unwrap_err();
        match err {
            SutError::Syntax {
                line,
                column,
                message,
            } => {
                assert_eq!((line, column), (2, 9));
                assert!(message.contains("division"), "{message}");
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_identifier_rejected() {
        let err = parse("program p(x0)\nv0 = a;\n").unwrap_err();
        assert!(
            matches!(
                err,
                SutError::Syntax {
                    line: 2,
                    column: 6,
                    ..
                }
            ),
            "{err:?}"
        );
    }

    #[test]
    fn precedence_and_negative_literals() {
        let p = parse("program p(x0)\nv0 = x0 + 2 * -3 - 1;\n").unwrap();
        let Stmt::Assign { value, .. } = &p.body()[0] else {
            panic!()
        };
        let expect = Expr::bin(
            BinOp::Sub,
            Expr::bin(
                BinOp::Add,
                Expr::Var(VarId::Input(0)),
                Expr::bin(BinOp::Mul, Expr::Const(2), Expr::Const(-3)),
            ),
            Expr::Const(1),
        );
        assert_eq!(value, &expect);
    }

    #[test]
    fn extreme_literals() {
        let p =
            parse("program p()\nv0 = -9223372036854775808;\nv1 = 9223372036854775807;\n").unwrap();
        assert_eq!(
            render(&p),
            "program p()\nv0 = -9223372036854775808;\nv1 = 9223372036854775807;\n"
        );
        assert!(parse("program p()\nv0 = 9223372036854775808;\n").is_err());
    }

    #[test]
    fn comments_and_else() {
        let text = "# header comment\nprogram demo(x0, x1) # trailing\nif (x0 >= x1 + 10) {\n  v0 = 1;\n} else {\n  v0 = 2; # c\n}\nloop (v0 < 5) { v0 = v0 + 1; }\n";
        let p = parse(text).unwrap();
        assert_eq!(p.name(), "demo");
        assert_eq!(p.input_arity(), 2);
        assert_eq!(
            p.metrics(),
            Metrics {
                statements: 3,
                branches: 2,
                loops: 1
            }
        );
    }

    #[test]
    fn header_parameters_must_be_sequential() {
        assert!(parse("program p(x0, x2)\n").is_err());
        assert!(parse("program p(x1)\n").is_err());
    }

    #[test]
    fn unterminated_block_reports_position() {
        let err = parse("program p(x0)\nif (x0 < 1) {\nv0 = 1;\n").unwrap_err();
        assert!(matches!(err, SutError::Syntax { .. }), "{err:?}");
        assert!(err.to_string().contains("end of input"), "{err}");
    }

    #[test]
    fn validation_errors_surface_from_parse() {
        let err = parse("program p(x0)\nv0 = v9;\n").unwrap_err();
        assert!(matches!(err, SutError::Invalid(_)), "{err:?}");
    }
}
