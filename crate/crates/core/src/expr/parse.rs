use super::{Expr, ExprError, Func};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Pow,
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    toks: Vec<(Tok, usize)>,
}

impl<'a> Lexer<'a> {
    fn run(src: &'a str) -> Result<Vec<(Tok, usize)>, ExprError> {
        let mut lx = Lexer { src, toks: Vec::new() };
        lx.scan()?;
        Ok(lx.toks)
    }

    fn scan(&mut self) -> Result<(), ExprError> {
        let bytes = self.src.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let c = bytes[i];
            let start = i;
            match c {
                b' ' | b'\t' | b'\n' | b'\r' => {
                    i += 1;
                    continue;
                }
                b'+' => self.toks.push((Tok::Plus, start)),
                b'-' => self.toks.push((Tok::Minus, start)),
                b'/' => self.toks.push((Tok::Slash, start)),
                b'^' => self.toks.push((Tok::Pow, start)),
                b'(' => self.toks.push((Tok::LParen, start)),
                b')' => self.toks.push((Tok::RParen, start)),
                b'*' => {
                    if bytes.get(i + 1) == Some(&b'*') {
                        self.toks.push((Tok::Pow, start));
                        i += 1;
                    } else {
                        self.toks.push((Tok::Star, start));
                    }
                }
                b'0'..=b'9' | b'.' => {
                    while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                        i += 1;
                    }
                    if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                        let mut j = i + 1;
                        if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                            j += 1;
                        }
                        if j < bytes.len() && bytes[j].is_ascii_digit() {
                            while j < bytes.len() && bytes[j].is_ascii_digit() {
                                j += 1;
                            }
                            i = j;
                        }
                    }
                    let text = &self.src[start..i];
                    let value: f64 = text.parse().map_err(|_| ExprError::Syntax {
                        offset: start,
                        message: format!("malformed number `{text}`"),
                    })?;
                    self.toks.push((Tok::Num(value), start));
                    continue;
                }
                c if c.is_ascii_alphabetic() || c == b'_' => {
                    while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                        i += 1;
                    }
                    self.toks.push((Tok::Ident(self.src[start..i].to_string()), start));
                    continue;
                }
                _ => {
                    return Err(ExprError::Syntax {
                        offset: start,
                        message: format!("unexpected character `{}`", self.src[start..].chars().next().unwrap()),
                    })
                }
            }
            i += 1;
        }
        self.toks.push((Tok::End, self.src.len()));
        Ok(())
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

pub(super) fn parse(text: &str) -> Result<Expr, ExprError> {
    let toks = Lexer::run(text)?;
    if toks.len() == 1 {
        return Err(ExprError::Syntax { offset: 0, message: "empty expression".into() });
    }
    let mut p = Parser { toks, pos: 0 };
    let e = p.sum()?;
    match p.peek() {
        Tok::End => Ok(e),
        t => Err(ExprError::Syntax {
            offset: p.offset(),
            message: format!("unexpected token {t:?}"),
        }),
    }
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn sum(&mut self) -> Result<Expr, ExprError> {
        let first = self.product()?;
        let mut terms = vec![first];
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    terms.push(self.product()?);
                }
                Tok::Minus => {
                    self.bump();
                    terms.push(Expr::Neg(Box::new(self.product()?)));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Expr::Add(terms) })
    }

    fn product(&mut self) -> Result<Expr, ExprError> {
        let mut acc = self.unary()?;
        // Only a product built by this chain is extended in place; a
        // parenthesized product on the left stays a single factor.
        let mut chain = false;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = match acc {
                        Expr::Mul(mut xs) if chain => {
                            xs.push(rhs);
                            Expr::Mul(xs)
                        }
                        other => Expr::Mul(vec![other, rhs]),
                    };
                    chain = true;
                }
                Tok::Slash => {
                    self.bump();
                    let rhs = self.unary()?;
                    acc = Expr::Div(Box::new(acc), Box::new(rhs));
                    chain = false;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            // A literal directly after the minus sign folds into a negative
            // constant unless it is the base of a power.
            if let Tok::Num(v) = *self.peek() {
                if *self.peek_at(1) != Tok::Pow {
                    self.bump();
                    return Ok(Expr::Const(-v));
                }
            }
            let inner = self.unary()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if *self.peek() == Tok::Pow {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let offset = self.offset();
        match self.bump() {
            Tok::Num(v) => Ok(Expr::Const(v)),
            Tok::Ident(name) => {
                if *self.peek() == Tok::LParen {
                    let func = Func::from_name(&name)
                        .ok_or(ExprError::UnknownFunction { name, offset })?;
                    self.bump();
                    let arg = self.sum()?;
                    self.expect_rparen()?;
                    Ok(Expr::Call(func, Box::new(arg)))
                } else {
                    Ok(Expr::Sym(name))
                }
            }
            Tok::LParen => {
                let e = self.sum()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::End => Err(ExprError::Syntax { offset, message: "unexpected end of input".into() }),
            t => Err(ExprError::Syntax { offset, message: format!("unexpected token {t:?}") }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ExprError> {
        let offset = self.offset();
        match self.bump() {
            Tok::RParen => Ok(()),
            _ => Err(ExprError::Syntax { offset, message: "expected `)`".into() }),
        }
    }
}
