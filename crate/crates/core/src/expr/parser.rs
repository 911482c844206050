use super::{BinOp, ExprError, Func, Node, Var};

pub(super) fn parse(text: &str, dim: usize) -> Result<Node, ExprError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        dim,
    };
    let node = p.expr()?;
    p.skip_ws();
    if p.pos < p.src.len() {
        return Err(p.syntax(p.pos, "unexpected trailing input"));
    }
    Ok(node)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl Parser<'_> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn syntax(&self, offset: usize, message: impl Into<String>) -> ExprError {
        ExprError::Syntax {
            offset,
            message: message.into(),
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ExprError> {
        match self.peek() {
            Some(got) if got == c => {
                self.pos += 1;
                Ok(())
            }
            Some(got) => Err(self.syntax(
                self.pos,
                format!("expected `{}`, found `{}`", c as char, got as char),
            )),
            None => Err(self.syntax(self.pos, format!("expected `{}`", c as char))),
        }
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(b'+') => BinOp::Add,
                Some(b'-') => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.factor()?;
        loop {
            let op = match self.peek() {
                Some(b'*') => BinOp::Mul,
                Some(b'/') => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.factor()?;
            lhs = Node::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn factor(&mut self) -> Result<Node, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.atom()?;
            return Ok(Node::Neg(Box::new(inner)));
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.expect(b')')?;
                Ok(inner)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.syntax(self.pos, format!("unexpected `{}`", c as char))),
            None => Err(self.syntax(start.max(self.pos), "unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            let s = p.pos;
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
            p.pos - s
        };
        let mut count = digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            count += digits(self);
        }
        if count == 0 {
            return Err(self.syntax(start, "malformed number"));
        }
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            if digits(self) == 0 {
                self.pos = save;
                return Err(self.syntax(save, "malformed exponent"));
            }
        }
        // the scanned slice is ASCII
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .map(Node::Const)
            .map_err(|_| self.syntax(start, "malformed number"))
    }

    fn ident(&mut self) -> Result<Node, ExprError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        if self.peek() == Some(b'(') {
            return self.call(start, name);
        }
        self.variable(start, name)
    }

    fn call(&mut self, start: usize, name: String) -> Result<Node, ExprError> {
        let is_pow = name == "pow";
        let func = Func::from_name(&name);
        if func.is_none() && !is_pow {
            return Err(ExprError::UnknownIdentifier {
                offset: start,
                name,
            });
        }
        self.expect(b'(')?;
        let mut args = Vec::new();
        let mut offsets = Vec::new();
        loop {
            self.skip_ws();
            offsets.push(self.pos);
            args.push(self.expr()?);
            match self.peek() {
                Some(b',') => self.pos += 1,
                _ => break,
            }
        }
        self.expect(b')')?;

        if is_pow {
            if args.len() != 2 {
                return Err(self.syntax(start, "pow expects 2 arguments"));
            }
            let exponent = match &args[1] {
                Node::Const(c) => *c,
                Node::Neg(inner) => match **inner {
                    Node::Const(c) => -c,
                    _ => return Err(self.syntax(offsets[1], "pow exponent must be a numeric literal")),
                },
                _ => return Err(self.syntax(offsets[1], "pow exponent must be a numeric literal")),
            };
            let base = args.swap_remove(0);
            return Ok(Node::Pow(Box::new(base), exponent));
        }

        let func = func.unwrap();
        if args.len() != func.arity() {
            return Err(self.syntax(
                start,
                format!("{} expects {} argument(s)", func.name(), func.arity()),
            ));
        }
        Ok(Node::Call(func, args))
    }

    fn variable(&self, start: usize, name: String) -> Result<Node, ExprError> {
        if name == "t" {
            return Ok(Node::Var(Var::T));
        }
        let (ctor, digits): (fn(usize) -> Var, &str) = if let Some(d) = name.strip_prefix("xdd") {
            (Var::Xdd, d)
        } else if let Some(d) = name.strip_prefix("xd") {
            (Var::Xd, d)
        } else if let Some(d) = name.strip_prefix('x') {
            (Var::X, d)
        } else {
            return Err(ExprError::UnknownIdentifier {
                offset: start,
                name,
            });
        };
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ExprError::UnknownIdentifier {
                offset: start,
                name,
            });
        }
        match digits.parse::<usize>() {
            Ok(i) if i >= 1 && i <= self.dim => Ok(Node::Var(ctor(i - 1))),
            _ => Err(ExprError::IndexOutOfRange {
                offset: start,
                name,
                dim: self.dim,
            }),
        }
    }
}
