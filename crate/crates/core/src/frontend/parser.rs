//! Recursive-descent parser producing [`ast`](super::ast) statements.
//!
//! Nesting is bounded so adversarial input cannot exhaust the stack.

use super::ast::{Arg, BinOp, CmpOp, Expr, Param, Stmt, UnaryOp};
use super::lexer::{tokenize, Tok, Token};
use super::FrontendError;

const MAX_DEPTH: usize = 64;

pub fn parse(src: &str) -> Result<Vec<Stmt>, FrontendError> {
    let tokens = tokenize(src)?;
    let mut p = Parser { tokens, pos: 0, depth: 0 };
    let mut out = Vec::new();
    loop {
        match p.peek() {
            Tok::Eof => break,
            Tok::Newline => p.pos += 1,
            _ => out.extend(p.statement()?),
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    depth: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos.min(self.tokens.len() - 1)].tok
    }

    fn peek_at(&self, off: usize) -> &Tok {
        &self.tokens[(self.pos + off).min(self.tokens.len() - 1)].tok
    }

    fn line(&self) -> u32 {
        self.tokens[self.pos.min(self.tokens.len() - 1)].line
    }

    fn advance(&mut self) -> Tok {
        let t = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, message: &str) -> PResult<T> {
        Err(FrontendError::Syntax {
            line: self.line(),
            message: format!("{message}, found {:?}", self.peek()),
        })
    }

    fn is_op(&self, op: &str) -> bool {
        matches!(self.peek(), Tok::Op(o) if *o == op)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Name(n) if n == kw)
    }

    fn eat_op(&mut self, op: &str) -> bool {
        if self.is_op(op) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_op(&mut self, op: &str) -> PResult<()> {
        if self.eat_op(op) {
            Ok(())
        } else {
            self.error(&format!("expected '{op}'"))
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.error(&format!("expected '{kw}'"))
        }
    }

    fn name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Name(n) if !is_keyword(&n) => {
                self.pos += 1;
                Ok(n)
            }
            _ => self.error("expected a name"),
        }
    }

    fn end_of_simple(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline => {
                self.pos += 1;
                Ok(())
            }
            Tok::Eof => Ok(()),
            _ => self.error("expected end of statement"),
        }
    }

    fn enter(&mut self) -> PResult<()> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return self.error("nesting too deep");
        }
        Ok(())
    }

    fn leave(&mut self) {
        self.depth -= 1;
    }

    fn statement(&mut self) -> PResult<Vec<Stmt>> {
        self.enter()?;
        let r = self.statement_inner();
        self.leave();
        r
    }

    fn statement_inner(&mut self) -> PResult<Vec<Stmt>> {
        while self.is_op("@") {
            self.pos += 1;
            self.expr()?;
            self.end_of_simple()?;
        }
        if self.is_kw("async") && matches!(self.peek_at(1), Tok::Name(n) if n == "def" || n == "for" || n == "with") {
            self.pos += 1;
        }
        let Tok::Name(kw) = self.peek().clone() else {
            return self.simple_line();
        };
        match kw.as_str() {
            "if" => {
                self.pos += 1;
                self.if_rest().map(|s| vec![s])
            }
            "for" => {
                let line = self.line();
                self.pos += 1;
                let target = self.target_list()?;
                self.expect_kw("in")?;
                let iter = self.expr_list()?;
                self.expect_op(":")?;
                let body = self.block()?;
                let orelse = self.else_block()?;
                Ok(vec![Stmt::For {
                    target,
                    iter,
                    body,
                    orelse,
                    line,
                }])
            }
            "while" => {
                self.pos += 1;
                let cond = self.expr()?;
                self.expect_op(":")?;
                let body = self.block()?;
                let orelse = self.else_block()?;
                Ok(vec![Stmt::While { cond, body, orelse }])
            }
            "with" => {
                self.pos += 1;
                let parenthesized = self.is_op("(") && self.with_items_parenthesized();
                if parenthesized {
                    self.pos += 1;
                }
                let mut items = Vec::new();
                loop {
                    if parenthesized && self.is_op(")") {
                        break;
                    }
                    let ctx = self.expr()?;
                    let var = if self.eat_kw("as") { Some(self.target()?) } else { None };
                    items.push((ctx, var));
                    if !self.eat_op(",") {
                        break;
                    }
                }
                if parenthesized {
                    self.expect_op(")")?;
                }
                self.expect_op(":")?;
                let body = self.block()?;
                Ok(vec![Stmt::With { items, body }])
            }
            "def" => {
                self.pos += 1;
                let name = self.name()?;
                self.expect_op("(")?;
                let params = self.params(")")?;
                self.expect_op(")")?;
                if self.eat_op("->") {
                    self.expr()?;
                }
                self.expect_op(":")?;
                let body = self.block()?;
                Ok(vec![Stmt::FunctionDef { name, params, body }])
            }
            "class" => {
                self.pos += 1;
                let name = self.name()?;
                if self.eat_op("(") {
                    self.call_args()?;
                }
                self.expect_op(":")?;
                self.block()?;
                Ok(vec![Stmt::ClassDef { name }])
            }
            "try" => {
                self.pos += 1;
                self.expect_op(":")?;
                let body = self.block()?;
                let mut orelse = Vec::new();
                let mut finally = Vec::new();
                loop {
                    if self.eat_kw("except") {
                        self.eat_op("*");
                        if !self.is_op(":") {
                            self.expr()?;
                            if self.eat_kw("as") {
                                self.name()?;
                            } else if self.eat_op(",") {
                                self.expr()?;
                            }
                        }
                        self.expect_op(":")?;
                        // handlers are alternatives to the body and are not executed
                        self.block()?;
                    } else if self.eat_kw("else") {
                        self.expect_op(":")?;
                        orelse = self.block()?;
                    } else if self.eat_kw("finally") {
                        self.expect_op(":")?;
                        finally = self.block()?;
                    } else {
                        break;
                    }
                }
                Ok(vec![Stmt::Try { body, orelse, finally }])
            }
            _ => self.simple_line(),
        }
    }

    /// Distinguishes `with (a as b, c):` from `with (a):`.
    fn with_items_parenthesized(&self) -> bool {
        let mut depth = 0usize;
        let mut i = self.pos;
        while i < self.tokens.len() {
            match &self.tokens[i].tok {
                Tok::Op("(" | "[" | "{") => depth += 1,
                Tok::Op(")" | "]" | "}") => {
                    depth = depth.saturating_sub(1);
                    if depth == 0 {
                        return matches!(self.tokens.get(i + 1).map(|t| &t.tok), Some(Tok::Op(":")));
                    }
                }
                Tok::Name(n) if n == "as" && depth == 1 => return true,
                Tok::Newline | Tok::Eof => return false,
                _ => {}
            }
            i += 1;
        }
        false
    }

    fn if_rest(&mut self) -> PResult<Stmt> {
        let cond = self.expr()?;
        self.expect_op(":")?;
        let body = self.block()?;
        let orelse = if self.eat_kw("elif") {
            vec![self.if_rest()?]
        } else {
            self.else_block()?
        };
        Ok(Stmt::If { cond, body, orelse })
    }

    fn else_block(&mut self) -> PResult<Vec<Stmt>> {
        if self.eat_kw("else") {
            self.expect_op(":")?;
            self.block()
        } else {
            Ok(Vec::new())
        }
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        if !matches!(self.peek(), Tok::Newline) {
            return self.simple_line();
        }
        self.pos += 1;
        if !matches!(self.peek(), Tok::Indent) {
            return self.error("expected an indented block");
        }
        self.pos += 1;
        let mut body = Vec::new();
        loop {
            match self.peek() {
                Tok::Dedent => {
                    self.pos += 1;
                    break;
                }
                Tok::Eof => break,
                Tok::Newline => self.pos += 1,
                _ => body.extend(self.statement()?),
            }
        }
        Ok(body)
    }

    /// One physical line of `;`-separated simple statements.
    fn simple_line(&mut self) -> PResult<Vec<Stmt>> {
        let mut out = vec![self.simple()?];
        while self.eat_op(";") {
            if matches!(self.peek(), Tok::Newline | Tok::Eof) {
                break;
            }
            out.push(self.simple()?);
        }
        self.end_of_simple()?;
        Ok(out)
    }

    fn simple(&mut self) -> PResult<Stmt> {
        let line = self.line();
        if let Tok::Name(kw) = self.peek().clone() {
            match kw.as_str() {
                "pass" | "break" | "continue" => {
                    self.pos += 1;
                    return Ok(Stmt::Pass);
                }
                "return" => {
                    self.pos += 1;
                    if matches!(self.peek(), Tok::Newline | Tok::Eof) || self.is_op(";") {
                        return Ok(Stmt::Return(None));
                    }
                    return Ok(Stmt::Return(Some(self.expr_list()?)));
                }
                "import" => {
                    self.pos += 1;
                    let mut out = Vec::new();
                    loop {
                        let module = self.dotted()?;
                        let alias = if self.eat_kw("as") { Some(self.name()?) } else { None };
                        out.push(Stmt::Import { module, alias });
                        if !self.eat_op(",") {
                            break;
                        }
                    }
                    // several modules on one line become consecutive imports
                    return Ok(if out.len() == 1 {
                        out.pop().expect("one import")
                    } else {
                        Stmt::If {
                            cond: Expr::Bool(true),
                            body: out,
                            orelse: Vec::new(),
                        }
                    });
                }
                "from" => {
                    self.pos += 1;
                    let mut module = String::new();
                    loop {
                        if self.eat_op(".") {
                            module.push('.');
                        } else if self.eat_op("...") {
                            module.push_str("...");
                        } else {
                            break;
                        }
                    }
                    if !self.is_kw("import") {
                        module.push_str(&self.dotted()?);
                    }
                    self.expect_kw("import")?;
                    let mut names = Vec::new();
                    if self.eat_op("*") {
                        names.push(("*".to_string(), None));
                    } else {
                        let paren = self.eat_op("(");
                        loop {
                            if paren && self.is_op(")") {
                                break;
                            }
                            let n = self.name()?;
                            let alias = if self.eat_kw("as") { Some(self.name()?) } else { None };
                            names.push((n, alias));
                            if !self.eat_op(",") {
                                break;
                            }
                        }
                        if paren {
                            self.expect_op(")")?;
                        }
                    }
                    return Ok(Stmt::FromImport { module, names });
                }
                "global" | "nonlocal" | "del" | "assert" | "raise" => {
                    self.pos += 1;
                    while !matches!(self.peek(), Tok::Newline | Tok::Eof) && !self.is_op(";") {
                        self.expr()?;
                        if !(self.eat_op(",") || self.eat_kw("from")) {
                            break;
                        }
                    }
                    return Ok(Stmt::Pass);
                }
                "print" if !matches!(self.peek_at(1), Tok::Op("(" | "=" | "." | "[")) => {
                    // legacy print statement
                    self.pos += 1;
                    if !matches!(self.peek(), Tok::Newline | Tok::Eof) {
                        self.eat_op(">>");
                        self.expr_list()?;
                    }
                    return Ok(Stmt::Pass);
                }
                _ => {}
            }
        }
        let first = self.expr_list()?;
        if self.is_op("=") {
            let mut targets = vec![first];
            let mut value;
            loop {
                self.expect_op("=")?;
                value = if self.is_kw("yield") { self.yield_expr()? } else { self.expr_list()? };
                if !self.is_op("=") {
                    break;
                }
                targets.push(value);
            }
            return Ok(Stmt::Assign { targets, value, line });
        }
        if self.eat_op(":") {
            // annotated assignment
            self.expr()?;
            if self.eat_op("=") {
                let value = self.expr_list()?;
                return Ok(Stmt::Assign {
                    targets: vec![first],
                    value,
                    line,
                });
            }
            return Ok(Stmt::Pass);
        }
        let aug = match self.peek() {
            Tok::Op("+=") => Some(BinOp::Add),
            Tok::Op("-=") => Some(BinOp::Sub),
            Tok::Op("*=") => Some(BinOp::Mul),
            Tok::Op("/=") => Some(BinOp::Div),
            Tok::Op("//=") => Some(BinOp::FloorDiv),
            Tok::Op("%=") => Some(BinOp::Mod),
            Tok::Op("**=") => Some(BinOp::Pow),
            Tok::Op("@=") => Some(BinOp::MatMul),
            Tok::Op("&=") => Some(BinOp::BitAnd),
            Tok::Op("|=") => Some(BinOp::BitOr),
            Tok::Op("^=") => Some(BinOp::BitXor),
            Tok::Op("<<=") => Some(BinOp::Shl),
            Tok::Op(">>=") => Some(BinOp::Shr),
            _ => None,
        };
        if let Some(op) = aug {
            self.pos += 1;
            let value = self.expr_list()?;
            return Ok(Stmt::AugAssign {
                target: first,
                op,
                value,
            });
        }
        Ok(Stmt::Expr(first))
    }

    fn dotted(&mut self) -> PResult<String> {
        let mut s = self.name()?;
        while self.eat_op(".") {
            s.push('.');
            s.push_str(&self.name()?);
        }
        Ok(s)
    }

    fn params(&mut self, close: &str) -> PResult<Vec<Param>> {
        let mut out = Vec::new();
        loop {
            if self.is_op(close) {
                break;
            }
            if self.eat_op("/") {
                // positional-only marker
            } else if self.is_op("*") && matches!(self.peek_at(1), Tok::Op(o) if *o == "," || *o == close) {
                // keyword-only marker
                self.pos += 1;
            } else {
                let starred = self.eat_op("**") || self.eat_op("*");
                let name = self.name()?;
                if close == ")" && self.eat_op(":") {
                    self.expr()?;
                }
                let default = if self.eat_op("=") { Some(self.expr()?) } else { None };
                if !starred {
                    out.push(Param { name, default });
                }
            }
            if !self.eat_op(",") {
                break;
            }
        }
        Ok(out)
    }

    fn target(&mut self) -> PResult<Expr> {
        self.binary(7)
    }

    fn target_list(&mut self) -> PResult<Expr> {
        let first = if self.eat_op("*") { Expr::Starred(Box::new(self.target()?)) } else { self.target()? };
        if !self.is_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.is_kw("in") || self.is_op("=") {
                break;
            }
            items.push(self.target()?);
        }
        Ok(Expr::Tuple(items))
    }

    /// Comma-separated expressions forming an implicit tuple.
    fn expr_list(&mut self) -> PResult<Expr> {
        let first = self.star_or_expr()?;
        if !self.is_op(",") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.ends_expr_list() {
                break;
            }
            items.push(self.star_or_expr()?);
        }
        Ok(Expr::Tuple(items))
    }

    fn ends_expr_list(&self) -> bool {
        matches!(self.peek(), Tok::Newline | Tok::Eof | Tok::Op("=" | ")" | "]" | "}" | ":" | ";"))
            || matches!(self.peek(), Tok::Op(o) if o.ends_with('=') && *o != "==")
    }

    fn star_or_expr(&mut self) -> PResult<Expr> {
        if self.eat_op("*") {
            return Ok(Expr::Starred(Box::new(self.binary(7)?)));
        }
        self.expr()
    }

    fn yield_expr(&mut self) -> PResult<Expr> {
        self.expect_kw("yield")?;
        self.eat_kw("from");
        if !matches!(self.peek(), Tok::Newline | Tok::Eof | Tok::Op(")")) {
            self.expr_list()?;
        }
        Ok(Expr::Opaque)
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        self.enter()?;
        let r = self.expr_inner();
        self.leave();
        r
    }

    fn expr_inner(&mut self) -> PResult<Expr> {
        if self.eat_kw("lambda") {
            self.params(":")?;
            self.expect_op(":")?;
            self.expr()?;
            return Ok(Expr::Opaque);
        }
        if self.is_kw("yield") {
            return self.yield_expr();
        }
        let e = self.or_test()?;
        if self.eat_op(":=") {
            return self.expr();
        }
        if self.is_kw("if") && !self.no_ternary() {
            self.pos += 1;
            let cond = self.or_test()?;
            self.expect_kw("else")?;
            let other = self.expr()?;
            return Ok(Expr::IfElse {
                cond: Box::new(cond),
                then: Box::new(e),
                other: Box::new(other),
            });
        }
        Ok(e)
    }

    /// Inside a comprehension, `if` introduces a filter rather than a ternary;
    /// a ternary always carries `else` before the closing bracket.
    fn no_ternary(&self) -> bool {
        let mut depth = 0usize;
        let mut i = self.pos + 1;
        while i < self.tokens.len() {
            match &self.tokens[i].tok {
                Tok::Op("(" | "[" | "{") => depth += 1,
                Tok::Op(")" | "]" | "}") => {
                    if depth == 0 {
                        return true;
                    }
                    depth -= 1;
                }
                Tok::Name(n) if depth == 0 && n == "else" => return false,
                Tok::Name(n) if depth == 0 && (n == "for" || n == "if") => return true,
                Tok::Op(",") if depth == 0 => return true,
                Tok::Newline | Tok::Eof => return true,
                _ => {}
            }
            i += 1;
        }
        true
    }

    fn or_test(&mut self) -> PResult<Expr> {
        let mut e = self.and_test()?;
        while self.eat_kw("or") {
            let r = self.and_test()?;
            e = Expr::Or(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn and_test(&mut self) -> PResult<Expr> {
        let mut e = self.not_test()?;
        while self.eat_kw("and") {
            let r = self.not_test()?;
            e = Expr::And(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn not_test(&mut self) -> PResult<Expr> {
        if self.eat_kw("not") {
            self.enter()?;
            let inner = self.not_test();
            self.leave();
            return Ok(Expr::Unary(UnaryOp::Not, Box::new(inner?)));
        }
        self.comparison()
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let mut e = self.binary(0)?;
        loop {
            let op = match self.peek() {
                Tok::Op("==") => CmpOp::Eq,
                Tok::Op("!=") => CmpOp::Ne,
                Tok::Op("<") => CmpOp::Lt,
                Tok::Op("<=") => CmpOp::Le,
                Tok::Op(">") => CmpOp::Gt,
                Tok::Op(">=") => CmpOp::Ge,
                Tok::Name(n) if n == "in" => CmpOp::In,
                Tok::Name(n) if n == "is" => {
                    if matches!(self.peek_at(1), Tok::Name(m) if m == "not") {
                        self.pos += 1;
                        CmpOp::IsNot
                    } else {
                        CmpOp::Is
                    }
                }
                Tok::Name(n) if n == "not" && matches!(self.peek_at(1), Tok::Name(m) if m == "in") => {
                    self.pos += 1;
                    CmpOp::NotIn
                }
                _ => break,
            };
            self.pos += 1;
            let r = self.binary(0)?;
            e = Expr::Compare(op, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    /// Binary operators by precedence level: `|`, `^`, `&`, shifts,
    /// additive, multiplicative; level 6 is unary and above.
    fn binary(&mut self, level: u8) -> PResult<Expr> {
        if level >= 6 {
            return self.unary();
        }
        let mut e = self.binary(level + 1)?;
        loop {
            let op = match (level, self.peek()) {
                (0, Tok::Op("|")) => BinOp::BitOr,
                (1, Tok::Op("^")) => BinOp::BitXor,
                (2, Tok::Op("&")) => BinOp::BitAnd,
                (3, Tok::Op("<<")) => BinOp::Shl,
                (3, Tok::Op(">>")) => BinOp::Shr,
                (4, Tok::Op("+")) => BinOp::Add,
                (4, Tok::Op("-")) => BinOp::Sub,
                (5, Tok::Op("*")) => BinOp::Mul,
                (5, Tok::Op("/")) => BinOp::Div,
                (5, Tok::Op("//")) => BinOp::FloorDiv,
                (5, Tok::Op("%")) => BinOp::Mod,
                (5, Tok::Op("@")) => BinOp::MatMul,
                _ => break,
            };
            self.pos += 1;
            let r = self.binary(level + 1)?;
            e = Expr::Binary(op, Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn unary(&mut self) -> PResult<Expr> {
        let op = match self.peek() {
            Tok::Op("-") => Some(UnaryOp::Neg),
            Tok::Op("+") => Some(UnaryOp::Pos),
            Tok::Op("~") => Some(UnaryOp::Invert),
            _ => None,
        };
        if let Some(op) = op {
            self.pos += 1;
            self.enter()?;
            let inner = self.unary();
            self.leave();
            return Ok(Expr::Unary(op, Box::new(inner?)));
        }
        self.power()
    }

    fn power(&mut self) -> PResult<Expr> {
        self.eat_kw("await");
        let base = self.primary()?;
        if self.eat_op("**") {
            self.enter()?;
            let exp = self.unary();
            self.leave();
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exp?)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let mut e = self.atom()?;
        loop {
            if self.is_op("(") {
                let line = self.line();
                self.pos += 1;
                let args = self.call_args()?;
                e = Expr::Call {
                    func: Box::new(e),
                    args,
                    line,
                };
            } else if self.eat_op("[") {
                let index = self.subscript()?;
                self.expect_op("]")?;
                e = Expr::Subscript(Box::new(e), Box::new(index));
            } else if self.eat_op(".") {
                let attr = match self.advance() {
                    Tok::Name(n) => n,
                    _ => return self.error("expected attribute name"),
                };
                e = Expr::Attr(Box::new(e), attr);
            } else {
                return Ok(e);
            }
        }
    }

    /// Arguments after an opening parenthesis, consuming the closing one.
    fn call_args(&mut self) -> PResult<Vec<Arg>> {
        let mut args = Vec::new();
        loop {
            if self.eat_op(")") {
                return Ok(args);
            }
            if self.eat_op("**") {
                args.push(Arg::DoubleStar(self.expr()?));
            } else if self.eat_op("*") {
                args.push(Arg::Star(self.expr()?));
            } else if matches!(self.peek(), Tok::Name(_)) && matches!(self.peek_at(1), Tok::Op("=")) {
                let name = self.name()?;
                self.pos += 1;
                args.push(Arg::Kw(name, self.expr()?));
            } else {
                let e = self.expr()?;
                if self.is_kw("for") || self.is_kw("async") {
                    self.comprehension()?;
                    args.push(Arg::Pos(Expr::Opaque));
                } else {
                    args.push(Arg::Pos(e));
                }
            }
            if !self.eat_op(",") {
                self.expect_op(")")?;
                return Ok(args);
            }
        }
    }

    fn subscript(&mut self) -> PResult<Expr> {
        let mut items = Vec::new();
        let mut slice = false;
        loop {
            if self.is_op("]") {
                break;
            }
            let mut part = None;
            if !self.is_op(":") {
                part = Some(self.star_or_expr()?);
            }
            if self.is_op(":") {
                slice = true;
                while self.eat_op(":") {
                    if !self.is_op(":") && !self.is_op("]") && !self.is_op(",") {
                        self.expr()?;
                    }
                }
            }
            items.push(part.unwrap_or(Expr::Slice));
            if !self.eat_op(",") {
                break;
            }
        }
        if slice {
            return Ok(Expr::Slice);
        }
        match items.len() {
            1 => Ok(items.pop().expect("one item")),
            _ => Ok(Expr::Tuple(items)),
        }
    }

    fn comprehension(&mut self) -> PResult<()> {
        while self.is_kw("for") || self.is_kw("async") {
            self.eat_kw("async");
            self.expect_kw("for")?;
            self.target_list()?;
            self.expect_kw("in")?;
            self.or_test()?;
            while self.eat_kw("if") {
                self.enter()?;
                let r = self.or_test();
                self.leave();
                r?;
            }
        }
        Ok(())
    }

    fn atom(&mut self) -> PResult<Expr> {
        let line = self.line();
        match self.advance() {
            Tok::Int(v) => Ok(Expr::Int(v)),
            Tok::Float(v) => Ok(Expr::Float(v)),
            Tok::Str(mut s) => {
                while let Tok::Str(more) = self.peek().clone() {
                    s.push_str(&more);
                    self.pos += 1;
                }
                Ok(Expr::Str(s))
            }
            Tok::Name(n) => match n.as_str() {
                "True" => Ok(Expr::Bool(true)),
                "False" => Ok(Expr::Bool(false)),
                "None" => Ok(Expr::NoneLit),
                _ if is_keyword(&n) => Err(FrontendError::Syntax {
                    line,
                    message: format!("unexpected keyword '{n}'"),
                }),
                _ => Ok(Expr::Name(n)),
            },
            Tok::Op("...") => Ok(Expr::Opaque),
            Tok::Op("(") => {
                self.enter()?;
                let r = self.paren();
                self.leave();
                r
            }
            Tok::Op("[") => {
                self.enter()?;
                let r = self.list();
                self.leave();
                r
            }
            Tok::Op("{") => {
                self.enter()?;
                let r = self.dict_or_set();
                self.leave();
                r
            }
            _ => {
                self.pos -= 1;
                self.error("expected an expression")
            }
        }
    }

    fn paren(&mut self) -> PResult<Expr> {
        if self.eat_op(")") {
            return Ok(Expr::Tuple(Vec::new()));
        }
        if self.is_kw("yield") {
            let e = self.yield_expr()?;
            self.expect_op(")")?;
            return Ok(e);
        }
        let first = self.star_or_expr()?;
        if self.is_kw("for") || self.is_kw("async") {
            self.comprehension()?;
            self.expect_op(")")?;
            return Ok(Expr::Opaque);
        }
        if self.eat_op(")") {
            return Ok(first);
        }
        let mut items = vec![first];
        while self.eat_op(",") {
            if self.is_op(")") {
                break;
            }
            items.push(self.star_or_expr()?);
        }
        self.expect_op(")")?;
        Ok(Expr::Tuple(items))
    }

    fn list(&mut self) -> PResult<Expr> {
        let mut items = Vec::new();
        loop {
            if self.eat_op("]") {
                return Ok(Expr::List(items));
            }
            let e = self.star_or_expr()?;
            if items.is_empty() && (self.is_kw("for") || self.is_kw("async")) {
                self.comprehension()?;
                self.expect_op("]")?;
                return Ok(Expr::Opaque);
            }
            items.push(e);
            if !self.eat_op(",") {
                self.expect_op("]")?;
                return Ok(Expr::List(items));
            }
        }
    }

    fn dict_or_set(&mut self) -> PResult<Expr> {
        let mut pairs = Vec::new();
        let mut is_set = false;
        loop {
            if self.eat_op("}") {
                break;
            }
            if self.eat_op("**") {
                self.expr()?;
                is_set = true;
            } else {
                let k = self.star_or_expr()?;
                if self.eat_op(":") {
                    let v = self.expr()?;
                    if self.is_kw("for") || self.is_kw("async") {
                        self.comprehension()?;
                        self.expect_op("}")?;
                        return Ok(Expr::Opaque);
                    }
                    pairs.push((k, v));
                } else {
                    is_set = true;
                    if self.is_kw("for") || self.is_kw("async") {
                        self.comprehension()?;
                        self.expect_op("}")?;
                        return Ok(Expr::Opaque);
                    }
                }
            }
            if !self.eat_op(",") {
                self.expect_op("}")?;
                break;
            }
        }
        if is_set {
            return Ok(Expr::Opaque);
        }
        Ok(Expr::Dict(pairs))
    }
}

fn is_keyword(n: &str) -> bool {
    matches!(
        n,
        "and"
            | "as"
            | "assert"
            | "break"
            | "class"
            | "continue"
            | "def"
            | "del"
            | "elif"
            | "else"
            | "except"
            | "finally"
            | "for"
            | "from"
            | "global"
            | "if"
            | "import"
            | "in"
            | "is"
            | "lambda"
            | "nonlocal"
            | "not"
            | "or"
            | "pass"
            | "raise"
            | "return"
            | "try"
            | "while"
            | "with"
            | "yield"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn one(src: &str) -> Stmt {
        let mut s = parse(src).unwrap();
        assert_eq!(s.len(), 1, "{s:?}");
        s.remove(0)
    }

    #[test]
    fn call_with_keywords() {
        let Stmt::Expr(Expr::Call { args, line, .. }) = one("Dense(10, activation='relu')\n") else {
            panic!()
        };
        assert_eq!(line, 1);
        assert_eq!(args[0], Arg::Pos(Expr::Int(10)));
        assert_eq!(args[1], Arg::Kw("activation".into(), Expr::Str("relu".into())));
    }

    #[test]
    fn tuple_assignment_and_for() {
        assert!(matches!(one("a, b = 1, 2"), Stmt::Assign { .. }));
        let Stmt::For { body, .. } = one("for i in range(3):\n    x = i\n    y = 2\n") else {
            panic!()
        };
        assert_eq!(body.len(), 2);
    }

    #[test]
    fn comprehensions_and_lambdas_are_opaque() {
        assert_eq!(one("x = [i for i in y if i]"), Stmt::Assign {
            targets: vec![Expr::Name("x".into())],
            value: Expr::Opaque,
            line: 1
        });
        assert!(parse("f = lambda a, b=1: a + b\n").is_ok());
        assert!(parse("s = sum(x * 2 for x in xs)\n").is_ok());
    }

    #[test]
    fn ternary_and_slices() {
        assert!(matches!(
            one("a = 1 if b else 2"),
            Stmt::Assign { value: Expr::IfElse { .. }, .. }
        ));
        assert!(parse("x = y[:, 1:3, ::2]\n").is_ok());
    }

    #[test]
    fn compound_statements() {
        let src = "@dec\ndef f(a, *args, b=2, **kw) -> int:\n    return a\nclass C(Base):\n    pass\ntry:\n    import x\nexcept ImportError as e:\n    pass\nfinally:\n    y = 1\nwith open(p) as fh, g() as h:\n    pass\nif a:\n    pass\nelif b:\n    pass\nelse:\n    pass\nwhile True:\n    break\n";
        assert_eq!(parse(src).unwrap().len(), 6);
    }

    #[test]
    fn imports() {
        assert_eq!(
            one("from keras.layers import Dense, Conv2D as C"),
            Stmt::FromImport {
                module: "keras.layers".into(),
                names: vec![("Dense".into(), None), ("Conv2D".into(), Some("C".into()))]
            }
        );
        assert_eq!(
            one("import tensorflow as tf"),
            Stmt::Import {
                module: "tensorflow".into(),
                alias: Some("tf".into())
            }
        );
    }

    #[test]
    fn deep_nesting_is_rejected_not_overflowed() {
        let src = format!("x = {}1{}\n", "(".repeat(5000), ")".repeat(5000));
        assert!(matches!(parse(&src), Err(FrontendError::Syntax { .. })));
        let src = format!("x = {}1\n", "-".repeat(5000));
        assert!(parse(&src).is_err());
        let src = format!("x = {}1\n", "not ".repeat(5000));
        assert!(parse(&src).is_err());
    }

    #[test]
    fn syntax_errors_carry_lines() {
        match parse("a = 1\nb = (\n") {
            Err(FrontendError::Syntax { .. }) => {}
            other => panic!("{other:?}"),
        }
        match parse("a = 1\nb = = 2\n") {
            Err(FrontendError::Syntax { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
