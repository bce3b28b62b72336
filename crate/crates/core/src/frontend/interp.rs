//! Abstract interpreter over the syntax tree. It never runs the script: it
//! resolves literal values where it can, records every library call it
//! meets as an [`ApiCall`], and tracks which calls each unknown value was
//! computed from.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use super::ast::{Arg, BinOp, CmpOp, Expr, Param, Stmt, UnaryOp};
use super::defaults;
use super::names::{canonical, is_dl_path, keras_bare_name};
use super::FrontendError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    None,
    List(Vec<Value>),
    Dict(Vec<(Value, Value)>),
    /// A module or attribute path such as `keras.layers.Dense`.
    Path(String),
    /// The result of recorded call `n`.
    Call(usize),
    /// An attribute of a non-path value, awaiting a method call.
    Method(Box<Value>, String),
    Func(usize),
    /// A sequence too long to materialize, known only by its length.
    Seq(usize),
    /// Unknown value computed from the given calls.
    Unknown(Rc<BTreeSet<usize>>),
}

impl Value {
    pub fn unknown() -> Value {
        Value::Unknown(Rc::new(BTreeSet::new()))
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(v) => Some(*v),
            Value::Bool(b) => Some(i64::from(*b)),
            _ => None,
        }
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(v) => Some(*v as f64),
            Value::Float(v) => Some(*v),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            Value::Int(v) => Some(*v != 0),
            Value::None => Some(false),
            Value::Str(s) => Some(!s.is_empty()),
            Value::List(v) => Some(!v.is_empty()),
            _ => None,
        }
    }

    /// Integer list, accepting `None` entries as `-1` when `none_as` is set.
    pub fn as_int_list(&self, none_as: Option<i64>) -> Option<Vec<i64>> {
        match self {
            Value::List(items) => items
                .iter()
                .map(|v| match v {
                    Value::None => none_as,
                    other => other.as_int(),
                })
                .collect(),
            _ => None,
        }
    }

    /// Calls this value was directly computed from.
    pub fn direct_deps(&self, out: &mut BTreeSet<usize>) {
        match self {
            Value::Call(i) => {
                out.insert(*i);
            }
            Value::Unknown(d) => out.extend(d.iter().copied()),
            Value::List(items) => items.iter().for_each(|v| v.direct_deps(out)),
            Value::Dict(items) => items.iter().for_each(|(k, v)| {
                k.direct_deps(out);
                v.direct_deps(out);
            }),
            Value::Method(recv, _) => recv.direct_deps(out),
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApiCall {
    /// Canonical path for module functions and classes; `.name` for a method
    /// call; `()` for calling the result of another call.
    pub callee: String,
    pub receiver: Option<Value>,
    pub args: Vec<Value>,
    pub kwargs: Vec<(String, Value)>,
    pub line: u32,
    pub in_loop: bool,
}

impl ApiCall {
    pub fn kwarg(&self, name: &str) -> Option<&Value> {
        self.kwargs.iter().rev().find(|(k, _)| k == name).map(|(_, v)| v)
    }

    /// Keyword argument `name`, else positional argument `pos`.
    pub fn arg(&self, name: &str, pos: usize) -> Option<&Value> {
        self.kwarg(name).or_else(|| self.args.get(pos))
    }

    pub fn method(&self) -> Option<&str> {
        self.callee.strip_prefix('.')
    }

    /// Calls this call's receiver and arguments were computed from.
    pub fn direct_deps(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        if let Some(r) = &self.receiver {
            r.direct_deps(&mut out);
        }
        self.args.iter().for_each(|v| v.direct_deps(&mut out));
        self.kwargs.iter().for_each(|(_, v)| v.direct_deps(&mut out));
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
    IntList(Vec<i64>),
    Unknown,
}

/// Module-level variable bindings after interpretation (last write wins).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct BindingTable {
    pub map: BTreeMap<String, Literal>,
}

impl BindingTable {
    pub fn get(&self, name: &str) -> Option<&Literal> {
        self.map.get(name)
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub max_unroll: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            max_unroll: defaults::MAX_UNROLL,
        }
    }
}

pub struct Trace {
    pub calls: Vec<ApiCall>,
    pub bindings: BindingTable,
}

struct FuncDef {
    name: String,
    params: Vec<Param>,
    body: Rc<Vec<Stmt>>,
}

enum Flow {
    Normal,
    Return(Value),
}

struct Interp {
    calls: Vec<ApiCall>,
    scopes: Vec<HashMap<String, Value>>,
    funcs: Vec<FuncDef>,
    call_sites: HashMap<String, usize>,
    star_modules: Vec<String>,
    loop_depth: usize,
    inline_depth: usize,
    statements: usize,
    opts: Options,
}

type IResult<T> = Result<T, FrontendError>;

fn unsupported(line: u32, message: impl Into<String>) -> FrontendError {
    FrontendError::UnsupportedConstruct {
        line,
        message: message.into(),
    }
}

pub fn interpret(stmts: &[Stmt], opts: Options) -> Result<Trace, FrontendError> {
    let mut call_sites = HashMap::new();
    count_call_sites(stmts, &mut call_sites);
    let mut it = Interp {
        calls: Vec::new(),
        scopes: vec![HashMap::new()],
        funcs: Vec::new(),
        call_sites,
        star_modules: Vec::new(),
        loop_depth: 0,
        inline_depth: 0,
        statements: 0,
        opts,
    };
    it.scopes[0].insert("__name__".into(), Value::Str("__main__".into()));
    it.block(stmts)?;
    let bindings = BindingTable {
        map: it.scopes[0]
            .iter()
            .filter(|(k, _)| k.as_str() != "__name__")
            .filter(|(_, v)| !matches!(v, Value::Path(_) | Value::Func(_)))
            .map(|(k, v)| (k.clone(), literal_of(v)))
            .collect(),
    };
    Ok(Trace {
        calls: it.calls,
        bindings,
    })
}

fn literal_of(v: &Value) -> Literal {
    match v {
        Value::Int(i) => Literal::Int(*i),
        Value::Float(f) => Literal::Float(*f),
        Value::Bool(b) => Literal::Bool(*b),
        Value::Str(s) => Literal::Text(s.clone()),
        other => other.as_int_list(None).map_or(Literal::Unknown, Literal::IntList),
    }
}

fn count_call_sites(stmts: &[Stmt], out: &mut HashMap<String, usize>) {
    fn expr(e: &Expr, out: &mut HashMap<String, usize>) {
        match e {
            Expr::Call { func, args, .. } => {
                if let Expr::Name(n) = func.as_ref() {
                    *out.entry(n.clone()).or_default() += 1;
                }
                expr(func, out);
                for a in args {
                    match a {
                        Arg::Pos(e) | Arg::Kw(_, e) | Arg::Star(e) | Arg::DoubleStar(e) => expr(e, out),
                    }
                }
            }
            Expr::Tuple(v) | Expr::List(v) => v.iter().for_each(|e| expr(e, out)),
            Expr::Dict(v) => v.iter().for_each(|(k, x)| {
                expr(k, out);
                expr(x, out);
            }),
            Expr::Attr(b, _) | Expr::Unary(_, b) | Expr::Starred(b) => expr(b, out),
            Expr::Subscript(a, b) | Expr::Binary(_, a, b) | Expr::Compare(_, a, b) | Expr::And(a, b) | Expr::Or(a, b) => {
                expr(a, out);
                expr(b, out);
            }
            Expr::IfElse { cond, then, other } => {
                expr(cond, out);
                expr(then, out);
                expr(other, out);
            }
            _ => {}
        }
    }
    for s in stmts {
        match s {
            Stmt::Expr(e) | Stmt::Return(Some(e)) => expr(e, out),
            Stmt::Assign { targets, value, .. } => {
                targets.iter().for_each(|t| expr(t, out));
                expr(value, out);
            }
            Stmt::AugAssign { target, value, .. } => {
                expr(target, out);
                expr(value, out);
            }
            Stmt::For { iter, body, orelse, .. } => {
                expr(iter, out);
                count_call_sites(body, out);
                count_call_sites(orelse, out);
            }
            Stmt::While { cond, body, orelse } | Stmt::If { cond, body, orelse } => {
                expr(cond, out);
                count_call_sites(body, out);
                count_call_sites(orelse, out);
            }
            Stmt::With { items, body } => {
                items.iter().for_each(|(c, _)| expr(c, out));
                count_call_sites(body, out);
            }
            Stmt::FunctionDef { params, body, .. } => {
                params.iter().filter_map(|p| p.default.as_ref()).for_each(|d| expr(d, out));
                count_call_sites(body, out);
            }
            Stmt::Try { body, orelse, finally } => {
                count_call_sites(body, out);
                count_call_sites(orelse, out);
                count_call_sites(finally, out);
            }
            _ => {}
        }
    }
}

fn merge_deps(vals: &[&Value]) -> Value {
    let mut deps = BTreeSet::new();
    for v in vals {
        v.direct_deps(&mut deps);
    }
    Value::Unknown(Rc::new(deps))
}

impl Interp {
    fn lookup(&self, name: &str) -> Option<Value> {
        for scope in self.scopes.iter().rev() {
            if let Some(v) = scope.get(name) {
                return Some(v.clone());
            }
        }
        None
    }

    fn bind(&mut self, name: &str, v: Value) {
        self.scopes
            .last_mut()
            .expect("scope stack never empty")
            .insert(name.to_string(), v);
    }

    fn tick(&mut self, line: u32) -> IResult<()> {
        self.statements += 1;
        if self.statements > defaults::STATEMENT_BUDGET {
            return Err(unsupported(line, "statement budget exhausted"));
        }
        Ok(())
    }

    fn block(&mut self, stmts: &[Stmt]) -> IResult<Flow> {
        for s in stmts {
            if let Flow::Return(v) = self.stmt(s)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn stmt(&mut self, s: &Stmt) -> IResult<Flow> {
        self.tick(stmt_line(s))?;
        match s {
            Stmt::Expr(e) => {
                self.eval(e)?;
            }
            Stmt::Assign { targets, value, .. } => {
                let v = self.eval(value)?;
                for t in targets {
                    self.assign(t, v.clone())?;
                }
            }
            Stmt::AugAssign { target, op, value } => {
                let cur = self.eval(target)?;
                let rhs = self.eval(value)?;
                let v = binop(*op, &cur, &rhs);
                self.assign(target, v)?;
            }
            Stmt::Import { module, alias } => match alias {
                Some(a) => self.bind(a, Value::Path(module.clone())),
                None => {
                    let head = module.split('.').next().unwrap_or(module).to_string();
                    self.bind(&head, Value::Path(head.clone()));
                }
            },
            Stmt::FromImport { module, names } => {
                for (n, alias) in names {
                    if n == "*" {
                        self.star_modules.push(module.clone());
                        continue;
                    }
                    let full = format!("{module}.{n}");
                    self.bind(alias.as_ref().unwrap_or(n), Value::Path(full));
                }
            }
            Stmt::For {
                target,
                iter,
                body,
                orelse,
                line,
            } => {
                let it = self.eval(iter)?;
                if let Flow::Return(v) = self.for_loop(target, &it, body, *line)? {
                    return Ok(Flow::Return(v));
                }
                return self.block(orelse);
            }
            Stmt::While { cond, body, orelse } => {
                let c = self.eval(cond)?;
                if c.as_bool() != Some(false) {
                    self.loop_depth += 1;
                    let r = self.block(body);
                    self.loop_depth -= 1;
                    if let Flow::Return(v) = r? {
                        return Ok(Flow::Return(v));
                    }
                }
                return self.block(orelse);
            }
            Stmt::If { cond, body, orelse } => {
                let c = self.eval(cond)?;
                match c.as_bool() {
                    Some(true) => return self.block(body),
                    Some(false) => return self.block(orelse),
                    // both branches; later writes win
                    None => {
                        if let Flow::Return(v) = self.block(body)? {
                            return Ok(Flow::Return(v));
                        }
                        return self.block(orelse);
                    }
                }
            }
            Stmt::With { items, body } => {
                for (ctx, var) in items {
                    let v = self.eval(ctx)?;
                    if let Some(t) = var {
                        self.assign(t, v)?;
                    }
                }
                return self.block(body);
            }
            Stmt::FunctionDef { name, params, body } => {
                self.funcs.push(FuncDef {
                    name: name.clone(),
                    params: params.clone(),
                    body: Rc::new(body.clone()),
                });
                let id = self.funcs.len() - 1;
                self.bind(name, Value::Func(id));
            }
            Stmt::ClassDef { name } => self.bind(name, Value::unknown()),
            Stmt::Return(e) => {
                let v = match e {
                    Some(e) => self.eval(e)?,
                    None => Value::None,
                };
                return Ok(Flow::Return(v));
            }
            Stmt::Try { body, orelse, finally } => {
                if let Flow::Return(v) = self.block(body)? {
                    return Ok(Flow::Return(v));
                }
                if let Flow::Return(v) = self.block(orelse)? {
                    return Ok(Flow::Return(v));
                }
                return self.block(finally);
            }
            Stmt::Pass => {}
        }
        Ok(Flow::Normal)
    }

    /// Unrolls loops over literal sequences whose body builds layers; any
    /// other loop body runs once with the loop variable unknown.
    fn for_loop(&mut self, target: &Expr, it: &Value, body: &[Stmt], line: u32) -> IResult<Flow> {
        let len = match it {
            Value::List(v) => Some(v.len()),
            Value::Seq(n) => Some(*n),
            _ => None,
        };
        if len == Some(0) {
            return Ok(Flow::Normal);
        }
        self.loop_depth += 1;
        let r = self.for_loop_inner(target, it, len, body, line);
        self.loop_depth -= 1;
        r
    }

    fn for_loop_inner(&mut self, target: &Expr, it: &Value, len: Option<usize>, body: &[Stmt], line: u32) -> IResult<Flow> {
        let unknown_item = || merge_deps(&[it]);
        let too_long = |n: usize, cap: usize| {
            unsupported(line, format!("loop builds layers over {n} iterations (limit {cap})"))
        };
        let start = self.calls.len();
        let Value::List(items) = it else {
            self.assign(target, unknown_item())?;
            let flow = self.block(body)?;
            if let Some(n) = len {
                if n > self.opts.max_unroll && self.calls[start..].iter().any(builds_layer) {
                    return Err(too_long(n, self.opts.max_unroll));
                }
            }
            return Ok(flow);
        };
        let saved_scopes = self.scopes.clone();
        self.assign(target, items[0].clone())?;
        let first = self.block(body)?;
        if !self.calls[start..].iter().any(builds_layer) {
            // not a builder loop: redo it once, abstractly
            self.calls.truncate(start);
            self.scopes = saved_scopes;
            self.assign(target, unknown_item())?;
            return self.block(body);
        }
        if items.len() > self.opts.max_unroll {
            return Err(too_long(items.len(), self.opts.max_unroll));
        }
        if let Flow::Return(v) = first {
            return Ok(Flow::Return(v));
        }
        for item in items.iter().skip(1) {
            self.assign(target, item.clone())?;
            if let Flow::Return(v) = self.block(body)? {
                return Ok(Flow::Return(v));
            }
        }
        Ok(Flow::Normal)
    }

    fn assign(&mut self, target: &Expr, v: Value) -> IResult<()> {
        match target {
            Expr::Name(n) => self.bind(n, v),
            Expr::Tuple(ts) | Expr::List(ts) => {
                let parts = match &v {
                    Value::List(items) if items.len() == ts.len() => Some(items.clone()),
                    _ => None,
                };
                for (i, t) in ts.iter().enumerate() {
                    let item = match &parts {
                        Some(p) => p[i].clone(),
                        None => merge_deps(&[&v]),
                    };
                    self.assign(t, item)?;
                }
            }
            Expr::Starred(t) => self.assign(t, merge_deps(&[&v]))?,
            Expr::Attr(base, _) | Expr::Subscript(base, _) => {
                self.eval(base)?;
            }
            _ => {}
        }
        Ok(())
    }

    fn eval(&mut self, e: &Expr) -> IResult<Value> {
        Ok(match e {
            Expr::Int(v) => Value::Int(*v),
            Expr::Float(v) => Value::Float(*v),
            Expr::Str(s) => Value::Str(s.clone()),
            Expr::Bool(b) => Value::Bool(*b),
            Expr::NoneLit => Value::None,
            Expr::Name(n) => self.name(n),
            Expr::Tuple(items) | Expr::List(items) => {
                let mut out = Vec::with_capacity(items.len());
                for item in items {
                    if let Expr::Starred(inner) = item {
                        match self.eval(inner)? {
                            Value::List(v) => out.extend(v),
                            other => return Ok(merge_deps(&[&other])),
                        }
                    } else {
                        out.push(self.eval(item)?);
                    }
                }
                Value::List(out)
            }
            Expr::Dict(pairs) => {
                let mut out = Vec::with_capacity(pairs.len());
                for (k, v) in pairs {
                    out.push((self.eval(k)?, self.eval(v)?));
                }
                Value::Dict(out)
            }
            Expr::Attr(base, attr) => match self.eval(base)? {
                Value::Path(p) => Value::Path(format!("{p}.{attr}")),
                other => Value::Method(Box::new(other), attr.clone()),
            },
            Expr::Call { func, args, line } => self.call(func, args, *line)?,
            Expr::Subscript(base, index) => {
                let b = self.eval(base)?;
                let i = self.eval(index)?;
                subscript(&b, &i)
            }
            Expr::Slice | Expr::Opaque => Value::unknown(),
            Expr::Binary(op, a, b) => {
                let a = self.eval(a)?;
                let b = self.eval(b)?;
                binop(*op, &a, &b)
            }
            Expr::Unary(op, a) => {
                let a = self.eval(a)?;
                match (op, &a) {
                    (UnaryOp::Neg, Value::Int(v)) => v.checked_neg().map_or_else(Value::unknown, Value::Int),
                    (UnaryOp::Neg, Value::Float(v)) => Value::Float(-v),
                    (UnaryOp::Pos, Value::Int(_) | Value::Float(_)) => a.clone(),
                    (UnaryOp::Not, v) => match v.as_bool() {
                        Some(b) => Value::Bool(!b),
                        None => merge_deps(&[v]),
                    },
                    _ => merge_deps(&[&a]),
                }
            }
            Expr::Compare(op, a, b) => {
                let a = self.eval(a)?;
                let b = self.eval(b)?;
                compare(*op, &a, &b)
            }
            Expr::And(a, b) => {
                let a = self.eval(a)?;
                match a.as_bool() {
                    Some(false) => a,
                    Some(true) => self.eval(b)?,
                    None => {
                        let b = self.eval(b)?;
                        merge_deps(&[&a, &b])
                    }
                }
            }
            Expr::Or(a, b) => {
                let a = self.eval(a)?;
                match a.as_bool() {
                    Some(true) => a,
                    Some(false) => self.eval(b)?,
                    None => {
                        let b = self.eval(b)?;
                        merge_deps(&[&a, &b])
                    }
                }
            }
            Expr::IfElse { cond, then, other } => {
                let c = self.eval(cond)?;
                match c.as_bool() {
                    Some(true) => self.eval(then)?,
                    Some(false) => self.eval(other)?,
                    None => {
                        let t = self.eval(then)?;
                        let o = self.eval(other)?;
                        if t == o {
                            t
                        } else {
                            merge_deps(&[&c, &t, &o])
                        }
                    }
                }
            }
            Expr::Starred(inner) => {
                let v = self.eval(inner)?;
                merge_deps(&[&v])
            }
        })
    }

    fn name(&self, n: &str) -> Value {
        if let Some(v) = self.lookup(n) {
            return v;
        }
        for m in &self.star_modules {
            let p = format!("{m}.{n}");
            if is_dl_path(&canonical(&p)) {
                return Value::Path(p);
            }
        }
        if let Some(p) = keras_bare_name(n) {
            return Value::Path(p);
        }
        if is_builtin(n) {
            return Value::Path(format!("builtins.{n}"));
        }
        Value::unknown()
    }

    fn call(&mut self, func: &Expr, args: &[Arg], line: u32) -> IResult<Value> {
        let f = self.eval(func)?;
        let mut pos = Vec::new();
        let mut kw = Vec::new();
        let mut spread = false;
        for a in args {
            match a {
                Arg::Pos(e) => pos.push(self.eval(e)?),
                Arg::Kw(k, e) => kw.push((k.clone(), self.eval(e)?)),
                Arg::Star(e) => {
                    spread = true;
                    match self.eval(e)? {
                        Value::List(items) => {
                            spread = false;
                            pos.extend(items);
                        }
                        other => pos.push(merge_deps(&[&other])),
                    }
                }
                Arg::DoubleStar(e) => {
                    spread = true;
                    match self.eval(e)? {
                        Value::Dict(items) if items.iter().all(|(k, _)| k.as_str().is_some()) => {
                            spread = false;
                            for (k, v) in items {
                                kw.push((k.as_str().unwrap_or_default().to_string(), v));
                            }
                        }
                        other => pos.push(merge_deps(&[&other])),
                    }
                }
            }
        }
        match f {
            Value::Path(p) => {
                if let Some(name) = p.strip_prefix("builtins.") {
                    if let Some(v) = builtin(name, &pos) {
                        return Ok(v);
                    }
                }
                let callee = canonical(&p);
                if spread && is_dl_path(&callee) {
                    return Err(unsupported(line, format!("unresolvable argument unpacking in call to {callee}")));
                }
                Ok(self.record(callee, None, pos, kw, line))
            }
            Value::Method(recv, name) => Ok(self.record(format!(".{name}"), Some(*recv), pos, kw, line)),
            Value::Func(id) => self.call_function(id, pos, kw),
            Value::Call(_) => Ok(self.record("()".into(), Some(f), pos, kw, line)),
            other => {
                let mut all: Vec<&Value> = vec![&other];
                all.extend(pos.iter());
                all.extend(kw.iter().map(|(_, v)| v));
                Ok(merge_deps(&all))
            }
        }
    }

    fn record(&mut self, callee: String, receiver: Option<Value>, args: Vec<Value>, kwargs: Vec<(String, Value)>, line: u32) -> Value {
        self.calls.push(ApiCall {
            callee,
            receiver,
            args,
            kwargs,
            line,
            in_loop: self.loop_depth > 0,
        });
        Value::Call(self.calls.len() - 1)
    }

    fn call_function(&mut self, id: usize, pos: Vec<Value>, kw: Vec<(String, Value)>) -> IResult<Value> {
        let (name, params, body) = {
            let f = &self.funcs[id];
            (f.name.clone(), f.params.clone(), Rc::clone(&f.body))
        };
        let single_site = self.call_sites.get(&name).copied() == Some(1);
        if !single_site || self.inline_depth >= defaults::MAX_INLINE_DEPTH {
            let mut all: Vec<&Value> = pos.iter().collect();
            all.extend(kw.iter().map(|(_, v)| v));
            return Ok(merge_deps(&all));
        }
        let mut frame = HashMap::new();
        for (i, p) in params.iter().enumerate() {
            let v = match (kw.iter().rev().find(|(k, _)| *k == p.name), pos.get(i)) {
                (Some((_, v)), _) => v.clone(),
                (None, Some(v)) => v.clone(),
                (None, None) => match &p.default {
                    Some(d) => self.eval(d)?,
                    None => Value::unknown(),
                },
            };
            frame.insert(p.name.clone(), v);
        }
        self.scopes.push(frame);
        self.inline_depth += 1;
        let r = self.block(&body);
        self.inline_depth -= 1;
        self.scopes.pop();
        Ok(match r? {
            Flow::Return(v) => v,
            Flow::Normal => Value::None,
        })
    }
}

fn stmt_line(s: &Stmt) -> u32 {
    match s {
        Stmt::Assign { line, .. } | Stmt::For { line, .. } => *line,
        _ => 0,
    }
}

/// Calls that contribute a layer to a model.
fn builds_layer(c: &ApiCall) -> bool {
    c.method() == Some("add") || super::names::layer_kind(&c.callee).is_some()
}

fn is_builtin(n: &str) -> bool {
    matches!(
        n,
        "range" | "len" | "int" | "float" | "str" | "list" | "tuple" | "print" | "min" | "max" | "abs" | "zip" | "enumerate" | "bool" | "round"
    )
}

fn builtin(name: &str, args: &[Value]) -> Option<Value> {
    let ints: Option<Vec<i64>> = args.iter().map(Value::as_int).collect();
    match name {
        "range" => {
            let ints = ints?;
            let (start, stop, step) = match ints.as_slice() {
                [stop] => (0, *stop, 1),
                [start, stop] => (*start, *stop, 1),
                [start, stop, step] if *step != 0 => (*start, *stop, *step),
                _ => return None,
            };
            let len = if step > 0 {
                (stop.saturating_sub(start).max(0) + step - 1) / step
            } else {
                (start.saturating_sub(stop).max(0) + (-step) - 1) / (-step)
            };
            let len = usize::try_from(len).ok()?;
            if len > defaults::MAX_LIST {
                return Some(Value::Seq(len));
            }
            Some(Value::List((0..len as i64).map(|i| Value::Int(start + i * step)).collect()))
        }
        "len" => match args.first()? {
            Value::List(v) => Some(Value::Int(v.len() as i64)),
            Value::Str(s) => Some(Value::Int(s.chars().count() as i64)),
            _ => None,
        },
        "int" => match args.first()? {
            Value::Int(v) => Some(Value::Int(*v)),
            Value::Float(f) if f.is_finite() && f.abs() < 9.0e18 => Some(Value::Int(f.trunc() as i64)),
            Value::Bool(b) => Some(Value::Int(i64::from(*b))),
            Value::Str(s) => s.trim().parse().ok().map(Value::Int),
            _ => None,
        },
        "float" => args.first()?.as_f64().map(Value::Float),
        "bool" => args.first()?.as_bool().map(Value::Bool),
        "round" => match args.first()? {
            Value::Float(f) if f.is_finite() && f.abs() < 9.0e18 => Some(Value::Int(f.round() as i64)),
            Value::Int(v) => Some(Value::Int(*v)),
            _ => None,
        },
        "str" => match args.first()? {
            Value::Str(s) => Some(Value::Str(s.clone())),
            Value::Int(v) => Some(Value::Str(v.to_string())),
            _ => None,
        },
        "list" | "tuple" => match args.first() {
            None => Some(Value::List(Vec::new())),
            Some(Value::List(v)) => Some(Value::List(v.clone())),
            _ => None,
        },
        "print" => Some(Value::None),
        "abs" => match args.first()? {
            Value::Int(v) => v.checked_abs().map(Value::Int),
            Value::Float(f) => Some(Value::Float(f.abs())),
            _ => None,
        },
        "min" | "max" => {
            let list = match args {
                [Value::List(v)] => v.iter().map(Value::as_int).collect::<Option<Vec<_>>>()?,
                _ => ints?,
            };
            let v = if name == "min" { list.into_iter().min()? } else { list.into_iter().max()? };
            Some(Value::Int(v))
        }
        "zip" => {
            let lists: Vec<&Vec<Value>> = args
                .iter()
                .map(|a| match a {
                    Value::List(v) => Some(v),
                    _ => None,
                })
                .collect::<Option<_>>()?;
            let n = lists.iter().map(|l| l.len()).min().unwrap_or(0);
            Some(Value::List(
                (0..n).map(|i| Value::List(lists.iter().map(|l| l[i].clone()).collect())).collect(),
            ))
        }
        "enumerate" => match args.first()? {
            Value::List(v) => Some(Value::List(
                v.iter()
                    .enumerate()
                    .map(|(i, x)| Value::List(vec![Value::Int(i as i64), x.clone()]))
                    .collect(),
            )),
            _ => None,
        },
        _ => None,
    }
}

fn subscript(b: &Value, i: &Value) -> Value {
    match (b, i) {
        (Value::List(items), Value::Int(k)) => {
            let n = items.len() as i64;
            let idx = if *k < 0 { n + k } else { *k };
            if (0..n).contains(&idx) {
                return items[idx as usize].clone();
            }
            Value::unknown()
        }
        (Value::Dict(pairs), key) if !matches!(key, Value::Unknown(_)) => pairs
            .iter()
            .rev()
            .find(|(k, _)| k == key)
            .map_or_else(|| merge_deps(&[b]), |(_, v)| v.clone()),
        _ => merge_deps(&[b, i]),
    }
}

fn binop(op: BinOp, a: &Value, b: &Value) -> Value {
    use Value::{Float, Int, List, Str};
    let r = match (op, a, b) {
        (BinOp::Add, Int(x), Int(y)) => x.checked_add(*y).map(Int),
        (BinOp::Sub, Int(x), Int(y)) => x.checked_sub(*y).map(Int),
        (BinOp::Mul, Int(x), Int(y)) => x.checked_mul(*y).map(Int),
        (BinOp::FloorDiv, Int(x), Int(y)) if *y != 0 => x.checked_div(*y).map(|q| {
            if x % y != 0 && ((*x < 0) != (*y < 0)) {
                Int(q - 1)
            } else {
                Int(q)
            }
        }),
        (BinOp::Mod, Int(x), Int(y)) if *y != 0 => x.checked_rem(*y).map(|r| {
            if r != 0 && ((r < 0) != (*y < 0)) {
                Int(r + y)
            } else {
                Int(r)
            }
        }),
        (BinOp::Pow, Int(x), Int(y)) if (0..=62).contains(y) => x.checked_pow(*y as u32).map(Int),
        (BinOp::Div, _, _) => match (a.as_f64(), b.as_f64()) {
            (Some(x), Some(y)) if y != 0.0 => Some(Float(x / y)),
            _ => None,
        },
        (BinOp::Add | BinOp::Sub | BinOp::Mul | BinOp::Pow, _, _) if a.as_f64().is_some() && b.as_f64().is_some() => {
            let (x, y) = (a.as_f64().unwrap_or(0.0), b.as_f64().unwrap_or(0.0));
            Some(Float(match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                _ => x.powf(y),
            }))
        }
        (BinOp::Add, Str(x), Str(y)) => Some(Str(format!("{x}{y}"))),
        (BinOp::Add, List(x), List(y)) if x.len() + y.len() <= defaults::MAX_LIST => {
            Some(List(x.iter().chain(y.iter()).cloned().collect()))
        }
        (BinOp::Mul, List(x), Int(n)) | (BinOp::Mul, Int(n), List(x)) => {
            let n = usize::try_from(*n).unwrap_or(0);
            if x.len().saturating_mul(n) <= defaults::MAX_LIST {
                Some(List(x.iter().cloned().cycle().take(x.len() * n).collect()))
            } else {
                None
            }
        }
        (BinOp::Mod, Str(_), _) => Some(Str(String::new())),
        _ => None,
    };
    r.unwrap_or_else(|| merge_deps(&[a, b]))
}

fn compare(op: CmpOp, a: &Value, b: &Value) -> Value {
    let known = |v: &Value| matches!(v, Value::Int(_) | Value::Float(_) | Value::Bool(_) | Value::Str(_) | Value::None);
    match op {
        CmpOp::Eq | CmpOp::Ne | CmpOp::Is | CmpOp::IsNot if known(a) && known(b) => {
            let eq = match (a.as_f64(), b.as_f64()) {
                (Some(x), Some(y)) if !matches!(a, Value::Bool(_)) && !matches!(b, Value::Bool(_)) => x == y,
                _ => a == b,
            };
            Value::Bool(if matches!(op, CmpOp::Eq | CmpOp::Is) { eq } else { !eq })
        }
        CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge => match (a.as_f64(), b.as_f64()) {
            (Some(x), Some(y)) => Value::Bool(match op {
                CmpOp::Lt => x < y,
                CmpOp::Le => x <= y,
                CmpOp::Gt => x > y,
                _ => x >= y,
            }),
            _ => merge_deps(&[a, b]),
        },
        CmpOp::In | CmpOp::NotIn => match b {
            Value::List(items) if known(a) && items.iter().all(known) => {
                let found = items.contains(a);
                Value::Bool(if op == CmpOp::In { found } else { !found })
            }
            _ => merge_deps(&[a, b]),
        },
        _ => merge_deps(&[a, b]),
    }
}

#[cfg(test)]
mod tests {
    use super::super::parser::parse;
    use super::*;

    fn run(src: &str) -> Trace {
        interpret(&parse(src).unwrap(), Options::default()).unwrap()
    }

    #[test]
    fn resolves_bound_names_at_call_sites() {
        let t = run("from keras.layers import Conv2D\nk = 5\nConv2D(32, (k, k))\n");
        assert_eq!(t.calls.len(), 1);
        assert_eq!(t.calls[0].callee, "keras.layers.Conv2D");
        assert_eq!(t.calls[0].args[1].as_int_list(None), Some(vec![5, 5]));
        assert_eq!(t.bindings.get("k"), Some(&Literal::Int(5)));
    }

    #[test]
    fn unrolls_layer_building_loops() {
        let t = run("model = Sequential()\nfor i in range(2):\n    model.add(Dense(64))\n");
        let dense = t.calls.iter().filter(|c| c.callee == "keras.layers.Dense").count();
        assert_eq!(dense, 2);
        assert!(t.calls.iter().filter(|c| c.callee == "keras.layers.Dense").all(|c| c.in_loop));
    }

    #[test]
    fn non_building_loops_run_once_abstractly() {
        let t = run("import tensorflow as tf\nfor i in range(20000):\n    sess.run(step, feed_dict={x: i})\n");
        assert_eq!(t.calls.len(), 1);
        assert!(t.calls[0].in_loop);
        assert_eq!(t.calls[0].callee, ".run");
    }

    #[test]
    fn long_builder_loops_are_rejected() {
        let src = "model = Sequential()\nfor i in range(100):\n    model.add(Dense(8))\n";
        let err = interpret(&parse(src).unwrap(), Options::default()).err();
        assert!(matches!(err, Some(FrontendError::UnsupportedConstruct { line: 2, .. })));
        let ok = interpret(&parse(src).unwrap(), Options { max_unroll: 100 });
        assert!(ok.is_ok());
    }

    #[test]
    fn empty_script() {
        let t = run("");
        assert!(t.calls.is_empty());
        assert!(t.bindings.is_empty());
    }

    #[test]
    fn single_call_site_functions_are_inlined() {
        let t = run("def build(n):\n    m = Sequential()\n    m.add(Dense(n))\n    return m\nmodel = build(7)\nmodel.fit(x, y)\n");
        let dense = t.calls.iter().find(|c| c.callee == "keras.layers.Dense").unwrap();
        assert_eq!(dense.args[0], Value::Int(7));
        let fit = t.calls.iter().find(|c| c.method() == Some("fit")).unwrap();
        assert_eq!(fit.receiver, Some(Value::Call(0)));
    }

    #[test]
    fn functions_called_twice_are_not_inlined() {
        let t = run("def build():\n    Dense(3)\nbuild()\nbuild()\n");
        assert!(t.calls.is_empty());
    }

    #[test]
    fn unknown_conditions_take_both_branches() {
        let t = run("if K.image_data_format() == 'channels_first':\n    s = (1, 28, 28)\nelse:\n    s = (28, 28, 1)\n");
        assert_eq!(t.bindings.get("s"), Some(&Literal::IntList(vec![28, 28, 1])));
    }

    #[test]
    fn dependencies_flow_through_arithmetic() {
        let t = run("import tensorflow as tf\na = tf.matmul(x, w)\nb = a + bias\nc = tf.nn.relu(b)\n");
        let relu = &t.calls[1];
        let mut deps = BTreeSet::new();
        relu.args[0].direct_deps(&mut deps);
        assert!(deps.contains(&0));
    }

    #[test]
    fn aliases_canonicalize() {
        let t = run("import tensorflow.compat.v1 as tf\nfrom tensorflow.keras import layers\ntf.placeholder(tf.float32)\nlayers.Convolution2D(8, 3)\n");
        assert_eq!(t.calls[0].callee, "tf.placeholder");
        assert_eq!(t.calls[1].callee, "keras.layers.Conv2D");
    }

    #[test]
    fn star_args_into_library_calls_are_unsupported() {
        let err = interpret(&parse("from keras.layers import Dense\nDense(**cfg)\n").unwrap(), Options::default()).err();
        assert!(matches!(err, Some(FrontendError::UnsupportedConstruct { line: 2, .. })));
    }
}
