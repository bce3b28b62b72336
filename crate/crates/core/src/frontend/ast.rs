//! Syntax tree for the supported Python subset.

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Name(String),
    Int(i64),
    Float(f64),
    Str(String),
    Bool(bool),
    NoneLit,
    Tuple(Vec<Expr>),
    List(Vec<Expr>),
    Dict(Vec<(Expr, Expr)>),
    Attr(Box<Expr>, String),
    Call { func: Box<Expr>, args: Vec<Arg>, line: u32 },
    Subscript(Box<Expr>, Box<Expr>),
    Slice,
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Unary(UnaryOp, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    IfElse { cond: Box<Expr>, then: Box<Expr>, other: Box<Expr> },
    Starred(Box<Expr>),
    /// Lambdas, comprehensions, sets, yields: parsed but never evaluated.
    Opaque,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    FloorDiv,
    Mod,
    Pow,
    MatMul,
    BitOr,
    BitAnd,
    BitXor,
    Shl,
    Shr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Pos,
    Not,
    Invert,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    NotIn,
    Is,
    IsNot,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Arg {
    Pos(Expr),
    Kw(String, Expr),
    Star(Expr),
    DoubleStar(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    pub default: Option<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Stmt {
    Expr(Expr),
    Assign { targets: Vec<Expr>, value: Expr, line: u32 },
    AugAssign { target: Expr, op: BinOp, value: Expr },
    Import { module: String, alias: Option<String> },
    FromImport { module: String, names: Vec<(String, Option<String>)> },
    For { target: Expr, iter: Expr, body: Vec<Stmt>, orelse: Vec<Stmt>, line: u32 },
    While { cond: Expr, body: Vec<Stmt>, orelse: Vec<Stmt> },
    If { cond: Expr, body: Vec<Stmt>, orelse: Vec<Stmt> },
    With { items: Vec<(Expr, Option<Expr>)>, body: Vec<Stmt> },
    FunctionDef { name: String, params: Vec<Param>, body: Vec<Stmt> },
    ClassDef { name: String },
    Return(Option<Expr>),
    Try { body: Vec<Stmt>, orelse: Vec<Stmt>, finally: Vec<Stmt> },
    Pass,
}
