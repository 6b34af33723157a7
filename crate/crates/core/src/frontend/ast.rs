use crate::values::{ArithOp, CompareOp, TypeId, UnaryOp};

/// Constant appearing in source.
#[derive(Debug, Clone, PartialEq)]
pub enum Literal {
    Double(f64),
    Int(i32),
    Char(char),
    Bool(bool),
    Null,
    Type(TypeId),
    Str(String),
}

impl Literal {
    pub fn type_id(&self) -> TypeId {
        match self {
            Literal::Double(_) => TypeId::Double,
            Literal::Int(_) => TypeId::Int,
            Literal::Char(_) => TypeId::Char,
            Literal::Bool(_) => TypeId::Bool,
            Literal::Null => TypeId::Null,
            Literal::Type(_) => TypeId::Type,
            Literal::Str(_) => TypeId::String,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Lit(Literal),
    /// Parameter, local, global, labeled variable (inside star bodies) or
    /// function name; resolved by the compiler.
    Name(String),
    /// `LABEL.name`, only meaningful outside function bodies.
    Labeled {
        label: String,
        name: String,
    },
    Unary(UnaryOp, Box<Expr>),
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Compare(CompareOp, Box<Expr>, Box<Expr>),
    /// Short-circuit `&&`.
    And(Box<Expr>, Box<Expr>),
    /// Short-circuit `||`.
    Or(Box<Expr>, Box<Expr>),
    Cond {
        cond: Box<Expr>,
        then: Box<Body>,
        otherwise: Box<Body>,
    },
    Call {
        callee: Box<Expr>,
        args: Vec<Expr>,
    },
    Lambda {
        params: Vec<String>,
        body: Box<Expr>,
    },
    /// `[a, b]` or `[a, b | tail]`.
    List {
        items: Vec<Expr>,
        tail: Option<Box<Expr>>,
    },
    Json(Vec<(String, Expr)>),
    Index(Box<Expr>, Box<Expr>),
    /// `e[.]`
    Head(Box<Expr>),
    /// `e[>]`
    Tail(Box<Expr>),
    /// `e[>i]`
    SuffixAfter(Box<Expr>, Box<Expr>),
    Slice {
        target: Box<Expr>,
        lo: Option<Box<Expr>>,
        hi: Option<Box<Expr>>,
    },
    /// `e@type`
    TypeOf(Box<Expr>),
    /// `_len(e)`
    Len(Box<Expr>),
    /// `exc(e)`
    Exc(Box<Expr>),
    /// `<<(path)`
    ReadFile(String),
}

/// An expression decorated with setting/printing commands executed before
/// and after it.
#[derive(Debug, Clone, PartialEq)]
pub struct Body {
    pub pre: Vec<Block>,
    pub expr: Expr,
    pub post: Vec<Block>,
}

impl Body {
    pub fn plain(expr: Expr) -> Self {
        Body {
            pre: Vec::new(),
            expr,
            post: Vec::new(),
        }
    }

    pub fn has_blocks(&self) -> bool {
        !self.pre.is_empty() || !self.post.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AssignOp {
    Set,
    Add,
    Sub,
    Mul,
    Div,
}

impl AssignOp {
    pub fn symbol(self) -> &'static str {
        match self {
            AssignOp::Set => "=",
            AssignOp::Add => "+=",
            AssignOp::Sub => "-=",
            AssignOp::Mul => "*=",
            AssignOp::Div => "/=",
        }
    }

    pub fn arith(self) -> Option<ArithOp> {
        match self {
            AssignOp::Set => None,
            AssignOp::Add => Some(ArithOp::Add),
            AssignOp::Sub => Some(ArithOp::Sub),
            AssignOp::Mul => Some(ArithOp::Mul),
            AssignOp::Div => Some(ArithOp::Div),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Subscript {
    Head,
    Index(Expr),
}

/// Left-hand side of a setting command: `name` or `name[i][k]...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Target {
    pub name: String,
    pub path: Vec<Subscript>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Block {
    /// `{! target op= value !}`: a local setting command when the target is
    /// a plain local, a global setting command otherwise.
    Set {
        target: Target,
        op: AssignOp,
        value: Expr,
    },
    /// `{^ e ^}`
    Print(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    pub name: String,
    /// Expected arity when the parameter is a function, 0 otherwise.
    pub arity: u8,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FunctionDef {
    pub name: String,
    pub star: bool,
    pub params: Vec<Param>,
    pub ret_arity: u8,
    /// Labels listed as `<L*>` in the header.
    pub labels: Vec<String>,
    pub locals: Vec<String>,
    pub body: Body,
}

impl FunctionDef {
    pub fn signature(&self) -> String {
        let params: Vec<String> = self
            .params
            .iter()
            .map(|p| {
                if p.arity > 0 {
                    format!("{}/{}", p.name, p.arity)
                } else {
                    p.name.clone()
                }
            })
            .collect();
        let mut s = format!(
            "{}{}({})",
            self.name,
            if self.star { "*" } else { "" },
            params.join(", ")
        );
        if self.ret_arity > 0 {
            s.push_str(&format!("/{}", self.ret_arity));
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ServiceCommand {
    pub name: String,
    pub arg: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Assign {
        label: Option<String>,
        name: String,
        op: AssignOp,
        value: Expr,
    },
    LabelDecl {
        label: String,
        names: Vec<String>,
    },
    Function(FunctionDef),
    Query {
        expr: Expr,
        show_null: bool,
    },
    /// `>>(path)`; `None` restores console output.
    Redirect(Option<String>),
    Service(ServiceCommand),
}
