//! Abstract syntax of LDL expressions and types.
//!
//! Binders use a locally nameless representation: variables bound inside an
//! expression are de Bruijn indices (`Bound`), while variables that refer to
//! the surrounding bound context are kept by name (`Free`). Names stored on
//! binders and bound occurrences are display hints only; alpha-equivalence
//! ignores them.

use std::collections::BTreeSet;
use std::fmt;

/// Source location of a node, carried for diagnostics only.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LdlType {
    /// Function type; the domain is always a simple type.
    Fun(Box<LdlType>, Box<LdlType>),
    Bool,
    Real,
    Vec(usize),
    Index(usize),
}

impl LdlType {
    pub fn fun(domain: LdlType, codomain: LdlType) -> Self {
        LdlType::Fun(Box::new(domain), Box::new(codomain))
    }

    /// Builds `a1 -> a2 -> ... -> result`.
    pub fn curried(params: impl IntoIterator<Item = LdlType>, result: LdlType) -> Self {
        let params: Vec<_> = params.into_iter().collect();
        params
            .into_iter()
            .rev()
            .fold(result, |acc, p| LdlType::fun(p, acc))
    }

    pub fn is_function(&self) -> bool {
        matches!(self, LdlType::Fun(..))
    }

    pub fn is_simple(&self) -> bool {
        !self.is_function()
    }

    /// Parameter types and final codomain of a (possibly curried) function type.
    pub fn uncurry(&self) -> (Vec<&LdlType>, &LdlType) {
        let mut params = Vec::new();
        let mut cur = self;
        while let LdlType::Fun(d, c) = cur {
            params.push(d.as_ref());
            cur = c;
        }
        (params, cur)
    }

    /// Number of reals needed to represent a value of this simple type.
    pub fn real_dim(&self) -> Option<usize> {
        match self {
            LdlType::Real => Some(1),
            LdlType::Vec(n) => Some(*n),
            _ => None,
        }
    }

    /// Checks the grammar restrictions: simple function domains and sizes >= 1.
    pub fn well_formed(&self) -> bool {
        match self {
            LdlType::Fun(d, c) => d.is_simple() && d.well_formed() && c.well_formed(),
            LdlType::Vec(n) | LdlType::Index(n) => *n >= 1,
            LdlType::Bool | LdlType::Real => true,
        }
    }
}

impl fmt::Display for LdlType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LdlType::Fun(d, c) => write!(f, "{d} -> {c}"),
            LdlType::Bool => f.write_str("Bool"),
            LdlType::Real => f.write_str("Real"),
            LdlType::Vec(n) => write!(f, "Vec {n}"),
            LdlType::Index(n) => write!(f, "Index {n}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BuiltinOp {
    And,
    Or,
    Not,
    Implies,
    Add,
    Neg,
    Mul,
    Eq,
    Neq,
    Leq,
    Geq,
    Lt,
    Gt,
    Lookup,
}

impl BuiltinOp {
    pub const ALL: [BuiltinOp; 14] = [
        BuiltinOp::And,
        BuiltinOp::Or,
        BuiltinOp::Not,
        BuiltinOp::Implies,
        BuiltinOp::Add,
        BuiltinOp::Neg,
        BuiltinOp::Mul,
        BuiltinOp::Eq,
        BuiltinOp::Neq,
        BuiltinOp::Leq,
        BuiltinOp::Geq,
        BuiltinOp::Lt,
        BuiltinOp::Gt,
        BuiltinOp::Lookup,
    ];

    pub const COMPARISONS: [BuiltinOp; 6] = [
        BuiltinOp::Eq,
        BuiltinOp::Neq,
        BuiltinOp::Leq,
        BuiltinOp::Geq,
        BuiltinOp::Lt,
        BuiltinOp::Gt,
    ];

    pub fn arity(self) -> usize {
        match self {
            BuiltinOp::Not | BuiltinOp::Neg => 1,
            _ => 2,
        }
    }

    pub fn is_comparison(self) -> bool {
        Self::COMPARISONS.contains(&self)
    }

    /// Concrete-syntax spelling.
    pub fn symbol(self) -> &'static str {
        match self {
            BuiltinOp::And => "and",
            BuiltinOp::Or => "or",
            BuiltinOp::Not => "not",
            BuiltinOp::Implies => "=>",
            BuiltinOp::Add => "+",
            BuiltinOp::Neg => "-",
            BuiltinOp::Mul => "*",
            BuiltinOp::Eq => "==",
            BuiltinOp::Neq => "!=",
            BuiltinOp::Leq => "<=",
            BuiltinOp::Geq => ">=",
            BuiltinOp::Lt => "<",
            BuiltinOp::Gt => ">",
            BuiltinOp::Lookup => "!",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BoolLit {
    Top,
    Bottom,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Quantifier {
    Forall,
    Exists,
}

impl Quantifier {
    pub fn keyword(self) -> &'static str {
        match self {
            Quantifier::Forall => "forall",
            Quantifier::Exists => "exists",
        }
    }

    pub fn dual(self) -> Self {
        match self {
            Quantifier::Forall => Quantifier::Exists,
            Quantifier::Exists => Quantifier::Forall,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Binder {
    pub name: String,
    pub ty: LdlType,
}

impl Binder {
    pub fn new(name: impl Into<String>, ty: LdlType) -> Self {
        Binder {
            name: name.into(),
            ty,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    /// Variable bound by an enclosing binder of this expression.
    Bound { name: String, index: usize },
    /// Variable looked up by name in the bound context.
    Free(String),
    Network(String),
    Real(f64),
    Index(usize),
    Bool(BoolLit),
    App(Box<Expr>, Box<Expr>),
    Lam(Binder, Box<Expr>),
    /// `let x : T = bound in body`; only `body` is under the binder.
    Let(Binder, Box<Expr>, Box<Expr>),
    Op(BuiltinOp),
    Vec(Vec<Expr>),
    Quant(Quantifier, Binder, Box<Expr>),
}

/// An LDL expression. Equality ignores spans.
#[derive(Clone, Debug)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

impl From<ExprKind> for Expr {
    fn from(kind: ExprKind) -> Self {
        Expr {
            kind,
            span: Span::default(),
        }
    }
}

impl Expr {
    pub fn with_span(mut self, span: Span) -> Self {
        self.span = span;
        self
    }

    pub fn real(v: f64) -> Self {
        ExprKind::Real(v).into()
    }

    pub fn index(i: usize) -> Self {
        ExprKind::Index(i).into()
    }

    pub fn top() -> Self {
        ExprKind::Bool(BoolLit::Top).into()
    }

    pub fn bottom() -> Self {
        ExprKind::Bool(BoolLit::Bottom).into()
    }

    pub fn free(name: impl Into<String>) -> Self {
        ExprKind::Free(name.into()).into()
    }

    pub fn network(name: impl Into<String>) -> Self {
        ExprKind::Network(name.into()).into()
    }

    pub fn op(op: BuiltinOp) -> Self {
        ExprKind::Op(op).into()
    }

    pub fn app(f: Expr, arg: Expr) -> Self {
        ExprKind::App(Box::new(f), Box::new(arg)).into()
    }

    pub fn apps(f: Expr, args: impl IntoIterator<Item = Expr>) -> Self {
        args.into_iter().fold(f, Expr::app)
    }

    pub fn unop(op: BuiltinOp, a: Expr) -> Self {
        Expr::app(Expr::op(op), a)
    }

    pub fn binop(op: BuiltinOp, a: Expr, b: Expr) -> Self {
        Expr::app(Expr::app(Expr::op(op), a), b)
    }

    pub fn vec(elems: Vec<Expr>) -> Self {
        ExprKind::Vec(elems).into()
    }

    /// `lam (name : ty) . body`, abstracting free occurrences of `name` in `body`.
    pub fn lam(name: &str, ty: LdlType, body: Expr) -> Self {
        ExprKind::Lam(Binder::new(name, ty), Box::new(body.close(name))).into()
    }

    /// `let (name : ty) = bound in body`, abstracting `name` in `body` only.
    pub fn let_in(name: &str, ty: LdlType, bound: Expr, body: Expr) -> Self {
        ExprKind::Let(
            Binder::new(name, ty),
            Box::new(bound),
            Box::new(body.close(name)),
        )
        .into()
    }

    pub fn quant(q: Quantifier, name: &str, ty: LdlType, body: Expr) -> Self {
        ExprKind::Quant(q, Binder::new(name, ty), Box::new(body.close(name))).into()
    }

    pub fn forall(name: &str, ty: LdlType, body: Expr) -> Self {
        Expr::quant(Quantifier::Forall, name, ty, body)
    }

    pub fn exists(name: &str, ty: LdlType, body: Expr) -> Self {
        Expr::quant(Quantifier::Exists, name, ty, body)
    }

    /// Splits an application spine `f a1 ... an` into `(f, [a1, ..., an])`.
    pub fn spine(&self) -> (&Expr, Vec<&Expr>) {
        let mut args = Vec::new();
        let mut cur = self;
        while let ExprKind::App(f, a) = &cur.kind {
            args.push(a.as_ref());
            cur = f;
        }
        args.reverse();
        (cur, args)
    }

    /// Matches a saturated builtin application `op a1 ... an`.
    pub fn as_op_app(&self) -> Option<(BuiltinOp, Vec<&Expr>)> {
        let (head, args) = self.spine();
        match head.kind {
            ExprKind::Op(op) if args.len() == op.arity() => Some((op, args)),
            _ => None,
        }
    }

    /// Rebuilds the tree bottom-up. `f` sees every node with the number of
    /// binders crossed so far and may replace it (the replacement is not
    /// traversed further).
    pub fn rewrite(&self, f: &mut impl FnMut(&Expr, usize) -> Option<Expr>) -> Expr {
        self.rewrite_at(0, f)
    }

    fn rewrite_at(&self, depth: usize, f: &mut impl FnMut(&Expr, usize) -> Option<Expr>) -> Expr {
        if let Some(e) = f(self, depth) {
            return e;
        }
        let kind = match &self.kind {
            ExprKind::App(a, b) => ExprKind::App(
                Box::new(a.rewrite_at(depth, f)),
                Box::new(b.rewrite_at(depth, f)),
            ),
            ExprKind::Lam(x, body) => ExprKind::Lam(x.clone(), Box::new(body.rewrite_at(depth + 1, f))),
            ExprKind::Let(x, bound, body) => ExprKind::Let(
                x.clone(),
                Box::new(bound.rewrite_at(depth, f)),
                Box::new(body.rewrite_at(depth + 1, f)),
            ),
            ExprKind::Quant(q, x, body) => {
                ExprKind::Quant(*q, x.clone(), Box::new(body.rewrite_at(depth + 1, f)))
            }
            ExprKind::Vec(es) => ExprKind::Vec(es.iter().map(|e| e.rewrite_at(depth, f)).collect()),
            k => k.clone(),
        };
        Expr {
            kind,
            span: self.span,
        }
    }

    /// Visits every node with its binder depth.
    pub fn visit(&self, f: &mut impl FnMut(&Expr, usize)) {
        self.visit_at(0, f)
    }

    fn visit_at(&self, depth: usize, f: &mut impl FnMut(&Expr, usize)) {
        f(self, depth);
        match &self.kind {
            ExprKind::App(a, b) => {
                a.visit_at(depth, f);
                b.visit_at(depth, f);
            }
            ExprKind::Lam(_, body) | ExprKind::Quant(_, _, body) => body.visit_at(depth + 1, f),
            ExprKind::Let(_, bound, body) => {
                bound.visit_at(depth, f);
                body.visit_at(depth + 1, f);
            }
            ExprKind::Vec(es) => es.iter().for_each(|e| e.visit_at(depth, f)),
            _ => {}
        }
    }

    /// Turns free occurrences of `name` into references to a new outermost binder.
    pub fn close(&self, name: &str) -> Expr {
        self.rewrite(&mut |e, depth| match &e.kind {
            ExprKind::Free(n) if n == name => Some(
                Expr::from(ExprKind::Bound {
                    name: n.clone(),
                    index: depth,
                })
                .with_span(e.span),
            ),
            _ => None,
        })
    }

    /// Replaces references to the outermost (dangling) binder with `value`,
    /// which must be locally closed.
    pub fn open(&self, value: &Expr) -> Expr {
        self.rewrite(&mut |e, depth| match &e.kind {
            ExprKind::Bound { index, .. } if *index == depth => Some(value.clone()),
            _ => None,
        })
    }

    /// Replaces free occurrences of `name` with a locally closed `value`.
    pub fn subst_free(&self, name: &str, value: &Expr) -> Expr {
        self.rewrite(&mut |e, _| match &e.kind {
            ExprKind::Free(n) if n == name => Some(value.clone()),
            _ => None,
        })
    }

    /// True when no bound index escapes the expression.
    pub fn is_locally_closed(&self) -> bool {
        let mut ok = true;
        self.visit(&mut |e, depth| {
            if let ExprKind::Bound { index, .. } = e.kind {
                ok &= index < depth;
            }
        });
        ok
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e, _| {
            if let ExprKind::Free(n) = &e.kind {
                out.insert(n.clone());
            }
        });
        out
    }

    pub fn networks(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e, _| {
            if let ExprKind::Network(n) = &e.kind {
                out.insert(n.clone());
            }
        });
        out
    }

    /// Names of variables bound by infinite (`Real` / `Vec n`) quantifiers.
    pub fn free_quantified_vars(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.visit(&mut |e, _| {
            if let ExprKind::Quant(_, b, _) = &e.kind {
                if b.ty.real_dim().is_some() {
                    out.insert(b.name.clone());
                }
            }
        });
        out
    }

    /// Capture-avoiding substitution of the free variable `name` by `value`.
    /// Binder hints that clash with free names of `value` are renamed so the
    /// result still prints unambiguously.
    pub fn substitute(&self, name: &str, value: &Expr) -> Expr {
        let replaced = self.subst_free(name, value);
        let avoid: BTreeSet<String> = value
            .free_vars()
            .into_iter()
            .chain(value.networks())
            .collect();
        if avoid.is_empty() {
            return replaced;
        }
        rename_binders(&replaced, &avoid, &mut Vec::new())
    }

    /// Structural equality up to renaming of bound variables. Real constants
    /// are compared bitwise.
    pub fn alpha_eq(&self, other: &Expr) -> bool {
        use ExprKind::*;
        match (&self.kind, &other.kind) {
            (Bound { index: a, .. }, Bound { index: b, .. }) => a == b,
            (Free(a), Free(b)) | (Network(a), Network(b)) => a == b,
            (Real(a), Real(b)) => a.to_bits() == b.to_bits(),
            (Index(a), Index(b)) => a == b,
            (Bool(a), Bool(b)) => a == b,
            (Op(a), Op(b)) => a == b,
            (App(f1, a1), App(f2, a2)) => f1.alpha_eq(f2) && a1.alpha_eq(a2),
            (Lam(x1, b1), Lam(x2, b2)) => x1.ty == x2.ty && b1.alpha_eq(b2),
            (Let(x1, e1, b1), Let(x2, e2, b2)) => {
                x1.ty == x2.ty && e1.alpha_eq(e2) && b1.alpha_eq(b2)
            }
            (Quant(q1, x1, b1), Quant(q2, x2, b2)) => {
                q1 == q2 && x1.ty == x2.ty && b1.alpha_eq(b2)
            }
            (Vec(a), Vec(b)) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.alpha_eq(y)),
            _ => false,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_, _| n += 1);
        n
    }
}

/// Picks `hint`, or `hint` with primes appended, avoiding every name in `taken`.
pub fn fresh_name(hint: &str, taken: impl Fn(&str) -> bool) -> String {
    let mut name = hint.to_string();
    while taken(&name) {
        name.push('\'');
    }
    name
}

fn rename_binders(e: &Expr, avoid: &BTreeSet<String>, stack: &mut Vec<String>) -> Expr {
    let fresh = |b: &Binder, stack: &Vec<String>| {
        fresh_name(&b.name, |n| avoid.contains(n) || stack.iter().any(|s| s == n))
    };
    let kind = match &e.kind {
        ExprKind::Bound { index, name } => ExprKind::Bound {
            index: *index,
            name: stack
                .len()
                .checked_sub(index + 1)
                .map(|i| stack[i].clone())
                .unwrap_or_else(|| name.clone()),
        },
        ExprKind::App(a, b) => ExprKind::App(
            Box::new(rename_binders(a, avoid, stack)),
            Box::new(rename_binders(b, avoid, stack)),
        ),
        ExprKind::Lam(x, body) => {
            let name = fresh(x, stack);
            stack.push(name.clone());
            let body = rename_binders(body, avoid, stack);
            stack.pop();
            ExprKind::Lam(Binder::new(name, x.ty.clone()), Box::new(body))
        }
        ExprKind::Let(x, bound, body) => {
            let bound = rename_binders(bound, avoid, stack);
            let name = fresh(x, stack);
            stack.push(name.clone());
            let body = rename_binders(body, avoid, stack);
            stack.pop();
            ExprKind::Let(Binder::new(name, x.ty.clone()), Box::new(bound), Box::new(body))
        }
        ExprKind::Quant(q, x, body) => {
            let name = fresh(x, stack);
            stack.push(name.clone());
            let body = rename_binders(body, avoid, stack);
            stack.pop();
            ExprKind::Quant(*q, Binder::new(name, x.ty.clone()), Box::new(body))
        }
        ExprKind::Vec(es) => ExprKind::Vec(es.iter().map(|x| rename_binders(x, avoid, stack)).collect()),
        k => k.clone(),
    };
    Expr { kind, span: e.span }
}

/// Network arities `name -> (inputs, outputs)`.
pub type NetworkTypeCtx = std::collections::BTreeMap<String, (usize, usize)>;

/// Types of variables in scope, innermost binding last.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BoundTypeCtx {
    entries: Vec<(String, LdlType)>,
}

impl BoundTypeCtx {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, ty: LdlType) {
        self.entries.push((name.into(), ty));
    }

    pub fn with(mut self, name: impl Into<String>, ty: LdlType) -> Self {
        self.push(name, ty);
        self
    }

    /// Innermost binding of `name`.
    pub fn get(&self, name: &str) -> Option<&LdlType> {
        self.entries
            .iter()
            .rev()
            .find(|(n, _)| n == name)
            .map(|(_, t)| t)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &LdlType)> {
        self.entries.iter().map(|(n, t)| (n.as_str(), t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lookup(v: Expr, i: Expr) -> Expr {
        Expr::binop(BuiltinOp::Lookup, v, i)
    }

    #[test]
    fn substitute_replaces_directly() {
        let e = lookup(Expr::free("x"), Expr::free("i"));
        let got = e.substitute("i", &Expr::index(1));
        assert_eq!(got, lookup(Expr::free("x"), Expr::index(1)));
    }

    #[test]
    fn substitute_under_unrelated_binder() {
        let e = Expr::lam("y", LdlType::Real, Expr::free("x"));
        let got = e.substitute("x", &Expr::real(5.0));
        assert!(got.alpha_eq(&Expr::lam("y", LdlType::Real, Expr::real(5.0))));
    }

    #[test]
    fn substitute_avoids_capture() {
        // (forall x. x + z)[z := x] where the replacement x is free
        let e = Expr::forall(
            "x",
            LdlType::Real,
            Expr::binop(
                BuiltinOp::Leq,
                Expr::binop(BuiltinOp::Add, Expr::free("x"), Expr::free("z")),
                Expr::real(0.0),
            ),
        );
        let got = e.substitute("z", &Expr::free("x"));
        let ExprKind::Quant(_, binder, body) = &got.kind else {
            panic!("expected quantifier");
        };
        assert_eq!(binder.name, "x'");
        // The bound occurrence still points at the binder, the free x stays free.
        let (_, args) = body.spine();
        let (_, sum_args) = args[0].spine();
        assert!(matches!(sum_args[0].kind, ExprKind::Bound { index: 0, .. }));
        assert_eq!(sum_args[1].kind, ExprKind::Free("x".into()));
    }

    #[test]
    fn substitute_is_identity_when_absent() {
        let e = Expr::lam("y", LdlType::Real, Expr::binop(BuiltinOp::Mul, Expr::free("y"), Expr::real(2.0)));
        assert_eq!(e.substitute("q", &Expr::real(1.0)), e);
    }

    #[test]
    fn quantified_vars_only_infinite() {
        assert!(Expr::real(3.0).free_quantified_vars().is_empty());
        let fin = Expr::forall("i", LdlType::Index(2), Expr::top());
        assert!(fin.free_quantified_vars().is_empty());
        let inf = Expr::forall("x", LdlType::Vec(3), Expr::exists("y", LdlType::Real, Expr::top()));
        let got: Vec<_> = inf.free_quantified_vars().into_iter().collect();
        assert_eq!(got, vec!["x".to_string(), "y".to_string()]);
    }

    #[test]
    fn open_close_roundtrip() {
        let body = Expr::binop(BuiltinOp::Add, Expr::free("a"), Expr::free("b"));
        let closed = body.close("a");
        assert!(!closed.is_locally_closed());
        assert_eq!(closed.open(&Expr::free("a")), body);
    }

    #[test]
    fn alpha_eq_ignores_binder_names() {
        let a = Expr::lam("x", LdlType::Real, Expr::free("x"));
        let b = Expr::lam("y", LdlType::Real, Expr::free("y"));
        assert!(a.alpha_eq(&b));
        let c = Expr::lam("y", LdlType::Bool, Expr::free("y"));
        assert!(!a.alpha_eq(&c));
    }

    #[test]
    fn type_helpers() {
        let t = LdlType::curried([LdlType::Real, LdlType::Vec(2)], LdlType::Bool);
        assert_eq!(t.to_string(), "Real -> Vec 2 -> Bool");
        let (params, res) = t.uncurry();
        assert_eq!(params.len(), 2);
        assert_eq!(res, &LdlType::Bool);
        assert!(!LdlType::fun(LdlType::fun(LdlType::Real, LdlType::Real), LdlType::Real).well_formed());
        assert!(!LdlType::Vec(0).well_formed());
    }
}
