//! Propositional expression trees.
//!
//! The same tree type is used over specification atoms (`prop`, `next(prop)`)
//! and over timed atoms (`prop@step`) once a formula has been unrolled.

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Expr<A> {
    Const(bool),
    Atom(A),
    Not(Box<Expr<A>>),
    And(Vec<Expr<A>>),
    Or(Vec<Expr<A>>),
    Implies(Box<Expr<A>>, Box<Expr<A>>),
    Iff(Box<Expr<A>>, Box<Expr<A>>),
}

impl<A> Expr<A> {
    pub fn atom(a: A) -> Self {
        Expr::Atom(a)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Self) -> Self {
        Expr::Not(Box::new(e))
    }

    pub fn implies(a: Self, b: Self) -> Self {
        Expr::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Self, b: Self) -> Self {
        Expr::Iff(Box::new(a), Box::new(b))
    }

    /// Conjunction; collapses the empty and singleton cases.
    pub fn and(mut items: Vec<Self>) -> Self {
        match items.len() {
            0 => Expr::Const(true),
            1 => items.pop().unwrap(),
            _ => Expr::And(items),
        }
    }

    /// Disjunction; collapses the empty and singleton cases.
    pub fn or(mut items: Vec<Self>) -> Self {
        match items.len() {
            0 => Expr::Const(false),
            1 => items.pop().unwrap(),
            _ => Expr::Or(items),
        }
    }

    pub fn eval<F: Fn(&A) -> bool>(&self, f: &F) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Atom(a) => f(a),
            Expr::Not(e) => !e.eval(f),
            Expr::And(v) => v.iter().all(|e| e.eval(f)),
            Expr::Or(v) => v.iter().any(|e| e.eval(f)),
            Expr::Implies(a, b) => !a.eval(f) || b.eval(f),
            Expr::Iff(a, b) => a.eval(f) == b.eval(f),
        }
    }

    /// Kleene three-valued evaluation; `None` means unknown.
    pub fn eval3<F: Fn(&A) -> Option<bool>>(&self, f: &F) -> Option<bool> {
        match self {
            Expr::Const(b) => Some(*b),
            Expr::Atom(a) => f(a),
            Expr::Not(e) => e.eval3(f).map(|b| !b),
            Expr::And(v) => {
                let mut unknown = false;
                for e in v {
                    match e.eval3(f) {
                        Some(false) => return Some(false),
                        None => unknown = true,
                        Some(true) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(true)
                }
            }
            Expr::Or(v) => {
                let mut unknown = false;
                for e in v {
                    match e.eval3(f) {
                        Some(true) => return Some(true),
                        None => unknown = true,
                        Some(false) => {}
                    }
                }
                if unknown {
                    None
                } else {
                    Some(false)
                }
            }
            Expr::Implies(a, b) => match a.eval3(f) {
                Some(false) => Some(true),
                Some(true) => b.eval3(f),
                None => match b.eval3(f) {
                    Some(true) => Some(true),
                    _ => None,
                },
            },
            Expr::Iff(a, b) => match (a.eval3(f), b.eval3(f)) {
                (Some(x), Some(y)) => Some(x == y),
                _ => None,
            },
        }
    }

    /// Replaces every atom by an expression.
    pub fn subst<B, F: Fn(&A) -> Expr<B>>(&self, f: &F) -> Expr<B> {
        match self {
            Expr::Const(b) => Expr::Const(*b),
            Expr::Atom(a) => f(a),
            Expr::Not(e) => Expr::Not(Box::new(e.subst(f))),
            Expr::And(v) => Expr::And(v.iter().map(|e| e.subst(f)).collect()),
            Expr::Or(v) => Expr::Or(v.iter().map(|e| e.subst(f)).collect()),
            Expr::Implies(a, b) => Expr::Implies(Box::new(a.subst(f)), Box::new(b.subst(f))),
            Expr::Iff(a, b) => Expr::Iff(Box::new(a.subst(f)), Box::new(b.subst(f))),
        }
    }

    pub fn map<B, F: Fn(&A) -> B>(&self, f: &F) -> Expr<B> {
        self.subst(&|a| Expr::Atom(f(a)))
    }

    pub fn for_each_atom<F: FnMut(&A)>(&self, f: &mut F) {
        match self {
            Expr::Const(_) => {}
            Expr::Atom(a) => f(a),
            Expr::Not(e) => e.for_each_atom(f),
            Expr::And(v) | Expr::Or(v) => v.iter().for_each(|e| e.for_each_atom(f)),
            Expr::Implies(a, b) | Expr::Iff(a, b) => {
                a.for_each_atom(f);
                b.for_each_atom(f);
            }
        }
    }

    pub fn any_atom<F: Fn(&A) -> bool>(&self, f: F) -> bool {
        let mut hit = false;
        self.for_each_atom(&mut |a| hit |= f(a));
        hit
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Iff(..) => 1,
            Expr::Implies(..) => 2,
            Expr::Or(_) => 3,
            Expr::And(_) => 4,
            Expr::Not(_) => 5,
            Expr::Const(_) | Expr::Atom(_) => 6,
        }
    }

    /// Renders in the concrete syntax accepted by the parser, using `name`
    /// to print atoms. Parenthesization preserves the tree shape exactly.
    pub fn render<F: Fn(&A) -> String>(&self, name: &F) -> String {
        let mut out = String::new();
        self.render_into(name, &mut out);
        out
    }

    fn render_into<F: Fn(&A) -> String>(&self, name: &F, out: &mut String) {
        let child = |e: &Expr<A>, parens: bool, out: &mut String| {
            if parens {
                out.push('(');
                e.render_into(name, out);
                out.push(')');
            } else {
                e.render_into(name, out);
            }
        };
        match self {
            Expr::Const(true) => out.push_str("TRUE"),
            Expr::Const(false) => out.push_str("FALSE"),
            Expr::Atom(a) => out.push_str(&name(a)),
            Expr::Not(e) => {
                out.push('!');
                child(e, e.precedence() < 5, out);
            }
            Expr::And(v) | Expr::Or(v) => {
                let (op, prec) = if matches!(self, Expr::And(_)) {
                    (" & ", 4)
                } else {
                    (" | ", 3)
                };
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        out.push_str(op);
                    }
                    child(e, e.precedence() <= prec, out);
                }
            }
            Expr::Implies(a, b) => {
                child(a, a.precedence() <= 2, out);
                out.push_str(" -> ");
                child(b, b.precedence() < 2, out);
            }
            Expr::Iff(a, b) => {
                child(a, a.precedence() < 1, out);
                out.push_str(" <-> ");
                child(b, b.precedence() <= 1, out);
            }
        }
    }
}

impl<A: std::fmt::Display> std::fmt::Display for Expr<A> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render(&|a: &A| a.to_string()))
    }
}
