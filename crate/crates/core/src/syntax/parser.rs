use std::collections::BTreeMap;

use super::lexer::{lex, Tok, Token};
use super::update::{Action, Foreach, Update};
use crate::datalog::{Program, Rule};
use crate::db::Database;
use crate::error::{Error, Result};
use crate::logic::{Atom, Clause, Formula, Literal, Term};

const KEYWORDS: &[&str] = &[
    "forall", "exists", "foreach", "do", "insert", "delete", "if", "then", "else", "skip", "true", "false", "not",
];

/// How quantifiers in constraints are treated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    /// Universal constraints only; the result is the quantifier-free matrix.
    Relational,
    /// Arbitrary first-order sentences (e.g. `!exists X: tc(X,X)`).
    Deductive,
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    arity: BTreeMap<String, usize>,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser {
            toks: lex(text)?,
            pos: 0,
            arity: BTreeMap::new(),
        })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        &self.toks[(self.pos + k).min(self.toks.len() - 1)].tok
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Parse {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn describe(&self) -> String {
        match self.peek() {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Eof => "end of input".into(),
            t => format!("{t:?}"),
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<()> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            self.err(format!("expected {what}, found {}", self.describe()))
        }
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> Result<()> {
        if self.eat_kw(kw) {
            Ok(())
        } else {
            self.err(format!("expected `{kw}`, found {}", self.describe()))
        }
    }

    fn expect_eof(&mut self) -> Result<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            self.err(format!("unexpected {}", self.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => {
                self.bump();
                Ok(s)
            }
            _ => self.err(format!("expected {what}, found {}", self.describe())),
        }
    }

    fn variable(&mut self) -> Result<String> {
        let v = self.ident("a variable")?;
        if !crate::logic::is_var_name(&v) {
            self.pos -= 1;
            return self.err(format!("`{v}` is not a variable (variables start with an uppercase letter)"));
        }
        Ok(v)
    }

    fn var_list(&mut self) -> Result<Vec<String>> {
        let mut vs = vec![self.variable()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            vs.push(self.variable()?);
        }
        Ok(vs)
    }

    fn term(&mut self) -> Result<Term> {
        let name = self.ident("a term")?;
        if *self.peek() == Tok::LParen {
            return self.err("nested terms are not allowed: the language is function-free");
        }
        Ok(Term::from_ident(&name))
    }

    fn term_tuple(&mut self) -> Result<Vec<Term>> {
        self.expect(Tok::LParen, "`(`")?;
        let mut ts = vec![self.term()?];
        while *self.peek() == Tok::Comma {
            self.bump();
            ts.push(self.term()?);
        }
        self.expect(Tok::RParen, "`)`")?;
        Ok(ts)
    }

    fn check_arity(&mut self, pred: &str, n: usize) -> Result<()> {
        match self.arity.get(pred) {
            Some(&k) if k != n => Err(Error::Arity {
                pred: pred.to_string(),
                expected: k,
                found: n,
            }),
            _ => {
                self.arity.insert(pred.to_string(), n);
                Ok(())
            }
        }
    }

    /// `name` or `name(t1,…,tn)`.
    fn rel_atom(&mut self) -> Result<Atom> {
        let name = self.ident("a predicate")?;
        if crate::logic::is_var_name(&name) {
            self.pos -= 1;
            return self.err(format!("`{name}` is not a predicate name (predicates start lowercase)"));
        }
        let args = if *self.peek() == Tok::LParen {
            self.term_tuple()?
        } else {
            vec![]
        };
        self.check_arity(&name, args.len())?;
        Ok(Atom::new(name, args))
    }

    // formula := quant | impl
    fn formula(&mut self) -> Result<Formula> {
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quant();
        }
        self.implication()
    }

    fn quant(&mut self) -> Result<Formula> {
        let universal = self.is_kw("forall");
        self.bump();
        let vs = self.var_list()?;
        self.expect(Tok::Colon, "`:`")?;
        let body = self.formula()?;
        Ok(if universal {
            Formula::Forall(vs, Box::new(body))
        } else {
            Formula::Exists(vs, Box::new(body))
        })
    }

    fn implication(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        match self.peek() {
            Tok::Arrow => {
                self.bump();
                let rhs = self.formula()?;
                Ok(Formula::implies(lhs, rhs))
            }
            Tok::Iff => {
                self.bump();
                let rhs = self.formula()?;
                Ok(Formula::And(vec![
                    Formula::implies(lhs.clone(), rhs.clone()),
                    Formula::implies(rhs, lhs),
                ]))
            }
            _ => Ok(lhs),
        }
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut parts = vec![self.conjunction()?];
        while *self.peek() == Tok::Pipe {
            self.bump();
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::Or(parts) })
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while *self.peek() == Tok::Amp {
            self.bump();
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 { parts.pop().unwrap() } else { Formula::And(parts) })
    }

    fn unary(&mut self) -> Result<Formula> {
        if *self.peek() == Tok::Bang || self.is_kw("not") {
            self.bump();
            return Ok(Formula::not(self.unary()?));
        }
        if self.is_kw("forall") || self.is_kw("exists") {
            return self.quant();
        }
        self.primary()
    }

    fn eq_op(&mut self) -> Option<bool> {
        match self.peek() {
            Tok::Eq => {
                self.bump();
                Some(true)
            }
            Tok::Neq => {
                self.bump();
                Some(false)
            }
            _ => None,
        }
    }

    fn equality(lhs: Vec<Term>, rhs: Vec<Term>, positive: bool) -> Formula {
        let a = Formula::Atom(Atom::eq(lhs, rhs));
        if positive {
            a
        } else {
            Formula::not(a)
        }
    }

    fn tuple_equality(&mut self) -> Result<Option<Formula>> {
        let save = self.pos;
        let Ok(lhs) = self.term_tuple() else {
            self.pos = save;
            return Ok(None);
        };
        let Some(positive) = self.eq_op() else {
            self.pos = save;
            return Ok(None);
        };
        let rhs = self.term_tuple()?;
        if lhs.len() != rhs.len() {
            self.pos = save;
            return self.err(format!("tuple equality between tuples of length {} and {}", lhs.len(), rhs.len()));
        }
        Ok(Some(Self::equality(lhs, rhs, positive)))
    }

    fn primary(&mut self) -> Result<Formula> {
        match self.peek().clone() {
            Tok::LParen => {
                if let Some(f) = self.tuple_equality()? {
                    return Ok(f);
                }
                self.bump();
                let f = self.formula()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(f)
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(s) => {
                if matches!(self.peek_at(1), Tok::Eq | Tok::Neq) {
                    let lhs = self.term()?;
                    let positive = self.eq_op().unwrap();
                    let rhs = self.term()?;
                    return Ok(Self::equality(vec![lhs], vec![rhs], positive));
                }
                if crate::logic::is_var_name(&s) && *self.peek_at(1) != Tok::LParen {
                    return self.err(format!("variable `{s}` used as a formula"));
                }
                Ok(Formula::Atom(self.rel_atom()?))
            }
            _ => self.err(format!("expected a formula, found {}", self.describe())),
        }
    }

    // seq := stmt (';' stmt)*
    fn seq(&mut self) -> Result<Update> {
        let mut items = vec![self.stmt()?];
        while *self.peek() == Tok::Semi {
            self.bump();
            if matches!(self.peek(), Tok::Eof | Tok::RParen | Tok::Dot) {
                break;
            }
            items.push(self.stmt()?);
        }
        Ok(Update::seq_all(items))
    }

    fn action(&mut self) -> Result<Action> {
        if self.eat_kw("insert") {
            Ok(Action::Insert)
        } else if self.eat_kw("delete") {
            Ok(Action::Delete)
        } else {
            self.err(format!("expected `insert` or `delete`, found {}", self.describe()))
        }
    }

    fn stmt(&mut self) -> Result<Update> {
        if self.eat_kw("foreach") {
            let vars = self.var_list()?;
            self.expect(Tok::Colon, "`:`")?;
            let qual = self.formula()?;
            self.expect_kw("do")?;
            let action = self.action()?;
            let at = self.pos;
            let target = self.rel_atom()?;
            let expected: Vec<Term> = vars.iter().map(|v| Term::var(v.clone())).collect();
            if target.args != expected {
                self.pos = at;
                return self.err(format!(
                    "target arguments must be exactly the foreach variables ({})",
                    vars.join(",")
                ));
            }
            let mut seen = std::collections::BTreeSet::new();
            if !vars.iter().all(|v| seen.insert(v)) {
                self.pos = at;
                return self.err("foreach variables must be distinct");
            }
            return Ok(Update::Foreach(Foreach {
                vars,
                qual,
                action,
                target: target.rel_name().unwrap().to_string(),
            }));
        }
        if self.is_kw("insert") || self.is_kw("delete") {
            let action = self.action()?;
            let at = self.pos;
            let a = self.rel_atom()?;
            if !a.is_ground() {
                self.pos = at;
                return self.err("a plain insert/delete needs a ground atom; use foreach for variables");
            }
            let args: Vec<String> = a.args.iter().map(|t| t.name().to_string()).collect();
            return Ok(Update::Foreach(Foreach::ground(action, a.rel_name().unwrap(), &args)));
        }
        if self.eat_kw("if") {
            let cond = self.formula()?;
            self.expect_kw("then")?;
            let then = self.stmt()?;
            let els = if self.eat_kw("else") { Some(Box::new(self.stmt()?)) } else { None };
            return Ok(Update::If {
                cond,
                then: Box::new(then),
                els,
            });
        }
        if self.eat_kw("skip") {
            return Ok(Update::Skip);
        }
        if *self.peek() == Tok::LParen {
            self.bump();
            let u = self.seq()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(u);
        }
        self.err(format!("expected an update statement, found {}", self.describe()))
    }

    fn body_literal(&mut self) -> Result<Literal> {
        let negated = if *self.peek() == Tok::Bang || self.is_kw("not") {
            self.bump();
            true
        } else {
            false
        };
        let f = match self.peek() {
            Tok::LParen => match self.tuple_equality()? {
                Some(f) => f,
                None => return self.err("expected a literal"),
            },
            _ => self.primary()?,
        };
        let lit = match f {
            Formula::Atom(a) => Literal::pos(a),
            Formula::Not(g) => match *g {
                Formula::Atom(a) => Literal::neg(a),
                _ => unreachable!(),
            },
            _ => return self.err("expected a literal"),
        };
        Ok(if negated { lit.negated() } else { lit })
    }

    fn rule(&mut self) -> Result<Rule> {
        let head = self.rel_atom()?;
        let mut body = Vec::new();
        if *self.peek() == Tok::If {
            self.bump();
            body.push(self.body_literal()?);
            while *self.peek() == Tok::Comma {
                self.bump();
                body.push(self.body_literal()?);
            }
        }
        self.expect(Tok::Dot, "`.`")?;
        Ok(Rule::new(head, body))
    }
}

/// Parses any formula (quantifiers allowed).
pub fn parse_formula(text: &str) -> Result<Formula> {
    let mut p = Parser::new(text)?;
    let f = p.formula()?;
    if *p.peek() == Tok::Dot {
        p.bump();
    }
    p.expect_eof()?;
    Ok(f)
}

/// Parses a constraint. In relational mode the universal closure is
/// stripped and existential quantifiers are rejected.
pub fn parse_constraint(text: &str, mode: Mode) -> Result<Formula> {
    let f = parse_formula(text)?;
    match mode {
        Mode::Relational => f.universal_matrix(),
        Mode::Deductive => Ok(f),
    }
}

/// Parses a formula that must denote exactly one clause.
pub fn parse_clause(text: &str) -> Result<Clause> {
    let f = parse_formula(text)?.universal_matrix()?;
    let mut cs = f.to_clauses();
    if cs.len() != 1 {
        return Err(Error::Validation(format!("`{text}` is not a single clause")));
    }
    Ok(cs.pop().unwrap())
}

/// Parses an update program. A trailing `.` is allowed.
pub fn parse_update(text: &str) -> Result<Update> {
    let mut p = Parser::new(text)?;
    let u = p.seq()?;
    if *p.peek() == Tok::Dot {
        p.bump();
    }
    p.expect_eof()?;
    Ok(u)
}

/// Parses Datalog rules `head :- l1, …, ln.` and facts `head.`.
pub fn parse_program(text: &str) -> Result<Program> {
    let mut p = Parser::new(text)?;
    let mut rules = Vec::new();
    while *p.peek() != Tok::Eof {
        let at = p.pos;
        let r = p.rule()?;
        if !r.is_safe() {
            p.pos = at;
            return p.err(format!("unsafe rule `{r}`: every variable must occur in a positive body atom"));
        }
        rules.push(r);
    }
    let prog = Program::new(rules);
    prog.validate()?;
    Ok(prog)
}

/// Parses ground facts `p(a,b).`.
pub fn parse_database(text: &str) -> Result<Database> {
    let mut p = Parser::new(text)?;
    let mut db = Database::new();
    while *p.peek() != Tok::Eof {
        let at = p.pos;
        let a = p.rel_atom()?;
        if !a.is_ground() {
            p.pos = at;
            return p.err(format!("fact `{a}` contains a variable"));
        }
        p.expect(Tok::Dot, "`.`")?;
        db.insert(a.rel_name().unwrap(), a.args.iter().map(|t| t.name().to_string()).collect())?;
    }
    Ok(db)
}
