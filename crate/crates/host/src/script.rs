//! A deterministic script harness that drives the kernel through the same
//! syscall boundary a guest uses.
//!
//! ```text
//! cmd  ::= (let NAME expr) | (call SYSCALL arg*) | (assert-status INT)
//!        | (assert-alpha-eq NAME NAME) | (assert-true NAME)
//!        | (assert-eq NAME INT) | (assert-data NAME STRING)
//!        | (discharge NAME NAME)
//! expr ::= (SYSCALL arg*) | term
//! arg  ::= INT | NAME | NAME.field | STRING | term | type
//!        | (array arg*) | (subst (arg arg)*)
//! ```
//!
//! Output addresses are supplied by the harness.  `let` binds the first
//! output of the call, and every output is reachable as `NAME.field`.  A
//! trailing array or substitution argument may be omitted and is then empty.

use kernel::driver::{Driver, Input, Output};
use kernel::sexpr::{self, Sexpr};
use kernel::syntax::{self, Builder};
use kernel::{Handle, Param, Status, Syscall};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

/// Short names accepted in addition to import names and their kebab-case
/// and upper-case spellings.
const ALIASES: &[(&str, Syscall)] = &[
    ("type-former", Syscall::TypeFormerRegister),
    ("type-var", Syscall::TypeAllocateVariable),
    ("type-app", Syscall::TypeAllocateApplication),
    ("type-fun", Syscall::TypeAllocateFunction),
    ("const-register", Syscall::ConstantRegister),
    ("term-var", Syscall::TermAllocateVariable),
    ("term-const", Syscall::TermAllocateConstant),
    ("term-app", Syscall::TermAllocateApplication),
    ("term-lam", Syscall::TermAllocateLambda),
    ("term-is-app", Syscall::TermIsApplication),
    ("term-split-app", Syscall::TermSplitApplication),
    ("term-type", Syscall::TermTypeOf),
    ("term-subst", Syscall::TermSubstitute),
    ("term-type-subst", Syscall::TermTypeSubstitute),
    ("term-normalize", Syscall::TermBetaNormalize),
    ("term-free-vars", Syscall::TermFreeVariables),
    ("thm-sym", Syscall::TheoremAllocateSym),
    ("thm-refl", Syscall::TheoremAllocateReflexivity),
    ("thm-trans", Syscall::TheoremAllocateTransitivity),
    ("thm-cong-app", Syscall::TheoremAllocateCongruenceApp),
    ("thm-cong-lam", Syscall::TheoremAllocateCongruenceLambda),
    ("thm-beta", Syscall::TheoremAllocateBeta),
    ("thm-eta", Syscall::TheoremAllocateEta),
    ("thm-assume", Syscall::TheoremAllocateAssume),
    ("thm-eq-mp", Syscall::TheoremAllocateEqualityMp),
    ("thm-deduct-antisym", Syscall::TheoremAllocateDeductAntisym),
    ("thm-inst-term", Syscall::TheoremAllocateInstTerm),
    ("thm-inst-type", Syscall::TheoremAllocateInstType),
    ("thm-truth", Syscall::TheoremAllocateTruthIntro),
    ("thm-falsity-elim", Syscall::TheoremAllocateFalsityElim),
    ("thm-imp-intro", Syscall::TheoremAllocateImpIntro),
    ("thm-imp-elim", Syscall::TheoremAllocateImpElim),
    ("thm-forall-intro", Syscall::TheoremAllocateForallIntro),
    ("thm-forall-elim", Syscall::TheoremAllocateForallElim),
    ("thm-split", Syscall::TheoremSplit),
];

const TERM_FORMS: &[&str] = &["var", "const", "app", "lam", "nat"];
const TYPE_FORMS: &[&str] = &["ty", "tyvar"];

pub fn syscall_named(name: &str) -> Option<Syscall> {
    if let Some((_, s)) = ALIASES.iter().find(|(a, _)| *a == name) {
        return Some(*s);
    }
    let snake = name.replace('-', "_");
    Syscall::ALL
        .iter()
        .copied()
        .find(|s| s.import_name() == snake || s.abi_name() == name)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ScriptErrorKind {
    Parse(String),
    UnknownSyscall(String),
    Unbound(String),
    Argument(String),
    AssertionFailed { expected: String, actual: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub struct ScriptError {
    pub line: usize,
    pub kind: ScriptErrorKind,
}

impl fmt::Display for ScriptError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: ", self.line)?;
        match &self.kind {
            ScriptErrorKind::Parse(m) => write!(f, "parse error: {m}"),
            ScriptErrorKind::UnknownSyscall(n) => write!(f, "unknown syscall '{n}'"),
            ScriptErrorKind::Unbound(n) => write!(f, "unbound name '{n}'"),
            ScriptErrorKind::Argument(m) => write!(f, "bad argument: {m}"),
            ScriptErrorKind::AssertionFailed { expected, actual } => {
                write!(f, "assertion failed: expected {expected}, actual {actual}")
            }
        }
    }
}

fn fail<T>(line: usize, kind: ScriptErrorKind) -> Result<T, ScriptError> {
    Err(ScriptError { line, kind })
}

fn parse_err<T>(s: &Sexpr, message: impl Into<String>) -> Result<T, ScriptError> {
    fail(s.pos().line, ScriptErrorKind::Parse(message.into()))
}

#[derive(Clone, Debug)]
enum Expr {
    Call(Syscall, Vec<Sexpr>),
    Term(Sexpr),
}

#[derive(Clone, Debug)]
enum Kind {
    Let(String, Expr),
    Call(Syscall, Vec<Sexpr>),
    AssertStatus(u32),
    AssertAlphaEq(String, String),
    AssertTrue(String),
    AssertEq(String, u64),
    AssertData(String, Vec<u8>),
    Discharge(String, String),
}

#[derive(Clone, Debug)]
struct Command {
    line: usize,
    text: String,
    kind: Kind,
}

/// A parsed script, ready to run against any driver.
#[derive(Clone, Debug)]
pub struct Script {
    commands: Vec<Command>,
}

fn parse_int(s: &Sexpr) -> Option<u64> {
    let a = s.as_atom()?;
    match a.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16).ok(),
        None if a.bytes().all(|b| b.is_ascii_digit()) => a.parse().ok(),
        None => None,
    }
}

fn name_arg(s: &Sexpr) -> Result<String, ScriptError> {
    match s.as_atom() {
        Some(a) if parse_int(s).is_none() => Ok(a.to_string()),
        _ => parse_err(s, "expected a name"),
    }
}

/// Parameters a script supplies.  A buffer is written by the kernel but its
/// length comes from the caller.
fn input_params(call: Syscall) -> impl Iterator<Item = Param> {
    call.params()
        .iter()
        .copied()
        .filter(|p| !p.is_output() || matches!(p, Param::Buffer(_)))
}

fn parse_call(head: &Sexpr, args: &[Sexpr]) -> Result<(Syscall, Vec<Sexpr>), ScriptError> {
    let name = head.as_atom().ok_or_else(|| ScriptError {
        line: head.pos().line,
        kind: ScriptErrorKind::Parse("expected a syscall name".into()),
    })?;
    let call = syscall_named(name).ok_or_else(|| ScriptError {
        line: head.pos().line,
        kind: ScriptErrorKind::UnknownSyscall(name.into()),
    })?;
    let params: Vec<Param> = input_params(call).collect();
    let optional = params
        .iter()
        .rev()
        .take_while(|p| matches!(p, Param::Pairs(_) | Param::Array(_)))
        .count();
    if args.len() > params.len() || args.len() + optional < params.len() {
        return parse_err(
            head,
            format!("{name} takes {} argument(s), found {}", params.len(), args.len()),
        );
    }
    Ok((call, args.to_vec()))
}

fn parse_expr(s: &Sexpr) -> Result<Expr, ScriptError> {
    let Some(items) = s.as_list().filter(|i| !i.is_empty()) else {
        return parse_err(s, "expected (SYSCALL arg*) or a term");
    };
    if matches!(s.head(), Some(h) if TERM_FORMS.contains(&h)) {
        return Ok(Expr::Term(s.clone()));
    }
    let (call, args) = parse_call(&items[0], &items[1..])?;
    Ok(Expr::Call(call, args))
}

fn parse_command(s: &Sexpr) -> Result<Command, ScriptError> {
    let line = s.pos().line;
    let items = match s.as_list() {
        Some(items) if !items.is_empty() => items,
        _ => return parse_err(s, "expected a command"),
    };
    let want = |n: usize| -> Result<(), ScriptError> {
        if items.len() != n + 1 {
            return parse_err(s, format!("'{}' takes {n} argument(s)", s.head().unwrap_or("?")));
        }
        Ok(())
    };
    let kind = match s.head() {
        Some("let") => {
            want(2)?;
            Kind::Let(name_arg(&items[1])?, parse_expr(&items[2])?)
        }
        Some("call") => {
            if items.len() < 2 {
                return parse_err(s, "'call' needs a syscall");
            }
            let (call, args) = parse_call(&items[1], &items[2..])?;
            Kind::Call(call, args)
        }
        Some("assert-status") => {
            want(1)?;
            let code = parse_int(&items[1]).ok_or(()).or_else(|_| parse_err(&items[1], "expected a status code"))?;
            Kind::AssertStatus(code as u32)
        }
        Some("assert-alpha-eq") => {
            want(2)?;
            Kind::AssertAlphaEq(name_arg(&items[1])?, name_arg(&items[2])?)
        }
        Some("assert-true") => {
            want(1)?;
            Kind::AssertTrue(name_arg(&items[1])?)
        }
        Some("assert-eq") => {
            want(2)?;
            let v = parse_int(&items[2]).ok_or(()).or_else(|_| parse_err(&items[2], "expected an integer"))?;
            Kind::AssertEq(name_arg(&items[1])?, v)
        }
        Some("assert-data") => {
            want(2)?;
            let Sexpr::Str(data, _) = &items[2] else {
                return parse_err(&items[2], "expected a string");
            };
            Kind::AssertData(name_arg(&items[1])?, data.as_bytes().to_vec())
        }
        Some("discharge") => {
            want(2)?;
            Kind::Discharge(name_arg(&items[1])?, name_arg(&items[2])?)
        }
        _ => {
            // A bare syscall form is shorthand for `call`.
            let (call, args) = parse_call(&items[0], &items[1..])?;
            Kind::Call(call, args)
        }
    };
    Ok(Command {
        line,
        text: s.to_string(),
        kind,
    })
}

impl Script {
    pub fn parse(text: &str) -> Result<Script, ScriptError> {
        let forms = sexpr::read_all(text).map_err(|e| ScriptError {
            line: e.pos.line,
            kind: ScriptErrorKind::Parse(e.message),
        })?;
        let commands = forms.iter().map(parse_command).collect::<Result<_, _>>()?;
        Ok(Script { commands })
    }

    pub fn len(&self) -> usize {
        self.commands.len()
    }

    pub fn is_empty(&self) -> bool {
        self.commands.is_empty()
    }

    /// Runs every command in order.  On failure the transcript so far is
    /// returned alongside the error.
    pub fn run(&self, driver: &mut Driver) -> Result<Transcript, ScriptFailure> {
        self.run_with(driver, &[])
    }

    /// Like [`Script::run`], with `preset` names already bound to values.
    pub fn run_with(&self, driver: &mut Driver, preset: &[(&str, u64)]) -> Result<Transcript, ScriptFailure> {
        let bindings = preset
            .iter()
            .map(|(name, v)| {
                let binding = Binding {
                    primary: Some(Output::Value(*v)),
                    fields: Vec::new(),
                };
                (name.to_string(), binding)
            })
            .collect();
        let mut runner = Runner {
            driver,
            bindings,
            last: None,
        };
        let mut transcript = Transcript::default();
        for c in &self.commands {
            match runner.execute(c) {
                Ok(summary) => transcript.lines.push(format!("{}: {} -> {}", c.line, c.text, summary)),
                Err(error) => {
                    transcript.lines.push(format!("{}: {} -> {}", c.line, c.text, error.kind_text()));
                    return Err(ScriptFailure { transcript, error });
                }
            }
        }
        Ok(transcript)
    }
}

impl ScriptError {
    fn kind_text(&self) -> String {
        let s = self.to_string();
        s.split_once(": ").map(|(_, k)| k.to_string()).unwrap_or(s)
    }
}

/// One line per executed command with its status and bound values.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Transcript {
    pub lines: Vec<String>,
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for l in &self.lines {
            writeln!(f, "{l}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Error)]
#[error("{error}")]
pub struct ScriptFailure {
    pub transcript: Transcript,
    pub error: ScriptError,
}

/// Parses and runs `text`.
pub fn run_script(text: &str, driver: &mut Driver) -> Result<Transcript, ScriptFailure> {
    let script = Script::parse(text).map_err(|error| ScriptFailure {
        transcript: Transcript::default(),
        error,
    })?;
    script.run(driver)
}

#[derive(Clone, Debug)]
struct Binding {
    primary: Option<Output>,
    fields: Vec<(&'static str, Output)>,
}

struct Runner<'d> {
    driver: &'d mut Driver,
    bindings: BTreeMap<String, Binding>,
    last: Option<Status>,
}

/// Builds terms through the driver, resolving bare names to bindings.
struct Scope<'a> {
    driver: &'a mut Driver,
    bindings: &'a BTreeMap<String, Binding>,
}

fn word(binding: &Binding) -> Option<u64> {
    match binding.primary {
        Some(Output::Value(v)) => Some(v),
        _ => None,
    }
}

impl Builder for Scope<'_> {
    fn type_former_named(&self, name: &str) -> Option<Handle> {
        self.driver.type_former_named(name)
    }

    fn constant_named(&self, name: &str) -> Option<Handle> {
        self.driver.constant_named(name)
    }

    fn binding(&self, name: &str) -> Option<Handle> {
        self.bindings.get(name).and_then(word).map(Handle::new)
    }

    fn type_variable(&mut self, name: &str) -> kernel::Result<Handle> {
        self.driver.type_variable(name)
    }

    fn type_application(&mut self, former: Handle, args: &[Handle]) -> kernel::Result<Handle> {
        self.driver.type_application(former, args)
    }

    fn variable(&mut self, name: &str, ty: Handle) -> kernel::Result<Handle> {
        self.driver.variable(name, ty)
    }

    fn constant(&mut self, constant: Handle, inst: &[(Handle, Handle)]) -> kernel::Result<Handle> {
        self.driver.constant(constant, inst)
    }

    fn application(&mut self, left: Handle, right: Handle) -> kernel::Result<Handle> {
        self.driver.application(left, right)
    }

    fn lambda(&mut self, name: &str, ty: Handle, body: Handle) -> kernel::Result<Handle> {
        self.driver.lambda(name, ty, body)
    }
}

fn render(o: &Output) -> String {
    match o {
        Output::Value(v) => v.to_string(),
        Output::List(vs) => format!("[{}]", vs.iter().map(u64::to_string).collect::<Vec<_>>().join(" ")),
        Output::Bytes(b) => sexpr::quote(&String::from_utf8_lossy(b)),
    }
}

fn status_text(s: Status) -> String {
    match s.error() {
        Some(e) => format!("status {} {:?}", s.code(), e),
        None => format!("status {}", s.code()),
    }
}

impl Runner<'_> {
    fn lookup(&self, line: usize, name: &str) -> Result<&Output, ScriptError> {
        let unbound = || ScriptError {
            line,
            kind: ScriptErrorKind::Unbound(name.into()),
        };
        match name.split_once('.') {
            Some((base, field)) => {
                let b = self.bindings.get(base).ok_or_else(unbound)?;
                b.fields.iter().find(|(f, _)| *f == field).map(|(_, o)| o).ok_or_else(unbound)
            }
            None => self.bindings.get(name).and_then(|b| b.primary.as_ref()).ok_or_else(unbound),
        }
    }

    fn lookup_word(&self, line: usize, name: &str) -> Result<u64, ScriptError> {
        match self.lookup(line, name)? {
            Output::Value(v) => Ok(*v),
            other => fail(line, ScriptErrorKind::Argument(format!("{name} is {} not a value", render(other)))),
        }
    }

    fn build(&mut self, s: &Sexpr) -> Result<u64, ScriptError> {
        let line = s.pos().line;
        let mut scope = Scope {
            driver: self.driver,
            bindings: &self.bindings,
        };
        let built = if matches!(s.head(), Some(h) if TYPE_FORMS.contains(&h)) {
            syntax::type_from_sexpr(s).and_then(|ast| syntax::build_type(&mut scope, &ast))
        } else {
            syntax::term_from_sexpr(s).and_then(|ast| syntax::build_term(&mut scope, &ast))
        };
        built
            .map(Handle::value)
            .map_err(|e| ScriptError {
                line,
                kind: match e.kind {
                    syntax::SyntaxErrorKind::Unbound(n) => ScriptErrorKind::Unbound(n),
                    _ => ScriptErrorKind::Argument(e.to_string()),
                },
            })
    }

    fn value(&mut self, s: &Sexpr) -> Result<u64, ScriptError> {
        if let Some(v) = parse_int(s) {
            return Ok(v);
        }
        match s {
            Sexpr::Atom(a, p) => self.lookup_word(p.line, a),
            Sexpr::List(..) => self.build(s),
            Sexpr::Str(_, _) => fail(s.pos().line, ScriptErrorKind::Argument("a string is not a value".into())),
        }
    }

    fn input(&mut self, p: Param, s: Option<&Sexpr>) -> Result<Input, ScriptError> {
        let Some(s) = s else {
            return Ok(match p {
                Param::Array(_) => Input::Handles(Vec::new()),
                _ => Input::Pairs(Vec::new()),
            });
        };
        let line = s.pos().line;
        let bad = |m: &str| fail(line, ScriptErrorKind::Argument(format!("{}: {m}", p.name())));
        match p {
            Param::Value(_) => self.value(s).map(Input::Value),
            Param::Str(_) => match s {
                Sexpr::Str(t, _) | Sexpr::Atom(t, _) => Ok(Input::Str(t.clone())),
                _ => bad("expected a string"),
            },
            Param::Bytes(_) => match s {
                Sexpr::Str(t, _) => Ok(Input::Bytes(t.as_bytes().to_vec())),
                _ => bad("expected a string"),
            },
            Param::Buffer(_) => match parse_int(s) {
                Some(n) => Ok(Input::Buffer(n)),
                None => bad("expected a buffer length"),
            },
            Param::Array(_) => match s {
                Sexpr::List(items, _) if s.head() == Some("array") => {
                    let vs = items[1..].iter().map(|i| self.value(i)).collect::<Result<_, _>>()?;
                    Ok(Input::Handles(vs))
                }
                Sexpr::Atom(a, _) => match self.lookup(line, a)? {
                    Output::List(vs) => Ok(Input::Handles(vs.clone())),
                    Output::Value(v) => Ok(Input::Handles(vec![*v])),
                    Output::Bytes(_) => bad("bytes are not an array"),
                },
                _ => bad("expected (array ...)"),
            },
            Param::Pairs(_) => match s {
                Sexpr::List(items, _) if s.head() == Some("subst") => {
                    let mut pairs = Vec::new();
                    for item in &items[1..] {
                        match item.as_list() {
                            Some([k, v]) => pairs.push((self.value(k)?, self.value(v)?)),
                            _ => return fail(item.pos().line, ScriptErrorKind::Argument("expected (key image)".into())),
                        }
                    }
                    Ok(Input::Pairs(pairs))
                }
                _ => bad("expected (subst (key image)*)"),
            },
            _ => unreachable!("outputs are not inputs"),
        }
    }

    fn call(&mut self, call: Syscall, args: &[Sexpr]) -> Result<kernel::driver::Outcome, ScriptError> {
        let mut inputs = Vec::new();
        for (i, p) in input_params(call).enumerate() {
            inputs.push(self.input(p, args.get(i))?);
        }
        let out = self.driver.call(call, &inputs);
        self.last = Some(out.status);
        Ok(out)
    }

    fn execute(&mut self, c: &Command) -> Result<String, ScriptError> {
        let line = c.line;
        match &c.kind {
            Kind::Let(name, Expr::Call(call, args)) => {
                let out = self.call(*call, args)?;
                let fields: Vec<_> = out.outputs.clone();
                let summary = fields
                    .iter()
                    .map(|(f, o)| format!(" {name}.{f}={}", render(o)))
                    .collect::<String>();
                let primary = fields.first().map(|(_, o)| o.clone());
                self.bindings.insert(name.clone(), Binding { primary, fields });
                Ok(format!("{}{summary}", status_text(out.status)))
            }
            Kind::Let(name, Expr::Term(t)) => {
                let h = self.build(t)?;
                self.last = Some(Status::SUCCESS);
                self.bindings.insert(
                    name.clone(),
                    Binding {
                        primary: Some(Output::Value(h)),
                        fields: vec![("handle", Output::Value(h))],
                    },
                );
                Ok(format!("status 0 {name}={h}"))
            }
            Kind::Call(call, args) => {
                let out = self.call(*call, args)?;
                let summary = out
                    .outputs
                    .iter()
                    .map(|(f, o)| format!(" {f}={}", render(o)))
                    .collect::<String>();
                Ok(format!("{}{summary}", status_text(out.status)))
            }
            Kind::AssertStatus(code) => {
                if self.last.map(|s| s.code()) != Some(*code) {
                    return fail(
                        line,
                        ScriptErrorKind::AssertionFailed {
                            expected: format!("status {code}"),
                            actual: self.last.map_or("no syscall yet".into(), status_text),
                        },
                    );
                }
                Ok("ok".into())
            }
            Kind::AssertAlphaEq(a, b) => {
                let (ha, hb) = (self.lookup_word(line, a)?, self.lookup_word(line, b)?);
                let heaps = self.driver.kernel().heaps();
                match heaps.alpha_equivalent(Handle::new(ha), Handle::new(hb)) {
                    Ok(true) => Ok("ok".into()),
                    Ok(false) => fail(
                        line,
                        ScriptErrorKind::AssertionFailed {
                            expected: heaps.print_term(Handle::new(ha)).unwrap_or_default(),
                            actual: heaps.print_term(Handle::new(hb)).unwrap_or_default(),
                        },
                    ),
                    Err(e) => fail(line, ScriptErrorKind::Argument(e.to_string())),
                }
            }
            Kind::AssertTrue(name) => match self.lookup_word(line, name)? {
                0 => fail(
                    line,
                    ScriptErrorKind::AssertionFailed {
                        expected: "non-zero".into(),
                        actual: "0".into(),
                    },
                ),
                _ => Ok("ok".into()),
            },
            Kind::AssertEq(name, expected) => {
                let actual = self.lookup_word(line, name)?;
                if actual != *expected {
                    return fail(
                        line,
                        ScriptErrorKind::AssertionFailed {
                            expected: expected.to_string(),
                            actual: actual.to_string(),
                        },
                    );
                }
                Ok("ok".into())
            }
            Kind::AssertData(name, expected) => {
                let actual = match (self.lookup(line, name)?, name.split_once('.')) {
                    (Output::Bytes(b), Some((base, _))) => {
                        // Buffers are trimmed to the count the same call reported.
                        let count = self.lookup(line, &format!("{base}.count")).ok().cloned();
                        match count {
                            Some(Output::Value(n)) => b[..(n as usize).min(b.len())].to_vec(),
                            _ => b.clone(),
                        }
                    }
                    (Output::Bytes(b), None) => b.clone(),
                    (other, _) => return fail(line, ScriptErrorKind::Argument(format!("{name} is {}", render(other)))),
                };
                if &actual != expected {
                    return fail(
                        line,
                        ScriptErrorKind::AssertionFailed {
                            expected: render(&Output::Bytes(expected.clone())),
                            actual: render(&Output::Bytes(actual)),
                        },
                    );
                }
                Ok("ok".into())
            }
            Kind::Discharge(ob, th) => {
                let id = match self.lookup(line, &format!("{ob}.obligation")) {
                    Ok(Output::Value(v)) => *v,
                    _ => self.lookup_word(line, ob)?,
                };
                let th = self.lookup_word(line, th)?;
                let out = self.driver.call(Syscall::ObligationDischarge, &[id.into(), th.into()]);
                self.last = Some(out.status);
                Ok(status_text(out.status))
            }
        }
    }
}
