//! Two-level minimization of truth tables, mapping of expressions onto
//! library gates, and structural circuit metrics.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::{design_window, output_latency, predict_levels, BitSchedule, DEFAULT_FLUCTUATION_FLOOR};
use crate::kinetics::SignalProfile;
use crate::library::{
    build_gate_unchecked, CircuitBuilder, CoreLevels, CoreNames, GateKind, ModuleParams, Signal, Threshold,
};
use crate::network::{JunctionKind, Netlist};

/// Variable names by input index; index 0 is the most significant bit.
pub const VARIABLES: [char; 4] = ['x', 'y', 'z', 'w'];
pub const MIN_ARITY: usize = 2;
pub const MAX_ARITY: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct TruthTable {
    arity: usize,
    bits: Vec<bool>,
}

impl TruthTable {
    pub fn new(arity: usize, bits: Vec<bool>) -> Result<Self> {
        if !(MIN_ARITY..=MAX_ARITY).contains(&arity) {
            return Err(Error::TruthTable(format!(
                "arity must lie in [{MIN_ARITY}, {MAX_ARITY}], got {arity}"
            )));
        }
        if bits.len() != 1 << arity {
            return Err(Error::TruthTable(format!(
                "arity {arity} needs {} output bits, got {}",
                1 << arity,
                bits.len()
            )));
        }
        Ok(Self { arity, bits })
    }

    /// Parses a bit string such as `0110`, outputs in input-lexicographic order.
    pub fn parse(text: &str) -> Result<Self> {
        let bits = text
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::TruthTable(format!("unexpected character `{other}` in truth table"))),
            })
            .collect::<Result<Vec<bool>>>()?;
        let arity = bits.len().trailing_zeros() as usize;
        if !bits.len().is_power_of_two() || !(MIN_ARITY..=MAX_ARITY).contains(&arity) {
            return Err(Error::TruthTable(format!(
                "a truth table needs 4, 8 or 16 bits (arity 2 to 4), got {}",
                bits.len()
            )));
        }
        Self::new(arity, bits)
    }

    pub fn from_fn(arity: usize, f: impl Fn(&[bool]) -> bool) -> Result<Self> {
        let bits = (0..1usize << arity)
            .map(|i| f(&crate::harness::combination(i, arity)))
            .collect();
        Self::new(arity, bits)
    }

    /// All tables of the given arity.
    pub fn all(arity: usize) -> Result<Vec<Self>> {
        if !(MIN_ARITY..=3).contains(&arity) {
            return Err(Error::TruthTable(format!("enumerating arity {arity} tables is not supported")));
        }
        let rows = 1usize << arity;
        (0..1u64 << rows)
            .map(|code| Self::new(arity, (0..rows).map(|r| (code >> (rows - 1 - r)) & 1 == 1).collect()))
            .collect()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn eval(&self, inputs: &[bool]) -> bool {
        let index = inputs
            .iter()
            .take(self.arity)
            .fold(0usize, |acc, b| (acc << 1) | usize::from(*b));
        self.bits[index]
    }
}

impl fmt::Display for TruthTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.bits {
            f.write_str(if *b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Product term; `mask` marks absent variables, `value` holds the
/// polarity of present ones (bit `arity - 1 - i` for variable `i`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Implicant {
    pub value: u32,
    pub mask: u32,
}

impl Implicant {
    pub fn covers(&self, minterm: u32) -> bool {
        minterm & !self.mask == self.value
    }

    pub fn literal_count(&self, arity: usize) -> usize {
        arity - (self.mask & ((1 << arity) - 1)).count_ones() as usize
    }

    /// Per-variable literal: `Some(true)` positive, `Some(false)` negated.
    pub fn literal(&self, arity: usize, var: usize) -> Option<bool> {
        let bit = 1 << (arity - 1 - var);
        (self.mask & bit == 0).then_some(self.value & bit != 0)
    }

    fn sort_key(&self, arity: usize) -> Vec<u8> {
        (0..arity)
            .map(|v| match self.literal(arity, v) {
                Some(true) => 0,
                Some(false) => 1,
                None => 2,
            })
            .collect()
    }
}

/// Sum of products over `arity` variables; no terms means constant 0.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sop {
    pub arity: usize,
    pub terms: Vec<Implicant>,
}

impl Sop {
    pub fn literal_count(&self) -> usize {
        self.terms.iter().map(|t| t.literal_count(self.arity)).sum()
    }

    pub fn eval(&self, inputs: &[bool]) -> bool {
        let minterm = inputs
            .iter()
            .take(self.arity)
            .fold(0u32, |acc, b| (acc << 1) | u32::from(*b));
        self.terms.iter().any(|t| t.covers(minterm))
    }

    pub fn table(&self) -> TruthTable {
        TruthTable::from_fn(self.arity, |b| self.eval(b)).expect("arity already checked")
    }

    pub fn to_expr(&self) -> Expr {
        let product = |t: &Implicant| {
            (0..self.arity)
                .filter_map(|v| {
                    t.literal(self.arity, v).map(|pos| {
                        if pos {
                            Expr::Var(v)
                        } else {
                            Expr::Not(Box::new(Expr::Var(v)))
                        }
                    })
                })
                .reduce(|a, b| Expr::And(Box::new(a), Box::new(b)))
                .unwrap_or(Expr::Const(true))
        };
        self.terms
            .iter()
            .map(product)
            .reduce(|a, b| Expr::Or(Box::new(a), Box::new(b)))
            .unwrap_or(Expr::Const(false))
    }
}

impl fmt::Display for Sop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let several = self.terms.len() > 1;
        for (i, t) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" | ")?;
            }
            let literals: Vec<String> = (0..self.arity)
                .filter_map(|v| {
                    t.literal(self.arity, v)
                        .map(|pos| format!("{}{}", if pos { "" } else { "!" }, VARIABLES[v]))
                })
                .collect();
            match literals.len() {
                0 => f.write_str("1")?,
                1 => f.write_str(&literals[0])?,
                _ if several => write!(f, "({})", literals.join(" & "))?,
                _ => f.write_str(&literals.join(" & "))?,
            }
        }
        Ok(())
    }
}

fn prime_implicants(arity: usize, minterms: &[u32]) -> BTreeSet<Implicant> {
    let mut current: BTreeSet<Implicant> = minterms.iter().map(|&m| Implicant { value: m, mask: 0 }).collect();
    let mut primes = BTreeSet::new();
    while !current.is_empty() {
        let items: Vec<Implicant> = current.iter().copied().collect();
        let mut next = BTreeSet::new();
        let mut merged = BTreeSet::new();
        for (i, a) in items.iter().enumerate() {
            for b in &items[i + 1..] {
                let diff = a.value ^ b.value;
                if a.mask == b.mask && diff.count_ones() == 1 {
                    next.insert(Implicant {
                        value: a.value & !diff,
                        mask: a.mask | diff,
                    });
                    merged.insert(*a);
                    merged.insert(*b);
                }
            }
        }
        primes.extend(items.into_iter().filter(|c| !merged.contains(c)));
        current = next;
    }
    debug_assert!(primes.iter().all(|p| p.mask < 1 << arity));
    primes
}

/// Quine–McCluskey: prime implicants, essential primes, then a greedy
/// cover preferring terms that cover most and have fewest literals.
pub fn minimize(table: &TruthTable) -> Sop {
    let n = table.arity();
    let minterms: Vec<u32> = (0..1u32 << n).filter(|&m| table.bits()[m as usize]).collect();
    let primes: Vec<Implicant> = prime_implicants(n, &minterms).into_iter().collect();
    let mut chosen: Vec<Implicant> = Vec::new();
    for &m in &minterms {
        let covering: Vec<&Implicant> = primes.iter().filter(|p| p.covers(m)).collect();
        if covering.len() == 1 && !chosen.contains(covering[0]) {
            chosen.push(*covering[0]);
        }
    }
    let mut uncovered: Vec<u32> = minterms
        .iter()
        .copied()
        .filter(|&m| !chosen.iter().any(|p| p.covers(m)))
        .collect();
    while !uncovered.is_empty() {
        let best = primes
            .iter()
            .filter(|p| !chosen.contains(p))
            .max_by(|a, b| {
                let count = |p: &Implicant| uncovered.iter().filter(|&&m| p.covers(m)).count();
                count(a)
                    .cmp(&count(b))
                    .then(b.literal_count(n).cmp(&a.literal_count(n)))
                    .then(b.sort_key(n).cmp(&a.sort_key(n)))
            })
            .copied()
            .expect("every minterm has a prime implicant");
        chosen.push(best);
        uncovered.retain(|&m| !best.covers(m));
    }
    chosen.sort_by_key(|t| t.sort_key(n));
    Sop { arity: n, terms: chosen }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Const(bool),
    Var(usize),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Xor(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, inputs: &[bool]) -> bool {
        match self {
            Expr::Const(b) => *b,
            Expr::Var(v) => inputs.get(*v).copied().unwrap_or(false),
            Expr::Not(e) => !e.eval(inputs),
            Expr::And(a, b) => a.eval(inputs) && b.eval(inputs),
            Expr::Or(a, b) => a.eval(inputs) || b.eval(inputs),
            Expr::Xor(a, b) => a.eval(inputs) ^ b.eval(inputs),
        }
    }

    pub fn vars(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<usize>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(v) => {
                out.insert(*v);
            }
            Expr::Not(e) => e.collect_vars(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Xor(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// One more than the highest variable index used.
    pub fn arity(&self) -> usize {
        self.vars().last().map_or(0, |v| v + 1)
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Or(..) => 1,
            Expr::Xor(..) => 2,
            Expr::And(..) => 3,
            _ => 4,
        }
    }

    /// Parses `!`, `&`, `^`, `|` (tightest first), parentheses, `0`, `1`
    /// and the variables `x`, `y`, `z`, `w`.
    pub fn parse(text: &str) -> Result<Self> {
        let tokens: Vec<char> = text.chars().filter(|c| !c.is_whitespace()).collect();
        let mut parser = Parser { tokens, pos: 0 };
        let e = parser.or()?;
        if parser.pos != parser.tokens.len() {
            return Err(Error::Expression(format!(
                "unexpected `{}` at position {}",
                parser.tokens[parser.pos], parser.pos
            )));
        }
        Ok(e)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let binary = |f: &mut fmt::Formatter<'_>, a: &Expr, op: &str, b: &Expr| {
            // Operands of a different operator, and right operands of the
            // same one, are parenthesized.
            let wrap = |e: &Expr, right: bool| {
                let nested = e.precedence() < 4;
                nested && (e.precedence() != self.precedence() || right)
            };
            let side = |f: &mut fmt::Formatter<'_>, e: &Expr, right: bool| {
                if wrap(e, right) {
                    write!(f, "({e})")
                } else {
                    write!(f, "{e}")
                }
            };
            side(f, a, false)?;
            write!(f, " {op} ")?;
            side(f, b, true)
        };
        match self {
            Expr::Const(b) => f.write_str(if *b { "1" } else { "0" }),
            Expr::Var(v) => write!(f, "{}", VARIABLES.get(*v).copied().unwrap_or('?')),
            Expr::Not(e) if e.precedence() < 4 => write!(f, "!({e})"),
            Expr::Not(e) => write!(f, "!{e}"),
            Expr::And(a, b) => binary(f, a, "&", b),
            Expr::Or(a, b) => binary(f, a, "|", b),
            Expr::Xor(a, b) => binary(f, a, "^", b),
        }
    }
}

struct Parser {
    tokens: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.tokens.get(self.pos).copied()
    }

    fn binary(&mut self, op: char, next: fn(&mut Self) -> Result<Expr>, make: fn(Box<Expr>, Box<Expr>) -> Expr) -> Result<Expr> {
        let mut lhs = next(self)?;
        while self.peek() == Some(op) {
            self.pos += 1;
            let rhs = next(self)?;
            lhs = make(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn or(&mut self) -> Result<Expr> {
        self.binary('|', Self::xor, Expr::Or)
    }

    fn xor(&mut self) -> Result<Expr> {
        self.binary('^', Self::and, Expr::Xor)
    }

    fn and(&mut self) -> Result<Expr> {
        self.binary('&', Self::unary, Expr::And)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some('!') {
            self.pos += 1;
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        let c = self
            .peek()
            .ok_or_else(|| Error::Expression("unexpected end of expression".into()))?;
        self.pos += 1;
        match c {
            '0' => Ok(Expr::Const(false)),
            '1' => Ok(Expr::Const(true)),
            '(' => {
                let e = self.or()?;
                if self.peek() != Some(')') {
                    return Err(Error::Expression(format!("missing `)` at position {}", self.pos)));
                }
                self.pos += 1;
                Ok(e)
            }
            c => VARIABLES
                .iter()
                .position(|&v| v == c)
                .map(Expr::Var)
                .ok_or_else(|| Error::Expression(format!("unknown symbol `{c}` at position {}", self.pos - 1))),
        }
    }
}

/// Library-gate realization of an expression.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Plan {
    Const(bool),
    Input(usize),
    Not(Box<Plan>),
    And(Box<Plan>, Box<Plan>),
    Or(Box<Plan>, Box<Plan>),
    /// The XOR primitive; it duplicates its operands, so both must be
    /// primary inputs.
    Xor(usize, usize),
}

impl Plan {
    pub fn reaction_count(&self) -> usize {
        match self {
            Plan::Const(_) | Plan::Input(_) => 0,
            Plan::Not(p) => 1 + p.reaction_count(),
            Plan::And(a, b) | Plan::Or(a, b) => 4 + a.reaction_count() + b.reaction_count(),
            Plan::Xor(..) => 9,
        }
    }

    /// The library gate this plan is, when it is exactly one gate on
    /// inputs 0 and 1 (input 0 alone for NOT).
    pub fn as_library_gate(&self) -> Option<GateKind> {
        let pair = |a: &Plan, b: &Plan| matches!((a, b), (Plan::Input(0), Plan::Input(1)));
        match self {
            Plan::And(a, b) if pair(a, b) => Some(GateKind::And),
            Plan::Or(a, b) if pair(a, b) => Some(GateKind::Or),
            Plan::Xor(0, 1) => Some(GateKind::Xor),
            Plan::Not(inner) => match inner.as_ref() {
                Plan::Input(0) => Some(GateKind::Not),
                Plan::And(a, b) if pair(a, b) => Some(GateKind::Nand),
                Plan::Or(a, b) if pair(a, b) => Some(GateKind::Nor),
                _ => None,
            },
            _ => None,
        }
    }

    fn not(p: Plan) -> Plan {
        match p {
            Plan::Const(b) => Plan::Const(!b),
            p => Plan::Not(Box::new(p)),
        }
    }

    fn and(a: Plan, b: Plan) -> Plan {
        match (a, b) {
            (Plan::Const(false), _) | (_, Plan::Const(false)) => Plan::Const(false),
            (Plan::Const(true), p) | (p, Plan::Const(true)) => p,
            (a, b) => Plan::And(Box::new(a), Box::new(b)),
        }
    }

    fn or(a: Plan, b: Plan) -> Plan {
        match (a, b) {
            (Plan::Const(true), _) | (_, Plan::Const(true)) => Plan::Const(true),
            (Plan::Const(false), p) | (p, Plan::Const(false)) => p,
            (a, b) => Plan::Or(Box::new(a), Box::new(b)),
        }
    }
}

/// Cheapest library realization of a function of at most two variables
/// `a < b`, given by its outputs on (a, b) = 00, 01, 10, 11.
fn lookup(a: usize, b: usize, t: [bool; 4]) -> Plan {
    let (ia, ib) = (|| Plan::Input(a), || Plan::Input(b));
    let code = t.iter().fold(0u8, |acc, bit| (acc << 1) | u8::from(*bit));
    match code {
        0b0000 => Plan::Const(false),
        0b1111 => Plan::Const(true),
        0b0011 => ia(),
        0b0101 => ib(),
        0b1100 => Plan::not(ia()),
        0b1010 => Plan::not(ib()),
        0b0001 => Plan::and(ia(), ib()),
        0b0111 => Plan::or(ia(), ib()),
        0b1110 => Plan::not(Plan::and(ia(), ib())),
        0b1000 => Plan::not(Plan::or(ia(), ib())),
        0b0110 => Plan::Xor(a, b),
        0b1001 => Plan::not(Plan::Xor(a, b)),
        0b0010 => Plan::and(ia(), Plan::not(ib())),
        0b0100 => Plan::and(Plan::not(ia()), ib()),
        0b1011 => Plan::or(ia(), Plan::not(ib())),
        0b1101 => Plan::or(Plan::not(ia()), ib()),
        _ => unreachable!("four-bit code"),
    }
}

/// Greedy gate assignment: subexpressions over at most two variables use
/// the cheapest library pattern (the XOR primitive included); larger ones
/// map operator by operator.
pub fn plan(expr: &Expr) -> Result<Plan> {
    let vars: Vec<usize> = expr.vars().into_iter().collect();
    if vars.len() <= 2 {
        let a = vars.first().copied().unwrap_or(0);
        let b = vars.get(1).copied().unwrap_or(a);
        let arity = vars.last().map_or(1, |v| v + 1);
        let mut t = [false; 4];
        for (i, slot) in t.iter_mut().enumerate() {
            let mut inputs = vec![false; arity];
            inputs[a] = i & 2 != 0;
            inputs[b] = i & 1 != 0;
            // With one variable, `a == b` and the last assignment wins;
            // use the a-major rows so the result is a function of `a`.
            if a == b {
                inputs[a] = i & 2 != 0;
            }
            *slot = expr.eval(&inputs);
        }
        return Ok(lookup(a, b, t));
    }
    Ok(match expr {
        Expr::Not(e) => Plan::not(plan(e)?),
        Expr::And(l, r) => Plan::and(plan(l)?, plan(r)?),
        Expr::Or(l, r) => Plan::or(plan(l)?, plan(r)?),
        Expr::Xor(..) => {
            return Err(Error::Unsupported {
                element: expr.to_string(),
                reason: "XOR over more than two variables would need fan-out of an internal signal".into(),
            })
        }
        Expr::Const(_) | Expr::Var(_) => unreachable!("handled by the lookup"),
    })
}

/// Injected levels of one AND/OR core rescaled to its input fluxes.
fn core_levels(p: &ModuleParams, kind: Threshold, a: &Signal, b: &Signal) -> CoreLevels {
    let g = &p.geometry;
    let q_m = p.inlet_flow(g.arm_width);
    let q_aux = p.inlet_flow(g.width);
    let (fa, fb) = (a.high_flux, b.high_flux);
    let threshold_flux = match kind {
        // Between the larger single-input level and the both-HIGH level.
        Threshold::And => 0.5 * (fa.max(fb) + fa + fb),
        // Half of the smaller single-input level.
        Threshold::Or => 0.5 * fa.min(fb),
    };
    CoreLevels {
        m_a: p.c_m.max(fa / q_m),
        m_b: p.c_m.max(fb / q_m),
        thl: threshold_flux / q_aux,
        amp: p.input_flux() / q_aux,
    }
}

struct Emitter<'a> {
    c: CircuitBuilder<'a>,
    profiles: Vec<SignalProfile>,
    stage: usize,
    occurrence: usize,
}

impl Emitter<'_> {
    fn next_stage(&mut self) -> usize {
        self.stage += 1;
        self.stage
    }

    fn input(&mut self, v: usize, prefix: &str) -> Result<Signal> {
        self.occurrence += 1;
        let arm = self.c.p.geometry.arm_width;
        self.c.set_prefix(prefix);
        let name = format!("I{}_{}", v + 1, self.occurrence);
        self.c
            .inlet(&name, &format!("I{}", v + 1), self.profiles[v].clone(), arm, Some(v))
    }

    fn emit(&mut self, plan: &Plan) -> Result<Signal> {
        let p = self.c.p;
        match plan {
            Plan::Const(b) => {
                self.c.set_prefix("");
                let level = p.inputs[0].high_level();
                let profile = if *b { SignalProfile::constant(level)? } else { SignalProfile::empty() };
                self.c.inlet("C", "C", profile, p.geometry.arm_width, None)
            }
            Plan::Input(v) => self.input(*v, ""),
            Plan::Not(inner) => {
                let s = self.emit(inner)?;
                let k = self.next_stage();
                self.c.set_prefix(&format!("s{k}_"));
                let level = 0.5 * s.high_flux / p.inlet_flow(p.geometry.width);
                self.c.not(&s, &format!("R{k}"), level)
            }
            Plan::And(l, r) | Plan::Or(l, r) => {
                let a = self.emit(l)?;
                let b = self.emit(r)?;
                let kind = if matches!(plan, Plan::And(..)) { Threshold::And } else { Threshold::Or };
                let k = self.next_stage();
                self.c.set_prefix(&format!("s{k}_"));
                let levels = core_levels(p, kind, &a, &b);
                self.c.core(kind, &a, &b, &CoreNames::suffixed(&k.to_string()), levels)
            }
            Plan::Xor(va, vb) => {
                let k = self.next_stage();
                let mut halves = Vec::new();
                for (half, kind) in [("and", Threshold::And), ("or", Threshold::Or)] {
                    let prefix = format!("s{k}_{half}_");
                    let a = self.input(*va, &prefix)?;
                    let b = self.input(*vb, &prefix)?;
                    self.c.set_prefix(&prefix);
                    let names = CoreNames {
                        m: format!("M{k}"),
                        ..CoreNames::suffixed(&format!("{k}{}", if kind == Threshold::And { "a" } else { "o" }))
                    };
                    let levels = core_levels(p, kind, &a, &b);
                    halves.push(self.c.core(kind, &a, &b, &names, levels)?);
                }
                self.c.set_prefix(&format!("s{k}_"));
                let len = p.geometry.complement_length;
                self.c.complement(&halves[0], &halves[1], JunctionKind::Converge, len, "xor")
            }
        }
    }
}

/// Emits a cascaded netlist for `expr`, driving input `v` with the
/// Gray-code schedule over `arity` inputs. A plan that is exactly one
/// library gate yields that gate.
pub fn map_to_netlist(expr: &Expr, arity: usize, params: &ModuleParams) -> Result<Netlist> {
    if expr.arity() > arity {
        return Err(Error::Expression(format!(
            "expression uses {} inputs but the circuit has {arity}",
            expr.arity()
        )));
    }
    let schedule = BitSchedule::gray(arity);
    let level = params.inputs[0].high_level().max(params.inputs[1].high_level());
    let profiles = (0..arity)
        .map(|v| schedule.input_profile(v, level))
        .collect::<Result<Vec<_>>>()?;
    let plan = plan(expr)?;
    let netlist = if let Some(kind) = plan.as_library_gate() {
        let params = ModuleParams {
            inputs: [profiles[0].clone(), profiles[1].clone()],
            ..params.clone()
        };
        build_gate_unchecked(kind, &params)?
    } else {
        let mut e = Emitter {
            c: CircuitBuilder::new(params),
            profiles,
            stage: 0,
            occurrence: 0,
        };
        let out = e.emit(&plan)?;
        e.c.output(&out);
        e.c.finish()
    };
    let prediction = predict_levels(&netlist)?;
    let window = design_window(&netlist, &prediction, DEFAULT_FLUCTUATION_FLOOR);
    if !window.pass() {
        return Err(Error::DesignWindow(window.violations().join("; ")));
    }
    Ok(netlist)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct CircuitMetrics {
    pub channels: usize,
    /// Total channel length [m].
    pub total_length: f64,
    pub species: usize,
    pub reactions: usize,
    /// Longest inlet-to-output convective delay [s].
    pub latency: f64,
}

pub fn metrics(netlist: &Netlist) -> Result<CircuitMetrics> {
    let latency = if netlist.output_ref().is_some() {
        output_latency(netlist)?
    } else {
        0.0
    };
    Ok(CircuitMetrics {
        channels: netlist.channels.len(),
        total_length: netlist.channels.iter().map(|c| c.length).sum(),
        species: netlist.species.len(),
        reactions: netlist.reaction_count(),
        latency,
    })
}

#[derive(Debug, Clone)]
pub struct Synthesis {
    pub table: TruthTable,
    pub sop: Sop,
    pub plan: Plan,
    pub netlist: Netlist,
    pub metrics: CircuitMetrics,
}

/// Minimizes `table`, maps it onto library gates and measures the result.
pub fn synthesize(table: &TruthTable, params: &ModuleParams) -> Result<Synthesis> {
    let sop = minimize(table);
    let expr = sop.to_expr();
    let plan = plan(&expr)?;
    let netlist = map_to_netlist(&expr, table.arity(), params)?;
    let metrics = metrics(&netlist)?;
    Ok(Synthesis {
        table: table.clone(),
        sop,
        plan,
        netlist,
        metrics,
    })
}
