//! Boolean circuits defining 0/1 polytopes, their lowering to NOR gates, and
//! compilation of a NOR circuit to a face of COR(n) cut out by valid
//! hyperplanes. Composing with [`crate::cpext`] yields a completely positive
//! lift of the polytope `conv{y : C(y) = 1}`.
//!
//! Netlist format, one directive per line (`#` starts a comment):
//!
//! ```text
//! inputs 3
//! advice 101
//! gate g1 NOR y1 x2
//! gate g2 AND g1 c1
//! gate g3 NOT y3
//! output g2
//! ```
//!
//! Inputs are `y1..yd`, advice bits `x1..xk`, constants `c0`/`c1`; gates may
//! only read wires defined above them.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::cones::{int, Rational};
use crate::cpext::{cp_extension_constraints, lift_vector, ConicLift, LinearConstraint};
use crate::error::{Error, Result};
use crate::polytopes::{bits_of, cor_coordinates, cor_index, ZeroOnePolytope};

/// Largest `d` (for truth tables) or `n` (for faces) enumerated exhaustively.
pub const MAX_ENUM_BITS: usize = 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GateKind {
    Nor,
    And,
    Or,
    Not,
}

impl GateKind {
    pub fn arity(self) -> usize {
        match self {
            GateKind::Not => 1,
            _ => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::Nor => "NOR",
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Not => "NOT",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_uppercase().as_str() {
            "NOR" => Some(GateKind::Nor),
            "AND" => Some(GateKind::And),
            "OR" => Some(GateKind::Or),
            "NOT" => Some(GateKind::Not),
            _ => None,
        }
    }

    fn apply(self, v: &[bool]) -> bool {
        match self {
            GateKind::Nor => !(v[0] || v[1]),
            GateKind::And => v[0] && v[1],
            GateKind::Or => v[0] || v[1],
            GateKind::Not => !v[0],
        }
    }
}

/// A wire of a general circuit. Indices are 0-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Wire {
    Input(usize),
    Advice(usize),
    Gate(usize),
    Const(bool),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Gate {
    pub name: String,
    pub kind: GateKind,
    pub inputs: Vec<Wire>,
}

/// Circuit over AND/OR/NOT/NOR with `d` inputs and fixed advice bits.
#[derive(Clone, Debug, PartialEq)]
pub struct Circuit {
    pub inputs: usize,
    pub advice: Vec<bool>,
    pub gates: Vec<Gate>,
    pub output: Wire,
}

impl Circuit {
    pub fn new(inputs: usize, advice: Vec<bool>, gates: Vec<Gate>, output: Wire) -> Result<Self> {
        let c = Circuit {
            inputs,
            advice,
            gates,
            output,
        };
        for g in &c.gates {
            if g.inputs.len() != g.kind.arity() {
                return Err(Error::InvalidInput(format!(
                    "gate {} of kind {} needs {} inputs, got {}",
                    g.name,
                    g.kind.name(),
                    g.kind.arity(),
                    g.inputs.len()
                )));
            }
            for w in &g.inputs {
                c.check_wire(*w)?;
            }
        }
        c.check_wire(c.output)?;
        Ok(c)
    }

    fn check_wire(&self, w: Wire) -> Result<()> {
        let ok = match w {
            Wire::Input(i) => i < self.inputs,
            Wire::Advice(i) => i < self.advice.len(),
            Wire::Gate(i) => i < self.gates.len(),
            Wire::Const(_) => true,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("wire {w:?} does not exist")))
        }
    }

    /// Gate indices in an order where every gate follows its inputs.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let g = self.gates.len();
        let mut indegree = vec![0usize; g];
        let mut readers: Vec<Vec<usize>> = vec![Vec::new(); g];
        for (k, gate) in self.gates.iter().enumerate() {
            for w in &gate.inputs {
                if let Wire::Gate(src) = *w {
                    indegree[k] += 1;
                    readers[src].push(k);
                }
            }
        }
        let mut ready: Vec<usize> = (0..g).filter(|&k| indegree[k] == 0).rev().collect();
        let mut order = Vec::with_capacity(g);
        while let Some(k) = ready.pop() {
            order.push(k);
            for &r in readers[k].iter().rev() {
                indegree[r] -= 1;
                if indegree[r] == 0 {
                    ready.push(r);
                }
            }
            ready.sort_unstable_by(|a, b| b.cmp(a));
        }
        if order.len() != g {
            let stuck: Vec<&str> = (0..g)
                .filter(|&k| indegree[k] > 0)
                .map(|k| self.gates[k].name.as_str())
                .collect();
            return Err(Error::Cyclic(format!("gates on a cycle: {}", stuck.join(", "))));
        }
        Ok(order)
    }

    pub fn evaluate(&self, y: &[u8]) -> Result<bool> {
        if y.len() != self.inputs {
            return Err(crate::error::shape_err(format!("{} input bits", self.inputs), format!("{}", y.len())));
        }
        let order = self.topological_order()?;
        let mut values = vec![false; self.gates.len()];
        let read = |w: Wire, values: &[bool]| match w {
            Wire::Input(i) => y[i] == 1,
            Wire::Advice(i) => self.advice[i],
            Wire::Gate(i) => values[i],
            Wire::Const(c) => c,
        };
        for k in order {
            let ins: Vec<bool> = self.gates[k].inputs.iter().map(|&w| read(w, &values)).collect();
            values[k] = self.gates[k].kind.apply(&ins);
        }
        Ok(read(self.output, &values))
    }
}

/// A wire of a NOR circuit; advice is already resolved to constants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NorWire {
    Input(usize),
    Gate(usize),
    Const(bool),
}

impl NorWire {
    fn constant(self) -> Option<bool> {
        match self {
            NorWire::Const(c) => Some(c),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NorGate {
    pub name: String,
    pub a: NorWire,
    pub b: NorWire,
}

/// Topologically ordered NOR circuit with no gate reading two constants.
#[derive(Clone, Debug, PartialEq)]
pub struct NorCircuit {
    pub inputs: usize,
    pub advice: Vec<bool>,
    pub gates: Vec<NorGate>,
    pub output: NorWire,
}

impl NorCircuit {
    /// Validates ordering and folding.
    pub fn new(inputs: usize, advice: Vec<bool>, gates: Vec<NorGate>, output: NorWire) -> Result<Self> {
        for (k, g) in gates.iter().enumerate() {
            for w in [g.a, g.b] {
                match w {
                    NorWire::Input(i) if i >= inputs => {
                        return Err(Error::InvalidInput(format!("gate {} reads missing input {}", g.name, i + 1)))
                    }
                    NorWire::Gate(j) if j >= k => {
                        return Err(Error::Cyclic(format!(
                            "gate {} reads gate {} which is not defined before it",
                            g.name,
                            j + 1
                        )))
                    }
                    _ => {}
                }
            }
            if g.a.constant().is_some() && g.b.constant().is_some() {
                return Err(Error::InvalidInput(format!("gate {} reads two constants and must be folded", g.name)));
            }
        }
        match output {
            NorWire::Input(i) if i >= inputs => return Err(Error::InvalidInput("output reads a missing input".into())),
            NorWire::Gate(j) if j >= gates.len() => {
                return Err(Error::InvalidInput("output reads a missing gate".into()))
            }
            _ => {}
        }
        Ok(NorCircuit {
            inputs,
            advice,
            gates,
            output,
        })
    }

    pub fn evaluate(&self, y: &[u8]) -> Result<bool> {
        if y.len() != self.inputs {
            return Err(crate::error::shape_err(format!("{} input bits", self.inputs), format!("{}", y.len())));
        }
        let mut values = Vec::with_capacity(self.gates.len());
        let read = |w: NorWire, values: &[bool]| match w {
            NorWire::Input(i) => y[i] == 1,
            NorWire::Gate(i) => values[i],
            NorWire::Const(c) => c,
        };
        for g in &self.gates {
            let v = !(read(g.a, &values) || read(g.b, &values));
            values.push(v);
        }
        Ok(read(self.output, &values))
    }

    /// `{y ∈ {0,1}^d : C(y) = 1}` in mask order (`y_1` is the low bit).
    pub fn vertex_set(&self) -> Result<Vec<Vec<u8>>> {
        if self.inputs > MAX_ENUM_BITS {
            return Err(Error::TooLarge {
                what: "circuit inputs for enumeration",
                limit: MAX_ENUM_BITS,
                got: self.inputs,
            });
        }
        let out: Vec<Vec<u8>> = (0..1usize << self.inputs)
            .into_par_iter()
            .map(|mask| bits_of(mask, self.inputs))
            .filter(|y| self.evaluate(y).unwrap_or(false))
            .collect();
        if out.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        Ok(out)
    }

    pub fn polytope(&self) -> Result<ZeroOnePolytope> {
        ZeroOnePolytope::new(self.inputs, self.vertex_set()?)
    }

    pub fn to_netlist(&self) -> String {
        let wire = |w: NorWire| match w {
            NorWire::Input(i) => format!("y{}", i + 1),
            NorWire::Gate(i) => self.gates[i].name.clone(),
            NorWire::Const(c) => format!("c{}", u8::from(c)),
        };
        let mut s = format!("inputs {}\n", self.inputs);
        if !self.advice.is_empty() {
            let bits: String = self.advice.iter().map(|&b| if b { '1' } else { '0' }).collect();
            s.push_str(&format!("advice {bits}\n"));
        }
        for g in &self.gates {
            s.push_str(&format!("gate {} NOR {} {}\n", g.name, wire(g.a), wire(g.b)));
        }
        s.push_str(&format!("output {}\n", wire(self.output)));
        s
    }
}

/// Emits NOR gates while folding gates with two constant inputs.
struct NorBuilder {
    gates: Vec<NorGate>,
}

impl NorBuilder {
    fn nor(&mut self, name: String, a: NorWire, b: NorWire) -> NorWire {
        if let (Some(x), Some(y)) = (a.constant(), b.constant()) {
            return NorWire::Const(!(x || y));
        }
        self.gates.push(NorGate { name, a, b });
        NorWire::Gate(self.gates.len() - 1)
    }
}

/// Rewrites a circuit with `NOT a = NOR(a,a)`, `OR(a,b) = NOT NOR(a,b)`,
/// `AND(a,b) = NOR(NOT a, NOT b)`, resolving advice to constants and folding
/// gates whose inputs are both constant.
pub fn lower_to_nor(c: &Circuit) -> Result<NorCircuit> {
    let order = c.topological_order()?;
    let mut b = NorBuilder { gates: Vec::new() };
    let mut mapped: Vec<Option<NorWire>> = vec![None; c.gates.len()];
    let resolve = |w: Wire, mapped: &[Option<NorWire>]| match w {
        Wire::Input(i) => NorWire::Input(i),
        Wire::Advice(i) => NorWire::Const(c.advice[i]),
        Wire::Const(v) => NorWire::Const(v),
        Wire::Gate(i) => mapped[i].expect("topological order"),
    };
    for k in order {
        let g = &c.gates[k];
        let ins: Vec<NorWire> = g.inputs.iter().map(|&w| resolve(w, &mapped)).collect();
        let name = &g.name;
        let out = match g.kind {
            GateKind::Nor => b.nor(name.clone(), ins[0], ins[1]),
            GateKind::Not => b.nor(name.clone(), ins[0], ins[0]),
            GateKind::Or => {
                let inner = b.nor(format!("{name}_nor"), ins[0], ins[1]);
                b.nor(name.clone(), inner, inner)
            }
            GateKind::And => {
                let na = b.nor(format!("{name}_na"), ins[0], ins[0]);
                let nb = b.nor(format!("{name}_nb"), ins[1], ins[1]);
                b.nor(name.clone(), na, nb)
            }
        };
        mapped[k] = Some(out);
    }
    let output = resolve(c.output, &mapped);
    NorCircuit::new(c.inputs, c.advice.clone(), b.gates, output)
}

/// Parses the netlist format described in the module docs.
pub fn parse_netlist(text: &str) -> Result<Circuit> {
    let perr = |line: usize, message: String| Error::Parse { line, message };
    let mut inputs: Option<usize> = None;
    let mut advice: Vec<bool> = Vec::new();
    let mut gates: Vec<Gate> = Vec::new();
    let mut names: HashMap<String, usize> = HashMap::new();
    let mut output: Option<Wire> = None;
    let mut declared_later: HashMap<String, usize> = HashMap::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if let Some(name) = line.split_whitespace().nth(1).filter(|_| line.starts_with("gate ")) {
            declared_later.entry(name.to_string()).or_insert(idx + 1);
        }
    }
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let d = inputs;
        let wire = |tok: &str, names: &HashMap<String, usize>| -> Result<Wire> {
            match tok {
                "c0" => return Ok(Wire::Const(false)),
                "c1" => return Ok(Wire::Const(true)),
                _ => {}
            }
            if let Some(&k) = names.get(tok) {
                return Ok(Wire::Gate(k));
            }
            if let Some(rest) = tok.strip_prefix('y') {
                if let Ok(i) = rest.parse::<usize>() {
                    let d = d.ok_or_else(|| perr(lineno, "`inputs` must precede gates".into()))?;
                    if i == 0 || i > d {
                        return Err(perr(lineno, format!("input {tok} out of range 1..={d}")));
                    }
                    return Ok(Wire::Input(i - 1));
                }
            }
            if let Some(rest) = tok.strip_prefix('x') {
                if let Ok(i) = rest.parse::<usize>() {
                    if i == 0 || i > advice.len() {
                        return Err(perr(lineno, format!("advice bit {tok} out of range 1..={}", advice.len())));
                    }
                    return Ok(Wire::Advice(i - 1));
                }
            }
            if declared_later.contains_key(tok) {
                return Err(perr(
                    lineno,
                    format!("wire {tok} is read before its definition; gates must be topologically ordered"),
                ));
            }
            Err(perr(lineno, format!("unknown wire {tok}")))
        };
        match tokens[0] {
            "inputs" => {
                if inputs.is_some() || tokens.len() != 2 {
                    return Err(perr(lineno, "expected a single `inputs <d>`".into()));
                }
                inputs = Some(
                    tokens[1]
                        .parse()
                        .map_err(|_| perr(lineno, format!("bad input count {}", tokens[1])))?,
                );
            }
            "advice" => {
                if tokens.len() > 2 {
                    return Err(perr(lineno, "expected `advice <bitstring>`".into()));
                }
                let bits = tokens.get(1).copied().unwrap_or("");
                advice = bits
                    .chars()
                    .map(|ch| match ch {
                        '0' => Ok(false),
                        '1' => Ok(true),
                        _ => Err(perr(lineno, format!("advice must be a bitstring, got {bits}"))),
                    })
                    .collect::<Result<_>>()?;
            }
            "gate" => {
                if tokens.len() < 4 {
                    return Err(perr(lineno, "expected `gate <name> <KIND> <wire> [<wire>]`".into()));
                }
                let name = tokens[1].to_string();
                let reserved = name == "c0"
                    || name == "c1"
                    || ["y", "x"]
                        .iter()
                        .any(|p| name.strip_prefix(p).is_some_and(|r| r.parse::<usize>().is_ok()));
                if reserved || names.contains_key(&name) {
                    return Err(perr(lineno, format!("gate name {name} is reserved or already used")));
                }
                let kind = GateKind::parse(tokens[2])
                    .ok_or_else(|| perr(lineno, format!("unknown gate kind {}", tokens[2])))?;
                if tokens.len() != 3 + kind.arity() {
                    return Err(perr(lineno, format!("{} takes {} inputs", kind.name(), kind.arity())));
                }
                let ins = tokens[3..]
                    .iter()
                    .map(|t| wire(t, &names))
                    .collect::<Result<Vec<_>>>()?;
                names.insert(name.clone(), gates.len());
                gates.push(Gate {
                    name,
                    kind,
                    inputs: ins,
                });
            }
            "output" => {
                if output.is_some() || tokens.len() != 2 {
                    return Err(perr(lineno, "expected a single `output <wire>`".into()));
                }
                output = Some(wire(tokens[1], &names)?);
            }
            other => return Err(perr(lineno, format!("unknown directive {other}"))),
        }
    }
    let inputs = inputs.ok_or_else(|| perr(0, "missing `inputs <d>`".into()))?;
    let output = output.ok_or_else(|| perr(0, "missing `output <wire>`".into()))?;
    Circuit::new(inputs, advice, gates, output)
}

/// Which construction produced a face equation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EquationKind {
    /// `z_ii + z_jj - z_ij + z_kk - 2z_ik - 2z_jk = 1`
    Nor,
    /// `z_ii + z_kk - 4z_ik = 1` for `NOR(w_i, w_i)`
    NorRepeated,
    /// `z_ii + z_kk - 2z_ik = 1` for `NOR(w_i, 0)`
    NorConstZero,
    /// `-z_kk = 0` for `NOR(w_i, 1)`
    NorConstOne,
    /// `z_nn = 1`
    Output,
}

/// `Σ c_ij z_ij = rhs` over the COR(n) coordinates with integer
/// coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FaceEquation {
    pub kind: EquationKind,
    pub gate: Option<String>,
    /// Lifted indices `(i, j, k)`; `j` is `None` for a constant input.
    pub wires: (usize, Option<usize>, usize),
    /// Nonzero `((i, j), c_ij)` with `i <= j`, in COR coordinate order.
    pub terms: Vec<((usize, usize), i64)>,
    pub rhs: i64,
}

impl FaceEquation {
    /// Dense coefficient vector in [`cor_coordinates`] order.
    pub fn coeffs(&self, n: usize) -> Vec<Rational> {
        let mut out = vec![int(0); n * (n + 1) / 2];
        for &((i, j), c) in &self.terms {
            out[cor_index(n, i, j)] = int(c);
        }
        out
    }

    /// Left-hand side at `z = aaᵀ`, with `a_i` bit `i` of `mask`.
    pub fn lhs_mask(&self, mask: usize) -> i64 {
        self.terms
            .iter()
            .filter(|((i, j), _)| (mask >> i) & (mask >> j) & 1 == 1)
            .map(|&(_, c)| c)
            .sum()
    }

    pub fn lhs_at(&self, a: &[u8]) -> i64 {
        self.lhs_mask(mask_of(a))
    }

    pub fn holds_mask(&self, mask: usize) -> bool {
        self.lhs_mask(mask) == self.rhs
    }

    /// The Boolean relation the equation encodes.
    pub fn relation_mask(&self, mask: usize) -> bool {
        let bit = |i: usize| (mask >> i) & 1 == 1;
        let (i, j, k) = self.wires;
        match self.kind {
            EquationKind::Output => bit(k),
            EquationKind::NorConstOne => !bit(k),
            EquationKind::NorConstZero | EquationKind::NorRepeated => bit(k) == !bit(i),
            EquationKind::Nor => bit(k) == !(bit(i) || bit(j.expect("two wires"))),
        }
    }

    /// Human-readable form with 1-based indices.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for (t, &((i, j), c)) in self.terms.iter().enumerate() {
            let sign = if c < 0 { "-" } else { "+" };
            match (t, c < 0) {
                (0, false) => {}
                (0, true) => out.push('-'),
                _ => out.push_str(&format!(" {sign} ")),
            }
            if c.abs() != 1 {
                out.push_str(&c.abs().to_string());
            }
            out.push_str(&format!("z{}{}", i + 1, j + 1));
        }
        format!("{out} = {}", self.rhs)
    }
}

/// Inverse of [`bits_of`].
pub fn mask_of(a: &[u8]) -> usize {
    a.iter().rev().fold(0usize, |acc, &b| (acc << 1) | usize::from(b))
}

impl fmt::Display for EquationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            EquationKind::Nor => "nor",
            EquationKind::NorRepeated => "nor_repeated",
            EquationKind::NorConstZero => "nor_c0",
            EquationKind::NorConstOne => "nor_c1",
            EquationKind::Output => "output",
        };
        f.write_str(s)
    }
}

/// Face of COR(n) whose projection to the first `d` diagonal coordinates is
/// the circuit's polytope.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledFace {
    pub d: usize,
    pub n: usize,
    pub equations: Vec<FaceEquation>,
    /// Wire name and its 0-based lifted index.
    pub wire_index: Vec<(String, usize)>,
    pub output_index: usize,
}

fn equation(n: usize, kind: EquationKind, gate: Option<String>, wires: (usize, Option<usize>, usize)) -> FaceEquation {
    let mut dense = vec![0i64; n * (n + 1) / 2];
    let mut add = |i: usize, j: usize, v: i64| dense[cor_index(n, i, j)] += v;
    let (i, j, k) = wires;
    let rhs = match kind {
        EquationKind::Nor => {
            let j = j.expect("two wires");
            add(i, i, 1);
            add(j, j, 1);
            add(i, j, -1);
            add(k, k, 1);
            add(i, k, -2);
            add(j, k, -2);
            1
        }
        EquationKind::NorRepeated => {
            add(i, i, 1);
            add(k, k, 1);
            add(i, k, -4);
            1
        }
        EquationKind::NorConstZero => {
            add(i, i, 1);
            add(k, k, 1);
            add(i, k, -2);
            1
        }
        EquationKind::NorConstOne => {
            add(k, k, -1);
            0
        }
        EquationKind::Output => {
            add(k, k, 1);
            1
        }
    };
    let terms = cor_coordinates(n)
        .into_iter()
        .zip(dense)
        .filter(|&(_, c)| c != 0)
        .collect();
    FaceEquation {
        kind,
        gate,
        wires,
        terms,
        rhs,
    }
}

/// One equation per gate plus `z_nn = 1`. Inputs take indices `0..d`; gates
/// follow in order, except that an output gate is moved to the last index.
pub fn compile(c: &NorCircuit) -> Result<CompiledFace> {
    let d = c.inputs;
    let g = c.gates.len();
    let n = d + g;
    let out_gate = match c.output {
        NorWire::Const(v) => return Err(Error::ConstantOutput(v)),
        NorWire::Gate(k) => Some(k),
        NorWire::Input(_) => None,
    };
    let mut gate_index = vec![0usize; g];
    let mut next = d;
    for (k, slot) in gate_index.iter_mut().enumerate() {
        if Some(k) != out_gate {
            *slot = next;
            next += 1;
        }
    }
    if let Some(k) = out_gate {
        gate_index[k] = n - 1;
    }
    let index = |w: NorWire| match w {
        NorWire::Input(i) => Some(i),
        NorWire::Gate(k) => Some(gate_index[k]),
        NorWire::Const(_) => None,
    };
    let mut equations = Vec::with_capacity(g + 1);
    for (k, gate) in c.gates.iter().enumerate() {
        let kk = gate_index[k];
        let name = Some(gate.name.clone());
        let eq = match (index(gate.a), index(gate.b)) {
            (Some(i), Some(j)) if i == j => equation(n, EquationKind::NorRepeated, name, (i, None, kk)),
            (Some(i), Some(j)) => equation(n, EquationKind::Nor, name, (i, Some(j), kk)),
            (Some(i), None) | (None, Some(i)) => {
                let constant = gate.a.constant().or(gate.b.constant()).expect("one constant");
                let kind = if constant {
                    EquationKind::NorConstOne
                } else {
                    EquationKind::NorConstZero
                };
                equation(n, kind, name, (i, None, kk))
            }
            (None, None) => {
                return Err(Error::InvalidInput(format!("gate {} reads two constants", gate.name)));
            }
        };
        equations.push(eq);
    }
    let out = index(c.output).expect("output is not constant");
    equations.push(equation(n, EquationKind::Output, None, (out, None, out)));

    let mut wire_index: Vec<(String, usize)> = (0..d).map(|i| (format!("y{}", i + 1), i)).collect();
    wire_index.extend(c.gates.iter().enumerate().map(|(k, gate)| (gate.name.clone(), gate_index[k])));
    wire_index.sort_by_key(|&(_, i)| i);
    Ok(CompiledFace {
        d,
        n,
        equations,
        wire_index,
        output_index: out,
    })
}

impl CompiledFace {
    fn check_size(&self) -> Result<()> {
        if self.n > MAX_ENUM_BITS {
            return Err(Error::TooLarge {
                what: "compiled face dimension for enumeration",
                limit: MAX_ENUM_BITS,
                got: self.n,
            });
        }
        Ok(())
    }

    pub fn contains_mask(&self, mask: usize) -> bool {
        self.equations.iter().all(|e| e.holds_mask(mask))
    }

    /// Masks of the COR(n) vertices on the face, increasing.
    pub fn face_masks(&self) -> Result<Vec<usize>> {
        self.check_size()?;
        Ok((0..1usize << self.n)
            .into_par_iter()
            .filter(|&mask| self.contains_mask(mask))
            .collect())
    }

    /// Vertices `a` of COR(n) (as 0/1 vectors) with `aaᵀ` on the face, in
    /// mask order.
    pub fn face_vertices(&self) -> Result<Vec<Vec<u8>>> {
        Ok(self.face_masks()?.into_iter().map(|m| bits_of(m, self.n)).collect())
    }

    /// Image of the face under `z ↦ (z_11, …, z_dd)`.
    pub fn project(&self) -> Result<ZeroOnePolytope> {
        let low = (1usize << self.d) - 1;
        let mut masks: Vec<usize> = self.face_masks()?.into_iter().map(|m| m & low).collect();
        masks.sort_unstable();
        masks.dedup();
        if masks.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        ZeroOnePolytope::new(self.d, masks.into_iter().map(|m| bits_of(m, self.d)).collect())
    }

    /// Checks every equation against all `2^n` vertices of COR(n).
    pub fn validity_audit(&self) -> Result<ValidityAudit> {
        self.check_size()?;
        let rows = self
            .equations
            .par_iter()
            .map(|e| {
                let (max, tight_mismatch) = (0..1usize << self.n)
                    .into_par_iter()
                    .map(|mask| {
                        let v = e.lhs_mask(mask);
                        (v, usize::from((v == e.rhs) != e.relation_mask(mask)))
                    })
                    .reduce(|| (i64::MIN, 0), |a, b| (a.0.max(b.0), a.1 + b.1));
                AuditRow {
                    kind: e.kind,
                    gate: e.gate.clone(),
                    valid: max == e.rhs,
                    max,
                    tight_mismatch,
                }
            })
            .collect();
        Ok(ValidityAudit { rows })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditRow {
    pub kind: EquationKind,
    pub gate: Option<String>,
    /// `max_a lhs(aaᵀ)` over all vertices.
    pub max: i64,
    pub valid: bool,
    /// Vertices where tightness disagrees with the gate relation.
    pub tight_mismatch: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidityAudit {
    pub rows: Vec<AuditRow>,
}

impl ValidityAudit {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.valid && r.tight_mismatch == 0)
    }
}

/// A lift constraint `⟨A, Y⟩ = rhs` scaled to integers and stored sparsely,
/// for evaluation at vertex lifts `Y(a)`.
#[derive(Clone, Debug, PartialEq)]
struct IntConstraint {
    entries: Vec<(usize, usize, i64)>,
    rhs: i64,
}

impl IntConstraint {
    fn from_constraint(c: &LinearConstraint) -> Result<Self> {
        let mut scale = BigInt::from(1);
        for v in c.matrix.as_slice().iter().chain([&c.rhs]) {
            scale = scale.lcm(v.denom());
        }
        let to_i64 = |v: &Rational| {
            (v * Rational::from_integer(scale.clone()))
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::InvalidInput(format!("coefficient of {} overflows i64", c.name)))
        };
        let mut entries = Vec::new();
        for r in 0..c.matrix.rows() {
            for col in 0..c.matrix.cols() {
                let v = &c.matrix[(r, col)];
                if !v.is_zero() {
                    entries.push((r, col, to_i64(v)?));
                }
            }
        }
        Ok(IntConstraint {
            entries,
            rhs: to_i64(&c.rhs)?,
        })
    }

    fn holds(&self, v: &[i64]) -> bool {
        self.entries.iter().map(|&(r, c, a)| a * v[r] * v[c]).sum::<i64>() == self.rhs
    }
}

/// The completely positive lift of a circuit-defined polytope with its
/// exhaustive check.
#[derive(Clone, Debug)]
pub struct DefinableLift {
    pub face: CompiledFace,
    pub lift: ConicLift,
    pub polytope: ZeroOnePolytope,
    /// Masks `a ∈ {0,1}^n` whose `Y(a)` satisfies the lift.
    pub feasible: Vec<usize>,
    /// Masks of face vertices.
    pub face_masks: Vec<usize>,
    /// Images of the feasible `Y(a)` under the lift's projection, restricted
    /// to the first `d` diagonal coordinates.
    pub projected: Vec<Vec<u8>>,
}

impl DefinableLift {
    /// Feasible vertex lifts are exactly the face vertices and project onto
    /// the polytope.
    pub fn verified(&self) -> bool {
        let mut proj = self.projected.clone();
        proj.sort_by_key(|v| mask_of(v));
        proj.dedup();
        self.feasible == self.face_masks && proj == self.polytope.vertices
    }
}

/// Lift of COR(n) plus the compiled face equations over `Y_{1+i,1+j}`.
pub fn cp_extension_of_definable(c: &NorCircuit) -> Result<DefinableLift> {
    let polytope = c.polytope()?;
    let face = compile(c)?;
    let face_masks = face.face_masks()?;
    let n = face.n;
    let mut lift = cp_extension_constraints(n);
    for (k, e) in face.equations.iter().enumerate() {
        let terms: Vec<((usize, usize), Rational)> =
            e.terms.iter().map(|&((i, j), c)| ((1 + i, 1 + j), int(c))).collect();
        let name = match &e.gate {
            Some(g) => format!("face_{}_{}", e.kind, g),
            None => format!("face_{}_{k}", e.kind),
        };
        lift.push_equation(name, &terms, int(e.rhs));
    }
    let sparse = lift
        .constraints
        .iter()
        .map(IntConstraint::from_constraint)
        .collect::<Result<Vec<_>>>()?;
    let lifted = |mask: usize| -> Vec<i64> {
        let a = bits_of(mask, n);
        lift_vector(&a)
            .iter()
            .map(|v| v.to_integer().to_i64().expect("0/1 entry"))
            .collect()
    };
    let feasible: Vec<usize> = (0..1usize << n)
        .into_par_iter()
        .filter(|&mask| {
            let v = lifted(mask);
            sparse.iter().all(|c| c.holds(&v))
        })
        .collect();
    let diag: Vec<(usize, usize)> = lift
        .projection
        .iter()
        .filter(|((i, j), _)| i == j && *i < face.d)
        .map(|&(_, rc)| rc)
        .collect();
    let projected = feasible
        .iter()
        .map(|&mask| {
            let v = lifted(mask);
            diag.iter().map(|&(r, col)| u8::try_from(v[r] * v[col]).expect("0/1 entry")).collect()
        })
        .collect();
    Ok(DefinableLift {
        face,
        lift,
        polytope,
        feasible,
        face_masks,
        projected,
    })
}

/// `output = NOR(y1, y2)` on two inputs.
pub fn single_nor_circuit() -> NorCircuit {
    NorCircuit::new(
        2,
        Vec::new(),
        vec![NorGate {
            name: "g1".into(),
            a: NorWire::Input(0),
            b: NorWire::Input(1),
        }],
        NorWire::Gate(0),
    )
    .expect("well-formed")
}

/// NOR circuit accepting the stable sets of a graph on `nodes` vertices.
/// Advice bit `x_k` marks whether the `k`-th pair `i < j` (lexicographic) is
/// an edge. Per pair it computes `y_i ∧ (y_j ∧ x_k)` with the advice as a
/// constant NOR input, then NORs the violations together.
pub fn stable_set_circuit(nodes: usize, edges: &[(usize, usize)]) -> Result<NorCircuit> {
    if nodes < 2 {
        return Err(Error::InvalidInput("stable-set circuit needs at least two nodes".into()));
    }
    if let Some(&(a, b)) = edges.iter().find(|&&(a, b)| a == b || a >= nodes || b >= nodes) {
        return Err(Error::InvalidInput(format!("edge ({a}, {b}) is not a pair of distinct nodes")));
    }
    let mut gates: Vec<NorGate> = Vec::new();
    let push = |gates: &mut Vec<NorGate>, name: String, a: NorWire, b: NorWire| {
        gates.push(NorGate { name, a, b });
        NorWire::Gate(gates.len() - 1)
    };
    let neg: Vec<NorWire> = (0..nodes)
        .map(|i| push(&mut gates, format!("n{}", i + 1), NorWire::Input(i), NorWire::Input(i)))
        .collect();
    let mut advice = Vec::new();
    let mut violations = Vec::new();
    for i in 0..nodes {
        for j in i + 1..nodes {
            let edge = edges.iter().any(|&(a, b)| (a.min(b), a.max(b)) == (i, j));
            advice.push(edge);
            let tag = format!("{}_{}", i + 1, j + 1);
            let hit = push(&mut gates, format!("e{tag}"), neg[j], NorWire::Const(!edge));
            let miss = push(&mut gates, format!("ne{tag}"), hit, hit);
            violations.push(push(&mut gates, format!("v{tag}"), neg[i], miss));
        }
    }
    let mut any = violations[0];
    for (k, &v) in violations.iter().enumerate().skip(1) {
        let none = push(&mut gates, format!("none{k}"), any, v);
        if k + 1 == violations.len() {
            return NorCircuit::new(nodes, advice, gates, none);
        }
        any = push(&mut gates, format!("any{k}"), none, none);
    }
    let ok = push(&mut gates, "ok".into(), any, any);
    NorCircuit::new(nodes, advice, gates, ok)
}
