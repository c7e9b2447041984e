//! QUBO and Ising energy models, the two penalty encodings of the multicut
//! problem, and the mapping from solver output back to a cutset.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::TreeInstance;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuboError {
    #[error("penalty {name} must be positive (got {value})")]
    NonPositivePenalty { name: &'static str, value: String },
    #[error("assignment has length {got}, model has {expected} variables")]
    LengthMismatch { expected: usize, got: usize },
    #[error("variable {index}: {value} is not a binary value")]
    InvalidBinary { index: usize, value: i64 },
    #[error("variable {index}: {value} is not a spin (expected -1 or +1)")]
    InvalidSpin { index: usize, value: i64 },
    #[error("coefficient for {term} is not finite")]
    NonFinite { term: String },
    #[error("variable index {index} out of range for {num_vars} variables")]
    IndexOutOfRange { index: usize, num_vars: usize },
    #[error("label count {got} does not match variable count {expected}")]
    LabelCount { expected: usize, got: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// What a QUBO variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VarLabel {
    /// `x_v`: vertex `v` is removed.
    Vertex(usize),
    /// Bit `bit` of the slack integer attached to constraint path `path`.
    Slack { path: usize, bit: usize },
}

impl fmt::Display for VarLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarLabel::Vertex(v) => write!(f, "vertex:{v}"),
            VarLabel::Slack { path, bit } => write!(f, "slack:{path}:{bit}"),
        }
    }
}

impl FromStr for VarLabel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |p: &str| p.parse::<usize>().map_err(|e| format!("bad label `{s}`: {e}"));
        match parts.as_slice() {
            ["vertex", v] => Ok(VarLabel::Vertex(num(v)?)),
            ["slack", p, b] => Ok(VarLabel::Slack {
                path: num(p)?,
                bit: num(b)?,
            }),
            _ => Err(format!("bad label `{s}`")),
        }
    }
}

/// Sparse linear + upper-triangular quadratic coefficients with an offset.
#[derive(Debug, Clone, PartialEq)]
struct Terms<T> {
    num_vars: usize,
    linear: BTreeMap<usize, T>,
    quadratic: BTreeMap<(usize, usize), T>,
    offset: T,
}

impl<T: Scalar> Terms<T> {
    fn empty(num_vars: usize) -> Self {
        Terms {
            num_vars,
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
            offset: T::zero(),
        }
    }

    fn checked(
        num_vars: usize,
        linear: BTreeMap<usize, T>,
        quadratic: BTreeMap<(usize, usize), T>,
        offset: T,
    ) -> Result<Self, QuboError> {
        if !offset.is_finite_value() {
            return Err(QuboError::NonFinite { term: "offset".into() });
        }
        let mut terms = Terms::empty(num_vars);
        terms.offset = offset;
        for (i, v) in linear {
            if i >= num_vars {
                return Err(QuboError::IndexOutOfRange { index: i, num_vars });
            }
            if !v.is_finite_value() {
                return Err(QuboError::NonFinite { term: format!("linear {i}") });
            }
            terms.add_linear(i, v);
        }
        for ((i, j), v) in quadratic {
            for k in [i, j] {
                if k >= num_vars {
                    return Err(QuboError::IndexOutOfRange { index: k, num_vars });
                }
            }
            if !v.is_finite_value() {
                return Err(QuboError::NonFinite { term: format!("quadratic ({i}, {j})") });
            }
            terms.add_quadratic(i, j, v);
        }
        Ok(terms)
    }

    fn add_linear(&mut self, i: usize, v: T) {
        debug_assert!(i < self.num_vars);
        let entry = self.linear.entry(i).or_insert_with(T::zero);
        *entry = *entry + v;
        if entry.is_zero() {
            self.linear.remove(&i);
        }
    }

    /// Requires `i != j`; the key is stored as `(min, max)`.
    fn add_quadratic(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i != j);
        let key = if i < j { (i, j) } else { (j, i) };
        let entry = self.quadratic.entry(key).or_insert_with(T::zero);
        *entry = *entry + v;
        if entry.is_zero() {
            self.quadratic.remove(&key);
        }
    }

    fn evaluate(&self, value: impl Fn(usize) -> T) -> T {
        let mut e = self.offset;
        for (&i, &u) in &self.linear {
            e = e + u * value(i);
        }
        for (&(i, j), &w) in &self.quadratic {
            e = e + w * value(i) * value(j);
        }
        e
    }

    fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.num_vars];
        for &(i, j) in self.quadratic.keys() {
            deg[i] += 1;
            deg[j] += 1;
        }
        deg
    }
}

/// `E(x) = offset + Σ u_i x_i + Σ_{i<j} w_ij x_i x_j` over `x ∈ {0,1}^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Qubo<T> {
    terms: Terms<T>,
    labels: Vec<VarLabel>,
}

impl<T: Scalar> Qubo<T> {
    /// Validates indices and finiteness; zero coefficients are dropped and
    /// `(j, i)` keys are folded onto `(i, j)`.
    pub fn new(
        labels: Vec<VarLabel>,
        linear: BTreeMap<usize, T>,
        quadratic: BTreeMap<(usize, usize), T>,
        offset: T,
    ) -> Result<Self, QuboError> {
        if let Some((&(i, _), _)) = quadratic.iter().find(|((i, j), _)| i == j) {
            return Err(QuboError::Parse {
                line: 0,
                message: format!("diagonal quadratic key ({i}, {i})"),
            });
        }
        let terms = Terms::checked(labels.len(), linear, quadratic, offset)?;
        Ok(Qubo { terms, labels })
    }

    /// Model without semantic labels (every variable labeled as a vertex
    /// with its own index).
    pub fn unlabeled(
        num_vars: usize,
        linear: BTreeMap<usize, T>,
        quadratic: BTreeMap<(usize, usize), T>,
        offset: T,
    ) -> Result<Self, QuboError> {
        Qubo::new((0..num_vars).map(VarLabel::Vertex).collect(), linear, quadratic, offset)
    }

    pub fn num_vars(&self) -> usize {
        self.terms.num_vars
    }

    pub fn labels(&self) -> &[VarLabel] {
        &self.labels
    }

    pub fn linear(&self) -> &BTreeMap<usize, T> {
        &self.terms.linear
    }

    pub fn quadratic(&self) -> &BTreeMap<(usize, usize), T> {
        &self.terms.quadratic
    }

    pub fn offset(&self) -> T {
        self.terms.offset
    }

    /// Interaction graph edges, ascending.
    pub fn interactions(&self) -> Vec<(usize, usize)> {
        self.terms.quadratic.keys().copied().collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.terms.degrees()
    }

    pub fn energy(&self, x: &[u8]) -> Result<T, QuboError> {
        check_binary(x, self.num_vars())?;
        Ok(self.energy_unchecked(x))
    }

    pub(crate) fn energy_unchecked(&self, x: &[u8]) -> T {
        self.terms
            .evaluate(|i| if x[i] == 1 { T::one() } else { T::zero() })
    }

    /// Spin-model equivalent under `x_i = (1 + s_i) / 2`.
    pub fn to_ising(&self) -> IsingModel<T> {
        let two = T::two();
        let four = two * two;
        let mut terms = Terms::empty(self.num_vars());
        let mut offset = self.offset();
        for (&i, &u) in self.linear() {
            offset = offset + u / two;
            terms.add_linear(i, u / two);
        }
        for (&(i, j), &w) in self.quadratic() {
            let q = w / four;
            offset = offset + q;
            terms.add_linear(i, q);
            terms.add_linear(j, q);
            terms.add_quadratic(i, j, q);
        }
        terms.offset = offset;
        IsingModel { terms }
    }

    /// Same model with the variable labels replaced.
    pub fn with_labels(mut self, labels: Vec<VarLabel>) -> Result<Self, QuboError> {
        if labels.len() != self.num_vars() {
            return Err(QuboError::LabelCount {
                expected: self.num_vars(),
                got: labels.len(),
            });
        }
        self.labels = labels;
        Ok(self)
    }

    /// Text form: header `n m offset`, then `i u_i` for every variable, then
    /// `i j w_ij` for every stored coupling, all ascending.
    pub fn to_text(&self) -> String {
        let mut out = format!(
            "{} {} {}\n",
            self.num_vars(),
            self.terms.quadratic.len(),
            self.offset()
        );
        for i in 0..self.num_vars() {
            let u = self.linear().get(&i).copied().unwrap_or_else(T::zero);
            out.push_str(&format!("{i} {u}\n"));
        }
        for (&(i, j), w) in self.quadratic() {
            out.push_str(&format!("{i} {j} {w}\n"));
        }
        out
    }

    pub fn labels_to_text(&self) -> String {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, l)| format!("{i} {l}\n"))
            .collect()
    }

    /// Parses the text form. Labels default to `vertex:<i>`; attach real ones
    /// with [`Qubo::with_labels`] and [`parse_labels`].
    pub fn from_text(text: &str) -> Result<Self, QuboError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines.next().ok_or(QuboError::Parse {
            line: 1,
            message: "missing header `n m offset`".into(),
        })?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(QuboError::Parse {
                line: hline,
                message: format!("header needs 3 fields `n m offset`, found {}", fields.len()),
            });
        }
        let n: usize = parse_field(fields[0], hline, "n")?;
        let m: usize = parse_field(fields[1], hline, "m")?;
        let offset: T = parse_field(fields[2], hline, "offset")?;
        let mut linear = BTreeMap::new();
        for expect in 0..n {
            let (line, body) = lines.next().ok_or(QuboError::Parse {
                line: hline,
                message: format!("expected {n} linear lines, found {expect}"),
            })?;
            let f: Vec<&str> = body.split_whitespace().collect();
            if f.len() != 2 {
                return Err(QuboError::Parse {
                    line,
                    message: "linear line needs `i u_i`".into(),
                });
            }
            let i: usize = parse_field(f[0], line, "i")?;
            if i != expect {
                return Err(QuboError::Parse {
                    line,
                    message: format!("linear index {i} out of order (expected {expect})"),
                });
            }
            let u: T = parse_field(f[1], line, "u_i")?;
            linear.insert(i, u);
        }
        let mut quadratic = BTreeMap::new();
        let mut prev: Option<(usize, usize)> = None;
        for expect in 0..m {
            let (line, body) = lines.next().ok_or(QuboError::Parse {
                line: hline,
                message: format!("expected {m} quadratic lines, found {expect}"),
            })?;
            let f: Vec<&str> = body.split_whitespace().collect();
            if f.len() != 3 {
                return Err(QuboError::Parse {
                    line,
                    message: "quadratic line needs `i j w_ij`".into(),
                });
            }
            let i: usize = parse_field(f[0], line, "i")?;
            let j: usize = parse_field(f[1], line, "j")?;
            if i >= j || j >= n {
                return Err(QuboError::Parse {
                    line,
                    message: format!("quadratic key ({i}, {j}) must satisfy i < j < {n}"),
                });
            }
            if prev.is_some_and(|p| p >= (i, j)) {
                return Err(QuboError::Parse {
                    line,
                    message: format!("quadratic key ({i}, {j}) out of order or repeated"),
                });
            }
            prev = Some((i, j));
            let w: T = parse_field(f[2], line, "w_ij")?;
            quadratic.insert((i, j), w);
        }
        if let Some((line, _)) = lines.next() {
            return Err(QuboError::Parse {
                line,
                message: "trailing content after declared terms".into(),
            });
        }
        Qubo::unlabeled(n, linear, quadratic, offset)
    }
}

fn parse_field<F: FromStr>(s: &str, line: usize, name: &str) -> Result<F, QuboError> {
    s.parse().map_err(|_| QuboError::Parse {
        line,
        message: format!("cannot parse {name} from `{s}`"),
    })
}

/// Parses a label sidecar (`<i> <label>` per line).
pub fn parse_labels(text: &str) -> Result<Vec<VarLabel>, QuboError> {
    let mut labels = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.trim();
        if body.is_empty() {
            continue;
        }
        let f: Vec<&str> = body.split_whitespace().collect();
        if f.len() != 2 {
            return Err(QuboError::Parse {
                line,
                message: "label line needs `i label`".into(),
            });
        }
        let i: usize = parse_field(f[0], line, "index")?;
        if i != labels.len() {
            return Err(QuboError::Parse {
                line,
                message: format!("label index {i} out of order"),
            });
        }
        labels.push(f[1].parse().map_err(|message| QuboError::Parse { line, message })?);
    }
    Ok(labels)
}

fn check_binary(x: &[u8], n: usize) -> Result<(), QuboError> {
    if x.len() != n {
        return Err(QuboError::LengthMismatch { expected: n, got: x.len() });
    }
    if let Some((index, &v)) = x.iter().enumerate().find(|(_, &v)| v > 1) {
        return Err(QuboError::InvalidBinary { index, value: v as i64 });
    }
    Ok(())
}

fn check_spins(s: &[i8], n: usize) -> Result<(), QuboError> {
    if s.len() != n {
        return Err(QuboError::LengthMismatch { expected: n, got: s.len() });
    }
    if let Some((index, &v)) = s.iter().enumerate().find(|(_, &v)| v != 1 && v != -1) {
        return Err(QuboError::InvalidSpin { index, value: v as i64 });
    }
    Ok(())
}

/// `E(s) = offset + Σ h_i s_i + Σ_{i<j} J_ij s_i s_j` over `s ∈ {-1,+1}^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct IsingModel<T> {
    terms: Terms<T>,
}

impl<T: Scalar> IsingModel<T> {
    pub fn new(
        num_vars: usize,
        h: BTreeMap<usize, T>,
        j: BTreeMap<(usize, usize), T>,
        offset: T,
    ) -> Result<Self, QuboError> {
        if let Some((&(i, _), _)) = j.iter().find(|((i, k), _)| i == k) {
            return Err(QuboError::Parse {
                line: 0,
                message: format!("diagonal coupling key ({i}, {i})"),
            });
        }
        Ok(IsingModel {
            terms: Terms::checked(num_vars, h, j, offset)?,
        })
    }

    pub fn num_vars(&self) -> usize {
        self.terms.num_vars
    }

    pub fn h(&self) -> &BTreeMap<usize, T> {
        &self.terms.linear
    }

    pub fn j(&self) -> &BTreeMap<(usize, usize), T> {
        &self.terms.quadratic
    }

    pub fn offset(&self) -> T {
        self.terms.offset
    }

    pub fn interactions(&self) -> Vec<(usize, usize)> {
        self.terms.quadratic.keys().copied().collect()
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.terms.degrees()
    }

    /// Mean number of couplers per variable.
    pub fn mean_degree(&self) -> f64 {
        if self.num_vars() == 0 {
            0.0
        } else {
            2.0 * self.j().len() as f64 / self.num_vars() as f64
        }
    }

    pub fn energy(&self, s: &[i8]) -> Result<T, QuboError> {
        check_spins(s, self.num_vars())?;
        Ok(self.energy_unchecked(s))
    }

    pub(crate) fn energy_unchecked(&self, s: &[i8]) -> T {
        self.terms
            .evaluate(|i| if s[i] > 0 { T::one() } else { -T::one() })
    }

    /// Binary-model equivalent under `s_i = 2 x_i - 1`.
    pub fn to_qubo(&self) -> Qubo<T> {
        let two = T::two();
        let four = two * two;
        let mut terms = Terms::empty(self.num_vars());
        let mut offset = self.offset();
        for (&i, &h) in self.h() {
            offset = offset - h;
            terms.add_linear(i, two * h);
        }
        for (&(i, j), &c) in self.j() {
            offset = offset + c;
            terms.add_linear(i, -two * c);
            terms.add_linear(j, -two * c);
            terms.add_quadratic(i, j, four * c);
        }
        terms.offset = offset;
        Qubo {
            labels: (0..self.num_vars()).map(VarLabel::Vertex).collect(),
            terms,
        }
    }

    /// Every coefficient (offset included) multiplied by `factor`.
    pub fn scaled(&self, factor: T) -> IsingModel<T> {
        let mut terms = Terms::empty(self.num_vars());
        for (&i, &h) in self.h() {
            terms.add_linear(i, h * factor);
        }
        for (&(i, j), &c) in self.j() {
            terms.add_quadratic(i, j, c * factor);
        }
        terms.offset = self.offset() * factor;
        IsingModel { terms }
    }
}

pub fn qubo_energy<T: Scalar>(q: &Qubo<T>, x: &[u8]) -> Result<T, QuboError> {
    q.energy(x)
}

pub fn ising_energy<T: Scalar>(m: &IsingModel<T>, s: &[i8]) -> Result<T, QuboError> {
    m.energy(s)
}

pub fn to_ising<T: Scalar>(q: &Qubo<T>) -> IsingModel<T> {
    q.to_ising()
}

/// Accumulates a QUBO with `x_i² = x_i` folding.
#[derive(Debug, Clone)]
pub struct QuboBuilder<T> {
    terms: Terms<T>,
    labels: Vec<VarLabel>,
}

impl<T: Scalar> QuboBuilder<T> {
    pub fn new() -> Self {
        QuboBuilder {
            terms: Terms::empty(0),
            labels: Vec::new(),
        }
    }

    pub fn add_variable(&mut self, label: VarLabel) -> usize {
        self.labels.push(label);
        self.terms.num_vars += 1;
        self.labels.len() - 1
    }

    pub fn add_offset(&mut self, v: T) {
        self.terms.offset = self.terms.offset + v;
    }

    pub fn add_linear(&mut self, i: usize, v: T) {
        self.terms.add_linear(i, v);
    }

    pub fn add_quadratic(&mut self, i: usize, j: usize, v: T) {
        if i == j {
            self.terms.add_linear(i, v);
        } else {
            self.terms.add_quadratic(i, j, v);
        }
    }

    /// Adds `weight · (constant + Σ a_i x_i)²`. Indices in `terms` must be
    /// distinct.
    pub fn add_squared(&mut self, weight: T, constant: T, terms: &[(usize, T)]) {
        let two = T::two();
        self.add_offset(weight * constant * constant);
        for (a, &(i, ai)) in terms.iter().enumerate() {
            // (a_i x_i)² + 2 c a_i x_i
            self.add_linear(i, weight * (ai * ai + two * constant * ai));
            for &(j, aj) in &terms[a + 1..] {
                debug_assert_ne!(i, j);
                self.add_quadratic(i, j, weight * two * ai * aj);
            }
        }
    }

    pub fn build(self) -> Qubo<T> {
        Qubo {
            terms: self.terms,
            labels: self.labels,
        }
    }
}

impl<T: Scalar> Default for QuboBuilder<T> {
    fn default() -> Self {
        Self::new()
    }
}

/// Which sign the slack sum carries inside a path penalty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SlackSign {
    /// `(Σ x_v - Σ 2^j y_j - 1)²`: zero exactly when `Σ x_v ≥ 1`.
    #[default]
    Minus,
    /// `(Σ x_v + Σ 2^j y_j - 1)²`, whose zero set also admits `Σ x_v = 0`.
    Plus,
}

impl FromStr for SlackSign {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "minus" => Ok(SlackSign::Minus),
            "plus" => Ok(SlackSign::Plus),
            _ => Err(format!("unknown slack sign `{s}` (expected minus|plus)")),
        }
    }
}

impl fmt::Display for SlackSign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlackSign::Minus => "minus",
            SlackSign::Plus => "plus",
        })
    }
}

fn check_penalty<T: Scalar>(name: &'static str, v: T) -> Result<(), QuboError> {
    if v > T::zero() && v.is_finite_value() {
        Ok(())
    } else {
        Err(QuboError::NonPositivePenalty { name, value: v.to_string() })
    }
}

/// Adds one variable per vertex (skipping terminals when they are fixed) and
/// the `Σ x_v` objective. Returns the vertex → variable map.
fn add_vertex_variables<T: Scalar>(
    b: &mut QuboBuilder<T>,
    instance: &TreeInstance,
    fix_terminals: bool,
) -> Vec<Option<usize>> {
    let terminal = instance.terminal_mask();
    (0..instance.num_vertices())
        .map(|v| {
            if fix_terminals && terminal[v] {
                None
            } else {
                let i = b.add_variable(VarLabel::Vertex(v));
                b.add_linear(i, T::one());
                Some(i)
            }
        })
        .collect()
}

fn add_terminal_penalty<T: Scalar>(
    b: &mut QuboBuilder<T>,
    instance: &TreeInstance,
    var: &[Option<usize>],
    m1: T,
) {
    let terms: Vec<(usize, T)> = instance
        .terminal_set()
        .into_iter()
        .filter_map(|v| var[v].map(|i| (i, T::one())))
        .collect();
    b.add_squared(m1, T::zero(), &terms);
}

/// Path penalty model: `Σ x_v + M1 (Σ_{v∈V_H} x_v)² + M2 Σ_π (Σ_{v∈π} (1 - x_v))²`.
///
/// With `fix_terminals`, terminal variables are substituted by zero: they are
/// not created, the `M1` term disappears and their path contributions fold
/// into constants.
pub fn build_penalty_qubo<T: Scalar>(
    instance: &TreeInstance,
    m1: T,
    m2: T,
    fix_terminals: bool,
) -> Result<Qubo<T>, QuboError> {
    check_penalty("M1", m1)?;
    check_penalty("M2", m2)?;
    let mut b = QuboBuilder::new();
    let var = add_vertex_variables(&mut b, instance, fix_terminals);
    if !fix_terminals {
        add_terminal_penalty(&mut b, instance, &var, m1);
    }
    for path in instance.constraint_paths() {
        let constant = T::from_usize_exact(path.len());
        let terms: Vec<(usize, T)> = path
            .vertices()
            .iter()
            .filter_map(|&v| var[v].map(|i| (i, -T::one())))
            .collect();
        b.add_squared(m2, constant, &terms);
    }
    Ok(b.build())
}

/// Number of slack bits for a path of `path_len` vertices: `⌈log2 path_len⌉`.
pub fn slack_bits(path_len: usize) -> usize {
    if path_len <= 1 {
        0
    } else {
        (usize::BITS - (path_len - 1).leading_zeros()) as usize
    }
}

/// Slack model: `Σ x_v + M2 Σ_π (Σ_{v∈π} x_v ∓ Σ_j 2^j y_j^π - 1)²` plus the
/// `M1` terminal term unless terminals are fixed. Slack variables follow the
/// vertex variables, grouped by path.
pub fn build_slack_qubo<T: Scalar>(
    instance: &TreeInstance,
    m1: T,
    m2: T,
    fix_terminals: bool,
    sign: SlackSign,
) -> Result<Qubo<T>, QuboError> {
    check_penalty("M1", m1)?;
    check_penalty("M2", m2)?;
    let mut b = QuboBuilder::new();
    let var = add_vertex_variables(&mut b, instance, fix_terminals);
    if !fix_terminals {
        add_terminal_penalty(&mut b, instance, &var, m1);
    }
    let paths = instance.constraint_paths();
    let mut path_terms = Vec::with_capacity(paths.len());
    for path in &paths {
        let terms: Vec<(usize, T)> = path
            .vertices()
            .iter()
            .filter_map(|&v| var[v].map(|i| (i, T::one())))
            .collect();
        path_terms.push(terms);
    }
    for (p, (path, mut terms)) in paths.iter().zip(path_terms).enumerate() {
        let mut weight = T::one();
        for bit in 0..slack_bits(path.len()) {
            let y = b.add_variable(VarLabel::Slack { path: p, bit });
            terms.push((
                y,
                match sign {
                    SlackSign::Minus => -weight,
                    SlackSign::Plus => weight,
                },
            ));
            weight = weight * T::two();
        }
        b.add_squared(m2, -T::one(), &terms);
    }
    Ok(b.build())
}

/// `(M1, M2)` with `M2 = |V| + 1` and `M1 = M2 · (longest path)²`, path length
/// counted in vertices.
pub fn default_penalties<T: Scalar>(instance: &TreeInstance) -> (T, T) {
    let m2 = instance.num_vertices() + 1;
    let longest = instance
        .constraint_paths()
        .iter()
        .map(|p| p.len())
        .max()
        .unwrap_or(1);
    let m1 = m2 * longest * longest;
    (T::from_usize_exact(m1), T::from_usize_exact(m2))
}

/// Which multicut QUBO to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Encoding {
    /// [`build_penalty_qubo`].
    Literal,
    /// [`build_slack_qubo`].
    Slack,
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "literal" => Ok(Encoding::Literal),
            "slack" => Ok(Encoding::Slack),
            _ => Err(format!("unknown encoding `{s}` (expected literal|slack)")),
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Encoding::Literal => "literal",
            Encoding::Slack => "slack",
        })
    }
}

/// Encoding choice plus the knobs shared by both builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingOptions {
    pub encoding: Encoding,
    pub fix_terminals: bool,
    pub slack_sign: SlackSign,
}

impl EncodingOptions {
    pub fn slack() -> Self {
        EncodingOptions {
            encoding: Encoding::Slack,
            fix_terminals: true,
            slack_sign: SlackSign::Minus,
        }
    }

    /// The penalty function as written: terminals stay variables.
    pub fn literal() -> Self {
        EncodingOptions {
            encoding: Encoding::Literal,
            fix_terminals: false,
            ..Self::slack()
        }
    }

    pub fn build<T: Scalar>(
        &self,
        instance: &TreeInstance,
        m1: T,
        m2: T,
    ) -> Result<Qubo<T>, QuboError> {
        match self.encoding {
            Encoding::Literal => build_penalty_qubo(instance, m1, m2, self.fix_terminals),
            Encoding::Slack => {
                build_slack_qubo(instance, m1, m2, self.fix_terminals, self.slack_sign)
            }
        }
    }
}

/// Vertices selected for removal.
#[derive(Debug, Clone, PartialEq, Eq, Default, Hash, PartialOrd, Ord)]
pub struct Cutset(BTreeSet<usize>);

impl Cutset {
    pub fn new(vertices: impl IntoIterator<Item = usize>) -> Self {
        Cutset(vertices.into_iter().collect())
    }

    pub fn vertices(&self) -> &BTreeSet<usize> {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: usize) -> bool {
        self.0.contains(&v)
    }
}

/// Vertex-labeled variables set to one. Slack bits are ignored.
pub fn extract_cutset<T>(q: &Qubo<T>, x: &[u8]) -> Cutset {
    Cutset(
        q.labels
            .iter()
            .zip(x)
            .filter_map(|(l, &b)| match l {
                VarLabel::Vertex(v) if b == 1 => Some(*v),
                _ => None,
            })
            .collect(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    /// A terminal vertex was removed.
    ViolatesTerminal { vertex: usize },
    /// Constraint path `path_index` contains no removed vertex.
    ViolatesPath { path_index: usize },
}

impl Feasibility {
    pub fn is_feasible(self) -> bool {
        self == Feasibility::Feasible
    }
}

pub fn check_feasibility(instance: &TreeInstance, cutset: &Cutset) -> Feasibility {
    let terminal = instance.terminal_mask();
    if let Some(&vertex) = cutset.0.iter().find(|&&v| terminal[v]) {
        return Feasibility::ViolatesTerminal { vertex };
    }
    for (path_index, path) in instance.constraint_paths().iter().enumerate() {
        if !path.vertices().iter().any(|&v| cutset.contains(v)) {
            return Feasibility::ViolatesPath { path_index };
        }
    }
    Feasibility::Feasible
}
