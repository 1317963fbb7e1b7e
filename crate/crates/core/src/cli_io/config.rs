//! TOML run configurations and the initial-data expression grammar.
//!
//! ```text
//! beta0 = 1
//! t_end = 0.04
//! initial_data = "scaled_bump_n0(amplitude=-20e, scale=20)"
//! v0_sup_bound = "e/8"
//! ```
//!
//! Numeric values may be TOML numbers or strings holding an arithmetic
//! expression over literals, `e`, `pi`, `+ - * /` and parentheses. A literal
//! directly followed by `e` that does not start an exponent means "times
//! Euler's number": `-20e` is `-20 * e`, while `1e5` is scientific notation.
//!
//! Initial-data generators:
//!
//! ```text
//! bump(center, scale, amplitude)              n0 = amplitude f(scale (x - center))
//! scaled_bump_n0(amplitude=.., scale=.., center=..)   same, named, center defaults to 0
//! peakon(a1, a2)                              v0 = a1 exp(-2|b0| |x - a2|)
//! superposition([(n1, x1), (n2, x2), ...])    v0 = sum n_i exp(-2|b0| |x - x_i|)
//! ```

use std::collections::BTreeSet;
use std::f64::consts::{E, PI};

use toml::{Table, Value};

use crate::blowup::NormBounds;
use crate::error::{Error, Result};
use crate::helmholtz::HelmholtzParams;
use crate::peakon::{InitialData, PeakonTerm};
use crate::timestepper::{GridSpec, OutputCadence, SimConfig, SnapshotCadence};

pub const KNOWN_KEYS: &[&str] = &[
    "beta0",
    "half_width",
    "n_points",
    "t_end",
    "scheme",
    "cfl_safety",
    "blowup_factor",
    "initial_data",
    "diagnostics_every",
    "snapshots",
    "snapshot_every",
    "v0_sup_bound",
    "v0x_sup_bound",
];

/// A parsed configuration: the solver settings plus optional analytic sup-norm
/// bounds for the blow-up certificate.
#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub bounds: Option<NormBounds>,
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let table: Table = text
        .parse()
        .map_err(|e: toml::de::Error| Error::Config(format!("malformed document: {e}")))?;
    from_table(&table)
}

pub fn from_table(table: &Table) -> Result<RunConfig> {
    let unknown: BTreeSet<&str> = table
        .keys()
        .map(String::as_str)
        .filter(|k| !KNOWN_KEYS.contains(k))
        .collect();
    if !unknown.is_empty() {
        let list: Vec<&str> = unknown.into_iter().collect();
        return Err(Error::Config(format!("unknown keys: {}", list.join(", "))));
    }

    let initial_data = match table.get("initial_data") {
        None => return Err(Error::Config("initial_data missing".into())),
        Some(Value::String(s)) => parse_initial_data(s)?,
        Some(_) => return Err(Error::Config("initial_data must be a string".into())),
    };
    let beta0 = number(table, "beta0")?.unwrap_or(1.0);
    let params = HelmholtzParams::new(beta0)
        .map_err(|_| Error::Config(format!("beta0 must be finite and nonzero, got {beta0}")))?;
    let t_end = number(table, "t_end")?.unwrap_or(1.0);

    let mut sim = SimConfig::new(params, initial_data, t_end);
    let defaults = GridSpec::default();
    sim.grid = GridSpec {
        half_width: number(table, "half_width")?.unwrap_or(defaults.half_width),
        n_points: count(table, "n_points")?.unwrap_or(defaults.n_points),
    };
    if let Some(scheme) = string(table, "scheme")? {
        sim.scheme = scheme.parse()?;
    }
    if let Some(c) = number(table, "cfl_safety")? {
        sim.cfl_safety = c;
    }
    if let Some(f) = number(table, "blowup_factor")? {
        sim.blowup_factor = f;
    }
    let mut output = OutputCadence::default();
    if let Some(k) = count(table, "diagnostics_every")? {
        output.diagnostics_every = k;
    }
    match (count(table, "snapshots")?, count(table, "snapshot_every")?) {
        (Some(_), Some(_)) => {
            return Err(Error::Config(
                "snapshots and snapshot_every are mutually exclusive".into(),
            ))
        }
        (Some(0), None) => output.snapshots = SnapshotCadence::Never,
        (Some(k), None) => output.snapshots = SnapshotCadence::Count(k),
        (None, Some(k)) => output.snapshots = SnapshotCadence::EverySteps(k),
        (None, None) => {}
    }
    sim.output = output;

    if !(sim.cfl_safety > 0.0 && sim.cfl_safety <= 1.0) {
        return Err(Error::Config("cfl_safety must be in (0,1]".into()));
    }
    if !(sim.blowup_factor > 1.0) {
        return Err(Error::Config("blowup_factor must be > 1".into()));
    }
    if !(sim.t_end > 0.0 && sim.t_end.is_finite()) {
        return Err(Error::Config("t_end must be > 0".into()));
    }
    sim.validate()?;

    let bounds = match (number(table, "v0_sup_bound")?, number(table, "v0x_sup_bound")?) {
        (Some(v_sup), Some(vx_sup)) => {
            if !(v_sup >= 0.0 && vx_sup >= 0.0) {
                return Err(Error::Config("sup-norm bounds must be nonnegative".into()));
            }
            Some(NormBounds { v_sup, vx_sup })
        }
        (None, None) => None,
        _ => {
            return Err(Error::Config(
                "v0_sup_bound and v0x_sup_bound must be given together".into(),
            ))
        }
    };
    Ok(RunConfig { sim, bounds })
}

impl RunConfig {
    /// Normalized key-value form; parsing it again gives the same config.
    pub fn to_table(&self) -> Table {
        let s = &self.sim;
        let mut t = Table::new();
        t.insert("beta0".into(), Value::Float(s.params.beta0()));
        t.insert("half_width".into(), Value::Float(s.grid.half_width));
        t.insert("n_points".into(), Value::Integer(s.grid.n_points as i64));
        t.insert("t_end".into(), Value::Float(s.t_end));
        t.insert("scheme".into(), Value::String(s.scheme.name().into()));
        t.insert("cfl_safety".into(), Value::Float(s.cfl_safety));
        t.insert("blowup_factor".into(), Value::Float(s.blowup_factor));
        t.insert("initial_data".into(), Value::String(s.initial_data.to_string()));
        t.insert(
            "diagnostics_every".into(),
            Value::Integer(s.output.diagnostics_every as i64),
        );
        match s.output.snapshots {
            SnapshotCadence::Never => {
                t.insert("snapshots".into(), Value::Integer(0));
            }
            SnapshotCadence::Count(k) => {
                t.insert("snapshots".into(), Value::Integer(k as i64));
            }
            SnapshotCadence::EverySteps(k) => {
                t.insert("snapshot_every".into(), Value::Integer(k as i64));
            }
        }
        if let Some(b) = &self.bounds {
            t.insert("v0_sup_bound".into(), Value::Float(b.v_sup));
            t.insert("v0x_sup_bound".into(), Value::Float(b.vx_sup));
        }
        t
    }

    /// Overrides one key; `initial_data.<name>` addresses a generator
    /// parameter.
    pub fn with_override(&self, key: &str, value: f64) -> Result<RunConfig> {
        if let Some(name) = key.strip_prefix("initial_data.") {
            let mut out = self.clone();
            out.sim.initial_data = self.sim.initial_data.with_param(name, value)?;
            return Ok(out);
        }
        let mut table = self.to_table();
        let value = match key {
            "n_points" | "diagnostics_every" | "snapshots" | "snapshot_every" => {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(Error::Config(format!("{key} must be a nonnegative integer")));
                }
                Value::Integer(value as i64)
            }
            _ => Value::Float(value),
        };
        if !KNOWN_KEYS.contains(&key) || key == "scheme" || key == "initial_data" {
            return Err(Error::Config(format!("cannot sweep over `{key}`")));
        }
        if key == "snapshot_every" {
            table.remove("snapshots");
        }
        table.insert(key.into(), value);
        from_table(&table)
    }
}

fn number(table: &Table, key: &str) -> Result<Option<f64>> {
    match table.get(key) {
        None => Ok(None),
        Some(Value::Float(x)) => Ok(Some(*x)),
        Some(Value::Integer(i)) => Ok(Some(*i as f64)),
        Some(Value::String(s)) => parse_number(s)
            .map(Some)
            .map_err(|e| Error::Config(format!("{key}: {e}"))),
        Some(_) => Err(Error::Config(format!("{key} must be a number"))),
    }
}

fn count(table: &Table, key: &str) -> Result<Option<usize>> {
    match table.get(key) {
        None => Ok(None),
        Some(Value::Integer(i)) if *i >= 0 => Ok(Some(*i as usize)),
        Some(_) => Err(Error::Config(format!("{key} must be a nonnegative integer"))),
    }
}

fn string<'a>(table: &'a Table, key: &str) -> Result<Option<&'a str>> {
    match table.get(key) {
        None => Ok(None),
        Some(Value::String(s)) => Ok(Some(s)),
        Some(_) => Err(Error::Config(format!("{key} must be a string"))),
    }
}

/// Evaluates a scalar expression such as `-20e`, `e/8` or `2.5e-3`.
pub fn parse_number(text: &str) -> Result<f64> {
    let mut p = Parser::new(text);
    let x = p.expr()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("trailing input"));
    }
    Ok(x)
}

pub fn parse_initial_data(text: &str) -> Result<InitialData> {
    let mut p = Parser::new(text);
    let data = p.initial_data()?;
    p.skip_ws();
    if !p.at_end() {
        return Err(p.error("trailing input"));
    }
    data.validate()?;
    Ok(data)
}

enum Arg {
    Scalar(f64),
    List(Vec<PeakonTerm>),
}

struct Parser<'a> {
    text: &'a str,
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Self {
            text,
            bytes: text.as_bytes(),
            pos: 0,
        }
    }

    fn error(&self, what: &str) -> Error {
        Error::Config(format!("{what} at offset {} in `{}`", self.pos, self.text))
    }

    fn at_end(&self) -> bool {
        self.pos >= self.bytes.len()
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(c) if c.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn eat(&mut self, c: u8) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", c as char)))
        }
    }

    fn ident(&mut self) -> Option<&'a str> {
        self.skip_ws();
        let start = self.pos;
        if !matches!(self.peek(), Some(c) if c.is_ascii_alphabetic() || c == b'_') {
            return None;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_alphanumeric() || c == b'_') {
            self.pos += 1;
        }
        (self.pos > start).then(|| &self.text[start..self.pos])
    }

    fn expr(&mut self) -> Result<f64> {
        let mut acc = self.product()?;
        loop {
            if self.eat(b'+') {
                acc += self.product()?;
            } else if self.eat(b'-') {
                acc -= self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<f64> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc *= self.unary()?;
            } else if self.eat(b'/') {
                acc /= self.unary()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<f64> {
        if self.eat(b'-') {
            return Ok(-self.unary()?);
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<f64> {
        self.skip_ws();
        if self.eat(b'(') {
            let x = self.expr()?;
            self.expect(b')')?;
            return Ok(x);
        }
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == b'.' => self.literal(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                match self.ident() {
                    Some("e") => Ok(E),
                    Some("pi") => Ok(PI),
                    _ => {
                        self.pos = start;
                        Err(self.error("unknown constant"))
                    }
                }
            }
            _ => Err(self.error("expected a number")),
        }
    }

    /// Float literal, with a bare trailing `e` meaning "times e".
    fn literal(&mut self) -> Result<f64> {
        let start = self.pos;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        let mut euler = false;
        if matches!(self.peek(), Some(b'e' | b'E')) {
            let after = self.bytes.get(self.pos + 1).copied();
            let after2 = self.bytes.get(self.pos + 2).copied();
            let exponent = match after {
                Some(c) if c.is_ascii_digit() => true,
                Some(b'+' | b'-') => matches!(after2, Some(c) if c.is_ascii_digit()),
                _ => false,
            };
            if exponent {
                self.pos += 2;
                while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else if self.bytes[self.pos] == b'e'
                && !matches!(after, Some(c) if c.is_ascii_alphanumeric() || c == b'_')
            {
                euler = true;
            }
        }
        let value: f64 = self.text[start..self.pos]
            .parse()
            .map_err(|_| self.error("malformed number"))?;
        if euler {
            self.pos += 1;
            Ok(value * E)
        } else {
            Ok(value)
        }
    }

    fn initial_data(&mut self) -> Result<InitialData> {
        let name = self
            .ident()
            .ok_or_else(|| self.error("expected a generator name"))?;
        self.expect(b'(')?;
        let mut positional = Vec::new();
        let mut named: Vec<(&str, Arg)> = Vec::new();
        if !self.eat(b')') {
            loop {
                let save = self.pos;
                let key = self.ident();
                let arg_name = if key.is_some() && self.eat(b'=') {
                    key
                } else {
                    self.pos = save;
                    None
                };
                let arg = self.argument()?;
                match arg_name {
                    Some(k) => {
                        if named.iter().any(|(n, _)| *n == k) {
                            return Err(self.error(&format!("duplicate argument `{k}`")));
                        }
                        named.push((k, arg));
                    }
                    None if named.is_empty() => positional.push(arg),
                    None => return Err(self.error("positional argument after named one")),
                }
                if self.eat(b')') {
                    break;
                }
                self.expect(b',')?;
            }
        }
        build_generator(name, positional, named)
    }

    fn argument(&mut self) -> Result<Arg> {
        if !self.eat(b'[') {
            return Ok(Arg::Scalar(self.expr()?));
        }
        let mut terms = Vec::new();
        if self.eat(b']') {
            return Ok(Arg::List(terms));
        }
        loop {
            self.expect(b'(')?;
            let weight = self.expr()?;
            self.expect(b',')?;
            let position = self.expr()?;
            self.expect(b')')?;
            terms.push(PeakonTerm { weight, position });
            if self.eat(b']') {
                return Ok(Arg::List(terms));
            }
            self.expect(b',')?;
        }
    }
}

fn build_generator(name: &str, positional: Vec<Arg>, named: Vec<(&str, Arg)>) -> Result<InitialData> {
    let (slots, defaults): (&[&str], &[Option<f64>]) = match name {
        "bump" => (&["center", "scale", "amplitude"], &[None, None, None]),
        "scaled_bump_n0" => (&["amplitude", "scale", "center"], &[None, None, Some(0.0)]),
        "peakon" => (&["a1", "a2"], &[None, None]),
        "superposition" => {
            let mut args = positional.into_iter().chain(named.into_iter().map(|(_, a)| a));
            return match (args.next(), args.next()) {
                (Some(Arg::List(terms)), None) => Ok(InitialData::Superposition(terms)),
                _ => Err(Error::Config(
                    "superposition takes one list [(n1, x1), ...]".into(),
                )),
            };
        }
        other => {
            return Err(Error::Config(format!(
                "unknown initial data `{other}` (expected bump, scaled_bump_n0, peakon or superposition)"
            )))
        }
    };
    if positional.len() > slots.len() {
        return Err(Error::Config(format!("{name} takes at most {} arguments", slots.len())));
    }
    let mut values: Vec<Option<f64>> = defaults.to_vec();
    for (i, arg) in positional.into_iter().enumerate() {
        values[i] = Some(scalar(name, slots[i], arg)?);
    }
    for (key, arg) in named {
        let i = slots
            .iter()
            .position(|s| *s == key)
            .ok_or_else(|| Error::Config(format!("{name} has no argument `{key}`")))?;
        values[i] = Some(scalar(name, key, arg)?);
    }
    let get = |i: usize| {
        values[i].ok_or_else(|| Error::Config(format!("{name} is missing `{}`", slots[i])))
    };
    Ok(match name {
        "bump" => InitialData::Bump {
            center: get(0)?,
            scale: get(1)?,
            amplitude: get(2)?,
        },
        "scaled_bump_n0" => InitialData::Bump {
            amplitude: get(0)?,
            scale: get(1)?,
            center: get(2)?,
        },
        _ => InitialData::Peakon {
            a1: get(0)?,
            a2: get(1)?,
        },
    })
}

fn scalar(name: &str, key: &str, arg: Arg) -> Result<f64> {
    match arg {
        Arg::Scalar(x) => Ok(x),
        Arg::List(_) => Err(Error::Config(format!("{name}: `{key}` must be a number"))),
    }
}
