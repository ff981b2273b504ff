//! Problem instances: a weighted graph, the problem variant and the penalty
//! coefficients, with JSON and edge-list readers/writers.
//!
//! Node ids are 1-based everywhere in the public API and in files.
//! Undirected edges are stored once with `u < v`.

use std::fmt;
use std::io::Read;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::Value;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    HamiltonianCycle,
    HamiltonianPath,
    Tsp,
}

impl Variant {
    pub fn as_str(self) -> &'static str {
        match self {
            Variant::HamiltonianCycle => "cycle",
            Variant::HamiltonianPath => "path",
            Variant::Tsp => "tsp",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cycle" | "hamiltonian_cycle" => Ok(Variant::HamiltonianCycle),
            "path" | "hamiltonian_path" => Ok(Variant::HamiltonianPath),
            "tsp" => Ok(Variant::Tsp),
            other => Err(Error::Validation(format!(
                "unknown variant `{other}` (expected tsp, cycle or path)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub cost: Rational,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Json,
    EdgeList,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "edge_list" | "edge-list" | "edges" | "txt" => Ok(Format::EdgeList),
            other => Err(Error::Validation(format!("unknown instance format `{other}`"))),
        }
    }
}

impl Format {
    /// Guesses the format from a file name: `.json` is JSON, anything else an edge list.
    pub fn from_path(path: &std::path::Path) -> Format {
        match path.extension().and_then(|e| e.to_str()) {
            Some("json") => Format::Json,
            _ => Format::EdgeList,
        }
    }
}

/// A validated, immutable problem instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProblemInstance {
    node_count: usize,
    directed: bool,
    variant: Variant,
    edges: Vec<Edge>,
    penalty_a: Rational,
    penalty_b: Rational,
    /// Dense arc-cost lookup, row-major over 0-based (from, to).
    arcs: Vec<Option<Rational>>,
}

impl ProblemInstance {
    pub fn new(
        node_count: usize,
        directed: bool,
        variant: Variant,
        edges: impl IntoIterator<Item = (usize, usize, Rational)>,
        penalty_a: Rational,
        penalty_b: Rational,
    ) -> Result<Self> {
        if node_count == 0 {
            return Err(Error::Validation("node count must be positive".into()));
        }
        if !penalty_a.is_positive() {
            return Err(Error::Validation(format!(
                "penalty A must be positive, got {}",
                rational::format(&penalty_a)
            )));
        }
        if penalty_b.is_negative() || (variant == Variant::Tsp && penalty_b.is_zero()) {
            return Err(Error::Validation(format!(
                "penalty B must be positive, got {}",
                rational::format(&penalty_b)
            )));
        }

        let n = node_count;
        let mut arcs = vec![None; n * n];
        let mut stored = Vec::new();
        for (u, v, cost) in edges {
            if u == 0 || u > n || v == 0 || v > n {
                return Err(Error::Validation(format!(
                    "edge ({u},{v}) references a node outside 1..={n}"
                )));
            }
            if u == v {
                return Err(Error::Validation(format!("self-loop ({u},{v}) is not allowed")));
            }
            if cost.is_negative() {
                return Err(Error::Validation(format!(
                    "edge ({u},{v}) has negative cost {}",
                    rational::format(&cost)
                )));
            }
            let (u, v) = if directed { (u, v) } else { (u.min(v), u.max(v)) };
            if arcs[(u - 1) * n + (v - 1)].is_some() {
                return Err(Error::Validation(format!("duplicate edge ({u},{v})")));
            }
            arcs[(u - 1) * n + (v - 1)] = Some(cost);
            if !directed {
                arcs[(v - 1) * n + (u - 1)] = Some(cost);
            }
            stored.push(Edge { u, v, cost });
        }
        stored.sort_by_key(|e| (e.u, e.v));

        Ok(Self {
            node_count,
            directed,
            variant,
            edges: stored,
            penalty_a,
            penalty_b,
            arcs,
        })
    }

    pub fn node_count(&self) -> usize {
        self.node_count
    }

    pub fn is_directed(&self) -> bool {
        self.directed
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn penalty_a(&self) -> Rational {
        self.penalty_a
    }

    pub fn penalty_b(&self) -> Rational {
        self.penalty_b
    }

    /// Cost of travelling `from -> to`, if that step is allowed.
    /// Undirected edges allow both orientations.
    pub fn arc_cost(&self, from: usize, to: usize) -> Option<Rational> {
        if from == 0 || to == 0 || from > self.node_count || to > self.node_count {
            return None;
        }
        self.arcs[(from - 1) * self.node_count + (to - 1)]
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.arc_cost(from, to).is_some()
    }

    pub fn max_cost(&self) -> Option<Rational> {
        self.edges.iter().map(|e| e.cost).max()
    }

    pub fn with_penalties(&self, penalty_a: Rational, penalty_b: Rational) -> Result<Self> {
        Self::new(
            self.node_count,
            self.directed,
            self.variant,
            self.edge_triples(),
            penalty_a,
            penalty_b,
        )
    }

    pub fn with_variant(&self, variant: Variant) -> Result<Self> {
        Self::new(
            self.node_count,
            self.directed,
            variant,
            self.edge_triples(),
            self.penalty_a,
            self.penalty_b,
        )
    }

    fn edge_triples(&self) -> impl Iterator<Item = (usize, usize, Rational)> + '_ {
        self.edges.iter().map(|e| (e.u, e.v, e.cost))
    }

    /// True iff every ordered (directed) or unordered (undirected) pair of
    /// distinct nodes is joined by an edge.
    pub fn is_complete(&self) -> bool {
        let n = self.node_count;
        (1..=n).all(|u| (1..=n).all(|v| u == v || self.has_arc(u, v)))
    }
}

/// Reads and validates an instance.
pub fn load_instance(mut source: impl Read, format: Format) -> Result<ProblemInstance> {
    let mut text = String::new();
    source.read_to_string(&mut text)?;
    match format {
        Format::Json => parse_json(&text),
        Format::EdgeList => parse_edge_list(&text),
    }
}

pub fn save_instance(instance: &ProblemInstance, format: Format) -> String {
    match format {
        Format::Json => write_json(instance),
        Format::EdgeList => write_edge_list(instance),
    }
}

#[derive(Serialize)]
struct JsonInstance {
    nodes: usize,
    directed: bool,
    variant: &'static str,
    edges: Vec<(usize, usize, Value)>,
    penalty_a: Value,
    penalty_b: Value,
}

fn write_json(instance: &ProblemInstance) -> String {
    let doc = JsonInstance {
        nodes: instance.node_count,
        directed: instance.directed,
        variant: instance.variant.as_str(),
        edges: instance
            .edges
            .iter()
            .map(|e| (e.u, e.v, rational::to_json(&e.cost)))
            .collect(),
        penalty_a: rational::to_json(&instance.penalty_a),
        penalty_b: rational::to_json(&instance.penalty_b),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("instance serializes");
    out.push('\n');
    out
}

fn parse_json(text: &str) -> Result<ProblemInstance> {
    let doc: Value = serde_json::from_str(text).map_err(|e| {
        Error::parse(
            format!("line {} column {}", e.line(), e.column()),
            e.to_string(),
        )
    })?;
    let obj = doc
        .as_object()
        .ok_or_else(|| Error::parse("document root", "expected a JSON object"))?;
    let field = |name: &str| {
        obj.get(name)
            .ok_or_else(|| Error::parse(format!("field `{name}`"), "missing"))
    };

    let nodes = field("nodes")?
        .as_u64()
        .ok_or_else(|| Error::parse("field `nodes`", "expected a non-negative integer"))?
        as usize;
    let directed = field("directed")?
        .as_bool()
        .ok_or_else(|| Error::parse("field `directed`", "expected a boolean"))?;
    let variant: Variant = field("variant")?
        .as_str()
        .ok_or_else(|| Error::parse("field `variant`", "expected a string"))?
        .parse()
        .map_err(|e: Error| Error::parse("field `variant`", e.to_string()))?;
    let rational_field = |name: &str| {
        rational::from_json(field(name)?)
            .ok_or_else(|| Error::parse(format!("field `{name}`"), "expected a rational number"))
    };
    let penalty_a = rational_field("penalty_a")?;
    let penalty_b = rational_field("penalty_b")?;

    let raw_edges = field("edges")?
        .as_array()
        .ok_or_else(|| Error::parse("field `edges`", "expected an array"))?;
    let mut edges = Vec::with_capacity(raw_edges.len());
    for (i, raw) in raw_edges.iter().enumerate() {
        let locus = || format!("field `edges[{i}]`");
        let triple = raw
            .as_array()
            .filter(|a| a.len() == 3)
            .ok_or_else(|| Error::parse(locus(), "expected [u, v, cost]"))?;
        let node = |value: &Value| {
            value
                .as_u64()
                .map(|x| x as usize)
                .ok_or_else(|| Error::parse(locus(), "node ids must be positive integers"))
        };
        let cost = rational::from_json(&triple[2])
            .ok_or_else(|| Error::parse(locus(), "cost must be a rational number"))?;
        edges.push((node(&triple[0])?, node(&triple[1])?, cost));
    }

    ProblemInstance::new(nodes, directed, variant, edges, penalty_a, penalty_b)
}

fn write_edge_list(instance: &ProblemInstance) -> String {
    let mut out = format!(
        "{} {} {} {} {}\n",
        instance.node_count,
        instance.directed,
        instance.variant,
        rational::format(&instance.penalty_a),
        rational::format(&instance.penalty_b)
    );
    for e in &instance.edges {
        out.push_str(&format!("{} {} {}\n", e.u, e.v, rational::format(&e.cost)));
    }
    out
}

fn parse_edge_list(text: &str) -> Result<ProblemInstance> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.split('#').next().unwrap_or("").trim()))
        .filter(|(_, line)| !line.is_empty());

    let (header_no, header) = lines
        .next()
        .ok_or_else(|| Error::parse("line 1", "missing header `N directed variant A B`"))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let locus = |line: usize| format!("line {line}");
    if fields.len() != 5 {
        return Err(Error::parse(
            locus(header_no),
            format!("header needs 5 fields `N directed variant A B`, found {}", fields.len()),
        ));
    }
    let nodes: usize = fields[0]
        .parse()
        .map_err(|_| Error::parse(locus(header_no), "node count must be an integer"))?;
    let directed = match fields[1] {
        "true" | "1" | "directed" => true,
        "false" | "0" | "undirected" => false,
        other => {
            return Err(Error::parse(
                locus(header_no),
                format!("`{other}` is not a directed flag (true/false)"),
            ))
        }
    };
    let variant: Variant = fields[2]
        .parse()
        .map_err(|e: Error| Error::parse(locus(header_no), e.to_string()))?;
    let penalty_a = rational::parse(fields[3])
        .ok_or_else(|| Error::parse(locus(header_no), "penalty A must be rational"))?;
    let penalty_b = rational::parse(fields[4])
        .ok_or_else(|| Error::parse(locus(header_no), "penalty B must be rational"))?;

    let mut edges = Vec::new();
    for (line_no, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(Error::parse(locus(line_no), "expected `u v cost`"));
        }
        let u: usize = parts[0]
            .parse()
            .map_err(|_| Error::parse(locus(line_no), "node id must be a positive integer"))?;
        let v: usize = parts[1]
            .parse()
            .map_err(|_| Error::parse(locus(line_no), "node id must be a positive integer"))?;
        let cost = rational::parse(parts[2])
            .ok_or_else(|| Error::parse(locus(line_no), "cost must be rational"))?;
        edges.push((u, v, cost));
    }

    ProblemInstance::new(nodes, directed, variant, edges, penalty_a, penalty_b)
}
