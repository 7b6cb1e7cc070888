//! Circuits, the three benchmark families, and weighted interaction graphs.
//!
//! A circuit is reduced to an undirected [`InteractionGraph`] whose vertices
//! are qubits and whose edge weights count the two-qubit gates between a
//! pair. Everything downstream (allocation, partitioning, metrics) works on
//! that graph; single-qubit gates never matter past this module.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};

/// A gate applied to one or two qubits.
///
/// Two-qubit operands are ordered: control first, target second. The
/// direction is kept for round-tripping circuit files but the interaction
/// graph ignores it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Gate {
    Single { label: String, qubit: usize },
    Two {
        label: String,
        control: usize,
        target: usize,
    },
}

impl Gate {
    pub fn single(label: &str, qubit: usize) -> Self {
        Gate::Single {
            label: label.to_string(),
            qubit,
        }
    }

    pub fn two(label: &str, control: usize, target: usize) -> Self {
        Gate::Two {
            label: label.to_string(),
            control,
            target,
        }
    }

    pub fn is_two_qubit(&self) -> bool {
        matches!(self, Gate::Two { .. })
    }
}

/// A client job: an identifier, a qubit count, and an ordered gate list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitSpec {
    id: usize,
    num_qubits: usize,
    gates: Vec<Gate>,
}

impl CircuitSpec {
    /// Builds a circuit, checking that every operand is in range, two-qubit
    /// gates touch two distinct qubits, and at least one qubit exists.
    pub fn new(id: usize, num_qubits: usize, gates: Vec<Gate>) -> Result<Self> {
        if num_qubits == 0 {
            return Err(Error::invalid("a circuit needs at least one qubit"));
        }
        for (i, gate) in gates.iter().enumerate() {
            match gate {
                Gate::Single { qubit, .. } => {
                    if *qubit >= num_qubits {
                        return Err(Error::invalid(format!(
                            "gate {i}: qubit {qubit} out of range for {num_qubits} qubits"
                        )));
                    }
                }
                Gate::Two {
                    control, target, ..
                } => {
                    if *control >= num_qubits || *target >= num_qubits {
                        return Err(Error::invalid(format!(
                            "gate {i}: operands ({control}, {target}) out of range for {num_qubits} qubits"
                        )));
                    }
                    if control == target {
                        return Err(Error::invalid(format!(
                            "gate {i}: two-qubit gate needs distinct operands, got {control} twice"
                        )));
                    }
                }
            }
        }
        Ok(CircuitSpec {
            id,
            num_qubits,
            gates,
        })
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn with_id(mut self, id: usize) -> Self {
        self.id = id;
        self
    }

    /// Circuit width: how many computing qubits the job needs.
    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn two_qubit_gate_count(&self) -> u64 {
        self.gates.iter().filter(|g| g.is_two_qubit()).count() as u64
    }

    /// Collapses the gate list into the weighted qubit-coupling graph: one
    /// vertex per qubit, each two-qubit gate bumping its unordered pair's
    /// weight by one.
    pub fn interaction_graph(&self) -> InteractionGraph {
        let mut graph = InteractionGraph::new(self.num_qubits)
            .expect("circuit invariant guarantees num_qubits >= 1");
        for gate in &self.gates {
            if let Gate::Two {
                control, target, ..
            } = gate
            {
                graph
                    .add_interaction(*control, *target, 1)
                    .expect("circuit invariant guarantees operands in range and distinct");
            }
        }
        graph
    }

    /// Parses the line-oriented circuit format:
    ///
    /// ```text
    /// # comment
    /// qubits 6
    /// g1 h 0
    /// g2 cx 0 1
    /// ```
    ///
    /// The parsed circuit carries id 0; use [`CircuitSpec::with_id`] to tag it.
    pub fn parse(src: &str) -> Result<Self> {
        let mut num_qubits: Option<usize> = None;
        let mut gates = Vec::new();

        for (idx, raw) in src.lines().enumerate() {
            let line_no = idx + 1;
            let line = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.is_empty() {
                continue;
            }
            let parse_err =
                |message: String| Error::Parse {
                    line: line_no,
                    message,
                };
            match (fields[0], num_qubits) {
                ("qubits", None) => {
                    if fields.len() != 2 {
                        return Err(parse_err("expected `qubits <n>`".into()));
                    }
                    let n: usize = fields[1]
                        .parse()
                        .map_err(|_| parse_err(format!("bad qubit count `{}`", fields[1])))?;
                    if n == 0 {
                        return Err(parse_err("qubit count must be at least 1".into()));
                    }
                    num_qubits = Some(n);
                }
                ("qubits", Some(_)) => {
                    return Err(parse_err("duplicate `qubits` header".into()));
                }
                (_, None) => {
                    return Err(parse_err("file must start with a `qubits <n>` header".into()));
                }
                ("g1", Some(n)) => {
                    if fields.len() != 3 {
                        return Err(parse_err("expected `g1 <label> <qubit>`".into()));
                    }
                    let q: usize = fields[2]
                        .parse()
                        .map_err(|_| parse_err(format!("bad qubit index `{}`", fields[2])))?;
                    if q >= n {
                        return Err(parse_err(format!(
                            "qubit {q} out of range for {n} qubits"
                        )));
                    }
                    gates.push(Gate::single(fields[1], q));
                }
                ("g2", Some(n)) => {
                    if fields.len() != 4 {
                        return Err(parse_err("expected `g2 <label> <control> <target>`".into()));
                    }
                    let c: usize = fields[2]
                        .parse()
                        .map_err(|_| parse_err(format!("bad qubit index `{}`", fields[2])))?;
                    let t: usize = fields[3]
                        .parse()
                        .map_err(|_| parse_err(format!("bad qubit index `{}`", fields[3])))?;
                    if c >= n || t >= n {
                        return Err(parse_err(format!(
                            "operands ({c}, {t}) out of range for {n} qubits"
                        )));
                    }
                    if c == t {
                        return Err(parse_err(format!(
                            "two-qubit gate needs distinct operands, got {c} twice"
                        )));
                    }
                    gates.push(Gate::two(fields[1], c, t));
                }
                (other, Some(_)) => {
                    return Err(parse_err(format!(
                        "unknown directive `{other}` (expected g1 or g2)"
                    )));
                }
            }
        }

        let num_qubits = num_qubits.ok_or(Error::Parse {
            line: src.lines().count().max(1),
            message: "missing `qubits <n>` header".into(),
        })?;
        CircuitSpec::new(0, num_qubits, gates)
    }

    /// Renders the circuit back into the text format accepted by
    /// [`CircuitSpec::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("qubits {}\n", self.num_qubits);
        for gate in &self.gates {
            match gate {
                Gate::Single { label, qubit } => {
                    out.push_str(&format!("g1 {label} {qubit}\n"));
                }
                Gate::Two {
                    label,
                    control,
                    target,
                } => {
                    out.push_str(&format!("g2 {label} {control} {target}\n"));
                }
            }
        }
        out
    }
}

impl fmt::Display for CircuitSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "circuit {} ({} qubits, {} gates)",
            self.id,
            self.num_qubits,
            self.gates.len()
        )
    }
}

/// Undirected weighted qubit-coupling graph.
///
/// Edge weights are positive integer gate counts; the sum of all weights
/// equals the number of two-qubit gates in the source circuit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionGraph {
    num_vertices: usize,
    // key is always (min, max); values are >= 1
    weights: BTreeMap<(usize, usize), u64>,
}

impl InteractionGraph {
    pub fn new(num_vertices: usize) -> Result<Self> {
        if num_vertices == 0 {
            return Err(Error::invalid("graph needs at least one vertex"));
        }
        Ok(InteractionGraph {
            num_vertices,
            weights: BTreeMap::new(),
        })
    }

    /// Adds `weight` to the unordered pair `{u, v}`. Rejects self-loops and
    /// out-of-range vertices.
    pub fn add_interaction(&mut self, u: usize, v: usize, weight: u64) -> Result<()> {
        if u >= self.num_vertices || v >= self.num_vertices {
            return Err(Error::invalid(format!(
                "vertex pair ({u}, {v}) out of range for {} vertices",
                self.num_vertices
            )));
        }
        if u == v {
            return Err(Error::invalid(format!("self-loop on vertex {u}")));
        }
        if weight == 0 {
            return Err(Error::invalid("edge weight must be positive"));
        }
        *self.weights.entry((u.min(v), u.max(v))).or_insert(0) += weight;
        Ok(())
    }

    pub fn num_vertices(&self) -> usize {
        self.num_vertices
    }

    pub fn num_edges(&self) -> usize {
        self.weights.len()
    }

    /// Edges in ascending `(u, v)` order with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        self.weights.iter().map(|(&(u, v), &w)| (u, v, w))
    }

    /// Weight of the unordered pair `{u, v}`, zero if absent.
    pub fn weight(&self, u: usize, v: usize) -> u64 {
        if u == v {
            return 0;
        }
        self.weights
            .get(&(u.min(v), u.max(v)))
            .copied()
            .unwrap_or(0)
    }

    pub fn total_weight(&self) -> u64 {
        self.weights.values().sum()
    }

    /// Sum of edge weights incident to `v`.
    pub fn weighted_degree(&self, v: usize) -> u64 {
        self.edges()
            .filter(|&(a, b, _)| a == v || b == v)
            .map(|(_, _, w)| w)
            .sum()
    }

    /// Total weight of edges with both endpoints inside `vertices` — the
    /// local-gate count of that qubit set. Duplicates are ignored.
    pub fn subgraph_weight(&self, vertices: &[usize]) -> Result<u64> {
        let mut member = vec![false; self.num_vertices];
        for &v in vertices {
            if v >= self.num_vertices {
                return Err(Error::invalid(format!(
                    "vertex {v} out of range for {} vertices",
                    self.num_vertices
                )));
            }
            member[v] = true;
        }
        Ok(self
            .edges()
            .filter(|&(u, v, _)| member[u] && member[v])
            .map(|(_, _, w)| w)
            .sum())
    }
}

/// GHZ-state preparation on `n` qubits: a Hadamard on qubit 0 followed by a
/// CNOT chain `i -> i+1`. Interaction graph: a path with unit weights.
pub fn generate_ghz(n: usize) -> Result<CircuitSpec> {
    if n == 0 {
        return Err(Error::invalid("ghz: qubit count must be at least 1"));
    }
    let mut gates = vec![Gate::single("h", 0)];
    for i in 0..n.saturating_sub(1) {
        gates.push(Gate::two("cx", i, i + 1));
    }
    CircuitSpec::new(0, n, gates)
}

/// Quantum Fourier transform on `n` qubits: per qubit a Hadamard, then one
/// controlled-phase gate to every later qubit. Interaction graph: the
/// complete graph with unit weights.
pub fn generate_qft(n: usize) -> Result<CircuitSpec> {
    if n == 0 {
        return Err(Error::invalid("qft: qubit count must be at least 1"));
    }
    let mut gates = Vec::new();
    for i in 0..n {
        gates.push(Gate::single("h", i));
        for j in i + 1..n {
            gates.push(Gate::two("cp", i, j));
        }
    }
    CircuitSpec::new(0, n, gates)
}

/// Deutsch-Jozsa with a balanced all-CNOT oracle on `n_inputs` input qubits
/// plus one ancilla (the last index). Interaction graph: a star centered on
/// the ancilla with unit weights.
pub fn generate_dj(n_inputs: usize) -> Result<CircuitSpec> {
    if n_inputs == 0 {
        return Err(Error::invalid("dj: input count must be at least 1"));
    }
    let n = n_inputs + 1;
    let ancilla = n_inputs;
    let mut gates = Vec::new();
    for q in 0..n {
        gates.push(Gate::single("h", q));
    }
    for q in 0..n_inputs {
        gates.push(Gate::two("cx", q, ancilla));
    }
    for q in 0..n_inputs {
        gates.push(Gate::single("h", q));
    }
    CircuitSpec::new(0, n, gates)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn path_graph(n: usize) -> InteractionGraph {
        generate_ghz(n).unwrap().interaction_graph()
    }

    #[test]
    fn ghz_six_is_a_path() {
        let c = generate_ghz(6).unwrap();
        assert_eq!(c.num_qubits(), 6);
        assert_eq!(c.gates().len(), 6); // 1 Hadamard + 5 CNOTs
        assert_eq!(c.two_qubit_gate_count(), 5);
        let g = c.interaction_graph();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(
            edges,
            vec![(0, 1, 1), (1, 2, 1), (2, 3, 1), (3, 4, 1), (4, 5, 1)]
        );
    }

    #[test]
    fn ghz_one_has_no_edges() {
        let c = generate_ghz(1).unwrap();
        assert_eq!(c.gates().len(), 1);
        assert_eq!(c.interaction_graph().num_edges(), 0);
    }

    #[test]
    fn ghz_three_edges() {
        let g = path_graph(3);
        assert_eq!(g.weight(0, 1), 1);
        assert_eq!(g.weight(1, 2), 1);
        assert_eq!(g.num_edges(), 2);
    }

    #[test]
    fn ghz_zero_rejected() {
        assert!(generate_ghz(0).is_err());
        assert!(generate_qft(0).is_err());
        assert!(generate_dj(0).is_err());
    }

    #[test]
    fn qft_four_is_complete() {
        let c = generate_qft(4).unwrap();
        assert_eq!(c.two_qubit_gate_count(), 6); // C(4,2)
        let g = c.interaction_graph();
        assert_eq!(g.num_edges(), 6);
        for u in 0..4 {
            for v in u + 1..4 {
                assert_eq!(g.weight(u, v), 1);
            }
        }
    }

    #[test]
    fn qft_small_totals() {
        assert_eq!(generate_qft(1).unwrap().two_qubit_gate_count(), 0);
        assert_eq!(
            generate_qft(3).unwrap().interaction_graph().total_weight(),
            3
        );
    }

    #[test]
    fn dj_is_a_star_on_the_ancilla() {
        let c = generate_dj(5).unwrap();
        assert_eq!(c.num_qubits(), 6);
        let g = c.interaction_graph();
        assert_eq!(g.num_edges(), 5);
        for (u, v, w) in g.edges() {
            assert_eq!(w, 1);
            assert!(v == 5 || u == 5);
        }
    }

    #[test]
    fn dj_smallest() {
        let g = generate_dj(1).unwrap().interaction_graph();
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1, 1)]);
        assert_eq!(generate_dj(3).unwrap().interaction_graph().total_weight(), 3);
    }

    #[test]
    fn repeated_pair_accumulates_weight() {
        let gates = vec![
            Gate::two("cx", 0, 1),
            Gate::two("cx", 1, 0),
            Gate::two("cx", 0, 1),
        ];
        let c = CircuitSpec::new(9, 2, gates).unwrap();
        let g = c.interaction_graph();
        assert_eq!(g.weight(0, 1), 3);
        assert_eq!(g.num_edges(), 1);
    }

    #[test]
    fn single_qubit_only_circuit_has_empty_edge_set() {
        let c = CircuitSpec::new(0, 3, vec![Gate::single("h", 0), Gate::single("x", 2)]).unwrap();
        assert_eq!(c.interaction_graph().num_edges(), 0);
    }

    #[test]
    fn circuit_invariants_enforced() {
        assert!(CircuitSpec::new(0, 0, vec![]).is_err());
        assert!(CircuitSpec::new(0, 2, vec![Gate::single("h", 2)]).is_err());
        assert!(CircuitSpec::new(0, 2, vec![Gate::two("cx", 0, 0)]).is_err());
        assert!(CircuitSpec::new(0, 2, vec![Gate::two("cx", 0, 5)]).is_err());
    }

    #[test]
    fn subgraph_weight_examples() {
        let path = path_graph(6);
        assert_eq!(path.subgraph_weight(&[0, 1, 2]).unwrap(), 2);
        assert_eq!(path.subgraph_weight(&[]).unwrap(), 0);
        assert_eq!(path.subgraph_weight(&[3]).unwrap(), 0);

        let k4 = generate_qft(4).unwrap().interaction_graph();
        assert_eq!(k4.subgraph_weight(&[0, 1, 2]).unwrap(), 3);

        assert!(path.subgraph_weight(&[0, 9]).is_err());
    }

    #[test]
    fn parse_round_trip() {
        let src = "# ghz on three qubits\nqubits 3\ng1 h 0\ng2 cx 0 1\ng2 cx 1 2\n";
        let c = CircuitSpec::parse(src).unwrap();
        assert_eq!(c.num_qubits(), 3);
        assert_eq!(c.two_qubit_gate_count(), 2);
        let again = CircuitSpec::parse(&c.to_text()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn parse_reports_line_numbers() {
        let src = "qubits 3\ng1 h 0\ng2 cx 0 7\n";
        match CircuitSpec::parse(src) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 3);
                assert!(message.contains("out of range"), "{message}");
            }
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn parse_rejects_missing_header_and_bad_directives() {
        assert!(matches!(
            CircuitSpec::parse("g1 h 0\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            CircuitSpec::parse("qubits 2\ngate h 0\n"),
            Err(Error::Parse { line: 2, .. })
        ));
        assert!(CircuitSpec::parse("# nothing\n").is_err());
    }

    proptest! {
        #[test]
        fn graph_weight_matches_gate_count(n in 1usize..=64, family in 0u8..3) {
            let c = match family {
                0 => generate_ghz(n).unwrap(),
                1 => generate_qft(n).unwrap(),
                _ => generate_dj(n).unwrap(),
            };
            prop_assert_eq!(c.interaction_graph().total_weight(), c.two_qubit_gate_count());
        }

        #[test]
        fn qft_graph_is_complete(n in 1usize..=24) {
            let g = generate_qft(n).unwrap().interaction_graph();
            prop_assert_eq!(g.num_edges(), n * (n - 1) / 2);
            prop_assert!(g.edges().all(|(_, _, w)| w == 1));
        }

        #[test]
        fn dj_graph_is_a_star(k in 1usize..=32) {
            let g = generate_dj(k).unwrap().interaction_graph();
            prop_assert_eq!(g.num_edges(), k);
            prop_assert!(g.edges().all(|(_, v, w)| v == k && w == 1));
        }

        #[test]
        fn subgraph_weight_is_monotone(n in 2usize..=16, cut in 0usize..=16) {
            let g = generate_qft(n).unwrap().interaction_graph();
            let t: Vec<usize> = (0..n).collect();
            let s: Vec<usize> = t.iter().copied().take(cut.min(n)).collect();
            prop_assert!(g.subgraph_weight(&s).unwrap() <= g.subgraph_weight(&t).unwrap());
        }
    }
}
