//! BBGKY equations and the immediate-connection hierarchy graph.
//!
//! The equation of motion of a Pauli-string expectation couples it to the
//! bracket targets of the Hamiltonian terms; the symmetric closure of that
//! relation is an undirected graph whose breadth-first layers around an
//! observable's string set drive the mitigation scheme.

use std::collections::{BTreeSet, HashMap};

use serde_json::json;

use crate::error::{Error, Result};
use crate::hamiltonian::Hamiltonian;
use crate::pauli::{bracket, difference_count, BracketKind, PauliString};

/// One summand on the right-hand side of a BBGKY equation:
/// `static_coeff * h_term(t) * <target>`.
#[derive(Debug, Clone)]
pub struct RhsTerm {
    pub target: PauliString,
    /// Index into the Hamiltonian term list supplying the coupling.
    pub ham_index: usize,
    /// `f * s_eps`, always ±2 for stored (nonzero) terms.
    pub static_coeff: f64,
}

impl RhsTerm {
    /// Full coefficient at time `t`. Right-continuous across coupling
    /// discontinuities: the equation of motion on the simulation window sees
    /// the post-quench Hamiltonian at `t = 0`.
    pub fn coefficient_at(&self, h: &Hamiltonian, t: f64) -> f64 {
        self.static_coeff * h.coupling_at_plus(self.ham_index, t).expect("valid index")
    }
}

/// The equation of motion `d<source>/dt = sum coefficient_at(t) * <target>`.
#[derive(Debug, Clone)]
pub struct BbgkyEquation {
    pub source: PauliString,
    pub rhs: Vec<RhsTerm>,
}

/// Derives the BBGKY equation of `source` under `h`: one term per Hamiltonian
/// string with odd difference count. An empty right-hand side means the
/// expectation is conserved.
pub fn bbgky_equation(source: &PauliString, h: &Hamiltonian) -> BbgkyEquation {
    let mut rhs = Vec::new();
    for (ham_index, (ham_string, _)) in h.terms().iter().enumerate() {
        if difference_count(source, ham_string) % 2 == 0 {
            continue;
        }
        let b = bracket(source, ham_string, BracketKind::Commutator);
        // Commutator coefficient is i * f * s_eps; Ehrenfest's 1/i leaves the
        // real factor f * s_eps.
        debug_assert_eq!(b.coeff.re, 0);
        let target = b.string.expect("odd difference count keeps support");
        rhs.push(RhsTerm {
            target,
            ham_index,
            static_coeff: b.coeff.im as f64,
        });
    }
    BbgkyEquation {
        source: source.clone(),
        rhs,
    }
}

/// Which layer-size ratio to use as the action interpolation weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ZMode {
    /// `|Q_r| / |Q_{r+1}|`
    Next,
    /// `|Q_r| / |Q_R|`
    Full,
}

/// Breadth-first expansion of the immediate-connection graph around a seed
/// layer. Nodes are ordered layer by layer (seed order first, then each new
/// layer sorted canonically), so every `Q_r` is a prefix of the node list.
#[derive(Debug, Clone)]
pub struct HierarchyGraph {
    nodes: Vec<PauliString>,
    node_index: HashMap<PauliString, usize>,
    radius: Vec<usize>,
    /// `layer_sizes[r] = |Q_r|` for every computed layer.
    layer_sizes: Vec<usize>,
    /// Equations of all expanded nodes (everything except, possibly, the
    /// outermost layer).
    equations: Vec<Option<BbgkyEquation>>,
    adjacency: Vec<BTreeSet<usize>>,
    /// Subhierarchy radius, once expansion saturated.
    saturated_at: Option<usize>,
}

impl HierarchyGraph {
    fn seed(q0: &[PauliString]) -> Result<HierarchyGraph> {
        if q0.is_empty() {
            return Err(Error::config("seed layer is empty"));
        }
        let mut g = HierarchyGraph {
            nodes: Vec::new(),
            node_index: HashMap::new(),
            radius: Vec::new(),
            layer_sizes: Vec::new(),
            equations: Vec::new(),
            adjacency: Vec::new(),
            saturated_at: None,
        };
        for s in q0 {
            if g.node_index.contains_key(s) {
                continue;
            }
            g.push_node(s.clone(), 0);
        }
        g.layer_sizes.push(g.nodes.len());
        Ok(g)
    }

    fn push_node(&mut self, s: PauliString, radius: usize) {
        self.node_index.insert(s.clone(), self.nodes.len());
        self.nodes.push(s);
        self.radius.push(radius);
        self.equations.push(None);
        self.adjacency.push(BTreeSet::new());
    }

    /// Expands one layer: computes the equations of every node at the current
    /// frontier radius and appends newly discovered targets. Returns how many
    /// nodes were added.
    fn grow_layer(&mut self, h: &Hamiltonian) -> usize {
        let depth = self.layer_sizes.len() - 1;
        let frontier: Vec<usize> = (0..self.nodes.len())
            .filter(|&i| self.radius[i] == depth && self.equations[i].is_none())
            .collect();
        let mut discovered: Vec<PauliString> = Vec::new();
        for i in frontier {
            let eq = bbgky_equation(&self.nodes[i], h);
            for term in &eq.rhs {
                if !self.node_index.contains_key(&term.target) && !discovered.contains(&term.target)
                {
                    discovered.push(term.target.clone());
                }
            }
            self.equations[i] = Some(eq);
        }
        discovered.sort();
        let added = discovered.len();
        for s in discovered {
            self.push_node(s, depth + 1);
        }
        // Record edges now that every target has an index.
        for i in 0..self.nodes.len() {
            if self.radius[i] == depth {
                if let Some(eq) = &self.equations[i] {
                    let targets: Vec<usize> =
                        eq.rhs.iter().map(|t| self.node_index[&t.target]).collect();
                    for j in targets {
                        self.adjacency[i].insert(j);
                        self.adjacency[j].insert(i);
                    }
                }
            }
        }
        self.layer_sizes.push(self.nodes.len());
        if added == 0 && self.saturated_at.is_none() {
            self.saturated_at = Some(depth);
        }
        added
    }

    /// The immediate-connection graph built from `q0` by at most `r`
    /// successive immediate connections.
    pub fn expand(q0: &[PauliString], h: &Hamiltonian, r: usize) -> Result<HierarchyGraph> {
        let mut g = HierarchyGraph::seed(q0)?;
        for _ in 0..r {
            if g.saturated_at.is_some() {
                break;
            }
            g.grow_layer(h);
        }
        g.verify_edge_symmetry()?;
        Ok(g)
    }

    /// Expands until `Q_{r+1} = Q_r`, returning the subhierarchy radius and
    /// the saturated graph.
    pub fn subhierarchy_radius(
        q0: &[PauliString],
        h: &Hamiltonian,
    ) -> Result<(usize, HierarchyGraph)> {
        let mut g = HierarchyGraph::seed(q0)?;
        // Termination: layers are strictly monotone until saturation and
        // bounded by the finite string count.
        while g.saturated_at.is_none() {
            g.grow_layer(h);
        }
        g.verify_edge_symmetry()?;
        Ok((g.saturated_at.unwrap(), g))
    }

    /// Every directed discovery must be mirrored by the reverse equation;
    /// anything else is an internal error of the bracket algebra. Only node
    /// pairs whose equations are both expanded can be checked.
    fn verify_edge_symmetry(&self) -> Result<()> {
        for i in 0..self.nodes.len() {
            let Some(eq) = &self.equations[i] else {
                continue;
            };
            for term in &eq.rhs {
                let j = self.node_index[&term.target];
                if let Some(back) = &self.equations[j] {
                    if !back.rhs.iter().any(|t| t.target == self.nodes[i]) {
                        return Err(Error::numerical(format!(
                            "asymmetric immediate connection {} -> {}",
                            self.nodes[i], self.nodes[j]
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[PauliString] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn radius_of(&self, index: usize) -> usize {
        self.radius[index]
    }

    pub fn index_of(&self, s: &PauliString) -> Option<usize> {
        self.node_index.get(s).copied()
    }

    pub fn neighbors(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        self.adjacency[index].iter().copied()
    }

    /// Undirected edge list as `(i, j)` with `i <= j`.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for i in 0..self.nodes.len() {
            for &j in &self.adjacency[i] {
                if i <= j {
                    out.push((i, j));
                }
            }
        }
        out
    }

    /// Subhierarchy radius, when expansion has saturated.
    pub fn saturation(&self) -> Option<usize> {
        self.saturated_at
    }

    /// Number of layers with computed sizes (highest known `r` + 1).
    pub fn computed_layers(&self) -> usize {
        self.layer_sizes.len()
    }

    /// `|Q_r|`; for saturated graphs any `r >= R` yields `|Q_R|`.
    pub fn layer_size(&self, r: usize) -> Result<usize> {
        if r < self.layer_sizes.len() {
            return Ok(self.layer_sizes[r]);
        }
        if self.saturated_at.is_some() {
            return Ok(*self.layer_sizes.last().unwrap());
        }
        Err(Error::config(format!(
            "layer {r} not expanded (graph has {} layers)",
            self.layer_sizes.len()
        )))
    }

    /// The equation of node `index`, when expanded.
    pub fn equation(&self, index: usize) -> Option<&BbgkyEquation> {
        self.equations[index].as_ref()
    }

    /// Interpolation weight `z` at radius `r`.
    pub fn z_ratio(&self, r: usize, mode: ZMode) -> Result<f64> {
        let qr = self.layer_size(r)? as f64;
        let denom = match mode {
            ZMode::Next => self.layer_size(r + 1)? as f64,
            ZMode::Full => {
                if self.saturated_at.is_none() {
                    return Err(Error::config("full z-ratio needs a saturated graph"));
                }
                *self.layer_sizes.last().unwrap() as f64
            }
        };
        Ok(qr / denom)
    }

    /// Layer census as JSON (`{"r": 0, "size": 16}` entries plus the radius).
    pub fn census_json(&self) -> serde_json::Value {
        let layers: Vec<_> = self
            .layer_sizes
            .iter()
            .enumerate()
            .map(|(r, size)| json!({ "r": r, "size": size }))
            .collect();
        json!({
            "layers": layers,
            "radius": self.saturated_at,
            "nodes": self.nodes.len(),
        })
    }

    /// DOT export; nodes carry the string, length and radius, edges the
    /// absolute length difference.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph hierarchy {\n");
        for (i, node) in self.nodes.iter().enumerate() {
            out.push_str(&format!(
                "  n{} [label=\"{}\" len={} radius={}];\n",
                i,
                node,
                node.len(),
                self.radius[i]
            ));
        }
        for (i, j) in self.edges() {
            let dlen = self.nodes[i].len().abs_diff(self.nodes[j].len());
            out.push_str(&format!("  n{i} -- n{j} [dlen={dlen}];\n"));
        }
        out.push_str("}\n");
        out
    }

    /// JSON export mirroring the DOT annotations.
    pub fn to_json(&self) -> serde_json::Value {
        let nodes: Vec<_> = self
            .nodes
            .iter()
            .enumerate()
            .map(|(i, node)| {
                json!({
                    "id": i,
                    "string": node.to_string(),
                    "len": node.len(),
                    "radius": self.radius[i],
                })
            })
            .collect();
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .map(|(i, j)| {
                json!({
                    "a": i,
                    "b": j,
                    "dlen": self.nodes[i].len().abs_diff(self.nodes[j].len()),
                })
            })
            .collect();
        json!({ "nodes": nodes, "edges": edges })
    }
}

/// Partition of all non-identity strings into independent subhierarchies.
#[derive(Debug, Clone)]
pub struct PartitionReport {
    /// Component sizes, descending.
    pub component_sizes: Vec<usize>,
    /// Size of the component containing the given probe strings (when asked).
    pub probe_component: Option<usize>,
    pub nqubits: usize,
}

impl PartitionReport {
    /// Component count over non-identity strings.
    pub fn count(&self) -> usize {
        self.component_sizes.len()
    }

    /// Component count with the identity string counted as its own trivial
    /// component.
    pub fn count_with_identity(&self) -> usize {
        self.component_sizes.len() + 1
    }

    pub fn total_strings(&self) -> usize {
        self.component_sizes.iter().sum()
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "nqubits": self.nqubits,
            "components_nonidentity": self.count(),
            "components_with_identity": self.count_with_identity(),
            "sizes": self.component_sizes,
            "probe_component": self.probe_component,
        })
    }
}

const PARTITION_GUARD: usize = 10;

fn encode(s: &PauliString) -> usize {
    let mut code = 0usize;
    for &(site, axis) in s.support() {
        code |= (axis as usize) << (2 * (site as usize - 1));
    }
    code
}

fn decode(mut code: usize, nqubits: usize) -> PauliString {
    let mut support = Vec::new();
    for site in 1..=nqubits as u32 {
        let digit = code & 3;
        code >>= 2;
        if digit != 0 {
            let axis = match digit {
                1 => crate::pauli::Axis::X,
                2 => crate::pauli::Axis::Y,
                _ => crate::pauli::Axis::Z,
            };
            support.push((site, axis));
        }
    }
    PauliString::new(support).expect("nonzero code has support")
}

struct UnionFind {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl UnionFind {
    fn new(n: usize) -> UnionFind {
        UnionFind {
            parent: (0..n as u32).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            self.parent[x as usize] = self.parent[self.parent[x as usize] as usize];
            x = self.parent[x as usize];
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        if self.size[ra as usize] < self.size[rb as usize] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.size[ra as usize] += self.size[rb as usize];
        self.parent[rb as usize] = ra;
    }
}

/// Splits the full hierarchy (all `4^nqubits - 1` non-identity strings) into
/// connected components under immediate connection. Adjacency is generated
/// lazily per string; only the union-find table is kept in memory.
///
/// `probe` optionally names strings whose common component size is reported
/// (they must all fall in one component, else an error).
pub fn partition_full(h: &Hamiltonian, probe: Option<&[PauliString]>) -> Result<PartitionReport> {
    let nq = h.nqubits();
    if nq > PARTITION_GUARD {
        return Err(Error::guard(format!(
            "full-hierarchy partition is limited to {PARTITION_GUARD} qubits (requested {nq}): \
             4^{nq} strings would be enumerated"
        )));
    }
    let total = 1usize << (2 * nq);
    let mut uf = UnionFind::new(total);
    for code in 1..total {
        let s = decode(code, nq);
        for (ham_string, _) in h.terms() {
            if difference_count(&s, ham_string) % 2 == 0 {
                continue;
            }
            let b = bracket(&s, ham_string, BracketKind::Commutator);
            let target = b.string.expect("odd difference keeps support");
            uf.union(code as u32, encode(&target) as u32);
        }
    }
    let mut sizes: HashMap<u32, usize> = HashMap::new();
    for code in 1..total {
        *sizes.entry(uf.find(code as u32)).or_insert(0) += 1;
    }
    let mut component_sizes: Vec<usize> = sizes.values().copied().collect();
    component_sizes.sort_unstable_by(|a, b| b.cmp(a));

    let probe_component = match probe {
        Some(strings) if !strings.is_empty() => {
            let roots: BTreeSet<u32> = strings
                .iter()
                .map(|s| {
                    if s.max_site() as usize > nq {
                        return Err(Error::config(format!("probe string {s} exceeds system")));
                    }
                    Ok(uf.find(encode(s) as u32))
                })
                .collect::<Result<_>>()?;
            if roots.len() != 1 {
                return Err(Error::numerical(
                    "probe strings span multiple components".to_string(),
                ));
            }
            Some(sizes[roots.iter().next().unwrap()])
        }
        _ => None,
    };

    Ok(PartitionReport {
        component_sizes,
        probe_component,
        nqubits: nq,
    })
}
