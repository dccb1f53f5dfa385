//! Logic-first synthesis of formula/text corpora.
//!
//! Generation runs in three stages: sample an operator skeleton under depth
//! and breadth bounds, instantiate its leaves with lifted spatial atoms over
//! a symbolic universe, and back-translate every node to canonical English
//! (plus paraphrases from the gateway). Record `i` of a corpus draws from the
//! stream-`i` substream of a counter-based generator seeded by the spec, so
//! corpora are byte-identical across reruns and records are independent.

use std::collections::BTreeMap;
use std::io::Write;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::formula::{serialize_formula, structure_metrics, Formula, Ident, Interval, SpatialAtom};
use crate::gateway::{paraphrase_node, LanguageBackend, ParaphraseRequest};
use crate::render::{render_all_nodes, RenderOptions};

/// Sampling weights over the operator alphabet.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OperatorWeights {
    pub not: f64,
    pub and: f64,
    pub or: f64,
    pub always: f64,
    pub eventually: f64,
    pub until: f64,
}

impl Default for OperatorWeights {
    fn default() -> Self {
        OperatorWeights {
            not: 1.0,
            and: 1.0,
            or: 1.0,
            always: 1.0,
            eventually: 1.0,
            until: 1.0,
        }
    }
}

/// Closed sampling range for one tolerance constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstRange {
    pub lo: f64,
    pub hi: f64,
}

impl ConstRange {
    pub fn new(lo: f64, hi: f64) -> Self {
        ConstRange { lo, hi }
    }
}

/// Per-constant sampling ranges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ConstantRanges {
    pub eps: ConstRange,
    pub eps_c: ConstRange,
    pub eps_f: ConstRange,
    pub tau: ConstRange,
    pub rho: ConstRange,
    pub kappa: ConstRange,
}

impl Default for ConstantRanges {
    fn default() -> Self {
        ConstantRanges {
            eps: ConstRange::new(0.01, 0.5),
            eps_c: ConstRange::new(0.1, 3.0),
            eps_f: ConstRange::new(0.1, 3.0),
            tau: ConstRange::new(0.01, 0.5),
            rho: ConstRange::new(0.01, 0.5),
            kappa: ConstRange::new(0.01, 1.0),
        }
    }
}

/// Spatial predicate families available to leaf instantiation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub enum AtomFamily {
    Touch,
    CloseTo,
    FarFrom,
    Ovlp,
    PartOvlp,
    EnclIn,
    LeftOf,
    RightOf,
    Above,
    Below,
    BetweenPx,
    BetweenPy,
    Oriented,
}

impl AtomFamily {
    /// Distinct object identifiers the family needs, given whether a region
    /// can fill its region-typed slot.
    fn objects_needed(self, have_regions: bool) -> usize {
        match self {
            AtomFamily::BetweenPx | AtomFamily::BetweenPy => 3,
            AtomFamily::EnclIn if have_regions => 1,
            _ => 2,
        }
    }
}

/// `oriented` and implication are renderable and parsable everywhere but are
/// not sampled by default.
pub fn default_atom_families() -> Vec<AtomFamily> {
    vec![
        AtomFamily::Touch,
        AtomFamily::CloseTo,
        AtomFamily::FarFrom,
        AtomFamily::Ovlp,
        AtomFamily::PartOvlp,
        AtomFamily::EnclIn,
        AtomFamily::LeftOf,
        AtomFamily::RightOf,
        AtomFamily::Above,
        AtomFamily::Below,
        AtomFamily::BetweenPx,
        AtomFamily::BetweenPy,
    ]
}

/// Full description of a corpus: structural bounds, operator weights,
/// universe sizes, constant ranges, paraphrase count, and master seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GenSpec {
    pub d_max: usize,
    pub b_max: usize,
    pub t_max: usize,
    /// Number of objects `obj_1..obj_M` in the symbolic universe.
    pub objects: usize,
    /// Number of regions `reg_1..reg_K`.
    pub regions: usize,
    pub weights: OperatorWeights,
    pub constants: ConstantRanges,
    pub atom_families: Vec<AtomFamily>,
    /// Paraphrases per node.
    pub paraphrase_k: usize,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            d_max: 4,
            b_max: 3,
            t_max: 20,
            objects: 3,
            regions: 1,
            weights: OperatorWeights::default(),
            constants: ConstantRanges::default(),
            atom_families: default_atom_families(),
            paraphrase_k: 2,
            seed: 0,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum GenError {
    #[error("infeasible spec: {0}")]
    InfeasibleSpec(String),
    #[error("universe too small: {family:?} needs {needed} distinct objects, universe has {objects} objects and {regions} regions")]
    UniverseTooSmall {
        family: AtomFamily,
        needed: usize,
        objects: usize,
        regions: usize,
    },
    #[error("invalid spec: {0}")]
    Invalid(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl GenSpec {
    pub fn validate(&self) -> Result<(), GenError> {
        if self.d_max < 2 {
            return Err(GenError::Invalid(format!("d_max must be >= 2, got {}", self.d_max)));
        }
        if self.b_max < 1 {
            return Err(GenError::Invalid("b_max must be >= 1".into()));
        }
        if self.atom_families.is_empty() {
            return Err(GenError::Invalid("atom_families must not be empty".into()));
        }
        let have_regions = self.regions > 0;
        for family in &self.atom_families {
            let needed = family.objects_needed(have_regions);
            if self.objects < needed {
                return Err(GenError::UniverseTooSmall {
                    family: *family,
                    needed,
                    objects: self.objects,
                    regions: self.regions,
                });
            }
        }
        for (name, range) in [
            ("eps", self.constants.eps),
            ("eps_c", self.constants.eps_c),
            ("eps_f", self.constants.eps_f),
            ("tau", self.constants.tau),
            ("rho", self.constants.rho),
            ("kappa", self.constants.kappa),
        ] {
            if !(range.lo >= 0.001 && range.lo <= range.hi && range.hi.is_finite()) {
                return Err(GenError::Invalid(format!(
                    "constant range {name} = [{}, {}] must satisfy 0.001 <= lo <= hi",
                    range.lo, range.hi
                )));
            }
        }
        if self.atom_families.contains(&AtomFamily::Oriented) && self.constants.kappa.hi > 2.0 {
            return Err(GenError::Invalid(
                "kappa range extends past 2, the oriented tolerance maximum".into(),
            ));
        }
        let w = &self.weights;
        for (name, value) in [
            ("not", w.not),
            ("and", w.and),
            ("or", w.or),
            ("always", w.always),
            ("eventually", w.eventually),
            ("until", w.until),
        ] {
            if !(value >= 0.0 && value.is_finite()) {
                return Err(GenError::Invalid(format!("weight {name} must be >= 0")));
            }
        }
        // with b_max = 1 only unary operators fit, so one of them must be
        // reachable for the skeleton to terminate constructively
        let unary_sum = w.not + w.always + w.eventually;
        let total = unary_sum + w.and + w.or + w.until;
        if total <= 0.0 {
            return Err(GenError::InfeasibleSpec("all operator weights are zero".into()));
        }
        if self.b_max == 1 && unary_sum <= 0.0 {
            return Err(GenError::InfeasibleSpec(
                "b_max = 1 admits only unary operators but their weights are all zero".into(),
            ));
        }
        Ok(())
    }

    /// The substream generator for record `index`.
    pub fn stream(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Universe identifiers, objects then regions.
    pub fn universe(&self) -> Vec<Ident> {
        (0..self.objects)
            .map(Ident::object)
            .chain((0..self.regions).map(Ident::region))
            .collect()
    }
}

/// Operator tree with unlabeled leaves.
#[derive(Debug, Clone, PartialEq)]
pub struct Skeleton {
    /// Sampled depth; the longest root-to-leaf path has exactly this many layers.
    pub depth: usize,
    /// Sampled breadth bound; no node has more children.
    pub breadth: usize,
    pub root: SkeletonNode,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SkeletonNode {
    Leaf,
    Not(Box<SkeletonNode>),
    And(Vec<SkeletonNode>),
    Or(Vec<SkeletonNode>),
    Always(Interval, Box<SkeletonNode>),
    Eventually(Interval, Box<SkeletonNode>),
    Until(Interval, Box<SkeletonNode>, Box<SkeletonNode>),
}

impl SkeletonNode {
    fn children(&self) -> Vec<&SkeletonNode> {
        match self {
            SkeletonNode::Leaf => vec![],
            SkeletonNode::Not(c) | SkeletonNode::Always(_, c) | SkeletonNode::Eventually(_, c) => {
                vec![c]
            }
            SkeletonNode::And(cs) | SkeletonNode::Or(cs) => cs.iter().collect(),
            SkeletonNode::Until(_, l, r) => vec![l, r],
        }
    }

    fn height(&self) -> usize {
        1 + self.children().iter().map(|c| c.height()).max().unwrap_or(0)
    }
}

impl Skeleton {
    pub fn leaf_count(&self) -> usize {
        fn count(node: &SkeletonNode) -> usize {
            let children = node.children();
            if children.is_empty() {
                1
            } else {
                children.iter().map(|c| count(c)).sum()
            }
        }
        count(&self.root)
    }

    /// Structural invariant violations, empty for well-formed skeletons:
    /// exact sampled depth, breadth bound respected, and per-operator arity
    /// (conjunction and disjunction branch 2..=B, unary operators exactly 1,
    /// until exactly 2).
    pub fn audit(&self) -> Vec<String> {
        let mut issues = Vec::new();
        if self.root.height() != self.depth {
            issues.push(format!(
                "height {} differs from sampled depth {}",
                self.root.height(),
                self.depth
            ));
        }
        fn walk(node: &SkeletonNode, breadth: usize, issues: &mut Vec<String>) {
            let n = node.children().len();
            match node {
                SkeletonNode::Leaf => {}
                SkeletonNode::And(_) | SkeletonNode::Or(_) => {
                    if n < 2 || n > breadth {
                        issues.push(format!("boolean node with {n} children (bound {breadth})"));
                    }
                }
                SkeletonNode::Not(_) | SkeletonNode::Always(..) | SkeletonNode::Eventually(..) => {
                    if n != 1 {
                        issues.push(format!("unary node with {n} children"));
                    }
                }
                SkeletonNode::Until(..) => {
                    if n != 2 {
                        issues.push(format!("until node with {n} children"));
                    }
                    if breadth < 2 {
                        issues.push("until node under breadth bound 1".to_string());
                    }
                }
            }
            for child in node.children() {
                walk(child, breadth, issues);
            }
        }
        walk(&self.root, self.breadth, &mut issues);
        issues
    }
}

#[derive(Clone, Copy)]
enum Op {
    Not,
    And,
    Or,
    Always,
    Eventually,
    Until,
}

/// Samples an operator skeleton: depth uniform in `2..=d_max`, breadth
/// uniform in `1..=b_max`, then a tree whose longest path hits the sampled
/// depth exactly. One child per level is forced deep; the others truncate at
/// uniformly drawn heights. Boolean nodes are the only source of branching
/// wider than two; until always takes exactly two children and is excluded,
/// together with the boolean connectives, when the breadth bound is 1.
pub fn sample_skeleton(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<Skeleton, GenError> {
    spec.validate()?;
    let depth = rng.random_range(2..=spec.d_max);
    let breadth = rng.random_range(1..=spec.b_max);
    let root = sample_node(spec, rng, depth, breadth)?;
    Ok(Skeleton { depth, breadth, root })
}

fn pick_operator(spec: &GenSpec, rng: &mut ChaCha8Rng, breadth: usize) -> Result<Op, GenError> {
    let w = &spec.weights;
    let mut candidates: Vec<(Op, f64)> = vec![
        (Op::Not, w.not),
        (Op::Always, w.always),
        (Op::Eventually, w.eventually),
    ];
    if breadth >= 2 {
        candidates.push((Op::And, w.and));
        candidates.push((Op::Or, w.or));
        candidates.push((Op::Until, w.until));
    }
    let total: f64 = candidates.iter().map(|(_, w)| w).sum();
    if total <= 0.0 {
        return Err(GenError::InfeasibleSpec(
            "no operator with positive weight fits the breadth bound".into(),
        ));
    }
    let mut roll = rng.random_range(0.0..total);
    for (op, weight) in candidates {
        if roll < weight {
            return Ok(op);
        }
        roll -= weight;
    }
    Ok(Op::Eventually)
}

fn sample_interval(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Interval {
    let a = rng.random_range(0..=spec.t_max);
    let b = rng.random_range(a..=spec.t_max);
    Interval::new(a, b).expect("a <= b by construction")
}

fn sample_node(
    spec: &GenSpec,
    rng: &mut ChaCha8Rng,
    height: usize,
    breadth: usize,
) -> Result<SkeletonNode, GenError> {
    if height == 1 {
        return Ok(SkeletonNode::Leaf);
    }
    let op = pick_operator(spec, rng, breadth)?;
    let node = match op {
        Op::Not => SkeletonNode::Not(Box::new(sample_node(spec, rng, height - 1, breadth)?)),
        Op::Always => SkeletonNode::Always(
            sample_interval(spec, rng),
            Box::new(sample_node(spec, rng, height - 1, breadth)?),
        ),
        Op::Eventually => SkeletonNode::Eventually(
            sample_interval(spec, rng),
            Box::new(sample_node(spec, rng, height - 1, breadth)?),
        ),
        Op::And | Op::Or => {
            let count = rng.random_range(2..=breadth);
            let deep = rng.random_range(0..count);
            let mut children = Vec::with_capacity(count);
            for idx in 0..count {
                let child_height = if idx == deep {
                    height - 1
                } else {
                    rng.random_range(1..=height - 1)
                };
                children.push(sample_node(spec, rng, child_height, breadth)?);
            }
            if matches!(op, Op::And) {
                SkeletonNode::And(children)
            } else {
                SkeletonNode::Or(children)
            }
        }
        Op::Until => {
            let interval = sample_interval(spec, rng);
            let deep = rng.random_range(0..2);
            let mut operands = Vec::with_capacity(2);
            for idx in 0..2 {
                let child_height = if idx == deep {
                    height - 1
                } else {
                    rng.random_range(1..=height - 1)
                };
                operands.push(sample_node(spec, rng, child_height, breadth)?);
            }
            let right = operands.pop().unwrap();
            let left = operands.pop().unwrap();
            SkeletonNode::Until(interval, Box::new(left), Box::new(right))
        }
    };
    Ok(node)
}

fn round3(x: f64) -> f64 {
    (x * 1000.0).round() / 1000.0
}

fn sample_constant(rng: &mut ChaCha8Rng, range: ConstRange) -> f64 {
    if range.lo == range.hi {
        return round3(range.lo);
    }
    round3(rng.random_range(range.lo..range.hi))
}

/// Draws `count` distinct object identifiers.
fn sample_objects(spec: &GenSpec, rng: &mut ChaCha8Rng, count: usize) -> Vec<Ident> {
    let mut pool: Vec<usize> = (0..spec.objects).collect();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let at = rng.random_range(0..pool.len());
        out.push(Ident::object(pool.swap_remove(at)));
    }
    out
}

fn sample_atom(spec: &GenSpec, rng: &mut ChaCha8Rng) -> Result<SpatialAtom, GenError> {
    let family = spec.atom_families[rng.random_range(0..spec.atom_families.len())];
    let have_regions = spec.regions > 0;
    let needed = family.objects_needed(have_regions);
    if spec.objects < needed {
        return Err(GenError::UniverseTooSmall {
            family,
            needed,
            objects: spec.objects,
            regions: spec.regions,
        });
    }
    let c = &spec.constants;
    Ok(match family {
        AtomFamily::Touch => {
            let ids = sample_objects(spec, rng, 2);
            SpatialAtom::Touch {
                i: ids[0].clone(),
                j: ids[1].clone(),
                eps: sample_constant(rng, c.eps),
            }
        }
        AtomFamily::CloseTo => {
            let ids = sample_objects(spec, rng, 2);
            SpatialAtom::CloseTo {
                i: ids[0].clone(),
                j: ids[1].clone(),
                eps_c: sample_constant(rng, c.eps_c),
            }
        }
        AtomFamily::FarFrom => {
            let ids = sample_objects(spec, rng, 2);
            SpatialAtom::FarFrom {
                i: ids[0].clone(),
                j: ids[1].clone(),
                eps_f: sample_constant(rng, c.eps_f),
            }
        }
        AtomFamily::Ovlp => {
            let ids = sample_objects(spec, rng, 2);
            SpatialAtom::Ovlp {
                i: ids[0].clone(),
                j: ids[1].clone(),
                tau: sample_constant(rng, c.tau),
            }
        }
        AtomFamily::PartOvlp => {
            let ids = sample_objects(spec, rng, 2);
            SpatialAtom::PartOvlp {
                i: ids[0].clone(),
                j: ids[1].clone(),
                tau: sample_constant(rng, c.tau),
                rho: sample_constant(rng, c.rho),
            }
        }
        AtomFamily::EnclIn => {
            // the container slot takes a region whenever one exists
            if have_regions {
                let i = sample_objects(spec, rng, 1).pop().unwrap();
                let j = Ident::region(rng.random_range(0..spec.regions));
                SpatialAtom::EnclIn {
                    i,
                    j,
                    rho: sample_constant(rng, c.rho),
                }
            } else {
                let ids = sample_objects(spec, rng, 2);
                SpatialAtom::EnclIn {
                    i: ids[0].clone(),
                    j: ids[1].clone(),
                    rho: sample_constant(rng, c.rho),
                }
            }
        }
        AtomFamily::LeftOf => {
            let ids = sample_objects(spec, rng, 2);
            SpatialAtom::LeftOf {
                i: ids[0].clone(),
                j: ids[1].clone(),
                kappa: sample_constant(rng, c.kappa),
            }
        }
        AtomFamily::RightOf => {
            let ids = sample_objects(spec, rng, 2);
            SpatialAtom::RightOf {
                i: ids[0].clone(),
                j: ids[1].clone(),
                kappa: sample_constant(rng, c.kappa),
            }
        }
        AtomFamily::Above => {
            let ids = sample_objects(spec, rng, 2);
            SpatialAtom::Above {
                i: ids[0].clone(),
                j: ids[1].clone(),
                kappa: sample_constant(rng, c.kappa),
            }
        }
        AtomFamily::Below => {
            let ids = sample_objects(spec, rng, 2);
            SpatialAtom::Below {
                i: ids[0].clone(),
                j: ids[1].clone(),
                kappa: sample_constant(rng, c.kappa),
            }
        }
        AtomFamily::BetweenPx => {
            let ids = sample_objects(spec, rng, 3);
            SpatialAtom::BetweenPx {
                a: ids[0].clone(),
                b: ids[1].clone(),
                c: ids[2].clone(),
                kappa: sample_constant(rng, c.kappa),
            }
        }
        AtomFamily::BetweenPy => {
            let ids = sample_objects(spec, rng, 3);
            SpatialAtom::BetweenPy {
                a: ids[0].clone(),
                b: ids[1].clone(),
                c: ids[2].clone(),
                kappa: sample_constant(rng, c.kappa),
            }
        }
        AtomFamily::Oriented => {
            let ids = sample_objects(spec, rng, 2);
            SpatialAtom::Oriented {
                i: ids[0].clone(),
                j: ids[1].clone(),
                kappa: sample_constant(rng, c.kappa),
            }
        }
    })
}

/// Replaces every leaf placeholder with a lifted spatial atom.
pub fn instantiate_atoms(
    sk: &Skeleton,
    spec: &GenSpec,
    rng: &mut ChaCha8Rng,
) -> Result<Formula, GenError> {
    fn instantiate(
        node: &SkeletonNode,
        spec: &GenSpec,
        rng: &mut ChaCha8Rng,
    ) -> Result<Formula, GenError> {
        Ok(match node {
            SkeletonNode::Leaf => Formula::Atom(sample_atom(spec, rng)?),
            SkeletonNode::Not(c) => Formula::not(instantiate(c, spec, rng)?),
            SkeletonNode::And(cs) => Formula::And(
                cs.iter()
                    .map(|c| instantiate(c, spec, rng))
                    .collect::<Result<_, _>>()?,
            ),
            SkeletonNode::Or(cs) => Formula::Or(
                cs.iter()
                    .map(|c| instantiate(c, spec, rng))
                    .collect::<Result<_, _>>()?,
            ),
            SkeletonNode::Always(iv, c) => Formula::always(*iv, instantiate(c, spec, rng)?),
            SkeletonNode::Eventually(iv, c) => Formula::eventually(*iv, instantiate(c, spec, rng)?),
            SkeletonNode::Until(iv, l, r) => Formula::until(
                *iv,
                instantiate(l, spec, rng)?,
                instantiate(r, spec, rng)?,
            ),
        })
    }
    instantiate(&sk.root, spec, rng)
}

/// Samples the skeleton and formula for record `index` of a corpus.
pub fn sample_record_formula(spec: &GenSpec, index: u64) -> Result<(Skeleton, Formula), GenError> {
    let mut rng = spec.stream(index);
    let sk = sample_skeleton(spec, &mut rng)?;
    let f = instantiate_atoms(&sk, spec, &mut rng)?;
    Ok((sk, f))
}

/// One aligned (formula, text) node of a record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeEntry {
    pub path: Vec<usize>,
    pub formula: String,
    pub canonical: String,
    pub paraphrases: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecordMetadata {
    /// Structure depth; equals the sampled depth.
    pub depth: usize,
    /// Actual maximum child count.
    pub breadth: usize,
    /// The sampled breadth bound the record was generated under.
    pub breadth_bound: usize,
    pub leaf_count: usize,
    pub universe: Vec<String>,
}

/// One corpus line: the formula, its canonical text, paraphrases, and the
/// same triple for every node of the tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetRecord {
    pub id: u64,
    pub seed: u64,
    pub formula: String,
    pub canonical: String,
    pub paraphrases: Vec<String>,
    pub nodes: Vec<NodeEntry>,
    pub metadata: RecordMetadata,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub warning: Option<String>,
}

/// Renders every node of `f` and attaches `spec.paraphrase_k` paraphrases per
/// node. A gateway failure downgrades the record to empty paraphrase lists
/// with a warning instead of failing generation.
pub fn back_translate_record(
    f: &Formula,
    id: u64,
    breadth_bound: usize,
    spec: &GenSpec,
    backend: &dyn LanguageBackend,
) -> DatasetRecord {
    let rendered = render_all_nodes(f, &RenderOptions::default());
    let mut warning = None;
    let mut nodes = Vec::with_capacity(rendered.len());
    for (path, node_formula, canonical) in &rendered {
        let machine = serialize_formula(node_formula);
        let paraphrases = if warning.is_none() {
            match paraphrase_node(
                &ParaphraseRequest {
                    canonical: canonical.text.clone(),
                    formula: machine.clone(),
                    k: spec.paraphrase_k,
                },
                backend,
            ) {
                Ok(texts) => texts,
                Err(e) => {
                    warning = Some(format!("paraphrase backend failed: {e}"));
                    Vec::new()
                }
            }
        } else {
            Vec::new()
        };
        nodes.push(NodeEntry {
            path: path.clone(),
            formula: machine,
            canonical: canonical.text.clone(),
            paraphrases,
        });
    }
    if warning.is_some() {
        for node in &mut nodes {
            node.paraphrases.clear();
        }
    }

    let (depth, breadth, leaf_count) = structure_metrics(f);
    DatasetRecord {
        id,
        seed: spec.seed,
        formula: serialize_formula(f),
        canonical: nodes[0].canonical.clone(),
        paraphrases: nodes[0].paraphrases.clone(),
        nodes,
        metadata: RecordMetadata {
            depth,
            breadth,
            breadth_bound,
            leaf_count,
            universe: spec.universe().iter().map(|i| i.name().to_string()).collect(),
        },
        warning,
    }
}

/// Corpus-level statistics returned by [`generate_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenSummary {
    pub records: u64,
    pub seed: u64,
    /// Sampled depth -> record count.
    pub depth_histogram: BTreeMap<usize, u64>,
}

/// Writes `n` records as JSON lines. Byte-identical for identical `(spec, n)`.
pub fn generate_dataset(
    spec: &GenSpec,
    n: u64,
    mut sink: impl Write,
    backend: &dyn LanguageBackend,
) -> Result<GenSummary, GenError> {
    spec.validate()?;
    let mut depth_histogram = BTreeMap::new();
    for index in 0..n {
        let (sk, f) = sample_record_formula(spec, index)?;
        let record = back_translate_record(&f, index, sk.breadth, spec, backend);
        let line = serde_json::to_string(&record)
            .map_err(|e| GenError::Invalid(format!("record serialization failed: {e}")))?;
        writeln!(sink, "{line}")?;
        *depth_histogram.entry(sk.depth).or_insert(0) += 1;
    }
    Ok(GenSummary {
        records: n,
        seed: spec.seed,
        depth_histogram,
    })
}
