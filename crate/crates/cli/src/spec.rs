//! Job specifications: the JSON input document and its resolution into
//! concrete algebras.

use std::collections::BTreeSet;
use std::str::FromStr;

use finindex_core::basic_construction::GNS_CAP;
use finindex_core::inclusion::{self, block_structure, ConcreteAlgebra, UnitalInclusion};
use finindex_core::instances::{self, FiniteGroupTable, InstanceDescriptor};
use finindex_core::{CMat, TraceFunctional};
use num_rational::Ratio;
use serde::Deserialize;

use crate::CliError;

/// Largest matrix size accepted for inline algebras.
pub const INLINE_SIZE_CAP: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Analysis {
    Index,
    Commutant,
    Markov,
    Angle,
    Meet,
    Stability,
    Bound,
    Lattice,
}

impl Analysis {
    pub const ALL: [Analysis; 8] = [
        Analysis::Index,
        Analysis::Commutant,
        Analysis::Markov,
        Analysis::Angle,
        Analysis::Meet,
        Analysis::Stability,
        Analysis::Bound,
        Analysis::Lattice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Analysis::Index => "index",
            Analysis::Commutant => "commutant",
            Analysis::Markov => "markov",
            Analysis::Angle => "angle",
            Analysis::Meet => "meet",
            Analysis::Stability => "stability",
            Analysis::Bound => "bound",
            Analysis::Lattice => "lattice",
        }
    }

    /// Needs the basic construction of the inclusion.
    pub fn needs_basic(self) -> bool {
        matches!(
            self,
            Analysis::Index | Analysis::Commutant | Analysis::Angle | Analysis::Meet | Analysis::Bound
        )
    }
}

impl FromStr for Analysis {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Analysis::ALL
            .into_iter()
            .find(|a| a.name() == s.trim())
            .ok_or_else(|| CliError::Spec(format!("unknown analysis `{}`", s.trim())))
    }
}

/// A complex matrix written as rows of `[re, im]` pairs.
pub type MatrixSpec = Vec<Vec<[f64; 2]>>;

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InstanceSpec {
    Scalar {
        dims: Vec<usize>,
    },
    FactorTensor {
        k: usize,
        m: usize,
    },
    Diagonal {
        n: usize,
    },
    DirectSum {
        first: Box<InstanceSpec>,
        second: Box<InstanceSpec>,
        #[serde(default = "half")]
        weight: f64,
    },
    Group {
        group: String,
        #[serde(default)]
        subgroup: SubgroupSpec,
    },
    Inline {
        size: usize,
        sub: Vec<MatrixSpec>,
        sup: Vec<MatrixSpec>,
    },
}

fn half() -> f64 {
    0.5
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(untagged)]
pub enum SubgroupSpec {
    #[default]
    #[serde(skip)]
    Trivial,
    Named(String),
    Elements(Vec<usize>),
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(untagged)]
pub enum TraceSpec {
    #[default]
    #[serde(skip)]
    Default,
    Named(String),
    Weights { weights: Vec<WeightSpec> },
}

/// A trace weight: an exact rational string (`"2/13"`) or a float.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum WeightSpec {
    Exact(String),
    Float(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum IntermediateSpec {
    Generators { name: String, generators: Vec<MatrixSpec> },
    Subgroup { name: String, subgroup: Vec<usize> },
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub residual: Option<f64>,
    pub stability: Option<f64>,
    pub meet: Option<f64>,
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    pub instance: InstanceSpec,
    #[serde(default)]
    pub trace: TraceSpec,
    #[serde(default)]
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub intermediates: Option<Vec<IntermediateSpec>>,
    #[serde(default)]
    pub tensor_m: Option<usize>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: Tolerances,
}

impl JobSpec {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Spec(e.to_string()))
    }
}

/// Effective tolerances of a job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tols {
    pub residual: f64,
    pub stability: f64,
    pub meet: f64,
    pub bound: f64,
}

impl Tols {
    pub fn resolve(t: &Tolerances, residual_override: Option<f64>) -> Result<Self, CliError> {
        let tols = Tols {
            residual: residual_override.or(t.residual).unwrap_or(1e-8),
            stability: t.stability.unwrap_or(1e-8),
            meet: t.meet.unwrap_or(1e-8),
            bound: t.bound.unwrap_or(1e-6),
        };
        for v in [tols.residual, tols.stability, tols.meet, tols.bound] {
            if !(v.is_finite() && v > 0.0) {
                return Err(CliError::Spec(format!("tolerance {v} must be positive and finite")));
            }
        }
        Ok(tols)
    }
}

/// A job with every name resolved.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub inclusion: UnitalInclusion,
    pub trace: TraceFunctional,
    /// How the trace was chosen, with its weights as rationals where possible.
    pub trace_label: String,
    pub group: Option<(FiniteGroupTable, Vec<usize>)>,
    pub intermediates: Vec<(String, ConcreteAlgebra)>,
    pub expected_index: Option<f64>,
    pub tensor_m: Option<usize>,
}

fn matrix(spec: &MatrixSpec, size: usize) -> Result<CMat, CliError> {
    if spec.len() != size || spec.iter().any(|r| r.len() != size) {
        return Err(CliError::Spec(format!("generator is not {size}x{size}")));
    }
    if spec.iter().flatten().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::Spec("generator has a non-finite entry".into()));
    }
    Ok(CMat::from_fn(size, size, |i, j| {
        let [re, im] = spec[i][j];
        finindex_core::linalg::Complex64::new(re, im)
    }))
}

fn generated(size: usize, gens: &[MatrixSpec]) -> Result<ConcreteAlgebra, CliError> {
    let mats = gens.iter().map(|g| matrix(g, size)).collect::<Result<Vec<_>, _>>()?;
    let alg = inclusion::subalgebra_from_generators(size, &mats);
    alg.verify()?;
    Ok(alg)
}

fn descriptor(spec: &InstanceSpec) -> Result<Option<InstanceDescriptor>, CliError> {
    Ok(Some(match spec {
        InstanceSpec::Scalar { dims } => InstanceDescriptor::Scalar { dims: dims.clone() },
        InstanceSpec::FactorTensor { k, m } => InstanceDescriptor::FactorTensor { k: *k, m: *m },
        InstanceSpec::Diagonal { n } => InstanceDescriptor::Diagonal { n: *n },
        InstanceSpec::DirectSum { first, second, weight } => {
            let (Some(a), Some(b)) = (descriptor(first)?, descriptor(second)?) else {
                return Err(CliError::Spec("direct sums of inline or group instances are not supported".into()));
            };
            InstanceDescriptor::DirectSum {
                first: Box::new(a),
                second: Box::new(b),
                weight: *weight,
            }
        }
        InstanceSpec::Group { .. } | InstanceSpec::Inline { .. } => return Ok(None),
    }))
}

fn subgroup_elements(g: &FiniteGroupTable, s: &SubgroupSpec) -> Result<Vec<usize>, CliError> {
    let elements = match s {
        SubgroupSpec::Trivial => g.trivial_subgroup(),
        SubgroupSpec::Named(name) => match name.as_str() {
            "trivial" => g.trivial_subgroup(),
            "whole" => g.whole(),
            other => return Err(CliError::Spec(format!("unknown subgroup `{other}`"))),
        },
        SubgroupSpec::Elements(e) => {
            if let Some(x) = e.iter().find(|&&x| x >= g.order()) {
                return Err(CliError::Spec(format!("element {x} is not in {}", g.name())));
            }
            g.closure(e)
        }
    };
    Ok(g.subgroup(&elements)?)
}

fn parse_weight(w: &WeightSpec) -> Result<(f64, String), CliError> {
    match w {
        WeightSpec::Exact(s) => {
            let r = Ratio::<u64>::from_str(s.trim()).map_err(|_| CliError::Spec(format!("bad rational `{s}`")))?;
            Ok((*r.numer() as f64 / *r.denom() as f64, r.to_string()))
        }
        WeightSpec::Float(x) => Ok((*x, x.to_string())),
    }
}

/// Block-weight trace on `A` with weights ordered like the Wedderburn blocks of `A`.
fn trace_from_weights(sup: &ConcreteAlgebra, weights: &[f64]) -> Result<TraceFunctional, CliError> {
    let bs = block_structure(sup)?;
    if weights.len() != bs.dims.len() {
        return Err(CliError::Spec(format!(
            "{} trace weights for {} blocks of A",
            weights.len(),
            bs.dims.len()
        )));
    }
    Ok(TraceFunctional::from_central_weights(
        &bs.central,
        bs.dims.dims(),
        &bs.multiplicities,
        weights,
    )?)
}

fn rational_label(weights: &[f64]) -> String {
    let parts: Vec<String> = weights
        .iter()
        .map(|&w| match finindex_core::markov::rationalize(w, 1e-9) {
            Some(r) => r.to_string(),
            None => format!("{w}"),
        })
        .collect();
    format!("[{}]", parts.join(", "))
}

pub fn resolve(job: &JobSpec) -> Result<Resolved, CliError> {
    let (inclusion, default_trace, mut intermediates, group, expected_index) = match &job.instance {
        InstanceSpec::Group { group, subgroup } => {
            let g = instances::group_by_name(group)?;
            let h = subgroup_elements(&g, subgroup)?;
            let d = InstanceDescriptor::GroupPair {
                group: group.clone(),
                subgroup: h.clone(),
            };
            let inst = d.build()?;
            (inst.inclusion, inst.trace, inst.intermediates, Some((g, h)), inst.expected.index)
        }
        InstanceSpec::Inline { size, sub, sup } => {
            if *size == 0 || *size > INLINE_SIZE_CAP {
                return Err(CliError::Spec(format!("inline size must be in 1..={INLINE_SIZE_CAP}")));
            }
            let sub_alg = generated(*size, sub)?;
            let sup_alg = generated(*size, sup)?;
            let inc = UnitalInclusion::new(sub_alg, sup_alg.clone(), "inline")?;
            let tau = TraceFunctional::normalized(*size);
            (inc, tau, vec![("A".to_string(), sup_alg)], None, None)
        }
        other => {
            let d = descriptor(other)?.expect("named instance");
            if let InstanceDescriptor::Scalar { dims } = &d {
                if dims.is_empty() || dims.contains(&0) {
                    return Err(CliError::Spec("dimension vector entries must be positive".into()));
                }
            }
            let inst = d.build()?;
            (inst.inclusion, inst.trace, inst.intermediates, None, inst.expected.index)
        }
    };
    if inclusion.sup().dim() > GNS_CAP {
        return Err(CliError::Spec(format!(
            "dim A = {} exceeds the cap {GNS_CAP}",
            inclusion.sup().dim()
        )));
    }

    let (trace, trace_label) = match &job.trace {
        TraceSpec::Default => {
            let w = default_trace.weights().to_vec();
            (default_trace, format!("default {}", rational_label(&w)))
        }
        TraceSpec::Named(name) if name == "default" => {
            let w = default_trace.weights().to_vec();
            (default_trace, format!("default {}", rational_label(&w)))
        }
        TraceSpec::Named(name) if name == "markov" => {
            let lambda = inclusion::inclusion_matrix(&inclusion)?;
            let m = finindex_core::markov::markov_trace(&lambda)
                .map_err(|e| CliError::Spec(format!("no Markov trace on this inclusion: {e}")))?;
            let tau = trace_from_weights(inclusion.sup(), &m.t_sup)?;
            (tau, format!("markov {}", rational_label(&m.t_sup)))
        }
        TraceSpec::Named(other) => return Err(CliError::Spec(format!("unknown trace `{other}`"))),
        TraceSpec::Weights { weights } => {
            let parsed = weights.iter().map(parse_weight).collect::<Result<Vec<_>, _>>()?;
            let values: Vec<f64> = parsed.iter().map(|p| p.0).collect();
            let tau = trace_from_weights(inclusion.sup(), &values)?;
            let labels: Vec<String> = parsed.into_iter().map(|p| p.1).collect();
            (tau, format!("weights [{}]", labels.join(", ")))
        }
    };

    if let Some(list) = &job.intermediates {
        let size = inclusion.size();
        let mut names = BTreeSet::new();
        intermediates = Vec::new();
        for item in list {
            let (name, alg) = match item {
                IntermediateSpec::Generators { name, generators } => {
                    let mut gens = generators
                        .iter()
                        .map(|g| matrix(g, size))
                        .collect::<Result<Vec<_>, _>>()?;
                    gens.extend(inclusion.sub().basis());
                    (name, inclusion::subalgebra_from_generators(size, &gens))
                }
                IntermediateSpec::Subgroup { name, subgroup } => {
                    let Some((g, h)) = &group else {
                        return Err(CliError::Spec(format!(
                            "intermediate `{name}` names a subgroup but the instance is not a group pair"
                        )));
                    };
                    let mut elements = subgroup.clone();
                    elements.extend_from_slice(h);
                    if let Some(x) = elements.iter().find(|&&x| x >= g.order()) {
                        return Err(CliError::Spec(format!("element {x} is not in {}", g.name())));
                    }
                    (name, g.group_algebra(&g.closure(&elements)))
                }
            };
            if !names.insert(name.clone()) {
                return Err(CliError::Spec(format!("duplicate intermediate `{name}`")));
            }
            alg.verify()?;
            inclusion.check_intermediate(&alg)?;
            intermediates.push((name.clone(), alg));
        }
    }

    Ok(Resolved {
        inclusion,
        trace,
        trace_label,
        group,
        intermediates,
        expected_index,
        tensor_m: job.tensor_m,
    })
}
