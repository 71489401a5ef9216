//! Executes a resolved job and assembles the report bundle.

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use finindex_core::angle::{self, AngleReport};
use finindex_core::basic_construction::{self, BasicConstructionData, GNS_CAP};
use finindex_core::expectation;
use finindex_core::inclusion::{self, block_structure, ConcreteAlgebra};
use finindex_core::markov;
use finindex_core::tensor;
use finindex_core::Error;
use serde::Serialize;

use crate::spec::{Analysis, Resolved, Tols};
use crate::CliError;

pub const REPORT_VERSION: u32 = 1;
const CS_SAMPLES: usize = 200;

/// A measured residual against its tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check {
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub check: String,
    pub value: f64,
    pub tol: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub spec_sha256: String,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timings: Option<BTreeMap<String, f64>>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSection {
    pub label: String,
    pub size: usize,
    pub sub_dim: usize,
    pub sup_dim: usize,
    pub sub_blocks: Vec<usize>,
    pub sup_blocks: Vec<usize>,
    pub trace: String,
    pub trace_weights: Vec<f64>,
    pub intermediates: Vec<Named>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Named {
    pub name: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BasicSection {
    pub gns_dim: usize,
    pub a1_dim: Option<usize>,
    pub unit: Check,
    pub markov: Check,
    pub pushdown: Check,
    pub jones_commutation: Check,
    pub span_distance: Option<Check>,
    pub commutant_distance: Option<Check>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualSection {
    pub extension: Check,
    pub agreement: Check,
    pub e1_of_e: Check,
    pub dual_index: Option<f64>,
    pub dual_index_agreement: Option<Check>,
    pub dual_reconstruction: Option<Check>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct IndexSection {
    pub scalar: Option<f64>,
    pub block_values: Vec<f64>,
    pub norm: f64,
    pub min_eigenvalue: Check,
    pub quasi_basis_size: usize,
    pub reconstruction_left: Check,
    pub reconstruction_right: Check,
    pub centrality: Check,
    pub pivot_independence: Check,
    pub expected: Option<f64>,
    pub expected_agreement: Option<Check>,
    pub pp_constant: f64,
    pub probabilistic_index: f64,
    pub basic_construction: BasicSection,
    pub dual: Option<DualSection>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CommutantSection {
    pub lower_dim: usize,
    pub lower_blocks: Vec<usize>,
    pub higher_dim: Option<usize>,
    pub higher_blocks: Option<Vec<usize>>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MarkovSection {
    pub inclusion_matrix: Vec<Vec<usize>>,
    pub alpha: Option<f64>,
    pub alpha_exact: Option<String>,
    pub t_sup: Option<Vec<f64>>,
    pub t_sup_exact: Option<Vec<String>>,
    pub t_sub: Option<Vec<f64>>,
    pub sup_residual: Option<Check>,
    pub sub_residual: Option<Check>,
    pub norm_residual: Option<Check>,
    pub flagged: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleEntry {
    pub c: String,
    pub d: String,
    pub angle: f64,
    pub cos: f64,
    pub raw_cos: f64,
    pub clamped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigiditySection {
    pub minimal: Vec<String>,
    pub threshold: f64,
    pub pairs: Vec<RigidityEntry>,
    pub hypotheses_met: bool,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RigidityEntry {
    pub c: String,
    pub d: String,
    pub angle: f64,
    pub above_threshold: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AngleSection {
    pub pairs: Vec<AngleEntry>,
    pub cauchy_schwarz: Check,
    pub rigidity: RigiditySection,
}

#[derive(Debug, Clone, Serialize)]
pub struct MeetEntry {
    pub c: String,
    pub d: String,
    pub difference: Check,
    pub meet_rank: usize,
    pub intersection_dim: usize,
    pub alternating_steps: usize,
    pub alternating_monotone: bool,
    pub alternating_converged: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityEntry {
    pub c: String,
    pub d: String,
    pub base: f64,
    pub tensored: f64,
    pub difference: Check,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilitySection {
    pub m: usize,
    pub tensored_index: Option<f64>,
    pub index_formula: Check,
    pub index_agreement: Check,
    pub reconstruction: Check,
    pub pairs: Vec<StabilityEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainEntry {
    pub name: String,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    /// `verified` links fail the run; `diagnostic` links are reported only.
    pub role: &'static str,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct BoundSection {
    pub commutant_blocks: Vec<usize>,
    pub commutant_dim: usize,
    pub min_block: usize,
    pub ratio: String,
    pub ratio_value: f64,
    pub minimal_index: f64,
    pub regime: &'static str,
    pub regime_note: String,
    pub markov_index: Option<f64>,
    pub markov_note: Option<String>,
    pub bound_log10: f64,
    pub ratio_log10: f64,
    pub nine_power: Option<String>,
    pub lambda_e1: f64,
    pub lambda_f: f64,
    pub lambda_tau: f64,
    pub f_trace_residual: f64,
    pub f_scalar: bool,
    pub irreducible: bool,
    pub sub_simple: bool,
    pub chain: Vec<ChainEntry>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SubgroupEntry {
    pub elements: Vec<usize>,
    pub order: usize,
    pub algebra_blocks: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct LatticeSection {
    pub group: String,
    pub count: usize,
    pub subgroups: Vec<SubgroupEntry>,
    pub order: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub passed: bool,
    pub failures: Vec<Failure>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReportBundle {
    pub report_version: u32,
    pub provenance: Provenance,
    pub analyses: Vec<&'static str>,
    pub tolerances: TolSection,
    pub instance: InstanceSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub index: Option<IndexSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub commutant: Option<CommutantSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub markov: Option<MarkovSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub angle: Option<AngleSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meet: Option<Vec<MeetEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stability: Option<StabilitySection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<BoundSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lattice: Option<LatticeSection>,
    pub verification: Verification,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct TolSection {
    pub residual: f64,
    pub stability: f64,
    pub meet: f64,
    pub bound: f64,
}

/// Options that are not part of the spec document.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub analyses: Vec<Analysis>,
    pub seed: u64,
    pub tols: Tols,
    pub spec_sha256: String,
    pub timings: bool,
}

/// Rounds to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

struct Ledger {
    failures: Vec<Failure>,
    timings: BTreeMap<String, f64>,
}

impl Ledger {
    fn at_most(&mut self, name: impl Into<String>, value: f64, tol: f64) -> Check {
        let pass = value.is_finite() && value <= tol;
        if !pass {
            self.failures.push(Failure {
                check: name.into(),
                value,
                tol,
            });
        }
        Check { value, tol, pass }
    }

    fn above(&mut self, name: impl Into<String>, value: f64, tol: f64) -> Check {
        let pass = value.is_finite() && value > tol;
        if !pass {
            self.failures.push(Failure {
                check: name.into(),
                value,
                tol,
            });
        }
        Check { value, tol, pass }
    }

    fn time<T>(&mut self, name: &str, f: impl FnOnce(&mut Self) -> Result<T, CliError>) -> Result<T, CliError> {
        let start = Instant::now();
        let out = f(self)?;
        self.timings.insert(name.to_string(), start.elapsed().as_secs_f64());
        Ok(out)
    }
}

fn blocks(alg: &ConcreteAlgebra) -> Result<Vec<usize>, CliError> {
    Ok(block_structure(alg)?.dims.dims().to_vec())
}

fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

fn angle_entry(c: &str, d: &str, r: &AngleReport) -> AngleEntry {
    AngleEntry {
        c: c.to_string(),
        d: d.to_string(),
        angle: sig12(r.angle),
        cos: r.cos_value,
        raw_cos: r.raw_cos,
        clamped: r.cos_value != r.raw_cos,
    }
}

pub fn run(job: &Resolved, opts: &RunOptions) -> Result<ReportBundle, CliError> {
    let analyses: BTreeSet<Analysis> = opts.analyses.iter().copied().collect();
    let tols = opts.tols;
    let inc = &job.inclusion;
    let mut led = Ledger {
        failures: Vec::new(),
        timings: BTreeMap::new(),
    };

    if analyses.contains(&Analysis::Lattice) && job.group.is_none() {
        return Err(CliError::Spec("the lattice analysis needs a group instance".into()));
    }
    let tensor_m = job_tensor_m(job, &analyses)?;

    let instance = InstanceSection {
        label: inc.label().to_string(),
        size: inc.size(),
        sub_dim: inc.sub().dim(),
        sup_dim: inc.sup().dim(),
        sub_blocks: blocks(inc.sub())?,
        sup_blocks: blocks(inc.sup())?,
        trace: job.trace_label.clone(),
        trace_weights: job.trace.weights().to_vec(),
        intermediates: job
            .intermediates
            .iter()
            .map(|(name, a)| Named {
                name: name.clone(),
                dim: a.dim(),
            })
            .collect(),
    };

    let needs_basic = analyses.iter().any(|a| a.needs_basic());
    let bc: Option<BasicConstructionData> = if needs_basic {
        Some(led.time("basic_construction", |_| {
            Ok(basic_construction::basic_construction(inc, &job.trace)?)
        })?)
    } else {
        None
    };

    let index = match (&bc, analyses.contains(&Analysis::Index)) {
        (Some(bc), true) => Some(led.time("index", |led| index_section(job, bc, tols, opts.seed, led))?),
        _ => None,
    };

    let commutant = match (&bc, analyses.contains(&Analysis::Commutant)) {
        (Some(bc), true) => Some(led.time("commutant", |_| commutant_section(bc))?),
        _ => None,
    };

    let markov = if analyses.contains(&Analysis::Markov) {
        Some(led.time("markov", |led| markov_section(job, tols, led))?)
    } else {
        None
    };

    let names: Vec<&str> = job.intermediates.iter().map(|(n, _)| n.as_str()).collect();
    let family: Vec<ConcreteAlgebra> = job.intermediates.iter().map(|(_, a)| a.clone()).collect();

    let angle = match (&bc, analyses.contains(&Analysis::Angle)) {
        (Some(bc), true) => Some(led.time("angle", |led| {
            let mut out = Vec::new();
            for (i, j) in pairs(family.len()) {
                let r = angle::angle_in(inc, bc, &family[i], &family[j])?;
                out.push(angle_entry(names[i], names[j], &r));
            }
            let cs = angle::cauchy_schwarz_check(&bc.expectation, CS_SAMPLES, opts.seed)?;
            let cauchy_schwarz = led.at_most("angle.cauchy_schwarz", cs, tols.residual);
            let rig = angle::rigidity_in(inc, bc, &family)?;
            let rigidity = RigiditySection {
                minimal: rig.minimal.iter().map(|&k| names[k].to_string()).collect(),
                threshold: rig.threshold,
                pairs: rig
                    .pairs
                    .iter()
                    .map(|p| RigidityEntry {
                        c: names[p.first].to_string(),
                        d: names[p.second].to_string(),
                        angle: sig12(p.angle),
                        above_threshold: p.above_threshold,
                    })
                    .collect(),
                hypotheses_met: rig.hypotheses_met,
                note: rig.note,
            };
            Ok(AngleSection {
                pairs: out,
                cauchy_schwarz,
                rigidity,
            })
        })?),
        _ => None,
    };

    let meet = match (&bc, analyses.contains(&Analysis::Meet)) {
        (Some(bc), true) => Some(led.time("meet", |led| {
            let mut out = Vec::new();
            for (i, j) in pairs(family.len()) {
                let r = angle::meet_in(inc, bc, &family[i], &family[j])?;
                let name = format!("meet.{}.{}", names[i], names[j]);
                out.push(MeetEntry {
                    c: names[i].to_string(),
                    d: names[j].to_string(),
                    difference: led.at_most(name, r.difference, tols.meet),
                    meet_rank: r.meet_rank,
                    intersection_dim: r.intersection_dim,
                    alternating_steps: r.alternating.len(),
                    alternating_monotone: r.alternating_monotone,
                    alternating_converged: r.alternating_converged,
                });
            }
            Ok(out)
        })?),
        _ => None,
    };

    let stability = match tensor_m {
        Some(m) => Some(led.time("stability", |led| {
            let ti = tensor::tensor_inclusion(inc, &job.trace, m)?;
            let rows = tensor::stability_family(inc, &family, &job.trace, m)?;
            let pairs = rows
                .iter()
                .map(|(i, j, r)| StabilityEntry {
                    c: names[*i].to_string(),
                    d: names[*j].to_string(),
                    base: sig12(r.base.angle),
                    tensored: sig12(r.tensored.angle),
                    difference: led.at_most(
                        format!("stability.{}.{}", names[*i], names[*j]),
                        r.difference,
                        tols.stability,
                    ),
                })
                .collect();
            Ok(StabilitySection {
                m,
                tensored_index: ti.tensored_index.scalar,
                index_formula: led.at_most("stability.index_formula", ti.formula_residual, tols.residual),
                index_agreement: led.at_most("stability.index_agreement", ti.index_residual, tols.residual),
                reconstruction: led.at_most("stability.reconstruction", ti.reconstruction_residual, tols.residual),
                pairs,
            })
        })?),
        None => None,
    };

    let bound = match (&bc, analyses.contains(&Analysis::Bound)) {
        (Some(bc), true) => Some(led.time("bound", |led| bound_section(inc, bc, tols, led))?),
        _ => None,
    };

    let lattice = match (&job.group, analyses.contains(&Analysis::Lattice)) {
        (Some((g, h)), true) => Some(led.time("lattice", |_| {
            let lat = finindex_core::instances::intermediate_subgroup_lattice(g, h)?;
            let subgroups = lat
                .subgroups
                .iter()
                .map(|k| {
                    Ok(SubgroupEntry {
                        elements: k.clone(),
                        order: k.len(),
                        algebra_blocks: blocks(&g.group_algebra(k))?,
                    })
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok(LatticeSection {
                group: g.name().to_string(),
                count: lat.len(),
                subgroups,
                order: lat.order.clone(),
            })
        })?),
        _ => None,
    };

    let passed = led.failures.is_empty();
    Ok(ReportBundle {
        report_version: REPORT_VERSION,
        provenance: Provenance {
            tool: env!("CARGO_PKG_NAME"),
            version: env!("CARGO_PKG_VERSION"),
            spec_sha256: opts.spec_sha256.clone(),
            seed: opts.seed,
            timings: opts.timings.then(|| led.timings.clone()),
        },
        analyses: Analysis::ALL
            .into_iter()
            .filter(|a| analyses.contains(a))
            .map(Analysis::name)
            .collect(),
        tolerances: TolSection {
            residual: tols.residual,
            stability: tols.stability,
            meet: tols.meet,
            bound: tols.bound,
        },
        instance,
        index,
        commutant,
        markov,
        angle,
        meet,
        stability,
        bound,
        lattice,
        verification: Verification {
            passed,
            failures: led.failures,
        },
    })
}

fn job_tensor_m(job: &Resolved, analyses: &BTreeSet<Analysis>) -> Result<Option<usize>, CliError> {
    if !analyses.contains(&Analysis::Stability) {
        return Ok(None);
    }
    let m = job.tensor_m.unwrap_or(2);
    if m < 2 {
        return Err(CliError::Spec(format!("tensor_m = {m} must be at least 2")));
    }
    let d = job.inclusion.sup().dim() * m * m;
    if d > GNS_CAP {
        return Err(CliError::Spec(format!("dim(A ⊗ M{m}) = {d} exceeds the cap {GNS_CAP}")));
    }
    Ok(Some(m))
}

fn index_section(
    job: &Resolved,
    bc: &BasicConstructionData,
    tols: Tols,
    seed: u64,
    led: &mut Ledger,
) -> Result<IndexSection, CliError> {
    let idx = &bc.index;
    let e = &bc.expectation;
    let qb = &bc.quasi_basis;
    let pivoted = expectation::quasi_basis_pivoted(e, Some(seed))?;
    let other = expectation::index_from_quasi_basis(e, &pivoted)?;
    let independence = finindex_core::linalg::spectral_norm(&(&other.element - &idx.element));
    let scale = idx.norm.max(1.0);
    let expected_agreement = job.expected_index.map(|v| {
        let got = idx.scalar.unwrap_or(f64::NAN);
        led.at_most("index.expected", (got - v).abs() / v.max(1.0), tols.residual)
    });
    let pp = expectation::pp_constant(e)?;

    let ch = bc.checks;
    let basic = BasicSection {
        gns_dim: bc.gns.dim(),
        a1_dim: bc.a1.as_ref().map(ConcreteAlgebra::dim),
        unit: led.at_most("basic.unit", ch.unit_residual, tols.residual),
        markov: led.at_most("basic.markov", ch.markov_residual, tols.residual),
        pushdown: led.at_most("basic.pushdown", ch.pushdown_residual, tols.residual),
        jones_commutation: led.at_most("basic.jones_commutation", ch.jones_commutation, tols.residual),
        span_distance: ch.span_distance.map(|v| led.at_most("basic.span_distance", v, tols.residual)),
        commutant_distance: ch
            .commutant_distance
            .map(|v| led.at_most("basic.commutant_distance", v, tols.residual)),
    };

    let dual = if bc.a1.is_some() {
        let d = basic_construction::dual_expectation(bc)?;
        let (dual_index, dual_index_agreement, dual_reconstruction, note) = match basic_construction::dual_index_check(bc) {
            Ok(di) => {
                let orig = di.original.scalar.unwrap_or(f64::NAN);
                let got = di.dual.scalar.unwrap_or(f64::NAN);
                (
                    di.dual.scalar,
                    Some(led.at_most("dual.index", (got - orig).abs(), 10.0 * tols.residual)),
                    Some(led.at_most("dual.reconstruction", di.reconstruction, tols.residual)),
                    None,
                )
            }
            Err(Error::IndexNotScalar(spread)) => (
                None,
                None,
                None,
                Some(format!("index is not scalar (spread {spread:e}); dual index comparison skipped")),
            ),
            Err(e) => return Err(e.into()),
        };
        Some(DualSection {
            extension: led.at_most("dual.extension", d.extension_residual, tols.residual),
            agreement: led.at_most("dual.agreement", d.agreement, tols.residual),
            e1_of_e: led.at_most("dual.e1_of_e", d.e1_of_e, tols.residual),
            dual_index,
            dual_index_agreement,
            dual_reconstruction,
            note,
        })
    } else {
        None
    };

    Ok(IndexSection {
        scalar: idx.scalar,
        block_values: idx.block_values.clone(),
        norm: idx.norm,
        min_eigenvalue: led.above("index.min_eigenvalue", idx.min_eigenvalue, tols.residual),
        quasi_basis_size: qb.elements.len(),
        reconstruction_left: led.at_most("index.reconstruction_left", qb.left_residual, tols.residual),
        reconstruction_right: led.at_most("index.reconstruction_right", qb.right_residual, tols.residual),
        centrality: led.at_most("index.centrality", idx.centrality_residual, tols.residual * scale),
        pivot_independence: led.at_most("index.pivot_independence", independence, tols.residual * scale),
        expected: job.expected_index,
        expected_agreement,
        pp_constant: pp.value,
        probabilistic_index: pp.probabilistic_index(),
        basic_construction: basic,
        dual,
    })
}

fn commutant_section(bc: &BasicConstructionData) -> Result<CommutantSection, CliError> {
    let lower = basic_construction::lower_commutant(bc);
    let lower_blocks = blocks(&lower)?;
    let (higher_dim, higher_blocks, note) = match basic_construction::higher_commutant(bc) {
        Ok((alg, bs)) => (Some(alg.dim()), Some(bs.dims.dims().to_vec()), None),
        Err(Error::SizeCap(msg)) => (None, None, Some(msg)),
        Err(e) => return Err(e.into()),
    };
    Ok(CommutantSection {
        lower_dim: lower.dim(),
        lower_blocks,
        higher_dim,
        higher_blocks,
        note,
    })
}

fn markov_section(job: &Resolved, tols: Tols, led: &mut Ledger) -> Result<MarkovSection, CliError> {
    let lambda = inclusion::inclusion_matrix(&job.inclusion)?;
    let mut out = MarkovSection {
        inclusion_matrix: lambda.lambda.clone(),
        alpha: None,
        alpha_exact: None,
        t_sup: None,
        t_sup_exact: None,
        t_sub: None,
        sup_residual: None,
        sub_residual: None,
        norm_residual: None,
        flagged: None,
    };
    match markov::markov_trace(&lambda) {
        Ok(m) => {
            let tol = tols.residual * m.alpha.max(1.0);
            out.alpha = Some(m.alpha);
            out.alpha_exact = m.alpha_rational.map(|r| r.to_string());
            out.t_sup_exact = m.t_sup_rational.map(|v| v.iter().map(|r| r.to_string()).collect());
            out.t_sup = Some(m.t_sup);
            out.t_sub = Some(m.t_sub);
            out.sup_residual = Some(led.at_most("markov.sup_residual", m.sup_residual, tol));
            out.sub_residual = Some(led.at_most("markov.sub_residual", m.sub_residual, tol));
            out.norm_residual = Some(led.at_most("markov.norm_residual", m.norm_residual, tol));
        }
        Err(Error::DegeneratePerron(msg)) => out.flagged = Some(msg),
        Err(e) => return Err(e.into()),
    }
    Ok(out)
}

fn bound_section(
    inc: &inclusion::UnitalInclusion,
    bc: &BasicConstructionData,
    tols: Tols,
    led: &mut Ledger,
) -> Result<BoundSection, CliError> {
    let r = markov::bound_pipeline_from(inc, bc)?;
    let comparison_applies = r.link("trace_comparison").is_some_and(|l| l.skipped.is_none());
    let chain = r
        .chain
        .iter()
        .map(|l| {
            let verified = match l.name {
                "restriction" => true,
                "trace_comparison" | "combined" => comparison_applies,
                "ratio_vs_minimal_index" => r.sub_simple,
                _ => false,
            };
            if verified {
                let tol = if l.name == "ratio_vs_minimal_index" { tols.bound } else { tols.residual };
                led.at_most(format!("bound.{}", l.name), l.lhs - l.rhs, tol);
            }
            ChainEntry {
                name: l.name.to_string(),
                lhs: l.lhs,
                rhs: l.rhs,
                holds: l.holds,
                role: if verified { "verified" } else { "diagnostic" },
                skipped: l.skipped.clone(),
            }
        })
        .collect();
    Ok(BoundSection {
        commutant_blocks: r.commutant_dims.dims().to_vec(),
        commutant_dim: r.dim_total,
        min_block: r.min_block,
        ratio: r.ratio.to_string(),
        ratio_value: r.ratio.value(),
        minimal_index: r.minimal_index,
        regime: r.regime.as_str(),
        regime_note: expectation::regime_note(r.regime),
        markov_index: r.markov_index,
        markov_note: r.markov_note.clone(),
        bound_log10: r.bound_log10,
        ratio_log10: r.ratio_log10,
        nine_power: r.nine_power.clone(),
        lambda_e1: r.lambda_e1,
        lambda_f: r.lambda_f,
        lambda_tau: r.lambda_tau,
        f_trace_residual: r.f_trace_residual,
        f_scalar: r.f_scalar,
        irreducible: r.irreducible,
        sub_simple: r.sub_simple,
        chain,
    })
}
