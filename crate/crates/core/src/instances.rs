//! Instance generators: scalar inclusions into multi-matrix algebras, factor
//! tensors, diagonal masas, direct sums and group-subgroup pairs, together
//! with a small library of finite groups and their subgroup lattices.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::inclusion::{self, ConcreteAlgebra, UnitalInclusion};
use crate::linalg::{self, CMat};
use crate::markov;
use crate::multimatrix::{AmbientAlgebra, DimensionVector, TraceFunctional};

/// Largest group order accepted.
pub const GROUP_CAP: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FiniteGroupTable {
    name: String,
    mult: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroupTable {
    /// Validates the group axioms on a multiplication table.
    pub fn from_table(name: impl Into<String>, mult: Vec<Vec<usize>>) -> Result<Self> {
        let n = mult.len();
        if n == 0 || n > GROUP_CAP {
            return Err(Error::InvalidGroup(format!("order {n} outside 1..={GROUP_CAP}")));
        }
        if mult.iter().any(|row| row.len() != n || row.iter().any(|&x| x >= n)) {
            return Err(Error::InvalidGroup("table is not square over 0..n".into()));
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|g| mult[e][g] == g && mult[g][e] == g))
            .ok_or_else(|| Error::InvalidGroup("no identity element".into()))?;
        let mut inverse = vec![0; n];
        for g in 0..n {
            inverse[g] = (0..n)
                .find(|&h| mult[g][h] == identity && mult[h][g] == identity)
                .ok_or_else(|| Error::InvalidGroup(format!("element {g} has no inverse")))?;
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if mult[mult[a][b]][c] != mult[a][mult[b][c]] {
                        return Err(Error::InvalidGroup(format!("associativity fails at ({a}, {b}, {c})")));
                    }
                }
            }
        }
        Ok(FiniteGroupTable {
            name: name.into(),
            mult,
            identity,
            inverse,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn order(&self) -> usize {
        self.mult.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a][b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.mult
    }

    /// Smallest subgroup containing `gens`, as sorted element indices.
    pub fn closure(&self, gens: &[usize]) -> Vec<usize> {
        let mut set = BTreeSet::new();
        set.insert(self.identity);
        let mut frontier: Vec<usize> = vec![self.identity];
        while let Some(x) = frontier.pop() {
            for &g in gens {
                let y = self.mul(x, g);
                if set.insert(y) {
                    frontier.push(y);
                }
            }
        }
        set.into_iter().collect()
    }

    /// Checks that `elements` is a subgroup; returns it sorted.
    pub fn subgroup(&self, elements: &[usize]) -> Result<Vec<usize>> {
        let set: BTreeSet<usize> = elements.iter().copied().collect();
        if let Some(&bad) = set.iter().find(|&&x| x >= self.order()) {
            return Err(Error::NotASubgroup(format!("element {bad} is out of range")));
        }
        if !set.contains(&self.identity) {
            return Err(Error::NotASubgroup("identity missing".into()));
        }
        for &a in &set {
            if !set.contains(&self.inv(a)) {
                return Err(Error::NotASubgroup(format!("inverse of {a} missing")));
            }
            for &b in &set {
                if !set.contains(&self.mul(a, b)) {
                    return Err(Error::NotASubgroup(format!("product of {a} and {b} missing")));
                }
            }
        }
        Ok(set.into_iter().collect())
    }

    pub fn trivial_subgroup(&self) -> Vec<usize> {
        vec![self.identity]
    }

    pub fn whole(&self) -> Vec<usize> {
        (0..self.order()).collect()
    }

    /// Every subgroup, ordered by size and then lexicographically.
    pub fn all_subgroups(&self) -> Vec<Vec<usize>> {
        let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
        let start = self.trivial_subgroup();
        found.insert(start.clone());
        let mut queue = vec![start];
        while let Some(h) = queue.pop() {
            for g in 0..self.order() {
                if h.binary_search(&g).is_ok() {
                    continue;
                }
                let mut gens = h.clone();
                gens.push(g);
                let k = self.closure(&gens);
                if found.insert(k.clone()) {
                    queue.push(k);
                }
            }
        }
        let mut out: Vec<Vec<usize>> = found.into_iter().collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }

    /// Left-regular permutation matrix `u_g : δ_h ↦ δ_{gh}`.
    pub fn regular(&self, g: usize) -> CMat {
        let n = self.order();
        let mut u = CMat::zeros(n, n);
        for h in 0..n {
            u[(self.mul(g, h), h)] = linalg::c(1.0);
        }
        u
    }

    /// `ℂ[K] = span{u_k : k ∈ K}`.
    pub fn group_algebra(&self, k: &[usize]) -> ConcreteAlgebra {
        let gens: Vec<CMat> = k.iter().map(|&g| self.regular(g)).collect();
        ConcreteAlgebra::span_unchecked(self.order(), &gens)
    }
}

pub fn cyclic(n: usize) -> Result<FiniteGroupTable> {
    if n == 0 || n > 12 {
        return Err(Error::InvalidGroup(format!("Z{n}: order must be in 1..=12")));
    }
    let mult = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
    FiniteGroupTable::from_table(format!("Z{n}"), mult)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for pos in 0..n {
            let mut q = p.clone();
            q.insert(pos, n - 1);
            out.push(q);
        }
    }
    out.sort();
    out
}

/// Symmetric group on `{0, …, n−1}` with `(pq)(i) = p(q(i))`; elements are
/// the permutations in lexicographic order, so index 0 is the identity.
pub fn symmetric(n: usize) -> Result<FiniteGroupTable> {
    if !(1..=4).contains(&n) {
        return Err(Error::InvalidGroup(format!("S{n}: only n ≤ 4 is supported")));
    }
    let perms = permutations(n);
    let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed under composition");
    let mult = perms
        .iter()
        .map(|p| {
            perms
                .iter()
                .map(|q| index(&(0..n).map(|i| p[q[i]]).collect()))
                .collect()
        })
        .collect();
    FiniteGroupTable::from_table(format!("S{n}"), mult)
}

/// Index of a permutation (given as images of `0..n`) in [`symmetric`].
pub fn permutation_index(perm: &[usize]) -> Option<usize> {
    permutations(perm.len()).iter().position(|q| q == perm)
}

/// Dihedral group of order 8; element `2a + b` is `r^a s^b`.
pub fn dihedral4() -> Result<FiniteGroupTable> {
    let mult = (0..8)
        .map(|x| {
            (0..8)
                .map(|y| {
                    let (a, b) = (x / 2, x % 2);
                    let (c, d) = (y / 2, y % 2);
                    let rot = if b == 0 { (a + c) % 4 } else { (a + 4 - c) % 4 };
                    2 * rot + (b + d) % 2
                })
                .collect()
        })
        .collect();
    FiniteGroupTable::from_table("D4", mult)
}

/// Quaternion group; element `2u + s` is `(−1)^s · q_u` with `q = (1, i, j, k)`.
pub fn quaternion() -> Result<FiniteGroupTable> {
    // q_u q_v = sign · q_w
    const TABLE: [[(usize, usize); 4]; 4] = [
        [(0, 0), (1, 0), (2, 0), (3, 0)],
        [(1, 0), (0, 1), (3, 0), (2, 1)],
        [(2, 0), (3, 1), (0, 1), (1, 0)],
        [(3, 0), (2, 0), (1, 1), (0, 1)],
    ];
    let mult = (0..8)
        .map(|x| {
            (0..8)
                .map(|y| {
                    let (u, s) = (x / 2, x % 2);
                    let (v, t) = (y / 2, y % 2);
                    let (w, sign) = TABLE[u][v];
                    2 * w + (s + t + sign) % 2
                })
                .collect()
        })
        .collect();
    FiniteGroupTable::from_table("Q8", mult)
}

pub fn klein() -> Result<FiniteGroupTable> {
    let mult = (0..4).map(|a| (0..4).map(|b| a ^ b).collect()).collect();
    FiniteGroupTable::from_table("Z2xZ2", mult)
}

/// Built-in groups by name: `Z1`…`Z12`, `S3`, `S4`, `D4`, `Q8`, `Z2xZ2`.
pub fn group_by_name(name: &str) -> Result<FiniteGroupTable> {
    match name {
        "S1" | "S2" | "S3" | "S4" => symmetric(name[1..].parse().expect("digit")),
        "D4" => dihedral4(),
        "Q8" => quaternion(),
        "Z2xZ2" | "V4" => klein(),
        _ => match name.strip_prefix('Z').and_then(|s| s.parse::<usize>().ok()) {
            Some(n) => cyclic(n),
            None => Err(Error::InvalidGroup(format!("unknown group {name}"))),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubgroupLattice {
    /// Subgroups `K` with `H ⊆ K ⊆ G`, ordered by size.
    pub subgroups: Vec<Vec<usize>>,
    /// Pairs `(i, j)` with `subgroups[i] ⊊ subgroups[j]`.
    pub order: Vec<(usize, usize)>,
}

impl SubgroupLattice {
    pub fn len(&self) -> usize {
        self.subgroups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subgroups.is_empty()
    }

    pub fn position(&self, k: &[usize]) -> Option<usize> {
        self.subgroups.iter().position(|s| s == k)
    }
}

fn is_subset(a: &[usize], b: &[usize]) -> bool {
    a.iter().all(|x| b.binary_search(x).is_ok())
}

pub fn intermediate_subgroup_lattice(g: &FiniteGroupTable, h: &[usize]) -> Result<SubgroupLattice> {
    let h = g.subgroup(h)?;
    let subgroups: Vec<Vec<usize>> = g.all_subgroups().into_iter().filter(|k| is_subset(&h, k)).collect();
    let mut order = Vec::new();
    for i in 0..subgroups.len() {
        for j in 0..subgroups.len() {
            if i != j && subgroups[i].len() < subgroups[j].len() && is_subset(&subgroups[i], &subgroups[j]) {
                order.push((i, j));
            }
        }
    }
    Ok(SubgroupLattice { subgroups, order })
}

pub fn intersect_subgroups(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| b.binary_search(x).is_ok()).collect()
}

pub fn join_subgroups(g: &FiniteGroupTable, a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut gens = a.to_vec();
    gens.extend_from_slice(b);
    g.closure(&gens)
}

/// `ℂ[H] ⊂ ℂ[G]` in the left-regular representation with `τ(u_g) = δ_{g,e}`.
pub fn group_algebra_inclusion(g: &FiniteGroupTable, h: &[usize]) -> Result<(UnitalInclusion, TraceFunctional)> {
    let h = g.subgroup(h)?;
    let inc = UnitalInclusion::new(
        g.group_algebra(&h),
        g.group_algebra(&g.whole()),
        format!("C[{}] in C[{}]", subgroup_label(g, &h), g.name()),
    )?;
    Ok((inc, TraceFunctional::normalized(g.order())))
}

fn subgroup_label(g: &FiniteGroupTable, h: &[usize]) -> String {
    if h.len() == 1 {
        "e".to_string()
    } else if h.len() == g.order() {
        g.name().to_string()
    } else {
        format!("{h:?}")
    }
}

/// `ℂ ⊂ ⊕ M_{n_j}` with the Markov trace `t_j = n_j / Σ n_i²`.
pub fn scalar_inclusion(n: &DimensionVector) -> Result<(UnitalInclusion, TraceFunctional)> {
    let amb = AmbientAlgebra::new(n.clone());
    let (t, _) = markov::scalar_markov_closed_form(n);
    let weights: Vec<f64> = t.iter().map(|r| r.value()).collect();
    let tau = TraceFunctional::from_block_weights(&amb, &weights)?;
    let inc = UnitalInclusion::new(
        ConcreteAlgebra::scalars(amb.size()),
        ConcreteAlgebra::from_ambient(&amb),
        format!("C in {}", multi_matrix_label(n.dims())),
    )?;
    Ok((inc, tau))
}

fn multi_matrix_label(dims: &[usize]) -> String {
    dims.iter()
        .map(|d| if *d == 1 { "C".to_string() } else { format!("M{d}") })
        .collect::<Vec<_>>()
        .join("+")
}

/// Matrix units of `M_k ⊗ 1_m` or `1_k ⊗ M_m` inside `M_{km}`.
fn tensor_leg(k: usize, m: usize, left: bool) -> ConcreteAlgebra {
    let n = if left { k } else { m };
    let mut gens = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let mut u = CMat::zeros(n, n);
            u[(i, j)] = linalg::c(1.0);
            gens.push(if left {
                linalg::kron(&u, &linalg::identity(m))
            } else {
                linalg::kron(&linalg::identity(k), &u)
            });
        }
    }
    ConcreteAlgebra::span_unchecked(k * m, &gens)
}

/// `M_k ⊗ 1 ⊂ M_k ⊗ M_m` with the normalized trace.
pub fn factor_tensor_inclusion(k: usize, m: usize) -> Result<(UnitalInclusion, TraceFunctional)> {
    if k == 0 || m == 0 || k * m > 8 {
        return Err(Error::SizeCap(format!("factor tensor ({k}, {m}) needs 1 ≤ km ≤ 8")));
    }
    let inc = UnitalInclusion::new(
        tensor_leg(k, m, true),
        ConcreteAlgebra::full(k * m),
        format!("M{k}x1 in M{}", k * m),
    )?;
    Ok((inc, TraceFunctional::normalized(k * m)))
}

fn diagonal_algebra(n: usize) -> ConcreteAlgebra {
    let amb = AmbientAlgebra::new(DimensionVector::new(vec![1; n]).expect("n ≥ 1"));
    ConcreteAlgebra::from_ambient(&amb)
}

/// Diagonal masa `ℂⁿ ⊂ M_n` with the normalized trace.
pub fn diagonal_inclusion(n: usize) -> Result<(UnitalInclusion, TraceFunctional)> {
    if n == 0 {
        return Err(Error::InvalidParameter("diagonal inclusion needs n ≥ 1".into()));
    }
    let inc = UnitalInclusion::new(diagonal_algebra(n), ConcreteAlgebra::full(n), format!("D{n} in M{n}"))?;
    Ok((inc, TraceFunctional::normalized(n)))
}

fn pad(x: &CMat, before: usize, total: usize) -> CMat {
    let mut out = CMat::zeros(total, total);
    out.view_mut((before, before), (x.nrows(), x.ncols())).copy_from(x);
    out
}

fn block_sum(x: &ConcreteAlgebra, y: &ConcreteAlgebra) -> ConcreteAlgebra {
    let total = x.size() + y.size();
    let mut gens: Vec<CMat> = x.basis().iter().map(|b| pad(b, 0, total)).collect();
    gens.extend(y.basis().iter().map(|b| pad(b, x.size(), total)));
    ConcreteAlgebra::span_unchecked(total, &gens)
}

/// `B₁ ⊕ B₂ ⊂ A₁ ⊕ A₂` with trace `s·τ₁ ⊕ (1 − s)·τ₂`.
pub fn direct_sum(
    first: &(UnitalInclusion, TraceFunctional),
    second: &(UnitalInclusion, TraceFunctional),
    s: f64,
) -> Result<(UnitalInclusion, TraceFunctional)> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidParameter(format!("direct sum weight {s} must lie in (0, 1)")));
    }
    let (i1, t1) = first;
    let (i2, t2) = second;
    let mut sizes = t1.block_sizes().to_vec();
    sizes.extend_from_slice(t2.block_sizes());
    let mut weights: Vec<f64> = t1.weights().iter().map(|w| w * s).collect();
    weights.extend(t2.weights().iter().map(|w| w * (1.0 - s)));
    let amb = AmbientAlgebra::new(DimensionVector::new(sizes)?);
    let tau = TraceFunctional::from_block_weights(&amb, &weights)?;
    let inc = UnitalInclusion::new(
        block_sum(i1.sub(), i2.sub()),
        block_sum(i1.sup(), i2.sup()),
        format!("({}) + ({})", i1.label(), i2.label()),
    )?;
    Ok((inc, tau))
}

/// Parameters of a generated instance.
#[derive(Debug, Clone, PartialEq)]
pub enum InstanceDescriptor {
    Scalar { dims: Vec<usize> },
    FactorTensor { k: usize, m: usize },
    Diagonal { n: usize },
    DirectSum { first: alloc::boxed::Box<InstanceDescriptor>, second: alloc::boxed::Box<InstanceDescriptor>, weight: f64 },
    GroupPair { group: String, subgroup: Vec<usize> },
}

/// Closed-form values available for cross-checks.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExpectedInvariants {
    pub index: Option<f64>,
    pub minimal_index: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub label: String,
    pub descriptor: InstanceDescriptor,
    pub inclusion: UnitalInclusion,
    pub trace: TraceFunctional,
    pub expected: ExpectedInvariants,
    /// Named intermediate subalgebras (including `A`, excluding `B`).
    pub intermediates: Vec<(String, ConcreteAlgebra)>,
}

impl InstanceDescriptor {
    pub fn build(&self) -> Result<Instance> {
        let (inclusion, trace) = self.realize()?;
        let intermediates = self.intermediates(&inclusion)?;
        Ok(Instance {
            label: inclusion.label().to_string(),
            descriptor: self.clone(),
            inclusion,
            trace,
            expected: self.expected(),
            intermediates,
        })
    }

    fn realize(&self) -> Result<(UnitalInclusion, TraceFunctional)> {
        match self {
            InstanceDescriptor::Scalar { dims } => scalar_inclusion(&DimensionVector::new(dims.clone())?),
            InstanceDescriptor::FactorTensor { k, m } => factor_tensor_inclusion(*k, *m),
            InstanceDescriptor::Diagonal { n } => diagonal_inclusion(*n),
            InstanceDescriptor::DirectSum { first, second, weight } => {
                direct_sum(&first.realize()?, &second.realize()?, *weight)
            }
            InstanceDescriptor::GroupPair { group, subgroup } => {
                group_algebra_inclusion(&group_by_name(group)?, subgroup)
            }
        }
    }

    fn expected(&self) -> ExpectedInvariants {
        match self {
            InstanceDescriptor::Scalar { dims } => {
                let total: usize = dims.iter().sum();
                let sq: usize = dims.iter().map(|d| d * d).sum();
                ExpectedInvariants {
                    index: Some(sq as f64),
                    minimal_index: Some((total * total) as f64),
                }
            }
            InstanceDescriptor::FactorTensor { m, .. } => ExpectedInvariants {
                index: Some((m * m) as f64),
                minimal_index: Some((m * m) as f64),
            },
            InstanceDescriptor::GroupPair { group, subgroup } => ExpectedInvariants {
                index: group_by_name(group).ok().map(|g| g.order() as f64 / subgroup.len() as f64),
                minimal_index: None,
            },
            _ => ExpectedInvariants::default(),
        }
    }

    fn intermediates(&self, inc: &UnitalInclusion) -> Result<Vec<(String, ConcreteAlgebra)>> {
        let mut out: Vec<(String, ConcreteAlgebra)> = Vec::new();
        match self {
            InstanceDescriptor::Scalar { dims } => {
                let amb = AmbientAlgebra::new(DimensionVector::new(dims.clone())?);
                if dims.len() > 1 {
                    let central: Vec<CMat> = (0..dims.len()).map(|j| amb.block_projection(j)).collect();
                    out.push(("center".into(), ConcreteAlgebra::span_unchecked(amb.size(), &central)));
                }
                if dims.iter().any(|&d| d > 1) {
                    out.push(("diagonal".into(), diagonal_algebra(amb.size())));
                }
                if let [n] = dims.as_slice() {
                    if let Some(p) = (2..*n).find(|p| n % p == 0) {
                        let q = n / p;
                        out.push((format!("M{p}x1"), tensor_leg(p, q, true)));
                        out.push((format!("1xM{q}"), tensor_leg(p, q, false)));
                    }
                }
            }
            InstanceDescriptor::FactorTensor { k, m } => {
                if *m > 1 {
                    let mut gens: Vec<CMat> = tensor_leg(*k, *m, true).basis();
                    gens.push(linalg::kron(&linalg::identity(*k), &diag_unit(*m, 0)));
                    out.push(("MkxD".into(), inclusion::subalgebra_from_generators(k * m, &gens)));
                }
            }
            InstanceDescriptor::Diagonal { n } => {
                if *n > 2 {
                    let mut gens = diagonal_algebra(*n).basis();
                    let mut u = CMat::zeros(*n, *n);
                    u[(0, 1)] = linalg::c(1.0);
                    gens.push(u);
                    out.push(("M2+D".into(), inclusion::subalgebra_from_generators(*n, &gens)));
                }
            }
            InstanceDescriptor::DirectSum { .. } => {}
            InstanceDescriptor::GroupPair { group, subgroup } => {
                let g = group_by_name(group)?;
                let lattice = intermediate_subgroup_lattice(&g, subgroup)?;
                for k in &lattice.subgroups {
                    if k.len() > subgroup.len() && k.len() < g.order() {
                        out.push((subgroup_label(&g, k), g.group_algebra(k)));
                    }
                }
            }
        }
        out.push(("A".into(), inc.sup().clone()));
        Ok(out)
    }
}

fn diag_unit(m: usize, k: usize) -> CMat {
    let mut u = CMat::zeros(m, m);
    u[(k, k)] = linalg::c(1.0);
    u
}

/// Instance suite used by the acceptance checks; every member has
/// `dim A ≤ 24`.
pub fn suite() -> Vec<InstanceDescriptor> {
    use InstanceDescriptor::*;
    let group = |g: &str, h: Vec<usize>| GroupPair {
        group: g.into(),
        subgroup: h,
    };
    vec![
        Scalar { dims: vec![1] },
        Scalar { dims: vec![2] },
        Scalar { dims: vec![1, 1] },
        Scalar { dims: vec![1, 2] },
        Scalar { dims: vec![2, 3] },
        Scalar { dims: vec![4] },
        FactorTensor { k: 2, m: 2 },
        FactorTensor { k: 1, m: 3 },
        Diagonal { n: 3 },
        DirectSum {
            first: alloc::boxed::Box::new(Scalar { dims: vec![2] }),
            second: alloc::boxed::Box::new(FactorTensor { k: 2, m: 1 }),
            weight: 0.5,
        },
        group("S3", vec![0]),
        group("S3", vec![0, 1]),
        group("Z4", vec![0, 2]),
        group("Z2xZ2", vec![0]),
        group("Z6", vec![0]),
        group("D4", vec![0]),
        group("Q8", vec![0]),
    ]
}
