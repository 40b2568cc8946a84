//! The set-level spectrum of the bounded homotopy category of permutation
//! modules, assembled as a stratified poset: one stratum per conjugacy
//! class of p-subgroups, carrying the Krull dimension of the cohomological
//! open of its Weyl group, one closed point per stratum, specialization
//! edges with provenance tags, and exact finite posets for the cyclic,
//! Klein-four and quaternion cases.
//!
//! Cohomological opens are carried symbolically: their Krull dimension is
//! taken to be the p-rank of the Weyl group (an imported fact from the
//! theory of support varieties, consistent with the worked examples here);
//! point inventories are only emitted for the exactly solved groups.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::group::{
    is_subconjugate, p_rank, p_subgroups, p_subgroups_up_to_conj, transporter, weyl_group, Group,
    Subgroup, WeylData,
};
use crate::homotopy::{
    homotopy_classes, map_complex, Complex, ComplexFunctor, HomotopyError,
};
use crate::linalg::FpMatrix;

#[derive(Debug)]
pub enum SpectrumError {
    UnknownName(String),
    ExactUnsupported(String),
    InvalidIndices(String),
    Homotopy(HomotopyError),
}

impl fmt::Display for SpectrumError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpectrumError::UnknownName(n) => write!(f, "unknown named spectrum '{}'", n),
            SpectrumError::ExactUnsupported(m) => write!(f, "{}", m),
            SpectrumError::InvalidIndices(m) => write!(f, "{}", m),
            SpectrumError::Homotopy(e) => write!(f, "{}", e),
        }
    }
}

impl std::error::Error for SpectrumError {}

impl From<HomotopyError> for SpectrumError {
    fn from(e: HomotopyError) -> Self {
        SpectrumError::Homotopy(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum StratumKind {
    #[serde(rename = "point")]
    Point,
    #[serde(rename = "sierpinski")]
    Sierpinski,
    #[serde(rename = "symbolic")]
    Symbolic,
}

/// One stratum of the spectrum: a conjugacy class of p-subgroups together
/// with the symbolic description of the cohomological open of its Weyl
/// group.
pub struct Stratum {
    pub rep: Subgroup,
    pub weyl: WeylData,
    pub dim: usize,
    pub kind: StratumKind,
    pub closed_point: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PointKind {
    #[serde(rename = "closed")]
    Closed,
    #[serde(rename = "generic")]
    Generic,
    #[serde(rename = "rational")]
    Rational,
    #[serde(rename = "family")]
    Family,
}

#[derive(Debug, Clone)]
pub struct SpectrumPoint {
    pub id: String,
    pub stratum: usize,
    pub kind: PointKind,
    pub label: String,
    /// Defining description (membership functor or inverse-image recipe).
    pub definition: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Provenance {
    Derived,
    Stated,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::Derived => "derived",
            Provenance::Stated => "stated-in-paper",
        }
    }
}

/// Specialization edge: `to` lies in the closure of `from` (drawn upward).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct SpecEdge {
    pub from: String,
    pub to: String,
    pub provenance: Provenance,
}

pub struct SpectrumDescription {
    pub group_spec: String,
    pub p: u32,
    pub strata: Vec<Stratum>,
    pub points: Vec<SpectrumPoint>,
    pub edges: Vec<SpecEdge>,
    /// Whether the point inventory is exact (finite presentations only).
    pub exact: bool,
}

impl SpectrumDescription {
    pub fn point(&self, id: &str) -> Option<&SpectrumPoint> {
        self.points.iter().find(|p| p.id == id)
    }

    pub fn has_edge(&self, from: &str, to: &str) -> bool {
        self.edges.iter().any(|e| e.from == from && e.to == to)
    }
}

fn has_cyclic_nontrivial_sylow(w: &Arc<Group>, p: u32) -> bool {
    let sylow = crate::group::sylow_class_rep(w, p);
    if sylow.order() <= 1 {
        return false;
    }
    sylow
        .elements()
        .iter()
        .any(|&e| w.element_order(e) == sylow.order())
}

fn classify(w: &Arc<Group>, p: u32, dim: usize) -> StratumKind {
    if dim == 0 {
        StratumKind::Point
    } else if has_cyclic_nontrivial_sylow(w, p) {
        StratumKind::Sierpinski
    } else {
        StratumKind::Symbolic
    }
}

/// Strata plus closed points (no finite point inventory). If `p` does not
/// divide the group order the description is a single point.
pub fn enumerate_strata(
    g: &Arc<Group>,
    group_spec: &str,
    p: u32,
) -> Result<SpectrumDescription, SpectrumError> {
    let classes = p_subgroups_up_to_conj(g, p);
    let mut strata = Vec::new();
    let mut points = Vec::new();
    for (i, rep) in classes.iter().enumerate() {
        let wd = weyl_group(g, rep);
        let dim = p_rank(&wd.weyl, p);
        let kind = classify(&wd.weyl, p, dim);
        let closed_point = format!("M(C{})", i);
        points.push(SpectrumPoint {
            id: closed_point.clone(),
            stratum: i,
            kind: PointKind::Closed,
            label: format!("M[{}]", class_label(g, rep)),
            definition: format!(
                "kernel of the residue functor: restrict modular fixed points at class {} to the trivial group",
                i
            ),
        });
        strata.push(Stratum {
            rep: rep.clone(),
            weyl: wd,
            dim,
            kind,
            closed_point,
        });
    }
    Ok(SpectrumDescription {
        group_spec: group_spec.to_string(),
        p,
        strata,
        points,
        edges: Vec::new(),
        exact: false,
    })
}

fn class_label(g: &Arc<Group>, rep: &Subgroup) -> String {
    let gens: Vec<String> = rep
        .generator_indices()
        .iter()
        .map(|&e| g.element(e).cycle_string())
        .collect();
    if gens.is_empty() {
        "1".to_string()
    } else {
        format!("<{}>", gens.join(","))
    }
}

/// Closed-point inventory: one per p-subgroup class, each carrying its
/// membership test description.
pub struct ClosedPoint {
    pub id: String,
    pub class_index: usize,
    pub rep: Subgroup,
    pub weyl: WeylData,
}

pub fn closed_points(g: &Arc<Group>, p: u32) -> Vec<ClosedPoint> {
    p_subgroups_up_to_conj(g, p)
        .into_iter()
        .enumerate()
        .map(|(i, rep)| {
            let weyl = weyl_group(g, &rep);
            ClosedPoint {
                id: format!("M(C{})", i),
                class_index: i,
                rep,
                weyl,
            }
        })
        .collect()
}

/// Membership of an object in the closed point of a class: the fixed
/// points of the object must be acyclic over the base field.
pub fn closed_point_membership(
    x: &Complex,
    point: &ClosedPoint,
) -> Result<bool, SpectrumError> {
    Ok(crate::homotopy::membership_m(x, &point.rep, &point.weyl)?)
}

/// Strata in the support of the Koszul object of `K`: exactly the classes
/// `[H]` with empty transporter into `K` (independent of the cohomological
/// point).
pub fn koszul_support(g: &Arc<Group>, k: &Subgroup, p: u32) -> Vec<usize> {
    p_subgroups_up_to_conj(g, p)
        .iter()
        .enumerate()
        .filter(|(_, h)| transporter(g, h, k).is_empty())
        .map(|(i, _)| i)
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiImageFlag {
    Exact,
    StratumUpperBound,
}

/// Stratum indices meeting the image of the fixed-points map of `h`. For a
/// normal subgroup the image is exactly the strata of classes containing
/// `h`; otherwise the classes reached from subgroups of the normalizer are
/// an upper bound at stratum level (the point level depends on the induced
/// map of cohomological opens, which is not decided here).
pub fn psi_image(
    g: &Arc<Group>,
    h: &Subgroup,
    p: u32,
) -> Result<(Vec<usize>, PsiImageFlag), SpectrumError> {
    if !h.is_p_subgroup(p) {
        return Err(SpectrumError::InvalidIndices("not a p-subgroup".into()));
    }
    let classes = p_subgroups_up_to_conj(g, p);
    if h.is_normal() {
        let strata = classes
            .iter()
            .enumerate()
            .filter(|(_, l)| h.elements().iter().all(|&e| l.contains(e)))
            .map(|(i, _)| i)
            .collect();
        Ok((strata, PsiImageFlag::Exact))
    } else {
        let n = crate::group::normalizer(g, h);
        let ng = n
            .as_group(g.order())
            .map_err(|e| SpectrumError::InvalidIndices(e.to_string()))?;
        let mut hit = vec![false; classes.len()];
        for k_in_n in p_subgroups(&ng, p) {
            let k_elems: std::collections::BTreeSet<usize> = k_in_n
                .elements()
                .iter()
                .map(|&i| g.index_of(ng.element(i)).unwrap())
                .collect();
            if !h.elements().iter().all(|&e| k_elems.contains(&e)) {
                continue;
            }
            let k = Subgroup::from_element_set(g, &k_elems);
            for (i, cls) in classes.iter().enumerate() {
                if !hit[i]
                    && cls.order() == k.order()
                    && crate::group::is_conjugate(cls, &k)
                {
                    hit[i] = true;
                }
            }
        }
        let strata = hit
            .iter()
            .enumerate()
            .filter(|&(_, &b)| b)
            .map(|(i, _)| i)
            .collect();
        Ok((strata, PsiImageFlag::StratumUpperBound))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SupportClass {
    /// Fixed points acyclic: the stratum misses the support entirely.
    Out,
    /// The unit splits off the fixed points: every point of the stratum is
    /// in the support.
    InAll,
    /// Not resolved without support varieties over the Weyl group.
    Partial,
}

/// Per-stratum support classification of an object.
pub fn object_support_profile(
    x: &Complex,
    classes: &[(Subgroup, WeylData)],
) -> Result<Vec<SupportClass>, SpectrumError> {
    let mut out = Vec::new();
    for (h, wd) in classes {
        let px = map_complex(&ComplexFunctor::Psi(h, wd), x)?;
        if px.is_acyclic() {
            out.push(SupportClass::Out);
            continue;
        }
        if unit_splits_off(&px)? {
            out.push(SupportClass::InAll);
        } else {
            out.push(SupportClass::Partial);
        }
    }
    Ok(out)
}

/// Detects a retraction of the unit through the complex: a pair of chain
/// maps `unit → x → unit` composing to a nonzero scalar.
pub fn unit_splits_off(x: &Complex) -> Result<bool, SpectrumError> {
    let unit = Complex::unit(x.group(), x.prime());
    let into = homotopy_classes(&unit, x)?;
    let back = homotopy_classes(x, &unit)?;
    for u in &into {
        for r in &back {
            let comp = r.compose(u);
            let scalar = comp.comp(0);
            if !scalar.is_zero() {
                return Ok(true);
            }
        }
    }
    Ok(false)
}

// ---------------------------------------------------------------------------
// Exact finite descriptions
// ---------------------------------------------------------------------------

/// The `2n+1`-point poset of a cyclic p-group of order `p^n`: closed points
/// `m_0..m_n` and V-generic points `p_1..p_n`, where the closure of `p_i`
/// is `{m_{i-1}, p_i, m_i}`.
pub fn cyclic_spectrum(p: u32, n: usize) -> SpectrumDescription {
    let mut points = Vec::new();
    let mut edges = Vec::new();
    // Stratum i ↔ the subgroup of index p^i; its Weyl group is cyclic of
    // order p^i.
    let strata_meta: Vec<(usize, StratumKind)> = (0..=n)
        .map(|i| {
            if i == 0 {
                (0, StratumKind::Point)
            } else {
                (1, StratumKind::Sierpinski)
            }
        })
        .collect();
    for i in 0..=n {
        points.push(SpectrumPoint {
            id: format!("m{}", i),
            stratum: i,
            kind: PointKind::Closed,
            label: format!("m_{}", i),
            definition: format!(
                "preimage of 0 under the fixed-points functor of the index-p^{} subgroup",
                i
            ),
        });
        if i >= 1 {
            points.push(SpectrumPoint {
                id: format!("p{}", i),
                stratum: i,
                kind: PointKind::Generic,
                label: format!("p_{}", i),
                definition: format!(
                    "preimage of the perfect-complex prime under the fixed-points functor of the index-p^{} subgroup",
                    i
                ),
            });
            edges.push(SpecEdge {
                from: format!("p{}", i),
                to: format!("m{}", i - 1),
                provenance: Provenance::Derived,
            });
            edges.push(SpecEdge {
                from: format!("p{}", i),
                to: format!("m{}", i),
                provenance: Provenance::Derived,
            });
        }
    }
    edges.sort();
    let group_spec = format!("cyclic:{}", (p as usize).pow(n as u32));
    // Build honest strata metadata from the actual group.
    let g = crate::group::parse_group_spec(&group_spec, crate::group::DEFAULT_MAX_ORDER)
        .expect("cyclic group parses");
    let classes = p_subgroups_up_to_conj(&g, p);
    // classes are sorted by order ascending: class j has order p^j, i.e.
    // the subgroup of index p^{n-j}; stratum i uses class n-i.
    let strata: Vec<Stratum> = (0..=n)
        .map(|i| {
            let rep = classes[n - i].clone();
            let weyl = weyl_group(&g, &rep);
            let (dim, kind) = strata_meta[i];
            Stratum {
                rep,
                weyl,
                dim,
                kind,
                closed_point: format!("m{}", i),
            }
        })
        .collect();
    SpectrumDescription {
        group_spec,
        p,
        strata,
        points,
        edges,
        exact: true,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CyclicMapKind {
    /// Fixed points of the index-p^i subgroup: catches the left-most points.
    Psi,
    /// Restriction to the order-p^j subgroup: catches the right-most points.
    Rho,
    /// Inflation to the order-p^m quotient: retracts Psi, collapsing the
    /// tail onto the last closed point.
    Pi,
}

/// Maps between the finite cyclic posets, returned as `(from, to)` pairs of
/// point ids; each is verified to preserve specialization.
pub fn cyclic_maps(
    p: u32,
    n: usize,
    kind: CyclicMapKind,
    param: usize,
) -> Result<Vec<(String, String)>, SpectrumError> {
    let mut out = Vec::new();
    match kind {
        CyclicMapKind::Psi => {
            let i = param;
            if i > n {
                return Err(SpectrumError::InvalidIndices(format!(
                    "source index {} exceeds {}",
                    i, n
                )));
            }
            for l in 0..=i {
                out.push((format!("m{}", l), format!("m{}", l)));
                if l >= 1 {
                    out.push((format!("p{}", l), format!("p{}", l)));
                }
            }
        }
        CyclicMapKind::Rho => {
            let j = param;
            if j > n {
                return Err(SpectrumError::InvalidIndices(format!(
                    "source index {} exceeds {}",
                    j, n
                )));
            }
            for l in 0..=j {
                out.push((format!("m{}", l), format!("m{}", l + n - j)));
                if l >= 1 {
                    out.push((format!("p{}", l), format!("p{}", l + n - j)));
                }
            }
        }
        CyclicMapKind::Pi => {
            let m = param;
            if m > n {
                return Err(SpectrumError::InvalidIndices(format!(
                    "target index {} exceeds {}",
                    m, n
                )));
            }
            for l in 0..=n {
                let target = if l <= m {
                    format!("m{}", l)
                } else {
                    format!("m{}", m)
                };
                out.push((format!("m{}", l), target));
                if l >= 1 {
                    let target = if l <= m {
                        format!("p{}", l)
                    } else {
                        format!("m{}", m)
                    };
                    out.push((format!("p{}", l), target));
                }
            }
        }
    }
    // Continuity for the specialization order: if y ∈ cl(x) in the source
    // then f(y) ∈ cl(f(x)) in the target.
    let src_n = match kind {
        CyclicMapKind::Psi | CyclicMapKind::Rho => param,
        CyclicMapKind::Pi => n,
    };
    let tgt_n = match kind {
        CyclicMapKind::Psi | CyclicMapKind::Rho => n,
        CyclicMapKind::Pi => param,
    };
    let src = cyclic_spectrum(p, src_n);
    let tgt = cyclic_spectrum(p, tgt_n);
    let image = |id: &str| -> &str {
        out.iter()
            .find(|(f, _)| f == id)
            .map(|(_, t)| t.as_str())
            .expect("total map on points")
    };
    for e in &src.edges {
        let fi = image(&e.from);
        let ti = image(&e.to);
        if fi != ti && !tgt.has_edge(fi, ti) {
            return Err(SpectrumError::InvalidIndices(format!(
                "map is not continuous: {}⇝{} has image {}⇝{}",
                e.from, e.to, fi, ti
            )));
        }
    }
    Ok(out)
}

/// Exact finite skeleton for `klein4` (p = 2): twelve named points and one
/// symbolic family node for the non-rational part of the projective line,
/// with provenance-tagged specializations matching the worked picture.
fn klein4_description() -> SpectrumDescription {
    let g = crate::group::parse_group_spec("klein4", crate::group::DEFAULT_MAX_ORDER).unwrap();
    let base = enumerate_strata(&g, "klein4", 2).unwrap();
    // strata: 0 ↔ trivial, 1..3 ↔ N0,N1,N∞, 4 ↔ E. Points per picture.
    let mut points = Vec::new();
    let mut edges = Vec::new();
    let closed = |id: &str, stratum: usize, label: &str, def: &str| SpectrumPoint {
        id: id.into(),
        stratum,
        kind: PointKind::Closed,
        label: label.into(),
        definition: def.into(),
    };
    points.push(closed("M(E)", 4, "M(E)", "closed point of the full-group stratum"));
    points.push(closed("M(N0)", 1, "M(N_0)", "closed point of the N_0 stratum"));
    points.push(closed("M(N1)", 2, "M(N_1)", "closed point of the N_1 stratum"));
    points.push(closed("M(Ninf)", 3, "M(N_inf)", "closed point of the N_inf stratum"));
    points.push(closed("M(1)", 0, "M(1)", "the acyclics: closed point of the cohomological open"));
    for (id, st, label) in [
        ("P(N0)", 1usize, "P(N_0)"),
        ("P(N1)", 2, "P(N_1)"),
        ("P(Ninf)", 3, "P(N_inf)"),
    ] {
        points.push(SpectrumPoint {
            id: id.into(),
            stratum: st,
            kind: PointKind::Generic,
            label: label.into(),
            definition: "generic point of a rank-one stratum (a Sierpinski pair with its closed point)".into(),
        });
    }
    for (id, label) in [("0", "0"), ("1", "1"), ("inf", "inf")] {
        points.push(SpectrumPoint {
            id: id.into(),
            stratum: 0,
            kind: PointKind::Rational,
            label: label.into(),
            definition: "rational point of the projective line inside the cohomological open".into(),
        });
    }
    points.push(SpectrumPoint {
        id: "P0".into(),
        stratum: 0,
        kind: PointKind::Generic,
        label: "P_0".into(),
        definition: "generic point of the cohomological open (and of the whole space)".into(),
    });
    points.push(SpectrumPoint {
        id: "P1-family".into(),
        stratum: 0,
        kind: PointKind::Family,
        label: "P^1 minus {0,1,inf,P_0}".into(),
        definition: "the non-rational points of the projective line, carried as one symbolic node".into(),
    });
    let mut e = |from: &str, to: &str, prov: Provenance| {
        edges.push(SpecEdge {
            from: from.into(),
            to: to.into(),
            provenance: prov,
        });
    };
    use Provenance::*;
    // Generic point of the whole space.
    for t in ["0", "1", "inf", "P(N0)", "P(N1)", "P(Ninf)"] {
        e("P0", t, Derived);
    }
    e("P0", "P1-family", Stated);
    // Rational points specialize into the cohomological closed point and
    // the matching rank-one closed point (via restriction images).
    e("0", "M(1)", Derived);
    e("1", "M(1)", Derived);
    e("inf", "M(1)", Derived);
    e("0", "M(N0)", Derived);
    e("1", "M(N1)", Derived);
    e("inf", "M(Ninf)", Derived);
    // Rank-one strata are images of the fixed-point inclusions, three-point
    // subposets each.
    for i in ["N0", "N1", "Ninf"] {
        e(&format!("P({})", i), &format!("M({})", i), Derived);
        e(&format!("P({})", i), "M(E)", Derived);
    }
    // The undulated part: non-rational points specialize directly to the
    // top closed point and into the cohomological closed point.
    e("P1-family", "M(E)", Stated);
    e("P1-family", "M(1)", Stated);
    let mut edges = edges;
    edges.sort();
    SpectrumDescription {
        group_spec: "klein4".into(),
        p: 2,
        strata: base.strata,
        points,
        edges,
        exact: true,
    }
}

/// Exact description for `q8` (p = 2): the Klein-four skeleton transported
/// along the closed immersion induced by central fixed points, plus the
/// two-point cohomological open and its single exit edge.
fn q8_description() -> SpectrumDescription {
    let g = crate::group::parse_group_spec("q8", crate::group::DEFAULT_MAX_ORDER).unwrap();
    let base = enumerate_strata(&g, "q8", 2).unwrap();
    // q8 classes sorted: 0 ↔ 1, 1 ↔ Z, 2..4 ↔ the three cyclic C4, 5 ↔ Q8.
    let v4 = klein4_description();
    // Class map: klein4 stratum s ↦ q8 stratum, matching quotient classes:
    // trivial ↦ Z, N_i ↦ C4's, E ↦ Q8.
    let stratum_map = |s: usize| -> usize {
        match s {
            0 => 1,
            1 => 2,
            2 => 3,
            3 => 4,
            4 => 5,
            _ => unreachable!(),
        }
    };
    let rename = |id: &str| -> String {
        match id {
            "M(E)" => "M(Q8)".into(),
            "M(N0)" => "M(I)".into(),
            "M(N1)" => "M(J)".into(),
            "M(Ninf)" => "M(K)".into(),
            "M(1)" => "M(Z)".into(),
            "P(N0)" => "P(I)".into(),
            "P(N1)" => "P(J)".into(),
            "P(Ninf)" => "P(K)".into(),
            other => format!("Z:{}", other),
        }
    };
    let mut points: Vec<SpectrumPoint> = v4
        .points
        .iter()
        .map(|pt| SpectrumPoint {
            id: rename(&pt.id),
            stratum: stratum_map(pt.stratum),
            kind: pt.kind,
            label: format!("psi_Z[{}]", pt.label),
            definition: format!(
                "image under the closed immersion of central fixed points of: {}",
                pt.definition
            ),
        })
        .collect();
    let mut edges: Vec<SpecEdge> = v4
        .edges
        .iter()
        .map(|e| SpecEdge {
            from: rename(&e.from),
            to: rename(&e.to),
            provenance: e.provenance,
        })
        .collect();
    // The cohomological open of q8 is a two-point Sierpinski space.
    points.push(SpectrumPoint {
        id: "M(1)".into(),
        stratum: 0,
        kind: PointKind::Closed,
        label: "M(1)".into(),
        definition: "the acyclics: closed point of the cohomological open".into(),
    });
    points.push(SpectrumPoint {
        id: "P".into(),
        stratum: 0,
        kind: PointKind::Generic,
        label: "P".into(),
        definition: "generic point of the two-point cohomological open".into(),
    });
    edges.push(SpecEdge {
        from: "P".into(),
        to: "M(1)".into(),
        provenance: Provenance::Derived,
    });
    // The generic cohomological point specializes to exactly one further
    // point: the closed point of the central stratum.
    edges.push(SpecEdge {
        from: "P".into(),
        to: "M(Z)".into(),
        provenance: Provenance::Derived,
    });
    edges.sort();
    SpectrumDescription {
        group_spec: "q8".into(),
        p: 2,
        strata: base.strata,
        points,
        edges,
        exact: true,
    }
}

/// Exact descriptions for the named groups solved completely here.
pub fn named_spectrum(name: &str, p: u32) -> Result<SpectrumDescription, SpectrumError> {
    match (name, p) {
        ("klein4", 2) => Ok(klein4_description()),
        ("q8", 2) => Ok(q8_description()),
        _ => Err(SpectrumError::UnknownName(format!("{} at p={}", name, p))),
    }
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct ClassJson {
    order: usize,
    generators: Vec<String>,
}

#[derive(Serialize)]
struct StratumJson {
    class: ClassJson,
    weyl_order: usize,
    dim: usize,
    kind: StratumKind,
    closed_point: String,
}

#[derive(Serialize)]
struct PointJson {
    id: String,
    stratum: usize,
    kind: PointKind,
    label: String,
}

#[derive(Serialize)]
struct EdgeJson {
    from: String,
    to: String,
    provenance: String,
}

#[derive(Serialize)]
struct SpectrumJson {
    group: String,
    #[serde(rename = "char")]
    characteristic: u32,
    strata: Vec<StratumJson>,
    points: Vec<PointJson>,
    specializations: Vec<EdgeJson>,
}

/// Deterministic JSON: strata in canonical class order, points in
/// construction order, edges lexicographic.
pub fn emit_json(d: &SpectrumDescription) -> String {
    let g = d
        .strata
        .first()
        .map(|s| Arc::clone(s.rep.parent()))
        .unwrap_or_else(|| crate::group::Group::trivial(1));
    let strata: Vec<StratumJson> = d
        .strata
        .iter()
        .map(|s| StratumJson {
            class: ClassJson {
                order: s.rep.order(),
                generators: s
                    .rep
                    .generator_indices()
                    .iter()
                    .map(|&e| g.element(e).cycle_string())
                    .collect(),
            },
            weyl_order: s.weyl.order(),
            dim: s.dim,
            kind: s.kind,
            closed_point: s.closed_point.clone(),
        })
        .collect();
    let points: Vec<PointJson> = d
        .points
        .iter()
        .map(|p| PointJson {
            id: p.id.clone(),
            stratum: p.stratum,
            kind: p.kind,
            label: p.label.clone(),
        })
        .collect();
    let mut edges: Vec<&SpecEdge> = d.edges.iter().collect();
    edges.sort();
    let specializations: Vec<EdgeJson> = edges
        .iter()
        .map(|e| EdgeJson {
            from: e.from.clone(),
            to: e.to.clone(),
            provenance: e.provenance.as_str().to_string(),
        })
        .collect();
    let doc = SpectrumJson {
        group: d.group_spec.clone(),
        characteristic: d.p,
        strata,
        points,
        specializations,
    };
    serde_json::to_string_pretty(&doc).expect("serialization cannot fail")
}

/// DOT rendering: one node per point (family nodes boxed), specializations
/// drawn bottom-up, dashed when only stated externally; nodes are ranked by
/// specialization height so closed points sit on top.
pub fn emit_dot(d: &SpectrumDescription) -> String {
    let mut out = String::new();
    out.push_str("digraph spectrum {\n");
    out.push_str("  rankdir=\"BT\";\n");
    out.push_str("  node [shape=circle, fontsize=10];\n");
    // Height: longest upward chain from the point.
    let mut height: std::collections::BTreeMap<&str, usize> = d
        .points
        .iter()
        .map(|p| (p.id.as_str(), 0usize))
        .collect();
    let mut changed = true;
    while changed {
        changed = false;
        for e in &d.edges {
            let ht = height[e.to.as_str()] + 1;
            if height[e.from.as_str()] < ht {
                height.insert(&e.from, ht);
                changed = true;
            }
        }
    }
    for p in &d.points {
        let shape = if p.kind == PointKind::Family {
            ", shape=box"
        } else {
            ""
        };
        out.push_str(&format!(
            "  \"{}\" [label=\"{}\"{}];\n",
            p.id, p.label, shape
        ));
    }
    // Group nodes of equal height.
    let max_h = height.values().copied().max().unwrap_or(0);
    for h in 0..=max_h {
        let mut ids: Vec<&str> = d
            .points
            .iter()
            .map(|p| p.id.as_str())
            .filter(|id| height[id] == h)
            .collect();
        ids.sort();
        if !ids.is_empty() {
            out.push_str("  { rank=same; ");
            for id in ids {
                out.push_str(&format!("\"{}\"; ", id));
            }
            out.push_str("}\n");
        }
    }
    let mut edges: Vec<&SpecEdge> = d.edges.iter().collect();
    edges.sort();
    for e in edges {
        let style = match e.provenance {
            Provenance::Derived => "",
            Provenance::Stated => " [style=dashed]",
        };
        out.push_str(&format!("  \"{}\" -> \"{}\"{};\n", e.from, e.to, style));
    }
    out.push_str("}\n");
    out
}

/// Sanity constraint on any description: every specialization edge points
/// from a stratum `[H]` into a stratum `[K]` with `H` subconjugate to `K`.
pub fn edges_respect_subconjugacy(g: &Arc<Group>, d: &SpectrumDescription) -> bool {
    d.edges.iter().all(|e| {
        let from = d.point(&e.from).expect("edge endpoint exists");
        let to = d.point(&e.to).expect("edge endpoint exists");
        let h = &d.strata[from.stratum].rep;
        let k = &d.strata[to.stratum].rep;
        is_subconjugate(g, h, k)
    })
}

/// The rank of the comparison pairing used by `unit_splits_off`, exposed
/// for reports.
pub fn unit_pairing_rank(x: &Complex) -> Result<usize, SpectrumError> {
    let unit = Complex::unit(x.group(), x.prime());
    let into = homotopy_classes(&unit, x)?;
    let back = homotopy_classes(x, &unit)?;
    let p = x.prime();
    let mut m = FpMatrix::zeros(p, back.len(), into.len());
    for (i, r) in back.iter().enumerate() {
        for (j, u) in into.iter().enumerate() {
            let c = r.compose(u).comp(0);
            if c.rows() == 1 && c.cols() == 1 {
                m.set(i, j, c.get(0, 0));
            }
        }
    }
    Ok(m.rank())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{parse_group_spec, DEFAULT_MAX_ORDER};
    use crate::homotopy::{koszul, p_classes_with_weyl};

    fn g(spec: &str) -> Arc<Group> {
        parse_group_spec(spec, DEFAULT_MAX_ORDER).unwrap()
    }

    #[test]
    fn klein4_strata_dims() {
        let v = g("klein4");
        let d = enumerate_strata(&v, "klein4", 2).unwrap();
        let dims: Vec<usize> = d.strata.iter().map(|s| s.dim).collect();
        assert_eq!(dims, vec![2, 1, 1, 1, 0]);
        assert_eq!(d.strata.len(), 5);
    }

    #[test]
    fn q8_strata_dims() {
        let q = g("q8");
        let d = enumerate_strata(&q, "q8", 2).unwrap();
        let dims: Vec<usize> = d.strata.iter().map(|s| s.dim).collect();
        assert_eq!(dims, vec![1, 2, 1, 1, 1, 0]);
        assert_eq!(d.strata.len(), 6);
    }

    #[test]
    fn coprime_characteristic_gives_single_point() {
        let c6 = g("cyclic:6");
        let d = enumerate_strata(&c6, "cyclic:6", 5).unwrap();
        assert_eq!(d.strata.len(), 1);
        assert_eq!(d.strata[0].dim, 0);
        assert_eq!(d.points.len(), 1);
    }

    #[test]
    fn closed_point_counts() {
        assert_eq!(closed_points(&g("cyclic:4"), 2).len(), 3);
        assert_eq!(closed_points(&g("q8"), 2).len(), 6);
        assert_eq!(closed_points(&g("cyclic:1"), 2).len(), 1);
    }

    #[test]
    fn koszul_support_examples() {
        let c4 = g("cyclic:4");
        let classes = crate::group::p_subgroups_up_to_conj(&c4, 2);
        // K = G: empty support.
        assert!(koszul_support(&c4, &classes[2], 2).is_empty());
        // K = 1: all nontrivial strata.
        assert_eq!(koszul_support(&c4, &classes[0], 2), vec![1, 2]);
        // K = C2: only the full stratum.
        assert_eq!(koszul_support(&c4, &classes[1], 2), vec![2]);
    }

    #[test]
    fn psi_image_examples() {
        let q = g("q8");
        let z = crate::group::center(&q);
        let (strata, flag) = psi_image(&q, &z, 2).unwrap();
        assert_eq!(strata, vec![1, 2, 3, 4, 5]);
        assert_eq!(flag, PsiImageFlag::Exact);

        let v = g("klein4");
        let n0 = crate::group::p_subgroups_up_to_conj(&v, 2)[1].clone();
        let (strata, flag) = psi_image(&v, &n0, 2).unwrap();
        assert_eq!(strata, vec![1, 4]);
        assert_eq!(flag, PsiImageFlag::Exact);

        let triv = Subgroup::trivial(&v);
        let (strata, _) = psi_image(&v, &triv, 2).unwrap();
        assert_eq!(strata, vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn psi_image_non_normal_is_upper_bound() {
        let d8 = g("dihedral:8");
        let refl = crate::group::p_subgroups_up_to_conj(&d8, 2)
            .into_iter()
            .find(|s| s.order() == 2 && !s.is_normal())
            .unwrap();
        let (strata, flag) = psi_image(&d8, &refl, 2).unwrap();
        assert_eq!(flag, PsiImageFlag::StratumUpperBound);
        assert!(!strata.is_empty());
    }

    #[test]
    fn support_profile_of_koszul() {
        let c4 = g("cyclic:4");
        let classes = p_classes_with_weyl(&c4, 2);
        let k_c2 = koszul(&c4, &classes[1].0, 2, 12).unwrap();
        let profile = object_support_profile(&k_c2, &classes).unwrap();
        assert_eq!(
            profile,
            vec![SupportClass::Out, SupportClass::Out, SupportClass::InAll]
        );
        let unit = Complex::unit(&c4, 2);
        let profile = object_support_profile(&unit, &classes).unwrap();
        assert!(profile.iter().all(|&c| c == SupportClass::InAll));
    }

    #[test]
    fn cyclic_spectrum_shapes() {
        let w0 = cyclic_spectrum(2, 0);
        assert_eq!(w0.points.len(), 1);
        assert!(w0.edges.is_empty());
        let w1 = cyclic_spectrum(2, 1);
        assert_eq!(w1.points.len(), 3);
        assert_eq!(w1.edges.len(), 2);
        let w2 = cyclic_spectrum(2, 2);
        assert_eq!(w2.points.len(), 5);
        assert_eq!(w2.edges.len(), 4);
        assert!(w2.has_edge("p1", "m0"));
        assert!(w2.has_edge("p2", "m1"));
        assert!(w2.has_edge("p2", "m2"));
    }

    #[test]
    fn cyclic_maps_examples() {
        // psi with i = n is the identity.
        let psi = cyclic_maps(2, 2, CyclicMapKind::Psi, 2).unwrap();
        assert!(psi.iter().all(|(a, b)| a == b));
        // rho for (n=2, j=1): m0↦m1, p1↦p2, m1↦m2.
        let rho = cyclic_maps(2, 2, CyclicMapKind::Rho, 1).unwrap();
        assert!(rho.contains(&("m0".into(), "m1".into())));
        assert!(rho.contains(&("p1".into(), "p2".into())));
        assert!(rho.contains(&("m1".into(), "m2".into())));
        // pi for (n=2, m=1): p2 ↦ m1.
        let pi = cyclic_maps(2, 2, CyclicMapKind::Pi, 1).unwrap();
        assert!(pi.contains(&("p2".into(), "m1".into())));
        // pi ∘ psi = id on the smaller poset.
        let psi = cyclic_maps(2, 2, CyclicMapKind::Psi, 1).unwrap();
        let pi = cyclic_maps(2, 2, CyclicMapKind::Pi, 1).unwrap();
        for (a, b) in &psi {
            let (_, c) = pi.iter().find(|(f, _)| f == b).unwrap();
            assert_eq!(a, c);
        }
    }

    #[test]
    fn klein4_named_spectrum_inventory() {
        let d = named_spectrum("klein4", 2).unwrap();
        assert_eq!(d.points.len(), 13); // 12 named + 1 family node
        let v = g("klein4");
        assert!(edges_respect_subconjugacy(&v, &d));
        assert!(d.has_edge("P(N0)", "M(N0)"));
        assert!(d.has_edge("0", "M(1)"));
        assert!(d.has_edge("P1-family", "M(E)"));
        let stated = d
            .edges
            .iter()
            .filter(|e| e.provenance == Provenance::Stated)
            .count();
        assert_eq!(stated, 3);
        let closed = d.points.iter().filter(|p| p.kind == PointKind::Closed).count();
        assert_eq!(closed, closed_points(&v, 2).len());
    }

    #[test]
    fn q8_named_spectrum_inventory() {
        let d = named_spectrum("q8", 2).unwrap();
        let q = g("q8");
        assert!(edges_respect_subconjugacy(&q, &d));
        assert!(d.has_edge("P", "M(Z)"));
        assert!(d.has_edge("P", "M(1)"));
        // transported skeleton present
        assert!(d.has_edge("P(I)", "M(Q8)"));
        assert!(d.has_edge("Z:P0", "Z:0"));
        let closed = d.points.iter().filter(|p| p.kind == PointKind::Closed).count();
        assert_eq!(closed, 6);
        assert_eq!(d.points.len(), 15);
    }

    #[test]
    fn unknown_named_spectrum_is_an_error() {
        assert!(named_spectrum("sym:3", 2).is_err());
        assert!(named_spectrum("klein4", 3).is_err());
    }

    #[test]
    fn emit_json_is_deterministic_and_ordered() {
        let d = cyclic_spectrum(2, 1);
        let a = emit_json(&d);
        let b = emit_json(&d);
        assert_eq!(a, b);
        assert!(a.find("\"group\"").unwrap() < a.find("\"char\"").unwrap());
        assert!(a.find("\"char\"").unwrap() < a.find("\"strata\"").unwrap());
        assert!(a.find("\"strata\"").unwrap() < a.find("\"points\"").unwrap());
        assert!(a.find("\"points\"").unwrap() < a.find("\"specializations\"").unwrap());
    }

    #[test]
    fn emit_dot_single_point() {
        let d = cyclic_spectrum(2, 0);
        let dot = emit_dot(&d);
        assert_eq!(dot.matches("label=").count(), 1);
        assert!(!dot.contains("->"));
    }

    #[test]
    fn emit_dot_w1_has_3_nodes_2_edges() {
        let d = cyclic_spectrum(2, 1);
        let dot = emit_dot(&d);
        assert_eq!(dot.matches("label=").count(), 3);
        assert_eq!(dot.matches("->").count(), 2);
    }

    #[test]
    fn named_dot_uses_dashes_for_stated_edges() {
        let d = named_spectrum("klein4", 2).unwrap();
        let dot = emit_dot(&d);
        assert_eq!(dot.matches("style=dashed").count(), 3);
        assert_eq!(dot.matches("label=").count(), 13);
    }
}
