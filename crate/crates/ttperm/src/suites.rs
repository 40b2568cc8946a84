//! Verification suites: each check exercises one verified fact about the
//! category (Hom dimensions against double cosets, Koszul shapes and
//! restrictions, fixed-point formulas and the Brauer oracle, nilpotence of
//! corner kernels, conservativity with explicit witnesses, stripping,
//! tower stages, and the spectrum figures), over a fixed family of small
//! groups or a single group from the configuration.
//!
//! Results are deterministic for a fixed configuration: cases are indexed,
//! may run on a bounded worker pool, and are aggregated in canonical order.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::group::{
    all_subgroups, is_p_group, is_subconjugate, p_subgroups, p_subgroups_up_to_conj,
    parse_group_spec, transporter, weyl_group, Group, Subgroup, WeylData,
};
use crate::homotopy::{
    adjoint_tower, conservativity_profile, contraction, is_contractible, koszul, map_complex,
    membership_m, p_classes_with_weyl, random_bounded_complex, random_full_strippable_complex,
    res_koszul, strip, subgroup_classes, tensor_complexes, verify_homotopy, zul, ChainMap,
    Complex, ComplexFunctor, RandomComplexCfg,
};
use crate::linalg::FpMatrix;
use crate::permcat::{
    brauer, brauer_map, brauer_oracle, coset_module, direct_sum, end_psi_data, hom_space_basis,
    hom_space_dim, infl_map, infl_module, oracle_induced_map, res_map, res_module, restrict_along,
    restrict_along_map, standard_morphism, tensor_modules, tensor_morphisms, trivial_module,
    Morphism, PermModule,
};
use crate::spectrum::{
    closed_points, cyclic_maps, cyclic_spectrum, enumerate_strata, koszul_support, named_spectrum,
    object_support_profile, psi_image, CyclicMapKind, PsiImageFlag, SupportClass,
};

#[derive(Debug, Clone)]
pub struct CheckResult {
    pub id: String,
    pub instance: String,
    pub pass: bool,
    pub detail: String,
    pub repro: Option<String>,
}

impl CheckResult {
    fn pass(id: &str, instance: String, detail: String) -> Self {
        CheckResult {
            id: id.to_string(),
            instance,
            pass: true,
            detail,
            repro: None,
        }
    }

    fn fail(id: &str, instance: String, detail: String, repro: String) -> Self {
        CheckResult {
            id: id.to_string(),
            instance,
            pass: false,
            detail,
            repro: Some(repro),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SuiteConfig {
    pub group: Option<String>,
    pub p: Option<u32>,
    pub seed: u64,
    pub jobs: usize,
    pub max_order: usize,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            group: None,
            p: None,
            seed: 0,
            jobs: 0,
            max_order: crate::group::DEFAULT_MAX_ORDER,
        }
    }
}

pub const SUITES: &[&str] = &[
    "hom-dims",
    "koszul",
    "brauer",
    "nilpotence",
    "conservativity",
    "functors",
    "tower",
    "spectrum-examples",
];

const HOM_DIM_GROUPS: &[&str] = &[
    "cyclic:2",
    "cyclic:3",
    "cyclic:4",
    "cyclic:8",
    "cyclic:9",
    "cyclic:16",
    "klein4",
    "elab:2^3",
    "dihedral:8",
    "q8",
    "sym:3",
    "sym:4",
];

const GROUPS_LE_8: &[&str] = &[
    "cyclic:1",
    "cyclic:2",
    "cyclic:3",
    "cyclic:4",
    "cyclic:5",
    "cyclic:6",
    "cyclic:7",
    "cyclic:8",
    "klein4",
    "cyclic:2 x cyclic:4",
    "elab:2^3",
    "dihedral:8",
    "q8",
    "sym:3",
];

const BRAUER_GROUPS: &[&str] = &[
    "cyclic:2",
    "cyclic:3",
    "cyclic:4",
    "cyclic:8",
    "cyclic:9",
    "cyclic:16",
    "klein4",
    "cyclic:2 x cyclic:4",
    "elab:2^3",
    "dihedral:8",
    "q8",
    "sym:3",
    "dihedral:16",
    "cyclic:2 x q8",
];

const P_GROUPS_LE_16: &[(&str, u32)] = &[
    ("cyclic:2", 2),
    ("cyclic:4", 2),
    ("cyclic:8", 2),
    ("cyclic:16", 2),
    ("klein4", 2),
    ("cyclic:2 x cyclic:4", 2),
    ("cyclic:2 x cyclic:8", 2),
    ("cyclic:4 x cyclic:4", 2),
    ("elab:2^3", 2),
    ("elab:2^4", 2),
    ("dihedral:8", 2),
    ("dihedral:16", 2),
    ("q8", 2),
    ("cyclic:2 x q8", 2),
    ("cyclic:2 x dihedral:8", 2),
    ("cyclic:3", 3),
    ("cyclic:9", 3),
    ("elab:3^2", 3),
    ("cyclic:5", 5),
    ("cyclic:7", 7),
];

const CONSERVATIVITY_GROUPS: &[&str] = &["cyclic:2", "cyclic:4", "klein4"];
const STRIP_GROUPS: &[&str] = &["cyclic:4", "klein4"];

fn primes_dividing(order: usize) -> Vec<u32> {
    [2u32, 3, 5, 7]
        .into_iter()
        .filter(|&p| order % p as usize == 0)
        .collect()
}

/// The (group spec, group, characteristic) triples a suite runs over.
fn instances(
    default_groups: &[&str],
    cfg: &SuiteConfig,
    modular_only: bool,
) -> Result<Vec<(String, Arc<Group>, u32)>, String> {
    let specs: Vec<String> = match &cfg.group {
        Some(s) => vec![s.clone()],
        None => default_groups.iter().map(|s| s.to_string()).collect(),
    };
    let mut out = Vec::new();
    for spec in specs {
        let g = parse_group_spec(&spec, cfg.max_order).map_err(|e| e.to_string())?;
        let ps: Vec<u32> = match cfg.p {
            Some(p) => vec![p],
            None => {
                if modular_only {
                    primes_dividing(g.order())
                } else {
                    vec![2, 3]
                }
            }
        };
        for p in ps {
            out.push((spec.clone(), Arc::clone(&g), p));
        }
    }
    Ok(out)
}

fn pool(cfg: &SuiteConfig) -> rayon::ThreadPool {
    let mut b = rayon::ThreadPoolBuilder::new();
    if cfg.jobs > 0 {
        b = b.num_threads(cfg.jobs);
    }
    b.build().expect("thread pool")
}

pub fn run_suite(name: &str, cfg: &SuiteConfig) -> Result<Vec<CheckResult>, String> {
    match name {
        "hom-dims" => suite_hom_dims(cfg),
        "koszul" => suite_koszul(cfg),
        "brauer" => suite_brauer(cfg),
        "nilpotence" => suite_nilpotence(cfg),
        "conservativity" => suite_conservativity(cfg),
        "functors" => suite_functors(cfg),
        "tower" => suite_tower(cfg),
        "spectrum-examples" => suite_spectrum_examples(cfg),
        "all" => {
            let mut out = Vec::new();
            for s in SUITES {
                out.extend(run_suite(s, cfg)?);
            }
            Ok(out)
        }
        other => Err(format!("unknown suite '{}'", other)),
    }
}

// ---------------------------------------------------------------------------
// hom-dims
// ---------------------------------------------------------------------------

fn suite_hom_dims(cfg: &SuiteConfig) -> Result<Vec<CheckResult>, String> {
    let instances = instances(HOM_DIM_GROUPS, cfg, false)?;
    let pool = pool(cfg);
    let mut out = Vec::new();
    for (spec, g, p) in instances {
        let subs = all_subgroups(&g);
        let pairs: Vec<(usize, usize)> = (0..subs.len())
            .flat_map(|i| (0..subs.len()).map(move |j| (i, j)))
            .collect();
        let failures: Vec<String> = pool.install(|| {
            pairs
                .par_iter()
                .filter_map(|&(i, j)| {
                    let m = coset_module(&g, &subs[i], p);
                    let n = coset_module(&g, &subs[j], p);
                    let dim = hom_space_dim(&m, &n).unwrap();
                    let expected = crate::group::double_coset_reps(&g, &subs[i], &subs[j]).len();
                    if dim == expected {
                        None
                    } else {
                        Some(format!(
                            "H#{} K#{}: hom dim {} vs double cosets {}",
                            i, j, dim, expected
                        ))
                    }
                })
                .collect()
        });
        let instance = format!("G={} p={}", spec, p);
        if failures.is_empty() {
            out.push(CheckResult::pass(
                "hom-dims",
                instance,
                format!("{} subgroup pairs", pairs.len()),
            ));
        } else {
            out.push(CheckResult::fail(
                "hom-dims",
                instance,
                failures.join("; "),
                format!("ttperm verify --group '{}' --char {} --suite hom-dims", spec, p),
            ));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// koszul
// ---------------------------------------------------------------------------

fn suite_koszul(cfg: &SuiteConfig) -> Result<Vec<CheckResult>, String> {
    let instances = instances(GROUPS_LE_8, cfg, true)?;
    let pool = pool(cfg);
    let mut out = Vec::new();
    for (spec, g, p) in instances {
        let subs = subgroup_classes(&g);
        let repro =
            |suite: &str| format!("ttperm verify --group '{}' --char {} --suite {}", spec, p, suite);
        // Shape: binomial dimensions, degree-0/1 terms, acyclicity.
        let mut shape_fail = Vec::new();
        for (hi, h) in subs.iter().enumerate() {
            let kos = koszul(&g, h, p, 12).map_err(|e| e.to_string())?;
            let r = g.order() / h.order();
            let dims: Vec<usize> = (0..=r as i32).map(|d| kos.dim_at(d)).collect();
            let expected: Vec<usize> = (0..=r).map(|d| binomial(r, d)).collect();
            if dims != expected {
                shape_fail.push(format!("H#{}: dims {:?} vs {:?}", hi, dims, expected));
                continue;
            }
            if !kos.is_acyclic() {
                shape_fail.push(format!("H#{}: not acyclic", hi));
            }
            let unit = trivial_module(&g, p);
            if !kos.term(0).unwrap().same_matrices(&unit) {
                shape_fail.push(format!("H#{}: degree-0 term is not the unit", hi));
            }
            let deg1 = coset_module(&g, h, p);
            if !kos.term(1).unwrap().same_matrices(&deg1) {
                shape_fail.push(format!("H#{}: degree-1 term is not k(G/H)", hi));
            }
        }
        let instance = format!("G={} p={}", spec, p);
        out.push(if shape_fail.is_empty() {
            CheckResult::pass("koszul-shape", instance.clone(), format!("{} subgroups", subs.len()))
        } else {
            CheckResult::fail(
                "koszul-shape",
                instance.clone(),
                shape_fail.join("; "),
                repro("koszul"),
            )
        });
        // Restriction: factorization dims + contractibility pattern.
        let cases: Vec<(usize, usize)> = (0..subs.len())
            .flat_map(|i| (0..subs.len()).map(move |j| (i, j)))
            .collect();
        let rest_fail: Vec<String> = pool.install(|| {
            cases
                .par_iter()
                .filter_map(|&(hi, ki)| {
                    let h = &subs[hi];
                    let k = &subs[ki];
                    let kos = koszul(&g, h, p, 12).unwrap();
                    let res = res_koszul(&kos, k).unwrap();
                    // tensor factorization over K\G/H
                    let kg = k.as_group(g.order()).unwrap();
                    let mut tensor = Complex::unit(&kg, p);
                    for rep in crate::group::double_coset_reps(&g, k, h) {
                        let l_elems: std::collections::BTreeSet<usize> = k
                            .elements()
                            .iter()
                            .copied()
                            .filter(|&x| h.contains(g.conj(x, rep)))
                            .map(|x| kg.index_of(g.element(x)).unwrap())
                            .collect();
                        let l = Subgroup::from_element_set(&kg, &l_elems);
                        let factor = koszul(&kg, &l, p, 12).unwrap();
                        tensor = tensor_complexes(&tensor, &factor).unwrap();
                    }
                    if res.graded_dims() != tensor.graded_dims() {
                        return Some(format!(
                            "H#{} K#{}: restriction dims {:?} vs factorization {:?}",
                            hi,
                            ki,
                            res.graded_dims(),
                            tensor.graded_dims()
                        ));
                    }
                    let res_contract = is_contractible(&res);
                    let tensor_contract = is_contractible(&tensor);
                    if res_contract != tensor_contract {
                        return Some(format!(
                            "H#{} K#{}: contractibility disagrees between restriction and factorization",
                            hi, ki
                        ));
                    }
                    let sub = is_subconjugate(&g, k, h);
                    if sub && !res_contract {
                        return Some(format!(
                            "H#{} K#{}: K subconjugate to H but restriction not contractible",
                            hi, ki
                        ));
                    }
                    if k.is_p_subgroup(p) && !sub && res_contract {
                        return Some(format!(
                            "H#{} K#{}: p-subgroup K not subconjugate but restriction contractible",
                            hi, ki
                        ));
                    }
                    None
                })
                .collect()
        });
        out.push(if rest_fail.is_empty() {
            CheckResult::pass(
                "koszul-restriction",
                instance.clone(),
                format!("{} (H,K) pairs", cases.len()),
            )
        } else {
            CheckResult::fail(
                "koszul-restriction",
                instance.clone(),
                rest_fail.join("; "),
                repro("koszul"),
            )
        });
        // Inflation: s(N;G) equals the inflated quotient object, matrix for
        // matrix, for normal N.
        let mut infl_fail = Vec::new();
        let mut infl_count = 0;
        for (ni, n) in subs.iter().enumerate() {
            if !n.is_normal() || n.is_trivial() {
                continue;
            }
            infl_count += 1;
            let wd = weyl_group(&g, n);
            let q = &wd.weyl;
            let kos_g = koszul(&g, n, p, 12).unwrap();
            let kos_q = koszul(q, &Subgroup::trivial(q), p, 12).unwrap();
            let inflated = map_complex(&ComplexFunctor::Infl(&g, &wd), &kos_q).unwrap();
            let mut ok = inflated.graded_dims() == kos_g.graded_dims();
            if ok {
                for d in kos_g.degrees() {
                    if inflated.diff(d) != kos_g.diff(d) {
                        ok = false;
                    }
                    if !inflated
                        .term(d)
                        .unwrap()
                        .same_matrices(kos_g.term(d).unwrap())
                    {
                        ok = false;
                    }
                }
            }
            if !ok {
                infl_fail.push(format!("N#{}: inflated object differs", ni));
            }
        }
        out.push(if infl_fail.is_empty() {
            CheckResult::pass(
                "koszul-inflation",
                instance,
                format!("{} normal subgroups", infl_count),
            )
        } else {
            CheckResult::fail("koszul-inflation", instance, infl_fail.join("; "), repro("koszul"))
        });
    }
    Ok(out)
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let mut r = 1usize;
    for i in 0..k.min(n - k) {
        r = r * (n - i) / (i + 1);
    }
    r
}

// ---------------------------------------------------------------------------
// brauer
// ---------------------------------------------------------------------------

fn suite_brauer(cfg: &SuiteConfig) -> Result<Vec<CheckResult>, String> {
    let instances = instances(BRAUER_GROUPS, cfg, true)?;
    let pool = pool(cfg);
    let mut out = Vec::new();
    let mut oracle_samples_total = 0usize;
    for (spec, g, p) in &instances {
        let g = Arc::clone(g);
        let p = *p;
        let instance = format!("G={} p={}", spec, p);
        let repro = format!("ttperm verify --group '{}' --char {} --suite brauer", spec, p);
        let p_classes = p_classes_with_weyl(&g, p);
        let subs = subgroup_classes(&g);
        // Fixed-points formula on all (H, K) pairs.
        let cases: Vec<(usize, usize)> = (0..p_classes.len())
            .flat_map(|i| (0..subs.len()).map(move |j| (i, j)))
            .collect();
        let fails: Vec<String> = pool.install(|| {
            cases
                .par_iter()
                .filter_map(|&(i, j)| {
                    let (h, wd) = &p_classes[i];
                    let k = &subs[j];
                    let m = coset_module(&g, k, p);
                    let (b, _) = brauer(&m, h, wd).unwrap();
                    let expected = transporter(&g, h, k).len() / k.order();
                    if b.dim() != expected {
                        return Some(format!(
                            "H#{} K#{}: fixed module dim {} vs {}",
                            i,
                            j,
                            b.dim(),
                            expected
                        ));
                    }
                    if (b.dim() > 0) != is_subconjugate(&g, h, k) {
                        return Some(format!("H#{} K#{}: nonzero/subconjugate mismatch", i, j));
                    }
                    None
                })
                .collect()
        });
        out.push(if fails.is_empty() {
            CheckResult::pass(
                "fixed-points-formula",
                instance.clone(),
                format!("{} (H,K) pairs", cases.len()),
            )
        } else {
            CheckResult::fail(
                "fixed-points-formula",
                instance.clone(),
                fails.join("; "),
                repro.clone(),
            )
        });
        // Oracle agreement on random morphisms.
        let samples = 40usize;
        let sample_fails: Vec<String> = pool.install(|| {
            (0..samples)
                .into_par_iter()
                .filter_map(|s| {
                    let mut rng =
                        ChaCha8Rng::seed_from_u64(cfg.seed ^ (s as u64) << 8 ^ hash_str(&instance));
                    let (h, wd) = &p_classes[rng.gen_range(0..p_classes.len())];
                    let m = random_module(&g, p, &subs, &mut rng);
                    let n = random_module(&g, p, &subs, &mut rng);
                    let basis = hom_space_basis(&m, &n).unwrap();
                    let mut f = Morphism::zero(&m, &n);
                    for b in &basis {
                        let c = rng.gen_range(0..p);
                        if c != 0 {
                            f = f.add(&b.scale(c));
                        }
                    }
                    let dom_oracle = match brauer_oracle(&m, h, wd) {
                        Ok(o) => o,
                        Err(e) => return Some(format!("sample {}: domain oracle: {}", s, e)),
                    };
                    let cod_oracle = match brauer_oracle(&n, h, wd) {
                        Ok(o) => o,
                        Err(e) => return Some(format!("sample {}: codomain oracle: {}", s, e)),
                    };
                    let corner = brauer_map(&f, h, wd).unwrap();
                    let induced = oracle_induced_map(&f, &dom_oracle, &cod_oracle);
                    let lhs = cod_oracle.corner_to_coker.mul(&corner.matrix);
                    let rhs = induced.mul(&dom_oracle.corner_to_coker);
                    if lhs != rhs {
                        Some(format!("sample {}: corner disagrees with quotient oracle", s))
                    } else {
                        None
                    }
                })
                .collect()
        });
        oracle_samples_total += samples;
        out.push(if sample_fails.is_empty() {
            CheckResult::pass(
                "brauer-oracle",
                instance.clone(),
                format!("{} random morphisms, seed {}", samples, cfg.seed),
            )
        } else {
            CheckResult::fail(
                "brauer-oracle",
                instance.clone(),
                sample_fails.join("; "),
                format!("{} --seed {}", repro, cfg.seed),
            )
        });
        // Fixed points after inflation are the identity, on objects and
        // morphisms, for normal p-subgroups.
        let mut infl_fail = Vec::new();
        let mut infl_cases = 0usize;
        for (h, wd) in &p_classes {
            if h.is_trivial() || !h.is_normal() {
                continue;
            }
            let q = &wd.weyl;
            let q_subs = subgroup_classes(q);
            for kq in &q_subs {
                infl_cases += 1;
                let m = coset_module(q, kq, p);
                let inflated = infl_module(&m, &g, wd).unwrap();
                let (bk, _) = brauer(&inflated, h, wd).unwrap();
                if !bk.same_matrices(&m) {
                    infl_fail.push(format!(
                        "H order {} K dim {}: object not recovered",
                        h.order(),
                        m.dim()
                    ));
                }
            }
            for (k1, k2) in small_pairs(&q_subs, 3) {
                let m1 = coset_module(q, &q_subs[k1], p);
                let m2 = coset_module(q, &q_subs[k2], p);
                for f in hom_space_basis(&m1, &m2).unwrap() {
                    infl_cases += 1;
                    let fi = infl_map(&f, &g, wd).unwrap();
                    let back = brauer_map(&fi, h, wd).unwrap();
                    if back.matrix != f.matrix {
                        infl_fail.push(format!("H order {}: morphism not recovered", h.order()));
                    }
                }
            }
        }
        out.push(if infl_fail.is_empty() {
            CheckResult::pass(
                "psi-infl-identity",
                instance.clone(),
                format!("{} cases", infl_cases),
            )
        } else {
            CheckResult::fail(
                "psi-infl-identity",
                instance.clone(),
                infl_fail.join("; "),
                repro.clone(),
            )
        });
        // Naturality squares along inclusions and quotients.
        out.push(naturality_inclusions(&g, p, &instance, &repro, &subs));
        out.push(naturality_quotients(&g, p, &instance, &repro, &p_classes));
        // Composition of nested fixed points.
        out.push(composition_square(&g, p, &instance, &repro, &p_classes, &subs));
        // Monoidality.
        let mut mono_fail = Vec::new();
        let mut mono_cases = 0usize;
        for (h, wd) in &p_classes {
            for (i, j) in small_pairs(&subs, 4) {
                mono_cases += 1;
                let a = coset_module(&g, &subs[i], p);
                let b = coset_module(&g, &subs[j], p);
                let t = tensor_modules(&a, &b).unwrap();
                let (bt, _) = brauer(&t, h, wd).unwrap();
                let (ba, _) = brauer(&a, h, wd).unwrap();
                let (bb, _) = brauer(&b, h, wd).unwrap();
                if !bt.same_matrices(&tensor_modules(&ba, &bb).unwrap()) {
                    mono_fail.push(format!("H order {} K#{} K#{}", h.order(), i, j));
                    continue;
                }
                // and on morphisms
                let fa = hom_space_basis(&a, &a).unwrap();
                if let Some(f) = fa.last() {
                    let fb = Morphism::identity(&b);
                    let tf = tensor_morphisms(f, &fb).unwrap();
                    let lhs = brauer_map(&tf, h, wd).unwrap();
                    let rhs = tensor_morphisms(
                        &brauer_map(f, h, wd).unwrap(),
                        &brauer_map(&fb, h, wd).unwrap(),
                    )
                    .unwrap();
                    if lhs.matrix != rhs.matrix {
                        mono_fail.push(format!("H order {}: morphism tensor", h.order()));
                    }
                }
            }
        }
        out.push(if mono_fail.is_empty() {
            CheckResult::pass("psi-monoidal", instance.clone(), format!("{} cases", mono_cases))
        } else {
            CheckResult::fail("psi-monoidal", instance.clone(), mono_fail.join("; "), repro.clone())
        });
        // Zero composites through small cosets under a normal p-subgroup.
        let mut zc_fail = Vec::new();
        let mut zc_cases = 0usize;
        for (n, _) in &p_classes {
            if n.is_trivial() || !n.is_normal() {
                continue;
            }
            let unit = trivial_module(&g, p);
            for h in subs.iter().filter(|s| n.elements().iter().all(|&e| s.contains(e))) {
                for k in subs.iter().filter(|s| !n.elements().iter().all(|&e| s.contains(e))) {
                    let hm = coset_module(&g, h, p);
                    let km = coset_module(&g, k, p);
                    for f in hom_space_basis(&hm, &km).unwrap() {
                        for m in hom_space_basis(&km, &unit).unwrap() {
                            zc_cases += 1;
                            if !m.compose(&f).is_zero() {
                                zc_fail.push(format!(
                                    "N order {} H order {} K order {}",
                                    n.order(),
                                    h.order(),
                                    k.order()
                                ));
                            }
                        }
                    }
                }
            }
        }
        out.push(if zc_fail.is_empty() {
            CheckResult::pass("zero-composites", instance.clone(), format!("{} composites", zc_cases))
        } else {
            CheckResult::fail("zero-composites", instance, zc_fail.join("; "), repro)
        });
    }
    out.push(CheckResult::pass(
        "brauer-oracle-total",
        "all groups".into(),
        format!("{} random morphisms sampled in total", oracle_samples_total),
    ));
    Ok(out)
}

fn hash_str(s: &str) -> u64 {
    s.bytes().fold(1469598103934665603u64, |h, b| {
        (h ^ b as u64).wrapping_mul(1099511628211)
    })
}

fn random_module<R: Rng>(
    g: &Arc<Group>,
    p: u32,
    subs: &[Subgroup],
    rng: &mut R,
) -> PermModule {
    let count = rng.gen_range(1..=2);
    let parts: Vec<PermModule> = (0..count)
        .map(|_| coset_module(g, &subs[rng.gen_range(0..subs.len())], p))
        .collect();
    let refs: Vec<&PermModule> = parts.iter().collect();
    direct_sum(&refs).0
}

/// Pairs of class indices whose coset spaces stay small, to bound the
/// morphism-level sweeps.
fn small_pairs(subs: &[Subgroup], max_each: usize) -> Vec<(usize, usize)> {
    let picked: Vec<usize> = (0..subs.len()).take(max_each.max(subs.len().min(max_each))).collect();
    let mut out = Vec::new();
    for &i in picked.iter().take(max_each) {
        for &j in picked.iter().take(max_each) {
            out.push((i, j));
        }
    }
    out
}

fn naturality_inclusions(
    g: &Arc<Group>,
    p: u32,
    instance: &str,
    repro: &str,
    subs: &[Subgroup],
) -> CheckResult {
    let mut fails = Vec::new();
    let mut cases = 0usize;
    for a_sub in subs {
        let ag = match a_sub.as_group(g.order()) {
            Ok(ag) => ag,
            Err(e) => return CheckResult::fail("psi-naturality-incl", instance.into(), e.to_string(), repro.into()),
        };
        for h_in_a in p_subgroups_up_to_conj(&ag, p) {
            // H as a subgroup of G.
            let h_elems: std::collections::BTreeSet<usize> = h_in_a
                .elements()
                .iter()
                .map(|&i| g.index_of(ag.element(i)).unwrap())
                .collect();
            let h_g = Subgroup::from_element_set(g, &h_elems);
            let wd_a = weyl_group(&ag, &h_in_a);
            let wd_g = weyl_group(g, &h_g);
            // homomorphism W_A(H) → W_G(H)
            let phi: Vec<usize> = (0..wd_a.weyl.order())
                .map(|w| {
                    let n_a = wd_a.preimage_rep(w);
                    let n_g = g.index_of(ag.element(n_a)).unwrap();
                    wd_g.project(n_g)
                })
                .collect();
            for k in subs.iter() {
                cases += 1;
                let m = coset_module(g, k, p);
                let lhs = {
                    let res = res_module(&m, &ag).unwrap();
                    brauer(&res, &h_in_a, &wd_a).unwrap().0
                };
                let rhs = {
                    let (bm, _) = brauer(&m, &h_g, &wd_g).unwrap();
                    restrict_along(&bm, &wd_a.weyl, &phi).unwrap()
                };
                if !lhs.same_matrices(&rhs) {
                    fails.push(format!(
                        "A order {} H order {} K order {}",
                        a_sub.order(),
                        h_g.order(),
                        k.order()
                    ));
                }
            }
            // One morphism per (K1, K2) small pair.
            for (i, j) in small_pairs(subs, 3) {
                if g.order() / subs[i].order() > 8 || g.order() / subs[j].order() > 8 {
                    continue;
                }
                for rep in crate::group::double_coset_reps(g, &subs[i], &subs[j]).into_iter().take(2)
                {
                    cases += 1;
                    let f = standard_morphism(g, &subs[i], &subs[j], rep, p).unwrap();
                    let lhs = {
                        let rf = res_map(&f, &ag).unwrap();
                        brauer_map(&rf, &h_in_a, &wd_a).unwrap()
                    };
                    let rhs = {
                        let bf = brauer_map(&f, &h_g, &wd_g).unwrap();
                        restrict_along_map(&bf, &wd_a.weyl, &phi).unwrap()
                    };
                    if lhs.matrix != rhs.matrix {
                        fails.push(format!(
                            "morphism A order {} H order {}",
                            a_sub.order(),
                            h_g.order()
                        ));
                    }
                }
            }
        }
    }
    if fails.is_empty() {
        CheckResult::pass("psi-naturality-incl", instance.into(), format!("{} cases", cases))
    } else {
        CheckResult::fail("psi-naturality-incl", instance.into(), fails.join("; "), repro.into())
    }
}

fn naturality_quotients(
    g: &Arc<Group>,
    p: u32,
    instance: &str,
    repro: &str,
    p_classes: &[(Subgroup, WeylData)],
) -> CheckResult {
    let mut fails = Vec::new();
    let mut cases = 0usize;
    for (n, wd_n) in p_classes {
        if n.is_trivial() || !n.is_normal() {
            continue;
        }
        let q = &wd_n.weyl;
        let q_subs = subgroup_classes(q);
        for (h, wd_h) in p_classes {
            // image of H in Q
            let h_img: std::collections::BTreeSet<usize> =
                h.elements().iter().map(|&e| wd_n.project(e)).collect();
            let h_q = Subgroup::from_element_set(q, &h_img);
            let wd_hq = weyl_group(q, &h_q);
            // homomorphism W_G(H) → W_Q(H')
            let phi: Vec<usize> = (0..wd_h.weyl.order())
                .map(|w| {
                    let n_g = wd_h.preimage_rep(w);
                    wd_hq.project(wd_n.project(n_g))
                })
                .collect();
            for kq in &q_subs {
                cases += 1;
                let m = coset_module(q, kq, p);
                let lhs = {
                    let infl = infl_module(&m, g, wd_n).unwrap();
                    brauer(&infl, h, wd_h).unwrap().0
                };
                let rhs = {
                    let (bm, _) = brauer(&m, &h_q, &wd_hq).unwrap();
                    restrict_along(&bm, &wd_h.weyl, &phi).unwrap()
                };
                if !lhs.same_matrices(&rhs) {
                    fails.push(format!(
                        "N order {} H order {} K dim {}",
                        n.order(),
                        h.order(),
                        m.dim()
                    ));
                }
            }
        }
    }
    if fails.is_empty() {
        CheckResult::pass("psi-naturality-quot", instance.into(), format!("{} cases", cases))
    } else {
        CheckResult::fail("psi-naturality-quot", instance.into(), fails.join("; "), repro.into())
    }
}

fn composition_square(
    g: &Arc<Group>,
    p: u32,
    instance: &str,
    repro: &str,
    p_classes: &[(Subgroup, WeylData)],
    subs: &[Subgroup],
) -> CheckResult {
    let mut fails = Vec::new();
    let mut cases = 0usize;
    for (h, wd_h) in p_classes {
        let w = &wd_h.weyl;
        // p-subgroups K with H ≤ K ≤ N_G(H).
        let ng = match wd_h.normalizer.as_group(g.order()) {
            Ok(x) => x,
            Err(e) => {
                return CheckResult::fail(
                    "psi-composition",
                    instance.into(),
                    e.to_string(),
                    repro.into(),
                )
            }
        };
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
            // K/H inside W.
            let kbar_elems: std::collections::BTreeSet<usize> =
                k.elements().iter().map(|&e| wd_h.project(e)).collect();
            let kbar = Subgroup::from_element_set(w, &kbar_elems);
            let wd_kbar = weyl_group(w, &kbar);
            let wd_k = weyl_group(g, &k);
            // inclusion W_W(K/H) → W_G(K)
            let iota: Vec<usize> = (0..wd_kbar.weyl.order())
                .map(|wp| {
                    let wbar = wd_kbar.preimage_rep(wp); // element of W
                    let n_g = wd_h.preimage_rep(wbar); // element of N_G(H)
                    wd_k.project(n_g)
                })
                .collect();
            for kk in subs.iter().take(4) {
                cases += 1;
                let m = coset_module(g, kk, p);
                let lhs = {
                    let (bm, _) = brauer(&m, h, wd_h).unwrap();
                    brauer(&bm, &kbar, &wd_kbar).unwrap().0
                };
                let rhs = {
                    let (bm, _) = brauer(&m, &k, &wd_k).unwrap();
                    restrict_along(&bm, &wd_kbar.weyl, &iota).unwrap()
                };
                if !lhs.same_matrices(&rhs) {
                    fails.push(format!(
                        "H order {} K order {} object dim {}",
                        h.order(),
                        k.order(),
                        m.dim()
                    ));
                }
            }
            // one morphism check
            if g.order() / subs[0].order() <= 8 {
                let m = coset_module(g, &subs[0], p);
                for f in hom_space_basis(&m, &m).unwrap().into_iter().take(2) {
                    cases += 1;
                    let lhs = {
                        let b1 = brauer_map(&f, h, wd_h).unwrap();
                        brauer_map(&b1, &kbar, &wd_kbar).unwrap()
                    };
                    let rhs = {
                        let b1 = brauer_map(&f, &k, &wd_k).unwrap();
                        restrict_along_map(&b1, &wd_kbar.weyl, &iota).unwrap()
                    };
                    if lhs.matrix != rhs.matrix {
                        fails.push(format!("morphism H order {} K order {}", h.order(), k.order()));
                    }
                }
            }
        }
    }
    if fails.is_empty() {
        CheckResult::pass("psi-composition", instance.into(), format!("{} cases", cases))
    } else {
        CheckResult::fail("psi-composition", instance.into(), fails.join("; "), repro.into())
    }
}

// ---------------------------------------------------------------------------
// nilpotence
// ---------------------------------------------------------------------------

fn suite_nilpotence(cfg: &SuiteConfig) -> Result<Vec<CheckResult>, String> {
    let instances: Vec<(String, Arc<Group>, u32)> = match &cfg.group {
        Some(spec) => {
            let g = parse_group_spec(spec, cfg.max_order).map_err(|e| e.to_string())?;
            let p = cfg
                .p
                .or_else(|| primes_dividing(g.order()).first().copied())
                .ok_or("no modular characteristic for this group")?;
            vec![(spec.clone(), g, p)]
        }
        None => P_GROUPS_LE_16
            .iter()
            .map(|&(spec, p)| {
                parse_group_spec(spec, cfg.max_order)
                    .map(|g| (spec.to_string(), g, p))
                    .map_err(|e| e.to_string())
            })
            .collect::<Result<Vec<_>, _>>()?,
    };
    let pool = pool(cfg);
    let mut out = Vec::new();
    for (spec, g, p) in instances {
        let instance = format!("G={} p={}", spec, p);
        if !is_p_group(&g, p) {
            return Err(format!("{} is not a {}-group", spec, p));
        }
        let subs = all_subgroups(&g);
        let fails: Vec<String> = pool.install(|| {
            subs.par_iter()
                .enumerate()
                .filter_map(|(i, h)| {
                    let wd = weyl_group(&g, h);
                    let data = match end_psi_data(&g, h, &wd, p) {
                        Ok(d) => d,
                        Err(e) => return Some(format!("H#{}: {}", i, e)),
                    };
                    if !data.surjective {
                        return Some(format!("H#{}: induced map not surjective", i));
                    }
                    // Kernel basis must be exactly the non-normalizing reps
                    // (end_psi_data already asserts images vanish there).
                    let expected_kernel = data.hom_basis.len() - wd.order();
                    if data.kernel_reps.len() != expected_kernel {
                        return Some(format!(
                            "H#{}: kernel count {} vs {}",
                            i,
                            data.kernel_reps.len(),
                            expected_kernel
                        ));
                    }
                    if data.nilpotency_index > data.loewy_length {
                        return Some(format!(
                            "H#{}: nilpotency index {} exceeds Loewy length {}",
                            i, data.nilpotency_index, data.loewy_length
                        ));
                    }
                    None
                })
                .collect()
        });
        out.push(if fails.is_empty() {
            CheckResult::pass(
                "end-nilpotence",
                instance,
                format!("{} subgroups", subs.len()),
            )
        } else {
            CheckResult::fail(
                "end-nilpotence",
                instance,
                fails.join("; "),
                format!("ttperm verify --group '{}' --char {} --suite nilpotence", spec, p),
            )
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// conservativity (and stripping)
// ---------------------------------------------------------------------------

fn suite_conservativity(cfg: &SuiteConfig) -> Result<Vec<CheckResult>, String> {
    let specs: Vec<String> = match &cfg.group {
        Some(s) => vec![s.clone()],
        None => CONSERVATIVITY_GROUPS.iter().map(|s| s.to_string()).collect(),
    };
    let p = cfg.p.unwrap_or(2);
    let pool = pool(cfg);
    let mut out = Vec::new();
    for spec in &specs {
        let g = parse_group_spec(spec, cfg.max_order).map_err(|e| e.to_string())?;
        let classes = p_classes_with_weyl(&g, p);
        let n_samples = 200usize;
        let cfg_rc = RandomComplexCfg::default();
        let instance = format!("G={} p={} seed={}", spec, p, cfg.seed);
        let fails: Vec<String> = pool.install(|| {
            (0..n_samples)
                .into_par_iter()
                .filter_map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        cfg.seed ^ ((i as u64) << 16) ^ hash_str(spec),
                    );
                    let x = random_bounded_complex(&g, p, &cfg_rc, &mut rng);
                    let profile = conservativity_profile(&x, &classes).unwrap();
                    let witness = contraction(&x);
                    match (profile.is_empty(), witness) {
                        (true, Some(h)) => {
                            // verify the contraction exactly
                            let id = ChainMap::identity(&x);
                            if verify_homotopy(&id, &h) {
                                None
                            } else {
                                Some(format!("sample {}: contraction fails re-verification", i))
                            }
                        }
                        (false, None) => None,
                        (true, None) => Some(format!(
                            "sample {}: empty profile but no contraction (dims {:?})",
                            i,
                            x.graded_dims()
                        )),
                        (false, Some(_)) => Some(format!(
                            "sample {}: contractible but profile nonempty",
                            i
                        )),
                    }
                })
                .collect()
        });
        out.push(if fails.is_empty() {
            CheckResult::pass("conservativity", instance, format!("{} samples", n_samples))
        } else {
            CheckResult::fail(
                "conservativity",
                instance,
                fails.join("; "),
                format!(
                    "ttperm verify --group '{}' --char {} --suite conservativity --seed {}",
                    spec, p, cfg.seed
                ),
            )
        });
    }
    // Stripping of seeded fixed-point-contractible complexes.
    let strip_specs: Vec<String> = match &cfg.group {
        Some(s) => vec![s.clone()],
        None => STRIP_GROUPS.iter().map(|s| s.to_string()).collect(),
    };
    for spec in &strip_specs {
        let g = parse_group_spec(spec, cfg.max_order).map_err(|e| e.to_string())?;
        if !is_p_group(&g, p) {
            continue;
        }
        let full = Subgroup::full(&g);
        let wd = weyl_group(&g, &full);
        let n_samples = 25usize;
        let instance = format!("G={} p={} seed={}", spec, p, cfg.seed);
        let fails: Vec<String> = pool.install(|| {
            (0..n_samples)
                .into_par_iter()
                .filter_map(|i| {
                    let mut rng = ChaCha8Rng::seed_from_u64(
                        cfg.seed ^ ((i as u64) << 24) ^ hash_str(spec),
                    );
                    let x = random_full_strippable_complex(&g, p, &mut rng);
                    let res = match strip(&x, &full, &wd) {
                        Ok(r) => r,
                        Err(e) => return Some(format!("sample {}: {}", i, e)),
                    };
                    // no full-isotypic summand remains
                    for d in res.reduced.degrees() {
                        if res.reduced.dim_at(d) == 0 {
                            continue;
                        }
                        for orbit in crate::gset::orbits(res.reduced.term(d).unwrap().basis()) {
                            if orbit.stabilizer.order() == g.order() {
                                return Some(format!(
                                    "sample {}: full-isotypic summand survives at degree {}",
                                    i, d
                                ));
                            }
                        }
                    }
                    // witnesses are exact
                    let fg = res.to_reduced.compose(&res.from_reduced);
                    for (&dd, m) in &fg.comps {
                        if *m != FpMatrix::identity(p, res.reduced.dim_at(dd)) {
                            return Some(format!("sample {}: f∘g is not the identity", i));
                        }
                    }
                    let gf = res.from_reduced.compose(&res.to_reduced);
                    let id = ChainMap::identity(&x);
                    let mut delta = std::collections::BTreeMap::new();
                    for d in x.degrees() {
                        let m = gf.comp(d).sub(&id.comp(d));
                        if !m.is_zero() {
                            delta.insert(d, m);
                        }
                    }
                    let target = ChainMap {
                        source: x.clone(),
                        target: x.clone(),
                        comps: delta,
                    };
                    if !verify_homotopy(&target, &res.homotopy) {
                        return Some(format!("sample {}: dh+hd ≠ g∘f - id", i));
                    }
                    None
                })
                .collect()
        });
        out.push(if fails.is_empty() {
            CheckResult::pass("stripping", instance, format!("{} samples", n_samples))
        } else {
            CheckResult::fail(
                "stripping",
                instance,
                fails.join("; "),
                format!(
                    "ttperm object strip --group '{}' --char {} --seed {}",
                    spec, p, cfg.seed
                ),
            )
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// functors (Mackey, standard basis, fixed points of Koszul objects)
// ---------------------------------------------------------------------------

fn suite_functors(cfg: &SuiteConfig) -> Result<Vec<CheckResult>, String> {
    let instances = instances(GROUPS_LE_8, cfg, true)?;
    let pool = pool(cfg);
    let mut out = Vec::new();
    for (spec, g, p) in instances {
        let instance = format!("G={} p={}", spec, p);
        let repro = format!("ttperm verify --group '{}' --char {} --suite functors", spec, p);
        let subs = subgroup_classes(&g);
        // Standard morphisms: independent and spanning.
        let mut fg_fail = Vec::new();
        for (i, h) in subs.iter().enumerate() {
            for (j, k) in subs.iter().enumerate() {
                let reps = crate::group::double_coset_reps(&g, h, k);
                let flats: Vec<Vec<u32>> = reps
                    .iter()
                    .map(|&r| standard_morphism(&g, h, k, r, p).unwrap().matrix.flatten())
                    .collect();
                let rank = FpMatrix::from_rows(p, &flats).rank();
                if rank != reps.len() {
                    fg_fail.push(format!("H#{} K#{}: rank {} vs {}", i, j, rank, reps.len()));
                    continue;
                }
                let hm = coset_module(&g, h, p);
                let km = coset_module(&g, k, p);
                if hom_space_dim(&hm, &km).unwrap() != reps.len() {
                    fg_fail.push(format!("H#{} K#{}: span defect", i, j));
                }
            }
        }
        out.push(if fg_fail.is_empty() {
            CheckResult::pass("fg-basis", instance.clone(), format!("{} pairs", subs.len() * subs.len()))
        } else {
            CheckResult::fail("fg-basis", instance.clone(), fg_fail.join("; "), repro.clone())
        });
        // Mackey orbit types of restrictions.
        let mut mk_fail = Vec::new();
        for h in &subs {
            let kg = h.as_group(g.order()).map_err(|e| e.to_string())?;
            for k in &subs {
                let m = coset_module(&g, k, p);
                let r = res_module(&m, &kg).unwrap();
                let mut orbit_sizes: Vec<usize> = crate::gset::orbits(r.basis())
                    .iter()
                    .map(|o| o.points.len())
                    .collect();
                orbit_sizes.sort_unstable();
                let mut mackey: Vec<usize> = crate::group::double_cosets(&g, h, k)
                    .iter()
                    .map(|(_, members)| members.len() / k.order())
                    .collect();
                mackey.sort_unstable();
                if orbit_sizes != mackey {
                    mk_fail.push(format!("H order {} K order {}", h.order(), k.order()));
                }
            }
        }
        out.push(if mk_fail.is_empty() {
            CheckResult::pass("mackey-restriction", instance.clone(), format!("{} pairs", subs.len() * subs.len()))
        } else {
            CheckResult::fail("mackey-restriction", instance.clone(), mk_fail.join("; "), repro.clone())
        });
        // Fixed points of Koszul objects: split unit vs acyclicity by
        // subconjugacy.
        let p_classes = p_classes_with_weyl(&g, p);
        let cases: Vec<(usize, usize)> = (0..p_classes.len())
            .flat_map(|i| (0..subs.len()).map(move |j| (i, j)))
            .collect();
        let kfp_fails: Vec<String> = pool.install(|| {
            cases
                .par_iter()
                .filter_map(|&(i, j)| {
                    let (h, wd) = &p_classes[i];
                    let k = &subs[j];
                    let kos = koszul(&g, k, p, 12).unwrap();
                    let pk = map_complex(&ComplexFunctor::Psi(h, wd), &kos).unwrap();
                    if is_subconjugate(&g, h, k) {
                        if !pk.is_acyclic() {
                            return Some(format!(
                                "H#{} K#{}: subconjugate but fixed points not acyclic",
                                i, j
                            ));
                        }
                    } else {
                        match crate::spectrum::unit_splits_off(&pk) {
                            Ok(true) => {}
                            Ok(false) => {
                                return Some(format!(
                                    "H#{} K#{}: unit does not split off",
                                    i, j
                                ))
                            }
                            Err(e) => return Some(format!("H#{} K#{}: {}", i, j, e)),
                        }
                    }
                    None
                })
                .collect()
        });
        out.push(if kfp_fails.is_empty() {
            CheckResult::pass(
                "koszul-fixed-points",
                instance.clone(),
                format!("{} (H,K) pairs", cases.len()),
            )
        } else {
            CheckResult::fail(
                "koszul-fixed-points",
                instance.clone(),
                kfp_fails.join("; "),
                repro.clone(),
            )
        });
        // Degree-arithmetic generation bound.
        let mut gb_fail = Vec::new();
        let s = koszul(&g, &Subgroup::trivial(&g), p, 12).unwrap();
        for k in &subs {
            let kos = koszul(&g, k, p, 12).unwrap();
            let n = crate::homotopy::generation_bound(&s, &kos).unwrap();
            let amp = kos
                .amplitude()
                .map(|(lo, hi)| (hi - lo + 1) as usize)
                .unwrap_or(0);
            if n != amp.max(1) {
                gb_fail.push(format!("K order {}: bound {} vs amplitude {}", k.order(), n, amp));
            }
        }
        out.push(if gb_fail.is_empty() {
            CheckResult::pass("generation-bound", instance, format!("{} objects", subs.len()))
        } else {
            CheckResult::fail("generation-bound", instance, gb_fail.join("; "), repro)
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// tower
// ---------------------------------------------------------------------------

fn suite_tower(cfg: &SuiteConfig) -> Result<Vec<CheckResult>, String> {
    let cases: Vec<(String, String)> = match &cfg.group {
        Some(s) => vec![(s.clone(), "full".to_string())],
        None => vec![
            ("cyclic:2".to_string(), "full".to_string()),
            ("klein4".to_string(), "1".to_string()),
        ],
    };
    let p = cfg.p.unwrap_or(2);
    let mut out = Vec::new();
    for (spec, normal_name) in cases {
        let g = parse_group_spec(&spec, cfg.max_order).map_err(|e| e.to_string())?;
        let n = resolve_subgroup(&g, p, &normal_name).map_err(|e| e.to_string())?;
        let wd = weyl_group(&g, &n);
        let instance = format!("G={} N order {} p={}", spec, n.order(), p);
        let repro = format!(
            "ttperm object tower --group '{}' --char {} --normal {} --stages 3",
            spec, p, normal_name
        );
        let stages = match adjoint_tower(&g, &n, &wd, p, 3, 8192) {
            Ok(s) => s,
            Err(e) => {
                out.push(CheckResult::fail("tower-alpha", instance, e.to_string(), repro));
                continue;
            }
        };
        // s_1 must match the family of subgroups not containing N.
        let family_count = subgroup_classes(&g)
            .iter()
            .filter(|k| !n.elements().iter().all(|&e| k.contains(e)))
            .count();
        let s1_count = stages[0]
            .s_next_dims
            .as_ref()
            .map(|v| v.len())
            .unwrap_or(0);
        out.push(if s1_count == family_count {
            CheckResult::pass(
                "tower-s1",
                instance.clone(),
                format!("{} family summands", family_count),
            )
        } else {
            CheckResult::fail(
                "tower-s1",
                instance.clone(),
                format!("s1 has {} summands, family has {}", s1_count, family_count),
                repro.clone(),
            )
        });
        let mut alpha_fail = Vec::new();
        let mut alpha_count = 0usize;
        for (k, stage) in stages.iter().enumerate() {
            for chk in &stage.alpha_checks {
                alpha_count += 1;
                if !chk.bijective {
                    alpha_fail.push(format!(
                        "stage {} H order {} shift {}: {}→{} not bijective",
                        k, chk.subgroup_order, chk.shift, chk.source_dim, chk.target_dim
                    ));
                }
            }
        }
        out.push(if alpha_fail.is_empty() {
            CheckResult::pass(
                "tower-alpha",
                instance,
                format!("{} comparison maps over {} stages", alpha_count, stages.len()),
            )
        } else {
            CheckResult::fail("tower-alpha", instance, alpha_fail.join("; "), repro)
        });
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// spectrum-examples
// ---------------------------------------------------------------------------

fn suite_spectrum_examples(cfg: &SuiteConfig) -> Result<Vec<CheckResult>, String> {
    let mut out = Vec::new();
    let p = cfg.p.unwrap_or(2);
    // Cyclic posets and their maps.
    let mut cyc_fail = Vec::new();
    for n in 0..=4usize {
        let d = cyclic_spectrum(p, n);
        if d.points.len() != 2 * n + 1 {
            cyc_fail.push(format!("n={}: {} points", n, d.points.len()));
        }
        for i in 1..=n {
            if !d.has_edge(&format!("p{}", i), &format!("m{}", i - 1))
                || !d.has_edge(&format!("p{}", i), &format!("m{}", i))
            {
                cyc_fail.push(format!("n={}: V-closure of p{} broken", n, i));
            }
        }
        if d.edges.len() != 2 * n {
            cyc_fail.push(format!("n={}: {} edges", n, d.edges.len()));
        }
    }
    out.push(if cyc_fail.is_empty() {
        CheckResult::pass("cyclic-spectrum", format!("p={} n<=4", p), "5 posets".into())
    } else {
        CheckResult::fail(
            "cyclic-spectrum",
            format!("p={} n<=4", p),
            cyc_fail.join("; "),
            "ttperm verify --suite spectrum-examples".into(),
        )
    });
    let mut map_fail = Vec::new();
    for n in 1..=4usize {
        for i in 0..=n {
            if cyclic_maps(p, n, CyclicMapKind::Psi, i).is_err() {
                map_fail.push(format!("psi {} into {}", i, n));
            }
            if cyclic_maps(p, n, CyclicMapKind::Rho, i).is_err() {
                map_fail.push(format!("rho {} into {}", i, n));
            }
            let pi = cyclic_maps(p, n, CyclicMapKind::Pi, i);
            let psi = cyclic_maps(p, n, CyclicMapKind::Psi, i);
            match (pi, psi) {
                (Ok(pi), Ok(psi)) => {
                    for (a, b) in &psi {
                        let c = pi.iter().find(|(f, _)| f == b).map(|(_, t)| t);
                        if c != Some(a) {
                            map_fail.push(format!("pi∘psi ≠ id at n={} m={}", n, i));
                        }
                    }
                }
                _ => map_fail.push(format!("pi {} from {}", i, n)),
            }
        }
    }
    out.push(if map_fail.is_empty() {
        CheckResult::pass("cyclic-maps", format!("p={} n<=4", p), "all compositions".into())
    } else {
        CheckResult::fail(
            "cyclic-maps",
            format!("p={} n<=4", p),
            map_fail.join("; "),
            "ttperm verify --suite spectrum-examples".into(),
        )
    });
    // Strata dimensions for the worked groups.
    let mut strata_fail = Vec::new();
    {
        let v = parse_group_spec("klein4", cfg.max_order).map_err(|e| e.to_string())?;
        let d = enumerate_strata(&v, "klein4", 2).map_err(|e| e.to_string())?;
        let dims: Vec<usize> = d.strata.iter().map(|s| s.dim).collect();
        if dims != vec![2, 1, 1, 1, 0] {
            strata_fail.push(format!("klein4 dims {:?}", dims));
        }
        let q = parse_group_spec("q8", cfg.max_order).map_err(|e| e.to_string())?;
        let d = enumerate_strata(&q, "q8", 2).map_err(|e| e.to_string())?;
        let dims: Vec<usize> = d.strata.iter().map(|s| s.dim).collect();
        if dims != vec![1, 2, 1, 1, 1, 0] {
            strata_fail.push(format!("q8 dims {:?}", dims));
        }
        // characteristic prime to the order: a single point
        let c3 = parse_group_spec("cyclic:3", cfg.max_order).map_err(|e| e.to_string())?;
        let d = enumerate_strata(&c3, "cyclic:3", 2).map_err(|e| e.to_string())?;
        if d.strata.len() != 1 || d.points.len() != 1 {
            strata_fail.push("cyclic:3 at p=2 is not a single point".into());
        }
    }
    out.push(if strata_fail.is_empty() {
        CheckResult::pass("strata-dims", "klein4, q8, cyclic:3".into(), "3 groups".into())
    } else {
        CheckResult::fail(
            "strata-dims",
            "klein4, q8, cyclic:3".into(),
            strata_fail.join("; "),
            "ttperm spectrum --group q8 --char 2".into(),
        )
    });
    // Closed-point counts equal class counts for the test family.
    let mut cp_fail = Vec::new();
    for spec in GROUPS_LE_8 {
        let g = parse_group_spec(spec, cfg.max_order).map_err(|e| e.to_string())?;
        for p in primes_dividing(g.order()) {
            let pts = closed_points(&g, p);
            let classes = p_subgroups_up_to_conj(&g, p);
            if pts.len() != classes.len() {
                cp_fail.push(format!("{} p={}", spec, p));
            }
        }
    }
    out.push(if cp_fail.is_empty() {
        CheckResult::pass("closed-points", "groups of order <= 8".into(), "counts match classes".into())
    } else {
        CheckResult::fail(
            "closed-points",
            "groups of order <= 8".into(),
            cp_fail.join("; "),
            "ttperm verify --suite spectrum-examples".into(),
        )
    });
    // Koszul support tables and the closed-point shadow.
    let mut ks_fail = Vec::new();
    for spec in ["cyclic:4", "klein4", "q8", "sym:3"] {
        let g = parse_group_spec(spec, cfg.max_order).map_err(|e| e.to_string())?;
        for p in primes_dividing(g.order()) {
            let classes = p_classes_with_weyl(&g, p);
            for (ki, (k, _)) in classes.iter().enumerate() {
                let support = koszul_support(&g, k, p);
                let expected: Vec<usize> = classes
                    .iter()
                    .enumerate()
                    .filter(|(_, (h, _))| !is_subconjugate(&g, h, k))
                    .map(|(i, _)| i)
                    .collect();
                if support != expected {
                    ks_fail.push(format!("{} p={} K#{}: support table", spec, p, ki));
                }
                // membership in closed points: in M(H) iff H subconjugate to K
                let kos = koszul(&g, k, p, 12).unwrap();
                for (hi, (h, wd)) in classes.iter().enumerate() {
                    let member = membership_m(&kos, h, wd).unwrap();
                    if member != is_subconjugate(&g, h, k) {
                        ks_fail.push(format!(
                            "{} p={} K#{} H#{}: membership shadow",
                            spec, p, ki, hi
                        ));
                    }
                }
            }
        }
    }
    out.push(if ks_fail.is_empty() {
        CheckResult::pass(
            "koszul-support",
            "cyclic:4, klein4, q8, sym:3".into(),
            "tables and closed-point shadows".into(),
        )
    } else {
        CheckResult::fail(
            "koszul-support",
            "cyclic:4, klein4, q8, sym:3".into(),
            ks_fail.join("; "),
            "ttperm object support --group cyclic:4 --char 2 --koszul C2".into(),
        )
    });
    // Image of the fixed-points map vs support of the induced Koszul
    // tensor. The tensor grows multiplicatively with the family, so
    // instances over the dense guard are skipped, not failed.
    let mut im_fail = Vec::new();
    let mut im_checked = 0usize;
    let mut im_skipped = 0usize;
    for spec in ["cyclic:2", "cyclic:4", "klein4", "q8", "elab:2^3", "cyclic:8"] {
        let g = parse_group_spec(spec, cfg.max_order).map_err(|e| e.to_string())?;
        let p = 2;
        let classes = p_classes_with_weyl(&g, p);
        for (h, _) in classes.iter().filter(|(h, _)| h.is_normal()) {
            let (strata, flag) = psi_image(&g, h, p).map_err(|e| e.to_string())?;
            if flag != PsiImageFlag::Exact {
                im_fail.push(format!("{}: normal subgroup flagged inexact", spec));
                continue;
            }
            let t = match zul(&g, h, p, 4096) {
                Ok(t) => t,
                Err(crate::homotopy::HomotopyError::GuardExceeded(_)) => {
                    im_skipped += 1;
                    continue;
                }
                Err(e) => {
                    im_fail.push(format!("{}: {}", spec, e));
                    continue;
                }
            };
            im_checked += 1;
            let profile = object_support_profile(&t, &classes).map_err(|e| e.to_string())?;
            let support_strata: Vec<usize> = profile
                .iter()
                .enumerate()
                .filter(|(_, c)| **c != SupportClass::Out)
                .map(|(i, _)| i)
                .collect();
            if support_strata != strata {
                im_fail.push(format!(
                    "{} H order {}: image {:?} vs support {:?}",
                    spec,
                    h.order(),
                    strata,
                    support_strata
                ));
            }
        }
    }
    out.push(if im_fail.is_empty() {
        CheckResult::pass(
            "psi-image",
            "normal p-subgroups, order <= 8".into(),
            format!(
                "{} instances agree with the induced Koszul tensor support ({} over the dense guard skipped)",
                im_checked, im_skipped
            ),
        )
    } else {
        CheckResult::fail(
            "psi-image",
            "normal p-subgroups, order <= 8".into(),
            im_fail.join("; "),
            "ttperm verify --suite spectrum-examples".into(),
        )
    });
    // Named figures.
    let mut named_fail = Vec::new();
    match named_spectrum("klein4", 2) {
        Ok(d) => {
            if d.points.len() != 13 {
                named_fail.push(format!("klein4 inventory {}", d.points.len()));
            }
            let v = parse_group_spec("klein4", cfg.max_order).map_err(|e| e.to_string())?;
            if !crate::spectrum::edges_respect_subconjugacy(&v, &d) {
                named_fail.push("klein4 edge violates subconjugacy".into());
            }
        }
        Err(e) => named_fail.push(e.to_string()),
    }
    match named_spectrum("q8", 2) {
        Ok(d) => {
            if !d.has_edge("P", "M(Z)") {
                named_fail.push("q8 missing the single exit specialization".into());
            }
            let closed = d
                .points
                .iter()
                .filter(|pt| pt.kind == crate::spectrum::PointKind::Closed)
                .count();
            if closed != 6 {
                named_fail.push(format!("q8 closed points {}", closed));
            }
            if !d.has_edge("P(I)", "M(Q8)") {
                named_fail.push("q8 transported skeleton incomplete".into());
            }
        }
        Err(e) => named_fail.push(e.to_string()),
    }
    out.push(if named_fail.is_empty() {
        CheckResult::pass("named-figures", "klein4, q8".into(), "figures reproduced".into())
    } else {
        CheckResult::fail(
            "named-figures",
            "klein4, q8".into(),
            named_fail.join("; "),
            "ttperm spectrum --group q8 --char 2 --exact".into(),
        )
    });
    Ok(out)
}

// ---------------------------------------------------------------------------
// Subgroup resolution for the CLI
// ---------------------------------------------------------------------------

/// Resolves a subgroup argument: a canonical class index into the
/// p-subgroup classes, or one of the keywords `trivial`, `full`, `center`,
/// `C<n>` (first cyclic class of order n).
pub fn resolve_subgroup(g: &Arc<Group>, p: u32, name: &str) -> Result<Subgroup, String> {
    match name {
        "trivial" => Ok(Subgroup::trivial(g)),
        "full" => Ok(Subgroup::full(g)),
        "center" => Ok(crate::group::center(g)),
        other => {
            if let Ok(idx) = other.parse::<usize>() {
                let classes = p_subgroups_up_to_conj(g, p);
                return classes
                    .get(idx)
                    .cloned()
                    .ok_or_else(|| format!("class index {} out of range (0..{})", idx, classes.len()));
            }
            if let Some(ord) = other.strip_prefix('C').and_then(|s| s.parse::<usize>().ok()) {
                let classes = p_subgroups_up_to_conj(g, p);
                return classes
                    .iter()
                    .find(|s| {
                        s.order() == ord
                            && s.elements()
                                .iter()
                                .any(|&e| g.element_order(e) == ord)
                    })
                    .cloned()
                    .ok_or_else(|| format!("no cyclic class of order {}", ord));
            }
            Err(format!(
                "unknown subgroup '{}': use a class index, trivial, full, center or C<n>",
                other
            ))
        }
    }
}

/// One conservatively built strippable complex for the CLI strip command.
pub fn seeded_strippable(g: &Arc<Group>, p: u32, seed: u64) -> Complex {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    random_full_strippable_complex(g, p, &mut rng)
}

// ---------------------------------------------------------------------------

/// Convenience used by tests: all checks pass.
pub fn all_pass(results: &[CheckResult]) -> bool {
    results.iter().all(|c| c.pass)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_cfg() -> SuiteConfig {
        SuiteConfig {
            group: Some("cyclic:4".into()),
            p: Some(2),
            ..Default::default()
        }
    }

    #[test]
    fn hom_dims_on_one_group() {
        let r = run_suite("hom-dims", &quick_cfg()).unwrap();
        assert!(all_pass(&r), "{:?}", r);
    }

    #[test]
    fn koszul_on_one_group() {
        let r = run_suite("koszul", &quick_cfg()).unwrap();
        assert!(all_pass(&r), "{:?}", r);
    }

    #[test]
    fn brauer_on_one_group() {
        let r = run_suite("brauer", &quick_cfg()).unwrap();
        assert!(all_pass(&r), "{:?}", r);
    }

    #[test]
    fn nilpotence_on_one_group() {
        let r = run_suite("nilpotence", &quick_cfg()).unwrap();
        assert!(all_pass(&r), "{:?}", r);
    }

    #[test]
    fn functors_on_one_group() {
        let r = run_suite("functors", &quick_cfg()).unwrap();
        assert!(all_pass(&r), "{:?}", r);
    }

    #[test]
    fn tower_quick() {
        let cfg = SuiteConfig {
            group: Some("cyclic:2".into()),
            p: Some(2),
            ..Default::default()
        };
        let r = run_suite("tower", &cfg).unwrap();
        assert!(all_pass(&r), "{:?}", r);
    }

    #[test]
    fn unknown_suite_is_an_error() {
        assert!(run_suite("nope", &SuiteConfig::default()).is_err());
    }

    #[test]
    fn resolve_subgroup_keywords() {
        let q = parse_group_spec("q8", 512).unwrap();
        assert_eq!(resolve_subgroup(&q, 2, "trivial").unwrap().order(), 1);
        assert_eq!(resolve_subgroup(&q, 2, "full").unwrap().order(), 8);
        assert_eq!(resolve_subgroup(&q, 2, "center").unwrap().order(), 2);
        assert_eq!(resolve_subgroup(&q, 2, "C4").unwrap().order(), 4);
        assert_eq!(resolve_subgroup(&q, 2, "0").unwrap().order(), 1);
        assert_eq!(resolve_subgroup(&q, 2, "1").unwrap().order(), 2);
        assert_eq!(resolve_subgroup(&q, 2, "5").unwrap().order(), 8);
        assert!(resolve_subgroup(&q, 2, "C16").is_err());
    }
}
