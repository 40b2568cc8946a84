//! The tensor category of (signed) permutation modules over `F_p`.
//!
//! Modules carry a based G-set plus an optional sign function on
//! (generator, basis point) pairs; morphisms are concrete equivariant
//! matrices in the permutation basis. The modular fixed-points functor is
//! implemented as the H-fixed corner (on objects: the fixed-point basis
//! carrying the Weyl action; on morphisms: the fixed submatrix), and is
//! cross-validated against the module-level Brauer quotient
//! `coker(⊕_{Q<H} M^Q → M^H)`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::group::{all_subgroups, Group, Subgroup, WeylData};
use crate::gset::{coset_gset, fixed_point_indices, fixed_points, product_gset, trivial_gset, GSet};
use crate::linalg::{column_space_basis, extend_column_basis, FpMatrix};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PermError {
    InvalidSigns,
    GroupMismatch,
    CharMismatch,
    NotEquivariant,
    NotAPSubgroup,
    NotAPGroup,
    NotNormal,
    Shape(String),
}

impl fmt::Display for PermError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PermError::InvalidSigns => write!(f, "sign data fails the closure check"),
            PermError::GroupMismatch => write!(f, "operands live over different groups"),
            PermError::CharMismatch => write!(f, "operands live over different characteristics"),
            PermError::NotEquivariant => write!(f, "matrix is not equivariant"),
            PermError::NotAPSubgroup => write!(f, "H is not a p-subgroup"),
            PermError::NotAPGroup => write!(f, "not a p-group"),
            PermError::NotNormal => write!(f, "subgroup is not normal"),
            PermError::Shape(msg) => write!(f, "{}", msg),
        }
    }
}

impl std::error::Error for PermError {}

/// Based module over `F_p` with (signed) permutation action.
#[derive(Clone)]
pub struct PermModule {
    group: Arc<Group>,
    p: u32,
    basis: GSet,
    /// `signs[gi][x]` in `{1, p-1}`; absent means all `+1`.
    signs: Option<Vec<Vec<u32>>>,
}

impl fmt::Debug for PermModule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "PermModule(dim {} over F_{}, {:?})",
            self.dim(),
            self.p,
            self.group
        )
    }
}

impl PermModule {
    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn basis(&self) -> &GSet {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.dim() == 0
    }

    fn sign(&self, gi: usize, x: usize) -> u32 {
        match &self.signs {
            None => 1,
            Some(s) => s[gi][x],
        }
    }

    /// Action matrix of generator `gi`: column `x` has `sign(gi,x)` in row
    /// `gi·x`.
    pub fn gen_action_matrix(&self, gi: usize) -> FpMatrix {
        let n = self.dim();
        let mut m = FpMatrix::zeros(self.p, n, n);
        let act = self.basis.gen_action(gi);
        for x in 0..n {
            m.set(act[x], x, self.sign(gi, x));
        }
        m
    }

    /// Signed action `(permutation, signs)` of every group element.
    pub fn element_signed_actions(&self) -> Vec<(Vec<usize>, Vec<u32>)> {
        let order = self.group.order();
        let mut acts: Vec<Option<(Vec<usize>, Vec<u32>)>> = vec![None; order];
        for e in 0..order {
            self.fill_signed(e, &mut acts);
        }
        acts.into_iter().map(|a| a.unwrap()).collect()
    }

    fn fill_signed(&self, e: usize, acts: &mut Vec<Option<(Vec<usize>, Vec<u32>)>>) {
        if acts[e].is_some() {
            return;
        }
        let n = self.dim();
        let val = match self.group.decomposition(e) {
            None => ((0..n).collect(), vec![1u32; n]),
            Some((parent, gi)) => {
                self.fill_signed(parent, acts);
                let (pp, ps) = acts[parent].as_ref().unwrap();
                let ga = self.basis.gen_action(gi);
                let perm: Vec<usize> = (0..n).map(|x| pp[ga[x]]).collect();
                let signs: Vec<u32> = (0..n)
                    .map(|x| (ps[ga[x]] * self.sign(gi, x)) % self.p)
                    .collect();
                (perm, signs)
            }
        };
        acts[e] = Some(val);
    }

    pub fn element_signed_action(&self, e: usize) -> (Vec<usize>, Vec<u32>) {
        let order = self.group.order();
        let mut acts: Vec<Option<(Vec<usize>, Vec<u32>)>> = vec![None; order];
        self.fill_signed(e, &mut acts);
        acts[e].take().unwrap()
    }

    pub fn element_action_matrix(&self, e: usize) -> FpMatrix {
        let (perm, signs) = self.element_signed_action(e);
        let n = self.dim();
        let mut m = FpMatrix::zeros(self.p, n, n);
        for x in 0..n {
            m.set(perm[x], x, signs[x]);
        }
        m
    }

    /// The signed action matrices must define a representation; as with
    /// G-sets this is checked against the whole multiplication table.
    fn validate(&self) -> Result<(), PermError> {
        let acts = self.element_signed_actions();
        for x in 0..self.group.order() {
            for gi in 0..self.group.generators().len() {
                let xg = self.group.mul(x, self.group.generator_index(gi));
                let (xp, xs) = &acts[x];
                let (tp, ts) = &acts[xg];
                let ga = self.basis.gen_action(gi);
                for pt in 0..self.dim() {
                    if tp[pt] != xp[ga[pt]] {
                        return Err(PermError::InvalidSigns);
                    }
                    if ts[pt] != (xs[ga[pt]] * self.sign(gi, pt)) % self.p {
                        return Err(PermError::InvalidSigns);
                    }
                }
            }
        }
        Ok(())
    }

    /// Dimensions and action matrices agree entrywise (labels are ignored).
    pub fn same_matrices(&self, other: &PermModule) -> bool {
        self.p == other.p
            && self.dim() == other.dim()
            && self.group.as_ref() == other.group.as_ref()
            && (0..self.group.generators().len())
                .all(|gi| self.gen_action_matrix(gi) == other.gen_action_matrix(gi))
    }
}

/// Free module on a G-set, with an optional sign function (values ±1 are
/// passed as residues mod p).
pub fn linearize(x: &GSet, p: u32, signs: Option<Vec<Vec<u32>>>) -> Result<PermModule, PermError> {
    if let Some(s) = &signs {
        if s.len() != x.group().generators().len() || s.iter().any(|row| row.len() != x.len()) {
            return Err(PermError::Shape("sign table shape mismatch".into()));
        }
        if s.iter().flatten().any(|&v| v % p != 1 % p && v % p != (p - 1) % p) {
            return Err(PermError::InvalidSigns);
        }
    }
    let signs = signs.map(|s| {
        s.into_iter()
            .map(|row| row.into_iter().map(|v| v % p).collect())
            .collect()
    });
    let m = PermModule {
        group: Arc::clone(x.group()),
        p,
        basis: x.clone(),
        signs,
    };
    m.validate()?;
    Ok(m)
}

/// The tensor unit `k = k(G/G)`.
pub fn trivial_module(g: &Arc<Group>, p: u32) -> PermModule {
    linearize(&trivial_gset(g), p, None).unwrap()
}

pub fn coset_module(g: &Arc<Group>, h: &Subgroup, p: u32) -> PermModule {
    linearize(&coset_gset(g, h), p, None).unwrap()
}

/// Direct sum; returns the sum and the basis offset of each summand.
pub fn direct_sum(parts: &[&PermModule]) -> (PermModule, Vec<usize>) {
    assert!(!parts.is_empty());
    let group = Arc::clone(parts[0].group());
    let p = parts[0].p;
    let gens = group.generators().len();
    let mut labels = Vec::new();
    let mut offsets = Vec::new();
    let mut gen_actions: Vec<Vec<usize>> = vec![Vec::new(); gens];
    let mut signs: Vec<Vec<u32>> = vec![Vec::new(); gens];
    let mut off = 0usize;
    for part in parts {
        assert_eq!(part.group().as_ref(), group.as_ref());
        assert_eq!(part.p, p);
        offsets.push(off);
        labels.extend(part.basis.labels().iter().cloned());
        for gi in 0..gens {
            gen_actions[gi].extend(part.basis.gen_action(gi).iter().map(|&x| x + off));
            signs[gi].extend((0..part.dim()).map(|x| part.sign(gi, x)));
        }
        off += part.dim();
    }
    let gset = GSet::new(group, labels, gen_actions).unwrap();
    let module = linearize(&gset, p, Some(signs)).unwrap();
    (module, offsets)
}

/// Equivariant matrix between permutation modules, codomain-basis by
/// domain-basis.
#[derive(Clone)]
pub struct Morphism {
    pub domain: PermModule,
    pub codomain: PermModule,
    pub matrix: FpMatrix,
}

impl fmt::Debug for Morphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Morphism({}x{})", self.matrix.rows(), self.matrix.cols())
    }
}

impl Morphism {
    pub fn new(
        domain: PermModule,
        codomain: PermModule,
        matrix: FpMatrix,
    ) -> Result<Morphism, PermError> {
        if domain.group().as_ref() != codomain.group().as_ref() {
            return Err(PermError::GroupMismatch);
        }
        if domain.p != codomain.p || matrix.prime() != domain.p {
            return Err(PermError::CharMismatch);
        }
        if matrix.rows() != codomain.dim() || matrix.cols() != domain.dim() {
            return Err(PermError::Shape(format!(
                "matrix is {}x{}, expected {}x{}",
                matrix.rows(),
                matrix.cols(),
                codomain.dim(),
                domain.dim()
            )));
        }
        for gi in 0..domain.group().generators().len() {
            let lhs = codomain.gen_action_matrix(gi).mul(&matrix);
            let rhs = matrix.mul(&domain.gen_action_matrix(gi));
            if lhs != rhs {
                return Err(PermError::NotEquivariant);
            }
        }
        Ok(Morphism {
            domain,
            codomain,
            matrix,
        })
    }

    pub fn identity(m: &PermModule) -> Morphism {
        Morphism {
            domain: m.clone(),
            codomain: m.clone(),
            matrix: FpMatrix::identity(m.p, m.dim()),
        }
    }

    pub fn zero(domain: &PermModule, codomain: &PermModule) -> Morphism {
        Morphism {
            domain: domain.clone(),
            codomain: codomain.clone(),
            matrix: FpMatrix::zeros(domain.p, codomain.dim(), domain.dim()),
        }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Morphism) -> Morphism {
        assert_eq!(self.domain.dim(), other.codomain.dim());
        Morphism {
            domain: other.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: self.matrix.mul(&other.matrix),
        }
    }

    pub fn add(&self, other: &Morphism) -> Morphism {
        Morphism {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: self.matrix.add(&other.matrix),
        }
    }

    pub fn scale(&self, c: u32) -> Morphism {
        Morphism {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            matrix: self.matrix.scale(c),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }
}

/// The linear system cutting out equivariant matrices `X` with
/// `act_cod(g)·X = X·act_dom(g)` for every generator, in row-major
/// vectorization.
fn commutant_system(m: &PermModule, n: &PermModule) -> FpMatrix {
    let p = m.p;
    let dm = m.dim();
    let dn = n.dim();
    let gens = m.group().generators().len();
    let idm = FpMatrix::identity(p, dm);
    let idn = FpMatrix::identity(p, dn);
    let mut blocks = Vec::new();
    for gi in 0..gens {
        let a = n.gen_action_matrix(gi); // codomain action
        let b = m.gen_action_matrix(gi); // domain action
        // vec(A·X) = (A ⊗ I) vec X ; vec(X·B) = (I ⊗ Bᵀ) vec X.
        let lhs = a.kron(&idm);
        let rhs = idn.kron(&b.transpose());
        blocks.push(lhs.sub(&rhs));
    }
    if blocks.is_empty() {
        return FpMatrix::zeros(p, 0, dn * dm);
    }
    let refs: Vec<&FpMatrix> = blocks.iter().collect();
    FpMatrix::vstack(p, &refs)
}

/// Basis of the space of equivariant matrices `m → n`.
pub fn hom_space_basis(m: &PermModule, n: &PermModule) -> Result<Vec<Morphism>, PermError> {
    if m.group().as_ref() != n.group().as_ref() {
        return Err(PermError::GroupMismatch);
    }
    if m.p != n.p {
        return Err(PermError::CharMismatch);
    }
    let sys = commutant_system(m, n);
    let basis = sys.kernel_basis();
    Ok(basis
        .into_iter()
        .map(|v| Morphism {
            domain: m.clone(),
            codomain: n.clone(),
            matrix: FpMatrix::from_flat(m.p, n.dim(), m.dim(), v),
        })
        .collect())
}

/// Dimension of the Hom space, by rank only.
pub fn hom_space_dim(m: &PermModule, n: &PermModule) -> Result<usize, PermError> {
    if m.group().as_ref() != n.group().as_ref() {
        return Err(PermError::GroupMismatch);
    }
    if m.p != n.p {
        return Err(PermError::CharMismatch);
    }
    let sys = commutant_system(m, n);
    Ok(sys.cols() - sys.rank())
}

/// The standard basis morphism `f_rep : k(G/H) → k(G/K)` attached to a
/// double-coset representative: the composite of the relative trace along
/// `L = H ∩ ᵍK`, translation by `rep`, and the coset projection. The column
/// of the coset `xH` is `Σ_{γ ∈ H/L} [x·γ·rep]_K`.
pub fn standard_morphism(
    g: &Arc<Group>,
    h: &Subgroup,
    k: &Subgroup,
    rep: usize,
    p: u32,
) -> Result<Morphism, PermError> {
    let dom = coset_module(g, h, p);
    let cod = coset_module(g, k, p);
    // L = H ∩ rep·K·rep⁻¹, i.e. x ∈ H with x^rep ∈ K.
    let l_elems: std::collections::BTreeSet<usize> = h
        .elements()
        .iter()
        .copied()
        .filter(|&x| k.contains(g.conj(x, rep)))
        .collect();
    let l = Subgroup::from_element_set(g, &l_elems);
    let transversal: Vec<usize> = l
        .left_cosets_in(h.elements())
        .iter()
        .map(|c| c[0])
        .collect();
    let h_cosets = h.left_cosets();
    let k_cosets = k.left_cosets();
    let k_coset_of: BTreeMap<usize, usize> = k_cosets
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&e| (e, i)))
        .collect();
    let mut matrix = FpMatrix::zeros(p, cod.dim(), dom.dim());
    for (col, coset) in h_cosets.iter().enumerate() {
        let x = coset[0];
        for &gamma in &transversal {
            let target = g.mul(g.mul(x, gamma), rep);
            let row = k_coset_of[&target];
            let cur = matrix.get(row, col);
            matrix.set(row, col, (cur + 1) % p);
        }
    }
    Morphism::new(dom, cod, matrix)
}

/// Tensor product over `k` with diagonal action; basis is the product
/// G-set, signs multiply.
pub fn tensor_modules(m: &PermModule, n: &PermModule) -> Result<PermModule, PermError> {
    if m.group().as_ref() != n.group().as_ref() {
        return Err(PermError::GroupMismatch);
    }
    if m.p != n.p {
        return Err(PermError::CharMismatch);
    }
    let basis = product_gset(&m.basis, &n.basis).map_err(|_| PermError::GroupMismatch)?;
    let gens = m.group().generators().len();
    let signs: Option<Vec<Vec<u32>>> = if m.signs.is_none() && n.signs.is_none() {
        None
    } else {
        Some(
            (0..gens)
                .map(|gi| {
                    (0..m.dim())
                        .flat_map(|x| {
                            (0..n.dim()).map(move |y| (m.sign(gi, x) * n.sign(gi, y)) % m.p)
                        })
                        .collect()
                })
                .collect(),
        )
    };
    linearize(&basis, m.p, signs)
}

/// Kronecker product of morphisms, matching `tensor_modules` base order.
pub fn tensor_morphisms(f: &Morphism, g: &Morphism) -> Result<Morphism, PermError> {
    let dom = tensor_modules(&f.domain, &g.domain)?;
    let cod = tensor_modules(&f.codomain, &g.codomain)?;
    Morphism::new(dom, cod, f.matrix.kron(&g.matrix))
}

// ---------------------------------------------------------------------------
// Change-of-group functors
// ---------------------------------------------------------------------------

/// Restriction along an arbitrary homomorphism `φ: A → B`, given as the
/// image index (in `B`) of every element of `A`. Covers restriction to a
/// subgroup, inflation and conjugation transport.
pub fn restrict_along(
    m: &PermModule,
    new_group: &Arc<Group>,
    phi: &[usize],
) -> Result<PermModule, PermError> {
    assert_eq!(phi.len(), new_group.order());
    let gens = new_group.generators().len();
    let mut gen_actions = Vec::with_capacity(gens);
    let mut signs = Vec::with_capacity(gens);
    for gi in 0..gens {
        let image = phi[new_group.generator_index(gi)];
        let (perm, sgn) = m.element_signed_action(image);
        gen_actions.push(perm);
        signs.push(sgn);
    }
    let gset = GSet::new(
        Arc::clone(new_group),
        m.basis.labels().to_vec(),
        gen_actions,
    )
    .map_err(|_| PermError::InvalidSigns)?;
    linearize(&gset, m.p, Some(signs))
}

pub fn restrict_along_map(
    f: &Morphism,
    new_group: &Arc<Group>,
    phi: &[usize],
) -> Result<Morphism, PermError> {
    let dom = restrict_along(&f.domain, new_group, phi)?;
    let cod = restrict_along(&f.codomain, new_group, phi)?;
    Morphism::new(dom, cod, f.matrix.clone())
}

/// Element indices of the standalone group `K` inside `G`, for `Res^G_K`.
pub fn inclusion_map(g: &Arc<Group>, k_group: &Arc<Group>) -> Vec<usize> {
    (0..k_group.order())
        .map(|i| {
            g.index_of(k_group.element(i))
                .expect("subgroup element missing from the ambient group")
        })
        .collect()
}

pub fn res_module(m: &PermModule, k_group: &Arc<Group>) -> Result<PermModule, PermError> {
    let phi = inclusion_map(m.group(), k_group);
    restrict_along(m, k_group, &phi)
}

pub fn res_map(f: &Morphism, k_group: &Arc<Group>) -> Result<Morphism, PermError> {
    let phi = inclusion_map(f.domain.group(), k_group);
    restrict_along_map(f, k_group, &phi)
}

/// Inflation along `G → G/N`: the quotient is realized as the Weyl group of
/// the normal subgroup `N`, and `G` acts through the projection.
pub fn infl_module(m: &PermModule, g: &Arc<Group>, wd: &WeylData) -> Result<PermModule, PermError> {
    if !wd.normalizer.is_full() {
        return Err(PermError::NotNormal);
    }
    if m.group().as_ref() != wd.weyl.as_ref() {
        return Err(PermError::GroupMismatch);
    }
    let phi: Vec<usize> = (0..g.order()).map(|e| wd.project(e)).collect();
    restrict_along(m, g, &phi)
}

pub fn infl_map(f: &Morphism, g: &Arc<Group>, wd: &WeylData) -> Result<Morphism, PermError> {
    let dom = infl_module(&f.domain, g, wd)?;
    let cod = infl_module(&f.codomain, g, wd)?;
    Morphism::new(dom, cod, f.matrix.clone())
}

/// Induction `Ind_K^G` of a module over the standalone group `K ≤ G`. The
/// induced basis is realized on (coset, point) pairs with the minimal
/// transversal, making the construction deterministic.
pub fn ind_module(
    m: &PermModule,
    g: &Arc<Group>,
    k: &Subgroup,
    k_group: &Arc<Group>,
) -> Result<PermModule, PermError> {
    if m.group().as_ref() != k_group.as_ref() {
        return Err(PermError::GroupMismatch);
    }
    let cosets = k.left_cosets();
    let reps: Vec<usize> = cosets.iter().map(|c| c[0]).collect();
    let coset_of: BTreeMap<usize, usize> = cosets
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&e| (e, i)))
        .collect();
    let r = reps.len();
    let nx = m.dim();
    let labels: Vec<String> = reps
        .iter()
        .flat_map(|&t| {
            let ts = g.element(t).cycle_string();
            m.basis
                .labels()
                .iter()
                .map(move |lx| format!("({}|{})", ts, lx))
        })
        .collect();
    let gens = g.generators().len();
    let mut gen_actions = Vec::with_capacity(gens);
    let mut signs = Vec::with_capacity(gens);
    for gi in 0..gens {
        let ge = g.generator_index(gi);
        let mut act = vec![0usize; r * nx];
        let mut sgn = vec![1u32; r * nx];
        for (i, &t) in reps.iter().enumerate() {
            let gt = g.mul(ge, t);
            let j = coset_of[&gt];
            // g·t = t_j·κ with κ ∈ K.
            let k_elem = g.mul(g.inv(reps[j]), gt);
            let k_idx = k.index_in_as_group(k_group, k_elem);
            let (kp, ks) = m.element_signed_action(k_idx);
            for x in 0..nx {
                act[i * nx + x] = j * nx + kp[x];
                sgn[i * nx + x] = ks[x];
            }
        }
        gen_actions.push(act);
        signs.push(sgn);
    }
    let gset =
        GSet::new(Arc::clone(g), labels, gen_actions).map_err(|_| PermError::InvalidSigns)?;
    linearize(&gset, m.p, Some(signs))
}

pub fn ind_map(
    f: &Morphism,
    g: &Arc<Group>,
    k: &Subgroup,
    k_group: &Arc<Group>,
) -> Result<Morphism, PermError> {
    let dom = ind_module(&f.domain, g, k, k_group)?;
    let cod = ind_module(&f.codomain, g, k, k_group)?;
    let r = k.left_cosets().len();
    let block = FpMatrix::identity(f.matrix.prime(), r).kron(&f.matrix);
    Morphism::new(dom, cod, block)
}

// ---------------------------------------------------------------------------
// Modular (Brauer) fixed points
// ---------------------------------------------------------------------------

fn check_p_subgroup(h: &Subgroup, p: u32) -> Result<(), PermError> {
    if h.is_p_subgroup(p) {
        Ok(())
    } else {
        Err(PermError::NotAPSubgroup)
    }
}

/// Modular H-fixed points on objects: the fixed-point basis over the Weyl
/// group, together with the embedding indices of the surviving basis points.
pub fn brauer(
    m: &PermModule,
    h: &Subgroup,
    wd: &WeylData,
) -> Result<(PermModule, Vec<usize>), PermError> {
    check_p_subgroup(h, m.p)?;
    if h.parent().as_ref() != m.group().as_ref() {
        return Err(PermError::GroupMismatch);
    }
    let fixed = fixed_point_indices(&m.basis, h);
    let w_gset = fixed_points(&m.basis, h, wd);
    let gens = wd.weyl.generators().len();
    let signs: Vec<Vec<u32>> = (0..gens)
        .map(|wi| {
            let n = wd.preimage_rep(wd.weyl.generator_index(wi));
            let (_, sgn) = m.element_signed_action(n);
            fixed.iter().map(|&i| sgn[i]).collect()
        })
        .collect();
    let module = linearize(&w_gset, m.p, Some(signs))?;
    Ok((module, fixed))
}

/// Modular H-fixed points on morphisms: the H-fixed corner submatrix.
pub fn brauer_map(f: &Morphism, h: &Subgroup, wd: &WeylData) -> Result<Morphism, PermError> {
    let (dom, dom_fixed) = brauer(&f.domain, h, wd)?;
    let (cod, cod_fixed) = brauer(&f.codomain, h, wd)?;
    let matrix = f.matrix.submatrix(&cod_fixed, &dom_fixed);
    Morphism::new(dom, cod, matrix)
}

/// Module-level Brauer quotient `coker(⊕_{Q<H} M^Q → M^H)` computed after
/// restricting to the normalizer, with an explicit cokernel basis and the
/// canonical comparison with the fixed-corner construction.
pub struct BrauerOracle {
    /// Basis of `M^H` as columns.
    pub fixed_space: FpMatrix,
    /// Basis of the span of all transfer images (a subspace of `M^H`).
    pub transfer_space: FpMatrix,
    /// Columns of `fixed_space` whose classes form a basis of the cokernel.
    pub coker_cols: Vec<usize>,
    /// Change of basis: `[transfer_basis | cokernel representatives]`.
    full_basis: FpMatrix,
    /// The canonical map from the fixed-corner module to the cokernel,
    /// asserted invertible.
    pub corner_to_coker: FpMatrix,
}

impl BrauerOracle {
    pub fn coker_dim(&self) -> usize {
        self.coker_cols.len()
    }

    /// Coordinates of an ambient vector in the cokernel basis; the vector
    /// must lie in `M^H`.
    pub fn coker_coords(&self, v: &[u32]) -> Vec<u32> {
        let x = self
            .full_basis
            .solve(v)
            .expect("vector does not lie in the fixed subspace");
        let t = self.full_basis.cols() - self.coker_cols.len();
        x[t..].to_vec()
    }
}

fn fixed_vectors(m: &PermModule, elems: &[usize]) -> FpMatrix {
    let p = m.prime();
    let n = m.dim();
    let blocks: Vec<FpMatrix> = elems
        .iter()
        .map(|&s| m.element_action_matrix(s).sub(&FpMatrix::identity(p, n)))
        .collect();
    if blocks.is_empty() {
        return FpMatrix::identity(p, n);
    }
    let refs: Vec<&FpMatrix> = blocks.iter().collect();
    let kernel = FpMatrix::vstack(p, &refs).kernel_basis();
    let cols: Vec<FpMatrix> = kernel
        .iter()
        .map(|v| FpMatrix::column_vector(p, v))
        .collect();
    if cols.is_empty() {
        FpMatrix::zeros(p, n, 0)
    } else {
        let refs: Vec<&FpMatrix> = cols.iter().collect();
        FpMatrix::hstack(p, &refs)
    }
}

pub fn brauer_oracle(
    m: &PermModule,
    h: &Subgroup,
    wd: &WeylData,
) -> Result<BrauerOracle, PermError> {
    check_p_subgroup(h, m.p)?;
    let p = m.p;
    let n = m.dim();
    let g = m.group();
    let fixed_space = fixed_vectors(m, h.generator_indices());
    // Transfers Tr_Q^H over every proper subgroup Q < H.
    let h_group = h
        .as_group(h.order())
        .map_err(|e| PermError::Shape(e.to_string()))?;
    let mut transfer_cols: Vec<FpMatrix> = Vec::new();
    for q_in_h in all_subgroups(&h_group) {
        if q_in_h.order() == h.order() {
            continue;
        }
        let q_elems: std::collections::BTreeSet<usize> = q_in_h
            .elements()
            .iter()
            .map(|&i| g.index_of(h_group.element(i)).unwrap())
            .collect();
        let q = Subgroup::from_element_set(g, &q_elems);
        let transversal: Vec<usize> = q
            .left_cosets_in(h.elements())
            .iter()
            .map(|c| c[0])
            .collect();
        let mut tr = FpMatrix::zeros(p, n, n);
        for &t in &transversal {
            tr = tr.add(&m.element_action_matrix(t));
        }
        let q_fixed = fixed_vectors(m, q.generator_indices());
        for j in 0..q_fixed.cols() {
            let v: Vec<u32> = (0..n).map(|i| q_fixed.get(i, j)).collect();
            transfer_cols.push(FpMatrix::column_vector(p, &tr.mul_vec(&v)));
        }
    }
    let transfer_raw = if transfer_cols.is_empty() {
        FpMatrix::zeros(p, n, 0)
    } else {
        let refs: Vec<&FpMatrix> = transfer_cols.iter().collect();
        FpMatrix::hstack(p, &refs)
    };
    let transfer_space = column_space_basis(&transfer_raw);
    let coker_cols = extend_column_basis(&transfer_space, &fixed_space);
    let rows: Vec<usize> = (0..n).collect();
    let reps = fixed_space.submatrix(&rows, &coker_cols);
    let full_basis = FpMatrix::hstack(p, &[&transfer_space, &reps]);
    let mut oracle = BrauerOracle {
        fixed_space,
        transfer_space,
        coker_cols,
        full_basis,
        corner_to_coker: FpMatrix::zeros(p, 0, 0),
    };
    // Canonical map: each H-fixed basis *point* is itself a fixed vector;
    // its cokernel class gives a column of the comparison matrix.
    let (_, fixed_pts) = brauer(m, h, wd)?;
    let mut cmp = FpMatrix::zeros(p, oracle.coker_dim(), fixed_pts.len());
    for (j, &pt) in fixed_pts.iter().enumerate() {
        let mut e = vec![0u32; n];
        e[pt] = 1;
        for (i, &c) in oracle.coker_coords(&e).iter().enumerate() {
            cmp.set(i, j, c);
        }
    }
    if cmp.rows() != cmp.cols() || (cmp.rows() > 0 && cmp.invert().is_none()) {
        return Err(PermError::Shape(
            "corner-to-cokernel comparison is not an isomorphism".into(),
        ));
    }
    oracle.corner_to_coker = cmp;
    Ok(oracle)
}

/// Map induced on oracle cokernels by an equivariant map.
pub fn oracle_induced_map(
    f: &Morphism,
    dom_oracle: &BrauerOracle,
    cod_oracle: &BrauerOracle,
) -> FpMatrix {
    let p = f.matrix.prime();
    let rows: Vec<usize> = (0..f.domain.dim()).collect();
    let dom_reps = dom_oracle
        .fixed_space
        .submatrix(&rows, &dom_oracle.coker_cols);
    let mut out = FpMatrix::zeros(p, cod_oracle.coker_dim(), dom_oracle.coker_dim());
    for j in 0..dom_reps.cols() {
        let v: Vec<u32> = (0..dom_reps.rows()).map(|i| dom_reps.get(i, j)).collect();
        let image = f.matrix.mul_vec(&v);
        for (i, &c) in cod_oracle.coker_coords(&image).iter().enumerate() {
            out.set(i, j, c);
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Endomorphism data for the nilpotence statement
// ---------------------------------------------------------------------------

#[derive(Debug)]
pub struct EndPsiData {
    /// Double-coset representatives and the attached standard morphisms
    /// spanning `End(k(G/H))`.
    pub hom_basis: Vec<(usize, Morphism)>,
    /// Corner images in `End(k(W))`, aligned with `hom_basis`.
    pub images: Vec<Morphism>,
    /// Representatives outside the normalizer; their standard morphisms
    /// form a basis of the kernel.
    pub kernel_reps: Vec<usize>,
    pub surjective: bool,
    /// Least `n` with (kernel ideal)ⁿ = 0.
    pub nilpotency_index: usize,
    /// Least `m` with `Rad(kG)^m = 0`.
    pub loewy_length: usize,
}

fn cols_to_matrix(p: u32, rows: usize, cols: &[Vec<u32>]) -> FpMatrix {
    if cols.is_empty() {
        return FpMatrix::zeros(p, rows, 0);
    }
    let col_mats: Vec<FpMatrix> = cols.iter().map(|v| FpMatrix::column_vector(p, v)).collect();
    let refs: Vec<&FpMatrix> = col_mats.iter().collect();
    FpMatrix::hstack(p, &refs)
}

/// Loewy length of the group algebra of a `p`-group: the radical is the
/// augmentation ideal, and its powers are computed inside the regular
/// module.
pub fn loewy_length(g: &Arc<Group>, p: u32) -> usize {
    let n = g.order();
    let mut rad_cols: Vec<Vec<u32>> = Vec::new();
    for x in 1..n {
        let mut v = vec![0u32; n];
        v[x] = 1;
        v[0] = p - 1;
        rad_cols.push(v);
    }
    let rad = cols_to_matrix(p, n, &rad_cols);
    let convolve = |a: &[u32], b: &[u32]| -> Vec<u32> {
        let mut out = vec![0u32; n];
        for x in 0..n {
            if a[x] == 0 {
                continue;
            }
            for y in 0..n {
                if b[y] == 0 {
                    continue;
                }
                let z = g.mul(x, y);
                out[z] = ((out[z] as u64 + a[x] as u64 * b[y] as u64) % p as u64) as u32;
            }
        }
        out
    };
    let mut power = column_space_basis(&rad);
    let mut m = 1usize;
    while power.cols() > 0 {
        let mut next_cols: Vec<Vec<u32>> = Vec::new();
        for j in 0..power.cols() {
            let a: Vec<u32> = (0..n).map(|i| power.get(i, j)).collect();
            for k in 0..rad.cols() {
                let b: Vec<u32> = (0..n).map(|i| rad.get(i, k)).collect();
                next_cols.push(convolve(&a, &b));
            }
        }
        power = column_space_basis(&cols_to_matrix(p, n, &next_cols));
        m += 1;
    }
    m
}

/// The induced ring map `End(k(G/H)) → End(k(W))` for a `p`-group `G`:
/// surjective with nilpotent kernel spanned by the standard morphisms of
/// non-normalizing double-coset representatives.
pub fn end_psi_data(
    g: &Arc<Group>,
    h: &Subgroup,
    wd: &WeylData,
    p: u32,
) -> Result<EndPsiData, PermError> {
    if !crate::group::is_p_group(g, p) {
        return Err(PermError::NotAPGroup);
    }
    let reps = crate::group::double_coset_reps(g, h, h);
    let mut hom_basis = Vec::new();
    let mut images = Vec::new();
    let mut kernel_reps = Vec::new();
    let mut image_flats: Vec<Vec<u32>> = Vec::new();
    for &r in &reps {
        let f = standard_morphism(g, h, h, r, p)?;
        let img = brauer_map(&f, h, wd)?;
        if wd.normalizer.contains(r) {
            image_flats.push(img.matrix.flatten());
        } else {
            kernel_reps.push(r);
            if !img.is_zero() {
                return Err(PermError::Shape(
                    "corner image of a non-normalizing representative is nonzero".into(),
                ));
            }
        }
        hom_basis.push((r, f));
        images.push(img);
    }
    let w = wd.order();
    let image_rank = if image_flats.is_empty() {
        0
    } else {
        FpMatrix::from_rows(p, &image_flats).rank()
    };
    let surjective = image_rank == w;
    // Nilpotency index of the kernel ideal: iterate span_k := span(kernel)^k
    // until it vanishes.
    let kernel_mats: Vec<FpMatrix> = hom_basis
        .iter()
        .filter(|(r, _)| kernel_reps.contains(r))
        .map(|(_, f)| f.matrix.clone())
        .collect();
    let dim = h.left_cosets().len();
    let flat_len = dim * dim;
    let mut nilpotency_index = 1usize;
    if !kernel_mats.is_empty() {
        let flats: Vec<Vec<u32>> = kernel_mats.iter().map(|m| m.flatten()).collect();
        let mut span = column_space_basis(&cols_to_matrix(p, flat_len, &flats));
        while span.cols() > 0 {
            let mut next = Vec::new();
            for j in 0..span.cols() {
                let flat: Vec<u32> = (0..flat_len).map(|i| span.get(i, j)).collect();
                let mat = FpMatrix::from_flat(p, dim, dim, flat);
                for kmat in &kernel_mats {
                    next.push(mat.mul(kmat).flatten());
                }
            }
            span = column_space_basis(&cols_to_matrix(p, flat_len, &next));
            nilpotency_index += 1;
            if nilpotency_index > g.order() + 1 {
                return Err(PermError::Shape("kernel ideal is not nilpotent".into()));
            }
        }
    }
    let loewy = loewy_length(g, p);
    Ok(EndPsiData {
        hom_basis,
        images,
        kernel_reps,
        surjective,
        nilpotency_index,
        loewy_length: loewy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{
        center, double_coset_reps, p_subgroups_up_to_conj, parse_group_spec, weyl_group, Perm,
        DEFAULT_MAX_ORDER,
    };
    use crate::gset::regular_gset;

    fn g(spec: &str) -> Arc<Group> {
        parse_group_spec(spec, DEFAULT_MAX_ORDER).unwrap()
    }

    fn c4_gen(c4: &Arc<Group>) -> usize {
        c4.index_of(&Perm::from_cycles(4, &[vec![0, 1, 2, 3]]).unwrap())
            .unwrap()
    }

    #[test]
    fn linearize_point_gives_trivial_module() {
        let q = g("q8");
        let k = trivial_module(&q, 2);
        assert_eq!(k.dim(), 1);
        assert_eq!(k.gen_action_matrix(0), FpMatrix::identity(2, 1));
    }

    #[test]
    fn regular_c2_action_is_swap() {
        let c2 = g("cyclic:2");
        let m = linearize(&regular_gset(&c2), 2, None).unwrap();
        let swap = FpMatrix::from_rows(2, &[vec![0, 1], vec![1, 0]]);
        assert_eq!(m.gen_action_matrix(0), swap);
    }

    #[test]
    fn char2_kills_signs() {
        // Top exterior power of the regular C2-module: the swap acts with a
        // sign, which disappears mod 2, leaving the trivial module.
        let c2 = g("cyclic:2");
        let x = GSet::new(Arc::clone(&c2), vec!["e^s".into()], vec![vec![0]]).unwrap();
        let m = linearize(&x, 2, Some(vec![vec![1]])).unwrap();
        assert_eq!(m.gen_action_matrix(0), FpMatrix::identity(2, 1));
    }

    #[test]
    fn sign_closure_is_validated() {
        // C3 generator fixing a point with sign -1 over F_7 fails closure
        // because (-1)^3 = -1 ≠ +1.
        let c3 = g("cyclic:3");
        let x = trivial_gset(&c3);
        let r = linearize(&x, 7, Some(vec![vec![6]]));
        assert_eq!(r.unwrap_err(), PermError::InvalidSigns);
    }

    #[test]
    fn hom_dims_match_double_cosets_small() {
        for spec in ["cyclic:2", "cyclic:4", "sym:3"] {
            let gr = g(spec);
            for p in [2u32, 3] {
                let subs = crate::group::all_subgroups(&gr);
                for h in &subs {
                    for k in &subs {
                        let m = coset_module(&gr, h, p);
                        let n = coset_module(&gr, k, p);
                        let dim = hom_space_dim(&m, &n).unwrap();
                        assert_eq!(dim, double_coset_reps(&gr, h, k).len());
                        assert_eq!(hom_space_basis(&m, &n).unwrap().len(), dim);
                    }
                }
            }
        }
    }

    #[test]
    fn hom_from_unit_to_regular_is_norm() {
        let c2 = g("cyclic:2");
        let k = trivial_module(&c2, 2);
        let reg = coset_module(&c2, &Subgroup::trivial(&c2), 2);
        let basis = hom_space_basis(&k, &reg).unwrap();
        assert_eq!(basis.len(), 1);
        assert_eq!(basis[0].matrix.flatten(), vec![1, 1]);
    }

    #[test]
    fn standard_morphism_identity_case() {
        let c2 = g("cyclic:2");
        let full = Subgroup::full(&c2);
        let f = standard_morphism(&c2, &full, &full, 0, 2).unwrap();
        assert_eq!(f.matrix, FpMatrix::identity(2, 1));
    }

    #[test]
    fn standard_morphism_c4_coset_swap() {
        let c4 = g("cyclic:4");
        let x = c4_gen(&c4);
        let h = Subgroup::from_generator_indices(&c4, &[c4.mul(x, x)]);
        let f = standard_morphism(&c4, &h, &h, x, 2).unwrap();
        let swap = FpMatrix::from_rows(2, &[vec![0, 1], vec![1, 0]]);
        assert_eq!(f.matrix, swap);
    }

    #[test]
    fn standard_morphism_norm_map() {
        let c2 = g("cyclic:2");
        let full = Subgroup::full(&c2);
        let triv = Subgroup::trivial(&c2);
        let f = standard_morphism(&c2, &full, &triv, 0, 2).unwrap();
        assert_eq!(f.matrix.flatten(), vec![1, 1]);
    }

    #[test]
    fn standard_morphism_depends_only_on_double_coset() {
        let d8 = g("dihedral:8");
        let classes = p_subgroups_up_to_conj(&d8, 2);
        let h = &classes[1];
        let k = &classes[2];
        for (rep, members) in crate::group::double_cosets(&d8, h, k) {
            let f = standard_morphism(&d8, h, k, rep, 2).unwrap();
            for &other in members.iter().take(3) {
                let f2 = standard_morphism(&d8, h, k, other, 2).unwrap();
                assert_eq!(f.matrix, f2.matrix);
            }
        }
    }

    #[test]
    fn standard_morphisms_span_hom_space() {
        let d8 = g("dihedral:8");
        let subs = p_subgroups_up_to_conj(&d8, 2);
        for h in &subs {
            for k in &subs {
                let reps = double_coset_reps(&d8, h, k);
                let flats: Vec<Vec<u32>> = reps
                    .iter()
                    .map(|&r| standard_morphism(&d8, h, k, r, 2).unwrap().matrix.flatten())
                    .collect();
                let m = FpMatrix::from_rows(2, &flats);
                assert_eq!(m.rank(), reps.len(), "f_g independent");
                let hm = coset_module(&d8, h, 2);
                let km = coset_module(&d8, k, 2);
                assert_eq!(hom_space_dim(&hm, &km).unwrap(), reps.len());
            }
        }
    }

    #[test]
    fn tensor_unit_is_identity() {
        let v = g("klein4");
        let m = coset_module(&v, &p_subgroups_up_to_conj(&v, 2)[1], 2);
        let k = trivial_module(&v, 2);
        let prod = tensor_modules(&k, &m).unwrap();
        assert!(prod.same_matrices(&m));
    }

    #[test]
    fn tensor_of_regular_c2_splits_into_two_orbits() {
        let c2 = g("cyclic:2");
        let reg = coset_module(&c2, &Subgroup::trivial(&c2), 2);
        let t = tensor_modules(&reg, &reg).unwrap();
        assert_eq!(t.dim(), 4);
        assert_eq!(crate::gset::orbits(t.basis()).len(), 2);
    }

    #[test]
    fn res_matches_mackey_orbit_types() {
        let d8 = g("dihedral:8");
        let classes = p_subgroups_up_to_conj(&d8, 2);
        for h in &classes {
            let kg = h.as_group(DEFAULT_MAX_ORDER).unwrap();
            for k in &classes {
                let m = coset_module(&d8, k, 2);
                let r = res_module(&m, &kg).unwrap();
                let mut orbit_sizes: Vec<usize> = crate::gset::orbits(r.basis())
                    .iter()
                    .map(|o| o.points.len())
                    .collect();
                orbit_sizes.sort_unstable();
                let mut mackey_sizes: Vec<usize> = crate::group::double_cosets(&d8, h, k)
                    .iter()
                    .map(|(_, members)| members.len() / k.order())
                    .collect();
                mackey_sizes.sort_unstable();
                assert_eq!(orbit_sizes, mackey_sizes);
            }
        }
    }

    #[test]
    fn ind_of_unit_from_trivial_is_regular() {
        let c2 = g("cyclic:2");
        let triv = Subgroup::trivial(&c2);
        let tg = triv.as_group(DEFAULT_MAX_ORDER).unwrap();
        let k = trivial_module(&tg, 2);
        let ind = ind_module(&k, &c2, &triv, &tg).unwrap();
        let reg = coset_module(&c2, &triv, 2);
        assert!(ind.same_matrices(&reg));
    }

    #[test]
    fn infl_of_quotient_regular_is_coset_module() {
        let c4 = g("cyclic:4");
        let x = c4_gen(&c4);
        let h = Subgroup::from_generator_indices(&c4, &[c4.mul(x, x)]);
        let wd = weyl_group(&c4, &h);
        let reg_q = coset_module(&wd.weyl, &Subgroup::trivial(&wd.weyl), 2);
        let infl = infl_module(&reg_q, &c4, &wd).unwrap();
        let coset = coset_module(&c4, &h, 2);
        assert!(infl.same_matrices(&coset));
    }

    #[test]
    fn brauer_kills_regular_module() {
        let c2 = g("cyclic:2");
        let full = Subgroup::full(&c2);
        let wd = weyl_group(&c2, &full);
        let reg = coset_module(&c2, &Subgroup::trivial(&c2), 2);
        let (b, _) = brauer(&reg, &full, &wd).unwrap();
        assert!(b.is_zero());
    }

    #[test]
    fn brauer_of_coset_by_normal_is_regular_weyl() {
        let c4 = g("cyclic:4");
        let x = c4_gen(&c4);
        let h = Subgroup::from_generator_indices(&c4, &[c4.mul(x, x)]);
        let wd = weyl_group(&c4, &h);
        let m = coset_module(&c4, &h, 2);
        let (b, _) = brauer(&m, &h, &wd).unwrap();
        let reg_w = coset_module(&wd.weyl, &Subgroup::trivial(&wd.weyl), 2);
        assert!(b.same_matrices(&reg_w));
    }

    #[test]
    fn brauer_for_trivial_subgroup_transports_along_regular_realization() {
        let s3 = g("sym:3");
        let triv = Subgroup::trivial(&s3);
        let wd = weyl_group(&s3, &triv);
        assert_eq!(wd.order(), 6);
        let m = coset_module(&s3, &p_subgroups_up_to_conj(&s3, 2)[1], 2);
        let (b, _) = brauer(&m, &triv, &wd).unwrap();
        assert_eq!(b.dim(), m.dim());
        for wi in 0..wd.weyl.generators().len() {
            let n = wd.preimage_rep(wd.weyl.generator_index(wi));
            assert_eq!(b.gen_action_matrix(wi), m.element_action_matrix(n));
        }
    }

    #[test]
    fn brauer_rejects_non_p_subgroups() {
        let s3 = g("sym:3");
        let c3 = p_subgroups_up_to_conj(&s3, 3)[1].clone();
        let wd = weyl_group(&s3, &c3);
        let m = trivial_module(&s3, 2);
        assert_eq!(brauer(&m, &c3, &wd).unwrap_err(), PermError::NotAPSubgroup);
    }

    #[test]
    fn oracle_example_regular_c2() {
        let c2 = g("cyclic:2");
        let full = Subgroup::full(&c2);
        let wd = weyl_group(&c2, &full);
        let reg = coset_module(&c2, &Subgroup::trivial(&c2), 2);
        let o = brauer_oracle(&reg, &full, &wd).unwrap();
        assert_eq!(o.fixed_space.cols(), 1); // M^H = span(e+s)
        assert_eq!(o.transfer_space.cols(), 1); // transfer from Q=1 hits e+s
        assert_eq!(o.coker_dim(), 0);
    }

    #[test]
    fn oracle_example_trivial_module() {
        let c4 = g("cyclic:4");
        for h in p_subgroups_up_to_conj(&c4, 2) {
            if h.is_trivial() {
                continue;
            }
            let wd = weyl_group(&c4, &h);
            let k = trivial_module(&c4, 2);
            let o = brauer_oracle(&k, &h, &wd).unwrap();
            assert_eq!(o.coker_dim(), 1, "transfers are multiples of [H:Q] = 0");
        }
    }

    #[test]
    fn oracle_for_trivial_h_is_whole_module() {
        let v = g("klein4");
        let triv = Subgroup::trivial(&v);
        let wd = weyl_group(&v, &triv);
        let m = coset_module(&v, &p_subgroups_up_to_conj(&v, 2)[1], 2);
        let o = brauer_oracle(&m, &triv, &wd).unwrap();
        assert_eq!(o.coker_dim(), m.dim());
    }

    #[test]
    fn end_psi_c4_mod_c2() {
        let c4 = g("cyclic:4");
        let x = c4_gen(&c4);
        let h = Subgroup::from_generator_indices(&c4, &[c4.mul(x, x)]);
        let wd = weyl_group(&c4, &h);
        let data = end_psi_data(&c4, &h, &wd, 2).unwrap();
        assert_eq!(data.hom_basis.len(), 2);
        assert!(data.kernel_reps.is_empty());
        assert!(data.surjective);
        assert_eq!(data.nilpotency_index, 1);
    }

    #[test]
    fn end_psi_d8_reflection() {
        let d8 = g("dihedral:8");
        let refl = p_subgroups_up_to_conj(&d8, 2)
            .into_iter()
            .find(|s| s.order() == 2 && !s.is_normal())
            .unwrap();
        let wd = weyl_group(&d8, &refl);
        let data = end_psi_data(&d8, &refl, &wd, 2).unwrap();
        assert_eq!(data.hom_basis.len(), 3);
        assert_eq!(wd.order(), 2);
        assert_eq!(data.kernel_reps.len(), 1);
        assert!(data.surjective);
        assert!(data.nilpotency_index >= 2);
        assert!(data.nilpotency_index <= data.loewy_length);
    }

    #[test]
    fn end_psi_full_subgroup() {
        let q = g("q8");
        let full = Subgroup::full(&q);
        let wd = weyl_group(&q, &full);
        let data = end_psi_data(&q, &full, &wd, 2).unwrap();
        assert_eq!(data.hom_basis.len(), 1);
        assert!(data.kernel_reps.is_empty());
        assert!(data.surjective);
    }

    #[test]
    fn end_psi_rejects_non_p_groups() {
        let s3 = g("sym:3");
        let h = Subgroup::trivial(&s3);
        let wd = weyl_group(&s3, &h);
        assert_eq!(
            end_psi_data(&s3, &h, &wd, 2).unwrap_err(),
            PermError::NotAPGroup
        );
    }

    #[test]
    fn loewy_length_examples() {
        assert_eq!(loewy_length(&g("cyclic:2"), 2), 2);
        assert_eq!(loewy_length(&g("cyclic:4"), 2), 4);
        assert_eq!(loewy_length(&g("klein4"), 2), 3);
    }

    #[test]
    fn zero_composites_through_small_cosets() {
        // N normal p-subgroup with N ≤ H and N ≰ K forces every composite
        // k(G/H) → k(G/K) → k to vanish.
        let c4 = g("cyclic:4");
        let x = c4_gen(&c4);
        let n = Subgroup::from_generator_indices(&c4, &[c4.mul(x, x)]);
        assert!(n.is_normal());
        let h = Subgroup::full(&c4);
        let k = Subgroup::trivial(&c4);
        let hm = coset_module(&c4, &h, 2);
        let km = coset_module(&c4, &k, 2);
        let unit = trivial_module(&c4, 2);
        for f in hom_space_basis(&hm, &km).unwrap() {
            for m in hom_space_basis(&km, &unit).unwrap() {
                assert!(m.compose(&f).is_zero());
            }
        }
    }

    #[test]
    fn brauer_is_monoidal_on_q8_cosets() {
        let q = g("q8");
        let z = center(&q);
        let wd = weyl_group(&q, &z);
        let classes = p_subgroups_up_to_conj(&q, 2);
        for k1 in &classes {
            for k2 in &classes {
                let a = coset_module(&q, k1, 2);
                let b = coset_module(&q, k2, 2);
                let t = tensor_modules(&a, &b).unwrap();
                let (bt, _) = brauer(&t, &z, &wd).unwrap();
                let (ba, _) = brauer(&a, &z, &wd).unwrap();
                let (bb, _) = brauer(&b, &z, &wd).unwrap();
                let tb = tensor_modules(&ba, &bb).unwrap();
                assert!(bt.same_matrices(&tb));
            }
        }
    }
}
