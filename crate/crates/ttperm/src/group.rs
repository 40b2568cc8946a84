//! Finite permutation groups with fully enumerated element lists.
//!
//! Every group in scope is tiny (guarded, default order at most 512), so we
//! keep a complete sorted element list, a multiplication table and a BFS
//! decomposition of each element into generators. That makes subgroup
//! enumeration, normalizers, Weyl groups, double cosets and transporters
//! exhaustive and certifiable, with no Schreier-Sims machinery.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use crate::linalg::is_prime;

/// A permutation of `{0, .., n-1}`; `images[i]` is the image of `i`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Perm {
    images: Vec<usize>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm {
            images: (0..n).collect(),
        }
    }

    pub fn from_images(images: Vec<usize>) -> Self {
        let n = images.len();
        let mut seen = vec![false; n];
        for &i in &images {
            assert!(i < n && !seen[i], "not a permutation");
            seen[i] = true;
        }
        Perm { images }
    }

    /// Cycles are 0-based and applied right to left, as functions.
    pub fn from_cycles(degree: usize, cycles: &[Vec<usize>]) -> Result<Self, String> {
        let mut perm = Perm::identity(degree);
        for cycle in cycles.iter().rev() {
            let mut this = Perm::identity(degree);
            if cycle.len() > 1 {
                let mut seen = BTreeSet::new();
                for &pt in cycle {
                    if pt >= degree {
                        return Err(format!("point {} out of range", pt + 1));
                    }
                    if !seen.insert(pt) {
                        return Err(format!("point {} repeated in cycle", pt + 1));
                    }
                }
                for w in 0..cycle.len() {
                    this.images[cycle[w]] = cycle[(w + 1) % cycle.len()];
                }
            }
            perm = this.compose(&perm);
        }
        Ok(perm)
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i]
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.degree(), other.degree());
        Perm {
            images: other.images.iter().map(|&i| self.images[i]).collect(),
        }
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.degree()];
        for (i, &j) in self.images.iter().enumerate() {
            images[j] = i;
        }
        Perm { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &j)| i == j)
    }

    pub fn order(&self) -> usize {
        let mut k = 1;
        let mut cur = self.clone();
        while !cur.is_identity() {
            cur = self.compose(&cur);
            k += 1;
        }
        k
    }

    /// Disjoint cycle notation, 1-based, cycles sorted by minimal point.
    pub fn cycle_string(&self) -> String {
        let n = self.degree();
        let mut seen = vec![false; n];
        let mut out = String::new();
        for start in 0..n {
            if seen[start] || self.images[start] == start {
                seen[start] = true;
                continue;
            }
            let mut cyc = vec![start];
            seen[start] = true;
            let mut cur = self.images[start];
            while cur != start {
                seen[cur] = true;
                cyc.push(cur);
                cur = self.images[cur];
            }
            out.push('(');
            out.push_str(
                &cyc.iter()
                    .map(|&x| (x + 1).to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            );
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.cycle_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupError {
    Parse { pos: usize, msg: String },
    OrderGuard { limit: usize },
    Invalid(String),
}

impl fmt::Display for GroupError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupError::Parse { pos, msg } => write!(f, "parse error at position {}: {}", pos, msg),
            GroupError::OrderGuard { limit } => write!(f, "order exceeds guard ({})", limit),
            GroupError::Invalid(msg) => write!(f, "{}", msg),
        }
    }
}

impl std::error::Error for GroupError {}

pub const DEFAULT_MAX_ORDER: usize = 512;

/// Finite permutation group with enumerated, sorted element list.
///
/// `elements[0]` is always the identity (it is lexicographically minimal).
pub struct Group {
    degree: usize,
    generators: Vec<Perm>,
    elements: Vec<Perm>,
    mult: Vec<u16>,
    inv: Vec<u16>,
    /// BFS decomposition: `elements[i] = elements[d.0] ∘ generators[d.1]`,
    /// `None` for the identity.
    decomp: Vec<Option<(u16, u16)>>,
}

impl PartialEq for Group {
    fn eq(&self, other: &Self) -> bool {
        self.degree == other.degree && self.elements == other.elements
    }
}

impl Eq for Group {}

impl fmt::Debug for Group {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Group(order {}, degree {})", self.order(), self.degree)
    }
}

impl Group {
    pub fn from_generators(
        degree: usize,
        gens: Vec<Perm>,
        max_order: usize,
    ) -> Result<Arc<Group>, GroupError> {
        let mut generators: Vec<Perm> = Vec::new();
        for g in gens {
            if g.degree() != degree {
                return Err(GroupError::Invalid("generator degree mismatch".into()));
            }
            if !g.is_identity() && !generators.contains(&g) {
                generators.push(g);
            }
        }
        // BFS closure under right multiplication by generators.
        let id = Perm::identity(degree);
        let mut index: HashMap<Perm, usize> = HashMap::new();
        let mut elems: Vec<Perm> = vec![id.clone()];
        let mut raw_decomp: Vec<Option<(usize, usize)>> = vec![None];
        index.insert(id, 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(cur) = queue.pop_front() {
            for (gi, g) in generators.iter().enumerate() {
                let next = elems[cur].compose(g);
                if !index.contains_key(&next) {
                    let ni = elems.len();
                    if ni + 1 > max_order {
                        return Err(GroupError::OrderGuard { limit: max_order });
                    }
                    index.insert(next.clone(), ni);
                    elems.push(next);
                    raw_decomp.push(Some((cur, gi)));
                    queue.push_back(ni);
                }
            }
        }
        // Canonical order: sort elements; remap the decomposition.
        let mut order: Vec<usize> = (0..elems.len()).collect();
        order.sort_by(|&a, &b| elems[a].cmp(&elems[b]));
        let mut new_pos = vec![0usize; elems.len()];
        for (new, &old) in order.iter().enumerate() {
            new_pos[old] = new;
        }
        let elements: Vec<Perm> = order.iter().map(|&old| elems[old].clone()).collect();
        let mut decomp = vec![None; elements.len()];
        for (old, d) in raw_decomp.iter().enumerate() {
            decomp[new_pos[old]] = d.map(|(par, gi)| (new_pos[par] as u16, gi as u16));
        }
        let n = elements.len();
        let mut pos: HashMap<&Perm, usize> = HashMap::new();
        for (i, e) in elements.iter().enumerate() {
            pos.insert(e, i);
        }
        let mut mult = vec![0u16; n * n];
        for a in 0..n {
            for b in 0..n {
                let prod = elements[a].compose(&elements[b]);
                mult[a * n + b] = pos[&prod] as u16;
            }
        }
        let mut inv = vec![0u16; n];
        for a in 0..n {
            inv[a] = pos[&elements[a].inverse()] as u16;
        }
        Ok(Arc::new(Group {
            degree,
            generators,
            elements,
            mult,
            inv,
            decomp,
        }))
    }

    pub fn trivial(degree: usize) -> Arc<Group> {
        Group::from_generators(degree, vec![], DEFAULT_MAX_ORDER).unwrap()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn generators(&self) -> &[Perm] {
        &self.generators
    }

    pub fn elements(&self) -> &[Perm] {
        &self.elements
    }

    pub fn element(&self, i: usize) -> &Perm {
        &self.elements[i]
    }

    pub fn index_of(&self, p: &Perm) -> Option<usize> {
        self.elements.binary_search(p).ok()
    }

    pub fn identity_index(&self) -> usize {
        0
    }

    #[inline]
    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mult[a * self.elements.len() + b] as usize
    }

    #[inline]
    pub fn inv(&self, a: usize) -> usize {
        self.inv[a] as usize
    }

    /// `g⁻¹ x g`.
    pub fn conj(&self, x: usize, g: usize) -> usize {
        self.mul(self.mul(self.inv(g), x), g)
    }

    pub fn element_order(&self, i: usize) -> usize {
        let mut k = 1;
        let mut cur = i;
        while cur != 0 {
            cur = self.mul(cur, i);
            k += 1;
        }
        k
    }

    pub fn is_abelian(&self) -> bool {
        let n = self.order();
        (0..n).all(|a| (0..n).all(|b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn decomposition(&self, i: usize) -> Option<(usize, usize)> {
        self.decomp[i].map(|(a, b)| (a as usize, b as usize))
    }

    /// Index of generator `gi` in the element list.
    pub fn generator_index(&self, gi: usize) -> usize {
        self.index_of(&self.generators[gi]).unwrap()
    }
}

/// Subgroup of a parent group, stored as sorted element indices with a
/// generating witness list.
#[derive(Clone)]
pub struct Subgroup {
    parent: Arc<Group>,
    elements: Vec<usize>,
    generators: Vec<usize>,
}

impl PartialEq for Subgroup {
    fn eq(&self, other: &Self) -> bool {
        self.parent == other.parent && self.elements == other.elements
    }
}

impl Eq for Subgroup {}

impl fmt::Debug for Subgroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let gens: Vec<String> = self
            .generators
            .iter()
            .map(|&g| self.parent.element(g).cycle_string())
            .collect();
        write!(f, "Subgroup(order {}, gens {})", self.order(), gens.join(""))
    }
}

impl Subgroup {
    pub fn from_generator_indices(parent: &Arc<Group>, gens: &[usize]) -> Subgroup {
        let mut elements = BTreeSet::new();
        elements.insert(parent.identity_index());
        let mut queue: VecDeque<usize> = VecDeque::from([parent.identity_index()]);
        while let Some(cur) = queue.pop_front() {
            for &g in gens {
                let next = parent.mul(cur, g);
                if elements.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        let generators: Vec<usize> = gens
            .iter()
            .copied()
            .filter(|&g| g != parent.identity_index())
            .collect();
        Subgroup {
            parent: Arc::clone(parent),
            elements: elements.into_iter().collect(),
            generators,
        }
    }

    /// Builds a subgroup from a full element set, recomputing a small
    /// deterministic generating witness.
    pub fn from_element_set(parent: &Arc<Group>, elems: &BTreeSet<usize>) -> Subgroup {
        let mut gens: Vec<usize> = Vec::new();
        let mut have = Subgroup::from_generator_indices(parent, &gens);
        for &x in elems {
            if !have.contains(x) {
                gens.push(x);
                have = Subgroup::from_generator_indices(parent, &gens);
                if have.order() == elems.len() {
                    break;
                }
            }
        }
        assert_eq!(
            have.elements.len(),
            elems.len(),
            "element set is not closed under multiplication"
        );
        have
    }

    pub fn trivial(parent: &Arc<Group>) -> Subgroup {
        Subgroup::from_generator_indices(parent, &[])
    }

    pub fn full(parent: &Arc<Group>) -> Subgroup {
        let gens: Vec<usize> = (0..parent.generators().len())
            .map(|gi| parent.generator_index(gi))
            .collect();
        let s = Subgroup::from_generator_indices(parent, &gens);
        assert_eq!(s.order(), parent.order());
        s
    }

    pub fn parent(&self) -> &Arc<Group> {
        &self.parent
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn elements(&self) -> &[usize] {
        &self.elements
    }

    pub fn generator_indices(&self) -> &[usize] {
        &self.generators
    }

    pub fn contains(&self, idx: usize) -> bool {
        self.elements.binary_search(&idx).is_ok()
    }

    pub fn contains_subgroup(&self, other: &Subgroup) -> bool {
        other.elements.iter().all(|&e| self.contains(e))
    }

    pub fn is_trivial(&self) -> bool {
        self.order() == 1
    }

    pub fn is_full(&self) -> bool {
        self.order() == self.parent.order()
    }

    pub fn is_normal(&self) -> bool {
        (0..self.parent.order()).all(|g| {
            self.generators
                .iter()
                .all(|&s| self.contains(self.parent.conj(s, g)))
        })
    }

    /// Left cosets `xH`, each sorted, the list sorted by minimal element.
    pub fn left_cosets_in(&self, ambient: &[usize]) -> Vec<Vec<usize>> {
        let mut seen = BTreeSet::new();
        let mut cosets = Vec::new();
        for &x in ambient {
            if seen.contains(&x) {
                continue;
            }
            let mut coset: Vec<usize> = self.elements.iter().map(|&h| self.parent.mul(x, h)).collect();
            coset.sort_unstable();
            for &c in &coset {
                seen.insert(c);
            }
            cosets.push(coset);
        }
        cosets.sort_by_key(|c| c[0]);
        cosets
    }

    pub fn left_cosets(&self) -> Vec<Vec<usize>> {
        let all: Vec<usize> = (0..self.parent.order()).collect();
        self.left_cosets_in(&all)
    }

    /// Standalone permutation group on the same points.
    pub fn as_group(&self, max_order: usize) -> Result<Arc<Group>, GroupError> {
        let gens: Vec<Perm> = self
            .generators
            .iter()
            .map(|&g| self.parent.element(g).clone())
            .collect();
        Group::from_generators(self.parent.degree(), gens, max_order)
    }

    /// Index of a parent element inside the standalone group built by
    /// `as_group`.
    pub fn index_in_as_group(&self, sub: &Arc<Group>, parent_idx: usize) -> usize {
        sub.index_of(self.parent.element(parent_idx))
            .expect("element does not lie in the subgroup")
    }

    pub fn is_p_subgroup(&self, p: u32) -> bool {
        let mut n = self.order();
        while n % p as usize == 0 {
            n /= p as usize;
        }
        n == 1
    }

    pub fn is_elementary_abelian(&self, p: u32) -> bool {
        if !self.is_p_subgroup(p) {
            return false;
        }
        let commutes = self.elements.iter().all(|&a| {
            self.elements
                .iter()
                .all(|&b| self.parent.mul(a, b) == self.parent.mul(b, a))
        });
        commutes
            && self
                .elements
                .iter()
                .all(|&a| a == 0 || self.parent.element_order(a) == p as usize)
    }
}

pub fn conjugate_subgroup(h: &Subgroup, x: usize) -> Subgroup {
    let parent = h.parent();
    let elems: BTreeSet<usize> = h.elements().iter().map(|&e| parent.conj(e, x)).collect();
    let gens: Vec<usize> = h
        .generator_indices()
        .iter()
        .map(|&g| parent.conj(g, x))
        .collect();
    let s = Subgroup::from_generator_indices(parent, &gens);
    debug_assert_eq!(s.elements(), elems.iter().copied().collect::<Vec<_>>().as_slice());
    s
}

pub fn is_conjugate(h: &Subgroup, k: &Subgroup) -> bool {
    if h.order() != k.order() {
        return false;
    }
    let parent = h.parent();
    (0..parent.order()).any(|x| conjugate_subgroup(h, x).elements() == k.elements())
}

/// `N_G(H, K) = { g : H^g ≤ K }`; empty exactly when `H` is not
/// subconjugate to `K`.
pub fn transporter(g: &Arc<Group>, h: &Subgroup, k: &Subgroup) -> Vec<usize> {
    (0..g.order())
        .filter(|&x| {
            h.generator_indices()
                .iter()
                .all(|&s| k.contains(g.conj(s, x)))
        })
        .collect()
}

pub fn is_subconjugate(g: &Arc<Group>, h: &Subgroup, k: &Subgroup) -> bool {
    !transporter(g, h, k).is_empty()
}

pub fn normalizer(g: &Arc<Group>, h: &Subgroup) -> Subgroup {
    let elems: BTreeSet<usize> = (0..g.order())
        .filter(|&x| {
            h.generator_indices().iter().all(|&s| h.contains(g.conj(s, x)))
                && h.generator_indices()
                    .iter()
                    .all(|&s| h.contains(g.conj(s, g.inv(x))))
        })
        .collect();
    Subgroup::from_element_set(g, &elems)
}

pub fn center(g: &Arc<Group>) -> Subgroup {
    let elems: BTreeSet<usize> = (0..g.order())
        .filter(|&x| (0..g.order()).all(|y| g.mul(x, y) == g.mul(y, x)))
        .collect();
    Subgroup::from_element_set(g, &elems)
}

/// All subgroups, found by closing upward from the trivial subgroup; sorted
/// by order then element list.
pub fn all_subgroups(g: &Arc<Group>) -> Vec<Subgroup> {
    enumerate_subgroups(g, None)
}

/// All `p`-subgroups (including the trivial one).
pub fn p_subgroups(g: &Arc<Group>, p: u32) -> Vec<Subgroup> {
    assert!(is_prime(p));
    enumerate_subgroups(g, Some(p))
}

fn enumerate_subgroups(g: &Arc<Group>, p: Option<u32>) -> Vec<Subgroup> {
    let admissible_elem = |x: usize| match p {
        None => true,
        Some(p) => {
            let mut n = g.element_order(x);
            while n % p as usize == 0 {
                n /= p as usize;
            }
            n == 1
        }
    };
    let admissible_order = |n: usize| match p {
        None => true,
        Some(p) => {
            let mut m = n;
            while m % p as usize == 0 {
                m /= p as usize;
            }
            m == 1
        }
    };
    let trivial = Subgroup::trivial(g);
    let mut found: BTreeMap<Vec<usize>, Subgroup> = BTreeMap::new();
    found.insert(trivial.elements().to_vec(), trivial.clone());
    let mut queue = VecDeque::from([trivial]);
    while let Some(s) = queue.pop_front() {
        for x in 1..g.order() {
            if s.contains(x) || !admissible_elem(x) {
                continue;
            }
            let mut gens = s.generator_indices().to_vec();
            gens.push(x);
            let t = Subgroup::from_generator_indices(g, &gens);
            if !admissible_order(t.order()) {
                continue;
            }
            if !found.contains_key(t.elements()) {
                found.insert(t.elements().to_vec(), t.clone());
                queue.push_back(t);
            }
        }
    }
    let mut out: Vec<Subgroup> = found.into_values().collect();
    out.sort_by(|a, b| (a.order(), a.elements()).cmp(&(b.order(), b.elements())));
    out
}

/// One representative per conjugacy class of `p`-subgroups; the
/// representative is the lexicographically minimal sorted element list in
/// its class, and the list is sorted by order then element list.
pub fn p_subgroups_up_to_conj(g: &Arc<Group>, p: u32) -> Vec<Subgroup> {
    let all = p_subgroups(g, p);
    let mut assigned: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut reps = Vec::new();
    for s in &all {
        if assigned.contains(s.elements()) {
            continue;
        }
        let mut orbit: Vec<(Vec<usize>, usize)> = Vec::new();
        for x in 0..g.order() {
            let c = conjugate_subgroup(s, x);
            orbit.push((c.elements().to_vec(), x));
        }
        orbit.sort();
        orbit.dedup_by(|a, b| a.0 == b.0);
        let (_, min_x) = orbit[0].clone();
        for (e, _) in &orbit {
            assigned.insert(e.clone());
        }
        reps.push(conjugate_subgroup(s, min_x));
    }
    reps.sort_by(|a, b| (a.order(), a.elements()).cmp(&(b.order(), b.elements())));
    reps
}

/// Largest `r` such that `(C_p)^r` embeds in `G`, by exhaustive search over
/// the enumerated `p`-subgroups.
pub fn p_rank(g: &Arc<Group>, p: u32) -> usize {
    let mut best = 0usize;
    for s in p_subgroups_up_to_conj(g, p) {
        if s.is_elementary_abelian(p) {
            let mut r = 0;
            let mut n = s.order();
            while n > 1 {
                n /= p as usize;
                r += 1;
            }
            best = best.max(r);
        }
    }
    best
}

pub fn is_p_group(g: &Arc<Group>, p: u32) -> bool {
    let mut n = g.order();
    while n % p as usize == 0 {
        n /= p as usize;
    }
    n == 1
}

pub fn sylow_class_rep(g: &Arc<Group>, p: u32) -> Subgroup {
    p_subgroups_up_to_conj(g, p)
        .into_iter()
        .max_by_key(|s| s.order())
        .expect("at least the trivial subgroup exists")
}

/// One minimal representative per double coset in `H\G/K`, in ascending
/// element order, together with the members of each class.
pub fn double_cosets(g: &Arc<Group>, h: &Subgroup, k: &Subgroup) -> Vec<(usize, Vec<usize>)> {
    let mut seen = vec![false; g.order()];
    let mut out = Vec::new();
    for x in 0..g.order() {
        if seen[x] {
            continue;
        }
        let mut members = BTreeSet::new();
        let mut queue = VecDeque::from([x]);
        seen[x] = true;
        members.insert(x);
        while let Some(cur) = queue.pop_front() {
            for &s in h.generator_indices() {
                let next = g.mul(s, cur);
                if members.insert(next) {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
            for &s in k.generator_indices() {
                let next = g.mul(cur, s);
                if members.insert(next) {
                    seen[next] = true;
                    queue.push_back(next);
                }
            }
        }
        out.push((x, members.into_iter().collect()));
    }
    out
}

pub fn double_coset_reps(g: &Arc<Group>, h: &Subgroup, k: &Subgroup) -> Vec<usize> {
    double_cosets(g, h, k).into_iter().map(|(r, _)| r).collect()
}

/// Weyl group `W = N_G(H)/H` realized as permutations of the coset set
/// `N/H` by left multiplication; faithful because the action of `N/H` on
/// itself is regular.
pub struct WeylData {
    pub subgroup: Subgroup,
    pub normalizer: Subgroup,
    pub weyl: Arc<Group>,
    /// Cosets of `H` in `N`, each sorted, list sorted by minimal element.
    pub cosets: Vec<Vec<usize>>,
    /// Minimal representative of each coset.
    pub coset_reps: Vec<usize>,
    /// For each position in `normalizer.elements()`: the index in
    /// `weyl.elements()` of its image. Surjective with kernel exactly `H`.
    pub projection: Vec<usize>,
}

impl WeylData {
    pub fn order(&self) -> usize {
        self.weyl.order()
    }

    /// Image of a parent element (which must normalize `H`).
    pub fn project(&self, parent_idx: usize) -> usize {
        let pos = self
            .normalizer
            .elements()
            .binary_search(&parent_idx)
            .expect("element is not in the normalizer");
        self.projection[pos]
    }

    /// A parent-group preimage of a Weyl element: the minimal
    /// representative of the coset it sends the identity coset to.
    pub fn preimage_rep(&self, weyl_idx: usize) -> usize {
        let image_coset = self.weyl.element(weyl_idx).apply(0);
        self.coset_reps[image_coset]
    }
}

pub fn weyl_group(g: &Arc<Group>, h: &Subgroup) -> WeylData {
    let normalizer = normalizer(g, h);
    let cosets = h.left_cosets_in(normalizer.elements());
    let coset_reps: Vec<usize> = cosets.iter().map(|c| c[0]).collect();
    let coset_of: BTreeMap<usize, usize> = cosets
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&e| (e, i)))
        .collect();
    let sigma = |n: usize| -> Perm {
        Perm::from_images(
            coset_reps
                .iter()
                .map(|&r| coset_of[&g.mul(n, r)])
                .collect(),
        )
    };
    let gens: Vec<Perm> = normalizer
        .generator_indices()
        .iter()
        .map(|&n| sigma(n))
        .collect();
    let weyl = Group::from_generators(cosets.len(), gens, DEFAULT_MAX_ORDER.max(cosets.len()))
        .expect("Weyl group closure cannot exceed its own coset count");
    assert_eq!(
        weyl.order() * h.order(),
        normalizer.order(),
        "Weyl group order mismatch"
    );
    let projection: Vec<usize> = normalizer
        .elements()
        .iter()
        .map(|&n| weyl.index_of(&sigma(n)).expect("projection lands in W"))
        .collect();
    WeylData {
        subgroup: h.clone(),
        normalizer,
        weyl,
        cosets,
        coset_reps,
        projection,
    }
}

// ---------------------------------------------------------------------------
// Group-spec mini-language
// ---------------------------------------------------------------------------

struct Parser<'a> {
    text: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.text.len() && (self.text[self.pos] as char).is_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.text.get(self.pos).map(|&b| b as char)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), GroupError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(GroupError::Parse {
                pos: self.pos,
                msg: format!("expected '{}'", c),
            })
        }
    }

    fn starts_with(&self, kw: &str) -> bool {
        self.text[self.pos..].starts_with(kw.as_bytes())
    }

    fn number(&mut self) -> Result<usize, GroupError> {
        let start = self.pos;
        while self.pos < self.text.len() && (self.text[self.pos] as char).is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(GroupError::Parse {
                pos: self.pos,
                msg: "expected a number".into(),
            });
        }
        std::str::from_utf8(&self.text[start..self.pos])
            .unwrap()
            .parse()
            .map_err(|_| GroupError::Parse {
                pos: start,
                msg: "number out of range".into(),
            })
    }
}

/// Generators of each named family, as permutations.
fn atom_generators(parser: &mut Parser) -> Result<(usize, Vec<Perm>), GroupError> {
    parser.skip_ws();
    let pos = parser.pos;
    if parser.starts_with("cyclic:") {
        parser.pos += "cyclic:".len();
        let n = parser.number()?;
        if n == 0 {
            return Err(GroupError::Parse {
                pos,
                msg: "cyclic group order must be positive".into(),
            });
        }
        if n == 1 {
            return Ok((1, vec![]));
        }
        let cycle: Vec<usize> = (0..n).collect();
        Ok((n, vec![Perm::from_cycles(n, &[cycle]).unwrap()]))
    } else if parser.starts_with("klein4") {
        parser.pos += "klein4".len();
        let a = Perm::from_cycles(4, &[vec![0, 1]]).unwrap();
        let b = Perm::from_cycles(4, &[vec![2, 3]]).unwrap();
        Ok((4, vec![a, b]))
    } else if parser.starts_with("elab:") {
        parser.pos += "elab:".len();
        let p = parser.number()?;
        parser.expect('^')?;
        let r = parser.number()?;
        if !is_prime(p as u32) {
            return Err(GroupError::Parse {
                pos,
                msg: format!("{} is not prime", p),
            });
        }
        if r == 0 {
            return Ok((1, vec![]));
        }
        let degree = p * r;
        let gens = (0..r)
            .map(|i| {
                let cycle: Vec<usize> = (0..p).map(|j| i * p + j).collect();
                Perm::from_cycles(degree, &[cycle]).unwrap()
            })
            .collect();
        Ok((degree, gens))
    } else if parser.starts_with("q8") {
        parser.pos += "q8".len();
        Ok(quaternion_generators())
    } else if parser.starts_with("dihedral:") {
        parser.pos += "dihedral:".len();
        let m = parser.number()?;
        if m < 2 || m % 2 != 0 {
            return Err(GroupError::Parse {
                pos,
                msg: "dihedral order must be even and at least 2".into(),
            });
        }
        let n = m / 2;
        match n {
            1 => Ok((2, vec![Perm::from_cycles(2, &[vec![0, 1]]).unwrap()])),
            2 => {
                let a = Perm::from_cycles(4, &[vec![0, 1]]).unwrap();
                let b = Perm::from_cycles(4, &[vec![2, 3]]).unwrap();
                Ok((4, vec![a, b]))
            }
            _ => {
                let rot: Vec<usize> = (0..n).collect();
                let r = Perm::from_cycles(n, &[rot]).unwrap();
                let s = Perm::from_images((0..n).map(|i| (n - i) % n).collect());
                Ok((n, vec![r, s]))
            }
        }
    } else if parser.starts_with("sym:") {
        parser.pos += "sym:".len();
        let n = parser.number()?;
        if n == 0 {
            return Err(GroupError::Parse {
                pos,
                msg: "sym degree must be positive".into(),
            });
        }
        if n == 1 {
            return Ok((1, vec![]));
        }
        let transposition = Perm::from_cycles(n, &[vec![0, 1]]).unwrap();
        let cycle: Vec<usize> = (0..n).collect();
        let rotation = Perm::from_cycles(n, &[cycle]).unwrap();
        Ok((n, vec![transposition, rotation]))
    } else if parser.starts_with("perm:[") {
        parser.pos += "perm:[".len();
        // Comma-separated generators; each generator is one or more
        // juxtaposed parenthesized cycles, 1-based.
        let mut gens_cycles: Vec<Vec<Vec<usize>>> = Vec::new();
        let mut degree = 1usize;
        loop {
            parser.skip_ws();
            let mut cycles: Vec<Vec<usize>> = Vec::new();
            loop {
                parser.skip_ws();
                if parser.peek() != Some('(') {
                    break;
                }
                parser.expect('(')?;
                let mut cycle = Vec::new();
                loop {
                    parser.skip_ws();
                    let v = parser.number()?;
                    if v == 0 {
                        return Err(GroupError::Parse {
                            pos: parser.pos,
                            msg: "points are 1-based".into(),
                        });
                    }
                    degree = degree.max(v);
                    cycle.push(v - 1);
                    parser.skip_ws();
                    if !parser.eat(',') {
                        break;
                    }
                }
                parser.expect(')')?;
                cycles.push(cycle);
            }
            if cycles.is_empty() {
                return Err(GroupError::Parse {
                    pos: parser.pos,
                    msg: "expected a cycle".into(),
                });
            }
            gens_cycles.push(cycles);
            parser.skip_ws();
            if !parser.eat(',') {
                break;
            }
        }
        parser.expect(']')?;
        let mut gens = Vec::new();
        for cycles in gens_cycles {
            gens.push(
                Perm::from_cycles(degree, &cycles).map_err(|msg| GroupError::Parse { pos, msg })?,
            );
        }
        Ok((degree, gens))
    } else {
        Err(GroupError::Parse {
            pos,
            msg: "expected cyclic:n, elab:p^r, klein4, q8, dihedral:2n, sym:n or perm:[...]".into(),
        })
    }
}

/// Quaternion group on 8 points via the right regular action. Elements are
/// numbered 1, -1, i, -i, j, -j, k, -k; generators are right multiplication
/// by i and by j.
fn quaternion_generators() -> (usize, Vec<Perm>) {
    // (sign, unit) with units 0=1, 1=i, 2=j, 3=k.
    let unit_mul = |a: usize, b: usize| -> (bool, usize) {
        match (a, b) {
            (0, x) => (false, x),
            (x, 0) => (false, x),
            (1, 1) | (2, 2) | (3, 3) => (true, 0),
            (1, 2) => (false, 3),
            (2, 1) => (true, 3),
            (2, 3) => (false, 1),
            (3, 2) => (true, 1),
            (3, 1) => (false, 2),
            (1, 3) => (true, 2),
            _ => unreachable!(),
        }
    };
    let encode = |neg: bool, unit: usize| -> usize { unit * 2 + usize::from(neg) };
    let decode = |x: usize| -> (bool, usize) { (x % 2 == 1, x / 2) };
    let right_mul_by = |g: usize| -> Perm {
        Perm::from_images(
            (0..8)
                .map(|x| {
                    let (xn, xu) = decode(x);
                    let (gn, gu) = decode(g);
                    let (mn, mu) = unit_mul(xu, gu);
                    encode(xn ^ gn ^ mn, mu)
                })
                .collect(),
        )
    };
    let i = encode(false, 1);
    let j = encode(false, 2);
    (8, vec![right_mul_by(i), right_mul_by(j)])
}

/// Parses the group-spec mini-language: `cyclic:n`, `elab:p^r`, `klein4`,
/// `q8`, `dihedral:2n`, `sym:n`, `perm:[(1,2),(3,4,5)]`, with ` x ` products.
pub fn parse_group_spec(text: &str, max_order: usize) -> Result<Arc<Group>, GroupError> {
    let mut parser = Parser {
        text: text.as_bytes(),
        pos: 0,
    };
    let mut factors: Vec<(usize, Vec<Perm>)> = vec![atom_generators(&mut parser)?];
    loop {
        parser.skip_ws();
        if parser.peek() == Some('x') {
            parser.pos += 1;
            factors.push(atom_generators(&mut parser)?);
        } else {
            break;
        }
    }
    parser.skip_ws();
    if parser.pos != parser.text.len() {
        return Err(GroupError::Parse {
            pos: parser.pos,
            msg: "unexpected trailing input".into(),
        });
    }
    let degree: usize = factors.iter().map(|(d, _)| d).sum();
    let mut gens: Vec<Perm> = Vec::new();
    let mut offset = 0usize;
    for (d, fg) in &factors {
        for g in fg {
            let mut images: Vec<usize> = (0..degree).collect();
            for i in 0..*d {
                images[offset + i] = offset + g.apply(i);
            }
            gens.push(Perm::from_images(images));
        }
        offset += d;
    }
    Group::from_generators(degree, gens, max_order)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(spec: &str) -> Arc<Group> {
        parse_group_spec(spec, DEFAULT_MAX_ORDER).unwrap()
    }

    #[test]
    fn cyclic4_is_order_4_on_4_points() {
        let c4 = g("cyclic:4");
        assert_eq!(c4.order(), 4);
        assert_eq!(c4.degree(), 4);
    }

    #[test]
    fn klein4_has_exponent_2() {
        let v = g("klein4");
        assert_eq!(v.order(), 4);
        assert!((0..4).all(|i| v.mul(i, i) == 0));
    }

    #[test]
    fn q8_has_one_involution() {
        let q = g("q8");
        assert_eq!(q.order(), 8);
        let involutions = (1..8).filter(|&i| q.element_order(i) == 2).count();
        assert_eq!(involutions, 1);
        let order4 = (0..8).filter(|&i| q.element_order(i) == 4).count();
        assert_eq!(order4, 6);
    }

    #[test]
    fn parse_errors_carry_position() {
        match parse_group_spec("cyclic:zzz", 512) {
            Err(GroupError::Parse { pos, .. }) => assert_eq!(pos, 7),
            other => panic!("expected parse error, got {:?}", other.map(|g| g.order())),
        }
    }

    #[test]
    fn order_guard_triggers() {
        match parse_group_spec("sym:6", 512) {
            Err(GroupError::OrderGuard { .. }) => {}
            other => panic!("expected guard breach, got {:?}", other.map(|g| g.order())),
        }
    }

    #[test]
    fn whitespace_insensitive_products() {
        assert_eq!(g("cyclic:2 x cyclic:2"), g("cyclic:2xcyclic:2"));
        assert_eq!(g("klein4").order(), g("cyclic:2 x cyclic:2").order());
    }

    #[test]
    fn perm_spec_generators() {
        let c6 = g("perm:[(1,2),(3,4,5)]");
        assert_eq!(c6.order(), 6);
        assert!(c6.is_abelian());
    }

    #[test]
    fn klein4_has_5_classes_of_2_subgroups() {
        let v = g("klein4");
        let classes = p_subgroups_up_to_conj(&v, 2);
        let orders: Vec<usize> = classes.iter().map(|s| s.order()).collect();
        assert_eq!(orders, vec![1, 2, 2, 2, 4]);
    }

    #[test]
    fn q8_has_6_classes_of_2_subgroups() {
        let q = g("q8");
        let classes = p_subgroups_up_to_conj(&q, 2);
        let orders: Vec<usize> = classes.iter().map(|s| s.order()).collect();
        assert_eq!(orders, vec![1, 2, 4, 4, 4, 8]);
    }

    #[test]
    fn cyclic6_has_2_classes_of_3_subgroups() {
        let c6 = g("cyclic:6");
        let classes = p_subgroups_up_to_conj(&c6, 3);
        assert_eq!(classes.len(), 2);
    }

    #[test]
    fn weyl_of_q8_center_is_klein4() {
        let q = g("q8");
        let z = center(&q);
        assert_eq!(z.order(), 2);
        let wd = weyl_group(&q, &z);
        assert_eq!(wd.normalizer.order(), 8);
        assert_eq!(wd.order(), 4);
        assert!((0..4).all(|i| wd.weyl.mul(i, i) == 0), "W is elementary abelian");
    }

    #[test]
    fn weyl_of_trivial_subgroup_is_whole_group() {
        let s3 = g("sym:3");
        let wd = weyl_group(&s3, &Subgroup::trivial(&s3));
        assert_eq!(wd.normalizer.order(), 6);
        assert_eq!(wd.order(), 6);
    }

    #[test]
    fn weyl_of_transposition_in_s3_is_trivial() {
        let s3 = g("sym:3");
        let t = s3.index_of(&Perm::from_cycles(3, &[vec![0, 1]]).unwrap()).unwrap();
        let h = Subgroup::from_generator_indices(&s3, &[t]);
        let wd = weyl_group(&s3, &h);
        assert_eq!(wd.normalizer.order(), 2);
        assert_eq!(wd.order(), 1);
    }

    #[test]
    fn weyl_projection_is_homomorphism_with_kernel_h() {
        let q = g("q8");
        for h in p_subgroups_up_to_conj(&q, 2) {
            let wd = weyl_group(&q, &h);
            let n = wd.normalizer.elements().to_vec();
            for &a in &n {
                for &b in &n {
                    let ab = q.mul(a, b);
                    assert_eq!(
                        wd.project(ab),
                        wd.weyl.mul(wd.project(a), wd.project(b))
                    );
                }
            }
            let kernel: Vec<usize> = n
                .iter()
                .copied()
                .filter(|&a| wd.project(a) == wd.weyl.identity_index())
                .collect();
            assert_eq!(kernel, h.elements());
        }
    }

    #[test]
    fn double_cosets_partition_the_group() {
        for spec in ["sym:3", "q8", "dihedral:8", "cyclic:6"] {
            let gr = g(spec);
            let subs = all_subgroups(&gr);
            for h in &subs {
                for k in &subs {
                    let dcs = double_cosets(&gr, h, k);
                    let total: usize = dcs.iter().map(|(_, m)| m.len()).sum();
                    assert_eq!(total, gr.order());
                }
            }
        }
    }

    #[test]
    fn double_coset_examples() {
        let c2 = g("cyclic:2");
        let t = Subgroup::trivial(&c2);
        assert_eq!(double_coset_reps(&c2, &t, &t).len(), 2);

        let s3 = g("sym:3");
        let t12 = s3.index_of(&Perm::from_cycles(3, &[vec![0, 1]]).unwrap()).unwrap();
        let h = Subgroup::from_generator_indices(&s3, &[t12]);
        let dcs = double_cosets(&s3, &h, &h);
        assert_eq!(dcs.len(), 2);
        let mut sizes: Vec<usize> = dcs.iter().map(|(_, m)| m.len()).collect();
        sizes.sort_unstable();
        assert_eq!(sizes, vec![2, 4]);

        let full = Subgroup::full(&s3);
        assert_eq!(double_coset_reps(&s3, &full, &full).len(), 1);
    }

    #[test]
    fn transporter_examples() {
        let v = g("klein4");
        let classes = p_subgroups_up_to_conj(&v, 2);
        let n0 = &classes[1];
        let n1 = &classes[2];
        assert!(transporter(&v, n0, n1).is_empty());
        assert!(!transporter(&v, n0, n0).is_empty());
        let trivial = Subgroup::trivial(&v);
        assert_eq!(transporter(&v, &trivial, n1).len(), v.order());
    }

    #[test]
    fn transporter_contains_normalizer_when_h_eq_k() {
        let d8 = g("dihedral:8");
        for h in p_subgroups_up_to_conj(&d8, 2) {
            let t = transporter(&d8, &h, &h);
            let n = normalizer(&d8, &h);
            assert!(n.elements().iter().all(|e| t.contains(e)));
            assert!(!t.is_empty());
        }
    }

    #[test]
    fn p_rank_examples() {
        assert_eq!(p_rank(&g("klein4"), 2), 2);
        assert_eq!(p_rank(&g("q8"), 2), 1);
        assert_eq!(p_rank(&g("cyclic:9"), 3), 1);
        assert_eq!(p_rank(&g("elab:2^3"), 2), 3);
    }

    #[test]
    fn conjugation_examples() {
        let s3 = g("sym:3");
        let t12 = s3.index_of(&Perm::from_cycles(3, &[vec![0, 1]]).unwrap()).unwrap();
        let t13 = s3.index_of(&Perm::from_cycles(3, &[vec![0, 2]]).unwrap()).unwrap();
        let h = Subgroup::from_generator_indices(&s3, &[t12]);
        let k = Subgroup::from_generator_indices(&s3, &[t13]);
        assert!(is_conjugate(&h, &k));
        assert_eq!(conjugate_subgroup(&h, 0).elements(), h.elements());
        let v = g("klein4");
        let n0 = &p_subgroups_up_to_conj(&v, 2)[1];
        for x in 0..4 {
            assert_eq!(conjugate_subgroup(n0, x).elements(), n0.elements());
        }
    }

    #[test]
    fn classes_exhaust_and_are_pairwise_nonconjugate() {
        for spec in ["sym:4", "dihedral:8", "q8", "elab:2^3", "sym:3"] {
            let gr = g(spec);
            for p in [2u32, 3] {
                let classes = p_subgroups_up_to_conj(&gr, p);
                for (i, a) in classes.iter().enumerate() {
                    for b in classes.iter().skip(i + 1) {
                        assert!(!is_conjugate(a, b));
                    }
                }
                let all = p_subgroups(&gr, p);
                for s in &all {
                    assert!(classes.iter().any(|c| is_conjugate(c, s)));
                }
            }
        }
    }

    #[test]
    fn transporter_matches_subconjugacy_via_classes() {
        let d8 = g("dihedral:8");
        let classes = p_subgroups_up_to_conj(&d8, 2);
        for h in &classes {
            for k in &classes {
                let direct = !transporter(&d8, h, k).is_empty();
                let by_classes = (0..d8.order())
                    .any(|x| k.contains_subgroup(&conjugate_subgroup(h, x)));
                assert_eq!(direct, by_classes);
            }
        }
    }

    #[test]
    fn sym4_has_30_subgroups() {
        assert_eq!(all_subgroups(&g("sym:4")).len(), 30);
    }
}
