//! Finite G-sets: coset spaces, products, orbits and H-fixed points with
//! their Weyl-group action.
//!
//! Actions are stored on generators only and validated against the full
//! element closure once at construction.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use crate::group::{Group, Subgroup, WeylData};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GSetError {
    NotAPermutation,
    NotAHomomorphism,
    GroupMismatch,
}

impl fmt::Display for GSetError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GSetError::NotAPermutation => write!(f, "generator action is not a permutation"),
            GSetError::NotAHomomorphism => {
                write!(f, "generator actions do not extend to a group action")
            }
            GSetError::GroupMismatch => write!(f, "operands live over different groups"),
        }
    }
}

impl std::error::Error for GSetError {}

/// A finite set with a G-action given on generators.
#[derive(Clone)]
pub struct GSet {
    group: Arc<Group>,
    labels: Vec<String>,
    /// `gen_actions[gi][x]` is the image of point `x` under generator `gi`.
    gen_actions: Vec<Vec<usize>>,
}

impl fmt::Debug for GSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GSet({} points over {:?})", self.len(), self.group)
    }
}

impl GSet {
    pub fn new(
        group: Arc<Group>,
        labels: Vec<String>,
        gen_actions: Vec<Vec<usize>>,
    ) -> Result<GSet, GSetError> {
        let n = labels.len();
        if gen_actions.len() != group.generators().len() {
            return Err(GSetError::NotAHomomorphism);
        }
        for act in &gen_actions {
            if act.len() != n {
                return Err(GSetError::NotAPermutation);
            }
            let mut seen = vec![false; n];
            for &i in act {
                if i >= n || seen[i] {
                    return Err(GSetError::NotAPermutation);
                }
                seen[i] = true;
            }
        }
        let gset = GSet {
            group,
            labels,
            gen_actions,
        };
        gset.validate_homomorphism()?;
        Ok(gset)
    }

    /// Extends the generator actions along the BFS decomposition of the
    /// element list and checks the multiplication-table coherence
    /// `φ(x·g) = φ(x)∘φ(g)` for every element `x` and generator `g`.
    fn validate_homomorphism(&self) -> Result<(), GSetError> {
        let acts = self.element_actions();
        for x in 0..self.group.order() {
            for gi in 0..self.gen_actions.len() {
                let xg = self.group.mul(x, self.group.generator_index(gi));
                for pt in 0..self.len() {
                    if acts[xg][pt] != acts[x][self.gen_actions[gi][pt]] {
                        return Err(GSetError::NotAHomomorphism);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn group(&self) -> &Arc<Group> {
        &self.group
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn gen_action(&self, gi: usize) -> &[usize] {
        &self.gen_actions[gi]
    }

    /// Action of every group element, indexed like `group.elements()`.
    pub fn element_actions(&self) -> Vec<Vec<usize>> {
        let order = self.group.order();
        let mut acts: Vec<Option<Vec<usize>>> = vec![None; order];
        for e in 0..order {
            self.fill_action(e, &mut acts);
        }
        acts.into_iter().map(|a| a.unwrap()).collect()
    }

    fn fill_action(&self, e: usize, acts: &mut Vec<Option<Vec<usize>>>) {
        if acts[e].is_some() {
            return;
        }
        // e = parent ∘ gen: φ(e)(x) = φ(parent)(φ(gen)(x)).
        let act = match self.group.decomposition(e) {
            None => (0..self.len()).collect(),
            Some((parent, gi)) => {
                self.fill_action(parent, acts);
                let pa = acts[parent].as_ref().unwrap();
                self.gen_actions[gi].iter().map(|&y| pa[y]).collect()
            }
        };
        acts[e] = Some(act);
    }

    pub fn element_action(&self, elem: usize) -> Vec<usize> {
        match self.group.decomposition(elem) {
            None => (0..self.len()).collect(),
            Some((parent, gi)) => {
                let pa = self.element_action(parent);
                self.gen_actions[gi].iter().map(|&y| pa[y]).collect()
            }
        }
    }
}

/// The one-point G-set.
pub fn trivial_gset(group: &Arc<Group>) -> GSet {
    GSet::new(
        Arc::clone(group),
        vec!["*".to_string()],
        vec![vec![0]; group.generators().len()],
    )
    .unwrap()
}

/// Left cosets `G/H` with left-multiplication action; labels record the
/// minimal coset representatives.
pub fn coset_gset(g: &Arc<Group>, h: &Subgroup) -> GSet {
    assert_eq!(h.parent().as_ref(), g.as_ref(), "subgroup of a different group");
    let cosets = h.left_cosets();
    let coset_of: BTreeMap<usize, usize> = cosets
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&e| (e, i)))
        .collect();
    let labels: Vec<String> = cosets
        .iter()
        .map(|c| format!("{}H", g.element(c[0]).cycle_string()))
        .collect();
    let gen_actions: Vec<Vec<usize>> = (0..g.generators().len())
        .map(|gi| {
            let ge = g.generator_index(gi);
            cosets.iter().map(|c| coset_of[&g.mul(ge, c[0])]).collect()
        })
        .collect();
    GSet::new(Arc::clone(g), labels, gen_actions).unwrap()
}

/// The regular G-set `G/1`.
pub fn regular_gset(g: &Arc<Group>) -> GSet {
    coset_gset(g, &Subgroup::trivial(g))
}

/// Cartesian product with diagonal action; points ordered pair-major.
pub fn product_gset(x: &GSet, y: &GSet) -> Result<GSet, GSetError> {
    if x.group().as_ref() != y.group().as_ref() {
        return Err(GSetError::GroupMismatch);
    }
    let labels: Vec<String> = x
        .labels()
        .iter()
        .flat_map(|lx| y.labels().iter().map(move |ly| format!("({lx},{ly})")))
        .collect();
    let ny = y.len();
    let gen_actions: Vec<Vec<usize>> = (0..x.group().generators().len())
        .map(|gi| {
            let ax = x.gen_action(gi);
            let ay = y.gen_action(gi);
            (0..x.len())
                .flat_map(|i| (0..ny).map(move |j| ax[i] * ny + ay[j]))
                .collect()
        })
        .collect();
    GSet::new(Arc::clone(x.group()), labels, gen_actions)
}

#[derive(Debug, Clone)]
pub struct Orbit {
    /// Point indices, ascending.
    pub points: Vec<usize>,
    /// Minimal point of the orbit.
    pub rep: usize,
    /// Stabilizer of the representative.
    pub stabilizer: Subgroup,
}

/// Orbit partition with a point stabilizer per orbit; orbits are listed by
/// minimal point.
pub fn orbits(x: &GSet) -> Vec<Orbit> {
    let acts = x.element_actions();
    let g = x.group();
    let mut seen = vec![false; x.len()];
    let mut out = Vec::new();
    for start in 0..x.len() {
        if seen[start] {
            continue;
        }
        let mut pts: Vec<usize> = acts.iter().map(|a| a[start]).collect();
        pts.sort_unstable();
        pts.dedup();
        for &p in &pts {
            seen[p] = true;
        }
        let stab_elems: std::collections::BTreeSet<usize> = (0..g.order())
            .filter(|&e| acts[e][start] == start)
            .collect();
        let stabilizer = Subgroup::from_element_set(g, &stab_elems);
        out.push(Orbit {
            points: pts,
            rep: start,
            stabilizer,
        });
    }
    out
}

/// The H-fixed points of `x`, as a G-set for the Weyl group `W_G(H)`; the
/// Weyl action is induced by acting through coset representatives of the
/// normalizer.
pub fn fixed_points(x: &GSet, h: &Subgroup, wd: &WeylData) -> GSet {
    assert_eq!(h.parent().as_ref(), x.group().as_ref());
    assert_eq!(wd.subgroup.elements(), h.elements(), "Weyl data for a different subgroup");
    let fixed = fixed_point_indices(x, h);
    let labels: Vec<String> = fixed.iter().map(|&i| x.labels()[i].clone()).collect();
    let pos: BTreeMap<usize, usize> = fixed.iter().enumerate().map(|(a, &b)| (b, a)).collect();
    let gen_actions: Vec<Vec<usize>> = (0..wd.weyl.generators().len())
        .map(|wi| {
            let n = wd.preimage_rep(wd.weyl.generator_index(wi));
            let act = x.element_action(n);
            fixed.iter().map(|&i| pos[&act[i]]).collect()
        })
        .collect();
    GSet::new(Arc::clone(&wd.weyl), labels, gen_actions).unwrap()
}

/// Indices (in `x` order) of points fixed by every element of `h`.
pub fn fixed_point_indices(x: &GSet, h: &Subgroup) -> Vec<usize> {
    let mut fixed: Vec<usize> = (0..x.len()).collect();
    for &s in h.generator_indices() {
        let act = x.element_action(s);
        fixed.retain(|&i| act[i] == i);
    }
    fixed
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{
        center, p_subgroups_up_to_conj, parse_group_spec, transporter, weyl_group,
        DEFAULT_MAX_ORDER,
    };

    fn g(spec: &str) -> Arc<Group> {
        parse_group_spec(spec, DEFAULT_MAX_ORDER).unwrap()
    }

    #[test]
    fn coset_gset_of_full_subgroup_is_a_point() {
        let q = g("q8");
        let x = coset_gset(&q, &Subgroup::full(&q));
        assert_eq!(x.len(), 1);
    }

    #[test]
    fn regular_gset_has_group_order_points() {
        let q = g("q8");
        assert_eq!(regular_gset(&q).len(), 8);
    }

    #[test]
    fn q8_mod_center_has_4_points_with_central_kernel() {
        let q = g("q8");
        let z = center(&q);
        let x = coset_gset(&q, &z);
        assert_eq!(x.len(), 4);
        let acts = x.element_actions();
        let kernel: Vec<usize> = (0..q.order())
            .filter(|&e| acts[e].iter().enumerate().all(|(i, &j)| i == j))
            .collect();
        assert_eq!(kernel, z.elements());
    }

    #[test]
    fn fixed_points_empty_iff_transporter_empty() {
        for spec in ["q8", "dihedral:8", "sym:3", "klein4"] {
            let gr = g(spec);
            for p in [2u32, 3] {
                let classes = p_subgroups_up_to_conj(&gr, p);
                for h in &classes {
                    let wd = weyl_group(&gr, h);
                    for k in &classes {
                        let x = coset_gset(&gr, k);
                        let f = fixed_points(&x, h, &wd);
                        let t = transporter(&gr, h, k);
                        assert_eq!(f.is_empty(), t.is_empty());
                        assert_eq!(f.len(), t.len() / k.order());
                    }
                }
            }
        }
    }

    #[test]
    fn center_fixes_every_coset_of_itself() {
        let q = g("q8");
        let z = center(&q);
        let wd = weyl_group(&q, &z);
        let x = coset_gset(&q, &z);
        assert_eq!(fixed_points(&x, &z, &wd).len(), 4);
    }

    #[test]
    fn regular_gset_has_no_fixed_points_for_nontrivial_h() {
        let v = g("klein4");
        let n0 = &p_subgroups_up_to_conj(&v, 2)[1];
        let wd = weyl_group(&v, n0);
        assert!(fixed_points(&regular_gset(&v), n0, &wd).is_empty());
    }

    #[test]
    fn product_with_point_is_identity_on_sizes() {
        let v = g("klein4");
        let x = regular_gset(&v);
        let pt = trivial_gset(&v);
        let prod = product_gset(&x, &pt).unwrap();
        assert_eq!(prod.len(), x.len());
        assert_eq!(orbits(&prod).len(), orbits(&x).len());
    }

    #[test]
    fn square_of_regular_c2_set_has_2_orbits() {
        let c2 = g("cyclic:2");
        let x = regular_gset(&c2);
        let prod = product_gset(&x, &x).unwrap();
        assert_eq!(prod.len(), 4);
        assert_eq!(orbits(&prod).len(), 2);
    }

    #[test]
    fn orbit_count_of_coset_product_matches_double_cosets() {
        use crate::group::{all_subgroups, double_coset_reps};
        for spec in ["sym:3", "dihedral:8", "q8"] {
            let gr = g(spec);
            let subs = all_subgroups(&gr);
            for h in &subs {
                for k in &subs {
                    let prod =
                        product_gset(&coset_gset(&gr, h), &coset_gset(&gr, k)).unwrap();
                    assert_eq!(
                        orbits(&prod).len(),
                        double_coset_reps(&gr, h, k).len(),
                        "G={} H-order={} K-order={}",
                        spec,
                        h.order(),
                        k.order()
                    );
                }
            }
        }
    }

    #[test]
    fn klein4_mixed_coset_product_is_one_orbit_of_4() {
        let v = g("klein4");
        let classes = p_subgroups_up_to_conj(&v, 2);
        let x = coset_gset(&v, &classes[1]);
        let y = coset_gset(&v, &classes[2]);
        let prod = product_gset(&x, &y).unwrap();
        let os = orbits(&prod);
        assert_eq!(os.len(), 1);
        assert_eq!(os[0].points.len(), 4);
    }

    #[test]
    fn orbit_stabilizers_satisfy_counting() {
        let d8 = g("dihedral:8");
        for h in p_subgroups_up_to_conj(&d8, 2) {
            let x = coset_gset(&d8, &h);
            let total: usize = orbits(&x)
                .iter()
                .map(|o| d8.order() / o.stabilizer.order())
                .sum();
            assert_eq!(total, x.len());
        }
    }

    #[test]
    fn fixed_points_commute_with_products() {
        let v = g("klein4");
        let classes = p_subgroups_up_to_conj(&v, 2);
        for h in &classes {
            let wd = weyl_group(&v, h);
            for k1 in &classes {
                for k2 in &classes {
                    let x = coset_gset(&v, k1);
                    let y = coset_gset(&v, k2);
                    let lhs = fixed_points(&product_gset(&x, &y).unwrap(), h, &wd).len();
                    let rhs =
                        fixed_points(&x, h, &wd).len() * fixed_points(&y, h, &wd).len();
                    assert_eq!(lhs, rhs);
                }
            }
        }
    }

    #[test]
    fn invalid_generator_action_is_rejected() {
        let c2 = g("cyclic:2");
        // A 3-cycle cannot be an action of an involution.
        let r = GSet::new(
            Arc::clone(&c2),
            vec!["a".into(), "b".into(), "c".into()],
            vec![vec![1, 2, 0]],
        );
        assert_eq!(r.unwrap_err(), GSetError::NotAHomomorphism);
    }
}
