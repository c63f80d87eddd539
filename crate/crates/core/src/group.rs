//! Finite abelian groups written as products of cyclic factors.

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, lcm, totient};
use crate::error::{Error, Result};

/// Largest group order accepted by the subgroup lattice routines.
pub const SUBGROUP_ORDER_LIMIT: u64 = 1 << 12;
const SUBGROUP_COUNT_LIMIT: usize = 200_000;

/// `Z/n_1 x ... x Z/n_k`. Two groups are equal when their factor lists are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GroupElement(pub Vec<u64>);

impl GroupElement {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&c| c == 0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Element set stored as a bitset over element indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subgroup {
    bits: Vec<u64>,
    order: u64,
}

impl Subgroup {
    fn from_bits(bits: Vec<u64>) -> Self {
        let order = bits.iter().map(|w| w.count_ones() as u64).sum();
        Subgroup { bits, order }
    }

    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn contains_index(&self, i: usize) -> bool {
        self.bits[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn is_subset_of(&self, other: &Subgroup) -> bool {
        self.bits.iter().zip(&other.bits).all(|(a, b)| a & !b == 0)
    }

    pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

/// An orbit `{e*x : gcd(e, r) = 1}` of an element of order `r`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Division {
    pub order: u64,
    /// Sorted by element index; the first entry is the canonical representative.
    pub elements: Vec<GroupElement>,
}

impl Division {
    pub fn representative(&self) -> &GroupElement {
        &self.elements[0]
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }
}

/// A value of `Q/Z`, kept as a reduced fraction `num/den` with `0 <= num < den`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct QmodZ {
    pub num: u64,
    pub den: u64,
}

impl QmodZ {
    pub fn new(num: u64, den: u64) -> Self {
        let num = num % den;
        let g = gcd(num, den);
        QmodZ { num: num / g, den: den / g }
    }

    pub fn is_zero(&self) -> bool {
        self.num == 0
    }

    /// Additive order in `Q/Z`.
    pub fn order(&self) -> u64 {
        self.den
    }
}

/// `psi_a(g) = sum a_i g_i / n_i` in `Q/Z`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DualCharacter(pub Vec<u64>);

impl FiniteAbelianGroup {
    pub fn new(factors: Vec<u64>) -> Result<Self> {
        if let Some(&bad) = factors.iter().find(|&&n| n < 2) {
            return Err(Error::InvalidGroup(format!("cyclic factor {bad} is smaller than 2")));
        }
        let mut order: u64 = 1;
        for &n in &factors {
            order = order
                .checked_mul(n)
                .ok_or_else(|| Error::InvalidGroup("group order overflows".into()))?;
        }
        Ok(FiniteAbelianGroup { factors })
    }

    pub fn cyclic(n: u64) -> Result<Self> {
        Self::new(vec![n])
    }

    pub fn trivial() -> Self {
        FiniteAbelianGroup { factors: Vec::new() }
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    pub fn rank(&self) -> usize {
        self.factors.len()
    }

    pub fn order(&self) -> u64 {
        self.factors.iter().product()
    }

    pub fn exponent(&self) -> u64 {
        self.factors.iter().fold(1, |a, &n| lcm(a, n))
    }

    pub fn zero(&self) -> GroupElement {
        GroupElement(vec![0; self.rank()])
    }

    /// Validates coordinates; each must lie in `[0, n_i)`.
    pub fn element(&self, coords: Vec<u64>) -> Result<GroupElement> {
        if coords.len() != self.rank() {
            return Err(Error::InvalidElement(format!(
                "expected {} coordinates, got {}",
                self.rank(),
                coords.len()
            )));
        }
        for (c, n) in coords.iter().zip(&self.factors) {
            if c >= n {
                return Err(Error::InvalidElement(format!("coordinate {c} out of range for Z/{n}")));
            }
        }
        Ok(GroupElement(coords))
    }

    /// Reduces signed coordinates into canonical range.
    pub fn reduce(&self, coords: &[i64]) -> GroupElement {
        GroupElement(
            coords
                .iter()
                .zip(&self.factors)
                .map(|(&c, &n)| c.rem_euclid(n as i64) as u64)
                .collect(),
        )
    }

    pub fn add(&self, a: &GroupElement, b: &GroupElement) -> GroupElement {
        GroupElement(
            a.0.iter()
                .zip(&b.0)
                .zip(&self.factors)
                .map(|((x, y), n)| (x + y) % n)
                .collect(),
        )
    }

    pub fn neg(&self, a: &GroupElement) -> GroupElement {
        GroupElement(a.0.iter().zip(&self.factors).map(|(x, n)| (n - x) % n).collect())
    }

    pub fn scale(&self, a: &GroupElement, k: i64) -> GroupElement {
        GroupElement(
            a.0.iter()
                .zip(&self.factors)
                .map(|(&x, &n)| ((x as i128 * k as i128).rem_euclid(n as i128)) as u64)
                .collect(),
        )
    }

    pub fn index_of(&self, g: &GroupElement) -> usize {
        let mut idx = 0usize;
        let mut stride = 1usize;
        for (c, n) in g.0.iter().zip(&self.factors) {
            idx += *c as usize * stride;
            stride *= *n as usize;
        }
        idx
    }

    pub fn element_at(&self, mut idx: usize) -> GroupElement {
        GroupElement(
            self.factors
                .iter()
                .map(|&n| {
                    let c = idx % n as usize;
                    idx /= n as usize;
                    c as u64
                })
                .collect(),
        )
    }

    pub fn elements(&self) -> impl Iterator<Item = GroupElement> + '_ {
        (0..self.order() as usize).map(|i| self.element_at(i))
    }

    pub fn element_order(&self, g: &GroupElement) -> u64 {
        g.0.iter()
            .zip(&self.factors)
            .fold(1, |acc, (&c, &n)| lcm(acc, n / gcd(c, n)))
    }

    /// The division containing `g`.
    pub fn division_of(&self, g: &GroupElement) -> Division {
        let r = self.element_order(g);
        let mut elements: Vec<GroupElement> = (1..=r.max(1))
            .filter(|&e| gcd(e, r) == 1)
            .map(|e| self.scale(g, e as i64))
            .collect();
        elements.sort_by_key(|x| self.index_of(x));
        elements.dedup();
        Division { order: r, elements }
    }

    /// All divisions of nonzero elements, ordered by representative index.
    pub fn divisions(&self) -> Vec<Division> {
        let n = self.order() as usize;
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for i in 1..n {
            if seen[i] {
                continue;
            }
            let d = self.division_of(&self.element_at(i));
            for x in &d.elements {
                seen[self.index_of(x)] = true;
            }
            out.push(d);
        }
        out
    }

    /// Index of the division of every element (`None` for zero), aligned with [`Self::divisions`].
    pub fn division_ids(&self) -> (Vec<Division>, Vec<Option<usize>>) {
        let divs = self.divisions();
        let mut ids = vec![None; self.order() as usize];
        for (k, d) in divs.iter().enumerate() {
            for x in &d.elements {
                ids[self.index_of(x)] = Some(k);
            }
        }
        (divs, ids)
    }

    fn empty_bits(&self) -> Vec<u64> {
        vec![0u64; (self.order() as usize).div_ceil(64)]
    }

    /// `{g : r g = 0}`.
    pub fn torsion_subgroup(&self, r: u64) -> Subgroup {
        let mut bits = self.empty_bits();
        for (i, g) in self.elements().enumerate() {
            if r.is_multiple_of(self.element_order(&g)) {
                bits[i / 64] |= 1 << (i % 64);
            }
        }
        Subgroup::from_bits(bits)
    }

    /// Subgroup generated by the given elements.
    pub fn generated_subgroup(&self, gens: &[GroupElement]) -> Subgroup {
        let mut members = vec![self.zero()];
        let mut bits = self.empty_bits();
        bits[0] |= 1;
        for g in gens {
            if bits[self.index_of(g) / 64] >> (self.index_of(g) % 64) & 1 == 1 {
                continue;
            }
            let base = members.clone();
            let mut step = g.clone();
            while !step.is_zero() {
                for m in &base {
                    let x = self.add(m, &step);
                    let i = self.index_of(&x);
                    if bits[i / 64] >> (i % 64) & 1 == 0 {
                        bits[i / 64] |= 1 << (i % 64);
                        members.push(x);
                    }
                }
                step = self.add(&step, g);
            }
        }
        Subgroup::from_bits(bits)
    }

    pub fn subgroup_elements(&self, h: &Subgroup) -> Vec<GroupElement> {
        h.indices().map(|i| self.element_at(i)).collect()
    }

    /// Is the given set of elements closed under addition and containing zero.
    pub fn is_subgroup(&self, elems: &[GroupElement]) -> bool {
        let set: HashSet<&GroupElement> = elems.iter().collect();
        if !set.contains(&self.zero()) {
            return false;
        }
        elems.iter().all(|a| elems.iter().all(|b| set.contains(&self.add(a, b))))
    }

    /// Builds a [`Subgroup`] from an explicit element list, checking closure.
    pub fn subgroup_from_elements(&self, elems: &[GroupElement]) -> Result<Subgroup> {
        if !self.is_subgroup(elems) {
            return Err(Error::NotASubgroup("element set is not closed under addition".into()));
        }
        let mut bits = self.empty_bits();
        for g in elems {
            let i = self.index_of(g);
            bits[i / 64] |= 1 << (i % 64);
        }
        Ok(Subgroup::from_bits(bits))
    }

    pub fn whole(&self) -> Subgroup {
        let n = self.order() as usize;
        let mut bits = self.empty_bits();
        for i in 0..n {
            bits[i / 64] |= 1 << (i % 64);
        }
        Subgroup::from_bits(bits)
    }

    fn check_lattice_size(&self) -> Result<()> {
        if self.order() > SUBGROUP_ORDER_LIMIT {
            return Err(Error::SizeLimit(format!(
                "|G| = {} exceeds the subgroup lattice limit {}",
                self.order(),
                SUBGROUP_ORDER_LIMIT
            )));
        }
        Ok(())
    }

    /// Every subgroup, obtained by closing generator sets under joins with cyclic subgroups.
    /// Sorted by order, then by bitset.
    pub fn all_subgroups(&self) -> Result<Vec<Subgroup>> {
        self.check_lattice_size()?;
        let cyclic: Vec<Subgroup> = {
            let mut seen = HashSet::new();
            self.elements()
                .map(|g| self.generated_subgroup(&[g]))
                .filter(|h| seen.insert(h.bits.clone()))
                .collect()
        };
        let cyclic_elems: Vec<Vec<GroupElement>> =
            cyclic.iter().map(|h| self.subgroup_elements(h)).collect();
        let trivial = self.generated_subgroup(&[]);
        let mut seen: HashSet<Vec<u64>> = HashSet::new();
        seen.insert(trivial.bits.clone());
        let mut all = vec![trivial];
        let mut frontier = 0;
        while frontier < all.len() {
            let h = all[frontier].clone();
            frontier += 1;
            let h_elems = self.subgroup_elements(&h);
            for (c, c_elems) in cyclic.iter().zip(&cyclic_elems) {
                if c.is_subset_of(&h) {
                    continue;
                }
                let mut bits = self.empty_bits();
                for a in &h_elems {
                    for b in c_elems {
                        let i = self.index_of(&self.add(a, b));
                        bits[i / 64] |= 1 << (i % 64);
                    }
                }
                if seen.insert(bits.clone()) {
                    all.push(Subgroup::from_bits(bits));
                    if all.len() > SUBGROUP_COUNT_LIMIT {
                        return Err(Error::SizeLimit("too many subgroups".into()));
                    }
                }
            }
        }
        all.sort_by(|a, b| a.order.cmp(&b.order).then_with(|| a.bits.cmp(&b.bits)));
        Ok(all)
    }

    /// Subgroup lattice with `mu(H, G)` for every subgroup `H`.
    pub fn lattice(&self) -> Result<SubgroupLattice> {
        SubgroupLattice::new(self)
    }

    /// `mu(H, G)` in the subgroup lattice.
    pub fn moebius(&self, h: &Subgroup) -> Result<i64> {
        let lat = self.lattice()?;
        lat.position(h)
            .map(|i| lat.mu[i])
            .ok_or_else(|| Error::NotASubgroup("argument is not a subgroup of G".into()))
    }

    pub fn dual_characters(&self) -> Vec<DualCharacter> {
        self.elements().map(|a| DualCharacter(a.0)).collect()
    }

    pub fn eval_dual(&self, psi: &DualCharacter, g: &GroupElement) -> QmodZ {
        let e = self.exponent();
        let mut acc: u128 = 0;
        for ((a, x), n) in psi.0.iter().zip(&g.0).zip(&self.factors) {
            acc += *a as u128 * *x as u128 * (e / n) as u128;
        }
        QmodZ::new((acc % e as u128) as u64, e)
    }

    pub fn is_cyclic(&self) -> bool {
        self.exponent() == self.order()
    }
}

fn partitions(k: u32, max: u32) -> Vec<Vec<u32>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    (1..=k.min(max))
        .rev()
        .flat_map(|first| {
            partitions(k - first, first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

/// Every abelian group of order `n` up to isomorphism, by invariant factors `n_1 | n_2 | ...`.
pub fn abelian_groups_of_order(n: u64) -> Vec<FiniteAbelianGroup> {
    if n == 1 {
        return vec![FiniteAbelianGroup::trivial()];
    }
    let mut types: Vec<Vec<u64>> = vec![Vec::new()];
    for (p, k) in crate::arith::factorize(n) {
        let mut next = Vec::new();
        for t in &types {
            for lam in partitions(k, k) {
                // largest factors first while combining
                let len = t.len().max(lam.len());
                let mut f = vec![1u64; len];
                for (i, x) in t.iter().enumerate() {
                    f[i] *= x;
                }
                for (i, &e) in lam.iter().enumerate() {
                    f[i] *= p.pow(e);
                }
                next.push(f);
            }
        }
        types = next;
    }
    types
        .into_iter()
        .map(|mut f| {
            f.reverse();
            FiniteAbelianGroup::new(f).expect("invariant factors are at least 2")
        })
        .collect()
}

/// Number of injective homomorphisms `H -> G`.
pub fn count_injective_homs(h: &FiniteAbelianGroup, g: &FiniteAbelianGroup) -> u64 {
    let target = h.order();
    if !g.order().is_multiple_of(target) {
        return 0;
    }
    let candidates: Vec<Vec<GroupElement>> = h
        .factors()
        .iter()
        .map(|&m| g.elements().filter(|x| m % g.element_order(x) == 0).collect())
        .collect();
    let mut chosen: Vec<GroupElement> = Vec::with_capacity(h.rank());
    let mut count = 0u64;
    fn rec(
        g: &FiniteAbelianGroup,
        cands: &[Vec<GroupElement>],
        chosen: &mut Vec<GroupElement>,
        target: u64,
        count: &mut u64,
    ) {
        if chosen.len() == cands.len() {
            if g.generated_subgroup(chosen).order() == target {
                *count += 1;
            }
            return;
        }
        for x in &cands[chosen.len()] {
            chosen.push(x.clone());
            rec(g, cands, chosen, target, count);
            chosen.pop();
        }
    }
    rec(g, &candidates, &mut chosen, target, &mut count);
    count
}

/// The subgroup lattice together with `mu(-, G)`.
#[derive(Clone, Debug)]
pub struct SubgroupLattice {
    pub subgroups: Vec<Subgroup>,
    pub mu: Vec<i64>,
    index: HashMap<Vec<u64>, usize>,
}

impl SubgroupLattice {
    fn new(g: &FiniteAbelianGroup) -> Result<Self> {
        let subgroups = g.all_subgroups()?;
        let n = subgroups.len();
        let mut mu = vec![0i64; n];
        // Top-down: mu(G, G) = 1 and mu(H, G) = -sum over H < K <= G of mu(K, G).
        for i in (0..n).rev() {
            if i == n - 1 {
                mu[i] = 1;
                continue;
            }
            let mut s = 0i64;
            for j in i + 1..n {
                if subgroups[j].order > subgroups[i].order
                    && subgroups[j].order % subgroups[i].order == 0
                    && subgroups[i].is_subset_of(&subgroups[j])
                {
                    s += mu[j];
                }
            }
            mu[i] = -s;
        }
        let index = subgroups.iter().enumerate().map(|(i, h)| (h.bits.clone(), i)).collect();
        Ok(SubgroupLattice { subgroups, mu, index })
    }

    pub fn position(&self, h: &Subgroup) -> Option<usize> {
        self.index.get(&h.bits).copied()
    }

    /// `sum over H <= K <= G of mu(K, G)`; zero whenever `H < G`.
    pub fn interval_sum(&self, i: usize) -> i64 {
        let h = &self.subgroups[i];
        self.subgroups
            .iter()
            .zip(&self.mu)
            .filter(|(k, _)| h.is_subset_of(k))
            .map(|(_, m)| m)
            .sum()
    }
}

/// Euler phi of the order of `g`, the size of its division.
pub fn division_size(g: &FiniteAbelianGroup, x: &GroupElement) -> u64 {
    totient(g.element_order(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abelian_group_counts() {
        let counts: Vec<usize> = (1..=16).map(|n| abelian_groups_of_order(n).len()).collect();
        assert_eq!(counts, vec![1, 1, 1, 2, 1, 1, 1, 3, 2, 1, 1, 2, 1, 1, 1, 5]);
        assert_eq!(abelian_groups_of_order(64).len(), 11);
        for g in abelian_groups_of_order(72) {
            assert_eq!(g.order(), 72);
            assert!(g.factors().windows(2).all(|w| w[1] % w[0] == 0));
        }
    }

    fn grp(f: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(f.to_vec()).unwrap()
    }

    #[test]
    fn orders() {
        let g = grp(&[4, 2]);
        assert_eq!(g.element_order(&GroupElement(vec![2, 1])), 2);
        assert_eq!(grp(&[9]).element_order(&GroupElement(vec![3])), 3);
        assert_eq!(grp(&[8]).element_order(&GroupElement(vec![0])), 1);
    }

    #[test]
    fn rejects_bad_factor() {
        assert!(FiniteAbelianGroup::new(vec![4, 1]).is_err());
        assert!(!(grp(&[2, 4]) == grp(&[4, 2])));
    }

    #[test]
    fn division_examples() {
        let sets = |f: &[u64]| -> Vec<Vec<Vec<u64>>> {
            let g = grp(f);
            let mut v: Vec<Vec<Vec<u64>>> = g
                .divisions()
                .into_iter()
                .map(|d| d.elements.into_iter().map(|e| e.0).collect())
                .collect();
            v.iter_mut().for_each(|d| d.sort());
            v.sort();
            v
        };
        assert_eq!(sets(&[4]), vec![vec![vec![1], vec![3]], vec![vec![2]]]);
        assert_eq!(sets(&[2, 2]).len(), 3);
        assert!(sets(&[2, 2]).iter().all(|d| d.len() == 1));
        assert_eq!(
            sets(&[9]),
            vec![
                vec![vec![1], vec![2], vec![4], vec![5], vec![7], vec![8]],
                vec![vec![3], vec![6]]
            ]
        );
    }

    #[test]
    fn torsion_examples() {
        let t = grp(&[8]).torsion_subgroup(2);
        assert_eq!(grp(&[8]).subgroup_elements(&t), vec![GroupElement(vec![0]), GroupElement(vec![4])]);
        let t = grp(&[6]).torsion_subgroup(3);
        assert_eq!(t.order(), 3);
        assert!(t.contains_index(2) && t.contains_index(4));
        assert_eq!(grp(&[6]).torsion_subgroup(1).order(), 1);
    }

    #[test]
    fn subgroup_counts() {
        assert_eq!(grp(&[7]).all_subgroups().unwrap().len(), 2);
        assert_eq!(grp(&[2, 2]).all_subgroups().unwrap().len(), 5);
        assert_eq!(grp(&[12]).all_subgroups().unwrap().len(), 6);
        assert!(grp(&[64, 128]).all_subgroups().is_err());
    }

    #[test]
    fn moebius_examples() {
        let g = grp(&[5]);
        assert_eq!(g.moebius(&g.whole()).unwrap(), 1);
        assert_eq!(g.moebius(&g.torsion_subgroup(1)).unwrap(), -1);
        let v = grp(&[2, 2]);
        assert_eq!(v.moebius(&v.torsion_subgroup(1)).unwrap(), 2);
    }

    #[test]
    fn injective_hom_examples() {
        assert_eq!(count_injective_homs(&grp(&[3]), &grp(&[9])), 2);
        assert_eq!(count_injective_homs(&FiniteAbelianGroup::trivial(), &grp(&[6])), 1);
        assert_eq!(count_injective_homs(&grp(&[2, 2]), &grp(&[2, 4])), 6);
    }

    #[test]
    fn dual_count() {
        let g = grp(&[2, 6]);
        assert_eq!(g.dual_characters().len(), 12);
        let psi = DualCharacter(vec![1, 1]);
        assert_eq!(g.eval_dual(&psi, &GroupElement(vec![1, 1])), QmodZ::new(2, 3));
    }
}
