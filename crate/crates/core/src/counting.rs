//! Counting functions `C(chi) = prod p^{c(chi_p)}` and the fairness test.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::arith::divisors;
use crate::characters::{conductor_exponent_from_orders, GlobalCharacter, LocalCharacter, LocalSpec};
use crate::error::{Error, Result};
use crate::group::{Division, DualCharacter, FiniteAbelianGroup, GroupElement};

pub type WildFn = Arc<dyn Fn(&FiniteAbelianGroup, &LocalCharacter) -> u32 + Send + Sync>;

/// Weight rule at primes dividing `|G|`. It sees only the restriction to local units.
#[derive(Clone)]
pub enum WildRule {
    Conductor,
    Radical,
    Discriminant,
    Artin(Vec<DualCharacter>),
    Custom(WildFn),
}

impl fmt::Debug for WildRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WildRule::Conductor => write!(f, "Conductor"),
            WildRule::Radical => write!(f, "Radical"),
            WildRule::Discriminant => write!(f, "Discriminant"),
            WildRule::Artin(r) => write!(f, "Artin({r:?})"),
            WildRule::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CountingFunction {
    pub name: String,
    group: FiniteAbelianGroup,
    divisions: Vec<Division>,
    division_of: Vec<Option<usize>>,
    tame: Vec<u32>,
    wild: WildRule,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FairnessReport {
    pub m: u32,
    #[serde(rename = "minimalSet")]
    pub minimal_set: Vec<GroupElement>,
    pub fair: bool,
    /// Smallest `r` with `<M cap G[r]> != G[r]`.
    pub witness: Option<u64>,
}

fn composite_orders(g: &FiniteAbelianGroup, psi: &DualCharacter, chi: &LocalCharacter) -> Vec<u64> {
    chi.images.iter().map(|x| g.eval_dual(psi, x).order()).collect()
}

impl CountingFunction {
    /// General constructor; `tame` gives one weight per entry of `group.divisions()`.
    pub fn new(group: FiniteAbelianGroup, name: &str, tame: Vec<u32>, wild: WildRule) -> Result<Self> {
        let (divisions, division_of) = group.division_ids();
        if tame.len() != divisions.len() {
            return Err(Error::InvalidCounting(format!(
                "expected {} tame weights, got {}",
                divisions.len(),
                tame.len()
            )));
        }
        if tame.contains(&0) {
            return Err(Error::InvalidCounting("tame weights must be at least 1".into()));
        }
        Ok(CountingFunction { name: name.to_string(), group, divisions, division_of, tame, wild })
    }

    fn from_element_weight(
        group: &FiniteAbelianGroup,
        name: &str,
        w: impl Fn(&GroupElement) -> u32,
        wild: WildRule,
    ) -> Result<Self> {
        let tame = group.divisions().iter().map(|d| w(d.representative())).collect();
        Self::new(group.clone(), name, tame, wild)
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn divisions(&self) -> &[Division] {
        &self.divisions
    }

    pub fn wild_rule(&self) -> &WildRule {
        &self.wild
    }

    /// Tame weight per division, aligned with [`Self::divisions`].
    pub fn tame_weights(&self) -> &[u32] {
        &self.tame
    }

    /// `c_G(g)` for nonzero `g`; 0 for the identity.
    pub fn element_weight(&self, g: &GroupElement) -> u32 {
        match self.division_of[self.group.index_of(g)] {
            Some(d) => self.tame[d],
            None => 0,
        }
    }

    pub fn element_weight_by_index(&self, i: usize) -> u32 {
        self.division_of[i].map_or(0, |d| self.tame[d])
    }

    fn wild_weight(&self, chi: &LocalCharacter) -> u32 {
        let g = &self.group;
        match &self.wild {
            WildRule::Conductor => chi.conductor_exponent(g),
            WildRule::Radical => u32::from(!chi.is_trivial()),
            WildRule::Discriminant => chi.discriminant_exponent(g),
            WildRule::Artin(reps) => reps
                .iter()
                .map(|psi| conductor_exponent_from_orders(chi.prime, &composite_orders(g, psi, chi)))
                .sum(),
            WildRule::Custom(f) => f(g, chi),
        }
    }

    /// Exponent `c(chi_p)` of `p` in `C`.
    pub fn local_weight(&self, chi: &LocalCharacter) -> u32 {
        if chi.is_trivial() {
            return 0;
        }
        if !self.group.order().is_multiple_of(chi.prime) {
            self.element_weight(&chi.images[0])
        } else {
            self.wild_weight(chi)
        }
    }

    pub fn spec_weight(&self, spec: &LocalSpec) -> u32 {
        spec.unit_part.as_ref().map_or(0, |u| self.local_weight(u))
    }

    pub fn evaluate(&self, chi: &GlobalCharacter) -> Result<u128> {
        chi.places().iter().try_fold(1u128, |acc, c| {
            (c.prime as u128)
                .checked_pow(self.local_weight(c))
                .and_then(|v| acc.checked_mul(v))
                .ok_or_else(|| Error::Overflow("counting function value".into()))
        })
    }

    pub fn min_weight(&self) -> u32 {
        self.tame.iter().copied().min().unwrap_or(1)
    }

    /// Elements of minimal weight.
    pub fn minimal_set(&self) -> Vec<GroupElement> {
        let m = self.min_weight();
        self.group.elements().filter(|g| !g.is_zero() && self.element_weight(g) == m).collect()
    }

    /// Divisions of minimal weight.
    pub fn minimal_divisions(&self) -> Vec<&Division> {
        let m = self.min_weight();
        self.divisions.iter().zip(&self.tame).filter(|(_, &w)| w == m).map(|(d, _)| d).collect()
    }

    pub fn fairness(&self) -> FairnessReport {
        let g = &self.group;
        let m = self.min_weight();
        let minimal = self.minimal_set();
        let mut witness = None;
        for r in divisors(g.exponent()) {
            let torsion = g.torsion_subgroup(r);
            let gens: Vec<GroupElement> = minimal
                .iter()
                .filter(|x| r % g.element_order(x) == 0)
                .cloned()
                .collect();
            if g.generated_subgroup(&gens).order() != torsion.order() {
                witness = Some(r);
                break;
            }
        }
        FairnessReport { m, minimal_set: minimal, fair: witness.is_none(), witness }
    }

    pub fn is_fair(&self) -> bool {
        self.fairness().fair
    }

    pub fn require_fair(&self) -> Result<()> {
        match self.fairness().witness {
            Some(w) => Err(Error::Unfair { witness: w }),
            None => Ok(()),
        }
    }
}

pub fn conductor_counting(g: &FiniteAbelianGroup) -> CountingFunction {
    CountingFunction::from_element_weight(g, "conductor", |_| 1, WildRule::Conductor)
        .expect("valid weights")
}

pub fn radical_counting(g: &FiniteAbelianGroup) -> CountingFunction {
    CountingFunction::from_element_weight(g, "radical", |_| 1, WildRule::Radical).expect("valid weights")
}

pub fn discriminant_counting(g: &FiniteAbelianGroup) -> CountingFunction {
    let n = g.order();
    CountingFunction::from_element_weight(
        g,
        "discriminant",
        |x| (n - n / g.element_order(x)) as u32,
        WildRule::Discriminant,
    )
    .expect("valid weights")
}

/// Artin conductor of the representation `sum psi_i`; the representation must be faithful.
pub fn artin_counting(g: &FiniteAbelianGroup, reps: &[DualCharacter]) -> Result<CountingFunction> {
    for psi in reps {
        g.element(psi.0.clone())?;
    }
    let weight = |x: &GroupElement| reps.iter().filter(|psi| !g.eval_dual(psi, x).is_zero()).count() as u32;
    if let Some(bad) = g.elements().find(|x| !x.is_zero() && weight(x) == 0) {
        return Err(Error::InvalidCounting(format!("representation is not faithful: {bad} acts trivially")));
    }
    CountingFunction::from_element_weight(g, "artin", weight, WildRule::Artin(reps.to_vec()))
}

/// Projections onto each cyclic factor, each composed with a faithful character.
pub fn sum_of_projections(g: &FiniteAbelianGroup) -> Vec<DualCharacter> {
    (0..g.rank())
        .map(|i| DualCharacter((0..g.rank()).map(|j| u64::from(i == j)).collect()))
        .collect()
}

/// The product character `g -> sum g_i / n_i` together with all projections.
pub fn product_plus_projections(g: &FiniteAbelianGroup) -> Vec<DualCharacter> {
    let mut reps = vec![DualCharacter(vec![1; g.rank()])];
    reps.extend(sum_of_projections(g));
    reps
}

/// Parses `conductor`, `radical`, `discriminant`, or `artin:<json list of dual characters>`.
pub fn counting_by_name(g: &FiniteAbelianGroup, name: &str) -> Result<CountingFunction> {
    match name {
        "conductor" => Ok(conductor_counting(g)),
        "radical" => Ok(radical_counting(g)),
        "discriminant" => Ok(discriminant_counting(g)),
        other => match other.strip_prefix("artin:") {
            Some(json) => {
                let reps: Vec<Vec<u64>> =
                    serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))?;
                artin_counting(g, &reps.into_iter().map(DualCharacter).collect::<Vec<_>>())
            }
            None => Err(Error::InvalidCounting(format!("unknown counting function {other:?}"))),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::GlobalCharacter;

    fn grp(f: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(f.to_vec()).unwrap()
    }

    fn lc(p: u64, level: u32, imgs: &[&[u64]]) -> LocalCharacter {
        LocalCharacter { prime: p, level, images: imgs.iter().map(|v| GroupElement(v.to_vec())).collect() }
    }

    #[test]
    fn conductor_minimal_set() {
        let g = grp(&[2, 4]);
        let c = conductor_counting(&g);
        assert_eq!(c.min_weight(), 1);
        assert_eq!(c.minimal_set().len(), 7);
    }

    #[test]
    fn discriminant_weights() {
        let g = grp(&[9]);
        let c = discriminant_counting(&g);
        assert_eq!(c.element_weight(&GroupElement(vec![3])), 6);
        assert_eq!(c.element_weight(&GroupElement(vec![1])), 8);
        let g = grp(&[25]);
        let c = discriminant_counting(&g);
        assert_eq!(c.min_weight(), 20);
        assert!(c.minimal_set().iter().all(|x| x.0[0] % 5 == 0));
    }

    #[test]
    fn fairness_examples() {
        let r = discriminant_counting(&grp(&[9])).fairness();
        assert!(!r.fair);
        assert_eq!(r.witness, Some(9));
        assert!(discriminant_counting(&grp(&[3, 3])).fairness().fair);
        assert!(conductor_counting(&grp(&[8])).fairness().fair);
    }

    #[test]
    fn artin_rejects_non_faithful() {
        let g = grp(&[2, 2]);
        assert!(artin_counting(&g, &[DualCharacter(vec![1, 0])]).is_err());
        assert!(artin_counting(&g, &sum_of_projections(&g)).is_ok());
    }

    #[test]
    fn evaluate_examples() {
        let z2 = grp(&[2]);
        let chi = GlobalCharacter::new(z2.clone(), vec![lc(3, 1, &[&[1]]), lc(7, 1, &[&[1]])]).unwrap();
        assert_eq!(radical_counting(&z2).evaluate(&chi).unwrap(), 21);
        let z3 = grp(&[3]);
        let chi = GlobalCharacter::new(z3.clone(), vec![lc(7, 1, &[&[1]])]).unwrap();
        assert_eq!(discriminant_counting(&z3).evaluate(&chi).unwrap(), 49);
    }

    #[test]
    fn regular_representation_is_discriminant() {
        let g = grp(&[2, 4]);
        let all = g.dual_characters();
        let a = artin_counting(&g, &all).unwrap();
        let d = discriminant_counting(&g);
        for chi in crate::characters::local_characters(&g, 2) {
            assert_eq!(a.local_weight(&chi), d.local_weight(&chi));
        }
        for x in g.elements() {
            assert_eq!(a.element_weight(&x), d.element_weight(&x));
        }
    }
}
