//! Local and global characters of the ideles of `Q` with values in a finite abelian group,
//! written as Dirichlet characters `(Z/f)^x -> G`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::arith::{gcd, valuation};
use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement, Subgroup};
use crate::units::unit_group;

/// Orders of the canonical generators of `(Z/p^level)^x`.
pub fn generator_orders(p: u64, level: u32) -> Vec<u64> {
    if level == 0 {
        return Vec::new();
    }
    if p == 2 {
        match level {
            1 => Vec::new(),
            2 => vec![2],
            k => vec![2, 1 << (k - 2)],
        }
    } else {
        vec![p.pow(level - 1) * (p - 1)]
    }
}

/// Largest conductor exponent a character `Z_p^x -> G` can have.
pub fn level_cap(p: u64, g: &FiniteAbelianGroup) -> u32 {
    let exp = g.exponent();
    if !g.order().is_multiple_of(p) {
        return 1;
    }
    let v = valuation(exp, p);
    if p == 2 {
        v + 2
    } else {
        v + 1
    }
}

/// Conductor exponent of a character of `Z_p^x` given the orders of the images of the
/// canonical generators at some level.
pub fn conductor_exponent_from_orders(p: u64, orders: &[u64]) -> u32 {
    if p == 2 {
        let o_minus = orders.first().copied().unwrap_or(1);
        let o_five = orders.get(1).copied().unwrap_or(1);
        if o_five > 1 {
            2 + o_five.trailing_zeros()
        } else if o_minus > 1 {
            2
        } else {
            0
        }
    } else {
        match orders.first() {
            Some(&o) if o > 1 => 1 + valuation(o, p),
            _ => 0,
        }
    }
}

/// A character `(Z/p^level)^x -> G`, one image per canonical generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalCharacter {
    pub prime: u64,
    pub level: u32,
    pub images: Vec<GroupElement>,
}

impl LocalCharacter {
    pub fn trivial(p: u64) -> Self {
        LocalCharacter { prime: p, level: 0, images: Vec::new() }
    }

    pub fn validate(&self, g: &FiniteAbelianGroup) -> Result<()> {
        let orders = generator_orders(self.prime, self.level);
        if orders.len() != self.images.len() {
            return Err(Error::InvalidCharacter(format!(
                "level {} at {} needs {} generator images, got {}",
                self.level,
                self.prime,
                orders.len(),
                self.images.len()
            )));
        }
        for (img, o) in self.images.iter().zip(&orders) {
            g.element(img.0.clone())?;
            if o % g.element_order(img) != 0 {
                return Err(Error::InvalidCharacter(format!(
                    "image {img} has order not dividing the generator order {o}"
                )));
            }
        }
        Ok(())
    }

    pub fn is_trivial(&self) -> bool {
        self.images.iter().all(|x| x.is_zero())
    }

    pub fn conductor_exponent(&self, g: &FiniteAbelianGroup) -> u32 {
        let orders: Vec<u64> = self.images.iter().map(|x| g.element_order(x)).collect();
        conductor_exponent_from_orders(self.prime, &orders)
    }

    /// The same character written at its conductor level.
    pub fn primitive(&self, g: &FiniteAbelianGroup) -> LocalCharacter {
        let k = self.conductor_exponent(g);
        self.at_level(k)
    }

    /// Rewrites the images for another level, assuming the character factors through it.
    pub fn at_level(&self, k: u32) -> LocalCharacter {
        let want = generator_orders(self.prime, k).len();
        let rank = self.images.first().map(|x| x.0.len());
        let mut images: Vec<GroupElement> = self.images.iter().take(want).cloned().collect();
        while images.len() < want {
            let zero = GroupElement(vec![0; rank.unwrap_or(0)]);
            images.push(zero);
        }
        LocalCharacter { prime: self.prime, level: k, images }
    }

    /// Value at an integer prime to `p`.
    pub fn eval(&self, g: &FiniteAbelianGroup, x: i64) -> Result<GroupElement> {
        if self.level == 0 {
            return Ok(g.zero());
        }
        let m = self.prime.pow(self.level);
        let xr = x.rem_euclid(m as i64) as u64;
        let u = unit_group(m)?;
        let logs = u.discrete_log(xr)?;
        let mut acc = g.zero();
        for (img, e) in self.images.iter().zip(logs) {
            acc = g.add(&acc, &g.scale(img, e as i64));
        }
        Ok(acc)
    }

    pub fn image_subgroup(&self, g: &FiniteAbelianGroup) -> Subgroup {
        g.generated_subgroup(&self.images)
    }

    /// Sum of conductor exponents of `psi o chi` over all dual characters `psi`.
    pub fn discriminant_exponent(&self, g: &FiniteAbelianGroup) -> u32 {
        g.dual_characters()
            .iter()
            .map(|psi| {
                let orders: Vec<u64> =
                    self.images.iter().map(|x| g.eval_dual(psi, x).order()).collect();
                conductor_exponent_from_orders(self.prime, &orders)
            })
            .sum()
    }
}

/// Conductor exponent of a local character, 0 iff it is trivial.
pub fn local_conductor_exponent(g: &FiniteAbelianGroup, chi: &LocalCharacter) -> u32 {
    chi.conductor_exponent(g)
}

/// Every character `Z_p^x -> G`, each written at its conductor level, trivial one first.
pub fn local_characters(g: &FiniteAbelianGroup, p: u64) -> Vec<LocalCharacter> {
    let cap = level_cap(p, g);
    let orders = generator_orders(p, cap);
    let choices: Vec<Vec<GroupElement>> = orders
        .iter()
        .map(|&o| g.elements().filter(|x| o % g.element_order(x) == 0).collect())
        .collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; choices.len()];
    loop {
        let images: Vec<GroupElement> =
            idx.iter().zip(&choices).map(|(&i, c)| c[i].clone()).collect();
        let chi = LocalCharacter { prime: p, level: cap, images };
        out.push(chi.primitive(g));
        let mut k = 0;
        loop {
            if k == idx.len() {
                out.sort_by(|a, b| (a.level, a).cmp(&(b.level, b)));
                return out;
            }
            idx[k] += 1;
            if idx[k] < choices[k].len() {
                break;
            }
            idx[k] = 0;
            k += 1;
        }
    }
}

/// A place of `Q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Place {
    Finite(u64),
    Infinity,
}

impl fmt::Display for Place {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Place::Finite(p) => write!(f, "{p}"),
            Place::Infinity => write!(f, "inf"),
        }
    }
}

/// A primitive character `J_Q / Q^x -> G`, stored through its nontrivial local components.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GlobalCharacter {
    group: FiniteAbelianGroup,
    places: Vec<LocalCharacter>,
}

impl GlobalCharacter {
    /// Validates that every component is nontrivial, written at its conductor level, and
    /// within the level cap, and that primes are distinct.
    pub fn new(group: FiniteAbelianGroup, mut places: Vec<LocalCharacter>) -> Result<Self> {
        places.sort_by_key(|c| c.prime);
        for w in places.windows(2) {
            if w[0].prime == w[1].prime {
                return Err(Error::InvalidCharacter(format!("prime {} listed twice", w[0].prime)));
            }
        }
        for c in &places {
            if !crate::arith::is_prime(c.prime) {
                return Err(Error::InvalidCharacter(format!("{} is not prime", c.prime)));
            }
            c.validate(&group)?;
            let k = c.conductor_exponent(&group);
            if k == 0 {
                return Err(Error::NotPrimitive(format!("trivial component at {}", c.prime)));
            }
            if k != c.level {
                return Err(Error::NotPrimitive(format!(
                    "component at {} has level {} but conductor exponent {}",
                    c.prime, c.level, k
                )));
            }
            if k > level_cap(c.prime, &group) {
                return Err(Error::InvalidCharacter(format!("level above cap at {}", c.prime)));
            }
        }
        Ok(GlobalCharacter { group, places })
    }

    pub(crate) fn new_unchecked(group: FiniteAbelianGroup, places: Vec<LocalCharacter>) -> Self {
        GlobalCharacter { group, places }
    }

    pub fn trivial(group: FiniteAbelianGroup) -> Self {
        GlobalCharacter { group, places: Vec::new() }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn places(&self) -> &[LocalCharacter] {
        &self.places
    }

    pub fn support(&self) -> Vec<u64> {
        self.places.iter().map(|c| c.prime).collect()
    }

    pub fn component(&self, p: u64) -> Option<&LocalCharacter> {
        self.places.iter().find(|c| c.prime == p)
    }

    pub fn conductor(&self) -> Result<u128> {
        global_conductor(self)
    }

    /// `chi(x mod f)` for `x` prime to the conductor.
    pub fn eval(&self, x: i64) -> Result<GroupElement> {
        let mut acc = self.group.zero();
        for c in &self.places {
            if x.rem_euclid(c.prime as i64) == 0 {
                return Err(Error::NotAUnit(x.unsigned_abs(), c.prime));
            }
            acc = self.group.add(&acc, &c.eval(&self.group, x)?);
        }
        Ok(acc)
    }

    pub fn is_surjective(&self) -> bool {
        let gens: Vec<GroupElement> =
            self.places.iter().flat_map(|c| c.images.iter().cloned()).collect();
        self.group.generated_subgroup(&gens).order() == self.group.order()
    }

    pub fn to_json(&self) -> CharacterJson {
        CharacterJson {
            group: self.group.factors().to_vec(),
            places: self
                .places
                .iter()
                .map(|c| PlaceJson {
                    p: c.prime,
                    level: c.level,
                    images: c.images.iter().map(|x| x.0.clone()).collect(),
                })
                .collect(),
        }
    }

    pub fn serialize(&self) -> String {
        serde_json::to_string(&self.to_json()).expect("serializable")
    }

    pub fn from_json(j: &CharacterJson) -> Result<Self> {
        let group = FiniteAbelianGroup::new(j.group.clone())?;
        let places = j
            .places
            .iter()
            .map(|pl| LocalCharacter {
                prime: pl.p,
                level: pl.level,
                images: pl.images.iter().map(|v| GroupElement(v.clone())).collect(),
            })
            .collect();
        GlobalCharacter::new(group, places)
    }

    pub fn parse(s: &str) -> Result<Self> {
        let j: CharacterJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_json(&j)
    }

    /// Local specification at a place. The Frobenius filler follows the Dirichlet convention:
    /// at an unramified `p` it is `chi(p mod f)`, and at infinity it is `chi(-1)`.
    pub fn localize(&self, place: Place) -> Result<LocalSpec> {
        let g = &self.group;
        match place {
            Place::Infinity => Ok(LocalSpec { place, unit_part: None, frob: self.eval(-1)? }),
            Place::Finite(p) => {
                let unit = self.component(p).cloned().unwrap_or_else(|| LocalCharacter::trivial(p));
                let mut frob = g.zero();
                for c in self.places.iter().filter(|c| c.prime != p) {
                    frob = g.add(&frob, &c.eval(g, p as i64)?);
                }
                Ok(LocalSpec { place, unit_part: Some(unit), frob })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CharacterJson {
    pub group: Vec<u64>,
    pub places: Vec<PlaceJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaceJson {
    pub p: u64,
    pub level: u32,
    pub images: Vec<Vec<u64>>,
}

/// Product of `p^level` over the support.
pub fn global_conductor(chi: &GlobalCharacter) -> Result<u128> {
    chi.places.iter().try_fold(1u128, |acc, c| {
        (c.prime as u128)
            .checked_pow(c.level)
            .and_then(|pk| acc.checked_mul(pk))
            .ok_or_else(|| Error::Overflow("conductor".into()))
    })
}

/// Discriminant of the associated G-extension, by the conductor-discriminant formula.
pub fn discriminant(chi: &GlobalCharacter) -> Result<u128> {
    chi.places.iter().try_fold(1u128, |acc, c| {
        (c.prime as u128)
            .checked_pow(c.discriminant_exponent(&chi.group))
            .and_then(|pk| acc.checked_mul(pk))
            .ok_or_else(|| Error::Overflow("discriminant".into()))
    })
}

pub fn is_surjective(chi: &GlobalCharacter) -> bool {
    chi.is_surjective()
}

/// A G-structured local algebra: the restriction to local units, plus the image of a
/// uniformizer (or of complex conjugation at infinity).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LocalSpec {
    pub place: Place,
    /// `None` exactly at infinity.
    pub unit_part: Option<LocalCharacter>,
    pub frob: GroupElement,
}

/// Splitting data of a place: ramification index, residue degree, number of primes above.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SplittingType {
    pub e: u64,
    #[serde(rename = "fRes")]
    pub f_res: u64,
    #[serde(rename = "numPrimes")]
    pub num_primes: u64,
}

impl LocalSpec {
    pub fn validate(&self, g: &FiniteAbelianGroup) -> Result<()> {
        g.element(self.frob.0.clone())?;
        match (&self.place, &self.unit_part) {
            (Place::Infinity, None) => {
                if g.element_order(&self.frob) > 2 {
                    return Err(Error::InvalidSpec("image of complex conjugation must have order <= 2".into()));
                }
                Ok(())
            }
            (Place::Finite(p), Some(u)) => {
                if u.prime != *p {
                    return Err(Error::InvalidSpec("unit part prime differs from place".into()));
                }
                u.validate(g)?;
                if u.conductor_exponent(g) != u.level {
                    return Err(Error::InvalidSpec(format!(
                        "unit part at {p} is not written at its conductor level"
                    )));
                }
                if u.level > level_cap(*p, g) {
                    return Err(Error::InvalidSpec(format!("level above cap at {p}")));
                }
                Ok(())
            }
            _ => Err(Error::InvalidSpec("unit part present exactly at finite places".into())),
        }
    }

    pub fn is_ramified(&self) -> bool {
        self.unit_part.as_ref().is_some_and(|u| !u.is_trivial())
    }

    /// Inertia group.
    pub fn inertia(&self, g: &FiniteAbelianGroup) -> Subgroup {
        match &self.unit_part {
            Some(u) => u.image_subgroup(g),
            None => g.generated_subgroup(&[]),
        }
    }

    /// Decomposition group.
    pub fn decomposition(&self, g: &FiniteAbelianGroup) -> Subgroup {
        let mut gens: Vec<GroupElement> =
            self.unit_part.as_ref().map(|u| u.images.clone()).unwrap_or_default();
        gens.push(self.frob.clone());
        g.generated_subgroup(&gens)
    }

    pub fn splitting_type(&self, g: &FiniteAbelianGroup) -> SplittingType {
        let i = self.inertia(g).order();
        let d = self.decomposition(g).order();
        SplittingType { e: i, f_res: d / i, num_primes: g.order() / d }
    }

    pub fn to_json(&self) -> LocalSpecJson {
        match &self.place {
            Place::Infinity => LocalSpecJson::Infinity { infinity: self.frob.0.clone() },
            Place::Finite(p) => {
                let u = self.unit_part.as_ref().expect("finite place has unit part");
                LocalSpecJson::Finite {
                    p: *p,
                    level: u.level,
                    images: u.images.iter().map(|x| x.0.clone()).collect(),
                    frob: self.frob.0.clone(),
                }
            }
        }
    }

    pub fn from_json(g: &FiniteAbelianGroup, j: &LocalSpecJson) -> Result<Self> {
        let spec = match j {
            LocalSpecJson::Infinity { infinity } => LocalSpec {
                place: Place::Infinity,
                unit_part: None,
                frob: GroupElement(infinity.clone()),
            },
            LocalSpecJson::Finite { p, level, images, frob } => {
                if !crate::arith::is_prime(*p) {
                    return Err(Error::InvalidSpec(format!("{p} is not prime")));
                }
                LocalSpec {
                    place: Place::Finite(*p),
                    unit_part: Some(LocalCharacter {
                        prime: *p,
                        level: *level,
                        images: images.iter().map(|v| GroupElement(v.clone())).collect(),
                    }),
                    frob: GroupElement(frob.clone()),
                }
            }
        };
        spec.validate(g)?;
        Ok(spec)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum LocalSpecJson {
    Finite { p: u64, level: u32, images: Vec<Vec<u64>>, frob: Vec<u64> },
    Infinity { infinity: Vec<u64> },
}

/// Every local specification at a place.
pub fn local_specs(g: &FiniteAbelianGroup, place: Place) -> Vec<LocalSpec> {
    match place {
        Place::Infinity => g
            .elements()
            .filter(|x| g.element_order(x) <= 2)
            .map(|frob| LocalSpec { place, unit_part: None, frob })
            .collect(),
        Place::Finite(p) => {
            let mut out = Vec::new();
            for u in local_characters(g, p) {
                for frob in g.elements() {
                    out.push(LocalSpec { place, unit_part: Some(u.clone()), frob });
                }
            }
            out
        }
    }
}

/// Number of tame specifications at `p`: characters of the cyclic group of order `p - 1`
/// times the choices of Frobenius.
pub fn tame_local_spec_count(g: &FiniteAbelianGroup, p: u64) -> u64 {
    let d = gcd(p - 1, g.exponent());
    g.elements().filter(|x| d.is_multiple_of(g.element_order(x))).count() as u64 * g.order()
}
