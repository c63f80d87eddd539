//! Grunwald–Wang obstruction over the rationals.
//!
//! Over `Q` we have `s = 2` (`eta_2 = 0` lies in `Q`, `eta_3 = sqrt 2` does not) and
//! `b_0 = 2 + eta_2 = 2`. The special set is `{2}` exactly when `2^{s+1} = 8` divides the
//! exponent, and the obstruction group is generated by the classes of `2^{n_i/2}` placed in
//! the factors with `8 | n_i`.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::arith::{factorize, pow_mod};
use crate::characters::{local_specs, GlobalCharacter, LocalSpec, LocalSpecJson, Place};
use crate::counting::{conductor_counting, CountingFunction};
use crate::enumerate::{CharView, Engine, EnumerationQuery, PlaceEvaluator, Visitor};
use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement, QmodZ};

pub const S_K: u32 = 2;
pub const B0: u64 = 2;

/// A rational `S`-unit written on the basis `{-1} ∪ primes`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct SUnit {
    pub negative: bool,
    /// `(prime, exponent)` with positive exponents, sorted by prime.
    pub exponents: Vec<(u64, u32)>,
}

impl SUnit {
    pub fn one() -> Self {
        SUnit { negative: false, exponents: Vec::new() }
    }

    pub fn power_of(p: u64, e: u32) -> Self {
        SUnit { negative: false, exponents: if e == 0 { vec![] } else { vec![(p, e)] } }
    }

    pub fn from_integer(x: i64) -> Self {
        let exponents = if x == 0 { vec![] } else { factorize(x.unsigned_abs()) };
        SUnit { negative: x < 0, exponents }
    }

    pub fn is_one(&self) -> bool {
        !self.negative && self.exponents.is_empty()
    }
}

/// One element of `prod_i Q^x / Q^{x n_i}`: an `S`-unit per factor.
pub type AElement = Vec<SUnit>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionData {
    #[serde(rename = "sK")]
    pub s_k: u32,
    #[serde(rename = "S0")]
    pub s0: Vec<u64>,
    pub b0: u64,
    #[serde(rename = "eGenerators")]
    pub e_generators: Vec<AElement>,
    /// Order of the group generated by `e_generators`.
    pub order: u64,
}

/// `{2}` when `8` divides the exponent of `G`, else empty.
pub fn s0(g: &FiniteAbelianGroup) -> Vec<u64> {
    if g.exponent().is_multiple_of(1 << (S_K + 1)) { vec![2] } else { Vec::new() }
}

fn generators(g: &FiniteAbelianGroup) -> Vec<AElement> {
    if s0(g).is_empty() {
        return Vec::new();
    }
    let k = g.rank();
    g.factors()
        .iter()
        .enumerate()
        .filter(|(_, &n)| n % 8 == 0)
        .map(|(i, &n)| {
            let mut v = vec![SUnit::one(); k];
            v[i] = SUnit::power_of(B0, (n / 2) as u32);
            v
        })
        .collect()
}

/// Reduces an element of `A` to a canonical representative: exponents mod `n_i`, sign
/// absorbed when `n_i` is odd.
fn reduce_a(g: &FiniteAbelianGroup, a: &AElement) -> AElement {
    a.iter()
        .zip(g.factors())
        .map(|(u, &n)| SUnit {
            negative: u.negative && n % 2 == 0,
            exponents: u
                .exponents
                .iter()
                .map(|&(p, e)| (p, e % n as u32))
                .filter(|&(_, e)| e != 0)
                .collect(),
        })
        .collect()
}

fn mul_a(a: &AElement, b: &AElement) -> AElement {
    a.iter()
        .zip(b)
        .map(|(x, y)| {
            let mut m: BTreeMap<u64, u32> = x.exponents.iter().copied().collect();
            for &(p, e) in &y.exponents {
                *m.entry(p).or_default() += e;
            }
            SUnit { negative: x.negative ^ y.negative, exponents: m.into_iter().collect() }
        })
        .collect()
}

/// Order of the subgroup of `A` generated by the given elements, by closure.
pub fn generated_order(g: &FiniteAbelianGroup, gens: &[AElement]) -> u64 {
    let one: AElement = vec![SUnit::one(); g.rank()];
    let mut seen: BTreeSet<AElement> = BTreeSet::from([one.clone()]);
    let mut frontier = vec![one];
    while let Some(x) = frontier.pop() {
        for s in gens {
            let y = reduce_a(g, &mul_a(&x, s));
            if seen.insert(y.clone()) {
                frontier.push(y);
            }
        }
    }
    seen.len() as u64
}

/// Obstruction data for a fair counting function. The result does not depend on which fair
/// function is supplied.
pub fn e_group(c: &CountingFunction) -> Result<ObstructionData> {
    c.require_fair()?;
    let g = c.group();
    let gens = generators(g);
    let order = generated_order(g, &gens);
    Ok(ObstructionData { s_k: S_K, s0: s0(g), b0: B0, e_generators: gens, order })
}

/// `Sp(Q, G)`: `2^{#{i : 8 | n_i}}` when `8` divides the exponent, else 1.
pub fn sp(g: &FiniteAbelianGroup) -> u64 {
    if s0(g).is_empty() {
        1
    } else {
        1 << g.factors().iter().filter(|&&n| n % 8 == 0).count()
    }
}

fn mod_pow_big(p: u64, e: u32, m: u64) -> u64 {
    pow_mod(p % m, e as u64, m)
}

/// Value of the local idelic character of a specification on a rational `S`-unit, as an
/// element of `G`. On local units it is the negative of the stored unit component; the
/// uniformizer goes to the stored Frobenius.
pub fn local_value(g: &FiniteAbelianGroup, spec: &LocalSpec, x: &SUnit) -> Result<GroupElement> {
    match spec.place {
        Place::Infinity => Ok(if x.negative { spec.frob.clone() } else { g.zero() }),
        Place::Finite(p) => {
            let unit = spec.unit_part.as_ref().ok_or_else(|| Error::InvalidSpec("missing unit part".into()))?;
            let mut k = 0u32;
            let m = p.checked_pow(unit.level.max(1)).ok_or_else(|| Error::Overflow("local modulus".into()))?;
            let mut u = 1u64;
            for &(q, e) in &x.exponents {
                if q == p {
                    k = e;
                } else {
                    u = crate::arith::mul_mod(u, mod_pow_big(q, e, m), m);
                }
            }
            let ui = if x.negative { (m - u) % m } else { u } as i64;
            let unit_val = unit.eval(g, ui)?;
            Ok(g.add(&g.scale(&spec.frob, k as i64), &g.neg(&unit_val)))
        }
    }
}

/// `phi_v(eps) = sum_i (phi_v)_i(eps_i) / n_i` in `Q/Z`.
pub fn phi_dot(g: &FiniteAbelianGroup, spec: &LocalSpec, eps: &AElement) -> Result<QmodZ> {
    let e = g.exponent();
    let mut acc = 0u64;
    for (i, (u, &n)) in eps.iter().zip(g.factors()).enumerate() {
        if u.is_one() {
            continue;
        }
        let v = local_value(g, spec, u)?;
        acc = (acc + v.0[i] * (e / n)) % e;
    }
    Ok(QmodZ::new(acc, e))
}

fn required_places(g: &FiniteAbelianGroup) -> Vec<Place> {
    let mut out: Vec<Place> = factorize(g.order()).into_iter().map(|(p, _)| Place::Finite(p)).collect();
    if !out.contains(&Place::Finite(2)) {
        out.insert(0, Place::Finite(2));
    }
    out.push(Place::Infinity);
    out
}

/// Exact criterion on a full specification at `{2} ∪ {p : p | |G|} ∪ {inf}`: the product of
/// the local characters is trivial on every generator of the obstruction group.
pub fn viability_exact(c: &CountingFunction, specs: &[LocalSpec]) -> Result<bool> {
    let gens = e_group(c)?.e_generators;
    let g = c.group();
    for place in required_places(g) {
        if !specs.iter().any(|s| s.place == place) {
            return Err(Error::InvalidSpec(format!("missing specification at required place {place}")));
        }
    }
    for s in specs {
        s.validate(g)?;
    }
    for eps in &gens {
        let e = g.exponent();
        let mut total = 0u64;
        for s in specs {
            let v = phi_dot(g, s, eps)?;
            total = (total + v.num * (e / v.den)) % e;
        }
        if total != 0 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Exact criterion for a partial specification: viable iff some completion at the missing
/// required places passes. Each place contributes a finite set of values per generator, so
/// this is a sumset search.
pub fn viability_exact_partial(g: &FiniteAbelianGroup, specs: &[LocalSpec]) -> Result<bool> {
    let gens = generators(g);
    if gens.is_empty() || !specs.iter().any(|s| s.place == Place::Finite(2)) {
        return Ok(true);
    }
    let e = g.exponent();
    let contrib = |s: &LocalSpec| -> Result<Vec<u64>> {
        gens.iter()
            .map(|eps| phi_dot(g, s, eps).map(|v| v.num * (e / v.den)))
            .collect()
    };
    let mut reachable: BTreeSet<Vec<u64>> = BTreeSet::from([vec![0; gens.len()]]);
    let mut add_options = |opts: BTreeSet<Vec<u64>>| {
        let mut next = BTreeSet::new();
        for a in &reachable {
            for b in &opts {
                next.insert(a.iter().zip(b).map(|(x, y)| (x + y) % e).collect());
            }
        }
        reachable = next;
    };
    for s in specs {
        s.validate(g)?;
        add_options(BTreeSet::from([contrib(s)?]));
    }
    for place in required_places(g) {
        if specs.iter().any(|s| s.place == place) {
            continue;
        }
        let opts = local_specs(g, place).iter().map(contrib).collect::<Result<BTreeSet<_>>>()?;
        add_options(opts);
    }
    Ok(reachable.iter().any(|v| v.iter().all(|&x| x == 0)))
}

/// Whether a single local specification is viable over `Q` (all other places free).
pub fn spec_viable_over_q(g: &FiniteAbelianGroup, spec: &LocalSpec) -> bool {
    viability_exact_partial(g, std::slice::from_ref(spec)).unwrap_or(false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViabilityStatus {
    Viable,
    Inviable,
    ViableWithWitness,
    NoWitnessBelowBound,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ViabilityVerdict {
    pub status: ViabilityStatus,
    pub witness: Option<GlobalCharacter>,
}

/// Searches for a surjective character of conductor `< bound` with the given local data.
/// When the obstruction cannot apply (no spec at 2, or `8` does not divide the exponent) the
/// answer is `Viable` even if the search finds nothing; a witness is attached when found.
pub fn viability_search(g: &FiniteAbelianGroup, specs: &[LocalSpec], bound: u128) -> Result<ViabilityVerdict> {
    let mut places: Vec<Place> = specs.iter().map(|s| s.place).collect();
    places.sort();
    places.dedup();
    if places.len() != specs.len() {
        return Err(Error::InvalidSpec("duplicate place".into()));
    }
    let unobstructed = s0(g).is_empty() || !places.contains(&Place::Finite(2));
    let c = conductor_counting(g);
    let mut q = EnumerationQuery::new(&c, bound);
    q.pins = specs.to_vec();
    let engine = Engine::new(&q)?;
    let found = engine.run(FirstWitness::default())?;
    Ok(match found.best {
        Some((_, w)) => ViabilityVerdict { status: ViabilityStatus::ViableWithWitness, witness: Some(w) },
        None if unobstructed => ViabilityVerdict { status: ViabilityStatus::Viable, witness: None },
        None => ViabilityVerdict { status: ViabilityStatus::NoWitnessBelowBound, witness: None },
    })
}

/// Keeps the witness of smallest (conductor, serialization).
#[derive(Default)]
struct FirstWitness {
    best: Option<((u128, String), GlobalCharacter)>,
}

impl FirstWitness {
    fn offer(&mut self, key: (u128, String), ch: GlobalCharacter) {
        if self.best.as_ref().is_none_or(|(k, _)| key < *k) {
            self.best = Some((key, ch));
        }
    }
}

impl Visitor for FirstWitness {
    fn visit(&mut self, v: &CharView<'_>) {
        let ch = v.to_global();
        self.offer((v.value, ch.serialize()), ch);
    }
    fn fork(&self) -> Self {
        FirstWitness::default()
    }
    fn merge(&mut self, other: Self) {
        if let Some((k, w)) = other.best {
            self.offer(k, w);
        }
    }
}

/// Smallest witness per local specification at 2, in one enumeration pass.
struct WitnessesAt2<'a> {
    specs: &'a BTreeMap<LocalSpecKey, usize>,
    eval2: &'a PlaceEvaluator,
    best: Vec<Option<((u128, String), GlobalCharacter)>>,
}

type LocalSpecKey = (u32, Vec<u64>, u64);

impl Visitor for WitnessesAt2<'_> {
    fn visit(&mut self, v: &CharView<'_>) {
        let eng = v.engine;
        let unit = v.component_at(2).map(|e| eng.local_character(&e));
        let (level, images) = match &unit {
            None => (0, vec![]),
            Some(u) => (u.level, u.images.iter().map(|x| eng.group.index_of(x) as u64).collect()),
        };
        let frob = v.frob_index(self.eval2) as u64;
        let Some(&i) = self.specs.get(&(level, images, frob)) else { return };
        let ch = v.to_global();
        let key = (v.value, ch.serialize());
        if self.best[i].as_ref().is_none_or(|(k, _)| key < *k) {
            self.best[i] = Some((key, ch));
        }
    }
    fn fork(&self) -> Self {
        WitnessesAt2 { specs: self.specs, eval2: self.eval2, best: vec![None; self.best.len()] }
    }
    fn merge(&mut self, other: Self) {
        for (a, b) in self.best.iter_mut().zip(other.best) {
            if let Some((k, w)) = b {
                if a.as_ref().is_none_or(|(ka, _)| k < *ka) {
                    *a = Some((k, w));
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpecVerdict {
    pub spec: LocalSpecJson,
    pub exact: bool,
    pub status: ViabilityStatus,
    pub witness: Option<String>,
}

/// Every local specification at 2 with its exact verdict and search verdict at conductor
/// bound `bound`. A search witness for an exactly inviable specification is a hard error.
pub fn viable_specs_at_2(g: &FiniteAbelianGroup, bound: u128) -> Result<Vec<SpecVerdict>> {
    let all = local_specs(g, Place::Finite(2));
    let keys: BTreeMap<LocalSpecKey, usize> = all
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let u = s.unit_part.as_ref().expect("finite place");
            let images = if u.is_trivial() { vec![] } else { u.images.iter().map(|x| g.index_of(x) as u64).collect() };
            ((if u.is_trivial() { 0 } else { u.level }, images, g.index_of(&s.frob) as u64), i)
        })
        .collect();
    let c = conductor_counting(g);
    let q = EnumerationQuery::new(&c, bound);
    let engine = Engine::new(&q)?;
    let eval2 = engine.place_evaluator(Place::Finite(2))?;
    let found = engine.run(WitnessesAt2 { specs: &keys, eval2: &eval2, best: vec![None; all.len()] })?;
    let mut out = Vec::with_capacity(all.len());
    for (s, w) in all.iter().zip(found.best) {
        let exact = viability_exact_partial(g, std::slice::from_ref(s))?;
        let status = match (&w, s0(g).is_empty()) {
            (Some(_), _) => ViabilityStatus::ViableWithWitness,
            (None, true) => ViabilityStatus::Viable,
            (None, false) if !exact => ViabilityStatus::Inviable,
            (None, false) => ViabilityStatus::NoWitnessBelowBound,
        };
        if let Some((_, ch)) = &w {
            if !exact {
                return Err(Error::Consistency(format!(
                    "witness {} found for a specification failing the exact criterion",
                    ch.serialize()
                )));
            }
            if &ch.localize(Place::Finite(2))? != s {
                return Err(Error::Consistency("witness does not localize to its specification".into()));
            }
        }
        out.push(SpecVerdict { spec: s.to_json(), exact, status, witness: w.map(|(_, ch)| ch.serialize()) });
    }
    Ok(out)
}
