//! Empirical local statistics of enumerated characters and their predicted limits.

use serde::Serialize;

use crate::characters::{local_specs, LocalCharacter, LocalSpec, Place, SplittingType};
use crate::counting::CountingFunction;
use crate::enumerate::{CharView, Engine, EnumerationQuery, PlaceEvaluator, Visitor};
use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement};

/// Condition on the restriction to local units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UnitCondition {
    Any,
    Unramified,
    Ramified,
    Exactly(LocalCharacter),
}

/// A set of local specifications at one place.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlaceCondition {
    pub place: Place,
    pub unit: UnitCondition,
    pub frob: Option<GroupElement>,
    pub splitting: Option<SplittingType>,
}

impl PlaceCondition {
    pub fn any(place: Place) -> Self {
        PlaceCondition { place, unit: UnitCondition::Any, frob: None, splitting: None }
    }

    pub fn ramified(p: u64) -> Self {
        PlaceCondition { unit: UnitCondition::Ramified, ..Self::any(Place::Finite(p)) }
    }

    pub fn unramified(p: u64) -> Self {
        PlaceCondition { unit: UnitCondition::Unramified, ..Self::any(Place::Finite(p)) }
    }

    pub fn from_spec(s: &LocalSpec) -> Self {
        let unit = match &s.unit_part {
            None => UnitCondition::Any,
            Some(u) if u.is_trivial() => UnitCondition::Unramified,
            Some(u) => UnitCondition::Exactly(u.clone()),
        };
        PlaceCondition { place: s.place, unit, frob: Some(s.frob.clone()), splitting: None }
    }

    pub fn matches(&self, g: &FiniteAbelianGroup, s: &LocalSpec) -> bool {
        if s.place != self.place {
            return false;
        }
        let unit_ok = match (&self.unit, &s.unit_part) {
            (UnitCondition::Any, _) => true,
            (UnitCondition::Unramified, u) => u.as_ref().is_none_or(|u| u.is_trivial()),
            (UnitCondition::Ramified, u) => u.as_ref().is_some_and(|u| !u.is_trivial()),
            (UnitCondition::Exactly(c), Some(u)) => c == u,
            (UnitCondition::Exactly(_), None) => false,
        };
        unit_ok
            && self.frob.as_ref().is_none_or(|f| f == &s.frob)
            && self.splitting.is_none_or(|t| t == s.splitting_type(g))
    }
}

/// Conjunction of place conditions; the empty event holds for every character.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Event {
    pub conditions: Vec<PlaceCondition>,
}

impl Event {
    pub fn new(conditions: Vec<PlaceCondition>) -> Result<Self> {
        let mut places: Vec<Place> = conditions.iter().map(|c| c.place).collect();
        places.sort();
        if places.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidSpec("duplicate place in event".into()));
        }
        Ok(Event { conditions })
    }

    pub fn everything() -> Self {
        Event::default()
    }

    pub fn from_specs(specs: &[LocalSpec]) -> Result<Self> {
        Event::new(specs.iter().map(PlaceCondition::from_spec).collect())
    }

    pub fn and(&self, other: &Event) -> Result<Event> {
        let mut c = self.conditions.clone();
        c.extend(other.conditions.iter().cloned());
        Event::new(c)
    }

    pub fn places(&self) -> Vec<Place> {
        self.conditions.iter().map(|c| c.place).collect()
    }
}

struct CompiledEvent {
    conds: Vec<(usize, PlaceCondition)>,
}

struct Measure<'a> {
    places: &'a [(Place, PlaceEvaluator)],
    events: &'a [CompiledEvent],
    bounds: &'a [u128],
    /// `raw[e][k]`: characters matching event `e` whose value lies in `[X_{k-1}, X_k)`.
    raw: Vec<Vec<u64>>,
}

impl Measure<'_> {
    fn holds(&self, v: &CharView<'_>, ev: &CompiledEvent) -> bool {
        let eng = v.engine;
        ev.conds.iter().all(|(pi, cond)| {
            let (place, evaluator) = &self.places[*pi];
            let entry = match place {
                Place::Finite(p) => v.component_at(*p),
                Place::Infinity => None,
            };
            let unit_ok = match &cond.unit {
                UnitCondition::Any => true,
                UnitCondition::Unramified => entry.is_none(),
                UnitCondition::Ramified => entry.is_some(),
                UnitCondition::Exactly(c) => match entry {
                    None => c.is_trivial(),
                    Some(e) => &eng.local_character(&e) == c,
                },
            };
            if !unit_ok {
                return false;
            }
            if cond.frob.is_none() && cond.splitting.is_none() {
                return true;
            }
            let frob = v.frob_index(evaluator);
            if let Some(f) = &cond.frob {
                if eng.group.index_of(f) != frob as usize {
                    return false;
                }
            }
            if let Some(t) = cond.splitting {
                if eng.splitting_type(entry.as_ref(), frob) != t {
                    return false;
                }
            }
            true
        })
    }
}

impl Visitor for Measure<'_> {
    fn visit(&mut self, v: &CharView<'_>) {
        let k = self.bounds.partition_point(|&x| x <= v.value);
        if k >= self.bounds.len() {
            return;
        }
        for (i, ev) in self.events.iter().enumerate() {
            if self.holds(v, ev) {
                self.raw[i][k] += 1;
            }
        }
    }
    fn fork(&self) -> Self {
        Measure {
            places: self.places,
            events: self.events,
            bounds: self.bounds,
            raw: vec![vec![0; self.bounds.len()]; self.events.len()],
        }
    }
    fn merge(&mut self, other: Self) {
        for (a, b) in self.raw.iter_mut().zip(other.raw) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

/// Counts of surjective characters matching each event, at each bound of a schedule.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Measurement {
    pub bounds: Vec<u128>,
    /// `counts[e][k]` for event `e` and bound `bounds[k]`.
    pub counts: Vec<Vec<u64>>,
}

/// One enumeration pass up to the largest bound, counting every event at every bound.
pub fn measure(c: &CountingFunction, bounds: &[u128], events: &[Event], threads: usize) -> Result<Measurement> {
    let mut bounds_sorted = bounds.to_vec();
    bounds_sorted.sort_unstable();
    bounds_sorted.dedup();
    if bounds_sorted != bounds {
        return Err(Error::InvalidArgument("bounds must be strictly increasing".into()));
    }
    let Some(&xmax) = bounds.last() else {
        return Ok(Measurement { bounds: Vec::new(), counts: vec![Vec::new(); events.len()] });
    };
    let mut q = EnumerationQuery::new(c, xmax);
    q.threads = threads;
    let engine = Engine::new(&q)?;
    let mut places: Vec<Place> = events.iter().flat_map(|e| e.places()).collect();
    places.sort();
    places.dedup();
    let evals: Vec<(Place, PlaceEvaluator)> =
        places.iter().map(|&p| Ok((p, engine.place_evaluator(p)?))).collect::<Result<_>>()?;
    let compiled: Vec<CompiledEvent> = events
        .iter()
        .map(|e| CompiledEvent {
            conds: e
                .conditions
                .iter()
                .map(|cnd| (places.iter().position(|&p| p == cnd.place).unwrap(), cnd.clone()))
                .collect(),
        })
        .collect();
    let m = Measure {
        places: &evals,
        events: &compiled,
        bounds,
        raw: vec![vec![0; bounds.len()]; events.len()],
    };
    let m = engine.run(m)?;
    let counts = m
        .raw
        .into_iter()
        .map(|row| {
            row.iter()
                .scan(0u64, |acc, &x| {
                    *acc += x;
                    Some(*acc)
                })
                .collect()
        })
        .collect();
    Ok(Measurement { bounds: bounds.to_vec(), counts })
}

/// An exact rational `num/den` with its decimal value.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RationalValue {
    pub num: u64,
    pub den: u64,
    pub value: f64,
}

impl RationalValue {
    pub fn new(num: u64, den: u64) -> Result<Self> {
        if den == 0 {
            return Err(Error::ZeroDenominator("no characters satisfy the conditioning event".into()));
        }
        let g = crate::arith::gcd(num, den).max(1);
        Ok(RationalValue { num: num / g, den: den / g, value: num as f64 / den as f64 })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleEntry {
    pub bound: String,
    pub numerator: u64,
    pub denominator: u64,
    pub estimate: RationalValue,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbabilityEstimate {
    pub bound: String,
    pub numerator: u64,
    pub denominator: u64,
    pub estimate: RationalValue,
    /// Estimates at `X`, `2X` and `4X`.
    pub schedule: Vec<ScheduleEntry>,
}

/// `Pr(event | given)` among surjective characters with `C < X`, also at `2X` and `4X`.
pub fn empirical_conditional(
    c: &CountingFunction,
    bound: u128,
    event: &Event,
    given: &Event,
    threads: usize,
) -> Result<ProbabilityEstimate> {
    let both = event.and(given).or_else(|_| merge_same_place(event, given))?;
    let too_big = || Error::Overflow(format!("schedule up to 4 * {bound}"));
    let bounds = [bound, bound.checked_mul(2).ok_or_else(too_big)?, bound.checked_mul(4).ok_or_else(too_big)?];
    let m = measure(c, &bounds, &[both, given.clone()], threads)?;
    let mut schedule = Vec::new();
    for k in 0..3 {
        let (num, den) = (m.counts[0][k], m.counts[1][k]);
        schedule.push(ScheduleEntry {
            bound: bounds[k].to_string(),
            numerator: num,
            denominator: den,
            estimate: RationalValue::new(num, den)?,
        });
    }
    let first = schedule[0].clone();
    Ok(ProbabilityEstimate {
        bound: bound.to_string(),
        numerator: first.numerator,
        denominator: first.denominator,
        estimate: first.estimate,
        schedule,
    })
}

fn merge_same_place(a: &Event, b: &Event) -> Result<Event> {
    let mut conds = a.conditions.clone();
    for cb in &b.conditions {
        match conds.iter_mut().find(|c| c.place == cb.place) {
            None => conds.push(cb.clone()),
            Some(ca) => {
                if ca.unit == UnitCondition::Any {
                    ca.unit = cb.unit.clone();
                } else if cb.unit != UnitCondition::Any && cb.unit != ca.unit {
                    return Err(Error::InvalidSpec("incompatible unit conditions at one place".into()));
                }
                if ca.frob.is_none() {
                    ca.frob = cb.frob.clone();
                }
                if ca.splitting.is_none() {
                    ca.splitting = cb.splitting;
                }
            }
        }
    }
    Event::new(conds)
}

/// `Pr(event)` among surjective characters with `C < X`, also at `2X` and `4X`.
pub fn empirical_probability(
    c: &CountingFunction,
    bound: u128,
    event: &Event,
    threads: usize,
) -> Result<ProbabilityEstimate> {
    empirical_conditional(c, bound, event, &Event::everything(), threads)
}

/// Predicted value, exact when every exponent `c / m` is an integer.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TheoryTarget {
    pub value: f64,
    pub exact: Option<String>,
}

/// Local weight `Nv^{-c(spec)/m}` as an exact power when possible.
fn spec_weight(c: &CountingFunction, s: &LocalSpec, m: u32) -> (f64, Option<(u128, u128)>) {
    let w = c.spec_weight(s);
    match s.place {
        Place::Infinity => (1.0, Some((1, 1))),
        Place::Finite(p) => {
            let f = (p as f64).powf(-(w as f64) / m as f64);
            let exact = if w.is_multiple_of(m) {
                (p as u128).checked_pow(w / m).map(|d| (1u128, d))
            } else {
                None
            };
            (f, exact)
        }
    }
}

fn add_frac(a: (u128, u128), b: (u128, u128)) -> Option<(u128, u128)> {
    let num = a.0.checked_mul(b.1)?.checked_add(b.0.checked_mul(a.1)?)?;
    let den = a.1.checked_mul(b.1)?;
    let g = gcd128(num, den);
    Some((num / g, den / g))
}

fn mul_frac(a: (u128, u128), b: (u128, u128)) -> Option<(u128, u128)> {
    let g1 = gcd128(a.0, b.1).max(1);
    let g2 = gcd128(b.0, a.1).max(1);
    Some(((a.0 / g1).checked_mul(b.0 / g2)?, (a.1 / g2).checked_mul(b.1 / g1)?))
}

fn gcd128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Sum of `Nv^{-c/m}` over the viable specifications at a place satisfying a condition.
fn place_mass(c: &CountingFunction, cond: &PlaceCondition) -> (f64, Option<(u128, u128)>) {
    let g = c.group();
    let m = c.min_weight();
    let mut total = 0.0;
    let mut exact = Some((0u128, 1u128));
    for s in local_specs(g, cond.place) {
        if !cond.matches(g, &s) || !crate::viability::spec_viable_over_q(g, &s) {
            continue;
        }
        let (f, e) = spec_weight(c, &s, m);
        total += f;
        exact = match (exact, e) {
            (Some(a), Some(b)) => add_frac(a, b),
            _ => None,
        };
    }
    (total, exact)
}

/// Predicted `Pr(a) / Pr(b)` from products of local masses.
pub fn theory_ratio(c: &CountingFunction, a: &Event, b: &Event) -> TheoryTarget {
    let mut places: Vec<Place> = a.places().into_iter().chain(b.places()).collect();
    places.sort();
    places.dedup();
    let mut value = 1.0;
    let mut exact = Some((1u128, 1u128));
    for p in places {
        let ca = a.conditions.iter().find(|x| x.place == p).cloned().unwrap_or(PlaceCondition::any(p));
        let cb = b.conditions.iter().find(|x| x.place == p).cloned().unwrap_or(PlaceCondition::any(p));
        let (fa, ea) = place_mass(c, &ca);
        let (fb, eb) = place_mass(c, &cb);
        value *= fa / fb;
        exact = match (exact, ea, eb) {
            (Some(x), Some(na), Some(nb)) if nb.0 != 0 => mul_frac(x, (na.0 * nb.1, na.1 * nb.0)),
            _ => None,
        };
    }
    let exact = exact.map(|(n, d)| {
        let g = gcd128(n, d).max(1);
        if d / g == 1 { format!("{}", n / g) } else { format!("{}/{}", n / g, d / g) }
    });
    TheoryTarget { value, exact }
}

/// Predicted `Pr(event)`.
pub fn theory_probability(c: &CountingFunction, event: &Event) -> TheoryTarget {
    theory_ratio(c, event, &Event::everything())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioPoint {
    pub bound: String,
    pub count_a: u64,
    pub count_b: u64,
    pub empirical: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RatioReport {
    pub target: TheoryTarget,
    pub fair: bool,
    pub points: Vec<RatioPoint>,
    /// Whether `|relative error|` decreases along the schedule.
    pub improving: bool,
}

/// `Pr(a)/Pr(b)` at each bound against the local-mass prediction. Unfair counting functions
/// are flagged, since the prediction need not hold for them.
pub fn ratio_report(c: &CountingFunction, bounds: &[u128], a: &Event, b: &Event, threads: usize) -> Result<RatioReport> {
    let target = theory_ratio(c, a, b);
    let m = measure(c, bounds, &[a.clone(), b.clone()], threads)?;
    let mut points = Vec::new();
    for (k, &x) in bounds.iter().enumerate() {
        let (na, nb) = (m.counts[0][k], m.counts[1][k]);
        if nb == 0 {
            return Err(Error::ZeroDenominator(format!("no characters in the reference event below {x}")));
        }
        let emp = na as f64 / nb as f64;
        points.push(RatioPoint {
            bound: x.to_string(),
            count_a: na,
            count_b: nb,
            empirical: emp,
            relative_error: (emp - target.value) / target.value,
        });
    }
    let improving = points.windows(2).all(|w| w[1].relative_error.abs() < w[0].relative_error.abs());
    Ok(RatioReport { target, fair: c.is_fair(), points, improving })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChebotarevRow {
    #[serde(rename = "numPrimes")]
    pub num_primes: u64,
    pub count: u64,
    pub empirical: f64,
    pub target: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChebotarevPoint {
    pub bound: String,
    pub unramified: u64,
    pub rows: Vec<ChebotarevRow>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChebotarevReport {
    pub prime: u64,
    pub points: Vec<ChebotarevPoint>,
}

/// Distribution of the number of primes above `p` among characters unramified at `p`, against
/// the census of element orders (restricted to viable Frobenius values).
pub fn chebotarev_report(c: &CountingFunction, p: u64, bounds: &[u128], threads: usize) -> Result<ChebotarevReport> {
    let g = c.group();
    let n = g.order();
    let mut rs: Vec<u64> = crate::arith::divisors(g.exponent());
    rs.sort_unstable_by(|a, b| b.cmp(a));
    let frobs: Vec<GroupElement> = g
        .elements()
        .filter(|f| {
            let s = LocalSpec {
                place: Place::Finite(p),
                unit_part: Some(LocalCharacter::trivial(p)),
                frob: f.clone(),
            };
            crate::viability::spec_viable_over_q(g, &s)
        })
        .collect();
    let mut events = vec![Event::new(vec![PlaceCondition::unramified(p)])?];
    for &r in &rs {
        let split = SplittingType { e: 1, f_res: r, num_primes: n / r };
        events.push(Event::new(vec![PlaceCondition { splitting: Some(split), ..PlaceCondition::unramified(p) }])?);
    }
    let m = measure(c, bounds, &events, threads)?;
    let mut points = Vec::new();
    for (k, &x) in bounds.iter().enumerate() {
        let den = m.counts[0][k];
        if den == 0 {
            return Err(Error::ZeroDenominator(format!("no characters unramified at {p} below {x}")));
        }
        let rows = rs
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let count = m.counts[i + 1][k];
                let census = frobs.iter().filter(|f| g.element_order(f) == r).count() as f64;
                ChebotarevRow {
                    num_primes: n / r,
                    count,
                    empirical: count as f64 / den as f64,
                    target: census / frobs.len() as f64,
                }
            })
            .collect();
        points.push(ChebotarevPoint { bound: x.to_string(), unramified: den, rows });
    }
    Ok(ChebotarevReport { prime: p, points })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependencePoint {
    pub bound: String,
    pub p1: f64,
    pub p2: f64,
    pub both: f64,
    pub defect: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IndependenceReport {
    pub points: Vec<IndependencePoint>,
    /// "decreasing" when the defect strictly decreases along the schedule.
    pub trend: String,
}

/// `|Pr(a and b) - Pr(a) Pr(b)|` along a schedule of bounds.
pub fn independence_report(c: &CountingFunction, bounds: &[u128], a: &Event, b: &Event, threads: usize) -> Result<IndependenceReport> {
    let both = a.and(b)?;
    let m = measure(c, bounds, &[Event::everything(), a.clone(), b.clone(), both], threads)?;
    let mut points = Vec::new();
    for (k, &x) in bounds.iter().enumerate() {
        let total = m.counts[0][k];
        if total == 0 {
            return Err(Error::ZeroDenominator(format!("no characters below {x}")));
        }
        let t = total as f64;
        let (p1, p2, pb) = (m.counts[1][k] as f64 / t, m.counts[2][k] as f64 / t, m.counts[3][k] as f64 / t);
        points.push(IndependencePoint { bound: x.to_string(), p1, p2, both: pb, defect: (pb - p1 * p2).abs() });
    }
    let decreasing = points.windows(2).all(|w| w[1].defect < w[0].defect);
    Ok(IndependenceReport {
        points,
        trend: if decreasing { "decreasing".into() } else { "not decreasing".into() },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{conductor_counting, discriminant_counting};

    fn grp(f: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(f.to_vec()).unwrap()
    }

    fn kronecker(d: i64, q: u64) -> i64 {
        if q == 2 {
            return match d.rem_euclid(8) {
                0 | 2 | 4 | 6 => 0,
                1 | 7 => 1,
                _ => -1,
            };
        }
        let r = d.rem_euclid(q as i64) as u64;
        if r == 0 {
            return 0;
        }
        if crate::arith::pow_mod(r, (q - 1) / 2, q) == 1 { 1 } else { -1 }
    }

    #[test]
    fn quadratic_split_at_3() {
        let g = grp(&[2]);
        let c = conductor_counting(&g);
        let ev = Event::new(vec![PlaceCondition { frob: Some(g.zero()), ..PlaceCondition::unramified(3) }]).unwrap();
        let est = empirical_probability(&c, 13, &ev, 1).unwrap();
        let ds = [-3i64, -4, 5, -7, 8, -8, -11, 12];
        let split = ds.iter().filter(|&&d| kronecker(d, 3) == 1).count() as u64;
        assert_eq!((est.numerator, est.denominator), (split, 8));
    }

    #[test]
    fn empty_event_and_inviable_event() {
        let g = grp(&[8]);
        let c = conductor_counting(&g);
        let all = empirical_probability(&c, 2000, &Event::everything(), 1).unwrap();
        assert_eq!(all.estimate.value, 1.0);
        let inert = Event::new(vec![PlaceCondition { frob: Some(g.element(vec![1]).unwrap()), ..PlaceCondition::unramified(2) }]).unwrap();
        let est = empirical_probability(&c, 100_000, &inert, 1).unwrap();
        assert!(est.schedule.iter().all(|s| s.numerator == 0));
    }

    #[test]
    fn zero_denominator() {
        let g = grp(&[3]);
        let c = conductor_counting(&g);
        assert!(matches!(empirical_probability(&c, 5, &Event::everything(), 1), Err(Error::ZeroDenominator(_))));
    }

    #[test]
    fn partition_at_a_place() {
        let g = grp(&[3]);
        let c = conductor_counting(&g);
        let specs = local_specs(&g, Place::Finite(7));
        let events: Vec<Event> = specs.iter().map(|s| Event::from_specs(std::slice::from_ref(s)).unwrap()).collect();
        let m = measure(&c, &[3000], &events, 1).unwrap();
        let total = measure(&c, &[3000], &[Event::everything()], 1).unwrap().counts[0][0];
        assert_eq!(m.counts.iter().map(|r| r[0]).sum::<u64>(), total);
    }

    #[test]
    fn splitting_event_is_sum_of_specs() {
        let g = grp(&[4]);
        let c = conductor_counting(&g);
        let t = SplittingType { e: 1, f_res: 2, num_primes: 2 };
        let ev = Event::new(vec![PlaceCondition { splitting: Some(t), ..PlaceCondition::any(Place::Finite(13)) }]).unwrap();
        let parts: Vec<Event> = local_specs(&g, Place::Finite(13))
            .into_iter()
            .filter(|s| s.splitting_type(&g) == t)
            .map(|s| Event::from_specs(&[s]).unwrap())
            .collect();
        let mut all = vec![ev];
        all.extend(parts);
        let m = measure(&c, &[20_000], &all, 1).unwrap();
        assert_eq!(m.counts[0][0], m.counts[1..].iter().map(|r| r[0]).sum::<u64>());
    }

    #[test]
    fn theory_targets() {
        let z3 = grp(&[3]);
        let c3 = conductor_counting(&z3);
        let t = theory_ratio(&c3, &Event::new(vec![PlaceCondition::ramified(7)]).unwrap(), &Event::new(vec![PlaceCondition::unramified(7)]).unwrap());
        assert_eq!(t.exact.as_deref(), Some("2/7"));
        let z2 = grp(&[2]);
        let c2 = conductor_counting(&z2);
        // one-place events: Pr(ram 5) / Pr(ram 13) = (1/6) / (1/14)
        let a = Event::new(vec![PlaceCondition::ramified(5)]).unwrap();
        let b = Event::new(vec![PlaceCondition::ramified(13)]).unwrap();
        assert_eq!(theory_ratio(&c2, &a, &b).exact.as_deref(), Some("7/3"));
        // specifications on {5, 13}: the local weights alone
        let a2 = Event::new(vec![PlaceCondition::ramified(5), PlaceCondition::unramified(13)]).unwrap();
        let b2 = Event::new(vec![PlaceCondition::unramified(5), PlaceCondition::ramified(13)]).unwrap();
        assert_eq!(theory_ratio(&c2, &a2, &b2).exact.as_deref(), Some("13/5"));
        assert_eq!(theory_ratio(&c2, &a, &a).exact.as_deref(), Some("1"));
    }

    #[test]
    fn chebotarev_targets_z4() {
        let g = grp(&[4]);
        let r = chebotarev_report(&conductor_counting(&g), 5, &[5000], 1).unwrap();
        let t: Vec<(u64, f64)> = r.points[0].rows.iter().map(|x| (x.num_primes, x.target)).collect();
        assert_eq!(t, vec![(1, 0.5), (2, 0.25), (4, 0.25)]);
    }

    #[test]
    fn independence_with_empty_event() {
        let g = grp(&[9]);
        let c = discriminant_counting(&g);
        let a = Event::new(vec![PlaceCondition::ramified(19)]).unwrap();
        let r = independence_report(&c, &[1_000_000_000_000], &a, &Event::everything(), 1).unwrap();
        assert_eq!(r.points[0].defect, 0.0);
    }

    #[test]
    fn ratio_report_z3() {
        let g = grp(&[3]);
        let c = conductor_counting(&g);
        let a = Event::new(vec![PlaceCondition::ramified(7)]).unwrap();
        let b = Event::new(vec![PlaceCondition::unramified(7)]).unwrap();
        let r = ratio_report(&c, &[10_000, 100_000], &a, &b, 1).unwrap();
        assert!(r.fair);
        assert!(r.points[1].relative_error.abs() < 0.2, "{r:?}");
    }
}
