//! Enumeration of characters `J_Q/Q^x -> G` with `C(chi) < X`, and exact counting by
//! multiplicative sieving over the subgroup lattice.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::arith::{factorize, for_each_prime_in, gcd, iroot_u128};
use crate::characters::{local_characters, LocalCharacter, LocalSpec, Place, SplittingType};
use crate::counting::CountingFunction;
use crate::error::{Error, Result};
use crate::group::{FiniteAbelianGroup, GroupElement};
use crate::units::dlog_mod_divisor;
use crate::characters::GlobalCharacter;

/// Largest group order the enumerator handles.
pub const ENUMERATION_ORDER_LIMIT: u64 = 256;

#[derive(Clone, Debug)]
pub struct EnumerationQuery {
    pub group: FiniteAbelianGroup,
    pub counting: CountingFunction,
    /// Strict upper bound on `C(chi)`.
    pub bound: u128,
    /// Local specifications every character must match.
    pub pins: Vec<LocalSpec>,
    pub surjective_only: bool,
    /// Maximum number of characters to visit; exceeding it is an error.
    pub budget: Option<u64>,
    pub threads: usize,
}

impl EnumerationQuery {
    pub fn new(counting: &CountingFunction, bound: u128) -> Self {
        EnumerationQuery {
            group: counting.group().clone(),
            counting: counting.clone(),
            bound,
            pins: Vec::new(),
            surjective_only: true,
            budget: None,
            threads: threads_from_env(),
        }
    }
}

/// Thread count from `ABEXT_THREADS`, defaulting to 1.
pub fn threads_from_env() -> usize {
    std::env::var("ABEXT_THREADS").ok().and_then(|s| s.parse().ok()).filter(|&t| t > 0).unwrap_or(1)
}

/// Counts of characters per bucket of `C`-values.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CountTally {
    pub bucket_width: u128,
    /// Bucket start -> count.
    pub counts: BTreeMap<u128, u64>,
    pub total: u64,
}

impl CountTally {
    pub fn new(bucket_width: u128) -> Self {
        CountTally { bucket_width: bucket_width.max(1), counts: BTreeMap::new(), total: 0 }
    }

    pub fn add(&mut self, value: u128, count: u64) {
        if count == 0 {
            return;
        }
        let key = value / self.bucket_width * self.bucket_width;
        *self.counts.entry(key).or_insert(0) += count;
        self.total += count;
    }

    pub fn merge(&mut self, other: &CountTally) {
        for (&k, &c) in &other.counts {
            *self.counts.entry(k).or_insert(0) += c;
        }
        self.total += other.total;
    }

    /// Number of characters with value `< x`; `x` must be a bucket boundary.
    pub fn count_below(&self, x: u128) -> u64 {
        self.counts.range(..x).map(|(_, &c)| c).sum()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct Bits([u64; 4]);

impl Bits {
    fn single(i: usize) -> Self {
        let mut b = Bits([0; 4]);
        b.set(i);
        b
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn has(&self, i: usize) -> bool {
        self.0[i / 64] >> (i % 64) & 1 == 1
    }
    fn count(&self) -> u64 {
        self.0.iter().map(|w| w.count_ones() as u64).sum()
    }
    fn members(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word >> b & 1 == 1).map(move |b| w * 64 + b)
        })
    }
}

#[derive(Clone, Copy, Debug)]
struct TameOpt {
    h: u16,
    weight: u32,
}

#[derive(Clone, Debug)]
struct WildOpt {
    chi: LocalCharacter,
    gens: Vec<u16>,
    weight: u32,
    pw: u128,
}

#[derive(Clone, Debug)]
enum CandKind {
    Tame { class: u16 },
    Wild { opts: Vec<WildOpt> },
}

#[derive(Clone, Debug)]
struct Cand {
    p: u64,
    kind: CandKind,
}

/// A chosen local component: candidate index and option index.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Entry {
    cand: u32,
    opt: u16,
}

/// Precomputed values `chi_l(x)` for a fixed integer `x` and every candidate component.
#[derive(Clone, Debug)]
pub struct PlaceEvaluator {
    pub place: Place,
    x: i64,
    /// For tame candidates: `log_g(x) mod d`; unused for wild ones.
    tame_log: Vec<u32>,
    /// For wild candidates: value index per option.
    wild_vals: Vec<Vec<u16>>,
}

/// Group tables and candidate components for one query.
///
/// Candidate layout: searchable wild primes, then searchable tame primes in increasing
/// order, then fixed components forced by pinned ramified specifications.
pub struct Engine {
    pub group: FiniteAbelianGroup,
    pub counting: CountingFunction,
    bound: u128,
    n: usize,
    exp: usize,
    add: Vec<u16>,
    mul: Vec<u16>,
    full: Bits,
    classes: Vec<Vec<TameOpt>>,
    class_divisor: Vec<u64>,
    cands: Vec<Cand>,
    n_wild: usize,
    n_searched: usize,
    tame_primes: Vec<u64>,
    min_tame: u32,
    fixed: Vec<Entry>,
    fixed_value: u128,
    fixed_image: Bits,
    infeasible: bool,
    pin_checks: Vec<(PlaceEvaluator, u16)>,
    surjective_only: bool,
    budget: Option<u64>,
    threads: usize,
    roots: std::sync::OnceLock<Vec<u32>>,
}

fn wild_opt(g: &FiniteAbelianGroup, c: &CountingFunction, chi: LocalCharacter) -> WildOpt {
    let weight = c.local_weight(&chi);
    let pw = (chi.prime as u128).checked_pow(weight).unwrap_or(u128::MAX);
    let gens = chi.images.iter().map(|x| g.index_of(x) as u16).collect();
    WildOpt { chi, gens, weight, pw }
}

impl Engine {
    pub fn new(q: &EnumerationQuery) -> Result<Engine> {
        let g = &q.group;
        if q.counting.group() != g {
            return Err(Error::InvalidArgument("counting function is for another group".into()));
        }
        let n = g.order() as usize;
        if n as u64 > ENUMERATION_ORDER_LIMIT {
            return Err(Error::SizeLimit(format!(
                "enumeration supports |G| <= {ENUMERATION_ORDER_LIMIT}, got {n}"
            )));
        }
        let exp = g.exponent() as usize;
        let elems: Vec<GroupElement> = g.elements().collect();
        let mut add = vec![0u16; n * n];
        for i in 0..n {
            for j in 0..n {
                add[i * n + j] = g.index_of(&g.add(&elems[i], &elems[j])) as u16;
            }
        }
        let mut mul = vec![0u16; n * exp];
        for i in 0..n {
            for t in 0..exp {
                mul[i * exp + t] = g.index_of(&g.scale(&elems[i], t as i64)) as u16;
            }
        }
        let mut full = Bits([0; 4]);
        (0..n).for_each(|i| full.set(i));

        let counting = &q.counting;
        let min_tame = counting.min_weight();

        let mut class_divisor = Vec::new();
        let mut classes = Vec::new();
        for d in crate::arith::divisors(exp as u64) {
            let mut opts: Vec<TameOpt> = (1..n)
                .filter(|&i| d % g.element_order(&elems[i]) == 0)
                .map(|i| TameOpt { h: i as u16, weight: counting.element_weight_by_index(i) })
                .collect();
            opts.sort_by_key(|o| (o.weight, o.h));
            class_divisor.push(d);
            classes.push(opts);
        }

        let mut pinned: HashMap<u64, LocalCharacter> = HashMap::new();
        let mut inf_pinned = false;
        for s in &q.pins {
            s.validate(g)?;
            match s.place {
                Place::Finite(p) => {
                    if pinned.insert(p, s.unit_part.clone().unwrap()).is_some() {
                        return Err(Error::InvalidSpec(format!("place {p} pinned twice")));
                    }
                }
                Place::Infinity => {
                    if std::mem::replace(&mut inf_pinned, true) {
                        return Err(Error::InvalidSpec("infinity pinned twice".into()));
                    }
                }
            }
        }

        let mut cands = Vec::new();
        for (p, _) in factorize(n as u64) {
            if pinned.contains_key(&p) {
                continue;
            }
            let mut opts: Vec<WildOpt> = local_characters(g, p)
                .into_iter()
                .filter(|c| !c.is_trivial())
                .map(|chi| wild_opt(g, counting, chi))
                .collect();
            opts.sort_by(|a, b| (a.pw, &a.chi).cmp(&(b.pw, &b.chi)));
            cands.push(Cand { p, kind: CandKind::Wild { opts } });
        }
        let n_wild = cands.len();
        let mut tame_primes = Vec::new();
        if q.bound > 1 {
            let pmax = iroot_u128(q.bound - 1, min_tame.max(1));
            let pmax = u64::try_from(pmax)
                .ok()
                .filter(|&p| p < 1 << 34)
                .ok_or_else(|| Error::SizeLimit("bound too large for the prime sieve".into()))?;
            for_each_prime_in(2, pmax + 1, |p| {
                if (n as u64).is_multiple_of(p) || pinned.contains_key(&p) {
                    return;
                }
                let d = gcd(p - 1, exp as u64);
                if d == 1 {
                    return;
                }
                let class = class_divisor.iter().position(|&x| x == d).unwrap() as u16;
                tame_primes.push(p);
                cands.push(Cand { p, kind: CandKind::Tame { class } });
            });
        }
        let n_searched = cands.len();
        let mut fixed = Vec::new();
        let mut pinned_sorted: Vec<(u64, LocalCharacter)> = pinned.into_iter().collect();
        pinned_sorted.sort_by_key(|(p, _)| *p);
        for (p, u) in pinned_sorted {
            if u.is_trivial() {
                continue;
            }
            fixed.push(Entry { cand: cands.len() as u32, opt: 0 });
            cands.push(Cand { p, kind: CandKind::Wild { opts: vec![wild_opt(g, counting, u)] } });
        }
        let mut engine = Engine {
            group: g.clone(),
            counting: counting.clone(),
            bound: q.bound,
            n,
            exp,
            add,
            mul,
            full,
            classes,
            class_divisor,
            cands,
            n_wild,
            n_searched,
            tame_primes,
            min_tame,
            fixed: Vec::new(),
            fixed_value: 1,
            fixed_image: Bits::single(0),
            infeasible: false,
            pin_checks: Vec::new(),
            surjective_only: q.surjective_only,
            budget: q.budget,
            threads: q.threads.max(1),
            roots: std::sync::OnceLock::new(),
        };
        let mut value = 1u128;
        let mut image = Bits::single(0);
        for e in &fixed {
            value = value.saturating_mul(engine.entry_pw(e));
            image = engine.join_entry(image, e);
        }
        engine.infeasible = value >= q.bound;
        engine.fixed = fixed;
        engine.fixed_value = value;
        engine.fixed_image = image;
        let mut checks = Vec::new();
        for s in &q.pins {
            let ev = engine.place_evaluator(s.place)?;
            checks.push((ev, g.index_of(&s.frob) as u16));
        }
        engine.pin_checks = checks;
        Ok(engine)
    }

    fn level(&self, e: &Entry) -> u32 {
        match &self.cands[e.cand as usize].kind {
            CandKind::Tame { .. } => 1,
            CandKind::Wild { opts } => opts[e.opt as usize].chi.level,
        }
    }

    pub fn prime(&self, e: &Entry) -> u64 {
        self.cands[e.cand as usize].p
    }

    /// Exponent of `p` in `C` for this component.
    pub fn weight(&self, e: &Entry) -> u32 {
        match &self.cands[e.cand as usize].kind {
            CandKind::Tame { class } => self.classes[*class as usize][e.opt as usize].weight,
            CandKind::Wild { opts } => opts[e.opt as usize].weight,
        }
    }

    fn entry_pw(&self, e: &Entry) -> u128 {
        let c = &self.cands[e.cand as usize];
        match &c.kind {
            CandKind::Tame { class } => (c.p as u128)
                .checked_pow(self.classes[*class as usize][e.opt as usize].weight)
                .unwrap_or(u128::MAX),
            CandKind::Wild { opts } => opts[e.opt as usize].pw,
        }
    }

    pub fn local_character(&self, e: &Entry) -> LocalCharacter {
        let c = &self.cands[e.cand as usize];
        match &c.kind {
            CandKind::Tame { class } => {
                let h = self.classes[*class as usize][e.opt as usize].h;
                LocalCharacter { prime: c.p, level: 1, images: vec![self.group.element_at(h as usize)] }
            }
            CandKind::Wild { opts } => opts[e.opt as usize].chi.clone(),
        }
    }

    fn join(&self, s: Bits, h: u16) -> Bits {
        if s.has(h as usize) {
            return s;
        }
        let n = self.n;
        let mut out = s;
        let mut t = h as usize;
        while t != 0 {
            for x in s.members() {
                out.set(self.add[x * n + t] as usize);
            }
            t = self.add[t * n + h as usize] as usize;
        }
        out
    }

    fn join_entry(&self, s: Bits, e: &Entry) -> Bits {
        match &self.cands[e.cand as usize].kind {
            CandKind::Tame { class } => self.join(s, self.classes[*class as usize][e.opt as usize].h),
            CandKind::Wild { opts } => opts[e.opt as usize].gens.iter().fold(s, |acc, &h| self.join(acc, h)),
        }
    }

    fn primitive_roots(&self) -> &Vec<u32> {
        self.roots.get_or_init(|| {
            let max = self.tame_primes.last().copied().unwrap_or(2);
            let spf = smallest_prime_factors(max as usize);
            self.tame_primes
                .iter()
                .map(|&p| {
                    let mut qs = Vec::new();
                    let mut m = (p - 1) as usize;
                    while m > 1 {
                        let q = spf[m] as usize;
                        qs.push(q as u64);
                        while m.is_multiple_of(q) {
                            m /= q;
                        }
                    }
                    primitive_root_from_factors(p, &qs) as u32
                })
                .collect()
        })
    }

    /// Precomputes `chi_l(x)` for every candidate, where `x = p` at a finite place and
    /// `x = -1` at infinity.
    pub fn place_evaluator(&self, place: Place) -> Result<PlaceEvaluator> {
        let x: i64 = match place {
            Place::Finite(p) => p as i64,
            Place::Infinity => -1,
        };
        let roots = self.primitive_roots();
        let mut tame_log = vec![0u32; self.cands.len()];
        let mut wild_vals = vec![Vec::new(); self.cands.len()];
        for (i, c) in self.cands.iter().enumerate() {
            if x.rem_euclid(c.p as i64) == 0 {
                continue;
            }
            match &c.kind {
                CandKind::Tame { class } => {
                    let d = self.class_divisor[*class as usize];
                    let g = roots[i - self.n_wild] as u64;
                    tame_log[i] = dlog_mod_divisor(x.rem_euclid(c.p as i64) as u64, c.p, g, d) as u32;
                }
                CandKind::Wild { opts } => {
                    wild_vals[i] = opts
                        .iter()
                        .map(|o| Ok(self.group.index_of(&o.chi.eval(&self.group, x)?) as u16))
                        .collect::<Result<Vec<u16>>>()?;
                }
            }
        }
        Ok(PlaceEvaluator { place, x, tame_log, wild_vals })
    }

    fn frob_index(&self, entries: &[Entry], ev: &PlaceEvaluator) -> u16 {
        let n = self.n;
        let mut acc = 0usize;
        for e in entries {
            let c = &self.cands[e.cand as usize];
            if ev.x.rem_euclid(c.p as i64) == 0 {
                continue;
            }
            let v = match &c.kind {
                CandKind::Tame { class } => {
                    let h = self.classes[*class as usize][e.opt as usize].h as usize;
                    self.mul[h * self.exp + ev.tame_log[e.cand as usize] as usize % self.exp]
                }
                CandKind::Wild { .. } => ev.wild_vals[e.cand as usize][e.opt as usize],
            };
            acc = self.add[acc * n + v as usize] as usize;
        }
        acc as u16
    }

    /// Splitting type at a place from its unit component (if ramified there) and Frobenius.
    pub fn splitting_type(&self, entry: Option<&Entry>, frob: u16) -> SplittingType {
        let zero = Bits::single(0);
        let inertia = entry.map_or(zero, |e| self.join_entry(zero, e));
        let decomposition = self.join(inertia, frob);
        let (i, d) = (inertia.count(), decomposition.count());
        SplittingType { e: i, f_res: d / i, num_primes: self.n as u64 / d }
    }

    /// Scalar multiple of an element index.
    pub fn scale_index(&self, h: u16, t: u64) -> u16 {
        self.mul[h as usize * self.exp + (t % self.exp as u64) as usize]
    }

    /// Visits every character with `C < X` that matches the pins (and is surjective when
    /// requested). Work is split by the largest prime of the support.
    pub fn run<V: Visitor>(&self, visitor: V) -> Result<V> {
        let mut visitor = visitor;
        if self.infeasible {
            return Ok(visitor);
        }
        let counter = std::sync::atomic::AtomicU64::new(0);
        let mut stack = self.fixed.clone();
        self.visit(self.fixed_value, &stack, self.fixed_image, &mut visitor, &counter)?;
        let tops = self.children(self.fixed_value, self.n_searched);
        if self.threads <= 1 || tops.len() < 2 {
            for (e, v, img) in tops {
                stack.push(e);
                self.node(v, e.cand as usize, &mut stack, img, &mut visitor, &counter)?;
                stack.pop();
            }
            return Ok(visitor);
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(self.threads)
            .build()
            .map_err(|e| Error::InvalidArgument(e.to_string()))?;
        let parts: Vec<Result<V>> = pool.install(|| {
            tops.par_iter()
                .map(|&(e, v, img)| {
                    let mut local = visitor.fork();
                    let mut stack = self.fixed.clone();
                    stack.push(e);
                    self.node(v, e.cand as usize, &mut stack, img, &mut local, &counter)?;
                    Ok(local)
                })
                .collect()
        });
        for part in parts {
            visitor.merge(part?);
        }
        Ok(visitor)
    }

    /// Children `(entry, value, image)` of a node, using candidates with index `< max`.
    fn children(&self, value: u128, max: usize) -> Vec<(Entry, u128, Bits)> {
        let mut out = Vec::new();
        self.for_children(value, max, |e, v| out.push((e, v, Bits([0; 4]))));
        let image = self.fixed_image;
        out.into_iter().map(|(e, v, _)| (e, v, self.join_entry(image, &e))).collect()
    }

    fn for_children(&self, value: u128, max: usize, mut f: impl FnMut(Entry, u128)) {
        if value >= self.bound {
            return;
        }
        let limit = (self.bound - 1) / value;
        if limit < 2 {
            return;
        }
        let tame_end = max.min(self.n_searched);
        if tame_end > self.n_wild {
            let pmax = if self.min_tame <= 1 { limit } else { iroot_u128(limit, self.min_tame) };
            let k = self.tame_primes.partition_point(|&p| (p as u128) <= pmax);
            let hi = tame_end.min(self.n_wild + k);
            for j in (self.n_wild..hi).rev() {
                let c = &self.cands[j];
                if let CandKind::Tame { class } = c.kind {
                    for (oi, o) in self.classes[class as usize].iter().enumerate() {
                        match (c.p as u128).checked_pow(o.weight) {
                            Some(pw) if pw <= limit => f(Entry { cand: j as u32, opt: oi as u16 }, value * pw),
                            _ => break,
                        }
                    }
                }
            }
        }
        for j in (0..max.min(self.n_wild)).rev() {
            if let CandKind::Wild { opts } = &self.cands[j].kind {
                for (oi, o) in opts.iter().enumerate() {
                    if o.pw > limit {
                        break;
                    }
                    f(Entry { cand: j as u32, opt: oi as u16 }, value * o.pw);
                }
            }
        }
    }

    fn node<V: Visitor>(
        &self,
        value: u128,
        idx: usize,
        stack: &mut Vec<Entry>,
        image: Bits,
        visitor: &mut V,
        counter: &std::sync::atomic::AtomicU64,
    ) -> Result<()> {
        self.visit(value, stack, image, visitor, counter)?;
        let mut kids: Vec<(Entry, u128)> = Vec::new();
        self.for_children(value, idx, |e, v| kids.push((e, v)));
        for (e, v) in kids {
            let img = self.join_entry(image, &e);
            stack.push(e);
            let r = self.node(v, e.cand as usize, stack, img, visitor, counter);
            stack.pop();
            r?;
        }
        Ok(())
    }

    fn visit<V: Visitor>(
        &self,
        value: u128,
        stack: &[Entry],
        image: Bits,
        visitor: &mut V,
        counter: &std::sync::atomic::AtomicU64,
    ) -> Result<()> {
        if self.surjective_only && image != self.full {
            return Ok(());
        }
        for (ev, want) in &self.pin_checks {
            if self.frob_index(stack, ev) != *want {
                return Ok(());
            }
        }
        if let Some(b) = self.budget {
            let c = counter.fetch_add(1, std::sync::atomic::Ordering::Relaxed) + 1;
            if c > b {
                return Err(Error::BudgetExhausted(b));
            }
        }
        visitor.visit(&CharView { engine: self, value, entries: stack });
        Ok(())
    }
}

/// A character visited by the enumerator.
pub struct CharView<'a> {
    pub engine: &'a Engine,
    pub value: u128,
    pub entries: &'a [Entry],
}

impl CharView<'_> {
    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| self.engine.prime(e))
    }

    pub fn conductor(&self) -> u128 {
        self.entries
            .iter()
            .map(|e| (self.engine.prime(e) as u128).pow(self.engine.level(e)))
            .product()
    }

    pub fn component_at(&self, p: u64) -> Option<Entry> {
        self.entries.iter().copied().find(|e| self.engine.prime(e) == p)
    }

    pub fn to_global(&self) -> GlobalCharacter {
        let mut places: Vec<LocalCharacter> =
            self.entries.iter().map(|e| self.engine.local_character(e)).collect();
        places.sort_by_key(|c| c.prime);
        GlobalCharacter::new_unchecked(self.engine.group.clone(), places)
    }

    /// Sum over support primes `l` not dividing `x` of `chi_l(x)`, as an element index.
    pub fn frob_index(&self, ev: &PlaceEvaluator) -> u16 {
        self.engine.frob_index(self.entries, ev)
    }
}

pub trait Visitor: Send + Sync + Sized {
    fn visit(&mut self, view: &CharView<'_>);
    fn fork(&self) -> Self;
    fn merge(&mut self, other: Self);
}

fn smallest_prime_factors(n: usize) -> Vec<u32> {
    let mut spf = vec![0u32; n + 1];
    for i in 2..=n {
        if spf[i] == 0 {
            let mut j = i;
            while j <= n {
                if spf[j] == 0 {
                    spf[j] = i as u32;
                }
                j += i;
            }
        }
    }
    spf
}

/// Smallest primitive root modulo `p` given the prime divisors of `p - 1`.
fn primitive_root_from_factors(p: u64, qs: &[u64]) -> u64 {
    if p == 2 {
        return 1;
    }
    (2..p)
        .find(|&g| qs.iter().all(|&q| crate::arith::pow_mod(g, (p - 1) / q, p) != 1))
        .expect("primitive root exists")
}

/// Collects characters with their values.
#[derive(Default)]
struct Collector {
    items: Vec<(u128, u128, GlobalCharacter)>,
}

impl Visitor for Collector {
    fn visit(&mut self, v: &CharView<'_>) {
        self.items.push((v.value, v.conductor(), v.to_global()));
    }
    fn fork(&self) -> Self {
        Collector::default()
    }
    fn merge(&mut self, other: Self) {
        self.items.extend(other.items);
    }
}

/// Tallies values only.
struct TallyVisitor {
    tally: CountTally,
}

impl Visitor for TallyVisitor {
    fn visit(&mut self, v: &CharView<'_>) {
        self.tally.add(v.value, 1);
    }
    fn fork(&self) -> Self {
        TallyVisitor { tally: CountTally::new(self.tally.bucket_width) }
    }
    fn merge(&mut self, other: Self) {
        self.tally.merge(&other.tally);
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnumeratedCharacter {
    pub value: u128,
    pub conductor: u128,
    pub character: GlobalCharacter,
    pub serialized: String,
}

/// All matching characters, ordered by value, then conductor, then serialized form.
pub fn enumerate(q: &EnumerationQuery) -> Result<Vec<EnumeratedCharacter>> {
    let engine = Engine::new(q)?;
    let c = engine.run(Collector::default())?;
    let mut out: Vec<EnumeratedCharacter> = c
        .items
        .into_iter()
        .map(|(value, conductor, character)| {
            let serialized = character.serialize();
            EnumeratedCharacter { value, conductor, character, serialized }
        })
        .collect();
    out.sort_by(|a, b| (a.value, a.conductor, &a.serialized).cmp(&(b.value, b.conductor, &b.serialized)));
    Ok(out)
}

/// Tally of values from the enumerator.
pub fn enumerate_tally(q: &EnumerationQuery, bucket_width: u128) -> Result<CountTally> {
    let engine = Engine::new(q)?;
    Ok(engine.run(TallyVisitor { tally: CountTally::new(bucket_width) })?.tally)
}

/// Largest bound accepted by [`fast_count`].
pub const FAST_COUNT_LIMIT: u128 = 1 << 36;

/// Exact tally of characters with `C < X` by sieving the multiplicative local counts
/// `F_H(n) = prod_p a^H_{p, v_p(n)}` for each subgroup `H`, combined as
/// `N(n) = sum_H mu(H, G) F_H(n)` when only surjective characters are wanted.
pub fn fast_count(
    c: &CountingFunction,
    bound: u128,
    bucket_width: u128,
    surjective_only: bool,
) -> Result<CountTally> {
    let g = c.group();
    let mut tally = CountTally::new(bucket_width);
    if bound <= 1 {
        return Ok(tally);
    }
    if bound > FAST_COUNT_LIMIT {
        return Err(Error::SizeLimit(format!("fast_count supports X <= {FAST_COUNT_LIMIT}")));
    }
    let x = bound as u64;
    let exp = g.exponent();
    let subs: Vec<(crate::group::Subgroup, i64)> = if surjective_only {
        let lat = g.lattice()?;
        lat.subgroups.iter().cloned().zip(lat.mu.iter().copied()).filter(|(_, m)| *m != 0).collect()
    } else {
        vec![(g.whole(), 1)]
    };
    let nh = subs.len();
    let max_w = c.tame_weights().iter().copied().max().unwrap_or(1) as usize;

    // Tame coefficients per class divisor d and subgroup: count of nonzero h in H with
    // order dividing d, by weight.
    let divs = crate::arith::divisors(exp);
    let mut tame_coef: Vec<Vec<Vec<u64>>> = Vec::new();
    for &d in &divs {
        let mut per_h = Vec::new();
        for (h, _) in &subs {
            let mut v = vec![0u64; max_w + 1];
            v[0] = 1;
            for i in h.indices().filter(|&i| i != 0) {
                let e = g.element_at(i);
                if d % g.element_order(&e) == 0 {
                    v[c.element_weight(&e) as usize] += 1;
                }
            }
            per_h.push(v);
        }
        tame_coef.push(per_h);
    }
    let class_of = |p: u64| divs.iter().position(|&d| d == gcd(p - 1, exp)).unwrap();

    let mut wild: Vec<(u64, Vec<Vec<u64>>)> = Vec::new();
    for (p, _) in factorize(g.order()) {
        let chars = local_characters(g, p);
        let mut per_h = Vec::new();
        for (h, _) in &subs {
            let mut v: Vec<u64> = Vec::new();
            for chi in &chars {
                let inside = chi.images.iter().all(|y| h.contains_index(g.index_of(y)));
                if !inside {
                    continue;
                }
                let w = if chi.is_trivial() { 0 } else { c.local_weight(chi) as usize };
                if v.len() <= w {
                    v.resize(w + 1, 0);
                }
                v[w] += 1;
            }
            per_h.push(v);
        }
        wild.push((p, per_h));
    }

    let root = crate::arith::isqrt(x - 1);
    let small = crate::arith::primes_below(root + 1);
    const SEG: u64 = 1 << 16;
    let mut lo = 1u64;
    let mut rem = vec![0u64; SEG as usize];
    let mut vals = vec![0u64; SEG as usize * nh];
    let overflow = || Error::Overflow("fast_count local product".into());
    while lo < x {
        let hi = (lo + SEG).min(x);
        let len = (hi - lo) as usize;
        for i in 0..len {
            rem[i] = lo + i as u64;
        }
        vals[..len * nh].iter_mut().for_each(|v| *v = 1);
        for &(p, ref per_h) in &wild {
            for i in 0..len {
                let mut e = 0usize;
                while rem[i].is_multiple_of(p) {
                    rem[i] /= p;
                    e += 1;
                }
                for (k, v) in per_h.iter().enumerate() {
                    let a = v.get(e).copied().unwrap_or(0);
                    let slot = &mut vals[k * len + i];
                    *slot = slot.checked_mul(a).ok_or_else(overflow)?;
                }
            }
        }
        for &p in &small {
            if g.order().is_multiple_of(p) {
                continue;
            }
            let coefs = &tame_coef[class_of(p)];
            let mut m = lo.div_ceil(p) * p;
            while m < hi {
                let i = (m - lo) as usize;
                let mut e = 0usize;
                while rem[i].is_multiple_of(p) {
                    rem[i] /= p;
                    e += 1;
                }
                for (k, v) in coefs.iter().enumerate() {
                    let a = v.get(e).copied().unwrap_or(0);
                    let slot = &mut vals[k * len + i];
                    *slot = slot.checked_mul(a).ok_or_else(overflow)?;
                }
                m += p;
            }
        }
        for i in 0..len {
            let q = rem[i];
            if q > 1 {
                let per: Vec<u64> = if g.order().is_multiple_of(q) {
                    let w = &wild.iter().find(|(p, _)| *p == q).unwrap().1;
                    w.iter().map(|v| v.get(1).copied().unwrap_or(0)).collect()
                } else {
                    tame_coef[class_of(q)].iter().map(|v| v.get(1).copied().unwrap_or(0)).collect()
                };
                for (k, a) in per.into_iter().enumerate() {
                    let slot = &mut vals[k * len + i];
                    *slot = slot.checked_mul(a).ok_or_else(overflow)?;
                }
            }
            let mut total: i128 = 0;
            for (k, (_, mu)) in subs.iter().enumerate() {
                total += *mu as i128 * vals[k * len + i] as i128;
            }
            if total < 0 {
                return Err(Error::Consistency(format!("negative count at {}", lo + i as u64)));
            }
            let total = u64::try_from(total).map_err(|_| overflow())?;
            tally.add((lo + i as u64) as u128, total);
        }
        lo = hi;
    }
    Ok(tally)
}

/// A local component type that fits under a budget.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdmissibleComponent {
    pub prime: u64,
    pub level: u32,
    /// Division of the image of the cyclic generator; absent for wild components at 2.
    pub division: Option<Vec<GroupElement>>,
    pub weight: u32,
    /// Number of local characters of this type.
    pub count: usize,
}

/// All `(prime, level, division)` types whose factor `p^weight` is below `X`.
pub fn split_budget(c: &CountingFunction, bound: u128) -> Vec<AdmissibleComponent> {
    let g = c.group();
    let mut out: Vec<AdmissibleComponent> = Vec::new();
    if bound <= 1 {
        return out;
    }
    let m = c.min_weight().max(1);
    let pmax = iroot_u128(bound - 1, m) as u64;
    let fits = |p: u64, w: u32| (p as u128).checked_pow(w).is_some_and(|v| v < bound);
    let mut wild_primes: Vec<u64> = factorize(g.order()).into_iter().map(|(p, _)| p).collect();
    wild_primes.retain(|&p| p > pmax);
    let mut consider = |p: u64| {
        if g.order().is_multiple_of(p) {
            let mut groups: BTreeMap<(u32, Option<Vec<GroupElement>>, u32), usize> = BTreeMap::new();
            for chi in local_characters(g, p).into_iter().filter(|x| !x.is_trivial()) {
                let w = c.local_weight(&chi);
                if !fits(p, w) {
                    continue;
                }
                let div = if p == 2 { None } else { Some(g.division_of(&chi.images[0]).elements) };
                *groups.entry((chi.level, div, w)).or_insert(0) += 1;
            }
            for ((level, division, weight), count) in groups {
                out.push(AdmissibleComponent { prime: p, level, division, weight, count });
            }
        } else {
            let d = gcd(p - 1, g.exponent());
            for (div, &w) in c.divisions().iter().zip(c.tame_weights()) {
                if d.is_multiple_of(div.order) && fits(p, w) {
                    out.push(AdmissibleComponent {
                        prime: p,
                        level: 1,
                        division: Some(div.elements.clone()),
                        weight: w,
                        count: div.len(),
                    });
                }
            }
        }
    };
    for_each_prime_in(2, pmax + 1, &mut consider);
    for p in wild_primes {
        consider(p);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::{conductor_counting, discriminant_counting, radical_counting};

    fn grp(f: &[u64]) -> FiniteAbelianGroup {
        FiniteAbelianGroup::new(f.to_vec()).unwrap()
    }

    fn query(c: &CountingFunction, x: u128) -> EnumerationQuery {
        let mut q = EnumerationQuery::new(c, x);
        q.threads = 1;
        q
    }

    #[test]
    fn quadratic_conductor_below_13() {
        let c = conductor_counting(&grp(&[2]));
        let chars = enumerate(&query(&c, 13)).unwrap();
        let conductors: Vec<u128> = chars.iter().map(|e| e.conductor).collect();
        assert_eq!(conductors, vec![3, 4, 5, 7, 8, 8, 11, 12]);
        assert_eq!(fast_count(&c, 13, 1, true).unwrap().total, 8);
    }

    #[test]
    fn cubic_conductor_below_10() {
        let c = conductor_counting(&grp(&[3]));
        let chars = enumerate(&query(&c, 10)).unwrap();
        let conductors: Vec<u128> = chars.iter().map(|e| e.conductor).collect();
        assert_eq!(conductors, vec![7, 7, 9, 9]);
        assert!(enumerate(&query(&c, 1)).unwrap().is_empty());
    }

    #[test]
    fn budget_is_reported() {
        let c = conductor_counting(&grp(&[2]));
        let mut q = query(&c, 1000);
        q.budget = Some(10);
        assert_eq!(enumerate(&q).unwrap_err(), Error::BudgetExhausted(10));
    }

    #[test]
    fn split_budget_examples() {
        let c = conductor_counting(&grp(&[3]));
        let s = split_budget(&c, 10);
        let tame: Vec<u64> = s.iter().filter(|a| a.prime != 3).map(|a| a.prime).collect();
        assert_eq!(tame, vec![7]);
        assert!(s.iter().any(|a| a.prime == 3 && a.level == 2));
        let c = discriminant_counting(&grp(&[2]));
        let s = split_budget(&c, 5);
        let got: Vec<(u64, u32)> = s.iter().map(|a| (a.prime, a.level)).collect();
        assert_eq!(got, vec![(2, 2), (3, 1)]);
    }

    #[test]
    fn enumerate_matches_fast_count_small() {
        for f in [&[2u64][..], &[3], &[4], &[2, 2], &[8], &[9], &[2, 4], &[6]] {
            let g = grp(f);
            for c in [conductor_counting(&g), radical_counting(&g), discriminant_counting(&g)] {
                for surj in [true, false] {
                    let mut q = query(&c, 3000);
                    q.surjective_only = surj;
                    let a = enumerate_tally(&q, 1).unwrap();
                    let b = fast_count(&c, 3000, 1, surj).unwrap();
                    assert_eq!(a, b, "G = {f:?}, C = {}, surjective = {surj}", c.name);
                }
            }
        }
    }
}
