//! Vectors in `F_q^d`, the diagonal quadratic form, spheres and point sets.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::field::{Field, Fq};
use crate::spectral::SpectralCache;

/// Default cap on `q^d`.
pub const DEFAULT_POINT_CAP: u64 = 10_000_000;

/// Environment variable overriding [`DEFAULT_POINT_CAP`].
pub const POINT_CAP_ENV: &str = "FQHARM_MAX_POINTS";

pub fn point_cap() -> u64 {
    std::env::var(POINT_CAP_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(DEFAULT_POINT_CAP)
}

/// Mixed-radix bijection between `[0, q^d)` and coordinate vectors,
/// coordinate 0 least significant.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct VectorIndexer {
    q: usize,
    d: usize,
    len: usize,
}

impl VectorIndexer {
    pub fn new(q: usize, d: usize) -> Result<Self> {
        Self::with_cap(q, d, point_cap())
    }

    pub fn with_cap(q: usize, d: usize, cap: u64) -> Result<Self> {
        if d == 0 {
            return Err(Error::BadDimension("d must be at least 1".into()));
        }
        let len = (q as u128).checked_pow(d as u32).unwrap_or(u128::MAX);
        if len > cap as u128 {
            return Err(Error::TooLarge {
                size: len,
                cap: cap as u128,
            });
        }
        Ok(VectorIndexer {
            q,
            d,
            len: len as usize,
        })
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// `q^d`.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn encode(&self, coords: &[Fq]) -> usize {
        debug_assert_eq!(coords.len(), self.d);
        coords.iter().rev().fold(0, |acc, c| acc * self.q + c.index())
    }

    pub fn decode(&self, mut index: usize) -> Vec<Fq> {
        (0..self.d)
            .map(|_| {
                let c = index % self.q;
                index /= self.q;
                Fq(c as u32)
            })
            .collect()
    }
}

/// `(v . w, ||v||)` for coordinate vectors of equal length.
pub fn bilinear(field: &Field, v: &[Fq], w: &[Fq]) -> Result<(Fq, Fq)> {
    if v.len() != w.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            got: w.len(),
        });
    }
    let dot = |a: &[Fq], b: &[Fq]| {
        a.iter()
            .zip(b)
            .fold(Fq::ZERO, |acc, (&x, &y)| field.add(acc, field.mul(x, y)))
    };
    Ok((dot(v, w), dot(v, v)))
}

/// Partition of `F_q^d` into spheres `S_t = {x : x_1^2 + ... + x_d^2 = t}`.
#[derive(Clone, Debug)]
pub struct SphereTable {
    norm_of: Vec<u32>,
    members: Vec<Vec<usize>>,
}

impl SphereTable {
    /// `||x||` for the vector with index `x`.
    #[inline]
    pub fn norm(&self, x: usize) -> Fq {
        Fq(self.norm_of[x])
    }

    /// Members of `S_t` in increasing index order.
    pub fn members(&self, t: Fq) -> &[usize] {
        &self.members[t.index()]
    }

    pub fn size(&self, t: Fq) -> usize {
        self.members[t.index()].len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(Vec::len).collect()
    }

    pub fn norms(&self) -> &[u32] {
        &self.norm_of
    }
}

/// Builds the sphere table of `F_q^d`.
pub fn build_spheres(field: &Field, indexer: &VectorIndexer) -> SphereTable {
    let q = indexer.q();
    let squares: Vec<Fq> = field.elements().map(|a| field.square(a)).collect();
    let mut norm_of = vec![0u32; indexer.len()];
    // ||(c0, rest)|| = c0^2 + ||rest||, and rest has the smaller index i / q.
    for i in 1..indexer.len() {
        norm_of[i] = field.add(squares[i % q], Fq(norm_of[i / q])).0;
    }
    let mut members = vec![Vec::new(); q];
    for (i, &t) in norm_of.iter().enumerate() {
        members[t as usize].push(i);
    }
    SphereTable { norm_of, members }
}

/// The ambient space `F_q^d` with its field, spheres and transform caches.
#[derive(Debug)]
pub struct Space {
    field: Arc<Field>,
    indexer: VectorIndexer,
    spheres: SphereTable,
    pub(crate) cache: SpectralCache,
}

impl Space {
    pub fn new(field: impl Into<Arc<Field>>, d: usize) -> Result<Self> {
        Self::with_cap(field, d, point_cap())
    }

    pub fn with_cap(field: impl Into<Arc<Field>>, d: usize, cap: u64) -> Result<Self> {
        let field = field.into();
        let indexer = VectorIndexer::with_cap(field.q() as usize, d, cap)?;
        let spheres = build_spheres(&field, &indexer);
        let cache = SpectralCache::new(&field, &indexer);
        Ok(Space {
            field,
            indexer,
            spheres,
            cache,
        })
    }

    pub fn field(&self) -> &Field {
        &self.field
    }

    pub fn field_arc(&self) -> Arc<Field> {
        Arc::clone(&self.field)
    }

    pub fn indexer(&self) -> &VectorIndexer {
        &self.indexer
    }

    pub fn spheres(&self) -> &SphereTable {
        &self.spheres
    }

    pub fn q(&self) -> usize {
        self.indexer.q()
    }

    pub fn d(&self) -> usize {
        self.indexer.d()
    }

    /// `q^d`.
    pub fn size(&self) -> usize {
        self.indexer.len()
    }

    pub fn coords(&self, x: usize) -> Vec<Fq> {
        self.indexer.decode(x)
    }

    pub fn index(&self, coords: &[Fq]) -> usize {
        self.indexer.encode(coords)
    }

    #[inline]
    fn zip_coords(&self, mut x: usize, mut y: usize, op: impl Fn(Fq, Fq) -> Fq) -> usize {
        let q = self.q();
        let (mut out, mut place) = (0, 1);
        for _ in 0..self.d() {
            out += op(Fq((x % q) as u32), Fq((y % q) as u32)).index() * place;
            x /= q;
            y /= q;
            place *= q;
        }
        out
    }

    #[inline]
    pub fn add(&self, x: usize, y: usize) -> usize {
        let f = &self.field;
        self.zip_coords(x, y, |a, b| f.add(a, b))
    }

    #[inline]
    pub fn sub(&self, x: usize, y: usize) -> usize {
        let f = &self.field;
        self.zip_coords(x, y, |a, b| f.sub(a, b))
    }

    #[inline]
    pub fn neg(&self, x: usize) -> usize {
        let f = &self.field;
        self.zip_coords(x, 0, |a, _| f.neg(a))
    }

    pub fn scale(&self, c: Fq, x: usize) -> usize {
        let f = &self.field;
        self.zip_coords(x, 0, |a, _| f.mul(c, a))
    }

    #[inline]
    pub fn dot(&self, mut x: usize, mut y: usize) -> Fq {
        let q = self.q();
        let f = &self.field;
        let mut acc = Fq::ZERO;
        for _ in 0..self.d() {
            acc = f.add(acc, f.mul(Fq((x % q) as u32), Fq((y % q) as u32)));
            x /= q;
            y /= q;
        }
        acc
    }

    #[inline]
    pub fn norm(&self, x: usize) -> Fq {
        self.spheres.norm(x)
    }
}

/// A subset `E` of `F_q^d` as a dense bit array.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSet {
    words: Vec<u64>,
    universe: usize,
    size: usize,
    label: String,
}

impl PointSet {
    pub fn empty(universe: usize, label: impl Into<String>) -> Self {
        PointSet {
            words: vec![0; universe.div_ceil(64)],
            universe,
            size: 0,
            label: label.into(),
        }
    }

    pub fn from_indices(universe: usize, indices: impl IntoIterator<Item = usize>, label: impl Into<String>) -> Self {
        let mut set = Self::empty(universe, label);
        for i in indices {
            set.insert(i);
        }
        set
    }

    /// Inserts `i`; returns whether it was new.
    pub fn insert(&mut self, i: usize) -> bool {
        assert!(i < self.universe, "index {i} outside [0, {})", self.universe);
        let (w, b) = (i / 64, i % 64);
        let fresh = self.words[w] & (1 << b) == 0;
        self.words[w] |= 1 << b;
        self.size += fresh as usize;
        fresh
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i < self.universe && self.words[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn len(&self) -> usize {
        self.size
    }

    pub fn is_empty(&self) -> bool {
        self.size == 0
    }

    pub fn universe(&self) -> usize {
        self.universe
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn popcount(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut bits = w;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let b = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(wi * 64 + b)
            })
        })
    }

    /// 0/1 indicator as a real table of length `q^d`.
    pub fn indicator(&self) -> Vec<f64> {
        (0..self.universe)
            .map(|i| if self.contains(i) { 1.0 } else { 0.0 })
            .collect()
    }
}

/// Point-set generators. The text form is
///
/// ```text
/// explicit:0,4,17
/// random:size=10,seed=42
/// density:delta=0.25,seed=7
/// subfield:p=3,s=2,d=2
/// cap:t=1,j=5
/// affine:basis=1 0 0;0 1 0,shift=0 0 1
/// full
/// ```
///
/// Vector entries in `affine` are field-element indices.
#[derive(Clone, Debug, PartialEq)]
pub enum SetSpec {
    Explicit(Vec<usize>),
    Random { size: usize, seed: u64 },
    Density { delta: f64, seed: u64 },
    Subfield { p: u32, s: u32, d: usize },
    SphereCap { t: u32, j: usize },
    Affine { basis: Vec<Vec<u32>>, shift: Vec<u32> },
    Full,
}

fn join<T: ToString>(v: &[T], sep: &str) -> String {
    v.iter().map(T::to_string).collect::<Vec<_>>().join(sep)
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetSpec::Explicit(v) => write!(f, "explicit:{}", join(v, ",")),
            SetSpec::Random { size, seed } => write!(f, "random:size={size},seed={seed}"),
            SetSpec::Density { delta, seed } => write!(f, "density:delta={delta},seed={seed}"),
            SetSpec::Subfield { p, s, d } => write!(f, "subfield:p={p},s={s},d={d}"),
            SetSpec::SphereCap { t, j } => write!(f, "cap:t={t},j={j}"),
            SetSpec::Affine { basis, shift } => {
                let b: Vec<String> = basis.iter().map(|v| join(v, " ")).collect();
                write!(f, "affine:basis={},shift={}", b.join(";"), join(shift, " "))
            }
            SetSpec::Full => write!(f, "full"),
        }
    }
}

impl FromStr for SetSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = |reason: &str| Error::BadSpec {
            spec: s.to_string(),
            reason: reason.to_string(),
        };
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        let params = || -> Result<Vec<(&str, &str)>> {
            rest.split(',')
                .filter(|kv| !kv.trim().is_empty())
                .map(|kv| {
                    kv.split_once('=')
                        .map(|(k, v)| (k.trim(), v.trim()))
                        .ok_or_else(|| bad("expected key=value"))
                })
                .collect()
        };
        let get = |ps: &[(&str, &str)], key: &str| -> Result<String> {
            ps.iter()
                .find(|(k, _)| *k == key)
                .map(|(_, v)| v.to_string())
                .ok_or_else(|| bad(&format!("missing `{key}`")))
        };
        fn num<T: FromStr>(v: String, bad: impl Fn(&str) -> Error) -> Result<T> {
            v.parse().map_err(|_| bad(&format!("cannot parse `{v}`")))
        }
        let vector = |v: &str| -> Result<Vec<u32>> {
            v.split_whitespace()
                .map(|x| x.parse().map_err(|_| bad(&format!("cannot parse `{x}`"))))
                .collect()
        };

        match kind.trim() {
            "explicit" => rest
                .split(',')
                .filter(|x| !x.trim().is_empty())
                .map(|x| x.trim().parse().map_err(|_| bad(&format!("cannot parse `{x}`"))))
                .collect::<Result<Vec<usize>>>()
                .map(SetSpec::Explicit),
            "random" => {
                let ps = params()?;
                Ok(SetSpec::Random {
                    size: num(get(&ps, "size")?, bad)?,
                    seed: num(get(&ps, "seed")?, bad)?,
                })
            }
            "density" => {
                let ps = params()?;
                let delta: f64 = num(get(&ps, "delta")?, bad)?;
                if !(0.0..=1.0).contains(&delta) {
                    return Err(bad("delta must lie in [0, 1]"));
                }
                Ok(SetSpec::Density {
                    delta,
                    seed: num(get(&ps, "seed")?, bad)?,
                })
            }
            "subfield" => {
                let ps = params()?;
                Ok(SetSpec::Subfield {
                    p: num(get(&ps, "p")?, bad)?,
                    s: num(get(&ps, "s")?, bad)?,
                    d: num(get(&ps, "d")?, bad)?,
                })
            }
            "cap" => {
                let ps = params()?;
                Ok(SetSpec::SphereCap {
                    t: num(get(&ps, "t")?, bad)?,
                    j: num(get(&ps, "j")?, bad)?,
                })
            }
            "affine" => {
                let ps = params()?;
                let basis = get(&ps, "basis")?
                    .split(';')
                    .filter(|v| !v.trim().is_empty())
                    .map(vector)
                    .collect::<Result<Vec<_>>>()?;
                Ok(SetSpec::Affine {
                    basis,
                    shift: vector(&get(&ps, "shift")?)?,
                })
            }
            "full" if rest.is_empty() => Ok(SetSpec::Full),
            _ => Err(bad("unknown generator")),
        }
    }
}

/// Materializes a generator spec; the label is the spec's text form.
pub fn build_set(space: &Space, spec: &SetSpec) -> Result<PointSet> {
    build_set_labeled(space, spec, spec.to_string())
}

/// Parses and builds `text`, keeping `text` verbatim as the label.
pub fn build_set_str(space: &Space, text: &str) -> Result<PointSet> {
    let spec: SetSpec = text.parse()?;
    build_set_labeled(space, &spec, text.trim().to_string())
}

fn build_set_labeled(space: &Space, spec: &SetSpec, label: String) -> Result<PointSet> {
    let n = space.size();
    let q = space.q();
    let bad = |reason: String| Error::BadSpec {
        spec: spec.to_string(),
        reason,
    };
    let set = match spec {
        SetSpec::Explicit(v) => {
            if let Some(&i) = v.iter().find(|&&i| i >= n) {
                return Err(bad(format!("index {i} outside [0, {n})")));
            }
            PointSet::from_indices(n, v.iter().copied(), label)
        }
        SetSpec::Random { size, seed } => {
            if *size > n {
                return Err(bad(format!("size {size} exceeds q^d = {n}")));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut picks = sample(&mut rng, n, *size).into_vec();
            picks.sort_unstable();
            PointSet::from_indices(n, picks, label)
        }
        SetSpec::Density { delta, seed } => {
            if !(0.0..=1.0).contains(delta) {
                return Err(bad("delta must lie in [0, 1]".into()));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let picks: Vec<usize> = (0..n).filter(|_| rng.random::<f64>() < *delta).collect();
            PointSet::from_indices(n, picks, label)
        }
        SetSpec::Subfield { p, s, d } => {
            let f = space.field();
            if *p != f.p() || *s != f.n() || *d != space.d() {
                return Err(bad(format!(
                    "space is F_{}^{} with q = {}^{}",
                    f.q(),
                    space.d(),
                    f.p(),
                    f.n()
                )));
            }
            // Constant polynomials c < p form the prime subfield.
            let prime = *p as usize;
            let picks = (0..n).filter(|&x| {
                let mut y = x;
                (0..space.d()).all(|_| {
                    let ok = y % q < prime;
                    y /= q;
                    ok
                })
            });
            PointSet::from_indices(n, picks, label)
        }
        SetSpec::SphereCap { t, j } => {
            if *t as usize >= q {
                return Err(bad(format!("radius {t} outside F_{q}")));
            }
            let members = space.spheres().members(Fq(*t));
            if *j > members.len() {
                return Err(bad(format!("j = {j} exceeds |S_{t}| = {}", members.len())));
            }
            PointSet::from_indices(n, members[..*j].iter().copied(), label)
        }
        SetSpec::Affine { basis, shift } => {
            let d = space.d();
            let check = |v: &Vec<u32>| -> Result<usize> {
                if v.len() != d {
                    return Err(bad(format!("vector of length {} in dimension {d}", v.len())));
                }
                if let Some(c) = v.iter().find(|&&c| c as usize >= q) {
                    return Err(bad(format!("entry {c} outside F_{q}")));
                }
                Ok(space.index(&v.iter().map(|&c| Fq(c)).collect::<Vec<_>>()))
            };
            let base = check(shift)?;
            let dirs = basis.iter().map(check).collect::<Result<Vec<_>>>()?;
            if dirs.len() > d {
                return Err(bad(format!("{} basis vectors in dimension {d}", dirs.len())));
            }
            let mut set = PointSet::empty(n, label);
            let combos = q.pow(dirs.len() as u32);
            for code in 0..combos {
                let mut c = code;
                let mut x = base;
                for &dir in &dirs {
                    x = space.add(x, space.scale(Fq((c % q) as u32), dir));
                    c /= q;
                }
                set.insert(x);
            }
            set
        }
        SetSpec::Full => PointSet::from_indices(n, 0..n, label),
    };
    Ok(set)
}

/// A mixed test corpus for one space: random sets at four densities per
/// seed, sets sized at the `q^{d/2}` thresholds, the subfield set, sphere
/// caps, affine subspaces, singletons and the full space.
pub fn default_corpus(space: &Space, seeds: &[u64]) -> Vec<SetSpec> {
    let (q, d, p) = (space.q(), space.d(), space.field().p());
    let n = space.size();
    let mut out = Vec::new();
    for &seed in seeds {
        for delta in [0.02, 0.1, 0.3, 0.6] {
            out.push(SetSpec::Density { delta, seed });
        }
    }
    let half = (q as f64).powf(d as f64 / 2.0).ceil() as usize;
    let seed0 = seeds.first().copied().unwrap_or(0);
    out.push(SetSpec::Random {
        size: half.min(n),
        seed: seed0,
    });
    out.push(SetSpec::Random {
        size: (3 * half).min(n),
        seed: seed0,
    });
    out.push(SetSpec::Subfield {
        p,
        s: space.field().n(),
        d,
    });
    let s1 = space.spheres().size(Fq::ONE);
    out.push(SetSpec::SphereCap {
        t: 1,
        j: s1.div_ceil(2),
    });
    out.push(SetSpec::SphereCap {
        t: 0,
        j: space.spheres().size(Fq::ZERO),
    });
    let unit = |i: usize| -> Vec<u32> { (0..d).map(|c| (c == i) as u32).collect() };
    out.push(SetSpec::Affine {
        basis: (0..d / 2).map(unit).collect(),
        shift: vec![0; d],
    });
    out.push(SetSpec::Affine {
        basis: vec![vec![1; d]],
        shift: unit(0),
    });
    out.push(SetSpec::Explicit(vec![0]));
    out.push(SetSpec::Explicit(vec![n - 1]));
    out.push(SetSpec::Full);
    out
}
