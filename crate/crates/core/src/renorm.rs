//! Shrinking sequences of directions under `rho_lambda`, their sign sequences
//! and critical times, renormalizability of rays, and the `Omega_n` test.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{omega, QMat2, QVec2, QuadNum, SignPair};
use crate::freegrp::{check_lambda, GeodesicRay, Letter, Word};

/// `theta` lies in `Shrink_lambda(w)`: `|rho^w theta| < |theta|`.
pub fn shrink_membership(lambda: &QuadNum, w: Letter, theta: &QVec2) -> Result<bool> {
    if theta.is_zero() {
        return Err(Error::InvalidParameter("zero direction".into()));
    }
    check_lambda(lambda)?;
    let img = w.matrix(lambda).try_apply(theta)?;
    let by_norm = img.norm_sq().try_cmp(&theta.norm_sq())?.is_lt();
    debug_assert_eq!(by_norm, shrink_by_slope(lambda, w, theta));
    Ok(by_norm)
}

/// Slope description of the four shrinking sets.
pub fn shrink_by_slope(lambda: &QuadNum, w: Letter, theta: &QVec2) -> bool {
    if theta.x.is_zero() {
        return false;
    }
    let s = &theta.y / &theta.x;
    let two = QuadNum::int(2);
    match w {
        Letter::H => s.is_negative() && s > -(&two / lambda),
        Letter::Hi => s.is_positive() && s < &two / lambda,
        Letter::V => s < -(lambda / &two),
        Letter::Vi => s > lambda / &two,
    }
}

fn strict_shrinker(lambda: &QuadNum, theta: &QVec2) -> Result<Option<Letter>> {
    let mut found = None;
    for w in Letter::ALL {
        if shrink_membership(lambda, w, theta)? {
            assert!(found.is_none(), "two strict shrinkers for {theta}");
            found = Some(w);
        }
    }
    Ok(found)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ShrinkStatus {
    /// The greedy prefix reached the requested length.
    Continues,
    /// No generator strictly shrinks the current image.
    NoStrictShrinker,
    /// The sequence is exactly periodic with an excluded period (condition 1 or 2).
    ExcludedTail(u8),
}

/// Exact periodicity of the projective images: `images[start + len] ∝ images[start]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Period {
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct ShrinkData {
    pub lambda: QuadNum,
    pub theta: QVec2,
    pub ray: Vec<Letter>,
    /// `rho^{g_n} theta` for `n = 0..=len`.
    pub images: Vec<QVec2>,
    pub norms: Vec<QuadNum>,
    pub status: ShrinkStatus,
    pub period: Option<Period>,
}

impl ShrinkData {
    pub fn len(&self) -> usize {
        self.ray.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ray.is_empty()
    }

    pub fn geodesic(&self) -> GeodesicRay {
        GeodesicRay::new(self.ray.clone()).expect("greedy shrinking is geodesic")
    }

    pub fn g(&self, n: usize) -> Word {
        self.geodesic().g(n)
    }

    /// Quadrants of the images; `None` on an axis.
    pub fn quadrants(&self) -> Vec<Option<SignPair>> {
        self.images.iter().map(QVec2::quadrant).collect()
    }

    /// First stage whose image lies on a coordinate axis.
    pub fn axis_stage(&self) -> Option<usize> {
        self.images.iter().position(|v| v.quadrant().is_none())
    }
}

/// Greedy shrinking sequence of `theta` of length at most `n`.
pub fn shrinking_sequence(lambda: &QuadNum, theta: &QVec2, n: usize) -> Result<ShrinkData> {
    if theta.is_zero() {
        return Err(Error::InvalidParameter("zero direction".into()));
    }
    check_lambda(lambda)?;
    theta.field()?;
    let mut images = vec![theta.clone()];
    let mut norms = vec![theta.norm_sq()];
    let mut ray = Vec::new();
    let mut seen: HashMap<Option<QuadNum>, usize> = HashMap::new();
    seen.insert(slope_key(theta), 0);
    let mut period = None;
    let mut status = ShrinkStatus::Continues;
    while ray.len() < n {
        let cur = images.last().unwrap();
        let Some(w) = strict_shrinker(lambda, cur)? else {
            status = ShrinkStatus::NoStrictShrinker;
            break;
        };
        let next = w.matrix(lambda).try_apply(cur)?;
        let nn = next.norm_sq();
        debug_assert!(nn < *norms.last().unwrap());
        ray.push(w);
        norms.push(nn);
        if period.is_none() {
            let key = slope_key(&next);
            if let Some(&start) = seen.get(&key) {
                period = Some(Period {
                    start,
                    len: ray.len() - start,
                });
            } else {
                seen.insert(key, ray.len());
            }
        }
        images.push(next);
    }
    if let Some(p) = period {
        if let Renormalizing::No(c) = classify_period(&ray[p.start..p.start + p.len]) {
            status = ShrinkStatus::ExcludedTail(c);
        }
    }
    Ok(ShrinkData {
        lambda: lambda.clone(),
        theta: theta.clone(),
        ray,
        images,
        norms,
        status,
        period,
    })
}

fn slope_key(v: &QVec2) -> Option<QuadNum> {
    if v.x.is_zero() {
        None
    } else {
        Some(&v.y / &v.x)
    }
}

/// Quadrants met by `rho^w(Q_s)`.
fn image_quadrants(w: Letter, s: SignPair) -> Vec<SignPair> {
    let (sx, sy) = (s.sx(), s.sy());
    let both = |fixed_y: bool, keep: i8, other: i8| -> Vec<SignPair> {
        [keep, -keep]
            .into_iter()
            .map(|c| {
                if fixed_y {
                    SignPair::from_signs(c, other).unwrap()
                } else {
                    SignPair::from_signs(other, c).unwrap()
                }
            })
            .collect()
    };
    match w {
        // x' = x + lambda y
        Letter::H if sx == sy => vec![s],
        Letter::H => both(true, sx, sy),
        // x' = x - lambda y
        Letter::Hi if sx != sy => vec![s],
        Letter::Hi => both(true, sx, sy),
        // y' = y + lambda x
        Letter::V if sx == sy => vec![s],
        Letter::V => both(false, sy, sx),
        Letter::Vi if sx != sy => vec![s],
        Letter::Vi => both(false, sy, sx),
    }
}

/// Next sign from the current sign, the increment taken and the increment after it.
pub fn sign_transition(s: SignPair, step: Letter, next_step: Letter) -> Option<SignPair> {
    let allowed: &[SignPair] = if next_step.is_positive() {
        &[SignPair::PM, SignPair::MP]
    } else {
        &[SignPair::PP, SignPair::MM]
    };
    let cands: Vec<SignPair> = image_quadrants(step, s)
        .into_iter()
        .filter(|c| allowed.contains(c))
        .collect();
    match cands.as_slice() {
        [one] => Some(*one),
        _ => None,
    }
}

/// Sign sequence `s_0, ..., s_len`; the transition rule is checked against the
/// quadrants of the actual images at every stage where it applies.
pub fn sign_sequence(data: &ShrinkData) -> Result<Vec<SignPair>> {
    let quads = data.quadrants();
    if let Some(k) = data.axis_stage() {
        return Err(Error::NotRenormalizable(format!(
            "stage {k} lies on a coordinate axis"
        )));
    }
    let signs: Vec<SignPair> = quads.into_iter().map(Option::unwrap).collect();
    for i in 0..data.ray.len().saturating_sub(1) {
        let predicted = sign_transition(signs[i], data.ray[i], data.ray[i + 1]);
        assert_eq!(
            predicted,
            Some(signs[i + 1]),
            "sign transition disagrees with quadrant at stage {}",
            i + 1
        );
    }
    Ok(signs)
}

const CRITICAL_PAIRS: [(Letter, Letter); 8] = [
    (Letter::H, Letter::H),
    (Letter::H, Letter::V),
    (Letter::V, Letter::H),
    (Letter::V, Letter::V),
    (Letter::Hi, Letter::Hi),
    (Letter::Hi, Letter::Vi),
    (Letter::Vi, Letter::Hi),
    (Letter::Vi, Letter::Vi),
];

/// `n` with `g_{n+1} g_{n-1}^-1 = x_{n+1} x_n` among the eight critical products.
pub fn critical_by_increments(ray: &[Letter]) -> Vec<usize> {
    (1..ray.len())
        .filter(|&n| CRITICAL_PAIRS.contains(&(ray[n], ray[n - 1])))
        .collect()
}

/// `{n >= 1 : s_{n-1} = s_n}`, cross-checked against the increment criterion.
pub fn critical_times(data: &ShrinkData) -> Result<Vec<usize>> {
    let signs = sign_sequence(data)?;
    let by_sign: Vec<usize> = (1..signs.len())
        .filter(|&n| signs[n - 1] == signs[n])
        .collect();
    let by_word = critical_by_increments(&data.ray);
    let checkable: Vec<usize> = by_sign
        .iter()
        .copied()
        .filter(|&n| n < data.ray.len())
        .collect();
    assert_eq!(checkable, by_word, "critical-time characterizations disagree");
    Ok(by_sign)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Renormalizing {
    Yes,
    /// Tail equivalent to an excluded family: 1 = a power of one generator,
    /// 2 = alternating `h, v^-1` or `h^-1, v`.
    No(u8),
    Undetermined,
}

/// A ray given as a finite prefix of increments followed by an optional repeating block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RaySpec {
    pub prefix: Vec<Letter>,
    pub period: Option<Vec<Letter>>,
}

impl RaySpec {
    pub fn periodic(prefix: Vec<Letter>, period: Vec<Letter>) -> Self {
        RaySpec {
            prefix,
            period: Some(period),
        }
    }

    pub fn finite(prefix: Vec<Letter>) -> Self {
        RaySpec {
            prefix,
            period: None,
        }
    }

    /// Unrolls the ray to `n` increments.
    pub fn unroll(&self, n: usize) -> Vec<Letter> {
        let mut out: Vec<Letter> = self.prefix.iter().copied().take(n).collect();
        if let Some(p) = &self.period {
            if !p.is_empty() {
                out.extend(p.iter().cycle().take(n.saturating_sub(out.len())));
            }
        }
        out
    }

    fn check_geodesic(&self) -> Result<()> {
        let span = self.prefix.len() + 2 * self.period.as_ref().map_or(0, Vec::len);
        GeodesicRay::new(self.unroll(span)).map(|_| ())
    }
}

impl std::str::FromStr for RaySpec {
    type Err = Error;
    /// `"h^-1 (v h)"`: letters before the parentheses form the prefix, the
    /// parenthesized block repeats forever.
    fn from_str(s: &str) -> Result<Self> {
        let letters = |t: &str| -> Result<Vec<Letter>> {
            let mut out = Vec::new();
            let cs: Vec<char> = t.chars().collect();
            let mut i = 0;
            while i < cs.len() {
                let base = match cs[i] {
                    c if c.is_whitespace() || c == ',' => {
                        i += 1;
                        continue;
                    }
                    'h' => Letter::H,
                    'v' => Letter::V,
                    'H' => Letter::Hi,
                    'V' => Letter::Vi,
                    c => return Err(Error::Parse(format!("ray {s:?}: unexpected {c:?}"))),
                };
                i += 1;
                let rest: String = cs[i..].iter().collect();
                if rest.starts_with("^-1") {
                    out.push(base.inv());
                    i += 3;
                } else if rest.starts_with("⁻¹") {
                    out.push(base.inv());
                    i += 2;
                } else {
                    out.push(base);
                }
            }
            Ok(out)
        };
        match s.find('(') {
            None => Ok(RaySpec::finite(letters(s)?)),
            Some(i) => {
                let close = s
                    .rfind(')')
                    .filter(|&j| j > i)
                    .ok_or_else(|| Error::Parse(format!("ray {s:?}: unbalanced parentheses")))?;
                if !s[close + 1..].trim().is_empty() {
                    return Err(Error::Parse(format!("ray {s:?}: text after period")));
                }
                let period = letters(&s[i + 1..close])?;
                if period.is_empty() {
                    return Err(Error::Parse(format!("ray {s:?}: empty period")));
                }
                Ok(RaySpec::periodic(letters(&s[..i])?, period))
            }
        }
    }
}

fn classify_period(p: &[Letter]) -> Renormalizing {
    if p.iter().all(|&l| l == p[0]) {
        return Renormalizing::No(1);
    }
    let alternates = |a: Letter, b: Letter| {
        p.len() % 2 == 0
            && (0..p.len()).all(|i| {
                let (x, y) = (p[i], p[(i + 1) % p.len()]);
                (x == a && y == b) || (x == b && y == a)
            })
    };
    if alternates(Letter::H, Letter::Vi) || alternates(Letter::Hi, Letter::V) {
        return Renormalizing::No(2);
    }
    Renormalizing::Yes
}

pub fn is_renormalizing(spec: &RaySpec) -> Result<Renormalizing> {
    spec.check_geodesic()?;
    Ok(match &spec.period {
        Some(p) if !p.is_empty() => classify_period(p),
        _ => Renormalizing::Undetermined,
    })
}

/// Projective arc of directions `{a*lo + b*hi : a, b > 0}` up to sign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Arc {
    pub lo: QVec2,
    pub hi: QVec2,
}

impl Arc {
    pub fn contains(&self, v: &QVec2) -> bool {
        let inside = |u: &QVec2| self.lo.wedge(u).is_positive() && u.wedge(&self.hi).is_positive();
        inside(v) || inside(&v.neg())
    }

    /// Angular width in radians.
    pub fn width(&self) -> f64 {
        let (a, b) = (self.lo.to_f64(), self.hi.to_f64());
        let cross = a.0 * b.1 - a.1 * b.0;
        let dot = a.0 * b.0 + a.1 * b.1;
        cross.atan2(dot)
    }
}

/// The closed shrinking arc of a generator.
pub fn shrink_arc(lambda: &QuadNum, w: Letter) -> Arc {
    let l = lambda.clone();
    let v = |x: QuadNum, y: QuadNum| QVec2::new(x, y);
    let i = QuadNum::int;
    match w {
        Letter::H => Arc {
            lo: v(l, i(-2)),
            hi: v(i(1), i(0)),
        },
        Letter::Hi => Arc {
            lo: v(i(1), i(0)),
            hi: v(l, i(2)),
        },
        Letter::V => Arc {
            lo: v(i(0), i(1)),
            hi: v(i(-2), l),
        },
        Letter::Vi => Arc {
            lo: v(i(2), l),
            hi: v(i(0), i(1)),
        },
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Direction {
    Exact(QVec2),
    Interval(Arc),
}

fn word_matrix(lambda: &QuadNum, letters: &[Letter]) -> Result<QMat2> {
    // g = x_k ... x_1, so rho(g) = rho(x_k) ... rho(x_1)
    let mut m = QMat2::identity();
    for l in letters {
        m = l.matrix(lambda).try_mul(&m)?;
    }
    Ok(m)
}

fn positive_rep(v: QVec2) -> QVec2 {
    if v.x.is_negative() || (v.x.is_zero() && v.y.is_negative()) {
        v.neg()
    } else {
        v
    }
}

/// The direction whose shrinking sequence is `spec`: exact for periodic
/// specs, an arc bracketing it for finite prefixes.
pub fn direction_from_sequence(lambda: &QuadNum, spec: &RaySpec) -> Result<Direction> {
    check_lambda(lambda)?;
    match is_renormalizing(spec)? {
        Renormalizing::No(c) => {
            return Err(Error::NotRenormalizable(format!(
                "sequence excluded by condition ({c})"
            )))
        }
        Renormalizing::Yes | Renormalizing::Undetermined => {}
    }
    let pre = word_matrix(lambda, &spec.prefix)?;
    let pre_inv = pre.inverse()?;
    match &spec.period {
        Some(p) if !p.is_empty() => {
            let m = word_matrix(lambda, p)?;
            let not_quadratic = |_| {
                Error::NotRenormalizable(format!(
                    "the direction of {spec:?} at lambda {lambda} is not quadratic over one field"
                ))
            };
            let v = contracting_eigenvector(&m)?;
            let theta = pre_inv.try_apply(&v).map_err(not_quadratic)?;
            Ok(Direction::Exact(positive_rep(theta)))
        }
        _ => {
            let Some((&last, head)) = spec.prefix.split_last() else {
                return Err(Error::InvalidParameter("empty sequence".into()));
            };
            let back = word_matrix(lambda, head)?.inverse()?;
            let arc = shrink_arc(lambda, last);
            Ok(Direction::Interval(Arc {
                lo: back.try_apply(&arc.lo)?,
                hi: back.try_apply(&arc.hi)?,
            }))
        }
    }
}

/// Eigenvector of a hyperbolic determinant-one matrix for the eigenvalue of modulus < 1.
pub fn contracting_eigenvector(m: &QMat2) -> Result<QVec2> {
    let t = m.trace();
    let disc = t.try_mul(&t)?.try_sub(&QuadNum::int(4))?;
    if !disc.is_positive() {
        return Err(Error::NotRenormalizable(format!(
            "period matrix {m} is not hyperbolic"
        )));
    }
    let root = disc.sqrt().map_err(|_| {
        Error::NotRenormalizable(format!(
            "eigen-direction of {m} is not quadratic over the parameter field"
        ))
    })?;
    let two = QuadNum::int(2);
    let eigvec = || -> std::result::Result<QVec2, crate::exact::ExactError> {
        let mu = if t.is_positive() {
            t.try_sub(&root)?.try_div(&two)?
        } else {
            t.try_add(&root)?.try_div(&two)?
        };
        let [[a, b], [c, d]] = &m.m;
        Ok(if !b.is_zero() {
            QVec2::new(b.clone(), mu.try_sub(a)?)
        } else {
            QVec2::new(mu.try_sub(d)?, c.clone())
        })
    };
    eigvec().map_err(|_| {
        Error::NotRenormalizable(format!(
            "eigen-direction of {m} needs a field of degree above two"
        ))
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum OmegaReason {
    NoStrictShrinker { step: usize },
    AxisHit { step: usize },
    ComplementaryEndpoint { period: Vec<Letter> },
}

#[derive(Debug, Clone, Serialize)]
pub enum OmegaResult {
    InOmega(ShrinkData),
    NotInOmega(OmegaReason),
    Undetermined(ShrinkData),
}

/// Direction `(alpha - 1/n, 1/n)` attached to a skew rotation by `alpha`.
pub fn omega_direction(n: u32, alpha: &QuadNum) -> QVec2 {
    let inv = QuadNum::frac(1, n as i64);
    QVec2::new(alpha - &inv, inv)
}

pub fn omega_test(n: u32, alpha: &QuadNum, steps: usize) -> Result<OmegaResult> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!("n must be at least 2, got {n}")));
    }
    let theta = omega_direction(n, alpha);
    let data = shrinking_sequence(&QuadNum::int(n as i64), &theta, steps)?;
    if let Some(step) = data.axis_stage() {
        return Ok(OmegaResult::NotInOmega(OmegaReason::AxisHit { step }));
    }
    match data.status {
        ShrinkStatus::NoStrictShrinker => {
            return Ok(OmegaResult::NotInOmega(OmegaReason::NoStrictShrinker {
                step: data.len(),
            }))
        }
        ShrinkStatus::ExcludedTail(_) => {
            let p = data.period.unwrap();
            return Ok(OmegaResult::NotInOmega(OmegaReason::ComplementaryEndpoint {
                period: data.ray[p.start..p.start + p.len].to_vec(),
            }));
        }
        ShrinkStatus::Continues => {}
    }
    Ok(if data.period.is_some() {
        OmegaResult::InOmega(data)
    } else {
        OmegaResult::Undetermined(data)
    })
}

/// Directions `rho^g [(2, lambda -+ sqrt(lambda^2 - 4))]` over reduced words
/// with `|g| <= depth`: endpoints of the intervals complementary to the limit
/// set when `lambda > 2`. At `lambda = 2` the limit set is the whole circle and
/// the removed orbit of `[(1, 1)]` is returned instead. Projective duplicates
/// are dropped; representatives have `x > 0` or are `(0, 1)`.
pub fn complementary_endpoints(lambda: &QuadNum, depth: usize) -> Result<Vec<QVec2>> {
    check_lambda(lambda)?;
    let two = QuadNum::int(2);
    let seeds = if *lambda == two {
        vec![QVec2::ints(1, 1)]
    } else {
        let root = lambda.try_mul(lambda)?.try_sub(&QuadNum::int(4))?.sqrt().map_err(|_| {
            Error::InvalidParameter(format!("sqrt(lambda^2 - 4) for lambda = {lambda} is not quadratic"))
        })?;
        vec![
            QVec2::new(two.clone(), lambda.try_sub(&root)?),
            QVec2::new(two, lambda.try_add(&root)?),
        ]
    };
    let mut seen: HashMap<Option<QuadNum>, ()> = HashMap::new();
    let mut out = Vec::new();
    let mut layer: Vec<(Option<Letter>, QVec2)> = Vec::new();
    for v in seeds {
        layer.push((None, v));
    }
    for level in 0..=depth {
        let mut next = Vec::new();
        for (last, v) in &layer {
            if seen.insert(slope_key(v), ()).is_none() {
                out.push(positive_rep(v.clone()));
            }
            if level == depth {
                continue;
            }
            for l in Letter::ALL {
                if Some(l.inv()) == *last {
                    continue;
                }
                next.push((Some(l), l.matrix(lambda).try_apply(v)?));
            }
        }
        layer = next;
    }
    Ok(out)
}

/// Words alternating within `{h, v^-1}` or within `{h^-1, v}` (and `e`).
pub fn is_troublesome(w: &Word) -> bool {
    let ls = w.letters();
    let within = |a: Letter, b: Letter| {
        ls.iter().all(|&l| l == a || l == b) && ls.windows(2).all(|p| p[0] != p[1])
    };
    within(Letter::H, Letter::Vi) || within(Letter::Hi, Letter::V)
}

/// `gamma_n`: the shrinking sequence sampled at the last index of each syllable.
pub fn syllable_ends(ray: &[Letter]) -> Vec<usize> {
    let mut out = vec![0];
    for j in 1..ray.len() {
        if ray[j - 1] != ray[j] {
            out.push(j);
        }
    }
    out
}

/// Decay products along the subsequence `n_j` of syllable ends that leave the
/// troublesome set. For `lambda > 2` the j-th entry is
/// `omega^{n_j} |rho^{gamma_{n_j}} theta| / |theta|`; for `lambda = 2` the
/// product of `eta(n_i - n_{i-1})` replaces the power of `omega`.
pub fn decay_products(data: &ShrinkData) -> Result<Vec<f64>> {
    let ends = syllable_ends(&data.ray);
    let ray = data.geodesic();
    let gammas: Vec<Word> = ends.iter().map(|&i| ray.g(i)).collect();
    let mut picks = vec![0usize];
    for n in 1..gammas.len() {
        let prev = &gammas[*picks.last().unwrap()];
        if !is_troublesome(&gammas[n].mul(&prev.inv())) {
            picks.push(n);
        }
    }
    let two = QuadNum::int(2);
    let base_norm = data.norms[0].to_f64().sqrt();
    let rate = if data.lambda == two {
        None
    } else {
        Some(omega(&data.lambda)?.to_f64())
    };
    let eta = |k: usize| if k == 1 { 1.5 } else { k as f64 };
    let mut out = Vec::new();
    let mut eta_prod = 1.0;
    for j in 1..picks.len() {
        let n = picks[j];
        let norm = data.norms[ends[n]].to_f64().sqrt() / base_norm;
        let factor = match rate {
            Some(w) => w.powi(n as i32),
            None => {
                eta_prod *= eta(n - picks[j - 1]);
                eta_prod
            }
        };
        out.push(factor * norm);
    }
    Ok(out)
}
