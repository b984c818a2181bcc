//! Symmetric predicates `D: {0..n} -> {0,1}` and their tail profile.
//!
//! Outside the two tails `[0, r0)` and `(n - r1, n]` a predicate depends only
//! on the parity of its argument, `D(k) = T(k mod 2)`. The profile records
//! `r0`, `r1` and both values of `T`.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;

use crate::bits::{hamming_distance, BitVector};
use crate::error::{Error, Result};
use crate::randomness::CoinSource;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Predicate {
    values: Vec<bool>,
}

impl Predicate {
    /// `values[k] = D(k)` for `k = 0..=n`, so `values` has `n + 1` entries.
    pub fn new(values: Vec<bool>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::usage("a predicate on {0..n} needs n+1 >= 1 values"));
        }
        Ok(Predicate { values })
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> bool) -> Self {
        Predicate {
            values: (0..=n).map(f).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.values.len() - 1
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }

    pub fn eval(&self, k: usize) -> bool {
        self.values[k]
    }

    /// `D(k)` with `k` clamped to `n`.
    pub fn eval_clamped(&self, k: usize) -> bool {
        self.values[k.min(self.n())]
    }

    /// Values as a `0`/`1` string, `D(0)` first.
    pub fn to_bit_string(&self) -> String {
        self.values.iter().map(|&b| if b { '1' } else { '0' }).collect()
    }

    pub fn from_bit_string(s: &str) -> Result<Self> {
        let values = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::usage(format!("invalid predicate value {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Predicate::new(values)
    }

    /// Parses the predicate file format: line 1 is `n`, line 2 is exactly
    /// `n + 1` characters from `{0,1}`. A single trailing newline is allowed.
    pub fn parse_file_contents(text: &str) -> Result<Self> {
        let body = text.strip_suffix('\n').unwrap_or(text);
        let body = body.strip_suffix('\r').unwrap_or(body);
        let lines: Vec<&str> = body.split('\n').collect();
        if lines.len() != 2 {
            let line = if lines.len() < 2 { lines.len() + 1 } else { 3 };
            return Err(Error::parse(line, "expected exactly two lines"));
        }
        let n_line = lines[0].strip_suffix('\r').unwrap_or(lines[0]);
        let n: usize = n_line
            .parse()
            .map_err(|_| Error::parse(1, format!("expected a decimal length, got {n_line:?}")))?;
        let values_line = lines[1];
        if values_line.chars().count() != n + 1 {
            return Err(Error::parse(
                2,
                format!(
                    "expected {} values, got {}",
                    n + 1,
                    values_line.chars().count()
                ),
            ));
        }
        let mut values = Vec::with_capacity(n + 1);
        for (i, c) in values_line.chars().enumerate() {
            match c {
                '0' => values.push(false),
                '1' => values.push(true),
                other => {
                    return Err(Error::parse(
                        2,
                        format!("invalid character {other:?} at column {}", i + 1),
                    ))
                }
            }
        }
        Predicate::new(values)
    }

    pub fn read_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Predicate::parse_file_contents(&text)
    }

    pub fn to_file_contents(&self) -> String {
        format!("{}\n{}\n", self.n(), self.to_bit_string())
    }
}

impl fmt::Debug for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Predicate(n={}, {})", self.n(), self.to_bit_string())
    }
}

/// `{ k : 0 <= k <= n-2, D(k) != D(k+2) }`.
pub fn violations(d: &Predicate) -> BTreeSet<usize> {
    d.values
        .windows(3)
        .enumerate()
        .filter(|(_, w)| w[0] != w[2])
        .map(|(k, _)| k)
        .collect()
}

/// Tail profile of a predicate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Profile {
    pub n: usize,
    pub r0: usize,
    pub r1: usize,
    pub r: usize,
    /// `T(0)`, or `None` when no even integer lies in `[r0, n - r1]`.
    pub t_even: Option<bool>,
    /// `T(1)`, or `None` when no odd integer lies in `[r0, n - r1]`.
    pub t_odd: Option<bool>,
    pub violations: BTreeSet<usize>,
}

impl Profile {
    /// `T(p)`, with an undefined parity class read as `0`.
    pub fn t(&self, parity: bool) -> bool {
        let v = if parity { self.t_odd } else { self.t_even };
        v.unwrap_or(false)
    }
}

/// Computes `(r0, r1, r, T)`.
///
/// Violations `k` with `2k < n` push `r0` up to `k + 1`; the rest push `r1`
/// up to `n - k`. A violation below `n/2` can only be excluded by `r0` and one
/// at or above `n/2` only by `r1`, so each coordinate is minimized separately.
/// For odd `n` a violation at `(n-1)/2` could go either way; it is charged to
/// `r0`, which then equals `(n+1)/2`.
pub fn compute_profile(d: &Predicate) -> Profile {
    let n = d.n();
    let violations = violations(d);
    let mut r0 = 0;
    let mut r1 = 0;
    for &k in &violations {
        if 2 * k < n {
            r0 = r0.max(k + 1);
        } else {
            r1 = r1.max(n - k);
        }
    }
    let hi = n - r1;
    let first_even = if r0 % 2 == 0 { r0 } else { r0 + 1 };
    let first_odd = if r0 % 2 == 1 { r0 } else { r0 + 1 };
    let t_even = (first_even <= hi).then(|| d.eval(first_even));
    let t_odd = (first_odd <= hi).then(|| d.eval(first_odd));
    Profile {
        n,
        r0,
        r1,
        r: r0.max(r1),
        t_even,
        t_odd,
        violations,
    }
}

/// `D̃(k) = D(n - k)`.
pub fn tilde(d: &Predicate) -> Predicate {
    let mut values = d.values.clone();
    values.reverse();
    Predicate { values }
}

/// Ground truth `D(|x ⊕ y|)`.
pub fn oracle(d: &Predicate, x: &BitVector, y: &BitVector) -> Result<bool> {
    if x.len() != d.n() {
        return Err(Error::usage(format!(
            "input length {} does not match predicate n = {}",
            x.len(),
            d.n()
        )));
    }
    Ok(d.eval(hamming_distance(x, y)?))
}

/// Named predicate families used by experiments.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    /// `[k == 0]`
    Eq,
    /// `[k <= d]`
    Ham(usize),
    /// `k mod 2`
    Parity,
    /// Random predicate whose profile is `r0 = r`, `r1 = 0`.
    Random(usize),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::Eq => write!(f, "eq"),
            Family::Ham(d) => write!(f, "ham:{d}"),
            Family::Parity => write!(f, "parity"),
            Family::Random(r) => write!(f, "random:{r}"),
        }
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let lower = s.trim().to_ascii_lowercase();
        let arg = |rest: &str| -> Result<usize> {
            rest.parse()
                .map_err(|_| Error::usage(format!("bad predicate family argument in {s:?}")))
        };
        match lower.as_str() {
            "eq" => Ok(Family::Eq),
            "parity" => Ok(Family::Parity),
            _ => {
                if let Some(rest) = lower.strip_prefix("ham:") {
                    Ok(Family::Ham(arg(rest)?))
                } else if let Some(rest) = lower.strip_prefix("random:") {
                    Ok(Family::Random(arg(rest)?))
                } else {
                    Err(Error::usage(format!("unknown predicate family {s:?}")))
                }
            }
        }
    }
}

/// Instantiates a family at length `n`. Only `Random` reads `coins`.
pub fn family(spec: Family, n: usize, coins: &CoinSource) -> Result<Predicate> {
    match spec {
        Family::Eq => Ok(Predicate::from_fn(n, |k| k == 0)),
        Family::Parity => Ok(Predicate::from_fn(n, |k| k % 2 == 1)),
        Family::Ham(d) => {
            if 2 * (d + 1) > n {
                return Err(Error::usage(format!(
                    "ham:{d} needs d+1 <= n/2 (n = {n})"
                )));
            }
            Ok(Predicate::from_fn(n, |k| k <= d))
        }
        Family::Random(r) => {
            if 2 * r > n {
                return Err(Error::usage(format!("random:{r} needs r <= n/2 (n = {n})")));
            }
            let mut rng = coins.rng();
            let t = [rng.random::<bool>(), rng.random::<bool>()];
            let mut values: Vec<bool> = (0..=n).map(|k| t[k % 2]).collect();
            for v in values.iter_mut().take(r) {
                *v = rng.random();
            }
            if r > 0 {
                values[r - 1] = !values[r + 1];
            }
            Predicate::new(values)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::{complement, sample_pair_with_distance};

    fn eq(n: usize) -> Predicate {
        Predicate::from_fn(n, |k| k == 0)
    }

    fn brute_force_feasible(d: &Predicate, a: usize, b: usize) -> bool {
        let n = d.n();
        2 * a <= n && 2 * b <= n && (a..n - b).filter(|&k| k + 2 <= n).all(|k| d.eval(k) == d.eval(k + 2))
    }

    /// Pareto-minimal feasible pairs with both coordinates at most ceil(n/2).
    fn pareto_minimal(d: &Predicate) -> Vec<(usize, usize)> {
        let n = d.n();
        let cap = n.div_ceil(2);
        let feasible = |a: usize, b: usize| {
            (a..n.saturating_sub(b)).filter(|&k| k + 2 <= n).all(|k| d.eval(k) == d.eval(k + 2))
        };
        let mut out = Vec::new();
        for a in 0..=cap {
            for b in 0..=cap {
                let shrinkable = (a > 0 && feasible(a - 1, b)) || (b > 0 && feasible(a, b - 1));
                if feasible(a, b) && !shrinkable {
                    out.push((a, b));
                }
            }
        }
        out
    }

    proptest::proptest! {
        #[test]
        fn profile_is_feasible_and_locally_minimal(values in proptest::collection::vec(proptest::bool::ANY, 2..60)) {
            let d = Predicate::new(values).unwrap();
            let n = d.n();
            let p = compute_profile(&d);
            let feasible = |a: usize, b: usize| {
                (a..n.saturating_sub(b)).filter(|&k| k + 2 <= n).all(|k| d.eval(k) == d.eval(k + 2))
            };
            proptest::prop_assert!(feasible(p.r0, p.r1));
            proptest::prop_assert!(p.r0 == 0 || !feasible(p.r0 - 1, p.r1));
            proptest::prop_assert!(p.r1 == 0 || !feasible(p.r0, p.r1 - 1));
            proptest::prop_assert_eq!(p.r, p.r0.max(p.r1));
        }
    }

    #[test]
    fn profile_is_pareto_minimal_small_n() {
        for n in 1..=9usize {
            for mask in 0u32..(1 << (n + 1)) {
                let d = Predicate::from_fn(n, |k| mask >> k & 1 == 1);
                let p = compute_profile(&d);
                let front = pareto_minimal(&d);
                assert!(front.contains(&(p.r0, p.r1)), "{d:?} {p:?} {front:?}");
                // ties only arise from a middle violation at odd n; lower r1 wins
                assert_eq!(front.iter().map(|f| f.1).min(), Some(p.r1));
                if n % 2 == 0 {
                    assert_eq!(front.len(), 1);
                    assert!(2 * p.r0 <= n && 2 * p.r1 <= n);
                }
            }
        }
    }

    #[test]
    fn violation_examples() {
        let parity = Predicate::from_fn(8, |k| k % 2 == 1);
        assert!(violations(&parity).is_empty());
        assert_eq!(violations(&eq(8)).into_iter().collect::<Vec<_>>(), vec![0]);
        let ham2 = Predicate::from_fn(8, |k| k <= 2);
        assert_eq!(violations(&ham2).into_iter().collect::<Vec<_>>(), vec![1, 2]);
    }

    #[test]
    fn profile_examples() {
        let p = compute_profile(&eq(8));
        assert_eq!((p.r0, p.r1, p.r), (1, 0, 1));
        assert_eq!((p.t_even, p.t_odd), (Some(false), Some(false)));

        let p = compute_profile(&Predicate::from_fn(8, |k| k % 2 == 1));
        assert_eq!((p.r0, p.r1, p.r), (0, 0, 0));
        assert_eq!((p.t_even, p.t_odd), (Some(false), Some(true)));

        let top = Predicate::from_fn(8, |k| k == 8);
        let p = compute_profile(&top);
        assert_eq!((p.r0, p.r1, p.r), (0, 2, 2));
        assert!(brute_force_feasible(&top, 0, 2));
        assert!(!brute_force_feasible(&top, 0, 1));
    }

    #[test]
    fn undefined_parity_class() {
        // n = 2, D = 1,0,0: violation at k = 0 (< 1), r0 = 1, interval [1, 2]
        let d = Predicate::new(vec![true, false, false]).unwrap();
        let p = compute_profile(&d);
        assert_eq!(p.r0, 1);
        assert_eq!((p.t_even, p.t_odd), (Some(false), Some(false)));
        // odd n, violation at the middle index (n-1)/2: r0 = (n+1)/2
        // n = 3, D = 1,0,0,1 has violations k=0 and k=1, both below 1.5
        let d = Predicate::new(vec![true, false, false, true]).unwrap();
        let p = compute_profile(&d);
        assert_eq!((p.r0, p.r1), (2, 0));
        assert_eq!((p.t_even, p.t_odd), (Some(false), Some(true)));
        // n = 4, D = 1,0,1,1,0: violations {1 (<2), 2 (>=2)} -> r0 = 2, r1 = 2, interval [2,2]
        let d = Predicate::new(vec![true, false, true, true, false]).unwrap();
        let p = compute_profile(&d);
        assert_eq!((p.r0, p.r1), (2, 2));
        assert_eq!((p.t_even, p.t_odd), (Some(true), None));
        assert!(!p.t(true));
    }

    #[test]
    fn tilde_examples() {
        let t = tilde(&eq(8));
        assert_eq!(t, Predicate::from_fn(8, |k| k == 8));
        let root = CoinSource::new(17);
        for i in 0..1000 {
            let mut rng = root.derive(&format!("p/{i}")).rng();
            let d = Predicate::from_fn(16, |_| rng.random());
            assert_eq!(tilde(&tilde(&d)), d);
            // the window [k, k+2] reflects onto [n-2-k, n-k]
            let reflected: BTreeSet<usize> = violations(&d).iter().map(|k| 14 - k).collect();
            assert_eq!(violations(&tilde(&d)), reflected);
        }
    }

    #[test]
    fn oracle_examples() {
        let coins = CoinSource::new(2);
        let (x, _) = sample_pair_with_distance(8, 0, &coins).unwrap();
        assert!(oracle(&eq(8), &x, &x).unwrap());
        let (x, y) = sample_pair_with_distance(8, 5, &coins).unwrap();
        assert!(oracle(&Predicate::from_fn(8, |k| k % 2 == 1), &x, &y).unwrap());
        let (x, y) = sample_pair_with_distance(8, 3, &coins).unwrap();
        assert!(!oracle(&Predicate::from_fn(8, |k| k <= 2), &x, &y).unwrap());
        assert!(oracle(&eq(9), &x, &y).is_err());
    }

    #[test]
    fn reflection_identity() {
        let root = CoinSource::new(23);
        for i in 0..200 {
            let c = root.derive(&format!("r/{i}"));
            let mut rng = c.rng();
            let d = Predicate::from_fn(12, |_| rng.random());
            let w = i % 13;
            let (x, y) = sample_pair_with_distance(12, w, &c.derive("xy")).unwrap();
            assert_eq!(
                oracle(&tilde(&d), &complement(&x), &y).unwrap(),
                oracle(&d, &x, &y).unwrap()
            );
        }
    }

    #[test]
    fn family_examples() {
        let coins = CoinSource::new(0);
        let e = family(Family::Eq, 8, &coins).unwrap();
        assert_eq!(e.to_bit_string(), "100000000");
        let h = family(Family::Ham(2), 8, &coins).unwrap();
        let p = compute_profile(&h);
        assert_eq!((p.r0, p.r1), (3, 0));
        assert!(family(Family::Ham(4), 8, &coins).is_err());
        assert!(family(Family::Random(5), 8, &coins).is_err());
        for seed in 0..300 {
            let d = family(Family::Random(5), 64, &CoinSource::new(seed)).unwrap();
            let p = compute_profile(&d);
            assert_eq!((p.r0, p.r1), (5, 0));
            assert!(brute_force_feasible(&d, 5, 0));
            assert!(!brute_force_feasible(&d, 4, 0));
        }
        for r in 0..=4 {
            let d = family(Family::Random(r), 8, &CoinSource::new(r as u64)).unwrap();
            assert_eq!(compute_profile(&d).r0, r);
        }
        assert_eq!("ham:5".parse::<Family>().unwrap(), Family::Ham(5));
        assert_eq!("RANDOM:16".parse::<Family>().unwrap(), Family::Random(16));
        assert!("ham:x".parse::<Family>().is_err());
        assert_eq!(Family::Random(3).to_string(), "random:3");
    }

    #[test]
    fn file_format() {
        let d = Predicate::parse_file_contents("4\n10010\n").unwrap();
        assert_eq!(d.to_bit_string(), "10010");
        assert_eq!(Predicate::parse_file_contents("4\n10010").unwrap(), d);
        assert_eq!(Predicate::parse_file_contents(&d.to_file_contents()).unwrap(), d);
        let err = |s: &str| match Predicate::parse_file_contents(s) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(err("x\n10010\n"), 1);
        assert_eq!(err("4\n1001\n"), 2);
        assert_eq!(err("4\n10210\n"), 2);
        assert_eq!(err("4\n10010\n\n"), 3);
        assert_eq!(err("4\n10010\nextra\n"), 3);
        assert_eq!(err("4"), 2);
    }
}
