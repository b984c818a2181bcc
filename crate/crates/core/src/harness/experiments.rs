use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::bits::sample_pair_with_distance;
use crate::error::{Error, Result};
use crate::hamming::{hd_decide, hd_encode, HdParams, Strategy};
use crate::predicate::{family, Family, Predicate};
use crate::protocol::{PkInstance, SmpProtocol};
use crate::randomness::{c_of_k, partition_failure_bound, sample_partition, CoinSource};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LemmaRow {
    pub k: usize,
    pub c: usize,
    pub weight: usize,
    pub samples: usize,
    pub failures: usize,
    pub rate: f64,
    pub bound: f64,
}

/// Fraction of random `k`-partitions of a weight-`k` string that put `c(k)`
/// or more ones into a single block, next to the union bound `(e/c)^c · k`.
pub fn lemma_partition_experiment(k: usize, samples: usize, seed: u64) -> Result<LemmaRow> {
    lemma_partition_with_weight(k, k, samples, seed)
}

/// As [`lemma_partition_experiment`] with a string of the given weight. Only
/// the support of the string matters, so the string is `1^weight`.
pub fn lemma_partition_with_weight(k: usize, weight: usize, samples: usize, seed: u64) -> Result<LemmaRow> {
    if k < 4 {
        return Err(Error::usage(format!("k = {k}: the partition experiment needs k >= 4")));
    }
    if samples < 1000 {
        return Err(Error::usage(format!("{samples} samples: need at least 1000")));
    }
    let c = c_of_k(k);
    let root = CoinSource::new(seed).derive("lemma");
    let failures = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<bool> {
            let p = sample_partition(weight, k, &root.derive(&format!("{s}")))?;
            Ok(p.block_sizes().into_iter().any(|ones| ones >= c))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|&f| f)
        .count();
    Ok(LemmaRow {
        k,
        c,
        weight,
        samples,
        failures,
        rate: failures as f64 / samples as f64,
        bound: partition_failure_bound(k),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HdErrorRow {
    pub d: usize,
    pub epsilon: f64,
    pub strategy: String,
    pub n: usize,
    pub weight: usize,
    pub samples: usize,
    pub errors: usize,
    pub rate: f64,
}

/// Default input length for [`hd_error_experiment`].
pub const HD_ERROR_N: usize = 256;

/// Verdict error of `HD(d, ε)` against the exact answer at weights `d` and `d + 1`.
pub fn hd_error_experiment(
    d: usize,
    epsilon: f64,
    strategy: Strategy,
    samples: usize,
    seed: u64,
) -> Result<Vec<HdErrorRow>> {
    let n = HD_ERROR_N.max(d + 1);
    [d, d + 1]
        .into_iter()
        .map(|w| hd_error_at(d, epsilon, strategy, n, w, samples, seed))
        .collect()
}

/// Verdict error of `HD(d, ε)` on `samples` random pairs at distance `weight`.
pub fn hd_error_at(
    d: usize,
    epsilon: f64,
    strategy: Strategy,
    n: usize,
    weight: usize,
    samples: usize,
    seed: u64,
) -> Result<HdErrorRow> {
    if strategy == Strategy::Raw {
        return Err(Error::usage("hd-error measures the bucket or syndrome strategy"));
    }
    if samples == 0 {
        return Err(Error::usage("samples must be at least 1"));
    }
    let params = HdParams::new(d, epsilon, strategy)?;
    let root = CoinSource::new(seed).derive(&format!("hd-error/{weight}"));
    let truth = weight <= d;
    let errors = (0..samples)
        .into_par_iter()
        .map(|s| -> Result<bool> {
            let coins = root.derive(&format!("{s}"));
            let (x, y) = sample_pair_with_distance(n, weight, &coins.derive("input"))?;
            let hd = coins.derive("hd");
            let a = hd_encode(&params, &x, &hd)?;
            let b = hd_encode(&params, &y, &hd)?;
            Ok(hd_decide(&params, &a, &b, &hd)?.verdict.is_le() != truth)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|&e| e)
        .count();
    Ok(HdErrorRow {
        d,
        epsilon,
        strategy: strategy.to_string(),
        n,
        weight,
        samples,
        errors,
        rate: errors as f64 / samples as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PkAgreement {
    pub k: usize,
    pub n: usize,
    pub weight: usize,
    pub trials: usize,
    pub agreements: usize,
    pub rate: f64,
}

/// Runs `P_k` alone (with `apply`) on pairs at distance `weight <= k` and
/// counts outputs equal to `apply(weight)`.
pub fn pk_agreement_experiment(
    k: usize,
    apply: &Predicate,
    weight: usize,
    trials: usize,
    strategy: Strategy,
    seed: u64,
) -> Result<PkAgreement> {
    if weight > k {
        return Err(Error::usage(format!("weight {weight} breaks the promise |x ⊕ y| <= {k}")));
    }
    let n = apply.n();
    let inst = PkInstance::new(k, apply.clone(), strategy)?;
    let root = CoinSource::new(seed);
    let agreements = (0..trials)
        .into_par_iter()
        .map(|t| -> Result<bool> {
            let coins = root.derive(&format!("trial/{t}"));
            let (x, y) = sample_pair_with_distance(n, weight, &coins.derive("input"))?;
            let pk = coins.derive("pk/main");
            let a = inst.party_messages(&x, &pk)?;
            let b = inst.party_messages(&y, &pk)?;
            Ok(inst.referee(&a, &b, &pk)? == apply.eval(weight))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|&ok| ok)
        .count();
    Ok(PkAgreement {
        k,
        n,
        weight,
        trials,
        agreements,
        rate: agreements as f64 / trials as f64,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub r: usize,
    pub n: usize,
    pub strategy: String,
    pub trials: usize,
    pub mean_cost_bits: f64,
    pub normalizer: f64,
    pub ratio: f64,
}

/// `r · (log2 r)^3 / log2 log2 r`, defined for `r >= 3`.
pub fn sweep_normalizer(r: usize) -> Result<f64> {
    if r < 3 {
        return Err(Error::usage(format!("r = {r}: the cost normalizer needs r >= 3")));
    }
    let lg = (r as f64).log2();
    Ok(r as f64 * lg.powi(3) / lg.log2())
}

/// Mean transcript cost of `P` for a `random:r` predicate at each `r`, on
/// pairs of uniformly random distance.
pub fn sweep_r(r_values: &[usize], n: usize, strategy: Strategy, trials: usize, seed: u64) -> Result<Vec<SweepRow>> {
    if trials == 0 {
        return Err(Error::usage("trials must be at least 1"));
    }
    let root = CoinSource::new(seed);
    r_values
        .iter()
        .map(|&r| {
            let normalizer = sweep_normalizer(r)?;
            let base = root.derive(&format!("sweep/{r}"));
            let predicate = family(Family::Random(r), n, &base.derive("predicate"))?;
            let protocol = SmpProtocol::new(predicate, strategy)?;
            let total: usize = (0..trials)
                .into_par_iter()
                .map(|t| -> Result<usize> {
                    let coins = base.derive(&format!("trial/{t}"));
                    let weight = coins.derive("weight").rng().random_range(0..=n);
                    let (x, y) = sample_pair_with_distance(n, weight, &coins.derive("input"))?;
                    Ok(protocol.run(&x, &y, &coins)?.cost_bits())
                })
                .collect::<Result<Vec<_>>>()?
                .into_iter()
                .sum();
            let mean = total as f64 / trials as f64;
            Ok(SweepRow {
                r,
                n,
                strategy: strategy.to_string(),
                trials,
                mean_cost_bits: mean,
                normalizer,
                ratio: mean / normalizer,
            })
        })
        .collect()
}
