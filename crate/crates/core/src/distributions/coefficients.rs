//! Exact mixing coefficients for the best-L selected SINR.
//!
//! `ξ₁(N,L,ℓ)` expresses the CDF of a uniformly chosen member of the top `L`
//! out of `N` i.i.d. draws as `Σ_ℓ ξ₁(N,L,ℓ) F^{N−ℓ}`. `ξ₂(N,L,τ,ℓ)` are the
//! coefficients of its `τ`-th power, `Σ_ℓ ξ₂(N,L,τ,ℓ) F^{Nτ−ℓ}`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use num::{BigInt, BigRational, One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};

fn check_nl(n: u32, l: u32) -> Result<()> {
    if n < 1 || l < 1 || l > n {
        return Err(domain(format!("need 1 <= L <= N, got N={n}, L={l}")));
    }
    Ok(())
}

fn binom(n: u32, k: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    c
}

/// `ξ₁(N,L,ℓ) = Σ_{i=ℓ}^{L−1} (L−i)/L · C(N,i) · C(i,ℓ) · (−1)^{i−ℓ}`.
pub fn xi1_exact(n: u32, l: u32, ell: u32) -> Result<BigRational> {
    check_nl(n, l)?;
    if ell >= l {
        return Err(domain(format!("ξ₁ needs ℓ < L, got ℓ={ell}, L={l}")));
    }
    let mut acc = BigInt::zero();
    for i in ell..l {
        let t = BigInt::from(l - i) * binom(n, i) * binom(i, ell);
        if (i - ell) % 2 == 0 {
            acc += t;
        } else {
            acc -= t;
        }
    }
    Ok(BigRational::new(acc, BigInt::from(l)))
}

pub fn xi1_row(n: u32, l: u32) -> Result<Vec<BigRational>> {
    (0..l).map(|ell| xi1_exact(n, l, ell)).collect()
}

pub fn xi1(n: u32, l: u32, ell: u32) -> Result<f64> {
    Ok(to_f64(&xi1_exact(n, l, ell)?))
}

pub fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        // Only reachable for astronomically large coefficients.
        if r.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

/// One row `ξ₂(N,L,τ,·)` together with how it was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct Xi2Row {
    pub coefficients: Vec<BigRational>,
    /// The power recursion was undefined (`ξ₁(N,L,0) = 0`) and the row came
    /// from direct polynomial multiplication instead.
    pub used_fallback: bool,
}

fn check_tau(tau2: u32) -> Result<()> {
    if tau2 < 1 {
        return Err(domain("ξ₂ needs τ₂ >= 1"));
    }
    Ok(())
}

/// `ξ₂` by the power recursion
///
/// ```text
/// ξ₂(0)      = ξ₁(0)^τ
/// ξ₂(ℓ)      = 1/(ℓ ξ₁(0)) Σ_{i=1}^{min(ℓ,L−1)} ((τ+1)i − ℓ) ξ₁(i) ξ₂(ℓ−i)
/// ξ₂(τ(L−1)) = ξ₁(L−1)^τ
/// ```
///
/// falling back to [`xi2_brute_force`] when `ξ₁(0) = 0`.
pub fn xi2_row(n: u32, l: u32, tau2: u32) -> Result<Xi2Row> {
    check_nl(n, l)?;
    check_tau(tau2)?;
    let x1 = xi1_row(n, l)?;
    if x1[0].is_zero() {
        return Ok(Xi2Row {
            coefficients: poly_power(&x1, tau2),
            used_fallback: true,
        });
    }
    let top = (tau2 * (l - 1)) as usize;
    let mut out: Vec<BigRational> = Vec::with_capacity(top + 1);
    out.push(pow(&x1[0], tau2));
    let tp1 = BigInt::from(tau2 + 1);
    for ell in 1..=top {
        if ell == top {
            out.push(pow(&x1[l as usize - 1], tau2));
            break;
        }
        let mut acc = BigRational::zero();
        for i in 1..=ell.min(l as usize - 1) {
            let w = &tp1 * BigInt::from(i) - BigInt::from(ell);
            if w.is_zero() || x1[i].is_zero() || out[ell - i].is_zero() {
                continue;
            }
            acc += BigRational::from_integer(w) * &x1[i] * &out[ell - i];
        }
        out.push(acc / (BigRational::from_integer(BigInt::from(ell)) * &x1[0]));
    }
    Ok(Xi2Row {
        coefficients: out,
        used_fallback: false,
    })
}

pub fn xi2_exact(n: u32, l: u32, tau2: u32, ell: u32) -> Result<BigRational> {
    if ell > tau2.saturating_mul(l.saturating_sub(1)) {
        return Err(domain(format!(
            "ξ₂ needs ℓ <= τ₂(L−1), got ℓ={ell}, τ₂={tau2}, L={l}"
        )));
    }
    Ok(xi2_row(n, l, tau2)?.coefficients[ell as usize].clone())
}

pub fn xi2(n: u32, l: u32, tau2: u32, ell: u32) -> Result<f64> {
    Ok(to_f64(&xi2_exact(n, l, tau2, ell)?))
}

/// Coefficients of `(Σ_ℓ ξ₁(N,L,ℓ) z^ℓ)^τ` by repeated sparse multiplication.
pub fn xi2_brute_force(n: u32, l: u32, tau2: u32) -> Result<Vec<BigRational>> {
    check_nl(n, l)?;
    check_tau(tau2)?;
    Ok(poly_power(&xi1_row(n, l)?, tau2))
}

fn poly_power(base: &[BigRational], tau: u32) -> Vec<BigRational> {
    let mut acc = vec![BigRational::one()];
    for _ in 0..tau {
        let mut next = vec![BigRational::zero(); acc.len() + base.len() - 1];
        for (i, a) in acc.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in base.iter().enumerate() {
                if !b.is_zero() {
                    next[i + j] += a * b;
                }
            }
        }
        acc = next;
    }
    acc
}

fn pow(r: &BigRational, e: u32) -> BigRational {
    num::pow::pow(r.clone(), e as usize)
}

/// `η = N − Σ_ℓ ξ₁(N,L,ℓ)·ℓ`, exactly.
pub fn tail_equivalent_exponent_exact(n: u32, l: u32) -> Result<BigRational> {
    let row = xi1_row(n, l)?;
    let mut s = BigRational::from_integer(BigInt::from(n));
    for (ell, x) in row.iter().enumerate() {
        s -= x * BigRational::from_integer(BigInt::from(ell));
    }
    Ok(s)
}

pub fn tail_equivalent_exponent(n: u32, l: u32) -> Result<f64> {
    Ok(to_f64(&tail_equivalent_exponent_exact(n, l)?))
}

/// `Σ_ℓ |ξ₁(N,L,ℓ)|`, the growth factor of cancellation per power of `F_W`.
pub fn xi1_abs_sum(n: u32, l: u32) -> Result<f64> {
    Ok(xi1_row(n, l)?.iter().map(|r| to_f64(&r.abs())).sum())
}

/// Memoised `ξ₁`/`ξ₂` values with a JSON cache format.
///
/// Keys are `"N,L,ell"` and `"N,L,tau2,ell"`; values are `"num/den"` strings.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoefficientTable {
    xi1: BTreeMap<(u32, u32, u32), BigRational>,
    xi2: BTreeMap<(u32, u32, u32, u32), BigRational>,
    rows: BTreeSet<(u32, u32, u32)>,
    fallback_rows: BTreeSet<(u32, u32, u32)>,
}

const CACHE_FORMAT: &str = "randbeam-xi/1";

impl CoefficientTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn xi1(&mut self, n: u32, l: u32, ell: u32) -> Result<BigRational> {
        if let Some(v) = self.xi1.get(&(n, l, ell)) {
            return Ok(v.clone());
        }
        let row = xi1_row(n, l)?;
        if ell >= l {
            return Err(domain(format!("ξ₁ needs ℓ < L, got ℓ={ell}, L={l}")));
        }
        for (i, v) in row.into_iter().enumerate() {
            self.xi1.insert((n, l, i as u32), v);
        }
        Ok(self.xi1[&(n, l, ell)].clone())
    }

    /// Whole `ξ₂` row, computed on first use.
    pub fn xi2_row(&mut self, n: u32, l: u32, tau2: u32) -> Result<Vec<BigRational>> {
        if !self.rows.contains(&(n, l, tau2)) {
            let row = xi2_row(n, l, tau2)?;
            if row.used_fallback {
                self.fallback_rows.insert((n, l, tau2));
            }
            for (ell, v) in row.coefficients.into_iter().enumerate() {
                self.xi2.insert((n, l, tau2, ell as u32), v);
            }
            self.rows.insert((n, l, tau2));
        }
        let top = tau2 * (l - 1);
        Ok((0..=top)
            .map(|ell| self.xi2[&(n, l, tau2, ell)].clone())
            .collect())
    }

    pub fn xi2(&mut self, n: u32, l: u32, tau2: u32, ell: u32) -> Result<BigRational> {
        if ell > tau2.saturating_mul(l.saturating_sub(1)) {
            return Err(domain("ξ₂ needs ℓ <= τ₂(L−1)"));
        }
        Ok(self.xi2_row(n, l, tau2)?[ell as usize].clone())
    }

    /// Whether the row for `(N, L, τ₂)` needed the polynomial-power fallback.
    pub fn used_fallback(&self, n: u32, l: u32, tau2: u32) -> bool {
        self.fallback_rows.contains(&(n, l, tau2))
    }

    /// Adds every entry of `other` not already present.
    pub fn merge(&mut self, other: CoefficientTable) {
        for (k, v) in other.xi1 {
            self.xi1.entry(k).or_insert(v);
        }
        for (k, v) in other.xi2 {
            self.xi2.entry(k).or_insert(v);
        }
        self.rows.extend(other.rows);
        self.fallback_rows.extend(other.fallback_rows);
    }

    pub fn len(&self) -> usize {
        self.xi1.len() + self.xi2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn to_json(&self) -> String {
        let xi1: BTreeMap<String, String> = self
            .xi1
            .iter()
            .map(|((n, l, e), v)| (format!("{n},{l},{e}"), rational_string(v)))
            .collect();
        let xi2: BTreeMap<String, String> = self
            .xi2
            .iter()
            .map(|((n, l, t, e), v)| (format!("{n},{l},{t},{e}"), rational_string(v)))
            .collect();
        let fallback: Vec<String> = self
            .fallback_rows
            .iter()
            .map(|(n, l, t)| format!("{n},{l},{t}"))
            .collect();
        let doc = serde_json::json!({
            "format": CACHE_FORMAT,
            "xi1": xi1,
            "xi2": xi2,
            "xi2_fallback_rows": fallback,
        });
        serde_json::to_string_pretty(&doc).expect("string maps always serialise")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::Cache(e.to_string()))?;
        if doc.get("format").and_then(|v| v.as_str()) != Some(CACHE_FORMAT) {
            return Err(Error::Cache("unrecognised cache format".into()));
        }
        let mut table = CoefficientTable::new();
        let obj = |key: &str| -> Result<serde_json::Map<String, serde_json::Value>> {
            doc.get(key)
                .and_then(|v| v.as_object())
                .cloned()
                .ok_or_else(|| Error::Cache(format!("missing `{key}` map")))
        };
        for (k, v) in obj("xi1")? {
            let idx = parse_key(&k, 3)?;
            table
                .xi1
                .insert((idx[0], idx[1], idx[2]), parse_rational(&v)?);
        }
        for (k, v) in obj("xi2")? {
            let idx = parse_key(&k, 4)?;
            table
                .xi2
                .insert((idx[0], idx[1], idx[2], idx[3]), parse_rational(&v)?);
        }
        // A row is only usable if it is complete.
        let mut counts: BTreeMap<(u32, u32, u32), u32> = BTreeMap::new();
        for &(n, l, t, _) in table.xi2.keys() {
            *counts.entry((n, l, t)).or_default() += 1;
        }
        for ((n, l, t), c) in counts {
            if l >= 1 && c == t * (l - 1) + 1 {
                table.rows.insert((n, l, t));
            }
        }
        if let Some(rows) = doc.get("xi2_fallback_rows").and_then(|v| v.as_array()) {
            for r in rows {
                let s = r
                    .as_str()
                    .ok_or_else(|| Error::Cache("bad fallback row".into()))?;
                let idx = parse_key(s, 3)?;
                table.fallback_rows.insert((idx[0], idx[1], idx[2]));
            }
        }
        Ok(table)
    }

    /// Loads a cache file, returning an empty table if it does not exist.
    pub fn load(path: &Path) -> Result<Self> {
        match fs::read_to_string(path) {
            Ok(text) => Self::from_json(&text),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(Self::new()),
            Err(e) => Err(Error::Cache(e.to_string())),
        }
    }

    /// Writes the cache through a temporary file and a rename.
    pub fn save(&self, path: &Path) -> Result<()> {
        let io = |e: std::io::Error| Error::Cache(format!("{}: {e}", path.display()));
        if let Some(dir) = path.parent() {
            if !dir.as_os_str().is_empty() {
                fs::create_dir_all(dir).map_err(io)?;
            }
        }
        let tmp = path.with_extension("json.tmp");
        {
            let mut f = fs::File::create(&tmp).map_err(io)?;
            f.write_all(self.to_json().as_bytes()).map_err(io)?;
            f.sync_all().map_err(io)?;
        }
        fs::rename(&tmp, path).map_err(io)
    }
}

fn rational_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn parse_rational(v: &serde_json::Value) -> Result<BigRational> {
    let s = v
        .as_str()
        .ok_or_else(|| Error::Cache("coefficient values must be strings".into()))?;
    let (num, den) = s.split_once('/').unwrap_or((s, "1"));
    let parse = |t: &str| BigInt::from_str(t.trim()).map_err(|e| Error::Cache(format!("{s}: {e}")));
    let den = parse(den)?;
    if den.is_zero() {
        return Err(Error::Cache(format!("zero denominator in {s}")));
    }
    Ok(BigRational::new(parse(num)?, den))
}

fn parse_key(k: &str, parts: usize) -> Result<Vec<u32>> {
    let idx: Vec<u32> = k
        .split(',')
        .map(|p| p.trim().parse::<u32>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Cache(format!("bad key {k}: {e}")))?;
    if idx.len() != parts {
        return Err(Error::Cache(format!("bad key {k}")));
    }
    Ok(idx)
}
