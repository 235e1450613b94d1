use rayon::prelude::*;
use serde::Serialize;

use crate::base_dynamics::{Sft, Word};
use crate::cocycle::{linalg, Matrix, MatrixGenerator};
use crate::serde_ext;

use super::LyapunovError;

/// Prefixes handed to parallel workers are extended until at least this many exist.
const MIN_PARALLEL_PREFIXES: u128 = 64;

/// `sup_x log ||A^n(x)||` together with a maximizing window.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupNorm {
    pub n: usize,
    #[serde(serialize_with = "serde_ext::ext_real")]
    pub log_norm: f64,
    /// A window `x_{-r} .. x_{n-1+r}` attaining the supremum (lexicographically first).
    pub window: Word,
}

/// `sup_x log ||A^n(x)||`, exact: `A^n(x)` only depends on `x_{-r} .. x_{n-1+r}`,
/// so the supremum is a maximum over admissible words of length `n + 2r`.
pub fn exact_sup_log_norm(g: &MatrixGenerator, n: usize) -> Result<f64, LyapunovError> {
    Ok(sup_log_norm_profile(g, n)?[n].log_norm)
}

/// [`exact_sup_log_norm`] for every `n` in `0..=n_max` from a single enumeration.
pub fn sup_log_norm_profile(g: &MatrixGenerator, n_max: usize) -> Result<Vec<SupNorm>, LyapunovError> {
    let w = g.window_len();
    let len = n_max + w - 1;
    let sft = g.sft();
    sft.check_budget(len)?;
    // windows of every shorter length are prefixes of the longest ones
    let table = FlatTable::new(g);

    let mut head = SupNorm {
        n: 0,
        log_norm: 0.0,
        window: Word::new(Vec::new()),
    };
    if n_max == 0 {
        // a window of radius r still has to exist; the empty product is the identity
        head.window = sft.admissible_words(w - 1)?.swap_remove(0);
        return Ok(vec![head]);
    }

    let mut plen = 1;
    while plen < len && sft.count_words(plen) < MIN_PARALLEL_PREFIXES {
        plen += 1;
    }
    let prefixes = sft.admissible_words(plen)?;
    let partial: Vec<Vec<Best>> = prefixes
        .par_iter()
        .map(|prefix| {
            let mut walker = Walker::new(&table, sft, len);
            for &s in prefix.symbols() {
                walker.push(s);
            }
            walker.dfs();
            walker.best
        })
        .collect();

    let mut best = vec![Best::default(); n_max + 1];
    for part in partial {
        for (m, b) in part.into_iter().enumerate() {
            if b.log_norm > best[m].log_norm || best[m].window.is_empty() {
                best[m] = b;
            }
        }
    }
    let mut out = vec![SupNorm {
        n: 0,
        log_norm: 0.0,
        window: Word::new(best[1].window[..w - 1].to_vec()),
    }];
    out.extend(best.into_iter().enumerate().skip(1).map(|(n, b)| SupNorm {
        n,
        log_norm: b.log_norm,
        window: Word::new(b.window),
    }));
    Ok(out)
}

#[derive(Debug, Clone)]
struct Best {
    log_norm: f64,
    window: Vec<u8>,
}

impl Default for Best {
    fn default() -> Self {
        Best {
            log_norm: f64::NEG_INFINITY,
            window: Vec::new(),
        }
    }
}

/// Column-major copies of the table entries, indexed by window code.
struct FlatTable {
    k: usize,
    d: usize,
    w: usize,
    modulus: usize,
    slots: Vec<Vec<f64>>,
}

impl FlatTable {
    fn new(g: &MatrixGenerator) -> Self {
        let k = g.sft().alphabet();
        let w = g.window_len();
        let modulus = k.pow(w as u32);
        let mut slots = vec![Vec::new(); modulus];
        for (word, m) in g.entries() {
            slots[word.code(k)] = m.as_slice().to_vec();
        }
        FlatTable {
            k,
            d: g.dim(),
            w,
            modulus,
            slots,
        }
    }
}

/// Depth-first enumeration of admissible words keeping one scaled partial product per depth.
struct Walker<'a> {
    table: &'a FlatTable,
    sft: &'a Sft,
    len: usize,
    symbols: Vec<u8>,
    codes: Vec<usize>,
    /// `prods[m]` is the body of `A^m` for the current prefix, `scales[m]` its log factor.
    prods: Vec<Vec<f64>>,
    scales: Vec<f64>,
    best: Vec<Best>,
}

impl<'a> Walker<'a> {
    fn new(table: &'a FlatTable, sft: &'a Sft, len: usize) -> Self {
        let d = table.d;
        let factors = len + 1 - (table.w - 1);
        let mut prods = vec![vec![0.0; d * d]; factors];
        for i in 0..d {
            prods[0][i + i * d] = 1.0;
        }
        Walker {
            table,
            sft,
            len,
            symbols: Vec::with_capacity(len),
            codes: Vec::with_capacity(len),
            prods,
            scales: vec![0.0; factors],
            best: vec![Best::default(); factors],
        }
    }

    fn push(&mut self, s: u8) {
        let t = self.table;
        let prev = self.codes.last().copied().unwrap_or(0);
        let code = (prev * t.k + s as usize) % t.modulus;
        self.symbols.push(s);
        self.codes.push(code);
        let depth = self.symbols.len();
        if depth < t.w {
            return;
        }
        let m = depth + 1 - t.w;
        let d = t.d;
        let (done, rest) = self.prods.split_at_mut(m);
        let prev_body = &done[m - 1];
        let out = &mut rest[0];
        let prev_scale = self.scales[m - 1];
        if prev_scale == f64::NEG_INFINITY {
            self.scales[m] = f64::NEG_INFINITY;
            out.fill(0.0);
        } else {
            let a = &t.slots[code];
            let mut peak = 0.0f64;
            for j in 0..d {
                for i in 0..d {
                    let mut acc = 0.0;
                    for l in 0..d {
                        acc += a[i + l * d] * prev_body[l + j * d];
                    }
                    out[i + j * d] = acc;
                    peak = peak.max(acc.abs());
                }
            }
            if peak == 0.0 {
                self.scales[m] = f64::NEG_INFINITY;
            } else {
                for v in out.iter_mut() {
                    *v /= peak;
                }
                self.scales[m] = prev_scale + peak.ln();
            }
        }
        self.record(m);
    }

    fn record(&mut self, m: usize) {
        let scale = self.scales[m];
        let best = &mut self.best[m];
        if scale == f64::NEG_INFINITY {
            if best.window.is_empty() {
                best.window = self.symbols.clone();
            }
            return;
        }
        let body = &self.prods[m];
        let frob = body.iter().map(|v| v * v).sum::<f64>().sqrt();
        // the spectral norm never exceeds the Frobenius norm
        if !best.window.is_empty() && frob.ln() + scale <= best.log_norm {
            return;
        }
        let d = self.table.d;
        let exact = linalg::spectral_norm(&Matrix::from_column_slice(d, d, body)).ln() + scale;
        if best.window.is_empty() || exact > best.log_norm {
            best.log_norm = exact;
            best.window = self.symbols.clone();
        }
    }

    fn pop(&mut self) {
        self.symbols.pop();
        self.codes.pop();
    }

    fn dfs(&mut self) {
        if self.symbols.len() == self.len {
            return;
        }
        let last = *self.symbols.last().expect("walkers start from a nonempty prefix");
        for s in 0..self.table.k as u8 {
            if self.sft.allows(last, s) {
                self.push(s);
                self.dfs();
                self.pop();
            }
        }
    }
}

/// Smallest `N <= n_max` with `sup_x log ||Ã^N(x)|| < (rho + eps) N`, where
/// `Ã = diag(1, A)`; the block extension keeps every `log ||Ã^n||` finite.
pub fn find_uniform_n(g: &MatrixGenerator, rho: f64, eps: f64, n_max: usize) -> Result<usize, LyapunovError> {
    Ok(uniform_search(g, rho, eps, n_max)?.0)
}

/// The uniform growth data `(N, C_eps)` with `C_eps = max_{j <= N} sup_x ||Ã^j(x)||`.
#[derive(Debug, Clone, Serialize)]
pub struct GrowthBound {
    pub rho: f64,
    pub eps: f64,
    pub n: usize,
    pub log_c_eps: f64,
    pub c_eps: f64,
    /// `sup_x log ||Ã^j(x)||` for `j = 0..=n`.
    pub augmented_profile: Vec<SupNorm>,
}

impl GrowthBound {
    /// `log C_eps + (rho + eps) n`, the bound on `log ||A^n(x)||`.
    pub fn log_bound(&self, n: usize) -> f64 {
        self.log_c_eps + (self.rho + self.eps) * n as f64
    }
}

pub fn growth_constant(g: &MatrixGenerator, rho: f64, eps: f64, n_max: usize) -> Result<GrowthBound, LyapunovError> {
    let (n, profile) = uniform_search(g, rho, eps, n_max)?;
    let augmented_profile: Vec<SupNorm> = profile.into_iter().take(n + 1).collect();
    let log_c_eps = augmented_profile
        .iter()
        .map(|s| s.log_norm)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(GrowthBound {
        rho,
        eps,
        n,
        log_c_eps,
        c_eps: log_c_eps.exp(),
        augmented_profile,
    })
}

fn uniform_search(
    g: &MatrixGenerator,
    rho: f64,
    eps: f64,
    n_max: usize,
) -> Result<(usize, Vec<SupNorm>), LyapunovError> {
    if !(eps > 0.0) || !rho.is_finite() {
        return Err(LyapunovError::InvalidParameter(format!(
            "need finite rho and eps > 0, got rho = {rho}, eps = {eps}"
        )));
    }
    let aug = g.augment()?;
    let slope = rho + eps;
    let mut depth = 1usize;
    loop {
        let depth_now = depth.min(n_max);
        if depth_now == 0 {
            return Err(LyapunovError::NotFound(n_max));
        }
        let profile = sup_log_norm_profile(&aug, depth_now)?;
        if let Some(n) = (1..=depth_now).find(|&n| profile[n].log_norm < slope * n as f64) {
            return Ok((n, profile));
        }
        if depth_now == n_max {
            return Err(LyapunovError::NotFound(n_max));
        }
        depth *= 2;
    }
}
