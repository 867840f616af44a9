//! Discrete eigenvalues of the fiber operator.
//!
//! Roots are isolated with an exact eigenvalue count rather than a sign scan.
//! Writing the interaction on one parity block as `W G W*` and
//! `A = H0(K) - z`, the inertia of the bordered matrix
//! `[[A, W], [W*, -G^-1]]` computed two ways gives, for `z` below the band,
//!
//! ```text
//! #{eigenvalues of H(K) below z} = n+(G^-1 + N(z)) - #{g_i > 0}
//! ```
//!
//! and for `z` above the band
//!
//! ```text
//! #{eigenvalues of H(K) above z} = n-(G^-1 + N(z)) - #{g_i < 0}
//! ```
//!
//! where `N(z)` is the 3x3 block of resolvent moments. The count is monotone
//! in `z` (also after discretisation, since every quadrature weight is
//! positive), so close or coincident roots are never lost. Each isolated
//! simple root is then polished on the block determinant, which changes sign
//! there.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::determinant::{c_constant, det3, CouplingPair};
use crate::error::{Error, Result};
use crate::quadrature::{parity_moments_adaptive, ParityMoments, QuadraturePolicy, Sym3};
use crate::torus::{band_edges, Band, GridSpec, Quasimomentum, Side};

/// One discrete eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Eigenvalue {
    pub z: f64,
    pub side: Side,
    pub multiplicity: u32,
}

/// All discrete eigenvalues of `H(K)` for one coupling.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub coupling: CouplingPair,
    pub k: Quasimomentum,
    pub band: Band,
    /// Ascending.
    pub eigenvalues: Vec<Eigenvalue>,
    /// Counted with multiplicity.
    pub n_below: u32,
    pub n_above: u32,
    /// The determinant is almost zero at the closest probed distance to a
    /// band edge, so an eigenvalue may be hiding in `(0, edge_distance)`.
    pub boundary_uncertain: bool,
}

impl SpectralReport {
    pub fn count(&self, side: Side) -> u32 {
        match side {
            Side::Below => self.n_below,
            Side::Above => self.n_above,
        }
    }

    pub fn on_side(&self, side: Side) -> impl Iterator<Item = &Eigenvalue> + '_ {
        self.eigenvalues.iter().filter(move |e| e.side == side)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub policy: QuadraturePolicy,
    /// Closest distance to the band edge that is probed.
    pub edge_distance: f64,
    /// Final bracket width for every root.
    pub root_tol: f64,
    /// `|det|` at `edge_distance` below which the report is flagged
    /// `boundary_uncertain`.
    pub boundary_det_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            policy: QuadraturePolicy::default(),
            edge_distance: 1e-8,
            root_tol: 1e-12,
            boundary_det_tol: 1e-6,
        }
    }
}

impl SolverOptions {
    pub fn starting_at(grid: GridSpec) -> Self {
        Self {
            policy: QuadraturePolicy::starting_at(grid),
            ..Self::default()
        }
    }
}

/// Distances from the band edge at which the eigenvalue count is probed:
/// 64 geometric points on `[1e-8, 1e-1]`, 256 uniform points on `(0.1, 10]`,
/// then a geometric tail `10 * 1.05^k` up to `reach`.
///
/// Apart from the cut-off the points do not depend on the coupling, so
/// quadrature results on them are shared between calls.
pub fn bracketing_mesh(edge_distance: f64, reach: f64) -> Vec<f64> {
    let mut d = Vec::with_capacity(400);
    let (lo, hi) = (edge_distance.ln(), 0.1f64.ln());
    for i in 0..64 {
        d.push((lo + (hi - lo) * i as f64 / 63.0).exp());
    }
    for i in 1..=256 {
        d.push(0.1 + 9.9 * i as f64 / 256.0);
    }
    let mut x = 10.0;
    while x < reach {
        x *= 1.05;
        d.push(x);
    }
    d.retain(|&x| x <= reach.max(10.0));
    if *d.last().unwrap() < reach {
        d.push(reach);
    }
    d
}

type CacheKey = (u64, u64, u64, usize, usize, u64);

fn cache() -> &'static Mutex<HashMap<CacheKey, ParityMoments>> {
    static CACHE: OnceLock<Mutex<HashMap<CacheKey, ParityMoments>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

const CACHE_LIMIT: usize = 1 << 18;

/// Parity moments with grid doubling, memoised process-wide.
pub fn cached_moments(
    k: Quasimomentum,
    z: f64,
    policy: &QuadraturePolicy,
) -> Result<ParityMoments> {
    let key = (
        k.k1.to_bits(),
        k.k2.to_bits(),
        z.to_bits(),
        policy.start.n(),
        policy.max_n,
        policy.tol.to_bits(),
    );
    if let Some(m) = cache().lock().expect("moment cache poisoned").get(&key) {
        return Ok(*m);
    }
    let m = parity_moments_adaptive(k, z, policy)?.value;
    let mut c = cache().lock().expect("moment cache poisoned");
    if c.len() >= CACHE_LIMIT {
        c.clear();
    }
    c.insert(key, m);
    Ok(m)
}

/// Which reflection-parity block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Block {
    OddP1,
    OddP2,
}

impl Block {
    fn pick(self, m: &ParityMoments) -> &Sym3 {
        match self {
            Block::OddP1 => &m.odd_p1,
            Block::OddP2 => &m.odd_p2,
        }
    }
}

/// Eigenvalue count of `H0 + W diag(g) W*` beyond `z` on `side`, for one block.
fn block_count(g: &[f64; 3], n: &Sym3, side: Side) -> Result<usize> {
    let active: Vec<usize> = (0..3).filter(|&i| g[i] != 0.0).collect();
    if active.is_empty() {
        return Ok(0);
    }
    // |G|^1/2 (G^-1 + N) |G|^1/2 = sign(G) + |G|^1/2 N |G|^1/2 has the same inertia
    let r = active.len();
    let t = faer::Mat::<f64>::from_fn(r, r, |a, b| {
        let (i, j) = (active[a], active[b]);
        let diag = if a == b { g[i].signum() } else { 0.0 };
        diag + g[i].abs().sqrt() * n[i][j] * g[j].abs().sqrt()
    });
    let eig = t
        .self_adjoint_eigenvalues(faer::Side::Lower)
        .map_err(|e| Error::Eigensolver(format!("{e:?}")))?;
    let count = match side {
        Side::Below => {
            let pos = eig.iter().filter(|&&x| x > 0.0).count();
            pos - active.iter().filter(|&&i| g[i] > 0.0).count().min(pos)
        }
        Side::Above => {
            let neg = eig.iter().filter(|&&x| x < 0.0).count();
            neg - active.iter().filter(|&&i| g[i] < 0.0).count().min(neg)
        }
    };
    Ok(count)
}

fn block_det(g: &[f64; 3], n: &Sym3) -> f64 {
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            m[i][j] = f64::from(u8::from(i == j)) + g[i] * n[i][j];
        }
    }
    det3(&m)
}

/// Roots on one side of the band for one block and one set of channel
/// strengths, as `(z, multiplicity)` in ascending order of distance.
struct BlockSearch<'a> {
    k: Quasimomentum,
    band: Band,
    side: Side,
    block: Block,
    g: [f64; 3],
    opts: &'a SolverOptions,
}

impl BlockSearch<'_> {
    fn z_at(&self, d: f64) -> f64 {
        self.band.offset(self.side, d)
    }

    fn moments(&self, d: f64) -> Result<Sym3> {
        let m = cached_moments(self.k, self.z_at(d), &self.opts.policy)?;
        Ok(*self.block.pick(&m))
    }

    fn count(&self, d: f64) -> Result<usize> {
        block_count(&self.g, &self.moments(d)?, self.side)
    }

    fn det(&self, d: f64) -> Result<f64> {
        Ok(block_det(&self.g, &self.moments(d)?))
    }

    /// Returns `(distance, multiplicity)` pairs, nearest to the band first.
    fn run(&self) -> Result<Vec<(f64, usize)>> {
        let reach = self.g.iter().fold(0.0f64, |m, x| m.max(x.abs())) + 1.0;
        let mesh = bracketing_mesh(self.opts.edge_distance, reach);
        let mut counts: Vec<Option<usize>> = vec![None; mesh.len()];
        let first = self.count(mesh[0])?;
        counts[0] = Some(first);
        let last = mesh.len() - 1;
        let tail = self.count(mesh[last])?;
        counts[last] = Some(tail);
        debug_assert_eq!(tail, 0, "eigenvalue beyond the norm bound");
        let mut out = Vec::new();
        if first > tail {
            self.split_mesh(&mesh, &mut counts, 0, last, &mut out)?;
        }
        Ok(out)
    }

    fn split_mesh(
        &self,
        mesh: &[f64],
        counts: &mut [Option<usize>],
        i: usize,
        j: usize,
        out: &mut Vec<(f64, usize)>,
    ) -> Result<()> {
        let (ci, cj) = (counts[i].unwrap(), counts[j].unwrap());
        if ci <= cj {
            return Ok(());
        }
        if j == i + 1 {
            return self.refine(mesh[i], mesh[j], ci, cj, out);
        }
        let mid = (i + j) / 2;
        let cm = self.count(mesh[mid])?;
        counts[mid] = Some(cm);
        self.split_mesh(mesh, counts, i, mid, out)?;
        self.split_mesh(mesh, counts, mid, j, out)
    }

    /// `count(near) = cn > cf = count(far)` with `near < far`.
    fn refine(
        &self,
        near: f64,
        far: f64,
        cn: usize,
        cf: usize,
        out: &mut Vec<(f64, usize)>,
    ) -> Result<()> {
        let jump = cn - cf;
        if far - near <= self.opts.root_tol {
            out.push((0.5 * (near + far), jump));
            return Ok(());
        }
        if jump == 1 {
            let (fa, fb) = (self.det(near)?, self.det(far)?);
            if fa * fb < 0.0 {
                let d = illinois(|d| self.det(d), near, far, fa, fb, self.opts.root_tol)?;
                out.push((d, 1));
                return Ok(());
            }
        }
        let mid = 0.5 * (near + far);
        let cm = self.count(mid)?;
        if cm < cn {
            self.refine(near, mid, cn, cm, out)?;
        }
        if cm > cf {
            self.refine(mid, far, cm, cf, out)?;
        }
        Ok(())
    }
}

/// Bracketed regula falsi with the Illinois modification; falls back to a
/// bisection step whenever the bracket fails to halve twice in a row.
fn illinois<F>(mut f: F, mut a: f64, mut b: f64, mut fa: f64, mut fb: f64, tol: f64) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut last_kept = 0i8;
    let mut slow = 0;
    for _ in 0..200 {
        let w = b - a;
        if w <= tol {
            break;
        }
        let mut x = if slow >= 2 {
            0.5 * (a + b)
        } else {
            (a * fb - b * fa) / (fb - fa)
        };
        if !(x > a && x < b) {
            x = 0.5 * (a + b);
        }
        let fx = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx < 0.0) == (fa < 0.0) {
            a = x;
            fa = fx;
            if last_kept == 1 {
                fb *= 0.5;
            }
            last_kept = 1;
        } else {
            b = x;
            fb = fx;
            if last_kept == -1 {
                fa *= 0.5;
            }
            last_kept = -1;
        }
        slow = if b - a > 0.5 * w { slow + 1 } else { 0 };
    }
    Ok(0.5 * (a + b))
}

fn check_band(k: Quasimomentum) -> Result<Band> {
    let band = band_edges(k);
    if band.is_degenerate() {
        return Err(Error::DegenerateBand(band.width()));
    }
    Ok(band)
}

/// Roots of `z -> det(I + diag(g) N(z))` beyond the band on `side`, merged
/// over both parity blocks. Multiplicities add when the blocks share a root.
fn roots_with_strengths(
    k: Quasimomentum,
    side: Side,
    g: [f64; 3],
    opts: &SolverOptions,
) -> Result<Vec<Eigenvalue>> {
    let band = check_band(k)?;
    let search = |block| BlockSearch {
        k,
        band,
        side,
        block,
        g,
        opts,
    };
    let mut found: Vec<(f64, u32)> = Vec::new();
    if k.k1 == k.k2 {
        // the two blocks are exchanged by p1 <-> p2 and coincide
        for (d, m) in search(Block::OddP1).run()? {
            found.push((band.offset(side, d), 2 * m as u32));
        }
    } else {
        for block in [Block::OddP1, Block::OddP2] {
            for (d, m) in search(block).run()? {
                found.push((band.offset(side, d), m as u32));
            }
        }
    }
    found.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<Eigenvalue> = Vec::new();
    for (z, m) in found {
        match merged.last_mut() {
            Some(prev) if (prev.z - z).abs() <= MERGE_TOL => prev.multiplicity += m,
            _ => merged.push(Eigenvalue {
                z,
                side,
                multiplicity: m,
            }),
        }
    }
    Ok(merged)
}

/// Roots from the two blocks closer than this are reported as one
/// eigenvalue of higher multiplicity.
pub const MERGE_TOL: f64 = 1e-9;

/// Every distinct root of `Δ_{λμ}` on one side of `[0, 8]`, ascending.
pub fn find_roots_k0(coupling: CouplingPair, side: Side) -> Vec<f64> {
    find_roots_k0_with(coupling, side, &SolverOptions::default())
        .expect("K = 0 has a non-degenerate band")
}

pub fn find_roots_k0_with(
    coupling: CouplingPair,
    side: Side,
    opts: &SolverOptions,
) -> Result<Vec<f64>> {
    let roots = roots_with_strengths(
        Quasimomentum::ZERO,
        side,
        coupling.channel_strengths(),
        opts,
    )?;
    let mut out = Vec::new();
    for r in roots {
        // a root of the 3x3 determinant with multiplicity m shows up with 2m
        for _ in 0..r.multiplicity / 2 {
            out.push(r.z);
        }
    }
    Ok(out)
}

/// Number of eigenvalues (with multiplicity) beyond the band on `side`,
/// without locating them. At `K = 0` this is twice the root count of `Δ`.
pub fn count_eigenvalues(
    coupling: CouplingPair,
    k: Quasimomentum,
    side: Side,
    opts: &SolverOptions,
) -> Result<u32> {
    let band = check_band(k)?;
    let g = coupling.channel_strengths();
    let z = band.offset(side, opts.edge_distance);
    let m = cached_moments(k, z, &opts.policy)?;
    let n1 = block_count(&g, &m.odd_p1, side)?;
    let n2 = if k.k1 == k.k2 {
        n1
    } else {
        block_count(&g, &m.odd_p2, side)?
    };
    Ok((n1 + n2) as u32)
}

/// The discrete spectrum of `H_{λμ}(K)`, probing quadrature from `grid` upward.
pub fn spectrum(
    coupling: CouplingPair,
    k: Quasimomentum,
    grid: GridSpec,
) -> Result<SpectralReport> {
    spectrum_with(coupling, k, &SolverOptions::starting_at(grid))
}

pub fn spectrum_with(
    coupling: CouplingPair,
    k: Quasimomentum,
    opts: &SolverOptions,
) -> Result<SpectralReport> {
    let band = check_band(k)?;
    let g = coupling.channel_strengths();
    let mut eigenvalues = Vec::new();
    for side in Side::BOTH {
        eigenvalues.extend(roots_with_strengths(k, side, g, opts)?);
    }
    eigenvalues.sort_by(|a, b| a.z.total_cmp(&b.z));
    let total = |s: Side| {
        eigenvalues
            .iter()
            .filter(|e| e.side == s)
            .map(|e| e.multiplicity)
            .sum()
    };
    let boundary_uncertain = Side::BOTH.iter().any(|&side| {
        if k.is_zero() {
            c_constant(side, coupling).abs() < opts.boundary_det_tol
        } else {
            let z = band.offset(side, opts.edge_distance);
            match cached_moments(k, z, &opts.policy) {
                Ok(m) => [&m.odd_p1, &m.odd_p2]
                    .iter()
                    .any(|n| block_det(&g, n).abs() < opts.boundary_det_tol),
                Err(_) => true,
            }
        }
    });
    Ok(SpectralReport {
        coupling,
        k,
        band,
        n_below: total(Side::Below),
        n_above: total(Side::Above),
        eigenvalues,
        boundary_uncertain,
    })
}

/// `2π/(2-π)`: below this `1 + λ a` has a root under the band.
pub fn lambda_threshold_below() -> f64 {
    2.0 * PI / (2.0 - PI)
}

/// `2π/(π-2)`: above this `1 + λ a` has a root over the band.
pub fn lambda_threshold_above() -> f64 {
    2.0 * PI / (PI - 2.0)
}

/// Which case of the nearest-neighbour factor `Δ_{λ0} = 1 + λa` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LambdaFactorCase {
    /// `λ < 2π/(2-π)`: one root below, none above.
    RootBelow,
    /// `λ ∈ [2π/(2-π), 2π/(π-2)]`: no roots.
    NoRoots,
    /// `λ > 2π/(π-2)`: one root above, none below.
    RootAbove,
}

impl LambdaFactorCase {
    pub fn of(lambda: f64) -> Self {
        if lambda < lambda_threshold_below() {
            Self::RootBelow
        } else if lambda > lambda_threshold_above() {
            Self::RootAbove
        } else {
            Self::NoRoots
        }
    }
}

/// Which case of the next-nearest factor `Δ_{0μ}` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MuFactorCase {
    /// `μ < μ0⁻`: two roots below, bracketing both η⁻.
    TwoBelow,
    /// `μ ∈ [μ0⁻, μ0⁺)`: one root below.
    OneBelow,
    /// `μ ∈ [μ0⁺, -μ0⁺]`: no roots.
    NoRoots,
    /// `μ ∈ (-μ0⁺, -μ0⁻]`: one root above.
    OneAbove,
    /// `μ > -μ0⁻`: two roots above, bracketing both η⁺.
    TwoAbove,
}

impl MuFactorCase {
    pub fn of(mu: f64) -> Self {
        let k = crate::determinant::constants();
        if mu < k.mu0_minus {
            Self::TwoBelow
        } else if mu < k.mu0_plus {
            Self::OneBelow
        } else if mu <= -k.mu0_plus {
            Self::NoRoots
        } else if mu <= -k.mu0_minus {
            Self::OneAbove
        } else {
            Self::TwoAbove
        }
    }
}

/// Roots of the factors of `Δ_{λμ}` at `K = 0`, each ascending.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorRoots {
    pub coupling: CouplingPair,
    pub lambda_case: LambdaFactorCase,
    pub mu_case: MuFactorCase,
    /// Roots `ζ^±(λ, 0)` of `1 + λ a`.
    pub zeta_lambda: Vec<Eigenvalue>,
    /// Roots `η_1^±(μ)` of `1 + μ b`.
    pub eta_b: Vec<Eigenvalue>,
    /// Roots `η_2^±(μ)` of `1 + μ f`.
    pub eta_f: Vec<Eigenvalue>,
    /// Roots `ζ_i^±(0, μ)` of `Δ_{0μ}`.
    pub zeta_mu: Vec<Eigenvalue>,
}

impl FactorRoots {
    /// `(η_min, η_max)` on `side`, when both `η` roots exist there.
    pub fn eta_range(&self, side: Side) -> Option<(f64, f64)> {
        let b = self.eta_b.iter().find(|e| e.side == side)?.z;
        let f = self.eta_f.iter().find(|e| e.side == side)?.z;
        Some((b.min(f), b.max(f)))
    }
}

/// Roots of `1 + λa`, `1 + μb`, `1 + μf` and `Δ_{0μ}` on both sides of the band.
///
/// Multiplicities are those of the determinant factor, not of the operator.
pub fn factor_roots(coupling: CouplingPair) -> Result<FactorRoots> {
    factor_roots_with(coupling, &SolverOptions::default())
}

pub fn factor_roots_with(coupling: CouplingPair, opts: &SolverOptions) -> Result<FactorRoots> {
    let [gl, gb, gf] = coupling.channel_strengths();
    let both = |g: [f64; 3]| -> Result<Vec<Eigenvalue>> {
        let mut v = Vec::new();
        for side in Side::BOTH {
            for mut e in roots_with_strengths(Quasimomentum::ZERO, side, g, opts)? {
                e.multiplicity /= 2;
                v.push(e);
            }
        }
        v.sort_by(|a, b| a.z.total_cmp(&b.z));
        Ok(v)
    };
    Ok(FactorRoots {
        coupling,
        lambda_case: LambdaFactorCase::of(coupling.lambda),
        mu_case: MuFactorCase::of(coupling.mu),
        zeta_lambda: both([gl, 0.0, 0.0])?,
        eta_b: both([0.0, gb, 0.0])?,
        eta_f: both([0.0, 0.0, gf])?,
        zeta_mu: both([0.0, gb, gf])?,
    })
}
