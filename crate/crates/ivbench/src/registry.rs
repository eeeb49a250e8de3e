//! Solver variants behind one trait, looked up by name.

use std::collections::BTreeMap;
use std::fmt;

use impvol::seeds::{dispatch_with, LiCoefficients};
use impvol::solver::{bachelier_limit_branch, h3_step_with, solve_normalized, upper_branch};
use impvol::{denormalize, ErfcxTier, GuessBranch, IvError, NormalizedQuote, SolverConfig, SolverResult};

pub const DEFAULT_VARIANT: &str = "flashiv";

pub trait Variant: Send + Sync {
    fn name(&self) -> &'static str;
    fn about(&self) -> &'static str;
    fn solve(&self, q: &NormalizedQuote) -> Result<SolverResult, IvError>;
}

/// The production path with a fixed configuration.
pub struct FixedCount {
    name: &'static str,
    about: &'static str,
    cfg: SolverConfig,
}

impl FixedCount {
    pub fn flashiv() -> Self {
        FixedCount {
            name: "flashiv",
            about: "seed, 1 fast + 2 exact H3 steps, conditional safety step",
            cfg: SolverConfig::default(),
        }
    }

    pub fn flashiv_plus() -> Self {
        FixedCount {
            name: "flashiv-plus",
            about: "flashiv followed by one Newton step against the double-double price",
            cfg: SolverConfig::polished(),
        }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }
}

impl Variant for FixedCount {
    fn name(&self) -> &'static str {
        self.name
    }

    fn about(&self) -> &'static str {
        self.about
    }

    #[inline]
    fn solve(&self, q: &NormalizedQuote) -> Result<SolverResult, IvError> {
        solve_normalized(q, &self.cfg)
    }
}

/// Same seeds, guards and steps as [`FixedCount::flashiv`], but the exact
/// steps run in a loop until `|f| < tol * max(1, |ln c|)` or `max_steps`.
pub struct LoopedH3 {
    pub tol: f64,
    pub max_steps: u8,
    cfg: SolverConfig,
}

impl LoopedH3 {
    pub fn new(tol: f64, max_steps: u8) -> Self {
        LoopedH3 { tol, max_steps, cfg: SolverConfig::default() }
    }
}

impl Default for LoopedH3 {
    fn default() -> Self {
        LoopedH3::new(1e-14, 8)
    }
}

impl Variant for LoopedH3 {
    fn name(&self) -> &'static str {
        "looped-h3"
    }

    fn about(&self) -> &'static str {
        "flashiv with a residual-checked loop of exact steps instead of a fixed count"
    }

    fn solve(&self, q: &NormalizedQuote) -> Result<SolverResult, IvError> {
        let cfg = &self.cfg;
        let (v0, branch) = dispatch_with(q, LiCoefficients::fitted(), cfg.upper_guard);
        let v0 = v0.max(cfg.seed_floor);
        let mut out = SolverResult {
            sigma: 0.0,
            total_vol: 0.0,
            branch,
            fast_steps: 0,
            exact_steps: 0,
            safety_fired: false,
            residual: 0.0,
            polished: false,
        };
        let v = match branch {
            GuessBranch::BachelierLimit => bachelier_limit_branch(q),
            GuessBranch::UpperPrice => upper_branch(q, v0),
            _ => {
                let (x, lnc, floor) = (q.x(), q.lnc(), cfg.seed_floor);
                let tol = self.tol * lnc.abs().max(1.0);
                let (mut v, _) = h3_step_with(x, v0, lnc, ErfcxTier::Fast, floor);
                out.fast_steps = 1;
                loop {
                    let (next, f) = h3_step_with(x, v, lnc, ErfcxTier::Exact, floor);
                    v = next;
                    out.exact_steps += 1;
                    out.residual = f.abs();
                    if out.residual < tol || out.exact_steps >= self.max_steps {
                        break;
                    }
                }
                v
            }
        };
        if !(v.is_finite() && v > 0.0) {
            return Err(IvError::DegenerateResult);
        }
        out.total_vol = v;
        out.sigma = denormalize(v, q.expiry());
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UnknownVariant(pub String);

impl fmt::Display for UnknownVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown variant {:?}", self.0)
    }
}

impl std::error::Error for UnknownVariant {}

pub struct Registry {
    entries: BTreeMap<&'static str, Box<dyn Variant>>,
}

impl Registry {
    pub fn empty() -> Self {
        Registry { entries: BTreeMap::new() }
    }

    /// `flashiv`, `flashiv-plus` and `looped-h3`.
    pub fn builtin() -> Self {
        let mut r = Registry::empty();
        r.register(Box::new(FixedCount::flashiv()));
        r.register(Box::new(FixedCount::flashiv_plus()));
        r.register(Box::new(LoopedH3::default()));
        r
    }

    /// Adds a variant, replacing any previous one with the same name.
    pub fn register(&mut self, v: Box<dyn Variant>) -> Option<Box<dyn Variant>> {
        self.entries.insert(v.name(), v)
    }

    pub fn get(&self, name: &str) -> Result<&dyn Variant, UnknownVariant> {
        self.entries.get(name).map(|b| b.as_ref()).ok_or_else(|| UnknownVariant(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &'static str> + '_ {
        self.entries.keys().copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &dyn Variant> {
        self.entries.values().map(|b| b.as_ref())
    }
}

impl Default for Registry {
    fn default() -> Self {
        Registry::builtin()
    }
}
