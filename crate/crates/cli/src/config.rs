//! JSON run configuration and its translation into a problem and solver.
//!
//! Relative file paths are resolved against the directory holding the config.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use padmm::nalgebra::{DMatrix, DVector};
use padmm::oracles::{gram_max_eigenvalue, ProxLinear, QuadraticSmooth};
use padmm::problems::{
    build_scad_mcp_regression, build_slr_decomposition, gen_slr_instance, gen_sparse_regression,
    penalty_weak_convexity, ScadMcpRegressionConfig, SlrConfig, DEFAULT_TAU_FACTOR, TAU_MARGIN,
};
use padmm::{BlockSpec, CheckLevel, LinearOperator, McpParams, Penalty, ProblemSpec, ScadParams, SolverConfig};
use serde::Deserialize;

use crate::matrix_io::{load_matrix, load_vector};

/// Default `α` as a multiple of the Lipschitz constant of `∇h`.
pub const DEFAULT_ALPHA_FACTOR: f64 = 1.1;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Seed for generated instances.
    #[serde(default)]
    pub seed: u64,
    pub problem: ProblemSection,
    #[serde(default)]
    pub solver: SolverSection,
    #[serde(default)]
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSection {
    ScadRegression(RegressionSection),
    McpRegression(RegressionSection),
    Slr(SlrSection),
    Custom(CustomSection),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegressionSection {
    pub lambda: f64,
    pub theta: f64,
    pub mu: f64,
    /// Absolute prox-linear curvature; overrides `tau_factor`.
    pub tau: Option<f64>,
    /// `τ = tau_factor · λ_max(𝒜ᵀ𝒜)`, default 1.5.
    pub tau_factor: Option<f64>,
    pub data: RegressionData,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegressionData {
    Generate { m: usize, n: usize, nnz: usize, noise_sd: f64 },
    Files { a: PathBuf, y0: PathBuf },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlrSection {
    pub r: usize,
    pub s: usize,
    #[serde(default = "one")]
    pub alpha1: f64,
    #[serde(default = "one")]
    pub alpha2: f64,
    pub alpha3: f64,
    #[serde(default = "one")]
    pub q1: f64,
    #[serde(default = "one")]
    pub q2: f64,
    pub lambda_step: Option<f64>,
    pub gamma_step: Option<f64>,
    #[serde(default)]
    pub exact_prox: bool,
    pub data: SlrData,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case", deny_unknown_fields)]
pub enum SlrData {
    /// Rank and cardinality of the generated parts default to `r` and `s`.
    Generate { m: usize, n: usize, rank: Option<usize>, nnz: Option<usize> },
    Files { a: PathBuf },
}

/// Prox-linear penalised blocks coupled to a least-squares `y`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomSection {
    pub blocks: Vec<CustomBlock>,
    /// `B`; defaults to `−I`.
    pub coupling: Option<PathBuf>,
    /// `b`; defaults to zero.
    pub offset: Option<PathBuf>,
    /// `h(y) = (μ/2)‖y − target‖²`.
    pub mu: f64,
    /// Defaults to zero.
    pub target: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomBlock {
    pub a: PathBuf,
    pub penalty: Penalty,
    pub tau: Option<f64>,
    pub tau_factor: Option<f64>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    /// Defaults to `1.1 · L_h`, which is `1.1 μ` for the regression problems.
    pub alpha: Option<f64>,
    pub beta: f64,
    /// `P = p · I`, ignored when `p_matrix` is set.
    pub p: f64,
    pub p_matrix: Option<PathBuf>,
    pub epsilon0: f64,
    pub max_iter: usize,
    pub tol_residual: f64,
    pub tol_step: f64,
    pub check_level: CheckLevel,
}

impl Default for SolverSection {
    fn default() -> Self {
        let base = SolverConfig::new(1.0, 1.0, LinearOperator::zeros(0));
        SolverSection {
            alpha: None,
            beta: base.beta,
            p: 0.0,
            p_matrix: None,
            epsilon0: base.epsilon0,
            max_iter: base.max_iter,
            tol_residual: base.tol_residual,
            tol_step: base.tol_step,
            check_level: base.check_level,
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub trace: Option<PathBuf>,
    pub report: Option<PathBuf>,
    #[serde(default)]
    pub format: ReportFormat,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Json,
    Text,
}

fn one() -> f64 {
    1.0
}

/// Parse a config; errors carry the JSON line and column.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| anyhow::anyhow!("config line {} column {}: {e}", e.line(), e.column()))
}

/// A parsed config with the directory its relative paths refer to.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub base_dir: PathBuf,
}

impl LoadedConfig {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let config = parse_config(&text).with_context(|| format!("in {}", path.display()))?;
        let base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(LoadedConfig { config, base_dir })
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn trace_path(&self) -> Option<PathBuf> {
        self.config.output.trace.as_deref().map(|p| self.resolve(p))
    }

    pub fn report_path(&self) -> Option<PathBuf> {
        self.config.output.report.as_deref().map(|p| self.resolve(p))
    }

    /// Build the problem and the solver configuration it was built for.
    pub fn build(&self) -> Result<(ProblemSpec, SolverConfig)> {
        let s = &self.config.solver;
        if !(s.beta > 0.0 && s.beta < 2.0) {
            bail!("solver.beta must lie in (0, 2), got {}", s.beta);
        }
        let seed = self.config.seed;
        match &self.config.problem {
            ProblemSection::ScadRegression(r) => {
                let params = ScadParams::new(r.lambda, r.theta)?;
                self.build_regression(r, Penalty::Scad(params), seed)
            }
            ProblemSection::McpRegression(r) => {
                let params = McpParams::new(r.lambda, r.theta)?;
                self.build_regression(r, Penalty::Mcp(params), seed)
            }
            ProblemSection::Slr(sec) => self.build_slr(sec, seed),
            ProblemSection::Custom(c) => self.build_custom(c),
        }
    }

    fn solver(&self, lipschitz_h: f64, q: usize) -> Result<SolverConfig> {
        let s = &self.config.solver;
        let alpha = s.alpha.unwrap_or(DEFAULT_ALPHA_FACTOR * lipschitz_h);
        let p = match &s.p_matrix {
            Some(path) => LinearOperator::dense(load_matrix(&self.resolve(path))?),
            None => LinearOperator::scaled_identity(q, s.p),
        };
        let cfg = SolverConfig {
            alpha,
            beta: s.beta,
            p,
            epsilon0: s.epsilon0,
            max_iter: s.max_iter,
            tol_residual: s.tol_residual,
            tol_step: s.tol_step,
            check_level: s.check_level,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn build_regression(&self, r: &RegressionSection, penalty: Penalty, seed: u64) -> Result<(ProblemSpec, SolverConfig)> {
        let (a, y0) = match &r.data {
            RegressionData::Generate { m, n, nnz, noise_sd } => {
                let inst = gen_sparse_regression(*m, *n, *nnz, *noise_sd, seed)?;
                (inst.a, inst.y0)
            }
            RegressionData::Files { a, y0 } => (load_matrix(&self.resolve(a))?, load_vector(&self.resolve(y0))?),
        };
        let m = a.nrows();
        let mut cfg = ScadMcpRegressionConfig::new(a, y0, r.mu, penalty);
        cfg.tau = resolve_tau(r.tau, r.tau_factor, &cfg.a_meas);
        let solver = self.solver(r.mu, m)?;
        Ok((build_scad_mcp_regression(&cfg, &solver)?, solver))
    }

    fn build_slr(&self, sec: &SlrSection, seed: u64) -> Result<(ProblemSpec, SolverConfig)> {
        let a = match &sec.data {
            SlrData::Generate { m, n, rank, nnz } => {
                gen_slr_instance(*m, *n, rank.unwrap_or(sec.r), nnz.unwrap_or(sec.s), seed)?.a
            }
            SlrData::Files { a } => load_matrix(&self.resolve(a))?,
        };
        let dim = a.len();
        let cfg = SlrConfig {
            a_data: a,
            r: sec.r,
            s: sec.s,
            alpha1: sec.alpha1,
            alpha2: sec.alpha2,
            alpha3: sec.alpha3,
            q1: sec.q1,
            q2: sec.q2,
            lambda_step: sec.lambda_step,
            gamma_step: sec.gamma_step,
            exact_prox: sec.exact_prox,
        };
        // L_h = 8α₃ for the column-difference energy.
        let solver = self.solver(8.0 * sec.alpha3, dim)?;
        Ok((build_slr_decomposition(&cfg, &solver)?, solver))
    }

    fn build_custom(&self, c: &CustomSection) -> Result<(ProblemSpec, SolverConfig)> {
        if c.blocks.is_empty() {
            bail!("custom problem needs at least one block");
        }
        let mats = c
            .blocks
            .iter()
            .map(|b| load_matrix(&self.resolve(&b.a)))
            .collect::<Result<Vec<_>>>()?;
        let m = mats[0].nrows();
        let coupling = match &c.coupling {
            Some(p) => LinearOperator::dense(load_matrix(&self.resolve(p))?),
            None => LinearOperator::scaled_identity(m, -1.0),
        };
        let q = coupling.ncols();
        let offset = match &c.offset {
            Some(p) => load_vector(&self.resolve(p))?,
            None => DVector::zeros(m),
        };
        let target = match &c.target {
            Some(p) => load_vector(&self.resolve(p))?,
            None => DVector::zeros(q),
        };
        let solver = self.solver(c.mu, q)?;
        let mut blocks = Vec::with_capacity(mats.len());
        for (i, (spec, a)) in c.blocks.iter().zip(mats).enumerate() {
            let tau = resolve_tau(spec.tau, spec.tau_factor, &a);
            let lmax = gram_max_eigenvalue(&a);
            if !(tau >= lmax * (1.0 + TAU_MARGIN)) {
                bail!("block {i}: tau = {tau} must exceed lambda_max(A^T A) = {lmax}");
            }
            let a = LinearOperator::dense(a);
            let qm = ProxLinear::proximal_matrix(&a, solver.alpha, tau);
            let mut block = BlockSpec::new(a, qm, ProxLinear::new(spec.penalty, tau)?);
            if let Some(eps) = penalty_weak_convexity(&spec.penalty) {
                block = block.with_weak_convexity(eps);
            }
            blocks.push(block);
        }
        let smooth = QuadraticSmooth::least_squares(c.mu, &target)?;
        Ok((ProblemSpec::new(blocks, smooth, coupling, offset)?, solver))
    }
}

fn resolve_tau(tau: Option<f64>, factor: Option<f64>, a: &DMatrix<f64>) -> f64 {
    tau.unwrap_or_else(|| factor.unwrap_or(DEFAULT_TAU_FACTOR) * gram_max_eigenvalue(a))
}

