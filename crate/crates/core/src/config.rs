/// Centralized numeric defaults. Every stated tolerance lives here and can be
/// overridden per call through a modified copy.
#[derive(Debug, Clone)]
pub struct Config {
    /// Absolute tolerance on probability-vector normalization.
    pub prob_sum_tol: f64,
    /// Relative-change stopping criterion for fixed-point iterations
    /// (Blahut-Arimoto, Arimoto, Augustin).
    pub fixed_point_tol: f64,
    /// Iteration cap for fixed-point iterations.
    pub fixed_point_max_iters: usize,
    /// Absolute tolerance for bisection (smooth max-divergence).
    pub bisect_tol: f64,
    /// Iteration cap for bisection.
    pub bisect_max_iters: usize,
    /// Residual tolerance accepted from the LP solver.
    pub lp_tol: f64,
    /// Variable-count cap for the non-signaling LP.
    pub lp_var_cap: usize,
    /// Pure encoder/decoder pair cap for the shared-randomness LP.
    pub sr_pair_cap: usize,
    /// Entry cap for materialized product channels.
    pub product_entry_cap: usize,
    /// Output-string cap for exact protocol enumeration.
    pub enum_cap: usize,
    /// Codebook size cap for the conversion pipeline.
    pub codebook_cap: usize,
    /// Coarse grid resolution per axis for exponent optimization.
    pub grid_coarse: usize,
    /// Local refinement rounds for exponent optimization.
    pub grid_refine_rounds: usize,
    /// Inset from open-interval boundaries, applied before boundary limits
    /// are evaluated separately.
    pub grid_inset: f64,
    /// Simplex mesh denominator for the variational evaluator (spacing 1/mesh).
    pub mesh_denominator: usize,
    /// Refinement subdivision applied around variational incumbents.
    pub mesh_refine_factor: usize,
    /// Value shift above which the variational refinement flags the mesh as
    /// too coarse.
    pub mesh_coarse_flag: f64,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            prob_sum_tol: 1e-12,
            fixed_point_tol: 1e-10,
            fixed_point_max_iters: 100_000,
            bisect_tol: 1e-9,
            bisect_max_iters: 200,
            lp_tol: 1e-9,
            lp_var_cap: 200_000,
            sr_pair_cap: 10_000,
            product_entry_cap: 1 << 24,
            enum_cap: 1 << 20,
            codebook_cap: 1 << 12,
            grid_coarse: 64,
            grid_refine_rounds: 3,
            grid_inset: 1e-6,
            mesh_denominator: 24,
            mesh_refine_factor: 8,
            mesh_coarse_flag: 5e-3,
        }
    }
}
