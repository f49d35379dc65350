/// Strategy parameters for ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct Params {
    /// Fold-dup once the average number of vertices per rank drops below this.
    pub fold_min: usize,
    /// Stop coarsening at or below this many vertices.
    pub coarsest_size: usize,
    /// Maximum matching supersteps per level.
    pub match_passes: usize,
    /// Stop matching once fewer than this fraction of vertices remain available.
    pub match_stop_fraction: f64,
    /// Stop coarsening when coarse/fine vertex ratio exceeds this.
    pub ratio_max: f64,
    /// Band width for refinement; `None` refines on the whole graph.
    pub band_width: Option<usize>,
    /// Allowed imbalance |w0 - w1| / total.
    pub balance_tol: f64,
    /// Consecutive non-improving FM moves tolerated before a pass ends.
    pub fm_backtrack: usize,
    /// Maximum FM passes.
    pub fm_pass_max: usize,
    /// Separator vertices moved at random before a perturbed FM run.
    pub perturb_moves: usize,
    /// Largest band graph centralized on every rank.
    pub band_max: usize,
    /// Initial separator attempts on the coarsest graph.
    pub tries: usize,
    /// Subgraphs at or below this size are ordered by minimum degree.
    pub nd_cutoff: usize,
}

impl Default for Params {
    fn default() -> Self {
        Params {
            fold_min: 100,
            coarsest_size: 120,
            match_passes: 8,
            match_stop_fraction: 0.02,
            ratio_max: 0.8,
            band_width: Some(3),
            balance_tol: 0.2,
            fm_backtrack: 40,
            fm_pass_max: 10,
            perturb_moves: 4,
            band_max: 100_000,
            tries: 4,
            nd_cutoff: 120,
        }
    }
}

impl Params {
    /// Compact description recorded in permutation file headers.
    pub fn describe(&self) -> String {
        let band = self.band_width.map_or_else(|| "none".to_string(), |w| w.to_string());
        format!(
            "fold-min={} coarsest-size={} match-passes={} ratio-max={} band-width={} balance-tol={} fm-passes={} tries={} nd-cutoff={}",
            self.fold_min,
            self.coarsest_size,
            self.match_passes,
            self.ratio_max,
            band,
            self.balance_tol,
            self.fm_pass_max,
            self.tries,
            self.nd_cutoff
        )
    }
}
