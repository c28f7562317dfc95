#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "qct/estimators.hpp"
#include "qct/linalg.hpp"
#include "qct/measurement.hpp"

namespace qct {

enum class BootstrapMode { Parametric, NonParametric };

struct BootstrapSpec {
  BootstrapMode mode = BootstrapMode::NonParametric;
  int replicas = 20;  // B >= 2; all B(B-1)/2 pairs enter the overlap means
  std::int64_t shots_per_setting = 100;
  std::uint64_t seed = 0;
};

/// Parametric bootstrap resamples from a state's outcome probabilities;
/// non-parametric resamples from measured frequencies.
using BootstrapSource = std::variant<HermitianMatrix, DataVector>;

/// B independent datasets of frequencies, each from shots_per_setting
/// multinomial draws per setting. Replica b, setting j uses the RNG stream
/// derive_seed(spec.seed, b, j), so results do not depend on scheduling.
std::vector<DataVector> bootstrap_datasets(const BootstrapSource& source,
                                           const SettingEnsemble& ens, const BootstrapSpec& spec);

/// Overlap of the j-th (0-based) rank-1 eigenprojections: |<v1_j | v2_j>|^2.
double eigen_overlap(const Spectrum& s1, const Spectrum& s2, Eigen::Index j);

/// e_d = 1/d + sqrt(2/(d(d+1)) - 1/d^2): mean plus standard deviation of the
/// squared overlap of Haar-random vectors in dimension d.
double haar_threshold(Eigen::Index d);

struct RankSelection {
  int selected_rank = 1;         // in [1, d]
  Eigen::VectorXd mean_overlaps; // length d, mean over all unordered pairs
  double threshold = 0.0;        // e_d
  /// Some replica spectrum has an adjacent eigenvalue gap < 1e-9, making the
  /// per-index eigenprojection assignment basis dependent.
  bool degenerate = false;
};

/// Mean M_j over all unordered replica pairs; selected rank is the largest j
/// whose mean exceeds e_d, or 1 when no index passes.
RankSelection select_rank(const std::vector<Spectrum>& ensemble, Eigen::Index d);

/// rho_k = c sum_{j<=k} lambda_j E_j with c = 1 / sum_{j<=k} lambda_j.
HermitianMatrix truncate_state(const Spectrum& s, int k);
double truncation_normalization(const Spectrum& s, int k);

/// Spectral thresholding with the gamma(eps)^2 = (2d/N) log(2d/eps) cut:
/// eigenvalues below 4*gamma are zeroed and the survivors are shifted
/// uniformly to restore unit trace (clip-and-reshift iterated to a fixed
/// point). total_copies is N, the total number of prepared states (n * m).
HermitianMatrix guta_threshold_estimate(const Spectrum& s, std::int64_t total_copies, double eps,
                                        Eigen::Index d);

/// Average squared Frobenius distance between the true state and an ensemble
/// of truncated estimates.
double mean_risk(const HermitianMatrix& true_state, const std::vector<HermitianMatrix>& truncated);

/// Full support-identification pass: bootstrap B datasets from the source,
/// re-estimate each replica, and select the rank from the overlap means.
/// Replica estimations run on up to `workers` threads.
RankSelection bootstrap_rank_selection(const BootstrapSource& source, const SettingEnsemble& ens,
                                       const BootstrapSpec& spec, const std::string& estimator_name,
                                       int rank_cap, const EstimatorOptions& opts,
                                       int workers = 1);

struct ThresholdReport {
  Eigen::VectorXd eigenvalues;  // of the primary estimate, descending
  Eigen::VectorXd mean_overlaps;
  double e_d = 0.0;
  int selected_rank = 1;
  HermitianMatrix truncated_state;
  double normalization = 1.0;
  bool degenerate = false;
};

// ---------------------------------------------------------------------------
// Rank / risk simulation grid
// ---------------------------------------------------------------------------

struct GridConfig {
  int num_qubits = 4;
  std::vector<int> true_ranks{1, 2, 4, 8};
  std::vector<int> settings_counts{1, 10, 16, 32, 56, 81};
  std::vector<std::int64_t> repetitions{5, 10, 16, 100};
  int trials = 100;
  std::string estimator = "ls_pg";
  int rank_cap = 1;  // grad only
  EstimatorOptions opts;
  BootstrapMode mode = BootstrapMode::NonParametric;
  int replicas = 20;
  std::uint64_t seed = 0;
};

struct GridCellKey {
  int true_rank = 0;
  int n_settings = 0;
  std::int64_t m = 0;
  bool operator==(const GridCellKey&) const = default;
};

struct GridRow {
  GridCellKey cell;
  int trial = 0;
  int selected_rank = 0;
  double risk = 0.0;
  std::string estimator;
  std::uint64_t seed = 0;  // per-trial stream seed
};

/// Runs every (rank, settings, repetitions) cell in config order, skipping
/// cells for which is_done returns true; emits each finished cell's rows in
/// trial order. Trials within a cell run on up to `workers` threads; output
/// is deterministic for a fixed config seed regardless of scheduling.
void run_simulation_grid(const GridConfig& config,
                         const std::function<bool(const GridCellKey&)>& is_done,
                         const std::function<void(const GridCellKey&, const std::vector<GridRow>&)>& emit,
                         int workers = 1);

}  // namespace qct
