#include "qct/model_selection.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>

#include "qct/errors.hpp"
#include "qct/parallel.hpp"

namespace qct {

namespace {

// Block-wise probability validation for bootstrap sources; violations are a
// data problem, not a numerical one.
void check_probability_blocks(const DataVector& p, const SettingEnsemble& ens) {
  const Eigen::Index d = ens.hilbert_dim();
  for (std::size_t j = 0; j < ens.settings.size(); ++j) {
    double sum = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) {
      const double v = p(static_cast<Eigen::Index>(j) * d + k);
      if (v < -1e-12 || v > 1.0 + 1e-12)
        throw DataError("bootstrap: probability " + std::to_string(v) + " in setting " +
                        ens.settings[j].str() + " outside [-1e-12, 1+1e-12]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-8)
      throw DataError("bootstrap: probabilities of setting " + ens.settings[j].str() +
                      " sum to " + std::to_string(sum));
  }
}

}  // namespace

std::vector<DataVector> bootstrap_datasets(const BootstrapSource& source,
                                           const SettingEnsemble& ens,
                                           const BootstrapSpec& spec) {
  ens.validate();
  if (spec.replicas < 2) throw std::invalid_argument("bootstrap: need at least 2 replicas");
  if (spec.shots_per_setting < 1)
    throw std::invalid_argument("bootstrap: shots_per_setting must be >= 1");

  DataVector probs;
  if (spec.mode == BootstrapMode::Parametric) {
    const auto* state = std::get_if<HermitianMatrix>(&source);
    if (!state)
      throw std::invalid_argument("bootstrap: parametric mode requires a state source");
    probs = apply_sampling_operator(*state, ens);
  } else {
    const auto* freqs = std::get_if<DataVector>(&source);
    if (!freqs)
      throw std::invalid_argument("bootstrap: non-parametric mode requires measured frequencies");
    if (freqs->size() != ens.data_length())
      throw DataError("bootstrap: frequency vector length does not match ensemble");
    probs = *freqs;
  }
  check_probability_blocks(probs, ens);

  const Eigen::Index d = ens.hilbert_dim();
  const auto n_settings = static_cast<Eigen::Index>(ens.settings.size());
  // Clip round-off negatives once; blocks were already validated.
  std::vector<Eigen::VectorXd> blocks(static_cast<std::size_t>(n_settings));
  for (Eigen::Index j = 0; j < n_settings; ++j) {
    Eigen::VectorXd block = probs.segment(j * d, d);
    detail::normalize_probabilities(block);
    blocks[static_cast<std::size_t>(j)] = std::move(block);
  }

  std::vector<DataVector> datasets;
  datasets.reserve(static_cast<std::size_t>(spec.replicas));
  const double inv_m = 1.0 / static_cast<double>(spec.shots_per_setting);
  for (int b = 0; b < spec.replicas; ++b) {
    DataVector y(ens.data_length());
    for (Eigen::Index j = 0; j < n_settings; ++j) {
      Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(b),
                          static_cast<std::uint64_t>(j)));
      const auto counts = detail::multinomial_counts(blocks[static_cast<std::size_t>(j)],
                                                     spec.shots_per_setting, rng);
      for (Eigen::Index k = 0; k < d; ++k)
        y(j * d + k) = static_cast<double>(counts[static_cast<std::size_t>(k)]) * inv_m;
    }
    datasets.push_back(std::move(y));
  }
  return datasets;
}

double eigen_overlap(const Spectrum& s1, const Spectrum& s2, Eigen::Index j) {
  if (s1.dim() != s2.dim()) throw std::invalid_argument("eigen_overlap: dimension mismatch");
  if (j < 0 || j >= s1.dim()) throw std::invalid_argument("eigen_overlap: index out of range");
  const std::complex<double> ip = s1.eigenvectors.col(j).dot(s2.eigenvectors.col(j));
  return std::norm(ip);
}

double haar_threshold(Eigen::Index d) {
  if (d < 1) throw std::invalid_argument("haar_threshold: dimension must be >= 1");
  const double dd = static_cast<double>(d);
  const double var = 2.0 / (dd * (dd + 1.0)) - 1.0 / (dd * dd);
  return 1.0 / dd + std::sqrt(std::max(var, 0.0));
}

RankSelection select_rank(const std::vector<Spectrum>& ensemble, Eigen::Index d) {
  if (ensemble.size() < 2)
    throw std::invalid_argument("select_rank: need at least 2 replica spectra");
  for (const auto& s : ensemble) {
    if (s.dim() != d) throw std::invalid_argument("select_rank: spectrum dimension mismatch");
  }

  RankSelection sel;
  sel.threshold = haar_threshold(d);
  sel.mean_overlaps = Eigen::VectorXd::Zero(d);
  std::size_t pairs = 0;
  for (std::size_t a = 0; a < ensemble.size(); ++a) {
    for (std::size_t b = a + 1; b < ensemble.size(); ++b) {
      ++pairs;
      for (Eigen::Index j = 0; j < d; ++j)
        sel.mean_overlaps(j) += eigen_overlap(ensemble[a], ensemble[b], j);
    }
  }
  sel.mean_overlaps /= static_cast<double>(pairs);

  sel.selected_rank = 1;  // rank-one default when nothing is significant
  for (Eigen::Index j = d - 1; j >= 0; --j) {
    if (sel.mean_overlaps(j) > sel.threshold) {
      sel.selected_rank = static_cast<int>(j) + 1;
      break;
    }
  }
  for (const auto& s : ensemble) sel.degenerate = sel.degenerate || s.has_degenerate_cluster();
  return sel;
}

double truncation_normalization(const Spectrum& s, int k) {
  if (k < 1 || k > s.dim()) throw std::invalid_argument("truncate_state: need 1 <= k <= d");
  const double mass = s.eigenvalues.head(k).sum();
  if (!(mass > 0.0))
    throw NumericalError("truncate_state: top-" + std::to_string(k) +
                         " eigenvalue mass is not positive");
  return 1.0 / mass;
}

HermitianMatrix truncate_state(const Spectrum& s, int k) {
  const double c = truncation_normalization(s, k);
  const Eigen::MatrixXcd v = s.eigenvectors.leftCols(k);
  const Eigen::VectorXd lam = c * s.eigenvalues.head(k);
  return HermitianMatrix(v * lam.asDiagonal() * v.adjoint());
}

HermitianMatrix guta_threshold_estimate(const Spectrum& s, std::int64_t total_copies, double eps,
                                        Eigen::Index d) {
  if (total_copies < 1) throw std::invalid_argument("guta_threshold_estimate: N must be >= 1");
  if (!(eps > 0.0 && eps < 1.0))
    throw std::invalid_argument("guta_threshold_estimate: eps must lie in (0,1)");
  if (s.dim() != d) throw std::invalid_argument("guta_threshold_estimate: dimension mismatch");

  const double dd = static_cast<double>(d);
  const double gamma =
      std::sqrt(2.0 * dd / static_cast<double>(total_copies) * std::log(2.0 * dd / eps));
  const double cut = 4.0 * gamma;

  std::vector<Eigen::Index> active;
  for (Eigen::Index j = 0; j < d; ++j) {
    if (s.eigenvalues(j) >= cut) active.push_back(j);
  }
  if (active.empty())
    throw NumericalError("guta_threshold_estimate: all eigenvalues fall below 4*gamma = " +
                         std::to_string(cut));

  // Uniform shift to restore unit trace; clip-and-reshift until stable.
  Eigen::VectorXd lam = Eigen::VectorXd::Zero(d);
  for (;;) {
    double mass = 0.0;
    for (Eigen::Index j : active) mass += s.eigenvalues(j);
    const double shift = (1.0 - mass) / static_cast<double>(active.size());
    std::vector<Eigen::Index> survivors;
    for (Eigen::Index j : active) {
      if (s.eigenvalues(j) + shift >= 0.0) survivors.push_back(j);
    }
    if (survivors.empty())
      throw NumericalError("guta_threshold_estimate: trace shift removed every eigenvalue");
    if (survivors.size() == active.size()) {
      for (Eigen::Index j : active) lam(j) = s.eigenvalues(j) + shift;
      break;
    }
    active.swap(survivors);
  }

  return HermitianMatrix(s.eigenvectors * lam.asDiagonal() * s.eigenvectors.adjoint());
}

double mean_risk(const HermitianMatrix& true_state,
                 const std::vector<HermitianMatrix>& truncated) {
  if (truncated.empty()) throw std::invalid_argument("mean_risk: empty ensemble");
  double acc = 0.0;
  for (const auto& t : truncated) acc += frobenius_dist_sq(true_state, t);
  return acc / static_cast<double>(truncated.size());
}

RankSelection bootstrap_rank_selection(const BootstrapSource& source, const SettingEnsemble& ens,
                                       const BootstrapSpec& spec,
                                       const std::string& estimator_name, int rank_cap,
                                       const EstimatorOptions& opts, int workers) {
  const std::vector<DataVector> datasets = bootstrap_datasets(source, ens, spec);
  std::vector<std::optional<Spectrum>> spectra(datasets.size());
  parallel_for(static_cast<int>(datasets.size()), workers, [&](int b) {
    EstimatorOptions replica_opts = opts;
    replica_opts.init_seed = derive_seed(spec.seed, 0x5eedULL, static_cast<std::uint64_t>(b));
    const EstimateResult est =
        estimate(estimator_name, datasets[static_cast<std::size_t>(b)], ens, rank_cap,
                 replica_opts);
    spectra[static_cast<std::size_t>(b)] = herm_eig(est.rho_hat);
  });

  std::vector<Spectrum> collected;
  collected.reserve(spectra.size());
  for (auto& s : spectra) collected.push_back(std::move(*s));
  return select_rank(collected, ens.hilbert_dim());
}

void run_simulation_grid(
    const GridConfig& config, const std::function<bool(const GridCellKey&)>& is_done,
    const std::function<void(const GridCellKey&, const std::vector<GridRow>&)>& emit,
    int workers) {
  if (config.trials < 1) throw std::invalid_argument("simulation grid: trials must be >= 1");
  const Eigen::Index d = Eigen::Index(1) << config.num_qubits;

  std::uint64_t cell_index = 0;
  for (int rank : config.true_ranks) {
    if (rank < 1 || rank > d)
      throw std::invalid_argument("simulation grid: true rank outside [1, d]");
    for (int n_settings : config.settings_counts) {
      for (std::int64_t m : config.repetitions) {
        const GridCellKey cell{rank, n_settings, m};
        ++cell_index;
        if (is_done && is_done(cell)) continue;

        std::vector<GridRow> rows(static_cast<std::size_t>(config.trials));
        parallel_for(config.trials, workers, [&](int trial) {
          const std::uint64_t trial_seed =
              derive_seed(config.seed, cell_index, static_cast<std::uint64_t>(trial));
          Rng rng(trial_seed);
          const HermitianMatrix rho_true = random_fixed_rank_state(d, rank, rng);
          const SettingEnsemble ens = random_settings(config.num_qubits, n_settings, rng);

          DataVector freqs(ens.data_length());
          const std::uint64_t data_seed = derive_seed(trial_seed, 1);
          for (std::size_t j = 0; j < ens.settings.size(); ++j) {
            Rng setting_rng(derive_seed(data_seed, static_cast<std::uint64_t>(j)));
            const MeasurementRecord rec =
                simulate_counts(rho_true, ens.settings[j], m, setting_rng);
            freqs.segment(static_cast<Eigen::Index>(j) * d, d) = rec.frequencies();
          }

          EstimatorOptions opts = config.opts;
          opts.init_seed = derive_seed(trial_seed, 2);
          const EstimateResult est =
              estimate(config.estimator, freqs, ens, config.rank_cap, opts);

          BootstrapSpec bspec;
          bspec.mode = config.mode;
          bspec.replicas = config.replicas;
          bspec.shots_per_setting = m;
          bspec.seed = derive_seed(trial_seed, 3);
          BootstrapSource source =
              config.mode == BootstrapMode::Parametric ? BootstrapSource(est.rho_hat)
                                                       : BootstrapSource(freqs);
          const RankSelection sel = bootstrap_rank_selection(source, ens, bspec,
                                                             config.estimator, config.rank_cap,
                                                             config.opts, 1);

          const Spectrum spec = herm_eig(est.rho_hat);
          const HermitianMatrix truncated = truncate_state(spec, sel.selected_rank);

          GridRow& row = rows[static_cast<std::size_t>(trial)];
          row.cell = cell;
          row.trial = trial;
          row.selected_rank = sel.selected_rank;
          row.risk = frobenius_dist_sq(rho_true, truncated);
          row.estimator = config.estimator;
          row.seed = trial_seed;
        });
        emit(cell, rows);
      }
    }
  }
}

}  // namespace qct
