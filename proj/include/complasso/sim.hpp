#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "complasso/cdmm.hpp"
#include "complasso/debias.hpp"
#include "complasso/model.hpp"
#include "complasso/rng.hpp"

// Simulation harness: log-normal taxon counts, zero-sum log-contrast response,
// scaled-lasso fit, de-biased intervals, selection, refits and test-set
// prediction error, repeated over independent random substreams.
namespace complasso {

enum class ConstraintMode { kMultiple, kOne, kNone, kMisspecified };

const char* to_string(ConstraintMode mode);
ConstraintMode parse_constraint_mode(const std::string& text);

// beta = (1, -0.8, 0.4, 0, 0, -0.6, 0, 0, 0, 0, -1.5, 0, 1.2, 0, 0, 0.3, 0, ..., 0)
Vector default_beta(Index p);

// Sizes [10, 6, 4, 3, 7, 2, 8, p - 40].
std::vector<Index> multiple_group_sizes(Index p);

// Blocks 1-5, 6-12, 13-23, 24-30, 31-p: sizes [5, 7, 11, 7, p - 30].
ConstraintSet misspecified_constraints(Index p);

ConstraintSet constraints_for(ConstraintMode mode, Index p);

struct SimConfig {
  Index p = 50;
  Index n = 100;
  double zeta = 0.2;
  int n_reps = 100;
  double sigma_noise = 0.5;
  std::uint64_t seed = 1;
  Vector beta_true;  // empty means default_beta(p)
  ConstraintMode constraint_mode = ConstraintMode::kMultiple;
  double alpha = 0.05;
  int threads = 1;
  CdmmSettings cdmm;
  QpSettings qp;

  // Fills beta_true if empty and checks ranges. Throws InvalidInput when the
  // true coefficients violate the correct (multiple) constraints.
  void finalize();
  Vector nu() const;
};

struct Dataset {
  CompositionMatrix composition;
  Matrix log_counts;       // log W
  Matrix log_composition;  // z_ij = log(w_ij / sum_k w_ik)
  Vector y;
  Vector noise;
};

// n rows of log W ~ N(nu, Sigma_zeta) with Sigma_ij = zeta^|i-j|, closed to
// proportions; y = Z beta + sigma eps. Draws from `stream` in row order.
Dataset gen_dataset(const SimConfig& config, Index n, RandomStream& stream);

// Training set then an independent test set of the same size, both from
// substream `rep` of config.seed.
struct ReplicationData {
  Dataset train;
  Dataset test;
};
ReplicationData gen_replication(const SimConfig& config, std::uint64_t rep);

struct ReplicationResult {
  bool ok = false;
  std::string error;
  std::vector<bool> covered;       // beta_i in interval
  std::vector<double> ci_length;
  double tpr = 0.0;
  double fpr = 0.0;
  double pred_lasso = 0.0;
  double pred_refit_lasso = 0.0;   // NaN when the refit is singular
  double pred_refit_ci = 0.0;
  double sigma_hat = 0.0;
  double lambda_hat = 0.0;
  int escalated_rows = 0;
};

ReplicationResult run_replication(const SimConfig& config, std::uint64_t rep);

struct Summary {
  double min = 0.0;
  double median = 0.0;
  double mean = 0.0;
  double max = 0.0;
};

Summary summarize(std::vector<double> values);

struct SimReport {
  SimConfig config;
  int completed = 0;
  int failed = 0;
  std::vector<std::string> failures;     // "rep <r>: <message>"
  Vector coverage;                       // per coordinate
  Summary coverage_summary;              // across coordinates
  std::vector<Summary> length_by_coord;  // across replications
  double mean_length = 0.0;              // mean over coordinates and replications
  double tpr = 0.0;
  double fpr = 0.0;
  double pred_lasso = 0.0;
  double pred_refit_lasso = 0.0;
  double pred_refit_ci = 0.0;
  int refit_lasso_failed = 0;
  int refit_ci_failed = 0;
  int escalated_rows = 0;
  double seconds = 0.0;  // wall time, excluded from written artifacts
};

SimReport run_experiment(SimConfig config);

}  // namespace complasso
