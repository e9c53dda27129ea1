#pragma once

#include <optional>
#include <string>
#include <vector>

#include "complasso/diagnostics.hpp"
#include "complasso/inference.hpp"
#include "complasso/model.hpp"
#include "complasso/sim.hpp"
#include "complasso/tuning.hpp"

namespace complasso::io {

inline constexpr const char* kEstimatesSchema = "complasso.estimates/1";
inline constexpr const char* kConditionsSchema = "complasso.conditions/1";
inline constexpr const char* kSimSchema = "complasso.simulation/1";

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<int> line_numbers;  // source line of each row (1-based)
};

// RFC 4180 style: comma separated, double-quoted fields with "" escapes,
// LF or CRLF line ends. Every row must have as many fields as the header.
CsvTable parse_csv(const std::string& text, const std::string& source = "<input>");
CsvTable read_csv(const std::string& path);
std::string csv_field(const std::string& field);
std::string format_number(double v);

// Sample table: optional leading id column (named id, sample or sample_id),
// exactly one `response` column, any number of `covariate:<name>` columns,
// everything else a taxon column holding counts or proportions.
struct InputData {
  std::vector<std::string> ids;
  std::vector<std::string> taxon_names;
  std::vector<std::string> covariate_names;
  Matrix taxa;   // n x p, nonnegative
  Vector response;
  Matrix covariates;  // n x q
};

InputData load_input(const std::string& path);
InputData parse_input(const CsvTable& table, const std::string& source);

// Positive rows are closed as is; zeros need a pseudo count. Throws
// InvalidInput with a hint when zeros are present and `pseudo` is empty.
CompositionMatrix to_composition(const InputData& data, std::optional<double> pseudo);

// Group spec: inline sizes "10,6,4", or a path to a JSON file holding either a
// list of sizes or one group label per taxon column (labels must form
// contiguous runs).
std::vector<Index> parse_group_spec(const std::string& spec, Index p,
                                    const std::vector<std::string>& taxon_names = {});
// Sizes as written, unchecked; p < 0 means unknown (label lists then define p).
std::vector<Index> group_sizes_of(const std::string& spec, Index p = -1);
std::vector<Index> parse_group_json(const std::string& text, Index p);

void write_text(const std::string& path, const std::string& content);
std::string read_text(const std::string& path);

struct FitOutputs {
  std::string estimates_json;
  std::string inference_csv;
  std::string selection_txt;
};

FitOutputs render_fit(const RegressionProblem& problem, const FitResult& fit, const TuningResult& tune,
                      const DebiasResult& debiased, const InferenceResult& inference, double gamma);

std::string render_conditions(const ConditionReport& report, const std::vector<Index>& group_sizes);

struct SimCell {
  double zeta = 0.2;
  Index p = 50;
  Index n = 100;
};

// "zeta=0.2,p=50,n=500"
SimCell parse_cell(const std::string& text);

struct SimTables {
  std::string table1_csv;
  std::string table2_csv;
  std::string coverage_csv;
  std::string lengths_csv;
  std::string report_json;
};

// Reports for each cell in `cells`, each run under each mode in `modes`
// (reports[c * modes.size() + m]).
SimTables render_simulation(const std::vector<SimCell>& cells, const std::vector<ConstraintMode>& modes,
                            const std::vector<SimReport>& reports);

}  // namespace complasso::io
