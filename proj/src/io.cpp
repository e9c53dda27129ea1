#include "complasso/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include "json.hpp"
#include <set>
#include <sstream>

namespace complasso::io {

using nlohmann::json;

CsvTable parse_csv(const std::string& text, const std::string& source) {
  CsvTable table;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  int line = 1;
  int record_line = 1;
  auto end_record = [&] {
    record.push_back(field);
    field.clear();
    field_started = false;
    const bool blank = record.size() == 1 && record[0].empty();
    if (!blank) {
      if (table.header.empty()) {
        table.header = std::move(record);
      } else {
        if (record.size() != table.header.size()) {
          throw InvalidInput(source + ":" + std::to_string(record_line) + ": expected " +
                             std::to_string(table.header.size()) + " fields, found " + std::to_string(record.size()));
        }
        table.rows.push_back(std::move(record));
        table.line_numbers.push_back(record_line);
      }
    }
    record.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      record.push_back(field);
      field.clear();
      field_started = false;
    } else if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') {
      // handled with the following LF
    } else if (c == '\n') {
      end_record();
      ++line;
      record_line = line;
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) throw InvalidInput(source + ":" + std::to_string(record_line) + ": unterminated quoted field");
  if (!field.empty() || !record.empty()) end_record();
  if (table.header.empty()) throw InvalidInput(source + ": empty CSV");
  return table;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write '" + path + "'");
  out << content;
  if (!out) throw InvalidInput("failed writing '" + path + "'");
}

CsvTable read_csv(const std::string& path) { return parse_csv(read_text(path), path); }

std::string csv_field(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  double v = 0.0;
  const char* first = s.data();
  const char* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (s.empty() || ec != std::errc() || ptr != last || !std::isfinite(v)) {
    throw InvalidInput(where + ": '" + raw + "' is not a finite number");
  }
  return v;
}

long parse_long(const std::string& raw, const std::string& where) {
  const std::string s = trim(raw);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw InvalidInput(where + ": '" + raw + "' is not an integer");
  }
  return v;
}

bool is_id_name(const std::string& h) {
  return h.empty() || h == "id" || h == "sample" || h == "sample_id";
}

constexpr const char* kCovariatePrefix = "covariate:";

}  // namespace

InputData parse_input(const CsvTable& table, const std::string& source) {
  InputData data;
  const auto& h = table.header;
  std::optional<std::size_t> id_col;
  std::optional<std::size_t> response_col;
  std::vector<std::size_t> taxon_cols;
  std::vector<std::size_t> cov_cols;
  std::set<std::string> seen;
  for (std::size_t c = 0; c < h.size(); ++c) {
    const std::string name = trim(h[c]);
    if (c == 0 && is_id_name(name)) {
      id_col = c;
      continue;
    }
    if (name.empty()) throw InvalidInput(source + ":1: column " + std::to_string(c + 1) + " has an empty name");
    if (!seen.insert(name).second) throw InvalidInput(source + ":1: duplicate column '" + name + "'");
    if (name == "response") {
      response_col = c;
    } else if (name.rfind(kCovariatePrefix, 0) == 0) {
      const std::string cov = name.substr(std::string(kCovariatePrefix).size());
      if (cov.empty()) throw InvalidInput(source + ":1: covariate column without a name");
      cov_cols.push_back(c);
      data.covariate_names.push_back(cov);
    } else {
      taxon_cols.push_back(c);
      data.taxon_names.push_back(name);
    }
  }
  if (!response_col) throw InvalidInput(source + ":1: no 'response' column");
  if (taxon_cols.size() < 2) throw InvalidInput(source + ":1: need at least two taxon columns");
  const Index n = static_cast<Index>(table.rows.size());
  if (n < 3) throw InvalidInput(source + ": need at least three samples");

  data.taxa.resize(n, static_cast<Index>(taxon_cols.size()));
  data.response.resize(n);
  data.covariates.resize(n, static_cast<Index>(cov_cols.size()));
  for (Index i = 0; i < n; ++i) {
    const auto& row = table.rows[static_cast<std::size_t>(i)];
    const std::string at = source + ":" + std::to_string(table.line_numbers[static_cast<std::size_t>(i)]);
    data.ids.push_back(id_col ? row[*id_col] : std::to_string(i + 1));
    data.response[i] = parse_double(row[*response_col], at + ", column 'response'");
    for (std::size_t k = 0; k < taxon_cols.size(); ++k) {
      const double v = parse_double(row[taxon_cols[k]], at + ", column '" + h[taxon_cols[k]] + "'");
      if (v < 0.0) throw InvalidInput(at + ", column '" + h[taxon_cols[k]] + "': negative abundance");
      data.taxa(i, static_cast<Index>(k)) = v;
    }
    for (std::size_t k = 0; k < cov_cols.size(); ++k) {
      data.covariates(i, static_cast<Index>(k)) = parse_double(row[cov_cols[k]], at + ", column '" + h[cov_cols[k]] + "'");
    }
  }
  return data;
}

InputData load_input(const std::string& path) { return parse_input(read_csv(path), path); }

CompositionMatrix to_composition(const InputData& data, std::optional<double> pseudo) {
  for (Index i = 0; i < data.taxa.rows(); ++i) {
    if (data.taxa.row(i).sum() <= 0.0) {
      throw InvalidInput("sample '" + data.ids[static_cast<std::size_t>(i)] + "' has no positive abundance");
    }
  }
  if (pseudo) return replace_zeros(data.taxa, *pseudo, data.ids, data.taxon_names);
  for (Index i = 0; i < data.taxa.rows(); ++i) {
    for (Index j = 0; j < data.taxa.cols(); ++j) {
      if (data.taxa(i, j) == 0.0) {
        throw InvalidInput("sample '" + data.ids[static_cast<std::size_t>(i)] + "', taxon '" +
                           data.taxon_names[static_cast<std::size_t>(j)] +
                           "' is zero; log-ratios need positive values. Pass --pseudo (e.g. 0.5 for counts, "
                           "0.05 for proportions) to replace zeros");
      }
    }
  }
  return CompositionMatrix::close(data.taxa, data.ids, data.taxon_names);
}

std::vector<Index> parse_group_json(const std::string& text, Index p) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInput(std::string("group spec is not valid JSON: ") + e.what());
  }
  if (j.is_object() && j.contains("groups")) j = j["groups"];
  if (!j.is_array() || j.empty()) throw InvalidInput("group spec must be a nonempty JSON list");
  std::vector<Index> sizes;
  if (j.front().is_number_integer()) {
    for (const auto& v : j) {
      if (!v.is_number_integer()) throw InvalidInput("group size list mixes integers and other values");
      sizes.push_back(v.get<Index>());
    }
  } else {
    // One label per taxon; equal labels must be adjacent.
    if (p >= 0 && static_cast<Index>(j.size()) != p) {
      throw InvalidInput("group label list has " + std::to_string(j.size()) + " entries for " + std::to_string(p) +
                         " taxa");
    }
    std::vector<std::string> labels;
    for (const auto& v : j) labels.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    std::set<std::string> closed;
    for (std::size_t k = 0; k < labels.size(); ++k) {
      if (k > 0 && labels[k] == labels[k - 1]) {
        ++sizes.back();
        continue;
      }
      if (!closed.insert(labels[k]).second) {
        throw InvalidInput("group label '" + labels[k] + "' is not contiguous (taxon " + std::to_string(k + 1) +
                           "); reorder the columns so each group is a block");
      }
      sizes.push_back(1);
    }
  }
  return sizes;
}

std::vector<Index> group_sizes_of(const std::string& spec, Index p) {
  std::vector<Index> sizes;
  const std::string s = trim(spec);
  const bool inline_sizes = !s.empty() && s.find_first_not_of("0123456789, ") == std::string::npos;
  if (s.empty() || s == "one") {
    if (p < 0) throw InvalidInput("a single group needs the number of taxa");
    sizes = {p};
  } else if (inline_sizes) {
    std::stringstream ss(s);
    std::string part;
    while (std::getline(ss, part, ',')) sizes.push_back(parse_long(part, "--groups"));
  } else {
    sizes = parse_group_json(read_text(s), p);
  }
  return sizes;
}

std::vector<Index> parse_group_spec(const std::string& spec, Index p, const std::vector<std::string>&) {
  const std::vector<Index> sizes = group_sizes_of(spec, p);
  Index total = 0;
  for (Index v : sizes) {
    if (v < 2) throw InvalidInput("group sizes must be at least 2 (a singleton forces its coefficient to zero)");
    total += v;
  }
  if (total != p) {
    throw InvalidInput("group sizes sum to " + std::to_string(total) + " but there are " + std::to_string(p) +
                       " taxa");
  }
  return sizes;
}

namespace {

json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

}  // namespace

FitOutputs render_fit(const RegressionProblem& problem, const FitResult& fit, const TuningResult& tune,
                      const DebiasResult& debiased, const InferenceResult& inference, double gamma) {
  FitOutputs out;
  const Index p = problem.p();
  auto name_of = [&](Index j) {
    return j < static_cast<Index>(problem.taxon_names.size()) ? problem.taxon_names[static_cast<std::size_t>(j)]
                                                              : "x" + std::to_string(j + 1);
  };
  json coefs = json::array();
  std::ostringstream csv;
  csv << "name,lasso,estimate,se,ci_lower,ci_upper,p_value,selected\n";
  std::ostringstream sel;
  for (Index j = 0; j < p; ++j) {
    const auto& c = inference.coefs[static_cast<std::size_t>(j)];
    const bool selected = c.ci_lower > 0.0 || c.ci_upper < 0.0;
    coefs.push_back({{"name", name_of(j)},
                     {"lasso", number(fit.coef.beta[j])},
                     {"estimate", number(c.estimate)},
                     {"se", number(c.std_err)},
                     {"ci", {number(c.ci_lower), number(c.ci_upper)}},
                     {"p", number(c.p_value)},
                     {"selected", selected},
                     {"qp_status", to_string(debiased.row_status[static_cast<std::size_t>(j)])},
                     {"qp_gamma", number(debiased.row_gamma[j])}});
    csv << csv_field(name_of(j)) << ',' << format_number(fit.coef.beta[j]) << ',' << format_number(c.estimate) << ','
        << format_number(c.std_err) << ',' << format_number(c.ci_lower) << ',' << format_number(c.ci_upper) << ','
        << format_number(c.p_value) << ',' << (selected ? 1 : 0) << '\n';
    if (selected) sel << name_of(j) << '\n';
  }
  json covs = json::array();
  for (Index k = 0; k < problem.q(); ++k) {
    const std::string nm = k < static_cast<Index>(problem.extra_names.size())
                               ? problem.extra_names[static_cast<std::size_t>(k)]
                               : "covariate" + std::to_string(k + 1);
    covs.push_back({{"name", nm}, {"estimate", number(fit.coef.gamma[k])}});
  }
  json doc = {{"schema", kEstimatesSchema},
              {"n", problem.n()},
              {"p", p},
              {"q", problem.q()},
              {"group_sizes", problem.constraints.group_sizes()},
              {"alpha", inference.alpha},
              {"sigma_hat", number(tune.sigma_hat)},
              {"lambda0", number(tune.lambda0)},
              {"lambda_hat", number(fit.lambda)},
              {"gamma", number(gamma)},
              {"tuning_converged", tune.converged},
              {"solver_converged", fit.converged},
              {"constraint_violation", number(fit.constraint_violation)},
              {"intercept", number(problem.centering.y_mean)},
              {"coefficients", coefs},
              {"covariates", covs}};
  out.estimates_json = doc.dump(2) + "\n";
  out.inference_csv = csv.str();
  out.selection_txt = sel.str();
  return out;
}

std::string render_conditions(const ConditionReport& report, const std::vector<Index>& group_sizes) {
  json doc = {{"schema", kConditionsSchema},
              {"group_sizes", group_sizes},
              {"k0_observed", number(report.k0_observed)},
              {"cond2_min_diag", number(report.cond2_min_diag)}};
  if (report.rip) {
    doc["rip"] = {{"k", *report.rip_k}, {"lower", number(report.rip->lower)}, {"upper", number(report.rip->upper)}};
  }
  if (report.roc_theta) {
    doc["roc"] = {{"k1", report.roc_k->first}, {"k2", report.roc_k->second}, {"theta", number(*report.roc_theta)}};
  }
  if (report.eigen_bounds) {
    doc["eigen_bounds"] = {{"min", number(report.eigen_bounds->first)}, {"max", number(report.eigen_bounds->second)}};
  }
  return doc.dump(2) + "\n";
}

SimCell parse_cell(const std::string& text) {
  SimCell cell;
  std::set<std::string> got;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto eq = part.find('=');
    if (eq == std::string::npos) throw InvalidInput("cell entry '" + part + "' is not key=value");
    const std::string key = trim(part.substr(0, eq));
    const std::string val = part.substr(eq + 1);
    if (key == "zeta") {
      cell.zeta = parse_double(val, "--cell zeta");
    } else if (key == "p") {
      cell.p = parse_long(val, "--cell p");
    } else if (key == "n") {
      cell.n = parse_long(val, "--cell n");
    } else {
      throw InvalidInput("unknown cell key '" + key + "' (expected zeta, p, n)");
    }
    got.insert(key);
  }
  if (got.size() != 3) throw InvalidInput("cell '" + text + "' must set zeta, p and n");
  return cell;
}

SimTables render_simulation(const std::vector<SimCell>& cells, const std::vector<ConstraintMode>& modes,
                            const std::vector<SimReport>& reports) {
  SimTables t;
  const std::vector<ConstraintMode> table_modes = {ConstraintMode::kMultiple, ConstraintMode::kOne,
                                                   ConstraintMode::kNone};
  auto find = [&](std::size_t c, ConstraintMode m) -> const SimReport* {
    for (std::size_t k = 0; k < modes.size(); ++k)
      if (modes[k] == m) return &reports[c * modes.size() + k];
    return nullptr;
  };
  auto cell_prefix = [&](const SimCell& c) {
    return format_number(c.zeta) + "," + std::to_string(c.p) + "," + std::to_string(c.n);
  };
  auto value = [&](const SimReport* r, double SimReport::*field) {
    return r ? format_number(r->*field) : std::string("");
  };

  std::ostringstream t1, t2, cov, len;
  t1 << "zeta,p,n,tpr_multi,tpr_one,tpr_no,fpr_multi,fpr_one,fpr_no\n";
  t2 << "zeta,p,n,lasso_multi,lasso_one,lasso_no,refit_lasso_multi,refit_lasso_one,refit_lasso_no,"
        "refit_ci_multi,refit_ci_one,refit_ci_no\n";
  cov << "zeta,p,n,constraints,min,median,mean,max\n";
  len << "zeta,p,n,constraints,coordinate,min,median,mean,max\n";
  json cells_json = json::array();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    t1 << cell_prefix(cells[c]);
    for (auto f : {&SimReport::tpr, &SimReport::fpr})
      for (auto m : table_modes) t1 << ',' << value(find(c, m), f);
    t1 << '\n';
    t2 << cell_prefix(cells[c]);
    for (auto f : {&SimReport::pred_lasso, &SimReport::pred_refit_lasso, &SimReport::pred_refit_ci})
      for (auto m : table_modes) t2 << ',' << value(find(c, m), f);
    t2 << '\n';
    for (std::size_t k = 0; k < modes.size(); ++k) {
      const SimReport& r = reports[c * modes.size() + k];
      const std::string pre = cell_prefix(cells[c]) + "," + to_string(modes[k]);
      const Summary& s = r.coverage_summary;
      cov << pre << ',' << format_number(s.min) << ',' << format_number(s.median) << ',' << format_number(s.mean)
          << ',' << format_number(s.max) << '\n';
      for (std::size_t j = 0; j < r.length_by_coord.size(); ++j) {
        const Summary& l = r.length_by_coord[j];
        len << pre << ',' << (j + 1) << ',' << format_number(l.min) << ',' << format_number(l.median) << ','
            << format_number(l.mean) << ',' << format_number(l.max) << '\n';
      }
      std::vector<json> coverage;
      for (Index j = 0; j < r.coverage.size(); ++j) coverage.push_back(number(r.coverage[j]));
      cells_json.push_back({{"zeta", cells[c].zeta},
                            {"p", cells[c].p},
                            {"n", cells[c].n},
                            {"constraints", to_string(modes[k])},
                            {"reps", r.config.n_reps},
                            {"seed", r.config.seed},
                            {"completed", r.completed},
                            {"failed", r.failed},
                            {"failures", r.failures},
                            {"tpr", number(r.tpr)},
                            {"fpr", number(r.fpr)},
                            {"pred_error",
                             {{"lasso", number(r.pred_lasso)},
                              {"refit_lasso", number(r.pred_refit_lasso)},
                              {"refit_ci", number(r.pred_refit_ci)}}},
                            {"refit_lasso_failed", r.refit_lasso_failed},
                            {"refit_ci_failed", r.refit_ci_failed},
                            {"escalated_rows", r.escalated_rows},
                            {"mean_ci_length", number(r.mean_length)},
                            {"coverage_summary",
                             {{"min", number(s.min)},
                              {"median", number(s.median)},
                              {"mean", number(s.mean)},
                              {"max", number(s.max)}}},
                            {"coverage", coverage}});
    }
  }
  t.table1_csv = t1.str();
  t.table2_csv = t2.str();
  t.coverage_csv = cov.str();
  t.lengths_csv = len.str();
  t.report_json = json{{"schema", kSimSchema}, {"cells", cells_json}}.dump(2) + "\n";
  return t;
}

}  // namespace complasso::io
