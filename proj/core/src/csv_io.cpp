#include "ssi/csv_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "ssi/data_model.hpp"

namespace ssi {

std::string format_double(double value) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), value);
  if (res.ec == std::errc()) return std::string(buf, res.ptr);
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line, char delim) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == delim) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& token, std::size_t line_no, std::size_t col_no) {
  double value = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto res = std::from_chars(first, last, value);
  if (res.ec != std::errc() || res.ptr != last)
    throw Error(errc::parse_error, "line " + std::to_string(line_no) + ", column " +
                                       std::to_string(col_no) + ": bad number '" + token + "'");
  return value;
}

std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(errc::io_error, "cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

}  // namespace

SchemaFile load_schema(const std::string& path) {
  SchemaFile schema;
  bool have_response = false;
  Index position = 0;
  for (const auto& raw : read_lines(path)) {
    std::string line = trim(raw);
    if (line.empty() || line[0] == '#') continue;
    auto parts = split(line, ',');
    if (parts.size() < 2)
      throw Error(errc::schema_mismatch, "schema line needs 'name,kind': '" + line + "'");
    std::string name = trim(parts[0]);
    std::string kind = trim(parts[1]);
    if (kind == "response") {
      if (have_response) throw Error(errc::schema_mismatch, "schema declares two responses");
      have_response = true;
      schema.response_position = position;
      schema.response_name = name;
    } else if (kind == "continuous") {
      if (parts.size() > 2)
        throw Error(errc::schema_mismatch, "continuous column '" + name + "' must not list classes");
      schema.covariates.push_back({name, ColumnKind::continuous, {}});
    } else if (kind == "discrete") {
      ColumnSchema col{name, ColumnKind::discrete, {}};
      for (std::size_t k = 2; k < parts.size(); ++k)
        col.classes.push_back(parse_double(trim(parts[k]), position + 1, k + 1));
      if (col.classes.size() < 2)
        throw Error(errc::schema_mismatch, "discrete column '" + name + "' needs >= 2 classes");
      schema.covariates.push_back(std::move(col));
    } else {
      throw Error(errc::schema_mismatch, "unknown kind '" + kind + "' for column '" + name + "'");
    }
    ++position;
  }
  if (!have_response) throw Error(errc::schema_mismatch, "schema declares no response column");
  if (schema.covariates.empty()) throw Error(errc::schema_mismatch, "schema declares no covariates");
  return schema;
}

MissingDataset load_csv(const CsvSpec& spec) {
  SchemaFile schema = load_schema(spec.schema_path);
  const Index cols = schema.file_columns();
  const Index p = static_cast<Index>(schema.covariates.size());

  auto lines = read_lines(spec.path);
  std::vector<std::vector<std::string>> rows;
  bool header_pending = spec.header;
  std::size_t line_no = 0;
  for (const auto& line : lines) {
    ++line_no;
    if (trim(line).empty() || line[0] == '#') continue;
    auto tokens = split(line, spec.delimiter);
    if (static_cast<Index>(tokens.size()) != cols)
      throw Error(errc::parse_error, "line " + std::to_string(line_no) + ": expected " +
                                         std::to_string(cols) + " fields, got " +
                                         std::to_string(tokens.size()));
    if (header_pending) {
      header_pending = false;
      Index cov = 0;
      for (Index c = 0; c < cols; ++c) {
        std::string name = trim(tokens[static_cast<std::size_t>(c)]);
        std::string expect = c == schema.response_position
                                 ? schema.response_name
                                 : schema.covariates[static_cast<std::size_t>(cov++)].name;
        if (name != expect)
          throw Error(errc::schema_mismatch, "header column " + std::to_string(c + 1) + " is '" +
                                                 name + "', schema says '" + expect + "'");
      }
      continue;
    }
    rows.push_back(std::move(tokens));
  }

  const Index n = static_cast<Index>(rows.size());
  if (n < 2) throw Error(errc::parse_error, "need at least 2 data rows, got " + std::to_string(n));

  MissingDataset ds;
  ds.schema = schema.covariates;
  ds.y.setZero(n);
  ds.x.setZero(n, p);
  ds.mask.setZero(n, p);
  std::vector<std::uint8_t> y_mask(static_cast<std::size_t>(n), 1);
  bool y_any_missing = false;

  for (Index i = 0; i < n; ++i) {
    Index cov = 0;
    for (Index c = 0; c < cols; ++c) {
      std::string token = trim(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(c)]);
      bool missing = spec.missing_markers.count(token) > 0;
      if (c == schema.response_position) {
        if (missing) {
          y_mask[static_cast<std::size_t>(i)] = 0;
          y_any_missing = true;
        } else {
          ds.y(i) = parse_double(token, static_cast<std::size_t>(i + 1), static_cast<std::size_t>(c + 1));
        }
      } else {
        Index j = cov++;
        if (!missing) {
          ds.x(i, j) =
              parse_double(token, static_cast<std::size_t>(i + 1), static_cast<std::size_t>(c + 1));
          ds.mask(i, j) = 1;
        }
      }
    }
  }
  if (y_any_missing) ds.y_mask = std::move(y_mask);
  validate(ds);
  return ds;
}

namespace {

void write_dataset_body(std::ofstream& out, const MissingDataset& ds, const std::string& y_name,
                        const std::string& missing_marker) {
  out << y_name;
  for (const auto& col : ds.schema) out << ',' << col.name;
  out << '\n';
  for (Index i = 0; i < ds.n(); ++i) {
    if (ds.y_observed(i))
      out << format_double(ds.y(i));
    else
      out << missing_marker;
    for (Index j = 0; j < ds.p(); ++j) {
      out << ',';
      if (ds.observed(i, j))
        out << format_double(ds.x(i, j));
      else
        out << missing_marker;
    }
    out << '\n';
  }
}

void write_schema_file(const std::string& path, const MissingDataset& ds,
                       const std::string& y_name) {
  std::ofstream out(path);
  if (!out) throw Error(errc::io_error, "cannot write '" + path + "'");
  out << "# ssi-schema v1\n";
  out << y_name << ",response\n";
  for (const auto& col : ds.schema) {
    out << col.name << ',' << (col.kind == ColumnKind::continuous ? "continuous" : "discrete");
    for (double c : col.classes) out << ',' << format_double(c);
    out << '\n';
  }
}

}  // namespace

void save_dataset(const MissingDataset& ds, const std::string& path, const std::string& y_name,
                  const std::string& missing_marker) {
  std::ofstream out(path);
  if (!out) throw Error(errc::io_error, "cannot write '" + path + "'");
  out << "# ssi-csv v1 dataset\n";
  write_dataset_body(out, ds, y_name, missing_marker);
  if (!out) throw Error(errc::io_error, "failed writing '" + path + "'");
  write_schema_file(path + ".schema", ds, y_name);
}

void save_result(const ImputationResult& result, const MissingDataset& original,
                 const std::string& path, const std::string& y_name) {
  MissingDataset completed = original;
  completed.x = result.x_hat;
  completed.mask.setOnes(original.n(), original.p());

  std::ofstream out(path);
  if (!out) throw Error(errc::io_error, "cannot write '" + path + "'");
  out << "# ssi-csv v1 imputed\n";
  write_dataset_body(out, completed, y_name, "NA");
  if (!out) throw Error(errc::io_error, "failed writing '" + path + "'");
  write_schema_file(path + ".schema", completed, y_name);

  nlohmann::json side;
  side["format"] = "ssi-diagnostics v1";
  side["params_used"]["lambda1"] = result.params_used.lambda1;
  side["params_used"]["lambda2"] = result.params_used.lambda2;
  if (result.params_used.tau) side["params_used"]["tau"] = *result.params_used.tau;
  side["sweeps"] = result.sweeps;
  side["imputed_entries"] = static_cast<long long>(result.imputed_mask.cast<long long>().sum());
  auto& cols = side["columns"];
  cols = nlohmann::json::array();
  for (std::size_t j = 0; j < result.diagnostics.size(); ++j) {
    const auto& d = result.diagnostics[j];
    nlohmann::json col;
    col["name"] = original.schema[j].name;
    col["status"] = solve_status_name(d.status);
    col["iterations"] = d.iterations;
    col["converged"] = d.converged;
    col["fallback_applied"] = d.fallback_applied;
    col["mean_fallback_count"] = static_cast<long long>(d.mean_fallback_count);
    col["imputed_entries"] =
        static_cast<long long>(result.imputed_mask.col(static_cast<Index>(j)).cast<long long>().sum());
    cols.push_back(std::move(col));
  }
  std::ofstream js(path + ".json");
  if (!js) throw Error(errc::io_error, "cannot write '" + path + ".json'");
  js << side.dump(2) << '\n';
}

void save_tune_report(const TuneReport& report, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error(errc::io_error, "cannot write '" + path + "'");
  out << "# ssi-tsv v1 tune-report\n";
  out << "tau\tscore\tfailed\n";
  for (std::size_t k = 0; k < report.grid.size(); ++k) {
    out << format_double(report.grid[k]) << '\t';
    if (report.failed[k])
      out << "NA";
    else
      out << format_double(report.scores[k]);
    out << '\t' << static_cast<int>(report.failed[k]) << '\n';
  }
  out << "# tau_hat=" << format_double(report.tau_hat) << '\n';
  out << "# lambda_hat=" << format_double(report.lambda_hat) << '\n';
  out << "# d0=" << report.d0 << " n=" << report.n << '\n';
}

}  // namespace ssi
