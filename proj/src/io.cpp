#include "censreg/io.hpp"

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

namespace censreg {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

double parse_double(const std::string& s, long line_no) {
  const char* begin = s.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  if (end == begin || *end != '\0' || errno == ERANGE || !std::isfinite(v)) {
    throw ValidationError("csv: line " + std::to_string(line_no) +
                              ": '" + s + "' is not a finite number",
                          line_no);
  }
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CsvData read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("csv: cannot open '" + path + "' for reading");

  std::string line;
  if (!std::getline(in, line)) {
    throw ValidationError("csv: '" + path + "' is empty", 1);
  }
  const std::vector<std::string> header = split_csv_line(line);
  if (header.empty() || header[0] != "y") {
    throw ValidationError("csv: first header column must be 'y'", 1);
  }
  const auto k = static_cast<Eigen::Index>(header.size()) - 1;

  std::vector<double> ys;
  std::vector<double> xs;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    if (static_cast<Eigen::Index>(fields.size()) != k + 1) {
      throw ValidationError(
          "csv: line " + std::to_string(line_no) + ": expected " +
              std::to_string(k + 1) + " fields, got " +
              std::to_string(fields.size()),
          line_no);
    }
    ys.push_back(parse_double(fields[0], line_no));
    for (Eigen::Index j = 0; j < k; ++j) {
      xs.push_back(parse_double(fields[static_cast<size_t>(j) + 1], line_no));
    }
  }
  if (ys.empty()) {
    throw ValidationError("csv: '" + path + "' has no data rows", 1);
  }

  CsvData out;
  const auto n = static_cast<Eigen::Index>(ys.size());
  out.y = Eigen::Map<Eigen::VectorXd>(ys.data(), n);
  out.x.resize(n, k);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < k; ++j) {
      out.x(i, j) = xs[static_cast<size_t>(i * k + j)];
    }
  }
  return out;
}

void write_dataset_csv(const std::string& path, const Dataset& data) {
  std::string text = "y";
  for (Eigen::Index j = 0; j < data.k(); ++j) {
    text += ",x" + std::to_string(j + 1);
  }
  text += "\n";
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    text += format_double(data.y()(i));
    for (Eigen::Index j = 0; j < data.k(); ++j) {
      text += ",";
      text += format_double(data.x()(i, j));
    }
    text += "\n";
  }
  atomic_write_text(path, text);
}

void atomic_write_text(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open '" + tmp.string() + "' for writing");
    }
    out << text;
    out.flush();
    if (!out) throw IoError("write to '" + tmp.string() + "' failed");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move temporary file onto '" + path + "'");
  }
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  nlohmann::json arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

nlohmann::json matrix_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json fit_report_json(const FitResult& res, const Dataset& data,
                               const std::string& input_path,
                               std::optional<std::uint64_t> seed) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["tool_version"] = kToolVersion;
  j["model"] = data.kind() == ModelKind::truncated ? "truncated" : "tobit";
  j["c"] = data.c();
  j["n"] = data.n();
  j["k"] = data.k();
  j["n_censored"] = data.n_censored();
  j["input"] = input_path;
  if (seed) {
    j["seed"] = *seed;
  } else {
    j["seed"] = nullptr;
  }
  j["converged"] = res.converged;
  j["n_iter"] = res.n_iter;
  j["avg_loglik"] = res.loglik;
  j["avg_score_norm"] = res.avg_score_norm;
  j["min_eig_neg_avg_hessian"] = res.min_eig_neg_avg_hessian;
  j["delta_hat"] = vector_json(res.theta_hat.delta);
  j["gamma_hat"] = res.theta_hat.gamma;
  j["beta_hat"] = vector_json(res.orig.beta);
  j["sigma2_hat"] = res.orig.sigma2;

  const auto dim = res.theta_hat.k() + 1;
  const double n = static_cast<double>(res.n);
  if (res.avar_hessian.size() > 0) {
    j["avar_hessian"] = matrix_json(res.avar_hessian);
    Eigen::VectorXd se(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      se(i) = std::sqrt(res.avar_hessian(i, i) / n);
    }
    j["se_theta"] = vector_json(se);
  } else {
    j["avar_hessian"] = nullptr;
    j["se_theta"] = nullptr;
  }
  if (res.avar_opg.size() > 0) {
    j["avar_opg"] = matrix_json(res.avar_opg);
  } else {
    j["avar_opg"] = nullptr;
  }
  if (res.orig.cov.size() > 0) {
    j["cov_orig"] = matrix_json(res.orig.cov);
    Eigen::VectorXd se(dim);
    for (Eigen::Index i = 0; i < dim; ++i) {
      se(i) = std::sqrt(res.orig.cov(i, i));
    }
    j["se_orig"] = vector_json(se);
  } else {
    j["cov_orig"] = nullptr;
    j["se_orig"] = nullptr;
  }
  return j;
}

nlohmann::json simulate_meta_json(const DgpConfig& cfg, ModelKind kind,
                                  const Dataset& data,
                                  const std::string& csv_path) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["tool_version"] = kToolVersion;
  j["model"] = kind == ModelKind::truncated ? "truncated" : "tobit";
  j["c"] = cfg.c;
  j["n"] = cfg.n;
  j["k"] = cfg.beta0.size();
  j["seed"] = cfg.seed;
  j["beta0"] = vector_json(cfg.beta0);
  j["sigma0"] = cfg.sigma0;
  j["intercept"] = cfg.intercept;
  j["n_censored"] = data.n_censored();
  j["csv"] = csv_path;
  return j;
}

nlohmann::json mc_report_json(const McReport& rep) {
  nlohmann::json j;
  j["n_reps"] = rep.n_reps;
  j["n_used"] = rep.n_used;
  j["n_failures"] = rep.n_failures;
  j["flagged"] = rep.flagged;
  j["ks_stats"] = vector_json(rep.ks_stats);
  j["ks_pvalues"] = vector_json(rep.ks_pvalues);
  j["ci_coverage"] = vector_json(rep.ci_coverage);
  return j;
}

}  // namespace censreg
