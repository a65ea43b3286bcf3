#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"

#include "censreg/io.hpp"
#include "censreg/simulate.hpp"
#include "censreg/validation.hpp"

using namespace censreg;
namespace fs = std::filesystem;

namespace {

const fs::path kScratch = fs::path("cli_scratch");

struct ScratchDir {
  ScratchDir() {
    fs::remove_all(kScratch);
    fs::create_directories(kScratch);
  }
} const scratch_dir;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nlohmann::json load_json(const fs::path& p) {
  return nlohmann::json::parse(slurp(p));
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(CENSREG_CLI_PATH) + " " + args + " > " +
                          (kScratch / "stdout.txt").string() + " 2> " +
                          (kScratch / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  return WEXITSTATUS(status);
}

Dataset small_tobit(Eigen::Index n, std::uint64_t seed) {
  DgpConfig cfg;
  cfg.beta0 = Eigen::Vector2d(1.0, 0.5);
  cfg.sigma0 = 1.0;
  cfg.c = 0.0;
  cfg.n = n;
  cfg.seed = seed;
  return gen_tobit(cfg);
}

}  // namespace

TEST_CASE("csv writes and reads back bit-identically") {
  const Dataset d = small_tobit(500, 19);
  const fs::path p = kScratch / "roundtrip.csv";
  write_dataset_csv(p.string(), d);
  const CsvData back = read_csv(p.string());
  REQUIRE(back.y.size() == d.n());
  REQUIRE(back.x.cols() == d.k());
  CHECK((back.y.array() == d.y().array()).all());
  CHECK((back.x.array() == d.x().array()).all());
}

TEST_CASE("format_double survives a parse round trip") {
  for (const double v : {1.0 / 3.0, -0.0, 6.22096057427178412e-16, 1e308,
                         -12345.678901234567, 5e-324}) {
    CHECK(std::strtod(format_double(v).c_str(), nullptr) == v);
  }
}

TEST_CASE("csv reader reports the offending line") {
  const fs::path p = kScratch / "bad.csv";

  {
    std::ofstream(p) << "y,x1\n1.0,2.0\nnot_a_number,3.0\n";
    bool caught = false;
    try {
      read_csv(p.string());
    } catch (const ValidationError& e) {
      caught = true;
      CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
    CHECK(caught);
  }
  {
    std::ofstream(p) << "y,x1\n1.0,2.0\n3.0\n";  // short row
    CHECK_THROWS_AS(read_csv(p.string()), ValidationError);
  }
  {
    std::ofstream(p) << "x1,y\n1.0,2.0\n";  // header must start with y
    CHECK_THROWS_AS(read_csv(p.string()), ValidationError);
  }
  {
    std::ofstream(p) << "y,x1\n1.0,inf\n";  // non-finite data
    CHECK_THROWS_AS(read_csv(p.string()), ValidationError);
  }
  {
    std::ofstream(p) << "";  // empty file
    CHECK_THROWS_AS(read_csv(p.string()), ValidationError);
  }
  CHECK_THROWS_AS(read_csv((kScratch / "missing.csv").string()), IoError);
}

TEST_CASE("csv reader accepts a y-only file") {
  const fs::path p = kScratch / "yonly.csv";
  std::ofstream(p) << "y\n1.5\n2.5\n";
  const CsvData d = read_csv(p.string());
  CHECK(d.y.size() == 2);
  CHECK(d.x.cols() == 0);
  CHECK(d.y(1) == 2.5);
}

TEST_CASE("atomic writes leave no partial files behind") {
  const fs::path p = kScratch / "atomic.txt";
  atomic_write_text(p.string(), "first\n");
  CHECK(slurp(p) == "first\n");
  atomic_write_text(p.string(), "second\n");
  CHECK(slurp(p) == "second\n");
  // No temporary litter in the directory.
  int entries = 0;
  for (const auto& e : fs::directory_iterator(kScratch)) {
    if (e.path().filename().string().rfind("atomic", 0) == 0) ++entries;
  }
  CHECK(entries == 1);
}

TEST_CASE("fit report carries the full schema") {
  const Dataset d = small_tobit(600, 23);
  const FitResult res = fit(d, {});
  const nlohmann::json j = fit_report_json(res, d, "mem.csv", std::nullopt);
  for (const char* key :
       {"schema_version", "tool_version", "model", "c", "n", "k",
        "n_censored", "input", "seed", "converged", "n_iter", "avg_loglik",
        "avg_score_norm", "min_eig_neg_avg_hessian", "delta_hat", "gamma_hat",
        "beta_hat", "sigma2_hat", "avar_hessian", "se_theta", "avar_opg",
        "cov_orig", "se_orig"}) {
    CAPTURE(key);
    CHECK(j.contains(key));
  }
  CHECK(j["schema_version"].is_number_integer());
  CHECK(j["model"] == "tobit");
  CHECK(j["seed"].is_null());
  CHECK(j["converged"].is_boolean());
  CHECK(j["delta_hat"].is_array());
  CHECK(j["delta_hat"].size() == 2);
  CHECK(j["beta_hat"].size() == 2);
  CHECK(j["avar_hessian"].is_array());       // k+1 rows
  CHECK(j["avar_hessian"].size() == 3);
  CHECK(j["se_theta"].size() == 3);
  CHECK(j["n"] == 600);
}

TEST_CASE("simulate metadata reflects the configuration") {
  DgpConfig cfg;
  cfg.beta0 = Eigen::Vector2d(1.0, 0.5);
  cfg.sigma0 = 2.0;
  cfg.c = 0.25;
  cfg.n = 300;
  cfg.seed = 77;
  const Dataset d = gen_tobit(cfg);
  const nlohmann::json j =
      simulate_meta_json(cfg, ModelKind::tobit, d, "file.csv");
  CHECK(j["model"] == "tobit");
  CHECK(j["seed"] == 77);
  CHECK(j["sigma0"] == 2.0);
  CHECK(j["n"] == 300);
  CHECK(j["n_censored"].is_number_integer());
  CHECK(j["csv"] == "file.csv");
}

namespace {

// Minimal structural validation: every key the schema requires is present,
// and scalar types agree where the schema pins them.
void check_required_keys(const nlohmann::json& doc, const fs::path& schema) {
  const nlohmann::json s = load_json(schema);
  REQUIRE(s.contains("required"));
  for (const auto& key : s["required"]) {
    INFO(schema.filename().string(), ": ", key.get<std::string>());
    CHECK(doc.contains(key.get<std::string>()));
  }
  CHECK(doc["schema_version"] == s["properties"]["schema_version"]["const"]);
}

}  // namespace

TEST_CASE("reports carry every key their published schema requires") {
  const fs::path dir = CENSREG_SCHEMA_DIR;
  const Dataset d = small_tobit(400, 31);
  check_required_keys(fit_report_json(fit(d, {}), d, "x.csv", 31),
                      dir / "fit_report.schema.json");

  DgpConfig cfg;
  cfg.beta0 = Eigen::Vector2d(1.0, 0.5);
  cfg.n = 400;
  cfg.seed = 31;
  check_required_keys(
      simulate_meta_json(cfg, ModelKind::tobit, gen_tobit(cfg), "x.csv"),
      dir / "simulate_meta.schema.json");

  const fs::path vrep = kScratch / "schema_validate.json";
  run_cli("validate --model tobit --n 400 --reps 200 --seed 5 --output " +
          vrep.string());
  const nlohmann::json v = load_json(vrep);
  check_required_keys(v, dir / "validate_report.schema.json");
  CHECK(v["checks"].is_array());
  for (const auto& chk : v["checks"]) {
    CHECK(chk.contains("name"));
    CHECK(chk.contains("pass"));
    CHECK(chk.contains("band"));
  }
}

TEST_CASE("replication report serializes every diagnostic") {
  McReport rep;
  rep.n_reps = 10;
  rep.n_used = 9;
  rep.n_failures = 1;
  rep.flagged = false;
  rep.ks_stats = Eigen::Vector3d(0.1, 0.2, 0.3);
  rep.ks_pvalues = Eigen::Vector3d(0.5, 0.6, 0.7);
  rep.ci_coverage = Eigen::Vector3d(0.94, 0.95, 0.96);
  const nlohmann::json j = mc_report_json(rep);
  CHECK(j["n_used"] == 9);
  CHECK(j["flagged"] == false);
  CHECK(j["ks_pvalues"].size() == 3);
  CHECK(j["ci_coverage"][1] == 0.95);
}

TEST_CASE("cli: simulate then fit recovers the parameters") {
  const fs::path csv = kScratch / "sim.csv";
  const fs::path rep = kScratch / "fit.json";
  REQUIRE(run_cli("simulate --model tobit --n 4000 --beta 1,0.5 --sigma 1 "
                  "--c 0 --seed 7 --output " +
                  csv.string()) == 0);
  CHECK(fs::exists(csv));
  CHECK(fs::exists(csv.string() + ".meta.json"));

  REQUIRE(run_cli("fit --model tobit --c 0 --input " + csv.string() +
                  " --output " + rep.string()) == 0);
  const nlohmann::json j = load_json(rep);
  CHECK(j["converged"] == true);
  CHECK(std::fabs(j["beta_hat"][0].get<double>() - 1.0) < 0.15);
  CHECK(std::fabs(j["beta_hat"][1].get<double>() - 0.5) < 0.15);
  CHECK(std::fabs(j["sigma2_hat"].get<double>() - 1.0) < 0.2);
}

TEST_CASE("cli: simulate is deterministic in the seed") {
  const fs::path a = kScratch / "det_a.csv";
  const fs::path b = kScratch / "det_b.csv";
  REQUIRE(run_cli("simulate --model truncated --n 500 --seed 99 --output " +
                  a.string()) == 0);
  REQUIRE(run_cli("simulate --model truncated --n 500 --seed 99 --output " +
                  b.string()) == 0);
  CHECK(slurp(a) == slurp(b));
  const fs::path c = kScratch / "det_c.csv";
  REQUIRE(run_cli("simulate --model truncated --n 500 --seed 100 --output " +
                  c.string()) == 0);
  CHECK(slurp(a) != slurp(c));
}

TEST_CASE("cli: exit codes distinguish the failure families") {
  // Unknown flags / models / missing required options: configuration.
  CHECK(run_cli("fit --model nonsense --input nowhere.csv") == 2);
  CHECK(run_cli("fit") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("validate --reps 10") == 2);
  CHECK(run_cli("--help") == 0);

  // Missing or malformed input files: input validation.
  CHECK(run_cli("fit --model tobit --input does_not_exist.csv") == 3);
  const fs::path bad = kScratch / "cli_bad.csv";
  std::ofstream(bad) << "y,x1\n1.0,oops\n";
  CHECK(run_cli("fit --model tobit --input " + bad.string()) == 3);

  // A fit cut off before it can converge: non-convergence, report written.
  const fs::path csv = kScratch / "sim.csv";
  const fs::path rep = kScratch / "noconv.json";
  CHECK(run_cli("fit --model tobit --c 0 --input " + csv.string() +
                " --max-iter 1 --tol 1e-12 --output " + rep.string()) == 4);
  CHECK(load_json(rep)["converged"] == false);

  // Collinear design: singularity.
  const fs::path coll = kScratch / "coll.csv";
  {
    const CsvData sim = read_csv(csv.string());
    std::ofstream out(coll);
    out << "y,x1,x2\n";
    for (Eigen::Index i = 0; i < sim.y.size(); ++i) {
      out << format_double(sim.y(i)) << "," << format_double(sim.x(i, 1))
          << "," << format_double(sim.x(i, 1)) << "\n";
    }
  }
  CHECK(run_cli("fit --model tobit --c 0 --intercept --input " +
                coll.string()) == 5);
}

TEST_CASE("cli: fit report goes to stdout when no output is given") {
  const fs::path csv = kScratch / "sim.csv";
  REQUIRE(run_cli("fit --model tobit --c 0 --input " + csv.string()) == 0);
  const nlohmann::json j =
      nlohmann::json::parse(slurp(kScratch / "stdout.txt"));
  CHECK(j["converged"] == true);
}
