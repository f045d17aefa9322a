#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "grr/experiments.hpp"
#include "grr/mesh.hpp"
#include "grr/registration.hpp"

using namespace grr;
namespace fs = std::filesystem;

namespace {

struct CliResult {
  int exit_code;
  std::string output;
};

CliResult run_cli(const std::string& args) {
  const fs::path dir = fs::temp_directory_path() / "grr_cli_test";
  fs::create_directories(dir);
  const std::string log = (dir / "out.log").string();
  const std::string cmd = std::string(GRR_CLI_PATH) + " " + args + " > " + log + " 2>&1";
  const int rc = std::system(cmd.c_str());
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WEXITSTATUS(rc), ss.str()};
}

fs::path sandbox() {
  const fs::path dir = fs::temp_directory_path() / "grr_cli_test";
  fs::create_directories(dir);
  return dir;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("register: zero displacement run exits cleanly and morphs nothing") {
  const fs::path dir = sandbox();
  const Mesh mesh = make_square_mesh(5, 1);
  write_mesh((dir / "mesh.txt").string(), mesh);
  MatrixXd pts(4, 2);
  pts << 0.3, 0.3, 0.7, 0.3, 0.7, 0.7, 0.3, 0.7;
  write_cloud_csv((dir / "x.csv").string(), pts);
  write_cloud_csv((dir / "y.csv").string(), pts);
  std::ofstream cfg(dir / "run.cfg");
  cfg << "mesh.path = " << (dir / "mesh.txt").string() << "\n"
      << "clouds.reference = " << (dir / "x.csv").string() << "\n"
      << "clouds.target = " << (dir / "y.csv").string() << "\n"
      << "space.n_lp = 4\n"
      << "method = tykhonov\n"
      << "tykhonov.xi = 1e-5\n"
      << "out.dir = " << (dir / "out_zero").string() << "\n";
  cfg.close();
  const auto r = run_cli("register --config " + (dir / "run.cfg").string());
  CHECK(r.exit_code == 0);
  const Mesh deformed = read_mesh((dir / "out_zero" / "deformed_mesh.txt").string());
  CHECK((deformed.nodes() - mesh.nodes()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK(fs::exists(dir / "out_zero" / "run.json"));
  CHECK(fs::exists(dir / "out_zero" / "mapping.bin"));

  SUBCASE("identical reruns produce identical metric values") {
    // every column except the environmental wall-time must match exactly
    auto strip_cost = [](const std::string& text) {
      std::istringstream in(text);
      std::string line, out;
      while (std::getline(in, line)) {
        // cost_s is the second-to-last comma-separated field
        const auto last = line.rfind(',');
        const auto prev = line.rfind(',', last - 1);
        out += line.substr(0, prev) + line.substr(last) + "\n";
      }
      return out;
    };
    const std::string first = strip_cost(read_file(dir / "out_zero" / "metrics.csv"));
    const auto r2 = run_cli("register --config " + (dir / "run.cfg").string());
    CHECK(r2.exit_code == 0);
    CHECK(strip_cost(read_file(dir / "out_zero" / "metrics.csv")) == first);
  }
}

TEST_CASE("register: missing mesh file exits 1 and names the path") {
  const fs::path dir = sandbox();
  MatrixXd pts(1, 2);
  pts << 0.5, 0.5;
  write_cloud_csv((dir / "x1.csv").string(), pts);
  std::ofstream cfg(dir / "missing.cfg");
  cfg << "mesh.path = " << (dir / "no_such_mesh.txt").string() << "\n"
      << "clouds.reference = " << (dir / "x1.csv").string() << "\n"
      << "clouds.target = " << (dir / "x1.csv").string() << "\n"
      << "space.n_lp = 3\n"
      << "out.dir = " << (dir / "out_missing").string() << "\n";
  cfg.close();
  const auto r = run_cli("register --config " + (dir / "missing.cfg").string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("no_such_mesh.txt") != std::string::npos);
}

TEST_CASE("register: unknown config keys are rejected by name") {
  const fs::path dir = sandbox();
  std::ofstream cfg(dir / "unknown.cfg");
  cfg << "clouds.reference = x.csv\nclouds.target = y.csv\nbogus.key = 1\n";
  cfg.close();
  const auto r = run_cli("register --config " + (dir / "unknown.cfg").string());
  CHECK(r.exit_code == 1);
  CHECK(r.output.find("bogus.key") != std::string::npos);
}

TEST_CASE("cpd subcommand aligns a translated cloud") {
  const fs::path dir = sandbox();
  MatrixXd x(30, 2), y(30, 2);
  for (int i = 0; i < 30; ++i) {
    const double t = 2.0 * 3.14159265358979323846 * i / 30;
    x.row(i) << std::cos(t), std::sin(t);
    y.row(i) << std::cos(t) + 0.05, std::sin(t);
  }
  write_cloud_csv((dir / "cx.csv").string(), x);
  write_cloud_csv((dir / "cy.csv").string(), y);
  const auto r = run_cli("cpd --ref " + (dir / "cx.csv").string() + " --target " +
                         (dir / "cy.csv").string() + " --beta 1 --lambda 1 --w 0 --out " +
                         (dir / "aligned.csv").string());
  CHECK(r.exit_code == 0);
  const MatrixXd aligned = read_cloud_csv((dir / "aligned.csv").string());
  CHECK(aligned.rows() == 30);
  double worst = 0.0;
  for (Index j = 0; j < 30; ++j) {
    double best = 1e9;
    for (Index i = 0; i < 30; ++i) best = std::min(best, (y.row(j) - aligned.row(i)).norm());
    worst = std::max(worst, best);
  }
  CHECK(worst < 1e-2);
}

TEST_CASE("pod subcommand builds a one-mode basis from one snapshot") {
  const fs::path dir = sandbox();
  const fs::path snaps = dir / "snaps";
  fs::create_directories(snaps);
  const auto space = MapSpace::build(Box::square(0.0, 1.0), 3,
                                     BoundaryCondition::normal_zero, SpaceKind::full);
  space.save((snaps / "space.bin").string());
  VectorXd a = VectorXd::Zero(space.size());
  a(2) = 0.7;
  save_mapping((snaps / "one.map").string(), Mapping(space, a));
  const auto r = run_cli("pod --snapshots " + snaps.string() + " --tol 1e-5 --out " +
                         (dir / "basis.bin").string());
  CHECK(r.exit_code == 0);
  CHECK(r.output.find("modes=1") != std::string::npos);
  const auto reduced = MapSpace::load((dir / "basis.bin").string());
  CHECK(reduced.size() == 1);
  CHECK(fs::exists(dir / "basis.bin.eigenvalues.csv"));
}

TEST_CASE("analyze: corner-constant sweep contains the quarter-angle value") {
  const fs::path dir = sandbox();
  const auto csv = (dir / "corner.csv").string();
  const auto r = run_cli("analyze --corner-constant --alphas 50 --out " + csv);
  CHECK(r.exit_code == 0);
  std::ifstream in(csv);
  std::string line;
  std::getline(in, line);  // header
  bool found = false;
  while (std::getline(in, line)) {
    const auto comma = line.find(',');
    const double alpha = std::stod(line.substr(0, comma));
    const double c = std::stod(line.substr(comma + 1));
    if (std::abs(alpha - 3.14159265358979323846 / 4.0) < 1e-9) {
      found = true;
      CHECK(c == doctest::Approx(1.0).epsilon(1e-6));
    }
  }
  CHECK(found);
}
