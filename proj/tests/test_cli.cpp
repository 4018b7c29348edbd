#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include "commands.hpp"
#include "meanfield/exact.hpp"
#include "meanfield/inverse.hpp"
#include "meanfield/io.hpp"
#include "models.hpp"

using namespace meanfield;
using namespace testmodels;
namespace io = meanfield::io;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "meanfield");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("meanfield_cli_" + std::to_string(::getpid()) + "_" + std::to_string(++counter_));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& text) const {
    io::write_text_file(file(name), text);
    return file(name);
  }

 private:
  fs::path path_;
  static inline int counter_ = 0;
};

const char* kReference =
    R"({"model": {"n": 2, "alpha": [0.5, 0.5], "J": [[1, 0.5], [0.5, 1]], "h": [0.2, -0.1]},
        "sizes": [30, 30], "M": 4000, "seed": 123})";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("solve lists both maxima of the low-temperature Curie-Weiss model") {
    TempDir t;
    const std::string cfg = t.write("cw.json", R"({"model": {"n": 1, "alpha": [1], "J": [[1.2]], "h": [0]}})");
    const Run r = run_cli({"--config", cfg, "solve"});
    REQUIRE(r.code == 0);
    const io::Json j = io::parse_json(r.out);
    REQUIRE(j.at("maxima").size() == 2);
    for (const auto& m : j.at("maxima")) {
      CHECK(m.at("is_global") == true);
      CHECK(m.at("k") == 1);
    }
    CHECK(j.at("maxima")[0].at("x")[0].get<double>() ==
          doctest::Approx(-j.at("maxima")[1].at("x")[0].get<double>()).epsilon(1e-12));
  }

  TEST_CASE("sample with M = 0 writes a header-only file") {
    TempDir t;
    const std::string cfg =
        t.write("c.json", R"({"model": {"n": 1, "alpha": [1], "J": [[0.5]], "h": [0]}, "sizes": [10], "M": 0})");
    const Run r = run_cli({"--config", cfg, "--seed", "4", "--out", t.file("s.csv"), "sample"});
    REQUIRE(r.code == 0);
    std::istringstream in(io::read_text_file(t.file("s.csv")));
    const SampleSet s = io::read_samples_csv(in);
    CHECK(s.count() == 0);
    CHECK(s.seed == 4);
    CHECK(s.sizes == Sizes{10});
  }

  TEST_CASE("sample then invert equals the in-process pipeline") {
    TempDir t;
    const std::string cfg = t.write("ref.json", kReference);
    REQUIRE(run_cli({"--config", cfg, "--out", t.file("s.csv"), "sample"}).code == 0);
    const Run inv = run_cli({"--config", cfg, "invert", "--samples", t.file("s.csv")});
    REQUIRE(inv.code == 0);

    const ValidatedModel ref = reference();
    const SampleSet s = exact_sample(ref, {30, 30}, 4000, 123);
    const InverseEstimate e = mle_fit(s, ref.alpha());
    const InverseEstimate back = io::estimate_from_json(io::parse_json(inv.out));
    CHECK(back.J_hat == e.J_hat);
    CHECK(back.h_hat == e.h_hat);
    CHECK(back.chi_hat == e.chi_hat);
    CHECK(*back.log_likelihood == *e.log_likelihood);

    std::istringstream in(io::read_text_file(t.file("s.csv")));
    CHECK(io::read_samples_csv(in).sums == s.sums);
  }

  TEST_CASE("reruns are byte-identical and independent of the thread count") {
    TempDir t;
    const std::string cfg = t.write("ref.json", kReference);
    const Run a = run_cli({"--config", cfg, "sample"});
    const Run b = run_cli({"--config", cfg, "sample"});
    const Run c = run_cli({"--config", cfg, "--threads", "3", "sample"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(a.out == c.out);
    const Run s1 = run_cli({"--config", cfg, "solve"});
    const Run s2 = run_cli({"--config", cfg, "--threads", "2", "solve"});
    CHECK(s1.out == s2.out);
  }

  TEST_CASE("limits writes a law and a finite-N comparison") {
    TempDir t;
    const std::string cfg = t.write(
        "l.json", R"({"model": {"n": 1, "alpha": [1], "J": [[1.2]], "h": [0]}, "N": 2000, "centre": [0.6]})");
    const Run r = run_cli({"--config", cfg, "--out", t.file("l.json.out"), "limits"});
    REQUIRE(r.code == 0);
    CHECK(r.out.empty());
    const io::Json j = io::read_json_file(t.file("l.json.out"));
    CHECK(j.at("law").at("kind") == "gaussian");
    CHECK(j.at("conditioned") == true);
    CHECK(j.at("finite_n").at("ks_distance").get<double>() < 0.05);
    std::istringstream csv(io::read_text_file(t.file("l.json.out") + ".csv"));
    const DiscreteLaw law = io::read_discrete_law_csv(csv);
    double total = 0.0;
    for (double p : law.probs) total += p;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  }

  TEST_CASE("phase scan CSV") {
    TempDir t;
    const std::string cfg = t.write("p.json", R"({"J_grid": {"from": 0.9, "step": 0.1, "count": 4}, "h": 0})");
    const Run r = run_cli({"--config", cfg, "phase"});
    REQUIRE(r.code == 0);
    std::istringstream in(r.out);
    std::string line;
    int count = 0;
    while (std::getline(in, line)) ++count;
    CHECK(count == 5);
  }

  TEST_CASE("errors are reported as JSON with category exit codes") {
    TempDir t;
    const Run missing = run_cli({"--config", t.file("nope.json"), "solve"});
    CHECK(missing.code == 4);
    CHECK(io::parse_json(missing.err).at("error") == "IoError");

    const Run broken = run_cli({"--config", t.write("b.json", "{"), "solve"});
    CHECK(broken.code == 2);
    CHECK(io::parse_json(broken.err).at("error") == "ConfigParse");

    const std::string asym =
        t.write("a.json", R"({"n": 2, "alpha": [0.5, 0.5], "J": [[1, 0.2], [0.3, 1]], "h": [0, 0]})");
    const Run bad = run_cli({"--config", asym, "solve"});
    CHECK(bad.code == 2);
    CHECK(io::parse_json(bad.err).at("error") == "NonSymmetricJ");

    const std::string noseed =
        t.write("n.json", R"({"model": {"n": 1, "alpha": [1], "J": [[0.5]], "h": [0]}, "sizes": [10], "M": 5})");
    CHECK(run_cli({"--config", noseed, "sample"}).code == 2);

    const std::string frozen = t.write("f.csv", "# meanfield-lab samples v1\n# n=1\n# N=[4]\n# seed=0\n2\n2\n2\n");
    const Run zero = run_cli({"invert", "--samples", frozen});
    CHECK(zero.code == 3);
    CHECK(io::parse_json(zero.err).at("error") == "ZeroVariance");

    const Run empty_ball = run_cli({"invert", "--samples", frozen, "--ball", "-0.5,0.1"});
    CHECK(io::parse_json(empty_ball.err).at("error") == "EmptyCondition");

    CHECK(run_cli({"frobnicate"}).code == 2);
    CHECK(run_cli({}).code == 2);
  }

  TEST_CASE("the installed executable runs end to end") {
    TempDir t;
    const std::string cfg = t.write("ref.json", kReference);
    const std::string cmd = std::string(MEANFIELD_EXE) + " --config " + cfg + " --out " + t.file("s.csv") +
                            " sample 2>" + t.file("err.txt");
    const int status = std::system(cmd.c_str());
    REQUIRE(WIFEXITED(status));
    CHECK(WEXITSTATUS(status) == 0);
    const Run in_process = run_cli({"--config", cfg, "sample"});
    CHECK(io::read_text_file(t.file("s.csv")) == in_process.out);

    const int bad = std::system((std::string(MEANFIELD_EXE) + " --config " + t.file("missing") + " solve 2>" +
                                 t.file("err.txt")).c_str());
    CHECK(WEXITSTATUS(bad) == 4);
    CHECK(io::read_json_file(t.file("err.txt")).at("exit_code") == 4);
  }
}
