#include <fstream>
#include <sstream>

#include <doctest.h>
#include <nlohmann/json.hpp>

#include "mmf/features/manifest.hpp"
#include "mmf/features/table.hpp"
#include "mmf/imgio/codec.hpp"
#include "support.hpp"

using namespace mmf;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::string q(const fs::path& p) { return "'" + p.string() + "'"; }

struct Run {
  int code;
  std::string out, err;
};

Run cli(const test::TempDir& dir, const std::string& args) {
  const auto o = dir / "stdout.txt", e = dir / "stderr.txt";
  const int code = test::run_cli(args + " >" + q(o) + " 2>" + q(e));
  return {code, slurp(o), slurp(e)};
}

}  // namespace

TEST_CASE("cli basics") {
  test::TempDir dir("cli");
  auto r = cli(dir, "--version");
  CHECK(r.code == 0);
  CHECK(r.out.find("mmf 1.0.0") != std::string::npos);
  CHECK(r.out.find("extractor: tiny-v1") != std::string::npos);

  r = cli(dir, "metrics list");
  CHECK(r.code == 0);
  for (const char* m : {"psnr", "ssim", "dists", "lpips", "mad"}) CHECK(r.out.find(m) != std::string::npos);

  CHECK(cli(dir, "").code == 1);
  CHECK(cli(dir, "frobnicate").code == 1);
  CHECK(cli(dir, "score --tier core").code == 1);  // --manifest missing

  r = cli(dir, "score --manifest " + q(dir / "nope.jsonl") + " --tier core --out " + q(dir / "x.csv"));
  CHECK(r.code == 3);
  CHECK(r.err.find("nope.jsonl") != std::string::npos);

  r = cli(dir, "score --manifest " + q(dir / "nope.jsonl") + " --tier huge --out " + q(dir / "x.csv"));
  CHECK(r.code == 1);
}

TEST_CASE("cli end to end on a small corpus") {
  test::TempDir dir("cli");
  const auto data = dir / "data";
  REQUIRE(test::run_cli("--quiet synth --out " + q(data) + " --sources 24 --models 3 --size 64") == 0);
  const auto manifest = data / "manifest.jsonl";
  REQUIRE(fs::exists(manifest));

  auto r = cli(dir, "--quiet score --manifest " + q(manifest) + " --tier core --out " + q(dir / "core.csv"));
  REQUIRE(r.code == 0);
  const auto table = features::read_csv(dir / "core.csv");
  CHECK(table.rows() == 24 * 4);
  CHECK(table.has_target());

  r = cli(dir, "--quiet train --features " + q(dir / "core.csv") + " --mode fast --budget 60 --out " + q(dir / "bundle"));
  REQUIRE(r.code == 0);
  CHECK(r.out.find("test MAE") != std::string::npos);
  CHECK(fs::exists(dir / "bundle" / "bundle.json"));

  r = cli(dir, "--quiet predict --bundle " + q(dir / "bundle") + " --features " + q(dir / "core.csv") + " --out " +
                   q(dir / "pred.csv"));
  REQUIRE(r.code == 0);
  const auto pred = features::read_csv(dir / "pred.csv");
  CHECK(pred.find("predicted_dists").has_value());

  SUBCASE("gate") {
    r = cli(dir, "--quiet gate --manifest " + q(manifest) + " --bundle " + q(dir / "bundle") + " --threshold 1.0");
    REQUIRE(r.code == 0);
    const auto rep = nlohmann::json::parse(r.out);
    CHECK(rep["summary"]["count"] == 24 * 4);
    CHECK(rep["summary"]["accepted"] == 24 * 4);
    CHECK(rep["summary"]["rejected"] == 0);
    CHECK(rep["bundle"]["metrics_tier"] == "core");
    CHECK(rep["bundle"]["extractor_provenance"] == "tiny-v1");
    CHECK(rep["samples"].size() == 24 * 4);
    for (const auto& s : rep["samples"]) {
      CHECK(s["decision"] == "accept");
      CHECK(s["threshold"] == 1.0);
    }

    r = cli(dir, "--quiet gate --manifest " + q(manifest) + " --bundle " + q(dir / "bundle") +
                     " --threshold 0.0 --strict --out " + q(dir / "gate.json"));
    CHECK(r.code == 2);
    const auto strict = nlohmann::json::parse(slurp(dir / "gate.json"));
    CHECK(strict["summary"]["rejected"].get<int>() > 0);

    CHECK(cli(dir, "gate --manifest " + q(manifest) + " --bundle " + q(dir / "bundle") + " --threshold 1.5").code == 1);
    CHECK(cli(dir, "gate --manifest " + q(manifest) + " --bundle " + q(dir / "bundle")).code == 1);
    r = cli(dir, "gate --manifest " + q(manifest) + " --bundle " + q(dir / "missing") + " --threshold 0.5");
    CHECK(r.code == 3);
    CHECK(r.err.find("missing") != std::string::npos);
  }

  SUBCASE("manifest without ground truth") {
    auto m = features::read_manifest(manifest);
    features::TripletManifest blind;
    for (auto r2 : m.records)
      if (r2.model_id != "gt") {
        r2.ground_truth.reset();
        blind.records.push_back(r2);
      }
    features::write_manifest(blind, dir / "blind.jsonl");
    r = cli(dir, "--quiet score --manifest " + q(dir / "blind.jsonl") + " --tier core --out " + q(dir / "blind.csv"));
    REQUIRE(r.code == 0);
    CHECK_FALSE(features::read_csv(dir / "blind.csv").has_target());
    r = cli(dir, "--quiet train --features " + q(dir / "blind.csv") + " --out " + q(dir / "b2"));
    CHECK(r.code == 1);
    CHECK(r.err.find("target_dists") != std::string::npos);
    // Prediction still works without ground truth.
    CHECK(cli(dir, "--quiet predict --bundle " + q(dir / "bundle") + " --manifest " + q(dir / "blind.jsonl") +
                       " --out " + q(dir / "p2.csv"))
              .code == 0);
  }

  SUBCASE("maps") {
    r = cli(dir, "--quiet maps --a " + q(data / "gt" / "s0000.png") + " --b " + q(data / "gt" / "s0000.png") +
                     " --name same --metrics ssim,mae,tv_ratio --out " + q(dir / "maps"));
    REQUIRE(r.code == 0);
    for (const char* m : {"ssim", "mae", "tv_ratio"}) {
      const auto p = dir / "maps" / (std::string("same_") + m + ".png");
      REQUIRE(fs::exists(p));
      const auto img = imgio::decode(p);
      for (double v : img.values()) CHECK(v == 1.0);
    }
    r = cli(dir, "--quiet maps --manifest " + q(manifest) + " --metrics mae --out " + q(dir / "mm"));
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "mm" / "m1" / "s0003_mae.png"));
    CHECK(cli(dir, "maps --a x.png --b y.png --name n --metrics fsim --out " + q(dir / "bad")).code == 1);
  }
}
