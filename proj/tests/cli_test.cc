#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "xlene/checkpoint.h"
#include "xlene/cli.h"
#include "xlene/records.h"

using namespace xlene;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  args.insert(args.begin(), "xlene");
  std::ostringstream out, err;
  int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

fs::path scratch(const std::string& name) {
  auto dir = fs::temp_directory_path() / ("xlene_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("usage errors") {
  CHECK(run({}).code == 1);
  CHECK(run({"frobnicate"}).code == 1);
  CHECK(run({"vote", "--bogus"}).code == 1);
  CHECK(run({"vote"}).code == 1);
  CHECK(run({"--help"}).code == 0);
  auto v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find(kToolVersion) != std::string::npos);
  CHECK(v.out.find("checkpoint format 1") != std::string::npos);
}

TEST_CASE("missing inputs are data errors") {
  auto r = run({"train", "--taxonomy", "/nonexistent/tax.tsv", "--pages", ".", "--gold", ".",
                "--out", "x.ckpt"});
  CHECK(r.code == 2);
  CHECK(r.err.find("/nonexistent/tax.tsv") != std::string::npos);
  CHECK(run({"train", "--config", "/nonexistent/cfg.json"}).code == 2);
}

TEST_CASE("gradcheck") {
  auto r = run({"gradcheck", "--seed", "7"});
  CHECK(r.code == 0);
  CHECK(r.out.find("max relative error") != std::string::npos);
}

TEST_CASE("vote and eval") {
  auto dir = scratch("vote");
  std::ofstream(dir / "links.tsv") << "g1\ten\tp1\ng1\tfr\tp2\n";
  std::ofstream(dir / "preds.jsonl")
      << R"({"lang":"en","pageid":"p1","labels":["1.1"],"scores":{},"fallback":false})" "\n"
      << R"({"lang":"fr","pageid":"p2","labels":["1.1","1.2"],"scores":{},"fallback":false})" "\n";
  std::ofstream(dir / "gold.tsv") << "en\tp1\t1.1\nfr\tp2\t1.1,1.2\n";
  auto r = run({"vote", "--links", (dir / "links.tsv").string(), "--pred",
                (dir / "preds.jsonl").string(), "--out", (dir / "voted.jsonl").string()});
  CHECK(r.code == 0);
  auto voted = read_predictions_file((dir / "voted.jsonl").string());
  REQUIRE(voted.size() == 2);
  CHECK(voted[1].labels == std::vector<std::string>{"1.1"});

  auto e = run({"eval", "--gold", (dir / "gold.tsv").string(), "--pred",
                (dir / "voted.jsonl").string(), "--name", "voted", "--tsv",
                (dir / "m.tsv").string()});
  CHECK(e.code == 0);
  CHECK(slurp(dir / "m.tsv").find("voted\tall\t1.000000\t0.666667\t0.800000") != std::string::npos);

  auto bad = run({"eval", "--gold", (dir / "gold.tsv").string(), "--pred",
                  (dir / "voted.jsonl").string(), "--score-extra", "maybe"});
  CHECK(bad.code == 1);
  fs::remove_all(dir);
}

TEST_CASE("config file precedence") {
  auto dir = scratch("config");
  CHECK(run({"synth", "--out", (dir / "syn").string(), "--entities", "12"}).code == 0);
  std::ofstream(dir / "cfg.json") << R"({"vocab": 256, "embed-dim": 4, "hidden-dim": 6,
    "epochs": 2, "holdout": 0, "seed": 5, "languages": ["xa"], "weighting": false,
    "links": "ignored-by-train"})";
  auto base = std::vector<std::string>{
      "train", "--config", (dir / "cfg.json").string(), "--taxonomy",
      (dir / "syn/taxonomy.tsv").string(), "--pages", (dir / "syn/pages").string(), "--gold",
      (dir / "syn/gold.tsv").string()};
  auto a = base;
  a.insert(a.end(), {"--out", (dir / "a.ckpt").string()});
  auto ra = run(a);
  REQUIRE(ra.code == 0);
  auto ckpt = load_checkpoint((dir / "a.ckpt").string());
  CHECK(ckpt.model.spec.vocab == 256);
  CHECK(ckpt.model.spec.hidden_dim == 6);
  CHECK(ckpt.metadata.find("\"epochs_run\":2") != std::string::npos);
  CHECK(ckpt.metadata.find("\"seed\":5") != std::string::npos);

  auto b = base;
  b.insert(b.end(), {"--out", (dir / "b.ckpt").string(), "--hidden-dim", "5"});
  REQUIRE(run(b).code == 0);
  CHECK(load_checkpoint((dir / "b.ckpt").string()).model.spec.hidden_dim == 5);

  auto c = base;
  c.insert(c.end(), {"--out", (dir / "c.ckpt").string()});
  REQUIRE(run(c).code == 0);
  CHECK(slurp(dir / "a.ckpt") == slurp(dir / "c.ckpt"));
  fs::remove_all(dir);
}

TEST_CASE("finetune takes encoder settings from the base checkpoint") {
  auto dir = scratch("finetune");
  REQUIRE(run({"synth", "--out", (dir / "syn").string(), "--entities", "12"}).code == 0);
  auto common = std::vector<std::string>{"--taxonomy", (dir / "syn/taxonomy.tsv").string(),
                                         "--pages", (dir / "syn/pages").string(), "--gold",
                                         (dir / "syn/gold.tsv").string(), "--holdout", "0"};
  auto train = std::vector<std::string>{"train", "--vocab", "300", "--embed-dim", "4",
                                        "--hidden-dim", "6", "--max-len", "40", "--epochs", "2",
                                        "--out", (dir / "base.ckpt").string()};
  train.insert(train.end(), common.begin(), common.end());
  REQUIRE(run(train).code == 0);

  auto ft = std::vector<std::string>{"finetune", "--base", (dir / "base.ckpt").string(),
                                     "--lang", "xa", "--finetune-epochs", "1", "--out",
                                     (dir / "xa.ckpt").string()};
  ft.insert(ft.end(), common.begin(), common.end());
  auto r = run(ft);
  REQUIRE(r.code == 0);
  auto ckpt = load_checkpoint((dir / "xa.ckpt").string());
  CHECK(ckpt.model.spec.vocab == 300);
  CHECK(ckpt.metadata.find("\"max_len\":40") != std::string::npos);

  ft.insert(ft.end(), {"--vocab", "512"});
  auto clash = run(ft);
  CHECK(clash.code == 2);
  CHECK(clash.err.find("vocabulary size 512") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("transformer preset yields to explicit flags") {
  auto dir = scratch("preset");
  REQUIRE(run({"synth", "--out", (dir / "syn").string(), "--entities", "12"}).code == 0);
  auto lr_of = [&](std::vector<std::string> extra) {
    auto args = std::vector<std::string>{
        "train", "--taxonomy", (dir / "syn/taxonomy.tsv").string(), "--pages",
        (dir / "syn/pages").string(), "--gold", (dir / "syn/gold.tsv").string(), "--vocab", "256",
        "--embed-dim", "4", "--hidden-dim", "6", "--epochs", "1", "--holdout", "0", "--preset",
        "transformer", "--out", (dir / "p.ckpt").string()};
    args.insert(args.end(), extra.begin(), extra.end());
    REQUIRE(run(args).code == 0);
    return load_checkpoint((dir / "p.ckpt").string()).optimizer->config.learning_rate;
  };
  CHECK(lr_of({}) == 2e-5);
  CHECK(lr_of({"--lr", "0.01"}) == 0.01);
  fs::remove_all(dir);
}
