#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cardan/csv.hpp"
#include "cardan/dataset.hpp"
#include "support.hpp"

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome cli(const fs::path& dir, const std::string& args) {
  const auto out = dir / "stdout.txt";
  const auto err = dir / "stderr.txt";
  const std::string command =
      std::string("\"") + CARDAN_CLI + "\" " + args + " > \"" + out.string() + "\" 2> \"" + err.string() + "\"";
  const int status = std::system(command.c_str());
  REQUIRE(WIFEXITED(status));
  return {WEXITSTATUS(status), slurp(out), slurp(err)};
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

TEST_CASE("cli hide and extract round trip with an oracle pair") {
  const auto dir = testing::scratch("cli_roundtrip");
  const std::string d = dir.string();
  REQUIRE(cli(dir, "train --family oracle-smooth --size 16 --channels 3 --latent-dim 8 --seed 3 --out " + d + "/model")
              .code == 0);
  CHECK(fs::exists(dir / "model"));

  cardan::Rng rng(5);
  cardan::write_raster(dir / "cover.png", testing::random_image(rng, {16, 16, 3}));

  const std::string grille = "--key 6361726461 --grille-rows 8 --grille-cols 8 --density 0.5 --si 4";
  const auto hidden = cli(dir, "hide --model " + d + "/model --cover " + d + "/cover.png --out " + d +
                                   "/stego.png --message-hex c0ffee --budget 40 --seed 2 --mode hard " + grille +
                                   " --trace " + d + "/trace.csv --save-grille " + d + "/grille.txt");
  REQUIRE(hidden.code == 0);
  CHECK(fs::exists(dir / "stego.png"));
  CHECK(fs::exists(dir / "trace.csv"));
  CHECK(cardan::CsvTable::load(dir / "trace.csv").rows.size() == 40);

  const auto by_key = cli(dir, "extract --stego " + d + "/stego.png --length 24 " + grille);
  REQUIRE(by_key.code == 0);
  CHECK(trim(by_key.out) == "c0ffee");

  const auto by_doc = cli(dir, "extract --stego " + d + "/stego.png --grille " + d + "/grille.txt --format bits");
  REQUIRE(by_doc.code == 0);
  CHECK(trim(by_doc.out) == "110000001111111111101110");

  REQUIRE(cli(dir, "extract --stego " + d + "/stego.png --grille " + d + "/grille.txt --out " + d + "/msg.bin").code ==
          0);
  CHECK(slurp(dir / "msg.bin") == std::string("\xc0\xff\xee", 3));

  SUBCASE("missing length is a usage error") {
    CHECK(cli(dir, "extract --stego " + d + "/stego.png " + grille).code == 2);
  }
  SUBCASE("message beyond capacity") {
    const std::string big(200, 'f');
    const auto r = cli(dir, "hide --model " + d + "/model --cover " + d + "/cover.png --out " + d +
                                "/big.png --message-hex " + big + " --budget 2 " + grille);
    CHECK(r.code == 3);
    CHECK(!fs::exists(dir / "big.png"));
  }
  SUBCASE("lossy output is refused") {
    CHECK(cli(dir, "hide --model " + d + "/model --cover " + d + "/cover.png --out " + d +
                       "/stego.jpg --message-hex 01 --budget 2 " + grille)
              .code == 4);
  }
  SUBCASE("grille larger than the image") {
    CHECK(cli(dir, "hide --model " + d + "/model --cover " + d + "/cover.png --out " + d +
                       "/x.png --message-hex 01 --budget 2 --key 00 --grille-rows 20 --grille-cols 20")
              .code == 5);
  }
  SUBCASE("malformed grille document") {
    std::ofstream(dir / "bad.txt") << "not a grille\n";
    CHECK(cli(dir, "extract --stego " + d + "/stego.png --length 8 --grille " + d + "/bad.txt").code == 4);
  }
  SUBCASE("missing cover directory") {
    CHECK(cli(dir, "eval-ber --model " + d + "/model --data " + d + "/nowhere --trials 1").code == 2);
  }
  SUBCASE("missing model") {
    CHECK(cli(dir, "hide --model " + d + "/absent --cover " + d + "/cover.png --out " + d +
                       "/x.png --message-hex 01 " + grille)
              .code == 4);
  }
}

TEST_CASE("cli usage errors") {
  const auto dir = testing::scratch("cli_usage");
  CHECK(cli(dir, "").code == 2);
  CHECK(cli(dir, "bogus").code == 2);
  CHECK(cli(dir, "hide --cover x.png").code == 2);
  CHECK(cli(dir, "train --out m --channels 2").code == 2);
  CHECK(cli(dir, "--help").code == 0);
  CHECK(cli(dir, "extract --stego nothing.png --length 8 --key zz --grille-rows 2 --grille-cols 2").code == 2);
}

TEST_CASE("cli experiment commands write csv, images and plots") {
  const auto dir = testing::scratch("cli_experiments");
  const std::string d = dir.string();
  REQUIRE(cli(dir, "train --family oracle-smooth --size 16 --channels 1 --latent-dim 4 --out " + d + "/model").code ==
          0);

  const std::string ber_args = "eval-ber --model " + d + "/model --synthetic 3 --trials 2 --budgets 4 8 --si 5 7";
  REQUIRE(cli(dir, ber_args + " --out " + d + "/a.csv --plot-dir " + d + "/plots").code == 0);
  REQUIRE(cli(dir, ber_args + " --out " + d + "/b.csv").code == 0);
  CHECK(slurp(dir / "a.csv") == slurp(dir / "b.csv"));
  CHECK(cardan::CsvTable::load(dir / "a.csv").rows.size() == 2 * 2 + 2);
  CHECK(fs::exists(dir / "plots" / "ber_vs_budget.svg"));

  REQUIRE(cli(dir, "sweep-grille --model " + d + "/model --sizes 4 8 --budget 3 --out-dir " + d + "/sweep").code == 0);
  CHECK(cardan::CsvTable::load(dir / "sweep" / "sweep.csv").rows.size() == 2);
  CHECK(fs::exists(dir / "sweep" / "stego_size_8.png"));
  CHECK(fs::exists(dir / "sweep" / "ber_vs_grille_size.svg"));
  CHECK(cli(dir, "sweep-grille --model " + d + "/model --sizes 0 --out-dir " + d + "/sweep0").code == 2);

  REQUIRE(cli(dir, "zero-message --model " + d + "/model --budget 20 --snapshots 4 --out-dir " + d + "/zero").code ==
          0);
  CHECK(cardan::CsvTable::load(dir / "zero" / "zero_message.csv").rows.size() == 4);
  CHECK(fs::exists(dir / "zero" / "snapshot_0020.png"));
  CHECK(fs::exists(dir / "zero" / "trace.csv"));

  REQUIRE(cli(dir, "plot " + d + "/zero/trace.csv --out-dir " + d + "/replot").code == 0);
  CHECK(fs::exists(dir / "replot" / "loss_trace.svg"));
  std::ofstream(dir / "junk.csv") << "a,b\n1,2\n";
  CHECK(cli(dir, "plot " + d + "/junk.csv --out-dir " + d + "/replot").code == 4);
}
