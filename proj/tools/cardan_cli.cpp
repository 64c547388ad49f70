#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cardan/dataset.hpp"
#include "cardan/error.hpp"
#include "cardan/experiments.hpp"
#include "cardan/grille_document.hpp"
#include "cardan/models.hpp"
#include "cardan/pipeline.hpp"
#include "cardan/plots.hpp"
#include "cardan/rng.hpp"
#include "cardan/training.hpp"

namespace fs = std::filesystem;
using namespace cardan;

namespace {

enum ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kCapacity = 3,
  kFormat = 4,
  kMismatch = 5,
};

// Grille material either from a document or from individual flags.
struct GrilleOptions {
  std::string file;
  std::string key_hex;
  int rows = 0;
  int cols = 0;
  double density = kDefaultGrilleDensity;
  int si = 7;
  std::vector<int> offset;

  void add(CLI::App* cmd) {
    auto* f = cmd->add_option("--grille", file, "Grille document");
    auto* k = cmd->add_option("--key", key_hex, "Grille key as hex");
    f->excludes(k);
    cmd->add_option("--grille-rows", rows, "Grille rows (with --key)");
    cmd->add_option("--grille-cols", cols, "Grille columns (with --key)");
    cmd->add_option("--density", density, "Grille density (with --key)");
    cmd->add_option("--si", si, "Stability index (with --key)")->check(CLI::Range(0, 7));
    cmd->add_option("--offset", offset, "Grille offset ROW COL (default centered)")->expected(2);
  }

  GrilleDocument document() const {
    if (!file.empty()) return GrilleDocument::load(file);
    if (key_hex.empty()) throw InvalidArgument("either --grille or --key is required");
    if (rows < 1 || cols < 1) throw InvalidArgument("--key needs --grille-rows and --grille-cols");
    auto doc = GrilleDocument::from_key(from_hex(key_hex), rows, cols, density, si);
    if (!offset.empty()) doc.offset = Offset{offset[0], offset[1]};
    return doc;
  }
};

std::optional<Rect> parse_region(const std::vector<int>& v) {
  if (v.empty()) return std::nullopt;
  return Rect{v[0], v[1], v[2], v[3]};
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot read " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write " + path.string());
  out << text;
}

void write_plots(const CsvTable& table, const fs::path& dir) {
  fs::create_directories(dir);
  for (const auto& plot : render_plots(table)) write_text(dir / (plot.name + ".svg"), plot.svg);
}

Dataset load_covers(const std::string& data_dir, int synthetic, const ImageShape& shape, std::uint64_t seed) {
  if (!data_dir.empty()) return ingest(data_dir, shape.height, shape.channels);
  return synthesize(synthetic, shape.height, seed, shape.channels);
}

Image load_cover(const std::string& path, const ImageShape& shape, std::uint64_t seed) {
  if (!path.empty()) return load_image(path, shape.height, shape.channels);
  return synthesize(1, shape.height, seed, shape.channels).front().pixels;
}

void print_summary(const ExperimentResult& r) {
  std::cout << "model " << r.model_fingerprint << ", seed " << r.seed << ", " << r.optimization_runs
            << " optimization runs";
  if (r.non_monotone_runs != 0) std::cout << " (" << r.non_monotone_runs << " with a rising best loss)";
  std::cout << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"Hide bit strings in GAN-completed images with a keyed Cardan grille"};
  app.require_subcommand(1);

  // ---- train --------------------------------------------------------------
  auto* train = app.add_subcommand("train", "Train a generator/discriminator pair (or build an oracle pair)");
  std::string train_data, train_out, train_family = "adversarial-conv";
  int train_synthetic = 200, train_size = 32, train_channels = 3, train_every = 5;
  TrainingConfig tc;
  tc.epochs = 20;
  train->add_option("--data", train_data, "Directory of training images");
  train->add_option("--synthetic", train_synthetic, "Synthesize this many images when --data is absent");
  train->add_option("--size", train_size, "Image side");
  train->add_option("--channels", train_channels, "1 or 3")->check(CLI::IsMember({1, 3}));
  train->add_option("--epochs", tc.epochs, "Epochs (0 keeps the initialization)");
  train->add_option("--batch", tc.batch_size, "Batch size");
  train->add_option("--lr-g", tc.generator_learning_rate, "Generator learning rate");
  train->add_option("--lr-d", tc.discriminator_learning_rate, "Discriminator learning rate");
  train->add_option("--beta1", tc.beta1, "Adam beta1");
  train->add_option("--latent-dim", tc.architecture.latent_dim, "Latent dimension");
  train->add_option("--base-width", tc.architecture.base_width, "Channel width of the last hidden layer");
  train->add_option("--seed", tc.seed, "Seed");
  train->add_option("--checkpoint-every", train_every, "Checkpoint cadence in epochs");
  train->add_option("--family", train_family, "adversarial-conv or oracle-smooth")
      ->check(CLI::IsMember({"adversarial-conv", "oracle-smooth"}));
  train->add_option("--out", train_out, "Output model directory")->required();

  // ---- hide ---------------------------------------------------------------
  auto* hide_cmd = app.add_subcommand("hide", "Complete a corrupted cover while writing a message");
  GrilleOptions hide_grille;
  hide_grille.add(hide_cmd);
  std::string hide_model, hide_cover, hide_out, hide_trace, hide_save_grille, msg_hex, msg_file, msg_bits;
  std::string hide_mode = "soft";
  std::vector<int> hide_region;
  HideConfig hc;
  hide_cmd->add_option("--model", hide_model, "Model directory")->required();
  hide_cmd->add_option("--cover", hide_cover, "Cover image")->required();
  hide_cmd->add_option("--out", hide_out, "Stego output (lossless: png, bmp, ppm, pgm, tif)")->required();
  auto* mh = hide_cmd->add_option("--message-hex", msg_hex, "Message as hex digits");
  auto* mf = hide_cmd->add_option("--message-file", msg_file, "Message as raw bytes from a file");
  auto* mb = hide_cmd->add_option("--message-bits", msg_bits, "Message as a 0/1 string");
  mh->excludes(mf)->excludes(mb);
  mf->excludes(mb);
  hide_cmd->add_option("--mode", hide_mode, "soft or hard")->check(CLI::IsMember({"soft", "hard"}));
  hide_cmd->add_option("--lambda", hc.weights.perceptual, "Perceptual loss weight");
  hide_cmd->add_option("--message-weight", hc.weights.message, "Message loss weight");
  hide_cmd->add_option("--budget", hc.budget, "Iterations per restart");
  hide_cmd->add_option("--restarts", hc.restarts, "Random restarts");
  hide_cmd->add_option("--seed", hc.seed, "Optimizer seed");
  hide_cmd->add_option("--region", hide_region, "Completion region ROW COL HEIGHT WIDTH")->expected(4);
  hide_cmd->add_option("--trace", hide_trace, "Write the optimization trace CSV here");
  hide_cmd->add_option("--save-grille", hide_save_grille, "Write the grille document (with message length)");

  // ---- extract ------------------------------------------------------------
  auto* extract_cmd = app.add_subcommand("extract", "Read a message back from a stego image");
  GrilleOptions ex_grille;
  ex_grille.add(extract_cmd);
  std::string ex_stego, ex_out, ex_format = "hex";
  std::optional<std::size_t> ex_length;
  extract_cmd->add_option("--stego", ex_stego, "Stego image")->required();
  extract_cmd->add_option("--length", ex_length, "Message length in bits (default: from the grille document)");
  extract_cmd->add_option("--format", ex_format, "hex or bits")->check(CLI::IsMember({"hex", "bits"}));
  extract_cmd->add_option("--out", ex_out, "Write the message bytes to this file instead of stdout");

  // ---- eval-ber -----------------------------------------------------------
  auto* ber_cmd = app.add_subcommand("eval-ber", "Soft-mode bit error rate per si and budget");
  BerExperimentConfig bc;
  std::string ber_model, ber_data, ber_out = "ber.csv", ber_plots;
  int ber_synthetic = 20;
  int ber_grille_size = 0;
  std::vector<int> ber_region;
  bool ber_no_hard = false;
  ber_cmd->add_option("--model", ber_model, "Model directory")->required();
  ber_cmd->add_option("--data", ber_data, "Cover image directory");
  ber_cmd->add_option("--synthetic", ber_synthetic, "Synthesized covers when --data is absent");
  ber_cmd->add_option("--si", bc.stability_indices, "Stability indices");
  ber_cmd->add_option("--budgets", bc.budgets, "Iteration budgets");
  ber_cmd->add_option("--trials", bc.trials, "Trials per cell");
  ber_cmd->add_option("--seed", bc.seed, "Seed");
  ber_cmd->add_option("--density", bc.density, "Grille density");
  ber_cmd->add_option("--grille-size", ber_grille_size, "Square grille side (default: region side)");
  ber_cmd->add_option("--region", ber_region, "ROW COL HEIGHT WIDTH")->expected(4);
  ber_cmd->add_option("--lambda", bc.weights.perceptual, "Perceptual loss weight");
  ber_cmd->add_option("--restarts", bc.restarts, "Random restarts");
  ber_cmd->add_flag("--no-hard", ber_no_hard, "Skip the hard-mode rows");
  ber_cmd->add_option("--out", ber_out, "CSV output");
  ber_cmd->add_option("--plot-dir", ber_plots, "Also render SVG plots here");

  // ---- sweep-grille -------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep-grille", "Soft-mode hide for several grille sizes");
  GrilleSweepConfig sc;
  std::string sweep_model, sweep_cover, sweep_out = "sweep";
  std::vector<int> sweep_sizes{8, 16, 32, 48}, sweep_region;
  sweep_cmd->add_option("--model", sweep_model, "Model directory")->required();
  sweep_cmd->add_option("--cover", sweep_cover, "Cover image (default: synthesized)");
  sweep_cmd->add_option("--sizes", sweep_sizes, "Grille sides");
  sweep_cmd->add_option("--region", sweep_region, "ROW COL HEIGHT WIDTH")->expected(4);
  sweep_cmd->add_option("--seed", sc.seed, "Seed");
  sweep_cmd->add_option("--density", sc.density, "Grille density");
  sweep_cmd->add_option("--si", sc.si, "Stability index")->check(CLI::Range(0, 7));
  sweep_cmd->add_option("--budget", sc.budget, "Iterations per restart");
  sweep_cmd->add_option("--restarts", sc.restarts, "Random restarts");
  sweep_cmd->add_option("--lambda", sc.weights.perceptual, "Perceptual loss weight");
  sweep_cmd->add_option("--out-dir", sweep_out, "Output directory");

  // ---- zero-message -------------------------------------------------------
  auto* zero_cmd = app.add_subcommand("zero-message", "Hide the all-zero message and keep snapshots");
  ZeroMessageConfig zc;
  std::string zero_model, zero_cover, zero_out = "zero_message";
  int zero_budget = 600;
  zero_cmd->add_option("--model", zero_model, "Model directory")->required();
  zero_cmd->add_option("--cover", zero_cover, "Cover image (default: synthesized)");
  zero_cmd->add_option("--budget", zero_budget, "Iterations per restart");
  zero_cmd->add_option("--seed", zc.seed, "Seed");
  zero_cmd->add_option("--density", zc.density, "Grille density");
  zero_cmd->add_option("--si", zc.si, "Stability index")->check(CLI::Range(0, 7));
  zero_cmd->add_option("--snapshots", zc.snapshots, "Number of snapshots");
  zero_cmd->add_option("--out-dir", zero_out, "Output directory");

  // ---- plot ---------------------------------------------------------------
  auto* plot_cmd = app.add_subcommand("plot", "Render SVG plots from a CSV written by this tool");
  std::string plot_csv, plot_out = ".";
  plot_cmd->add_option("csv", plot_csv, "CSV file")->required();
  plot_cmd->add_option("--out-dir", plot_out, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  if (train->parsed()) {
    const ImageShape shape{train_size, train_size, train_channels};
    if (train_family == "oracle-smooth") {
      const auto pair = make_oracle(tc.architecture.latent_dim, shape, tc.seed);
      save_model_pair(pair, train_out);
      std::cout << "oracle pair " << model_fingerprint(*pair.generator, *pair.discriminator) << "\n";
      return kOk;
    }
    const Dataset data = load_covers(train_data, train_synthetic, shape, derive_seed(tc.seed, 7));
    tc.checkpoint_dir = fs::path(train_out);
    tc.checkpoint_every = train_every;
    const auto result = train_adversarial(data, tc, &std::cout);
    std::cout << "model " << model_fingerprint(*result.models.generator, *result.models.discriminator) << "\n";
    return kOk;
  }

  if (hide_cmd->parsed()) {
    const auto models = load_model_pair(hide_model);
    const ImageShape shape = models.generator->output_shape();
    SecretMessage message;
    if (!msg_hex.empty()) {
      message = SecretMessage::from_hex(msg_hex);
    } else if (!msg_file.empty()) {
      const std::string bytes = read_file(msg_file);
      message = SecretMessage::from_bytes(
          std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    } else if (!msg_bits.empty()) {
      message = SecretMessage::from_bitstring(msg_bits);
    } else {
      throw InvalidArgument("one of --message-hex, --message-file or --message-bits is required");
    }
    if (!is_lossless_extension(hide_out)) {
      throw FormatError("refusing lossy or unknown output format '" + fs::path(hide_out).extension().string() + "'");
    }
    hc.grille = hide_grille.document();
    hc.mode = parse_completion_mode(hide_mode);
    hc.region = parse_region(hide_region);
    const Image cover = load_image(hide_cover, shape.height, shape.channels);
    const auto result = hide(cover, message, hc, *models.generator, *models.discriminator);

    StegoSidecar sidecar;
    sidecar.mode = std::string(to_string(hc.mode));
    sidecar.iterations = hc.budget;
    sidecar.restarts = hc.restarts;
    sidecar.lambda = hc.weights.perceptual;
    sidecar.seed = hc.seed;
    sidecar.model_fingerprint = model_fingerprint(*models.generator, *models.discriminator);
    sidecar.shape = shape;
    sidecar.best_total_loss = result.optimization.best_loss.total;
    write_stego(hide_out, result.stego, sidecar);
    if (!hide_trace.empty()) write_text(hide_trace, result.optimization.trace.to_csv());
    if (!hide_save_grille.empty()) {
      auto doc = hc.grille;
      doc.length = message.size();
      doc.save(hide_save_grille);
    }
    const auto check = extract(result.stego.image, hc.grille, message.size());
    std::cout << "wrote " << hide_out << " (" << message.size() << " bits, capacity "
              << capacity(result.carrier.padded, shape.channels, hc.grille.si) << ", best loss "
              << result.optimization.best_loss.total << ", self-check BER " << bit_error_rate(message, check)
              << ")\n";
    if (result.overlap.overlapping_cells != 0) {
      std::cerr << "warning: " << result.overlap.overlapping_cells << " of " << result.overlap.grille_cells
                << " grille cells lie outside the completion region\n";
    }
    return kOk;
  }

  if (extract_cmd->parsed()) {
    const auto doc = ex_grille.document();
    const auto length = ex_length ? ex_length : doc.length;
    if (!length) throw InvalidArgument("message length unknown: pass --length or a grille document with one");
    const auto message = extract_file(ex_stego, doc, *length);
    if (!ex_out.empty()) {
      const Bytes bytes = message.to_bytes();
      write_text(ex_out, std::string(bytes.begin(), bytes.end()));
    } else {
      std::cout << (ex_format == "bits" ? message.to_bitstring() : message.to_hex()) << "\n";
    }
    return kOk;
  }

  if (ber_cmd->parsed()) {
    const auto models = load_model_pair(ber_model);
    const ImageShape shape = models.generator->output_shape();
    if (ber_grille_size > 0) bc.grille_size = ber_grille_size;
    bc.region = parse_region(ber_region);
    bc.hard_mode_rows = !ber_no_hard;
    const Dataset covers = load_covers(ber_data, ber_synthetic, shape, derive_seed(bc.seed, 7));
    const auto result = eval_ber(*models.generator, *models.discriminator, covers, bc);
    result.table.save(ber_out);
    if (!ber_plots.empty()) write_plots(result.table, ber_plots);
    std::cout << result.table.to_string();
    print_summary(result);
    return kOk;
  }

  if (sweep_cmd->parsed()) {
    const auto models = load_model_pair(sweep_model);
    const ImageShape shape = models.generator->output_shape();
    sc.region = parse_region(sweep_region);
    const Image cover = load_cover(sweep_cover, shape, derive_seed(sc.seed, 7));
    const auto result = sweep_grille_size(*models.generator, *models.discriminator, cover, sweep_sizes, sc);
    fs::create_directories(sweep_out);
    result.table.save(fs::path(sweep_out) / "sweep.csv");
    for (const auto& a : result.artifacts) write_raster(fs::path(sweep_out) / (a.name + ".png"), a.image);
    write_plots(result.table, sweep_out);
    std::cout << result.table.to_string();
    print_summary(result);
    return kOk;
  }

  if (zero_cmd->parsed()) {
    const auto models = load_model_pair(zero_model);
    const ImageShape shape = models.generator->output_shape();
    const Image cover = load_cover(zero_cover, shape, derive_seed(zc.seed, 7));
    const auto result = run_zero_message(*models.generator, *models.discriminator, cover, zero_budget, zc);
    const fs::path dir(zero_out);
    fs::create_directories(dir);
    result.table.save(dir / "zero_message.csv");
    write_text(dir / "trace.csv", result.trace.to_csv());
    write_raster(dir / "stego.png", result.stego.image);
    for (const auto& s : result.snapshots) {
      char name[32];
      std::snprintf(name, sizeof name, "snapshot_%04d.png", s.iteration);
      write_raster(dir / name, s.image);
    }
    write_plots(result.table, dir);
    std::cout << result.table.to_string();
    return kOk;
  }

  if (plot_cmd->parsed()) {
    const auto table = CsvTable::load(plot_csv);
    write_plots(table, plot_out);
    return kOk;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << "\n";
    return kCapacity;
  } catch (const FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kFormat;
  } catch (const ShapeError& e) {
    std::cerr << "shape mismatch: " << e.what() << "\n";
    return kMismatch;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
