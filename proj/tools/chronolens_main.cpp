// chronolens command line front end.
//
// Exit codes: 0 success, 2 usage, 3 rejected input data, 4 internal error.
// Every output file is written to a sibling temp file and renamed into
// place, and every subcommand's output is a deterministic function of its
// arguments (seeds included), independent of worker count.

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "chronolens/chronolens.hpp"

namespace {

using namespace chronolens;

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), spec, v);
  return buf;
}

void commit_text(const std::string& path, const std::string& text) {
  io::commit_bytes(path, text);
}

// ---------------------------------------------------------------------------
// Shared option bundles
// ---------------------------------------------------------------------------

struct BinningOpts {
  int origin = 1900;
  int width = 10;
  int bins = 11;

  TemporalBinning make() const {
    if (width < 1 || bins < 2) {
      throw CLI::ValidationError("binning",
                                 "--bin-width must be >= 1, --bins >= 2");
    }
    return TemporalBinning{origin, width, bins};
  }
};

void add_binning_opts(CLI::App* cmd, BinningOpts& opts) {
  cmd->add_option("--origin", opts.origin, "First year of the first bin")
      ->capture_default_str();
  cmd->add_option("--bin-width", opts.width, "Years per bin")
      ->capture_default_str();
  cmd->add_option("--bins", opts.bins, "Number of bins")
      ->capture_default_str();
}

enum class SplitFilter { all, train, test };

SplitFilter parse_split(const std::string& s) {
  if (s == "all") return SplitFilter::all;
  if (s == "train") return SplitFilter::train;
  if (s == "test") return SplitFilter::test;
  throw CLI::ValidationError("--split", "must be all|train|test");
}

bool in_split(const Sample& s, SplitFilter f) {
  return f == SplitFilter::all ||
         (f == SplitFilter::train ? s.split == Split::train
                                  : s.split == Split::test);
}

// Loads the image behind a sample, collapsing RGB to gray when the network
// expects a single channel.
ImageTensor load_sample_image(const std::filesystem::path& root,
                              const Sample& s, int want_channels) {
  if (s.path.empty()) {
    throw MalformedManifest("sample \"" + s.id + "\" has no path");
  }
  ImageTensor img = read_pnm(root / s.path);
  if (img.channels == 3 && want_channels == 1) {
    img = grayscale_transform(img);
  }
  return img;
}

std::vector<ImageTensor> load_images(const std::filesystem::path& root,
                                     const std::vector<Sample>& samples,
                                     const std::vector<std::size_t>& idx,
                                     int want_channels) {
  std::vector<ImageTensor> out(idx.size());
  parallel_chunks(idx.size(), [&](std::size_t i) {
    out[i] = load_sample_image(root, samples[idx[i]], want_channels);
  });
  return out;
}

std::vector<std::vector<double>> batch_probs(
    const Network& net, const std::vector<ImageTensor>& imgs) {
  std::vector<std::vector<double>> out(imgs.size());
  parallel_chunks(imgs.size(), [&](std::size_t i) {
    out[i] = forward(net, imgs[i]);
  });
  return out;
}

// ---------------------------------------------------------------------------
// parse-dates
// ---------------------------------------------------------------------------

struct ParseDatesArgs {
  std::string in, out;
  std::string window = "1900:2009";
};

YearRange parse_window(const std::string& text) {
  const std::size_t colon = text.find(':');
  try {
    if (colon == std::string::npos) throw std::invalid_argument(text);
    const int a = std::stoi(text.substr(0, colon));
    const int b = std::stoi(text.substr(colon + 1));
    if (b < a) throw std::invalid_argument(text);
    return YearRange{a, b};
  } catch (const std::exception&) {
    throw CLI::ValidationError("--window", "expected START:END years");
  }
}

void run_parse_dates(const ParseDatesArgs& args) {
  const YearRange window = parse_window(args.window);
  std::ifstream in(args.in);
  if (!in) throw MalformedManifest("cannot open " + args.in);

  std::ostringstream csv;
  csv << "id,start_year,end_year,status\n";
  std::string line;
  std::size_t line_no = 0, total = 0, ok = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const std::size_t tab = line.find('\t');
    if (tab == std::string::npos) {
      throw MalformedManifest("line " + std::to_string(line_no) +
                              ": expected id<TAB>text");
    }
    const std::string id = line.substr(0, tab);
    const std::string text = line.substr(tab + 1);
    ++total;
    try {
      const YearRange r = parse_date_string(text, window);
      csv << id << "," << r.start_year << "," << r.end_year << ",ok\n";
      ++ok;
    } catch (const NoDateFound&) {
      csv << id << ",,,NoDateFound\n";
    } catch (const OutOfWindow&) {
      csv << id << ",,,OutOfWindow\n";
    }
  }
  if (args.out.empty()) {
    std::cout << csv.str();
  } else {
    commit_text(args.out, csv.str());
    std::cout << "parsed=" << total << " ok=" << ok << "\n";
  }
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  int per_bin = 40;
  int image_size = 24;
  int patch_size = 10;
  double noise = 0.06;
  double contrast = 0.9;
  double cycles = 3.0;
  double offset = 0.0;
  double test_fraction = 0.25;
  std::uint64_t seed = 0;
  BinningOpts binning;
};

void run_synth(const SynthArgs& args) {
  SynthConfig cfg;
  cfg.image_size = args.image_size;
  cfg.patch_size = args.patch_size;
  cfg.per_bin = args.per_bin;
  cfg.binning = args.binning.make();
  cfg.noise = args.noise;
  cfg.contrast = args.contrast;
  cfg.cycles = args.cycles;
  cfg.angle_offset = args.offset;
  cfg.seed = args.seed;

  const std::vector<SynthSample> data = make_planted_dataset(cfg);
  const SplitIndices split =
      split_dataset(data.size(), args.test_fraction, args.seed + 1);
  std::vector<Split> assignment(data.size(), Split::train);
  for (std::size_t i : split.test) assignment[i] = Split::test;

  const std::filesystem::path root(args.out);
  std::filesystem::create_directories(root / "images");
  std::vector<Sample> manifest;
  std::ostringstream boxes;
  boxes << "id,y,x,height,width\n";
  for (std::size_t i = 0; i < data.size(); ++i) {
    const SynthSample& s = data[i];
    const std::string rel = "images/" + s.id + ".pgm";
    write_pnm(root / rel, s.image);
    Sample rec;
    rec.id = s.id;
    rec.label_year = s.year;
    rec.split = assignment[i];
    rec.collection_id = "c" + std::to_string(s.bin.value);
    rec.path = rel;
    rec.grayscale = true;
    manifest.push_back(std::move(rec));
    boxes << s.id << "," << s.planted.y << "," << s.planted.x << ","
          << s.planted.height << "," << s.planted.width << "\n";
  }
  save_manifest(root / "manifest.tsv", manifest);
  commit_text((root / "boxes.csv").string(), boxes.str());
  std::cout << "samples=" << data.size() << " train=" << split.train.size()
            << " test=" << split.test.size() << "\n";
}

// ---------------------------------------------------------------------------
// init
// ---------------------------------------------------------------------------

struct InitArgs {
  std::string out;
  int height = 24, width = 24, channels = 1, classes = 11;
  std::uint64_t seed = 0;
};

void run_init(const InitArgs& args) {
  const Network net = make_default_network(args.height, args.width,
                                           args.channels, args.classes,
                                           args.seed);
  save_network(net, args.out);
  std::size_t params = 0;
  for (const Layer& L : net.layers) params += L.weights.size() + L.bias.size();
  std::cout << "layers=" << net.layers.size() << " params=" << params << "\n";
}

// ---------------------------------------------------------------------------
// extract
// ---------------------------------------------------------------------------

struct ExtractArgs {
  std::string model, manifest, root, layer = "relu3", out;
};

void run_extract(const ExtractArgs& args) {
  const Network net = load_network(args.model);
  const std::vector<Sample> samples = load_manifest(args.manifest);
  if (samples.empty()) throw EmptyDataset("manifest has no records");
  const std::size_t dim = shape_at(net, args.layer).flat();
  FeatureMatrix m = FeatureMatrix::zeros(samples.size(), dim);
  parallel_chunks(samples.size(), [&](std::size_t i) {
    const ImageTensor img =
        load_sample_image(args.root, samples[i], net.input_channels);
    const std::vector<double> act = features_at(net, img, args.layer);
    auto row = m.row(i);
    for (std::size_t d = 0; d < dim; ++d) {
      row[d] = static_cast<float>(act[d]);
    }
  });
  save_features(args.out, m);
  std::cout << "rows=" << m.n << " dim=" << m.dim << "\n";
}

// ---------------------------------------------------------------------------
// train-svm / train-svr
// ---------------------------------------------------------------------------

struct TrainLinearArgs {
  std::string features, manifest, out;
  std::string split = "train";
  double c = 0.0;  // filled per command default
  double epsilon = 0.1;
  double tolerance = 1e-6;
  int max_epochs = 1000;
  BinningOpts binning;
};

// Rows of `features` must align 1:1 with manifest records; returns the
// selected row indices (right split, resolvable label).
std::vector<std::size_t> select_labeled(const std::vector<Sample>& samples,
                                        const FeatureMatrix& all,
                                        SplitFilter split) {
  if (samples.size() != all.n) {
    throw ShapeMismatch("manifest has " + std::to_string(samples.size()) +
                        " records, features " + std::to_string(all.n) +
                        " rows");
  }
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (in_split(samples[i], split) && samples[i].label_bin) idx.push_back(i);
  }
  if (idx.empty()) throw EmptyDataset("no labeled samples in split");
  return idx;
}

FeatureMatrix gather_rows(const FeatureMatrix& all,
                          const std::vector<std::size_t>& idx) {
  FeatureMatrix out = FeatureMatrix::zeros(idx.size(), all.dim);
  for (std::size_t i = 0; i < idx.size(); ++i) {
    const auto src = all.row(idx[i]);
    std::copy(src.begin(), src.end(), out.row(i).begin());
  }
  return out;
}

void run_train_svm(const TrainLinearArgs& args) {
  const TemporalBinning binning = args.binning.make();
  std::vector<Sample> samples = load_manifest(args.manifest);
  resolve_labels(samples, binning);
  const FeatureMatrix all = load_features(args.features);
  const std::vector<std::size_t> idx =
      select_labeled(samples, all, parse_split(args.split));
  const FeatureMatrix X = gather_rows(all, idx);
  std::vector<BinIndex> y;
  for (std::size_t i : idx) y.push_back(*samples[i].label_bin);

  TrainConfig cfg;
  cfg.c_svm = args.c;
  cfg.tolerance = args.tolerance;
  cfg.max_epochs = args.max_epochs;
  const LinearSvmModel model = train_svm(X, y, cfg, binning);
  save_svm(model, args.out);
  std::cout << "samples=" << X.n << " dim=" << X.dim
            << " classes=" << model.n_classes << "\n";
}

void run_train_svr(const TrainLinearArgs& args) {
  const TemporalBinning binning = args.binning.make();
  std::vector<Sample> samples = load_manifest(args.manifest);
  resolve_labels(samples, binning);
  const FeatureMatrix all = load_features(args.features);
  if (samples.size() != all.n) {
    throw ShapeMismatch("manifest has " + std::to_string(samples.size()) +
                        " records, features " + std::to_string(all.n) +
                        " rows");
  }
  const SplitFilter split = parse_split(args.split);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (in_split(samples[i], split) && samples[i].label_year) idx.push_back(i);
  }
  if (idx.empty()) throw EmptyDataset("no labeled samples in split");
  const FeatureMatrix X = gather_rows(all, idx);
  std::vector<double> y;
  for (std::size_t i : idx) {
    y.push_back(static_cast<double>(*samples[i].label_year));
  }

  TrainConfig cfg;
  cfg.c_svr = args.c;
  cfg.epsilon = args.epsilon;
  cfg.tolerance = args.tolerance;
  cfg.max_epochs = args.max_epochs;
  const LinearSvrModel model = train_svr(X, y, cfg);
  save_svr(model, args.out);
  std::cout << "samples=" << X.n << " dim=" << X.dim << "\n";
}

// ---------------------------------------------------------------------------
// finetune
// ---------------------------------------------------------------------------

struct FinetuneArgs {
  std::string model, manifest, root, out, history;
  std::string split = "train";
  int replace_head_classes = 0;  // 0 keeps the existing head
  std::uint64_t head_seed = 0;
  int iterations = 500;
  int batch = 50;
  double lr = 1e-5;
  double momentum = 0.9;
  double decay = 0.0005;
  std::uint64_t seed = 0;
  bool head_only = false;
  BinningOpts binning;
};

void run_finetune(const FinetuneArgs& args) {
  const TemporalBinning binning = args.binning.make();
  Network net = load_network(args.model);
  std::vector<Sample> samples = load_manifest(args.manifest);
  resolve_labels(samples, binning);
  const SplitFilter split = parse_split(args.split);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (in_split(samples[i], split) && samples[i].label_bin) idx.push_back(i);
  }
  if (idx.empty()) throw EmptyDataset("no labeled samples in split");

  const std::vector<ImageTensor> imgs =
      load_images(args.root, samples, idx, net.input_channels);
  std::vector<int> labels;
  for (std::size_t i : idx) labels.push_back(samples[i].label_bin->value);

  if (args.replace_head_classes > 0) {
    replace_head(net, args.replace_head_classes, args.head_seed);
  }
  SgdConfig cfg;
  cfg.batch_size = args.batch;
  cfg.momentum = args.momentum;
  cfg.weight_decay = args.decay;
  cfg.learning_rate = args.lr;
  cfg.iterations = args.iterations;
  cfg.head_only = args.head_only;
  cfg.shuffle_seed = args.seed;
  const std::vector<TrainRecord> history = train(net, imgs, labels, cfg);
  save_network(net, args.out);

  if (!args.history.empty()) {
    std::ostringstream csv;
    csv << "iteration,loss\n";
    for (const TrainRecord& r : history) {
      csv << r.iteration << "," << fmt("%.17g", r.loss) << "\n";
    }
    commit_text(args.history, csv.str());
  }
  std::cout << "samples=" << idx.size() << " iterations=" << history.size()
            << " final_loss="
            << fmt("%.6f", history.empty() ? 0.0 : history.back().loss)
            << "\n";
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string model, manifest, features, root, out;
  std::string split = "test";
  BinningOpts binning;
};

void run_eval(const EvalArgs& args) {
  const TemporalBinning binning = args.binning.make();
  std::vector<Sample> samples = load_manifest(args.manifest);
  resolve_labels(samples, binning);
  const SplitFilter split = parse_split(args.split);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (in_split(samples[i], split) && samples[i].label_year) idx.push_back(i);
  }
  if (idx.empty()) throw EmptyDataset("no labeled samples in split");

  const ModelKind kind = peek_model_kind(args.model);
  std::vector<double> predicted(idx.size(), 0.0);
  std::vector<int> predicted_bin(idx.size(), -1);
  bool have_bins = false;

  if (kind == ModelKind::linear_svm || kind == ModelKind::linear_svr) {
    if (args.features.empty()) throw CLI::RequiredError("--features");
    const FeatureMatrix all = load_features(args.features);
    if (samples.size() != all.n) {
      throw ShapeMismatch("manifest has " + std::to_string(samples.size()) +
                          " records, features " + std::to_string(all.n) +
                          " rows");
    }
    if (kind == ModelKind::linear_svm) {
      const LinearSvmModel model = load_svm(args.model);
      have_bins = true;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        const BinIndex bin = predict_class(model, all.row(idx[i]));
        predicted_bin[i] = bin.value;
        predicted[i] =
            static_cast<double>(bin_representative_year(bin, model.binning));
      }
    } else {
      const LinearSvrModel model = load_svr(args.model);
      for (std::size_t i = 0; i < idx.size(); ++i) {
        predicted[i] = predict_year(model, all.row(idx[i]));
      }
    }
  } else {
    if (args.root.empty()) throw CLI::RequiredError("--root");
    const Network net = load_network(args.model);
    const std::vector<ImageTensor> imgs =
        load_images(args.root, samples, idx, net.input_channels);
    const std::vector<std::vector<double>> probs = batch_probs(net, imgs);
    have_bins = true;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const BinIndex bin{argmax_class(probs[i])};
      predicted_bin[i] = bin.value;
      predicted[i] =
          static_cast<double>(bin_representative_year(bin, binning));
    }
  }

  std::vector<double> truth;
  for (std::size_t i : idx) {
    truth.push_back(static_cast<double>(*samples[i].label_year));
  }
  const double mae = evaluate_mae(predicted, truth);
  std::cout << "n=" << idx.size() << " mae_years=" << fmt("%.6f", mae);
  if (have_bins) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (samples[idx[i]].label_bin &&
          samples[idx[i]].label_bin->value == predicted_bin[i]) {
        ++hits;
      }
    }
    std::cout << " accuracy="
              << fmt("%.6f",
                     static_cast<double>(hits) /
                         static_cast<double>(idx.size()));
  }
  std::cout << "\n";

  if (!args.out.empty()) {
    std::ostringstream csv;
    csv << "id,true_year,predicted_year\n";
    for (std::size_t i = 0; i < idx.size(); ++i) {
      csv << samples[idx[i]].id << "," << *samples[idx[i]].label_year << ","
          << fmt("%.6f", predicted[i]) << "\n";
    }
    commit_text(args.out, csv.str());
  }
}

// ---------------------------------------------------------------------------
// entropy
// ---------------------------------------------------------------------------

struct EntropyArgs {
  std::string model, manifest, root, out;
  std::string layer = "relu3";
  std::string split = "all";
  std::size_t top = 500;
  BinningOpts binning;
};

void run_entropy(const EntropyArgs& args) {
  const TemporalBinning binning = args.binning.make();
  Network net = load_network(args.model);
  std::vector<Sample> samples = load_manifest(args.manifest);
  resolve_labels(samples, binning);
  const SplitFilter split = parse_split(args.split);
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (in_split(samples[i], split) && samples[i].label_bin) idx.push_back(i);
  }
  if (idx.empty()) throw EmptyDataset("no labeled samples in split");

  const std::vector<ImageTensor> imgs =
      load_images(args.root, samples, idx, net.input_channels);
  ActivationTable table = collect_activations(net, imgs, args.layer);
  std::vector<BinIndex> labels;
  for (std::size_t i : idx) labels.push_back(*samples[i].label_bin);
  const std::vector<double> ent =
      layer_temporal_entropy(table, labels, binning, args.top);

  std::ostringstream csv;
  csv << "unit,entropy\n";
  double mean = 0.0;
  for (std::size_t u = 0; u < ent.size(); ++u) {
    csv << u << "," << fmt("%.9f", ent[u]) << "\n";
    mean += ent[u];
  }
  mean /= static_cast<double>(ent.size());
  if (args.out.empty()) {
    std::cout << csv.str();
  } else {
    commit_text(args.out, csv.str());
    std::cout << "units=" << ent.size() << " top=" << args.top
              << " mean_entropy=" << fmt("%.6f", mean) << "\n";
  }
}

// ---------------------------------------------------------------------------
// occlude
// ---------------------------------------------------------------------------

struct OccludeArgs {
  std::string model, image, out;
  int size = 11;
  int stride = 3;
  double fill = 0.5;
  int klass = -1;  // -1 scores the argmax class of the intact image
  int patch = 0;   // > 0 reports the peak patch of that size
};

void run_occlude(const OccludeArgs& args) {
  const Network net = load_network(args.model);
  ImageTensor img = read_pnm(args.image);
  if (img.channels == 3 && net.input_channels == 1) {
    img = grayscale_transform(img);
  }
  int klass = args.klass;
  if (klass < 0) klass = argmax_class(forward(net, img));
  if (klass >= net.n_classes) {
    throw UnitOutOfRange("class " + std::to_string(klass) + " of " +
                         std::to_string(net.n_classes));
  }
  const auto score = [&](const ImageTensor& im) {
    return forward(net, im)[static_cast<std::size_t>(klass)];
  };
  const DiscrepancyMap map =
      occlusion_discrepancy(img, args.size, args.stride, args.fill, score);

  std::ostringstream csv;
  csv << "# rows=" << map.grid_rows << " cols=" << map.grid_cols
      << " size=" << map.occluder_size << " stride=" << map.stride
      << " class=" << klass << " base=" << fmt("%.17g", map.base_score)
      << "\n";
  for (std::size_t r = 0; r < map.grid_rows; ++r) {
    for (std::size_t c = 0; c < map.grid_cols; ++c) {
      if (c) csv << ",";
      csv << fmt("%.17g", map.values[r * map.grid_cols + c]);
    }
    csv << "\n";
  }
  commit_text(args.out, csv.str());

  std::cout << "rows=" << map.grid_rows << " cols=" << map.grid_cols
            << " class=" << klass;
  if (args.patch > 0) {
    const std::vector<double> px =
        discrepancy_pixel_projection(map, img.height, img.width);
    const Box peak = peak_patch(px, img.height, img.width, args.patch);
    std::cout << " peak_y=" << peak.y << " peak_x=" << peak.x
              << " patch=" << args.patch;
  }
  std::cout << "\n";
}

// ---------------------------------------------------------------------------
// correlate
// ---------------------------------------------------------------------------

struct CorrelateArgs {
  std::string a, b;
  double fraction = 0.3;
};

std::vector<std::string> load_ranking(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MalformedManifest("cannot open ranking " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    ids.push_back(line);
  }
  return ids;
}

void run_correlate(const CorrelateArgs& args) {
  const std::vector<std::string> a = load_ranking(args.a);
  const std::vector<std::string> b = load_ranking(args.b);
  const double agreement = ranking_agreement(a, b, args.fraction);
  const std::size_t n = a.size();
  const std::size_t top = std::clamp<std::size_t>(
      static_cast<std::size_t>(
          std::llround(args.fraction * static_cast<double>(n))),
      1, n);
  std::cout << "n=" << n << " top=" << top
            << " agreement=" << fmt("%.6f", agreement) << "\n";
}

// ---------------------------------------------------------------------------
// influence
// ---------------------------------------------------------------------------

struct InfluenceArgs {
  std::string model, manifest, root, out;
  std::string split = "all";
  bool majority = false;
  BinningOpts binning;
};

void run_influence(const InfluenceArgs& args) {
  const TemporalBinning binning = args.binning.make();
  const Network net = load_network(args.model);
  std::vector<Sample> samples = load_manifest(args.manifest);
  const SplitFilter split = parse_split(args.split);

  std::map<std::string, std::vector<std::size_t>> collections;
  std::size_t skipped = 0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (!in_split(samples[i], split)) continue;
    if (samples[i].collection_id.empty()) {
      ++skipped;
      continue;
    }
    collections[samples[i].collection_id].push_back(i);
  }
  if (collections.empty()) throw EmptyCollection("no collections in split");

  std::ostringstream csv;
  csv << "collection,year,images\n";
  for (const auto& [cid, idx] : collections) {
    const std::vector<ImageTensor> imgs =
        load_images(args.root, samples, idx, net.input_channels);
    const std::vector<std::vector<double>> probs = batch_probs(net, imgs);
    const int year = collection_vintage_year(probs, binning, args.majority);
    csv << cid << "," << year << "," << idx.size() << "\n";
  }
  commit_text(args.out, csv.str());
  std::cout << "collections=" << collections.size() << " skipped=" << skipped
            << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chronolens: estimates when an image's content was made"};
  app.require_subcommand(1);

  ParseDatesArgs pd;
  CLI::App* c_pd = app.add_subcommand(
      "parse-dates", "Parse free-text dates into year ranges");
  c_pd->add_option("--in", pd.in, "Lines of id<TAB>text")->required();
  c_pd->add_option("--out", pd.out, "Output CSV (stdout when omitted)");
  c_pd->add_option("--window", pd.window, "Accepted year window START:END")
      ->capture_default_str();
  c_pd->callback([&] { run_parse_dates(pd); });

  SynthArgs sy;
  CLI::App* c_sy = app.add_subcommand(
      "synth", "Generate a planted-signature benchmark dataset");
  c_sy->add_option("--out", sy.out, "Output directory")->required();
  c_sy->add_option("--per-bin", sy.per_bin)->capture_default_str();
  c_sy->add_option("--image-size", sy.image_size)->capture_default_str();
  c_sy->add_option("--patch-size", sy.patch_size)->capture_default_str();
  c_sy->add_option("--noise", sy.noise)->capture_default_str();
  c_sy->add_option("--contrast", sy.contrast)->capture_default_str();
  c_sy->add_option("--cycles", sy.cycles)->capture_default_str();
  c_sy->add_option("--offset", sy.offset,
                   "Orientation offset in radians")->capture_default_str();
  c_sy->add_option("--test-fraction", sy.test_fraction)->capture_default_str();
  c_sy->add_option("--seed", sy.seed)->capture_default_str();
  add_binning_opts(c_sy, sy.binning);
  c_sy->callback([&] { run_synth(sy); });

  InitArgs in_args;
  CLI::App* c_in = app.add_subcommand("init", "Write a fresh micro network");
  c_in->add_option("--out", in_args.out, "Model file")->required();
  c_in->add_option("--height", in_args.height)->capture_default_str();
  c_in->add_option("--width", in_args.width)->capture_default_str();
  c_in->add_option("--channels", in_args.channels)->capture_default_str();
  c_in->add_option("--classes", in_args.classes)->capture_default_str();
  c_in->add_option("--seed", in_args.seed)->capture_default_str();
  c_in->callback([&] { run_init(in_args); });

  ExtractArgs ex;
  CLI::App* c_ex = app.add_subcommand(
      "extract", "Extract per-image activations into a feature file");
  c_ex->add_option("--model", ex.model)->required();
  c_ex->add_option("--manifest", ex.manifest)->required();
  c_ex->add_option("--root", ex.root, "Directory image paths resolve against")
      ->required();
  c_ex->add_option("--layer", ex.layer)->capture_default_str();
  c_ex->add_option("--out", ex.out, "Feature file")->required();
  c_ex->callback([&] { run_extract(ex); });

  TrainLinearArgs svm_args;
  svm_args.c = 0.1;
  CLI::App* c_svm = app.add_subcommand(
      "train-svm", "Train one-vs-rest linear SVMs over temporal bins");
  c_svm->add_option("--features", svm_args.features)->required();
  c_svm->add_option("--manifest", svm_args.manifest)->required();
  c_svm->add_option("--out", svm_args.out)->required();
  c_svm->add_option("--c", svm_args.c, "Hinge penalty")->capture_default_str();
  c_svm->add_option("--tolerance", svm_args.tolerance)->capture_default_str();
  c_svm->add_option("--max-epochs", svm_args.max_epochs)
      ->capture_default_str();
  c_svm->add_option("--split", svm_args.split)->capture_default_str();
  add_binning_opts(c_svm, svm_args.binning);
  c_svm->callback([&] { run_train_svm(svm_args); });

  TrainLinearArgs svr_args;
  svr_args.c = 100.0;
  CLI::App* c_svr = app.add_subcommand(
      "train-svr", "Train a linear support vector regressor on years");
  c_svr->add_option("--features", svr_args.features)->required();
  c_svr->add_option("--manifest", svr_args.manifest)->required();
  c_svr->add_option("--out", svr_args.out)->required();
  c_svr->add_option("--c", svr_args.c, "Loss penalty")->capture_default_str();
  c_svr->add_option("--epsilon", svr_args.epsilon, "Insensitive tube width")
      ->capture_default_str();
  c_svr->add_option("--tolerance", svr_args.tolerance)->capture_default_str();
  c_svr->add_option("--max-epochs", svr_args.max_epochs)
      ->capture_default_str();
  c_svr->add_option("--split", svr_args.split)->capture_default_str();
  add_binning_opts(c_svr, svr_args.binning);
  c_svr->callback([&] { run_train_svr(svr_args); });

  FinetuneArgs ft;
  CLI::App* c_ft = app.add_subcommand(
      "finetune", "Train the micro network on labeled images");
  c_ft->add_option("--model", ft.model)->required();
  c_ft->add_option("--manifest", ft.manifest)->required();
  c_ft->add_option("--root", ft.root)->required();
  c_ft->add_option("--out", ft.out)->required();
  c_ft->add_option("--history", ft.history, "Per-iteration loss CSV");
  c_ft->add_option("--replace-head", ft.replace_head_classes,
                   "Swap the head for one with this many classes");
  c_ft->add_option("--head-seed", ft.head_seed)->capture_default_str();
  c_ft->add_option("--iterations", ft.iterations)->capture_default_str();
  c_ft->add_option("--batch", ft.batch)->capture_default_str();
  c_ft->add_option("--lr", ft.lr)->capture_default_str();
  c_ft->add_option("--momentum", ft.momentum)->capture_default_str();
  c_ft->add_option("--decay", ft.decay)->capture_default_str();
  c_ft->add_option("--seed", ft.seed)->capture_default_str();
  c_ft->add_flag("--head-only", ft.head_only, "Update only the final layer");
  c_ft->add_option("--split", ft.split)->capture_default_str();
  add_binning_opts(c_ft, ft.binning);
  c_ft->callback([&] { run_finetune(ft); });

  EvalArgs ev;
  CLI::App* c_ev = app.add_subcommand(
      "eval", "Report mean absolute error in years for any model");
  c_ev->add_option("--model", ev.model)->required();
  c_ev->add_option("--manifest", ev.manifest)->required();
  c_ev->add_option("--features", ev.features,
                   "Feature file (linear models)");
  c_ev->add_option("--root", ev.root, "Image root (network models)");
  c_ev->add_option("--out", ev.out, "Per-sample prediction CSV");
  c_ev->add_option("--split", ev.split)->capture_default_str();
  add_binning_opts(c_ev, ev.binning);
  c_ev->callback([&] { run_eval(ev); });

  EntropyArgs en;
  CLI::App* c_en = app.add_subcommand(
      "entropy", "Temporal entropy of every unit at a layer");
  c_en->add_option("--model", en.model)->required();
  c_en->add_option("--manifest", en.manifest)->required();
  c_en->add_option("--root", en.root)->required();
  c_en->add_option("--layer", en.layer)->capture_default_str();
  c_en->add_option("--top", en.top, "Images per unit histogram")
      ->capture_default_str();
  c_en->add_option("--out", en.out, "Output CSV (stdout when omitted)");
  c_en->add_option("--split", en.split)->capture_default_str();
  add_binning_opts(c_en, en.binning);
  c_en->callback([&] { run_entropy(en); });

  OccludeArgs oc;
  CLI::App* c_oc = app.add_subcommand(
      "occlude", "Occlusion discrepancy map for one image");
  c_oc->add_option("--model", oc.model)->required();
  c_oc->add_option("--image", oc.image)->required();
  c_oc->add_option("--out", oc.out, "Map CSV")->required();
  c_oc->add_option("--size", oc.size, "Occluder side")->capture_default_str();
  c_oc->add_option("--stride", oc.stride)->capture_default_str();
  c_oc->add_option("--fill", oc.fill)->capture_default_str();
  c_oc->add_option("--class", oc.klass,
                   "Class to score; -1 uses the intact argmax")
      ->capture_default_str();
  c_oc->add_option("--patch", oc.patch,
                   "Report the peak patch of this size");
  c_oc->callback([&] { run_occlude(oc); });

  CorrelateArgs co;
  CLI::App* c_co = app.add_subcommand(
      "correlate", "Top-fraction overlap of two rankings");
  c_co->add_option("--a", co.a, "Ranking file, best first")->required();
  c_co->add_option("--b", co.b, "Ranking file, best first")->required();
  c_co->add_option("--fraction", co.fraction)->capture_default_str();
  c_co->callback([&] { run_correlate(co); });

  InfluenceArgs inf;
  CLI::App* c_inf = app.add_subcommand(
      "influence", "Collection-level vintage estimates");
  c_inf->add_option("--model", inf.model)->required();
  c_inf->add_option("--manifest", inf.manifest)->required();
  c_inf->add_option("--root", inf.root)->required();
  c_inf->add_option("--out", inf.out, "Per-collection CSV")->required();
  c_inf->add_flag("--majority", inf.majority,
                  "Vote per image instead of averaging probabilities");
  c_inf->add_option("--split", inf.split)->capture_default_str();
  add_binning_opts(c_inf, inf.binning);
  c_inf->callback([&] { run_influence(inf); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::data ? 3 : 4;
  } catch (const std::exception& e) {
    std::cerr << "internal: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
