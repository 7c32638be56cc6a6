// Copyright 2026 The ukiyo Authors
// SPDX-License-Identifier: Apache-2.0

#include "cli.hpp"

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "ukiyo/color_separation.hpp"
#include "ukiyo/corpus.hpp"
#include "ukiyo/csv.hpp"
#include "ukiyo/embedding.hpp"
#include "ukiyo/error.hpp"
#include "ukiyo/face_geometry.hpp"
#include "ukiyo/image_io.hpp"
#include "ukiyo/service.hpp"

namespace fs = std::filesystem;

namespace ukiyo::cli {
namespace {

void require_input(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) throw Error(ErrorKind::Io, "input file not found: " + path.string());
}

void require_input_dir(const fs::path& path) {
  std::error_code ec;
  if (!fs::is_directory(path, ec)) throw Error(ErrorKind::Io, "input directory not found: " + path.string());
}

void require_output(const fs::path& path) {
  const auto parent = path.parent_path();
  std::error_code ec;
  if (!parent.empty() && !fs::is_directory(parent, ec)) {
    throw Error(ErrorKind::Io, "output directory does not exist: " + parent.string());
  }
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) throw Error(ErrorKind::Io, "cannot create directory " + dir.string());
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path.string());
  return in;
}

// Output is assembled in memory and written in one go so a failure never
// leaves a half-written file behind.
void write_output(const fs::path& path, const std::string& text) { write_text_file(path, text); }

std::vector<LandmarkSet> load_landmarks(const fs::path& path) {
  auto in = open_in(path);
  try {
    return import_landmarks(in);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.what());
  }
}

std::set<LandmarkKind> parse_kind_list(const std::string& text, const std::set<LandmarkKind>& defaults) {
  if (text == "default") return defaults;
  std::set<LandmarkKind> kinds;
  if (text == "none" || text.empty()) return kinds;
  std::stringstream ss(text);
  std::string name;
  while (std::getline(ss, name, ',')) {
    const auto kind = landmark_from_name(name);
    if (!kind) throw Error(ErrorKind::UnknownLandmarkName, "unknown landmark \"" + name + "\"");
    kinds.insert(*kind);
  }
  return kinds;
}

HighQualitySet load_hq(const std::string& source) {
  if (source == "default") return default_high_quality_set();
  require_input(source);
  auto in = open_in(source);
  return read_high_quality_set(in);
}

std::optional<fs::path> find_image(const fs::path& dir, const std::string& image_id) {
  for (const char* ext : {".png", ".jpg", ".jpeg", ".PNG", ".JPG", ".JPEG"}) {
    auto candidate = dir / (image_id + ext);
    std::error_code ec;
    if (fs::is_regular_file(candidate, ec)) return candidate;
  }
  return std::nullopt;
}

fs::path layer_path(const fs::path& prefix, std::size_t k) {
  return prefix.parent_path() / (prefix.filename().string() + ".layer" + std::to_string(k) + ".png");
}
fs::path palette_path(const fs::path& prefix) {
  return prefix.parent_path() / (prefix.filename().string() + ".palette.json");
}

LayerStack load_stack(const fs::path& prefix) {
  const auto pal_file = palette_path(prefix);
  require_input(pal_file);
  auto in = open_in(pal_file);
  const auto doc = read_palette_json(in);
  std::vector<Bitmap> layers;
  for (std::size_t k = 0; k < doc.palette.size(); ++k) {
    const auto file = layer_path(prefix, k);
    require_input(file);
    auto bmp = decode_image(read_file(file), /*keep_alpha=*/true);
    if (bmp.channels != 4) throw Error(ErrorKind::InvalidArgument, file.string() + ": layer PNG lacks an alpha channel");
    layers.push_back(std::move(bmp));
  }
  return stack_from_layers(layers, doc.palette);
}

std::string format_fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// ---------------------------------------------------------------------------

struct IngestArgs {
  std::string metadata, landmarks, out, format = "auto";
};

int cmd_ingest(const IngestArgs& a, std::ostream&, std::ostream& err) {
  require_input(a.metadata);
  require_input(a.landmarks);
  require_output(a.out);

  MetadataFormat format = MetadataFormat::Csv;
  if (a.format == "jsonl" || (a.format == "auto" && fs::path(a.metadata).extension() == ".jsonl")) {
    format = MetadataFormat::Jsonl;
  }
  auto in = open_in(a.metadata);
  MetadataParseResult meta;
  try {
    meta = parse_metadata(in, format);
  } catch (const Error& e) {
    throw Error(e.kind(), a.metadata + ": " + e.what());
  }
  for (const auto& w : meta.warnings) err << a.metadata << ": line " << w.line << ": warning: " << w.message << '\n';

  const auto sets = load_landmarks(a.landmarks);
  const auto joined = join_faces(meta.records, sets);
  for (const auto& id : joined.unmatched_metadata) err << "metadata " << id << " has no detected face\n";

  std::ostringstream body;
  write_corpus(body, joined.faces);
  write_output(a.out, body.str());
  std::size_t with_meta = 0;
  for (const auto& f : joined.faces) with_meta += f.metadata ? 1 : 0;
  err << "ingested " << joined.faces.size() << " faces (" << with_meta << " with metadata)\n";
  return kExitOk;
}

struct StatsArgs {
  std::string corpus, histogram_out, painters_out;
  int bin_width = 10;
};

int cmd_stats(const StatsArgs& a, std::ostream& out, std::ostream&) {
  require_input(a.corpus);
  if (!a.histogram_out.empty()) require_output(a.histogram_out);
  if (!a.painters_out.empty()) require_output(a.painters_out);
  auto in = open_in(a.corpus);
  const auto faces = read_corpus(in);

  std::ostringstream hist;
  csv::write_row(hist, {"bin_start", "bin_end", "count"});
  for (const auto& [bin, count] : year_histogram(faces, a.bin_width)) {
    csv::write_row(hist, {std::to_string(bin), std::to_string(bin + a.bin_width), std::to_string(count)});
  }
  std::ostringstream painters;
  csv::write_row(painters, {"painter", "face_count", "min_year", "max_year"});
  for (const auto& row : painter_summary(faces)) {
    csv::write_row(painters, {row.painter, std::to_string(row.face_count),
                              row.min_year ? std::to_string(*row.min_year) : "",
                              row.max_year ? std::to_string(*row.max_year) : ""});
  }

  if (a.histogram_out.empty() && a.painters_out.empty()) {
    out << hist.str() << '\n' << painters.str();
    return kExitOk;
  }
  if (!a.histogram_out.empty()) write_output(a.histogram_out, hist.str());
  else out << hist.str();
  if (!a.painters_out.empty()) write_output(a.painters_out, painters.str());
  else out << painters.str();
  return kExitOk;
}

struct AlignArgs {
  std::string landmarks, images, out;
  int size = 256;
};

int cmd_align(const AlignArgs& a, std::ostream&, std::ostream& err) {
  require_input(a.landmarks);
  require_input_dir(a.images);
  if (a.size < kMinCropSize) {
    throw Error(ErrorKind::InvalidArgument, "--size must be >= " + std::to_string(kMinCropSize));
  }
  const auto sets = load_landmarks(a.landmarks);
  std::map<std::string, fs::path> sources;
  for (const auto& s : sets) {
    if (sources.contains(s.image_id)) continue;
    const auto found = find_image(a.images, s.image_id);
    if (!found) throw Error(ErrorKind::Io, "no image for " + s.image_id + " in " + a.images);
    sources.emplace(s.image_id, *found);
  }
  ensure_dir(a.out);

  std::ostringstream quads;
  csv::write_row(quads, {"face_id", "tl_x", "tl_y", "bl_x", "bl_y", "br_x", "br_y", "tr_x", "tr_y", "side_length"});
  std::string cached_id;
  RgbImage image;
  std::size_t written = 0;
  for (const auto& s : sets) {
    AlignmentQuad quad;
    try {
      quad = alignment_quad(s);
    } catch (const Error& e) {
      err << "skipping " << s.face_id() << ": " << e.what() << '\n';
      continue;
    }
    if (cached_id != s.image_id) {
      image = load_rgb(sources.at(s.image_id));
      cached_id = s.image_id;
    }
    const auto crop = crop_face(image, quad, a.size);
    save_png(fs::path(a.out) / (s.image_id + "_" + std::to_string(s.face_index) + ".png"), crop);
    std::vector<std::string> row{s.face_id()};
    for (const auto& c : quad.corners) {
      row.push_back(format_fixed(c.x, 9));
      row.push_back(format_fixed(c.y, 9));
    }
    row.push_back(format_fixed(quad.side_length, 9));
    csv::write_row(quads, row);
    ++written;
  }
  write_output(fs::path(a.out) / "quads.csv", quads.str());
  err << "aligned " << written << " of " << sets.size() << " faces\n";
  return kExitOk;
}

struct FeaturesArgs {
  std::string landmarks, hq = "default", out;
};

int cmd_features(const FeaturesArgs& a, std::ostream&, std::ostream& err) {
  require_input(a.landmarks);
  require_output(a.out);
  const auto hq = load_hq(a.hq);
  const auto sets = load_landmarks(a.landmarks);
  const auto batch = extract_features(sets, hq);
  for (const auto& r : batch.rejected) err << "rejected " << r.face_id << ": " << r.reason << '\n';
  std::ostringstream body;
  write_feature_csv(body, batch.features);
  write_output(a.out, body.str());
  err << "wrote " << batch.features.size() << " feature rows (" << angle_feature_count(hq.size()) << " angles each)\n";
  return kExitOk;
}

struct QualityArgs {
  std::string detected, expert, report, out, hq_out;
  double threshold = 20.0;
  std::string exceptions = "default", exclusions = "default";
};

int cmd_quality(const QualityArgs& a, std::ostream& out, std::ostream& err) {
  QualityReport report;
  if (!a.report.empty()) {
    if (a.report == "reference") {
      report = reference_quality_table();
    } else {
      require_input(a.report);
      auto in = open_in(a.report);
      report = read_quality_csv(in);
    }
  } else {
    if (a.detected.empty() || a.expert.empty()) {
      throw Error(ErrorKind::InvalidArgument, "quality needs --detected and --expert, or --report");
    }
    require_input(a.detected);
    require_input(a.expert);
    if (!a.out.empty()) require_output(a.out);
    report = quality_report(load_landmarks(a.detected), load_landmarks(a.expert));
    std::ostringstream body;
    write_quality_csv(body, report);
    if (a.out.empty()) out << body.str();
    else write_output(a.out, body.str());
    err << "compared " << report.pair_count << " face pairs\n";
  }
  if (!a.hq_out.empty()) require_output(a.hq_out);

  const auto hq = select_high_quality(report, a.threshold, parse_kind_list(a.exceptions, default_jaw_exceptions()),
                                      parse_kind_list(a.exclusions, default_exclusions()));
  std::ostringstream set_text;
  write_high_quality_set(set_text, hq);
  if (a.hq_out.empty()) out << set_text.str();
  else write_output(a.hq_out, set_text.str());
  err << "selected " << hq.size() << " landmark kinds (" << angle_feature_count(hq.size()) << " angles)\n";
  return kExitOk;
}

struct EmbedArgs {
  std::string features, method = "pca", corpus, labels, out, projection_out;
  int k = 2;
  bool standardize = false;
  double perplexity = 30.0;
  int iterations = 1000;
  std::uint64_t seed = 0;
};

std::map<std::string, std::string> load_labels(const EmbedArgs& a) {
  std::map<std::string, std::string> labels;
  if (!a.corpus.empty()) {
    auto in = open_in(a.corpus);
    for (const auto& face : read_corpus(in)) {
      const std::string painter = face.metadata ? face.metadata->painter : "";
      labels[face.face_id] = painter.empty() ? kUnknownPainter : painter;
    }
  }
  if (!a.labels.empty()) {
    auto in = open_in(a.labels);
    const auto rows = csv::read(in);
    for (std::size_t r = 1; r < rows.size(); ++r) {
      if (rows[r].fields.size() < 2) {
        throw Error(ErrorKind::MalformedRecord, a.labels + ": line " + std::to_string(rows[r].line) + ": expected face_id,label");
      }
      labels[rows[r].fields[0]] = rows[r].fields[1];
    }
  }
  return labels;
}

int cmd_embed(const EmbedArgs& a, std::ostream&, std::ostream& err) {
  require_input(a.features);
  if (!a.corpus.empty()) require_input(a.corpus);
  if (!a.labels.empty()) require_input(a.labels);
  require_output(a.out);
  if (!a.projection_out.empty()) require_output(a.projection_out);
  if (a.method != "pca" && a.method != "lda" && a.method != "tsne") {
    throw Error(ErrorKind::InvalidArgument, "unknown method " + a.method + " (pca|lda|tsne)");
  }

  auto in = open_in(a.features);
  FeatureMatrix x = read_feature_csv(in);
  if (!a.corpus.empty() || !a.labels.empty()) {
    const auto labels = load_labels(a);
    std::vector<std::string> row_labels;
    for (const auto& id : x.ids) {
      const auto it = labels.find(id);
      row_labels.push_back(it == labels.end() ? kUnknownPainter : it->second);
    }
    x.labels = std::move(row_labels);
  }
  if (a.standardize) x = standardize(x);

  std::map<std::string, std::string> params{{"standardize", a.standardize ? "true" : "false"}};
  Embedding embedding;
  if (a.method == "tsne") {
    TsneOptions opts;
    opts.perplexity = a.perplexity;
    opts.iterations = a.iterations;
    opts.seed = a.seed;
    const auto result = tsne_embed(x, opts);
    err << "t-SNE KL divergence " << result.initial_kl << " -> " << result.final_kl << '\n';
    embedding = result.embedding;
  } else {
    if (a.method == "lda" && !x.labels) {
      throw Error(ErrorKind::TooFewClasses, "LDA needs labels: pass --corpus or --labels");
    }
    const auto projection = a.method == "pca" ? pca_fit(x, a.k) : lda_fit(x, a.k);
    embedding = project(x, projection);
    if (!a.projection_out.empty()) {
      std::ostringstream body;
      write_projection_json(body, projection, params);
      write_output(a.projection_out, body.str());
    }
  }
  std::ostringstream body;
  write_embedding_csv(body, embedding);
  write_output(a.out, body.str());
  err << "embedded " << embedding.coords.rows() << " faces with " << a.method << '\n';
  return kExitOk;
}

struct SeparateArgs {
  std::string in, out;
  int k = kDefaultLayers;
  double lambda = kDefaultLambda;
  std::uint64_t seed = 0;
  bool error_map = false;
};

int cmd_separate(const SeparateArgs& a, std::ostream&, std::ostream& err) {
  require_input(a.in);
  const auto image = load_rgb(a.in);
  const auto palette = estimate_palette(image, a.k, a.seed);
  const auto stack = decompose(image, palette, a.lambda);

  ensure_dir(a.out);
  const fs::path prefix = fs::path(a.out) / fs::path(a.in).stem();
  for (std::size_t k = 0; k < stack.layers(); ++k) {
    write_file(layer_path(prefix, k), encode_png(layer_bitmap(stack, k)));
  }
  std::ostringstream doc;
  write_palette_json(doc, {palette, a.lambda, a.seed});
  write_output(palette_path(prefix), doc.str());
  if (a.error_map) {
    write_file(prefix.parent_path() / (prefix.filename().string() + ".err.png"), encode_png(error_map_bitmap(stack)));
  }
  err << "wrote " << stack.layers() << " layers to " << a.out << " (max clip error " << stack.max_clip_error() << ")\n";
  return kExitOk;
}

struct RecolorArgs {
  std::string layers, palette, reference, out;
  std::uint64_t seed = 0;
};

int cmd_recolor(const RecolorArgs& a, std::ostream&, std::ostream&) {
  require_input(a.palette);
  require_output(a.out);
  const auto stack = load_stack(a.layers);
  auto in = open_in(a.palette);
  const auto doc = read_palette_json(in);
  save_png(a.out, compose(recolor(stack, doc.palette)));
  return kExitOk;
}

int cmd_transfer(const RecolorArgs& a, std::ostream&, std::ostream&) {
  require_input(a.reference);
  require_output(a.out);
  const auto stack = load_stack(a.layers);
  const auto reference = load_rgb(a.reference);
  save_png(a.out, compose(transfer_palette(stack, reference, a.seed)));
  return kExitOk;
}

int cmd_compose(const RecolorArgs& a, std::ostream&, std::ostream&) {
  require_output(a.out);
  save_png(a.out, compose(load_stack(a.layers)));
  return kExitOk;
}

struct ServeArgs {
  int port = 8777;
  std::string static_dir;
  std::size_t max_sessions = 16;
  int max_size = 4096;
};

Service* g_service = nullptr;

extern "C" void handle_stop_signal(int) {
  if (g_service) g_service->stop();
}

int cmd_serve(const ServeArgs& a, std::ostream&, std::ostream& err) {
  ServiceOptions opts;
  opts.port = a.port;
  opts.max_sessions = a.max_sessions;
  opts.max_width = opts.max_height = a.max_size;
  if (!a.static_dir.empty()) {
    require_input_dir(a.static_dir);
    opts.static_dir = a.static_dir;
  }
  Service service(opts);
  const int port = service.bind();
  err << "serving on http://127.0.0.1:" << port << "/\n";
  g_service = &service;
  std::signal(SIGINT, handle_stop_signal);
  std::signal(SIGTERM, handle_stop_signal);
  service.listen();
  g_service = nullptr;
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Ukiyo-e face geometry and color separation toolkit", "ukiyo"};
  app.require_subcommand(1);
  app.fallthrough(false);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Join metadata and landmark annotations into a corpus file");
  c_ingest->add_option("--metadata", ingest.metadata, "Metadata CSV or JSONL")->required();
  c_ingest->add_option("--metadata-format", ingest.format, "csv|jsonl|auto")
      ->check(CLI::IsMember({"auto", "csv", "jsonl"}));
  c_ingest->add_option("--landmarks", ingest.landmarks, "Landmark JSONL")->required();
  c_ingest->add_option("--out", ingest.out, "Corpus JSONL to write")->required();

  StatsArgs stats;
  auto* c_stats = app.add_subcommand("stats", "Year histogram and painter summary of a corpus");
  c_stats->add_option("--corpus", stats.corpus)->required();
  c_stats->add_option("--bin-width", stats.bin_width, "Histogram bin width in years");
  c_stats->add_option("--histogram-out", stats.histogram_out);
  c_stats->add_option("--painters-out", stats.painters_out);

  AlignArgs align;
  auto* c_align = app.add_subcommand("align", "Crop aligned faces from source images");
  c_align->add_option("--landmarks", align.landmarks)->required();
  c_align->add_option("--images", align.images, "Directory holding {image_id}.png|jpg")->required();
  c_align->add_option("--out", align.out, "Output directory")->required();
  c_align->add_option("--size", align.size, "Crop edge in pixels");

  FeaturesArgs features;
  auto* c_features = app.add_subcommand("features", "Angle features of every face");
  c_features->add_option("--landmarks", features.landmarks, "Landmark or corpus JSONL")->required();
  c_features->add_option("--hq", features.hq, "'default' or a file with one landmark name per line");
  c_features->add_option("--out", features.out)->required();

  QualityArgs quality;
  auto* c_quality = app.add_subcommand("quality", "Landmark quality report and high-quality selection");
  c_quality->add_option("--detected", quality.detected);
  c_quality->add_option("--expert", quality.expert);
  c_quality->add_option("--report", quality.report, "Existing report CSV, or 'reference'");
  c_quality->add_option("--out", quality.out, "Report CSV to write");
  c_quality->add_option("--threshold", quality.threshold, "Mean pixel error cut-off");
  c_quality->add_option("--jaw-exceptions", quality.exceptions, "'default', 'none' or comma-separated names");
  c_quality->add_option("--exclusions", quality.exclusions, "'default', 'none' or comma-separated names");
  c_quality->add_option("--hq-out", quality.hq_out, "Selected set file to write");

  EmbedArgs embed;
  auto* c_embed = app.add_subcommand("embed", "PCA, LDA or t-SNE embedding of a feature CSV");
  c_embed->add_option("--features", embed.features)->required();
  c_embed->add_option("--method", embed.method)->check(CLI::IsMember({"pca", "lda", "tsne"}));
  c_embed->add_option("--k", embed.k, "Output dimension (pca/lda)");
  c_embed->add_option("--corpus", embed.corpus, "Corpus JSONL providing painter labels");
  c_embed->add_option("--labels", embed.labels, "CSV face_id,label");
  c_embed->add_flag("--standardize", embed.standardize, "z-score feature columns first");
  c_embed->add_option("--perplexity", embed.perplexity);
  c_embed->add_option("--iters", embed.iterations);
  c_embed->add_option("--seed", embed.seed);
  c_embed->add_option("--out", embed.out)->required();
  c_embed->add_option("--projection-out", embed.projection_out, "Projection JSON (pca/lda)");

  SeparateArgs separate;
  auto* c_separate = app.add_subcommand("separate", "Decompose an image into RGBA color layers");
  c_separate->add_option("--in", separate.in)->required();
  c_separate->add_option("--k", separate.k, "Number of layers");
  c_separate->add_option("--lambda", separate.lambda, "Sparsity weight");
  c_separate->add_option("--seed", separate.seed);
  c_separate->add_option("--out", separate.out, "Output directory")->required();
  c_separate->add_flag("--error-map", separate.error_map, "Also write {stem}.err.png");

  RecolorArgs recolor_args;
  auto* c_recolor = app.add_subcommand("recolor", "Compose layers under a new palette");
  c_recolor->add_option("--layers", recolor_args.layers, "Layer prefix DIR/stem")->required();
  c_recolor->add_option("--palette", recolor_args.palette, "Palette JSON")->required();
  c_recolor->add_option("--out", recolor_args.out)->required();

  RecolorArgs transfer_args;
  auto* c_transfer = app.add_subcommand("transfer", "Recolor layers with the palette of a reference image");
  c_transfer->add_option("--layers", transfer_args.layers, "Layer prefix DIR/stem")->required();
  c_transfer->add_option("--reference", transfer_args.reference)->required();
  c_transfer->add_option("--seed", transfer_args.seed);
  c_transfer->add_option("--out", transfer_args.out)->required();

  RecolorArgs compose_args;
  auto* c_compose = app.add_subcommand("compose", "Compose layers back into an image");
  c_compose->add_option("--layers", compose_args.layers, "Layer prefix DIR/stem")->required();
  c_compose->add_option("--out", compose_args.out)->required();

  ServeArgs serve;
  auto* c_serve = app.add_subcommand("serve", "Run the local recolor service");
  c_serve->add_option("--port", serve.port);
  c_serve->add_option("--static-dir", serve.static_dir, "Workbench bundle served at /");
  c_serve->add_option("--max-sessions", serve.max_sessions);
  c_serve->add_option("--max-size", serve.max_size, "Maximum image edge in pixels");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const auto& a : args) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitValidation;
  }

  try {
    if (c_ingest->parsed()) return cmd_ingest(ingest, out, err);
    if (c_stats->parsed()) return cmd_stats(stats, out, err);
    if (c_align->parsed()) return cmd_align(align, out, err);
    if (c_features->parsed()) return cmd_features(features, out, err);
    if (c_quality->parsed()) return cmd_quality(quality, out, err);
    if (c_embed->parsed()) return cmd_embed(embed, out, err);
    if (c_separate->parsed()) return cmd_separate(separate, out, err);
    if (c_recolor->parsed()) return cmd_recolor(recolor_args, out, err);
    if (c_transfer->parsed()) return cmd_transfer(transfer_args, out, err);
    if (c_compose->parsed()) return cmd_compose(compose_args, out, err);
    if (c_serve->parsed()) return cmd_serve(serve, out, err);
  } catch (const Error& e) {
    err << "error [" << to_string(e.kind()) << "]: " << e.what() << '\n';
    return e.is_io() ? kExitIo : kExitValidation;
  } catch (const fs::filesystem_error& e) {
    err << "error [Io]: " << e.what() << '\n';
    return kExitIo;
  }
  err << app.help();
  return kExitValidation;
}

}  // namespace ukiyo::cli
