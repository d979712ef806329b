// nse: neural speech embedding pipeline CLI.
//
// One subcommand per pipeline stage. Every run prints a single JSON status
// line to stdout; errors go to stderr as single-line JSON with exit codes
// 1 (usage), 2 (data/validation), 3 (numerical failure).

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "nse/adaptation.hpp"
#include "nse/audio.hpp"
#include "nse/config.hpp"
#include "nse/embedding.hpp"
#include "nse/erders.hpp"
#include "nse/errors.hpp"
#include "nse/filters.hpp"
#include "nse/ica.hpp"
#include "nse/log.hpp"
#include "nse/parallel.hpp"
#include "nse/recording.hpp"
#include "nse/rng.hpp"
#include "nse/segmentation.hpp"
#include "nse/spatial.hpp"
#include "nse/synthgen.hpp"
#include "nse/tsne.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void print_status(const json& extra) {
  json j = extra;
  j["status"] = "ok";
  std::cout << j.dump() << std::endl;
}

const char* category_name(nse::ErrorCategory cat) {
  switch (cat) {
    case nse::ErrorCategory::usage: return "usage";
    case nse::ErrorCategory::data: return "data";
    case nse::ErrorCategory::numeric: return "numeric";
  }
  return "internal";
}

int fail(const std::string& command, nse::ErrorCategory cat, const std::string& message) {
  json j;
  j["status"] = "error";
  j["command"] = command;
  j["category"] = category_name(cat);
  j["message"] = message;
  std::cerr << j.dump() << std::endl;
  switch (cat) {
    case nse::ErrorCategory::usage: return 1;
    case nse::ErrorCategory::data: return 2;
    case nse::ErrorCategory::numeric: return 3;
  }
  return 2;
}

std::size_t levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::string suggest_flag(const CLI::App& app, const std::string& unknown) {
  std::vector<std::string> names;
  auto collect = [&](const CLI::App* a, auto&& self) -> void {
    for (const auto* opt : a->get_options()) {
      for (const auto& n : opt->get_lnames()) names.push_back("--" + n);
    }
    for (const auto* sub : a->get_subcommands({})) self(sub, self);
  };
  collect(&app, collect);
  std::string best;
  std::size_t best_dist = 4;  // only suggest close matches
  for (const auto& name : names) {
    const std::size_t d = levenshtein(unknown, name);
    if (d < best_dist) {
      best_dist = d;
      best = name;
    }
  }
  return best;
}

// Deterministic stratified subsample by (domain, label), preserving input
// order of the selected records.
std::vector<nse::EmbeddingMatrix> stratified_subsample(const std::vector<nse::EmbeddingMatrix>& ms,
                                                       std::size_t max_points, uint64_t seed) {
  if (ms.size() <= max_points) return ms;
  std::map<uint64_t, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < ms.size(); ++i) {
    const uint64_t key = (static_cast<uint64_t>(ms[i].label) << 1) |
                         (ms[i].domain == nse::Domain::spoken ? 1 : 0);
    groups[key].push_back(i);
  }
  for (auto& [key, idx] : groups) {
    nse::Rng rng(nse::mix64(seed, key));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
  }
  std::vector<std::size_t> chosen;
  for (std::size_t round = 0; chosen.size() < max_points; ++round) {
    bool any = false;
    for (auto& [key, idx] : groups) {
      if (round < idx.size()) {
        chosen.push_back(idx[round]);
        any = true;
        if (chosen.size() == max_points) break;
      }
    }
    if (!any) break;
  }
  std::sort(chosen.begin(), chosen.end());
  std::vector<nse::EmbeddingMatrix> out;
  out.reserve(chosen.size());
  for (std::size_t i : chosen) out.push_back(ms[i]);
  return out;
}

struct CommonFlags {
  std::string config_path;
  uint64_t seed = 0;
  int threads = 0;
  CLI::Option* config_opt = nullptr;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* threads_opt = nullptr;

  void attach(CLI::App* cmd) {
    config_opt = cmd->add_option("--config", config_path, "pipeline config JSON");
    seed_opt = cmd->add_option("--seed", seed, "RNG seed (overrides config)");
    threads_opt = cmd->add_option("--threads", threads, "worker cap, 0 = all cores");
  }

  // CLI flag > config file > built-in default.
  nse::PipelineConfig resolve() const {
    nse::PipelineConfig config;
    if (config_opt && config_opt->count() > 0) config = nse::load_config(config_path);
    if (seed_opt && seed_opt->count() > 0) config.seed = seed;
    if (threads_opt && threads_opt->count() > 0) config.threads = threads;
    config.validate();
    nse::thread_cap() = config.threads;
    return config;
  }
};

nse::EpochSet load_epochs(const std::string& eegb_path, const std::string& events_path,
                          double epoch_seconds, nse::Domain domain) {
  const nse::Recording rec = nse::read_eegb(eegb_path);
  const nse::EventList events = nse::read_events_csv(events_path);
  return nse::segment(rec, events, epoch_seconds, domain);
}

// The library rejects perplexity >= (n - 1) / 3; for small runs the CLI
// clamps the configured value instead of erroring out.
nse::TsneOptions fit_perplexity(nse::TsneOptions opts, Eigen::Index n) {
  const double limit = 0.9 * (static_cast<double>(n) - 1.0) / 3.0;
  if (opts.perplexity > limit) {
    if (limit < 1.0)
      throw nse::InvalidParameterError("tsne: too few points (" + std::to_string(n) +
                                       ") for any valid perplexity");
    nse::log_warn("tsne: clamping perplexity from " + std::to_string(opts.perplexity) + " to " +
                  std::to_string(limit) + " for n = " + std::to_string(n));
    opts.perplexity = limit;
  }
  return opts;
}

json file_info(const std::string& path) {
  if (!fs::exists(path)) throw nse::IoError("no such file: '" + path + "'");
  const std::string ext = fs::path(path).extension().string();

  auto read_header_line = [&]() {
    std::ifstream in(path, std::ios::binary);
    std::string line;
    if (!std::getline(in, line)) throw nse::ParseError("'" + path + "': empty file");
    try {
      return json::parse(line);
    } catch (const json::exception& e) {
      throw nse::ParseError("'" + path + "': bad header: " + std::string(e.what()));
    }
  };

  json j;
  j["file"] = path;
  if (ext == ".eegb") {
    const json header = read_header_line();
    j["type"] = "eegb";
    j["fs_hz"] = header.at("fs_hz");
    j["n_channels"] = header.at("channels").size();
    j["n_samples"] = header.at("n_samples");
  } else if (ext == ".bin") {
    const json header = read_header_line();
    j["type"] = "embeddings";
    j["count"] = header.at("count");
    j["n_windows"] = header.at("n_windows");
    j["n_filters"] = header.at("n_filters");
  } else if (ext == ".json") {
    std::ifstream in(path);
    json content;
    try {
      in >> content;
    } catch (const json::exception& e) {
      throw nse::ParseError("'" + path + "': " + std::string(e.what()));
    }
    if (content.contains("filters")) {
      j["type"] = "filter_bank";
      j["n_filters"] = content.at("filters").size();
      j["n_classes"] = content.at("class_ids").size();
      j["patterns_per_class"] = content.at("patterns_per_class");
      j["fitted_domain"] = content.at("fitted_domain");
    } else if (content.contains("unmixing")) {
      j["type"] = "ica_model";
      j["k"] = content.at("k");
    } else if (content.contains("directions")) {
      j["type"] = "synth_ground_truth";
      j["n_classes"] = content.at("directions").size();
    } else if (content.contains("adaptation_distance_shared")) {
      j["type"] = "adapt_eval_report";
      j["reduction_percent"] = content.at("reduction_percent");
    } else if (content.contains("fs_hz")) {
      j["type"] = "config";
    } else {
      j["type"] = "json";
    }
  } else if (ext == ".wav") {
    const nse::AudioClip clip = nse::read_wav(path);
    j["type"] = "wav";
    j["fs_hz"] = clip.sample_rate_hz;
    j["n_samples"] = clip.samples.size();
    j["duration_seconds"] = static_cast<double>(clip.samples.size()) / clip.sample_rate_hz;
  } else if (ext == ".csv") {
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    std::size_t rows = 0;
    std::string line;
    while (std::getline(in, line))
      if (!line.empty()) ++rows;
    j["type"] = header.rfind("onset_sample", 0) == 0 ? "events"
                : header.rfind("epoch_id", 0) == 0   ? "embedding_csv"
                : header.rfind("band_hz", 0) == 0    ? "erders_grid"
                                                     : "csv";
    j["rows"] = rows;
  } else {
    throw nse::ValidationError("info: unrecognized file type '" + ext + "'");
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"neural speech embedding pipeline"};
  app.require_subcommand(1);
  std::string command = "nse";

  // ---- synth ----------------------------------------------------------
  auto* synth = app.add_subcommand("synth", "generate synthetic two-domain EEG with ground truth");
  CommonFlags synth_flags;
  synth_flags.attach(synth);
  std::string synth_out;
  bool with_artifacts = false;
  synth->add_option("--out", synth_out, "output directory")->required();
  synth->add_flag("--with-artifacts", with_artifacts, "also emit an ICA artifact mixture");
  synth->callback([&] {
    command = "synth";
    const auto config = synth_flags.resolve();
    fs::create_directories(synth_out);

    nse::SynthSpec spec;
    spec.n_channels = config.synth_channels;
    spec.n_classes = config.synth_classes;
    spec.trials_per_class = config.synth_trials_per_class;
    spec.epoch_seconds = config.epoch_seconds;
    spec.fs_hz = config.fs_hz;
    spec.boosts.assign(static_cast<std::size_t>(config.synth_classes), config.synth_boost);
    spec.noise_alpha = config.synth_alpha;
    spec.noise_sigma = config.synth_sigma;
    spec.shift_epsilon = config.synth_shift_epsilon;
    spec.shift_noise_sigma = config.synth_shift_noise_sigma;
    spec.seed = config.seed;

    nse::SynthData data = nse::generate(spec);
    std::vector<std::string> outputs;
    for (auto* domain_set : {&data.imagined, &data.spoken}) {
      const std::string tag = nse::domain_name(domain_set->domains.front());
      // Pre-trial background gaps give baseline correction its window.
      auto [rec, events] = nse::epochs_to_recording(
          *domain_set, config.baseline_seconds, spec.noise_alpha, spec.noise_sigma,
          nse::mix64(spec.seed, tag == "imagined" ? 0x9a9 : 0x9aa));
      domain_set->epochs.clear();
      const std::string eegb = (fs::path(synth_out) / (tag + ".eegb")).string();
      const std::string csv = (fs::path(synth_out) / ("events_" + tag + ".csv")).string();
      nse::write_eegb(eegb, rec);
      nse::write_events_csv(csv, events);
      outputs.push_back(eegb);
      outputs.push_back(csv);
    }
    const std::string truth_path = (fs::path(synth_out) / "ground_truth.json").string();
    nse::write_synth_truth(truth_path, data.truth);
    outputs.push_back(truth_path);

    if (with_artifacts) {
      const int n_sources = std::min(config.synth_channels, 8);
      const nse::ArtifactMixture mix =
          nse::generate_artifact_mixture(config.seed, config.synth_channels, n_sources);
      const std::string mixed = (fs::path(synth_out) / "artifact_mixture.eegb").string();
      const std::string refs = (fs::path(synth_out) / "artifact_references.eegb").string();
      nse::write_eegb(mixed, mix.mixed);
      nse::write_eegb(refs, mix.references);
      outputs.push_back(mixed);
      outputs.push_back(refs);
    }

    print_status({{"command", "synth"},
                  {"outputs", outputs},
                  {"n_classes", spec.n_classes},
                  {"n_channels", spec.n_channels},
                  {"epochs_per_domain", spec.n_classes * spec.trials_per_class},
                  {"seed", spec.seed}});
  });

  // ---- preprocess ------------------------------------------------------
  auto* preprocess = app.add_subcommand("preprocess", "notch + bandpass + baseline correction");
  CommonFlags pre_flags;
  pre_flags.attach(preprocess);
  std::string pre_in, pre_events, pre_out;
  bool no_notch = false, no_bandpass = false, no_baseline = false;
  preprocess->add_option("--in", pre_in, "input EEGB")->required();
  preprocess->add_option("--events", pre_events, "events CSV")->required();
  preprocess->add_option("--out", pre_out, "output EEGB")->required();
  preprocess->add_flag("--no-notch", no_notch, "skip the line-noise notches");
  preprocess->add_flag("--no-bandpass", no_bandpass, "skip the bandpass");
  preprocess->add_flag("--no-baseline", no_baseline, "skip baseline correction");
  preprocess->callback([&] {
    command = "preprocess";
    const auto config = pre_flags.resolve();
    nse::Recording rec = nse::read_eegb(pre_in);
    const nse::EventList events = nse::read_events_csv(pre_events);

    std::vector<std::string> applied;
    if (!no_notch) {
      for (double f : config.notch_hz) {
        rec = nse::filtfilt(nse::design_notch(f, config.notch_q, rec.fs_hz), rec);
        applied.push_back("notch@" + std::to_string(f));
      }
    }
    if (!no_bandpass) {
      rec = nse::filtfilt(nse::design_bandpass(config.band_order, config.band_low_hz,
                                               config.band_high_hz, rec.fs_hz),
                          rec);
      applied.push_back("bandpass");
    }
    if (!no_baseline) {
      rec = nse::baseline_correct(rec, events, config.baseline_seconds, config.epoch_seconds);
      applied.push_back("baseline");
    }
    nse::write_eegb(pre_out, rec);
    print_status({{"command", "preprocess"},
                  {"outputs", {pre_out}},
                  {"applied", applied},
                  {"n_channels", rec.n_channels()},
                  {"n_samples", rec.n_samples()}});
  });

  // ---- ica-clean -------------------------------------------------------
  auto* ica_clean = app.add_subcommand("ica-clean", "reference-guided ICA artifact rejection");
  CommonFlags ica_flags;
  ica_flags.attach(ica_clean);
  std::string ica_in, ica_refs, ica_out, ica_model_out;
  int ica_k = 0;
  double ica_threshold = -1.0;
  ica_clean->add_option("--in", ica_in, "input EEGB")->required();
  ica_clean->add_option("--refs", ica_refs, "EOG/EMG reference EEGB")->required();
  ica_clean->add_option("--out", ica_out, "cleaned EEGB")->required();
  ica_clean->add_option("--model-out", ica_model_out, "write the fitted ICA model JSON");
  ica_clean->add_option("--k", ica_k, "component count, 0 = n_channels");
  auto* thr_opt = ica_clean->add_option("--threshold", ica_threshold, "rejection |r| threshold");
  ica_clean->callback([&] {
    command = "ica-clean";
    auto config = ica_flags.resolve();
    if (ica_k > 0) config.ica_components = ica_k;
    if (thr_opt->count() > 0) config.ica_threshold = ica_threshold;
    config.validate();

    const nse::Recording rec = nse::read_eegb(ica_in);
    const nse::Recording refs = nse::read_eegb(ica_refs);
    const int k =
        config.ica_components > 0 ? config.ica_components : static_cast<int>(rec.n_channels());
    nse::IcaOptions opts;
    opts.max_iterations = config.ica_max_iterations;
    opts.tolerance = config.ica_tolerance;
    const nse::IcaModel model = nse::fit_ica(rec, k, config.seed, opts);

    std::vector<int> rejected;
    const nse::Recording cleaned =
        nse::reject_components(model, rec, refs, config.ica_threshold, &rejected);
    nse::write_eegb(ica_out, cleaned);
    std::vector<std::string> outputs = {ica_out};
    if (!ica_model_out.empty()) {
      nse::write_ica_model(ica_model_out, model);
      outputs.push_back(ica_model_out);
    }
    print_status({{"command", "ica-clean"},
                  {"outputs", outputs},
                  {"k", model.k},
                  {"rejected_components", rejected},
                  {"threshold", config.ica_threshold}});
  });

  // ---- csp-fit ---------------------------------------------------------
  auto* csp_fit = app.add_subcommand("csp-fit", "fit a multi-class CSP filter bank");
  CommonFlags csp_flags;
  csp_flags.attach(csp_fit);
  std::string csp_epochs, csp_events, csp_out, csp_domain = "imagined";
  int csp_ppc = 0;
  double csp_epoch_seconds = 0.0;
  csp_fit->add_option("--epochs", csp_epochs, "EEGB with concatenated epochs")->required();
  csp_fit->add_option("--events", csp_events, "events CSV")->required();
  csp_fit->add_option("--out", csp_out, "output bank JSON")->required();
  csp_fit->add_option("--domain", csp_domain, "domain tag recorded in the bank");
  auto* ppc_opt = csp_fit->add_option("--patterns-per-class", csp_ppc, "filters per class");
  auto* es_opt = csp_fit->add_option("--epoch-seconds", csp_epoch_seconds, "epoch length");
  csp_fit->callback([&] {
    command = "csp-fit";
    auto config = csp_flags.resolve();
    if (ppc_opt->count() > 0) config.patterns_per_class = csp_ppc;
    if (es_opt->count() > 0) config.epoch_seconds = csp_epoch_seconds;
    config.validate();

    const nse::Domain domain = nse::domain_from_name(csp_domain);
    const nse::EpochSet epochs = load_epochs(csp_epochs, csp_events, config.epoch_seconds, domain);
    const nse::ClassCovariances covs = nse::class_covariances(epochs, config.csp_ridge);
    nse::SpatialFilterBank bank = nse::csp_multiclass(covs, config.patterns_per_class);
    bank.fitted_domain = domain;
    nse::write_filter_bank(csp_out, bank);
    print_status({{"command", "csp-fit"},
                  {"outputs", {csp_out}},
                  {"n_filters", bank.n_filters()},
                  {"n_classes", bank.class_ids.size()},
                  {"patterns_per_class", bank.patterns_per_class},
                  {"fitted_domain", nse::domain_name(bank.fitted_domain)}});
  });

  // ---- embed -----------------------------------------------------------
  auto* embed_cmd = app.add_subcommand("embed", "project epochs and build log-variance embeddings");
  CommonFlags embed_flags;
  embed_flags.attach(embed_cmd);
  std::string emb_epochs, emb_events, emb_bank, emb_out, emb_domain = "imagined";
  std::string emb_csv, emb_masked_csv;
  int emb_windows = 0;
  embed_cmd->add_option("--epochs", emb_epochs, "EEGB with concatenated epochs")->required();
  embed_cmd->add_option("--events", emb_events, "events CSV")->required();
  embed_cmd->add_option("--bank", emb_bank, "CSP filter bank JSON")->required();
  embed_cmd->add_option("--out", emb_out, "output embedding container")->required();
  embed_cmd->add_option("--domain", emb_domain, "domain tag for the embeddings");
  auto* win_opt = embed_cmd->add_option("--n-windows", emb_windows, "time windows per epoch");
  embed_cmd->add_option("--csv", emb_csv, "also export plain CSV");
  embed_cmd->add_option("--masked-csv", emb_masked_csv, "also export the column-mean-masked CSV");
  embed_cmd->callback([&] {
    command = "embed";
    auto config = embed_flags.resolve();
    if (win_opt->count() > 0) config.n_windows = emb_windows;
    config.validate();

    const nse::Domain domain = nse::domain_from_name(emb_domain);
    const nse::EpochSet epochs = load_epochs(emb_epochs, emb_events, config.epoch_seconds, domain);
    const nse::SpatialFilterBank bank = nse::read_filter_bank(emb_bank);
    const nse::EpochSet projected = nse::project(bank, epochs);
    const auto ms = nse::embed(projected, config.n_windows, config.embed_eps);
    nse::save_embeddings(emb_out, ms);

    std::vector<std::string> outputs = {emb_out};
    if (!emb_csv.empty()) {
      nse::export_embeddings_csv(emb_csv, ms);
      outputs.push_back(emb_csv);
    }
    if (!emb_masked_csv.empty()) {
      std::vector<nse::MaskedEmbedding> masked;
      masked.reserve(ms.size());
      for (const auto& m : ms) masked.push_back(nse::column_mean_mask(m));
      nse::export_masked_csv(emb_masked_csv, masked);
      outputs.push_back(emb_masked_csv);
    }
    print_status({{"command", "embed"},
                  {"outputs", outputs},
                  {"count", ms.size()},
                  {"n_windows", config.n_windows},
                  {"n_filters", ms.empty() ? 0 : ms.front().n_filters()}});
  });

  // ---- adapt-eval ------------------------------------------------------
  auto* adapt = app.add_subcommand(
      "adapt-eval", "shared vs per-domain CSP banks: adaptation distance and t-SNE exports");
  CommonFlags adapt_flags;
  adapt_flags.attach(adapt);
  std::string ad_im, ad_im_events, ad_sp, ad_sp_events, ad_out;
  bool no_tsne = false;
  adapt->add_option("--imagined", ad_im, "imagined-domain EEGB")->required();
  adapt->add_option("--imagined-events", ad_im_events, "imagined events CSV")->required();
  adapt->add_option("--spoken", ad_sp, "spoken-domain EEGB")->required();
  adapt->add_option("--spoken-events", ad_sp_events, "spoken events CSV")->required();
  adapt->add_option("--out", ad_out, "output directory")->required();
  adapt->add_flag("--no-tsne", no_tsne, "skip the t-SNE CSV exports");
  adapt->callback([&] {
    command = "adapt-eval";
    const auto config = adapt_flags.resolve();
    fs::create_directories(ad_out);

    const nse::EpochSet imagined =
        load_epochs(ad_im, ad_im_events, config.epoch_seconds, nse::Domain::imagined);
    const nse::EpochSet spoken =
        load_epochs(ad_sp, ad_sp_events, config.epoch_seconds, nse::Domain::spoken);

    const nse::ClassCovariances cov_im = nse::class_covariances(imagined, config.csp_ridge);
    const nse::ClassCovariances cov_sp = nse::class_covariances(spoken, config.csp_ridge);

    nse::SpatialFilterBank shared_bank = nse::csp_multiclass(cov_im, config.patterns_per_class);
    shared_bank.fitted_domain = nse::Domain::imagined;
    nse::SpatialFilterBank spoken_bank = nse::csp_multiclass(cov_sp, config.patterns_per_class);
    spoken_bank.fitted_domain = nse::Domain::spoken;

    auto embed_with = [&](const nse::SpatialFilterBank& bank, const nse::EpochSet& epochs) {
      return nse::embed(nse::project(bank, epochs), config.n_windows, config.embed_eps);
    };

    // Shared protocol: the imagined-fitted bank is applied to both domains.
    std::vector<nse::EmbeddingMatrix> shared = embed_with(shared_bank, imagined);
    {
      auto sp = embed_with(shared_bank, spoken);
      for (auto& m : sp) m.epoch_id += static_cast<uint32_t>(shared.size());
      shared.insert(shared.end(), sp.begin(), sp.end());
    }
    // Independent protocol: each domain gets its own bank.
    std::vector<nse::EmbeddingMatrix> independent = embed_with(shared_bank, imagined);
    {
      auto sp = embed_with(spoken_bank, spoken);
      for (auto& m : sp) m.epoch_id += static_cast<uint32_t>(independent.size());
      independent.insert(independent.end(), sp.begin(), sp.end());
    }

    const double dist_shared = nse::adaptation_distance(shared);
    const double dist_independent = nse::adaptation_distance(independent);
    const double reduction =
        dist_independent > 0.0 ? 100.0 * (1.0 - dist_shared / dist_independent) : 0.0;

    const std::string bank_path = (fs::path(ad_out) / "shared_bank.json").string();
    nse::write_filter_bank(bank_path, shared_bank);
    const std::string report_path = (fs::path(ad_out) / "adapt_eval.json").string();
    {
      json report;
      report["adaptation_distance_shared"] = dist_shared;
      report["adaptation_distance_independent"] = dist_independent;
      report["reduction_percent"] = reduction;
      report["n_epochs"] = shared.size();
      std::ofstream out(report_path);
      if (!out) throw nse::IoError("cannot open '" + report_path + "' for writing");
      out << report.dump() << '\n';
    }
    std::vector<std::string> outputs = {report_path, bank_path};

    if (!no_tsne) {
      for (const auto& [name, set] :
           std::vector<std::pair<std::string, const std::vector<nse::EmbeddingMatrix>*>>{
               {"tsne_shared.csv", &shared}, {"tsne_independent.csv", &independent}}) {
        const auto sample = stratified_subsample(
            *set, static_cast<std::size_t>(config.tsne_max_points), config.seed);
        nse::TsneOptions topts = config.tsne;
        topts.seed = config.seed;
        const Eigen::MatrixXd features = nse::stack_flattened(sample);
        const nse::TsneResult result = nse::tsne(features, fit_perplexity(topts, features.rows()));
        const std::string path = (fs::path(ad_out) / name).string();
        nse::write_tsne_csv(path, result, sample);
        outputs.push_back(path);
      }
    }

    print_status({{"command", "adapt-eval"},
                  {"outputs", outputs},
                  {"adaptation_distance_shared", dist_shared},
                  {"adaptation_distance_independent", dist_independent},
                  {"reduction_percent", reduction}});
  });

  // ---- erders ----------------------------------------------------------
  auto* erders_cmd = app.add_subcommand("erders", "band-power change grid (ERD/ERS)");
  CommonFlags erd_flags;
  erd_flags.attach(erders_cmd);
  std::string erd_epochs, erd_events, erd_out;
  int erd_channel = -1;
  erders_cmd->add_option("--epochs", erd_epochs, "EEGB with concatenated epochs")->required();
  erders_cmd->add_option("--events", erd_events, "events CSV")->required();
  erders_cmd->add_option("--out", erd_out, "output grid CSV")->required();
  erders_cmd->add_option("--channel", erd_channel, "scope channel, -1 = average");
  erders_cmd->callback([&] {
    command = "erders";
    const auto config = erd_flags.resolve();
    const nse::EpochSet epochs =
        load_epochs(erd_epochs, erd_events, config.epoch_seconds, nse::Domain::imagined);
    const nse::ErdErsGrid grid =
        nse::erd_ers(epochs, config.erd_band_width_hz, config.erd_bin_seconds,
                     {config.erd_low_hz, config.erd_high_hz}, {}, erd_channel);
    nse::write_grid_csv(erd_out, grid);
    print_status({{"command", "erders"},
                  {"outputs", {erd_out}},
                  {"n_bands", grid.bands_hz.size()},
                  {"n_bins", grid.time_bins_s.size()},
                  {"scope", erd_channel}});
  });

  // ---- tsne ------------------------------------------------------------
  auto* tsne_cmd = app.add_subcommand("tsne", "embed stored embeddings into 2-D");
  CommonFlags tsne_flags;
  tsne_flags.attach(tsne_cmd);
  std::string ts_in, ts_out;
  double ts_perplexity = 0.0;
  int ts_iterations = 0;
  tsne_cmd->add_option("--embeddings", ts_in, "embedding container")->required();
  tsne_cmd->add_option("--out", ts_out, "output CSV")->required();
  auto* perp_opt = tsne_cmd->add_option("--perplexity", ts_perplexity, "target perplexity");
  auto* iter_opt = tsne_cmd->add_option("--iterations", ts_iterations, "gradient-descent steps");
  tsne_cmd->callback([&] {
    command = "tsne";
    auto config = tsne_flags.resolve();
    if (perp_opt->count() > 0) config.tsne.perplexity = ts_perplexity;
    if (iter_opt->count() > 0) config.tsne.iterations = ts_iterations;
    config.validate();

    const auto ms = nse::load_embeddings(ts_in);
    const auto sample =
        stratified_subsample(ms, static_cast<std::size_t>(config.tsne_max_points), config.seed);
    nse::TsneOptions topts = config.tsne;
    topts.seed = config.seed;
    const Eigen::MatrixXd features = nse::stack_flattened(sample);
    const nse::TsneResult result = nse::tsne(features, fit_perplexity(topts, features.rows()));
    nse::write_tsne_csv(ts_out, result, sample);
    print_status({{"command", "tsne"},
                  {"outputs", {ts_out}},
                  {"n_points", sample.size()},
                  {"kl_initial", result.kl_initial},
                  {"kl_final", result.kl_final}});
  });

  // ---- audio-resample --------------------------------------------------
  auto* resample_cmd = app.add_subcommand("audio-resample", "polyphase resampling of a WAV file");
  CommonFlags rs_flags;
  rs_flags.attach(resample_cmd);
  std::string rs_in, rs_out;
  int rs_target = 0;
  resample_cmd->add_option("--in", rs_in, "input WAV")->required();
  resample_cmd->add_option("--out", rs_out, "output WAV")->required();
  auto* rs_opt = resample_cmd->add_option("--target-hz", rs_target, "target sample rate");
  resample_cmd->callback([&] {
    command = "audio-resample";
    auto config = rs_flags.resolve();
    if (rs_opt->count() > 0) config.audio_target_hz = rs_target;
    config.validate();

    const nse::AudioClip clip = nse::read_wav(rs_in);
    std::size_t clipped = 0;
    const nse::AudioClip out = nse::resample(clip, config.audio_target_hz, &clipped);
    nse::write_wav(rs_out, out);
    print_status({{"command", "audio-resample"},
                  {"outputs", {rs_out}},
                  {"source_hz", clip.sample_rate_hz},
                  {"target_hz", out.sample_rate_hz},
                  {"n_samples", out.samples.size()},
                  {"clipped", clipped}});
  });

  // ---- audio-denoise ---------------------------------------------------
  auto* denoise_cmd =
      app.add_subcommand("audio-denoise", "stationary spectral-gating noise reduction");
  CommonFlags dn_flags;
  dn_flags.attach(denoise_cmd);
  std::string dn_in, dn_out, dn_profile;
  denoise_cmd->add_option("--in", dn_in, "input WAV")->required();
  denoise_cmd->add_option("--out", dn_out, "output WAV")->required();
  denoise_cmd->add_option("--noise-profile", dn_profile,
                          "noise-only WAV (otherwise percentile mode)");
  denoise_cmd->callback([&] {
    command = "audio-denoise";
    dn_flags.resolve();
    const nse::AudioClip clip = nse::read_wav(dn_in);
    nse::GateStats stats;
    nse::AudioClip out;
    if (!dn_profile.empty()) {
      out = nse::spectral_gate(clip, nse::read_wav(dn_profile), nse::GateOptions{}, &stats);
    } else {
      out = nse::spectral_gate(clip, nse::GateOptions{}, &stats);
    }
    nse::write_wav(dn_out, out);
    print_status({{"command", "audio-denoise"},
                  {"outputs", {dn_out}},
                  {"mode", dn_profile.empty() ? "percentile" : "profile"},
                  {"mask_min", stats.mask_min},
                  {"mask_max", stats.mask_max},
                  {"clipped", stats.clipped}});
  });

  // ---- info ------------------------------------------------------------
  auto* info_cmd = app.add_subcommand("info", "describe a pipeline file");
  std::string info_path;
  info_cmd->add_option("file", info_path, "file to describe")->required();
  info_cmd->callback([&] {
    command = "info";
    json j = file_info(info_path);
    j["command"] = "info";
    print_status(j);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ExtrasError& e) {
    std::string message = e.what();
    const auto colon = message.rfind(": ");
    if (colon != std::string::npos) {
      const std::string unknown = message.substr(colon + 2);
      const std::string hint = suggest_flag(app, unknown);
      if (!hint.empty()) message += " (did you mean '" + hint + "'?)";
    }
    return fail(command, nse::ErrorCategory::usage, message);
  } catch (const CLI::ParseError& e) {
    return fail(command, nse::ErrorCategory::usage, e.what());
  } catch (const nse::Error& e) {
    return fail(command, e.category(), e.what());
  } catch (const std::exception& e) {
    return fail(command, nse::ErrorCategory::data, std::string("internal: ") + e.what());
  }
  return 0;
}
