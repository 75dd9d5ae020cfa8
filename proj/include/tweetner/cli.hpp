#pragma once

// Command-line front end: one subcommand per pipeline stage.
//
// Exit codes: 0 success, 1 usage error, 2 data error. Diagnostics go to
// the error stream; results go to files or the output stream.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "tweetner/config.hpp"
#include "tweetner/corpus.hpp"
#include "tweetner/crf.hpp"
#include "tweetner/embeddings.hpp"
#include "tweetner/ensemble.hpp"
#include "tweetner/evaluation.hpp"
#include "tweetner/gmm.hpp"
#include "tweetner/pipeline.hpp"

namespace tweetner::cli {

inline constexpr const char* kVersion = "1.0.0";

inline unsigned default_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

inline std::ifstream open_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return in;
}

inline std::ofstream create_text(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open '" + path + "' for writing");
  return out;
}

inline std::vector<LabeledSentence> read_iob_file(const std::string& path) {
  auto in = open_text(path);
  return read_iob(in);
}

inline void write_iob_file(const std::vector<LabeledSentence>& data, const std::string& path) {
  auto out = create_text(path);
  write_iob(data, out);
}

inline TokenizedCorpus read_corpus_file(const std::string& path) {
  auto in = open_text(path);
  return read_tokenized_corpus(in);
}

/// Word list: the first tab-separated field of every non-blank line, so
/// plain word lists and IOB files both work.
inline std::vector<std::string> read_word_list(const std::string& path) {
  auto in = open_text(path);
  std::vector<std::string> words;
  std::set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto word = line.substr(0, line.find('\t'));
    if (word.find_first_not_of(" ") == std::string::npos) continue;
    if (seen.insert(word).second) words.push_back(word);
  }
  return words;
}

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw CLI::ValidationError("list", "bad number '" + item + "'");
    out.push_back(v);
  }
  if (out.empty()) throw CLI::ValidationError("list", "empty list");
  return out;
}

struct EmbeddingFlags {
  EmbeddingParams params;

  void attach(CLI::App* app, bool with_dim = true) {
    if (with_dim) app->add_option("--dim", params.dim, "Vector dimension")->capture_default_str();
    app->add_option("--lr", params.learning_rate, "Initial learning rate")->capture_default_str();
    app->add_option("--window", params.window, "Maximum context radius")->capture_default_str();
    app->add_option("--epochs", params.epochs, "Passes over the corpus")->capture_default_str();
    app->add_option("--min-count", params.min_count, "Minimum word frequency")->capture_default_str();
    app->add_option("--neg", params.negatives, "Negative samples per positive")->capture_default_str();
    app->add_option("--minn", params.min_ngram, "Minimum character n-gram length")->capture_default_str();
    app->add_option("--maxn", params.max_ngram, "Maximum character n-gram length")->capture_default_str();
    app->add_option("--t", params.subsample_threshold, "Subsampling threshold")->capture_default_str();
    app->add_option("--buckets", params.bucket_count, "N-gram hash buckets")->capture_default_str();
  }
};

struct ModelPathFlags {
  std::string embeddings, gmm, gmm_embeddings, sent_embeddings;

  void attach(CLI::App* app) {
    app->add_option("--embeddings", embeddings, "Word embedding model (raw word-vector features)");
    app->add_option("--gmm", gmm, "GMM file (cluster posterior features)");
    app->add_option("--gmm-embeddings", gmm_embeddings, "Embedding model the GMM was fitted on (default: --embeddings)");
    app->add_option("--sent-embeddings", sent_embeddings, "Sentence embedding model (sentence mean features)");
  }
};

struct PosFlags {
  std::string source = "column";
  std::string command;

  void attach(CLI::App* app) {
    app->add_option("--pos", source, "POS source: none, column or external")
        ->check(CLI::IsMember({"none", "column", "external"}))
        ->capture_default_str();
    app->add_option("--pos-command", command, "Tagger command for --pos external");
  }

  PosProvider provider() const {
    PosProvider p{parse_pos_source(source), command};
    if (p.source == PosSource::External && p.command.empty()) {
      throw CLI::ValidationError("--pos-command", "required with --pos external");
    }
    return p;
  }
};

inline std::string absolute(const std::string& path) {
  return path.empty() ? path : std::filesystem::absolute(path).lexically_normal().string();
}

inline void print_report(std::ostream& out, const ChunkReport& report, double seq_acc,
                         const std::vector<TagScores>* per_tag) {
  auto row = [&](const std::string& name, const Scores& s) {
    out << std::left << std::setw(18) << name << std::right << std::fixed << std::setprecision(3) << std::setw(10)
        << s.precision << std::setw(10) << s.recall << std::setw(10) << s.f1 << std::setw(9) << s.support << '\n';
  };
  out << std::left << std::setw(18) << "type" << std::right << std::setw(10) << "precision" << std::setw(10)
      << "recall" << std::setw(10) << "f1" << std::setw(9) << "support" << '\n';
  for (const auto& [type, s] : report.per_type) row(type, s);
  row("micro", report.micro);
  if (per_tag != nullptr) {
    out << '\n' << std::left << std::setw(18) << "tag" << std::right << std::setw(10) << "precision" << std::setw(10)
        << "recall" << std::setw(10) << "f1" << std::setw(9) << "support" << '\n';
    for (const auto& t : *per_tag) row(t.tag, t.scores);
  }
  out << '\n' << std::fixed << std::setprecision(3);
  out << "micro precision " << report.micro.precision << '\n';
  out << "micro recall " << report.micro.recall << '\n';
  out << "micro F1 " << report.micro.f1 << '\n';
  out << "sequence accuracy " << seq_acc << '\n';
}

inline nlohmann::json report_json(const ChunkReport& report, double seq_acc, const std::vector<TagScores>& per_tag) {
  nlohmann::json j;
  j["micro_precision"] = report.micro.precision;
  j["micro_recall"] = report.micro.recall;
  j["micro_f1"] = report.micro.f1;
  j["sequence_accuracy"] = seq_acc;
  auto scores = [](const Scores& s) {
    return nlohmann::json{{"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}, {"support", s.support}};
  };
  j["per_type"] = nlohmann::json::object();
  for (const auto& [type, s] : report.per_type) j["per_type"][type] = scores(s);
  j["per_tag"] = nlohmann::json::array();
  for (const auto& t : per_tag) {
    auto e = scores(t.scores);
    e["tag"] = t.tag;
    j["per_tag"].push_back(e);
  }
  return j;
}

inline std::vector<LabeledSentence> with_labels(std::vector<LabeledSentence> data,
                                                const std::vector<std::vector<std::string>>& labels) {
  for (std::size_t i = 0; i < data.size(); ++i) data[i].labels = labels[i];
  return data;
}

inline std::vector<LabelSequence> label_sequences(const std::vector<LabeledSentence>& data) {
  std::vector<LabelSequence> out;
  out.reserve(data.size());
  for (const auto& s : data) out.push_back(s.labels);
  return out;
}

/// Feature models named on the command line, loaded and owned.
struct LoadedModels {
  std::optional<EmbeddingModel> word, sentence, gmm_input;
  std::optional<GmmModel> gmm;
  FeatureConfig config;

  static LoadedModels from(const ModelPathFlags& f, bool handcrafted) {
    LoadedModels m;
    m.config = {handcrafted, !f.embeddings.empty(), !f.gmm.empty(), !f.sent_embeddings.empty()};
    if (!f.embeddings.empty()) m.word = load_embeddings(f.embeddings);
    if (!f.sent_embeddings.empty()) m.sentence = load_embeddings(f.sent_embeddings);
    if (!f.gmm.empty()) {
      const auto& input = f.gmm_embeddings.empty() ? f.embeddings : f.gmm_embeddings;
      if (input.empty()) throw Error(ErrorKind::ModelMissing, "--gmm needs --gmm-embeddings or --embeddings");
      m.gmm_input = load_embeddings(input);
      m.gmm = load_gmm(f.gmm);
    }
    return m;
  }

  FeatureModels models() const {
    return {word ? &*word : nullptr, gmm_input ? &*gmm_input : nullptr, gmm ? &*gmm : nullptr,
            sentence ? &*sentence : nullptr};
  }
};

inline std::string ensemble_member_dir(std::size_t i) {
  std::ostringstream name;
  name << "model-" << std::setw(3) << std::setfill('0') << i;
  return name.str();
}

inline std::vector<Pipeline> load_ensemble(const std::filesystem::path& dir) {
  auto in = open_text((dir / "ensemble.txt").string());
  std::vector<Pipeline> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    out.push_back(load_pipeline((dir / line / "model.crf").string()));
  }
  if (out.empty()) throw Error(ErrorKind::ModelMissing, "ensemble directory lists no models");
  return out;
}

/// Runs one command line. `args[0]` is the program name.
inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Named-entity tagging for tweets: subword embeddings, GMM cluster features and a linear-chain CRF",
               "tweetner"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(0, 1);
  bool show_version = false;
  app.add_flag("--version", show_version, "Print the version and the model formats it reads and writes");
  app.footer("Every subcommand also accepts --config FILE with `key = value` lines; command-line flags win.");

  std::uint64_t seed = 0;
  unsigned threads = default_threads();
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", seed, "Random seed")->capture_default_str(); };
  auto add_threads = [&](CLI::App* sub) {
    sub->add_option("--threads", threads, "Worker threads (results are reproducible with 1)")
        ->check(CLI::PositiveNumber);
  };

  // preprocess
  std::string in_path, out_path;
  double url_keep = 0.01, mention_mask = 0.01;
  auto* pre = app.add_subcommand("preprocess", "Filter URL tweets and mask mentions in a raw tweet corpus");
  pre->add_option("--in", in_path, "Input corpus, one tweet per line")->required();
  pre->add_option("--out", out_path, "Output corpus")->required();
  pre->add_option("--url-keep-rate", url_keep, "Probability of keeping a tweet with a URL")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  pre->add_option("--mention-mask-rate", mention_mask, "Probability of replacing a mention by @*")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  add_seed(pre);

  // embed-train
  std::string corpus_path;
  EmbeddingFlags emb;
  auto* embed = app.add_subcommand("embed-train", "Train subword skipgram embeddings");
  embed->add_option("--corpus", corpus_path, "Tweet corpus, one tweet per line")->required();
  embed->add_option("--out", out_path, "Output model (SGNS)")->required();
  emb.attach(embed);
  add_threads(embed);
  add_seed(embed);

  // gmm-fit
  std::string embeddings_path, words_path;
  GmmOptions gmm_opt;
  auto* gmmfit = app.add_subcommand("gmm-fit", "Fit a diagonal GMM to the vectors of a word list");
  gmmfit->add_option("--embeddings", embeddings_path, "Embedding model (SGNS)")->required();
  gmmfit->add_option("--words", words_path, "Word list or IOB file (first column)")->required();
  gmmfit->add_option("--k", gmm_opt.components, "Mixture components")->capture_default_str();
  gmmfit->add_option("--max-iter", gmm_opt.max_iter, "EM iteration limit")->capture_default_str();
  gmmfit->add_option("--tol", gmm_opt.tol, "Relative log-likelihood tolerance")->capture_default_str();
  gmmfit->add_option("--out", out_path, "Output model (GMM1)")->required();
  add_seed(gmmfit);

  // train
  std::string data_path, model_path;
  TrainConfig crf_cfg;
  ModelPathFlags paths;
  PosFlags pos;
  bool no_handcrafted = false;
  auto* train = app.add_subcommand("train", "Train a CRF tagger on IOB data");
  train->add_option("--data", data_path, "Labeled IOB file")->required();
  train->add_option("--model", model_path, "Output model (CRF1)")->required();
  train->add_option("--c1", crf_cfg.c1, "L1 regularization weight")->capture_default_str();
  train->add_option("--c2", crf_cfg.c2, "L2 regularization weight")->capture_default_str();
  train->add_option("--max-iter", crf_cfg.max_iterations, "Optimizer iteration limit")->capture_default_str();
  train->add_flag("--no-handcrafted", no_handcrafted, "Disable the handcrafted feature templates");
  paths.attach(train);
  pos.attach(train);
  add_threads(train);

  // tag
  auto* tagcmd = app.add_subcommand("tag", "Label an IOB file with a trained model");
  tagcmd->add_option("--model", model_path, "Model (CRF1)")->required();
  tagcmd->add_option("--in", in_path, "IOB input (existing labels are ignored)")->required();
  tagcmd->add_option("--out", out_path, "IOB output")->required();
  paths.attach(tagcmd);
  add_threads(tagcmd);

  // ensemble-train
  std::size_t members = 20;
  std::string out_dir, extra_words_path;
  std::uint32_t sent_dim = 40, gmm_dim = 100;
  bool no_ft_word = false, no_ft_cluster = false, no_ft_sentence = false;
  auto* etrain = app.add_subcommand("ensemble-train", "Train N pipelines differing only in embedding seeds");
  etrain->add_option("--n", members, "Number of pipelines")->check(CLI::PositiveNumber)->capture_default_str();
  etrain->add_option("--data", data_path, "Labeled IOB file")->required();
  etrain->add_option("--corpus", corpus_path, "Unlabeled tweet corpus")->required();
  etrain->add_option("--out-dir", out_dir, "Output directory")->required();
  etrain->add_option("--extra-words", extra_words_path, "Additional words for GMM fitting (word list or IOB)");
  emb.attach(etrain);
  etrain->add_option("--sent-dim", sent_dim, "Sentence embedding dimension")->capture_default_str();
  etrain->add_option("--gmm-dim", gmm_dim, "GMM input embedding dimension")->capture_default_str();
  etrain->add_option("--k", gmm_opt.components, "Mixture components")->capture_default_str();
  etrain->add_option("--gmm-max-iter", gmm_opt.max_iter, "EM iteration limit")->capture_default_str();
  etrain->add_option("--c1", crf_cfg.c1, "L1 regularization weight")->capture_default_str();
  etrain->add_option("--c2", crf_cfg.c2, "L2 regularization weight")->capture_default_str();
  etrain->add_option("--max-iter", crf_cfg.max_iterations, "Optimizer iteration limit")->capture_default_str();
  etrain->add_flag("--no-handcrafted", no_handcrafted, "Disable handcrafted features");
  etrain->add_flag("--no-ft-word", no_ft_word, "Disable raw word-vector features");
  etrain->add_flag("--no-ft-cluster", no_ft_cluster, "Disable GMM cluster features");
  etrain->add_flag("--no-ft-sentence", no_ft_sentence, "Disable sentence-vector features");
  pos.attach(etrain);
  add_threads(etrain);
  add_seed(etrain);

  // ensemble-tag
  std::string models_dir;
  auto* etag = app.add_subcommand("ensemble-tag", "Label an IOB file by majority vote of an ensemble");
  etag->add_option("--models", models_dir, "Directory written by ensemble-train")->required();
  etag->add_option("--in", in_path, "IOB input (existing labels are ignored)")->required();
  etag->add_option("--out", out_path, "IOB output")->required();
  add_threads(etag);

  // eval
  std::string gold_path, pred_path;
  bool per_tag = false, as_json = false;
  auto* eval = app.add_subcommand("eval", "Chunk-level and per-tag scores of predictions against gold");
  eval->add_option("--gold", gold_path, "Gold IOB file")->required();
  eval->add_option("--pred", pred_path, "Predicted IOB file")->required();
  eval->add_flag("--per-tag", per_tag, "Also report token-level scores per IOB tag");
  eval->add_flag("--json", as_json, "Print a JSON report instead of tables");

  // gridsearch
  std::string c1_list = "1e-6,1e-5,1e-4,1e-3", c2_list = "0.1,0.3,0.8,2";
  std::size_t folds = 5;
  auto* grid = app.add_subcommand("gridsearch", "Cross-validated search over c1 and c2");
  grid->add_option("--data", data_path, "Labeled IOB file")->required();
  grid->add_option("--c1", c1_list, "Comma-separated c1 candidates")->capture_default_str();
  grid->add_option("--c2", c2_list, "Comma-separated c2 candidates")->capture_default_str();
  grid->add_option("--folds", folds, "Cross-validation folds")->check(CLI::Range(2, 1000))->capture_default_str();
  grid->add_option("--max-iter", crf_cfg.max_iterations, "Optimizer iteration limit")->capture_default_str();
  grid->add_flag("--no-handcrafted", no_handcrafted, "Disable the handcrafted feature templates");
  paths.attach(grid);
  pos.attach(grid);
  add_threads(grid);
  add_seed(grid);

  // inspect-weights
  std::size_t top = 10;
  auto* inspect = app.add_subcommand("inspect-weights", "Print the highest and lowest CRF weights");
  inspect->add_option("--model", model_path, "Model (CRF1)")->required();
  inspect->add_option("--top", top, "Entries per list")->check(CLI::PositiveNumber)->capture_default_str();

  // --config FILE anywhere after the subcommand.
  std::string config_path;
  for (std::size_t i = 2; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
      break;
    }
    if (args[i].starts_with("--config=")) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
      break;
    }
  }

  try {
    if (!config_path.empty()) {
      auto in = open_text(config_path);
      args = expand_config_args(std::move(args), parse_config(in));
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend() - (args.empty() ? 0 : 1));
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  if (show_version) {
    out << "tweetner " << kVersion << '\n'
        << "model formats: SGNS v" << kEmbeddingFormatVersion << ", GMM1, CRF1 v" << kCrfFormatVersion << '\n';
    return 0;
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return 1;
  }

  try {
    if (*pre) {
      auto in = open_text(in_path);
      auto o = create_text(out_path);
      const auto stats = preprocess_corpus(in, o, url_keep, mention_mask, seed);
      err << "tweets " << stats.total << ", dropped (url) " << stats.dropped_url << ", masked mentions "
          << stats.masked_mentions << '\n';
    } else if (*embed) {
      const auto corpus = read_corpus_file(corpus_path);
      const auto model = train_skipgram(corpus, emb.params, seed, threads);
      save_embeddings(model, out_path);
      err << "vocabulary " << model.vocab.size() << " words, dim " << model.dim() << '\n';
    } else if (*gmmfit) {
      const auto model = load_embeddings(embeddings_path);
      const auto words = read_word_list(words_path);
      const auto fit = fit_gmm(word_points(model, words), gmm_opt, seed);
      save_gmm(fit.model, out_path);
      err << "fitted " << gmm_opt.components << " components on " << words.size() << " words, log-likelihood "
          << fit.log_likelihood << " after " << fit.iterations << " iterations\n";
    } else if (*train) {
      const auto data = read_iob_file(data_path);
      const auto loaded = LoadedModels::from(paths, !no_handcrafted);
      const auto provider = pos.provider();
      crf_cfg.threads = threads;
      auto fit = fit_crf(build_problem(data, loaded.models(), loaded.config, provider), crf_cfg);
      PipelinePaths recorded{absolute(paths.embeddings), absolute(paths.sent_embeddings),
                             absolute(paths.gmm.empty() ? "" : paths.gmm_embeddings.empty() ? paths.embeddings
                                                                                           : paths.gmm_embeddings),
                             absolute(paths.gmm)};
      record_pipeline(fit.model, loaded.config, provider, recorded);
      save_crf(fit.model, model_path);
      err << "trained on " << data.size() << " sentences: " << fit.model.num_labels() << " labels, "
          << fit.model.num_features() << " features, " << fit.iterations << " iterations ("
          << to_string(fit.reason) << "), objective " << fit.trace.back() << '\n';
    } else if (*tagcmd) {
      const auto pipeline =
          load_pipeline(model_path, {paths.embeddings, paths.sent_embeddings,
                                     paths.gmm_embeddings.empty() && !paths.gmm.empty() ? paths.embeddings
                                                                                         : paths.gmm_embeddings,
                                     paths.gmm});
      const auto data = read_iob_file(in_path);
      write_iob_file(with_labels(data, pipeline.tag(token_lists(data), threads)), out_path);
    } else if (*etrain) {
      PipelineConfig config;
      config.features = {!no_handcrafted, !no_ft_word, !no_ft_cluster, !no_ft_sentence};
      config.pos = pos.provider();
      config.word_embeddings = emb.params;
      config.sentence_embeddings = emb.params;
      config.sentence_embeddings.dim = sent_dim;
      config.gmm_embeddings = emb.params;
      config.gmm_embeddings.dim = gmm_dim;
      config.gmm = gmm_opt;
      config.crf = crf_cfg;
      const auto data = read_iob_file(data_path);
      const auto corpus = read_corpus_file(corpus_path);
      const auto extra = extra_words_path.empty() ? std::vector<std::string>{} : read_word_list(extra_words_path);
      const auto spec = EnsembleSpec::consecutive(members, seed, config);
      const auto pipelines = train_ensemble(data, corpus, spec, extra, threads);
      const std::filesystem::path dir(out_dir);
      std::filesystem::create_directories(dir);
      auto manifest = create_text((dir / "ensemble.txt").string());
      manifest << "# tweetner ensemble: one model directory per line\n";
      for (std::size_t i = 0; i < pipelines.size(); ++i) {
        save_pipeline(pipelines[i], dir / ensemble_member_dir(i));
        manifest << ensemble_member_dir(i) << '\n';
      }
      err << "trained " << pipelines.size() << " pipelines into " << out_dir << '\n';
    } else if (*etag) {
      const auto pipelines = load_ensemble(models_dir);
      const auto data = read_iob_file(in_path);
      write_iob_file(with_labels(data, ensemble_tag(pipelines, token_lists(data), threads)), out_path);
    } else if (*eval) {
      const auto gold = label_sequences(read_iob_file(gold_path));
      const auto pred = label_sequences(read_iob_file(pred_path));
      const auto report = chunk_prf(gold, pred);
      const auto tags = per_tag_report(gold, pred);
      const double acc = sequence_accuracy(gold, pred);
      if (as_json) out << report_json(report, acc, tags).dump(2) << '\n';
      else print_report(out, report, acc, per_tag ? &tags : nullptr);
    } else if (*grid) {
      const auto c1s = parse_list(c1_list);
      const auto c2s = parse_list(c2_list);
      const auto data = read_iob_file(data_path);
      const auto loaded = LoadedModels::from(paths, !no_handcrafted);
      const auto provider = pos.provider();
      auto sentences = token_lists(data);
      apply_pos_provider(sentences, provider);
      FeatureExtractor fx(loaded.models(), loaded.config);
      std::vector<FeatureSequence> dataset;
      for (std::size_t i = 0; i < data.size(); ++i) dataset.push_back({fx.extract(sentences[i]), data[i].labels});
      crf_cfg.threads = threads;
      const auto result = grid_search(dataset, c1s, c2s, folds, seed, crf_cfg);
      out << std::left << std::setw(12) << "c1" << std::setw(12) << "c2" << "seq_accuracy\n";
      for (const auto& cell : result.table) {
        out << std::left << std::setw(12) << cell.c1 << std::setw(12) << cell.c2 << std::fixed
            << std::setprecision(4) << cell.score << std::defaultfloat << '\n';
      }
      out << "best c1 " << result.best_c1 << " c2 " << result.best_c2 << '\n';
    } else if (*inspect) {
      const auto model = load_crf(model_path);
      for (auto order : {WeightOrder::Highest, WeightOrder::Lowest}) {
        out << (order == WeightOrder::Highest ? "Highest" : "Lowest") << " weights\n";
        out << std::left << std::setw(10) << "weight" << std::setw(20) << "label" << "feature\n";
        for (const auto& e : top_weights(model, top, order)) {
          std::ostringstream w;
          w << std::fixed << std::setprecision(4) << e.weight;
          out << std::left << std::setw(10) << w.str() << std::setw(20) << e.label << e.feature << '\n';
        }
        if (order == WeightOrder::Highest) out << '\n';
      }
    }
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace tweetner::cli
