#include "sawr/cli/commands.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "sawr/cli/manifest.hpp"
#include "sawr/data/batch.hpp"
#include "sawr/data/bpe.hpp"
#include "sawr/data/corpus.hpp"
#include "sawr/depparse/metrics.hpp"
#include "sawr/depparse/treebank.hpp"
#include "sawr/errors.hpp"
#include "sawr/eval/analysis.hpp"
#include "sawr/eval/bleu.hpp"
#include "sawr/eval/significance.hpp"
#include "sawr/hash.hpp"
#include "sawr/seq2seq/beam.hpp"
#include "sawr/seq2seq/trainer.hpp"
#include "sawr/syntax/sawr.hpp"

namespace sawr::cli {

namespace {

using data::Sentence;
using data::TokenId;
using seq2seq::SourceSentence;
using seq2seq::SyntaxMode;
using seq2seq::TranslationModel;
using Clock = std::chrono::steady_clock;

constexpr const char* kNoteMode = "note.mode";
constexpr const char* kNoteSrcBpe = "note.src_bpe";
constexpr const char* kNoteTgtBpe = "note.tgt_bpe";

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string bpe_text(const data::BpeModel& bpe) {
  std::ostringstream os;
  bpe.save(os);
  return os.str();
}

std::optional<data::BpeModel> note_bpe(const TranslationModel& model, const char* key) {
  auto it = model.notes().find(key);
  if (it == model.notes().end()) return std::nullopt;
  std::istringstream in(it->second);
  return data::BpeModel::load(in);
}

// Trees aligned with `sentences`, read from a CoNLL file or produced by the parser.
std::vector<depparse::DependencyTree> source_trees(const std::vector<Sentence>& sentences,
                                                   const std::string& trees_path, const std::string& parser_path,
                                                   const char* trees_field, RunManifest& manifest) {
  std::vector<depparse::DependencyTree> trees;
  if (!trees_path.empty()) {
    auto bank = depparse::read_treebank(trees_path);
    manifest.input(trees_path);
    if (bank.size() != sentences.size()) {
      throw DataError(std::string(trees_field) + ": " + std::to_string(bank.size()) + " trees for " +
                      std::to_string(sentences.size()) + " sentences");
    }
    for (std::size_t i = 0; i < bank.size(); ++i) {
      if (bank[i].tokens != sentences[i]) {
        throw DataError(std::string(trees_field) + ": tokens of tree " + std::to_string(i + 1) +
                        " differ from the source sentence");
      }
      trees.push_back(bank[i].tree);
    }
    return trees;
  }
  if (parser_path.empty()) throw ValidationError(trees_field, "required when no parser checkpoint is given");
  auto parser = depparse::BiaffineParser::load(parser_path);
  manifest.input(parser_path);
  for (const auto& s : sentences) {
    trees.push_back(s.empty() ? depparse::DependencyTree{} : parser.parse(s));
  }
  return trees;
}

// Per-sentence parser encodings from a cache bound to the parser checkpoint, or computed now.
std::vector<Eigen::MatrixXd> sawr_encodings(const std::vector<Sentence>& sentences, const std::string& cache_path,
                                            const std::string& parser_path, RunManifest& manifest) {
  if (!cache_path.empty()) {
    auto cache = syntax::read_sawr_cache(cache_path, file_hash(parser_path));
    manifest.input(cache_path);
    std::vector<Eigen::MatrixXd> out(sentences.size());
    for (std::size_t i = 0; i < sentences.size(); ++i) {
      if (sentences[i].empty()) continue;
      auto it = cache.records.find(i);
      if (it == cache.records.end() || it->second.rows() != static_cast<Index>(sentences[i].size())) {
        throw DataError(cache_path + ": no matching record for sentence " + std::to_string(i + 1));
      }
      out[i] = it->second;
    }
    return out;
  }
  return syntax::extract_sawr(depparse::BiaffineParser::load(parser_path), sentences);
}

struct PreparedCorpus {
  std::vector<Sentence> words;
  std::vector<SourceSentence> sources;  // empty words for empty lines
};

// Sources in the form the model's syntax mode consumes.
PreparedCorpus prepare(SyntaxMode mode, bool tuned, const std::vector<Sentence>& words,
                       const std::string& trees_path, const std::string& parser_path, const std::string& cache_path,
                       const char* trees_field, const std::optional<data::BpeModel>& src_bpe, RunManifest& manifest) {
  PreparedCorpus p;
  p.words = words;
  std::vector<depparse::DependencyTree> trees;
  std::vector<Eigen::MatrixXd> encodings;
  if (mode == SyntaxMode::tree_rnn || mode == SyntaxMode::tree_linearized) {
    trees = source_trees(words, trees_path, parser_path, trees_field, manifest);
  }
  if (mode == SyntaxMode::sawr && !tuned && !parser_path.empty()) {
    encodings = sawr_encodings(words, cache_path, parser_path, manifest);
  }
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].empty()) {
      p.sources.push_back({});
      continue;
    }
    std::optional<depparse::DependencyTree> tree;
    std::optional<Eigen::MatrixXd> encoding;
    if (!trees.empty()) tree = trees[i];
    if (!encodings.empty()) encoding = encodings[i];
    auto s = seq2seq::prepare_source(mode, words[i], tree, encoding);
    if (src_bpe) s.words = src_bpe->apply(s.words);
    p.sources.push_back(std::move(s));
  }
  return p;
}

Sentence to_words(const TranslationModel& model, const std::vector<TokenId>& ids) {
  Sentence units;
  for (auto id : ids) units.push_back(model.tgt_vocab().token(id));
  return note_bpe(model, kNoteTgtBpe) ? data::decode_bpe(units) : units;
}

std::vector<Sentence> translate_all(const TranslationModel& model, const std::vector<SourceSentence>& sources,
                                    std::size_t beam, std::size_t max_len) {
  std::vector<Sentence> out;
  out.reserve(sources.size());
  for (const auto& s : sources) {
    if (s.words.empty()) {
      out.emplace_back();
      continue;
    }
    auto hyp = beam == 1 ? seq2seq::greedy_decode(model, s, max_len) : seq2seq::beam_search(model, s, beam, max_len);
    out.push_back(to_words(model, hyp.output()));
  }
  return out;
}

std::string manifest_path(const std::string& command, const ExperimentConfig& c) {
  if (!c.manifest.empty()) return c.manifest;
  if (command == "train-nmt") return c.model + ".manifest.jsonl";
  if (!c.output.empty()) return c.output + ".manifest.jsonl";
  return c.hyp + ".manifest.jsonl";
}

void train_parser_command(const ExperimentConfig& c, RunManifest& manifest, std::ostream& out, std::ostream& err) {
  auto bank = depparse::read_treebank(c.treebank);
  manifest.input(c.treebank);
  if (c.parser_train_limit > 0 && bank.size() > static_cast<std::size_t>(c.parser_train_limit)) {
    bank.resize(static_cast<std::size_t>(c.parser_train_limit));
  }
  err << "train-parser: " << bank.size() << " sentences\n";
  auto parser = depparse::train_parser(bank, c.parser_config(), [&](const depparse::ParserEpoch& e) {
    err << "epoch " << e.epoch << " loss " << e.loss << '\n';
    manifest.epoch({{"epoch", e.epoch}, {"loss", e.loss}});
  });
  parser.save(c.output);
  manifest.artifact(c.output);
  auto report = [&](const char* name, const std::vector<depparse::ParsedSentence>& gold) {
    std::vector<depparse::DependencyTree> g;
    for (const auto& s : gold) g.push_back(s.tree);
    auto scores = depparse::evaluate_las(parser.parse_all(gold), g);
    out << name << " UAS " << std::fixed << std::setprecision(2) << 100 * scores.uas << " LAS " << 100 * scores.las
        << " (" << scores.tokens << " tokens)\n";
    manifest.epoch({{"epoch", c.parser_epochs}, {std::string(name) + "_uas", scores.uas},
                    {std::string(name) + "_las", scores.las}});
  };
  report("train", bank);
  if (!c.dev_treebank.empty()) {
    auto dev = depparse::read_treebank(c.dev_treebank);
    manifest.input(c.dev_treebank);
    report("dev", dev);
  }
}

void extract_sawr_command(const ExperimentConfig& c, RunManifest& manifest, std::ostream& out) {
  auto parser = depparse::BiaffineParser::load(c.parser);
  manifest.input(c.parser);
  auto sentences = data::read_sentences(c.input);
  manifest.input(c.input);
  auto encodings = syntax::extract_sawr(parser, sentences);
  syntax::SawrCache cache;
  cache.parser_hash = file_hash(c.parser);
  for (std::size_t i = 0; i < encodings.size(); ++i) {
    if (encodings[i].rows() > 0) cache.records.emplace(i, std::move(encodings[i]));
  }
  syntax::write_sawr_cache(c.output, cache);
  manifest.artifact(c.output);
  out << "extract-sawr: " << cache.records.size() << " records, dim " << parser.config().encoding_dim() << '\n';
}

void train_nmt_command(const ExperimentConfig& c, RunManifest& manifest, std::ostream& out, std::ostream& err) {
  const SyntaxMode mode = c.syntax_mode();
  auto pairs = data::read_parallel(c.train_src, c.train_tgt);
  manifest.input(c.train_src);
  manifest.input(c.train_tgt);
  std::vector<Sentence> src_words;
  std::vector<Sentence> tgt_words;
  for (auto& [s, t] : pairs) {
    src_words.push_back(std::move(s));
    tgt_words.push_back(std::move(t));
  }

  std::optional<data::BpeModel> src_bpe;
  std::optional<data::BpeModel> tgt_bpe;
  if (c.src_bpe_merges > 0) {
    src_bpe = data::learn_bpe(data::word_counts(src_words), static_cast<std::size_t>(c.src_bpe_merges));
  }
  if (c.tgt_bpe_merges > 0) {
    tgt_bpe = data::learn_bpe(data::word_counts(tgt_words), static_cast<std::size_t>(c.tgt_bpe_merges));
  }

  auto train = prepare(mode, c.tuned(), src_words, c.train_src_trees, c.parser, c.sawr_cache, "train_src_trees",
                       src_bpe, manifest);
  std::vector<Sentence> tgt_units;
  for (const auto& t : tgt_words) tgt_units.push_back(tgt_bpe ? tgt_bpe->apply(t) : t);

  std::vector<Sentence> src_corpus;
  for (const auto& s : train.sources) src_corpus.push_back(s.words);
  auto src_vocab = data::build_vocab(src_corpus, static_cast<std::size_t>(c.src_vocab_size));
  auto tgt_vocab = data::build_vocab(tgt_units, static_cast<std::size_t>(c.tgt_vocab_size));

  std::unique_ptr<depparse::BiaffineParser> parser;
  if (mode == SyntaxMode::sawr) {
    parser = std::make_unique<depparse::BiaffineParser>(depparse::BiaffineParser::load(c.parser));
    manifest.input(c.parser);
  }
  TranslationModel model(c.model_config(), src_vocab, tgt_vocab, parser.get());
  if (c.tuned()) seq2seq::set_parser_trainable(model, true);
  model.notes()[kNoteMode] = c.mode;
  if (src_bpe) model.notes()[kNoteSrcBpe] = bpe_text(*src_bpe);
  if (tgt_bpe) model.notes()[kNoteTgtBpe] = bpe_text(*tgt_bpe);

  // Length limits apply to the original words, before linearization or BPE.
  std::vector<data::Example> examples;
  for (std::size_t i = 0; i < src_words.size(); ++i) {
    const auto ns = src_words[i].size();
    const auto nt = tgt_words[i].size();
    if (ns == 0 || nt == 0 || ns > static_cast<std::size_t>(c.max_src_len) ||
        nt > static_cast<std::size_t>(c.max_tgt_len)) {
      continue;
    }
    examples.push_back({src_vocab.encode(train.sources[i].words), tgt_vocab.encode(tgt_units[i]), i});
  }
  if (examples.empty()) throw EmptyDataError("train-nmt: no sentence pair survives the length limits");
  err << "train-nmt: mode " << c.mode << ", " << examples.size() << " of " << src_words.size()
      << " pairs, vocab " << src_vocab.size() << "/" << tgt_vocab.size() << ", "
      << model.params().element_count() << " parameters\n";

  std::optional<PreparedCorpus> dev;
  std::vector<Sentence> dev_refs;
  if (!c.dev_src.empty()) {
    auto dev_pairs = data::read_parallel(c.dev_src, c.dev_tgt);
    manifest.input(c.dev_src);
    manifest.input(c.dev_tgt);
    std::vector<Sentence> dev_src;
    for (auto& [s, t] : dev_pairs) {
      dev_src.push_back(std::move(s));
      dev_refs.push_back(std::move(t));
    }
    dev = prepare(mode, c.tuned(), dev_src, c.dev_src_trees, c.parser, c.dev_sawr_cache, "dev_src_trees", src_bpe,
                  manifest);
  }

  seq2seq::Trainer trainer(c.train_config(), static_cast<std::uint64_t>(c.seed));
  double best = -1;
  if (c.epochs == 0) model.save(c.model);
  for (long epoch = 1; epoch <= c.epochs; ++epoch) {
    const auto start = Clock::now();
    auto batches = data::filter_and_batch(examples, data::kNoLimit, data::kNoLimit,
                                          static_cast<std::size_t>(c.batch_size),
                                          Rng::derive(static_cast<std::uint64_t>(c.seed), static_cast<std::uint64_t>(epoch)).next());
    double total = 0;
    for (auto& b : batches) {
      seq2seq::attach_sources(b, train.sources);
      total += seq2seq::train_step(model, b, trainer);
    }
    const double loss = total / static_cast<double>(batches.size());
    nlohmann::json record{{"epoch", epoch}, {"loss", loss}};
    bool improved = !dev;
    if (dev) {
      const double dev_bleu =
          eval::bleu(translate_all(model, dev->sources, 1, static_cast<std::size_t>(c.decode_max_len)), dev_refs,
                     c.case_sensitive)
              .bleu;
      record["dev_bleu"] = dev_bleu;
      improved = dev_bleu > best;
      if (improved) best = dev_bleu;
    }
    if (improved) model.save(c.model);
    record["seconds"] = seconds_since(start);
    record["saved"] = improved;
    manifest.epoch(record);
    err << "epoch " << epoch << " loss " << std::fixed << std::setprecision(4) << loss;
    if (dev) err << " dev BLEU " << std::setprecision(2) << record["dev_bleu"].get<double>();
    err << (improved ? " *" : "") << '\n';
    err.unsetf(std::ios::floatfield);
  }
  manifest.artifact(c.model);
  out << "train-nmt: wrote " << c.model << '\n';
  if (dev) {
    // Checkpoints are chosen with greedy decoding; the final report uses the beam.
    const auto chosen = TranslationModel::load(c.model);
    const auto report = eval::bleu(translate_all(chosen, dev->sources, static_cast<std::size_t>(c.beam),
                                                 static_cast<std::size_t>(c.decode_max_len)),
                                   dev_refs, c.case_sensitive);
    manifest.epoch({{"final", true}, {"dev_bleu_beam", report.bleu}, {"beam", c.beam}});
    out << "dev (beam " << c.beam << ") " << eval::to_string(report) << '\n';
  }
}

PreparedCorpus prepare_for_model(const TranslationModel& model, const ExperimentConfig& c,
                                 const std::vector<Sentence>& words, RunManifest& manifest) {
  return prepare(model.mode(), true, words, c.input_trees, c.parser, "", "input_trees",
                 note_bpe(model, kNoteSrcBpe), manifest);
}

void write_lines(const std::string& path, const std::vector<Sentence>& lines) { data::write_sentences(path, lines); }

void translate_command(const ExperimentConfig& c, RunManifest& manifest, std::ostream& out) {
  auto model = TranslationModel::load(c.model);
  manifest.input(c.model);
  auto words = data::read_sentences(c.input);
  manifest.input(c.input);
  auto prepared = prepare_for_model(model, c, words, manifest);
  auto hyps = translate_all(model, prepared.sources, static_cast<std::size_t>(c.beam),
                            static_cast<std::size_t>(c.decode_max_len));
  write_lines(c.output, hyps);
  manifest.artifact(c.output);
  out << "translate: " << hyps.size() << " sentences, beam " << c.beam << '\n';
}

void ensemble_translate_command(const ExperimentConfig& c, RunManifest& manifest, std::ostream& out) {
  std::vector<TranslationModel> models;
  std::stringstream list(c.models);
  std::string path;
  while (std::getline(list, path, ',')) {
    if (path.empty()) continue;
    models.push_back(TranslationModel::load(path));
    manifest.input(path);
  }
  if (models.empty()) throw ValidationError("models", "no checkpoint listed");
  auto words = data::read_sentences(c.input);
  manifest.input(c.input);
  std::vector<PreparedCorpus> prepared;
  std::vector<const TranslationModel*> pointers;
  for (const auto& m : models) {
    prepared.push_back(prepare_for_model(m, c, words, manifest));
    pointers.push_back(&m);
  }
  std::vector<Sentence> hyps;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (words[i].empty()) {
      hyps.emplace_back();
      continue;
    }
    std::vector<SourceSentence> per_model;
    for (const auto& p : prepared) per_model.push_back(p.sources[i]);
    auto hyp = eval::ensemble_decode(pointers, per_model, static_cast<std::size_t>(c.beam),
                                     static_cast<std::size_t>(c.decode_max_len));
    hyps.push_back(to_words(models.front(), hyp.output()));
  }
  write_lines(c.output, hyps);
  manifest.artifact(c.output);
  out << "ensemble-translate: " << models.size() << " models, " << hyps.size() << " sentences\n";
}

void evaluate_command(const ExperimentConfig& c, RunManifest& manifest, std::ostream& out) {
  auto hyps = data::read_sentences(c.hyp);
  auto refs = data::read_sentences(c.ref);
  manifest.input(c.hyp);
  manifest.input(c.ref);
  const auto line = eval::to_string(eval::bleu(hyps, refs, c.case_sensitive));
  out << line << '\n';
  if (!c.output.empty()) {
    std::ofstream(c.output) << line << '\n';
    manifest.artifact(c.output);
  }
}

void significance_command(const ExperimentConfig& c, RunManifest& manifest, std::ostream& out) {
  auto a = data::read_sentences(c.hyp);
  auto b = data::read_sentences(c.hyp_b);
  auto refs = data::read_sentences(c.ref);
  for (const auto* p : {&c.hyp, &c.hyp_b, &c.ref}) manifest.input(*p);
  auto r = eval::bootstrap_significance(a, b, refs, static_cast<int>(c.samples), static_cast<std::uint64_t>(c.seed),
                                        c.case_sensitive);
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << "BLEU A = " << r.bleu_a << ", BLEU B = " << r.bleu_b
     << std::setprecision(4) << ", p = " << r.p_value << " (" << r.samples << " resamples; A wins " << r.wins_a
     << ", B wins " << r.wins_b << ", ties " << r.ties << ")";
  out << os.str() << '\n';
  if (!c.output.empty()) {
    std::ofstream(c.output) << os.str() << '\n';
    manifest.artifact(c.output);
  }
}

void align_dump_command(const ExperimentConfig& c, RunManifest& manifest, std::ostream& out, std::ostream& err) {
  auto model = TranslationModel::load(c.model);
  manifest.input(c.model);
  auto words = data::read_sentences(c.input);
  manifest.input(c.input);
  auto prepared = prepare_for_model(model, c, words, manifest);
  auto records = eval::dump_alignments(model, prepared.sources, static_cast<std::size_t>(c.decode_max_len), err);
  std::ofstream file(c.output);
  if (!file) throw PathError("cannot write " + c.output);
  for (const auto& r : records) file << eval::to_json_line(r) << '\n';
  file.close();
  manifest.artifact(c.output);
  out << "align-dump: " << records.size() << " records\n";
}

void length_report_command(const ExperimentConfig& c, RunManifest& manifest, std::ostream& out) {
  auto hyps = data::read_sentences(c.hyp);
  auto refs = data::read_sentences(c.ref);
  auto src = data::read_sentences(c.input);
  for (const auto* p : {&c.hyp, &c.ref, &c.input}) manifest.input(*p);
  auto bins = eval::bleu_by_length(hyps, refs, src, c.edges(), c.case_sensitive);
  std::ostringstream os;
  os << "lo\thi\tsentences\tbleu\n";
  for (const auto& b : bins) {
    os << b.lo << '\t' << (b.hi ? std::to_string(*b.hi) : "inf") << '\t' << b.sentences << '\t';
    if (b.report) {
      os << std::fixed << std::setprecision(2) << b.report->bleu;
    } else {
      os << '-';
    }
    os << '\n';
  }
  std::ofstream file(c.output);
  if (!file) throw PathError("cannot write " + c.output);
  file << os.str();
  file.close();
  manifest.artifact(c.output);
  out << os.str();
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names{"train-parser", "extract-sawr",  "train-nmt",
                                              "translate",    "ensemble-translate", "evaluate",
                                              "significance", "align-dump",    "length-report"};
  return names;
}

int run_command(const std::string& command, const ExperimentConfig& config, std::ostream& out, std::ostream& err) {
  std::unique_ptr<RunManifest> manifest;
  try {
    require_for_command(command, config);
    if (command == "show-config") {
      out << render(config);
      return kOk;
    }
    manifest = std::make_unique<RunManifest>(manifest_path(command, config));
    manifest->run(command, to_map(config));
    if (command == "train-parser") {
      train_parser_command(config, *manifest, out, err);
    } else if (command == "extract-sawr") {
      extract_sawr_command(config, *manifest, out);
    } else if (command == "train-nmt") {
      train_nmt_command(config, *manifest, out, err);
    } else if (command == "translate") {
      translate_command(config, *manifest, out);
    } else if (command == "ensemble-translate") {
      ensemble_translate_command(config, *manifest, out);
    } else if (command == "evaluate") {
      evaluate_command(config, *manifest, out);
    } else if (command == "significance") {
      significance_command(config, *manifest, out);
    } else if (command == "align-dump") {
      align_dump_command(config, *manifest, out, err);
    } else if (command == "length-report") {
      length_report_command(config, *manifest, out);
    }
    manifest->end(kOk);
    return kOk;
  } catch (const ValidationError& e) {
    err << "error: invalid configuration: " << e.what() << '\n';
    if (manifest) manifest->end(kValidation, e.what());
    return kValidation;
  } catch (const DataError& e) {
    err << "error: data: " << e.what() << '\n';
    if (manifest) manifest->end(kData, e.what());
    return kData;
  } catch (const ParseError& e) {
    err << "error: data: " << e.what() << '\n';
    if (manifest) manifest->end(kData, e.what());
    return kData;
  } catch (const PathError& e) {
    err << "error: path: " << e.what() << '\n';
    if (manifest) manifest->end(kData, e.what());
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    if (manifest) manifest->end(kRuntime, e.what());
    return kRuntime;
  }
}

}  // namespace sawr::cli
