#include "sawr/eval/analysis.hpp"

#include "json.hpp"

#include <algorithm>
#include <ostream>

#include "sawr/errors.hpp"

namespace sawr::eval {

std::vector<LengthBin> bleu_by_length(const std::vector<Sentence>& hyps, const std::vector<Sentence>& refs,
                                      const std::vector<Sentence>& sources, const std::vector<std::size_t>& edges,
                                      bool case_sensitive) {
  if (hyps.size() != refs.size() || sources.size() != refs.size()) {
    throw InvalidArgument("bleu_by_length: hypotheses, references and sources differ in length");
  }
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (edges[i] <= edges[i - 1]) throw InvalidArgument("bleu_by_length: bin edges must be strictly ascending");
  }
  std::vector<LengthBin> bins(edges.size() + 1);
  for (std::size_t k = 0; k < bins.size(); ++k) {
    bins[k].lo = k == 0 ? 0 : edges[k - 1];
    if (k < edges.size()) bins[k].hi = edges[k];
  }
  std::vector<BleuStats> stats(bins.size());
  for (std::size_t i = 0; i < sources.size(); ++i) {
    const auto k = static_cast<std::size_t>(std::upper_bound(edges.begin(), edges.end(), sources[i].size()) -
                                            edges.begin());
    stats[k] += sentence_stats(hyps[i], refs[i], case_sensitive);
    ++bins[k].sentences;
  }
  for (std::size_t k = 0; k < bins.size(); ++k) {
    if (bins[k].sentences) bins[k].report = bleu_from_stats(stats[k]);
  }
  return bins;
}

std::vector<AlignmentRecord> dump_alignments(const seq2seq::TranslationModel& model,
                                             const std::vector<seq2seq::SourceSentence>& sources, std::size_t max_len,
                                             std::ostream& log) {
  std::vector<AlignmentRecord> out;
  for (std::size_t i = 0; i < sources.size(); ++i) {
    if (sources[i].words.empty()) {
      log << "warning: sentence " << i << " is empty; no alignment written\n";
      continue;
    }
    auto hyp = seq2seq::greedy_decode(model, sources[i], max_len);
    AlignmentRecord r;
    r.id = i;
    r.src = sources[i].words;
    for (auto t : hyp.tokens) r.tgt.push_back(model.tgt_vocab().token(t));
    r.attn = hyp.attention;
    out.push_back(std::move(r));
  }
  return out;
}

std::string to_json_line(const AlignmentRecord& record) {
  nlohmann::json j;
  j["id"] = record.id;
  j["src"] = record.src;
  j["tgt"] = record.tgt;
  auto rows = nlohmann::json::array();
  for (const auto& row : record.attn) rows.push_back(std::vector<double>(row.data(), row.data() + row.size()));
  j["attn"] = std::move(rows);
  return j.dump();
}

seq2seq::Hypothesis ensemble_decode(const std::vector<const seq2seq::TranslationModel*>& models,
                                    const std::vector<seq2seq::SourceSentence>& sources, std::size_t beam_size,
                                    std::size_t max_len) {
  if (models.empty()) throw InvalidArgument("ensemble_decode: no models");
  if (sources.size() != models.size()) throw InvalidArgument("ensemble_decode: need one prepared source per model");
  const auto& vocab = models.front()->tgt_vocab();
  for (const auto* m : models) {
    if (m->tgt_vocab().tokens() != vocab.tokens()) {
      throw InvalidArgument("ensemble_decode: models use different target vocabularies");
    }
  }
  std::vector<std::unique_ptr<seq2seq::DecodeSession>> owned;
  std::vector<seq2seq::DecodeSession*> sessions;
  for (std::size_t k = 0; k < models.size(); ++k) {
    owned.push_back(seq2seq::open_session(*models[k], models[k]->source_batch({sources[k]})));
    sessions.push_back(owned.back().get());
  }
  return seq2seq::beam_search(sessions, beam_size, max_len);
}

}  // namespace sawr::eval
