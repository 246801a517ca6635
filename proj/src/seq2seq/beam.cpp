#include "sawr/seq2seq/beam.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "sawr/tensor/ops.hpp"

namespace sawr::seq2seq {

std::vector<TokenId> Hypothesis::output() const {
  std::vector<TokenId> out = tokens;
  if (finished && !out.empty() && out.back() == data::Vocabulary::kEos) out.pop_back();
  return out;
}

namespace {

Tensord select_rows(const Tensord& t, const std::vector<Index>& rows) {
  MatrixX<double> m(static_cast<Index>(rows.size()), t.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Index>(i)) = t.value().row(rows[i]);
  return Tensord::from_matrix(std::move(m));
}

class ModelSession : public DecodeSession {
 public:
  ModelSession(const TranslationModel& model, const data::Batch& source) : model_(model) {
    if (source.size() != 1) throw InvalidArgument("decode session needs exactly one source sentence");
    NoGradScope<double> no_grad;
    encoded_ = model_.encode(source);
    state_ = model_.initial_state(encoded_);
  }

  Index vocab_size() const override { return static_cast<Index>(model_.tgt_vocab().size()); }

  StepResult advance(const std::vector<Index>& parents, const std::vector<TokenId>& prev) override {
    NoGradScope<double> no_grad;
    const auto rows = static_cast<Index>(parents.size());
    DecoderState state{select_rows(state_.s, parents), select_rows(state_.c, parents)};
    auto it = expanded_.find(rows);
    if (it == expanded_.end()) it = expanded_.emplace(rows, encoded_.repeat(rows)).first;
    auto step = model_.decode_step(prev, state, it->second);
    state_ = step.state;
    return {softmax(step.logits, 1).value(), step.attention.value()};
  }

 private:
  const TranslationModel& model_;
  EncoderOutput encoded_;
  DecoderState state_;
  std::map<Index, EncoderOutput> expanded_;
};

}  // namespace

std::unique_ptr<DecodeSession> open_session(const TranslationModel& model, const data::Batch& source) {
  return std::make_unique<ModelSession>(model, source);
}

Hypothesis greedy_decode(DecodeSession& session, std::size_t max_len) {
  if (max_len == 0) throw InvalidArgument("greedy_decode: max_len must be positive");
  Hypothesis hyp;
  TokenId prev = data::Vocabulary::kBos;
  for (std::size_t step = 0; step < max_len; ++step) {
    auto r = session.advance({0}, {prev});
    Index best = 0;
    r.probs.row(0).maxCoeff(&best);
    prev = static_cast<TokenId>(best);
    hyp.tokens.push_back(prev);
    hyp.log_prob += std::log(r.probs(0, best));
    hyp.attention.push_back(r.attention.row(0));
    if (prev == data::Vocabulary::kEos) {
      hyp.finished = true;
      break;
    }
  }
  return hyp;
}

Hypothesis beam_search(const std::vector<DecodeSession*>& sessions, std::size_t beam_size, std::size_t max_len) {
  if (sessions.empty()) throw InvalidArgument("beam_search: no models");
  if (beam_size == 0 || max_len == 0) throw InvalidArgument("beam_search: beam_size and max_len must be positive");
  const Index V = sessions.front()->vocab_size();
  for (auto* s : sessions) {
    if (s->vocab_size() != V) throw InvalidArgument("beam_search: models disagree on target vocabulary size");
  }

  std::vector<Hypothesis> live{Hypothesis{}};
  std::vector<Index> parents{0};
  std::vector<TokenId> prev{data::Vocabulary::kBos};
  std::vector<Hypothesis> finished;

  for (std::size_t step = 0; step < max_len && !live.empty(); ++step) {
    Eigen::MatrixXd probs;
    Eigen::MatrixXd attention;
    for (std::size_t k = 0; k < sessions.size(); ++k) {
      auto r = sessions[k]->advance(parents, prev);
      if (k == 0) {
        probs = r.probs;
        attention = r.attention;
      } else {
        probs += r.probs;
      }
    }
    if (sessions.size() > 1) probs /= static_cast<double>(sessions.size());

    struct Candidate {
      double score;
      Index parent;
      Index token;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(static_cast<std::size_t>(probs.size()));
    for (std::size_t h = 0; h < live.size(); ++h) {
      for (Index v = 0; v < V; ++v) {
        candidates.push_back({live[h].log_prob + std::log(probs(static_cast<Index>(h), v)), static_cast<Index>(h), v});
      }
    }
    const std::size_t width = std::min(beam_size - finished.size(), candidates.size());
    std::partial_sort(candidates.begin(), candidates.begin() + static_cast<std::ptrdiff_t>(width), candidates.end(),
                      [](const Candidate& a, const Candidate& b) {
                        if (a.score != b.score) return a.score > b.score;
                        if (a.parent != b.parent) return a.parent < b.parent;
                        return a.token < b.token;
                      });

    std::vector<Hypothesis> next;
    parents.clear();
    prev.clear();
    for (std::size_t i = 0; i < width; ++i) {
      const auto& c = candidates[i];
      Hypothesis h = live[static_cast<std::size_t>(c.parent)];
      h.tokens.push_back(static_cast<TokenId>(c.token));
      h.log_prob = c.score;
      h.attention.push_back(attention.row(c.parent));
      if (c.token == data::Vocabulary::kEos) {
        h.finished = true;
        finished.push_back(std::move(h));
      } else {
        parents.push_back(c.parent);
        prev.push_back(static_cast<TokenId>(c.token));
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
    if (finished.size() >= beam_size) break;
  }

  // Earliest entry wins among equal scores.
  auto by_score = [](const Hypothesis& a, const Hypothesis& b) { return a.log_prob < b.log_prob; };
  if (!finished.empty()) return *std::max_element(finished.begin(), finished.end(), by_score);
  return *std::max_element(live.begin(), live.end(), by_score);
}

Hypothesis beam_search(const TranslationModel& model, const SourceSentence& source, std::size_t beam_size,
                       std::size_t max_len) {
  auto session = open_session(model, model.source_batch({source}));
  return beam_search({session.get()}, beam_size, max_len);
}

Hypothesis greedy_decode(const TranslationModel& model, const SourceSentence& source, std::size_t max_len) {
  auto session = open_session(model, model.source_batch({source}));
  return greedy_decode(*session, max_len);
}

}  // namespace sawr::seq2seq
