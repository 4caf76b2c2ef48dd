#include "glassasr/evaluate.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <stdexcept>

#include "glassasr/error.hpp"

namespace glassasr {

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  for (unsigned char c : text) {
    if (c < 0x80 && std::ispunct(c) && c != '\'') continue;
    out.push_back(c < 0x80 ? char(std::tolower(c)) : char(c));
  }
  return out;
}

std::string_view edit_op_name(EditOp op) {
  switch (op) {
    case EditOp::match: return "match";
    case EditOp::substitution: return "substitution";
    case EditOp::attribution: return "attribution";
    case EditOp::deletion: return "deletion";
    case EditOp::insertion: return "insertion";
  }
  return "?";
}

Alignment align_multispeaker(std::span<const WordRecord> ref, std::span<const EmittedToken> hyp,
                             const AlignmentOptions& options) {
  if (options.attribution_cost < 0.0) throw std::invalid_argument("attribution_cost must be non-negative");
  auto form = [&](const std::string& s) { return options.normalize ? normalize_text(s) : s; };
  std::vector<std::string> r, h;
  for (const auto& w : ref) r.push_back(form(w.text));
  for (const auto& t : hyp) h.push_back(form(t.token));

  const std::size_t n = r.size(), m = h.size();
  auto diag_op = [&](std::size_t i, std::size_t j) {
    if (r[i] != h[j]) return EditOp::substitution;
    return ref[i].speaker == hyp[j].speaker ? EditOp::match : EditOp::attribution;
  };
  auto op_cost = [&](EditOp op) {
    switch (op) {
      case EditOp::match: return 0.0;
      case EditOp::attribution: return options.attribution_cost;
      default: return 1.0;
    }
  };

  std::vector<double> d((n + 1) * (m + 1));
  auto at = [&](std::size_t i, std::size_t j) -> double& { return d[i * (m + 1) + j]; };
  for (std::size_t i = 0; i <= n; ++i) at(i, 0) = double(i);
  for (std::size_t j = 0; j <= m; ++j) at(0, j) = double(j);
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      at(i, j) = std::min({at(i - 1, j - 1) + op_cost(diag_op(i - 1, j - 1)), at(i - 1, j) + 1.0, at(i, j - 1) + 1.0});
    }
  }

  Alignment a;
  a.cost = at(n, m);
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const EditOp op = diag_op(i - 1, j - 1);
      if (at(i, j) == at(i - 1, j - 1) + op_cost(op)) {
        a.pairs.push_back({op, i - 1, j - 1});
        --i, --j;
        continue;
      }
    }
    if (i > 0 && at(i, j) == at(i - 1, j) + 1.0) {
      a.pairs.push_back({EditOp::deletion, i - 1, std::nullopt});
      --i;
    } else {
      a.pairs.push_back({EditOp::insertion, std::nullopt, j - 1});
      --j;
    }
  }
  std::reverse(a.pairs.begin(), a.pairs.end());
  return a;
}

double SpeakerCounts::wer() const {
  if (ref_words == 0) throw DataError("no reference words for speaker; WER undefined");
  return 100.0 * double(errors()) / double(ref_words);
}

SpeakerCounts& SpeakerCounts::operator+=(const SpeakerCounts& o) {
  ref_words += o.ref_words;
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  attribution_errors += o.attribution_errors;
  return *this;
}

LatencyStats compute_latency(const Alignment& alignment, std::span<const WordRecord> ref,
                             std::span<const EmittedToken> hyp) {
  LatencyStats s;
  for (const auto& p : alignment.pairs) {
    if (p.op != EditOp::match) continue;
    s.sum += hyp[*p.hyp].emission_time - ref[*p.ref].end;
    ++s.count;
  }
  return s;
}

RecordingScore score_recording(std::string recording, std::span<const WordRecord> ref,
                               std::span<const EmittedToken> hyp, const Alignment& alignment) {
  RecordingScore score;
  score.recording = std::move(recording);
  auto counts = [&](Speaker s) -> SpeakerCounts& { return s == Speaker::self ? score.self : score.other; };
  for (const auto& w : ref) ++counts(w.speaker).ref_words;
  for (const auto& p : alignment.pairs) {
    switch (p.op) {
      case EditOp::match: break;
      case EditOp::substitution: ++counts(ref[*p.ref].speaker).substitutions; break;
      case EditOp::attribution: ++counts(ref[*p.ref].speaker).attribution_errors; break;
      case EditOp::deletion: ++counts(ref[*p.ref].speaker).deletions; break;
      case EditOp::insertion: ++counts(hyp[*p.hyp].speaker).insertions; break;
    }
  }
  const LatencyStats lat = compute_latency(alignment, ref, hyp);
  score.latency_sum = lat.sum;
  score.latency_words = lat.count;
  return score;
}

EvalReport compute_wer_report(std::span<const RecordingScore> recordings) {
  EvalReport report;
  LatencyStats lat;
  for (const auto& r : recordings) {
    report.self += r.self;
    report.other += r.other;
    lat.sum += r.latency_sum;
    lat.count += r.latency_words;
    report.recordings.push_back(r);
  }
  if (report.self.ref_words == 0) throw DataError("no SELF reference words; WER undefined");
  if (report.other.ref_words == 0) throw DataError("no OTHER reference words; WER undefined");
  report.self_wer = report.self.wer();
  report.other_wer = report.other.wer();
  report.overall_wer = overall_wer(report.self_wer, report.other_wer);
  report.mean_latency = lat.mean();
  report.latency_word_count = lat.count;
  return report;
}

EvalReport evaluate_corpus(const std::map<std::string, std::vector<WordRecord>>& refs,
                           const std::map<std::string, std::vector<EmittedToken>>& hyps,
                           const AlignmentOptions& options) {
  for (const auto& [id, tokens] : hyps) {
    if (!refs.contains(id)) throw DataError("hypothesis names unknown recording '" + id + "'");
  }
  std::vector<RecordingScore> scores;
  static const std::vector<EmittedToken> kNone;
  for (const auto& [id, words] : refs) {
    auto it = hyps.find(id);
    const auto& hyp = it == hyps.end() ? kNone : it->second;
    const Alignment a = align_multispeaker(words, hyp, options);
    scores.push_back(score_recording(id, words, hyp, a));
  }
  return compute_wer_report(scores);
}

}  // namespace glassasr
