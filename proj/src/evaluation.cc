#include "relclass/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <random>
#include <sstream>

#include "relclass/config_map.h"
#include "relclass/io.h"

namespace relclass {
namespace {

std::size_t family_index(const RelationLabel& l) { return static_cast<std::size_t>(l.family); }

}  // namespace

EvalReport macro_f1(std::span<const RelationLabel> gold, std::span<const RelationLabel> predicted) {
  if (gold.size() != predicted.size()) {
    throw AlignmentError("gold has " + std::to_string(gold.size()) + " labels, predictions " +
                         std::to_string(predicted.size()));
  }
  EvalReport r;
  r.sentences = gold.size();
  std::size_t exact = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    const RelationLabel& g = gold[i];
    const RelationLabel& p = predicted[i];
    ++r.confusion[g.id()][p.id()];
    if (g == p) ++exact;
    if (!g.is_other()) ++r.families[family_index(g)].gold;
    if (!p.is_other()) ++r.families[family_index(p)].predicted;
    if (!g.is_other() && g == p) ++r.families[family_index(g)].correct;
  }
  double sum = 0.0;
  std::size_t present = 0;
  for (FamilyScore& f : r.families) {
    f.precision = f.predicted ? 100.0 * f.correct / f.predicted : 0.0;
    f.recall = f.gold ? 100.0 * f.correct / f.gold : 0.0;
    const double pr = f.precision + f.recall;
    f.f1 = pr > 0.0 ? 2.0 * f.precision * f.recall / pr : 0.0;
    if (f.present()) {
      sum += f.f1;
      ++present;
    }
  }
  r.macro_f1 = present ? sum / present : 100.0;
  r.accuracy = gold.empty() ? 100.0 : 100.0 * exact / gold.size();
  return r;
}

EvalReport macro_f1(std::span<const LabeledSentence> gold,
                    std::span<const PredictionRecord> predictions) {
  if (gold.size() != predictions.size()) {
    throw AlignmentError("gold has " + std::to_string(gold.size()) + " sentences, predictions " +
                         std::to_string(predictions.size()));
  }
  std::map<std::int64_t, RelationLabel> by_id;
  for (const auto& p : predictions) {
    if (!by_id.emplace(p.id, p.label).second) {
      throw AlignmentError("duplicate prediction for id " + std::to_string(p.id));
    }
  }
  std::vector<RelationLabel> g, p;
  g.reserve(gold.size());
  p.reserve(gold.size());
  for (const auto& s : gold) {
    auto it = by_id.find(s.id);
    if (it == by_id.end()) throw AlignmentError("no prediction for id " + std::to_string(s.id));
    g.push_back(s.label);
    p.push_back(it->second);
  }
  return macro_f1(g, p);
}

double two_tailed_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

ZTestResult significance_z_test(std::span<const PredictionRecord> a,
                                std::span<const PredictionRecord> b,
                                std::span<const LabeledSentence> gold) {
  if (gold.empty()) throw std::invalid_argument("z-test needs at least one sentence");
  if (a.size() != gold.size() || b.size() != gold.size()) {
    throw AlignmentError("z-test: prediction sets do not cover the gold sentences");
  }
  std::map<std::int64_t, RelationLabel> ga;
  for (const auto& s : gold) ga.emplace(s.id, s.label);
  auto correct = [&](std::span<const PredictionRecord> preds) {
    std::size_t c = 0;
    std::map<std::int64_t, bool> seen;
    for (const auto& p : preds) {
      auto it = ga.find(p.id);
      if (it == ga.end() || !seen.emplace(p.id, true).second) {
        throw AlignmentError("z-test: unexpected or duplicate id " + std::to_string(p.id));
      }
      if (it->second == p.label) ++c;
    }
    return c;
  };
  const double n = static_cast<double>(gold.size());
  ZTestResult r;
  r.n = gold.size();
  const std::size_t ca = correct(a);
  const std::size_t cb = correct(b);
  r.accuracy_a = ca / n;
  r.accuracy_b = cb / n;
  const double pooled = (ca + cb) / (2.0 * n);
  const double se = std::sqrt(pooled * (1.0 - pooled) * (2.0 / n));
  if (se == 0.0) {
    r.z = 0.0;
    r.p_value = 1.0;
    return r;
  }
  r.z = (r.accuracy_a - r.accuracy_b) / se;
  r.p_value = two_tailed_p(r.z);
  return r;
}

std::vector<PredictionRecord> ensemble_vote(
    std::span<const std::vector<PredictionRecord>> sets, std::uint64_t seed) {
  if (sets.empty()) throw std::invalid_argument("ensemble needs at least one prediction set");
  const std::size_t n = sets[0].size();
  for (const auto& s : sets) {
    if (s.size() != n) throw AlignmentError("prediction sets have different lengths");
  }
  std::mt19937_64 rng(seed);
  std::vector<PredictionRecord> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::array<std::size_t, kNumLabels> votes{};
    const std::int64_t id = sets[0][i].id;
    for (const auto& s : sets) {
      if (s[i].id != id) {
        throw AlignmentError("prediction sets disagree on the id at line " +
                             std::to_string(i + 1));
      }
      ++votes[s[i].label.id()];
    }
    const std::size_t best = *std::max_element(votes.begin(), votes.end());
    std::vector<std::size_t> tied;
    for (std::size_t l = 0; l < kNumLabels; ++l) {
      if (votes[l] == best) tied.push_back(l);
    }
    std::size_t pick = tied[0];
    if (tied.size() > 1) {
      std::uniform_int_distribution<std::size_t> choose(0, tied.size() - 1);
      pick = tied[choose(rng)];
    }
    out[i].id = id;
    out[i].label = RelationLabel::from_id(pick);
  }
  return out;
}

std::string format_predictions(std::span<const PredictionRecord> predictions) {
  std::string out;
  for (const auto& p : predictions) {
    out += std::to_string(p.id);
    out += '\t';
    out += p.label.to_string();
    out += '\n';
  }
  return out;
}

std::vector<PredictionRecord> parse_predictions(std::string_view text) {
  std::vector<PredictionRecord> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;
    const std::size_t sep = line.find_first_of("\t ");
    const std::string at = "prediction line " + std::to_string(line_no);
    if (sep == std::string_view::npos) throw ParseError(at + ": expected 'id<TAB>label'");
    PredictionRecord p;
    try {
      p.id = parse_int(line.substr(0, sep));
    } catch (const std::invalid_argument&) {
      throw ParseError(at + ": bad id");
    }
    std::string_view label = line.substr(sep + 1);
    while (!label.empty() && (label.front() == ' ' || label.front() == '\t')) label.remove_prefix(1);
    while (!label.empty() && (label.back() == ' ' || label.back() == '\t')) label.remove_suffix(1);
    auto parsed = RelationLabel::parse(label);
    if (!parsed) throw ParseError(at + ": unknown relation '" + std::string(label) + "'");
    p.label = *parsed;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<PredictionRecord> read_prediction_file(const std::string& path) {
  try {
    return parse_predictions(read_text_file(path));
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

void write_prediction_file(const std::string& path,
                           std::span<const PredictionRecord> predictions) {
  write_text_file_atomic(path, format_predictions(predictions));
}

void print_report(std::ostream& os, const EvalReport& r) {
  char line[160];
  std::snprintf(line, sizeof(line), "%-20s %6s %6s %7s %8s %8s %8s\n", "relation", "gold", "pred",
                "correct", "P", "R", "F1");
  os << line;
  for (std::size_t f = 0; f < kNumFamilies; ++f) {
    const FamilyScore& s = r.families[f];
    std::snprintf(line, sizeof(line), "%-20s %6zu %6zu %7zu %8.2f %8.2f %8.2f%s\n",
                  std::string(family_name(static_cast<Family>(f))).c_str(), s.gold, s.predicted,
                  s.correct, s.precision, s.recall, s.f1, s.present() ? "" : "  (absent)");
    os << line;
  }
  os << "\n";
  ConfigMap kv;
  kv["sentences"] = std::to_string(r.sentences);
  kv["macro_f1"] = format_double(r.macro_f1);
  kv["accuracy"] = format_double(r.accuracy);
  for (std::size_t f = 0; f < kNumFamilies; ++f) {
    kv["f1." + std::string(family_name(static_cast<Family>(f)))] = format_double(r.families[f].f1);
  }
  os << format_key_values(kv);
}

}  // namespace relclass
