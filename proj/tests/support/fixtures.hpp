#pragma once

#include <string>
#include <vector>

#include "snaptriage/evaluation.hpp"
#include "test_support.hpp"

namespace testsupport {

struct LabeledPrediction {
  std::vector<const char*> predicted;
  std::vector<const char*> truth;
};

inline std::vector<snaptriage::CaseMatch> matches_for(const std::vector<LabeledPrediction>& rows) {
  std::vector<snaptriage::CaseMatch> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    snaptriage::CategorySet p, g;
    for (const char* n : rows[i].predicted) p.insert(snaptriage::parse_category(n));
    for (const char* n : rows[i].truth) g.insert(snaptriage::parse_category(n));
    snaptriage::CaseMatch m = snaptriage::match_case(p, g);
    m.case_id = "t" + std::to_string(i + 1);
    out.push_back(std::move(m));
  }
  return out;
}

/// 17 cases, 19 ground-truth labels: 13 hits, 15 labels recovered, 26
/// predictions.
inline std::vector<LabeledPrediction> seventeen_case_fixture() {
  std::vector<LabeledPrediction> rows = {
      {{"COLOR_CHANGE", "PADDING_CHANGE", "CONTENT_CHANGE"}, {"COLOR_CHANGE", "PADDING_CHANGE"}},
      {{"COLOR_CHANGE", "TEXT_CHANGE"}, {"COLOR_CHANGE", "TEXT_CHANGE"}},
  };
  const std::vector<const char*> singles = {"COLOR_CHANGE",   "COLOR_CHANGE",  "COLOR_CHANGE",  "PADDING_CHANGE",
                                            "CONTENT_CHANGE", "CONTENT_CHANGE", "LAYOUT_CHANGE", "LAYOUT_CHANGE",
                                            "LAYOUT_CHANGE",  "ANIMATION_PHASE", "ANIMATION_PHASE"};
  for (std::size_t i = 0; i < singles.size(); ++i) {
    if (i < 6) rows.push_back({{singles[i], "UNKNOWN_EXTRA"}, {singles[i]}});
    else rows.push_back({{singles[i]}, {singles[i]}});
  }
  rows.push_back({{"COLOR_CHANGE"}, {"PADDING_CHANGE"}});
  rows.push_back({{"TEXT_CHANGE"}, {"CONTENT_CHANGE"}});
  rows.push_back({{"LAYOUT_CHANGE"}, {"ANIMATION_CHANGE"}});
  rows.push_back({{"COLOR_CHANGE"}, {"TEXT_CHANGE"}});
  return rows;
}

/// Same 17 cases, 19 labels: 14 hits, 16 labels recovered, 24 predictions.
inline std::vector<LabeledPrediction> second_seventeen_case_fixture() {
  std::vector<LabeledPrediction> rows = {
      {{"COLOR_CHANGE", "PADDING_CHANGE"}, {"COLOR_CHANGE", "PADDING_CHANGE"}},
      {{"COLOR_CHANGE", "TEXT_CHANGE", "LAYOUT_CHANGE"}, {"COLOR_CHANGE", "TEXT_CHANGE"}},
  };
  const std::vector<const char*> singles = {"COLOR_CHANGE",   "COLOR_CHANGE",   "COLOR_CHANGE",  "PADDING_CHANGE",
                                            "CONTENT_CHANGE", "CONTENT_CHANGE", "LAYOUT_CHANGE", "LAYOUT_CHANGE",
                                            "LAYOUT_CHANGE",  "ANIMATION_PHASE", "ANIMATION_PHASE", "TEXT_CHANGE"};
  for (std::size_t i = 0; i < singles.size(); ++i) {
    if (i < 4) rows.push_back({{singles[i], "CONTENT_CHANGE"}, {singles[i]}});
    else rows.push_back({{singles[i]}, {singles[i]}});
  }
  rows.push_back({{"COLOR_CHANGE"}, {"PADDING_CHANGE"}});
  rows.push_back({{"LAYOUT_CHANGE"}, {"CONTENT_CHANGE"}});
  rows.push_back({{"LAYOUT_CHANGE"}, {"ANIMATION_CHANGE"}});
  return rows;
}

}  // namespace testsupport
