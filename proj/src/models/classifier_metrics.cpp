//
// molrange - Copyright 2026 The molrange Authors.
// SPDX-License-Identifier: Apache-2.0
//

#include "molrange/models/classifier.hpp"

namespace molrange::models {

ClassificationMetrics precision_recall_f1(std::span<const double> predictions,
                                          std::span<const int> labels) {
  if (predictions.empty())
    throw Error(ErrorKind::kEmptyInput, "no predictions");
  if (predictions.size() != labels.size())
    throw Error(ErrorKind::kInvalidArgument,
                std::to_string(predictions.size()) + " predictions for "
                    + std::to_string(labels.size()) + " labels");
  ClassificationMetrics m;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1)
      throw Error(ErrorKind::kInvalidArgument, "label outside {0, 1}");
    const bool pred = predictions[i] >= 0.5;
    const bool truth = labels[i] == 1;
    if (pred && truth)
      ++m.tp;
    else if (pred)
      ++m.fp;
    else if (truth)
      ++m.fn;
    else
      ++m.tn;
  }
  auto ratio = [&m](std::size_t num, std::size_t den) {
    if (den == 0) {
      m.degenerate = true;
      return 0.0;
    }
    return static_cast<double>(num) / static_cast<double>(den);
  };
  m.accuracy = ratio(m.tp + m.tn, labels.size());
  m.precision = ratio(m.tp, m.tp + m.fp);
  m.recall = ratio(m.tp, m.tp + m.fn);
  if (m.precision + m.recall > 0) {
    m.f1 = 2.0 * m.precision * m.recall / (m.precision + m.recall);
  } else {
    m.f1 = 0.0;
    m.degenerate = true;
  }
  return m;
}

std::array<double, 2> inverse_frequency_weights(std::span<const int> labels) {
  std::array<std::size_t, 2> count { 0, 0 };
  for (int l: labels)
    ++count.at(static_cast<std::size_t>(l));
  std::array<double, 2> w { 1.0, 1.0 };
  for (int c = 0; c < 2; ++c) {
    if (count[c] > 0)
      w[c] = static_cast<double>(labels.size()) / (2.0 * static_cast<double>(count[c]));
  }
  return w;
}

}  // namespace molrange::models
