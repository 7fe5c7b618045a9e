#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace t3dp {

// One detection box with its ground-truth and predicted identities. Predicted
// and ground-truth boxes correspond by det_key, so no IoU matching happens here.
struct LabeledDetection {
  std::int64_t frame = 0;
  std::string det_key;
  std::optional<std::int64_t> gt_id;
  std::optional<std::int64_t> pred_id;
};

struct MetricReport {
  std::int64_t id_switches = 0;
  double mota = 0.0;
  double idf1 = 0.0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t num_gt = 0;
  std::int64_t num_pred = 0;
  std::int64_t idtp = 0;
  std::int64_t idfp = 0;
  std::int64_t idfn = 0;
};

/// Per ground-truth identity, the number of frames whose matched prediction
/// differs from the last matched prediction (frames without a match are
/// skipped; the first match is not a switch).
std::int64_t count_id_switches(std::span<const LabeledDetection> seq);

/// 1 - (FN + FP + IDSW) / num_gt. Throws UndefinedMetricError when num_gt == 0.
double compute_mota(std::span<const LabeledDetection> seq);

/// 2 IDTP / (2 IDTP + IDFP + IDFN) under the identity matching that
/// maximizes IDTP.
double compute_idf1(std::span<const LabeledDetection> seq);

MetricReport evaluate(std::span<const LabeledDetection> seq);

}  // namespace t3dp
