#include "t3dp/metrics.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>
#include <utility>

#include "t3dp/error.hpp"
#include "t3dp/hungarian.hpp"

namespace t3dp {

namespace {

void check_keys(std::span<const LabeledDetection> seq) {
  std::set<std::pair<std::int64_t, std::string>> seen;
  for (const auto& d : seq)
    if (!seen.emplace(d.frame, d.det_key).second)
      throw InputError("det_key '" + d.det_key + "' repeated in frame " +
                       std::to_string(d.frame));
}

std::vector<const LabeledDetection*> time_ordered(std::span<const LabeledDetection> seq) {
  std::vector<const LabeledDetection*> out;
  out.reserve(seq.size());
  for (const auto& d : seq) out.push_back(&d);
  std::stable_sort(out.begin(), out.end(), [](const auto* a, const auto* b) {
    return std::tie(a->frame, a->det_key) < std::tie(b->frame, b->det_key);
  });
  return out;
}

struct Counts {
  std::int64_t num_gt = 0, num_pred = 0, fp = 0, fn = 0;
};

Counts count(std::span<const LabeledDetection> seq) {
  Counts c;
  for (const auto& d : seq) {
    if (d.gt_id) ++c.num_gt;
    if (d.pred_id) ++c.num_pred;
    if (d.gt_id && !d.pred_id) ++c.fn;
    if (d.pred_id && !d.gt_id) ++c.fp;
  }
  return c;
}

std::int64_t max_identity_agreement(std::span<const LabeledDetection> seq) {
  std::map<std::int64_t, std::size_t> gt_index, pred_index;
  for (const auto& d : seq) {
    if (d.gt_id) gt_index.emplace(*d.gt_id, 0);
    if (d.pred_id) pred_index.emplace(*d.pred_id, 0);
  }
  if (gt_index.empty() || pred_index.empty()) return 0;
  std::size_t k = 0;
  for (auto& [id, idx] : gt_index) idx = k++;
  k = 0;
  for (auto& [id, idx] : pred_index) idx = k++;

  Matrix overlap(gt_index.size(), pred_index.size());
  for (const auto& d : seq)
    if (d.gt_id && d.pred_id) overlap(gt_index[*d.gt_id], pred_index[*d.pred_id]) += 1.0;

  Matrix cost = overlap;
  for (double& v : cost.flat()) v = -v;
  const Assignment best = hungarian(cost);
  std::int64_t idtp = 0;
  for (const auto& [r, c] : best.pairs) idtp += static_cast<std::int64_t>(overlap(r, c));
  return idtp;
}

}  // namespace

std::int64_t count_id_switches(std::span<const LabeledDetection> seq) {
  check_keys(seq);
  std::map<std::int64_t, std::int64_t> last_pred;
  std::int64_t switches = 0;
  for (const auto* d : time_ordered(seq)) {
    if (!d->gt_id || !d->pred_id) continue;
    auto it = last_pred.find(*d->gt_id);
    if (it == last_pred.end()) {
      last_pred.emplace(*d->gt_id, *d->pred_id);
    } else if (it->second != *d->pred_id) {
      ++switches;
      it->second = *d->pred_id;
    }
  }
  return switches;
}

double compute_mota(std::span<const LabeledDetection> seq) {
  const Counts c = count(seq);
  if (c.num_gt == 0) throw UndefinedMetricError("MOTA is undefined without ground truth");
  const auto idsw = count_id_switches(seq);
  return 1.0 - static_cast<double>(c.fn + c.fp + idsw) / static_cast<double>(c.num_gt);
}

double compute_idf1(std::span<const LabeledDetection> seq) {
  check_keys(seq);
  const Counts c = count(seq);
  const std::int64_t idtp = max_identity_agreement(seq);
  const std::int64_t denom = c.num_gt + c.num_pred;  // 2 IDTP + IDFP + IDFN
  if (denom == 0) throw UndefinedMetricError("IDF1 is undefined on an empty sequence");
  return 2.0 * static_cast<double>(idtp) / static_cast<double>(denom);
}

MetricReport evaluate(std::span<const LabeledDetection> seq) {
  const Counts c = count(seq);
  MetricReport r;
  r.num_gt = c.num_gt;
  r.num_pred = c.num_pred;
  r.fp = c.fp;
  r.fn = c.fn;
  r.id_switches = count_id_switches(seq);
  r.mota = compute_mota(seq);
  r.idtp = max_identity_agreement(seq);
  r.idfp = c.num_pred - r.idtp;
  r.idfn = c.num_gt - r.idtp;
  r.idf1 = compute_idf1(seq);
  return r;
}

}  // namespace t3dp
