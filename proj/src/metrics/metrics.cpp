#include "fvl/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "fvl/common/error.hpp"

namespace fvl::metrics {

Displacement displacement_errors(std::span<const BoundingBox> pred, std::span<const BoundingBox> truth) {
  if (pred.empty()) throw ValidationError("displacement errors need at least one step");
  if (pred.size() != truth.size()) {
    throw ValidationError("prediction has " + std::to_string(pred.size()) + " steps, ground truth " +
                          std::to_string(truth.size()));
  }
  double total = 0.0;
  double last = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    last = std::hypot(pred[i].cx - truth[i].cx, pred[i].cy - truth[i].cy);
    total += last;
  }
  return {last, total / static_cast<double>(pred.size())};
}

double final_iou(const BoundingBox& a, const BoundingBox& b) {
  const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.left(), b.left()));
  const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top()));
  const double inter = ix * iy;
  const double uni = a.area() + b.area() - inter;
  if (!(uni > 0.0)) return 0.0;
  return std::clamp(inter / uni, 0.0, 1.0);
}

std::string name_of(CaseTag tag) {
  switch (tag) {
    case CaseTag::easy: return "easy";
    case CaseTag::challenging: return "challenging";
    case CaseTag::all: return "all";
  }
  return "all";
}

CaseSplit split_cases(std::span<const double> reference_fde) {
  if (reference_fde.empty()) throw ValidationError("cannot split an empty evaluation set");
  CaseSplit split;
  double total = 0.0;
  for (double f : reference_fde) total += f;
  split.threshold = total / static_cast<double>(reference_fde.size());
  split.tags.reserve(reference_fde.size());
  for (double f : reference_fde) split.tags.push_back(f < split.threshold ? CaseTag::easy : CaseTag::challenging);
  return split;
}

Summary summarize(std::span<const SampleRecord> records, CaseTag tag) {
  Summary s;
  s.tag = tag;
  for (const auto& r : records) {
    if (tag != CaseTag::all && r.tag != tag) continue;
    ++s.count;
    s.fde += r.fde;
    s.ade += r.ade;
    s.fiou += r.fiou;
  }
  if (s.count > 0) {
    const double n = static_cast<double>(s.count);
    s.fde /= n;
    s.ade /= n;
    s.fiou /= n;
  }
  return s;
}

EvalReport build_report(std::string model, std::vector<SampleRecord> records) {
  std::vector<double> ref;
  ref.reserve(records.size());
  for (const auto& r : records) ref.push_back(r.reference_fde);
  const CaseSplit split = split_cases(ref);
  for (std::size_t i = 0; i < records.size(); ++i) records[i].tag = split.tags[i];
  EvalReport report;
  report.model = std::move(model);
  report.split_threshold = split.threshold;
  report.samples = std::move(records);
  report.all = summarize(report.samples, CaseTag::all);
  report.easy = summarize(report.samples, CaseTag::easy);
  report.challenging = summarize(report.samples, CaseTag::challenging);
  return report;
}

namespace {

nlohmann::json summary_json(const Summary& s) {
  return {{"count", s.count}, {"fde", s.fde}, {"ade", s.ade}, {"fiou", s.fiou}};
}

}  // namespace

std::string to_json(const EvalReport& report) {
  nlohmann::json j;
  j["model"] = report.model;
  j["split_reference"] = "constaccel";
  j["split_threshold_fde"] = report.split_threshold;
  j["all"] = summary_json(report.all);
  j["easy"] = summary_json(report.easy);
  j["challenging"] = summary_json(report.challenging);
  auto& rows = j["samples"] = nlohmann::json::array();
  for (const auto& r : report.samples) {
    rows.push_back({{"id", r.id},
                    {"video", r.video},
                    {"track", r.track},
                    {"start_frame", r.start_frame},
                    {"fde", r.fde},
                    {"ade", r.ade},
                    {"fiou", r.fiou},
                    {"constaccel_fde", r.reference_fde},
                    {"case", name_of(r.tag)}});
  }
  return j.dump(2);
}

void write_report(const std::filesystem::path& path, const EvalReport& report) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  out << to_json(report) << '\n';
}

std::string format_table(const EvalReport& report) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof(line), "%-16s %-12s %7s %10s %10s %6s\n", "model", "case", "count", "FDE", "ADE",
                "FIOU");
  out += line;
  for (const Summary* s : {&report.easy, &report.challenging, &report.all}) {
    std::snprintf(line, sizeof(line), "%-16s %-12s %7zu %10.3f %10.3f %6.3f\n", report.model.c_str(),
                  name_of(s->tag).c_str(), s->count, s->fde, s->ade, s->fiou);
    out += line;
  }
  return out;
}

}  // namespace fvl::metrics
