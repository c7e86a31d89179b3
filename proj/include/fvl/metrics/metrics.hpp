#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "fvl/geometry/box.hpp"

namespace fvl::metrics {

struct Displacement {
  double fde = 0.0;
  double ade = 0.0;
};

// Euclidean center distance per step; FDE at the last step, ADE the mean.
// Throws ValidationError on empty or unequal sequences.
Displacement displacement_errors(std::span<const BoundingBox> pred, std::span<const BoundingBox> truth);

// Intersection over union of axis-aligned boxes; 0 when the union is empty.
double final_iou(const BoundingBox& pred, const BoundingBox& truth);

enum class CaseTag { easy, challenging, all };
std::string name_of(CaseTag tag);

struct CaseSplit {
  double threshold = 0.0;
  std::vector<CaseTag> tags;
};

// Easy iff reference FDE < mean reference FDE over the set. Throws
// ValidationError on an empty set.
CaseSplit split_cases(std::span<const double> reference_fde);

struct SampleRecord {
  std::size_t id = 0;
  std::string video;
  int track = 0;
  int start_frame = 0;
  double fde = 0.0;
  double ade = 0.0;
  double fiou = 0.0;
  double reference_fde = 0.0;
  CaseTag tag = CaseTag::all;
};

struct Summary {
  CaseTag tag = CaseTag::all;
  std::size_t count = 0;
  double fde = 0.0;
  double ade = 0.0;
  double fiou = 0.0;
};

struct EvalReport {
  std::string model;
  double split_threshold = 0.0;
  Summary all;
  Summary easy;
  Summary challenging;
  std::vector<SampleRecord> samples;
};

// Per-sample means in record order. An empty subset yields zeros.
Summary summarize(std::span<const SampleRecord> records, CaseTag tag);

// Assigns case tags from reference FDEs and fills every summary.
EvalReport build_report(std::string model, std::vector<SampleRecord> records);

std::string to_json(const EvalReport& report);
void write_report(const std::filesystem::path& path, const EvalReport& report);
// One line per case: model, case, count, FDE / ADE / FIOU.
std::string format_table(const EvalReport& report);

}  // namespace fvl::metrics
