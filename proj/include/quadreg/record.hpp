#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <map>
#include <optional>
#include <vector>

#include "quadreg/cloud.hpp"
#include "quadreg/config.hpp"
#include "quadreg/extract.hpp"
#include "quadreg/fitting.hpp"
#include "quadreg/quadric.hpp"

namespace quadreg {

// The 21-parameter scene element: label, quadric coefficients, full scale,
// full rotation (quaternion) and full center, plus derived data cached from
// the decomposition (re-derivable from q at any time).
struct QuadricRecord {
  int label = 0;
  Vec10 q = Vec10::Zero();
  Eigen::Vector3d s_f = Eigen::Vector3d::Zero();
  Eigen::Quaterniond eta_f = Eigen::Quaterniond::Identity();
  Eigen::Vector3d t_f = Eigen::Vector3d::Zero();

  QuadricType type = QuadricType::Unclassified;
  Eigen::Array3i i_s{0, 0, 0};
  Eigen::Array3i i_r{0, 0, 0};
  Eigen::Array3i i_t{0, 0, 0};
  CenterClass center_class = CenterClass::Central;
  bool is_augmented = false;
  Eigen::VectorXd descriptor;  // 33-bin FPFH for augmented points; else empty

  Eigen::Matrix3d rotation() const { return eta_f.toRotationMatrix(); }

  // Rebuilds the derived cache from the stored parameters (used when loading
  // records from files).
  static QuadricRecord from_parameters(int label, const Vec10& q,
                                       const Eigen::Vector3d& s_f,
                                       const Eigen::Quaterniond& eta_f,
                                       const Eigen::Vector3d& t_f) {
    QuadricRecord r;
    r.label = label;
    r.q = q;
    r.s_f = s_f;
    r.eta_f = eta_f.normalized();
    r.t_f = t_f;
    const Decomposition d = decompose(build_matrix(q));
    r.type = d.type;
    r.i_s = d.attributes.i_s;
    r.i_r = d.attributes.i_r;
    r.i_t = d.attributes.i_t;
    r.center_class = d.attributes.center_class;
    return r;
  }
};

// Fuses the decomposed quadric attributes with the statistical ones: quadric
// values where the type is non-degenerate, statistical moments elsewhere. The
// whole center falls back to the statistical one as soon as any translation
// axis is degenerate.
inline std::optional<QuadricRecord> build_record(const ElementSegment& segment,
                                                 const StatisticalFit& fit,
                                                 const Config& cfg) {
  const Decomposition d = decompose(fit.q);
  if (d.type == QuadricType::Unclassified) return std::nullopt;

  // Align statistical axes to the decomposed frame (greedy max-|dot|); the
  // two frames are identical up to column permutation and sign.
  const Eigen::Matrix3d r_stat = fit.pose.rotation;
  Eigen::Matrix3d stat_aligned = Eigen::Matrix3d::Zero();
  Eigen::Vector3d s_stat_aligned = Eigen::Vector3d::Zero();
  bool used[3] = {false, false, false};
  for (int j = 0; j < 3; ++j) {
    int best = -1;
    double best_dot = -1.0;
    for (int i = 0; i < 3; ++i) {
      if (used[i]) continue;
      const double dot = std::abs(d.attributes.rotation.col(j).dot(r_stat.col(i)));
      if (dot > best_dot) {
        best_dot = dot;
        best = i;
      }
    }
    used[best] = true;
    const double sign =
        d.attributes.rotation.col(j).dot(r_stat.col(best)) < 0 ? -1.0 : 1.0;
    stat_aligned.col(j) = sign * r_stat.col(best);
    s_stat_aligned[j] = fit.scale[best];
  }

  QuadricRecord rec;
  rec.label = segment.label;
  rec.type = d.type;
  rec.i_s = d.attributes.i_s;
  rec.i_r = d.attributes.i_r;
  rec.i_t = d.attributes.i_t;
  rec.center_class = d.attributes.center_class;
  rec.q = flatten(normalize(fit.q));

  for (int i = 0; i < 3; ++i) {
    const double fused =
        rec.i_s[i] ? d.attributes.scale[i] : s_stat_aligned[i];
    rec.s_f[i] = std::max(fused, cfg.repr.scale_floor);
  }

  Eigen::Matrix3d r_f;
  for (int i = 0; i < 3; ++i) {
    if (rec.i_r[i]) {
      r_f.col(i) = d.attributes.rotation.col(i);
    } else {
      r_f.col(i) = stat_aligned.col(i);
    }
  }
  r_f = orthonormalize(r_f);
  rec.eta_f = to_quaternion(r_f);

  const bool full_translation = rec.i_t.minCoeff() == 1;
  rec.t_f = full_translation ? d.attributes.center : fit.pose.translation;
  return rec;
}

// Size order: product of the n largest full-scale components, n = 1 for
// lines, 2 for planes, 3 for volumetric types.
inline double record_size(const QuadricRecord& r) {
  Eigen::Vector3d s = r.s_f;
  std::sort(s.data(), s.data() + 3, std::greater<double>());
  switch (r.type) {
    case QuadricType::Line: return s[0];
    case QuadricType::Plane: return s[0] * s[1];
    default: return s[0] * s[1] * s[2];
  }
}

// Keeps the k_e largest records per semantic label; ties keep the earlier
// record. Input order is preserved within the output.
inline std::vector<QuadricRecord> select_top_k(
    const std::vector<QuadricRecord>& records, int k_e) {
  std::map<int, std::vector<int>> by_label;
  for (std::size_t i = 0; i < records.size(); ++i) {
    by_label[records[i].label].push_back(static_cast<int>(i));
  }
  std::vector<char> keep(records.size(), 0);
  for (auto& [label, idx] : by_label) {
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return record_size(records[a]) > record_size(records[b]);
    });
    for (std::size_t i = 0; i < idx.size() && i < static_cast<std::size_t>(k_e); ++i) {
      keep[idx[i]] = 1;
    }
  }
  std::vector<QuadricRecord> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (keep[i]) out.push_back(records[i]);
  }
  return out;
}

// A fully degenerate point-type record at the given coordinate.
inline QuadricRecord make_point_record(const Eigen::Vector3d& coordinate,
                                       int label, const Config& cfg) {
  QuadricRecord rec;
  rec.label = label;
  rec.type = QuadricType::Point;
  const TypeIndicators ind = type_indicators(QuadricType::Point);
  rec.i_s = ind.i_s;
  rec.i_r = ind.i_r;
  rec.i_t = ind.i_t;
  rec.center_class = CenterClass::Central;
  rec.is_augmented = true;
  const QuadricMatrix q =
      compose(Eigen::Vector3d::Ones(), 0.0,
              RigidTransform{Eigen::Matrix3d::Identity(), coordinate});
  rec.q = flatten(normalize(q));
  rec.s_f = Eigen::Vector3d::Constant(cfg.repr.scale_floor);
  rec.eta_f = Eigen::Quaterniond::Identity();
  rec.t_f = coordinate;
  return rec;
}

// Sparse-scene augmentation: when fewer than `augment_threshold` records
// exist, the largest segments per semantic type are voxel-down-sampled into
// point-type records.
inline std::vector<QuadricRecord> augment_points(
    const std::vector<ElementSegment>& segments,
    const std::vector<QuadricRecord>& records, const Config& cfg) {
  if (static_cast<int>(records.size()) >= cfg.repr.augment_threshold) {
    return {};
  }
  std::map<int, std::vector<int>> by_label;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    by_label[segments[i].label].push_back(static_cast<int>(i));
  }
  std::vector<QuadricRecord> out;
  for (auto& [label, idx] : by_label) {
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
      return segments[a].points.size() > segments[b].points.size();
    });
    const std::size_t take =
        std::min<std::size_t>(idx.size(), cfg.repr.augment_top_k);
    for (std::size_t i = 0; i < take; ++i) {
      for (const auto& p :
           voxel_downsample(segments[idx[i]].points, cfg.repr.augment_voxel)) {
        out.push_back(make_point_record(p, label, cfg));
      }
    }
  }
  return out;
}

struct RepresentDiagnostics {
  int ground_points = 0;
  int plane_segments = 0;
  int line_segments = 0;
  int object_segments = 0;
  int dropped_fits = 0;
  bool ground_found = false;
};

struct SceneRepresentation {
  std::vector<QuadricRecord> records;
  std::vector<QuadricRecord> augmented;
  Eigen::Vector3d ground_normal = Eigen::Vector3d::UnitZ();
  bool has_ground = false;
  RepresentDiagnostics diag;

  std::size_t total_size() const { return records.size() + augmented.size(); }
  const QuadricRecord& at(std::size_t i) const {
    return i < records.size() ? records[i] : augmented[i - records.size()];
  }
};

}  // namespace quadreg
