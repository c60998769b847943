#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "quadreg/common.hpp"

namespace quadreg {

// Pipeline parameters. Defaults mirror the reference configuration; every
// value can be overridden from a sectioned key=value config file.
struct Config {
  struct Representation {
    double ground_band_fraction = 0.3;   // lowest fraction of z used for ground
    double ground_inlier_threshold = 0.2;  // m
    double ground_min_support = 0.05;    // fraction of band points
    double ground_max_tilt_deg = 30.0;   // candidate plane slope limit
    int ground_ransac_iterations = 200;

    double plane_voxel = 1.0;            // m
    int plane_min_voxel_points = 10;
    double plane_eigen_ratio = 0.1;      // lambda_min / lambda_mid
    double plane_merge_angle_deg = 10.0;
    double plane_merge_offset = 0.3;     // m, co-planarity of voxel centroids
    int min_plane_points = 50;

    double cluster_distance = 0.5;       // m
    int min_cluster_size = 30;
    double line_inlier_radius = 0.1;     // m
    double line_inlier_fraction = 0.6;
    double line_elongation = 5.0;        // lambda_max / lambda_mid
    int line_ransac_iterations = 100;
    int min_line_points = 20;
    int min_object_points = 30;

    int max_extracted = 60;              // K_p = K_l = K_o
    int top_k = 50;                      // K_e
    double fit_gate = 0.5;               // delta_p, taubin acceptance
    double k_sigma = 1.645;              // k_s
    double scale_floor = 0.05;           // m

    int augment_threshold = 60;          // delta_a
    int augment_top_k = 10;              // K_a
    double augment_voxel = 0.5;          // v_a
    double descriptor_radius = 1.0;      // m
  } repr;

  struct Matching {
    int top_k_similar = 20;              // K_s
    std::vector<double> thresholds{0.2, 0.4, 0.6, 0.8};  // delta_m levels
    int max_graph_vertices = 5000;
    double descriptor_ratio_test = 0.9;
  } matching;

  struct Registration {
    double irregular_angle_deg = 5.0;    // delta_g
    double rotation_weight = 1.0;        // w_rot
    double dcs_phi = 1.0;
    double snn_distance_cap = 5.0;       // m
    int lm_max_iterations = 50;
    double lm_step_tolerance = 1e-8;
    double lm_initial_damping = 1e-4;
  } reg;

  std::uint64_t seed = 0;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

// Sectioned key=value text. '#' starts a comment. Unknown keys are reported
// with their line number, as are malformed lines.
inline void apply_config_text(Config& cfg, std::istream& in,
                              const std::string& source_name) {
  std::map<std::string, double*> scalars;
  auto& r = cfg.repr;
  auto& m = cfg.matching;
  auto& g = cfg.reg;
  scalars = {
      {"representation.ground_band_fraction", &r.ground_band_fraction},
      {"representation.ground_inlier_threshold", &r.ground_inlier_threshold},
      {"representation.ground_min_support", &r.ground_min_support},
      {"representation.ground_max_tilt_deg", &r.ground_max_tilt_deg},
      {"representation.plane_voxel", &r.plane_voxel},
      {"representation.plane_eigen_ratio", &r.plane_eigen_ratio},
      {"representation.plane_merge_angle_deg", &r.plane_merge_angle_deg},
      {"representation.plane_merge_offset", &r.plane_merge_offset},
      {"representation.cluster_distance", &r.cluster_distance},
      {"representation.line_inlier_radius", &r.line_inlier_radius},
      {"representation.line_inlier_fraction", &r.line_inlier_fraction},
      {"representation.line_elongation", &r.line_elongation},
      {"representation.fit_gate", &r.fit_gate},
      {"representation.k_sigma", &r.k_sigma},
      {"representation.scale_floor", &r.scale_floor},
      {"representation.augment_voxel", &r.augment_voxel},
      {"representation.descriptor_radius", &r.descriptor_radius},
      {"matching.descriptor_ratio_test", &m.descriptor_ratio_test},
      {"registration.irregular_angle_deg", &g.irregular_angle_deg},
      {"registration.rotation_weight", &g.rotation_weight},
      {"registration.dcs_phi", &g.dcs_phi},
      {"registration.snn_distance_cap", &g.snn_distance_cap},
      {"registration.lm_step_tolerance", &g.lm_step_tolerance},
      {"registration.lm_initial_damping", &g.lm_initial_damping},
  };
  std::map<std::string, int*> ints = {
      {"representation.ground_ransac_iterations", &r.ground_ransac_iterations},
      {"representation.plane_min_voxel_points", &r.plane_min_voxel_points},
      {"representation.min_plane_points", &r.min_plane_points},
      {"representation.min_cluster_size", &r.min_cluster_size},
      {"representation.line_ransac_iterations", &r.line_ransac_iterations},
      {"representation.min_line_points", &r.min_line_points},
      {"representation.min_object_points", &r.min_object_points},
      {"representation.max_extracted", &r.max_extracted},
      {"representation.top_k", &r.top_k},
      {"representation.augment_threshold", &r.augment_threshold},
      {"representation.augment_top_k", &r.augment_top_k},
      {"matching.top_k_similar", &m.top_k_similar},
      {"matching.max_graph_vertices", &m.max_graph_vertices},
      {"registration.lm_max_iterations", &g.lm_max_iterations},
  };

  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw Error(ErrorCode::InputError,
                    source_name + ":" + std::to_string(line_no) +
                        ": unterminated section header");
      }
      section = detail::trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::InputError,
                  source_name + ":" + std::to_string(line_no) +
                      ": expected key = value");
    }
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    const std::string full = section.empty() ? key : section + "." + key;

    if (full == "seed") {
      cfg.seed = std::stoull(value);
      continue;
    }
    if (full == "matching.thresholds") {
      std::vector<double> out;
      std::stringstream ss(value);
      std::string tok;
      while (std::getline(ss, tok, ',')) out.push_back(std::stod(detail::trim(tok)));
      if (out.empty()) {
        throw Error(ErrorCode::InputError,
                    source_name + ":" + std::to_string(line_no) +
                        ": thresholds needs at least one value");
      }
      m.thresholds = out;
      continue;
    }
    try {
      if (auto it = scalars.find(full); it != scalars.end()) {
        *it->second = std::stod(value);
        continue;
      }
      if (auto it = ints.find(full); it != ints.end()) {
        *it->second = std::stoi(value);
        continue;
      }
    } catch (const std::exception&) {
      throw Error(ErrorCode::InputError,
                  source_name + ":" + std::to_string(line_no) +
                      ": cannot parse value '" + value + "' for " + full);
    }
    throw Error(ErrorCode::InputError, source_name + ":" +
                                           std::to_string(line_no) +
                                           ": unknown key '" + full + "'");
  }
}

inline Config load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::InputError, "cannot open config file: " + path);
  }
  Config cfg;
  apply_config_text(cfg, in, path);
  return cfg;
}

}  // namespace quadreg
