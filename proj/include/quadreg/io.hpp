#pragma once

#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "quadreg/cloud.hpp"
#include "quadreg/record.hpp"
#include "quadreg/se3.hpp"

namespace quadreg {

namespace detail {

inline std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

[[noreturn]] inline void parse_fail(const std::string& path, int line,
                                    const std::string& msg) {
  throw Error(ErrorCode::InputError,
              path + ":" + std::to_string(line) + ": " + msg);
}

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
  std::string list_count_type;
};

inline int ply_type_size(const std::string& t, const std::string& path,
                         int line) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" ||
      t == "float" || t == "float32") return 4;
  if (t == "double" || t == "float64") return 8;
  parse_fail(path, line, "unsupported PLY property type '" + t + "'");
}

inline double read_binary_scalar(std::istream& in, const std::string& type) {
  auto read_as = [&](auto value) {
    in.read(reinterpret_cast<char*>(&value), sizeof(value));
    return static_cast<double>(value);
  };
  if (type == "char" || type == "int8") return read_as(std::int8_t{});
  if (type == "uchar" || type == "uint8") return read_as(std::uint8_t{});
  if (type == "short" || type == "int16") return read_as(std::int16_t{});
  if (type == "ushort" || type == "uint16") return read_as(std::uint16_t{});
  if (type == "int" || type == "int32") return read_as(std::int32_t{});
  if (type == "uint" || type == "uint32") return read_as(std::uint32_t{});
  if (type == "float" || type == "float32") return read_as(float{});
  return read_as(double{});
}

}  // namespace detail

// ASCII and binary-little-endian PLY with x/y/z and an optional integer
// label/semantic property on the vertex element. Other elements are skipped.
inline PointCloud read_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InputError, "cannot open file: " + path);

  std::string line;
  int line_no = 0;
  auto next_line = [&]() {
    if (!std::getline(in, line)) detail::parse_fail(path, line_no, "unexpected end of header");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
  };

  next_line();
  if (line != "ply") detail::parse_fail(path, line_no, "not a PLY file");
  bool binary = false;
  struct Element {
    std::string name;
    long count = 0;
    std::vector<detail::PlyProperty> properties;
  };
  std::vector<Element> elements;

  while (true) {
    next_line();
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "comment" || tok.empty()) continue;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      if (fmt == "ascii") binary = false;
      else if (fmt == "binary_little_endian") binary = true;
      else detail::parse_fail(path, line_no, "unsupported PLY format '" + fmt + "'");
      continue;
    }
    if (tok == "element") {
      Element e;
      ss >> e.name >> e.count;
      elements.push_back(e);
      continue;
    }
    if (tok == "property") {
      if (elements.empty()) detail::parse_fail(path, line_no, "property before element");
      detail::PlyProperty p;
      std::string t;
      ss >> t;
      if (t == "list") {
        p.is_list = true;
        ss >> p.list_count_type >> p.type >> p.name;
      } else {
        p.type = t;
        ss >> p.name;
      }
      elements.back().properties.push_back(p);
      continue;
    }
    if (tok == "end_header") break;
    detail::parse_fail(path, line_no, "unrecognized header line '" + line + "'");
  }

  PointCloud cloud;
  for (const auto& elem : elements) {
    if (elem.name == "vertex") {
      int ix = -1, iy = -1, iz = -1, ilabel = -1;
      for (std::size_t p = 0; p < elem.properties.size(); ++p) {
        const auto& name = elem.properties[p].name;
        if (name == "x") ix = static_cast<int>(p);
        else if (name == "y") iy = static_cast<int>(p);
        else if (name == "z") iz = static_cast<int>(p);
        else if (name == "label" || name == "semantic") ilabel = static_cast<int>(p);
      }
      if (ix < 0 || iy < 0 || iz < 0) {
        detail::parse_fail(path, line_no, "vertex element lacks x/y/z properties");
      }
      cloud.points.reserve(elem.count);
      if (ilabel >= 0) cloud.labels.reserve(elem.count);
      for (long i = 0; i < elem.count; ++i) {
        std::vector<double> values(elem.properties.size(), 0.0);
        if (binary) {
          for (std::size_t p = 0; p < elem.properties.size(); ++p) {
            const auto& prop = elem.properties[p];
            if (prop.is_list) {
              const long n = static_cast<long>(
                  detail::read_binary_scalar(in, prop.list_count_type));
              for (long k = 0; k < n; ++k) detail::read_binary_scalar(in, prop.type);
            } else {
              values[p] = detail::read_binary_scalar(in, prop.type);
            }
          }
          if (!in) detail::parse_fail(path, line_no, "truncated binary vertex data");
        } else {
          next_line();
          std::istringstream vs(line);
          for (std::size_t p = 0; p < elem.properties.size(); ++p) {
            if (!(vs >> values[p])) {
              detail::parse_fail(path, line_no, "expected " +
                                 std::to_string(elem.properties.size()) +
                                 " values in vertex row");
            }
          }
        }
        cloud.points.emplace_back(values[ix], values[iy], values[iz]);
        if (ilabel >= 0) cloud.labels.push_back(static_cast<int>(values[ilabel]));
      }
    } else {
      // Skip foreign elements.
      for (long i = 0; i < elem.count; ++i) {
        if (binary) {
          for (const auto& prop : elem.properties) {
            if (prop.is_list) {
              const long n = static_cast<long>(
                  detail::read_binary_scalar(in, prop.list_count_type));
              const int sz = detail::ply_type_size(prop.type, path, line_no);
              in.seekg(static_cast<std::streamoff>(n) * sz, std::ios::cur);
            } else {
              detail::read_binary_scalar(in, prop.type);
            }
          }
        } else {
          next_line();
        }
      }
    }
  }
  if (cloud.points.empty()) {
    detail::parse_fail(path, line_no, "PLY contains no vertices");
  }
  return cloud;
}

inline void write_ply(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InputError, "cannot write file: " + path);
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.points.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_labels()) out << "property int label\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    out << detail::fmt_double(p.x()) << ' ' << detail::fmt_double(p.y()) << ' '
        << detail::fmt_double(p.z());
    if (cloud.has_labels()) out << ' ' << cloud.labels[i];
    out << '\n';
  }
}

// ASCII PCD: FIELDS must include x y z and may include label.
inline PointCloud read_pcd(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InputError, "cannot open file: " + path);
  std::string line;
  int line_no = 0;
  int ix = -1, iy = -1, iz = -1, ilabel = -1, n_fields = 0;
  long points = -1;
  bool data_ascii = false;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    std::string key;
    ss >> key;
    if (key == "FIELDS") {
      std::string f;
      int idx = 0;
      while (ss >> f) {
        if (f == "x") ix = idx;
        else if (f == "y") iy = idx;
        else if (f == "z") iz = idx;
        else if (f == "label" || f == "semantic") ilabel = idx;
        ++idx;
      }
      n_fields = idx;
    } else if (key == "POINTS") {
      ss >> points;
    } else if (key == "DATA") {
      std::string mode;
      ss >> mode;
      if (mode != "ascii") {
        detail::parse_fail(path, line_no, "only DATA ascii is supported, got '" + mode + "'");
      }
      data_ascii = true;
      break;
    }
  }
  if (!data_ascii) detail::parse_fail(path, line_no, "missing DATA ascii section");
  if (ix < 0 || iy < 0 || iz < 0) detail::parse_fail(path, line_no, "FIELDS must contain x y z");
  if (points < 0) detail::parse_fail(path, line_no, "missing POINTS header");

  PointCloud cloud;
  cloud.points.reserve(points);
  for (long i = 0; i < points; ++i) {
    if (!std::getline(in, line)) detail::parse_fail(path, line_no, "truncated PCD data");
    ++line_no;
    std::istringstream vs(line);
    std::vector<double> values(n_fields, 0.0);
    for (int f = 0; f < n_fields; ++f) {
      if (!(vs >> values[f])) {
        detail::parse_fail(path, line_no, "expected " + std::to_string(n_fields) + " values");
      }
    }
    cloud.points.emplace_back(values[ix], values[iy], values[iz]);
    if (ilabel >= 0) cloud.labels.push_back(static_cast<int>(values[ilabel]));
  }
  return cloud;
}

inline PointCloud read_cloud(const std::string& path) {
  const auto dot = path.rfind('.');
  const std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  if (ext == "ply") return read_ply(path);
  if (ext == "pcd") return read_pcd(path);
  throw Error(ErrorCode::InputError,
              "unsupported cloud format '" + ext + "' for " + path);
}

// One integer per line, aligned with the cloud points.
inline std::vector<int> read_label_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InputError, "cannot open file: " + path);
  std::vector<int> labels;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      labels.push_back(std::stoi(line));
    } catch (const std::exception&) {
      detail::parse_fail(path, line_no, "expected an integer label");
    }
  }
  return labels;
}

// Fixed serialization order per record: label, q[0..9], s_f, eta_f (w,x,y,z),
// t_f. One record per line; augmented point records follow the others.
inline void write_records_text(const std::string& path,
                               const SceneRepresentation& scene) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::InputError, "cannot write file: " + path);
  auto emit = [&](const QuadricRecord& r) {
    out << r.label;
    for (int i = 0; i < 10; ++i) out << ' ' << detail::fmt_double(r.q[i]);
    for (int i = 0; i < 3; ++i) out << ' ' << detail::fmt_double(r.s_f[i]);
    out << ' ' << detail::fmt_double(r.eta_f.w()) << ' '
        << detail::fmt_double(r.eta_f.x()) << ' '
        << detail::fmt_double(r.eta_f.y()) << ' '
        << detail::fmt_double(r.eta_f.z());
    for (int i = 0; i < 3; ++i) out << ' ' << detail::fmt_double(r.t_f[i]);
    out << '\n';
  };
  for (const auto& r : scene.records) emit(r);
  for (const auto& r : scene.augmented) emit(r);
}

inline SceneRepresentation read_records_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InputError, "cannot open file: " + path);
  SceneRepresentation scene;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    int label;
    Vec10 q;
    Eigen::Vector3d s, t;
    double w, x, y, z;
    if (!(ss >> label)) detail::parse_fail(path, line_no, "expected a label");
    for (int i = 0; i < 10; ++i) {
      if (!(ss >> q[i])) detail::parse_fail(path, line_no, "expected 10 quadric coefficients");
    }
    for (int i = 0; i < 3; ++i) {
      if (!(ss >> s[i])) detail::parse_fail(path, line_no, "expected 3 scale values");
    }
    if (!(ss >> w >> x >> y >> z)) detail::parse_fail(path, line_no, "expected a quaternion (w x y z)");
    for (int i = 0; i < 3; ++i) {
      if (!(ss >> t[i])) detail::parse_fail(path, line_no, "expected 3 center values");
    }
    scene.records.push_back(QuadricRecord::from_parameters(
        label, q, s, Eigen::Quaterniond(w, x, y, z), t));
  }
  return scene;
}

// KITTI pose convention: 12 numbers per line, the row-major upper 3x4 of the
// sensor-to-world transform.
inline std::vector<RigidTransform> read_kitti_poses(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InputError, "cannot open file: " + path);
  std::vector<RigidTransform> poses;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ss(line);
    double v[12];
    for (int i = 0; i < 12; ++i) {
      if (!(ss >> v[i])) {
        detail::parse_fail(path, line_no, "expected 12 numbers (row-major 3x4 pose)");
      }
    }
    RigidTransform t;
    t.rotation << v[0], v[1], v[2], v[4], v[5], v[6], v[8], v[9], v[10];
    t.translation << v[3], v[7], v[11];
    poses.push_back(t);
  }
  return poses;
}

}  // namespace quadreg
