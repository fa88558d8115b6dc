#pragma once

// Text interchange: CSV clouds (x,y,z), ASCII PLY clouds, CSV pair lists
// (y1,y2,y3,x1,x2,x3) and the JSON ground-truth sidecar
//   { "R": [9 reals, row-major], "inliers": [...], "sigma": s, "seed": n }.
// Doubles are written with 17 significant digits so a write/read round trip
// is exact.

#include <nlohmann/json.hpp>

#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "arcs/errors.hpp"
#include "arcs/geometry.hpp"
#include "arcs/matching.hpp"

namespace arcs {

inline std::string format_double(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return {buf, r.ptr};
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto r = std::from_chars(s.data(), s.data() + s.size(), out);
  return r.ec == std::errc() && r.ptr == s.data() + s.size();
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto k = line.find(sep, start);
    out.push_back(trim(line.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start)));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t k = 0;
  while (k < line.size()) {
    while (k < line.size() && (line[k] == ' ' || line[k] == '\t' || line[k] == '\r')) ++k;
    const std::size_t b = k;
    while (k < line.size() && line[k] != ' ' && line[k] != '\t' && line[k] != '\r') ++k;
    if (k > b) out.push_back(line.substr(b, k - b));
  }
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

inline void finish(std::ofstream& out, const std::string& path) {
  out.flush();
  if (!out) throw IoError("write to '" + path + "' failed");
}

/// Rows of `width` numbers. The first non-blank line may be a header; lines
/// starting with '#' are skipped.
inline std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t width) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split(t, ',');
    std::vector<double> row(fields.size());
    bool numeric = true;
    for (std::size_t k = 0; k < fields.size(); ++k) numeric = numeric && parse_double(fields[k], row[k]);
    if (!numeric && first) {
      first = false;
      continue;
    }
    first = false;
    if (!numeric) throw ParseError(path, lineno, "non-numeric field");
    if (row.size() != width) {
      throw ParseError(path, lineno, "expected " + std::to_string(width) + " fields, got " + std::to_string(row.size()));
    }
    for (const double v : row) {
      if (!std::isfinite(v)) throw ParseError(path, lineno, "non-finite value");
    }
    rows.push_back(std::move(row));
  }
  if (in.bad()) throw IoError("read from '" + path + "' failed");
  return rows;
}

inline PointCloud load_ply(const std::string& path, std::ifstream& in) {
  std::string line;
  std::size_t lineno = 1;  // "ply" already consumed
  struct Element {
    std::string name;
    std::size_t count = 0;
    std::vector<std::string> props;
  };
  std::vector<Element> elements;
  bool ascii = false;
  bool header_done = false;
  while (std::getline(in, line)) {
    ++lineno;
    const auto tok = split_ws(trim(line));
    if (tok.empty()) continue;
    if (tok[0] == "format") {
      if (tok.size() < 2) throw ParseError(path, lineno, "malformed format line");
      if (tok[1] != "ascii") throw UnsupportedFormat("'" + path + "': PLY format '" + std::string(tok[1]) + "' is not supported");
      ascii = true;
    } else if (tok[0] == "element") {
      if (tok.size() != 3) throw ParseError(path, lineno, "malformed element line");
      double cnt = 0.0;
      if (!parse_double(tok[2], cnt) || cnt < 0 || cnt != static_cast<double>(static_cast<std::size_t>(cnt))) {
        throw ParseError(path, lineno, "bad element count");
      }
      elements.push_back({std::string(tok[1]), static_cast<std::size_t>(cnt), {}});
    } else if (tok[0] == "property") {
      if (elements.empty()) throw ParseError(path, lineno, "property before element");
      if (tok.size() >= 2 && tok[1] == "list") {
        if (elements.back().name == "vertex") throw UnsupportedFormat("'" + path + "': list properties on vertices");
        elements.back().props.push_back("<list>");
      } else {
        if (tok.size() != 3) throw ParseError(path, lineno, "malformed property line");
        elements.back().props.emplace_back(tok[2]);
      }
    } else if (tok[0] == "end_header") {
      header_done = true;
      break;
    }
  }
  if (!header_done) throw ParseError(path, lineno, "missing end_header");
  if (!ascii) throw ParseError(path, lineno, "missing format line");

  std::vector<Point3> points;
  for (const auto& el : elements) {
    int ix = -1, iy = -1, iz = -1;
    for (std::size_t k = 0; k < el.props.size(); ++k) {
      if (el.props[k] == "x") ix = static_cast<int>(k);
      if (el.props[k] == "y") iy = static_cast<int>(k);
      if (el.props[k] == "z") iz = static_cast<int>(k);
    }
    const bool vertex = el.name == "vertex";
    if (vertex && (ix < 0 || iy < 0 || iz < 0)) throw ParseError(path, lineno, "vertex element lacks x/y/z");
    for (std::size_t r = 0; r < el.count; ++r) {
      if (!std::getline(in, line)) throw ParseError(path, lineno + 1, "unexpected end of file");
      ++lineno;
      if (!vertex) continue;
      const auto tok = split_ws(trim(line));
      if (tok.size() != el.props.size()) throw ParseError(path, lineno, "wrong number of vertex properties");
      Point3 pt;
      if (!parse_double(tok[static_cast<std::size_t>(ix)], pt.x()) ||
          !parse_double(tok[static_cast<std::size_t>(iy)], pt.y()) ||
          !parse_double(tok[static_cast<std::size_t>(iz)], pt.z()) || !pt.allFinite()) {
        throw ParseError(path, lineno, "non-numeric vertex coordinate");
      }
      points.push_back(pt);
    }
  }
  return PointCloud(std::move(points));
}

}  // namespace detail

/// CSV (`x,y,z` per line, optional header) or ASCII PLY, chosen by content.
inline PointCloud load_cloud(const std::string& path) {
  {
    auto in = detail::open_in(path);
    std::string first;
    if (!std::getline(in, first) && in.eof() && first.empty()) {
      std::cerr << "warning: '" << path << "' is empty; loaded 0 points\n";
      return {};
    }
    if (detail::trim(first) == "ply") return detail::load_ply(path, in);
  }
  const auto rows = detail::read_numeric_csv(path, 3);
  std::vector<Point3> pts;
  pts.reserve(rows.size());
  for (const auto& r : rows) pts.emplace_back(r[0], r[1], r[2]);
  if (pts.empty()) std::cerr << "warning: '" << path << "' contains no points\n";
  return PointCloud(std::move(pts));
}

inline PairList load_pairs(const std::string& path) {
  const auto rows = detail::read_numeric_csv(path, 6);
  PairList pairs;
  pairs.reserve(rows.size());
  for (const auto& r : rows) pairs.push_back({Point3(r[0], r[1], r[2]), Point3(r[3], r[4], r[5])});
  return pairs;
}

inline void write_cloud_csv(const std::string& path, const std::vector<Point3>& points) {
  auto out = detail::open_out(path);
  out << "x,y,z\n";
  for (const auto& p : points) {
    out << format_double(p.x()) << ',' << format_double(p.y()) << ',' << format_double(p.z()) << '\n';
  }
  detail::finish(out, path);
}

inline void write_pairs_csv(const std::string& path, const PairList& pairs) {
  auto out = detail::open_out(path);
  out << "y1,y2,y3,x1,x2,x3\n";
  for (const auto& p : pairs) {
    out << format_double(p.y.x()) << ',' << format_double(p.y.y()) << ',' << format_double(p.y.z()) << ','
        << format_double(p.x.x()) << ',' << format_double(p.x.y()) << ',' << format_double(p.x.z()) << '\n';
  }
  detail::finish(out, path);
}

inline nlohmann::json rotation_to_json(const RotationMatrix& r) {
  auto a = nlohmann::json::array();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) a.push_back(r(i, j));
  }
  return a;
}

inline RotationMatrix rotation_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 9) throw std::invalid_argument("rotation must be an array of 9 numbers");
  RotationMatrix r;
  for (int k = 0; k < 9; ++k) r(k / 3, k % 3) = j.at(static_cast<std::size_t>(k)).get<double>();
  return r;
}

struct Truth {
  RotationMatrix r = RotationMatrix::Identity();
  nlohmann::json inliers = nlohmann::json::array();
  double sigma = 0.0;
  std::uint64_t seed = 0;
};

inline void write_json(const std::string& path, const nlohmann::json& j) {
  auto out = detail::open_out(path);
  out << j.dump(2) << '\n';
  detail::finish(out, path);
}

inline void write_truth(const std::string& path, const Truth& t) {
  write_json(path, {{"R", rotation_to_json(t.r)}, {"inliers", t.inliers}, {"sigma", t.sigma}, {"seed", t.seed}});
}

inline Truth load_truth(const std::string& path) {
  auto in = detail::open_in(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
    Truth t;
    t.r = rotation_from_json(j.at("R"));
    if (j.contains("inliers")) t.inliers = j.at("inliers");
    if (j.contains("sigma")) t.sigma = j.at("sigma").get<double>();
    if (j.contains("seed")) t.seed = j.at("seed").get<std::uint64_t>();
    return t;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path, 0, e.what());
  } catch (const std::exception& e) {
    throw ParseError(path, 0, std::string("bad truth file: ") + e.what());
  }
}

}  // namespace arcs
