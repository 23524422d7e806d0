#pragma once

#include <cstdint>
#include <cstdio>
#include <ostream>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "symberg/numerics.hpp"

namespace symberg::cli {

// Conventions every numeric output depends on. Each output header records
// its hash.
inline constexpr std::string_view kConventions =
    "sym_basis=e_n/sqrt(n!),graded_revlex;"
    "lambdaF=+g^-1*F_tilde;"
    "frame_change=h'=T*h*T^*,row_vectors;"
    "curvature_link_sign=-1;"
    "b1_ordering=derived;"
    "omega=sqrt(-1)*g*dy^dyb,fs_volume=2pi;"
    "bergman=(1/2pi)*H^-1/2*b*H^1/2,orthonormal_frame;"
    "riemann_roch=pinned_fs_line1_k1_k2;"
    "quadrature=gauss_legendre_t_x_uniform_angle";

inline std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Round-trip decimal form; identical inputs give identical bytes.
inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

struct Header {
  std::string command;
  std::string version;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, std::string>> extra;
};

inline void write_csv_header(std::ostream& os, const Header& h) {
  os << "# symberg " << h.version << "\n";
  os << "# command " << h.command << "\n";
  os << "# seed " << h.seed << "\n";
  os << "# conventions fnv1a64:" << hex64(fnv1a64(kConventions)) << "\n";
  for (const auto& [k, v] : h.extra) os << "# " << k << " " << v << "\n";
}

inline nlohmann::ordered_json json_meta(const Header& h) {
  nlohmann::ordered_json m;
  m["tool"] = "symberg";
  m["version"] = h.version;
  m["command"] = h.command;
  m["seed"] = h.seed;
  m["conventions"] = "fnv1a64:" + hex64(fnv1a64(kConventions));
  for (const auto& [k, v] : h.extra) m[k] = v;
  return m;
}

// {"re": [[...]], "im": [[...]]}
inline nlohmann::ordered_json json_matrix(const CMatrix& a) {
  nlohmann::ordered_json re = nlohmann::ordered_json::array(), im = nlohmann::ordered_json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    nlohmann::ordered_json rr = nlohmann::ordered_json::array(), ri = nlohmann::ordered_json::array();
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      rr.push_back(a(i, j).real());
      ri.push_back(a(i, j).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return {{"re", re}, {"im", im}};
}

// A table rendered as CSV or as the rows array of a JSON document. Cells
// hold either text or numbers; JSON-only extras ride along per row.
class Table {
 public:
  using Cell = std::variant<std::string, double, long long>;

  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  void add(std::vector<Cell> cells, nlohmann::ordered_json extra = nullptr) {
    rows_.push_back(std::move(cells));
    extras_.push_back(std::move(extra));
  }
  size_t size() const { return rows_.size(); }

  void write_csv(std::ostream& os) const {
    for (size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
    os << "\n";
    for (const auto& row : rows_) {
      for (size_t i = 0; i < row.size(); ++i) {
        if (i) os << ",";
        if (const auto* s = std::get_if<std::string>(&row[i])) os << csv_field(*s);
        else if (const auto* d = std::get_if<double>(&row[i])) os << fmt(*d);
        else os << std::get<long long>(row[i]);
      }
      os << "\n";
    }
  }

  nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json out = nlohmann::ordered_json::array();
    for (size_t r = 0; r < rows_.size(); ++r) {
      nlohmann::ordered_json o;
      for (size_t i = 0; i < columns_.size(); ++i) {
        const Cell& c = rows_[r][i];
        if (const auto* s = std::get_if<std::string>(&c)) o[columns_[i]] = *s;
        else if (const auto* d = std::get_if<double>(&c)) o[columns_[i]] = *d;
        else o[columns_[i]] = std::get<long long>(c);
      }
      if (extras_[r].is_object())
        for (auto it = extras_[r].begin(); it != extras_[r].end(); ++it) o[it.key()] = it.value();
      out.push_back(o);
    }
    return out;
  }

 private:
  std::vector<std::string> columns_;
  std::vector<std::vector<Cell>> rows_;
  std::vector<nlohmann::ordered_json> extras_;
};

}  // namespace symberg::cli
