#pragma once

// Identification dataset: storage, CSV I/O, normalization constants and
// excitation signals used to collect it.

#include <algorithm>
#include <charconv>
#include <fstream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "d2ibc/common.hpp"

namespace d2ibc {

/// Input/output records {u_t, y_t}, t = 0..L-1, with the saturation bound
/// u_bar and the observed output bound y_bar = max |y_{t,i}|.
class DataSet {
 public:
  DataSet(Matrix u, Matrix y, double u_bar, std::optional<int> order_hint = std::nullopt)
      : u_(std::move(u)), y_(std::move(y)), u_bar_(u_bar), order_hint_(order_hint) {
    require(u_.rows() >= 1 && u_.rows() == y_.rows(), ErrorCode::EmptyDataset,
            "dataset needs at least one record with matching u/y rows");
    require(u_.cols() >= 1 && y_.cols() >= 1, ErrorCode::Schema, "n_u and n_y must be positive");
    require(u_.allFinite() && y_.allFinite(), ErrorCode::Schema, "non-finite sample");
    require(u_bar_ >= 0.0, ErrorCode::Bound, "u_bar must be non-negative");
    require(inf_norm(u_) <= u_bar_, ErrorCode::Bound,
            "input sample exceeds saturation bound u_bar=" + std::to_string(u_bar_));
    y_bar_ = inf_norm(y_);
  }

  int L() const { return static_cast<int>(u_.rows()); }
  int n_u() const { return static_cast<int>(u_.cols()); }
  int n_y() const { return static_cast<int>(y_.cols()); }
  const Matrix& u() const { return u_; }
  const Matrix& y() const { return y_; }
  double u_bar() const { return u_bar_; }
  double y_bar() const { return y_bar_; }
  std::optional<int> order_hint() const { return order_hint_; }

 private:
  Matrix u_;
  Matrix y_;
  double u_bar_;
  double y_bar_ = 0.0;
  std::optional<int> order_hint_;
};

struct NormConstants {
  Vector rho_y;
  Vector rho_u;
  double epsilon_floor = 1e-9;
  bool clamped = false;  // some channel fell below the floor

  static NormConstants unit(int n_y, int n_u) {
    return {Vector::Ones(n_y), Vector::Ones(n_u), 1e-9, false};
  }
};

namespace detail {

// Mean of squares, summed in ascending order so the result does not depend on
// record order.
inline double mean_square(const Eigen::Ref<const Vector>& column) {
  std::vector<double> sq(static_cast<std::size_t>(column.size()));
  for (Eigen::Index t = 0; t < column.size(); ++t) sq[t] = column[t] * column[t];
  std::sort(sq.begin(), sq.end());
  double sum = 0.0;
  for (double v : sq) sum += v;
  return sum / static_cast<double>(column.size());
}

inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(line);
  while (std::getline(ss, cur, sep)) out.push_back(cur);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::optional<double> parse_double(const std::string& s) {
  std::string t = trim(s);
  if (t.empty()) return std::nullopt;
  if (t.front() == '+') t.erase(0, 1);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size()) return std::nullopt;
  return v;
}

}  // namespace detail

inline NormConstants compute_norm_constants(const DataSet& d, double epsilon_floor = 1e-9) {
  require(epsilon_floor > 0.0, ErrorCode::Bound, "epsilon_floor must be positive");
  NormConstants nc;
  nc.epsilon_floor = epsilon_floor;
  auto fill = [&](const Matrix& data, Vector& rho) {
    rho.resize(data.cols());
    for (Eigen::Index i = 0; i < data.cols(); ++i) {
      double v = detail::mean_square(data.col(i));
      if (v < epsilon_floor) {
        v = epsilon_floor;
        nc.clamped = true;
      }
      rho[i] = v;
    }
  };
  fill(d.y(), nc.rho_y);
  fill(d.u(), nc.rho_u);
  if (nc.clamped) log(LogLevel::Warn, "normalization constant clamped at epsilon_floor");
  return nc;
}

/// Canonical CSV: optional `# u_bar=` / `# n=` directives, then the header
/// `t,u1..,y1..`, one record per line, %.17g numbers.
inline std::string to_csv(const DataSet& d) {
  std::string out;
  out += "# u_bar=" + detail::format_double(d.u_bar()) + "\n";
  if (d.order_hint()) out += "# n=" + std::to_string(*d.order_hint()) + "\n";
  out += "t";
  for (int j = 0; j < d.n_u(); ++j) out += ",u" + std::to_string(j + 1);
  for (int i = 0; i < d.n_y(); ++i) out += ",y" + std::to_string(i + 1);
  out += "\n";
  for (int t = 0; t < d.L(); ++t) {
    out += std::to_string(t);
    for (int j = 0; j < d.n_u(); ++j) out += "," + detail::format_double(d.u()(t, j));
    for (int i = 0; i < d.n_y(); ++i) out += "," + detail::format_double(d.y()(t, i));
    out += "\n";
  }
  return out;
}

inline void save_csv(const DataSet& d, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::Parse, "cannot open " + path + " for writing");
  f << to_csv(d);
}

inline DataSet parse_csv(std::istream& in, const std::string& origin = "<stream>") {
  std::optional<double> u_bar;
  std::optional<int> order;
  std::vector<std::string> header;
  int n_u = 0, n_y = 0;
  std::vector<std::vector<double>> rows;
  std::optional<double> last_t;
  std::string line;
  int lineno = 0;
  auto fail = [&](ErrorCode code, const std::string& msg) {
    throw Error(code, origin + " line " + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = detail::trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      std::string body = detail::trim(s.substr(1));
      auto eq = body.find('=');
      if (eq == std::string::npos) continue;
      std::string key = detail::trim(body.substr(0, eq));
      std::string val = body.substr(eq + 1);
      if (key == "u_bar") {
        auto v = detail::parse_double(val);
        if (!v || *v < 0.0) fail(ErrorCode::Parse, "invalid u_bar directive");
        u_bar = *v;
      } else if (key == "n") {
        auto v = detail::parse_double(val);
        if (!v || *v < 1.0 || *v != std::floor(*v)) fail(ErrorCode::Parse, "invalid n directive");
        order = static_cast<int>(*v);
      }
      continue;
    }
    auto cells = detail::split(s, ',');
    if (header.empty()) {
      for (auto& c : cells) header.push_back(detail::trim(c));
      if (header.empty() || header[0] != "t") fail(ErrorCode::Schema, "header must start with column t");
      std::size_t k = 1;
      while (k < header.size() && header[k] == "u" + std::to_string(n_u + 1)) ++n_u, ++k;
      while (k < header.size() && header[k] == "y" + std::to_string(n_y + 1)) ++n_y, ++k;
      if (k != header.size() || n_u == 0 || n_y == 0)
        fail(ErrorCode::Schema, "header must be t,u1..u{n_u},y1..y{n_y}");
      continue;
    }
    if (cells.size() != header.size())
      fail(ErrorCode::Schema, "expected " + std::to_string(header.size()) + " columns, found " +
                                  std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (auto& c : cells) {
      auto v = detail::parse_double(c);
      if (!v || !std::isfinite(*v)) fail(ErrorCode::Parse, "non-numeric cell '" + detail::trim(c) + "'");
      row.push_back(*v);
    }
    if (last_t && !(row[0] > *last_t)) fail(ErrorCode::Schema, "t must be strictly increasing");
    last_t = row[0];
    rows.push_back(std::move(row));
  }
  if (header.empty() || rows.empty()) throw Error(ErrorCode::EmptyDataset, origin + " has no records");
  const auto L = static_cast<Eigen::Index>(rows.size());
  Matrix u(L, n_u), y(L, n_y);
  for (Eigen::Index t = 0; t < L; ++t) {
    for (int j = 0; j < n_u; ++j) u(t, j) = rows[t][1 + j];
    for (int i = 0; i < n_y; ++i) y(t, i) = rows[t][1 + n_u + i];
  }
  double ub = u_bar.value_or(inf_norm(u));
  if (inf_norm(u) > ub)
    throw Error(ErrorCode::Schema, origin + ": input data exceed the declared u_bar directive");
  return DataSet(std::move(u), std::move(y), ub, order);
}

inline DataSet load_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  require(static_cast<bool>(f), ErrorCode::Parse, "cannot open " + path);
  return parse_csv(f, path);
}

enum class ExcitationKind { MultilevelRandom, Multisine };

struct ExcitationSpec {
  ExcitationKind kind = ExcitationKind::MultilevelRandom;
  double amplitude = 1.0;
  int length = 200;
  int hold = 5;
  std::uint64_t seed = 0;
  int n_sines = 8;  // multisine only
};

/// Input sequence (length x n_u) for open-loop data collection.
inline Matrix generate_excitation(const ExcitationSpec& spec, int n_u, double u_bar) {
  require(n_u >= 1, ErrorCode::Shape, "n_u must be positive");
  require(spec.length >= 1, ErrorCode::Bound, "excitation length must be >= 1");
  require(spec.amplitude >= 0.0, ErrorCode::Bound, "excitation amplitude must be non-negative");
  require(spec.amplitude <= u_bar, ErrorCode::Bound,
          "excitation amplitude " + detail::format_double(spec.amplitude) + " exceeds u_bar=" +
              detail::format_double(u_bar));
  Matrix u(spec.length, n_u);
  Rng rng(spec.seed);
  const double a = spec.amplitude;
  if (spec.kind == ExcitationKind::MultilevelRandom) {
    require(spec.hold >= 1, ErrorCode::Bound, "hold must be >= 1");
    for (int t = 0; t < spec.length; ++t) {
      if (t % spec.hold == 0)
        for (int j = 0; j < n_u; ++j) u(t, j) = rng.uniform(-a, a);
      else
        u.row(t) = u.row(t - 1);
    }
    return u;
  }
  require(spec.n_sines >= 1, ErrorCode::Bound, "n_sines must be >= 1");
  const double two_pi = 2.0 * std::numbers::pi;
  for (int j = 0; j < n_u; ++j) {
    std::vector<double> phase(spec.n_sines);
    for (auto& p : phase) p = rng.uniform(0.0, two_pi);
    for (int t = 0; t < spec.length; ++t) {
      double s = 0.0;
      for (int k = 0; k < spec.n_sines; ++k)
        s += std::sin(two_pi * (k + 1) * t / std::max(spec.length, 2 * spec.n_sines + 1) + phase[k]);
      u(t, j) = s;
    }
    double peak = inf_norm(u.col(j));
    if (peak > 0.0) u.col(j) *= a / peak;
    u.col(j) = u.col(j).cwiseMax(-a).cwiseMin(a);
  }
  return u;
}

}  // namespace d2ibc
