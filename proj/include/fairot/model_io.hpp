#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "fairot/error.hpp"
#include "fairot/repair.hpp"
#include "fairot/textio.hpp"

namespace fairot {

inline constexpr const char* kModelMagic = "fairot-model v1";

// Plans at or below this many cells are written as dense row blocks; larger
// ones as (row, col, mass) triplets. Monotone plans have at most
// rows + cols - 1 nonzeros, so the sparse form stays small.
inline constexpr std::size_t kDensePlanLimit = 4096;

namespace detail {

inline void require_finite(double v, const std::string& where) {
  if (!std::isfinite(v))
    throw ValidationError("non-finite value in " + where + "; refusing to serialize");
}

inline std::vector<std::string_view> tokenize(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    std::size_t start = pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
    if (pos > start) out.push_back(line.substr(start, pos - start));
  }
  return out;
}

// Cursor over the lines of a model file; every read names its position.
class LineCursor {
 public:
  explicit LineCursor(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      lines_.push_back(line);
    }
  }

  bool done() const { return next_ >= lines_.size(); }
  std::size_t line_number() const { return next_; }

  const std::string& take(const std::string& expecting) {
    if (done())
      throw FormatError("model file truncated: expected " + expecting + " after line " +
                        std::to_string(next_));
    return lines_[next_++];
  }

  const std::string& peek(const std::string& expecting) {
    if (done())
      throw FormatError("model file truncated: expected " + expecting + " after line " +
                        std::to_string(next_));
    return lines_[next_];
  }

  void skip() { ++next_; }

 private:
  std::vector<std::string> lines_;
  std::size_t next_ = 0;
};

inline std::string rest_of_line(const std::string& line, std::size_t skip_tokens) {
  std::size_t pos = 0;
  for (std::size_t t = 0; t < skip_tokens; ++t) {
    while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
    while (pos < line.size() && line[pos] != ' ' && line[pos] != '\t') ++pos;
  }
  while (pos < line.size() && (line[pos] == ' ' || line[pos] == '\t')) ++pos;
  return line.substr(pos);
}

inline std::vector<double> parse_number_row(const std::string& line, std::size_t expected,
                                            const std::string& what) {
  std::vector<std::string_view> tokens = tokenize(line);
  if (tokens.size() != expected)
    throw FormatError(what + ": expected " + std::to_string(expected) + " numbers, found " +
                      std::to_string(tokens.size()));
  std::vector<double> out;
  out.reserve(expected);
  for (std::string_view t : tokens) out.push_back(parse_double(t, what));
  return out;
}

inline void append_number_row(std::string& out, const std::vector<double>& row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i > 0) out += ' ';
    out += format_double(row[i]);
  }
  out += '\n';
}

}  // namespace detail

inline std::string serialize_model(const RepairModel& model) {
  model.validate(1e-6);
  detail::require_finite(model.t, "interpolation weight");
  std::string out;
  out.reserve(1 << 16);
  out += kModelMagic;
  out += '\n';
  out += "d " + std::to_string(model.d) + '\n';
  out += "t " + format_double(model.t) + '\n';
  out += "seed " + std::to_string(model.seed) + '\n';
  if (!model.created.empty()) out += "created " + model.created + '\n';
  if (!model.schema_fingerprint.empty()) out += "fingerprint " + model.schema_fingerprint + '\n';
  out += "cells";
  for (std::size_t c = 0; c < kCellCount; ++c) out += ' ' + std::to_string(model.cell_counts[c]);
  out += '\n';
  for (std::size_t k = 0; k < model.feature_names.size(); ++k)
    out += "feature_name " + std::to_string(k) + ' ' + model.feature_names[k] + '\n';
  if (!model.schema_json.empty()) out += "schema " + model.schema_json + '\n';
  for (const std::string& w : model.warnings) out += "warning " + w + '\n';

  for (int u = 0; u < 2; ++u) {
    for (std::size_t k = 0; k < model.d; ++k) {
      const GroupFeatureRepair& g = model.at(u, k);
      std::string where = "group (u=" + std::to_string(u) + ", feature " + std::to_string(k) + ")";
      detail::require_finite(g.support.lo(), where);
      detail::require_finite(g.support.hi(), where);
      out += "group " + std::to_string(u) + ' ' + std::to_string(k) + ' ' +
             std::to_string(g.support.size()) + '\n';
      out += "support " + format_double(g.support.lo()) + ' ' + format_double(g.support.hi()) +
             '\n';
      detail::require_finite(g.bandwidth[0], where);
      detail::require_finite(g.bandwidth[1], where);
      out += "bandwidth " + format_double(g.bandwidth[0]) + ' ' + format_double(g.bandwidth[1]) +
             '\n';
      for (int s = 0; s < 2; ++s) {
        for (double v : g.source[static_cast<std::size_t>(s)].mass) detail::require_finite(v, where);
        out += "pmf" + std::to_string(s) + ' ';
        std::string row;
        detail::append_number_row(row, g.source[static_cast<std::size_t>(s)].mass);
        out += row;
      }
      for (double v : g.target.mass) detail::require_finite(v, where);
      out += "target ";
      {
        std::string row;
        detail::append_number_row(row, g.target.mass);
        out += row;
      }
      for (int s = 0; s < 2; ++s) {
        const TransportPlan& plan = g.plan[static_cast<std::size_t>(s)];
        for (double v : plan.mass) detail::require_finite(v, where);
        if (plan.mass.size() <= kDensePlanLimit) {
          out += "plan" + std::to_string(s) + " dense\n";
          std::vector<double> row(plan.cols);
          for (std::size_t i = 0; i < plan.rows; ++i) {
            for (std::size_t j = 0; j < plan.cols; ++j) row[j] = plan.at(i, j);
            detail::append_number_row(out, row);
          }
        } else {
          std::size_t nnz = 0;
          for (double v : plan.mass)
            if (v != 0.0) ++nnz;
          out += "plan" + std::to_string(s) + " sparse " + std::to_string(nnz) + '\n';
          for (std::size_t i = 0; i < plan.rows; ++i)
            for (std::size_t j = 0; j < plan.cols; ++j)
              if (plan.at(i, j) != 0.0)
                out += std::to_string(i) + ' ' + std::to_string(j) + ' ' +
                       format_double(plan.at(i, j)) + '\n';
        }
      }
    }
  }
  out += "end\n";
  return out;
}

inline void save_model(const RepairModel& model, const std::string& path) {
  atomic_write_file(path, serialize_model(model));
}

inline RepairModel load_model(const std::string& path) {
  detail::LineCursor cursor(read_file_to_string(path));

  // Version gate comes before any numeric parsing.
  const std::string& magic = cursor.take("the version line");
  if (magic != kModelMagic)
    throw FormatError("'" + path + "' is not a supported model file (expected '" +
                      std::string(kModelMagic) + "', found '" + magic + "')");

  RepairModel model;
  auto take_field = [&](const char* key) -> std::vector<std::string_view> {
    const std::string& line = cursor.take(std::string("'") + key + "'");
    std::vector<std::string_view> tokens = detail::tokenize(line);
    if (tokens.empty() || tokens[0] != key)
      throw FormatError("model file line " + std::to_string(cursor.line_number()) + ": expected '" +
                        key + "'");
    return tokens;
  };

  {
    auto tokens = take_field("d");
    if (tokens.size() != 2) throw FormatError("model file: malformed 'd' line");
    model.d = static_cast<std::size_t>(parse_u64(tokens[1], "d"));
    if (model.d == 0) throw FormatError("model file: d must be positive");
  }
  {
    auto tokens = take_field("t");
    if (tokens.size() != 2) throw FormatError("model file: malformed 't' line");
    model.t = parse_double(tokens[1], "t");
  }
  {
    auto tokens = take_field("seed");
    if (tokens.size() != 2) throw FormatError("model file: malformed 'seed' line");
    model.seed = parse_u64(tokens[1], "seed");
  }
  for (;;) {
    const std::string& line = cursor.peek("model metadata");
    std::vector<std::string_view> tokens = detail::tokenize(line);
    if (tokens.empty()) throw FormatError("model file: unexpected blank line");
    if (tokens[0] == "created") {
      model.created = detail::rest_of_line(line, 1);
      cursor.skip();
    } else if (tokens[0] == "fingerprint") {
      if (tokens.size() != 2) throw FormatError("model file: malformed 'fingerprint' line");
      model.schema_fingerprint = std::string(tokens[1]);
      cursor.skip();
    } else {
      break;
    }
  }
  {
    auto tokens = take_field("cells");
    if (tokens.size() != 1 + kCellCount) throw FormatError("model file: malformed 'cells' line");
    for (std::size_t c = 0; c < kCellCount; ++c)
      model.cell_counts[c] = static_cast<std::size_t>(parse_u64(tokens[1 + c], "cells"));
  }
  for (;;) {
    const std::string& line = cursor.peek("group blocks");
    std::vector<std::string_view> tokens = detail::tokenize(line);
    if (tokens.empty()) throw FormatError("model file: unexpected blank line");
    if (tokens[0] == "feature_name") {
      if (tokens.size() < 3) throw FormatError("model file: malformed 'feature_name' line");
      std::size_t k = static_cast<std::size_t>(parse_u64(tokens[1], "feature_name"));
      if (k != model.feature_names.size())
        throw FormatError("model file: feature names out of order");
      model.feature_names.push_back(detail::rest_of_line(line, 2));
      cursor.skip();
    } else if (tokens[0] == "schema") {
      model.schema_json = detail::rest_of_line(line, 1);
      cursor.skip();
    } else if (tokens[0] == "warning") {
      model.warnings.push_back(detail::rest_of_line(line, 1));
      cursor.skip();
    } else {
      break;
    }
  }

  model.groups[0].resize(model.d);
  model.groups[1].resize(model.d);
  for (int u = 0; u < 2; ++u) {
    for (std::size_t k = 0; k < model.d; ++k) {
      std::string where = "group (u=" + std::to_string(u) + ", feature " + std::to_string(k) + ")";
      auto tokens = take_field("group");
      if (tokens.size() != 4) throw FormatError("model file: malformed 'group' line");
      if (parse_u64(tokens[1], "group u") != static_cast<std::uint64_t>(u) ||
          parse_u64(tokens[2], "group k") != k)
        throw FormatError("model file: group blocks out of order at " + where);
      std::size_t nq = static_cast<std::size_t>(parse_u64(tokens[3], "group size"));
      if (nq < 2) throw FormatError("model file: support too small at " + where);

      GroupFeatureRepair& g = model.at(u, k);
      {
        auto sup = take_field("support");
        if (sup.size() != 3) throw FormatError("model file: malformed 'support' line at " + where);
        double lo = parse_double(sup[1], "support lo");
        double hi = parse_double(sup[2], "support hi");
        if (!(lo < hi))
          throw FormatError("model file: degenerate support at " + where);
        g.support = InterpolatedSupport(lo, hi, nq);
      }
      {
        auto bw = take_field("bandwidth");
        if (bw.size() != 3) throw FormatError("model file: malformed 'bandwidth' line at " + where);
        g.bandwidth[0] = parse_double(bw[1], "bandwidth");
        g.bandwidth[1] = parse_double(bw[2], "bandwidth");
      }
      for (int s = 0; s < 2; ++s) {
        std::string key = "pmf" + std::to_string(s);
        const std::string& line = cursor.take("'" + key + "' at " + where);
        std::vector<std::string_view> tk = detail::tokenize(line);
        if (tk.empty() || tk[0] != key)
          throw FormatError("model file: expected '" + key + "' at " + where);
        g.source[static_cast<std::size_t>(s)].support = g.support;
        g.source[static_cast<std::size_t>(s)].mass =
            detail::parse_number_row(detail::rest_of_line(line, 1), nq, key + " at " + where);
      }
      {
        const std::string& line = cursor.take("'target' at " + where);
        std::vector<std::string_view> tk = detail::tokenize(line);
        if (tk.empty() || tk[0] != "target")
          throw FormatError("model file: expected 'target' at " + where);
        g.target.support = g.support;
        g.target.mass =
            detail::parse_number_row(detail::rest_of_line(line, 1), nq, "target at " + where);
      }
      for (int s = 0; s < 2; ++s) {
        std::string key = "plan" + std::to_string(s);
        auto tokens2 = take_field(key.c_str());
        TransportPlan& plan = g.plan[static_cast<std::size_t>(s)];
        plan.source_support = g.support;
        plan.target_support = g.support;
        plan.rows = nq;
        plan.cols = nq;
        plan.mass.assign(nq * nq, 0.0);
        if (tokens2.size() >= 2 && tokens2[1] == "dense") {
          for (std::size_t i = 0; i < nq; ++i) {
            std::vector<double> row = detail::parse_number_row(
                cursor.take(key + " row " + std::to_string(i) + " at " + where), nq,
                key + " row " + std::to_string(i) + " at " + where);
            for (std::size_t j = 0; j < nq; ++j) plan.at(i, j) = row[j];
          }
        } else if (tokens2.size() == 3 && tokens2[1] == "sparse") {
          std::size_t nnz = static_cast<std::size_t>(parse_u64(tokens2[2], key + " nnz"));
          for (std::size_t e = 0; e < nnz; ++e) {
            const std::string& line = cursor.take(key + " entry at " + where);
            std::vector<std::string_view> tk = detail::tokenize(line);
            if (tk.size() != 3)
              throw FormatError("model file: malformed sparse entry at " + where);
            std::size_t i = static_cast<std::size_t>(parse_u64(tk[0], key + " row index"));
            std::size_t j = static_cast<std::size_t>(parse_u64(tk[1], key + " col index"));
            if (i >= nq || j >= nq)
              throw FormatError("model file: sparse index out of range at " + where);
            plan.at(i, j) = parse_double(tk[2], key + " mass");
          }
        } else {
          throw FormatError("model file: malformed '" + key + "' line at " + where);
        }
      }
    }
  }
  {
    const std::string& line = cursor.take("'end'");
    if (trim(line) != "end") throw FormatError("model file: expected 'end', found '" + line + "'");
  }

  // Structural parse done; now the semantic checks (nonnegativity, marginal
  // consistency within 1e-6, support sanity).
  model.validate(1e-6);
  return model;
}

}  // namespace fairot
