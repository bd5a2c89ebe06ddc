#pragma once

// CSV readers and writers for every on-disk artifact. Doubles are written in the
// shortest form that parses back to the same value, so a write/read cycle is exact.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <span>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

#include "pumphi/core.hpp"
#include "pumphi/error.hpp"
#include "pumphi/features.hpp"
#include "pumphi/hi.hpp"
#include "pumphi/simgen.hpp"

namespace pumphi {

inline void append_double(std::string& out, double v) {
  if (std::isnan(v)) {
    out += "nan";
    return;
  }
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

inline std::string format_double(double v) {
  std::string s;
  append_double(s, v);
  return s;
}

template <class Int>
inline void append_int(std::string& out, Int v) {
  char buf[24];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::string_view what = "value") {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    fail(Errc::data, "cannot parse " + std::string(what) + " '" + std::string(s) + "' as a number");
  }
  return v;
}

template <class Int>
inline Int parse_int(std::string_view s, std::string_view what = "value") {
  Int v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    fail(Errc::data, "cannot parse " + std::string(what) + " '" + std::string(s) + "' as an integer");
  }
  return v;
}

// Line-oriented reader for plain comma-separated files (no quoting).
class CsvReader {
 public:
  explicit CsvReader(const std::string& path) : path_(path), in_(path) {
    require(static_cast<bool>(in_), Errc::data, "cannot open " + path);
    std::vector<std::string_view> fields;
    require(next_raw(fields), Errc::data, path + " is empty (header row missing)");
    for (auto f : fields) header_.emplace_back(f);
  }

  const std::vector<std::string>& header() const noexcept { return header_; }
  const std::string& path() const noexcept { return path_; }
  std::size_t line() const noexcept { return line_no_; }

  void expect_header(std::span<const std::string> expected) const {
    if (header_.size() < expected.size() ||
        !std::equal(expected.begin(), expected.end(), header_.begin())) {
      std::string want;
      for (const auto& e : expected) want += (want.empty() ? "" : ",") + e;
      fail(Errc::data, path_ + ": header must start with " + want);
    }
  }

  void expect_exact_header(std::span<const std::string> expected) const {
    expect_header(expected);
    require(header_.size() == expected.size(), Errc::data, path_ + ": unexpected extra columns");
  }

  // Fields of the next non-empty line; views stay valid until the next call.
  bool next(std::vector<std::string_view>& fields) {
    if (!next_raw(fields)) return false;
    require(fields.size() == header_.size(), Errc::data,
            path_ + ":" + std::to_string(line_no_) + ": expected " + std::to_string(header_.size()) +
                " fields, found " + std::to_string(fields.size()));
    return true;
  }

  [[noreturn]] void error(const std::string& what) const {
    fail(Errc::data, path_ + ":" + std::to_string(line_no_) + ": " + what);
  }

 private:
  bool next_raw(std::vector<std::string_view>& fields) {
    while (std::getline(in_, buf_)) {
      ++line_no_;
      if (!buf_.empty() && buf_.back() == '\r') buf_.pop_back();
      if (buf_.empty()) continue;
      fields.clear();
      std::string_view rest(buf_);
      for (;;) {
        const auto comma = rest.find(',');
        fields.push_back(rest.substr(0, comma));
        if (comma == std::string_view::npos) break;
        rest.remove_prefix(comma + 1);
      }
      return true;
    }
    require(!in_.bad(), Errc::data, "read error in " + path_);
    return false;
  }

  std::string path_;
  std::ifstream in_;
  std::string buf_;
  std::vector<std::string> header_;
  std::size_t line_no_ = 0;
};

// ---------------------------------------------------------------------------
// Dataset: raw samples + run metadata

inline const std::vector<std::string>& sample_columns() {
  static const std::vector<std::string> cols = {"run_id",  "asset_id", "t_s",    "p1_mbar",
                                                "p2_mbar", "p3_mbar",  "p4_mbar"};
  return cols;
}

inline const std::vector<std::string>& metadata_columns() {
  static const std::vector<std::string> cols = {"run_id", "asset_id", "start_time", "recipe_id",
                                                "n_runs"};
  return cols;
}

// Every run must carry the same extra channels in the same order.
inline void write_samples(std::ostream& out, std::span<const RunRecord> runs) {
  std::vector<std::string> channels;
  if (!runs.empty()) {
    for (const auto& c : runs.front().extra_channels) channels.push_back(c.name);
  }
  std::string line;
  for (const auto& c : sample_columns()) line += (line.empty() ? "" : ",") + c;
  for (const auto& c : channels) line += "," + c;
  out << line << '\n';
  for (const auto& run : runs) {
    require(run.extra_channels.size() == channels.size(), Errc::data,
            "run " + std::to_string(run.run_id) + " has a different channel set");
    for (std::size_t i = 0; i < run.samples.size(); ++i) {
      line.clear();
      append_int(line, run.run_id);
      line += ',';
      append_int(line, run.asset_id);
      line += ',';
      append_double(line, run.samples[i].t);
      for (const auto& r : run.samples[i].readings) {
        line += ',';
        if (r) append_double(line, *r);
      }
      for (std::size_t c = 0; c < channels.size(); ++c) {
        const auto& ch = run.extra_channels[c];
        require(ch.name == channels[c] && ch.values.size() == run.samples.size(), Errc::data,
                "run " + std::to_string(run.run_id) + " channel " + ch.name + " is misaligned");
        line += ',';
        append_double(line, ch.values[i]);
      }
      line += '\n';
      out << line;
    }
  }
}

inline void write_metadata(std::ostream& out, std::span<const RunRecord> runs) {
  out << "run_id,asset_id,start_time,recipe_id,n_runs\n";
  std::string line;
  for (const auto& run : runs) {
    line.clear();
    append_int(line, run.run_id);
    line += ',';
    append_int(line, run.asset_id);
    line += ',';
    append_double(line, run.start_time);
    line += ',' + run.recipe_id + ',';
    append_int(line, run.n_runs);
    out << line << '\n';
  }
}

inline void write_ground_truth(std::ostream& out, std::span<const RunRecord> runs) {
  out << "run_id,c,p_ss\n";
  std::string line;
  for (const auto& run : runs) {
    if (!run.truth) continue;
    line.clear();
    append_int(line, run.run_id);
    line += ',';
    append_double(line, run.truth->contamination);
    line += ',';
    append_double(line, run.truth->p_ss);
    out << line << '\n';
  }
}

// Runs in metadata order, samples attached from the raw-sample file.
inline std::vector<RunRecord> read_dataset(const std::string& samples_path,
                                           const std::string& metadata_path) {
  std::vector<RunRecord> runs;
  std::unordered_map<std::int64_t, std::size_t> index;
  {
    CsvReader meta(metadata_path);
    meta.expect_exact_header(metadata_columns());
    std::vector<std::string_view> f;
    while (meta.next(f)) {
      RunRecord r;
      r.run_id = parse_int<std::int64_t>(f[0], "run_id");
      r.asset_id = parse_int<int>(f[1], "asset_id");
      r.start_time = parse_double(f[2], "start_time");
      r.recipe_id = std::string(f[3]);
      r.n_runs = parse_int<int>(f[4], "n_runs");
      if (r.recipe_id.empty()) meta.error("empty recipe_id");
      if (r.n_runs < 0) meta.error("negative n_runs");
      if (!index.emplace(r.run_id, runs.size()).second) {
        meta.error("duplicate run_id " + std::to_string(r.run_id));
      }
      runs.push_back(std::move(r));
    }
  }

  CsvReader samples(samples_path);
  samples.expect_header(sample_columns());
  const std::size_t fixed = sample_columns().size();
  std::vector<std::string> channels(samples.header().begin() + static_cast<std::ptrdiff_t>(fixed),
                                    samples.header().end());
  for (auto& run : runs) {
    for (const auto& c : channels) run.extra_channels.push_back({c, {}});
  }
  std::vector<std::string_view> f;
  std::int64_t last_id = std::numeric_limits<std::int64_t>::min();
  RunRecord* run = nullptr;
  while (samples.next(f)) {
    const auto id = parse_int<std::int64_t>(f[0], "run_id");
    if (id != last_id) {
      const auto it = index.find(id);
      if (it == index.end()) samples.error("run_id " + std::to_string(id) + " is not in the metadata");
      run = &runs[it->second];
      last_id = id;
    }
    if (parse_int<int>(f[1], "asset_id") != run->asset_id) samples.error("asset_id disagrees with metadata");
    PressureSample s;
    s.t = parse_double(f[2], "t_s");
    for (std::size_t k = 0; k < kSensorCount; ++k) {
      if (!f[3 + k].empty()) s.readings[k] = parse_double(f[3 + k], sample_columns()[3 + k]);
    }
    run->samples.push_back(s);
    for (std::size_t c = 0; c < channels.size(); ++c) {
      run->extra_channels[c].values.push_back(parse_double(f[fixed + c], channels[c]));
    }
  }
  return runs;
}

// ---------------------------------------------------------------------------
// Recipe plan

inline void write_plan(std::ostream& out, std::span<const PlanEntry> plan) {
  out << "asset_id,position,recipe_id\n";
  for (const auto& p : plan) out << p.asset_id << ',' << p.position << ',' << p.recipe_id << '\n';
}

inline std::vector<PlanEntry> read_plan(const std::string& path) {
  CsvReader in(path);
  static const std::vector<std::string> cols = {"asset_id", "position", "recipe_id"};
  in.expect_exact_header(cols);
  std::vector<PlanEntry> plan;
  std::vector<std::string_view> f;
  while (in.next(f)) {
    plan.push_back({parse_int<int>(f[0], "asset_id"), parse_int<int>(f[1], "position"), std::string(f[2])});
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Health index

inline void write_fits(std::ostream& out, std::span<const DegradationFit> fits) {
  out << "segment,k,d,t_bar,alpha,r2,n_points\n";
  std::string line;
  for (const auto& f : fits) {
    line = f.segment.label();
    for (double v : {f.k, f.d, f.t_bar, f.alpha, f.r2}) {
      line += ',';
      append_double(line, v);
    }
    line += ',';
    append_int(line, f.n_points);
    out << line << '\n';
  }
}

inline void write_hi(std::ostream& out, const HiSeries& hi) {
  out << "run_id,asset_id,start_time,n_runs,hi_s\n";
  std::string line;
  for (const auto& e : hi.entries) {
    line.clear();
    append_int(line, e.run_id);
    line += ',';
    append_int(line, e.asset_id);
    line += ',';
    append_double(line, e.start_time);
    line += ',';
    append_int(line, e.n_runs);
    line += ',';
    append_double(line, e.hi);
    out << line << '\n';
  }
}

// Entries only; the segment that produced them is recorded in fits.csv.
inline HiSeries read_hi(const std::string& path) {
  CsvReader in(path);
  static const std::vector<std::string> cols = {"run_id", "asset_id", "start_time", "n_runs", "hi_s"};
  in.expect_exact_header(cols);
  HiSeries hi;
  std::vector<std::string_view> f;
  while (in.next(f)) {
    hi.entries.push_back({parse_int<std::int64_t>(f[0], "run_id"), parse_int<int>(f[1], "asset_id"),
                          parse_double(f[2], "start_time"), parse_int<int>(f[3], "n_runs"),
                          parse_double(f[4], "hi_s")});
  }
  return hi;
}

// ---------------------------------------------------------------------------
// Supervised set: features.csv (names + target) and meta.csv (one line per row)

inline void write_features(std::ostream& out, const SupervisedSet& set) {
  std::string line;
  for (const auto& n : set.names) line += n + ",";
  out << line << "target\n";
  for (std::size_t i = 0; i < set.size(); ++i) {
    line.clear();
    for (double v : set.X.row(i)) {
      append_double(line, v);
      line += ',';
    }
    append_double(line, set.y[i]);
    out << line << '\n';
  }
}

inline void write_feature_meta(std::ostream& out, const SupervisedSet& set) {
  out << "asset_id,run_id,target_run_id,start_time,n_runs,target_n_runs,hi_now,recipe_id,planned\n";
  std::string line;
  for (const auto& m : set.meta) {
    line.clear();
    append_int(line, m.asset_id);
    line += ',';
    append_int(line, m.run_id);
    line += ',';
    append_int(line, m.target_run_id);
    line += ',';
    append_double(line, m.start_time);
    line += ',';
    append_int(line, m.n_runs);
    line += ',';
    append_int(line, m.target_n_runs);
    line += ',';
    append_double(line, m.hi_now);
    line += ',' + m.recipe + ',';
    for (std::size_t b = 0; b < m.planned.size(); ++b) line += (b ? ";" : "") + m.planned[b];
    out << line << '\n';
  }
}

inline SupervisedSet read_supervised(const std::string& features_path, const std::string& meta_path) {
  SupervisedSet set;
  {
    CsvReader in(features_path);
    const auto& h = in.header();
    require(h.size() >= 2 && h.back() == "target", Errc::data,
            features_path + ": last column must be 'target'");
    set.names.assign(h.begin(), h.end() - 1);
    std::vector<double> data;
    std::vector<std::string_view> f;
    while (in.next(f)) {
      for (std::size_t j = 0; j + 1 < f.size(); ++j) data.push_back(parse_double(f[j], set.names[j]));
      set.y.push_back(parse_double(f.back(), "target"));
    }
    set.X = Matrix(set.y.size(), set.names.size());
    set.X.data = std::move(data);
  }
  {
    CsvReader in(meta_path);
    static const std::vector<std::string> cols = {"asset_id", "run_id", "target_run_id", "start_time",
                                                  "n_runs", "target_n_runs", "hi_now", "recipe_id",
                                                  "planned"};
    in.expect_exact_header(cols);
    std::vector<std::string_view> f;
    while (in.next(f)) {
      RowMeta m;
      m.asset_id = parse_int<int>(f[0], "asset_id");
      m.run_id = parse_int<std::int64_t>(f[1], "run_id");
      m.target_run_id = parse_int<std::int64_t>(f[2], "target_run_id");
      m.start_time = parse_double(f[3], "start_time");
      m.n_runs = parse_int<int>(f[4], "n_runs");
      m.target_n_runs = parse_int<int>(f[5], "target_n_runs");
      m.hi_now = parse_double(f[6], "hi_now");
      m.recipe = std::string(f[7]);
      std::string_view rest = f[8];
      while (!rest.empty()) {
        const auto semi = rest.find(';');
        m.planned.emplace_back(rest.substr(0, semi));
        if (semi == std::string_view::npos) break;
        rest.remove_prefix(semi + 1);
      }
      set.meta.push_back(std::move(m));
    }
  }
  require(set.meta.size() == set.y.size(), Errc::data,
          meta_path + " and " + features_path + " have different row counts");

  // Vocabulary and horizon are implied by the encoded column names.
  const auto n_runs_col = std::find(set.names.begin(), set.names.end(), "n_runs");
  require(n_runs_col != set.names.end(), Errc::data, features_path + ": no n_runs column");
  std::size_t plan_cols = 0;
  for (auto it = std::next(n_runs_col); it != set.names.end(); ++it) {
    if (it->starts_with("recipe_")) {
      set.vocab.push_back(it->substr(7));
    } else if (it->starts_with("plan")) {
      ++plan_cols;
    }
  }
  require(!set.vocab.empty(), Errc::vocabulary_empty, features_path + ": no recipe columns");
  const std::size_t blocks = plan_cols / set.vocab.size();
  set.horizon = blocks;
  require(blocks * set.vocab.size() == plan_cols &&
              static_cast<std::size_t>(set.names.end() - n_runs_col) == 1 + set.vocab.size() * (1 + blocks),
          Errc::data, features_path + ": recipe columns do not form complete blocks");
  for (const auto& m : set.meta) {
    require(m.planned.size() == blocks, Errc::data,
            meta_path + ": run " + std::to_string(m.run_id) + " has a plan of the wrong length");
  }
  return set;
}

}  // namespace pumphi
